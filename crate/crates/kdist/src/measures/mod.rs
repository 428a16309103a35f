//! Probability measures: finite discrete, gridded and analytic densities on
//! ℝ, and densities on the torus.

mod analytic;
mod grid;
mod torus;

use std::fmt;

use num_complex::Complex;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::{cst, to_f64, Real};

pub use analytic::{Analytic1D, Perturbation};
pub use grid::{GridDensity1D, DEFAULT_GRID};
pub use torus::{reduce, TorusDensity};

/// Tolerance on total mass accepted by `validate`.
pub const MASS_TOL: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq)]
pub struct Discrete<T> {
    pub atoms: Vec<(Vec<T>, T)>,
}

impl<T: Real> Discrete<T> {
    pub fn new(atoms: Vec<(Vec<T>, T)>) -> Result<Self> {
        let d = Discrete { atoms };
        d.validate()?;
        Ok(d)
    }

    /// One-dimensional atoms.
    pub fn from_1d(atoms: &[(T, T)]) -> Result<Self> {
        Self::new(atoms.iter().map(|&(x, w)| (vec![x], w)).collect())
    }

    pub fn dirac(x: Vec<T>) -> Self {
        Discrete {
            atoms: vec![(x, T::one())],
        }
    }

    /// Empirical measure of a sample, duplicate points merged by weight.
    pub fn empirical(points: &[Vec<T>]) -> Self {
        let w = T::one() / cst::<T>(points.len() as f64);
        let mut atoms: Vec<(Vec<T>, T)> = Vec::new();
        let mut sorted: Vec<&Vec<T>> = points.iter().collect();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
        for p in sorted {
            match atoms.last_mut() {
                Some((x, wt)) if x == p => *wt += w,
                _ => atoms.push((p.clone(), w)),
            }
        }
        Discrete { atoms }
    }

    pub fn dim(&self) -> usize {
        self.atoms.first().map_or(1, |a| a.0.len())
    }

    pub fn validate(&self) -> Result<()> {
        if self.atoms.is_empty() {
            return Err(Error::Validation("discrete measure has no atoms".into()));
        }
        let d = self.dim();
        let mut total = 0.0;
        for (i, (x, w)) in self.atoms.iter().enumerate() {
            if x.len() != d || x.iter().any(|v| !v.is_finite()) {
                return Err(Error::Validation(format!("atom {i} has a bad location")));
            }
            if !(*w >= T::zero()) || !w.is_finite() {
                return Err(Error::Validation(format!(
                    "atom {i} has negative or non-finite weight {w}"
                )));
            }
            total += to_f64(*w);
            if self.atoms[..i].iter().any(|(y, _)| y == x) {
                return Err(Error::Validation(format!("atom {i} repeats an earlier location")));
            }
        }
        if (total - 1.0).abs() > MASS_TOL {
            return Err(Error::Validation(format!("discrete weights sum to {total}")));
        }
        Ok(())
    }

    pub fn cdf(&self, x: T) -> T {
        self.atoms
            .iter()
            .filter(|a| a.0[0] <= x)
            .map(|a| a.1)
            .sum::<T>()
            .min(T::one())
    }

    pub fn char_fn(&self, omega: &[T]) -> Complex<T> {
        self.atoms
            .iter()
            .fold(Complex::new(T::zero(), T::zero()), |acc, (x, w)| {
                let arg: T = x.iter().zip(omega).map(|(a, b)| *a * *b).sum();
                acc + Complex::from_polar(*w, arg)
            })
    }

    fn sample_one(&self, u: T) -> Vec<T> {
        let mut c = T::zero();
        for (x, w) in &self.atoms {
            c += *w;
            if u < c {
                return x.clone();
            }
        }
        self.atoms
            .iter()
            .rev()
            .find(|a| a.1 > T::zero())
            .unwrap_or(&self.atoms[0])
            .0
            .clone()
    }
}

#[derive(Clone, Debug)]
pub enum Measure<T: Real> {
    Discrete(Discrete<T>),
    Grid(GridDensity1D<T>),
    Analytic(Analytic1D<T>),
    Torus(TorusDensity<T>),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Sample<T> {
    pub points: Vec<Vec<T>>,
    pub seed: u64,
    pub source: String,
}

impl<T: Real> Sample<T> {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn values_1d(&self) -> Vec<T> {
        self.points.iter().map(|p| p[0]).collect()
    }
}

/// Deterministic generator for stream `stream` of `seed`.
pub fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

impl<T: Real> Measure<T> {
    pub fn dirac(x: T) -> Self {
        Measure::Discrete(Discrete::dirac(vec![x]))
    }

    pub fn discrete_1d(atoms: &[(T, T)]) -> Result<Self> {
        Ok(Measure::Discrete(Discrete::from_1d(atoms)?))
    }

    pub fn gaussian(mu: T, s: T) -> Result<Self> {
        Ok(Measure::Analytic(Analytic1D::gaussian(mu, s)?))
    }

    pub fn cauchy(x0: T, gamma: T) -> Result<Self> {
        Ok(Measure::Analytic(Analytic1D::cauchy(x0, gamma)?))
    }

    pub fn uniform(a: T, b: T) -> Result<Self> {
        Ok(Measure::Analytic(Analytic1D::uniform(a, b)?))
    }

    pub fn dim(&self) -> usize {
        match self {
            Measure::Discrete(d) => d.dim(),
            Measure::Grid(_) | Measure::Analytic(_) => 1,
            Measure::Torus(t) => t.dim(),
        }
    }

    pub fn is_torus(&self) -> bool {
        matches!(self, Measure::Torus(_))
    }

    pub fn as_discrete(&self) -> Option<&Discrete<T>> {
        match self {
            Measure::Discrete(d) => Some(d),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Measure::Discrete(d) => d.validate(),
            Measure::Grid(g) => g.validate(),
            Measure::Analytic(a) => a.validate(),
            Measure::Torus(t) => t.validate(),
        }
    }

    /// Lebesgue density on ℝ, when the measure has one.
    pub fn pdf(&self, x: T) -> Option<T> {
        match self {
            Measure::Grid(g) => Some(g.pdf(x)),
            Measure::Analytic(a) => Some(a.pdf(x)),
            _ => None,
        }
    }

    pub fn has_density_1d(&self) -> bool {
        matches!(self, Measure::Grid(_) | Measure::Analytic(_))
    }

    /// F(x) = P((−∞, x]) for measures on ℝ.
    pub fn cdf(&self, x: T) -> Result<T> {
        match self {
            Measure::Discrete(d) if d.dim() == 1 => Ok(d.cdf(x)),
            Measure::Grid(g) => Ok(g.cdf(x)),
            Measure::Analytic(a) => Ok(a.cdf(x)),
            _ => Err(Error::Domain("cdf needs a measure on the real line".into())),
        }
    }

    /// φ_P(ω) = ∫ e^{iωᵀx} dP(x)
    pub fn char_function(&self, omega: &[T]) -> Complex<T> {
        match self {
            Measure::Discrete(d) => d.char_fn(omega),
            Measure::Grid(g) => g.char_fn(omega[0]),
            Measure::Analytic(a) => a.char_fn(omega[0]),
            Measure::Torus(t) => t.char_fn(omega),
        }
    }

    /// A_P(n) = (2π)^{−d} ∫ e^{−inᵀx} dP(x) for measures on the torus.
    pub fn torus_fourier_coeff(&self, n: &[i64]) -> Result<Complex<T>> {
        match self {
            Measure::Torus(t) if t.dim() == n.len() => Ok(t.fourier_coeff(n)),
            Measure::Torus(_) => Err(Error::Domain("frequency dimension mismatch".into())),
            _ => Err(Error::Domain("Fourier coefficients need a torus measure".into())),
        }
    }

    /// Breakpoints and support of a one-dimensional density.
    pub fn breakpoints(&self) -> Vec<T> {
        match self {
            Measure::Analytic(a) => a.breakpoints(),
            Measure::Grid(g) => vec![g.x0, g.x_max()],
            _ => Vec::new(),
        }
    }

    pub fn support_1d(&self) -> (T, T) {
        match self {
            Measure::Analytic(a) => a.support(),
            Measure::Grid(g) => (g.x0, g.x_max()),
            Measure::Discrete(d) => {
                let lo = d.atoms.iter().map(|a| a.0[0]).fold(T::infinity(), T::min);
                let hi = d.atoms.iter().map(|a| a.0[0]).fold(T::neg_infinity(), T::max);
                (lo, hi)
            }
            Measure::Torus(_) => (T::zero(), T::TAU()),
        }
    }

    /// i.i.d. draws, deterministic given `seed`.
    pub fn sample(&self, m: usize, seed: u64) -> Result<Sample<T>> {
        self.sample_stream(m, seed, 0)
    }

    /// i.i.d. draws from the independent stream `stream` of `seed`.
    pub fn sample_stream(&self, m: usize, seed: u64, stream: u64) -> Result<Sample<T>> {
        if m == 0 {
            return Err(Error::InvalidParameter("sample size must be at least 1".into()));
        }
        let mut rng = rng_for(seed, stream);
        let points = self.draw(m, &mut rng)?;
        Ok(Sample {
            points,
            seed,
            source: self.to_string(),
        })
    }

    /// Draws `m` points from an existing generator.
    pub fn draw(&self, m: usize, rng: &mut ChaCha8Rng) -> Result<Vec<Vec<T>>> {
        let mut points = Vec::with_capacity(m);
        for _ in 0..m {
            let p = match self {
                Measure::Discrete(d) => d.sample_one(cst(rng.gen::<f64>())),
                Measure::Grid(g) => vec![g.sample_one(rng)],
                Measure::Analytic(a) => vec![a.sample_one(rng)?],
                Measure::Torus(t) => t.sample_one(rng)?,
            };
            points.push(p);
        }
        Ok(points)
    }
}

fn fmt_point<T: Real>(x: &[T]) -> String {
    if x.len() == 1 {
        x[0].to_string()
    } else {
        let parts: Vec<String> = x.iter().map(|v| v.to_string()).collect();
        format!("[{}]", parts.join(","))
    }
}

impl<T: Real> fmt::Display for Discrete<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .atoms
            .iter()
            .map(|(x, w)| format!("({},{w})", fmt_point(x)))
            .collect();
        write!(f, "discrete[{}]", parts.join(","))
    }
}

impl<T: Real> fmt::Display for Measure<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Measure::Discrete(d) => write!(f, "{d}"),
            Measure::Grid(g) => write!(f, "grid(x0={},dx={},n={})", g.x0, g.dx, g.values.len()),
            Measure::Analytic(a) => write!(f, "{a}"),
            Measure::Torus(t) => write!(f, "{t}"),
        }
    }
}

#[cfg(test)]
mod tests;
