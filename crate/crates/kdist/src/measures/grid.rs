use num_complex::Complex;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::scalar::{cst, from_usize, to_f64, Real};

use super::analytic::{open_unit, Analytic1D};
use super::MASS_TOL;

/// Density sampled on the uniform grid x₀ + jΔx, linear in between and zero
/// outside.
#[derive(Clone, Debug, PartialEq)]
pub struct GridDensity1D<T> {
    pub x0: T,
    pub dx: T,
    pub values: Vec<T>,
    cum: Vec<T>,
}

/// Default number of grid points.
pub const DEFAULT_GRID: usize = 1 << 12;

impl<T: Real> GridDensity1D<T> {
    pub fn new(x0: T, dx: T, values: Vec<T>) -> Result<Self> {
        let g = Self::unchecked(x0, dx, values);
        g.validate()?;
        Ok(g)
    }

    fn unchecked(x0: T, dx: T, values: Vec<T>) -> Self {
        let mut cum = Vec::with_capacity(values.len());
        let mut acc = T::zero();
        cum.push(acc);
        for w in values.windows(2) {
            acc += (w[0] + w[1]) * dx * cst(0.5);
            cum.push(acc);
        }
        GridDensity1D { x0, dx, values, cum }
    }

    /// Samples `f` at `n` points spanning [lo, hi].
    pub fn from_fn<F: Fn(T) -> T>(f: F, lo: T, hi: T, n: usize) -> Result<Self> {
        if n < 2 || !(hi > lo) {
            return Err(Error::InvalidParameter("grid needs n >= 2 and lo < hi".into()));
        }
        let dx = (hi - lo) / from_usize::<T>(n - 1);
        let values = (0..n).map(|j| f(lo + dx * from_usize::<T>(j))).collect();
        Self::new(lo, dx, values)
    }

    /// Like [`from_fn`](Self::from_fn) but rescaled to unit trapezoid mass.
    pub fn from_fn_normalized<F: Fn(T) -> T>(f: F, lo: T, hi: T, n: usize) -> Result<Self> {
        if n < 2 || !(hi > lo) {
            return Err(Error::InvalidParameter("grid needs n >= 2 and lo < hi".into()));
        }
        let dx = (hi - lo) / from_usize::<T>(n - 1);
        let values: Vec<T> = (0..n).map(|j| f(lo + dx * from_usize::<T>(j))).collect();
        let raw = Self::unchecked(lo, dx, values);
        let mass = raw.mass();
        Self::new(lo, dx, raw.values.iter().map(|v| *v / mass).collect())
    }

    /// Gridded version of an analytic density over its effective support.
    pub fn from_analytic(a: &Analytic1D<T>, n: usize) -> Result<Self> {
        let (lo, hi) = a.support();
        let r = a.effective_radius(cst(1e-10));
        let lo = if lo.is_finite() { lo } else { -r };
        let hi = if hi.is_finite() { hi } else { r };
        Self::from_fn_normalized(|x| a.pdf(x), lo, hi, n)
    }

    pub fn x_max(&self) -> T {
        self.x0 + self.dx * from_usize::<T>(self.values.len() - 1)
    }

    pub fn node(&self, j: usize) -> T {
        self.x0 + self.dx * from_usize::<T>(j)
    }

    pub fn mass(&self) -> T {
        *self.cum.last().unwrap_or(&T::zero())
    }

    pub fn validate(&self) -> Result<()> {
        if self.values.len() < 2 || !(self.dx > T::zero()) || !self.x0.is_finite() {
            return Err(Error::Validation("grid density needs >= 2 points and dx > 0".into()));
        }
        if let Some(j) = self.values.iter().position(|v| !(*v >= T::zero()) || !v.is_finite()) {
            return Err(Error::Validation(format!(
                "grid density value {j} is negative or non-finite"
            )));
        }
        let m = to_f64(self.mass());
        if (m - 1.0).abs() > MASS_TOL {
            return Err(Error::Validation(format!("grid density has trapezoid mass {m}")));
        }
        Ok(())
    }

    fn locate(&self, x: T) -> Option<(usize, T)> {
        let t = (x - self.x0) / self.dx;
        if !(t >= T::zero()) || t > from_usize(self.values.len() - 1) {
            return None;
        }
        let j = t.floor().to_usize().unwrap_or(0).min(self.values.len() - 2);
        Some((j, t - from_usize::<T>(j)))
    }

    pub fn pdf(&self, x: T) -> T {
        match self.locate(x) {
            Some((j, f)) => self.values[j] * (T::one() - f) + self.values[j + 1] * f,
            None => T::zero(),
        }
    }

    /// Cumulative trapezoid, exact for the linear interpolant.
    pub fn cdf(&self, x: T) -> T {
        if x < self.x0 {
            return T::zero();
        }
        match self.locate(x) {
            Some((j, f)) => {
                let (a, b) = (self.values[j], self.values[j + 1]);
                let part = self.dx * (a * f + (b - a) * f * f * cst(0.5));
                (self.cum[j] + part).min(T::one())
            }
            None => self.mass().min(T::one()),
        }
    }

    /// Exact Fourier integral of the piecewise-linear interpolant.
    pub fn char_fn(&self, omega: T) -> Complex<T> {
        let h = self.dx;
        let theta = omega * h;
        let i = Complex::new(T::zero(), T::one());
        // E0 = ∫₀¹ e^{iθt} dt, E1 = ∫₀¹ t e^{iθt} dt
        let (e0, e1) = if theta.abs() < cst(1e-3) {
            let it = i * theta;
            let mut e0 = Complex::new(T::zero(), T::zero());
            let mut e1 = Complex::new(T::zero(), T::zero());
            let mut pow = Complex::new(T::one(), T::zero());
            let mut fact = T::one();
            for k in 0..8 {
                let kf = from_usize::<T>(k);
                e0 += pow / (fact * (kf + T::one()));
                e1 += pow / (fact * (kf + cst(2.0)));
                pow *= it;
                fact *= kf + T::one();
            }
            (e0, e1)
        } else {
            let it = i * theta;
            let e = it.exp();
            let e0 = (e - T::one()) / it;
            (e0, e / it - (e - T::one()) / (it * it))
        };
        let mut acc = Complex::new(T::zero(), T::zero());
        for j in 0..self.values.len() - 1 {
            let (f0, f1) = (self.values[j], self.values[j + 1]);
            if f0 == T::zero() && f1 == T::zero() {
                continue;
            }
            let seg = e0 * f0 + e1 * (f1 - f0);
            acc += Complex::from_polar(h, omega * self.node(j)) * seg;
        }
        acc
    }

    pub fn sample_one(&self, rng: &mut ChaCha8Rng) -> T {
        let total = self.mass();
        let r = cst::<T>(open_unit(rng)) * total;
        let j = match self.cum.binary_search_by(|c| c.partial_cmp(&r).unwrap()) {
            Ok(j) => j.min(self.values.len() - 2),
            Err(j) => j.saturating_sub(1).min(self.values.len() - 2),
        };
        let rem = r - self.cum[j];
        let (f0, f1) = (self.values[j], self.values[j + 1]);
        let h = self.dx;
        let slope = (f1 - f0) / h;
        // f0 t + slope t²/2 = rem
        let disc = (f0 * f0 + cst::<T>(2.0) * slope * rem).max(T::zero());
        let denom = f0 + disc.sqrt();
        let t = if denom > T::zero() {
            cst::<T>(2.0) * rem / denom
        } else {
            h * cst(0.5)
        };
        self.node(j) + t.min(h).max(T::zero())
    }
}
