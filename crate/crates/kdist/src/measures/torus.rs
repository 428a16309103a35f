//! Densities on the torus 𝕋^d = [0, 2π)^d.

use std::fmt;

use num_complex::Complex;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::kernels::DensityFn;
use crate::quadrature::{gauss_legendre, Quad};
use crate::scalar::{cst, from_i64, Real};

use super::analytic::{open_unit, proposal_cap, MAX_PROPOSALS};

#[derive(Clone)]
pub enum TorusDensity<T> {
    Uniform {
        dim: usize,
    },
    /// (2π)^{−d} − 2α sin(n₀ᵀx)
    FlatSinusoid {
        dim: usize,
        n0: Vec<i64>,
        alpha: T,
    },
    /// Arbitrary density with a known upper bound (used for rejection sampling).
    Closure {
        dim: usize,
        density: DensityFn<T>,
        sup: T,
    },
}

/// (2π)^{−d}
fn flat<T: Real>(d: usize) -> T {
    T::one() / T::TAU().powi(d as i32)
}

// composite Gauss–Legendre nodes on [0, 2π): 16 panels of 20 points
fn torus_nodes() -> Vec<(f64, f64)> {
    let gl = gauss_legendre(20);
    let panels = 16;
    let h = std::f64::consts::TAU / panels as f64;
    let mut out = Vec::with_capacity(panels * gl.len());
    for p in 0..panels {
        let a = p as f64 * h;
        for &(x, w) in &gl {
            out.push((a + 0.5 * h * (x + 1.0), 0.5 * h * w));
        }
    }
    out
}

impl<T: Real> TorusDensity<T> {
    pub fn dim(&self) -> usize {
        match self {
            TorusDensity::Uniform { dim }
            | TorusDensity::FlatSinusoid { dim, .. }
            | TorusDensity::Closure { dim, .. } => *dim,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.dim();
        if d == 0 {
            return Err(Error::Validation("torus dimension must be positive".into()));
        }
        match self {
            TorusDensity::Uniform { .. } => Ok(()),
            TorusDensity::FlatSinusoid { n0, alpha, .. } => {
                if n0.len() != d || n0.iter().all(|&n| n == 0) {
                    return Err(Error::Validation(
                        "flat-plus-sinusoid needs a nonzero frequency of matching dimension".into(),
                    ));
                }
                let bound = flat::<T>(d) * cst(0.5);
                if alpha.abs() > bound * (T::one() + cst(1e-12)) {
                    return Err(Error::Validation(format!(
                        "|alpha| = {} exceeds the positivity bound {bound}",
                        alpha.abs()
                    )));
                }
                Ok(())
            }
            TorusDensity::Closure { .. } => {
                let mass = self.fourier_coeff(&vec![0; d]).re * T::TAU().powi(d as i32);
                if (mass - T::one()).abs() > cst(1e-8) {
                    return Err(Error::Validation(format!("torus density integrates to {mass}")));
                }
                Ok(())
            }
        }
    }

    pub fn pdf(&self, x: &[T]) -> T {
        match self {
            TorusDensity::Uniform { dim } => flat(*dim),
            TorusDensity::FlatSinusoid { dim, n0, alpha } => {
                let arg: T = x.iter().zip(n0).map(|(xi, &n)| *xi * from_i64::<T>(n)).sum();
                flat::<T>(*dim) - cst::<T>(2.0) * *alpha * arg.sin()
            }
            TorusDensity::Closure { density, .. } => {
                let r: Vec<T> = x.iter().map(|&v| reduce(v)).collect();
                density(&r)
            }
        }
    }

    fn integrate<F: Fn(&[T]) -> Complex<T>>(&self, f: F) -> Complex<T> {
        let d = self.dim();
        if d == 1 {
            let q = Quad::with_tol(cst(1e-13));
            let re = q.integrate(|x| f(&[x]).re, &[T::zero(), T::TAU()]).value;
            let im = q.integrate(|x| f(&[x]).im, &[T::zero(), T::TAU()]).value;
            return Complex::new(re, im);
        }
        let nodes = torus_nodes();
        let mut idx = vec![0usize; d];
        let mut acc = Complex::new(T::zero(), T::zero());
        let mut x = vec![T::zero(); d];
        loop {
            let mut w = T::one();
            for j in 0..d {
                x[j] = cst(nodes[idx[j]].0);
                w *= cst::<T>(nodes[idx[j]].1);
            }
            acc += f(&x) * w;
            let mut j = 0;
            while j < d {
                idx[j] += 1;
                if idx[j] == nodes.len() {
                    idx[j] = 0;
                    j += 1;
                } else {
                    break;
                }
            }
            if j == d {
                return acc;
            }
        }
    }

    /// A_P(n) = (2π)^{−d} ∫ e^{−inᵀx} dP(x)
    pub fn fourier_coeff(&self, n: &[i64]) -> Complex<T> {
        let d = self.dim();
        let zero = Complex::new(T::zero(), T::zero());
        match self {
            TorusDensity::Uniform { .. } => {
                if n.iter().all(|&v| v == 0) {
                    Complex::new(flat(d), T::zero())
                } else {
                    zero
                }
            }
            TorusDensity::FlatSinusoid { n0, alpha, .. } => {
                if n.iter().all(|&v| v == 0) {
                    Complex::new(flat(d), T::zero())
                } else if n == n0.as_slice() {
                    Complex::new(T::zero(), *alpha)
                } else if n.iter().zip(n0).all(|(a, b)| *a == -*b) {
                    Complex::new(T::zero(), -*alpha)
                } else {
                    zero
                }
            }
            TorusDensity::Closure { .. } => {
                let v = self.integrate(|x| {
                    let arg: T = x.iter().zip(n).map(|(xi, &k)| *xi * from_i64::<T>(k)).sum();
                    Complex::from_polar(self.pdf(x), -arg)
                });
                v * flat::<T>(d)
            }
        }
    }

    /// ∫_{[0,2π)^d} e^{iωᵀx} dP(x)
    pub fn char_fn(&self, omega: &[T]) -> Complex<T> {
        self.integrate(|x| {
            let arg: T = x.iter().zip(omega).map(|(a, b)| *a * *b).sum();
            Complex::from_polar(self.pdf(x), arg)
        })
    }

    fn sup(&self) -> T {
        match self {
            TorusDensity::Uniform { dim } => flat(*dim),
            TorusDensity::FlatSinusoid { dim, alpha, .. } => flat::<T>(*dim) + cst::<T>(2.0) * alpha.abs(),
            TorusDensity::Closure { sup, .. } => *sup,
        }
    }

    pub fn sample_one(&self, rng: &mut ChaCha8Rng) -> Result<Vec<T>> {
        let d = self.dim();
        let draw = |rng: &mut ChaCha8Rng| -> Vec<T> {
            (0..d)
                .map(|_| cst::<T>(open_unit(rng) * std::f64::consts::TAU))
                .collect()
        };
        if let TorusDensity::Uniform { .. } = self {
            return Ok(draw(rng));
        }
        let m = self.sup();
        for _ in 0..MAX_PROPOSALS {
            let x = draw(rng);
            if cst::<T>(rng.gen::<f64>()) * m <= self.pdf(&x) {
                return Ok(x);
            }
        }
        Err(proposal_cap())
    }
}

/// x mod 2π in [0, 2π)
pub fn reduce<T: Real>(x: T) -> T {
    let r = x % T::TAU();
    if r < T::zero() {
        r + T::TAU()
    } else {
        r
    }
}

impl<T: Real> fmt::Display for TorusDensity<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TorusDensity::Uniform { dim } => write!(f, "torus_uniform(d={dim})"),
            TorusDensity::FlatSinusoid { dim, n0, alpha } => {
                let n: Vec<String> = n0.iter().map(|v| v.to_string()).collect();
                write!(f, "torus_flat(d={dim},n0=[{}],alpha={alpha})", n.join(","))
            }
            TorusDensity::Closure { dim, .. } => write!(f, "torus_density(d={dim})"),
        }
    }
}

impl<T: Real> fmt::Debug for TorusDensity<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}
