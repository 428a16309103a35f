//! Translation-invariant kernels on the torus 𝕋^d = [0, 2π)^d, described by
//! their Fourier series coefficients ψ(x) = Σ_n A_ψ(n) e^{i nᵀx}.

use crate::error::{invalid, Result};
use crate::scalar::{cst, from_i64, Real};

#[derive(Debug, Clone, PartialEq)]
pub enum TorusFamily<T> {
    /// A_ψ(n) = σ^{|n|}, 0 < σ < 1.
    Poisson { sigma: T },
    /// A_ψ(n) = 1 for |n| ≤ n_max.
    Dirichlet { n: u32 },
    /// A_ψ(n) = 1 − |n|/(n_max+1) for |n| ≤ n_max.
    Fejer { n: u32 },
    /// cos(m x): A_ψ(±m) = ½.
    Cosine { freq: u32 },
    /// Coefficients A_ψ(0), A_ψ(1), ... ; A_ψ(−n) = A_ψ(n), zero past the table.
    Explicit { coeffs: Vec<T> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct TorusKernelSpec<T> {
    pub family: TorusFamily<T>,
    pub dim: usize,
}

impl<T: Real> TorusKernelSpec<T> {
    pub fn new(family: TorusFamily<T>, dim: usize) -> Result<Self> {
        if dim == 0 {
            return invalid("torus dimension must be positive");
        }
        match &family {
            TorusFamily::Poisson { sigma } => {
                if !(*sigma > T::zero() && *sigma < T::one()) {
                    return invalid("poisson kernel needs 0 < sigma < 1");
                }
            }
            TorusFamily::Cosine { freq } => {
                if *freq == 0 {
                    return invalid("cosine kernel needs a positive frequency");
                }
            }
            TorusFamily::Explicit { coeffs }
                if (coeffs.is_empty() || coeffs.iter().any(|c| !(*c >= T::zero()) || !c.is_finite())) =>
            {
                return invalid("explicit torus coefficients must be finite and nonnegative");
            }
            _ => {}
        }
        Ok(TorusKernelSpec { family, dim })
    }

    pub fn poisson(sigma: T) -> Result<Self> {
        Self::new(TorusFamily::Poisson { sigma }, 1)
    }

    pub fn dirichlet(n: u32) -> Self {
        TorusKernelSpec {
            family: TorusFamily::Dirichlet { n },
            dim: 1,
        }
    }

    pub fn fejer(n: u32) -> Self {
        TorusKernelSpec {
            family: TorusFamily::Fejer { n },
            dim: 1,
        }
    }

    pub fn cosine(freq: u32) -> Result<Self> {
        Self::new(TorusFamily::Cosine { freq }, 1)
    }

    pub fn with_dim(mut self, dim: usize) -> Self {
        self.dim = dim.max(1);
        self
    }

    /// One-dimensional coefficient A(n).
    pub fn coeff_1d(&self, n: i64) -> T {
        let a = n.unsigned_abs();
        match &self.family {
            TorusFamily::Poisson { sigma } => sigma.powi(a.min(i32::MAX as u64) as i32),
            TorusFamily::Dirichlet { n } => {
                if a <= *n as u64 {
                    T::one()
                } else {
                    T::zero()
                }
            }
            TorusFamily::Fejer { n } => {
                if a <= *n as u64 {
                    T::one() - from_i64::<T>(a as i64) / from_i64::<T>(*n as i64 + 1)
                } else {
                    T::zero()
                }
            }
            TorusFamily::Cosine { freq } => {
                if a == *freq as u64 {
                    cst(0.5)
                } else {
                    T::zero()
                }
            }
            TorusFamily::Explicit { coeffs } => coeffs.get(a as usize).copied().unwrap_or_else(T::zero),
        }
    }

    /// Product coefficient A_ψ(n) = Π_j A(n_j).
    pub fn coeff(&self, n: &[i64]) -> T {
        n.iter().map(|&nj| self.coeff_1d(nj)).fold(T::one(), |a, b| a * b)
    }

    /// Largest |n| with a nonzero coefficient, if finite.
    pub fn cutoff(&self) -> Option<u64> {
        match &self.family {
            TorusFamily::Poisson { .. } => None,
            TorusFamily::Dirichlet { n } | TorusFamily::Fejer { n } => Some(*n as u64),
            TorusFamily::Cosine { freq } => Some(*freq as u64),
            TorusFamily::Explicit { coeffs } => Some(coeffs.len() as u64 - 1),
        }
    }

    /// ψ(0) = Σ_n A(n) in one dimension.
    pub fn total_1d(&self) -> T {
        self.psi_1d(T::zero())
    }

    /// Σ_{|n|>N} A(n) in one dimension.
    pub fn tail_1d(&self, big_n: u64) -> T {
        match &self.family {
            TorusFamily::Poisson { sigma } => {
                let s = *sigma;
                cst::<T>(2.0) * s.powi((big_n + 1).min(i32::MAX as u64) as i32) / (T::one() - s)
            }
            _ => {
                let c = self.cutoff().unwrap_or(0);
                let mut t = T::zero();
                for j in (big_n + 1)..=c.max(big_n) {
                    t += cst::<T>(2.0) * self.coeff_1d(j as i64);
                }
                t
            }
        }
    }

    /// Σ over n ∈ ℤ^d with max_j |n_j| > N of A_ψ(n); product structure gives
    /// S^d − (S − tail)^d.
    pub fn tail(&self, big_n: u64) -> T {
        let s = self.total_1d();
        let inner = s - self.tail_1d(big_n);
        let d = self.dim as i32;
        (s.powi(d) - inner.powi(d)).max(T::zero())
    }

    /// One-dimensional ψ(x).
    pub fn psi_1d(&self, x: T) -> T {
        match &self.family {
            TorusFamily::Poisson { sigma } => {
                let s = *sigma;
                (T::one() - s * s) / (s * s - cst::<T>(2.0) * s * x.cos() + T::one())
            }
            TorusFamily::Cosine { freq } => (from_i64::<T>(*freq as i64) * x).cos(),
            _ => {
                let c = self.cutoff().unwrap_or(0);
                let mut v = self.coeff_1d(0);
                for j in 1..=c {
                    v += cst::<T>(2.0) * self.coeff_1d(j as i64) * (from_i64::<T>(j as i64) * x).cos();
                }
                v
            }
        }
    }

    /// ψ(z) = Π_j ψ₁(z_j).
    pub fn psi(&self, z: &[T]) -> T {
        z.iter().map(|&zj| self.psi_1d(zj)).fold(T::one(), |a, b| a * b)
    }

    /// A_ψ(n) > 0 for every n ≠ 0.
    pub fn all_nonzero_positive(&self) -> bool {
        match &self.family {
            TorusFamily::Poisson { sigma } => *sigma > T::zero(),
            _ => false,
        }
    }

    /// First n ≠ 0 (one-dimensional index) with A(n) = 0.
    pub fn first_vanishing(&self) -> Option<i64> {
        if self.all_nonzero_positive() {
            return None;
        }
        (1..=(self.cutoff().unwrap_or(0) as i64 + 1)).find(|&j| self.coeff_1d(j) <= T::zero())
    }

    /// Family name and `key=value` parameters of the text form.
    pub fn text_parts(&self) -> (&'static str, Vec<String>) {
        match &self.family {
            TorusFamily::Poisson { sigma } => ("poisson", vec![format!("sigma={sigma}")]),
            TorusFamily::Dirichlet { n } => ("dirichlet", vec![format!("n={n}")]),
            TorusFamily::Fejer { n } => ("fejer", vec![format!("n={n}")]),
            TorusFamily::Cosine { freq } => ("cosine", vec![format!("freq={freq}")]),
            TorusFamily::Explicit { coeffs } => {
                let c: Vec<String> = coeffs.iter().map(|c| c.to_string()).collect();
                ("coefficients", vec![format!("values=[{}]", c.join(","))])
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn series_psi(k: &TorusKernelSpec<f64>, x: f64) -> f64 {
        (-200i64..=200).map(|n| k.coeff_1d(n) * (n as f64 * x).cos()).sum()
    }

    #[test]
    fn closed_forms_match_coefficient_series() {
        let ks = [
            TorusKernelSpec::poisson(0.5).unwrap(),
            TorusKernelSpec::dirichlet(3),
            TorusKernelSpec::fejer(4),
            TorusKernelSpec::cosine(2).unwrap(),
        ];
        for k in &ks {
            for i in 0..25 {
                let x = -3.0 + 0.27 * i as f64;
                assert_abs_diff_eq!(k.psi_1d(x), series_psi(k, x), epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn dirichlet_matches_sine_ratio() {
        let k = TorusKernelSpec::<f64>::dirichlet(2);
        let x = 0.7f64;
        let ratio = (2.5 * x).sin() / (0.5 * x).sin();
        assert_abs_diff_eq!(k.psi_1d(x), ratio, epsilon = 1e-12);
    }

    #[test]
    fn tails() {
        let k = TorusKernelSpec::poisson(0.5f64).unwrap();
        let direct: f64 = (6..200).map(|n| 2.0 * 0.5f64.powi(n)).sum();
        assert_abs_diff_eq!(k.tail_1d(5), direct, epsilon = 1e-14);
        assert_eq!(TorusKernelSpec::<f64>::dirichlet(2).tail_1d(2), 0.0);
        assert_eq!(TorusKernelSpec::<f64>::dirichlet(2).tail_1d(1), 2.0);
        let k2 = k.clone().with_dim(2);
        assert!(k2.tail(5) > k.tail(5));
        assert_eq!(TorusKernelSpec::<f64>::dirichlet(2).first_vanishing(), Some(3));
        assert_eq!(k.first_vanishing(), None);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(TorusKernelSpec::poisson(1.0f64).is_err());
        assert!(TorusKernelSpec::<f64>::cosine(0).is_err());
        assert!(TorusKernelSpec::new(
            TorusFamily::Explicit {
                coeffs: vec![1.0, -0.1]
            },
            1
        )
        .is_err());
    }
}
