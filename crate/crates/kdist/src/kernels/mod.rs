//! Kernel zoo: evaluation, Bochner spectra, kernel algebra and
//! characteristic classification.

mod spectrum;
mod torus;

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::scalar::{cst, from_i64, from_usize, to_f64, Real};
use crate::special::{bessel_k, gamma};

pub use spectrum::{
    fourier_norm, Cell, DensityFn, LambdaComponent, LatticeSpectrum, SpectralDensity, SpectrumInfo, SpectrumKind,
    Support,
};
pub use torus::{TorusFamily, TorusKernelSpec};

pub type MetricFn<T> = Arc<dyn Fn(&[T], &[T]) -> T + Send + Sync>;

#[derive(Clone)]
pub enum KernelFamily<T> {
    /// k ≡ C
    Trivial {
        c: T,
    },
    /// xᵀy
    DotProduct,
    /// (1 + xᵀy)²
    Poly2,
    /// exp(−‖x−y‖²/(2σ²))
    Gaussian {
        sigma: T,
    },
    /// exp(−σ‖x−y‖₁)
    Laplacian {
        sigma: T,
    },
    /// (1 + ‖x−y‖²/σ²)^{−c}
    InverseMultiquadric {
        sigma: T,
        c: T,
    },
    Matern {
        nu: T,
        sigma: T,
    },
    /// B_{2n+1}: (2n+2)-fold convolution of the unit box, per coordinate.
    BSpline {
        n: u32,
    },
    /// Π sin(σ z_j)/z_j
    Sinc {
        sigma: T,
    },
    /// exp(σ xᵀy); `radius` restricts the domain to a ball when set.
    ExpDot {
        sigma: T,
        radius: Option<T>,
    },
    /// Periodic kernel on ℝ^d: ψ(z) = ψ_𝕋(2π z/period).
    Periodic {
        torus: TorusKernelSpec<T>,
        period: T,
    },
    /// Kernel on 𝕋^d.
    Torus(TorusKernelSpec<T>),
    Sum(Box<KernelSpec<T>>, Box<KernelSpec<T>>),
    Product(Box<KernelSpec<T>>, Box<KernelSpec<T>>),
    Scaled {
        c: T,
        inner: Box<KernelSpec<T>>,
    },
    /// ½[ρ²(x,x₀) + ρ²(y,x₀) − ρ²(x,y)]
    FromMetric {
        metric: MetricFn<T>,
        basepoint: Vec<T>,
    },
}

#[derive(Clone)]
pub struct KernelSpec<T> {
    pub family: KernelFamily<T>,
    pub dim: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    Characteristic,
    NotCharacteristic,
    CharacteristicToP1,
    Unknown,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Classification {
    pub verdict: Verdict,
    pub reason: String,
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ({})", self.verdict, self.reason)
    }
}

fn positive<T: Real>(name: &str, v: T) -> Result<()> {
    if v > T::zero() && v.is_finite() {
        Ok(())
    } else {
        invalid(format!("{name} must be positive and finite, got {v}"))
    }
}

/// Centered cardinal B-spline of `m` boxes (degree m−1), closed form via
/// truncated powers.
pub fn cardinal_bspline<T: Real>(m: u32, x: T) -> T {
    let x = x.abs();
    let half: T = from_i64::<T>(m as i64) * cst(0.5);
    if x >= half {
        return T::zero();
    }
    let deg = (m - 1) as i32;
    let mut binom = T::one();
    let mut sum = T::zero();
    for k in 0..=m {
        let t = x + half - from_i64::<T>(k as i64);
        if t > T::zero() {
            let term = binom * t.powi(deg);
            sum += if k % 2 == 0 { term } else { -term };
        }
        binom = binom * from_i64::<T>((m - k) as i64) / from_i64::<T>(k as i64 + 1);
    }
    let mut fact = T::one();
    for j in 2..=deg {
        fact *= from_i64::<T>(j as i64);
    }
    (sum / fact).max(T::zero())
}

fn dot<T: Real>(x: &[T], y: &[T]) -> T {
    x.iter().zip(y).map(|(a, b)| *a * *b).sum()
}

fn diff<T: Real>(x: &[T], y: &[T]) -> Vec<T> {
    x.iter().zip(y).map(|(a, b)| *a - *b).collect()
}

fn norm2<T: Real>(z: &[T]) -> T {
    z.iter().map(|v| *v * *v).sum()
}

impl<T: Real> KernelSpec<T> {
    pub fn new(family: KernelFamily<T>, dim: usize) -> Result<Self> {
        if dim == 0 {
            return invalid("kernel dimension must be positive");
        }
        match &family {
            KernelFamily::Trivial { c } => {
                if !(*c >= T::zero()) {
                    return invalid("trivial kernel constant must be nonnegative");
                }
            }
            KernelFamily::Gaussian { sigma } | KernelFamily::Laplacian { sigma } | KernelFamily::Sinc { sigma } => {
                positive("sigma", *sigma)?
            }
            KernelFamily::InverseMultiquadric { sigma, c } => {
                positive("sigma", *sigma)?;
                positive("c", *c)?
            }
            KernelFamily::Matern { nu, sigma } => {
                positive("nu", *nu)?;
                positive("sigma", *sigma)?
            }
            KernelFamily::ExpDot { sigma, radius } => {
                positive("sigma", *sigma)?;
                if let Some(r) = radius {
                    positive("radius", *r)?
                }
            }
            KernelFamily::Periodic { torus, period } => {
                positive("period", *period)?;
                if torus.dim != dim {
                    return invalid("periodic kernel dimension mismatch");
                }
            }
            KernelFamily::Torus(t) => {
                if t.dim != dim {
                    return invalid("torus kernel dimension mismatch");
                }
            }
            KernelFamily::Sum(a, b) | KernelFamily::Product(a, b) => {
                if a.dim != dim || b.dim != dim {
                    return invalid("kernel algebra requires equal dimensions");
                }
            }
            KernelFamily::Scaled { c, inner } => {
                if !(*c >= T::zero()) {
                    return invalid("scale factor must be nonnegative");
                }
                if inner.dim != dim {
                    return invalid("scaled kernel dimension mismatch");
                }
            }
            KernelFamily::FromMetric { basepoint, .. } => {
                if basepoint.len() != dim {
                    return invalid("basepoint dimension mismatch");
                }
            }
            KernelFamily::DotProduct | KernelFamily::Poly2 | KernelFamily::BSpline { .. } => {}
        }
        Ok(KernelSpec { family, dim })
    }

    fn one_d(family: KernelFamily<T>) -> Self {
        KernelSpec::new(family, 1).expect("valid kernel parameters")
    }

    pub fn trivial(c: T) -> Self {
        Self::one_d(KernelFamily::Trivial { c })
    }
    pub fn dot_product() -> Self {
        Self::one_d(KernelFamily::DotProduct)
    }
    pub fn poly2() -> Self {
        Self::one_d(KernelFamily::Poly2)
    }
    pub fn gaussian(sigma: T) -> Self {
        Self::one_d(KernelFamily::Gaussian { sigma })
    }
    pub fn laplacian(sigma: T) -> Self {
        Self::one_d(KernelFamily::Laplacian { sigma })
    }
    pub fn inverse_multiquadric(sigma: T, c: T) -> Self {
        Self::one_d(KernelFamily::InverseMultiquadric { sigma, c })
    }
    pub fn matern(nu: T, sigma: T) -> Self {
        Self::one_d(KernelFamily::Matern { nu, sigma })
    }
    /// B_{2n+1}-spline kernel.
    pub fn bspline(n: u32) -> Self {
        Self::one_d(KernelFamily::BSpline { n })
    }
    pub fn sinc(sigma: T) -> Self {
        Self::one_d(KernelFamily::Sinc { sigma })
    }
    pub fn exp_dot(sigma: T, radius: Option<T>) -> Self {
        Self::one_d(KernelFamily::ExpDot { sigma, radius })
    }
    /// 2π-periodic Poisson kernel on ℝ.
    pub fn poisson(sigma: T) -> Result<Self> {
        Self::periodic(TorusKernelSpec::poisson(sigma)?, T::TAU())
    }
    /// Dirichlet kernel sin((2n+1)πx/τ)/sin(πx/τ) with period τ.
    pub fn dirichlet(n: u32, period: T) -> Result<Self> {
        Self::periodic(TorusKernelSpec::dirichlet(n), period)
    }
    pub fn fejer(n: u32, period: T) -> Result<Self> {
        Self::periodic(TorusKernelSpec::fejer(n), period)
    }
    /// cos(σx) on ℝ.
    pub fn cosine(sigma: T) -> Result<Self> {
        positive("sigma", sigma)?;
        Self::periodic(TorusKernelSpec::cosine(1)?, T::TAU() / sigma)
    }
    pub fn periodic(torus: TorusKernelSpec<T>, period: T) -> Result<Self> {
        let d = torus.dim;
        KernelSpec::new(KernelFamily::Periodic { torus, period }, d)
    }
    pub fn torus(t: TorusKernelSpec<T>) -> Self {
        let d = t.dim;
        KernelSpec {
            family: KernelFamily::Torus(t),
            dim: d,
        }
    }
    pub fn sum(a: KernelSpec<T>, b: KernelSpec<T>) -> Result<Self> {
        let d = a.dim;
        KernelSpec::new(KernelFamily::Sum(Box::new(a), Box::new(b)), d)
    }
    pub fn product(a: KernelSpec<T>, b: KernelSpec<T>) -> Result<Self> {
        let d = a.dim;
        KernelSpec::new(KernelFamily::Product(Box::new(a), Box::new(b)), d)
    }
    pub fn scaled(self, c: T) -> Result<Self> {
        let d = self.dim;
        KernelSpec::new(
            KernelFamily::Scaled {
                c,
                inner: Box::new(self),
            },
            d,
        )
    }

    /// Same family on ℝ^d (product form for separable families).
    pub fn with_dim(mut self, dim: usize) -> Result<Self> {
        match &mut self.family {
            KernelFamily::Periodic { torus, .. } | KernelFamily::Torus(torus) => torus.dim = dim,
            KernelFamily::Sum(a, b) | KernelFamily::Product(a, b) => {
                **a = (**a).clone().with_dim(dim)?;
                **b = (**b).clone().with_dim(dim)?;
            }
            KernelFamily::Scaled { inner, .. } => **inner = (**inner).clone().with_dim(dim)?,
            KernelFamily::FromMetric { .. } => return invalid("metric kernels keep their basepoint dimension"),
            _ => {}
        }
        let fam = self.family;
        KernelSpec::new(fam, dim)
    }

    pub fn is_torus(&self) -> bool {
        matches!(self.family, KernelFamily::Torus(_))
    }

    pub fn is_translation_invariant(&self) -> bool {
        match &self.family {
            KernelFamily::DotProduct
            | KernelFamily::Poly2
            | KernelFamily::ExpDot { .. }
            | KernelFamily::FromMetric { .. } => false,
            KernelFamily::Sum(a, b) | KernelFamily::Product(a, b) => {
                a.is_translation_invariant() && b.is_translation_invariant()
            }
            KernelFamily::Scaled { inner, .. } => inner.is_translation_invariant(),
            _ => true,
        }
    }

    /// ψ(z) for translation-invariant kernels, k(x,y) = ψ(x − y).
    pub fn psi(&self, z: &[T]) -> Option<T> {
        let v = match &self.family {
            KernelFamily::Trivial { c } => *c,
            KernelFamily::Gaussian { sigma } => (-norm2(z) / (cst::<T>(2.0) * *sigma * *sigma)).exp(),
            KernelFamily::Laplacian { sigma } => {
                let l1: T = z.iter().map(|v| v.abs()).sum();
                (-*sigma * l1).exp()
            }
            KernelFamily::InverseMultiquadric { sigma, c } => (T::one() + norm2(z) / (*sigma * *sigma)).powf(-*c),
            KernelFamily::Matern { nu, sigma } => matern_psi(*nu, *sigma, norm2(z).sqrt()),
            KernelFamily::BSpline { n } => z
                .iter()
                .map(|&v| cardinal_bspline(2 * n + 2, v))
                .fold(T::one(), |a, b| a * b),
            KernelFamily::Sinc { sigma } => z
                .iter()
                .map(|&v| if v == T::zero() { *sigma } else { (*sigma * v).sin() / v })
                .fold(T::one(), |a, b| a * b),
            KernelFamily::Periodic { torus, period } => {
                let w: Vec<T> = z.iter().map(|&v| T::TAU() * v / *period).collect();
                torus.psi(&w)
            }
            KernelFamily::Torus(t) => t.psi(z),
            KernelFamily::Sum(a, b) => a.psi(z)? + b.psi(z)?,
            KernelFamily::Product(a, b) => a.psi(z)? * b.psi(z)?,
            KernelFamily::Scaled { c, inner } => *c * inner.psi(z)?,
            _ => return None,
        };
        Some(v)
    }

    fn eval_raw(&self, x: &[T], y: &[T]) -> T {
        match &self.family {
            KernelFamily::DotProduct => dot(x, y),
            KernelFamily::Poly2 => {
                let s = T::one() + dot(x, y);
                s * s
            }
            KernelFamily::ExpDot { sigma, .. } => (*sigma * dot(x, y)).exp(),
            KernelFamily::FromMetric { metric, basepoint } => {
                let a = metric(x, basepoint);
                let b = metric(y, basepoint);
                let c = metric(x, y);
                (a * a + b * b - c * c) * cst(0.5)
            }
            KernelFamily::Sum(a, b) => a.eval_raw(x, y) + b.eval_raw(x, y),
            KernelFamily::Product(a, b) => a.eval_raw(x, y) * b.eval_raw(x, y),
            KernelFamily::Scaled { c, inner } => *c * inner.eval_raw(x, y),
            KernelFamily::Torus(t) => {
                let z = diff(x, y);
                t.psi(&z)
            }
            _ => self.psi(&diff(x, y)).expect("translation-invariant family"),
        }
    }

    /// k(x, y).  Torus points are taken modulo 2π.
    pub fn eval(&self, x: &[T], y: &[T]) -> Result<T> {
        if x.len() != self.dim || y.len() != self.dim {
            return Err(Error::Domain(format!(
                "kernel on dimension {} evaluated at points of dimension {} and {}",
                self.dim,
                x.len(),
                y.len()
            )));
        }
        if let KernelFamily::ExpDot { radius: Some(r), .. } = &self.family {
            let lim = *r * *r * (T::one() + cst(1e-12));
            if norm2(x) > lim || norm2(y) > lim {
                return Err(Error::Domain(
                    "exp-dot kernel evaluated outside its compact domain".into(),
                ));
            }
        }
        Ok(self.eval_raw(x, y))
    }

    /// k(x, y) for points already known to have the right dimension.
    #[inline]
    pub fn k(&self, x: &[T], y: &[T]) -> T {
        debug_assert_eq!(x.len(), self.dim);
        self.eval_raw(x, y)
    }

    /// Scalar shorthand for one-dimensional kernels.
    #[inline]
    pub fn k1(&self, x: T, y: T) -> T {
        self.eval_raw(&[x], &[y])
    }

    /// Finite C with sup_x k(x,x) ≤ C, when the family is bounded.
    pub fn bound(&self) -> Option<T> {
        match &self.family {
            KernelFamily::Trivial { c } => Some(*c),
            KernelFamily::Gaussian { .. }
            | KernelFamily::Laplacian { .. }
            | KernelFamily::InverseMultiquadric { .. }
            | KernelFamily::Matern { .. } => Some(T::one()),
            KernelFamily::BSpline { .. } | KernelFamily::Sinc { .. } => self.psi(&vec![T::zero(); self.dim]),
            KernelFamily::Periodic { torus, .. } | KernelFamily::Torus(torus) => {
                Some(torus.total_1d().powi(self.dim as i32))
            }
            KernelFamily::ExpDot { sigma, radius } => radius.map(|r| (*sigma * r * r).exp()),
            KernelFamily::DotProduct | KernelFamily::Poly2 | KernelFamily::FromMetric { .. } => None,
            KernelFamily::Sum(a, b) => Some(a.bound()? + b.bound()?),
            KernelFamily::Product(a, b) => Some(a.bound()? * b.bound()?),
            KernelFamily::Scaled { c, inner } => Some(*c * inner.bound()?),
        }
    }

    /// Offsets z where ψ(z) fails to be smooth (one-dimensional kernels).
    pub fn kinks(&self) -> Vec<T> {
        let mut out = match &self.family {
            KernelFamily::Laplacian { .. } | KernelFamily::Matern { .. } => vec![T::zero()],
            KernelFamily::BSpline { n } => {
                let h = *n as i64 + 1;
                (-h..=h).map(from_i64).collect()
            }
            KernelFamily::Sum(a, b) | KernelFamily::Product(a, b) => {
                let mut v = a.kinks();
                v.extend(b.kinks());
                v
            }
            KernelFamily::Scaled { inner, .. } => inner.kinks(),
            _ => Vec::new(),
        };
        out.sort_by(|a, b| a.partial_cmp(b).unwrap());
        out.dedup();
        out
    }

    /// Bochner spectrum of a translation-invariant kernel.
    pub fn spectrum(&self) -> Result<SpectrumInfo<T>> {
        let d = self.dim;
        let unsupported = || {
            Err(Error::Unsupported(format!(
                "{self} is not translation invariant on R^d"
            )))
        };
        let info = match &self.family {
            KernelFamily::Trivial { c } => {
                let w = *c / fourier_norm::<T>(d);
                let origin = vec![T::zero(); d];
                SpectrumInfo {
                    kind: SpectrumKind::Lattice(LatticeSpectrum {
                        atoms: vec![(origin.clone(), w)],
                        tail: T::zero(),
                        dim: d,
                        complete: true,
                    }),
                    support: if *c > T::zero() {
                        Support::LatticeSet {
                            atoms: Some(vec![origin]),
                            description: "{0}".into(),
                        }
                    } else {
                        Support::LatticeSet {
                            atoms: Some(vec![]),
                            description: "∅".into(),
                        }
                    },
                }
            }
            KernelFamily::Gaussian { sigma } => {
                let s = *sigma;
                let f: DensityFn<T> =
                    Arc::new(move |w: &[T]| s.powi(w.len() as i32) * (-s * s * norm2(w) * cst(0.5)).exp());
                continuous(SpectralDensity::new(d, f))
            }
            KernelFamily::Laplacian { sigma } => {
                let s = *sigma;
                let c: T = (cst::<T>(2.0) / T::PI()).sqrt();
                let f: DensityFn<T> =
                    Arc::new(move |w: &[T]| w.iter().map(|&v| c * s / (s * s + v * v)).fold(T::one(), |a, b| a * b));
                continuous(SpectralDensity::new(d, f))
            }
            KernelFamily::InverseMultiquadric { sigma, c } => {
                let (s, c) = (*sigma, *c);
                let nu = c - cst::<T>(d as f64 / 2.0);
                let pref = s.powi(d as i32) * cst::<T>(2.0).powf(T::one() - c) / gamma(c);
                let f: DensityFn<T> = Arc::new(move |w: &[T]| {
                    let r = s * norm2(w).sqrt();
                    if r == T::zero() {
                        if nu > T::zero() {
                            pref * cst::<T>(2.0).powf(nu - T::one()) * gamma(nu)
                        } else {
                            T::infinity()
                        }
                    } else if r > cst(700.0) {
                        T::zero()
                    } else {
                        pref * r.powf(nu) * cst(bessel_k(to_f64(nu), to_f64(r)))
                    }
                });
                continuous(SpectralDensity::new(d, f))
            }
            KernelFamily::Matern { nu, sigma } => {
                let (nu, s) = (*nu, *sigma);
                let dd = from_usize::<T>(d);
                let half_d = dd * cst(0.5);
                let two = cst::<T>(2.0);
                // density of the e^{2πi sᵀx} convention, moved to ω = 2πs
                let pref = two.powf(dd + nu) * T::PI().powf(half_d) * gamma(nu + half_d) * nu.powf(nu)
                    / (gamma(nu) * s.powf(two * nu));
                let conv = T::TAU().powf(-half_d);
                let f: DensityFn<T> = Arc::new(move |w: &[T]| {
                    let base = two * nu / (s * s) + norm2(w);
                    conv * pref * base.powf(-(nu + half_d))
                });
                continuous(SpectralDensity::new(d, f))
            }
            KernelFamily::BSpline { n } => {
                let m = (2 * n + 2) as i32;
                let c = cst::<T>(4.0).powi(*n as i32 + 1) / T::TAU().sqrt();
                let f: DensityFn<T> = Arc::new(move |w: &[T]| {
                    w.iter()
                        .map(|&v| {
                            if v.abs() < cst(1e-4) {
                                // sin(v/2)/v → ½(1 − v²/24)
                                let r = cst::<T>(0.5) * (T::one() - v * v / cst(24.0));
                                c * r.powi(m)
                            } else {
                                c * ((v * cst(0.5)).sin() / v).powi(m)
                            }
                        })
                        .fold(T::one(), |a, b| a * b)
                });
                continuous(SpectralDensity::new(d, f))
            }
            KernelFamily::Sinc { sigma } => {
                let s = *sigma;
                let h = (T::PI() / cst(2.0)).sqrt();
                let f: DensityFn<T> = Arc::new(move |w: &[T]| {
                    w.iter()
                        .map(|&v| if v.abs() <= s { h } else { T::zero() })
                        .fold(T::one(), |a, b| a * b)
                });
                let dens = SpectralDensity::new(d, f).compact(vec![(-s, s); d]);
                let cells = vec![vec![(-s, s); d]];
                SpectrumInfo {
                    kind: SpectrumKind::ContinuousDensity(dens),
                    support: Support::CompactSet(cells),
                }
            }
            KernelFamily::Periodic { torus, period } => periodic_spectrum(torus, *period, d),
            KernelFamily::Torus(t) => {
                let support = if t.all_nonzero_positive() {
                    Support::AllOfIntegerLattice
                } else {
                    let first = t.first_vanishing().unwrap_or(0);
                    Support::ProperSubsetOfLattice {
                        description: format!("A(n) = 0 at n = {first}"),
                    }
                };
                SpectrumInfo {
                    kind: SpectrumKind::TorusCoefficients(t.clone()),
                    support,
                }
            }
            KernelFamily::Sum(a, b) => {
                let (sa, sb) = (a.spectrum()?, b.spectrum()?);
                let mut comps = sa.components();
                comps.extend(sb.components());
                SpectrumInfo {
                    support: sa.support.union(&sb.support),
                    kind: SpectrumKind::Composite(comps),
                }
            }
            KernelFamily::Product(a, b) => {
                let (sa, sb) = (a.spectrum()?, b.spectrum()?);
                let (ma, mb) = (
                    a.psi(&vec![T::zero(); d]).unwrap_or_else(T::zero),
                    b.psi(&vec![T::zero(); d]).unwrap_or_else(T::zero),
                );
                let mut comps = Vec::new();
                for ca in sa.components() {
                    for cb in sb.components() {
                        let mass_a = ca.mass_bound(ma);
                        let mass_b = cb.mass_bound(mb);
                        comps.extend(ca.convolve(&cb, mass_a, mass_b));
                    }
                }
                if d > 1 && comps.iter().any(|c| matches!(c, LambdaComponent::Convolution(..))) {
                    return Err(Error::Unsupported(
                        "products of continuous spectra beyond one dimension".into(),
                    ));
                }
                SpectrumInfo {
                    support: sa.support.minkowski(&sb.support),
                    kind: SpectrumKind::Composite(comps),
                }
            }
            KernelFamily::Scaled { c, inner } => {
                let s = inner.spectrum()?;
                let comps = s.components().iter().map(|x| x.scaled(*c)).collect();
                let support = if *c > T::zero() {
                    s.support
                } else {
                    Support::LatticeSet {
                        atoms: Some(vec![]),
                        description: "∅".into(),
                    }
                };
                SpectrumInfo {
                    kind: SpectrumKind::Composite(comps),
                    support,
                }
            }
            KernelFamily::DotProduct
            | KernelFamily::Poly2
            | KernelFamily::ExpDot { .. }
            | KernelFamily::FromMetric { .. } => return unsupported(),
        };
        Ok(info)
    }

    /// Characteristic classification from the spectral support.
    pub fn classify(&self) -> Classification {
        let mk = |verdict, reason: &str| Classification {
            verdict,
            reason: reason.to_string(),
        };
        match &self.family {
            KernelFamily::DotProduct => {
                return mk(
                    Verdict::NotCharacteristic,
                    "gamma only compares means: equal means give gamma = 0",
                )
            }
            KernelFamily::Poly2 => {
                return mk(
                    Verdict::NotCharacteristic,
                    "gamma only compares first and second moments",
                )
            }
            KernelFamily::ExpDot { radius, .. } => {
                return match radius {
                    Some(_) => mk(
                        Verdict::CharacteristicToP1,
                        "integrally strictly pd after normalization; characteristic on the compact domain",
                    ),
                    None => mk(Verdict::Unknown, "exp-dot kernel on an unrestricted domain"),
                };
            }
            KernelFamily::FromMetric { .. } => return mk(Verdict::Unknown, "no spectrum for metric-induced kernels"),
            KernelFamily::Sum(a, b) => {
                let (ca, cb) = (a.classify(), b.classify());
                if ca.verdict == Verdict::Characteristic || cb.verdict == Verdict::Characteristic {
                    return mk(Verdict::Characteristic, "sum with a characteristic kernel");
                }
            }
            KernelFamily::Scaled { c, inner } if *c > T::zero() => return inner.classify(),
            _ => {}
        }
        match self.spectrum() {
            Ok(s) => classify_support(&s.support),
            Err(_) => mk(Verdict::Unknown, "spectrum unavailable"),
        }
    }

    /// ρ̃(x,y) = ‖k(·,x) − k(·,y)‖_H
    pub fn hilbertian_distance(&self, x: &[T], y: &[T]) -> Result<T> {
        let r = self.eval(x, x)? + self.eval(y, y)? - cst::<T>(2.0) * self.eval(x, y)?;
        if r < -cst::<T>(1e-12) {
            return Err(Error::Numerical(format!(
                "negative radicand {r} in Hilbertian distance"
            )));
        }
        Ok(r.max(T::zero()).sqrt())
    }

    /// Gram matrix on a point set.
    pub fn gram(&self, pts: &[Vec<T>]) -> Result<Vec<Vec<T>>> {
        let mut g = vec![vec![T::zero(); pts.len()]; pts.len()];
        for i in 0..pts.len() {
            for j in 0..=i {
                let v = self.eval(&pts[i], &pts[j])?;
                g[i][j] = v;
                g[j][i] = v;
            }
        }
        Ok(g)
    }
}

fn matern_psi<T: Real>(nu: T, sigma: T, r: T) -> T {
    if r == T::zero() {
        return T::one();
    }
    if (nu - cst(0.5)).abs() < cst(1e-15) {
        return (-r / sigma).exp();
    }
    let u = (cst::<T>(2.0) * nu).sqrt() * r / sigma;
    if u > cst(700.0) {
        return T::zero();
    }
    let c = cst::<T>(2.0).powf(T::one() - nu) / gamma(nu);
    c * u.powf(nu) * cst(bessel_k(to_f64(nu), to_f64(u)))
}

fn continuous<T: Real>(dens: SpectralDensity<T>) -> SpectrumInfo<T> {
    SpectrumInfo {
        kind: SpectrumKind::ContinuousDensity(dens),
        support: Support::AllOfSpace,
    }
}

fn periodic_spectrum<T: Real>(torus: &TorusKernelSpec<T>, period: T, d: usize) -> SpectrumInfo<T> {
    let (cut, complete) = match torus.cutoff() {
        Some(c) => (c, true),
        None => {
            let mut n = 1u64;
            let target = cst::<T>(1e-16) * torus.total_1d().powi(d as i32);
            while torus.tail(n) > target && n < 400 {
                n += 1;
            }
            (n, false)
        }
    };
    let cut = cut as i64;
    let step = T::TAU() / period;
    let mut atoms = Vec::new();
    let mut idx = vec![-cut; d];
    let norm = fourier_norm::<T>(d);
    loop {
        let a = torus.coeff(&idx);
        if a > T::zero() {
            let loc: Vec<T> = idx.iter().map(|&n| from_i64::<T>(n) * step).collect();
            atoms.push((loc, a / norm));
        }
        let mut j = 0;
        loop {
            if j == d {
                break;
            }
            idx[j] += 1;
            if idx[j] > cut {
                idx[j] = -cut;
                j += 1;
            } else {
                break;
            }
        }
        if j == d {
            break;
        }
    }
    let tail = if complete { T::zero() } else { torus.tail(cut as u64) };
    let description = if complete {
        format!("{{2πn/{period}: A(n) > 0, |n| ≤ {cut}}}")
    } else {
        format!("2π/{period}·Z^d")
    };
    let pts: Option<Vec<Vec<T>>> = if complete {
        Some(atoms.iter().map(|a| a.0.clone()).collect())
    } else {
        None
    };
    SpectrumInfo {
        kind: SpectrumKind::Lattice(LatticeSpectrum {
            atoms,
            tail,
            dim: d,
            complete,
        }),
        support: Support::LatticeSet {
            atoms: pts,
            description,
        },
    }
}

/// Verdict as a function of supp(Λ) alone.
pub fn classify_support<T: Real>(s: &Support<T>) -> Classification {
    let (verdict, reason) = match s {
        Support::AllOfSpace => (Verdict::Characteristic, "spectral support is all of R^d".to_string()),
        Support::CompactSet(_) if s.has_interior() => (
            Verdict::CharacteristicToP1,
            "spectral support is a proper subset of R^d with non-empty interior".to_string(),
        ),
        Support::CompactSet(_) | Support::LatticeSet { .. } => (
            Verdict::NotCharacteristic,
            format!("spectral support has empty interior: {s}"),
        ),
        Support::AllOfIntegerLattice => (
            Verdict::Characteristic,
            "every Fourier coefficient A(n), n != 0, is positive".to_string(),
        ),
        Support::ProperSubsetOfLattice { description } => (
            Verdict::NotCharacteristic,
            format!("a Fourier coefficient vanishes: {description}"),
        ),
        Support::Undetermined(d) => (Verdict::Unknown, format!("spectral support undetermined: {d}")),
    };
    Classification { verdict, reason }
}

/// Smallest eigenvalue and trace of a symmetric matrix.
pub fn min_eigen_and_trace<T: Real>(g: &[Vec<T>]) -> (f64, f64) {
    let n = g.len();
    if n == 0 {
        return (0.0, 0.0);
    }
    let m = DMatrix::from_fn(n, n, |i, j| to_f64(g[i][j]));
    let tr = m.trace();
    let e = SymmetricEigen::new(m);
    (e.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min), tr)
}

/// Kernel induced by a Hilbertian metric and a basepoint, checked for
/// positive semidefiniteness on the supplied probe points.
pub fn kernel_from_metric<T: Real>(metric: MetricFn<T>, basepoint: Vec<T>, probes: &[Vec<T>]) -> Result<KernelSpec<T>> {
    let d = basepoint.len();
    let k = KernelSpec::new(KernelFamily::FromMetric { metric, basepoint }, d)?;
    let g = k.gram(probes)?;
    let (min_eig, tr) = min_eigen_and_trace(&g);
    if min_eig < -1e-6 * tr.abs().max(f64::MIN_POSITIVE) {
        return Err(Error::Validation(format!(
            "metric is not Hilbertian on the probe set: min eigenvalue {min_eig:.3e}, trace {tr:.3e}"
        )));
    }
    Ok(k)
}

/// Metric closure ρ̃ induced by a kernel.
pub fn hilbertian_metric<T: Real>(k: KernelSpec<T>) -> MetricFn<T> {
    Arc::new(move |x: &[T], y: &[T]| {
        let r = k.k(x, x) + k.k(y, y) - cst::<T>(2.0) * k.k(x, y);
        r.max(T::zero()).sqrt()
    })
}

impl<T: Real> fmt::Display for KernelSpec<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let dim = if self.dim == 1 {
            String::new()
        } else {
            format!(",d={}", self.dim)
        };
        match &self.family {
            KernelFamily::Trivial { c } => write!(f, "trivial(c={c}{dim})"),
            KernelFamily::DotProduct => write!(f, "dot(d={})", self.dim),
            KernelFamily::Poly2 => write!(f, "poly2(d={})", self.dim),
            KernelFamily::Gaussian { sigma } => write!(f, "gaussian(sigma={sigma}{dim})"),
            KernelFamily::Laplacian { sigma } => write!(f, "laplacian(sigma={sigma}{dim})"),
            KernelFamily::InverseMultiquadric { sigma, c } => write!(f, "imq(sigma={sigma},c={c}{dim})"),
            KernelFamily::Matern { nu, sigma } => write!(f, "matern(nu={nu},sigma={sigma}{dim})"),
            KernelFamily::BSpline { n } => write!(f, "bspline(order={}{dim})", 2 * n + 1),
            KernelFamily::Sinc { sigma } => write!(f, "sinc(sigma={sigma}{dim})"),
            KernelFamily::ExpDot { sigma, radius } => match radius {
                Some(r) => write!(f, "expdot(sigma={sigma},radius={r}{dim})"),
                None => write!(f, "expdot(sigma={sigma}{dim})"),
            },
            KernelFamily::Periodic { torus, period } => {
                let (name, params) = torus.text_parts();
                if matches!(torus.family, TorusFamily::Cosine { freq: 1 }) {
                    return write!(f, "cosine(sigma={}{dim})", T::TAU() / *period);
                }
                write!(f, "{name}({},period={period}{dim})", params.join(","))
            }
            KernelFamily::Torus(t) => {
                let (name, params) = t.text_parts();
                write!(f, "{name}({},domain=torus{dim})", params.join(","))
            }
            KernelFamily::Sum(a, b) => write!(f, "sum({a},{b})"),
            KernelFamily::Product(a, b) => write!(f, "product({a},{b})"),
            KernelFamily::Scaled { c, inner } => write!(f, "scaled({c},{inner})"),
            KernelFamily::FromMetric { basepoint, .. } => {
                let b: Vec<String> = basepoint.iter().map(|v| v.to_string()).collect();
                write!(f, "from_metric(basepoint=[{}])", b.join(","))
            }
        }
    }
}

impl<T: Real> fmt::Debug for KernelSpec<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "KernelSpec({self})")
    }
}

#[cfg(test)]
mod tests;
