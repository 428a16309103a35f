//! Embedding distance γ_k(P, Q) between probability measures, by exact sums,
//! density quadrature, spectral quadrature, torus series, closed forms and
//! sample statistics.

mod density;
mod spectral;

use std::fmt;
use std::sync::{Arc, OnceLock};

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::kernels::{KernelFamily, KernelSpec, TorusKernelSpec};
use crate::measures::{Analytic1D, Discrete, Measure, Sample};
use crate::scalar::{cst, from_usize, to_f64, Real};

use density::{cross_term, gamma_sq_signed, Signed1D};

/// Default absolute tolerance for population quadrature.
pub const QUAD_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Path {
    DiscreteExact,
    DensityQuadrature,
    SpectralQuadrature,
    TorusSeries,
    ClosedForm,
    UStatistic,
    VStatistic,
}

impl fmt::Display for Path {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MMDResult<T> {
    pub gamma_sq: T,
    pub gamma: T,
    pub path: Path,
    pub err_estimate: T,
}

impl<T: Real> MMDResult<T> {
    pub fn new(gamma_sq: T, path: Path, err_estimate: T) -> Self {
        MMDResult {
            gamma_sq,
            gamma: gamma_sq.max(T::zero()).sqrt(),
            path,
            err_estimate: err_estimate.abs(),
        }
    }

    pub fn exact(gamma_sq: T, path: Path) -> Self {
        Self::new(gamma_sq, path, T::zero())
    }
}

impl<T: Real> fmt::Display for MMDResult<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "gamma_sq={:e} gamma={:e} path={} err={:e}",
            to_f64(self.gamma_sq),
            to_f64(self.gamma),
            self.path,
            to_f64(self.err_estimate)
        )
    }
}

fn check_dims<T: Real>(k: &KernelSpec<T>, p: &Measure<T>, q: &Measure<T>) -> Result<()> {
    if p.dim() != k.dim || q.dim() != k.dim {
        return Err(Error::Domain(format!(
            "kernel of dimension {} applied to measures of dimension {} and {}",
            k.dim,
            p.dim(),
            q.dim()
        )));
    }
    Ok(())
}

/// Σ_{ij} μ_i μ_j k(x_i, x_j) over the union support, μ = w_P − w_Q.
pub fn gamma_sq_discrete<T: Real>(k: &KernelSpec<T>, p: &Discrete<T>, q: &Discrete<T>) -> MMDResult<T> {
    let mut pts: Vec<(Vec<T>, T)> = p.atoms.clone();
    for (y, w) in &q.atoms {
        match pts.iter_mut().find(|(x, _)| x == y) {
            Some(slot) => slot.1 -= *w,
            None => pts.push((y.clone(), -*w)),
        }
    }
    pts.retain(|a| a.1 != T::zero());
    let v = discrete_cross(k, &pts, &pts);
    MMDResult::exact(v, Path::DiscreteExact)
}

fn discrete_cross<T: Real>(k: &KernelSpec<T>, a: &[(Vec<T>, T)], b: &[(Vec<T>, T)]) -> T {
    a.iter()
        .map(|(x, wx)| *wx * b.iter().map(|(y, wy)| *wy * k.k(x, y)).sum::<T>())
        .sum()
}

/// γ²(P_n, δ₀) for P_n = (1 − 1/n)δ₀ + (1/n)δ_n.
pub fn gamma_sq_weak_sequence<T: Real>(k: &KernelSpec<T>, n: u32) -> Result<T> {
    if n == 0 {
        return invalid("sequence index starts at 1");
    }
    if k.dim != 1 {
        return Err(Error::Domain("weak sequence lives on the real line".into()));
    }
    let nn = cst::<T>(n as f64);
    let z = T::zero();
    Ok((k.k1(z, z) + k.k1(nn, nn) - cst::<T>(2.0) * k.k1(z, nn)) / (nn * nn))
}

/// The pair (P_n, P) of the weak sequence as discrete measures.
pub fn weak_sequence_pair<T: Real>(n: u32) -> Result<(Discrete<T>, Discrete<T>)> {
    if n == 0 {
        return invalid("sequence index starts at 1");
    }
    let w = T::one() / cst::<T>(n as f64);
    let pn = if n == 1 {
        Discrete::dirac(vec![T::one()])
    } else {
        Discrete::from_1d(&[(T::zero(), T::one() - w), (cst(n as f64), w)])?
    };
    Ok((pn, Discrete::dirac(vec![T::zero()])))
}

/// ∫∫ k d(P−Q) d(P−Q) by adaptive nested quadrature for measures on ℝ with
/// densities (gridded or analytic).
pub fn gamma_sq_density<T: Real>(k: &KernelSpec<T>, p: &Measure<T>, q: &Measure<T>) -> Result<MMDResult<T>> {
    if !p.has_density_1d() || !q.has_density_1d() {
        return Err(Error::Unsupported(
            "density quadrature needs two densities on the real line".into(),
        ));
    }
    density_path(k, p, q)
}

fn density_path<T: Real>(k: &KernelSpec<T>, p: &Measure<T>, q: &Measure<T>) -> Result<MMDResult<T>> {
    check_dims(k, p, q)?;
    if k.bound().is_none() {
        return Err(Error::Unsupported(format!("{k} is unbounded")));
    }
    let (v, e) = gamma_sq_signed(k, p, q, cst(QUAD_TOL))?;
    Ok(MMDResult::new(v, Path::DensityQuadrature, e))
}

/// ∫ |φ_P − φ_Q|² dΛ over the Bochner spectrum of a translation-invariant
/// kernel.
pub fn gamma_sq_spectral<T: Real>(k: &KernelSpec<T>, p: &Measure<T>, q: &Measure<T>) -> Result<MMDResult<T>> {
    check_dims(k, p, q)?;
    let info = k.spectrum()?;
    let (v, e) = spectral::spectral_integral(&info.kind, &info.components(), p, q, cst(QUAD_TOL))?;
    Ok(MMDResult::new(v, Path::SpectralQuadrature, e))
}

/// Torus coefficient series truncated to [−N, N]^d.
pub fn gamma_sq_torus<T: Real>(
    k: &TorusKernelSpec<T>,
    p: &Measure<T>,
    q: &Measure<T>,
    big_n: u64,
) -> Result<MMDResult<T>> {
    if !p.is_torus() || !q.is_torus() {
        return Err(Error::Domain("torus series needs measures on the torus".into()));
    }
    let (v, e) = spectral::torus_series(k, p, q, big_n)?;
    Ok(MMDResult::new(v, Path::TorusSeries, e))
}

/// Smallest N with coefficient tail below `eps`, capped at `cap`.
pub fn torus_truncation<T: Real>(k: &TorusKernelSpec<T>, eps: T, cap: u64) -> u64 {
    if let Some(c) = k.cutoff() {
        return c.min(cap);
    }
    (0..=cap).find(|&n| k.tail(n) <= eps).unwrap_or(cap)
}

/// ∫∫ exp(−(x−y)²/(2σ²)) dN(μ₁,s₁²)(x) dN(μ₂,s₂²)(y).
fn gauss_cross(sigma: f64, m1: f64, s1: f64, m2: f64, s2: f64) -> f64 {
    let v = sigma * sigma + s1 * s1 + s2 * s2;
    sigma / v.sqrt() * (-(m1 - m2) * (m1 - m2) / (2.0 * v)).exp()
}

fn gauss_closed(sigma: f64, m1: f64, s1: f64, m2: f64, s2: f64) -> f64 {
    gauss_cross(sigma, m1, s1, m1, s1) + gauss_cross(sigma, m2, s2, m2, s2) - 2.0 * gauss_cross(sigma, m1, s1, m2, s2)
}

/// Maximum deviation of the convolution identity from quadrature over a
/// fixed set of cases; computed once.
pub fn closed_gaussian_self_test() -> f64 {
    static DEV: OnceLock<f64> = OnceLock::new();
    *DEV.get_or_init(|| {
        let cases = [
            (1.0, 0.0, 1.0, 1.0, 1.0),
            (0.5, -0.3, 0.7, 0.4, 1.6),
            (2.0, 0.0, 0.2, 3.0, 0.9),
        ];
        cases
            .iter()
            .map(|&(sigma, m1, s1, m2, s2)| {
                let k = KernelSpec::<f64>::gaussian(sigma);
                let a = Measure::gaussian(m1, s1).expect("valid gaussian");
                let b = Measure::gaussian(m2, s2).expect("valid gaussian");
                let sa = Signed1D::empty().add(1.0, &a, false).expect("density");
                let sb = Signed1D::empty().add(1.0, &b, false).expect("density");
                let (v, _) = cross_term(&k, &sa, &sb, 1e-12);
                (v - gauss_cross(sigma, m1, s1, m2, s2)).abs()
            })
            .fold(0.0, f64::max)
    })
}

/// Closed form for the Gaussian kernel of bandwidth σ between two normal
/// laws N(μ₁, s₁²) and N(μ₂, s₂²).
pub fn gamma_sq_closed_gaussian<T: Real>(sigma: T, mu1: T, s1: T, mu2: T, s2: T) -> Result<MMDResult<T>> {
    if !(sigma > T::zero()) || s1 < T::zero() || s2 < T::zero() {
        return invalid("closed form needs sigma > 0 and nonnegative spreads");
    }
    let dev = closed_gaussian_self_test();
    if dev > 1e-8 {
        return Err(Error::Numerical(format!(
            "Gaussian convolution identity off by {dev:e}"
        )));
    }
    let v = gauss_closed(to_f64(sigma), to_f64(mu1), to_f64(s1), to_f64(mu2), to_f64(s2));
    Ok(MMDResult::exact(cst(v.max(0.0)), Path::ClosedForm))
}

fn as_gaussian<T: Real>(m: &Measure<T>) -> Option<(T, T)> {
    match m {
        Measure::Analytic(Analytic1D::Gaussian { mu, s }) => Some((*mu, *s)),
        _ => None,
    }
}

/// γ² by the most direct population route available.
pub fn gamma_sq<T: Real>(k: &KernelSpec<T>, p: &Measure<T>, q: &Measure<T>) -> Result<MMDResult<T>> {
    check_dims(k, p, q)?;
    if let (Some(a), Some(b)) = (p.as_discrete(), q.as_discrete()) {
        return Ok(gamma_sq_discrete(k, a, b));
    }
    if let KernelFamily::Torus(t) = &k.family {
        if p.is_torus() && q.is_torus() {
            let n = torus_truncation(t, cst(1e-16), 256);
            return gamma_sq_torus(t, p, q, n);
        }
    }
    if let (KernelFamily::Gaussian { sigma }, Some((m1, s1)), Some((m2, s2))) =
        (&k.family, as_gaussian(p), as_gaussian(q))
    {
        return gamma_sq_closed_gaussian(*sigma, m1, s1, m2, s2);
    }
    if k.dim == 1 && !p.is_torus() && !q.is_torus() && (p.has_density_1d() || q.has_density_1d()) && k.bound().is_some()
    {
        return density_path(k, p, q);
    }
    gamma_sq_spectral(k, p, q)
}

fn check_samples<T: Real>(k: &KernelSpec<T>, x: &Sample<T>, y: &Sample<T>) -> Result<()> {
    if x.points.iter().chain(&y.points).any(|p| p.len() != k.dim) {
        return Err(Error::Domain(format!("sample points must have dimension {}", k.dim)));
    }
    Ok(())
}

/// Unbiased estimate (1/(m(m−1))) Σ_{l≠j} h(Z_l, Z_j).
pub fn mmd_u_statistic<T: Real>(k: &KernelSpec<T>, x: &Sample<T>, y: &Sample<T>) -> Result<MMDResult<T>> {
    mmd_u_points(k, &x.points, &y.points)
}

pub(crate) fn mmd_u_points<T: Real>(k: &KernelSpec<T>, x: &[Vec<T>], y: &[Vec<T>]) -> Result<MMDResult<T>> {
    let m = x.len();
    if m < 2 || y.len() != m {
        return invalid(format!("U-statistic needs equal sizes >= 2, got {} and {}", m, y.len()));
    }
    if x.iter().chain(y).any(|p| p.len() != k.dim) {
        return Err(Error::Domain(format!("sample points must have dimension {}", k.dim)));
    }
    let total: T = (0..m)
        .into_par_iter()
        .map(|l| {
            let mut s = T::zero();
            for j in 0..m {
                if j != l {
                    s += k.k(&x[l], &x[j]) + k.k(&y[l], &y[j]) - k.k(&x[l], &y[j]) - k.k(&x[j], &y[l]);
                }
            }
            s
        })
        .sum();
    let v = total / (from_usize::<T>(m) * from_usize::<T>(m - 1));
    Ok(MMDResult::exact(v, Path::UStatistic))
}

/// γ² between the two empirical measures.
pub fn mmd_v_statistic<T: Real>(k: &KernelSpec<T>, x: &Sample<T>, y: &Sample<T>) -> Result<MMDResult<T>> {
    if x.is_empty() || y.is_empty() {
        return invalid("V-statistic needs non-empty samples");
    }
    check_samples(k, x, y)?;
    let r = gamma_sq_discrete(k, &Discrete::empirical(&x.points), &Discrete::empirical(&y.points));
    Ok(MMDResult::exact(r.gamma_sq.max(T::zero()), Path::VStatistic))
}

/// ∫∫ k dP dQ.
pub fn kernel_on_measures<T: Real>(k: &KernelSpec<T>, p: &Measure<T>, q: &Measure<T>) -> Result<T> {
    check_dims(k, p, q)?;
    if let (Some(a), Some(b)) = (p.as_discrete(), q.as_discrete()) {
        return Ok(discrete_cross(k, &a.atoms, &b.atoms));
    }
    if let (KernelFamily::Gaussian { sigma }, Some((m1, s1)), Some((m2, s2))) =
        (&k.family, as_gaussian(p), as_gaussian(q))
    {
        return Ok(cst(gauss_cross(
            to_f64(*sigma),
            to_f64(m1),
            to_f64(s1),
            to_f64(m2),
            to_f64(s2),
        )));
    }
    if k.dim != 1 || p.is_torus() || q.is_torus() || k.bound().is_none() {
        return Err(Error::Unsupported(
            "cross term needs a bounded kernel and measures on the real line".into(),
        ));
    }
    let a = Signed1D::empty().add(T::one(), p, false)?;
    let b = Signed1D::empty().add(T::one(), q, false)?;
    Ok(cross_term(k, &a, &b, cst(QUAD_TOL)).0)
}

/// exp(−σ γ²_k(P, Q)).
pub fn gaussian_kernel_on_measures<T: Real>(k: &KernelSpec<T>, sigma: T, p: &Measure<T>, q: &Measure<T>) -> Result<T> {
    Ok((-sigma * gamma_sq(k, p, q)?.gamma_sq.max(T::zero())).exp())
}

pub type KernelMaker<T> = Arc<dyn Fn(T) -> Result<KernelSpec<T>> + Send + Sync>;

/// Kernel families over which γ can be maximized.
#[derive(Clone)]
pub enum KernelClass<T> {
    /// Finitely many kernels.
    List(Vec<KernelSpec<T>>),
    /// One-parameter family on [lo, hi], searched on a log grid.
    Bandwidth { make: KernelMaker<T>, lo: T, hi: T },
    /// Convex hull of the listed kernels.
    Convex(Vec<KernelSpec<T>>),
}

impl<T: Real> KernelClass<T> {
    /// Gaussian kernels with σ ∈ [lo, hi].
    pub fn gaussian_bandwidths(lo: T, hi: T) -> Self {
        KernelClass::Bandwidth {
            make: Arc::new(|s| Ok(KernelSpec::gaussian(s))),
            lo,
            hi,
        }
    }
}

#[derive(Clone)]
pub struct SupResult<T> {
    pub gamma: T,
    pub kernel: KernelSpec<T>,
    /// Maximizing parameter of a bandwidth family.
    pub param: Option<T>,
    /// Maximizing convex weights.
    pub weights: Option<Vec<T>>,
}

impl<T: Real> fmt::Debug for SupResult<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SupResult")
            .field("gamma", &self.gamma)
            .field("kernel", &self.kernel)
            .field("param", &self.param)
            .field("weights", &self.weights)
            .finish()
    }
}

/// Number of log-uniform grid points for bandwidth families.
pub const BANDWIDTH_GRID: usize = 61;

/// sup over a kernel family of γ_k(P, Q).
pub fn gamma_sup_family<T: Real>(family: &KernelClass<T>, p: &Measure<T>, q: &Measure<T>) -> Result<SupResult<T>> {
    match family {
        KernelClass::List(ks) | KernelClass::Convex(ks) => {
            if ks.is_empty() {
                return invalid("kernel family is empty");
            }
            let vals: Vec<T> = ks
                .iter()
                .map(|k| gamma_sq(k, p, q).map(|r| r.gamma_sq))
                .collect::<Result<_>>()?;
            let (best, g2) =
                vals.iter().enumerate().fold(
                    (0, T::neg_infinity()),
                    |acc, (i, v)| if *v > acc.1 { (i, *v) } else { acc },
                );
            let weights = matches!(family, KernelClass::Convex(_)).then(|| {
                (0..ks.len())
                    .map(|i| if i == best { T::one() } else { T::zero() })
                    .collect()
            });
            Ok(SupResult {
                gamma: g2.max(T::zero()).sqrt(),
                kernel: ks[best].clone(),
                param: None,
                weights,
            })
        }
        KernelClass::Bandwidth { make, lo, hi } => {
            if !(*lo > T::zero()) || !(*hi >= *lo) {
                return invalid("bandwidth range must satisfy 0 < lo <= hi");
            }
            let (llo, lhi) = (lo.ln(), hi.ln());
            let eval = |t: T| -> Result<T> { Ok(gamma_sq(&make(t.exp())?, p, q)?.gamma_sq) };
            let n = BANDWIDTH_GRID;
            let grid: Vec<T> = (0..n)
                .map(|i| llo + (lhi - llo) * from_usize::<T>(i) / from_usize::<T>(n - 1))
                .collect();
            let vals: Vec<T> = grid.iter().map(|&t| eval(t)).collect::<Result<_>>()?;
            let best = (0..n).fold(0, |b, i| if vals[i] > vals[b] { i } else { b });
            let (mut a, mut b) = (grid[best.saturating_sub(1)], grid[(best + 1).min(n - 1)]);
            let (mut t_best, mut v_best) = (grid[best], vals[best]);
            if b > a {
                let r: T = cst((5f64.sqrt() - 1.0) / 2.0);
                let mut c = b - r * (b - a);
                let mut d = a + r * (b - a);
                let (mut fc, mut fd) = (eval(c)?, eval(d)?);
                for _ in 0..40 {
                    if fc > fd {
                        b = d;
                        d = c;
                        fd = fc;
                        c = b - r * (b - a);
                        fc = eval(c)?;
                    } else {
                        a = c;
                        c = d;
                        fc = fd;
                        d = a + r * (b - a);
                        fd = eval(d)?;
                    }
                }
                for (t, v) in [(c, fc), (d, fd)] {
                    if v > v_best {
                        t_best = t;
                        v_best = v;
                    }
                }
            }
            let param = t_best.exp();
            Ok(SupResult {
                gamma: v_best.max(T::zero()).sqrt(),
                kernel: make(param)?,
                param: Some(param),
                weights: None,
            })
        }
    }
}

#[cfg(test)]
mod tests;
