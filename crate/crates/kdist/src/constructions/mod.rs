//! Explicit pairs P ≠ Q with γ_k(P, Q) zero or small.

mod theta;

use std::sync::Arc;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::Serialize;

use crate::classical_metrics::tv;
use crate::error::{invalid, Error, Result};
use crate::kernels::{KernelFamily, KernelSpec, TorusKernelSpec};
use crate::measures::{Analytic1D, Discrete, GridDensity1D, Measure, Perturbation, TorusDensity};
use crate::mmd::{gamma_sq, gamma_sq_density, gamma_sq_spectral, gamma_sq_torus, torus_truncation, MMDResult};
use crate::quadrature::{trapezoid_weights, Quad};
use crate::scalar::{cst, from_usize, to_f64, Real};

pub use theta::{SincCauchyTheta, TentPairTheta};

/// Points of the positivity verification grid.
pub const VERIFY_GRID: usize = 1 << 15;

/// Fraction of the envelope bound a Sinc/Cauchy amplitude may use.
pub const ALPHA_MARGIN: f64 = 0.98;

/// A bounded functional that tells P from Q.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Separation {
    pub functional: String,
    pub p_value: f64,
    pub q_value: f64,
}

impl Separation {
    pub fn gap(&self) -> f64 {
        (self.p_value - self.q_value).abs()
    }
}

#[derive(Clone, Debug)]
pub struct ConstructedPair<T: Real> {
    pub name: String,
    pub params: Vec<(String, f64)>,
    pub p: Measure<T>,
    pub q: Measure<T>,
    pub kernel: Option<KernelSpec<T>>,
    pub predicted_gamma_sq: T,
    /// Where `predicted_gamma_sq` comes from.
    pub provenance: String,
    /// γ² evaluated numerically for the attached kernel.
    pub direct: Option<MMDResult<T>>,
    pub separation: Separation,
    /// Named diagnostics (minimum density, mass, ...).
    pub diagnostics: Vec<(String, f64)>,
}

/// Serializable summary with both densities on a common grid.
#[derive(Clone, Debug, Serialize)]
pub struct PairRecord {
    pub name: String,
    pub params: Vec<(String, f64)>,
    pub p: String,
    pub q: String,
    pub kernel: Option<String>,
    pub predicted_gamma_sq: f64,
    pub provenance: String,
    pub direct: Option<MMDResult<f64>>,
    pub separation: Separation,
    pub diagnostics: Vec<(String, f64)>,
    pub grid: Option<DensityGrid>,
}

#[derive(Clone, Debug, Serialize)]
pub struct DensityGrid {
    pub x: Vec<f64>,
    pub p: Vec<f64>,
    pub q: Vec<f64>,
}

fn to_f64_mmd<T: Real>(r: &MMDResult<T>) -> MMDResult<f64> {
    MMDResult {
        gamma_sq: to_f64(r.gamma_sq),
        gamma: to_f64(r.gamma),
        path: r.path,
        err_estimate: to_f64(r.err_estimate),
    }
}

/// Interval on which to tabulate a one-dimensional density.
fn plot_range<T: Real>(m: &Measure<T>) -> Option<(T, T)> {
    match m {
        Measure::Analytic(a) => {
            let (lo, hi) = a.support();
            let r = a.effective_radius(cst(1e-3)).min(cst(50.0));
            Some((
                if lo.is_finite() { lo } else { -r },
                if hi.is_finite() { hi } else { r },
            ))
        }
        Measure::Grid(g) => Some((g.x0, g.x_max())),
        _ => None,
    }
}

impl<T: Real> ConstructedPair<T> {
    pub fn record(&self, points: usize) -> PairRecord {
        let grid = match (plot_range(&self.p), plot_range(&self.q)) {
            (Some(a), Some(b)) if points >= 2 => {
                let (lo, hi) = (a.0.min(b.0), a.1.max(b.1));
                let xs: Vec<T> = (0..points)
                    .map(|j| lo + (hi - lo) * from_usize::<T>(j) / from_usize::<T>(points - 1))
                    .collect();
                let f = |m: &Measure<T>| xs.iter().map(|x| to_f64(m.pdf(*x).unwrap_or(T::zero()))).collect();
                Some(DensityGrid {
                    x: xs.iter().map(|x| to_f64(*x)).collect(),
                    p: f(&self.p),
                    q: f(&self.q),
                })
            }
            _ => None,
        };
        PairRecord {
            name: self.name.clone(),
            params: self.params.clone(),
            p: self.p.to_string(),
            q: self.q.to_string(),
            kernel: self.kernel.as_ref().map(|k| k.to_string()),
            predicted_gamma_sq: to_f64(self.predicted_gamma_sq),
            provenance: self.provenance.clone(),
            direct: self.direct.as_ref().map(to_f64_mmd),
            separation: self.separation.clone(),
            diagnostics: self.diagnostics.clone(),
            grid,
        }
    }

    pub fn diagnostic(&self, name: &str) -> Option<f64> {
        self.diagnostics.iter().find(|d| d.0 == name).map(|d| d.1)
    }

    /// Attaches a kernel and evaluates γ² by the default population path.
    pub fn with_kernel(mut self, k: KernelSpec<T>) -> Result<Self> {
        self.direct = Some(gamma_sq(&k, &self.p, &self.q)?);
        self.kernel = Some(k);
        Ok(self)
    }
}

fn tv_separation<T: Real>(p: &Measure<T>, q: &Measure<T>) -> Result<Separation> {
    let v = to_f64(tv(p, q)?);
    Ok(Separation {
        functional: "total variation".into(),
        p_value: v,
        q_value: 0.0,
    })
}

/// Minimum of a density over an evenly spaced grid on [lo, hi].
fn grid_min<T: Real, F: Fn(T) -> T>(f: F, lo: T, hi: T, n: usize) -> T {
    (0..n)
        .map(|j| f(lo + (hi - lo) * from_usize::<T>(j) / from_usize::<T>(n - 1)))
        .fold(T::infinity(), T::min)
}

/// q(x)(1 + α sin(νπx)) for an even analytic base q.
pub fn perturb_sinusoid<T: Real>(q: &Measure<T>, alpha: T, nu: T) -> Result<Measure<T>> {
    match q {
        Measure::Analytic(a) => Ok(Measure::Analytic(Analytic1D::sinusoid_perturbed(a.clone(), alpha, nu)?)),
        _ => Err(Error::Validation(
            "sinusoidal perturbation needs an analytic base density".into(),
        )),
    }
}

/// Cauchy base plus a perturbation whose spectrum avoids [−β, β]; paired
/// with the Sinc(β) kernel.
pub fn construct_sinc_cauchy<T: Real>(beta: T, n: u32, omega0: T, alpha: T) -> Result<ConstructedPair<T>> {
    let theta = SincCauchyTheta::new(beta, n, omega0, alpha)?;
    let bound = theta.alpha_bound();
    if alpha.abs() > bound * cst(ALPHA_MARGIN) {
        return Err(Error::Validation(format!(
            "|alpha| = {} exceeds {} x the positivity bound {bound}",
            alpha.abs(),
            ALPHA_MARGIN
        )));
    }
    let base = Analytic1D::cauchy(T::zero(), T::one())?;
    let p_an = Analytic1D::theta_perturbed(base.clone(), Arc::new(theta.clone()))?;
    let r: T = cst(200.0);
    let min_p = grid_min(|x| p_an.pdf(x), -r, r, VERIFY_GRID);
    if min_p < T::zero() {
        return Err(Error::Validation(format!(
            "constructed density is negative on the verification grid: {min_p}"
        )));
    }
    // θ^∨ is odd, so its integral over [−R, R] must vanish; the base tail is exact
    let tiles = 4096;
    let pts: Vec<T> = (0..=tiles)
        .map(|j| -r + (r + r) * from_usize::<T>(j) / from_usize::<T>(tiles))
        .collect();
    let inner = Quad::with_tol(cst(1e-13))
        .max_panels(tiles + 4000)
        .integrate(|x| p_an.pdf(x), &pts)
        .value;
    let mass = inner + T::one() - (base.cdf(r) - base.cdf(-r));
    let p = Measure::Analytic(p_an);
    let q = Measure::Analytic(base);
    let k = KernelSpec::sinc(beta);
    let direct = gamma_sq_spectral(&k, &p, &q)?;
    let separation = tv_separation(&p, &q)?;
    Ok(ConstructedPair {
        name: "sinc-cauchy".into(),
        params: vec![
            ("beta".into(), to_f64(beta)),
            ("N".into(), n as f64),
            ("omega0".into(), to_f64(omega0)),
            ("alpha".into(), to_f64(alpha)),
            ("alpha_bound".into(), to_f64(bound)),
        ],
        p,
        q,
        kernel: Some(k),
        predicted_gamma_sq: T::zero(),
        provenance: "spectrum of the perturbation is disjoint from the kernel spectrum up to a null set".into(),
        direct: Some(direct),
        separation,
        diagnostics: vec![("min_p".into(), to_f64(min_p)), ("mass".into(), to_f64(mass))],
    })
}

/// Uniform base on [−β, β] plus an odd tent pair of width τ; paired with the
/// Dirichlet kernel of period τ.
pub fn construct_dirichlet_uniform<T: Real>(tau: T, l: u32, beta: T, alpha: T) -> Result<ConstructedPair<T>> {
    let theta = TentPairTheta::new(tau, alpha, beta)?;
    let base = Analytic1D::uniform(-beta, beta)?;
    let p_an = Analytic1D::theta_perturbed(base.clone(), Arc::new(theta.clone()))?;
    // piecewise linear: the minimum sits at a breakpoint
    let mut pts = p_an.breakpoints();
    pts.retain(|x| *x >= -beta && *x <= beta);
    let min_p = pts.iter().map(|x| p_an.pdf(*x)).fold(T::infinity(), T::min);
    let mass = p_an.cdf(beta) - p_an.cdf(-beta);
    let p = Measure::Analytic(p_an);
    let q = Measure::Analytic(base);
    let k = KernelSpec::dirichlet(l, tau)?;
    let direct = gamma_sq_spectral(&k, &p, &q)?;
    let separation = tv_separation(&p, &q)?;
    Ok(ConstructedPair {
        name: "dirichlet-uniform".into(),
        params: vec![
            ("tau".into(), to_f64(tau)),
            ("l".into(), l as f64),
            ("beta".into(), to_f64(beta)),
            ("alpha".into(), to_f64(alpha)),
        ],
        p,
        q,
        kernel: Some(k),
        predicted_gamma_sq: T::zero(),
        provenance: "perturbation transform vanishes on the lattice 2*pi*j/tau".into(),
        direct: Some(direct),
        separation,
        diagnostics: vec![("min_p".into(), to_f64(min_p)), ("mass".into(), to_f64(mass))],
    })
}

/// (2π)^{−d} − 2α sin(n₀ᵀx) against the uniform law on 𝕋^d; any torus
/// kernel with A_ψ(n₀) = 0 fails to separate them.
pub fn construct_torus_flat<T: Real>(d: usize, n0: Vec<i64>, alpha: T) -> Result<ConstructedPair<T>> {
    if alpha == T::zero() {
        return invalid("alpha must be nonzero");
    }
    let p = Measure::Torus(TorusDensity::FlatSinusoid {
        dim: d,
        n0: n0.clone(),
        alpha,
    });
    p.validate()?;
    let q = Measure::Torus(TorusDensity::Uniform { dim: d });
    let ap = p.torus_fourier_coeff(&n0)?;
    let aq = q.torus_fourier_coeff(&n0)?;
    let flat = T::one() / T::TAU().powi(d as i32);
    let min_p = flat - cst::<T>(2.0) * alpha.abs();
    Ok(ConstructedPair {
        name: "torus-flat".into(),
        params: vec![("d".into(), d as f64), ("alpha".into(), to_f64(alpha))]
            .into_iter()
            .chain(n0.iter().enumerate().map(|(i, v)| (format!("n0[{i}]"), *v as f64)))
            .collect(),
        p,
        q,
        kernel: None,
        predicted_gamma_sq: T::zero(),
        provenance: "coefficients differ only at ±n0".into(),
        direct: None,
        separation: Separation {
            functional: format!("Im A(n0), n0={n0:?}"),
            p_value: to_f64(ap.im),
            q_value: to_f64(aq.im),
        },
        diagnostics: vec![("min_p".into(), to_f64(min_p))],
    })
}

impl<T: Real> ConstructedPair<T> {
    /// Torus series value of γ² for the torus pair under kernel `k`.
    pub fn with_torus_kernel(mut self, k: TorusKernelSpec<T>) -> Result<Self> {
        let n = torus_truncation(&k, cst(1e-16), 256);
        let r = gamma_sq_torus(&k, &self.p, &self.q, n)?;
        if let Some(n0) = self.torus_frequency() {
            // only ±n0 contribute: 2 (2π)^{2d} A_ψ(n0) α²
            let alpha: T = cst(self.params.iter().find(|p| p.0 == "alpha").map_or(0.0, |p| p.1));
            let d = n0.len() as i32;
            self.predicted_gamma_sq = cst::<T>(2.0) * T::TAU().powi(2 * d) * k.coeff(&n0) * alpha * alpha;
            self.provenance = "two-term coefficient series".into();
        }
        self.direct = Some(r);
        self.kernel = Some(KernelSpec::torus(k));
        Ok(self)
    }

    fn torus_frequency(&self) -> Option<Vec<i64>> {
        match &self.p {
            Measure::Torus(TorusDensity::FlatSinusoid { n0, .. }) => Some(n0.clone()),
            _ => None,
        }
    }
}

/// Admissibility of a perturbation θ^∨ added to a base density, judged
/// against a kernel.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PerturbationCheck {
    /// max |θ(−ω) − conj θ(ω)| over the sampled frequencies
    pub conjugate_symmetry: f64,
    /// |θ(0)| = |∫θ^∨|
    pub at_zero: f64,
    /// ∫ |θ|² dΛ for the kernel's spectral measure Λ
    pub overlap: f64,
    pub min_density: f64,
}

impl PerturbationCheck {
    pub fn passes(&self) -> bool {
        self.conjugate_symmetry <= 1e-10 && self.at_zero <= 1e-10 && self.overlap <= 1e-12 && self.min_density >= 0.0
    }
}

pub fn check_perturbation<T: Real>(
    theta: Arc<dyn Perturbation<T>>,
    base: &Analytic1D<T>,
    k: &KernelSpec<T>,
) -> Result<PerturbationCheck> {
    let conjugate_symmetry = (0..64)
        .map(|j| {
            let w: T = cst(0.37 * j as f64 - 11.0);
            to_f64((theta.char_diff(-w) - theta.char_diff(w).conj()).norm())
        })
        .fold(0.0, f64::max);
    let at_zero = to_f64(theta.char_diff(T::zero()).norm());
    let p_an = Analytic1D::theta_perturbed(base.clone(), theta)?;
    let (lo, hi) = base.support();
    let r: T = cst(200.0);
    let (lo, hi) = (
        if lo.is_finite() { lo } else { -r },
        if hi.is_finite() { hi } else { r },
    );
    let min_density = to_f64(grid_min(|x| p_an.pdf(x), lo, hi, VERIFY_GRID));
    let overlap = to_f64(gamma_sq_spectral(k, &Measure::Analytic(p_an), &Measure::Analytic(base.clone()))?.gamma_sq);
    Ok(PerturbationCheck {
        conjugate_symmetry,
        at_zero,
        overlap,
        min_density,
    })
}

/// Mercer spectrum of a kernel on a grid under Lebesgue measure.
#[derive(Clone, Debug)]
pub struct NystromSpectrum {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    /// Eigenvalues in decreasing order.
    pub values: Vec<f64>,
    /// `functions[j][i]` = φ_j(x_i), orthonormal in the weighted ℓ² norm.
    pub functions: Vec<Vec<f64>>,
}

/// Nyström eigendecomposition of f ↦ ∫ k(·, y) f(y) dy with trapezoid
/// weights folded symmetrically.
pub fn nystrom<T: Real>(k: &KernelSpec<T>, nodes: &[T], h: T) -> Result<NystromSpectrum> {
    let n = nodes.len();
    if n < 3 {
        return invalid("Nyström grid needs at least 3 nodes");
    }
    let w: Vec<f64> = trapezoid_weights(n, to_f64(h));
    let sw: Vec<f64> = w.iter().map(|v| v.sqrt()).collect();
    let a = DMatrix::from_fn(n, n, |i, j| sw[i] * to_f64(k.k1(nodes[i], nodes[j])) * sw[j]);
    let eig = SymmetricEigen::try_new(a, 1e-14, 10_000)
        .ok_or_else(|| Error::Numerical("Nyström eigensolver did not converge".into()))?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].partial_cmp(&eig.eigenvalues[i]).unwrap());
    let values = order.iter().map(|&j| eig.eigenvalues[j]).collect();
    let functions = order
        .iter()
        .map(|&j| {
            let u = eig.eigenvectors.column(j);
            // fix the sign so that the first nonzero entry is positive
            let s = u.iter().find(|v| v.abs() > 1e-12).map_or(1.0, |v| v.signum());
            (0..n).map(|i| s * u[i] / sw[i]).collect()
        })
        .collect();
    Ok(NystromSpectrum {
        nodes: nodes.iter().map(|x| to_f64(*x)).collect(),
        weights: w,
        values,
        functions,
    })
}

/// p = q + α_l + τ φ_l with α_l chosen to keep unit mass; γ is predicted
/// from the Mercer expansion and recomputed by density quadrature.
pub fn eigen_small_mmd<T: Real>(
    k: &KernelSpec<T>,
    q: &GridDensity1D<T>,
    l: usize,
    tau: T,
) -> Result<ConstructedPair<T>> {
    if k.bound().is_none() {
        return Err(Error::Unsupported(format!("{k} is unbounded")));
    }
    let n = q.values.len();
    if l == 0 || l > n {
        return invalid(format!("eigen index must lie in 1..={n}"));
    }
    let nodes: Vec<T> = (0..n).map(|j| q.node(j)).collect();
    let spec = nystrom(k, &nodes, q.dx)?;
    let w = &spec.weights;
    let e: Vec<f64> = spec
        .functions
        .iter()
        .map(|f| f.iter().zip(w).map(|(a, b)| a * b).sum())
        .collect();
    let e2: f64 = e.iter().map(|v| v * v).sum();
    let idx = l - 1;
    let t = to_f64(tau);
    let alpha_l = -t * e[idx] / e2;
    let rho = |j: usize| e[j] * e[idx] / e2;
    let lam = &spec.values;
    let inner: f64 = lam[idx] - 2.0 * rho(idx) * lam[idx] + (0..n).map(|j| rho(j) * rho(j) * lam[j]).sum::<f64>();
    let predicted_gamma = t.abs() * inner.max(0.0).sqrt();
    let phi = &spec.functions[idx];
    let pv: Vec<T> = (0..n).map(|i| q.values[i] + cst::<T>(alpha_l + t * phi[i])).collect();
    let min_p = pv.iter().fold(T::infinity(), |a, b| a.min(*b));
    if min_p < T::zero() {
        return Err(Error::InvalidParameter(format!(
            "amplitude tau={tau} makes the density negative (min {min_p}); lower tau"
        )));
    }
    let pg = GridDensity1D::new(q.x0, q.dx, pv.clone())?;
    let p = Measure::Grid(pg);
    let qm = Measure::Grid(q.clone());
    let direct = gamma_sq_density(k, &p, &qm)?;
    let pphi: f64 = (0..n).map(|i| w[i] * phi[i] * to_f64(pv[i])).sum();
    let qphi: f64 = (0..n).map(|i| w[i] * phi[i] * to_f64(q.values[i])).sum();
    let eta = t.abs() * (0..n).filter(|&j| j != idx).map(|j| rho(j).abs()).fold(0.0, f64::max);
    Ok(ConstructedPair {
        name: "eigen-small".into(),
        params: vec![
            ("l".into(), l as f64),
            ("tau".into(), t),
            ("alpha_l".into(), alpha_l),
            ("lambda_l".into(), lam[idx]),
            ("rho_ll".into(), rho(idx)),
        ],
        p,
        q: qm,
        kernel: Some(k.clone()),
        predicted_gamma_sq: cst(predicted_gamma * predicted_gamma),
        provenance: "Mercer expansion on the Nyström grid".into(),
        direct: Some(direct),
        separation: Separation {
            functional: format!("phi_{l}"),
            p_value: pphi,
            q_value: qphi,
        },
        diagnostics: vec![
            ("min_p".into(), to_f64(min_p)),
            ("eta".into(), eta),
            ("predicted_gamma".into(), predicted_gamma),
        ],
    })
}

/// A pair that a non-characteristic kernel cannot separate, when one of the
/// constructions above applies.
pub fn paired_construction<T: Real>(k: &KernelSpec<T>) -> Option<Result<ConstructedPair<T>>> {
    match &k.family {
        KernelFamily::Sinc { sigma } => Some(
            SincCauchyTheta::new(*sigma, 2, *sigma * cst(2.0), T::one())
                .and_then(|t| construct_sinc_cauchy(*sigma, 2, *sigma * cst(2.0), t.alpha_bound() * cst(0.5))),
        ),
        KernelFamily::Periodic { period, .. } => {
            let beta = *period * cst(1.5);
            Some(
                construct_dirichlet_uniform(*period, 1, beta, T::one() / (cst::<T>(4.0) * beta)).and_then(|c| {
                    let mut c = c;
                    c.direct = Some(gamma_sq_spectral(k, &c.p, &c.q)?);
                    c.kernel = Some(k.clone());
                    Ok(c)
                }),
            )
        }
        KernelFamily::Trivial { .. } => {
            Some(construct_dirichlet_uniform(T::one(), 1, cst(2.0), cst(0.125)).and_then(|c| c.with_kernel(k.clone())))
        }
        KernelFamily::DotProduct | KernelFamily::Poly2 => {
            // laws with matching first (and, for Poly2, second) moments
            let (a, b) = if matches!(k.family, KernelFamily::DotProduct) {
                (
                    Discrete::from_1d(&[(T::zero(), cst(0.5)), (cst(2.0), cst(0.5))]),
                    Ok(Discrete::dirac(vec![T::one()])),
                )
            } else {
                let s3: T = cst(3f64.sqrt());
                (
                    Discrete::from_1d(&[(-s3, cst(1.0 / 6.0)), (T::zero(), cst(2.0 / 3.0)), (s3, cst(1.0 / 6.0))]),
                    Discrete::from_1d(&[(-T::one(), cst(0.5)), (T::one(), cst(0.5))]),
                )
            };
            Some(a.and_then(|a| {
                let b = b?;
                let p = Measure::Discrete(a);
                let q = Measure::Discrete(b);
                let separation = tv_separation(&p, &q)?;
                let direct = gamma_sq(k, &p, &q)?;
                Ok(ConstructedPair {
                    name: "moment-matched".into(),
                    params: Vec::new(),
                    p,
                    q,
                    kernel: Some(k.clone()),
                    predicted_gamma_sq: T::zero(),
                    provenance: "feature map sees only the matched moments".into(),
                    direct: Some(direct),
                    separation,
                    diagnostics: Vec::new(),
                })
            }))
        }
        _ => None,
    }
}
