//! Classical distances between probability measures (Wasserstein, total
//! variation, Dudley) and their comparison with the kernel distance γ_k.
//!
//! Total variation follows the sup-over-unit-ball convention
//! TV(P, Q) = sup_{‖f‖_∞ ≤ 1} |∫f dP − ∫f dQ| = ∫|p − q|, so it ranges over
//! [0, 2]; halve it for the probabilists' normalization.

mod flow;

use serde::Serialize;

pub use flow::{transport, TransportPlan, FLOW_SCALE};

use crate::error::{invalid, Error, Result};
use crate::kernels::{KernelSpec, SpectrumKind, Verdict};
use crate::measures::{Discrete, Measure};
use crate::mmd::{gamma_sq_discrete, gamma_sq_weak_sequence, weak_sequence_pair};
use crate::quadrature::Quad;
use crate::scalar::{cst, from_usize, to_f64, Real};

/// Slack allowed when checking an inequality.
pub const CHECK_SLACK: f64 = 1e-9;

/// Where both CDFs are this close to 0 or 1 the Wasserstein integral is cut.
const CDF_CUT: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate<T> {
    pub value: T,
    pub err_estimate: T,
}

fn sort_dedup<T: Real>(v: &mut Vec<T>) {
    v.retain(|x| !x.is_nan());
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    v.dedup();
}

fn atom_points<T: Real>(m: &Measure<T>) -> Vec<T> {
    match m {
        Measure::Discrete(d) => d.atoms.iter().map(|a| a.0[0]).collect(),
        _ => Vec::new(),
    }
}

/// x > 0 with F(−x) and 1 − F(x) both below `eps`.
fn cdf_radius<T: Real>(m: &Measure<T>, eps: T) -> Result<T> {
    let mut r = T::one();
    for _ in 0..200 {
        if m.cdf(-r)? <= eps && T::one() - m.cdf(r)? <= eps {
            return Ok(r);
        }
        r *= cst(2.0);
    }
    Ok(r)
}

fn geometric_points<T: Real>(r: T, out: &mut Vec<T>) {
    let mut x = T::one();
    while x < r {
        out.push(x);
        out.push(-x);
        x *= cst(2.0);
    }
    out.extend([T::zero(), r, -r]);
}

/// W(P, Q) = ∫ |F_P − F_Q| for measures on ℝ.
pub fn wasserstein_1d<T: Real>(p: &Measure<T>, q: &Measure<T>) -> Result<Estimate<T>> {
    if p.dim() != 1 || q.dim() != 1 || p.is_torus() || q.is_torus() {
        return Err(Error::Domain("wasserstein_1d needs measures on the real line".into()));
    }
    if let (Measure::Discrete(a), Measure::Discrete(b)) = (p, q) {
        let mut xs: Vec<T> = a.atoms.iter().chain(&b.atoms).map(|x| x.0[0]).collect();
        sort_dedup(&mut xs);
        let v = xs
            .windows(2)
            .map(|w| (a.cdf(w[0]) - b.cdf(w[0])).abs() * (w[1] - w[0]))
            .sum();
        return Ok(Estimate {
            value: v,
            err_estimate: T::zero(),
        });
    }
    let eps = cst::<T>(CDF_CUT);
    let r = cdf_radius(p, eps)?.max(cdf_radius(q, eps)?);
    let (lo_p, hi_p) = p.support_1d();
    let (lo_q, hi_q) = q.support_1d();
    let (lo, hi) = (lo_p.min(lo_q).max(-r), hi_p.max(hi_q).min(r));
    let mut pts = p.breakpoints();
    pts.extend(q.breakpoints());
    pts.extend(atom_points(p));
    pts.extend(atom_points(q));
    geometric_points(r, &mut pts);
    pts.retain(|x| *x >= lo && *x <= hi);
    pts.extend([lo, hi]);
    sort_dedup(&mut pts);
    let gap = |x: T| (p.cdf(x).unwrap_or(T::nan()) - q.cdf(x).unwrap_or(T::nan())).abs();
    let quad = Quad::with_tol(cst(1e-11)).max_panels(pts.len() + 8000);
    let body = quad.integrate(gap, &pts);
    let mut err = body.err;
    // truncated tails: mapped quadrature of the remaining gap
    let (full_lo, full_hi) = (lo_p.min(lo_q), hi_p.max(hi_q));
    for (a, b) in [(full_lo, lo), (hi, full_hi)] {
        if a < b {
            let t = Quad::with_tol(cst(1e-12)).tail_scale(r).integrate(gap, &[a, b]);
            err += if t.value.is_finite() {
                t.value.abs() + t.err
            } else {
                T::infinity()
            };
        }
    }
    Ok(Estimate {
        value: body.value,
        err_estimate: err,
    })
}

fn cost_matrix<T: Real, F: Fn(&[T], &[T]) -> T>(a: &Discrete<T>, b: &Discrete<T>, rho: &F) -> Vec<Vec<f64>> {
    a.atoms
        .iter()
        .map(|(x, _)| b.atoms.iter().map(|(y, _)| to_f64(rho(x, y))).collect())
        .collect()
}

fn weights<T: Real>(d: &Discrete<T>) -> Vec<f64> {
    d.atoms.iter().map(|a| to_f64(a.1)).collect()
}

/// Optimal transport plan for the cost ρ between two finite supports.
pub fn transport_discrete<T: Real, F: Fn(&[T], &[T]) -> T>(
    p: &Discrete<T>,
    q: &Discrete<T>,
    rho: F,
) -> Result<TransportPlan> {
    if p.dim() != q.dim() {
        return Err(Error::Domain(format!(
            "supports of dimension {} and {}",
            p.dim(),
            q.dim()
        )));
    }
    flow::transport(&weights(p), &weights(q), &cost_matrix(p, q, &rho))
}

/// W(P, Q) = inf over couplings of ∫∫ ρ dμ.
pub fn wasserstein_discrete<T: Real, F: Fn(&[T], &[T]) -> T>(p: &Discrete<T>, q: &Discrete<T>, rho: F) -> Result<T> {
    Ok(cst(transport_discrete(p, q, rho)?.value))
}

/// Euclidean distance on ℝ^d.
pub fn euclidean<T: Real>(x: &[T], y: &[T]) -> T {
    x.iter().zip(y).map(|(a, b)| (*a - *b) * (*a - *b)).sum::<T>().sqrt()
}

/// ρ̃(x, y) = ‖k(·,x) − k(·,y)‖_H, computed without validation.
fn rho_tilde<T: Real>(k: &KernelSpec<T>) -> impl Fn(&[T], &[T]) -> T + '_ {
    move |x, y| {
        (k.k(x, x) + k.k(y, y) - cst::<T>(2.0) * k.k(x, y))
            .max(T::zero())
            .sqrt()
    }
}

/// Union support of two discrete measures and the signed weights p − q on it.
fn signed_union<T: Real>(p: &Discrete<T>, q: &Discrete<T>) -> (Vec<Vec<T>>, Vec<T>) {
    let mut pts: Vec<Vec<T>> = Vec::new();
    let mut mu: Vec<T> = Vec::new();
    for (sign, d) in [(T::one(), p), (-T::one(), q)] {
        for (x, w) in &d.atoms {
            match pts.iter().position(|y| y == x) {
                Some(i) => mu[i] += sign * *w,
                None => {
                    pts.push(x.clone());
                    mu.push(sign * *w);
                }
            }
        }
    }
    (pts, mu)
}

fn grid_points<T: Real>(m: &Measure<T>) -> Vec<T> {
    match m {
        Measure::Grid(g) if g.values.len() <= 1 << 17 => (0..g.values.len()).map(|j| g.node(j)).collect(),
        _ => Vec::new(),
    }
}

/// Total variation ∫|p − q| (range [0, 2]).
pub fn tv<T: Real>(p: &Measure<T>, q: &Measure<T>) -> Result<T> {
    match (p, q) {
        (Measure::Discrete(a), Measure::Discrete(b)) => {
            if a.dim() != b.dim() {
                return Err(Error::Domain("measures of different dimension".into()));
            }
            Ok(signed_union(a, b).1.into_iter().map(|w| w.abs()).sum())
        }
        (Measure::Torus(a), Measure::Torus(b)) => {
            if a.dim() != b.dim() {
                return Err(Error::Domain("measures of different dimension".into()));
            }
            let tiles: Vec<T> = (0..=128).map(|j| T::TAU() * from_usize::<T>(j) / cst(128.0)).collect();
            let quad = Quad::with_tol(cst(1e-10)).max_panels(20_000);
            match a.dim() {
                1 => Ok(quad.integrate(|x| (a.pdf(&[x]) - b.pdf(&[x])).abs(), &tiles).value),
                2 => {
                    let coarse: Vec<T> = tiles.iter().step_by(4).copied().collect();
                    let r = quad.integrate2(
                        |x, y| (a.pdf(&[x, y]) - b.pdf(&[x, y])).abs(),
                        &coarse,
                        |_| coarse.clone(),
                    );
                    Ok(r.value)
                }
                d => Err(Error::Unsupported(format!("total variation on T^{d}"))),
            }
        }
        _ if p.has_density_1d() && q.has_density_1d() => Ok(tv_density(p, q)),
        _ => Err(Error::Unsupported(
            "total variation between a discrete and a continuous measure".into(),
        )),
    }
}

fn tv_density<T: Real>(p: &Measure<T>, q: &Measure<T>) -> T {
    let radius = |m: &Measure<T>| match m {
        Measure::Analytic(a) => a.effective_radius(cst(1e-8)),
        Measure::Grid(g) => g.x0.abs().max(g.x_max().abs()),
        _ => T::one(),
    };
    let (lo_p, hi_p) = p.support_1d();
    let (lo_q, hi_q) = q.support_1d();
    let (lo, hi) = (lo_p.min(lo_q), hi_p.max(hi_q));
    let r0 = radius(p).max(radius(q)).min(cst(200.0)).max(T::one());
    let tiles = 4096;
    let mut pts = p.breakpoints();
    pts.extend(q.breakpoints());
    pts.extend(grid_points(p));
    pts.extend(grid_points(q));
    pts.extend((0..=tiles).map(|j| -r0 + cst::<T>(2.0) * r0 * from_usize::<T>(j) / from_usize(tiles)));
    pts.retain(|x| *x >= lo && *x <= hi);
    pts.extend([lo, hi]);
    sort_dedup(&mut pts);
    let f = |x: T| (p.pdf(x).unwrap_or(T::zero()) - q.pdf(x).unwrap_or(T::zero())).abs();
    Quad::with_tol(cst(1e-11))
        .max_panels(pts.len() + 20_000)
        .tail_scale(r0)
        .integrate(f, &pts)
        .value
}

/// Dudley metric β(P,Q) = sup{∫f d(P−Q) : ‖f‖_L + ‖f‖_∞ ≤ 1} between finite
/// supports.
///
/// With Lipschitz budget t and sup budget s = 1 − t, the admissible f are
/// exactly the 1-Lipschitz functions for min(tρ, 2s) shifted to be centred,
/// so the inner supremum is a transport problem (Kantorovich–Rubinstein).
/// Its value is concave in t and is maximized over the kinks 2/(2 + ρ_ij)
/// and a golden-section refinement between them.
pub fn dudley_discrete<T: Real, F: Fn(&[T], &[T]) -> T>(p: &Discrete<T>, q: &Discrete<T>, rho: F) -> Result<T> {
    if p.dim() != q.dim() {
        return Err(Error::Domain("measures of different dimension".into()));
    }
    let base = cost_matrix(p, q, &rho);
    let (a, b) = (weights(p), weights(q));
    let value_at = |t: f64| -> Result<f64> {
        let c: Vec<Vec<f64>> = base
            .iter()
            .map(|r| r.iter().map(|&x| (t * x).min(2.0 * (1.0 - t))).collect())
            .collect();
        Ok(flow::transport(&a, &b, &c)?.value)
    };
    let mut ts: Vec<f64> = base
        .iter()
        .flatten()
        .filter(|x| **x > 0.0)
        .map(|x| 2.0 / (2.0 + x))
        .collect();
    ts.extend([0.0, 1.0]);
    sort_dedup(&mut ts);
    let vals = ts.iter().map(|&t| value_at(t)).collect::<Result<Vec<f64>>>()?;
    let k = (0..ts.len()).fold(0, |best, j| if vals[j] > vals[best] { j } else { best });
    let mut best = vals[k];
    let (mut lo, mut hi) = (ts[k.saturating_sub(1)], ts[(k + 1).min(ts.len() - 1)]);
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let (mut c1, mut c2) = (hi - r * (hi - lo), lo + r * (hi - lo));
    let (mut f1, mut f2) = (value_at(c1)?, value_at(c2)?);
    for _ in 0..80 {
        if f1 < f2 {
            lo = c1;
            c1 = c2;
            f1 = f2;
            c2 = lo + r * (hi - lo);
            f2 = value_at(c2)?;
        } else {
            hi = c2;
            c2 = c1;
            f2 = f1;
            c1 = hi - r * (hi - lo);
            f1 = value_at(c1)?;
        }
    }
    best = best.max(f1).max(f2);
    Ok(cst(best.max(0.0)))
}

/// inf over couplings of ∫∫ ‖k(·,x) − k(·,y)‖_H dμ, an upper bound on γ_k.
pub fn coupling_upper_bound<T: Real>(k: &KernelSpec<T>, p: &Discrete<T>, q: &Discrete<T>) -> Result<T> {
    if p.dim() != k.dim || q.dim() != k.dim {
        return Err(Error::Domain(format!(
            "kernel on dimension {} but supports of dimension {} and {}",
            k.dim,
            p.dim(),
            q.dim()
        )));
    }
    wasserstein_discrete(p, q, rho_tilde(k))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub id: String,
    pub lhs: f64,
    pub rhs: f64,
    pub pass: bool,
}

impl Check {
    fn new(id: &str, lhs: f64, rhs: f64) -> Self {
        Check {
            id: id.into(),
            lhs,
            rhs,
            pass: lhs <= rhs + CHECK_SLACK,
        }
    }

    pub fn slack(&self) -> f64 {
        self.rhs - self.lhs
    }
}

/// γ_k next to W, TV and β (with W and β in the ρ̃ metric) and the
/// inequalities linking them.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricReport<T> {
    pub gamma: T,
    pub wasserstein: Option<T>,
    pub tv: Option<T>,
    pub dudley: Option<T>,
    #[serde(rename = "bound_C")]
    pub bound_c: T,
    pub checks: Vec<Check>,
}

impl<T: Real> MetricReport<T> {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

pub fn compare_metrics<T: Real>(k: &KernelSpec<T>, p: &Discrete<T>, q: &Discrete<T>) -> Result<MetricReport<T>> {
    let c = k
        .bound()
        .ok_or_else(|| Error::InvalidParameter(format!("{k} is not bounded")))?;
    let gamma = gamma_sq_discrete(k, p, q).gamma;
    let w = coupling_upper_bound(k, p, q)?;
    let beta = dudley_discrete(p, q, rho_tilde(k))?;
    let tv = tv(&Measure::Discrete(p.clone()), &Measure::Discrete(q.clone()))?;
    let (g, wf, bf, tf, cf) = (to_f64(gamma), to_f64(w), to_f64(beta), to_f64(tv), to_f64(c));
    let checks = vec![
        Check::new("i.lower", g, wf),
        Check::new("i.upper", wf, (g * g + 4.0 * cf).sqrt()),
        Check::new("ii.lower", g / (1.0 + cf.sqrt()), bf),
        Check::new("ii.upper", bf, 2.0 * (g * g + 4.0 * cf).cbrt()),
        Check::new("iii", g, cf.sqrt() * tf),
        Check::new("coupling", g, wf),
    ];
    Ok(MetricReport {
        gamma,
        wasserstein: Some(w),
        tv: Some(tv),
        dudley: Some(beta),
        bound_c: c,
        checks,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WeakRow<T> {
    pub n: u32,
    pub gamma_sq: T,
    pub wasserstein: T,
    pub tv: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Metrization {
    Yes,
    No,
    Unknown,
}

/// Whether ∫ 1/(ψ̂(ω)(1+|ω|)^l) dω is finite for some tested l.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IntegrabilityCheck {
    pub first_finite_l: Option<u32>,
    pub tested: Vec<(u32, bool)>,
    pub metrizes_weak: Metrization,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeakTable<T> {
    pub rows: Vec<WeakRow<T>>,
    pub predicate: IntegrabilityCheck,
}

/// Largest exponent tried by the integrability predicate.
pub const MAX_EXPONENT: u32 = 8;

fn integral_to<T: Real, F: Fn(T) -> T>(f: &F, l: T) -> T {
    let mut pts = Vec::new();
    geometric_points(l, &mut pts);
    pts.retain(|x| x.abs() <= l);
    sort_dedup(&mut pts);
    Quad::with_tol(cst(1e-10)).max_panels(8000).integrate(f, &pts).value
}

/// ∫ 1/(ψ̂(ω)(1+|ω|)^l) dω converges for a one-dimensional spectral density.
fn reciprocal_integrable<T: Real>(density: &dyn Fn(T) -> T, l: u32) -> bool {
    let f = |w: T| {
        let d = density(w);
        if d > T::zero() {
            T::one() / (d * (T::one() + w.abs()).powi(l as i32))
        } else {
            T::infinity()
        }
    };
    let (near, far) = (integral_to(&f, cst(1e4)), integral_to(&f, cst(1e5)));
    near.is_finite() && far.is_finite() && far - near <= cst::<T>(1e-3) * near.abs()
}

pub fn integrability_check<T: Real>(k: &KernelSpec<T>) -> IntegrabilityCheck {
    let unknown = |reason: &str| IntegrabilityCheck {
        first_finite_l: None,
        tested: Vec::new(),
        metrizes_weak: Metrization::Unknown,
        reason: reason.into(),
    };
    if k.dim != 1 {
        return unknown("predicate evaluated for kernels on the real line only");
    }
    let verdict = k.classify().verdict;
    let spec = match k.spectrum() {
        Ok(s) => s,
        Err(_) => return unknown("kernel has no Bochner spectrum"),
    };
    let SpectrumKind::ContinuousDensity(d) = &spec.kind else {
        let mut r = unknown("spectral measure has no Lebesgue density");
        if matches!(verdict, Verdict::NotCharacteristic | Verdict::CharacteristicToP1) {
            r.metrizes_weak = Metrization::No;
            r.reason = "kernel is not characteristic on all probability measures".into();
        }
        return r;
    };
    let density = |w: T| d.eval(&[w]);
    let tested: Vec<(u32, bool)> = (1..=MAX_EXPONENT)
        .map(|l| (l, reciprocal_integrable(&density, l)))
        .collect();
    let first = tested.iter().find(|t| t.1).map(|t| t.0);
    let (metrizes_weak, reason) = match (first, verdict) {
        (_, Verdict::NotCharacteristic | Verdict::CharacteristicToP1) => (
            Metrization::No,
            "kernel is not characteristic on all probability measures".to_string(),
        ),
        (Some(l), _) => (
            Metrization::Yes,
            format!("reciprocal spectral integral finite at l = {l}"),
        ),
        (None, _) => (
            Metrization::Unknown,
            format!("reciprocal spectral integral diverges for every l <= {MAX_EXPONENT}"),
        ),
    };
    IntegrabilityCheck {
        first_finite_l: first,
        tested,
        metrizes_weak,
        reason,
    }
}

/// γ², W and TV along P_n = (1 − 1/n)δ₀ + (1/n)δ_n against δ₀.
pub fn weak_convergence_table<T: Real>(k: &KernelSpec<T>, ns: &[u32]) -> Result<WeakTable<T>> {
    if !k.is_translation_invariant() {
        return invalid(format!("{k} is not translation invariant"));
    }
    let mut rows = Vec::with_capacity(ns.len());
    for &n in ns {
        let (pn, p) = weak_sequence_pair::<T>(n)?;
        let (pn, p) = (Measure::Discrete(pn), Measure::Discrete(p));
        rows.push(WeakRow {
            n,
            gamma_sq: gamma_sq_weak_sequence(k, n)?,
            wasserstein: wasserstein_1d(&pn, &p)?.value,
            tv: tv(&pn, &p)?,
        });
    }
    Ok(WeakTable {
        rows,
        predicate: integrability_check(k),
    })
}
