//! Iterated integrals ∫∫ k(x,y) dA(x) dB(y) for signed combinations of
//! measures on ℝ.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::kernels::{KernelFamily, KernelSpec};
use crate::measures::{Analytic1D, GridDensity1D, Measure};
use crate::quadrature::{trapezoid_weights, Quad};
use crate::scalar::{cst, Real};

/// Σ c_i · (measure_i) with point masses (including trapezoid-weighted grid
/// nodes) kept apart from analytic densities.
#[derive(Clone)]
pub(crate) struct Signed1D<'a, T: Real> {
    pub atoms: Vec<(T, T)>,
    pub parts: Vec<(T, &'a Analytic1D<T>)>,
}

/// Grid nodes with trapezoid weights; `half` keeps every other node.
fn grid_atoms<T: Real>(g: &GridDensity1D<T>, half: bool) -> Vec<(T, T)> {
    let n = g.values.len();
    if half && n % 2 == 1 && n >= 5 {
        let m = n.div_ceil(2);
        let w = trapezoid_weights(m, g.dx * cst(2.0));
        (0..m).map(|j| (g.node(2 * j), w[j] * g.values[2 * j])).collect()
    } else {
        let w = trapezoid_weights(n, g.dx);
        (0..n).map(|j| (g.node(j), w[j] * g.values[j])).collect()
    }
}

impl<'a, T: Real> Signed1D<'a, T> {
    pub fn empty() -> Self {
        Signed1D {
            atoms: Vec::new(),
            parts: Vec::new(),
        }
    }

    pub fn add(mut self, c: T, m: &'a Measure<T>, half_grid: bool) -> Result<Self> {
        match m {
            Measure::Discrete(d) if d.dim() == 1 => self.atoms.extend(d.atoms.iter().map(|(x, w)| (x[0], c * *w))),
            Measure::Grid(g) => self
                .atoms
                .extend(grid_atoms(g, half_grid).into_iter().map(|(x, w)| (x, c * w))),
            Measure::Analytic(a) => self.parts.push((c, a)),
            _ => return Err(Error::Unsupported(format!("{m} is not a measure on the real line"))),
        }
        Ok(self)
    }

    pub fn density(&self, x: T) -> T {
        self.parts.iter().map(|(c, a)| *c * a.pdf(x)).sum()
    }

    pub fn breakpoints(&self) -> Vec<T> {
        let mut v: Vec<T> = Vec::new();
        for (_, a) in &self.parts {
            v.extend(a.breakpoints());
        }
        v
    }

    /// Convex hull of the density supports.
    pub fn hull(&self) -> Option<(T, T)> {
        if self.parts.is_empty() {
            return None;
        }
        let lo = self.parts.iter().map(|p| p.1.support().0).fold(T::infinity(), T::min);
        let hi = self
            .parts
            .iter()
            .map(|p| p.1.support().1)
            .fold(T::neg_infinity(), T::max);
        Some((lo, hi))
    }

    /// Breakpoints for integrating g(x) · density(x), where g has kinks at
    /// `extra`.
    fn points(&self, extra: &[T]) -> Vec<T> {
        let (lo, hi) = self.hull().unwrap_or((T::zero(), T::zero()));
        let mut pts: Vec<T> = self.breakpoints();
        pts.extend_from_slice(extra);
        if !lo.is_finite() && !hi.is_finite() {
            pts.push(T::zero());
        }
        pts.retain(|p| p.is_finite() && *p >= lo && *p <= hi);
        pts.push(lo);
        pts.push(hi);
        pts
    }

    /// ∫ g dA, with the quadrature error estimate.
    pub fn integrate<F: Fn(T) -> T>(&self, g: F, extra_kinks: &[T], quad: &Quad<T>) -> (T, T) {
        let atoms: T = self.atoms.iter().map(|(x, w)| *w * g(*x)).sum();
        let (v, err) = self.integrate_parts(g, extra_kinks, quad);
        (atoms + v, err)
    }

    /// ∫ g over the absolutely continuous part only.
    pub fn integrate_parts<F: Fn(T) -> T>(&self, g: F, extra_kinks: &[T], quad: &Quad<T>) -> (T, T) {
        if self.parts.is_empty() {
            return (T::zero(), T::zero());
        }
        let r = quad.integrate(|x| g(x) * self.density(x), &self.points(extra_kinks));
        (r.value, r.err)
    }
}

/// Width of the bump y ↦ k(x, y).
fn length_scale<T: Real>(k: &KernelSpec<T>) -> T {
    match &k.family {
        KernelFamily::Gaussian { sigma }
        | KernelFamily::Matern { sigma, .. }
        | KernelFamily::InverseMultiquadric { sigma, .. } => *sigma,
        KernelFamily::Laplacian { sigma } | KernelFamily::Sinc { sigma } => T::one() / *sigma,
        KernelFamily::BSpline { n } => cst(*n as f64 + 1.0),
        KernelFamily::Scaled { inner, .. } => length_scale(inner),
        KernelFamily::Sum(a, b) | KernelFamily::Product(a, b) => length_scale(a).min(length_scale(b)),
        _ => T::one(),
    }
}

/// ∫∫ k(x,y) dA(x) dB(y) with the accumulated error estimate.
pub(crate) fn cross_term<T: Real>(k: &KernelSpec<T>, a: &Signed1D<T>, b: &Signed1D<T>, tol: T) -> (T, T) {
    let kinks = k.kinks();
    let outer = Quad::with_tol(tol).max_panels(2000);
    let inner = Quad::with_tol(tol * cst(1e-2)).max_panels(2000);
    let b_bp = b.breakpoints();
    let w = length_scale(k);
    let inner_kinks = |x: T| -> Vec<T> {
        let mut v: Vec<T> = kinks.iter().map(|&c| x - c).collect();
        v.extend([x - w * cst(4.0), x, x + w * cst(4.0)]);
        v
    };
    let g = |x: T| -> (T, T) { b.integrate(|y| k.k1(x, y), &inner_kinks(x), &inner) };
    // atoms of A: direct sum, parallel over atoms
    let atom_part: (T, T) = a
        .atoms
        .par_iter()
        .map(|(x, w)| {
            let (v, e) = g(*x);
            (*w * v, w.abs() * e)
        })
        .reduce(|| (T::zero(), T::zero()), |p, q| (p.0 + q.0, p.1 + q.1));
    if a.parts.is_empty() {
        return atom_part;
    }
    // kinks of x ↦ ∫ k(x,y) dB(y)
    let mut outer_kinks: Vec<T> = Vec::new();
    for &bp in &b_bp {
        for &c in &kinks {
            outer_kinks.push(bp + c);
        }
    }
    if !b.atoms.is_empty() && b.atoms.len() <= 64 {
        for &(y, _) in &b.atoms {
            for &c in &kinks {
                outer_kinks.push(y + c);
            }
        }
    }
    let max_inner = std::cell::Cell::new(T::zero());
    let (v, e) = a.integrate_parts(
        |x| {
            let (v, e) = g(x);
            if e > max_inner.get() {
                max_inner.set(e);
            }
            v
        },
        &outer_kinks,
        &outer,
    );
    let e_inner = max_inner.get();
    (atom_part.0 + v, atom_part.1 + e + e_inner)
}

/// ∫∫ k d(P−Q) d(P−Q) for measures on ℝ, with Richardson refinement when
/// grids are involved.
pub(crate) fn gamma_sq_signed<T: Real>(k: &KernelSpec<T>, p: &Measure<T>, q: &Measure<T>, tol: T) -> Result<(T, T)> {
    let build =
        |half: bool| -> Result<Signed1D<T>> { Signed1D::empty().add(T::one(), p, half)?.add(-T::one(), q, half) };
    let full = build(false)?;
    let (v, e) = cross_term(k, &full, &full, tol);
    let has_grid = matches!(p, Measure::Grid(_)) || matches!(q, Measure::Grid(_));
    if !has_grid {
        return Ok((v, e));
    }
    let half = build(true)?;
    let (vh, eh) = cross_term(k, &half, &half, tol);
    // trapezoid error is O(h²): difference between h and 2h is 3× the error at h
    let rich = (v - vh).abs() / cst(3.0);
    Ok((v, e + eh + rich))
}
