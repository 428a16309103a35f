//! Fourier-side evaluation: weighted L² distances of characteristic
//! functions and torus coefficient series.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::kernels::{LambdaComponent, SpectrumKind, TorusKernelSpec};
use crate::measures::Measure;
use crate::quadrature::Quad;
use crate::scalar::{cst, from_usize, Real};

/// Largest panel count used to tile the frequency axis.
const MAX_TILES: usize = 20_000;

fn diff_sq<T: Real>(p: &Measure<T>, q: &Measure<T>, omega: &[T]) -> T {
    (p.char_function(omega) - q.char_function(omega)).norm_sqr()
}

/// Length over which the characteristic functions oscillate once.
fn spatial_radius<T: Real>(m: &Measure<T>) -> T {
    let r = match m {
        Measure::Discrete(d) => d
            .atoms
            .iter()
            .flat_map(|a| a.0.iter())
            .map(|x| x.abs())
            .fold(T::zero(), T::max),
        Measure::Grid(g) => g.x0.abs().max(g.x_max().abs()),
        Measure::Analytic(a) => a.effective_radius(cst(1e-3)).min(cst(50.0)),
        Measure::Torus(_) => T::PI(),
    };
    r.max(T::one())
}

/// ∫ |φ_P − φ_Q|² dΛ over one absolutely continuous one-dimensional piece.
fn density_piece<T: Real>(c: &LambdaComponent<T>, p: &Measure<T>, q: &Measure<T>, tol: T) -> (T, T) {
    let f = |w: T| diff_sq(p, q, &[w]) * c.density_at(&[w]);
    let spacing = T::PI() / spatial_radius(p).max(spatial_radius(q));
    let mut pts = c.breakpoints_1d();
    let (lo, hi, open) = match c.interval_1d() {
        Some((lo, hi)) => (lo, hi, false),
        None => {
            // widen until the spectral density is negligible
            let mut l: T = cst(16.0);
            while l < cst(1e5) && (c.density_at(&[l]) + c.density_at(&[-l])) * l > cst(1e-13) {
                l *= cst(2.0);
            }
            (-l, l, true)
        }
    };
    let tiles = (((hi - lo) / spacing).ceil().to_usize().unwrap_or(MAX_TILES)).clamp(1, MAX_TILES);
    let h = (hi - lo) / from_usize(tiles);
    pts.extend((0..=tiles).map(|j| lo + h * from_usize::<T>(j)));
    pts.push(T::zero());
    pts.retain(|x| x.is_finite() && *x >= lo && *x <= hi);
    if open {
        pts.push(T::neg_infinity());
        pts.push(T::infinity());
    }
    let quad = Quad::with_tol(tol)
        .max_panels(tiles + 4000)
        .tail_scale(hi.abs().max(T::one()));
    let r = quad.integrate(f, &pts);
    (r.value, r.err)
}

fn component<T: Real>(c: &LambdaComponent<T>, p: &Measure<T>, q: &Measure<T>, tol: T) -> Result<(T, T)> {
    match c {
        LambdaComponent::Atoms { atoms, tail } => {
            let v = atoms.iter().map(|(w, lam)| *lam * diff_sq(p, q, w)).sum();
            Ok((v, *tail * cst(4.0)))
        }
        LambdaComponent::Density { density, .. } if density.dim != 1 => Err(Error::Unsupported(
            "spectral quadrature over continuous densities is one-dimensional".into(),
        )),
        _ => Ok(density_piece(c, p, q, tol)),
    }
}

/// Σ over spectral components of ∫ |φ_P − φ_Q|² dΛ.
pub(crate) fn spectral_integral<T: Real>(
    kind: &SpectrumKind<T>,
    comps: &[LambdaComponent<T>],
    p: &Measure<T>,
    q: &Measure<T>,
    tol: T,
) -> Result<(T, T)> {
    if let SpectrumKind::TorusCoefficients(_) = kind {
        return Err(Error::Unsupported("torus kernels use the coefficient series".into()));
    }
    let mut v = T::zero();
    let mut e = T::zero();
    for c in comps {
        let (cv, ce) = component(c, p, q, tol)?;
        v += cv;
        e += ce;
    }
    Ok((v, e))
}

/// Multi-indices of [−N, N]^d.
pub(crate) fn lattice_box(d: usize, n: i64) -> Vec<Vec<i64>> {
    let mut out: Vec<Vec<i64>> = vec![Vec::new()];
    for _ in 0..d {
        out = out
            .into_iter()
            .flat_map(|v| {
                (-n..=n).map(move |j| {
                    let mut w = v.clone();
                    w.push(j);
                    w
                })
            })
            .collect();
    }
    out
}

/// (2π)^{2d} Σ_{|n|∞ ≤ N} A_ψ(n) |A_P(n) − A_Q(n)|², with the tail bound.
pub(crate) fn torus_series<T: Real>(
    k: &TorusKernelSpec<T>,
    p: &Measure<T>,
    q: &Measure<T>,
    big_n: u64,
) -> Result<(T, T)> {
    let d = k.dim;
    if p.dim() != d || q.dim() != d {
        return Err(Error::Domain(format!(
            "kernel on T^{d} but measures of dimension {} and {}",
            p.dim(),
            q.dim()
        )));
    }
    let scale = T::TAU().powi(2 * d as i32);
    let mut v = T::zero();
    for n in lattice_box(d, big_n as i64) {
        let a = k.coeff(&n);
        if a == T::zero() {
            continue;
        }
        let diff: Complex<T> = p.torus_fourier_coeff(&n)? - q.torus_fourier_coeff(&n)?;
        v += a * diff.norm_sqr();
    }
    // |A_P(n)| ≤ (2π)^{-d}
    let sup = cst::<T>(2.0) / T::TAU().powi(d as i32);
    Ok((scale * v, scale * k.tail(big_n) * sup * sup))
}
