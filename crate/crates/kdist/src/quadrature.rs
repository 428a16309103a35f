//! Globally adaptive Gauss–Legendre quadrature on unions of finite and
//! half-infinite segments.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::sync::OnceLock;

use crate::scalar::{cst, Real};

/// Nodes and weights of the `n`-point Gauss–Legendre rule on [−1, 1].
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    assert!(n >= 1);
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        // Tricomi initial guess then Newton on P_n.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 1 { x } else { p1 };
            let pn1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (x * pn - pn1) / (x * x - 1.0);
            let dx = pn / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    out.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    out
}

type Rule = Vec<(f64, f64)>;

fn rules() -> &'static (Rule, Rule) {
    static RULES: OnceLock<(Rule, Rule)> = OnceLock::new();
    RULES.get_or_init(|| (gauss_legendre(10), gauss_legendre(20)))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult<T> {
    pub value: T,
    pub err: T,
    pub panels: usize,
}

#[derive(Debug, Clone, Copy)]
enum Map<T> {
    Finite,
    /// x = base + s·tan(u), u ∈ [0, π/2)
    Right(T),
    /// x = base − s·tan(u)
    Left(T),
}

#[derive(Debug, Clone, Copy)]
struct Panel<T> {
    a: T,
    b: T,
    map: Map<T>,
    value: T,
    err: T,
}

impl<T: Real> PartialEq for Panel<T> {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}
impl<T: Real> Eq for Panel<T> {}
impl<T: Real> PartialOrd for Panel<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<T: Real> Ord for Panel<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.partial_cmp(&other.err).unwrap_or(Ordering::Equal)
    }
}

/// Adaptive integrator settings.
#[derive(Debug, Clone, Copy)]
pub struct Quad<T> {
    pub abs_tol: T,
    pub rel_tol: T,
    pub max_panels: usize,
    /// Length scale `s` of the tangent map used on infinite segments.
    pub tail_scale: T,
}

impl<T: Real> Default for Quad<T> {
    fn default() -> Self {
        Quad {
            abs_tol: cst(1e-9),
            rel_tol: cst(1e-12),
            max_panels: 4000,
            tail_scale: T::one(),
        }
    }
}

impl<T: Real> Quad<T> {
    pub fn with_tol(abs_tol: T) -> Self {
        Quad {
            abs_tol,
            ..Default::default()
        }
    }

    pub fn tail_scale(mut self, s: T) -> Self {
        self.tail_scale = s;
        self
    }

    pub fn max_panels(mut self, n: usize) -> Self {
        self.max_panels = n;
        self
    }

    fn eval_panel<F: Fn(T) -> T>(&self, f: &F, a: T, b: T, map: Map<T>) -> (T, T) {
        let (g10, g20) = rules();
        let half = (b - a) * cst(0.5);
        let mid = (a + b) * cst(0.5);
        let s = self.tail_scale;
        let g = |u: T| -> T {
            match map {
                Map::Finite => f(u),
                Map::Right(base) => {
                    let c = u.cos();
                    f(base + s * u.tan()) * s / (c * c)
                }
                Map::Left(base) => {
                    let c = u.cos();
                    f(base - s * u.tan()) * s / (c * c)
                }
            }
        };
        let mut i10 = T::zero();
        for &(x, w) in g10 {
            i10 += cst::<T>(w) * g(mid + half * cst(x));
        }
        let mut i20 = T::zero();
        for &(x, w) in g20 {
            i20 += cst::<T>(w) * g(mid + half * cst(x));
        }
        (i20 * half, ((i20 - i10) * half).abs())
    }

    /// Integrates `f` over the union of segments delimited by the sorted
    /// `points`.  The first and last entries may be infinite.
    pub fn integrate<F: Fn(T) -> T>(&self, f: F, points: &[T]) -> QuadResult<T> {
        let mut pts: Vec<T> = points.to_vec();
        pts.sort_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal));
        pts.dedup();
        let mut heap = BinaryHeap::new();
        let half_pi = T::FRAC_PI_2();
        let push = |heap: &mut BinaryHeap<Panel<T>>, a: T, b: T, map: Map<T>| {
            let (value, err) = self.eval_panel(&f, a, b, map);
            heap.push(Panel { a, b, map, value, err });
        };
        for w in pts.windows(2) {
            let (a, b) = (w[0], w[1]);
            match (a.is_finite(), b.is_finite()) {
                (true, true) => {
                    if b > a {
                        push(&mut heap, a, b, Map::Finite)
                    }
                }
                (true, false) => push(&mut heap, T::zero(), half_pi, Map::Right(a)),
                (false, true) => push(&mut heap, T::zero(), half_pi, Map::Left(b)),
                (false, false) => {
                    push(&mut heap, T::zero(), half_pi, Map::Right(T::zero()));
                    push(&mut heap, T::zero(), half_pi, Map::Left(T::zero()));
                }
            }
        }
        if pts.len() == 1 && !pts[0].is_finite() {
            return QuadResult {
                value: T::zero(),
                err: T::zero(),
                panels: 0,
            };
        }
        let mut total: T = heap.iter().map(|p| p.value).sum();
        let mut err: T = heap.iter().map(|p| p.err).sum();
        let finish = |heap: &BinaryHeap<Panel<T>>| QuadResult {
            value: heap.iter().map(|p| p.value).sum(),
            err: heap.iter().map(|p| p.err).sum(),
            panels: heap.len(),
        };
        loop {
            let tol = self.abs_tol.max(self.rel_tol * total.abs());
            if err <= tol || heap.len() >= self.max_panels || !err.is_finite() {
                return finish(&heap);
            }
            let worst = *heap.peek().expect("non-empty panel set");
            let m = (worst.a + worst.b) * cst(0.5);
            if m <= worst.a || m >= worst.b {
                return finish(&heap);
            }
            heap.pop();
            let (v1, e1) = self.eval_panel(&f, worst.a, m, worst.map);
            let (v2, e2) = self.eval_panel(&f, m, worst.b, worst.map);
            total += v1 + v2 - worst.value;
            err += e1 + e2 - worst.err;
            heap.push(Panel {
                a: worst.a,
                b: m,
                map: worst.map,
                value: v1,
                err: e1,
            });
            heap.push(Panel {
                a: m,
                b: worst.b,
                map: worst.map,
                value: v2,
                err: e2,
            });
            if heap.len() % 64 == 0 {
                err = heap.iter().map(|p| p.err).sum();
                total = heap.iter().map(|p| p.value).sum();
            }
        }
    }

    /// Adaptive iterated integral ∫ dx ∫ dy f(x, y).  `inner_points(x)`
    /// returns the breakpoints of the inner integral at abscissa `x`.
    pub fn integrate2<F, P>(&self, f: F, outer_points: &[T], inner_points: P) -> QuadResult<T>
    where
        F: Fn(T, T) -> T,
        P: Fn(T) -> Vec<T>,
    {
        let inner = Quad {
            abs_tol: self.abs_tol * cst(1e-2),
            ..*self
        };
        let err_inner = std::cell::Cell::new(T::zero());
        let res = self.integrate(
            |x| {
                let r = inner.integrate(|y| f(x, y), &inner_points(x));
                if r.err > err_inner.get() {
                    err_inner.set(r.err);
                }
                r.value
            },
            outer_points,
        );
        QuadResult {
            value: res.value,
            err: res.err + err_inner.get(),
            panels: res.panels,
        }
    }
}

/// Composite trapezoid weights for `n` equispaced nodes with spacing `h`.
pub fn trapezoid_weights<T: Real>(n: usize, h: T) -> Vec<T> {
    let mut w = vec![h; n];
    if n > 0 {
        w[0] = h * cst(0.5);
        w[n - 1] = h * cst(0.5);
    }
    if n == 1 {
        w[0] = T::zero();
    }
    w
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn gl_rules_integrate_polynomials_exactly() {
        for n in [1usize, 5, 10, 20] {
            let r = gauss_legendre(n);
            let s: f64 = r.iter().map(|&(_, w)| w).sum();
            assert_abs_diff_eq!(s, 2.0, epsilon = 1e-14);
            let deg = 2 * n - 1;
            let m: f64 = r.iter().map(|&(x, w)| w * x.powi(deg as i32 - 1)).sum();
            let exact = if (deg - 1) % 2 == 0 { 2.0 / deg as f64 } else { 0.0 };
            assert_abs_diff_eq!(m, exact, epsilon = 1e-13);
        }
    }

    #[test]
    fn finite_and_infinite_segments() {
        let q = Quad::<f64>::default();
        let r = q.integrate(|x| (-x * x).exp(), &[f64::NEG_INFINITY, f64::INFINITY]);
        assert_abs_diff_eq!(r.value, std::f64::consts::PI.sqrt(), epsilon = 1e-10);
        let r = q.integrate(|x| 1.0 / (1.0 + x * x), &[0.0, f64::INFINITY]);
        assert_abs_diff_eq!(r.value, std::f64::consts::FRAC_PI_2, epsilon = 1e-10);
        let r = q.integrate(|x| (1.0 - x.abs()).max(0.0), &[-2.0, -1.0, 0.0, 1.0, 2.0]);
        assert_abs_diff_eq!(r.value, 1.0, epsilon = 1e-13);
        let r = q.integrate(|x| x.abs().sqrt(), &[-1.0, 1.0]);
        assert_abs_diff_eq!(r.value, 4.0 / 3.0, epsilon = 1e-8);
    }

    #[test]
    fn iterated_integral() {
        let q = Quad::<f64>::default();
        let r = q.integrate2(|x, y| x * y, &[0.0, 1.0], |_| vec![0.0, 2.0]);
        assert_abs_diff_eq!(r.value, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn single_precision_works() {
        let q = Quad::<f32>::with_tol(1e-5);
        let r = q.integrate(|x| x.sin(), &[0.0, std::f32::consts::PI]);
        assert!((r.value - 2.0).abs() < 1e-5);
    }

    #[test]
    fn trapezoid() {
        let w = trapezoid_weights(5, 0.25f64);
        assert_eq!(w, vec![0.125, 0.25, 0.25, 0.25, 0.125]);
    }
}
