//! Concrete perturbations θ^∨ whose Fourier transforms avoid a kernel's
//! spectrum.

use std::fmt;

use num_complex::Complex;

use crate::error::{invalid, Result};
use crate::kernels::cardinal_bspline;
use crate::measures::Perturbation;
use crate::quadrature::Quad;
use crate::scalar::{cst, from_usize, Real};

/// θ^∨(x) = c·sin(ω₀x)·(sin(βx/2)/x)^N with c = 2^N α/√(2π), added to a
/// standard Cauchy density.
#[derive(Clone)]
pub struct SincCauchyTheta<T> {
    pub beta: T,
    pub n: u32,
    pub omega0: T,
    pub alpha: T,
    /// ∫₀^∞ θ^∨
    half_mass: T,
    envelope: T,
}

impl<T: Real> SincCauchyTheta<T> {
    pub fn new(beta: T, n: u32, omega0: T, alpha: T) -> Result<Self> {
        if !(beta > T::zero()) || !beta.is_finite() {
            return invalid("beta must be positive");
        }
        if n < 2 {
            return invalid("N must be at least 2");
        }
        if omega0.abs() < beta * cst(n as f64 + 2.0) * cst(0.5) {
            return invalid(format!(
                "|omega0| must be at least (N+2)beta/2 = {}",
                beta * cst(n as f64 + 2.0) * cst(0.5)
            ));
        }
        if alpha == T::zero() || !alpha.is_finite() {
            return invalid("alpha must be finite and nonzero");
        }
        let mut t = SincCauchyTheta {
            beta,
            n,
            omega0,
            alpha,
            half_mass: T::zero(),
            envelope: T::zero(),
        };
        t.envelope = t.alpha.abs() * t.unit_envelope();
        // ∫₀^∞ f = (1/(πi)) ∫₀^∞ f̂(ω)/ω dω for odd f; f̂ lives on ω₀ ± Nβ/2
        let lo = omega0.abs() - beta * cst(n as f64) * cst(0.5);
        let hi = omega0.abs() + beta * cst(n as f64) * cst(0.5);
        let pts: Vec<T> = (0..=4 * n as usize)
            .map(|j| lo + (hi - lo) * from_usize::<T>(j) / cst(4.0 * n as f64))
            .collect();
        let r =
            Quad::with_tol(cst(1e-15)).integrate(|w| (t.char_diff(w) / Complex::new(T::zero(), T::PI())).re / w, &pts);
        t.half_mass = r.value;
        Ok(t)
    }

    fn coef(&self) -> T {
        cst::<T>(2f64.powi(self.n as i32)) * self.alpha / T::TAU().sqrt()
    }

    /// (sin(βx/2)/x)^N
    fn g(&self, x: T) -> T {
        let a = self.beta * cst(0.5);
        let r = if (a * x).abs() < cst(1e-4) {
            a * (T::one() - (a * x) * (a * x) / cst(6.0))
        } else {
            (a * x).sin() / x
        };
        r.powi(self.n as i32)
    }

    /// ∫ e^{iωx} g(x) dx = π (β/2)^{N−1} M_N(ω/β)
    fn g_hat(&self, omega: T) -> T {
        let a = self.beta * cst(0.5);
        T::PI() * a.powi(self.n as i32 - 1) * cardinal_bspline(self.n, omega / self.beta)
    }

    /// sup_x |θ^∨(x)|/q(x) per unit α, with an explicit tail bound.
    fn unit_envelope(&self) -> T {
        let c = self.coef().abs() / self.alpha.abs();
        let ratio = |x: T| c * (self.omega0 * x).sin().abs() * self.g(x).abs() * T::PI() * (T::one() + x * x);
        let period = T::TAU() / (self.omega0.abs() + self.beta * cst(self.n as f64));
        let h = period / cst(64.0);
        let x_max = (period * cst(400.0)).max(cst(20.0));
        let steps = (x_max / h).to_usize().unwrap_or(0);
        let mut best = Vec::with_capacity(8);
        let mut prev = (T::zero(), T::zero(), T::zero());
        for j in 0..=steps {
            let x = h * from_usize::<T>(j);
            let v = ratio(x);
            if prev.1 >= prev.0 && prev.1 >= v {
                best.push((prev.1, h * from_usize::<T>(j.saturating_sub(1))));
            }
            prev = (prev.1, v, x);
        }
        best.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
        best.truncate(16);
        let mut sup = best.first().map_or(T::zero(), |b| b.0);
        for &(_, x) in &best {
            let (mut a, mut b) = ((x - h).max(T::zero()), x + h);
            let r: T = cst((5f64.sqrt() - 1.0) / 2.0);
            for _ in 0..60 {
                let c1 = b - r * (b - a);
                let c2 = a + r * (b - a);
                if ratio(c1) > ratio(c2) {
                    b = c2;
                } else {
                    a = c1;
                }
            }
            sup = sup.max(ratio((a + b) * cst(0.5)));
        }
        // |x| ≥ X: |sin| ≤ 1, |sin^N| ≤ 1, so ratio ≤ cπ(1 + X²)/X^N
        let tail = c * T::PI() * (T::one() + x_max * x_max) / x_max.powi(self.n as i32);
        sup.max(tail)
    }

    /// Largest admissible |α| for these β, N, ω₀.
    pub fn alpha_bound(&self) -> T {
        self.alpha.abs() / self.envelope
    }

    /// Frequencies carrying θ: ±[|ω₀| − Nβ/2, |ω₀| + Nβ/2].
    pub fn spectral_support(&self) -> Vec<(T, T)> {
        let w = self.beta * cst(self.n as f64) * cst(0.5);
        let o = self.omega0.abs();
        vec![(-o - w, -o + w), (o - w, o + w)]
    }
}

impl<T: Real> Perturbation<T> for SincCauchyTheta<T> {
    fn value(&self, x: T) -> T {
        self.coef() * (self.omega0 * x).sin() * self.g(x)
    }

    fn char_diff(&self, omega: T) -> Complex<T> {
        // sin(ω₀x) g(x) ↔ (ĝ(ω+ω₀) − ĝ(ω−ω₀))/(2i)
        let d = self.g_hat(omega + self.omega0) - self.g_hat(omega - self.omega0);
        Complex::new(T::zero(), -self.coef() * d * cst(0.5))
    }

    fn cumulative(&self, x: T) -> T {
        // odd integrand: F(x) = F(−x) = ∫₀^{|x|} θ^∨ − ∫₀^∞ θ^∨
        let ax = x.abs();
        let period = T::TAU() / (self.omega0.abs() + self.beta);
        let n = ((ax / period).ceil().to_usize().unwrap_or(1)).clamp(1, 1 << 16);
        let pts: Vec<T> = (0..=n).map(|j| ax * from_usize::<T>(j) / from_usize::<T>(n)).collect();
        let head = Quad::with_tol(cst(1e-14))
            .max_panels(n + 4000)
            .integrate(|t| self.value(t), &pts)
            .value;
        head - self.half_mass
    }

    fn breakpoints(&self) -> Vec<T> {
        Vec::new()
    }

    fn envelope(&self) -> T {
        self.envelope
    }

    fn describe(&self) -> String {
        format!(
            "sinc_theta(beta={},N={},omega0={},alpha={})",
            self.beta, self.n, self.omega0, self.alpha
        )
    }
}

impl<T: Real> fmt::Debug for SincCauchyTheta<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.describe())
    }
}

/// Odd pair of tents: −α on [−τ, 0] and +α on [0, τ], peaks at ∓τ/2, added to
/// a uniform density on [−β, β].
#[derive(Clone)]
pub struct TentPairTheta<T> {
    pub tau: T,
    pub alpha: T,
    /// Half-width of the uniform base.
    pub beta: T,
}

impl<T: Real> TentPairTheta<T> {
    pub fn new(tau: T, alpha: T, beta: T) -> Result<Self> {
        if !(tau > T::zero()) || !(beta >= tau) {
            return invalid(format!("need 0 < tau <= beta, got tau={tau}, beta={beta}"));
        }
        if !(alpha > T::zero()) || alpha > T::one() / (cst::<T>(2.0) * beta) * (T::one() + cst(1e-12)) {
            return invalid(format!("alpha must lie in (0, 1/(2 beta)], got {alpha}"));
        }
        Ok(TentPairTheta { tau, alpha, beta })
    }

    fn tent(&self, x: T) -> T {
        let h = self.tau * cst(0.5);
        (T::one() - x.abs() / h).max(T::zero())
    }

    /// ∫_{−∞}^x of the unit tent of half-width τ/2.
    fn tent_cum(&self, x: T) -> T {
        let h = self.tau * cst(0.5);
        if x <= -h {
            T::zero()
        } else if x <= T::zero() {
            (x + h) * (x + h) / (cst::<T>(2.0) * h)
        } else if x < h {
            h - (h - x) * (h - x) / (cst::<T>(2.0) * h)
        } else {
            h
        }
    }
}

impl<T: Real> Perturbation<T> for TentPairTheta<T> {
    fn value(&self, x: T) -> T {
        let h = self.tau * cst(0.5);
        self.alpha * (self.tent(x - h) - self.tent(x + h))
    }

    fn char_diff(&self, omega: T) -> Complex<T> {
        // tent ↔ h·(sin(ωh/2)/(ωh/2))², shifted by ±h: 2i sin(ωh)
        let h = self.tau * cst(0.5);
        let u = omega * h * cst(0.5);
        let s = if u.abs() < cst(1e-4) {
            T::one() - u * u / cst(3.0)
        } else {
            (u.sin() / u).powi(2)
        };
        Complex::new(T::zero(), cst::<T>(2.0) * self.alpha * h * s * (omega * h).sin())
    }

    fn cumulative(&self, x: T) -> T {
        let h = self.tau * cst(0.5);
        self.alpha * (self.tent_cum(x - h) - self.tent_cum(x + h))
    }

    fn breakpoints(&self) -> Vec<T> {
        let h = self.tau * cst(0.5);
        vec![-self.tau, -h, T::zero(), h, self.tau]
    }

    fn envelope(&self) -> T {
        cst::<T>(2.0) * self.alpha * self.beta
    }

    fn describe(&self) -> String {
        format!("tent_theta(tau={},alpha={})", self.tau, self.alpha)
    }
}

impl<T: Real> fmt::Debug for TentPairTheta<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.describe())
    }
}
