//! One-dimensional analytic families and their perturbations.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Error, Result};
use crate::quadrature::Quad;
use crate::scalar::{cst, from_i64, to_f64, Real};
use crate::special::{norm_cdf, norm_inv_cdf};

/// A signed perturbation θ^∨ added to a base density, known through its
/// values, Fourier transform and running integral.
pub trait Perturbation<T: Real>: Send + Sync + fmt::Debug {
    /// θ^∨(x)
    fn value(&self, x: T) -> T;
    /// ∫ e^{iωx} θ^∨(x) dx
    fn char_diff(&self, omega: T) -> Complex<T>;
    /// ∫_{−∞}^x θ^∨(t) dt
    fn cumulative(&self, x: T) -> T;
    /// Points where θ^∨ is not smooth.
    fn breakpoints(&self) -> Vec<T>;
    /// sup_x |θ^∨(x)| / q(x) over the support of the base density q.
    fn envelope(&self) -> T;
    fn describe(&self) -> String;
}

#[derive(Clone, Debug)]
pub enum Analytic1D<T: Real> {
    /// 𝒩(mu, s²)
    Gaussian {
        mu: T,
        s: T,
    },
    Cauchy {
        x0: T,
        gamma: T,
    },
    Uniform {
        a: T,
        b: T,
    },
    /// C_l / (1 + x²)^l
    CauchyPower {
        l: u32,
        c_l: T,
    },
    /// q(x) (1 + α sin(νπx))
    SinusoidPerturbed {
        base: Box<Analytic1D<T>>,
        alpha: T,
        nu: T,
    },
    /// q(x) + θ^∨(x)
    ThetaPerturbed {
        base: Box<Analytic1D<T>>,
        theta: Arc<dyn Perturbation<T>>,
    },
}

fn cauchy_power_norm(l: u32) -> f64 {
    static CACHE: OnceLock<Mutex<HashMap<u32, f64>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(c) = cache.lock().unwrap().get(&l) {
        return *c;
    }
    let q = Quad::with_tol(1e-14);
    let mass = q.integrate(
        |x: f64| (1.0 + x * x).powi(-(l as i32)),
        &[f64::NEG_INFINITY, 0.0, f64::INFINITY],
    );
    let c = 1.0 / mass.value;
    cache.lock().unwrap().insert(l, c);
    c
}

/// Uniform draw in the open interval (0, 1).
pub(crate) fn open_unit(rng: &mut ChaCha8Rng) -> f64 {
    ((rng.gen::<u64>() >> 11) as f64 + 0.5) / (1u64 << 53) as f64
}

pub(crate) const MAX_PROPOSALS: usize = 1_000_000;

impl<T: Real> Analytic1D<T> {
    pub fn gaussian(mu: T, s: T) -> Result<Self> {
        let m = Analytic1D::Gaussian { mu, s };
        m.validate()?;
        Ok(m)
    }

    pub fn cauchy(x0: T, gamma: T) -> Result<Self> {
        let m = Analytic1D::Cauchy { x0, gamma };
        m.validate()?;
        Ok(m)
    }

    pub fn uniform(a: T, b: T) -> Result<Self> {
        let m = Analytic1D::Uniform { a, b };
        m.validate()?;
        Ok(m)
    }

    /// Density C_l/(1+x²)^l with C_l found by quadrature (cached per l).
    pub fn cauchy_power(l: u32) -> Result<Self> {
        if l == 0 {
            return invalid("cauchy power needs l >= 1");
        }
        Ok(Analytic1D::CauchyPower {
            l,
            c_l: cst(cauchy_power_norm(l)),
        })
    }

    /// q(x) + α q(x) sin(νπx) for an even base density q.
    pub fn sinusoid_perturbed(base: Analytic1D<T>, alpha: T, nu: T) -> Result<Self> {
        let m = Analytic1D::SinusoidPerturbed {
            base: Box::new(base),
            alpha,
            nu,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn theta_perturbed(base: Analytic1D<T>, theta: Arc<dyn Perturbation<T>>) -> Result<Self> {
        let m = Analytic1D::ThetaPerturbed {
            base: Box::new(base),
            theta,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        let fin = |v: T| v.is_finite();
        match self {
            Analytic1D::Gaussian { mu, s } => {
                if !(fin(*mu) && fin(*s) && *s > T::zero()) {
                    return Err(Error::Validation(format!(
                        "gaussian needs finite mean and s > 0, got ({mu}, {s})"
                    )));
                }
            }
            Analytic1D::Cauchy { x0, gamma } => {
                if !(fin(*x0) && fin(*gamma) && *gamma > T::zero()) {
                    return Err(Error::Validation(
                        "cauchy needs a finite location and positive scale".into(),
                    ));
                }
            }
            Analytic1D::Uniform { a, b } => {
                if !(fin(*a) && fin(*b) && a < b) {
                    return Err(Error::Validation(format!("uniform needs a < b, got [{a}, {b}]")));
                }
            }
            Analytic1D::CauchyPower { l, c_l } => {
                let want: T = cst(cauchy_power_norm(*l));
                if *l == 0 || (*c_l - want).abs() > cst::<T>(1e-8) * want {
                    return Err(Error::Validation("cauchy power normalizer inconsistent".into()));
                }
            }
            Analytic1D::SinusoidPerturbed { base, alpha, nu } => {
                base.validate()?;
                if !base.is_symmetric() {
                    return Err(Error::Validation(
                        "sinusoidal perturbation needs an even base density".into(),
                    ));
                }
                if !(alpha.abs() <= T::one()) || *alpha == T::zero() {
                    return Err(Error::Validation(format!(
                        "perturbation amplitude must lie in [-1,1]\\{{0}}, got {alpha}"
                    )));
                }
                if !fin(*nu) || *nu == T::zero() {
                    return Err(Error::Validation(
                        "perturbation frequency must be finite and nonzero".into(),
                    ));
                }
            }
            Analytic1D::ThetaPerturbed { base, theta } => {
                base.validate()?;
                let m = theta.envelope();
                if !m.is_finite() {
                    return Err(Error::Validation(
                        "perturbation is not dominated by the base density".into(),
                    ));
                }
                if m > T::one() + cst(1e-12) {
                    return Err(Error::Validation(format!(
                        "perturbation drives the density negative: sup |theta/q| = {m}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Density is even about 0.
    pub fn is_symmetric(&self) -> bool {
        match self {
            Analytic1D::Gaussian { mu, .. } => *mu == T::zero(),
            Analytic1D::Cauchy { x0, .. } => *x0 == T::zero(),
            Analytic1D::Uniform { a, b } => *a == -*b,
            Analytic1D::CauchyPower { .. } => true,
            Analytic1D::SinusoidPerturbed { .. } | Analytic1D::ThetaPerturbed { .. } => false,
        }
    }

    pub fn pdf(&self, x: T) -> T {
        match self {
            Analytic1D::Gaussian { mu, s } => {
                let z = (x - *mu) / *s;
                (-z * z * cst(0.5)).exp() / (*s * T::TAU().sqrt())
            }
            Analytic1D::Cauchy { x0, gamma } => {
                let z = x - *x0;
                *gamma / (T::PI() * (z * z + *gamma * *gamma))
            }
            Analytic1D::Uniform { a, b } => {
                if x >= *a && x <= *b {
                    T::one() / (*b - *a)
                } else {
                    T::zero()
                }
            }
            Analytic1D::CauchyPower { l, c_l } => *c_l * (T::one() + x * x).powi(-(*l as i32)),
            Analytic1D::SinusoidPerturbed { base, alpha, nu } => {
                base.pdf(x) * (T::one() + *alpha * (*nu * T::PI() * x).sin())
            }
            Analytic1D::ThetaPerturbed { base, theta } => base.pdf(x) + theta.value(x),
        }
    }

    pub fn cdf(&self, x: T) -> T {
        let v = match self {
            Analytic1D::Gaussian { mu, s } => norm_cdf((x - *mu) / *s),
            Analytic1D::Cauchy { x0, gamma } => cst::<T>(0.5) + ((x - *x0) / *gamma).atan() / T::PI(),
            Analytic1D::Uniform { a, b } => ((x - *a) / (*b - *a)).max(T::zero()).min(T::one()),
            Analytic1D::CauchyPower { .. } => {
                let q = Quad::with_tol(cst(1e-13));
                if x <= T::zero() {
                    q.integrate(|t| self.pdf(t), &[T::neg_infinity(), x]).value
                } else {
                    T::one() - q.integrate(|t| self.pdf(t), &[x, T::infinity()]).value
                }
            }
            Analytic1D::SinusoidPerturbed { base, alpha, nu } => {
                let w = *nu * T::PI();
                let extra = match base.as_ref() {
                    Analytic1D::Uniform { a, b } => {
                        let hi = x.min(*b);
                        if hi <= *a {
                            T::zero()
                        } else {
                            ((*a * w).cos() - (hi * w).cos()) / (w * (*b - *a))
                        }
                    }
                    _ => {
                        let mut pts = base.breakpoints();
                        pts.retain(|p| *p < x);
                        pts.push(T::neg_infinity());
                        pts.push(x);
                        Quad::with_tol(cst(1e-13))
                            .integrate(|t| base.pdf(t) * (w * t).sin(), &pts)
                            .value
                    }
                };
                base.cdf(x) + *alpha * extra
            }
            Analytic1D::ThetaPerturbed { base, theta } => base.cdf(x) + theta.cumulative(x),
        };
        v.max(T::zero()).min(T::one())
    }

    /// φ(ω) = ∫ e^{iωx} dP(x)
    pub fn char_fn(&self, omega: T) -> Complex<T> {
        let i = Complex::new(T::zero(), T::one());
        match self {
            Analytic1D::Gaussian { mu, s } => {
                let re = -*s * *s * omega * omega * cst(0.5);
                Complex::from_polar(re.exp(), omega * *mu)
            }
            Analytic1D::Cauchy { x0, gamma } => Complex::from_polar((-*gamma * omega.abs()).exp(), omega * *x0),
            Analytic1D::Uniform { a, b } => {
                let h = (*b - *a) * cst(0.5);
                let c = (*a + *b) * cst(0.5);
                let t = omega * h;
                let sinc = if t.abs() < cst(1e-4) {
                    T::one() - t * t / cst(6.0)
                } else {
                    t.sin() / t
                };
                Complex::from_polar(sinc, omega * c)
            }
            Analytic1D::CauchyPower { l, c_l } => {
                // (1+x²)^{−l} ↔ 2√π/Γ(l) (|ω|/2)^{l−½} K_{l−½}(|ω|)
                let w = to_f64(omega.abs());
                if w == 0.0 {
                    return Complex::new(T::one(), T::zero());
                }
                if w > 700.0 {
                    return Complex::new(T::zero(), T::zero());
                }
                let nu = *l as f64 - 0.5;
                let v = 2.0 * std::f64::consts::PI.sqrt() / libm::tgamma(*l as f64)
                    * (w / 2.0).powf(nu)
                    * crate::special::bessel_k(nu, w);
                Complex::new(*c_l * cst(v), T::zero())
            }
            Analytic1D::SinusoidPerturbed { base, alpha, nu } => {
                let w = *nu * T::PI();
                let d = base.char_fn(omega - w) - base.char_fn(omega + w);
                base.char_fn(omega) + i * d * (*alpha * cst(0.5))
            }
            Analytic1D::ThetaPerturbed { base, theta } => base.char_fn(omega) + theta.char_diff(omega),
        }
    }

    /// Kinks or jumps of the density.
    pub fn breakpoints(&self) -> Vec<T> {
        match self {
            Analytic1D::Uniform { a, b } => vec![*a, *b],
            Analytic1D::SinusoidPerturbed { base, .. } => base.breakpoints(),
            Analytic1D::ThetaPerturbed { base, theta } => {
                let mut v = base.breakpoints();
                v.extend(theta.breakpoints());
                v
            }
            _ => Vec::new(),
        }
    }

    /// Smallest closed interval carrying the density.
    pub fn support(&self) -> (T, T) {
        match self {
            Analytic1D::Uniform { a, b } => (*a, *b),
            Analytic1D::SinusoidPerturbed { base, .. } | Analytic1D::ThetaPerturbed { base, .. } => base.support(),
            _ => (T::neg_infinity(), T::infinity()),
        }
    }

    /// Tail mass outside [−r, r] is below `eps` (conservative).
    pub fn effective_radius(&self, eps: T) -> T {
        match self {
            Analytic1D::Gaussian { mu, s } => mu.abs() + *s * (-norm_inv_cdf(eps * cst(0.5))),
            Analytic1D::Cauchy { x0, gamma } => x0.abs() + *gamma * cst::<T>(2.0) / (T::PI() * eps),
            Analytic1D::Uniform { a, b } => a.abs().max(b.abs()),
            Analytic1D::CauchyPower { l, c_l } => {
                // ∫_r^∞ C x^{−2l} = C r^{1−2l}/(2l−1)
                let k = from_i64::<T>(2 * *l as i64 - 1);
                (cst::<T>(2.0) * *c_l / (k * eps)).powf(T::one() / k).max(T::one())
            }
            Analytic1D::SinusoidPerturbed { base, alpha, .. } => base.effective_radius(eps / (T::one() + alpha.abs())),
            Analytic1D::ThetaPerturbed { base, theta } => base.effective_radius(eps / (T::one() + theta.envelope())),
        }
    }

    pub fn sample_one(&self, rng: &mut ChaCha8Rng) -> Result<T> {
        match self {
            Analytic1D::Gaussian { mu, s } => Ok(*mu + *s * norm_inv_cdf::<T>(cst(open_unit(rng)))),
            Analytic1D::Cauchy { x0, gamma } => {
                let u = open_unit(rng);
                Ok(*x0 + *gamma * cst::<T>((std::f64::consts::PI * (u - 0.5)).tan()))
            }
            Analytic1D::Uniform { a, b } => Ok(*a + (*b - *a) * cst(open_unit(rng))),
            Analytic1D::CauchyPower { l, .. } => {
                for _ in 0..MAX_PROPOSALS {
                    let x = (std::f64::consts::PI * (open_unit(rng) - 0.5)).tan();
                    if rng.gen::<f64>() <= (1.0 + x * x).powi(1 - *l as i32) {
                        return Ok(cst(x));
                    }
                }
                Err(proposal_cap())
            }
            Analytic1D::SinusoidPerturbed { base, alpha, nu } => {
                let env = T::one() + alpha.abs();
                for _ in 0..MAX_PROPOSALS {
                    let x = base.sample_one(rng)?;
                    let ratio = (T::one() + *alpha * (*nu * T::PI() * x).sin()) / env;
                    if cst::<T>(rng.gen::<f64>()) <= ratio {
                        return Ok(x);
                    }
                }
                Err(proposal_cap())
            }
            Analytic1D::ThetaPerturbed { base, theta } => {
                let env = T::one() + theta.envelope();
                for _ in 0..MAX_PROPOSALS {
                    let x = base.sample_one(rng)?;
                    let q = base.pdf(x);
                    if q <= T::zero() {
                        continue;
                    }
                    let ratio = (q + theta.value(x)) / (env * q);
                    if cst::<T>(rng.gen::<f64>()) <= ratio {
                        return Ok(x);
                    }
                }
                Err(proposal_cap())
            }
        }
    }
}

pub(crate) fn proposal_cap() -> Error {
    Error::Numerical(format!(
        "rejection sampler exceeded {MAX_PROPOSALS} proposals; envelope too loose"
    ))
}

impl<T: Real> fmt::Display for Analytic1D<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Analytic1D::Gaussian { mu, s } => write!(f, "gaussian({mu},{})", *s * *s),
            Analytic1D::Cauchy { x0, gamma } => write!(f, "cauchy({x0},{gamma})"),
            Analytic1D::Uniform { a, b } => write!(f, "uniform({a},{b})"),
            Analytic1D::CauchyPower { l, .. } => write!(f, "cauchy_power(l={l})"),
            Analytic1D::SinusoidPerturbed { base, alpha, nu } => write!(f, "perturbed({base},alpha={alpha},nu={nu})"),
            Analytic1D::ThetaPerturbed { base, theta } => write!(f, "theta_perturbed({base},{})", theta.describe()),
        }
    }
}
