use super::*;
use crate::quadrature::Quad;
use std::f64::consts::{PI, TAU};
use std::sync::Arc;

use approx::assert_abs_diff_eq;
use proptest::prelude::*;

fn quad_char(m: &Measure<f64>, w: f64) -> Complex<f64> {
    let q = Quad {
        abs_tol: 1e-12,
        max_panels: 20_000,
        ..Quad::default()
    };
    let mut pts = m.breakpoints();
    pts.extend([f64::NEG_INFINITY, 0.0, f64::INFINITY]);
    let (lo, hi) = m.support_1d();
    pts.retain(|p| *p >= lo && *p <= hi);
    pts.push(lo);
    pts.push(hi);
    let re = q.integrate(|x| m.pdf(x).unwrap() * (w * x).cos(), &pts).value;
    let im = q.integrate(|x| m.pdf(x).unwrap() * (w * x).sin(), &pts).value;
    Complex::new(re, im)
}

fn battery() -> Vec<Measure<f64>> {
    vec![
        Measure::gaussian(0.3, 1.2).unwrap(),
        Measure::cauchy(0.0, 1.0).unwrap(),
        Measure::uniform(-1.0, 2.0).unwrap(),
        Measure::Analytic(Analytic1D::cauchy_power(2).unwrap()),
        Measure::Analytic(Analytic1D::sinusoid_perturbed(Analytic1D::uniform(-1.0, 1.0).unwrap(), 0.5, 2.0).unwrap()),
        Measure::Analytic(
            Analytic1D::sinusoid_perturbed(Analytic1D::gaussian(0.0, 2f64.sqrt()).unwrap(), 0.5, 7.5).unwrap(),
        ),
        Measure::discrete_1d(&[(0.0, 0.5), (2.0, 0.25), (-1.5, 0.25)]).unwrap(),
    ]
}

#[test]
fn char_function_at_zero_is_one() {
    for m in battery() {
        let v = m.char_function(&[0.0]);
        assert_abs_diff_eq!(v.re, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(v.im, 0.0, epsilon = 1e-12);
    }
}

#[test]
fn char_function_matches_quadrature() {
    for m in battery().into_iter().filter(|m| m.has_density_1d()) {
        for &w in &[0.3, 1.0, 2.5, 6.0] {
            let got = m.char_function(&[w]);
            let want = quad_char(&m, w);
            assert!((got - want).norm() < 1e-6, "{m} at {w}: {got} vs {want}");
        }
    }
    let c = Measure::cauchy(0.0, 1.0).unwrap();
    for &w in &[-2.0f64, 0.5, 3.0] {
        assert_abs_diff_eq!(c.char_function(&[w]).re, (-w.abs()).exp(), epsilon = 1e-15);
    }
    let beta = 1.7f64;
    let u = Measure::uniform(-beta, beta).unwrap();
    for &w in &[0.2, 1.0, 4.0] {
        assert_abs_diff_eq!(u.char_function(&[w]).re, (beta * w).sin() / (beta * w), epsilon = 1e-14);
    }
}

#[test]
fn perturbed_char_function_relation() {
    let q = Analytic1D::gaussian(0.0, 1.0).unwrap();
    let (alpha, nu) = (0.4, 1.5);
    let p = Analytic1D::sinusoid_perturbed(q.clone(), alpha, nu).unwrap();
    let i = Complex::new(0.0, 1.0);
    for &w in &[0.0, 0.7, 3.0, -2.2] {
        let rel = q.char_fn(w) + i * (alpha / 2.0) * (q.char_fn(w - nu * PI) - q.char_fn(w + nu * PI));
        assert!((p.char_fn(w) - rel).norm() < 1e-14);
        assert!((p.char_fn(w) - quad_char(&Measure::Analytic(p.clone()), w)).norm() < 1e-9);
    }
}

#[test]
fn cauchy_power_normalizer() {
    for l in 1..5u32 {
        let Analytic1D::CauchyPower { c_l, .. } = Analytic1D::<f64>::cauchy_power(l).unwrap() else {
            panic!()
        };
        let want = libm::tgamma(l as f64) / (PI.sqrt() * libm::tgamma(l as f64 - 0.5));
        assert_abs_diff_eq!(c_l, want, epsilon = 1e-12);
    }
    let c1 = Measure::Analytic(Analytic1D::cauchy_power(1).unwrap());
    assert_abs_diff_eq!(c1.char_function(&[1.3]).re, (-1.3f64).exp(), epsilon = 1e-12);
}

#[test]
fn cdf_examples() {
    assert_eq!(Measure::uniform(0.0, 1.0).unwrap().cdf(0.25).unwrap(), 0.25);
    let d = Measure::discrete_1d(&[(0.0, 0.5), (2.0, 0.5)]).unwrap();
    assert_eq!(d.cdf(1.0).unwrap(), 0.5);
    assert_eq!(d.cdf(2.0).unwrap(), 1.0);
    assert_eq!(Measure::cauchy(0.0, 1.0).unwrap().cdf(0.0).unwrap(), 0.5);
    for m in battery() {
        let mut prev = 0.0;
        for j in 0..80 {
            let x = -8.0 + 0.2 * j as f64;
            let c = m.cdf(x).unwrap();
            assert!(c >= prev - 1e-12 && (0.0..=1.0).contains(&c), "{m}");
            prev = c;
        }
        if m.has_density_1d() {
            let q = Quad {
                abs_tol: 1e-12,
                ..Quad::default()
            };
            let mut pts = m.breakpoints();
            pts.retain(|p| *p < 0.8);
            pts.push(f64::NEG_INFINITY);
            pts.push(0.8);
            let want = q.integrate(|x| m.pdf(x).unwrap(), &pts).value;
            assert_abs_diff_eq!(m.cdf(0.8).unwrap(), want, epsilon = 1e-9);
        }
    }
}

#[test]
fn validation() {
    for m in battery() {
        m.validate().unwrap();
    }
    let bad = Discrete {
        atoms: vec![(vec![0.0], 0.5), (vec![1.0], 0.501)],
    };
    assert!(bad.validate().unwrap_err().is_validation());
    let dup = Discrete {
        atoms: vec![(vec![0.0], 0.5), (vec![0.0], 0.5)],
    };
    assert!(dup.validate().is_err());
    assert!(Analytic1D::sinusoid_perturbed(Analytic1D::uniform(-1.0, 2.0).unwrap(), 0.5, 2.0).is_err());
    assert!(Analytic1D::sinusoid_perturbed(Analytic1D::uniform(-1.0, 1.0).unwrap(), 1.5, 2.0).is_err());
    let g = GridDensity1D::from_analytic(&Analytic1D::gaussian(0.0, 1.0).unwrap(), 4096).unwrap();
    g.validate().unwrap();
    let mut vals = g.values.clone();
    vals[2000] += 1e-3 / g.dx;
    assert!(GridDensity1D::new(g.x0, g.dx, vals).is_err());
}

#[test]
fn perturbed_mass_is_one() {
    let base = Analytic1D::gaussian(0.0, 2f64.sqrt()).unwrap();
    let p = Analytic1D::sinusoid_perturbed(base, 0.5, 7.5).unwrap();
    let n = 1 << 15;
    let (lo, hi) = (-40.0, 40.0);
    let h = (hi - lo) / (n - 1) as f64;
    let trap: f64 = (0..n)
        .map(|j| p.pdf(lo + h * j as f64) * if j == 0 || j == n - 1 { 0.5 } else { 1.0 })
        .sum::<f64>()
        * h;
    assert!((trap - 1.0).abs() < 1e-6);
}

#[test]
fn grid_density_matches_source() {
    let a = Analytic1D::gaussian(0.5, 0.8).unwrap();
    let g = GridDensity1D::from_analytic(&a, 4096).unwrap();
    let m = Measure::Grid(g.clone());
    for &w in &[0.0, 0.4, 2.0, 5.0] {
        assert!((m.char_function(&[w]) - a.char_fn(w)).norm() < 1e-5);
    }
    for &x in &[-1.0, 0.5, 2.0] {
        assert_abs_diff_eq!(g.cdf(x), a.cdf(x), epsilon = 1e-5);
        assert_abs_diff_eq!(g.pdf(x), a.pdf(x), epsilon = 1e-5);
    }
}

#[test]
fn torus_coefficients() {
    let u: Measure<f64> = Measure::Torus(TorusDensity::Uniform { dim: 1 });
    assert_abs_diff_eq!(u.torus_fourier_coeff(&[0]).unwrap().re, 1.0 / TAU, epsilon = 1e-15);
    assert_eq!(u.torus_fourier_coeff(&[2]).unwrap().norm(), 0.0);
    let u2: Measure<f64> = Measure::Torus(TorusDensity::Uniform { dim: 2 });
    assert_abs_diff_eq!(
        u2.torus_fourier_coeff(&[0, 0]).unwrap().re,
        1.0 / (TAU * TAU),
        epsilon = 1e-15
    );

    let alpha = 1.0 / (4.0 * TAU);
    let flat = TorusDensity::FlatSinusoid {
        dim: 1,
        n0: vec![3],
        alpha,
    };
    let closure = TorusDensity::Closure {
        dim: 1,
        density: Arc::new(move |x: &[f64]| 1.0 / TAU - 2.0 * alpha * (3.0 * x[0]).sin()),
        sup: 2.0 / TAU,
    };
    closure.validate().unwrap();
    flat.validate().unwrap();
    for n in -5..=5i64 {
        let a = flat.fourier_coeff(&[n]);
        let b = closure.fourier_coeff(&[n]);
        assert!((a - b).norm() < 1e-12, "n={n}: {a} vs {b}");
    }
    let diff = flat.fourier_coeff(&[3]) - TorusDensity::<f64>::Uniform { dim: 1 }.fourier_coeff(&[3]);
    assert_abs_diff_eq!(diff.norm(), alpha, epsilon = 1e-15);
    let over = TorusDensity::FlatSinusoid {
        dim: 1,
        n0: vec![3],
        alpha: 1.01 / (2.0 * TAU),
    };
    assert!(over.validate().is_err());
    let edge = TorusDensity::FlatSinusoid {
        dim: 1,
        n0: vec![3],
        alpha: 1.0 / (2.0 * TAU),
    };
    edge.validate().unwrap();
    assert!(Measure::gaussian(0.0, 1.0).unwrap().torus_fourier_coeff(&[1]).is_err());
}

#[test]
fn sampling_examples() {
    let d = Measure::dirac(0.0f64);
    assert_eq!(d.sample(5, 1).unwrap().values_1d(), vec![0.0; 5]);
    let u = Measure::uniform(-1.0f64, 1.0).unwrap();
    let s = u.sample(10_000, 42).unwrap();
    let mean: f64 = s.values_1d().iter().sum::<f64>() / 1e4;
    assert!(mean.abs() < 4.0 / (3.0f64 * 1e4).sqrt());
    assert_eq!(u.sample(100, 7).unwrap(), u.sample(100, 7).unwrap());
    assert_ne!(u.sample_stream(100, 7, 1).unwrap(), u.sample_stream(100, 7, 2).unwrap());
    assert!(u.sample(0, 1).is_err());
}

fn ks(m: &Measure<f64>, seed: u64) -> f64 {
    let mut xs = m.sample(10_000, seed).unwrap().values_1d();
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = xs.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in xs.iter().enumerate() {
        let f = m.cdf(x).unwrap();
        d = d.max((f - i as f64 / n).abs()).max(((i + 1) as f64 / n - f).abs());
    }
    d
}

#[test]
fn kolmogorov_smirnov_smoke() {
    let mut ms = battery();
    ms.push(Measure::Grid(
        GridDensity1D::from_analytic(&Analytic1D::cauchy(0.0, 1.0).unwrap(), 4096).unwrap(),
    ));
    for (i, m) in ms.iter().enumerate() {
        if !m.has_density_1d() {
            continue;
        }
        let d = ks(m, 100 + i as u64);
        assert!(d < 2.0 / 100.0, "{m}: KS {d}");
    }
}

#[test]
fn torus_sampling_means() {
    let alpha = 1.0 / (4.0 * TAU);
    let t: Measure<f64> = Measure::Torus(TorusDensity::FlatSinusoid {
        dim: 1,
        n0: vec![1],
        alpha,
    });
    let s = t.sample(20_000, 3).unwrap();
    // E[sin x] = −2α π
    let m: f64 = s.values_1d().iter().map(|x| x.sin()).sum::<f64>() / 20_000.0;
    assert!((m + 2.0 * alpha * PI).abs() < 0.02, "{m}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn conjugate_symmetry(idx in 0usize..7, w in -10.0f64..10.0) {
        let m = &battery()[idx];
        let a = m.char_function(&[w]);
        let b = m.char_function(&[-w]).conj();
        prop_assert!((a - b).norm() < 1e-10);
    }
}
