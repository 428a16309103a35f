use super::*;
use crate::quadrature::Quad;
use approx::assert_abs_diff_eq;
use proptest::prelude::*;

#[test]
fn eval_examples() {
    let g = KernelSpec::gaussian(1.0f64);
    assert_eq!(g.eval(&[0.3], &[0.3]).unwrap(), 1.0);
    assert_abs_diff_eq!(
        KernelSpec::<f64>::bspline(0).eval(&[0.5], &[0.0]).unwrap(),
        0.5,
        epsilon = 1e-15
    );
    assert_eq!(KernelSpec::trivial(2.0f64).eval(&[-3.0], &[7.0]).unwrap(), 2.0);
    assert!(g.eval(&[0.0, 1.0], &[0.0]).is_err());
    assert_eq!(KernelSpec::sinc(2.5f64).k1(1.0, 1.0), 2.5);
}

#[test]
fn bspline_orders() {
    // B_1(x) = 1 − |x| on [−1, 1]
    for i in 0..40 {
        let x = -1.2 + 0.06 * i as f64;
        let want = (1.0 - x.abs()).max(0.0);
        assert_abs_diff_eq!(cardinal_bspline::<f64>(2, x), want, epsilon = 1e-14);
    }
    // B_3 (cubic, four boxes): 2/3 − x² + |x|³/2 on |x| ≤ 1
    for i in 0..20 {
        let x = 0.05 * i as f64;
        let want = 2.0 / 3.0 - x * x + x.powi(3) / 2.0;
        assert_abs_diff_eq!(cardinal_bspline::<f64>(4, x), want, epsilon = 1e-13);
    }
    let area = Quad::default().integrate(
        |x| cardinal_bspline::<f64>(6, x),
        &[-3.0, -2.0, -1.0, 0.0, 1.0, 2.0, 3.0],
    );
    assert_abs_diff_eq!(area.value, 1.0, epsilon = 1e-12);
}

#[test]
fn matern_half_is_exponential() {
    let m = KernelSpec::matern(0.5f64, 2.0);
    let m_generic = KernelSpec::matern(0.5f64 + 1e-12, 2.0);
    for &r in &[0.0, 0.3, 1.0, 4.0] {
        assert_abs_diff_eq!(m.k1(r, 0.0), (-r / 2.0).exp(), epsilon = 1e-14);
        assert_abs_diff_eq!(m_generic.k1(r, 0.0), (-r / 2.0).exp(), epsilon = 1e-9);
    }
    // ν = 3/2: (1 + √3 r/σ) e^{−√3 r/σ}
    let m32 = KernelSpec::matern(1.5f64, 1.0);
    for &r in &[0.1, 0.7, 2.0] {
        let u = 3f64.sqrt() * r;
        assert_abs_diff_eq!(m32.k1(r, 0.0), (1.0 + u) * (-u).exp(), epsilon = 1e-12);
    }
}

#[test]
fn hilbertian_distance_examples() {
    let g = KernelSpec::gaussian(1.0f64);
    let want = (2.0 - 2.0 * (-0.5f64).exp()).sqrt();
    assert_abs_diff_eq!(g.hilbertian_distance(&[0.0], &[1.0]).unwrap(), want, epsilon = 1e-15);
    let gram = g.gram(&[vec![0.0], vec![1.0]]).unwrap();
    assert_abs_diff_eq!(
        (gram[0][0] + gram[1][1] - 2.0 * gram[0][1]).sqrt(),
        want,
        epsilon = 1e-15
    );
    assert_eq!(
        KernelSpec::trivial(3.0f64).hilbertian_distance(&[1.0], &[5.0]).unwrap(),
        0.0
    );
    assert_eq!(g.hilbertian_distance(&[0.4], &[0.4]).unwrap(), 0.0);
}

#[test]
fn kernel_from_metric_examples() {
    let probes: Vec<Vec<f64>> = (0..11).map(|i| vec![i as f64 / 10.0]).collect();
    let abs: MetricFn<f64> = Arc::new(|x: &[f64], y: &[f64]| (x[0] - y[0]).abs());
    let k = kernel_from_metric(abs, vec![0.0], &probes).unwrap();
    for x in &probes {
        for y in &probes {
            assert_abs_diff_eq!(k.k(x, y), x[0] * y[0], epsilon = 1e-15);
        }
    }
    let rho = hilbertian_metric(KernelSpec::gaussian(1.0f64));
    let k = kernel_from_metric(rho.clone(), vec![0.0], &probes).unwrap();
    for x in &probes {
        for y in &probes {
            assert_abs_diff_eq!(k.hilbertian_distance(x, y).unwrap(), rho(x, y), epsilon = 1e-10);
        }
    }
    let zero: MetricFn<f64> = Arc::new(|_: &[f64], _: &[f64]| 0.0);
    let k = kernel_from_metric(zero, vec![0.0], &probes).unwrap();
    assert_eq!(k.k(&[0.3], &[0.9]), 0.0);
    // the discrete metric squared is not Hilbertian-embeddable when squared distances violate the
    // parallelogram structure: ρ² = |x−y|⁴ fails
    let bad: MetricFn<f64> = Arc::new(|x: &[f64], y: &[f64]| (x[0] - y[0]).powi(2));
    let err = kernel_from_metric(bad, vec![0.0], &probes).unwrap_err();
    assert!(err.is_validation());
}

fn inverse_ft(k: &KernelSpec<f64>, x: f64) -> f64 {
    let s = k.spectrum().unwrap();
    let SpectrumKind::ContinuousDensity(d) = s.kind else {
        panic!("continuous")
    };
    let mut pts: Vec<f64> = (-40..=40).map(|j| j as f64 * std::f64::consts::TAU).collect();
    pts.extend(d.breakpoints.iter().copied());
    pts.push(f64::NEG_INFINITY);
    pts.push(f64::INFINITY);
    let q = Quad {
        abs_tol: 1e-11,
        max_panels: 20_000,
        ..Quad::default()
    };
    q.integrate(|w| d.lambda(&[w]) * (w * x).cos(), &pts).value
}

#[test]
fn spectral_consistency() {
    let kernels = [
        KernelSpec::gaussian(0.7f64),
        KernelSpec::laplacian(1.3f64),
        KernelSpec::bspline(0),
    ];
    for k in &kernels {
        for i in 0..9 {
            let x = -1.6 + 0.4 * i as f64;
            let want = k.k1(x, 0.0);
            let got = inverse_ft(k, x);
            assert!(
                (got - want).abs() <= 1e-4 * want.abs().max(1e-2),
                "{k}: x={x} inverse transform {got} vs {want}"
            );
        }
    }
}

#[test]
fn matern_and_imq_spectra_integrate_to_psi0() {
    for k in [
        KernelSpec::matern(0.5f64, 1.5),
        KernelSpec::matern(2.5f64, 0.8),
        KernelSpec::inverse_multiquadric(1.0f64, 1.0),
    ] {
        let s = k.spectrum().unwrap();
        let SpectrumKind::ContinuousDensity(d) = s.kind else {
            panic!()
        };
        let q = Quad {
            abs_tol: 1e-10,
            max_panels: 20_000,
            ..Quad::default()
        };
        let mass = q
            .integrate(|w| d.lambda(&[w]), &[f64::NEG_INFINITY, 0.0, f64::INFINITY])
            .value;
        assert!((mass - 1.0).abs() < 1e-6, "{k}: mass {mass}");
        let x = 0.9;
        let back = inverse_ft(&k, x);
        assert!((back - k.k1(x, 0.0)).abs() < 1e-5, "{k}: {back} vs {}", k.k1(x, 0.0));
    }
    // ν = 1/2 against the Laplacian with σ' = 1/σ
    let m = KernelSpec::matern(0.5f64, 2.0).spectrum().unwrap();
    let l = KernelSpec::laplacian(0.5f64).spectrum().unwrap();
    let (SpectrumKind::ContinuousDensity(a), SpectrumKind::ContinuousDensity(b)) = (m.kind, l.kind) else {
        panic!()
    };
    for &w in &[0.0, 0.3, 2.0, 7.0] {
        assert_abs_diff_eq!(a.eval(&[w]), b.eval(&[w]), epsilon = 1e-13);
    }
}

#[test]
fn spectrum_examples() {
    let l = KernelSpec::laplacian(2.0f64).spectrum().unwrap();
    assert_eq!(l.support, Support::AllOfSpace);
    let SpectrumKind::ContinuousDensity(d) = l.kind else {
        panic!()
    };
    assert_abs_diff_eq!(
        d.eval(&[1.0]),
        (2.0 / std::f64::consts::PI).sqrt() * 2.0 / 5.0,
        epsilon = 1e-15
    );

    let s = KernelSpec::sinc(1.5f64).spectrum().unwrap();
    assert_eq!(s.support, Support::CompactSet(vec![vec![(-1.5, 1.5)]]));
    let SpectrumKind::ContinuousDensity(d) = s.kind else {
        panic!()
    };
    assert_abs_diff_eq!(d.eval(&[1.0]), (std::f64::consts::PI / 2.0).sqrt(), epsilon = 1e-15);
    assert_eq!(d.eval(&[1.6]), 0.0);

    let c = KernelSpec::cosine(2.0f64).unwrap().spectrum().unwrap();
    let SpectrumKind::Lattice(lat) = &c.kind else { panic!() };
    let mut locs: Vec<f64> = lat.atoms.iter().map(|a| a.0[0]).collect();
    locs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    assert_abs_diff_eq!(locs[0], -2.0, epsilon = 1e-14);
    assert_abs_diff_eq!(locs[1], 2.0, epsilon = 1e-14);
    for a in &lat.atoms {
        assert_abs_diff_eq!(a.1, (std::f64::consts::PI / 2.0).sqrt(), epsilon = 1e-14);
    }
    assert!(matches!(c.support, Support::LatticeSet { .. }));
    assert!(KernelSpec::<f64>::dot_product().spectrum().is_err());
}

#[test]
fn lattice_weights_reproduce_psi() {
    let k = KernelSpec::poisson(0.4f64).unwrap();
    let s = k.spectrum().unwrap();
    let comps = s.components();
    let LambdaComponent::Atoms { atoms, tail } = &comps[0] else {
        panic!()
    };
    assert!(*tail < 1e-15);
    for &x in &[0.0, 0.5, 2.0] {
        let v: f64 = atoms.iter().map(|(w, a)| a * (w[0] * x).cos()).sum();
        assert_abs_diff_eq!(v, k.k1(x, 0.0), epsilon = 1e-12);
    }
}

#[test]
fn classification_table() {
    use Verdict::*;
    let cases: Vec<(KernelSpec<f64>, Verdict)> = vec![
        (KernelSpec::gaussian(1.0), Characteristic),
        (KernelSpec::laplacian(1.0), Characteristic),
        (KernelSpec::matern(1.5, 1.0), Characteristic),
        (KernelSpec::inverse_multiquadric(1.0, 0.5), Characteristic),
        (KernelSpec::bspline(1), Characteristic),
        (KernelSpec::sinc(1.0), CharacteristicToP1),
        (KernelSpec::poisson(0.5).unwrap(), NotCharacteristic),
        (KernelSpec::dirichlet(2, 2.0).unwrap(), NotCharacteristic),
        (KernelSpec::cosine(1.0).unwrap(), NotCharacteristic),
        (KernelSpec::trivial(1.0), NotCharacteristic),
        (KernelSpec::dot_product(), NotCharacteristic),
        (KernelSpec::poly2(), NotCharacteristic),
        (KernelSpec::exp_dot(1.0, Some(1.0)), CharacteristicToP1),
        (KernelSpec::exp_dot(1.0, None), Unknown),
        (
            KernelSpec::torus(TorusKernelSpec::poisson(0.5).unwrap()),
            Characteristic,
        ),
        (KernelSpec::torus(TorusKernelSpec::dirichlet(3)), NotCharacteristic),
        (KernelSpec::torus(TorusKernelSpec::fejer(3)), NotCharacteristic),
        (
            KernelSpec::sum(KernelSpec::gaussian(1.0), KernelSpec::cosine(2.0).unwrap()).unwrap(),
            Characteristic,
        ),
        (
            KernelSpec::product(KernelSpec::gaussian(1.0), KernelSpec::cosine(2.0).unwrap()).unwrap(),
            Characteristic,
        ),
        (
            KernelSpec::product(KernelSpec::sinc(1.0), KernelSpec::cosine(3.0).unwrap()).unwrap(),
            CharacteristicToP1,
        ),
        (
            KernelSpec::sum(KernelSpec::cosine(1.0).unwrap(), KernelSpec::cosine(2.0).unwrap()).unwrap(),
            NotCharacteristic,
        ),
    ];
    for (k, want) in cases {
        let c = k.classify();
        assert_eq!(c.verdict, want, "{k}: {}", c.reason);
        assert!(!c.reason.is_empty());
    }
}

#[test]
fn bounds() {
    assert_eq!(KernelSpec::gaussian(0.3f64).bound(), Some(1.0));
    assert_eq!(KernelSpec::sinc(2.0f64).bound(), Some(2.0));
    assert_abs_diff_eq!(
        KernelSpec::dirichlet(2, 1.0f64).unwrap().bound().unwrap(),
        5.0,
        epsilon = 1e-14
    );
    assert_eq!(KernelSpec::<f64>::dot_product().bound(), None);
    assert!(KernelSpec::exp_dot(1.0f64, Some(2.0)).eval(&[3.0], &[0.0]).is_err());
}

#[test]
fn generic_over_f32() {
    let g = KernelSpec::gaussian(1.0f32);
    assert!((g.k1(0.0, 1.0) - (-0.5f32).exp()).abs() < 1e-6);
    assert_eq!(g.classify().verdict, Verdict::Characteristic);
}

fn family(idx: usize) -> KernelSpec<f64> {
    match idx {
        0 => KernelSpec::gaussian(0.8),
        1 => KernelSpec::laplacian(1.2),
        2 => KernelSpec::matern(1.5, 1.0),
        3 => KernelSpec::inverse_multiquadric(1.0, 0.5),
        4 => KernelSpec::bspline(0),
        5 => KernelSpec::bspline(1),
        6 => KernelSpec::sinc(1.0),
        7 => KernelSpec::poisson(0.5).unwrap(),
        8 => KernelSpec::dirichlet(2, 3.0).unwrap(),
        9 => KernelSpec::fejer(3, 2.0).unwrap(),
        10 => KernelSpec::cosine(1.5).unwrap(),
        11 => KernelSpec::poly2(),
        12 => KernelSpec::sum(KernelSpec::gaussian(1.0), KernelSpec::cosine(2.0).unwrap()).unwrap(),
        13 => KernelSpec::product(KernelSpec::laplacian(1.0), KernelSpec::poisson(0.3).unwrap()).unwrap(),
        _ => KernelSpec::exp_dot(0.5, Some(3.0)),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn gram_is_psd(idx in 0usize..15, pts in prop::collection::vec(-3.0f64..3.0, 1..20)) {
        let k = family(idx);
        let pts: Vec<Vec<f64>> = pts.into_iter().map(|x| vec![x]).collect();
        let g = k.gram(&pts).unwrap();
        for i in 0..g.len() {
            for j in 0..g.len() {
                prop_assert_eq!(g[i][j], k.k(&pts[j], &pts[i]));
            }
        }
        let (min_eig, tr) = min_eigen_and_trace(&g);
        prop_assert!(min_eig >= -1e-8 * tr.abs(), "{} min eig {} trace {}", k, min_eig, tr);
    }

    #[test]
    fn bounded_families_respect_bound(idx in 0usize..15, x in -3.0f64..3.0) {
        let k = family(idx);
        if let Some(c) = k.bound() {
            prop_assert!(k.k1(x, x) <= c * (1.0 + 1e-12));
        }
    }

    #[test]
    fn scaling_keeps_verdict(idx in 0usize..15, c in 0.01f64..100.0) {
        let k = family(idx);
        let v = k.classify().verdict;
        prop_assert_eq!(k.scaled(c).unwrap().classify().verdict, v);
    }

    #[test]
    fn sum_with_characteristic_is_characteristic(idx in 0usize..15) {
        let s = KernelSpec::sum(KernelSpec::gaussian(1.0), family(idx)).unwrap();
        prop_assert_eq!(s.classify().verdict, Verdict::Characteristic);
    }

    #[test]
    fn product_with_characteristic_is_characteristic(idx in 0usize..11) {
        let p = KernelSpec::product(KernelSpec::gaussian(1.0), family(idx)).unwrap();
        prop_assert_eq!(p.classify().verdict, Verdict::Characteristic);
    }

    #[test]
    fn hilbertian_metric_axioms(idx in 0usize..11, x in -3.0f64..3.0, y in -3.0f64..3.0, z in -3.0f64..3.0) {
        let k = family(idx);
        let dxy = k.hilbertian_distance(&[x], &[y]).unwrap();
        prop_assert!((dxy - k.hilbertian_distance(&[y], &[x]).unwrap()).abs() < 1e-10);
        let dxz = k.hilbertian_distance(&[x], &[z]).unwrap();
        let dzy = k.hilbertian_distance(&[z], &[y]).unwrap();
        prop_assert!(dxy <= dxz + dzy + 1e-10);
    }

    #[test]
    fn continuous_spectra_nonnegative(idx in 0usize..7, w in -50.0f64..50.0) {
        if let SpectrumKind::ContinuousDensity(d) = family(idx).spectrum().unwrap().kind {
            prop_assert!(d.eval(&[w]) >= 0.0);
        }
    }
}
