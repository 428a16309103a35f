use super::*;
use crate::kernels::{min_eigen_and_trace, TorusKernelSpec};
use crate::measures::{GridDensity1D, TorusDensity};
use proptest::prelude::*;
use std::f64::consts::{FRAC_1_SQRT_2, PI, TAU};

fn unit_gauss() -> KernelSpec<f64> {
    // exp(−(x−y)²)
    KernelSpec::gaussian(FRAC_1_SQRT_2)
}

fn d1(atoms: &[(f64, f64)]) -> Discrete<f64> {
    Discrete::from_1d(atoms).unwrap()
}

fn perturbed_uniform(alpha: f64, nu: f64) -> Measure<f64> {
    let base = Analytic1D::uniform(-1.0, 1.0).unwrap();
    Measure::Analytic(Analytic1D::sinusoid_perturbed(base, alpha, nu).unwrap())
}

#[test]
fn discrete_examples() {
    let k = unit_gauss();
    let z = Discrete::dirac(vec![0.0]);
    assert_eq!(gamma_sq_discrete(&k, &z, &z).gamma_sq, 0.0);
    let r = gamma_sq_discrete(&k, &z, &Discrete::dirac(vec![1.0]));
    assert!((r.gamma_sq - (2.0 - 2.0 * (-1.0f64).exp())).abs() < 1e-15);
    assert!((r.gamma_sq - 1.2642411).abs() < 1e-7);
    assert_eq!(r.path, Path::DiscreteExact);
    assert_eq!(r.err_estimate, 0.0);
    let p = d1(&[(0.0, 0.5), (2.0, 0.5)]);
    let r = gamma_sq_discrete(&KernelSpec::dot_product(), &p, &Discrete::dirac(vec![1.0]));
    assert!(r.gamma_sq.abs() < 1e-15);
}

#[test]
fn weak_sequence_examples() {
    let k = unit_gauss();
    let v = gamma_sq_weak_sequence(&k, 2).unwrap();
    assert!((v - (2.0 - 2.0 * (-4.0f64).exp()) / 4.0).abs() < 1e-16);
    let mut last = f64::INFINITY;
    for n in 1..=30 {
        let v = gamma_sq_weak_sequence(&k, n).unwrap();
        let (pn, p) = weak_sequence_pair::<f64>(n).unwrap();
        let g = gamma_sq_discrete(&k, &pn, &p).gamma_sq;
        assert!(
            (v - g).abs() <= 16.0 * f64::EPSILON * v.max(1e-300),
            "n={n}: {v} vs {g}"
        );
        assert!(v < last);
        last = v;
        assert_eq!(gamma_sq_weak_sequence(&KernelSpec::trivial(3.0), n).unwrap(), 0.0);
    }
    assert!(gamma_sq_weak_sequence(&k, 0).is_err());
}

#[test]
fn closed_gaussian_matches_quadrature() {
    assert!(closed_gaussian_self_test() < 1e-8);
    let k = KernelSpec::gaussian(1.0);
    let p = Measure::gaussian(0.0, 1.0).unwrap();
    let q = Measure::gaussian(1.0, 1.0).unwrap();
    let c = gamma_sq_closed_gaussian::<f64>(1.0, 0.0, 1.0, 1.0, 1.0).unwrap();
    let d = gamma_sq_density(&k, &p, &q).unwrap();
    assert_eq!(c.path, Path::ClosedForm);
    assert_eq!(d.path, Path::DensityQuadrature);
    assert!((c.gamma_sq - d.gamma_sq).abs() < 1e-8, "{c} vs {d}");
    assert_eq!(gamma_sq(&k, &p, &q).unwrap().path, Path::ClosedForm);
    assert_eq!(
        gamma_sq_closed_gaussian::<f64>(1.0, 0.3, 0.5, 0.3, 0.5)
            .unwrap()
            .gamma_sq,
        0.0
    );
    let lim = gamma_sq_closed_gaussian::<f64>(1.0, 0.0, 1e-6, 1.0, 1e-6)
        .unwrap()
        .gamma_sq;
    let disc = gamma_sq_discrete(&k, &Discrete::dirac(vec![0.0]), &Discrete::dirac(vec![1.0])).gamma_sq;
    assert!((lim - disc).abs() < 1e-10);
}

#[test]
fn density_path_same_grid_is_zero() {
    let a = Analytic1D::gaussian(0.0, 1.0).unwrap();
    let g = Measure::Grid(GridDensity1D::from_analytic(&a, 257).unwrap());
    let r = gamma_sq_density(&KernelSpec::<f64>::laplacian(1.0), &g, &g).unwrap();
    assert!(r.gamma_sq.abs() < 1e-10);
    assert!(gamma_sq_density(&unit_gauss(), &Measure::dirac(0.0), &g).is_err());
}

#[test]
fn grid_density_tracks_analytic() {
    let k = KernelSpec::gaussian(1.0);
    let a = Analytic1D::gaussian(0.0, 1.0).unwrap();
    let b = Analytic1D::gaussian(1.0, 1.0).unwrap();
    let ga = Measure::Grid(GridDensity1D::from_analytic(&a, 513).unwrap());
    let gb = Measure::Grid(GridDensity1D::from_analytic(&b, 513).unwrap());
    let r = gamma_sq_density(&k, &ga, &gb).unwrap();
    let c = gamma_sq_closed_gaussian::<f64>(1.0, 0.0, 1.0, 1.0, 1.0)
        .unwrap()
        .gamma_sq;
    assert!((r.gamma_sq - c).abs() < 1e-6 + 3.0 * r.err_estimate, "{r} vs {c}");
}

#[test]
fn bspline_density_vs_spectral() {
    let k = KernelSpec::bspline(0);
    let p = perturbed_uniform(0.5, 2.0);
    let q = Measure::uniform(-1.0, 1.0).unwrap();
    let d = gamma_sq_density(&k, &p, &q).unwrap();
    let s = gamma_sq_spectral(&k, &p, &q).unwrap();
    assert!(d.gamma_sq > 1e-6);
    assert!(
        (d.gamma_sq - s.gamma_sq).abs() < 1e-4 * d.gamma_sq.max(1e-3),
        "{d} vs {s}"
    );
}

#[test]
fn path_consistency_battery() {
    let kernels = [
        KernelSpec::gaussian(0.8),
        KernelSpec::laplacian(1.2),
        KernelSpec::matern(0.5, 1.0),
    ];
    let pairs = [
        (Measure::gaussian(0.0, 1.0).unwrap(), Measure::cauchy(0.5, 1.0).unwrap()),
        (Measure::uniform(-1.0, 1.0).unwrap(), perturbed_uniform(0.7, 1.5)),
        (
            Measure::gaussian(0.0, 1.0).unwrap(),
            Measure::discrete_1d(&[(-0.5, 0.5), (1.0, 0.5)]).unwrap(),
        ),
    ];
    for k in &kernels {
        for (p, q) in &pairs {
            let a = gamma_sq(k, p, q).unwrap();
            let b = gamma_sq_spectral(k, p, q).unwrap();
            let tol = (1e-4 * a.gamma_sq.abs()).max(a.err_estimate + b.err_estimate);
            assert!((a.gamma_sq - b.gamma_sq).abs() <= tol, "{k} {p} {q}: {a} vs {b}");
        }
    }
}

#[test]
fn cosine_two_atom_sum() {
    let k = KernelSpec::cosine(1.0).unwrap();
    let p = Measure::dirac(0.0);
    let r = gamma_sq_spectral(&k, &p, &Measure::dirac(1.0)).unwrap();
    assert!((r.gamma_sq - (2.0 - 2.0 * 1f64.cos())).abs() < 1e-12);
    let r = gamma_sq_spectral(&k, &p, &Measure::dirac(TAU)).unwrap();
    assert!(r.gamma_sq.abs() < 1e-12);
    let q = Measure::uniform(-PI, PI).unwrap();
    let u = Measure::discrete_1d(&[(-PI / 2.0, 0.5), (PI / 2.0, 0.5)]).unwrap();
    // both characteristic functions vanish at ±1
    assert!(gamma_sq_spectral(&k, &q, &u).unwrap().gamma_sq < 1e-12);
}

#[test]
fn torus_series_examples() {
    let alpha = 0.02;
    let flat = Measure::Torus(TorusDensity::FlatSinusoid {
        dim: 1,
        n0: vec![3],
        alpha,
    });
    let unif = Measure::Torus(TorusDensity::Uniform { dim: 1 });
    let dir = TorusKernelSpec::<f64>::dirichlet(2);
    let r = gamma_sq_torus(&dir, &flat, &unif, 8).unwrap();
    assert_eq!(r.path, Path::TorusSeries);
    assert!(r.gamma_sq.abs() < 1e-18);
    assert_eq!(gamma_sq_torus(&dir, &unif, &unif, 4).unwrap().gamma_sq, 0.0);
    let poi = TorusKernelSpec::poisson(0.5).unwrap();
    let r = gamma_sq_torus(&poi, &flat, &unif, 40).unwrap();
    let want = 2.0 * TAU * TAU * poi.coeff_1d(3) * alpha * alpha;
    assert!((r.gamma_sq - want).abs() < 1e-14, "{r} vs {want}");
    assert!(r.err_estimate < 1e-10);
    let via = gamma_sq(&KernelSpec::torus(poi), &flat, &unif).unwrap();
    assert!((via.gamma_sq - want).abs() < 1e-14);
    assert!(gamma_sq_torus(&dir, &Measure::dirac(0.0), &unif, 4).is_err());
}

#[test]
fn u_statistic_examples() {
    let k = unit_gauss();
    let s = |v: &[f64]| Sample {
        points: v.iter().map(|x| vec![*x]).collect(),
        seed: 0,
        source: String::new(),
    };
    let x = s(&[0.0, 1.0]);
    let y = s(&[2.0, 3.0]);
    let e = |t: f64| (-t).exp();
    let h = e(1.0) + e(1.0) - e(9.0) - e(1.0);
    let r = mmd_u_statistic(&k, &x, &y).unwrap();
    assert!((r.gamma_sq - h).abs() < 1e-15);
    assert_eq!(r.path, Path::UStatistic);
    assert_eq!(mmd_u_statistic(&k, &x, &x).unwrap().gamma_sq, 0.0);
    assert!(mmd_u_statistic(&k, &s(&[0.0]), &s(&[1.0])).is_err());
    assert!(mmd_u_statistic(&k, &x, &s(&[1.0, 2.0, 3.0])).is_err());
    let v = mmd_v_statistic(&k, &s(&[0.0]), &s(&[1.0])).unwrap();
    assert!((v.gamma_sq - (2.0 - 2.0 * e(1.0))).abs() < 1e-15);
    assert_eq!(mmd_v_statistic(&k, &x, &x).unwrap().gamma_sq, 0.0);
}

#[test]
fn u_statistic_is_unbiased() {
    let k = KernelSpec::gaussian(1.0);
    let p = Measure::gaussian(0.0, 1.0).unwrap();
    let q = Measure::gaussian(1.0, 1.0).unwrap();
    let vals: Vec<f64> = (0..200u64)
        .map(|t| {
            let x = p.sample_stream(100, 7, 2 * t).unwrap();
            let y = q.sample_stream(100, 7, 2 * t + 1).unwrap();
            mmd_u_statistic(&k, &x, &y).unwrap().gamma_sq
        })
        .collect();
    let n = vals.len() as f64;
    let mean = vals.iter().sum::<f64>() / n;
    let sd = (vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    let pop = gamma_sq_closed_gaussian::<f64>(1.0, 0.0, 1.0, 1.0, 1.0)
        .unwrap()
        .gamma_sq;
    assert!(
        (mean - pop).abs() < 3.0 * sd / n.sqrt(),
        "mean {mean} pop {pop} se {}",
        sd / n.sqrt()
    );
}

#[test]
fn v_minus_u_shrinks() {
    let k = KernelSpec::gaussian(1.0);
    let p = Measure::gaussian(0.0, 1.0).unwrap();
    let q = Measure::gaussian(0.5, 1.0).unwrap();
    let gap = |m: usize| -> f64 {
        (0..20u64)
            .map(|t| {
                let x = p.sample_stream(m, 11, 2 * t).unwrap();
                let y = q.sample_stream(m, 11, 2 * t + 1).unwrap();
                mmd_v_statistic(&k, &x, &y).unwrap().gamma_sq - mmd_u_statistic(&k, &x, &y).unwrap().gamma_sq
            })
            .sum::<f64>()
            / 20.0
    };
    let (a, b, c) = (gap(50), gap(100), gap(200));
    assert!(a > b && b > c && c > 0.0, "{a} {b} {c}");
}

#[test]
fn sup_over_families() {
    let p = Measure::gaussian(0.0, 1.0).unwrap();
    let q = Measure::gaussian(1.0, 1.0).unwrap();
    let r = gamma_sup_family(&KernelClass::gaussian_bandwidths(1e-3, 1e3), &p, &q).unwrap();
    let s = r.param.unwrap();
    assert!(s > 1e-2 && s < 1e2, "sigma {s}");
    for end in [1e-3, 1e3] {
        let g = gamma_sq(&KernelSpec::gaussian(end), &p, &q).unwrap().gamma;
        assert!(g < r.gamma);
    }
    let single = gamma_sup_family(&KernelClass::List(vec![KernelSpec::gaussian(1.0)]), &p, &q).unwrap();
    assert!((single.gamma - gamma_sq(&KernelSpec::<f64>::gaussian(1.0), &p, &q).unwrap().gamma).abs() < 1e-15);
    let con = KernelClass::Convex(vec![KernelSpec::trivial(1.0), KernelSpec::gaussian(1.0)]);
    let r = gamma_sup_family(&con, &p, &q).unwrap();
    assert_eq!(r.weights.unwrap(), vec![0.0, 1.0]);
    assert!(gamma_sup_family(&KernelClass::List(vec![]), &p, &q).is_err());
}

#[test]
fn kernels_on_measures() {
    let k = KernelSpec::<f64>::laplacian(0.7);
    let v = kernel_on_measures(&k, &Measure::dirac(0.2), &Measure::dirac(1.5)).unwrap();
    assert!((v - k.k1(0.2, 1.5)).abs() < 1e-15);
    let p = Measure::uniform(-1.0, 1.0).unwrap();
    assert!(kernel_on_measures(&k, &p, &p).unwrap() > 0.0);
    let g = KernelSpec::gaussian(1.0);
    let ms = [
        Measure::gaussian(0.0, 1.0).unwrap(),
        Measure::gaussian(1.0, 1.0).unwrap(),
        Measure::gaussian(0.0, 2f64.sqrt()).unwrap(),
    ];
    let gram: Vec<Vec<f64>> = ms
        .iter()
        .map(|a| {
            ms.iter()
                .map(|b| gaussian_kernel_on_measures(&g, 1.0, a, b).unwrap())
                .collect()
        })
        .collect();
    assert!(min_eigen_and_trace(&gram).0 >= -1e-10);
    let ab = kernel_on_measures(&g, &ms[0], &ms[1]).unwrap();
    let sa = Signed1D::empty().add(1.0, &ms[0], false).unwrap();
    let sb = Signed1D::empty().add(1.0, &ms[1], false).unwrap();
    assert!((ab - cross_term(&g, &sa, &sb, 1e-11).0).abs() < 1e-9);
}

#[test]
fn single_precision() {
    let k = KernelSpec::<f32>::gaussian(FRAC_1_SQRT_2 as f32);
    let r = gamma_sq_discrete(&k, &Discrete::dirac(vec![0.0]), &Discrete::dirac(vec![1.0]));
    assert!((r.gamma_sq - 1.2642411).abs() < 1e-6);
}

fn discrete_strategy(d: usize) -> impl Strategy<Value = Discrete<f64>> {
    prop::collection::vec((prop::collection::vec(-3.0f64..3.0, d), 0.05f64..1.0), 1..6).prop_map(|atoms| {
        let total: f64 = atoms.iter().map(|a| a.1).sum();
        let mut d = Discrete {
            atoms: atoms.into_iter().map(|(x, w)| (x, w / total)).collect(),
        };
        d.atoms.dedup_by(|a, b| a.0 == b.0);
        let total: f64 = d.atoms.iter().map(|a| a.1).sum();
        d.atoms.iter_mut().for_each(|a| a.1 /= total);
        d
    })
}

fn moments(p: &Discrete<f64>) -> (Vec<f64>, Vec<Vec<f64>>) {
    let d = p.dim();
    let mut mu = vec![0.0; d];
    let mut second = vec![vec![0.0; d]; d];
    for (x, w) in &p.atoms {
        for i in 0..d {
            mu[i] += w * x[i];
            for j in 0..d {
                second[i][j] += w * x[i] * x[j];
            }
        }
    }
    (mu, second)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn poly2_moment_identity(p in discrete_strategy(2), q in discrete_strategy(2)) {
        let k = KernelSpec::poly2().with_dim(2).unwrap();
        let g = gamma_sq_discrete(&k, &p, &q).gamma_sq;
        let (mp, sp) = moments(&p);
        let (mq, sq) = moments(&q);
        // Σ + μμᵀ is the raw second moment
        let mean_term: f64 = mp.iter().zip(&mq).map(|(a, b)| (a - b).powi(2)).sum();
        let second_term: f64 = (0..2).flat_map(|i| (0..2).map(move |j| (i, j))).map(|(i, j)| (sp[i][j] - sq[i][j]).powi(2)).sum();
        prop_assert!((g - (2.0 * mean_term + second_term)).abs() < 1e-10 * (1.0 + g.abs()));
    }

    #[test]
    fn pseudometric_axioms(p in discrete_strategy(1), q in discrete_strategy(1), r in discrete_strategy(1)) {
        let k = KernelSpec::gaussian(0.9);
        let g = |a: &Discrete<f64>, b: &Discrete<f64>| gamma_sq_discrete(&k, a, b).gamma;
        prop_assert!(g(&p, &p) < 1e-7);
        prop_assert!((g(&p, &q) - g(&q, &p)).abs() < 1e-12);
        prop_assert!(g(&p, &r) <= g(&p, &q) + g(&q, &r) + 1e-9);
        prop_assert!(gamma_sq_discrete(&k, &p, &q).gamma_sq >= -1e-10);
    }
}
