use kdist::classical_metrics::compare_metrics;
use kdist::kernels::Verdict;
use kdist::mmd::{gamma_sq, Path};
use kdist::parse::{parse_kernel, parse_measure};
use kdist::{Kernel, Measure};

fn k(s: &str) -> Kernel {
    parse_kernel(s).unwrap()
}

fn m(s: &str) -> Measure {
    parse_measure(s).unwrap()
}

#[test]
fn display_round_trips() {
    for s in [
        "gaussian(1)",
        "bspline(order=3)",
        "sum(laplacian(2),sinc(1))",
        "dirichlet(n=2,period=2)",
        "matern(1.5,0.5)",
    ] {
        let a = k(s);
        let b = k(&a.to_string());
        assert_eq!(a.to_string(), b.to_string());
        assert_eq!(a.k1(0.3, -0.4), b.k1(0.3, -0.4));
    }
    for s in [
        "gaussian(0,2)",
        "perturbed(uniform(-1,1),alpha=0.5,nu=2)",
        "discrete[(0,0.25),(1,0.75)]",
        "cauchy(1,2)",
    ] {
        let a = m(s);
        assert_eq!(a.to_string(), m(&a.to_string()).to_string());
    }
}

#[test]
fn routes_by_measure_type() {
    let g = k("gaussian(1)");
    assert_eq!(
        gamma_sq(&g, &m("discrete[(0,1)]"), &m("discrete[(1,1)]")).unwrap().path,
        Path::DiscreteExact
    );
    assert_eq!(
        gamma_sq(&g, &m("gaussian(0,1)"), &m("gaussian(1,1)")).unwrap().path,
        Path::ClosedForm
    );
    assert_eq!(
        gamma_sq(&g, &m("uniform(-1,1)"), &m("gaussian(0,1)")).unwrap().path,
        Path::DensityQuadrature
    );
    let torus = k("poisson(0.5,domain=torus)");
    assert_eq!(
        gamma_sq(&torus, &m("torus_uniform(1)"), &m("torus_flat(n0=[1],alpha=0.05)"))
            .unwrap()
            .path,
        Path::TorusSeries
    );
}

#[test]
fn verdicts_from_text() {
    assert_eq!(k("gaussian(2)").classify().verdict, Verdict::Characteristic);
    assert_eq!(k("sinc(2)").classify().verdict, Verdict::CharacteristicToP1);
    assert_eq!(k("cosine(1)").classify().verdict, Verdict::NotCharacteristic);
    assert_eq!(k("poly2").classify().verdict, Verdict::NotCharacteristic);
}

#[test]
fn malformed_text_is_a_validation_error() {
    for s in ["gaussian(", "gaussian(-1)", "nosuch(1)", "bspline(order=2)"] {
        assert!(parse_kernel::<f64>(s).unwrap_err().is_validation(), "{s}");
    }
    for s in ["discrete[(0,0.3)]", "uniform(1,0)", "gaussian(0,0)"] {
        assert!(parse_measure::<f64>(s).unwrap_err().is_validation(), "{s}");
    }
}

#[test]
fn comparison_from_text() {
    let (Measure::Discrete(p), Measure::Discrete(q)) = (m("discrete[(0,0.5),(1,0.5)]"), m("discrete[(0.5,1)]")) else {
        panic!("expected discrete measures");
    };
    let r = compare_metrics(&k("laplacian(1)"), &p, &q).unwrap();
    assert!(r.all_pass());
    assert_eq!(r.bound_c, 1.0);
}
