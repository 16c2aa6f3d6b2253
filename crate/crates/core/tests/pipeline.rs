use std::fs;

use isoschatten_core::geometry::{rasterize, Domain};
use isoschatten_core::harness::{
    run, run_and_write, Experiment, ExperimentConfig, Exponent, HarnessError, Status, EXIT_CONFIG,
    EXIT_OK,
};
use isoschatten_core::kernel::{Kernel, KernelSpec};
use isoschatten_core::spectral::{
    assemble, eigendecompose, read_matrix_binary, schatten_norm, write_matrix_binary, Spectrum,
    VectorRequest,
};
use isoschatten_core::trace::{matrix_trace_power, mc_cyclic_trace};
use proptest::prelude::*;

fn gauss(s: f64) -> KernelSpec {
    KernelSpec::new(Kernel::Gaussian { s }, 2).unwrap()
}

fn spectrum(domain: &Domain, kernel: &KernelSpec, n: usize) -> Spectrum {
    let raster = rasterize(domain, n).unwrap();
    eigendecompose(&assemble(&raster, kernel).unwrap(), VectorRequest::None).unwrap()
}

fn boxed(w: f64, h: f64) -> Domain {
    Domain::cuboid(vec![0.0, 0.0], vec![w, h]).unwrap()
}

fn small(experiment: Experiment, kernel: &str, domains: &[&str]) -> ExperimentConfig {
    let mut c = ExperimentConfig::new(
        experiment,
        kernel.to_string(),
        domains.iter().map(|d| d.to_string()).collect(),
    );
    c.resolutions = vec![10, 20];
    c
}

#[test]
fn schatten_run_writes_every_artifact() {
    let tmp = tempfile::tempdir().unwrap();
    let mut c = small(
        Experiment::Schatten,
        "gauss:s=1",
        &["box:d=2,lo=0,0,hi=1.5,1"],
    );
    c.p_list = vec![Exponent(2.0), Exponent(f64::INFINITY)];
    c.functional_p = vec![2];
    c.output = Some(tmp.path().to_path_buf());
    let outcome = run_and_write(&c).unwrap();
    assert_eq!(outcome.exit_code(), EXIT_OK);
    assert!(outcome.report.all_hold());

    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(tmp.path().join("report.json")).unwrap()).unwrap();
    assert!(json["config"].get("output").is_none());
    assert_eq!(json["tool"]["name"], "isoschatten");
    for d in ["ball", "box0"] {
        for n in [10, 20] {
            assert!(tmp.path().join(format!("spectrum_{d}_{n}.csv")).exists());
        }
    }
    let functionals = fs::read_to_string(tmp.path().join("functionals_box0.csv")).unwrap();
    let mut lines = functionals.lines();
    assert_eq!(lines.next(), Some("functional,p,n,x,resolution,value"));
    assert!(lines.any(|l| l.starts_with("heat_sum,2,,")));
}

#[test]
fn config_errors_are_not_reports() {
    let c = small(
        Experiment::Triangle,
        "gauss:s=1",
        &["box:d=2,lo=0,0,hi=1,1"],
    );
    let e = run(&c).unwrap_err();
    assert!(matches!(e, HarnessError::NotATriangle(_)));
    assert_eq!(e.exit_code(), EXIT_CONFIG);

    let mut c = small(Experiment::Rfk, "gauss:s=1", &["ball:d=2,r=1"]);
    c.resolutions = vec![20, 10];
    assert_eq!(run(&c).unwrap_err().exit_code(), EXIT_CONFIG);

    let c = small(
        Experiment::Rfk,
        "gauss:s=1",
        &["ball:d=2,r=1", "ball:d=3,r=1"],
    );
    assert_eq!(run(&c).unwrap_err().exit_code(), EXIT_CONFIG);

    let c = small(Experiment::Zeta, "gauss:s=1", &["ball:d=2,r=1"]);
    assert_eq!(run(&c).unwrap_err().exit_code(), EXIT_CONFIG);

    let mut c = small(Experiment::Bll, "riesz:alpha=1", &["box:d=2,lo=0,0,hi=1,1"]);
    c.p_list = vec![Exponent(2.0)];
    assert_eq!(run(&c).unwrap_err().exit_code(), EXIT_CONFIG);
}

#[test]
fn zeta_table_covers_the_grid() {
    let mut c = small(Experiment::Zeta, "peierls:b=1", &["ball:d=3,r=1"]);
    c.resolutions = vec![6, 8];
    c.zeta_list = vec![0.25, 0.5];
    c.eigen_indices = vec![1, 2];
    let r = run(&c).unwrap().report;
    assert_eq!(r.status, Status::Ok);
    // (ζ = 0 plus the list) × indices × resolutions
    assert_eq!(r.zeta_table.len(), 3 * 2 * 2);
    for row in r.zeta_table.iter().filter(|row| row.zeta == 0.0) {
        assert!(row.residual <= 1e-8, "{row:?}");
    }
    assert!(r.checks.iter().all(|c| c.passed));
}

#[test]
fn convergence_is_report_only() {
    let c = small(
        Experiment::Convergence,
        "riesz:alpha=1",
        &["box:d=2,lo=0,0,hi=1,1"],
    );
    let outcome = run(&c).unwrap();
    assert!(outcome.report.verdicts.is_empty());
    assert_eq!(outcome.exit_code(), EXIT_OK);
    let d = outcome.report.domain("box0").unwrap();
    assert!(d.series("mu1").unwrap().extrapolated.is_some());
}

#[test]
fn seeds_drive_the_monte_carlo_report() {
    let mut c = small(Experiment::Bll, "gauss:s=1", &["box:d=2,lo=0,0,hi=2,1"]);
    c.resolutions.clear();
    c.p_list = vec![Exponent(3.0)];
    c.n_samples = 20_000;
    c.seed = 11;
    let a = run(&c).unwrap().report;
    let b = run(&c).unwrap().report;
    assert_eq!(a.deterministic_json(), b.deterministic_json());
    c.seed = 12;
    let other = run(&c).unwrap().report;
    assert_ne!(a.deterministic_json(), other.deterministic_json());
    let (x, y) = (&a.monte_carlo[0], &other.monte_carlo[0]);
    let se = x.comparison.omega.stderr.hypot(y.comparison.omega.stderr);
    assert!((x.comparison.omega.value - y.comparison.omega.value).abs() < 5.0 * se);
}

#[test]
fn matrix_file_round_trip() {
    let raster = rasterize(&boxed(1.0, 1.0), 6).unwrap();
    let system = assemble(&raster, &gauss(1.0)).unwrap();
    let mut bytes = Vec::new();
    write_matrix_binary(&system.matrix, 2, &mut bytes).unwrap();
    let (m, d) = read_matrix_binary(bytes.as_slice()).unwrap();
    assert_eq!(d, 2);
    assert_eq!(m, system.matrix);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    // Ω ↦ tΩ with s ↦ s/t² leaves the kernel matrix unchanged up to the
    // weight, which grows by t².
    #[test]
    fn dilation_scales_the_spectrum(w in 0.5f64..2.0, t in 0.5f64..2.0) {
        let a = spectrum(&boxed(w, 1.0), &gauss(1.0), 10);
        let b = spectrum(&boxed(t * w, t), &gauss(1.0 / (t * t)), 10);
        for (x, y) in a.eigenvalues.iter().zip(&b.eigenvalues) {
            prop_assert!((t * t * x - y).abs() <= 1e-10 * a.eigenvalues[0] * t * t);
        }
    }

    #[test]
    fn translation_leaves_the_spectrum(dx in -3.0f64..3.0, dy in -3.0f64..3.0) {
        let a = spectrum(&boxed(1.0, 0.7), &gauss(1.0), 10);
        let moved = Domain::cuboid(vec![dx, dy], vec![dx + 1.0, dy + 0.7]).unwrap();
        let b = spectrum(&moved, &gauss(1.0), 10);
        for (x, y) in a.eigenvalues.iter().zip(&b.eigenvalues) {
            prop_assert!((x - y).abs() <= 1e-12 * a.eigenvalues[0]);
        }
    }

    #[test]
    fn traces_match_eigenvalue_sums(w in 0.3f64..3.0, s in 0.2f64..3.0, p in 1u32..6) {
        let raster = rasterize(&boxed(w, 1.0), 8).unwrap();
        let system = assemble(&raster, &gauss(s)).unwrap();
        let spec = eigendecompose(&system, VectorRequest::None).unwrap();
        let sum: f64 = spec.eigenvalues.iter().map(|l| l.powi(p as i32)).sum();
        let tr = matrix_trace_power(&system, p).unwrap();
        prop_assert!((tr - sum).abs() <= 1e-10 * sum.abs());
    }

    #[test]
    fn norms_fall_with_p(w in 0.3f64..3.0, p in 1.0f64..5.0, dp in 0.0f64..3.0) {
        let s = spectrum(&boxed(w, 1.0), &gauss(1.0), 8);
        let a = schatten_norm(&s, p).unwrap().value;
        let b = schatten_norm(&s, p + dp).unwrap().value;
        let inf = schatten_norm(&s, f64::INFINITY).unwrap().value;
        prop_assert!(a >= b * (1.0 - 1e-12));
        prop_assert!(b >= inf * (1.0 - 1e-12));
    }

    #[test]
    fn monte_carlo_is_seed_deterministic(seed in any::<u64>()) {
        let d = boxed(1.0, 1.0);
        let a = mc_cyclic_trace(&d, &gauss(1.0), 2, 10_000, seed).unwrap();
        let b = mc_cyclic_trace(&d, &gauss(1.0), 2, 10_000, seed).unwrap();
        prop_assert_eq!(a.value.to_bits(), b.value.to_bits());
        prop_assert!((a.value - 0.583662).abs() < 6.0 * a.stderr);
    }
}
