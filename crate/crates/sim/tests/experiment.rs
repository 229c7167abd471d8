use rankindep::KernelKind;
use rankindep_sim::{
    estimate_population_taustar, run_experiment, run_replicates, write_rows, ExperimentConfig,
    ExperimentMode, GeneratorFamily,
};

fn config(family: GeneratorFamily, mode: ExperimentMode) -> ExperimentConfig {
    ExperimentConfig {
        family,
        n: 40,
        p: 10,
        kinds: KernelKind::ALL.to_vec(),
        alpha: 0.05,
        reps: 20,
        mode,
        master_seed: 77,
    }
}

#[test]
fn rows_repeat_apart_from_wall_time() {
    let c = config(
        GeneratorFamily::StudentT3,
        ExperimentMode::MonteCarlo { reps: 39 },
    );
    let strip = |mut rows: Vec<rankindep_sim::ExperimentRow>| {
        rows.iter_mut().for_each(|r| r.wall_time = 0.0);
        rows
    };
    let a = strip(run_experiment(&c).unwrap());
    let b = strip(run_experiment(&c).unwrap());
    assert_eq!(a, b);
    for row in &a {
        assert_eq!(row.rejection_rate, row.rejections as f64 / row.reps as f64);
        assert_eq!(row.mode, "mc");
    }
}

#[test]
fn null_designs_give_identical_decisions() {
    let base = run_replicates(&config(
        GeneratorFamily::GaussIid,
        ExperimentMode::Asymptotic,
    ))
    .unwrap();
    let cubed = run_replicates(&config(
        GeneratorFamily::GaussCopulaCubed,
        ExperimentMode::Asymptotic,
    ))
    .unwrap();
    assert_eq!(base, cubed);
}

#[test]
fn strong_dependence_is_detected() {
    let mut c = config(GeneratorFamily::DenseLog, ExperimentMode::Asymptotic);
    c.n = 60;
    let rows = run_experiment(&c).unwrap();
    assert!(rows.iter().all(|r| r.rejection_rate == 1.0), "{rows:?}");
}

#[test]
fn rows_and_sidecar_are_written() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("rows.csv");
    let c = config(GeneratorFamily::GaussIid, ExperimentMode::Asymptotic);
    let rows = run_experiment(&c).unwrap();
    write_rows(&path, &c, &rows).unwrap();
    let csv = std::fs::read_to_string(&path).unwrap();
    assert!(csv.starts_with("kind,n,p,rejection_rate,rejections,reps,mode,wall_time"));
    assert_eq!(csv.lines().count(), 4);
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(path.with_extension("json")).unwrap())
            .unwrap();
    assert_eq!(json["config"]["master_seed"], 77);
    assert_eq!(json["rows"].as_array().unwrap().len(), 3);
}

#[test]
fn independent_pair_has_zero_population_value() {
    let est =
        estimate_population_taustar(GeneratorFamily::GaussPair { rho: 0.0 }, 30, 400, 5).unwrap();
    assert!(est.mean.abs() <= 3.0 * est.se, "{est:?}");
    assert!(estimate_population_taustar(GeneratorFamily::DenseTrig, 30, 10, 5).is_err());
}
