use kolmo_core::codecs::Coder;
use kolmo_core::generators::{hidden_cycle_returns, iid_gaussian_returns, toy_price_series, Seed};
use kolmo_core::pipeline::{
    outcome_table, replay, run_pipeline, PipelineReport, PipelineSpec, StageData, StageSpec, TestSpec, Transform,
    Verdict, NOTE_UNDECIDABLE,
};
use kolmo_core::series::{prices_from_returns, ReturnSeries};
use kolmo_core::stats::TestKind;
use kolmo_core::Error;

const TOY_CONFIG: &str = include_str!("../../../configs/toy_e1.toml");
const PRICES_CONFIG: &str = include_str!("../../../configs/prices_empirical.toml");
const PROGRESSIVE_CONFIG: &str = include_str!("../../../configs/prices_progressive.toml");
const NORMAL_CONFIG: &str = include_str!("../../../configs/returns_normal_quantile.toml");

fn fast(mut spec: PipelineSpec) -> PipelineSpec {
    spec.trials = 100;
    spec
}

fn gaussian_prices(n: usize, seed: u64) -> StageData {
    let r = iid_gaussian_returns(n, Seed(seed));
    let scaled = ReturnSeries::new(r.values().iter().map(|v| 0.01 * v).collect()).unwrap();
    StageData::Prices(prices_from_returns(100.0, &scaled).unwrap())
}

#[test]
fn shipped_configs_parse() {
    for text in [TOY_CONFIG, PRICES_CONFIG, PROGRESSIVE_CONFIG, NORMAL_CONFIG] {
        PipelineSpec::from_toml(text).unwrap();
    }
    let spec = PipelineSpec::from_toml(PRICES_CONFIG).unwrap();
    assert_eq!(spec.coders, Coder::ALL.to_vec());
    assert_eq!(spec.stages[0].transform, Transform::LogReturns);
    assert_eq!(spec.stages[0].tests.len(), 3);
    assert_eq!(spec.stages[1].transform, Transform::EmpiricalQuantile { width: 8 });
}

#[test]
fn toy_pipeline_finds_structure_then_runs_out_of_it() {
    let spec = fast(PipelineSpec::from_toml(TOY_CONFIG).unwrap());
    let toy = toy_price_series(400, Seed(5)).unwrap();
    let report = run_pipeline(&spec, "toy", StageData::Prices(toy.prices)).unwrap();
    let kinds: Vec<&str> = report.stages.iter().map(|s| s.kind.as_str()).collect();
    assert_eq!(kinds, ["integers", "integers", "symbols", "bits", "bits"]);
    // Duplicated bits are found by cm ...
    assert_eq!(report.stages[3].verdict, Some(Verdict::Regular));
    // ... and once removed, what is left is the generator's output.
    assert_eq!(report.stages[4].verdict, Some(Verdict::RandomInPractice));
    assert_eq!(report.verdict, Verdict::RandomInPractice);
    assert_eq!(report.stages[4].n, 3 * 399);
    assert!(report.annotations.iter().any(|a| a == NOTE_UNDECIDABLE));
}

#[test]
fn gaussian_prices_are_random_in_practice() {
    let spec = fast(PipelineSpec::from_toml(PRICES_CONFIG).unwrap());
    let report = run_pipeline(&spec, "gauss", gaussian_prices(5000, 1)).unwrap();
    assert_eq!(report.verdict, Verdict::RandomInPractice);
    let tests: Vec<TestKind> = report.stages[0].tests.iter().map(|t| t.test).collect();
    assert_eq!(tests, [TestKind::LjungBox, TestKind::Adf, TestKind::Bds]);
    for o in &report.stages[1].outcomes {
        assert!(o.outcome.rate <= 0.005, "{o:?}");
        assert!(o.p_value > 0.0 && o.p_value <= 1.0);
    }
}

#[test]
fn case_two_end_to_end_is_regular() {
    let spec = fast(PipelineSpec::from_toml(NORMAL_CONFIG).unwrap());
    let (_, chron) = hidden_cycle_returns(8000, 3, Seed(2)).unwrap();
    let report = run_pipeline(&spec, "case2", StageData::Returns(chron)).unwrap();
    assert_eq!(report.verdict, Verdict::Regular);
    let cm = report.stages[0].outcomes.iter().find(|o| o.outcome.coder == Coder::Cm).unwrap();
    assert!(cm.outcome.rate > 0.3);
    assert!(cm.p_value <= 1.0 / 101.0 + 1e-15);
}

#[test]
fn reports_are_reproducible_and_replayable() {
    let spec = fast(PipelineSpec::from_toml(PROGRESSIVE_CONFIG).unwrap());
    let data = gaussian_prices(3000, 4);
    let a = run_pipeline(&spec, "p", data.clone()).unwrap();
    let b = run_pipeline(&spec, "p", data.clone()).unwrap();
    assert_eq!(a, b);
    replay(&a, &data).unwrap();

    let json = serde_json::to_string(&a).unwrap();
    let back: PipelineReport = serde_json::from_str(&json).unwrap();
    assert_eq!(back, a);
    replay(&back, &data).unwrap();

    let other = gaussian_prices(3000, 5);
    assert!(matches!(replay(&a, &other), Err(Error::Integrity(_))));
    let mut tampered = a.clone();
    tampered.stages[1].digest = "0".repeat(64);
    assert!(matches!(replay(&tampered, &data), Err(Error::Integrity(_))));
}

#[test]
fn different_seeds_change_only_the_null() {
    let data = gaussian_prices(3000, 6);
    let mut spec = fast(PipelineSpec::from_toml(PROGRESSIVE_CONFIG).unwrap());
    spec.seed = Some(1);
    let a = run_pipeline(&spec, "p", data.clone()).unwrap();
    spec.seed = Some(2);
    let b = run_pipeline(&spec, "p", data).unwrap();
    let rates = |r: &PipelineReport| r.stages[1].outcomes.iter().map(|o| o.outcome.rate).collect::<Vec<_>>();
    assert_eq!(rates(&a), rates(&b));
    assert_eq!(a.stages[1].digest, b.stages[1].digest);
}

#[test]
fn outcome_table_mirrors_report() {
    let spec = fast(PipelineSpec::from_toml(NORMAL_CONFIG).unwrap());
    let report = run_pipeline(&spec, "g", StageData::Returns(iid_gaussian_returns(4000, Seed(8)))).unwrap();
    let table = outcome_table(&report.stages[0].outcomes);
    let lines: Vec<&str> = table.lines().collect();
    assert_eq!(lines[0], "algorithm,file_size_bits,rate");
    assert_eq!(lines.len(), 5);
    for (line, o) in lines[1..].iter().zip(&report.stages[0].outcomes) {
        let f: Vec<&str> = line.split(',').collect();
        assert_eq!(f[0], o.outcome.coder.name());
        assert_eq!(f[2].parse::<f64>().unwrap(), o.outcome.rate);
    }
}

#[test]
fn invalid_pipelines_are_config_errors() {
    let data = gaussian_prices(500, 9);
    // Nothing compressed, so no verdict.
    let spec = fast(PipelineSpec::new(vec![StageSpec::new(Transform::LogReturns)]));
    assert!(matches!(run_pipeline(&spec, "p", data.clone()), Err(Error::Config(_))));
    // Transform applied to the wrong kind of data.
    let spec = fast(PipelineSpec::new(vec![StageSpec::new(Transform::ToBits)]));
    assert!(run_pipeline(&spec, "p", data.clone()).is_err());
    // Tests on bits have no real-valued view.
    let spec = fast(PipelineSpec::new(vec![
        StageSpec::new(Transform::LogReturns),
        StageSpec::new(Transform::EmpiricalQuantile { width: 8 }),
        StageSpec::new(Transform::ToBits).with_tests(vec![TestSpec::LjungBox { lags: 5 }]),
    ]));
    assert!(run_pipeline(&spec, "p", data).is_err());
    assert!(PipelineSpec::from_toml("trials = 50\n[[stage]]\ntransform = \"to_bits\"\n").is_err());
}
