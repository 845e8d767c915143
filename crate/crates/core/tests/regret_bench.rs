use adainject::regret::{self, SequenceKind, DEFAULT_DIM, DEFAULT_HORIZONS, DEFAULT_SEEDS, REGRET_FLOOR};
use adainject::OptimizerKind;

#[test]
fn default_bench_is_sublinear_for_every_kind() {
    let reports = regret::run_bench(
        &OptimizerKind::ALL,
        &DEFAULT_SEEDS,
        DEFAULT_DIM,
        &DEFAULT_HORIZONS,
        SequenceKind::Quadratic,
        &regret::default_config(),
    )
    .unwrap();
    assert_eq!(reports.len(), 24);
    for r in &reports {
        eprintln!("{} seed {:?}: slope {:?} R {:?}", r.kind, r.seed, r.slope, r.regret);
        assert!(r.min_regret() >= REGRET_FLOOR, "{r:?}");
        assert!(r.slope.unwrap() <= 0.75, "{r:?}");
        assert!(r.avg_regret_decreases(), "{r:?}");
        assert!(r.max_spread <= 2.0);
    }
}

#[test]
fn linear_sequences_have_bounded_regret_growth() {
    let reports = regret::run_bench(
        &OptimizerKind::ALL,
        &[3],
        2,
        &[100, 1000],
        SequenceKind::Linear,
        &regret::default_config(),
    )
    .unwrap();
    for r in &reports {
        assert!(r.min_regret() >= REGRET_FLOOR, "{r:?}");
    }
}
