use std::path::PathBuf;

use weakrev::harness::ExperimentConfig;

fn config_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

#[test]
fn checked_in_default_matches_builtin() {
    let from_file = ExperimentConfig::from_file(&config_path("default.json")).unwrap();
    let builtin = ExperimentConfig::default();
    assert_eq!(from_file.p_grid, builtin.p_grid);
    assert_eq!(from_file.info_p_grid, builtin.info_p_grid);
    assert_eq!(from_file.noise, builtin.noise);
    assert_eq!(from_file.seed, builtin.seed);
    let a = from_file.resolved_states().unwrap();
    let b = builtin.resolved_states().unwrap();
    assert_eq!(a.len(), b.len());
    for ((la, sa), (lb, sb)) in a.iter().zip(&b) {
        assert_eq!(la, lb);
        assert!(sa.same_ray(sb, 1e-12), "{la}");
    }
}

#[test]
fn plate_stack_config_spans_tested_range() {
    let cfg = ExperimentConfig::from_file(&config_path("plate_stack.json")).unwrap();
    let p: Vec<f64> = cfg.strengths().unwrap().iter().map(|s| s.value()).collect();
    assert!((p[0] - (1.0 - 0.85f64.powi(3))).abs() < 1e-12);
    assert!(p.windows(2).all(|w| w[0] < w[1]));
    assert!(*p.last().unwrap() < 0.9);
}
