use std::path::Path;

use svogs_cli::config::{
    load_config, AlgorithmSpec, ConfigError, ExperimentConfig, MetricName, ProblemSpec, StoppingSpec, SvogsSpec, VariantSpec,
};
use svogs_cli::experiment::{build_problem, resolve};
use svogs_core::algorithms::Algorithm;

const MINIMAL: &str = r#"{
    "problem": {"hard_instance": {"kind": "cc-rounds", "d": 6, "delta": 1, "l": 1}},
    "algorithm": {"eg": {}},
    "n": 9,
    "stopping": {"rounds": 5},
    "output": "out"
}"#;

fn write(dir: &Path, name: &str, text: &str) -> std::path::PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

#[test]
fn minimal_config_gets_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = load_config(&write(dir.path(), "c.json", MINIMAL)).unwrap();
    assert_eq!(cfg.seeds, vec![0]);
    assert_eq!(cfg.cadence, 1);
    assert_eq!(cfg.metrics, vec![MetricName::GradMapping]);
    assert!(cfg.cache && cfg.tau.is_none());
    assert_eq!(cfg.output, dir.path().join("out"));
    assert_eq!(cfg.algorithm, AlgorithmSpec::Eg { eta: None });
    assert_eq!(cfg.stopping, StoppingSpec::Rounds(5));
    match &cfg.problem {
        ProblemSpec::HardInstance(h) => assert_eq!((h.mu, h.r), (0.0, 1.0)),
        _ => panic!("expected a hard instance"),
    }
    // Defaults are echoed when the config is serialized.
    let echo = serde_json::to_value(&cfg).unwrap();
    assert_eq!(echo["seeds"], serde_json::json!([0]));
    assert_eq!(echo["cadence"], 1);
}

#[test]
fn unknown_fields_are_named() {
    let dir = tempfile::tempdir().unwrap();
    let text = MINIMAL.replace("\"n\": 9", "\"n\": 9, \"nodes\": 3");
    let err = load_config(&write(dir.path(), "c.json", &text)).unwrap_err();
    assert!(err.to_string().contains("nodes"), "{err}");

    let text = MINIMAL.replace("\"delta\": 1", "\"delta\": 1, \"sigma\": 2");
    let err = load_config(&write(dir.path(), "c.json", &text)).unwrap_err();
    match err {
        ConfigError::Schema { field, message, .. } => {
            assert!(field.starts_with("problem.hard_instance"), "{field}");
            assert!(message.contains("sigma"));
        }
        other => panic!("{other}"),
    }
}

#[test]
fn missing_and_invalid_entries() {
    let dir = tempfile::tempdir().unwrap();
    let no_stop = MINIMAL.replace("\"stopping\": {\"rounds\": 5},", "");
    assert!(load_config(&write(dir.path(), "a.json", &no_stop)).unwrap_err().to_string().contains("stopping"));
    let bad_kind = MINIMAL.replace("cc-rounds", "cc-nothing");
    assert!(matches!(load_config(&write(dir.path(), "b.json", &bad_kind)), Err(ConfigError::Invalid(_))));
    let zero_cadence = MINIMAL.replace("\"n\": 9", "\"n\": 9, \"cadence\": 0");
    assert!(load_config(&write(dir.path(), "c.json", &zero_cadence)).is_err());
    let missing_file = r#"{
        "problem": {"robust_regression": {"path": "nowhere.svm", "variant": {"constrained": {}}}},
        "algorithm": {"eg": {}}, "n": 2, "stopping": {"rounds": 1}, "output": "o"
    }"#;
    let err = load_config(&write(dir.path(), "d.json", missing_file)).unwrap_err();
    assert!(err.to_string().contains("nowhere.svm"));
    assert!(matches!(load_config(&dir.path().join("absent.json")), Err(ConfigError::Io { .. })));
}

#[test]
fn constrained_defaults_match_experiment_radii() {
    let text = r#"{
        "problem": {"robust_regression": {"synthetic": {"rows": 1000, "dim": 5}, "variant": {"constrained": {}}}},
        "algorithm": {"svogs": {"auto_cc": {"eps": 1e-3}}},
        "n": 500,
        "stopping": {"rounds": 1},
        "output": "o"
    }"#;
    let cfg = ExperimentConfig::from_json(text, Path::new("inline")).unwrap();
    cfg.validate().unwrap();
    let ProblemSpec::RobustRegression(r) = &cfg.problem else { panic!() };
    assert_eq!(r.variant, VariantSpec::Constrained { r_x: 2.0, r_y: 0.05 });

    // Five hundred nodes: b = ceil(sqrt 500) = 23 and gamma = p = 1/(sqrt 500 + 8).
    let built = build_problem(&cfg).unwrap();
    assert_eq!(built.problem.n(), 500);
    let resolved = resolve(&cfg, &built).unwrap();
    let Algorithm::Svogs(p) = resolved.algorithm else { panic!() };
    assert_eq!(p.b, 23);
    assert!((p.gamma - 1.0 / (500f64.sqrt() + 8.0)).abs() < 1e-15);
    assert_eq!(p.gamma, p.p);
    assert!(resolved.algorithm.fingerprint().contains("b=23"));
    assert_eq!(cfg.algorithm, AlgorithmSpec::Svogs(SvogsSpec::AutoCc { eps: 1e-3 }));
}
