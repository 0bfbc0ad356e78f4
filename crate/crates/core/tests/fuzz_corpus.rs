//! Replays the fuzz seed corpus through the fuzz targets' invariants.

use std::path::PathBuf;

use pomdp_smpc::io::{parse, parse_belief, parse_policy, parse_unvalidated, serialize, write_policy};

fn seeds(target: &str) -> Vec<(PathBuf, String)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus").join(target);
    let mut files: Vec<PathBuf> = std::fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|e| e.unwrap().path())
        .collect();
    files.sort();
    assert!(!files.is_empty(), "no seeds for {target}");
    files
        .into_iter()
        .map(|p| {
            let text = std::fs::read_to_string(&p).unwrap();
            (p, text)
        })
        .collect()
}

#[test]
fn model_seeds() {
    let mut accepted = 0;
    for (path, text) in seeds("parse_model") {
        let _ = parse_unvalidated(&text);
        if let Ok(model) = parse(&text) {
            let again = parse(&serialize(&model)).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            assert_eq!(again.transition, model.transition);
            assert_eq!(again.observation, model.observation);
            assert_eq!(again.stage_cost, model.stage_cost);
            assert_eq!(again.terminal_cost, model.terminal_cost);
            accepted += 1;
        }
    }
    assert!(accepted >= 2);
}

#[test]
fn policy_seeds() {
    for (path, text) in seeds("parse_policy") {
        let file = parse_policy(&text).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        let written = write_policy(&file.stack, &file.action_names);
        assert_eq!(parse_policy(&written).unwrap(), file);
        assert_eq!(written, text, "{}", path.display());
    }
}

#[test]
fn belief_seeds() {
    for (path, text) in seeds("parse_belief") {
        let b = parse_belief(&text).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        let total: f64 = b.as_slice().iter().sum();
        assert!((total - 1.0).abs() < 1e-9);
    }
}
