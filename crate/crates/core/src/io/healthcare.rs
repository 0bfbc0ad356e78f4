use crate::model::{Labels, PomdpModel};

/// Identifier written into trace headers for the built-in model.
pub const HEALTHCARE_ID: &str = "healthcare";

/// Three-stage chronic disease model with four decisions: skip the next
/// appointment slot, schedule an appointment, order a rapid diagnostic
/// test, or treat. Stage 3 is absorbing under every decision.
pub fn healthcare_model() -> PomdpModel {
    let third = 1.0 / 3.0;
    let progression = vec![
        vec![0.8, 0.2, 0.0],
        vec![0.0, 0.9, 0.1],
        vec![0.0, 0.0, 1.0],
    ];
    let identity = vec![
        vec![1.0, 0.0, 0.0],
        vec![0.0, 1.0, 0.0],
        vec![0.0, 0.0, 1.0],
    ];
    let treated = vec![
        vec![0.8, 0.2, 0.0],
        vec![0.75, 0.25, 0.0],
        vec![0.0, 0.0, 1.0],
    ];
    let uninformative = vec![vec![third; 3]; 3];
    let appointment_test = vec![
        vec![0.4, 0.3, 0.3],
        vec![0.3, 0.4, 0.3],
        vec![0.3, 0.3, 0.4],
    ];
    let rapid_test = vec![
        vec![0.9, 0.05, 0.05],
        vec![0.05, 0.9, 0.05],
        vec![0.05, 0.05, 0.9],
    ];
    let names = |v: &[&str]| Some(v.iter().map(|s| s.to_string()).collect());
    PomdpModel::new(
        vec![progression.clone(), progression, identity, treated],
        vec![uninformative, appointment_test.clone(), rapid_test, appointment_test],
        vec![
            vec![0.0, 5.0, 5.0],
            vec![1.0, 1.0, 1.0],
            vec![4.0, 3.0, 4.0],
            vec![4.0, 2.0, 4.0],
        ],
        vec![0.0, 4.0, 30.0],
    )
    .and_then(|m| {
        m.with_labels(Labels {
            states: names(&["stage1", "stage2", "stage3"]),
            actions: names(&["skip", "appointment", "diagnose", "treatment"]),
            observations: names(&["result1", "result2", "result3"]),
        })
    })
    .expect("built-in model is valid")
}
