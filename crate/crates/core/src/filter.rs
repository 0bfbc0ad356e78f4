//! Discrete Bayesian filter.
//!
//! One filter cycle applies action `a`, predicts through `transition[a]`,
//! then conditions on the observation drawn from `observation[a]` at the
//! successor state:
//!
//! ```text
//! pred_j  = Σ_i π_i p^a_ij
//! post_j ∝ pred_j r^a_jθ
//! ```

use crate::error::{Error, Result};
use crate::model::{Belief, PomdpModel};

/// Prior over the successor state after applying `action`.
pub fn predict(model: &PomdpModel, belief: &Belief, action: usize) -> Result<Belief> {
    model.check_action(action)?;
    model.check_belief(belief)?;
    Ok(Belief::new(propagate(model, belief.as_slice(), action)).expect("stochastic rows preserve mass"))
}

pub(crate) fn propagate(model: &PomdpModel, p: &[f64], action: usize) -> Vec<f64> {
    let t = &model.transition[action];
    let mut out = vec![0.0; model.n_states];
    for (i, &pi) in p.iter().enumerate() {
        if pi == 0.0 {
            continue;
        }
        for (o, &pij) in out.iter_mut().zip(&t[i]) {
            *o += pi * pij;
        }
    }
    out
}

/// P(θ | belief, action) for every observation θ.
pub fn observation_likelihoods(model: &PomdpModel, belief: &Belief, action: usize) -> Result<Vec<f64>> {
    let predicted = predict(model, belief, action)?;
    Ok(likelihoods_of_predicted(model, predicted.as_slice(), action))
}

pub(crate) fn likelihoods_of_predicted(model: &PomdpModel, pred: &[f64], action: usize) -> Vec<f64> {
    let o = &model.observation[action];
    let mut out = vec![0.0; model.n_observations];
    for (j, &pj) in pred.iter().enumerate() {
        for (l, &r) in out.iter_mut().zip(&o[j]) {
            *l += pj * r;
        }
    }
    out
}

/// Measurement update of an already predicted belief.
pub fn update(model: &PomdpModel, predicted: &Belief, action: usize, observation: usize) -> Result<Belief> {
    model.check_action(action)?;
    model.check_observation(observation)?;
    model.check_belief(predicted)?;
    let o = &model.observation[action];
    let unnormalized: Vec<f64> = predicted
        .as_slice()
        .iter()
        .enumerate()
        .map(|(j, &pj)| pj * o[j][observation])
        .collect();
    let z: f64 = unnormalized.iter().sum();
    if z <= 0.0 {
        return Err(Error::ZeroLikelihood { action, observation });
    }
    Ok(Belief::new(unnormalized.into_iter().map(|x| x / z).collect()).expect("positive normalizer"))
}

/// Full filter cycle: `update(predict(belief, action), action, observation)`.
pub fn step(model: &PomdpModel, belief: &Belief, action: usize, observation: usize) -> Result<Belief> {
    let predicted = predict(model, belief, action)?;
    update(model, &predicted, action, observation)
}

/// Most likely state; ties go to the lowest index.
pub fn map_state(belief: &Belief) -> usize {
    let mut best = 0;
    for (i, &p) in belief.as_slice().iter().enumerate() {
        if p > belief[best] {
            best = i;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::healthcare_model;
    use proptest::prelude::*;

    const SKIP: usize = 0;
    const APPOINTMENT: usize = 1;
    const DIAGNOSE: usize = 2;
    const TREATMENT: usize = 3;

    fn b(v: &[f64]) -> Belief {
        Belief::new(v.to_vec()).unwrap()
    }

    fn assert_close(got: &[f64], want: &[f64], tol: f64) {
        assert_eq!(got.len(), want.len());
        for (g, w) in got.iter().zip(want) {
            assert!((g - w).abs() <= tol, "got {got:?}, want {want:?}");
        }
    }

    #[test]
    fn predict_examples() {
        let m = healthcare_model();
        assert_close(predict(&m, &b(&[1.0, 0.0, 0.0]), SKIP).unwrap().as_slice(), &[0.8, 0.2, 0.0], 1e-15);
        assert_close(predict(&m, &b(&[0.0, 1.0, 0.0]), DIAGNOSE).unwrap().as_slice(), &[0.0, 1.0, 0.0], 0.0);
        assert_close(predict(&m, &b(&[0.0, 1.0, 0.0]), TREATMENT).unwrap().as_slice(), &[0.75, 0.25, 0.0], 1e-15);
    }

    #[test]
    fn likelihood_examples() {
        let m = healthcare_model();
        let third = 1.0 / 3.0;
        for belief in [b(&[1.0, 0.0, 0.0]), b(&[0.2, 0.3, 0.5])] {
            assert_close(&observation_likelihoods(&m, &belief, SKIP).unwrap(), &[third; 3], 1e-12);
        }
        assert_close(
            &observation_likelihoods(&m, &b(&[1.0, 0.0, 0.0]), DIAGNOSE).unwrap(),
            &[0.9, 0.05, 0.05],
            1e-15,
        );
        // 0.8·[.4,.3,.3] + 0.2·[.3,.4,.3]
        assert_close(
            &observation_likelihoods(&m, &b(&[1.0, 0.0, 0.0]), APPOINTMENT).unwrap(),
            &[0.38, 0.32, 0.30],
            1e-12,
        );
    }

    #[test]
    fn update_examples() {
        let m = healthcare_model();
        let u = Belief::uniform(3);
        // uniform prior: posterior is the observation column, renormalized
        assert_close(update(&m, &u, DIAGNOSE, 0).unwrap().as_slice(), &[0.9, 0.05, 0.05], 1e-12);
        for a in [APPOINTMENT, DIAGNOSE, TREATMENT] {
            for o in 0..3 {
                assert_eq!(update(&m, &Belief::point(3, 0), a, o).unwrap(), Belief::point(3, 0));
            }
        }
        let mut zero = m.clone();
        zero.observation[DIAGNOSE][1] = vec![0.5, 0.0, 0.5];
        assert!(matches!(
            update(&zero, &Belief::point(3, 1), DIAGNOSE, 1),
            Err(Error::ZeroLikelihood { action: DIAGNOSE, observation: 1 })
        ));
    }

    #[test]
    fn step_examples() {
        let m = healthcare_model();
        assert_close(step(&m, &b(&[1.0, 0.0, 0.0]), SKIP, 1).unwrap().as_slice(), &[0.8, 0.2, 0.0], 1e-12);
        assert_close(step(&m, &Belief::uniform(3), DIAGNOSE, 1).unwrap().as_slice(), &[0.05, 0.9, 0.05], 1e-12);
        for a in 0..4 {
            for o in 0..3 {
                assert_eq!(step(&m, &Belief::point(3, 2), a, o).unwrap(), Belief::point(3, 2));
            }
        }
    }

    #[test]
    fn range_errors() {
        let m = healthcare_model();
        assert!(matches!(predict(&m, &Belief::uniform(3), 9), Err(Error::ActionOutOfRange { .. })));
        assert!(matches!(
            update(&m, &Belief::uniform(3), 0, 3),
            Err(Error::ObservationOutOfRange { .. })
        ));
        assert!(matches!(predict(&m, &Belief::uniform(2), 0), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn map_state_examples() {
        assert_eq!(map_state(&b(&[0.5, 0.3, 0.2])), 0);
        assert_eq!(map_state(&b(&[0.4, 0.4, 0.2])), 0);
        assert_eq!(map_state(&b(&[0.05, 0.9, 0.05])), 1);
    }

    fn belief3() -> impl Strategy<Value = Belief> {
        prop::collection::vec(0.0f64..1.0, 3)
            .prop_filter("nonzero", |v| v.iter().sum::<f64>() > 1e-6)
            .prop_map(|v| Belief::new(v).unwrap())
    }

    proptest! {
        #[test]
        fn outputs_are_beliefs(p in belief3(), a in 0usize..4, o in 0usize..3) {
            let m = healthcare_model();
            if let Ok(post) = step(&m, &p, a, o) {
                let s: f64 = post.as_slice().iter().sum();
                prop_assert!((s - 1.0).abs() < 1e-9);
                prop_assert!(post.as_slice().iter().all(|&x| x >= 0.0));
            }
        }

        #[test]
        fn uninformative_observation_is_prediction(p in belief3(), o in 0usize..3) {
            let m = healthcare_model();
            let pred = predict(&m, &p, SKIP).unwrap();
            let post = step(&m, &p, SKIP, o).unwrap();
            for (x, y) in pred.as_slice().iter().zip(post.as_slice()) {
                prop_assert!((x - y).abs() < 1e-15);
            }
        }

        #[test]
        fn absorbing_mass_never_decreases(p in belief3(), a in 0usize..4) {
            let m = healthcare_model();
            prop_assert!(predict(&m, &p, a).unwrap()[2] >= p[2] - 1e-12);
        }
    }
}
