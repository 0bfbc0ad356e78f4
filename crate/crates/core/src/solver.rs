//! Exact finite-horizon solution of the belief-space dynamic program.
//!
//! The value function at every stage is piecewise linear and concave in the
//! belief, stored as a set of alpha vectors:
//!
//! ```text
//! V_k(π) = min_{γ ∈ Γ_k} π · γ,        Γ_N = { c_N }
//! ```
//!
//! One backup builds Γ_k from Γ_{k+1}. For action `a` and observation `θ`
//! every successor vector is projected back through the model,
//!
//! ```text
//! g^{a,θ}_i = α Σ_j p^a_ij r^a_jθ γ'_j
//! ```
//!
//! the projected sets are cross-summed over observations with a prune after
//! each step (incremental pruning), `c(a)` is added, and the per-action sets
//! are merged and pruned once more.
//!
//! In exact mode a cross-sum `A ⊕ B` of two pruned sets only enumerates pairs
//! whose witness regions can meet: `u + v` is on the lower envelope at `π`
//! only if `u` is minimal in `A` and `v` minimal in `B` there. Each region is
//! bounded by a box (one small LP per coordinate and direction) and pairs
//! with disjoint boxes are skipped.
//!
//! Two independent routes check the backup: [`bruteforce_value`] recurses
//! over the belief tree with the Bayesian filter, and [`solve_mdp`] is the
//! fully observed recursion used by the certainty-equivalent controller.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::filter;
use crate::lp::{LinearProgram, LpOutcome};
use crate::model::{dot, terminal_value, Belief, PomdpModel, PruneMode, SolveConfig};

/// Leaf budget for [`bruteforce_value`].
pub const BRUTEFORCE_LEAF_CAP: u128 = 10_000_000;

/// Values closer than this (relative) are ties and fall to the lower index.
pub(crate) fn is_tie(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlphaVector {
    pub coeffs: Vec<f64>,
    /// `None` marks the terminal vector.
    pub action: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlphaVectorSet {
    pub vectors: Vec<AlphaVector>,
    pub stage: usize,
}

impl AlphaVectorSet {
    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    /// Minimum dot product with `p`.
    pub fn min_value(&self, p: &[f64]) -> f64 {
        self.vectors
            .iter()
            .map(|v| dot(p, &v.coeffs))
            .fold(f64::INFINITY, f64::min)
    }

    /// Minimizing vector at `p`: ties go to the lowest action, then the
    /// lowest vector index.
    pub fn argmin(&self, p: &[f64]) -> (f64, usize) {
        let dots: Vec<f64> = self.vectors.iter().map(|v| dot(p, &v.coeffs)).collect();
        let best = dots.iter().copied().fold(f64::INFINITY, f64::min);
        let idx = (0..dots.len())
            .filter(|&i| is_tie(dots[i], best) || dots[i] <= best)
            .min_by_key(|&i| (self.vectors[i].action.unwrap_or(usize::MAX), i))
            .expect("nonempty set");
        (best, idx)
    }
}

/// Alpha-vector sets for stages `0..=horizon`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyStack {
    pub per_stage: Vec<AlphaVectorSet>,
    pub discount: f64,
}

impl PolicyStack {
    pub fn horizon(&self) -> usize {
        self.per_stage.len() - 1
    }

    pub fn stage(&self, k: usize) -> Result<&AlphaVectorSet> {
        self.per_stage.get(k).ok_or(Error::StageOutOfRange {
            stage: k,
            horizon: self.horizon(),
        })
    }
}

/// Value and minimizing action at a belief. The action is `None` at the
/// terminal stage.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Decision {
    pub value: f64,
    pub action: Option<usize>,
}

pub fn solve(model: &PomdpModel, config: &SolveConfig) -> Result<PolicyStack> {
    config.validate()?;
    let horizon = config.horizon;
    let mut stages = vec![AlphaVectorSet {
        vectors: vec![AlphaVector {
            coeffs: model.terminal_cost.clone(),
            action: None,
        }],
        stage: horizon,
    }];
    for k in (0..horizon).rev() {
        let next = stages.last().expect("terminal stage present");
        let set = backup(model, next, config, k)?;
        log::debug!("stage {k}: {} vectors", set.len());
        stages.push(set);
    }
    stages.reverse();
    Ok(PolicyStack {
        per_stage: stages,
        discount: config.discount,
    })
}

/// Per-observation projection matrices `M^{a,θ}_ij = p^a_ij r^a_jθ`.
fn projection(model: &PomdpModel, action: usize, obs: usize) -> Vec<Vec<f64>> {
    let t = &model.transition[action];
    let o = &model.observation[action];
    (0..model.n_states)
        .map(|i| (0..model.n_states).map(|j| t[i][j] * o[j][obs]).collect())
        .collect()
}

fn project(m: &[Vec<f64>], discount: f64, next: &[f64]) -> Vec<f64> {
    m.iter().map(|row| discount * dot(row, next)).collect()
}

fn projected_set(model: &PomdpModel, next: &AlphaVectorSet, discount: f64, action: usize, obs: usize) -> Vec<AlphaVector> {
    let m = projection(model, action, obs);
    next.vectors
        .iter()
        .map(|g| AlphaVector {
            coeffs: project(&m, discount, &g.coeffs),
            action: Some(action),
        })
        .collect()
}

fn cross_sum(a: &[AlphaVector], b: &[AlphaVector], cap: usize) -> Result<Vec<AlphaVector>> {
    let needed = a.len() as u128 * b.len() as u128;
    if needed > cap as u128 {
        return Err(Error::ResourceLimit {
            what: "cross-sum",
            needed,
            cap: cap as u128,
        });
    }
    let mut out = Vec::with_capacity(needed as usize);
    for u in a {
        for v in b {
            out.push(AlphaVector {
                coeffs: u.coeffs.iter().zip(&v.coeffs).map(|(x, y)| x + y).collect(),
                action: u.action,
            });
        }
    }
    Ok(out)
}

/// Row-major coefficient matrix for the scans inside the LP loops.
struct Rows {
    n: usize,
    data: Vec<f64>,
}

impl Rows {
    fn new(n: usize) -> Self {
        Rows { n, data: Vec::new() }
    }

    fn of(set: &[AlphaVector], n: usize) -> Self {
        let mut r = Rows::new(n);
        set.iter().for_each(|v| r.push(&v.coeffs));
        r
    }

    fn push(&mut self, v: &[f64]) {
        self.data.extend_from_slice(v);
    }

    fn len(&self) -> usize {
        self.data.len() / self.n
    }

    fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    fn row(&self, k: usize) -> &[f64] {
        &self.data[k * self.n..(k + 1) * self.n]
    }

    fn iter(&self) -> std::slice::ChunksExact<'_, f64> {
        self.data.chunks_exact(self.n)
    }
}

/// Per-coordinate bounds `[lo_i, hi_i]` of the beliefs where `u` is within
/// `tol` of the minimum of `set`. `None` when that region is empty.
///
/// Each bound is `max ±p_i` over that region, found by cutting planes; the
/// cuts are shared across the `2n` programs since they describe the same
/// region.
/// Bounding box of the tolerance-widened region where `u` is minimal in
/// `set`, or `None` if that region is empty. `hints` holds indices into
/// `set` whose constraints seed the program; on return it holds the
/// constraints this region needed, which suit a neighbouring vector.
fn region_box(
    u: &[f64],
    set: &Rows,
    tol: f64,
    hints: &mut Vec<usize>,
) -> std::result::Result<Option<Vec<(f64, f64)>>, String> {
    let n = u.len();
    let cut = |k: usize| (u.iter().zip(set.row(k)).map(|(a, b)| a - b).collect::<Vec<f64>>(), tol);
    let mut used: Vec<usize> = hints.clone();
    let mut cuts: Vec<(Vec<f64>, f64)> = used.iter().map(|&k| cut(k)).collect();
    let mut bounds = Vec::with_capacity(n);
    for i in 0..n {
        let mut hi_lo = [0.0; 2];
        for (slot, sign) in [(0, 1.0), (1, -1.0)] {
            let mut c = vec![0.0; n];
            c[i] = sign;
            let solved = cutting_plane(
                n,
                &c,
                &mut cuts,
                |p, _| {
                    let pu = dot(p, u);
                    let mut worst = (f64::NEG_INFINITY, 0);
                    for (k, w) in set.iter().enumerate() {
                        let e = pu - dot(p, w) - tol;
                        if e > worst.0 {
                            worst = (e, k);
                        }
                    }
                    if worst.0 > 1e-12 {
                        if !used.contains(&worst.1) {
                            used.push(worst.1);
                        }
                        let (a, b) = cut(worst.1);
                        Step::Cut(a, b)
                    } else {
                        Step::Stop
                    }
                },
                set.len() + 1,
            )?;
            // A stalled value is still a bound: see `cutting_plane`.
            match solved {
                Some(r) => hi_lo[slot] = sign * r.value,
                None => {
                    *hints = used;
                    return Ok(None);
                }
            }
        }
        let [hi, lo] = hi_lo;
        bounds.push((lo.max(0.0), hi.min(1.0)));
    }
    const HINT_LIMIT: usize = 24;
    if used.len() > HINT_LIMIT {
        used.drain(..used.len() - HINT_LIMIT);
    }
    *hints = used;
    Ok(Some(bounds))
}

fn region_boxes(set: &[AlphaVector], tol: f64) -> Result<Vec<Option<Vec<(f64, f64)>>>> {
    // Fixed-size chunks carry hints from one vector to the next, so the
    // result does not depend on the thread count.
    const CHUNK: usize = 32;
    let rows = Rows::of(set, set.first().map_or(0, |v| v.coeffs.len()));
    let chunks: Vec<Result<Vec<_>>> = set
        .par_chunks(CHUNK)
        .enumerate()
        .map(|(c, chunk)| {
            let mut hints = Vec::new();
            chunk
                .iter()
                .enumerate()
                .map(|(i, u)| {
                    region_box(&u.coeffs, &rows, tol, &mut hints).map_err(|reason| Error::LpFailure {
                        vector_index: c * CHUNK + i,
                        reason,
                    })
                })
                .collect()
        })
        .collect();
    let mut out = Vec::with_capacity(set.len());
    for chunk in chunks {
        out.extend(chunk?);
    }
    Ok(out)
}

fn boxes_meet(a: &[(f64, f64)], b: &[(f64, f64)]) -> bool {
    const SLACK: f64 = 1e-9;
    a.iter().zip(b).all(|(x, y)| x.0 <= y.1 + SLACK && y.0 <= x.1 + SLACK)
}

/// Cross-sum restricted to pairs whose witness-region boxes intersect. Both
/// inputs must already be pruned.
fn screened_cross_sum(a: &[AlphaVector], b: &[AlphaVector], tol: f64, cap: usize) -> Result<Vec<AlphaVector>> {
    let boxes_a = region_boxes(a, tol)?;
    let boxes_b = region_boxes(b, tol)?;
    let pairs: Vec<(usize, usize)> = boxes_a
        .iter()
        .enumerate()
        .filter_map(|(i, ba)| ba.as_ref().map(|ba| (i, ba)))
        .flat_map(|(i, ba)| {
            boxes_b
                .iter()
                .enumerate()
                .filter(move |(_, bb)| bb.as_ref().is_some_and(|bb| boxes_meet(ba, bb)))
                .map(move |(j, _)| (i, j))
        })
        .collect();
    if pairs.len() > cap {
        return Err(Error::ResourceLimit {
            what: "cross-sum",
            needed: pairs.len() as u128,
            cap: cap as u128,
        });
    }
    Ok(pairs
        .into_iter()
        .map(|(i, j)| AlphaVector {
            coeffs: a[i].coeffs.iter().zip(&b[j].coeffs).map(|(x, y)| x + y).collect(),
            action: a[i].action,
        })
        .collect())
}

fn add_cost(vectors: &mut [AlphaVector], cost: &[f64]) {
    for v in vectors {
        v.coeffs.iter_mut().zip(cost).for_each(|(x, c)| *x += c);
    }
}

/// One exact, pruned backup producing the stage-`stage` set from `next`.
pub fn backup(model: &PomdpModel, next: &AlphaVectorSet, config: &SolveConfig, stage: usize) -> Result<AlphaVectorSet> {
    let prune_vecs = |v: Vec<AlphaVector>| -> Result<Vec<AlphaVector>> {
        Ok(prune(
            &AlphaVectorSet { vectors: v, stage },
            config.prune_mode,
            config.prune_tolerance,
        )?
        .vectors)
    };
    let per_action: Vec<Result<Vec<AlphaVector>>> = (0..model.n_actions)
        .into_par_iter()
        .map(|a| {
            let mut acc = prune_vecs(projected_set(model, next, config.discount, a, 0))?;
            for obs in 1..model.n_observations {
                let proj = prune_vecs(projected_set(model, next, config.discount, a, obs))?;
                let sum = match config.prune_mode {
                    PruneMode::ExactLp => screened_cross_sum(&acc, &proj, config.prune_tolerance, config.vector_cap)?,
                    PruneMode::DominanceOnly => cross_sum(&acc, &proj, config.vector_cap)?,
                };
                log::trace!(
                    "stage {stage} action {a} observation {obs}: {} x {} -> {} candidates",
                    acc.len(),
                    proj.len(),
                    sum.len()
                );
                acc = prune_vecs(sum)?;
            }
            add_cost(&mut acc, &model.stage_cost[a]);
            Ok(acc)
        })
        .collect();
    let mut union = Vec::new();
    for r in per_action {
        union.extend(r?);
    }
    let vectors = prune_vecs(union)?;
    Ok(AlphaVectorSet { vectors, stage })
}

/// The full unpruned backup of `next`: every action × every choice of
/// successor vector per observation. Used to check pruning.
pub fn backup_unpruned(model: &PomdpModel, next: &AlphaVectorSet, config: &SolveConfig, stage: usize) -> Result<AlphaVectorSet> {
    let per_action = (next.len() as u128).saturating_pow(model.n_observations as u32);
    let needed = per_action.saturating_mul(model.n_actions as u128);
    if needed > config.vector_cap as u128 {
        return Err(Error::ResourceLimit {
            what: "unpruned backup",
            needed,
            cap: config.vector_cap as u128,
        });
    }
    let mut union = Vec::with_capacity(needed as usize);
    for a in 0..model.n_actions {
        let mut acc = projected_set(model, next, config.discount, a, 0);
        for obs in 1..model.n_observations {
            let proj = projected_set(model, next, config.discount, a, obs);
            acc = cross_sum(&acc, &proj, config.vector_cap)?;
        }
        add_cost(&mut acc, &model.stage_cost[a]);
        union.extend(acc);
    }
    Ok(AlphaVectorSet { vectors: union, stage })
}

/// Minimum over the full unpruned backup of `next` at `belief`, without
/// enumerating it. The cross-sum minimum splits per observation:
///
/// ```text
/// min_a [ π·c(a) + Σ_θ min_{γ ∈ Γ'} π·g^{a,θ}(γ) ]
/// ```
pub fn lookahead_value(model: &PomdpModel, next: &AlphaVectorSet, discount: f64, belief: &Belief) -> Result<Decision> {
    model.check_belief(belief)?;
    let p = belief.as_slice();
    let q: Vec<f64> = (0..model.n_actions)
        .map(|a| {
            let future: f64 = (0..model.n_observations)
                .map(|obs| {
                    let m = projection(model, a, obs);
                    next.vectors
                        .iter()
                        .map(|g| dot(p, &project(&m, discount, &g.coeffs)))
                        .fold(f64::INFINITY, f64::min)
                })
                .sum();
            dot(p, &model.stage_cost[a]) + future
        })
        .collect();
    Ok(argmin_action(&q))
}

pub fn evaluate(stack: &PolicyStack, stage: usize, belief: &Belief) -> Result<Decision> {
    let set = stack.stage(stage)?;
    if let Some(v) = set.vectors.first() {
        if v.coeffs.len() != belief.len() {
            return Err(Error::DimensionMismatch(format!(
                "belief has {} entries, policy has {} states",
                belief.len(),
                v.coeffs.len()
            )));
        }
    }
    let (value, idx) = set.argmin(belief.as_slice());
    Ok(Decision {
        value,
        action: set.vectors[idx].action,
    })
}

/// Removes vectors that never attain the minimum.
///
/// `DominanceOnly` drops any vector `v` with another `w ≤ v + tolerance`
/// componentwise, keeping the earlier of two near-duplicates. `ExactLp`
/// follows that with Lark's filter: a vector survives only if a witness
/// belief exists where it beats every retained vector by more than
/// `tolerance`. Survivors keep their input order.
pub fn prune(set: &AlphaVectorSet, mode: PruneMode, tolerance: f64) -> Result<AlphaVectorSet> {
    let kept = dominance_filter(&set.vectors, tolerance);
    let kept = match mode {
        PruneMode::DominanceOnly => kept,
        PruneMode::ExactLp => witness_filter(&set.vectors, kept, tolerance)?,
    };
    Ok(AlphaVectorSet {
        vectors: kept.into_iter().map(|i| set.vectors[i].clone()).collect(),
        stage: set.stage,
    })
}

fn dominates(w: &[f64], v: &[f64], tol: f64) -> bool {
    w.iter().zip(v).all(|(a, b)| *a <= *b + tol)
}

fn dominance_filter(vectors: &[AlphaVector], tol: f64) -> Vec<usize> {
    let mut kept: Vec<usize> = Vec::new();
    for (i, v) in vectors.iter().enumerate() {
        if kept.iter().any(|&k| dominates(&vectors[k].coeffs, &v.coeffs, tol)) {
            continue;
        }
        kept.retain(|&k| !dominates(&v.coeffs, &vectors[k].coeffs, tol));
        kept.push(i);
    }
    kept.sort_unstable();
    kept
}

/// Best candidate at `p`; ties broken lexicographically on the coefficients
/// so that the winner lies on the lower envelope.
fn best_at(vectors: &[AlphaVector], candidates: &[usize], p: &[f64]) -> usize {
    let mut best = candidates[0];
    let mut best_val = dot(p, &vectors[best].coeffs);
    for &c in &candidates[1..] {
        let val = dot(p, &vectors[c].coeffs);
        let better = if is_tie(val, best_val) {
            lex_less(&vectors[c].coeffs, &vectors[best].coeffs)
        } else {
            val < best_val
        };
        if better {
            best = c;
            best_val = val;
        }
    }
    best
}

fn lex_less(a: &[f64], b: &[f64]) -> bool {
    for (x, y) in a.iter().zip(b) {
        if x < y {
            return true;
        }
        if x > y {
            return false;
        }
    }
    false
}

enum WitnessOutcome {
    /// A belief where the candidate beats every retained vector by more than
    /// the tolerance.
    Witness(Vec<f64>),
    Dominated,
}

enum Step {
    Stop,
    Cut(Vec<f64>, f64),
}

struct Relaxed {
    x: Vec<f64>,
    value: f64,
    stalled: bool,
}

/// Solves `max c·x` over `x = (p, extra…)` with `p` a belief, by constraint
/// generation. `examine(x, bound)` sees each relaxed optimum (whose value
/// bounds the full program from above) and either stops or returns a
/// violated constraint `a·x ≤ b` of the full program to add. Cuts persist
/// in `cuts` so related programs can reuse them. `None` when infeasible.
///
/// A cut that is already present means the relaxed optimum violates a
/// constraint it was given by up to the LP's feasibility tolerance. That
/// row's slack is basic, so its dual price is zero and the value still
/// equals a dual bound; only the point is unreliable. Such results are
/// flagged as stalled.
fn cutting_plane(
    n: usize,
    objective: &[f64],
    cuts: &mut Vec<(Vec<f64>, f64)>,
    mut examine: impl FnMut(&[f64], f64) -> Step,
    max_rounds: usize,
) -> std::result::Result<Option<Relaxed>, String> {
    let mut simplex_row = vec![0.0; objective.len()];
    simplex_row[..n].iter_mut().for_each(|v| *v = 1.0);
    let mut lp = LinearProgram {
        objective: objective.to_vec(),
        upper: std::mem::take(cuts),
        equal: vec![(simplex_row, 1.0)],
    };
    let mut result = Err(format!("no convergence after {max_rounds} rounds"));
    for _ in 0..=max_rounds {
        let (x, value) = match lp.maximize() {
            Ok(LpOutcome::Optimal { x, value, .. }) => (x, value),
            Ok(LpOutcome::Infeasible) => {
                result = Ok(None);
                break;
            }
            Ok(LpOutcome::Unbounded) => {
                result = Err("cutting-plane relaxation unbounded".into());
                break;
            }
            Err(e) => {
                result = Err(e.to_string());
                break;
            }
        };
        match examine(&x, value) {
            Step::Cut(a, b) => {
                if lp.upper.iter().any(|(r, rb)| *r == a && *rb == b) {
                    result = Ok(Some(Relaxed { x, value, stalled: true }));
                    break;
                }
                lp.upper.push((a, b));
            }
            Step::Stop => {
                result = Ok(Some(Relaxed { x, value, stalled: false }));
                break;
            }
        }
    }
    *cuts = lp.upper;
    result
}

/// Decides whether some belief `p` has `p·v + tol < p·w` for every `w` in
/// `against`, i.e. whether `max δ` s.t. `p·(v - w) + δ ≤ 0` exceeds `tol`.
///
/// `hints` holds indices into `against` used to seed the working set; on
/// return it holds the final working set, which suits a nearby candidate.
fn witness(v: &[f64], against: &Rows, tol: f64, hints: &mut Vec<usize>) -> std::result::Result<WitnessOutcome, String> {
    let n = v.len();
    if against.is_empty() {
        return Ok(WitnessOutcome::Witness(vec![1.0 / n as f64; n]));
    }
    // variables: p_0..p_{n-1}, δ⁺, δ⁻
    let mut objective = vec![0.0; n + 2];
    objective[n] = 1.0;
    objective[n + 1] = -1.0;
    let best_gap = |p: &[f64]| -> (f64, usize) {
        let pv = dot(p, v);
        let mut best = (f64::INFINITY, 0);
        for (k, w) in against.iter().enumerate() {
            let g = dot(p, w) - pv;
            if g < best.0 {
                best = (g, k);
            }
        }
        best
    };
    let cut = |k: usize| {
        let mut row: Vec<f64> = v.iter().zip(against.row(k)).map(|(a, b)| a - b).collect();
        row.extend([1.0, -1.0]);
        (row, 0.0)
    };
    // Seed with the hints plus the best retained vector at each vertex, so δ
    // is bounded from the first round.
    let mut working: Vec<usize> = hints.iter().copied().filter(|&k| k < against.len()).collect();
    for s in 0..n {
        let mut corner = vec![0.0; n];
        corner[s] = 1.0;
        let (_, k) = best_gap(&corner);
        if !working.contains(&k) {
            working.push(k);
        }
    }
    let mut cuts: Vec<(Vec<f64>, f64)> = working.iter().map(|&k| cut(k)).collect();
    let mut found: Option<Vec<f64>> = None;
    let relaxed = cutting_plane(
        n,
        &objective,
        &mut cuts,
        |x, bound| {
            if bound <= tol {
                return Step::Stop;
            }
            let p = &x[..n];
            let (g, k) = best_gap(p);
            if g > tol {
                found = Some(p.to_vec());
                return Step::Stop;
            }
            let delta = x[n] - x[n + 1];
            if g < delta - 1e-12 {
                if !working.contains(&k) {
                    working.push(k);
                }
                let (a, b) = cut(k);
                Step::Cut(a, b)
            } else {
                Step::Stop
            }
        },
        against.len() + 1,
    )?;
    const HINT_LIMIT: usize = 16;
    if working.len() > HINT_LIMIT {
        working.drain(..working.len() - HINT_LIMIT);
    }
    *hints = working;
    Ok(match (found, relaxed) {
        (Some(p), _) => WitnessOutcome::Witness(p),
        // Without a trustworthy bound the vector is kept: a spare vector
        // never changes the envelope, a missing one does.
        (None, Some(r)) if r.stalled => WitnessOutcome::Witness(r.x[..n].to_vec()),
        _ => WitnessOutcome::Dominated,
    })
}

fn witness_filter(vectors: &[AlphaVector], candidates: Vec<usize>, tol: f64) -> Result<Vec<usize>> {
    if candidates.len() <= 1 {
        return Ok(candidates);
    }
    let n = vectors[candidates[0]].coeffs.len();
    let mut frontier = candidates;
    let mut kept: Vec<usize> = Vec::new();
    let mut kept_rows = Rows::new(n);
    let mut hints = Vec::new();

    let take = |frontier: &mut Vec<usize>, kept: &mut Vec<usize>, kept_rows: &mut Rows, p: &[f64]| {
        let b = best_at(vectors, frontier, p);
        frontier.retain(|&i| i != b);
        kept.push(b);
        kept_rows.push(&vectors[b].coeffs);
    };
    for s in 0..n {
        if frontier.is_empty() {
            break;
        }
        let mut corner = vec![0.0; n];
        corner[s] = 1.0;
        // A vertex winner may already be kept; only add if it beats the kept set there.
        let b = best_at(vectors, &frontier, &corner);
        let kept_best = kept
            .iter()
            .map(|&k| dot(&corner, &vectors[k].coeffs))
            .fold(f64::INFINITY, f64::min);
        if dot(&corner, &vectors[b].coeffs) < kept_best - tol {
            take(&mut frontier, &mut kept, &mut kept_rows, &corner);
        }
    }

    while let Some(&candidate) = frontier.first() {
        let outcome = witness(&vectors[candidate].coeffs, &kept_rows, tol, &mut hints).map_err(|reason| Error::LpFailure {
            vector_index: candidate,
            reason,
        })?;
        match outcome {
            WitnessOutcome::Witness(p) => take(&mut frontier, &mut kept, &mut kept_rows, &p),
            WitnessOutcome::Dominated => {
                frontier.remove(0);
            }
        }
    }
    kept.sort_unstable();
    Ok(kept)
}

/// Direct recursion over the belief tree. Exponential in the horizon; kept
/// as an independent check of [`solve`] and [`evaluate`].
pub fn bruteforce_value(model: &PomdpModel, config: &SolveConfig, belief: &Belief) -> Result<Decision> {
    config.validate()?;
    model.check_belief(belief)?;
    let branching = (model.n_actions * model.n_observations) as u128;
    let leaves = branching.saturating_pow(config.horizon as u32);
    if leaves > BRUTEFORCE_LEAF_CAP {
        return Err(Error::ResourceLimit {
            what: "belief-tree leaves",
            needed: leaves,
            cap: BRUTEFORCE_LEAF_CAP,
        });
    }
    tree_value(model, config.discount, config.horizon, belief)
}

fn tree_value(model: &PomdpModel, discount: f64, remaining: usize, belief: &Belief) -> Result<Decision> {
    if remaining == 0 {
        return Ok(Decision {
            value: terminal_value(model, belief),
            action: None,
        });
    }
    let mut q = Vec::with_capacity(model.n_actions);
    for a in 0..model.n_actions {
        let mut total = dot(belief.as_slice(), &model.stage_cost[a]);
        let likelihoods = filter::observation_likelihoods(model, belief, a)?;
        let mut future = 0.0;
        for (obs, &l) in likelihoods.iter().enumerate() {
            if l <= 0.0 {
                continue;
            }
            let next = filter::step(model, belief, a, obs)?;
            future += l * tree_value(model, discount, remaining - 1, &next)?.value;
        }
        total += discount * future;
        q.push(total);
    }
    Ok(argmin_action(&q))
}

fn argmin_action(q: &[f64]) -> Decision {
    let best = q.iter().copied().fold(f64::INFINITY, f64::min);
    let action = q.iter().position(|&v| v <= best || is_tie(v, best)).expect("nonempty");
    Decision {
        value: best,
        action: Some(action),
    }
}

/// Finite-horizon tables for the fully observed chain.
#[derive(Debug, Clone, PartialEq)]
pub struct MdpPolicy {
    /// `values[k][i]` for stages `0..=horizon`.
    pub values: Vec<Vec<f64>>,
    /// `actions[k][i]` for stages `0..horizon`.
    pub actions: Vec<Vec<usize>>,
}

impl MdpPolicy {
    pub fn horizon(&self) -> usize {
        self.actions.len()
    }
}

pub fn solve_mdp(model: &PomdpModel, config: &SolveConfig) -> Result<MdpPolicy> {
    config.validate()?;
    let mut values = vec![model.terminal_cost.clone()];
    let mut actions = Vec::with_capacity(config.horizon);
    for _ in 0..config.horizon {
        let next = values.last().expect("terminal values present");
        let mut v = Vec::with_capacity(model.n_states);
        let mut u = Vec::with_capacity(model.n_states);
        for i in 0..model.n_states {
            let q: Vec<f64> = (0..model.n_actions)
                .map(|a| model.stage_cost[a][i] + config.discount * dot(&model.transition[a][i], next))
                .collect();
            let d = argmin_action(&q);
            v.push(d.value);
            u.push(d.action.expect("at least one action"));
        }
        values.push(v);
        actions.push(u);
    }
    values.reverse();
    actions.reverse();
    Ok(MdpPolicy { values, actions })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::healthcare_model;

    const SKIP: usize = 0;
    const APPOINTMENT: usize = 1;
    const TREATMENT: usize = 3;

    fn set(vs: &[&[f64]]) -> AlphaVectorSet {
        AlphaVectorSet {
            vectors: vs
                .iter()
                .map(|c| AlphaVector {
                    coeffs: c.to_vec(),
                    action: Some(0),
                })
                .collect(),
            stage: 0,
        }
    }

    fn coeffs(s: &AlphaVectorSet) -> Vec<Vec<f64>> {
        s.vectors.iter().map(|v| v.coeffs.clone()).collect()
    }

    #[test]
    fn dominance_examples() {
        let s = prune(&set(&[&[1.0, 1.0, 1.0], &[2.0, 2.0, 2.0]]), PruneMode::DominanceOnly, 1e-9).unwrap();
        assert_eq!(coeffs(&s), vec![vec![1.0, 1.0, 1.0]]);
        let s = prune(&set(&[&[2.0, 2.0], &[1.0, 1.0], &[1.0, 1.0]]), PruneMode::DominanceOnly, 1e-9).unwrap();
        assert_eq!(coeffs(&s), vec![vec![1.0, 1.0]]);
    }

    #[test]
    fn witness_pruning_examples() {
        let s = prune(&set(&[&[0.0, 10.0], &[10.0, 0.0], &[5.0, 5.0]]), PruneMode::ExactLp, 1e-9).unwrap();
        assert_eq!(coeffs(&s), vec![vec![0.0, 10.0], vec![10.0, 0.0]]);
        // dominance alone cannot remove [5, 5]
        let s = prune(&set(&[&[0.0, 10.0], &[10.0, 0.0], &[5.0, 5.0]]), PruneMode::DominanceOnly, 1e-9).unwrap();
        assert_eq!(s.len(), 3);
        let s = prune(&set(&[&[0.0, 10.0], &[10.0, 0.0], &[4.0, 4.0]]), PruneMode::ExactLp, 1e-9).unwrap();
        assert_eq!(s.len(), 3);
    }

    #[test]
    fn horizon_zero_is_terminal_only() {
        let m = healthcare_model();
        let stack = solve(&m, &SolveConfig::new(0, 1.0)).unwrap();
        assert_eq!(stack.per_stage.len(), 1);
        assert_eq!(stack.per_stage[0].vectors[0].coeffs, vec![0.0, 4.0, 30.0]);
        let d = evaluate(&stack, 0, &Belief::point(3, 2)).unwrap();
        assert_eq!(d, Decision { value: 30.0, action: None });
    }

    #[test]
    fn one_step_examples() {
        // min(5+30, 1+30, 4+30, 4+30) at stage 3; min(0+0.8, 1+0.8, 4+0, 4+0.8) at stage 1;
        // treatment 2 + 0.25·4 at stage 2.
        let m = healthcare_model();
        let stack = solve(&m, &SolveConfig::new(1, 1.0)).unwrap();
        let d = evaluate(&stack, 0, &Belief::point(3, 2)).unwrap();
        assert!((d.value - 31.0).abs() < 1e-12);
        assert_eq!(d.action, Some(APPOINTMENT));
        let d = evaluate(&stack, 0, &Belief::point(3, 0)).unwrap();
        assert!((d.value - 0.8).abs() < 1e-12);
        assert_eq!(d.action, Some(SKIP));
        let d = evaluate(&stack, 0, &Belief::point(3, 1)).unwrap();
        assert!((d.value - 3.0).abs() < 1e-12);
        assert_eq!(d.action, Some(TREATMENT));
        assert!(matches!(evaluate(&stack, 2, &Belief::uniform(3)), Err(Error::StageOutOfRange { .. })));
    }

    #[test]
    fn bruteforce_examples() {
        let m = healthcare_model();
        let d = bruteforce_value(&m, &SolveConfig::new(0, 1.0), &Belief::uniform(3)).unwrap();
        assert!((d.value - 34.0 / 3.0).abs() < 1e-12);
        assert_eq!(d.action, None);
        let d = bruteforce_value(&m, &SolveConfig::new(1, 1.0), &Belief::point(3, 2)).unwrap();
        assert!((d.value - 31.0).abs() < 1e-12);
        assert_eq!(d.action, Some(APPOINTMENT));
        assert!(matches!(
            bruteforce_value(&m, &SolveConfig::new(7, 1.0), &Belief::uniform(3)),
            Err(Error::ResourceLimit { .. })
        ));
    }

    #[test]
    fn mdp_examples() {
        let m = healthcare_model();
        let p = solve_mdp(&m, &SolveConfig::new(0, 1.0)).unwrap();
        assert_eq!(p.values, vec![vec![0.0, 4.0, 30.0]]);
        assert!(p.actions.is_empty());
        let p = solve_mdp(&m, &SolveConfig::new(1, 1.0)).unwrap();
        assert_eq!(p.actions[0][2], APPOINTMENT);
        assert!((p.values[0][2] - 31.0).abs() < 1e-12);
        let p = solve_mdp(&m, &SolveConfig::new(6, 1.0)).unwrap();
        assert_eq!(p.actions[0], vec![SKIP, TREATMENT, APPOINTMENT]);
    }

    #[test]
    fn cap_is_enforced() {
        let m = healthcare_model();
        let mut cfg = SolveConfig::new(3, 1.0);
        cfg.vector_cap = 2;
        assert!(matches!(solve(&m, &cfg), Err(Error::ResourceLimit { .. })));
    }

    #[test]
    fn lookahead_matches_pruned_backup() {
        let m = healthcare_model();
        let cfg = SolveConfig::new(3, 1.0);
        let stack = solve(&m, &cfg).unwrap();
        for w in [[1.0, 0.0, 0.0], [0.2, 0.5, 0.3], [0.0, 0.1, 0.9], [1.0, 1.0, 1.0]] {
            let b = Belief::new(w.to_vec()).unwrap();
            for k in 0..3 {
                let direct = lookahead_value(&m, &stack.per_stage[k + 1], 1.0, &b).unwrap();
                let pruned = evaluate(&stack, k, &b).unwrap();
                assert!((direct.value - pruned.value).abs() < 1e-9, "{direct:?} {pruned:?}");
            }
        }
        let terminal = &stack.per_stage[3];
        let d = lookahead_value(&m, terminal, 1.0, &Belief::point(3, 2)).unwrap();
        assert_eq!(d.action, Some(1));
        assert!((d.value - 31.0).abs() < 1e-12);
    }

    #[test]
    fn solve_is_deterministic() {
        let m = healthcare_model();
        let cfg = SolveConfig::new(4, 1.0);
        assert_eq!(solve(&m, &cfg).unwrap(), solve(&m, &cfg).unwrap());
    }
}
