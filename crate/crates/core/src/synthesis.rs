//! Result types shared by the synthesis pipelines.

use std::collections::{BTreeMap, VecDeque};
use std::fmt;

use crate::eval::Certificate;
use crate::model::{EdgeId, FiniteMemoryStrategy, GameGraph, Measure, ModelError, Player, StateId};
use crate::rational::{ExtRational, Rational};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Strictness {
    /// worst case < mu and expectation < nu (shortest path), or > for
    /// mean-payoff.
    Strict,
    /// worst case <= mu and expectation <= nu (shortest path only).
    NonStrict,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NoReason {
    /// Player 1 cannot guarantee the worst-case threshold at all.
    WorstCase,
    /// The worst case can be guaranteed, but not together with the
    /// expectation threshold.
    Expectation,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Decision {
    Yes,
    No(NoReason),
}

impl fmt::Display for Decision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Decision::Yes => write!(f, "yes"),
            Decision::No(NoReason::WorstCase) => write!(f, "no (worst case)"),
            Decision::No(NoReason::Expectation) => write!(f, "no (expectation)"),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum SynthesisError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("state set is not a winning end component for the threshold")]
    NotAWec,
    #[error("calibration budget exceeded (largest K tried: {max_k})")]
    CalibrationBudgetExceeded { max_k: u64 },
}

/// Outcome of a beyond-worst-case query.
#[derive(Clone, Debug)]
pub struct SynthesisResult {
    pub measure: Measure,
    pub decision: Decision,
    /// Optimal worst-case value at the initial state.
    pub worst_case_optimum: ExtRational,
    /// Best expectation compatible with the worst-case threshold (a
    /// supremum for mean-payoff).
    pub expectation_optimum: Option<ExtRational>,
    pub strategy: Option<FiniteMemoryStrategy>,
    pub certificate: Option<Certificate>,
    /// Memory bound the strategy was checked against.
    pub memory_bound: Option<usize>,
    /// Extra `key: value` facts for reports (parameters, sizes).
    pub details: Vec<(String, String)>,
}

/// Whether `value` beats `nu` in the measure's direction.
pub fn beats(measure: Measure, value: &ExtRational, nu: &Rational, strictness: Strictness) -> bool {
    let ExtRational::Finite(v) = value else { return false };
    match (measure, strictness) {
        (Measure::MeanPayoff, Strictness::Strict) => v > nu,
        (Measure::MeanPayoff, Strictness::NonStrict) => v >= nu,
        (Measure::ShortestPath, Strictness::Strict) => v < nu,
        (Measure::ShortestPath, Strictness::NonStrict) => v <= nu,
    }
}

/// Builds a Mealy machine by exploring the (memory, state) pairs reachable
/// from `starts` when player 1 follows `action` and the adversary may take
/// any edge. Memory ids follow discovery order with `starts[0]`'s memory
/// first; updates that keep the memory are left implicit.
pub(crate) fn explore<M: Ord + Clone>(
    g: &GameGraph,
    starts: &[(M, StateId)],
    mut action: impl FnMut(&M, StateId) -> EdgeId,
    mut next: impl FnMut(&M, EdgeId) -> M,
    name: impl Fn(&M) -> String,
) -> FiniteMemoryStrategy {
    let mut mem_ids: BTreeMap<M, usize> = BTreeMap::new();
    let mut mems: Vec<M> = Vec::new();
    let mut intern = |m: &M, mems: &mut Vec<M>| {
        *mem_ids.entry(m.clone()).or_insert_with(|| {
            mems.push(m.clone());
            mems.len() - 1
        })
    };
    let mut seen: BTreeMap<(usize, StateId), ()> = BTreeMap::new();
    let mut queue = VecDeque::new();
    let mut actions = Vec::new();
    let mut updates = Vec::new();
    for (m, s) in starts {
        let id = intern(m, &mut mems);
        if seen.insert((id, *s), ()).is_none() {
            queue.push_back((id, *s));
        }
    }
    while let Some((mid, s)) = queue.pop_front() {
        let m = mems[mid].clone();
        let edges: Vec<EdgeId> = match g.owner(s) {
            Player::P1 => {
                let e = action(&m, s);
                actions.push((mid, s, e));
                vec![e]
            }
            Player::P2 => g.out_edges(s).to_vec(),
        };
        for e in edges {
            let n = next(&m, e);
            let nid = intern(&n, &mut mems);
            if nid != mid {
                updates.push((mid, e, nid));
            }
            let t = g.edge(e).target;
            if seen.insert((nid, t), ()).is_none() {
                queue.push_back((nid, t));
            }
        }
    }
    let mut strategy = FiniteMemoryStrategy::new(mems.iter().map(&name).collect(), 0);
    for (m, s, e) in actions {
        strategy.set_action(m, s, e);
    }
    for (m, e, n) in updates {
        strategy.set_update(m, e, n);
    }
    strategy
}
