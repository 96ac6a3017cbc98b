//! Winning / losing end components for the worst-case threshold.

use std::collections::BTreeSet;

use crate::expectation::{ec_optimal, ec_record, mec_states, EcRecord, SolverMdp};
use crate::model::{apply_model, EdgeId, GameGraph, Mdp, ModelError, StateId, StochasticModel};
use crate::rational::{int, Rational};
use crate::worst_case::solve_mp_game;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Winning,
    Losing,
}

#[derive(Clone, Debug)]
pub struct EcClassification {
    pub ec: EcRecord,
    pub verdict: Verdict,
    /// Minimal worst-case value over the EC's states, the adversary
    /// controlling every stochastic state but confined to internal edges.
    pub worst_case_value: Rational,
    /// Memoryless player-1 strategy staying in the EC (indexed by game
    /// state, `Some` exactly at the EC's player-1 states). Winning only.
    pub witness: Option<Vec<Option<EdgeId>>>,
}

/// Per-state values and player-1 choices, `None` outside the subgame.
type RestrictedSolution = (Vec<Option<Rational>>, Vec<Option<EdgeId>>);

/// Worst-case values of the game restricted to `states`, every edge leaving
/// the set removed. Returned per original state (`None` outside the set),
/// with player 1's optimal strategy mapped back to original edges.
fn restricted_values(g: &GameGraph, states: &BTreeSet<StateId>) -> Option<RestrictedSolution> {
    let keep: Vec<bool> = (0..g.num_states()).map(|s| states.contains(&s)).collect();
    let first = *states.iter().next()?;
    let (sub, state_map, edge_map) = g.subgame(&keep, |_| true, first);
    if (0..sub.num_states()).any(|s| sub.out_edges(s).is_empty()) {
        return None;
    }
    let table = solve_mp_game(&sub);
    let mut values = vec![None; g.num_states()];
    let mut strategy = vec![None; g.num_states()];
    for (i, &s) in state_map.iter().enumerate() {
        values[s] = Some(table.values[i].clone());
        strategy[s] = table.p1_strategy[i].map(|e| edge_map[e]);
    }
    Some((values, strategy))
}

/// Decides whether player 1 can stay in `ec` forever while keeping the
/// mean-payoff strictly above `mu` against any adversary.
pub fn classify_ec(g: &GameGraph, ec: &EcRecord, mu: i64) -> EcClassification {
    let Some((values, strategy)) = restricted_values(g, &ec.states) else {
        // a player-1 state without internal edge: cannot stay
        return EcClassification {
            ec: ec.clone(),
            verdict: Verdict::Losing,
            worst_case_value: int(mu),
            witness: None,
        };
    };
    let worst = ec.states.iter().map(|&s| values[s].clone().unwrap()).min().expect("EC is nonempty");
    let winning = worst > int(mu);
    EcClassification {
        ec: ec.clone(),
        verdict: if winning { Verdict::Winning } else { Verdict::Losing },
        worst_case_value: worst,
        witness: winning.then_some(strategy),
    }
}

/// Inclusion-maximal winning end components of `apply_model(g, m)`.
pub fn maximal_wecs(g: &GameGraph, m: &StochasticModel, mu: i64) -> Result<Vec<EcRecord>, ModelError> {
    let mdp = apply_model(g, m)?;
    let all = vec![true; g.num_states()];
    Ok(maximal_wecs_within(&mdp, &all, mu))
}

/// Maximal winning end components among the states flagged in `allowed`.
///
/// Each losing MEC loses its whole non-winning region (states of value at most
/// `mu` in the restricted game) and the rest is decomposed again.
pub fn maximal_wecs_within(mdp: &Mdp, allowed: &[bool], mu: i64) -> Vec<EcRecord> {
    let g = mdp.game();
    let solver = SolverMdp::from_mdp(mdp);
    let mut work = mec_states(mdp, allowed);
    let mut found = Vec::new();
    while let Some(part) = work.pop() {
        let states: BTreeSet<StateId> = part.into_iter().collect();
        let winning_states: Vec<bool> = match restricted_values(g, &states) {
            Some((values, _)) => (0..g.num_states()).map(|s| values[s].as_ref().is_some_and(|v| *v > int(mu))).collect(),
            None => vec![false; g.num_states()],
        };
        if states.iter().all(|&s| winning_states[s]) {
            let (value, _) = ec_optimal(mdp, &solver, &states);
            found.push(ec_record(mdp, states, value));
        } else {
            work.extend(mec_states(mdp, &winning_states));
        }
    }
    found.sort_by(|a, b| a.states.cmp(&b.states));
    found
}
