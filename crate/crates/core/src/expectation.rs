//! Optimal expectations in MDPs and exact evaluation of Markov chains, for the
//! mean-payoff and the shortest-path (total cost to target) measures.
//!
//! Everything is exact: chains are evaluated with the sparse absorbing solver,
//! optimization is policy iteration (multichain gain/bias iteration for the
//! mean-payoff, proper-policy iteration for the shortest path).

use std::collections::{BTreeMap, BTreeSet};

use num_traits::Zero;

use crate::graph_util::{bottom_sccs, reachable, reverse, sccs};
use crate::linsolve::solve_absorbing;
use crate::model::{EdgeId, MarkovChain, Mdp, StateId};
use crate::rational::{int, ExtRational, Rational};

/// End component with its optimal expected mean-payoff.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EcRecord {
    pub states: BTreeSet<StateId>,
    pub edges: BTreeSet<EdgeId>,
    pub value: Rational,
}

/// One action of the solver-level MDP. Stochastic states have exactly one.
#[derive(Clone, Debug)]
pub(crate) struct Choice {
    pub edge: Option<EdgeId>,
    pub reward: Rational,
    pub succ: Vec<(usize, Rational)>,
}

#[derive(Clone, Debug)]
pub(crate) struct SolverMdp {
    pub choices: Vec<Vec<Choice>>,
}

impl SolverMdp {
    pub fn from_mdp(mdp: &Mdp) -> Self {
        let g = mdp.game();
        let choices = (0..g.num_states())
            .map(|s| match mdp.distribution(s) {
                Some(dist) => {
                    let mut merged: BTreeMap<usize, Rational> = BTreeMap::new();
                    let mut reward = Rational::zero();
                    for (e, p) in dist {
                        let edge = g.edge(*e);
                        reward += p * int(edge.weight);
                        *merged.entry(edge.target).or_insert_with(Rational::zero) += p;
                    }
                    vec![Choice { edge: None, reward, succ: merged.into_iter().collect() }]
                }
                None => g
                    .out_edges(s)
                    .iter()
                    .map(|&e| {
                        let edge = g.edge(e);
                        Choice { edge: Some(e), reward: int(edge.weight), succ: vec![(edge.target, int(1))] }
                    })
                    .collect(),
            })
            .collect();
        SolverMdp { choices }
    }

    pub fn num_states(&self) -> usize {
        self.choices.len()
    }

    /// Sub-MDP on the kept states with the choices that stay inside.
    /// Returns it with the new -> old state map.
    pub fn restrict(&self, keep: &[bool]) -> (SolverMdp, Vec<usize>) {
        let map: Vec<usize> = (0..self.num_states()).filter(|&s| keep[s]).collect();
        let mut new_id = vec![usize::MAX; self.num_states()];
        for (i, &s) in map.iter().enumerate() {
            new_id[s] = i;
        }
        let choices = map
            .iter()
            .map(|&s| {
                self.choices[s]
                    .iter()
                    .filter(|c| c.succ.iter().all(|(w, _)| keep[*w]))
                    .map(|c| Choice {
                        edge: c.edge,
                        reward: c.reward.clone(),
                        succ: c.succ.iter().map(|(w, p)| (new_id[*w], p.clone())).collect(),
                    })
                    .collect()
            })
            .collect();
        (SolverMdp { choices }, map)
    }

    fn policy_chain(&self, policy: &[usize]) -> (Vec<Vec<(usize, Rational)>>, Vec<Rational>) {
        let rows = (0..self.num_states()).map(|s| self.choices[s][policy[s]].succ.clone()).collect();
        let reward = (0..self.num_states()).map(|s| self.choices[s][policy[s]].reward.clone()).collect();
        (rows, reward)
    }

    pub fn edge_strategy(&self, policy: &[usize]) -> Vec<Option<EdgeId>> {
        (0..self.num_states()).map(|s| self.choices[s][policy[s]].edge).collect()
    }
}

pub(crate) struct ChainEval {
    pub gain: Vec<Rational>,
    pub bias: Vec<Rational>,
}

fn positive_adj(rows: &[Vec<(usize, Rational)>]) -> Vec<Vec<usize>> {
    rows.iter().map(|r| r.iter().filter(|(_, p)| !p.is_zero()).map(|(w, _)| *w).collect()).collect()
}

/// Gain of every node of a chain given by rows and expected one-step
/// rewards; with `need_bias`, also a bias vector normalised to zero at the
/// lowest node of each recurrent class.
pub(crate) fn evaluate_chain(rows: &[Vec<(usize, Rational)>], reward: &[Rational], need_bias: bool) -> ChainEval {
    let n = rows.len();
    let adj = positive_adj(rows);
    let mut gain = vec![Rational::zero(); n];
    let mut bias = vec![Rational::zero(); n];
    let mut recurrent = vec![false; n];
    for class in bottom_sccs(&adj) {
        let x = class[0];
        let mut local = BTreeMap::new();
        for (i, &u) in class.iter().enumerate() {
            local.insert(u, i);
        }
        let mut sys_rows = Vec::with_capacity(class.len());
        let mut sys_rew = Vec::with_capacity(class.len());
        for &u in &class {
            let mut row: BTreeMap<usize, Rational> = BTreeMap::new();
            for (w, p) in &rows[u] {
                if *w != x && !p.is_zero() {
                    *row.entry(local[w]).or_insert_with(Rational::zero) += p;
                }
            }
            sys_rows.push(row);
            sys_rew.push(vec![reward[u].clone(), int(1)]);
        }
        let sol = solve_absorbing(sys_rows, sys_rew).expect("recurrent class returns to its reference node");
        let g = &sol[0][0] / &sol[0][1];
        for (i, &u) in class.iter().enumerate() {
            recurrent[u] = true;
            bias[u] = &sol[i][0] - &g * &sol[i][1];
            gain[u] = g.clone();
        }
    }
    let transient: Vec<usize> = (0..n).filter(|&u| !recurrent[u]).collect();
    if transient.is_empty() {
        return ChainEval { gain, bias };
    }
    let mut local = vec![usize::MAX; n];
    for (i, &u) in transient.iter().enumerate() {
        local[u] = i;
    }
    let build_rows = || {
        transient
            .iter()
            .map(|&u| {
                let mut row: BTreeMap<usize, Rational> = BTreeMap::new();
                for (w, p) in &rows[u] {
                    if !recurrent[*w] && !p.is_zero() {
                        *row.entry(local[*w]).or_insert_with(Rational::zero) += p;
                    }
                }
                row
            })
            .collect::<Vec<_>>()
    };
    let gain_rew = transient
        .iter()
        .map(|&u| {
            let mut acc = Rational::zero();
            for (w, p) in &rows[u] {
                if recurrent[*w] {
                    acc += p * &gain[*w];
                }
            }
            vec![acc]
        })
        .collect();
    let sol = solve_absorbing(build_rows(), gain_rew).expect("transient nodes are left almost surely");
    for (i, &u) in transient.iter().enumerate() {
        gain[u] = sol[i][0].clone();
    }
    if need_bias {
        let bias_rew = transient
            .iter()
            .map(|&u| {
                let mut acc = &reward[u] - &gain[u];
                for (w, p) in &rows[u] {
                    if recurrent[*w] {
                        acc += p * &bias[*w];
                    }
                }
                vec![acc]
            })
            .collect();
        let sol = solve_absorbing(build_rows(), bias_rew).expect("transient nodes are left almost surely");
        for (i, &u) in transient.iter().enumerate() {
            bias[u] = sol[i][0].clone();
        }
    }
    ChainEval { gain, bias }
}

fn chain_rows(mc: &MarkovChain) -> (Vec<Vec<(usize, Rational)>>, Vec<Rational>) {
    let mut rows = Vec::with_capacity(mc.num_states());
    let mut reward = Vec::with_capacity(mc.num_states());
    for row in &mc.rows {
        let mut merged: BTreeMap<usize, Rational> = BTreeMap::new();
        let mut r = Rational::zero();
        for t in row {
            r += &t.prob * int(t.weight);
            *merged.entry(t.target).or_insert_with(Rational::zero) += &t.prob;
        }
        rows.push(merged.into_iter().collect());
        reward.push(r);
    }
    (rows, reward)
}

/// Expected mean-payoff of every node of the chain.
pub fn mc_expected_mp_all(mc: &MarkovChain) -> Vec<Rational> {
    let (rows, reward) = chain_rows(mc);
    evaluate_chain(&rows, &reward, false).gain
}

/// Exact expected mean-payoff from the chain's initial node.
pub fn mc_expected_mp(mc: &MarkovChain) -> Rational {
    mc_expected_mp_all(mc).swap_remove(mc.initial)
}

/// Exact expected cost accumulated before the first visit to a node whose
/// game state is in `targets`; infinite when that visit is not almost sure.
pub fn mc_expected_total_cost(mc: &MarkovChain, targets: &BTreeSet<StateId>) -> ExtRational {
    let n = mc.num_states();
    let is_target: Vec<bool> = mc.labels.iter().map(|(_, s)| targets.contains(s)).collect();
    if is_target[mc.initial] {
        return ExtRational::Finite(Rational::zero());
    }
    let adj: Vec<Vec<usize>> = (0..n)
        .map(|u| {
            if is_target[u] {
                Vec::new()
            } else {
                mc.rows[u].iter().filter(|t| !t.prob.is_zero()).map(|t| t.target).collect()
            }
        })
        .collect();
    let rev = reverse(&adj);
    let can_reach = reachable(&rev, (0..n).filter(|&u| is_target[u]));
    let doomed = reachable(&rev, (0..n).filter(|&u| !can_reach[u]));
    if doomed[mc.initial] {
        return ExtRational::Infinite;
    }
    let live = reachable(&adj, [mc.initial]);
    let nodes: Vec<usize> = (0..n).filter(|&u| live[u] && !is_target[u]).collect();
    let mut local = vec![usize::MAX; n];
    for (i, &u) in nodes.iter().enumerate() {
        local[u] = i;
    }
    let mut rows = Vec::with_capacity(nodes.len());
    let mut rewards = Vec::with_capacity(nodes.len());
    for &u in &nodes {
        let mut row: BTreeMap<usize, Rational> = BTreeMap::new();
        let mut r = Rational::zero();
        for t in &mc.rows[u] {
            r += &t.prob * int(t.weight);
            if !is_target[t.target] && !t.prob.is_zero() {
                *row.entry(local[t.target]).or_insert_with(Rational::zero) += &t.prob;
            }
        }
        rows.push(row);
        rewards.push(vec![r]);
    }
    let sol = solve_absorbing(rows, rewards).expect("target is reached almost surely");
    ExtRational::Finite(sol[local[mc.initial]][0].clone())
}

/// Maximal end components inside the states flagged in `allowed`.
pub(crate) fn mec_states(mdp: &Mdp, allowed: &[bool]) -> Vec<Vec<StateId>> {
    let g = mdp.game();
    let enabled: Vec<Vec<StateId>> = (0..g.num_states())
        .map(|s| mdp.enabled_edges(s).into_iter().map(|e| g.edge(e).target).collect())
        .collect();
    let mut work: Vec<Vec<StateId>> = vec![(0..g.num_states()).filter(|&s| allowed[s]).collect()];
    let mut found = Vec::new();
    let mut in_part = vec![false; g.num_states()];
    while let Some(part) = work.pop() {
        for &s in &part {
            in_part[s] = true;
        }
        loop {
            let mut changed = false;
            for &s in &part {
                if !in_part[s] {
                    continue;
                }
                let keep = if mdp.is_stochastic(s) {
                    enabled[s].iter().all(|&t| in_part[t])
                } else {
                    enabled[s].iter().any(|&t| in_part[t])
                };
                if !keep {
                    in_part[s] = false;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        let remaining: Vec<StateId> = part.iter().copied().filter(|&s| in_part[s]).collect();
        for &s in &part {
            in_part[s] = false;
        }
        if remaining.is_empty() {
            continue;
        }
        let mut local = BTreeMap::new();
        for (i, &s) in remaining.iter().enumerate() {
            local.insert(s, i);
        }
        let adj: Vec<Vec<usize>> = remaining
            .iter()
            .map(|s| enabled[*s].iter().filter_map(|t| local.get(t).copied()).collect())
            .collect();
        let comps = sccs(&adj);
        if comps.len() == 1 {
            found.push(remaining);
        } else {
            for c in comps {
                work.push(c.into_iter().map(|i| remaining[i]).collect());
            }
        }
    }
    found.sort();
    found
}

fn ec_edges(mdp: &Mdp, states: &BTreeSet<StateId>) -> BTreeSet<EdgeId> {
    let g = mdp.game();
    states
        .iter()
        .flat_map(|&s| mdp.enabled_edges(s))
        .filter(|&e| states.contains(&g.edge(e).target))
        .collect()
}

/// Optimal gain inside an end component, with a memoryless strategy that
/// never leaves it (indexed by original state; `None` outside the EC and at
/// stochastic states).
pub(crate) fn ec_optimal(mdp: &Mdp, solver: &SolverMdp, states: &BTreeSet<StateId>) -> (Rational, Vec<Option<EdgeId>>) {
    let keep: Vec<bool> = (0..solver.num_states()).map(|s| states.contains(&s)).collect();
    let (sub, map) = solver.restrict(&keep);
    assert!(sub.choices.iter().all(|c| !c.is_empty()), "not an end component");
    let (gain, policy) = max_gain_pi(&sub, vec![0; sub.num_states()]);
    let value = gain[0].clone();
    debug_assert!(gain.iter().all(|g| *g == value), "gain varies inside an end component");
    let mut strategy = vec![None; mdp.game().num_states()];
    for (i, e) in sub.edge_strategy(&policy).into_iter().enumerate() {
        strategy[map[i]] = e;
    }
    (value, strategy)
}

/// Maximal end components with their optimal gains.
pub fn mec_decomposition(mdp: &Mdp) -> Vec<EcRecord> {
    let solver = SolverMdp::from_mdp(mdp);
    let all = vec![true; mdp.game().num_states()];
    mec_states(mdp, &all)
        .into_iter()
        .map(|states| {
            let states: BTreeSet<StateId> = states.into_iter().collect();
            let (value, _) = ec_optimal(mdp, &solver, &states);
            let edges = ec_edges(mdp, &states);
            EcRecord { states, edges, value }
        })
        .collect()
}

pub(crate) fn ec_record(mdp: &Mdp, states: BTreeSet<StateId>, value: Rational) -> EcRecord {
    let edges = ec_edges(mdp, &states);
    EcRecord { states, edges, value }
}

/// Multichain policy iteration maximising the gain. Ties keep the current
/// action, then the lowest index.
pub(crate) fn max_gain_pi(m: &SolverMdp, mut policy: Vec<usize>) -> (Vec<Rational>, Vec<usize>) {
    loop {
        let (rows, reward) = m.policy_chain(&policy);
        let ChainEval { gain, bias } = evaluate_chain(&rows, &reward, true);
        let expect = |c: &Choice, v: &[Rational]| -> Rational {
            c.succ.iter().fold(Rational::zero(), |acc, (w, p)| acc + p * &v[*w])
        };
        let mut changed = false;
        for s in 0..m.num_states() {
            let cs = &m.choices[s];
            if cs.len() <= 1 {
                continue;
            }
            let vals: Vec<Rational> = cs.iter().map(|c| expect(c, &gain)).collect();
            let best = vals.iter().max().unwrap().clone();
            if vals[policy[s]] < best {
                policy[s] = vals.iter().position(|v| *v == best).unwrap();
                changed = true;
            }
        }
        if changed {
            continue;
        }
        for s in 0..m.num_states() {
            let cs = &m.choices[s];
            if cs.len() <= 1 {
                continue;
            }
            let gvals: Vec<Rational> = cs.iter().map(|c| expect(c, &gain)).collect();
            let top = &gvals[policy[s]];
            let mut best: Option<(usize, Rational)> = None;
            for (a, c) in cs.iter().enumerate() {
                if gvals[a] != *top {
                    continue;
                }
                let v = &c.reward + expect(c, &bias);
                if best.as_ref().is_none_or(|(_, b)| v > *b) {
                    best = Some((a, v));
                }
            }
            let (a, v) = best.unwrap();
            let cur = &cs[policy[s]].reward + expect(&cs[policy[s]], &bias);
            if v > cur {
                policy[s] = a;
                changed = true;
            }
        }
        if !changed {
            return (gain, policy);
        }
    }
}

/// States from which `targets` can be reached almost surely by some strategy,
/// and for each of them the choices that keep this possible.
pub(crate) fn almost_sure_reach(m: &SolverMdp, targets: &[bool]) -> (Vec<bool>, Vec<Vec<usize>>) {
    let n = m.num_states();
    let mut alive = vec![true; n];
    loop {
        let allowed: Vec<Vec<usize>> = (0..n)
            .map(|s| {
                if !alive[s] {
                    return Vec::new();
                }
                (0..m.choices[s].len())
                    .filter(|&a| m.choices[s][a].succ.iter().all(|(w, p)| p.is_zero() || alive[*w]))
                    .collect()
            })
            .collect();
        let mut reach = targets.to_vec();
        loop {
            let mut changed = false;
            for s in 0..n {
                if reach[s] || !alive[s] {
                    continue;
                }
                let hit = allowed[s]
                    .iter()
                    .any(|&a| m.choices[s][a].succ.iter().any(|(w, p)| !p.is_zero() && reach[*w]));
                if hit {
                    reach[s] = true;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        let next: Vec<bool> = (0..n).map(|s| alive[s] && reach[s]).collect();
        if next == alive {
            return (alive, allowed);
        }
        alive = next;
    }
}

/// Proper-policy iteration minimising the expected total cost to `targets`.
/// States outside the almost-sure reach set get an infinite value.
pub(crate) fn min_cost_pi(m: &SolverMdp, targets: &[bool]) -> (Vec<ExtRational>, Vec<usize>) {
    let n = m.num_states();
    let (alive, allowed) = almost_sure_reach(m, targets);

    // Seed with a proper policy: step towards the target layer by layer.
    let mut policy = vec![0usize; n];
    let mut dist = vec![usize::MAX; n];
    for s in 0..n {
        if targets[s] {
            dist[s] = 0;
        }
    }
    let mut layer = 0;
    loop {
        let mut next = Vec::new();
        for s in 0..n {
            if dist[s] != usize::MAX || !alive[s] {
                continue;
            }
            if let Some(&a) = allowed[s].iter().find(|&&a| {
                m.choices[s][a].succ.iter().any(|(w, p)| !p.is_zero() && dist[*w] <= layer)
            }) {
                next.push((s, a));
            }
        }
        if next.is_empty() {
            break;
        }
        for (s, a) in next {
            dist[s] = layer + 1;
            policy[s] = a;
        }
        layer += 1;
    }

    let live: Vec<usize> = (0..n).filter(|&s| alive[s] && !targets[s]).collect();
    let mut local = vec![usize::MAX; n];
    for (i, &s) in live.iter().enumerate() {
        local[s] = i;
    }
    let mut values = vec![Rational::zero(); n];
    loop {
        let rows = live
            .iter()
            .map(|&s| {
                let mut row: BTreeMap<usize, Rational> = BTreeMap::new();
                for (w, p) in &m.choices[s][policy[s]].succ {
                    if !targets[*w] && !p.is_zero() {
                        *row.entry(local[*w]).or_insert_with(Rational::zero) += p;
                    }
                }
                row
            })
            .collect();
        let rewards = live.iter().map(|&s| vec![m.choices[s][policy[s]].reward.clone()]).collect();
        let sol = solve_absorbing(rows, rewards).expect("policy iteration keeps policies proper");
        for (i, &s) in live.iter().enumerate() {
            values[s] = sol[i][0].clone();
        }
        let mut changed = false;
        for &s in &live {
            if allowed[s].len() <= 1 {
                continue;
            }
            let q = |a: usize| {
                let c = &m.choices[s][a];
                c.succ.iter().fold(c.reward.clone(), |acc, (w, p)| acc + p * &values[*w])
            };
            let cur = q(policy[s]);
            let mut best: Option<(usize, Rational)> = None;
            for &a in &allowed[s] {
                let v = q(a);
                if best.as_ref().is_none_or(|(_, b)| v < *b) {
                    best = Some((a, v));
                }
            }
            let (a, v) = best.unwrap();
            if v < cur {
                policy[s] = a;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    let out = (0..n)
        .map(|s| if alive[s] { ExtRational::Finite(values[s].clone()) } else { ExtRational::Infinite })
        .collect();
    (out, policy)
}

/// Optimal expected mean-payoff per state, with a memoryless witness.
#[derive(Clone, Debug)]
pub struct MpOptimum {
    pub values: Vec<Rational>,
    pub strategy: Vec<Option<EdgeId>>,
    pub mecs: Vec<EcRecord>,
}

/// Maximal expected mean-payoff. MEC gains are computed first and seed the
/// global policy iteration.
pub fn expected_mp_optimal(mdp: &Mdp) -> MpOptimum {
    let solver = SolverMdp::from_mdp(mdp);
    let n = solver.num_states();
    let all = vec![true; n];
    let mut seed = vec![0usize; n];
    let mut mecs = Vec::new();
    for states in mec_states(mdp, &all) {
        let states: BTreeSet<StateId> = states.into_iter().collect();
        let (value, inner) = ec_optimal(mdp, &solver, &states);
        for &s in &states {
            if let Some(e) = inner[s] {
                seed[s] = solver.choices[s].iter().position(|c| c.edge == Some(e)).unwrap();
            }
        }
        mecs.push(ec_record(mdp, states, value));
    }
    let (values, policy) = max_gain_pi(&solver, seed);
    MpOptimum { values, strategy: solver.edge_strategy(&policy), mecs }
}

/// Minimal expected cost to reach the target set, with a memoryless witness.
#[derive(Clone, Debug)]
pub struct SspOptimum {
    pub values: Vec<ExtRational>,
    pub strategy: Vec<Option<EdgeId>>,
}

pub fn expected_ssp_optimal(mdp: &Mdp, targets: &BTreeSet<StateId>) -> SspOptimum {
    let solver = SolverMdp::from_mdp(mdp);
    let is_target: Vec<bool> = (0..solver.num_states()).map(|s| targets.contains(&s)).collect();
    let (values, policy) = min_cost_pi(&solver, &is_target);
    SspOptimum { values, strategy: solver.edge_strategy(&policy) }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{apply_model, ChainTransition, GameGraph, Player, StochasticModel};
    use crate::rational::ratio;

    fn ct(target: usize, prob: Rational, weight: i64) -> ChainTransition {
        ChainTransition { target, prob, weight }
    }

    /// a (P1): a->b 0, optionally a->a 1; b (P2): b->a 6 | b->a 0, each 1/2.
    fn ab_mdp(with_loop: bool) -> Mdp {
        let mut g = GameGraph::new();
        let a = g.add_state("a", Player::P1);
        let b = g.add_state("b", Player::P2);
        g.add_edge(a, b, 0);
        if with_loop {
            g.add_edge(a, a, 1);
        }
        let hi = g.add_edge(b, a, 6);
        let lo = g.add_edge(b, a, 0);
        let mut m = StochasticModel::new();
        m.set_row(b, vec![(hi, ratio(1, 2)), (lo, ratio(1, 2))]);
        apply_model(&g, &m).unwrap()
    }

    fn small_sp_game_mdp() -> Mdp {
        let mut g = GameGraph::new();
        let s1 = g.add_state("s1", Player::P1);
        let s2 = g.add_state("s2", Player::P2);
        let s3 = g.add_state("s3", Player::P1);
        g.add_edge(s1, s2, 1);
        let back = g.add_edge(s2, s1, 1);
        let fwd = g.add_edge(s2, s3, 1);
        g.add_edge(s1, s3, 5);
        g.add_edge(s3, s3, 1);
        let mut m = StochasticModel::new();
        m.set_row(s2, vec![(back, ratio(1, 2)), (fwd, ratio(1, 2))]);
        apply_model(&g, &m).unwrap()
    }

    #[test]
    fn deterministic_cycle_mean() {
        let mc = MarkovChain::from_rows(vec![vec![ct(1, int(1), 2)], vec![ct(0, int(1), 4)]], 0);
        assert_eq!(mc_expected_mp(&mc), int(3));
    }

    #[test]
    fn absorbing_zero_loop() {
        let mc = MarkovChain::from_rows(
            vec![vec![ct(1, ratio(1, 2), 10), ct(0, ratio(1, 2), 3)], vec![ct(1, int(1), 0)]],
            0,
        );
        assert_eq!(mc_expected_mp(&mc), int(0));
    }

    #[test]
    fn mixture_of_two_bottom_classes() {
        let mc = MarkovChain::from_rows(
            vec![
                vec![ct(1, ratio(1, 4), 0), ct(2, ratio(3, 4), 0)],
                vec![ct(1, int(1), 8)],
                vec![ct(2, int(1), -4)],
            ],
            0,
        );
        assert_eq!(mc_expected_mp(&mc), int(-1));
    }

    #[test]
    fn single_stochastic_self_loop() {
        let mut g = GameGraph::new();
        let s = g.add_state("s", Player::P2);
        g.add_edge(s, s, 4);
        let mdp = apply_model(&g, &StochasticModel::new()).unwrap();
        let opt = expected_mp_optimal(&mdp);
        assert_eq!(opt.values[0], int(4));
    }

    #[test]
    fn ab_gain_is_three_halves() {
        let opt = expected_mp_optimal(&ab_mdp(false));
        assert_eq!(opt.values, vec![ratio(3, 2), ratio(3, 2)]);
        let opt = expected_mp_optimal(&ab_mdp(true));
        assert_eq!(opt.values[0], ratio(3, 2));
        assert_eq!(opt.strategy[0], Some(0));
        assert_eq!(opt.mecs.len(), 1);
        assert_eq!(opt.mecs[0].value, ratio(3, 2));
    }

    #[test]
    fn small_sp_game_mec_is_the_target_only() {
        let mecs = mec_decomposition(&small_sp_game_mdp());
        assert_eq!(mecs.len(), 1);
        assert_eq!(mecs[0].states, BTreeSet::from([2]));
        assert_eq!(mecs[0].value, int(1));
    }

    #[test]
    fn strongly_connected_one_player_graph_is_one_mec() {
        let mut g = GameGraph::new();
        for i in 0..4 {
            g.add_state(format!("q{i}"), Player::P1);
        }
        for i in 0..4 {
            g.add_edge(i, (i + 1) % 4, i as i64);
        }
        g.add_edge(0, 2, 7);
        let mdp = apply_model(&g, &StochasticModel::new()).unwrap();
        let mecs = mec_decomposition(&mdp);
        assert_eq!(mecs.len(), 1);
        assert_eq!(mecs[0].states.len(), 4);
    }

    #[test]
    fn small_sp_game_ssp_optimum_is_four() {
        let opt = expected_ssp_optimal(&small_sp_game_mdp(), &BTreeSet::from([2]));
        assert_eq!(opt.values[0], ExtRational::Finite(int(4)));
        assert_eq!(opt.values[2], ExtRational::Finite(int(0)));
        assert_eq!(opt.strategy[0], Some(0));
    }

    #[test]
    fn unreachable_target_costs_infinity() {
        let mc = MarkovChain::from_rows(
            vec![vec![ct(1, ratio(1, 2), 1), ct(2, ratio(1, 2), 1)], vec![ct(1, int(1), 1)], vec![ct(2, int(1), 1)]],
            0,
        );
        assert_eq!(mc_expected_total_cost(&mc, &BTreeSet::from([2])), ExtRational::Infinite);
        assert_eq!(
            mc_expected_total_cost(&mc, &BTreeSet::from([1, 2])),
            ExtRational::Finite(int(1))
        );
    }
}
