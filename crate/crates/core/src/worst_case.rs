//! Purely adversarial analysis: attractors, mean-payoff game values, worst-case
//! shortest-path costs and minimum cycle means.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use num_bigint::BigInt;

use crate::graph_util::{reachable, sccs};
use crate::model::{EdgeId, GameGraph, Player, StateId};
use crate::rational::{ExtRational, Rational};

/// Per-state values with a memoryless strategy for each player
/// (`Some(edge)` exactly at the states the player owns).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GameValueTable<V> {
    pub values: Vec<V>,
    pub p1_strategy: Vec<Option<EdgeId>>,
    pub p2_strategy: Vec<Option<EdgeId>>,
}

fn predecessors(g: &GameGraph) -> Vec<Vec<StateId>> {
    let mut pred = vec![Vec::new(); g.num_states()];
    for e in g.edges() {
        pred[e.target].push(e.source);
    }
    pred
}

/// States from which `player` can force a visit to `target`.
pub fn attractor(g: &GameGraph, target: &BTreeSet<StateId>, player: Player) -> BTreeSet<StateId> {
    let mask: Vec<bool> = (0..g.num_states()).map(|s| target.contains(&s)).collect();
    attractor_mask(g, &mask, player).into_iter().enumerate().filter(|(_, b)| *b).map(|(s, _)| s).collect()
}

pub(crate) fn attractor_mask(g: &GameGraph, target: &[bool], player: Player) -> Vec<bool> {
    let pred = predecessors(g);
    let mut inside = target.to_vec();
    let mut remaining: Vec<usize> = (0..g.num_states()).map(|s| g.out_edges(s).len()).collect();
    let mut queue: VecDeque<StateId> = (0..g.num_states()).filter(|&s| inside[s]).collect();
    while let Some(t) = queue.pop_front() {
        for &s in &pred[t] {
            if inside[s] {
                continue;
            }
            if g.owner(s) == player {
                inside[s] = true;
                queue.push_back(s);
            } else {
                remaining[s] -= 1;
                if remaining[s] == 0 {
                    inside[s] = true;
                    queue.push_back(s);
                }
            }
        }
    }
    inside
}

/// Mean-payoff game values (inf-limit semantics, player 1 maximises) with
/// optimal memoryless strategies for both players.
///
/// Values come from value iteration run for `4 n^3 W` steps, after which each
/// value is the unique fraction with denominator at most `n` near `v_k / k`.
/// Strategies are then read off an energy progress measure computed on each
/// value class with weights shifted by the class value, so every cycle of the
/// player-1 strategy has mean at least the value of the states it visits (and
/// symmetrically for player 2).
pub fn solve_mp_game(g: &GameGraph) -> GameValueTable<Rational> {
    let n = g.num_states() as i128;
    let w_max = g.max_abs_weight().max(1) as i128;
    let steps = 4 * n * n * n * w_max;
    let mut v = vec![0i128; g.num_states()];
    let mut next = v.clone();
    for _ in 0..steps {
        for s in 0..g.num_states() {
            let it = g.out_edges(s).iter().map(|&e| {
                let edge = g.edge(e);
                edge.weight as i128 + v[edge.target]
            });
            next[s] = match g.owner(s) {
                Player::P1 => it.max().expect("non-blocking game"),
                Player::P2 => it.min().expect("non-blocking game"),
            };
        }
        std::mem::swap(&mut v, &mut next);
    }
    let values: Vec<Rational> = v.iter().map(|&vk| recover_value(vk, steps, n, w_max)).collect();
    let p1_strategy = class_strategies(g, &values, Player::P1);
    let p2_strategy = class_strategies(g, &values, Player::P2);
    GameValueTable { values, p1_strategy, p2_strategy }
}

/// The unique p/q with q <= n in [(vk - 2nW)/k, (vk + 2nW)/k].
fn recover_value(vk: i128, k: i128, n: i128, w: i128) -> Rational {
    let lo = vk - 2 * n * w;
    let hi = vk + 2 * n * w;
    for q in 1..=n.max(1) {
        // smallest p with p/q >= lo/k
        let p = (q * lo).div_euclid(k) + i128::from((q * lo).rem_euclid(k) != 0);
        if p * k <= q * hi {
            return Rational::new(BigInt::from(p), BigInt::from(q));
        }
    }
    unreachable!("value iteration bound always isolates one fraction")
}

/// Optimal memoryless strategy of `player` from an energy progress measure on
/// each value class.
fn class_strategies(g: &GameGraph, values: &[Rational], player: Player) -> Vec<Option<EdgeId>> {
    let mut strategy = vec![None; g.num_states()];
    let mut classes: BTreeMap<&Rational, Vec<StateId>> = BTreeMap::new();
    for (s, v) in values.iter().enumerate() {
        classes.entry(v).or_default().push(s);
    }
    for (value, members) in classes {
        let p: i128 = value.numer().try_into().expect("value numerator fits");
        let q: i128 = value.denom().try_into().expect("value denominator fits");
        // Energy weights: player 1 wants sum(q w - p) >= 0 on cycles, player 2
        // wants sum(p - q w) >= 0.
        let shifted = |w: i64| match player {
            Player::P1 => q * w as i128 - p,
            Player::P2 => p - q * w as i128,
        };
        let in_class = |s: StateId| values[s] == *value;
        let kept: BTreeMap<StateId, Vec<EdgeId>> = members
            .iter()
            .map(|&s| (s, g.out_edges(s).iter().copied().filter(|&e| in_class(g.edge(e).target)).collect()))
            .collect();
        let mut credit: BTreeMap<StateId, i128> = members.iter().map(|&s| (s, 0)).collect();
        let need = |e: EdgeId, credit: &BTreeMap<StateId, i128>| {
            let edge = g.edge(e);
            (credit[&edge.target] - shifted(edge.weight)).max(0)
        };
        loop {
            let mut changed = false;
            for &s in &members {
                let it = kept[&s].iter().map(|&e| need(e, &credit));
                let val = if g.owner(s) == player { it.min() } else { it.max() }.expect("class keeps an edge");
                if val != credit[&s] {
                    credit.insert(s, val);
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        for &s in &members {
            if g.owner(s) != player {
                continue;
            }
            let best = kept[&s]
                .iter()
                .copied()
                .min_by_key(|&e| (need(e, &credit), e))
                .expect("class keeps an edge");
            strategy[s] = Some(best);
        }
    }
    strategy
}

/// Worst-case cost to reach `targets`: player 1 minimises, player 2
/// maximises, infinite outside player 1's attractor. Player 1's strategy
/// strictly decreases the cost along every edge it allows before the target.
pub fn solve_sp_worst_case(g: &GameGraph, targets: &BTreeSet<StateId>) -> GameValueTable<ExtRational> {
    let n = g.num_states();
    let mut cost: Vec<Option<i128>> = (0..n).map(|s| targets.contains(&s).then_some(0)).collect();
    let edge_cost = |e: EdgeId, cost: &[Option<i128>]| {
        let edge = g.edge(e);
        cost[edge.target].map(|c| c + edge.weight as i128)
    };
    loop {
        let mut next = cost.clone();
        for s in 0..n {
            if targets.contains(&s) {
                continue;
            }
            let mut it = g.out_edges(s).iter().map(|&e| edge_cost(e, &cost));
            next[s] = match g.owner(s) {
                Player::P1 => it.flatten().min(),
                Player::P2 => {
                    let all: Option<Vec<i128>> = it.by_ref().collect();
                    all.and_then(|v| v.into_iter().max())
                }
            };
        }
        if next == cost {
            break;
        }
        cost = next;
    }
    let mut p1 = vec![None; n];
    let mut p2 = vec![None; n];
    for s in 0..n {
        let out = g.out_edges(s);
        let key = |e: EdgeId| edge_cost(e, &cost).unwrap_or(i128::MAX);
        let choice = if targets.contains(&s) || cost[s].is_none() {
            match g.owner(s) {
                Player::P1 => out.iter().copied().min_by_key(|&e| (key(e), e)),
                Player::P2 => out.iter().copied().max_by_key(|&e| (key(e), std::cmp::Reverse(e))),
            }
        } else {
            match g.owner(s) {
                Player::P1 => out.iter().copied().min_by_key(|&e| (key(e), e)),
                Player::P2 => out.iter().copied().max_by_key(|&e| (key(e), std::cmp::Reverse(e))),
            }
        };
        match g.owner(s) {
            Player::P1 => p1[s] = choice,
            Player::P2 => p2[s] = choice,
        }
    }
    let values = cost
        .into_iter()
        .map(|c| match c {
            Some(c) => ExtRational::Finite(Rational::from_integer(BigInt::from(c))),
            None => ExtRational::Infinite,
        })
        .collect();
    GameValueTable { values, p1_strategy: p1, p2_strategy: p2 }
}

/// Plain weighted digraph (one-player view of a game under a fixed strategy).
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct WeightedDigraph {
    pub succ: Vec<Vec<(usize, i64)>>,
}

impl WeightedDigraph {
    pub fn new(n: usize) -> Self {
        Self { succ: vec![Vec::new(); n] }
    }

    pub fn add_edge(&mut self, u: usize, v: usize, w: i64) {
        self.succ[u].push((v, w));
    }

    pub fn num_nodes(&self) -> usize {
        self.succ.len()
    }

    fn adjacency(&self) -> Vec<Vec<usize>> {
        self.succ.iter().map(|s| s.iter().map(|(v, _)| *v).collect()).collect()
    }
}

/// Karp's minimum mean over one strongly connected component given as local
/// adjacency. Runs two passes so memory stays linear in the component size.
fn karp_component(local: &[Vec<(usize, i64)>]) -> Option<Rational> {
    let k = local.len();
    if !local.iter().any(|s| !s.is_empty()) {
        return None;
    }
    const INF: i128 = i128::MAX;
    let step = |prev: &[i128]| {
        let mut next = vec![INF; k];
        for (u, succ) in local.iter().enumerate() {
            if prev[u] == INF {
                continue;
            }
            for &(v, w) in succ {
                let c = prev[u] + w as i128;
                if c < next[v] {
                    next[v] = c;
                }
            }
        }
        next
    };
    let mut d = vec![INF; k];
    d[0] = 0;
    for _ in 0..k {
        d = step(&d);
    }
    let dk = d;
    // best[v] = max_j (dk[v] - dj[v]) / (k - j) as (num, den)
    let mut best: Vec<Option<(i128, i128)>> = vec![None; k];
    let mut dj = vec![INF; k];
    dj[0] = 0;
    for j in 0..k {
        for v in 0..k {
            if dk[v] == INF || dj[v] == INF {
                continue;
            }
            let cand = (dk[v] - dj[v], (k - j) as i128);
            let better = match best[v] {
                None => true,
                Some((n, m)) => cand.0 * m > n * cand.1,
            };
            if better {
                best[v] = Some(cand);
            }
        }
        dj = step(&dj);
    }
    best.into_iter()
        .flatten()
        .min_by(|a, b| (a.0 * b.1).cmp(&(b.0 * a.1)))
        .map(|(n, m)| Rational::new(BigInt::from(n), BigInt::from(m)))
}

fn components_from(graph: &WeightedDigraph, from: &[usize]) -> Vec<Vec<usize>> {
    let adj = graph.adjacency();
    let seen = reachable(&adj, from.iter().copied());
    sccs(&adj).into_iter().filter(|c| seen[c[0]]).collect()
}

fn local_component(graph: &WeightedDigraph, comp: &[usize]) -> Vec<Vec<(usize, i64)>> {
    let index: BTreeMap<usize, usize> = comp.iter().enumerate().map(|(i, &u)| (u, i)).collect();
    comp.iter()
        .map(|u| graph.succ[*u].iter().filter_map(|(v, w)| index.get(v).map(|&i| (i, *w))).collect())
        .collect()
}

/// Minimum mean weight over the cycles reachable from `from`; `None` when no
/// cycle is reachable.
pub fn min_cycle_mean(graph: &WeightedDigraph, from: usize) -> Option<Rational> {
    min_cycle_mean_from(graph, &[from]).map(|(v, _)| v)
}

/// As [`min_cycle_mean`] for several start nodes, also returning one cycle
/// (as a node sequence, first node not repeated) that attains the minimum.
pub fn min_cycle_mean_from(graph: &WeightedDigraph, from: &[usize]) -> Option<(Rational, Vec<usize>)> {
    let mut best: Option<(Rational, Vec<usize>)> = None;
    for comp in components_from(graph, from) {
        let local = local_component(graph, &comp);
        let Some(mean) = karp_component(&local) else { continue };
        if best.as_ref().is_none_or(|(b, _)| mean < *b) {
            let cycle = tight_cycle(&local, &mean).into_iter().map(|i| comp[i]).collect();
            best = Some((mean, cycle));
        }
    }
    best
}

/// A cycle of mean exactly `mean` in a component whose minimum cycle mean is
/// `mean`: shift weights so the minimum cycle weighs zero, compute shortest
/// distances and follow tight edges until a node repeats.
fn tight_cycle(local: &[Vec<(usize, i64)>], mean: &Rational) -> Vec<usize> {
    let k = local.len();
    let p: i128 = mean.numer().try_into().expect("mean fits");
    let q: i128 = mean.denom().try_into().expect("mean fits");
    let w = |x: i64| q * x as i128 - p;
    let mut d = vec![0i128; k];
    for _ in 0..k {
        let mut changed = false;
        for u in 0..k {
            for &(v, x) in &local[u] {
                let c = d[u] + w(x);
                if c < d[v] {
                    d[v] = c;
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    let tight: Vec<Vec<usize>> = (0..k)
        .map(|u| local[u].iter().filter(|&&(v, x)| d[u] + w(x) == d[v]).map(|&(v, _)| v).collect())
        .collect();
    // Every node on a zero cycle has a tight successor inside the cycle; the
    // tight subgraph restricted to nodes that can reach a tight cycle is
    // found by iterated removal of nodes without tight successors.
    let mut alive = vec![true; k];
    loop {
        let mut changed = false;
        for u in 0..k {
            if alive[u] && !tight[u].iter().any(|&v| alive[v]) {
                alive[u] = false;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    let start = (0..k).find(|&u| alive[u]).expect("a minimum-mean cycle is tight");
    let mut pos = vec![usize::MAX; k];
    let mut path = Vec::new();
    let mut u = start;
    while pos[u] == usize::MAX {
        pos[u] = path.len();
        path.push(u);
        u = *tight[u].iter().find(|&&v| alive[v]).unwrap();
    }
    path.split_off(pos[u])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};

    fn digraph(n: usize, edges: &[(usize, usize, i64)]) -> WeightedDigraph {
        let mut g = WeightedDigraph::new(n);
        for &(u, v, w) in edges {
            g.add_edge(u, v, w);
        }
        g
    }

    #[test]
    fn karp_basic_cases() {
        assert_eq!(min_cycle_mean(&digraph(2, &[(0, 1, 2), (1, 0, 4)]), 0), Some(int(3)));
        assert_eq!(min_cycle_mean(&digraph(3, &[(0, 1, 2), (1, 2, 4)]), 0), None);
        let g = digraph(5, &[(0, 1, 0), (1, 1, 3), (0, 2, 1), (2, 3, 0), (3, 2, -1), (4, 4, -9)]);
        assert_eq!(min_cycle_mean(&g, 0), Some(ratio(-1, 2)));
        let (mean, cycle) = min_cycle_mean_from(&g, &[0]).unwrap();
        assert_eq!(mean, ratio(-1, 2));
        let mut c = cycle.clone();
        c.sort();
        assert_eq!(c, vec![2, 3]);
    }

    #[test]
    fn self_loop_value() {
        let mut g = GameGraph::new();
        let a = g.add_state("a", Player::P1);
        g.add_edge(a, a, 3);
        let t = solve_mp_game(&g);
        assert_eq!(t.values, vec![int(3)]);
        assert_eq!(t.p1_strategy, vec![Some(0)]);
    }

    #[test]
    fn attractor_edge_cases() {
        let mut g = GameGraph::new();
        let a = g.add_state("a", Player::P1);
        let b = g.add_state("b", Player::P2);
        g.add_edge(a, b, 1);
        g.add_edge(b, a, 1);
        g.add_edge(b, b, 1);
        let all = BTreeSet::from([a, b]);
        assert_eq!(attractor(&g, &all, Player::P1), all);
        assert!(attractor(&g, &BTreeSet::new(), Player::P1).is_empty());
        // b can stay on its self-loop, so only a is attracted to {a}... and a
        // is in the target itself.
        assert_eq!(attractor(&g, &BTreeSet::from([a]), Player::P1), BTreeSet::from([a]));
        assert_eq!(attractor(&g, &BTreeSet::from([b]), Player::P1), BTreeSet::from([a, b]));
    }

    #[test]
    fn small_sp_game_worst_case_costs() {
        let mut g = GameGraph::new();
        let s1 = g.add_state("s1", Player::P1);
        let s2 = g.add_state("s2", Player::P2);
        let s3 = g.add_state("s3", Player::P1);
        g.add_edge(s1, s2, 1);
        g.add_edge(s2, s1, 1);
        g.add_edge(s2, s3, 1);
        let direct = g.add_edge(s1, s3, 5);
        g.add_edge(s3, s3, 1);
        let t = solve_sp_worst_case(&g, &BTreeSet::from([s3]));
        assert_eq!(t.values[s1], ExtRational::Finite(int(5)));
        assert_eq!(t.values[s2], ExtRational::Finite(int(6)));
        assert_eq!(t.values[s3], ExtRational::Finite(int(0)));
        assert_eq!(t.p1_strategy[s1], Some(direct));
    }
}
