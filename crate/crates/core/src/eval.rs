//! Exact verification of finite-memory strategies.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;

use crate::expectation::{mc_expected_mp, mc_expected_total_cost};
use crate::graph_util::sccs;
use crate::model::{
    apply_model, apply_strategy, apply_strategy_until, EdgeId, FiniteMemoryModel, FiniteMemoryStrategy, GameGraph, Measure,
    MemoryId, ModelError, ModelProduct, Player, StateId, StochasticModel,
};
use crate::rational::{int, ExtRational, Rational};
use crate::synthesis::explore;
use crate::worst_case::{min_cycle_mean_from, WeightedDigraph};

/// Game under a fixed player-1 strategy: nodes are reachable (memory, state)
/// pairs; player-1 nodes keep the chosen edge, adversary nodes keep all.
#[derive(Clone, Debug)]
pub struct StrategyProduct {
    pub labels: Vec<(MemoryId, StateId)>,
    /// Outgoing (successor node, game edge) per node.
    pub succ: Vec<Vec<(usize, EdgeId)>>,
    index: HashMap<(MemoryId, StateId), usize>,
}

impl StrategyProduct {
    pub fn num_nodes(&self) -> usize {
        self.labels.len()
    }

    pub fn node(&self, m: MemoryId, s: StateId) -> Option<usize> {
        self.index.get(&(m, s)).copied()
    }

    pub fn weighted(&self, g: &GameGraph) -> WeightedDigraph {
        let mut d = WeightedDigraph::new(self.num_nodes());
        for (u, succ) in self.succ.iter().enumerate() {
            for &(v, e) in succ {
                d.add_edge(u, v, g.edge(e).weight);
            }
        }
        d
    }

    fn adjacency(&self) -> Vec<Vec<usize>> {
        self.succ.iter().map(|s| s.iter().map(|(v, _)| *v).collect()).collect()
    }

    /// Shortest node path from `from` to `to` (both included).
    fn path(&self, from: usize, to: usize) -> Vec<usize> {
        let mut parent = vec![usize::MAX; self.num_nodes()];
        parent[from] = from;
        let mut queue = VecDeque::from([from]);
        while let Some(u) = queue.pop_front() {
            if u == to {
                break;
            }
            for &(v, _) in &self.succ[u] {
                if parent[v] == usize::MAX {
                    parent[v] = u;
                    queue.push_back(v);
                }
            }
        }
        let mut path = vec![to];
        let mut u = to;
        while u != from {
            u = parent[u];
            path.push(u);
        }
        path.reverse();
        path
    }
}

/// Product of `g` with strategy `s` from its initial configuration.
pub fn product(g: &GameGraph, s: &FiniteMemoryStrategy) -> Result<StrategyProduct, ModelError> {
    product_from(g, s, &[(s.initial_memory(), g.initial())], &BTreeSet::new())
}

/// Product explored from several start configurations; nodes over `stop`
/// states get no successors.
pub fn product_from(
    g: &GameGraph,
    s: &FiniteMemoryStrategy,
    starts: &[(MemoryId, StateId)],
    stop: &BTreeSet<StateId>,
) -> Result<StrategyProduct, ModelError> {
    let mut p = StrategyProduct { labels: Vec::new(), succ: Vec::new(), index: HashMap::new() };
    let mut queue = VecDeque::new();
    let intern = |p: &mut StrategyProduct, key: (MemoryId, StateId), queue: &mut VecDeque<(MemoryId, StateId)>| {
        *p.index.entry(key).or_insert_with(|| {
            p.labels.push(key);
            p.succ.push(Vec::new());
            queue.push_back(key);
            p.labels.len() - 1
        })
    };
    for &key in starts {
        intern(&mut p, key, &mut queue);
    }
    while let Some((m, st)) = queue.pop_front() {
        let here = p.index[&(m, st)];
        if stop.contains(&st) {
            continue;
        }
        let edges: Vec<EdgeId> = match g.owner(st) {
            Player::P1 => vec![s.checked_action(g, m, st)?],
            Player::P2 => g.out_edges(st).to_vec(),
        };
        let mut succ = Vec::with_capacity(edges.len());
        for e in edges {
            let key = (s.next_memory(m, e), g.edge(e).target);
            succ.push((intern(&mut p, key, &mut queue), e));
        }
        p.succ[here] = succ;
    }
    Ok(p)
}

/// A play of the product: a finite prefix followed either by a repeated
/// cycle (lasso) or by nothing (finite path ending in a target).
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Witness {
    pub prefix: Vec<(MemoryId, StateId)>,
    pub cycle: Vec<(MemoryId, StateId)>,
}

impl Witness {
    /// Renders the play with state names, the cycle in parentheses.
    pub fn render(&self, g: &GameGraph) -> String {
        let names = |v: &[(MemoryId, StateId)]| v.iter().map(|(_, s)| g.name(*s)).collect::<Vec<_>>().join(" ");
        if self.cycle.is_empty() {
            names(&self.prefix)
        } else if self.prefix.is_empty() {
            format!("({})^w", names(&self.cycle))
        } else {
            format!("{} ({})^w", names(&self.prefix), names(&self.cycle))
        }
    }
}

/// Exact worst-case (and optionally expectation) values of a strategy.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Certificate {
    pub worst_case_value: ExtRational,
    pub expectation: Option<ExtRational>,
    pub witness: Witness,
    /// The worst-case threshold holds (and the expectation threshold too,
    /// when one was checked).
    pub passed: bool,
}

impl fmt::Display for Certificate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "worst case {}", self.worst_case_value)?;
        if let Some(e) = &self.expectation {
            write!(f, ", expectation {e}")?;
        }
        write!(f, ", {}", if self.passed { "pass" } else { "fail" })
    }
}

/// Minimum cycle mean of the product from `starts`, with a minimising lasso.
pub(crate) fn worst_mean(g: &GameGraph, p: &StrategyProduct, starts: &[usize]) -> (Rational, Witness) {
    let (value, cycle) = min_cycle_mean_from(&p.weighted(g), starts).expect("non-blocking product has a cycle");
    let adj = p.adjacency();
    let seen_from = |s: usize| crate::graph_util::reachable(&adj, [s])[cycle[0]];
    let start = starts.iter().copied().find(|&s| seen_from(s)).expect("cycle reachable from a start");
    let mut prefix: Vec<usize> = p.path(start, cycle[0]);
    prefix.pop();
    let witness = Witness {
        prefix: prefix.into_iter().map(|u| p.labels[u]).collect(),
        cycle: cycle.into_iter().map(|u| p.labels[u]).collect(),
    };
    (value, witness)
}

/// Worst-case mean-payoff of `s` against any adversary; passes iff > `mu`.
pub fn verify_worst_case_mp(g: &GameGraph, s: &FiniteMemoryStrategy, mu: i64) -> Result<Certificate, ModelError> {
    let p = product(g, s)?;
    let (value, witness) = worst_mean(g, &p, &[0]);
    let passed = value > int(mu);
    Ok(Certificate { worst_case_value: ExtRational::Finite(value), expectation: None, witness, passed })
}

/// Worst-case cost of `s` to reach `targets`; infinite when a cycle avoiding
/// the targets is reachable. Passes iff < `mu`.
pub fn verify_worst_case_sp(
    g: &GameGraph,
    s: &FiniteMemoryStrategy,
    targets: &BTreeSet<StateId>,
    mu: i64,
) -> Result<Certificate, ModelError> {
    let p = product_from(g, s, &[(s.initial_memory(), g.initial())], targets)?;
    let adj = p.adjacency();
    let comps = sccs(&adj);
    // Tarjan lists components sinks first.
    if let Some(comp) = comps.iter().find(|c| c.len() > 1 || adj[c[0]].contains(&c[0])) {
        let u = comp[0];
        let mut prefix = p.path(0, u);
        prefix.pop();
        // a cycle through u inside its component
        let inside: BTreeSet<usize> = comp.iter().copied().collect();
        let sub = StrategyProduct {
            labels: p.labels.clone(),
            succ: p.succ.iter().map(|s| s.iter().copied().filter(|(v, _)| inside.contains(v)).collect()).collect(),
            index: HashMap::new(),
        };
        let back = sub.succ[u].iter().map(|&(v, _)| v).find(|v| inside.contains(v)).unwrap();
        let mut cycle = vec![u];
        if back != u {
            cycle.extend(sub.path(back, u));
            cycle.pop();
        }
        let witness = Witness {
            prefix: prefix.into_iter().map(|x| p.labels[x]).collect(),
            cycle: cycle.into_iter().map(|x| p.labels[x]).collect(),
        };
        return Ok(Certificate { worst_case_value: ExtRational::Infinite, expectation: None, witness, passed: false });
    }
    let mut longest = vec![0i128; p.num_nodes()];
    let mut best_next = vec![usize::MAX; p.num_nodes()];
    for comp in &comps {
        let u = comp[0];
        for &(v, e) in &p.succ[u] {
            let c = longest[v] + g.edge(e).weight as i128;
            if best_next[u] == usize::MAX || c > longest[u] {
                longest[u] = c;
                best_next[u] = v;
            }
        }
    }
    let mut path = vec![0];
    let mut u = 0;
    while best_next[u] != usize::MAX {
        u = best_next[u];
        path.push(u);
    }
    let value = longest[0];
    let witness = Witness { prefix: path.into_iter().map(|x| p.labels[x]).collect(), cycle: Vec::new() };
    let passed = value < mu as i128;
    Ok(Certificate {
        worst_case_value: ExtRational::Finite(Rational::from_integer(value.into())),
        expectation: None,
        witness,
        passed,
    })
}

/// Exact expectation of `s` against the stochastic model: expected
/// mean-payoff, or expected cost to reach `targets`.
pub fn exact_expectation(
    g: &GameGraph,
    m: &StochasticModel,
    s: &FiniteMemoryStrategy,
    measure: Measure,
    targets: &BTreeSet<StateId>,
) -> Result<ExtRational, ModelError> {
    let mdp = apply_model(g, m)?;
    Ok(match measure {
        Measure::MeanPayoff => ExtRational::Finite(mc_expected_mp(&apply_strategy(&mdp, s)?)),
        Measure::ShortestPath => mc_expected_total_cost(&apply_strategy_until(&mdp, s, targets)?, targets),
    })
}

/// Both certificates for a strategy. `passed` requires the worst case to
/// beat `mu` and, when `nu` is given, the expectation to beat `nu` (strictly
/// above for mean-payoff, strictly below for shortest path).
pub fn certify(
    g: &GameGraph,
    m: &StochasticModel,
    s: &FiniteMemoryStrategy,
    measure: Measure,
    targets: &BTreeSet<StateId>,
    mu: i64,
    nu: Option<&Rational>,
) -> Result<Certificate, ModelError> {
    let mut cert = match measure {
        Measure::MeanPayoff => verify_worst_case_mp(g, s, mu)?,
        Measure::ShortestPath => verify_worst_case_sp(g, s, targets, mu)?,
    };
    let e = exact_expectation(g, m, s, measure, targets)?;
    if let Some(nu) = nu {
        let ok = match (measure, &e) {
            (Measure::MeanPayoff, ExtRational::Finite(v)) => v > nu,
            (Measure::ShortestPath, ExtRational::Finite(v)) => v < nu,
            (_, ExtRational::Infinite) => false,
        };
        cert.passed &= ok;
    }
    cert.expectation = Some(e);
    Ok(cert)
}

/// Carries a strategy of the original game over to the product with a
/// finite-memory adversary model. Memory is unchanged; edges are matched by
/// their position among the source's outgoing edges.
pub fn lift_strategy(g: &GameGraph, prod: &ModelProduct, s: &FiniteMemoryStrategy) -> FiniteMemoryStrategy {
    let pg = &prod.game;
    let to_product = |p: StateId, e: EdgeId| {
        let k = g.out_edges(prod.projection[p].0).iter().position(|&x| x == e).expect("edge leaves the state");
        pg.out_edges(p)[k]
    };
    let mut out = FiniteMemoryStrategy::new(s.memory_names().to_vec(), s.initial_memory());
    for m in 0..s.memory_size() {
        for p in 0..pg.num_states() {
            let orig = prod.projection[p].0;
            if let Some(e) = s.action(m, orig) {
                if g.edge(e).source == orig {
                    out.set_action(m, p, to_product(p, e));
                }
            }
            for &pe in pg.out_edges(p) {
                out.set_update(m, pe, s.next_memory(m, prod.edge_projection[pe]));
            }
        }
    }
    out
}

/// Inverse of [`lift_strategy`]: a strategy of the product becomes a
/// strategy of the original game that tracks the adversary memory itself.
/// Memory elements are named `<strategy memory>/<adversary memory>`.
pub fn project_strategy(
    g: &GameGraph,
    fm: &FiniteMemoryModel,
    prod: &ModelProduct,
    s: &FiniteMemoryStrategy,
) -> FiniteMemoryStrategy {
    let pg = &prod.game;
    let id: HashMap<(StateId, MemoryId), StateId> = prod.projection.iter().enumerate().map(|(p, &k)| (k, p)).collect();
    let start = ((s.initial_memory(), prod.projection[pg.initial()].1), g.initial());
    explore(
        g,
        &[start],
        |&(m, a), st| prod.edge_projection[s.action(m, id[&(st, a)]).expect("strategy is total on the product")],
        |&(m, a), e| {
            let p = id[&(g.edge(e).source, a)];
            let k = g.out_edges(g.edge(e).source).iter().position(|&x| x == e).expect("edge leaves the state");
            let pe = pg.out_edges(p)[k];
            (s.next_memory(m, pe), prod.projection[pg.edge(pe).target].1)
        },
        |&(m, a)| format!("{}/{}", s.memory_names()[m], fm.memory()[a]),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    fn small_sp_game() -> (GameGraph, StochasticModel, [EdgeId; 5]) {
        let mut g = GameGraph::new();
        let s1 = g.add_state("s1", Player::P1);
        let s2 = g.add_state("s2", Player::P2);
        let s3 = g.add_state("s3", Player::P1);
        let e12 = g.add_edge(s1, s2, 1);
        let e21 = g.add_edge(s2, s1, 1);
        let e23 = g.add_edge(s2, s3, 1);
        let e13 = g.add_edge(s1, s3, 5);
        let e33 = g.add_edge(s3, s3, 1);
        let mut m = StochasticModel::new();
        m.set_row(s2, vec![(e21, ratio(1, 2)), (e23, ratio(1, 2))]);
        (g, m, [e12, e21, e23, e13, e33])
    }

    /// Memory counts visits to s1 (0, 1, then 2 = saturated).
    fn thick(edges: [EdgeId; 5]) -> FiniteMemoryStrategy {
        let [e12, e21, _, e13, e33] = edges;
        let mut s = FiniteMemoryStrategy::new(vec!["0".into(), "2".into()], 0);
        s.set_action(0, 0, e12);
        s.set_action(1, 0, e13);
        s.set_action(0, 2, e33);
        s.set_action(1, 2, e33);
        s.set_update(0, e21, 1);
        s
    }

    #[test]
    fn thick_strategy_certificates() {
        let (g, m, edges) = small_sp_game();
        let s = thick(edges);
        let t = BTreeSet::from([2]);
        let cert = certify(&g, &m, &s, Measure::ShortestPath, &t, 8, Some(&int(5))).unwrap();
        assert_eq!(cert.worst_case_value, ExtRational::Finite(int(7)));
        assert_eq!(cert.expectation, Some(ExtRational::Finite(ratio(9, 2))));
        assert!(cert.passed);
        assert_eq!(cert.witness.render(&g), "s1 s2 s1 s3");
    }

    #[test]
    fn looping_strategy_is_infinite() {
        let (g, _, edges) = small_sp_game();
        let s = FiniteMemoryStrategy::memoryless(&[Some(edges[0]), None, Some(edges[4])]);
        let cert = verify_worst_case_sp(&g, &s, &BTreeSet::from([2]), 8).unwrap();
        assert!(cert.worst_case_value.is_infinite());
        assert!(!cert.passed);
        assert_eq!(cert.witness.cycle.len(), 2);
    }

    #[test]
    fn mean_payoff_witness() {
        let mut g = GameGraph::new();
        let a = g.add_state("a", Player::P1);
        let b = g.add_state("b", Player::P2);
        let ab = g.add_edge(a, b, 0);
        g.add_edge(a, a, 1);
        g.add_edge(b, a, 6);
        g.add_edge(b, a, 0);
        let s = FiniteMemoryStrategy::memoryless(&[Some(ab), None]);
        let cert = verify_worst_case_mp(&g, &s, 0).unwrap();
        assert_eq!(cert.worst_case_value, ExtRational::Finite(int(0)));
        assert!(!cert.passed);
        assert_eq!(cert.witness.render(&g), "(a b)^w");
        let safe = FiniteMemoryStrategy::memoryless(&[Some(1), None]);
        assert!(verify_worst_case_mp(&g, &safe, 0).unwrap().passed);
    }
}
