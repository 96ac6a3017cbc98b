//! Independent oracles for the integration tests: dense exact solves and
//! brute-force enumeration. Nothing here calls the library's solvers.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::PathBuf;

use bwc::io::{parse_game, parse_model, parse_strategy, ParsedGame, ParsedModel};
use bwc::model::{EdgeId, FiniteMemoryStrategy, GameGraph, MemoryId, Player, StateId, StochasticModel};
use bwc::rational::{int, Rational};
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn data_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data").join(name)
}

pub fn load_game(name: &str) -> ParsedGame {
    parse_game(&std::fs::read_to_string(data_path(name)).unwrap()).unwrap()
}

pub fn load_model(name: &str, g: &GameGraph) -> StochasticModel {
    match parse_model(&std::fs::read_to_string(data_path(name)).unwrap(), g).unwrap() {
        ParsedModel::Memoryless(m) => m,
        ParsedModel::Mealy(_) => panic!("{name} is not memoryless"),
    }
}

pub fn load_strategy(name: &str, g: &GameGraph) -> FiniteMemoryStrategy {
    parse_strategy(&std::fs::read_to_string(data_path(name)).unwrap(), g).unwrap()
}

// ---------------------------------------------------------------- algebra

/// Gauss-Jordan elimination; panics on a singular system.
pub fn solve_dense(mut a: Vec<Vec<Rational>>, mut b: Vec<Rational>) -> Vec<Rational> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n).find(|&r| !a[r][col].is_zero()).expect("singular system");
        a.swap(col, pivot);
        b.swap(col, pivot);
        let inv = Rational::one() / &a[col][col];
        for c in col..n {
            a[col][c] = &a[col][c] * &inv;
        }
        b[col] = &b[col] * &inv;
        for r in 0..n {
            if r != col && !a[r][col].is_zero() {
                let f = a[r][col].clone();
                for c in col..n {
                    let d = &f * &a[col][c];
                    a[r][c] -= d;
                }
                let d = &f * &b[col];
                b[r] -= d;
            }
        }
    }
    b
}

/// Chain with `(target, probability, weight)` rows.
#[derive(Clone, Debug)]
pub struct Chain {
    pub rows: Vec<Vec<(usize, Rational, i64)>>,
}

impl Chain {
    fn reach(&self) -> Vec<Vec<bool>> {
        let n = self.rows.len();
        (0..n)
            .map(|s| {
                let mut seen = vec![false; n];
                let mut stack = vec![s];
                seen[s] = true;
                while let Some(u) = stack.pop() {
                    for (v, _, _) in &self.rows[u] {
                        if !seen[*v] {
                            seen[*v] = true;
                            stack.push(*v);
                        }
                    }
                }
                seen
            })
            .collect()
    }

    /// Expected mean-payoff from every node, via stationary distributions of
    /// the bottom SCCs and absorption equations.
    pub fn expected_mean_payoff(&self) -> Vec<Rational> {
        let n = self.rows.len();
        let r = self.reach();
        let bottom: Vec<bool> = (0..n).map(|i| (0..n).all(|j| !r[i][j] || r[j][i])).collect();
        let mut gain: Vec<Option<Rational>> = vec![None; n];
        for i in 0..n {
            if !bottom[i] || gain[i].is_some() {
                continue;
            }
            let class: Vec<usize> = (0..n).filter(|&j| r[i][j]).collect();
            let pos: HashMap<usize, usize> = class.iter().enumerate().map(|(k, &j)| (j, k)).collect();
            let k = class.len();
            // pi (P - I) = 0 with the last equation replaced by sum pi = 1
            let mut a = vec![vec![Rational::zero(); k]; k];
            for (col, &j) in class.iter().enumerate() {
                a[col][col] -= Rational::one();
                for (t, p, _) in &self.rows[j] {
                    a[pos[t]][col] += p;
                }
            }
            a[k - 1] = vec![Rational::one(); k];
            let mut b = vec![Rational::zero(); k];
            b[k - 1] = Rational::one();
            let pi = solve_dense(a, b);
            let g: Rational = class
                .iter()
                .enumerate()
                .map(|(c, &j)| &pi[c] * self.rows[j].iter().map(|(_, p, w)| p * int(*w)).sum::<Rational>())
                .sum();
            for &j in &class {
                gain[j] = Some(g.clone());
            }
        }
        let mut a = vec![vec![Rational::zero(); n]; n];
        let mut b = vec![Rational::zero(); n];
        for i in 0..n {
            a[i][i] = Rational::one();
            match &gain[i] {
                Some(g) => b[i] = g.clone(),
                None => {
                    for (t, p, _) in &self.rows[i] {
                        a[i][*t] -= p;
                    }
                }
            }
        }
        solve_dense(a, b)
    }

    /// Expected cost to reach `targets`, `None` where the probability of
    /// reaching them is below one.
    pub fn expected_cost(&self, targets: &[bool]) -> Vec<Option<Rational>> {
        let n = self.rows.len();
        let r = self.reach();
        let can = |j: usize| (0..n).any(|t| targets[t] && r[j][t]);
        let sure: Vec<bool> = (0..n).map(|i| targets[i] || (0..n).all(|j| !r[i][j] || can(j))).collect();
        let idx: Vec<usize> = (0..n).filter(|&i| sure[i]).collect();
        let pos: HashMap<usize, usize> = idx.iter().enumerate().map(|(k, &i)| (i, k)).collect();
        let k = idx.len();
        let mut a = vec![vec![Rational::zero(); k]; k];
        let mut b = vec![Rational::zero(); k];
        for (row, &i) in idx.iter().enumerate() {
            a[row][row] = Rational::one();
            if targets[i] {
                continue;
            }
            for (t, p, w) in &self.rows[i] {
                a[row][pos[t]] -= p;
                b[row] += p * int(*w);
            }
        }
        let x = if k == 0 { vec![] } else { solve_dense(a, b) };
        (0..n).map(|i| pos.get(&i).map(|&k| x[k].clone())).collect()
    }
}

// ------------------------------------------------------------ generators

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_distribution(rng: &mut ChaCha8Rng, edges: &[EdgeId]) -> Vec<(EdgeId, Rational)> {
    let weights: Vec<i64> = edges.iter().map(|_| rng.random_range(1..=3)).collect();
    let total: i64 = weights.iter().sum();
    edges.iter().zip(weights).map(|(&e, w)| (e, Rational::new(w.into(), total.into()))).collect()
}

fn random_model(rng: &mut ChaCha8Rng, g: &GameGraph) -> StochasticModel {
    let mut m = StochasticModel::new();
    for s in 0..g.num_states() {
        if g.owner(s) == Player::P2 {
            let out = g.out_edges(s).to_vec();
            m.set_row(s, random_distribution(rng, &out));
        }
    }
    m
}

/// Random mean-payoff game with `n` states, one to `max_out` edges per
/// state, weights in `-w..=w`, and a random stochastic model.
pub fn random_mp_game(rng: &mut ChaCha8Rng, n: usize, max_out: usize, w: i64) -> (GameGraph, StochasticModel) {
    let mut g = GameGraph::new();
    for i in 0..n {
        let owner = if rng.random_bool(0.5) { Player::P1 } else { Player::P2 };
        g.add_state(format!("s{i}"), owner);
    }
    for s in 0..n {
        let k = rng.random_range(1..=max_out);
        for _ in 0..k {
            let t = rng.random_range(0..n);
            g.add_edge(s, t, rng.random_range(-w..=w));
        }
    }
    g.set_initial(0);
    let m = random_model(rng, &g);
    (g, m)
}

/// Random shortest-path game: the last state is the target (with a
/// self-loop), weights in `1..=w`.
pub fn random_sp_game(
    rng: &mut ChaCha8Rng,
    n: usize,
    max_out: usize,
    w: i64,
) -> (GameGraph, StochasticModel, BTreeSet<StateId>) {
    let mut g = GameGraph::new();
    for i in 0..n - 1 {
        let owner = if rng.random_bool(0.5) { Player::P1 } else { Player::P2 };
        g.add_state(format!("s{i}"), owner);
    }
    let t = g.add_state("t", Player::P1);
    for s in 0..n - 1 {
        let k = rng.random_range(1..=max_out);
        for j in 0..k {
            // bias towards progress so that targets are often reachable
            let dst = if j == 0 && rng.random_bool(0.4) { t } else { rng.random_range(0..n) };
            g.add_edge(s, dst, rng.random_range(1..=w));
        }
    }
    g.add_edge(t, t, 1);
    g.set_initial(0);
    let m = random_model(rng, &g);
    (g, m, BTreeSet::from([t]))
}

// ------------------------------------------------------ memoryless oracles

/// Every memoryless choice function for `player` (`None` elsewhere).
pub fn memoryless_choices(g: &GameGraph, player: Player) -> Vec<Vec<Option<EdgeId>>> {
    let mut all = vec![vec![None; g.num_states()]];
    for s in 0..g.num_states() {
        if g.owner(s) != player {
            continue;
        }
        all = all
            .into_iter()
            .flat_map(|c| {
                g.out_edges(s).iter().map(move |&e| {
                    let mut c = c.clone();
                    c[s] = Some(e);
                    c
                })
            })
            .collect();
    }
    all
}

/// Mean-payoff of the unique play from `s` when both players are memoryless.
pub fn profile_mean(g: &GameGraph, c1: &[Option<EdgeId>], c2: &[Option<EdgeId>], s: StateId) -> Rational {
    let mut seen: HashMap<StateId, usize> = HashMap::new();
    let mut weights = Vec::new();
    let mut cur = s;
    loop {
        if let Some(&at) = seen.get(&cur) {
            let cycle = &weights[at..];
            return Rational::new(cycle.iter().sum::<i64>().into(), (cycle.len() as i64).into());
        }
        seen.insert(cur, weights.len());
        let e = match g.owner(cur) {
            Player::P1 => c1[cur],
            Player::P2 => c2[cur],
        }
        .unwrap();
        weights.push(g.edge(e).weight);
        cur = g.edge(e).target;
    }
}

/// Mean-payoff game values by max-min over memoryless profiles.
pub fn oracle_mp_game(g: &GameGraph) -> Vec<Rational> {
    let c1s = memoryless_choices(g, Player::P1);
    let c2s = memoryless_choices(g, Player::P2);
    (0..g.num_states())
        .map(|s| {
            c1s.iter()
                .map(|c1| c2s.iter().map(|c2| profile_mean(g, c1, c2, s)).min().unwrap())
                .max()
                .unwrap()
        })
        .collect()
}

/// Chain over game states with player 1 fixed by `c1`.
pub fn memoryless_chain(g: &GameGraph, m: &StochasticModel, c1: &[Option<EdgeId>]) -> Chain {
    let rows = (0..g.num_states())
        .map(|s| match g.owner(s) {
            Player::P1 => {
                let e = g.edge(c1[s].unwrap());
                vec![(e.target, Rational::one(), e.weight)]
            }
            Player::P2 => m
                .distribution(g, s)
                .unwrap()
                .into_iter()
                .map(|(e, p)| (g.edge(e).target, p, g.edge(e).weight))
                .collect(),
        })
        .collect();
    Chain { rows }
}

pub fn oracle_expected_mp(g: &GameGraph, m: &StochasticModel) -> Vec<Rational> {
    let mut best: Option<Vec<Rational>> = None;
    for c1 in memoryless_choices(g, Player::P1) {
        let v = memoryless_chain(g, m, &c1).expected_mean_payoff();
        best = Some(match best {
            None => v,
            Some(b) => b.into_iter().zip(v).map(|(x, y)| x.max(y)).collect(),
        });
    }
    best.unwrap()
}

/// Minimal expected cost to the targets, `None` where unreachable almost
/// surely under every strategy.
pub fn oracle_expected_ssp(g: &GameGraph, m: &StochasticModel, targets: &BTreeSet<StateId>) -> Vec<Option<Rational>> {
    let is_t: Vec<bool> = (0..g.num_states()).map(|s| targets.contains(&s)).collect();
    let mut best: Vec<Option<Rational>> = vec![None; g.num_states()];
    for c1 in memoryless_choices(g, Player::P1) {
        let v = memoryless_chain(g, m, &c1).expected_cost(&is_t);
        for (b, x) in best.iter_mut().zip(v) {
            if let Some(x) = x {
                if b.as_ref().is_none_or(|b| x < *b) {
                    *b = Some(x);
                }
            }
        }
    }
    best
}

// --------------------------------------------------- strategy evaluation

/// A finite-memory strategy unrolled against the game: nodes are reachable
/// (memory, state) pairs; successors keep the game edge and, at adversary
/// nodes, its probability under `m` (zero-probability edges are kept for the
/// worst case).
pub struct Unrolled {
    pub nodes: Vec<(MemoryId, StateId)>,
    pub succ: Vec<Vec<(usize, EdgeId, Rational)>>,
}

pub fn unroll(
    g: &GameGraph,
    m: &StochasticModel,
    s: &FiniteMemoryStrategy,
    stop: &BTreeSet<StateId>,
) -> Unrolled {
    let mut ids: BTreeMap<(MemoryId, StateId), usize> = BTreeMap::new();
    let mut nodes = vec![(s.initial_memory(), g.initial())];
    ids.insert(nodes[0], 0);
    let mut succ = Vec::new();
    let mut i = 0;
    while i < nodes.len() {
        let (mem, st) = nodes[i];
        let mut out = Vec::new();
        if !stop.contains(&st) {
            let edges: Vec<(EdgeId, Rational)> = match g.owner(st) {
                Player::P1 => vec![(s.action(mem, st).expect("strategy defined"), Rational::one())],
                Player::P2 => {
                    let dist = m.distribution(g, st).unwrap();
                    g.out_edges(st)
                        .iter()
                        .map(|&e| {
                            let p = dist.iter().find(|(x, _)| *x == e).map_or(Rational::zero(), |(_, p)| p.clone());
                            (e, p)
                        })
                        .collect()
                }
            };
            for (e, p) in edges {
                let key = (s.next_memory(mem, e), g.edge(e).target);
                let id = *ids.entry(key).or_insert_with(|| {
                    nodes.push(key);
                    nodes.len() - 1
                });
                out.push((id, e, p));
            }
        }
        succ.push(out);
        i += 1;
    }
    Unrolled { nodes, succ }
}

impl Unrolled {
    fn chain(&self, g: &GameGraph) -> Chain {
        Chain {
            rows: self
                .succ
                .iter()
                .map(|out| {
                    if out.is_empty() {
                        vec![]
                    } else {
                        out.iter()
                            .filter(|(_, _, p)| !p.is_zero())
                            .map(|(t, e, p)| (*t, p.clone(), g.edge(*e).weight))
                            .collect()
                    }
                })
                .collect(),
        }
    }
}

/// Worst-case cost to the targets (`None` for infinite) and expected cost.
pub fn strategy_sp_oracle(
    g: &GameGraph,
    m: &StochasticModel,
    s: &FiniteMemoryStrategy,
    targets: &BTreeSet<StateId>,
) -> (Option<i64>, Option<Rational>) {
    let u = unroll(g, m, s, targets);
    let n = u.nodes.len();
    let is_t: Vec<bool> = u.nodes.iter().map(|(_, st)| targets.contains(st)).collect();
    // longest path by DFS; a back edge means an adversary-forced cycle
    fn longest(
        v: usize,
        u: &Unrolled,
        g: &GameGraph,
        is_t: &[bool],
        state: &mut [u8],
        memo: &mut [Option<i64>],
    ) -> Option<i64> {
        if is_t[v] {
            return Some(0);
        }
        match state[v] {
            1 => return None,
            2 => return memo[v],
            _ => {}
        }
        state[v] = 1;
        let mut best = Some(i64::MIN);
        for (t, e, _) in &u.succ[v] {
            best = match (best, longest(*t, u, g, is_t, state, memo)) {
                (Some(b), Some(x)) => Some(b.max(x + g.edge(*e).weight)),
                _ => None,
            };
        }
        state[v] = 2;
        memo[v] = best;
        best
    }
    let worst = longest(0, &u, g, &is_t, &mut vec![0; n], &mut vec![None; n]);
    let mut chain = u.chain(g);
    for (i, row) in chain.rows.iter_mut().enumerate() {
        if row.is_empty() {
            row.push((i, Rational::one(), 0));
        }
    }
    let expectation = chain.expected_cost(&is_t)[0].clone();
    (worst, expectation)
}

/// Worst-case mean-payoff (minimum over simple cycles reachable in the
/// unrolled strategy) and exact expected mean-payoff.
pub fn strategy_mp_oracle(g: &GameGraph, m: &StochasticModel, s: &FiniteMemoryStrategy) -> (Rational, Rational) {
    let u = unroll(g, m, s, &BTreeSet::new());
    let n = u.nodes.len();
    let mut best: Option<Rational> = None;
    // simple cycles with smallest node `start`
    fn dfs(
        v: usize,
        start: usize,
        sum: i64,
        len: i64,
        u: &Unrolled,
        g: &GameGraph,
        on: &mut [bool],
        best: &mut Option<Rational>,
    ) {
        for (t, e, _) in &u.succ[v] {
            let w = sum + g.edge(*e).weight;
            if *t == start {
                let mean = Rational::new(w.into(), (len + 1).into());
                if best.as_ref().is_none_or(|b| mean < *b) {
                    *best = Some(mean);
                }
            } else if *t > start && !on[*t] {
                on[*t] = true;
                dfs(*t, start, w, len + 1, u, g, on, best);
                on[*t] = false;
            }
        }
    }
    for start in 0..n {
        let mut on = vec![false; n];
        on[start] = true;
        dfs(start, start, 0, 0, &u, g, &mut on, &mut best);
    }
    let expectation = u.chain(g).expected_mean_payoff()[0].clone();
    (best.expect("every play cycles"), expectation)
}

// ----------------------------------------------- unfolding enumeration

/// Best expected cost over memoryless strategies of the cost unfolding
/// (states `(s, c)` with accumulated cost `c`) that reach the targets with
/// cost below `limit` on every play. `None` when no such strategy exists.
/// Enumerates only choices at reachable unfolded states; branches that can
/// already reach cost `limit` are cut.
pub fn oracle_bwc_sp(
    g: &GameGraph,
    m: &StochasticModel,
    targets: &BTreeSet<StateId>,
    limit: i64,
) -> Option<Rational> {
    let mut assign: BTreeMap<(StateId, i64), EdgeId> = BTreeMap::new();
    let mut best: Option<Rational> = None;
    enumerate(g, m, targets, limit, &mut assign, &mut best);
    best
}

fn enumerate(
    g: &GameGraph,
    m: &StochasticModel,
    targets: &BTreeSet<StateId>,
    limit: i64,
    assign: &mut BTreeMap<(StateId, i64), EdgeId>,
    best: &mut Option<Rational>,
) {
    // closure of the partial strategy
    let mut seen = BTreeSet::new();
    let mut stack = vec![(g.initial(), 0i64)];
    let mut open = None;
    while let Some((s, c)) = stack.pop() {
        if !seen.insert((s, c)) {
            continue;
        }
        if c >= limit {
            return;
        }
        if targets.contains(&s) {
            continue;
        }
        let edges: Vec<EdgeId> = match g.owner(s) {
            Player::P1 => match assign.get(&(s, c)) {
                Some(&e) => vec![e],
                None => {
                    open.get_or_insert((s, c));
                    vec![]
                }
            },
            Player::P2 => g.out_edges(s).to_vec(),
        };
        for e in edges {
            stack.push((g.edge(e).target, c + g.edge(e).weight));
        }
    }
    match open {
        Some(key) => {
            for &e in g.out_edges(key.0) {
                assign.insert(key, e);
                enumerate(g, m, targets, limit, assign, best);
            }
            assign.remove(&key);
        }
        None => {
            let v = unfolded_expectation(g, m, targets, assign, (g.initial(), 0), &mut HashMap::new());
            if best.as_ref().is_none_or(|b| v < *b) {
                *best = Some(v);
            }
        }
    }
}

fn unfolded_expectation(
    g: &GameGraph,
    m: &StochasticModel,
    targets: &BTreeSet<StateId>,
    assign: &BTreeMap<(StateId, i64), EdgeId>,
    at: (StateId, i64),
    memo: &mut HashMap<(StateId, i64), Rational>,
) -> Rational {
    if targets.contains(&at.0) {
        return Rational::zero();
    }
    if let Some(v) = memo.get(&at) {
        return v.clone();
    }
    let (s, c) = at;
    let dist = match g.owner(s) {
        Player::P1 => vec![(assign[&at], Rational::one())],
        Player::P2 => m.distribution(g, s).unwrap(),
    };
    let mut v = Rational::zero();
    for (e, p) in dist {
        let edge = g.edge(e);
        let rest = unfolded_expectation(g, m, targets, assign, (edge.target, c + edge.weight), memo);
        v += p * (int(edge.weight) + rest);
    }
    memo.insert(at, v.clone());
    v
}

// -------------------------------------------------------- end components

/// Whether `set` is an end component: closed under the model's support,
/// player 1 can stay, and strongly connected through those edges.
pub fn is_end_component(g: &GameGraph, m: &StochasticModel, set: &BTreeSet<StateId>) -> bool {
    if set.is_empty() {
        return false;
    }
    let mut adj: BTreeMap<StateId, Vec<StateId>> = BTreeMap::new();
    for &s in set {
        let inside: Vec<StateId> = match g.owner(s) {
            Player::P1 => g.out_edges(s).iter().map(|&e| g.edge(e).target).filter(|t| set.contains(t)).collect(),
            Player::P2 => {
                let support: Vec<StateId> = m
                    .distribution(g, s)
                    .unwrap()
                    .iter()
                    .filter(|(_, p)| p.is_positive())
                    .map(|(e, _)| g.edge(*e).target)
                    .collect();
                if support.iter().any(|t| !set.contains(t)) {
                    return false;
                }
                support
            }
        };
        if inside.is_empty() {
            return false;
        }
        adj.insert(s, inside);
    }
    let reach_all = |from: StateId, adj: &BTreeMap<StateId, Vec<StateId>>| {
        let mut seen = BTreeSet::from([from]);
        let mut stack = vec![from];
        while let Some(u) = stack.pop() {
            for &v in &adj[&u] {
                if seen.insert(v) {
                    stack.push(v);
                }
            }
        }
        seen.len() == set.len()
    };
    let first = *set.iter().next().unwrap();
    let mut rev: BTreeMap<StateId, Vec<StateId>> = set.iter().map(|&s| (s, vec![])).collect();
    for (&u, vs) in &adj {
        for &v in vs {
            rev.get_mut(&v).unwrap().push(u);
        }
    }
    reach_all(first, &adj) && reach_all(first, &rev)
}

/// Subgame on `set` with every internal edge.
pub fn internal_subgame(g: &GameGraph, set: &BTreeSet<StateId>) -> Option<GameGraph> {
    let mut sub = GameGraph::new();
    let ids: BTreeMap<StateId, StateId> = set.iter().map(|&s| (s, sub.add_state(g.name(s), g.owner(s)))).collect();
    for e in g.edges() {
        if let (Some(&a), Some(&b)) = (ids.get(&e.source), ids.get(&e.target)) {
            sub.add_edge(a, b, e.weight);
        }
    }
    if (0..sub.num_states()).any(|s| sub.out_edges(s).is_empty()) {
        return None;
    }
    sub.set_initial(0);
    Some(sub)
}

/// Winning: player 1 keeps the mean-payoff above `mu` from every state of
/// `set` while staying inside (memoryless enumeration).
pub fn oracle_ec_winning(g: &GameGraph, set: &BTreeSet<StateId>, mu: i64) -> bool {
    match internal_subgame(g, set) {
        Some(sub) => oracle_mp_game(&sub).into_iter().all(|v| v > int(mu)),
        None => false,
    }
}
