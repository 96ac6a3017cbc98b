//! Games, MDPs, Markov chains and finite-memory strategies, together with the
//! operations that close one over another (fixing the adversary's behavior,
//! fixing player 1's strategy, composing a finite-memory adversary model).

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt;

use num_traits::{Signed, Zero};

use crate::rational::{int, is_one, Rational};

pub type StateId = usize;
pub type EdgeId = usize;
pub type MemoryId = usize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Player {
    P1,
    P2,
}

impl Player {
    pub fn opponent(self) -> Player {
        match self {
            Player::P1 => Player::P2,
            Player::P2 => Player::P1,
        }
    }
}

impl fmt::Display for Player {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Player::P1 => "p1",
            Player::P2 => "p2",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Measure {
    MeanPayoff,
    ShortestPath,
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Measure::MeanPayoff => "mean-payoff",
            Measure::ShortestPath => "shortest-path",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct State {
    pub name: String,
    pub owner: Player,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Edge {
    pub source: StateId,
    pub target: StateId,
    pub weight: i64,
    pub label: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ModelError {
    #[error("game has no states")]
    EmptyGame,
    #[error("state `{name}` has no outgoing edge")]
    BlockingState { state: StateId, name: String },
    #[error("edge {edge} has non-positive weight {weight} (shortest-path games need weights > 0)")]
    NonPositiveWeight { edge: EdgeId, weight: i64 },
    #[error("edge {edge} references a state that does not exist")]
    DanglingEdge { edge: EdgeId },
    #[error("initial state {0} does not exist")]
    InvalidInitial(StateId),
    #[error("no distribution given for adversary state `{name}`")]
    MissingRow { state: StateId, name: String },
    #[error("distribution of `{name}` sums to {sum}, not 1")]
    ProbabilityNotOne { state: StateId, name: String, sum: Rational },
    #[error("distribution of state {state} uses edge {edge}, which does not leave it")]
    ForeignEdge { state: StateId, edge: EdgeId },
    #[error("negative probability in the distribution of state {0}")]
    NegativeProbability(StateId),
    #[error("edge {edge} listed twice in the distribution of state {state}")]
    DuplicateEntry { state: StateId, edge: EdgeId },
    #[error("state `{name}` belongs to player 1 and cannot carry a distribution")]
    NotAdversaryState { state: StateId, name: String },
    #[error("strategy has no action for memory {memory} at state `{name}`")]
    UndefinedAction { memory: MemoryId, state: StateId, name: String },
    #[error("strategy action at memory {memory}, state {state} uses edge {edge}, which does not leave that state")]
    InvalidAction { memory: MemoryId, state: StateId, edge: EdgeId },
    #[error("memory element {0} does not exist")]
    InvalidMemory(MemoryId),
    #[error("accumulated weight overflows 64 bits")]
    WeightOverflow,
    #[error("invalid query: {0}")]
    InvalidQuery(String),
}

/// Directed weighted graph with states split between the two players.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct GameGraph {
    states: Vec<State>,
    edges: Vec<Edge>,
    initial: StateId,
    out: Vec<Vec<EdgeId>>,
    index: HashMap<String, StateId>,
}

impl GameGraph {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a state; a name that already exists returns the existing id.
    pub fn add_state(&mut self, name: impl Into<String>, owner: Player) -> StateId {
        let name = name.into();
        if let Some(&id) = self.index.get(&name) {
            return id;
        }
        let id = self.states.len();
        self.index.insert(name.clone(), id);
        self.states.push(State { name, owner });
        self.out.push(Vec::new());
        id
    }

    pub fn add_edge(&mut self, source: StateId, target: StateId, weight: i64) -> EdgeId {
        self.push_edge(Edge { source, target, weight, label: None })
    }

    pub fn add_labeled_edge(
        &mut self,
        source: StateId,
        target: StateId,
        weight: i64,
        label: impl Into<String>,
    ) -> EdgeId {
        self.push_edge(Edge { source, target, weight, label: Some(label.into()) })
    }

    fn push_edge(&mut self, edge: Edge) -> EdgeId {
        let id = self.edges.len();
        if let Some(out) = self.out.get_mut(edge.source) {
            out.push(id);
        }
        self.edges.push(edge);
        id
    }

    pub fn set_initial(&mut self, s: StateId) {
        self.initial = s;
    }

    pub fn initial(&self) -> StateId {
        self.initial
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn states(&self) -> &[State] {
        &self.states
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn state(&self, s: StateId) -> &State {
        &self.states[s]
    }

    pub fn edge(&self, e: EdgeId) -> &Edge {
        &self.edges[e]
    }

    pub fn owner(&self, s: StateId) -> Player {
        self.states[s].owner
    }

    pub fn name(&self, s: StateId) -> &str {
        &self.states[s].name
    }

    pub fn state_id(&self, name: &str) -> Option<StateId> {
        self.index.get(name).copied()
    }

    pub fn out_edges(&self, s: StateId) -> &[EdgeId] {
        &self.out[s]
    }

    /// Largest absolute edge weight (0 for an edgeless graph).
    pub fn max_abs_weight(&self) -> i64 {
        self.edges.iter().map(|e| e.weight.abs()).max().unwrap_or(0)
    }

    /// Checks every structural invariant for the given measure.
    pub fn check(&self, measure: Measure) -> Result<(), ModelError> {
        if self.states.is_empty() {
            return Err(ModelError::EmptyGame);
        }
        if self.initial >= self.states.len() {
            return Err(ModelError::InvalidInitial(self.initial));
        }
        for (i, e) in self.edges.iter().enumerate() {
            if e.source >= self.states.len() || e.target >= self.states.len() {
                return Err(ModelError::DanglingEdge { edge: i });
            }
            if measure == Measure::ShortestPath && e.weight <= 0 {
                return Err(ModelError::NonPositiveWeight { edge: i, weight: e.weight });
            }
        }
        for (s, out) in self.out.iter().enumerate() {
            if out.is_empty() {
                return Err(ModelError::BlockingState { state: s, name: self.states[s].name.clone() });
            }
        }
        Ok(())
    }

    /// Subgame over the states with `keep_state[s]` and the edges accepted by
    /// `keep_edge` whose endpoints are both kept. Returns the subgame with the
    /// maps from new state ids and new edge ids back to this game. The result
    /// is not validated: a kept state may lose all its edges.
    pub fn subgame(
        &self,
        keep_state: &[bool],
        mut keep_edge: impl FnMut(EdgeId) -> bool,
        initial: StateId,
    ) -> (GameGraph, Vec<StateId>, Vec<EdgeId>) {
        let mut sub = GameGraph::new();
        let mut new_id = vec![usize::MAX; self.states.len()];
        let mut state_map = Vec::new();
        for (s, st) in self.states.iter().enumerate() {
            if keep_state[s] {
                new_id[s] = sub.add_state(st.name.clone(), st.owner);
                state_map.push(s);
            }
        }
        let mut edge_map = Vec::new();
        for (i, e) in self.edges.iter().enumerate() {
            if keep_state[e.source] && keep_state[e.target] && keep_edge(i) {
                sub.push_edge(Edge {
                    source: new_id[e.source],
                    target: new_id[e.target],
                    weight: e.weight,
                    label: e.label.clone(),
                });
                edge_map.push(i);
            }
        }
        if keep_state[initial] {
            sub.set_initial(new_id[initial]);
        }
        (sub, state_map, edge_map)
    }
}

/// Returns `g` unchanged when every game invariant holds for `measure`.
pub fn validate_game(g: GameGraph, measure: Measure) -> Result<GameGraph, ModelError> {
    g.check(measure)?;
    Ok(g)
}

/// Distribution over the outgoing edges of one adversary state.
pub type Distribution = Vec<(EdgeId, Rational)>;

fn check_distribution(g: &GameGraph, s: StateId, dist: &[(EdgeId, Rational)]) -> Result<(), ModelError> {
    if g.owner(s) != Player::P2 {
        return Err(ModelError::NotAdversaryState { state: s, name: g.name(s).to_string() });
    }
    let mut seen = BTreeSet::new();
    let mut sum = Rational::zero();
    for (e, p) in dist {
        if *e >= g.num_edges() || g.edge(*e).source != s {
            return Err(ModelError::ForeignEdge { state: s, edge: *e });
        }
        if p.is_negative() {
            return Err(ModelError::NegativeProbability(s));
        }
        if !seen.insert(*e) {
            return Err(ModelError::DuplicateEntry { state: s, edge: *e });
        }
        sum += p;
    }
    if !is_one(&sum) {
        return Err(ModelError::ProbabilityNotOne { state: s, name: g.name(s).to_string(), sum });
    }
    Ok(())
}

/// Memoryless stochastic model of the adversary: one distribution per
/// player-2 state. A player-2 state with a single outgoing edge needs no row.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct StochasticModel {
    rows: BTreeMap<StateId, Distribution>,
}

impl StochasticModel {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set_row(&mut self, s: StateId, dist: Distribution) {
        self.rows.insert(s, dist);
    }

    pub fn row(&self, s: StateId) -> Option<&Distribution> {
        self.rows.get(&s)
    }

    pub fn rows(&self) -> impl Iterator<Item = (StateId, &Distribution)> {
        self.rows.iter().map(|(s, d)| (*s, d))
    }

    pub fn check(&self, g: &GameGraph) -> Result<(), ModelError> {
        for (&s, dist) in &self.rows {
            if s >= g.num_states() {
                return Err(ModelError::DanglingEdge { edge: dist.first().map_or(0, |d| d.0) });
            }
            check_distribution(g, s, dist)?;
        }
        for s in 0..g.num_states() {
            if g.owner(s) == Player::P2 && !self.rows.contains_key(&s) && g.out_edges(s).len() != 1 {
                return Err(ModelError::MissingRow { state: s, name: g.name(s).to_string() });
            }
        }
        Ok(())
    }

    /// The distribution used at `s`, with the implied Dirac for single-edge
    /// states. `None` when the state has no row and several edges.
    pub fn distribution(&self, g: &GameGraph, s: StateId) -> Option<Distribution> {
        match self.rows.get(&s) {
            Some(d) => Some(d.clone()),
            None if g.out_edges(s).len() == 1 => Some(vec![(g.out_edges(s)[0], int(1))]),
            None => None,
        }
    }
}

/// Mealy-machine model of the adversary: the distribution at a player-2 state
/// depends on a finite memory updated after every visited state.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteMemoryModel {
    memory: Vec<String>,
    initial: MemoryId,
    updates: BTreeMap<(MemoryId, StateId), MemoryId>,
    rows: BTreeMap<(MemoryId, StateId), Distribution>,
}

impl FiniteMemoryModel {
    pub fn new(memory: Vec<String>, initial: MemoryId) -> Self {
        Self { memory, initial, updates: BTreeMap::new(), rows: BTreeMap::new() }
    }

    pub fn memory(&self) -> &[String] {
        &self.memory
    }

    pub fn initial(&self) -> MemoryId {
        self.initial
    }

    /// Memory after leaving `s` with memory `m`. Missing entries keep the memory.
    pub fn set_update(&mut self, m: MemoryId, s: StateId, next: MemoryId) {
        if next == m {
            self.updates.remove(&(m, s));
        } else {
            self.updates.insert((m, s), next);
        }
    }

    pub fn update(&self, m: MemoryId, s: StateId) -> MemoryId {
        self.updates.get(&(m, s)).copied().unwrap_or(m)
    }

    pub fn updates(&self) -> impl Iterator<Item = ((MemoryId, StateId), MemoryId)> + '_ {
        self.updates.iter().map(|(k, v)| (*k, *v))
    }

    pub fn set_row(&mut self, m: MemoryId, s: StateId, dist: Distribution) {
        self.rows.insert((m, s), dist);
    }

    pub fn row(&self, m: MemoryId, s: StateId) -> Option<&Distribution> {
        self.rows.get(&(m, s))
    }

    pub fn rows(&self) -> impl Iterator<Item = ((MemoryId, StateId), &Distribution)> {
        self.rows.iter().map(|(k, d)| (*k, d))
    }

    pub fn distribution(&self, g: &GameGraph, m: MemoryId, s: StateId) -> Option<Distribution> {
        match self.rows.get(&(m, s)) {
            Some(d) => Some(d.clone()),
            None if g.out_edges(s).len() == 1 => Some(vec![(g.out_edges(s)[0], int(1))]),
            None => None,
        }
    }

    pub fn check(&self, g: &GameGraph) -> Result<(), ModelError> {
        if self.initial >= self.memory.len() {
            return Err(ModelError::InvalidMemory(self.initial));
        }
        for (&(m, _), &next) in &self.updates {
            if m >= self.memory.len() {
                return Err(ModelError::InvalidMemory(m));
            }
            if next >= self.memory.len() {
                return Err(ModelError::InvalidMemory(next));
            }
        }
        for (&(m, s), dist) in &self.rows {
            if m >= self.memory.len() {
                return Err(ModelError::InvalidMemory(m));
            }
            check_distribution(g, s, dist)?;
        }
        for m in 0..self.memory.len() {
            for s in 0..g.num_states() {
                if g.owner(s) == Player::P2 && self.distribution(g, m, s).is_none() {
                    return Err(ModelError::MissingRow { state: s, name: g.name(s).to_string() });
                }
            }
        }
        Ok(())
    }
}

/// Result of composing a game with a finite-memory adversary model.
#[derive(Clone, Debug)]
pub struct ModelProduct {
    pub game: GameGraph,
    pub model: StochasticModel,
    /// Product state -> (original state, adversary memory).
    pub projection: Vec<(StateId, MemoryId)>,
    /// Product edge -> original edge.
    pub edge_projection: Vec<EdgeId>,
}

impl ModelProduct {
    /// Product states projecting onto one of `states`.
    pub fn lift_states(&self, states: &BTreeSet<StateId>) -> BTreeSet<StateId> {
        (0..self.projection.len()).filter(|&p| states.contains(&self.projection[p].0)).collect()
    }
}

/// Synchronized product of `g` with a finite-memory adversary model, reduced
/// to a game plus a memoryless model. Only pairs reachable from
/// `(initial, initial memory)` are built.
pub fn compose_finite_memory_model(g: &GameGraph, fm: &FiniteMemoryModel) -> Result<ModelProduct, ModelError> {
    g.check(Measure::MeanPayoff)?;
    fm.check(g)?;
    let name_of = |s: StateId, m: MemoryId| {
        if fm.memory().len() == 1 {
            g.name(s).to_string()
        } else {
            format!("{}@{}", g.name(s), fm.memory()[m])
        }
    };
    let mut game = GameGraph::new();
    let mut ids: HashMap<(StateId, MemoryId), StateId> = HashMap::new();
    let mut projection = Vec::new();
    let mut queue = VecDeque::new();
    let start = (g.initial(), fm.initial());
    ids.insert(start, game.add_state(name_of(start.0, start.1), g.owner(start.0)));
    projection.push(start);
    queue.push_back(start);
    let mut edge_projection = Vec::new();
    let mut model = StochasticModel::new();
    while let Some((s, m)) = queue.pop_front() {
        let here = ids[&(s, m)];
        let next_mem = fm.update(m, s);
        let mut local: HashMap<EdgeId, EdgeId> = HashMap::new();
        for &e in g.out_edges(s) {
            let edge = g.edge(e);
            let key = (edge.target, next_mem);
            let there = match ids.get(&key) {
                Some(&id) => id,
                None => {
                    let id = game.add_state(name_of(key.0, key.1), g.owner(key.0));
                    ids.insert(key, id);
                    projection.push(key);
                    queue.push_back(key);
                    id
                }
            };
            let pe = game.push_edge(Edge { source: here, target: there, weight: edge.weight, label: edge.label.clone() });
            edge_projection.push(e);
            local.insert(e, pe);
        }
        if g.owner(s) == Player::P2 {
            let dist = fm.distribution(g, m, s).ok_or_else(|| ModelError::MissingRow {
                state: s,
                name: g.name(s).to_string(),
            })?;
            if g.out_edges(s).len() > 1 || fm.row(m, s).is_some() {
                model.set_row(here, dist.into_iter().map(|(e, p)| (local[&e], p)).collect());
            }
        }
    }
    game.set_initial(0);
    Ok(ModelProduct { game, model, projection, edge_projection })
}

/// Markov decision process: a game whose player-2 states are resolved by
/// fixed distributions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Mdp {
    game: GameGraph,
    dists: Vec<Option<Distribution>>,
}

impl Mdp {
    pub fn game(&self) -> &GameGraph {
        &self.game
    }

    pub fn is_stochastic(&self, s: StateId) -> bool {
        self.dists[s].is_some()
    }

    /// Distribution of a stochastic state restricted to positive probabilities.
    pub fn distribution(&self, s: StateId) -> Option<&[(EdgeId, Rational)]> {
        self.dists[s].as_deref()
    }

    /// Edges that can be taken with positive probability (stochastic states)
    /// or by choice (player-1 states).
    pub fn enabled_edges(&self, s: StateId) -> Vec<EdgeId> {
        match &self.dists[s] {
            Some(d) => d.iter().map(|(e, _)| *e).collect(),
            None => self.game.out_edges(s).to_vec(),
        }
    }

    /// Same MDP started from `s`.
    pub fn with_initial(&self, s: StateId) -> Self {
        let mut out = self.clone();
        out.game.set_initial(s);
        out
    }
}

/// Fixes the adversary's behavior: player-2 states become stochastic.
pub fn apply_model(g: &GameGraph, m: &StochasticModel) -> Result<Mdp, ModelError> {
    m.check(g)?;
    let mut dists = Vec::with_capacity(g.num_states());
    for s in 0..g.num_states() {
        if g.owner(s) == Player::P2 {
            let d = m
                .distribution(g, s)
                .ok_or_else(|| ModelError::MissingRow { state: s, name: g.name(s).to_string() })?;
            dists.push(Some(d.into_iter().filter(|(_, p)| !p.is_zero()).collect()));
        } else {
            dists.push(None);
        }
    }
    Ok(Mdp { game: g.clone(), dists })
}

/// Deterministic Mealy machine for player 1.
///
/// In memory `m` at player-1 state `s` the strategy takes `action(m, s)`; after
/// any edge `e` (taken by either player) the memory becomes `next_memory(m, e)`.
/// Updates that are not listed keep the memory unchanged.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteMemoryStrategy {
    memory: Vec<String>,
    initial: MemoryId,
    actions: BTreeMap<(MemoryId, StateId), EdgeId>,
    updates: BTreeMap<(MemoryId, EdgeId), MemoryId>,
}

impl FiniteMemoryStrategy {
    pub fn new(memory: Vec<String>, initial: MemoryId) -> Self {
        assert!(initial < memory.len(), "initial memory out of range");
        Self { memory, initial, actions: BTreeMap::new(), updates: BTreeMap::new() }
    }

    /// Memoryless strategy from a per-state choice (`None` for states where
    /// player 1 does not move).
    pub fn memoryless(choice: &[Option<EdgeId>]) -> Self {
        let mut s = Self::new(vec!["0".to_string()], 0);
        for (state, c) in choice.iter().enumerate() {
            if let Some(e) = c {
                s.set_action(0, state, *e);
            }
        }
        s
    }

    pub fn memory_size(&self) -> usize {
        self.memory.len()
    }

    pub fn memory_names(&self) -> &[String] {
        &self.memory
    }

    pub fn initial_memory(&self) -> MemoryId {
        self.initial
    }

    pub fn set_action(&mut self, m: MemoryId, s: StateId, e: EdgeId) {
        self.actions.insert((m, s), e);
    }

    pub fn set_update(&mut self, m: MemoryId, e: EdgeId, next: MemoryId) {
        if next == m {
            self.updates.remove(&(m, e));
        } else {
            self.updates.insert((m, e), next);
        }
    }

    pub fn action(&self, m: MemoryId, s: StateId) -> Option<EdgeId> {
        self.actions.get(&(m, s)).copied()
    }

    pub fn next_memory(&self, m: MemoryId, e: EdgeId) -> MemoryId {
        self.updates.get(&(m, e)).copied().unwrap_or(m)
    }

    pub fn actions(&self) -> impl Iterator<Item = ((MemoryId, StateId), EdgeId)> + '_ {
        self.actions.iter().map(|(k, v)| (*k, *v))
    }

    pub fn updates(&self) -> impl Iterator<Item = ((MemoryId, EdgeId), MemoryId)> + '_ {
        self.updates.iter().map(|(k, v)| (*k, *v))
    }

    /// Action at a player-1 state, checked against the game.
    pub fn checked_action(&self, g: &GameGraph, m: MemoryId, s: StateId) -> Result<EdgeId, ModelError> {
        let e = self.action(m, s).ok_or_else(|| ModelError::UndefinedAction {
            memory: m,
            state: s,
            name: g.name(s).to_string(),
        })?;
        if e >= g.num_edges() || g.edge(e).source != s {
            return Err(ModelError::InvalidAction { memory: m, state: s, edge: e });
        }
        Ok(e)
    }

    /// Same machine with memory elements permuted by `perm` (old -> new).
    pub fn renamed(&self, perm: &[MemoryId]) -> Self {
        let mut memory = vec![String::new(); self.memory.len()];
        for (old, name) in self.memory.iter().enumerate() {
            memory[perm[old]] = name.clone();
        }
        let mut out = Self::new(memory, perm[self.initial]);
        for (&(m, s), &e) in &self.actions {
            out.set_action(perm[m], s, e);
        }
        for (&(m, e), &n) in &self.updates {
            out.set_update(perm[m], e, perm[n]);
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChainTransition {
    pub target: usize,
    pub prob: Rational,
    pub weight: i64,
}

/// Finite Markov chain with weighted transitions and exact probabilities.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MarkovChain {
    /// (memory, game state) behind each chain node.
    pub labels: Vec<(MemoryId, StateId)>,
    pub rows: Vec<Vec<ChainTransition>>,
    pub initial: usize,
}

impl MarkovChain {
    pub fn num_states(&self) -> usize {
        self.rows.len()
    }

    /// Builds a chain directly from rows; labels default to `(0, node)`.
    pub fn from_rows(rows: Vec<Vec<ChainTransition>>, initial: usize) -> Self {
        let labels = (0..rows.len()).map(|i| (0, i)).collect();
        MarkovChain { labels, rows, initial }
    }

    pub fn successors(&self, node: usize) -> impl Iterator<Item = usize> + '_ {
        self.rows[node].iter().map(|t| t.target)
    }
}

/// Fixes player 1's strategy on an MDP, producing the chain over the
/// (memory, state) pairs reachable from `(initial memory, initial state)`.
pub fn apply_strategy(mdp: &Mdp, s: &FiniteMemoryStrategy) -> Result<MarkovChain, ModelError> {
    apply_strategy_until(mdp, s, &BTreeSet::new())
}

/// As [`apply_strategy`], but nodes over a state in `stop` become absorbing
/// with a zero-weight self-loop and are not expanded.
pub fn apply_strategy_until(
    mdp: &Mdp,
    s: &FiniteMemoryStrategy,
    stop: &BTreeSet<StateId>,
) -> Result<MarkovChain, ModelError> {
    let g = mdp.game();
    let mut ids: HashMap<(MemoryId, StateId), usize> = HashMap::new();
    let mut labels = Vec::new();
    let mut rows: Vec<Vec<ChainTransition>> = Vec::new();
    let start = (s.initial_memory(), g.initial());
    ids.insert(start, 0);
    labels.push(start);
    rows.push(Vec::new());
    let mut queue = VecDeque::from([start]);
    while let Some((m, st)) = queue.pop_front() {
        let here = ids[&(m, st)];
        if stop.contains(&st) {
            rows[here] = vec![ChainTransition { target: here, prob: int(1), weight: 0 }];
            continue;
        }
        let moves: Vec<(EdgeId, Rational)> = match mdp.distribution(st) {
            Some(d) => d.to_vec(),
            None => vec![(s.checked_action(g, m, st)?, int(1))],
        };
        let mut row = Vec::with_capacity(moves.len());
        for (e, p) in moves {
            let edge = g.edge(e);
            let key = (s.next_memory(m, e), edge.target);
            let there = match ids.get(&key) {
                Some(&id) => id,
                None => {
                    let id = labels.len();
                    ids.insert(key, id);
                    labels.push(key);
                    rows.push(Vec::new());
                    queue.push_back(key);
                    id
                }
            };
            row.push(ChainTransition { target: there, prob: p, weight: edge.weight });
        }
        rows[here] = row;
    }
    Ok(MarkovChain { labels, rows, initial: 0 })
}

/// Thresholds and measure of one synthesis query.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SynthesisQuery {
    pub measure: Measure,
    /// Worst-case threshold (strict: value > mu for mean-payoff, cost < mu
    /// for shortest path).
    pub mu: i64,
    /// Expectation threshold, strict in the same direction as `mu`.
    pub nu: Rational,
    pub epsilon: Option<Rational>,
    pub targets: BTreeSet<StateId>,
}

impl SynthesisQuery {
    pub fn check(&self, g: &GameGraph) -> Result<(), ModelError> {
        match self.measure {
            Measure::ShortestPath => {
                if self.targets.is_empty() {
                    return Err(ModelError::InvalidQuery("shortest-path query needs a target".into()));
                }
                if self.mu < 1 {
                    return Err(ModelError::InvalidQuery("worst-case threshold must be at least 1".into()));
                }
                if let Some(&t) = self.targets.iter().find(|&&t| t >= g.num_states()) {
                    return Err(ModelError::InvalidQuery(format!("target {t} does not exist")));
                }
            }
            Measure::MeanPayoff => {
                if let Some(eps) = &self.epsilon {
                    if !eps.is_positive() {
                        return Err(ModelError::InvalidQuery("epsilon must be positive".into()));
                    }
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    fn small_sp_game() -> GameGraph {
        let mut g = GameGraph::new();
        let s1 = g.add_state("s1", Player::P1);
        let s2 = g.add_state("s2", Player::P2);
        let s3 = g.add_state("s3", Player::P1);
        g.add_edge(s1, s2, 1);
        g.add_edge(s2, s1, 1);
        g.add_edge(s2, s3, 1);
        g.add_edge(s1, s3, 5);
        g.add_edge(s3, s3, 1);
        g
    }

    fn half_model() -> StochasticModel {
        let mut m = StochasticModel::new();
        m.set_row(1, vec![(1, ratio(1, 2)), (2, ratio(1, 2))]);
        m
    }

    #[test]
    fn validates_small_sp_game_and_rejects_broken_games() {
        assert!(validate_game(small_sp_game(), Measure::ShortestPath).is_ok());

        let mut lone = GameGraph::new();
        lone.add_state("x", Player::P1);
        assert!(matches!(lone.check(Measure::MeanPayoff), Err(ModelError::BlockingState { state: 0, .. })));

        let mut zero = small_sp_game();
        zero.edges[3].weight = 0;
        assert!(matches!(zero.check(Measure::ShortestPath), Err(ModelError::NonPositiveWeight { edge: 3, .. })));
        assert!(zero.check(Measure::MeanPayoff).is_ok());

        let mut dangling = small_sp_game();
        dangling.add_edge(0, 7, 1);
        assert!(matches!(dangling.check(Measure::MeanPayoff), Err(ModelError::DanglingEdge { .. })));
    }

    #[test]
    fn apply_model_needs_rows_for_branching_adversary_states() {
        let g = small_sp_game();
        let err = apply_model(&g, &StochasticModel::new()).unwrap_err();
        assert!(matches!(err, ModelError::MissingRow { state: 1, .. }));
        let mdp = apply_model(&g, &half_model()).unwrap();
        assert!(mdp.is_stochastic(1));
        assert!(!mdp.is_stochastic(0));
        assert_eq!(mdp.distribution(1).unwrap().len(), 2);
    }

    #[test]
    fn model_rows_must_sum_to_one() {
        let g = small_sp_game();
        let mut m = StochasticModel::new();
        m.set_row(1, vec![(1, ratio(1, 2)), (2, ratio(3, 5))]);
        match m.check(&g) {
            Err(ModelError::ProbabilityNotOne { sum, .. }) => assert_eq!(sum, ratio(11, 10)),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn game_without_adversary_gives_identical_mdp() {
        let mut g = GameGraph::new();
        let a = g.add_state("a", Player::P1);
        g.add_edge(a, a, 3);
        let mdp = apply_model(&g, &StochasticModel::new()).unwrap();
        assert_eq!(mdp.game(), &g);
        assert!(!mdp.is_stochastic(a));
    }

    #[test]
    fn memoryless_strategy_on_small_sp_game_gives_three_node_chain_with_cycle() {
        let g = small_sp_game();
        let mdp = apply_model(&g, &half_model()).unwrap();
        let strat = FiniteMemoryStrategy::memoryless(&[Some(0), None, Some(4)]);
        let mc = apply_strategy(&mdp, &strat).unwrap();
        assert_eq!(mc.num_states(), 3);
        // s1 -> s2 -> s1 cycle
        assert_eq!(mc.rows[0][0].target, 1);
        assert!(mc.rows[1].iter().any(|t| t.target == 0));
        for row in &mc.rows {
            let total: Rational = row.iter().map(|t| t.prob.clone()).sum();
            assert_eq!(total, int(1));
        }
    }

    #[test]
    fn apply_strategy_reports_missing_action() {
        let g = small_sp_game();
        let mdp = apply_model(&g, &half_model()).unwrap();
        let strat = FiniteMemoryStrategy::memoryless(&[Some(0), None, None]);
        assert!(matches!(apply_strategy(&mdp, &strat), Err(ModelError::UndefinedAction { state: 2, .. })));
    }

    #[test]
    fn single_memory_model_composes_to_the_same_game() {
        let g = small_sp_game();
        let mut fm = FiniteMemoryModel::new(vec!["m".into()], 0);
        fm.set_row(0, 1, vec![(1, ratio(1, 2)), (2, ratio(1, 2))]);
        let p = compose_finite_memory_model(&g, &fm).unwrap();
        assert_eq!(p.game.num_states(), 3);
        assert_eq!(p.game.num_edges(), 5);
        let s2 = p.game.state_id("s2").unwrap();
        let row = p.model.row(s2).unwrap();
        assert_eq!(row.len(), 2);
        assert!(row.iter().all(|(_, q)| *q == ratio(1, 2)));
    }

    #[test]
    fn alternating_model_product_is_small_and_projects() {
        let g = small_sp_game();
        let mut fm = FiniteMemoryModel::new(vec!["even".into(), "odd".into()], 0);
        for s in 0..3 {
            fm.set_update(0, s, 1);
            fm.set_update(1, s, 0);
        }
        fm.set_row(0, 1, vec![(1, ratio(1, 3)), (2, ratio(2, 3))]);
        fm.set_row(1, 1, vec![(1, ratio(3, 4)), (2, ratio(1, 4))]);
        let p = compose_finite_memory_model(&g, &fm).unwrap();
        assert!(p.game.num_states() <= 6);
        for (pe, e) in p.game.edges().iter().zip(&p.edge_projection) {
            let orig = g.edge(*e);
            assert_eq!(pe.weight, orig.weight);
            assert_eq!(p.projection[pe.source].0, orig.source);
            assert_eq!(p.projection[pe.target].0, orig.target);
        }
        for (ps, dist) in p.model.rows() {
            let (s, m) = p.projection[ps];
            assert_eq!(s, 1);
            let expected = fm.row(m, s).unwrap();
            let got: Vec<_> = dist.iter().map(|(e, q)| (p.edge_projection[*e], q.clone())).collect();
            assert_eq!(&got, expected);
        }
        assert!(p.game.check(Measure::ShortestPath).is_ok());
    }

    #[test]
    fn renaming_memory_is_a_permutation() {
        let mut s = FiniteMemoryStrategy::new(vec!["a".into(), "b".into()], 0);
        s.set_action(0, 0, 0);
        s.set_action(1, 0, 3);
        s.set_update(0, 1, 1);
        let r = s.renamed(&[1, 0]);
        assert_eq!(r.initial_memory(), 1);
        assert_eq!(r.action(0, 0), Some(3));
        assert_eq!(r.next_memory(1, 1), 0);
        assert_eq!(r.renamed(&[1, 0]), s);
    }

    #[test]
    fn query_checks() {
        let g = small_sp_game();
        let mut q = SynthesisQuery {
            measure: Measure::ShortestPath,
            mu: 8,
            nu: int(5),
            epsilon: None,
            targets: BTreeSet::from([2]),
        };
        assert!(q.check(&g).is_ok());
        q.mu = 0;
        assert!(q.check(&g).is_err());
        q.mu = 8;
        q.targets.clear();
        assert!(q.check(&g).is_err());
        let mp = SynthesisQuery { measure: Measure::MeanPayoff, mu: 0, nu: int(1), epsilon: Some(int(0)), targets: BTreeSet::new() };
        assert!(mp.check(&g).is_err());
    }
}
