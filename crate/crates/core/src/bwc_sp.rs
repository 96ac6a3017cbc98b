//! Beyond worst-case synthesis for the shortest path.
//!
//! The game is unfolded with the accumulated cost up to the threshold,
//! restricted to the states from which player 1 can still reach the target
//! under the threshold, and the expected cost is minimised inside that safe
//! part. The resulting memoryless strategy of the unfolding is folded back
//! into a Mealy machine whose memory is the accumulated cost.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use crate::eval::certify;
use crate::expectation::expected_ssp_optimal;
use crate::model::{
    apply_model, EdgeId, GameGraph, Measure, ModelError, Player, StateId, StochasticModel, SynthesisQuery,
};
use crate::rational::{ExtRational, Rational};
use crate::synthesis::{beats, explore, Decision, NoReason, Strictness, SynthesisError, SynthesisResult};
use crate::worst_case::{attractor_mask, solve_sp_worst_case};

/// Second component of an unfolded state.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Level {
    Cost(i64),
    /// Accumulated cost reached the threshold.
    Top,
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Level::Cost(c) => write!(f, "{c}"),
            Level::Top => write!(f, "top"),
        }
    }
}

/// Unfolding of a shortest-path game tracking the accumulated cost below
/// `mu`. Target states reached below `mu` ("double" states) and overflow
/// states are terminal and carry a zero-weight self-loop.
#[derive(Clone, Debug)]
pub struct UnfoldedGame {
    pub game: GameGraph,
    pub origin: Vec<(StateId, Level)>,
    pub double: Vec<bool>,
    /// Original edge behind each unfolded edge; `None` for the added loops.
    pub edge_origin: Vec<Option<EdgeId>>,
    pub mu: i64,
}

impl UnfoldedGame {
    pub fn state_of(&self, s: StateId, level: Level) -> Option<StateId> {
        self.origin.iter().position(|&o| o == (s, level))
    }

    pub fn double_states(&self) -> BTreeSet<StateId> {
        (0..self.double.len()).filter(|&u| self.double[u]).collect()
    }
}

/// Unfolds `g` from `(initial, 0)`.
pub fn unfold(g: &GameGraph, mu: i64, targets: &BTreeSet<StateId>) -> UnfoldedGame {
    let mut u = UnfoldedGame { game: GameGraph::new(), origin: Vec::new(), double: Vec::new(), edge_origin: Vec::new(), mu };
    let mut index: BTreeMap<(StateId, Level), StateId> = BTreeMap::new();
    let mut queue = VecDeque::new();
    let mut intern = |u: &mut UnfoldedGame, key: (StateId, Level), queue: &mut VecDeque<StateId>| {
        *index.entry(key).or_insert_with(|| {
            let id = u.game.add_state(format!("({},{})", g.name(key.0), key.1), g.owner(key.0));
            u.origin.push(key);
            u.double.push(matches!(key.1, Level::Cost(_)) && targets.contains(&key.0));
            queue.push_back(id);
            id
        })
    };
    let start = intern(&mut u, (g.initial(), Level::Cost(0)), &mut queue);
    u.game.set_initial(start);
    while let Some(id) = queue.pop_front() {
        let (s, level) = u.origin[id];
        let terminal = u.double[id] || level == Level::Top;
        if terminal {
            u.game.add_edge(id, id, 0);
            u.edge_origin.push(None);
            continue;
        }
        let Level::Cost(c) = level else { unreachable!() };
        for &e in g.out_edges(s) {
            let edge = g.edge(e);
            let next = match c.checked_add(edge.weight) {
                Some(c2) if c2 < mu => Level::Cost(c2),
                _ => Level::Top,
            };
            let to = intern(&mut u, (edge.target, next), &mut queue);
            match &edge.label {
                Some(l) => u.game.add_labeled_edge(id, to, edge.weight, l.clone()),
                None => u.game.add_edge(id, to, edge.weight),
            };
            u.edge_origin.push(Some(e));
        }
    }
    u
}

/// Safe region of an unfolding and the subgame it induces.
#[derive(Clone, Debug)]
pub struct SafeSubgame {
    /// Unfolded states from which player 1 forces a double state.
    pub region: BTreeSet<StateId>,
    /// Unfolding restricted to the region: player-1 states keep only edges
    /// into it, adversary states keep all their edges. Empty when the
    /// initial state is unsafe.
    pub game: GameGraph,
    /// Subgame state -> unfolded state.
    pub state_map: Vec<StateId>,
    /// Subgame edge -> unfolded edge.
    pub edge_map: Vec<EdgeId>,
}

impl SafeSubgame {
    pub fn contains_initial(&self, u: &UnfoldedGame) -> bool {
        self.region.contains(&u.game.initial())
    }
}

pub fn safe_region(u: &UnfoldedGame) -> SafeSubgame {
    let mask = attractor_mask(&u.game, &u.double, Player::P1);
    let region: BTreeSet<StateId> = (0..mask.len()).filter(|&s| mask[s]).collect();
    if !mask[u.game.initial()] {
        return SafeSubgame { region, game: GameGraph::new(), state_map: Vec::new(), edge_map: Vec::new() };
    }
    let (game, state_map, edge_map) = u.game.subgame(&mask, |_| true, u.game.initial());
    SafeSubgame { region, game, state_map, edge_map }
}

/// Memory of the folded-back strategy.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum SpMemory {
    Cost(i64),
    Done,
}

/// Solves the beyond worst-case shortest-path problem: cost below `mu`
/// against every adversary and expected cost below `nu` against `m`.
/// With [`Strictness::NonStrict`] both comparisons allow equality.
pub fn synthesize_bwc_sp(
    g: &GameGraph,
    m: &StochasticModel,
    targets: &BTreeSet<StateId>,
    mu: i64,
    nu: &Rational,
    strictness: Strictness,
) -> Result<SynthesisResult, SynthesisError> {
    let query = SynthesisQuery {
        measure: Measure::ShortestPath,
        mu,
        nu: nu.clone(),
        epsilon: None,
        targets: targets.clone(),
    };
    query.check(g)?;
    g.check(Measure::ShortestPath)?;
    m.check(g)?;
    let mu_strict = match strictness {
        Strictness::Strict => mu,
        Strictness::NonStrict => mu.checked_add(1).ok_or(ModelError::WeightOverflow)?,
    };
    let worst = solve_sp_worst_case(g, targets);
    let worst_case_optimum = worst.values[g.initial()].clone();
    let mut result = SynthesisResult {
        measure: Measure::ShortestPath,
        decision: Decision::No(NoReason::WorstCase),
        worst_case_optimum,
        expectation_optimum: None,
        strategy: None,
        certificate: None,
        memory_bound: None,
        details: Vec::new(),
    };

    let u = unfold(g, mu_strict, targets);
    let safe = safe_region(&u);
    result.details.push(("unfolded_states".into(), u.game.num_states().to_string()));
    result.details.push(("safe_region_states".into(), safe.region.len().to_string()));
    if !safe.contains_initial(&u) {
        return Ok(result);
    }

    // Adversary rows of the safe subgame, copied from the model.
    let mut sub_model = StochasticModel::new();
    for (i, &orig_u) in safe.state_map.iter().enumerate() {
        let (s, _) = u.origin[orig_u];
        if safe.game.owner(i) != Player::P2 || u.double[orig_u] {
            continue;
        }
        let dist = m.distribution(g, s).ok_or(ModelError::MissingRow { state: s, name: g.name(s).to_string() })?;
        let by_edge: BTreeMap<EdgeId, Rational> = dist.into_iter().collect();
        let row = safe
            .game
            .out_edges(i)
            .iter()
            .filter_map(|&se| {
                let orig = u.edge_origin[safe.edge_map[se]].expect("inner edge");
                by_edge.get(&orig).map(|p| (se, p.clone()))
            })
            .collect();
        sub_model.set_row(i, row);
    }
    let mdp = apply_model(&safe.game, &sub_model)?;
    let doubles: BTreeSet<StateId> = (0..safe.state_map.len()).filter(|&i| u.double[safe.state_map[i]]).collect();
    let opt = expected_ssp_optimal(&mdp, &doubles);
    let e_star = opt.values[safe.game.initial()].clone();
    result.expectation_optimum = Some(e_star.clone());

    // Fold back: memory is the cost accumulated so far, frozen at "done"
    // once a target is reached; from then on the worst-case strategy plays.
    let sub_index: BTreeMap<(StateId, Level), StateId> =
        safe.state_map.iter().enumerate().map(|(i, &x)| (u.origin[x], i)).collect();
    let start = if targets.contains(&g.initial()) { SpMemory::Done } else { SpMemory::Cost(0) };
    let fallback = |s: StateId| worst.p1_strategy[s].expect("player-1 state has a worst-case choice");
    let strategy = explore(
        g,
        &[(start, g.initial())],
        |mem, s| match mem {
            SpMemory::Cost(c) => {
                let i = sub_index[&(s, Level::Cost(*c))];
                let se = opt.strategy[i].expect("player-1 state of the safe subgame");
                u.edge_origin[safe.edge_map[se]].expect("inner edge")
            }
            SpMemory::Done => fallback(s),
        },
        |mem, e| match mem {
            SpMemory::Cost(c) => {
                let edge = g.edge(e);
                if targets.contains(&edge.target) {
                    SpMemory::Done
                } else {
                    SpMemory::Cost(c + edge.weight)
                }
            }
            SpMemory::Done => SpMemory::Done,
        },
        |mem| match mem {
            SpMemory::Cost(c) => c.to_string(),
            SpMemory::Done => "done".to_string(),
        },
    );
    let bound = g.num_states() * mu_strict as usize;
    assert!(strategy.memory_size() <= bound.max(1), "memory {} exceeds {}", strategy.memory_size(), bound);
    let mut cert = certify(g, m, &strategy, Measure::ShortestPath, targets, mu_strict, None)?;
    let expectation = cert.expectation.clone().unwrap_or(ExtRational::Infinite);
    debug_assert_eq!(expectation, e_star, "folded strategy keeps the optimal expectation");
    let yes = beats(Measure::ShortestPath, &e_star, nu, strictness);
    cert.passed = cert.passed && beats(Measure::ShortestPath, &expectation, nu, strictness);
    result.decision = if yes { Decision::Yes } else { Decision::No(NoReason::Expectation) };
    result.memory_bound = Some(bound);
    result.details.push(("memory_size".into(), strategy.memory_size().to_string()));
    result.strategy = Some(strategy);
    result.certificate = Some(cert);
    Ok(result)
}
