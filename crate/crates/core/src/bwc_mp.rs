//! Beyond worst-case decision and synthesis for the mean-payoff.
//!
//! Inside a winning end component the combined strategy alternates an
//! expectation phase of `K` steps (playing an expectation-optimal memoryless
//! strategy while summing `w - mu`) with, whenever that sum is not positive,
//! a compensation phase of `L` steps of a worst-case winning strategy.
//!
//! Outside the winning end components, player 1 follows an optimal
//! reachability strategy towards them, guarded by a deficit watchdog: the
//! counter `c <- min(0, c + w - mu - 1)` is tracked and, once it drops below
//! `-D`, the global worst-case optimal strategy takes over for good. Any
//! adversary move leaving the end component being played also hands over to
//! that strategy. Every emitted strategy is verified exactly.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;

use crate::ec::{classify_ec, maximal_wecs_within, Verdict};
use crate::eval::{certify, product_from, worst_mean};
use crate::expectation::{expected_mp_optimal, max_gain_pi, mc_expected_mp, Choice, EcRecord, SolverMdp};
use crate::graph_util::reachable;
use crate::model::{
    apply_model, apply_strategy, EdgeId, FiniteMemoryStrategy, GameGraph, Mdp, Measure, ModelError, Player, StateId,
    StochasticModel,
};
use crate::rational::{int, ExtRational, Rational};
use crate::synthesis::{explore, Decision, NoReason, SynthesisError, SynthesisResult};
use crate::worst_case::{solve_mp_game, GameValueTable};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CombinedStrategyParams {
    pub k: u64,
    pub l: u64,
}

impl CombinedStrategyParams {
    /// Memory bound `K (2 K W + 1) + L` for weights with `|w - mu| <= w_max`.
    pub fn memory_bound(&self, w_max: i64) -> u128 {
        let k = self.k as u128;
        k * (2 * k * w_max as u128 + 1) + self.l as u128
    }
}

/// Memory of the combined strategy.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CombinedMemoryState {
    /// Expectation phase, `step < K`, `sum` of `w - mu` so far.
    A { step: u64, sum: i64 },
    /// Compensation phase, `step < L`.
    B { step: u64 },
}

impl CombinedMemoryState {
    pub const START: CombinedMemoryState = CombinedMemoryState::A { step: 0, sum: 0 };

    /// Memory after an edge whose weight minus `mu` is `shifted`.
    pub fn next(self, shifted: i64, params: CombinedStrategyParams) -> Self {
        match self {
            CombinedMemoryState::A { step, sum } => {
                let sum = sum + shifted;
                if step + 1 < params.k {
                    CombinedMemoryState::A { step: step + 1, sum }
                } else if sum > 0 {
                    Self::START
                } else {
                    CombinedMemoryState::B { step: 0 }
                }
            }
            CombinedMemoryState::B { step } => {
                if step + 1 < params.l {
                    CombinedMemoryState::B { step: step + 1 }
                } else {
                    Self::START
                }
            }
        }
    }
}

impl fmt::Display for CombinedMemoryState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CombinedMemoryState::A { step, sum } => write!(f, "a{step}_{sum}"),
            CombinedMemoryState::B { step } => write!(f, "b{step}"),
        }
    }
}

/// A winning end component as a stand-alone game and MDP.
#[derive(Clone, Debug)]
pub struct WecInstance {
    pub wec: EcRecord,
    /// The end component with its internal edges only.
    pub game: GameGraph,
    pub mdp: Mdp,
    /// Subgame state -> original state.
    pub state_map: Vec<StateId>,
    /// Subgame edge -> original edge.
    pub edge_map: Vec<EdgeId>,
    /// Expectation-optimal memoryless strategy (subgame edges).
    pub sigma_e: Vec<Option<EdgeId>>,
    /// Worst-case winning memoryless strategy (subgame edges).
    pub sigma_w: Vec<Option<EdgeId>>,
    /// Optimal expected mean-payoff inside the end component.
    pub gain: Rational,
    /// Worst-case value of `sigma_w` minus `mu` (positive).
    pub margin: Rational,
    pub mu: i64,
    /// Largest `|w - mu|` over internal edges.
    pub w_max: i64,
}

impl WecInstance {
    pub fn new(g: &GameGraph, m: &StochasticModel, wec: &EcRecord, mu: i64) -> Result<Self, SynthesisError> {
        let class = classify_ec(g, wec, mu);
        if class.verdict != Verdict::Winning {
            return Err(SynthesisError::NotAWec);
        }
        let witness = class.witness.expect("winning classification has a witness");
        let keep: Vec<bool> = (0..g.num_states()).map(|s| wec.states.contains(&s)).collect();
        let first = *wec.states.iter().next().ok_or(SynthesisError::NotAWec)?;
        let (game, state_map, edge_map) = g.subgame(&keep, |_| true, first);
        let sub_edge: BTreeMap<EdgeId, EdgeId> = edge_map.iter().enumerate().map(|(i, &e)| (e, i)).collect();
        let mut sub_model = StochasticModel::new();
        for (i, &s) in state_map.iter().enumerate() {
            if g.owner(s) != Player::P2 {
                continue;
            }
            let dist = m.distribution(g, s).ok_or(ModelError::MissingRow { state: s, name: g.name(s).to_string() })?;
            let mut row = Vec::new();
            for (e, p) in dist {
                if p.is_zero() {
                    continue;
                }
                // stochastic support must stay inside an end component
                let &se = sub_edge.get(&e).ok_or(SynthesisError::NotAWec)?;
                row.push((se, p));
            }
            sub_model.set_row(i, row);
        }
        let mdp = apply_model(&game, &sub_model)?;
        let opt = expected_mp_optimal(&mdp);
        let gain = opt.values[0].clone();
        let sigma_w = state_map.iter().map(|&s| witness[s].map(|e| sub_edge[&e])).collect();
        let w_max = game.edges().iter().map(|e| (e.weight - mu).abs()).max().unwrap_or(0);
        Ok(WecInstance {
            wec: wec.clone(),
            game,
            mdp,
            state_map,
            edge_map,
            sigma_e: opt.strategy,
            sigma_w,
            gain,
            margin: class.worst_case_value - int(mu),
            mu,
            w_max,
        })
    }

    fn entries(&self) -> Vec<(CombinedMemoryState, StateId)> {
        (0..self.game.num_states()).map(|s| (CombinedMemoryState::START, s)).collect()
    }

    pub(crate) fn combined_action(&self, mem: &CombinedMemoryState, s: StateId) -> EdgeId {
        let choice = match mem {
            CombinedMemoryState::A { .. } => self.sigma_e[s],
            CombinedMemoryState::B { .. } => self.sigma_w[s],
        };
        choice.expect("player-1 state of the end component")
    }
}

/// The combined strategy on the end component's subgame, explored from
/// every state of the component with initial memory `(a, 0, 0)`.
pub fn combined_strategy(inst: &WecInstance, params: CombinedStrategyParams) -> FiniteMemoryStrategy {
    assert!(params.k >= 1 && params.l >= 1, "K and L must be positive");
    explore(
        &inst.game,
        &inst.entries(),
        |mem, s| inst.combined_action(mem, s),
        |mem, e| mem.next(inst.game.edge(e).weight - inst.mu, params),
        |mem| mem.to_string(),
    )
}

/// Accepted parameters with their exact certificates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Calibration {
    pub params: CombinedStrategyParams,
    /// Minimum cycle mean over the product from every entry state.
    pub worst_case: Rational,
    /// Minimum over entry states of the exact expected mean-payoff.
    pub expectation: Rational,
    pub memory_size: usize,
}

fn worst_case_of(inst: &WecInstance, s: &FiniteMemoryStrategy) -> Rational {
    let starts: Vec<(usize, StateId)> = (0..inst.game.num_states()).map(|x| (s.initial_memory(), x)).collect();
    let p = product_from(&inst.game, s, &starts, &BTreeSet::new()).expect("combined strategy is total");
    let nodes: Vec<usize> = starts.iter().map(|&(m, x)| p.node(m, x).unwrap()).collect();
    worst_mean(&inst.game, &p, &nodes).0
}

fn expectation_of(inst: &WecInstance, s: &FiniteMemoryStrategy) -> Rational {
    (0..inst.game.num_states())
        .map(|x| mc_expected_mp(&apply_strategy(&inst.mdp.with_initial(x), s).expect("combined strategy is total")))
        .min()
        .expect("end component is nonempty")
}

/// Compensation length that provably wins for this `K`:
/// `ceil((K W + (n - 1) W + 1) / margin) + n - 1`.
pub fn safe_compensation_length(inst: &WecInstance, k: u64) -> u64 {
    let n = inst.game.num_states() as i64 - 1;
    let w = inst.w_max;
    let num = int(k as i64 * w + n * w + 1);
    let l = (num / &inst.margin).ceil().to_integer().to_u64().expect("compensation length fits");
    l + n as u64
}

fn try_k(inst: &WecInstance, k: u64, target: &Rational) -> Option<Calibration> {
    let passes = |l: u64| {
        let s = combined_strategy(inst, CombinedStrategyParams { k, l });
        worst_case_of(inst, &s) > int(inst.mu)
    };
    let (mut lo, mut hi) = (1, safe_compensation_length(inst, k).max(1));
    if !passes(hi) {
        log::warn!("K = {k}: safe compensation length {hi} failed verification");
        return None;
    }
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if passes(mid) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    let params = CombinedStrategyParams { k, l: lo };
    let s = combined_strategy(inst, params);
    let expectation = expectation_of(inst, &s);
    log::debug!("K = {k}, L = {lo}: expectation {expectation}");
    if expectation < *target {
        return None;
    }
    assert!(s.memory_size() as u128 <= params.memory_bound(inst.w_max));
    Some(Calibration { params, worst_case: worst_case_of(inst, &s), expectation, memory_size: s.memory_size() })
}

/// Smallest `K` in 1, 2, 4, ... up to `budget_k` (with the smallest passing
/// `L` for it) whose combined strategy certifiably wins the worst case and
/// has expectation at least `gain - epsilon` from every state.
pub fn calibrate_kl(inst: &WecInstance, epsilon: &Rational, budget_k: u64) -> Result<Calibration, SynthesisError> {
    let target = &inst.gain - epsilon;
    let mut schedule = Vec::new();
    let mut k = 1u64;
    while k <= budget_k.max(1) {
        schedule.push(k);
        k *= 2;
    }
    let width = rayon::current_num_threads().max(1);
    for chunk in schedule.chunks(width) {
        let found: Vec<Option<Calibration>> = chunk.par_iter().map(|&k| try_k(inst, k, &target)).collect();
        if let Some(c) = found.into_iter().flatten().next() {
            return Ok(c);
        }
    }
    Err(SynthesisError::CalibrationBudgetExceeded { max_k: *schedule.last().unwrap() })
}

/// Everything the decision computes, reused by synthesis.
#[derive(Clone, Debug)]
pub struct MpAnalysis {
    pub game_values: GameValueTable<Rational>,
    /// States whose worst-case value exceeds `mu`.
    pub winning: Vec<bool>,
    pub wecs: Vec<EcRecord>,
    pub wec_of: Vec<Option<usize>>,
    /// Best expectation reachable while keeping the worst case (supremum);
    /// `None` when the initial state is worst-case losing.
    pub e_dagger: Option<Rational>,
    /// Player-1 choices outside the end components (towards them).
    pub transient: Vec<Option<EdgeId>>,
    /// End components reached with positive probability under `transient`.
    pub used_wecs: BTreeSet<usize>,
}

/// Worst-case region, maximal winning end components and the optimal
/// expectation of reaching them.
pub fn bwc_mp_analyze(g: &GameGraph, m: &StochasticModel, mu: i64) -> Result<MpAnalysis, SynthesisError> {
    g.check(Measure::MeanPayoff)?;
    let mdp = apply_model(g, m)?;
    let n = g.num_states();
    let game_values = solve_mp_game(g);
    let winning: Vec<bool> = game_values.values.iter().map(|v| *v > int(mu)).collect();
    let mut analysis = MpAnalysis {
        game_values,
        winning: winning.clone(),
        wecs: Vec::new(),
        wec_of: vec![None; n],
        e_dagger: None,
        transient: vec![None; n],
        used_wecs: BTreeSet::new(),
    };
    if !winning[g.initial()] {
        return Ok(analysis);
    }
    let wecs = maximal_wecs_within(&mdp, &winning, mu);
    for (i, w) in wecs.iter().enumerate() {
        for &s in &w.states {
            analysis.wec_of[s] = Some(i);
        }
    }
    // Collapsed MDP: one node per winning state outside the end components,
    // one absorbing node per end component rewarded with its shifted gain.
    let shift = int(1) - wecs.iter().map(|w| w.value.clone()).min().unwrap_or_else(Rational::zero);
    let mut node = vec![usize::MAX; n];
    let mut count = 0;
    for s in 0..n {
        if winning[s] && analysis.wec_of[s].is_none() {
            node[s] = count;
            count += 1;
        }
    }
    let wec_node = |i: usize| count + i;
    let target_node = |t: StateId, node: &[usize], wec_of: &[Option<usize>]| match wec_of[t] {
        Some(i) => wec_node(i),
        None => node[t],
    };
    let mut choices: Vec<Vec<Choice>> = vec![Vec::new(); count + wecs.len()];
    for s in 0..n {
        if node[s] == usize::MAX {
            continue;
        }
        let list = &mut choices[node[s]];
        match mdp.distribution(s) {
            Some(d) => {
                let mut succ: BTreeMap<usize, Rational> = BTreeMap::new();
                for (e, p) in d {
                    let t = g.edge(*e).target;
                    debug_assert!(winning[t]);
                    *succ.entry(target_node(t, &node, &analysis.wec_of)).or_insert_with(Rational::zero) += p;
                }
                list.push(Choice { edge: None, reward: Rational::zero(), succ: succ.into_iter().collect() });
            }
            None => {
                for &e in g.out_edges(s) {
                    let t = g.edge(e).target;
                    if winning[t] {
                        let succ = vec![(target_node(t, &node, &analysis.wec_of), Rational::one())];
                        list.push(Choice { edge: Some(e), reward: Rational::zero(), succ });
                    }
                }
            }
        }
    }
    for (i, w) in wecs.iter().enumerate() {
        choices[wec_node(i)].push(Choice { edge: None, reward: &w.value + &shift, succ: vec![(wec_node(i), Rational::one())] });
    }
    let solver = SolverMdp { choices };
    let start = target_node(g.initial(), &node, &analysis.wec_of);
    let (gain, policy) = max_gain_pi(&solver, vec![0; solver.num_states()]);
    analysis.e_dagger = Some(&gain[start] - &shift);
    let edges = solver.edge_strategy(&policy);
    for s in 0..n {
        if node[s] != usize::MAX && g.owner(s) == Player::P1 {
            analysis.transient[s] = edges[node[s]];
        }
    }
    let adj: Vec<Vec<usize>> = (0..solver.num_states())
        .map(|u| solver.choices[u][policy[u]].succ.iter().filter(|(_, p)| p.is_positive()).map(|(v, _)| *v).collect())
        .collect();
    let seen = reachable(&adj, [start]);
    analysis.used_wecs = (0..wecs.len()).filter(|&i| seen[wec_node(i)]).collect();
    analysis.wecs = wecs;
    Ok(analysis)
}

/// Decides whether some finite-memory strategy keeps the mean-payoff above
/// `mu` against every adversary and has expectation above `nu` against `m`.
pub fn bwc_mp_decide(
    g: &GameGraph,
    m: &StochasticModel,
    mu: i64,
    nu: &Rational,
) -> Result<(Decision, MpAnalysis), SynthesisError> {
    let analysis = bwc_mp_analyze(g, m, mu)?;
    let decision = match &analysis.e_dagger {
        None => Decision::No(NoReason::WorstCase),
        Some(e) if e > nu => Decision::Yes,
        Some(_) => Decision::No(NoReason::Expectation),
    };
    Ok((decision, analysis))
}

/// Memory of the assembled strategy.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum GlobalMemory {
    Transient(i64),
    Wec(usize, CombinedMemoryState),
    Fallback,
}

/// Synthesises and certifies a beyond worst-case strategy for the
/// mean-payoff. `epsilon` defaults to half the gap between the optimum and
/// `nu` and must be smaller than that gap.
pub fn synthesize_bwc_mp(
    g: &GameGraph,
    m: &StochasticModel,
    mu: i64,
    nu: &Rational,
    epsilon: Option<&Rational>,
    budget_k: u64,
) -> Result<SynthesisResult, SynthesisError> {
    let (decision, analysis) = bwc_mp_decide(g, m, mu, nu)?;
    let init = g.initial();
    let mut result = SynthesisResult {
        measure: Measure::MeanPayoff,
        decision,
        worst_case_optimum: ExtRational::Finite(analysis.game_values.values[init].clone()),
        expectation_optimum: analysis.e_dagger.clone().map(ExtRational::Finite),
        strategy: None,
        certificate: None,
        memory_bound: None,
        details: vec![("winning_end_components".into(), analysis.wecs.len().to_string())],
    };
    if decision != Decision::Yes {
        return Ok(result);
    }
    let e_dagger = analysis.e_dagger.clone().expect("yes implies a value");
    let gap = &e_dagger - nu;
    let epsilon = match epsilon {
        Some(e) if e.is_positive() && *e < gap => e.clone(),
        Some(e) => {
            return Err(ModelError::InvalidQuery(format!("epsilon {e} must be positive and below {gap}")).into());
        }
        None => &gap / int(2),
    };
    result.details.push(("epsilon".into(), epsilon.to_string()));
    let goal = &e_dagger - &epsilon;

    let start_wec = analysis.wec_of[init];
    let used: Vec<usize> = match start_wec {
        Some(i) => vec![i],
        None => analysis.used_wecs.iter().copied().collect(),
    };
    let mut instances: BTreeMap<usize, WecInstance> = BTreeMap::new();
    for &i in &used {
        instances.insert(i, WecInstance::new(g, m, &analysis.wecs[i], mu)?);
    }
    let w_global = g.edges().iter().map(|e| (e.weight - mu).abs()).max().unwrap_or(0) + 1;
    let mut wec_eps = if start_wec.is_some() { epsilon.clone() } else { &epsilon / int(2) };

    for _round in 0..4 {
        let mut calibrations: BTreeMap<usize, Calibration> = BTreeMap::new();
        for (&i, inst) in &instances {
            calibrations.insert(i, calibrate_kl(inst, &wec_eps, budget_k)?);
        }
        let mut deficit = g.num_states() as i64 * w_global;
        let attempts = if start_wec.is_some() { 1 } else { 12 };
        for _ in 0..attempts {
            let strategy = assemble(g, &analysis, &instances, &calibrations, mu, deficit);
            let mut bound: u128 = calibrations.iter().map(|(i, c)| c.params.memory_bound(instances[i].w_max)).sum();
            if start_wec.is_none() {
                bound += deficit as u128 + 2;
            }
            assert!(strategy.memory_size() as u128 <= bound, "memory exceeds {bound}");
            let cert = certify(g, m, &strategy, Measure::MeanPayoff, &BTreeSet::new(), mu, Some(nu))?;
            let expectation = match &cert.expectation {
                Some(ExtRational::Finite(e)) => e.clone(),
                _ => unreachable!("mean-payoff expectation is finite"),
            };
            log::info!("deficit bound {deficit}: {cert}");
            if cert.passed && expectation >= goal {
                for (i, c) in &calibrations {
                    result.details.push((format!("wec{i}_k"), c.params.k.to_string()));
                    result.details.push((format!("wec{i}_l"), c.params.l.to_string()));
                    result.details.push((format!("wec{i}_gain"), instances[i].gain.to_string()));
                }
                if start_wec.is_none() {
                    result.details.push(("deficit_bound".into(), deficit.to_string()));
                }
                result.details.push(("memory_size".into(), strategy.memory_size().to_string()));
                result.memory_bound = Some(bound.min(usize::MAX as u128) as usize);
                result.strategy = Some(strategy);
                result.certificate = Some(cert);
                return Ok(result);
            }
            deficit *= 2;
        }
        wec_eps /= int(2);
    }
    Err(SynthesisError::CalibrationBudgetExceeded { max_k: budget_k })
}

fn assemble(
    g: &GameGraph,
    analysis: &MpAnalysis,
    instances: &BTreeMap<usize, WecInstance>,
    calibrations: &BTreeMap<usize, Calibration>,
    mu: i64,
    deficit: i64,
) -> FiniteMemoryStrategy {
    // original id -> subgame id, per used end component
    type IdMaps = (BTreeMap<StateId, StateId>, BTreeMap<EdgeId, EdgeId>);
    let local: BTreeMap<usize, IdMaps> = instances
        .iter()
        .map(|(&i, inst)| {
            let st = inst.state_map.iter().enumerate().map(|(a, &b)| (b, a)).collect();
            let ed = inst.edge_map.iter().enumerate().map(|(a, &b)| (b, a)).collect();
            (i, (st, ed))
        })
        .collect();
    let fallback = |s: StateId| analysis.game_values.p1_strategy[s].expect("player-1 state has a worst-case choice");
    let start = match analysis.wec_of[g.initial()] {
        Some(i) => GlobalMemory::Wec(i, CombinedMemoryState::START),
        None => GlobalMemory::Transient(0),
    };
    let enter = |t: StateId| match analysis.wec_of[t] {
        Some(i) if instances.contains_key(&i) => Some(GlobalMemory::Wec(i, CombinedMemoryState::START)),
        Some(_) => Some(GlobalMemory::Fallback),
        None => None,
    };
    explore(
        g,
        &[(start, g.initial())],
        |mem, s| match mem {
            GlobalMemory::Transient(_) => analysis.transient[s].unwrap_or_else(|| fallback(s)),
            GlobalMemory::Wec(i, cm) => match local[i].0.get(&s) {
                Some(&ls) => instances[i].edge_map[instances[i].combined_action(cm, ls)],
                None => fallback(s),
            },
            GlobalMemory::Fallback => fallback(s),
        },
        |mem, e| {
            let edge = g.edge(e);
            match *mem {
                GlobalMemory::Transient(c) => enter(edge.target).unwrap_or_else(|| {
                    let c = (c + edge.weight - mu - 1).min(0);
                    if c < -deficit {
                        GlobalMemory::Fallback
                    } else {
                        GlobalMemory::Transient(c)
                    }
                }),
                GlobalMemory::Wec(i, cm) => match local[&i].1.get(&e) {
                    Some(_) => GlobalMemory::Wec(i, cm.next(edge.weight - mu, calibrations[&i].params)),
                    None => GlobalMemory::Fallback,
                },
                GlobalMemory::Fallback => GlobalMemory::Fallback,
            }
        },
        |mem| match mem {
            GlobalMemory::Transient(c) => format!("t{c}"),
            GlobalMemory::Wec(i, cm) => format!("w{i}_{cm}"),
            GlobalMemory::Fallback => "fallback".to_string(),
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::{exact_expectation, verify_worst_case_mp};
    use crate::expectation::mec_decomposition;
    use crate::rational::ratio;

    /// a (P1): a->b 0, a->a 1; b (P2): b->a 6 | b->a 0, each 1/2.
    fn ab() -> (GameGraph, StochasticModel) {
        let mut g = GameGraph::new();
        let a = g.add_state("a", Player::P1);
        let b = g.add_state("b", Player::P2);
        g.add_edge(a, b, 0);
        g.add_edge(a, a, 1);
        let hi = g.add_edge(b, a, 6);
        let lo = g.add_edge(b, a, 0);
        let mut m = StochasticModel::new();
        m.set_row(b, vec![(hi, ratio(1, 2)), (lo, ratio(1, 2))]);
        (g, m)
    }

    fn instance() -> (GameGraph, StochasticModel, WecInstance) {
        let (g, m) = ab();
        let mdp = apply_model(&g, &m).unwrap();
        let ec = mec_decomposition(&mdp).remove(0);
        let inst = WecInstance::new(&g, &m, &ec, 0).unwrap();
        (g, m, inst)
    }

    #[test]
    fn instance_facts() {
        let (_, _, inst) = instance();
        assert_eq!(inst.gain, ratio(3, 2));
        assert_eq!(inst.margin, int(1));
        assert_eq!(inst.w_max, 6);
        assert_eq!(inst.sigma_e[0], Some(0));
        assert_eq!(inst.sigma_w[0], Some(1));
    }

    #[test]
    fn k2_l1_gives_seven_fifths() {
        let (g, m, inst) = instance();
        let p = CombinedStrategyParams { k: 2, l: 1 };
        let s = combined_strategy(&inst, p);
        assert!(s.memory_size() as u128 <= p.memory_bound(inst.w_max));
        assert!(verify_worst_case_mp(&g, &s, 0).unwrap().passed);
        assert_eq!(exact_expectation(&g, &m, &s, Measure::MeanPayoff, &BTreeSet::new()).unwrap(), ExtRational::Finite(ratio(7, 5)));
        let s = combined_strategy(&inst, CombinedStrategyParams { k: 1, l: 1 });
        assert!(!verify_worst_case_mp(&g, &s, 0).unwrap().passed);
    }

    #[test]
    fn calibration_meets_epsilon() {
        let (_, _, inst) = instance();
        for eps in [ratio(1, 2), ratio(1, 4), ratio(1, 8)] {
            let c = calibrate_kl(&inst, &eps, 64).unwrap();
            assert!(c.expectation >= &inst.gain - &eps);
            assert!(c.worst_case > int(0));
        }
    }

    #[test]
    fn decision_boundary() {
        let (g, m) = ab();
        assert_eq!(bwc_mp_decide(&g, &m, 0, &int(1)).unwrap().0, Decision::Yes);
        assert_eq!(bwc_mp_decide(&g, &m, 0, &ratio(3, 2)).unwrap().0, Decision::No(NoReason::Expectation));
        assert_eq!(bwc_mp_decide(&g, &m, 1, &int(0)).unwrap().0, Decision::No(NoReason::WorstCase));
        let r = synthesize_bwc_mp(&g, &m, 0, &int(1), Some(&ratio(1, 8)), 64).unwrap();
        let cert = r.certificate.unwrap();
        assert!(cert.passed);
        assert!(cert.expectation.unwrap() >= ExtRational::Finite(ratio(11, 8)));
    }
}
