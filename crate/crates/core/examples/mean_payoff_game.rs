//! Two-player mean-payoff values and minimum cycle means.

use bwc::model::{GameGraph, Player};
use bwc::worst_case::{min_cycle_mean, solve_mp_game, WeightedDigraph};

fn main() {
    let mut g = GameGraph::new();
    let a = g.add_state("a", Player::P1);
    let b = g.add_state("b", Player::P2);
    let c = g.add_state("c", Player::P1);
    g.add_edge(a, b, 3);
    g.add_edge(a, c, -1);
    g.add_edge(b, a, 1);
    g.add_edge(b, c, 0);
    g.add_edge(c, c, 1);
    g.add_edge(c, a, 2);
    g.set_initial(a);

    let t = solve_mp_game(&g);
    for s in 0..g.num_states() {
        let choice = t.p1_strategy[s].or(t.p2_strategy[s]).map(|e| g.name(g.edge(e).target).to_string());
        println!("{}: value {}, plays {}", g.name(s), t.values[s], choice.unwrap_or_default());
    }

    let mut d = WeightedDigraph::new(4);
    for (u, v, w) in [(0, 1, 4), (1, 2, -2), (2, 0, 1), (2, 3, 5), (3, 3, 2)] {
        d.add_edge(u, v, w);
    }
    println!("minimum cycle mean from 0: {}", min_cycle_mean(&d, 0).unwrap());
    println!("minimum cycle mean from 3: {}", min_cycle_mean(&d, 3).unwrap());
}
