//! Maximal end components of an MDP and their worst-case classification.

use bwc::ec::{classify_ec, maximal_wecs};
use bwc::expectation::mec_decomposition;
use bwc::model::{apply_model, GameGraph, Player, StochasticModel};
use bwc::rational::ratio;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut g = GameGraph::new();
    let hub = g.add_state("hub", Player::P1);
    let coin = g.add_state("coin", Player::P2);
    let safe = g.add_state("safe", Player::P1);
    let trap = g.add_state("trap", Player::P1);
    g.add_edge(hub, coin, 1);
    g.add_edge(hub, safe, 0);
    let win = g.add_edge(coin, hub, 4);
    let lose = g.add_edge(coin, trap, -3);
    g.add_edge(safe, safe, 1);
    g.add_edge(trap, trap, -1);
    g.set_initial(hub);
    let mut m = StochasticModel::new();
    m.set_row(coin, vec![(win, ratio(9, 10)), (lose, ratio(1, 10))]);

    let mdp = apply_model(&g, &m)?;
    let mu = 0;
    for ec in mec_decomposition(&mdp) {
        let c = classify_ec(&g, &ec, mu);
        let names: Vec<&str> = ec.states.iter().map(|&s| g.name(s)).collect();
        println!("{{{}}}: gain {}, worst case {}, {:?}", names.join(", "), ec.value, c.worst_case_value, c.verdict);
    }
    let wecs = maximal_wecs(&g, &m, mu)?;
    println!("{} maximal winning end component(s)", wecs.len());
    Ok(())
}
