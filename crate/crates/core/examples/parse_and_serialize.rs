//! Text formats: building a game in code, printing it, and parse errors.

use std::collections::BTreeSet;

use bwc::io::{parse_game, parse_model, serialize_game, serialize_model, ParsedGame, ParsedModel};
use bwc::model::{GameGraph, Measure, Player, StochasticModel};
use bwc::rational::ratio;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut g = GameGraph::new();
    let start = g.add_state("start", Player::P1);
    let fork = g.add_state("fork", Player::P2);
    let goal = g.add_state("goal", Player::P1);
    g.add_labeled_edge(start, fork, 2, "go");
    g.add_labeled_edge(start, goal, 9, "direct");
    let quick = g.add_labeled_edge(fork, goal, 1, "quick");
    let slow = g.add_labeled_edge(fork, start, 3, "slow");
    g.add_edge(goal, goal, 1);
    g.set_initial(start);
    let p = ParsedGame { game: g, measure: Measure::ShortestPath, targets: BTreeSet::from([goal]) };
    let text = serialize_game(&p);
    print!("{text}");
    assert_eq!(parse_game(&text)?, p);

    let mut m = StochasticModel::new();
    m.set_row(fork, vec![(quick, ratio(3, 4)), (slow, ratio(1, 4))]);
    let model = ParsedModel::Memoryless(m);
    let mtext = serialize_model(&model, &p.game);
    print!("{mtext}");
    assert_eq!(parse_model(&mtext, &p.game)?, model);

    for bad in ["game shortest-path\nstate a p1\nedge a b 1\n", "game mean-payoff\nstate a p1\nedge a a 1\n"] {
        println!("error: {}", parse_game(bad).unwrap_err());
    }
    let err = parse_model("model memoryless\nrow fork: quick 1/2, slow 1/3\n", &p.game).unwrap_err();
    println!("error: {err}");
    Ok(())
}
