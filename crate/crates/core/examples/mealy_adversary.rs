//! An adversary model with memory: compose, solve, and map the strategy back.

use bwc::bwc_sp::synthesize_bwc_sp;
use bwc::eval::{certify, project_strategy};
use bwc::io::{parse_game, parse_model, serialize_strategy, ParsedModel};
use bwc::model::{compose_finite_memory_model, Measure};
use bwc::rational::int;
use bwc::synthesis::Strictness;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let p = parse_game(include_str!("../data/commute.g"))?;
    let g = &p.game;
    let ParsedModel::Mealy(fm) = parse_model(include_str!("../data/commute_rush.m"), g)? else {
        unreachable!("commute_rush.m has memory")
    };
    let prod = compose_finite_memory_model(g, &fm)?;
    println!("product: {} states, {} edges", prod.game.num_states(), prod.game.num_edges());
    let targets = prod.lift_states(&p.targets);
    let r = synthesize_bwc_sp(&prod.game, &prod.model, &targets, 60, &int(45), Strictness::Strict)?;
    println!("bwc(60, 45): {}", r.decision);
    if let Some(s) = &r.strategy {
        let c = certify(&prod.game, &prod.model, s, Measure::ShortestPath, &targets, 60, None)?;
        println!("  {c}");
        let back = project_strategy(g, &fm, &prod, s);
        println!("strategy on the original game ({} memory elements):", back.memory_size());
        print!("{}", serialize_strategy(&back, g));
    }
    Ok(())
}
