//! Exact evaluation of a strategy next to a Monte Carlo estimate.

use bwc::eval::certify;
use bwc::io::{parse_game, parse_model, parse_strategy, ParsedModel};
use bwc::model::{apply_model, apply_strategy_until, Measure};
use bwc::rational::ext_to_decimal;
use bwc::sim::simulate;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let p = parse_game(include_str!("../data/commute.g"))?;
    let g = &p.game;
    let ParsedModel::Memoryless(m) = parse_model(include_str!("../data/commute.m"), g)? else {
        unreachable!()
    };
    let s = parse_strategy(include_str!("../data/three_delays.s"), g)?;
    let c = certify(g, &m, &s, Measure::ShortestPath, &p.targets, 60, None)?;
    let exact = c.expectation.unwrap();
    println!("exact: worst case {}, expectation {} ({})", c.worst_case_value, exact, ext_to_decimal(&exact, 4));

    let chain = apply_strategy_until(&apply_model(g, &m)?, &s, &p.targets)?;
    let sum = simulate(&chain, Measure::ShortestPath, &p.targets, 20_000, 1000, 42)?;
    println!(
        "{} runs ({}): mean {:.4} +- {:.4}, range {}..{}",
        sum.runs,
        sum.prng,
        bwc::rational::to_decimal(&sum.mean, 4),
        sum.std_error(),
        sum.min.unwrap(),
        sum.max.unwrap()
    );
    for (cost, n) in &sum.histogram {
        println!("  {cost:>3}: {n}");
    }
    Ok(())
}
