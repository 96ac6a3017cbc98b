//! Worst case, expectation and beyond worst case on the commuting example.

use bwc::eval::certify;
use bwc::expectation::expected_ssp_optimal;
use bwc::io::{parse_game, parse_model, parse_strategy, ParsedModel};
use bwc::model::{apply_model, Measure};
use bwc::rational::{ext_to_decimal, int};
use bwc::bwc_sp::synthesize_bwc_sp;
use bwc::synthesis::Strictness;
use bwc::worst_case::solve_sp_worst_case;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let p = parse_game(include_str!("../data/commute.g"))?;
    let ParsedModel::Memoryless(m) = parse_model(include_str!("../data/commute.m"), &p.game)? else {
        unreachable!("commute.m is memoryless")
    };
    let g = &p.game;
    let init = g.initial();

    let worst = solve_sp_worst_case(g, &p.targets);
    println!("worst-case optimum: {}", worst.values[init]);
    let mdp = apply_model(g, &m)?;
    let exp = expected_ssp_optimal(&mdp, &p.targets);
    println!("expectation optimum: {}", exp.values[init]);

    for file in [include_str!("../data/always_car.s"), include_str!("../data/always_bicycle.s"), include_str!("../data/three_delays.s")] {
        let s = parse_strategy(file, g)?;
        let c = certify(g, &m, &s, Measure::ShortestPath, &p.targets, 60, None)?;
        let e = c.expectation.as_ref().unwrap();
        println!("strategy with {} memory: worst case {}, expectation {} ({})", s.memory_size(), c.worst_case_value, e, ext_to_decimal(e, 3));
    }

    let r = synthesize_bwc_sp(g, &m, &p.targets, 60, &int(45), Strictness::Strict)?;
    println!("bwc(60, 45): {}", r.decision);
    if let Some(c) = &r.certificate {
        println!("  {c}");
        println!("  witness: {}", c.witness.render(g));
    }
    Ok(())
}
