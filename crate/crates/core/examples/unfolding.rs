//! Unfolding a shortest-path game and keeping the safe part.

use bwc::bwc_sp::{safe_region, synthesize_bwc_sp, unfold};
use bwc::eval::certify;
use bwc::io::{parse_game, parse_model, parse_strategy, ParsedModel};
use bwc::model::Measure;
use bwc::rational::ratio;
use bwc::synthesis::Strictness;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let p = parse_game(include_str!("../data/simple.g"))?;
    let g = &p.game;
    let ParsedModel::Memoryless(m) = parse_model(include_str!("../data/simple.m"), g)? else {
        unreachable!()
    };
    let mu = 8;
    let u = unfold(g, mu, &p.targets);
    let safe = safe_region(&u);
    println!("{} unfolded states, {} safe", u.game.num_states(), safe.region.len());
    for (x, &(s, level)) in u.origin.iter().enumerate() {
        let tag = match (u.double[x], safe.region.contains(&x)) {
            (true, _) => "target",
            (false, true) => "safe",
            (false, false) => "unsafe",
        };
        println!("  ({},{level}) {tag}", g.name(s));
    }

    let thick = parse_strategy(include_str!("../data/thick.s"), g)?;
    let c = certify(g, &m, &thick, Measure::ShortestPath, &p.targets, mu, None)?;
    println!("thick strategy: {c}");

    for (nu, strictness) in [(ratio(5, 1), Strictness::Strict), (ratio(9, 2), Strictness::Strict), (ratio(9, 2), Strictness::NonStrict)] {
        let r = synthesize_bwc_sp(g, &m, &p.targets, mu, &nu, strictness)?;
        println!("nu = {nu} {strictness:?}: {}", r.decision);
    }
    Ok(())
}
