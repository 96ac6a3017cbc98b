//! Beyond worst case for the mean-payoff: end components and calibration
//! of the combined strategy.

use bwc::bwc_mp::{bwc_mp_analyze, calibrate_kl, synthesize_bwc_mp, WecInstance};
use bwc::io::{parse_game, parse_model, ParsedModel};
use bwc::rational::{int, ratio, to_decimal};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let p = parse_game(include_str!("../data/wec.g"))?;
    let g = &p.game;
    let ParsedModel::Memoryless(m) = parse_model(include_str!("../data/wec.m"), g)? else {
        unreachable!()
    };
    let mu = 0;
    let a = bwc_mp_analyze(g, &m, mu)?;
    println!("worst-case value: {}", a.game_values.values[g.initial()]);
    println!("best expectation keeping the worst case: {}", a.e_dagger.as_ref().unwrap());

    let inst = WecInstance::new(g, &m, &a.wecs[0], mu)?;
    println!("end component gain {}, worst-case margin {}", inst.gain, inst.margin);
    for eps in [ratio(1, 2), ratio(1, 4), ratio(1, 8)] {
        let c = calibrate_kl(&inst, &eps, 64)?;
        println!(
            "epsilon {eps}: K = {}, L = {}, expectation {} ({}), worst case {}, memory {}",
            c.params.k,
            c.params.l,
            c.expectation,
            to_decimal(&c.expectation, 4),
            c.worst_case,
            c.memory_size
        );
    }

    let r = synthesize_bwc_mp(g, &m, mu, &int(1), None, 1024)?;
    println!("bwc(0, 1): {}", r.decision);
    if let Some(c) = &r.certificate {
        println!("  {c}");
    }
    let r = synthesize_bwc_mp(g, &m, mu, &ratio(3, 2), None, 1024)?;
    println!("bwc(0, 3/2): {}", r.decision);
    Ok(())
}
