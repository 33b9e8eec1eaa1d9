//! Finite shadowing verdicts and the weave of pseudo-orbit blocks.

use cpe_workbench::rational::q;
use cpe_workbench::shadowing::{
    demo, finite_shadowing_check, independence_from_shadowing, weave, GridSystem, ShadowVerdict,
};
use cpe_workbench::space::FiniteSpace;

fn run() -> cpe_workbench::Result<()> {
    let id = GridSystem::identity(FiniteSpace::grid(10));
    match finite_shadowing_check(&id, &q(1, 5), &q(1, 10), 10, 1_000_000, 0)? {
        ShadowVerdict::Fails { witness } => println!("identity drifts: {:?}", witness.seq),
        v => println!("identity: {v:?}"),
    }
    let tent = GridSystem::tent_grid(6);
    println!("tent grid: {:?}", finite_shadowing_check(&tent, &q(1, 3), &q(1, 12), 4, 1_000_000, 0)?);

    let (sys, inputs) = demo::full_shift_grid(4)?;
    println!("full-shift grid: {} points, period {}", sys.len(), inputs.period());
    let orbit = weave(&sys, &inputs, &[1, 3, 3, 1, 1], &demo::delta())?;
    println!("woven pattern 1331: {} points", orbit.seq.len());
    let r = independence_from_shadowing(&sys, &inputs, &demo::eps(), &demo::delta(), 4)?;
    println!("independence at {:?}: verified {}", r.positions, r.verified);

    let (cyc, cyc_inputs) = demo::single_cycle()?;
    let r = independence_from_shadowing(&cyc, &cyc_inputs, &demo::eps(), &demo::delta(), 2)?;
    println!("single cycle: verified {}, failing pattern {:?}", r.verified, r.failing_pattern);
    Ok(())
}

fn main() {
    if let Err(e) = run() {
        eprintln!("{e}");
        std::process::exit(1);
    }
}
