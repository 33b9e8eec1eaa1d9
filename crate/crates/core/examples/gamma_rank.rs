//! Γ iteration on the entropy pairs of ψ(A): the exact symbolic levels next
//! to the ε-fattened grid iteration.

use cpe_workbench::compacta::Scheme;
use cpe_workbench::gamma::{cross_validate, gamma_trace, symbolic_levels, IntervalSquareRelation};
use cpe_workbench::rational::{half, q};
use cpe_workbench::space::FiniteSpace;

fn run() -> cpe_workbench::Result<()> {
    let rel = IntervalSquareRelation::new(Scheme::points(vec![half()]));
    let space = FiniteSpace::grid(8);
    for row in gamma_trace(&space, &rel.discretize(8), &q(1, 8)) {
        println!("step {} pairs {} fixed {}", row.step, row.pair_count, row.is_fixed);
    }

    for depth in 1..=3 {
        let s = Scheme::acc_nest(depth, q(1, 4));
        let levels = symbolic_levels(&IntervalSquareRelation::new(s.clone()));
        let r = cross_validate(&s, 512, &q(1, 128))?;
        println!(
            "nest {depth}: symbolic rank {}, finite rank {}, {:?}, first unresolved {:?}",
            levels.len() - 1,
            r.finite_rank,
            r.status,
            r.first_unresolved_level
        );
    }
    Ok(())
}

fn main() {
    if let Err(e) = run() {
        eprintln!("{e}");
        std::process::exit(1);
    }
}
