//! ψ(A) pasted from scaled tents, exact lap counts and the CPE verdict.

use cpe_workbench::compacta::Scheme;
use cpe_workbench::interval_maps::{
    cpe_verdict, entropy_table, eval_psi, psi_finite, tent, PsiMap, DEFAULT_BUDGET,
};
use cpe_workbench::rational::{format, half, q};

fn run() -> cpe_workbench::Result<()> {
    for row in entropy_table(&tent(), 8, DEFAULT_BUDGET)? {
        println!("tent n={} laps={} h~{:.12}", row.n, row.laps, row.estimate);
    }

    let a = Scheme::points(vec![half()]);
    let f = psi_finite(&a, 1);
    let bps: Vec<String> = f.breakpoints.iter().map(format).collect();
    println!("psi breakpoints {}", bps.join(" "));
    let m = PsiMap::new(Scheme::acc_nest(2, q(1, 4)));
    for x in [q(1, 8), q(7, 16), q(3, 4)] {
        println!("psi({}) = {}", format(&x), format(&eval_psi(&m, &x)?));
    }
    for row in entropy_table(&f, 6, DEFAULT_BUDGET)? {
        println!("psi n={} laps={} h~{:.6}", row.n, row.laps, row.estimate);
    }

    for s in [a, Scheme::acc_nest(3, q(1, 4)), Scheme::perfect(q(1, 4), q(3, 4))] {
        println!("{} -> {}", s.to_json(), serde_json::to_string(&cpe_verdict(&s)).expect("serializes"));
    }
    Ok(())
}

fn main() {
    if let Err(e) = run() {
        eprintln!("{e}");
        std::process::exit(1);
    }
}
