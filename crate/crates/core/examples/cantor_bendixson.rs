//! Derived sets, ranks and gaps of a few symbolic compacta, checked against
//! the isolation cascade.

use cpe_workbench::compacta::{isolation_cascade, Scheme, Side};
use cpe_workbench::rational::{format, half, q};

fn run() -> cpe_workbench::Result<()> {
    let nest = Scheme::acc(half(), Side::Below, q(1, 4), q(1, 4), Scheme::points(vec![half()]));
    let mixed = Scheme::union(vec![Scheme::points(vec![q(1, 8)]), Scheme::perfect(q(1, 4), q(3, 4))]);
    for s in [nest, Scheme::acc_nest(3, q(1, 3)), mixed] {
        s.validate()?;
        let (rank, core) = s.cb_rank();
        println!("{}", s.to_json());
        println!("  rank {rank}, perfect core: {}", core.map_or("empty".into(), |c| c.to_json()));
        for alpha in 0..=rank {
            let level = s.derivative_n(alpha);
            let gaps = level.as_ref().map_or(vec![], |l| l.contiguous_intervals(3));
            let shown: Vec<String> = gaps
                .iter()
                .map(|g| format!("({}, {})", format(&g.lo), format(&g.hi)))
                .collect();
            let realized = level.map_or(vec![], |l| l.realize(4));
            let cascade = isolation_cascade(&s, alpha, 4);
            println!(
                "  level {alpha}: widest gaps {}; {} realized points, cascade {}",
                shown.join(" "),
                realized.len(),
                if cascade == realized { "agrees" } else { "differs" }
            );
        }
    }
    Ok(())
}

fn main() {
    if let Err(e) = run() {
        eprintln!("{e}");
        std::process::exit(1);
    }
}
