//! Golden-mean shift: entropy, word counts and independence densities.

use cpe_workbench::rational::{format, q};
use cpe_workbench::shifts::{Cylinder, Sft};

fn run() -> cpe_workbench::Result<()> {
    let g = Sft::from_forbidden(&["0", "1"], &["11"])?;
    let h = g.entropy(1e-12)?;
    println!("entropy {h:.10} (golden ratio log {:.10})", ((1.0 + 5f64.sqrt()) / 2.0).ln());
    for k in [5, 10, 20] {
        println!("words of length {k}: {}", g.word_count(k));
    }

    let (u, v) = (Cylinder::new("0"), Cylinder::new("1"));
    for d in g.density_profile(&u, &v, 10)? {
        println!("window {:>2}: {:?} density {}", d.window, d.positions, format(&d.density));
    }
    for r in [q(1, 2), q(3, 4)] {
        println!("r = {}: {:?}", format(&r), g.ie_pair_verdict(&u, &v, &r, 8)?);
    }
    let cycle = Sft::cycle(4);
    println!("4-cycle entropy {:.3}", cycle.entropy(1e-12)?);
    Ok(())
}

fn main() {
    if let Err(e) = run() {
        eprintln!("{e}");
        std::process::exit(1);
    }
}
