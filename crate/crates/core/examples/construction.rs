//! The coordinate construction: higher-level endpoints m, n, t and the
//! finite product relations with their checks.

use cpe_workbench::compacta::Scheme;
use cpe_workbench::construction::{
    check_propositions, gamma_finite, m_of, CoordinateModel, ProductSpace, RelationKind, TailMode,
};
use cpe_workbench::rational::{format, half, q};

fn run() -> cpe_workbench::Result<()> {
    let acc = Scheme::acc_nest(2, q(1, 4));
    for x in [q(1, 4), q(7, 16), half()] {
        let m = m_of(&acc, &x)?;
        println!("m({}) = {}{}", format(&x), format(&m.value), if m.boundary { " (boundary)" } else { "" });
    }

    let cantor = Scheme::perfect(q(1, 4), q(3, 4));
    for tail in [TailMode::Open, TailMode::Immutable] {
        let model = CoordinateModel::new(cantor.clone(), vec![q(11, 36), q(5, 12)], tail);
        let space = ProductSpace::new(model.clone())?;
        let d = space.build_relation(RelationKind::AllFree)?;
        let g = gamma_finite(&d);
        println!(
            "{tail:?}: {} states, values {:?}, Γ(D) has {} of {} pairs",
            space.states(),
            space.values().iter().map(|v| v.label()).collect::<Vec<_>>(),
            g.count(),
            space.states() * space.states()
        );
        let report = check_propositions(&model)?;
        for c in &report.checks {
            println!("  {:<28} {:?} ({} cases)", c.name, c.status, c.cases);
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
