//! The Γ operator `E ↦ closure(E⁺ ∪ Δ)` and its rank, symbolically for
//! interval-square relations and on finite spaces with ε-fattening standing
//! in for topological closure.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::bits::BitMatrix;
use crate::compacta::{Gap, Location, Scheme};
use crate::error::{Error, Result};
use crate::rational::{self, one, q, zero, Q};
use crate::space::FiniteSpace;

/// `⋃_{J ∈ C(base)} J̄×J̄ ∪ Δ`; a missing base is the full square.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntervalSquareRelation {
    pub base: Option<Scheme>,
}

impl IntervalSquareRelation {
    pub fn new(base: Scheme) -> Self {
        IntervalSquareRelation { base: Some(base) }
    }

    pub fn full() -> Self {
        IntervalSquareRelation { base: None }
    }

    pub fn is_full(&self) -> bool {
        self.base.is_none()
    }

    /// Grid points `(i, j)` are related when equal or when both lie in the
    /// closure of one contiguous interval of the base.
    pub fn discretize(&self, grid_n: usize) -> BitMatrix {
        let n = grid_n + 1;
        let base = match &self.base {
            None => return BitMatrix::full(n),
            Some(b) => b,
        };
        let x = |i: usize| q(i as i64, grid_n as i64);
        let key = |g: &Gap| (g.lo.clone(), g.hi.clone());
        let mut blocks: BTreeMap<(Q, Q), Vec<usize>> = BTreeMap::new();
        let (min, max) = base.hull();
        blocks.entry((zero(), min)).or_default().push(0);
        blocks.entry((max, one())).or_default().push(grid_n);
        for i in 1..grid_n {
            let xi = x(i);
            match base.locate(&xi).expect("interior grid point") {
                Location::Gap(g) => blocks.entry(key(&g)).or_default().push(i),
                Location::InA => {
                    if let Some(g) = base.right_gap(&xi).expect("point of the base") {
                        blocks.entry(key(&g)).or_default().push(i);
                    }
                    // The gap ending at x_i, when it reaches back to a grid point.
                    let prev = x(i - 1);
                    let left = blocks
                        .iter()
                        .find(|((lo, hi), members)| *hi == xi && members.contains(&(i - 1)) && *lo <= prev)
                        .map(|(k, _)| k.clone());
                    if let Some(k) = left {
                        blocks.get_mut(&k).expect("present").push(i);
                    }
                }
            }
        }
        let mut m = BitMatrix::identity(n);
        for members in blocks.values() {
            for &a in members {
                for &b in members {
                    m.set(a, b);
                }
            }
        }
        m
    }
}

pub fn gamma_step_symbolic(r: &IntervalSquareRelation) -> IntervalSquareRelation {
    IntervalSquareRelation {
        base: r.base.as_ref().and_then(Scheme::derivative),
    }
}

/// Steps to stabilize and the stable relation, whose base is the perfect core.
pub fn gamma_rank_symbolic(r: &IntervalSquareRelation) -> (usize, IntervalSquareRelation) {
    match &r.base {
        None => (0, IntervalSquareRelation::full()),
        Some(b) => {
            let (rank, core) = b.cb_rank();
            (rank, IntervalSquareRelation { base: core })
        }
    }
}

/// `Γ^α` of the relation, for every `α` up to and including the rank.
pub fn symbolic_levels(r: &IntervalSquareRelation) -> Vec<IntervalSquareRelation> {
    let mut out = vec![r.clone()];
    loop {
        let next = gamma_step_symbolic(out.last().expect("nonempty"));
        if next == *out.last().expect("nonempty") {
            return out;
        }
        out.push(next);
    }
}

fn symmetrized(e: &BitMatrix) -> BitMatrix {
    if e.is_symmetric() {
        e.clone()
    } else {
        log::warn!("gamma: input relation is not symmetric, symmetrizing");
        e.union(&e.transpose())
    }
}

/// Pairs `(u, v)` with some `(u', v')` of `s` where `d(u,u')` and `d(v,v')`
/// are at most `eps`: the product `N · S · N` with `N` the ε-neighbourhoods.
pub fn fatten(space: &FiniteSpace, s: &BitMatrix, eps: &Q) -> BitMatrix {
    if *eps == zero() {
        return s.clone();
    }
    let nb = space.neighbours(eps);
    let ns = nb.mul(s);
    nb.mul(&ns.transpose())
}

pub fn gamma_step_finite(space: &FiniteSpace, e: &BitMatrix, eps: &Q) -> BitMatrix {
    let e = symmetrized(e);
    let mut r = e.transitive_closure();
    r.union_with(&BitMatrix::identity(space.len()));
    fatten(space, &r, eps)
}

/// Least `n` with `Γⁿ(E) = Γⁿ⁺¹(E)`, and that fixed relation.
pub fn gamma_rank_finite(space: &FiniteSpace, e: &BitMatrix, eps: &Q) -> (usize, BitMatrix) {
    let levels = finite_levels(space, e, eps);
    let rank = levels.len() - 1;
    (rank, levels.into_iter().last().expect("nonempty"))
}

/// `E, Γ(E), ..., Γ^rank(E)`.
pub fn finite_levels(space: &FiniteSpace, e: &BitMatrix, eps: &Q) -> Vec<BitMatrix> {
    let mut out = vec![symmetrized(e)];
    loop {
        let next = gamma_step_finite(space, out.last().expect("nonempty"), eps);
        if next == *out.last().expect("nonempty") {
            return out;
        }
        out.push(next);
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceRow {
    pub step: usize,
    pub pair_count: usize,
    pub is_fixed: bool,
}

pub fn gamma_trace(space: &FiniteSpace, e: &BitMatrix, eps: &Q) -> Vec<TraceRow> {
    let levels = finite_levels(space, e, eps);
    let last = levels.len() - 1;
    levels
        .iter()
        .enumerate()
        .map(|(step, m)| TraceRow {
            step,
            pair_count: m.count(),
            is_fixed: step == last,
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CrossStatus {
    Agree,
    Unresolvable,
    Disagree,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelCheck {
    pub level: usize,
    /// The discretized symbolic level is contained in the finite level.
    pub lower: bool,
    /// The finite level is contained in the ε-fattened symbolic level.
    pub upper: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CrossReport {
    pub grid_n: usize,
    #[serde(with = "rational::text")]
    pub eps: Q,
    pub symbolic_rank: usize,
    pub finite_rank: usize,
    pub symbolic_fixed_full: bool,
    pub finite_fixed_full: bool,
    pub levels: Vec<LevelCheck>,
    pub first_unresolved_level: Option<usize>,
    pub status: CrossStatus,
}

impl CrossReport {
    pub fn agree(&self) -> bool {
        self.status == CrossStatus::Agree
    }
}

/// Runs both backends on `ψ(A)`'s entropy-pair relation and compares them
/// level by level: level `α` is resolved when the grid image `S` of the
/// symbolic `Γ^α` satisfies `S ⊆ G^α ⊆ fatten(S)`.
pub fn cross_validate(a: &Scheme, grid_n: usize, eps: &Q) -> Result<CrossReport> {
    if grid_n < 16 {
        return Err(Error::Validation(format!("grid_n must be at least 16, got {grid_n}")));
    }
    if *eps < q(2, grid_n as i64) {
        return Err(Error::Validation(format!(
            "eps must be at least 2/grid_n, got {}",
            rational::format(eps)
        )));
    }
    a.validate()?;
    let space = FiniteSpace::grid(grid_n);
    let sym = symbolic_levels(&IntervalSquareRelation::new(a.clone()));
    let sym_rank = sym.len() - 1;
    let sym_disc: Vec<BitMatrix> = sym.iter().map(|r| r.discretize(grid_n)).collect();
    let fin = finite_levels(&space, &sym_disc[0], eps);
    let fin_rank = fin.len() - 1;

    let mut levels = Vec::new();
    for level in 0..=sym_rank.max(fin_rank) {
        let s = &sym_disc[level.min(sym_rank)];
        let g = &fin[level.min(fin_rank)];
        levels.push(LevelCheck {
            level,
            lower: s.is_subset(g),
            upper: g.is_subset(&fatten(&space, s, eps)),
        });
    }
    let first_unresolved_level = levels.iter().find(|c| !(c.lower && c.upper)).map(|c| c.level);
    let symbolic_fixed_full = sym[sym_rank].is_full();
    let finite_fixed_full = fin[fin_rank].is_full();
    let status = match first_unresolved_level {
        Some(_) => CrossStatus::Unresolvable,
        None if sym_rank == fin_rank && symbolic_fixed_full == finite_fixed_full => CrossStatus::Agree,
        None => CrossStatus::Disagree,
    };
    Ok(CrossReport {
        grid_n,
        eps: eps.clone(),
        symbolic_rank: sym_rank,
        finite_rank: fin_rank,
        symbolic_fixed_full,
        finite_fixed_full,
        levels,
        first_unresolved_level,
        status,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compacta::Side;
    use crate::rational::half;

    fn two_blocks(grid_n: usize) -> BitMatrix {
        let h = grid_n / 2;
        let mut m = BitMatrix::identity(grid_n + 1);
        for i in 0..=grid_n {
            for j in 0..=grid_n {
                if (i <= h && j <= h) || (i >= h && j >= h) {
                    m.set(i, j);
                }
            }
        }
        m
    }

    #[test]
    fn finite_examples() {
        let s3 = FiniteSpace::discrete(3);
        let e = BitMatrix::from_pairs(3, [(0, 1), (1, 0)]);
        assert_eq!(
            gamma_step_finite(&s3, &e, &zero()),
            e.union(&BitMatrix::identity(3))
        );
        let full = BitMatrix::full(3);
        assert_eq!(gamma_step_finite(&s3, &full, &q(1, 2)), full);
        assert_eq!(gamma_rank_finite(&s3, &full, &zero()), (0, full));
        let id = BitMatrix::identity(3);
        assert_eq!(gamma_rank_finite(&s3, &id, &zero()), (0, id));

        let g9 = FiniteSpace::grid(8);
        let e = two_blocks(8);
        assert!(gamma_step_finite(&g9, &e, &zero()).is_full());
        let (rank, fixed) = gamma_rank_finite(&g9, &e, &zero());
        assert_eq!(rank, 1);
        assert!(fixed.is_full());
    }

    #[test]
    fn asymmetric_input_is_symmetrized() {
        let s3 = FiniteSpace::discrete(3);
        let e = BitMatrix::from_pairs(3, [(0, 1)]);
        assert!(gamma_step_finite(&s3, &e, &zero()).get(1, 0));
    }

    #[test]
    fn symbolic_examples() {
        let p = IntervalSquareRelation::new(Scheme::points(vec![half()]));
        assert!(gamma_step_symbolic(&p).is_full());
        assert!(gamma_step_symbolic(&IntervalSquareRelation::full()).is_full());
        let acc = Scheme::acc(half(), Side::Below, q(1, 4), q(1, 4), Scheme::points(vec![half()]));
        assert_eq!(
            gamma_step_symbolic(&IntervalSquareRelation::new(acc)),
            IntervalSquareRelation::new(Scheme::points(vec![half()]))
        );
        assert_eq!(gamma_rank_symbolic(&p), (1, IntervalSquareRelation::full()));
        let c = Scheme::perfect(q(1, 4), q(3, 4));
        let (rank, fixed) = gamma_rank_symbolic(&IntervalSquareRelation::new(c.clone()));
        assert_eq!(rank, 0);
        assert_eq!(fixed, IntervalSquareRelation::new(c));
        let (rank, fixed) = gamma_rank_symbolic(&IntervalSquareRelation::new(Scheme::acc_nest(3, q(1, 4))));
        assert_eq!(rank, 3);
        assert!(fixed.is_full());
    }

    #[test]
    fn discretize_points() {
        let r = IntervalSquareRelation::new(Scheme::points(vec![half()]));
        assert_eq!(r.discretize(8), two_blocks(8));
    }

    #[test]
    fn discretize_adjacent_grid_points_of_a() {
        // Gap (1/4, 3/8) has no interior grid point on the 8-grid, yet its
        // closure relates the two grid points 2/8 and 3/8.
        let r = IntervalSquareRelation::new(Scheme::points(vec![q(1, 4), q(3, 8)]));
        let m = r.discretize(8);
        assert!(m.get(2, 3));
        assert!(m.get(0, 2) && !m.get(0, 3));
        assert!(m.get(3, 8));
    }

    #[test]
    fn cross_validate_examples() {
        let r = cross_validate(&Scheme::points(vec![half()]), 64, &q(1, 32)).unwrap();
        assert!(r.agree(), "{r:?}");
        assert_eq!(r.symbolic_rank, 1);
        let r = cross_validate(&Scheme::acc_nest(2, q(1, 4)), 1024, &q(1, 512)).unwrap();
        assert!(r.agree(), "{r:?}");
        assert_eq!(r.finite_rank, 2);
        let r = cross_validate(&Scheme::perfect(q(1, 4), q(3, 4)), 256, &q(1, 128)).unwrap();
        assert!(!r.symbolic_fixed_full);
        assert_eq!(r.status, CrossStatus::Unresolvable);
        assert!(cross_validate(&Scheme::points(vec![half()]), 8, &q(1, 4)).is_err());
        assert!(cross_validate(&Scheme::points(vec![half()]), 64, &q(1, 64)).is_err());
    }
}
