//! Isolation cascade: a sampling oracle for derived sets that never calls
//! [`Scheme::derivative`].
//!
//! A realized point is kept at the next level when its nearest-neighbour
//! distance inside the current level keeps shrinking as the realization is
//! refined. Limit points gain closer neighbours at every refinement; isolated
//! points stop improving once their neighbouring windows exist. This is an
//! approximation oracle on finite truncations, not a definition.

use std::collections::HashMap;

use super::Scheme;
use crate::rational::Q;

/// Extra realization depth consulted per cascade level.
pub const REFINEMENTS: usize = 4;

/// Distance from `x` to the nearest other point of the sorted set `pts`.
pub fn nearest_distance(pts: &[Q], x: &Q) -> Option<Q> {
    let i = pts.partition_point(|p| p < x);
    let left = pts[..i].last().map(|p| x - p);
    let j = if pts.get(i) == Some(x) { i + 1 } else { i };
    let right = pts.get(j).map(|p| p - x);
    match (left, right) {
        (Some(a), Some(b)) => Some(a.min(b)),
        (a, b) => a.or(b),
    }
}

pub struct Cascade<'a> {
    scheme: &'a Scheme,
    memo: HashMap<(usize, usize), Vec<Q>>,
}

impl<'a> Cascade<'a> {
    pub fn new(scheme: &'a Scheme) -> Self {
        Cascade {
            scheme,
            memo: HashMap::new(),
        }
    }

    /// Cascade level `alpha` read off at realization depth `depth`. Needs the
    /// realization at depth `depth + REFINEMENTS * alpha`.
    pub fn level(&mut self, alpha: usize, depth: usize) -> Vec<Q> {
        if let Some(v) = self.memo.get(&(alpha, depth)) {
            return v.clone();
        }
        let out = if alpha == 0 {
            self.scheme.realize(depth)
        } else {
            let here = self.level(alpha - 1, depth);
            let finer: Vec<Vec<Q>> = (1..=REFINEMENTS).map(|k| self.level(alpha - 1, depth + k)).collect();
            here.into_iter()
                .filter(|x| {
                    let nn: Vec<Option<Q>> = finer.iter().map(|s| nearest_distance(s, x)).collect();
                    nn.windows(2).all(|w| match (&w[0], &w[1]) {
                        (Some(a), Some(b)) => b < a,
                        _ => false,
                    })
                })
                .collect()
        };
        self.memo.insert((alpha, depth), out.clone());
        out
    }
}

/// Shorthand for a single cascade query.
pub fn isolation_cascade(s: &Scheme, alpha: usize, depth: usize) -> Vec<Q> {
    Cascade::new(s).level(alpha, depth)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{half, q};

    fn agrees(s: &Scheme, depth: usize) {
        let (rank, _) = s.cb_rank();
        let mut c = Cascade::new(s);
        for alpha in 0..=rank {
            let want = s.derivative_n(alpha).map_or(vec![], |d| d.realize(depth));
            assert_eq!(c.level(alpha, depth), want, "level {alpha} of {s:?}");
        }
    }

    #[test]
    fn nests_and_points() {
        agrees(&Scheme::points(vec![q(1, 4), half()]), 8);
        for r in 1..=3 {
            agrees(&Scheme::acc_nest(r, q(1, 4)), 8);
        }
    }

    #[test]
    fn perfect_is_its_own_level() {
        let p = Scheme::perfect(q(1, 4), q(3, 4));
        agrees(&Scheme::union(vec![Scheme::points(vec![q(1, 8)]), p]), 4);
    }

    #[test]
    fn nearest() {
        let pts = [q(1, 4), half(), q(3, 4)];
        assert_eq!(nearest_distance(&pts, &half()), Some(q(1, 4)));
        assert_eq!(nearest_distance(&pts[..1], &q(1, 4)), None);
    }
}
