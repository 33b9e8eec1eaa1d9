//! Contiguous intervals, point location and right neighbours.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use super::{Affine, Scheme, Side};
use crate::error::{Error, Result};
use crate::rational::{self, one, q, zero, Q};

/// A maximal open interval of (0,1) disjoint from the set.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Gap {
    #[serde(with = "rational::text")]
    pub lo: Q,
    #[serde(with = "rational::text")]
    pub hi: Q,
    pub lo_in_a: bool,
    pub hi_in_a: bool,
}

impl Gap {
    fn interior(lo: Q, hi: Q) -> Self {
        Gap {
            lo,
            hi,
            lo_in_a: true,
            hi_in_a: true,
        }
    }

    pub fn width(&self) -> Q {
        &self.hi - &self.lo
    }

    /// Open-interval membership.
    pub fn contains(&self, x: &Q) -> bool {
        *x > self.lo && *x < self.hi
    }

    /// Membership in the closure `[lo, hi]`.
    pub fn closure_contains(&self, x: &Q) -> bool {
        *x >= self.lo && *x <= self.hi
    }

    fn mapped(&self, f: &Affine) -> Gap {
        Gap {
            lo: f.apply(&self.lo),
            hi: f.apply(&self.hi),
            lo_in_a: self.lo_in_a,
            hi_in_a: self.hi_in_a,
        }
    }
}

/// Result of [`Scheme::locate`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Location {
    InA,
    Gap(Gap),
}

/// What lies immediately to the right of a realized point, within a node.
enum Next {
    Point(Q),
    Accumulates,
    /// The point is the node's maximum.
    End,
}

impl Scheme {
    /// Gaps strictly inside the hull with width at least `threshold`, or all
    /// of them when `threshold` is `None` (finite schemes only).
    fn internal_gaps(&self, threshold: Option<&Q>, out: &mut Vec<Gap>) {
        let wide = |g: &Gap| threshold.is_none_or(|t| g.width() >= *t);
        match self {
            Scheme::Points { ps } => {
                for w in ps.windows(2) {
                    let g = Gap::interior(w[0].clone(), w[1].clone());
                    if wide(&g) {
                        out.push(g);
                    }
                }
            }
            Scheme::Perfect { lo, hi } => {
                let t = threshold.expect("perfect sets have infinitely many gaps");
                let mut intervals = vec![(lo.clone(), hi.clone())];
                while !intervals.is_empty() && (&intervals[0].1 - &intervals[0].0) / q(3, 1) >= *t {
                    let mut next = Vec::with_capacity(intervals.len() * 2);
                    for (a, b) in intervals {
                        let third = (&b - &a) / q(3, 1);
                        let l = &a + &third;
                        let r = &b - &third;
                        out.push(Gap::interior(l.clone(), r.clone()));
                        next.push((a, l));
                        next.push((r, b));
                    }
                    intervals = next;
                }
            }
            Scheme::Union { parts } => {
                for p in parts {
                    p.internal_gaps(threshold, out);
                }
                for w in parts.windows(2) {
                    let g = Gap::interior(w[0].hull().1, w[1].hull().0);
                    if wide(&g) {
                        out.push(g);
                    }
                }
            }
            Scheme::Acc {
                target,
                side,
                ratio,
                window,
                body,
            } => {
                let t = threshold.expect("accumulations have infinitely many gaps");
                let (bmin, bmax) = body.hull();
                let mut k = 1;
                loop {
                    let f = Scheme::window_map(target, *side, ratio, window, k);
                    let near = match side {
                        Side::Below => f.apply(&bmin),
                        Side::Above => f.apply(&bmax),
                    };
                    // Everything from copy k onwards fits in [near, target].
                    if rational::abs_diff(target, &near) < *t {
                        break;
                    }
                    let mut inner = Vec::new();
                    body.internal_gaps(Some(&(t / &f.scale)), &mut inner);
                    out.extend(inner.iter().map(|g| g.mapped(&f)));
                    let g2 = Scheme::window_map(target, *side, ratio, window, k + 1);
                    let between = match side {
                        Side::Below => Gap::interior(f.apply(&bmax), g2.apply(&bmin)),
                        Side::Above => Gap::interior(g2.apply(&bmax), f.apply(&bmin)),
                    };
                    if between.width() >= *t {
                        out.push(between);
                    }
                    k += 1;
                }
            }
        }
    }

    /// All gaps of width at least `threshold` (all gaps if `None`, finite
    /// schemes only), including the two boundary gaps.
    pub fn gaps_wider_than(&self, threshold: Option<&Q>) -> Vec<Gap> {
        let (min, max) = self.hull();
        let mut out = Vec::new();
        let wide = |g: &Gap| threshold.is_none_or(|t| g.width() >= *t);
        let left = Gap {
            lo: zero(),
            hi: min,
            lo_in_a: false,
            hi_in_a: true,
        };
        if wide(&left) {
            out.push(left);
        }
        self.internal_gaps(threshold, &mut out);
        let right = Gap {
            lo: max,
            hi: one(),
            lo_in_a: true,
            hi_in_a: false,
        };
        if wide(&right) {
            out.push(right);
        }
        out
    }

    /// The `k` widest gaps, widest first, ties broken left-first.
    pub fn contiguous_intervals(&self, k: usize) -> Vec<Gap> {
        let mut gaps = if self.is_finite() {
            self.gaps_wider_than(None)
        } else {
            let mut t = q(1, 2);
            loop {
                let g = self.gaps_wider_than(Some(&t));
                if g.len() >= k {
                    break g;
                }
                t /= q(2, 1);
            }
        };
        gaps.sort_by(|a, b| b.width().cmp(&a.width()).then_with(|| a.lo.cmp(&b.lo)));
        gaps.truncate(k);
        gaps
    }

    /// Left endpoints (belonging to the set) of the `k` widest gaps, in gap
    /// order. `0` never qualifies.
    pub fn left_endpoints(&self, k: usize) -> Vec<Q> {
        self.contiguous_intervals(k)
            .into_iter()
            .filter(|g| g.lo_in_a)
            .map(|g| g.lo)
            .collect()
    }

    /// Decides membership of `x` exactly, or returns the gap containing it.
    pub fn locate(&self, x: &Q) -> Result<Location> {
        if *x <= zero() || *x >= one() {
            return Err(Error::Domain(format!(
                "locate needs a point of (0,1), got {}",
                rational::format(x)
            )));
        }
        let (min, max) = self.hull();
        if *x < min {
            return Ok(Location::Gap(Gap {
                lo: zero(),
                hi: min,
                lo_in_a: false,
                hi_in_a: true,
            }));
        }
        if *x > max {
            return Ok(Location::Gap(Gap {
                lo: max,
                hi: one(),
                lo_in_a: true,
                hi_in_a: false,
            }));
        }
        Ok(self.locate_in_hull(x))
    }

    fn locate_in_hull(&self, x: &Q) -> Location {
        match self {
            Scheme::Points { ps } => match ps.binary_search(x) {
                Ok(_) => Location::InA,
                Err(i) => Location::Gap(Gap::interior(ps[i - 1].clone(), ps[i].clone())),
            },
            Scheme::Perfect { lo, hi } => {
                let (mut a, mut b) = (lo.clone(), hi.clone());
                let mut y = (x - &a) / (&b - &a);
                let mut seen = HashSet::new();
                let third = q(1, 3);
                let two_thirds = q(2, 3);
                loop {
                    if y == zero() || y == one() || !seen.insert(y.clone()) {
                        return Location::InA;
                    }
                    let step = (&b - &a) / q(3, 1);
                    if y <= third {
                        b = &a + &step;
                        y *= q(3, 1);
                    } else if y >= two_thirds {
                        a = &b - &step;
                        y = y * q(3, 1) - q(2, 1);
                    } else {
                        return Location::Gap(Gap::interior(&a + &step, &b - &step));
                    }
                }
            }
            Scheme::Union { parts } => {
                let mut prev_max: Option<Q> = None;
                for p in parts {
                    let (lo, hi) = p.hull();
                    if *x < lo {
                        let pm = prev_max.expect("x is inside the union hull");
                        return Location::Gap(Gap::interior(pm, lo));
                    }
                    if *x <= hi {
                        return p.locate_in_hull(x);
                    }
                    prev_max = Some(hi);
                }
                unreachable!("x is inside the union hull")
            }
            Scheme::Acc {
                target,
                side,
                ratio,
                window,
                body,
            } => {
                if x == target {
                    return Location::InA;
                }
                let (bmin, bmax) = body.hull();
                let mut prev: Option<Q> = None;
                let mut k = 1;
                loop {
                    let f = Scheme::window_map(target, *side, ratio, window, k);
                    let (lo, hi) = (f.apply(&bmin), f.apply(&bmax));
                    match side {
                        Side::Below => {
                            if *x < lo {
                                return Location::Gap(Gap::interior(prev.expect("inside hull"), lo));
                            }
                            if *x <= hi {
                                return map_location(body.locate_in_hull(&f.invert(x)), &f);
                            }
                            prev = Some(hi);
                        }
                        Side::Above => {
                            if *x > hi {
                                return Location::Gap(Gap::interior(hi, prev.expect("inside hull")));
                            }
                            if *x >= lo {
                                return map_location(body.locate_in_hull(&f.invert(x)), &f);
                            }
                            prev = Some(lo);
                        }
                    }
                    k += 1;
                }
            }
        }
    }

    /// For a realized point `x`, the gap whose left endpoint is `x`, if any.
    /// `x` is in `L(A)` exactly when this is `Some`.
    pub fn right_gap(&self, x: &Q) -> Result<Option<Gap>> {
        if !self.contains(x) {
            return Err(Error::Domain(format!(
                "{} is not a point of the set",
                rational::format(x)
            )));
        }
        Ok(match self.next_above(x) {
            Next::Point(y) => Some(Gap::interior(x.clone(), y)),
            Next::Accumulates => None,
            Next::End => Some(Gap {
                lo: x.clone(),
                hi: one(),
                lo_in_a: true,
                hi_in_a: false,
            }),
        })
    }

    pub fn is_left_endpoint(&self, x: &Q) -> bool {
        matches!(self.right_gap(x), Ok(Some(_)))
    }

    fn next_above(&self, x: &Q) -> Next {
        match self {
            Scheme::Points { ps } => {
                let i = ps.binary_search(x).expect("x is a point");
                ps.get(i + 1).map_or(Next::End, |y| Next::Point(y.clone()))
            }
            Scheme::Perfect { lo, hi } => {
                // Walk down the ternary tree remembering which pieces we took.
                let (mut a, mut b) = (lo.clone(), hi.clone());
                let mut y = (x - &a) / (&b - &a);
                let mut seen = HashSet::new();
                let mut left_turns: Vec<Q> = Vec::new(); // start of the sibling right piece
                let mut path: Vec<bool> = Vec::new();
                loop {
                    if y == one() {
                        // x is the maximum of the current piece.
                        while let Some(went_left) = path.pop() {
                            let sibling = left_turns.pop().expect("paired with path");
                            if went_left {
                                return Next::Point(sibling);
                            }
                        }
                        return Next::End;
                    }
                    if !seen.insert(y.clone()) {
                        return Next::Accumulates;
                    }
                    let step = (&b - &a) / q(3, 1);
                    if y <= q(1, 3) {
                        left_turns.push(&b - &step);
                        path.push(true);
                        b = &a + &step;
                        y *= q(3, 1);
                    } else {
                        left_turns.push(zero());
                        path.push(false);
                        a = &b - &step;
                        y = y * q(3, 1) - q(2, 1);
                    }
                }
            }
            Scheme::Union { parts } => {
                for (i, p) in parts.iter().enumerate() {
                    let (lo, hi) = p.hull();
                    if *x >= lo && *x <= hi {
                        return match p.next_above(x) {
                            Next::End => parts
                                .get(i + 1)
                                .map_or(Next::End, |n| Next::Point(n.hull().0)),
                            other => other,
                        };
                    }
                }
                unreachable!("x is a point of some part")
            }
            Scheme::Acc {
                target,
                side,
                ratio,
                window,
                body,
            } => {
                if x == target {
                    return match side {
                        Side::Below => Next::End,
                        Side::Above => Next::Accumulates,
                    };
                }
                let (bmin, bmax) = body.hull();
                let mut k = 1;
                loop {
                    let f = Scheme::window_map(target, *side, ratio, window, k);
                    if *x >= f.apply(&bmin) && *x <= f.apply(&bmax) {
                        return match body.next_above(&f.invert(x)) {
                            Next::Point(y) => Next::Point(f.apply(&y)),
                            Next::Accumulates => Next::Accumulates,
                            Next::End => match side {
                                Side::Below => Next::Point(
                                    Scheme::window_map(target, *side, ratio, window, k + 1)
                                        .apply(&bmin),
                                ),
                                Side::Above if k == 1 => Next::End,
                                Side::Above => Next::Point(
                                    Scheme::window_map(target, *side, ratio, window, k - 1)
                                        .apply(&bmin),
                                ),
                            },
                        };
                    }
                    k += 1;
                }
            }
        }
    }

    /// `min(A ∩ [lo, hi])`, exactly.
    pub fn min_in_range(&self, lo: &Q, hi: &Q) -> Option<Q> {
        if lo > hi || *hi <= zero() {
            return None;
        }
        let (min, _) = self.hull();
        if *lo <= zero() || *lo < min {
            return (min <= *hi).then_some(min);
        }
        if *lo >= one() {
            return None;
        }
        match self.locate(lo).ok()? {
            Location::InA => Some(lo.clone()),
            Location::Gap(g) => (g.hi_in_a && g.hi <= *hi).then_some(g.hi),
        }
    }
}

fn map_location(loc: Location, f: &Affine) -> Location {
    match loc {
        Location::InA => Location::InA,
        Location::Gap(g) => Location::Gap(g.mapped(f)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::half;

    fn acc_example() -> Scheme {
        Scheme::acc(half(), Side::Below, q(1, 4), q(1, 4), Scheme::points(vec![half()]))
    }

    fn gap(lo: Q, hi: Q, lo_in_a: bool, hi_in_a: bool) -> Gap {
        Gap {
            lo,
            hi,
            lo_in_a,
            hi_in_a,
        }
    }

    #[test]
    fn contiguous_examples() {
        let p = Scheme::points(vec![half()]);
        assert_eq!(
            p.contiguous_intervals(2),
            vec![gap(zero(), half(), false, true), gap(half(), one(), true, false)]
        );
        let c = Scheme::perfect(q(1, 4), q(3, 4));
        let g = c.contiguous_intervals(3);
        assert_eq!(g[0], gap(zero(), q(1, 4), false, true));
        assert_eq!(g[1], gap(q(3, 4), one(), true, false));
        assert_eq!(g[2], gap(q(5, 12), q(7, 12), true, true));
        assert_eq!(acc_example().contiguous_intervals(1), vec![gap(half(), one(), true, false)]);
    }

    #[test]
    fn contiguous_acc_order() {
        let g = acc_example().contiguous_intervals(4);
        let widths: Vec<Q> = g.iter().map(Gap::width).collect();
        assert_eq!(widths, vec![half(), q(1, 4), q(3, 16), q(3, 64)]);
        assert_eq!(g[2], gap(q(1, 4), q(7, 16), true, true));
    }

    #[test]
    fn locate_examples() {
        let p = Scheme::points(vec![half()]);
        assert_eq!(p.locate(&half()).unwrap(), Location::InA);
        assert_eq!(
            p.locate(&q(3, 4)).unwrap(),
            Location::Gap(gap(half(), one(), true, false))
        );
        assert_eq!(acc_example().locate(&q(7, 16)).unwrap(), Location::InA);
        assert_eq!(
            acc_example().locate(&q(15, 32)).unwrap(),
            Location::Gap(gap(q(7, 16), q(31, 64), true, true))
        );
        assert!(matches!(p.locate(&zero()), Err(Error::Domain(_))));
        assert!(matches!(p.locate(&q(3, 2)), Err(Error::Domain(_))));
    }

    #[test]
    fn locate_perfect() {
        let c = Scheme::perfect(q(1, 4), q(3, 4));
        // 1/4 of the way is in the middle-thirds set (ternary 0.0202...).
        assert_eq!(c.locate(&(q(1, 4) + q(1, 8))).unwrap(), Location::InA);
        assert_eq!(
            c.locate(&half()).unwrap(),
            Location::Gap(gap(q(5, 12), q(7, 12), true, true))
        );
        assert_eq!(c.locate(&q(3, 4)).unwrap(), Location::InA);
    }

    #[test]
    fn left_endpoint_examples() {
        assert_eq!(Scheme::points(vec![half()]).left_endpoints(2), vec![half()]);
        assert_eq!(
            Scheme::points(vec![q(1, 4), half()]).left_endpoints(3),
            vec![half(), q(1, 4)]
        );
        assert_eq!(acc_example().left_endpoints(3), vec![half(), q(1, 4)]);
    }

    #[test]
    fn right_gaps() {
        let a = acc_example();
        assert_eq!(a.right_gap(&q(7, 16)).unwrap(), Some(gap(q(7, 16), q(31, 64), true, true)));
        assert_eq!(a.right_gap(&half()).unwrap(), Some(gap(half(), one(), true, false)));
        let up = Scheme::acc(half(), Side::Above, q(1, 4), q(1, 4), Scheme::points(vec![half()]));
        assert_eq!(up.right_gap(&half()).unwrap(), None);
        assert_eq!(up.right_gap(&q(9, 16)).unwrap(), Some(gap(q(9, 16), q(3, 4), true, true)));
        let c = Scheme::perfect(q(1, 4), q(3, 4));
        assert_eq!(c.right_gap(&q(5, 12)).unwrap(), Some(gap(q(5, 12), q(7, 12), true, true)));
        assert_eq!(c.right_gap(&q(1, 4)).unwrap(), None);
        // 1/4 + 1/18 is the right end of the first level-2 piece.
        let x = q(1, 4) + q(1, 18);
        assert_eq!(c.right_gap(&x).unwrap(), Some(gap(x, q(1, 4) + q(1, 9), true, true)));
        assert!(c.right_gap(&half()).is_err());
    }

    #[test]
    fn min_in_range_cases() {
        let a = acc_example();
        assert_eq!(a.min_in_range(&q(7, 16), &q(31, 64)), Some(q(7, 16)));
        assert_eq!(a.min_in_range(&q(15, 32), &q(31, 64)), Some(q(31, 64)));
        assert_eq!(a.min_in_range(&q(15, 32), &q(61, 128)), None);
        let top = Scheme::points(vec![half()]);
        assert_eq!(top.min_in_range(&q(7, 16), &q(31, 64)), None);
    }
}
