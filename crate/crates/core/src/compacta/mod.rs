//! Exact symbolic compact subsets of (0,1).
//!
//! A [`Scheme`] is a finite term built from finite point sets, geometric
//! accumulations, disjoint unions and middle-thirds Cantor sets. Every query
//! (derivatives, ranks, gaps, point location) is answered by structural
//! recursion with exact rational arithmetic, never by sampling.

mod cascade;
mod gaps;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{self, half, one, pow, q, zero, Q};

pub use cascade::{isolation_cascade, nearest_distance, Cascade, REFINEMENTS};
pub use gaps::{Gap, Location};

/// Side from which an accumulation approaches its target.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Below,
    Above,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum Scheme {
    /// A finite set, strictly increasing.
    Points {
        #[serde(with = "rational::text_vec")]
        ps: Vec<Q>,
    },
    /// `{target}` together with affine copies of `body` placed in geometric
    /// windows that shrink towards `target`.
    ///
    /// Window `k >= 1` has width `window * ratio^(k-1) * (1 - ratio)` and is
    /// centred at `target -/+ window * ratio^(k-1)`. The body, a subset of
    /// (0,1), is mapped onto the window by the increasing affine map sending
    /// `[0,1]` onto the window, so it lands in the window's open interior.
    Acc {
        #[serde(with = "rational::text")]
        target: Q,
        side: Side,
        #[serde(with = "rational::text")]
        ratio: Q,
        #[serde(with = "rational::text")]
        window: Q,
        body: Box<Scheme>,
    },
    /// Parts with pairwise disjoint closed hulls, left to right.
    Union { parts: Vec<Scheme> },
    /// The middle-thirds Cantor set affinely placed on `[lo, hi]`.
    Perfect {
        #[serde(with = "rational::text")]
        lo: Q,
        #[serde(with = "rational::text")]
        hi: Q,
    },
}

/// Increasing affine map `y -> offset + scale * y`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct Affine {
    pub offset: Q,
    pub scale: Q,
}

impl Affine {
    pub fn apply(&self, y: &Q) -> Q {
        &self.offset + &self.scale * y
    }

    pub fn invert(&self, x: &Q) -> Q {
        (x - &self.offset) / &self.scale
    }
}

impl Scheme {
    pub fn points(ps: Vec<Q>) -> Self {
        Scheme::Points { ps }
    }

    pub fn acc(target: Q, side: Side, ratio: Q, window: Q, body: Scheme) -> Self {
        Scheme::Acc {
            target,
            side,
            ratio,
            window,
            body: Box::new(body),
        }
    }

    pub fn union(parts: Vec<Scheme>) -> Self {
        Scheme::Union { parts }
    }

    pub fn perfect(lo: Q, hi: Q) -> Self {
        Scheme::Perfect { lo, hi }
    }

    /// The canonical nest of CB rank `depth` (at least 1): `depth - 1` levels
    /// of `Acc(1/2, below, ratio, 1/4, ...)` around `Points([1/2])`.
    pub fn acc_nest(depth: usize, ratio: Q) -> Self {
        let mut s = Scheme::points(vec![half()]);
        for _ in 1..depth {
            s = Scheme::acc(half(), Side::Below, ratio.clone(), q(1, 4), s);
        }
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let s: Scheme =
            serde_json::from_str(text).map_err(|e| Error::Validation(e.to_string()))?;
        s.validate()?;
        Ok(s)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("schemes always serialize")
    }

    /// Affine placement of the body into window `k` (1-based) of an `Acc`.
    pub(crate) fn window_map(target: &Q, side: Side, ratio: &Q, window: &Q, k: usize) -> Affine {
        let reach = window * pow(ratio, k - 1);
        let width = &reach * (one() - ratio);
        let centre = match side {
            Side::Below => target - &reach,
            Side::Above => target + &reach,
        };
        Affine {
            offset: centre - &width * half(),
            scale: width,
        }
    }

    /// Smallest and largest realized point.
    pub fn hull(&self) -> (Q, Q) {
        match self {
            Scheme::Points { ps } => (ps[0].clone(), ps[ps.len() - 1].clone()),
            Scheme::Acc {
                target,
                side,
                ratio,
                window,
                body,
            } => {
                let (bmin, bmax) = body.hull();
                let first = Self::window_map(target, *side, ratio, window, 1);
                match side {
                    Side::Below => (first.apply(&bmin), target.clone()),
                    Side::Above => (target.clone(), first.apply(&bmax)),
                }
            }
            Scheme::Union { parts } => (parts[0].hull().0, parts[parts.len() - 1].hull().1),
            Scheme::Perfect { lo, hi } => (lo.clone(), hi.clone()),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let inside = |x: &Q, what: &str| -> Result<()> {
            if *x > zero() && *x < one() {
                Ok(())
            } else {
                Err(Error::Validation(format!(
                    "{what} {} is not inside (0,1)",
                    rational::format(x)
                )))
            }
        };
        match self {
            Scheme::Points { ps } => {
                if ps.is_empty() {
                    return Err(Error::Validation("empty point list".into()));
                }
                for p in ps {
                    inside(p, "point")?;
                }
                if ps.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(Error::Validation("points not strictly increasing".into()));
                }
            }
            Scheme::Acc {
                target,
                side,
                ratio,
                window,
                body,
            } => {
                inside(target, "target")?;
                inside(ratio, "ratio")?;
                if *window <= zero() {
                    return Err(Error::Validation("window must be positive".into()));
                }
                body.validate()?;
                // The outermost window is the farthest from the target.
                let reach = window * (q(3, 1) - ratio) * half();
                match side {
                    Side::Below => inside(&(target - &reach), "first window edge")?,
                    Side::Above => inside(&(target + &reach), "first window edge")?,
                }
            }
            Scheme::Union { parts } => {
                if parts.is_empty() {
                    return Err(Error::Validation("empty union".into()));
                }
                for p in parts {
                    p.validate()?;
                }
                for w in parts.windows(2) {
                    if w[0].hull().1 >= w[1].hull().0 {
                        return Err(Error::Validation(
                            "union parts have overlapping or unsorted hulls".into(),
                        ));
                    }
                }
            }
            Scheme::Perfect { lo, hi } => {
                inside(lo, "perfect lo")?;
                inside(hi, "perfect hi")?;
                if lo >= hi {
                    return Err(Error::Validation("perfect needs lo < hi".into()));
                }
            }
        }
        Ok(())
    }

    /// True when the realized set is finite.
    pub fn is_finite(&self) -> bool {
        match self {
            Scheme::Points { .. } => true,
            Scheme::Union { parts } => parts.iter().all(Scheme::is_finite),
            Scheme::Acc { .. } | Scheme::Perfect { .. } => false,
        }
    }

    pub fn has_perfect(&self) -> bool {
        match self {
            Scheme::Points { .. } => false,
            Scheme::Acc { body, .. } => body.has_perfect(),
            Scheme::Union { parts } => parts.iter().any(Scheme::has_perfect),
            Scheme::Perfect { .. } => true,
        }
    }

    /// Nesting depth of `Acc` nodes.
    pub fn acc_depth(&self) -> usize {
        match self {
            Scheme::Points { .. } | Scheme::Perfect { .. } => 0,
            Scheme::Acc { body, .. } => 1 + body.acc_depth(),
            Scheme::Union { parts } => parts.iter().map(Scheme::acc_depth).max().unwrap_or(0),
        }
    }

    /// Cantor-Bendixson derivative: the set of limit points. `None` is the
    /// empty set.
    pub fn derivative(&self) -> Option<Scheme> {
        match self {
            Scheme::Points { .. } => None,
            Scheme::Acc {
                target,
                side,
                ratio,
                window,
                body,
            } => Some(match body.derivative() {
                None => Scheme::points(vec![target.clone()]),
                Some(b) => Scheme::acc(target.clone(), *side, ratio.clone(), window.clone(), b),
            }),
            Scheme::Union { parts } => {
                let mut kept: Vec<Scheme> = parts.iter().filter_map(Scheme::derivative).collect();
                match kept.len() {
                    0 => None,
                    1 => kept.pop(),
                    _ => Some(Scheme::union(kept)),
                }
            }
            Scheme::Perfect { .. } => Some(self.clone()),
        }
    }

    /// `true` when the scheme equals its own derivative.
    pub fn is_perfect(&self) -> bool {
        self.derivative().as_ref() == Some(self)
    }

    /// Cantor-Bendixson rank and perfect core `A^inf` (`None` when empty).
    pub fn cb_rank(&self) -> (usize, Option<Scheme>) {
        let (levels, core) = self.derived_sets();
        (levels.len(), core)
    }

    /// The strictly decreasing derived sets `A^0, ..., A^(r-1)` (all differing
    /// from their derivative) and the core `A^r`.
    pub fn derived_sets(&self) -> (Vec<Scheme>, Option<Scheme>) {
        let mut levels = Vec::new();
        let mut cur = Some(self.clone());
        while let Some(s) = cur {
            let next = s.derivative();
            if next.as_ref() == Some(&s) {
                return (levels, Some(s));
            }
            levels.push(s);
            cur = next;
        }
        (levels, None)
    }

    /// The `alpha`-th derivative, saturating at the core.
    pub fn derivative_n(&self, alpha: usize) -> Option<Scheme> {
        let mut cur = Some(self.clone());
        for _ in 0..alpha {
            cur = cur.and_then(|s| s.derivative());
        }
        cur
    }

    /// Finite sorted approximation: every `Acc` unrolled to its first `depth`
    /// windows and every `Perfect` to its level-`depth` interval endpoints.
    pub fn realize(&self, depth: usize) -> Vec<Q> {
        let mut out = Vec::new();
        self.realize_into(depth, &mut out);
        out.sort();
        out.dedup();
        out
    }

    fn realize_into(&self, depth: usize, out: &mut Vec<Q>) {
        match self {
            Scheme::Points { ps } => out.extend(ps.iter().cloned()),
            Scheme::Acc {
                target,
                side,
                ratio,
                window,
                body,
            } => {
                out.push(target.clone());
                let inner = body.realize(depth);
                for k in 1..=depth {
                    let f = Self::window_map(target, *side, ratio, window, k);
                    out.extend(inner.iter().map(|y| f.apply(y)));
                }
            }
            Scheme::Union { parts } => {
                for p in parts {
                    p.realize_into(depth, out);
                }
            }
            Scheme::Perfect { lo, hi } => {
                let mut intervals = vec![(lo.clone(), hi.clone())];
                for _ in 0..depth {
                    let mut next = Vec::with_capacity(intervals.len() * 2);
                    for (a, b) in intervals {
                        let third = (&b - &a) / q(3, 1);
                        next.push((a.clone(), &a + &third));
                        next.push((&b - &third, b));
                    }
                    intervals = next;
                }
                for (a, b) in intervals {
                    out.push(a);
                    out.push(b);
                }
            }
        }
    }

    /// Exact membership of `x` in the realized set.
    pub fn contains(&self, x: &Q) -> bool {
        *x > zero() && *x < one() && matches!(self.locate(x), Ok(Location::InA))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    fn acc_example() -> Scheme {
        Scheme::acc(half(), Side::Below, q(1, 4), q(1, 4), Scheme::points(vec![half()]))
    }

    #[test]
    fn derivative_examples() {
        assert_eq!(Scheme::points(vec![q(1, 4), q(1, 2)]).derivative(), None);
        assert_eq!(acc_example().derivative(), Some(Scheme::points(vec![half()])));
        let p = Scheme::perfect(q(1, 4), q(3, 4));
        assert_eq!(p.derivative(), Some(p.clone()));
    }

    #[test]
    fn rank_examples() {
        assert_eq!(Scheme::points(vec![half()]).cb_rank(), (1, None));
        assert_eq!(Scheme::acc_nest(3, q(1, 4)).cb_rank(), (3, None));
        assert_eq!(Scheme::acc_nest(1, q(1, 4)), Scheme::points(vec![half()]));
        let p = Scheme::perfect(q(1, 4), q(3, 4));
        let u = Scheme::union(vec![Scheme::points(vec![q(1, 8)]), p.clone()]);
        assert_eq!(u.cb_rank(), (1, Some(p.clone())));
        assert_eq!(p.cb_rank(), (0, Some(p)));
    }

    #[test]
    fn realize_examples() {
        assert_eq!(
            Scheme::points(vec![q(1, 4), q(1, 2)]).realize(5),
            vec![q(1, 4), q(1, 2)]
        );
        assert_eq!(acc_example().realize(2), vec![q(1, 4), q(7, 16), q(1, 2)]);
        assert_eq!(
            Scheme::perfect(q(1, 3), q(2, 3)).realize(1),
            vec![q(1, 3), q(4, 9), q(5, 9), q(2, 3)]
        );
    }

    #[test]
    fn validation_rejects_overlaps_and_escapes() {
        let bad = Scheme::union(vec![
            Scheme::perfect(q(1, 4), q(1, 2)),
            Scheme::points(vec![q(1, 3)]),
        ]);
        assert!(matches!(bad.validate(), Err(Error::Validation(_))));
        let escapes = Scheme::acc(q(1, 10), Side::Below, q(1, 2), q(1, 2), Scheme::points(vec![half()]));
        assert!(escapes.validate().is_err());
        assert!(Scheme::points(vec![q(1, 2), q(1, 4)]).validate().is_err());
        assert!(Scheme::points(vec![]).validate().is_err());
        assert!(Scheme::perfect(q(1, 2), q(1, 2)).validate().is_err());
        assert!(Scheme::acc_nest(4, q(1, 4)).validate().is_ok());
    }

    #[test]
    fn json_shape() {
        let s = acc_example();
        let text = s.to_json();
        assert!(text.contains(r#""kind":"acc""#));
        assert!(text.contains(r#""target":"1/2""#));
        assert_eq!(Scheme::from_json(&text).unwrap(), s);
        let extra = r#"{"kind":"points","ps":["1/2"],"extra":1}"#;
        assert!(Scheme::from_json(extra).is_err());
    }
}
