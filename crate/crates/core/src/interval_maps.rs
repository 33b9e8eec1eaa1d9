//! Piecewise-linear interval maps, the pasted map ψ(A), lap numbers and the
//! CPE verdict.

use serde::{Deserialize, Serialize};

use crate::compacta::{Location, Scheme};
use crate::error::{Error, Result};
use crate::gamma::{gamma_rank_symbolic, IntervalSquareRelation};
use crate::rational::{self, one, q, zero, Q};

/// Default cap on breakpoints produced by composition.
pub const DEFAULT_BUDGET: usize = 10_000_000;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PiecewiseLinearMap {
    #[serde(with = "rational::text_vec")]
    pub breakpoints: Vec<Q>,
    #[serde(with = "rational::text_vec")]
    pub values: Vec<Q>,
}

impl PiecewiseLinearMap {
    pub fn new(breakpoints: Vec<Q>, values: Vec<Q>) -> Result<Self> {
        let m = PiecewiseLinearMap { breakpoints, values };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::Validation(msg.to_string()));
        if self.breakpoints.len() < 2 || self.breakpoints.len() != self.values.len() {
            return bad("need at least two breakpoints and one value per breakpoint");
        }
        if self.breakpoints[0] != zero() || *self.breakpoints.last().expect("len >= 2") != one() {
            return bad("breakpoints must start at 0 and end at 1");
        }
        if self.breakpoints.windows(2).any(|w| w[0] >= w[1]) {
            return bad("breakpoints must be strictly increasing");
        }
        if self.values.iter().any(|v| *v < zero() || *v > one()) {
            return bad("values must lie in [0,1]");
        }
        Ok(())
    }

    pub fn identity() -> Self {
        PiecewiseLinearMap {
            breakpoints: vec![zero(), one()],
            values: vec![zero(), one()],
        }
    }

    pub fn pieces(&self) -> usize {
        self.breakpoints.len() - 1
    }

    pub fn eval(&self, x: &Q) -> Q {
        let bp = &self.breakpoints;
        match bp.binary_search(x) {
            Ok(i) => self.values[i].clone(),
            Err(i) => {
                let i = i.clamp(1, bp.len() - 1);
                let (x0, x1) = (&bp[i - 1], &bp[i]);
                let (y0, y1) = (&self.values[i - 1], &self.values[i]);
                y0 + (y1 - y0) * (x - x0) / (x1 - x0)
            }
        }
    }

    /// `self ∘ inner`, exactly: breakpoints are those of `inner` plus the
    /// preimages under `inner` of the breakpoints of `self`.
    pub fn compose(&self, inner: &PiecewiseLinearMap, budget: usize) -> Result<PiecewiseLinearMap> {
        let mut bps = vec![inner.breakpoints[0].clone()];
        let mut vals = vec![self.eval(&inner.values[0])];
        let outer = &self.breakpoints;
        for i in 1..inner.breakpoints.len() {
            let (x0, x1) = (&inner.breakpoints[i - 1], &inner.breakpoints[i]);
            let (v0, v1) = (&inner.values[i - 1], &inner.values[i]);
            if v0 != v1 {
                let (lo, hi) = if v0 < v1 { (v0, v1) } else { (v1, v0) };
                let start = outer.partition_point(|b| b <= lo);
                let end = outer.partition_point(|b| b < hi);
                let crossing: Box<dyn Iterator<Item = usize>> = if v0 < v1 {
                    Box::new(start..end)
                } else {
                    Box::new((start..end).rev())
                };
                for j in crossing {
                    let b = &outer[j];
                    bps.push(x0 + (b - v0) * (x1 - x0) / (v1 - v0));
                    vals.push(self.values[j].clone());
                }
            }
            bps.push(x1.clone());
            vals.push(self.eval(v1));
            if bps.len() > budget {
                return Err(Error::Resource(format!(
                    "composition exceeds the budget of {budget} breakpoints"
                )));
            }
        }
        Ok(PiecewiseLinearMap {
            breakpoints: bps,
            values: vals,
        })
    }

    pub fn iterate(&self, n: usize, budget: usize) -> Result<PiecewiseLinearMap> {
        let mut g = PiecewiseLinearMap::identity();
        for _ in 0..n {
            g = self.compose(&g, budget)?;
        }
        Ok(g)
    }

    /// Maximal intervals of monotonicity (constant pieces do not split laps).
    pub fn laps(&self) -> u64 {
        let mut laps = 1;
        let mut dir = 0i8;
        for w in self.values.windows(2) {
            let d = match w[1].cmp(&w[0]) {
                std::cmp::Ordering::Greater => 1,
                std::cmp::Ordering::Less => -1,
                std::cmp::Ordering::Equal => continue,
            };
            if dir != 0 && d != dir {
                laps += 1;
            }
            dir = d;
        }
        laps
    }
}

/// The full tent `T` with branches `3x`, `2 - 3x`, `3x - 2`.
pub fn tent() -> PiecewiseLinearMap {
    PiecewiseLinearMap {
        breakpoints: vec![zero(), q(1, 3), q(2, 3), one()],
        values: vec![zero(), one(), zero(), one()],
    }
}

fn tent_eval(y: &Q) -> Q {
    if *y <= q(1, 3) {
        y * q(3, 1)
    } else if *y <= q(2, 3) {
        q(2, 1) - y * q(3, 1)
    } else {
        y * q(3, 1) - q(2, 1)
    }
}

/// Scaled copy of `T` on `[lo, hi]`.
fn tent_on(lo: &Q, hi: &Q, x: &Q) -> Q {
    let w = hi - lo;
    lo + &w * tent_eval(&((x - lo) / &w))
}

/// `ψ(A)` as a lazily evaluated map.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PsiMap {
    pub scheme: Scheme,
}

impl PsiMap {
    pub fn new(scheme: Scheme) -> Self {
        PsiMap { scheme }
    }

    /// Identity on `A`, scaled tent on each gap closure; `0` and `1` are fixed.
    pub fn eval(&self, x: &Q) -> Result<Q> {
        if *x < zero() || *x > one() {
            return Err(Error::Domain(format!("{} is outside [0,1]", rational::format(x))));
        }
        if *x == zero() || *x == one() {
            return Ok(x.clone());
        }
        Ok(match self.scheme.locate(x)? {
            Location::InA => x.clone(),
            Location::Gap(g) => tent_on(&g.lo, &g.hi, x),
        })
    }
}

pub fn eval_psi(m: &PsiMap, x: &Q) -> Result<Q> {
    m.eval(x)
}

/// `ψ(realize(A, d))`: tents pasted between consecutive realized points.
pub fn psi_finite(a: &Scheme, depth: usize) -> PiecewiseLinearMap {
    let mut knots = vec![zero()];
    knots.extend(a.realize(depth));
    knots.push(one());
    let mut bps = vec![zero()];
    let mut vals = vec![zero()];
    for w in knots.windows(2) {
        let (lo, hi) = (&w[0], &w[1]);
        let third = (hi - lo) / q(3, 1);
        bps.extend([lo + &third, hi - &third, hi.clone()]);
        vals.extend([hi.clone(), lo.clone(), hi.clone()]);
    }
    PiecewiseLinearMap {
        breakpoints: bps,
        values: vals,
    }
}

pub fn lap_count(f: &PiecewiseLinearMap, n: usize, budget: usize) -> Result<u64> {
    if n == 0 {
        return Err(Error::Validation("lap_count needs n >= 1".into()));
    }
    Ok(f.iterate(n, budget)?.laps())
}

pub fn entropy_estimate(f: &PiecewiseLinearMap, n: usize, budget: usize) -> Result<f64> {
    Ok((lap_count(f, n, budget)? as f64).ln() / n as f64)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntropyRow {
    pub n: usize,
    pub laps: u64,
    pub estimate: f64,
}

/// Lap counts and estimates for `n = 1..=n_max`, composing once per step.
pub fn entropy_table(f: &PiecewiseLinearMap, n_max: usize, budget: usize) -> Result<Vec<EntropyRow>> {
    let mut g = PiecewiseLinearMap::identity();
    let mut rows = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        g = f.compose(&g, budget)?;
        let laps = g.laps();
        rows.push(EntropyRow {
            n,
            laps,
            estimate: (laps as f64).ln() / n as f64,
        });
    }
    Ok(rows)
}

/// `E(I, ψ(A)) = ⋃_{J ∈ C(A)} J̄×J̄ ∪ Δ`.
pub fn entropy_pairs_symbolic(a: &Scheme) -> IntervalSquareRelation {
    IntervalSquareRelation::new(a.clone())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict")]
pub enum CpeVerdict {
    #[serde(rename = "CPE")]
    Cpe { rank: usize },
    #[serde(rename = "NotCPE")]
    NotCpe { rank: usize, witness: Scheme },
}

impl CpeVerdict {
    pub fn is_cpe(&self) -> bool {
        matches!(self, CpeVerdict::Cpe { .. })
    }

    pub fn rank(&self) -> usize {
        match self {
            CpeVerdict::Cpe { rank } | CpeVerdict::NotCpe { rank, .. } => *rank,
        }
    }
}

/// CPE exactly when the Γ iteration of the entropy pairs reaches the full
/// square, i.e. when `A` has empty perfect core.
pub fn cpe_verdict(a: &Scheme) -> CpeVerdict {
    let (rank, fixed) = gamma_rank_symbolic(&entropy_pairs_symbolic(a));
    match fixed.base {
        None => CpeVerdict::Cpe { rank },
        Some(witness) => CpeVerdict::NotCpe { rank, witness },
    }
}

/// The verdict for the `d`-fold product system: CPE passes to and from
/// finite products, so this is the identity.
pub fn product_verdict(v: &CpeVerdict, _d: usize) -> CpeVerdict {
    v.clone()
}
