//! Finite metric spaces with exact distances.

use serde::{Deserialize, Serialize};

use crate::bits::BitMatrix;
use crate::error::{Error, Result};
use crate::rational::{self, one, pow, q, zero, Q};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum Metric {
    /// Points on the line; `d(x, y) = |x - y|`.
    Line {
        #[serde(with = "rational::text_vec")]
        coords: Vec<Q>,
    },
    /// `d(x, y) = 1` for distinct points.
    Discrete { size: usize },
    /// Periodic one-sided sequences `w w w ...`; `d(x, y) = scale^k` where `k`
    /// is the first index at which they differ.
    Symbolic {
        words: Vec<Vec<u8>>,
        #[serde(with = "rational::text")]
        scale: Q,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FiniteSpace {
    pub metric: Metric,
}

impl FiniteSpace {
    pub fn line(coords: Vec<Q>) -> Self {
        FiniteSpace {
            metric: Metric::Line { coords },
        }
    }

    /// The `n + 1` points `i/n` of `[0, 1]`.
    pub fn grid(n: usize) -> Self {
        Self::line((0..=n).map(|i| q(i as i64, n as i64)).collect())
    }

    pub fn discrete(size: usize) -> Self {
        FiniteSpace {
            metric: Metric::Discrete { size },
        }
    }

    pub fn symbolic(words: Vec<Vec<u8>>, scale: Q) -> Result<Self> {
        if words.iter().any(|w| w.is_empty()) {
            return Err(Error::Validation("symbolic points need nonempty words".into()));
        }
        if scale <= zero() || scale >= one() {
            return Err(Error::Validation("symbolic scale must lie in (0,1)".into()));
        }
        Ok(FiniteSpace {
            metric: Metric::Symbolic { words, scale },
        })
    }

    pub fn len(&self) -> usize {
        match &self.metric {
            Metric::Line { coords } => coords.len(),
            Metric::Discrete { size } => *size,
            Metric::Symbolic { words, .. } => words.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn coords(&self) -> Option<&[Q]> {
        match &self.metric {
            Metric::Line { coords } => Some(coords),
            _ => None,
        }
    }

    /// Length of the common prefix of two periodic sequences, `None` if equal.
    pub fn agreement(a: &[u8], b: &[u8]) -> Option<usize> {
        (0..a.len() + b.len()).find(|&i| a[i % a.len()] != b[i % b.len()])
    }

    pub fn dist(&self, i: usize, j: usize) -> Q {
        match &self.metric {
            Metric::Line { coords } => rational::abs_diff(&coords[i], &coords[j]),
            Metric::Discrete { .. } => {
                if i == j {
                    zero()
                } else {
                    one()
                }
            }
            Metric::Symbolic { words, scale } => match Self::agreement(&words[i], &words[j]) {
                None => zero(),
                Some(k) => pow(scale, k),
            },
        }
    }

    /// `d(i, j) <= r`, exactly.
    pub fn within(&self, i: usize, j: usize, r: &Q) -> bool {
        match &self.metric {
            Metric::Symbolic { words, scale } => {
                // scale^k <= r  iff  k >= needed
                let mut needed = 0;
                let mut d = one();
                while d > *r {
                    if needed > words[i].len() + words[j].len() {
                        return Self::agreement(&words[i], &words[j]).is_none();
                    }
                    d *= scale;
                    needed += 1;
                }
                let (a, b) = (&words[i], &words[j]);
                (0..needed).all(|k| a[k % a.len()] == b[k % b.len()])
            }
            _ => self.dist(i, j) <= *r,
        }
    }

    /// Human-readable name of a point: a rational, an index or a word.
    pub fn label(&self, i: usize) -> String {
        match &self.metric {
            Metric::Line { coords } => rational::format(&coords[i]),
            Metric::Discrete { .. } => i.to_string(),
            Metric::Symbolic { words, .. } => words[i].iter().map(|s| s.to_string()).collect(),
        }
    }

    /// The closed `r`-neighbourhood relation.
    pub fn neighbours(&self, r: &Q) -> BitMatrix {
        let n = self.len();
        let mut m = BitMatrix::new(n);
        match &self.metric {
            Metric::Line { coords } if coords.windows(2).all(|w| w[0] < w[1]) => {
                for i in 0..n {
                    m.set(i, i);
                    for j in i + 1..n {
                        if &coords[j] - &coords[i] > *r {
                            break;
                        }
                        m.set(i, j);
                        m.set(j, i);
                    }
                }
            }
            _ => {
                for i in 0..n {
                    for j in 0..n {
                        if self.within(i, j, r) {
                            m.set(i, j);
                        }
                    }
                }
            }
        }
        m
    }

    /// Index of the point at exactly coordinate `x`, if any.
    pub fn index_of(&self, x: &Q) -> Option<usize> {
        self.coords().and_then(|c| c.binary_search(x).ok())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn metrics() {
        let g = FiniteSpace::grid(8);
        assert_eq!(g.len(), 9);
        assert_eq!(g.dist(1, 5), q(1, 2));
        assert_eq!(g.neighbours(&q(1, 8)).count(), 9 + 2 * 8);
        let s = FiniteSpace::symbolic(vec![vec![0, 1], vec![0, 1, 0, 1], vec![0, 0]], q(1, 4)).unwrap();
        assert_eq!(s.dist(0, 1), zero());
        assert_eq!(s.dist(0, 2), q(1, 4));
        assert_eq!(FiniteSpace::discrete(3).dist(0, 2), one());
    }
}
