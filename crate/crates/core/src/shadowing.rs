//! Pseudo-orbits on finite systems: validity, shadowing verdicts, and the
//! woven pseudo-orbits that turn shadowing into independence.

use std::collections::{HashMap, HashSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bits::BitMatrix;
use crate::error::{Error, Result};
use crate::rational::{self, q, Q};
use crate::space::FiniteSpace;

/// A finite space with a self-map given by point indices.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSystem {
    pub space: FiniteSpace,
    pub map: Vec<usize>,
}

impl GridSystem {
    pub fn new(space: FiniteSpace, map: Vec<usize>) -> Result<Self> {
        let s = GridSystem { space, map };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.space.len();
        if n == 0 || self.map.len() != n || self.map.iter().any(|&j| j >= n) {
            return Err(Error::Validation("map must send each of the points to a point".into()));
        }
        Ok(())
    }

    pub fn identity(space: FiniteSpace) -> Self {
        let map = (0..space.len()).collect();
        GridSystem { space, map }
    }

    pub fn constant(space: FiniteSpace, target: usize) -> Self {
        let map = vec![target; space.len()];
        GridSystem { space, map }
    }

    /// The tent map on the grid `i/n`, rounding images to the nearest grid
    /// point (ties downwards).
    pub fn tent_grid(n: usize) -> Self {
        let space = FiniteSpace::grid(n);
        let map = (0..=n)
            .map(|i| {
                let x = q(i as i64, n as i64);
                let y = crate::interval_maps::tent().eval(&x) * q(n as i64, 1);
                let lo = y.floor();
                let idx = if &y - &lo > q(1, 2) { lo + q(1, 1) } else { lo };
                usize::try_from(idx.to_integer()).expect("inside the grid")
            })
            .collect();
        GridSystem { space, map }
    }

    /// Periodic points of a shift, given by words, with the shift map. Words
    /// are reduced to primitive periods and deduplicated; the set must be
    /// closed under the shift.
    pub fn shift_orbits(words: &[Vec<u8>], scale: Q) -> Result<Self> {
        let mut seen: HashMap<Vec<u8>, usize> = HashMap::new();
        let mut list = Vec::new();
        for w in words {
            let p = primitive(w);
            if !seen.contains_key(&p) {
                seen.insert(p.clone(), list.len());
                list.push(p);
            }
        }
        let map = list
            .iter()
            .map(|w| {
                let mut r = w[1..].to_vec();
                r.push(w[0]);
                seen.get(&r).copied().ok_or_else(|| {
                    Error::Validation("periodic points are not closed under the shift".into())
                })
            })
            .collect::<Result<Vec<_>>>()?;
        GridSystem::new(FiniteSpace::symbolic(list, scale)?, map)
    }

    /// Adds every rotation of each word.
    pub fn shift_closure(words: &[Vec<u8>], scale: Q) -> Result<Self> {
        let mut all = Vec::new();
        for w in words {
            for k in 0..w.len() {
                let mut r = w[k..].to_vec();
                r.extend_from_slice(&w[..k]);
                all.push(r);
            }
        }
        Self::shift_orbits(&all, scale)
    }

    /// Index of the periodic point `w w w ...` in a symbolic system.
    pub fn index_of_word(&self, w: &[u8]) -> Option<usize> {
        match &self.space.metric {
            crate::space::Metric::Symbolic { words, .. } => {
                let p = primitive(w);
                words.iter().position(|x| *x == p)
            }
            _ => None,
        }
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn apply(&self, x: usize) -> usize {
        self.map[x]
    }

    pub fn iterate(&self, x: usize, n: usize) -> usize {
        (0..n).fold(x, |y, _| self.map[y])
    }

    pub fn orbit(&self, x: usize, len: usize) -> Vec<usize> {
        let mut out = Vec::with_capacity(len);
        let mut y = x;
        for _ in 0..len {
            out.push(y);
            y = self.map[y];
        }
        out
    }
}

/// Shortest word whose repetition equals the repetition of `w`.
fn primitive(w: &[u8]) -> Vec<u8> {
    let n = w.len();
    (1..=n)
        .find(|&p| n.is_multiple_of(p) && (p..n).all(|i| w[i] == w[i - p]))
        .map(|p| w[..p].to_vec())
        .expect("p = n always works")
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PseudoOrbit {
    #[serde(with = "rational::text")]
    pub delta: Q,
    pub seq: Vec<usize>,
}

pub fn is_pseudo_orbit(sys: &GridSystem, seq: &[usize], delta: &Q) -> bool {
    seq.windows(2)
        .all(|w| sys.space.within(sys.apply(w[0]), w[1], delta))
}

pub fn shadows(sys: &GridSystem, y: usize, seq: &[usize], eps: &Q) -> bool {
    let mut z = y;
    for &x in seq {
        if !sys.space.within(z, x, eps) {
            return false;
        }
        z = sys.apply(z);
    }
    true
}

/// Some grid point shadowing `seq`, lowest index first.
pub fn find_shadow(sys: &GridSystem, seq: &[usize], eps: &Q) -> Option<usize> {
    (0..sys.len()).find(|&y| shadows(sys, y, seq, eps))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum ShadowVerdict {
    HoldsExhaustive,
    Fails { witness: PseudoOrbit },
    UnknownSampled { trials: u64 },
}

struct Search<'a> {
    sys: &'a GridSystem,
    eps_ball: BitMatrix,
    delta_ball: BitMatrix,
    /// Children ordered so that orbits drifting away from their start come first.
    steps: usize,
    good: HashSet<(usize, Vec<u64>, usize)>,
}

impl Search<'_> {
    fn children(&self, start: usize, x: usize) -> Vec<usize> {
        let mut c: Vec<usize> = self.delta_ball.row_ones(self.sys.apply(x)).collect();
        c.sort_by(|&a, &b| {
            self.sys
                .space
                .dist(start, b)
                .cmp(&self.sys.space.dist(start, a))
                .then(a.cmp(&b))
        });
        c
    }

    /// Images `T^i y` of the surviving shadows, moved one step and cut down
    /// to the ε-ball around the next pseudo-orbit point.
    fn advance(&self, images: &[u64], next: usize) -> Vec<u64> {
        let mut out = vec![0u64; images.len()];
        for (w, &bits) in images.iter().enumerate() {
            let mut b = bits;
            while b != 0 {
                let z = w * 64 + b.trailing_zeros() as usize;
                b &= b - 1;
                let t = self.sys.apply(z);
                out[t / 64] |= 1 << (t % 64);
            }
        }
        for (o, m) in out.iter_mut().zip(self.eps_ball.row(next)) {
            *o &= m;
        }
        out
    }

    /// Finds a pseudo-orbit extending `path` that no point shadows.
    fn dfs(&mut self, path: &mut Vec<usize>, images: Vec<u64>) -> bool {
        if images.iter().all(|&w| w == 0) {
            return true;
        }
        let left = self.steps + 1 - path.len();
        if left == 0 {
            return false;
        }
        let x = *path.last().expect("nonempty");
        let key = (x, images.clone(), left);
        if self.good.contains(&key) {
            return false;
        }
        for c in self.children(path[0], x) {
            path.push(c);
            let next = self.advance(&images, c);
            if self.dfs(path, next) {
                return true;
            }
            path.pop();
        }
        self.good.insert(key);
        false
    }

    fn extend(&self, path: &mut Vec<usize>) {
        while path.len() < self.steps + 1 {
            let x = *path.last().expect("nonempty");
            path.push(self.children(path[0], x)[0]);
        }
    }
}

/// Does every `delta`-pseudo-orbit `x_0, ..., x_p` admit an `eps`-shadowing
/// grid point? Exhaustive when `|X| · branching^p ≤ budget`, otherwise
/// sampled with the given seed.
pub fn finite_shadowing_check(
    sys: &GridSystem,
    eps: &Q,
    delta: &Q,
    p: usize,
    budget: u64,
    seed: u64,
) -> Result<ShadowVerdict> {
    if p < 2 {
        return Err(Error::Validation("pseudo-orbit length p must be at least 2".into()));
    }
    sys.validate()?;
    let mut search = Search {
        sys,
        eps_ball: sys.space.neighbours(eps),
        delta_ball: sys.space.neighbours(delta),
        steps: p,
        good: HashSet::new(),
    };
    let branching = (0..sys.len())
        .map(|x| search.delta_ball.row_ones(sys.apply(x)).count())
        .max()
        .unwrap_or(1) as u64;
    let size = (sys.len() as u64).saturating_mul(branching.saturating_pow(p as u32));
    let failed = |mut path: Vec<usize>, search: &Search| {
        search.extend(&mut path);
        ShadowVerdict::Fails {
            witness: PseudoOrbit {
                delta: delta.clone(),
                seq: path,
            },
        }
    };
    if size <= budget {
        for x0 in 0..sys.len() {
            let mut path = vec![x0];
            let images = search.eps_ball.row(x0).to_vec();
            if search.dfs(&mut path, images) {
                return Ok(failed(path, &search));
            }
        }
        return Ok(ShadowVerdict::HoldsExhaustive);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let trials = (budget / (p as u64 + 1)).max(1);
    for _ in 0..trials {
        let mut path = vec![rng.gen_range(0..sys.len())];
        let mut images = search.eps_ball.row(path[0]).to_vec();
        while path.len() < p + 1 && images.iter().any(|&w| w != 0) {
            let x = *path.last().expect("nonempty");
            let c: Vec<usize> = search.delta_ball.row_ones(sys.apply(x)).collect();
            let next = c[rng.gen_range(0..c.len())];
            images = search.advance(&images, next);
            path.push(next);
        }
        if images.iter().all(|&w| w == 0) {
            return Ok(failed(path, &search));
        }
    }
    Ok(ShadowVerdict::UnknownSampled { trials })
}

/// Grid points playing the roles `y(i,j)` and `y_i(2,2)` of the weave.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WeaveTable {
    pub y11: usize,
    pub y12: usize,
    pub y21: usize,
    pub y23: usize,
    pub y32: usize,
    pub y33: usize,
    pub y1_22: usize,
    pub y3_22: usize,
}

/// Everything the weave needs besides the pattern.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WeaveInputs {
    /// `a_1, a_2, a_3`.
    pub centres: [usize; 3],
    pub table: WeaveTable,
    pub n1: usize,
    pub n3: usize,
}

impl WeaveInputs {
    pub fn period(&self) -> usize {
        2 * self.n1 * self.n3
    }

    fn n(&self, i: u8) -> usize {
        if i == 1 {
            self.n1
        } else {
            self.n3
        }
    }

    fn centre(&self, i: u8) -> usize {
        self.centres[i as usize - 1]
    }

    /// `(name, point, start centre, steps, end centre)` for each table entry.
    fn conditions(&self) -> Vec<(&'static str, usize, u8, usize, u8)> {
        let t = &self.table;
        vec![
            ("y(1,1)", t.y11, 1, self.n1, 1),
            ("y(1,2)", t.y12, 1, self.n1, 2),
            ("y(2,1)", t.y21, 2, self.n1, 1),
            ("y(2,3)", t.y23, 2, self.n3, 3),
            ("y(3,2)", t.y32, 3, self.n3, 2),
            ("y(3,3)", t.y33, 3, self.n3, 3),
            ("y_1(2,2)", t.y1_22, 2, self.n1, 2),
            ("y_3(2,2)", t.y3_22, 2, self.n3, 2),
        ]
    }

    /// Checks `y ∈ B(a_i, δ/2)` and `Tⁿ(y) ∈ B(a_j, δ/2)` (closed balls).
    pub fn check(&self, sys: &GridSystem, delta: &Q) -> Result<()> {
        if self.n1 < 2 || self.n3 < 2 {
            return Err(Error::Precondition("periods n1 and n3 must exceed 1".into()));
        }
        let r = delta / q(2, 1);
        for (name, y, i, n, j) in self.conditions() {
            if !sys.space.within(y, self.centre(i), &r) {
                return Err(Error::Precondition(format!("{name} is not in B(a_{i}, delta/2)")));
            }
            if !sys.space.within(sys.iterate(y, n), self.centre(j), &r) {
                return Err(Error::Precondition(format!(
                    "T^{n}({name}) is not in B(a_{j}, delta/2)"
                )));
            }
        }
        Ok(())
    }

    /// First grid points meeting each ball condition.
    pub fn find_table(sys: &GridSystem, centres: [usize; 3], n1: usize, n3: usize, delta: &Q) -> Result<Self> {
        let r = delta / q(2, 1);
        let pick = |i: usize, n: usize, j: usize, name: &str| {
            (0..sys.len())
                .find(|&y| {
                    sys.space.within(y, centres[i - 1], &r)
                        && sys.space.within(sys.iterate(y, n), centres[j - 1], &r)
                })
                .ok_or_else(|| Error::Precondition(format!("no grid point can serve as {name}")))
        };
        Ok(WeaveInputs {
            centres,
            table: WeaveTable {
                y11: pick(1, n1, 1, "y(1,1)")?,
                y12: pick(1, n1, 2, "y(1,2)")?,
                y21: pick(2, n1, 1, "y(2,1)")?,
                y23: pick(2, n3, 3, "y(2,3)")?,
                y32: pick(3, n3, 2, "y(3,2)")?,
                y33: pick(3, n3, 3, "y(3,3)")?,
                y1_22: pick(2, n1, 2, "y_1(2,2)")?,
                y3_22: pick(2, n3, 2, "y_3(2,2)")?,
            },
            n1,
            n3,
        })
    }

    fn y_i2(&self, i: u8) -> usize {
        if i == 1 {
            self.table.y12
        } else {
            self.table.y32
        }
    }

    fn y_2j(&self, j: u8) -> usize {
        if j == 1 {
            self.table.y21
        } else {
            self.table.y23
        }
    }

    fn y_jj(&self, j: u8) -> usize {
        if j == 1 {
            self.table.y11
        } else {
            self.table.y33
        }
    }

    fn y_i22(&self, i: u8) -> usize {
        if i == 1 {
            self.table.y1_22
        } else {
            self.table.y3_22
        }
    }

    /// The finite pseudo-orbit `x_m(i,j)`, `m ∈ [0, N]`.
    pub fn block(&self, sys: &GridSystem, i: u8, j: u8) -> Vec<usize> {
        let big_n = self.period();
        if i == j {
            let ni = self.n(i);
            return (0..=big_n).map(|m| sys.iterate(self.y_jj(i), m % ni)).collect();
        }
        let (ni, nj) = (self.n(i), self.n(j));
        (0..=big_n)
            .map(|m| {
                if m < ni {
                    sys.iterate(self.y_i2(i), m)
                } else if m < ni * nj {
                    sys.iterate(self.y_i22(i), m % ni)
                } else if m < ni * nj + nj {
                    sys.iterate(self.y_2j(j), m % nj)
                } else {
                    sys.iterate(self.y_jj(j), m % nj)
                }
            })
            .collect()
    }
}

/// Junction times inside a mixed block `x(i,j)` where pieces are pasted.
pub fn junctions(ni: usize, nj: usize) -> [usize; 4] {
    [ni, ni * nj, nj * (ni + 1), 2 * ni * nj]
}

/// Concatenates `x_{m mod N}(f(Nk), f(Nk+N))` over the blocks `k` for which
/// both pattern values are given, i.e. `(f.len() - 1)·N` points.
pub fn weave(sys: &GridSystem, inputs: &WeaveInputs, f: &[u8], delta: &Q) -> Result<PseudoOrbit> {
    if f.len() < 2 || f.iter().any(|&v| v != 1 && v != 3) {
        return Err(Error::Validation("pattern needs at least two values, each 1 or 3".into()));
    }
    inputs.check(sys, delta)?;
    let big_n = inputs.period();
    let mut seq = Vec::with_capacity((f.len() - 1) * big_n);
    for w in f.windows(2) {
        let block = inputs.block(sys, w[0], w[1]);
        seq.extend_from_slice(&block[..big_n]);
    }
    Ok(PseudoOrbit {
        delta: delta.clone(),
        seq,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndependenceReport {
    pub positions: Vec<usize>,
    pub verified: bool,
    pub patterns_checked: usize,
    pub failing_pattern: Option<Vec<u8>>,
}

/// For each of the `2^k` patterns on `{0, N, ..., N(k-1)}` (extended
/// cyclically), weaves a pseudo-orbit, finds a grid point shadowing it and
/// checks `T^{Nk}(y) ∈ B(a_{f(Nk)}, eps + delta)`.
pub fn independence_from_shadowing(
    sys: &GridSystem,
    inputs: &WeaveInputs,
    eps: &Q,
    delta: &Q,
    k: usize,
) -> Result<IndependenceReport> {
    if k == 0 || k > 20 {
        return Err(Error::Validation("pattern length K must be in 1..=20".into()));
    }
    let big_n = inputs.period();
    let positions: Vec<usize> = (0..k).map(|i| i * big_n).collect();
    let reach = eps + delta;
    for bits in 0..1u32 << k {
        let mut f: Vec<u8> = (0..k).map(|i| if bits >> i & 1 == 1 { 3 } else { 1 }).collect();
        f.push(f[0]);
        let orbit = weave(sys, inputs, &f, delta)?;
        let hit = find_shadow(sys, &orbit.seq, eps).filter(|&y| {
            positions
                .iter()
                .zip(&f)
                .all(|(&m, &fi)| sys.space.within(sys.iterate(y, m), inputs.centre(fi), &reach))
        });
        if hit.is_none() {
            f.pop();
            return Ok(IndependenceReport {
                positions,
                verified: false,
                patterns_checked: bits as usize + 1,
                failing_pattern: Some(f),
            });
        }
    }
    Ok(IndependenceReport {
        positions,
        verified: true,
        patterns_checked: 1 << k,
        failing_pattern: None,
    })
}

/// Parameters of the binary full-shift demonstration: metric scale 1/4,
/// `delta = 1/8` (so `δ/2` balls fix two symbols), `eps = 1/4`, periods
/// `n1 = n3 = 2`, centres `0^∞`, `(01)^∞`, `1^∞`.
pub mod demo {
    use super::*;

    pub fn scale() -> Q {
        q(1, 4)
    }

    pub fn delta() -> Q {
        q(1, 8)
    }

    pub fn eps() -> Q {
        q(1, 4)
    }

    pub const N1: usize = 2;
    pub const N3: usize = 2;

    /// First symbols of the block `x(i,j)` over `[0, N)`.
    pub fn block_symbols(i: u8, j: u8) -> &'static [u8] {
        match (i, j) {
            (1, 1) => &[0, 0, 0, 0, 0, 0, 0, 0],
            (3, 3) => &[1, 1, 1, 1, 1, 1, 1, 1],
            (1, 3) => &[0, 0, 0, 1, 0, 1, 1, 1],
            (3, 1) => &[1, 1, 0, 1, 0, 1, 0, 0],
            _ => panic!("pattern values are 1 or 3"),
        }
    }

    /// Symbol stream of the cyclic pattern `f`.
    pub fn stream(f: &[u8]) -> Vec<u8> {
        (0..f.len())
            .flat_map(|k| block_symbols(f[k], f[(k + 1) % f.len()]).iter().copied())
            .collect()
    }

    fn centre_words() -> Vec<Vec<u8>> {
        vec![vec![0], vec![0, 1], vec![1]]
    }

    fn finish(words: Vec<Vec<u8>>) -> Result<(GridSystem, WeaveInputs)> {
        let mut all = centre_words();
        all.extend(words);
        let sys = GridSystem::shift_closure(&all, scale())?;
        let centres = [
            sys.index_of_word(&[0]).expect("centre present"),
            sys.index_of_word(&[0, 1]).expect("centre present"),
            sys.index_of_word(&[1]).expect("centre present"),
        ];
        let inputs = WeaveInputs::find_table(&sys, centres, N1, N3, &delta())?;
        Ok((sys, inputs))
    }

    /// Periodic points of the full shift carrying every cyclic weave stream
    /// of length `k`, with all their shifts.
    pub fn full_shift_grid(k: usize) -> Result<(GridSystem, WeaveInputs)> {
        let words = (0..1u32 << k)
            .map(|bits| {
                let f: Vec<u8> = (0..k).map(|i| if bits >> i & 1 == 1 { 3 } else { 1 }).collect();
                stream(&f)
            })
            .collect();
        finish(words)
    }

    /// One periodic orbit through the blocks (1,1), (1,3), (3,3), (3,1): a
    /// zero-entropy system that cannot realize long runs of one pattern.
    /// Its centres are orbit points starting `00`, `01` and `11`, which have
    /// the same `δ/2` and `eps + δ` balls as `0^∞`, `(01)^∞` and `1^∞`.
    pub fn single_cycle() -> Result<(GridSystem, WeaveInputs)> {
        let sys = GridSystem::shift_closure(&[stream(&[1, 1, 3, 3])], scale())?;
        let words = match &sys.space.metric {
            crate::space::Metric::Symbolic { words, .. } => words.clone(),
            _ => unreachable!("shift systems are symbolic"),
        };
        let starting = |p: [u8; 2]| {
            words
                .iter()
                .position(|w| w[0] == p[0] && w[1 % w.len()] == p[1])
                .expect("the orbit passes every block")
        };
        let centres = [starting([0, 0]), starting([0, 1]), starting([1, 1])];
        let inputs = WeaveInputs::find_table(&sys, centres, N1, N3, &delta())?;
        Ok((sys, inputs))
    }
}
