//! Subshifts of finite type as vertex shifts, cylinder consistency,
//! independence sets and entropy.

use std::collections::BTreeMap;

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use crate::bits::BitMatrix;
use crate::error::{Error, Result};
use crate::rational::{self, q, Q};

/// Exhaustive independence checks refuse sets larger than this.
pub const MAX_INDEPENDENCE_SET: usize = 24;
/// Window length up to which `max_independence_density` is exact.
pub const EXACT_WINDOW: usize = 12;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SftSpec {
    pub alphabet: Vec<String>,
    pub forbidden: Vec<String>,
}

/// A shift of finite type, recoded as a vertex shift on blocks of length
/// `max(forbidden length) - 1`, pruned to its essential part.
#[derive(Clone, Debug)]
pub struct Sft {
    spec: SftSpec,
    symbols: Vec<char>,
    /// Each state is a block of symbol indices; its label is the first one.
    states: Vec<Vec<usize>>,
    adj: BitMatrix,
    /// `adj^(2^k)`.
    powers: Vec<BitMatrix>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Cylinder {
    pub word: String,
    #[serde(default)]
    pub anchor: i64,
}

impl Cylinder {
    pub fn new(word: &str) -> Self {
        Cylinder {
            word: word.to_string(),
            anchor: 0,
        }
    }

    pub fn anchored(word: &str, anchor: i64) -> Self {
        Cylinder {
            word: word.to_string(),
            anchor,
        }
    }
}

type Vector = Vec<u64>;

fn vec_mul(v: &Vector, m: &BitMatrix) -> Vector {
    let mut out = vec![0u64; v.len()];
    for (w, &bits) in v.iter().enumerate() {
        let mut b = bits;
        while b != 0 {
            let i = w * 64 + b.trailing_zeros() as usize;
            b &= b - 1;
            for (o, r) in out.iter_mut().zip(m.row(i)) {
                *o |= r;
            }
        }
    }
    out
}

impl Sft {
    pub fn new(spec: SftSpec) -> Result<Self> {
        let mut symbols = Vec::new();
        for s in &spec.alphabet {
            let mut cs = s.chars();
            match (cs.next(), cs.next()) {
                (Some(c), None) if !symbols.contains(&c) => symbols.push(c),
                _ => {
                    return Err(Error::Validation(format!(
                        "alphabet entries must be distinct single characters, got {s:?}"
                    )))
                }
            }
        }
        if symbols.is_empty() {
            return Err(Error::Validation("empty alphabet".into()));
        }
        let mut forbidden = Vec::new();
        for w in &spec.forbidden {
            let word: Option<Vec<usize>> =
                w.chars().map(|c| symbols.iter().position(|&s| s == c)).collect();
            match word {
                Some(word) if !word.is_empty() => forbidden.push(word),
                _ => return Err(Error::Validation(format!("bad forbidden word {w:?}"))),
            }
        }
        let block = forbidden.iter().map(Vec::len).max().unwrap_or(2).max(2) - 1;
        let clean = |w: &[usize]| {
            !forbidden
                .iter()
                .any(|f| f.len() <= w.len() && w.windows(f.len()).any(|x| x == f.as_slice()))
        };
        let k = symbols.len();
        let mut states: Vec<Vec<usize>> = vec![vec![]];
        for _ in 0..block {
            states = states
                .into_iter()
                .flat_map(|s| {
                    (0..k).map(move |c| {
                        let mut t = s.clone();
                        t.push(c);
                        t
                    })
                })
                .filter(|s| clean(s))
                .collect();
        }
        let edge = |u: &[usize], v: &[usize]| {
            if u[1..] != v[..v.len() - 1] {
                return false;
            }
            let mut w = u.to_vec();
            w.push(*v.last().expect("nonempty block"));
            clean(&w)
        };
        // Prune states without predecessor or successor until stable.
        let mut alive = vec![true; states.len()];
        loop {
            let mut changed = false;
            for i in 0..states.len() {
                if !alive[i] {
                    continue;
                }
                let out = (0..states.len()).any(|j| alive[j] && edge(&states[i], &states[j]));
                let inn = (0..states.len()).any(|j| alive[j] && edge(&states[j], &states[i]));
                if !(out && inn) {
                    alive[i] = false;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        let states: Vec<Vec<usize>> = states
            .into_iter()
            .zip(&alive)
            .filter(|(_, &a)| a)
            .map(|(s, _)| s)
            .collect();
        if states.is_empty() {
            return Err(Error::Validation("the shift is empty".into()));
        }
        let n = states.len();
        let adj = BitMatrix::from_pairs(
            n,
            (0..n)
                .flat_map(|i| (0..n).map(move |j| (i, j)))
                .filter(|&(i, j)| edge(&states[i], &states[j])),
        );
        let mut powers = vec![adj.clone()];
        for _ in 0..16 {
            let last = powers.last().expect("nonempty");
            powers.push(last.mul(last));
        }
        Ok(Sft {
            spec,
            symbols,
            states,
            adj,
            powers,
        })
    }

    pub fn from_forbidden(alphabet: &[&str], forbidden: &[&str]) -> Result<Self> {
        Self::new(SftSpec {
            alphabet: alphabet.iter().map(|s| s.to_string()).collect(),
            forbidden: forbidden.iter().map(|s| s.to_string()).collect(),
        })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: SftSpec = serde_json::from_str(text).map_err(|e| Error::Validation(e.to_string()))?;
        Self::new(spec)
    }

    /// All sequences over `{0, ..., k-1}` (`k ≤ 10`).
    pub fn full_shift(k: usize) -> Self {
        let alphabet: Vec<String> = (0..k).map(|i| i.to_string()).collect();
        Self::new(SftSpec {
            alphabet,
            forbidden: vec![],
        })
        .expect("full shift is valid")
    }

    /// Binary sequences without two consecutive 1s.
    pub fn golden_mean() -> Self {
        Self::from_forbidden(&["0", "1"], &["11"]).expect("golden mean is valid")
    }

    /// The single periodic orbit `0 1 ... k-1 0 1 ...` (`k ≤ 10`).
    pub fn cycle(k: usize) -> Self {
        let alphabet: Vec<String> = (0..k).map(|i| i.to_string()).collect();
        let mut forbidden = Vec::new();
        for a in 0..k {
            for b in 0..k {
                if b != (a + 1) % k {
                    forbidden.push(format!("{a}{b}"));
                }
            }
        }
        Self::new(SftSpec { alphabet, forbidden }).expect("cycle is valid")
    }

    pub fn spec(&self) -> &SftSpec {
        &self.spec
    }

    pub fn symbols(&self) -> &[char] {
        &self.symbols
    }

    pub fn state_count(&self) -> usize {
        self.states.len()
    }

    pub fn adjacency(&self) -> &BitMatrix {
        &self.adj
    }

    fn symbol_index(&self, c: char) -> Result<usize> {
        self.symbols
            .iter()
            .position(|&s| s == c)
            .ok_or_else(|| Error::Validation(format!("symbol {c:?} is not in the alphabet")))
    }

    fn label_mask(&self, sym: usize) -> Vector {
        let mut v = vec![0u64; self.states.len().div_ceil(64)];
        for (i, s) in self.states.iter().enumerate() {
            if s[0] == sym {
                v[i / 64] |= 1 << (i % 64);
            }
        }
        v
    }

    fn step(&self, v: &Vector, gap: u64) -> Vector {
        let bits = 64 - gap.leading_zeros() as usize;
        let mut extra: Vec<BitMatrix> = Vec::new();
        while self.powers.len() + extra.len() < bits {
            let last = extra.last().unwrap_or_else(|| self.powers.last().expect("nonempty"));
            extra.push(last.mul(last));
        }
        let mut v = v.clone();
        for (bit, m) in self.powers.iter().chain(&extra).enumerate().take(bits) {
            if gap >> bit & 1 == 1 {
                v = vec_mul(&v, m);
            }
        }
        v
    }

    /// Required symbols by position, or `None` if two placed words clash.
    fn place(&self, constraints: &[(i64, &Cylinder)]) -> Result<Option<BTreeMap<i64, usize>>> {
        let mut need = BTreeMap::new();
        for (pos, cyl) in constraints {
            if cyl.word.is_empty() {
                return Err(Error::Validation("cylinder words must be nonempty".into()));
            }
            for (j, c) in cyl.word.chars().enumerate() {
                let sym = self.symbol_index(c)?;
                let p = pos + cyl.anchor + j as i64;
                if *need.entry(p).or_insert(sym) != sym {
                    return Ok(None);
                }
            }
        }
        Ok(Some(need))
    }

    fn satisfiable(&self, need: &BTreeMap<i64, usize>) -> bool {
        let mut iter = need.iter();
        let Some((&p0, &s0)) = iter.next() else {
            return true;
        };
        let mut v = self.label_mask(s0);
        let mut prev = p0;
        for (&p, &s) in iter {
            v = self.step(&v, (p - prev) as u64);
            for (a, b) in v.iter_mut().zip(self.label_mask(s)) {
                *a &= b;
            }
            if v.iter().all(|&w| w == 0) {
                return false;
            }
            prev = p;
        }
        v.iter().any(|&w| w != 0)
    }

    /// Is there a point of the shift carrying every placed word?
    pub fn consistent(&self, constraints: &[(i64, Cylinder)]) -> Result<bool> {
        let refs: Vec<(i64, &Cylinder)> = constraints.iter().map(|(p, c)| (*p, c)).collect();
        Ok(match self.place(&refs)? {
            None => false,
            Some(need) => self.satisfiable(&need),
        })
    }

    fn check_cylinder(&self, c: &Cylinder) -> Result<()> {
        if !self.consistent(&[(0, c.clone())])? {
            return Err(Error::Validation(format!("cylinder word {:?} is not allowed", c.word)));
        }
        Ok(())
    }

    /// Every assignment of `U`/`V` to the positions of `f` is realized.
    pub fn is_independence_set(&self, f: &[i64], u: &Cylinder, v: &Cylinder) -> Result<bool> {
        if f.len() > MAX_INDEPENDENCE_SET {
            return Err(Error::Resource(format!(
                "independence check limited to {MAX_INDEPENDENCE_SET} positions, got {}",
                f.len()
            )));
        }
        self.check_cylinder(u)?;
        self.check_cylinder(v)?;
        let mut f = f.to_vec();
        f.sort_unstable();
        f.dedup();
        let mut stack: Vec<(i64, &Cylinder)> = Vec::new();
        self.all_assignments(&f, u, v, &mut stack)
    }

    fn all_assignments<'a>(
        &self,
        f: &[i64],
        u: &'a Cylinder,
        v: &'a Cylinder,
        placed: &mut Vec<(i64, &'a Cylinder)>,
    ) -> Result<bool> {
        match self.place(placed)? {
            Some(need) if self.satisfiable(&need) => {}
            _ => return Ok(false),
        }
        let Some((&p, rest)) = f.split_first() else {
            return Ok(true);
        };
        for c in [u, v] {
            placed.push((p, c));
            let ok = self.all_assignments(rest, u, v, placed)?;
            placed.pop();
            if !ok {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Largest independence set inside `[0, n)`, lexicographically first
    /// among those of maximal size when exact (`n ≤ 12`); greedy otherwise.
    pub fn max_independence_density(&self, u: &Cylinder, v: &Cylinder, n: usize) -> Result<DensityResult> {
        if n == 0 {
            return Err(Error::Validation("window length must be positive".into()));
        }
        self.check_cylinder(u)?;
        self.check_cylinder(v)?;
        if n <= EXACT_WINDOW {
            for k in (1..=n).rev() {
                let mut chosen = Vec::new();
                if self.search(u, v, n as i64, k, 0, &mut chosen)? {
                    return Ok(DensityResult::new(chosen, n, true));
                }
            }
            return Ok(DensityResult::new(vec![], n, true));
        }
        let mut chosen: Vec<i64> = Vec::new();
        for p in 0..n as i64 {
            if chosen.len() == MAX_INDEPENDENCE_SET {
                break;
            }
            chosen.push(p);
            if !self.is_independence_set(&chosen, u, v)? {
                chosen.pop();
            }
        }
        Ok(DensityResult::new(chosen, n, false))
    }

    fn search(&self, u: &Cylinder, v: &Cylinder, n: i64, k: usize, from: i64, chosen: &mut Vec<i64>) -> Result<bool> {
        if chosen.len() == k {
            return Ok(true);
        }
        let need = (k - chosen.len()) as i64;
        for p in from..=n - need {
            chosen.push(p);
            if self.is_independence_set(chosen, u, v)? && self.search(u, v, n, k, p + 1, chosen)? {
                return Ok(true);
            }
            chosen.pop();
        }
        Ok(false)
    }

    /// Windowed IE-pair test: for each `l ≤ l_max`, the window `[0, l)` must
    /// hold an independence set of size at least `r·l`.
    pub fn ie_pair_verdict(&self, u: &Cylinder, v: &Cylinder, r: &Q, l_max: usize) -> Result<IeVerdict> {
        if *r <= q(0, 1) || *r > q(1, 1) {
            return Err(Error::Validation("r must lie in (0,1]".into()));
        }
        for l in 1..=l_max {
            let best = self.max_independence_density(u, v, l)?;
            if q(best.positions.len() as i64, 1) < r * q(l as i64, 1) {
                return Ok(IeVerdict::NegativeAt { l });
            }
        }
        Ok(IeVerdict::Positive { r: r.clone() })
    }

    /// `(l, max size, density)` for `l = 1..=n`.
    pub fn density_profile(&self, u: &Cylinder, v: &Cylinder, n: usize) -> Result<Vec<DensityResult>> {
        (1..=n).map(|l| self.max_independence_density(u, v, l)).collect()
    }

    pub fn is_irreducible(&self) -> bool {
        self.adj.transitive_closure().is_full()
    }

    /// `log ρ(A)` by power iteration on `A + I` (same Perron vector, spectral
    /// radius shifted by one, no periodicity).
    pub fn entropy(&self, tol: f64) -> Result<f64> {
        if tol <= 0.0 {
            return Err(Error::Validation("tol must be positive".into()));
        }
        if !self.is_irreducible() {
            log::warn!("sft_entropy: adjacency is reducible, using the whole essential part");
        }
        let n = self.states.len();
        let mut x = vec![1.0 / n as f64; n];
        let mut last = f64::NAN;
        for _ in 0..1_000_000 {
            let mut y = x.clone();
            for i in 0..n {
                for j in self.adj.row_ones(i) {
                    y[i] += x[j];
                }
            }
            let norm: f64 = y.iter().sum();
            let lambda = norm / x.iter().sum::<f64>();
            for (a, b) in x.iter_mut().zip(&y) {
                *a = b / norm;
            }
            if (lambda - last).abs() < tol {
                return Ok((lambda - 1.0).ln().max(0.0));
            }
            last = lambda;
        }
        Ok((last - 1.0).ln().max(0.0))
    }

    /// Number of words of length `k` appearing in points of the shift.
    pub fn word_count(&self, k: usize) -> BigUint {
        let block = self.states[0].len();
        if k < block {
            let mut prefixes: Vec<&[usize]> = self.states.iter().map(|s| &s[..k]).collect();
            prefixes.sort();
            prefixes.dedup();
            return BigUint::from(prefixes.len());
        }
        let n = self.states.len();
        let mut counts = vec![BigUint::from(1u32); n];
        for _ in 0..k - block {
            counts = (0..n)
                .map(|i| self.adj.row_ones(i).map(|j| counts[j].clone()).sum())
                .collect();
        }
        counts.into_iter().sum()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DensityResult {
    pub positions: Vec<i64>,
    pub window: usize,
    #[serde(with = "rational::text")]
    pub density: Q,
    pub exact: bool,
}

impl DensityResult {
    fn new(positions: Vec<i64>, window: usize, exact: bool) -> Self {
        let density = q(positions.len() as i64, window as i64);
        DensityResult {
            positions,
            window,
            density,
            exact,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum IeVerdict {
    Positive {
        #[serde(with = "rational::text")]
        r: Q,
    },
    NegativeAt {
        l: usize,
    },
}
