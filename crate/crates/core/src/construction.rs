//! Position functions on a compact set (`m`, `n`, `t`) and the relation
//! algebra of single-site moves on a finite product indexed by left
//! endpoints.
//!
//! A [`CoordinateModel`] picks finitely many left endpoints as coordinates.
//! Every coordinate ranges over the same value set: the `t`-values the
//! constraints need plus a few abstract symbols. Relations are [`BitMatrix`]
//! values over the mixed-radix state index.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::bits::BitMatrix;
use crate::compacta::{Gap, Location, Scheme};
use crate::error::{Error, Result};
use crate::rational::{self, one, zero, Q};

pub const MAX_COORDS: usize = 5;
pub const MAX_VALUES: usize = 6;
/// `MAX_VALUES ^ MAX_COORDS`; the tail coordinate counts against it too.
pub const MAX_STATES: usize = 7776;

/// A value of `m` or `t`. `boundary` is set when the value is the
/// convention `1`: the next derived set has nothing to the right, so the
/// containing gap ends at 1, outside the set.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Endpoint {
    #[serde(with = "rational::text")]
    pub value: Q,
    pub boundary: bool,
}

impl Endpoint {
    fn exact(value: Q) -> Self {
        Endpoint {
            value,
            boundary: false,
        }
    }
}

fn unit_gap() -> Gap {
    Gap {
        lo: zero(),
        hi: one(),
        lo_in_a: false,
        hi_in_a: false,
    }
}

/// The derived sets of a scheme, computed once and queried exactly.
#[derive(Clone, Debug)]
pub struct Levels {
    scheme: Scheme,
    sets: Vec<Scheme>,
    core: Option<Scheme>,
}

impl Levels {
    pub fn new(a: &Scheme) -> Self {
        let (sets, core) = a.derived_sets();
        Levels {
            scheme: a.clone(),
            sets,
            core,
        }
    }

    pub fn scheme(&self) -> &Scheme {
        &self.scheme
    }

    pub fn rank(&self) -> usize {
        self.sets.len()
    }

    pub fn core(&self) -> Option<&Scheme> {
        self.core.as_ref()
    }

    /// `A^alpha`, saturating at the core. `None` when empty.
    pub fn at(&self, alpha: usize) -> Option<&Scheme> {
        self.sets.get(alpha).or(self.core.as_ref())
    }

    fn require_point(&self, x: &Q) -> Result<()> {
        if self.scheme.contains(x) {
            Ok(())
        } else {
            Err(Error::Domain(format!(
                "{} is not a point of the set",
                rational::format(x)
            )))
        }
    }

    /// `Some(alpha)` when `x` is in `A^alpha` but not `A^(alpha+1)`, `None`
    /// on the core.
    pub fn level_of(&self, x: &Q) -> Result<Option<usize>> {
        self.require_point(x)?;
        Ok((0..self.rank()).find(|&alpha| !self.at(alpha + 1).is_some_and(|s| s.contains(x))))
    }

    /// Right endpoint of the gap of the next derived set holding `x`;
    /// identity on the core.
    pub fn m(&self, x: &Q) -> Result<Endpoint> {
        let Some(alpha) = self.level_of(x)? else {
            return Ok(Endpoint::exact(x.clone()));
        };
        Ok(match self.at(alpha + 1) {
            None => Endpoint {
                value: one(),
                boundary: true,
            },
            Some(next) => match next.locate(x)? {
                Location::Gap(g) => Endpoint {
                    boundary: !g.hi_in_a,
                    value: g.hi,
                },
                Location::InA => unreachable!("x is not in the next derived set"),
            },
        })
    }

    /// Largest over the levels meeting `[r(gap), c]` of the least point
    /// they have there.
    pub fn n(&self, gap: &Gap, c: &Q) -> Result<Q> {
        self.require_gap(gap)?;
        self.require_point(c)?;
        let b = &gap.hi;
        if c < b {
            return Err(Error::Domain(format!(
                "{} lies left of the gap's right end {}",
                rational::format(c),
                rational::format(b)
            )));
        }
        (0..=self.rank())
            .filter_map(|alpha| self.at(alpha)?.min_in_range(b, c))
            .max()
            .ok_or_else(|| Error::Domain("no level meets the range".into()))
    }

    /// `m(n(gap, c))` for a left endpoint `c`.
    pub fn t(&self, gap: &Gap, c: &Q) -> Result<Endpoint> {
        if !self.scheme.is_left_endpoint(c) {
            return Err(Error::Domain(format!(
                "{} is not a left endpoint of a gap",
                rational::format(c)
            )));
        }
        self.m(&self.n(gap, c)?)
    }

    /// `t` for the gap whose left endpoint is `a`.
    pub fn t_at(&self, a: &Q, c: &Q) -> Result<Endpoint> {
        self.t(&self.gap_of(a)?, c)
    }

    /// The gap starting at the left endpoint `a`.
    pub fn gap_of(&self, a: &Q) -> Result<Gap> {
        self.scheme.right_gap(a)?.ok_or_else(|| {
            Error::Domain(format!(
                "{} is not a left endpoint of a gap",
                rational::format(a)
            ))
        })
    }

    /// The gap `I` of `A^alpha` with `l(I) <= x < r(I)`, for a left endpoint
    /// `x`. With `A^alpha` empty this is `(0,1)`.
    pub fn dotted_gap(&self, alpha: usize, x: &Q) -> Result<Gap> {
        let Some(s) = self.at(alpha) else {
            return Ok(unit_gap());
        };
        match s.locate(x)? {
            Location::Gap(g) => Ok(g),
            Location::InA => s.right_gap(x)?.ok_or_else(|| {
                Error::Domain(format!(
                    "{} is not a left endpoint at level {alpha}",
                    rational::format(x)
                ))
            }),
        }
    }

    fn require_gap(&self, gap: &Gap) -> Result<()> {
        if !gap.hi_in_a {
            return Err(Error::Domain("the gap has no right endpoint in the set".into()));
        }
        let mid = (&gap.lo + &gap.hi) / Q::from_integer(2.into());
        match self.scheme.locate(&mid)? {
            Location::Gap(g) if g == *gap => Ok(()),
            _ => Err(Error::Domain(format!(
                "({}, {}) is not a gap of the set",
                rational::format(&gap.lo),
                rational::format(&gap.hi)
            ))),
        }
    }
}

pub fn m_of(a: &Scheme, x: &Q) -> Result<Endpoint> {
    Levels::new(a).m(x)
}

pub fn n_of(a: &Scheme, gap: &Gap, c: &Q) -> Result<Q> {
    Levels::new(a).n(gap, c)
}

pub fn t_of(a: &Scheme, gap: &Gap, c: &Q) -> Result<Endpoint> {
    Levels::new(a).t(gap, c)
}

/// How constraints on left endpoints outside the model are treated.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TailMode {
    /// Ignored.
    #[default]
    Open,
    /// One extra coordinate standing for `max A`, never moved by any
    /// single-site relation or box. Requires `max A` outside the model.
    Immutable,
}

fn default_symbols() -> Vec<String> {
    vec!["s0".into(), "s1".into()]
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoordinateModel {
    pub scheme: Scheme,
    /// Left endpoints used as coordinates, increasing.
    #[serde(rename = "L", with = "rational::text_vec")]
    pub coords: Vec<Q>,
    /// Abstract values. Consecutive symbols are related.
    #[serde(default = "default_symbols")]
    pub abstract_symbols: Vec<String>,
    #[serde(default)]
    pub tail_mode: TailMode,
    /// Also relate every point value to the first symbol, which makes the
    /// value relation connected.
    #[serde(default)]
    pub link_points: bool,
}

impl CoordinateModel {
    pub fn new(scheme: Scheme, coords: Vec<Q>, tail_mode: TailMode) -> Self {
        CoordinateModel {
            scheme,
            coords,
            abstract_symbols: default_symbols(),
            tail_mode,
            link_points: false,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Validation(e.to_string()))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Value {
    Point(Q),
    Symbol(String),
}

impl Value {
    pub fn label(&self) -> String {
        match self {
            Value::Point(x) => rational::format(x),
            Value::Symbol(s) => s.clone(),
        }
    }
}

/// Which single-site relation family to build.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RelationKind {
    /// Free change at one coordinate, later coordinates pinned to `t`.
    Free(usize),
    /// As `Free`, but the change must follow a value-relation edge.
    Edge(usize),
    /// Union of every `Free` and the diagonal.
    AllFree,
    /// Union of every `Edge` and the diagonal.
    AllEdge,
}

/// A validated model with its value set, pins and state indexing.
#[derive(Clone, Debug)]
pub struct ProductSpace {
    model: CoordinateModel,
    levels: Levels,
    values: Vec<Value>,
    pins: Vec<Vec<(usize, usize)>>,
    tail_values: Vec<Q>,
    tail_pin: Vec<Option<usize>>,
    edges: Vec<Vec<bool>>,
    boundary_used: bool,
    powers: Vec<usize>,
    states: usize,
}

impl ProductSpace {
    pub fn new(model: CoordinateModel) -> Result<Self> {
        model.scheme.validate()?;
        let coords = &model.coords;
        if coords.is_empty() || coords.len() > MAX_COORDS {
            return Err(Error::Validation(format!(
                "model needs 1..={MAX_COORDS} coordinates, got {}",
                coords.len()
            )));
        }
        if coords.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Validation("coordinates must be strictly increasing".into()));
        }
        let syms = &model.abstract_symbols;
        if syms.len() < 2 {
            return Err(Error::Validation("at least two abstract symbols are needed".into()));
        }
        let distinct: BTreeSet<&String> = syms.iter().collect();
        if distinct.len() != syms.len()
            || syms.iter().any(|s| s.is_empty() || rational::parse(s).is_ok())
        {
            return Err(Error::Validation(
                "abstract symbols must be distinct, nonempty and not numbers".into(),
            ));
        }
        let levels = Levels::new(&model.scheme);
        let mut gaps = Vec::with_capacity(coords.len());
        for a in coords {
            gaps.push(levels.gap_of(a).map_err(|e| Error::Validation(e.to_string()))?);
        }

        let mut boundary_used = false;
        let mut t_table = vec![Vec::new(); coords.len()];
        let mut points = BTreeSet::new();
        for (i, gap) in gaps.iter().enumerate() {
            for (j, c) in coords.iter().enumerate().skip(i + 1) {
                let t = levels.t(gap, c)?;
                boundary_used |= t.boundary;
                points.insert(t.value.clone());
                t_table[i].push((j, t.value));
            }
        }

        let mut tail_values = Vec::new();
        let mut tail_raw = Vec::new();
        if model.tail_mode == TailMode::Immutable {
            let top = model.scheme.hull().1;
            if coords.contains(&top) {
                return Err(Error::Validation(
                    "immutable tail needs the maximum of the set outside the coordinates".into(),
                ));
            }
            for gap in &gaps {
                let t = levels.t(gap, &top)?;
                boundary_used |= t.boundary;
                tail_raw.push(t.value);
            }
            let set: BTreeSet<Q> = tail_raw.iter().cloned().collect();
            tail_values = set.into_iter().collect();
        }

        let mut values: Vec<Value> = points.into_iter().map(Value::Point).collect();
        let n_points = values.len();
        values.extend(syms.iter().cloned().map(Value::Symbol));
        if values.len() > MAX_VALUES {
            return Err(Error::Validation(format!(
                "model needs {} values, the cap is {MAX_VALUES}",
                values.len()
            )));
        }
        let base = values.len();
        let mut powers = vec![1usize; coords.len() + 1];
        for i in 1..powers.len() {
            powers[i] = powers[i - 1] * base;
        }
        let states = powers[coords.len()] * tail_values.len().max(1);
        if states > MAX_STATES {
            return Err(Error::Validation(format!(
                "model has {states} states, the cap is {MAX_STATES}"
            )));
        }

        let index_of = |x: &Q| {
            values
                .iter()
                .position(|v| *v == Value::Point(x.clone()))
                .expect("every pinned value was collected")
        };
        let pins = t_table
            .iter()
            .map(|row| row.iter().map(|(j, x)| (*j, index_of(x))).collect())
            .collect();
        let tail_pin = if tail_values.is_empty() {
            vec![None; coords.len()]
        } else {
            tail_raw
                .iter()
                .map(|x| tail_values.iter().position(|t| t == x))
                .collect()
        };

        let mut edges = vec![vec![false; base]; base];
        for (p, row) in edges.iter_mut().enumerate().take(n_points) {
            row[p] = true;
        }
        for k in n_points..base - 1 {
            edges[k][k + 1] = true;
            edges[k + 1][k] = true;
        }
        if model.link_points {
            for p in 0..n_points {
                edges[p][n_points] = true;
                edges[n_points][p] = true;
            }
        }

        Ok(ProductSpace {
            model,
            levels,
            values,
            pins,
            tail_values,
            tail_pin,
            edges,
            boundary_used,
            powers,
            states,
        })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Self::new(CoordinateModel::from_json(text)?)
    }

    pub fn model(&self) -> &CoordinateModel {
        &self.model
    }

    pub fn levels(&self) -> &Levels {
        &self.levels
    }

    pub fn values(&self) -> &[Value] {
        &self.values
    }

    pub fn tail_values(&self) -> &[Q] {
        &self.tail_values
    }

    pub fn coords(&self) -> usize {
        self.model.coords.len()
    }

    pub fn states(&self) -> usize {
        self.states
    }

    /// Whether some pinned value is the boundary convention `1`.
    pub fn boundary_used(&self) -> bool {
        self.boundary_used
    }

    fn base(&self) -> usize {
        self.values.len()
    }

    fn digit(&self, s: usize, i: usize) -> usize {
        s / self.powers[i] % self.base()
    }

    fn tail_digit(&self, s: usize) -> usize {
        s / self.powers[self.coords()]
    }

    fn with_digit(&self, s: usize, i: usize, v: usize) -> usize {
        s - self.digit(s, i) * self.powers[i] + v * self.powers[i]
    }

    /// Coordinate labels of a state, followed by the tail value if any.
    pub fn label(&self, s: usize) -> Vec<String> {
        let mut out: Vec<String> = (0..self.coords())
            .map(|i| self.values[self.digit(s, i)].label())
            .collect();
        if !self.tail_values.is_empty() {
            out.push(rational::format(&self.tail_values[self.tail_digit(s)]));
        }
        out
    }

    /// Whether the value relation, as an undirected graph, is connected.
    pub fn values_connected(&self) -> bool {
        let n = self.base();
        let mut seen = vec![false; n];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(u) = stack.pop() {
            for v in 0..n {
                if self.edges[u][v] && !seen[v] {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
        seen.into_iter().all(|b| b)
    }

    fn admits(&self, i: usize, s: usize) -> bool {
        self.pins[i].iter().all(|&(j, v)| self.digit(s, j) == v)
            && self.tail_pin[i].is_none_or(|t| self.tail_digit(s) == t)
    }

    fn single_site(&self, i: usize, edge_only: bool) -> BitMatrix {
        let mut m = BitMatrix::new(self.states);
        for s in 0..self.states {
            if !self.admits(i, s) {
                continue;
            }
            let u = self.digit(s, i);
            for v in 0..self.base() {
                if !edge_only || self.edges[u][v] {
                    m.set(s, self.with_digit(s, i, v));
                }
            }
        }
        m
    }

    pub fn diagonal(&self) -> BitMatrix {
        BitMatrix::identity(self.states)
    }

    pub fn full(&self) -> BitMatrix {
        BitMatrix::full(self.states)
    }

    pub fn build_relation(&self, kind: RelationKind) -> Result<BitMatrix> {
        let check = |i: usize| {
            if i < self.coords() {
                Ok(i)
            } else {
                Err(Error::Validation(format!("no coordinate {i}")))
            }
        };
        Ok(match kind {
            RelationKind::Free(i) => self.single_site(check(i)?, false),
            RelationKind::Edge(i) => self.single_site(check(i)?, true),
            RelationKind::AllFree | RelationKind::AllEdge => {
                let mut m = self.diagonal();
                for i in 0..self.coords() {
                    m.union_with(&self.single_site(i, kind == RelationKind::AllEdge));
                }
                m
            }
        })
    }

    fn d_a(&self, i: usize) -> BitMatrix {
        self.single_site(i, false)
    }

    fn d_all(&self) -> BitMatrix {
        self.build_relation(RelationKind::AllFree).expect("kind needs no index")
    }

    /// Pairs agreeing, off the coordinates `free`, with some pair of `m`.
    pub fn box_over(&self, free: &[usize], m: &BitMatrix) -> BitMatrix {
        if free.is_empty() {
            return m.clone();
        }
        let n = self.states;
        let words = n.div_ceil(64);
        let key = |s: usize| s - free.iter().map(|&i| self.digit(s, i) * self.powers[i]).sum::<usize>();
        let mut fibres: Vec<Vec<usize>> = vec![Vec::new(); n];
        let mut masks: Vec<Vec<u64>> = vec![Vec::new(); n];
        for s in 0..n {
            let k = key(s);
            fibres[k].push(s);
            if masks[k].is_empty() {
                masks[k] = vec![0; words];
            }
            masks[k][s / 64] |= 1 << (s % 64);
        }
        let mut partners = BitMatrix::new(n);
        for (y, y2) in m.pairs() {
            partners.set(key(y), key(y2));
        }
        let mut out = BitMatrix::new(n);
        let mut row = vec![0u64; words];
        for k in 0..n {
            if fibres[k].is_empty() {
                continue;
            }
            row.fill(0);
            for k2 in partners.row_ones(k) {
                for (r, w) in row.iter_mut().zip(&masks[k2]) {
                    *r |= w;
                }
            }
            for &w in &fibres[k] {
                out.or_into(w, &row);
            }
        }
        out
    }

    /// Box, over `coords`, of the union of the free single-site relations
    /// at those coordinates.
    pub fn e_interval(&self, coords: &[usize]) -> BitMatrix {
        let mut u = BitMatrix::new(self.states);
        for &i in coords {
            u.union_with(&self.d_a(i));
        }
        self.box_over(coords, &u)
    }

    /// Coordinates grouped by the dotted gap of `A^alpha` holding them,
    /// left to right. Only gaps holding coordinates appear.
    pub fn groups(&self, alpha: usize) -> Vec<(Gap, Vec<usize>)> {
        let mut out: Vec<(Gap, Vec<usize>)> = Vec::new();
        for (i, a) in self.model.coords.iter().enumerate() {
            let g = self
                .levels
                .dotted_gap(alpha, a)
                .expect("coordinates are left endpoints");
            match out.last_mut() {
                Some((last, members)) if *last == g => members.push(i),
                _ => out.push((g, vec![i])),
            }
        }
        out
    }

    /// Diagonal together with the interval relations of every gap of
    /// `A^alpha`.
    pub fn e_sets(&self, alpha: usize) -> BitMatrix {
        let mut m = self.diagonal();
        for (_, members) in self.groups(alpha) {
            m.union_with(&self.e_interval(&members));
        }
        m
    }

    /// For a set with a core: the level relation at the rank, boxed over the
    /// coordinates of the core gap reaching 1.
    pub fn core_stable(&self) -> Option<BitMatrix> {
        self.levels.core()?;
        let rank = self.levels.rank();
        let terminal: Vec<usize> = self
            .groups(rank)
            .into_iter()
            .find(|(g, _)| g.hi == one())
            .map(|(_, m)| m)
            .unwrap_or_default();
        Some(self.box_over(&terminal, &self.e_sets(rank)))
    }

    fn witness(&self, y: usize, y2: usize) -> Witness {
        Witness::Pair {
            y: self.label(y),
            y_prime: self.label(y2),
        }
    }

    /// First pair of `a` missing from `b`.
    fn excess(&self, a: &BitMatrix, b: &BitMatrix) -> Option<Witness> {
        a.pairs()
            .find(|&(i, j)| !b.get(i, j))
            .map(|(i, j)| self.witness(i, j))
    }

    /// Whether every pair with both tails equal to `tail` is related.
    fn slice_full(&self, m: &BitMatrix, tail: usize) -> Option<Witness> {
        let width = self.powers[self.coords()];
        let range = tail * width..(tail + 1) * width;
        for y in range.clone() {
            for y2 in range.clone() {
                if !m.get(y, y2) {
                    return Some(self.witness(y, y2));
                }
            }
        }
        None
    }
}

/// Transitive closure, without the diagonal.
pub fn closure_plus(m: &BitMatrix) -> BitMatrix {
    m.transitive_closure()
}

/// One finite Γ step: closure plus diagonal.
pub fn gamma_finite(m: &BitMatrix) -> BitMatrix {
    let mut out = closure_plus(m);
    out.union_with(&BitMatrix::identity(m.dim()));
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Skipped,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Witness {
    Pair {
        y: Vec<String>,
        y_prime: Vec<String>,
    },
    Formula {
        a: String,
        other: Option<String>,
        c: String,
        expected: String,
        got: String,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub status: Status,
    pub cases: usize,
    pub detail: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
}

impl Check {
    fn new(name: &str, cases: usize, detail: impl Into<String>, witness: Option<Witness>) -> Self {
        Check {
            name: name.into(),
            status: if witness.is_some() {
                Status::Fail
            } else {
                Status::Pass
            },
            cases,
            detail: detail.into(),
            witness,
        }
    }

    fn failed(name: &str, cases: usize, detail: impl Into<String>) -> Self {
        Check {
            name: name.into(),
            status: Status::Fail,
            cases,
            detail: detail.into(),
            witness: None,
        }
    }

    fn skipped(name: &str, detail: impl Into<String>) -> Self {
        Check {
            name: name.into(),
            status: Status::Skipped,
            cases: 0,
            detail: detail.into(),
            witness: None,
        }
    }

    pub fn passed(&self) -> bool {
        self.status != Status::Fail
    }
}

fn formula_witness(a: &Q, other: Option<&Q>, c: &Q, expected: &Q, got: &Q) -> Witness {
    Witness::Formula {
        a: rational::format(a),
        other: other.map(rational::format),
        c: rational::format(c),
        expected: rational::format(expected),
        got: rational::format(got),
    }
}

/// Exact checks of the `t` identities over a sample of left endpoints,
/// used both as gap owners and as evaluation points.
pub fn formula_checks(levels: &Levels, sample: &[Q]) -> Result<Vec<Check>> {
    let mut sample = sample.to_vec();
    sample.sort();
    sample.dedup();
    let rank = levels.rank();

    // Two gaps inside one gap of a derived set share t beyond it.
    let mut cases = 0;
    let mut witness = None;
    'same: for alpha in 0..=rank {
        for (i, a) in sample.iter().enumerate() {
            let outer = levels.dotted_gap(alpha, a)?;
            for a2 in &sample[i + 1..] {
                if levels.dotted_gap(alpha, a2)? != outer {
                    continue;
                }
                for c in sample.iter().filter(|c| **c >= outer.hi) {
                    cases += 1;
                    let (t1, t2) = (levels.t_at(a, c)?, levels.t_at(a2, c)?);
                    if t1 != t2 {
                        witness = Some(formula_witness(a, Some(a2), c, &t1.value, &t2.value));
                        break 'same;
                    }
                }
            }
        }
    }
    let mut out = vec![Check::new(
        "eventually_same",
        cases,
        "t of two gaps inside one derived-set gap agree to its right",
        witness,
    )];

    // Beyond a core gap, t is its right endpoint.
    if levels.core().is_some() {
        let mut cases = 0;
        let mut witness = None;
        'barrier: for a in &sample {
            let outer = levels.dotted_gap(rank, a)?;
            for c in sample.iter().filter(|c| **c >= outer.hi) {
                cases += 1;
                let t = levels.t_at(a, c)?;
                if t.value != outer.hi {
                    witness = Some(formula_witness(a, None, c, &outer.hi, &t.value));
                    break 'barrier;
                }
            }
        }
        out.push(Check::new(
            "perfect_barrier",
            cases,
            "t beyond a core gap equals the gap's right endpoint",
            witness,
        ));
    } else {
        out.push(Check::skipped("perfect_barrier", "the set has no perfect core"));
    }

    // Between the level-alpha gap and the end of the level-(alpha+1) gap,
    // t is the latter's right endpoint.
    let mut cases = 0;
    let mut witness = None;
    'fixed: for alpha in 0..rank {
        for a in &sample {
            let inner = levels.dotted_gap(alpha, a)?;
            let outer = levels.dotted_gap(alpha + 1, a)?;
            for c in sample.iter().filter(|c| **c >= inner.hi && **c < outer.hi) {
                cases += 1;
                let t = levels.t_at(a, c)?;
                if t.value != outer.hi {
                    witness = Some(formula_witness(a, None, c, &outer.hi, &t.value));
                    break 'fixed;
                }
            }
        }
    }
    out.push(Check::new(
        "fixed_higher_level",
        cases,
        "t between consecutive level gaps is the outer right endpoint",
        witness,
    ));
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PropositionReport {
    pub model: CoordinateModel,
    pub states: usize,
    pub values: Vec<String>,
    pub tail_values: Vec<String>,
    pub boundary_convention_used: bool,
    pub checks: Vec<Check>,
    pub all_pass: bool,
}

/// Subsets of coordinates used by the exhaustive relation checks: all of
/// them on small models, otherwise the empty set, singletons, level groups
/// and everything.
fn coordinate_subsets(space: &ProductSpace) -> (Vec<Vec<usize>>, bool) {
    let n = space.coords();
    if space.states() <= 1296 {
        let all = (0..1usize << n)
            .map(|mask| (0..n).filter(|i| mask >> i & 1 == 1).collect())
            .collect();
        return (all, true);
    }
    let mut set: BTreeSet<Vec<usize>> = BTreeSet::new();
    set.insert(Vec::new());
    set.insert((0..n).collect());
    for i in 0..n {
        set.insert(vec![i]);
    }
    for alpha in 0..=space.levels().rank() {
        for (_, g) in space.groups(alpha) {
            set.insert(g);
        }
    }
    (set.into_iter().collect(), false)
}

/// Extra left endpoints mixed into the formula sample.
const FORMULA_SAMPLE: usize = 12;

pub fn check_propositions(model: &CoordinateModel) -> Result<PropositionReport> {
    let space = ProductSpace::new(model.clone())?;
    let levels = space.levels();
    let rank = levels.rank();
    let has_core = levels.core().is_some();

    let mut sample = model.coords.clone();
    sample.extend(model.scheme.left_endpoints(FORMULA_SAMPLE));
    let mut checks = formula_checks(levels, &sample)?;

    let d_all = space.d_all();
    let (subsets, exhaustive) = coordinate_subsets(&space);
    let scope = if exhaustive {
        "all coordinate subsets"
    } else {
        "singletons, level groups, empty and full"
    };

    // Interval relations are transitive.
    let mut witness = None;
    for s in &subsets {
        let e = space.e_interval(s);
        if let Some(w) = space.excess(&closure_plus(&e), &e) {
            witness = Some(w);
            break;
        }
    }
    checks.push(Check::new("interval_transitive", subsets.len(), scope, witness));

    // Box laws.
    let mut witness = None;
    let mut cases = 0;
    let first = space.d_a(0);
    let last = space.d_a(space.coords() - 1);
    let last_box = |s: &[usize]| space.box_over(s, &last);
    'laws: for s in &subsets {
        cases += 1;
        let b = space.box_over(s, &d_all);
        if let Some(w) = space.excess(&space.box_over(s, &b), &b) {
            witness = Some(w);
            break;
        }
        let lhs = space.box_over(s, &first.union(&last));
        let rhs = space.box_over(s, &first).union(&last_box(s));
        if lhs != rhs {
            witness = space.excess(&lhs, &rhs).or_else(|| space.excess(&rhs, &lhs));
            break;
        }
        let e = space.e_interval(s);
        if space.box_over(s, &e) != e {
            witness = space.excess(&space.box_over(s, &e), &e);
            break;
        }
        for i in 0..space.coords() {
            let mut joined = s.clone();
            if !joined.contains(&i) {
                joined.push(i);
            }
            let nested = space.box_over(s, &space.box_over(&[i], &d_all));
            if let Some(w) = space.excess(&nested, &space.box_over(&joined, &d_all)) {
                witness = Some(w);
                break 'laws;
            }
        }
    }
    checks.push(Check::new(
        "box_laws",
        cases,
        format!("idempotence, union, saturation and nesting over {scope}"),
        witness,
    ));

    let e_levels: Vec<BitMatrix> = (0..=rank).map(|alpha| space.e_sets(alpha)).collect();

    checks.push(Check::new(
        "level_zero_is_d",
        1,
        "the level-0 relation equals the union of single-site relations",
        space
            .excess(&e_levels[0], &d_all)
            .or_else(|| space.excess(&d_all, &e_levels[0])),
    ));

    checks.push(Check::new(
        "d_inside_levels",
        e_levels.len(),
        "the single-site union lies inside every level relation",
        e_levels.iter().find_map(|e| space.excess(&d_all, e)),
    ));

    let mut cases = 0;
    let mut failure = None;
    for (alpha, e) in e_levels.iter().enumerate() {
        if space.groups(alpha).len() >= 2 {
            cases += 1;
            if e.is_full() {
                failure = Some(alpha);
                break;
            }
        }
    }
    checks.push(match failure {
        Some(alpha) => Check::failed(
            "levels_not_full",
            cases,
            format!("level {alpha} has two occupied gaps yet is full"),
        ),
        None => Check::new(
            "levels_not_full",
            cases,
            "levels with two occupied gaps are not full",
            None,
        ),
    });

    let mut cases = 0;
    let mut failure = None;
    'decomp: for alpha in 0..rank {
        let mut inner: Vec<Gap> = Vec::new();
        for a in &model.coords {
            cases += 1;
            let j = levels.dotted_gap(alpha, a)?;
            let i = levels.dotted_gap(alpha + 1, a)?;
            if j.lo < i.lo || j.hi > i.hi {
                failure = Some(format!(
                    "level {alpha} gap of {} escapes the next level's gap",
                    rational::format(a)
                ));
                break 'decomp;
            }
            if !inner.contains(&j) {
                inner.push(j);
            }
        }
        if inner.windows(2).any(|w| w[0].hi > w[1].lo) {
            failure = Some(format!("level {alpha} gaps overlap"));
            break;
        }
    }
    checks.push(match failure {
        Some(d) => Check::failed("decomposition", cases, d),
        None => Check::new(
            "decomposition",
            cases,
            "occupied level gaps nest in the next level and are disjoint",
            None,
        ),
    });

    let gamma_d = gamma_finite(&d_all);

    let mut witness = None;
    for alpha in 0..rank {
        if let Some(w) = space.excess(&e_levels[alpha + 1], &gamma_finite(&e_levels[alpha])) {
            witness = Some(w);
            break;
        }
    }
    checks.push(Check::new(
        "level_step_inside_gamma",
        rank,
        "each level relation lies in Γ of the previous one",
        witness,
    ));

    let mut power = d_all.clone();
    let mut witness = None;
    let mut cases = 0;
    for (alpha, e) in e_levels.iter().enumerate() {
        if levels.at(alpha).is_none() {
            break;
        }
        cases += 1;
        if let Some(w) = space.excess(e, &power) {
            witness = Some(w);
            break;
        }
        power = gamma_finite(&power);
    }
    checks.push(Check::new(
        "levels_inside_gamma_powers",
        cases,
        "level alpha lies in the alpha-th Γ power of the single-site union",
        witness,
    ));

    if space.values_connected() {
        let b_all = space.build_relation(RelationKind::AllEdge)?;
        let (cb, cd) = (closure_plus(&b_all), closure_plus(&d_all));
        checks.push(Check::new(
            "edge_free_closures_agree",
            1,
            "closures of the edge and free unions coincide",
            space.excess(&cd, &cb).or_else(|| space.excess(&cb, &cd)),
        ));
    } else {
        checks.push(Check::skipped(
            "edge_free_closures_agree",
            "the value relation is not connected",
        ));
    }

    checks.push(Check::new(
        "gamma_collapse",
        1,
        "finite Γ is idempotent after one step",
        space.excess(&gamma_finite(&gamma_d), &gamma_d),
    ));

    if has_core {
        checks.push(Check::skipped("top_level_full", "the set has a perfect core"));
    } else {
        let top = &e_levels[rank];
        checks.push(Check::new(
            "top_level_full",
            1,
            "the level relation at the rank is full",
            space.excess(&space.full(), top),
        ));
    }

    let occupied_inner = if has_core {
        space
            .groups(rank)
            .iter()
            .filter(|(g, _)| g.hi != one())
            .count()
    } else {
        0
    };
    if occupied_inner < 2 {
        checks.push(Check::skipped(
            "separation",
            "needs a perfect core with two occupied non-terminal core gaps",
        ));
    } else if model.tail_mode == TailMode::Open {
        checks.push(Check::skipped(
            "separation",
            format!(
                "open tail; the stabilized relation is {}",
                if gamma_d.is_full() { "full" } else { "not full" }
            ),
        ));
    } else {
        let mut failure = None;
        for tail in 0..space.tail_values().len() {
            if space.slice_full(&gamma_d, tail).is_none() {
                failure = Some(tail);
                break;
            }
        }
        checks.push(match failure {
            Some(t) => Check::failed(
                "separation",
                space.tail_values().len(),
                format!(
                    "tail slice {} of the stabilized relation is full",
                    rational::format(&space.tail_values()[t])
                ),
            ),
            None => Check::new(
                "separation",
                space.tail_values().len(),
                "every tail slice of the stabilized relation is below full",
                None,
            ),
        });
    }

    match space.core_stable() {
        Some(e) if model.tail_mode == TailMode::Immutable => {
            let mut witness = space.excess(&d_all, &e);
            if witness.is_none() {
                witness = space.excess(&closure_plus(&e), &e);
            }
            let full = e.is_full();
            checks.push(if full && occupied_inner >= 2 {
                Check::failed("core_fixed_point", 3, "the boxed core relation is full")
            } else {
                Check::new(
                    "core_fixed_point",
                    3,
                    "boxed core relation contains the single-site union and is transitive",
                    witness,
                )
            });
        }
        Some(_) => checks.push(Check::skipped("core_fixed_point", "open tail")),
        None => checks.push(Check::skipped("core_fixed_point", "the set has no perfect core")),
    }

    let all_pass = checks.iter().all(Check::passed);
    Ok(PropositionReport {
        model: model.clone(),
        states: space.states(),
        values: space.values().iter().map(Value::label).collect(),
        tail_values: space.tail_values().iter().map(rational::format).collect(),
        boundary_convention_used: space.boundary_used(),
        checks,
        all_pass,
    })
}
