//! Dense square boolean matrices over `u64` words.

use std::fmt;

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitMatrix {
    n: usize,
    words: usize,
    data: Vec<u64>,
}

impl fmt::Debug for BitMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitMatrix({}x{}, {} pairs)", self.n, self.n, self.count())
    }
}

impl BitMatrix {
    pub fn new(n: usize) -> Self {
        let words = n.div_ceil(64);
        BitMatrix {
            n,
            words,
            data: vec![0; n * words],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::new(n);
        for i in 0..n {
            m.set(i, i);
        }
        m
    }

    pub fn full(n: usize) -> Self {
        let mut m = Self::new(n);
        for i in 0..n {
            m.fill_row(i);
        }
        m
    }

    pub fn from_pairs(n: usize, pairs: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let mut m = Self::new(n);
        for (i, j) in pairs {
            m.set(i, j);
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> bool {
        self.data[i * self.words + j / 64] >> (j % 64) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize) {
        self.data[i * self.words + j / 64] |= 1 << (j % 64);
    }

    pub fn row(&self, i: usize) -> &[u64] {
        &self.data[i * self.words..(i + 1) * self.words]
    }

    fn row_mut(&mut self, i: usize) -> &mut [u64] {
        &mut self.data[i * self.words..(i + 1) * self.words]
    }

    fn fill_row(&mut self, i: usize) {
        let n = self.n;
        let row = self.row_mut(i);
        row.fill(!0);
        if !n.is_multiple_of(64) {
            *row.last_mut().expect("n > 0") = (1u64 << (n % 64)) - 1;
        }
    }

    /// `row(dst) |= src`.
    pub fn or_into(&mut self, dst: usize, src: &[u64]) {
        for (d, s) in self.row_mut(dst).iter_mut().zip(src) {
            *d |= s;
        }
    }

    pub fn row_ones(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        ones(self.row(i))
    }

    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n).flat_map(move |i| self.row_ones(i).map(move |j| (i, j)))
    }

    pub fn count(&self) -> usize {
        self.data.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_full(&self) -> bool {
        self.count() == self.n * self.n
    }

    pub fn union_with(&mut self, other: &BitMatrix) {
        assert_eq!(self.n, other.n);
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a |= b;
        }
    }

    pub fn union(&self, other: &BitMatrix) -> BitMatrix {
        let mut m = self.clone();
        m.union_with(other);
        m
    }

    pub fn is_subset(&self, other: &BitMatrix) -> bool {
        self.n == other.n && self.data.iter().zip(&other.data).all(|(a, b)| a & !b == 0)
    }

    pub fn transpose(&self) -> BitMatrix {
        let mut t = Self::new(self.n);
        for (i, j) in self.pairs() {
            t.set(j, i);
        }
        t
    }

    pub fn is_symmetric(&self) -> bool {
        *self == self.transpose()
    }

    /// Boolean product `self · other`.
    pub fn mul(&self, other: &BitMatrix) -> BitMatrix {
        assert_eq!(self.n, other.n);
        let mut out = Self::new(self.n);
        for i in 0..self.n {
            for k in self.row_ones(i).collect::<Vec<_>>() {
                out.or_into(i, other.row(k));
            }
        }
        out
    }

    /// Transitive closure `R⁺` (paths of length at least one).
    pub fn transitive_closure(&self) -> BitMatrix {
        if self.is_symmetric() {
            self.symmetric_closure()
        } else {
            self.warshall()
        }
    }

    fn symmetric_closure(&self) -> BitMatrix {
        let mut comp = vec![usize::MAX; self.n];
        let mut masks: Vec<Vec<u64>> = Vec::new();
        for s in 0..self.n {
            if comp[s] != usize::MAX || self.row_ones(s).next().is_none() {
                continue;
            }
            let id = masks.len();
            let mut mask = vec![0u64; self.words];
            let mut stack = vec![s];
            comp[s] = id;
            while let Some(u) = stack.pop() {
                mask[u / 64] |= 1 << (u % 64);
                for v in self.row_ones(u) {
                    if comp[v] == usize::MAX {
                        comp[v] = id;
                        stack.push(v);
                    }
                }
            }
            masks.push(mask);
        }
        let mut out = Self::new(self.n);
        for (u, &c) in comp.iter().enumerate() {
            if c != usize::MAX {
                out.or_into(u, &masks[c]);
            }
        }
        out
    }

    fn warshall(&self) -> BitMatrix {
        let mut m = self.clone();
        for k in 0..self.n {
            let rk = m.row(k).to_vec();
            for i in 0..self.n {
                if m.get(i, k) {
                    m.or_into(i, &rk);
                }
            }
        }
        m
    }
}

fn ones(words: &[u64]) -> impl Iterator<Item = usize> + '_ {
    words.iter().enumerate().flat_map(|(w, &bits)| {
        let mut b = bits;
        std::iter::from_fn(move || {
            if b == 0 {
                return None;
            }
            let t = b.trailing_zeros() as usize;
            b &= b - 1;
            Some(w * 64 + t)
        })
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive_closure(m: &BitMatrix) -> BitMatrix {
        let n = m.dim();
        let mut r = vec![vec![false; n]; n];
        for (i, j) in m.pairs() {
            r[i][j] = true;
        }
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    r[i][j] = r[i][j] || (r[i][k] && r[k][j]);
                }
            }
        }
        let mut out = BitMatrix::new(n);
        for i in 0..n {
            for j in 0..n {
                if r[i][j] {
                    out.set(i, j);
                }
            }
        }
        out
    }

    #[test]
    fn closures_match_floyd_warshall() {
        let chain = BitMatrix::from_pairs(70, (0..69).flat_map(|i| [(i, i + 1), (i + 1, i)]));
        assert_eq!(chain.transitive_closure(), naive_closure(&chain));
        let dag = BitMatrix::from_pairs(5, [(0, 1), (1, 2), (3, 4)]);
        assert_eq!(dag.transitive_closure(), naive_closure(&dag));
        let cyc = BitMatrix::from_pairs(3, [(0, 1), (1, 2), (2, 0)]);
        assert!(cyc.transitive_closure().is_full());
    }

    #[test]
    fn basics() {
        let f = BitMatrix::full(65);
        assert_eq!(f.count(), 65 * 65);
        assert!(BitMatrix::identity(65).is_subset(&f));
        let m = BitMatrix::from_pairs(3, [(0, 1)]);
        assert_eq!(m.mul(&BitMatrix::from_pairs(3, [(1, 2)])), BitMatrix::from_pairs(3, [(0, 2)]));
        assert!(!m.is_symmetric());
        assert_eq!(m.transpose(), BitMatrix::from_pairs(3, [(1, 0)]));
    }
}
