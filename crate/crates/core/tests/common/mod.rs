#![allow(dead_code)]

use cpe_workbench::compacta::{Scheme, Side};
use cpe_workbench::rational::{half, q};
use cpe_workbench::Q;
use rand::Rng;

/// The accumulation used throughout: `1/2` approached from below by copies
/// of `{1/2}`.
pub fn acc_example() -> Scheme {
    Scheme::acc(half(), Side::Below, q(1, 4), q(1, 4), Scheme::points(vec![half()]))
}

pub fn cantor() -> Scheme {
    Scheme::perfect(q(1, 4), q(3, 4))
}

/// Ten countable schemes of ranks 1 to 3.
pub fn canonical_schemes() -> Vec<Scheme> {
    vec![
        Scheme::points(vec![half()]),
        Scheme::points(vec![q(1, 4), half(), q(3, 4)]),
        Scheme::points(vec![q(1, 8), q(5, 8)]),
        acc_example(),
        Scheme::acc_nest(2, half()),
        Scheme::acc(q(1, 4), Side::Above, q(1, 4), q(1, 8), Scheme::points(vec![half()])),
        Scheme::union(vec![Scheme::points(vec![q(1, 16)]), acc_example()]),
        Scheme::acc_nest(3, q(1, 4)),
        Scheme::acc_nest(3, half()),
        Scheme::union(vec![Scheme::points(vec![q(1, 32)]), Scheme::acc_nest(3, q(1, 4))]),
    ]
}

fn lerp(lo: &Q, hi: &Q, num: i64, den: i64) -> Q {
    lo + (hi - lo) * q(num, den)
}

/// A random valid scheme whose hull lies inside `(lo, hi)`.
pub fn random_scheme<R: Rng>(rng: &mut R, lo: &Q, hi: &Q, depth: usize) -> Scheme {
    let kind = if depth == 0 { rng.gen_range(0..2) } else { rng.gen_range(0..4) };
    match kind {
        0 => {
            let k = rng.gen_range(1..=3);
            let mut slots: Vec<i64> = (1..8).collect();
            let mut ps: Vec<i64> = (0..k).map(|_| slots.remove(rng.gen_range(0..slots.len()))).collect();
            ps.sort();
            Scheme::points(ps.into_iter().map(|i| lerp(lo, hi, i, 8)).collect())
        }
        1 => Scheme::perfect(lerp(lo, hi, 1, 4), lerp(lo, hi, 3, 4)),
        2 => {
            let ratio = [q(1, 4), q(1, 3), half()][rng.gen_range(0..3)].clone();
            let span = hi - lo;
            let body = random_scheme(rng, &q(0, 1), &q(1, 1), depth - 1);
            if rng.gen_bool(0.5) {
                Scheme::acc(lerp(lo, hi, 3, 4), Side::Below, ratio, span / q(4, 1), body)
            } else {
                Scheme::acc(lerp(lo, hi, 1, 4), Side::Above, ratio, span / q(4, 1), body)
            }
        }
        _ => {
            let left = random_scheme(rng, lo, &lerp(lo, hi, 7, 16), depth - 1);
            let right = random_scheme(rng, &lerp(lo, hi, 9, 16), hi, depth - 1);
            Scheme::union(vec![left, right])
        }
    }
}
