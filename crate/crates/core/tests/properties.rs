mod common;

use cpe_workbench::bits::BitMatrix;
use cpe_workbench::compacta::{isolation_cascade, Location, Scheme};
use cpe_workbench::construction::{
    closure_plus, gamma_finite, t_of, CoordinateModel, ProductSpace, RelationKind, TailMode,
};
use cpe_workbench::gamma::{
    cross_validate, gamma_rank_finite, gamma_rank_symbolic, gamma_step_finite,
};
use cpe_workbench::interval_maps::{
    cpe_verdict, entropy_pairs_symbolic, eval_psi, product_verdict, psi_finite, PsiMap,
};
use cpe_workbench::rational::{half, one, q, zero};
use cpe_workbench::shadowing::{
    demo, finite_shadowing_check, independence_from_shadowing, is_pseudo_orbit, shadows, weave,
    GridSystem, ShadowVerdict,
};
use cpe_workbench::shifts::{Cylinder, IeVerdict, Sft};
use cpe_workbench::space::FiniteSpace;
use cpe_workbench::Q;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::*;

fn scheme_from_seed(seed: u64, depth: usize) -> Scheme {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_scheme(&mut rng, &zero(), &one(), depth)
}

fn countable_from_seed(seed: u64) -> Scheme {
    (seed..)
        .map(|s| scheme_from_seed(s, 3))
        .find(|s| !s.has_perfect())
        .expect("countable schemes are common")
}

fn rational_in(lo: &Q, hi: &Q, num: u32) -> Q {
    lo + (hi - lo) * q(num as i64 + 1, 1026)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn generated_schemes_validate(seed in any::<u64>()) {
        prop_assert!(scheme_from_seed(seed, 3).validate().is_ok());
    }

    #[test]
    fn derivative_realizes_inside(seed in any::<u64>(), depth in 1usize..5) {
        let s = scheme_from_seed(seed, 3);
        if let Some(d) = s.derivative() {
            let full = s.realize(depth);
            for x in d.realize(depth) {
                prop_assert!(full.binary_search(&x).is_ok());
            }
        }
    }

    #[test]
    fn rank_is_stable(seed in any::<u64>()) {
        let s = scheme_from_seed(seed, 3);
        let (r, core) = s.cb_rank();
        prop_assert_eq!(s.derivative_n(r), s.derivative_n(r + 1));
        prop_assert_eq!(s.derivative_n(r), core.clone());
        prop_assert_eq!(core.is_none(), !s.has_perfect());
        if let Some(c) = core {
            prop_assert!(c.has_perfect() && c.is_perfect());
        }
    }

    #[test]
    fn gaps_locate_to_themselves(seed in any::<u64>(), k in 1usize..10, num in 0u32..1024) {
        let s = scheme_from_seed(seed, 3);
        for g in s.contiguous_intervals(k) {
            let x = rational_in(&g.lo, &g.hi, num);
            prop_assert_eq!(s.locate(&x).unwrap(), Location::Gap(g.clone()));
        }
    }

    #[test]
    fn cascade_matches_derivatives(seed in any::<u64>()) {
        let s = countable_from_seed(seed);
        let (rank, _) = s.cb_rank();
        for alpha in 0..=rank.min(3) {
            let want = s.derivative_n(alpha).map_or(vec![], |d| d.realize(5));
            prop_assert_eq!(isolation_cascade(&s, alpha, 5), want);
        }
    }
}

fn symmetric_relation(n: usize, bits: &[bool]) -> BitMatrix {
    let mut m = BitMatrix::new(n);
    let mut k = 0;
    for i in 0..n {
        for j in i..n {
            if bits[k % bits.len()] {
                m.set(i, j);
                m.set(j, i);
            }
            k += 1;
        }
    }
    m
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn gamma_step_monotone_and_reflexive(
        n in 3usize..12,
        bits in prop::collection::vec(any::<bool>(), 1..80),
        eps_num in 0i64..4,
    ) {
        let space = FiniteSpace::grid(n);
        let e = symmetric_relation(space.len(), &bits);
        let eps = q(eps_num, n as i64);
        let step = gamma_step_finite(&space, &e, &eps);
        prop_assert!(e.is_subset(&step));
        prop_assert!(BitMatrix::identity(space.len()).is_subset(&step));
    }

    #[test]
    fn exact_gamma_stabilizes_in_one_step(
        n in 3usize..12,
        bits in prop::collection::vec(any::<bool>(), 1..80),
    ) {
        let space = FiniteSpace::grid(n);
        let e = symmetric_relation(space.len(), &bits);
        let (rank, _) = gamma_rank_finite(&space, &e, &zero());
        prop_assert!(rank <= 1);
    }

    #[test]
    fn wide_finite_sets_agree(mask in 1u32..127) {
        // Points on multiples of 1/8: every gap is 1/8 wide, more than 2 eps.
        let ps: Vec<Q> = (1..8).filter(|i| mask >> (i - 1) & 1 == 1).map(|i| q(i, 8)).collect();
        let r = cross_validate(&Scheme::points(ps), 64, &q(1, 32)).unwrap();
        prop_assert!(r.agree());
        prop_assert_eq!(r.symbolic_rank, r.finite_rank);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn psi_fixes_the_set(seed in any::<u64>()) {
        let s = scheme_from_seed(seed, 2);
        let m = PsiMap::new(s.clone());
        for a in s.realize(3) {
            prop_assert_eq!(eval_psi(&m, &a).unwrap(), a);
        }
    }

    #[test]
    fn psi_preserves_gap_closures(seed in any::<u64>(), num in 0u32..1024) {
        let s = scheme_from_seed(seed, 2);
        let m = PsiMap::new(s.clone());
        for g in s.contiguous_intervals(6) {
            prop_assert_eq!(eval_psi(&m, &g.lo).unwrap(), g.lo.clone());
            prop_assert_eq!(eval_psi(&m, &g.hi).unwrap(), g.hi.clone());
            let y = eval_psi(&m, &rational_in(&g.lo, &g.hi, num)).unwrap();
            prop_assert!(g.lo <= y && y <= g.hi);
        }
    }

    #[test]
    fn psi_slope_bound(seed in any::<u64>(), num in 0u32..1024) {
        let s = scheme_from_seed(seed, 2);
        let m = PsiMap::new(s.clone());
        for g in s.contiguous_intervals(6).into_iter().filter(|g| g.lo_in_a) {
            let h = (&g.hi - &g.lo) * q(num as i64 + 1, 1026);
            let y = eval_psi(&m, &(&g.lo + &h)).unwrap();
            let dev = if y > g.lo { &y - &g.lo } else { &g.lo - &y };
            prop_assert!(dev <= h * q(3, 1));
        }
    }

    #[test]
    fn psi_finite_is_psi_of_truncation(seed in any::<u64>(), depth in 1usize..4, num in 0u32..1024) {
        let s = scheme_from_seed(seed, 2);
        let f = psi_finite(&s, depth);
        let truncated = PsiMap::new(Scheme::points(s.realize(depth)));
        let x = rational_in(&zero(), &one(), num);
        prop_assert_eq!(f.eval(&x), eval_psi(&truncated, &x).unwrap());
        for b in &f.breakpoints {
            prop_assert_eq!(f.eval(b), eval_psi(&truncated, b).unwrap());
        }
    }

    #[test]
    fn cpe_iff_gamma_full(seed in any::<u64>(), d in 1usize..5) {
        let s = scheme_from_seed(seed, 3);
        let v = cpe_verdict(&s);
        let (_, fixed) = gamma_rank_symbolic(&entropy_pairs_symbolic(&s));
        prop_assert_eq!(v.is_cpe(), fixed.is_full());
        prop_assert_eq!(product_verdict(&v, d), v);
    }
}

fn cyl(w: &str) -> Cylinder {
    Cylinder::new(w)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn independence_sets_are_hereditary_and_shift_invariant(
        raw in prop::collection::btree_set(0i64..10, 1..6),
        drop in any::<prop::sample::Index>(),
    ) {
        let g = Sft::golden_mean();
        let f: Vec<i64> = raw.into_iter().collect();
        let (u, v) = (cyl("0"), cyl("1"));
        let ind = g.is_independence_set(&f, &u, &v).unwrap();
        let shifted: Vec<i64> = f.iter().map(|x| x + 1).collect();
        prop_assert_eq!(g.is_independence_set(&shifted, &u, &v).unwrap(), ind);
        if ind {
            let mut sub = f.clone();
            sub.remove(drop.index(sub.len()));
            prop_assert!(g.is_independence_set(&sub, &u, &v).unwrap());
        }
    }

    #[test]
    fn positive_verdicts_have_dense_windows(num in 1i64..=8, l_max in 1usize..9) {
        let g = Sft::golden_mean();
        let r = q(num, 8);
        let (u, v) = (cyl("0"), cyl("1"));
        if let IeVerdict::Positive { .. } = g.ie_pair_verdict(&u, &v, &r, l_max).unwrap() {
            for l in 1..=l_max {
                prop_assert!(g.max_independence_density(&u, &v, l).unwrap().density >= r);
            }
        }
    }
}

#[test]
fn full_shifts_have_positive_entropy_and_full_density() {
    for k in [2usize, 3] {
        let s = Sft::full_shift(k);
        assert!((s.entropy(1e-12).unwrap() - (k as f64).ln()).abs() < 1e-9);
        let d = s.max_independence_density(&cyl("0"), &cyl("1"), 8).unwrap();
        assert_eq!(d.density, one());
    }
}

#[test]
fn cycles_have_zero_entropy_and_no_pairs() {
    for k in 1..=6 {
        let s = Sft::cycle(k);
        assert!(s.entropy(1e-12).unwrap().abs() < 1e-9, "cycle {k}");
        let syms: Vec<String> = s.symbols().iter().map(char::to_string).collect();
        for a in &syms {
            for b in syms.iter().filter(|b| *b != a) {
                for gap in 1..=6i64 {
                    assert!(!s.is_independence_set(&[0, gap], &cyl(a), &cyl(b)).unwrap());
                }
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn woven_sequences_are_pseudo_orbits(pattern in prop::collection::vec(prop::bool::ANY, 2..7)) {
        let (sys, inputs) = demo::full_shift_grid(6).unwrap();
        let mut f: Vec<u8> = pattern.iter().map(|&b| if b { 3 } else { 1 }).collect();
        f.push(f[0]);
        let orbit = weave(&sys, &inputs, &f, &demo::delta()).unwrap();
        prop_assert!(is_pseudo_orbit(&sys, &orbit.seq, &demo::delta()));
    }

    #[test]
    fn shadows_survive_prefixes(n in 3usize..9, start in 0usize..9, len in 1usize..8, cut in 1usize..8) {
        let sys = GridSystem::tent_grid(n);
        let seq: Vec<usize> = sys.orbit(start % sys.len(), len);
        let eps = q(1, n as i64);
        for y in 0..sys.len() {
            if shadows(&sys, y, &seq, &eps) {
                prop_assert!(shadows(&sys, y, &seq[..cut.min(seq.len())], &eps));
            }
        }
    }

    #[test]
    fn shadowing_holds_for_shorter_orbits(n in 3usize..8, d in 1i64..3, e in 1i64..4) {
        let sys = GridSystem::tent_grid(n);
        let (eps, delta) = (q(e, n as i64), q(d, 2 * n as i64));
        if let ShadowVerdict::HoldsExhaustive = finite_shadowing_check(&sys, &eps, &delta, 5, 1 << 22, 1).unwrap() {
            for p in 2..5 {
                let v = finite_shadowing_check(&sys, &eps, &delta, p, 1 << 22, 1).unwrap();
                prop_assert_eq!(v, ShadowVerdict::HoldsExhaustive);
            }
        }
    }
}

#[test]
fn verified_independence_is_symbolic_independence() {
    let (sys, inputs) = demo::full_shift_grid(4).unwrap();
    let r = independence_from_shadowing(&sys, &inputs, &demo::eps(), &demo::delta(), 4).unwrap();
    assert!(r.verified);
    // The eps-balls around 0^∞ and 1^∞ are the cylinders [0] and [1].
    let f: Vec<i64> = r.positions.iter().map(|&p| p as i64).collect();
    assert!(Sft::full_shift(2).is_independence_set(&f, &cyl("0"), &cyl("1")).unwrap());
}

fn small_models() -> Vec<CoordinateModel> {
    let mut out = Vec::new();
    let schemes = [
        Scheme::points(vec![q(1, 4), half()]),
        acc_example(),
        Scheme::acc_nest(3, q(1, 4)),
        cantor(),
    ];
    for s in schemes {
        let mut ends = s.left_endpoints(4);
        ends.sort();
        for w in ends.windows(2) {
            for tail in [TailMode::Open, TailMode::Immutable] {
                let m = CoordinateModel::new(s.clone(), w.to_vec(), tail);
                if ProductSpace::new(m.clone()).is_ok() {
                    out.push(m);
                }
            }
        }
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn t_lands_in_the_set(seed in any::<u64>(), k in 1usize..8, j in 0usize..8) {
        let s = scheme_from_seed(seed, 3);
        let gaps = s.contiguous_intervals(k);
        let ends = s.left_endpoints(8);
        let g = &gaps[j % gaps.len()];
        if !g.lo_in_a || !g.hi_in_a || g.lo == zero() {
            return Ok(());
        }
        for c in ends.iter().filter(|c| **c >= g.hi) {
            let t = t_of(&s, g, c).unwrap();
            prop_assert!(g.hi <= t.value);
            prop_assert!(t.boundary || s.contains(&t.value));
        }
    }

    #[test]
    fn box_laws_on_random_relations(
        which in any::<prop::sample::Index>(),
        free in any::<u8>(),
        bits in prop::collection::vec(any::<bool>(), 64),
        bits2 in prop::collection::vec(any::<bool>(), 64),
    ) {
        let models = small_models();
        let space = ProductSpace::new(models[which.index(models.len())].clone()).unwrap();
        let n = space.states();
        let rel = |b: &[bool]| BitMatrix::from_pairs(
            n,
            (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).filter(|&(i, j)| b[(i * 31 + j * 7) % b.len()]),
        );
        let (m1, m2) = (rel(&bits), rel(&bits2));
        let i: Vec<usize> = (0..space.coords()).filter(|c| free >> c & 1 == 1).collect();
        let once = space.box_over(&i, &m1);
        prop_assert_eq!(space.box_over(&i, &once), once.clone());
        prop_assert_eq!(
            space.box_over(&i, &m1.union(&m2)),
            once.union(&space.box_over(&i, &m2))
        );
        let e = space.e_interval(&i);
        prop_assert_eq!(space.box_over(&i, &e), e.clone());
        prop_assert_eq!(closure_plus(&e), e);
    }
}

#[test]
fn single_sites_lie_in_every_level_and_gamma_collapses() {
    for m in small_models() {
        let space = ProductSpace::new(m).unwrap();
        let d = space.build_relation(RelationKind::AllFree).unwrap();
        for alpha in 0..=space.levels().rank() {
            assert!(d.is_subset(&space.e_sets(alpha)));
        }
        let g = gamma_finite(&d);
        assert_eq!(gamma_finite(&g), g);
    }
}
