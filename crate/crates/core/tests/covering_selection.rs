mod common;

use std::collections::HashSet;

use common::*;
use proptest::prelude::*;
use strongmax::covering::*;
use strongmax::generators::Generator;
use strongmax::operators::strong_maximal;
use strongmax::verify::random_rects;
use strongmax::weights::{doubling_fit, epsilon_for_weight, generate_weight, DEFAULT_SAFETY};
use strongmax::{Grid, Rect};

fn cell_set(r: &Rect, shape: &[usize]) -> HashSet<Vec<usize>> {
    cells(shape).into_iter().filter(|c| r.contains(c)).collect()
}

/// Last axis tripled around the center, then clipped to the domain.
fn dilated_cells(r: &Rect, shape: &[usize]) -> HashSet<Vec<usize>> {
    let n = shape.len();
    let (a, b) = (r.lo()[n - 1], r.hi()[n - 1]);
    let len = b - a;
    cells(shape)
        .into_iter()
        .filter(|c| {
            (0..n - 1).all(|k| r.lo()[k] <= c[k] as i64 && (c[k] as i64) < r.hi()[k])
                && a - len <= c[n - 1] as i64
                && (c[n - 1] as i64) < b + len
        })
        .collect()
}

/// Re-runs the greedy rule with explicit cell sets and returns the selection.
fn replay(rects: &[Rect], eps: f64, shape: &[usize]) -> Vec<Rect> {
    let n = shape.len();
    let mut order: Vec<(usize, &Rect)> = rects.iter().enumerate().collect();
    order.sort_by_key(|(i, r)| (std::cmp::Reverse(r.hi()[n - 1] - r.lo()[n - 1]), *i));
    let mut union: HashSet<Vec<usize>> = HashSet::new();
    let mut chosen = vec![];
    for (_, s) in order {
        let mine = cell_set(s, shape);
        let hit = mine.iter().filter(|c| union.contains(*c)).count();
        if hit as f64 <= eps * mine.len() as f64 {
            union.extend(dilated_cells(s, shape));
            chosen.push(s.clone());
        } else {
            assert!(hit as f64 > eps * mine.len() as f64);
        }
    }
    chosen
}

fn lognormal(shape: &[usize], seed: u64) -> Grid {
    generate_weight(&Generator::Lognormal { sigma: 0.5, seed }, shape).unwrap()
}

fn calibrated_selection(shape: &[usize], count: usize, seed: u64, w: &Grid) -> Selection {
    let fit = doubling_fit(w, 2000, seed).unwrap();
    let eps = epsilon_for_weight(fit.c, fit.delta, DEFAULT_SAFETY).unwrap();
    greedy_select(&random_rects(shape, count, seed), eps, shape).unwrap()
}

#[test]
fn greedy_matches_replay_oracle() {
    for seed in 0..5 {
        for eps in [0.05, 0.1, 0.3] {
            let rects = random_rects(&[32, 32], 50, seed);
            let sel = greedy_select(&rects, eps, &[32, 32]).unwrap();
            assert_eq!(sel.chosen(), replay(&rects, eps, &[32, 32]).as_slice());
            let rep = check_p2(&sel);
            assert!(rep.passed && rep.worst_ratio <= eps, "{rep:?}");
        }
    }
    let rects = random_rects(&[6, 5, 7], 30, 9);
    let sel = greedy_select(&rects, 0.2, &[6, 5, 7]).unwrap();
    assert_eq!(sel.chosen(), replay(&rects, 0.2, &[6, 5, 7]).as_slice());
}

#[test]
fn trivial_selections() {
    let a = Rect::from_bounds(&[(0, 4), (0, 2)]).unwrap();
    let sel = greedy_select(&[a.clone(), a.clone()], 0.1, &[8, 8]).unwrap();
    assert_eq!(sel.chosen(), std::slice::from_ref(&a));
    let b = Rect::from_bounds(&[(0, 4), (6, 8)]).unwrap();
    let sel = greedy_select(&[a.clone(), b.clone()], 0.1, &[8, 8]).unwrap();
    assert_eq!(sel.len(), 2);
    assert!(greedy_select(std::slice::from_ref(&a), 1.0, &[8, 8]).is_err());
    let bad = Selection::from_parts(&[8, 8], vec![], vec![a.clone(), a], 0.1).unwrap();
    let rep = check_p2(&bad);
    assert!(!rep.passed && rep.worst_ratio > 0.1);
}

#[test]
fn sparse_families_are_sparse_on_every_slice() {
    for seed in 0..10 {
        for eps in [0.05, 0.1] {
            let sel = greedy_select(&random_rects(&[24, 24], 60, 50 + seed), eps, &[24, 24]).unwrap();
            let rep = check_p1_slices(&sel).unwrap();
            assert!(rep.passed, "{rep:?}");
            assert_eq!(rep.violations, 0);
        }
    }
    let sel = greedy_select(&random_rects(&[7, 6, 8], 40, 3), 0.1, &[7, 6, 8]).unwrap();
    assert!(check_p1_slices(&sel).unwrap().passed);
}

#[test]
fn t_and_t_star_are_adjoint() {
    for seed in 0..5 {
        let shape = [20, 16];
        let sel = greedy_select(&random_rects(&shape, 40, seed), 0.2, &shape).unwrap();
        let f = random_grid(&shape, seed + 100, 3.0);
        let g = random_grid(&shape, seed + 200, 3.0);
        let tf = apply_t(&f, &sel).unwrap();
        let tsg = apply_t_star(&g, &sel).unwrap();
        let lhs: f64 = tf.values().iter().zip(g.values()).map(|(a, b)| a * b).sum();
        let rhs: f64 = f.values().iter().zip(tsg.values()).map(|(a, b)| a * b).sum();
        assert!(rel_close(lhs, rhs, 1e-10), "{lhs} vs {rhs}");
    }
}

#[test]
fn t_is_dominated_by_strong_maximal() {
    let shape = [16, 16];
    let f = random_grid(&shape, 7, 5.0);
    let m = strong_maximal(&f, None).unwrap().grid;
    let sel = greedy_select(&random_rects(&shape, 80, 7), 0.3, &shape).unwrap();
    let tf = apply_t(&f, &sel).unwrap();
    for (a, b) in tf.values().iter().zip(m.values()) {
        assert!(*a <= *b * (1.0 + 1e-12));
    }
}

#[test]
fn calibrated_selections_keep_half_the_mass() {
    let shape = [32, 32];
    for wseed in 0..5 {
        let w = lognormal(&shape, wseed);
        for s in 0..2 {
            let sel = calibrated_selection(&shape, 50, 10 * wseed + s, &w);
            let rep = recmass_check(&sel, &w).unwrap();
            assert!(rep.passed, "{rep:?}");
            let tsw = apply_t_star(&w, &sel).unwrap();
            let mw = strong_maximal(&w, None).unwrap().grid;
            let mult = sel.multiplicity();
            let mut upper = vec![0.0; w.len()];
            for r in sel.chosen() {
                let mut s = 0.0;
                r.for_each_cell(&shape, |i| s += w.values()[i]);
                r.for_each_cell(&shape, |i| upper[i] += s / r.cells() as f64);
            }
            for i in 0..w.len() {
                let t = tsw.values()[i];
                assert!(t <= upper[i] * (1.0 + 1e-12) && t >= 0.5 * upper[i] * (1.0 - 1e-12));
                assert!(t <= 2.0 * mw.values()[i] * mult[i] as f64 * (1.0 + 1e-12));
            }
        }
    }
}

#[test]
fn recmass_trivial_families() {
    let w = lognormal(&[8, 8], 1);
    let a = Rect::from_bounds(&[(0, 3), (0, 3)]).unwrap();
    let b = Rect::from_bounds(&[(4, 8), (5, 8)]).unwrap();
    let one = Selection::from_parts(&[8, 8], vec![], vec![a.clone()], 0.1).unwrap();
    let rep = recmass_check(&one, &w).unwrap();
    assert_eq!((rep.min_ratio, rep.max_ratio), (1.0, 1.0));
    let two = Selection::from_parts(&[8, 8], vec![], vec![a, b], 0.1).unwrap();
    assert_eq!(recmass_check(&two, &w).unwrap().min_ratio, 1.0);
    for p in [2.0, 4.0, 8.0] {
        assert!(rel_close(overlap_norm_ratio(&two, &w, p).unwrap(), 1.0, 1e-14));
    }
}

#[test]
fn multiplicity_covers_omega_and_selection_is_idempotent() {
    let shape = [32, 32];
    for seed in 0..10 {
        let sel = greedy_select(&random_rects(&shape, 50, 300 + seed), 0.1, &shape).unwrap();
        let omega = sel.omega();
        let mult = sel.multiplicity();
        for (i, m) in mult.iter().enumerate() {
            assert_eq!(omega.get(i), *m >= 1);
            assert_eq!(omega.get(i), sel.owner_of(i).is_some());
        }
        let again = greedy_select(sel.chosen(), 0.1, &shape).unwrap();
        assert_eq!(again.chosen(), sel.chosen());
        let back = Selection::from_json(&sel.to_json().unwrap()).unwrap();
        assert_eq!(back.chosen(), sel.chosen());
        assert_eq!(back.input(), sel.input());
    }
}

#[test]
fn pieces_partition_omega() {
    let shape = [16, 12];
    let sel = greedy_select(&random_rects(&shape, 40, 4), 0.3, &shape).unwrap();
    let mut seen = vec![0u32; 16 * 12];
    for k in 0..sel.len() {
        let piece = sel.piece(k);
        assert!(piece.count() > 0);
        for (i, s) in seen.iter_mut().enumerate() {
            if piece.get(i) {
                *s += 1;
                assert!(sel.chosen()[k].contains(&strongmax::grid::unravel(&shape, i)));
            }
        }
    }
    for (i, s) in seen.iter().enumerate() {
        assert_eq!(*s, sel.omega().get(i) as u32);
    }
}

#[test]
fn overlap_growth_is_moderate() {
    let shape = [32, 32];
    let w = lognormal(&shape, 2);
    let sel = calibrated_selection(&shape, 50, 2, &w);
    let scaled: Vec<f64> = [2.0, 4.0, 8.0, 16.0].iter().map(|&p| overlap_norm_ratio(&sel, &w, p).unwrap() / p).collect();
    assert!(scaled.iter().all(|&r| r < 3.0 * scaled[0]), "{scaled:?}");
}

#[test]
fn exponential_functional_behaviour() {
    let shape = [32, 32];
    let w = lognormal(&shape, 3);
    let single = Selection::from_parts(&shape, vec![], vec![Rect::from_bounds(&[(3, 20), (5, 9)]).unwrap()], 0.1).unwrap();
    assert_eq!(exp_functional_q(&single, &w, 0.05, 1.0).unwrap(), 0.0);
    let sel = calibrated_selection(&shape, 100, 3, &w);
    let q = ExpFunctional::new(&sel, &w).unwrap();
    let mut last = f64::INFINITY;
    for theta in [0.2, 0.1, 0.05, 0.02, 0.01, 0.001] {
        let v = q.eval(theta, 1.0).unwrap();
        assert!(v.is_finite() && v >= 0.0 && v <= last);
        last = v;
    }
    assert!(exp_functional_q(&sel, &generate_weight(&Generator::Constant { value: 1.0 }, &[8]).unwrap(), 0.1, 1.0).is_err());
}

#[test]
fn cover_ratio_is_at_least_one() {
    let shape = [32, 32];
    let w = lognormal(&shape, 4);
    for seed in 0..10 {
        let sel = calibrated_selection(&shape, 100, seed, &w);
        let c = cover_ratio(&sel, &w).unwrap();
        assert!(c >= 1.0 && c.is_finite());
    }
    let rects = random_rects(&shape, 10, 1);
    let all = Selection::from_parts(&shape, rects.clone(), rects.clone(), 0.1).unwrap();
    assert_eq!(cover_ratio(&all, &w).unwrap(), 1.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn greedy_output_always_sparse(seed in 0u64..100_000, eps in 0.01f64..0.9) {
        let shape = [12, 10];
        let sel = greedy_select(&random_rects(&shape, 30, seed), eps, &shape).unwrap();
        prop_assert!(check_p2(&sel).passed);
        prop_assert!(check_p1_slices(&sel).unwrap().passed);
        prop_assert!(!sel.is_empty());
    }
}
