mod common;

use common::*;
use proptest::prelude::*;
use strongmax::generators::Generator;
use strongmax::operators::{composition_maximal, strong_maximal};
use strongmax::verify::*;
use strongmax::weights::{doubling_fit, epsilon_for_weight, generate_weight, DEFAULT_SAFETY};
use strongmax::{Grid, PrefixSum};

fn spike(n: f64, shape: &[usize], cell: Vec<usize>) -> Grid {
    Generator::Spike { height: n, cell: Some(cell), base: 0.0 }.generate(shape).unwrap()
}

#[test]
fn consistency_ladder_is_exact() {
    for seed in 0..6 {
        let f = random_grid(&[9, 7], seed, 20.0);
        let one = Grid::filled(vec![9, 7], 1.0).unwrap();
        for lambda in default_lambdas(&f) {
            let j = jmz_ratio(&f, lambda).unwrap();
            assert_eq!(fs_endpoint_ratio(&f, &one, lambda).unwrap().to_bits(), j.to_bits());
            assert_eq!(weighted_endpoint_ratio(&f, &one, lambda).unwrap().to_bits(), j.to_bits());
        }
    }
}

#[test]
fn jmz_level_set_grows_faster_than_mass() {
    let shape = [256, 256];
    let mut lhs = vec![];
    let mut ratios = vec![];
    for n in [10.0, 100.0, 1000.0] {
        let f = spike(n, &shape, vec![0, 0]);
        let h = EndpointHarness::new(&f, None).unwrap();
        let t = h.terms(1.0).unwrap();
        // the level set of a corner spike is the hyperbolic region below N
        let want = cells(&shape).iter().filter(|c| n / ((c[0] + 1) * (c[1] + 1)) as f64 > 1.0).count() as f64;
        assert_eq!(t.lhs, want);
        lhs.push(t.lhs / n);
        ratios.push(t.ratio().unwrap());
    }
    assert!(lhs[2] > lhs[1] && lhs[1] > lhs[0]);
    let (lo, hi) = ratios.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &r| (a.min(r), b.max(r)));
    assert!(hi / lo < 2.0, "{ratios:?}");
}

#[test]
fn fs_lp_is_scale_free_and_finite() {
    let one = Grid::filled(vec![8, 8], 1.0).unwrap();
    assert_eq!(fs_lp_ratio(&one, &one, 2.0).unwrap(), 1.0);
    for seed in 0..10 {
        let f = random_grid(&[12, 12], seed, 4.0);
        let w = generate_weight(&Generator::Lognormal { sigma: 0.5, seed }, &[12, 12]).unwrap();
        for p in [1.5, 2.0, 4.0] {
            let r = fs_lp_ratio(&f, &w, p).unwrap();
            assert!(r.is_finite() && r > 0.0);
            assert!(rel_close(fs_lp_ratio(&f.scale(7.5).unwrap(), &w, p).unwrap(), r, 1e-12));
        }
    }
}

#[test]
fn opnorm_probe_between_one_and_composition_bound() {
    let w = Grid::filled(vec![16, 16], 1.0).unwrap();
    let trials = opnorm_trials(&[16, 16], 12, 4).unwrap();
    let bound = trials
        .iter()
        .map(|f| lp_ratio(&composition_maximal(f, &[0, 1]).unwrap(), f, &w, 2.0))
        .fold(0.0, f64::max);
    let probe = opnorm_probe(&w, 2.0, 12, 4).unwrap();
    assert!(probe >= 1.0 - 1e-12);
    assert!(probe <= bound * (1.0 + 1e-12), "{probe} > {bound}");
    let lw = generate_weight(&Generator::Lognormal { sigma: 0.5, seed: 1 }, &[12, 12]).unwrap();
    let rep = opnorm_report(&lw, &[1.25, 1.5, 2.0, 4.0], 9, 2).unwrap();
    assert!(rep.series("opnorm").iter().all(|&r| r >= 1.0 - 1e-12));
    assert_eq!(rep.series("reference")[2], 1.0);
}

#[test]
fn young_constants_verify_and_decrease_in_theta() {
    for n in [2, 3] {
        let a = young_constant(0.5, n).unwrap();
        let b = young_constant(1.0, n).unwrap();
        assert_eq!(a.violations, 0);
        assert_eq!(b.violations, 0);
        assert_eq!(a.checked, 100_000_000);
        assert!(a.c >= b.c, "{a:?} {b:?}");
    }
    assert!(young_constant(0.0, 2).is_err());
    assert!(young_constant(1.0, 1).is_err());
}

#[test]
fn sharpness_probe_separates_scales() {
    let rep = sharpness_probe(&[1e2, 1e3, 1e4], &[64, 64], SHARPNESS_LAMBDA).unwrap();
    assert_eq!(rep.passed, Some(true), "{:?}", rep.inputs);
    let lin = rep.series("r_lin");
    assert!(lin.windows(2).all(|w| w[1] > w[0]));
    let below = sharpness_probe(&[10.0], &[8, 8], 20.0).unwrap();
    assert_eq!(below.series("r_log"), vec![0.0]);
}

#[test]
fn witnesses_beat_the_level() {
    for seed in 0..5 {
        let f = random_grid(&[14, 11], seed, 10.0);
        let p = PrefixSum::build(&f);
        for lambda in [2.0, 5.0, 8.0] {
            let wit = extract_witnesses(&f, lambda).unwrap();
            for r in &wit {
                assert!(p.rect_average(r).unwrap() > lambda);
            }
            let m = strong_maximal(&f, None).unwrap().grid;
            for (i, v) in m.values().iter().enumerate() {
                if *v > lambda {
                    let idx = strongmax::grid::unravel(f.shape(), i);
                    assert!(wit.iter().any(|r| r.contains(&idx)));
                }
            }
        }
    }
    let two = Grid::filled(vec![4, 4], 2.0).unwrap();
    assert!(!extract_witnesses(&two, 1.0).unwrap().is_empty());
}

#[test]
fn selection_coverage_stays_inside_level_set() {
    let shape = [24, 24];
    for seed in 0..5 {
        let f = random_grid(&shape, 40 + seed, 1.0).map(|v| v.powi(6) * 50.0).unwrap();
        let w = generate_weight(&Generator::Lognormal { sigma: 0.5, seed }, &shape).unwrap();
        let fit = doubling_fit(&w, 2000, seed).unwrap();
        let eps = epsilon_for_weight(fit.c, fit.delta, DEFAULT_SAFETY).unwrap();
        let run = selection_coverage(&f, &w, 5.0, eps).unwrap().expect("nonempty level set");
        assert!(run.selection.omega().is_subset_of(&run.level_set));
        assert!(run.w_level_set >= run.w_selected);
        assert!(run.constant() >= 1.0 && run.constant().is_finite());
    }
}

fn continuous(l: usize, fx: impl Fn(f64, f64) -> f64) -> Grid {
    let h = 1.0 / l as f64;
    Grid::from_fn(vec![l, l], |i| fx((i[0] as f64 + 0.5) * h, (i[1] as f64 + 0.5) * h))
        .unwrap()
        .with_cell_volume(h * h)
        .unwrap()
}

#[test]
fn endpoint_sup_is_stable_under_refinement() {
    let f = |x: f64, y: f64| 4.0 * (x * y).powf(-0.4);
    let w = |x: f64, y: f64| x.powf(0.3) * (1.0 + y);
    let sup = |l| {
        let fg = continuous(l, f);
        let lambdas: Vec<f64> = (0..17).map(|k| 10f64.powf(-1.0 + 3.0 * k as f64 / 16.0)).collect();
        endpoint_report(&fg, Some(&continuous(l, w)), &lambdas).unwrap().sup_ratio
    };
    let (a, b) = (sup(16), sup(32));
    assert!(a.max(b) / a.min(b) < 2.0, "{a} vs {b}");
}

#[test]
fn reports_serialize() {
    let f = spike(100.0, &[8, 8], vec![3, 3]);
    let w = generate_weight(&Generator::Checkerboard { a: 1.0, b: 2.0 }, &[8, 8]).unwrap();
    let rep = endpoint_report(&f, Some(&w), &default_lambdas(&f)).unwrap();
    assert_eq!(rep.ratios.len(), 17);
    assert_eq!(rep.sup_ratio, rep.ratios.iter().map(|p| p.ratio).fold(0.0, f64::max));
    let back: Report = serde_json::from_str(&rep.to_json().unwrap()).unwrap();
    assert_eq!(back, rep);
    let mut buf = vec![];
    rep.write_csv(&mut buf).unwrap();
    assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 18);
    let hl = hl_fs_endpoint_report(&f, &w, &default_lambdas(&f)).unwrap();
    assert!(hl.sup_ratio.is_finite());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10))]

    #[test]
    fn unit_weight_ladder(seed in 0u64..100_000, lambda in 0.05f64..20.0) {
        let f = random_grid(&[6, 8], seed, 10.0);
        let one = Grid::filled(vec![6, 8], 1.0).unwrap();
        let j = jmz_ratio(&f, lambda).unwrap();
        prop_assert_eq!(fs_endpoint_ratio(&f, &one, lambda).unwrap().to_bits(), j.to_bits());
        prop_assert_eq!(weighted_endpoint_ratio(&f, &one, lambda).unwrap().to_bits(), j.to_bits());
    }

    #[test]
    fn phi_bounds(t in 0.0f64..1e6, n in 2usize..5) {
        let v = phi_n(t, n);
        prop_assert!(v >= t);
        if t <= 1.0 { prop_assert_eq!(v, t); }
    }
}
