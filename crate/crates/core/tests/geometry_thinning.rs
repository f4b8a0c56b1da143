use nomanet_core::geometry::{
    contention_radius, csma_thinning, effective_density, nsp_closed, nsp_numeric,
    retention_probability, sample_marked_ppp, sample_ppp, SensingRule,
};
use nomanet_core::netmodel::db_to_linear;
use nomanet_core::{Error, NeighborRule, PointPattern, RngStream, ScenarioConfig};
use proptest::prelude::*;
use rand::RngCore;
use statrs::distribution::{ChiSquared, ContinuousCDF, DiscreteCDF, Poisson};

#[test]
fn ppp_counts_follow_poisson() {
    let (density, w) = (1e-4, 1000.0);
    let mean = density * std::f64::consts::PI * w * w;
    let draws = 10_000;
    let counts: Vec<u64> = (0..draws)
        .map(|i| sample_ppp(density, w, &RngStream::new(11, i)).len() as u64)
        .collect();

    let avg = counts.iter().sum::<u64>() as f64 / draws as f64;
    assert!(
        (avg - mean).abs() < 3.0 * (mean / draws as f64).sqrt(),
        "mean {avg} vs {mean}"
    );

    // Bins [.., 270), [270, 275), …, [355, 360), [360, ..).
    let law = Poisson::new(mean).unwrap();
    let edges: Vec<u64> = (0..=18).map(|i| 270 + 5 * i).collect();
    let mut expected = vec![law.cdf(edges[0] - 1)];
    for w in edges.windows(2) {
        expected.push(law.cdf(w[1] - 1) - law.cdf(w[0] - 1));
    }
    expected.push(1.0 - law.cdf(*edges.last().unwrap() - 1));
    let mut observed = vec![0u64; expected.len()];
    for &c in &counts {
        let bin = edges.iter().take_while(|&&e| e <= c).count();
        observed[bin] += 1;
    }
    let chi2: f64 = observed
        .iter()
        .zip(&expected)
        .map(|(&o, &p)| {
            let e = p * draws as f64;
            (o as f64 - e).powi(2) / e
        })
        .sum();
    let critical = ChiSquared::new((expected.len() - 1) as f64)
        .unwrap()
        .inverse_cdf(0.99);
    assert!(chi2 < critical, "chi2 {chi2} >= {critical}");
}

#[test]
fn vanishing_density_gives_empty_patterns() {
    let empty = (0..200)
        .filter(|&i| sample_ppp(1e-12, 10.0, &RngStream::new(5, i)).is_empty())
        .count();
    assert_eq!(empty, 200);
}

#[test]
fn marks_are_uniform() {
    let mut marks = Vec::new();
    let mut i = 0;
    while marks.len() < 10_000 {
        let p = sample_marked_ppp(1e-3, 60.0, &RngStream::new(3, i));
        marks.extend(p.marks.unwrap());
        i += 1;
    }
    assert!(marks.iter().all(|m| (0.0..=1.0).contains(m)));
    let n = marks.len() as f64;
    let mean = marks.iter().sum::<f64>() / n;
    assert!((mean - 0.5).abs() < 3.0 * (1.0 / 12.0 / n).sqrt());
    marks.sort_by(f64::total_cmp);
    let ks = marks
        .iter()
        .enumerate()
        .map(|(i, &m)| (m - i as f64 / n).abs().max(((i + 1) as f64 / n - m).abs()))
        .fold(0.0, f64::max);
    assert!(ks < 1.628 / n.sqrt(), "KS {ks}");
}

#[test]
fn marked_sampling_is_reproducible() {
    let s = RngStream::new(42, 9);
    assert_eq!(
        sample_marked_ppp(5e-3, 40.0, &s),
        sample_marked_ppp(5e-3, 40.0, &s)
    );
}

#[test]
fn contention_radius_by_hand() {
    let mut cfg = ScenarioConfig::default();
    cfg.sensing.tail_eps = (-4.0f64).exp();
    assert!((contention_radius(&cfg).unwrap() - 2f64.sqrt()).abs() < 1e-12);
    let base = contention_radius(&cfg).unwrap();
    cfg.transmit_snr_f *= 2.0;
    assert!((contention_radius(&cfg).unwrap() / base - 2f64.powf(0.25)).abs() < 1e-12);
    let mut edge = ScenarioConfig::default();
    edge.sensing.tail_eps = (-1.0f64).exp();
    edge.femto.pathloss_exp = 1.0;
    assert!(matches!(
        contention_radius(&edge),
        Err(Error::ContentionRadius(_))
    ));
}

fn nsp_config(tb_db: f64, alpha: f64, rc: f64) -> ScenarioConfig {
    let mut cfg = ScenarioConfig::default();
    cfg.sensing.sense_threshold = db_to_linear(tb_db);
    cfg.femto.pathloss_exp = alpha;
    cfg.sensing.contention_radius = Some(rc);
    cfg
}

#[test]
fn nsp_closed_matches_numeric_grid() {
    for &tb in &[-10.0, -5.0, 0.0, 5.0, 10.0] {
        for &alpha in &[3.0, 3.25, 3.5, 3.75, 4.0] {
            let cfg = nsp_config(tb, alpha, 2.0);
            let c = nsp_closed(&cfg).unwrap();
            let n = nsp_numeric(&cfg).unwrap();
            assert!(
                ((c - n) / n).abs() <= 1e-8,
                "T_B={tb} dB alpha={alpha}: {c} vs {n}"
            );
        }
    }
    let table = ScenarioConfig::default();
    let (c, n) = (nsp_closed(&table).unwrap(), nsp_numeric(&table).unwrap());
    assert!(((c - n) / n).abs() <= 1e-8);
}

#[test]
fn nsp_threshold_limits() {
    let tiny = nsp_numeric(&nsp_config(-80.0, 4.0, 2.0)).unwrap();
    assert!(tiny > 1.0 - 1e-6, "{tiny}");
    let huge = nsp_closed(&nsp_config(60.0, 4.0, 2.0)).unwrap();
    assert!(huge < 1e-6, "{huge}");
}

#[test]
fn retention_examples() {
    let cfg = ScenarioConfig::default();
    let p = retention_probability(&cfg).unwrap();
    assert!(p > 0.0 && p <= 1.0);
    let mut dense = cfg.clone();
    dense.femto.density = 0.1;
    assert!(effective_density(&dense).unwrap() < 0.1);
    let mut sparse = cfg;
    sparse.femto.density = 1e-14;
    assert!((retention_probability(&sparse).unwrap() - 1.0).abs() < 1e-12);
}

fn thinned(cfg: &ScenarioConfig, seed: u64) -> (PointPattern, SensingRule) {
    let stream = RngStream::new(seed, 0);
    let pattern = sample_marked_ppp(cfg.femto.density, 40.0, &RngStream::new(seed, 1));
    let out = csma_thinning(&pattern, cfg, &stream).unwrap();
    let rule = SensingRule::new(cfg, stream.rng().next_u64()).unwrap();
    (out, rule)
}

#[test]
fn no_two_retained_points_are_neighbours() {
    let mut cfg = ScenarioConfig::default();
    cfg.femto.density = 0.1;
    for seed in 0..20 {
        let (out, rule) = thinned(&cfg, seed);
        let kept = out.retained.as_ref().unwrap();
        let marks = out.marks.as_ref().unwrap();
        for i in 0..out.len() {
            for j in 0..out.len() {
                let d = (out.points[i][0] - out.points[j][0])
                    .hypot(out.points[i][1] - out.points[j][1]);
                let linked = rule.are_neighbors(i, j, d);
                assert!(!(kept[i] && kept[j] && linked), "seed {seed}: {i} and {j}");
                // A point is dropped only because of a lower-marked neighbour.
                if linked && kept[i] {
                    assert!(marks[i] < marks[j]);
                }
            }
            if !kept[i] {
                assert!((0..out.len()).any(|j| {
                    let d = (out.points[i][0] - out.points[j][0])
                        .hypot(out.points[i][1] - out.points[j][1]);
                    rule.are_neighbors(i, j, d) && marks[j] < marks[i]
                }));
            }
        }
    }
}

#[test]
fn thinning_is_deterministic_and_a_subset() {
    let mut cfg = ScenarioConfig::default();
    cfg.femto.density = 0.05;
    let (a, _) = thinned(&cfg, 4);
    let (b, _) = thinned(&cfg, 4);
    assert_eq!(a, b);
    assert_eq!(a.retained.as_ref().unwrap().len(), a.len());
    assert!(a.retained_count().unwrap() <= a.len());
}

#[test]
fn isolated_points_are_all_retained() {
    let mut cfg = ScenarioConfig::default();
    cfg.sensing.sense_threshold = 1e12;
    cfg.sensing.contention_radius = Some(2.0);
    let pattern = sample_marked_ppp(0.05, 40.0, &RngStream::new(8, 1));
    let out = csma_thinning(&pattern, &cfg, &RngStream::new(8, 0)).unwrap();
    assert_eq!(out.retained_count(), Some(pattern.len()));
}

#[test]
fn radius_rule_keeps_a_hard_core() {
    let mut cfg = ScenarioConfig::default();
    cfg.femto.density = 0.1;
    cfg.sensing.neighbor_rule = NeighborRule::Radius;
    let rc = contention_radius(&cfg).unwrap();
    let (out, _) = thinned(&cfg, 2);
    let kept: Vec<[f64; 2]> = out
        .points
        .iter()
        .zip(out.retained.as_ref().unwrap())
        .filter(|(_, &k)| k)
        .map(|(p, _)| *p)
        .collect();
    for (i, p) in kept.iter().enumerate() {
        for q in &kept[i + 1..] {
            assert!((p[0] - q[0]).hypot(p[1] - q[1]) >= rc);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn nsp_non_increasing_in_threshold(tb in -20.0f64..20.0, step in 0.01f64..10.0, alpha in 2.5f64..5.0) {
        let lo = nsp_numeric(&nsp_config(tb, alpha, 2.0)).unwrap();
        let hi = nsp_numeric(&nsp_config(tb + step, alpha, 2.0)).unwrap();
        prop_assert!(hi <= lo + 1e-12);
    }

    #[test]
    fn nsp_non_increasing_in_radius(rc in 1.01f64..10.0, step in 0.01f64..5.0, tb in -10.0f64..10.0) {
        let lo = nsp_numeric(&nsp_config(tb, 4.0, rc)).unwrap();
        let hi = nsp_numeric(&nsp_config(tb, 4.0, rc + step)).unwrap();
        prop_assert!(hi <= lo + 1e-12);
    }

    #[test]
    fn nsp_forms_agree(tb in -10.0f64..10.0, alpha in 3.0f64..4.0, rc in 1.2f64..6.0) {
        let cfg = nsp_config(tb, alpha, rc);
        let c = nsp_closed(&cfg).unwrap();
        let n = nsp_numeric(&cfg).unwrap();
        prop_assert!(((c - n) / n).abs() <= 1e-8);
    }

    #[test]
    fn retention_decreasing_in_density(l in 1e-5f64..1.0, factor in 1.01f64..10.0) {
        let mut cfg = ScenarioConfig::default();
        cfg.femto.density = l;
        let a = retention_probability(&cfg).unwrap();
        cfg.femto.density = l * factor;
        let b = retention_probability(&cfg).unwrap();
        prop_assert!(a > 0.0 && a <= 1.0);
        prop_assert!(b < a);
    }
}
