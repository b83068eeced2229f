use designforge_graph::{rng_from_seed, BipartiteGraph};
use designforge_vortex::*;
use proptest::prelude::*;
use rand::Rng;

#[test]
fn params_hit_ell_seven_at_n_1024() {
    let n = 1024usize;
    let c = n as f64 / (128.0 * (n as f64).ln());
    let vp = vortex_params(n, c).unwrap();
    assert_eq!(vp.ell, 7);
    assert_eq!(vp.p, 1.0 / 128.0);
    assert!(!vp.degenerate);
}

#[test]
fn params_degenerate_when_threshold_exceeds_half() {
    let vp = vortex_params(64, 20.0).unwrap();
    assert!(20.0 * 64f64.ln() / 64.0 > 0.5);
    assert_eq!((vp.ell, vp.degenerate), (1, true));
}

#[test]
fn params_n64_c2_matches_closed_form() {
    let expected = (64.0 / (2.0 * 64f64.ln())).log2().floor() as u32;
    assert_eq!(expected, 2);
    assert_eq!(vortex_params(64, 2.0).unwrap().ell, expected);
}

#[test]
fn params_default_constant_table() {
    let got: Vec<(u32, bool)> = [64, 128, 256, 512, 1024]
        .iter()
        .map(|&n| {
            let vp = vortex_params(n, DEFAULT_C).unwrap();
            (vp.ell, vp.degenerate)
        })
        .collect();
    assert_eq!(got, vec![(1, true), (1, false), (1, false), (2, false), (3, false)]);
}

#[test]
fn params_reject_bad_input() {
    assert_eq!(vortex_params(3, 1.0), Err(VortexError::TooSmall(3)));
    assert!(matches!(vortex_params(16, 0.0), Err(VortexError::BadConstant(_))));
    assert!(matches!(vortex_params(16, f64::NAN), Err(VortexError::BadConstant(_))));
}

#[test]
fn single_level_is_whole_host() {
    let g = BipartiteGraph::complete(6, 6);
    let v = random_vortex(&g, 1, &mut rng_from_seed(1)).unwrap();
    assert_eq!(v.part(1, 1).edges(), g.edges());
    assert_eq!(v.p(), 1.0);
}

#[test]
fn three_levels_have_seven_parts() {
    assert_eq!(indices(3).len(), 7);
    let sizes: Vec<u32> = (1..=3).map(|i| slots(3, i)).collect();
    assert_eq!(sizes, vec![4, 2, 1]);
    let g = BipartiteGraph::complete(10, 10);
    let v = random_vortex(&g, 3, &mut rng_from_seed(2)).unwrap();
    let parts = v.parts_by_label();
    assert_eq!(parts.len(), 7);
    assert_eq!(parts.iter().map(|h| h.edge_count()).sum::<usize>(), 100);
}

#[test]
fn label_map_round_trips() {
    for ell in 1..=10 {
        let mut seen = vec![false; (1usize << ell) - 1];
        for (i, j) in indices(ell) {
            let l = label_of(ell, i, j);
            assert_eq!(l, (1 << (ell - i)) + j - 1);
            assert_eq!(index_of(ell, l), (i, j));
            assert!(!seen[(l - 1) as usize]);
            seen[(l - 1) as usize] = true;
        }
        assert!(seen.iter().all(|&s| s));
    }
}

#[test]
fn from_labels_validates() {
    let g = BipartiteGraph::complete(2, 2);
    assert!(matches!(
        VortexDecomposition::from_labels(&g, 2, vec![1, 2, 3]),
        Err(VortexError::LabelCount { .. })
    ));
    assert!(matches!(
        VortexDecomposition::from_labels(&g, 2, vec![1, 2, 3, 4]),
        Err(VortexError::LabelRange { label: 4, max: 3 })
    ));
}

#[test]
fn record_serializes_ell_and_labels() {
    let g = BipartiteGraph::complete(3, 3);
    let v = random_vortex(&g, 2, &mut rng_from_seed(3)).unwrap();
    let json = serde_json::to_value(v.record()).unwrap();
    assert_eq!(json["ell"], 2);
    let back: Vec<u32> = serde_json::from_value(json["labels"].clone()).unwrap();
    let rebuilt = VortexDecomposition::from_labels(&g, 2, back).unwrap();
    assert_eq!(rebuilt, v);
}

fn monte_carlo_parts(ell: u32) {
    let g = BipartiteGraph::complete(256, 256);
    let v = random_vortex(&g, ell, &mut rng_from_seed(0x5eed)).unwrap();
    let mut sample_rng = rng_from_seed(77);
    let draws = 10_000usize;
    let mut hits = vec![0usize; v.part_count()];
    for _ in 0..draws {
        let k = sample_rng.gen_range(0..v.edges.len());
        hits[(v.labels[k] - 1) as usize] += 1;
    }
    let p = 1.0 / ((1u64 << ell) - 1) as f64;
    let sigma = (p * (1.0 - p) / draws as f64).sqrt();
    for (l, &h) in hits.iter().enumerate() {
        let freq = h as f64 / draws as f64;
        assert!(
            (freq - p).abs() <= 3.0 * sigma + 1e-12,
            "label {} freq {freq} vs {p}",
            l + 1
        );
    }
}

#[test]
fn part_probability_monte_carlo_n256() {
    let vp = vortex_params(256, DEFAULT_C).unwrap();
    monte_carlo_parts(vp.ell);
    let vp = vortex_params(256, 2.0).unwrap();
    assert_eq!(vp.ell, 4);
    monte_carlo_parts(vp.ell);
}

#[test]
fn label_histogram_chi_square() {
    // 0.99 quantile of chi-square with 6 degrees of freedom.
    const CRIT: f64 = 16.812;
    let g = BipartiteGraph::complete(64, 64);
    let v = random_vortex(&g, 3, &mut rng_from_seed(11)).unwrap();
    let mut counts = [0f64; 7];
    for &l in &v.labels {
        counts[(l - 1) as usize] += 1.0;
    }
    let expect = v.labels.len() as f64 / 7.0;
    let stat: f64 = counts.iter().map(|c| (c - expect).powi(2) / expect).sum();
    assert!(stat < CRIT, "chi-square {stat}");
}

#[test]
fn complete_graph_passes_qr1() {
    for n in [4, 9, 30] {
        for delta in [0.0, 0.1, 0.9] {
            let r = qr_check(
                &BipartiteGraph::complete(n, n),
                delta,
                1.0,
                QrMode::Sampled(4),
                &mut rng_from_seed(0),
            );
            assert!(r.qr1.pass);
            assert_eq!((r.qr1.min_degree, r.qr1.max_degree), (n, n));
        }
    }
}

#[test]
fn isolated_vertex_fails_qr1_with_witness() {
    let mut h = BipartiteGraph::complete(8, 8);
    for b in 0..8 {
        h.remove_edge(3, b);
    }
    let r = qr_check(&h, 0.3, 1.0, QrMode::Exact, &mut rng_from_seed(0));
    assert!(!r.qr1.pass);
    assert!(!r.passed());
    assert_eq!(r.qr1.witness, Some((Side::A, 3, 0)));
    assert!(r.note.contains("calibration"));
}

#[test]
fn exact_falls_back_above_limit() {
    let h = BipartiteGraph::complete(20, 20);
    let r = qr_check(&h, 0.3, 1.0, QrMode::Exact, &mut rng_from_seed(0));
    assert!(matches!(r.mode, QrMode::Sampled(_)));
}

#[test]
fn sampled_mode_finds_two_block_violation() {
    let n = 40;
    let mut h = BipartiteGraph::new(n, n);
    for a in 0..n {
        for b in 0..n {
            if (a < n / 2) == (b < n / 2) {
                h.add_edge(a, b);
            }
        }
    }
    let r = qr_check(&h, 0.3, 0.5, QrMode::Sampled(64), &mut rng_from_seed(5));
    assert!(r.qr1.pass);
    assert!(!r.passed());
    let cx: Vec<_> = r.delta_primes.iter().flat_map(|d| &d.counterexamples).collect();
    assert!(cx.iter().any(|c| c.condition == Condition::Qr2));
    assert!(cx.iter().all(|c| c.recheck(&h, 0.3, 0.5)));
}

#[test]
fn qr1_pass_rate_n512_default_scale() {
    let n = 512;
    let vp = vortex_params(n, DEFAULT_C).unwrap();
    let g = BipartiteGraph::complete(n, n);
    let seeds = 50;
    let mut passes = 0;
    for seed in 0..seeds {
        let mut rng = rng_from_seed(1000 + seed);
        let v = random_vortex(&g, vp.ell, &mut rng).unwrap();
        let ok = v.parts_by_label().iter().all(|h| {
            qr_check(h, DEFAULT_DELTA, v.p(), QrMode::Sampled(0), &mut rng).qr1.pass
        });
        passes += usize::from(ok);
    }
    let rate = passes as f64 / seeds as f64;
    assert!(rate >= 0.95, "QR1 pass rate {rate} at ell {}", vp.ell);
}

/// Brute force over every pair `(X, Y)` for one size threshold `t`.
fn brute(h: &BipartiteGraph, delta: f64, p: f64, t: usize) -> (bool, bool, bool) {
    let n = h.left_count();
    let nf = n as f64;
    let (mut q2, mut q3, mut q4) = (true, true, true);
    for xm in 0u32..(1 << n) {
        let xs: Vec<usize> = (0..n).filter(|&i| xm >> i & 1 == 1).collect();
        for ym in 0u32..(1 << n) {
            let ys: Vec<usize> = (0..n).filter(|&i| ym >> i & 1 == 1).collect();
            let e = xs.iter().flat_map(|&a| ys.iter().map(move |&b| (a, b)))
                .filter(|&(a, b)| h.has_edge(a, b))
                .count() as f64;
            let (sx, sy) = (xs.len(), ys.len());
            if sx >= t && sy >= t && e < (1.0 - delta) * p * (sx * sy) as f64 {
                q2 = false;
            }
            if sx < t && 2 * sx > sy && e > p * nf * sx as f64 / 3.0 {
                q3 = false;
            }
            if sy < t && 2 * sy > sx && e > p * nf * sy as f64 / 3.0 {
                q4 = false;
            }
        }
    }
    (q2, q3, q4)
}

fn arb_graph(max_n: usize) -> impl Strategy<Value = BipartiteGraph> {
    (2..=max_n).prop_flat_map(|n| {
        proptest::collection::vec(any::<bool>(), n * n).prop_map(move |bits| {
            let mut h = BipartiteGraph::new(n, n);
            for (k, &on) in bits.iter().enumerate() {
                if on {
                    h.add_edge(k / n, k % n);
                }
            }
            h
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn exact_mode_agrees_with_brute_force(
        h in arb_graph(5),
        delta in 0.0f64..1.0,
        p in 0.05f64..1.0,
    ) {
        let r = qr_check(&h, delta, p, QrMode::Exact, &mut rng_from_seed(0));
        prop_assert_eq!(r.mode, QrMode::Exact);
        for d in &r.delta_primes {
            prop_assert_eq!((d.qr2, d.qr3, d.qr4), brute(&h, delta, p, d.threshold));
            for c in &d.counterexamples {
                prop_assert!(c.recheck(&h, delta, p));
            }
        }
    }

    #[test]
    fn exact_mode_is_monotone_in_delta(
        h in arb_graph(7),
        d1 in 0.0f64..1.0,
        d2 in 0.0f64..1.0,
        p in 0.05f64..1.0,
    ) {
        let (lo, hi) = if d1 <= d2 { (d1, d2) } else { (d2, d1) };
        let a = qr_check(&h, lo, p, QrMode::Exact, &mut rng_from_seed(0));
        let b = qr_check(&h, hi, p, QrMode::Exact, &mut rng_from_seed(0));
        prop_assert!(!a.passed() || b.passed());
    }

    #[test]
    fn sampled_counterexamples_recheck(h in arb_graph(12), seed in any::<u64>()) {
        let r = qr_check(&h, 0.3, 0.5, QrMode::Sampled(8), &mut rng_from_seed(seed));
        for d in &r.delta_primes {
            for c in &d.counterexamples {
                prop_assert!(c.recheck(&h, 0.3, 0.5));
            }
        }
    }

    #[test]
    fn parts_partition_host(h in arb_graph(9), ell in 1u32..5, seed in any::<u64>()) {
        let v = random_vortex(&h, ell, &mut rng_from_seed(seed)).unwrap();
        let mut union = BipartiteGraph::new(h.left_count(), h.right_count());
        let mut total = 0;
        for (i, j) in indices(ell) {
            let part = v.part(i, j);
            prop_assert!(union.is_edge_disjoint(&part));
            total += part.edge_count();
            union.union_with(&part);
        }
        prop_assert_eq!(total, h.edge_count());
        prop_assert_eq!(union.edges(), h.edges());
        for k in 0..v.edges.len() {
            let (i, j) = v.index_of_edge(k);
            prop_assert_eq!(label_of(ell, i, j), v.labels[k]);
        }
    }
}
