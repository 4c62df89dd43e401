use fwlab::besov::*;
use fwlab::fields::{random_band_limited, seeded_rng};
use fwlab::spectral::*;
use proptest::prelude::*;

fn setup(n: usize, l: f64) -> (Grid, LPPartition) {
    let g = make_grid(n, l).unwrap();
    let part = build_partition(&g);
    (g, part)
}

fn random(g: &Grid, seed: u64) -> GridFunction {
    random_band_limited(g, g.len() / 2 - 1, 1.0, &mut seeded_rng(seed))
}

#[test]
fn partition_identity_on_many_grids() {
    for n in [16, 128, 256, 1024] {
        for l in [1.0, 2.0, 8.0] {
            let (_, part) = setup(n, l);
            assert!(part.telescoping_residual() <= 1e-12, "N = {n}, L = {l}");
        }
    }
}

#[test]
fn rings_above_q_max_vanish() {
    let (g, part) = setup(256, 8.0);
    let q_next = part.q_max() + 1;
    let scale = 2f64.powi(-q_next);
    assert!(g.wavenumbers().iter().all(|&xi| phi(scale * xi) == 0.0));
    assert!(part.block_mask(q_next).is_none());
}

#[test]
fn low_cutoff_telescopes() {
    let (g, part) = setup(128, 2.0);
    let f = random(&g, 3);
    for q in 0..=part.q_max() {
        let mut sum = low_cutoff(&part, &f, 0).unwrap();
        for k in 0..q {
            sum = &sum + &dyadic_block(&part, &f, k).unwrap();
        }
        let direct = low_cutoff(&part, &f, q as u32).unwrap();
        let err = (&sum - &direct).max_abs();
        assert!(err < 1e-12, "q = {q}: {err}");
    }
}

#[test]
fn block_l2_bound_and_reported_lp_constant() {
    let (g, part) = setup(256, 8.0);
    let mut k_max = 0.0f64;
    for seed in 0..10 {
        let f = random(&g, seed);
        assert!(block_bound_ratio(&part, &f, 2.0).unwrap() <= 1.0 + 1e-10);
        for p in [1.0, 4.0, f64::INFINITY] {
            k_max = k_max.max(block_bound_ratio(&part, &f, p).unwrap());
        }
    }
    println!("empirical block L^p constant K = {k_max:.4}");
    assert!(k_max.is_finite() && k_max < 4.0);
}

#[test]
fn mollifier_converges_monotonically() {
    let (g, _) = setup(256, 8.0);
    let f = random_band_limited(&g, 12, 1.0, &mut seeded_rng(5));
    for p in [1.0, 2.0, f64::INFINITY] {
        let errs: Vec<f64> = [0.4, 0.2, 0.1, 0.05]
            .iter()
            .map(|&e| lp_norm(&(&mollify(&f, &MollifierKernel::new(e).unwrap()).unwrap() - &f), p).unwrap())
            .collect();
        assert!(errs.windows(2).all(|w| w[1] <= w[0]), "p = {p}: {errs:?}");
    }
}

#[test]
fn mollifier_rejects_wide_kernels() {
    let (g, _) = setup(64, 1.0);
    let f = GridFunction::zeros(&g);
    assert!(MollifierKernel::new(0.0).is_err());
    assert!(mollify(&f, &MollifierKernel::new(4.0).unwrap()).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn scaling(seed in 0u64..500, c in -4.0f64..4.0, s in 0.5f64..4.0) {
        let (g, part) = setup(64, 2.0);
        let f = random(&g, seed);
        for (p, r) in [(2.0, 2.0), (1.0, 3.0), (f64::INFINITY, 1.0), (4.0, f64::INFINITY)] {
            let params = BesovParams::new(s, p, r).unwrap();
            let a = besov_norm(&part, &f.scale(c), &params).unwrap();
            let b = c.abs() * besov_norm(&part, &f, &params).unwrap();
            prop_assert!((a - b).abs() <= 1e-12 * b.max(1.0));
        }
    }

    #[test]
    fn besov_triangle_inequality(seed in 0u64..500) {
        let (g, part) = setup(64, 1.0);
        let f = random(&g, seed);
        let h = random(&g, seed + 1000);
        let params = BesovParams::new(2.0, 3.0, 2.0).unwrap();
        let sum = besov_norm(&part, &(&f + &h), &params).unwrap();
        let bound = besov_norm(&part, &f, &params).unwrap() + besov_norm(&part, &h, &params).unwrap();
        prop_assert!(sum <= bound * (1.0 + 1e-12));
    }

    #[test]
    fn embeddings_hold(seed in 0u64..500) {
        let (g, part) = setup(128, 2.0);
        let f = random(&g, seed);
        let from = BesovParams::new(3.0, 2.0, 1.0).unwrap();
        prop_assert!(embedding_ratio(&part, &f, &from, 2.0, 2.0).unwrap() <= 1.0 + 1e-12);
        prop_assert!(embedding_ratio(&part, &f, &from, 2.0, f64::INFINITY).unwrap() <= 1.0 + 1e-12);
    }
}

#[test]
fn multiplier_bound_for_lambda_inv_dx() {
    let (g, part) = setup(256, 8.0);
    let params = BesovParams::new(3.0, 2.0, 2.0).unwrap();
    for seed in 0..5 {
        let ratio = check_multiplier_bound(&part, &random(&g, seed), &params).unwrap();
        assert!(ratio.is_finite() && ratio > 0.0);
    }
}

#[test]
fn product_estimate_holds_for_random_pairs() {
    let (g, part) = setup(128, 2.0);
    let params = BesovParams::new(3.0, 2.0, 2.0).unwrap();
    for seed in 0..5 {
        let ratio = check_product_estimate(&part, &random(&g, seed), &random(&g, seed + 50), &params).unwrap();
        assert!(ratio.is_finite() && ratio > 0.0, "seed {seed}: {ratio}");
    }
}
