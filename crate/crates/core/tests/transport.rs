use fwlab::besov::{BesovParams, LPPartition};
use fwlab::fields::{random_band_limited, seeded_rng};
use fwlab::spectral::*;
use fwlab::transport::*;

fn params() -> BesovParams {
    BesovParams::new(3.0, 2.0, 2.0).unwrap()
}

fn steady(f0: GridFunction, v: GridFunction, f: GridFunction, time: TimeGrid) -> TransportProblem {
    TransportProblem::new(f0, NodeSeries::Constant(v), NodeSeries::Constant(f), time).unwrap()
}

fn shift_error(mode: f64, dt: f64) -> f64 {
    let g = make_grid(256, 1.0).unwrap();
    let f0 = GridFunction::from_fn(&g, |x| (mode * x).sin());
    let time = TimeGrid::covering(1.0, dt);
    let traj = solve_transport(&steady(f0, GridFunction::constant(&g, 1.0), GridFunction::zeros(&g), time)).unwrap();
    g.nodes()
        .zip(traj.last().samples())
        .map(|(x, v)| (v - (mode * (x - 1.0)).sin()).abs())
        .fold(0.0, f64::max)
}

#[test]
fn constant_velocity_shifts_exactly() {
    assert!(shift_error(1.0, 1e-3) <= 1e-8);
}

#[test]
fn fourth_order_in_time() {
    let coarse = shift_error(16.0, 0.01);
    let fine = shift_error(16.0, 0.005);
    assert!(coarse / fine >= 12.0, "{coarse:e} / {fine:e}");
}

#[test]
fn solution_is_linear_in_data() {
    let g = make_grid(128, 2.0).unwrap();
    let mut rng = seeded_rng(4);
    let f0 = random_band_limited(&g, 10, 1.0, &mut rng);
    let g0 = random_band_limited(&g, 10, 1.0, &mut rng);
    let v = random_band_limited(&g, 4, 0.5, &mut rng);
    let z = GridFunction::zeros(&g);
    let time = TimeGrid::covering(0.5, 0.01);
    let solve = |d: GridFunction| solve_transport(&steady(d, v.clone(), z.clone(), time)).unwrap();
    let (a, b) = (1.7, -0.6);
    let combined = solve(f0.scale(a).axpy(b, &g0));
    let separate = solve(f0.clone()).last().scale(a).axpy(b, solve(g0.clone()).last());
    assert!((combined.last() - &separate).max_abs() <= 1e-10);
}

#[test]
fn mean_conserved_by_uniform_velocity() {
    let g = make_grid(128, 8.0).unwrap();
    let f0 = random_band_limited(&g, 20, 1.0, &mut seeded_rng(8));
    let traj = solve_transport(&steady(
        f0.clone(),
        GridFunction::constant(&g, -0.7),
        GridFunction::zeros(&g),
        TimeGrid::covering(1.0, 0.01),
    ))
    .unwrap();
    assert!(traj.states().iter().all(|f| (f.mean() - f0.mean()).abs() <= 1e-12));
}

#[test]
fn v_profile_starts_at_zero_and_grows() {
    let g = make_grid(64, 1.0).unwrap();
    let part = LPPartition::new(&g);
    let v = GridFunction::from_fn(&g, f64::sin);
    let traj = solve_transport(&steady(
        GridFunction::from_fn(&g, f64::cos),
        v,
        GridFunction::zeros(&g),
        TimeGrid::covering(0.5, 0.01),
    ))
    .unwrap();
    let prof = traj.v_profile(&part, &params()).unwrap();
    assert_eq!(prof[0], 0.0);
    assert!(prof.windows(2).all(|w| w[1] >= w[0]));
    assert_eq!(traj.states()[0].samples(), traj.problem().initial.samples());
}

#[test]
fn zero_velocity_family_fits_unit_constant() {
    let g = make_grid(128, 8.0).unwrap();
    let part = LPPartition::new(&g);
    let mut rng = seeded_rng(12);
    let time = TimeGrid::covering(1.0, 0.02);
    let problems: Vec<_> = (0..6)
        .map(|_| {
            let f0 = random_band_limited(&g, 12, 1.0, &mut rng);
            let f = random_band_limited(&g, 12, 0.5, &mut rng);
            steady(f0, GridFunction::zeros(&g), f, time)
        })
        .collect();
    for p in &problems {
        let rep = verify_transport_estimate(&solve_transport(p).unwrap(), &part, &params(), 1.0).unwrap();
        assert!(rep.all_hold());
    }
    let c = fit_transport_constant(&problems, &part, &params()).unwrap();
    assert!(c <= 1.0 + 1e-3, "{c}");
}

#[test]
fn sine_velocity_needs_finite_constant() {
    let g = make_grid(256, 8.0).unwrap();
    let part = LPPartition::new(&g);
    let f0 = random_band_limited(&g, 16, 1.0, &mut seeded_rng(2));
    let p = steady(
        f0,
        GridFunction::from_fn(&g, f64::sin),
        GridFunction::zeros(&g),
        TimeGrid::covering(1.0, 0.01),
    );
    let c = fit_transport_constant(std::slice::from_ref(&p), &part, &params()).unwrap();
    assert!(c.is_finite() && c > 0.0);
    let rep = verify_transport_estimate(&solve_transport(&p).unwrap(), &part, &params(), c).unwrap();
    assert!(rep.all_hold());
    assert!(rep.max_violation_ratio <= 1.0 + 1e-12);
}

#[test]
fn calibrated_constant_survives_held_out_family() {
    let g = make_grid(256, 8.0).unwrap();
    let part = LPPartition::new(&g);
    let mut rng = seeded_rng(77);
    let train = random_transport_family(&g, 10, &mut rng);
    let test = random_transport_family(&g, 10, &mut rng);
    let c = fit_transport_constant(&train, &part, &params()).unwrap();
    assert!(c.is_finite());
    for p in &test {
        let rep = verify_transport_estimate(&solve_transport(p).unwrap(), &part, &params(), c).unwrap();
        assert_eq!(rep.violations(), 0);
    }
}

#[test]
fn blow_up_is_reported_with_its_node() {
    let g = make_grid(32, 1.0).unwrap();
    let f0 = GridFunction::from_fn(&g, f64::sin);
    let huge = GridFunction::constant(&g, f64::MAX);
    let p = steady(f0, GridFunction::zeros(&g), huge, TimeGrid::new(1.0, 3));
    match solve_transport(&p) {
        Err(TransportError::NonFinite { node, .. }) => assert_eq!(node, 1),
        other => panic!("expected a non-finite report, got {other:?}"),
    }
}
