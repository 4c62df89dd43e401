//! Linear transport `∂t f + v ∂x f = F` with prescribed velocity and
//! forcing, and an empirical check of its Besov a priori estimate
//!
//! ```text
//! ‖f(t)‖ ≤ e^{C V(t)} ( ‖f₀‖ + C ∫₀ᵗ e^{−C V(τ)} ‖F(τ)‖ dτ ),   V(t) = ∫₀ᵗ ‖∂x v‖_{B^{s−1}}
//! ```

use std::sync::Arc;

use rayon::prelude::*;
use thiserror::Error;

use crate::besov::{besov_norm, BesovError, BesovParams, LPPartition};
use crate::fields::random_band_limited;
use crate::spectral::{dealias, derivative, Grid, GridFunction};

/// Relative slack when comparing the two sides of an estimate.
pub const ESTIMATE_SLACK: f64 = 1e-12;
/// Largest constant tried by [`fit_transport_constant`].
pub const CALIBRATION_CAP: f64 = 1e6;
/// Relative bisection tolerance for fitted constants.
pub const CALIBRATION_TOL: f64 = 1e-3;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TransportError {
    #[error("time step {dt} exceeds the advective bound 0.5·dx/max|v| = {limit}")]
    Unstable { dt: f64, limit: f64 },
    #[error("non-finite values at time node {node} (t = {t})")]
    NonFinite { node: usize, t: f64 },
    #[error("inconsistent problem: {0}")]
    Inconsistent(String),
    #[error("exponents outside the transport estimate's range: {0}")]
    Inadmissible(String),
    #[error("trajectory has {actual} states, expected {expected}")]
    Incomplete { expected: usize, actual: usize },
    #[error("cannot calibrate on an empty problem family")]
    EmptyFamily,
    #[error("no constant up to {cap} satisfies the estimate")]
    CalibrationFailed { cap: f64 },
    #[error(transparent)]
    Besov(#[from] BesovError),
}

/// Uniform time nodes `t_i = i·dt`, `i = 0..=steps`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    dt: f64,
    steps: usize,
}

impl TimeGrid {
    pub fn new(dt: f64, steps: usize) -> Self {
        assert!(dt > 0.0 && dt.is_finite(), "time step must be positive");
        TimeGrid { dt, steps }
    }

    /// Smallest uniform grid reaching `t_end` with step at most `dt_max`.
    pub fn covering(t_end: f64, dt_max: f64) -> Self {
        assert!(t_end > 0.0 && dt_max > 0.0, "time span and step must be positive");
        let steps = ((t_end / dt_max) - 1e-9).ceil().max(1.0) as usize;
        TimeGrid {
            dt: t_end / steps as f64,
            steps,
        }
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn nodes(&self) -> usize {
        self.steps + 1
    }

    pub fn t(&self, i: usize) -> f64 {
        i as f64 * self.dt
    }

    pub fn t_end(&self) -> f64 {
        self.t(self.steps)
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.nodes()).map(|i| self.t(i)).collect()
    }
}

/// A field prescribed at every time node.
#[derive(Debug, Clone)]
pub enum NodeSeries {
    Constant(GridFunction),
    Nodes(Vec<GridFunction>),
}

impl NodeSeries {
    pub fn at(&self, i: usize) -> &GridFunction {
        match self {
            NodeSeries::Constant(f) => f,
            NodeSeries::Nodes(v) => &v[i],
        }
    }

    /// Linear interpolation halfway between nodes `i` and `i + 1`.
    pub fn midpoint(&self, i: usize) -> GridFunction {
        match self {
            NodeSeries::Constant(f) => f.clone(),
            NodeSeries::Nodes(v) => (&v[i] + &v[i + 1]).scale(0.5),
        }
    }

    fn len(&self) -> Option<usize> {
        match self {
            NodeSeries::Constant(_) => None,
            NodeSeries::Nodes(v) => Some(v.len()),
        }
    }

    fn iter(&self, nodes: usize) -> impl Iterator<Item = &GridFunction> + '_ {
        (0..nodes).map(move |i| self.at(i))
    }
}

#[derive(Debug, Clone)]
pub struct TransportProblem {
    pub initial: GridFunction,
    pub velocity: NodeSeries,
    pub forcing: NodeSeries,
    pub time: TimeGrid,
}

impl TransportProblem {
    pub fn new(
        initial: GridFunction,
        velocity: NodeSeries,
        forcing: NodeSeries,
        time: TimeGrid,
    ) -> Result<Self, TransportError> {
        for (name, series) in [("velocity", &velocity), ("forcing", &forcing)] {
            if let Some(len) = series.len() {
                if len != time.nodes() {
                    return Err(TransportError::Inconsistent(format!(
                        "{name} has {len} nodes, time grid has {}",
                        time.nodes()
                    )));
                }
            }
            if series.iter(time.nodes()).any(|f| f.grid() != initial.grid()) {
                return Err(TransportError::Inconsistent(format!("{name} lives on another grid")));
            }
        }
        Ok(TransportProblem {
            initial,
            velocity,
            forcing,
            time,
        })
    }

    pub fn max_speed(&self) -> f64 {
        self.velocity.iter(self.time.nodes()).fold(0.0, |m, v| m.max(v.max_abs()))
    }
}

#[derive(Debug, Clone)]
pub struct TransportTrajectory {
    problem: Arc<TransportProblem>,
    states: Vec<GridFunction>,
}

impl TransportTrajectory {
    pub fn problem(&self) -> &TransportProblem {
        &self.problem
    }

    pub fn states(&self) -> &[GridFunction] {
        &self.states
    }

    pub fn into_states(self) -> Vec<GridFunction> {
        self.states
    }

    pub fn last(&self) -> &GridFunction {
        self.states.last().expect("trajectory holds the initial state")
    }

    /// `V(t_i) = ∫₀^{t_i} ‖∂x v‖_{B^{s−1}_{p,r}}` by the trapezoidal rule.
    pub fn v_profile(&self, part: &LPPartition, params: &BesovParams) -> Result<Vec<f64>, TransportError> {
        let lower = params.shifted(-1.0);
        let rates = self
            .problem
            .velocity
            .iter(self.problem.time.nodes())
            .map(|v| besov_norm(part, &derivative(v), &lower))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(cumulative_trapezoid(&rates, self.problem.time.dt()))
    }
}

pub(crate) fn cumulative_trapezoid(values: &[f64], dt: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(values.len());
    let mut acc = 0.0;
    out.push(0.0);
    for w in values.windows(2) {
        acc += 0.5 * dt * (w[0] + w[1]);
        out.push(acc);
    }
    out
}

fn transport_rhs(f: &GridFunction, velocity: &GridFunction, forcing: &GridFunction) -> GridFunction {
    if velocity.is_zero() {
        return forcing.clone();
    }
    let advection = dealias(&velocity.pointwise_mul(&derivative(f)));
    forcing - &advection
}

/// Classical RK4 for `df/dt = −dealias(v ∂x f) + F`; `v` and `F` are
/// interpolated linearly at half steps.
pub fn solve_transport(problem: &TransportProblem) -> Result<TransportTrajectory, TransportError> {
    let time = problem.time;
    let dt = time.dt();
    let speed = problem.max_speed();
    if speed > 0.0 {
        let limit = 0.5 * problem.initial.grid().dx() / speed;
        if dt > limit {
            return Err(TransportError::Unstable { dt, limit });
        }
    }
    let mut states = Vec::with_capacity(time.nodes());
    states.push(problem.initial.clone());
    for i in 0..time.steps() {
        let f = &states[i];
        let (v0, f0) = (problem.velocity.at(i), problem.forcing.at(i));
        let (v1, f1) = (problem.velocity.at(i + 1), problem.forcing.at(i + 1));
        let (vh, fh) = (problem.velocity.midpoint(i), problem.forcing.midpoint(i));

        let k1 = transport_rhs(f, v0, f0);
        let k2 = transport_rhs(&f.axpy(0.5 * dt, &k1), &vh, &fh);
        let k3 = transport_rhs(&f.axpy(0.5 * dt, &k2), &vh, &fh);
        let k4 = transport_rhs(&f.axpy(dt, &k3), v1, f1);
        let incr = k1.axpy(2.0, &k2).axpy(2.0, &k3).axpy(1.0, &k4);
        let next = f.axpy(dt / 6.0, &incr);
        if !next.is_finite() {
            return Err(TransportError::NonFinite {
                node: i + 1,
                t: time.t(i + 1),
            });
        }
        states.push(next);
    }
    Ok(TransportTrajectory {
        problem: Arc::new(problem.clone()),
        states,
    })
}

/// Per-node norms entering the transport estimate, precomputed once so the
/// estimate can be evaluated for many constants.
#[derive(Debug, Clone)]
pub struct EstimateProfile {
    pub times: Vec<f64>,
    pub solution_norms: Vec<f64>,
    pub forcing_norms: Vec<f64>,
    pub v_profile: Vec<f64>,
    pub dt: f64,
}

#[derive(Debug, Clone)]
pub struct EstimateReport {
    pub lhs: Vec<f64>,
    pub rhs: Vec<f64>,
    pub holds: Vec<bool>,
    pub max_violation_ratio: f64,
}

impl EstimateReport {
    pub fn all_hold(&self) -> bool {
        self.holds.iter().all(|&h| h)
    }

    pub fn violations(&self) -> usize {
        self.holds.iter().filter(|&&h| !h).count()
    }
}

impl EstimateProfile {
    pub fn new(traj: &TransportTrajectory, part: &LPPartition, params: &BesovParams) -> Result<Self, TransportError> {
        params.check_transport().map_err(TransportError::Inadmissible)?;
        let time = traj.problem.time;
        if traj.states.len() != time.nodes() {
            return Err(TransportError::Incomplete {
                expected: time.nodes(),
                actual: traj.states.len(),
            });
        }
        let solution_norms = traj
            .states
            .iter()
            .map(|f| besov_norm(part, f, params))
            .collect::<Result<Vec<_>, _>>()?;
        let forcing_norms = traj
            .problem
            .forcing
            .iter(time.nodes())
            .map(|f| besov_norm(part, f, params))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(EstimateProfile {
            times: time.times(),
            solution_norms,
            forcing_norms,
            v_profile: traj.v_profile(part, params)?,
            dt: time.dt(),
        })
    }

    /// Both sides at every node for constant `c`. The forcing integral uses
    /// the trapezoidal rule on the solver's nodes, accumulated as
    /// `A_{i+1} = e^{c(V_{i+1}−V_i)} A_i + dt/2 (e^{c(V_{i+1}−V_i)} ‖F_i‖ + ‖F_{i+1}‖)`.
    pub fn evaluate(&self, c: f64) -> EstimateReport {
        let n = self.times.len();
        let mut rhs = Vec::with_capacity(n);
        let initial = self.solution_norms[0];
        let mut acc = 0.0;
        for i in 0..n {
            if i > 0 {
                let growth = (c * (self.v_profile[i] - self.v_profile[i - 1])).exp();
                acc = times(growth, acc) + 0.5 * self.dt * (times(growth, self.forcing_norms[i - 1]) + self.forcing_norms[i]);
            }
            rhs.push(times((c * self.v_profile[i]).exp(), initial) + times(c, acc));
        }
        let lhs = self.solution_norms.clone();
        let holds: Vec<bool> = lhs
            .iter()
            .zip(&rhs)
            .map(|(l, r)| *l <= r * (1.0 + ESTIMATE_SLACK))
            .collect();
        let max_violation_ratio = lhs
            .iter()
            .zip(&rhs)
            .map(|(l, r)| if *r > 0.0 { l / r } else if *l > 0.0 { f64::INFINITY } else { 1.0 })
            .fold(0.0, f64::max);
        EstimateReport {
            lhs,
            rhs,
            holds,
            max_violation_ratio,
        }
    }
}

/// Product with `0 · ∞ = 0`, so overflowing exponentials stay harmless.
fn times(a: f64, b: f64) -> f64 {
    if a == 0.0 || b == 0.0 {
        0.0
    } else {
        a * b
    }
}

pub fn verify_transport_estimate(
    traj: &TransportTrajectory,
    part: &LPPartition,
    params: &BesovParams,
    c: f64,
) -> Result<EstimateReport, TransportError> {
    Ok(EstimateProfile::new(traj, part, params)?.evaluate(c))
}

/// Smallest constant (bisection, relative tolerance [`CALIBRATION_TOL`])
/// for which every node of every profile satisfies the estimate.
pub fn fit_constant_from_profiles(profiles: &[EstimateProfile]) -> Result<f64, TransportError> {
    if profiles.is_empty() {
        return Err(TransportError::EmptyFamily);
    }
    let holds = |c: f64| profiles.iter().all(|p| p.evaluate(c).all_hold());
    if !holds(CALIBRATION_CAP) {
        return Err(TransportError::CalibrationFailed { cap: CALIBRATION_CAP });
    }
    let (mut lo, mut hi) = (0.0, CALIBRATION_CAP);
    while hi - lo > CALIBRATION_TOL * hi && hi > 1e-12 {
        let mid = 0.5 * (lo + hi);
        if holds(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// Solves every problem and calibrates the transport-estimate constant on
/// the whole family.
pub fn fit_transport_constant(
    problems: &[TransportProblem],
    part: &LPPartition,
    params: &BesovParams,
) -> Result<f64, TransportError> {
    if problems.is_empty() {
        return Err(TransportError::EmptyFamily);
    }
    params.check_transport().map_err(TransportError::Inadmissible)?;
    let profiles = problems
        .par_iter()
        .map(|p| EstimateProfile::new(&solve_transport(p)?, part, params))
        .collect::<Result<Vec<_>, _>>()?;
    fit_constant_from_profiles(&profiles)
}

/// Random calibration family on `[0, 1]`: zero data, velocity
/// `v = a + t b` and forcing `F = c cos t + d sin t` with band-limited
/// `a, b` (|k| ≤ 8, sup 0.1) and `c, d` (|k| ≤ 16, sup 0.5).
///
/// Starting from rest makes `‖f(t)‖ ≈ t ‖F(0)‖` near `t = 0`, so every
/// member needs `C ≥ 1 − O(dt)`. With the weak velocity that start is the
/// binding constraint for every draw, and the fitted constant does not
/// depend on the seed.
pub fn random_transport_family(grid: &Grid, size: usize, rng: &mut impl rand::Rng) -> Vec<TransportProblem> {
    let dt = 0.01f64.min(0.25 * grid.dx() / 0.2);
    let time = TimeGrid::covering(1.0, dt);
    (0..size)
        .map(|_| {
            let va = random_band_limited(grid, 8, 0.1, rng);
            let vb = random_band_limited(grid, 8, 0.1, rng);
            let fa = random_band_limited(grid, 16, 0.5, rng);
            let fb = random_band_limited(grid, 16, 0.5, rng);
            let v = (0..time.nodes()).map(|i| va.axpy(time.t(i), &vb)).collect();
            let f = (0..time.nodes())
                .map(|i| fa.scale(time.t(i).cos()).axpy(time.t(i).sin(), &fb))
                .collect();
            TransportProblem::new(GridFunction::zeros(grid), NodeSeries::Nodes(v), NodeSeries::Nodes(f), time)
                .expect("family members share one grid")
        })
        .collect()
}
