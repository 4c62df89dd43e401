use rayon::prelude::*;

use crate::besov::{besov_norm, mollify, BesovParams, LPPartition, MollifierKernel};
use crate::spectral::GridFunction;
use crate::transport::TimeGrid;

use super::direct::{solve_fw_on, stability_limit, FwStepper};
use super::scheme::run_scheme_on;
use super::{pair_norm, FWState, FwError, Lifespan, SchemeConfig, BOUND_SLACK};

/// Multiplicative slack on the fitted Gronwall bound.
pub const GRONWALL_SLACK: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LifespanMode {
    Direct,
    Scheme,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalLifespan {
    pub p0: f64,
    /// Last time node before `‖u‖_{B^s} + ‖ρ‖_{B^{s−1}}` first exceeds `2 P₀`.
    pub t_emp: f64,
    pub reached_cap: bool,
    /// The bound already failed at `t = 0`.
    pub violated_at_start: bool,
    /// Blow-up time node, when the direct solve produced non-finite values.
    pub blow_up: Option<f64>,
}

/// Measures how long the solution stays inside `2 P₀`.
pub fn empirical_lifespan(
    part: &LPPartition,
    u0: &GridFunction,
    rho0: &GridFunction,
    cfg: &SchemeConfig,
    t_cap: f64,
    mode: LifespanMode,
) -> Result<EmpiricalLifespan, FwError> {
    cfg.validate()?;
    let p0 = pair_norm(part, u0, rho0, &cfg.params)?;
    let threshold = 2.0 * p0 * (1.0 + BOUND_SLACK);
    let time = TimeGrid::covering(t_cap, cfg.dt);
    match mode {
        LifespanMode::Direct => {
            let initial = FWState::new(u0.clone(), rho0.clone(), 0.0)?;
            let limit = stability_limit(&initial);
            if cfg.dt > limit {
                return Err(FwError::Unstable { dt: cfg.dt, limit });
            }
            let mut out = EmpiricalLifespan {
                p0,
                t_emp: 0.0,
                reached_cap: false,
                violated_at_start: p0 > threshold,
                blow_up: None,
            };
            let stepper = FwStepper { dt: time.dt() };
            let (mut u, mut rho) = (u0.clone(), rho0.clone());
            for i in 1..time.nodes() {
                (u, rho) = stepper.step(&u, &rho);
                if !(u.is_finite() && rho.is_finite()) {
                    out.blow_up = Some(time.t(i));
                    return Ok(out);
                }
                if pair_norm(part, &u, &rho, &cfg.params)? > threshold {
                    return Ok(out);
                }
                out.t_emp = time.t(i);
            }
            out.reached_cap = true;
            Ok(out)
        }
        LifespanMode::Scheme => {
            let span = Lifespan { t: t_cap, capped: true };
            let trace = run_scheme_on(part, u0, rho0, cfg, time, span)?;
            let mut last_ok = time.steps();
            let mut violated_at_start = false;
            for n in 0..trace.norms_u.len() {
                if let Some(first_bad) = (0..time.nodes()).find(|&i| trace.norm_sum(n, i) > threshold) {
                    if first_bad == 0 {
                        violated_at_start = true;
                    }
                    last_ok = last_ok.min(first_bad.saturating_sub(1));
                }
            }
            Ok(EmpiricalLifespan {
                p0,
                t_emp: time.t(last_ok),
                reached_cap: last_ok == time.steps() && !violated_at_start,
                violated_at_start,
                blow_up: None,
            })
        }
    }
}

#[derive(Debug, Clone)]
pub struct StabilityReport {
    pub times: Vec<f64>,
    /// `D(t) = ‖w‖_{B^{s−1}} + ‖v‖_{B^{s−2}}`.
    pub distance: Vec<f64>,
    /// Least-squares slope of `log(D(t)/D(0))` through the origin.
    pub beta_fit: Option<f64>,
    /// `D(0) e^{β t} (1 + GRONWALL_SLACK)`.
    pub bound: Vec<f64>,
    pub holds: bool,
    pub max_bound_ratio: f64,
}

/// Solves from `(u₀, ρ₀)` and from the perturbed data and tracks the
/// distance between the two solutions.
#[allow(clippy::too_many_arguments)]
pub fn stability_experiment(
    part: &LPPartition,
    u0: &GridFunction,
    rho0: &GridFunction,
    delta: (&GridFunction, &GridFunction),
    params: &BesovParams,
    t_end: f64,
    dt: f64,
) -> Result<StabilityReport, FwError> {
    let base = FWState::new(u0.clone(), rho0.clone(), 0.0)?;
    let perturbed = FWState::new(u0 + delta.0, rho0 + delta.1, 0.0)?;
    let limit = stability_limit(&base).min(stability_limit(&perturbed));
    if dt > limit {
        return Err(FwError::Unstable { dt, limit });
    }
    let time = TimeGrid::covering(t_end, dt);
    let (a, b) = rayon::join(|| solve_fw_on(&base, time), || solve_fw_on(&perturbed, time));
    let (a, b) = (a?, b?);
    let lower = params.shifted(-1.0);
    let lowest = params.shifted(-2.0);
    let distance = a
        .states
        .iter()
        .zip(&b.states)
        .map(|(x, y)| Ok(besov_norm(part, &(&y.u - &x.u), &lower)? + besov_norm(part, &(&y.rho - &x.rho), &lowest)?))
        .collect::<Result<Vec<f64>, FwError>>()?;
    let times = time.times();
    let d0 = distance[0];
    if d0 == 0.0 {
        return Ok(StabilityReport {
            bound: vec![0.0; times.len()],
            holds: distance.iter().all(|&d| d == 0.0),
            max_bound_ratio: 0.0,
            times,
            distance,
            beta_fit: None,
        });
    }
    let (num, den) = times
        .iter()
        .zip(&distance)
        .filter(|(_, &d)| d > 0.0)
        .fold((0.0, 0.0), |(n, s), (&t, &d)| (n + t * (d / d0).ln(), s + t * t));
    let beta = if den > 0.0 { num / den } else { 0.0 };
    let bound: Vec<f64> = times.iter().map(|&t| d0 * (beta * t).exp() * (1.0 + GRONWALL_SLACK)).collect();
    let max_bound_ratio = distance.iter().zip(&bound).map(|(d, b)| d / b).fold(0.0, f64::max);
    Ok(StabilityReport {
        holds: max_bound_ratio <= 1.0,
        max_bound_ratio,
        times,
        distance,
        beta_fit: Some(beta),
        bound,
    })
}

#[derive(Debug, Clone)]
pub struct ContinuityReport {
    pub epsilons: Vec<f64>,
    /// `sup_t ‖uʲ − u‖_{B^s} + ‖ρʲ − ρ‖_{B^{s−1}}` for `j = 1..=j_max`.
    pub errors: Vec<f64>,
    pub nonincreasing: bool,
    pub final_error: f64,
}

/// Solves from the mollified family `(J_{εⱼ} u₀, J_{εⱼ} ρ₀)`, `εⱼ = 2^{−j}`,
/// and measures each solution's distance to the one from unmollified data.
#[allow(clippy::too_many_arguments)]
pub fn continuity_experiment(
    part: &LPPartition,
    u0: &GridFunction,
    rho0: &GridFunction,
    j_max: usize,
    params: &BesovParams,
    t_end: f64,
    dt: f64,
) -> Result<ContinuityReport, FwError> {
    if j_max < 3 {
        return Err(FwError::InvalidInput(format!("j_max must be at least 3, got {j_max}")));
    }
    let base = FWState::new(u0.clone(), rho0.clone(), 0.0)?;
    let limit = stability_limit(&base);
    if dt > limit {
        return Err(FwError::Unstable { dt, limit });
    }
    let time = TimeGrid::covering(t_end, dt);
    let reference = solve_fw_on(&base, time)?;
    let epsilons: Vec<f64> = (1..=j_max).map(|j| 2f64.powi(-(j as i32))).collect();
    let errors = epsilons
        .par_iter()
        .enumerate()
        .map(|(idx, &eps)| {
            let member = |e: FwError| FwError::Member {
                member: idx + 1,
                reason: e.to_string(),
            };
            let kernel = MollifierKernel::new(eps).map_err(|e| member(e.into()))?;
            let data = FWState::new(
                mollify(u0, &kernel).map_err(|e| member(e.into()))?,
                mollify(rho0, &kernel).map_err(|e| member(e.into()))?,
                0.0,
            )?;
            let traj = solve_fw_on(&data, time).map_err(member)?;
            traj.states
                .iter()
                .zip(&reference.states)
                .map(|(x, y)| pair_norm(part, &(&x.u - &y.u), &(&x.rho - &y.rho), params).map_err(FwError::from))
                .try_fold(0.0f64, |m, e| e.map(|e| m.max(e)))
        })
        .collect::<Result<Vec<f64>, FwError>>()?;
    let nonincreasing = errors.windows(2).all(|w| w[1] <= w[0]);
    Ok(ContinuityReport {
        final_error: *errors.last().expect("j_max ≥ 3"),
        epsilons,
        errors,
        nonincreasing,
    })
}
