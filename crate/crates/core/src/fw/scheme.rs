//! Mollified transport iteration. Starting from `u⁰ = ρ⁰ = 0`, iterate
//! `n + 1` solves two linear transport problems with velocity `uⁿ`:
//!
//! ```text
//! ∂t uⁿ⁺¹ + uⁿ ∂x uⁿ⁺¹ = Λ⁻¹∂x(ρⁿ − uⁿ),          uⁿ⁺¹(0) = J_{n+1} u₀
//! ∂t ρⁿ⁺¹ + uⁿ ∂x ρⁿ⁺¹ = −ρⁿ ∂x uⁿ − ∂x uⁿ,       ρⁿ⁺¹(0) = J_{n+1} ρ₀
//! ```
//!
//! where `J_{n+1}` has width `1/(n+1)`. All iterates share one time grid,
//! so the velocity of iterate `n + 1` is read directly off iterate `n`.

use crate::besov::{besov_norm, mollify, BesovParams, LPPartition, MollifierKernel};
use crate::spectral::{dealias, derivative, lambda_inv_dx, GridFunction};
use crate::transport::{cumulative_trapezoid, solve_transport, NodeSeries, TimeGrid, TransportProblem};

use super::{lifespan, pair_norm, riccati_bound, FwError, Lifespan, BOUND_SLACK};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchemeConfig {
    pub params: BesovParams,
    /// Lifespan constant `C`.
    pub c: f64,
    pub n_max: usize,
    pub dt: f64,
    /// Time span used when the data vanish and the lifespan is unbounded.
    pub t_cap: f64,
    /// Keep every iterate's trajectory, not only the first and last.
    pub keep_all: bool,
}

impl SchemeConfig {
    pub fn new(params: BesovParams, c: f64, n_max: usize, dt: f64) -> Self {
        SchemeConfig {
            params,
            c,
            n_max,
            dt,
            t_cap: 1.0,
            keep_all: false,
        }
    }

    pub fn validate(&self) -> Result<(), FwError> {
        self.params.check_well_posedness().map_err(FwError::Inadmissible)?;
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(FwError::InvalidInput(format!("C must be positive, got {}", self.c)));
        }
        if !(self.dt > 0.0 && self.t_cap > 0.0) {
            return Err(FwError::InvalidInput("dt and t_cap must be positive".into()));
        }
        Ok(())
    }

    /// Width of `J_{n}`.
    pub fn mollifier_width(n: usize) -> f64 {
        1.0 / n as f64
    }
}

#[derive(Debug, Clone)]
pub struct IterateTrajectory {
    pub u: Vec<GridFunction>,
    pub rho: Vec<GridFunction>,
}

impl IterateTrajectory {
    fn zeros(like: &GridFunction, nodes: usize) -> Self {
        let z = GridFunction::zeros(like.grid());
        IterateTrajectory {
            u: vec![z.clone(); nodes],
            rho: vec![z; nodes],
        }
    }
}

/// Everything recorded while iterating. Per-iterate vectors are indexed by
/// `n = 0..=n_max`, per-node vectors by time node.
#[derive(Debug, Clone)]
pub struct IterationTrace {
    pub time: TimeGrid,
    pub p0: f64,
    pub lifespan: Lifespan,
    pub c: f64,
    /// `‖uⁿ(t)‖_{B^s}`.
    pub norms_u: Vec<Vec<f64>>,
    /// `‖ρⁿ(t)‖_{B^{s−1}}`.
    pub norms_rho: Vec<Vec<f64>>,
    /// `V_n(t) = ∫₀ᵗ ‖∂x uⁿ‖_{B^{s−1}}`.
    pub v_profiles: Vec<Vec<f64>>,
    /// `d_n = sup_t ‖uⁿ⁺¹ − uⁿ‖_{B^{s−1}} + ‖ρⁿ⁺¹ − ρⁿ‖_{B^{s−2}}`, `n = 0..n_max`.
    pub d: Vec<f64>,
    /// `P₀ / (1 − 4CP₀²t)^{1/2}` per node.
    pub bound_312: Vec<f64>,
    /// `2 P₀`.
    pub bound_313: f64,
    pub iterates: Vec<Option<IterateTrajectory>>,
}

impl IterationTrace {
    pub fn norm_sum(&self, n: usize, node: usize) -> f64 {
        self.norms_u[n][node] + self.norms_rho[n][node]
    }

    pub fn flags_312(&self, n: usize) -> Vec<bool> {
        (0..self.time.nodes())
            .map(|i| self.norm_sum(n, i) <= self.bound_312[i] * (1.0 + BOUND_SLACK))
            .collect()
    }

    pub fn flags_313(&self, n: usize) -> Vec<bool> {
        (0..self.time.nodes())
            .map(|i| self.norm_sum(n, i) <= self.bound_313 * (1.0 + BOUND_SLACK))
            .collect()
    }

    pub fn all_flags_hold(&self) -> (bool, bool) {
        let n = self.norms_u.len();
        (
            (0..n).all(|k| self.flags_312(k).into_iter().all(|f| f)),
            (0..n).all(|k| self.flags_313(k).into_iter().all(|f| f)),
        )
    }

    pub fn iterate(&self, n: usize) -> Option<&IterateTrajectory> {
        self.iterates.get(n).and_then(Option::as_ref)
    }

    pub fn last_iterate(&self) -> &IterateTrajectory {
        self.iterates
            .last()
            .and_then(Option::as_ref)
            .expect("final iterate is always kept")
    }

    /// `d_{n+1} / d_n` for each consecutive pair.
    pub fn contraction_ratios(&self) -> Vec<f64> {
        self.d.windows(2).map(|w| w[1] / w[0]).collect()
    }
}

/// Runs the scheme on `[0, T]` with `T = 3/(16 C P₀²)`.
pub fn run_scheme(
    part: &LPPartition,
    u0: &GridFunction,
    rho0: &GridFunction,
    cfg: &SchemeConfig,
) -> Result<IterationTrace, FwError> {
    cfg.validate()?;
    let p0 = pair_norm(part, u0, rho0, &cfg.params)?;
    let span = lifespan(p0, cfg.c, cfg.t_cap)?;
    if !span.capped {
        let reach = 4.0 * cfg.c * p0 * p0 * span.t;
        assert!(reach < 1.0, "lifespan must keep 4CP0²T < 1, got {reach}");
    }
    let time = TimeGrid::covering(span.t, cfg.dt);
    run_scheme_on(part, u0, rho0, cfg, time, span)
}

/// Runs the scheme on an explicit time grid.
pub fn run_scheme_on(
    part: &LPPartition,
    u0: &GridFunction,
    rho0: &GridFunction,
    cfg: &SchemeConfig,
    time: TimeGrid,
    span: Lifespan,
) -> Result<IterationTrace, FwError> {
    cfg.validate()?;
    if u0.grid() != rho0.grid() || u0.grid() != part.grid() {
        return Err(FwError::InvalidInput("data and partition live on different grids".into()));
    }
    let params = cfg.params;
    let lower = params.shifted(-1.0);
    let lowest = params.shifted(-2.0);
    let nodes = time.nodes();
    let p0 = pair_norm(part, u0, rho0, &params)?;

    let mut norms_u = vec![vec![0.0; nodes]];
    let mut norms_rho = vec![vec![0.0; nodes]];
    let mut v_profiles = Vec::with_capacity(cfg.n_max + 1);
    let mut d = Vec::with_capacity(cfg.n_max);
    let mut iterates = Vec::with_capacity(cfg.n_max + 1);

    let mut current = IterateTrajectory::zeros(u0, nodes);
    iterates.push(cfg.keep_all.then(|| current.clone()));

    for n in 0..cfg.n_max {
        let dx_u: Vec<GridFunction> = current.u.iter().map(derivative).collect();
        let rates = dx_u
            .iter()
            .map(|g| besov_norm(part, g, &lower))
            .collect::<Result<Vec<_>, _>>()?;
        v_profiles.push(cumulative_trapezoid(&rates, time.dt()));

        let forcing_u: Vec<GridFunction> = current
            .u
            .iter()
            .zip(&current.rho)
            .map(|(u, r)| lambda_inv_dx(&(r - u)))
            .collect();
        let forcing_rho: Vec<GridFunction> = current
            .rho
            .iter()
            .zip(&dx_u)
            .map(|(r, ux)| -&dealias(&r.pointwise_mul(ux)).axpy(1.0, ux))
            .collect();

        let kernel = MollifierKernel::new(SchemeConfig::mollifier_width(n + 1))?;
        let data_u = mollify(u0, &kernel)?;
        let data_rho = mollify(rho0, &kernel)?;

        let velocity = NodeSeries::Nodes(current.u.clone());
        let wrap = |source| FwError::Transport { iterate: n + 1, source };
        let prob_u = TransportProblem::new(data_u, velocity.clone(), NodeSeries::Nodes(forcing_u), time).map_err(wrap)?;
        let prob_rho = TransportProblem::new(data_rho, velocity, NodeSeries::Nodes(forcing_rho), time).map_err(wrap)?;
        let (next_u, next_rho) = rayon::join(|| solve_transport(&prob_u), || solve_transport(&prob_rho));
        let next = IterateTrajectory {
            u: next_u.map_err(wrap)?.into_states(),
            rho: next_rho.map_err(wrap)?.into_states(),
        };

        let mut nu = Vec::with_capacity(nodes);
        let mut nr = Vec::with_capacity(nodes);
        let mut diff = 0.0f64;
        for i in 0..nodes {
            nu.push(besov_norm(part, &next.u[i], &params)?);
            nr.push(besov_norm(part, &next.rho[i], &lower)?);
            let gap = besov_norm(part, &(&next.u[i] - &current.u[i]), &lower)?
                + besov_norm(part, &(&next.rho[i] - &current.rho[i]), &lowest)?;
            diff = diff.max(gap);
        }
        norms_u.push(nu);
        norms_rho.push(nr);
        d.push(diff);

        let keep = cfg.keep_all || n + 1 == 1 || n + 1 == cfg.n_max;
        iterates.push(keep.then(|| next.clone()));
        current = next;
    }

    let last_rates = current
        .u
        .iter()
        .map(|u| besov_norm(part, &derivative(u), &lower))
        .collect::<Result<Vec<_>, _>>()?;
    v_profiles.push(cumulative_trapezoid(&last_rates, time.dt()));
    if cfg.n_max == 0 {
        iterates[0] = Some(current);
    }

    let bound_312 = (0..nodes).map(|i| riccati_bound(p0, cfg.c, time.t(i))).collect();
    Ok(IterationTrace {
        time,
        p0,
        lifespan: span,
        c: cfg.c,
        norms_u,
        norms_rho,
        v_profiles,
        d,
        bound_312,
        bound_313: 2.0 * p0,
        iterates,
    })
}
