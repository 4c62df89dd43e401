//! The two-component Fornberg–Whitham system on the torus,
//!
//! ```text
//! u_t + u u_x = Λ⁻¹∂x(ρ − u),      Λ = 1 − ∂x²
//! ρ_t + u ρ_x + ρ u_x + u_x = 0,   ρ = η − 1
//! ```
//!
//! with a direct RK4 solver, the mollified transport iteration that
//! constructs solutions, and the lifespan / stability / continuity
//! experiments built on them.

mod direct;
mod experiments;
mod scheme;

use thiserror::Error;

use crate::besov::{besov_norm, BesovError, BesovParams, LPPartition};
use crate::spectral::{dealias, derivative, lambda_inv_dx, GridFunction, SpectralError};
use crate::transport::TransportError;

pub use direct::{solve_fw_direct, solve_fw_on, FwStepper, FwTrajectory};
pub use experiments::{
    continuity_experiment, empirical_lifespan, stability_experiment, ContinuityReport, EmpiricalLifespan,
    LifespanMode, StabilityReport, GRONWALL_SLACK,
};
pub use scheme::{run_scheme, run_scheme_on, IterateTrajectory, IterationTrace, SchemeConfig};

/// Relative slack on a priori bound comparisons.
pub const BOUND_SLACK: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FwError {
    #[error("time step {dt} exceeds the stability bound 0.5·dx/max(1, max|u₀|) = {limit}")]
    Unstable { dt: f64, limit: f64 },
    #[error("numerical blow-up at time node {node} (t = {t})")]
    BlowUp { node: usize, t: f64 },
    #[error("inadmissible exponents: {0}")]
    Inadmissible(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("transport solve for iterate {iterate} failed: {source}")]
    Transport { iterate: usize, source: TransportError },
    #[error("member {member} of the experiment family failed: {reason}")]
    Member { member: usize, reason: String },
    #[error(transparent)]
    Besov(#[from] BesovError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
}

/// `(u, ρ)` at time `t`.
#[derive(Debug, Clone)]
pub struct FWState {
    pub u: GridFunction,
    pub rho: GridFunction,
    pub t: f64,
}

impl FWState {
    pub fn new(u: GridFunction, rho: GridFunction, t: f64) -> Result<Self, FwError> {
        if u.grid() != rho.grid() {
            return Err(FwError::InvalidInput("u and ρ live on different grids".into()));
        }
        Ok(FWState { u, rho, t })
    }

    /// Surface elevation `η = ρ + 1`.
    pub fn eta(&self) -> GridFunction {
        self.rho.axpy(1.0, &GridFunction::constant(self.rho.grid(), 1.0))
    }

    pub fn is_finite(&self) -> bool {
        self.u.is_finite() && self.rho.is_finite()
    }

    /// `‖u‖_{B^s} + ‖ρ‖_{B^{s−1}}`.
    pub fn size(&self, part: &LPPartition, params: &BesovParams) -> Result<f64, BesovError> {
        pair_norm(part, &self.u, &self.rho, params)
    }
}

/// `‖u‖_{B^s} + ‖ρ‖_{B^{s−1}}` for any pair of fields.
pub fn pair_norm(
    part: &LPPartition,
    u: &GridFunction,
    rho: &GridFunction,
    params: &BesovParams,
) -> Result<f64, BesovError> {
    Ok(besov_norm(part, u, params)? + besov_norm(part, rho, &params.shifted(-1.0))?)
}

/// Time derivatives `(du/dt, dρ/dt)` of the system.
pub fn fw_rhs(state: &FWState) -> (GridFunction, GridFunction) {
    fw_rhs_fields(&state.u, &state.rho)
}

pub(crate) fn fw_rhs_fields(u: &GridFunction, rho: &GridFunction) -> (GridFunction, GridFunction) {
    let ux = derivative(u);
    let du = &lambda_inv_dx(&(rho - u)) - &dealias(&u.pointwise_mul(&ux));
    let rho_flux = dealias(&u.pointwise_mul(&derivative(rho))).axpy(1.0, &dealias(&rho.pointwise_mul(&ux)));
    let drho = -&rho_flux.axpy(1.0, &ux);
    (du, drho)
}

/// Guaranteed common lifespan `T = 3 / (16 C P₀²)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lifespan {
    pub t: f64,
    /// Set when `P₀ = 0` and `t` is the configured cap.
    pub capped: bool,
}

pub fn lifespan(p0: f64, c: f64, cap: f64) -> Result<Lifespan, FwError> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(FwError::InvalidInput(format!("lifespan constant must be positive, got {c}")));
    }
    if !(p0 >= 0.0 && p0.is_finite()) {
        return Err(FwError::InvalidInput(format!("P0 must be non-negative, got {p0}")));
    }
    if p0 == 0.0 {
        return Ok(Lifespan { t: cap, capped: true });
    }
    Ok(Lifespan {
        t: 3.0 / (16.0 * c * p0 * p0),
        capped: false,
    })
}

/// `P₀ / (1 − 4 C P₀² t)^{1/2}`; infinite once the denominator vanishes.
pub fn riccati_bound(p0: f64, c: f64, t: f64) -> f64 {
    let gap = 1.0 - 4.0 * c * p0 * p0 * t;
    if gap <= 0.0 {
        f64::INFINITY
    } else {
        p0 / gap.sqrt()
    }
}
