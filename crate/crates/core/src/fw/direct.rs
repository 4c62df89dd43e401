use crate::spectral::GridFunction;
use crate::transport::TimeGrid;

use super::{fw_rhs_fields, FWState, FwError};

/// One RK4 step of the full nonlinear system.
#[derive(Debug, Clone, Copy)]
pub struct FwStepper {
    pub dt: f64,
}

impl FwStepper {
    pub fn step(&self, u: &GridFunction, rho: &GridFunction) -> (GridFunction, GridFunction) {
        let dt = self.dt;
        let (ku1, kr1) = fw_rhs_fields(u, rho);
        let (ku2, kr2) = fw_rhs_fields(&u.axpy(0.5 * dt, &ku1), &rho.axpy(0.5 * dt, &kr1));
        let (ku3, kr3) = fw_rhs_fields(&u.axpy(0.5 * dt, &ku2), &rho.axpy(0.5 * dt, &kr2));
        let (ku4, kr4) = fw_rhs_fields(&u.axpy(dt, &ku3), &rho.axpy(dt, &kr3));
        let du = ku1.axpy(2.0, &ku2).axpy(2.0, &ku3).axpy(1.0, &ku4);
        let drho = kr1.axpy(2.0, &kr2).axpy(2.0, &kr3).axpy(1.0, &kr4);
        (u.axpy(dt / 6.0, &du), rho.axpy(dt / 6.0, &drho))
    }
}

/// Stored solution with per-node conservation diagnostics.
#[derive(Debug, Clone)]
pub struct FwTrajectory {
    pub time: TimeGrid,
    pub states: Vec<FWState>,
    /// `(mean u, mean ρ)` at each node.
    pub means: Vec<(f64, f64)>,
}

impl FwTrajectory {
    pub fn last(&self) -> &FWState {
        self.states.last().expect("trajectory holds the initial state")
    }

    /// Largest drift of the spatial means from their initial values.
    pub fn mean_drift(&self) -> (f64, f64) {
        let (u0, r0) = self.means[0];
        self.means.iter().fold((0.0, 0.0), |(du, dr), &(u, r)| {
            (du.max((u - u0).abs()), dr.max((r - r0).abs()))
        })
    }
}

pub(crate) fn stability_limit(initial: &FWState) -> f64 {
    0.5 * initial.u.grid().dx() / initial.u.max_abs().max(1.0)
}

/// Integrates the system on `[0, t_end]` with step at most `dt`.
pub fn solve_fw_direct(initial: &FWState, t_end: f64, dt: f64) -> Result<FwTrajectory, FwError> {
    if !(t_end > 0.0 && dt > 0.0) {
        return Err(FwError::InvalidInput(format!("need T > 0 and dt > 0, got T = {t_end}, dt = {dt}")));
    }
    let time = TimeGrid::covering(t_end, dt);
    solve_fw_on(initial, time)
}

/// Integrates the system on an explicit time grid.
pub fn solve_fw_on(initial: &FWState, time: TimeGrid) -> Result<FwTrajectory, FwError> {
    let limit = stability_limit(initial);
    if time.dt() > limit {
        return Err(FwError::Unstable { dt: time.dt(), limit });
    }
    let stepper = FwStepper { dt: time.dt() };
    let mut states = Vec::with_capacity(time.nodes());
    let mut means = Vec::with_capacity(time.nodes());
    let start = FWState {
        t: 0.0,
        ..initial.clone()
    };
    means.push((start.u.mean(), start.rho.mean()));
    states.push(start);
    for i in 0..time.steps() {
        let prev = &states[i];
        let (u, rho) = stepper.step(&prev.u, &prev.rho);
        let next = FWState { u, rho, t: time.t(i + 1) };
        if !next.is_finite() {
            return Err(FwError::BlowUp { node: i + 1, t: next.t });
        }
        means.push((next.u.mean(), next.rho.mean()));
        states.push(next);
    }
    Ok(FwTrajectory { time, states, means })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::make_grid;

    #[test]
    fn steady_constants() {
        let g = make_grid(32, 1.0).unwrap();
        let s = FWState::new(GridFunction::constant(&g, 0.3), GridFunction::constant(&g, 0.1), 0.0).unwrap();
        let traj = solve_fw_direct(&s, 0.5, 0.01).unwrap();
        let last = traj.last();
        assert!(last.u.samples().iter().all(|v| (v - 0.3).abs() < 1e-12));
        assert!(last.rho.samples().iter().all(|v| (v - 0.1).abs() < 1e-12));
    }

    #[test]
    fn stability_guard() {
        let g = make_grid(64, 1.0).unwrap();
        let s = FWState::new(GridFunction::from_fn(&g, |x| 3.0 * x.sin()), GridFunction::zeros(&g), 0.0).unwrap();
        let limit = stability_limit(&s);
        assert!(matches!(solve_fw_direct(&s, 1.0, 2.0 * limit), Err(FwError::Unstable { .. })));
    }
}
