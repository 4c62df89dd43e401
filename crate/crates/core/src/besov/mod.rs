//! Littlewood–Paley blocks, nonhomogeneous Besov norms and the Friedrichs
//! mollifier on the periodic grid.

mod estimates;
mod mollifier;
mod partition;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::spectral::SpectralError;

pub use estimates::{block_bound_ratio, check_multiplier_bound, check_product_estimate, embedding_ratio};
pub use mollifier::{bump, kernel_factor, mollify, MollifierKernel};
pub use partition::{
    besov_norm, build_partition, chi, dyadic_block, ell_r, low_cutoff, phi, weighted_blocks, LPPartition,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BesovError {
    #[error("invalid Besov exponents: {0}")]
    InvalidParams(String),
    #[error("field and partition live on different grids")]
    GridMismatch,
    #[error("ratio has a zero denominator")]
    ZeroDenominator,
    #[error("mollifier width must be positive and finite, got {0}")]
    InvalidWidth(f64),
    #[error("mollifier width {epsilon} does not fit the torus (needs ε < πL = {limit})")]
    KernelTooWide { epsilon: f64, limit: f64 },
    #[error(transparent)]
    Spectral(#[from] SpectralError),
}

/// Exponents `(s, p, r)` of `B^s_{p,r}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BesovParams {
    pub s: f64,
    pub p: f64,
    pub r: f64,
}

impl BesovParams {
    pub fn new(s: f64, p: f64, r: f64) -> Result<Self, BesovError> {
        if !s.is_finite() {
            return Err(BesovError::InvalidParams(format!("s must be finite, got {s}")));
        }
        if p.is_nan() || p < 1.0 {
            return Err(BesovError::InvalidParams(format!("p must lie in [1, ∞], got {p}")));
        }
        if r.is_nan() || r < 1.0 {
            return Err(BesovError::InvalidParams(format!("r must lie in [1, ∞], got {r}")));
        }
        Ok(BesovParams { s, p, r })
    }

    /// Same `(p, r)` with regularity `s + ds`.
    pub fn shifted(&self, ds: f64) -> Self {
        BesovParams { s: self.s + ds, ..*self }
    }

    /// Regularity threshold `max{2 + 1/p, 5/2}` for the well-posedness theory.
    pub fn well_posedness_threshold(&self) -> f64 {
        (2.0 + 1.0 / self.p).max(2.5)
    }

    /// Checks `s > max{2 + 1/p, 5/2}` and `r < ∞`, naming the violated condition.
    pub fn check_well_posedness(&self) -> Result<(), String> {
        let threshold = self.well_posedness_threshold();
        if self.s <= threshold {
            let which = if 2.0 + 1.0 / self.p > 2.5 {
                format!("s > 2 + 1/p = {threshold}")
            } else {
                "s > 5/2".to_string()
            };
            return Err(format!("s = {} violates {which}", self.s));
        }
        if self.r.is_infinite() {
            return Err("r = ∞ violates r ∈ [1, ∞)".to_string());
        }
        Ok(())
    }

    pub fn is_admissible(&self) -> bool {
        self.check_well_posedness().is_ok()
    }

    /// Transport-estimate range: `s > 1 + 1/p` with `r ∈ (1, ∞)`, or
    /// `s ≥ 1 + 1/p` with `r = 1`.
    pub fn check_transport(&self) -> Result<(), String> {
        let edge = 1.0 + 1.0 / self.p;
        if self.r.is_infinite() {
            return Err("r = ∞ is not covered by the transport estimate".to_string());
        }
        if self.r == 1.0 {
            if self.s < edge {
                return Err(format!("s = {} violates s ≥ 1 + 1/p = {edge} (r = 1)", self.s));
            }
        } else if self.s <= edge {
            return Err(format!("s = {} violates s > 1 + 1/p = {edge}", self.s));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn admissibility() {
        assert!(BesovParams::new(3.0, 2.0, 2.0).unwrap().is_admissible());
        let low = BesovParams::new(2.4, 2.0, 2.0).unwrap();
        assert!(low.check_well_posedness().unwrap_err().contains("5/2"));
        let p1 = BesovParams::new(2.9, 1.0, 2.0).unwrap();
        assert!(p1.check_well_posedness().unwrap_err().contains("2 + 1/p"));
        let rinf = BesovParams::new(3.0, 2.0, f64::INFINITY).unwrap();
        assert!(rinf.check_well_posedness().unwrap_err().contains("r = ∞"));
        assert!(BesovParams::new(3.0, 0.5, 2.0).is_err());
    }

    #[test]
    fn transport_range() {
        assert!(BesovParams::new(1.5, 2.0, 1.0).unwrap().check_transport().is_ok());
        assert!(BesovParams::new(1.5, 2.0, 2.0).unwrap().check_transport().is_err());
        assert!(BesovParams::new(3.0, 2.0, f64::INFINITY).unwrap().check_transport().is_err());
    }
}
