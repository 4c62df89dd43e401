//! Ratio probes for inequalities whose constants are only known to exist.
//! Each probe returns one ratio; harnesses sweep families and report the max.

use crate::spectral::{lambda_inv_dx, lp_norm, GridFunction};

use super::{besov_norm, dyadic_block, BesovError, BesovParams, LPPartition};

fn ratio(numerator: f64, denominator: f64) -> Result<f64, BesovError> {
    if denominator == 0.0 {
        return Err(BesovError::ZeroDenominator);
    }
    Ok(numerator / denominator)
}

/// `‖fg‖_{B^{s−1}} / (‖f‖_{B^{s−1}} ‖g‖_{B^s})`.
pub fn check_product_estimate(
    part: &LPPartition,
    f: &GridFunction,
    g: &GridFunction,
    params: &BesovParams,
) -> Result<f64, BesovError> {
    let lower = params.shifted(-1.0);
    let num = besov_norm(part, &f.pointwise_mul(g), &lower)?;
    let den = besov_norm(part, f, &lower)? * besov_norm(part, g, params)?;
    ratio(num, den)
}

/// `‖Λ⁻¹∂x f‖_{B^s} / ‖f‖_{B^{s−1}}`. Constants give 0.
pub fn check_multiplier_bound(part: &LPPartition, f: &GridFunction, params: &BesovParams) -> Result<f64, BesovError> {
    let num = besov_norm(part, &lambda_inv_dx(f), params)?;
    let den = besov_norm(part, f, &params.shifted(-1.0))?;
    ratio(num, den)
}

/// `max_q ‖Δ_q f‖_{L^p} / ‖f‖_{L^p}`.
pub fn block_bound_ratio(part: &LPPartition, f: &GridFunction, p: f64) -> Result<f64, BesovError> {
    let whole = lp_norm(f, p)?;
    let mut worst = 0.0f64;
    for q in -1..=part.q_max() {
        let block = lp_norm(&dyadic_block(part, f, q)?, p)?;
        worst = worst.max(block);
    }
    ratio(worst, whole)
}

/// `‖f‖_{B^{s − (1/p₁ − 1/p₂)}_{p₂,r₂}} / ‖f‖_{B^s_{p₁,r₁}}` for `p₁ ≤ p₂`, `r₁ ≤ r₂`.
pub fn embedding_ratio(
    part: &LPPartition,
    f: &GridFunction,
    from: &BesovParams,
    to_p: f64,
    to_r: f64,
) -> Result<f64, BesovError> {
    let shift = 1.0 / from.p - 1.0 / to_p;
    let target = BesovParams::new(from.s - shift, to_p, to_r)?;
    ratio(besov_norm(part, f, &target)?, besov_norm(part, f, from)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::besov::{phi, chi};
    use crate::spectral::make_grid;
    use std::f64::consts::PI;

    #[test]
    fn multiplier_single_mode_closed_form() {
        let grid = make_grid(64, 1.0).unwrap();
        let part = LPPartition::new(&grid);
        let params = BesovParams::new(3.0, 2.0, 2.0).unwrap();
        let f = GridFunction::from_fn(&grid, f64::sin);
        // ξ = 1 lives in blocks −1 (χ(1)) and 0 (φ(1)).
        let weights = |sigma: f64| ((2f64.powf(-sigma) * chi(1.0)).powi(2) + phi(1.0).powi(2)).sqrt();
        let expected = 0.5 * weights(3.0) / weights(2.0);
        let got = check_multiplier_bound(&part, &f, &params).unwrap();
        assert!((got - expected).abs() < 1e-12 * expected);
    }

    #[test]
    fn multiplier_on_constant_is_zero() {
        let grid = make_grid(32, 1.0).unwrap();
        let part = LPPartition::new(&grid);
        let params = BesovParams::new(3.0, 2.0, 2.0).unwrap();
        let c = GridFunction::constant(&grid, 2.0);
        assert_eq!(check_multiplier_bound(&part, &c, &params).unwrap(), 0.0);
        let z = GridFunction::zeros(&grid);
        assert!(matches!(check_multiplier_bound(&part, &z, &params), Err(BesovError::ZeroDenominator)));
    }

    #[test]
    fn product_of_sines_closed_form() {
        let grid = make_grid(64, 1.0).unwrap();
        let part = LPPartition::new(&grid);
        let params = BesovParams::new(3.0, 2.0, 2.0).unwrap();
        let f = GridFunction::from_fn(&grid, f64::sin);
        let l2 = |amp: f64| amp * PI.sqrt();
        let single = |sigma: f64| l2(1.0) * ((2f64.powf(-sigma) * chi(1.0)).powi(2) + phi(1.0).powi(2)).sqrt();
        // sin² = 1/2 − cos(2x)/2: the mean sits in block −1, ξ = 2 splits
        // between blocks 0 (φ(2)) and 1 (φ(1)); χ(2) = 0.
        let mean_block = 2f64.powf(-2.0) * 0.5 * (2.0 * PI).sqrt();
        let b0 = phi(2.0) * l2(0.5);
        let b1 = 2f64.powf(2.0) * phi(1.0) * l2(0.5);
        let product = (mean_block.powi(2) + b0.powi(2) + b1.powi(2)).sqrt();
        let expected = product / (single(2.0) * single(3.0));
        let got = check_product_estimate(&part, &f, &f, &params).unwrap();
        assert!((got - expected).abs() < 1e-12 * expected, "{got} vs {expected}");
    }

    #[test]
    fn product_with_constant() {
        let grid = make_grid(64, 1.0).unwrap();
        let part = LPPartition::new(&grid);
        let params = BesovParams::new(3.0, 2.0, 2.0).unwrap();
        let one = GridFunction::constant(&grid, 1.0);
        let g = GridFunction::from_fn(&grid, |x| (2.0 * x).cos() + 0.5);
        let lower = params.shifted(-1.0);
        let expected = besov_norm(&part, &g, &lower).unwrap()
            / (besov_norm(&part, &one, &lower).unwrap() * besov_norm(&part, &g, &params).unwrap());
        let got = check_product_estimate(&part, &one, &g, &params).unwrap();
        assert!(got > 0.0 && (got - expected).abs() < 1e-14);
    }
}
