use std::f64::consts::PI;

use num_complex::Complex64;

use crate::spectral::{Grid, GridFunction};

use super::BesovError;

/// Unnormalized bump `exp(−1/(1−x²))` on `(−1, 1)`.
pub fn bump(x: f64) -> f64 {
    if x.abs() < 1.0 {
        (-1.0 / (1.0 - x * x)).exp()
    } else {
        0.0
    }
}

/// Friedrichs mollifier `J_ε` built from [`bump`] scaled to width `ε`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MollifierKernel {
    epsilon: f64,
}

impl MollifierKernel {
    pub fn new(epsilon: f64) -> Result<Self, BesovError> {
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(BesovError::InvalidWidth(epsilon));
        }
        Ok(MollifierKernel { epsilon })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// Quadrature weights `dx · ϕ_ε(x_j)` at periodic offsets, normalized to
    /// unit discrete mass. When `ε ≤ dx` only the origin survives and the
    /// kernel is the discrete delta.
    pub fn weights(&self, grid: &Grid) -> Result<Vec<f64>, BesovError> {
        let limit = PI * grid.scale();
        if self.epsilon >= limit {
            return Err(BesovError::KernelTooWide {
                epsilon: self.epsilon,
                limit,
            });
        }
        let n = grid.len();
        let dx = grid.dx();
        let mut w: Vec<f64> = (0..n)
            .map(|j| {
                let offset = if j <= n / 2 { j as f64 } else { j as f64 - n as f64 } * dx;
                bump(offset / self.epsilon)
            })
            .collect();
        let mass: f64 = w.iter().sum();
        w.iter_mut().for_each(|v| *v /= mass);
        Ok(w)
    }
}

/// Periodic convolution `J_ε f`, computed as a product of transforms.
pub fn mollify(f: &GridFunction, kernel: &MollifierKernel) -> Result<GridFunction, BesovError> {
    let grid = f.grid();
    let weights = kernel.weights(grid)?;
    // The unnormalized transform of the unit-mass weights is the multiplier:
    // (J f)_k = Σ_j w_j e^{-iξ_k x_j} · c_k.
    let transfer = GridFunction::from_samples(grid, weights)?;
    let n = grid.len() as f64;
    Ok(f.map_coefficients(|j, c| c * (transfer.coefficients()[j] * n)))
}

/// Transfer factor of the discrete kernel at integer mode `k`, computed by
/// direct summation. Used by experiments that reason mode by mode.
pub fn kernel_factor(grid: &Grid, kernel: &MollifierKernel, k: i64) -> Result<Complex64, BesovError> {
    let weights = kernel.weights(grid)?;
    let xi = k as f64 / grid.scale();
    Ok(weights
        .iter()
        .enumerate()
        .map(|(j, &w)| w * Complex64::from_polar(1.0, -xi * grid.node(j)))
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{lp_norm, make_grid};

    #[test]
    fn unit_mass() {
        let grid = make_grid(256, 1.0).unwrap();
        for eps in [0.05, 0.3, 1.0, 3.0] {
            let w = MollifierKernel::new(eps).unwrap().weights(&grid).unwrap();
            assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            assert!(w.iter().all(|&v| v >= 0.0));
        }
    }

    #[test]
    fn constants_fixed() {
        let grid = make_grid(128, 1.0).unwrap();
        let c = GridFunction::constant(&grid, 2.5);
        let out = mollify(&c, &MollifierKernel::new(0.3).unwrap()).unwrap();
        assert!(out.samples().iter().all(|v| (v - 2.5).abs() < 1e-13));
    }

    #[test]
    fn matches_direct_convolution() {
        let grid = make_grid(64, 1.0).unwrap();
        let f = GridFunction::from_fn(&grid, |x| (x.sin() * 2.0).exp());
        let kernel = MollifierKernel::new(0.7).unwrap();
        let w = kernel.weights(&grid).unwrap();
        let out = mollify(&f, &kernel).unwrap();
        let n = grid.len();
        for i in 0..n {
            let direct: f64 = (0..n).map(|j| w[j] * f.samples()[(i + n - j) % n]).sum();
            assert!((out.samples()[i] - direct).abs() < 1e-12);
        }
    }

    #[test]
    fn converges_as_width_shrinks() {
        let grid = make_grid(256, 1.0).unwrap();
        let f = GridFunction::from_fn(&grid, f64::sin);
        let errors: Vec<f64> = [0.4, 0.2, 0.1, 0.05]
            .iter()
            .map(|&e| lp_norm(&(&mollify(&f, &MollifierKernel::new(e).unwrap()).unwrap() - &f), 2.0).unwrap())
            .collect();
        assert!(errors.windows(2).all(|w| w[1] < w[0]), "{errors:?}");
    }

    #[test]
    fn sub_grid_width_is_identity() {
        let grid = make_grid(256, 8.0).unwrap();
        let f = GridFunction::from_fn(&grid, |x| x.sin() + 0.2 * (3.0 * x).cos());
        let out = mollify(&f, &MollifierKernel::new(0.9 * grid.dx()).unwrap()).unwrap();
        assert!(out.samples().iter().zip(f.samples()).all(|(a, b)| (a - b).abs() < 1e-15));
    }

    #[test]
    fn width_limits() {
        let grid = make_grid(64, 1.0).unwrap();
        assert!(matches!(MollifierKernel::new(0.0), Err(BesovError::InvalidWidth(_))));
        let k = MollifierKernel::new(4.0).unwrap();
        let f = GridFunction::zeros(&grid);
        assert!(matches!(mollify(&f, &k), Err(BesovError::KernelTooWide { .. })));
    }

    #[test]
    fn factor_agrees_with_mollified_mode() {
        let grid = make_grid(64, 1.0).unwrap();
        let kernel = MollifierKernel::new(0.5).unwrap();
        let f = GridFunction::from_fn(&grid, |x| (3.0 * x).cos());
        let out = mollify(&f, &kernel).unwrap();
        let factor = kernel_factor(&grid, &kernel, 3).unwrap();
        assert!(factor.im.abs() < 1e-14);
        assert!((out.coefficients()[3].re - 0.5 * factor.re).abs() < 1e-14);
    }
}
