use crate::spectral::{lp_norm_of_samples, Grid, GridFunction};

use super::{BesovError, BesovParams};

const INNER: f64 = 3.0 / 4.0;
const OUTER: f64 = 4.0 / 3.0;

fn glue(x: f64) -> f64 {
    if x > 0.0 {
        (-1.0 / x).exp()
    } else {
        0.0
    }
}

/// Smooth radial cutoff: 1 on `|ξ| ≤ 3/4`, 0 on `|ξ| ≥ 4/3`, monotone in between.
pub fn chi(xi: f64) -> f64 {
    let a = xi.abs();
    if a <= INNER {
        1.0
    } else if a >= OUTER {
        0.0
    } else {
        let head = glue(OUTER - a);
        head / (head + glue(a - INNER))
    }
}

/// Ring function `φ(ξ) = χ(ξ/2) − χ(ξ)`, supported in `3/4 ≤ |ξ| ≤ 8/3`.
pub fn phi(xi: f64) -> f64 {
    chi(xi / 2.0) - chi(xi)
}

/// The dyadic partition of unity `χ(ξ) + Σ_q φ(2^{-q}ξ) = 1` tabulated on a grid.
///
/// Rings above `q_max` vanish identically on the grid, so truncating block
/// sums at `q_max` is exact.
#[derive(Debug, Clone)]
pub struct LPPartition {
    grid: Grid,
    chi_mask: Vec<f64>,
    phi_masks: Vec<Vec<f64>>,
}

impl LPPartition {
    pub fn new(grid: &Grid) -> Self {
        let xis = grid.wavenumbers();
        let chi_mask: Vec<f64> = xis.iter().map(|&xi| chi(xi)).collect();
        let mut phi_masks = Vec::new();
        for q in 0.. {
            let scale = 2f64.powi(-q);
            let mask: Vec<f64> = xis.iter().map(|&xi| phi(scale * xi)).collect();
            if mask.iter().all(|&m| m == 0.0) {
                break;
            }
            phi_masks.push(mask);
        }
        LPPartition {
            grid: grid.clone(),
            chi_mask,
            phi_masks,
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn chi_mask(&self) -> &[f64] {
        &self.chi_mask
    }

    pub fn phi_masks(&self) -> &[Vec<f64>] {
        &self.phi_masks
    }

    /// Largest ring index with a nonzero mask; −1 when only the low block exists.
    pub fn q_max(&self) -> i32 {
        self.phi_masks.len() as i32 - 1
    }

    /// Mask of `Δ_q` in FFT order, `None` when the block is identically zero.
    pub fn block_mask(&self, q: i32) -> Option<&[f64]> {
        match q {
            -1 => Some(&self.chi_mask),
            q if q >= 0 => self.phi_masks.get(q as usize).map(Vec::as_slice),
            _ => None,
        }
    }

    /// Largest deviation of `χ + Σ φ_q` from 1 over the grid.
    pub fn telescoping_residual(&self) -> f64 {
        (0..self.grid.len())
            .map(|j| {
                let total: f64 = self.chi_mask[j] + self.phi_masks.iter().map(|m| m[j]).sum::<f64>();
                (total - 1.0).abs()
            })
            .fold(0.0, f64::max)
    }

    fn check_grid(&self, f: &GridFunction) -> Result<(), BesovError> {
        if f.grid() != &self.grid {
            return Err(BesovError::GridMismatch);
        }
        Ok(())
    }
}

pub fn build_partition(grid: &Grid) -> LPPartition {
    LPPartition::new(grid)
}

/// `Δ_q f`: `χ(D)f` for `q = −1`, `φ(2^{-q}D)f` for `q ≥ 0`, zero otherwise.
pub fn dyadic_block(part: &LPPartition, f: &GridFunction, q: i32) -> Result<GridFunction, BesovError> {
    part.check_grid(f)?;
    Ok(match part.block_mask(q) {
        Some(mask) => f.apply_real_mask(mask),
        None => GridFunction::zeros(f.grid()),
    })
}

/// `S_q f = Σ_{p ≤ q−1} Δ_p f`, applied as the single mask `χ(2^{-q}ξ)`.
pub fn low_cutoff(part: &LPPartition, f: &GridFunction, q: u32) -> Result<GridFunction, BesovError> {
    part.check_grid(f)?;
    let scale = 2f64.powi(-(q as i32));
    let mask: Vec<f64> = part.grid.wavenumbers().iter().map(|&xi| chi(scale * xi)).collect();
    Ok(f.apply_real_mask(&mask))
}

/// The weighted block norms `2^{sq} ‖Δ_q f‖_{L^p}` for `q = −1, …, q_max`.
pub fn weighted_blocks(part: &LPPartition, f: &GridFunction, s: f64, p: f64) -> Result<Vec<f64>, BesovError> {
    part.check_grid(f)?;
    let dx = part.grid.dx();
    let mut out = Vec::with_capacity(part.phi_masks.len() + 1);
    for q in -1..=part.q_max() {
        let mask = part.block_mask(q).expect("q within range");
        let block = f.apply_real_mask(mask);
        let norm = lp_norm_of_samples(block.samples(), dx, p)?;
        out.push(2f64.powf(s * q as f64) * norm);
    }
    Ok(out)
}

/// `ℓ^r` combination of weighted block norms.
pub fn ell_r(values: &[f64], r: f64) -> f64 {
    if r.is_infinite() {
        return values.iter().fold(0.0, |m, &v| m.max(v));
    }
    if r == 1.0 {
        return values.iter().sum();
    }
    let peak = values.iter().fold(0.0f64, |m, &v| m.max(v));
    if peak == 0.0 {
        return 0.0;
    }
    peak * values.iter().map(|v| (v / peak).powf(r)).sum::<f64>().powf(1.0 / r)
}

/// `‖f‖_{B^s_{p,r}} = ‖(2^{sq} ‖Δ_q f‖_{L^p})_{q ≥ −1}‖_{ℓ^r}`.
pub fn besov_norm(part: &LPPartition, f: &GridFunction, params: &BesovParams) -> Result<f64, BesovError> {
    let blocks = weighted_blocks(part, f, params.s, params.p)?;
    Ok(ell_r(&blocks, params.r))
}
