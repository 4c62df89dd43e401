//! Periodic grid, discrete Fourier transform, Fourier multipliers and
//! discrete L^p norms.
//!
//! Fields live on the torus `[0, 2πL)` sampled at `N` uniform nodes. The
//! forward transform divides by `N`, so a coefficient is the amplitude of
//! its mode: `f(x_j) = Σ_k c_k e^{i ξ_k x_j}` with `ξ_k = k / L`. With this
//! normalization Parseval reads
//!
//! ```text
//! dx · Σ_j |f(x_j)|² = 2πL · Σ_k |c_k|²
//! ```
//!
//! Coefficients are stored in FFT order: index `j < N/2` holds mode `k = j`,
//! index `j ≥ N/2` holds `k = j − N`. Index `N/2` is the unpaired Nyquist
//! mode `k = −N/2`.

use std::f64::consts::PI;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectralError {
    #[error("grid size must be even and at least 8, got {0}")]
    InvalidSize(usize),
    #[error("grid scale L must be positive and finite, got {0}")]
    InvalidScale(f64),
    #[error("expected {expected} samples, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("fields live on different grids")]
    GridMismatch,
    #[error("L^p exponent must lie in [1, ∞], got {0}")]
    InvalidExponent(f64),
    #[error("multiplier `{name}` is not finite at ξ = {xi}")]
    NonFiniteSymbol { name: String, xi: f64 },
}

struct GridInner {
    n: usize,
    scale: f64,
    dx: f64,
    wavenumbers: Vec<f64>,
    modes: Vec<i64>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

/// Uniform periodic grid on `[0, 2πL)`. Cheap to clone.
#[derive(Clone)]
pub struct Grid(Arc<GridInner>);

impl Grid {
    pub fn new(n: usize, scale: f64) -> Result<Self, SpectralError> {
        if n < 8 || !n.is_multiple_of(2) {
            return Err(SpectralError::InvalidSize(n));
        }
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(SpectralError::InvalidScale(scale));
        }
        let modes: Vec<i64> = (0..n)
            .map(|j| if j < n / 2 { j as i64 } else { j as i64 - n as i64 })
            .collect();
        let wavenumbers = modes.iter().map(|&k| k as f64 / scale).collect();
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(n);
        let inverse = planner.plan_fft_inverse(n);
        Ok(Grid(Arc::new(GridInner {
            n,
            scale,
            dx: 2.0 * PI * scale / n as f64,
            wavenumbers,
            modes,
            forward,
            inverse,
        })))
    }

    pub fn len(&self) -> usize {
        self.0.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// The circumference parameter `L`.
    pub fn scale(&self) -> f64 {
        self.0.scale
    }

    pub fn dx(&self) -> f64 {
        self.0.dx
    }

    /// Domain length `2πL`.
    pub fn length(&self) -> f64 {
        2.0 * PI * self.0.scale
    }

    /// Wavenumbers `ξ_k = k / L` in FFT order.
    pub fn wavenumbers(&self) -> &[f64] {
        &self.0.wavenumbers
    }

    /// Integer mode numbers `k` in FFT order.
    pub fn modes(&self) -> &[i64] {
        &self.0.modes
    }

    pub fn nyquist_index(&self) -> usize {
        self.0.n / 2
    }

    /// Storage index of integer mode `k`, if it is on the grid.
    pub fn index_of_mode(&self, k: i64) -> Option<usize> {
        let n = self.0.n as i64;
        if k < -n / 2 || k >= n / 2 {
            return None;
        }
        Some(if k >= 0 { k as usize } else { (k + n) as usize })
    }

    pub fn node(&self, j: usize) -> f64 {
        j as f64 * self.0.dx
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.0.n).map(move |j| self.node(j))
    }

    fn forward(&self, samples: &[f64]) -> Vec<Complex64> {
        let mut buf: Vec<Complex64> = samples.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.0.forward.process(&mut buf);
        let inv_n = 1.0 / self.0.n as f64;
        buf.iter_mut().for_each(|c| *c *= inv_n);
        buf
    }

    fn inverse(&self, coeffs: &[Complex64]) -> Vec<f64> {
        let mut buf = coeffs.to_vec();
        self.0.inverse.process(&mut buf);
        buf.into_iter().map(|c| c.re).collect()
    }
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || (self.0.n == other.0.n && self.0.scale == other.0.scale)
    }
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid")
            .field("n", &self.0.n)
            .field("scale", &self.0.scale)
            .field("dx", &self.0.dx)
            .finish()
    }
}

/// Builds a grid of `n` nodes on the torus of circumference `2πL`.
pub fn make_grid(n: usize, scale: f64) -> Result<Grid, SpectralError> {
    Grid::new(n, scale)
}

/// Real periodic field holding both its samples and its mode amplitudes.
#[derive(Clone, Debug)]
pub struct GridFunction {
    grid: Grid,
    samples: Vec<f64>,
    coeffs: Vec<Complex64>,
}

impl GridFunction {
    pub fn from_samples(grid: &Grid, samples: Vec<f64>) -> Result<Self, SpectralError> {
        if samples.len() != grid.len() {
            return Err(SpectralError::LengthMismatch {
                expected: grid.len(),
                actual: samples.len(),
            });
        }
        let coeffs = grid.forward(&samples);
        Ok(GridFunction {
            grid: grid.clone(),
            samples,
            coeffs,
        })
    }

    pub fn from_fn(grid: &Grid, f: impl Fn(f64) -> f64) -> Self {
        let samples = grid.nodes().map(f).collect();
        Self::from_samples(grid, samples).expect("sample count matches grid")
    }

    /// Builds a field from mode amplitudes, projecting onto real fields
    /// (Hermitian symmetry, real Nyquist coefficient).
    pub fn from_coefficients(grid: &Grid, mut coeffs: Vec<Complex64>) -> Result<Self, SpectralError> {
        if coeffs.len() != grid.len() {
            return Err(SpectralError::LengthMismatch {
                expected: grid.len(),
                actual: coeffs.len(),
            });
        }
        hermitian_project(&mut coeffs);
        let samples = grid.inverse(&coeffs);
        Ok(GridFunction {
            grid: grid.clone(),
            samples,
            coeffs,
        })
    }

    pub fn zeros(grid: &Grid) -> Self {
        GridFunction {
            grid: grid.clone(),
            samples: vec![0.0; grid.len()],
            coeffs: vec![Complex64::new(0.0, 0.0); grid.len()],
        }
    }

    pub fn constant(grid: &Grid, value: f64) -> Self {
        let mut coeffs = vec![Complex64::new(0.0, 0.0); grid.len()];
        coeffs[0] = Complex64::new(value, 0.0);
        GridFunction {
            grid: grid.clone(),
            samples: vec![value; grid.len()],
            coeffs,
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    /// Mode amplitudes in FFT order.
    pub fn coefficients(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Spatial mean, i.e. the `ξ = 0` coefficient.
    pub fn mean(&self) -> f64 {
        self.coeffs[0].re
    }

    pub fn max_abs(&self) -> f64 {
        self.samples.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.samples.iter().all(|v| v.is_finite())
    }

    pub fn is_zero(&self) -> bool {
        self.samples.iter().all(|&v| v == 0.0)
    }

    /// Multiplies every coefficient by `mask(index)` and returns the real field.
    pub fn map_coefficients(&self, mut mask: impl FnMut(usize, Complex64) -> Complex64) -> Self {
        let coeffs = self.coeffs.iter().enumerate().map(|(j, &c)| mask(j, c)).collect();
        Self::from_coefficients(&self.grid, coeffs).expect("length preserved")
    }

    /// Multiplies by a real mask given in FFT order.
    pub fn apply_real_mask(&self, mask: &[f64]) -> Self {
        debug_assert_eq!(mask.len(), self.grid.len());
        self.map_coefficients(|j, c| c * mask[j])
    }

    pub fn pointwise_mul(&self, other: &GridFunction) -> Self {
        self.zip_samples(other, |a, b| a * b)
    }

    pub fn scale(&self, factor: f64) -> Self {
        GridFunction {
            grid: self.grid.clone(),
            samples: self.samples.iter().map(|v| v * factor).collect(),
            coeffs: self.coeffs.iter().map(|c| c * factor).collect(),
        }
    }

    /// `self + factor · other`.
    pub fn axpy(&self, factor: f64, other: &GridFunction) -> Self {
        self.assert_same_grid(other);
        GridFunction {
            grid: self.grid.clone(),
            samples: self
                .samples
                .iter()
                .zip(&other.samples)
                .map(|(a, b)| a + factor * b)
                .collect(),
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a + b * factor)
                .collect(),
        }
    }

    fn zip_samples(&self, other: &GridFunction, op: impl Fn(f64, f64) -> f64) -> Self {
        self.assert_same_grid(other);
        let samples = self
            .samples
            .iter()
            .zip(&other.samples)
            .map(|(&a, &b)| op(a, b))
            .collect();
        Self::from_samples(&self.grid, samples).expect("length preserved")
    }

    fn assert_same_grid(&self, other: &GridFunction) {
        assert!(self.grid == other.grid, "fields live on different grids");
    }
}

fn hermitian_project(coeffs: &mut [Complex64]) {
    let n = coeffs.len();
    coeffs[0].im = 0.0;
    coeffs[n / 2].im = 0.0;
    for j in 1..n / 2 {
        let a = coeffs[j];
        let b = coeffs[n - j].conj();
        let avg = (a + b) * 0.5;
        coeffs[j] = avg;
        coeffs[n - j] = avg.conj();
    }
}

impl Add for &GridFunction {
    type Output = GridFunction;
    fn add(self, rhs: &GridFunction) -> GridFunction {
        self.axpy(1.0, rhs)
    }
}

impl Sub for &GridFunction {
    type Output = GridFunction;
    fn sub(self, rhs: &GridFunction) -> GridFunction {
        self.axpy(-1.0, rhs)
    }
}

impl Neg for &GridFunction {
    type Output = GridFunction;
    fn neg(self) -> GridFunction {
        self.scale(-1.0)
    }
}

impl Mul<f64> for &GridFunction {
    type Output = GridFunction;
    fn mul(self, rhs: f64) -> GridFunction {
        self.scale(rhs)
    }
}

type SymbolFn = dyn Fn(f64) -> Complex64 + Send + Sync;

/// A Fourier multiplier `ξ ↦ m(ξ)`.
#[derive(Clone)]
pub struct MultiplierSymbol {
    name: String,
    rule: Arc<SymbolFn>,
}

impl MultiplierSymbol {
    pub fn new(name: impl Into<String>, rule: impl Fn(f64) -> Complex64 + Send + Sync + 'static) -> Self {
        MultiplierSymbol {
            name: name.into(),
            rule: Arc::new(rule),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn eval(&self, xi: f64) -> Complex64 {
        (self.rule)(xi)
    }

    pub fn identity() -> Self {
        Self::new("1", |_| Complex64::new(1.0, 0.0))
    }

    /// Symbol `iξ` of `∂x`.
    pub fn derivative() -> Self {
        Self::new("∂x", |xi| Complex64::new(0.0, xi))
    }

    /// Symbol `iξ / (1 + ξ²)` of `Λ⁻¹∂x` with `Λ = 1 − ∂x²`.
    pub fn lambda_inv_dx() -> Self {
        Self::new("Λ⁻¹∂x", |xi| Complex64::new(0.0, xi / (1.0 + xi * xi)))
    }

    /// Pointwise product of two symbols.
    pub fn compose(&self, other: &MultiplierSymbol) -> Self {
        let (a, b) = (self.rule.clone(), other.rule.clone());
        Self::new(format!("{}·{}", other.name, self.name), move |xi| a(xi) * b(xi))
    }
}

impl fmt::Debug for MultiplierSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MultiplierSymbol").field("name", &self.name).finish()
    }
}

/// `F⁻¹ m F f`, projected back onto real fields. Odd symbols lose the
/// unpaired Nyquist mode in that projection.
pub fn apply_multiplier(f: &GridFunction, m: &MultiplierSymbol) -> Result<GridFunction, SpectralError> {
    let xis = f.grid.wavenumbers();
    let mut coeffs = Vec::with_capacity(xis.len());
    for (&xi, &c) in xis.iter().zip(&f.coeffs) {
        let value = m.eval(xi);
        if !(value.re.is_finite() && value.im.is_finite()) {
            return Err(SpectralError::NonFiniteSymbol {
                name: m.name.clone(),
                xi,
            });
        }
        coeffs.push(value * c);
    }
    GridFunction::from_coefficients(&f.grid, coeffs)
}

pub fn derivative(f: &GridFunction) -> GridFunction {
    let nyq = f.grid.nyquist_index();
    let xis = f.grid.wavenumbers();
    f.map_coefficients(|j, c| {
        if j == nyq {
            Complex64::new(0.0, 0.0)
        } else {
            c * Complex64::new(0.0, xis[j])
        }
    })
}

/// `Λ⁻¹∂x f` with symbol `iξ / (1 + ξ²)`.
pub fn lambda_inv_dx(f: &GridFunction) -> GridFunction {
    let nyq = f.grid.nyquist_index();
    let xis = f.grid.wavenumbers();
    f.map_coefficients(|j, c| {
        if j == nyq {
            Complex64::new(0.0, 0.0)
        } else {
            let xi = xis[j];
            c * Complex64::new(0.0, xi / (1.0 + xi * xi))
        }
    })
}

/// 2/3-rule truncation: zeroes every mode with `|k| > N/3`.
pub fn dealias(f: &GridFunction) -> GridFunction {
    let n = f.grid.len() as i64;
    let modes = f.grid.modes();
    f.map_coefficients(|j, c| {
        if 3 * modes[j].abs() > n {
            Complex64::new(0.0, 0.0)
        } else {
            c
        }
    })
}

/// Discrete `L^p` norm with uniform quadrature: `(dx Σ |f_j|^p)^{1/p}`,
/// or the sample maximum for `p = ∞`.
pub fn lp_norm(f: &GridFunction, p: f64) -> Result<f64, SpectralError> {
    lp_norm_of_samples(f.samples(), f.grid.dx(), p)
}

pub(crate) fn lp_norm_of_samples(samples: &[f64], dx: f64, p: f64) -> Result<f64, SpectralError> {
    if p.is_nan() || p < 1.0 {
        return Err(SpectralError::InvalidExponent(p));
    }
    if p.is_infinite() {
        return Ok(samples.iter().fold(0.0, |m, v| m.max(v.abs())));
    }
    if p == 2.0 {
        return Ok((dx * samples.iter().map(|v| v * v).sum::<f64>()).sqrt());
    }
    if p == 1.0 {
        return Ok(dx * samples.iter().map(|v| v.abs()).sum::<f64>());
    }
    // Rescale by the maximum so large p does not overflow.
    let peak = samples.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if peak == 0.0 {
        return Ok(0.0);
    }
    let sum: f64 = samples.iter().map(|v| (v.abs() / peak).powf(p)).sum();
    Ok(peak * (dx * sum).powf(1.0 / p))
}
