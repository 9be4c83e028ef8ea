//! Periodic grids on the unit torus T^n (n = 1, 2), real/spectral transforms,
//! and spectral differential operators.
//!
//! Conventions, fixed once for the whole crate:
//!
//! - the torus has unit period in every axis, nodes at `x_i = i/M`;
//! - Fourier series `f(x) = Σ_k c(k) e^{2πi k·x}` over the mode set
//!   `{−M/2, …, M/2−1}^n`, so the Laplacian symbol is `−4π²|k|²`;
//! - fields are stored in real space row-major (last axis fastest), spectral
//!   views are ephemeral;
//! - after every spectral differentiation the Nyquist mode `k = −M/2` is
//!   zeroed on the differentiated axis so that derivatives of real fields
//!   stay real.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftDirection, FftPlanner};

use crate::error::MvgfError;
use crate::Result;

/// Uniform periodic grid on T^n with M nodes per axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TorusGrid {
    dim: usize,
    points_per_axis: usize,
}

/// Builds a grid, rejecting odd M, M < 8 and dimensions outside {1, 2}.
pub fn create_grid(dim: usize, points_per_axis: usize) -> Result<TorusGrid> {
    if dim != 1 && dim != 2 {
        return Err(MvgfError::InvalidGrid(format!(
            "unsupported dimension {dim} (supported: 1, 2)"
        )));
    }
    if points_per_axis < 8 {
        return Err(MvgfError::InvalidGrid(format!(
            "points_per_axis = {points_per_axis} < 8"
        )));
    }
    if !points_per_axis.is_multiple_of(2) {
        return Err(MvgfError::InvalidGrid(format!(
            "points_per_axis = {points_per_axis} must be even"
        )));
    }
    Ok(TorusGrid {
        dim,
        points_per_axis,
    })
}

impl TorusGrid {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn points_per_axis(&self) -> usize {
        self.points_per_axis
    }

    /// Grid spacing h = 1/M; spacing * points_per_axis = 1 exactly.
    pub fn spacing(&self) -> f64 {
        1.0 / self.points_per_axis as f64
    }

    /// Total number of nodes, M^dim.
    pub fn len(&self) -> usize {
        self.points_per_axis.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Signed mode number for a flat index along one axis:
    /// j -> j for j < M/2, j - M otherwise (Nyquist is −M/2).
    pub fn mode_of_index(&self, j: usize) -> i64 {
        let m = self.points_per_axis as i64;
        let j = j as i64;
        if j < m / 2 {
            j
        } else {
            j - m
        }
    }

    /// Flat array index of a signed mode on one axis.
    pub fn index_of_mode(&self, k: i64) -> usize {
        let m = self.points_per_axis as i64;
        (k.rem_euclid(m)) as usize
    }

    /// Node coordinates of a flat data index.
    pub fn node(&self, flat: usize) -> [f64; 2] {
        let m = self.points_per_axis;
        let h = self.spacing();
        match self.dim {
            1 => [flat as f64 * h, 0.0],
            _ => [(flat / m) as f64 * h, (flat % m) as f64 * h],
        }
    }

    /// Signed mode vector of a flat data index (second entry 0 in 1-D).
    pub fn mode(&self, flat: usize) -> [i64; 2] {
        let m = self.points_per_axis;
        match self.dim {
            1 => [self.mode_of_index(flat), 0],
            _ => [self.mode_of_index(flat / m), self.mode_of_index(flat % m)],
        }
    }

    /// |k|² for a flat index.
    pub fn mode_norm_sq(&self, flat: usize) -> f64 {
        let k = self.mode(flat);
        (k[0] * k[0] + k[1] * k[1]) as f64
    }

    /// True if any axis of the flat index sits on the Nyquist mode −M/2.
    pub fn is_nyquist(&self, flat: usize) -> bool {
        let k = self.mode(flat);
        let ny = -(self.points_per_axis as i64) / 2;
        k[..self.dim].contains(&ny)
    }

    /// 2/3-rule dealiasing mask: true where the mode is kept
    /// (|k|_inf <= M/3).
    pub fn dealias_keep(&self, flat: usize) -> bool {
        let cutoff = (self.points_per_axis / 3) as i64;
        let k = self.mode(flat);
        k[..self.dim].iter().all(|&kj| kj.abs() <= cutoff)
    }

    fn check_same(&self, other: &TorusGrid, what: &str) -> Result<()> {
        if self != other {
            return Err(MvgfError::GridMismatch(format!(
                "{what}: {}^{} vs {}^{}",
                self.points_per_axis, self.dim, other.points_per_axis, other.dim
            )));
        }
        Ok(())
    }
}

/// Scalar or vector field sampled at the grid nodes.
///
/// Storage is channel-major: channel c occupies `data[c*len .. (c+1)*len]`
/// in row-major node order.
#[derive(Debug, Clone)]
pub struct RealField {
    grid: TorusGrid,
    channels: usize,
    data: Vec<f64>,
}

impl RealField {
    pub fn zeros(grid: TorusGrid, channels: usize) -> Self {
        RealField {
            grid,
            channels,
            data: vec![0.0; grid.len() * channels],
        }
    }

    pub fn from_data(grid: TorusGrid, channels: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != grid.len() * channels {
            return Err(MvgfError::ChannelMismatch(format!(
                "data length {} != {} nodes x {} channels",
                data.len(),
                grid.len(),
                channels
            )));
        }
        if !data.iter().all(|v| v.is_finite()) {
            return Err(MvgfError::NonFinite("real field data".into()));
        }
        Ok(RealField {
            grid,
            channels,
            data,
        })
    }

    /// Samples a scalar function of the node coordinates.
    pub fn from_fn(grid: TorusGrid, f: impl Fn(&[f64]) -> f64) -> Self {
        let mut data = Vec::with_capacity(grid.len());
        for i in 0..grid.len() {
            let x = grid.node(i);
            data.push(f(&x[..grid.dim()]));
        }
        RealField {
            grid,
            channels: 1,
            data,
        }
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn channel(&self, c: usize) -> &[f64] {
        let n = self.grid.len();
        &self.data[c * n..(c + 1) * n]
    }

    pub fn channel_mut(&mut self, c: usize) -> &mut [f64] {
        let n = self.grid.len();
        &mut self.data[c * n..(c + 1) * n]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    /// Discrete mean of the first channel (= integral over the unit torus).
    pub fn mean(&self) -> f64 {
        let n = self.grid.len();
        self.data[..n].iter().sum::<f64>() / n as f64
    }

    pub fn min(&self) -> f64 {
        self.data.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.data.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Pointwise Euclidean norm over channels, max over nodes.
    pub fn max_pointwise_norm(&self) -> f64 {
        let n = self.grid.len();
        (0..n)
            .map(|i| {
                (0..self.channels)
                    .map(|c| self.data[c * n + i].powi(2))
                    .sum::<f64>()
                    .sqrt()
            })
            .fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

impl PartialEq for RealField {
    fn eq(&self, other: &Self) -> bool {
        self.grid == other.grid && self.channels == other.channels && self.data == other.data
    }
}

/// Fourier coefficients of a field, same layout as [`RealField`].
#[derive(Debug, Clone)]
pub struct SpectralField {
    grid: TorusGrid,
    channels: usize,
    coeffs: Vec<Complex64>,
}

impl SpectralField {
    pub fn zeros(grid: TorusGrid, channels: usize) -> Self {
        SpectralField {
            grid,
            channels,
            coeffs: vec![Complex64::ZERO; grid.len() * channels],
        }
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn channel(&self, c: usize) -> &[Complex64] {
        let n = self.grid.len();
        &self.coeffs[c * n..(c + 1) * n]
    }

    pub fn channel_mut(&mut self, c: usize) -> &mut [Complex64] {
        let n = self.grid.len();
        &mut self.coeffs[c * n..(c + 1) * n]
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    /// Coefficient of a signed mode vector on the first channel.
    pub fn coeff_at_mode(&self, k: &[i64]) -> Complex64 {
        let m = self.grid.points_per_axis();
        let flat = match self.grid.dim() {
            1 => self.grid.index_of_mode(k[0]),
            _ => self.grid.index_of_mode(k[0]) * m + self.grid.index_of_mode(k[1]),
        };
        self.coeffs[flat]
    }

    /// Zeroes every mode with |k|_inf above the cutoff, all channels.
    pub fn truncate_above(&mut self, cutoff: i64) {
        let n = self.grid.len();
        for c in 0..self.channels {
            for i in 0..n {
                let k = self.grid.mode(i);
                if k[..self.grid.dim()].iter().any(|&kj| kj.abs() > cutoff) {
                    self.coeffs[c * n + i] = Complex64::ZERO;
                }
            }
        }
    }
}

// FFT plans are cached per (length, direction); the cache is synchronized so
// transforms may be called from multiple threads.
type PlanCache = Mutex<HashMap<(usize, bool), Arc<dyn Fft<f64>>>>;

static PLAN_CACHE: OnceLock<PlanCache> = OnceLock::new();

fn plan(len: usize, forward: bool) -> Arc<dyn Fft<f64>> {
    let cache = PLAN_CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().expect("fft plan cache poisoned");
    guard
        .entry((len, forward))
        .or_insert_with(|| {
            let mut planner = FftPlanner::new();
            let dir = if forward {
                FftDirection::Forward
            } else {
                FftDirection::Inverse
            };
            planner.plan_fft(len, dir)
        })
        .clone()
}

/// In-place FFT over all axes of one channel buffer (row-major, M^dim long).
fn fft_nd(grid: &TorusGrid, buf: &mut [Complex64], forward: bool) {
    let m = grid.points_per_axis();
    let p = plan(m, forward);
    let mut scratch = vec![Complex64::ZERO; p.get_inplace_scratch_len()];
    match grid.dim() {
        1 => p.process_with_scratch(buf, &mut scratch),
        _ => {
            // rows (contiguous)
            for row in buf.chunks_exact_mut(m) {
                p.process_with_scratch(row, &mut scratch);
            }
            // columns via gather/scatter
            let mut col = vec![Complex64::ZERO; m];
            for j in 0..m {
                for i in 0..m {
                    col[i] = buf[i * m + j];
                }
                p.process_with_scratch(&mut col, &mut scratch);
                for i in 0..m {
                    buf[i * m + j] = col[i];
                }
            }
        }
    }
}

/// Forward transform: coefficients of `f(x) = Σ_k c(k) e^{2πi k·x}`.
pub fn forward_transform(f: &RealField) -> SpectralField {
    let grid = *f.grid();
    let n = grid.len();
    let scale = 1.0 / n as f64;
    let mut out = SpectralField::zeros(grid, f.channels());
    for c in 0..f.channels() {
        let buf = out.channel_mut(c);
        for (dst, &src) in buf.iter_mut().zip(f.channel(c)) {
            *dst = Complex64::new(src, 0.0);
        }
        fft_nd(&grid, buf, true);
        for v in buf.iter_mut() {
            *v *= scale;
        }
    }
    out
}

/// Inverse transform; imaginary residue of Hermitian inputs is discarded.
pub fn inverse_transform(c: &SpectralField) -> RealField {
    let grid = *c.grid();
    let mut out = RealField::zeros(grid, c.channels());
    let mut buf = vec![Complex64::ZERO; grid.len()];
    for ch in 0..c.channels() {
        buf.copy_from_slice(c.channel(ch));
        fft_nd(&grid, &mut buf, false);
        for (dst, src) in out.channel_mut(ch).iter_mut().zip(&buf) {
            *dst = src.re;
        }
    }
    out
}

/// Spectral gradient of a scalar field: component j carries `2πi k_j c(k)`.
///
/// The Nyquist mode on the differentiated axis is zeroed to keep derivatives
/// of real fields real.
pub fn spectral_gradient(f: &SpectralField) -> Result<SpectralField> {
    if f.channels() != 1 {
        return Err(MvgfError::ChannelMismatch(
            "spectral_gradient expects a scalar field".into(),
        ));
    }
    let grid = *f.grid();
    let dim = grid.dim();
    let n = grid.len();
    let ny = -(grid.points_per_axis() as i64) / 2;
    let mut out = SpectralField::zeros(grid, dim);
    for axis in 0..dim {
        let dst = out.channel_mut(axis);
        for i in 0..n {
            let k = grid.mode(i)[axis];
            dst[i] = if k == ny {
                Complex64::ZERO
            } else {
                Complex64::new(0.0, 2.0 * PI * k as f64) * f.coeffs()[i]
            };
        }
    }
    Ok(out)
}

/// Spectral divergence of a vector field: `Σ_j 2πi k_j c_j(k)`.
pub fn spectral_divergence(v: &SpectralField) -> Result<SpectralField> {
    let grid = *v.grid();
    let dim = grid.dim();
    if v.channels() != dim {
        return Err(MvgfError::ChannelMismatch(format!(
            "spectral_divergence expects {dim} channels, got {}",
            v.channels()
        )));
    }
    let n = grid.len();
    let ny = -(grid.points_per_axis() as i64) / 2;
    let mut out = SpectralField::zeros(grid, 1);
    for axis in 0..dim {
        let src = v.channel(axis);
        let dst = out.channel_mut(0);
        for i in 0..n {
            let k = grid.mode(i)[axis];
            if k != ny {
                dst[i] += Complex64::new(0.0, 2.0 * PI * k as f64) * src[i];
            }
        }
    }
    Ok(out)
}

/// Real-space gradient of a real scalar field (forward, multiply, inverse).
pub fn gradient_of(f: &RealField) -> Result<RealField> {
    Ok(inverse_transform(&spectral_gradient(&forward_transform(
        f,
    ))?))
}

/// Real-space divergence of a real vector field.
pub fn divergence_of(v: &RealField) -> Result<RealField> {
    Ok(inverse_transform(&spectral_divergence(
        &forward_transform(v),
    )?))
}

/// Nonnegative unit-mass scalar field: the state ρ of the flow.
#[derive(Debug, Clone)]
pub struct DensityField {
    field: RealField,
}

/// Values may undershoot zero by at most this much (transient scheme noise).
pub const NEGATIVITY_TOL: f64 = 1e-10;

/// Positivity floor used when evaluating log ρ and clipping undershoots.
pub const POSITIVITY_FLOOR: f64 = 1e-12;

impl DensityField {
    /// Wraps a scalar field as a density, enforcing the negativity tolerance
    /// and |mass − 1| <= 1e−12.
    pub fn new(field: RealField) -> Result<Self> {
        if field.channels() != 1 {
            return Err(MvgfError::ChannelMismatch(
                "density must be scalar".into(),
            ));
        }
        if !field.is_finite() {
            return Err(MvgfError::NonFinite("density field".into()));
        }
        if field.min() < -NEGATIVITY_TOL {
            return Err(MvgfError::Precondition(format!(
                "density has negative values (min {:.3e})",
                field.min()
            )));
        }
        let mass = field.mean();
        if (mass - 1.0).abs() > 1e-12 {
            return Err(MvgfError::Precondition(format!(
                "density mass {mass} deviates from 1 by more than 1e-12"
            )));
        }
        Ok(DensityField { field })
    }

    /// Wraps after dividing by the current mass (mass must be positive).
    pub fn normalized(mut field: RealField) -> Result<Self> {
        let mass = field.mean();
        if !(mass.is_finite() && mass > 0.0) {
            return Err(MvgfError::Precondition(format!(
                "cannot normalize density with mass {mass}"
            )));
        }
        for v in field.data_mut() {
            *v /= mass;
        }
        DensityField::new(field)
    }

    pub fn uniform(grid: TorusGrid) -> Self {
        let field = RealField::from_data(grid, 1, vec![1.0; grid.len()]).expect("uniform field");
        DensityField { field }
    }

    /// Wraps without the mass/positivity checks; for internal and test use
    /// where the invariants are deliberately relaxed.
    #[allow(dead_code)]
    pub(crate) fn from_field_unchecked(field: RealField) -> Self {
        DensityField { field }
    }

    pub fn grid(&self) -> &TorusGrid {
        self.field.grid()
    }

    pub fn field(&self) -> &RealField {
        &self.field
    }

    pub fn values(&self) -> &[f64] {
        self.field.channel(0)
    }

    pub fn mass(&self) -> f64 {
        self.field.mean()
    }

    pub fn min(&self) -> f64 {
        self.field.min()
    }

    pub fn max(&self) -> f64 {
        self.field.max()
    }
}

/// Discrete mean of the pointwise product of two scalar fields.
pub fn mean_product(a: &RealField, b: &RealField) -> Result<f64> {
    a.grid().check_same(b.grid(), "mean_product")?;
    let n = a.grid().len();
    Ok(a.channel(0)
        .iter()
        .zip(b.channel(0))
        .map(|(x, y)| x * y)
        .sum::<f64>()
        / n as f64)
}

/// Spectral inner product `Σ_k a(k) conj(b(k))` of the first channels, which
/// by Parseval equals the discrete mean of the pointwise product.
pub fn spectral_inner(a: &SpectralField, b: &SpectralField) -> Result<Complex64> {
    a.grid().check_same(b.grid(), "spectral_inner")?;
    Ok(a.channel(0)
        .iter()
        .zip(b.channel(0))
        .map(|(x, y)| x * y.conj())
        .sum())
}

pub(crate) fn check_same_grid(a: &TorusGrid, b: &TorusGrid, what: &str) -> Result<()> {
    a.check_same(b, what)
}
