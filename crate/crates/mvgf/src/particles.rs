//! N-particle Langevin dynamics on the torus and its empirical densities.
//!
//! The particle system follows
//!
//! ```text
//! dX^i = −(∇V(X^i) + (1/N) Σ_{j≠i} ∇W(X^i − X^j)) dt + √2 dB^i,
//! ```
//!
//! the gradient dynamics of `H_N = Σ V(X^i) + (1/(2N)) Σ_{i≠j} W(X^i−X^j)`:
//! differentiating H_N in X^i produces the (1/N)-normalized single-counted
//! sum because W is centrally symmetric, so the two appearances of the
//! (i, j) pair in the double sum contribute equal forces. The noise
//! coefficient √2 matches the unit diffusion Δρ of the mean-field equation.
//!
//! Forces are particle-mesh: each step bins the particles into a histogram,
//! convolves with the spectrally truncated ∇W multiplier, adds ∇V, and
//! interpolates the resulting grid table bilinearly at the particle
//! positions. The O(N²) pair loop never runs (a direct-sum evaluator is
//! kept for two-particle diagnostics); the price is a self-interaction of
//! the order of the truncated kernel, measurable on a two-particle test.
//!
//! Noise is counter-based: the Gaussian pair of particle i at step s is a
//! pure function of (seed, i, s) (splitmix64 bit mixing, then Box-Muller),
//! so trajectories are bitwise reproducible regardless of scheduling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

use crate::energy::EnergyReport;
use crate::error::MvgfError;
use crate::grid::{
    check_same_grid, forward_transform, inverse_transform, spectral_gradient, DensityField,
    RealField, TorusGrid,
};
use crate::potentials::KernelMultiplier;
use crate::Result;

/// Positions of N particles on the torus with a reproducible noise stream.
#[derive(Debug, Clone)]
pub struct ParticleState {
    n_particles: usize,
    dim: usize,
    /// Row-major: particle i occupies `positions[i*dim .. (i+1)*dim]`.
    positions: Vec<f64>,
    seed: u64,
    step: u64,
}

impl ParticleState {
    pub fn n_particles(&self) -> usize {
        self.n_particles
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn positions(&self) -> &[f64] {
        &self.positions
    }

    pub fn position(&self, i: usize) -> &[f64] {
        &self.positions[i * self.dim..(i + 1) * self.dim]
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn step_index(&self) -> u64 {
        self.step
    }

    /// Permutes particle order (noise streams follow the new indices).
    pub fn permuted(&self, perm: &[usize]) -> ParticleState {
        let mut positions = Vec::with_capacity(self.positions.len());
        for &p in perm {
            positions.extend_from_slice(self.position(p));
        }
        ParticleState {
            positions,
            ..*self
        }
    }
}

/// Density estimate produced by Fejer smoothing of the particle histogram.
#[derive(Debug, Clone)]
pub struct EmpiricalDensity {
    pub base: DensityField,
    pub bandwidth_modes: usize,
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn unit_open(bits: u64) -> f64 {
    // (0, 1): never exactly zero, safe inside log
    (((bits >> 11) as f64) + 0.5) / (1u64 << 53) as f64
}

/// Standard Gaussian pair for particle `i` at step `s`: a pure function of
/// the key, independent of evaluation order.
fn gaussian_pair(seed: u64, particle: u64, step: u64) -> (f64, f64) {
    let mut state = seed
        ^ particle.wrapping_mul(0x9E37_79B9_7F4A_7C15)
        ^ step.wrapping_mul(0xD1B5_4A32_D192_ED03);
    // decorrelate the key before drawing
    let _ = splitmix64(&mut state);
    let u1 = unit_open(splitmix64(&mut state));
    let u2 = unit_open(splitmix64(&mut state));
    let r = (-2.0 * u1.ln()).sqrt();
    let phase = 2.0 * PI * u2;
    (r * phase.cos(), r * phase.sin())
}

/// Initial condition for the particle sampler.
pub enum ParticleInit<'a> {
    Uniform,
    Density(&'a DensityField),
}

/// Draws N i.i.d. samples: inverse CDF in 1-D, rejection against `ρ_max` in
/// 2-D. Identical (seed, config) inputs give identical positions.
pub fn init_particles(
    n: usize,
    dim: usize,
    seed: u64,
    init: ParticleInit,
) -> Result<ParticleState> {
    if n == 0 {
        return Err(MvgfError::Precondition("need at least one particle".into()));
    }
    if dim != 1 && dim != 2 {
        return Err(MvgfError::Precondition(format!(
            "unsupported particle dimension {dim}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut positions = Vec::with_capacity(n * dim);
    match init {
        ParticleInit::Uniform => {
            for _ in 0..n * dim {
                positions.push(rng.gen::<f64>());
            }
        }
        ParticleInit::Density(rho) => {
            let grid = rho.grid();
            if grid.dim() != dim {
                return Err(MvgfError::GridMismatch(
                    "initial density dimension differs from particle dimension".into(),
                ));
            }
            let m = grid.points_per_axis();
            let h = grid.spacing();
            match dim {
                1 => {
                    // piecewise-constant cells [x_i − h/2, x_i + h/2)
                    let mut cumulative = Vec::with_capacity(m);
                    let mut acc = 0.0;
                    let total: f64 = rho.values().iter().map(|v| v.max(0.0)).sum();
                    for &v in rho.values() {
                        acc += v.max(0.0) / total;
                        cumulative.push(acc);
                    }
                    *cumulative.last_mut().unwrap() = 1.0;
                    for _ in 0..n {
                        let u = rng.gen::<f64>();
                        let cell = match cumulative
                            .binary_search_by(|c| c.partial_cmp(&u).unwrap())
                        {
                            Ok(idx) | Err(idx) => idx.min(m - 1),
                        };
                        let lo = if cell == 0 { 0.0 } else { cumulative[cell - 1] };
                        let frac = if cumulative[cell] > lo {
                            (u - lo) / (cumulative[cell] - lo)
                        } else {
                            0.5
                        };
                        let x = (cell as f64 + frac - 0.5) * h;
                        positions.push(x.rem_euclid(1.0));
                    }
                }
                _ => {
                    let rho_max = rho.max();
                    let mut proposed = 0u64;
                    let mut accepted = 0usize;
                    while accepted < n {
                        proposed += 1;
                        let x = rng.gen::<f64>();
                        let y = rng.gen::<f64>();
                        let value = bilinear(rho.field(), 0, &[x, y]);
                        if rng.gen::<f64>() * rho_max <= value {
                            positions.push(x);
                            positions.push(y);
                            accepted += 1;
                        }
                        if proposed >= 1000 && (accepted as f64) < 0.01 * proposed as f64 {
                            return Err(MvgfError::Precondition(format!(
                                "rejection sampling efficiency below 1% \
                                 ({accepted}/{proposed})"
                            )));
                        }
                    }
                }
            }
        }
    }
    Ok(ParticleState {
        n_particles: n,
        dim,
        positions,
        seed,
        step: 0,
    })
}

/// Periodic bilinear interpolation of one channel at a point in [0,1)^dim.
pub fn bilinear(field: &RealField, channel: usize, x: &[f64]) -> f64 {
    let grid = field.grid();
    let m = grid.points_per_axis();
    let h = grid.spacing();
    let data = field.channel(channel);
    match grid.dim() {
        1 => {
            let u = x[0].rem_euclid(1.0) / h;
            let i0 = u.floor() as usize % m;
            let f = u - u.floor();
            let i1 = (i0 + 1) % m;
            (1.0 - f) * data[i0] + f * data[i1]
        }
        _ => {
            let u = x[0].rem_euclid(1.0) / h;
            let v = x[1].rem_euclid(1.0) / h;
            let i0 = u.floor() as usize % m;
            let j0 = v.floor() as usize % m;
            let (fu, fv) = (u - u.floor(), v - v.floor());
            let i1 = (i0 + 1) % m;
            let j1 = (j0 + 1) % m;
            (1.0 - fu) * (1.0 - fv) * data[i0 * m + j0]
                + (1.0 - fu) * fv * data[i0 * m + j1]
                + fu * (1.0 - fv) * data[i1 * m + j0]
                + fu * fv * data[i1 * m + j1]
        }
    }
}

/// Nearest-node histogram of the particle positions, normalized to unit
/// mass (mean 1 on the grid).
pub fn histogram(state: &ParticleState, grid: TorusGrid) -> Result<DensityField> {
    if grid.dim() != state.dim {
        return Err(MvgfError::GridMismatch(
            "histogram grid dimension differs from particles".into(),
        ));
    }
    let m = grid.points_per_axis();
    let mut counts = vec![0.0f64; grid.len()];
    for i in 0..state.n_particles {
        let p = state.position(i);
        let idx = match state.dim {
            1 => (p[0].rem_euclid(1.0) * m as f64).round() as usize % m,
            _ => {
                let i0 = (p[0].rem_euclid(1.0) * m as f64).round() as usize % m;
                let j0 = (p[1].rem_euclid(1.0) * m as f64).round() as usize % m;
                i0 * m + j0
            }
        };
        counts[idx] += 1.0;
    }
    let scale = grid.len() as f64 / state.n_particles as f64;
    for c in counts.iter_mut() {
        *c *= scale;
    }
    DensityField::normalized(RealField::from_data(grid, 1, counts)?)
}

/// Jackson-kernel taper: the normalized self-convolution of the Fejer
/// triangle, a cubic B-spline supported on |k| ≤ 2 m_half. The kernel is
/// the square of a Fejer-type kernel, hence nonnegative, and its taper is
/// quadratically flat at low modes (1 − 1.5 t² + 0.75 t³ for t = |k|/m_half
/// ≤ 1), so smoothing barely biases the resolved structure.
fn jackson_taper(k_abs: f64, m_half: f64) -> f64 {
    let t = k_abs / m_half;
    if t <= 1.0 {
        1.0 - 1.5 * t * t + 0.75 * t * t * t
    } else if t <= 2.0 {
        0.25 * (2.0 - t).powi(3)
    } else {
        0.0
    }
}

/// Histogram smoothed by a nonnegative spectral kernel (Jackson taper,
/// tensor product in 2-D) with modes above `bandwidth_modes` zeroed; unit
/// mass by construction.
pub fn empirical_density(
    state: &ParticleState,
    grid: TorusGrid,
    bandwidth_modes: usize,
) -> Result<EmpiricalDensity> {
    if bandwidth_modes > grid.points_per_axis() / 2 {
        return Err(MvgfError::Precondition(format!(
            "bandwidth_modes {bandwidth_modes} exceeds M/2"
        )));
    }
    let hist = histogram(state, grid)?;
    let mut hat = forward_transform(hist.field());
    let m_half = bandwidth_modes as f64 / 2.0;
    for i in 0..grid.len() {
        let k = grid.mode(i);
        let mut weight = 1.0;
        for &kj in &k[..grid.dim()] {
            weight *= jackson_taper(kj.abs() as f64, m_half);
        }
        hat.coeffs_mut()[i] *= weight;
    }
    let mut smooth = inverse_transform(&hat);
    for v in smooth.data_mut() {
        *v = v.max(0.0); // clamp transform roundoff
    }
    Ok(EmpiricalDensity {
        base: DensityField::normalized(smooth)?,
        bandwidth_modes,
    })
}

/// Grid table of the mean-field drift `−∇V − ∇(W * ρ_emp)` for the current
/// particle configuration; the W part is truncated at `smoothing_modes`.
pub fn mesh_drift(
    state: &ParticleState,
    grad_v: &RealField,
    mult: &KernelMultiplier,
    smoothing_modes: usize,
    grid: TorusGrid,
) -> Result<RealField> {
    check_same_grid(&grid, grad_v.grid(), "mesh_drift: ∇V")?;
    check_same_grid(&grid, mult.grid(), "mesh_drift: W")?;
    let hist = histogram(state, grid)?;
    let mut hat = forward_transform(hist.field());
    for (c, w) in hat.channel_mut(0).iter_mut().zip(mult.values()) {
        *c *= w;
    }
    hat.truncate_above(smoothing_modes as i64);
    let grad_w = inverse_transform(&spectral_gradient(&hat)?);
    let n = grid.len();
    let mut drift = RealField::zeros(grid, grid.dim());
    for c in 0..grid.dim() {
        for i in 0..n {
            drift.channel_mut(c)[i] = -(grad_v.channel(c)[i] + grad_w.channel(c)[i]);
        }
    }
    Ok(drift)
}

/// Direct O(N²) pair drift from a gridded ∇W table; diagnostic use
/// (self-interaction measurements, tiny N).
pub fn pair_drift(state: &ParticleState, grad_v: &RealField, grad_w: &RealField) -> Vec<f64> {
    let n = state.n_particles;
    let dim = state.dim;
    let mut out = vec![0.0; n * dim];
    for i in 0..n {
        let xi = state.position(i);
        let mut acc = [0.0f64; 2];
        for j in 0..n {
            if i == j {
                continue;
            }
            let xj = state.position(j);
            let diff: Vec<f64> = (0..dim).map(|c| xi[c] - xj[c]).collect();
            for (c, a) in acc.iter_mut().enumerate().take(dim) {
                *a += bilinear(grad_w, c, &diff);
            }
        }
        for c in 0..dim {
            out[i * dim + c] = -(bilinear(grad_v, c, xi) + acc[c] / n as f64);
        }
    }
    out
}

/// One Euler-Maruyama step against a precomputed drift table:
/// `X ← X + drift(X) dt + √(2 T dt) ξ`, positions wrapped into [0,1).
#[allow(clippy::neg_cmp_op_on_partial_ord)] // rejects NaN too
pub fn particle_step(
    state: &ParticleState,
    drift: &RealField,
    dt: f64,
    temperature: f64,
) -> Result<ParticleState> {
    if !(dt > 0.0) {
        return Err(MvgfError::Precondition(format!("dt must be > 0, got {dt}")));
    }
    let dim = state.dim;
    let noise_scale = (2.0 * temperature * dt).sqrt();
    let mut positions = Vec::with_capacity(state.positions.len());
    for i in 0..state.n_particles {
        let x = state.position(i);
        let (g0, g1) = gaussian_pair(state.seed, i as u64, state.step);
        let noise = [g0, g1];
        for c in 0..dim {
            let v = x[c] + bilinear(drift, c, x) * dt + noise_scale * noise[c];
            if !v.is_finite() {
                return Err(MvgfError::StepFailure {
                    t: state.step as f64 * dt,
                    reason: format!("non-finite position for particle {i} at step {}", state.step),
                });
            }
            positions.push(v.rem_euclid(1.0));
        }
    }
    Ok(ParticleState {
        n_particles: state.n_particles,
        dim,
        positions,
        seed: state.seed,
        step: state.step + 1,
    })
}

/// Configuration of a particle run (fixed step size).
#[derive(Debug, Clone)]
pub struct ParticleRunConfig {
    pub dt: f64,
    pub t_end: f64,
    pub temperature: f64,
    pub log_every: usize,
    pub snapshot_every: usize,
    pub bandwidth_modes: usize,
    pub smoothing_modes: usize,
}

/// Time series of smoothed densities and free-energy proxies.
#[derive(Debug)]
pub struct ParticleTrajectory {
    pub reports: Vec<EnergyReport>,
    pub densities: Vec<(f64, DensityField)>,
    pub final_state: ParticleState,
}

/// Advances the particle system with fixed dt, logging the smoothed density
/// and the free energy of the smoothed density at the configured cadence.
pub fn run_particles(
    state0: &ParticleState,
    v: &RealField,
    grad_v: &RealField,
    mult: &KernelMultiplier,
    grid: TorusGrid,
    cfg: &ParticleRunConfig,
) -> Result<ParticleTrajectory> {
    if cfg.log_every == 0 {
        return Err(MvgfError::Precondition("log_every must be >= 1".into()));
    }
    let steps = (cfg.t_end / cfg.dt).round().max(1.0) as usize;
    let mut state = state0.clone();
    let mut reports = Vec::new();
    let mut densities = Vec::new();

    let mut log_state = |t: f64, s: &ParticleState, keep_density: bool| -> Result<()> {
        let emp = empirical_density(s, grid, cfg.bandwidth_modes)?;
        let mut rep = crate::energy::free_energy(&emp.base, v, mult)?;
        rep.t = t;
        rep.dissipation = Some(crate::energy::dissipation_of(&emp.base, v, mult)?);
        reports.push(rep);
        if keep_density {
            densities.push((t, emp.base));
        }
        Ok(())
    };

    log_state(0.0, &state, true)?;
    for s in 1..=steps {
        let drift = mesh_drift(&state, grad_v, mult, cfg.smoothing_modes, grid)?;
        state = particle_step(&state, &drift, cfg.dt, cfg.temperature)?;
        let t = s as f64 * cfg.dt;
        let last = s == steps;
        if s % cfg.log_every == 0 || last {
            let keep = last || (cfg.snapshot_every > 0 && s % cfg.snapshot_every == 0);
            log_state(t, &state, keep)?;
        }
    }
    Ok(ParticleTrajectory {
        reports,
        densities,
        final_state: state,
    })
}
