//! Confinement potentials V and interaction kernels W.
//!
//! Interaction kernels are realized as Fourier multipliers so that the
//! convolution `W*ρ` is a mode-wise product. The chemotaxis Green functions
//! are defined spectrally through their defining PDEs:
//!
//! - Newtonian (zero-mean Green function of Δ, `ΔG = δ0 − 1`, ∫G = 0):
//!   `Ŵ(k) = −χ / (4π²|k|²)` for k ≠ 0 and `Ŵ(0) = 0`;
//! - Yukawa (Green function of Δ − α, `ΔG − αG = δ0`, α > 0):
//!   `Ŵ(k) = −χ / (4π²|k|² + α)` for all k.
//!
//! With χ > 0 both multipliers are negative, which reproduces the attractive
//! chemotactic drift: at the uniform state, mode k of the linearized flow
//! relaxes at rate `4π²|k|² (1 + Ŵ(k))`, i.e. `4π²|k|² − χ` in the Newtonian
//! case, so attraction wins for `χ > 4π²`.
//!
//! Radial kernels `W(z) = Σ_i L_i d(0,z)^{γ_i}` are sampled in real space
//! (d = geodesic torus distance) and transformed; the growth restriction
//! `γ ≥ 2−n` keeps the profile integrable, and on the supported dimensions
//! it rules out negative powers entirely (γ ≥ 1 for n = 1, γ ≥ 0 for n = 2).

use std::f64::consts::PI;

use crate::error::MvgfError;
use crate::grid::{
    check_same_grid, forward_transform, gradient_of, inverse_transform, spectral_gradient,
    DensityField, RealField, SpectralField, TorusGrid,
};
use crate::Result;

/// Mode/amplitude pair of a cosine term `a · cos(2π k·x)`.
pub type CosineTerm = ([i64; 2], f64);

/// Declarative description of the confinement potential V.
#[derive(Debug, Clone, PartialEq)]
pub enum ConfinementSpec {
    Zero,
    /// `V(x) = Σ a_k cos(2π k·x)`; real-analytic by construction.
    CosineSum(Vec<CosineTerm>),
    /// Arbitrary gridded samples (caller is responsible for smoothness).
    Tabulated(RealField),
}

/// Declarative description of the interaction kernel W.
#[derive(Debug, Clone, PartialEq)]
pub enum InteractionSpec {
    Zero,
    /// Explicit `Ŵ(k)` table; entries are applied to ±k simultaneously so
    /// central symmetry holds by construction.
    FourierMultiplier(Vec<([i64; 2], f64)>),
    /// `W = χ G_0` with the zero-mean Green function of Δ.
    NewtonianGreen { chi: f64 },
    /// `W = χ G_α` with the Green function of Δ − α, α > 0.
    YukawaGreen { chi: f64, alpha: f64 },
    /// `W(z) = Σ_i L_i d(0,z)^{γ_i}`, γ_i ≥ 2−n.
    RadialPower(Vec<(f64, f64)>),
    /// `W(z) = Σ a_k cos(2π k·z)`.
    CosineSum(Vec<CosineTerm>),
}

/// Interaction kernel as a real, even Fourier multiplier on a grid.
#[derive(Debug, Clone)]
pub struct KernelMultiplier {
    grid: TorusGrid,
    w_hat: Vec<f64>,
}

impl KernelMultiplier {
    pub fn zero(grid: TorusGrid) -> Self {
        KernelMultiplier {
            grid,
            w_hat: vec![0.0; grid.len()],
        }
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    /// Multiplier value at a flat spectral index.
    pub fn value(&self, flat: usize) -> f64 {
        self.w_hat[flat]
    }

    pub fn values(&self) -> &[f64] {
        &self.w_hat
    }

    /// Multiplier at a signed mode vector.
    pub fn value_at_mode(&self, k: &[i64]) -> f64 {
        let m = self.grid.points_per_axis();
        let flat = match self.grid.dim() {
            1 => self.grid.index_of_mode(k[0]),
            _ => self.grid.index_of_mode(k[0]) * m + self.grid.index_of_mode(k[1]),
        };
        self.w_hat[flat]
    }

    pub fn is_zero(&self) -> bool {
        self.w_hat.iter().all(|&v| v == 0.0)
    }

    /// Max |Ŵ(k) − Ŵ(−k)| over all modes; zero by construction.
    pub fn evenness_defect(&self) -> f64 {
        let g = &self.grid;
        let mut worst = 0.0f64;
        for i in 0..g.len() {
            let k = g.mode(i);
            let neg = [-k[0], -k[1]];
            worst = worst.max((self.value(i) - self.value_at_mode(&neg[..g.dim()])).abs());
        }
        worst
    }
}

/// Samples V on the grid and differentiates it spectrally from the same
/// samples. Returns `(V, ∇V)`.
pub fn build_confinement(
    spec: &ConfinementSpec,
    grid: TorusGrid,
) -> Result<(RealField, RealField)> {
    let v = match spec {
        ConfinementSpec::Zero => RealField::zeros(grid, 1),
        ConfinementSpec::CosineSum(terms) => {
            for (_, a) in terms {
                if !a.is_finite() {
                    return Err(MvgfError::InvalidSpec(
                        "cosine_sum amplitude must be finite".into(),
                    ));
                }
            }
            sample_cosine_sum(grid, terms)
        }
        ConfinementSpec::Tabulated(field) => {
            check_same_grid(field.grid(), &grid, "tabulated confinement")?;
            if field.channels() != 1 {
                return Err(MvgfError::ChannelMismatch(
                    "tabulated confinement must be scalar".into(),
                ));
            }
            field.clone()
        }
    };
    let grad = gradient_of(&v)?;
    Ok((v, grad))
}

/// Samples `Σ a_k cos(2π k·x)` at the grid nodes.
pub fn sample_cosine_sum(grid: TorusGrid, terms: &[CosineTerm]) -> RealField {
    let dim = grid.dim();
    RealField::from_fn(grid, |x| {
        terms
            .iter()
            .map(|(k, a)| {
                let phase: f64 = (0..dim).map(|j| k[j] as f64 * x[j]).sum();
                a * (2.0 * PI * phase).cos()
            })
            .sum()
    })
}

/// Realizes an interaction spec as a Fourier multiplier on the grid.
pub fn kernel_multiplier(spec: &InteractionSpec, grid: TorusGrid) -> Result<KernelMultiplier> {
    let n = grid.dim();
    let mut mult = KernelMultiplier::zero(grid);
    match spec {
        InteractionSpec::Zero => {}
        InteractionSpec::FourierMultiplier(entries) => {
            for (k, a) in entries {
                if !a.is_finite() {
                    return Err(MvgfError::InvalidSpec(
                        "fourier_multiplier amplitude must be finite".into(),
                    ));
                }
                set_even_pair(&mut mult, k, *a)?;
            }
        }
        InteractionSpec::NewtonianGreen { chi } => {
            for i in 0..grid.len() {
                let k2 = grid.mode_norm_sq(i);
                mult.w_hat[i] = if k2 == 0.0 {
                    0.0 // zero-mean convention
                } else {
                    -chi / (4.0 * PI * PI * k2)
                };
            }
        }
        InteractionSpec::YukawaGreen { chi, alpha } => {
            #[allow(clippy::neg_cmp_op_on_partial_ord)] // rejects NaN too
            if !(*alpha > 0.0) {
                return Err(MvgfError::InvalidSpec(format!(
                    "yukawa_green requires alpha > 0 (got {alpha}): the screened \
                     Green function of Δ − α is only defined for positive screening"
                )));
            }
            for i in 0..grid.len() {
                let k2 = grid.mode_norm_sq(i);
                mult.w_hat[i] = -chi / (4.0 * PI * PI * k2 + alpha);
            }
        }
        InteractionSpec::RadialPower(terms) => {
            let min_gamma = 2.0 - n as f64;
            for (l, gamma) in terms {
                if !(l.is_finite() && gamma.is_finite()) {
                    return Err(MvgfError::InvalidSpec(
                        "radial_power coefficients must be finite".into(),
                    ));
                }
                if *gamma < min_gamma {
                    return Err(MvgfError::InvalidSpec(format!(
                        "radial_power exponent {gamma} < {min_gamma} violates the \
                         Coulomb-type growth bound γ ≥ 2−n in dimension {n}"
                    )));
                }
            }
            let samples = RealField::from_fn(grid, |x| {
                let d2: f64 = x[..n]
                    .iter()
                    .map(|&xi| {
                        let z = xi - xi.round(); // wrap into [-1/2, 1/2)
                        z * z
                    })
                    .sum();
                let d = d2.sqrt();
                terms
                    .iter()
                    .map(|(l, gamma)| {
                        if d == 0.0 && *gamma == 0.0 {
                            *l
                        } else {
                            l * d.powf(*gamma)
                        }
                    })
                    .sum()
            });
            let mut what = forward_transform(&samples);
            // spectral truncation of the sampled profile (same 2/3 cutoff the
            // flow uses for products)
            what.truncate_above((grid.points_per_axis() / 3) as i64);
            for i in 0..grid.len() {
                mult.w_hat[i] = what.coeffs()[i].re;
            }
            symmetrize(&mut mult);
        }
        InteractionSpec::CosineSum(terms) => {
            for (k, a) in terms {
                if !a.is_finite() {
                    return Err(MvgfError::InvalidSpec(
                        "cosine_sum amplitude must be finite".into(),
                    ));
                }
                // cos contributes a/2 at +k and −k
                add_even_pair(&mut mult, k, a / 2.0)?;
            }
        }
    }
    Ok(mult)
}

fn flat_of_mode(grid: &TorusGrid, k: &[i64; 2]) -> Result<usize> {
    let half = (grid.points_per_axis() / 2) as i64;
    for j in 0..grid.dim() {
        if k[j] < -half || k[j] >= half {
            return Err(MvgfError::InvalidSpec(format!(
                "mode {:?} outside the grid mode set [-{half}, {half})",
                &k[..grid.dim()]
            )));
        }
    }
    let m = grid.points_per_axis();
    Ok(match grid.dim() {
        1 => grid.index_of_mode(k[0]),
        _ => grid.index_of_mode(k[0]) * m + grid.index_of_mode(k[1]),
    })
}

fn set_even_pair(mult: &mut KernelMultiplier, k: &[i64; 2], a: f64) -> Result<()> {
    let grid = mult.grid;
    let i = flat_of_mode(&grid, k)?;
    mult.w_hat[i] = a;
    let neg = [-k[0], -k[1]];
    if let Ok(j) = flat_of_mode(&grid, &neg) {
        mult.w_hat[j] = a;
    }
    Ok(())
}

fn add_even_pair(mult: &mut KernelMultiplier, k: &[i64; 2], a: f64) -> Result<()> {
    let grid = mult.grid;
    let i = flat_of_mode(&grid, k)?;
    mult.w_hat[i] += a;
    let neg = [-k[0], -k[1]];
    match flat_of_mode(&grid, &neg) {
        Ok(j) if j != i => mult.w_hat[j] += a,
        _ => mult.w_hat[i] += a, // k = 0 or Nyquist self-pair
    }
    Ok(())
}

fn symmetrize(mult: &mut KernelMultiplier) {
    let grid = mult.grid;
    for i in 0..grid.len() {
        let k = grid.mode(i);
        let neg = [-k[0], -k[1]];
        if let Ok(j) = flat_of_mode(&grid, &neg) {
            if j > i {
                let avg = 0.5 * (mult.w_hat[i] + mult.w_hat[j]);
                mult.w_hat[i] = avg;
                mult.w_hat[j] = avg;
            }
        }
    }
}

/// Convolution `W*ρ` as a mode-wise product; the result is real.
pub fn convolve(mult: &KernelMultiplier, rho: &DensityField) -> Result<RealField> {
    convolve_field(mult, rho.field())
}

/// Convolution of an arbitrary scalar field with the kernel.
pub fn convolve_field(mult: &KernelMultiplier, f: &RealField) -> Result<RealField> {
    check_same_grid(mult.grid(), f.grid(), "convolve")?;
    let mut f_hat = forward_transform(f);
    for (c, w) in f_hat.coeffs_mut().iter_mut().zip(&mult.w_hat) {
        *c *= w;
    }
    Ok(inverse_transform(&f_hat))
}

/// Applies the multiplier to spectral coefficients in place (scalar channel).
pub fn apply_multiplier(mult: &KernelMultiplier, f_hat: &mut SpectralField) -> Result<()> {
    check_same_grid(mult.grid(), f_hat.grid(), "apply_multiplier")?;
    for (c, w) in f_hat.channel_mut(0).iter_mut().zip(&mult.w_hat) {
        *c *= w;
    }
    Ok(())
}

/// Real-space table of ∇W with modes above `smoothing_modes` zeroed
/// (|k|_inf cutoff); consumers interpolate bilinearly.
pub fn gridded_grad_kernel(
    spec: &InteractionSpec,
    grid: TorusGrid,
    smoothing_modes: usize,
) -> Result<RealField> {
    if smoothing_modes > grid.points_per_axis() / 2 {
        return Err(MvgfError::InvalidSpec(format!(
            "smoothing_modes {smoothing_modes} exceeds M/2 = {}",
            grid.points_per_axis() / 2
        )));
    }
    let mult = kernel_multiplier(spec, grid)?;
    let mut w_hat = SpectralField::zeros(grid, 1);
    for i in 0..grid.len() {
        w_hat.coeffs_mut()[i] = rustfft::num_complex::Complex64::new(mult.w_hat[i], 0.0);
    }
    w_hat.truncate_above(smoothing_modes as i64);
    Ok(inverse_transform(&spectral_gradient(&w_hat)?))
}
