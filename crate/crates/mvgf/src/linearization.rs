//! The Helmholtz projection onto gradient fields, the weighted Poisson solve
//! behind it, and the Hessian-type operator of the free energy at a
//! stationary state, together with its assembled spectrum.
//!
//! On gradient fields ξ = ∇φ the operator reads
//!
//! ```text
//! L ξ = P (−ρ0⁻¹ div(ρ0 ∇ξ) + ∇²V ξ + K[ξ]),
//! K[ξ](x) = ∫ ∇²W(x−y) (ξ(x) − ξ(y)) dρ0(y)
//!         = (∇²W * ρ0)(x) ξ(x) − (∇²W * (ρ0 ξ))(x),
//! ```
//!
//! where P is the ρ0-weighted projection onto gradients,
//! `P X = ∇ (div(ρ0∇))⁻¹ div(ρ0 X)`. All second-derivative convolutions are
//! evaluated through the multipliers `(2πi k_a)(2πi k_b) Ŵ(k)`; no
//! real-space second-derivative kernel is ever formed (it would not be
//! integrable for Coulomb-type W).
//!
//! At the uniform state with V = 0 the whole operator diagonalizes in
//! Fourier: `L ∇e_k = 4π²|k|² (1 + Ŵ(k)) ∇e_k`, which is both the test
//! oracle and the source of the chemotaxis threshold `χ* = 4π²`.

use nalgebra::DMatrix;
use rustfft::num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::MvgfError;
use crate::grid::{
    check_same_grid, forward_transform, inverse_transform, spectral_divergence, spectral_gradient,
    DensityField, RealField, SpectralField, TorusGrid,
};
use crate::potentials::KernelMultiplier;
use crate::Result;

/// A gradient vector field ∇φ together with its mean-zero potential φ.
#[derive(Debug, Clone)]
pub struct GradientVectorField {
    potential: RealField,
    field: RealField,
}

impl GradientVectorField {
    /// Builds ∇φ from a scalar potential (the mean is projected out).
    pub fn from_potential(potential: &RealField) -> Result<Self> {
        if potential.channels() != 1 {
            return Err(MvgfError::ChannelMismatch(
                "potential must be scalar".into(),
            ));
        }
        let mut pot = potential.clone();
        let mean = pot.mean();
        for v in pot.data_mut() {
            *v -= mean;
        }
        let field = inverse_transform(&spectral_gradient(&forward_transform(&pot))?);
        Ok(GradientVectorField {
            potential: pot,
            field,
        })
    }

    pub fn potential(&self) -> &RealField {
        &self.potential
    }

    pub fn field(&self) -> &RealField {
        &self.field
    }

    pub fn grid(&self) -> &TorusGrid {
        self.potential.grid()
    }
}

/// ρ0-weighted inner product of two vector fields: `mean(ρ0 Σ_c X_c Y_c)`.
pub fn weighted_inner(rho0: &DensityField, x: &RealField, y: &RealField) -> Result<f64> {
    check_same_grid(rho0.grid(), x.grid(), "weighted_inner")?;
    check_same_grid(x.grid(), y.grid(), "weighted_inner")?;
    if x.channels() != y.channels() {
        return Err(MvgfError::ChannelMismatch(
            "weighted_inner: channel counts differ".into(),
        ));
    }
    let n = x.grid().len();
    let mut acc = 0.0;
    for c in 0..x.channels() {
        let (xc, yc) = (x.channel(c), y.channel(c));
        for i in 0..n {
            acc += rho0.values()[i] * xc[i] * yc[i];
        }
    }
    Ok(acc / n as f64)
}

fn l2_norm(values: &[f64]) -> f64 {
    (values.iter().map(|v| v * v).sum::<f64>() / values.len() as f64).sqrt()
}

/// `div(ρ0 ∇φ)` evaluated spectrally.
fn weighted_laplacian(rho0: &DensityField, phi: &RealField) -> Result<RealField> {
    let grad = inverse_transform(&spectral_gradient(&forward_transform(phi))?);
    let grid = *phi.grid();
    let n = grid.len();
    let dim = grid.dim();
    let mut flux = RealField::zeros(grid, dim);
    for c in 0..dim {
        for i in 0..n {
            flux.channel_mut(c)[i] = rho0.values()[i] * grad.channel(c)[i];
        }
    }
    Ok(inverse_transform(&spectral_divergence(&forward_transform(
        &flux,
    ))?))
}

/// Applies the mean-zero inverse Laplacian `(Δ)⁻¹` spectrally.
fn inverse_laplacian(f: &RealField) -> Result<RealField> {
    let grid = *f.grid();
    let mut hat = forward_transform(f);
    for i in 0..grid.len() {
        let k2 = grid.mode_norm_sq(i);
        hat.coeffs_mut()[i] = if k2 == 0.0 {
            Complex64::ZERO
        } else {
            hat.coeffs()[i] / (-4.0 * PI * PI * k2)
        };
    }
    Ok(inverse_transform(&hat))
}

/// Solves `div(ρ0 ∇φ) = f` for the mean-zero potential φ.
///
/// Conjugate gradients on the symmetric positive semidefinite form
/// `−div(ρ0∇·)`, preconditioned by the constant-coefficient `(−Δ)⁻¹`; with
/// `ρ0` bounded away from zero the preconditioned condition number is
/// `max ρ0 / min ρ0`, so convergence does not degrade with resolution.
pub fn weighted_poisson_solve(rho0: &DensityField, f: &RealField) -> Result<RealField> {
    check_same_grid(rho0.grid(), f.grid(), "weighted_poisson_solve")?;
    if f.channels() != 1 {
        return Err(MvgfError::ChannelMismatch("rhs must be scalar".into()));
    }
    if f.mean().abs() > 1e-12 * (1.0 + l2_norm(f.channel(0))) {
        return Err(MvgfError::Precondition(format!(
            "weighted Poisson rhs must be mean-zero (mean {:.3e})",
            f.mean()
        )));
    }
    if rho0.min() < crate::grid::POSITIVITY_FLOOR {
        return Err(MvgfError::Precondition(
            "weighted Poisson needs ρ0 above the positivity floor".into(),
        ));
    }
    let grid = *f.grid();
    let n = grid.len();
    let rhs_norm = l2_norm(f.channel(0));
    if rhs_norm == 0.0 {
        return Ok(RealField::zeros(grid, 1));
    }
    let tol = 1e-10 * rhs_norm;

    // CG on A φ = b with A = −div(ρ0∇·), b = −f, preconditioner (−Δ)⁻¹
    let neg = |field: &RealField| -> RealField {
        let mut out = field.clone();
        for v in out.data_mut() {
            *v = -*v;
        }
        out
    };
    let apply_a = |phi: &RealField| -> Result<RealField> { Ok(neg(&weighted_laplacian(rho0, phi)?)) };
    let apply_prec = |r: &RealField| -> Result<RealField> { Ok(neg(&inverse_laplacian(r)?)) };

    let b = neg(f);
    let mut phi = RealField::zeros(grid, 1);
    let mut residual = b.clone();
    let mut z = apply_prec(&residual)?;
    let mut p = z.clone();
    let mut rz = (0..n)
        .map(|i| residual.channel(0)[i] * z.channel(0)[i])
        .sum::<f64>();

    let max_iter = 50 * (grid.points_per_axis() + 10);
    let mut best_res = f64::INFINITY;
    let mut stagnant = 0;
    for _ in 0..max_iter {
        let ap = apply_a(&p)?;
        let p_ap = (0..n).map(|i| p.channel(0)[i] * ap.channel(0)[i]).sum::<f64>();
        if p_ap <= 0.0 {
            break; // numerically singular direction; residual check decides
        }
        let alpha = rz / p_ap;
        for i in 0..n {
            phi.channel_mut(0)[i] += alpha * p.channel(0)[i];
            residual.channel_mut(0)[i] -= alpha * ap.channel(0)[i];
        }
        let res_norm = l2_norm(residual.channel(0));
        if res_norm < tol {
            break;
        }
        if res_norm < best_res * (1.0 - 1e-12) {
            best_res = res_norm;
            stagnant = 0;
        } else {
            stagnant += 1;
            if stagnant > 50 {
                return Err(MvgfError::SolverStagnation {
                    context: "weighted Poisson CG".into(),
                    residual: res_norm / rhs_norm,
                });
            }
        }
        z = apply_prec(&residual)?;
        let rz_next = (0..n)
            .map(|i| residual.channel(0)[i] * z.channel(0)[i])
            .sum::<f64>();
        let beta = rz_next / rz;
        rz = rz_next;
        for i in 0..n {
            let pv = z.channel(0)[i] + beta * p.channel(0)[i];
            p.channel_mut(0)[i] = pv;
        }
    }

    // enforce the mean-zero gauge and verify the defining equation
    let mean = phi.mean();
    for v in phi.data_mut() {
        *v -= mean;
    }
    let check = weighted_laplacian(rho0, &phi)?;
    let defect: f64 = l2_norm(
        &(0..n)
            .map(|i| check.channel(0)[i] - f.channel(0)[i])
            .collect::<Vec<_>>(),
    );
    if defect > 1e-10 * rhs_norm {
        return Err(MvgfError::SolverStagnation {
            context: "weighted Poisson residual above tolerance".into(),
            residual: defect / rhs_norm,
        });
    }
    Ok(phi)
}

/// ρ0-weighted Helmholtz projection of a vector field onto gradients:
/// `P X = ∇ (div(ρ0∇))⁻¹ div(ρ0 X)`; the residual `X − PX` is
/// ρ0-divergence-free.
pub fn helmholtz_project(rho0: &DensityField, x: &RealField) -> Result<GradientVectorField> {
    check_same_grid(rho0.grid(), x.grid(), "helmholtz_project")?;
    let grid = *x.grid();
    let dim = grid.dim();
    if x.channels() != dim {
        return Err(MvgfError::ChannelMismatch(format!(
            "helmholtz_project expects {dim} channels"
        )));
    }
    if !x.is_finite() {
        return Err(MvgfError::NonFinite("projection input".into()));
    }
    let n = grid.len();
    let mut flux = RealField::zeros(grid, dim);
    for c in 0..dim {
        for i in 0..n {
            flux.channel_mut(c)[i] = rho0.values()[i] * x.channel(c)[i];
        }
    }
    // div of a flux has no mode 0; mean-zero by construction
    let rhs = inverse_transform(&spectral_divergence(&forward_transform(&flux))?);
    let phi = weighted_poisson_solve(rho0, &rhs)?;
    GradientVectorField::from_potential(&phi)
}

/// Matrix-free application of the Hessian-type operator at a base state.
pub struct LinearOperatorHandle {
    rho0: DensityField,
    /// ∇²V entries, row-major upper triangle (d(d+1)/2 channels).
    hess_v: Vec<RealField>,
    /// A(x) = (∇²W * ρ0)(x), same layout.
    a_field: Vec<RealField>,
    mult: KernelMultiplier,
}

/// Upper-triangle index pairs for dimension d (11; 11,12,22 pattern).
fn sym_pairs(dim: usize) -> Vec<(usize, usize)> {
    match dim {
        1 => vec![(0, 0)],
        _ => vec![(0, 0), (0, 1), (1, 1)],
    }
}

/// Second-derivative multiplier `(2πi k_a)(2πi k_b)` applied to a spectral
/// scalar, as a real field.
fn second_derivative(grid: &TorusGrid, hat: &SpectralField, a: usize, b: usize) -> RealField {
    let n = grid.len();
    let ny = -(grid.points_per_axis() as i64) / 2;
    let mut out = SpectralField::zeros(*grid, 1);
    for i in 0..n {
        let k = grid.mode(i);
        if k[a] == ny || k[b] == ny {
            continue;
        }
        let factor = -(2.0 * PI * k[a] as f64) * (2.0 * PI * k[b] as f64);
        out.coeffs_mut()[i] = hat.coeffs()[i] * factor;
    }
    inverse_transform(&out)
}

impl LinearOperatorHandle {
    /// Precomputes ∇²V and ∇²W*ρ0 for a base state. The base state should be
    /// stationary (small I(ρ0)) for the spectrum to carry its usual meaning;
    /// the operator itself is well-defined at any positive density.
    pub fn new(rho0: DensityField, v: &RealField, mult: KernelMultiplier) -> Result<Self> {
        check_same_grid(rho0.grid(), v.grid(), "operator: V")?;
        check_same_grid(rho0.grid(), mult.grid(), "operator: W")?;
        let grid = *rho0.grid();
        let v_hat = forward_transform(v);
        let mut rho_hat = forward_transform(rho0.field());
        for (c, w) in rho_hat.channel_mut(0).iter_mut().zip(mult.values()) {
            *c *= w;
        }
        let mut hess_v = Vec::new();
        let mut a_field = Vec::new();
        for (a, b) in sym_pairs(grid.dim()) {
            hess_v.push(second_derivative(&grid, &v_hat, a, b));
            a_field.push(second_derivative(&grid, &rho_hat, a, b));
        }
        Ok(LinearOperatorHandle {
            rho0,
            hess_v,
            a_field,
            mult,
        })
    }

    pub fn rho0(&self) -> &DensityField {
        &self.rho0
    }

    pub fn grid(&self) -> &TorusGrid {
        self.rho0.grid()
    }

    fn sym_entry<'a>(&self, fields: &'a [RealField], a: usize, b: usize) -> &'a RealField {
        let dim = self.grid().dim();
        let idx = if dim == 1 {
            0
        } else {
            match (a.min(b), a.max(b)) {
                (0, 0) => 0,
                (0, 1) => 1,
                _ => 2,
            }
        };
        &fields[idx]
    }

    /// `K[ξ] = A(x) ξ(x) − ∇²W * (ρ0 ξ)`, all through multipliers.
    pub fn interaction_term(&self, xi: &RealField) -> Result<RealField> {
        let grid = *self.grid();
        let dim = grid.dim();
        let n = grid.len();
        if xi.channels() != dim {
            return Err(MvgfError::ChannelMismatch(
                "interaction term expects a vector field".into(),
            ));
        }
        // ρ0 ξ, componentwise transform
        let mut weighted = RealField::zeros(grid, dim);
        for c in 0..dim {
            for i in 0..n {
                weighted.channel_mut(c)[i] = self.rho0.values()[i] * xi.channel(c)[i];
            }
        }
        let weighted_hats: Vec<SpectralField> = (0..dim)
            .map(|c| {
                forward_transform(
                    &RealField::from_data(grid, 1, weighted.channel(c).to_vec()).unwrap(),
                )
            })
            .collect();

        let mut out = RealField::zeros(grid, dim);
        for a in 0..dim {
            // local part A(x) ξ(x)
            for b in 0..dim {
                let a_ab = self.sym_entry(&self.a_field, a, b);
                for i in 0..n {
                    out.channel_mut(a)[i] += a_ab.channel(0)[i] * xi.channel(b)[i];
                }
            }
            // convolution part Σ_b (∂_a∂_b W) * (ρ0 ξ_b)
            for b in 0..dim {
                let mut hat = weighted_hats[b].clone();
                for (c, w) in hat.channel_mut(0).iter_mut().zip(self.mult.values()) {
                    *c *= w;
                }
                let conv = second_derivative(&grid, &hat, a, b);
                for i in 0..n {
                    out.channel_mut(a)[i] -= conv.channel(0)[i];
                }
            }
        }
        Ok(out)
    }

    /// The operator before projection:
    /// `−ρ0⁻¹ div(ρ0 ∇ξ) + ∇²V ξ + K[ξ]`.
    fn unprojected(&self, xi: &RealField) -> Result<RealField> {
        let grid = *self.grid();
        let dim = grid.dim();
        let n = grid.len();

        let mut out = self.interaction_term(xi)?;

        for a in 0..dim {
            // diffusion-type term on component a
            let comp = RealField::from_data(grid, 1, xi.channel(a).to_vec())?;
            let grad = inverse_transform(&spectral_gradient(&forward_transform(&comp))?);
            let mut flux = RealField::zeros(grid, dim);
            for c in 0..dim {
                for i in 0..n {
                    flux.channel_mut(c)[i] = self.rho0.values()[i] * grad.channel(c)[i];
                }
            }
            let div = inverse_transform(&spectral_divergence(&forward_transform(&flux))?);
            for i in 0..n {
                out.channel_mut(a)[i] -= div.channel(0)[i] / self.rho0.values()[i];
            }
            // confinement Hessian
            for b in 0..dim {
                let v_ab = self.sym_entry(&self.hess_v, a, b);
                for i in 0..n {
                    out.channel_mut(a)[i] += v_ab.channel(0)[i] * xi.channel(b)[i];
                }
            }
        }
        Ok(out)
    }

    /// Applies L to a gradient field (matrix-free).
    pub fn apply(&self, xi: &GradientVectorField) -> Result<GradientVectorField> {
        check_same_grid(self.grid(), xi.grid(), "hessian apply")?;
        let raw = self.unprojected(xi.field())?;
        helmholtz_project(&self.rho0, &raw)
    }

    /// `⟨L ξ, η⟩_{ρ0}` without the final projection solve: P is self-adjoint
    /// in the weighted inner product and acts as the identity on gradient
    /// fields, so the projection can be dropped when pairing against one.
    pub fn bilinear(&self, xi: &GradientVectorField, eta: &GradientVectorField) -> Result<f64> {
        let raw = self.unprojected(xi.field())?;
        weighted_inner(&self.rho0, &raw, eta.field())
    }
}

/// Assembled spectrum of L on the mean-zero Fourier-potential basis.
#[derive(Debug, Clone)]
pub struct SpectrumReport {
    pub basis_size: usize,
    /// Eigenvalues sorted ascending.
    pub eigenvalues: Vec<f64>,
    pub kernel_dim: usize,
    pub kernel_tol: f64,
}

/// Real Fourier potentials (cos and sin of each mode in a half-space) with
/// |k|_inf ≤ max_mode; dimension (2·max_mode+1)^dim − 1.
pub fn fourier_potential_basis(grid: TorusGrid, max_mode: usize) -> Vec<RealField> {
    let m = max_mode as i64;
    let dim = grid.dim();
    let mut basis = Vec::new();
    let mut half_space = Vec::new();
    if dim == 1 {
        for k in 1..=m {
            half_space.push([k, 0]);
        }
    } else {
        for k1 in -m..=m {
            for k2 in -m..=m {
                if (k1, k2) > (0, 0) {
                    half_space.push([k1, k2]);
                }
            }
        }
    }
    for k in half_space {
        basis.push(RealField::from_fn(grid, |x| {
            let phase: f64 = (0..dim).map(|j| k[j] as f64 * x[j]).sum();
            (2.0 * PI * phase).cos()
        }));
        basis.push(RealField::from_fn(grid, |x| {
            let phase: f64 = (0..dim).map(|j| k[j] as f64 * x[j]).sum();
            (2.0 * PI * phase).sin()
        }));
    }
    basis
}

/// Assembles the Gram matrix and the bilinear-form matrix of L on the raw
/// Fourier-potential basis. Exposed separately so tests can compare the raw
/// bilinear form against finite differences of the pull-back energy.
pub fn assemble_bilinear(
    handle: &LinearOperatorHandle,
    max_mode: usize,
) -> Result<(Vec<GradientVectorField>, DMatrix<f64>, DMatrix<f64>)> {
    let grid = *handle.grid();
    let d = (2 * max_mode + 1).pow(grid.dim() as u32) - 1;
    if d > 4096 {
        return Err(MvgfError::InvalidSpec(format!(
            "basis dimension {d} exceeds the 4096 limit"
        )));
    }
    let basis: Vec<GradientVectorField> = fourier_potential_basis(grid, max_mode)
        .iter()
        .map(GradientVectorField::from_potential)
        .collect::<Result<_>>()?;
    debug_assert_eq!(basis.len(), d);

    let mut gram = DMatrix::<f64>::zeros(d, d);
    for i in 0..d {
        for j in i..d {
            let g = weighted_inner(&handle.rho0, basis[i].field(), basis[j].field())?;
            gram[(i, j)] = g;
            gram[(j, i)] = g;
        }
    }

    // one operator application per basis column, then weighted pairings
    let mut mat = DMatrix::<f64>::zeros(d, d);
    for j in 0..d {
        let l_col = handle.unprojected(basis[j].field())?;
        for i in 0..d {
            mat[(i, j)] = weighted_inner(&handle.rho0, &l_col, basis[i].field())?;
        }
    }
    Ok((basis, mat, gram))
}

/// Dense symmetric eigendecomposition of L restricted to the Fourier basis,
/// orthonormalized in the ρ0-weighted inner product (Cholesky of the Gram
/// matrix), with the kernel counted under `kernel_tol = 1e−7 · spectral
/// radius`.
pub fn assemble_spectrum(handle: &LinearOperatorHandle, max_mode: usize) -> Result<SpectrumReport> {
    let (_, mat, gram) = assemble_bilinear(handle, max_mode)?;
    let d = mat.nrows();

    let chol = nalgebra::Cholesky::new(gram).ok_or_else(|| MvgfError::SolverStagnation {
        context: "Gram matrix not positive definite".into(),
        residual: f64::NAN,
    })?;
    // R⁻ᵀ M R⁻¹ with G = RᵀR (nalgebra returns the lower factor L = Rᵀ)
    let l_factor = chol.l();
    let mut transformed = mat;
    // solve L X = M, then (L Xᵀ)ᵀ
    l_factor.solve_lower_triangular_mut(&mut transformed);
    transformed.transpose_mut();
    l_factor.solve_lower_triangular_mut(&mut transformed);
    // symmetrize before the eigensolve
    let sym = (&transformed + transformed.transpose()) * 0.5;

    let eig = nalgebra::SymmetricEigen::new(sym);
    let mut eigenvalues: Vec<f64> = eig.eigenvalues.iter().cloned().collect();
    eigenvalues.sort_by(|a, b| a.partial_cmp(b).unwrap());

    let radius = eigenvalues
        .iter()
        .map(|l| l.abs())
        .fold(0.0f64, f64::max);
    let kernel_tol = 1e-7 * radius;
    let kernel_dim = eigenvalues.iter().filter(|l| l.abs() < kernel_tol).count();
    Ok(SpectrumReport {
        basis_size: d,
        eigenvalues,
        kernel_dim,
        kernel_tol,
    })
}

/// Rayleigh quotient `⟨Lξ, ξ⟩ / ⟨ξ, ξ⟩` in the ρ0-weighted inner product.
pub fn rayleigh_quotient(handle: &LinearOperatorHandle, xi: &GradientVectorField) -> Result<f64> {
    let num = handle.bilinear(xi, xi)?;
    let den = weighted_inner(handle.rho0(), xi.field(), xi.field())?;
    Ok(num / den)
}
