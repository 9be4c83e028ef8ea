//! Numerical laboratory for McKean-Vlasov gradient flows on the flat torus.
//!
//! The equation of interest is the nonlocal Fokker-Planck equation
//!
//! ```text
//! dρ/dt = Δρ + ∇·(ρ ∇(V + W*ρ))      on T^n = R^n/Z^n, n = 1, 2,
//! ```
//!
//! the 2-Wasserstein gradient flow of the free energy
//! `F(ρ) = ∫ρ log ρ + ∫V dρ + (1/2)∬W(x−y) dρ dρ`.
//!
//! The crate provides, in matching modules:
//!
//! - [`grid`]: periodic grids, FFT-based transforms, spectral calculus;
//! - [`potentials`]: confinement potentials V and interaction kernels W
//!   (Green functions of Δ and Δ−α, radial profiles, cosine sums), exposed
//!   as Fourier multipliers;
//! - [`energy`]: free energy, dissipation I(ρ), and the Wasserstein
//!   gradient field Y = −∇(log ρ + V + W*ρ);
//! - [`flow`]: an IMEX pseudo-spectral time integrator with exact diffusion
//!   factor, blow-up monitoring, and a stationary-state fixed-point solver;
//! - [`linearization`]: the weighted Helmholtz projection, the Hessian-type
//!   operator on gradient fields, and its assembled spectrum;
//! - [`metrics`]: the exact W2 distance on the circle, a TV-based upper
//!   bound, Lojasiewicz exponent fits and convergence-rate checks;
//! - [`particles`]: the associated N-particle Langevin dynamics with
//!   particle-mesh forces;
//! - [`cli`]: scenario configuration, orchestration, and file formats.

pub mod cli;
pub mod energy;
pub mod error;
pub mod flow;
pub mod grid;
pub mod linearization;
pub mod metrics;
pub mod particles;
pub mod potentials;

pub use error::MvgfError;

/// Result alias used throughout the crate.
pub type Result<T> = std::result::Result<T, MvgfError>;
