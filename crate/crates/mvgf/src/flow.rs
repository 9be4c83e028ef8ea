//! Pseudo-spectral time integration of the McKean-Vlasov flow, blow-up
//! detection, and stationary states by fixed-point iteration.
//!
//! One step advances `dρ/dt = Δρ + ∇·(ρ ∇(V + W*ρ))` with the diffusion
//! integrated exactly by the per-mode factor `E = e^{z}`, `z = −4π²|k|² dt`,
//! and the transport term `N(ρ) = ∇·(ρ ∇(V + W*ρ))` advanced explicitly by
//! a second-order Heun-type predictor-corrector under the same integrating
//! factor, with the trapezoidal weights exponentially corrected:
//!
//! ```text
//! ρ~      = E ρ̂ + dt φ1(z) N̂(ρ),
//! ρ̂_next = ρ~ + dt φ2(z) (N̂(ρ~) − N̂(ρ)),
//! φ1(z) = (e^z − 1)/z,    φ2(z) = (e^z − 1 − z)/z².
//! ```
//!
//! The φ-weights matter beyond formal order: with them, stationary states
//! of the spatial semi-discretization are exact fixed points of the step
//! map (the predictor reproduces a stationary ρ exactly, so the corrector
//! vanishes), and the dissipation of a converged run floors at spatial
//! truncation level instead of an O(dt²) scheme bias.
//!
//! The scheme is exact on the heat semigroup (N ≡ 0) for any dt. Mode 0 of
//! N is identically zero (divergence form), so mass is conserved
//! bit-exactly; the only mass changes come from the positivity policy,
//! which clips undershoots to the floor, renormalizes, and records the
//! clipped amount.
//!
//! The remaining stability constraint is transport-only; `run` keeps
//! `dt · max|∇(V + W*ρ)| / h ≤ adapt_cfl`.
//!
//! Blow-up is monitored through `‖ρ‖_∞` alone: for this equation the
//! supremum norm controls all higher regularity, so a bounded run that
//! never trips the monitor is trustworthy everywhere else.

use rustfft::num_complex::Complex64;
use std::f64::consts::PI;

use crate::energy::{self, EnergyReport};
use crate::error::MvgfError;
use crate::grid::{
    check_same_grid, forward_transform, gradient_of, inverse_transform, DensityField, RealField,
    SpectralField, TorusGrid, POSITIVITY_FLOOR,
};
use crate::potentials::{convolve, KernelMultiplier};
use crate::Result;

/// Integration parameters of one trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowConfig {
    /// Base time step (adaptively reduced by the CFL bound).
    pub dt: f64,
    pub t_end: f64,
    /// Apply the 2/3-rule mask to the transport term (default on).
    pub dealias: bool,
    /// Transport CFL number: dt ≤ adapt_cfl · h / max|∇(V + W*ρ)|.
    pub adapt_cfl: f64,
    /// Blow-up monitor threshold on ‖ρ‖_∞.
    pub blowup_linf: f64,
    /// Energy report cadence in steps.
    pub log_every: usize,
    /// Snapshot cadence in steps (0 = initial and final only).
    pub snapshot_every: usize,
    /// Declare convergence when the dissipation drops below this.
    pub conv_tol: f64,
}

impl Default for FlowConfig {
    fn default() -> Self {
        FlowConfig {
            dt: 1e-3,
            t_end: 1.0,
            dealias: true,
            adapt_cfl: 0.4,
            blowup_linf: 1e4,
            log_every: 1,
            snapshot_every: 0,
            conv_tol: 1e-12,
        }
    }
}

impl FlowConfig {
    // negated comparisons double as NaN rejection
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) {
            return Err(MvgfError::InvalidSpec(format!("dt must be > 0, got {}", self.dt)));
        }
        if !(self.blowup_linf > 1.0) {
            return Err(MvgfError::InvalidSpec(format!(
                "blowup_linf must be > 1, got {}",
                self.blowup_linf
            )));
        }
        if self.log_every == 0 {
            return Err(MvgfError::InvalidSpec("log_every must be >= 1".into()));
        }
        Ok(())
    }
}

/// How a trajectory ended.
#[derive(Debug, Clone, PartialEq)]
pub enum TerminalStatus {
    Converged,
    TEndReached,
    BlowupDetected,
    StepFailure { t: f64, reason: String },
}

impl TerminalStatus {
    pub fn label(&self) -> &'static str {
        match self {
            TerminalStatus::Converged => "converged",
            TerminalStatus::TEndReached => "t_end_reached",
            TerminalStatus::BlowupDetected => "blowup_detected",
            TerminalStatus::StepFailure { .. } => "step_failure",
        }
    }
}

/// Time-ordered record of one run.
#[derive(Debug, Clone)]
pub struct TrajectoryLog {
    pub reports: Vec<EnergyReport>,
    pub snapshots: Vec<(f64, DensityField)>,
    pub terminal_status: TerminalStatus,
    /// Total L¹ mass clipped by the positivity policy.
    pub clipped_total: f64,
}

impl TrajectoryLog {
    /// Max over consecutive reports of |mass − 1|.
    pub fn max_mass_error(&self) -> f64 {
        self.reports
            .iter()
            .map(|r| (r.mass - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// Max over consecutive report pairs of (F(t2) − F(t1)) / (t2 − t1);
    /// nonpositive for a perfectly monotone trajectory.
    pub fn max_energy_increase_rate(&self) -> f64 {
        self.reports
            .windows(2)
            .filter(|w| w[1].t > w[0].t)
            .map(|w| (w[1].f - w[0].f) / (w[1].t - w[0].t))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Max over consecutive report pairs of |ΔF/Δt + I| / (1 + I), the
    /// discrete dissipation-identity defect (first order in the report
    /// spacing), together with the largest report spacing.
    pub fn dissipation_identity_violation(&self) -> (f64, f64) {
        let mut worst = 0.0f64;
        let mut max_spacing = 0.0f64;
        for w in self.reports.windows(2) {
            let dt = w[1].t - w[0].t;
            if dt <= 0.0 {
                continue;
            }
            let i0 = w[0].dissipation.unwrap_or(0.0);
            let defect = ((w[1].f - w[0].f) / dt + i0).abs() / (1.0 + i0);
            worst = worst.max(defect);
            max_spacing = max_spacing.max(dt);
        }
        (worst, max_spacing)
    }

    pub fn terminal_report(&self) -> Option<&EnergyReport> {
        self.reports.last()
    }
}

/// Outcome of a single accepted step.
#[derive(Debug)]
pub struct StepOutcome {
    pub rho: DensityField,
    /// Step size actually taken (≤ requested after CFL/retry reductions).
    pub dt_taken: f64,
    /// L¹ amount clipped by the positivity policy.
    pub clipped_l1: f64,
    /// max|∇(V + W*ρ)| at the step start, for CFL bookkeeping.
    pub max_drift: f64,
}

/// Spectral workspace for the transport term of one (grid, V, W) context.
struct Transport<'a> {
    grid: TorusGrid,
    grad_v: &'a RealField,
    mult: &'a KernelMultiplier,
    dealias: bool,
}

impl<'a> Transport<'a> {
    /// `N̂(ρ) = ik · fft(ρ ∇(V + W*ρ))`, dealiased; also returns max|drift|.
    fn eval(&self, rho_hat: &SpectralField) -> Result<(SpectralField, f64)> {
        let grid = self.grid;
        let n = grid.len();
        let dim = grid.dim();

        // drift b = ∇V + ∇(W*ρ), built from (optionally masked) ρ̂
        let mut conv_hat = rho_hat.clone();
        for (c, w) in conv_hat
            .channel_mut(0)
            .iter_mut()
            .zip(self.mult.values())
        {
            *c *= w;
        }
        let grad_w_rho = inverse_transform(&crate::grid::spectral_gradient(&conv_hat)?);

        let mut rho_for_product = rho_hat.clone();
        if self.dealias {
            rho_for_product.truncate_above((grid.points_per_axis() / 3) as i64);
        }
        let rho_real = inverse_transform(&rho_for_product);

        let mut flux = RealField::zeros(grid, dim);
        let mut max_drift = 0.0f64;
        for i in 0..n {
            let mut norm_sq = 0.0;
            for c in 0..dim {
                let b = self.grad_v.channel(c)[i] + grad_w_rho.channel(c)[i];
                norm_sq += b * b;
                flux.channel_mut(c)[i] = rho_real.channel(0)[i] * b;
            }
            max_drift = max_drift.max(norm_sq.sqrt());
        }

        let mut n_hat = crate::grid::spectral_divergence(&forward_transform(&flux))?;
        if self.dealias {
            n_hat.truncate_above((grid.points_per_axis() / 3) as i64);
        }
        // divergence form: mode 0 vanishes identically
        n_hat.coeffs_mut()[0] = Complex64::ZERO;
        Ok((n_hat, max_drift))
    }
}

/// Per-mode exponential weights (E, dt·φ1, dt·φ2) for step size dt.
fn exponential_weights(grid: &TorusGrid, dt: f64) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let n = grid.len();
    let mut e = Vec::with_capacity(n);
    let mut phi1 = Vec::with_capacity(n);
    let mut phi2 = Vec::with_capacity(n);
    for i in 0..n {
        let z = -4.0 * PI * PI * grid.mode_norm_sq(i) * dt;
        if z == 0.0 {
            e.push(1.0);
            phi1.push(dt);
            phi2.push(0.5 * dt);
        } else {
            let em1 = z.exp_m1();
            e.push(1.0 + em1);
            phi1.push(dt * em1 / z);
            phi2.push(dt * (em1 - z) / (z * z));
        }
    }
    (e, phi1, phi2)
}

/// Applies the positivity policy in place: clip undershoots to the floor and
/// renormalize mass when anything was clipped. Returns the clipped L¹ amount.
fn clip_renormalize(values: &mut [f64]) -> f64 {
    let n = values.len() as f64;
    let mut clipped = 0.0;
    for v in values.iter_mut() {
        if *v < POSITIVITY_FLOOR {
            clipped += POSITIVITY_FLOOR - *v;
            *v = POSITIVITY_FLOOR;
        }
    }
    if clipped > 0.0 {
        let mass: f64 = values.iter().sum::<f64>() / n;
        for v in values.iter_mut() {
            *v /= mass;
        }
    }
    clipped / n
}

/// One IMEX step with internal retry: on negativity beyond the tolerance the
/// step is retaken with dt/2, up to 5 times.
pub fn step(
    rho: &DensityField,
    v: &RealField,
    grad_v: &RealField,
    mult: &KernelMultiplier,
    dt: f64,
) -> Result<StepOutcome> {
    check_same_grid(rho.grid(), v.grid(), "step: V")?;
    step_inner(
        rho,
        &Transport {
            grid: *rho.grid(),
            grad_v,
            mult,
            dealias: true,
        },
        dt,
        f64::INFINITY,
    )
}

fn step_inner(
    rho: &DensityField,
    transport: &Transport,
    dt_request: f64,
    cfl_limit: f64,
) -> Result<StepOutcome> {
    let grid = transport.grid;
    let n = grid.len();
    let rho_hat = forward_transform(rho.field());
    let (n1, max_drift) = transport.eval(&rho_hat)?;

    // transport CFL with the drift just computed
    let mut dt = dt_request;
    if max_drift > 0.0 {
        dt = dt.min(cfl_limit * grid.spacing() / max_drift);
    }

    let mut attempts = 0;
    loop {
        let (e, phi1, phi2) = exponential_weights(&grid, dt);
        // predictor: exact diffusion plus φ1-weighted transport
        let mut mid_hat = SpectralField::zeros(grid, 1);
        for i in 0..n {
            mid_hat.coeffs_mut()[i] = rho_hat.coeffs()[i] * e[i] + n1.coeffs()[i] * phi1[i];
        }
        let (n2, _) = transport.eval(&mid_hat)?;

        let mut next_hat = mid_hat.clone();
        for i in 0..n {
            next_hat.coeffs_mut()[i] += (n2.coeffs()[i] - n1.coeffs()[i]) * phi2[i];
        }
        let next = inverse_transform(&next_hat);

        if !next.is_finite() {
            return Err(MvgfError::StepFailure {
                t: f64::NAN,
                reason: "non-finite state after step".into(),
            });
        }
        let min = next.min();
        let max = next.max();
        if min < -1e-6 * max.max(1.0) {
            attempts += 1;
            if attempts > 5 {
                return Err(MvgfError::StepFailure {
                    t: f64::NAN,
                    reason: format!(
                        "negativity {min:.3e} persists after 5 step halvings (dt = {dt:.3e})"
                    ),
                });
            }
            dt *= 0.5;
            continue;
        }

        let mut values = next.data().to_vec();
        let clipped_l1 = clip_renormalize(&mut values);
        let field = RealField::from_data(grid, 1, values)?;
        let rho_next = DensityField::new(field).map_err(|e| MvgfError::StepFailure {
            t: f64::NAN,
            reason: format!("state invalid after positivity policy: {e}"),
        })?;
        return Ok(StepOutcome {
            rho: rho_next,
            dt_taken: dt,
            clipped_l1,
            max_drift,
        });
    }
}

/// Integrates to `t_end`, or until the dissipation drops below `conv_tol`
/// (converged), or until `‖ρ‖_∞` exceeds `blowup_linf` (blow-up detected).
/// Step failures terminate the log with the offending time.
pub fn run(
    rho0: &DensityField,
    v: &RealField,
    mult: &KernelMultiplier,
    cfg: &FlowConfig,
) -> Result<TrajectoryLog> {
    cfg.validate()?;
    check_same_grid(rho0.grid(), v.grid(), "run: V")?;
    check_same_grid(rho0.grid(), mult.grid(), "run: W")?;
    let grad_v = gradient_of(v)?;
    let transport = Transport {
        grid: *rho0.grid(),
        grad_v: &grad_v,
        mult,
        dealias: cfg.dealias,
    };

    let mut log = TrajectoryLog {
        reports: Vec::new(),
        snapshots: Vec::new(),
        terminal_status: TerminalStatus::TEndReached,
        clipped_total: 0.0,
    };

    let mut rho = rho0.clone();
    let mut t = 0.0;
    let mut step_index = 0usize;

    let report_at = |t: f64, rho: &DensityField| -> Result<EnergyReport> {
        let mut rep = energy::free_energy(rho, v, mult)?;
        rep.t = t;
        rep.dissipation = Some(energy::dissipation_of(rho, v, mult)?);
        Ok(rep)
    };

    let first = report_at(0.0, &rho)?;
    let mut last_i = first.dissipation.unwrap_or(f64::INFINITY);
    log.reports.push(first);
    log.snapshots.push((0.0, rho.clone()));

    if last_i < cfg.conv_tol {
        log.terminal_status = TerminalStatus::Converged;
        return Ok(log);
    }

    let t_tol = 1e-12 * cfg.t_end.max(1.0);
    while t < cfg.t_end - t_tol {
        let dt_request = cfg.dt.min(cfg.t_end - t);
        let outcome = match step_inner(&rho, &transport, dt_request, cfg.adapt_cfl) {
            Ok(o) => o,
            Err(MvgfError::StepFailure { reason, .. }) => {
                log.terminal_status = TerminalStatus::StepFailure { t, reason };
                return Ok(log);
            }
            Err(e) => return Err(e),
        };
        rho = outcome.rho;
        t += outcome.dt_taken;
        step_index += 1;
        log.clipped_total += outcome.clipped_l1;

        // persistent clipping means under-resolution
        if log.clipped_total > 1e-6 * t.max(0.01) {
            log.terminal_status = TerminalStatus::StepFailure {
                t,
                reason: format!(
                    "positivity clipping rate exceeded 1e-6 per unit time \
                     (total {:.3e} by t = {t:.3e})",
                    log.clipped_total
                ),
            };
            let mut rep = report_at(t, &rho)?;
            rep.t = t;
            log.reports.push(rep);
            log.snapshots.push((t, rho.clone()));
            return Ok(log);
        }

        let blown_up = rho.max() > cfg.blowup_linf;
        let log_now = blown_up
            || step_index.is_multiple_of(cfg.log_every)
            || t >= cfg.t_end - t_tol;
        if log_now {
            let rep = report_at(t, &rho)?;
            last_i = rep.dissipation.unwrap_or(f64::INFINITY);
            log.reports.push(rep);
        }
        if (cfg.snapshot_every > 0 && step_index.is_multiple_of(cfg.snapshot_every))
            || blown_up
            || t >= cfg.t_end - t_tol
        {
            log.snapshots.push((t, rho.clone()));
        }

        if blown_up {
            log.terminal_status = TerminalStatus::BlowupDetected;
            return Ok(log);
        }
        if log_now && last_i < cfg.conv_tol {
            log.terminal_status = TerminalStatus::Converged;
            if log.snapshots.last().map(|(ts, _)| *ts) != Some(t) {
                log.snapshots.push((t, rho.clone()));
            }
            return Ok(log);
        }
    }
    log.terminal_status = TerminalStatus::TEndReached;
    Ok(log)
}

/// Convergence report of the stationary fixed-point iteration.
#[derive(Debug, Clone)]
pub struct StationaryReport {
    pub converged: bool,
    pub iterations: usize,
    /// ‖ρ_{n+1} − ρ_n‖_∞ at exit.
    pub delta_inf: f64,
    /// Stationarity residual ‖Y‖_{L²_ρ} = √I(ρ).
    pub residual: f64,
}

/// Damped fixed-point iteration on `ρ = e^{−V−W*ρ} / Z`.
///
/// Returns the final iterate either way; `report.converged` records whether
/// the ∞-norm increment dropped below `tol` within `max_iter` iterations
/// (stationary states are in general not unique, so a failed iteration may
/// simply need a smaller damping or a different warm start).
pub fn stationary_fixed_point(
    rho_init: &DensityField,
    v: &RealField,
    mult: &KernelMultiplier,
    damping: f64,
    max_iter: usize,
    tol: f64,
) -> Result<(DensityField, StationaryReport)> {
    if !(damping > 0.0 && damping <= 1.0) {
        return Err(MvgfError::InvalidSpec(format!(
            "damping must lie in (0, 1], got {damping}"
        )));
    }
    if rho_init.min() <= 0.0 {
        return Err(MvgfError::Precondition(
            "stationary iteration needs a strictly positive start".into(),
        ));
    }
    let grid = *rho_init.grid();
    let n = grid.len();
    let mut rho = rho_init.clone();
    let mut delta_inf = f64::INFINITY;
    let mut iterations = 0;

    for it in 1..=max_iter {
        iterations = it;
        let w_rho = convolve(mult, &rho)?;
        let mut gibbs: Vec<f64> = (0..n)
            .map(|i| (-(v.channel(0)[i] + w_rho.channel(0)[i])).exp())
            .collect();
        let mass: f64 = gibbs.iter().sum::<f64>() / n as f64;
        if !(mass.is_finite() && mass > 0.0) {
            return Err(MvgfError::NonFinite(
                "fixed-point Gibbs map overflowed".into(),
            ));
        }
        for g in gibbs.iter_mut() {
            *g /= mass;
        }
        delta_inf = 0.0;
        let mut next = Vec::with_capacity(n);
        for i in 0..n {
            let nv = (1.0 - damping) * rho.values()[i] + damping * gibbs[i];
            delta_inf = delta_inf.max((nv - rho.values()[i]).abs());
            next.push(nv);
        }
        rho = DensityField::normalized(RealField::from_data(grid, 1, next)?)?;
        if delta_inf < tol {
            break;
        }
    }

    let residual = energy::dissipation_of(&rho, v, mult)?.max(0.0).sqrt();
    Ok((
        rho,
        StationaryReport {
            converged: delta_inf < tol,
            iterations,
            delta_inf,
            residual,
        },
    ))
}
