//! Structural invariants that need full trajectories or stationary states:
//! translation zero modes of the linearized operator, the measured mesh
//! self-interaction, and the dissipation identity along logged runs.

mod common;

use mvgf::flow::{self, FlowConfig, TerminalStatus};
use mvgf::grid::{create_grid, DensityField, RealField};
use mvgf::linearization::{helmholtz_project, rayleigh_quotient, LinearOperatorHandle};
use mvgf::particles::{self, bilinear, ParticleInit};
use mvgf::potentials::{
    build_confinement, gridded_grad_kernel, kernel_multiplier, ConfinementSpec, InteractionSpec,
};
use std::f64::consts::PI;

/// Nonuniform stationary state of the aggregation dynamics with V = 0.
fn aggregated_state(m: usize) -> (DensityField, RealField, mvgf::potentials::KernelMultiplier) {
    let grid = create_grid(1, m).unwrap();
    let v = RealField::zeros(grid, 1);
    // supercritical attraction: the uniform state is unstable and a pinned
    // bump forms (χ > 4π² + α)
    let mult = kernel_multiplier(
        &InteractionSpec::YukawaGreen {
            chi: 50.0,
            alpha: 1.0,
        },
        grid,
    )
    .unwrap();
    let warm = DensityField::normalized(RealField::from_fn(grid, |x| {
        1.0 + 0.5 * (2.0 * PI * x[0]).cos()
    }))
    .unwrap();
    let (rho, report) = flow::stationary_fixed_point(&warm, &v, &mult, 0.5, 20_000, 1e-14).unwrap();
    assert!(report.converged, "aggregation fixed point did not converge");
    assert!(
        report.residual < 1e-8,
        "stationarity residual {}",
        report.residual
    );
    assert!(rho.max() > 1.5, "state did not aggregate: max {}", rho.max());
    (rho, v, mult)
}

#[test]
fn translation_zero_modes_shrink_with_resolution() {
    // at a nonuniform stationary state with V = 0, the gradient-projected
    // coordinate translation is an approximate kernel element of L, and its
    // Rayleigh quotient decays as the grid refines
    let quotient_at = |m: usize| -> f64 {
        let (rho, v, mult) = aggregated_state(m);
        let grid = *rho.grid();
        // project the unit translation field onto gradients
        let mut translation = RealField::zeros(grid, 1);
        translation.channel_mut(0).fill(1.0);
        let xi = helmholtz_project(&rho, &translation).unwrap();
        let handle = LinearOperatorHandle::new(rho, &v, mult).unwrap();
        rayleigh_quotient(&handle, &xi).unwrap().abs()
    };
    let coarse = quotient_at(32);
    let fine = quotient_at(64);
    // the operator's natural scale here is 4π² ≈ 39; the translation mode
    // sits many orders below it and sinks further under refinement
    assert!(
        coarse < 1e-2,
        "translation Rayleigh quotient at M=32: {coarse}"
    );
    assert!(fine < coarse * 0.5 + 1e-12, "no decay: {coarse} -> {fine}");
    println!("translation Rayleigh quotient: M=32 {coarse:.3e} -> M=64 {fine:.3e}");
}

#[test]
fn mesh_self_interaction_is_truncation_small() {
    // two particles: the particle-mesh drift includes a self-term absent
    // from the direct pair sum; measure it and check it scales with the
    // kernel truncation
    let grid = create_grid(1, 64).unwrap();
    let grad_v = RealField::zeros(grid, 1);
    let spec = InteractionSpec::CosineSum(vec![([1, 0], 0.8), ([2, 0], -0.3)]);
    let mult = kernel_multiplier(&spec, grid).unwrap();
    let grad_w = gridded_grad_kernel(&spec, grid, 16).unwrap();

    let state = particles::init_particles(2, 1, 99, ParticleInit::Uniform).unwrap();
    let mesh = particles::mesh_drift(&state, &grad_v, &mult, 16, grid).unwrap();
    let direct = particles::pair_drift(&state, &grad_v, &grad_w);
    let mut worst = 0.0f64;
    for i in 0..2 {
        let at_particle = bilinear(&mesh, 0, state.position(i));
        worst = worst.max((at_particle - direct[i]).abs());
    }
    // the discrepancy is the particle's own smoothed image plus the
    // nearest-node binning offset (≤ h/2), both controlled by ‖∇²W‖ h
    let hess_w_scale =
        0.8 * (2.0 * PI).powi(2) + 0.3 * (4.0 * PI).powi(2);
    let bound = 0.5 * hess_w_scale * grid.spacing();
    assert!(
        worst < bound,
        "self-interaction {worst} above the binning scale {bound}"
    );
    println!(
        "two-particle mesh self-interaction: {worst:.3e} \
         (binning scale ‖∇²W‖h/2 = {bound:.3e})"
    );
}

#[test]
fn small_particle_count_fluctuates_more() {
    // recorded, not asserted as ground truth beyond the ordering: N = 10
    // deviates visibly more from the invariant measure than N = 10⁴
    let grid = create_grid(1, 64).unwrap();
    let (v, grad_v) =
        build_confinement(&ConfinementSpec::CosineSum(vec![([1, 0], 1.0)]), grid).unwrap();
    let mult = mvgf::potentials::KernelMultiplier::zero(grid);
    let gibbs = DensityField::normalized(RealField::from_fn(grid, |x| {
        (-(2.0 * PI * x[0]).cos()).exp()
    }))
    .unwrap();
    let cfg = particles::ParticleRunConfig {
        dt: 1e-3,
        t_end: 1.0,
        temperature: 1.0,
        log_every: 1000,
        snapshot_every: 0,
        bandwidth_modes: 16,
        smoothing_modes: 16,
    };
    let deviation = |n: usize| -> f64 {
        let s0 = particles::init_particles(n, 1, 4242, ParticleInit::Uniform).unwrap();
        let traj = particles::run_particles(&s0, &v, &grad_v, &mult, grid, &cfg).unwrap();
        let (_, emp) = traj.densities.last().unwrap();
        mvgf::metrics::l1_distance(emp, &gibbs).unwrap()
    };
    let small = deviation(10);
    let large = deviation(10_000);
    println!("invariant-measure L¹ deviation: N=10 {small:.3}, N=10000 {large:.3}");
    assert!(small > large, "small-N run should fluctuate more");
}

#[test]
fn dissipation_identity_along_logged_trajectories() {
    // the discrete identity |ΔF/Δt + I| ≤ 10 dt (1 + I) holds along runs
    // whose data resolve the first-order regime (moderate initial I)
    let grid = create_grid(1, 64).unwrap();
    let (v, _) =
        build_confinement(&ConfinementSpec::CosineSum(vec![([1, 0], 0.4)]), grid).unwrap();
    let mult = kernel_multiplier(&InteractionSpec::CosineSum(vec![([1, 0], -0.3)]), grid).unwrap();
    let rho0 = DensityField::normalized(RealField::from_fn(grid, |x| {
        (-0.4 * (2.0 * PI * x[0]).cos()).exp()
    }))
    .unwrap();
    let dt = 5e-4;
    let cfg = FlowConfig {
        dt,
        t_end: 0.5,
        conv_tol: 0.0,
        log_every: 1,
        ..FlowConfig::default()
    };
    let log = flow::run(&rho0, &v, &mult, &cfg).unwrap();
    assert_eq!(log.terminal_status, TerminalStatus::TEndReached);
    let (violation, spacing) = log.dissipation_identity_violation();
    assert!(
        violation <= 10.0 * spacing,
        "identity defect {violation} at spacing {spacing}"
    );
    assert!(log.max_mass_error() <= 1e-12);
}

#[test]
fn distance_to_terminal_is_eventually_monotone() {
    // on a converged trajectory the distance-to-terminal series decreases
    // monotonically inside the fit window
    let grid = create_grid(1, 64).unwrap();
    let (v, _) =
        build_confinement(&ConfinementSpec::CosineSum(vec![([1, 0], 1.0)]), grid).unwrap();
    let mult = mvgf::potentials::KernelMultiplier::zero(grid);
    let rho0 = DensityField::normalized(RealField::from_fn(grid, |x| {
        (-(2.0 * PI * x[0]).cos()).exp() * (1.0 + 0.05 * (2.0 * PI * x[0]).cos())
    }))
    .unwrap();
    let cfg = FlowConfig {
        dt: 2e-4,
        t_end: 2.0,
        adapt_cfl: 10.0,
        conv_tol: 1e-16,
        log_every: 5,
        snapshot_every: 25,
        ..FlowConfig::default()
    };
    let log = flow::run(&rho0, &v, &mult, &cfg).unwrap();
    let fit = mvgf::metrics::lojasiewicz_fit(&log, None).unwrap();
    let distances = mvgf::metrics::distances_to_terminal(&log).unwrap();
    let in_window: Vec<f64> = distances
        .iter()
        .filter(|(t, _)| *t >= fit.window.0 && *t <= fit.window.1)
        .map(|(_, d)| *d)
        .collect();
    assert!(in_window.len() >= 10);
    for w in in_window.windows(2) {
        assert!(
            w[1] <= w[0] * (1.0 + 1e-9),
            "distance series increased: {} -> {}",
            w[0],
            w[1]
        );
    }
}

#[test]
fn rejection_sampling_aborts_below_one_percent() {
    // a near-singular 2-D spike makes the acceptance rate collapse
    let grid = create_grid(2, 64).unwrap();
    let spike = DensityField::normalized(RealField::from_fn(grid, |x| {
        let dx = x[0] - 0.5;
        let dy = x[1] - 0.5;
        (-(dx * dx + dy * dy) / (2.0 * 1e-6)).exp() + 1e-9
    }))
    .unwrap();
    assert!(spike.max() > 1000.0);
    let err = particles::init_particles(500, 2, 7, ParticleInit::Density(&spike)).unwrap_err();
    assert!(format!("{err}").contains("efficiency"), "{err}");
}

#[test]
fn gibbs_energy_tail_is_log_linear() {
    // W = 0 trajectories decay exponentially: consecutive e-fold times of
    // F − F_inf agree once transients die
    let grid = create_grid(1, 64).unwrap();
    let (v, _) =
        build_confinement(&ConfinementSpec::CosineSum(vec![([1, 0], 1.0)]), grid).unwrap();
    let mult = mvgf::potentials::KernelMultiplier::zero(grid);
    let rho0 = DensityField::new(RealField::from_fn(grid, |x| {
        1.0 + 0.2 * (2.0 * PI * x[0]).cos()
    }))
    .unwrap();
    let cfg = FlowConfig {
        dt: 2e-4,
        t_end: 2.0,
        conv_tol: 1e-16,
        log_every: 10,
        ..FlowConfig::default()
    };
    let log = flow::run(&rho0, &v, &mult, &cfg).unwrap();
    assert_eq!(log.terminal_status, TerminalStatus::Converged);
    let f_inf = log.reports.last().unwrap().f;
    let usable: Vec<(f64, f64)> = log
        .reports
        .iter()
        .filter(|r| r.f - f_inf > 1e-11)
        .map(|r| (r.t, (r.f - f_inf).ln()))
        .collect();
    // compare slopes over the first and second half of the usable tail
    let tail = &usable[usable.len() / 3..];
    let half = tail.len() / 2;
    let slope = |pts: &[(f64, f64)]| -> f64 {
        let n = pts.len() as f64;
        let (sx, sy): (f64, f64) = pts.iter().fold((0.0, 0.0), |a, p| (a.0 + p.0, a.1 + p.1));
        let (sxx, sxy): (f64, f64) = pts
            .iter()
            .fold((0.0, 0.0), |a, p| (a.0 + p.0 * p.0, a.1 + p.0 * p.1));
        (n * sxy - sx * sy) / (n * sxx - sx * sx)
    };
    let s1 = slope(&tail[..half]);
    let s2 = slope(&tail[half..]);
    assert!(
        ((s1 - s2) / s1).abs() < 0.02,
        "tail not log-linear: {s1} vs {s2}"
    );
}
