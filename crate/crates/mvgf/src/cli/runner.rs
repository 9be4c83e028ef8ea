//! Orchestration: resolve a scenario into grids, potentials and initial
//! data, dispatch the requested subcommand, and write every artifact with
//! provenance. Blow-up is a reported outcome, never an error exit.

use std::fs;
use std::path::{Path, PathBuf};

use crate::cli::io::{
    list_snapshots, provenance_header, read_snapshot, read_trajectory_csv, snapshot_filename,
    write_snapshot, write_trajectory_csv,
};
use crate::cli::scenario::{
    serialize_scenario, ConfinementChoice, InitialChoice, Scenario,
};
use crate::error::MvgfError;
use crate::flow::{self, TerminalStatus, TrajectoryLog};
use crate::grid::{create_grid, DensityField, RealField, TorusGrid};
use crate::linearization::{assemble_spectrum, LinearOperatorHandle};
use crate::metrics;
use crate::particles::{self, ParticleInit, ParticleRunConfig};
use crate::potentials::{build_confinement, kernel_multiplier, ConfinementSpec, KernelMultiplier};
use crate::Result;

/// Subcommands that operate on a single scenario.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subcommand {
    Run,
    Stationary,
    Spectrum,
    Fit,
    Particles,
}

/// Outcome handed to the binary: exit code plus a one-line message.
#[derive(Debug)]
pub struct RunSummary {
    pub exit_code: i32,
    pub message: String,
    pub outputs: PathBuf,
}

/// Scenario resolved against a grid: everything a module call needs.
pub struct ResolvedScenario {
    pub grid: TorusGrid,
    pub v: RealField,
    pub grad_v: RealField,
    pub mult: KernelMultiplier,
    pub rho0: DensityField,
}

/// Exit code for an error per the CLI contract: 2 for configuration
/// problems, 3 for numerical failures.
pub fn error_exit_code(e: &MvgfError) -> i32 {
    match e {
        MvgfError::StepFailure { .. }
        | MvgfError::SolverStagnation { .. }
        | MvgfError::NonFinite(_) => 3,
        _ => 2,
    }
}

/// Builds grid, potentials and the initial density; `base_dir` anchors
/// relative paths in the scenario.
pub fn resolve(sc: &Scenario, base_dir: &Path) -> Result<ResolvedScenario> {
    let grid = create_grid(sc.grid_dim, sc.grid_m)?;
    let v_spec = match &sc.v {
        ConfinementChoice::Zero => ConfinementSpec::Zero,
        ConfinementChoice::CosineSum(terms) => ConfinementSpec::CosineSum(terms.clone()),
        ConfinementChoice::TabulatedPath(p) => {
            let field = read_snapshot(&anchor(base_dir, p))?;
            ConfinementSpec::Tabulated(field)
        }
    };
    let (v, grad_v) = build_confinement(&v_spec, grid)?;
    let mult = kernel_multiplier(&sc.w, grid)?;
    let rho0 = initial_density(sc, &v, grid, base_dir)?;
    Ok(ResolvedScenario {
        grid,
        v,
        grad_v,
        mult,
        rho0,
    })
}

fn anchor(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

fn initial_density(
    sc: &Scenario,
    v: &RealField,
    grid: TorusGrid,
    base_dir: &Path,
) -> Result<DensityField> {
    match &sc.initial {
        InitialChoice::Uniform => Ok(DensityField::uniform(grid)),
        InitialChoice::UniformPlusModes(terms) => {
            let mut field = crate::potentials::sample_cosine_sum(grid, terms);
            for val in field.data_mut() {
                *val += 1.0;
            }
            DensityField::new(field)
        }
        InitialChoice::TabulatedPath(p) => {
            let field = read_snapshot(&anchor(base_dir, p))?;
            DensityField::normalized(field)
        }
        InitialChoice::GibbsOfV => {
            let n = grid.len();
            let data: Vec<f64> = (0..n).map(|i| (-v.channel(0)[i]).exp()).collect();
            DensityField::normalized(RealField::from_data(grid, 1, data)?)
        }
    }
}

fn prepare_outdir(sc: &Scenario, base_dir: &Path, out_override: Option<&Path>) -> Result<PathBuf> {
    let outdir = out_override
        .map(|p| p.to_path_buf())
        .unwrap_or_else(|| anchor(base_dir, &sc.outputs_dir));
    fs::create_dir_all(&outdir)?;
    fs::write(outdir.join("scenario.txt"), serialize_scenario(sc))?;
    Ok(outdir)
}

fn write_snapshots(outdir: &Path, log_snapshots: &[(f64, DensityField)]) -> Result<()> {
    let snapdir = outdir.join("snapshots");
    fs::create_dir_all(&snapdir)?;
    for (i, (t, rho)) in log_snapshots.iter().enumerate() {
        write_snapshot(&snapdir.join(snapshot_filename(i, *t)), rho.field())?;
    }
    Ok(())
}

/// Dispatches one scenario subcommand, writing artifacts under the output
/// directory (override with `out_override`, reseed with `seed_override`).
pub fn run_scenario(
    sc: &Scenario,
    cmd: Subcommand,
    base_dir: &Path,
    out_override: Option<&Path>,
    seed_override: Option<u64>,
) -> Result<RunSummary> {
    let mut sc = sc.clone();
    if let Some(seed) = seed_override {
        sc.seed = seed;
    }
    let outdir = prepare_outdir(&sc, base_dir, out_override)?;
    match cmd {
        Subcommand::Run => cmd_run(&sc, base_dir, &outdir),
        Subcommand::Stationary => cmd_stationary(&sc, base_dir, &outdir),
        Subcommand::Spectrum => cmd_spectrum(&sc, base_dir, &outdir),
        Subcommand::Fit => cmd_fit(&sc, &outdir),
        Subcommand::Particles => cmd_particles(&sc, base_dir, &outdir),
    }
}

fn cmd_run(sc: &Scenario, base_dir: &Path, outdir: &Path) -> Result<RunSummary> {
    let resolved = resolve(sc, base_dir)?;
    let log = flow::run(&resolved.rho0, &resolved.v, &resolved.mult, &sc.flow)?;
    write_trajectory_csv(
        &outdir.join("trajectory.csv"),
        &serialize_scenario(sc),
        &log,
        None,
    )?;
    write_snapshots(outdir, &log.snapshots)?;
    let (code, message) = match &log.terminal_status {
        TerminalStatus::StepFailure { t, reason } => {
            (3, format!("step failure at t = {t:.6e}: {reason}"))
        }
        status => (0, format!("status: {}", status.label())),
    };
    Ok(RunSummary {
        exit_code: code,
        message,
        outputs: outdir.to_path_buf(),
    })
}

fn cmd_stationary(sc: &Scenario, base_dir: &Path, outdir: &Path) -> Result<RunSummary> {
    let resolved = resolve(sc, base_dir)?;
    let (rho, report) = flow::stationary_fixed_point(
        &resolved.rho0,
        &resolved.v,
        &resolved.mult,
        sc.stationary.damping,
        sc.stationary.max_iter,
        sc.stationary.tol,
    )?;
    write_snapshot(&outdir.join("stationary.mvgf"), rho.field())?;
    let mut text = provenance_header(&serialize_scenario(sc));
    text.push_str(&format!(
        "converged: {}\niterations: {}\ndelta_inf: {:.6e}\nresidual: {:.6e}\n",
        report.converged, report.iterations, report.delta_inf, report.residual
    ));
    fs::write(outdir.join("stationary_report.txt"), text)?;
    Ok(RunSummary {
        exit_code: if report.converged { 0 } else { 3 },
        message: format!(
            "stationary: converged = {}, residual = {:.3e}",
            report.converged, report.residual
        ),
        outputs: outdir.to_path_buf(),
    })
}

fn cmd_spectrum(sc: &Scenario, base_dir: &Path, outdir: &Path) -> Result<RunSummary> {
    let resolved = resolve(sc, base_dir)?;
    let handle =
        LinearOperatorHandle::new(resolved.rho0, &resolved.v, resolved.mult)?;
    let report = assemble_spectrum(&handle, sc.spectrum.max_mode)?;
    let mut text = provenance_header(&serialize_scenario(sc));
    text.push_str("index,eigenvalue\n");
    for (i, lambda) in report.eigenvalues.iter().enumerate() {
        text.push_str(&format!("{i},{lambda:.16e}\n"));
    }
    text.push_str(&format!(
        "# kernel_dim: {}, kernel_tol: {:.6e}, basis_size: {}\n",
        report.kernel_dim, report.kernel_tol, report.basis_size
    ));
    fs::write(outdir.join("spectrum.csv"), text)?;
    Ok(RunSummary {
        exit_code: 0,
        message: format!(
            "spectrum: {} eigenvalues, kernel_dim = {}",
            report.basis_size, report.kernel_dim
        ),
        outputs: outdir.to_path_buf(),
    })
}

/// Rebuilds a trajectory log from a run directory (CSV + snapshots).
pub fn load_run(outdir: &Path) -> Result<TrajectoryLog> {
    let (reports, terminal_status) = read_trajectory_csv(&outdir.join("trajectory.csv"))?;
    let mut snapshots = Vec::new();
    for (t, path) in list_snapshots(&outdir.join("snapshots"))? {
        snapshots.push((t, DensityField::normalized(read_snapshot(&path)?)?));
    }
    Ok(TrajectoryLog {
        reports,
        snapshots,
        terminal_status,
        clipped_total: 0.0,
    })
}

fn cmd_fit(sc: &Scenario, outdir: &Path) -> Result<RunSummary> {
    let log = load_run(outdir)?;
    let fit = metrics::lojasiewicz_fit(&log, None)?;
    let distances = metrics::distances_to_terminal(&log)?;
    let rate = metrics::rate_check(&fit, &distances)?;
    let length = metrics::trajectory_length(&log, &fit)?;

    let mut text = provenance_header(&serialize_scenario(sc));
    text.push_str(
        "theta,c,window_lo,window_hi,r2,regime,fitted_rate,predicted_rate,relative_gap\n",
    );
    text.push_str(&format!(
        "{:.9e},{:.9e},{:.9e},{:.9e},{:.9},{},{:.9e},{:.9e},{:.9e}\n",
        fit.theta,
        fit.c,
        fit.window.0,
        fit.window.1,
        fit.r2,
        rate.regime.label(),
        rate.fitted_rate,
        rate.predicted_rate,
        rate.relative_gap
    ));
    text.push_str(&format!(
        "# trajectory_length: {:.9e}, bound: {:.9e}, n_points: {}\n",
        length.length, length.bound, fit.n_points
    ));
    if let Some(flag) = &fit.flag {
        text.push_str(&format!("# flag: {flag}\n"));
    }
    text.push_str(
        "# note: the fit window stands in for the (unquantified) neighborhood \
         where the gradient inequality holds\n",
    );
    fs::write(outdir.join("fit_report.csv"), text)?;
    Ok(RunSummary {
        exit_code: 0,
        message: format!(
            "fit: theta = {:.4}, c = {:.4}, r2 = {:.6}, {} gap = {:.3}",
            fit.theta,
            fit.c,
            fit.r2,
            rate.regime.label(),
            rate.relative_gap
        ),
        outputs: outdir.to_path_buf(),
    })
}

fn cmd_particles(sc: &Scenario, base_dir: &Path, outdir: &Path) -> Result<RunSummary> {
    let resolved = resolve(sc, base_dir)?;
    let init = match &sc.initial {
        InitialChoice::Uniform => ParticleInit::Uniform,
        _ => ParticleInit::Density(&resolved.rho0),
    };
    let state0 = particles::init_particles(sc.particles.n, sc.grid_dim, sc.seed, init)?;
    let cfg = ParticleRunConfig {
        dt: sc.particles.dt,
        t_end: sc.particles.t_end,
        temperature: sc.particles.temperature,
        log_every: sc.particles.log_every,
        snapshot_every: sc.particles.snapshot_every,
        bandwidth_modes: sc.particles.bandwidth_modes,
        smoothing_modes: sc.particles.smoothing_modes,
    };
    let traj = particles::run_particles(
        &state0,
        &resolved.v,
        &resolved.grad_v,
        &resolved.mult,
        resolved.grid,
        &cfg,
    )?;
    let log = TrajectoryLog {
        reports: traj.reports,
        snapshots: traj.densities,
        terminal_status: TerminalStatus::TEndReached,
        clipped_total: 0.0,
    };
    write_trajectory_csv(
        &outdir.join("particles.csv"),
        &serialize_scenario(sc),
        &log,
        Some("particles"),
    )?;
    write_snapshots(outdir, &log.snapshots)?;
    Ok(RunSummary {
        exit_code: 0,
        message: format!(
            "particles: {} particles advanced to t = {}",
            sc.particles.n, sc.particles.t_end
        ),
        outputs: outdir.to_path_buf(),
    })
}

/// One matched-time pair of states from two runs.
#[derive(Debug, Clone)]
pub struct ComparePair {
    pub t_a: f64,
    pub t_b: f64,
    pub l1: f64,
    pub linf: f64,
    pub tv_bound: f64,
    /// Exact transport distance; 1-D only.
    pub d2: Option<f64>,
}

#[derive(Debug)]
pub struct CompareReport {
    pub pairs: Vec<ComparePair>,
    pub max_l1: f64,
    pub max_linf: f64,
    pub terminal_l1: f64,
}

/// Pairs snapshots from two run directories by nearest time stamp and
/// reports per-pair distances plus summary extremes.
pub fn compare(dir_a: &Path, dir_b: &Path, out: Option<&Path>) -> Result<CompareReport> {
    let snaps_a = list_snapshots(&dir_a.join("snapshots"))?;
    let snaps_b = list_snapshots(&dir_b.join("snapshots"))?;
    if snaps_a.is_empty() || snaps_b.is_empty() {
        return Err(MvgfError::Precondition(format!(
            "no snapshots under {} or {}",
            dir_a.display(),
            dir_b.display()
        )));
    }
    // nearest-time pairing within half the coarser snapshot spacing
    let spacing = |s: &[(f64, PathBuf)]| -> f64 {
        if s.len() < 2 {
            f64::INFINITY
        } else {
            (s.last().unwrap().0 - s[0].0) / (s.len() - 1) as f64
        }
    };
    let tol = 0.5 * spacing(&snaps_a).min(spacing(&snaps_b)).max(1e-12);

    let mut pairs = Vec::new();
    for (ta, pa) in &snaps_a {
        let nearest = snaps_b
            .iter()
            .min_by(|(tb1, _), (tb2, _)| {
                (tb1 - ta).abs().partial_cmp(&(tb2 - ta).abs()).unwrap()
            })
            .unwrap();
        let (tb, pb) = nearest;
        let is_terminal_pair =
            ta == &snaps_a.last().unwrap().0 && tb == &snaps_b.last().unwrap().0;
        if (tb - ta).abs() > tol && !is_terminal_pair {
            continue;
        }
        let rho_a = DensityField::normalized(read_snapshot(pa)?)?;
        let rho_b = DensityField::normalized(read_snapshot(pb)?)?;
        crate::grid::check_same_grid(rho_a.grid(), rho_b.grid(), "compare")?;
        let d2 = if rho_a.grid().dim() == 1 {
            Some(metrics::wasserstein2_circle(&rho_a, &rho_b)?)
        } else {
            None
        };
        pairs.push(ComparePair {
            t_a: *ta,
            t_b: *tb,
            l1: metrics::l1_distance(&rho_a, &rho_b)?,
            linf: metrics::linf_distance(&rho_a, &rho_b)?,
            tv_bound: metrics::tv_d2_bound(&rho_a, &rho_b)?,
            d2,
        });
    }
    if pairs.is_empty() {
        return Err(MvgfError::Precondition(
            "no snapshot pairs within the time tolerance".into(),
        ));
    }
    let max_l1 = pairs.iter().map(|p| p.l1).fold(0.0, f64::max);
    let max_linf = pairs.iter().map(|p| p.linf).fold(0.0, f64::max);
    let terminal_l1 = pairs.last().unwrap().l1;

    if let Some(outdir) = out {
        fs::create_dir_all(outdir)?;
        let mut text = format!("# mvgf {}\n", env!("CARGO_PKG_VERSION"));
        text.push_str(&format!(
            "# compare: a = {}, b = {}\n",
            dir_a.display(),
            dir_b.display()
        ));
        text.push_str("t_a,t_b,l1,linf,tv_bound,d2\n");
        for p in &pairs {
            text.push_str(&format!(
                "{:.9e},{:.9e},{:.9e},{:.9e},{:.9e},{}\n",
                p.t_a,
                p.t_b,
                p.l1,
                p.linf,
                p.tv_bound,
                p.d2.map(|d| format!("{d:.9e}")).unwrap_or_default()
            ));
        }
        text.push_str(&format!(
            "# summary: {{max_l1: {max_l1:.9e}, max_linf: {max_linf:.9e}, \
             terminal_l1: {terminal_l1:.9e}, pairs: {}}}\n",
            pairs.len()
        ));
        fs::write(outdir.join("compare_report.csv"), text)?;
    }
    Ok(CompareReport {
        pairs,
        max_l1,
        max_linf,
        terminal_l1,
    })
}
