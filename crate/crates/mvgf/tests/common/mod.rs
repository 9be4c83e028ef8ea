//! Shared test oracles, independent of the implementation paths they check:
//! a dense transportation-simplex solver for optimal transport, the
//! Lagrangian pull-back energy for finite-difference Hessians, and the
//! closed-form model trajectories of the rate ODE.

#![allow(dead_code)]

use mvgf::energy::EnergyReport;
use mvgf::flow::{TerminalStatus, TrajectoryLog};
use mvgf::grid::{DensityField, TorusGrid};
use mvgf::potentials::KernelMultiplier;
use std::f64::consts::PI;

// ---------------------------------------------------------------------------
// Discrete optimal transport by the transportation simplex
// ---------------------------------------------------------------------------

/// Exact optimal cost of the dense transportation problem
/// `min Σ c[i][j] x[i][j]` subject to row sums `a` and column sums `b`.
///
/// Textbook transportation simplex: northwest-corner start, potentials from
/// the basis tree, most-negative entering cell, pivot around the unique
/// tree cycle. Suitable for the small instances the tests use (m, n ≤ 256).
pub fn transport_lp_cost(a: &[f64], b: &[f64], cost: &[Vec<f64>]) -> f64 {
    let m = a.len();
    let n = b.len();
    let total_a: f64 = a.iter().sum();
    let total_b: f64 = b.iter().sum();
    let a: Vec<f64> = a.iter().map(|v| v / total_a).collect();
    let b: Vec<f64> = b.iter().map(|v| v / total_b).collect();

    // northwest-corner initial basis: m + n − 1 cells forming a tree
    let mut basis: Vec<(usize, usize, f64)> = Vec::with_capacity(m + n - 1);
    {
        let (mut i, mut j) = (0usize, 0usize);
        let mut rem_a = a[0];
        let mut rem_b = b[0];
        loop {
            let take = rem_a.min(rem_b);
            basis.push((i, j, take));
            rem_a -= take;
            rem_b -= take;
            if i == m - 1 && j == n - 1 {
                break;
            }
            // on ties advance the row only, keeping the basis a tree
            if rem_a <= rem_b && i + 1 < m {
                i += 1;
                rem_a = a[i];
            } else {
                j += 1;
                rem_b = b[j];
            }
        }
    }

    let max_pivots = 200 * (m + n);
    for _ in 0..max_pivots {
        // potentials u, v with u[0] = 0 via traversal of the basis tree
        let mut u = vec![f64::NAN; m];
        let mut v = vec![f64::NAN; n];
        u[0] = 0.0;
        let mut changed = true;
        while changed {
            changed = false;
            for &(i, j, _) in &basis {
                if u[i].is_nan() && !v[j].is_nan() {
                    u[i] = cost[i][j] - v[j];
                    changed = true;
                } else if !u[i].is_nan() && v[j].is_nan() {
                    v[j] = cost[i][j] - u[i];
                    changed = true;
                }
            }
        }

        // entering cell: most negative reduced cost
        let mut entering = None;
        let mut best = -1e-12;
        for i in 0..m {
            for j in 0..n {
                let reduced = cost[i][j] - u[i] - v[j];
                if reduced < best {
                    best = reduced;
                    entering = Some((i, j));
                }
            }
        }
        let (ei, ej) = match entering {
            Some(cell) => cell,
            None => break, // optimal
        };

        // unique path col ej -> row ei through the basis tree (bipartite
        // nodes: rows 0..m, cols m..m+n)
        let row_node = |i: usize| i;
        let col_node = |j: usize| m + j;
        let mut adjacency: Vec<Vec<(usize, usize)>> = vec![Vec::new(); m + n];
        for (idx, &(i, j, _)) in basis.iter().enumerate() {
            adjacency[row_node(i)].push((col_node(j), idx));
            adjacency[col_node(j)].push((row_node(i), idx));
        }
        let mut prev: Vec<Option<(usize, usize)>> = vec![None; m + n];
        let mut stack = vec![col_node(ej)];
        let mut visited = vec![false; m + n];
        visited[col_node(ej)] = true;
        while let Some(node) = stack.pop() {
            if node == row_node(ei) {
                break;
            }
            for &(next, edge) in &adjacency[node] {
                if !visited[next] {
                    visited[next] = true;
                    prev[next] = Some((node, edge));
                    stack.push(next);
                }
            }
        }
        // walk back collecting the cycle edges; entering edge has sign +,
        // alternating along the path
        let mut path_edges = Vec::new();
        let mut node = row_node(ei);
        while let Some((parent, edge)) = prev[node] {
            path_edges.push(edge);
            node = parent;
        }
        // signs: entering (+), then alternate − + − ... starting from the
        // edge adjacent to row ei
        let mut theta = f64::INFINITY;
        let mut leave_idx = usize::MAX;
        for (pos, &edge) in path_edges.iter().enumerate() {
            if pos % 2 == 0 {
                // minus position
                let val = basis[edge].2;
                if val < theta {
                    theta = val;
                    leave_idx = edge;
                }
            }
        }
        for (pos, &edge) in path_edges.iter().enumerate() {
            if pos % 2 == 0 {
                basis[edge].2 -= theta;
            } else {
                basis[edge].2 += theta;
            }
        }
        basis[leave_idx] = (ei, ej, theta);
    }

    basis.iter().map(|&(i, j, x)| x * cost[i][j]).sum()
}

/// Exact atomic W2 on the circle through the LP: cost = squared torus
/// distance between grid nodes.
pub fn w2_circle_lp(mu: &DensityField, nu: &DensityField) -> f64 {
    let grid = mu.grid();
    let m = grid.points_per_axis();
    let h = grid.spacing();
    let a: Vec<f64> = mu.values().iter().map(|v| v.max(0.0)).collect();
    let b: Vec<f64> = nu.values().iter().map(|v| v.max(0.0)).collect();
    let cost: Vec<Vec<f64>> = (0..m)
        .map(|i| {
            (0..m)
                .map(|j| {
                    let mut d = (i as f64 - j as f64) * h;
                    d -= d.round();
                    d * d
                })
                .collect()
        })
        .collect();
    transport_lp_cost(&a, &b, &cost).max(0.0).sqrt()
}

// ---------------------------------------------------------------------------
// Pull-back energy for finite-difference Hessians
// ---------------------------------------------------------------------------

/// A single Fourier potential `cos(2π k·x)` or `sin(2π k·x)`, evaluated
/// analytically together with its derivatives.
#[derive(Clone, Copy)]
pub struct FourierPotential {
    pub k: [i64; 2],
    pub is_sin: bool,
}

impl FourierPotential {
    fn phase(&self, x: &[f64]) -> f64 {
        2.0 * PI * (self.k[0] as f64 * x[0] + self.k[1] as f64 * x.get(1).copied().unwrap_or(0.0))
    }

    /// ∇φ at a point.
    pub fn grad(&self, x: &[f64], dim: usize) -> [f64; 2] {
        let p = self.phase(x);
        let scalar = if self.is_sin { p.cos() } else { -p.sin() };
        let mut out = [0.0; 2];
        for c in 0..dim {
            out[c] = 2.0 * PI * self.k[c] as f64 * scalar;
        }
        out
    }

    /// ∇²φ at a point (symmetric; returns [xx, xy, yy]).
    pub fn hessian(&self, x: &[f64], dim: usize) -> [f64; 3] {
        let p = self.phase(x);
        let scalar = if self.is_sin { -p.sin() } else { -p.cos() };
        let kx = 2.0 * PI * self.k[0] as f64;
        let ky = if dim > 1 {
            2.0 * PI * self.k[1] as f64
        } else {
            0.0
        };
        [kx * kx * scalar, kx * ky * scalar, ky * ky * scalar]
    }
}

/// The Fourier-potential enumeration matching
/// `linearization::fourier_potential_basis`.
pub fn fourier_basis_modes(dim: usize, max_mode: usize) -> Vec<FourierPotential> {
    let m = max_mode as i64;
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
    let mut out = Vec::new();
    for k in half_space {
        out.push(FourierPotential { k, is_sin: false });
        out.push(FourierPotential { k, is_sin: true });
    }
    out
}

/// Pull-back free energy `G(Φ) = F((id + Φ)_# ρ0)` for
/// `Φ = Σ coeff_i ∇φ_i`, evaluated in Lagrangian form (change of variables,
/// no map inversion):
///
/// ```text
/// G = ∫ (log ρ0 − log det(I + ∇Φ)) dρ0 + ∫ V(x + Φ) dρ0
///   + (1/2) Σ_k Ŵ(k) |∫ e^{2πi k·(x+Φ(x))} dρ0|².
/// ```
///
/// V must be a cosine sum; the kernel enters through its multiplier table.
pub fn pullback_energy(
    rho0: &DensityField,
    v_terms: &[([i64; 2], f64)],
    mult: &KernelMultiplier,
    combo: &[(FourierPotential, f64)],
) -> f64 {
    let grid = *rho0.grid();
    let dim = grid.dim();
    let n = grid.len();

    // the kernel's active modes
    let mut w_modes: Vec<([i64; 2], f64)> = Vec::new();
    for i in 0..n {
        let w = mult.value(i);
        if w != 0.0 {
            let k = grid.mode(i);
            w_modes.push((k, w));
        }
    }

    let mut u_part = 0.0;
    let mut v_part = 0.0;
    let mut w_sums: Vec<(f64, f64)> = vec![(0.0, 0.0); w_modes.len()];
    for i in 0..n {
        let node = grid.node(i);
        let x = &node[..dim];
        let rho = rho0.values()[i];

        let mut displaced = [node[0], node[1]];
        let mut jac = [0.0f64; 3];
        for (pot, coeff) in combo {
            let g = pot.grad(x, dim);
            let h = pot.hessian(x, dim);
            for c in 0..dim {
                displaced[c] += coeff * g[c];
            }
            for c in 0..3 {
                jac[c] += coeff * h[c];
            }
        }
        let det = match dim {
            1 => 1.0 + jac[0],
            _ => (1.0 + jac[0]) * (1.0 + jac[2]) - jac[1] * jac[1],
        };
        assert!(det > 0.0, "pull-back map not orientation preserving");
        u_part += (rho.max(1e-300).ln() - det.ln()) * rho;

        for (k, a) in v_terms {
            let phase = 2.0
                * PI
                * (k[0] as f64 * displaced[0] + k[1] as f64 * displaced[1]);
            v_part += a * phase.cos() * rho;
        }
        for (mode_idx, (k, _)) in w_modes.iter().enumerate() {
            let phase = 2.0
                * PI
                * (k[0] as f64 * displaced[0] + k[1] as f64 * displaced[1]);
            w_sums[mode_idx].0 += phase.cos() * rho;
            w_sums[mode_idx].1 += phase.sin() * rho;
        }
    }
    u_part /= n as f64;
    v_part /= n as f64;
    let mut w_part = 0.0;
    for ((_, w), (re, im)) in w_modes.iter().zip(&w_sums) {
        let norm_sq = (re / n as f64).powi(2) + (im / n as f64).powi(2);
        w_part += 0.5 * w * norm_sq;
    }
    u_part + v_part + w_part
}

/// Central-difference Hessian of the pull-back energy on a basis of
/// Fourier potentials; entry (a, b) approximates `d²G(0)[∇φ_a, ∇φ_b]`.
///
/// Steps are scaled per basis element so that `h · ‖∇²φ‖ = step_scale`
/// uniformly (the Jacobian perturbation, which controls both orientation
/// preservation and the relative truncation error, is then mode-independent).
pub fn fd_pullback_hessian(
    rho0: &DensityField,
    v_terms: &[([i64; 2], f64)],
    mult: &KernelMultiplier,
    basis: &[FourierPotential],
    step_scale: f64,
) -> Vec<Vec<f64>> {
    let d = basis.len();
    let step_of = |p: &FourierPotential| -> f64 {
        let k2 = (p.k[0] * p.k[0] + p.k[1] * p.k[1]) as f64;
        step_scale / (4.0 * PI * PI * k2)
    };
    let g0 = pullback_energy(rho0, v_terms, mult, &[]);
    let mut h = vec![vec![0.0; d]; d];
    for a in 0..d {
        let ha = step_of(&basis[a]);
        let gp = pullback_energy(rho0, v_terms, mult, &[(basis[a], ha)]);
        let gm = pullback_energy(rho0, v_terms, mult, &[(basis[a], -ha)]);
        h[a][a] = (gp - 2.0 * g0 + gm) / (ha * ha);
        for b in (a + 1)..d {
            let hb = step_of(&basis[b]);
            let gpp = pullback_energy(rho0, v_terms, mult, &[(basis[a], ha), (basis[b], hb)]);
            let gpm = pullback_energy(rho0, v_terms, mult, &[(basis[a], ha), (basis[b], -hb)]);
            let gmp = pullback_energy(rho0, v_terms, mult, &[(basis[a], -ha), (basis[b], hb)]);
            let gmm = pullback_energy(rho0, v_terms, mult, &[(basis[a], -ha), (basis[b], -hb)]);
            let mixed = (gpp - gpm - gmp + gmm) / (4.0 * ha * hb);
            h[a][b] = mixed;
            h[b][a] = mixed;
        }
    }
    h
}

// ---------------------------------------------------------------------------
// Model trajectories of the rate ODE
// ---------------------------------------------------------------------------

/// Closed-form trajectory of `z' = −c² z^{2θ}` sampled log-uniformly over
/// `[t_lo, t_hi]`, with the matching distance series
/// `d(t) = z^{1−θ} / (c(1−θ))`.
pub fn synthetic_rate_log(
    theta: f64,
    c: f64,
    z0: f64,
    t_lo: f64,
    t_hi: f64,
    n: usize,
) -> (TrajectoryLog, Vec<(f64, f64)>) {
    let c2 = c * c;
    let z = |t: f64| -> f64 {
        if (theta - 0.5).abs() < 1e-14 {
            z0 * (-c2 * t).exp()
        } else {
            let p = 1.0 - 2.0 * theta;
            (z0.powf(p) + (2.0 * theta - 1.0) * c2 * t).powf(1.0 / p)
        }
    };
    let mut reports = Vec::new();
    let mut distances = Vec::new();
    for i in 0..n {
        let frac = i as f64 / (n - 1) as f64;
        let t = (1.0 + t_lo) * ((1.0 + t_hi) / (1.0 + t_lo)).powf(frac) - 1.0;
        let zt = z(t);
        reports.push(EnergyReport {
            t,
            f: zt,
            u_part: zt,
            v_part: 0.0,
            w_part: 0.0,
            dissipation: Some(c2 * zt.powf(2.0 * theta)),
            mass: 1.0,
            rho_min: 1.0,
            rho_max: 1.0,
        });
        distances.push((t, zt.powf(1.0 - theta) / (c * (1.0 - theta))));
    }
    reports.push(EnergyReport {
        t: t_hi * 1.5 + 1.0,
        f: 0.0,
        u_part: 0.0,
        v_part: 0.0,
        w_part: 0.0,
        dissipation: Some(0.0),
        mass: 1.0,
        rho_min: 1.0,
        rho_max: 1.0,
    });
    (
        TrajectoryLog {
            reports,
            snapshots: Vec::new(),
            terminal_status: TerminalStatus::Converged,
            clipped_total: 0.0,
        },
        distances,
    )
}

/// Deterministic pseudo-random stream for test data.
pub struct TestRng(pub u64);

impl TestRng {
    /// Uniform in (−0.5, 0.5).
    pub fn next_centered(&mut self) -> f64 {
        self.0 = self
            .0
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        ((self.0 >> 11) as f64 / (1u64 << 53) as f64) - 0.5
    }

    /// Uniform in (0, 1).
    pub fn next_unit(&mut self) -> f64 {
        self.next_centered() + 0.5
    }
}

/// Random smooth density with low-mode content, bounded away from zero.
pub fn random_smooth_density(grid: TorusGrid, seed: u64, amplitude: f64) -> DensityField {
    let mut rng = TestRng(seed.wrapping_mul(0x9e3779b97f4a7c15).wrapping_add(1));
    let dim = grid.dim();
    let mut terms = Vec::new();
    for k1 in -2i64..=2 {
        for k2 in -2i64..=2 {
            if dim == 1 && k2 != 0 {
                continue;
            }
            if (k1, k2) > (0, 0) {
                terms.push(([k1, k2], amplitude * rng.next_centered()));
            }
        }
    }
    let f = mvgf::grid::RealField::from_fn(grid, |x| {
        1.5 + terms
            .iter()
            .map(|(k, a)| {
                let phase: f64 = (0..dim).map(|j| k[j] as f64 * x[j]).sum();
                a * (2.0 * PI * phase).cos()
            })
            .sum::<f64>()
    });
    DensityField::normalized(f).unwrap()
}
