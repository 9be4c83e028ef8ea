//! Scenario configuration: a strict line-oriented `key = value` grammar
//! with sections. Unknown keys and sections are errors, so typos never
//! silently change an experiment.
//!
//! ```text
//! name = keller_segel_subcritical
//! seed = 42
//!
//! [grid]
//! dim = 2
//! M = 64
//!
//! [V]
//! kind = cosine_sum           # zero | cosine_sum | tabulated
//! modes = [((1,0),0.5)]       # a·cos(2π k·x) terms
//!
//! [W]
//! kind = newtonian_green      # zero | fourier_multiplier | newtonian_green
//! chi = 10.0                  # | yukawa_green | radial_power | cosine_sum
//!
//! [initial]
//! kind = uniform_plus_modes   # uniform | uniform_plus_modes | tabulated
//! modes = [((1,0),0.1)]       # | gibbs_of_V
//!
//! [flow]
//! dt = 1e-3
//! t_end = 2.0
//!
//! [outputs]
//! dir = out/ks
//! ```
//!
//! Optional sections `[stationary]`, `[spectrum]` and `[particles]`
//! parameterize the corresponding subcommands. Mode lists use
//! `[((k1),a)]` in 1-D and `[((k1,k2),a)]` in 2-D; `W.terms` uses
//! `[(L,gamma), ...]`.

use std::path::PathBuf;

use crate::error::MvgfError;
use crate::flow::FlowConfig;
use crate::grid::create_grid;
use crate::potentials::{kernel_multiplier, CosineTerm, InteractionSpec};
use crate::Result;

/// Confinement choice at the configuration level (tabulated data is a path
/// until run time).
#[derive(Debug, Clone, PartialEq)]
pub enum ConfinementChoice {
    Zero,
    CosineSum(Vec<CosineTerm>),
    TabulatedPath(PathBuf),
}

/// Initial-datum choice.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialChoice {
    Uniform,
    /// ρ0 = 1 + Σ a cos(2π k·x).
    UniformPlusModes(Vec<CosineTerm>),
    TabulatedPath(PathBuf),
    GibbsOfV,
}

/// Parameters of the stationary fixed-point subcommand.
#[derive(Debug, Clone, PartialEq)]
pub struct StationaryConfig {
    pub damping: f64,
    pub max_iter: usize,
    pub tol: f64,
}

impl Default for StationaryConfig {
    fn default() -> Self {
        StationaryConfig {
            damping: 0.5,
            max_iter: 2000,
            tol: 1e-13,
        }
    }
}

/// Parameters of the spectrum subcommand.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumConfig {
    pub max_mode: usize,
}

impl Default for SpectrumConfig {
    fn default() -> Self {
        SpectrumConfig { max_mode: 3 }
    }
}

/// Parameters of the particles subcommand.
#[derive(Debug, Clone, PartialEq)]
pub struct ParticlesConfig {
    pub n: usize,
    pub dt: f64,
    pub t_end: f64,
    pub temperature: f64,
    pub log_every: usize,
    pub snapshot_every: usize,
    pub bandwidth_modes: usize,
    pub smoothing_modes: usize,
}

impl Default for ParticlesConfig {
    fn default() -> Self {
        ParticlesConfig {
            n: 10_000,
            dt: 1e-3,
            t_end: 1.0,
            temperature: 1.0,
            log_every: 100,
            snapshot_every: 0,
            bandwidth_modes: 8,
            smoothing_modes: 8,
        }
    }
}

/// Full description of one experiment; every run is reproducible from this
/// plus the artifact version.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub seed: u64,
    pub grid_dim: usize,
    pub grid_m: usize,
    pub v: ConfinementChoice,
    pub w: InteractionSpec,
    pub initial: InitialChoice,
    pub flow: FlowConfig,
    pub outputs_dir: PathBuf,
    pub stationary: StationaryConfig,
    pub spectrum: SpectrumConfig,
    pub particles: ParticlesConfig,
}

impl Default for Scenario {
    fn default() -> Self {
        Scenario {
            name: "unnamed".into(),
            seed: 0,
            grid_dim: 1,
            grid_m: 64,
            v: ConfinementChoice::Zero,
            w: InteractionSpec::Zero,
            initial: InitialChoice::Uniform,
            flow: FlowConfig::default(),
            outputs_dir: PathBuf::from("out"),
            stationary: StationaryConfig::default(),
            spectrum: SpectrumConfig::default(),
            particles: ParticlesConfig::default(),
        }
    }
}

fn err(line: usize, msg: impl Into<String>) -> MvgfError {
    MvgfError::Config {
        line,
        msg: msg.into(),
    }
}

fn parse_f64(line: usize, key: &str, value: &str) -> Result<f64> {
    value
        .parse::<f64>()
        .map_err(|_| err(line, format!("{key}: expected a number, got `{value}`")))
}

fn parse_usize(line: usize, key: &str, value: &str) -> Result<usize> {
    value
        .parse::<usize>()
        .map_err(|_| err(line, format!("{key}: expected a nonnegative integer, got `{value}`")))
}

fn parse_bool(line: usize, key: &str, value: &str) -> Result<bool> {
    match value {
        "true" | "on" | "yes" => Ok(true),
        "false" | "off" | "no" => Ok(false),
        _ => Err(err(line, format!("{key}: expected true/false, got `{value}`"))),
    }
}

/// Splits a bracketed list `[item, item, ...]` at top-level commas.
fn split_list(line: usize, value: &str) -> Result<Vec<String>> {
    let inner = value
        .strip_prefix('[')
        .and_then(|s| s.strip_suffix(']'))
        .ok_or_else(|| err(line, format!("expected [ ... ], got `{value}`")))?;
    let mut items = Vec::new();
    let mut depth = 0usize;
    let mut current = String::new();
    for ch in inner.chars() {
        match ch {
            '(' => {
                depth += 1;
                current.push(ch);
            }
            ')' => {
                depth = depth
                    .checked_sub(1)
                    .ok_or_else(|| err(line, "unbalanced parentheses"))?;
                current.push(ch);
            }
            ',' if depth == 0 => {
                items.push(current.trim().to_string());
                current.clear();
            }
            _ => current.push(ch),
        }
    }
    if depth != 0 {
        return Err(err(line, "unbalanced parentheses"));
    }
    if !current.trim().is_empty() {
        items.push(current.trim().to_string());
    }
    Ok(items.into_iter().filter(|s| !s.is_empty()).collect())
}

/// Parses `((k1),a)` or `((k1,k2),a)`.
fn parse_mode_term(line: usize, item: &str) -> Result<CosineTerm> {
    let inner = item
        .strip_prefix('(')
        .and_then(|s| s.strip_suffix(')'))
        .ok_or_else(|| err(line, format!("expected ((k),a), got `{item}`")))?;
    let close = inner
        .find(')')
        .ok_or_else(|| err(line, format!("expected a mode tuple in `{item}`")))?;
    let mode_str = inner[..=close]
        .trim()
        .strip_prefix('(')
        .and_then(|s| s.strip_suffix(')'))
        .ok_or_else(|| err(line, format!("expected a mode tuple in `{item}`")))?;
    let rest = inner[close + 1..]
        .trim()
        .strip_prefix(',')
        .ok_or_else(|| err(line, format!("expected `,amplitude` after the mode in `{item}`")))?;
    let mut k = [0i64; 2];
    for (j, part) in mode_str.split(',').enumerate() {
        if j >= 2 {
            return Err(err(line, "modes have at most two components"));
        }
        k[j] = part
            .trim()
            .parse::<i64>()
            .map_err(|_| err(line, format!("bad mode component `{part}`")))?;
    }
    let amp = parse_f64(line, "amplitude", rest.trim())?;
    Ok((k, amp))
}

fn parse_mode_list(line: usize, value: &str) -> Result<Vec<CosineTerm>> {
    split_list(line, value)?
        .iter()
        .map(|item| parse_mode_term(line, item))
        .collect()
}

/// Parses `[(L,gamma), ...]`.
fn parse_pair_list(line: usize, value: &str) -> Result<Vec<(f64, f64)>> {
    split_list(line, value)?
        .iter()
        .map(|item| {
            let inner = item
                .strip_prefix('(')
                .and_then(|s| s.strip_suffix(')'))
                .ok_or_else(|| err(line, format!("expected (L,gamma), got `{item}`")))?;
            let mut parts = inner.split(',');
            let l = parse_f64(line, "L", parts.next().unwrap_or("").trim())?;
            let gamma = parse_f64(
                line,
                "gamma",
                parts
                    .next()
                    .ok_or_else(|| err(line, "missing gamma"))?
                    .trim(),
            )?;
            if parts.next().is_some() {
                return Err(err(line, "too many components in pair"));
            }
            Ok((l, gamma))
        })
        .collect()
}

#[derive(Default)]
struct RawSection {
    entries: Vec<(usize, String, String)>,
}

impl RawSection {
    fn take(&mut self, key: &str) -> Option<(usize, String)> {
        let idx = self.entries.iter().position(|(_, k, _)| k == key)?;
        let (line, _, value) = self.entries.remove(idx);
        Some((line, value))
    }

    fn reject_leftovers(&self, section: &str) -> Result<()> {
        if let Some((line, key, _)) = self.entries.first() {
            return Err(err(
                *line,
                format!("unknown key `{key}` in section [{section}]"),
            ));
        }
        Ok(())
    }
}

/// Parses and validates a scenario; rejects unknown keys with line numbers.
pub fn parse_scenario(text: &str) -> Result<Scenario> {
    let mut sections: Vec<(String, usize, RawSection)> = vec![("".into(), 0, RawSection::default())];
    for (idx, raw_line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = match raw_line.find('#') {
            Some(pos) => &raw_line[..pos],
            None => raw_line,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix('[') {
            let name = name
                .strip_suffix(']')
                .ok_or_else(|| err(line_no, "unterminated section header"))?
                .trim()
                .to_string();
            const KNOWN: [&str; 8] = [
                "grid",
                "V",
                "W",
                "initial",
                "flow",
                "outputs",
                "stationary",
                "spectrum",
            ];
            if !KNOWN.contains(&name.as_str()) && name != "particles" {
                return Err(err(line_no, format!("unknown section [{name}]")));
            }
            sections.push((name, line_no, RawSection::default()));
            continue;
        }
        let eq = line
            .find('=')
            .ok_or_else(|| err(line_no, format!("expected `key = value`, got `{line}`")))?;
        let key = line[..eq].trim().to_string();
        let value = line[eq + 1..].trim().to_string();
        if key.is_empty() || value.is_empty() {
            return Err(err(line_no, "empty key or value"));
        }
        sections.last_mut().unwrap().2.entries.push((line_no, key, value));
    }

    let mut sc = Scenario::default();
    let mut seen = Vec::new();
    for (name, line_no, mut section) in sections {
        if !name.is_empty() && seen.contains(&name) {
            return Err(err(line_no, format!("duplicate section [{name}]")));
        }
        seen.push(name.clone());
        match name.as_str() {
            "" => {
                if let Some((_, v)) = section.take("name") {
                    sc.name = v;
                }
                if let Some((l, v)) = section.take("seed") {
                    sc.seed = v
                        .parse::<u64>()
                        .map_err(|_| err(l, format!("seed: expected u64, got `{v}`")))?;
                }
                section.reject_leftovers("<top level>")?;
            }
            "grid" => {
                if let Some((l, v)) = section.take("dim") {
                    sc.grid_dim = parse_usize(l, "dim", &v)?;
                }
                if let Some((l, v)) = section.take("M") {
                    sc.grid_m = parse_usize(l, "M", &v)?;
                }
                section.reject_leftovers("grid")?;
            }
            "V" => {
                let (kind_line, kind) = section
                    .take("kind")
                    .ok_or_else(|| err(line_no, "[V] requires `kind`"))?;
                sc.v = match kind.as_str() {
                    "zero" => ConfinementChoice::Zero,
                    "cosine_sum" => {
                        let (l, v) = section
                            .take("modes")
                            .ok_or_else(|| err(kind_line, "cosine_sum requires `modes`"))?;
                        ConfinementChoice::CosineSum(parse_mode_list(l, &v)?)
                    }
                    "tabulated" => {
                        let (_, v) = section
                            .take("path")
                            .ok_or_else(|| err(kind_line, "tabulated requires `path`"))?;
                        ConfinementChoice::TabulatedPath(PathBuf::from(v))
                    }
                    other => {
                        return Err(err(
                            kind_line,
                            format!("unknown confinement kind `{other}`"),
                        ))
                    }
                };
                section.reject_leftovers("V")?;
            }
            "W" => {
                let (kind_line, kind) = section
                    .take("kind")
                    .ok_or_else(|| err(line_no, "[W] requires `kind`"))?;
                sc.w = match kind.as_str() {
                    "zero" => InteractionSpec::Zero,
                    "fourier_multiplier" => {
                        let (l, v) = section
                            .take("modes")
                            .ok_or_else(|| err(kind_line, "fourier_multiplier requires `modes`"))?;
                        InteractionSpec::FourierMultiplier(
                            parse_mode_list(l, &v)?
                                .into_iter()
                                .collect(),
                        )
                    }
                    "newtonian_green" => {
                        let (l, v) = section
                            .take("chi")
                            .ok_or_else(|| err(kind_line, "newtonian_green requires `chi`"))?;
                        InteractionSpec::NewtonianGreen {
                            chi: parse_f64(l, "chi", &v)?,
                        }
                    }
                    "yukawa_green" => {
                        let (lc, vc) = section
                            .take("chi")
                            .ok_or_else(|| err(kind_line, "yukawa_green requires `chi`"))?;
                        let (la, va) = section
                            .take("alpha")
                            .ok_or_else(|| err(kind_line, "yukawa_green requires `alpha`"))?;
                        let alpha = parse_f64(la, "alpha", &va)?;
                        if alpha <= 0.0 {
                            return Err(err(
                                la,
                                format!(
                                    "yukawa_green requires alpha > 0 (got {alpha}): the \
                                     screened Green function of Δ − α needs positive screening"
                                ),
                            ));
                        }
                        InteractionSpec::YukawaGreen {
                            chi: parse_f64(lc, "chi", &vc)?,
                            alpha,
                        }
                    }
                    "radial_power" => {
                        let (l, v) = section
                            .take("terms")
                            .ok_or_else(|| err(kind_line, "radial_power requires `terms`"))?;
                        InteractionSpec::RadialPower(parse_pair_list(l, &v)?)
                    }
                    "cosine_sum" => {
                        let (l, v) = section
                            .take("modes")
                            .ok_or_else(|| err(kind_line, "cosine_sum requires `modes`"))?;
                        InteractionSpec::CosineSum(parse_mode_list(l, &v)?)
                    }
                    other => {
                        return Err(err(kind_line, format!("unknown interaction kind `{other}`")))
                    }
                };
                section.reject_leftovers("W")?;
            }
            "initial" => {
                let (kind_line, kind) = section
                    .take("kind")
                    .ok_or_else(|| err(line_no, "[initial] requires `kind`"))?;
                sc.initial = match kind.as_str() {
                    "uniform" => InitialChoice::Uniform,
                    "uniform_plus_modes" => {
                        let (l, v) = section
                            .take("modes")
                            .ok_or_else(|| err(kind_line, "uniform_plus_modes requires `modes`"))?;
                        InitialChoice::UniformPlusModes(parse_mode_list(l, &v)?)
                    }
                    "tabulated" => {
                        let (_, v) = section
                            .take("path")
                            .ok_or_else(|| err(kind_line, "tabulated requires `path`"))?;
                        InitialChoice::TabulatedPath(PathBuf::from(v))
                    }
                    "gibbs_of_V" => InitialChoice::GibbsOfV,
                    other => return Err(err(kind_line, format!("unknown initial kind `{other}`"))),
                };
                section.reject_leftovers("initial")?;
            }
            "flow" => {
                if let Some((l, v)) = section.take("dt") {
                    sc.flow.dt = parse_f64(l, "dt", &v)?;
                }
                if let Some((l, v)) = section.take("t_end") {
                    sc.flow.t_end = parse_f64(l, "t_end", &v)?;
                }
                if let Some((l, v)) = section.take("dealias") {
                    sc.flow.dealias = parse_bool(l, "dealias", &v)?;
                }
                if let Some((l, v)) = section.take("adapt_cfl") {
                    sc.flow.adapt_cfl = parse_f64(l, "adapt_cfl", &v)?;
                }
                if let Some((l, v)) = section.take("floor_policy") {
                    if v != "clip_renormalize" {
                        return Err(err(
                            l,
                            format!("unknown floor_policy `{v}` (only clip_renormalize)"),
                        ));
                    }
                }
                if let Some((l, v)) = section.take("blowup_linf") {
                    sc.flow.blowup_linf = parse_f64(l, "blowup_linf", &v)?;
                }
                if let Some((l, v)) = section.take("log_every") {
                    sc.flow.log_every = parse_usize(l, "log_every", &v)?;
                }
                if let Some((l, v)) = section.take("snapshot_every") {
                    sc.flow.snapshot_every = parse_usize(l, "snapshot_every", &v)?;
                }
                if let Some((l, v)) = section.take("conv_tol") {
                    sc.flow.conv_tol = parse_f64(l, "conv_tol", &v)?;
                }
                section.reject_leftovers("flow")?;
            }
            "outputs" => {
                if let Some((_, v)) = section.take("dir") {
                    sc.outputs_dir = PathBuf::from(v);
                }
                section.reject_leftovers("outputs")?;
            }
            "stationary" => {
                if let Some((l, v)) = section.take("damping") {
                    sc.stationary.damping = parse_f64(l, "damping", &v)?;
                }
                if let Some((l, v)) = section.take("max_iter") {
                    sc.stationary.max_iter = parse_usize(l, "max_iter", &v)?;
                }
                if let Some((l, v)) = section.take("tol") {
                    sc.stationary.tol = parse_f64(l, "tol", &v)?;
                }
                section.reject_leftovers("stationary")?;
            }
            "spectrum" => {
                if let Some((l, v)) = section.take("max_mode") {
                    sc.spectrum.max_mode = parse_usize(l, "max_mode", &v)?;
                }
                section.reject_leftovers("spectrum")?;
            }
            "particles" => {
                if let Some((l, v)) = section.take("n") {
                    sc.particles.n = parse_usize(l, "n", &v)?;
                }
                if let Some((l, v)) = section.take("dt") {
                    sc.particles.dt = parse_f64(l, "dt", &v)?;
                }
                if let Some((l, v)) = section.take("t_end") {
                    sc.particles.t_end = parse_f64(l, "t_end", &v)?;
                }
                if let Some((l, v)) = section.take("temperature") {
                    sc.particles.temperature = parse_f64(l, "temperature", &v)?;
                }
                if let Some((l, v)) = section.take("log_every") {
                    sc.particles.log_every = parse_usize(l, "log_every", &v)?;
                }
                if let Some((l, v)) = section.take("snapshot_every") {
                    sc.particles.snapshot_every = parse_usize(l, "snapshot_every", &v)?;
                }
                if let Some((l, v)) = section.take("bandwidth_modes") {
                    sc.particles.bandwidth_modes = parse_usize(l, "bandwidth_modes", &v)?;
                }
                if let Some((l, v)) = section.take("smoothing_modes") {
                    sc.particles.smoothing_modes = parse_usize(l, "smoothing_modes", &v)?;
                }
                section.reject_leftovers("particles")?;
            }
            _ => unreachable!("section names validated above"),
        }
    }

    validate(&sc)?;
    Ok(sc)
}

/// Structural validation: grid constraints, kernel constraints (through a
/// real multiplier build), flow parameters.
fn validate(sc: &Scenario) -> Result<()> {
    let grid = create_grid(sc.grid_dim, sc.grid_m)?;
    kernel_multiplier(&sc.w, grid)?;
    sc.flow.validate()?;
    if let ConfinementChoice::CosineSum(terms) = &sc.v {
        for (k, _) in terms {
            for &kj in &k[..sc.grid_dim] {
                if kj.unsigned_abs() as usize >= sc.grid_m / 2 {
                    return Err(MvgfError::InvalidSpec(format!(
                        "confinement mode {k:?} outside the grid mode set"
                    )));
                }
            }
        }
    }
    if let InitialChoice::UniformPlusModes(terms) = &sc.initial {
        let amp: f64 = terms.iter().map(|(_, a)| a.abs()).sum();
        if amp >= 1.0 {
            return Err(MvgfError::InvalidSpec(format!(
                "uniform_plus_modes amplitudes sum to {amp} >= 1; the initial \
                 density would be negative"
            )));
        }
    }
    if sc.particles.n == 0 {
        return Err(MvgfError::InvalidSpec("particles.n must be >= 1".into()));
    }
    if sc.particles.bandwidth_modes > sc.grid_m / 2
        || sc.particles.smoothing_modes > sc.grid_m / 2
    {
        return Err(MvgfError::InvalidSpec(
            "particle mode cutoffs must not exceed M/2".into(),
        ));
    }
    Ok(())
}

fn fmt_modes(terms: &[CosineTerm], dim: usize) -> String {
    let items: Vec<String> = terms
        .iter()
        .map(|(k, a)| {
            if dim == 1 {
                format!("(({}),{})", k[0], a)
            } else {
                format!("(({},{}),{})", k[0], k[1], a)
            }
        })
        .collect();
    format!("[{}]", items.join(", "))
}

/// Serializes a scenario back into the grammar; `parse_scenario` of the
/// output reproduces the scenario exactly.
pub fn serialize_scenario(sc: &Scenario) -> String {
    let mut out = String::new();
    out.push_str(&format!("name = {}\n", sc.name));
    out.push_str(&format!("seed = {}\n\n", sc.seed));
    out.push_str(&format!("[grid]\ndim = {}\nM = {}\n\n", sc.grid_dim, sc.grid_m));

    out.push_str("[V]\n");
    match &sc.v {
        ConfinementChoice::Zero => out.push_str("kind = zero\n"),
        ConfinementChoice::CosineSum(terms) => {
            out.push_str("kind = cosine_sum\n");
            out.push_str(&format!("modes = {}\n", fmt_modes(terms, sc.grid_dim)));
        }
        ConfinementChoice::TabulatedPath(p) => {
            out.push_str("kind = tabulated\n");
            out.push_str(&format!("path = {}\n", p.display()));
        }
    }
    out.push('\n');

    out.push_str("[W]\n");
    match &sc.w {
        InteractionSpec::Zero => out.push_str("kind = zero\n"),
        InteractionSpec::FourierMultiplier(entries) => {
            out.push_str("kind = fourier_multiplier\n");
            out.push_str(&format!("modes = {}\n", fmt_modes(entries, sc.grid_dim)));
        }
        InteractionSpec::NewtonianGreen { chi } => {
            out.push_str("kind = newtonian_green\n");
            out.push_str(&format!("chi = {chi}\n"));
        }
        InteractionSpec::YukawaGreen { chi, alpha } => {
            out.push_str("kind = yukawa_green\n");
            out.push_str(&format!("chi = {chi}\nalpha = {alpha}\n"));
        }
        InteractionSpec::RadialPower(terms) => {
            out.push_str("kind = radial_power\n");
            let items: Vec<String> = terms.iter().map(|(l, g)| format!("({l},{g})")).collect();
            out.push_str(&format!("terms = [{}]\n", items.join(", ")));
        }
        InteractionSpec::CosineSum(terms) => {
            out.push_str("kind = cosine_sum\n");
            out.push_str(&format!("modes = {}\n", fmt_modes(terms, sc.grid_dim)));
        }
    }
    out.push('\n');

    out.push_str("[initial]\n");
    match &sc.initial {
        InitialChoice::Uniform => out.push_str("kind = uniform\n"),
        InitialChoice::UniformPlusModes(terms) => {
            out.push_str("kind = uniform_plus_modes\n");
            out.push_str(&format!("modes = {}\n", fmt_modes(terms, sc.grid_dim)));
        }
        InitialChoice::TabulatedPath(p) => {
            out.push_str("kind = tabulated\n");
            out.push_str(&format!("path = {}\n", p.display()));
        }
        InitialChoice::GibbsOfV => out.push_str("kind = gibbs_of_V\n"),
    }
    out.push('\n');

    let f = &sc.flow;
    out.push_str(&format!(
        "[flow]\ndt = {}\nt_end = {}\ndealias = {}\nadapt_cfl = {}\n\
         floor_policy = clip_renormalize\nblowup_linf = {}\nlog_every = {}\n\
         snapshot_every = {}\nconv_tol = {}\n\n",
        f.dt, f.t_end, f.dealias, f.adapt_cfl, f.blowup_linf, f.log_every, f.snapshot_every,
        f.conv_tol
    ));
    out.push_str(&format!("[outputs]\ndir = {}\n\n", sc.outputs_dir.display()));
    let s = &sc.stationary;
    out.push_str(&format!(
        "[stationary]\ndamping = {}\nmax_iter = {}\ntol = {}\n\n",
        s.damping, s.max_iter, s.tol
    ));
    out.push_str(&format!("[spectrum]\nmax_mode = {}\n\n", sc.spectrum.max_mode));
    let p = &sc.particles;
    out.push_str(&format!(
        "[particles]\nn = {}\ndt = {}\nt_end = {}\ntemperature = {}\nlog_every = {}\n\
         snapshot_every = {}\nbandwidth_modes = {}\nsmoothing_modes = {}\n",
        p.n, p.dt, p.t_end, p.temperature, p.log_every, p.snapshot_every, p.bandwidth_modes,
        p.smoothing_modes
    ));
    out
}
