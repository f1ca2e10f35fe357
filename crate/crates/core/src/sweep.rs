//! Pump-power sweeps: equilibrium branches, hysteresis and bistability.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::crystal::{self, Classification, CrystalConfiguration};
use crate::linearized;
use crate::params::{self, Position, SystemParams};
use crate::steadystate::{self, Bipartition};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Seed {
    Linear,
    ZigzagUp,
    ZigzagDown,
}

impl Seed {
    pub const ALL: [Seed; 3] = [Seed::Linear, Seed::ZigzagUp, Seed::ZigzagDown];
}

impl std::fmt::Display for Seed {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Seed::Linear => "linear",
            Seed::ZigzagUp => "zigzag+",
            Seed::ZigzagDown => "zigzag-",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepOptions {
    /// Peak-to-peak transverse amplitude of fresh zigzag seeds, m.
    pub zigzag_amplitude: f64,
    /// Displacement along the unstable direction used to leave a saddle, m.
    pub kick: f64,
    /// Compute the logarithmic negativity at stable zigzag points.
    pub entanglement: bool,
    /// Relative width to which the bistability limits are bisected.
    pub refine_tolerance: f64,
}

impl SweepOptions {
    pub fn for_params(params: &SystemParams) -> Self {
        let k = params.wavenumber;
        SweepOptions {
            zigzag_amplitude: 2.6 / k,
            kick: 1e-3 / k,
            entanglement: false,
            refine_tolerance: 1e-4,
        }
    }
}

/// `n` log-spaced powers from `p_min` to `p_max`.
pub fn log_grid(p_min: f64, p_max: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![p_min];
    }
    let (a, b) = (p_min.ln(), p_max.ln());
    (0..n)
        .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

/// `n` evenly spaced powers from `p_min` to `p_max`.
pub fn linear_grid(p_min: f64, p_max: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![p_min];
    }
    (0..n)
        .map(|i| p_min + (p_max - p_min) * i as f64 / (n - 1) as f64)
        .collect()
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
        return Err(Error::InvalidGrid(
            "powers must be finite and non-negative".into(),
        ));
    }
    if !grid.windows(2).all(|w| w[1] > w[0]) {
        return Err(Error::InvalidGrid(
            "power grid must be strictly increasing".into(),
        ));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Entanglement {
    pub cavity_vs_all_modes: f64,
    pub cavity_vs_zigzag_mode: f64,
    /// 0-based
    pub zigzag_mode: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchPoint {
    pub power: f64,
    pub seed: Seed,
    /// Converged configuration, or the best iterate when `error` is set.
    pub configuration: Option<CrystalConfiguration>,
    pub error: Option<String>,
    /// photons/s
    pub output_intensity: Option<f64>,
    pub stable: bool,
    pub entanglement: Option<Entanglement>,
}

impl BranchPoint {
    pub fn classification(&self) -> Option<Classification> {
        self.configuration.as_ref().map(|c| c.classification)
    }

    pub fn converged(&self) -> bool {
        self.error.is_none() && self.configuration.is_some()
    }

    fn stable_as(&self, class: Classification) -> bool {
        self.converged() && self.stable && self.classification() == Some(class)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchTable {
    pub params: SystemParams,
    pub options: SweepOptions,
    pub powers: Vec<f64>,
    pub seeds: Vec<Seed>,
    /// Ordered by power, then by seed.
    pub points: Vec<BranchPoint>,
    /// Output intensity of the free-space linear chain at `P = 1`, photons/s.
    pub reference_intensity: f64,
    pub bistable_interval: Option<(f64, f64)>,
}

impl BranchTable {
    pub fn points_at(&self, index: usize) -> &[BranchPoint] {
        let s = self.seeds.len();
        &self.points[index * s..(index + 1) * s]
    }
}

/// Intensity of the free-space linear chain pumped at `P = 1`, photons/s.
pub fn reference_intensity(params: &SystemParams) -> Result<f64> {
    let pumped = params.with_power(1.0);
    let mf = params::mean_field(&pumped, &crystal::linear_chain_seed(params))?;
    Ok(params::output_intensity(&mf, &pumped))
}

/// Solves from `start`, keeping the best iterate on non-convergence.
fn solve(
    params: &SystemParams,
    start: &[Position],
) -> (Option<CrystalConfiguration>, Option<String>) {
    match crystal::find_equilibrium(params, start) {
        Ok(c) => (Some(c), None),
        Err(Error::NotConverged { best, .. }) => {
            let msg = format!("not converged (max force {:.3e} N)", best.gradient_norm);
            (Some(*best), Some(msg))
        }
        Err(e) => (None, Some(e.to_string())),
    }
}

fn entanglement_at(params: &SystemParams, config: &CrystalConfiguration) -> Option<Entanglement> {
    entanglement(params, config).ok()
}

/// Entanglement of the stationary fluctuations about `config`.
pub fn entanglement(params: &SystemParams, config: &CrystalConfiguration) -> Result<Entanglement> {
    let modes = linearized::normal_modes(params, config)?;
    let system = linearized::drift_matrix(params, config, &modes);
    let result = steadystate::solve_covariance(&system)?;
    let zz = steadystate::zigzag_mode_index(config, &modes);
    Ok(Entanglement {
        cavity_vs_all_modes: steadystate::log_negativity(&result, Bipartition::CavityVsAllModes)?,
        cavity_vs_zigzag_mode: steadystate::log_negativity(&result, Bipartition::CavityVsMode(zz))?,
        zigzag_mode: zz,
    })
}

fn fresh_seed(params: &SystemParams, seed: Seed, options: &SweepOptions) -> Vec<Position> {
    match seed {
        Seed::Linear => crystal::linear_chain_seed(params),
        Seed::ZigzagUp => crystal::zigzag_seed(params, options.zigzag_amplitude),
        Seed::ZigzagDown => crystal::zigzag_seed(params, -options.zigzag_amplitude),
    }
}

fn run_branch(
    params: &SystemParams,
    grid: &[f64],
    seed: Seed,
    options: &SweepOptions,
) -> Vec<BranchPoint> {
    let mut previous: Option<CrystalConfiguration> = None;
    grid.iter()
        .map(|&power| {
            let p = params.with_power(power);
            let start = match (&previous, seed) {
                (Some(c), Seed::Linear) => c.positions.clone(),
                (Some(c), _) if c.classification == Classification::Zigzag => {
                    let mut pos = c.positions.clone();
                    // Keep the parity this branch was seeded with.
                    if seed == Seed::ZigzagDown {
                        for q in &mut pos {
                            q[0] = -q[0];
                        }
                    }
                    pos
                }
                _ => fresh_seed(&p, seed, options),
            };
            let (configuration, error) = solve(&p, &start);
            let stable =
                error.is_none() && configuration.as_ref().is_some_and(|c| c.is_minimum(&p));
            let output_intensity = configuration
                .as_ref()
                .map(|c| params::output_intensity(&c.mean_field, &p));
            let entanglement = match &configuration {
                Some(c)
                    if options.entanglement
                        && stable
                        && c.classification == Classification::Zigzag =>
                {
                    entanglement_at(&p, c)
                }
                _ => None,
            };
            if error.is_none() {
                previous = configuration.clone();
            }
            BranchPoint {
                power,
                seed,
                configuration,
                error,
                output_intensity,
                stable,
                entanglement,
            }
        })
        .collect()
}

/// Runs every seed along the power grid, warm-starting each branch from its
/// previous solution. Solver failures are recorded per point.
pub fn sweep_power(
    params: &SystemParams,
    grid: &[f64],
    seeds: &[Seed],
    options: &SweepOptions,
) -> Result<BranchTable> {
    check_grid(grid)?;
    params.validate()?;
    let branches: Vec<Vec<BranchPoint>> = seeds
        .par_iter()
        .map(|&s| run_branch(params, grid, s, options))
        .collect();
    let mut points = Vec::with_capacity(grid.len() * seeds.len());
    for i in 0..grid.len() {
        for branch in &branches {
            points.push(branch[i].clone());
        }
    }
    let mut table = BranchTable {
        params: params.clone(),
        options: *options,
        powers: grid.to_vec(),
        seeds: seeds.to_vec(),
        points,
        reference_intensity: reference_intensity(params)?,
        bistable_interval: None,
    };
    table.bistable_interval = bistability_interval(&table);
    Ok(table)
}

/// Stable linear and stable zigzag solutions found at the same power.
fn coexisting(points: &[BranchPoint]) -> Option<(&CrystalConfiguration, &CrystalConfiguration)> {
    let linear = points
        .iter()
        .find(|p| p.stable_as(Classification::Linear))?;
    let zigzag = points
        .iter()
        .find(|p| p.stable_as(Classification::Zigzag))?;
    Some((
        linear.configuration.as_ref()?,
        zigzag.configuration.as_ref()?,
    ))
}

/// Whether both structures are stable at `power`, warm-started from the given
/// configurations.
fn coexist_at(
    params: &SystemParams,
    power: f64,
    linear: &CrystalConfiguration,
    zigzag: &CrystalConfiguration,
) -> bool {
    let p = params.with_power(power);
    let ok = |start: &CrystalConfiguration, class: Classification| {
        matches!(crystal::find_equilibrium(&p, &start.positions),
            Ok(c) if c.classification == class && c.is_minimum(&p))
    };
    ok(linear, Classification::Linear) && ok(zigzag, Classification::Zigzag)
}

fn bisect_edge(
    params: &SystemParams,
    mut inside: f64,
    mut outside: f64,
    linear: &CrystalConfiguration,
    zigzag: &CrystalConfiguration,
    tolerance: f64,
) -> f64 {
    while (inside - outside).abs() > tolerance * inside.abs().max(outside.abs()) {
        let mid = 0.5 * (inside + outside);
        if coexist_at(params, mid, linear, zigzag) {
            inside = mid;
        } else {
            outside = mid;
        }
    }
    0.5 * (inside + outside)
}

/// Widest power interval over which stable linear and zigzag equilibria
/// coexist, with edges bisected to the table's refinement tolerance.
pub fn bistability_interval(table: &BranchTable) -> Option<(f64, f64)> {
    let n = table.powers.len();
    let flags: Vec<bool> = (0..n)
        .map(|i| coexisting(table.points_at(i)).is_some())
        .collect();
    let mut best: Option<(usize, usize)> = None;
    let mut i = 0;
    while i < n {
        if !flags[i] {
            i += 1;
            continue;
        }
        let start = i;
        while i + 1 < n && flags[i + 1] {
            i += 1;
        }
        let width = table.powers[i] - table.powers[start];
        if best.is_none_or(|(a, b)| width > table.powers[b] - table.powers[a]) {
            best = Some((start, i));
        }
        i += 1;
    }
    let (lo, hi) = best?;
    let tol = table.options.refine_tolerance;
    let mut p_low = table.powers[lo];
    if lo > 0 {
        let (l, z) = coexisting(table.points_at(lo)).expect("flagged point");
        p_low = bisect_edge(
            &table.params,
            table.powers[lo],
            table.powers[lo - 1],
            l,
            z,
            tol,
        );
    }
    let mut p_high = table.powers[hi];
    if hi + 1 < n {
        let (l, z) = coexisting(table.points_at(hi)).expect("flagged point");
        p_high = bisect_edge(
            &table.params,
            table.powers[hi],
            table.powers[hi + 1],
            l,
            z,
            tol,
        );
    }
    Some((p_low, p_high))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub power: f64,
    pub classification: Classification,
    /// photons/s
    pub output_intensity: f64,
    /// rad/s
    pub delta_eff: f64,
    /// m
    pub max_abs_x: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HysteresisTraces {
    /// Ascending power.
    pub up: Vec<TracePoint>,
    /// Descending power.
    pub down: Vec<TracePoint>,
    /// Integral of I_down - I_up over the power, photons/s.
    pub loop_area: f64,
}

/// Solves at `params`, kicking off saddles along the unstable direction.
fn settle(params: &SystemParams, start: &[Position], kick: f64) -> (CrystalConfiguration, bool) {
    let mut current = start.to_vec();
    let mut last = None;
    for _ in 0..6 {
        let (config, error) = solve(params, &current);
        let Some(config) = config else {
            break;
        };
        let converged = error.is_none();
        if converged && config.is_minimum(params) {
            return (config, true);
        }
        let direction = crystal::unstable_direction(params, &config.positions)
            .ok()
            .flatten();
        current = config.positions.clone();
        last = Some((config, converged));
        match direction {
            Some(dir) => {
                let peak = dir
                    .iter()
                    .map(|d| d[0].abs().max(d[1].abs()))
                    .fold(0.0, f64::max);
                // Push toward the side the solver is already leaning to.
                let lean: f64 = dir.iter().zip(&current).map(|(d, q)| d[0] * q[0]).sum();
                let sign = if lean < 0.0 { -1.0 } else { 1.0 };
                for (q, d) in current.iter_mut().zip(&dir) {
                    q[0] += sign * kick * d[0] / peak;
                    q[1] += sign * kick * d[1] / peak;
                }
            }
            None if converged => break,
            None => {}
        }
    }
    match last {
        Some(l) => l,
        None => {
            let c = crystal::describe(params, start).expect("valid positions");
            (c, false)
        }
    }
}

fn trace_point(
    params: &SystemParams,
    power: f64,
    config: &CrystalConfiguration,
    converged: bool,
) -> TracePoint {
    TracePoint {
        power,
        classification: config.classification,
        output_intensity: params::output_intensity(&config.mean_field, params),
        delta_eff: config.mean_field.delta_eff,
        max_abs_x: config.max_abs_x(),
        converged,
    }
}

/// Upward sweep from the linear seed at the lowest power, then downward from
/// the solution at the highest power.
pub fn hysteresis(
    params: &SystemParams,
    grid: &[f64],
    options: &SweepOptions,
) -> Result<HysteresisTraces> {
    check_grid(grid)?;
    params.validate()?;
    if grid.is_empty() {
        return Ok(HysteresisTraces {
            up: Vec::new(),
            down: Vec::new(),
            loop_area: 0.0,
        });
    }
    let mut positions = crystal::linear_chain_seed(params);
    let mut up = Vec::with_capacity(grid.len());
    for &power in grid {
        let p = params.with_power(power);
        let (config, converged) = settle(&p, &positions, options.kick);
        up.push(trace_point(&p, power, &config, converged));
        positions = config.positions;
    }
    let mut down = Vec::with_capacity(grid.len());
    for &power in grid.iter().rev() {
        let p = params.with_power(power);
        let (config, converged) = settle(&p, &positions, options.kick);
        down.push(trace_point(&p, power, &config, converged));
        positions = config.positions;
    }
    let mut loop_area = 0.0;
    for i in 1..grid.len() {
        let d = |k: usize| down[grid.len() - 1 - k].output_intensity - up[k].output_intensity;
        loop_area += 0.5 * (d(i) + d(i - 1)) * (grid[i] - grid[i - 1]);
    }
    Ok(HysteresisTraces {
        up,
        down,
        loop_area,
    })
}

/// Ratio of U0 at `config` to its value for the free-space linear chain.
pub fn u0_ratio(params: &SystemParams, config: &CrystalConfiguration) -> Result<f64> {
    let linear = params::u0(params, &crystal::linear_chain_seed(params))?;
    Ok(config.mean_field.u0 / linear)
}

/// Power in `[p_lo, p_hi]` at which the zigzag branch has the given U0 ratio
/// (bisection; the ratio falls as the power grows).
pub fn power_for_u0_ratio(
    params: &SystemParams,
    target: f64,
    p_lo: f64,
    p_hi: f64,
    options: &SweepOptions,
) -> Result<(f64, CrystalConfiguration)> {
    let eval = |power: f64| -> Result<(f64, CrystalConfiguration)> {
        let p = params.with_power(power);
        let c = crystal::find_equilibrium(&p, &crystal::zigzag_seed(&p, options.zigzag_amplitude))?;
        if c.classification != Classification::Zigzag {
            return Err(Error::Bracket(format!(
                "no zigzag equilibrium at P = {power}"
            )));
        }
        Ok((u0_ratio(&p, &c)? - target, c))
    };
    let (mut lo, mut hi) = (p_lo, p_hi);
    let (f_lo, _) = eval(lo)?;
    let (f_hi, _) = eval(hi)?;
    if f_lo.signum() == f_hi.signum() {
        return Err(Error::Bracket(format!(
            "U0 ratio {target} not bracketed by P in [{p_lo}, {p_hi}]"
        )));
    }
    let mut best = None;
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        let (f, c) = eval(mid)?;
        best = Some((mid, c));
        if (f < 0.0) == (f_lo < 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-10 * hi {
            break;
        }
    }
    best.ok_or_else(|| Error::Bracket("empty bracket".into()))
}
