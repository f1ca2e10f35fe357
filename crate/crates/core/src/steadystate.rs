//! Stationary state of the linearized fluctuations: covariance matrix,
//! occupations, output spectrum and entanglement.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::crystal::CrystalConfiguration;
use crate::linalg::{self, Complex64};
use crate::linearized::{coupled, DriftSystem, FluctuationModel, NormalModeSet};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SteadyStateResult {
    /// `<X_a X_b + X_b X_a>`, vacuum = identity.
    #[serde(with = "crate::linalg::serde_matrix")]
    pub covariance: DMatrix<f64>,
    /// `<b_n^dag b_n>` per motional mode.
    pub occupations: Vec<f64>,
    pub lyapunov_residual: f64,
    pub min_symplectic_eigenvalue: f64,
}

/// Stationary covariance from `M C + C M^T + D = 0`.
pub fn solve_covariance(system: &DriftSystem) -> Result<SteadyStateResult> {
    let eig = linalg::eigenvalues(&system.drift)?;
    let max_real = eig.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
    if !(max_real < 0.0) {
        return Err(Error::UnstableDynamics { max_real });
    }
    let (covariance, residual) = linalg::solve_lyapunov(&system.drift, &system.diffusion)?;
    if !(residual < 1e-9) {
        return Err(Error::LyapunovFailed { residual });
    }
    let min_symplectic = linalg::symplectic_eigenvalues(&covariance)?[0];
    if min_symplectic < 1.0 - 1e-8 {
        return Err(Error::UnphysicalCovariance(min_symplectic));
    }
    let occupations = (0..system.model.channels.len())
        .map(|n| {
            let s = 2 + 2 * n;
            (covariance[(s, s)] + covariance[(s + 1, s + 1)]) / 4.0 - 0.5
        })
        .collect();
    Ok(SteadyStateResult {
        covariance,
        occupations,
        lyapunov_residual: residual,
        min_symplectic_eigenvalue: min_symplectic,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OccupationRow {
    /// 1-based mode label, ascending frequency.
    pub mode: usize,
    /// rad/s
    pub frequency: f64,
    pub occupation: f64,
    pub bath_occupation: f64,
    /// rad/s
    pub coupling: f64,
    pub coupled: bool,
}

pub fn mode_occupations(result: &SteadyStateResult, modes: &NormalModeSet) -> Vec<OccupationRow> {
    (0..modes.len())
        .map(|n| OccupationRow {
            mode: n + 1,
            frequency: modes.frequencies[n],
            occupation: result.occupations[n],
            bath_occupation: modes.bath_occupations[n],
            coupling: modes.couplings[n],
            coupled: coupled(&modes.couplings, n),
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumSeries {
    /// rad/s
    pub nu: Vec<f64>,
    /// s
    pub values: Vec<f64>,
}

/// `n` points evenly covering `[-extent, extent]`.
pub fn symmetric_grid(extent: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![0.0];
    }
    (0..n)
        .map(|i| {
            let v = extent * (2.0 * i as f64 / (n - 1) as f64 - 1.0);
            // Exact mirror symmetry of the grid.
            let j = n - 1 - i;
            let w = extent * (2.0 * j as f64 / (n - 1) as f64 - 1.0);
            0.5 * (v - w)
        })
        .collect()
}

/// Default spectrum grid: 4001 points over +-1.5 omega_max.
pub fn default_spectrum_grid(modes: &NormalModeSet) -> Vec<f64> {
    let w_max = modes.frequencies.iter().copied().fold(0.0, f64::max);
    symmetric_grid(1.5 * w_max, 4001)
}

/// Output spectrum `<da^dag da>(nu) / a^2` from the closed-form expression
/// in terms of the motional susceptibility `theta(nu)`.
pub fn spectrum_closed_form(model: &FluctuationModel, nu_grid: &[f64]) -> SpectrumSeries {
    let k = model.kappa;
    let delta = model.delta_eff;
    let a2 = model.a_bar * model.a_bar;
    let values = nu_grid
        .par_iter()
        .map(|&nu| {
            let mut theta = Complex64::new(0.0, 0.0);
            let mut thermal = 0.0;
            for ch in &model.channels {
                let (w, g, c2) = (ch.frequency, ch.heating_rate, ch.coupling * ch.coupling);
                let s = Complex64::new(g, -nu);
                theta += c2 * w / (s * s + w * w);
                thermal += c2
                    * g
                    * (ch.bath_occupation / (g * g + (w - nu) * (w - nu))
                        + (ch.bath_occupation + 1.0) / (g * g + (w + nu) * (w + nu)));
            }
            let kn = Complex64::new(k, -nu);
            let mix =
                Complex64::new(1.0, 0.0) + 4.0 * theta * delta * a2 / (kn * kn + delta * delta);
            let s0 = 2.0 / (k * k + (nu + delta) * (nu + delta)) / mix.norm_sqr();
            let quantum = 4.0 * k * theta.norm_sqr() * a2 / (k * k + (nu - delta) * (nu - delta));
            s0 * (quantum + thermal)
        })
        .collect();
    SpectrumSeries {
        nu: nu_grid.to_vec(),
        values,
    }
}

/// The same spectrum from the eigen-decomposition of the drift matrix in the
/// ladder-operator basis `(a, a^dag, b_1, b_1^dag, ...)`.
pub fn spectrum_modal(system: &DriftSystem, nu_grid: &[f64]) -> Result<SpectrumSeries> {
    let model = &system.model;
    if model.a_bar == 0.0 {
        return Err(Error::InvalidParameter(
            "the modal spectrum is normalized by a^2 and needs a nonzero mean field".into(),
        ));
    }
    let dim = model.dimension();
    let scale = system.drift.amax();
    let eig = linalg::eigen_decomposition(&(&system.drift / scale))?;
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut w = DMatrix::<Complex64>::zeros(dim, dim);
    for b in 0..dim / 2 {
        w[(2 * b, 2 * b)] = Complex64::new(h, 0.0);
        w[(2 * b, 2 * b + 1)] = Complex64::new(0.0, h);
        w[(2 * b + 1, 2 * b)] = Complex64::new(h, 0.0);
        w[(2 * b + 1, 2 * b + 1)] = Complex64::new(0.0, -h);
    }
    let t = &w * &eig.vectors;
    let t_inv = t.clone().try_inverse().ok_or(Error::NearDefective {
        condition: f64::INFINITY,
    })?;
    let lambdas: Vec<Complex64> = eig.values.iter().map(|z| z * scale).collect();
    let first_row: Vec<Complex64> = t.row(0).iter().copied().collect();
    let a2 = model.a_bar * model.a_bar;

    let values = nu_grid
        .par_iter()
        .map(|&nu| {
            let weights: Vec<Complex64> = first_row
                .iter()
                .zip(&lambdas)
                .map(|(&t0, &l)| t0 / (Complex64::new(0.0, -nu) - l))
                .collect();
            let g = |col: usize| -> Complex64 {
                weights
                    .iter()
                    .enumerate()
                    .map(|(k, &wk)| wk * t_inv[(k, col)])
                    .sum()
            };
            let mut s = 2.0 * model.kappa * g(1).norm_sqr();
            for (n, ch) in model.channels.iter().enumerate() {
                let rate = 2.0 * ch.heating_rate;
                if rate == 0.0 {
                    continue;
                }
                s += rate * (ch.bath_occupation + 1.0) * g(3 + 2 * n).norm_sqr();
                s += rate * ch.bath_occupation * g(2 + 2 * n).norm_sqr();
            }
            s / a2
        })
        .collect();
    Ok(SpectrumSeries {
        nu: nu_grid.to_vec(),
        values,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SidebandPeak {
    /// rad/s
    pub nu: f64,
    /// s
    pub value: f64,
    /// 0-based mode whose sideband the peak is attributed to.
    pub mode: usize,
}

/// Interior local maxima of the spectrum, each attributed to the coupled
/// mode with the nearest frequency. Maxima closer to `nu = 0` than half the
/// lowest mode frequency are skipped.
pub fn sideband_peaks(
    series: &SpectrumSeries,
    frequencies: &[f64],
    couplings: &[f64],
) -> Vec<SidebandPeak> {
    let w_min = frequencies.iter().copied().fold(f64::INFINITY, f64::min);
    let candidates: Vec<usize> = (0..frequencies.len())
        .filter(|&n| coupled(couplings, n))
        .collect();
    let v = &series.values;
    (1..v.len().saturating_sub(1))
        .filter(|&i| v[i] > v[i - 1] && v[i] > v[i + 1])
        .filter(|&i| series.nu[i].abs() > 0.5 * w_min)
        .filter_map(|i| {
            let nu = series.nu[i];
            let distance = |n: usize| (frequencies[n] - nu.abs()).abs();
            let mode = candidates
                .iter()
                .copied()
                .min_by(|&a, &b| distance(a).total_cmp(&distance(b)))?;
            Some(SidebandPeak {
                nu,
                value: v[i],
                mode,
            })
        })
        .collect()
}

/// Distinct modes with at least one sideband peak.
pub fn resolved_modes(peaks: &[SidebandPeak]) -> Vec<usize> {
    let mut modes: Vec<usize> = peaks.iter().map(|p| p.mode).collect();
    modes.sort_unstable();
    modes.dedup();
    modes
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Bipartition {
    /// Cavity against the whole set of motional modes.
    CavityVsAllModes,
    /// Cavity against one motional mode (0-based), the rest traced out.
    CavityVsMode(usize),
}

/// Logarithmic negativity (base 2) of a two-party Gaussian state, the first
/// `first_modes` modes forming one party.
pub fn log_negativity_of(covariance: &DMatrix<f64>, first_modes: usize) -> Result<f64> {
    let nu = linalg::symplectic_eigenvalues(covariance)?;
    if nu[0] < 1.0 - 1e-8 {
        return Err(Error::UnphysicalCovariance(nu[0]));
    }
    let mut transposed = covariance.clone();
    for k in 0..first_modes {
        let p = 2 * k + 1;
        transposed.row_mut(p).neg_mut();
        transposed.column_mut(p).neg_mut();
    }
    Ok(linalg::symplectic_eigenvalues(&transposed)?
        .into_iter()
        .map(|v| (-v.log2()).max(0.0))
        .sum())
}

pub fn log_negativity(result: &SteadyStateResult, bipartition: Bipartition) -> Result<f64> {
    match bipartition {
        Bipartition::CavityVsAllModes => log_negativity_of(&result.covariance, 1),
        Bipartition::CavityVsMode(n) => {
            let dim = result.covariance.nrows();
            if 2 + 2 * n + 1 >= dim {
                return Err(Error::InvalidParameter(format!("no motional mode {n}")));
            }
            let idx = [0, 1, 2 + 2 * n, 3 + 2 * n];
            let sub = DMatrix::from_fn(4, 4, |i, j| result.covariance[(idx[i], idx[j])]);
            log_negativity_of(&sub, 1)
        }
    }
}

/// Mode (0-based) with the largest overlap with the transverse profile of
/// the configuration.
pub fn zigzag_mode_index(config: &CrystalConfiguration, modes: &NormalModeSet) -> usize {
    let mut profile = nalgebra::DVector::zeros(2 * config.positions.len());
    for (j, p) in config.positions.iter().enumerate() {
        profile[2 * j] = p[0];
    }
    let overlaps = modes.mode_matrix.tr_mul(&profile);
    overlaps
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
        .map(|(n, _)| n)
        .unwrap_or(0)
}
