//! Normal modes about an equilibrium, their coupling to the cavity field
//! fluctuations, the drift matrix and its stability analysis.
//!
//! The quadrature vector is `X = (Q_a, P_a, Q_1, P_1, ..., Q_2N, P_2N)` with
//! `Q = (b + b^dag)/sqrt 2` and `P = (b - b^dag)/(i sqrt 2)`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::constants::HBAR;
use crate::crystal::{self, hessian_tolerance, CrystalConfiguration};
use crate::linalg::{self, Complex64};
use crate::params::SystemParams;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalModeSet {
    /// rad/s, ascending
    pub frequencies: Vec<f64>,
    /// Column `n` holds mode `n` over the coordinates `(x_1, y_1, x_2, ...)`.
    #[serde(with = "crate::linalg::serde_matrix")]
    pub mode_matrix: DMatrix<f64>,
    /// rad/s
    pub couplings: Vec<f64>,
    /// s^-1
    pub heating_rates: Vec<f64>,
    pub bath_occupations: Vec<f64>,
}

impl NormalModeSet {
    pub fn len(&self) -> usize {
        self.frequencies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frequencies.is_empty()
    }

    /// Largest |M^T M - I| entry.
    pub fn orthogonality_residual(&self) -> f64 {
        let n = self.mode_matrix.ncols();
        (self.mode_matrix.tr_mul(&self.mode_matrix) - DMatrix::identity(n, n)).amax()
    }
}

/// Coupling threshold below which a mode counts as decoupled from the cavity.
pub fn coupled(couplings: &[f64], n: usize) -> bool {
    let max = couplings.iter().fold(0.0_f64, |m, c| m.max(c.abs()));
    max > 0.0 && couplings[n].abs() > 1e-6 * max
}

fn fix_sign(mut v: nalgebra::DVectorViewMut<f64>) {
    let pivot = v.iter().copied().find(|x| x.abs() > 1e-8).unwrap_or(0.0);
    if pivot < 0.0 {
        v.neg_mut();
    }
}

/// Rotates each block of degenerate modes so that at most one member has a
/// nonzero projection on `grad`.
fn rotate_degenerate(frequencies: &[f64], modes: &mut DMatrix<f64>, grad: &DVector<f64>, tie: f64) {
    let n = frequencies.len();
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && frequencies[end] - frequencies[end - 1] < tie {
            end += 1;
        }
        if end - start > 1 {
            let block = modes.columns(start, end - start).into_owned();
            let proj = block.tr_mul(grad);
            let norm = proj.norm();
            if norm > 0.0 {
                // Householder reflection mapping proj/|proj| onto e_1.
                let mut u = proj / norm;
                u[0] -= 1.0;
                let un = u.norm();
                if un > 1e-14 {
                    u /= un;
                    let k = end - start;
                    let h = DMatrix::identity(k, k) - &u * u.transpose() * 2.0;
                    let rotated = block * h;
                    modes.columns_mut(start, end - start).copy_from(&rotated);
                }
            }
        }
        start = end;
    }
}

/// Normal modes of the Hessian of trap + Coulomb + hbar |a|^2 U0, the photon
/// number held at its equilibrium value, including couplings and bath data.
pub fn normal_modes(params: &SystemParams, config: &CrystalConfiguration) -> Result<NormalModeSet> {
    let h = crystal::hessian_fixed(params, &config.positions)?;
    let eig = SymmetricEigen::new(h);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));

    let tol = hessian_tolerance(params);
    let dim = order.len();
    let mut mode_matrix = DMatrix::zeros(dim, dim);
    let mut frequencies = Vec::with_capacity(dim);
    for (n, &idx) in order.iter().enumerate() {
        let lambda = eig.eigenvalues[idx];
        if lambda < -tol {
            return Err(Error::UnstableConfiguration {
                mode: n + 1,
                eigenvalue: lambda,
            });
        }
        frequencies.push((lambda.max(0.0) / params.ion_mass).sqrt());
        mode_matrix.set_column(n, &eig.eigenvectors.column(idx));
        fix_sign(mode_matrix.column_mut(n));
    }

    let grad = if params.g0 == 0.0 {
        DVector::zeros(dim)
    } else {
        DVector::from_vec(crystal::grad_u0(params, &config.positions)?)
    };
    rotate_degenerate(&frequencies, &mut mode_matrix, &grad, 1e-9 * params.omega_y);

    let mut modes = NormalModeSet {
        heating_rates: (0..dim).map(|n| params.heating_rate(n)).collect(),
        bath_occupations: frequencies
            .iter()
            .map(|&w| params.bath_occupation(w))
            .collect(),
        couplings: vec![0.0; dim],
        frequencies,
        mode_matrix,
    };
    modes.couplings = couplings(params, config, &modes)?;
    Ok(modes)
}

/// c_n = sqrt(hbar/(2 m omega_n)) sum_j M_jn . grad_j U0, rad/s.
pub fn couplings(
    params: &SystemParams,
    config: &CrystalConfiguration,
    modes: &NormalModeSet,
) -> Result<Vec<f64>> {
    if let Some((mode, &frequency)) = modes
        .frequencies
        .iter()
        .enumerate()
        .find(|(_, w)| !(**w > 0.0))
    {
        return Err(Error::NonPositiveFrequency {
            mode: mode + 1,
            frequency,
        });
    }
    if params.g0 == 0.0 {
        return Ok(vec![0.0; modes.len()]);
    }
    let grad = DVector::from_vec(crystal::grad_u0(params, &config.positions)?);
    let proj = modes.mode_matrix.tr_mul(&grad);
    Ok(modes
        .frequencies
        .iter()
        .zip(proj.iter())
        .map(|(&w, &p)| (HBAR / (2.0 * params.ion_mass * w)).sqrt() * p)
        .collect())
}

/// One motional channel of the linearized dynamics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeChannel {
    /// rad/s
    pub frequency: f64,
    /// rad/s
    pub coupling: f64,
    /// s^-1
    pub heating_rate: f64,
    pub bath_occupation: f64,
}

/// Scalar content of the linearized cavity-motion problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FluctuationModel {
    pub kappa: f64,
    pub delta_eff: f64,
    pub a_bar: f64,
    pub channels: Vec<ModeChannel>,
}

impl FluctuationModel {
    pub fn new(
        params: &SystemParams,
        config: &CrystalConfiguration,
        modes: &NormalModeSet,
    ) -> Self {
        let channels = (0..modes.len())
            .map(|n| ModeChannel {
                frequency: modes.frequencies[n],
                coupling: modes.couplings[n],
                heating_rate: modes.heating_rates[n],
                bath_occupation: modes.bath_occupations[n],
            })
            .collect();
        FluctuationModel {
            kappa: params.kappa,
            delta_eff: config.mean_field.delta_eff,
            a_bar: config.mean_field.a_bar,
            channels,
        }
    }

    pub fn dimension(&self) -> usize {
        2 * (self.channels.len() + 1)
    }

    /// Channels whose effective coupling `a c_n` is negligible.
    fn is_decoupled(&self, ch: &ModeChannel) -> bool {
        (self.a_bar * ch.coupling).abs() <= 1e-9 * (self.kappa + ch.frequency)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriftSystem {
    pub model: FluctuationModel,
    #[serde(with = "crate::linalg::serde_matrix")]
    pub drift: DMatrix<f64>,
    #[serde(with = "crate::linalg::serde_matrix")]
    pub diffusion: DMatrix<f64>,
}

impl DriftSystem {
    pub fn from_model(model: FluctuationModel) -> Self {
        let dim = model.dimension();
        let mut m = DMatrix::zeros(dim, dim);
        let mut d = DMatrix::zeros(dim, dim);
        let (kappa, delta) = (model.kappa, model.delta_eff);
        m[(0, 0)] = -kappa;
        m[(0, 1)] = -delta;
        m[(1, 0)] = delta;
        m[(1, 1)] = -kappa;
        d[(0, 0)] = 2.0 * kappa;
        d[(1, 1)] = 2.0 * kappa;
        for (n, ch) in model.channels.iter().enumerate() {
            let s = 2 + 2 * n;
            m[(s, s)] = -ch.heating_rate;
            m[(s, s + 1)] = ch.frequency;
            m[(s + 1, s)] = -ch.frequency;
            m[(s + 1, s + 1)] = -ch.heating_rate;
            let g = -2.0 * model.a_bar * ch.coupling;
            m[(1, s)] = g;
            m[(s + 1, 0)] = g;
            let noise = 2.0 * ch.heating_rate * (2.0 * ch.bath_occupation + 1.0);
            d[(s, s)] = noise;
            d[(s + 1, s + 1)] = noise;
        }
        DriftSystem {
            model,
            drift: m,
            diffusion: d,
        }
    }
}

pub fn drift_matrix(
    params: &SystemParams,
    config: &CrystalConfiguration,
    modes: &NormalModeSet,
) -> DriftSystem {
    DriftSystem::from_model(FluctuationModel::new(params, config, modes))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StabilityInequality {
    /// Delta_eff^2 + kappa^2
    pub lhs: f64,
    /// -4 Delta_eff a^2 sum c_n^2 omega_n / (omega_n^2 + Gamma_n^2)
    pub rhs: f64,
    pub satisfied: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilityReport {
    pub eigenvalues: Vec<Complex64Pair>,
    /// s^-1
    pub max_real: f64,
    pub stable: bool,
    /// Present when Delta_eff < 0.
    pub inequality: Option<StabilityInequality>,
    /// Relative residual of each eigenvalue in the characteristic equation;
    /// `None` for eigenvalues of decoupled channels or at a pole.
    pub residuals: Vec<Option<f64>>,
    pub max_residual: f64,
    /// Present when Delta_eff < 0: every complex eigenvalue has its real part
    /// between -max(kappa, Gamma) and -min(kappa, Gamma).
    pub band_check: Option<bool>,
}

/// Serializable complex number.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Complex64Pair {
    pub re: f64,
    pub im: f64,
}

impl From<Complex64> for Complex64Pair {
    fn from(z: Complex64) -> Self {
        Complex64Pair { re: z.re, im: z.im }
    }
}

impl From<Complex64Pair> for Complex64 {
    fn from(z: Complex64Pair) -> Self {
        Complex64::new(z.re, z.im)
    }
}

/// Relative residual of `lambda` in
/// `Delta^2 + (kappa + lambda)^2 + 4 Delta a^2 sum c^2 w / (w^2 + (lambda + Gamma)^2) = 0`.
fn characteristic_residual(model: &FluctuationModel, lambda: Complex64) -> Option<f64> {
    let delta = model.delta_eff;
    let k = Complex64::new(model.kappa, 0.0) + lambda;
    let mut value = Complex64::new(delta * delta, 0.0) + k * k;
    let mut scale = delta * delta + k.norm_sqr();
    for ch in &model.channels {
        if model.is_decoupled(ch) {
            continue;
        }
        let s = lambda + ch.heating_rate;
        let den = s * s + ch.frequency * ch.frequency;
        if den.norm() <= 1e-14 * ch.frequency * ch.frequency {
            return None;
        }
        let term =
            4.0 * delta * model.a_bar * model.a_bar * ch.coupling * ch.coupling * ch.frequency
                / den;
        value += term;
        scale += term.norm();
    }
    Some(value.norm() / scale)
}

pub fn stability_report(system: &DriftSystem) -> Result<StabilityReport> {
    let model = &system.model;
    let mut eigen = linalg::eigenvalues(&system.drift)?;
    eigen.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    let max_real = eigen.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
    let stable = max_real < 1e-9 * model.kappa;

    // Eigenvalues belonging to decoupled channels sit at -Gamma +- i omega.
    let mut excluded = vec![false; eigen.len()];
    for ch in model.channels.iter().filter(|ch| model.is_decoupled(ch)) {
        for sign in [1.0, -1.0] {
            let target = Complex64::new(-ch.heating_rate, sign * ch.frequency);
            if let Some((idx, _)) = eigen
                .iter()
                .enumerate()
                .filter(|(i, _)| !excluded[*i])
                .min_by(|a, b| (a.1 - target).norm().total_cmp(&(b.1 - target).norm()))
            {
                excluded[idx] = true;
            }
        }
    }
    let residuals: Vec<Option<f64>> = eigen
        .iter()
        .zip(&excluded)
        .map(|(&z, &skip)| {
            if skip {
                None
            } else {
                characteristic_residual(model, z)
            }
        })
        .collect();
    let max_residual = residuals.iter().flatten().fold(0.0_f64, |m, &r| m.max(r));

    let delta = model.delta_eff;
    let (inequality, band_check) = if delta < 0.0 {
        let sum: f64 = model
            .channels
            .iter()
            .map(|ch| {
                ch.coupling * ch.coupling * ch.frequency
                    / (ch.frequency * ch.frequency + ch.heating_rate * ch.heating_rate)
            })
            .sum();
        let lhs = delta * delta + model.kappa * model.kappa;
        let rhs = -4.0 * delta * model.a_bar * model.a_bar * sum;
        let satisfied = lhs >= rhs;
        let clear_margin = (lhs - rhs).abs() > 1e-8 * lhs.max(rhs);
        let clear_real = max_real.abs() > 1e-9 * model.kappa;
        if clear_margin && clear_real && satisfied != (max_real < 0.0) {
            return Err(Error::StabilityInconsistency { max_real, lhs, rhs });
        }

        let rates = model.channels.iter().map(|ch| ch.heating_rate);
        let lo = rates.clone().fold(model.kappa, f64::min);
        let hi = rates.fold(model.kappa, f64::max);
        let slack = 1e-9 * model.kappa;
        let band_ok = eigen
            .iter()
            .filter(|z| z.im.abs() > slack)
            .all(|z| z.re >= -hi - slack && z.re <= -lo + slack);
        (
            Some(StabilityInequality {
                lhs,
                rhs,
                satisfied,
            }),
            Some(band_ok),
        )
    } else {
        (None, None)
    };

    Ok(StabilityReport {
        eigenvalues: eigen.into_iter().map(Into::into).collect(),
        max_real,
        stable,
        inequality,
        residuals,
        max_residual,
        band_check,
    })
}
