//! Landau-type potential of the zigzag (soft) mode and its minima.

use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::crystal::{self, Landscape};
use crate::params::SystemParams;
use crate::{Error, Result};

/// Soft-mode potential for a uniformly illuminated chain, J.
///
/// `(m omega_x^2/k^2) [ (theta/2)(kb/2)^2 + 2 P atan(C cos^2(kb/2)) ]`
pub fn v_s_uniform(b: f64, theta: f64, power: f64, coop: f64, params: &SystemParams) -> f64 {
    let k = params.wavenumber;
    let u = 0.5 * k * b;
    let c = u.cos();
    let unit = params.ion_mass * params.omega_x * params.omega_x / (k * k);
    unit * (0.5 * theta * u * u + 2.0 * power * (coop * c * c).atan())
}

/// `theta = N (omega_x^2 - omega_crit^2) / omega_x^2`.
pub fn theta(params: &SystemParams, omega_crit: f64) -> f64 {
    let wx2 = params.omega_x * params.omega_x;
    params.n_ions as f64 * (wx2 - omega_crit * omega_crit) / wx2
}

/// Power above which `b = 0` stops being a minimum: `theta (1 + C^2) / (4 C)`.
/// Infinite for `C <= 0`.
pub fn threshold_power(theta: f64, coop: f64) -> f64 {
    if coop <= 0.0 {
        return f64::INFINITY;
    }
    theta * (1.0 + coop * coop) / (4.0 * coop)
}

/// Curvature of `v_s_uniform` at `b = 0` by a five-point stencil in `kb/2`.
fn numeric_curvature(theta: f64, power: f64, coop: f64, params: &SystemParams) -> f64 {
    let h = 1e-3;
    let k = params.wavenumber;
    let f = |u: f64| v_s_uniform(2.0 * u / k, theta, power, coop, params);
    (-f(2.0 * h) + 16.0 * f(h) - 30.0 * f(0.0) + 16.0 * f(-h) - f(-2.0 * h)) / (12.0 * h * h)
}

/// Threshold located by bisection on the sign of the finite-difference
/// curvature at `b = 0`.
pub fn numeric_threshold_power(theta: f64, coop: f64, params: &SystemParams) -> Result<f64> {
    if numeric_curvature(theta, 0.0, coop, params) <= 0.0 {
        return Err(Error::Bracket(
            "curvature is not positive at zero power".into(),
        ));
    }
    let mut hi = theta.max(1e-6);
    let mut tries = 0;
    while numeric_curvature(theta, hi, coop, params) > 0.0 {
        hi *= 2.0;
        tries += 1;
        if tries > 200 {
            return Err(Error::Bracket("curvature never changes sign".into()));
        }
    }
    let mut lo = 0.0;
    while hi - lo > 1e-13 * hi {
        let mid = 0.5 * (lo + hi);
        if numeric_curvature(theta, mid, coop, params) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Minimum {
    /// m
    pub b: f64,
    /// J
    pub value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StabilityClass {
    LinearOnly,
    Bistable,
    ZigzagOnly,
    NoMinimum,
}

impl std::fmt::Display for StabilityClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            StabilityClass::LinearOnly => "linear-only",
            StabilityClass::Bistable => "bistable",
            StabilityClass::ZigzagOnly => "zigzag-only",
            StabilityClass::NoMinimum => "no-minimum",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SoftModePotential {
    /// m
    pub b: Vec<f64>,
    /// J
    pub values: Vec<f64>,
    pub minima: Vec<Minimum>,
    pub class: StabilityClass,
}

impl SoftModePotential {
    pub fn from_series(b: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        let minima = count_minima(&b, &values)?;
        let spacing = b
            .windows(2)
            .map(|w| (w[1] - w[0]).abs())
            .fold(0.0, f64::max);
        let class = classify(&minima, 1.5 * spacing);
        Ok(SoftModePotential {
            b,
            values,
            minima,
            class,
        })
    }
}

/// Vertex of the parabola through three points.
fn parabola_vertex(x: [f64; 3], y: [f64; 3]) -> (f64, f64) {
    let d01 = (y[1] - y[0]) / (x[1] - x[0]);
    let d12 = (y[2] - y[1]) / (x[2] - x[1]);
    let a = (d12 - d01) / (x[2] - x[0]);
    if !(a > 0.0) {
        return (x[1], y[1]);
    }
    // y = y1 + s (t - x1) + a (t - x1)^2 with s the slope at x1.
    let s = d01 + a * (x[1] - x[0]);
    let dt = -s / (2.0 * a);
    (x[1] + dt, y[1] + 0.5 * s * dt)
}

/// Interior local minima of a sampled curve, refined by parabolic
/// interpolation. Runs of equal values bounded by larger neighbours count as
/// one minimum at their centre.
pub fn count_minima(b: &[f64], values: &[f64]) -> Result<Vec<Minimum>> {
    let n = b.len();
    if n < 5 {
        return Err(Error::InvalidGrid(format!(
            "need at least 5 points, got {n}"
        )));
    }
    if values.len() != n {
        return Err(Error::InvalidGrid(format!(
            "{} grid points but {} values",
            n,
            values.len()
        )));
    }
    let increasing = b.windows(2).all(|w| w[1] > w[0]);
    let decreasing = b.windows(2).all(|w| w[1] < w[0]);
    if !(increasing || decreasing) {
        return Err(Error::InvalidGrid("grid must be strictly monotone".into()));
    }

    let mut minima = Vec::new();
    let mut i = 1;
    while i < n - 1 {
        let mut end = i;
        while end + 1 < n && values[end + 1] == values[i] {
            end += 1;
        }
        if end < n - 1 && values[i - 1] > values[i] && values[end + 1] > values[i] {
            let m = if end == i {
                let (bv, vv) = parabola_vertex(
                    [b[i - 1], b[i], b[i + 1]],
                    [values[i - 1], values[i], values[i + 1]],
                );
                Minimum { b: bv, value: vv }
            } else {
                Minimum {
                    b: 0.5 * (b[i] + b[end]),
                    value: values[i],
                }
            };
            minima.push(m);
        }
        i = end + 1;
    }
    Ok(minima)
}

/// Classifies minima; `center_tol` decides what counts as `b = 0`.
pub fn classify(minima: &[Minimum], center_tol: f64) -> StabilityClass {
    let central = minima.iter().any(|m| m.b.abs() <= center_tol);
    let displaced = minima.iter().any(|m| m.b.abs() > center_tol);
    match (central, displaced) {
        (true, true) => StabilityClass::Bistable,
        (true, false) => StabilityClass::LinearOnly,
        (false, true) => StabilityClass::ZigzagOnly,
        (false, false) => StabilityClass::NoMinimum,
    }
}

/// Default amplitude grid: 400 points over `kb` in `[-1.5 pi, 1.5 pi]`.
pub fn default_b_grid(params: &SystemParams) -> Vec<f64> {
    let n = 400;
    let extent = 1.5 * std::f64::consts::PI / params.wavenumber;
    (0..n)
        .map(|i| {
            let v = extent * (2.0 * i as f64 / (n - 1) as f64 - 1.0);
            let w = extent * (2.0 * (n - 1 - i) as f64 / (n - 1) as f64 - 1.0);
            0.5 * (v - w)
        })
        .collect()
}

/// Uniform-chain potential sampled on a grid.
pub fn uniform_potential(
    theta: f64,
    power: f64,
    coop: f64,
    params: &SystemParams,
    b_grid: &[f64],
) -> Result<SoftModePotential> {
    let values = b_grid
        .iter()
        .map(|&b| v_s_uniform(b, theta, power, coop, params))
        .collect();
    SoftModePotential::from_series(b_grid.to_vec(), values)
}

/// Lowest transverse mode of the free-space linear chain, scaled so its
/// largest component is 1 and the first nonzero component is positive.
pub fn soft_mode_profile(params: &SystemParams) -> Result<Vec<f64>> {
    let free = SystemParams {
        eta: 0.0,
        ..params.clone()
    };
    let landscape = Landscape::new(&free)?;
    let z = landscape.to_scaled(&crystal::linear_chain_seed(&free));
    let h = landscape.hessian_fixed(&z)?;
    let n = free.n_ions;
    let hx = DMatrix::from_fn(n, n, |i, j| h[(2 * i, 2 * j)]);
    let eig = SymmetricEigen::new(hx);
    let idx = eig.eigenvalues.imin();
    let v = eig.eigenvectors.column(idx);
    let peak = v.amax();
    let sign = v
        .iter()
        .find(|x| x.abs() > 1e-8 * peak)
        .map_or(1.0, |x| x.signum());
    Ok(v.iter().map(|x| sign * x / peak).collect())
}

/// Total potential along the free-space soft-mode direction of the linear
/// chain; `b` is twice the displacement of the most displaced ion.
pub fn v_s_projected(params: &SystemParams, b_grid: &[f64]) -> Result<SoftModePotential> {
    let profile = soft_mode_profile(params)?;
    let base = crystal::linear_chain_seed(params);
    let values = b_grid
        .par_iter()
        .map(|&b| {
            let positions: Vec<_> = base
                .iter()
                .zip(&profile)
                .map(|(p, e)| [0.5 * b * e, p[1]])
                .collect();
            crystal::v_total(params, &positions)
        })
        .collect::<Result<Vec<f64>>>()?;
    SoftModePotential::from_series(b_grid.to_vec(), values)
}
