//! Equilibrium structures of the ion chain in trap, Coulomb and cavity
//! potentials.

mod minimize;
pub(crate) mod potential;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::params::{MeanField, Position, SystemParams};
use crate::{Error, Result};

pub(crate) use potential::Landscape;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Classification {
    Linear,
    Zigzag,
    Other,
}

impl std::fmt::Display for Classification {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Classification::Linear => "linear",
            Classification::Zigzag => "zigzag",
            Classification::Other => "other",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrystalConfiguration {
    /// Ion positions in m, sorted by y.
    pub positions: Vec<Position>,
    /// J
    pub potential_energy: f64,
    /// Largest force component, N.
    pub gradient_norm: f64,
    pub classification: Classification,
    pub mean_field: MeanField,
    /// Smallest eigenvalue of the Hessian at fixed photon number, N/m.
    pub min_hessian_eigenvalue: f64,
    /// Smallest eigenvalue of the Hessian of the total potential, N/m.
    pub min_full_hessian_eigenvalue: f64,
    /// The fixed-photon-number Hessian has a negative direction.
    pub saddle: bool,
    /// The solver result was reflected x -> -x to make the first displaced ion positive.
    pub mirrored: bool,
    pub iterations: usize,
}

impl CrystalConfiguration {
    pub fn max_abs_x(&self) -> f64 {
        self.positions
            .iter()
            .map(|p| p[0].abs())
            .fold(0.0, f64::max)
    }

    /// Local minimum of the total potential within the Hessian tolerance.
    pub fn is_minimum(&self, params: &SystemParams) -> bool {
        let tol = hessian_tolerance(params);
        !self.saddle && self.min_full_hessian_eigenvalue >= -tol
    }
}

/// Negative curvature tolerated before a configuration counts as a saddle, N/m.
pub fn hessian_tolerance(params: &SystemParams) -> f64 {
    1e-6 * params.ion_mass * params.omega_y * params.omega_y
}

/// Transverse displacement separating linear from zigzag structures, m.
pub fn classification_threshold(params: &SystemParams) -> f64 {
    1e-3 / params.wavenumber
}

/// Classifies positions sorted along the chain.
pub fn classify(params: &SystemParams, positions: &[Position]) -> Classification {
    let threshold = classification_threshold(params);
    let max_x = positions.iter().map(|p| p[0].abs()).fold(0.0, f64::max);
    if max_x < threshold {
        return Classification::Linear;
    }
    let alternating = positions.len() >= 2 && positions.windows(2).all(|w| w[0][0] * w[1][0] < 0.0);
    if alternating {
        Classification::Zigzag
    } else {
        Classification::Other
    }
}

fn check_positions(params: &SystemParams, positions: &[Position]) -> Result<()> {
    if positions.len() != params.n_ions {
        return Err(Error::PositionCount {
            expected: params.n_ions,
            got: positions.len(),
        });
    }
    Ok(())
}

/// Total potential energy in J.
pub fn v_total(params: &SystemParams, positions: &[Position]) -> Result<f64> {
    check_positions(params, positions)?;
    let l = Landscape::new(params)?;
    Ok(l.value(&l.to_scaled(positions))? * l.energy)
}

/// Gradient of the total potential, N per coordinate.
pub fn grad_v_total(params: &SystemParams, positions: &[Position]) -> Result<Vec<Position>> {
    check_positions(params, positions)?;
    let l = Landscape::new(params)?;
    let g = l.gradient(&l.to_scaled(positions))? * (l.energy / l.length);
    Ok(g.as_slice().chunks_exact(2).map(|c| [c[0], c[1]]).collect())
}

/// Hessian of trap + Coulomb + hbar |a|^2 U0 with the photon number frozen,
/// in N/m, coordinates ordered `(x_1, y_1, x_2, ...)`.
pub fn hessian_fixed(params: &SystemParams, positions: &[Position]) -> Result<DMatrix<f64>> {
    check_positions(params, positions)?;
    let l = Landscape::new(params)?;
    Ok(l.hessian_fixed(&l.to_scaled(positions))? * (l.energy / (l.length * l.length)))
}

/// Hessian of the total potential, N/m.
pub fn hessian_full(params: &SystemParams, positions: &[Position]) -> Result<DMatrix<f64>> {
    check_positions(params, positions)?;
    let l = Landscape::new(params)?;
    Ok(l.hessian_full(&l.to_scaled(positions))? * (l.energy / (l.length * l.length)))
}

/// Gradient of U0 with respect to the ion coordinates, rad/(s m).
pub fn grad_u0(params: &SystemParams, positions: &[Position]) -> Result<Vec<f64>> {
    check_positions(params, positions)?;
    let shift = params.light_shift()?;
    let l = Landscape::new(params)?;
    let g = l.coupling_gradient(&l.to_scaled(positions));
    Ok(g.iter().map(|v| v * shift / l.length).collect())
}

/// Linear chain at its free-space axial equilibrium, sorted by y.
pub fn linear_chain_seed(params: &SystemParams) -> Vec<Position> {
    let l = params.length_scale();
    minimize::axial_chain(params.n_ions)
        .into_iter()
        .map(|u| [0.0, u * l])
        .collect()
}

/// Linear seed with alternating transverse offsets `+a/2, -a/2, ...`.
pub fn zigzag_seed(params: &SystemParams, amplitude: f64) -> Vec<Position> {
    linear_chain_seed(params)
        .into_iter()
        .enumerate()
        .map(|(j, [_, y])| {
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            [sign * 0.5 * amplitude, y]
        })
        .collect()
}

fn sorted_by_y(positions: &[Position]) -> Vec<Position> {
    let mut sorted = positions.to_vec();
    sorted.sort_by(|a, b| a[1].total_cmp(&b[1]));
    sorted
}

fn min_eigenvalue(h: DMatrix<f64>) -> f64 {
    SymmetricEigen::new(h).eigenvalues.min()
}

fn build_configuration(
    params: &SystemParams,
    landscape: &Landscape,
    z: &[f64],
    iterations: usize,
) -> Result<CrystalConfiguration> {
    let mut positions = sorted_by_y(&landscape.to_positions(z));
    let threshold = 0.5 * classification_threshold(params);
    let mirrored = positions
        .iter()
        .find(|p| p[0].abs() > threshold)
        .is_some_and(|p| p[0] < 0.0);
    if mirrored {
        for p in &mut positions {
            p[0] = -p[0];
        }
    }
    let z = landscape.to_scaled(&positions);
    let stiffness = landscape.energy / (landscape.length * landscape.length);
    let saddle_tol = hessian_tolerance(params);
    let min_fixed = min_eigenvalue(landscape.hessian_fixed(&z)?) * stiffness;
    let min_full = min_eigenvalue(landscape.hessian_full(&z)?) * stiffness;
    Ok(CrystalConfiguration {
        classification: classify(params, &positions),
        mean_field: MeanField::from_shift(params, landscape.u0(&z)),
        potential_energy: landscape.value(&z)? * landscape.energy,
        gradient_norm: landscape.gradient(&z)?.amax() * landscape.energy / landscape.length,
        min_hessian_eigenvalue: min_fixed,
        min_full_hessian_eigenvalue: min_full,
        saddle: min_fixed < -saddle_tol,
        mirrored,
        iterations,
        positions,
    })
}

/// Describes the positions as they stand, without minimizing.
pub fn describe(params: &SystemParams, positions: &[Position]) -> Result<CrystalConfiguration> {
    check_positions(params, positions)?;
    let landscape = Landscape::new(params)?;
    let z = landscape.to_scaled(&sorted_by_y(positions));
    build_configuration(params, &landscape, &z, 0)
}

/// Minimizes the total potential starting from `seed`.
///
/// Convergence requires the largest force component to fall below
/// `1e-12 m omega_y^2 l`.
pub fn find_equilibrium(params: &SystemParams, seed: &[Position]) -> Result<CrystalConfiguration> {
    check_positions(params, seed)?;
    let landscape = Landscape::new(params)?;
    let start = landscape.to_scaled(&sorted_by_y(seed));
    let options = minimize::MinimizerOptions::for_landscape(&landscape);
    let outcome = minimize::minimize(&landscape, &start, options)?;
    let config = build_configuration(params, &landscape, &outcome.z, outcome.iterations)?;
    if !outcome.converged {
        return Err(Error::NotConverged {
            iterations: outcome.iterations,
            gradient_norm: config.gradient_norm,
            best: Box::new(config),
        });
    }
    Ok(config)
}

/// Unit vector (in coordinate space) along the most negative curvature of the
/// total potential, if there is one.
pub fn unstable_direction(
    params: &SystemParams,
    positions: &[Position],
) -> Result<Option<Vec<Position>>> {
    let h = hessian_full(params, positions)?;
    let eig = SymmetricEigen::new(h);
    let (idx, &lambda) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("non-empty Hessian");
    if lambda >= -hessian_tolerance(params) {
        return Ok(None);
    }
    let v = eig.eigenvectors.column(idx);
    Ok(Some(
        v.as_slice().chunks_exact(2).map(|c| [c[0], c[1]]).collect(),
    ))
}

/// Smallest transverse curvature of the free-space linear chain, in units
/// of m omega_y^2.
fn transverse_curvature(params: &SystemParams, omega_x: f64) -> Result<f64> {
    let free = SystemParams {
        omega_x,
        eta: 0.0,
        ..params.clone()
    };
    let landscape = Landscape::new(&free)?;
    let z = landscape.to_scaled(&linear_chain_seed(&free));
    let h = landscape.hessian_fixed(&z)?;
    let n = free.n_ions;
    let hx = DMatrix::from_fn(n, n, |i, j| h[(2 * i, 2 * j)]);
    Ok(min_eigenvalue(hx))
}

/// Transverse trap frequency below which the free-space linear chain buckles
/// into a zigzag, rad/s. The input `omega_x` is ignored.
pub fn critical_frequency(params: &SystemParams) -> Result<f64> {
    let mut lo = 0.0;
    let mut hi = params.omega_y;
    if transverse_curvature(params, params.omega_y * 1e-6)? >= 0.0 {
        return Err(Error::Bracket(format!(
            "the linear chain of {} ion(s) is transversely stable for every omega_x",
            params.n_ions
        )));
    }
    let mut doublings = 0;
    while transverse_curvature(params, hi)? < 0.0 {
        lo = hi;
        hi *= 2.0;
        doublings += 1;
        if doublings > 64 {
            return Err(Error::Bracket("no stable omega_x found".into()));
        }
    }
    while hi - lo > 1e-10 * hi {
        let mid = 0.5 * (lo + hi);
        if transverse_curvature(params, mid)? < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
