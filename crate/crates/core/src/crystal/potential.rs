//! Total potential in scaled units.
//!
//! Coordinates are measured in units of the axial length scale `l` and
//! energies in `m omega_y^2 l^2`, so the trap term reads
//! `(alpha x^2 + y^2) / 2` and the Coulomb term `sum 1/r`. Vectors are laid
//! out as `(x_1, y_1, x_2, y_2, ...)`.

use nalgebra::{DMatrix, DVector, Matrix2};

use crate::constants::HBAR;
use crate::params::SystemParams;
use crate::{Error, Result};

#[derive(Debug, Clone)]
pub(crate) struct Landscape {
    pub n: usize,
    /// (omega_x / omega_y)^2
    alpha: f64,
    /// k l
    k: f64,
    /// (l / w)^2
    inv_w2: f64,
    /// mode centre / l
    center: f64,
    /// g0^2 / Delta_0, rad/s
    shift: f64,
    kappa: f64,
    delta_c: f64,
    /// hbar eta^2 / (kappa E0)
    amplitude: f64,
    min_distance: f64,
    pub length: f64,
    pub energy: f64,
}

/// Values of `U = sum_j cos^2(K x_j) exp(-(y_j - c)^2 / W^2)` and its
/// derivatives for one ion.
struct IonCoupling {
    u: f64,
    dx: f64,
    dy: f64,
    dxx: f64,
    dxy: f64,
    dyy: f64,
}

impl Landscape {
    pub fn new(params: &SystemParams) -> Result<Self> {
        params.validate()?;
        let shift = if params.g0 == 0.0 {
            0.0
        } else {
            params.light_shift()?
        };
        let length = params.length_scale();
        let energy = params.ion_mass * params.omega_y * params.omega_y * length * length;
        Ok(Landscape {
            n: params.n_ions,
            alpha: (params.omega_x / params.omega_y).powi(2),
            k: params.wavenumber * length,
            inv_w2: (length / params.waist).powi(2),
            center: params.mode_center_y / length,
            shift,
            kappa: params.kappa,
            delta_c: params.delta_c,
            amplitude: HBAR * params.eta * params.eta / (params.kappa * energy),
            min_distance: 1e-12 / length,
            length,
            energy,
        })
    }

    /// Scaled wavenumber `k l`.
    pub fn k(&self) -> f64 {
        self.k
    }

    fn cavity_on(&self) -> bool {
        self.amplitude != 0.0 && self.shift != 0.0
    }

    fn ion(&self, x: f64, y: f64) -> IonCoupling {
        let k = self.k;
        let dy = y - self.center;
        let e = (-dy * dy * self.inv_w2).exp();
        let d = -2.0 * dy * self.inv_w2;
        let (s, c) = (k * x).sin_cos();
        let c2 = c * c;
        let sin2 = 2.0 * s * c;
        let cos2 = c2 - s * s;
        IonCoupling {
            u: c2 * e,
            dx: -k * sin2 * e,
            dy: c2 * e * d,
            dxx: -2.0 * k * k * cos2 * e,
            dxy: -k * sin2 * e * d,
            dyy: c2 * e * (d * d - 2.0 * self.inv_w2),
        }
    }

    /// Dimensionless coupling sum `U`; the cavity shift is `shift * U`.
    pub fn coupling_sum(&self, z: &[f64]) -> f64 {
        (0..self.n)
            .map(|j| self.ion(z[2 * j], z[2 * j + 1]).u)
            .sum()
    }

    pub fn u0(&self, z: &[f64]) -> f64 {
        self.shift * self.coupling_sum(z)
    }

    pub fn delta_eff(&self, z: &[f64]) -> f64 {
        self.delta_c - self.u0(z)
    }

    /// Gradient of `U` with respect to scaled coordinates.
    pub fn coupling_gradient(&self, z: &[f64]) -> DVector<f64> {
        let mut g = DVector::zeros(2 * self.n);
        for j in 0..self.n {
            let c = self.ion(z[2 * j], z[2 * j + 1]);
            g[2 * j] = c.dx;
            g[2 * j + 1] = c.dy;
        }
        g
    }

    fn coupling_hessian(&self, z: &[f64]) -> DMatrix<f64> {
        let mut h = DMatrix::zeros(2 * self.n, 2 * self.n);
        for j in 0..self.n {
            let c = self.ion(z[2 * j], z[2 * j + 1]);
            h[(2 * j, 2 * j)] = c.dxx;
            h[(2 * j, 2 * j + 1)] = c.dxy;
            h[(2 * j + 1, 2 * j)] = c.dxy;
            h[(2 * j + 1, 2 * j + 1)] = c.dyy;
        }
        h
    }

    fn check_separations(&self, z: &[f64]) -> Result<()> {
        for i in 0..self.n {
            for j in i + 1..self.n {
                let r = (z[2 * i] - z[2 * j]).hypot(z[2 * i + 1] - z[2 * j + 1]);
                if !(r >= self.min_distance) {
                    return Err(Error::CoincidentIons {
                        first: i,
                        second: j,
                        distance: r * self.length,
                    });
                }
            }
        }
        Ok(())
    }

    /// `A s kappa / (kappa^2 + Delta^2)`: the prefactor of grad U in the
    /// force, equal to hbar |a|^2 g0^2/Delta_0 in scaled units.
    fn force_factor(&self, delta: f64) -> f64 {
        self.amplitude * self.shift * self.kappa / (self.kappa * self.kappa + delta * delta)
    }

    pub fn value(&self, z: &[f64]) -> Result<f64> {
        self.check_separations(z)?;
        let mut v = 0.0;
        for i in 0..self.n {
            let (x, y) = (z[2 * i], z[2 * i + 1]);
            v += 0.5 * (self.alpha * x * x + y * y);
            for j in i + 1..self.n {
                v += 1.0 / (x - z[2 * j]).hypot(y - z[2 * j + 1]);
            }
        }
        if self.cavity_on() {
            let delta = self.delta_eff(z);
            v += self.amplitude * (-delta / self.kappa).atan();
        }
        Ok(v)
    }

    pub fn gradient(&self, z: &[f64]) -> Result<DVector<f64>> {
        self.check_separations(z)?;
        let mut g = DVector::zeros(2 * self.n);
        for i in 0..self.n {
            let (x, y) = (z[2 * i], z[2 * i + 1]);
            g[2 * i] += self.alpha * x;
            g[2 * i + 1] += y;
            for j in i + 1..self.n {
                let dx = x - z[2 * j];
                let dy = y - z[2 * j + 1];
                let r2 = dx * dx + dy * dy;
                let inv3 = 1.0 / (r2 * r2.sqrt());
                g[2 * i] -= dx * inv3;
                g[2 * i + 1] -= dy * inv3;
                g[2 * j] += dx * inv3;
                g[2 * j + 1] += dy * inv3;
            }
        }
        if self.cavity_on() {
            let factor = self.force_factor(self.delta_eff(z));
            g.axpy(factor, &self.coupling_gradient(z), 1.0);
        }
        Ok(g)
    }

    fn trap_coulomb_hessian(&self, z: &[f64]) -> DMatrix<f64> {
        let mut h = DMatrix::zeros(2 * self.n, 2 * self.n);
        for i in 0..self.n {
            h[(2 * i, 2 * i)] += self.alpha;
            h[(2 * i + 1, 2 * i + 1)] += 1.0;
            for j in i + 1..self.n {
                let d = nalgebra::Vector2::new(z[2 * i] - z[2 * j], z[2 * i + 1] - z[2 * j + 1]);
                let r2 = d.norm_squared();
                let r = r2.sqrt();
                let b: Matrix2<f64> =
                    d * d.transpose() * (3.0 / (r2 * r2 * r)) - Matrix2::identity() / (r2 * r);
                for (a, c) in [(i, i), (j, j)] {
                    let mut block = h.fixed_view_mut::<2, 2>(2 * a, 2 * c);
                    block += b;
                }
                for (a, c) in [(i, j), (j, i)] {
                    let mut block = h.fixed_view_mut::<2, 2>(2 * a, 2 * c);
                    block -= b;
                }
            }
        }
        h
    }

    /// Hessian with the intracavity photon number held at its value at `z`.
    pub fn hessian_fixed(&self, z: &[f64]) -> Result<DMatrix<f64>> {
        self.check_separations(z)?;
        let mut h = self.trap_coulomb_hessian(z);
        if self.cavity_on() {
            let factor = self.force_factor(self.delta_eff(z));
            h += self.coupling_hessian(z) * factor;
        }
        Ok(h)
    }

    /// Hessian of the total potential including the photon-number response.
    pub fn hessian_full(&self, z: &[f64]) -> Result<DMatrix<f64>> {
        let mut h = self.hessian_fixed(z)?;
        if self.cavity_on() {
            let delta = self.delta_eff(z);
            let den = self.kappa * self.kappa + delta * delta;
            let coef =
                2.0 * self.amplitude * delta * self.shift * self.shift * self.kappa / (den * den);
            let g = self.coupling_gradient(z);
            h.ger(coef, &g, &g, 1.0);
        }
        Ok(h)
    }

    pub fn to_scaled(&self, positions: &[[f64; 2]]) -> Vec<f64> {
        positions
            .iter()
            .flat_map(|p| [p[0] / self.length, p[1] / self.length])
            .collect()
    }

    pub fn to_positions(&self, z: &[f64]) -> Vec<[f64; 2]> {
        z.chunks_exact(2)
            .map(|c| [c[0] * self.length, c[1] * self.length])
            .collect()
    }
}
