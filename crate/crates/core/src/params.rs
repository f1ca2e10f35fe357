//! Physical parameters and the scalar cavity mean-field quantities.

use serde::{Deserialize, Serialize};

use crate::constants::{
    ATOMIC_MASS_UNIT, BOLTZMANN, CALCIUM_40_MASS_AMU, ELEMENTARY_CHARGE, HBAR, VACUUM_PERMITTIVITY,
};
use crate::{Error, Result};

/// Ion position `(x, y)` in metres. `x` is along the cavity axis, `y` along
/// the trap axis.
pub type Position = [f64; 2];

/// Heating (thermalization) rate of the motional modes, in s^-1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum HeatingRates {
    Uniform(f64),
    PerMode(Vec<f64>),
}

impl Default for HeatingRates {
    fn default() -> Self {
        HeatingRates::Uniform(100.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    /// kg
    pub ion_mass: f64,
    /// C
    pub ion_charge: f64,
    pub n_ions: usize,
    /// Transverse (cavity-axis) trap frequency, rad/s.
    pub omega_x: f64,
    /// Axial trap frequency, rad/s.
    pub omega_y: f64,
    /// Peak single-ion vacuum Rabi frequency, rad/s.
    pub g0: f64,
    /// Cavity wavenumber, 1/m.
    pub wavenumber: f64,
    /// Transverse mode waist, m.
    pub waist: f64,
    /// Offset of the mode centre along the trap axis, m.
    pub mode_center_y: f64,
    /// Cavity field decay rate, rad/s.
    pub kappa: f64,
    /// Pump-cavity detuning, rad/s.
    pub delta_c: f64,
    /// Pump-atom detuning, rad/s.
    pub delta_0: f64,
    /// Atomic linewidth, rad/s.
    pub gamma: f64,
    /// Pump amplitude, rad/s.
    pub eta: f64,
    pub heating_rates: HeatingRates,
    /// K
    pub bath_temperature: f64,
}

/// Non-fatal parameter diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Warning {
    /// `k w` is not large compared with one.
    NarrowWaist { kw: f64 },
    /// The atomic detuning does not dominate the other rates.
    WeakAtomicDetuning { ratio: f64 },
}

impl std::fmt::Display for Warning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Warning::NarrowWaist { kw } => {
                write!(f, "k*w = {kw:.3} < 10: the standing-wave mode model is marginal")
            }
            Warning::WeakAtomicDetuning { ratio } => write!(
                f,
                "|Delta_0| is only {ratio:.3} times max(gamma, kappa, |Delta_c|); the dispersive limit needs > 10"
            ),
        }
    }
}

impl SystemParams {
    /// 40Ca+ ions in the geometry of the four-ion examples with the pump off.
    pub fn calcium_example(n_ions: usize) -> Self {
        use crate::constants::mhz;
        SystemParams {
            ion_mass: CALCIUM_40_MASS_AMU * ATOMIC_MASS_UNIT,
            ion_charge: ELEMENTARY_CHARGE,
            n_ions,
            omega_x: mhz(2.12),
            omega_y: mhz(1.0),
            g0: 0.0,
            wavenumber: 2.0 * std::f64::consts::PI / 866e-9,
            waist: 4.1e-6,
            mode_center_y: 0.0,
            kappa: mhz(1.0),
            delta_c: 0.0,
            delta_0: mhz(500.0),
            gamma: mhz(10.0),
            eta: 0.0,
            heating_rates: HeatingRates::default(),
            bath_temperature: 1e-3,
        }
    }

    /// Checks the hard invariants and returns the soft warnings.
    pub fn validate(&self) -> Result<Vec<Warning>> {
        let positive = [
            ("ion_mass", self.ion_mass),
            ("omega_x", self.omega_x),
            ("omega_y", self.omega_y),
            ("kappa", self.kappa),
            ("waist", self.waist),
            ("wavenumber", self.wavenumber),
        ];
        for (name, value) in positive {
            if !(value > 0.0 && value.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be positive and finite, got {value}"
                )));
            }
        }
        if self.n_ions == 0 {
            return Err(Error::InvalidParameter("n_ions must be at least 1".into()));
        }
        let finite = [
            ("ion_charge", self.ion_charge),
            ("g0", self.g0),
            ("mode_center_y", self.mode_center_y),
            ("delta_c", self.delta_c),
            ("delta_0", self.delta_0),
            ("gamma", self.gamma),
            ("eta", self.eta),
        ];
        for (name, value) in finite {
            if !value.is_finite() {
                return Err(Error::InvalidParameter(format!("{name} must be finite")));
            }
        }
        if self.gamma < 0.0 {
            return Err(Error::InvalidParameter("gamma must be non-negative".into()));
        }
        if !(self.bath_temperature >= 0.0 && self.bath_temperature.is_finite()) {
            return Err(Error::InvalidParameter(
                "bath_temperature must be non-negative".into(),
            ));
        }
        match &self.heating_rates {
            HeatingRates::Uniform(rate) => {
                if !(*rate >= 0.0 && rate.is_finite()) {
                    return Err(Error::InvalidParameter(
                        "heating rate must be non-negative".into(),
                    ));
                }
            }
            HeatingRates::PerMode(rates) => {
                if rates.len() != 2 * self.n_ions {
                    return Err(Error::InvalidParameter(format!(
                        "expected {} per-mode heating rates, got {}",
                        2 * self.n_ions,
                        rates.len()
                    )));
                }
                if rates.iter().any(|r| !(*r >= 0.0 && r.is_finite())) {
                    return Err(Error::InvalidParameter(
                        "heating rates must be non-negative".into(),
                    ));
                }
            }
        }

        let mut warnings = Vec::new();
        let kw = self.wavenumber * self.waist;
        if kw < 10.0 {
            warnings.push(Warning::NarrowWaist { kw });
        }
        let scale = self.gamma.max(self.kappa).max(self.delta_c.abs());
        if self.delta_0.abs() <= 10.0 * scale {
            warnings.push(Warning::WeakAtomicDetuning {
                ratio: self.delta_0.abs() / scale,
            });
        }
        Ok(warnings)
    }

    /// q^2 / (4 pi eps0), in J m.
    pub fn coulomb_constant(&self) -> f64 {
        self.ion_charge * self.ion_charge / (4.0 * std::f64::consts::PI * VACUUM_PERMITTIVITY)
    }

    /// Natural length of the axial problem, (q^2/(4 pi eps0 m omega_y^2))^(1/3).
    pub fn length_scale(&self) -> f64 {
        (self.coulomb_constant() / (self.ion_mass * self.omega_y * self.omega_y)).cbrt()
    }

    /// Recoil frequency hbar k^2 / (2m), rad/s.
    pub fn recoil_frequency(&self) -> f64 {
        HBAR * self.wavenumber * self.wavenumber / (2.0 * self.ion_mass)
    }

    /// Dimensionless pump power eta^2 omega_R / (kappa omega_x^2).
    pub fn power(&self) -> f64 {
        self.eta * self.eta * self.recoil_frequency() / (self.kappa * self.omega_x * self.omega_x)
    }

    /// Pump amplitude (rad/s, non-negative) that realises the dimensionless power.
    pub fn eta_for_power(&self, power: f64) -> f64 {
        (power * self.kappa * self.omega_x * self.omega_x / self.recoil_frequency()).sqrt()
    }

    pub fn with_power(&self, power: f64) -> Self {
        SystemParams {
            eta: self.eta_for_power(power),
            ..self.clone()
        }
    }

    /// Heating rate of mode `n` (0-based), in s^-1.
    pub fn heating_rate(&self, n: usize) -> f64 {
        match &self.heating_rates {
            HeatingRates::Uniform(rate) => *rate,
            HeatingRates::PerMode(rates) => rates[n],
        }
    }

    /// Thermal occupation of a bath mode at angular frequency `omega`.
    pub fn bath_occupation(&self, omega: f64) -> f64 {
        bose_occupation(omega, self.bath_temperature)
    }

    /// g0^2 / Delta_0, the light shift per photon of one ion at the antinode.
    pub(crate) fn light_shift(&self) -> Result<f64> {
        if self.delta_0 == 0.0 {
            return Err(Error::ZeroAtomicDetuning);
        }
        Ok(self.g0 * self.g0 / self.delta_0)
    }
}

/// Bose-Einstein occupation 1/(exp(hbar omega / kB T) - 1); zero at T = 0.
pub fn bose_occupation(omega: f64, temperature: f64) -> f64 {
    if temperature <= 0.0 {
        return 0.0;
    }
    1.0 / (HBAR * omega / (BOLTZMANN * temperature)).exp_m1()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanField {
    /// Real, non-negative intracavity amplitude.
    pub a_bar: f64,
    /// rad/s
    pub delta_eff: f64,
    /// rad/s
    pub u0: f64,
    pub n_photons: f64,
}

impl MeanField {
    pub fn from_shift(params: &SystemParams, u0: f64) -> Self {
        let delta_eff = params.delta_c - u0;
        let n_photons =
            params.eta * params.eta / (params.kappa * params.kappa + delta_eff * delta_eff);
        MeanField {
            a_bar: n_photons.sqrt(),
            delta_eff,
            u0,
            n_photons,
        }
    }
}

/// Mode function at a single position.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeAmplitude {
    /// g(r) / g0
    pub relative: f64,
    /// g(r), rad/s
    pub coupling: f64,
}

pub fn mode_amplitude(params: &SystemParams, position: Position) -> ModeAmplitude {
    let [x, y] = position;
    let dy = y - params.mode_center_y;
    let relative =
        (params.wavenumber * x).cos() * (-dy * dy / (2.0 * params.waist * params.waist)).exp();
    ModeAmplitude {
        relative,
        coupling: params.g0 * relative,
    }
}

fn check_count(params: &SystemParams, positions: &[Position]) -> Result<()> {
    if positions.len() != params.n_ions {
        return Err(Error::PositionCount {
            expected: params.n_ions,
            got: positions.len(),
        });
    }
    Ok(())
}

/// Cavity frequency shift sum_j g(r_j)^2 / Delta_0, rad/s.
pub fn u0(params: &SystemParams, positions: &[Position]) -> Result<f64> {
    check_count(params, positions)?;
    let shift = params.light_shift()?;
    let sum: f64 = positions
        .iter()
        .map(|&p| mode_amplitude(params, p).relative.powi(2))
        .sum();
    Ok(shift * sum)
}

/// Effective number of ions inside the mode waist.
pub fn n_eff(params: &SystemParams, positions: &[Position]) -> f64 {
    let w2 = params.waist * params.waist;
    positions
        .iter()
        .map(|p| {
            let dy = p[1] - params.mode_center_y;
            (-dy * dy / w2).exp()
        })
        .sum()
}

pub fn cooperativity(params: &SystemParams, positions: &[Position]) -> f64 {
    params.g0 * params.g0 * n_eff(params, positions) / (params.kappa * params.delta_0.abs())
}

pub fn mean_field(params: &SystemParams, positions: &[Position]) -> Result<MeanField> {
    Ok(MeanField::from_shift(params, u0(params, positions)?))
}

/// Mean photon flux leaving the cavity, 2 kappa |a|^2, in photons/s.
pub fn output_intensity(mean_field: &MeanField, params: &SystemParams) -> f64 {
    2.0 * params.kappa * mean_field.n_photons
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PumpConversions {
    pub power: f64,
    /// rad/s
    pub recoil_frequency: f64,
}

pub fn pump_conversions(params: &SystemParams) -> PumpConversions {
    PumpConversions {
        power: params.power(),
        recoil_frequency: params.recoil_frequency(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EffectiveDecay {
    /// rad/s
    pub kappa_eff: f64,
    /// True when spontaneous emission changes kappa by less than 10 %.
    pub dispersive_valid: bool,
}

pub fn effective_decay(params: &SystemParams, positions: &[Position]) -> Result<EffectiveDecay> {
    let shift = u0(params, positions)?;
    let kappa_eff = params.kappa + shift * params.gamma / (2.0 * params.delta_0);
    Ok(EffectiveDecay {
        kappa_eff,
        dispersive_valid: ((kappa_eff - params.kappa) / params.kappa).abs() < 0.1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::mhz;

    fn pumped() -> SystemParams {
        SystemParams {
            g0: mhz(9.4),
            eta: mhz(3.0),
            ..SystemParams::calcium_example(1)
        }
    }

    #[test]
    fn amplitude_at_antinode_node_and_waist() {
        let p = pumped();
        let a = mode_amplitude(&p, [0.0, 0.0]);
        assert_eq!(a.relative, 1.0);
        assert_eq!(a.coupling, p.g0);
        let node = std::f64::consts::FRAC_PI_2 / p.wavenumber;
        assert!(mode_amplitude(&p, [node, 3e-6]).relative.abs() < 1e-15);
        let edge = mode_amplitude(&p, [0.0, p.waist]).relative;
        assert!((edge - (-0.5f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn single_ion_shift() {
        let p = pumped();
        let u = u0(&p, &[[0.0, 0.0]]).unwrap();
        assert!((u - p.g0 * p.g0 / p.delta_0).abs() <= 1e-15 * u.abs());
    }

    #[test]
    fn zero_detuning_is_rejected() {
        let p = SystemParams {
            delta_0: 0.0,
            ..pumped()
        };
        assert!(matches!(
            u0(&p, &[[0.0, 0.0]]),
            Err(Error::ZeroAtomicDetuning)
        ));
    }

    #[test]
    fn wrong_position_count() {
        let p = pumped();
        assert!(matches!(
            u0(&p, &[[0.0, 0.0], [0.0, 1e-6]]),
            Err(Error::PositionCount {
                expected: 1,
                got: 2
            })
        ));
    }

    #[test]
    fn mean_field_on_resonance_and_half_width() {
        let mut p = pumped();
        p.delta_c = p.g0 * p.g0 / p.delta_0;
        let mf = mean_field(&p, &[[0.0, 0.0]]).unwrap();
        assert!(mf.delta_eff.abs() < 1e-9 * p.kappa);
        assert!((mf.a_bar - p.eta / p.kappa).abs() < 1e-12 * mf.a_bar);
        assert!((output_intensity(&mf, &p) - 2.0 * p.eta * p.eta / p.kappa).abs() < 1e-9 * p.eta);

        p.delta_c += p.kappa;
        let mf = mean_field(&p, &[[0.0, 0.0]]).unwrap();
        let expected = p.eta * p.eta / (2.0 * p.kappa * p.kappa);
        assert!((mf.n_photons - expected).abs() < 1e-9 * expected);
    }

    #[test]
    fn no_pump_no_photons() {
        let p = SystemParams {
            eta: 0.0,
            ..pumped()
        };
        let mf = mean_field(&p, &[[0.0, 0.0]]).unwrap();
        assert_eq!(mf.a_bar, 0.0);
        assert_eq!(output_intensity(&mf, &p), 0.0);
        assert_eq!(p.power(), 0.0);
    }

    #[test]
    fn power_round_trip() {
        let p = pumped();
        let back = p.eta_for_power(p.power());
        assert!((back - p.eta).abs() <= 1e-12 * p.eta);
    }

    #[test]
    fn decay_correction_and_validity() {
        let p = pumped();
        let d = effective_decay(&p, &[[0.0, 0.0]]).unwrap();
        let expected = p.kappa + p.g0 * p.g0 * p.gamma / (2.0 * p.delta_0 * p.delta_0);
        assert!((d.kappa_eff - expected).abs() < 1e-12 * expected);
        assert!(d.dispersive_valid);
        let dark = SystemParams { gamma: 0.0, ..p };
        assert_eq!(
            effective_decay(&dark, &[[0.0, 0.0]]).unwrap().kappa_eff,
            dark.kappa
        );
    }

    #[test]
    fn validation() {
        let p = pumped();
        assert!(p.validate().unwrap().is_empty());
        let narrow = SystemParams {
            waist: 1e-6,
            ..p.clone()
        };
        assert!(matches!(
            narrow.validate().unwrap()[0],
            Warning::NarrowWaist { .. }
        ));
        let near = SystemParams {
            delta_0: mhz(50.0),
            ..p.clone()
        };
        assert!(matches!(
            near.validate().unwrap()[0],
            Warning::WeakAtomicDetuning { .. }
        ));
        let bad = SystemParams { kappa: 0.0, ..p };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn bose_limits() {
        assert_eq!(bose_occupation(1e6, 0.0), 0.0);
        // High-temperature series 1/x - 1/2 + x/12.
        let omega = mhz(1.0);
        let t = 1e-3;
        let x = HBAR * omega / (BOLTZMANN * t);
        let series = 1.0 / x - 0.5 + x / 12.0;
        assert!((bose_occupation(omega, t) - series).abs() < 1e-5);
    }
}
