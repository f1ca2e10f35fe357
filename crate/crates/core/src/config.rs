//! Human-facing parameter files.
//!
//! Frequencies are given in MHz (the 2 pi is applied on loading), lengths in
//! micrometres or nanometres as the key names say. The coupling can be given
//! either as `g0_mhz` or as a target `cooperativity` for the free-space
//! linear chain, and the pump either as `eta_mhz` or as the dimensionless
//! `power`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::constants::{mhz, ATOMIC_MASS_UNIT, CALCIUM_40_MASS_AMU, ELEMENTARY_CHARGE, TWO_PI};
use crate::crystal::linear_chain_seed;
use crate::params::{n_eff, HeatingRates, SystemParams};
use crate::{Error, Result};

fn default_mass() -> f64 {
    CALCIUM_40_MASS_AMU
}
fn default_charge() -> f64 {
    1.0
}
fn default_wavelength() -> f64 {
    866.0
}
fn default_heating() -> f64 {
    100.0
}
fn default_temperature() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    pub n_ions: usize,
    #[serde(default = "default_mass")]
    pub mass_amu: f64,
    /// In units of the elementary charge.
    #[serde(default = "default_charge")]
    pub charge_e: f64,
    pub omega_x_mhz: f64,
    pub omega_y_mhz: f64,
    #[serde(default = "default_wavelength")]
    pub wavelength_nm: f64,
    pub waist_um: f64,
    #[serde(default)]
    pub mode_center_y_um: f64,
    pub kappa_mhz: f64,
    #[serde(default)]
    pub delta_c_mhz: f64,
    pub delta_0_mhz: f64,
    #[serde(default)]
    pub gamma_mhz: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g0_mhz: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cooperativity: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta_mhz: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub power: Option<f64>,
    #[serde(default = "default_heating")]
    pub heating_rate_per_s: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub heating_rates_per_s: Option<Vec<f64>>,
    #[serde(default = "default_temperature")]
    pub bath_temperature_mk: f64,
}

impl SystemConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    /// Converts to SI parameters, resolving cooperativity and power.
    pub fn resolve(&self) -> Result<SystemParams> {
        if self.g0_mhz.is_some() && self.cooperativity.is_some() {
            return Err(Error::Config(
                "give either g0_mhz or cooperativity, not both".into(),
            ));
        }
        if self.eta_mhz.is_some() && self.power.is_some() {
            return Err(Error::Config(
                "give either eta_mhz or power, not both".into(),
            ));
        }
        let heating_rates = match &self.heating_rates_per_s {
            Some(rates) => HeatingRates::PerMode(rates.clone()),
            None => HeatingRates::Uniform(self.heating_rate_per_s),
        };
        let mut params = SystemParams {
            ion_mass: self.mass_amu * ATOMIC_MASS_UNIT,
            ion_charge: self.charge_e * ELEMENTARY_CHARGE,
            n_ions: self.n_ions,
            omega_x: mhz(self.omega_x_mhz),
            omega_y: mhz(self.omega_y_mhz),
            g0: mhz(self.g0_mhz.unwrap_or(0.0)),
            wavenumber: TWO_PI / (self.wavelength_nm * 1e-9),
            waist: self.waist_um * 1e-6,
            mode_center_y: self.mode_center_y_um * 1e-6,
            kappa: mhz(self.kappa_mhz),
            delta_c: mhz(self.delta_c_mhz),
            delta_0: mhz(self.delta_0_mhz),
            gamma: mhz(self.gamma_mhz),
            eta: mhz(self.eta_mhz.unwrap_or(0.0)),
            heating_rates,
            bath_temperature: self.bath_temperature_mk * 1e-3,
        };
        params.validate()?;
        if let Some(coop) = self.cooperativity {
            if coop < 0.0 {
                return Err(Error::Config("cooperativity must be non-negative".into()));
            }
            let neff = n_eff(&params, &linear_chain_seed(&params));
            params.g0 = (coop * params.kappa * params.delta_0.abs() / neff).sqrt();
        }
        if let Some(power) = self.power {
            if power < 0.0 {
                return Err(Error::Config("power must be non-negative".into()));
            }
            params.eta = params.eta_for_power(power);
        }
        Ok(params)
    }
}

/// Reads a parameter file, choosing the format from the extension
/// (`.json`, otherwise TOML).
pub fn load_system(path: &Path) -> Result<SystemParams> {
    let text = std::fs::read_to_string(path)?;
    let cfg = if path.extension().is_some_and(|e| e == "json") {
        SystemConfig::from_json_str(&text)?
    } else {
        SystemConfig::from_toml_str(&text)?
    };
    cfg.resolve()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::cooperativity;

    const FOUR_IONS: &str = r#"
        n_ions = 4
        omega_x_mhz = 2.12
        omega_y_mhz = 1.0
        waist_um = 4.1
        kappa_mhz = 1.0
        delta_0_mhz = 500.0
        gamma_mhz = 10.0
        cooperativity = 3.0
        power = 0.074
    "#;

    #[test]
    fn resolves_cooperativity_and_power() {
        let p = SystemConfig::from_toml_str(FOUR_IONS)
            .unwrap()
            .resolve()
            .unwrap();
        let c = cooperativity(&p, &linear_chain_seed(&p));
        assert!((c - 3.0).abs() < 1e-12);
        assert!((p.power() - 0.074).abs() < 1e-14);
        assert_eq!(p.heating_rate(5), 100.0);
        assert_eq!(p.bath_temperature, 1e-3);
        assert!((p.wavenumber - TWO_PI / 866e-9).abs() < 1e-3);
    }

    #[test]
    fn json_and_toml_agree() {
        let toml_cfg = SystemConfig::from_toml_str(FOUR_IONS).unwrap();
        let json = serde_json::to_string(&toml_cfg).unwrap();
        assert_eq!(SystemConfig::from_json_str(&json).unwrap(), toml_cfg);
    }

    #[test]
    fn conflicting_keys() {
        let text = format!("{FOUR_IONS}\ng0_mhz = 9.4\n");
        let cfg = SystemConfig::from_toml_str(&text).unwrap();
        assert!(matches!(cfg.resolve(), Err(Error::Config(_))));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = format!("{FOUR_IONS}\nkapa_mhz = 1.0\n");
        assert!(SystemConfig::from_toml_str(&text).is_err());
    }
}
