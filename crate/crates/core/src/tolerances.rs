//! Named tolerances of the verification checks.

use std::collections::BTreeMap;

use crate::error::{Error, Result};

/// `(name, default, meaning)` for every tolerance.
pub const DEFAULTS: &[(&str, f64, &str)] = &[
    ("flatness", 1e-9, "max |R| of the noninertial-frame metric"),
    ("vacuum", 1e-8, "max |R| of isotropic Schwarzschild on [3 mu, 100 mu]"),
    ("pseudo_hermiticity", 1e-12, "||rho3 H'^+ rho3 - H'||_F / ||H'||_F"),
    ("n_independence", 1e-9, "relative spread of the physical spectrum over N"),
    ("oracle_order", 1.8, "minimum convergence order of generic vs closed T'"),
    ("conformal_spectral", 1e-6, "relative FW spectral change under g -> O^-2 g at lambda = 1/6, m = 0"),
    ("conformal_order", 1.8, "minimum refinement order of that change"),
    ("conformal_broken", 1e-3, "minimum spectral change at lambda = 0"),
    ("conformal_mass", 1e-10, "T' change minus m^2 (1/g~^00 - 1/g^00), relative"),
    ("static_exactness", 1e-12, "fw_approximate vs fw_exact where both apply"),
    ("fw_exactness", 1e-10, "commutator defect below which the FW form counts as exact"),
    ("hamilton_fd", 1e-6, "velocity and dp/dt vs finite differences of H"),
    ("noninertial", 1e-9, "closed noninertial equations vs the general ones"),
    ("packet_velocity", 0.03, "packet velocity vs classical velocity, relative"),
    ("packet_force", 0.05, "packet force vs classical force, relative"),
    ("energy_drift", 1e-9, "max relative energy drift of the leapfrog integrator"),
    ("kepler", 1e-3, "circular-orbit frequency vs Kepler, relative"),
    ("curvature", 1e-9, "max |R| accepted by the curvature command"),
];

#[derive(Debug, Clone, PartialEq)]
pub struct Tolerances {
    values: BTreeMap<&'static str, f64>,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { values: DEFAULTS.iter().map(|&(n, v, _)| (n, v)).collect() }
    }
}

impl Tolerances {
    pub fn get(&self, name: &str) -> f64 {
        *self.values.get(name).unwrap_or_else(|| panic!("unknown tolerance `{name}`"))
    }

    pub fn set(&mut self, name: &str, value: f64) -> Result<()> {
        let key = DEFAULTS
            .iter()
            .find(|(n, _, _)| *n == name)
            .map(|(n, _, _)| *n)
            .ok_or_else(|| Error::Config(format!("unknown tolerance `{name}`")))?;
        if !(value > 0.0 && value.is_finite()) {
            return Err(Error::Config(format!("tolerance `{name}` must be positive, got {value}")));
        }
        self.values.insert(key, value);
        Ok(())
    }

    /// Applies a `NAME=VALUE` override.
    pub fn apply(&mut self, assignment: &str) -> Result<()> {
        let (name, value) = assignment
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("expected NAME=VALUE, got `{assignment}`")))?;
        let value: f64 = value
            .trim()
            .parse()
            .map_err(|_| Error::Config(format!("tolerance `{}`: `{}` is not a number", name.trim(), value.trim())))?;
        self.set(name.trim(), value)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overrides() {
        let mut t = Tolerances::default();
        assert_eq!(t.get("kepler"), 1e-3);
        t.apply("kepler = 2e-3").unwrap();
        assert_eq!(t.get("kepler"), 2e-3);
        assert!(t.apply("nope=1").is_err());
        assert!(t.apply("kepler").is_err());
        assert!(t.apply("kepler=-1").is_err());
    }
}
