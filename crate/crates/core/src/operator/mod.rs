//! Grid discretization of the two-component Hamiltonian and its
//! Foldy-Wouthuysen forms.
//!
//! Operators act on the reduced wave function `psi' = f psi`. Two grid kinds
//! are supported:
//!
//! * radial sectors: `psi = sum_l u_l(r)/r Y_l^{m_z}` on a uniform radial
//!   grid with Dirichlet ends, for axisymmetric metrics whose kinetic tensor
//!   is isotropic;
//! * a dense Cartesian box for anything else, capped at 4096 nodes.

mod assemble;
mod conformal;
mod eom;
mod fw;
mod grid;
mod quadrature;
mod rational;

pub use assemble::{
    assemble_t_prime_generic, assemble_t_prime_rotating_closed, assemble_t_prime_static_closed,
    assemble_upsilon_prime,
};
pub use conformal::{conformal_invariance_check, ConformalReport};
pub use eom::{expectation, gaussian_packet, quantum_eom, EomOperators, Packet};
pub use fw::{
    fw_approximate, fw_exact, fw_transform_operator, hamiltonian_prime, spectrum, sqrt_psd, FwMethod,
    FwResult, FwTransform, Spectral, EXACTNESS_TOL, exactness_defect,
};
pub use grid::{CartesianGrid, Components, GridOperator, GridSpec, SectorGrid};
pub use quadrature::{gauss_legendre, normalized_legendre};
pub use rational::Rational;

use crate::error::{Error, Result};

/// Coupling constants of the wave equation and the free parameter of the
/// Feshbach-Villars split.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coupling {
    /// Curvature coupling; `1/6` is the conformal value.
    pub lambda: Rational,
    pub mass: f64,
    /// Feshbach-Villars parameter `N`. Physical results do not depend on it.
    pub n_param: f64,
}

impl Default for Coupling {
    fn default() -> Self {
        Self { lambda: Rational::CONFORMAL, mass: 1.0, n_param: 1.0 }
    }
}

impl Coupling {
    pub fn new(lambda: Rational, mass: f64, n_param: f64) -> Result<Self> {
        let c = Self { lambda, mass, n_param };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mass >= 0.0 && self.mass.is_finite()) {
            return Err(Error::Config(format!("mass must be finite and >= 0, got {}", self.mass)));
        }
        if self.n_param == 0.0 || !self.n_param.is_finite() {
            return Err(Error::Config(format!("N must be finite and nonzero, got {}", self.n_param)));
        }
        Ok(())
    }

    pub fn with_lambda(mut self, lambda: Rational) -> Self {
        self.lambda = lambda;
        self
    }

    pub fn with_mass(mut self, mass: f64) -> Self {
        self.mass = mass;
        self
    }

    pub fn with_n(mut self, n_param: f64) -> Self {
        self.n_param = n_param;
        self
    }
}
