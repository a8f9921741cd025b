//! Spacetime metrics as symmetric fields of analytic components.
//!
//! Signature is `(+,-,-,-)` and coordinates are `(t, x, y, z)`. Units are
//! geometric (`c = G = 1`) throughout.

mod point;

use nalgebra::Matrix3;

pub use point::{Depth, MetricPoint};

use crate::error::{Error, Result};
use crate::expr::{sym_index, Coord, Expr, Params};

/// Which constructor produced a metric. Carried for reporting and for the
/// closed-form operator paths.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    Static,
    RotatingIsotropic,
    Kerr,
    LenseThirring,
    Noninertial,
    Custom,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::Static => "static",
            Family::RotatingIsotropic => "rotating-isotropic",
            Family::Kerr => "kerr",
            Family::LenseThirring => "lense-thirring",
            Family::Noninertial => "noninertial",
            Family::Custom => "custom",
        }
    }
}

/// Lapse `V`, isotropic spatial factor `W` and frame angular velocity `Omega`
/// of `ds^2 = V^2 dt^2 - W^2 (dx - K dt)^2` with `K = Omega x r`.
#[derive(Debug, Clone, PartialEq)]
pub struct IsotropicParts {
    pub v: Expr,
    pub w: Expr,
    pub omega: [Expr; 3],
}

impl IsotropicParts {
    pub fn is_static(&self) -> bool {
        self.omega.iter().all(Expr::is_zero)
    }
}

/// Truncation of the isotropic Kerr frame-dragging series.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KerrOrder {
    /// `omega = 2 mu a / r^3` (Lense-Thirring).
    Leading,
    /// Includes the `-3 mu/r + 21 mu^2/(4 r^2)` corrections.
    Full,
}

/// Region where a metric is trusted.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Domain {
    /// Points with `r < r_min` are rejected by [`Metric::at_point`].
    pub r_min: f64,
    /// Points at which the signature and conformal-factor checks run.
    pub check_points: Vec<[f64; 4]>,
}

#[derive(Debug, Clone)]
pub struct Metric {
    /// Covariant components in packed upper-triangular order
    /// `g00 g01 g02 g03 g11 g12 g13 g22 g23 g33`.
    components: [Expr; 10],
    params: Params,
    family: Family,
    isotropic: Option<IsotropicParts>,
    domain: Domain,
}

/// Component names in packed order, as used in configuration files.
pub const COMPONENT_NAMES: [&str; 10] =
    ["g00", "g01", "g02", "g03", "g11", "g12", "g13", "g22", "g23", "g33"];

fn reject_time(e: &Expr, what: &str) -> Result<()> {
    if e.depends_on(Coord::T) {
        Err(Error::Config(format!("{what} must not depend on t")))
    } else {
        Ok(())
    }
}

impl Metric {
    /// Generic metric from its ten independent covariant components.
    pub fn custom(components: [Expr; 10], params: Params) -> Self {
        Self {
            components: components.map(|c| c.bind(&params)),
            params,
            family: Family::Custom,
            isotropic: None,
            domain: Domain::default(),
        }
    }

    /// `ds^2 = V^2 dt^2 - W^2 dr^2`.
    pub fn static_diagonal(v: Expr, w: Expr, params: Params) -> Result<Self> {
        reject_time(&v, "V")?;
        reject_time(&w, "W")?;
        let parts = IsotropicParts { v, w, omega: [Expr::zero(), Expr::zero(), Expr::zero()] };
        Ok(Self::from_isotropic(parts, params, Family::Static))
    }

    /// `ds^2 = V^2 dt^2 - W^2 (dx^i - K^i dt)(dx^i - K^i dt)` with `K = Omega x r`.
    pub fn rotating_isotropic(v: Expr, w: Expr, omega: [Expr; 3], params: Params) -> Result<Self> {
        reject_time(&v, "V")?;
        reject_time(&w, "W")?;
        for o in &omega {
            reject_time(o, "Omega")?;
        }
        let parts = IsotropicParts { v, w, omega };
        let family = if parts.is_static() { Family::Static } else { Family::RotatingIsotropic };
        Ok(Self::from_isotropic(parts, params, family))
    }

    fn from_isotropic(parts: IsotropicParts, params: Params, family: Family) -> Self {
        let parts = IsotropicParts {
            v: parts.v.bind(&params),
            w: parts.w.bind(&params),
            omega: parts.omega.map(|o| o.bind(&params)),
        };
        let components = isotropic_components(&parts);
        Self {
            components,
            params,
            family,
            isotropic: Some(parts),
            domain: Domain::default(),
        }
    }

    /// Isotropic-coordinate Kerr field of mass `mass` and spin length
    /// `spin = J/M` along `z`, with `r_min = mass`.
    pub fn kerr(mass: f64, spin: f64, order: KerrOrder) -> Result<Self> {
        let parts = kerr_isotropic(mass, spin, order)?;
        let family = Family::Kerr;
        let mut m = Self::from_isotropic(parts, Params::new(), family);
        m.domain.r_min = mass;
        Ok(m)
    }

    /// Weak-field rotating source: `V = 1 - M/r`, `W = 1 + M/r`,
    /// `Omega = 2 J / r^3` along `z`.
    pub fn lense_thirring(mass: f64, angular_momentum: f64) -> Result<Self> {
        if mass < 0.0 {
            return Err(Error::Config(format!("mass must be non-negative, got {mass}")));
        }
        let r = Expr::var(Coord::R);
        let v = 1.0 - mass / r.clone();
        let w = 1.0 + mass / r.clone();
        let omega_z = if angular_momentum == 0.0 {
            Expr::zero()
        } else {
            (2.0 * angular_momentum) * r.powi(-3)
        };
        let parts = IsotropicParts { v, w, omega: [Expr::zero(), Expr::zero(), omega_z] };
        let mut m = Self::from_isotropic(parts, Params::new(), Family::LenseThirring);
        m.domain.r_min = mass;
        Ok(m)
    }

    /// Frame with proper acceleration `a` rotating at `o`:
    /// `V = 1 + a.r`, `W = 1`, `Omega = -o`.
    pub fn noninertial(accel: [f64; 3], rotation: [f64; 3]) -> Self {
        let pos = Expr::position();
        let a = accel.map(Expr::constant);
        let v = if accel == [0.0; 3] { Expr::one() } else { 1.0 + Expr::dot(&a, &pos) };
        let omega = rotation.map(|o| if o == 0.0 { Expr::zero() } else { Expr::constant(-o) });
        let parts = IsotropicParts { v, w: Expr::one(), omega };
        Self::from_isotropic(parts, Params::new(), Family::Noninertial)
    }

    pub fn minkowski() -> Self {
        Self::from_isotropic(
            IsotropicParts {
                v: Expr::one(),
                w: Expr::one(),
                omega: [Expr::zero(), Expr::zero(), Expr::zero()],
            },
            Params::new(),
            Family::Static,
        )
    }

    /// Passes to a frame rotating at `o` relative to this one, replacing
    /// `Omega` by `Omega - o`.
    pub fn rotate_to_frame(&self, o: [f64; 3]) -> Result<Self> {
        let parts = self.isotropic.as_ref().ok_or_else(|| {
            Error::Family(format!(
                "frame rotation needs a rotating-isotropic metric, got {}",
                self.family.name()
            ))
        })?;
        let omega = std::array::from_fn(|i| match (parts.omega[i].is_zero(), o[i] == 0.0) {
            (_, true) => parts.omega[i].clone(),
            (true, false) => Expr::constant(-o[i]),
            (false, false) => &parts.omega[i] - Expr::constant(o[i]),
        });
        let new_parts = IsotropicParts { v: parts.v.clone(), w: parts.w.clone(), omega };
        let family = match self.family {
            Family::Static if !new_parts.is_static() => Family::RotatingIsotropic,
            f => f,
        };
        let mut m = Self::from_isotropic(new_parts, self.params.clone(), family);
        m.domain = self.domain.clone();
        Ok(m)
    }

    /// Conformally related metric `O^-2 g`.
    pub fn conformal(&self, factor: &Expr) -> Result<Self> {
        let factor = factor.bind(&self.params);
        for p in &self.domain.check_points {
            let o = factor.value(p, &self.params)?;
            if o <= 0.0 {
                return Err(Error::domain(format!("conformal factor {o} <= 0 at {p:?}")));
            }
        }
        let inv2 = factor.powi(-2);
        let components = self.components.clone().map(|c| c * &inv2);
        let isotropic = self.isotropic.as_ref().map(|p| IsotropicParts {
            v: &p.v / &factor,
            w: &p.w / &factor,
            omega: p.omega.clone(),
        });
        Ok(Self {
            components,
            params: self.params.clone(),
            family: self.family,
            isotropic,
            domain: self.domain.clone(),
        })
    }

    pub fn with_domain(mut self, domain: Domain) -> Self {
        self.domain = domain;
        self
    }

    pub fn with_r_min(mut self, r_min: f64) -> Self {
        self.domain.r_min = r_min;
        self
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn isotropic(&self) -> Option<&IsotropicParts> {
        self.isotropic.as_ref()
    }

    pub fn params(&self) -> &Params {
        &self.params
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    /// Covariant component `g_{mu nu}`.
    pub fn component(&self, mu: usize, nu: usize) -> &Expr {
        &self.components[sym_index(mu, nu)]
    }

    pub fn components(&self) -> &[Expr; 10] {
        &self.components
    }

    /// True if any component depends on `t`.
    pub fn is_time_dependent(&self) -> bool {
        self.components.iter().any(|c| c.depends_on(Coord::T))
    }

    /// Component values at a point.
    pub fn values(&self, point: &[f64; 4]) -> Result<[[f64; 4]; 4]> {
        let mut g = [[0.0; 4]; 4];
        for mu in 0..4 {
            for nu in mu..4 {
                let v = self.component(mu, nu).value(point, &self.params)?;
                g[mu][nu] = v;
                g[nu][mu] = v;
            }
        }
        Ok(g)
    }

    /// Pointwise metric data with derivatives to the requested depth.
    pub fn at_point(&self, point: &[f64; 4], depth: Depth) -> Result<MetricPoint> {
        if self.domain.r_min > 0.0 {
            let r = (point[1] * point[1] + point[2] * point[2] + point[3] * point[3]).sqrt();
            if r < self.domain.r_min {
                return Err(Error::domain(format!(
                    "r = {r} below the validity radius {}",
                    self.domain.r_min
                )));
            }
        }
        MetricPoint::evaluate(self, point, depth)
    }

    /// Runs the signature checks at every declared check point.
    pub fn validate(&self) -> Result<()> {
        for p in &self.domain.check_points {
            self.check_signature(p)?;
        }
        Ok(())
    }

    /// `det g < 0`, `g^00 > 0` and `-G^{ij}` positive definite at `point`.
    pub fn check_signature(&self, point: &[f64; 4]) -> Result<()> {
        let mp = self.at_point(point, Depth::Values)?;
        let neg_g = Matrix3::from_fn(|i, j| -mp.g_spatial_up[i][j].v);
        if neg_g.cholesky().is_none() {
            return Err(Error::Signature(format!(
                "-G^ij is not positive definite at {point:?}"
            )));
        }
        Ok(())
    }
}

fn isotropic_components(parts: &IsotropicParts) -> [Expr; 10] {
    let v2 = parts.v.powi(2);
    let w2 = parts.w.powi(2);
    let neg_w2 = -w2.clone();
    let mut comps: [Expr; 10] = std::array::from_fn(|_| Expr::zero());
    for i in 1..4 {
        comps[sym_index(i, i)] = neg_w2.clone();
    }
    if parts.is_static() {
        comps[0] = v2;
        return comps;
    }
    let k = Expr::cross(&parts.omega, &Expr::position());
    let k2 = Expr::dot(&k, &k);
    comps[0] = v2 - &w2 * k2;
    for i in 0..3 {
        if !k[i].is_zero() {
            comps[sym_index(0, i + 1)] = &w2 * &k[i];
        }
    }
    comps
}

/// Lapse, spatial factor and frame-dragging rate of the isotropic Kerr
/// approximation with `kappa = 1 +- mu/(2 r)`.
pub fn kerr_isotropic(mass: f64, spin: f64, order: KerrOrder) -> Result<IsotropicParts> {
    if mass <= 0.0 || !mass.is_finite() {
        return Err(Error::Config(format!("Kerr mass must be positive, got {mass}")));
    }
    if !spin.is_finite() {
        return Err(Error::Config("Kerr spin must be finite".into()));
    }
    let r = Expr::var(Coord::R);
    let half = mass / 2.0;
    let kappa_minus = 1.0 - half / r.clone();
    let kappa_plus = 1.0 + half / r.clone();
    let v = kappa_minus / kappa_plus.clone();
    let w = kappa_plus.powi(2);
    let omega_z = if spin == 0.0 {
        Expr::zero()
    } else {
        let leading = (2.0 * mass * spin) * r.powi(-3);
        match order {
            KerrOrder::Leading => leading,
            KerrOrder::Full => {
                let bracket = 1.0 - (3.0 * mass) / r.clone()
                    + (21.0 * mass * mass / 4.0) * r.powi(-2);
                leading * bracket
            }
        }
    };
    Ok(IsotropicParts { v, w, omega: [Expr::zero(), Expr::zero(), omega_z] })
}

#[cfg(test)]
mod tests;
