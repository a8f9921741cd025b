//! Browser bindings: curvature profiles of user-typed static metrics,
//! conformal spectra against the coupling, and classical orbits around a
//! rotating mass.

use gfw::classical::{integrate_sampled, ClassicalState, Scheme};
use gfw::curvature::ricci_scalar;
use gfw::expr::{parse, Params};
use gfw::metric::Metric;
use gfw::operator::{conformal_invariance_check, Coupling, GridSpec, Rational};
use wasm_bindgen::prelude::*;

fn js(e: gfw::Error) -> JsError {
    JsError::new(&e.to_string())
}

fn static_metric(v: &str, w: &str) -> gfw::Result<Metric> {
    Metric::static_diagonal(parse(v)?, parse(w)?, Params::new())
}

/// `R` along the positive x axis for `V^2 dt^2 - W^2 dx^2`, as
/// `[r_0, R_0, r_1, R_1, ...]`.
pub fn ricci_profile_native(v: &str, w: &str, r_min: f64, r_max: f64, points: usize) -> gfw::Result<Vec<f64>> {
    let m = static_metric(v, w)?;
    let points = points.max(2);
    let mut out = Vec::with_capacity(2 * points);
    for k in 0..points {
        let r = r_min + (r_max - r_min) * k as f64 / (points - 1) as f64;
        out.push(r);
        out.push(ricci_scalar(&m, &[0.0, r, 0.0, 0.0])?);
    }
    Ok(out)
}

#[wasm_bindgen]
pub fn ricci_profile(v: &str, w: &str, r_min: f64, r_max: f64, points: usize) -> Result<Vec<f64>, JsError> {
    ricci_profile_native(v, w, r_min, r_max, points).map_err(js)
}

/// Lowest massless FW energies in the `l = 0` sector of
/// `V = 1 - mu/r`, `W = 1 + mu/r` on `[1, 20]`, before and after the
/// rescaling by `O`: `[E_0.., E~_0..]`.
pub fn conformal_spectra_native(lambda: &str, factor: &str, mu: f64, n: usize, levels: usize) -> gfw::Result<Vec<f64>> {
    let lambda: Rational = lambda.parse()?;
    let m = static_metric(&format!("1 - {mu}/r"), &format!("1 + {mu}/r"))?;
    let grid = GridSpec::single_sector(1.0, 20.0, n, 0, 0)?;
    let coupling = Coupling::new(lambda, 0.0, 1.0)?;
    let r = conformal_invariance_check(&m, &parse(factor)?, &coupling, &grid, levels)?;
    Ok(r.energies.into_iter().chain(r.energies_conformal).collect())
}

#[wasm_bindgen]
pub fn conformal_spectra(lambda: &str, factor: &str, mu: f64, n: usize, levels: usize) -> Result<Vec<f64>, JsError> {
    conformal_spectra_native(lambda, factor, mu, n, levels).map_err(js)
}

/// Leapfrog orbit of a unit-mass particle around a Lense-Thirring source,
/// started at `(r, 0, 0)` with physical momentum `(0, p cos i, p sin i)`.
/// Returns `[x, y, z, drift]` per sample.
#[allow(clippy::too_many_arguments)]
pub fn orbit_native(
    mu: f64,
    j: f64,
    r: f64,
    p: f64,
    inclination: f64,
    dt: f64,
    steps: usize,
    sample: usize,
) -> gfw::Result<Vec<f64>> {
    let m = Metric::lense_thirring(mu, j)?;
    let s0 = ClassicalState::with_physical_momentum([r, 0.0, 0.0], [0.0, p * inclination.cos(), p * inclination.sin()]);
    let traj = integrate_sampled(&m, 1.0, s0, dt, steps, Scheme::Leapfrog, sample)?;
    let h0 = traj.energies[0];
    Ok(traj
        .states
        .iter()
        .zip(&traj.energies)
        .flat_map(|(s, h)| [s.x[0], s.x[1], s.x[2], (h - h0).abs() / h0.abs()])
        .collect())
}

#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn orbit(
    mu: f64,
    j: f64,
    r: f64,
    p: f64,
    inclination: f64,
    dt: f64,
    steps: usize,
    sample: usize,
) -> Result<Vec<f64>, JsError> {
    orbit_native(mu, j, r, p, inclination, dt, steps, sample).map_err(js)
}
