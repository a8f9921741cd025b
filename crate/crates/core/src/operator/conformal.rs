use nalgebra::DMatrix;

use super::assemble::{assemble_t_prime_generic, assemble_upsilon_prime, multiplier};
use super::fw::{fw_exact_with, spectrum, Spectral, EXACTNESS_TOL};
use super::grid::GridSpec;
use super::Coupling;
use crate::error::Result;
use crate::expr::Expr;
use crate::metric::{Depth, Metric};

/// Comparison of `T'` and the FW spectrum for `g` and `O^-2 g` on one grid.
#[derive(Debug, Clone)]
pub struct ConformalReport {
    /// `||T~' - T'||_F / ||T'||_F`.
    pub t_rel_diff: f64,
    /// Off-diagonal part of `T~' - T'` relative to `||T'||_F`. On sector
    /// grids the angular blocks at each node count as diagonal.
    pub offdiag_rel: f64,
    /// `||T~' - T' - m^2 (1/g~^00 - 1/g^00)||_F / ||T'||_F`.
    pub mass_term_rel: f64,
    /// Lowest FW energies of the original and the transformed metric.
    pub energies: Vec<f64>,
    pub energies_conformal: Vec<f64>,
    /// Largest `|E~_i - E_i| / |E_i|`.
    pub spectral_rel_diff: f64,
    /// `||Q_k^T Q~_k||_F^2 / k` for the lowest `k` eigenvectors of `T'`;
    /// one when the eigenspaces coincide.
    pub overlap: f64,
}

/// Zeroes every entry coupling different nodes.
fn offdiagonal(m: &DMatrix<f64>, grid: &GridSpec) -> DMatrix<f64> {
    let node = |i: usize| match grid {
        GridSpec::Sector(s) => i % s.n,
        GridSpec::Cartesian(_) => i,
    };
    DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| if node(i) == node(j) { 0.0 } else { m[(i, j)] })
}

pub fn conformal_invariance_check(
    metric: &Metric,
    factor: &Expr,
    coupling: &Coupling,
    grid: &GridSpec,
    k: usize,
) -> Result<ConformalReport> {
    let rescaled = metric.conformal(factor)?;
    let t = assemble_t_prime_generic(metric, coupling, grid)?;
    let tt = assemble_t_prime_generic(&rescaled, coupling, grid)?;
    let norm = t.norm();
    let diff = &tt.re - &t.re;

    let m2 = coupling.mass * coupling.mass;
    let inv_g00 = |mp: &crate::metric::MetricPoint| 1.0 / mp.g_up[0][0].v;
    let mass_shift = (multiplier(&rescaled, grid, Depth::Values, inv_g00)?
        - multiplier(metric, grid, Depth::Values, inv_g00)?)
        * m2;

    let s = Spectral::of(&t)?;
    let st = Spectral::of(&tt)?;
    let u = assemble_upsilon_prime(metric, grid)?;
    let ut = assemble_upsilon_prime(&rescaled, grid)?;
    let energies = spectrum(&fw_exact_with(&s, &t, &u, EXACTNESS_TOL)?.h_fw, k)?;
    let energies_conformal = spectrum(&fw_exact_with(&st, &tt, &ut, EXACTNESS_TOL)?.h_fw, k)?;
    let spectral_rel_diff = energies
        .iter()
        .zip(&energies_conformal)
        .map(|(a, b)| (a - b).abs() / a.abs())
        .fold(0.0, f64::max);

    let kk = k.min(t.dim());
    let q = s.vectors.columns(0, kk);
    let qt = st.vectors.columns(0, kk);
    let overlap = (q.transpose() * qt).norm_squared() / kk as f64;

    Ok(ConformalReport {
        t_rel_diff: diff.norm() / norm,
        offdiag_rel: offdiagonal(&diff, grid).norm() / norm,
        mass_term_rel: (&diff - mass_shift).norm() / norm,
        energies,
        energies_conformal,
        spectral_rel_diff,
        overlap,
    })
}
