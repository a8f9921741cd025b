//! Quantum equations of motion: `V^i = (i/hbar) [H, x^i]` and
//! `F^i = (i/(2 hbar)) [H, {g^{i mu}, p_mu}]` for stationary metrics.

use nalgebra::{DMatrix, DVector};

use super::assemble::multiplier;
use super::grid::{Components, GridOperator, GridSpec};
use crate::error::{Error, Result};
use crate::metric::{Depth, Metric, MetricPoint};

#[derive(Debug, Clone)]
pub struct EomOperators {
    /// One operator per position axis (radial only on sector grids).
    pub velocity: Vec<GridOperator>,
    pub force: Vec<GridOperator>,
}

/// Central difference along `axis` with Dirichlet ends.
fn central_difference(grid: &GridSpec, axis: usize) -> Result<DMatrix<f64>> {
    let dim = grid.dim();
    let mut d = DMatrix::zeros(dim, dim);
    match grid {
        GridSpec::Sector(s) => {
            if axis != 0 {
                return Err(Error::DimensionMismatch("sector grids have one position axis".into()));
            }
            let w = 0.5 / s.h();
            for a in 0..s.n_l() {
                for k in 1..s.n {
                    d[(s.index(a, k), s.index(a, k + 1))] = w;
                    d[(s.index(a, k + 1), s.index(a, k))] = -w;
                }
            }
        }
        GridSpec::Cartesian(c) => {
            let w = 0.5 / c.h()[axis];
            for ijk in c.interior() {
                if ijk[axis] < c.n {
                    let mut nb = ijk;
                    nb[axis] += 1;
                    d[(c.index(ijk), c.index(nb))] = w;
                    d[(c.index(nb), c.index(ijk))] = -w;
                }
            }
        }
    }
    Ok(d)
}

/// Radial unit vector times `g^ij` times radial unit vector.
fn radial_inverse_metric(mp: &MetricPoint) -> f64 {
    let p = &mp.point;
    let r = (p[1] * p[1] + p[2] * p[2] + p[3] * p[3]).sqrt();
    let mut s = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            s += p[i + 1] * p[j + 1] * mp.g_up[i + 1][j + 1].v;
        }
    }
    s / (r * r)
}

/// Velocity and force operators of the particle block of `h_fw` (or of a
/// scalar Hamiltonian). `hbar` scales every commutator.
pub fn quantum_eom(h_fw: &GridOperator, metric: &Metric, hbar: f64) -> Result<EomOperators> {
    if !(hbar > 0.0) {
        return Err(Error::Config(format!("hbar must be positive, got {hbar}")));
    }
    let h = match h_fw.components {
        Components::Scalar => h_fw.clone(),
        Components::TwoComponent => h_fw.block(0, 0)?,
    };
    let grid = h.grid.clone();
    if grid.dim() != h.dim() {
        return Err(Error::DimensionMismatch(format!("operator {} vs grid {}", h.dim(), grid.dim())));
    }
    let op = |m: DMatrix<f64>| GridOperator::real(m, grid.clone());
    let mut velocity = Vec::new();
    let mut force = Vec::new();
    for axis in 0..grid.axes() {
        let x = op(DMatrix::from_diagonal(&grid.positions(axis)?));
        velocity.push(h.commutator(&x)?.scale(0.0, 1.0 / hbar));

        // p_j = i d_j (covariant), so {g^ij, p_j} = {-g^ij, -i D_j}
        let momentum = match &grid {
            GridSpec::Sector(_) => {
                let g_rr = multiplier(metric, &grid, Depth::Values, |mp| -radial_inverse_metric(mp))?;
                op(g_rr).anticommutator(&op(central_difference(&grid, 0)?).scale(0.0, -1.0))?
            }
            GridSpec::Cartesian(_) => {
                let mut acc = GridOperator::zeros(grid.clone());
                for j in 0..3 {
                    let g_ij = multiplier(metric, &grid, Depth::Values, |mp| -mp.g_up[axis + 1][j + 1].v)?;
                    let p_j = op(central_difference(&grid, j)?).scale(0.0, -1.0);
                    acc = acc.add(&op(g_ij).anticommutator(&p_j)?)?;
                }
                // p_0 acts as the Hamiltonian on stationary states
                let g_0i = multiplier(metric, &grid, Depth::Values, |mp| mp.g_up[0][axis + 1].v)?;
                if g_0i.iter().any(|v| *v != 0.0) {
                    acc = acc.add(&op(g_0i).anticommutator(&h)?)?;
                }
                acc
            }
        };
        force.push(h.commutator(&momentum)?.scale(0.0, 0.5 / hbar));
    }
    Ok(EomOperators { velocity, force })
}

/// Complex grid function `re + i im`.
#[derive(Debug, Clone)]
pub struct Packet {
    pub re: DVector<f64>,
    pub im: DVector<f64>,
}

/// Gaussian `exp(-|x - x0|^2 / (4 width^2) + i p0 . x)` with unit Euclidean
/// norm; on sector grids it lives in the lowest `l` of the block.
pub fn gaussian_packet(grid: &GridSpec, center: &[f64], width: f64, momentum: &[f64]) -> Result<Packet> {
    let axes = grid.axes();
    if center.len() != axes || momentum.len() != axes {
        return Err(Error::DimensionMismatch(format!("packet needs {axes} coordinates")));
    }
    let pos: Vec<DVector<f64>> = (0..axes).map(|a| grid.positions(a)).collect::<Result<_>>()?;
    let dim = grid.dim();
    let mut re = DVector::zeros(dim);
    let mut im = DVector::zeros(dim);
    let limit = match grid {
        GridSpec::Sector(s) => s.n,
        GridSpec::Cartesian(_) => dim,
    };
    for i in 0..limit {
        let mut d2 = 0.0;
        let mut phase = 0.0;
        for a in 0..axes {
            d2 += (pos[a][i] - center[a]).powi(2);
            phase += momentum[a] * pos[a][i];
        }
        let amp = (-d2 / (4.0 * width * width)).exp();
        re[i] = amp * phase.cos();
        im[i] = amp * phase.sin();
    }
    let norm = (re.norm_squared() + im.norm_squared()).sqrt();
    if norm == 0.0 {
        return Err(Error::Config("packet vanishes on the grid".into()));
    }
    Ok(Packet { re: re / norm, im: im / norm })
}

/// `Re <psi|O|psi> / <psi|psi>`.
pub fn expectation(op: &GridOperator, psi: &Packet) -> f64 {
    let (a, b) = (&psi.re, &psi.im);
    let mut v = a.dot(&(&op.re * a)) + b.dot(&(&op.re * b));
    if let Some(m) = &op.im {
        v += b.dot(&(m * a)) - a.dot(&(m * b));
    }
    v / (a.norm_squared() + b.norm_squared())
}
