//! Assembly of `T'` and `Upsilon'`.
//!
//! The generic route works from metric jets alone:
//!
//! `T' = d_i (G^ij/g^00) d_j + (m^2 - lambda R)/g^00 + P_grad`
//!
//! where `P_grad` collects the gradient terms of `f`, `Gamma^i` and the shift
//! `k^i = g^0i/g^00`. On sector grids the leading term enters through its
//! quadratic form `int c |grad psi|^2` with `c = -G^ii/g^00`, evaluated at
//! interval midpoints; everything else is sampled at the nodes and projected
//! onto the angular block by Gauss-Legendre quadrature.
//!
//! The closed routes take `V`, `W` and `Omega_z` as functions of `r` and
//! build `m^2 V^2 + F p^2 F - |grad F|^2/4 + D_lambda` with `F = V/W`.

use nalgebra::DMatrix;

use super::grid::{CartesianGrid, GridOperator, GridSpec, SectorGrid};
use super::quadrature::{gauss_legendre, normalized_legendre};
use super::Coupling;
use crate::curvature::CurvaturePoint;
use crate::error::{Error, Result};
use crate::expr::{Expr, Jet2, Params, Scalar};
use crate::metric::{Depth, Metric, MetricPoint};

/// Relative tolerance of the structural checks (isotropy, azimuthal shift,
/// axial symmetry).
const STRUCTURE_TOL: f64 = 1e-9;
/// Relative asymmetry accepted before symmetrizing an assembled matrix.
const SYMMETRY_TOL: f64 = 1e-12;

pub(crate) fn sector_point(r: f64, x: f64, phi: f64) -> [f64; 4] {
    let s = (1.0 - x * x).sqrt();
    [0.0, r * s * phi.cos(), r * s * phi.sin(), r * x]
}

/// Angular basis of a sector block sampled at the quadrature nodes.
pub(crate) struct Angular {
    pub x: Vec<f64>,
    w: Vec<f64>,
    m: f64,
    /// `val[q][a]`, `a` indexing `l..=l_max`.
    val: Vec<Vec<f64>>,
    dval: Vec<Vec<f64>>,
}

impl Angular {
    pub fn new(s: &SectorGrid) -> Self {
        let m = s.m_z.unsigned_abs() as usize;
        let (x, w) = gauss_legendre(s.l_max + 16);
        let mut val = Vec::with_capacity(x.len());
        let mut dval = Vec::with_capacity(x.len());
        for &xq in &x {
            let (v, d) = normalized_legendre(m, s.l_max, xq);
            val.push(v[s.l - m..].to_vec());
            dval.push(d[s.l - m..].to_vec());
        }
        Self { x, w, m: m as f64, val, dval }
    }

    fn n_l(&self) -> usize {
        self.val[0].len()
    }

    /// `<a| f |b>` for a function sampled at the quadrature nodes.
    pub fn project(&self, f: &[f64]) -> DMatrix<f64> {
        let n = self.n_l();
        DMatrix::from_fn(n, n, |a, b| {
            (0..self.x.len()).map(|q| self.w[q] * f[q] * self.val[q][a] * self.val[q][b]).sum()
        })
    }

    /// `<grad_a| f |grad_b>` on the unit sphere.
    pub fn project_angular_gradient(&self, f: &[f64]) -> DMatrix<f64> {
        let n = self.n_l();
        let m2 = self.m * self.m;
        DMatrix::from_fn(n, n, |a, b| {
            (0..self.x.len())
                .map(|q| {
                    let sin2 = 1.0 - self.x[q] * self.x[q];
                    self.w[q]
                        * f[q]
                        * (self.dval[q][a] * self.dval[q][b] + m2 * self.val[q][a] * self.val[q][b] / sin2)
                })
                .sum()
        })
    }
}

/// Isotropic kinetic coefficient `c` with `G^ij / g^00 = -c delta^ij`.
fn kinetic_coefficient(mp: &MetricPoint) -> Result<f64> {
    let g00 = mp.g_up[0][0].v;
    let a = |i: usize, j: usize| mp.g_spatial_up[i][j].v / g00;
    let c = -(a(0, 0) + a(1, 1) + a(2, 2)) / 3.0;
    let mut off = 0.0f64;
    for i in 0..3 {
        for j in 0..3 {
            let expected = if i == j { -c } else { 0.0 };
            off = off.max((a(i, j) - expected).abs());
        }
    }
    if off > STRUCTURE_TOL * c.abs() {
        return Err(Error::UnsupportedGrid(format!(
            "kinetic tensor G^ij/g^00 is not isotropic at {:?} (deviation {off:e}); use a cartesian grid",
            mp.point
        )));
    }
    Ok(c)
}

/// Angular velocity of an azimuthal shift `k = Omega z x r`.
fn azimuthal_rate(mp: &MetricPoint) -> Result<f64> {
    let p = &mp.point;
    let k: [f64; 3] = std::array::from_fn(|i| mp.shift[i].v);
    let knorm = (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]).sqrt();
    if knorm == 0.0 {
        return Ok(0.0);
    }
    let rho2 = p[1] * p[1] + p[2] * p[2];
    let omega = (p[1] * k[1] - p[2] * k[0]) / rho2;
    let resid = ((k[0] + omega * p[2]).powi(2) + (k[1] - omega * p[1]).powi(2) + k[2] * k[2]).sqrt();
    if resid > STRUCTURE_TOL * knorm + 1e-14 {
        return Err(Error::UnsupportedGrid(format!(
            "shift g^0i/g^00 at {p:?} is not an azimuthal rotation about z; use a cartesian grid"
        )));
    }
    Ok(omega)
}

/// Every term of `T'` except the leading derivative term, at one point.
pub(crate) fn generic_potential(mp: &MetricPoint, coupling: &Coupling) -> f64 {
    let g00 = mp.g_up[0][0].v;
    let r = CurvaturePoint::from_point(mp).scalar;
    let lambda = coupling.lambda.to_f64();
    let mut p = (coupling.mass * coupling.mass - lambda * r) / g00;

    let f = mp.f.v;
    let inv_f = mp.f.recip();
    let mut t1 = 0.0;
    let mut t2 = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            let weighted = mp.sqrt_neg_g * mp.g_spatial_up[i][j];
            t1 += weighted.g[i + 1] * inv_f.g[j + 1];
            t2 += mp.g_spatial_up[i][j].v * inv_f.hess(i + 1, j + 1);
        }
    }
    p += t1 / f + (mp.sqrt_neg_g.v / g00).sqrt() * t2;

    let div_gamma: f64 = (0..3).map(|j| mp.gamma[j].g[j + 1]).sum();
    let grad_div_gamma: [f64; 3] = std::array::from_fn(|i| (0..3).map(|j| mp.gamma[j].hess(i + 1, j + 1)).sum());
    let div_shift: f64 = (0..3).map(|i| mp.shift[i].g[i + 1]).sum();
    let shift_grad: f64 = (0..3).map(|i| mp.shift[i].v * grad_div_gamma[i]).sum();
    let f2 = f * f;
    p + div_gamma * div_gamma / (4.0 * f2 * f2) - div_shift * div_gamma / (2.0 * f2) - shift_grad / (2.0 * f2)
}

fn symmetrized(t: DMatrix<f64>) -> Result<DMatrix<f64>> {
    let asym = (&t - t.transpose()).norm();
    let norm = t.norm();
    if asym > SYMMETRY_TOL * norm {
        return Err(Error::NonSymmetricAssembly(asym / norm));
    }
    Ok((&t + t.transpose()) * 0.5)
}

/// Adds the midpoint energy `int c (u' - u/r)^2` of one interval to `t`.
fn add_interval(t: &mut DMatrix<f64>, s: &SectorGrid, m: usize, cmat: &DMatrix<f64>) {
    let h = s.h();
    let rm = s.r_min + (m as f64 + 0.5) * h;
    let alpha = 1.0 / h - 0.5 / rm;
    let beta = -1.0 / h - 0.5 / rm;
    let n = s.n;
    let left = (m >= 1).then_some(m);
    let right = (m < n).then_some(m + 1);
    for a in 0..s.n_l() {
        for b in 0..s.n_l() {
            let c = cmat[(a, b)];
            if let Some(k) = left {
                t[(s.index(a, k), s.index(b, k))] += beta * beta * c;
            }
            if let Some(k) = right {
                t[(s.index(a, k), s.index(b, k))] += alpha * alpha * c;
            }
            if let (Some(kl), Some(kr)) = (left, right) {
                t[(s.index(a, kr), s.index(b, kl))] += alpha * beta * c;
                t[(s.index(a, kl), s.index(b, kr))] += alpha * beta * c;
            }
        }
    }
}

fn add_node_block(t: &mut DMatrix<f64>, s: &SectorGrid, k: usize, block: &DMatrix<f64>) {
    for a in 0..s.n_l() {
        for b in 0..s.n_l() {
            t[(s.index(a, k), s.index(b, k))] += block[(a, b)];
        }
    }
}

struct NodeSample {
    c: f64,
    p: f64,
    omega: f64,
}

fn sample_node(metric: &Metric, coupling: &Coupling, point: [f64; 4]) -> Result<NodeSample> {
    let mp = metric.at_point(&point, Depth::Second)?;
    Ok(NodeSample { c: kinetic_coefficient(&mp)?, p: generic_potential(&mp, coupling), omega: azimuthal_rate(&mp)? })
}

fn close(a: f64, b: f64, scale: f64) -> bool {
    (a - b).abs() <= STRUCTURE_TOL * scale.max(a.abs()).max(b.abs()) + 1e-13
}

/// Compares samples in the `x-z` plane with those in the `y-z` plane.
fn check_axial_symmetry(metric: &Metric, coupling: &Coupling, s: &SectorGrid, ang: &Angular) -> Result<()> {
    for k in [1, s.n.div_ceil(2), s.n] {
        let r = s.r(k);
        for &x in &ang.x {
            let a = sample_node(metric, coupling, sector_point(r, x, 0.0))?;
            let b = sample_node(metric, coupling, sector_point(r, x, std::f64::consts::FRAC_PI_2))?;
            let pscale = a.p.abs().max(coupling.mass * coupling.mass).max(1e-8);
            if !(close(a.c, b.c, 1.0) && close(a.p, b.p, pscale) && close(a.omega, b.omega, a.omega.abs())) {
                return Err(Error::UnsupportedGrid(format!(
                    "metric is not axially symmetric about z near r = {r}; use a cartesian grid"
                )));
            }
        }
    }
    Ok(())
}

fn sector_generic(metric: &Metric, coupling: &Coupling, s: &SectorGrid, grid: &GridSpec) -> Result<GridOperator> {
    let ang = Angular::new(s);
    let dim = s.dim();
    let mut t = DMatrix::zeros(dim, dim);
    for m in 0..=s.n {
        let rm = s.r_min + (m as f64 + 0.5) * s.h();
        let c: Vec<f64> = ang
            .x
            .iter()
            .map(|&x| kinetic_coefficient(&metric.at_point(&sector_point(rm, x, 0.0), Depth::Values)?))
            .collect::<Result<_>>()?;
        add_interval(&mut t, s, m, &ang.project(&c));
    }
    for k in 1..=s.n {
        let r = s.r(k);
        let samples: Vec<NodeSample> = ang
            .x
            .iter()
            .map(|&x| sample_node(metric, coupling, sector_point(r, x, 0.0)))
            .collect::<Result<_>>()?;
        let c: Vec<f64> = samples.iter().map(|q| q.c).collect();
        let p: Vec<f64> = samples.iter().map(|q| q.p).collect();
        let block = ang.project_angular_gradient(&c) / (r * r) + ang.project(&p);
        add_node_block(&mut t, s, k, &block);
    }
    check_axial_symmetry(metric, coupling, s, &ang)?;
    Ok(GridOperator::real(symmetrized(t)?, grid.clone()))
}

/// Values of a function on the `(n+2)^3` Cartesian lattice including faces.
struct Lattice<T> {
    n2: usize,
    data: Vec<T>,
}

impl<T: Copy> Lattice<T> {
    fn build(c: &CartesianGrid, mut f: impl FnMut([f64; 4]) -> Result<T>) -> Result<Self> {
        let n2 = c.n + 2;
        let mut data = Vec::with_capacity(n2 * n2 * n2);
        for i in 0..n2 {
            for j in 0..n2 {
                for k in 0..n2 {
                    data.push(f([0.0, c.coord(0, i), c.coord(1, j), c.coord(2, k)])?);
                }
            }
        }
        Ok(Self { n2, data })
    }

    fn at(&self, ijk: [usize; 3]) -> T {
        self.data[(ijk[0] * self.n2 + ijk[1]) * self.n2 + ijk[2]]
    }
}

fn step(ijk: [usize; 3], axis: usize, up: bool) -> [usize; 3] {
    let mut out = ijk;
    if up {
        out[axis] += 1;
    } else {
        out[axis] -= 1;
    }
    out
}

fn is_interior(c: &CartesianGrid, ijk: [usize; 3]) -> bool {
    ijk.iter().all(|&v| v >= 1 && v <= c.n)
}

fn cartesian_generic(metric: &Metric, coupling: &Coupling, c: &CartesianGrid, grid: &GridSpec) -> Result<GridOperator> {
    let h = c.h();
    let kinetic = Lattice::build(c, |p| {
        let mp = metric.at_point(&p, Depth::Values)?;
        let g00 = mp.g_up[0][0].v;
        Ok::<[[f64; 3]; 3], Error>(std::array::from_fn(|i| std::array::from_fn(|j| mp.g_spatial_up[i][j].v / g00)))
    })?;
    let dim = c.dim();
    let mut t = DMatrix::zeros(dim, dim);
    for ijk in c.interior() {
        let row = c.index(ijk);
        let mp = metric.at_point(&c.point(ijk), Depth::Second)?;
        t[(row, row)] += generic_potential(&mp, coupling);
        let a0 = kinetic.at(ijk);
        for axis in 0..3 {
            // flux form with averaged face coefficients
            for up in [false, true] {
                let nb = step(ijk, axis, up);
                let face = 0.5 * (a0[axis][axis] + kinetic.at(nb)[axis][axis]) / (h[axis] * h[axis]);
                t[(row, row)] -= face;
                if is_interior(c, nb) {
                    t[(row, c.index(nb))] += face;
                }
            }
        }
        // D_i A^ij D_j for i != j with central differences
        for i in 0..3 {
            for si in [false, true] {
                let mid = step(ijk, i, si);
                if !is_interior(c, mid) {
                    continue;
                }
                let amid = kinetic.at(mid);
                let di = if si { 1.0 } else { -1.0 } / (2.0 * h[i]);
                for j in (0..3).filter(|&j| j != i) {
                    for sj in [false, true] {
                        let end = step(mid, j, sj);
                        if !is_interior(c, end) {
                            continue;
                        }
                        let dj = if sj { 1.0 } else { -1.0 } / (2.0 * h[j]);
                        t[(row, c.index(end))] += di * amid[i][j] * dj;
                    }
                }
            }
        }
    }
    Ok(GridOperator::real(symmetrized(t)?, grid.clone()))
}

/// `T'` from metric jets on either grid kind.
pub fn assemble_t_prime_generic(metric: &Metric, coupling: &Coupling, grid: &GridSpec) -> Result<GridOperator> {
    coupling.validate()?;
    grid.validate()?;
    match grid {
        GridSpec::Sector(s) => sector_generic(metric, coupling, s, grid),
        GridSpec::Cartesian(c) => cartesian_generic(metric, coupling, c, grid),
    }
}

/// `Upsilon' = 1/2 {d_i, g^0i/g^00}`.
///
/// On sector grids `-i Upsilon'` is multiplication by `m_z Omega(r, theta)`,
/// so the result is `i S` with `S` real symmetric. On Cartesian grids it is
/// a real skew matrix.
pub fn assemble_upsilon_prime(metric: &Metric, grid: &GridSpec) -> Result<GridOperator> {
    grid.validate()?;
    match grid {
        GridSpec::Sector(s) => {
            let ang = Angular::new(s);
            let dim = s.dim();
            let mut sm = DMatrix::zeros(dim, dim);
            for k in 1..=s.n {
                let r = s.r(k);
                let rate = |x: f64, phi: f64| azimuthal_rate(&metric.at_point(&sector_point(r, x, phi), Depth::Values)?);
                let omega: Vec<f64> = ang.x.iter().map(|&x| rate(x, 0.0)).collect::<Result<_>>()?;
                for (&x, &w) in ang.x.iter().zip(&omega) {
                    let turned = rate(x, std::f64::consts::FRAC_PI_2)?;
                    if (turned - w).abs() > STRUCTURE_TOL * w.abs().max(turned.abs()) + 1e-14 {
                        return Err(Error::UnsupportedGrid(format!(
                            "frame rotation at r = {r} depends on the azimuth; use a cartesian grid"
                        )));
                    }
                }
                add_node_block(&mut sm, s, k, &(ang.project(&omega) * s.m_z as f64));
            }
            let im = if sm.iter().all(|v| *v == 0.0) { None } else { Some(sm) };
            Ok(GridOperator { im, ..GridOperator::zeros(grid.clone()) })
        }
        GridSpec::Cartesian(c) => {
            let h = c.h();
            let shift = Lattice::build(c, |p| {
                let mp = metric.at_point(&p, Depth::Values)?;
                Ok::<[f64; 3], Error>(std::array::from_fn(|i| mp.shift[i].v))
            })?;
            let dim = c.dim();
            let mut u = DMatrix::zeros(dim, dim);
            for ijk in c.interior() {
                let row = c.index(ijk);
                for axis in 0..3 {
                    for up in [false, true] {
                        let nb = step(ijk, axis, up);
                        if is_interior(c, nb) {
                            let sign = if up { 1.0 } else { -1.0 };
                            u[(row, c.index(nb))] +=
                                sign * (shift.at(nb)[axis] + shift.at(ijk)[axis]) / (4.0 * h[axis]);
                        }
                    }
                }
            }
            Ok(GridOperator::real(u, grid.clone()))
        }
    }
}

/// Radial profile of an `r`-only function: value, first and second
/// derivative, taken along the `x` axis.
fn radial_jet(e: &Expr, r: f64) -> Result<Jet2> {
    let j: Jet2 = e.eval(&[0.0, r, 0.0, 0.0], &Params::new())?;
    let off_axis = e.value(&[0.0, 0.0, 0.0, r], &Params::new())?;
    if !close(j.v, off_axis, 1.0) {
        return Err(Error::Family(format!("closed-form assembly needs functions of r only; `{e}` is not")));
    }
    Ok(j)
}

struct RadialProfile {
    v: f64,
    f: f64,
    f1: f64,
    darwin: f64,
}

/// `F`, its derivatives and `D_lambda` at radius `r`.
fn radial_profile(v: &Expr, w: &Expr, coupling: &Coupling, r: f64) -> Result<RadialProfile> {
    let vj = radial_jet(v, r)?;
    let wj = radial_jet(w, r)?;
    let fj = vj / wj;
    let (f, f1, f2) = (fj.v, fj.g[1], fj.hess(1, 1));
    let lap_f = f2 + 2.0 * f1 / r;
    let lambda = coupling.lambda;
    let mut darwin = lambda.to_f64() * f * lap_f;
    let rest = lambda.one_minus_six();
    if !rest.is_zero() {
        let (v0, v1, v2) = (vj.v, vj.g[1], vj.hess(1, 1));
        let (w0, w1, w2) = (wj.v, wj.g[1], wj.hess(1, 1));
        darwin += rest.to_f64() * v0 / (2.0 * w0 * w0) * (f * (2.0 * w1 / r + w2) + 2.0 * v1 / r + v2);
    }
    Ok(RadialProfile { v: vj.v, f, f1, darwin })
}

fn closed_static(v: &Expr, w: &Expr, coupling: &Coupling, s: &SectorGrid) -> Result<DMatrix<f64>> {
    let h2 = s.h() * s.h();
    let prof: Vec<RadialProfile> = (0..=s.n + 1).map(|k| radial_profile(v, w, coupling, s.r(k))).collect::<Result<_>>()?;
    let dim = s.dim();
    let mut t = DMatrix::zeros(dim, dim);
    let m2 = coupling.mass * coupling.mass;
    for (a, l) in s.ls().enumerate() {
        let ll = (l * (l + 1)) as f64;
        for k in 1..=s.n {
            let r = s.r(k);
            let p = &prof[k];
            let i = s.index(a, k);
            t[(i, i)] += 2.0 * p.f * p.f / h2 + p.f * p.f * ll / (r * r) + m2 * p.v * p.v - 0.25 * p.f1 * p.f1 + p.darwin;
            if k > 1 {
                t[(i, s.index(a, k - 1))] -= p.f * prof[k - 1].f / h2;
            }
            if k < s.n {
                t[(i, s.index(a, k + 1))] -= p.f * prof[k + 1].f / h2;
            }
        }
    }
    Ok(t)
}

/// Closed form for `V^2 dt^2 - W^2 dx^2` with `V, W` functions of `r`.
pub fn assemble_t_prime_static_closed(v: &Expr, w: &Expr, coupling: &Coupling, grid: &GridSpec) -> Result<GridOperator> {
    coupling.validate()?;
    grid.validate()?;
    let s = grid.as_sector()?;
    Ok(GridOperator::real(closed_static(v, w, coupling, s)?, grid.clone()))
}

/// Closed form for the rotating isotropic family with `Omega = Omega_z(r) e_z`:
/// the static form plus `(lambda/2)(x^2 + y^2) (dOmega/dr)^2`.
pub fn assemble_t_prime_rotating_closed(
    v: &Expr,
    w: &Expr,
    omega: &[Expr; 3],
    coupling: &Coupling,
    grid: &GridSpec,
) -> Result<GridOperator> {
    coupling.validate()?;
    grid.validate()?;
    let s = grid.as_sector()?;
    if !(omega[0].is_zero() && omega[1].is_zero()) {
        return Err(Error::UnsupportedGrid("sector grids need the rotation along z".into()));
    }
    let mut t = closed_static(v, w, coupling, s)?;
    let lambda = coupling.lambda.to_f64();
    if !omega[2].is_zero() && lambda != 0.0 {
        let ang = Angular::new(s);
        let sin2: Vec<f64> = ang.x.iter().map(|x| 1.0 - x * x).collect();
        let sin2 = ang.project(&sin2);
        for k in 1..=s.n {
            let r = s.r(k);
            let d_omega = radial_jet(&omega[2], r)?.g[1];
            add_node_block(&mut t, s, k, &(&sin2 * (0.5 * lambda * r * r * d_omega * d_omega)));
        }
    }
    Ok(GridOperator::real(t, grid.clone()))
}

/// Multiplication by a pointwise function of the metric: angular-projected
/// node blocks on sector grids, diagonal on Cartesian grids.
pub(crate) fn multiplier(
    metric: &Metric,
    grid: &GridSpec,
    depth: Depth,
    f: impl Fn(&MetricPoint) -> f64,
) -> Result<DMatrix<f64>> {
    let dim = grid.dim();
    let mut out = DMatrix::zeros(dim, dim);
    match grid {
        GridSpec::Sector(s) => {
            let ang = Angular::new(s);
            for k in 1..=s.n {
                let r = s.r(k);
                let vals: Vec<f64> = ang
                    .x
                    .iter()
                    .map(|&x| Ok(f(&metric.at_point(&sector_point(r, x, 0.0), depth)?)))
                    .collect::<Result<_>>()?;
                add_node_block(&mut out, s, k, &ang.project(&vals));
            }
        }
        GridSpec::Cartesian(c) => {
            for ijk in c.interior() {
                let i = c.index(ijk);
                out[(i, i)] = f(&metric.at_point(&c.point(ijk), depth)?);
            }
        }
    }
    Ok(out)
}
