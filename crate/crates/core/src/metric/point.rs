use nalgebra::Matrix4;

use super::Metric;
use crate::error::{Error, Result};
use crate::expr::{sym_index, Jet1, Jet2, Scalar, DIM};

/// How many derivatives of the metric components to carry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Depth {
    Values,
    First,
    Second,
}

/// Metric data at one point. Every field is a [`Jet2`]; entries beyond the
/// requested [`Depth`] are zero.
#[derive(Debug, Clone)]
pub struct MetricPoint {
    pub point: [f64; 4],
    pub depth: Depth,
    pub g_lo: [[Jet2; 4]; 4],
    pub g_up: [[Jet2; 4]; 4],
    pub det: Jet2,
    pub sqrt_neg_g: Jet2,
    /// `f = sqrt(g^00 sqrt(-g))`.
    pub f: Jet2,
    /// `G^ij = g^ij - g^0i g^0j / g^00`.
    pub g_spatial_up: [[Jet2; 3]; 3],
    /// `Gamma^i = sqrt(-g) g^0i`.
    pub gamma: [Jet2; 3],
    /// `g^0i / g^00`.
    pub shift: [Jet2; 3],
}

fn trace_prod(a: &Matrix4<f64>, b: &Matrix4<f64>) -> f64 {
    let mut s = 0.0;
    for i in 0..4 {
        for j in 0..4 {
            s += a[(i, j)] * b[(j, i)];
        }
    }
    s
}

impl MetricPoint {
    pub(super) fn evaluate(metric: &Metric, point: &[f64; 4], depth: Depth) -> Result<Self> {
        let params = metric.params();
        let mut comps = [Jet2::default(); 10];
        for (k, c) in metric.components().iter().enumerate() {
            comps[k] = match depth {
                Depth::Second => c.eval::<Jet2>(point, params)?,
                Depth::First => {
                    let j: Jet1 = c.eval(point, params)?;
                    Jet2::new(j.v, j.g, [0.0; 10])
                }
                Depth::Values => Jet2::constant(c.eval::<f64>(point, params)?),
            };
        }
        Self::from_components(point, depth, &comps)
    }

    /// Builds all derived quantities from component jets (packed order).
    pub fn from_components(point: &[f64; 4], depth: Depth, comps: &[Jet2; 10]) -> Result<Self> {
        let g_lo: [[Jet2; 4]; 4] = std::array::from_fn(|m| std::array::from_fn(|n| comps[sym_index(m, n)]));
        let g = Matrix4::from_fn(|m, n| g_lo[m][n].v);
        let det_v = g.determinant();
        if det_v.abs() < 1e-14 {
            return Err(Error::SingularMetric(det_v));
        }
        if det_v >= 0.0 {
            return Err(Error::Signature(format!("det g = {det_v} >= 0 at {point:?}")));
        }
        let gi = g
            .try_inverse()
            .ok_or(Error::SingularMetric(det_v))?;
        if gi[(0, 0)] <= 0.0 {
            return Err(Error::Signature(format!("g^00 = {} <= 0 at {point:?}", gi[(0, 0)])));
        }

        let dg: [Matrix4<f64>; DIM] = std::array::from_fn(|a| Matrix4::from_fn(|m, n| g_lo[m][n].g[a]));
        // d(g^-1) = -g^-1 dg g^-1
        let gi_dg: [Matrix4<f64>; DIM] = std::array::from_fn(|a| gi * dg[a]);
        let dgi: [Matrix4<f64>; DIM] = std::array::from_fn(|a| -(gi_dg[a] * gi));

        let mut d2gi = [Matrix4::<f64>::zeros(); 10];
        let mut det_h = [0.0; 10];
        let trace_a: [f64; DIM] = std::array::from_fn(|a| gi_dg[a].trace());
        if depth == Depth::Second {
            for a in 0..DIM {
                for b in a..DIM {
                    let k = sym_index(a, b);
                    let d2g = Matrix4::from_fn(|m, n| g_lo[m][n].hess(a, b));
                    let inner = dg[a] * gi * dg[b] + dg[b] * gi * dg[a] - d2g;
                    d2gi[k] = gi * inner * gi;
                    det_h[k] = det_v
                        * (trace_a[a] * trace_a[b] + trace_prod(&gi, &d2g)
                            - trace_prod(&gi_dg[a], &gi_dg[b]));
                }
            }
        }
        let g_up: [[Jet2; 4]; 4] = std::array::from_fn(|m| {
            std::array::from_fn(|n| {
                Jet2::new(
                    gi[(m, n)],
                    std::array::from_fn(|a| dgi[a][(m, n)]),
                    std::array::from_fn(|k| d2gi[k][(m, n)]),
                )
            })
        });
        let det = Jet2::new(det_v, std::array::from_fn(|a| det_v * trace_a[a]), det_h);

        let sqrt_neg_g = (-det).sqrt();
        let f = (g_up[0][0] * sqrt_neg_g).sqrt();
        let inv_g00 = g_up[0][0].recip();
        let g_spatial_up = std::array::from_fn(|i| {
            std::array::from_fn(|j| g_up[i + 1][j + 1] - g_up[0][i + 1] * g_up[0][j + 1] * inv_g00)
        });
        let gamma = std::array::from_fn(|i| sqrt_neg_g * g_up[0][i + 1]);
        let shift = std::array::from_fn(|i| g_up[0][i + 1] * inv_g00);

        let mut mp = Self {
            point: *point,
            depth,
            g_lo,
            g_up,
            det,
            sqrt_neg_g,
            f,
            g_spatial_up,
            gamma,
            shift,
        };
        if depth != Depth::Second {
            mp.truncate_hessians();
        }
        Ok(mp)
    }

    // chain rules fill composite Hessians from gradients alone; below
    // second depth those values are meaningless
    fn truncate_hessians(&mut self) {
        let clear = |j: &mut Jet2| j.h = [0.0; 10];
        self.g_up.iter_mut().flatten().for_each(clear);
        self.g_spatial_up.iter_mut().flatten().for_each(clear);
        self.gamma.iter_mut().for_each(clear);
        self.shift.iter_mut().for_each(clear);
        clear(&mut self.det);
        clear(&mut self.sqrt_neg_g);
        clear(&mut self.f);
    }

    pub fn g_lo_values(&self) -> Matrix4<f64> {
        Matrix4::from_fn(|m, n| self.g_lo[m][n].v)
    }

    pub fn g_up_values(&self) -> Matrix4<f64> {
        Matrix4::from_fn(|m, n| self.g_up[m][n].v)
    }
}
