//! Levi-Civita connection and curvature at a point.
//!
//! `R^a_{mbn} = d_b G^a_{mn} - d_n G^a_{mb} + G^a_{bk} G^k_{mn} - G^a_{nk} G^k_{mb}`,
//! `R_{mn} = R^a_{man}` and `R = g^{mn} R_{mn}`. With signature `(+,-,-,-)`
//! a static metric `V^2 dt^2 - dx^2` has `R = 2 lap(V) / V`.

use crate::error::Result;
use crate::expr::{Jet1, Scalar};
use crate::metric::{Depth, Metric, MetricPoint};

pub type Christoffel = [[[f64; 4]; 4]; 4];
pub type Riemann = [[[[f64; 4]; 4]; 4]; 4];

#[derive(Debug, Clone)]
pub struct CurvaturePoint {
    /// `christoffel[a][m][n] = G^a_{mn}`.
    pub christoffel: Christoffel,
    /// `riemann[a][m][b][n] = R^a_{mbn}`.
    pub riemann: Riemann,
    pub ricci: [[f64; 4]; 4],
    pub scalar: f64,
}

/// `G^a_{mn} = 1/2 g^{ab} (d_m g_{bn} + d_n g_{bm} - d_b g_{mn})` from the
/// inverse metric and `dg[c][m][n] = d_c g_{mn}`.
pub fn christoffel_from<S: Scalar>(g_up: &[[S; 4]; 4], dg: &[[[S; 4]; 4]; 4]) -> [[[S; 4]; 4]; 4] {
    // lowered symbols first: G_{bmn}
    let lowered: [[[S; 4]; 4]; 4] = std::array::from_fn(|b| {
        std::array::from_fn(|m| std::array::from_fn(|n| (dg[m][b][n] + dg[n][b][m] - dg[b][m][n]).scale(0.5)))
    });
    std::array::from_fn(|a| {
        std::array::from_fn(|m| {
            std::array::from_fn(|n| {
                let mut s = S::constant(0.0);
                for b in 0..4 {
                    s = s + g_up[a][b] * lowered[b][m][n];
                }
                s
            })
        })
    })
}

pub fn christoffel(metric: &Metric, point: &[f64; 4]) -> Result<Christoffel> {
    let mp = metric.at_point(point, Depth::First)?;
    let g_up = std::array::from_fn(|a| std::array::from_fn(|b| mp.g_up[a][b].v));
    let dg = std::array::from_fn(|c| std::array::from_fn(|m| std::array::from_fn(|n| mp.g_lo[m][n].g[c])));
    Ok(christoffel_from::<f64>(&g_up, &dg))
}

impl CurvaturePoint {
    pub fn at(metric: &Metric, point: &[f64; 4]) -> Result<Self> {
        Ok(Self::from_point(&metric.at_point(point, Depth::Second)?))
    }

    /// Curvature from metric data carried to second depth.
    pub fn from_point(mp: &MetricPoint) -> Self {
        debug_assert_eq!(mp.depth, Depth::Second);
        // the connection with jet inputs carries its own gradient
        let g_up: [[Jet1; 4]; 4] = std::array::from_fn(|a| std::array::from_fn(|b| mp.g_up[a][b].to_jet1()));
        let dg: [[[Jet1; 4]; 4]; 4] = std::array::from_fn(|c| {
            std::array::from_fn(|m| std::array::from_fn(|n| mp.g_lo[m][n].partial(c)))
        });
        let gamma_jet = christoffel_from(&g_up, &dg);
        let christoffel: Christoffel =
            std::array::from_fn(|a| std::array::from_fn(|m| std::array::from_fn(|n| gamma_jet[a][m][n].v)));
        let d_gamma = |b: usize, a: usize, m: usize, n: usize| gamma_jet[a][m][n].g[b];

        let mut riemann = [[[[0.0; 4]; 4]; 4]; 4];
        for a in 0..4 {
            for m in 0..4 {
                for b in 0..4 {
                    for n in 0..4 {
                        let mut v = d_gamma(b, a, m, n) - d_gamma(n, a, m, b);
                        for k in 0..4 {
                            v += christoffel[a][b][k] * christoffel[k][m][n]
                                - christoffel[a][n][k] * christoffel[k][m][b];
                        }
                        riemann[a][m][b][n] = v;
                    }
                }
            }
        }
        let ricci: [[f64; 4]; 4] =
            std::array::from_fn(|m| std::array::from_fn(|n| (0..4).map(|a| riemann[a][m][a][n]).sum()));
        let mut scalar = 0.0;
        for m in 0..4 {
            for n in 0..4 {
                scalar += mp.g_up[m][n].v * ricci[m][n];
            }
        }
        Self { christoffel, riemann, ricci, scalar }
    }

    /// Largest `|R^a_{mbn} + R^a_{mnb}|`.
    pub fn antisymmetry_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for a in 0..4 {
            for m in 0..4 {
                for b in 0..4 {
                    for n in 0..4 {
                        worst = worst.max((self.riemann[a][m][b][n] + self.riemann[a][m][n][b]).abs());
                    }
                }
            }
        }
        worst
    }

    /// Largest `|R^a_{mbn} + R^a_{bnm} + R^a_{nmb}|`.
    pub fn bianchi_defect(&self) -> f64 {
        let r = &self.riemann;
        let mut worst = 0.0f64;
        for a in 0..4 {
            for m in 0..4 {
                for b in 0..4 {
                    for n in 0..4 {
                        worst = worst.max((r[a][m][b][n] + r[a][b][n][m] + r[a][n][m][b]).abs());
                    }
                }
            }
        }
        worst
    }

    /// Largest Riemann component, for scaling the defects.
    pub fn riemann_scale(&self) -> f64 {
        self.riemann.iter().flatten().flatten().flatten().fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

pub fn ricci_scalar(metric: &Metric, point: &[f64; 4]) -> Result<f64> {
    Ok(CurvaturePoint::at(metric, point)?.scalar)
}

#[cfg(test)]
mod tests;
