use nalgebra::Matrix4;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::expr::{parse, Expr, Params};
use crate::metric::KerrOrder;

/// Curvature from metric values alone: fourth-order central differences for
/// the metric derivatives, then again for the connection.
mod oracle {
    use super::*;

    const STENCIL: [(f64, f64); 4] = [(-2.0, 1.0 / 12.0), (-1.0, -8.0 / 12.0), (1.0, 8.0 / 12.0), (2.0, -1.0 / 12.0)];

    fn shifted(p: &[f64; 4], c: usize, d: f64) -> [f64; 4] {
        let mut q = *p;
        q[c] += d;
        q
    }

    fn g(m: &Metric, p: &[f64; 4]) -> Matrix4<f64> {
        let v = m.values(p).unwrap();
        Matrix4::from_fn(|a, b| v[a][b])
    }

    pub fn connection(m: &Metric, p: &[f64; 4], h: f64) -> Christoffel {
        let gi = g(m, p).try_inverse().unwrap();
        let dg: [Matrix4<f64>; 4] = std::array::from_fn(|c| {
            STENCIL.iter().fold(Matrix4::zeros(), |acc, &(k, w)| acc + g(m, &shifted(p, c, k * h)) * (w / h))
        });
        let mut out = [[[0.0; 4]; 4]; 4];
        for a in 0..4 {
            for mu in 0..4 {
                for nu in 0..4 {
                    let mut s = 0.0;
                    for b in 0..4 {
                        s += 0.5 * gi[(a, b)] * (dg[mu][(b, nu)] + dg[nu][(b, mu)] - dg[b][(mu, nu)]);
                    }
                    out[a][mu][nu] = s;
                }
            }
        }
        out
    }

    pub fn scalar(m: &Metric, p: &[f64; 4], h_outer: f64, h_inner: f64) -> f64 {
        let gam = connection(m, p, h_inner);
        let d: [Christoffel; 4] = std::array::from_fn(|c| {
            let mut acc = [[[0.0; 4]; 4]; 4];
            for &(k, w) in &STENCIL {
                let gk = connection(m, &shifted(p, c, k * h_outer), h_inner);
                for a in 0..4 {
                    for mu in 0..4 {
                        for nu in 0..4 {
                            acc[a][mu][nu] += gk[a][mu][nu] * w / h_outer;
                        }
                    }
                }
            }
            acc
        });
        let gi = g(m, p).try_inverse().unwrap();
        let mut r = 0.0;
        for mu in 0..4 {
            for nu in 0..4 {
                let mut ric = 0.0;
                for a in 0..4 {
                    ric += d[a][a][mu][nu] - d[nu][a][mu][a];
                    for k in 0..4 {
                        ric += gam[a][a][k] * gam[k][mu][nu] - gam[a][nu][k] * gam[k][mu][a];
                    }
                }
                r += gi[(mu, nu)] * ric;
            }
        }
        r
    }
}

fn random_point(rng: &mut ChaCha8Rng, r_lo: f64, r_hi: f64) -> [f64; 4] {
    loop {
        let p: [f64; 3] = std::array::from_fn(|_| rng.random_range(-r_hi..r_hi));
        let r = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
        if r >= r_lo && r <= r_hi {
            return [rng.random_range(-1.0..1.0), p[0], p[1], p[2]];
        }
    }
}

/// `g_xx = g_yy = -1/s^2` with `s = 1 + (x^2 + y^2)/(4 a^2)`: a round 2-sphere
/// of radius `a` in stereographic coordinates, times a flat `t, z`.
fn sphere_slice(a: f64) -> Metric {
    let s = parse(&format!("(1 + (x^2 + y^2)/(4*{}))^(-2)", a * a)).unwrap();
    let mut comps: [Expr; 10] = std::array::from_fn(|_| Expr::zero());
    comps[0] = Expr::one();
    comps[4] = -s.clone();
    comps[7] = -s;
    comps[9] = -Expr::one();
    Metric::custom(comps, Params::new())
}

// Computed once by the finite-difference oracle at (0, 0.3, -0.2, 0.1) with a = 1.5.
const SPHERE_SLICE_R: f64 = -0.888888888889;

#[test]
fn minkowski_is_flat() {
    let cp = CurvaturePoint::at(&Metric::minkowski(), &[0.1, 0.5, -1.0, 2.0]).unwrap();
    assert!(cp.christoffel.iter().flatten().flatten().all(|&v| v == 0.0));
    assert_eq!(cp.riemann_scale(), 0.0);
    assert_eq!(cp.scalar, 0.0);
}

#[test]
fn uniform_field_connection() {
    let m = Metric::static_diagonal(parse("1 + z").unwrap(), Expr::one(), Params::new()).unwrap();
    let g = christoffel(&m, &[0.0, 0.3, 0.7, 0.0]).unwrap();
    assert!((g[3][0][0] - 1.0).abs() < 1e-15);
    assert!((g[0][0][3] - 1.0).abs() < 1e-15);
    let g = christoffel(&m, &[0.0, 0.0, 0.0, 0.5]).unwrap();
    assert!((g[3][0][0] - 1.5).abs() < 1e-15);
}

#[test]
fn connection_matches_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let m = Metric::custom(
        [
            parse("1 + 0.2*x*y + 0.1*sin(z)").unwrap(),
            Expr::zero(),
            Expr::zero(),
            Expr::zero(),
            parse("-(1 + 0.3*exp(-r^2))").unwrap(),
            Expr::zero(),
            Expr::zero(),
            parse("-(1 + 0.1*x^2)").unwrap(),
            Expr::zero(),
            parse("-(2 + cos(0.5*y))").unwrap(),
        ],
        Params::new(),
    );
    for _ in 0..20 {
        let p = random_point(&mut rng, 0.2, 1.5);
        let exact = christoffel(&m, &p).unwrap();
        let fd = oracle::connection(&m, &p, 1e-5);
        for (e, f) in exact.iter().flatten().flatten().zip(fd.iter().flatten().flatten()) {
            assert!((e - f).abs() < 1e-7);
        }
    }
}

#[test]
fn accelerated_rotating_frame_is_flat() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let m = Metric::noninertial([0.05, -0.02, 0.08], [0.03, 0.06, -0.04]);
    for _ in 0..100 {
        let p = random_point(&mut rng, 0.0, 3.0);
        let cp = CurvaturePoint::at(&m, &p).unwrap();
        assert!(cp.scalar.abs() <= 1e-9, "{}", cp.scalar);
        assert!(cp.riemann_scale() <= 1e-9);
    }
}

#[test]
fn isotropic_schwarzschild_is_vacuum() {
    let mu = 1.0;
    let m = Metric::kerr(mu, 0.0, KerrOrder::Full).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..100 {
        let p = random_point(&mut rng, 3.0 * mu, 100.0 * mu);
        let r = ricci_scalar(&m, &p).unwrap();
        assert!(r.abs() <= 1e-8, "{r}");
    }
    // the oracle agrees independently
    let p = [0.0, 2.0, -1.5, 2.5];
    assert!(oracle::scalar(&m, &p, 1e-2, 1e-3).abs() < 1e-7);
    // and confirms the vacuum is not trivially flat
    let cp = CurvaturePoint::at(&m, &p).unwrap();
    assert!(cp.riemann_scale() > 1e-3);
}

#[test]
fn conformally_flat_matches_oracle() {
    let eps = 0.05;
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    // a linear factor is harmonic, so R vanishes identically
    let linear = Metric::minkowski().conformal(&parse(&format!("1/(1 + {eps}*x)")).unwrap()).unwrap();
    for _ in 0..10 {
        let p = random_point(&mut rng, 0.1, 2.0);
        let exact = ricci_scalar(&linear, &p).unwrap();
        let fd = oracle::scalar(&linear, &p, 1e-2, 1e-3);
        assert!(exact.abs() < 1e-13 && fd.abs() < 1e-8, "{exact} vs {fd}");
    }
    let curved = Metric::minkowski()
        .conformal(&parse(&format!("1/(1 + {eps}*x^2 + {eps}*x*y)")).unwrap())
        .unwrap();
    for _ in 0..10 {
        let p = random_point(&mut rng, 0.1, 2.0);
        let exact = ricci_scalar(&curved, &p).unwrap();
        let fd = oracle::scalar(&curved, &p, 1e-2, 1e-3);
        assert!(exact.abs() > 1e-3);
        assert!(((exact - fd) / exact).abs() < 1e-5, "{exact} vs {fd}");
    }
}

#[test]
fn static_lapse_sign() {
    // V^2 dt^2 - dx^2 gives R = 2 lap(V) / V
    let m = Metric::static_diagonal(parse("1 + 0.1*x^2").unwrap(), Expr::one(), Params::new()).unwrap();
    let p = [0.0, 0.5, 0.0, 0.0];
    let r = ricci_scalar(&m, &p).unwrap();
    assert!((r - 2.0 * 0.2 / 1.025).abs() < 1e-14);
}

#[test]
fn sphere_slice_fixture() {
    let a = 1.5;
    let m = sphere_slice(a);
    let p = [0.0, 0.3, -0.2, 0.1];
    let fd = oracle::scalar(&m, &p, 1e-2, 1e-3);
    assert!((fd - SPHERE_SLICE_R).abs() < 1e-8, "{fd}");
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..20 {
        let q = random_point(&mut rng, 0.0, 2.0);
        let r = ricci_scalar(&m, &q).unwrap();
        assert!((r - SPHERE_SLICE_R).abs() < 1e-10, "{r}");
    }
}

#[test]
fn rescaling_invariance() {
    let m = |mu: f64| {
        let mut params = Params::new();
        params.insert("mu".into(), mu);
        Metric::static_diagonal(
            parse("1 - mu/sqrt(r^2 + mu^2)").unwrap(),
            parse("1 + mu^2/(r^2 + 4*mu^2)").unwrap(),
            params,
        )
        .unwrap()
    };
    let base = m(1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for lambda in [0.5, 3.0, 17.0] {
        let scaled = m(lambda);
        for _ in 0..10 {
            let p = random_point(&mut rng, 0.3, 4.0);
            let q = p.map(|c| c * lambda);
            let r0 = ricci_scalar(&base, &p).unwrap();
            let r1 = ricci_scalar(&scaled, &q).unwrap() * lambda * lambda;
            assert!(((r1 - r0) / r0).abs() <= 1e-9, "{r0} vs {r1}");
        }
    }
}

#[test]
fn riemann_symmetries_hold() {
    let families = vec![
        Metric::lense_thirring(1.0, 2.0).unwrap(),
        Metric::kerr(1.0, 0.7, KerrOrder::Full).unwrap(),
        Metric::noninertial([0.02, 0.0, -0.05], [0.0, 0.04, 0.01]),
        Metric::rotating_isotropic(
            parse("1 + 0.1*exp(-r^2/4)").unwrap(),
            parse("1 + 0.2/(1 + r^2)").unwrap(),
            [Expr::zero(), parse("0.02*z").unwrap(), parse("0.05/(1 + r^2)").unwrap()],
            Params::new(),
        )
        .unwrap(),
        sphere_slice(2.0),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for m in &families {
        for _ in 0..100 {
            let p = random_point(&mut rng, 2.5, 6.0);
            let cp = CurvaturePoint::at(m, &p).unwrap();
            assert!(cp.antisymmetry_defect() <= 1e-10);
            assert!(cp.bianchi_defect() <= 1e-10, "{:?}: {}", m.family(), cp.bianchi_defect());
            for a in 0..4 {
                for i in 0..4 {
                    for j in 0..4 {
                        assert_eq!(cp.christoffel[a][i][j], cp.christoffel[a][j][i]);
                    }
                }
            }
        }
    }
}

#[test]
fn rigidly_rotating_flat_space() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for omega in [[0.0, 0.0, 0.3], [0.1, -0.2, 0.05]] {
        let m = Metric::rotating_isotropic(Expr::one(), Expr::one(), omega.map(Expr::constant), Params::new()).unwrap();
        for _ in 0..50 {
            let p = random_point(&mut rng, 0.0, 2.0);
            assert!(ricci_scalar(&m, &p).unwrap().abs() <= 1e-9);
        }
    }
}
