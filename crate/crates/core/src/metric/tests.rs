use nalgebra::Matrix4;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::expr::parse;

fn random_point(rng: &mut ChaCha8Rng, r_lo: f64, r_hi: f64) -> [f64; 4] {
    loop {
        let p: [f64; 3] = std::array::from_fn(|_| rng.random_range(-r_hi..r_hi));
        let r = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
        if r >= r_lo && r <= r_hi {
            return [rng.random_range(-1.0..1.0), p[0], p[1], p[2]];
        }
    }
}

fn families() -> Vec<Metric> {
    vec![
        Metric::minkowski(),
        Metric::static_diagonal(parse("1 - 1/r").unwrap(), parse("1 + 1/r").unwrap(), Params::new()).unwrap(),
        Metric::lense_thirring(1.0, 3.0).unwrap(),
        Metric::kerr(1.0, 0.6, KerrOrder::Full).unwrap(),
        Metric::noninertial([0.01, -0.02, 0.015], [0.02, 0.01, -0.03]),
        Metric::rotating_isotropic(
            parse("1 + 0.1*exp(-r^2/4)").unwrap(),
            parse("1 + 0.2/(1 + r^2)").unwrap(),
            [parse("0.01*x").unwrap(), Expr::zero(), parse("0.05/(1+r^2)").unwrap()],
            Params::new(),
        )
        .unwrap(),
    ]
}

#[test]
fn minkowski_point_data() {
    let mp = Metric::minkowski().at_point(&[0.3, 1.0, -2.0, 0.5], Depth::Second).unwrap();
    let expected = Matrix4::from_diagonal(&nalgebra::Vector4::new(1.0, -1.0, -1.0, -1.0));
    assert_eq!(mp.g_up_values(), expected);
    assert_eq!(mp.f.v, 1.0);
    for i in 0..3 {
        assert_eq!(mp.gamma[i].v, 0.0);
        for j in 0..3 {
            assert_eq!(mp.g_spatial_up[i][j].v, if i == j { -1.0 } else { 0.0 });
        }
    }
    assert_eq!(mp.det.v, -1.0);
}

#[test]
fn static_point_matches_direct_inversion() {
    let v = parse("1 + 0.2*x - 0.1*z^2").unwrap();
    let w = parse("1 + 0.3/(1 + r^2)").unwrap();
    let m = Metric::static_diagonal(v.clone(), w.clone(), Params::new()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..50 {
        let p = random_point(&mut rng, 0.1, 2.0);
        let mp = m.at_point(&p, Depth::Second).unwrap();
        // independent oracle: invert the numeric component matrix
        let g = Matrix4::from_fn(|a, b| m.component(a, b).value(&p, m.params()).unwrap());
        let gi = g.try_inverse().unwrap();
        let vv = v.value(&p, &Params::new()).unwrap();
        let ww = w.value(&p, &Params::new()).unwrap();
        assert!((mp.g_up[0][0].v - gi[(0, 0)]).abs() < 1e-13);
        assert!((mp.g_up[0][0].v - 1.0 / (vv * vv)).abs() < 1e-13);
        assert!((mp.sqrt_neg_g.v - vv * ww.powi(3)).abs() < 1e-12);
        let f_direct = (gi[(0, 0)] * (-g.determinant()).sqrt()).sqrt();
        assert!((mp.f.v - f_direct).abs() < 1e-13);
        assert!((mp.f.v - (ww.powi(3) / vv).sqrt()).abs() < 1e-13);
        for i in 0..3 {
            assert!((mp.g_spatial_up[i][i].v + 1.0 / (ww * ww)).abs() < 1e-13);
        }
    }
}

#[test]
fn inverse_lapse_derivative() {
    let m = Metric::static_diagonal(parse("1 + z").unwrap(), Expr::one(), Params::new()).unwrap();
    let mp = m.at_point(&[0.0, 0.4, -0.2, 0.0], Depth::Second).unwrap();
    assert!((mp.g_up[0][0].g[3] + 2.0).abs() < 1e-14);
    assert!((mp.g_up[0][0].hess(3, 3) - 6.0).abs() < 1e-13);
}

#[test]
fn inverse_is_exact_for_all_families() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for m in families() {
        for _ in 0..100 {
            let p = random_point(&mut rng, 2.0, 8.0);
            let mp = m.at_point(&p, Depth::Values).unwrap();
            let err = (mp.g_lo_values() * mp.g_up_values() - Matrix4::identity()).abs().max();
            assert!(err < 1e-12, "{:?}: {err}", m.family());
            m.check_signature(&p).unwrap();
        }
    }
}

/// Central differences of the numerically inverted metric.
fn fd_inverse(m: &Metric, p: &[f64; 4], a: usize, h: f64) -> Matrix4<f64> {
    let mut pp = *p;
    let mut pm = *p;
    pp[a] += h;
    pm[a] -= h;
    let gp = m.at_point(&pp, Depth::Values).unwrap().g_up_values();
    let gm = m.at_point(&pm, Depth::Values).unwrap().g_up_values();
    (gp - gm) / (2.0 * h)
}

#[test]
fn composite_derivatives_match_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let h = 1e-5;
    for m in families() {
        for _ in 0..10 {
            let p = random_point(&mut rng, 2.0, 6.0);
            let mp = m.at_point(&p, Depth::Second).unwrap();
            for a in 1..4 {
                let fd = fd_inverse(&m, &p, a, h);
                let exact = Matrix4::from_fn(|i, j| mp.g_up[i][j].g[a]);
                assert!((fd - exact).abs().max() < 1e-8, "{:?}", m.family());
                // second derivatives: difference the exact gradients
                let mut pp = p;
                let mut pm = p;
                pp[a] += h;
                pm[a] -= h;
                let up = m.at_point(&pp, Depth::First).unwrap();
                let dn = m.at_point(&pm, Depth::First).unwrap();
                for b in 1..4 {
                    for (i, j) in [(0, 0), (0, 2), (1, 1), (3, 2)] {
                        let fd2 = (up.g_up[i][j].g[b] - dn.g_up[i][j].g[b]) / (2.0 * h);
                        assert!((fd2 - mp.g_up[i][j].hess(a, b)).abs() < 1e-7);
                    }
                    let fd_f = (up.f.g[b] - dn.f.g[b]) / (2.0 * h);
                    assert!((fd_f - mp.f.hess(a, b)).abs() < 1e-7);
                    let fd_gamma = (up.gamma[0].g[b] - dn.gamma[0].g[b]) / (2.0 * h);
                    assert!((fd_gamma - mp.gamma[0].hess(a, b)).abs() < 1e-7);
                }
            }
        }
    }
}

#[test]
fn zero_rotation_matches_static_exactly() {
    let v = parse("1 - 0.5/r").unwrap();
    let w = parse("(1 + 0.25/r)^2").unwrap();
    let s = Metric::static_diagonal(v.clone(), w.clone(), Params::new()).unwrap();
    let r = Metric::rotating_isotropic(v, w, [Expr::zero(), Expr::zero(), Expr::zero()], Params::new()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..20 {
        let p = random_point(&mut rng, 1.0, 5.0);
        let a = s.at_point(&p, Depth::Second).unwrap();
        let b = r.at_point(&p, Depth::Second).unwrap();
        assert_eq!(a.g_up, b.g_up);
        assert_eq!(a.f, b.f);
    }
}

/// Quadratic form of the line element, expanded numerically.
fn line_element(v: f64, w: f64, k: [f64; 3], dx: [f64; 4]) -> f64 {
    let mut s = v * v * dx[0] * dx[0];
    for i in 0..3 {
        let d = dx[i + 1] - k[i] * dx[0];
        s -= w * w * d * d;
    }
    s
}

#[test]
fn rotating_components_match_line_element_expansion() {
    let v = parse("1 - 0.3/r").unwrap();
    let w = parse("1 + 0.3/r").unwrap();
    let omega = [parse("0.02").unwrap(), parse("-0.01*z").unwrap(), parse("0.4/r^3").unwrap()];
    let m = Metric::rotating_isotropic(v.clone(), w.clone(), omega.clone(), Params::new()).unwrap();
    let none = Params::new();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..50 {
        let p = random_point(&mut rng, 1.0, 4.0);
        let vv = v.value(&p, &none).unwrap();
        let ww = w.value(&p, &none).unwrap();
        let o: [f64; 3] = std::array::from_fn(|i| omega[i].value(&p, &none).unwrap());
        let r = [p[1], p[2], p[3]];
        let k = [o[1] * r[2] - o[2] * r[1], o[2] * r[0] - o[0] * r[2], o[0] * r[1] - o[1] * r[0]];
        // polarization identity recovers g_{mu nu} from the quadratic form
        let e = |i: usize| -> [f64; 4] { std::array::from_fn(|j| if j == i { 1.0 } else { 0.0 }) };
        for a in 0..4 {
            for b in 0..4 {
                let sum: [f64; 4] = std::array::from_fn(|j| e(a)[j] + e(b)[j]);
                let g_ab = if a == b {
                    line_element(vv, ww, k, e(a))
                } else {
                    0.5 * (line_element(vv, ww, k, sum) - line_element(vv, ww, k, e(a)) - line_element(vv, ww, k, e(b)))
                };
                let got = m.component(a, b).value(&p, &none).unwrap();
                assert!((got - g_ab).abs() < 1e-13, "g_{a}{b}: {got} vs {g_ab}");
            }
        }
    }
    // g_0x on the y axis with rotation about z
    let m = Metric::rotating_isotropic(Expr::one(), parse("1.5").unwrap(), [Expr::zero(), Expr::zero(), parse("0.2").unwrap()], Params::new()).unwrap();
    let g0x = m.component(0, 1).value(&[0.0, 0.0, 2.0, 0.0], &none).unwrap();
    assert!((g0x - (-2.25 * 0.2 * 2.0)).abs() < 1e-15);
}

#[test]
fn kerr_family_values() {
    let mu = 1.3;
    let parts = kerr_isotropic(mu, 0.0, KerrOrder::Full).unwrap();
    assert!(parts.is_static());
    let none = Params::new();
    let p = [0.0, 3.0 * mu, 0.0, 0.0];
    let kp = 1.0 + mu / (2.0 * 3.0 * mu);
    let km = 1.0 - mu / (2.0 * 3.0 * mu);
    assert!((parts.v.value(&p, &none).unwrap() - km / kp).abs() < 1e-15);
    assert!((parts.w.value(&p, &none).unwrap() - kp * kp).abs() < 1e-15);

    let mu = 2.0;
    let lead = kerr_isotropic(mu, mu, KerrOrder::Leading).unwrap();
    let om = lead.omega[2].value(&[0.0, 10.0 * mu, 0.0, 0.0], &none).unwrap();
    assert!((om - 0.002 / mu).abs() < 1e-15);
    let full = kerr_isotropic(mu, mu, KerrOrder::Full).unwrap();
    let p4 = [0.0, 0.0, 0.0, 4.0 * mu];
    let ratio = full.omega[2].value(&p4, &none).unwrap() / lead.omega[2].value(&p4, &none).unwrap();
    assert!((ratio - 0.578125).abs() < 1e-14);
    assert!(kerr_isotropic(0.0, 1.0, KerrOrder::Full).is_err());
}

#[test]
fn lense_thirring_values_and_kerr_agreement() {
    let none = Params::new();
    let lt = Metric::lense_thirring(0.0, 1.0).unwrap();
    let om = lt.isotropic().unwrap().omega[2].value(&[0.0, 2.0, 0.0, 0.0], &none).unwrap();
    assert_eq!(om, 0.25);
    assert_eq!(Metric::lense_thirring(1.0, 0.0).unwrap().family(), Family::LenseThirring);
    assert!(Metric::lense_thirring(1.0, 0.0).unwrap().isotropic().unwrap().is_static());

    let mu = 0.7;
    let lt = Metric::lense_thirring(mu, 0.3).unwrap();
    let kerr = kerr_isotropic(mu, 0.3 / mu, KerrOrder::Leading).unwrap();
    let p = [0.0, 0.0, 1e3 * mu, 0.0];
    let v_lt = lt.isotropic().unwrap().v.value(&p, &none).unwrap();
    let v_k = kerr.v.value(&p, &none).unwrap();
    assert!(((v_lt - v_k) / v_k).abs() <= 1e-5);
    let o_lt = lt.isotropic().unwrap().omega[2].value(&p, &none).unwrap();
    let o_k = kerr.omega[2].value(&p, &none).unwrap();
    assert!(((o_lt - o_k) / o_k).abs() < 1e-14);
}

#[test]
fn frame_rotation() {
    let none = Params::new();
    let m = Metric::rotating_isotropic(parse("1 - 0.1/r").unwrap(), Expr::one(), [Expr::zero(), Expr::zero(), parse("0.3").unwrap()], Params::new()).unwrap();
    let co = m.rotate_to_frame([0.0, 0.0, 0.3]).unwrap();
    let st = Metric::static_diagonal(parse("1 - 0.1/r").unwrap(), Expr::one(), Params::new()).unwrap();
    let p = [0.0, 1.0, 2.0, 0.5];
    for a in 0..4 {
        for b in 0..4 {
            let x = co.component(a, b).value(&p, &none).unwrap();
            let y = st.component(a, b).value(&p, &none).unwrap();
            assert!((x - y).abs() < 1e-15);
        }
    }
    let frame = Metric::minkowski().rotate_to_frame([0.0, 0.0, 0.7]).unwrap();
    assert_eq!(frame.family(), Family::RotatingIsotropic);
    assert_eq!(frame.isotropic().unwrap().omega[2].value(&p, &none).unwrap(), -0.7);
    let custom = Metric::custom(std::array::from_fn(|_| Expr::one()), Params::new());
    assert!(matches!(custom.rotate_to_frame([0.0, 0.0, 1.0]), Err(Error::Family(_))));
}

#[test]
fn conformal_rescaling() {
    let none = Params::new();
    let mink = Metric::minkowski();
    let same = mink.conformal(&Expr::one()).unwrap();
    let p = [0.0, 0.3, 0.2, 0.1];
    assert_eq!(same.values(&p).unwrap(), mink.values(&p).unwrap());

    let c = 1.7;
    let scaled = mink.conformal(&Expr::constant(c)).unwrap();
    let det = scaled.at_point(&p, Depth::Values).unwrap().det.v;
    assert!((det + c.powi(-8)).abs() < 1e-15);

    let v = parse("1 - 0.5/r").unwrap();
    let w = parse("1 + 0.5/r").unwrap();
    let o = parse("1 + 0.25/r").unwrap();
    let m = Metric::static_diagonal(v.clone(), w.clone(), Params::new()).unwrap();
    let direct = Metric::static_diagonal(&v / &o, &w / &o, Params::new()).unwrap();
    let via = m.conformal(&o).unwrap();
    let back = via.conformal(&(1.0 / o.clone())).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..100 {
        let p = random_point(&mut rng, 1.0, 5.0);
        let a = via.values(&p).unwrap();
        let b = direct.values(&p).unwrap();
        let orig = m.values(&p).unwrap();
        let round = back.values(&p).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                assert!((a[i][j] - b[i][j]).abs() < 1e-14);
                assert!((orig[i][j] - round[i][j]).abs() < 1e-12);
            }
        }
    }
    let parts = via.isotropic().unwrap();
    assert!((parts.v.value(&[0.0, 2.0, 0.0, 0.0], &none).unwrap() - 0.75 / 1.125).abs() < 1e-15);

    let checked = m.with_domain(Domain { r_min: 0.0, check_points: vec![[0.0, 1.0, 0.0, 0.0]] });
    assert!(matches!(checked.conformal(&parse("x - 2").unwrap()), Err(Error::Domain(_))));
}

#[test]
fn signature_and_domain_errors() {
    let bad = Metric::static_diagonal(parse("x").unwrap(), Expr::one(), Params::new()).unwrap();
    assert!(matches!(bad.at_point(&[0.0, 0.0, 1.0, 0.0], Depth::Values), Err(Error::SingularMetric(_))));
    let euclid = Metric::custom(
        std::array::from_fn(|k| if [0, 4, 7, 9].contains(&k) { Expr::one() } else { Expr::zero() }),
        Params::new(),
    );
    assert!(matches!(euclid.at_point(&[0.0; 4], Depth::Values), Err(Error::Signature(_))));
    let lt = Metric::lense_thirring(1.0, 0.5).unwrap();
    assert!(matches!(lt.at_point(&[0.0, 0.5, 0.0, 0.0], Depth::Values), Err(Error::Domain(_))));
    assert!(matches!(
        Metric::static_diagonal(parse("1 + t").unwrap(), Expr::one(), Params::new()),
        Err(Error::Config(_))
    ));
}
