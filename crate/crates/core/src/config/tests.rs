use super::*;
use crate::metric::Family;

const LT: &str = "
# weak rotating source
[family]
name = lense-thirring
[params]
mu = 0.5
J = 1.5
[grid]
kind = sector
r_min = 2
r_max = 20
n = 64
l = 1
m_z = 1
[coupling]
lambda = 1/6
mass = 1
N = 2
[tolerances]
kepler = 2e-3
";

#[test]
fn reads_a_complete_file() {
    let cfg = RunConfig::parse(LT, "lt.cfg").unwrap();
    assert_eq!(cfg.metric.family(), Family::LenseThirring);
    assert_eq!(cfg.coupling.lambda, Rational::CONFORMAL);
    assert_eq!(cfg.coupling.n_param, 2.0);
    assert_eq!(cfg.tolerances.get("kepler"), 2e-3);
    let g = cfg.grid(None).unwrap();
    assert_eq!(g.as_sector().unwrap().l_max, 5);
    assert_eq!(cfg.grid(Some(100)).unwrap().as_sector().unwrap().n, 100);
    assert_eq!(cfg.metric.domain().r_min, 0.5);
}

fn err(text: &str) -> String {
    match RunConfig::parse(text, "bad.cfg") {
        Err(Error::Config(m)) => m,
        other => panic!("expected a config error, got {other:?}"),
    }
}

#[test]
fn errors_name_file_and_line() {
    assert!(err("[family]\nname = kerr\ncolour = blue\n").starts_with("bad.cfg:3: unknown key `colour`"));
    assert!(err("[family]\nname = kerr\n[nonsense]\n").starts_with("bad.cfg:3: unknown section"));
    assert!(err("name = kerr\n").starts_with("bad.cfg:1:"));
    assert!(err("[family]\nname = kerr\n[params]\nmu = 1\na = 0.5\n[coupling]\nlambda = one\n").starts_with("bad.cfg:7:"));
    assert!(err("[family]\nname = static\n[functions]\nV = 1 - (2\nW = 1\n").starts_with("bad.cfg:4:"));
    assert!(err("[family]\nname = kerr\n").contains("needs `mu`"));
    assert!(err("[family]\nname = wormhole\n").starts_with("bad.cfg:2:"));
    assert!(err("[family]\nname = static\n[family]\n").contains("duplicate section"));
    assert!(err("[family]\nname = minkowski\n[tolerances]\nfoo = 1\n").contains("unknown tolerance"));
}

#[test]
fn missing_grid_is_reported_on_use() {
    let cfg = RunConfig::parse("[family]\nname = minkowski\n", "flat.cfg").unwrap();
    assert!(!cfg.has_grid());
    match cfg.grid(None) {
        Err(Error::Config(m)) => assert!(m.contains("missing [grid]")),
        other => panic!("{other:?}"),
    }
}

#[test]
fn function_families_and_frames() {
    let cfg = RunConfig::parse(
        "[family]\nname = rotating-isotropic\n[functions]\nV = 1 - k/r\nW = 1 + k/r\nOmega_z = w0/(1 + r^2)\nO = 1 + 1/r\n[params]\nk = 0.2\nw0 = 0.1\n[frame]\nrotation = 0, 0, 0.1\n[domain]\nr_min = 0.5\ncheck_points = 1 0 0; 0 2 0\n",
        "rot.cfg",
    )
    .unwrap();
    let iso = cfg.metric.isotropic().unwrap();
    let p = [0.0, 1.0, 0.0, 0.0];
    // Omega - o at r = 1: 0.05 - 0.1
    assert!((iso.omega[2].value(&p, cfg.metric.params()).unwrap() + 0.05).abs() < 1e-15);
    assert_eq!(cfg.metric.domain().check_points.len(), 2);
    assert!(cfg.conformal_factor.is_some());

    let ni = RunConfig::parse("[family]\nname = noninertial\n[frame]\naccel = 0.1 0 0\nrotation = 0 0 0.2\n", "n.cfg").unwrap();
    assert_eq!(ni.metric.family(), Family::Noninertial);
    assert!(err("[family]\nname = kerr\n[params]\nmu = 1\na = 0\n[frame]\naccel = 1 0 0\n").contains("noninertial"));
}

#[test]
fn si_units_convert_to_geometric() {
    let cfg = RunConfig::parse(
        "[family]\nname = lense-thirring\n[units]\nsystem = si\n[params]\nM = 5.972e24\nJ = 5.86e33\n",
        "earth.cfg",
    )
    .unwrap();
    let mu = G_SI * 5.972e24 / (C_SI * C_SI);
    assert!((cfg.metric.domain().r_min - mu).abs() < 1e-15 * mu);
    assert!((mu - 4.435e-3).abs() < 1e-5);
}

#[test]
fn orbit_packet_and_sample_sections() {
    let cfg = RunConfig::parse(
        "[family]\nname = minkowski\n[orbit]\nx = 1, 0, 0\nmomentum = 0, 0.1, 0\ndt = 0.1\nsteps = 10\nscheme = rk4\n[packet]\ncenter = 30\nwidth = 3\nmomentum = 1\n[sample]\npoints = 5\nseed = 9\n",
        "o.cfg",
    )
    .unwrap();
    let orbit = cfg.orbit.unwrap();
    assert_eq!(orbit.initial.p, [0.0, -0.1, 0.0]);
    assert_eq!(orbit.scheme, Scheme::Rk4);
    assert_eq!(cfg.sample.points, 5);
    assert!(err("[family]\nname = minkowski\n[orbit]\nx = 1 0 0\np = 0 0 0\nmomentum = 0 0 0\ndt = 1\nsteps = 1\n").contains("either"));
}
