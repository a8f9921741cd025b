use gfw_wasm::{conformal_spectra_native, orbit_native, ricci_profile_native};

#[test]
fn flat_and_curved_profiles() {
    let flat = ricci_profile_native("1", "1", 1.0, 5.0, 9).unwrap();
    assert_eq!(flat.len(), 18);
    assert_eq!(flat[0], 1.0);
    assert_eq!(flat[16], 5.0);
    assert!(flat.chunks(2).all(|p| p[1] == 0.0));

    // isotropic Schwarzschild is a vacuum
    let vac = ricci_profile_native("(1 - 1/(2*r))/(1 + 1/(2*r))", "(1 + 1/(2*r))^2", 3.0, 50.0, 20).unwrap();
    assert!(vac.chunks(2).all(|p| p[1].abs() < 1e-10));

    let weak = ricci_profile_native("1 - 1/r", "1 + 1/r", 3.0, 50.0, 20).unwrap();
    assert!(weak.chunks(2).any(|p| p[1].abs() > 1e-6));

    assert!(ricci_profile_native("1 - (", "1", 1.0, 2.0, 3).is_err());
}

#[test]
fn conformal_spectra_distinguish_the_coupling() {
    let rel = |lambda: &str| {
        let e = conformal_spectra_native(lambda, "1 + 1/r", 0.5, 100, 5).unwrap();
        let (a, b) = e.split_at(5);
        a.iter().zip(b).map(|(x, y)| (x - y).abs() / x).fold(0.0, f64::max)
    };
    assert!(rel("1/6") < 1e-9);
    assert!(rel("0") > 1e-3);
    assert!(conformal_spectra_native("x", "1", 0.5, 50, 3).is_err());
}

#[test]
fn orbit_conserves_energy() {
    let out = orbit_native(0.01, 0.005, 1.0, 0.1, 0.3, 0.01, 4000, 200).unwrap();
    assert_eq!(out.len(), 4 * 21);
    let drift = out.chunks(4).map(|s| s[3]).fold(0.0, f64::max);
    assert!(drift < 1e-9, "{drift}");
    assert!(orbit_native(0.5, 0.0, 0.1, 0.1, 0.0, 0.1, 10, 1).is_err());
}
