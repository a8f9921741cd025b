use std::f64::consts::PI;

use gfw::classical::{
    acceleration, classical_hamiltonian, force, integrate_sampled, noninertial_eom, phase_rates, velocity,
    ClassicalState,
};
use gfw::config::RunConfig;
use gfw::curvature::ricci_scalar;
use gfw::operator::{
    assemble_t_prime_generic, assemble_upsilon_prime, conformal_invariance_check, expectation, fw_approximate,
    fw_exact, gaussian_packet, hamiltonian_prime, quantum_eom, spectrum, FwMethod, FwResult, GridOperator, GridSpec,
    Rational,
};
use gfw::tolerances::Tolerances;
use gfw::verify::{self, ROUNDOFF_FLOOR};
use gfw::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::output::{num, Check, Report, Table};

fn random_point(rng: &mut ChaCha8Rng, r_min: f64, r_max: f64) -> [f64; 3] {
    let r = rng.random_range(r_min..=r_max);
    let z: f64 = rng.random_range(-1.0..=1.0);
    let phi: f64 = rng.random_range(0.0..2.0 * PI);
    let s = (1.0 - z * z).sqrt();
    [r * s * phi.cos(), r * s * phi.sin(), r * z]
}

fn grid_n(g: &GridSpec) -> usize {
    match g {
        GridSpec::Sector(s) => s.n,
        GridSpec::Cartesian(c) => c.n,
    }
}

fn operators(cfg: &RunConfig, grid: &GridSpec) -> Result<(GridOperator, GridOperator)> {
    Ok((assemble_t_prime_generic(&cfg.metric, &cfg.coupling, grid)?, assemble_upsilon_prime(&cfg.metric, grid)?))
}

/// The exact form when its condition holds, the approximate form otherwise.
fn fw(t: &GridOperator, u: &GridOperator, tol: &Tolerances) -> Result<FwResult> {
    let exact = fw_exact(t, u, tol.get("fw_exactness"))?;
    if exact.method == FwMethod::Exact {
        Ok(exact)
    } else {
        fw_approximate(t, u)
    }
}

pub fn curvature(cfg: &RunConfig) -> Result<Report> {
    let s = cfg.sample;
    let mut rng = ChaCha8Rng::seed_from_u64(s.seed);
    let mut table = Table::new(&["x", "y", "z", "R"]);
    let mut worst = 0.0f64;
    for _ in 0..s.points {
        let x = random_point(&mut rng, s.r_min, s.r_max);
        let r = ricci_scalar(&cfg.metric, &[0.0, x[0], x[1], x[2]])?;
        worst = worst.max(r.abs());
        table.push(vec![num(x[0]), num(x[1]), num(x[2]), num(r)]);
    }
    let mut report = Report::new(table);
    report.checks.push(Check::at_most("max |R|", worst, cfg.tolerances.get("curvature")));
    Ok(report)
}

pub fn fw_spectrum(cfg: &RunConfig, n: Option<usize>) -> Result<Report> {
    let grid = cfg.grid(n)?;
    let (t, u) = operators(cfg, &grid)?;
    let tol = &cfg.tolerances;
    let h = hamiltonian_prime(&t, &u, &cfg.coupling)?;
    let f = fw(&t, &u, tol)?;
    let energies = spectrum(&f.h_fw, cfg.levels)?;
    let mut table = Table::new(&["level", "energy", "method"]);
    for (i, e) in energies.iter().enumerate() {
        table.push(vec![i.to_string(), num(*e), f.method.name().into()]);
    }
    let mut report = Report::new(table);
    report.notes.push(format!("{} form, exactness defect {:.3e}", f.method.name(), f.exactness_defect));
    let limit = tol.get("pseudo_hermiticity");
    report.checks.push(Check::at_most("pseudo-hermiticity of H'", h.pseudo_hermiticity_defect()?, limit));
    report.checks.push(Check::at_most("pseudo-hermiticity of H_FW", f.pseudo_hermiticity_defect, limit));
    Ok(report)
}

pub fn fw_exactness(cfg: &RunConfig, n: Option<usize>) -> Result<Report> {
    let grid = cfg.grid(n)?;
    let (t, u) = operators(cfg, &grid)?;
    let tol = &cfg.tolerances;
    let exact = fw_exact(&t, &u, tol.get("fw_exactness"))?;
    let approx = fw_approximate(&t, &u)?;
    let gap = approx.h_fw.sub(&exact.h_fw)?.norm() / exact.h_fw.norm();

    let mut table = Table::new(&["quantity", "value"]);
    table.push(vec!["method".into(), exact.method.name().into()]);
    table.push(vec!["exactness_defect".into(), num(exact.exactness_defect)]);
    table.push(vec!["correction_norm".into(), num(approx.correction_norm)]);
    table.push(vec!["approximate_vs_exact".into(), num(gap)]);
    let mut report = Report::new(table);
    let limit = tol.get("pseudo_hermiticity");
    report.checks.push(Check::at_most("pseudo-hermiticity of the exact form", exact.pseudo_hermiticity_defect, limit));
    report.checks.push(Check::at_most("pseudo-hermiticity of the approximate form", approx.pseudo_hermiticity_defect, limit));
    if cfg.metric.isotropic().is_some_and(|p| p.is_static()) {
        report.checks.push(Check::at_most("static exactness defect", exact.exactness_defect, 0.0));
        report.checks.push(Check::at_most("static approximate vs exact", gap, tol.get("static_exactness")));
    }
    Ok(report)
}

pub fn conformal_check(cfg: &RunConfig, n: Option<usize>) -> Result<Report> {
    let factor = cfg
        .conformal_factor
        .as_ref()
        .ok_or_else(|| Error::Config(format!("{}: conformal-check needs [functions] O", cfg.path)))?;
    let base = grid_n(&cfg.grid(n)?);
    let tol = &cfg.tolerances;
    let mut table = Table::new(&["n", "t_rel_diff", "offdiag_rel", "mass_term_rel", "spectral_rel_diff", "slope"]);
    let mut reports = Vec::new();
    for k in 0..3 {
        let n = base << k;
        let r = conformal_invariance_check(&cfg.metric, factor, &cfg.coupling, &cfg.grid(Some(n))?, cfg.levels)?;
        let slope = reports
            .last()
            .map_or(String::new(), |p: &gfw::operator::ConformalReport| num((p.spectral_rel_diff / r.spectral_rel_diff).log2()));
        table.push(vec![
            n.to_string(),
            num(r.t_rel_diff),
            num(r.offdiag_rel),
            num(r.mass_term_rel),
            num(r.spectral_rel_diff),
            slope,
        ]);
        reports.push(r);
    }

    let mut report = Report::new(table);
    let conformal = cfg.coupling.lambda == Rational::CONFORMAL;
    let finest = &reports[2];
    if conformal && cfg.coupling.mass == 0.0 {
        report.checks.push(Check::at_most("spectral difference", finest.spectral_rel_diff, tol.get("conformal_spectral")));
        if reports.iter().all(|r| r.spectral_rel_diff <= ROUNDOFF_FLOOR) {
            report.notes.push(format!("differences at roundoff on every grid (<= {ROUNDOFF_FLOOR:e}); slope not meaningful"));
        } else {
            let slope = (reports[1].spectral_rel_diff / finest.spectral_rel_diff).log2();
            report.checks.push(Check::at_least("refinement slope", slope, tol.get("conformal_order")));
        }
    } else if conformal {
        let limit = tol.get("conformal_mass");
        let off = reports.iter().map(|r| r.offdiag_rel).fold(0.0, f64::max);
        let mass = reports.iter().map(|r| r.mass_term_rel).fold(0.0, f64::max);
        report.checks.push(Check::at_most("off-diagonal change", off, limit));
        report.checks.push(Check::at_most("change minus mass term", mass, limit));
    } else if cfg.coupling.mass == 0.0 {
        report.checks.push(Check::above("spectral difference", finest.spectral_rel_diff, tol.get("conformal_broken")));
    } else {
        report.notes.push("no invariance expected for m > 0 and lambda != 1/6; values reported only".into());
    }
    Ok(report)
}

pub fn n_independence(cfg: &RunConfig, n: Option<usize>) -> Result<Report> {
    let grid = cfg.grid(n)?;
    let (t, u) = operators(cfg, &grid)?;
    let mut ns = vec![0.5, 1.0, 5.0];
    if !ns.contains(&cfg.coupling.n_param) {
        ns.push(cfg.coupling.n_param);
    }
    let mut table = Table::new(&["N", "level", "energy"]);
    let mut spectra = Vec::new();
    for &np in &ns {
        let e = spectrum(&hamiltonian_prime(&t, &u, &cfg.coupling.with_n(np))?, cfg.levels)?;
        for (i, v) in e.iter().enumerate() {
            table.push(vec![num(np), i.to_string(), num(*v)]);
        }
        spectra.push(e);
    }
    let mut spread = 0.0f64;
    for a in &spectra {
        for b in &spectra {
            for (x, y) in a.iter().zip(b) {
                spread = spread.max((x - y).abs() / x.abs());
            }
        }
    }
    let mut report = Report::new(table);
    report.checks.push(Check::at_most("relative spread over N", spread, cfg.tolerances.get("n_independence")));
    Ok(report)
}

pub fn eom_packet(cfg: &RunConfig, n: Option<usize>) -> Result<Report> {
    let packet = cfg
        .packet
        .as_ref()
        .ok_or_else(|| Error::Config(format!("{}: eom-packet needs a [packet] section", cfg.path)))?;
    let grid = cfg.grid(n)?;
    if !matches!(grid, GridSpec::Sector(_)) {
        return Err(Error::Config(format!("{}: eom-packet needs a sector grid", cfg.path)));
    }
    let (t, u) = operators(cfg, &grid)?;
    let f = fw(&t, &u, &cfg.tolerances)?;
    let eom = quantum_eom(&f.h_fw, &cfg.metric, 1.0)?;
    let psi = gaussian_packet(&grid, &[packet.center], packet.width, &[packet.momentum])?;
    let quantum = [expectation(&eom.velocity[0], &psi), expectation(&eom.force[0], &psi)];

    // the packet moves along the radius; take it along x
    let s = ClassicalState::with_physical_momentum([packet.center, 0.0, 0.0], [packet.momentum, 0.0, 0.0]);
    let mass = cfg.coupling.mass;
    let classical = [velocity(&cfg.metric, mass, &s)?[0], force(&cfg.metric, mass, &s)?[0]];

    let mut table = Table::new(&["quantity", "quantum", "classical", "rel_err"]);
    let mut checks = Vec::new();
    for (k, (name, tol_name)) in [("velocity", "packet_velocity"), ("force", "packet_force")].into_iter().enumerate() {
        // a vanishing classical value is compared on the scale 1e-3
        let err = (quantum[k] - classical[k]).abs() / classical[k].abs().max(1e-3);
        table.push(vec![name.into(), num(quantum[k]), num(classical[k]), num(err)]);
        checks.push(Check::at_most(format!("{name} error"), err, cfg.tolerances.get(tol_name)));
    }
    let mut report = Report::new(table);
    report.checks = checks;
    Ok(report)
}

pub fn orbit(cfg: &RunConfig) -> Result<Report> {
    let o = cfg.orbit.ok_or_else(|| Error::Config(format!("{}: orbit needs an [orbit] section", cfg.path)))?;
    let mass = cfg.coupling.mass;
    let traj = integrate_sampled(&cfg.metric, mass, o.initial, o.dt, o.steps, o.scheme, o.sample)?;
    let h0 = traj.energies[0];
    let mut table = Table::new(&["step", "t", "x", "y", "z", "p1", "p2", "p3", "H", "drift"]);
    let mut worst = 0.0f64;
    for (k, (s, h)) in traj.states.iter().zip(&traj.energies).enumerate() {
        let step = (k * o.sample.max(1)).min(o.steps);
        let drift = (h - h0).abs() / h0.abs();
        worst = worst.max(drift);
        let mut row = vec![step.to_string(), num(s.t)];
        row.extend(s.x.iter().chain(&s.p).map(|v| num(*v)));
        row.extend([num(*h), num(drift)]);
        table.push(row);
    }
    let mut report = Report::new(table);
    report.notes.push(format!("{} steps of {} with {}", o.steps, o.dt, o.scheme));
    report.checks.push(Check::at_most("energy drift", worst, cfg.tolerances.get("energy_drift")));
    Ok(report)
}

pub fn eom_check(cfg: &RunConfig) -> Result<Report> {
    let s = cfg.sample;
    let m = &cfg.metric;
    let mass = cfg.coupling.mass;
    let mut rng = ChaCha8Rng::seed_from_u64(s.seed);
    let mut table = Table::new(&["index", "x", "y", "z", "p1", "p2", "p3", "velocity_err", "momentum_rate_err", "noninertial_err"]);
    let (mut worst_v, mut worst_f, mut worst_n) = (0.0f64, 0.0f64, 0.0f64);
    for index in 0..s.points {
        let x = random_point(&mut rng, s.r_min, s.r_max);
        let p = std::array::from_fn(|_| rng.random_range(-1.0..=1.0));
        let st = ClassicalState::new(x, p);
        let h = |q: &ClassicalState| classical_hamiltonian(m, mass, q);
        let rates = phase_rates(m, mass, &st)?;
        let pdot = rates.momentum_rate();
        let v_scale = rates.velocity.iter().map(|q| q.abs()).fold(1e-3, f64::max);
        let f_scale = pdot.iter().map(|q| q.abs()).fold(1e-3, f64::max);
        let hp = 1e-6 * p.iter().map(|q| q * q).sum::<f64>().sqrt().max(1e-3);
        let hx = 1e-5;
        let (mut ev, mut ef) = (0.0f64, 0.0f64);
        for i in 0..3 {
            let (mut a, mut b) = (st, st);
            a.p[i] += hp;
            b.p[i] -= hp;
            ev = ev.max((rates.velocity[i] + (h(&a)? - h(&b)?) / (2.0 * hp)).abs() / v_scale);
            let (mut a, mut b) = (st, st);
            a.x[i] += hx;
            b.x[i] -= hx;
            ef = ef.max((pdot[i] - (h(&a)? - h(&b)?) / (2.0 * hx)).abs() / f_scale);
        }
        let en = match cfg.frame {
            Some(frame) => {
                let (v, w) = noninertial_eom(&st, &frame.accel, &frame.rotation, mass)?;
                let (vg, wg) = (velocity(m, mass, &st)?, acceleration(m, mass, &st)?);
                let e = (0..3).map(|i| (v[i] - vg[i]).abs().max((w[i] - wg[i]).abs())).fold(0.0, f64::max);
                worst_n = worst_n.max(e);
                num(e)
            }
            None => String::new(),
        };
        worst_v = worst_v.max(ev);
        worst_f = worst_f.max(ef);
        let mut row = vec![index.to_string()];
        row.extend(x.iter().chain(&p).map(|v| num(*v)));
        row.extend([num(ev), num(ef), en]);
        table.push(row);
    }
    let mut report = Report::new(table);
    let limit = cfg.tolerances.get("hamilton_fd");
    report.checks.push(Check::at_most("velocity vs finite differences", worst_v, limit));
    report.checks.push(Check::at_most("dp/dt vs finite differences", worst_f, limit));
    if cfg.frame.is_some() {
        report.checks.push(Check::at_most("closed noninertial equations", worst_n, cfg.tolerances.get("noninertial")));
    }
    Ok(report)
}

pub fn verify_all(tol: &Tolerances, only: Option<usize>) -> Result<Report> {
    let reports = match only {
        Some(id) => vec![verify::run(id, tol)?],
        None => verify::verify_all(tol),
    };
    let mut report = Report::new(Table::new(&["id", "criterion", "passed", "metric", "value"]));
    for r in &reports {
        for (name, value) in &r.metrics {
            report.table.push(vec![r.id.to_string(), r.name.into(), r.passed.to_string(), name.clone(), num(*value)]);
        }
        report.notes.push(format!(
            "criterion {:>2} {:<22} {} ({:.2} s, budget {} s) {}",
            r.id,
            r.name,
            if r.passed { "PASS" } else { "FAIL" },
            r.elapsed.as_secs_f64(),
            r.budget.as_secs(),
            r.summary
        ));
        report.checks.push(Check::at_least(format!("criterion {}", r.id), f64::from(u8::from(r.passed)), 1.0));
    }
    Ok(report)
}
