//! Classical limit of the FW Hamiltonian.
//!
//! `H = sqrt((m^2 - G^ij p_i p_j) / g^00) - g^0i p_i / g^00`
//!
//! The state carries covariant momenta `p_i`. The physical momentum of the
//! three-vector formulas is `-p_i`, so Hamilton's equations read
//! `dx^i/dt = -dH/dp_i` and `dp_i/dt = dH/dx^i`.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::expr::{Jet2, Scalar};
use crate::metric::{Depth, Metric, MetricPoint};

/// Fixed-point tolerance of the implicit leapfrog stages.
pub const FIXED_POINT_TOL: f64 = 1e-13;
pub const FIXED_POINT_MAX_ITER: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassicalState {
    pub t: f64,
    pub x: [f64; 3],
    /// Covariant spatial momentum `p_i`.
    pub p: [f64; 3],
}

impl ClassicalState {
    pub fn new(x: [f64; 3], p: [f64; 3]) -> Self {
        Self { t: 0.0, x, p }
    }

    /// State with the physical momentum `-p_i` given instead.
    pub fn with_physical_momentum(x: [f64; 3], momentum: [f64; 3]) -> Self {
        Self::new(x, momentum.map(|v| -v))
    }

    pub fn point(&self) -> [f64; 4] {
        [self.t, self.x[0], self.x[1], self.x[2]]
    }

    pub fn physical_momentum(&self) -> [f64; 3] {
        self.p.map(|v| -v)
    }
}

/// Everything Hamilton's equations need at one state.
#[derive(Debug, Clone, Copy)]
pub struct PhaseRates {
    pub hamiltonian: f64,
    /// `dH/dx^mu`, time first.
    pub dh_dx: [f64; 4],
    /// `dx^i/dt = -dH/dp_i`.
    pub velocity: [f64; 3],
}

impl PhaseRates {
    /// `dp_i/dt`.
    pub fn momentum_rate(&self) -> [f64; 3] {
        [self.dh_dx[1], self.dh_dx[2], self.dh_dx[3]]
    }
}

/// `H` and the velocity as jets in the position, plus `d velocity / dp`.
struct Local {
    h: Jet2,
    velocity: [Jet2; 3],
    /// `d velocity^i / dp_k`.
    dv_dp: [[f64; 3]; 3],
}

fn local(mp: &MetricPoint, mass: f64, p: &[f64; 3]) -> Result<Local> {
    let g00 = mp.g_up[0][0];
    let gp: [Jet2; 3] = std::array::from_fn(|i| {
        (0..3).fold(Jet2::constant(0.0), |acc, j| acc + mp.g_spatial_up[i][j].scale(p[j]))
    });
    let gpp = (0..3).fold(Jet2::constant(0.0), |acc, i| acc + gp[i].scale(p[i]));
    let rad = (Jet2::constant(mass * mass) - gpp) / g00;
    if !(rad.v > 0.0) {
        return Err(Error::domain(format!(
            "(m^2 - G^ij p_i p_j)/g^00 = {} is not positive at x = {:?}",
            rad.v,
            &mp.point[1..]
        )));
    }
    let root = rad.sqrt();
    let shift_p = (0..3).fold(Jet2::constant(0.0), |acc, i| acc + mp.shift[i].scale(p[i]));
    let h = root - shift_p;
    let denom = g00 * root;
    let velocity: [Jet2; 3] = std::array::from_fn(|i| gp[i] / denom + mp.shift[i]);

    let (g00v, rv) = (g00.v, rad.v);
    let dv_dp = std::array::from_fn(|i| {
        std::array::from_fn(|k| {
            mp.g_spatial_up[i][k].v / (g00v * rv.sqrt()) + gp[i].v * gp[k].v / (g00v * g00v * rv * rv.sqrt())
        })
    });
    Ok(Local { h, velocity, dv_dp })
}

fn evaluate(metric: &Metric, mass: f64, s: &ClassicalState, depth: Depth) -> Result<(MetricPoint, Local)> {
    let mp = metric.at_point(&s.point(), depth)?;
    let l = local(&mp, mass, &s.p)?;
    Ok((mp, l))
}

pub fn classical_hamiltonian(metric: &Metric, mass: f64, s: &ClassicalState) -> Result<f64> {
    Ok(evaluate(metric, mass, s, Depth::Values)?.1.h.v)
}

pub fn phase_rates(metric: &Metric, mass: f64, s: &ClassicalState) -> Result<PhaseRates> {
    let (_, l) = evaluate(metric, mass, s, Depth::First)?;
    Ok(PhaseRates { hamiltonian: l.h.v, dh_dx: l.h.g, velocity: l.velocity.map(|v| v.v) })
}

/// `V^i = G^ij p_j / sqrt(g^00 (m^2 - G^kl p_k p_l)) + g^0i/g^00`.
pub fn velocity(metric: &Metric, mass: f64, s: &ClassicalState) -> Result<[f64; 3]> {
    Ok(evaluate(metric, mass, s, Depth::Values)?.1.velocity.map(|v| v.v))
}

/// Rate of the contravariant momentum `p^i = g^{i mu} p_mu` with `p_0 = H`:
/// `F^i = p_mu d_t g^{i mu} + g^0i d_t H + g^ij d_j H + p_mu V^j d_j g^{i mu}`.
pub fn force(metric: &Metric, mass: f64, s: &ClassicalState) -> Result<[f64; 3]> {
    let (mp, l) = evaluate(metric, mass, s, Depth::First)?;
    let pmu = [l.h.v, s.p[0], s.p[1], s.p[2]];
    let v: [f64; 3] = l.velocity.map(|q| q.v);
    Ok(std::array::from_fn(|a| {
        let i = a + 1;
        let mut f = mp.g_up[0][i].v * l.h.g[0];
        for j in 1..4 {
            f += mp.g_up[i][j].v * l.h.g[j];
        }
        for mu in 0..4 {
            let g = &mp.g_up[i][mu];
            f += pmu[mu] * (g.g[0] + v[0] * g.g[1] + v[1] * g.g[2] + v[2] * g.g[3]);
        }
        f
    }))
}

/// `dV^i/dt` along the Hamiltonian flow.
pub fn acceleration(metric: &Metric, mass: f64, s: &ClassicalState) -> Result<[f64; 3]> {
    let (_, l) = evaluate(metric, mass, s, Depth::First)?;
    let v: [f64; 3] = l.velocity.map(|q| q.v);
    let pdot = [l.h.g[1], l.h.g[2], l.h.g[3]];
    Ok(std::array::from_fn(|i| {
        let vi = &l.velocity[i];
        let mut w = vi.g[0];
        for j in 0..3 {
            w += vi.g[j + 1] * v[j] + l.dv_dp[i][j] * pdot[j];
        }
        w
    }))
}

fn cross(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn dot(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Closed-form velocity and acceleration in a frame accelerating at `a` and
/// rotating at `o`, i.e. the metric `V = 1 + a.r`, `W = 1`, `Omega = -o`.
pub fn noninertial_eom(s: &ClassicalState, a: &[f64; 3], o: &[f64; 3], mass: f64) -> Result<([f64; 3], [f64; 3])> {
    let r = &s.x;
    let p = s.physical_momentum();
    let lapse = 1.0 + dot(a, r);
    if !(lapse > 0.0) {
        return Err(Error::domain(format!("1 + a.r = {lapse} is not positive at {r:?}")));
    }
    let energy = (mass * mass + dot(&p, &p)).sqrt();
    let o_r = cross(o, r);
    let v: [f64; 3] = std::array::from_fn(|i| lapse * p[i] / energy - o_r[i]);
    let coriolis = cross(o, &v);
    let centrifugal = cross(o, &o_r);
    let factor = (2.0 * dot(a, &v) + dot(a, &o_r)) / lapse;
    let w = std::array::from_fn(|i| {
        -a[i] * lapse - 2.0 * coriolis[i] - centrifugal[i] + factor * (v[i] + o_r[i])
    });
    Ok((v, w))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    /// Generalized Stormer-Verlet with fixed-point solves for the
    /// non-separable Hamiltonian.
    Leapfrog,
    Rk4,
}

impl Scheme {
    pub fn name(self) -> &'static str {
        match self {
            Scheme::Leapfrog => "leapfrog-implicit",
            Scheme::Rk4 => "rk4",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheme {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "leapfrog-implicit" | "leapfrog" => Ok(Scheme::Leapfrog),
            "rk4" => Ok(Scheme::Rk4),
            _ => Err(Error::Config(format!("unknown integration scheme `{s}` (leapfrog-implicit, rk4)"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub states: Vec<ClassicalState>,
    /// `H` at every sampled state.
    pub energies: Vec<f64>,
    pub dt: f64,
    pub scheme: Scheme,
}

impl Trajectory {
    /// `|H - H(0)| / |H(0)|` for each sample.
    pub fn drift_record(&self) -> Vec<f64> {
        let h0 = self.energies[0];
        self.energies.iter().map(|h| (h - h0).abs() / h0.abs()).collect()
    }

    pub fn last(&self) -> &ClassicalState {
        self.states.last().expect("trajectories hold the initial state")
    }
}

fn axpy(x: &[f64; 3], a: f64, y: &[f64; 3]) -> [f64; 3] {
    std::array::from_fn(|i| x[i] + a * y[i])
}

fn max_diff(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    (0..3).map(|i| (a[i] - b[i]).abs()).fold(0.0, f64::max)
}

fn max_abs(a: &[f64; 3]) -> f64 {
    a.iter().map(|v| v.abs()).fold(0.0, f64::max)
}

struct Stepper<'a> {
    metric: &'a Metric,
    mass: f64,
}

impl Stepper<'_> {
    fn rates(&self, t: f64, x: [f64; 3], p: [f64; 3]) -> Result<PhaseRates> {
        phase_rates(self.metric, self.mass, &ClassicalState { t, x, p })
    }

    fn leapfrog(&self, s: &ClassicalState, dt: f64, step: usize) -> Result<ClassicalState> {
        let half = 0.5 * dt;
        let diverged = |what: &str, resid: f64| Error::IntegratorDivergence {
            step,
            message: format!("{what} fixed point did not converge (residual {resid:e})"),
        };

        // p_{1/2} = p + dt/2 dH/dx(x, p_{1/2})
        let mut p_half = s.p;
        let mut resid = f64::INFINITY;
        for _ in 0..FIXED_POINT_MAX_ITER {
            let next = axpy(&s.p, half, &self.rates(s.t, s.x, p_half)?.momentum_rate());
            resid = max_diff(&next, &p_half);
            p_half = next;
            if resid <= FIXED_POINT_TOL * max_abs(&p_half).max(1.0) {
                break;
            }
        }
        if resid > FIXED_POINT_TOL * max_abs(&p_half).max(1.0) {
            return Err(diverged("momentum", resid));
        }

        // x' = x + dt/2 (V(x, p_{1/2}) + V(x', p_{1/2}))
        let v0 = self.rates(s.t, s.x, p_half)?.velocity;
        let mut x = axpy(&s.x, dt, &v0);
        resid = f64::INFINITY;
        for _ in 0..FIXED_POINT_MAX_ITER {
            let v1 = self.rates(s.t + dt, x, p_half)?.velocity;
            let next = std::array::from_fn(|i| s.x[i] + half * (v0[i] + v1[i]));
            resid = max_diff(&next, &x);
            x = next;
            if resid <= FIXED_POINT_TOL * max_abs(&x).max(1.0) {
                break;
            }
        }
        if resid > FIXED_POINT_TOL * max_abs(&x).max(1.0) {
            return Err(diverged("position", resid));
        }

        let p = axpy(&p_half, half, &self.rates(s.t + dt, x, p_half)?.momentum_rate());
        Ok(ClassicalState { t: s.t + dt, x, p })
    }

    fn rk4(&self, s: &ClassicalState, dt: f64) -> Result<ClassicalState> {
        let f = |t: f64, x: [f64; 3], p: [f64; 3]| -> Result<([f64; 3], [f64; 3])> {
            let r = self.rates(t, x, p)?;
            Ok((r.velocity, r.momentum_rate()))
        };
        let (k1x, k1p) = f(s.t, s.x, s.p)?;
        let (k2x, k2p) = f(s.t + 0.5 * dt, axpy(&s.x, 0.5 * dt, &k1x), axpy(&s.p, 0.5 * dt, &k1p))?;
        let (k3x, k3p) = f(s.t + 0.5 * dt, axpy(&s.x, 0.5 * dt, &k2x), axpy(&s.p, 0.5 * dt, &k2p))?;
        let (k4x, k4p) = f(s.t + dt, axpy(&s.x, dt, &k3x), axpy(&s.p, dt, &k3p))?;
        let comb = |y: &[f64; 3], a: &[f64; 3], b: &[f64; 3], c: &[f64; 3], d: &[f64; 3]| {
            std::array::from_fn(|i| y[i] + dt / 6.0 * (a[i] + 2.0 * b[i] + 2.0 * c[i] + d[i]))
        };
        Ok(ClassicalState {
            t: s.t + dt,
            x: comb(&s.x, &k1x, &k2x, &k3x, &k4x),
            p: comb(&s.p, &k1p, &k2p, &k3p, &k4p),
        })
    }
}

/// Integrates Hamilton's equations for `steps` steps of size `dt`, keeping
/// every `sample`-th state (and always the last one).
pub fn integrate_sampled(
    metric: &Metric,
    mass: f64,
    s0: ClassicalState,
    dt: f64,
    steps: usize,
    scheme: Scheme,
    sample: usize,
) -> Result<Trajectory> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::Config(format!("time step must be positive, got {dt}")));
    }
    let sample = sample.max(1);
    let stepper = Stepper { metric, mass };
    let mut states = vec![s0];
    let mut energies = vec![classical_hamiltonian(metric, mass, &s0)?];
    let mut s = s0;
    for step in 1..=steps {
        s = match scheme {
            Scheme::Leapfrog => stepper.leapfrog(&s, dt, step)?,
            Scheme::Rk4 => stepper.rk4(&s, dt)?,
        };
        if !s.x.iter().chain(&s.p).all(|v| v.is_finite()) {
            return Err(Error::IntegratorDivergence { step, message: "non-finite state".into() });
        }
        if step % sample == 0 || step == steps {
            energies.push(classical_hamiltonian(metric, mass, &s)?);
            states.push(s);
        }
    }
    Ok(Trajectory { states, energies, dt, scheme })
}

pub fn integrate(
    metric: &Metric,
    mass: f64,
    s0: ClassicalState,
    dt: f64,
    steps: usize,
    scheme: Scheme,
) -> Result<Trajectory> {
    integrate_sampled(metric, mass, s0, dt, steps, scheme, 1)
}

/// `max |H(t) - H(0)| / |H(0)|`, recomputing `H` from the stored states.
pub fn energy_drift(traj: &Trajectory, metric: &Metric, mass: f64) -> Result<f64> {
    let h0 = classical_hamiltonian(metric, mass, &traj.states[0])?;
    let mut worst = 0.0f64;
    for s in &traj.states[1..] {
        worst = worst.max((classical_hamiltonian(metric, mass, s)? - h0).abs());
    }
    Ok(worst / h0.abs())
}
