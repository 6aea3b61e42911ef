//! Slow-fast formulation of the stochastic Brusselator.
//!
//! The linear change of coordinates `(x, y) ↦ (u, v) = (y, x + y)` together
//! with `b = a/ε` puts the system in standard form. On the slow time scale
//! `t` (after dividing the `u` equation by `ε`):
//!
//! ```text
//! du = [a(v−u) − ε u (v−u)²]/ε dt + σ(v−u) ∘ dW
//! dv = [a − (v−u)] dt
//! ```
//!
//! and on the fast time `τ = t/ε` with `W̃_τ = ε^{-1/2} W_{ετ}`:
//!
//! ```text
//! du = [a(v−u) − ε u (v−u)²] dτ + √ε σ(v−u) ∘ dW̃
//! dv = ε[a − (v−u)] dτ
//! ```
//!
//! The critical manifold is the diagonal `S₀ = {u = v}`, where the noise
//! vanishes; the `u`-nullcline is `N = {v = u + a/(εu)}`.

use std::io::Write;

use crate::error::{Error, Result};
use crate::integrator::{self, apply_floor, check_blow_up, locate};
use crate::linalg::Mat2;
use crate::model::{Params, State};
use crate::noise::{NoisePath, RescaledPath};

/// Parameters of the slow-fast form; `ε = a/b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlowFastParams {
    a: f64,
    epsilon: f64,
    sigma: f64,
}

impl SlowFastParams {
    pub fn new(a: f64, epsilon: f64, sigma: f64) -> Result<Self> {
        // validate through Params so both views accept the same inputs
        Params::new(a, a / epsilon, sigma)?;
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::invalid("epsilon", format!("must be positive, got {epsilon}")));
        }
        Ok(SlowFastParams { a, epsilon, sigma })
    }

    pub fn from_params(p: &Params) -> Self {
        SlowFastParams {
            a: p.a(),
            epsilon: p.a() / p.b(),
            sigma: p.sigma(),
        }
    }

    pub fn to_params(&self) -> Params {
        Params::new(self.a, self.a / self.epsilon, self.sigma)
            .expect("validated on construction")
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }
}

/// A point in transformed coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SfState {
    pub u: f64,
    pub v: f64,
}

impl SfState {
    pub const fn new(u: f64, v: f64) -> Self {
        SfState { u, v }
    }

    pub fn distance(&self, other: &SfState) -> f64 {
        (self.u - other.u).hypot(self.v - other.v)
    }
}

/// `(x, y) ↦ (y, x + y)`.
pub fn to_slowfast(s: &State) -> SfState {
    SfState::new(s.y, s.x + s.y)
}

/// Inverse map `(u, v) ↦ (v − u, u)`; requires `v ≥ u ≥ 0`.
pub fn from_slowfast(sf: &SfState) -> Result<State> {
    if !(sf.u >= 0.0 && sf.v >= sf.u) {
        return Err(Error::invalid(
            "sf_state",
            format!("need v ≥ u ≥ 0, got (u, v) = ({}, {})", sf.u, sf.v),
        ));
    }
    Ok(State::new(sf.v - sf.u, sf.u))
}

/// Drift and diffusion as a pair of vectors.
pub type Coefficients = ([f64; 2], [f64; 2]);

/// Slow-time system, Stratonovich coefficients.
pub fn slow_system_drift_diffusion(sp: &SlowFastParams, sf: &SfState) -> Coefficients {
    let SlowFastParams { a, epsilon, sigma } = *sp;
    let w = sf.v - sf.u;
    let drift = [(a * w - epsilon * sf.u * w * w) / epsilon, a - w];
    (drift, [sigma * w, 0.0])
}

/// Fast-time system, Stratonovich coefficients. `ε = 0` is accepted here
/// and gives the layer problem.
pub fn fast_system_drift_diffusion(sp: &SlowFastParams, sf: &SfState) -> Coefficients {
    fast_coefficients(sp.a, sp.epsilon, sp.sigma, sf)
}

fn fast_coefficients(a: f64, epsilon: f64, sigma: f64, sf: &SfState) -> Coefficients {
    let w = sf.v - sf.u;
    let drift = [a * w - epsilon * sf.u * w * w, epsilon * (a - w)];
    (drift, [epsilon.sqrt() * sigma * w, 0.0])
}

/// Layer problem `(a(v−u), 0)`: the fast system at `ε = 0`.
pub fn layer_drift(a: f64, sf: &SfState) -> [f64; 2] {
    fast_coefficients(a, 0.0, 0.0, sf).0
}

/// Jacobian of the layer vector field, `[[−a, a], [0, 0]]`, the same at
/// every point.
pub fn layer_jacobian(a: f64) -> Mat2 {
    Mat2::new(-a, a, 0.0, 0.0)
}

/// Wong–Zakai correction for a diffusion of the form `(k·(v−u), 0)`:
/// `½ (∂g/∂u · g_u + ∂g/∂v · g_v) = (−k²(v−u)/2, 0)`.
fn wong_zakai(k: f64, sf: &SfState) -> [f64; 2] {
    let g_u = k * (sf.v - sf.u);
    let dgu_du = -k;
    let dgu_dv = k;
    let g_v = 0.0;
    [0.5 * (dgu_du * g_u + dgu_dv * g_v), 0.0]
}

/// Itô drift of the slow-time system.
pub fn slow_ito_drift(sp: &SlowFastParams, sf: &SfState) -> [f64; 2] {
    let (f, _) = slow_system_drift_diffusion(sp, sf);
    let c = wong_zakai(sp.sigma, sf);
    [f[0] + c[0], f[1] + c[1]]
}

/// Itô drift of the fast-time system.
pub fn fast_ito_drift(sp: &SlowFastParams, sf: &SfState) -> [f64; 2] {
    let (f, _) = fast_system_drift_diffusion(sp, sf);
    let c = wong_zakai(sp.epsilon.sqrt() * sp.sigma, sf);
    [f[0] + c[0], f[1] + c[1]]
}

/// Exact solution of the reduced problem from `(u0, u0)`: both coordinates
/// move as `u0 + a·t`.
pub fn reduced_flow(sp: &SlowFastParams, u0: f64, t: f64) -> SfState {
    let z = u0 + sp.a * t;
    SfState::new(z, z)
}

/// Euclidean distance to the diagonal `S₀`.
pub fn critical_manifold_distance(sf: &SfState) -> f64 {
    (sf.v - sf.u).abs() / std::f64::consts::SQRT_2
}

/// `v` on the nullcline `N` above `u`.
pub fn nullcline_v(sp: &SlowFastParams, u: f64) -> Result<f64> {
    if !(u > 0.0) {
        return Err(Error::invalid("u", format!("nullcline is defined for u > 0, got {u}")));
    }
    Ok(u + sp.a / (sp.epsilon * u))
}

/// Time-scale regimes of the relaxation cycle in transformed coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Regime {
    /// Ultra-slow drift along the critical manifold.
    I,
    /// Fast leftward jump after crossing the nullcline.
    II,
    /// Slow drift along the nullcline.
    III,
    /// Fast return towards the critical manifold.
    IV,
}

impl Regime {
    pub fn label(&self) -> &'static str {
        match self {
            Regime::I => "I",
            Regime::II => "II",
            Regime::III => "III",
            Regime::IV => "IV",
        }
    }
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

/// Knobs of [`classify_regime`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegimeThresholds {
    /// Distance to `S₀` below which a point counts as on the critical manifold.
    pub delta_s: f64,
    /// Vertical distance `|v − N(u)|` below which a point counts as on the nullcline.
    pub delta_n: f64,
    /// Slow-time `|du/dt|` above which motion counts as fast.
    pub fast_cutoff: f64,
}

impl Default for RegimeThresholds {
    fn default() -> Self {
        RegimeThresholds {
            delta_s: 0.1,
            delta_n: 0.1,
            fast_cutoff: 1.0,
        }
    }
}

/// Assigns exactly one regime to every point.
///
/// * I: within `delta_s` of `S₀` and not above `N` (the flow still moves right);
/// * III: within `delta_n` of `N`, otherwise;
/// * II: above `N` with leftward deterministic slow drift faster than `fast_cutoff`;
/// * IV: everything else.
pub fn classify_regime(sp: &SlowFastParams, sf: &SfState, th: &RegimeThresholds) -> Regime {
    let nullcline = nullcline_v(sp, sf.u).ok();
    let above_n = nullcline.is_some_and(|n| sf.v > n);
    if critical_manifold_distance(sf) <= th.delta_s && !above_n {
        return Regime::I;
    }
    if nullcline.is_some_and(|n| (sf.v - n).abs() <= th.delta_n) {
        return Regime::III;
    }
    let drift_u = slow_system_drift_diffusion(sp, sf).0[0];
    if above_n && drift_u < -th.fast_cutoff {
        Regime::II
    } else {
        Regime::IV
    }
}

/// Sampled solution in transformed coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct SfTrajectory {
    pub times: Vec<f64>,
    pub states: Vec<SfState>,
    pub clamp_events: usize,
}

impl SfTrajectory {
    pub fn from_original(traj: &integrator::Trajectory) -> Self {
        SfTrajectory {
            times: traj.times.clone(),
            states: traj.states.iter().map(to_slowfast).collect(),
            clamp_events: traj.clamp_events,
        }
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// CSV with header `t,u,v,regime`.
    pub fn write_csv<W: Write>(
        &self,
        mut w: W,
        sp: &SlowFastParams,
        th: &RegimeThresholds,
    ) -> std::io::Result<()> {
        writeln!(w, "t,u,v,regime")?;
        for (t, s) in self.times.iter().zip(&self.states) {
            writeln!(w, "{t},{},{},{}", s.u, s.v, classify_regime(sp, s, th))?;
        }
        Ok(())
    }
}

/// First time the sign of `v − N(u)` changes, by linear interpolation
/// between the bracketing samples. Points with `u ≤ 0` count as below `N`.
pub fn hitting_time_nullcline(sp: &SlowFastParams, traj: &SfTrajectory) -> Option<f64> {
    let gap = |s: &SfState| -> f64 {
        match nullcline_v(sp, s.u) {
            Ok(n) => s.v - n,
            Err(_) => f64::NEG_INFINITY,
        }
    };
    let first = gap(traj.states.first()?);
    if first == 0.0 {
        return Some(traj.times[0]);
    }
    let mut prev = first;
    for k in 1..traj.len() {
        let cur = gap(&traj.states[k]);
        if cur == 0.0 || (cur > 0.0) != (first > 0.0) {
            let (t0, t1) = (traj.times[k - 1], traj.times[k]);
            if !prev.is_finite() || !cur.is_finite() {
                return Some(t1);
            }
            return Some(t0 + (t1 - t0) * prev / (prev - cur));
        }
        prev = cur;
    }
    None
}

/// Sampled polyline of the nullcline for `u` in `[u_min, u_max]` (`u_min > 0`).
pub fn nullcline_polyline(sp: &SlowFastParams, u_min: f64, u_max: f64, n: usize) -> Result<Vec<SfState>> {
    if n < 2 || !(u_min > 0.0 && u_max > u_min) {
        return Err(Error::invalid("polyline", "need n ≥ 2 and 0 < u_min < u_max"));
    }
    (0..n)
        .map(|k| {
            let u = u_min + (u_max - u_min) * k as f64 / (n - 1) as f64;
            Ok(SfState::new(u, nullcline_v(sp, u)?))
        })
        .collect()
}

/// Sampled polyline of the critical manifold `u = v`.
pub fn critical_manifold_polyline(u_min: f64, u_max: f64, n: usize) -> Result<Vec<SfState>> {
    if n < 2 || !(u_max > u_min) {
        return Err(Error::invalid("polyline", "need n ≥ 2 and u_min < u_max"));
    }
    Ok((0..n)
        .map(|k| {
            let u = u_min + (u_max - u_min) * k as f64 / (n - 1) as f64;
            SfState::new(u, u)
        })
        .collect())
}

/// Applies the integrator's positivity floor in original coordinates.
fn floor_sf(sf: SfState) -> (SfState, bool) {
    let mut s = State::new(sf.v - sf.u, sf.u);
    let clamped = apply_floor(&mut s);
    if clamped {
        (to_slowfast(&s), true)
    } else {
        (sf, false)
    }
}

fn em_integrate(
    sf0: SfState,
    path: &NoisePath,
    t_end: f64,
    drift: impl Fn(&SfState) -> [f64; 2],
    noise_u: impl Fn(&SfState) -> f64,
) -> Result<SfTrajectory> {
    let steps = path.steps_for(t_end)?;
    let h = path.h();
    let mut traj = SfTrajectory {
        times: Vec::with_capacity(steps + 1),
        states: Vec::with_capacity(steps + 1),
        clamp_events: 0,
    };
    traj.times.push(0.0);
    traj.states.push(sf0);
    let mut s = sf0;
    for (n, &dw) in path.increments()[..steps].iter().enumerate() {
        let f = drift(&s);
        let next = SfState::new(s.u + h * f[0] + noise_u(&s) * dw, s.v + h * f[1]);
        check_blow_up(&State::new(next.u, next.v)).map_err(|e| locate(e, n + 1, h))?;
        let (next, clamped) = floor_sf(next);
        traj.clamp_events += clamped as usize;
        s = next;
        traj.times.push((n + 1) as f64 * h);
        traj.states.push(s);
    }
    Ok(traj)
}

/// Euler–Maruyama on the Itô form of the slow-time system.
pub fn integrate_slow(sp: &SlowFastParams, sf0: SfState, path: &NoisePath, t_end: f64) -> Result<SfTrajectory> {
    em_integrate(sf0, path, t_end, |s| slow_ito_drift(sp, s), |s| sp.sigma * (s.v - s.u))
}

/// Euler–Maruyama on the Itô form of the fast-time system driven by `W̃`;
/// the returned times are fast times `τ`.
pub fn integrate_fast(sp: &SlowFastParams, sf0: SfState, path: &RescaledPath, tau_end: f64) -> Result<SfTrajectory> {
    let fast = path.to_noise_path();
    let k = sp.epsilon.sqrt() * sp.sigma;
    em_integrate(sf0, &fast, tau_end, |s| fast_ito_drift(sp, s), move |s| k * (s.v - s.u))
}

/// Integrates the original Itô system and the transformed slow system with
/// the same increments; returns the largest distance between the mapped
/// original trajectory and the transformed one.
pub fn transform_consistency_check(p: &Params, s0: State, path: &NoisePath, t_end: f64) -> Result<f64> {
    let original = integrator::integrate(p, s0, path, t_end)?;
    let sp = SlowFastParams::from_params(p);
    let transformed = integrate_slow(&sp, to_slowfast(&s0), path, t_end)?;
    Ok(original
        .states
        .iter()
        .zip(&transformed.states)
        .map(|(o, t)| to_slowfast(o).distance(t))
        .fold(0.0, f64::max))
}
