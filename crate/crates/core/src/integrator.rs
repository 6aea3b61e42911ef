//! Euler–Maruyama integration of the Itô Brusselator.
//!
//! One step is `s + h·f(s) + g(s)·ΔW` with `f` the Itô drift and `g` the
//! diffusion vector. Exact solutions stay in the positive quadrant but the
//! scheme can overshoot, so every step is followed by a floor
//! (`x ≥ X_FLOOR`, `y ≥ 0`); floor hits are counted in the trajectory.

use std::io::Write;

use crate::error::{Error, Result};
use crate::model::{diffusion, ito_drift, Params, State};
use crate::noise::NoisePath;

pub const X_FLOOR: f64 = 1e-12;
/// Any coordinate above this magnitude aborts the integration.
pub const BLOW_UP_LIMIT: f64 = 1e9;
pub const DEFAULT_STEP: f64 = 1e-3;

/// Result of a single step: the new state and whether the floor was applied.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Step {
    pub state: State,
    pub clamped: bool,
}

/// Applies the positivity floor; returns whether anything changed.
pub(crate) fn apply_floor(s: &mut State) -> bool {
    let mut clamped = false;
    if s.x < X_FLOOR {
        s.x = X_FLOOR;
        clamped = true;
    }
    if s.y < 0.0 {
        s.y = 0.0;
        clamped = true;
    }
    clamped
}

pub(crate) fn check_blow_up(s: &State) -> Result<()> {
    if s.is_finite() && s.x.abs() <= BLOW_UP_LIMIT && s.y.abs() <= BLOW_UP_LIMIT {
        Ok(())
    } else {
        Err(Error::BlowUp {
            step: 0,
            time: 0.0,
            x: s.x,
            y: s.y,
        })
    }
}

/// Attaches the step index and time to a blow-up raised by a single step.
pub(crate) fn locate(err: Error, step: usize, h: f64) -> Error {
    match err {
        Error::BlowUp { x, y, .. } => Error::BlowUp {
            step,
            time: step as f64 * h,
            x,
            y,
        },
        other => other,
    }
}

/// One Euler–Maruyama step followed by the positivity floor.
pub fn em_step(p: &Params, s: &State, dw: f64, h: f64) -> Result<Step> {
    if !(h > 0.0) {
        return Err(Error::invalid("h", format!("step size must be positive, got {h}")));
    }
    let f = ito_drift(p, s);
    let g = diffusion(p, s);
    let mut next = State::new(s.x + h * f[0] + g[0] * dw, s.y + h * f[1] + g[1] * dw);
    check_blow_up(&next)?;
    let clamped = apply_floor(&mut next);
    Ok(Step {
        state: next,
        clamped,
    })
}

/// Sampled solution on the grid `tₙ = n·h`, every `stride` steps.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<State>,
    /// Number of steps at which the positivity floor was applied.
    pub clamp_events: usize,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn last(&self) -> Option<&State> {
        self.states.last()
    }

    pub fn xs(&self) -> Vec<f64> {
        self.states.iter().map(|s| s.x).collect()
    }

    /// CSV with header `t,x,y`; floats use shortest round-trip formatting.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "t,x,y")?;
        for (t, s) in self.times.iter().zip(&self.states) {
            writeln!(w, "{t},{},{}", s.x, s.y)?;
        }
        Ok(())
    }
}

/// Options for [`integrate_with`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IntegrateOptions {
    /// Record every `stride`-th state (the initial state is always recorded).
    pub stride: usize,
}

impl Default for IntegrateOptions {
    fn default() -> Self {
        IntegrateOptions { stride: 1 }
    }
}

pub fn integrate(p: &Params, s0: State, path: &NoisePath, t_end: f64) -> Result<Trajectory> {
    integrate_with(p, s0, path, t_end, IntegrateOptions::default())
}

/// Integrates from `t = 0` to `t_end` consuming the path's increments in order.
///
/// States are recorded at steps `0, stride, 2·stride, …` up to the final
/// step; the final state is included only when it falls on the stride.
pub fn integrate_with(
    p: &Params,
    s0: State,
    path: &NoisePath,
    t_end: f64,
    opts: IntegrateOptions,
) -> Result<Trajectory> {
    if opts.stride == 0 {
        return Err(Error::invalid("stride", "must be at least 1"));
    }
    let steps = path.steps_for(t_end)?;
    let h = path.h();
    let capacity = steps / opts.stride + 1;
    let mut traj = Trajectory {
        times: Vec::with_capacity(capacity),
        states: Vec::with_capacity(capacity),
        clamp_events: 0,
    };
    traj.times.push(0.0);
    traj.states.push(s0);

    let mut s = s0;
    for (n, &dw) in path.increments()[..steps].iter().enumerate() {
        let step = em_step(p, &s, dw, h).map_err(|e| locate(e, n + 1, h))?;
        s = step.state;
        traj.clamp_events += step.clamped as usize;
        if (n + 1) % opts.stride == 0 {
            traj.times.push((n + 1) as f64 * h);
            traj.states.push(s);
        }
    }
    Ok(traj)
}

/// Distance between two trajectories sampled on the same grid.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceSeries {
    pub times: Vec<f64>,
    pub d: Vec<f64>,
}

impl DistanceSeries {
    pub fn between(first: &Trajectory, second: &Trajectory) -> Self {
        DistanceSeries {
            times: first.times.clone(),
            d: first
                .states
                .iter()
                .zip(&second.states)
                .map(|(a, b)| a.distance(b))
                .collect(),
        }
    }

    pub fn initial(&self) -> f64 {
        self.d[0]
    }

    pub fn last(&self) -> f64 {
        *self.d.last().expect("distance series is never empty")
    }

    pub fn max(&self) -> f64 {
        self.d.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Two-point motion: both initial conditions driven by the same increments.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoPoint {
    pub first: Trajectory,
    pub second: Trajectory,
    pub distance: DistanceSeries,
}

impl TwoPoint {
    /// CSV with header `t,x0,y0,x1,y1,d`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "t,x0,y0,x1,y1,d")?;
        for (((t, a), b), d) in self
            .first
            .times
            .iter()
            .zip(&self.first.states)
            .zip(&self.second.states)
            .zip(&self.distance.d)
        {
            writeln!(w, "{t},{},{},{},{},{d}", a.x, a.y, b.x, b.y)?;
        }
        Ok(())
    }
}

pub fn two_point(
    p: &Params,
    s0: State,
    s1: State,
    path: &NoisePath,
    t_end: f64,
) -> Result<TwoPoint> {
    two_point_with(p, s0, s1, path, t_end, IntegrateOptions::default())
}

pub fn two_point_with(
    p: &Params,
    s0: State,
    s1: State,
    path: &NoisePath,
    t_end: f64,
    opts: IntegrateOptions,
) -> Result<TwoPoint> {
    let first = integrate_with(p, s0, path, t_end, opts)?;
    let second = integrate_with(p, s1, path, t_end, opts)?;
    let distance = DistanceSeries::between(&first, &second);
    Ok(TwoPoint {
        first,
        second,
        distance,
    })
}
