//! Gillespie direct-method simulation of the Brusselator reaction network.
//!
//! ```text
//! R₁: A → X          α₁ = γ₁ A
//! R₂: B + X → Y + D  α₂ = γ₂ V⁻¹ B X
//! R₃: 2X + Y → 3X    α₃ = γ₃ V⁻² X(X−1) Y
//! R₄: X → E          α₄ = γ₄ X
//! ```
//!
//! `A` and `B` are infinite pools; `D` and `E` only accumulate.

use std::io::Write;

use crate::error::{Error, Result};
use crate::noise::CounterRng;

pub const DEFAULT_EVENT_CAP: usize = 100_000_000;

/// Molecule counts `(X, Y, D, E)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct JumpState {
    pub x: u64,
    pub y: u64,
    pub d: u64,
    pub e: u64,
}

impl JumpState {
    pub const fn new(x: u64, y: u64, d: u64, e: u64) -> Self {
        JumpState { x, y, d, e }
    }

    fn counts(&self) -> [u64; 4] {
        [self.x, self.y, self.d, self.e]
    }

    /// Applies `ν_k`; fails if a count would go negative.
    pub fn apply(&self, reaction: usize) -> Option<JumpState> {
        let nu = STATE_CHANGE[reaction];
        let mut out = [0u64; 4];
        for (slot, (c, dv)) in out.iter_mut().zip(self.counts().iter().zip(nu)) {
            *slot = c.checked_add_signed(dv)?;
        }
        Some(JumpState::new(out[0], out[1], out[2], out[3]))
    }
}

const STATE_CHANGE: [[i64; 4]; 4] = [
    [1, 0, 0, 0],
    [-1, 1, 1, 0],
    [1, -1, 0, 0],
    [-1, 0, 0, 1],
];

/// State-change vectors `ν₁ … ν₄` over `(X, Y, D, E)`.
pub fn state_change_vectors() -> [[i64; 4]; 4] {
    STATE_CHANGE
}

/// Rate constants, pool sizes and system volume.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateConstants {
    gamma: [f64; 4],
    a_pool: u64,
    b_pool: u64,
    volume: f64,
}

impl RateConstants {
    pub fn new(gamma: [f64; 4], a_pool: u64, b_pool: u64, volume: f64) -> Result<Self> {
        if gamma.iter().any(|g| !(*g > 0.0 && g.is_finite())) {
            return Err(Error::invalid("gamma", format!("rates must be positive, got {gamma:?}")));
        }
        if a_pool == 0 || b_pool == 0 {
            return Err(Error::invalid("pool", "A and B must be positive"));
        }
        if !(volume > 0.0 && volume.is_finite()) {
            return Err(Error::invalid("V", format!("volume must be positive, got {volume}")));
        }
        Ok(RateConstants {
            gamma,
            a_pool,
            b_pool,
            volume,
        })
    }

    /// Constants matched to the rate equation with parameters `(a, b)`:
    /// `γᵢ = 1`, `A = round(aV)`, `B = round(bV)`, so that `a = γ₁A/V` and
    /// `b = γ₂B/V` up to rounding of the pools.
    pub fn matched(a: f64, b: f64, volume: f64) -> Result<Self> {
        RateConstants::new([1.0; 4], (a * volume).round() as u64, (b * volume).round() as u64, volume)
    }

    pub fn gamma(&self) -> [f64; 4] {
        self.gamma
    }

    pub fn a_pool(&self) -> u64 {
        self.a_pool
    }

    pub fn b_pool(&self) -> u64 {
        self.b_pool
    }

    pub fn volume(&self) -> f64 {
        self.volume
    }

    /// Rate-equation parameters `(a, b) = (γ₁A/V, γ₂B/V)`; exact when `γ₃ = γ₄ = 1`.
    pub fn rre_params(&self) -> (f64, f64) {
        (
            self.gamma[0] * self.a_pool as f64 / self.volume,
            self.gamma[1] * self.b_pool as f64 / self.volume,
        )
    }
}

/// Mass-action propensities `(α₁, α₂, α₃, α₄)`.
pub fn propensities(rc: &RateConstants, z: &JumpState) -> [f64; 4] {
    let [g1, g2, g3, g4] = rc.gamma;
    let v = rc.volume;
    let x = z.x as f64;
    let x_pairs = if z.x >= 1 { x * (x - 1.0) } else { 0.0 };
    [
        g1 * rc.a_pool as f64,
        g2 * rc.b_pool as f64 * x / v,
        g3 * x_pairs * z.y as f64 / (v * v),
        g4 * x,
    ]
}

/// One reaction of the direct method.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Reaction {
    pub waiting_time: f64,
    /// Zero-based channel index.
    pub channel: usize,
    pub state: JumpState,
}

/// Draws the waiting time `−ln(u₁)/α₀` and selects channel `k` with
/// probability `α_k/α₀` from `u₂`.
pub fn direct_method_step(rc: &RateConstants, z: &JumpState, rng: &mut CounterRng) -> Result<Reaction> {
    let alpha = propensities(rc, z);
    let total: f64 = alpha.iter().sum();
    if !(total > 0.0) {
        return Err(Error::Absorbed);
    }
    let waiting_time = -rng.next_uniform().ln() / total;
    let target = rng.next_uniform() * total;
    let mut acc = 0.0;
    let mut channel = 3;
    for (k, a) in alpha.iter().enumerate() {
        acc += a;
        if target < acc {
            channel = k;
            break;
        }
    }
    // rounding in the cumulative sum can leave target ≥ acc; fall back to the
    // last channel with nonzero propensity
    if alpha[channel] == 0.0 {
        channel = alpha.iter().rposition(|&a| a > 0.0).expect("total > 0");
    }
    let state = z
        .apply(channel)
        .expect("channels with nonzero propensity keep counts nonnegative");
    Ok(Reaction {
        waiting_time,
        channel,
        state,
    })
}

/// One point of a jump path: the state entered at `t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JumpEvent {
    pub t: f64,
    /// `None` for the initial state.
    pub channel: Option<usize>,
    pub state: JumpState,
}

/// Piecewise-constant path `(Tₙ, Zₙ)` on `[0, t_end]`.
#[derive(Debug, Clone, PartialEq)]
pub struct JumpPath {
    pub events: Vec<JumpEvent>,
    pub t_end: f64,
}

impl JumpPath {
    /// State at time `t` (right-continuous).
    pub fn state_at(&self, t: f64) -> JumpState {
        let idx = self.events.partition_point(|e| e.t <= t);
        self.events[idx.saturating_sub(1)].state
    }

    /// Samples the path on `0, dt, 2dt, …, ≤ t_end`.
    pub fn resample(&self, dt: f64) -> Vec<(f64, JumpState)> {
        let n = (self.t_end / dt + 1e-9).floor() as usize;
        let mut out = Vec::with_capacity(n + 1);
        let mut idx = 0;
        for k in 0..=n {
            let t = k as f64 * dt;
            while idx + 1 < self.events.len() && self.events[idx + 1].t <= t {
                idx += 1;
            }
            out.push((t, self.events[idx].state));
        }
        out
    }

    /// Time average of `X/V` over `[t0, t_end]`.
    pub fn time_average_x(&self, t0: f64, volume: f64) -> f64 {
        let mut integral = 0.0;
        for (k, ev) in self.events.iter().enumerate() {
            let start = ev.t.max(t0);
            let end = self.events.get(k + 1).map_or(self.t_end, |n| n.t).min(self.t_end);
            if end > start {
                integral += ev.state.x as f64 * (end - start);
            }
        }
        integral / ((self.t_end - t0) * volume)
    }

    /// Event CSV with header `t,reaction,X,Y,D,E`; reactions are numbered
    /// 1–4 and the initial row has reaction 0.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "t,reaction,X,Y,D,E")?;
        for ev in &self.events {
            let r = ev.channel.map_or(0, |c| c + 1);
            let s = ev.state;
            writeln!(w, "{},{r},{},{},{},{}", ev.t, s.x, s.y, s.d, s.e)?;
        }
        Ok(())
    }
}

pub fn simulate_jump(rc: &RateConstants, z0: JumpState, t_end: f64, seed: u64) -> Result<JumpPath> {
    simulate_jump_capped(rc, z0, t_end, seed, DEFAULT_EVENT_CAP)
}

/// Direct-method path up to `t_end`, aborting after `cap` reactions.
pub fn simulate_jump_capped(
    rc: &RateConstants,
    z0: JumpState,
    t_end: f64,
    seed: u64,
    cap: usize,
) -> Result<JumpPath> {
    if !(t_end > 0.0 && t_end.is_finite()) {
        return Err(Error::invalid("t_end", format!("must be positive, got {t_end}")));
    }
    let mut rng = CounterRng::new(seed);
    let mut events = vec![JumpEvent {
        t: 0.0,
        channel: None,
        state: z0,
    }];
    let mut t = 0.0;
    let mut z = z0;
    loop {
        let r = direct_method_step(rc, &z, &mut rng)?;
        t += r.waiting_time;
        if t > t_end {
            break;
        }
        if events.len() > cap {
            return Err(Error::EventCap { cap, t_end });
        }
        z = r.state;
        events.push(JumpEvent {
            t,
            channel: Some(r.channel),
            state: z,
        });
    }
    Ok(JumpPath { events, t_end })
}
