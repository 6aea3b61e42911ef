//! Finite-time Lyapunov exponents.
//!
//! The state and the fundamental matrix `Φ` of the variational equation are
//! advanced together by Euler–Maruyama on the Itô system
//!
//! ```text
//! dΦ = (J(φ) + ½B²) Φ dt + B Φ dW,    B = σ [[−1, 0], [1, 0]],   Φ₀ = I
//! ```
//!
//! using the same increments for both. `Φ` is kept as `exp(log_scale) ·
//! entries` and renormalized whenever the spectral norm of `entries` leaves
//! `[1e−6, 1e6]`; since the operator norm is homogeneous the exponent
//! `λ^T = (log_scale + ln‖entries‖)/T` is unaffected.

use std::io::Write;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::integrator::{check_blow_up, em_step, locate};
use crate::linalg::{spectral_norm_2x2, Mat2};
use crate::model::{jacobian, Params, State};
use crate::noise::NoisePath;

pub use crate::linalg::spectral_norm_2x2 as spectral_norm;

pub const RENORM_LOWER: f64 = 1e-6;
pub const RENORM_UPPER: f64 = 1e6;

/// Noise matrix `[[−1, 0], [1, 0]]` of the variational equation (to be scaled by σ).
const NOISE_SHAPE: Mat2 = Mat2::new(-1.0, 0.0, 1.0, 0.0);

/// Itô drift matrix of the variational equation applied to `phi`:
/// `(J(s) + (σ²/2)[[1, 0], [−1, 0]]) Φ`.
pub fn variational_drift(p: &Params, s: &State, phi: &Mat2) -> Mat2 {
    let half_s2 = 0.5 * p.sigma() * p.sigma();
    let correction = Mat2::new(half_s2, 0.0, -half_s2, 0.0);
    (jacobian(p, s) + correction) * *phi
}

/// Diffusion matrix `σ[[−1, 0], [1, 0]] Φ`.
pub fn variational_diffusion(p: &Params, phi: &Mat2) -> Mat2 {
    NOISE_SHAPE.scale(p.sigma()) * *phi
}

/// Renormalization policy for the tangent matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Renormalization {
    /// Rescale when the spectral norm leaves `[lower, upper]`.
    Bounded { lower: f64, upper: f64 },
    Disabled,
}

impl Default for Renormalization {
    fn default() -> Self {
        Renormalization::Bounded {
            lower: RENORM_LOWER,
            upper: RENORM_UPPER,
        }
    }
}

/// Fundamental matrix stored as `exp(log_scale) · entries`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TangentMatrix {
    pub entries: Mat2,
    pub log_scale: f64,
}

impl Default for TangentMatrix {
    fn default() -> Self {
        TangentMatrix {
            entries: Mat2::IDENTITY,
            log_scale: 0.0,
        }
    }
}

impl TangentMatrix {
    /// `ln ‖Φ‖` of the true (unscaled) matrix.
    pub fn log_norm(&self) -> f64 {
        self.log_scale + spectral_norm_2x2(&self.entries).ln()
    }

    /// The unscaled matrix; overflows for long horizons, meant for checks.
    pub fn full(&self) -> Mat2 {
        self.entries.scale(self.log_scale.exp())
    }

    pub fn renormalize(&mut self, policy: Renormalization) {
        if let Renormalization::Bounded { lower, upper } = policy {
            let norm = spectral_norm_2x2(&self.entries);
            if norm > 0.0 && !(lower..=upper).contains(&norm) {
                self.entries = self.entries.scale(norm.recip());
                self.log_scale += norm.ln();
            }
        }
    }
}

/// State and tangent matrix advanced in lock step.
#[derive(Debug, Clone, Copy)]
pub struct Tangent {
    pub state: State,
    pub phi: TangentMatrix,
    policy: Renormalization,
}

impl Tangent {
    pub fn new(s0: State, policy: Renormalization) -> Self {
        Tangent {
            state: s0,
            phi: TangentMatrix::default(),
            policy,
        }
    }

    /// One Euler–Maruyama step of the coupled system; the Jacobian is taken
    /// at the pre-step state.
    pub fn step(&mut self, p: &Params, dw: f64, h: f64) -> Result<()> {
        let phi = self.phi.entries;
        let next_phi =
            phi + variational_drift(p, &self.state, &phi).scale(h) + variational_diffusion(p, &phi).scale(dw);
        if !next_phi.is_finite() {
            return Err(Error::BlowUp {
                step: 0,
                time: 0.0,
                x: self.state.x,
                y: self.state.y,
            });
        }
        let next = em_step(p, &self.state, dw, h)?;
        check_blow_up(&next.state)?;
        self.state = next.state;
        self.phi.entries = next_phi;
        self.phi.renormalize(self.policy);
        Ok(())
    }
}

fn check_horizon(t: f64) -> Result<()> {
    if t > 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid("T", format!("horizon must be positive, got {t}")))
    }
}

/// `λ^T = (1/T) ln ‖Φ_T‖` along the trajectory from `s0`.
pub fn ftle(p: &Params, s0: State, path: &NoisePath, horizon: f64) -> Result<f64> {
    ftle_with(p, s0, path, horizon, Renormalization::default())
}

pub fn ftle_with(
    p: &Params,
    s0: State,
    path: &NoisePath,
    horizon: f64,
    policy: Renormalization,
) -> Result<f64> {
    Ok(ftle_series_with(p, s0, path, &[horizon], policy)?[0].1)
}

/// Fundamental matrix at `horizon` (without renormalization).
pub fn fundamental_matrix(p: &Params, s0: State, path: &NoisePath, horizon: f64) -> Result<(State, Mat2)> {
    check_horizon(horizon)?;
    let steps = path.steps_for(horizon)?;
    let mut tangent = Tangent::new(s0, Renormalization::Disabled);
    for (n, &dw) in path.increments()[..steps].iter().enumerate() {
        tangent.step(p, dw, path.h()).map_err(|e| locate(e, n + 1, path.h()))?;
    }
    Ok((tangent.state, tangent.phi.full()))
}

/// `λ^T` at each requested horizon from a single co-integration pass.
pub fn ftle_series(p: &Params, s0: State, path: &NoisePath, horizons: &[f64]) -> Result<Vec<(f64, f64)>> {
    ftle_series_with(p, s0, path, horizons, Renormalization::default())
}

pub fn ftle_series_with(
    p: &Params,
    s0: State,
    path: &NoisePath,
    horizons: &[f64],
    policy: Renormalization,
) -> Result<Vec<(f64, f64)>> {
    if horizons.is_empty() {
        return Err(Error::invalid("T", "no horizons requested"));
    }
    let mut checkpoints = Vec::with_capacity(horizons.len());
    let mut previous = 0;
    for &t in horizons {
        check_horizon(t)?;
        let steps = path.steps_for(t)?;
        if steps < previous {
            return Err(Error::invalid("T", "horizons must be increasing"));
        }
        if steps == 0 {
            return Err(Error::invalid("T", format!("horizon {t} is shorter than one step")));
        }
        previous = steps;
        checkpoints.push(steps);
    }

    let h = path.h();
    let mut tangent = Tangent::new(s0, policy);
    let mut out = Vec::with_capacity(horizons.len());
    let mut done = 0;
    for (&t, &steps) in horizons.iter().zip(&checkpoints) {
        for n in done..steps {
            tangent
                .step(p, path.increments()[n], h)
                .map_err(|e| locate(e, n + 1, h))?;
        }
        done = steps;
        out.push((t, tangent.phi.log_norm() / t));
    }
    Ok(out)
}

/// Rectangular grid of initial conditions; points sit at cell centres.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub x_range: (f64, f64),
    pub y_range: (f64, f64),
    pub nx: usize,
    pub ny: usize,
}

impl GridSpec {
    /// Window used for `a = 1` landscapes: `[0.05, 4] × [0.05, 6]`, 100×100.
    pub fn default_window() -> Self {
        GridSpec {
            x_range: (0.05, 4.0),
            y_range: (0.05, 6.0),
            nx: 100,
            ny: 100,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.nx == 0 || self.ny == 0 {
            return Err(Error::invalid("grid", "dimensions must be positive"));
        }
        let (x0, x1) = self.x_range;
        let (y0, y1) = self.y_range;
        if !(x0 >= 0.0 && y0 >= 0.0 && x1 > x0 && y1 > y0 && x1.is_finite() && y1.is_finite()) {
            return Err(Error::invalid(
                "grid",
                format!("window {:?} × {:?} must be a nonempty box in the positive quadrant", self.x_range, self.y_range),
            ));
        }
        Ok(())
    }

    pub fn x(&self, i: usize) -> f64 {
        let (lo, hi) = self.x_range;
        lo + (i as f64 + 0.5) * (hi - lo) / self.nx as f64
    }

    pub fn y(&self, j: usize) -> f64 {
        let (lo, hi) = self.y_range;
        lo + (j as f64 + 0.5) * (hi - lo) / self.ny as f64
    }

    /// Row-major cell index: rows run along y, columns along x.
    pub fn point(&self, index: usize) -> State {
        State::new(self.x(index % self.nx), self.y(index / self.nx))
    }

    pub fn cells(&self) -> usize {
        self.nx * self.ny
    }
}

/// FTLE landscape for one noise realization and horizon.
#[derive(Debug, Clone, PartialEq)]
pub struct FtleField {
    pub grid: GridSpec,
    pub horizon: f64,
    pub seed: u64,
    /// Row-major values; NaN marks cells whose integration blew up.
    pub values: Vec<f64>,
}

impl FtleField {
    pub fn missing(&self) -> usize {
        self.values.iter().filter(|v| v.is_nan()).count()
    }

    /// Fraction of non-missing cells with `λ^T > 0`.
    pub fn positive_fraction(&self) -> f64 {
        let (pos, total) = self
            .values
            .iter()
            .filter(|v| !v.is_nan())
            .fold((0usize, 0usize), |(p, t), &v| (p + (v > 0.0) as usize, t + 1));
        if total == 0 {
            0.0
        } else {
            pos as f64 / total as f64
        }
    }

    /// CSV with header `x,y,ftle`, row-major.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "x,y,ftle")?;
        for (k, v) in self.values.iter().enumerate() {
            let s = self.grid.point(k);
            writeln!(w, "{},{},{v}", s.x, s.y)?;
        }
        Ok(())
    }
}

/// FTLE at every grid point, all cells sharing `path`.
///
/// Cells run in parallel on the current rayon pool; each value lands in its
/// own slot so the result does not depend on the thread count.
pub fn ftle_field(p: &Params, grid: &GridSpec, path: &NoisePath, horizon: f64) -> Result<FtleField> {
    grid.validate()?;
    check_horizon(horizon)?;
    path.steps_for(horizon)?;
    let values = (0..grid.cells())
        .into_par_iter()
        .map(|k| match ftle(p, grid.point(k), path, horizon) {
            Ok(v) if v.is_finite() => Ok(v),
            Ok(_) | Err(Error::BlowUp { .. }) => Ok(f64::NAN),
            Err(e) => Err(e),
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(FtleField {
        grid: *grid,
        horizon,
        seed: path.seed(),
        values,
    })
}

/// Minimum series length accepted by [`dominant_frequency`].
pub const MIN_SPECTRUM_LEN: usize = 256;

/// Frequency (cycles per time unit) of the largest nonzero-frequency bin
/// of the DFT of the mean-removed series.
///
/// The series is zero-padded to the next power of two of at least four times
/// its length before the transform. Without this the fundamental of a
/// relaxation oscillation can lose up to a third of its magnitude to
/// scalloping when its period does not divide the record, and the second
/// harmonic wins. Frequencies below two cycles per record are skipped: on the
/// padded grid they carry leakage from the residual offset of a decaying
/// series rather than an oscillation.
pub fn dominant_frequency(series: &[f64], h: f64) -> Result<f64> {
    use rustfft::num_complex::Complex;

    if !(h > 0.0) {
        return Err(Error::invalid("h", format!("sample spacing must be positive, got {h}")));
    }
    if series.len() < MIN_SPECTRUM_LEN {
        return Err(Error::SeriesTooShort {
            length: series.len(),
            minimum: MIN_SPECTRUM_LEN,
        });
    }
    let n = series.len();
    let mean = series.iter().sum::<f64>() / n as f64;
    let variance = series.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n as f64;
    if !(variance > 0.0) {
        return Err(Error::FlatSeries);
    }

    let padded = (4 * n).next_power_of_two();
    let mut buf = vec![Complex::new(0.0, 0.0); padded];
    for (slot, &v) in buf.iter_mut().zip(series) {
        *slot = Complex::new(v - mean, 0.0);
    }
    let mut planner = rustfft::FftPlanner::new();
    planner.plan_fft_forward(padded).process(&mut buf);

    let lowest = (2 * padded).div_ceil(n);
    let (bin, _) = buf[lowest..=padded / 2]
        .iter()
        .enumerate()
        .map(|(k, c)| (k + lowest, c.norm_sqr()))
        .fold((lowest, f64::NEG_INFINITY), |best, cur| if cur.1 > best.1 { cur } else { best });
    Ok(bin as f64 / (padded as f64 * h))
}

/// Duration of the deterministic pre-run used to measure the frequency.
pub const PRE_RUN_DURATION: f64 = 200.0;

/// Dominant frequency `Ω` of the deterministic `x` series and the derived
/// horizon `T = 1/(2Ω)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Horizon {
    pub omega: f64,
    pub horizon: f64,
}

/// Starting point of the pre-run: the equilibrium shifted by `+0.5` in `x`,
/// so the series carries an oscillation even when the equilibrium is stable.
pub fn pre_run_start(p: &Params) -> State {
    State::new(p.a() + 0.5, p.b() / p.a())
}

/// Measures `Ω` from a noise-free run of `duration` with step `h`.
pub fn auto_horizon(p: &Params, h: f64, duration: f64) -> Result<Horizon> {
    let det = p.with_sigma(0.0)?;
    let steps = (duration / h).round() as usize;
    let path = NoisePath::silent(h, steps.max(1))?;
    let traj = crate::integrator::integrate(&det, pre_run_start(p), &path, duration)?;
    let omega = dominant_frequency(&traj.xs(), h)?;
    Ok(Horizon {
        omega,
        horizon: 0.5 / omega,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(a: f64, b: f64, sigma: f64) -> Params {
        Params::new(a, b, sigma).unwrap()
    }

    #[test]
    fn variational_drift_examples() {
        let p0 = params(1.0, 3.0, 0.0);
        let s = State::new(0.8, 1.7);
        let phi = Mat2::new(0.3, -0.2, 1.1, 0.5);
        assert_eq!(variational_drift(&p0, &s, &phi), jacobian(&p0, &s) * phi);
        assert_eq!(variational_drift(&params(1.0, 3.0, 0.4), &s, &Mat2::ZERO), Mat2::ZERO);

        // ½σ²B² with B = [[−1,0],[1,0]]: B² = [[1,0],[−1,0]]
        let sigma = 0.4;
        let b2 = NOISE_SHAPE * NOISE_SHAPE;
        assert_eq!(b2, Mat2::new(1.0, 0.0, -1.0, 0.0));
        let p = params(1.0, 3.0, sigma);
        let diff = variational_drift(&p, &s, &Mat2::IDENTITY) - jacobian(&p, &s);
        let expected = b2.scale(0.5 * sigma * sigma);
        for (a, b) in diff.0.iter().flatten().zip(expected.0.iter().flatten()) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn variational_diffusion_examples() {
        let phi = Mat2::new(0.3, -0.2, 1.1, 0.5);
        assert_eq!(variational_diffusion(&params(1.0, 1.0, 0.0), &phi), Mat2::ZERO);
        assert_eq!(
            variational_diffusion(&params(1.0, 1.0, 0.3), &Mat2::IDENTITY),
            Mat2::new(-0.3, 0.0, 0.3, 0.0)
        );
        // second column depends only on Φ's second column
        let out = variational_diffusion(&params(1.0, 1.0, 0.5), &phi);
        assert_eq!(out.column(1), [-0.5 * phi.get(0, 1), 0.5 * phi.get(0, 1)]);
    }

    #[test]
    fn renormalization_preserves_log_norm() {
        let mut t = TangentMatrix {
            entries: Mat2::new(3e6, 1.0, -2.0, 4e5),
            log_scale: 0.25,
        };
        let before = t.log_norm();
        t.renormalize(Renormalization::default());
        assert!((spectral_norm_2x2(&t.entries) - 1.0).abs() < 1e-12);
        assert!((t.log_norm() - before).abs() < 1e-12);
    }

    #[test]
    fn ftle_rejects_bad_horizon() {
        let p = params(1.0, 1.0, 0.1);
        let path = NoisePath::generate(1, 1e-3, 1000).unwrap();
        assert!(ftle(&p, State::new(1.0, 1.0), &path, 0.0).is_err());
        assert!(matches!(
            ftle(&p, State::new(1.0, 1.0), &path, 1.5),
            Err(Error::InsufficientPath { .. })
        ));
        assert!(ftle_series(&p, State::new(1.0, 1.0), &path, &[0.5, 0.2]).is_err());
    }

    #[test]
    fn short_horizon_matches_first_order_expansion() {
        let p = params(1.0, 3.0, 0.0);
        let s0 = State::new(0.6, 2.5);
        let h = 1e-5;
        let path = NoisePath::silent(h, 10).unwrap();
        let t = 10.0 * h;
        let lam = ftle(&p, s0, &path, t).unwrap();
        let approx = spectral_norm_2x2(&(Mat2::IDENTITY + jacobian(&p, &s0).scale(t))).ln() / t;
        assert!((lam - approx).abs() < 1e-3 * approx.abs().max(1.0));
    }

    #[test]
    fn single_horizon_series_matches_ftle() {
        let p = params(1.0, 4.0, 0.1);
        let path = NoisePath::generate(4, 1e-3, 3000).unwrap();
        let s0 = State::new(1.3, 2.2);
        let one = ftle(&p, s0, &path, 2.5).unwrap();
        let series = ftle_series(&p, s0, &path, &[2.5]).unwrap();
        assert_eq!(series[0].1.to_bits(), one.to_bits());
        let longer = ftle_series(&p, s0, &path, &[0.5, 1.0, 2.5]).unwrap();
        assert_eq!(longer[2].1.to_bits(), one.to_bits());
    }

    #[test]
    fn one_cell_grid_matches_pointwise() {
        let p = params(1.0, 4.0, 0.1);
        let path = NoisePath::generate(9, 1e-3, 2000).unwrap();
        let grid = GridSpec {
            x_range: (0.5, 1.5),
            y_range: (2.0, 4.0),
            nx: 1,
            ny: 1,
        };
        let field = ftle_field(&p, &grid, &path, 2.0).unwrap();
        let direct = ftle(&p, State::new(1.0, 3.0), &path, 2.0).unwrap();
        assert_eq!(field.values, vec![direct]);
    }

    #[test]
    fn grid_rejects_axes_and_empty() {
        let mut g = GridSpec::default_window();
        assert!(g.validate().is_ok());
        g.nx = 0;
        assert!(g.validate().is_err());
        let g = GridSpec {
            x_range: (-1.0, 1.0),
            ..GridSpec::default_window()
        };
        assert!(g.validate().is_err());
    }

    #[test]
    fn positive_fraction_skips_missing() {
        let field = FtleField {
            grid: GridSpec {
                x_range: (0.0, 1.0),
                y_range: (0.0, 1.0),
                nx: 2,
                ny: 2,
            },
            horizon: 1.0,
            seed: 0,
            values: vec![0.5, -0.1, f64::NAN, -0.3],
        };
        assert!((field.positive_fraction() - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(field.missing(), 1);
        let mut buf = Vec::new();
        field.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().next(), Some("x,y,ftle"));
        assert_eq!(text.lines().nth(3), Some("0.25,0.75,NaN"));
    }

    #[test]
    fn sinusoid_frequency() {
        let h = 1e-3;
        let series: Vec<f64> = (0..1 << 16)
            .map(|n| (std::f64::consts::TAU * 0.5 * n as f64 * h).sin())
            .collect();
        let omega = dominant_frequency(&series, h).unwrap();
        assert!((0.49..=0.51).contains(&omega), "{omega}");
    }

    #[test]
    fn damped_oscillation_is_not_mistaken_for_drift() {
        // Settles on an offset well before the record ends.
        let (h, gamma, f0) = (1e-2, 0.5, 0.1378);
        let series: Vec<f64> = (0..20_000)
            .map(|n| {
                let t = n as f64 * h;
                1.0 + 0.5 * (-gamma * t).exp() * (std::f64::consts::TAU * f0 * t).cos()
            })
            .collect();
        let omega = dominant_frequency(&series, h).unwrap();
        // Peak of |∫ e^{−γt} cos(2πf₀t) e^{−2πift} dt| over f, by grid search.
        let magnitude = |f: f64| {
            let lorentz = |df: f64| {
                let w = std::f64::consts::TAU * df;
                let d = gamma * gamma + w * w;
                (gamma / d, -w / d)
            };
            let (a, b) = (lorentz(f - f0), lorentz(f + f0));
            (a.0 + b.0).hypot(a.1 + b.1)
        };
        let peak = (5_000..30_000)
            .map(|k| k as f64 * 1e-5)
            .max_by(|x, y| magnitude(*x).total_cmp(&magnitude(*y)))
            .unwrap();
        assert!((omega - peak).abs() < 2e-3, "{omega} vs {peak}");

        let stable = Params::new(1.0, 1.0, 0.1).unwrap();
        let hz = auto_horizon(&stable, 1e-3, PRE_RUN_DURATION).unwrap();
        // Damped frequency of the linearization: √3/2 / 2π ≈ 0.138.
        assert!((hz.omega / 0.1378 - 1.0).abs() < 0.1, "{hz:?}");
    }

    #[test]
    fn frequency_rejects_flat_and_short() {
        assert_eq!(dominant_frequency(&[2.0; 512], 0.1), Err(Error::FlatSeries));
        assert!(matches!(
            dominant_frequency(&[1.0, 2.0, 3.0], 0.1),
            Err(Error::SeriesTooShort { .. })
        ));
    }
}
