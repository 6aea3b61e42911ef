//! Brusselator vector fields.
//!
//! The stochastic system is specified in Stratonovich form, with the
//! bifurcation parameter perturbed as `b + σ∘dW`:
//!
//! ```text
//! dx = (a − (1+b)x + x²y) dt − σx ∘ dW
//! dy = (bx − x²y) dt        + σx ∘ dW
//! ```
//!
//! The Itô drift used by the integrators is obtained by adding the
//! Wong–Zakai correction to the deterministic drift, never written out by
//! hand.

use crate::error::{Error, Result};
use crate::linalg::Mat2;

/// Absolute tolerance on `b − (1 + a²)` below which an equilibrium is
/// classified as critical.
pub const CRITICAL_TOLERANCE: f64 = 1e-12;

/// Parameters of the stochastic Brusselator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Params {
    a: f64,
    b: f64,
    sigma: f64,
}

impl Params {
    pub fn new(a: f64, b: f64, sigma: f64) -> Result<Self> {
        if !(a > 0.0 && a.is_finite()) {
            return Err(Error::invalid("a", format!("must be positive and finite, got {a}")));
        }
        if !(b > 0.0 && b.is_finite()) {
            return Err(Error::invalid("b", format!("must be positive and finite, got {b}")));
        }
        if !(sigma >= 0.0 && sigma.is_finite()) {
            return Err(Error::invalid(
                "sigma",
                format!("must be nonnegative and finite, got {sigma}"),
            ));
        }
        Ok(Params { a, b, sigma })
    }

    /// Parameters with `b = b_crit(a) + offset`.
    pub fn relative_to_critical(a: f64, offset: f64, sigma: f64) -> Result<Self> {
        Params::new(a, hopf_threshold(a) + offset, sigma)
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn b_crit(&self) -> f64 {
        hopf_threshold(self.a)
    }

    /// Time-scale ratio `ε = a / b` of the slow-fast formulation.
    pub fn epsilon(&self) -> f64 {
        self.a / self.b
    }

    pub fn with_sigma(&self, sigma: f64) -> Result<Self> {
        Params::new(self.a, self.b, sigma)
    }
}

/// A point of the closed positive quadrant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct State {
    pub x: f64,
    pub y: f64,
}

impl State {
    pub const fn new(x: f64, y: f64) -> Self {
        State { x, y }
    }

    pub fn distance(&self, other: &State) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

/// Stability of the unique equilibrium of the deterministic system.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EquilibriumClass {
    Stable,
    Critical,
    Unstable,
}

/// Reaction rate equation: `(a − (1+b)x + x²y, bx − x²y)`.
pub fn drift_deterministic(p: &Params, s: &State) -> [f64; 2] {
    let State { x, y } = *s;
    let x2y = x * x * y;
    [p.a - (1.0 + p.b) * x + x2y, p.b * x - x2y]
}

/// Stratonovich diffusion vector `(−σx, σx)`.
pub fn diffusion(p: &Params, s: &State) -> [f64; 2] {
    let g = p.sigma * s.x;
    [-g, g]
}

/// Wong–Zakai drift correction `½ Σⱼ (∂g/∂zⱼ) gⱼ` for the diffusion vector.
///
/// The sum is evaluated from the partial derivatives of `g = (−σx, σx)`
/// rather than from the simplified closed form `(σ²x/2, −σ²x/2)`.
pub fn wong_zakai_correction(p: &Params, s: &State) -> [f64; 2] {
    let g = diffusion(p, s);
    // ∂g/∂x = (−σ, σ), ∂g/∂y = 0
    let dg_dx = [-p.sigma, p.sigma];
    let dg_dy = [0.0, 0.0];
    [
        0.5 * (dg_dx[0] * g[0] + dg_dy[0] * g[1]),
        0.5 * (dg_dx[1] * g[0] + dg_dy[1] * g[1]),
    ]
}

/// Drift of the equivalent Itô SDE.
pub fn ito_drift(p: &Params, s: &State) -> [f64; 2] {
    let f = drift_deterministic(p, s);
    let c = wong_zakai_correction(p, s);
    [f[0] + c[0], f[1] + c[1]]
}

/// Jacobian of the deterministic drift.
pub fn jacobian(p: &Params, s: &State) -> Mat2 {
    let State { x, y } = *s;
    let xy2 = 2.0 * x * y;
    let x2 = x * x;
    Mat2::new(-(1.0 + p.b) + xy2, x2, p.b - xy2, -x2)
}

/// The unique equilibrium `(a, b/a)`.
pub fn equilibrium(p: &Params) -> State {
    State::new(p.a, p.b / p.a)
}

/// Hopf threshold `b_crit = 1 + a²`.
pub fn hopf_threshold(a: f64) -> f64 {
    1.0 + a * a
}

pub fn classify_equilibrium(p: &Params) -> EquilibriumClass {
    let delta = p.b - hopf_threshold(p.a);
    if delta.abs() <= CRITICAL_TOLERANCE {
        EquilibriumClass::Critical
    } else if delta < 0.0 {
        EquilibriumClass::Stable
    } else {
        EquilibriumClass::Unstable
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p(a: f64, b: f64, sigma: f64) -> Params {
        Params::new(a, b, sigma).unwrap()
    }

    #[test]
    fn rejects_bad_params() {
        assert!(Params::new(0.0, 1.0, 0.1).is_err());
        assert!(Params::new(1.0, -1.0, 0.1).is_err());
        assert!(Params::new(1.0, 1.0, -0.1).is_err());
        assert!(Params::new(f64::NAN, 1.0, 0.1).is_err());
    }

    #[test]
    fn deterministic_drift_examples() {
        let p = p(1.0, 2.0, 0.0);
        assert_eq!(drift_deterministic(&p, &State::new(0.0, 0.0)), [1.0, 0.0]);
        assert_eq!(drift_deterministic(&p, &State::new(1.0, 2.0)), [0.0, 0.0]);
        // 1 − 3 + 1 = −1, 2 − 1 = 1
        assert_eq!(drift_deterministic(&p, &State::new(1.0, 1.0)), [-1.0, 1.0]);
    }

    #[test]
    fn ito_drift_examples() {
        assert_eq!(ito_drift(&p(1.0, 2.0, 0.0), &State::new(1.0, 2.0)), [0.0, 0.0]);

        let d = ito_drift(&p(1.0, 2.0, 0.1), &State::new(1.0, 2.0));
        assert!((d[0] - 0.005).abs() < 1e-15);
        assert!((d[1] + 0.005).abs() < 1e-15);

        // σ=1, s=(2,1): deterministic (1 − 6 + 4, 4 − 4) = (−1, 0), correction (1, −1)
        let d = ito_drift(&p(1.0, 2.0, 1.0), &State::new(2.0, 1.0));
        assert_eq!(d, [0.0, -1.0]);
    }

    #[test]
    fn diffusion_examples() {
        assert_eq!(diffusion(&p(1.0, 1.0, 0.1), &State::new(1.0, 2.0)), [-0.1, 0.1]);
        assert_eq!(diffusion(&p(1.0, 1.0, 0.0), &State::new(5.0, 2.0)), [-0.0, 0.0]);
        let g = diffusion(&p(1.0, 1.0, 0.2), &State::new(3.0, 5.0));
        assert!((g[0] + 0.6).abs() < 1e-15 && (g[1] - 0.6).abs() < 1e-15);
    }

    #[test]
    fn wong_zakai_examples() {
        let c = wong_zakai_correction(&p(1.0, 1.0, 0.1), &State::new(1.0, 3.0));
        assert!((c[0] - 0.005).abs() < 1e-15 && (c[1] + 0.005).abs() < 1e-15);
        let c = wong_zakai_correction(&p(1.0, 1.0, 0.0), &State::new(7.0, 3.0));
        assert_eq!(c, [0.0, 0.0]);
        assert_eq!(
            wong_zakai_correction(&p(1.0, 1.0, 2.0), &State::new(0.5, 3.0)),
            [1.0, -1.0]
        );
    }

    #[test]
    fn jacobian_examples() {
        let j = jacobian(&p(1.0, 1.0, 0.0), &State::new(1.0, 1.0));
        assert_eq!(j, Mat2::new(0.0, 1.0, -1.0, -1.0));

        for (a, b) in [(1.0, 1.0), (0.5, 3.0), (2.0, 7.5)] {
            let p = p(a, b, 0.0);
            let tr = jacobian(&p, &equilibrium(&p)).trace();
            assert!((tr - (b - 1.0 - a * a)).abs() < 1e-12);
        }

        let b = 3.0;
        let j = jacobian(&p(1.0, b, 0.0), &State::new(0.0, 4.0));
        assert_eq!(j, Mat2::new(-(1.0 + b), 0.0, b, -0.0));
    }

    #[test]
    fn equilibrium_examples() {
        assert_eq!(equilibrium(&p(1.0, 2.0, 0.0)), State::new(1.0, 2.0));
        assert_eq!(equilibrium(&p(2.0, 2.0, 0.0)), State::new(2.0, 1.0));
        assert_eq!(equilibrium(&p(0.5, 4.0, 0.0)), State::new(0.5, 8.0));
    }

    #[test]
    fn hopf_threshold_examples() {
        assert_eq!(hopf_threshold(1.0), 2.0);
        assert_eq!(hopf_threshold(0.0), 1.0);
        assert_eq!(hopf_threshold(2.0), 5.0);
    }

    #[test]
    fn classify_examples() {
        assert_eq!(classify_equilibrium(&p(1.0, 1.0, 0.0)), EquilibriumClass::Stable);
        assert_eq!(classify_equilibrium(&p(1.0, 2.0, 0.0)), EquilibriumClass::Critical);
        assert_eq!(classify_equilibrium(&p(1.0, 4.0, 0.0)), EquilibriumClass::Unstable);
    }

    proptest! {
        #[test]
        fn ito_minus_deterministic_is_correction(
            a in 0.01f64..5.0, b in 0.01f64..20.0, sigma in 0.0f64..2.0,
            x in 0.0f64..10.0, y in 0.0f64..10.0,
        ) {
            let p = p(a, b, sigma);
            let s = State::new(x, y);
            let ito = ito_drift(&p, &s);
            let det = drift_deterministic(&p, &s);
            let c = wong_zakai_correction(&p, &s);
            // the correction is added last, so subtraction recovers it up to one rounding
            for k in 0..2 {
                let tol = 4.0 * f64::EPSILON * ito[k].abs().max(det[k].abs());
                prop_assert!((ito[k] - det[k] - c[k]).abs() <= tol);
            }
            prop_assert!((c[0] - 0.5 * sigma * sigma * x).abs() <= 1e-15 * (1.0 + c[0].abs()));
        }

        #[test]
        fn total_concentration_has_no_noise(
            sigma in 0.0f64..3.0, x in 0.0f64..10.0, y in 0.0f64..10.0, b in 0.1f64..10.0,
        ) {
            let p = p(1.3, b, sigma);
            let s = State::new(x, y);
            let g = diffusion(&p, &s);
            prop_assert_eq!(g[0] + g[1], 0.0);
            let d = ito_drift(&p, &s);
            prop_assert!((d[0] + d[1] - (1.3 - x)).abs() < 1e-9 * (1.0 + x * x * y + b * x));
        }

        #[test]
        fn jacobian_matches_central_differences(
            a in 0.1f64..3.0, b in 0.1f64..8.0, x in 0.1f64..5.0, y in 0.1f64..5.0,
        ) {
            let p = p(a, b, 0.0);
            let j = jacobian(&p, &State::new(x, y));
            let step = 1e-5;
            let fx = |dx: f64, dy: f64| drift_deterministic(&p, &State::new(x + dx, y + dy));
            let scale = j.0.iter().flatten().fold(1.0f64, |m, v| m.max(v.abs()));
            for row in 0..2 {
                let dx = (fx(step, 0.0)[row] - fx(-step, 0.0)[row]) / (2.0 * step);
                let dy = (fx(0.0, step)[row] - fx(0.0, -step)[row]) / (2.0 * step);
                prop_assert!((dx - j.get(row, 0)).abs() <= 1e-6 * scale);
                prop_assert!((dy - j.get(row, 1)).abs() <= 1e-6 * scale);
            }
        }

        #[test]
        fn equilibrium_is_a_root(a in 0.05f64..5.0, b in 0.05f64..30.0) {
            let p = p(a, b, 0.0);
            let f = drift_deterministic(&p, &equilibrium(&p));
            let scale = 1.0 + (1.0 + b) * a + b * b / a;
            prop_assert!(f[0].abs() <= 4.0 * f64::EPSILON * scale);
            prop_assert!(f[1].abs() <= 4.0 * f64::EPSILON * scale);
        }
    }
}
