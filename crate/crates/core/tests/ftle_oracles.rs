use brusselator::ftle::{self, GridSpec, Renormalization};
use brusselator::integrator;
use brusselator::linalg::spectral_norm_2x2;
use brusselator::model;
use brusselator::noise::CounterRng;
use brusselator::{Mat2, NoisePath, Params, State};

fn params(a: f64, b: f64, sigma: f64) -> Params {
    Params::new(a, b, sigma).unwrap()
}

/// `exp(J t)` for a 2×2 matrix with complex eigenvalues `α ± iβ`:
/// `e^{αt} (cos βt · I + sin βt / β · (J − αI))`.
fn expm_complex(j: &Mat2, t: f64) -> Mat2 {
    let alpha = 0.5 * j.trace();
    let beta = (j.det() - alpha * alpha).sqrt();
    assert!(beta > 0.0);
    let shifted = *j - Mat2::IDENTITY.scale(alpha);
    (Mat2::IDENTITY.scale((beta * t).cos()) + shifted.scale((beta * t).sin() / beta)).scale((alpha * t).exp())
}

#[test]
fn deterministic_limit_matches_matrix_exponential() {
    let p = params(1.0, 1.0, 0.0);
    let s0 = State::new(1.0, 1.0);
    let t = 100.0;
    let j = model::jacobian(&p, &s0);
    assert_eq!(j, Mat2::new(0.0, 1.0, -1.0, -1.0));
    let oracle = spectral_norm_2x2(&expm_complex(&j, t)).ln() / t;
    assert!((oracle + 0.5).abs() < 5e-2);
    let path = NoisePath::silent(1e-3, 100_000).unwrap();
    let got = ftle::ftle(&p, s0, &path, t).unwrap();
    assert!((got - oracle).abs() < 5e-2, "{got} vs {oracle}");
    assert!((-0.55..=-0.45).contains(&got));
}

#[test]
fn series_approaches_leading_eigenvalue() {
    let p = params(1.0, 1.0, 0.0);
    let s0 = model::equilibrium(&p);
    let path = NoisePath::silent(1e-3, 400_000).unwrap();
    let horizons: Vec<f64> = (1..=40).map(|k| 10.0 * k as f64).collect();
    let series = ftle::ftle_series(&p, s0, &path, &horizons).unwrap();
    let leading = model::jacobian(&p, &s0).max_real_eigenvalue();
    for &(t, l) in series.iter().filter(|(t, _)| *t >= 200.0) {
        assert!((l - leading).abs() < 1e-2, "T={t}: {l}");
    }
}

#[test]
fn tangent_matches_central_differences() {
    let h = 1e-3;
    let t = 1.0;
    let delta = 1e-6;
    let path = NoisePath::silent(h, 1000).unwrap();
    let mut rng = CounterRng::new(31);
    for b in [1.0, 4.0] {
        let p = params(1.0, b, 0.0);
        for _ in 0..10 {
            let s0 = State::new(0.2 + 3.0 * rng.next_uniform(), 0.2 + 4.0 * rng.next_uniform());
            let (_, phi) = ftle::fundamental_matrix(&p, s0, &path, t).unwrap();
            let flow = |s: State| *integrator::integrate(&p, s, &path, t).unwrap().last().unwrap();
            for col in 0..2 {
                let (dx, dy) = if col == 0 { (delta, 0.0) } else { (0.0, delta) };
                let plus = flow(State::new(s0.x + dx, s0.y + dy));
                let minus = flow(State::new(s0.x - dx, s0.y - dy));
                let fd = [(plus.x - minus.x) / (2.0 * delta), (plus.y - minus.y) / (2.0 * delta)];
                let exact = phi.column(col);
                let err = ((fd[0] - exact[0]).powi(2) + (fd[1] - exact[1]).powi(2)).sqrt();
                let size = (exact[0].powi(2) + exact[1].powi(2)).sqrt();
                assert!(err <= 1e-3 * size, "b={b} s0={s0:?} column {col}: {fd:?} vs {exact:?}");
            }
        }
    }
}

#[test]
fn renormalization_does_not_change_the_exponent() {
    let p = params(1.0, 4.0, 0.1);
    let path = NoisePath::generate(6, 1e-3, 30_000).unwrap();
    let s0 = State::new(0.9, 3.1);
    for t in [1.0, 10.0, 30.0] {
        let plain = ftle::ftle_with(&p, s0, &path, t, Renormalization::Disabled).unwrap();
        let tight = Renormalization::Bounded { lower: 0.9, upper: 1.1 };
        let rescaled = ftle::ftle_with(&p, s0, &path, t, tight).unwrap();
        let default = ftle::ftle(&p, s0, &path, t).unwrap();
        assert!((rescaled - plain).abs() <= 1e-10 * plain.abs().max(1e-300), "T={t}: {rescaled} vs {plain}");
        assert!((default - plain).abs() <= 1e-10 * plain.abs().max(1e-300));
    }
}

#[test]
fn exponent_ignores_checkpoints_and_noise_chunking() {
    let p = params(1.0, 3.0, 0.2);
    let s0 = State::new(1.1, 2.2);
    let full = NoisePath::generate(21, 1e-3, 20_000).unwrap();
    let mut grown = NoisePath::generate(21, 1e-3, 7).unwrap();
    for len in [999, 5000, 20_000] {
        grown.extend_to(len);
    }
    let direct = ftle::ftle(&p, s0, &full, 20.0).unwrap();
    assert_eq!(ftle::ftle(&p, s0, &grown, 20.0).unwrap(), direct);
    let horizons: Vec<f64> = (1..=40).map(|k| 0.5 * k as f64).collect();
    let series = ftle::ftle_series(&p, s0, &full, &horizons).unwrap();
    assert_eq!(series.last().unwrap().1, direct);
    for &(t, l) in series.iter().step_by(7) {
        assert_eq!(ftle::ftle(&p, s0, &full, t).unwrap(), l);
    }
}

#[test]
fn field_is_independent_of_thread_count() {
    let p = params(1.0, 4.0, 0.1);
    let grid = GridSpec {
        x_range: (0.05, 4.0),
        y_range: (0.05, 6.0),
        nx: 12,
        ny: 9,
    };
    let path = NoisePath::generate(2024, 1e-3, 4500).unwrap();
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| ftle::ftle_field(&p, &grid, &path, 4.5).unwrap())
    };
    let one = run(1);
    let many = run(4);
    assert_eq!(one.values.len(), 108);
    let bits = |f: &ftle::FtleField| f.values.iter().map(|v| v.to_bits()).collect::<Vec<_>>();
    assert_eq!(bits(&one), bits(&many));
    assert_eq!(bits(&one), bits(&run(1)));
    for k in [0, 13, 107] {
        assert_eq!(one.values[k], ftle::ftle(&p, grid.point(k), &path, 4.5).unwrap());
    }
}

/// Mean spacing of upward crossings of `x = level`, located by linear interpolation.
fn zero_crossing_period(xs: &[f64], h: f64, level: f64) -> f64 {
    let crossings: Vec<f64> = xs
        .windows(2)
        .enumerate()
        .filter(|(_, w)| w[0] < level && w[1] >= level)
        .map(|(n, w)| (n as f64 + (level - w[0]) / (w[1] - w[0])) * h)
        .collect();
    assert!(crossings.len() >= 3);
    (crossings.last().unwrap() - crossings[0]) / (crossings.len() - 1) as f64
}

#[test]
fn fft_period_matches_return_time() {
    let p = params(1.0, 4.0, 0.0);
    let h = 1e-3;
    let duration = ftle::PRE_RUN_DURATION;
    let path = NoisePath::silent(h, (duration / h) as usize).unwrap();
    let xs = integrator::integrate(&p, ftle::pre_run_start(&p), &path, duration).unwrap().xs();
    let omega = ftle::dominant_frequency(&xs, h).unwrap();
    // Skip the transient before measuring the return time.
    let tail = &xs[xs.len() / 4..];
    let period = zero_crossing_period(tail, h, p.a());
    assert!(((1.0 / omega) / period - 1.0).abs() < 0.05, "1/Ω = {}, return time {period}", 1.0 / omega);
    let hz = ftle::auto_horizon(&p, h, duration).unwrap();
    assert_eq!(hz.omega, omega);
    assert_eq!(hz.horizon, 0.5 / omega);
}

#[test]
fn unstable_limit_cycle_has_positive_cells() {
    let p = params(1.0, 4.0, 0.1);
    let h = 1e-3;
    let hz = ftle::auto_horizon(&p, h, ftle::PRE_RUN_DURATION).unwrap();
    let path = NoisePath::generate(2024, h, (hz.horizon / h).round() as usize).unwrap();
    let grid = GridSpec {
        nx: 30,
        ny: 30,
        ..GridSpec::default_window()
    };
    let field = ftle::ftle_field(&p, &grid, &path, hz.horizon).unwrap();
    assert_eq!(field.missing(), 0);
    assert!(field.positive_fraction() > 0.0);
}
