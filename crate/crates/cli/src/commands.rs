use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use brusselator::ftle::{self, GridSpec};
use brusselator::integrator::{self, IntegrateOptions};
use brusselator::slowfast::{self, RegimeThresholds, SfTrajectory, SlowFastParams};
use brusselator::ssa::{self, JumpState, RateConstants};
use brusselator::{NoisePath, Params, State};

use crate::args::*;
use crate::error::CliError;
use crate::meta::Meta;

pub const OUT_DIR_ENV: &str = "BRUSSELATOR_OUT_DIR";

type Outcome = Result<(), CliError>;

pub fn run(command: Command) -> Outcome {
    let name = command.name();
    match command {
        Command::Simulate(a) => simulate(name, a),
        Command::TwoPoint(a) => two_point(name, a),
        Command::FtleField(a) => ftle_field(name, a),
        Command::FtleSeries(a) => ftle_series(name, a),
        Command::Period(a) => period(name, a),
        Command::Slowfast(a) => slowfast(name, a),
        Command::Ssa(a) => ssa(name, a),
        Command::Rerun(a) => rerun(a),
    }
}

fn output_path(out: &Option<PathBuf>, default_name: &str) -> PathBuf {
    match out {
        Some(p) => p.clone(),
        None => {
            let dir = std::env::var_os(OUT_DIR_ENV).map_or_else(|| PathBuf::from("."), PathBuf::from);
            dir.join(default_name)
        }
    }
}

fn write_file(path: &Path, body: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>) -> Outcome {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    let file = File::create(path).map_err(|e| CliError::io(path, e))?;
    let mut w = BufWriter::new(file);
    body(&mut w).and_then(|_| w.flush()).map_err(|e| CliError::io(path, e))
}

/// Noise path covering `[0, t]` at step `h`.
fn noise_for(seed: u64, h: f64, t: f64, flag: &str) -> Result<NoisePath, CliError> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(CliError::Usage(format!("--h must be positive, got {h}")));
    }
    if !(t > 0.0 && t.is_finite()) {
        return Err(CliError::Usage(format!("--{flag} must be positive, got {t}")));
    }
    let steps = (t / h).round() as usize;
    if steps == 0 {
        return Err(CliError::Usage(format!("--{flag} = {t} is shorter than one step")));
    }
    Ok(NoisePath::generate(seed, h, steps)?)
}

fn simulate(name: &str, args: SimulateArgs) -> Outcome {
    let p = Params::new(args.a, args.b, args.noise.sigma)?;
    let path = noise_for(args.noise.seed, args.noise.h, args.t_end, "t-end")?;
    let opts = IntegrateOptions { stride: args.stride };
    let traj = integrator::integrate_with(&p, State::new(args.x0, args.y0), &path, args.t_end, opts)?;

    let out = output_path(&args.out.out, "simulate.csv");
    write_file(&out, |w| traj.write_csv(w))?;
    let mut record = Record::new();
    args.record(&mut record);
    let mut meta = Meta::new(name, &out, args.noise.seed, record);
    meta.resolve("clamp_events", traj.clamp_events);
    meta.write()?;
    Ok(())
}

fn two_point(name: &str, args: TwoPointArgs) -> Outcome {
    let p = match (args.b, args.preset) {
        (Some(b), _) => Params::new(args.a, b, args.noise.sigma)?,
        (None, Some(Preset::Below)) => Params::relative_to_critical(args.a, -1.0, args.noise.sigma)?,
        (None, Some(Preset::Above)) => Params::relative_to_critical(args.a, 1.0, args.noise.sigma)?,
        (None, None) => return Err(CliError::Usage("one of --b or --preset is required".into())),
    };
    let path = noise_for(args.noise.seed, args.noise.h, args.t_end, "t-end")?;
    let opts = IntegrateOptions { stride: args.stride };
    let tp = integrator::two_point_with(
        &p,
        State::new(args.x0, args.y0),
        State::new(args.x1, args.y1),
        &path,
        args.t_end,
        opts,
    )?;

    let out = output_path(&args.out.out, "two-point.csv");
    write_file(&out, |w| tp.write_csv(w))?;
    let mut record = Record::new();
    args.record(&mut record);
    let mut meta = Meta::new(name, &out, args.noise.seed, record);
    meta.resolve("b", p.b());
    meta.resolve("b_crit", p.b_crit());
    meta.write()?;
    Ok(())
}

fn ftle_field(name: &str, args: FieldArgs) -> Outcome {
    let p = Params::new(args.a, args.b, args.noise.sigma)?;
    let grid = GridSpec {
        x_range: (args.x_min, args.x_max),
        y_range: (args.y_min, args.y_max),
        nx: args.nx,
        ny: args.ny,
    };
    grid.validate()?;
    let (horizon, omega) = match args.horizon {
        HorizonArg::Fixed(t) => (t, None),
        HorizonArg::Auto => {
            let hz = ftle::auto_horizon(&p, args.noise.h, ftle::PRE_RUN_DURATION)?;
            (hz.horizon, Some(hz.omega))
        }
    };
    let path = noise_for(args.noise.seed, args.noise.h, horizon, "T")?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.threads)
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start {} worker threads: {e}", args.threads)))?;
    let field = pool.install(|| ftle::ftle_field(&p, &grid, &path, horizon))?;

    let out = output_path(&args.out.out, "ftle-field.csv");
    write_file(&out, |w| field.write_csv(w))?;
    eprintln!(
        "T={horizon} positive_fraction={} missing={}",
        field.positive_fraction(),
        field.missing()
    );
    let mut record = Record::new();
    args.record(&mut record);
    let mut meta = Meta::new(name, &out, args.noise.seed, record);
    meta.resolve("T", horizon);
    if let Some(omega) = omega {
        meta.resolve("omega", omega);
    }
    meta.resolve("missing", field.missing());
    meta.write()?;
    Ok(())
}

fn ftle_series(name: &str, args: SeriesArgs) -> Outcome {
    let p = Params::new(args.a, args.b, args.noise.sigma)?;
    if !(args.dt > 0.0 && args.dt.is_finite()) {
        return Err(CliError::Usage(format!("--dt must be positive, got {}", args.dt)));
    }
    let path = noise_for(args.noise.seed, args.noise.h, args.t_max, "t-max")?;
    let n = (args.t_max / args.dt).round() as usize;
    if n == 0 {
        return Err(CliError::Usage("--t-max is shorter than --dt".into()));
    }
    let horizons: Vec<f64> = (1..=n).map(|k| k as f64 * args.dt).collect();
    let series = ftle::ftle_series(&p, State::new(args.x0, args.y0), &path, &horizons)?;

    let out = output_path(&args.out.out, "ftle-series.csv");
    write_file(&out, |w| {
        writeln!(w, "T,ftle")?;
        for (t, l) in &series {
            writeln!(w, "{t},{l}")?;
        }
        Ok(())
    })?;
    let mut record = Record::new();
    args.record(&mut record);
    Meta::new(name, &out, args.noise.seed, record).write()?;
    Ok(())
}

fn period(name: &str, args: PeriodArgs) -> Outcome {
    let p = Params::new(args.a, args.b, args.sigma)?;
    let path = if args.sigma == 0.0 {
        if !(args.h > 0.0 && args.duration > 0.0) {
            return Err(CliError::Usage("--h and --duration must be positive".into()));
        }
        NoisePath::silent(args.h, ((args.duration / args.h).round() as usize).max(1))?
    } else {
        noise_for(args.seed, args.h, args.duration, "duration")?
    };
    let start = ftle::pre_run_start(&p);
    let s0 = State::new(args.x0.unwrap_or(start.x), args.y0.unwrap_or(start.y));
    let traj = integrator::integrate(&p, s0, &path, args.duration)?;
    let omega = ftle::dominant_frequency(&traj.xs(), args.h)?;
    let line = format!("omega={omega} period={} T={}", 1.0 / omega, 0.5 / omega);

    let out = output_path(&args.out, "period.txt");
    write_file(&out, |w| writeln!(w, "{line}"))?;
    println!("{line}");
    let mut record = Record::new();
    args.record(&mut record);
    Meta::new(name, &out, args.seed, record).write()?;
    Ok(())
}

fn polyline_path(out: &Path, suffix: &str) -> PathBuf {
    let stem = out.file_stem().map_or_else(|| "slowfast".into(), |s| s.to_os_string());
    let mut name = stem;
    name.push(suffix);
    out.with_file_name(name)
}

fn slowfast(name: &str, args: SlowfastArgs) -> Outcome {
    let sp = match (args.b, args.epsilon) {
        (Some(b), None) => SlowFastParams::from_params(&Params::new(args.a, b, args.noise.sigma)?),
        (None, Some(eps)) => SlowFastParams::new(args.a, eps, args.noise.sigma)?,
        _ => return Err(CliError::Usage("exactly one of --b or --epsilon is required".into())),
    };
    if args.stride == 0 {
        return Err(CliError::Usage("--stride must be at least 1".into()));
    }
    let th = RegimeThresholds {
        delta_s: args.delta_s,
        delta_n: args.delta_n,
        fast_cutoff: args.fast_cutoff,
    };
    let path = noise_for(args.noise.seed, args.noise.h, args.t_end, "t-end")?;
    let s0 = State::new(args.x0, args.y0);
    let full = slowfast::integrate_slow(&sp, slowfast::to_slowfast(&s0), &path, args.t_end)?;
    let hit = slowfast::hitting_time_nullcline(&sp, &full);
    let traj = SfTrajectory {
        times: full.times.iter().step_by(args.stride).copied().collect(),
        states: full.states.iter().step_by(args.stride).copied().collect(),
        clamp_events: full.clamp_events,
    };

    let out = output_path(&args.out.out, "slowfast.csv");
    write_file(&out, |w| traj.write_csv(w, &sp, &th))?;
    if args.geometry {
        let u_lo = full.states.iter().map(|s| s.u).fold(f64::INFINITY, f64::min).max(1e-2);
        let u_hi = full.states.iter().map(|s| s.u).fold(f64::NEG_INFINITY, f64::max);
        let u_hi = if u_hi > u_lo { u_hi } else { u_lo + 1.0 };
        let nullcline = slowfast::nullcline_polyline(&sp, u_lo, u_hi, 200)?;
        let manifold = slowfast::critical_manifold_polyline(u_lo, u_hi, 200)?;
        for (suffix, line) in [(".nullcline.csv", nullcline), (".manifold.csv", manifold)] {
            write_file(&polyline_path(&out, suffix), |w| {
                writeln!(w, "u,v")?;
                for s in &line {
                    writeln!(w, "{},{}", s.u, s.v)?;
                }
                Ok(())
            })?;
        }
    }
    match hit {
        Some(t) => println!("hitting_time={t}"),
        None => println!("hitting_time=none"),
    }

    let mut record = Record::new();
    args.record(&mut record);
    let mut meta = Meta::new(name, &out, args.noise.seed, record);
    meta.resolve("epsilon", sp.epsilon());
    meta.resolve("b", args.a / sp.epsilon());
    meta.resolve("hitting_time", hit.map_or("none".to_string(), |t| t.to_string()));
    meta.write()?;
    Ok(())
}

fn ssa(name: &str, args: SsaArgs) -> Outcome {
    let pool = |c: f64, flag: &str| -> Result<u64, CliError> {
        let n = c * args.volume;
        if n >= 0.5 && n.is_finite() {
            Ok(n.round() as u64)
        } else {
            Err(CliError::Usage(format!("--{flag} · V must be at least one molecule")))
        }
    };
    let a_pool = match args.a_pool {
        Some(n) => n,
        None => pool(args.a, "a")?,
    };
    let b_pool = match args.b_pool {
        Some(n) => n,
        None => pool(args.b, "b")?,
    };
    let gamma = [args.gamma1, args.gamma2, args.gamma3, args.gamma4];
    let rc = RateConstants::new(gamma, a_pool, b_pool, args.volume)?;
    // Rate-equation equilibrium: x* = γ₁A/(γ₄V), y* = γ₂B/(γ₃V x*).
    let x_eq = gamma[0] * a_pool as f64 / (gamma[3] * args.volume);
    let y_eq = gamma[1] * b_pool as f64 / (gamma[2] * args.volume * x_eq);
    let z0 = JumpState::new(
        args.x0.unwrap_or((x_eq * args.volume).round() as u64),
        args.y0.unwrap_or((y_eq * args.volume).round() as u64),
        0,
        0,
    );
    let jp = ssa::simulate_jump_capped(&rc, z0, args.t_end, args.seed, args.event_cap)?;

    let out = output_path(&args.out.out, "ssa.csv");
    write_file(&out, |w| jp.write_csv(w))?;
    let mut record = Record::new();
    args.record(&mut record);
    let mut meta = Meta::new(name, &out, args.seed, record);
    meta.resolve("A", a_pool);
    meta.resolve("B", b_pool);
    meta.resolve("X0", z0.x);
    meta.resolve("Y0", z0.y);
    let (rre_a, rre_b) = rc.rre_params();
    meta.resolve("rre_a", rre_a);
    meta.resolve("rre_b", rre_b);
    meta.resolve("events", jp.events.len() - 1);
    meta.write()?;
    Ok(())
}

fn rerun(args: RerunArgs) -> Outcome {
    use clap::Parser;

    let meta = Meta::read(&args.meta)?;
    let out = args.out.unwrap_or_else(|| meta.output.clone());
    let cli = Cli::try_parse_from(meta.argv(&out)).map_err(|e| CliError::Meta {
        path: args.meta.clone(),
        reason: e.to_string(),
    })?;
    if let Command::Rerun(_) = cli.command {
        return Err(CliError::Usage("a sidecar cannot request another rerun".into()));
    }
    run(cli.command)
}
