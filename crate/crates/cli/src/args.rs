use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{ArgGroup, Args, Parser, Subcommand};

/// Resolved flag values in the order they appear on the command line.
pub type Record = Vec<(&'static str, String)>;

pub trait Recorded {
    fn record(&self, r: &mut Record);
}

fn push(r: &mut Record, key: &'static str, value: impl fmt::Display) {
    r.push((key, value.to_string()));
}

fn push_opt<T: fmt::Display>(r: &mut Record, key: &'static str, value: &Option<T>) {
    if let Some(v) = value {
        push(r, key, v);
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "brusselator",
    version,
    about = "Stochastic Brusselator experiments: trajectories, two-point motion, FTLE, slow-fast analysis, jump process"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Euler–Maruyama trajectory (CSV `t,x,y`).
    Simulate(SimulateArgs),
    /// Two initial conditions under one noise path (CSV `t,x0,y0,x1,y1,d`).
    TwoPoint(TwoPointArgs),
    /// FTLE over a grid of initial conditions (CSV `x,y,ftle`).
    FtleField(FieldArgs),
    /// FTLE as a function of the horizon T (CSV `T,ftle`).
    FtleSeries(SeriesArgs),
    /// Dominant frequency of the x series (one-line report).
    Period(PeriodArgs),
    /// Trajectory in slow-fast coordinates with regime labels (CSV `t,u,v,regime`).
    Slowfast(SlowfastArgs),
    /// Gillespie simulation of the reaction network (CSV `t,reaction,X,Y,D,E`).
    Ssa(SsaArgs),
    /// Repeat a run from its `.meta` sidecar.
    Rerun(RerunArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Simulate(_) => "simulate",
            Command::TwoPoint(_) => "two-point",
            Command::FtleField(_) => "ftle-field",
            Command::FtleSeries(_) => "ftle-series",
            Command::Period(_) => "period",
            Command::Slowfast(_) => "slowfast",
            Command::Ssa(_) => "ssa",
            Command::Rerun(_) => "rerun",
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct OutArgs {
    /// Output file [path]; defaults to `<subcommand>.csv` in $BRUSSELATOR_OUT_DIR (or the working directory).
    /// A `<out>.meta` sidecar is written next to it.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct NoiseArgs {
    /// Noise amplitude σ [dimensionless].
    #[arg(long, default_value_t = 0.1)]
    pub sigma: f64,
    /// Time step h [time units].
    #[arg(long, default_value_t = 1e-3)]
    pub h: f64,
    /// Seed of the Wiener path.
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}

impl Recorded for NoiseArgs {
    fn record(&self, r: &mut Record) {
        push(r, "sigma", self.sigma);
        push(r, "h", self.h);
        push(r, "seed", self.seed);
    }
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    /// Concentration parameter a [dimensionless].
    #[arg(long, default_value_t = 1.0)]
    pub a: f64,
    /// Concentration parameter b [dimensionless].
    #[arg(long)]
    pub b: f64,
    #[command(flatten)]
    pub noise: NoiseArgs,
    /// Initial x [concentration].
    #[arg(long, allow_negative_numbers = true)]
    pub x0: f64,
    /// Initial y [concentration].
    #[arg(long, allow_negative_numbers = true)]
    pub y0: f64,
    /// Final time [time units].
    #[arg(long, default_value_t = 150.0)]
    pub t_end: f64,
    /// Record every n-th step [steps].
    #[arg(long, default_value_t = 1)]
    pub stride: usize,
    #[command(flatten)]
    pub out: OutArgs,
}

impl Recorded for SimulateArgs {
    fn record(&self, r: &mut Record) {
        push(r, "a", self.a);
        push(r, "b", self.b);
        self.noise.record(r);
        push(r, "x0", self.x0);
        push(r, "y0", self.y0);
        push(r, "t-end", self.t_end);
        push(r, "stride", self.stride);
    }
}

/// Parameter presets around the Hopf threshold `b_crit = 1 + a²`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Preset {
    /// b = b_crit − 1
    Below,
    /// b = b_crit + 1
    Above,
}

#[derive(Debug, Clone, Args)]
#[command(group(ArgGroup::new("bifurcation").required(true).args(["b", "preset"])))]
pub struct TwoPointArgs {
    /// Concentration parameter a [dimensionless].
    #[arg(long, default_value_t = 1.0)]
    pub a: f64,
    /// Concentration parameter b [dimensionless].
    #[arg(long)]
    pub b: Option<f64>,
    /// Choose b relative to the Hopf threshold instead of giving it.
    #[arg(long, value_enum)]
    pub preset: Option<Preset>,
    #[command(flatten)]
    pub noise: NoiseArgs,
    /// First initial x [concentration].
    #[arg(long, allow_negative_numbers = true)]
    pub x0: f64,
    /// First initial y [concentration].
    #[arg(long, allow_negative_numbers = true)]
    pub y0: f64,
    /// Second initial x [concentration].
    #[arg(long, allow_negative_numbers = true)]
    pub x1: f64,
    /// Second initial y [concentration].
    #[arg(long, allow_negative_numbers = true)]
    pub y1: f64,
    /// Final time [time units].
    #[arg(long, default_value_t = 150.0)]
    pub t_end: f64,
    /// Record every n-th step [steps].
    #[arg(long, default_value_t = 1)]
    pub stride: usize,
    #[command(flatten)]
    pub out: OutArgs,
}

impl Recorded for TwoPointArgs {
    fn record(&self, r: &mut Record) {
        push(r, "a", self.a);
        push_opt(r, "b", &self.b);
        push_opt(
            r,
            "preset",
            &self.preset.map(|p| match p {
                Preset::Below => "below",
                Preset::Above => "above",
            }),
        );
        self.noise.record(r);
        push(r, "x0", self.x0);
        push(r, "y0", self.y0);
        push(r, "x1", self.x1);
        push(r, "y1", self.y1);
        push(r, "t-end", self.t_end);
        push(r, "stride", self.stride);
    }
}

/// FTLE horizon: a positive time or `auto` for `T = 1/(2Ω)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum HorizonArg {
    Auto,
    Fixed(f64),
}

impl FromStr for HorizonArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.eq_ignore_ascii_case("auto") {
            return Ok(HorizonArg::Auto);
        }
        s.parse::<f64>()
            .map(HorizonArg::Fixed)
            .map_err(|_| format!("expected a positive number or `auto`, got `{s}`"))
    }
}

impl fmt::Display for HorizonArg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HorizonArg::Auto => f.write_str("auto"),
            HorizonArg::Fixed(t) => write!(f, "{t}"),
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct FieldArgs {
    /// Concentration parameter a [dimensionless].
    #[arg(long, default_value_t = 1.0)]
    pub a: f64,
    /// Concentration parameter b [dimensionless].
    #[arg(long)]
    pub b: f64,
    #[command(flatten)]
    pub noise: NoiseArgs,
    /// Horizon T [time units], or `auto` for half the dominant period of a noise-free pre-run.
    #[arg(long = "T", default_value = "auto")]
    pub horizon: HorizonArg,
    /// Grid window, lower x [concentration].
    #[arg(long, default_value_t = 0.05)]
    pub x_min: f64,
    /// Grid window, upper x [concentration].
    #[arg(long, default_value_t = 4.0)]
    pub x_max: f64,
    /// Grid window, lower y [concentration].
    #[arg(long, default_value_t = 0.05)]
    pub y_min: f64,
    /// Grid window, upper y [concentration].
    #[arg(long, default_value_t = 6.0)]
    pub y_max: f64,
    /// Cells along x [count].
    #[arg(long, default_value_t = 100)]
    pub nx: usize,
    /// Cells along y [count].
    #[arg(long, default_value_t = 100)]
    pub ny: usize,
    /// Worker threads (0 = one per core); results do not depend on it.
    #[arg(long, default_value_t = 0)]
    pub threads: usize,
    #[command(flatten)]
    pub out: OutArgs,
}

impl Recorded for FieldArgs {
    fn record(&self, r: &mut Record) {
        push(r, "a", self.a);
        push(r, "b", self.b);
        self.noise.record(r);
        push(r, "T", self.horizon);
        push(r, "x-min", self.x_min);
        push(r, "x-max", self.x_max);
        push(r, "y-min", self.y_min);
        push(r, "y-max", self.y_max);
        push(r, "nx", self.nx);
        push(r, "ny", self.ny);
        push(r, "threads", self.threads);
    }
}

#[derive(Debug, Clone, Args)]
pub struct SeriesArgs {
    /// Concentration parameter a [dimensionless].
    #[arg(long, default_value_t = 1.0)]
    pub a: f64,
    /// Concentration parameter b [dimensionless].
    #[arg(long)]
    pub b: f64,
    #[command(flatten)]
    pub noise: NoiseArgs,
    /// Initial x [concentration].
    #[arg(long, allow_negative_numbers = true)]
    pub x0: f64,
    /// Initial y [concentration].
    #[arg(long, allow_negative_numbers = true)]
    pub y0: f64,
    /// Largest horizon [time units].
    #[arg(long, default_value_t = 100.0)]
    pub t_max: f64,
    /// Spacing of the horizons [time units].
    #[arg(long, default_value_t = 0.5)]
    pub dt: f64,
    #[command(flatten)]
    pub out: OutArgs,
}

impl Recorded for SeriesArgs {
    fn record(&self, r: &mut Record) {
        push(r, "a", self.a);
        push(r, "b", self.b);
        self.noise.record(r);
        push(r, "x0", self.x0);
        push(r, "y0", self.y0);
        push(r, "t-max", self.t_max);
        push(r, "dt", self.dt);
    }
}

#[derive(Debug, Clone, Args)]
pub struct PeriodArgs {
    /// Concentration parameter a [dimensionless].
    #[arg(long, default_value_t = 1.0)]
    pub a: f64,
    /// Concentration parameter b [dimensionless].
    #[arg(long)]
    pub b: f64,
    /// Noise amplitude σ [dimensionless]; 0 gives the deterministic period.
    #[arg(long, default_value_t = 0.0)]
    pub sigma: f64,
    /// Time step h [time units].
    #[arg(long, default_value_t = 1e-3)]
    pub h: f64,
    /// Seed of the Wiener path (ignored when σ = 0).
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Length of the analysed run [time units].
    #[arg(long, default_value_t = brusselator::ftle::PRE_RUN_DURATION)]
    pub duration: f64,
    /// Initial x [concentration]; defaults to a + 0.5.
    #[arg(long, allow_negative_numbers = true)]
    pub x0: Option<f64>,
    /// Initial y [concentration]; defaults to b/a.
    #[arg(long, allow_negative_numbers = true)]
    pub y0: Option<f64>,
    /// Report file [path]; defaults to `period.txt` in $BRUSSELATOR_OUT_DIR (or the working directory).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl Recorded for PeriodArgs {
    fn record(&self, r: &mut Record) {
        push(r, "a", self.a);
        push(r, "b", self.b);
        push(r, "sigma", self.sigma);
        push(r, "h", self.h);
        push(r, "seed", self.seed);
        push(r, "duration", self.duration);
        push_opt(r, "x0", &self.x0);
        push_opt(r, "y0", &self.y0);
    }
}

#[derive(Debug, Clone, Args)]
#[command(group(ArgGroup::new("timescale").required(true).args(["b", "epsilon"])))]
pub struct SlowfastArgs {
    /// Concentration parameter a [dimensionless].
    #[arg(long, default_value_t = 1.0)]
    pub a: f64,
    /// Concentration parameter b [dimensionless]; sets ε = a/b.
    #[arg(long)]
    pub b: Option<f64>,
    /// Time-scale ratio ε [dimensionless]; sets b = a/ε.
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[command(flatten)]
    pub noise: NoiseArgs,
    /// Initial x [concentration] (original coordinates).
    #[arg(long, allow_negative_numbers = true)]
    pub x0: f64,
    /// Initial y [concentration] (original coordinates).
    #[arg(long, allow_negative_numbers = true)]
    pub y0: f64,
    /// Final time [time units].
    #[arg(long, default_value_t = 150.0)]
    pub t_end: f64,
    /// Record every n-th step [steps].
    #[arg(long, default_value_t = 1)]
    pub stride: usize,
    /// Distance to the critical manifold counted as "on" it [concentration].
    #[arg(long, default_value_t = 0.1)]
    pub delta_s: f64,
    /// Vertical distance to the nullcline counted as "on" it [concentration].
    #[arg(long, default_value_t = 0.1)]
    pub delta_n: f64,
    /// |du/dt| above which motion counts as fast [concentration / time].
    #[arg(long, default_value_t = 1.0)]
    pub fast_cutoff: f64,
    /// Also write `<out stem>.nullcline.csv` and `<out stem>.manifold.csv` (columns `u,v`).
    #[arg(long, num_args = 0..=1, default_value_t = false, default_missing_value = "true")]
    pub geometry: bool,
    #[command(flatten)]
    pub out: OutArgs,
}

impl Recorded for SlowfastArgs {
    fn record(&self, r: &mut Record) {
        push(r, "a", self.a);
        push_opt(r, "b", &self.b);
        push_opt(r, "epsilon", &self.epsilon);
        self.noise.record(r);
        push(r, "x0", self.x0);
        push(r, "y0", self.y0);
        push(r, "t-end", self.t_end);
        push(r, "stride", self.stride);
        push(r, "delta-s", self.delta_s);
        push(r, "delta-n", self.delta_n);
        push(r, "fast-cutoff", self.fast_cutoff);
        push(r, "geometry", self.geometry);
    }
}

#[derive(Debug, Clone, Args)]
pub struct SsaArgs {
    /// Rate constant of A → X [1/time].
    #[arg(long, default_value_t = 1.0)]
    pub gamma1: f64,
    /// Rate constant of B + X → Y + D [1/time].
    #[arg(long, default_value_t = 1.0)]
    pub gamma2: f64,
    /// Rate constant of 2X + Y → 3X [1/time].
    #[arg(long, default_value_t = 1.0)]
    pub gamma3: f64,
    /// Rate constant of X → E [1/time].
    #[arg(long, default_value_t = 1.0)]
    pub gamma4: f64,
    /// System volume V [volume units].
    #[arg(long = "V", default_value_t = 1000.0)]
    pub volume: f64,
    /// Pool of species A [molecules]; defaults to round(a·V).
    #[arg(long = "A")]
    pub a_pool: Option<u64>,
    /// Pool of species B [molecules]; defaults to round(b·V).
    #[arg(long = "B")]
    pub b_pool: Option<u64>,
    /// Concentration a used for the default A pool [dimensionless].
    #[arg(long, default_value_t = 1.0)]
    pub a: f64,
    /// Concentration b used for the default B pool [dimensionless].
    #[arg(long, default_value_t = 1.0)]
    pub b: f64,
    /// Initial X [molecules]; defaults to the rate-equation equilibrium.
    #[arg(long = "X0")]
    pub x0: Option<u64>,
    /// Initial Y [molecules]; defaults to the rate-equation equilibrium.
    #[arg(long = "Y0")]
    pub y0: Option<u64>,
    /// Final time [time units].
    #[arg(long, default_value_t = 50.0)]
    pub t_end: f64,
    /// Seed of the random stream.
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Abort after this many reactions [count].
    #[arg(long, default_value_t = brusselator::ssa::DEFAULT_EVENT_CAP)]
    pub event_cap: usize,
    #[command(flatten)]
    pub out: OutArgs,
}

impl Recorded for SsaArgs {
    fn record(&self, r: &mut Record) {
        push(r, "gamma1", self.gamma1);
        push(r, "gamma2", self.gamma2);
        push(r, "gamma3", self.gamma3);
        push(r, "gamma4", self.gamma4);
        push(r, "V", self.volume);
        push_opt(r, "A", &self.a_pool);
        push_opt(r, "B", &self.b_pool);
        push(r, "a", self.a);
        push(r, "b", self.b);
        push_opt(r, "X0", &self.x0);
        push_opt(r, "Y0", &self.y0);
        push(r, "t-end", self.t_end);
        push(r, "seed", self.seed);
        push(r, "event-cap", self.event_cap);
    }
}

#[derive(Debug, Clone, Args)]
pub struct RerunArgs {
    /// Sidecar written by an earlier run [path].
    pub meta: PathBuf,
    /// Output file [path]; defaults to the output recorded in the sidecar.
    #[arg(long)]
    pub out: Option<PathBuf>,
}
