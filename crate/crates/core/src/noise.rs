//! Reproducible discretized Wiener paths.
//!
//! Every increment is a pure function of `(seed, index)`:
//!
//! 1. the seed is mixed into a stream key with the SplitMix64 finalizer;
//! 2. uniform number `k` of the stream is `mix64(key + (k+1)·γ)` with
//!    `γ = 0x9E3779B97F4A7C15`, i.e. the k-th output of a SplitMix64
//!    generator, mapped to the open interval (0, 1) from its top 53 bits;
//! 3. increment `n` uses uniforms `2n` and `2n+1` in the cosine branch of
//!    the Box–Muller transform, scaled by `√h`.
//!
//! This is algorithm version [`NOISE_ALGORITHM_VERSION`]. Because access is
//! by index, chunked or lazy generation produces the same bits as
//! generating the whole path at once.

use std::io::{Read, Write};

use crate::error::{Error, Result};

pub const NOISE_ALGORITHM_VERSION: u32 = 1;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;
const DUMP_MAGIC: &[u8; 8] = b"BRUSNOIS";

#[inline]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Counter-based uniform stream: `uniform(k)` is random-access.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CounterStream {
    key: u64,
}

impl CounterStream {
    pub fn new(seed: u64) -> Self {
        CounterStream {
            key: mix64(seed ^ 0x6A09_E667_F3BC_C908),
        }
    }

    #[inline]
    pub fn bits(&self, k: u64) -> u64 {
        mix64(self.key.wrapping_add(k.wrapping_add(1).wrapping_mul(GOLDEN_GAMMA)))
    }

    /// Uniform in the open interval (0, 1).
    #[inline]
    pub fn uniform(&self, k: u64) -> f64 {
        ((self.bits(k) >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
    }

    /// Standard normal from uniforms `2n` and `2n+1` (Box–Muller, cosine branch).
    #[inline]
    pub fn standard_normal(&self, n: u64) -> f64 {
        let u1 = self.uniform(2 * n);
        let u2 = self.uniform(2 * n + 1);
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }
}

/// Sequential view over a [`CounterStream`], used where draws are consumed
/// in order (the jump-process simulator).
#[derive(Debug, Clone)]
pub struct CounterRng {
    stream: CounterStream,
    counter: u64,
}

impl CounterRng {
    pub fn new(seed: u64) -> Self {
        CounterRng {
            stream: CounterStream::new(seed),
            counter: 0,
        }
    }

    pub fn next_uniform(&mut self) -> f64 {
        let u = self.stream.uniform(self.counter);
        self.counter += 1;
        u
    }

    /// Number of uniforms consumed so far.
    pub fn position(&self) -> u64 {
        self.counter
    }
}

/// Sub-seed for task `index` of an ensemble driven by `master`.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    mix64(mix64(master).wrapping_add(mix64(index.wrapping_add(GOLDEN_GAMMA))))
}

/// Increment `n` of the path `(seed, h)`, without materialising the path.
pub fn increment_at(seed: u64, h: f64, n: u64) -> f64 {
    CounterStream::new(seed).standard_normal(n) * h.sqrt()
}

/// A fixed realization of Brownian increments `ΔWₙ ~ N(0, h)` on the grid `tₙ = nh`.
#[derive(Debug, Clone, PartialEq)]
pub struct NoisePath {
    seed: u64,
    h: f64,
    increments: Vec<f64>,
}

fn check_step(h: f64) -> Result<()> {
    if h > 0.0 && h.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid("h", format!("step size must be positive, got {h}")))
    }
}

impl NoisePath {
    pub fn generate(seed: u64, h: f64, length: usize) -> Result<Self> {
        check_step(h)?;
        if length == 0 {
            return Err(Error::invalid("length", "must be at least 1"));
        }
        let mut path = NoisePath {
            seed,
            h,
            increments: Vec::with_capacity(length),
        };
        path.extend_to(length);
        Ok(path)
    }

    /// Grows the path lazily; existing increments are left untouched and new
    /// ones are identical to what [`generate`](Self::generate) would give.
    pub fn extend_to(&mut self, length: usize) {
        let stream = CounterStream::new(self.seed);
        let sqrt_h = self.h.sqrt();
        let start = self.increments.len();
        self.increments
            .extend((start..length).map(|n| stream.standard_normal(n as u64) * sqrt_h));
    }

    /// A path made of given increments (for tests and loaded dumps).
    pub fn from_increments(seed: u64, h: f64, increments: Vec<f64>) -> Result<Self> {
        check_step(h)?;
        if increments.is_empty() {
            return Err(Error::invalid("length", "must be at least 1"));
        }
        Ok(NoisePath { seed, h, increments })
    }

    /// An all-zero path: integrating against it gives the deterministic Euler scheme.
    pub fn silent(h: f64, length: usize) -> Result<Self> {
        Self::from_increments(0, h, vec![0.0; length])
    }

    /// Coarsens the path by summing consecutive groups of `factor`
    /// increments, giving the same Brownian path at step `factor·h`.
    pub fn coarsen(&self, factor: usize) -> Result<Self> {
        if factor == 0 {
            return Err(Error::invalid("factor", "must be at least 1"));
        }
        let increments: Vec<f64> = self
            .increments
            .chunks_exact(factor)
            .map(|c| c.iter().sum())
            .collect();
        Self::from_increments(self.seed, self.h * factor as f64, increments)
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn len(&self) -> usize {
        self.increments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.increments.is_empty()
    }

    /// Time covered by the path, `length · h`.
    pub fn duration(&self) -> f64 {
        self.increments.len() as f64 * self.h
    }

    pub fn increments(&self) -> &[f64] {
        &self.increments
    }

    pub fn increment(&self, n: usize) -> Result<f64> {
        self.increments.get(n).copied().ok_or(Error::OutOfRange {
            index: n,
            length: self.len(),
        })
    }

    /// `W(tₙ) = Σ_{k<n} ΔW_k`.
    pub fn partial_sum(&self, n: usize) -> Result<f64> {
        if n > self.len() {
            return Err(Error::OutOfRange {
                index: n,
                length: self.len(),
            });
        }
        Ok(self.increments[..n].iter().sum())
    }

    /// Number of steps of size `h` needed to reach `t`, if the path covers it.
    pub fn steps_for(&self, t: f64) -> Result<usize> {
        if !(t >= 0.0 && t.is_finite()) {
            return Err(Error::invalid("t_end", format!("must be nonnegative, got {t}")));
        }
        let steps = (t / self.h).round() as usize;
        if steps > self.len() {
            return Err(Error::InsufficientPath {
                needed: steps,
                available: self.len(),
            });
        }
        Ok(steps)
    }

    /// Binary dump: magic `BRUSNOIS`, then little-endian `u64` seed, `f64` h,
    /// `u64` length, and `length` little-endian `f64` increments.
    pub fn write_binary<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        w.write_all(DUMP_MAGIC)?;
        w.write_all(&self.seed.to_le_bytes())?;
        w.write_all(&self.h.to_le_bytes())?;
        w.write_all(&(self.len() as u64).to_le_bytes())?;
        for v in &self.increments {
            w.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_binary<R: Read>(mut r: R) -> Result<Self> {
        let io = |e: std::io::Error| Error::Format(e.to_string());
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic).map_err(io)?;
        if &magic != DUMP_MAGIC {
            return Err(Error::Format("bad magic".into()));
        }
        let mut word = [0u8; 8];
        r.read_exact(&mut word).map_err(io)?;
        let seed = u64::from_le_bytes(word);
        r.read_exact(&mut word).map_err(io)?;
        let h = f64::from_le_bytes(word);
        r.read_exact(&mut word).map_err(io)?;
        let length = u64::from_le_bytes(word) as usize;
        let mut increments = Vec::with_capacity(length);
        for _ in 0..length {
            r.read_exact(&mut word).map_err(io)?;
            increments.push(f64::from_le_bytes(word));
        }
        Self::from_increments(seed, h, increments)
    }
}

/// The fast-time path `W̃_τ = ε^{-1/2} W_{ετ}`.
///
/// Increment `n` lives on the fast grid with step `h/ε` (where `h` is the
/// base step in slow time) and equals `ε^{-1/2}` times base increment `n`,
/// so its variance `h/ε` matches its own step size.
#[derive(Debug, Clone)]
pub struct RescaledPath {
    base: NoisePath,
    epsilon: f64,
}

impl RescaledPath {
    pub fn new(base: NoisePath, epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::invalid("epsilon", format!("must be positive, got {epsilon}")));
        }
        Ok(RescaledPath { base, epsilon })
    }

    pub fn base(&self) -> &NoisePath {
        &self.base
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// Fast-time step `h/ε`.
    pub fn h(&self) -> f64 {
        self.base.h / self.epsilon
    }

    fn factor(&self) -> f64 {
        self.epsilon.sqrt().recip()
    }

    pub fn increment(&self, n: usize) -> Result<f64> {
        Ok(self.factor() * self.base.increment(n)?)
    }

    pub fn partial_sum(&self, n: usize) -> Result<f64> {
        Ok(self.factor() * self.base.partial_sum(n)?)
    }

    /// Materialises the rescaled increments as a path on the fast grid.
    pub fn to_noise_path(&self) -> NoisePath {
        let k = self.factor();
        NoisePath {
            seed: self.base.seed,
            h: self.h(),
            increments: self.base.increments.iter().map(|w| k * w).collect(),
        }
    }
}

pub fn rescale(path: &NoisePath, epsilon: f64) -> Result<RescaledPath> {
    RescaledPath::new(path.clone(), epsilon)
}
