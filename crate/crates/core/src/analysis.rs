//! Evaluation instruments: trajectory and return-map exports, autocovariance,
//! DFT spectrum, and cycle-length measurement of the keystream dynamics.

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

use crate::cipher::{KeystreamConfig, KeystreamGenerator};
use crate::error::{Error, Result};
use crate::map::{raw_rows, reduce, to_physical, ShiftPlan};

/// How much of the X register feeds the key.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KeyWidth {
    LowByte,
    Full17,
}

/// One of the four key configurations compared by the autocovariance study.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KeyMode {
    pub width: KeyWidth,
    pub perturbation: bool,
}

impl KeyMode {
    /// The four combinations in panel order: (a) low byte + perturbation,
    /// (b) low byte alone, (c) full word + perturbation, (d) full word alone.
    pub const ALL: [KeyMode; 4] = [
        KeyMode { width: KeyWidth::LowByte, perturbation: true },
        KeyMode { width: KeyWidth::LowByte, perturbation: false },
        KeyMode { width: KeyWidth::Full17, perturbation: true },
        KeyMode { width: KeyWidth::Full17, perturbation: false },
    ];

    pub fn panel(&self) -> char {
        match (self.width, self.perturbation) {
            (KeyWidth::LowByte, true) => 'a',
            (KeyWidth::LowByte, false) => 'b',
            (KeyWidth::Full17, true) => 'c',
            (KeyWidth::Full17, false) => 'd',
        }
    }
}

/// Key words of one configuration: bytes for [`KeyWidth::LowByte`], 17-bit
/// X words for [`KeyWidth::Full17`].
pub fn key_signal(config: &KeystreamConfig, mode: KeyMode, count: usize) -> Result<Vec<u32>> {
    let mut gen = KeystreamGenerator::with_perturbation(*config, mode.perturbation)?;
    Ok((0..count)
        .map(|_| match mode.width {
            KeyWidth::LowByte => gen.next_key_byte() as u32,
            KeyWidth::Full17 => gen.full_key_word(),
        })
        .collect())
}

/// Ciphered signal: each key word XORed with the corresponding plaintext
/// byte (the XOR touches the low byte; a full-width key keeps its high bits).
pub fn ciphered_signal(config: &KeystreamConfig, mode: KeyMode, plain: &[u8]) -> Result<Vec<u32>> {
    let mut signal = key_signal(config, mode, plain.len())?;
    for (s, &p) in signal.iter_mut().zip(plain) {
        *s ^= p as u32;
    }
    Ok(signal)
}

/// Normalized autocovariance out to `max_lag`.
#[derive(Debug, Clone, PartialEq)]
pub struct AutocovResult {
    /// `rho[tau]` for `tau = 0..=max_lag`; `rho[0] == 1`.
    pub rho: Vec<f64>,
    pub sample_count: usize,
}

impl AutocovResult {
    /// Largest `|rho(tau)|` over `1..=max_lag`.
    pub fn max_off_peak(&self) -> f64 {
        self.rho[1..]
            .iter()
            .fold(0.0f64, |acc, r| acc.max(r.abs()))
    }
}

/// `C(tau) = (1/M) sum_i (s_i - mu)(s_{i+tau} - mu)` over the available
/// pairs, normalized by `C(0)`. Constant input is rejected.
pub fn autocovariance(samples: &[f64], max_lag: usize) -> Result<AutocovResult> {
    let m = samples.len();
    if m < 10 * max_lag.max(1) {
        return Err(Error::NotEnoughSamples {
            got: m,
            need: 10 * max_lag.max(1),
        });
    }
    let mean = samples.iter().sum::<f64>() / m as f64;
    let centered: Vec<f64> = samples.iter().map(|s| s - mean).collect();
    let c0 = centered.iter().map(|d| d * d).sum::<f64>() / m as f64;
    if c0 == 0.0 {
        return Err(Error::ZeroVariance);
    }
    let mut rho = Vec::with_capacity(max_lag + 1);
    rho.push(1.0);
    for tau in 1..=max_lag {
        let c: f64 = centered[..m - tau]
            .iter()
            .zip(&centered[tau..])
            .map(|(a, b)| a * b)
            .sum::<f64>()
            / m as f64;
        rho.push(c / c0);
    }
    Ok(AutocovResult {
        rho,
        sample_count: m,
    })
}

/// Magnitude spectrum of a mean-centered sample window.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumResult {
    /// One magnitude per bin, `size` bins.
    pub magnitudes: Vec<f64>,
    pub sample_count: usize,
}

impl SpectrumResult {
    pub fn size(&self) -> usize {
        self.magnitudes.len()
    }

    /// Peak-to-mean magnitude ratio over the non-DC bins. Near 1 for white
    /// spectra, large when energy concentrates in a few bins.
    pub fn flatness_ratio(&self) -> f64 {
        let bins = &self.magnitudes[1..];
        let max = bins.iter().fold(0.0f64, |a, &b| a.max(b));
        let mean = bins.iter().sum::<f64>() / bins.len() as f64;
        max / mean
    }

    /// Fraction of (non-DC, half-spectrum) energy inside the lowest
    /// `fraction` of frequency bins.
    pub fn low_band_energy_fraction(&self, fraction: f64) -> f64 {
        let half = self.size() / 2;
        let cut = ((half as f64 * fraction) as usize).max(1);
        let energy = |bins: &[f64]| bins.iter().map(|m| m * m).sum::<f64>();
        energy(&self.magnitudes[1..=cut]) / energy(&self.magnitudes[1..=half])
    }

    /// Index of the strongest half-spectrum bin (excluding DC).
    pub fn peak_bin(&self) -> usize {
        let half = self.size() / 2;
        (1..=half)
            .max_by(|&a, &b| self.magnitudes[a].total_cmp(&self.magnitudes[b]))
            .unwrap_or(1)
    }
}

/// Magnitudes of the DFT of the first `size` samples after mean removal.
/// `size` must be a power of two no larger than the sample count.
pub fn dft_magnitude(samples: &[f64], size: usize) -> Result<SpectrumResult> {
    if size == 0 || !size.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(size));
    }
    if samples.len() < size {
        return Err(Error::NotEnoughSamples {
            got: samples.len(),
            need: size,
        });
    }
    let window = &samples[..size];
    let mean = window.iter().sum::<f64>() / size as f64;
    let mut buf: Vec<Complex64> = window
        .iter()
        .map(|&s| Complex64::new(s - mean, 0.0))
        .collect();
    FftPlanner::new().plan_fft_forward(size).process(&mut buf);
    Ok(SpectrumResult {
        magnitudes: buf.iter().map(|c| c.norm()).collect(),
        sample_count: size,
    })
}

/// Result of a cycle search.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CycleOutcome {
    /// Eventual period and pre-period (tail) of the state sequence.
    Found { period: u64, tail: u64 },
    /// The search hit the step cap before closing a cycle.
    Exceeded { cap: u64 },
}

/// Default search cap for [`cycle_length`].
pub const DEFAULT_CYCLE_CAP: u64 = 100_000_000;

#[derive(Clone, Copy, PartialEq, Eq)]
struct ExtState {
    x: u32,
    y: u32,
    z: u32,
    /// Step counter modulo the perturbation interval (0 when unperturbed).
    phase: u32,
}

#[inline]
fn ext_step(s: ExtState, plan: &ShiftPlan, interval: u32) -> ExtState {
    let (xr, yr, zr) = raw_rows(s.x as i64, s.y as i64, s.z as i64, plan);
    let (mut x, y, z) = (reduce(xr), reduce(yr), reduce(zr));
    let mut phase = 0;
    if interval > 0 {
        phase = (s.phase + 1) % interval;
        if phase == 0 {
            x = (x & !0xFF) | ((x ^ y) & 0xFF);
        }
    }
    ExtState { x, y, z, phase }
}

/// Finds the eventual period and tail of the keystream state sequence using
/// Brent's teleporting-tortoise cycle detection, then confirms the answer by
/// replaying tail + 2*period steps. With the perturbation on, detection runs
/// over the extended state (X, Y, Z, n mod N), which makes the sequence a
/// deterministic function of the state again.
pub fn cycle_length(
    config: &KeystreamConfig,
    perturbation: bool,
    cap: u64,
) -> Result<CycleOutcome> {
    let coeffs = config.derive();
    let plan = coeffs.require_shift_plan()?.clone();
    let interval = if perturbation {
        config.perturbation.interval() as u32
    } else {
        0
    };
    let start = ExtState {
        x: config.x0,
        y: config.y0,
        z: config.z0,
        phase: 0,
    };
    config.validate()?;
    let f = |s: ExtState| ext_step(s, &plan, interval);

    // Brent phase 1: find the period.
    let mut budget = cap;
    let spend = |steps: u64, budget: &mut u64| -> bool {
        if *budget < steps {
            false
        } else {
            *budget -= steps;
            true
        }
    };
    let mut power: u64 = 1;
    let mut period: u64 = 1;
    let mut tortoise = start;
    let mut hare = f(start);
    if !spend(1, &mut budget) {
        return Ok(CycleOutcome::Exceeded { cap });
    }
    while tortoise != hare {
        if power == period {
            tortoise = hare;
            power *= 2;
            period = 0;
        }
        hare = f(hare);
        period += 1;
        if !spend(1, &mut budget) {
            return Ok(CycleOutcome::Exceeded { cap });
        }
    }

    // Brent phase 2: find the tail.
    let mut lead = start;
    if !spend(period, &mut budget) {
        return Ok(CycleOutcome::Exceeded { cap });
    }
    for _ in 0..period {
        lead = f(lead);
    }
    let mut trail = start;
    let mut tail: u64 = 0;
    while trail != lead {
        trail = f(trail);
        lead = f(lead);
        tail += 1;
        if !spend(2, &mut budget) {
            return Ok(CycleOutcome::Exceeded { cap });
        }
    }

    // Replay confirmation: the state at step `tail` must recur after one and
    // after two full periods.
    let mut probe = start;
    for _ in 0..tail {
        probe = f(probe);
    }
    let at_tail = probe;
    for _ in 0..period {
        probe = f(probe);
    }
    assert!(probe == at_tail, "cycle replay failed after one period");
    for _ in 0..period {
        probe = f(probe);
    }
    assert!(probe == at_tail, "cycle replay failed after two periods");

    Ok(CycleOutcome::Found { period, tail })
}

/// Register-space or physical-space trajectory rows.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoordMode {
    Register,
    Physical,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryPoint {
    pub n: u64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

/// Emits the state at steps `0..steps` (row 0 is the initial condition),
/// optionally through the register-to-physical transform.
pub fn trajectory(
    config: &KeystreamConfig,
    steps: u64,
    coords: CoordMode,
) -> Result<Vec<TrajectoryPoint>> {
    if steps == 0 {
        return Err(Error::EmptyInput);
    }
    let mut gen = KeystreamGenerator::new(*config)?;
    let t = &config.transform;
    let mut rows = Vec::with_capacity(steps as usize);
    for i in 0..steps {
        let s = *gen.state();
        let (x, y, z) = match coords {
            CoordMode::Register => (s.x as f64, s.y as f64, s.z as f64),
            CoordMode::Physical => (
                to_physical(s.x, t),
                to_physical(s.y, t),
                to_physical(s.z, t),
            ),
        };
        rows.push(TrajectoryPoint { n: i, x, y, z });
        gen.next_key_byte();
    }
    Ok(rows)
}

/// Delay-embedding rows for return-map scatter plots: sliding windows of
/// `dimension` consecutive samples.
pub fn pair_plot(samples: &[u8], dimension: usize) -> Result<Vec<Vec<u8>>> {
    if !(2..=3).contains(&dimension) {
        return Err(Error::InvalidParameter(format!(
            "embedding dimension {dimension} (expected 2 or 3)"
        )));
    }
    if samples.len() < dimension {
        return Err(Error::NotEnoughSamples {
            got: samples.len(),
            need: dimension,
        });
    }
    Ok(samples.windows(dimension).map(<[u8]>::to_vec).collect())
}

pub fn autocov_csv(result: &AutocovResult) -> String {
    let mut out = String::from("lag,rho\n");
    for (lag, rho) in result.rho.iter().enumerate() {
        out.push_str(&format!("{lag},{rho:.6}\n"));
    }
    out
}

pub fn spectrum_csv(result: &SpectrumResult) -> String {
    let mut out = String::from("bin,magnitude\n");
    for (bin, mag) in result.magnitudes.iter().enumerate() {
        out.push_str(&format!("{bin},{mag:.6}\n"));
    }
    out
}

pub fn trajectory_csv(rows: &[TrajectoryPoint], coords: CoordMode) -> String {
    let mut out = String::from("n,x,y,z\n");
    for p in rows {
        match coords {
            CoordMode::Register => {
                out.push_str(&format!("{},{},{},{}\n", p.n, p.x as u32, p.y as u32, p.z as u32))
            }
            CoordMode::Physical => {
                out.push_str(&format!("{},{:.9},{:.9},{:.9}\n", p.n, p.x, p.y, p.z))
            }
        }
    }
    out
}

pub fn pair_plot_csv(rows: &[Vec<u8>]) -> Result<String> {
    let dimension = rows.first().map(Vec::len).ok_or(Error::EmptyInput)?;
    let mut out = String::from(match dimension {
        2 => "n,c0,c1\n",
        3 => "n,c0,c1,c2\n",
        _ => return Err(Error::InvalidParameter(format!("dimension {dimension}"))),
    });
    for (n, row) in rows.iter().enumerate() {
        out.push_str(&format!("{n}"));
        for v in row {
            out.push_str(&format!(",{v}"));
        }
        out.push('\n');
    }
    Ok(out)
}
