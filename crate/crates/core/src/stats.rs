//! The five-test randomness battery and the reference generators it is
//! compared against.
//!
//! Statistics follow the classic handbook definitions; the acceptance rule is
//! `statistic < threshold` with the thresholds fixed at the chi-square upper
//! 5% critical values for the respective degrees of freedom (and the
//! one-sided normal 1.645 for the autocorrelation test). The autocorrelation
//! rule is deliberately signed: a strongly negative statistic is accepted.
//! Reports record the byte-to-bit expansion order and the autocorrelation lag
//! so a run can be reproduced exactly.

use crate::error::{Error, Result};
use crate::link::{serialize, BitOrder};

pub const FREQUENCY_THRESHOLD: f64 = 3.842;
pub const SERIAL_THRESHOLD: f64 = 5.992;
/// Poker threshold for 8-bit blocks (255 degrees of freedom).
pub const POKER_THRESHOLD: f64 = 293.248;
/// Runs threshold for 26 degrees of freedom (sample sizes giving K = 14).
pub const RUNS_THRESHOLD: f64 = 38.885;
pub const AUTOCORRELATION_THRESHOLD: f64 = 1.645;

/// Default sample length in bits.
pub const DEFAULT_SAMPLE_BITS: usize = 400_000;
/// Default autocorrelation lag: one key byte.
pub const DEFAULT_LAG: usize = 8;
/// Default poker block size in bits.
pub const DEFAULT_POKER_BLOCK: u32 = 8;

/// A bit-level view of a byte stream, remembering the expansion convention.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitSequence {
    bits: Vec<bool>,
    order: Option<BitOrder>,
}

impl BitSequence {
    pub fn from_bytes(bytes: &[u8], order: BitOrder) -> Self {
        Self {
            bits: serialize(bytes, order),
            order: Some(order),
        }
    }

    /// Truncated variant for segment lengths that are not byte multiples.
    pub fn from_bytes_truncated(bytes: &[u8], order: BitOrder, nbits: usize) -> Self {
        let mut bits = serialize(bytes, order);
        bits.truncate(nbits);
        Self {
            bits,
            order: Some(order),
        }
    }

    pub fn from_bits(bits: Vec<bool>) -> Self {
        Self { bits, order: None }
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn order(&self) -> Option<BitOrder> {
        self.order
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TestKind {
    Frequency,
    Serial,
    Poker,
    Runs,
    Autocorrelation,
}

impl TestKind {
    pub fn name(&self) -> &'static str {
        match self {
            TestKind::Frequency => "frequency",
            TestKind::Serial => "serial",
            TestKind::Poker => "poker",
            TestKind::Runs => "runs",
            TestKind::Autocorrelation => "autocorrelation",
        }
    }

    pub const ALL: [TestKind; 5] = [
        TestKind::Frequency,
        TestKind::Serial,
        TestKind::Poker,
        TestKind::Runs,
        TestKind::Autocorrelation,
    ];
}

/// One statistic with its acceptance verdict.
#[derive(Debug, Clone, PartialEq)]
pub struct TestResult {
    pub test: TestKind,
    pub statistic: f64,
    pub threshold: f64,
    pub degrees_of_freedom: Option<u32>,
    pub pass: bool,
}

impl TestResult {
    fn new(test: TestKind, statistic: f64, threshold: f64, df: Option<u32>) -> Self {
        Self {
            test,
            statistic,
            threshold,
            degrees_of_freedom: df,
            // Acceptance rule as printed: accept iff statistic < threshold.
            pass: statistic < threshold,
        }
    }
}

fn require_bits(s: &BitSequence, need: usize) -> Result<()> {
    if s.len() < need {
        return Err(Error::SequenceTooShort {
            got: s.len(),
            need,
        });
    }
    Ok(())
}

/// Monobit balance: `X1 = (n0 - n1)^2 / n`, 1 degree of freedom.
pub fn frequency_test(s: &BitSequence) -> Result<TestResult> {
    require_bits(s, 100)?;
    let n = s.len() as f64;
    let n1 = s.bits().iter().filter(|&&b| b).count() as f64;
    let n0 = n - n1;
    let statistic = (n0 - n1).powi(2) / n;
    Ok(TestResult::new(TestKind::Frequency, statistic, FREQUENCY_THRESHOLD, Some(1)))
}

/// Overlapping bit-pair balance, 2 degrees of freedom.
pub fn serial_test(s: &BitSequence) -> Result<TestResult> {
    require_bits(s, 100)?;
    let bits = s.bits();
    let n = bits.len() as f64;
    let mut pair_counts = [0u64; 4];
    for w in bits.windows(2) {
        pair_counts[((w[0] as usize) << 1) | w[1] as usize] += 1;
    }
    let n1 = bits.iter().filter(|&&b| b).count() as f64;
    let n0 = n - n1;
    let pair_sq: f64 = pair_counts.iter().map(|&c| (c as f64).powi(2)).sum();
    let statistic = 4.0 / (n - 1.0) * pair_sq - 2.0 / n * (n0 * n0 + n1 * n1) + 1.0;
    Ok(TestResult::new(TestKind::Serial, statistic, SERIAL_THRESHOLD, Some(2)))
}

/// Chi-square statistic over non-overlapping `m`-bit block patterns.
/// Exposed separately because the statistic is defined for any block size
/// while the reference threshold exists only for m = 8.
pub fn poker_statistic(s: &BitSequence, m: u32) -> Result<f64> {
    if m == 0 || m > 16 {
        return Err(Error::InvalidParameter(format!("poker block size {m}")));
    }
    let patterns = 1usize << m;
    let k = s.len() / m as usize;
    if k < 5 * patterns {
        return Err(Error::SequenceTooShort {
            got: s.len(),
            need: 5 * patterns * m as usize,
        });
    }
    let bits = s.bits();
    let mut counts = vec![0u64; patterns];
    for block in bits.chunks_exact(m as usize).take(k) {
        let idx = block.iter().fold(0usize, |acc, &b| (acc << 1) | b as usize);
        counts[idx] += 1;
    }
    // (2^m/k)*sum(n_i^2) - k, arranged so the numerator stays an exact
    // integer in f64.
    let sum_sq: f64 = counts.iter().map(|&c| (c as f64).powi(2)).sum();
    let k = k as f64;
    Ok((patterns as f64 * sum_sq - k * k) / k)
}

/// Poker test on 8-bit blocks, 255 degrees of freedom.
pub fn poker_test(s: &BitSequence, m: u32) -> Result<TestResult> {
    let statistic = poker_statistic(s, m)?;
    if m != DEFAULT_POKER_BLOCK {
        return Err(Error::NoThreshold(format!("poker block size {m}")));
    }
    Ok(TestResult::new(
        TestKind::Poker,
        statistic,
        POKER_THRESHOLD,
        Some((1u32 << m) - 1),
    ))
}

/// Expected number of maximal runs of length exactly `i` in `n` bits.
fn expected_runs(n: usize, i: u32) -> f64 {
    (n as f64 - i as f64 + 3.0) / 2f64.powi(i as i32 + 2)
}

/// Run-length distribution test over maximal blocks (1-runs) and gaps
/// (0-runs). Runs of length `K` or more share the top bucket, whose
/// expectation is the tail sum `(n + 2 - K) / 2^(K+1)`; the buckets below it
/// use the per-length expectation. `2K - 2` degrees of freedom; the reference
/// threshold applies to sample sizes giving K = 14.
pub fn runs_test(s: &BitSequence) -> Result<TestResult> {
    require_bits(s, 100)?;
    let bits = s.bits();
    let n = bits.len();

    let mut cap = 1u32;
    while expected_runs(n, cap + 1) >= 5.0 {
        cap += 1;
    }
    let df = 2 * cap - 2;
    if df != 26 {
        return Err(Error::NoThreshold(format!(
            "runs test with {df} degrees of freedom"
        )));
    }

    // blocks[i-1] / gaps[i-1]: count of maximal runs of length i (>= cap in
    // the last bucket).
    let mut blocks = vec![0u64; cap as usize];
    let mut gaps = vec![0u64; cap as usize];
    let mut run_value = bits[0];
    let mut run_len = 1usize;
    let record = |value: bool, len: usize, blocks: &mut [u64], gaps: &mut [u64]| {
        let idx = len.min(cap as usize) - 1;
        if value {
            blocks[idx] += 1;
        } else {
            gaps[idx] += 1;
        }
    };
    for &b in &bits[1..] {
        if b == run_value {
            run_len += 1;
        } else {
            record(run_value, run_len, &mut blocks, &mut gaps);
            run_value = b;
            run_len = 1;
        }
    }
    record(run_value, run_len, &mut blocks, &mut gaps);

    let mut statistic = 0.0;
    for i in 1..=cap {
        let e = if i == cap {
            (n as f64 + 2.0 - cap as f64) / 2f64.powi(cap as i32 + 1)
        } else {
            expected_runs(n, i)
        };
        let b = blocks[i as usize - 1] as f64;
        let g = gaps[i as usize - 1] as f64;
        statistic += (b - e).powi(2) / e + (g - e).powi(2) / e;
    }
    Ok(TestResult::new(TestKind::Runs, statistic, RUNS_THRESHOLD, Some(df)))
}

/// Lagged XOR correlation, one-sided: `X5 = 2(A(d) - (n-d)/2) / sqrt(n-d)`
/// where `A(d)` counts disagreements at lag `d`. Accepted iff `X5 < 1.645`
/// (signed, so fully correlated sequences are accepted; see the report).
pub fn autocorrelation_test(s: &BitSequence, d: usize) -> Result<TestResult> {
    let n = s.len();
    if d < 1 || d > n / 2 {
        return Err(Error::LagOutOfRange { lag: d, max: n / 2 });
    }
    let bits = s.bits();
    let disagreements = bits[..n - d]
        .iter()
        .zip(&bits[d..])
        .filter(|(a, b)| a != b)
        .count() as f64;
    let m = (n - d) as f64;
    let statistic = 2.0 * (disagreements - m / 2.0) / m.sqrt();
    Ok(TestResult::new(
        TestKind::Autocorrelation,
        statistic,
        AUTOCORRELATION_THRESHOLD,
        None,
    ))
}

/// Five-test report for consecutive non-overlapping samples of one generator.
#[derive(Debug, Clone, PartialEq)]
pub struct BatteryReport {
    pub generator: String,
    pub bits_per_sample: usize,
    pub bit_order: BitOrder,
    pub lag: usize,
    /// One five-test row per sample.
    pub samples: Vec<Vec<TestResult>>,
}

impl BatteryReport {
    pub fn cells_passed(&self) -> usize {
        self.samples
            .iter()
            .flatten()
            .filter(|r| r.pass)
            .count()
    }

    pub fn total_cells(&self) -> usize {
        self.samples.iter().map(Vec::len).sum()
    }

    pub fn all_pass(&self) -> bool {
        self.cells_passed() == self.total_cells()
    }
}

/// Draws `samples` consecutive non-overlapping segments of `bits_per_sample`
/// bits from the byte generator and runs the five tests on each.
pub fn run_battery<G: Iterator<Item = u8>>(
    gen: &mut G,
    name: &str,
    samples: usize,
    bits_per_sample: usize,
    order: BitOrder,
    lag: usize,
) -> Result<BatteryReport> {
    if samples == 0 {
        return Err(Error::InvalidParameter("samples must be >= 1".into()));
    }
    let bytes_per_sample = bits_per_sample.div_ceil(8);
    let mut rows = Vec::with_capacity(samples);
    let mut drawn = 0usize;
    for _ in 0..samples {
        let segment: Vec<u8> = gen.take(bytes_per_sample).collect();
        drawn += segment.len();
        if segment.len() < bytes_per_sample {
            return Err(Error::GeneratorExhausted(drawn));
        }
        let bits = BitSequence::from_bytes_truncated(&segment, order, bits_per_sample);
        rows.push(vec![
            frequency_test(&bits)?,
            serial_test(&bits)?,
            poker_test(&bits, DEFAULT_POKER_BLOCK)?,
            runs_test(&bits)?,
            autocorrelation_test(&bits, lag)?,
        ]);
    }
    Ok(BatteryReport {
        generator: name.to_string(),
        bits_per_sample,
        bit_order: order,
        lag,
        samples: rows,
    })
}

/// CSV export with one column pair per generator, mirroring the comparison
/// table layout: `test,sample,<gen>,<gen>_pass,...`.
pub fn battery_csv(reports: &[BatteryReport]) -> Result<String> {
    if reports.is_empty() {
        return Err(Error::EmptyInput);
    }
    let rows = reports[0].samples.len();
    if reports.iter().any(|r| r.samples.len() != rows) {
        return Err(Error::LengthMismatch(rows, 0));
    }
    let mut out = String::from("test,sample");
    for r in reports {
        out.push_str(&format!(",{},{}_pass", r.generator, r.generator));
    }
    out.push('\n');
    for (ti, kind) in TestKind::ALL.iter().enumerate() {
        for sample in 0..rows {
            out.push_str(&format!("{},{}", kind.name(), sample));
            for r in reports {
                let cell = &r.samples[sample][ti];
                out.push_str(&format!(",{:.3},{}", cell.statistic, cell.pass));
            }
            out.push('\n');
        }
    }
    Ok(out)
}

/// 32-bit Fibonacci LFSR emitting eight output bits per byte (low bit first).
#[derive(Debug, Clone)]
pub struct LfsrGenerator {
    state: u32,
    tap_mask: u32,
}

/// Default feedback taps (a maximal-length polynomial).
pub const DEFAULT_LFSR_TAPS: [u32; 4] = [32, 22, 2, 1];
/// Default LFSR seed.
pub const DEFAULT_LFSR_SEED: u32 = 0xACE1;

impl LfsrGenerator {
    pub fn new(seed: u32, taps: &[u32]) -> Result<Self> {
        if seed == 0 {
            return Err(Error::InvalidParameter("LFSR seed must be nonzero".into()));
        }
        if taps.is_empty() || taps.iter().any(|&t| t == 0 || t > 32) {
            return Err(Error::InvalidParameter(format!("LFSR taps {taps:?}")));
        }
        let tap_mask = taps.iter().fold(0u32, |m, &t| m | 1 << (t - 1));
        Ok(Self { state: seed, tap_mask })
    }

    fn next_bit(&mut self) -> u8 {
        let out = (self.state & 1) as u8;
        let feedback = (self.state & self.tap_mask).count_ones() & 1;
        self.state = (self.state >> 1) | (feedback << 31);
        out
    }
}

impl Iterator for LfsrGenerator {
    type Item = u8;

    fn next(&mut self) -> Option<u8> {
        let mut byte = 0u8;
        for i in 0..8 {
            byte |= self.next_bit() << i;
        }
        Some(byte)
    }
}

/// Minimal-standard multiplicative congruential generator, emitting the low
/// byte after each step `x <- 16807 x mod (2^31 - 1)`.
#[derive(Debug, Clone)]
pub struct LehmerGenerator {
    state: u64,
}

pub const LEHMER_MODULUS: u64 = 2_147_483_647;
pub const LEHMER_MULTIPLIER: u64 = 16_807;

impl LehmerGenerator {
    pub fn new(seed: u32) -> Result<Self> {
        let seed = seed as u64;
        if !(1..LEHMER_MODULUS).contains(&seed) {
            return Err(Error::InvalidParameter(format!(
                "Lehmer seed {seed} outside 1..={}",
                LEHMER_MODULUS - 1
            )));
        }
        Ok(Self { state: seed })
    }
}

impl Iterator for LehmerGenerator {
    type Item = u8;

    fn next(&mut self) -> Option<u8> {
        self.state = self.state * LEHMER_MULTIPLIER % LEHMER_MODULUS;
        Some((self.state & 0xFF) as u8)
    }
}

/// Three-shift xorshift register (13, 17, 5), emitting the low byte.
#[derive(Debug, Clone)]
pub struct MarsagliaGenerator {
    state: u32,
}

pub const DEFAULT_MARSAGLIA_SEED: u32 = 2_463_534_242;

impl MarsagliaGenerator {
    pub fn new(seed: u32) -> Result<Self> {
        if seed == 0 {
            return Err(Error::InvalidParameter("xorshift seed must be nonzero".into()));
        }
        Ok(Self { state: seed })
    }
}

impl Iterator for MarsagliaGenerator {
    type Item = u8;

    fn next(&mut self) -> Option<u8> {
        self.state ^= self.state << 13;
        self.state ^= self.state >> 17;
        self.state ^= self.state << 5;
        Some((self.state & 0xFF) as u8)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cipher::{KeystreamConfig, KeystreamGenerator};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn bits_of(pattern: impl Fn(usize) -> bool, n: usize) -> BitSequence {
        BitSequence::from_bits((0..n).map(pattern).collect())
    }

    #[test]
    fn threshold_table_is_pinned() {
        assert_eq!(FREQUENCY_THRESHOLD, 3.842);
        assert_eq!(SERIAL_THRESHOLD, 5.992);
        assert_eq!(POKER_THRESHOLD, 293.248);
        assert_eq!(RUNS_THRESHOLD, 38.885);
        assert_eq!(AUTOCORRELATION_THRESHOLD, 1.645);
    }

    #[test]
    fn thresholds_match_chi_square_quantiles() {
        use statrs::distribution::{ChiSquared, ContinuousCDF, Normal};
        let q = |df: f64| ChiSquared::new(df).unwrap().inverse_cdf(0.95);
        assert!((q(1.0) - FREQUENCY_THRESHOLD).abs() < 2e-3);
        assert!((q(2.0) - SERIAL_THRESHOLD).abs() < 2e-3);
        assert!((q(255.0) - POKER_THRESHOLD).abs() < 2e-3);
        assert!((q(26.0) - RUNS_THRESHOLD).abs() < 2e-3);
        let z = Normal::new(0.0, 1.0).unwrap().inverse_cdf(0.95);
        assert!((z - AUTOCORRELATION_THRESHOLD).abs() < 1e-3);
    }

    #[test]
    fn frequency_balanced_and_degenerate() {
        let balanced = bits_of(|i| i % 2 == 0, 400_000);
        let r = frequency_test(&balanced).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert!(r.pass);

        let ones = bits_of(|_| true, 400_000);
        let r = frequency_test(&ones).unwrap();
        assert_eq!(r.statistic, 400_000.0);
        assert!(!r.pass);

        assert!(frequency_test(&bits_of(|_| true, 50)).is_err());
    }

    #[test]
    fn serial_alternating_matches_direct_count_oracle() {
        let n = 1000;
        let s = bits_of(|i| i % 2 == 1, n);
        // Direct-count oracle, written independently of serial_test.
        let bits = s.bits();
        let mut counts = [0f64; 4];
        for i in 0..n - 1 {
            counts[((bits[i] as usize) << 1) | bits[i + 1] as usize] += 1.0;
        }
        let n1 = bits.iter().filter(|&&b| b).count() as f64;
        let n0 = n as f64 - n1;
        let expected = 4.0 / (n as f64 - 1.0)
            * (counts[0].powi(2) + counts[1].powi(2) + counts[2].powi(2) + counts[3].powi(2))
            - 2.0 / n as f64 * (n0 * n0 + n1 * n1)
            + 1.0;

        let r = serial_test(&s).unwrap();
        assert!((r.statistic - expected).abs() < 1e-9);
        // Alternating bits concentrate all pairs in 01/10: close to n - 1.
        assert!((r.statistic - (n as f64 - 1.0)).abs() < 0.01);
        assert!(!r.pass);
    }

    #[test]
    fn poker_reference_values() {
        // All blocks identical: X3 = (2^m - 1) k.
        let zeros = bits_of(|_| false, 400_000);
        let r = poker_test(&zeros, 8).unwrap();
        assert_eq!(r.statistic, 255.0 * 50_000.0);
        assert!(!r.pass);
        assert_eq!(r.degrees_of_freedom, Some(255));

        // Exactly uniform block counts: X3 = 0. 256 patterns x 16 repeats.
        let mut bits = Vec::new();
        for _ in 0..16 {
            for pattern in 0..=255u16 {
                for bit in (0..8).rev() {
                    bits.push((pattern >> bit) & 1 == 1);
                }
            }
        }
        let uniform = BitSequence::from_bits(bits);
        let r = poker_statistic(&uniform, 8).unwrap();
        assert_eq!(r, 0.0);
    }

    #[test]
    fn poker_m1_reduces_to_frequency() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..10 {
            let s = BitSequence::from_bits((0..5000).map(|_| rng.gen_bool(0.5)).collect());
            let x1 = frequency_test(&s).unwrap().statistic;
            let x3 = poker_statistic(&s, 1).unwrap();
            assert!((x1 - x3).abs() < 1e-9, "x1={x1} x3={x3}");
        }
    }

    #[test]
    fn poker_requires_enough_blocks() {
        assert!(poker_statistic(&bits_of(|_| false, 8 * 1279), 8).is_err());
        assert!(poker_statistic(&bits_of(|_| false, 8 * 1280), 8).is_ok());
    }

    #[test]
    fn runs_alternating_fails_hard() {
        let s = bits_of(|i| i % 2 == 0, 400_000);
        let r = runs_test(&s).unwrap();
        assert_eq!(r.degrees_of_freedom, Some(26));
        assert!(r.statistic > 38.885 * 100.0);
        assert!(!r.pass);
    }

    #[test]
    fn runs_bucket_count_is_14_at_reference_length() {
        // e_i >= 5 holds through i = 14 at n = 400,000 and fails at i = 15.
        assert!(expected_runs(400_000, 14) >= 5.0);
        assert!(expected_runs(400_000, 15) < 5.0);
        // Lengths with a different bucket count have no reference threshold.
        assert!(matches!(
            runs_test(&bits_of(|i| i % 2 == 0, 10_000)),
            Err(Error::NoThreshold(_))
        ));
    }

    #[test]
    fn autocorrelation_reference_values() {
        let n = 10_000;
        let d = 8;
        // Period-d sequence: zero disagreements, statistic -sqrt(n-d), accepted.
        let periodic = bits_of(|i| matches!(i % d, 0 | 3 | 4), n);
        let r = autocorrelation_test(&periodic, d).unwrap();
        assert!((r.statistic + ((n - d) as f64).sqrt()).abs() < 1e-9);
        assert!(r.pass, "signed rule accepts fully correlated input");

        // Anti-correlated at lag d: statistic +sqrt(n-d), rejected.
        let anti = BitSequence::from_bits((0..n).map(|i| (i / d) % 2 == 0).collect());
        let r = autocorrelation_test(&anti, d).unwrap();
        assert!((r.statistic - ((n - d) as f64).sqrt()).abs() < 1e-9);
        assert!(!r.pass);

        assert!(autocorrelation_test(&periodic, 0).is_err());
        assert!(autocorrelation_test(&periodic, n / 2 + 1).is_err());
    }

    #[test]
    fn battery_on_zeros_fails_frequency_everywhere() {
        let mut zeros = std::iter::repeat(0u8);
        let report =
            run_battery(&mut zeros, "zeros", 3, DEFAULT_SAMPLE_BITS, BitOrder::LsbFirst, 8).unwrap();
        for row in &report.samples {
            assert!(!row[0].pass, "frequency must fail on constant input");
        }
        assert!(!report.all_pass());
        assert_eq!(report.total_cells(), 15);
    }

    #[test]
    fn battery_reports_exhaustion() {
        let mut short = std::iter::repeat_n(0u8, 10_000);
        let err = run_battery(&mut short, "short", 5, DEFAULT_SAMPLE_BITS, BitOrder::LsbFirst, 8)
            .unwrap_err();
        assert!(matches!(err, Error::GeneratorExhausted(_)));
    }

    #[test]
    fn default_lfsr_shows_a_failure_like_the_comparison_table() {
        let mut gen = LfsrGenerator::new(DEFAULT_LFSR_SEED, &DEFAULT_LFSR_TAPS).unwrap();
        let report =
            run_battery(&mut gen, "lfsr", 5, DEFAULT_SAMPLE_BITS, BitOrder::LsbFirst, 8).unwrap();
        let runs_or_auto_failures = report
            .samples
            .iter()
            .flatten()
            .filter(|r| {
                !r.pass && matches!(r.test, TestKind::Runs | TestKind::Autocorrelation)
            })
            .count();
        assert!(runs_or_auto_failures >= 1);
    }

    #[test]
    fn lehmer_first_byte_from_seed_one() {
        let mut g = LehmerGenerator::new(1).unwrap();
        // One step of the recurrence: state 16807, low byte 167.
        assert_eq!(g.next(), Some(167));
    }

    #[test]
    fn generator_seed_validation() {
        assert!(LfsrGenerator::new(0, &DEFAULT_LFSR_TAPS).is_err());
        assert!(LfsrGenerator::new(1, &[]).is_err());
        assert!(LfsrGenerator::new(1, &[33]).is_err());
        assert!(LehmerGenerator::new(0).is_err());
        assert!(MarsagliaGenerator::new(0).is_err());
    }

    #[test]
    fn generators_are_deterministic() {
        let a: Vec<u8> = LfsrGenerator::new(77, &DEFAULT_LFSR_TAPS).unwrap().take(64).collect();
        let b: Vec<u8> = LfsrGenerator::new(77, &DEFAULT_LFSR_TAPS).unwrap().take(64).collect();
        assert_eq!(a, b);
        let a: Vec<u8> = LehmerGenerator::new(99).unwrap().take(64).collect();
        let b: Vec<u8> = LehmerGenerator::new(99).unwrap().take(64).collect();
        assert_eq!(a, b);
        let a: Vec<u8> = MarsagliaGenerator::new(5).unwrap().take(64).collect();
        let b: Vec<u8> = MarsagliaGenerator::new(5).unwrap().take(64).collect();
        assert_eq!(a, b);
    }

    #[test]
    fn battery_csv_layout() {
        let mut gen = MarsagliaGenerator::new(DEFAULT_MARSAGLIA_SEED).unwrap();
        let report =
            run_battery(&mut gen, "marsaglia", 2, DEFAULT_SAMPLE_BITS, BitOrder::LsbFirst, 8)
                .unwrap();
        let csv = battery_csv(std::slice::from_ref(&report)).unwrap();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("test,sample,marsaglia,marsaglia_pass"));
        assert_eq!(csv.lines().count(), 1 + 5 * 2);
        assert!(csv.lines().nth(1).unwrap().starts_with("frequency,0,"));
    }

    #[test]
    fn iid_reference_passes_at_design_rate() {
        // Frequency and serial tests on independent uniform bits should fail
        // at roughly the 5% design level. Seed pinned for reproducibility.
        let mut rng = ChaCha8Rng::seed_from_u64(20240901);
        let mut freq_failures = 0;
        let mut serial_failures = 0;
        for _ in 0..100 {
            let s = BitSequence::from_bits((0..10_000).map(|_| rng.gen_bool(0.5)).collect());
            if !frequency_test(&s).unwrap().pass {
                freq_failures += 1;
            }
            if !serial_test(&s).unwrap().pass {
                serial_failures += 1;
            }
        }
        assert!(freq_failures <= 10, "{freq_failures} frequency failures");
        assert!(serial_failures <= 10, "{serial_failures} serial failures");
    }

    #[test]
    fn lorenz_failure_rate_over_independent_segments() {
        // 100 independent seeds, one reference-length sample each: every
        // test's failure rate stays within the 5% design level plus slack.
        let mut rng = ChaCha8Rng::seed_from_u64(424242);
        let mut failures = [0usize; 5];
        for _ in 0..100 {
            let cfg = KeystreamConfig::new(
                rng.gen_range(0..crate::map::REGISTER_RANGE),
                rng.gen_range(0..crate::map::REGISTER_RANGE),
                rng.gen_range(0..crate::map::REGISTER_RANGE),
                10_000,
            )
            .unwrap();
            let mut gen = KeystreamGenerator::new(cfg).unwrap();
            let report =
                run_battery(&mut gen, "lorenz", 1, DEFAULT_SAMPLE_BITS, BitOrder::LsbFirst, 8)
                    .unwrap();
            for (i, cell) in report.samples[0].iter().enumerate() {
                if !cell.pass {
                    failures[i] += 1;
                }
            }
        }
        for (kind, &count) in TestKind::ALL.iter().zip(&failures) {
            assert!(count <= 10, "{} failed {count}/100 segments", kind.name());
        }
    }
}
