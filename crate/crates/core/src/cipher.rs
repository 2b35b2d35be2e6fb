//! Byte-oriented XOR stream cipher keyed by the low byte of the X register.
//!
//! A [`KeystreamGenerator`] owns one instance of the integer map and emits one
//! key byte per map step. Key byte `i` is the low byte of the state after `i`
//! steps from the initial conditions (emit-then-step), so the very first key
//! byte is `x0 mod 256`. Encrypt and decrypt are the same XOR transform.

use num_rational::Rational64;

use crate::error::{Error, Result};
use crate::map::{
    derive_coefficients, step_once, ChaoticState, ContinuousParams, MapCoefficients,
    PerturbationConfig, TransformParams, REGISTER_RANGE,
};

/// Reference initial conditions for the X, Y, Z registers.
pub const DEFAULT_SEED: (u32, u32, u32) = (18503, 21315, 32032);

/// The complete shared secret: initial conditions, perturbation interval, and
/// the map parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KeystreamConfig {
    pub x0: u32,
    pub y0: u32,
    pub z0: u32,
    pub perturbation: PerturbationConfig,
    pub continuous: ContinuousParams,
    pub transform: TransformParams,
}

impl KeystreamConfig {
    pub fn new(x0: u32, y0: u32, z0: u32, interval: u16) -> Result<Self> {
        let cfg = Self {
            x0,
            y0,
            z0,
            perturbation: PerturbationConfig::new(interval)?,
            continuous: ContinuousParams::default(),
            transform: TransformParams::default(),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        for v in [self.x0, self.y0, self.z0] {
            if v >= REGISTER_RANGE {
                return Err(Error::RegisterOutOfRange {
                    value: v as i64,
                    max: REGISTER_RANGE,
                });
            }
        }
        Ok(())
    }

    pub fn initial_state(&self) -> Result<ChaoticState> {
        ChaoticState::new(self.x0, self.y0, self.z0)
    }

    pub fn derive(&self) -> MapCoefficients {
        derive_coefficients(&self.continuous, &self.transform)
    }

    /// The reference configuration with a custom perturbation interval.
    pub fn with_interval(interval: u16) -> Result<Self> {
        Self::new(DEFAULT_SEED.0, DEFAULT_SEED.1, DEFAULT_SEED.2, interval)
    }
}

impl Default for KeystreamConfig {
    fn default() -> Self {
        Self {
            x0: DEFAULT_SEED.0,
            y0: DEFAULT_SEED.1,
            z0: DEFAULT_SEED.2,
            perturbation: PerturbationConfig::default(),
            continuous: ContinuousParams::default(),
            transform: TransformParams::default(),
        }
    }
}

/// Keystream source: one key byte per map step.
#[derive(Debug, Clone)]
pub struct KeystreamGenerator {
    config: KeystreamConfig,
    coeffs: MapCoefficients,
    state: ChaoticState,
    perturbation_enabled: bool,
    emitted: u64,
}

impl KeystreamGenerator {
    pub fn new(config: KeystreamConfig) -> Result<Self> {
        Self::with_perturbation(config, true)
    }

    /// Evaluation constructor: `enabled = false` runs the pure map with the
    /// perturbation datapath switched off.
    pub fn with_perturbation(config: KeystreamConfig, enabled: bool) -> Result<Self> {
        let coeffs = config.derive();
        coeffs.require_shift_plan()?;
        Self::with_coefficients(config, coeffs, enabled)
    }

    /// Builds a generator around explicit coefficients. Lets evaluation code
    /// inject a mismatched map (e.g. an offset additive constant) while
    /// keeping the configured initial conditions.
    pub fn with_coefficients(
        config: KeystreamConfig,
        coeffs: MapCoefficients,
        perturbation_enabled: bool,
    ) -> Result<Self> {
        config.validate()?;
        coeffs.require_shift_plan()?;
        let state = config.initial_state()?;
        Ok(Self {
            config,
            coeffs,
            state,
            perturbation_enabled,
            emitted: 0,
        })
    }

    pub fn config(&self) -> &KeystreamConfig {
        &self.config
    }

    pub fn state(&self) -> &ChaoticState {
        &self.state
    }

    /// Bytes emitted so far; equals the number of map steps consumed.
    pub fn emitted(&self) -> u64 {
        self.emitted
    }

    /// Rewinds to the initial conditions.
    pub fn reset(&mut self) {
        self.state = self.config.initial_state().expect("validated at construction");
        self.emitted = 0;
    }

    fn advance(&mut self) {
        self.state = if self.perturbation_enabled {
            step_once(&self.state, &self.coeffs, &self.config.perturbation)
        } else {
            crate::map::map_step(&self.state, &self.coeffs)
        };
        self.emitted += 1;
        debug_assert_eq!(self.emitted, self.state.n);
    }

    /// Emits the low byte of the current X register, then advances one step.
    pub fn next_key_byte(&mut self) -> u8 {
        let key = (self.state.x & 0xFF) as u8;
        self.advance();
        key
    }

    /// Evaluation-only: emits the full 17-bit X word with the same advance
    /// semantics as [`Self::next_key_byte`]. The production cipher path never
    /// uses this.
    pub fn full_key_word(&mut self) -> u32 {
        let word = self.state.x;
        self.advance();
        word
    }

    /// Convenience: the next `count` key bytes.
    pub fn key_bytes(&mut self, count: usize) -> Vec<u8> {
        (0..count).map(|_| self.next_key_byte()).collect()
    }

    /// XORs the input with the keystream, advancing by `input.len()` steps.
    pub fn encrypt(&mut self, plain: &[u8]) -> Vec<u8> {
        plain.iter().map(|&b| b ^ self.next_key_byte()).collect()
    }

    /// XOR is self-inverse; identical to [`Self::encrypt`].
    pub fn decrypt(&mut self, cipher: &[u8]) -> Vec<u8> {
        self.encrypt(cipher)
    }
}

impl Iterator for KeystreamGenerator {
    type Item = u8;

    fn next(&mut self) -> Option<u8> {
        Some(self.next_key_byte())
    }
}

/// Coefficients with an integer offset added to the Z-row constant; used by
/// the mismatch experiments.
pub fn offset_const_z(config: &KeystreamConfig, offset: i64) -> Result<MapCoefficients> {
    let mut coeffs = config.derive();
    coeffs.require_shift_plan()?;
    coeffs.const_z += Rational64::from_integer(offset);
    if let Some(plan) = coeffs.shift_plan.as_mut() {
        plan.z_constant += offset;
    }
    Ok(coeffs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_key_bytes_from_reference_seed() {
        let mut g = KeystreamGenerator::new(KeystreamConfig::default()).unwrap();
        assert_eq!(g.next_key_byte(), 0x47); // 18503 mod 256
        assert_eq!(g.next_key_byte(), 0xA7); // 18855 mod 256
    }

    #[test]
    fn identical_configs_give_identical_streams() {
        let mut a = KeystreamGenerator::new(KeystreamConfig::default()).unwrap();
        let mut b = KeystreamGenerator::new(KeystreamConfig::default()).unwrap();
        assert_eq!(a.key_bytes(10_000), b.key_bytes(10_000));
    }

    #[test]
    fn encrypt_zero_exposes_key() {
        let mut g = KeystreamGenerator::new(KeystreamConfig::default()).unwrap();
        assert_eq!(g.encrypt(&[0x00]), vec![0x47]);
    }

    #[test]
    fn empty_input_does_not_advance() {
        let mut g = KeystreamGenerator::new(KeystreamConfig::default()).unwrap();
        assert_eq!(g.encrypt(&[]), Vec::<u8>::new());
        assert_eq!(g.emitted(), 0);
        assert_eq!(g.state().n, 0);
    }

    #[test]
    fn decrypt_inverts_encrypt() {
        let plain: Vec<u8> = (0..4096u32).map(|i| (i * 31 + 7) as u8).collect();
        let mut tx = KeystreamGenerator::new(KeystreamConfig::default()).unwrap();
        let mut rx = KeystreamGenerator::new(KeystreamConfig::default()).unwrap();
        let cipher = tx.encrypt(&plain);
        assert_eq!(rx.decrypt(&cipher), plain);
    }

    #[test]
    fn decrypt_single_byte_example() {
        let mut rx = KeystreamGenerator::new(KeystreamConfig::default()).unwrap();
        assert_eq!(rx.decrypt(&[0x47]), vec![0x00]);
    }

    #[test]
    fn lsb_mismatch_garbles_half_the_bits() {
        let plain: Vec<u8> = (0..50_000u32).map(|i| (i % 256) as u8).collect();
        let mut tx = KeystreamGenerator::new(KeystreamConfig::default()).unwrap();
        let cipher = tx.encrypt(&plain);
        let bad = KeystreamConfig::new(DEFAULT_SEED.0 + 1, DEFAULT_SEED.1, DEFAULT_SEED.2, 10_000)
            .unwrap();
        let mut rx = KeystreamGenerator::new(bad).unwrap();
        let recovered = rx.decrypt(&cipher);
        let wrong_bits: u32 = plain
            .iter()
            .zip(&recovered)
            .map(|(a, b)| (a ^ b).count_ones())
            .sum();
        let ber = wrong_bits as f64 / (plain.len() as f64 * 8.0);
        assert!((0.47..=0.53).contains(&ber), "ber = {ber}");
    }

    #[test]
    fn keystream_is_plaintext_independent() {
        let p1: Vec<u8> = (0..2048u32).map(|i| (i * 17) as u8).collect();
        let p2: Vec<u8> = (0..2048u32).map(|i| (i * 101 + 3) as u8).collect();
        let mut g1 = KeystreamGenerator::new(KeystreamConfig::default()).unwrap();
        let mut g2 = KeystreamGenerator::new(KeystreamConfig::default()).unwrap();
        let c1 = g1.encrypt(&p1);
        let c2 = g2.encrypt(&p2);
        for i in 0..p1.len() {
            assert_eq!(c1[i] ^ c2[i], p1[i] ^ p2[i]);
        }
    }

    #[test]
    fn full_key_word_tracks_key_byte() {
        let mut words = KeystreamGenerator::new(KeystreamConfig::default()).unwrap();
        let mut bytes = KeystreamGenerator::new(KeystreamConfig::default()).unwrap();
        assert_eq!(words.full_key_word(), 18503);
        words.reset();
        for _ in 0..1000 {
            assert_eq!((words.full_key_word() & 0xFF) as u8, bytes.next_key_byte());
        }
    }

    #[test]
    fn key_byte_histogram_is_nearly_uniform() {
        let mut g = KeystreamGenerator::new(KeystreamConfig::default()).unwrap();
        let mut counts = [0u32; 256];
        for _ in 0..1_000_000 {
            counts[g.next_key_byte() as usize] += 1;
        }
        let max = *counts.iter().max().unwrap() as f64;
        let min = *counts.iter().min().unwrap() as f64;
        assert!(min > 0.0, "some byte value never occurs");
        assert!(max / min < 1.1, "max/min bin ratio = {}", max / min);
    }

    #[test]
    fn emitted_count_tracks_state_counter() {
        let mut g = KeystreamGenerator::new(KeystreamConfig::default()).unwrap();
        g.key_bytes(12345);
        assert_eq!(g.emitted(), 12345);
        assert_eq!(g.state().n, 12345);
    }

    #[test]
    fn config_rejects_out_of_range_seed() {
        assert!(KeystreamConfig::new(REGISTER_RANGE, 0, 0, 10_000).is_err());
        assert!(KeystreamConfig::new(0, 0, 0, 0).is_err());
    }

    #[test]
    fn offset_const_z_changes_plan_and_rational() {
        let cfg = KeystreamConfig::default();
        let c = offset_const_z(&cfg, 5).unwrap();
        assert_eq!(c.const_z, Rational64::from_integer(13445));
        assert_eq!(c.shift_plan.unwrap().z_constant, 13445);
    }
}
