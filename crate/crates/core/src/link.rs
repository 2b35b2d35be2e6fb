//! Full-duplex link model: transmitter (encrypt + parallel-serial), ideal
//! bit-transparent channel, receiver (serial-parallel + decrypt), and the
//! mismatch sweeps that measure how the bit error ratio reacts when the
//! receiver's secret drifts from the transmitter's.

use crate::cipher::{offset_const_z, KeystreamConfig, KeystreamGenerator};
use crate::error::{Error, Result};
use crate::map::REGISTER_RANGE;

/// Order in which a byte's bits enter the serial channel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BitOrder {
    #[default]
    LsbFirst,
    MsbFirst,
}

/// Parallel-serial conversion.
pub fn serialize(bytes: &[u8], order: BitOrder) -> Vec<bool> {
    let mut bits = Vec::with_capacity(bytes.len() * 8);
    for &b in bytes {
        for i in 0..8 {
            let shift = match order {
                BitOrder::LsbFirst => i,
                BitOrder::MsbFirst => 7 - i,
            };
            bits.push((b >> shift) & 1 == 1);
        }
    }
    bits
}

/// Serial-parallel conversion; the bit count must be a multiple of 8.
pub fn deserialize(bits: &[bool], order: BitOrder) -> Result<Vec<u8>> {
    if !bits.len().is_multiple_of(8) {
        return Err(Error::RaggedBitLength(bits.len()));
    }
    Ok(bits
        .chunks_exact(8)
        .map(|chunk| {
            chunk.iter().enumerate().fold(0u8, |acc, (i, &bit)| {
                let shift = match order {
                    BitOrder::LsbFirst => i,
                    BitOrder::MsbFirst => 7 - i,
                };
                acc | ((bit as u8) << shift)
            })
        })
        .collect())
}

/// Transmitter and receiver secrets plus the shared serializer convention.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkConfig {
    pub tx: KeystreamConfig,
    pub rx: KeystreamConfig,
    pub bit_order: BitOrder,
}

impl LinkConfig {
    /// Matched link: both ends share `config`.
    pub fn matched(config: KeystreamConfig) -> Self {
        Self {
            tx: config,
            rx: config,
            bit_order: BitOrder::default(),
        }
    }
}

impl Default for LinkConfig {
    fn default() -> Self {
        Self::matched(KeystreamConfig::default())
    }
}

/// Outcome of one end-to-end transmission.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkReport {
    pub plain: Vec<u8>,
    pub cipher: Vec<u8>,
    pub recovered: Vec<u8>,
    pub bit_errors: u64,
    pub total_bits: u64,
    pub ber: f64,
}

/// Fraction of differing bits between two equal-length byte sequences.
pub fn compute_ber(a: &[u8], b: &[u8]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch(a.len(), b.len()));
    }
    if a.is_empty() {
        return Err(Error::EmptyInput);
    }
    let errors = count_bit_errors(a, b);
    Ok(errors as f64 / (a.len() as u64 * 8) as f64)
}

fn count_bit_errors(a: &[u8], b: &[u8]) -> u64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x ^ y).count_ones() as u64)
        .sum()
}

/// Encrypts at the transmitter, serializes onto the ideal channel,
/// deserializes at the receiver, decrypts, and scores plaintext recovery
/// bitwise.
pub fn run_link(cfg: &LinkConfig, plain: &[u8]) -> Result<LinkReport> {
    run_link_with_generators(
        KeystreamGenerator::new(cfg.tx)?,
        KeystreamGenerator::new(cfg.rx)?,
        cfg.bit_order,
        plain,
    )
}

fn run_link_with_generators(
    mut tx: KeystreamGenerator,
    mut rx: KeystreamGenerator,
    order: BitOrder,
    plain: &[u8],
) -> Result<LinkReport> {
    if plain.is_empty() {
        return Err(Error::EmptyInput);
    }
    let cipher = tx.encrypt(plain);
    // Ideal channel: bits arrive exactly as sent.
    let channel_bits = serialize(&cipher, order);
    let received = deserialize(&channel_bits, order)?;
    debug_assert_eq!(received, cipher);
    let recovered = rx.decrypt(&received);
    let bit_errors = count_bit_errors(plain, &recovered);
    let total_bits = plain.len() as u64 * 8;
    Ok(LinkReport {
        plain: plain.to_vec(),
        cipher,
        recovered,
        bit_errors,
        total_bits,
        ber: bit_errors as f64 / total_bits as f64,
    })
}

/// Which receiver-side quantity a sweep perturbs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MismatchTarget {
    /// The additive constant of the Z row.
    ConstZ,
    X0,
    Y0,
    Z0,
    /// The perturbation interval N.
    PerturbInterval,
}

impl MismatchTarget {
    pub fn label(&self) -> &'static str {
        match self {
            MismatchTarget::ConstZ => "const_z",
            MismatchTarget::X0 => "x0",
            MismatchTarget::Y0 => "y0",
            MismatchTarget::Z0 => "z0",
            MismatchTarget::PerturbInterval => "n_perturb",
        }
    }
}

/// A sweep offset: an absolute register/constant step or a percentage of the
/// nominal value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Offset {
    Absolute(i64),
    Percent(f64),
}

impl Offset {
    pub fn is_zero(&self) -> bool {
        match self {
            Offset::Absolute(v) => *v == 0,
            Offset::Percent(p) => *p == 0.0,
        }
    }

    fn apply(&self, nominal: i64) -> i64 {
        match self {
            Offset::Absolute(v) => nominal + v,
            Offset::Percent(p) => (nominal as f64 * (1.0 + p / 100.0)).round() as i64,
        }
    }
}

impl std::fmt::Display for Offset {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Offset::Absolute(v) => write!(f, "{v}"),
            Offset::Percent(p) => write!(f, "{p}%"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub offset: Offset,
    pub ber: f64,
}

/// Result of a receiver-mismatch sweep. `rejected` lists offsets that drove
/// the target out of its legal range.
#[derive(Debug, Clone, PartialEq)]
pub struct MismatchSweepResult {
    pub target: MismatchTarget,
    pub points: Vec<SweepPoint>,
    pub rejected: Vec<Offset>,
}

fn apply_register_offset(nominal: u32, offset: Offset) -> Result<u32> {
    let value = offset.apply(nominal as i64);
    if !(0..REGISTER_RANGE as i64).contains(&value) {
        return Err(Error::RegisterOutOfRange {
            value,
            max: REGISTER_RANGE,
        });
    }
    Ok(value as u32)
}

fn receiver_for(base: &LinkConfig, target: MismatchTarget, offset: Offset) -> Result<KeystreamGenerator> {
    let mut rx_cfg = base.rx;
    match target {
        MismatchTarget::X0 => rx_cfg.x0 = apply_register_offset(rx_cfg.x0, offset)?,
        MismatchTarget::Y0 => rx_cfg.y0 = apply_register_offset(rx_cfg.y0, offset)?,
        MismatchTarget::Z0 => rx_cfg.z0 = apply_register_offset(rx_cfg.z0, offset)?,
        MismatchTarget::PerturbInterval => {
            let nominal = rx_cfg.perturbation.interval() as i64;
            let value = offset.apply(nominal);
            let interval = u16::try_from(value)
                .map_err(|_| Error::InvalidParameter(format!("interval offset gives {value}")))?;
            rx_cfg.perturbation = crate::map::PerturbationConfig::new(interval)?;
        }
        MismatchTarget::ConstZ => {
            let nominal_coeffs = rx_cfg.derive();
            let plan = nominal_coeffs.require_shift_plan()?;
            let delta = offset.apply(plan.z_constant) - plan.z_constant;
            return KeystreamGenerator::with_coefficients(rx_cfg, offset_const_z(&rx_cfg, delta)?, true);
        }
    }
    KeystreamGenerator::new(rx_cfg)
}

/// The repeating 0..255 staircase used as the default link stimulus.
pub fn ramp_plaintext(len: usize) -> Vec<u8> {
    (0..len).map(|i| (i % 256) as u8).collect()
}

/// Runs the link once per offset, perturbing only the receiver's `target`.
/// The offset list must contain a zero entry; the matched point is recorded
/// first. Offsets that leave the target's legal range are reported in
/// `rejected` rather than failing the sweep.
pub fn mismatch_sweep(
    base: &LinkConfig,
    target: MismatchTarget,
    offsets: &[Offset],
    message_len: usize,
) -> Result<MismatchSweepResult> {
    mismatch_sweep_with_plaintext(base, target, offsets, &ramp_plaintext(message_len))
}

/// [`mismatch_sweep`] with an explicit stimulus.
pub fn mismatch_sweep_with_plaintext(
    base: &LinkConfig,
    target: MismatchTarget,
    offsets: &[Offset],
    plain: &[u8],
) -> Result<MismatchSweepResult> {
    if offsets.is_empty() {
        return Err(Error::EmptyInput);
    }
    if !offsets.iter().any(Offset::is_zero) {
        return Err(Error::InvalidParameter(
            "sweep offsets must include 0 (the matched point)".into(),
        ));
    }
    if plain.len() < 50_000 {
        return Err(Error::NotEnoughSamples {
            got: plain.len(),
            need: 50_000,
        });
    }

    let mut ordered: Vec<Offset> = Vec::with_capacity(offsets.len());
    ordered.extend(offsets.iter().copied().filter(|o| o.is_zero()).take(1));
    ordered.extend(offsets.iter().copied().filter(|o| !o.is_zero()));

    let mut points = Vec::new();
    let mut rejected = Vec::new();
    for offset in ordered {
        let rx = match receiver_for(base, target, offset) {
            Ok(rx) => rx,
            Err(_) => {
                rejected.push(offset);
                continue;
            }
        };
        let tx = KeystreamGenerator::new(base.tx)?;
        let report = run_link_with_generators(tx, rx, base.bit_order, plain)?;
        points.push(SweepPoint {
            offset,
            ber: report.ber,
        });
    }
    Ok(MismatchSweepResult {
        target,
        points,
        rejected,
    })
}

/// CSV export: header `offset,ber`, decimal BER with six significant digits.
pub fn sweep_csv(result: &MismatchSweepResult) -> String {
    let mut out = String::from("offset,ber\n");
    for p in &result.points {
        out.push_str(&format!("{},{:.6}\n", p.offset, p.ber));
    }
    out
}
