//! Line-oriented `key=value` configuration files carrying the shared secret.
//!
//! Recognized keys: `x0`, `y0`, `z0`, `n_perturb`, `bit_order`, and the
//! parameter overrides `k_num`, `k_den`, `delta`, `gamma`, `b`, `bias`,
//! `scale`. Numbers are decimal or `0x`-hex. Missing keys fall back to the
//! reference values; unknown or duplicate keys are rejected. Blank lines and
//! `#` comments are ignored.

use anyhow::{anyhow, bail, Context, Result};
use chaoslink_core::link::BitOrder;
use chaoslink_core::map::{ContinuousParams, TransformParams};
use chaoslink_core::KeystreamConfig;
use num_rational::Rational64;

/// Parses decimal or `0x`-prefixed hex, with an optional leading minus.
pub fn parse_i64(text: &str) -> Result<i64> {
    let text = text.trim();
    let (negative, rest) = match text.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, text),
    };
    let value = if let Some(hex) = rest.strip_prefix("0x").or_else(|| rest.strip_prefix("0X")) {
        i64::from_str_radix(hex, 16)
    } else {
        rest.parse::<i64>()
    }
    .with_context(|| format!("invalid number {text:?}"))?;
    Ok(if negative { -value } else { value })
}

pub fn parse_u64(text: &str) -> Result<u64> {
    let v = parse_i64(text)?;
    u64::try_from(v).map_err(|_| anyhow!("{v} is negative"))
}

pub fn parse_u32(text: &str) -> Result<u32> {
    Ok(u32::try_from(parse_u64(text)?)?)
}

pub fn parse_u16(text: &str) -> Result<u16> {
    Ok(u16::try_from(parse_u64(text)?)?)
}

pub fn parse_usize(text: &str) -> Result<usize> {
    Ok(usize::try_from(parse_u64(text)?)?)
}

/// A fully resolved configuration file.
#[derive(Debug, Clone, PartialEq)]
pub struct FileConfig {
    pub x0: u32,
    pub y0: u32,
    pub z0: u32,
    pub n_perturb: u16,
    pub bit_order: BitOrder,
    pub k_num: i64,
    pub k_den: i64,
    pub delta: i64,
    pub gamma: i64,
    pub b: i64,
    pub bias: i64,
    pub scale: i64,
}

impl Default for FileConfig {
    fn default() -> Self {
        Self {
            x0: 18503,
            y0: 21315,
            z0: 32032,
            n_perturb: 10_000,
            bit_order: BitOrder::LsbFirst,
            k_num: 1,
            k_den: 64,
            delta: 8,
            gamma: 24,
            b: 2,
            bias: 40,
            scale: 512,
        }
    }
}

impl FileConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        let mut seen = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| anyhow!("line {}: expected key=value, got {line:?}", lineno + 1))?;
            let key = key.trim();
            let value = value.trim();
            if seen.contains(&key.to_string()) {
                bail!("line {}: duplicate key {key:?}", lineno + 1);
            }
            seen.push(key.to_string());
            match key {
                "x0" => cfg.x0 = parse_u32(value)?,
                "y0" => cfg.y0 = parse_u32(value)?,
                "z0" => cfg.z0 = parse_u32(value)?,
                "n_perturb" => cfg.n_perturb = parse_u16(value)?,
                "bit_order" => {
                    cfg.bit_order = match value {
                        "lsb" => BitOrder::LsbFirst,
                        "msb" => BitOrder::MsbFirst,
                        other => bail!("bit_order must be lsb or msb, got {other:?}"),
                    }
                }
                "k_num" => cfg.k_num = parse_i64(value)?,
                "k_den" => cfg.k_den = parse_i64(value)?,
                "delta" => cfg.delta = parse_i64(value)?,
                "gamma" => cfg.gamma = parse_i64(value)?,
                "b" => cfg.b = parse_i64(value)?,
                "bias" => cfg.bias = parse_i64(value)?,
                "scale" => cfg.scale = parse_i64(value)?,
                other => bail!("line {}: unknown key {other:?}", lineno + 1),
            }
        }
        Ok(cfg)
    }

    /// Inverse of [`Self::parse`]; a serialized config parses back equal.
    #[cfg_attr(not(test), allow(dead_code))]
    pub fn serialize(&self) -> String {
        let order = match self.bit_order {
            BitOrder::LsbFirst => "lsb",
            BitOrder::MsbFirst => "msb",
        };
        format!(
            "x0 = {}\ny0 = {}\nz0 = {}\nn_perturb = {}\nbit_order = {}\n\
             k_num = {}\nk_den = {}\ndelta = {}\ngamma = {}\nb = {}\nbias = {}\nscale = {}\n",
            self.x0,
            self.y0,
            self.z0,
            self.n_perturb,
            order,
            self.k_num,
            self.k_den,
            self.delta,
            self.gamma,
            self.b,
            self.bias,
            self.scale,
        )
    }

    pub fn to_keystream_config(&self) -> Result<KeystreamConfig> {
        if self.k_den == 0 {
            bail!("k_den must be nonzero");
        }
        let continuous = ContinuousParams::new(
            Rational64::from_integer(self.delta),
            Rational64::from_integer(self.gamma),
            Rational64::from_integer(self.b),
            Rational64::new(self.k_num, self.k_den),
        )?;
        let transform = TransformParams::new(
            Rational64::from_integer(self.bias),
            Rational64::from_integer(self.scale),
        )?;
        let mut config = KeystreamConfig::new(self.x0, self.y0, self.z0, self.n_perturb)?;
        config.continuous = continuous;
        config.transform = transform;
        Ok(config)
    }
}
