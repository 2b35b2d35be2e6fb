//! chaoslink command-line front end.
//!
//! Subcommands: `keystream`, `encrypt`, `decrypt`, `simulate`, `tests`,
//! `analyze`, `sweep`. The shared secret comes from a `--config` file and/or
//! the `--seed-x/--seed-y/--seed-z/--n-perturb` overrides; all numeric flags
//! accept decimal or `0x`-hex. Output files are written atomically (no
//! partial file survives a failure).

mod config;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use chaoslink_core::analysis::{
    autocov_csv, autocovariance, ciphered_signal, cycle_length, dft_magnitude, pair_plot,
    pair_plot_csv, spectrum_csv, trajectory, trajectory_csv, CoordMode, CycleOutcome, KeyMode,
    KeyWidth,
};
use chaoslink_core::cipher::{KeystreamConfig, KeystreamGenerator};
use chaoslink_core::link::{
    mismatch_sweep_with_plaintext, ramp_plaintext, run_link, sweep_csv, BitOrder, LinkConfig,
    MismatchTarget, Offset,
};
use chaoslink_core::stats::{
    battery_csv, run_battery, LehmerGenerator, LfsrGenerator, MarsagliaGenerator,
    DEFAULT_LFSR_TAPS,
};
use config::{parse_i64, parse_u16, parse_u32, parse_u64, parse_usize, FileConfig};

#[derive(Parser)]
#[command(name = "chaoslink", version, about = "Pseudo-chaotic stream cipher and link testbed")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    #[command(flatten)]
    secret: SecretArgs,

    /// Output file (defaults to standard output where applicable)
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SecretArgs {
    /// Shared-secret configuration file (key=value lines)
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Override the X initial condition
    #[arg(long, global = true, value_parser = parse_u32_arg)]
    seed_x: Option<u32>,

    /// Override the Y initial condition
    #[arg(long, global = true, value_parser = parse_u32_arg)]
    seed_y: Option<u32>,

    /// Override the Z initial condition
    #[arg(long, global = true, value_parser = parse_u32_arg)]
    seed_z: Option<u32>,

    /// Override the perturbation interval
    #[arg(long, global = true, value_parser = parse_u16_arg)]
    n_perturb: Option<u16>,

    /// Override the serializer bit order
    #[arg(long, global = true, value_enum)]
    bit_order: Option<BitOrderArg>,
}

fn parse_u32_arg(s: &str) -> Result<u32, String> {
    parse_u32(s).map_err(|e| e.to_string())
}

fn parse_u16_arg(s: &str) -> Result<u16, String> {
    parse_u16(s).map_err(|e| e.to_string())
}

fn parse_u64_arg(s: &str) -> Result<u64, String> {
    parse_u64(s).map_err(|e| e.to_string())
}

fn parse_usize_arg(s: &str) -> Result<usize, String> {
    parse_usize(s).map_err(|e| e.to_string())
}

#[derive(ValueEnum, Clone, Copy)]
enum BitOrderArg {
    Lsb,
    Msb,
}

impl From<BitOrderArg> for BitOrder {
    fn from(value: BitOrderArg) -> Self {
        match value {
            BitOrderArg::Lsb => BitOrder::LsbFirst,
            BitOrderArg::Msb => BitOrder::MsbFirst,
        }
    }
}

#[derive(ValueEnum, Clone, Copy)]
enum FormatArg {
    Hex,
    Binary,
}

#[derive(ValueEnum, Clone, Copy)]
enum AnalyzeMode {
    Autocov,
    Spectrum,
    Trajectory,
    Pairs,
    Period,
}

#[derive(ValueEnum, Clone, Copy)]
enum KeyWidthArg {
    Low,
    Full,
}

#[derive(ValueEnum, Clone, Copy)]
enum SwitchArg {
    On,
    Off,
}

#[derive(ValueEnum, Clone, Copy)]
enum CoordsArg {
    Register,
    Physical,
}

#[derive(ValueEnum, Clone, Copy)]
enum TargetArg {
    ConstZ,
    X0,
    Y0,
    Z0,
    N,
}

#[derive(ValueEnum, Clone, Copy)]
enum StimulusArg {
    /// All-zero plaintext: the cipher output is the raw key signal
    Zeros,
    /// Repeating 0..255 staircase
    Ramp,
}

#[derive(Subcommand)]
enum Command {
    /// Generate key bytes
    Keystream {
        /// Number of key bytes (>= 1)
        #[arg(long, value_parser = parse_u64_arg)]
        count: u64,
        /// hex: two lowercase digits per byte, newline every 32 bytes
        #[arg(long, value_enum, default_value = "hex")]
        format: FormatArg,
    },
    /// XOR a file with the keystream
    Encrypt {
        input: PathBuf,
    },
    /// Identical transform to encrypt, provided for clarity
    Decrypt {
        input: PathBuf,
    },
    /// Run the transmitter -> channel -> receiver pipeline and report the BER
    Simulate {
        /// Receiver configuration file (defaults to the transmitter's)
        #[arg(long)]
        rx_config: Option<PathBuf>,
        /// Length of the generated 0..255 stimulus
        #[arg(long, default_value = "100000", value_parser = parse_usize_arg)]
        message_len: usize,
        /// Transmit the bytes of this file instead of the stimulus
        #[arg(long)]
        message_file: Option<PathBuf>,
        /// Write PREFIX.plain, PREFIX.cipher, PREFIX.recovered dumps
        #[arg(long)]
        dump_prefix: Option<PathBuf>,
    },
    /// Run the five-test randomness battery
    Tests {
        /// lorenz[:CONFIG], lfsr:SEED, lehmer:SEED, marsaglia:SEED, or zeros
        #[arg(long)]
        generator: String,
        #[arg(long, default_value = "5", value_parser = parse_usize_arg)]
        samples: usize,
        /// Bits per sample
        #[arg(long, default_value = "400000", value_parser = parse_usize_arg)]
        bits: usize,
        /// Autocorrelation lag in bits
        #[arg(long, default_value = "8", value_parser = parse_usize_arg)]
        lag: usize,
    },
    /// Autocovariance, spectrum, trajectory, return-map, or period analysis
    Analyze {
        #[arg(long, value_enum)]
        mode: AnalyzeMode,
        /// Key width: the low byte of X or the full 17-bit word
        #[arg(long, value_enum, default_value = "low")]
        key_width: KeyWidthArg,
        #[arg(long, value_enum, default_value = "on")]
        perturbation: SwitchArg,
        /// Sample count for autocov/pairs input
        #[arg(long, default_value = "1000000", value_parser = parse_usize_arg)]
        samples: usize,
        #[arg(long, default_value = "1000", value_parser = parse_usize_arg)]
        max_lag: usize,
        /// Spectrum size (power of two)
        #[arg(long, default_value = "131072", value_parser = parse_usize_arg)]
        size: usize,
        /// Trajectory length in steps
        #[arg(long, default_value = "100000", value_parser = parse_u64_arg)]
        steps: u64,
        #[arg(long, value_enum, default_value = "register")]
        coords: CoordsArg,
        /// Delay-embedding dimension for pairs mode
        #[arg(long, default_value = "2", value_parser = parse_usize_arg)]
        dimension: usize,
        /// Step cap for period mode
        #[arg(long, default_value = "100000000", value_parser = parse_u64_arg)]
        cap: u64,
        /// Plaintext behind the analyzed cipher signal
        #[arg(long, value_enum, default_value = "zeros")]
        plaintext: StimulusArg,
    },
    /// BER versus receiver mismatch of one secret quantity
    Sweep {
        #[arg(long, value_enum)]
        target: TargetArg,
        /// Comma list and/or inclusive ranges: "-2..2", "0,1,5" (floats with --percent)
        #[arg(long, allow_hyphen_values = true)]
        offsets: String,
        /// Interpret offsets as percentages of the nominal value
        #[arg(long)]
        percent: bool,
        #[arg(long, default_value = "50000", value_parser = parse_usize_arg)]
        message_len: usize,
    },
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

/// Atomic file write: stage in a temp file, rename into place.
fn write_output(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)
        .with_context(|| format!("creating temporary file in {}", dir.display()))?;
    tmp.write_all(bytes)?;
    tmp.persist(path)
        .with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

/// Text to --out or standard output.
fn emit(out: &Option<PathBuf>, content: &str) -> Result<()> {
    match out {
        Some(path) => write_output(path, content.as_bytes()),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn load_file_config(path: Option<&Path>, secret: &SecretArgs) -> Result<FileConfig> {
    let mut fc = match path {
        Some(p) => FileConfig::parse(
            &fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?,
        )?,
        None => FileConfig::default(),
    };
    if let Some(x) = secret.seed_x {
        fc.x0 = x;
    }
    if let Some(y) = secret.seed_y {
        fc.y0 = y;
    }
    if let Some(z) = secret.seed_z {
        fc.z0 = z;
    }
    if let Some(n) = secret.n_perturb {
        fc.n_perturb = n;
    }
    if let Some(order) = secret.bit_order {
        fc.bit_order = order.into();
    }
    Ok(fc)
}

fn resolve_secret(secret: &SecretArgs) -> Result<(KeystreamConfig, BitOrder)> {
    let fc = load_file_config(secret.config.as_deref(), secret)?;
    Ok((fc.to_keystream_config()?, fc.bit_order))
}

fn hex_dump(bytes: &[u8]) -> String {
    let mut s = String::with_capacity(bytes.len() * 2 + bytes.len() / 32 + 2);
    for (i, b) in bytes.iter().enumerate() {
        s.push_str(&format!("{b:02x}"));
        if (i + 1).is_multiple_of(32) {
            s.push('\n');
        }
    }
    if !bytes.len().is_multiple_of(32) {
        s.push('\n');
    }
    s
}

fn stimulus(kind: StimulusArg, len: usize) -> Vec<u8> {
    match kind {
        StimulusArg::Zeros => vec![0u8; len],
        StimulusArg::Ramp => ramp_plaintext(len),
    }
}

fn parse_offsets(spec: &str, percent: bool) -> Result<Vec<Offset>> {
    let mut offsets = Vec::new();
    for part in spec.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        if percent {
            offsets.push(Offset::Percent(
                part.parse::<f64>()
                    .with_context(|| format!("invalid percentage {part:?}"))?,
            ));
        } else if let Some((lo, hi)) = part.split_once("..") {
            let (lo, hi) = (parse_i64(lo)?, parse_i64(hi)?);
            if lo > hi {
                bail!("empty offset range {part:?}");
            }
            offsets.extend((lo..=hi).map(Offset::Absolute));
        } else {
            offsets.push(Offset::Absolute(parse_i64(part)?));
        }
    }
    if offsets.is_empty() {
        bail!("no offsets given");
    }
    Ok(offsets)
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Keystream { count, format } => {
            if count == 0 {
                bail!("count must be >= 1");
            }
            let (config, _) = resolve_secret(&cli.secret)?;
            let mut gen = KeystreamGenerator::new(config)?;
            let bytes = gen.key_bytes(count as usize);
            match format {
                FormatArg::Hex => emit(&cli.out, &hex_dump(&bytes))?,
                FormatArg::Binary => match &cli.out {
                    Some(path) => write_output(path, &bytes)?,
                    None => std::io::stdout().write_all(&bytes)?,
                },
            }
        }

        Command::Encrypt { ref input } | Command::Decrypt { ref input } => {
            let out = cli
                .out
                .as_ref()
                .ok_or_else(|| anyhow!("--out is required for encrypt/decrypt"))?;
            let (config, _) = resolve_secret(&cli.secret)?;
            let data =
                fs::read(input).with_context(|| format!("reading {}", input.display()))?;
            let mut gen = KeystreamGenerator::new(config)?;
            write_output(out, &gen.encrypt(&data))?;
        }

        Command::Simulate {
            rx_config,
            message_len,
            message_file,
            dump_prefix,
        } => {
            let (tx, bit_order) = resolve_secret(&cli.secret)?;
            let rx = match rx_config {
                Some(path) => load_file_config(Some(&path), &cli.secret)?.to_keystream_config()?,
                None => tx,
            };
            let plain = match message_file {
                Some(path) => {
                    fs::read(&path).with_context(|| format!("reading {}", path.display()))?
                }
                None => ramp_plaintext(message_len),
            };
            let link = LinkConfig { tx, rx, bit_order };
            let report = run_link(&link, &plain)?;
            println!("plain bytes: {}", report.plain.len());
            println!("bit errors: {} / {}", report.bit_errors, report.total_bits);
            println!("BER = {:.6}", report.ber);
            if let Some(prefix) = dump_prefix {
                let base = prefix.display();
                write_output(&PathBuf::from(format!("{base}.plain")), &report.plain)?;
                write_output(&PathBuf::from(format!("{base}.cipher")), &report.cipher)?;
                write_output(&PathBuf::from(format!("{base}.recovered")), &report.recovered)?;
            }
            if let Some(out) = &cli.out {
                let csv = format!(
                    "plain_bytes,total_bits,bit_errors,ber\n{},{},{},{:.6}\n",
                    report.plain.len(),
                    report.total_bits,
                    report.bit_errors,
                    report.ber
                );
                write_output(out, csv.as_bytes())?;
            }
        }

        Command::Tests {
            generator,
            samples,
            bits,
            lag,
        } => {
            let (_, bit_order) = resolve_secret(&cli.secret)?;
            let (name, mut gen) = build_generator(&generator, &cli.secret)?;
            let report = run_battery(&mut gen, &name, samples, bits, bit_order, lag)?;
            emit(&cli.out, &battery_csv(std::slice::from_ref(&report))?)?;
        }

        Command::Analyze {
            mode,
            key_width,
            perturbation,
            samples,
            max_lag,
            size,
            steps,
            coords,
            dimension,
            cap,
            plaintext,
        } => {
            let (config, _) = resolve_secret(&cli.secret)?;
            let key_mode = KeyMode {
                width: match key_width {
                    KeyWidthArg::Low => KeyWidth::LowByte,
                    KeyWidthArg::Full => KeyWidth::Full17,
                },
                perturbation: matches!(perturbation, SwitchArg::On),
            };
            match mode {
                AnalyzeMode::Autocov => {
                    let signal: Vec<f64> =
                        ciphered_signal(&config, key_mode, &stimulus(plaintext, samples))?
                            .into_iter()
                            .map(f64::from)
                            .collect();
                    let result = autocovariance(&signal, max_lag)?;
                    emit(&cli.out, &autocov_csv(&result))?;
                }
                AnalyzeMode::Spectrum => {
                    let signal: Vec<f64> =
                        ciphered_signal(&config, key_mode, &stimulus(plaintext, size))?
                            .into_iter()
                            .map(f64::from)
                            .collect();
                    let result = dft_magnitude(&signal, size)?;
                    emit(&cli.out, &spectrum_csv(&result))?;
                }
                AnalyzeMode::Trajectory => {
                    let coords = match coords {
                        CoordsArg::Register => CoordMode::Register,
                        CoordsArg::Physical => CoordMode::Physical,
                    };
                    let rows = trajectory(&config, steps, coords)?;
                    emit(&cli.out, &trajectory_csv(&rows, coords))?;
                }
                AnalyzeMode::Pairs => {
                    let cipher: Vec<u8> =
                        ciphered_signal(&config, key_mode, &stimulus(plaintext, samples))?
                            .into_iter()
                            .map(|v| v as u8)
                            .collect();
                    let rows = pair_plot(&cipher, dimension)?;
                    emit(&cli.out, &pair_plot_csv(&rows)?)?;
                }
                AnalyzeMode::Period => {
                    let line = match cycle_length(
                        &config,
                        matches!(perturbation, SwitchArg::On),
                        cap,
                    )? {
                        CycleOutcome::Found { period, tail } => {
                            format!("period = {period}\ntail = {tail}\n")
                        }
                        CycleOutcome::Exceeded { cap } => {
                            format!("period search exceeded cap {cap}\n")
                        }
                    };
                    print!("{line}");
                    if let Some(out) = &cli.out {
                        write_output(out, line.as_bytes())?;
                    }
                }
            }
        }

        Command::Sweep {
            target,
            offsets,
            percent,
            message_len,
        } => {
            let (config, bit_order) = resolve_secret(&cli.secret)?;
            let target = match target {
                TargetArg::ConstZ => MismatchTarget::ConstZ,
                TargetArg::X0 => MismatchTarget::X0,
                TargetArg::Y0 => MismatchTarget::Y0,
                TargetArg::Z0 => MismatchTarget::Z0,
                TargetArg::N => MismatchTarget::PerturbInterval,
            };
            let offsets = parse_offsets(&offsets, percent)?;
            let link = LinkConfig {
                tx: config,
                rx: config,
                bit_order,
            };
            let result = mismatch_sweep_with_plaintext(
                &link,
                target,
                &offsets,
                &ramp_plaintext(message_len),
            )?;
            for rejected in &result.rejected {
                eprintln!(
                    "note: offset {rejected} drives {} out of range; skipped",
                    target.label()
                );
            }
            emit(&cli.out, &sweep_csv(&result))?;
        }
    }
    Ok(())
}

fn build_generator(
    spec: &str,
    secret: &SecretArgs,
) -> Result<(String, Box<dyn Iterator<Item = u8>>)> {
    let (kind, arg) = match spec.split_once(':') {
        Some((k, a)) => (k, Some(a)),
        None => (spec, None),
    };
    let usage = "valid specs: lorenz[:CONFIG], lfsr:SEED, lehmer:SEED, marsaglia:SEED, zeros";
    match kind {
        "lorenz" => {
            let config = match arg {
                Some(path) => {
                    load_file_config(Some(Path::new(path)), secret)?.to_keystream_config()?
                }
                None => resolve_secret(secret)?.0,
            };
            Ok(("lorenz".into(), Box::new(KeystreamGenerator::new(config)?)))
        }
        "lfsr" => {
            let seed = parse_u64(arg.ok_or_else(|| anyhow!("lfsr needs a seed; {usage}"))?)? as u32;
            Ok((
                "lfsr".into(),
                Box::new(LfsrGenerator::new(seed, &DEFAULT_LFSR_TAPS)?),
            ))
        }
        "lehmer" => {
            let seed =
                parse_u64(arg.ok_or_else(|| anyhow!("lehmer needs a seed; {usage}"))?)? as u32;
            Ok(("lehmer".into(), Box::new(LehmerGenerator::new(seed)?)))
        }
        "marsaglia" => {
            let seed =
                parse_u64(arg.ok_or_else(|| anyhow!("marsaglia needs a seed; {usage}"))?)? as u32;
            Ok(("marsaglia".into(), Box::new(MarsagliaGenerator::new(seed)?)))
        }
        "zeros" => Ok(("zeros".into(), Box::new(std::iter::repeat(0u8)))),
        other => bail!("unknown generator {other:?}; {usage}"),
    }
}
