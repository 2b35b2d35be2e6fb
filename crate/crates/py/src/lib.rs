//! Python bindings for the chaoslink cipher and evaluation suite.
//!
//! Exposes the keystream generator as a class plus free functions for the
//! link simulator, the randomness battery, cycle-length measurement, and the
//! signal analyses, so experiments can be scripted from Python without
//! shelling out to the CLI.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyBytes;

use chaoslink_core::analysis::{
    self, autocovariance as core_autocovariance, cycle_length as core_cycle_length, CycleOutcome,
    KeyMode, KeyWidth,
};
use chaoslink_core::cipher::{KeystreamConfig, KeystreamGenerator as CoreGenerator};
use chaoslink_core::link::{self, BitOrder, LinkConfig};
use chaoslink_core::stats::{self, BitSequence};

/// `(test, sample, statistic, threshold, passed)` battery row.
type BatteryRow = (String, usize, f64, f64, bool);

fn value_err(e: chaoslink_core::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn config_from(x0: u32, y0: u32, z0: u32, n_perturb: u16) -> PyResult<KeystreamConfig> {
    KeystreamConfig::new(x0, y0, z0, n_perturb).map_err(value_err)
}

/// Keystream generator over the integer Lorenz 3D map.
///
/// Key byte `i` is the low byte of the X register after `i` map steps from
/// the initial conditions; `encrypt`/`decrypt` are the same XOR transform.
#[pyclass(name = "KeystreamGenerator")]
struct PyKeystreamGenerator {
    inner: CoreGenerator,
}

#[pymethods]
impl PyKeystreamGenerator {
    #[new]
    #[pyo3(signature = (x0=18503, y0=21315, z0=32032, n_perturb=10000, perturbation=true))]
    fn new(x0: u32, y0: u32, z0: u32, n_perturb: u16, perturbation: bool) -> PyResult<Self> {
        let config = config_from(x0, y0, z0, n_perturb)?;
        Ok(Self {
            inner: CoreGenerator::with_perturbation(config, perturbation).map_err(value_err)?,
        })
    }

    /// Next key byte (advances the generator by one step).
    fn next_key_byte(&mut self) -> u8 {
        self.inner.next_key_byte()
    }

    /// Full 17-bit X word with the same advance semantics (evaluation mode).
    fn full_key_word(&mut self) -> u32 {
        self.inner.full_key_word()
    }

    /// The next `count` key bytes.
    fn key_bytes<'py>(&mut self, py: Python<'py>, count: usize) -> Bound<'py, PyBytes> {
        PyBytes::new(py, &self.inner.key_bytes(count))
    }

    /// XOR the data with the keystream.
    fn encrypt<'py>(&mut self, py: Python<'py>, data: &[u8]) -> Bound<'py, PyBytes> {
        PyBytes::new(py, &self.inner.encrypt(data))
    }

    /// Identical to encrypt (XOR is self-inverse).
    fn decrypt<'py>(&mut self, py: Python<'py>, data: &[u8]) -> Bound<'py, PyBytes> {
        PyBytes::new(py, &self.inner.decrypt(data))
    }

    /// Current (X, Y, Z, step) state.
    fn state(&self) -> (u32, u32, u32, u64) {
        let s = self.inner.state();
        (s.x, s.y, s.z, s.n)
    }

    /// Rewind to the initial conditions.
    fn reset(&mut self) {
        self.inner.reset();
    }

    fn __repr__(&self) -> String {
        let s = self.inner.state();
        format!(
            "KeystreamGenerator(x={}, y={}, z={}, step={})",
            s.x, s.y, s.z, s.n
        )
    }
}

/// One step of the integer map with the reference parameters.
#[pyfunction]
fn map_step(x: u32, y: u32, z: u32) -> PyResult<(u32, u32, u32)> {
    let coeffs = KeystreamConfig::default().derive();
    let state = chaoslink_core::ChaoticState::new(x, y, z).map_err(value_err)?;
    let next = chaoslink_core::map::map_step(&state, &coeffs);
    Ok((next.x, next.y, next.z))
}

/// Transmit `plain` through the encrypt -> serial channel -> decrypt
/// pipeline. `tx` and `rx` are `(x0, y0, z0, n_perturb)` tuples; `rx`
/// defaults to `tx` (matched link). Returns `(ber, bit_errors, total_bits)`.
#[pyfunction]
#[pyo3(signature = (plain, tx=(18503, 21315, 32032, 10000), rx=None))]
fn run_link(
    plain: &[u8],
    tx: (u32, u32, u32, u16),
    rx: Option<(u32, u32, u32, u16)>,
) -> PyResult<(f64, u64, u64)> {
    let tx = config_from(tx.0, tx.1, tx.2, tx.3)?;
    let rx = match rx {
        Some(r) => config_from(r.0, r.1, r.2, r.3)?,
        None => tx,
    };
    let report = link::run_link(
        &LinkConfig {
            tx,
            rx,
            bit_order: BitOrder::LsbFirst,
        },
        plain,
    )
    .map_err(value_err)?;
    Ok((report.ber, report.bit_errors, report.total_bits))
}

/// Fraction of differing bits between two equal-length byte strings.
#[pyfunction]
fn compute_ber(a: &[u8], b: &[u8]) -> PyResult<f64> {
    link::compute_ber(a, b).map_err(value_err)
}

/// Run the five-test battery on the keystream of the given seed.
/// Returns `(test, sample, statistic, threshold, passed)` tuples.
#[pyfunction]
#[pyo3(signature = (x0=18503, y0=21315, z0=32032, n_perturb=10000, samples=5, bits=400_000, lag=8))]
#[allow(clippy::too_many_arguments)]
fn run_battery(
    x0: u32,
    y0: u32,
    z0: u32,
    n_perturb: u16,
    samples: usize,
    bits: usize,
    lag: usize,
) -> PyResult<Vec<BatteryRow>> {
    let config = config_from(x0, y0, z0, n_perturb)?;
    let mut gen = CoreGenerator::new(config).map_err(value_err)?;
    let report = stats::run_battery(&mut gen, "lorenz", samples, bits, BitOrder::LsbFirst, lag)
        .map_err(value_err)?;
    Ok(report
        .samples
        .iter()
        .enumerate()
        .flat_map(|(sample, row)| {
            row.iter().map(move |cell| {
                (
                    cell.test.name().to_string(),
                    sample,
                    cell.statistic,
                    cell.threshold,
                    cell.pass,
                )
            })
        })
        .collect())
}

/// Five-test verdicts for arbitrary bytes: `(test, statistic, threshold, passed)`.
#[pyfunction]
#[pyo3(signature = (data, lag=8))]
fn test_bytes(data: &[u8], lag: usize) -> PyResult<Vec<(String, f64, f64, bool)>> {
    let bits = BitSequence::from_bytes(data, BitOrder::LsbFirst);
    let rows = [
        stats::frequency_test(&bits),
        stats::serial_test(&bits),
        stats::poker_test(&bits, 8),
        stats::runs_test(&bits),
        stats::autocorrelation_test(&bits, lag),
    ];
    rows.into_iter()
        .map(|r| {
            r.map(|cell| {
                (
                    cell.test.name().to_string(),
                    cell.statistic,
                    cell.threshold,
                    cell.pass,
                )
            })
            .map_err(value_err)
        })
        .collect()
}

/// Eventual `(period, tail)` of the state sequence, or `None` when the
/// search exceeds `cap` steps.
#[pyfunction]
#[pyo3(signature = (x0=18503, y0=21315, z0=32032, n_perturb=10000, perturbation=true, cap=100_000_000))]
fn cycle_length(
    x0: u32,
    y0: u32,
    z0: u32,
    n_perturb: u16,
    perturbation: bool,
    cap: u64,
) -> PyResult<Option<(u64, u64)>> {
    let config = config_from(x0, y0, z0, n_perturb)?;
    match core_cycle_length(&config, perturbation, cap).map_err(value_err)? {
        CycleOutcome::Found { period, tail } => Ok(Some((period, tail))),
        CycleOutcome::Exceeded { .. } => Ok(None),
    }
}

/// Normalized autocovariance `rho[0..=max_lag]` of a real-valued sequence.
#[pyfunction]
fn autocovariance(samples: Vec<f64>, max_lag: usize) -> PyResult<Vec<f64>> {
    Ok(core_autocovariance(&samples, max_lag)
        .map_err(value_err)?
        .rho)
}

/// DFT magnitudes of the first `size` samples after mean removal.
#[pyfunction]
fn dft_magnitude(samples: Vec<f64>, size: usize) -> PyResult<Vec<f64>> {
    Ok(analysis::dft_magnitude(&samples, size)
        .map_err(value_err)?
        .magnitudes)
}

/// Key signal of one evaluation configuration: bytes when `full_width` is
/// false, 17-bit words otherwise.
#[pyfunction]
#[pyo3(signature = (count, x0=18503, y0=21315, z0=32032, n_perturb=10000, full_width=false, perturbation=true))]
#[allow(clippy::too_many_arguments)]
fn key_signal(
    count: usize,
    x0: u32,
    y0: u32,
    z0: u32,
    n_perturb: u16,
    full_width: bool,
    perturbation: bool,
) -> PyResult<Vec<u32>> {
    let config = config_from(x0, y0, z0, n_perturb)?;
    let mode = KeyMode {
        width: if full_width {
            KeyWidth::Full17
        } else {
            KeyWidth::LowByte
        },
        perturbation,
    };
    analysis::key_signal(&config, mode, count).map_err(value_err)
}

#[pymodule]
fn chaoslink(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add("DEFAULT_SEED", chaoslink_core::DEFAULT_SEED)?;
    m.add_class::<PyKeystreamGenerator>()?;
    m.add_function(wrap_pyfunction!(map_step, m)?)?;
    m.add_function(wrap_pyfunction!(run_link, m)?)?;
    m.add_function(wrap_pyfunction!(compute_ber, m)?)?;
    m.add_function(wrap_pyfunction!(run_battery, m)?)?;
    m.add_function(wrap_pyfunction!(test_bytes, m)?)?;
    m.add_function(wrap_pyfunction!(cycle_length, m)?)?;
    m.add_function(wrap_pyfunction!(autocovariance, m)?)?;
    m.add_function(wrap_pyfunction!(dft_magnitude, m)?)?;
    m.add_function(wrap_pyfunction!(key_signal, m)?)?;
    Ok(())
}
