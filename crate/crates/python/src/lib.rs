//! Python bindings for the `polar_bd` blind detection library.

use std::sync::Arc;

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use polar_bd::blind::{run_blind_detection, PhaseOneMetric, Received};
use polar_bd::channel::{modulate_bpsk, snr_to_sigma, transmit_and_demodulate};
use polar_bd::decoder::{decode_with, DecodeOptions};
use polar_bd::latency::{latency_table as table, LatencyParams};
use polar_bd::sim::{self, ExperimentConfig, NoiseModel, UeSent};
use polar_bd::{BlindDetectionConfig, Detection, Error, IdMode, PolarCode};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn to_py(e: Error) -> PyErr {
    match e {
        Error::InvalidParameter(m) => PyValueError::new_err(m),
        Error::Internal(m) => PyRuntimeError::new_err(m),
    }
}

/// Bits go back to Python as `list[int]`; `Vec<u8>` would become `bytes`.
fn bit_list(v: Vec<u8>) -> Vec<u32> {
    v.into_iter().map(u32::from).collect()
}

fn parse<T: std::str::FromStr<Err = Error>>(s: &str) -> PyResult<T> {
    s.parse().map_err(to_py)
}

#[pyclass(name = "PolarCode", module = "polar_bd_py", frozen)]
struct PyPolarCode {
    inner: Arc<PolarCode>,
}

#[pymethods]
impl PyPolarCode {
    #[new]
    #[pyo3(signature = (n, k, id_len = 16, id_mode = 1, design_snr = 0.0))]
    fn new(n: usize, k: usize, id_len: usize, id_mode: u8, design_snr: f64) -> PyResult<Self> {
        let mode = IdMode::from_number(id_mode).map_err(to_py)?;
        let code = PolarCode::construct(n, k, id_len, mode, design_snr).map_err(to_py)?;
        Ok(PyPolarCode {
            inner: Arc::new(code),
        })
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.len()
    }

    #[getter]
    fn k(&self) -> usize {
        self.inner.info_len()
    }

    #[getter]
    fn id_len(&self) -> usize {
        self.inner.id_len()
    }

    #[getter]
    fn id_mode(&self) -> u8 {
        self.inner.id_mode().number()
    }

    #[getter]
    fn rate(&self) -> f64 {
        self.inner.rate()
    }

    #[getter]
    fn info_positions(&self) -> Vec<usize> {
        self.inner.info_positions().to_vec()
    }

    #[getter]
    fn id_positions(&self) -> Vec<usize> {
        self.inner.id_positions().to_vec()
    }

    #[getter]
    fn frozen_positions(&self) -> Vec<usize> {
        self.inner.frozen_positions().to_vec()
    }

    #[getter]
    fn reliability_order(&self) -> Vec<usize> {
        self.inner.reliability_order().to_vec()
    }

    fn encode(&self, payload: Vec<u8>, id: Vec<u8>) -> PyResult<Vec<u32>> {
        self.inner
            .encode(&payload, &id)
            .map(bit_list)
            .map_err(to_py)
    }

    /// Decodes channel LLRs. `expected_id` enables ID checking and, with
    /// `early_stop`, stops once no surviving path carries it.
    #[pyo3(signature = (llrs, list_size = 1, expected_id = None, early_stop = false))]
    fn decode(
        &self,
        llrs: Vec<f64>,
        list_size: usize,
        expected_id: Option<Vec<u8>>,
        early_stop: bool,
    ) -> PyResult<PyDecodeResult> {
        let opts = DecodeOptions {
            list_size,
            expected_id: expected_id.as_deref(),
            early_stop,
        };
        let r = decode_with(&self.inner, &llrs, &opts).map_err(to_py)?;
        Ok(PyDecodeResult {
            payload: bit_list(r.payload),
            decoded_id: bit_list(r.decoded_id),
            pm_best: r.pm_best,
            reliability: r.reliability,
            last_leaf_llr: r.last_leaf_llr,
            id_match: r.id_match,
            estimated_fraction: r.estimated_fraction,
            stopped_early: r.stopped_early,
        })
    }

    fn __repr__(&self) -> String {
        format!(
            "PolarCode(n={}, k={}, id_len={}, id_mode={})",
            self.inner.len(),
            self.inner.info_len(),
            self.inner.id_len(),
            self.inner.id_mode()
        )
    }
}

#[pyclass(name = "DecodeResult", module = "polar_bd_py", frozen, get_all)]
struct PyDecodeResult {
    payload: Vec<u32>,
    decoded_id: Vec<u32>,
    pm_best: f64,
    reliability: f64,
    last_leaf_llr: f64,
    id_match: bool,
    estimated_fraction: f64,
    stopped_early: bool,
}

#[pyfunction]
fn polar_transform(bits: Vec<u8>) -> Vec<u32> {
    bit_list(polar_bd::code::polar_transform(&bits))
}

/// BPSK over AWGN at `ebn0_db` for the given rate; returns channel LLRs.
#[pyfunction]
fn transmit(codeword: Vec<u8>, ebn0_db: f64, rate: f64, seed: u64) -> PyResult<Vec<f64>> {
    let sigma = snr_to_sigma(ebn0_db, rate).map_err(to_py)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    transmit_and_demodulate(&modulate_bpsk(&codeword), sigma, &mut rng).map_err(to_py)
}

/// Runs both detection phases over `(code, llrs)` pairs. Returns
/// `(candidate_index, payload, selected)`, with `None` for the first two when
/// nothing is detected.
#[pyfunction]
#[pyo3(signature = (candidates, ue_id, c2 = 5, l1 = 2, lmax = 8, early_stop = true, metric = "llr"))]
#[allow(clippy::type_complexity)]
fn blind_detect(
    candidates: Vec<(Py<PyPolarCode>, Vec<f64>)>,
    ue_id: Vec<u8>,
    c2: usize,
    l1: usize,
    lmax: usize,
    early_stop: bool,
    metric: &str,
) -> PyResult<(Option<usize>, Option<Vec<u32>>, Vec<usize>)> {
    let config = BlindDetectionConfig {
        c1: candidates.len(),
        c2,
        l1,
        l_max: lmax,
        early_stop_enabled: early_stop,
        phase_one_metric: parse::<PhaseOneMetric>(metric)?,
        ..BlindDetectionConfig::new(ue_id)
    };
    let received: Vec<Received<'_>> = candidates
        .iter()
        .map(|(c, l)| Received {
            code: &c.get().inner,
            llrs: l,
        })
        .collect();
    let (det, stats) = run_blind_detection(&received, &config).map_err(to_py)?;
    Ok(match det {
        Detection::Found {
            candidate_index,
            payload,
            ..
        } => (
            Some(candidate_index),
            Some(bit_list(payload)),
            stats.selected,
        ),
        Detection::NotFound => (None, None, stats.selected),
    })
}

/// `(n_scl_max, worst_cycles, worst_us, average_cycles, average_us)`
type LatencyRow = (usize, f64, f64, f64, f64);

/// One row per decoder count.
#[pyfunction]
#[pyo3(signature = (decoders = vec![1, 2, 3, 4, 5], e1 = 1.0, e2 = 1.0, c2 = 5, f_hz = 1e9))]
fn latency_table(
    decoders: Vec<usize>,
    e1: f64,
    e2: f64,
    c2: usize,
    f_hz: f64,
) -> PyResult<Vec<LatencyRow>> {
    let base = LatencyParams {
        e1,
        e2,
        c2,
        t_sort: c2,
        f_hz,
        ..LatencyParams::default()
    };
    let rows = table(&base, &decoders).map_err(to_py)?;
    Ok(rows
        .iter()
        .map(|r| {
            (
                r.n_scl_max,
                r.worst_cycles,
                r.worst_us,
                r.average_cycles,
                r.average_us,
            )
        })
        .collect())
}

/// Monte Carlo blind detection; returns the CSV the CLI would print.
#[pyfunction]
#[pyo3(signature = (snrs, trials, seed = 1, k = 57, n1 = 256, n2 = 512, c1 = 44, c2 = 5, l1 = 2, lmax = 8,
    id_mode = 1, early_stop = true, ue_sent = "always", noise = "shared", threads = 0))]
#[allow(clippy::too_many_arguments)]
fn simulate(
    py: Python<'_>,
    snrs: Vec<f64>,
    trials: usize,
    seed: u64,
    k: usize,
    n1: usize,
    n2: usize,
    c1: usize,
    c2: usize,
    l1: usize,
    lmax: usize,
    id_mode: u8,
    early_stop: bool,
    ue_sent: &str,
    noise: &str,
    threads: usize,
) -> PyResult<String> {
    let cfg = ExperimentConfig {
        n1,
        n2,
        k,
        c1,
        c2,
        l1,
        l_max: lmax,
        id_mode: IdMode::from_number(id_mode).map_err(to_py)?,
        early_stop,
        ue_sent: parse::<UeSent>(ue_sent)?,
        noise: parse::<NoiseModel>(noise)?,
        ..ExperimentConfig::default()
    };
    let points = py
        .detach(|| sim::run_experiment(&cfg, &snrs, trials, seed, threads))
        .map_err(to_py)?;
    let mut out = Vec::new();
    sim::emit_csv(&points, &mut out).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    String::from_utf8(out).map_err(|e| PyRuntimeError::new_err(e.to_string()))
}

#[pymodule]
pub fn polar_bd_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyPolarCode>()?;
    m.add_class::<PyDecodeResult>()?;
    m.add_function(wrap_pyfunction!(polar_transform, m)?)?;
    m.add_function(wrap_pyfunction!(transmit, m)?)?;
    m.add_function(wrap_pyfunction!(blind_detect, m)?)?;
    m.add_function(wrap_pyfunction!(latency_table, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    Ok(())
}
