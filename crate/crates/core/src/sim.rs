//! Monte Carlo harness for blind detection.
//!
//! Every trial draws its own random stream from `(seed, snr index, trial
//! index)`, so results do not depend on how trials are spread over threads.
//! All accumulators are integers, which keeps the reduction exact.
//!
//! SNR values are Eb/N0 in dB with rate `K / N` (ID bits count as overhead).
//! By default all candidates of a trial share one channel, so the noise level
//! is set by the highest-rate candidate code and longer codes see the same
//! per-symbol noise. [`NoiseModel::PerCandidate`] instead applies the Eb/N0
//! to each candidate at its own rate.

use std::io::{self, Write};
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::blind::{
    run_blind_detection, BlindDetectionConfig, Detection, PhaseOneMetric, Received, TrialStats,
};
use crate::channel::{modulate_bpsk, snr_to_sigma, transmit_and_demodulate};
use crate::code::{IdMode, PolarCode, DEFAULT_ID_LEN};
use crate::decoder::{decode_with, DecodeOptions};
use crate::error::{invalid, Result};
use crate::Bit;

/// Which trials carry the receiver's ID.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UeSent {
    Always,
    Never,
    /// Even trial indices carry it, odd ones do not.
    Alternate,
}

impl UeSent {
    fn for_trial(self, trial: usize) -> bool {
        match self {
            UeSent::Always => true,
            UeSent::Never => false,
            UeSent::Alternate => trial.is_multiple_of(2),
        }
    }
}

impl std::str::FromStr for UeSent {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "always" => Ok(UeSent::Always),
            "never" => Ok(UeSent::Never),
            "alternate" => Ok(UeSent::Alternate),
            other => invalid(format!(
                "ue-sent must be always, never or alternate, got {other}"
            )),
        }
    }
}

/// How the SNR point maps to channel noise within one trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoiseModel {
    /// One noise level for every candidate, from the highest code rate.
    Shared,
    /// Each candidate at the given Eb/N0 for its own rate.
    PerCandidate,
}

impl std::str::FromStr for NoiseModel {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "shared" => Ok(NoiseModel::Shared),
            "per-candidate" => Ok(NoiseModel::PerCandidate),
            other => invalid(format!(
                "noise model must be shared or per-candidate, got {other}"
            )),
        }
    }
}

/// Full description of a blind detection experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub n1: usize,
    pub n2: usize,
    pub k: usize,
    pub c1: usize,
    pub c2: usize,
    pub l1: usize,
    pub l_max: usize,
    pub id_len: usize,
    pub id_mode: IdMode,
    pub design_snr_db: f64,
    pub early_stop: bool,
    pub ue_sent: UeSent,
    pub phase_one_metric: PhaseOneMetric,
    pub noise: NoiseModel,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            n1: 256,
            n2: 512,
            k: 57,
            c1: 44,
            c2: 5,
            l1: 2,
            l_max: 8,
            id_len: DEFAULT_ID_LEN,
            id_mode: IdMode::AfterInfo,
            design_snr_db: 0.0,
            early_stop: true,
            ue_sent: UeSent::Always,
            phase_one_metric: PhaseOneMetric::LastLeafLlr,
            noise: NoiseModel::Shared,
        }
    }
}

/// The two code hypotheses shared by every trial of an experiment.
#[derive(Debug, Clone)]
pub struct CodePair {
    pub short: Arc<PolarCode>,
    pub long: Arc<PolarCode>,
}

impl CodePair {
    pub fn build(cfg: &ExperimentConfig) -> Result<Self> {
        let make = |n| {
            PolarCode::construct(n, cfg.k, cfg.id_len, cfg.id_mode, cfg.design_snr_db).map(Arc::new)
        };
        Ok(CodePair {
            short: make(cfg.n1)?,
            long: make(cfg.n2)?,
        })
    }
}

#[derive(Debug, Clone)]
pub struct CandidateSpec {
    pub code: Arc<PolarCode>,
    pub payload: Vec<Bit>,
    pub id: Vec<Bit>,
    pub carries_ue_id: bool,
}

#[derive(Debug, Clone)]
pub struct TransmissionScenario {
    pub candidates: Vec<CandidateSpec>,
    pub ue_id: Vec<Bit>,
    pub ue_sent: bool,
}

impl TransmissionScenario {
    pub fn carrier(&self) -> Option<usize> {
        self.candidates.iter().position(|c| c.carries_ue_id)
    }
}

fn random_bits<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<Bit> {
    (0..n).map(|_| rng.random_range(0..2u8)).collect()
}

/// Draws payloads and IDs for `c1` candidates: the first half use the short
/// code, the second half the long one. Non-UE IDs are uniform over all values
/// except `ue_id`.
pub fn generate_scenario<R: Rng + ?Sized>(
    codes: &CodePair,
    c1: usize,
    ue_id: &[Bit],
    ue_sent: bool,
    rng: &mut R,
) -> Result<TransmissionScenario> {
    if !c1.is_multiple_of(2) {
        return invalid(format!("C1 must be even, got {c1}"));
    }
    if ue_id.len() != codes.short.id_len() || ue_id.len() != codes.long.id_len() {
        return invalid("ue id length does not match the codes");
    }
    if ue_id.is_empty() && c1 > 1 {
        return invalid("an empty ID cannot distinguish candidates");
    }
    let carrier = if ue_sent && c1 > 0 {
        Some(rng.random_range(0..c1))
    } else {
        None
    };
    let candidates = (0..c1)
        .map(|i| {
            let code = if i < c1 / 2 {
                &codes.short
            } else {
                &codes.long
            };
            let payload = random_bits(rng, code.info_len());
            let carries = Some(i) == carrier;
            let id = if carries {
                ue_id.to_vec()
            } else {
                loop {
                    let id = random_bits(rng, ue_id.len());
                    if id != ue_id {
                        break id;
                    }
                }
            };
            CandidateSpec {
                code: Arc::clone(code),
                payload,
                id,
                carries_ue_id: carries,
            }
        })
        .collect();
    Ok(TransmissionScenario {
        candidates,
        ue_id: ue_id.to_vec(),
        ue_sent,
    })
}

/// Estimated-bit fraction of one phase-two decode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimatedBits {
    pub code_len: usize,
    /// The trial's UE ID travelled on a code of this length.
    pub sent_on_length: bool,
    pub estimated: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialOutcome {
    pub detection: Detection,
    pub stats: TrialStats,
    pub ue_sent: bool,
    pub success: bool,
    pub missed: bool,
    pub type1: bool,
    pub type2: bool,
    /// The UE-carrying candidate was decoded wrongly by the pipeline: its
    /// phase-two decode if selected, its phase-one decode otherwise.
    pub block_error: Option<bool>,
    /// Standalone `Lmax` list decode of the UE-carrying candidate failed.
    pub standalone_block_error: Option<bool>,
    pub estimated: Vec<EstimatedBits>,
}

/// Encodes, transmits and blind-detects one scenario at `ebn0_db`.
pub fn run_trial<R: Rng + ?Sized>(
    scenario: &TransmissionScenario,
    config: &BlindDetectionConfig,
    ebn0_db: f64,
    noise: NoiseModel,
    rng: &mut R,
) -> Result<TrialOutcome> {
    let shared_rate = scenario
        .candidates
        .iter()
        .map(|c| c.code.rate())
        .fold(0.0, f64::max);
    let llrs: Vec<Vec<f64>> = scenario
        .candidates
        .iter()
        .map(|c| {
            let x = c.code.encode(&c.payload, &c.id)?;
            let rate = match noise {
                NoiseModel::Shared => shared_rate,
                NoiseModel::PerCandidate => c.code.rate(),
            };
            let sigma = snr_to_sigma(ebn0_db, rate)?;
            transmit_and_demodulate(&modulate_bpsk(&x), sigma, rng)
        })
        .collect::<Result<_>>()?;
    let received: Vec<Received<'_>> = scenario
        .candidates
        .iter()
        .zip(&llrs)
        .map(|(c, l)| Received {
            code: &c.code,
            llrs: l,
        })
        .collect();
    let (detection, stats) = run_blind_detection(&received, config)?;

    let carrier = scenario.carrier();
    let success = match (&detection, carrier) {
        (
            Detection::Found {
                candidate_index,
                payload,
                ..
            },
            Some(j),
        ) => *candidate_index == j && *payload == scenario.candidates[j].payload,
        _ => false,
    };
    let missed = scenario.ue_sent && !success;
    let type1 = !scenario.ue_sent && detection.is_found();
    let type2 = scenario.ue_sent && detection.is_found() && !success;

    let wrong = |j: usize, r: &crate::DecodeResult| {
        let c = &scenario.candidates[j];
        r.payload != c.payload || r.decoded_id != c.id
    };
    let block_error = carrier.map(|j| match stats.phase_two.iter().find(|(i, _)| *i == j) {
        Some((_, r)) => wrong(j, r),
        None => wrong(j, &stats.phase_one_results[j]),
    });
    let standalone_block_error = match carrier {
        Some(j) => {
            let c = &scenario.candidates[j];
            let r = decode_with(&c.code, &llrs[j], &DecodeOptions::list(config.l_max))?;
            Some(wrong(j, &r))
        }
        None => None,
    };

    let carrier_len = carrier.map(|j| scenario.candidates[j].code.len());
    let estimated = stats
        .phase_two
        .iter()
        .map(|(i, r)| {
            let code_len = scenario.candidates[*i].code.len();
            EstimatedBits {
                code_len,
                sent_on_length: carrier_len == Some(code_len),
                estimated: (r.estimated_fraction * code_len as f64).round() as usize,
            }
        })
        .collect();

    Ok(TrialOutcome {
        detection,
        stats,
        ue_sent: scenario.ue_sent,
        success,
        missed,
        type1,
        type2,
        block_error,
        standalone_block_error,
        estimated,
    })
}

/// Integer accumulator of estimated leaves over phase-two decodes.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct EstAccumulator {
    pub estimated_bits: u64,
    pub possible_bits: u64,
    pub decodes: u64,
}

impl EstAccumulator {
    pub fn mean(&self) -> Option<f64> {
        (self.possible_bits > 0).then(|| self.estimated_bits as f64 / self.possible_bits as f64)
    }

    fn merge(&mut self, o: &Self) {
        self.estimated_bits += o.estimated_bits;
        self.possible_bits += o.possible_bits;
        self.decodes += o.decodes;
    }
}

/// Counters for one SNR point.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Metrics {
    pub trials: u64,
    pub block_errors: u64,
    pub standalone_block_errors: u64,
    pub missed_detections: u64,
    pub ue_sent_trials: u64,
    pub type1_false_alarms: u64,
    pub type1_trials: u64,
    pub type2_false_alarms: u64,
    /// Indexed `[short, long][unsent, sent]`.
    pub est: [[EstAccumulator; 2]; 2],
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

impl Metrics {
    /// Aggregate block error rate of the UE-carrying candidates.
    pub fn bler(&self) -> f64 {
        ratio(self.block_errors, self.ue_sent_trials)
    }

    /// Block error rate of plain `Lmax` list decoding of the same codewords.
    pub fn standalone_bler(&self) -> f64 {
        ratio(self.standalone_block_errors, self.ue_sent_trials)
    }

    pub fn mdr(&self) -> f64 {
        ratio(self.missed_detections, self.ue_sent_trials)
    }

    pub fn far_type1(&self) -> f64 {
        ratio(self.type1_false_alarms, self.type1_trials)
    }

    pub fn far_type2(&self) -> f64 {
        ratio(self.type2_false_alarms, self.ue_sent_trials)
    }

    /// Average estimated-bit fraction for `long` (false: short code) and
    /// whether the UE ID was sent on a code of that length.
    pub fn avg_est_fraction(&self, long: bool, sent: bool) -> Option<f64> {
        self.est[long as usize][sent as usize].mean()
    }

    pub fn record(&mut self, o: &TrialOutcome, n1: usize) {
        self.trials += 1;
        if o.ue_sent {
            self.ue_sent_trials += 1;
        } else {
            self.type1_trials += 1;
        }
        self.block_errors += o.block_error.unwrap_or(false) as u64;
        self.standalone_block_errors += o.standalone_block_error.unwrap_or(false) as u64;
        self.missed_detections += o.missed as u64;
        self.type1_false_alarms += o.type1 as u64;
        self.type2_false_alarms += o.type2 as u64;
        for e in &o.estimated {
            let acc = &mut self.est[(e.code_len != n1) as usize][e.sent_on_length as usize];
            acc.estimated_bits += e.estimated as u64;
            acc.possible_bits += e.code_len as u64;
            acc.decodes += 1;
        }
    }

    pub fn merge(&mut self, o: &Metrics) {
        self.trials += o.trials;
        self.block_errors += o.block_errors;
        self.standalone_block_errors += o.standalone_block_errors;
        self.missed_detections += o.missed_detections;
        self.ue_sent_trials += o.ue_sent_trials;
        self.type1_false_alarms += o.type1_false_alarms;
        self.type1_trials += o.type1_trials;
        self.type2_false_alarms += o.type2_false_alarms;
        for (a, b) in self.est.iter_mut().flatten().zip(o.est.iter().flatten()) {
            a.merge(b);
        }
    }
}

/// Random stream of one trial.
pub fn trial_rng(seed: u64, snr_index: usize, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((snr_index as u64) << 40) | trial as u64);
    rng
}

fn thread_pool(threads: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| crate::Error::Internal(format!("thread pool: {e}")))
}

/// Runs `trials_per_point` blind detection trials at each SNR point.
/// `threads = 0` uses rayon's default thread count.
pub fn run_experiment(
    cfg: &ExperimentConfig,
    snr_points: &[f64],
    trials_per_point: usize,
    seed: u64,
    threads: usize,
) -> Result<Vec<(f64, Metrics)>> {
    if trials_per_point == 0 {
        return invalid("trials per point must be at least 1");
    }
    let codes = CodePair::build(cfg)?;
    let base = BlindDetectionConfig {
        c1: cfg.c1,
        c2: cfg.c2,
        l1: cfg.l1,
        l_max: cfg.l_max,
        ue_id: vec![0; cfg.id_len],
        early_stop_enabled: cfg.early_stop,
        phase_one_metric: cfg.phase_one_metric,
        parallel: false,
    };
    base.validate()?;
    if !cfg.c1.is_multiple_of(2) {
        return invalid(format!("C1 must be even, got {}", cfg.c1));
    }

    let one = |snr_index: usize, ebn0_db: f64, trial: usize| -> Result<Metrics> {
        let mut rng = trial_rng(seed, snr_index, trial);
        let ue_id = random_bits(&mut rng, cfg.id_len);
        let scenario = generate_scenario(
            &codes,
            cfg.c1,
            &ue_id,
            cfg.ue_sent.for_trial(trial),
            &mut rng,
        )?;
        let config = BlindDetectionConfig {
            ue_id,
            ..base.clone()
        };
        let outcome = run_trial(&scenario, &config, ebn0_db, cfg.noise, &mut rng)?;
        let mut m = Metrics::default();
        m.record(&outcome, cfg.n1);
        Ok(m)
    };

    let pool = thread_pool(threads)?;
    snr_points
        .iter()
        .enumerate()
        .map(|(si, &snr)| {
            let metrics = pool.install(|| {
                (0..trials_per_point)
                    .into_par_iter()
                    .map(|t| one(si, snr, t))
                    .try_reduce(Metrics::default, |mut a, b| {
                        a.merge(&b);
                        Ok(a)
                    })
            })?;
            Ok((snr, metrics))
        })
        .collect()
}

/// Block error rate of single-codeword list decoding, without blind detection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlerPoint {
    pub snr_db: f64,
    pub trials: u64,
    pub errors: u64,
}

impl BlerPoint {
    pub fn bler(&self) -> f64 {
        ratio(self.errors, self.trials)
    }
}

/// Decodes random codewords of one code with list size `list_size`; an error
/// is any mismatch in payload or ID.
pub fn run_bler_experiment(
    code: &PolarCode,
    list_size: usize,
    snr_points: &[f64],
    trials_per_point: usize,
    seed: u64,
    threads: usize,
) -> Result<Vec<BlerPoint>> {
    if trials_per_point == 0 {
        return invalid("trials per point must be at least 1");
    }
    let pool = thread_pool(threads)?;
    snr_points
        .iter()
        .enumerate()
        .map(|(si, &snr)| {
            let sigma = snr_to_sigma(snr, code.rate())?;
            let errors = pool.install(|| {
                (0..trials_per_point)
                    .into_par_iter()
                    .map(|t| -> Result<u64> {
                        let mut rng = trial_rng(seed, si, t);
                        let payload = random_bits(&mut rng, code.info_len());
                        let id = random_bits(&mut rng, code.id_len());
                        let x = code.encode(&payload, &id)?;
                        let llrs = transmit_and_demodulate(&modulate_bpsk(&x), sigma, &mut rng)?;
                        let r = decode_with(code, &llrs, &DecodeOptions::list(list_size))?;
                        Ok((r.payload != payload || r.decoded_id != id) as u64)
                    })
                    .try_reduce(|| 0, |a, b| Ok(a + b))
            })?;
            Ok(BlerPoint {
                snr_db: snr,
                trials: trials_per_point as u64,
                errors,
            })
        })
        .collect()
}

/// SNR grid from `start` to `stop` inclusive.
pub fn snr_grid(start: f64, stop: f64, step: f64) -> Result<Vec<f64>> {
    if step.is_nan() || step <= 0.0 {
        return invalid(format!("SNR step must be positive, got {step}"));
    }
    if stop < start {
        return invalid(format!("SNR stop {stop} is below start {start}"));
    }
    let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
    Ok((0..count).map(|i| start + i as f64 * step).collect())
}

/// Formats a rate as a plain decimal with at least 6 significant digits.
pub fn format_rate(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x:.6}");
    }
    let magnitude = x.abs().log10().floor() as i32;
    let decimals = (5 - magnitude).clamp(6, 30) as usize;
    format!("{x:.decimals$}")
}

pub const CSV_HEADER: &str = "snr_db,trials,bler,mdr,far_type1,far_type2,\
avg_est_frac_n1_sent,avg_est_frac_n1_unsent,avg_est_frac_n2_sent,avg_est_frac_n2_unsent";

/// Writes one CSV row per SNR point with at least one trial. Estimated-bit
/// averages without samples are left empty.
pub fn emit_csv<W: Write>(points: &[(f64, Metrics)], mut out: W) -> io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    let opt = |v: Option<f64>| v.map(format_rate).unwrap_or_default();
    for (snr, m) in points.iter().filter(|(_, m)| m.trials > 0) {
        writeln!(
            out,
            "{snr:.4},{},{},{},{},{},{},{},{},{}",
            m.trials,
            format_rate(m.bler()),
            format_rate(m.mdr()),
            format_rate(m.far_type1()),
            format_rate(m.far_type2()),
            opt(m.avg_est_fraction(false, true)),
            opt(m.avg_est_fraction(false, false)),
            opt(m.avg_est_fraction(true, true)),
            opt(m.avg_est_fraction(true, false)),
        )?;
    }
    Ok(())
}

pub fn bler_csv<W: Write>(points: &[BlerPoint], mut out: W) -> io::Result<()> {
    writeln!(out, "snr_db,trials,errors,bler")?;
    for p in points {
        writeln!(
            out,
            "{:.4},{},{},{}",
            p.snr_db,
            p.trials,
            p.errors,
            format_rate(p.bler())
        )?;
    }
    Ok(())
}
