//! Two-phase blind detection.
//!
//! All `C1` received candidates are first decoded with a small list (`L1`,
//! plain SC when 1) and no early stopping. The phase-one reliabilities and ID
//! match flags drive the choice of `C2` candidates, which are decoded again
//! with `Lmax` and early stopping against the receiver's ID. A candidate whose
//! phase-two decode carries the receiver's ID is reported; if several do, the
//! one with the smallest path metric wins.

use rayon::prelude::*;

use crate::code::PolarCode;
use crate::decoder::{decode_with, DecodeOptions, DecodeResult};
use crate::error::{invalid, Result};
use crate::Bit;

/// Phase-one sorting metric. Larger always means more trustworthy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhaseOneMetric {
    /// Magnitude of the last decoded leaf LLR of the returned path.
    LastLeafLlr,
    /// Last leaf LLR magnitude for SC, negated path metric for list decoding.
    PathMetric,
}

impl std::str::FromStr for PhaseOneMetric {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "llr" => Ok(PhaseOneMetric::LastLeafLlr),
            "pm" => Ok(PhaseOneMetric::PathMetric),
            other => invalid(format!("phase-one metric must be llr or pm, got {other}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlindDetectionConfig {
    pub c1: usize,
    pub c2: usize,
    pub l1: usize,
    pub l_max: usize,
    pub ue_id: Vec<Bit>,
    pub early_stop_enabled: bool,
    pub phase_one_metric: PhaseOneMetric,
    /// Decode the candidates of a phase on the rayon pool. Results do not
    /// depend on this flag.
    pub parallel: bool,
}

impl BlindDetectionConfig {
    pub fn new(ue_id: Vec<Bit>) -> Self {
        BlindDetectionConfig {
            c1: 44,
            c2: 5,
            l1: 2,
            l_max: 8,
            ue_id,
            early_stop_enabled: true,
            phase_one_metric: PhaseOneMetric::LastLeafLlr,
            parallel: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.l1 == 0 || self.l1 >= self.l_max {
            return invalid(format!(
                "need 1 <= L1 < Lmax, got L1={} Lmax={}",
                self.l1, self.l_max
            ));
        }
        if self.c2 > self.c1 {
            return invalid(format!("C2={} exceeds C1={}", self.c2, self.c1));
        }
        Ok(())
    }
}

/// One received candidate: its code hypothesis and channel LLRs.
#[derive(Debug, Clone, Copy)]
pub struct Received<'a> {
    pub code: &'a PolarCode,
    pub llrs: &'a [f64],
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseOneRecord {
    pub candidate_index: usize,
    pub reliability: f64,
    pub id_match: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Detection {
    NotFound,
    Found {
        candidate_index: usize,
        payload: Vec<Bit>,
        decoded_id: Vec<Bit>,
    },
}

impl Detection {
    pub fn candidate_index(&self) -> Option<usize> {
        match self {
            Detection::NotFound => None,
            Detection::Found {
                candidate_index, ..
            } => Some(*candidate_index),
        }
    }

    pub fn is_found(&self) -> bool {
        matches!(self, Detection::Found { .. })
    }
}

/// Everything observed while processing one set of candidates.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialStats {
    pub phase_one: Vec<PhaseOneRecord>,
    /// Full phase-one decoder outputs, indexed like `phase_one`.
    pub phase_one_results: Vec<DecodeResult>,
    pub selected: Vec<usize>,
    /// Phase-two results, in selection order.
    pub phase_two: Vec<(usize, DecodeResult)>,
}

impl TrialStats {
    pub fn phase_one_matches(&self) -> usize {
        self.phase_one.iter().filter(|r| r.id_match).count()
    }

    pub fn stopped_count(&self) -> usize {
        self.phase_two
            .iter()
            .filter(|(_, r)| r.stopped_early)
            .count()
    }
}

fn decode_all<T: Sync, F>(items: &[T], parallel: bool, f: F) -> Result<Vec<DecodeResult>>
where
    F: Fn(&T) -> Result<DecodeResult> + Sync + Send,
{
    if parallel {
        items.par_iter().map(f).collect()
    } else {
        items.iter().map(f).collect()
    }
}

/// First decoding phase: list size `L1`, no early stopping.
pub fn phase1(
    candidates: &[Received<'_>],
    config: &BlindDetectionConfig,
) -> Result<Vec<PhaseOneRecord>> {
    let results = phase1_decodes(candidates, config)?;
    Ok(records(&results, config.phase_one_metric))
}

fn phase1_decodes(
    candidates: &[Received<'_>],
    config: &BlindDetectionConfig,
) -> Result<Vec<DecodeResult>> {
    if candidates.len() != config.c1 {
        return invalid(format!(
            "expected {} candidates, got {}",
            config.c1,
            candidates.len()
        ));
    }
    let opts = DecodeOptions {
        list_size: config.l1,
        expected_id: Some(&config.ue_id),
        early_stop: false,
    };
    decode_all(candidates, config.parallel, |c| {
        decode_with(c.code, c.llrs, &opts)
    })
}

fn records(results: &[DecodeResult], metric: PhaseOneMetric) -> Vec<PhaseOneRecord> {
    results
        .iter()
        .enumerate()
        .map(|(candidate_index, r)| PhaseOneRecord {
            candidate_index,
            reliability: match metric {
                PhaseOneMetric::LastLeafLlr => r.last_leaf_llr.abs(),
                PhaseOneMetric::PathMetric => r.reliability,
            },
            id_match: r.id_match,
        })
        .collect()
}

/// Picks up to `c2` candidates for the second phase.
///
/// ID-matching candidates come first, most reliable first, capped at `c2`.
/// Remaining slots go to the least reliable non-matching candidates. Ties go
/// to the lower candidate index.
pub fn select_candidates(records: &[PhaseOneRecord], c2: usize) -> Vec<usize> {
    let (mut matching, mut other): (Vec<&PhaseOneRecord>, Vec<&PhaseOneRecord>) =
        records.iter().partition(|r| r.id_match);
    matching.sort_by(|a, b| {
        b.reliability
            .total_cmp(&a.reliability)
            .then(a.candidate_index.cmp(&b.candidate_index))
    });
    other.sort_by(|a, b| {
        a.reliability
            .total_cmp(&b.reliability)
            .then(a.candidate_index.cmp(&b.candidate_index))
    });
    matching
        .into_iter()
        .chain(other)
        .take(c2)
        .map(|r| r.candidate_index)
        .collect()
}

/// Second decoding phase on the selected candidates.
pub fn phase2(
    selected: &[(usize, Received<'_>)],
    config: &BlindDetectionConfig,
) -> Result<(Detection, Vec<(usize, DecodeResult)>)> {
    let opts = DecodeOptions {
        list_size: config.l_max,
        expected_id: Some(&config.ue_id),
        early_stop: config.early_stop_enabled,
    };
    let results = decode_all(selected, config.parallel, |(_, c)| {
        decode_with(c.code, c.llrs, &opts)
    })?;
    let results: Vec<(usize, DecodeResult)> =
        selected.iter().map(|(i, _)| *i).zip(results).collect();

    let winner = results
        .iter()
        .filter(|(_, r)| r.id_match)
        .min_by(|(ia, a), (ib, b)| a.pm_best.total_cmp(&b.pm_best).then(ia.cmp(ib)));
    let detection = match winner {
        Some((idx, r)) => Detection::Found {
            candidate_index: *idx,
            payload: r.payload.clone(),
            decoded_id: r.decoded_id.clone(),
        },
        None => Detection::NotFound,
    };
    Ok((detection, results))
}

/// Runs both phases over all candidates.
pub fn run_blind_detection(
    candidates: &[Received<'_>],
    config: &BlindDetectionConfig,
) -> Result<(Detection, TrialStats)> {
    config.validate()?;
    let phase_one_results = phase1_decodes(candidates, config)?;
    let phase_one = records(&phase_one_results, config.phase_one_metric);
    let selected = select_candidates(&phase_one, config.c2);
    let chosen: Vec<(usize, Received<'_>)> = selected.iter().map(|&i| (i, candidates[i])).collect();
    let (detection, phase_two) = phase2(&chosen, config)?;
    Ok((
        detection,
        TrialStats {
            phase_one,
            phase_one_results,
            selected,
            phase_two,
        },
    ))
}
