//! Unified SC / SCL decoder.
//!
//! The decoder walks the SC tree depth first, left branch first, with min-sum
//! node kernels. Every path carries an LLR-based metric that grows by `|alpha|`
//! whenever a leaf estimate disagrees with the sign of its LLR. With a list
//! size of one the procedure reduces to plain SC decoding.
//!
//! When an expected ID is supplied together with early stopping, every ID leaf
//! deactivates the surviving paths whose estimate differs from the expected
//! bit, and decoding halts as soon as no active path is left. Deactivated
//! paths keep their slot in the list and keep competing in the pruning step,
//! so a deactivation never lets a less likely path survive. With early
//! stopping the output path is the best one still carrying the expected ID;
//! without it, the best path overall.
//!
//! Storage layout per path (length `N` each, index 0 unused): the LLRs and
//! partial sums of stage `s` live at `[2^s, 2^(s+1))`. The channel LLRs form
//! the root stage and are shared by all paths.

use crate::code::{BitRole, PolarCode};
use crate::error::{invalid, Error, Result};
use crate::Bit;

/// Sign convention used throughout: `sgn(0) = +1`.
#[inline]
fn non_negative(x: f64) -> bool {
    x >= 0.0
}

/// Min-sum check-node update: `sgn(a) sgn(b) min(|a|, |b|)`.
#[inline]
pub fn f_op(a: f64, b: f64) -> f64 {
    let m = a.abs().min(b.abs());
    if non_negative(a) == non_negative(b) {
        m
    } else {
        -m
    }
}

/// Variable-node update: `b + a` if the left partial sum is 0, `b - a` otherwise.
#[inline]
pub fn g_op(a: f64, b: f64, beta_left: Bit) -> f64 {
    if beta_left & 1 == 0 {
        b + a
    } else {
        b - a
    }
}

/// Partial-sum combination: `(left ^ right, right)`.
pub fn beta_combine(left: &[Bit], right: &[Bit]) -> Result<Vec<Bit>> {
    if left.len() != right.len() {
        return Err(Error::Internal(format!(
            "partial sum halves differ in length: {} vs {}",
            left.len(),
            right.len()
        )));
    }
    Ok(left
        .iter()
        .zip(right)
        .map(|(l, r)| l ^ r)
        .chain(right.iter().copied())
        .collect())
}

/// Hard decision at a leaf.
#[inline]
pub fn leaf_decision(alpha: f64, is_frozen: bool) -> Bit {
    if is_frozen || non_negative(alpha) {
        0
    } else {
        1
    }
}

/// Path metric after estimating `u_hat` at a leaf with LLR `alpha`.
#[inline]
pub fn pm_update(pm: f64, alpha: f64, u_hat: Bit) -> f64 {
    let agrees = (u_hat & 1 == 0) == non_negative(alpha);
    if agrees {
        pm
    } else {
        pm + alpha.abs()
    }
}

/// One list-decoding hypothesis.
#[derive(Debug, Clone)]
pub struct DecodePath {
    pub index: usize,
    pub leaf_estimates: Vec<Bit>,
    pub pm: f64,
    pub active: bool,
    /// LLR of the most recently estimated leaf.
    pub last_alpha: f64,
    alpha: Vec<f64>,
    beta_left: Vec<Bit>,
    beta_right: Vec<Bit>,
}

impl DecodePath {
    fn new(n: usize) -> Self {
        DecodePath {
            index: 0,
            leaf_estimates: vec![0; n],
            pm: 0.0,
            active: true,
            last_alpha: 0.0,
            alpha: vec![0.0; n],
            beta_left: vec![0; n],
            beta_right: vec![0; n],
        }
    }

    /// A bare path with the given estimates and metric, for exercising the
    /// path-level operations directly.
    pub fn with_estimates(index: usize, leaf_estimates: Vec<Bit>, pm: f64) -> Self {
        let n = leaf_estimates.len().next_power_of_two().max(2);
        let mut p = DecodePath::new(n);
        p.index = index;
        p.leaf_estimates = leaf_estimates;
        p.pm = pm;
        p
    }
}

/// Extension of a surviving path by one leaf estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathCandidate {
    pub parent: usize,
    pub bit: Bit,
    pub pm: f64,
}

/// Keeps the `list_size` candidates with the smallest metric. Ties go to the
/// lower parent index, then to bit 0. Survivors come back ordered by
/// `(parent, bit)`.
pub fn prune_paths(candidates: &[PathCandidate], list_size: usize) -> Vec<PathCandidate> {
    let mut sorted = candidates.to_vec();
    if sorted.len() > list_size {
        sorted.sort_by(|a, b| {
            a.pm.total_cmp(&b.pm)
                .then(a.parent.cmp(&b.parent))
                .then(a.bit.cmp(&b.bit))
        });
        sorted.truncate(list_size);
    }
    sorted.sort_by_key(|c| (c.parent, c.bit));
    sorted
}

/// Deactivates every active path whose estimate at `bit_index` differs from
/// `expected_bit`. Returns `true` when no active path remains.
pub fn early_stop_filter(paths: &mut [DecodePath], bit_index: usize, expected_bit: Bit) -> bool {
    for p in paths.iter_mut().filter(|p| p.active) {
        if p.leaf_estimates[bit_index] != expected_bit & 1 {
            p.active = false;
        }
    }
    !paths.iter().any(|p| p.active)
}

/// Outcome of one decoder run.
#[derive(Debug, Clone, PartialEq)]
pub struct DecodeResult {
    pub payload: Vec<Bit>,
    pub decoded_id: Vec<Bit>,
    pub pm_best: f64,
    /// Larger means more trustworthy: `|last leaf LLR|` for SC, `-pm_best` for
    /// list sizes above one.
    pub reliability: f64,
    /// LLR of the last estimated leaf of the returned path.
    pub last_leaf_llr: f64,
    pub id_match: bool,
    pub estimated_fraction: f64,
    pub stopped_early: bool,
    /// Full estimated input vector of the returned path (unestimated leaves 0).
    pub u_hat: Vec<Bit>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecodeOptions<'a> {
    pub list_size: usize,
    /// ID the receiver is looking for; sets `id_match` in the result.
    pub expected_id: Option<&'a [Bit]>,
    /// Deactivate paths at ID leaves that disagree with `expected_id`.
    pub early_stop: bool,
}

impl<'a> DecodeOptions<'a> {
    pub fn list(list_size: usize) -> Self {
        DecodeOptions {
            list_size,
            expected_id: None,
            early_stop: false,
        }
    }
}

/// Decodes `llrs` with list size `list_size`. When `early_stop` holds an
/// expected ID, early stopping is applied against it.
pub fn decode(
    code: &PolarCode,
    llrs: &[f64],
    list_size: usize,
    early_stop: Option<&[Bit]>,
) -> Result<DecodeResult> {
    decode_with(
        code,
        llrs,
        &DecodeOptions {
            list_size,
            expected_id: early_stop,
            early_stop: early_stop.is_some(),
        },
    )
}

pub fn decode_with(
    code: &PolarCode,
    llrs: &[f64],
    opts: &DecodeOptions<'_>,
) -> Result<DecodeResult> {
    if llrs.len() != code.len() {
        return invalid(format!(
            "got {} LLRs for a code of length {}",
            llrs.len(),
            code.len()
        ));
    }
    if opts.list_size == 0 {
        return invalid("list size must be at least 1");
    }
    if let Some(id) = opts.expected_id {
        if id.len() != code.id_len() {
            return invalid(format!(
                "expected id has {} bits, code carries {}",
                id.len(),
                code.id_len()
            ));
        }
    }
    if opts.early_stop && opts.expected_id.is_none() {
        return invalid("early stopping needs an expected id");
    }
    let mut dec = ListDecoder::new(code, llrs, opts);
    dec.run();
    Ok(dec.finish())
}

struct ListDecoder<'a> {
    code: &'a PolarCode,
    llrs: &'a [f64],
    list_size: usize,
    expected_id: Option<&'a [Bit]>,
    early_stop: bool,
    paths: Vec<DecodePath>,
    /// Paths deactivated by the last filter when decoding stopped.
    stopped: Option<(usize, Vec<DecodePath>)>,
    id_rank: Vec<usize>,
    candidates: Vec<PathCandidate>,
}

impl<'a> ListDecoder<'a> {
    fn new(code: &'a PolarCode, llrs: &'a [f64], opts: &DecodeOptions<'a>) -> Self {
        let n = code.len();
        let mut id_rank = vec![usize::MAX; n];
        for (r, &p) in code.id_positions().iter().enumerate() {
            id_rank[p] = r;
        }
        ListDecoder {
            code,
            llrs,
            list_size: opts.list_size,
            expected_id: opts.expected_id,
            early_stop: opts.early_stop,
            paths: vec![DecodePath::new(n)],
            stopped: None,
            id_rank,
            candidates: Vec::with_capacity(2 * opts.list_size),
        }
    }

    fn run(&mut self) {
        let n = self.code.log_len();
        self.descend(n, 0);
    }

    /// Processes the node at `stage` whose leaves start at `offset`. Returns
    /// `true` if decoding stopped early.
    fn descend(&mut self, stage: usize, offset: usize) -> bool {
        if stage == 0 {
            return self.leaf(offset);
        }
        let half = 1usize << (stage - 1);
        let root = stage == self.code.log_len();
        let llrs = self.llrs;

        for p in &mut self.paths {
            let (lower, upper) = p.alpha.split_at_mut(2 * half);
            let input: &[f64] = if root { llrs } else { &upper[..2 * half] };
            let out = &mut lower[half..2 * half];
            for j in 0..half {
                out[j] = f_op(input[j], input[j + half]);
            }
        }
        if self.descend(stage - 1, offset) {
            return true;
        }

        for p in &mut self.paths {
            let (lower, upper) = p.alpha.split_at_mut(2 * half);
            let input: &[f64] = if root { llrs } else { &upper[..2 * half] };
            let out = &mut lower[half..2 * half];
            let beta = &p.beta_left[half..2 * half];
            for j in 0..half {
                out[j] = g_op(input[j], input[j + half], beta[j]);
            }
        }
        if self.descend(stage - 1, offset + half) {
            return true;
        }

        if !root {
            let is_right = (offset >> stage) & 1 == 1;
            for p in &mut self.paths {
                let (lo_l, hi_l) = p.beta_left.split_at_mut(2 * half);
                let (lo_r, hi_r) = p.beta_right.split_at_mut(2 * half);
                let left = &lo_l[half..];
                let right = &lo_r[half..];
                let out = if is_right {
                    &mut hi_r[..2 * half]
                } else {
                    &mut hi_l[..2 * half]
                };
                for j in 0..half {
                    out[j] = left[j] ^ right[j];
                    out[j + half] = right[j];
                }
            }
        }
        false
    }

    fn leaf(&mut self, i: usize) -> bool {
        match self.code.role(i) {
            BitRole::Frozen => {
                for p in &mut self.paths {
                    let a = p.alpha[1];
                    p.pm = pm_update(p.pm, a, 0);
                    set_leaf(p, i, 0, a);
                }
                false
            }
            role => {
                self.split(i);
                if role == BitRole::Id && self.early_stop {
                    let expected =
                        self.expected_id.expect("checked in decode_with")[self.id_rank[i]];
                    if early_stop_filter(&mut self.paths, i, expected) {
                        let deactivated = std::mem::take(&mut self.paths);
                        self.stopped = Some((i + 1, deactivated));
                        return true;
                    }
                }
                false
            }
        }
    }

    fn split(&mut self, i: usize) {
        self.candidates.clear();
        for (parent, p) in self.paths.iter().enumerate() {
            let a = p.alpha[1];
            for bit in [0, 1] {
                self.candidates.push(PathCandidate {
                    parent,
                    bit,
                    pm: pm_update(p.pm, a, bit),
                });
            }
        }
        let survivors = prune_paths(&self.candidates, self.list_size);

        let mut old: Vec<Option<DecodePath>> = std::mem::take(&mut self.paths)
            .into_iter()
            .map(Some)
            .collect();
        let mut next = Vec::with_capacity(survivors.len());
        for (k, c) in survivors.iter().enumerate() {
            let shared = survivors.get(k + 1).is_some_and(|d| d.parent == c.parent);
            let mut p = if shared {
                old[c.parent].clone().expect("parent consumed once")
            } else {
                old[c.parent].take().expect("parent consumed once")
            };
            let a = p.alpha[1];
            p.pm = c.pm;
            set_leaf(&mut p, i, c.bit, a);
            next.push(p);
        }
        reindex(&mut next);
        self.paths = next;
    }

    fn finish(self) -> DecodeResult {
        let n = self.code.len();
        let (estimated, pool, stopped) = match self.stopped {
            Some((count, paths)) => (count, paths, true),
            None => (n, self.paths, false),
        };

        let decoded_id = |p: &DecodePath| -> Vec<Bit> {
            self.code
                .id_positions()
                .iter()
                .map(|&q| p.leaf_estimates[q])
                .collect()
        };
        let min_pm = |it: &mut dyn Iterator<Item = &DecodePath>| -> Option<usize> {
            it.fold(None::<&DecodePath>, |best, p| match best {
                Some(b) if b.pm <= p.pm => Some(b),
                _ => Some(p),
            })
            .map(|p| p.index)
        };

        // ID-aware output selection is part of the early stopping logic.
        let matching = match (stopped, self.early_stop, self.expected_id) {
            (false, true, Some(id)) => min_pm(&mut pool.iter().filter(|p| decoded_id(p) == id)),
            _ => None,
        };
        let best_idx = matching
            .or_else(|| min_pm(&mut pool.iter()))
            .expect("decoder always holds at least one path");
        let best = pool
            .into_iter()
            .find(|p| p.index == best_idx)
            .expect("index present");

        let (payload, id) = self.code.extract(&best.leaf_estimates);
        let reliability = if self.list_size == 1 {
            best.last_alpha.abs()
        } else {
            -best.pm
        };
        let id_match = match (stopped, self.early_stop, self.expected_id) {
            (true, _, _) | (_, _, None) => false,
            (false, true, Some(_)) => matching.is_some(),
            (false, false, Some(e)) => id.as_slice() == e,
        };
        DecodeResult {
            id_match,
            last_leaf_llr: best.last_alpha,
            payload,
            decoded_id: id,
            pm_best: best.pm,
            reliability,
            estimated_fraction: estimated as f64 / n as f64,
            stopped_early: stopped,
            u_hat: best.leaf_estimates,
        }
    }
}

#[inline]
fn set_leaf(p: &mut DecodePath, i: usize, bit: Bit, alpha: f64) {
    p.leaf_estimates[i] = bit;
    p.last_alpha = alpha;
    if i & 1 == 1 {
        p.beta_right[1] = bit;
    } else {
        p.beta_left[1] = bit;
    }
}

fn reindex(paths: &mut [DecodePath]) {
    for (k, p) in paths.iter_mut().enumerate() {
        p.index = k;
    }
}
