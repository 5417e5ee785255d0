//! Polar code construction and encoding.
//!
//! Bit-channel reliabilities come from the Bhattacharyya bound recursion, with
//! the most significant index bit applied first so that the ordering matches
//! the decoder's tree schedule (left half of the input vector first).

use std::fmt;

use crate::error::{invalid, Result};
use crate::Bit;

/// Default number of ID bits carried in place of frozen bits.
pub const DEFAULT_ID_LEN: usize = 16;

/// Placement rule for the ID bits relative to the information bits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum IdMode {
    /// ID bits on the most reliable channels after the `K` information bits.
    AfterInfo,
    /// ID bits on the most reliable channels, information right after.
    MostReliable,
    /// Among the `K + id_len` most reliable channels, the ID takes the ones
    /// decoded first (smallest natural index).
    DecodedFirst,
}

impl IdMode {
    pub fn from_number(mode: u8) -> Result<Self> {
        match mode {
            1 => Ok(IdMode::AfterInfo),
            2 => Ok(IdMode::MostReliable),
            3 => Ok(IdMode::DecodedFirst),
            m => invalid(format!("id mode must be 1, 2 or 3, got {m}")),
        }
    }

    pub fn number(self) -> u8 {
        match self {
            IdMode::AfterInfo => 1,
            IdMode::MostReliable => 2,
            IdMode::DecodedFirst => 3,
        }
    }
}

impl fmt::Display for IdMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.number())
    }
}

/// Role of one input position of the polar transform.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BitRole {
    Frozen,
    Info,
    Id,
}

/// An immutable polar code description with ID-bit placement.
#[derive(Debug, Clone, PartialEq)]
pub struct PolarCode {
    n: usize,
    log_n: usize,
    k: usize,
    id_len: usize,
    id_mode: IdMode,
    reliability_order: Vec<usize>,
    info_positions: Vec<usize>,
    id_positions: Vec<usize>,
    frozen_positions: Vec<usize>,
    roles: Vec<BitRole>,
}

/// Bhattacharyya parameters of the `n` synthetic channels for a BPSK-AWGN
/// channel at `design_snr_db`.
pub fn bhattacharyya(n: usize, design_snr_db: f64) -> Result<Vec<f64>> {
    if n < 2 || !n.is_power_of_two() {
        return invalid(format!("code length must be a power of two >= 2, got {n}"));
    }
    let levels = n.trailing_zeros();
    let z0 = (-(10f64.powf(design_snr_db / 10.0))).exp();
    Ok((0..n)
        .map(|i| {
            (0..levels).rev().fold(z0, |z, b| {
                if (i >> b) & 1 == 1 {
                    z * z
                } else {
                    2.0 * z - z * z
                }
            })
        })
        .collect())
}

/// Indices `0..n` ordered most reliable first (ascending Bhattacharyya
/// parameter, ties to the lower index).
pub fn reliability_order(n: usize, design_snr_db: f64) -> Result<Vec<usize>> {
    let z = bhattacharyya(n, design_snr_db)?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| z[a].total_cmp(&z[b]).then(a.cmp(&b)));
    Ok(order)
}

impl PolarCode {
    /// Builds a code of length `n` with `k` information bits and `id_len` ID
    /// bits placed according to `id_mode`. All other positions are frozen to 0.
    pub fn construct(
        n: usize,
        k: usize,
        id_len: usize,
        id_mode: IdMode,
        design_snr_db: f64,
    ) -> Result<Self> {
        let order = reliability_order(n, design_snr_db)?;
        Self::from_order(order, k, id_len, id_mode)
    }

    /// Builds a code from an explicit reliability order (most reliable first).
    pub fn from_order(
        reliability_order: Vec<usize>,
        k: usize,
        id_len: usize,
        id_mode: IdMode,
    ) -> Result<Self> {
        let n = reliability_order.len();
        if n < 2 || !n.is_power_of_two() {
            return invalid(format!("code length must be a power of two >= 2, got {n}"));
        }
        let mut seen = vec![false; n];
        for &i in &reliability_order {
            if i >= n || std::mem::replace(&mut seen[i], true) {
                return invalid("reliability order is not a permutation");
            }
        }
        if k + id_len > n {
            return invalid(format!("K + id_len = {} exceeds N = {n}", k + id_len));
        }

        let top = &reliability_order[..k + id_len];
        let (mut info, mut id): (Vec<usize>, Vec<usize>) = match id_mode {
            IdMode::AfterInfo => (top[..k].to_vec(), top[k..].to_vec()),
            IdMode::MostReliable => (top[id_len..].to_vec(), top[..id_len].to_vec()),
            IdMode::DecodedFirst => {
                let mut sorted = top.to_vec();
                sorted.sort_unstable();
                let id = sorted[..id_len].to_vec();
                (sorted[id_len..].to_vec(), id)
            }
        };
        info.sort_unstable();
        id.sort_unstable();

        let mut roles = vec![BitRole::Frozen; n];
        for &i in &info {
            roles[i] = BitRole::Info;
        }
        for &i in &id {
            roles[i] = BitRole::Id;
        }
        let frozen = (0..n).filter(|&i| roles[i] == BitRole::Frozen).collect();

        Ok(PolarCode {
            n,
            log_n: n.trailing_zeros() as usize,
            k,
            id_len,
            id_mode,
            reliability_order,
            info_positions: info,
            id_positions: id,
            frozen_positions: frozen,
            roles,
        })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn log_len(&self) -> usize {
        self.log_n
    }

    pub fn info_len(&self) -> usize {
        self.k
    }

    pub fn id_len(&self) -> usize {
        self.id_len
    }

    pub fn id_mode(&self) -> IdMode {
        self.id_mode
    }

    /// Information rate `K / N`; the ID bits count as overhead.
    pub fn rate(&self) -> f64 {
        self.k as f64 / self.n as f64
    }

    pub fn reliability_order(&self) -> &[usize] {
        &self.reliability_order
    }

    /// Information positions in ascending index order.
    pub fn info_positions(&self) -> &[usize] {
        &self.info_positions
    }

    /// ID positions in ascending index order.
    pub fn id_positions(&self) -> &[usize] {
        &self.id_positions
    }

    pub fn frozen_positions(&self) -> &[usize] {
        &self.frozen_positions
    }

    pub fn role(&self, index: usize) -> BitRole {
        self.roles[index]
    }

    pub fn roles(&self) -> &[BitRole] {
        &self.roles
    }

    /// Scatters `payload` and `id` into an input vector `u` (ascending index
    /// order within each set), frozen positions 0.
    pub fn build_input(&self, payload: &[Bit], id: &[Bit]) -> Result<Vec<Bit>> {
        if payload.len() != self.k {
            return invalid(format!(
                "payload has {} bits, code expects {}",
                payload.len(),
                self.k
            ));
        }
        if id.len() != self.id_len {
            return invalid(format!(
                "id has {} bits, code expects {}",
                id.len(),
                self.id_len
            ));
        }
        let mut u = vec![0; self.n];
        for (&pos, &b) in self.info_positions.iter().zip(payload) {
            u[pos] = b & 1;
        }
        for (&pos, &b) in self.id_positions.iter().zip(id) {
            u[pos] = b & 1;
        }
        Ok(u)
    }

    /// Encodes `payload` and `id` into a length-`N` codeword `x = u G^{⊗n}`.
    pub fn encode(&self, payload: &[Bit], id: &[Bit]) -> Result<Vec<Bit>> {
        let mut u = self.build_input(payload, id)?;
        polar_transform_in_place(&mut u);
        Ok(u)
    }

    /// Splits an input vector into (payload, id).
    pub fn extract(&self, u: &[Bit]) -> (Vec<Bit>, Vec<Bit>) {
        (
            self.info_positions.iter().map(|&p| u[p]).collect(),
            self.id_positions.iter().map(|&p| u[p]).collect(),
        )
    }
}

/// Applies the Kronecker-power transform over GF(2) in place. The transform is
/// an involution.
pub fn polar_transform_in_place(bits: &mut [Bit]) {
    let n = bits.len();
    debug_assert!(n.is_power_of_two());
    let mut h = 1;
    while h < n {
        for block in bits.chunks_mut(2 * h) {
            let (lo, hi) = block.split_at_mut(h);
            for (a, b) in lo.iter_mut().zip(hi.iter()) {
                *a ^= *b;
            }
        }
        h *= 2;
    }
}

pub fn polar_transform(bits: &[Bit]) -> Vec<Bit> {
    let mut out = bits.to_vec();
    polar_transform_in_place(&mut out);
    out
}
