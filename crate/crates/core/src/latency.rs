//! Cycle model of the blind detection decoder array.
//!
//! A bank of `n_scl_max` list decoders of size `l_max` serves both phases. In
//! the first phase each physical decoder is split into `floor(l_max / l1)`
//! lanes, so `n_scl1 = n_scl_max * floor(l_max / l1)` candidates are decoded
//! concurrently. Candidate workloads are assumed evenly split between the two
//! code lengths.

use crate::error::{invalid, Result};

/// Parameters of the latency model. Cycle counts are reported as `f64`
/// because the first-phase term averages two decoder latencies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatencyParams {
    pub n1: usize,
    pub n2: usize,
    pub k1: usize,
    pub k2: usize,
    pub c1: usize,
    pub c2: usize,
    pub l1: usize,
    pub l_max: usize,
    pub n_scl_max: usize,
    pub t_sort: usize,
    /// Fraction of `T_SCL` spent per phase-2 decode of length `n1` with early stopping.
    pub e1: f64,
    pub e2: f64,
    pub f_hz: f64,
    /// Processing elements per decoder. Metadata only.
    pub pe: usize,
}

impl Default for LatencyParams {
    fn default() -> Self {
        LatencyParams {
            n1: 256,
            n2: 512,
            k1: 57,
            k2: 57,
            c1: 44,
            c2: 5,
            l1: 2,
            l_max: 8,
            n_scl_max: 5,
            t_sort: 5,
            e1: 1.0,
            e2: 1.0,
            f_hz: 1e9,
            pe: 64,
        }
    }
}

/// ID bits added on top of the information bits in the decoder schedule.
const ID_BITS: usize = 16;

/// SCL decoding latency in cycles for a code of length `n` with `k`
/// information bits: `2N + K + 16 - 2`.
pub fn t_scl(n: usize, k: usize) -> usize {
    2 * n + k + ID_BITS - 2
}

impl LatencyParams {
    /// Effective first-phase decoder count.
    pub fn n_scl1(&self) -> usize {
        self.n_scl_max * (self.l_max / self.l1.max(1))
    }

    fn validate(&self) -> Result<()> {
        if self.n_scl_max == 0 {
            return invalid("the decoder array needs at least one decoder");
        }
        if self.l1 == 0 || self.l_max < self.l1 {
            return invalid(format!(
                "need 1 <= L1 <= Lmax, got L1={} Lmax={}",
                self.l1, self.l_max
            ));
        }
        for e in [self.e1, self.e2] {
            if !(e > 0.0 && e <= 1.0) {
                return invalid(format!("early-stop fractions must lie in (0, 1], got {e}"));
            }
        }
        Ok(())
    }

    fn phase_one(&self) -> f64 {
        let t1 = t_scl(self.n1, self.k1) as f64;
        let t2 = t_scl(self.n2, self.k2) as f64;
        self.c1.div_ceil(self.n_scl1()) as f64 * (t1 / 2.0 + t2 / 2.0)
    }
}

/// Worst-case blind detection latency in cycles.
pub fn worst_case_latency(p: &LatencyParams) -> Result<f64> {
    p.validate()?;
    let t1 = t_scl(p.n1, p.k1);
    let t2 = t_scl(p.n2, p.k2);
    let phase_two = p.c2.div_ceil(p.n_scl_max) * t1.max(t2);
    Ok(p.phase_one() + p.t_sort as f64 + phase_two as f64)
}

/// Average latency with early stopping, with the second-phase candidates split
/// evenly between the two code lengths.
pub fn average_latency(p: &LatencyParams) -> Result<f64> {
    p.validate()?;
    let t1 = t_scl(p.n1, p.k1) as f64 * p.e1;
    let t2 = t_scl(p.n2, p.k2) as f64 * p.e2;
    let phase_two = if p.n_scl_max < p.c2 {
        let first = p.c2.div_ceil(2);
        first.div_ceil(p.n_scl_max) as f64 * t1 + (p.c2 - first).div_ceil(p.n_scl_max) as f64 * t2
    } else {
        t1.max(t2)
    };
    Ok(p.phase_one() + p.t_sort as f64 + phase_two)
}

pub fn cycles_to_seconds(cycles: f64, f_hz: f64) -> Result<f64> {
    if f_hz.is_nan() || f_hz <= 0.0 {
        return invalid(format!("clock frequency must be positive, got {f_hz}"));
    }
    Ok(cycles / f_hz)
}

/// One row of the latency table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatencyRow {
    pub n_scl_max: usize,
    pub worst_cycles: f64,
    pub worst_us: f64,
    pub average_cycles: f64,
    pub average_us: f64,
}

pub fn latency_table(base: &LatencyParams, decoders: &[usize]) -> Result<Vec<LatencyRow>> {
    decoders
        .iter()
        .map(|&n_scl_max| {
            let p = LatencyParams { n_scl_max, ..*base };
            let worst = worst_case_latency(&p)?;
            let avg = average_latency(&p)?;
            Ok(LatencyRow {
                n_scl_max,
                worst_cycles: worst,
                worst_us: cycles_to_seconds(worst, p.f_hz)? * 1e6,
                average_cycles: avg,
                average_us: cycles_to_seconds(avg, p.f_hz)? * 1e6,
            })
        })
        .collect()
}

/// CSV rendering of a latency table.
pub fn latency_csv(rows: &[LatencyRow]) -> String {
    let mut out = String::from("n_scl_max,worst_cycles,worst_us,average_cycles,average_us\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{:.3},{},{:.3}\n",
            r.n_scl_max,
            cycles(r.worst_cycles),
            r.worst_us,
            cycles(r.average_cycles),
            r.average_us
        ));
    }
    out
}

/// Whole cycle counts print bare, fractional ones (from E < 1) to 3 places.
fn cycles(x: f64) -> String {
    let rounded = format!("{x:.3}");
    rounded
        .trim_end_matches('0')
        .trim_end_matches('.')
        .to_string()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table_one(n_scl_max: usize) -> LatencyParams {
        LatencyParams {
            n_scl_max,
            ..LatencyParams::default()
        }
    }

    #[test]
    fn t_scl_values() {
        assert_eq!(t_scl(256, 57), 583);
        assert_eq!(t_scl(512, 57), 1095);
        assert_eq!(t_scl(256, 8), 534);
    }

    #[test]
    fn effective_decoders() {
        assert_eq!(table_one(3).n_scl1(), 12);
        assert_eq!(
            LatencyParams {
                l1: 3,
                ..table_one(2)
            }
            .n_scl1(),
            4
        );
    }

    #[test]
    fn worst_case_by_hand() {
        // ceil(44/20) * (583/2 + 1095/2) + 5 + ceil(5/5) * 1095
        assert_eq!(
            worst_case_latency(&table_one(5)).unwrap(),
            3.0 * 839.0 + 5.0 + 1095.0
        );
        assert_eq!(worst_case_latency(&table_one(5)).unwrap(), 3617.0);
        assert_eq!(worst_case_latency(&table_one(1)).unwrap(), 14709.0);
    }

    #[test]
    fn empty_workload_is_sort_only() {
        let p = LatencyParams {
            c1: 0,
            c2: 0,
            ..table_one(2)
        };
        assert_eq!(worst_case_latency(&p).unwrap(), 5.0);
    }

    #[test]
    fn zero_decoders_rejected() {
        assert!(worst_case_latency(&table_one(0)).is_err());
        assert!(average_latency(&table_one(0)).is_err());
        assert!(average_latency(&LatencyParams {
            e1: 0.0,
            ..table_one(1)
        })
        .is_err());
    }

    #[test]
    fn no_early_stop_average() {
        // With every decoder busy for the full schedule, the averaged second
        // phase is one long decode when enough decoders exist.
        let p = table_one(5);
        assert_eq!(average_latency(&p).unwrap(), 3.0 * 839.0 + 5.0 + 1095.0);
        let p = table_one(4);
        // ceil(44/16) = 3, then ceil(3/4) * 583 + ceil(2/4) * 1095
        assert_eq!(
            average_latency(&p).unwrap(),
            3.0 * 839.0 + 5.0 + 583.0 + 1095.0
        );
    }

    #[test]
    fn average_monotone_in_decoders() {
        for (e1, e2) in [(1.0, 1.0), (0.42, 0.85), (0.1, 0.9)] {
            let mut prev = f64::INFINITY;
            for n in 1..=16 {
                let a = average_latency(&LatencyParams {
                    e1,
                    e2,
                    ..table_one(n)
                })
                .unwrap();
                assert!(a <= prev, "n={n} e=({e1},{e2})");
                prev = a;
            }
        }
    }

    #[test]
    fn average_never_exceeds_worst() {
        for n in 1..=8 {
            for (e1, e2) in [(1.0, 1.0), (0.4, 0.9), (0.05, 0.05), (1.0, 0.3)] {
                let p = LatencyParams {
                    e1,
                    e2,
                    ..table_one(n)
                };
                assert!(average_latency(&p).unwrap() <= worst_case_latency(&p).unwrap());
            }
        }
    }

    #[test]
    fn worst_case_monotone_in_decoders() {
        let mut prev = f64::INFINITY;
        for n in 1..=64 {
            let w = worst_case_latency(&table_one(n)).unwrap();
            assert!(w <= prev);
            prev = w;
        }
    }

    #[test]
    fn seconds() {
        assert!((cycles_to_seconds(14720.0, 1e9).unwrap() - 14.72e-6).abs() < 1e-15);
        assert_eq!(cycles_to_seconds(0.0, 3.0).unwrap(), 0.0);
        assert!(cycles_to_seconds(1.0, 0.0).is_err());
    }

    #[test]
    fn csv_layout() {
        let rows = latency_table(&LatencyParams::default(), &[1, 5]).unwrap();
        let csv = latency_csv(&rows);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(
            lines[0],
            "n_scl_max,worst_cycles,worst_us,average_cycles,average_us"
        );
        // 9229 + 5 + 3 * 583 + 2 * 1095
        assert_eq!(lines[1], "1,14709,14.709,13173,13.173");
        assert_eq!(lines.len(), 3);
        let p = LatencyParams {
            e1: 0.498,
            e2: 0.805,
            ..LatencyParams::default()
        };
        let csv = latency_csv(&latency_table(&p, &[1]).unwrap());
        // 9229 + 5 + 3 * 583 * 0.498 + 2 * 1095 * 0.805
        assert_eq!(
            csv.lines().nth(1).unwrap(),
            "1,14709,14.709,11867.952,11.868"
        );
    }
}
