//! Short-interval sweeps and the finite-window weak-mixing check.

use std::io::Write;

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use super::{IdocVerdict, Iet};
use crate::error::{Error, Result};
use crate::permutation::TypeWReport;
use crate::rational::{self, Rational};

/// Which depths `n` a sweep records.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Schedule {
    /// `1, ⌈r⌉, ⌈r²⌉, ...` and finally `n_max`.
    Geometric { ratio: f64 },
    /// `step, 2·step, ...` and finally `n_max`.
    Linear { step: usize },
    Every,
}

impl Schedule {
    pub fn points(&self, n_max: usize) -> Vec<usize> {
        let mut out = Vec::new();
        match *self {
            Schedule::Geometric { ratio } => {
                let ratio = ratio.max(1.0 + 1e-9);
                let mut x = 1.0f64;
                while (x.ceil() as usize) < n_max {
                    let n = x.ceil() as usize;
                    if out.last() != Some(&n) {
                        out.push(n);
                    }
                    x *= ratio;
                }
            }
            Schedule::Linear { step } => {
                let step = step.max(1);
                out.extend((1..).map(|k| k * step).take_while(|&n| n < n_max));
            }
            Schedule::Every => out.extend(1..n_max),
        }
        if n_max >= 1 {
            out.push(n_max);
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ShortIntervalSample {
    pub n: usize,
    #[serde(with = "crate::rational")]
    pub epsilon_n: Rational,
    #[serde(with = "crate::rational")]
    pub n_epsilon_n: Rational,
}

impl ShortIntervalSample {
    pub fn n_epsilon_f64(&self) -> f64 {
        rational::to_f64(&self.n_epsilon_n)
    }
}

/// Writes samples as CSV with columns `n, epsilon_n_num, epsilon_n_den, n_eps_float`.
pub fn write_samples_csv<W: Write>(samples: &[ShortIntervalSample], w: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(["n", "epsilon_n_num", "epsilon_n_den", "n_eps_float"])?;
    for s in samples {
        wtr.write_record([
            s.n.to_string(),
            s.epsilon_n.numer().to_string(),
            s.epsilon_n.denom().to_string(),
            format!("{:.12e}", s.n_epsilon_f64()),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Verdict {
    WeakMixingCertified,
    Inconclusive,
    CriterionFailsNumerically,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WeakMixingEvidence {
    pub type_w: TypeWReport,
    pub idoc: IdocVerdict,
    /// Inclusive window `[n_max/2, n_max]` used for the tail test.
    pub tail_window: (usize, usize),
    #[serde(with = "crate::rational")]
    pub tail_max_n_epsilon: Rational,
    #[serde(with = "crate::rational")]
    pub tail_min_n_epsilon: Rational,
    #[serde(with = "crate::rational")]
    pub threshold: Rational,
    /// Ergodicity of `T` is a hypothesis of the criterion and is never checked here.
    pub ergodicity_unverified: bool,
    pub caveats: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WeakMixingReport {
    pub verdict: Verdict,
    pub evidence: WeakMixingEvidence,
}

impl Iet {
    /// `n·ε_n` along a schedule of depths up to `n_max`.
    pub fn short_intervals_diagnostic(
        &self,
        n_max: usize,
        schedule: Schedule,
    ) -> Result<Vec<ShortIntervalSample>> {
        if n_max == 0 {
            return Err(Error::Precondition("n_max must be ≥ 1".into()));
        }
        let mut tracker = self.partition_tracker();
        let mut out = Vec::new();
        for n in schedule.points(n_max) {
            tracker.advance_to(n);
            let epsilon_n = tracker.epsilon();
            let n_epsilon_n = &epsilon_n * Rational::from_integer(n.into());
            out.push(ShortIntervalSample {
                n,
                epsilon_n,
                n_epsilon_n,
            });
        }
        Ok(out)
    }

    /// Sufficient-only weak-mixing check: type W, IDOC to `depth`, and a tail
    /// window of `n·ε_n` reaching `threshold`. Never reports a negative.
    pub fn weak_mixing_verdict(
        &self,
        depth: usize,
        n_max: usize,
        threshold: &Rational,
    ) -> Result<WeakMixingReport> {
        if n_max == 0 {
            return Err(Error::Precondition("n_max must be ≥ 1".into()));
        }
        let type_w = self.perm().classify_type_w()?;
        if !type_w.type_w {
            return Err(Error::NotTypeW {
                perm: self.perm().images().to_vec(),
                trace: type_w.trace,
            });
        }
        let idoc = self.check_idoc(depth)?;
        let lo = (n_max / 2).max(1);
        let mut tracker = self.partition_tracker();
        tracker.advance_to(lo.saturating_sub(1));
        let mut tail_max = Rational::zero();
        let mut tail_min: Option<Rational> = None;
        for n in lo..=n_max {
            tracker.advance_to(n);
            let ne = tracker.epsilon() * Rational::from_integer(n.into());
            if ne > tail_max {
                tail_max = ne.clone();
            }
            if tail_min.as_ref().is_none_or(|m| &ne < m) {
                tail_min = Some(ne);
            }
        }
        let mut caveats = vec![
            format!("distinct-orbit condition checked only up to depth {depth}"),
            format!("limsup of n*epsilon_n replaced by the maximum over n in [{lo}, {n_max}]"),
            "ergodicity is assumed, not verified".to_string(),
        ];
        let verdict = if !idoc.holds() {
            caveats.push("exact orbit coincidence found; the criterion does not apply".into());
            Verdict::CriterionFailsNumerically
        } else if &tail_max >= threshold {
            Verdict::WeakMixingCertified
        } else {
            Verdict::Inconclusive
        };
        Ok(WeakMixingReport {
            verdict,
            evidence: WeakMixingEvidence {
                type_w,
                idoc,
                tail_window: (lo, n_max),
                tail_max_n_epsilon: tail_max,
                tail_min_n_epsilon: tail_min.unwrap_or_else(Rational::zero),
                threshold: threshold.clone(),
                ergodicity_unverified: true,
                caveats,
            },
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schedules_end_at_n_max() {
        assert_eq!(Schedule::Geometric { ratio: 2.0 }.points(10), vec![1, 2, 4, 8, 10]);
        assert_eq!(Schedule::Linear { step: 3 }.points(10), vec![3, 6, 9, 10]);
        assert_eq!(Schedule::Every.points(3), vec![1, 2, 3]);
        assert_eq!(Schedule::Geometric { ratio: 1.5 }.points(1), vec![1]);
    }

    #[test]
    fn epsilon_non_increasing_along_schedule() {
        let t = Iet::from_strs(&["832040/1346269", "514229/1346269"], &[2, 1]).unwrap();
        let s = t
            .short_intervals_diagnostic(5000, Schedule::Geometric { ratio: 1.3 })
            .unwrap();
        assert!(s.windows(2).all(|w| w[1].epsilon_n <= w[0].epsilon_n));
    }

    #[test]
    fn csv_columns() {
        let t = Iet::from_strs(&["1/3", "2/3"], &[2, 1]).unwrap();
        let s = t.short_intervals_diagnostic(2, Schedule::Every).unwrap();
        let mut buf = Vec::new();
        write_samples_csv(&s, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("n,epsilon_n_num,epsilon_n_den,n_eps_float"));
        assert!(lines.next().unwrap().starts_with("1,1,3,"));
    }

    #[test]
    fn two_letter_rotation_is_not_type_w() {
        let t = Iet::from_strs(&["1/3", "2/3"], &[2, 1]).unwrap();
        let one = Rational::from_integer(1.into());
        match t.weak_mixing_verdict(10, 10, &one) {
            Err(Error::NotTypeW { trace, .. }) => assert_eq!(trace, vec![1, 3]),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn collision_gives_criterion_failure() {
        let t = Iet::from_strs(&["1/4", "1/4", "1/2"], &[3, 2, 1]).unwrap();
        let thr = Rational::new(1.into(), 20.into());
        let r = t.weak_mixing_verdict(50, 100, &thr).unwrap();
        assert_eq!(r.verdict, Verdict::CriterionFailsNumerically);
        assert!(!r.evidence.idoc.holds());
        assert!(r.evidence.ergodicity_unverified);
    }
}
