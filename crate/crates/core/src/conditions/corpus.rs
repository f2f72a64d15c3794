//! The radial example corpus: five density families with known condition
//! behavior, used as the reference workload of the checker.

use serde::{Deserialize, Serialize};

use super::family::{Approximants, DensityFamily, ExponentSeq};
use super::nest::{NestSpec, RadiusSeq};
use super::ConditionsError;
use crate::radial::{RadialDensity, RadialPiece, RadialProfile, ShellFamily};

/// Named corpus entries.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum CorpusExample {
    /// `f = |x|^{-beta}` with `0 < beta < d`, truncated to balls;
    /// `r_n = (d+1)/beta` makes (Ac2) pass.
    PowerBeta { d: u32, beta: f64 },
    /// Thin spikes `|x|^{-d a}` accumulating at the origin plus spikes
    /// `|x|^{d b}` escaping outward (`a, b >= 1`), on the annulus nest;
    /// `p = q = 1`, `r = 2`.
    AnnulusSpikes { d: u32, a: f64, b: f64 },
    /// `|x|^{-d} (ln|x|)^{-2}` near the origin plus shells
    /// `|x|^{-d + 1/ln(n+1)}`; the varying exponent `r_n = ln(n+1)` makes
    /// (Ac1) pass.
    LogSingular { d: u32 },
    /// `f = |x|^{-1}` outside the unit ball with `r_n = d + 1`:
    /// (Ac2) passes but (Ac1) diverges.
    CounterexampleI { d: u32 },
    /// Parity shells `|x|^d` / `|x|^{-d}` with `r_n` alternating
    /// `ln(n+1)` / `1` by parity (`delta > 1`): (Ac1) passes but (Ac2)
    /// blows up along even indices.
    CounterexampleII { d: u32, delta: f64 },
}

/// Materialize a corpus family, validating the stated parameter ranges.
pub fn corpus_example(which: CorpusExample) -> Result<DensityFamily, ConditionsError> {
    match which {
        CorpusExample::PowerBeta { d, beta } => {
            if d < 2 || beta <= 0.0 || beta >= d as f64 {
                return Err(ConditionsError::BadParams(format!(
                    "power_beta needs d >= 2 and 0 < beta < d, got d = {d}, beta = {beta}"
                )));
            }
            Ok(DensityFamily {
                dim: d,
                reference: RadialDensity::power(d, beta),
                approximants: Approximants::NestTruncation,
                nest: NestSpec::balls(1.0, 1.0),
                p_seq: ExponentSeq::Const { value: 2.0 },
                q_seq: ExponentSeq::Const { value: 2.0 },
                r_seq: ExponentSeq::Const { value: (d as f64 + 1.0) / beta },
                label: format!("power_beta(d={d}, beta={beta})"),
            })
        }
        CorpusExample::AnnulusSpikes { d, a, b } => {
            if d < 2 || a < 1.0 || b < 1.0 {
                return Err(ConditionsError::BadParams(format!(
                    "annulus_spikes needs d >= 2 and a, b >= 1, got d = {d}, a = {a}, b = {b}"
                )));
            }
            let inv_d = 1.0 / d as f64;
            Ok(DensityFamily {
                dim: d,
                reference: RadialDensity::new(d)
                    .with_shells(ShellFamily::SpikeInner { a })
                    .with_shells(ShellFamily::SpikeOuter { b }),
                approximants: Approximants::NestTruncation,
                nest: NestSpec {
                    r_lo: RadiusSeq::Pow { coeff: 1.0, exponent: -inv_d },
                    r_hi: RadiusSeq::Pow { coeff: 1.0, exponent: inv_d },
                },
                p_seq: ExponentSeq::Const { value: 1.0 },
                q_seq: ExponentSeq::Const { value: 1.0 },
                r_seq: ExponentSeq::Const { value: 2.0 },
                label: format!("annulus_spikes(d={d}, a={a}, b={b})"),
            })
        }
        CorpusExample::LogSingular { d } => {
            if d < 2 {
                return Err(ConditionsError::BadParams(format!(
                    "log_singular needs d >= 2, got {d}"
                )));
            }
            Ok(DensityFamily {
                dim: d,
                reference: RadialDensity::new(d)
                    .with_piece(RadialPiece {
                        r_lo: 0.0,
                        r_hi: (-1.0f64).exp(),
                        profile: RadialProfile::PowLog {
                            exponent: -(d as f64),
                            log_power: -2.0,
                        },
                    })
                    .with_shells(ShellFamily::LogTail),
                approximants: Approximants::NestTruncation,
                nest: NestSpec::balls(1.0, 1.0),
                p_seq: ExponentSeq::Const { value: 1.0 },
                q_seq: ExponentSeq::Const { value: 1.0 },
                r_seq: ExponentSeq::LogNPlus1,
                label: format!("log_singular(d={d})"),
            })
        }
        CorpusExample::CounterexampleI { d } => {
            if d < 2 {
                return Err(ConditionsError::BadParams(format!(
                    "counterexample_i needs d >= 2, got {d}"
                )));
            }
            Ok(DensityFamily {
                dim: d,
                reference: RadialDensity::new(d).with_piece(RadialPiece {
                    r_lo: 1.0,
                    r_hi: f64::INFINITY,
                    profile: RadialProfile::Pow { coeff: 1.0, exponent: -1.0 },
                }),
                approximants: Approximants::NestTruncation,
                nest: NestSpec::balls(1.0, 1.0),
                p_seq: ExponentSeq::Const { value: 1.0 },
                q_seq: ExponentSeq::Const { value: 1.0 },
                r_seq: ExponentSeq::Const { value: d as f64 + 1.0 },
                label: format!("counterexample_i(d={d})"),
            })
        }
        CorpusExample::CounterexampleII { d, delta } => {
            if d < 2 || delta <= 1.0 {
                return Err(ConditionsError::BadParams(format!(
                    "counterexample_ii needs d >= 2 and delta > 1, got d = {d}, delta = {delta}"
                )));
            }
            Ok(DensityFamily {
                dim: d,
                reference: RadialDensity::new(d)
                    .with_shells(ShellFamily::ParityOdd)
                    .with_shells(ShellFamily::ParityEven { delta }),
                approximants: Approximants::NestTruncation,
                nest: NestSpec::balls(1.0, 1.0 / d as f64),
                p_seq: ExponentSeq::Const { value: 1.0 },
                q_seq: ExponentSeq::Const { value: 1.0 },
                r_seq: ExponentSeq::ParityLog,
                label: format!("counterexample_ii(d={d}, delta={delta})"),
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conditions::checker::{
        check_condition, ConditionId, Verdict, DEFAULT_CONSTANTS, DEFAULT_INDICES,
    };
    use approx::assert_relative_eq;

    #[test]
    fn parameter_ranges_enforced() {
        assert!(corpus_example(CorpusExample::PowerBeta { d: 2, beta: 2.0 }).is_err());
        assert!(corpus_example(CorpusExample::PowerBeta { d: 2, beta: 0.0 }).is_err());
        assert!(corpus_example(CorpusExample::AnnulusSpikes { d: 2, a: 0.5, b: 1.0 }).is_err());
        assert!(corpus_example(CorpusExample::CounterexampleII { d: 2, delta: 1.0 }).is_err());
    }

    #[test]
    fn power_beta_ac2_value_at_n_100() {
        // quantity(n) = C^3 * 2 pi / n for d = 2, beta = 1, C = 2
        let family = corpus_example(CorpusExample::PowerBeta { d: 2, beta: 1.0 }).unwrap();
        let report = check_condition(
            &family,
            ConditionId::Ac2,
            &[50, 100],
            &[2.0],
            None,
        )
        .unwrap();
        let v = report.curves[0].values[1].value().unwrap();
        assert_relative_eq!(v, 8.0 * 2.0 * std::f64::consts::PI / 100.0, epsilon = 1e-10);
        assert_relative_eq!(v, 0.5026548245743669, epsilon = 1e-10);
    }

    #[test]
    fn power_beta_aa_is_identically_zero() {
        let family = corpus_example(CorpusExample::PowerBeta { d: 2, beta: 1.0 }).unwrap();
        let report =
            check_condition(&family, ConditionId::Aa, &DEFAULT_INDICES, &[], None).unwrap();
        assert_eq!(report.verdict, Verdict::TendsToZero);
        for v in &report.curves[0].values {
            assert_eq!(v.value().unwrap(), 0.0);
        }
    }

    #[test]
    fn counterexample_i_ac1_partial_sums_grow() {
        // terms (c_d / (k (k+1)))^{1/(d+1)}: direct summation of the exact
        // terms must match the checker's head window
        let family = corpus_example(CorpusExample::CounterexampleI { d: 2 }).unwrap();
        let report =
            check_condition(&family, ConditionId::Ac1, &DEFAULT_INDICES, &[], None).unwrap();
        assert_eq!(report.verdict, Verdict::Diverges);
    }

    #[test]
    fn monotone_tails_for_radial_powers() {
        let family = corpus_example(CorpusExample::PowerBeta { d: 2, beta: 1.0 }).unwrap();
        let report = check_condition(
            &family,
            ConditionId::Ac2,
            &DEFAULT_INDICES,
            &DEFAULT_CONSTANTS,
            None,
        )
        .unwrap();
        for curve in &report.curves {
            let vals: Vec<f64> = curve.values.iter().map(|v| v.value().unwrap()).collect();
            assert!(vals.windows(2).all(|w| w[1] <= w[0]), "tails must be nonincreasing");
        }
        assert_eq!(report.verdict, Verdict::TendsToZero);
    }
}
