//! Declarative density families with approximants, nests and exponent
//! sequences.

use serde::{Deserialize, Serialize};

use super::nest::NestSpec;
use super::ConditionsError;
use crate::radial::RadialDensity;

/// Integrability exponent sequences; exponents may vary with the index.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ExponentSeq {
    Const { value: f64 },
    /// `ln(n + 1)`
    LogNPlus1,
    /// `ln(n + 1)` for even `n`, `1` for odd `n`.
    ParityLog,
}

impl ExponentSeq {
    pub fn eval(&self, n: u32) -> f64 {
        match *self {
            ExponentSeq::Const { value } => value,
            ExponentSeq::LogNPlus1 => (n as f64 + 1.0).ln(),
            ExponentSeq::ParityLog => {
                if n % 2 == 0 {
                    (n as f64 + 1.0).ln()
                } else {
                    1.0
                }
            }
        }
    }
}

/// How the approximating sequence is generated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Approximants {
    /// `f_n = f * 1_{F_n}`. All quantities reduce to integrals of the
    /// reference over clipped regions, so nothing is materialized.
    NestTruncation,
    /// Explicitly indexed densities.
    Explicit { indices: Vec<u32>, densities: Vec<RadialDensity> },
}

/// A family `(f, {f_n}, {F_n}, {p_n}, {q_n}, {r_n})` under test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityFamily {
    pub dim: u32,
    pub reference: RadialDensity,
    pub approximants: Approximants,
    pub nest: NestSpec,
    pub p_seq: ExponentSeq,
    pub q_seq: ExponentSeq,
    pub r_seq: ExponentSeq,
    /// Human-readable provenance for reports.
    pub label: String,
}

impl DensityFamily {
    pub fn validate(&self, indices: &[u32]) -> Result<(), ConditionsError> {
        if indices.is_empty() || indices.windows(2).any(|w| w[1] <= w[0]) {
            return Err(ConditionsError::BadIndices);
        }
        if !self.nest.is_increasing(indices) {
            return Err(ConditionsError::BadParams(
                "nest regions must increase with the index".into(),
            ));
        }
        for seq in [&self.p_seq, &self.q_seq, &self.r_seq] {
            for &n in indices {
                if seq.eval(n) < 1.0 {
                    return Err(ConditionsError::BadParams(format!(
                        "exponent {:?} drops below 1 at index {n}",
                        seq
                    )));
                }
            }
        }
        if self.reference.dim != self.dim {
            return Err(ConditionsError::BadParams("reference dimension mismatch".into()));
        }
        Ok(())
    }

    /// The explicit approximant at an index, when one exists.
    pub fn explicit_approximant(&self, n: u32) -> Option<&RadialDensity> {
        match &self.approximants {
            Approximants::NestTruncation => None,
            Approximants::Explicit { indices, densities } => indices
                .iter()
                .position(|&i| i == n)
                .map(|pos| &densities[pos]),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponent_sequences() {
        assert_eq!(ExponentSeq::Const { value: 3.0 }.eval(7), 3.0);
        assert_eq!(ExponentSeq::LogNPlus1.eval(4), 5.0f64.ln());
        assert_eq!(ExponentSeq::ParityLog.eval(4), 5.0f64.ln());
        assert_eq!(ExponentSeq::ParityLog.eval(5), 1.0);
    }

    #[test]
    fn validation_rejects_small_exponents() {
        let family = DensityFamily {
            dim: 2,
            reference: RadialDensity::power(2, 1.0),
            approximants: Approximants::NestTruncation,
            nest: NestSpec::balls(1.0, 1.0),
            p_seq: ExponentSeq::Const { value: 0.5 },
            q_seq: ExponentSeq::Const { value: 1.0 },
            r_seq: ExponentSeq::Const { value: 3.0 },
            label: "test".into(),
        };
        assert!(family.validate(&[1, 2, 4]).is_err());
        assert!(matches!(family.validate(&[]), Err(ConditionsError::BadIndices)));
    }
}
