//! Nests of annular regions `F_n = {r_lo(n) <= |x| <= r_hi(n)}`.

use serde::{Deserialize, Serialize};

use crate::radial::annulus_volume;

/// A radius sequence `n -> r(n)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RadiusSeq {
    Zero,
    Const { value: f64 },
    /// `coeff * n^exponent`
    Pow { coeff: f64, exponent: f64 },
}

impl RadiusSeq {
    pub fn eval(&self, n: u32) -> f64 {
        match *self {
            RadiusSeq::Zero => 0.0,
            RadiusSeq::Const { value } => value,
            RadiusSeq::Pow { coeff, exponent } => coeff * (n as f64).powf(exponent),
        }
    }

    /// The growth exponent when the sequence is a power of the index.
    pub fn power_exponent(&self) -> Option<f64> {
        match *self {
            RadiusSeq::Pow { exponent, .. } => Some(exponent),
            _ => None,
        }
    }
}

/// Increasing annular nest. `r_lo` must be nonincreasing and `r_hi`
/// nondecreasing in `n` for the nest to be increasing; `is_increasing`
/// checks this on a sampled index list.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NestSpec {
    pub r_lo: RadiusSeq,
    pub r_hi: RadiusSeq,
}

impl NestSpec {
    /// Balls `F_n = {|x| <= coeff n^exponent}`.
    pub fn balls(coeff: f64, exponent: f64) -> Self {
        Self { r_lo: RadiusSeq::Zero, r_hi: RadiusSeq::Pow { coeff, exponent } }
    }

    /// `F_n` as a radius interval.
    pub fn region(&self, n: u32) -> (f64, f64) {
        (self.r_lo.eval(n), self.r_hi.eval(n))
    }

    /// The ring `Gamma_k = F_{k+1} \ F_k`: up to two annular parts (the
    /// inner one shrinking toward 0, the outer one growing outward).
    pub fn shell_parts(&self, k: u32) -> Vec<(f64, f64)> {
        let (lo_k, hi_k) = self.region(k);
        let (lo_k1, hi_k1) = self.region(k + 1);
        let mut parts = Vec::with_capacity(2);
        if lo_k1 < lo_k {
            parts.push((lo_k1, lo_k));
        }
        if hi_k1 > hi_k {
            parts.push((hi_k, hi_k1));
        }
        parts
    }

    /// The complement `E \ F_n`: inner hole and outer tail.
    pub fn complement_parts(&self, n: u32) -> Vec<(f64, f64)> {
        let (lo, hi) = self.region(n);
        let mut parts = Vec::with_capacity(2);
        if lo > 0.0 {
            parts.push((0.0, lo));
        }
        if hi.is_finite() {
            parts.push((hi, f64::INFINITY));
        }
        parts
    }

    /// Lebesgue volume of `Gamma_k` in dimension `d`.
    pub fn shell_volume(&self, d: u32, k: u32) -> f64 {
        self.shell_parts(k).iter().map(|&(a, b)| annulus_volume(d, a, b)).sum()
    }

    /// Containment `F_n <= F_{n+1}` over the sampled indices.
    pub fn is_increasing(&self, indices: &[u32]) -> bool {
        indices.windows(2).all(|w| {
            let (lo_a, hi_a) = self.region(w[0]);
            let (lo_b, hi_b) = self.region(w[1]);
            lo_b <= lo_a && hi_b >= hi_a
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn ball_nest_shells() {
        let nest = NestSpec::balls(1.0, 1.0);
        assert_eq!(nest.region(3), (0.0, 3.0));
        assert_eq!(nest.shell_parts(3), vec![(3.0, 4.0)]);
        assert_eq!(nest.complement_parts(3), vec![(3.0, f64::INFINITY)]);
        assert!(nest.is_increasing(&[1, 2, 4, 8]));
    }

    #[test]
    fn annulus_nest_has_two_shell_parts() {
        let nest = NestSpec {
            r_lo: RadiusSeq::Pow { coeff: 1.0, exponent: -0.5 },
            r_hi: RadiusSeq::Pow { coeff: 1.0, exponent: 0.5 },
        };
        let parts = nest.shell_parts(4);
        assert_eq!(parts.len(), 2);
        assert_relative_eq!(parts[0].0, 1.0 / 5.0f64.sqrt(), epsilon = 1e-14);
        assert_relative_eq!(parts[0].1, 0.5, epsilon = 1e-14);
        assert_relative_eq!(parts[1].0, 2.0, epsilon = 1e-14);
        assert_relative_eq!(parts[1].1, 5.0f64.sqrt(), epsilon = 1e-14);
        // complement keeps the inner hole
        let comp = nest.complement_parts(4);
        assert_eq!(comp.len(), 2);
        assert_eq!(comp[0].0, 0.0);
    }

    #[test]
    fn shell_volume_matches_annulus_formula() {
        let nest = NestSpec::balls(1.0, 1.0);
        let v = nest.shell_volume(2, 2);
        assert_relative_eq!(v, std::f64::consts::PI * (9.0 - 4.0), epsilon = 1e-12);
    }
}
