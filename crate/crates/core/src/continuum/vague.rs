//! Vague-convergence gaps against families of compactly supported test
//! functions.

use serde::{Deserialize, Serialize};

use super::measure::MeasureRep;

/// A compactly supported continuous test function with declared support.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum TestFn {
    /// Tensor hat `prod_i (1 - |x_i - center_i| / half_width)_+`.
    Hat { center: Vec<f64>, half_width: f64 },
}

impl TestFn {
    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            TestFn::Hat { center, half_width } => center
                .iter()
                .zip(x)
                .map(|(c, xi)| (1.0 - (xi - c).abs() / half_width).max(0.0))
                .product(),
        }
    }

    /// Exact integral over an axis-aligned box (piecewise-linear factors
    /// integrate in closed form per axis).
    pub fn box_integral(&self, lo: &[f64], hi: &[f64]) -> f64 {
        match self {
            TestFn::Hat { center, half_width } => center
                .iter()
                .zip(lo)
                .zip(hi)
                .map(|((c, l), h)| hat_integral_1d(*c, *half_width, *l, *h))
                .product(),
        }
    }

    /// Integral against a measure: exact on atoms and on piecewise-constant
    /// cells.
    pub fn integral(&self, mu: &MeasureRep) -> f64 {
        let mut acc = 0.0;
        for atom in &mu.atoms {
            acc += atom.mass * self.eval(&atom.position);
        }
        if let Some(density) = &mu.density {
            for idx in 0..density.cell_count() {
                let value = density.values[idx];
                if value == 0.0 {
                    continue;
                }
                let (lo, hi) = density.cell_bounds(idx);
                acc += value * self.box_integral(&lo, &hi);
            }
        }
        acc
    }
}

/// `int_l^h (1 - |x - c| / w)_+ dx` in closed form.
fn hat_integral_1d(c: f64, w: f64, l: f64, h: f64) -> f64 {
    // antiderivative of the hat, anchored at the left edge of its support
    let anti = |x: f64| -> f64 {
        let t = (x - c).clamp(-w, w);
        if t <= 0.0 {
            // int_{-w}^{t} (1 + s/w) ds
            (t + w) * (t + w) / (2.0 * w)
        } else {
            w / 2.0 + t - t * t / (2.0 * w)
        }
    };
    if h <= l {
        0.0
    } else {
        anti(h) - anti(l)
    }
}

/// Default hat family: hats of the given half-width centered on a uniform
/// grid spanning `[lo, hi]` per axis (one-dimensional grids here; callers
/// supply explicit families in higher dimension).
pub fn hat_family(lo: f64, hi: f64, spacing: f64, half_width: f64) -> Vec<TestFn> {
    let mut tests = Vec::new();
    let mut c = lo;
    while c <= hi + 1e-12 {
        tests.push(TestFn::Hat { center: vec![c], half_width });
        c += spacing;
    }
    tests
}

/// `max_phi |int phi dmu - int phi dnu|` over the family.
pub fn vague_gap(mu: &MeasureRep, nu: &MeasureRep, tests: &[TestFn]) -> f64 {
    assert!(!tests.is_empty(), "test family must be nonempty");
    tests
        .iter()
        .map(|t| (t.integral(mu) - t.integral(nu)).abs())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn hat_integral_closed_form() {
        // full support integral = w
        assert_relative_eq!(hat_integral_1d(0.0, 1.0, -1.0, 1.0), 1.0, epsilon = 1e-14);
        // half support
        assert_relative_eq!(hat_integral_1d(0.0, 1.0, 0.0, 1.0), 0.5, epsilon = 1e-14);
        // window [-eps, eps]: 2 eps - eps^2
        let eps = 0.1;
        assert_relative_eq!(
            hat_integral_1d(0.0, 1.0, -eps, eps),
            2.0 * eps - eps * eps,
            epsilon = 1e-14
        );
    }

    #[test]
    fn gap_of_equal_measures_is_zero() {
        let mu = MeasureRep::dirac(vec![0.0]);
        let tests = hat_family(-1.0, 1.0, 0.5, 1.0);
        assert_eq!(vague_gap(&mu, &mu.clone(), &tests), 0.0);
    }

    #[test]
    fn dirac_vs_narrow_uniform_gap() {
        // unit hat at 0 vs uniform mass on [-eps, eps]: the average of the
        // hat is 1 - eps/2, so the gap is eps/2 = 0.05 at eps = 0.1
        let eps = 0.1;
        let mu = MeasureRep::dirac(vec![0.0]);
        let nu = MeasureRep::uniform_1d(-eps, eps, 1.0, 4);
        let hat = TestFn::Hat { center: vec![0.0], half_width: 1.0 };
        let gap = vague_gap(&mu, &nu, &[hat]);
        assert_relative_eq!(gap, 0.05, epsilon = 1e-12);
    }

    #[test]
    fn disjoint_atoms_see_unit_gap() {
        let mu = MeasureRep::dirac(vec![0.0]);
        let nu = MeasureRep::dirac(vec![5.0]);
        let tests = vec![
            TestFn::Hat { center: vec![0.0], half_width: 1.0 },
            TestFn::Hat { center: vec![5.0], half_width: 1.0 },
        ];
        assert_relative_eq!(vague_gap(&mu, &nu, &tests), 1.0, epsilon = 1e-14);
    }
}
