//! Declarative one-dimensional nonnegative functions.
//!
//! These are the integrands the Monte-Carlo functionals and the continuum
//! quadratures consume. Keeping them as data (rather than closures) makes
//! scenario configs serializable and keeps singular points declared, so the
//! quadrature can grade its panels toward them.

use serde::{Deserialize, Serialize};

use crate::continuum::ResolventKernel;
use crate::radial::simpson_adaptive;

/// A nonnegative function on the line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FunctionSpec {
    Const { value: f64 },
    /// `coeff * |x|^exponent` on `[-extent, extent]`, zero outside.
    PowAbs { coeff: f64, exponent: f64, extent: f64 },
    /// `(1 - |x - center| / half_width)_+`.
    Hat { center: f64, half_width: f64 },
    /// `min(inner, cap)`.
    Capped { inner: Box<FunctionSpec>, cap: f64 },
    /// `(inner - level)_+`, the part a cap at `level` cuts away.
    Excess { inner: Box<FunctionSpec>, level: f64 },
    Scaled { inner: Box<FunctionSpec>, factor: f64 },
}

impl FunctionSpec {
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            FunctionSpec::Const { value } => *value,
            FunctionSpec::PowAbs { coeff, exponent, extent } => {
                if x.abs() > *extent {
                    0.0
                } else if x == 0.0 && *exponent < 0.0 {
                    // integrands are quasi-everywhere representatives: the
                    // value on the null set where the power blows up is
                    // immaterial to every functional built from it
                    0.0
                } else {
                    coeff * x.abs().powf(*exponent)
                }
            }
            FunctionSpec::Hat { center, half_width } => {
                (1.0 - (x - center).abs() / half_width).max(0.0)
            }
            FunctionSpec::Capped { inner, cap } => inner.eval(x).min(*cap),
            FunctionSpec::Excess { inner, level } => (inner.eval(x) - level).max(0.0),
            FunctionSpec::Scaled { inner, factor } => factor * inner.eval(x),
        }
    }

    /// Smallest interval outside which the function vanishes; `None` for
    /// full support.
    pub fn support(&self) -> Option<(f64, f64)> {
        match self {
            FunctionSpec::Const { value } => {
                if *value == 0.0 {
                    Some((0.0, 0.0))
                } else {
                    None
                }
            }
            FunctionSpec::PowAbs { extent, .. } => Some((-extent, *extent)),
            FunctionSpec::Hat { center, half_width } => {
                Some((center - half_width, center + half_width))
            }
            FunctionSpec::Capped { inner, .. }
            | FunctionSpec::Excess { inner, .. }
            | FunctionSpec::Scaled { inner, .. } => inner.support(),
        }
    }

    /// Points where the function is singular or merely kinked; quadrature
    /// panels split here.
    pub fn breakpoints(&self) -> Vec<f64> {
        match self {
            FunctionSpec::Const { .. } => vec![],
            FunctionSpec::PowAbs { extent, .. } => vec![-*extent, 0.0, *extent],
            FunctionSpec::Hat { center, half_width } => {
                vec![center - half_width, *center, center + half_width]
            }
            FunctionSpec::Capped { inner, .. }
            | FunctionSpec::Excess { inner, .. }
            | FunctionSpec::Scaled { inner, .. } => inner.breakpoints(),
        }
    }

    /// Points where `eval` diverges (a cap in front removes them).
    pub fn singular_points(&self) -> Vec<f64> {
        match self {
            FunctionSpec::Const { .. } | FunctionSpec::Hat { .. } => vec![],
            FunctionSpec::PowAbs { coeff, exponent, .. } => {
                if *exponent < 0.0 && *coeff != 0.0 {
                    vec![0.0]
                } else {
                    vec![]
                }
            }
            FunctionSpec::Capped { .. } => vec![],
            FunctionSpec::Excess { inner, .. } | FunctionSpec::Scaled { inner, .. } => {
                inner.singular_points()
            }
        }
    }

    /// True when `eval` can return infinity.
    pub fn has_singularity(&self) -> bool {
        !self.singular_points().is_empty()
    }
}

const GRADED_PANEL_RATIO: f64 = 0.5;
const GRADED_PANEL_FLOOR: f64 = 1e-18;

/// Integrate `g(x) f(x)` over the support of `f` with panels graded
/// geometrically into every breakpoint, so integrable singularities
/// (`|x|^e`, `e > -1`) converge without special casing.
pub fn integrate_against(
    f: &FunctionSpec,
    g: &dyn Fn(f64) -> f64,
    lo: f64,
    hi: f64,
) -> f64 {
    let (lo, hi) = match f.support() {
        Some((a, b)) => (a.max(lo), b.min(hi)),
        None => (lo, hi),
    };
    if hi <= lo {
        return 0.0;
    }
    let mut cuts: Vec<f64> = f
        .breakpoints()
        .into_iter()
        .filter(|c| *c > lo && *c < hi)
        .collect();
    cuts.push(lo);
    cuts.push(hi);
    cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    cuts.dedup();
    let singular = f.singular_points();
    let is_singular = |x: f64| singular.iter().any(|s| (s - x).abs() < 1e-300);

    let mut total = 0.0;
    for pair in cuts.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        let len = b - a;
        // grade geometric panels only into genuinely singular endpoints
        match (is_singular(a), is_singular(b)) {
            (false, false) => {
                total += simpson_adaptive(
                    &|x: f64| f.eval(x) * g(x),
                    a,
                    b,
                    1e-13 * len.max(1.0),
                );
            }
            (true, false) => total += graded_half(f, g, a, b, len, true),
            (false, true) => total += graded_half(f, g, a, b, len, false),
            (true, true) => {
                let mid = 0.5 * (a + b);
                total += graded_half(f, g, a, mid, len, true);
                total += graded_half(f, g, mid, b, len, false);
            }
        }
    }
    total
}

fn graded_half(
    f: &FunctionSpec,
    g: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    scale: f64,
    toward_left: bool,
) -> f64 {
    let integrand = |x: f64| {
        let v = f.eval(x);
        if v.is_finite() {
            v * g(x)
        } else {
            0.0
        }
    };
    let mut total = 0.0;
    let mut offset = b - a;
    // panels [offset/2, offset] shrinking toward the graded endpoint
    while offset > GRADED_PANEL_FLOOR * scale {
        let next = offset * GRADED_PANEL_RATIO;
        let (lo, hi) = if toward_left {
            (a + next, a + offset)
        } else {
            (b - offset, b - next)
        };
        total += simpson_adaptive(&integrand, lo, hi, 1e-13 * scale.max(1.0));
        offset = next;
    }
    total
}

/// Plain integral of `f` over `[lo, hi]`.
pub fn integrate(f: &FunctionSpec, lo: f64, hi: f64) -> f64 {
    integrate_against(f, &|_| 1.0, lo, hi)
}

/// Resolvent `R_alpha f (x) = int g_alpha(x, y) f(y) dy` for compactly
/// supported specs by graded quadrature (the kernel kink at `y = x` is an
/// extra cut). Constants pass through exactly: `alpha R_alpha 1 = 1`.
pub fn resolvent_1d(kernel: &ResolventKernel, f: &FunctionSpec, x: f64) -> f64 {
    debug_assert_eq!(kernel.dim(), 1);
    if let FunctionSpec::Const { value } = f {
        return value / kernel.alpha();
    }
    let support = f.support().expect("resolvent_1d needs compact support or a constant");
    let (lo, hi) = support;
    if x > lo && x < hi {
        integrate_against(f, &|y| kernel.eval_dist((x - y).abs()), lo, x)
            + integrate_against(f, &|y| kernel.eval_dist((x - y).abs()), x, hi)
    } else {
        integrate_against(f, &|y| kernel.eval_dist((x - y).abs()), lo, hi)
    }
}

/// Energy integral `I(f dx, g dx) = int int k(|x-y|) f(x) g(y) dx dy` for
/// compactly supported one-dimensional densities, by nested graded
/// quadrature. Slow but robust against integrable singularities; meant for
/// fixed-cost diagnostics, not inner loops.
pub fn energy_density_1d(kernel: &ResolventKernel, f: &FunctionSpec, g: &FunctionSpec) -> f64 {
    let potential = |x: f64| resolvent_1d(kernel, g, x);
    let (lo, hi) = f.support().expect("energy_density_1d needs compact support");
    integrate_against(f, &potential, lo, hi)
}
