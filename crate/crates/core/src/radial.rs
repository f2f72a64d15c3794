//! Radial densities on `R^d` with exactly integrable building blocks.
//!
//! A [`RadialDensity`] is a finite sum of explicit radial pieces plus
//! optional infinite shell families (thin annuli indexed by an integer).
//! Integrals of `f^p` over annuli reduce to closed forms per piece and to
//! classified series over shells, so every norm the condition checkers need
//! is computed without uncertain quadrature: a tail is either summed with a
//! p-series remainder estimate or reported divergent by exponent comparison.

use serde::{Deserialize, Serialize};

/// Unit-sphere surface area `c_d = 2 pi^{d/2} / Gamma(d/2)`.
pub fn sphere_area(d: u32) -> f64 {
    assert!(d >= 1, "dimension must be at least 1");
    let half = d as f64 / 2.0;
    2.0 * std::f64::consts::PI.powf(half) / gamma_half(d)
}

/// Volume of the unit ball `v_d = c_d / d`.
pub fn ball_volume(d: u32) -> f64 {
    sphere_area(d) / d as f64
}

/// Lebesgue volume of the annulus `{lo <= |x| <= hi}`.
pub fn annulus_volume(d: u32, lo: f64, hi: f64) -> f64 {
    if hi <= lo {
        return 0.0;
    }
    if hi.is_infinite() {
        return f64::INFINITY;
    }
    ball_volume(d) * (hi.powi(d as i32) - lo.powi(d as i32))
}

// Gamma(d/2) for integer d >= 1, peeled down to Gamma(1) or Gamma(1/2).
fn gamma_half(d: u32) -> f64 {
    let mut x = d as f64 / 2.0;
    let mut acc = 1.0;
    while x > 1.25 {
        x -= 1.0;
        acc *= x;
    }
    if (x - 1.0).abs() < 1e-12 {
        acc
    } else {
        acc * std::f64::consts::PI.sqrt()
    }
}

/// `(x + w)^q - x^q`, stable for `w << x`.
pub fn pow_diff(x: f64, w: f64, q: f64) -> f64 {
    if x == 0.0 {
        return w.powf(q);
    }
    x.powf(q) * (q * (w / x).ln_1p()).exp_m1()
}

/// Value of a possibly infinite integral. `truncated` marks values whose
/// series tail was estimated rather than bounded in closed form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Integral {
    Finite { value: f64, truncated: bool },
    Divergent,
}

impl Integral {
    pub fn exact(value: f64) -> Self {
        Integral::Finite { value, truncated: false }
    }

    pub fn value(&self) -> Option<f64> {
        match self {
            Integral::Finite { value, .. } => Some(*value),
            Integral::Divergent => None,
        }
    }

    pub fn is_divergent(&self) -> bool {
        matches!(self, Integral::Divergent)
    }

    pub fn is_truncated(&self) -> bool {
        matches!(self, Integral::Finite { truncated: true, .. })
    }

    fn add(self, other: Integral) -> Integral {
        match (self, other) {
            (Integral::Divergent, _) | (_, Integral::Divergent) => Integral::Divergent,
            (
                Integral::Finite { value: a, truncated: ta },
                Integral::Finite { value: b, truncated: tb },
            ) => Integral::Finite { value: a + b, truncated: ta || tb },
        }
    }

    /// Map a finite value, keeping flags.
    pub fn map(self, f: impl FnOnce(f64) -> f64) -> Integral {
        match self {
            Integral::Finite { value, truncated } => {
                Integral::Finite { value: f(value), truncated }
            }
            Integral::Divergent => Integral::Divergent,
        }
    }
}

/// Pointwise profile of a radial piece.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum RadialProfile {
    /// `coeff * r^exponent`
    Pow { coeff: f64, exponent: f64 },
    /// `r^exponent * |ln r|^log_power`; pieces must stay inside `(0, 1)`.
    PowLog { exponent: f64, log_power: f64 },
}

impl RadialProfile {
    fn eval(&self, r: f64) -> f64 {
        match *self {
            RadialProfile::Pow { coeff, exponent } => coeff * r.powf(exponent),
            RadialProfile::PowLog { exponent, log_power } => {
                r.powf(exponent) * r.ln().abs().powf(log_power)
            }
        }
    }
}

/// One radial piece: `profile(r)` on `r_lo <= r < r_hi` (zero elsewhere).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialPiece {
    pub r_lo: f64,
    pub r_hi: f64,
    pub profile: RadialProfile,
}

/// Infinite families of thin shells with closed-form per-shell integrals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ShellFamily {
    /// Shells accumulating at the origin: on
    /// `{(1/j)^{1/d} < r <= (1/j + j^{-2a-2})^{1/d}}` the value is `r^{-d a}`,
    /// for `j >= 2`.
    SpikeInner { a: f64 },
    /// Shells escaping to infinity: on
    /// `{(j - j^{-2b-2})^{1/d} < r <= j^{1/d}}` the value is `r^{d b}`,
    /// for `j >= 2`.
    SpikeOuter { b: f64 },
    /// On `{j <= r < j+1}` the value is `r^{-d + 1/ln(j+1)}`, for `j >= 1`.
    LogTail,
    /// On `{(2k-1)^{1/d} < r <= (2k-1 + (2k-1)^{-3})^{1/d}}` the value is
    /// `r^d`, for `k >= 1`.
    ParityOdd,
    /// On `{(2k)^{1/d} < r <= (2k + (2k)^{-delta ln(2k+2)})^{1/d}}` the value
    /// is `r^{-d}`, for `k >= 1`.
    ParityEven { delta: f64 },
}

/// Shell index range start.
fn family_start(f: &ShellFamily) -> u64 {
    match f {
        ShellFamily::SpikeInner { .. } | ShellFamily::SpikeOuter { .. } => 2,
        _ => 1,
    }
}

/// How the series of per-shell integrals behaves for large indices.
enum TailDecay {
    /// Terms behave like `j^theta` up to bounded factors.
    Power(f64),
    /// Terms decay faster than any power.
    SuperPower,
}

impl ShellFamily {
    /// Shell of index `j` in dimension `d`, as an explicit radial piece.
    pub fn shell(&self, j: u64, d: u32) -> RadialPiece {
        let df = d as f64;
        let jf = j as f64;
        match *self {
            ShellFamily::SpikeInner { a } => {
                let u_lo = 1.0 / jf;
                let u_hi = u_lo + jf.powf(-2.0 * a - 2.0);
                RadialPiece {
                    r_lo: u_lo.powf(1.0 / df),
                    r_hi: u_hi.powf(1.0 / df),
                    profile: RadialProfile::Pow { coeff: 1.0, exponent: -df * a },
                }
            }
            ShellFamily::SpikeOuter { b } => {
                let u_hi = jf;
                let u_lo = jf - jf.powf(-2.0 * b - 2.0);
                RadialPiece {
                    r_lo: u_lo.powf(1.0 / df),
                    r_hi: u_hi.powf(1.0 / df),
                    profile: RadialProfile::Pow { coeff: 1.0, exponent: df * b },
                }
            }
            ShellFamily::LogTail => RadialPiece {
                r_lo: jf,
                r_hi: jf + 1.0,
                profile: RadialProfile::Pow {
                    coeff: 1.0,
                    exponent: -df + 1.0 / (jf + 1.0).ln(),
                },
            },
            ShellFamily::ParityOdd => {
                let u_lo = 2.0 * jf - 1.0;
                let u_hi = u_lo + u_lo.powf(-3.0);
                RadialPiece {
                    r_lo: u_lo.powf(1.0 / df),
                    r_hi: u_hi.powf(1.0 / df),
                    profile: RadialProfile::Pow { coeff: 1.0, exponent: df },
                }
            }
            ShellFamily::ParityEven { delta } => {
                let u_lo = 2.0 * jf;
                let u_hi = u_lo + u_lo.powf(-delta * (2.0 * jf + 2.0).ln());
                RadialPiece {
                    r_lo: u_lo.powf(1.0 / df),
                    r_hi: u_hi.powf(1.0 / df),
                    profile: RadialProfile::Pow { coeff: 1.0, exponent: -df },
                }
            }
        }
    }

    /// True when shell radii decrease with the index (accumulation at 0).
    fn descends(&self) -> bool {
        matches!(self, ShellFamily::SpikeInner { .. })
    }

    /// First index whose shell can intersect a window starting (ascending
    /// families) or ending (descending families) at the given radius.
    fn first_relevant_index(&self, d: u32, window_lo: f64, window_hi: f64) -> u64 {
        let start = family_start(self);
        let guess = match self {
            ShellFamily::SpikeInner { .. } => {
                if window_hi.is_infinite() {
                    return start;
                }
                (1.0 / window_hi.powi(d as i32)).floor()
            }
            ShellFamily::SpikeOuter { .. } => window_lo.powi(d as i32).floor(),
            ShellFamily::LogTail => window_lo.floor(),
            ShellFamily::ParityOdd | ShellFamily::ParityEven { .. } => {
                (window_lo.powi(d as i32) / 2.0).floor()
            }
        };
        if !guess.is_finite() || guess < start as f64 + 2.0 {
            start
        } else {
            guess as u64 - 2
        }
    }

    fn tail_decay(&self, p: f64, d: u32) -> TailDecay {
        match *self {
            ShellFamily::SpikeInner { a } => TailDecay::Power(a * p - 2.0 * a - 2.0),
            ShellFamily::SpikeOuter { b } => TailDecay::Power(b * p - 2.0 * b - 2.0),
            // exponent over [j, j+1): d-1 - d p + p/ln(j+1); the last term
            // only contributes a bounded factor
            ShellFamily::LogTail => TailDecay::Power(d as f64 - 1.0 - d as f64 * p),
            ShellFamily::ParityOdd => TailDecay::Power(p - 3.0),
            ShellFamily::ParityEven { .. } => TailDecay::SuperPower,
        }
    }
}

/// A nonnegative radial density: explicit pieces plus shell families, all
/// disjoint in radius by construction of the callers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialDensity {
    pub dim: u32,
    pub pieces: Vec<RadialPiece>,
    pub shells: Vec<ShellFamily>,
}

impl RadialDensity {
    pub fn new(dim: u32) -> Self {
        Self { dim, pieces: Vec::new(), shells: Vec::new() }
    }

    /// Pure power `r^{-beta}` on all of `R^d`.
    pub fn power(dim: u32, beta: f64) -> Self {
        Self {
            dim,
            pieces: vec![RadialPiece {
                r_lo: 0.0,
                r_hi: f64::INFINITY,
                profile: RadialProfile::Pow { coeff: 1.0, exponent: -beta },
            }],
            shells: Vec::new(),
        }
    }

    pub fn with_piece(mut self, piece: RadialPiece) -> Self {
        self.pieces.push(piece);
        self
    }

    pub fn with_shells(mut self, family: ShellFamily) -> Self {
        self.shells.push(family);
        self
    }

    /// True when the density is unbounded toward the origin (a negative
    /// power or log blowup on a piece touching 0, or inner spike shells).
    pub fn singular_at_zero(&self) -> bool {
        let piece_singular = self.pieces.iter().any(|p| {
            p.r_lo == 0.0
                && match p.profile {
                    RadialProfile::Pow { coeff, exponent } => coeff != 0.0 && exponent < 0.0,
                    RadialProfile::PowLog { exponent, .. } => exponent < 0.0,
                }
        });
        piece_singular || self.shells.iter().any(|s| matches!(s, ShellFamily::SpikeInner { .. }))
    }

    /// Pointwise value at radius `r > 0`.
    pub fn eval(&self, r: f64) -> f64 {
        let mut acc = 0.0;
        for piece in &self.pieces {
            if r >= piece.r_lo && r < piece.r_hi {
                acc += piece.profile.eval(r);
            }
        }
        for family in &self.shells {
            acc += self.eval_family(family, r);
        }
        acc
    }

    fn eval_family(&self, family: &ShellFamily, r: f64) -> f64 {
        let d = self.dim;
        let u = r.powi(d as i32);
        // candidate indices bracketing radius r
        let candidates: [i64; 3] = match family {
            ShellFamily::SpikeInner { .. } => {
                let j = (1.0 / u).floor() as i64;
                [j - 1, j, j + 1]
            }
            ShellFamily::SpikeOuter { .. } => {
                let j = u.ceil() as i64;
                [j - 1, j, j + 1]
            }
            ShellFamily::LogTail => {
                let j = r.floor() as i64;
                [j, j, j]
            }
            ShellFamily::ParityOdd => {
                let k = ((u + 1.0) / 2.0).floor() as i64;
                [k - 1, k, k + 1]
            }
            ShellFamily::ParityEven { .. } => {
                let k = (u / 2.0).floor() as i64;
                [k - 1, k, k + 1]
            }
        };
        for &c in &candidates {
            if c >= family_start(family) as i64 {
                let piece = family.shell(c as u64, d);
                if r >= piece.r_lo && r < piece.r_hi {
                    return piece.profile.eval(r);
                }
            }
        }
        0.0
    }

    /// `int_{lo <= |x| <= hi} f(x)^p dx`, i.e. the radial integral
    /// `c_d int r^{d-1} f(r)^p dr`, with divergence detection on both ends.
    pub fn power_integral(&self, p: f64, lo: f64, hi: f64) -> Integral {
        assert!(p > 0.0, "exponent must be positive");
        let mut total = Integral::exact(0.0);
        for piece in &self.pieces {
            total = total.add(piece_power_integral(self.dim, piece, p, lo, hi));
            if total.is_divergent() {
                return total;
            }
        }
        for family in &self.shells {
            total = total.add(self.family_power_integral(family, p, lo, hi));
            if total.is_divergent() {
                return total;
            }
        }
        total
    }

    /// `L^p` norm over the annulus: `power_integral(...)^{1/p}`.
    pub fn lp_norm(&self, p: f64, lo: f64, hi: f64) -> Integral {
        self.power_integral(p, lo, hi).map(|v| v.powf(1.0 / p))
    }

    fn family_power_integral(&self, family: &ShellFamily, p: f64, lo: f64, hi: f64) -> Integral {
        const MAX_TERMS: u64 = 4000;
        let d = self.dim;
        let descends = family.descends();

        let mut sum = 0.0;
        let mut terms = 0u64;
        let mut j = family.first_relevant_index(d, lo, hi);
        let mut last_term = 0.0;
        loop {
            let shell = family.shell(j, d);
            let clip_lo = shell.r_lo.max(lo);
            let clip_hi = shell.r_hi.min(hi);
            let before_window = if descends { shell.r_lo >= hi } else { shell.r_hi <= lo };
            let past_window = if descends { shell.r_hi <= lo } else { shell.r_lo >= hi };
            if past_window {
                // shells are monotone in the index, nothing further intersects
                return Integral::Finite { value: sum, truncated: false };
            }
            if !before_window {
                // zero-width shells (underflowed widths) count as processed
                let term = if clip_hi > clip_lo {
                    match piece_power_integral(d, &shell, p, clip_lo, clip_hi) {
                        Integral::Finite { value, .. } => value,
                        Integral::Divergent => return Integral::Divergent,
                    }
                } else {
                    0.0
                };
                sum += term;
                last_term = term;
                terms += 1;

                // fast exit for super-decaying series once terms vanish
                if terms > 16
                    && matches!(family.tail_decay(p, d), TailDecay::SuperPower)
                    && last_term < 1e-16 * sum.max(1e-300)
                {
                    return Integral::Finite { value: sum, truncated: false };
                }
            }
            j += 1;
            if terms >= MAX_TERMS {
                // The remaining shells sit entirely inside the window
                // (windows that truncate the series this deep extend to the
                // family's accumulation end); close the series by its decay
                // class.
                return match family.tail_decay(p, d) {
                    TailDecay::Power(theta) if theta >= -1.0 => Integral::Divergent,
                    TailDecay::Power(theta) => {
                        let jf = (j - 1) as f64;
                        // integral-test estimate: sum_{k>J} C k^theta with
                        // C = term(J) / J^theta
                        let tail = last_term * jf / (-1.0 - theta);
                        Integral::Finite { value: sum + tail, truncated: true }
                    }
                    TailDecay::SuperPower => Integral::Finite { value: sum, truncated: true },
                };
            }
        }
    }
}

/// Closed-form `c_d int_{max(lo, piece.lo)}^{min(hi, piece.hi)} r^{d-1}
/// profile(r)^p dr` with endpoint divergence detection.
fn piece_power_integral(d: u32, piece: &RadialPiece, p: f64, lo: f64, hi: f64) -> Integral {
    let a = piece.r_lo.max(lo);
    let b = piece.r_hi.min(hi);
    if b <= a {
        return Integral::exact(0.0);
    }
    let cd = sphere_area(d);
    match piece.profile {
        RadialProfile::Pow { coeff, exponent } => {
            // integrand: coeff^p * r^s with s = p*exponent + d - 1
            let s = p * exponent + d as f64 - 1.0;
            let scale = cd * coeff.powf(p);
            power_primitive(a, b, s).map(|v| scale * v)
        }
        RadialProfile::PowLog { exponent, log_power } => {
            // substitute t = -ln r on (0, 1): integral of
            // e^{-sigma t} t^{q} dt with sigma = p*exponent + d, q = p*log_power
            debug_assert!(b <= 1.0, "PowLog pieces must stay inside (0,1)");
            let sigma = p * exponent + d as f64;
            let q = p * log_power;
            let t_hi = if a == 0.0 { f64::INFINITY } else { -a.ln() };
            let t_lo = -b.ln();
            exp_poly_integral(t_lo, t_hi, sigma, q).map(|v| cd * v)
        }
    }
}

/// `int_a^b r^s dr` with divergence at the endpoints 0 and infinity.
fn power_primitive(a: f64, b: f64, s: f64) -> Integral {
    if (s - -1.0).abs() < 1e-14 {
        if a == 0.0 || b.is_infinite() {
            return Integral::Divergent;
        }
        return Integral::exact((b / a).ln());
    }
    let q = s + 1.0;
    if b.is_infinite() {
        if q >= 0.0 {
            return Integral::Divergent;
        }
        return Integral::exact(-a.powf(q) / q);
    }
    if a == 0.0 {
        if q <= 0.0 {
            return Integral::Divergent;
        }
        return Integral::exact(b.powf(q) / q);
    }
    Integral::exact(pow_diff(a, b - a, q) / q)
}

/// `int_{t_lo}^{t_hi} e^{-sigma t} t^q dt` for `t_lo >= 0` (possibly
/// unbounded above). Closed forms where available, adaptive Simpson else.
fn exp_poly_integral(t_lo: f64, t_hi: f64, sigma: f64, q: f64) -> Integral {
    if t_hi <= t_lo {
        return Integral::exact(0.0);
    }
    if sigma.abs() < 1e-14 {
        // pure power in t
        return power_primitive(t_lo, t_hi, q);
    }
    if sigma < 0.0 {
        if t_hi.is_infinite() {
            return Integral::Divergent;
        }
        return Integral::exact(simpson_adaptive(
            &|t: f64| (-sigma * t).exp() * t.powf(q),
            t_lo,
            t_hi,
            1e-12,
        ));
    }
    // sigma > 0: truncate where the integrand mass is exhausted
    let cut = if t_hi.is_infinite() {
        let mut c = (t_lo.max(1.0)) * 2.0;
        while (-sigma * c).exp() * c.powf(q.max(0.0)) > 1e-18 {
            c *= 2.0;
        }
        c
    } else {
        t_hi
    };
    if q >= 0.0 || t_lo > 0.0 {
        return Integral::exact(simpson_adaptive(
            &|t: f64| (-sigma * t).exp() * t.powf(q),
            t_lo,
            cut,
            1e-12,
        ));
    }
    // q < 0 with t_lo == 0: integrable iff q > -1
    if q <= -1.0 {
        return Integral::Divergent;
    }
    // split off the singular head where e^{-sigma t} ~ 1
    let head_end = (1e-4 / sigma).min(cut);
    let head = head_end.powf(q + 1.0) / (q + 1.0); // e^{-sigma t} ~ 1 up to O(sigma*head_end)
    let body = simpson_adaptive(&|t: f64| (-sigma * t).exp() * t.powf(q), head_end, cut, 1e-12);
    Integral::Finite { value: head + body, truncated: false }
}

/// Adaptive Simpson quadrature on a finite interval with a smooth integrand.
pub fn simpson_adaptive(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson(a: f64, fa: f64, b: f64, fb: f64, fm: f64) -> f64 {
        (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    }
    fn recurse(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        fa: f64,
        b: f64,
        fb: f64,
        fm: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = simpson(a, fa, m, fm, flm);
        let right = simpson(m, fm, b, fb, frm);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            left + right + delta / 15.0
        } else {
            recurse(f, a, fa, m, fm, flm, left, tol / 2.0, depth - 1)
                + recurse(f, m, fm, b, fb, frm, right, tol / 2.0, depth - 1)
        }
    }
    if b <= a {
        return 0.0;
    }
    let fa = f(a);
    let fb = f(b);
    let fm = f(0.5 * (a + b));
    let whole = simpson(a, fa, b, fb, fm);
    recurse(f, a, fa, b, fb, fm, whole, tol, 48)
}

/// Parse the compact density spec
/// `{"expr": "pow", "beta": b}` or `{"expr": "table", "r": [...], "v": [...]}`.
pub fn radial_from_spec(dim: u32, spec: &serde_json::Value) -> Result<RadialDensity, String> {
    match spec["expr"].as_str() {
        Some("pow") => {
            let beta = spec["beta"].as_f64().ok_or("pow spec needs numeric \"beta\"")?;
            Ok(RadialDensity::power(dim, beta))
        }
        Some("table") => {
            let r = crate::jsonfmt::f64_array(&spec["r"]).ok_or("table spec needs \"r\" array")?;
            let v = crate::jsonfmt::f64_array(&spec["v"]).ok_or("table spec needs \"v\" array")?;
            if r.len() != v.len() + 1 {
                return Err("table spec needs |r| = |v| + 1 boundaries".into());
            }
            let mut density = RadialDensity::new(dim);
            for (i, &value) in v.iter().enumerate() {
                if value < 0.0 {
                    return Err(format!("table value {i} is negative"));
                }
                if r[i + 1] <= r[i] {
                    return Err("table radii must be strictly increasing".into());
                }
                density.pieces.push(RadialPiece {
                    r_lo: r[i],
                    r_hi: r[i + 1],
                    profile: RadialProfile::Pow { coeff: value, exponent: 0.0 },
                });
            }
            Ok(density)
        }
        _ => Err("radial spec needs \"expr\": \"pow\" | \"table\"".into()),
    }
}
