//! JSON number formatting helpers. All emitted reals carry 17 significant
//! digits so that parsing recovers the exact f64 bit pattern.

/// Append `v` formatted with 17 significant digits.
pub fn push_f64(out: &mut String, v: f64) {
    use std::fmt::Write;
    if v.is_finite() {
        write!(out, "{v:.16e}").expect("string write");
    } else if v.is_infinite() && v > 0.0 {
        out.push_str("\"inf\"");
    } else if v.is_infinite() {
        out.push_str("\"-inf\"");
    } else {
        out.push_str("\"nan\"");
    }
}

/// Format `v` with 17 significant digits.
pub fn f64_str(v: f64) -> String {
    let mut s = String::new();
    push_f64(&mut s, v);
    s
}

/// Append a JSON array of reals.
pub fn push_f64_array(out: &mut String, values: &[f64]) {
    out.push('[');
    for (i, &v) in values.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        push_f64(out, v);
    }
    out.push(']');
}

/// Extract an `f64` array from a JSON value, accepting the "inf" markers
/// written by [`push_f64`].
pub fn f64_array(v: &serde_json::Value) -> Option<Vec<f64>> {
    let arr = v.as_array()?;
    let mut out = Vec::with_capacity(arr.len());
    for e in arr {
        out.push(f64_value(e)?);
    }
    Some(out)
}

/// Extract an `f64`, accepting the "inf"/"-inf"/"nan" markers.
pub fn f64_value(v: &serde_json::Value) -> Option<f64> {
    match v {
        serde_json::Value::Number(n) => n.as_f64(),
        serde_json::Value::String(s) => match s.as_str() {
            "inf" => Some(f64::INFINITY),
            "-inf" => Some(f64::NEG_INFINITY),
            "nan" => Some(f64::NAN),
            _ => None,
        },
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn seventeen_digits_round_trip(v in proptest::num::f64::NORMAL) {
            let s = f64_str(v);
            let back: f64 = s.parse().unwrap();
            prop_assert_eq!(back.to_bits(), v.to_bits());
        }
    }

    #[test]
    fn infinities_survive() {
        let doc = format!("[{}, {}]", f64_str(f64::INFINITY), f64_str(1.5));
        let v: serde_json::Value = serde_json::from_str(&doc).unwrap();
        let arr = f64_array(&v).unwrap();
        assert!(arr[0].is_infinite());
        assert_eq!(arr[1], 1.5);
    }
}
