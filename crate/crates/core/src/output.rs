//! Text formatting shared by the CLI and the report writers.
//!
//! Every float is printed with 17 significant digits in scientific notation,
//! which round-trips any `f64` exactly and keeps golden files stable.

use std::io;

use serde::Serialize;
use serde_json::ser::{Formatter, Serializer};

/// `x` with 17 significant digits, e.g. `-1.2500000000000000e-1`.
pub fn float(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

/// Compact JSON formatter that writes floats through [`float`].
#[derive(Debug, Default, Clone, Copy)]
pub struct FloatFormatter;

impl Formatter for FloatFormatter {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        writer.write_all(float(value).as_bytes())
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, f64::from(value))
    }
}

/// Serializes `value` as a single JSON line with 17-digit floats. Non-finite
/// floats become `null`.
pub fn to_json<T: Serialize + ?Sized>(value: &T) -> serde_json::Result<String> {
    let mut bytes = Vec::new();
    let mut ser = Serializer::with_formatter(&mut bytes, FloatFormatter);
    value.serialize(&mut ser)?;
    Ok(String::from_utf8(bytes).expect("serde_json emits UTF-8"))
}

#[cfg(test)]
mod tests {
    use serde_json::json;

    use super::*;

    #[test]
    fn seventeen_digits() {
        assert_eq!(float(0.125), "1.2500000000000000e-1");
        assert_eq!(float(-3.0), "-3.0000000000000000e0");
        assert_eq!(float(0.1).parse::<f64>().unwrap(), 0.1);
        assert_eq!(float(f64::NAN), "NaN");
    }

    #[test]
    fn round_trip() {
        for x in [1.0 / 3.0, 28.0 / 27.0, f64::MIN_POSITIVE, 1e300, -2.5e-17] {
            assert_eq!(float(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn json_floats_parse_back() {
        let text = to_json(&json!({"mu": 1.0 / 3.0, "k": 3, "v": [0.5, -1.0]})).unwrap();
        assert_eq!(text, r#"{"k":3,"mu":3.3333333333333331e-1,"v":[5.0000000000000000e-1,-1.0000000000000000e0]}"#);
        let back: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(back["mu"].as_f64().unwrap(), 1.0 / 3.0);
        assert_eq!(to_json(&json!({"x": f64::NAN})).unwrap(), r#"{"x":null}"#);
    }
}
