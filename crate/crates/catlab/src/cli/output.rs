//! Deterministic text output: fixed float formatting shared by the CSV and
//! JSON writers so identical configs produce byte-identical files.

/// 12 significant digits, '.' decimal separator, scientific notation for
/// |x| ≥ 1e6 or |x| < 1e−4. Zero prints as "0".
pub fn format_float(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if x.is_nan() {
        return "nan".to_string();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.to_string();
    }
    let a = x.abs();
    if !(1e-4..1e6).contains(&a) {
        format!("{x:.11e}")
    } else {
        let decimals = 11 - a.log10().floor() as i32;
        format!("{x:.*}", decimals.clamp(0, 17) as usize)
    }
}

/// Minimal JSON document model with insertion-ordered objects; numbers are
/// rendered through [`format_float`], keeping one formatting contract for
/// every output format.
#[derive(Clone, Debug)]
pub enum Json {
    Null,
    Bool(bool),
    Int(i64),
    Num(f64),
    Str(String),
    Arr(Vec<Json>),
    Obj(Vec<(String, Json)>),
}

impl Json {
    pub fn str(s: impl Into<String>) -> Json {
        Json::Str(s.into())
    }

    pub fn opt_num(v: Option<f64>) -> Json {
        match v {
            Some(x) if x.is_finite() => Json::Num(x),
            _ => Json::Null,
        }
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        self.write(&mut out, 0);
        out
    }

    fn write(&self, out: &mut String, depth: usize) {
        match self {
            Json::Null => out.push_str("null"),
            Json::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
            Json::Int(i) => out.push_str(&i.to_string()),
            Json::Num(x) => {
                if x.is_finite() {
                    out.push_str(&json_number(*x));
                } else {
                    out.push_str("null");
                }
            }
            Json::Str(s) => write_escaped(out, s),
            Json::Arr(items) => {
                if items.is_empty() {
                    out.push_str("[]");
                    return;
                }
                out.push('[');
                for (i, item) in items.iter().enumerate() {
                    if i > 0 {
                        out.push(',');
                    }
                    item.write(out, depth + 1);
                }
                out.push(']');
            }
            Json::Obj(entries) => {
                if entries.is_empty() {
                    out.push_str("{}");
                    return;
                }
                out.push('{');
                for (i, (key, value)) in entries.iter().enumerate() {
                    if i > 0 {
                        out.push(',');
                    }
                    write_escaped(out, key);
                    out.push(':');
                    value.write(out, depth + 1);
                }
                out.push('}');
            }
        }
    }
}

/// A bare "0" or "1.2e3" is a valid JSON number; "inf"/"nan" are not and are
/// excluded by the caller.
fn json_number(x: f64) -> String {
    format_float(x)
}

fn write_escaped(out: &mut String, s: &str) {
    out.push('"');
    for ch in s.chars() {
        match ch {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c if (c as u32) < 0x20 => {
                out.push_str(&format!("\\u{:04x}", c as u32));
            }
            c => out.push(c),
        }
    }
    out.push('"');
}

/// CSV cell for an optional value; undefined witnesses become empty cells.
pub fn csv_cell(v: Option<f64>) -> String {
    v.map(format_float).unwrap_or_default()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_formatting_contract() {
        assert_eq!(format_float(0.0), "0");
        assert_eq!(format_float(-0.0), "0");
        assert_eq!(format_float(1.0), "1.00000000000");
        assert_eq!(format_float(-2.5), "-2.50000000000");
        assert_eq!(format_float(0.25), "0.250000000000");
        // boundaries of the scientific switch
        assert!(format_float(1e6).contains('e'));
        assert!(!format_float(999999.0).contains('e'));
        assert!(format_float(9.9e-5).contains('e'));
        assert!(!format_float(1.1e-4).contains('e'));
        // 12 significant digits survive a round trip
        let s = format_float(std::f64::consts::PI);
        assert_eq!(s, "3.14159265359");
    }

    #[test]
    fn json_rendering_is_plain_and_ordered() {
        let doc = Json::Obj(vec![
            ("b".into(), Json::Int(2)),
            ("a".into(), Json::Arr(vec![Json::Null, Json::Num(0.5)])),
            ("s".into(), Json::str("x\"y\n")),
        ]);
        assert_eq!(doc.render(), "{\"b\":2,\"a\":[null,0.500000000000],\"s\":\"x\\\"y\\n\"}");
    }
}
