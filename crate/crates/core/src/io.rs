//! Report writers: fixed-precision numbers, JSON with sorted keys, RFC-4180
//! CSV and triangle-soup OBJ.

use std::fs;
use std::path::Path;

use serde::Serialize;
use serde_json::Value;

use crate::error::{LabError, Result};
use crate::nodal::Triangle;

/// Shortest decimal form of `v` rounded to 9 significant digits.
pub fn fmt_sig(v: f64) -> String {
    if v == 0.0 || !v.is_finite() {
        return if v.is_nan() {
            "NaN".into()
        } else if v.is_infinite() {
            if v > 0.0 { "inf".into() } else { "-inf".into() }
        } else {
            "0".into()
        };
    }
    let sci = format!("{v:.8e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-6..=15).contains(&exp) {
        let m = mantissa.trim_end_matches('0').trim_end_matches('.');
        return format!("{m}e{exp}");
    }
    let rounded: f64 = sci.parse().expect("round trip");
    let decimals = (8 - exp).max(0) as usize;
    let s = format!("{rounded:.decimals$}");
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

/// JSON text with object keys sorted at every level.
pub fn to_json_string<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let v: Value = serde_json::to_value(value)?;
    let mut s = serde_json::to_string_pretty(&v)?;
    s.push('\n');
    Ok(s)
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    fs::write(path, to_json_string(value)?).map_err(|e| LabError::Io(format!("{}: {e}", path.display())))
}

/// One header row from the field names, then one record per row.
pub fn to_csv_string<T: Serialize>(rows: &[T]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| LabError::Io(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| LabError::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| LabError::Io(e.to_string()))
}

pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    fs::write(path, to_csv_string(rows)?).map_err(|e| LabError::Io(format!("{}: {e}", path.display())))
}

/// Triangle soup: three fresh vertices per face.
pub fn to_obj_string(triangles: &[Triangle]) -> String {
    let mut s = String::from("# nodal set\n");
    for t in triangles {
        for p in t {
            s.push_str(&format!("v {} {} {}\n", fmt_sig(p[0]), fmt_sig(p[1]), fmt_sig(p[2])));
        }
    }
    for i in 0..triangles.len() {
        s.push_str(&format!("f {} {} {}\n", 3 * i + 1, 3 * i + 2, 3 * i + 3));
    }
    s
}

/// Drops every object key in `keys`, recursively. Used to compare reports
/// modulo timing fields.
pub fn strip_keys(v: &mut Value, keys: &[&str]) {
    match v {
        Value::Object(m) => {
            for k in keys {
                m.remove(*k);
            }
            for x in m.values_mut() {
                strip_keys(x, keys);
            }
        }
        Value::Array(a) => {
            for x in a {
                strip_keys(x, keys);
            }
        }
        _ => {}
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn significant_digits() {
        assert_eq!(fmt_sig(0.0), "0");
        assert_eq!(fmt_sig(1.0), "1");
        assert_eq!(fmt_sig(-0.5), "-0.5");
        assert_eq!(fmt_sig(std::f64::consts::PI), "3.14159265");
        assert_eq!(fmt_sig(123456.789012), "123456.789");
        assert_eq!(fmt_sig(0.1 + 0.2), "0.3");
        assert_eq!(fmt_sig(1.5e-9), "1.5e-9");
        assert_eq!(fmt_sig(2.0e20), "2e20");
        assert_eq!(fmt_sig(999999999.6), "1000000000");
    }

    #[test]
    fn json_keys_sorted() {
        #[derive(Serialize)]
        struct S {
            zeta: u8,
            alpha: u8,
        }
        let s = to_json_string(&S { zeta: 1, alpha: 2 }).unwrap();
        assert!(s.find("alpha").unwrap() < s.find("zeta").unwrap());
    }

    #[test]
    fn csv_quotes_fields() {
        #[derive(Serialize)]
        struct R {
            name: String,
            x: f64,
        }
        let s = to_csv_string(&[R { name: "a,b".into(), x: 1.5 }]).unwrap();
        assert_eq!(s, "name,x\n\"a,b\",1.5\n");
    }

    #[test]
    fn strip_nested_keys() {
        let mut v = serde_json::json!({"a": 1, "elapsed_ms": 3, "b": [{"elapsed_ms": 4, "c": 5}]});
        strip_keys(&mut v, &["elapsed_ms"]);
        assert_eq!(v, serde_json::json!({"a": 1, "b": [{"c": 5}]}));
    }
}
