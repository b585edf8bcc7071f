//! Output rendering. JSON is pretty-printed with keys in a fixed order, so a
//! fixed configuration gives byte-identical output.

use serde_json::Value;

use crate::Output;

pub fn render(value: &Value, tsv: Option<&str>, output: Output) -> Result<String, String> {
    match output {
        Output::Json => Ok(serde_json::to_string_pretty(value).expect("JSON values serialize") + "\n"),
        Output::Tsv => tsv
            .map(str::to_string)
            .ok_or_else(|| "tsv output is only available for traces (entropy)".into()),
        Output::Text => {
            let mut out = String::new();
            text(value, "", &mut out);
            Ok(out)
        }
    }
}

fn scalar(v: &Value) -> Option<String> {
    match v {
        Value::Null => Some("-".into()),
        Value::Bool(b) => Some(b.to_string()),
        Value::Number(n) => Some(n.to_string()),
        Value::String(s) => Some(s.clone()),
        Value::Array(a) if a.iter().all(|x| !x.is_array() && !x.is_object()) => Some(format!(
            "[{}]",
            a.iter()
                .map(|x| scalar(x).unwrap_or_default())
                .collect::<Vec<_>>()
                .join(", ")
        )),
        _ => None,
    }
}

/// `key: value` lines, nested objects indented, rows of matrices on their own lines.
fn text(v: &Value, indent: &str, out: &mut String) {
    match v {
        Value::Object(map) => {
            for (k, x) in map {
                match scalar(x) {
                    Some(s) => out.push_str(&format!("{indent}{k}: {s}\n")),
                    None => {
                        out.push_str(&format!("{indent}{k}:\n"));
                        text(x, &format!("{indent}  "), out);
                    }
                }
            }
        }
        Value::Array(items) => {
            for x in items {
                match scalar(x) {
                    Some(s) => out.push_str(&format!("{indent}{s}\n")),
                    None => {
                        out.push_str(&format!("{indent}-\n"));
                        text(x, &format!("{indent}  "), out);
                    }
                }
            }
        }
        other => out.push_str(&format!("{indent}{}\n", scalar(other).unwrap_or_default())),
    }
}
