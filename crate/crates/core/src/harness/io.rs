use std::io::{Read, Write};

use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};

use super::experiment::{ExperimentResult, RngInfo};

pub const CSV_DIGITS: usize = 6;
pub const JSON_DIGITS: usize = 12;

/// `x` rounded to `digits` significant digits.
pub fn round_sig(x: f64, digits: usize) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{:.*e}", digits.saturating_sub(1), x)
        .parse()
        .unwrap_or(x)
}

/// `x` with exactly `digits` significant digits, trailing zeros kept.
/// Very small or large magnitudes switch to scientific notation.
pub fn fmt_sig(x: f64, digits: usize) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{:.*e}", digits.saturating_sub(1), x);
    let exp: i32 = sci[sci.find('e').expect("exponent") + 1..].parse().expect("integer exponent");
    if (-4..15).contains(&exp) {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        format!("{x:.decimals$}")
    } else {
        sci
    }
}

/// Rounds every float inside `v` to `digits` significant digits.
pub fn round_json(v: Value, digits: usize) -> Value {
    match v {
        Value::Number(num) if num.is_f64() => {
            let x = num.as_f64().unwrap_or(f64::NAN);
            json!(round_sig(x, digits))
        }
        Value::Array(items) => Value::Array(items.into_iter().map(|x| round_json(x, digits)).collect()),
        Value::Object(map) => Value::Object(
            map.into_iter()
                .map(|(k, x)| (k, round_json(x, digits)))
                .collect(),
        ),
        other => other,
    }
}

/// Pretty JSON of `value` with floats at [`JSON_DIGITS`].
pub fn to_json_string<T: Serialize>(value: &T) -> Result<String> {
    let v = round_json(serde_json::to_value(value)?, JSON_DIGITS);
    Ok(serde_json::to_string_pretty(&v)? + "\n")
}

/// Writes a `T x n` loss matrix under a `loss_1..loss_n` header. Values
/// keep full precision so an import reproduces the run exactly.
pub fn write_loss_csv<W: Write>(out: W, losses: &[Vec<f64>]) -> Result<()> {
    let n = losses.first().map(Vec::len).unwrap_or(0);
    let mut w = csv::Writer::from_writer(out);
    w.write_record((1..=n).map(|i| format!("loss_{i}")))?;
    for row in losses {
        w.write_record(row.iter().map(|x| format!("{x:?}")))?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_loss_csv<R: Read>(input: R) -> Result<Vec<Vec<f64>>> {
    let mut r = csv::Reader::from_reader(input);
    let headers = r.headers()?.clone();
    for (i, h) in headers.iter().enumerate() {
        if h.trim() != format!("loss_{}", i + 1) {
            return Err(Error::Io(format!(
                "column {} header is {h:?}, expected \"loss_{}\"",
                i + 1,
                i + 1
            )));
        }
    }
    let mut rows = Vec::new();
    for (t, record) in r.records().enumerate() {
        let record = record?;
        let row = record
            .iter()
            .map(|field| {
                field.trim().parse::<f64>().map_err(|e| {
                    Error::Io(format!("row {}: cannot parse {field:?}: {e}", t + 1))
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    Ok(rows)
}

/// One row per trial with the running regret.
pub fn write_result_csv<W: Write>(out: W, result: &ExperimentResult) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "t",
        "learner_loss",
        "comparator_loss",
        "l1_update_cost",
        "cumulative_regret",
    ])?;
    let mut regret = 0.0;
    for (t, r) in result.per_trial.iter().enumerate() {
        regret += r.learner_loss - r.comparator_loss;
        w.write_record([
            (t + 1).to_string(),
            fmt_sig(r.learner_loss, CSV_DIGITS),
            fmt_sig(r.comparator_loss, CSV_DIGITS),
            fmt_sig(r.l1_update_cost, CSV_DIGITS),
            fmt_sig(regret, CSV_DIGITS),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// The JSON summary of a run. Per-trial records only appear when `full` is set.
pub fn summary_json(result: &ExperimentResult, rng: &RngInfo, full: bool) -> Result<Value> {
    let mut v = json!({
        "params": result.params,
        "regret": result.cumulative_regret,
        "bound": result.bound_value,
        "bound_name": result.bound_name,
        "ok": result.within_bound(),
        "l1_update_cost": result.total_update_cost(),
        "rng": rng,
    });
    if full {
        v["per_trial"] = serde_json::to_value(&result.per_trial)?;
    }
    Ok(round_json(v, JSON_DIGITS))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn significant_digits() {
        assert_eq!(fmt_sig(469.61953, 6), "469.620");
        assert_eq!(fmt_sig(762.01299, 6), "762.013");
        assert_eq!(fmt_sig(0.0, 6), "0");
        assert_eq!(fmt_sig(2.0, 6), "2.00000");
        assert_eq!(fmt_sig(999.9996, 6), "1000.00");
        assert_eq!(fmt_sig(-0.000123456789, 6), "-0.000123457");
        assert_eq!(fmt_sig(1.234567e-9, 3), "1.23e-9");
        assert_eq!(round_sig(2.0 / 3.0, 12), 0.666666666667);
    }

    #[test]
    fn loss_csv_roundtrip() {
        let losses = vec![vec![0.1, 1.0 / 3.0, 2.5], vec![0.0, 1e-17, 7.0]];
        let mut buf = Vec::new();
        write_loss_csv(&mut buf, &losses).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("loss_1,loss_2,loss_3\n"));
        assert_eq!(read_loss_csv(buf.as_slice()).unwrap(), losses);
    }

    #[test]
    fn loss_csv_rejects_bad_header() {
        let text = "a,b\n0.1,0.2\n";
        assert!(read_loss_csv(text.as_bytes()).is_err());
        let text = "loss_1,loss_2\n0.1,x\n";
        assert!(read_loss_csv(text.as_bytes()).is_err());
    }

    #[test]
    fn json_rounding_reaches_nested_floats() {
        let v = round_json(json!({"a": [1.0 / 3.0], "b": {"c": 2}}), 4);
        assert_eq!(v, json!({"a": [0.3333], "b": {"c": 2}}));
    }
}
