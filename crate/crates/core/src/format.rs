//! Fixed-precision number formatting for CLI output.

use serde::Serialize;
use serde_json::Value;

pub const DEFAULT_PRECISION: usize = 9;
pub const PRECISION_ENV: &str = "BBC_CAPACITY_PRECISION";

/// Significant digits from `BBC_CAPACITY_PRECISION`, defaulting to 9.
pub fn precision_from_env() -> Result<usize, String> {
    match std::env::var(PRECISION_ENV) {
        Err(_) => Ok(DEFAULT_PRECISION),
        Ok(text) => match text.trim().parse::<usize>() {
            Ok(d) if (1..=17).contains(&d) => Ok(d),
            _ => Err(format!("{PRECISION_ENV} must be an integer in 1..=17, got `{text}`")),
        },
    }
}

/// `x` rounded to `digits` significant digits.
pub fn round_sig(x: f64, digits: usize) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{:.*e}", digits.saturating_sub(1), x).parse().unwrap_or(x)
}

/// `x` printed with `digits` significant digits, positional where practical.
pub fn fmt_sig(x: f64, digits: usize) -> String {
    if x == 0.0 {
        return "0".to_owned();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let exp = x.abs().log10().floor() as i32;
    if (-5..15).contains(&exp) {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        format!("{x:.decimals$}")
    } else {
        format!("{:.*e}", digits.saturating_sub(1), x)
    }
}

fn round_value(v: &mut Value, digits: usize) {
    match v {
        Value::Number(n) if n.is_f64() => {
            if let Some(r) = n.as_f64().and_then(|x| serde_json::Number::from_f64(round_sig(x, digits))) {
                *n = r;
            }
        }
        Value::Array(items) => items.iter_mut().for_each(|i| round_value(i, digits)),
        Value::Object(map) => map.values_mut().for_each(|i| round_value(i, digits)),
        _ => {}
    }
}

/// Pretty JSON with every float rounded to `digits` significant digits.
pub fn to_rounded_json<T: Serialize>(value: &T, digits: usize) -> serde_json::Result<String> {
    let mut v = serde_json::to_value(value)?;
    round_value(&mut v, digits);
    let mut s = serde_json::to_string_pretty(&v)?;
    s.push('\n');
    Ok(s)
}
