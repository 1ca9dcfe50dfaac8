//! Flag value parsers shared by the subcommands.

use prolink::channel::delay_grid;

/// Accepts `start:step:stop`, a comma list, or a single number.
pub fn parse_grid(text: &str) -> Result<Vec<f64>, String> {
    let text = text.trim();
    if text.is_empty() {
        return Err("empty grid".into());
    }
    if text.contains(':') {
        let parts: Vec<&str> = text.split(':').collect();
        if parts.len() != 3 {
            return Err(format!("grid `{text}` must be start:step:stop"));
        }
        let v: Vec<f64> = parts.iter().map(|p| parse_f64(p)).collect::<Result<_, _>>()?;
        if v[1].is_nan() || v[1] <= 0.0 || v[2] < v[0] {
            return Err(format!("grid `{text}` needs a positive step and stop >= start"));
        }
        return Ok(delay_grid(v[0], v[1], v[2]));
    }
    text.split(',').map(parse_f64).collect()
}

fn parse_f64(s: &str) -> Result<f64, String> {
    let s = s.trim();
    let v: f64 = s.parse().map_err(|_| format!("`{s}` is not a number"))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("`{s}` is not finite"))
    }
}

/// Durations such as `200ns`, `1us`, `0.5ms`, `1e-6s`. A bare number is taken
/// as nanoseconds. Returns seconds.
pub fn parse_duration(text: &str) -> Result<f64, String> {
    let t = text.trim();
    let (num, scale) = if let Some(v) = t.strip_suffix("ns") {
        (v, 1e-9)
    } else if let Some(v) = t.strip_suffix("us").or_else(|| t.strip_suffix("µs")) {
        (v, 1e-6)
    } else if let Some(v) = t.strip_suffix("ms") {
        (v, 1e-3)
    } else if let Some(v) = t.strip_suffix('s') {
        (v, 1.0)
    } else {
        (t, 1e-9)
    };
    let v = parse_f64(num)?;
    if v < 0.0 {
        return Err(format!("negative duration `{text}`"));
    }
    Ok(v * scale)
}
