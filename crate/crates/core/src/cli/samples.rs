//! Sample files: a header line `m=<int>` followed by one `x t` pair per line.
//! Blank lines and lines starting with `#` are ignored.

use crate::error::{Error, Result};
use crate::estimators::PairedSample;

fn parse_error(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

pub fn parse_sample_file(text: &str) -> Result<PairedSample> {
    let mut m: Option<(u64, usize)> = None;
    let mut xs = Vec::new();
    let mut ts = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((m_value, _)) = m else {
            let value = line
                .strip_prefix("m=")
                .ok_or_else(|| parse_error(line_no, format!("expected header `m=<int>`, found `{line}`")))?;
            let value: u64 = value
                .trim()
                .parse()
                .map_err(|_| parse_error(line_no, format!("invalid m value `{value}`")))?;
            if value == 0 {
                return Err(parse_error(line_no, "m must be at least 1"));
            }
            m = Some((value, line_no));
            continue;
        };
        let fields: Vec<&str> = line.split_whitespace().collect();
        let [x, t] = fields[..] else {
            return Err(parse_error(line_no, format!("expected two integers `x t`, found `{line}`")));
        };
        let x: u64 = x
            .parse()
            .map_err(|_| parse_error(line_no, format!("invalid binomial count `{x}`")))?;
        let t: u64 = t
            .parse()
            .map_err(|_| parse_error(line_no, format!("invalid waiting time `{t}`")))?;
        if t < m_value {
            return Err(parse_error(line_no, format!("waiting time {t} is below m = {m_value}")));
        }
        xs.push(x);
        ts.push(t);
    }
    let (m, header_line) = m.ok_or_else(|| parse_error(1, "missing header `m=<int>`"))?;
    if xs.is_empty() {
        return Err(parse_error(header_line, "no `x t` pairs after the header"));
    }
    PairedSample::new(xs, ts, m)
}
