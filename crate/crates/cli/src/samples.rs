//! Samples files: one decimal number per line, `#` starts a comment.

use std::path::Path;

use freqpred::Error;

pub fn parse(text: &str) -> Result<Vec<f64>, Error> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let body = line.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let v: f64 = body
            .parse()
            .map_err(|_| Error::Format(format!("line {}: '{body}' is not a number", i + 1)))?;
        if !v.is_finite() {
            return Err(Error::Format(format!("line {}: non-finite sample", i + 1)));
        }
        out.push(v);
    }
    if out.is_empty() {
        return Err(Error::Format("no samples".into()));
    }
    Ok(out)
}

pub fn read(path: &Path) -> Result<Vec<f64>, Error> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io { path: path.into(), source: e })?;
    parse(&text).map_err(|e| Error::Format(format!("{}: {e}", path.display())))
}

pub fn write(path: &Path, samples: &[f64]) -> Result<(), Error> {
    let body: String = samples.iter().map(|v| format!("{v}\n")).collect();
    std::fs::write(path, body).map_err(|e| Error::Io { path: path.into(), source: e })
}
