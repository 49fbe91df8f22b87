//! Weight file format.
//!
//! ```text
//! offset  size  field
//! 0       4     magic "FPWT"
//! 4       4     format version, u32 little-endian (currently 1)
//! 8       4     header length H in bytes, u32 little-endian
//! 12      H     UTF-8 JSON header: architecture, init_seed, shuffle_seed,
//!               m, n, components, param_count
//! 12+H    8*P   parameters as little-endian IEEE-754 f64, layer by layer in
//!               declaration order, weights then bias
//! ```
//!
//! The file must end exactly after the last parameter.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::arch::ArchitectureSpec;
use super::params::PredictorParams;
use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"FPWT";
pub const WEIGHTS_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
struct Header {
    architecture: ArchitectureSpec,
    init_seed: u64,
    shuffle_seed: Option<u64>,
    m: usize,
    n: usize,
    components: Option<usize>,
    param_count: usize,
}

pub fn encode_params(params: &PredictorParams) -> Vec<u8> {
    let arch = params.architecture();
    let header = Header {
        architecture: arch.clone(),
        init_seed: params.init_seed(),
        shuffle_seed: params.shuffle_seed,
        m: arch.input_len(),
        n: arch.input_len() + arch.output_len(),
        components: params.components,
        param_count: arch.param_count(),
    };
    let json = serde_json::to_vec(&header).expect("header serializes");
    let mut out = Vec::with_capacity(12 + json.len() + 8 * header.param_count);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&WEIGHTS_FORMAT_VERSION.to_le_bytes());
    out.extend_from_slice(&(json.len() as u32).to_le_bytes());
    out.extend_from_slice(&json);
    for v in params.flat() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn decode_params(bytes: &[u8]) -> Result<PredictorParams> {
    let fmt = |msg: String| Error::Format(msg);
    if bytes.len() < 12 || &bytes[..4] != MAGIC {
        return Err(fmt("not a weight file (bad magic)".into()));
    }
    let version = u32::from_le_bytes(bytes[4..8].try_into().unwrap());
    if version != WEIGHTS_FORMAT_VERSION {
        return Err(fmt(format!(
            "weight format version {version}, expected {WEIGHTS_FORMAT_VERSION}"
        )));
    }
    let hlen = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
    let body = bytes
        .get(12..12 + hlen)
        .ok_or_else(|| fmt("truncated header".into()))?;
    let header: Header = serde_json::from_slice(body).map_err(|e| fmt(format!("bad header: {e}")))?;
    let arch = header.architecture;
    if header.m != arch.input_len() || header.n != arch.input_len() + arch.output_len() {
        return Err(fmt(format!(
            "header dims (M={}, N={}) disagree with architecture {}",
            header.m,
            header.n,
            arch.describe()
        )));
    }
    let count = arch.param_count();
    if header.param_count != count {
        return Err(fmt(format!(
            "header declares {} parameters, architecture has {count}",
            header.param_count
        )));
    }
    let payload = &bytes[12 + hlen..];
    if payload.len() != 8 * count {
        return Err(fmt(format!(
            "expected {} bytes of parameters, found {}",
            8 * count,
            payload.len()
        )));
    }
    let values: Vec<f64> = payload
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    if values.iter().any(|v| !v.is_finite()) {
        return Err(fmt("non-finite parameter".into()));
    }
    let mut params = PredictorParams::zeros(&arch);
    params.set_flat(&values);
    params.init_seed = header.init_seed;
    params.shuffle_seed = header.shuffle_seed;
    params.components = header.components;
    Ok(params)
}

pub fn save_params(params: &PredictorParams, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode_params(params)).map_err(|e| Error::io(path, e))
}

pub fn load_params(path: impl AsRef<Path>) -> Result<PredictorParams> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_params(&bytes)
}

/// Load weights and require a specific architecture.
pub fn load_params_for(path: impl AsRef<Path>, expected: &ArchitectureSpec) -> Result<PredictorParams> {
    let params = load_params(path)?;
    if params.architecture() != expected {
        return Err(Error::Format(format!(
            "architecture mismatch: file has {}, expected {}",
            params.architecture().describe(),
            expected.describe()
        )));
    }
    Ok(params)
}
