//! Dataset file format.
//!
//! ```text
//! offset  size  field
//! 0       4     magic "FPDS"
//! 4       4     format version, u32 little-endian (currently 1)
//! 8       4     header length H, u32 little-endian
//! 12      H     UTF-8 JSON header: format_version, n, m, examples, recipes
//! 12+H    ...   one record per example:
//!                 u8   recipe code (position in grid-l2, grid-l4, set1..set6)
//!                 u64  noise seed
//!                 u32  component count L
//!                 f64  x L amplitudes, f64 x L frequencies
//!                 f64  x M samples x_a, f64 x (N - M) samples x_m
//! ```
//!
//! All integers and floats are little-endian. A `<file>.manifest.json`
//! sidecar repeats the header with per-recipe example and signal counts.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{Dataset, DatasetRecipe, Example, ExampleMeta, RecipeId};
use crate::error::{Error, Result};
use crate::signal::SinusoidSpec;

const MAGIC: &[u8; 4] = b"FPDS";
pub const DATASET_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
struct Header {
    format_version: u32,
    n: usize,
    m: usize,
    examples: usize,
    recipes: Vec<DatasetRecipe>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecipeCount {
    pub recipe: RecipeId,
    pub examples: usize,
    /// Distinct noiseless signals (examples / noise instances).
    pub signals: usize,
}

/// Human-readable summary written next to each dataset file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub format_version: u32,
    pub n: usize,
    pub m: usize,
    pub examples: usize,
    pub counts: Vec<RecipeCount>,
    pub recipes: Vec<DatasetRecipe>,
}

impl Manifest {
    pub fn of(ds: &Dataset) -> Self {
        let instances: BTreeMap<RecipeId, usize> =
            ds.recipes.iter().map(|r| (r.id, r.noise_instances)).collect();
        let counts = ds
            .counts()
            .into_iter()
            .map(|(recipe, examples)| RecipeCount {
                recipe,
                examples,
                signals: examples / instances.get(&recipe).copied().unwrap_or(1).max(1),
            })
            .collect();
        Self {
            format_version: DATASET_FORMAT_VERSION,
            n: ds.n(),
            m: ds.m(),
            examples: ds.len(),
            counts,
            recipes: ds.recipes.clone(),
        }
    }

    pub fn path_for(dataset: &Path) -> PathBuf {
        let mut name = dataset.file_name().unwrap_or_default().to_os_string();
        name.push(".manifest.json");
        dataset.with_file_name(name)
    }
}

pub(crate) fn encode(ds: &Dataset) -> Vec<u8> {
    let header = Header {
        format_version: DATASET_FORMAT_VERSION,
        n: ds.n(),
        m: ds.m(),
        examples: ds.len(),
        recipes: ds.recipes.clone(),
    };
    let json = serde_json::to_vec(&header).expect("header serializes");
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&DATASET_FORMAT_VERSION.to_le_bytes());
    out.extend_from_slice(&(json.len() as u32).to_le_bytes());
    out.extend_from_slice(&json);
    let mut records = Vec::new();
    for e in &ds.examples {
        records.push(e.meta.recipe_id.code());
        records.extend_from_slice(&e.meta.noise_seed.to_le_bytes());
        records.extend_from_slice(&(e.truth.count() as u32).to_le_bytes());
        for v in e.truth.amplitudes().iter().chain(e.truth.frequencies()).chain(&e.x_a).chain(&e.x_m) {
            records.extend_from_slice(&v.to_le_bytes());
        }
    }
    out.extend_from_slice(&records);
    out
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let s = self
            .bytes
            .get(self.pos..self.pos + n)
            .ok_or_else(|| Error::Format(format!("truncated dataset at byte {}", self.pos)))?;
        self.pos += n;
        Ok(s)
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f64s(&mut self, n: usize) -> Result<Vec<f64>> {
        Ok(self
            .take(8 * n)?
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect())
    }
}

pub(crate) fn decode(bytes: &[u8]) -> Result<Dataset> {
    let mut cur = Cursor { bytes, pos: 0 };
    if cur.take(4).ok() != Some(&MAGIC[..]) {
        return Err(Error::Format("not a dataset file (bad magic)".into()));
    }
    let version = cur.u32()?;
    if version != DATASET_FORMAT_VERSION {
        return Err(Error::Format(format!(
            "dataset format version {version}, expected {DATASET_FORMAT_VERSION}"
        )));
    }
    let hlen = cur.u32()? as usize;
    let header: Header = serde_json::from_slice(cur.take(hlen)?)
        .map_err(|e| Error::Format(format!("bad dataset header: {e}")))?;
    if header.format_version != version || !(header.n > header.m && header.m >= 1) {
        return Err(Error::Format("inconsistent dataset header".into()));
    }
    let mut examples = Vec::with_capacity(header.examples);
    for _ in 0..header.examples {
        let code = cur.u8()?;
        let recipe_id = RecipeId::from_code(code)
            .ok_or_else(|| Error::Format(format!("unknown recipe code {code}")))?;
        let noise_seed = cur.u64()?;
        let l = cur.u32()? as usize;
        if l == 0 || l > 64 {
            return Err(Error::Format(format!("implausible component count {l}")));
        }
        let amps = cur.f64s(l)?;
        let freqs = cur.f64s(l)?;
        let truth = SinusoidSpec::new(amps, freqs)
            .map_err(|e| Error::Format(format!("invalid truth record: {e}")))?;
        let x_a = cur.f64s(header.m)?;
        let x_m = cur.f64s(header.n - header.m)?;
        examples.push(Example { x_a, x_m, truth, meta: ExampleMeta { recipe_id, noise_seed } });
    }
    if cur.pos != bytes.len() {
        return Err(Error::Format(format!(
            "{} trailing bytes after the last record",
            bytes.len() - cur.pos
        )));
    }
    Dataset::new(header.recipes, examples, header.n, header.m)
}

/// Write the dataset and its manifest sidecar.
pub fn write_dataset(ds: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode(ds)).map_err(|e| Error::io(path, e))?;
    let manifest_path = Manifest::path_for(path);
    let mut json = serde_json::to_string_pretty(&Manifest::of(ds)).expect("manifest serializes");
    json.push('\n');
    fs::write(&manifest_path, json).map_err(|e| Error::io(manifest_path, e))
}

pub fn read_dataset(path: impl AsRef<Path>) -> Result<Dataset> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode(&bytes)
}
