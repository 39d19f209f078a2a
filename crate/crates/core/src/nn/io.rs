//! Binary model format.
//!
//! ```text
//! "BLSTMPOS" | version u8 | metadata_len u32 LE | metadata (UTF-8 JSON)
//! then 19 blocks: rows u32 LE | cols u32 LE | rows·cols f64 LE (row-major)
//! ```
//! Block order: embedding; forward W_f W_u W_c W_o b_f b_u b_c b_o; backward
//! in the same order; W_y; b_y. Bias vectors are stored as `len × 1`.

use serde::{Deserialize, Serialize};

use super::model::{Blstm, Hyper, Params, TENSOR_NAMES};
use super::NnError;
use crate::matrix::Matrix;
use crate::scalar::Scalar;
use crate::vocab::Vocabulary;

pub const MAGIC: &[u8; 8] = b"BLSTMPOS";
pub const FORMAT_VERSION: u8 = 0x01;

#[derive(Serialize, Deserialize)]
struct Metadata {
    embed_dim: usize,
    hidden_dim: usize,
    n_tags: usize,
    words: Vec<String>,
    tags: Vec<String>,
}

pub fn serialize<T: Scalar>(model: &Blstm<T>) -> Vec<u8> {
    let hyper = model.hyper();
    let meta = Metadata {
        embed_dim: hyper.embed_dim,
        hidden_dim: hyper.hidden_dim,
        n_tags: hyper.n_tags,
        words: model.vocab().words().to_vec(),
        tags: model.vocab().tags().to_vec(),
    };
    let meta = serde_json::to_vec(&meta).expect("metadata is always serializable");
    let params = model.params();
    let payload: usize = params.tensors().iter().map(|t| 8 + 8 * t.len()).sum();
    let mut out = Vec::with_capacity(MAGIC.len() + 5 + meta.len() + payload);
    out.extend_from_slice(MAGIC);
    out.push(FORMAT_VERSION);
    out.extend_from_slice(&u32_len(meta.len()).to_le_bytes());
    out.extend_from_slice(&meta);
    for t in params.tensors() {
        out.extend_from_slice(&u32_len(t.rows()).to_le_bytes());
        out.extend_from_slice(&u32_len(t.cols()).to_le_bytes());
        for v in t.as_slice() {
            out.extend_from_slice(&v.to_f64_lossless().to_le_bytes());
        }
    }
    out
}

fn u32_len(n: usize) -> u32 {
    u32::try_from(n).expect("model dimension exceeds u32")
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8], NnError> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.bytes.len())
            .ok_or_else(|| NnError::CorruptFile(format!("truncated while reading {what}")))?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self, what: &str) -> Result<usize, NnError> {
        let b = self.take(4, what)?;
        Ok(u32::from_le_bytes(b.try_into().expect("4 bytes")) as usize)
    }
}

pub fn deserialize<T: Scalar>(bytes: &[u8]) -> Result<Blstm<T>, NnError> {
    let mut r = Reader { bytes, pos: 0 };
    if r.take(MAGIC.len(), "magic")? != MAGIC {
        return Err(NnError::CorruptFile("bad magic".into()));
    }
    let version = r.take(1, "version")?[0];
    if version != FORMAT_VERSION {
        return Err(NnError::FormatVersionMismatch {
            found: version,
            expected: FORMAT_VERSION,
        });
    }
    let meta_len = r.u32("metadata length")?;
    let meta: Metadata = serde_json::from_slice(r.take(meta_len, "metadata")?)
        .map_err(|e| NnError::CorruptFile(format!("metadata: {e}")))?;
    let vocab =
        Vocabulary::from_lists(meta.words, meta.tags).map_err(|e| NnError::CorruptFile(format!("vocabulary: {e}")))?;
    let hyper = Hyper {
        embed_dim: meta.embed_dim,
        hidden_dim: meta.hidden_dim,
        n_tags: meta.n_tags,
    };
    if hyper.n_tags != vocab.tag_count() {
        return Err(NnError::CorruptFile("tag count disagrees with tag list".into()));
    }

    let mut params = Params::<T>::zeros(hyper, vocab.word_count());
    for (name, slot) in TENSOR_NAMES.iter().zip(params.tensors_mut()) {
        let rows = r.u32(name)?;
        let cols = r.u32(name)?;
        if (rows, cols) != slot.shape() {
            return Err(NnError::CorruptFile(format!(
                "{name}: shape {rows}×{cols}, expected {}×{}",
                slot.rows(),
                slot.cols()
            )));
        }
        let raw = r.take(rows * cols * 8, name)?;
        let values = raw
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
            .map(|v| {
                if v.is_finite() {
                    Ok(T::from_f64_rounded(v))
                } else {
                    Err(NnError::CorruptFile(format!("{name}: non-finite value")))
                }
            })
            .collect::<Result<Vec<T>, _>>()?;
        *slot = Matrix::from_vec(rows, cols, values).expect("length checked above");
    }
    if r.pos != bytes.len() {
        return Err(NnError::CorruptFile(format!("{} trailing bytes", bytes.len() - r.pos)));
    }
    Blstm::new(params, vocab).map_err(|e| NnError::CorruptFile(e.to_string()))
}
