use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::engine::{Net, NetConfig, ParamStore, Tensor};
use crate::repr::{Normalizer, Vocabulary};

use super::{PipelineError, RunConfig};

pub const MODEL_MAGIC: &[u8; 4] = b"TTMD";
pub const MODEL_FORMAT_VERSION: u32 = 1;

/// A trained network together with the vocabulary and normalization it was
/// fit with. Loading reproduces predictions bit for bit.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainedModel {
    pub net: Net,
    pub vocab: Vocabulary,
    pub norm: Normalizer,
    pub config: RunConfig,
    pub train_size: usize,
}

#[derive(Serialize, Deserialize)]
struct Header {
    format_version: u32,
    run: RunConfig,
    net: NetConfig,
    vocabulary: Vocabulary,
    normalizer: Normalizer,
    train_size: usize,
}

fn put_u32(out: &mut Vec<u8>, x: u32) {
    out.extend_from_slice(&x.to_le_bytes());
}

fn put_store(out: &mut Vec<u8>, store: &ParamStore) {
    put_u32(out, store.len() as u32);
    for (name, t) in store.iter() {
        put_u32(out, name.len() as u32);
        out.extend_from_slice(name.as_bytes());
        put_u32(out, 2);
        put_u32(out, t.nrows() as u32);
        put_u32(out, t.ncols() as u32);
        for &x in t.iter() {
            out.extend_from_slice(&x.to_le_bytes());
        }
    }
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], PipelineError> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.buf.len()).ok_or_else(|| {
            PipelineError::ModelFormat(format!("truncated at byte {}", self.pos))
        })?;
        let s = &self.buf[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32, PipelineError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn store(&mut self) -> Result<ParamStore, PipelineError> {
        let mut store = ParamStore::default();
        for _ in 0..self.u32()? {
            let len = self.u32()? as usize;
            let name = std::str::from_utf8(self.take(len)?)
                .map_err(|_| PipelineError::ModelFormat("tensor name is not UTF-8".into()))?
                .to_string();
            if self.u32()? != 2 {
                return Err(PipelineError::ModelFormat(format!("tensor `{name}` is not two-dimensional")));
            }
            let (r, c) = (self.u32()? as usize, self.u32()? as usize);
            let bytes = self.take(r.checked_mul(c).and_then(|n| n.checked_mul(8)).ok_or_else(|| {
                PipelineError::ModelFormat(format!("tensor `{name}` is too large"))
            })?)?;
            let data: Vec<f64> = bytes.chunks_exact(8).map(|b| f64::from_le_bytes(b.try_into().expect("8 bytes"))).collect();
            let t = Tensor::from_shape_vec((r, c), data).expect("length matches shape");
            if store.id(&name).is_some() {
                return Err(PipelineError::ModelFormat(format!("duplicate tensor `{name}`")));
            }
            store.insert(&name, t);
        }
        Ok(store)
    }
}

impl TrainedModel {
    pub fn to_bytes(&self) -> Vec<u8> {
        let header = Header {
            format_version: MODEL_FORMAT_VERSION,
            run: self.config.clone(),
            net: self.net.config().clone(),
            vocabulary: self.vocab.clone(),
            normalizer: self.norm,
            train_size: self.train_size,
        };
        let json = serde_json::to_vec(&header).expect("header serializes");
        let mut out = Vec::with_capacity(json.len() + 8 * self.net.params().num_scalars() + 64);
        out.extend_from_slice(MODEL_MAGIC);
        put_u32(&mut out, MODEL_FORMAT_VERSION);
        put_u32(&mut out, json.len() as u32);
        out.extend_from_slice(&json);
        put_store(&mut out, self.net.params());
        put_store(&mut out, self.net.buffers());
        out
    }

    pub fn from_bytes(buf: &[u8]) -> Result<TrainedModel, PipelineError> {
        let mut r = Reader { buf, pos: 0 };
        if r.take(4).ok() != Some(MODEL_MAGIC.as_slice()) {
            return Err(PipelineError::ModelFormat("not a model file (bad magic)".into()));
        }
        let version = r.u32()?;
        if version != MODEL_FORMAT_VERSION {
            return Err(PipelineError::ModelFormat(format!(
                "format version {version}, this build reads {MODEL_FORMAT_VERSION}"
            )));
        }
        let len = r.u32()? as usize;
        let header: Header = serde_json::from_slice(r.take(len)?)
            .map_err(|e| PipelineError::ModelFormat(format!("header: {e}")))?;
        let params = r.store()?;
        let buffers = r.store()?;
        if r.pos != buf.len() {
            return Err(PipelineError::ModelFormat(format!("{} trailing bytes", buf.len() - r.pos)));
        }
        if header.net.num_kinds != header.vocabulary.num_kinds() || header.net.num_values != header.vocabulary.num_values()
        {
            return Err(PipelineError::ModelFormat("network and vocabulary sizes disagree".into()));
        }
        let net = Net::from_parts(header.net, params, buffers)?;
        Ok(TrainedModel {
            net,
            vocab: header.vocabulary,
            norm: header.normalizer,
            config: header.run,
            train_size: header.train_size,
        })
    }

    pub fn save(&self, path: &Path) -> Result<(), PipelineError> {
        std::fs::write(path, self.to_bytes()).map_err(|source| PipelineError::Io { path: path.to_path_buf(), source })
    }

    pub fn load(path: &Path) -> Result<TrainedModel, PipelineError> {
        let buf = std::fs::read(path).map_err(|source| PipelineError::Io { path: path.to_path_buf(), source })?;
        Self::from_bytes(&buf)
    }
}
