//! Checkpoint file: `FGCL`, version, `L`, the `L + 1` layer widths and `d_e`
//! as little-endian `u32`; every parameter tensor as little-endian `f32` in
//! declared order; the loss history (`u32` count, `f64` values); the training
//! config as `key = value` text (`u32` byte length, UTF-8); and a CRC32 of
//! all preceding bytes.

use std::fs;
use std::path::Path;

use crate::embed::{read_f32s, write_f32s};
use crate::linalg::Matrix;

use super::params::{EncoderParams, Layer};
use super::train::TrainConfig;
use super::EncoderError;

const MAGIC: &[u8; 4] = b"FGCL";
pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub params: EncoderParams,
    pub config: TrainConfig,
    pub history: Vec<f64>,
}

impl Checkpoint {
    /// Parameters are stored as `f32`; anything finer is lost on save.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(MAGIC);
        let dims = self.params.dims();
        let mut header = vec![CHECKPOINT_VERSION, self.params.layers.len() as u32];
        header.extend(dims.iter().map(|&d| d as u32));
        header.push(self.params.edge_dim as u32);
        for h in header {
            out.extend_from_slice(&h.to_le_bytes());
        }
        for t in self.params.tensors() {
            let xs: Vec<f32> = t.iter().map(|&x| x as f32).collect();
            write_f32s(&mut out, &xs).expect("writing to memory");
        }
        out.extend_from_slice(&(self.history.len() as u32).to_le_bytes());
        for h in &self.history {
            out.extend_from_slice(&h.to_le_bytes());
        }
        let text = self.config.to_text();
        out.extend_from_slice(&(text.len() as u32).to_le_bytes());
        out.extend_from_slice(text.as_bytes());
        let crc = crc32fast::hash(&out);
        out.extend_from_slice(&crc.to_le_bytes());
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, EncoderError> {
        let corrupt = |m: &str| EncoderError::CorruptCheckpoint(m.to_string());
        if bytes.len() < 12 || &bytes[..4] != MAGIC {
            return Err(corrupt("bad magic"));
        }
        let mut r = Reader { bytes, pos: 4 };
        let version = r.u32()?;
        if version != CHECKPOINT_VERSION {
            return Err(EncoderError::VersionMismatch { found: version, expected: CHECKPOINT_VERSION });
        }
        let (body, trailer) = bytes.split_at(bytes.len() - 4);
        if crc32fast::hash(body).to_le_bytes() != trailer {
            return Err(corrupt("checksum mismatch"));
        }
        let n_layers = r.u32()? as usize;
        if n_layers == 0 || n_layers > 64 {
            return Err(corrupt("implausible layer count"));
        }
        let dims: Vec<usize> = (0..=n_layers).map(|_| r.u32().map(|d| d as usize)).collect::<Result<_, _>>()?;
        let edge_dim = r.u32()? as usize;
        let mut layers = Vec::with_capacity(n_layers);
        for w in dims.windows(2) {
            let (d_in, d_out) = (w[0], w[1]);
            layers.push(Layer {
                w_self: Matrix::from_vec(d_out, d_in, r.f32s(d_out * d_in)?),
                w_nbr: Matrix::from_vec(d_out, d_in, r.f32s(d_out * d_in)?),
                w_edge: Matrix::from_vec(d_out, edge_dim, r.f32s(d_out * edge_dim)?),
                bias: r.f32s(d_out)?,
            });
        }
        let n_hist = r.u32()? as usize;
        let history = (0..n_hist).map(|_| r.f64()).collect::<Result<_, _>>()?;
        let text_len = r.u32()? as usize;
        let text = std::str::from_utf8(r.take(text_len)?).map_err(|_| corrupt("config is not UTF-8"))?;
        let config = TrainConfig::from_text(text).map_err(|e| corrupt(&format!("config: {e}")))?;
        if r.pos != body.len() {
            return Err(corrupt("trailing bytes"));
        }
        Ok(Checkpoint { params: EncoderParams { layers, edge_dim }, config, history })
    }

    /// CRC32 of the serialized checkpoint body, as 8 hex digits.
    pub fn id(&self) -> String {
        // hashing the trailer too would always give the CRC residue
        let bytes = self.to_bytes();
        format!("{:08x}", crc32fast::hash(&bytes[..bytes.len() - 4]))
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Reader<'_> {
    fn take(&mut self, n: usize) -> Result<&[u8], EncoderError> {
        // the trailing 4 bytes are the checksum
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len() - 4);
        let end = end.ok_or_else(|| EncoderError::CorruptCheckpoint("truncated file".into()))?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32, EncoderError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn f64(&mut self) -> Result<f64, EncoderError> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }

    fn f32s(&mut self, n: usize) -> Result<Vec<f64>, EncoderError> {
        let mut raw = self.take(n.checked_mul(4).ok_or_else(|| EncoderError::CorruptCheckpoint("size overflow".into()))?)?;
        let xs = read_f32s(&mut raw, n)?;
        Ok(xs.into_iter().map(f64::from).collect())
    }
}

pub fn save_checkpoint(ckpt: &Checkpoint, path: &Path) -> Result<(), EncoderError> {
    fs::write(path, ckpt.to_bytes())?;
    Ok(())
}

pub fn load_checkpoint(path: &Path) -> Result<Checkpoint, EncoderError> {
    Checkpoint::from_bytes(&fs::read(path)?)
}
