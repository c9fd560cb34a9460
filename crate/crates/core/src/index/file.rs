//! Index file: `FGIX`, version, dim, count (little-endian `u32`); the
//! provenance as three length-prefixed strings (checkpoint id, table
//! fingerprint, layout); the id table (length-prefixed UTF-8); then the rows
//! as little-endian `f32`.

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::embed::{read_f32s, write_f32s};
use crate::formula::Layout;

use super::{FormulaIndex, IndexError, Provenance};

const MAGIC: &[u8; 4] = b"FGIX";
pub const INDEX_VERSION: u32 = 1;

fn write_str(w: &mut impl Write, s: &str) -> io::Result<()> {
    w.write_all(&(s.len() as u32).to_le_bytes())?;
    w.write_all(s.as_bytes())
}

fn read_u32(r: &mut impl Read) -> io::Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_str(r: &mut impl Read) -> Result<String, IndexError> {
    let len = read_u32(r).map_err(truncated)? as usize;
    let mut buf = Vec::new();
    r.take(len as u64).read_to_end(&mut buf)?;
    if buf.len() != len {
        return Err(IndexError::CorruptIndex("truncated file".into()));
    }
    String::from_utf8(buf).map_err(|_| IndexError::CorruptIndex("string is not UTF-8".into()))
}

fn truncated(e: io::Error) -> IndexError {
    match e.kind() {
        io::ErrorKind::UnexpectedEof => IndexError::CorruptIndex("truncated file".into()),
        _ => IndexError::Io(e),
    }
}

impl FormulaIndex {
    pub fn write_to(&self, w: &mut impl Write) -> io::Result<()> {
        w.write_all(MAGIC)?;
        for v in [INDEX_VERSION, self.dim as u32, self.ids.len() as u32] {
            w.write_all(&v.to_le_bytes())?;
        }
        write_str(w, &self.provenance.checkpoint)?;
        write_str(w, &self.provenance.table)?;
        write_str(w, self.provenance.layout.as_str())?;
        for id in &self.ids {
            write_str(w, id)?;
        }
        write_f32s(w, &self.rows)
    }

    pub fn read_from(r: &mut impl Read) -> Result<Self, IndexError> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic).map_err(truncated)?;
        if &magic != MAGIC {
            return Err(IndexError::CorruptIndex("bad magic".into()));
        }
        let version = read_u32(r).map_err(truncated)?;
        if version != INDEX_VERSION {
            return Err(IndexError::VersionMismatch { found: version, expected: INDEX_VERSION });
        }
        let dim = read_u32(r).map_err(truncated)? as usize;
        let count = read_u32(r).map_err(truncated)? as usize;
        let checkpoint = read_str(r)?;
        let table = read_str(r)?;
        let layout = read_str(r)?;
        let layout = Layout::parse(&layout).ok_or_else(|| IndexError::CorruptIndex(format!("unknown layout `{layout}`")))?;
        let ids = (0..count).map(|_| read_str(r)).collect::<Result<Vec<_>, _>>()?;
        let rows = read_f32s(r, dim * count).map_err(truncated)?;
        let mut rest = [0u8; 1];
        if r.read(&mut rest)? != 0 {
            return Err(IndexError::CorruptIndex("trailing bytes".into()));
        }
        Ok(FormulaIndex { dim, provenance: Provenance { checkpoint, table, layout }, ids, rows })
    }

    pub fn save(&self, path: &Path) -> Result<(), IndexError> {
        let mut w = BufWriter::new(File::create(path)?);
        self.write_to(&mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, IndexError> {
        Self::read_from(&mut BufReader::new(File::open(path)?))
    }
}
