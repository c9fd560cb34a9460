use std::fs::File;
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::Path;

use rand::Rng;

use super::subword::ngram_buckets;
use super::vocab::Vocabulary;
use super::EmbedError;

const MAGIC: &[u8; 4] = b"FGTE";
const VERSION: u32 = 1;

/// Token vectors plus subword bucket vectors.
///
/// Matrices are row-major `f32`; `input` and `output` have one row per
/// vocabulary id, `buckets` one row per hash bucket.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable {
    pub dim: usize,
    pub n_min: usize,
    pub n_max: usize,
    pub n_buckets: usize,
    pub vocab: Vocabulary,
    pub input: Vec<f32>,
    pub output: Vec<f32>,
    pub buckets: Vec<f32>,
}

impl EmbeddingTable {
    /// Input and bucket rows uniform in `[-0.5/d, 0.5/d]`, output rows zero.
    pub fn initialize(vocab: Vocabulary, dim: usize, n_min: usize, n_max: usize, n_buckets: usize, rng: &mut impl Rng) -> Self {
        let bound = 0.5 / dim as f32;
        let mut uniform = |n: usize| -> Vec<f32> { (0..n).map(|_| rng.gen_range(-bound..=bound)).collect() };
        let input = uniform(vocab.len() * dim);
        let buckets = uniform(n_buckets * dim);
        let output = vec![0.0; vocab.len() * dim];
        EmbeddingTable { dim, n_min, n_max, n_buckets, vocab, input, output, buckets }
    }

    pub fn subword_buckets(&self, token: &str) -> Vec<usize> {
        ngram_buckets(token, self.n_min, self.n_max, self.n_buckets)
    }

    pub fn input_row(&self, id: usize) -> &[f32] {
        &self.input[id * self.dim..(id + 1) * self.dim]
    }

    pub fn output_row(&self, id: usize) -> &[f32] {
        &self.output[id * self.dim..(id + 1) * self.dim]
    }

    pub fn bucket_row(&self, b: usize) -> &[f32] {
        &self.buckets[b * self.dim..(b + 1) * self.dim]
    }

    /// Token row (when in vocabulary) plus the mean of its n-gram bucket rows.
    /// Never fails: unknown tokens without n-grams map to the zero vector.
    pub fn token_vector(&self, token: &str) -> Vec<f64> {
        let mut v = vec![0.0f64; self.dim];
        let buckets = self.subword_buckets(token);
        if !buckets.is_empty() {
            for &b in &buckets {
                for (acc, &x) in v.iter_mut().zip(self.bucket_row(b)) {
                    *acc += x as f64;
                }
            }
            let inv = 1.0 / buckets.len() as f64;
            v.iter_mut().for_each(|x| *x *= inv);
        }
        if let Some(id) = self.vocab.id(token) {
            for (acc, &x) in v.iter_mut().zip(self.input_row(id)) {
                *acc += x as f64;
            }
        }
        v
    }

    pub fn is_finite(&self) -> bool {
        self.input.iter().chain(&self.output).chain(&self.buckets).all(|x| x.is_finite())
    }

    pub fn write_to(&self, w: &mut impl Write) -> io::Result<()> {
        w.write_all(MAGIC)?;
        for v in [VERSION, self.dim as u32, self.vocab.len() as u32, self.n_buckets as u32, self.n_min as u32, self.n_max as u32] {
            w.write_all(&v.to_le_bytes())?;
        }
        for (t, &c) in self.vocab.tokens().iter().zip(self.vocab.counts()) {
            w.write_all(&(t.len() as u32).to_le_bytes())?;
            w.write_all(t.as_bytes())?;
            w.write_all(&c.to_le_bytes())?;
        }
        for m in [&self.input, &self.output, &self.buckets] {
            write_f32s(w, m)?;
        }
        Ok(())
    }

    pub fn save(&self, path: &Path) -> Result<(), EmbedError> {
        let mut w = BufWriter::new(File::create(path)?);
        self.write_to(&mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, EmbedError> {
        let mut r = BufReader::new(File::open(path)?);
        Self::read_from(&mut r)
    }

    pub fn read_from(r: &mut impl Read) -> Result<Self, EmbedError> {
        let corrupt = |e: io::Error| match e.kind() {
            io::ErrorKind::UnexpectedEof => EmbedError::CorruptTable("truncated file".into()),
            _ => EmbedError::Io(e),
        };
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic).map_err(corrupt)?;
        if &magic != MAGIC {
            return Err(EmbedError::CorruptTable("bad magic".into()));
        }
        let mut header = [0u32; 6];
        for h in header.iter_mut() {
            *h = read_u32(r).map_err(corrupt)?;
        }
        let [version, dim, n_vocab, n_buckets, n_min, n_max] = header.map(|x| x as usize);
        if version as u32 != VERSION {
            return Err(EmbedError::VersionMismatch { found: version as u32, expected: VERSION });
        }
        let mut pairs = Vec::with_capacity(n_vocab);
        for _ in 0..n_vocab {
            let len = read_u32(r).map_err(corrupt)? as usize;
            let mut buf = vec![0u8; len];
            r.read_exact(&mut buf).map_err(corrupt)?;
            let token = String::from_utf8(buf).map_err(|_| EmbedError::CorruptTable("token is not UTF-8".into()))?;
            let mut c = [0u8; 8];
            r.read_exact(&mut c).map_err(corrupt)?;
            pairs.push((token, u64::from_le_bytes(c)));
        }
        let vocab = Vocabulary::from_counts(pairs.iter().cloned());
        if vocab.tokens().iter().zip(&pairs).any(|(t, (p, _))| t != p) {
            return Err(EmbedError::CorruptTable("vocabulary block is not in canonical order".into()));
        }
        let input = read_f32s(r, n_vocab * dim).map_err(corrupt)?;
        let output = read_f32s(r, n_vocab * dim).map_err(corrupt)?;
        let buckets = read_f32s(r, n_buckets * dim).map_err(corrupt)?;
        let mut rest = [0u8; 1];
        if r.read(&mut rest)? != 0 {
            return Err(EmbedError::CorruptTable("trailing bytes".into()));
        }
        Ok(EmbeddingTable { dim, n_min, n_max, n_buckets, vocab, input, output, buckets })
    }

    /// CRC32 of the serialized table; used as a provenance id.
    pub fn fingerprint(&self) -> String {
        let mut h = HashWriter(crc32fast::Hasher::new());
        self.write_to(&mut h).expect("hashing never fails");
        format!("{:08x}", h.0.finalize())
    }
}

struct HashWriter(crc32fast::Hasher);

impl Write for HashWriter {
    fn write(&mut self, buf: &[u8]) -> io::Result<usize> {
        self.0.update(buf);
        Ok(buf.len())
    }

    fn flush(&mut self) -> io::Result<()> {
        Ok(())
    }
}

fn read_u32(r: &mut impl Read) -> io::Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

pub(crate) fn write_f32s(w: &mut impl Write, xs: &[f32]) -> io::Result<()> {
    let mut buf = Vec::with_capacity(xs.len().min(1 << 16) * 4);
    for chunk in xs.chunks(1 << 16) {
        buf.clear();
        for x in chunk {
            buf.extend_from_slice(&x.to_le_bytes());
        }
        w.write_all(&buf)?;
    }
    Ok(())
}

pub(crate) fn read_f32s(r: &mut impl Read, n: usize) -> io::Result<Vec<f32>> {
    let mut bytes = vec![0u8; n * 4];
    r.read_exact(&mut bytes)?;
    Ok(bytes.chunks_exact(4).map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]])).collect())
}
