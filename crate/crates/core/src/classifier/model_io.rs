//! Binary model file.
//!
//! All integers are little-endian.
//!
//! ```text
//! offset  size  field
//! 0       4     magic "RNLU"
//! 4       4     format_version (u32)
//! 8       32    SHA-256 of the payload
//! 40      8     payload length in bytes (u64)
//! 48      ...   payload
//! ```
//!
//! Payload:
//!
//! ```text
//! u32 vocabulary size V, then V × (u32 byte length, UTF-8 token) in index order
//! u32 category count C, then C × (u32 byte length, UTF-8 id)
//! u32 byte length, UTF-8 gazetteer fingerprint (empty when no dictionary)
//! u32 weight dimension D (= V + 1, bias last)
//! C × D f64 weights, category-major
//! ```

use std::io::{Read, Write};

use sha2::{Digest, Sha256};

use super::Model;
use crate::corpus::CategoryId;
use crate::error::{NluError, Result};
use crate::features::Vocabulary;

pub const MAGIC: &[u8; 4] = b"RNLU";
pub const FORMAT_VERSION: u32 = 1;

const HEADER_LEN: usize = 4 + 4 + 32 + 8;

fn put_str(buf: &mut Vec<u8>, s: &str) {
    buf.extend_from_slice(&(s.len() as u32).to_le_bytes());
    buf.extend_from_slice(s.as_bytes());
}

fn payload(model: &Model) -> Vec<u8> {
    let mut buf = Vec::new();
    let tokens = model.vocabulary.tokens();
    buf.extend_from_slice(&(tokens.len() as u32).to_le_bytes());
    for t in tokens {
        put_str(&mut buf, t);
    }
    buf.extend_from_slice(&(model.categories.len() as u32).to_le_bytes());
    for c in &model.categories {
        put_str(&mut buf, c.as_str());
    }
    put_str(&mut buf, &model.gazetteer_fingerprint);
    buf.extend_from_slice(&((tokens.len() + 1) as u32).to_le_bytes());
    for w in model.weights.iter().flatten() {
        buf.extend_from_slice(&w.to_le_bytes());
    }
    buf
}

/// Serializes `model` to bytes.
pub fn to_bytes(model: &Model) -> Vec<u8> {
    let body = payload(model);
    let mut out = Vec::with_capacity(HEADER_LEN + body.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    out.extend_from_slice(&Sha256::digest(&body));
    out.extend_from_slice(&(body.len() as u64).to_le_bytes());
    out.extend_from_slice(&body);
    out
}

/// Writes `model` to `sink`, returning the number of bytes written.
pub fn save_model<W: Write>(model: &Model, mut sink: W) -> Result<usize> {
    let bytes = to_bytes(model);
    sink.write_all(&bytes)?;
    sink.flush()?;
    Ok(bytes.len())
}

/// Reads a model written by [`save_model`].
pub fn load_model<R: Read>(mut source: R) -> Result<Model> {
    let mut bytes = Vec::new();
    source.read_to_end(&mut bytes)?;
    from_bytes(&bytes)
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.bytes.len() - self.pos < n {
            return Err(NluError::ModelCorrupt("unexpected end of payload".into()));
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn string(&mut self) -> Result<String> {
        let len = self.u32()? as usize;
        let raw = self.take(len)?;
        String::from_utf8(raw.to_vec())
            .map_err(|_| NluError::ModelCorrupt("invalid UTF-8 string".into()))
    }
}

pub fn from_bytes(bytes: &[u8]) -> Result<Model> {
    if bytes.len() < 4 || &bytes[..4] != MAGIC {
        return Err(NluError::ModelFormat("bad magic, not a model file".into()));
    }
    if bytes.len() < HEADER_LEN {
        return Err(NluError::ModelCorrupt("truncated header".into()));
    }
    let version = u32::from_le_bytes(bytes[4..8].try_into().unwrap());
    if version != FORMAT_VERSION {
        return Err(NluError::ModelFormat(format!(
            "unsupported format version {version} (expected {FORMAT_VERSION})"
        )));
    }
    let checksum = &bytes[8..40];
    let len = u64::from_le_bytes(bytes[40..48].try_into().unwrap());
    let body = &bytes[HEADER_LEN..];
    if body.len() as u64 != len {
        return Err(NluError::ModelCorrupt(format!(
            "payload is {} bytes, header says {len}",
            body.len()
        )));
    }
    if Sha256::digest(body).as_slice() != checksum {
        return Err(NluError::ModelCorrupt("checksum mismatch".into()));
    }

    let mut cur = Cursor {
        bytes: body,
        pos: 0,
    };
    let n_tokens = cur.u32()? as usize;
    let tokens = (0..n_tokens)
        .map(|_| cur.string())
        .collect::<Result<Vec<_>>>()?;
    let n_categories = cur.u32()? as usize;
    let categories = (0..n_categories)
        .map(|_| cur.string().map(CategoryId::from_raw))
        .collect::<Result<Vec<_>>>()?;
    let fingerprint = cur.string()?;
    let dim = cur.u32()? as usize;
    if dim != n_tokens + 1 {
        return Err(NluError::ModelFormat(format!(
            "weight dimension {dim} does not match vocabulary size {n_tokens}"
        )));
    }
    let mut weights = Vec::with_capacity(n_categories);
    for _ in 0..n_categories {
        weights.push((0..dim).map(|_| cur.f64()).collect::<Result<Vec<_>>>()?);
    }
    if cur.pos != body.len() {
        return Err(NluError::ModelCorrupt(
            "trailing bytes after weights".into(),
        ));
    }
    Model::new(
        categories,
        weights,
        Vocabulary::from_tokens(tokens)?,
        fingerprint,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classifier::{train, Hyperparams};
    use crate::features::FeatureVector;

    fn sample() -> Model {
        let vocab =
            Vocabulary::from_tokens(vec!["olá".into(), "obras".into(), "MOVIE".into()]).unwrap();
        let data = vec![
            (
                FeatureVector::new(vec![0], 3).unwrap(),
                CategoryId::from_raw("agent_0"),
            ),
            (
                FeatureVector::new(vec![1, 2], 3).unwrap(),
                CategoryId::from_raw("agent_1"),
            ),
        ];
        train(&data, vocab, &Hyperparams::default())
            .unwrap()
            .with_gazetteer_fingerprint("abc123")
    }

    #[test]
    fn round_trip_is_exact() {
        let m = sample();
        let mut buf = Vec::new();
        let n = save_model(&m, &mut buf).unwrap();
        assert_eq!(n, buf.len());
        let back = load_model(buf.as_slice()).unwrap();
        assert_eq!(back, m);
        for (a, b) in back
            .weights()
            .iter()
            .flatten()
            .zip(m.weights().iter().flatten())
        {
            assert_eq!(a.to_bits(), b.to_bits());
        }
        assert_eq!(to_bytes(&back), buf);
    }

    #[test]
    fn header_layout() {
        let bytes = to_bytes(&sample());
        assert_eq!(&bytes[..4], b"RNLU");
        assert_eq!(u32::from_le_bytes(bytes[4..8].try_into().unwrap()), 1);
        let len = u64::from_le_bytes(bytes[40..48].try_into().unwrap());
        assert_eq!(len as usize, bytes.len() - 48);
    }

    #[test]
    fn bad_magic() {
        let mut bytes = to_bytes(&sample());
        bytes[0] ^= 0xff;
        assert!(matches!(from_bytes(&bytes), Err(NluError::ModelFormat(_))));
        assert!(matches!(from_bytes(b""), Err(NluError::ModelFormat(_))));
    }

    #[test]
    fn unsupported_version() {
        let mut bytes = to_bytes(&sample());
        bytes[4] = 9;
        assert!(matches!(from_bytes(&bytes), Err(NluError::ModelFormat(_))));
    }

    #[test]
    fn truncation_and_corruption() {
        let bytes = to_bytes(&sample());
        for cut in [10, HEADER_LEN, bytes.len() - 1] {
            assert!(
                matches!(from_bytes(&bytes[..cut]), Err(NluError::ModelCorrupt(_))),
                "cut {cut}"
            );
        }
        let mut flipped = bytes.clone();
        let last = flipped.len() - 3;
        flipped[last] ^= 1;
        assert!(matches!(
            from_bytes(&flipped),
            Err(NluError::ModelCorrupt(_))
        ));
    }
}
