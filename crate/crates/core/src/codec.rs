//! Binary model persistence.
//!
//! Every file starts with a 4-byte magic, a format version byte and a kind
//! byte. Integers are little-endian `u64`, reals little-endian `f64`,
//! strings are a `u64` byte length followed by UTF-8 bytes.

use std::fs;
use std::io;
use std::path::Path;

pub const MAGIC: &[u8; 4] = b"DLID";
pub const FORMAT_VERSION: u8 = 1;

#[derive(Debug, thiserror::Error)]
pub enum CodecError {
    #[error("format version {found} is not supported (expected {expected})")]
    VersionMismatch { found: u8, expected: u8 },
    #[error("corrupt model file at byte offset {0}")]
    CorruptFile(usize),
    #[error("model file holds kind {found}, expected {expected}")]
    WrongKind { found: u8, expected: u8 },
    #[error(transparent)]
    Io(#[from] io::Error),
}

#[derive(Debug, Default)]
pub struct Encoder {
    buf: Vec<u8>,
}

impl Encoder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.buf
    }

    pub fn u8(&mut self, v: u8) {
        self.buf.push(v);
    }

    pub fn bool(&mut self, v: bool) {
        self.buf.push(v as u8);
    }

    pub fn u64(&mut self, v: u64) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }

    pub fn usize(&mut self, v: usize) {
        self.u64(v as u64);
    }

    pub fn f64(&mut self, v: f64) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }

    pub fn str(&mut self, v: &str) {
        self.usize(v.len());
        self.buf.extend_from_slice(v.as_bytes());
    }

    pub fn f64s(&mut self, v: &[f64]) {
        self.usize(v.len());
        for &x in v {
            self.f64(x);
        }
    }

    pub fn opt_usize(&mut self, v: Option<usize>) {
        match v {
            Some(x) => {
                self.u8(1);
                self.usize(x);
            }
            None => self.u8(0),
        }
    }
}

pub struct Decoder<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Decoder<'a> {
    pub fn new(buf: &'a [u8]) -> Self {
        Self { buf, pos: 0 }
    }

    pub fn offset(&self) -> usize {
        self.pos
    }

    pub fn corrupt(&self) -> CodecError {
        CodecError::CorruptFile(self.pos)
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8], CodecError> {
        if self.buf.len() - self.pos < n {
            return Err(self.corrupt());
        }
        let out = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(out)
    }

    pub fn u8(&mut self) -> Result<u8, CodecError> {
        Ok(self.take(1)?[0])
    }

    pub fn bool(&mut self) -> Result<bool, CodecError> {
        match self.u8()? {
            0 => Ok(false),
            1 => Ok(true),
            _ => Err(CodecError::CorruptFile(self.pos - 1)),
        }
    }

    pub fn u64(&mut self) -> Result<u64, CodecError> {
        let bytes = self.take(8)?;
        Ok(u64::from_le_bytes(bytes.try_into().expect("8 bytes")))
    }

    pub fn usize(&mut self) -> Result<usize, CodecError> {
        let at = self.pos;
        usize::try_from(self.u64()?).map_err(|_| CodecError::CorruptFile(at))
    }

    /// A length prefix for items of `item_size` bytes; rejects lengths that
    /// cannot fit in the remaining input.
    pub fn len(&mut self, item_size: usize) -> Result<usize, CodecError> {
        let at = self.pos;
        let n = self.usize()?;
        let remaining = self.buf.len() - self.pos;
        if n.checked_mul(item_size.max(1)).is_none_or(|bytes| bytes > remaining) {
            return Err(CodecError::CorruptFile(at));
        }
        Ok(n)
    }

    pub fn f64(&mut self) -> Result<f64, CodecError> {
        let bytes = self.take(8)?;
        Ok(f64::from_le_bytes(bytes.try_into().expect("8 bytes")))
    }

    pub fn str(&mut self) -> Result<String, CodecError> {
        let n = self.len(1)?;
        let at = self.pos;
        let bytes = self.take(n)?;
        String::from_utf8(bytes.to_vec()).map_err(|_| CodecError::CorruptFile(at))
    }

    pub fn f64s(&mut self) -> Result<Vec<f64>, CodecError> {
        let n = self.len(8)?;
        (0..n).map(|_| self.f64()).collect()
    }

    pub fn opt_usize(&mut self) -> Result<Option<usize>, CodecError> {
        Ok(if self.bool()? { Some(self.usize()?) } else { None })
    }

    pub fn finish(&self) -> Result<(), CodecError> {
        if self.pos == self.buf.len() {
            Ok(())
        } else {
            Err(self.corrupt())
        }
    }
}

/// A model that can be written to and read from the binary format.
pub trait Persist: Sized {
    /// Kind byte stored in the file header.
    const KIND: u8;

    fn encode(&self, enc: &mut Encoder);
    fn decode(dec: &mut Decoder<'_>) -> Result<Self, CodecError>;

    fn to_bytes(&self) -> Vec<u8> {
        let mut enc = Encoder::new();
        enc.buf.extend_from_slice(MAGIC);
        enc.u8(FORMAT_VERSION);
        enc.u8(Self::KIND);
        self.encode(&mut enc);
        enc.into_bytes()
    }

    fn from_bytes(bytes: &[u8]) -> Result<Self, CodecError> {
        let mut dec = Decoder::new(bytes);
        if dec.take(4)? != MAGIC {
            return Err(CodecError::CorruptFile(0));
        }
        let version = dec.u8()?;
        if version != FORMAT_VERSION {
            return Err(CodecError::VersionMismatch {
                found: version,
                expected: FORMAT_VERSION,
            });
        }
        let kind = dec.u8()?;
        if kind != Self::KIND {
            return Err(CodecError::WrongKind {
                found: kind,
                expected: Self::KIND,
            });
        }
        let value = Self::decode(&mut dec)?;
        dec.finish()?;
        Ok(value)
    }

    fn save(&self, path: impl AsRef<Path>) -> Result<(), CodecError> {
        fs::write(path, self.to_bytes())?;
        Ok(())
    }

    fn load(path: impl AsRef<Path>) -> Result<Self, CodecError> {
        Self::from_bytes(&fs::read(path)?)
    }
}
