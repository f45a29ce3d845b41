//! Versioned little-endian binary dump of coefficient vectors, used for
//! regression files of reference solutions.

use std::fs;
use std::path::Path;

use crate::bases::{BasisId, BasisKind, CoeffVector, Domain, Index, ModeIndex, WaveletIndex};
use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"WLCV";
pub const DUMP_VERSION: u32 = 1;

fn domain_code(d: Domain) -> u8 {
    match d {
        Domain::Interval => 0,
        Domain::Square => 1,
        Domain::LShape => 2,
    }
}

fn kind_code(k: BasisKind) -> u8 {
    match k {
        BasisKind::Haar => 0,
        BasisKind::Sine => 1,
        BasisKind::Hierarchical => 2,
    }
}

pub fn encode(coeffs: &CoeffVector) -> Vec<u8> {
    let mut out = Vec::with_capacity(16 + 22 * coeffs.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&DUMP_VERSION.to_le_bytes());
    out.push(domain_code(coeffs.basis().domain));
    out.push(kind_code(coeffs.basis().kind));
    out.extend_from_slice(&(coeffs.len() as u64).to_le_bytes());
    for (idx, c) in coeffs.iter() {
        match idx {
            Index::Wavelet(w) => {
                out.push(0);
                out.extend_from_slice(&w.level.to_le_bytes());
                out.extend_from_slice(&w.translation[0].to_le_bytes());
                out.extend_from_slice(&w.translation[1].to_le_bytes());
                out.push(w.kind);
            }
            Index::Mode(m) => {
                out.push(1);
                out.extend_from_slice(&m.0[0].to_le_bytes());
                out.extend_from_slice(&m.0[1].to_le_bytes());
                out.extend_from_slice(&0u32.to_le_bytes());
                out.push(0);
            }
        }
        out.extend_from_slice(&c.to_le_bytes());
    }
    out
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Reader<'_> {
    fn take<const N: usize>(&mut self) -> Result<[u8; N]> {
        let end = self.pos + N;
        let slice = self
            .bytes
            .get(self.pos..end)
            .ok_or_else(|| Error::Incompatible("coefficient dump is truncated".into()))?;
        self.pos = end;
        Ok(slice.try_into().expect("length checked"))
    }
}

pub fn decode(bytes: &[u8]) -> Result<CoeffVector> {
    let mut r = Reader { bytes, pos: 0 };
    if &r.take::<4>()? != MAGIC {
        return Err(Error::Incompatible("not a coefficient dump".into()));
    }
    let version = u32::from_le_bytes(r.take()?);
    if version != DUMP_VERSION {
        return Err(Error::Incompatible(format!("dump version {version}, expected {DUMP_VERSION}")));
    }
    let domain = match r.take::<1>()?[0] {
        0 => Domain::Interval,
        1 => Domain::Square,
        2 => Domain::LShape,
        d => return Err(Error::Incompatible(format!("unknown domain code {d}"))),
    };
    let kind = match r.take::<1>()?[0] {
        0 => BasisKind::Haar,
        1 => BasisKind::Sine,
        2 => BasisKind::Hierarchical,
        k => return Err(Error::Incompatible(format!("unknown basis code {k}"))),
    };
    let count = u64::from_le_bytes(r.take()?) as usize;
    let mut entries = Vec::with_capacity(count.min(1 << 24));
    for _ in 0..count {
        let tag = r.take::<1>()?[0];
        let a = r.take::<4>()?;
        let b = r.take::<4>()?;
        let c = r.take::<4>()?;
        let k = r.take::<1>()?[0];
        let value = f64::from_le_bytes(r.take()?);
        let idx = match tag {
            0 => Index::Wavelet(WaveletIndex::new(
                u32::from_le_bytes(a),
                [i32::from_le_bytes(b), i32::from_le_bytes(c)],
                k,
            )),
            1 => Index::Mode(ModeIndex([u32::from_le_bytes(a), u32::from_le_bytes(b)])),
            t => return Err(Error::Incompatible(format!("unknown index tag {t}"))),
        };
        entries.push((idx, value));
    }
    if r.pos != bytes.len() {
        return Err(Error::Incompatible("trailing bytes after coefficient dump".into()));
    }
    CoeffVector::from_entries(BasisId::new(domain, kind), entries)
        .map_err(|e| Error::Incompatible(format!("invalid dump contents: {e}")))
}

pub fn write(path: &Path, coeffs: &CoeffVector) -> Result<()> {
    fs::write(path, encode(coeffs)).map_err(|e| Error::io(path, e))
}

pub fn read(path: &Path) -> Result<CoeffVector> {
    decode(&fs::read(path).map_err(|e| Error::io(path, e))?)
}
