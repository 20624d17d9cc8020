use std::io::{Read, Write};

use serde::de::DeserializeOwned;
use serde::Serialize;
use sha2::{Digest, Sha256};

use super::{EngineError, QueryIndex};
use crate::arena::Arena;

pub const MAGIC: &[u8; 8] = b"IFDSIDX1";
pub const FORMAT_VERSION: u16 = 1;

const SECTIONS: [&[u8; 4]; 9] = [b"ARNA", b"SCTX", b"CRCH", b"CGRF", b"POTF", b"POTX", b"UPDN", b"ENTR", b"FPRT"];

fn section<T: Serialize>(out: &mut impl Write, tag: &[u8; 4], value: &T) -> Result<(), EngineError> {
    let payload = bincode::serialize(value).map_err(|e| EngineError::CorruptIndex(e.to_string()))?;
    out.write_all(tag)?;
    out.write_all(&(payload.len() as u64).to_le_bytes())?;
    out.write_all(&Sha256::digest(&payload))?;
    out.write_all(&payload)?;
    Ok(())
}

/// Writes the header (magic, version, arena fingerprint) and one checksummed
/// section per table.
pub fn save_index(idx: &QueryIndex, out: &mut impl Write) -> Result<(), EngineError> {
    out.write_all(MAGIC)?;
    out.write_all(&FORMAT_VERSION.to_le_bytes())?;
    out.write_all(&idx.fingerprint)?;
    section(out, SECTIONS[0], &idx.arena)?;
    section(out, SECTIONS[1], &idx.samectx)?;
    section(out, SECTIONS[2], &idx.reach)?;
    section(out, SECTIONS[3], &idx.cg)?;
    section(out, SECTIONS[4], &idx.pot)?;
    section(out, SECTIONS[5], &idx.tpot)?;
    section(out, SECTIONS[6], &idx.updown)?;
    section(out, SECTIONS[7], &idx.entry)?;
    section(out, SECTIONS[8], &idx.fingerprint)?;
    out.flush()?;
    Ok(())
}

struct Reader<'a> {
    bytes: &'a [u8],
    at: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], EngineError> {
        let end = self.at.checked_add(n).filter(|&e| e <= self.bytes.len()).ok_or_else(|| EngineError::CorruptIndex("truncated".into()))?;
        let s = &self.bytes[self.at..end];
        self.at = end;
        Ok(s)
    }

    fn section<T: DeserializeOwned>(&mut self, tag: &[u8; 4]) -> Result<T, EngineError> {
        if self.take(4)? != tag {
            return Err(EngineError::CorruptIndex(format!("expected section {}", String::from_utf8_lossy(tag))));
        }
        let len = u64::from_le_bytes(self.take(8)?.try_into().unwrap());
        let sum = self.take(32)?;
        let payload = self.take(usize::try_from(len).map_err(|_| EngineError::CorruptIndex("section too large".into()))?)?;
        if Sha256::digest(payload).as_slice() != sum {
            return Err(EngineError::CorruptIndex(format!("checksum mismatch in {}", String::from_utf8_lossy(tag))));
        }
        bincode::deserialize(payload).map_err(|e| EngineError::CorruptIndex(e.to_string()))
    }
}

pub fn load_index(input: &mut impl Read) -> Result<QueryIndex, EngineError> {
    let mut bytes = Vec::new();
    input.read_to_end(&mut bytes)?;
    let mut r = Reader { bytes: &bytes, at: 0 };
    if r.take(8)? != MAGIC {
        return Err(EngineError::CorruptIndex("bad magic".into()));
    }
    let version = u16::from_le_bytes(r.take(2)?.try_into().unwrap());
    if version != FORMAT_VERSION {
        return Err(EngineError::VersionMismatch { found: version, expected: FORMAT_VERSION });
    }
    let fingerprint: [u8; 32] = r.take(32)?.try_into().unwrap();
    let arena: Arena = r.section(SECTIONS[0])?;
    let idx = QueryIndex {
        fingerprint,
        samectx: r.section(SECTIONS[1])?,
        reach: r.section(SECTIONS[2])?,
        cg: r.section(SECTIONS[3])?,
        pot: r.section(SECTIONS[4])?,
        tpot: r.section(SECTIONS[5])?,
        updown: r.section(SECTIONS[6])?,
        entry: r.section(SECTIONS[7])?,
        arena,
    };
    let trailer: [u8; 32] = r.section(SECTIONS[8])?;
    if r.at != bytes.len() {
        return Err(EngineError::CorruptIndex("trailing bytes".into()));
    }
    if trailer != fingerprint || idx.arena.fingerprint() != fingerprint {
        return Err(EngineError::FingerprintMismatch);
    }
    Ok(idx)
}

/// Loads an index and checks that it was built from `arena`.
pub fn load_index_for(input: &mut impl Read, arena: &Arena) -> Result<QueryIndex, EngineError> {
    let idx = load_index(input)?;
    if idx.fingerprint != arena.fingerprint() {
        return Err(EngineError::FingerprintMismatch);
    }
    Ok(idx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arena::load_arena;
    use crate::engine::preprocess;

    const ARENA_A: &str = include_str!("../../fixtures/arena_a.json");

    fn saved() -> (QueryIndex, Vec<u8>) {
        let idx = preprocess(&load_arena(ARENA_A).unwrap());
        let mut buf = Vec::new();
        save_index(&idx, &mut buf).unwrap();
        (idx, buf)
    }

    #[test]
    fn round_trip() {
        let (idx, buf) = saved();
        assert_eq!(&buf[..8], MAGIC);
        assert_eq!(load_index(&mut buf.as_slice()).unwrap(), idx);
    }

    #[test]
    fn damage_is_detected() {
        let (_, buf) = saved();
        for cut in [0, 5, 20, buf.len() / 2, buf.len() - 1] {
            assert!(matches!(load_index(&mut &buf[..cut]), Err(EngineError::CorruptIndex(_))), "cut at {cut}");
        }
        let mut flipped = buf.clone();
        let last = flipped.len() - 40;
        flipped[last] ^= 1;
        assert!(matches!(load_index(&mut flipped.as_slice()), Err(EngineError::CorruptIndex(_))));
        let mut longer = buf.clone();
        longer.push(0);
        assert!(matches!(load_index(&mut longer.as_slice()), Err(EngineError::CorruptIndex(_))));
        let mut version = buf.clone();
        version[8] = 9;
        assert!(matches!(load_index(&mut version.as_slice()), Err(EngineError::VersionMismatch { found: 9, expected: 1 })));
        let mut header = buf;
        header[12] ^= 0xff;
        assert!(matches!(load_index(&mut header.as_slice()), Err(EngineError::FingerprintMismatch)));
    }

    #[test]
    fn stale_index_is_rejected() {
        let (_, buf) = saved();
        let edited = load_arena(&ARENA_A.replace(r#""rel": [[0, 0]]}"#, r#""rel": [[0, 0], [1, 1]]}"#)).unwrap();
        assert!(matches!(load_index_for(&mut buf.as_slice(), &edited), Err(EngineError::FingerprintMismatch)));
        let same = load_arena(ARENA_A).unwrap();
        assert!(load_index_for(&mut buf.as_slice(), &same).is_ok());
    }
}
