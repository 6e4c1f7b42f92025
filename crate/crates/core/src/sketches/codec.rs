//! Binary sketch state.
//!
//! Little-endian layout: magic `VSZS`, version byte, kind byte
//! (1 pc, 2 ll, 3 ac, 4 gc, 5 gt), memory `u64`, width byte, seed `u64`,
//! then the raw state:
//!
//! * pc: M rows as `u64`
//! * ll/ac: M counter bytes
//! * gc: saturation byte, entry count `u64`, then `(hash u64, key length u32, key)` in
//!   increasing order
//! * gt: level `u32`, entry count `u64`, then `(level u8, key length u32,
//!   key)` sorted by key

use std::collections::HashMap;
use std::io::{Cursor, Read};

use super::{AnySketch, BitMatrixSketch, BucketMaxSketch, DistinctSketch, GtSketch, KmvSketch, SketchParams};
use crate::error::{Error, Result};
use crate::hashing::{read_array, HashBits};

const MAGIC: &[u8; 4] = b"VSZS";
const VERSION: u8 = 1;

pub fn encode(sketch: &AnySketch) -> Vec<u8> {
    let params = sketch.params();
    let kind = match sketch {
        AnySketch::Pc(_) => 1u8,
        AnySketch::Ll(_) => 2,
        AnySketch::Ac(_) => 3,
        AnySketch::Gc(_) => 4,
        AnySketch::Gt(_) => 5,
    };
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&[VERSION, kind]);
    out.extend_from_slice(&(params.memory as u64).to_le_bytes());
    out.push(params.bits.width() as u8);
    out.extend_from_slice(&params.seed.to_le_bytes());
    match sketch {
        AnySketch::Pc(s) => s.rows().iter().for_each(|r| out.extend_from_slice(&r.to_le_bytes())),
        AnySketch::Ll(s) | AnySketch::Ac(s) => out.extend_from_slice(s.counters()),
        AnySketch::Gc(s) => {
            out.push(s.is_saturated() as u8);
            out.extend_from_slice(&(s.len() as u64).to_le_bytes());
            for (hash, key) in s.iter() {
                out.extend_from_slice(&hash.to_le_bytes());
                push_key(&mut out, key);
            }
        }
        AnySketch::Gt(s) => {
            out.extend_from_slice(&s.level().to_le_bytes());
            out.extend_from_slice(&(s.len() as u64).to_le_bytes());
            let mut entries: Vec<_> = s.iter().collect();
            entries.sort_unstable();
            for (key, level) in entries {
                out.push(level as u8);
                push_key(&mut out, key);
            }
        }
    }
    out
}

fn push_key(out: &mut Vec<u8>, key: &[u8]) {
    out.extend_from_slice(&(key.len() as u32).to_le_bytes());
    out.extend_from_slice(key);
}

pub fn decode(bytes: &[u8]) -> Result<AnySketch> {
    let mut r = Cursor::new(bytes);
    let bad = |detail: &str| Error::format("sketch state", detail);
    let magic: [u8; 4] = read_array(&mut r)?;
    if &magic != MAGIC {
        return Err(bad("bad magic"));
    }
    let [version, kind] = read_array::<2>(&mut r)?;
    if version != VERSION {
        return Err(bad("unsupported version"));
    }
    let memory = u64::from_le_bytes(read_array(&mut r)?) as usize;
    let [width] = read_array::<1>(&mut r)?;
    let seed = u64::from_le_bytes(read_array(&mut r)?);
    let params = SketchParams::new(memory, HashBits::from_width(width as u32)?, seed);
    let left = bytes.len() as u64 - r.position();

    let sketch = match kind {
        1 => {
            if left < memory as u64 * 8 {
                return Err(bad("truncated bit matrix"));
            }
            let rows = (0..memory)
                .map(|_| Ok(u64::from_le_bytes(read_array(&mut r)?)))
                .collect::<Result<Vec<_>>>()?;
            AnySketch::Pc(BitMatrixSketch::from_rows(params, rows)?)
        }
        2 | 3 => {
            if left < memory as u64 {
                return Err(bad("truncated counters"));
            }
            let mut counters = vec![0u8; memory];
            r.read_exact(&mut counters)?;
            let s = BucketMaxSketch::from_counters(params, counters)?;
            if s.counters().iter().any(|&c| c > s.max_counter()) {
                return Err(bad("counter out of range"));
            }
            if kind == 2 {
                AnySketch::Ll(s)
            } else {
                AnySketch::Ac(s)
            }
        }
        4 => {
            let [saturated] = read_array::<1>(&mut r)?;
            if saturated > 1 {
                return Err(bad("saturation flag"));
            }
            let n = u64::from_le_bytes(read_array(&mut r)?);
            if n > memory as u64 {
                return Err(bad("more entries than the memory budget"));
            }
            let mut s = KmvSketch::new(params)?;
            for _ in 0..n {
                let hash = u64::from_le_bytes(read_array(&mut r)?);
                let key = read_key(&mut r)?;
                s.update(&key, hash);
            }
            if s.len() as u64 != n || s.is_saturated() {
                return Err(bad("duplicate entries"));
            }
            s.set_saturated(saturated == 1);
            if s.is_saturated() && n < memory as u64 {
                return Err(bad("saturated sketch below its budget"));
            }
            AnySketch::Gc(s)
        }
        5 => {
            let level = u32::from_le_bytes(read_array(&mut r)?);
            let n = u64::from_le_bytes(read_array(&mut r)?);
            if n > memory as u64 {
                return Err(bad("more entries than the memory budget"));
            }
            let mut entries = HashMap::with_capacity(n as usize);
            for _ in 0..n {
                let [l] = read_array::<1>(&mut r)?;
                if (l as u32) < level {
                    return Err(bad("entry below the sampling level"));
                }
                entries.insert(read_key(&mut r)?.into_boxed_slice(), l);
            }
            if entries.len() as u64 != n {
                return Err(bad("duplicate entries"));
            }
            AnySketch::Gt(GtSketch::from_parts(params, level, entries)?)
        }
        other => return Err(bad(&format!("unknown sketch kind {other}"))),
    };
    if (r.position() as usize) != bytes.len() {
        return Err(bad("trailing bytes"));
    }
    Ok(sketch)
}

fn read_key(r: &mut Cursor<&[u8]>) -> Result<Vec<u8>> {
    let len = u32::from_le_bytes(read_array(r)?) as usize;
    let left = r.get_ref().len() - r.position() as usize;
    if len > left {
        return Err(Error::format("sketch state", "truncated key"));
    }
    let mut key = vec![0u8; len];
    r.read_exact(&mut key)?;
    Ok(key)
}
