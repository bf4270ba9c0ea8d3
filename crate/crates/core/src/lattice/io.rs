//! Field serialization.
//!
//! Binary layout (all little-endian):
//!
//! ```text
//! magic   8 bytes  "DSCHRFLD"
//! N       u32
//! M       u32
//! a       f64
//! T       f64
//! kind    u8       0 = scalar, 1 = complex quaternion, 2 = 16-vector
//! values  (M+1)(N+1)³ · width pairs of f64 (re, im), time-major
//! ```
//!
//! Single spatial slices use the same header with `M = 0` and `T` set to the
//! slice time.
//!
//! The JSON form carries the same information and is meant for tiny grids.

use std::io::{Read, Write};

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::field::{Field, FieldValue, ValueKind};
use super::grid::GridSpec;
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 8] = b"DSCHRFLD";

pub fn write_binary<V: FieldValue, W: Write>(field: &Field<V>, mut w: W) -> Result<()> {
    let g = field.grid();
    w.write_all(MAGIC)?;
    w.write_u32::<LittleEndian>(g.n as u32)?;
    w.write_u32::<LittleEndian>(g.m as u32)?;
    w.write_f64::<LittleEndian>(g.a)?;
    w.write_f64::<LittleEndian>(g.t)?;
    w.write_u8(V::KIND.code())?;
    let mut buf = Vec::with_capacity(field.values().len() * V::KIND.width() * 16);
    for v in field.values() {
        for c in v.components() {
            buf.write_f64::<LittleEndian>(c.re)?;
            buf.write_f64::<LittleEndian>(c.im)?;
        }
    }
    w.write_all(&buf)?;
    Ok(())
}

/// Reads a header without the values.
pub fn read_header<R: Read>(r: &mut R) -> Result<(GridSpec, ValueKind)> {
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Format("bad magic; not a field file".into()));
    }
    let n = r.read_u32::<LittleEndian>()? as usize;
    let m = r.read_u32::<LittleEndian>()? as usize;
    let a = r.read_f64::<LittleEndian>()?;
    let t = r.read_f64::<LittleEndian>()?;
    let code = r.read_u8()?;
    let kind = ValueKind::from_code(code).ok_or_else(|| Error::Format(format!("unknown value kind {code}")))?;
    Ok((GridSpec::new(a, n, m, t)?, kind))
}

pub fn read_binary<V: FieldValue, R: Read>(mut r: R) -> Result<Field<V>> {
    let (grid, kind) = read_header(&mut r)?;
    if kind != V::KIND {
        return Err(Error::Format(format!("file holds {kind:?} values, expected {:?}", V::KIND)));
    }
    let width = kind.width();
    let mut comps = vec![Complex64::new(0.0, 0.0); width];
    let mut values = Vec::with_capacity(grid.len());
    for _ in 0..grid.len() {
        for c in comps.iter_mut() {
            let re = r.read_f64::<LittleEndian>()?;
            let im = r.read_f64::<LittleEndian>()?;
            *c = Complex64::new(re, im);
        }
        values.push(V::from_components(&comps));
    }
    Field::from_vec(grid, values)
}

/// Header of a single spatial slice file: `M` is written as 0 and `T` holds
/// the slice time.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SliceHeader {
    pub n: usize,
    pub a: f64,
    pub t: f64,
}

/// Writes one scalar spatial slice of `(n+1)³` values.
pub fn write_slice<W: Write>(mut w: W, n: usize, a: f64, t: f64, values: &[Complex64]) -> Result<()> {
    if values.len() != (n + 1).pow(3) {
        return Err(Error::Format(format!("slice of side {} needs {} values, got {}", n + 1, (n + 1).pow(3), values.len())));
    }
    w.write_all(MAGIC)?;
    w.write_u32::<LittleEndian>(n as u32)?;
    w.write_u32::<LittleEndian>(0)?;
    w.write_f64::<LittleEndian>(a)?;
    w.write_f64::<LittleEndian>(t)?;
    w.write_u8(ValueKind::Scalar.code())?;
    let mut buf = Vec::with_capacity(values.len() * 16);
    for c in values {
        buf.write_f64::<LittleEndian>(c.re)?;
        buf.write_f64::<LittleEndian>(c.im)?;
    }
    w.write_all(&buf)?;
    Ok(())
}

pub fn read_slice<R: Read>(mut r: R) -> Result<(SliceHeader, Vec<Complex64>)> {
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Format("bad magic; not a field file".into()));
    }
    let n = r.read_u32::<LittleEndian>()? as usize;
    if r.read_u32::<LittleEndian>()? != 0 {
        return Err(Error::Format("not a slice file (M != 0)".into()));
    }
    let a = r.read_f64::<LittleEndian>()?;
    let t = r.read_f64::<LittleEndian>()?;
    if r.read_u8()? != ValueKind::Scalar.code() {
        return Err(Error::Format("slice files hold scalar values".into()));
    }
    let mut values = Vec::with_capacity((n + 1).pow(3));
    for _ in 0..(n + 1).pow(3) {
        let re = r.read_f64::<LittleEndian>()?;
        let im = r.read_f64::<LittleEndian>()?;
        values.push(Complex64::new(re, im));
    }
    Ok((SliceHeader { n, a, t }, values))
}

#[derive(Serialize, Deserialize)]
struct JsonField {
    grid: GridSpec,
    kind: ValueKind,
    /// One `[re, im]` pair per component, point-major.
    values: Vec<[f64; 2]>,
}

pub fn to_json<V: FieldValue>(field: &Field<V>) -> Result<String> {
    let values = field
        .values()
        .iter()
        .flat_map(|v| v.components().iter().map(|c| [c.re, c.im]).collect::<Vec<_>>())
        .collect();
    Ok(serde_json::to_string(&JsonField { grid: *field.grid(), kind: V::KIND, values })?)
}

pub fn from_json<V: FieldValue>(s: &str) -> Result<Field<V>> {
    let jf: JsonField = serde_json::from_str(s)?;
    if jf.kind != V::KIND {
        return Err(Error::Format(format!("JSON holds {:?} values, expected {:?}", jf.kind, V::KIND)));
    }
    let width = jf.kind.width();
    if jf.values.len() != jf.grid.len() * width {
        return Err(Error::Format("value count does not match grid".into()));
    }
    let values = jf
        .values
        .chunks(width)
        .map(|ch| {
            let comps: Vec<Complex64> = ch.iter().map(|p| Complex64::new(p[0], p[1])).collect();
            V::from_components(&comps)
        })
        .collect();
    Field::from_vec(jf.grid, values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{CQuat, Vec16};
    use proptest::prelude::*;

    fn sample(seed: f64) -> Field<CQuat> {
        let g = GridSpec::new(1.25, 2, 3, 0.75).unwrap();
        Field::from_fn(g, |i, k| {
            let x = seed + (i[0] + 3 * i[1] + 9 * i[2] + 27 * k) as f64;
            CQuat::new(
                Complex64::new(x.sin(), x.cos()),
                Complex64::new(x, -x),
                Complex64::new(1.0 / (1.0 + x * x), 0.0),
                Complex64::new(0.0, x.exp()),
            )
        })
    }

    proptest! {
        #[test]
        fn binary_and_json_round_trip(seed in -100.0f64..100.0) {
            let f = sample(seed);
            let mut buf = Vec::new();
            write_binary(&f, &mut buf).unwrap();
            let back: Field<CQuat> = read_binary(buf.as_slice()).unwrap();
            prop_assert_eq!(&back, &f);
            let js = to_json(&f).unwrap();
            let back: Field<CQuat> = from_json(&js).unwrap();
            prop_assert_eq!(&back, &f);
        }
    }

    #[test]
    fn kind_mismatch_rejected() {
        let f = sample(0.0);
        let mut buf = Vec::new();
        write_binary(&f, &mut buf).unwrap();
        assert!(read_binary::<Vec16, _>(buf.as_slice()).is_err());
        assert!(read_binary::<CQuat, _>(&b"NOTAFILE........"[..]).is_err());
    }

    #[test]
    fn header_layout() {
        let f = sample(1.0);
        let mut buf = Vec::new();
        write_binary(&f, &mut buf).unwrap();
        assert_eq!(&buf[..8], MAGIC);
        assert_eq!(u32::from_le_bytes(buf[8..12].try_into().unwrap()), 2);
        assert_eq!(u32::from_le_bytes(buf[12..16].try_into().unwrap()), 3);
        assert_eq!(f64::from_le_bytes(buf[16..24].try_into().unwrap()), 1.25);
        assert_eq!(buf[32], 1);
        assert_eq!(buf.len(), 33 + 27 * 4 * 4 * 16);
    }
}
