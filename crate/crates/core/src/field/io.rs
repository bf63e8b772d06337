//! `BCF1` binary field files and energy CSV export.

use std::io::{Read, Write};

use super::besov::BesovParams;
use super::stored::CoeffField;
use crate::error::{Error, Result};

pub(crate) const MAGIC: &[u8; 4] = b"BCF1";

pub(crate) fn put_u32<W: Write>(w: &mut W, v: u32) -> Result<()> {
    w.write_all(&v.to_le_bytes())?;
    Ok(())
}

pub(crate) fn put_u64<W: Write>(w: &mut W, v: u64) -> Result<()> {
    w.write_all(&v.to_le_bytes())?;
    Ok(())
}

pub(crate) fn put_f64<W: Write>(w: &mut W, v: f64) -> Result<()> {
    w.write_all(&v.to_le_bytes())?;
    Ok(())
}

pub(crate) fn get<const N: usize, R: Read>(r: &mut R) -> Result<[u8; N]> {
    let mut buf = [0u8; N];
    r.read_exact(&mut buf)?;
    Ok(buf)
}

pub(crate) fn get_u32<R: Read>(r: &mut R) -> Result<u32> {
    Ok(u32::from_le_bytes(get(r)?))
}

pub(crate) fn get_u64<R: Read>(r: &mut R) -> Result<u64> {
    Ok(u64::from_le_bytes(get(r)?))
}

pub(crate) fn get_f64<R: Read>(r: &mut R) -> Result<f64> {
    Ok(f64::from_le_bytes(get(r)?))
}

/// Header shared by plain and trace files.
pub(crate) struct Header {
    pub params: BesovParams,
    pub j_max: u32,
}

pub(crate) fn write_header<W: Write>(w: &mut W, h: &Header) -> Result<()> {
    w.write_all(MAGIC)?;
    put_u32(w, h.params.dim as u32)?;
    put_u32(w, h.j_max)?;
    put_f64(w, h.params.s)?;
    put_f64(w, h.params.p)?;
    put_f64(w, h.params.q)
}

pub(crate) fn read_header<R: Read>(r: &mut R) -> Result<Header> {
    if &get::<4, _>(r)? != MAGIC {
        return Err(Error::Format("not a BCF1 file".into()));
    }
    let dim = get_u32(r)? as usize;
    let j_max = get_u32(r)?;
    let s = get_f64(r)?;
    let p = get_f64(r)?;
    let q = get_f64(r)?;
    let params = BesovParams::new(s, p, q, dim).map_err(|e| Error::Format(e.to_string()))?;
    Ok(Header { params, j_max })
}

/// One record: `j: u8`, `k: dim × u32`, `l: u16`, `value: f64`.
pub(crate) fn write_record<W: Write>(w: &mut W, j: u32, k: &[u64], l: u32, v: f64) -> Result<()> {
    w.write_all(&[j as u8])?;
    for &c in k {
        put_u32(w, c as u32)?;
    }
    w.write_all(&(l as u16).to_le_bytes())?;
    put_f64(w, v)
}

pub(crate) fn read_record<R: Read>(r: &mut R, dim: usize) -> Result<(u32, Vec<u64>, u32, f64)> {
    let j = get::<1, _>(r)?[0] as u32;
    let mut k = Vec::with_capacity(dim);
    for _ in 0..dim {
        k.push(get_u32(r)? as u64);
    }
    let l = u16::from_le_bytes(get(r)?) as u32;
    Ok((j, k, l, get_f64(r)?))
}

pub fn write_field<W: Write>(w: &mut W, field: &CoeffField) -> Result<()> {
    let entries = field.entries();
    write_header(
        w,
        &Header {
            params: field.params,
            j_max: super::CoeffSource::j_max(field),
        },
    )?;
    put_u64(w, entries.len() as u64)?;
    for (idx, v) in entries {
        write_record(w, idx.j, &idx.k, idx.l, v)?;
    }
    Ok(())
}

pub fn read_field<R: Read>(r: &mut R) -> Result<CoeffField> {
    let h = read_header(r)?;
    let count = get_u64(r)?;
    let mut field = CoeffField::new(h.params, h.j_max)?;
    for _ in 0..count {
        let (j, k, l, v) = read_record(r, h.params.dim)?;
        field
            .insert(j, &k, l, v)
            .map_err(|e| Error::Format(format!("bad record: {e}")))?;
    }
    Ok(field)
}

/// `j,A_j` rows for `j = 1..`.
pub fn write_energy_csv<W: Write>(w: &mut W, energies: &[f64]) -> Result<()> {
    writeln!(w, "j,A_j")?;
    for (i, a) in energies.iter().enumerate() {
        writeln!(w, "{},{:e}", i + 1, a)?;
    }
    Ok(())
}
