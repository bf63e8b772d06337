use std::io::{Read, Write};

use super::TraceField;
use crate::error::{Error, Result};
use crate::field::io::{get, get_f64, get_u32, get_u64, put_f64, put_u32, put_u64, MAGIC};

/// BCF1 with the offset after the header and a band byte (1 = wavelet,
/// 0 = scaling) before each value. Missing parameters are written as NaN.
pub fn write_trace<W: Write>(w: &mut W, tf: &TraceField) -> Result<()> {
    w.write_all(MAGIC)?;
    put_u32(w, tf.d as u32)?;
    put_u32(w, tf.j_max)?;
    let (s, p, q) = tf
        .params
        .map_or((f64::NAN, f64::NAN, f64::NAN), |p| (p.s, p.p, p.q));
    put_f64(w, s)?;
    put_f64(w, p)?;
    put_f64(w, q)?;
    put_u32(w, tf.a.len() as u32)?;
    for &ai in &tf.a {
        put_f64(w, ai)?;
    }
    let mut records = Vec::new();
    tf.for_each_nonzero(|j, k, l, v| records.push((j, k.to_vec(), l, v)));
    put_u64(w, records.len() as u64)?;
    for (j, k, l, v) in records {
        w.write_all(&[j as u8])?;
        for c in k {
            put_u32(w, c as u32)?;
        }
        w.write_all(&(l as u16).to_le_bytes())?;
        w.write_all(&[(l != 0) as u8])?;
        put_f64(w, v)?;
    }
    Ok(())
}

pub fn read_trace<R: Read>(r: &mut R) -> Result<TraceField> {
    if &get::<4, _>(r)? != MAGIC {
        return Err(Error::Format("not a BCF1 file".into()));
    }
    let d = get_u32(r)? as usize;
    let j_max = get_u32(r)?;
    let (s, p, q) = (get_f64(r)?, get_f64(r)?, get_f64(r)?);
    let na = get_u32(r)? as usize;
    let a = (0..na).map(|_| get_f64(r)).collect::<Result<Vec<_>>>()?;
    let mut tf = TraceField::zeros(d, j_max, a).map_err(|e| Error::Format(e.to_string()))?;
    if !p.is_nan() {
        tf.params = Some(
            crate::field::BesovParams::new(s, p, q, d).map_err(|e| Error::Format(e.to_string()))?,
        );
    }
    let count = get_u64(r)?;
    for _ in 0..count {
        let j = get::<1, _>(r)?[0] as u32;
        let k = (0..d)
            .map(|_| get_u32(r).map(u64::from))
            .collect::<Result<Vec<_>>>()?;
        let l = u16::from_le_bytes(get(r)?) as u32;
        let band = get::<1, _>(r)?[0];
        if (band != 0) != (l != 0) {
            return Err(Error::Format(format!(
                "band flag {band} inconsistent with type {l}"
            )));
        }
        let v = get_f64(r)?;
        tf.set(j, &k, l, v)
            .map_err(|e| Error::Format(e.to_string()))?;
    }
    Ok(tf)
}
