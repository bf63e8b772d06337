//! Versioned little-endian binary format for [`WaveletSystem`].
//!
//! Layout: magic `b"WAVS"`, then `u32` version, `N`, `r`, `support_length`,
//! a `u8` derivative-method tag, `f64` regularity estimate, followed by the
//! `f64` arrays filter (`2N`), `Ψ⁰`, `Ψ¹`, `Ψ⁰'`, `Ψ¹'` (each
//! `support_length·2^r + 1` long) and the cascade residual history prefixed
//! by its `u32` length.

use std::io::{Read, Write};

use super::system::{DerivativeMethod, WaveletSystem};
use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"WAVS";
const VERSION: u32 = 1;

pub fn write_system<W: Write>(w: &mut W, s: &WaveletSystem) -> Result<()> {
    w.write_all(MAGIC)?;
    for v in [
        VERSION,
        s.moments as u32,
        s.grid_resolution,
        s.support_length as u32,
    ] {
        w.write_all(&v.to_le_bytes())?;
    }
    let tag: u8 = match s.derivative_method {
        DerivativeMethod::Refinement => 0,
        DerivativeMethod::CentralDifference => 1,
    };
    w.write_all(&[tag])?;
    w.write_all(&s.regularity_estimate.to_le_bytes())?;
    for arr in [&s.filter, &s.phi, &s.psi, &s.dphi, &s.dpsi] {
        write_f64s(w, arr)?;
    }
    w.write_all(&(s.cascade_residuals.len() as u32).to_le_bytes())?;
    write_f64s(w, &s.cascade_residuals)?;
    Ok(())
}

pub fn read_system<R: Read>(r: &mut R) -> Result<WaveletSystem> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Format("not a wavelet system file".into()));
    }
    let version = read_u32(r)?;
    if version != VERSION {
        return Err(Error::Format(format!("unsupported version {version}")));
    }
    let moments = read_u32(r)? as usize;
    let grid_resolution = read_u32(r)?;
    let support_length = read_u32(r)? as usize;
    if moments == 0 || support_length != 2 * moments - 1 || grid_resolution > 24 {
        return Err(Error::Format("inconsistent wavelet header".into()));
    }
    let mut tag = [0u8; 1];
    r.read_exact(&mut tag)?;
    let derivative_method = match tag[0] {
        0 => DerivativeMethod::Refinement,
        1 => DerivativeMethod::CentralDifference,
        t => return Err(Error::Format(format!("bad derivative tag {t}"))),
    };
    let regularity_estimate = read_f64(r)?;
    let n = support_length * (1usize << grid_resolution) + 1;
    let filter = read_f64s(r, 2 * moments)?;
    let phi = read_f64s(r, n)?;
    let psi = read_f64s(r, n)?;
    let dphi = read_f64s(r, n)?;
    let dpsi = read_f64s(r, n)?;
    let nres = read_u32(r)? as usize;
    let cascade_residuals = read_f64s(r, nres)?;
    Ok(WaveletSystem {
        moments,
        filter,
        support_length,
        grid_resolution,
        phi,
        psi,
        dphi,
        dpsi,
        derivative_method,
        regularity_estimate,
        cascade_residuals,
    })
}

fn write_f64s<W: Write>(w: &mut W, v: &[f64]) -> Result<()> {
    let mut buf = Vec::with_capacity(v.len() * 8);
    for x in v {
        buf.extend_from_slice(&x.to_le_bytes());
    }
    w.write_all(&buf)?;
    Ok(())
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_f64<R: Read>(r: &mut R) -> Result<f64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(f64::from_le_bytes(b))
}

fn read_f64s<R: Read>(r: &mut R, n: usize) -> Result<Vec<f64>> {
    let mut buf = vec![0u8; n * 8];
    r.read_exact(&mut buf)?;
    Ok(buf
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect())
}
