//! Binary restart files (`*.ckpt`): little-endian, with a magic string and
//! a format version up front.

use crate::error::{io_error, Error, Result};
use dgviv_core::dg::StateField;
use dgviv_core::time::{CoupledState, Oscillator};
use std::path::Path;

const MAGIC: &[u8; 8] = b"DGVIVCKP";
pub const FORMAT_VERSION: u32 = 1;

pub fn encode(state: &CoupledState) -> Vec<u8> {
    let mut out = Vec::with_capacity(96 + 8 * (state.field.data.len() + 2 * state.vertices.len()));
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    out.extend_from_slice(&(state.field.np as u64).to_le_bytes());
    out.extend_from_slice(&(state.field.data.len() as u64).to_le_bytes());
    out.extend_from_slice(&(state.vertices.len() as u64).to_le_bytes());
    out.extend_from_slice(&state.steps.to_le_bytes());
    let o = &state.oscillator;
    let scalars = [
        state.t,
        o.m,
        o.c,
        o.k,
        o.beta,
        o.gamma,
        o.y,
        o.ydot,
        o.yddot,
        state.v_w[0],
        state.v_w[1],
        state.displacement[0],
        state.displacement[1],
    ];
    for v in scalars
        .iter()
        .chain(state.vertices.iter().flatten())
        .chain(&state.field.data)
    {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

struct Reader<'a> {
    bytes: &'a [u8],
}

impl Reader<'_> {
    fn take<const N: usize>(&mut self) -> Result<[u8; N]> {
        if self.bytes.len() < N {
            return Err(Error::Checkpoint("truncated file".into()));
        }
        let (head, rest) = self.bytes.split_at(N);
        self.bytes = rest;
        Ok(head.try_into().unwrap())
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take()?))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take()?))
    }
}

pub fn decode(bytes: &[u8]) -> Result<CoupledState> {
    let mut r = Reader { bytes };
    if &r.take::<8>()? != MAGIC {
        return Err(Error::Checkpoint("not a checkpoint file".into()));
    }
    let version = u32::from_le_bytes(r.take()?);
    if version != FORMAT_VERSION {
        return Err(Error::Checkpoint(format!(
            "format version {version} is not supported (expected {FORMAT_VERSION})"
        )));
    }
    let np = r.u64()? as usize;
    let len = r.u64()? as usize;
    let nv = r.u64()? as usize;
    let steps = r.u64()?;
    let expected = 13 + 2 * nv + len;
    if np == 0 || !len.is_multiple_of(4 * np) || r.bytes.len() != 8 * expected {
        return Err(Error::Checkpoint("inconsistent sizes".into()));
    }
    let mut s = [0.0; 13];
    for v in &mut s {
        *v = r.f64()?;
    }
    let vertices = (0..nv)
        .map(|_| Ok([r.f64()?, r.f64()?]))
        .collect::<Result<Vec<_>>>()?;
    let data = (0..len).map(|_| r.f64()).collect::<Result<Vec<_>>>()?;
    Ok(CoupledState {
        t: s[0],
        steps,
        field: StateField { np, data },
        vertices,
        oscillator: Oscillator {
            m: s[1],
            c: s[2],
            k: s[3],
            beta: s[4],
            gamma: s[5],
            y: s[6],
            ydot: s[7],
            yddot: s[8],
        },
        v_w: [s[9], s[10]],
        displacement: [s[11], s[12]],
    })
}

/// Writes through a temporary file so an interrupted write never replaces
/// a valid checkpoint.
pub fn save(path: impl AsRef<Path>, state: &CoupledState) -> Result<()> {
    let path = path.as_ref();
    let tmp = path.with_extension("ckpt.tmp");
    std::fs::write(&tmp, encode(state)).map_err(io_error(&tmp))?;
    std::fs::rename(&tmp, path).map_err(io_error(path))
}

pub fn load(path: impl AsRef<Path>) -> Result<CoupledState> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(io_error(path))?;
    decode(&bytes)
}
