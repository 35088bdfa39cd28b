//! CSV tables: force/motion history, convergence errors, spectra, and line
//! profiles.

use crate::error::{io_error, Result};
use crate::spectrum::Spectrum;
use dgviv_core::time::Sample;
use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesRow {
    pub t: f64,
    #[serde(rename = "CL")]
    pub cl: f64,
    #[serde(rename = "CD")]
    pub cd: f64,
    pub y: f64,
    pub ydot: f64,
    pub dt: f64,
}

impl From<&Sample> for SeriesRow {
    fn from(s: &Sample) -> Self {
        SeriesRow {
            t: s.t,
            cl: s.cl,
            cd: s.cd,
            y: s.y,
            ydot: s.ydot,
            dt: s.dt,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorRow {
    pub p: usize,
    pub h: f64,
    #[serde(rename = "L2")]
    pub l2: f64,
    #[serde(rename = "Linf")]
    pub linf: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateRow {
    pub variant: String,
    pub p: usize,
    pub r2: f64,
    pub rinf: f64,
    /// Largest face penalty met anywhere in the refinement sequence.
    pub sigma_max: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
struct SpectrumRow {
    f: f64,
    mag: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
struct ProfileRow {
    x: f64,
    omega: f64,
}

pub fn write_rows<T: Serialize>(
    path: impl AsRef<Path>,
    rows: impl IntoIterator<Item = T>,
) -> Result<()> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(io_error(path))?;
    let mut w = csv::Writer::from_writer(std::io::BufWriter::new(file));
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(io_error(path))
}

pub fn read_rows<T: serde::de::DeserializeOwned>(path: impl AsRef<Path>) -> Result<Vec<T>> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(io_error(path))?;
    let mut r = csv::Reader::from_reader(std::io::BufReader::new(file));
    Ok(r.deserialize().collect::<std::result::Result<_, _>>()?)
}

pub fn write_series(path: impl AsRef<Path>, samples: &[Sample]) -> Result<()> {
    write_rows(path, samples.iter().map(SeriesRow::from))
}

pub fn read_series(path: impl AsRef<Path>) -> Result<Vec<SeriesRow>> {
    read_rows(path)
}

pub fn write_spectrum(path: impl AsRef<Path>, s: &Spectrum) -> Result<()> {
    write_rows(
        path,
        s.frequencies
            .iter()
            .zip(&s.magnitudes)
            .map(|(&f, &mag)| SpectrumRow { f, mag }),
    )
}

/// Profile against the distance from the segment start.
pub fn write_profile(path: impl AsRef<Path>, samples: &[([f64; 2], f64)]) -> Result<()> {
    let start = samples.first().map_or([0.0; 2], |s| s.0);
    write_rows(
        path,
        samples.iter().map(|&(x, omega)| ProfileRow {
            x: (x[0] - start[0]).hypot(x[1] - start[1]),
            omega,
        }),
    )
}
