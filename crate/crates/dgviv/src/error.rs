use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Solver(#[from] dgviv_core::Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("msh line {line}: {msg}")]
    Msh { line: usize, msg: String },
    #[error("vtk line {line}: {msg}")]
    Vtk { line: usize, msg: String },
    #[error("config: {0}")]
    Config(String),
    #[error("config: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("checkpoint: {0}")]
    Checkpoint(String),
    #[error("positivity failure at t = {t}; last valid state written to {checkpoint}: {source}")]
    Halted {
        t: f64,
        checkpoint: PathBuf,
        source: dgviv_core::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn io_error(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> Error {
    let path = path.into();
    move |source| Error::Io { path, source }
}
