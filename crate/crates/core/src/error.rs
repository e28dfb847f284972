use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{name} = {value} is outside its domain ({expected})")]
    Domain {
        name: &'static str,
        value: f64,
        expected: &'static str,
    },

    /// The scalar separability bounds divide by `d = n1^2 - 1/4 - |m1|^2`.
    #[error("singular configuration: d = {d:e} (mode 1 is pure); use the eigenvalue test")]
    Singular { d: f64 },

    #[error("hypergeometric series does not converge for z = {z} (needs z < 1)")]
    SeriesDivergence { z: f64 },

    #[error("truncation error: {what} lost {deficit:e} of probability; {advice}")]
    Truncation {
        what: &'static str,
        deficit: f64,
        advice: &'static str,
    },

    #[error("distribution is not normalized (1 - sum = {tail:e})")]
    Unnormalized { tail: f64 },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("I/O error on {path}: {source}", path = path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub(crate) fn ensure_domain(
    name: &'static str,
    value: f64,
    ok: bool,
    expected: &'static str,
) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::Domain {
            name,
            value,
            expected,
        })
    }
}
