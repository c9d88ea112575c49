//! Local feature augmentation for graph neural networks.
//!
//! The crate trains a conditional VAE over neighbor feature pairs of a graph,
//! generates one pseudo-neighbor feature row per node, selects the generated
//! matrix with the highest BALD (MC-dropout mutual information) score, and
//! trains two-branch GCN/MLP classifiers on the concatenation of original and
//! generated features. Everything is CPU-only, f64, and deterministic per seed.

pub mod acquisition;
pub mod generator;
pub mod graph;
pub mod models;
pub mod numerics;
pub mod pipeline;

/// Raises glibc's malloc trim and mmap thresholds. Mini-batch training frees
/// a few megabytes of temporaries per step, which sits above the default
/// trim threshold, so every step shrinks the heap and the next one faults
/// the pages back in. Call once at process start; mutates process-global
/// allocator state, so it is left to binaries rather than run on library
/// load. No-op off glibc.
pub fn tune_allocator() {
    #[cfg(all(target_os = "linux", target_env = "gnu"))]
    unsafe {
        libc::mallopt(libc::M_MMAP_THRESHOLD, 64 << 20);
        libc::mallopt(libc::M_TRIM_THRESHOLD, 256 << 20);
    }
}

/// Error type shared by every module.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Operand dimensions do not line up; reports both shapes.
    #[error("shape mismatch in {op}: {details}")]
    Shape { op: &'static str, details: String },
    /// A parameter is outside its documented range.
    #[error("invalid parameter: {0}")]
    Parameter(String),
    /// Bad configuration file or configuration value.
    #[error("config error: {0}")]
    Config(String),
    /// Missing or malformed input data.
    #[error("data error: {0}")]
    Data(String),
    /// A computation produced a non-finite value.
    #[error("numerical failure: {0}")]
    Numeric(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn shape(op: &'static str, details: impl Into<String>) -> Self {
        Error::Shape {
            op,
            details: details.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
