//! Command-line harness: instance sources, single runs, `(τ, s)` sweeps,
//! structural checks, and their file artifacts.

pub mod check;
pub mod cli;
pub mod document;
pub mod output;
pub mod run;
pub mod sweep;

use std::path::PathBuf;

use crate::diagnostics;
use crate::error::{Error, Result};
use crate::generators::{self, Family, GenSpec, KKT_RESIDUAL_TOL};
use crate::model::Iterate;

pub use document::{ConfigDoc, Instance, Reference};
pub use output::{AtlasRow, Report, TraceRow};

pub const EXIT_OK: u8 = 0;
pub const EXIT_VALIDATION: u8 = 1;
pub const EXIT_RUNTIME: u8 = 2;
pub const EXIT_GENERATION: u8 = 3;

pub fn exit_code(err: &Error) -> u8 {
    match err {
        Error::DegenerateInstance(_) | Error::NonUniqueSolution(_) | Error::PatternExplosion(..) => EXIT_GENERATION,
        Error::NonFiniteIterate(_) | Error::Io(_) | Error::Unbounded(_) | Error::InsufficientTrace(_) => EXIT_RUNTIME,
        _ => EXIT_VALIDATION,
    }
}

/// Where a problem comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum Source {
    File(PathBuf),
    Generated { family: Family, spec: GenSpec, seed: u64 },
    /// A catalog instance, by name.
    Bundled(String),
}

impl Source {
    pub fn load(&self) -> Result<Instance> {
        match self {
            Source::File(path) => Instance::read(path),
            Source::Generated { family, spec, seed } => Ok(Instance::from_bundle(&family.generate(spec, *seed)?)),
            Source::Bundled(name) => bundled(name).map(|b| Instance::from_bundle(&b)),
        }
    }
}

pub fn bundled(name: &str) -> Result<generators::InstanceBundle> {
    match name {
        "qp1" => Ok(generators::qp1()),
        "l1-scalar" => Ok(generators::l1_scalar()),
        "box-scalar" => Ok(generators::box_scalar()),
        _ => generators::catalog().into_iter().find(|b| b.name == name).ok_or_else(|| {
            let names: Vec<String> = generators::catalog().into_iter().map(|b| b.name).collect();
            Error::Document(format!("no bundled instance {name:?}; available: {}", names.join(", ")))
        }),
    }
}

/// How the reference point used by a run was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReferenceSource {
    Document,
    Enumerated,
    Unavailable,
}

impl ReferenceSource {
    pub fn as_str(&self) -> &'static str {
        match self {
            ReferenceSource::Document => "document",
            ReferenceSource::Enumerated => "enumerated",
            ReferenceSource::Unavailable => "none",
        }
    }
}

/// The document's reference point, or one computed by active-set
/// enumeration when the document has none and the problem is small enough.
pub fn resolve_reference(instance: &Instance) -> (Option<Iterate>, ReferenceSource) {
    if let Some(r) = &instance.reference {
        return (Some(r.w_star.clone()), ReferenceSource::Document);
    }
    match generators::enumerate_reference(&instance.problem) {
        Ok(w) if diagnostics::error_map_residual(&instance.problem, &w).norm() <= KKT_RESIDUAL_TOL => {
            (Some(w), ReferenceSource::Enumerated)
        }
        _ => (None, ReferenceSource::Unavailable),
    }
}
