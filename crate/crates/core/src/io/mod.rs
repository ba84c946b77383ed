use thiserror::Error;

use crate::instance::{CertificateBundle, Instance};

pub mod native;
pub mod sdpa;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}, column {column}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl ParseError {
    pub fn new(line: usize, column: usize, message: impl Into<String>) -> Self {
        Self { line, column, message: message.into() }
    }
}

// An instance with its certificates, or certificates alone in a sidecar file.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct NativeDocument {
    pub instance: Option<Instance>,
    pub bundle: CertificateBundle,
}

impl NativeDocument {
    pub fn new(instance: Instance, bundle: CertificateBundle) -> Self {
        Self { instance: Some(instance), bundle }
    }

    // Certificates from a sidecar fill the slots this document leaves empty.
    pub fn attach(&mut self, sidecar: NativeDocument) {
        let b = &mut self.bundle;
        let s = sidecar.bundle;
        b.dual_infeasible = b.dual_infeasible.take().or(s.dual_infeasible);
        b.dual_not_strong = b.dual_not_strong.take().or(s.dual_not_strong);
        b.primal_infeasible = b.primal_infeasible.take().or(s.primal_infeasible);
        b.primal_not_strong = b.primal_not_strong.take().or(s.primal_not_strong);
        for (k, v) in s.provenance.entries {
            b.provenance.entries.entry(k).or_insert(v);
        }
    }
}

pub const SIDECAR_EXTENSION: &str = "cert";
