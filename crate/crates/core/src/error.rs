use thiserror::Error;

/// Errors produced by the laboratory.
///
/// The variants split into three families that the command line maps onto
/// distinct exit codes: malformed input ([`Error::Validation`],
/// [`Error::Parse`]), exhausted enumeration budgets ([`Error::Capacity`]) and
/// failed mathematical checks (everything else).
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid instance at node {node:?}: {reason}")]
    Validation { node: Option<usize>, reason: String },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("capacity exceeded: {what} needs {needed} but the cap is {cap}")]
    Capacity {
        what: &'static str,
        needed: usize,
        cap: usize,
    },

    #[error("lower family exceeds upper family at node {node}; use the open-loop solver")]
    Ordering { node: usize },

    #[error("J/J' iteration did not converge after {iterations} rounds (residual {residual})")]
    NonConvergence { iterations: usize, residual: String },

    #[error("saddle check failed: {0}")]
    Saddle(String),

    #[error("best-response case identity violated at leaf {leaf}: {detail}")]
    CaseIdentity { leaf: usize, detail: String },

    #[error("Lipschitz certificate fails: {0}")]
    Lipschitz(String),

    #[error("strategy map is not total: {0}")]
    Domain(String),
}

impl Error {
    pub(crate) fn invalid(node: impl Into<Option<usize>>, reason: impl Into<String>) -> Self {
        Error::Validation {
            node: node.into(),
            reason: reason.into(),
        }
    }

    pub fn is_data(&self) -> bool {
        matches!(self, Error::Validation { .. } | Error::Parse(_))
    }

    pub fn is_capacity(&self) -> bool {
        matches!(self, Error::Capacity { .. })
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
