use thiserror::Error;

/// Errors raised by the clustering library.
///
/// The variants follow the failure classes of the public operations: bad
/// arguments, unknown identifiers, violated state preconditions (duplicate
/// insert, missing delete, malformed forest surgery), violated input
/// preconditions (distance bounds, group-increase conditions) and oracle
/// enumeration limits.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("unknown {kind}: {id}")]
    Lookup { kind: &'static str, id: String },
    #[error("state error: {0}")]
    State(String),
    #[error("input error: {0}")]
    Input(String),
    #[error("resource limit: {0}")]
    Resource(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn unknown_point(id: impl ToString) -> Self {
        Error::Lookup {
            kind: "point",
            id: id.to_string(),
        }
    }

    pub(crate) fn unknown_node(id: impl ToString) -> Self {
        Error::Lookup {
            kind: "node",
            id: id.to_string(),
        }
    }
}
