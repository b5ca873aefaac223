use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("vertex id {id} out of range for graph of order {n}")]
    InvalidVertex { id: usize, n: usize },

    #[error("self loop at vertex {0}")]
    SelfLoop(usize),

    #[error("pair {{{a}, {b}}} given conflicting states")]
    ConflictingPair { a: usize, b: usize },

    #[error("duplicate vertex {0} in intervention set")]
    DuplicateTarget(usize),

    #[error("directed part contains a cycle: {}", format_cycle(.0))]
    Cycle(Vec<String>),

    #[error("graph is not a DAG: {0}")]
    NotADag(String),

    #[error("expected an undirected graph, found directed pair {tail} -> {head}")]
    NotUndirected { tail: usize, head: usize },

    #[error("graph is not connected")]
    Disconnected,

    #[error("orientation {tail} -> {head} contradicts the reference graph")]
    InconsistentOrientation { tail: usize, head: usize },

    #[error("meek closure derived both orientations of pair {{{a}, {b}}}")]
    Contradiction { a: usize, b: usize },

    #[error("invalid essential graph: {0}")]
    InvalidEssential(String),

    #[error("{what} exceeds cap {cap}")]
    CapExceeded { what: &'static str, cap: u128 },

    #[error("fast sampler exhausted {0} restarts without reaching a consistent orientation")]
    RestartsExhausted(usize),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("graph has no undirected edges; nothing to discover")]
    NothingToDiscover,

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("io error on {path}: {cause}")]
    Io { path: String, cause: std::io::Error },
}

impl Error {
    /// Resource-cap failures are reported separately from input validation.
    pub fn is_cap_exceeded(&self) -> bool {
        matches!(self, Error::CapExceeded { .. })
    }

    pub(crate) fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        Error::Io {
            path: path.display().to_string(),
            cause: source,
        }
    }
}

fn format_cycle(cycle: &[String]) -> String {
    let mut parts: Vec<&str> = cycle.iter().map(String::as_str).collect();
    if let Some(first) = cycle.first() {
        parts.push(first);
    }
    parts.join(" -> ")
}
