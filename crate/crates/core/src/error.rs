use alloc::string::String;
use core::fmt;

/// Errors reported by the library.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// An edge endpoint is not a valid vertex index.
    VertexOutOfRange { vertex: usize, vertex_count: usize },
    /// An edge connects a vertex to itself.
    SelfLoop { vertex: usize },
    /// The same edge was given twice.
    DuplicateEdge { a: usize, b: usize },
    /// The operation requires a connected graph.
    Disconnected,
    /// A size or parameter is outside its documented range.
    InvalidParameter { name: &'static str, message: String },
    /// A matrix is not symmetric within the required tolerance.
    NotSymmetric { max_deviation: f64 },
    /// A matrix does not have unit row sums within the required tolerance.
    NotStochastic { max_deviation: f64 },
    /// Two operands have incompatible shapes.
    DimensionMismatch { expected: String, got: String },
    /// Text input could not be parsed; `line` is 1-based.
    Parse { line: usize, message: String },
    /// A state value violates an invariant (e.g. a non-positive pull mass).
    InvalidState { message: String },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::VertexOutOfRange { vertex, vertex_count } => {
                write!(f, "vertex {vertex} out of range for {vertex_count} vertices")
            }
            Error::SelfLoop { vertex } => write!(f, "self-loop at vertex {vertex}"),
            Error::DuplicateEdge { a, b } => write!(f, "duplicate edge ({a}, {b})"),
            Error::Disconnected => write!(f, "graph is not connected"),
            Error::InvalidParameter { name, message } => {
                write!(f, "invalid parameter `{name}`: {message}")
            }
            Error::NotSymmetric { max_deviation } => {
                write!(f, "matrix is not symmetric (max deviation {max_deviation:e})")
            }
            Error::NotStochastic { max_deviation } => {
                write!(f, "matrix rows do not sum to 1 (max deviation {max_deviation:e})")
            }
            Error::DimensionMismatch { expected, got } => {
                write!(f, "dimension mismatch: expected {expected}, got {got}")
            }
            Error::Parse { line, message } => write!(f, "parse error at line {line}: {message}"),
            Error::InvalidState { message } => write!(f, "invalid state: {message}"),
        }
    }
}

impl core::error::Error for Error {}
