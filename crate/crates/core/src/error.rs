use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix for m={m} is not hyperbolic (eigenvalue 1)")]
    NotHyperbolic { m: i64 },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("degenerate rectangle in Q{q_from} ∩ A⁻¹(Q{q_to}) with area {area:e}")]
    DegenerateRectangle { q_from: u8, q_to: u8, area: f64 },

    #[error("partition check failed: {0}")]
    PartitionCheck(String),

    #[error(
        "marked-rectangle selection infeasible: best separation {best:.6} < required {required:.6} (increase m)"
    )]
    InfeasibleSelection { best: f64, required: f64 },

    #[error("marked rectangles have not been selected")]
    NoMarkedRectangles,

    #[error("transition {from} -> {to} is not allowed")]
    TransitionNotAllowed { from: usize, to: usize },

    #[error("unknown rectangle label {0}")]
    UnknownLabel(usize),

    #[error("word is empty")]
    EmptyWord,

    #[error("integer overflow in exact arithmetic ({0})")]
    Overflow(&'static str),

    #[error(
        "float base point cannot be iterated {steps} steps backward (budget {budget}); use an exact rational base point"
    )]
    FloatOrbitBudget { steps: usize, budget: usize },

    #[error("fiber map family infeasible: sup ‖Df‖ = {measured} is not below {bound}")]
    RepellorDerivative { measured: f64, bound: f64 },

    #[error("degenerate input: {0}")]
    DegenerateInput(&'static str),

    #[error("compact inclusion failed: min boundary image norm {min_norm} ≤ radius {radius} + {min_margin}")]
    InclusionFailed {
        min_norm: f64,
        radius: f64,
        min_margin: f64,
    },

    #[error(
        "neighborhood test failed at backward depth {depth} (margin {margin}); try a larger n0"
    )]
    NeighborhoodCheck { depth: usize, margin: f64 },

    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    #[error("parse error for `{key}`: {reason}")]
    Parse { key: String, reason: String },
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
