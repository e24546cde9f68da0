use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("boundary composition is nonzero{}", fmt_degree(.0))]
    CompositionNonzero(Option<usize>),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("degree {degree} out of range 0..={max}")]
    DegreeOutOfRange { degree: usize, max: usize },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("complex is not regular: {0}")]
    NotRegular(String),
    #[error("invalid vector field: {0}")]
    InvalidField(String),
    #[error("vector field is not contracting: {0} critical cells")]
    NotContracting(usize),
    #[error("matrix is not in the group: {0}")]
    NotInGroup(String),
    #[error("result is not integral")]
    NonIntegral,
    #[error("invalid level {0}")]
    InvalidLevel(i64),
    #[error("coset enumeration exceeded the bound {0}")]
    IndexTooLarge(usize),
    #[error("module does not carry an action of the resolution's group")]
    ActionMismatch,
    #[error("resolution has no contracting homotopy")]
    NoHomotopy,
    #[error("Hecke coefficient for prime {0} not supplied")]
    MissingPrime(u64),
    #[error("{0} is not squarefree")]
    NotSquareFree(i64),
    #[error("the zero ideal has no normal form")]
    ZeroIdeal,
    #[error("elements of different quadratic rings")]
    MixedField,
    #[error("invalid argument: {0}")]
    Invalid(String),
}

impl Error {
    /// Stable identifier for machine-readable reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::CompositionNonzero(_) => "composition_nonzero",
            Error::ShapeMismatch(_) => "shape_mismatch",
            Error::DegreeOutOfRange { .. } => "degree_out_of_range",
            Error::Parse(_) => "parse",
            Error::NotRegular(_) => "not_regular",
            Error::InvalidField(_) => "invalid_field",
            Error::NotContracting(_) => "not_contracting",
            Error::NotInGroup(_) => "not_in_group",
            Error::NonIntegral => "non_integral",
            Error::InvalidLevel(_) => "invalid_level",
            Error::IndexTooLarge(_) => "index_too_large",
            Error::ActionMismatch => "action_mismatch",
            Error::NoHomotopy => "no_homotopy",
            Error::MissingPrime(_) => "missing_prime",
            Error::NotSquareFree(_) => "not_squarefree",
            Error::ZeroIdeal => "zero_ideal",
            Error::MixedField => "mixed_field",
            Error::Invalid(_) => "invalid",
        }
    }
}

fn fmt_degree(d: &Option<usize>) -> String {
    match d {
        Some(n) => format!(" in degree {n}"),
        None => String::new(),
    }
}

pub type Result<T> = std::result::Result<T, Error>;
