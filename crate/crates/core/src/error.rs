use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid game spec: {0}")]
    InvalidSpec(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    #[error("length {0} is not a power of two")]
    NotPowerOfTwo(usize),

    #[error("numeric domain error: {0}")]
    Domain(String),

    #[error("player {player} out of range for a {n_players}-player game")]
    PlayerOutOfRange { player: usize, n_players: usize },

    #[error("basis index {index} out of range for {n_qubits} qubits")]
    IndexOutOfRange { index: usize, n_qubits: usize },

    #[error("parameter {value} for group {group} is outside [0, 1]")]
    ParameterOutOfRange { group: String, value: f64 },

    #[error("profile carries {found} parameters but the game has {expected} strategy groups")]
    ProfileMismatch { expected: usize, found: usize },

    #[error("total outcome weight is zero; cannot normalize")]
    DegenerateState,

    #[error(
        "profile {0:?} touches the boundary; use the best-response audit instead of the gradient"
    )]
    BoundaryProfile(Vec<f64>),

    #[error("{n} players exceeds the supported maximum of {max}")]
    TooLarge { n: usize, max: usize },

    #[error("sample grid is rank deficient ({rank} of {columns} columns)")]
    RankDeficient { rank: usize, columns: usize },

    #[error("config error: {0}")]
    Config(String),

    #[error("unknown preset `{0}`")]
    UnknownPreset(String),

    #[error("malformed config: {0}")]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for errors caused by malformed input (config, usage, spec shape,
    /// unreadable or unwritable paths) rather than by numeric values outside
    /// their domain.
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            Error::InvalidSpec(_)
                | Error::Config(_)
                | Error::UnknownPreset(_)
                | Error::Json(_)
                | Error::ProfileMismatch { .. }
                | Error::Dimension { .. }
                | Error::NotPowerOfTwo(_)
                | Error::PlayerOutOfRange { .. }
                | Error::IndexOutOfRange { .. }
                | Error::TooLarge { .. }
                | Error::Csv(_)
                | Error::Io(_)
        )
    }
}
