use thiserror::Error;

#[derive(Debug, Error)]
pub enum SimError {
    /// Pitch reached the Euler kinematic singularity; the W^-1 map is undefined.
    #[error("pitch {theta_rad} rad is at or beyond the +-pi/2 kinematic singularity")]
    Singularity { theta_rad: f64 },

    #[error("thruster current {0} A is negative")]
    NegativeCurrent(f64),

    #[error("thruster index {0} out of range 1..=4")]
    ThrusterIndex(usize),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("state became non-finite during integration")]
    NonFiniteState,

    #[error("rollout needs max_steps >= 1")]
    EmptyRollout,
}

#[derive(Debug, Error)]
pub enum MbrlError {
    #[error("dataset has {len} transitions, need at least {need}")]
    DatasetTooSmall { len: usize, need: usize },

    #[error("model produced a non-finite prediction")]
    NonFinitePrediction,

    #[error("model weights are not finite")]
    NonFiniteWeights,

    #[error("model file does not match the expected shape: {0}")]
    BadModelShape(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error(transparent)]
    Sim(#[from] SimError),
}
