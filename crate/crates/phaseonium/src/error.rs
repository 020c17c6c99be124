use thiserror::Error;

/// Errors produced by configuration and solver entry points.
#[derive(Debug, Error)]
pub enum Error {
    #[error("population fraction {0} outside [0, 1]")]
    PopulationOutOfRange(f64),
    #[error("profile width must be positive, got {0}")]
    NonPositiveWidth(f64),
    #[error("span {span} smaller than 5x width {width}; kernel accuracy not guaranteed")]
    SpanTooNarrow { span: f64, width: f64 },
    #[error("detuning grid needs an even node count >= 2, got {0}")]
    BadNodeCount(usize),
    #[error("optical depth must be positive, got {0}")]
    NonPositiveDepth(f64),
    #[error("frequency {omega} outside tabulated span {span}")]
    OmegaOutsideSpan { omega: f64, span: f64 },
    #[error("position alpha*z = {alpha_z} outside [0, {depth}]")]
    DepthOutOfRange { alpha_z: f64, depth: f64 },
    #[error("preparation has a longitudinal phase gradient; use the longitudinal solver")]
    WrongSolverUniform,
    #[error("longitudinal closed form requires pop1 = pop2 = 0.5, got pop1 = {0}")]
    WrongSolverLongitudinal(f64),
    #[error("normal modes are undefined for an incoherent preparation")]
    IncoherentModes,
    #[error("pulse envelope is clipped at the time-window edge (edge magnitude {0:.3e})")]
    ClippedWindow(f64),
    #[error("spectral grids of the two components differ")]
    GridMismatch,
    #[error("integration unstable: population deviation {dev:.3e}; refine the grid (suggest n_t >= {suggest_nt})")]
    Resolution { dev: f64, suggest_nt: usize },
    #[error("time step {dt:.3e} under-resolves the largest detuning {delta_max:.3e}")]
    TimeStepTooCoarse { dt: f64, delta_max: f64 },
    #[error("the CRIB switch must come after the absorption stage")]
    SwitchOrder,
}

pub type Result<T> = std::result::Result<T, Error>;
