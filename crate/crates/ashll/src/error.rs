//! Error types shared across the solver.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum SolverError {
    /// A cell left the physically admissible region (rho <= 0 or p <= 0).
    /// Signals solver blow-up to the driver.
    #[error("non-physical state{}: rho = {rho}, p = {p}", cell_context(.cell))]
    NonPhysicalState {
        rho: f64,
        p: f64,
        cell: Option<(usize, usize)>,
    },

    /// A mesh request produced a cell with non-positive area.
    #[error("degenerate cell ({i}, {j}): area = {area}")]
    DegenerateCell { i: usize, j: usize, area: f64 },

    /// HLLC wave-speed coefficients coincide (alpha_R == alpha_L);
    /// the caller falls back to the HLL flux.
    #[error("degenerate HLLC wave speeds: alpha_R == alpha_L")]
    DegenerateWaveSpeeds,

    /// Riemann data would generate vacuum; the pressure function has no
    /// positive root.
    #[error("Riemann data generates vacuum")]
    VacuumGenerated,

    #[error("configuration error: {0}")]
    Config(String),

    #[error("case failed: {0}")]
    CaseFailed(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn cell_context(cell: &Option<(usize, usize)>) -> String {
    match cell {
        Some((i, j)) => format!(" at cell ({i}, {j})"),
        None => String::new(),
    }
}

pub type Result<T> = std::result::Result<T, SolverError>;
