use thiserror::Error;

/// Errors shared by all numerical modules.
#[derive(Debug, Error)]
pub enum CoreError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("non-finite field")]
    NonFiniteField,
    #[error("invalid exponent: {0}")]
    InvalidExponent(String),
    #[error("Lorentz norm defined for nonnegative u")]
    NegativeLorentzInput,
    #[error("empty scale ladder")]
    EmptyLadder,
    #[error("below resolution: h0 = {h0} < dx = {dx}")]
    BelowResolution { h0: f64, dx: f64 },
    #[error("CFL violated: dt*sup|a f'|/dx = {ratio} exceeds the monotonicity bound {bound}")]
    CflViolated { ratio: f64, bound: f64 },
    #[error("scheme violates divcondition: D depends on the probe state (residual {residual})")]
    DivConditionViolated { residual: f64 },
    #[error("entropy ledger violated at h = {h}: slack {slack} below -{tol} (relative)")]
    LedgerViolated { h: f64, slack: f64, tol: f64 },
    #[error("entropy inequality violated at step {step} for kappa = {kappa}")]
    EntropyViolated { step: usize, kappa: f64 },
    #[error("1D divergence-free fields are constant")]
    DivFree1d,
    #[error("oracle requires convex flux")]
    NonConvexFlux,
    #[error("characteristic integration failed: {0}")]
    CharacteristicsFailed(String),
    #[error("regression ladder too short: {n} points (need at least {min})")]
    LadderTooShort { n: usize, min: usize },
    #[error("grids do not match")]
    GridMismatch,
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("parse: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, CoreError>;
