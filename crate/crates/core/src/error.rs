use crate::game::ValidationReport;
use crate::lp::LpError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid game parameters:\n{0}")]
    InvalidParams(ValidationReport),

    #[error("operation requires the {expected} cost model")]
    WrongCostModel { expected: &'static str },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Lp(#[from] LpError),

    #[error("enumeration guard exceeded: {count} candidates > limit {limit}")]
    GuardExceeded { count: u128, limit: u128 },

    #[error("effort policy is not incentivizable (kappa = {kappa}, horizon = {horizon})")]
    NotIncentivizable { kappa: f64, horizon: usize },

    #[error("recovered duals do not incentivize the target policy (worst violation {violation:.3e})")]
    ValidationFailed { violation: f64 },

    #[error("membership oracle failure: {0}")]
    MembershipOracleFailure(String),

    #[error("action {action} has zero carry-over; no horizon accumulates effort in it")]
    InfeasibleCarryOver { action: usize },
}
