use thiserror::Error;

/// Errors raised by the numerical pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("argument {0} is outside the domain (must be positive and finite)")]
    Domain(f64),

    #[error("order {order} at argument {x} exceeds the binary64 exponent range")]
    Range { order: u32, x: f64 },

    #[error("mode {mode} exceeds the configured maximum order {max}")]
    ModeTooHigh { mode: u32, max: u32 },

    #[error("invalid medium: {0}")]
    InvalidMedium(String),

    #[error("degenerate medium: refractive index is identically one")]
    DegenerateMedium,

    #[error("boundary contrast |n(a) - 1| = {0:e} is below the critical threshold")]
    NearCritical(f64),

    #[error("gamma = {0:e} vanishes to working precision")]
    GammaZero(f64),

    #[error("interval endpoint {0} sits on a zero of the impedance function")]
    EndpointOnZero(f64),

    #[error("phase unwrapping is ambiguous near k = {0}")]
    UnwrapAmbiguity(f64),

    #[error("side-sampled and analytic crossing directions disagree at k = {0}")]
    SlopeDisagreement(f64),

    #[error("evaluation point lambda = {0} is too close to a pole")]
    NearPole(f64),

    #[error("lambda = {0} is within the exclusion radius of a spectral event")]
    EventTooClose(f64),

    #[error("impedance eigenvalue collides with an ITE or Dirichlet eigenvalue at lambda = {lambda} (t = {t})")]
    UnresolvedEvent { lambda: f64, t: f64 },

    #[error("reference point alpha = {alpha} is not below the first spectral event ({event})")]
    ReferenceTooHigh { alpha: f64, event: f64 },

    #[error("record at lambda = {0} carries no sigma for the requested source")]
    MissingSigma(f64),

    #[error("ITE at lambda = {0} is singular (both boundary traces vanish)")]
    SingularIte(f64),

    #[error("signature at lambda = {0} is not resolved by the quadrature")]
    Unresolved(f64),
}

pub type Result<T> = std::result::Result<T, Error>;
