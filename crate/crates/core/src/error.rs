use thiserror::Error;

/// Violations of the radii geometry. Each variant carries both sides of the
/// failed inequality.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("radius {name} = {value} must be finite and positive")]
    NonPositive { name: &'static str, value: f64 },

    #[error("ordering r_d > r_a > r_s violated: r_d = {r_d}, r_a = {r_a}, r_s = {r_s}")]
    Ordering { r_d: f64, r_a: f64, r_s: f64 },

    #[error("triangle condition r_d < r_s + r_a violated: r_d = {r_d} >= r_s + r_a = {sum}")]
    Triangle { r_d: f64, sum: f64 },

    #[error(
        "geometric-mean condition r_a^2 > r_d*r_s violated: r_a^2 = {r_a_sq} <= r_d*r_s = {product}"
    )]
    GeometricMean { r_a_sq: f64, product: f64 },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(transparent)]
    Geometry(#[from] GeometryError),

    #[error("delta = {delta} exceeds Delta = {bound:.4}")]
    DeltaExceedsBound { delta: f64, bound: f64 },

    #[error("parameter {name} = {value} is out of range: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("robot coincides with the target (zero line-of-sight range)")]
    SingularRange,

    #[error("range r = {r} is below the auxiliary radius r_a = {r_a}")]
    RangeBelowAuxiliary { r: f64, r_a: f64 },

    #[error("barrier breached: eta = {eta} >= delta = {delta}")]
    BarrierBreach { eta: f64, delta: f64 },

    #[error("barrier breached at t = {t} s: eta = {eta} >= delta = {delta}")]
    BarrierBreachAt { t: f64, eta: f64, delta: f64 },

    #[error("range rate {rdot} exceeds the speed {speed} in magnitude")]
    RangeRateExceedsSpeed { rdot: f64, speed: f64 },

    #[error(
        "initial state (r = {r}, theta = {theta}) is outside the admissible set (eta = {eta}, delta = {delta})"
    )]
    OutsideAdmissibleSet {
        r: f64,
        theta: f64,
        eta: f64,
        delta: f64,
    },

    #[error("initial state (r = {r}, theta = {theta}) starts inside the auxiliary circle heading into the safety circle")]
    DoomedStart { r: f64, theta: f64 },

    #[error("step too coarse: V*dt = {step_length} m exceeds r_a/100 = {limit} m")]
    StepTooCoarse { step_length: f64, limit: f64 },

    #[error("non-finite state at t = {t} s")]
    NonFiniteState { t: f64 },

    #[error("speed {speed} leaves no turning authority under the wheel limit {limit}")]
    NoTurningAuthority { speed: f64, limit: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
