use thiserror::Error;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("malformed curve: {0}")]
    MalformedCurve(&'static str),

    #[error("tangent vanishes at tau = {tau}")]
    VanishingTangent { tau: f64 },

    #[error("curvature degenerates at tau = {tau}; the binormal is undefined")]
    DegenerateCurvature { tau: f64 },

    #[error("curve is not simple: self-distance estimate {distance:e} is below tolerance")]
    NonSimpleCurve { distance: f64 },

    #[error("need at least {needed} nodes, got {got}")]
    InsufficientNodes { needed: usize, got: usize },

    #[error("evaluation point lies {distance:e} from the curve, below the floor {floor:e}")]
    TooCloseToCurve { distance: f64, floor: f64 },

    #[error("kernel is singular: evaluation point coincides with the curve sample")]
    SingularPoint,

    #[error("epsilon {epsilon} is not below the admissible bound {bound}")]
    EpsilonTooLarge { epsilon: f64, bound: f64 },

    #[error("offset is not orthogonal to the tangent (relative dot product {cosine:e})")]
    NotOrthogonal { cosine: f64 },

    #[error("residuals are not monotone above the noise floor")]
    FitFailure,

    #[error("extrapolation unstable: fit residual {residual:e} exceeds 10% of the gap {gap:e}")]
    ExtrapolationUnstable { residual: f64, gap: f64 },

    #[error("epsilon {epsilon} no longer fits inside the security radius {radius}")]
    SecurityRadiusViolated { epsilon: f64, radius: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),
}
