//! Error type shared across the library.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    // -- state construction -------------------------------------------------
    #[error("a vortex system needs at least one vortex")]
    EmptySystem,
    #[error("intensity of vortex {index} is zero")]
    ZeroIntensity { index: usize },
    #[error("vortices {i} and {j} coincide: the state is already collapsed")]
    CoincidentPositions { i: usize, j: usize },
    #[error("negative kernel exponent alpha = {alpha}")]
    NegativeAlpha { alpha: f64 },
    #[error("mismatched lengths: {positions} positions vs {intensities} intensities")]
    LengthMismatch {
        positions: usize,
        intensities: usize,
    },
    #[error("non-finite coordinate or intensity in input")]
    NonFiniteInput,

    // -- kernel / field evaluation ------------------------------------------
    #[error("kernel profile evaluated at non-positive radius r = {r}")]
    KernelRadius { r: f64 },
    #[error("singular configuration: |x_{i} - x_{j}| = {dist:e} under the distance floor")]
    SingularConfiguration { i: usize, j: usize, dist: f64 },

    // -- subsets / degeneracy -----------------------------------------------
    #[error("subset enumeration refused for N = {n} > {max} (2^N scan)")]
    SubsetSizeLimit { n: usize, max: usize },
    #[error("subset index {index} out of range for {n} vortices")]
    SubsetIndexRange { index: usize, n: usize },
    #[error("empty subset")]
    EmptySubset,
    #[error("neutral cluster: subset intensity sum {sum:e} vanishes")]
    NeutralCluster { sum: f64 },
    #[error("degenerate intensities: some strict sub-cluster has zero total intensity")]
    DegenerateIntensities,

    // -- integration ----------------------------------------------------------
    #[error("integration interval is empty: t1 = {t1} must exceed t0 = {t0}")]
    EmptyInterval { t0: f64, t1: f64 },
    #[error("invalid integrator option: {what}")]
    InvalidOptions { what: &'static str },
    #[error("record did not terminate by collapse")]
    NoCollapse,

    // -- clustering ------------------------------------------------------------
    #[error("cluster scale parameter must be positive, got {value}")]
    NonPositiveScale { value: f64 },
    #[error("separation ratio kappa = {kappa} outside the admissible interval {interval}")]
    KappaRange { kappa: f64, interval: &'static str },

    // -- self-similar construction ----------------------------------------------
    #[error("side ratio {lambda} outside (0, 1)")]
    SideRatioRange { lambda: f64 },
    #[error("root bracketing failed: residual has equal signs at both bracket ends")]
    BracketFailure,
    #[error("intensity equations disagree at lambda = {lambda}: {first:e} vs {second:e}")]
    InconsistentIntensity {
        lambda: f64,
        first: f64,
        second: f64,
    },
    #[error("computed intensity {value} is not negative; lambda is not a root")]
    IntensitySign { value: f64 },
    #[error("requested orientation yields an expanding solution; use the opposite sign")]
    ExpandingOrientation,
    #[error("total intensity {total:e} too close to zero to recenter the configuration")]
    NeutralTotalIntensity { total: f64 },
    #[error("time {t} outside the collapse interval [0, {t_collapse})")]
    OutsideCollapseInterval { t: f64, t_collapse: f64 },
    #[error("constructed configuration violates {what}: residual {residual:e}")]
    ConstructionResidual { what: &'static str, residual: f64 },

    // -- analysis -----------------------------------------------------------------
    #[error("insufficient samples in the fit window: found {found}, need {need}")]
    InsufficientSamples { found: usize, need: usize },
    #[error("need at least {need} vortices, got {n}")]
    TooFewVortices { n: usize, need: usize },
    #[error("eta = {eta} outside (0, 1]")]
    EtaRange { eta: f64 },
    #[error("pair ({i}, {j}) does not collapse in this record")]
    NonCollapsingPair { i: usize, j: usize },
    #[error("prevent-collapse bound needs max(C0, C1) > 0: the system is motionless")]
    MotionlessBound,
    #[error("no sample of vortex {index} adheres to the candidate limit point")]
    NonAdheringCandidate { index: usize },
    #[error("fitted exponent {fitted} inconsistent with {expected} (tolerance {tol})")]
    ExponentMismatch {
        fitted: f64,
        expected: f64,
        tol: f64,
    },

    // -- unit disc -------------------------------------------------------------------
    #[error("point ({x}, {y}) lies outside the open unit disc")]
    OutsideDisc { x: f64, y: f64 },
}
