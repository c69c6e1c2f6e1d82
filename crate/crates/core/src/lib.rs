//! D-optimal experimental designs for two-level main-effects models when the
//! number of high factor levels per run is restricted to a window `[L, U]`.
//!
//! A run assigns each of `K` two-level factors a value in `{-1, +1}`, and the
//! model fits an intercept plus one slope per factor. The admissible runs are
//! those with between `L` and `U` entries equal to `+1`. Because the model and
//! the region are invariant under permutation of factors, optimal designs can
//! be searched over *orbits*: the orbit `k` collects every run with exactly
//! `k` high entries, and an invariant design is a probability vector over the
//! orbit indices `L..=U`.
//!
//! The crate provides:
//!
//! - [`orbit`]: the restricted region, orbit enumeration, and orbit designs;
//! - [`information`]: moments, information matrices, determinants, and the
//!   sensitivity function used in optimality certificates;
//! - [`solver`]: closed-form D-optimal weights for every `(K, L, U)`;
//! - [`verify`]: sensitivity-based optimality certification and an
//!   independent multiplicative-ascent optimizer for cross-checking;
//! - [`exact`]: rounding of weights to integer run counts and realization of
//!   concrete design matrices.

pub mod exact;
pub mod information;
pub mod orbit;
pub mod solver;
pub mod verify;

pub use exact::{exact_efficiency, realize_matrix, round_to_exact, ExactDesign};
pub use information::{
    d_efficiency, det_information, information_matrix, is_regular, sensitivity_coefficients,
    InformationMatrix, SensitivityPolynomial,
};
pub use orbit::{enumerate_orbit, DesignPoint, MomentSummary, OrbitDesign, OrbitSpace};
pub use solver::{region_case, solve, Construction, RegionCase, SolutionReport};
pub use verify::{
    bhatia_davis_check, brute_force_solve, cross_validate, equivalence_check, CrossValidation,
    EquivalenceReport, OracleResult,
};

use std::collections::BTreeMap;

use num_rational::Ratio;

/// Exact orbit weights as reduced fractions, used where the closed forms are
/// rational in `K`, `L`, `U`.
pub type RationalWeights = BTreeMap<u32, Ratio<i64>>;

/// Errors surfaced by design construction, verification, and realization.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("factor count must be at least 1, got {0}")]
    NoFactors(u32),
    #[error("level bounds must satisfy L < U <= K, got L={l}, U={u}, K={k}")]
    InvalidBounds { k: u32, l: u32, u: u32 },
    #[error("orbit {orbit} lies outside the admissible range {l}..={u}")]
    OrbitOutOfRange { orbit: u32, l: u32, u: u32 },
    #[error("orbit weight for orbit {orbit} is negative: {weight}")]
    NegativeWeight { orbit: u32, weight: f64 },
    #[error("orbit weights sum to {sum}, expected 1")]
    WeightSum { sum: f64 },
    #[error("design has no support")]
    EmptySupport,
    #[error("second moment is undefined for a single factor")]
    SingleFactorMoment,
    #[error("information matrix is singular: {0}")]
    SingularInformation(String),
    #[error("orbit enumeration is limited to {max} factors, got {k}")]
    EnumerationTooLarge { k: u32, max: u32 },
    #[error("run count {n} cannot cover the {support} supported orbits")]
    RunCountTooSmall { n: u64, support: usize },
    #[error("construction not applicable: {0}")]
    Infeasible(String),
    #[error("{0}")]
    Parse(String),
    #[error("solver and oracle disagree: {0}")]
    OracleMismatch(String),
}

pub type Result<T> = std::result::Result<T, Error>;

/// Binomial coefficient `C(n, r)` computed exactly in `u64`.
///
/// Panics on overflow; callers keep `n` small (orbit enumeration is capped
/// well below the overflow range).
pub(crate) fn binomial(n: u64, r: u64) -> u64 {
    if r > n {
        return 0;
    }
    let r = r.min(n - r);
    let mut acc: u64 = 1;
    for i in 0..r {
        // Multiply before dividing; the running product of i+1 consecutive
        // binomials is always divisible by i+1.
        acc = acc
            .checked_mul(n - r + 1 + i)
            .expect("binomial overflow")
            / (i + 1);
    }
    acc
}
