//! Independent certification of solved designs: the variance-bound
//! optimality certificate, a simplex-ascent oracle that knows nothing about
//! the closed forms, and the variance inequality that separates narrow from
//! wide margins.

use std::collections::BTreeMap;

use num_rational::Ratio;

use crate::information::{det_information, is_regular, sensitivity_coefficients};
use crate::orbit::{orbit_m1, orbit_m2, OrbitDesign, OrbitSpace};
use crate::solver::{solve, SolutionReport};
use crate::{Error, RationalWeights, Result};

/// Slack allowed when comparing sensitivities against the bound `p`.
pub const DEFAULT_EQUIVALENCE_TOLERANCE: f64 = 1e-9;
/// Oracle stops once its worst sensitivity exceeds `p` by less than this.
pub const DEFAULT_ORACLE_TOLERANCE: f64 = 1e-10;
/// Iteration budget for the oracle.
pub const DEFAULT_ORACLE_MAX_ITER: u64 = 200_000;
/// Oracle weights below this are reported as zero.
pub const ORACLE_WEIGHT_CLAMP: f64 = 1e-12;
/// Allowed relative disagreement between oracle and closed-form
/// determinants.
pub const DETERMINANT_AGREEMENT: f64 = 1e-8;

/// Outcome of the optimality certificate for one design.
///
/// A design is D-optimal exactly when its sensitivity stays at or below
/// `p = K + 1` on every orbit; on support orbits the bound is attained.
/// `pass` requires both, each up to the tolerance the check was run with.
#[derive(Debug, Clone, PartialEq)]
pub struct EquivalenceReport {
    pub max_sensitivity: f64,
    /// Orbit attaining the maximum; ties resolve to the lowest index.
    pub argmax_orbit: u32,
    /// The certificate bound `p = K + 1`.
    pub bound: f64,
    /// `p − ψ̃(k)` for every admissible orbit, support or not.
    pub slack_per_orbit: BTreeMap<u32, f64>,
    pub tolerance: f64,
    pub pass: bool,
}

/// Evaluates the certificate for a design. Fails on singular designs, whose
/// sensitivity is undefined.
pub fn equivalence_check(design: &OrbitDesign, tolerance: f64) -> Result<EquivalenceReport> {
    if !is_regular(design) {
        return Err(Error::SingularInformation(format!(
            "design {design} does not span the model; the certificate needs an invertible \
             information matrix"
        )));
    }
    let space = design.space();
    let factors = space.factors();
    let poly = sensitivity_coefficients(design.moments(), factors)?;
    let bound = factors as f64 + 1.0;

    let mut slack_per_orbit = BTreeMap::new();
    let mut max_sensitivity = f64::NEG_INFINITY;
    let mut argmax_orbit = space.lower();
    for k in space.orbits() {
        let value = poly.at(k);
        slack_per_orbit.insert(k, bound - value);
        if value > max_sensitivity {
            max_sensitivity = value;
            argmax_orbit = k;
        }
    }
    let within_bound = max_sensitivity <= bound + tolerance;
    let support_attains = design
        .support()
        .all(|k| poly.at(k) >= bound - tolerance);
    Ok(EquivalenceReport {
        max_sensitivity,
        argmax_orbit,
        bound,
        slack_per_orbit,
        tolerance,
        pass: within_bound && support_attains,
    })
}

/// What the simplex-ascent oracle found for one instance.
#[derive(Debug, Clone)]
pub struct OracleResult {
    /// Final weights on every admissible orbit; entries below
    /// [`ORACLE_WEIGHT_CLAMP`] are reported as 0.
    pub weights: BTreeMap<u32, f64>,
    pub det: f64,
    pub iterations: u64,
    pub converged: bool,
    /// Determinant after each evaluation, first entry at the uniform start.
    /// The update rule never decreases it.
    pub det_trace: Vec<f64>,
}

/// Maximizes the information determinant over the orbit simplex by
/// multiplicative reweighting: from uniform weights, each orbit's weight is
/// scaled by `ψ̃(k)/p` until the worst sensitivity is within `tol` of the
/// bound or the iteration budget runs out.
///
/// The scaling step never decreases the determinant, so the iteration stays
/// regular once started regular (the uniform start always is: any admissible
/// range of two or more orbits contains an interior one).
pub fn brute_force_solve(space: OrbitSpace, max_iter: u64, tol: f64) -> OracleResult {
    let factors = space.factors();
    assert!(factors >= 2, "the oracle needs at least two factors");
    let orbits: Vec<u32> = space.orbits().collect();
    let m1_per_orbit: Vec<f64> = orbits.iter().map(|&k| orbit_m1(factors, k)).collect();
    let m2_per_orbit: Vec<f64> = orbits.iter().map(|&k| orbit_m2(factors, k)).collect();
    let bound = factors as f64 + 1.0;

    let mut weights = vec![1.0 / orbits.len() as f64; orbits.len()];
    let mut det_trace = Vec::new();
    let mut iterations = 0;
    let mut converged = false;
    loop {
        let moments = crate::orbit::MomentSummary {
            m1: dot(&weights, &m1_per_orbit),
            m2: dot(&weights, &m2_per_orbit),
        };
        det_trace.push(det_information(moments, factors));
        let poly = sensitivity_coefficients(moments, factors)
            .expect("ascent from a regular start stays regular");
        let worst = orbits
            .iter()
            .map(|&k| poly.at(k))
            .fold(f64::NEG_INFINITY, f64::max);
        if worst - bound < tol {
            converged = true;
            break;
        }
        if iterations == max_iter {
            break;
        }
        iterations += 1;
        let mut sum = 0.0;
        for (w, &k) in weights.iter_mut().zip(&orbits) {
            *w *= poly.at(k) / bound;
            sum += *w;
        }
        for w in &mut weights {
            *w /= sum;
        }
    }

    let reported = orbits
        .iter()
        .zip(&weights)
        .map(|(&k, &w)| (k, if w < ORACLE_WEIGHT_CLAMP { 0.0 } else { w }))
        .collect();
    OracleResult {
        weights: reported,
        det: *det_trace.last().expect("at least one evaluation"),
        iterations,
        converged,
        det_trace,
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Variance bound for the centered high-level count `2d(x) − K`: on any
/// design over the region, the variance is at most
/// `(max − mean)(mean − min)` with `max = 2U − K` and `min = 2L − K`.
///
/// The check always holds; it is exposed so property suites can assert it
/// across sampled designs. A small slack absorbs float rounding.
pub fn bhatia_davis_check(design: &OrbitDesign) -> bool {
    let space = design.space();
    let factors = space.factors() as f64;
    let mean: f64 = design
        .weights()
        .iter()
        .map(|(&k, &w)| w * (2.0 * k as f64 - factors))
        .sum();
    let second: f64 = design
        .weights()
        .iter()
        .map(|(&k, &w)| {
            let centered = 2.0 * k as f64 - factors;
            w * centered * centered
        })
        .sum();
    let variance = second - mean * mean;
    let top = 2.0 * space.upper() as f64 - factors;
    let bottom = 2.0 * space.lower() as f64 - factors;
    variance <= (top - mean) * (mean - bottom) + 1e-9
}

/// Exact-arithmetic form of [`bhatia_davis_check`] for rational weights on
/// the simplex over `L..=U`.
pub fn bhatia_davis_check_exact(space: OrbitSpace, weights: &RationalWeights) -> bool {
    let factors = space.factors() as i64;
    let mut mean = Ratio::from_integer(0);
    let mut second = Ratio::from_integer(0);
    for (&k, &w) in weights {
        let centered = Ratio::from_integer(2 * k as i64 - factors);
        mean += w * centered;
        second += w * centered * centered;
    }
    let variance = second - mean * mean;
    let top = Ratio::from_integer(2 * space.upper() as i64 - factors);
    let bottom = Ratio::from_integer(2 * space.lower() as i64 - factors);
    variance <= (top - mean) * (mean - bottom)
}

/// A solved instance next to what the oracle found for it.
#[derive(Debug, Clone)]
pub struct CrossValidation {
    pub solution: SolutionReport,
    pub oracle: OracleResult,
    /// `|det_closed − det_oracle| / det_closed`.
    pub relative_gap: f64,
}

/// Runs the closed-form solver and the oracle on the same instance and
/// demands agreement: determinants within [`DETERMINANT_AGREEMENT`] relative
/// and a passing certificate on the closed-form design.
pub fn cross_validate(space: OrbitSpace) -> Result<CrossValidation> {
    let solution = solve(space);
    let oracle = brute_force_solve(space, DEFAULT_ORACLE_MAX_ITER, DEFAULT_ORACLE_TOLERANCE);
    let det_closed = det_information(solution.design.moments(), space.factors());
    let relative_gap = (det_closed - oracle.det).abs() / det_closed;
    if relative_gap > DETERMINANT_AGREEMENT {
        return Err(Error::OracleMismatch(format!(
            "{space}: closed form {} (det {det_closed}) vs oracle {:?} (det {})",
            solution.design, oracle.weights, oracle.det
        )));
    }
    if !solution.certificate.pass {
        return Err(Error::OracleMismatch(format!(
            "{space}: closed-form design fails its certificate: {:?}",
            solution.certificate
        )));
    }
    Ok(CrossValidation {
        solution,
        oracle,
        relative_gap,
    })
}
