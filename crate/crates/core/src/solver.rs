//! Closed-form D-optimal designs for every restricted region.
//!
//! The margin product `(K − 2L)(2U − K)` decides the shape of the optimum.
//! Below `K` (narrow margins) the optimal design splits its mass between the
//! two boundary orbits, with an irrational weight in general. At `K` and
//! above (boundary and wide margins) designs with vanishing moments exist;
//! they reach full-factorial efficiency and have rational weights.

use std::fmt;

use num_rational::Ratio;

use crate::information::d_efficiency;
use crate::orbit::{OrbitDesign, OrbitSpace};
use crate::verify::{equivalence_check, EquivalenceReport, DEFAULT_EQUIVALENCE_TOLERANCE};
use crate::{Error, RationalWeights, Result};

/// Margin classification: the sign of `(K − 2L)(2U − K) − K`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RegionCase {
    Narrow,
    Boundary,
    Wide,
}

impl RegionCase {
    pub fn label(&self) -> &'static str {
        match self {
            RegionCase::Narrow => "narrow",
            RegionCase::Boundary => "boundary",
            RegionCase::Wide => "wide",
        }
    }
}

impl fmt::Display for RegionCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Which closed form produced a design.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Construction {
    TwoOrbit,
    BoundaryTwoOrbit,
    ThreeOrbit,
    FourOrbitSymmetric,
    TrivialSingleFactor,
}

impl Construction {
    pub fn label(&self) -> &'static str {
        match self {
            Construction::TwoOrbit => "two-orbit",
            Construction::BoundaryTwoOrbit => "boundary-two-orbit",
            Construction::ThreeOrbit => "three-orbit",
            Construction::FourOrbitSymmetric => "four-orbit-symmetric",
            Construction::TrivialSingleFactor => "trivial-K1",
        }
    }
}

impl fmt::Display for Construction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// A solved instance: the optimal design, how it was built, and its
/// certificate.
#[derive(Debug, Clone)]
pub struct SolutionReport {
    pub design: OrbitDesign,
    pub case: RegionCase,
    pub discriminant: i64,
    pub construction: Construction,
    pub efficiency: f64,
    pub certificate: EquivalenceReport,
    /// Exact weights where the construction is rational (boundary and wide
    /// margins and the single-factor case); `None` for narrow margins.
    pub exact_weights: Option<RationalWeights>,
}

/// Integer value of `(K − 2L)(2U − K) − K`.
pub fn margin_discriminant(space: OrbitSpace) -> i64 {
    let k = space.factors() as i64;
    let l = space.lower() as i64;
    let u = space.upper() as i64;
    (k - 2 * l) * (2 * u - k) - k
}

/// Exact case split. Needs two factors; a single factor is handled by the
/// [`solve`] special case.
pub fn region_case(space: OrbitSpace) -> RegionCase {
    assert!(space.factors() >= 2, "case split needs at least two factors");
    match margin_discriminant(space) {
        d if d < 0 => RegionCase::Narrow,
        0 => RegionCase::Boundary,
        _ => RegionCase::Wide,
    }
}

/// Optimal boundary-orbit weight `w̄_L*` under narrow margins.
///
/// Returns exactly `1/2` when `L + U = K` (the closed form degenerates to
/// 0/0 there). Otherwise evaluates the closed form literally; the sign of
/// `L + U − K` flips both numerator and denominator, so the quotient stays
/// in `(0, 1)`. All products are of small integers, so the only rounding
/// happens in the square root and the final division.
pub fn two_orbit_weight(space: OrbitSpace) -> Result<f64> {
    require_case(space, RegionCase::Narrow)?;
    let k = space.factors() as i64;
    let l = space.lower() as i64;
    let u = space.upper() as i64;
    if l + u == k {
        return Ok(0.5);
    }
    let span = u - l;
    let excess = l + u - k;
    let radicand = (span * span * excess * excess * k * k + 4 * l * (k - l) * u * (k - u)) as f64;
    let numerator = (span * excess * k - 2 * u * (k - u)) as f64 + radicand.sqrt();
    let denominator = (2 * span * excess * (k + 1)) as f64;
    Ok(numerator / denominator)
}

/// Narrow-margin optimum: all mass on the two boundary orbits.
pub fn solve_narrow(space: OrbitSpace) -> Result<OrbitDesign> {
    let w = two_orbit_weight(space)?;
    OrbitDesign::new(
        space,
        [(space.lower(), w), (space.upper(), 1.0 - w)].into(),
    )
}

/// Interior orbit for the three-orbit construction.
///
/// Even `K` takes `K/2`. Odd `K` takes `(K−1)/2` when `L` sits strictly
/// below `(K − √K)/2`, else `(K+1)/2` when `U` sits strictly above
/// `(K + √K)/2`; when both hold, the lower orbit wins. Boundary-margin
/// instances can meet both comparisons only with equality, where either
/// choice carries zero weight; the same preference order is applied with
/// the comparisons relaxed. All comparisons are exact in integers.
pub fn interior_orbit(space: OrbitSpace) -> Result<u32> {
    assert!(space.factors() >= 2, "no interior orbit with fewer than two factors");
    if region_case(space) == RegionCase::Narrow {
        return Err(Error::Infeasible(format!(
            "no zero-moment three-orbit design exists for narrow margins ({space})"
        )));
    }
    let k = space.factors() as i64;
    let l = space.lower() as i64;
    let u = space.upper() as i64;
    if k % 2 == 0 {
        return Ok((k / 2) as u32);
    }
    let low_gap = k - 2 * l;
    let high_gap = 2 * u - k;
    let choice = if low_gap > 0 && low_gap * low_gap > k {
        (k - 1) / 2
    } else if high_gap > 0 && high_gap * high_gap > k {
        (k + 1) / 2
    } else if low_gap > 0 && low_gap * low_gap >= k {
        (k - 1) / 2
    } else {
        (k + 1) / 2
    };
    Ok(choice as u32)
}

/// Exact weights of the canonical zero-moment design for boundary or wide
/// margins: a two-orbit split on the boundary orbits when the margin product
/// equals `K`, otherwise the three-orbit construction on `{L, ℓ, U}`.
/// Zero weights are omitted.
pub fn wide_weights_exact(space: OrbitSpace) -> Result<RationalWeights> {
    let k = space.factors() as i64;
    let l = space.lower() as i64;
    let u = space.upper() as i64;
    match region_case(space) {
        RegionCase::Narrow => Err(Error::Infeasible(format!(
            "margins are narrow for {space}; the zero-moment construction does not apply"
        ))),
        RegionCase::Boundary => {
            let mut weights = RationalWeights::new();
            weights.insert(space.lower(), Ratio::new(2 * u - k, 2 * (u - l)));
            weights.insert(space.upper(), Ratio::new(k - 2 * l, 2 * (u - l)));
            Ok(weights)
        }
        RegionCase::Wide => {
            let mid = interior_orbit(space)? as i64;
            three_orbit_weights(k, l, mid, u)
        }
    }
}

/// Boundary- or wide-margin optimum with exact rational weights.
pub fn solve_wide(space: OrbitSpace) -> Result<OrbitDesign> {
    OrbitDesign::from_rational(space, &wide_weights_exact(space)?)
}

fn three_orbit_weights(k: i64, low: i64, mid: i64, high: i64) -> Result<RationalWeights> {
    let w_low = Ratio::new(k + (2 * mid - k) * (2 * high - k), 4 * (mid - low) * (high - low));
    let w_high = Ratio::new(k + (2 * low - k) * (2 * mid - k), 4 * (high - mid) * (high - low));
    let w_mid = Ratio::from_integer(1) - w_low - w_high;
    let zero = Ratio::from_integer(0);
    let mut weights = RationalWeights::new();
    for (orbit, w) in [(low, w_low), (mid, w_mid), (high, w_high)] {
        if w != zero {
            weights.insert(orbit as u32, w);
        }
    }
    Ok(weights)
}

/// Zero-moment three-orbit design on a caller-chosen orbit triple
/// `low < mid < high` inside the region. Feasibility of each weight is an
/// exact integer inequality; the failing one is reported.
pub fn general_three_orbit(
    space: OrbitSpace,
    low: u32,
    mid: u32,
    high: u32,
) -> Result<OrbitDesign> {
    OrbitDesign::from_rational(space, &general_three_orbit_exact(space, low, mid, high)?)
}

/// Exact weights behind [`general_three_orbit`].
pub fn general_three_orbit_exact(
    space: OrbitSpace,
    low: u32,
    mid: u32,
    high: u32,
) -> Result<RationalWeights> {
    if !(space.lower() <= low && low < mid && mid < high && high <= space.upper()) {
        return Err(Error::Infeasible(format!(
            "orbit triple ({low}, {mid}, {high}) must be strictly increasing inside \
             [{}, {}]",
            space.lower(),
            space.upper()
        )));
    }
    let k = space.factors() as i64;
    let (lo, mi, hi) = (low as i64, mid as i64, high as i64);
    // Each inequality keeps one weight non-negative: the first the middle
    // orbit's, the second the low orbit's, the third the high orbit's.
    if (k - 2 * lo) * (2 * hi - k) < k {
        return Err(Error::Infeasible(format!(
            "(K - 2*{low})(2*{high} - K) = {} falls below K = {k}",
            (k - 2 * lo) * (2 * hi - k)
        )));
    }
    if (2 * mi - k) * (2 * hi - k) < -k {
        return Err(Error::Infeasible(format!(
            "(2*{mid} - K)(2*{high} - K) = {} falls below -K = {}",
            (2 * mi - k) * (2 * hi - k),
            -k
        )));
    }
    if (2 * lo - k) * (2 * mi - k) < -k {
        return Err(Error::Infeasible(format!(
            "(2*{low} - K)(2*{mid} - K) = {} falls below -K = {}",
            (2 * lo - k) * (2 * mi - k),
            -k
        )));
    }
    three_orbit_weights(k, lo, mi, hi)
}

/// Zero-moment design symmetric around `K/2`, supported on the orbit
/// quadruple `(k1, k2, K−k2, K−k1)`.
///
/// The admissible window, checked exactly in integers: `k1` must sit
/// strictly below `(K − √K)/2` and at or above `L` with its mirror `K − k1`
/// inside the region; `k2` must lie in `[(K − √K)/2, K/2]`. At the lower
/// `k2` boundary the outer weight vanishes (two-orbit degenerate); at
/// `k2 = K/2` the two middle orbits coincide (three distinct orbits).
pub fn symmetric_four_orbit(space: OrbitSpace, k1: u32, k2: u32) -> Result<OrbitDesign> {
    OrbitDesign::from_rational(space, &symmetric_four_orbit_exact(space, k1, k2)?)
}

/// Exact weights behind [`symmetric_four_orbit`].
pub fn symmetric_four_orbit_exact(
    space: OrbitSpace,
    k1: u32,
    k2: u32,
) -> Result<RationalWeights> {
    let k = space.factors() as i64;
    let (a, b) = (k1 as i64, k2 as i64);
    if (k1 as i64) < space.lower() as i64 || (k - a) > space.upper() as i64 {
        return Err(Error::Infeasible(format!(
            "outer orbits {k1} and {} must lie inside [{}, {}]",
            k - a,
            space.lower(),
            space.upper()
        )));
    }
    let outer_gap = k - 2 * a;
    if outer_gap <= 0 || outer_gap * outer_gap <= k {
        return Err(Error::Infeasible(format!(
            "outer orbit {k1} must sit strictly below (K - sqrt(K))/2"
        )));
    }
    let inner_gap = k - 2 * b;
    if inner_gap < 0 || inner_gap * inner_gap > k {
        return Err(Error::Infeasible(format!(
            "inner orbit {k2} must lie between (K - sqrt(K))/2 and K/2"
        )));
    }
    let w_outer = Ratio::new(k - inner_gap * inner_gap, 8 * (b - a) * (k - a - b));
    let w_inner = Ratio::new(1, 2) - w_outer;
    let zero = Ratio::from_integer(0);
    let mut weights = RationalWeights::new();
    for (orbit, w) in [(a, w_outer), (k - a, w_outer)] {
        if w != zero {
            weights.insert(orbit as u32, w);
        }
    }
    if b * 2 == k {
        // The two middle orbits coincide; their mass merges.
        weights.insert(b as u32, w_inner * 2);
    } else {
        weights.insert(b as u32, w_inner);
        weights.insert((k - b) as u32, w_inner);
    }
    Ok(weights)
}

/// Solves an instance and certifies the result.
///
/// Narrow margins take the two-orbit closed form; boundary and wide margins
/// take the rational zero-moment construction, whose efficiency is exactly
/// one. A single factor admits only the half/half design. Every returned
/// design has passed the optimality certificate; a failure here would be a
/// bug, not an input error, so it panics.
pub fn solve(space: OrbitSpace) -> SolutionReport {
    if space.factors() == 1 {
        let mut weights = RationalWeights::new();
        weights.insert(0, Ratio::new(1, 2));
        weights.insert(1, Ratio::new(1, 2));
        let design = OrbitDesign::from_rational(space, &weights)
            .expect("half/half single-factor design is always valid");
        return finish_report(
            space,
            design,
            RegionCase::Boundary,
            Construction::TrivialSingleFactor,
            Some(weights),
        );
    }
    let case = region_case(space);
    match case {
        RegionCase::Narrow => {
            let design = solve_narrow(space).expect("narrow construction is total on its case");
            finish_report(space, design, case, Construction::TwoOrbit, None)
        }
        RegionCase::Boundary | RegionCase::Wide => {
            let weights =
                wide_weights_exact(space).expect("zero-moment construction is total on its case");
            let design = OrbitDesign::from_rational(space, &weights)
                .expect("construction weights are a probability vector");
            let construction = if case == RegionCase::Boundary {
                Construction::BoundaryTwoOrbit
            } else {
                Construction::ThreeOrbit
            };
            finish_report(space, design, case, construction, Some(weights))
        }
    }
}

/// Report for a caller-chosen symmetric four-orbit construction, certified
/// like [`solve`]'s output. The selection must be feasible.
pub fn symmetric_four_orbit_report(
    space: OrbitSpace,
    k1: u32,
    k2: u32,
) -> Result<SolutionReport> {
    let weights = symmetric_four_orbit_exact(space, k1, k2)?;
    let design = OrbitDesign::from_rational(space, &weights)?;
    Ok(finish_report(
        space,
        design,
        region_case(space),
        Construction::FourOrbitSymmetric,
        Some(weights),
    ))
}

fn finish_report(
    space: OrbitSpace,
    design: OrbitDesign,
    case: RegionCase,
    construction: Construction,
    exact_weights: Option<RationalWeights>,
) -> SolutionReport {
    let efficiency = match exact_weights {
        // The rational constructions have exactly vanishing moments, hence
        // an identity information matrix and unit efficiency; asserting the
        // moments here keeps that claim checked.
        Some(ref weights) => {
            if space.factors() >= 2 {
                let (m1, m2) = crate::orbit::design_moments_exact(space.factors(), weights);
                assert!(
                    m1 == Ratio::from_integer(0) && m2 == Ratio::from_integer(0),
                    "rational construction must have vanishing moments, got ({m1}, {m2})"
                );
            }
            1.0
        }
        None => d_efficiency(&design),
    };
    let certificate = equivalence_check(&design, DEFAULT_EQUIVALENCE_TOLERANCE)
        .expect("solved designs are regular");
    assert!(
        certificate.pass,
        "optimality certification failed for {space}: max sensitivity {} at orbit {}",
        certificate.max_sensitivity, certificate.argmax_orbit
    );
    SolutionReport {
        design,
        case,
        discriminant: margin_discriminant(space),
        construction,
        efficiency,
        certificate,
        exact_weights,
    }
}

fn require_case(space: OrbitSpace, wanted: RegionCase) -> Result<()> {
    let actual = region_case(space);
    if actual != wanted {
        return Err(Error::Infeasible(format!(
            "{space} has {actual} margins, construction needs {wanted}"
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::orbit::design_moments_exact;
    use approx::assert_relative_eq;

    fn space(k: u32, l: u32, u: u32) -> OrbitSpace {
        OrbitSpace::new(k, l, u).unwrap()
    }

    #[test]
    fn case_split() {
        assert_eq!(region_case(space(6, 2, 4)), RegionCase::Narrow);
        assert_eq!(margin_discriminant(space(6, 2, 4)), -2);
        assert_eq!(region_case(space(4, 0, 3)), RegionCase::Wide);
        assert_eq!(margin_discriminant(space(4, 0, 3)), 4);
        assert_eq!(region_case(space(4, 1, 3)), RegionCase::Boundary);
        assert_eq!(margin_discriminant(space(4, 1, 3)), 0);
        assert_eq!(region_case(space(2, 0, 1)), RegionCase::Narrow);
        assert_eq!(region_case(space(9, 0, 5)), RegionCase::Boundary);
    }

    #[test]
    fn two_orbit_weight_values() {
        assert_relative_eq!(
            two_orbit_weight(space(6, 1, 3)).unwrap(),
            0.259_009_7,
            max_relative = 1e-6
        );
        assert_relative_eq!(
            two_orbit_weight(space(9, 2, 4)).unwrap(),
            0.253_920_6,
            max_relative = 1e-6
        );
        // With L = 0 every intermediate value is exact, so the closed form
        // collapses to 1/(K+1) without rounding residue.
        assert_eq!(two_orbit_weight(space(4, 0, 2)).unwrap(), 0.2);
        assert_eq!(two_orbit_weight(space(2, 0, 1)).unwrap(), 1.0 / 3.0);
        // Mirror situation at U = K: K/(K+1).
        assert_eq!(two_orbit_weight(space(2, 1, 2)).unwrap(), 2.0 / 3.0);
        assert_eq!(two_orbit_weight(space(3, 2, 3)).unwrap(), 0.75);
        // Symmetric bounds split evenly.
        assert_eq!(two_orbit_weight(space(5, 2, 3)).unwrap(), 0.5);
        assert_eq!(two_orbit_weight(space(9, 4, 5)).unwrap(), 0.5);

        assert!(matches!(
            two_orbit_weight(space(4, 0, 3)),
            Err(Error::Infeasible(_))
        ));
    }

    #[test]
    fn two_orbit_weight_is_even_in_the_upper_margin() {
        // Determinants depend on the upper orbit only through (2U - K)², so
        // mirror choices of U around K/2 share the same optimal weight.
        assert_eq!(
            two_orbit_weight(space(9, 1, 4)).unwrap(),
            two_orbit_weight(space(9, 1, 5)).unwrap()
        );
        assert_eq!(
            two_orbit_weight(space(9, 2, 4)).unwrap(),
            two_orbit_weight(space(9, 2, 5)).unwrap()
        );
        assert_eq!(
            two_orbit_weight(space(12, 4, 5)).unwrap(),
            two_orbit_weight(space(12, 4, 7)).unwrap()
        );
    }

    #[test]
    fn narrow_designs() {
        let d = solve_narrow(space(2, 0, 1)).unwrap();
        assert_eq!(d.weight(0), 1.0 / 3.0);
        assert_relative_eq!(d.weight(1), 2.0 / 3.0, max_relative = 1e-15);

        let d = solve_narrow(space(5, 2, 3)).unwrap();
        assert_eq!(d.weight(2), 0.5);
        assert_eq!(d.weight(3), 0.5);

        let d = solve_narrow(space(9, 4, 5)).unwrap();
        assert_eq!(d.support().collect::<Vec<_>>(), vec![4, 5]);
    }

    #[test]
    fn interior_orbit_selection() {
        assert_eq!(interior_orbit(space(4, 0, 3)).unwrap(), 2);
        assert_eq!(interior_orbit(space(6, 0, 6)).unwrap(), 3);
        assert_eq!(interior_orbit(space(9, 1, 6)).unwrap(), 4);
        assert_eq!(interior_orbit(space(5, 0, 4)).unwrap(), 2);
        assert_eq!(interior_orbit(space(9, 0, 9)).unwrap(), 4);
        // Boundary-margin instances still pick a middle orbit so renderings
        // can show where the vanished weight would sit.
        assert_eq!(interior_orbit(space(4, 1, 3)).unwrap(), 2);
        assert_eq!(interior_orbit(space(3, 0, 2)).unwrap(), 1);
        assert_eq!(interior_orbit(space(9, 3, 6)).unwrap(), 4);
        assert!(interior_orbit(space(6, 2, 4)).is_err());
    }

    #[test]
    fn wide_designs_exact_weights() {
        let w = wide_weights_exact(space(4, 0, 3)).unwrap();
        assert_eq!(w[&0], Ratio::new(1, 6));
        assert_eq!(w[&2], Ratio::new(1, 2));
        assert_eq!(w[&3], Ratio::new(1, 3));

        let w = wide_weights_exact(space(6, 1, 5)).unwrap();
        assert_eq!(w[&1], Ratio::new(3, 16));
        assert_eq!(w[&3], Ratio::new(5, 8));
        assert_eq!(w[&5], Ratio::new(3, 16));

        // Boundary margins drop the middle orbit.
        let w = wide_weights_exact(space(4, 1, 3)).unwrap();
        assert_eq!(w.len(), 2);
        assert_eq!(w[&1], Ratio::new(1, 2));
        assert_eq!(w[&3], Ratio::new(1, 2));

        let w = wide_weights_exact(space(9, 0, 5)).unwrap();
        assert_eq!(w[&0], Ratio::new(1, 10));
        assert_eq!(w[&5], Ratio::new(9, 10));

        // Wide margins can zero a boundary orbit instead.
        let w = wide_weights_exact(space(3, 0, 3)).unwrap();
        assert_eq!(w.len(), 2);
        assert_eq!(w[&1], Ratio::new(3, 4));
        assert_eq!(w[&3], Ratio::new(1, 4));

        assert!(wide_weights_exact(space(6, 2, 4)).is_err());
    }

    #[test]
    fn wide_designs_have_vanishing_moments() {
        for (k, l, u) in [
            (2, 0, 2),
            (3, 0, 2),
            (3, 0, 3),
            (4, 0, 3),
            (4, 0, 4),
            (4, 1, 3),
            (6, 0, 5),
            (9, 0, 9),
            (9, 2, 7),
            (12, 1, 11),
        ] {
            let w = wide_weights_exact(space(k, l, u)).unwrap();
            let (m1, m2) = design_moments_exact(k, &w);
            assert_eq!(m1, Ratio::from_integer(0), "m1 for ({k},{l},{u})");
            assert_eq!(m2, Ratio::from_integer(0), "m2 for ({k},{l},{u})");
        }
    }

    #[test]
    fn general_three_orbit_triples() {
        let d = general_three_orbit(space(6, 0, 6), 1, 3, 5).unwrap();
        assert_eq!(d.weight(1), 3.0 / 16.0);
        assert_eq!(d.weight(3), 0.625);
        assert_eq!(d.weight(5), 3.0 / 16.0);

        let w = general_three_orbit_exact(space(4, 0, 4), 0, 2, 4).unwrap();
        assert_eq!(w[&0], Ratio::new(1, 8));
        assert_eq!(w[&2], Ratio::new(3, 4));
        assert_eq!(w[&4], Ratio::new(1, 8));

        // A feasible triple may put zero weight on its middle orbit.
        let w = general_three_orbit_exact(space(9, 0, 9), 0, 4, 5).unwrap();
        assert_eq!(w.len(), 2);
        assert_eq!(w[&0], Ratio::new(1, 10));
        assert_eq!(w[&5], Ratio::new(9, 10));

        // Narrow triples violate the first feasibility inequality.
        let err = general_three_orbit_exact(space(6, 2, 4), 2, 3, 4).unwrap_err();
        assert!(matches!(err, Error::Infeasible(_)));

        assert!(general_three_orbit_exact(space(6, 0, 6), 3, 3, 5).is_err());
        assert!(general_three_orbit_exact(space(6, 1, 5), 0, 3, 5).is_err());
    }

    #[test]
    fn symmetric_four_orbit_quadruples() {
        let d = symmetric_four_orbit(space(5, 0, 4), 1, 2).unwrap();
        for orbit in [1, 2, 3, 4] {
            assert_eq!(d.weight(orbit), 0.25);
        }

        let w = symmetric_four_orbit_exact(space(9, 0, 9), 2, 4).unwrap();
        assert_eq!(w[&2], Ratio::new(1, 6));
        assert_eq!(w[&4], Ratio::new(1, 3));
        assert_eq!(w[&5], Ratio::new(1, 3));
        assert_eq!(w[&7], Ratio::new(1, 6));

        // Lower k2 boundary: the outer weight vanishes.
        let w = symmetric_four_orbit_exact(space(4, 0, 4), 0, 1).unwrap();
        assert_eq!(w.len(), 2);
        assert_eq!(w[&1], Ratio::new(1, 2));
        assert_eq!(w[&3], Ratio::new(1, 2));

        // k2 = K/2: middle orbits merge.
        let w = symmetric_four_orbit_exact(space(2, 0, 2), 0, 1).unwrap();
        assert_eq!(w[&0], Ratio::new(1, 4));
        assert_eq!(w[&1], Ratio::new(1, 2));
        assert_eq!(w[&2], Ratio::new(1, 4));

        let w = symmetric_four_orbit_exact(space(6, 0, 6), 0, 3).unwrap();
        assert_eq!(w[&0], Ratio::new(1, 12));
        assert_eq!(w[&3], Ratio::new(5, 6));
        assert_eq!(w[&6], Ratio::new(1, 12));

        // Window violations.
        assert!(symmetric_four_orbit_exact(space(6, 0, 6), 2, 3).is_err());
        assert!(symmetric_four_orbit_exact(space(6, 0, 5), 0, 2).is_err());
        assert!(symmetric_four_orbit_exact(space(5, 0, 5), 1, 3).is_err());
        assert!(symmetric_four_orbit_exact(space(6, 0, 6), 1, 1).is_err());

        // Exact moments vanish for every feasible quadruple.
        for (k, l, u, k1, k2) in [(3, 0, 3, 0, 1), (9, 0, 8, 1, 4), (6, 1, 5, 1, 2)] {
            let w = symmetric_four_orbit_exact(space(k, l, u), k1, k2).unwrap();
            let (m1, m2) = design_moments_exact(k, &w);
            assert_eq!(m1, Ratio::from_integer(0));
            assert_eq!(m2, Ratio::from_integer(0));
        }
    }

    #[test]
    fn solve_dispatch() {
        let narrow = solve(space(6, 2, 4));
        assert_eq!(narrow.case, RegionCase::Narrow);
        assert_eq!(narrow.construction, Construction::TwoOrbit);
        assert_eq!(narrow.design.weight(2), 0.5);
        assert_eq!(narrow.design.weight(4), 0.5);
        assert!(narrow.exact_weights.is_none());
        assert_relative_eq!(narrow.efficiency, 0.988_245, max_relative = 1e-6);
        assert!(narrow.certificate.pass);

        let wide = solve(space(6, 0, 6));
        assert_eq!(wide.case, RegionCase::Wide);
        assert_eq!(wide.construction, Construction::ThreeOrbit);
        assert_eq!(wide.efficiency, 1.0);
        let exact = wide.exact_weights.unwrap();
        assert_eq!(exact[&0], Ratio::new(1, 12));
        assert_eq!(exact[&3], Ratio::new(5, 6));
        assert_eq!(exact[&6], Ratio::new(1, 12));

        let boundary = solve(space(4, 1, 3));
        assert_eq!(boundary.case, RegionCase::Boundary);
        assert_eq!(boundary.construction, Construction::BoundaryTwoOrbit);
        assert_eq!(boundary.efficiency, 1.0);

        let trivial = solve(space(1, 0, 1));
        assert_eq!(trivial.construction, Construction::TrivialSingleFactor);
        assert_eq!(trivial.design.weight(0), 0.5);
        assert_eq!(trivial.design.weight(1), 0.5);
        assert_eq!(trivial.efficiency, 1.0);
        assert_eq!(trivial.certificate.max_sensitivity, 2.0);
        assert!(trivial.certificate.pass);
    }

    #[test]
    fn four_orbit_report_is_certified() {
        let report = symmetric_four_orbit_report(space(9, 0, 9), 2, 4).unwrap();
        assert_eq!(report.construction, Construction::FourOrbitSymmetric);
        assert_eq!(report.efficiency, 1.0);
        assert!(report.certificate.pass);
        assert!(symmetric_four_orbit_report(space(6, 0, 6), 2, 3).is_err());
    }
}
