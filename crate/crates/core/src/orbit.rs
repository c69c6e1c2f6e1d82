//! The restricted design region, its orbits under factor permutation, and
//! invariant designs as weight vectors over orbit indices.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::RangeInclusive;

use itertools::Itertools;
use num_rational::Ratio;

use crate::{binomial, Error, RationalWeights, Result};

/// How far a weight sum may drift from 1 before a design is rejected.
pub const WEIGHT_SUM_TOLERANCE: f64 = 1e-12;

/// Enumeration is capped at this many factors; beyond it a single orbit can
/// exceed 155 million points.
pub const MAX_ENUMERABLE_FACTORS: u32 = 30;

/// A two-level design region restricted by the number of high levels per run:
/// runs over `K` factors whose count of `+1` entries lies in `[L, U]`.
///
/// `L = U` is rejected because a single orbit never spans a full-rank model
/// matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct OrbitSpace {
    k: u32,
    l: u32,
    u: u32,
}

impl OrbitSpace {
    pub fn new(factors: u32, lower: u32, upper: u32) -> Result<Self> {
        if factors < 1 {
            return Err(Error::NoFactors(factors));
        }
        if lower >= upper || upper > factors {
            return Err(Error::InvalidBounds {
                k: factors,
                l: lower,
                u: upper,
            });
        }
        Ok(OrbitSpace {
            k: factors,
            l: lower,
            u: upper,
        })
    }

    pub fn factors(&self) -> u32 {
        self.k
    }

    pub fn lower(&self) -> u32 {
        self.l
    }

    pub fn upper(&self) -> u32 {
        self.u
    }

    /// Admissible orbit indices, ascending.
    pub fn orbits(&self) -> RangeInclusive<u32> {
        self.l..=self.u
    }

    /// Number of design points in orbit `k`, exactly `C(K, k)`.
    pub fn orbit_size(&self, k: u32) -> Result<u64> {
        if k < self.l || k > self.u {
            return Err(Error::OrbitOutOfRange {
                orbit: k,
                l: self.l,
                u: self.u,
            });
        }
        Ok(binomial(self.k as u64, k as u64))
    }

    /// Total number of admissible design points.
    pub fn region_size(&self) -> u64 {
        self.orbits()
            .map(|k| binomial(self.k as u64, k as u64))
            .sum()
    }
}

impl fmt::Display for OrbitSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "K={}, L={}, U={}", self.k, self.l, self.u)
    }
}

/// One run: a `±1` assignment to every factor.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DesignPoint {
    coords: Vec<i8>,
}

impl DesignPoint {
    pub fn new(coords: Vec<i8>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::Parse("design point has no coordinates".into()));
        }
        if let Some(bad) = coords.iter().find(|c| **c != 1 && **c != -1) {
            return Err(Error::Parse(format!(
                "design point coordinates must be +1 or -1, got {bad}"
            )));
        }
        Ok(DesignPoint { coords })
    }

    pub fn coords(&self) -> &[i8] {
        &self.coords
    }

    pub fn factors(&self) -> u32 {
        self.coords.len() as u32
    }

    /// Number of `+1` entries; the orbit this point belongs to.
    pub fn active_count(&self) -> u32 {
        self.coords.iter().filter(|c| **c == 1).count() as u32
    }
}

impl fmt::Display for DesignPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let row = self
            .coords
            .iter()
            .map(|c| if *c == 1 { "+" } else { "-" })
            .join(" ");
        write!(f, "{row}")
    }
}

/// All `C(K, k)` points with exactly `k` high entries, ordered
/// lexicographically by the index set of their `+1` positions.
pub fn enumerate_orbit(factors: u32, k: u32) -> Result<Vec<DesignPoint>> {
    if factors < 1 {
        return Err(Error::NoFactors(factors));
    }
    if factors > MAX_ENUMERABLE_FACTORS {
        return Err(Error::EnumerationTooLarge {
            k: factors,
            max: MAX_ENUMERABLE_FACTORS,
        });
    }
    assert!(k <= factors, "orbit index {k} exceeds factor count {factors}");
    let points = (0..factors as usize)
        .combinations(k as usize)
        .map(|high| {
            let mut coords = vec![-1i8; factors as usize];
            for idx in high {
                coords[idx] = 1;
            }
            DesignPoint { coords }
        })
        .collect();
    Ok(points)
}

/// First diagonal moment of the uniform design on orbit `k`: the mean of any
/// single coordinate, `(2k − K)/K`.
pub fn orbit_m1(factors: u32, k: u32) -> f64 {
    assert!(factors >= 1, "need at least one factor");
    assert!(k <= factors, "orbit index {k} exceeds factor count {factors}");
    (2 * k as i64 - factors as i64) as f64 / factors as f64
}

/// Mixed moment of the uniform design on orbit `k`: the mean of any product
/// of two distinct coordinates, `((2k − K)² − K)/(K(K − 1))`.
///
/// Undefined for a single factor (no coordinate pairs exist).
pub fn orbit_m2(factors: u32, k: u32) -> f64 {
    assert!(factors >= 2, "mixed moments need at least two factors");
    assert!(k <= factors, "orbit index {k} exceeds factor count {factors}");
    let centered = 2 * k as i64 - factors as i64;
    ((centered * centered - factors as i64) as f64)
        / ((factors as i64 * (factors as i64 - 1)) as f64)
}

/// An invariant design: a probability vector over the orbits of a space.
/// Zero weights are dropped on construction, so the stored keys are exactly
/// the support.
#[derive(Debug, Clone, PartialEq)]
pub struct OrbitDesign {
    space: OrbitSpace,
    weights: BTreeMap<u32, f64>,
}

impl OrbitDesign {
    pub fn new(space: OrbitSpace, weights: BTreeMap<u32, f64>) -> Result<Self> {
        let mut kept = BTreeMap::new();
        let mut sum = 0.0;
        for (&k, &w) in &weights {
            if k < space.lower() || k > space.upper() {
                return Err(Error::OrbitOutOfRange {
                    orbit: k,
                    l: space.lower(),
                    u: space.upper(),
                });
            }
            if w < 0.0 {
                return Err(Error::NegativeWeight { orbit: k, weight: w });
            }
            sum += w;
            if w > 0.0 {
                kept.insert(k, w);
            }
        }
        if kept.is_empty() {
            return Err(Error::EmptySupport);
        }
        if (sum - 1.0).abs() > WEIGHT_SUM_TOLERANCE {
            return Err(Error::WeightSum { sum });
        }
        Ok(OrbitDesign {
            space,
            weights: kept,
        })
    }

    /// Builds a design from exact rational weights; they must sum to 1.
    pub fn from_rational(space: OrbitSpace, weights: &RationalWeights) -> Result<Self> {
        let sum: Ratio<i64> = weights.values().sum();
        if sum != Ratio::from_integer(1) {
            return Err(Error::WeightSum {
                sum: ratio_to_f64(sum),
            });
        }
        let as_f64 = weights
            .iter()
            .map(|(&k, &w)| (k, ratio_to_f64(w)))
            .collect();
        OrbitDesign::new(space, as_f64)
    }

    pub fn space(&self) -> &OrbitSpace {
        &self.space
    }

    /// Positive-weight orbits with their weights, ascending by orbit.
    pub fn weights(&self) -> &BTreeMap<u32, f64> {
        &self.weights
    }

    /// Weight of orbit `k`; 0 when `k` is outside the support.
    pub fn weight(&self, k: u32) -> f64 {
        self.weights.get(&k).copied().unwrap_or(0.0)
    }

    pub fn support(&self) -> impl Iterator<Item = u32> + '_ {
        self.weights.keys().copied()
    }

    pub fn support_size(&self) -> usize {
        self.weights.len()
    }

    /// Weighted moments of the design. Both are linear in the weights.
    ///
    /// For a single factor the mixed moment has no coordinate pairs to
    /// average over and vanishes from every downstream formula; it is
    /// reported as 0.
    pub fn moments(&self) -> MomentSummary {
        let k_factors = self.space.factors();
        let m1 = self
            .weights
            .iter()
            .map(|(&k, &w)| w * orbit_m1(k_factors, k))
            .sum();
        let m2 = if k_factors < 2 {
            0.0
        } else {
            self.weights
                .iter()
                .map(|(&k, &w)| w * orbit_m2(k_factors, k))
                .sum()
        };
        MomentSummary { m1, m2 }
    }
}

impl fmt::Display for OrbitDesign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let body = self
            .weights
            .iter()
            .map(|(k, w)| format!("{k}: {w}"))
            .join(", ");
        write!(f, "{{{body}}}")
    }
}

/// The two moment values that determine an invariant design's information
/// matrix: `m1` is the common coordinate mean, `m2` the common mean of
/// products of distinct coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentSummary {
    pub m1: f64,
    pub m2: f64,
}

/// Moments of a rational weight vector, computed exactly.
///
/// The weights must lie on the simplex over `0..=K`; unlike [`OrbitDesign`],
/// no region bounds are enforced, so callers can probe arbitrary orbit
/// subsets.
pub fn design_moments_exact(factors: u32, weights: &RationalWeights) -> (Ratio<i64>, Ratio<i64>) {
    assert!(factors >= 2, "exact mixed moments need at least two factors");
    let kf = factors as i64;
    let mut m1 = Ratio::from_integer(0);
    let mut m2 = Ratio::from_integer(0);
    for (&k, &w) in weights {
        assert!(k <= factors, "orbit index {k} exceeds factor count {factors}");
        let centered = 2 * k as i64 - kf;
        m1 += w * Ratio::new(centered, kf);
        m2 += w * Ratio::new(centered * centered - kf, kf * (kf - 1));
    }
    (m1, m2)
}

/// Nearest-double value of a rational.
pub fn ratio_to_f64(r: Ratio<i64>) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}
