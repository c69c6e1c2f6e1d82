//! Information matrices of invariant designs and the quantities derived from
//! them: closed-form determinant, regularity, sensitivity polynomial, and
//! D-efficiency.

use nalgebra::DMatrix;

use crate::orbit::{MomentSummary, OrbitDesign};
use crate::{Error, Result};

/// Information matrix of an invariant design for the intercept-plus-slopes
/// model: `(K+1)×(K+1)`, with unit diagonal, `m1` in the first row and
/// column, and `m2` on every remaining off-diagonal entry.
#[derive(Debug, Clone, PartialEq)]
pub struct InformationMatrix {
    matrix: DMatrix<f64>,
}

impl InformationMatrix {
    pub fn from_moments(moments: MomentSummary, factors: u32) -> Self {
        let p = factors as usize + 1;
        let mut matrix = DMatrix::from_element(p, p, moments.m2);
        for i in 0..p {
            matrix[(i, i)] = 1.0;
            matrix[(0, i)] = moments.m1;
            matrix[(i, 0)] = moments.m1;
        }
        matrix[(0, 0)] = 1.0;
        InformationMatrix { matrix }
    }

    pub fn from_design(design: &OrbitDesign) -> Self {
        Self::from_moments(design.moments(), design.space().factors())
    }

    /// Model dimension `p = K + 1`.
    pub fn dimension(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    /// Dense LU determinant; the closed form in [`det_information`] is the
    /// preferred route for invariant designs.
    pub fn det(&self) -> f64 {
        self.matrix.determinant()
    }
}

/// Assembles the information matrix of a design.
pub fn information_matrix(design: &OrbitDesign) -> InformationMatrix {
    InformationMatrix::from_design(design)
}

/// Determinant of the information matrix in closed form:
/// `(1 − m2)^(K−1) · (1 + (K−1)m2 − K·m1²)`.
///
/// Both factors are non-negative for realizable moments, so the value is
/// non-negative and vanishes exactly for singular designs.
pub fn det_information(moments: MomentSummary, factors: u32) -> f64 {
    let kf = factors as f64;
    let spread = 1.0 - moments.m2;
    let balance = 1.0 + (kf - 1.0) * moments.m2 - kf * moments.m1 * moments.m1;
    spread.powi(factors as i32 - 1) * balance
}

/// Whether the design's information matrix is invertible, decided by the
/// exact combinatorial criterion: at least two orbits carry weight, and (for
/// two or more factors) at least one weighted orbit is strictly between 0
/// and K.
pub fn is_regular(design: &OrbitDesign) -> bool {
    let factors = design.space().factors();
    if design.support_size() < 2 {
        return false;
    }
    factors < 2 || design.support().any(|k| k > 0 && k < factors)
}

/// The quadratic that gives the model variance on each orbit:
/// `ψ̃(k) = a0 + a1·(2k − K) + a2·(2k − K)²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SensitivityPolynomial {
    pub a0: f64,
    pub a1: f64,
    pub a2: f64,
    factors: u32,
}

impl SensitivityPolynomial {
    /// Value on orbit `k`; equals `f(x)ᵀ M⁻¹ f(x)` for every point of the
    /// orbit.
    pub fn at(&self, k: u32) -> f64 {
        assert!(
            k <= self.factors,
            "orbit index {k} exceeds factor count {}",
            self.factors
        );
        let centered = (2 * k as i64 - self.factors as i64) as f64;
        self.a0 + self.a1 * centered + self.a2 * centered * centered
    }

    pub fn factors(&self) -> u32 {
        self.factors
    }
}

/// Coefficients of the sensitivity quadratic, from the block inverse of the
/// information matrix. Requires a regular design: both determinant factors
/// must be strictly positive.
pub fn sensitivity_coefficients(
    moments: MomentSummary,
    factors: u32,
) -> Result<SensitivityPolynomial> {
    let kf = factors as f64;
    let spread = 1.0 - moments.m2;
    let balance = 1.0 + (kf - 1.0) * moments.m2 - kf * moments.m1 * moments.m1;
    if spread <= 0.0 || balance <= 0.0 {
        return Err(Error::SingularInformation(format!(
            "determinant factors 1 - m2 = {spread} and 1 + (K-1)m2 - K*m1^2 = {balance} \
             must both be positive"
        )));
    }
    Ok(SensitivityPolynomial {
        a0: (1.0 + (kf - 1.0) * moments.m2) / balance + kf / spread,
        a1: -2.0 * moments.m1 / balance,
        a2: (moments.m1 * moments.m1 - moments.m2) / (spread * balance),
        factors,
    })
}

/// D-efficiency relative to the unrestricted full factorial, whose
/// information matrix is the identity: `det(M)^(1/(K+1))`.
pub fn d_efficiency(design: &OrbitDesign) -> f64 {
    let factors = design.space().factors();
    let det = det_information(design.moments(), factors);
    if det <= 0.0 {
        return 0.0;
    }
    det.powf(1.0 / (factors as f64 + 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::orbit::{enumerate_orbit, OrbitSpace};
    use approx::assert_relative_eq;
    use nalgebra::DVector;

    fn design(space: OrbitSpace, pairs: &[(u32, f64)]) -> OrbitDesign {
        OrbitDesign::new(space, pairs.iter().copied().collect()).unwrap()
    }

    fn two_orbit_6() -> OrbitDesign {
        design(OrbitSpace::new(6, 2, 4).unwrap(), &[(2, 0.5), (4, 0.5)])
    }

    fn skewed_2() -> OrbitDesign {
        design(
            OrbitSpace::new(2, 0, 1).unwrap(),
            &[(0, 1.0 / 3.0), (1, 2.0 / 3.0)],
        )
    }

    /// Information matrix by direct weighted summation of f(x)f(x)ᵀ over the
    /// enumerated orbit points.
    fn summation_matrix(design: &OrbitDesign) -> DMatrix<f64> {
        let factors = design.space().factors();
        let p = factors as usize + 1;
        let mut acc = DMatrix::zeros(p, p);
        for (&k, &w) in design.weights() {
            let points = enumerate_orbit(factors, k).unwrap();
            let point_weight = w / points.len() as f64;
            for point in &points {
                let mut f = DVector::zeros(p);
                f[0] = 1.0;
                for (j, &c) in point.coords().iter().enumerate() {
                    f[j + 1] = f64::from(c);
                }
                acc += point_weight * &f * f.transpose();
            }
        }
        acc
    }

    #[test]
    fn matrix_structure() {
        let m = information_matrix(&two_orbit_6());
        assert_eq!(m.dimension(), 7);
        assert_eq!(m.as_matrix()[(0, 0)], 1.0);
        for j in 1..7 {
            assert_eq!(m.as_matrix()[(0, j)], 0.0);
            assert_eq!(m.as_matrix()[(j, 0)], 0.0);
            assert_eq!(m.as_matrix()[(j, j)], 1.0);
            for l in 1..7 {
                if l != j {
                    assert_eq!(m.as_matrix()[(j, l)], -1.0 / 15.0);
                }
            }
        }

        let identity_like = design(
            OrbitSpace::new(4, 1, 3).unwrap(),
            &[(1, 0.5), (3, 0.5)],
        );
        let m = information_matrix(&identity_like);
        assert_eq!(m.as_matrix(), &DMatrix::identity(5, 5));
    }

    #[test]
    fn matrix_matches_point_summation() {
        for d in [two_orbit_6(), skewed_2()] {
            let direct = summation_matrix(&d);
            let structured = information_matrix(&d);
            for i in 0..structured.dimension() {
                for j in 0..structured.dimension() {
                    assert_relative_eq!(
                        structured.as_matrix()[(i, j)],
                        direct[(i, j)],
                        epsilon = 1e-14
                    );
                }
            }
        }
    }

    #[test]
    fn closed_form_determinant_values() {
        let m = skewed_2().moments();
        assert_relative_eq!(det_information(m, 2), 16.0 / 27.0, max_relative = 1e-14);

        let m = two_orbit_6().moments();
        let expected = (16.0f64 / 15.0).powi(5) * (2.0 / 3.0);
        assert_relative_eq!(det_information(m, 6), expected, max_relative = 1e-14);
        assert_relative_eq!(det_information(m, 6), 0.920_560_5, max_relative = 1e-6);

        let zero = MomentSummary { m1: 0.0, m2: 0.0 };
        for factors in 1..=12 {
            assert_eq!(det_information(zero, factors), 1.0);
        }
    }

    #[test]
    fn closed_form_matches_dense_determinant() {
        for d in [
            two_orbit_6(),
            skewed_2(),
            design(
                OrbitSpace::new(4, 0, 3).unwrap(),
                &[(0, 1.0 / 6.0), (2, 0.5), (3, 1.0 / 3.0)],
            ),
            design(
                OrbitSpace::new(5, 0, 5).unwrap(),
                &[(0, 0.2), (2, 0.3), (4, 0.4), (5, 0.1)],
            ),
        ] {
            let closed = det_information(d.moments(), d.space().factors());
            let dense = information_matrix(&d).det();
            assert_relative_eq!(closed, dense, max_relative = 1e-10);
        }
    }

    #[test]
    fn regularity_criterion() {
        assert!(is_regular(&two_orbit_6()));
        assert!(is_regular(&skewed_2()));

        // A single orbit never spans the model.
        let single = design(OrbitSpace::new(6, 2, 4).unwrap(), &[(3, 1.0)]);
        assert!(!is_regular(&single));
        assert_eq!(det_information(single.moments(), 6), 0.0);

        // Two extreme orbits leave all slope contrasts confounded.
        let extremes = design(OrbitSpace::new(3, 0, 3).unwrap(), &[(0, 0.5), (3, 0.5)]);
        assert!(!is_regular(&extremes));
        assert_relative_eq!(
            det_information(extremes.moments(), 3),
            0.0,
            epsilon = 1e-15
        );

        // With one factor the two orbits are all there is.
        let tiny = design(OrbitSpace::new(1, 0, 1).unwrap(), &[(0, 0.5), (1, 0.5)]);
        assert!(is_regular(&tiny));
        assert_eq!(det_information(tiny.moments(), 1), 1.0);
    }

    #[test]
    fn sensitivity_coefficient_values() {
        let poly = sensitivity_coefficients(two_orbit_6().moments(), 6).unwrap();
        assert_relative_eq!(poly.a0, 6.625, max_relative = 1e-14);
        assert_eq!(poly.a1, 0.0);
        assert_relative_eq!(poly.a2, 0.09375, max_relative = 1e-14);
        assert_relative_eq!(poly.at(2), 7.0, max_relative = 1e-14);
        assert_relative_eq!(poly.at(4), 7.0, max_relative = 1e-14);
        assert_relative_eq!(poly.at(3), 6.625, max_relative = 1e-14);

        let poly = sensitivity_coefficients(skewed_2().moments(), 2).unwrap();
        assert_relative_eq!(poly.a1, 1.5, max_relative = 1e-13);
        assert_relative_eq!(poly.at(0), 3.0, max_relative = 1e-13);
        assert_relative_eq!(poly.at(1), 3.0, max_relative = 1e-13);

        let identity = MomentSummary { m1: 0.0, m2: 0.0 };
        for factors in 1..=9 {
            let poly = sensitivity_coefficients(identity, factors).unwrap();
            assert_eq!(poly.a0, factors as f64 + 1.0);
            assert_eq!(poly.a1, 0.0);
            assert_eq!(poly.a2, 0.0);
        }

        let singular = design(OrbitSpace::new(3, 0, 3).unwrap(), &[(0, 0.5), (3, 0.5)]);
        assert!(matches!(
            sensitivity_coefficients(singular.moments(), 3),
            Err(Error::SingularInformation(_))
        ));
    }

    #[test]
    fn sensitivity_matches_matrix_inverse() {
        for d in [
            two_orbit_6(),
            skewed_2(),
            design(
                OrbitSpace::new(5, 1, 4).unwrap(),
                &[(1, 0.3), (2, 0.2), (4, 0.5)],
            ),
        ] {
            let factors = d.space().factors();
            let poly = sensitivity_coefficients(d.moments(), factors).unwrap();
            let inv = information_matrix(&d)
                .as_matrix()
                .clone()
                .try_inverse()
                .unwrap();
            for k in d.space().orbits() {
                for point in enumerate_orbit(factors, k).unwrap() {
                    let mut f = DVector::zeros(factors as usize + 1);
                    f[0] = 1.0;
                    for (j, &c) in point.coords().iter().enumerate() {
                        f[j + 1] = f64::from(c);
                    }
                    let direct = (f.transpose() * &inv * &f)[(0, 0)];
                    assert_relative_eq!(poly.at(k), direct, max_relative = 1e-9);
                }
            }
        }
    }

    #[test]
    fn efficiency_values() {
        assert_relative_eq!(d_efficiency(&skewed_2()), 0.839_947_4, max_relative = 1e-6);
        assert_relative_eq!(d_efficiency(&two_orbit_6()), 0.988_245, max_relative = 1e-6);

        let balanced = design(OrbitSpace::new(4, 1, 3).unwrap(), &[(1, 0.5), (3, 0.5)]);
        assert_eq!(d_efficiency(&balanced), 1.0);

        let singular = design(OrbitSpace::new(6, 2, 4).unwrap(), &[(3, 1.0)]);
        assert_eq!(d_efficiency(&singular), 0.0);
    }
}
