//! Finite-run realizations: apportioning a weight vector over N runs,
//! emitting the concrete ±1 design matrix, and scoring the result.

use std::collections::BTreeMap;

use nalgebra::DMatrix;

use crate::information::{d_efficiency, is_regular};
use crate::orbit::{enumerate_orbit, DesignPoint, OrbitDesign, OrbitSpace};
use crate::{Error, Result};

/// Singular values below this fraction of the largest are treated as zero
/// when checking that a realized matrix spans the model.
const RANK_TOLERANCE: f64 = 1e-9;

/// An exact design: run counts per orbit, summing to the total run count.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExactDesign {
    space: OrbitSpace,
    orbit_runs: BTreeMap<u32, u64>,
    runs: u64,
}

impl ExactDesign {
    /// Zero entries are dropped; remaining orbits must lie in `[L, U]` and
    /// carry at least one run in total.
    pub fn new(space: OrbitSpace, orbit_runs: BTreeMap<u32, u64>) -> Result<Self> {
        let mut cleaned = BTreeMap::new();
        for (k, n) in orbit_runs {
            if k < space.lower() || k > space.upper() {
                return Err(Error::OrbitOutOfRange {
                    orbit: k,
                    l: space.lower(),
                    u: space.upper(),
                });
            }
            if n > 0 {
                cleaned.insert(k, n);
            }
        }
        if cleaned.is_empty() {
            return Err(Error::EmptySupport);
        }
        let runs = cleaned.values().sum();
        Ok(Self {
            space,
            orbit_runs: cleaned,
            runs,
        })
    }

    pub fn space(&self) -> &OrbitSpace {
        &self.space
    }

    /// Run counts per orbit, ascending; every entry is positive.
    pub fn orbit_runs(&self) -> &BTreeMap<u32, u64> {
        &self.orbit_runs
    }

    pub fn runs(&self) -> u64 {
        self.runs
    }

    /// Whether every orbit's runs split evenly across its points, i.e. the
    /// realized design is invariant under factor permutation.
    pub fn is_balanced(&self) -> Result<bool> {
        for (&k, &n) in &self.orbit_runs {
            if n % self.space.orbit_size(k)? != 0 {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Per-point replicate counts for orbit `k` in enumeration order: every
    /// point gets the base count, the first points take the remainder.
    /// Counts across an orbit differ by at most one.
    pub fn replication(&self, k: u32) -> Result<Vec<u64>> {
        let size = self.space.orbit_size(k)?;
        let n = self.orbit_runs.get(&k).copied().unwrap_or(0);
        let base = n / size;
        let remainder = n % size;
        Ok((0..size).map(|i| base + u64::from(i < remainder)).collect())
    }

    /// The weight vector `N_k / N` this exact design induces.
    pub fn induced_design(&self) -> Result<OrbitDesign> {
        let total = self.runs as f64;
        let weights = self
            .orbit_runs
            .iter()
            .map(|(&k, &n)| (k, n as f64 / total))
            .collect();
        OrbitDesign::new(self.space, weights)
    }
}

/// Apportions `n` runs across the support of a design so that counts sum to
/// `n`, every support orbit keeps at least one run, and the counts track the
/// weights as closely as integer counts can.
///
/// Seeds with `⌈(n − s/2)·w_k⌉` for support size `s`, then repairs the total:
/// while too large, decrement an orbit maximizing `(N_k − 1)/w_k`; while too
/// small, increment one minimizing `N_k/w_k`. Ties go to the lower orbit.
pub fn round_to_exact(design: &OrbitDesign, n: u64) -> Result<ExactDesign> {
    let support: Vec<u32> = design.support().collect();
    if (n as usize) < support.len() {
        return Err(Error::RunCountTooSmall {
            n,
            support: support.len(),
        });
    }
    let target = n as f64 - support.len() as f64 / 2.0;
    let mut counts: Vec<u64> = support
        .iter()
        .map(|&k| (target * design.weight(k)).ceil() as u64)
        .collect();

    let mut total: u64 = counts.iter().sum();
    while total > n {
        let (j, _) = counts
            .iter()
            .enumerate()
            .map(|(j, &c)| (j, (c as f64 - 1.0) / design.weight(support[j])))
            .reduce(|best, cand| if cand.1 > best.1 { cand } else { best })
            .expect("support is nonempty");
        assert!(counts[j] >= 2, "decrement never empties an orbit");
        counts[j] -= 1;
        total -= 1;
    }
    while total < n {
        let (j, _) = counts
            .iter()
            .enumerate()
            .map(|(j, &c)| (j, c as f64 / design.weight(support[j])))
            .reduce(|best, cand| if cand.1 < best.1 { cand } else { best })
            .expect("support is nonempty");
        counts[j] += 1;
        total += 1;
    }

    ExactDesign::new(
        *design.space(),
        support.into_iter().zip(counts).collect(),
    )
}

/// Emits the realized run list: orbits ascending, points of each orbit in
/// enumeration order, replicates of a point adjacent. Every row's active
/// count lies in `[L, U]` by construction.
pub fn realize_matrix(exact: &ExactDesign) -> Result<Vec<DesignPoint>> {
    let factors = exact.space.factors();
    let mut rows = Vec::with_capacity(exact.runs as usize);
    for &k in exact.orbit_runs.keys() {
        let points = enumerate_orbit(factors, k)?;
        for (point, count) in points.into_iter().zip(exact.replication(k)?) {
            for _ in 0..count {
                rows.push(point.clone());
            }
        }
    }
    Ok(rows)
}

/// D-efficiency of the realized design.
///
/// Balanced exact designs reduce to their induced weight vector, so the
/// value agrees bit for bit with the approximate-design efficiency. An
/// unbalanced design is not invariant; its moment matrix is accumulated from
/// the realized rows in integer arithmetic and scored densely. Rank-deficient
/// realizations are an error.
pub fn exact_efficiency(exact: &ExactDesign) -> Result<f64> {
    if exact.is_balanced()? {
        let induced = exact.induced_design()?;
        if !is_regular(&induced) {
            return Err(Error::SingularInformation(format!(
                "exact design {:?} induces a singular weight vector",
                exact.orbit_runs
            )));
        }
        return Ok(d_efficiency(&induced));
    }

    let rows = realize_matrix(exact)?;
    let p = exact.space.factors() as usize + 1;
    let mut gram = vec![vec![0i64; p]; p];
    for row in &rows {
        let mut f = Vec::with_capacity(p);
        f.push(1i64);
        f.extend(row.coords().iter().map(|&c| c as i64));
        for i in 0..p {
            for j in 0..p {
                gram[i][j] += f[i] * f[j];
            }
        }
    }
    let n = exact.runs as f64;
    let m = DMatrix::from_fn(p, p, |i, j| gram[i][j] as f64 / n);

    let singular_values = m.clone().singular_values();
    let largest = singular_values.max();
    let rank = singular_values
        .iter()
        .filter(|&&s| s > RANK_TOLERANCE * largest)
        .count();
    if rank < p {
        return Err(Error::SingularInformation(format!(
            "realized matrix has rank {rank} < {p}"
        )));
    }
    Ok(m.determinant().powf(1.0 / p as f64))
}

/// Renders rows as sign text: one row per line, `+` and `-` separated by
/// single spaces.
pub fn matrix_to_pm_text(rows: &[DesignPoint]) -> String {
    let mut out = String::new();
    for row in rows {
        let line: Vec<&str> = row
            .coords()
            .iter()
            .map(|&c| if c > 0 { "+" } else { "-" })
            .collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    out
}

/// Parses sign text back into rows. Accepts ASCII `-` and the typographic
/// minus `−`, with or without separating whitespace; blank lines are skipped.
pub fn matrix_from_pm_text(input: &str) -> Result<Vec<DesignPoint>> {
    let mut rows = Vec::new();
    for (idx, line) in input.lines().enumerate() {
        let mut coords = Vec::new();
        for c in line.chars() {
            match c {
                '+' => coords.push(1i8),
                '-' | '\u{2212}' => coords.push(-1i8),
                c if c.is_whitespace() => {}
                other => {
                    return Err(Error::Parse(format!(
                        "line {}: unexpected character {other:?}",
                        idx + 1
                    )))
                }
            }
        }
        if coords.is_empty() {
            continue;
        }
        rows.push(DesignPoint::new(coords)?);
    }
    Ok(rows)
}

/// Renders rows as CSV with an `x1..xK` header and ±1 entries.
pub fn matrix_to_csv(rows: &[DesignPoint]) -> String {
    let mut out = String::new();
    if let Some(first) = rows.first() {
        let header: Vec<String> = (1..=first.factors()).map(|i| format!("x{i}")).collect();
        out.push_str(&header.join(","));
        out.push('\n');
    }
    for row in rows {
        let line: Vec<String> = row.coords().iter().map(|c| c.to_string()).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn space(k: u32, l: u32, u: u32) -> OrbitSpace {
        OrbitSpace::new(k, l, u).unwrap()
    }

    fn design(space: OrbitSpace, pairs: &[(u32, f64)]) -> OrbitDesign {
        OrbitDesign::new(space, pairs.iter().copied().collect()).unwrap()
    }

    fn runs(exact: &ExactDesign) -> Vec<(u32, u64)> {
        exact.orbit_runs().iter().map(|(&k, &n)| (k, n)).collect()
    }

    #[test]
    fn rounding_splits_even_totals_exactly() {
        let d = design(space(6, 2, 4), &[(2, 0.5), (4, 0.5)]);
        let exact = round_to_exact(&d, 30).unwrap();
        assert_eq!(runs(&exact), vec![(2, 15), (4, 15)]);
        assert_eq!(exact.runs(), 30);

        let d = design(
            space(4, 0, 3),
            &[(0, 1.0 / 6.0), (2, 0.5), (3, 1.0 / 3.0)],
        );
        let exact = round_to_exact(&d, 12).unwrap();
        assert_eq!(runs(&exact), vec![(0, 2), (2, 6), (3, 4)]);
    }

    #[test]
    fn rounding_handles_remainders_and_repairs() {
        let d = design(space(2, 0, 1), &[(0, 1.0 / 3.0), (1, 2.0 / 3.0)]);
        assert_eq!(runs(&round_to_exact(&d, 3).unwrap()), vec![(0, 1), (1, 2)]);
        assert_eq!(runs(&round_to_exact(&d, 5).unwrap()), vec![(0, 2), (1, 3)]);
        assert_eq!(runs(&round_to_exact(&d, 2).unwrap()), vec![(0, 1), (1, 1)]);

        // Increment repair with a tie: both ratios equal, lower orbit wins.
        let even = design(space(2, 0, 1), &[(0, 0.5), (1, 0.5)]);
        assert_eq!(
            runs(&round_to_exact(&even, 7).unwrap()),
            vec![(0, 4), (1, 3)]
        );

        // Decrement repair: ceil-seeding overshoots on a lopsided design.
        let skew = design(space(4, 0, 3), &[(0, 0.9), (2, 0.05), (3, 0.05)]);
        assert_eq!(
            runs(&round_to_exact(&skew, 3).unwrap()),
            vec![(0, 1), (2, 1), (3, 1)]
        );
    }

    #[test]
    fn rounding_rejects_too_few_runs() {
        let d = design(space(6, 2, 4), &[(2, 0.5), (4, 0.5)]);
        assert!(matches!(
            round_to_exact(&d, 1),
            Err(Error::RunCountTooSmall { n: 1, support: 2 })
        ));
    }

    #[test]
    fn replication_spreads_remainders_to_early_points() {
        let exact = ExactDesign::new(space(2, 0, 1), [(1u32, 3u64)].into()).unwrap();
        assert_eq!(exact.replication(1).unwrap(), vec![2, 1]);
        assert_eq!(exact.replication(0).unwrap(), vec![0]);
        assert!(!exact.is_balanced().unwrap());
    }

    #[test]
    fn realization_orders_orbits_and_replicates() {
        let exact = ExactDesign::new(space(2, 0, 1), [(0u32, 1u64), (1, 3)].into()).unwrap();
        let rows = realize_matrix(&exact).unwrap();
        let rendered: Vec<String> = rows.iter().map(|r| r.to_string()).collect();
        assert_eq!(rendered, vec!["- -", "+ -", "+ -", "- +"]);
    }

    #[test]
    fn realization_covers_balanced_orbits_once() {
        let exact =
            ExactDesign::new(space(6, 2, 4), [(2u32, 15u64), (4, 15)].into()).unwrap();
        let rows = realize_matrix(&exact).unwrap();
        assert_eq!(rows.len(), 30);
        let mut expected = enumerate_orbit(6, 2).unwrap();
        expected.extend(enumerate_orbit(6, 4).unwrap());
        assert_eq!(rows, expected);
        assert!(rows
            .iter()
            .all(|r| (2..=4).contains(&r.active_count())));
    }

    #[test]
    fn efficiency_of_balanced_designs_matches_weight_path() {
        let exact =
            ExactDesign::new(space(6, 2, 4), [(2u32, 15u64), (4, 15)].into()).unwrap();
        assert_relative_eq!(
            exact_efficiency(&exact).unwrap(),
            0.988_245,
            max_relative = 1e-6
        );

        // Balanced realization of a boundary optimum: identity information.
        let exact = ExactDesign::new(space(4, 1, 3), [(1u32, 4u64), (3, 4)].into()).unwrap();
        assert_eq!(exact_efficiency(&exact).unwrap(), 1.0);
    }

    #[test]
    fn efficiency_of_unbalanced_designs_uses_realized_rows() {
        let d = design(space(2, 0, 1), &[(0, 1.0 / 3.0), (1, 2.0 / 3.0)]);

        let exact = round_to_exact(&d, 3).unwrap();
        assert!(exact.is_balanced().unwrap());
        assert_relative_eq!(
            exact_efficiency(&exact).unwrap(),
            (16.0f64 / 27.0).powf(1.0 / 3.0),
            max_relative = 1e-12
        );

        // 5 runs put counts (2, 1) on the two orbit-1 points; the Gram
        // determinant is 64/125, so the efficiency is exactly 0.8.
        let exact = round_to_exact(&d, 5).unwrap();
        assert!(!exact.is_balanced().unwrap());
        assert_relative_eq!(
            exact_efficiency(&exact).unwrap(),
            0.8,
            max_relative = 1e-12
        );
    }

    #[test]
    fn efficiency_rejects_rank_deficient_realizations() {
        // Two runs: (-,-) and (+,-); the second column never varies.
        let exact = ExactDesign::new(space(2, 0, 1), [(0u32, 1u64), (1, 1)].into()).unwrap();
        assert!(matches!(
            exact_efficiency(&exact),
            Err(Error::SingularInformation(_))
        ));
    }

    #[test]
    fn sign_text_round_trips() {
        let exact = ExactDesign::new(space(4, 1, 3), [(1u32, 4u64), (3, 4)].into()).unwrap();
        let rows = realize_matrix(&exact).unwrap();
        let text = matrix_to_pm_text(&rows);
        assert!(text.starts_with("+ - - -\n"));
        assert_eq!(matrix_from_pm_text(&text).unwrap(), rows);

        let typographic = "+ \u{2212} + +\n\u{2212} + + +\n";
        let parsed = matrix_from_pm_text(typographic).unwrap();
        assert_eq!(parsed.len(), 2);
        assert_eq!(parsed[0].coords(), &[1, -1, 1, 1]);

        assert!(matches!(
            matrix_from_pm_text("+ x -\n"),
            Err(Error::Parse(_))
        ));
    }

    #[test]
    fn csv_has_header_and_sign_entries() {
        let exact = ExactDesign::new(space(2, 0, 1), [(0u32, 1u64), (1, 1)].into()).unwrap();
        let rows = realize_matrix(&exact).unwrap();
        let csv = matrix_to_csv(&rows);
        assert_eq!(csv, "x1,x2\n-1,-1\n1,-1\n");
    }
}
