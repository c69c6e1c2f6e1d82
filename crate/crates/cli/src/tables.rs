//! Reference-table generation: the catalogued instances for the example
//! factor counts, solved fresh and rendered in the catalogue layout.

use rfd_core::solver::{interior_orbit, margin_discriminant, symmetric_four_orbit_report};
use rfd_core::{realize_matrix, round_to_exact, solve, DesignPoint, OrbitSpace};
use serde_json::json;

/// Factor counts the reference tables catalogue.
pub const TABLE_FACTORS: [u32; 6] = [2, 3, 4, 5, 6, 9];

/// Zero-weight cells are printed as a typographic minus.
pub const EMPTY_CELL: &str = "\u{2212}";

/// Instances the tables enumerate: `L + U ≤ K` (the mirror image of every
/// other instance appears with `L + U ≤ K`), filtered by margin case.
fn catalogue_instances(narrow: bool) -> Vec<OrbitSpace> {
    let mut out = Vec::new();
    for &factors in &TABLE_FACTORS {
        for lower in 0..factors {
            for upper in (lower + 1)..=factors {
                if lower + upper > factors {
                    continue;
                }
                let space = OrbitSpace::new(factors, lower, upper).unwrap();
                if (margin_discriminant(space) < 0) == narrow {
                    out.push(space);
                }
            }
        }
    }
    out
}

pub struct TwoOrbitRow {
    pub space: OrbitSpace,
    pub weight_lower: f64,
    pub weight_upper: f64,
    pub efficiency: f64,
}

/// Narrow instances: optimal two-orbit designs and their efficiencies.
pub fn two_orbit_rows() -> Vec<TwoOrbitRow> {
    catalogue_instances(true)
        .into_iter()
        .map(|space| {
            let report = solve(space);
            TwoOrbitRow {
                space,
                weight_lower: report.design.weight(space.lower()),
                weight_upper: report.design.weight(space.upper()),
                efficiency: report.efficiency,
            }
        })
        .collect()
}

pub struct ThreeOrbitRow {
    pub space: OrbitSpace,
    pub interior: u32,
    pub weight_lower: f64,
    pub weight_upper: f64,
    pub weight_interior: f64,
}

/// Wide and boundary instances: fully efficient designs on at most three
/// orbits. Boundary rows and collapsed wide rows leave cells at zero.
pub fn three_orbit_rows() -> Vec<ThreeOrbitRow> {
    catalogue_instances(false)
        .into_iter()
        .map(|space| {
            let report = solve(space);
            let interior = interior_orbit(space).expect("wide instances have an interior orbit");
            ThreeOrbitRow {
                space,
                interior,
                weight_lower: report.design.weight(space.lower()),
                weight_upper: report.design.weight(space.upper()),
                weight_interior: report.design.weight(interior),
            }
        })
        .collect()
}

pub struct FourOrbitRow {
    pub space: OrbitSpace,
    pub orbits: [u32; 4],
    pub weights: [f64; 4],
}

/// Symmetric four-orbit designs: for each factor count, the outermost
/// admissible symmetric inner pair (k2, K−k2) combined with every outer pair
/// (k1, K−k1) the window admits.
pub fn four_orbit_rows() -> Vec<FourOrbitRow> {
    let mut rows = Vec::new();
    for &factors in &TABLE_FACTORS {
        let inner = (0..factors)
            .filter(|&k2| {
                let centered = factors as i64 - 2 * k2 as i64;
                2 * k2 < factors && centered * centered <= factors as i64
            })
            .max();
        let Some(k2) = inner else { continue };
        for lower in 0..factors {
            for upper in (lower + 1)..=factors {
                if lower + upper > factors {
                    continue;
                }
                let space = OrbitSpace::new(factors, lower, upper).unwrap();
                for k1 in lower.max(factors - upper)..k2 {
                    let centered = factors as i64 - 2 * k1 as i64;
                    if centered * centered <= factors as i64 {
                        continue;
                    }
                    let report = symmetric_four_orbit_report(space, k1, k2)
                        .expect("window conditions were checked");
                    let orbits = [k1, k2, factors - k2, factors - k1];
                    rows.push(FourOrbitRow {
                        space,
                        weights: orbits.map(|k| report.design.weight(k)),
                        orbits,
                    });
                }
            }
        }
    }
    rows
}

/// The catalogued exact design: 30 runs on the narrow instance with six
/// factors and margins [2, 4].
pub fn exact_design_rows() -> Vec<DesignPoint> {
    let space = OrbitSpace::new(6, 2, 4).unwrap();
    let exact = round_to_exact(&solve(space).design, 30).expect("30 runs cover two orbits");
    realize_matrix(&exact).expect("six factors are enumerable")
}

fn weight_cell(w: f64) -> String {
    if w == 0.0 {
        EMPTY_CELL.to_string()
    } else {
        format!("{w:.4}")
    }
}

/// Right-aligns cells column by column; columns are separated by two spaces.
fn align(rows: &[Vec<String>]) -> String {
    let columns = rows.iter().map(Vec::len).max().unwrap_or(0);
    let widths: Vec<usize> = (0..columns)
        .map(|c| {
            rows.iter()
                .filter_map(|r| r.get(c))
                .map(|cell| cell.chars().count())
                .max()
                .unwrap_or(0)
        })
        .collect();
    let mut out = String::new();
    for row in rows {
        let line: Vec<String> = row
            .iter()
            .enumerate()
            .map(|(c, cell)| {
                let pad = widths[c] - cell.chars().count();
                format!("{}{}", " ".repeat(pad), cell)
            })
            .collect();
        out.push_str(line.join("  ").trim_end());
        out.push('\n');
    }
    out
}

fn two_orbit_cells(rows: &[TwoOrbitRow]) -> Vec<Vec<String>> {
    let header = vec![
        "K".to_string(),
        "(K-sqrt(K))/2".to_string(),
        "(K+sqrt(K))/2".to_string(),
        "L".to_string(),
        "U".to_string(),
        "w_L".to_string(),
        "w_U".to_string(),
        "efficiency".to_string(),
    ];
    let mut cells = vec![header];
    for row in rows {
        let kf = row.space.factors() as f64;
        cells.push(vec![
            row.space.factors().to_string(),
            format!("{:.2}", (kf - kf.sqrt()) / 2.0),
            format!("{:.2}", (kf + kf.sqrt()) / 2.0),
            row.space.lower().to_string(),
            row.space.upper().to_string(),
            format!("{:.4}", row.weight_lower),
            format!("{:.4}", row.weight_upper),
            format!("{:.4}", row.efficiency),
        ]);
    }
    cells
}

fn three_orbit_cells(rows: &[ThreeOrbitRow]) -> Vec<Vec<String>> {
    let header = ["K", "L", "U", "l", "w_L", "w_U", "w_l"]
        .map(str::to_string)
        .to_vec();
    let mut cells = vec![header];
    for row in rows {
        cells.push(vec![
            row.space.factors().to_string(),
            row.space.lower().to_string(),
            row.space.upper().to_string(),
            row.interior.to_string(),
            weight_cell(row.weight_lower),
            weight_cell(row.weight_upper),
            weight_cell(row.weight_interior),
        ]);
    }
    cells
}

fn four_orbit_cells(rows: &[FourOrbitRow]) -> Vec<Vec<String>> {
    let header = ["K", "L", "U", "k1", "k2", "k3", "k4", "w_1", "w_2", "w_3", "w_4"]
        .map(str::to_string)
        .to_vec();
    let mut cells = vec![header];
    for row in rows {
        let mut line = vec![
            row.space.factors().to_string(),
            row.space.lower().to_string(),
            row.space.upper().to_string(),
        ];
        line.extend(row.orbits.iter().map(u32::to_string));
        line.extend(row.weights.iter().map(|&w| weight_cell(w)));
        cells.push(line);
    }
    cells
}

pub fn render_table(which: u8) -> String {
    match which {
        1 => align(&two_orbit_cells(&two_orbit_rows())),
        2 => align(&three_orbit_cells(&three_orbit_rows())),
        3 => align(&four_orbit_cells(&four_orbit_rows())),
        4 => rfd_core::exact::matrix_to_pm_text(&exact_design_rows()),
        _ => unreachable!("table index is validated by the parser"),
    }
}

pub fn render_table_csv(which: u8) -> String {
    let cells = match which {
        1 => two_orbit_cells(&two_orbit_rows()),
        2 => three_orbit_cells(&three_orbit_rows()),
        3 => four_orbit_cells(&four_orbit_rows()),
        4 => return rfd_core::exact::matrix_to_csv(&exact_design_rows()),
        _ => unreachable!("table index is validated by the parser"),
    };
    let mut out = String::new();
    for row in &cells {
        let line: Vec<String> = row
            .iter()
            .map(|cell| {
                if cell == EMPTY_CELL {
                    String::new()
                } else {
                    cell.clone()
                }
            })
            .collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}

pub fn render_table_json(which: u8) -> String {
    let value = match which {
        1 => json!(two_orbit_rows()
            .iter()
            .map(|r| json!({
                "factors": r.space.factors(),
                "lower": r.space.lower(),
                "upper": r.space.upper(),
                "weight_lower": r.weight_lower,
                "weight_upper": r.weight_upper,
                "efficiency": r.efficiency,
            }))
            .collect::<Vec<_>>()),
        2 => json!(three_orbit_rows()
            .iter()
            .map(|r| json!({
                "factors": r.space.factors(),
                "lower": r.space.lower(),
                "upper": r.space.upper(),
                "interior": r.interior,
                "weight_lower": nonzero(r.weight_lower),
                "weight_upper": nonzero(r.weight_upper),
                "weight_interior": nonzero(r.weight_interior),
            }))
            .collect::<Vec<_>>()),
        3 => json!(four_orbit_rows()
            .iter()
            .map(|r| json!({
                "factors": r.space.factors(),
                "lower": r.space.lower(),
                "upper": r.space.upper(),
                "orbits": r.orbits.to_vec(),
                "weights": r.weights.iter().map(|&w| nonzero(w)).collect::<Vec<_>>(),
            }))
            .collect::<Vec<_>>()),
        4 => json!(exact_design_rows()
            .iter()
            .map(|p| p.coords().to_vec())
            .collect::<Vec<_>>()),
        _ => unreachable!("table index is validated by the parser"),
    };
    format!("{}\n", serde_json::to_string_pretty(&value).expect("tables serialize"))
}

fn nonzero(w: f64) -> Option<f64> {
    (w != 0.0).then_some(w)
}
