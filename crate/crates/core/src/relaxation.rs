//! Linear programs built from an estimation tree, and their box relaxation.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimator::{neighbor_estimate, EstimationTree};
use crate::poly::{coeff_to_f64, DecompositionTree, Strategy};
use crate::simplex::{solve_box_lp, BoxLp, LpOutcome};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum Variant {
    /// Per-vertex rows on neighbor sums, radius `ε2 Δ`, clamped to `[0, deg]`.
    MaxCut,
    /// One row per decomposition node, radius `ε1 ρ̄ + ε2 n^{ℓ−1+δ}`.
    Generic,
    /// Per-vertex neighbor rows with radius `ε2 n^{δ/3}` plus `Σ y = k`.
    KDense { k: usize },
}

/// `lower ≤ constant + Σ a_j y_j ≤ upper`. The `dev_*` bounds are the wider
/// ones a rounded solution is checked against.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearRow {
    pub label: String,
    pub constant: f64,
    pub coeffs: Vec<(usize, f64)>,
    pub lower: f64,
    pub upper: f64,
    pub dev_lower: f64,
    pub dev_upper: f64,
}

impl LinearRow {
    pub fn value(&self, y: &[f64]) -> f64 {
        self.constant + self.coeffs.iter().map(|&(j, a)| a * y[j]).sum::<f64>()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelaxProgram {
    pub n: usize,
    pub objective_constant: f64,
    /// Dense objective coefficients, one per variable.
    pub objective: Vec<f64>,
    pub rows: Vec<LinearRow>,
    pub variant: Variant,
}

impl RelaxProgram {
    pub fn objective_at(&self, y: &[f64]) -> f64 {
        self.objective_constant
            + self
                .objective
                .iter()
                .zip(y)
                .map(|(c, v)| c * v)
                .sum::<f64>()
    }

    /// Largest amount by which `y` violates any row's program bounds.
    pub fn max_violation(&self, y: &[f64]) -> f64 {
        self.rows
            .iter()
            .map(|row| {
                let v = row.value(y);
                (row.lower - v).max(v - row.upper).max(0.0)
            })
            .fold(0.0, f64::max)
    }

    /// Plain-text dump for debugging; variables are printed 1-indexed.
    pub fn to_lp_text(&self) -> String {
        let mut out = String::new();
        let _ = write!(out, "maximize {}", self.objective_constant);
        for (j, c) in self.objective.iter().enumerate() {
            if *c != 0.0 {
                let _ = write!(out, " {:+} y{}", c, j + 1);
            }
        }
        out.push_str("\nsubject to\n");
        for row in &self.rows {
            let _ = write!(out, "  {}: {} <= {}", row.label, row.lower, row.constant);
            for &(j, a) in &row.coeffs {
                let _ = write!(out, " {:+} y{}", a, j + 1);
            }
            let _ = writeln!(out, " <= {}", row.upper);
        }
        let _ = writeln!(out, "bounds\n  0 <= y <= 1 ({} variables)", self.n);
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LpStatus {
    Optimal,
    Infeasible,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FractionalSolution {
    /// Empty when infeasible.
    pub y: Vec<f64>,
    pub objective_value: f64,
    pub status: LpStatus,
}

impl FractionalSolution {
    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }
}

pub fn build_program(
    tree: &DecompositionTree,
    est: &EstimationTree,
    eps1: f64,
    eps2: f64,
    delta: f64,
    variant: Variant,
) -> Result<RelaxProgram> {
    if !(eps1 > 0.0 && eps2 > 0.0) {
        return Err(Error::config("eps1 and eps2 must be positive"));
    }
    if est.rho.len() != tree.nodes().len() {
        return Err(Error::input("estimation tree does not match decomposition"));
    }
    let n = tree.n();
    let nf = n as f64;
    let ln_n = nf.ln().max(0.0);
    let mut objective = vec![0.0; n];
    let mut rows = Vec::new();
    let objective_constant = coeff_to_f64(&tree.root().constant);

    match variant {
        Variant::MaxCut | Variant::KDense { .. } => {
            if tree.strategy() != Strategy::MaxCutSymmetric {
                return Err(Error::input("graph programs need the symmetric decomposition"));
            }
            let total_degree: usize = tree.nodes().iter().skip(1).map(|t| t.children.len()).sum();
            let radius = match variant {
                Variant::MaxCut => eps2 * total_degree as f64 / nf,
                _ => eps2 * nf.powf(delta / 3.0),
            };
            for (id, node) in tree.nodes().iter().enumerate().skip(1) {
                let j = node.tuple[0];
                let deg = node.children.len() as f64;
                let rho_n = neighbor_estimate(tree, est, id).ok_or_else(|| {
                    Error::input("graph program needs uniform leaf coefficients")
                })?;
                let raw_lo = (1.0 - eps1) * rho_n - radius;
                let raw_hi = (1.0 + eps1) * rho_n + radius;
                let lower = raw_lo.max(0.0);
                let upper = raw_hi.min(deg);
                let (dev_lo, dev_hi) = match variant {
                    Variant::MaxCut => {
                        let w = 2.0 * (deg * ln_n).sqrt();
                        (raw_lo - w, raw_hi + w)
                    }
                    _ => (
                        (1.0 - eps1).powi(2) * rho_n - 2.0 * radius,
                        (1.0 + eps1).powi(2) * rho_n + 2.0 * radius,
                    ),
                };
                rows.push(LinearRow {
                    label: format!("v{}", j + 1),
                    constant: 0.0,
                    coeffs: node.children.iter().map(|c| (c.index, 1.0)).collect(),
                    lower,
                    upper,
                    dev_lower: dev_lo.min(lower),
                    dev_upper: dev_hi.max(upper),
                });
                objective[j] = match variant {
                    Variant::MaxCut => deg - rho_n,
                    _ => rho_n,
                };
            }
            if let Variant::KDense { k } = variant {
                let kf = k as f64;
                let w = 2.0 * (nf * ln_n).sqrt();
                rows.push(LinearRow {
                    label: "card".into(),
                    constant: 0.0,
                    coeffs: (0..n).map(|j| (j, 1.0)).collect(),
                    lower: kf,
                    upper: kf,
                    dev_lower: kf - w,
                    dev_upper: kf + w,
                });
            }
        }
        Variant::Generic => {
            for (pos, child) in tree.root().children.iter().enumerate() {
                objective[child.index] += est.child_rho(tree, 0, pos);
            }
            for (id, node) in tree.nodes().iter().enumerate().skip(1) {
                if node.children.is_empty() {
                    continue;
                }
                let radius = eps1 * est.rho_bar[id]
                    + eps2 * nf.powf(node.level as f64 - 1.0 + delta);
                let rho = est.rho[id];
                let coeffs = (0..node.children.len())
                    .map(|pos| (node.children[pos].index, est.child_rho(tree, id, pos)))
                    .collect();
                rows.push(LinearRow {
                    label: tuple_label(&node.tuple),
                    constant: coeff_to_f64(&node.constant),
                    coeffs,
                    lower: rho - radius,
                    upper: rho + radius,
                    dev_lower: rho - 2.0 * radius,
                    dev_upper: rho + 2.0 * radius,
                });
            }
        }
    }
    Ok(RelaxProgram {
        n,
        objective_constant,
        objective,
        rows,
        variant,
    })
}

fn tuple_label(tuple: &[usize]) -> String {
    let parts: Vec<String> = tuple.iter().map(|j| (j + 1).to_string()).collect();
    format!("t{}", parts.join("_"))
}

/// Solves the box relaxation. Infeasibility is a status, not an error.
pub fn solve(program: &RelaxProgram, tol: f64) -> Result<FractionalSolution> {
    if !(tol > 0.0) {
        return Err(Error::config(format!("LP tolerance must be positive, got {tol}")));
    }
    if program.objective.len() != program.n {
        return Err(Error::input("objective length does not match variable count"));
    }
    for row in &program.rows {
        if let Some(&(j, _)) = row.coeffs.iter().find(|&&(j, _)| j >= program.n) {
            return Err(Error::input(format!("row {} references variable {}", row.label, j + 1)));
        }
    }
    let lp = BoxLp {
        n: program.n,
        objective: &program.objective,
        rows: program
            .rows
            .iter()
            .map(|r| (r.coeffs.as_slice(), r.lower - r.constant, r.upper - r.constant))
            .collect(),
    };
    Ok(match solve_box_lp(&lp, tol)? {
        LpOutcome::Optimal(y) => FractionalSolution {
            objective_value: program.objective_at(&y),
            y,
            status: LpStatus::Optimal,
        },
        LpOutcome::Infeasible => FractionalSolution {
            y: Vec::new(),
            objective_value: 0.0,
            status: LpStatus::Infeasible,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Graph;
    use crate::poly::{decompose, from_graph_maxcut};

    fn single_edge_program() -> RelaxProgram {
        let g = Graph::new(2, [(0, 1)]).unwrap();
        let tree = decompose(&from_graph_maxcut(&g), Strategy::MaxCutSymmetric).unwrap();
        // Neighbor estimates 1 and 0, i.e. node estimates deg − ρ = 0 and 1.
        let est = EstimationTree {
            rho: vec![0.0, 0.0, 1.0],
            rho_bar: vec![0.0, 1.0, 1.0],
            t_bar: vec![0.0, 1.0, 1.0],
        };
        build_program(&tree, &est, 0.1, 0.1, 1.0, Variant::MaxCut).unwrap()
    }

    #[test]
    fn single_edge_rows_and_objective() {
        let prog = single_edge_program();
        assert_eq!(prog.rows.len(), 2);
        let r1 = &prog.rows[0];
        assert_eq!(r1.coeffs, vec![(1, 1.0)]);
        assert!((r1.lower - 0.8).abs() < 1e-12);
        assert_eq!(r1.upper, 1.0);
        let r2 = &prog.rows[1];
        assert_eq!(r2.coeffs, vec![(0, 1.0)]);
        assert_eq!(r2.lower, 0.0);
        assert!((r2.upper - 0.1).abs() < 1e-12);
        assert_eq!(prog.objective, vec![0.0, 1.0]);
    }

    #[test]
    fn single_edge_solution() {
        let sol = solve(&single_edge_program(), 1e-7).unwrap();
        assert!(sol.is_optimal());
        assert!((sol.objective_value - 1.0).abs() < 1e-9);
        assert!((sol.y[1] - 1.0).abs() < 1e-9);
    }

    fn raw(n: usize, objective: Vec<f64>, rows: Vec<LinearRow>) -> RelaxProgram {
        RelaxProgram {
            n,
            objective_constant: 0.0,
            objective,
            rows,
            variant: Variant::Generic,
        }
    }

    fn row(coeffs: Vec<(usize, f64)>, lower: f64, upper: f64) -> LinearRow {
        LinearRow {
            label: "r".into(),
            constant: 0.0,
            coeffs,
            lower,
            upper,
            dev_lower: lower,
            dev_upper: upper,
        }
    }

    #[test]
    fn infeasible_bounds() {
        let prog = raw(2, vec![1.0, 1.0], vec![row(vec![(0, 1.0), (1, 1.0)], 2.5, 3.0)]);
        assert_eq!(solve(&prog, 1e-7).unwrap().status, LpStatus::Infeasible);
        let prog = raw(
            2,
            vec![1.0, 0.0],
            vec![row(vec![(0, 1.0), (1, 1.0)], 1.5, 2.0), row(vec![(0, 1.0)], 0.0, 0.2)],
        );
        assert_eq!(solve(&prog, 1e-7).unwrap().status, LpStatus::Infeasible);
    }

    #[test]
    fn unconstrained_box() {
        let prog = raw(5, vec![1.0; 5], vec![]);
        let sol = solve(&prog, 1e-7).unwrap();
        assert_eq!(sol.y, vec![1.0; 5]);
        assert!((sol.objective_value - 5.0).abs() < 1e-12);
    }

    #[test]
    fn equality_row() {
        let prog = raw(
            3,
            vec![3.0, 2.0, 1.0],
            vec![row(vec![(0, 1.0), (1, 1.0), (2, 1.0)], 1.5, 1.5)],
        );
        let sol = solve(&prog, 1e-7).unwrap();
        assert!((sol.objective_value - 4.0).abs() < 1e-9);
    }

    #[test]
    fn rejects_bad_tolerance() {
        assert!(matches!(
            solve(&raw(1, vec![1.0], vec![]), 0.0),
            Err(Error::Config(_))
        ));
    }
}
