//! Independent reference implementations shared by the integration tests.
#![allow(dead_code)]

use rand::Rng;
use smoothopt::relaxation::{LinearRow, RelaxProgram, Variant};
use smoothopt::rng::StreamRng;
use smoothopt::Graph;

/// Optimum of a box-constrained program by enumerating basic points: every
/// variable is fixed at 0 or 1 or left free, and the free ones are pinned by
/// as many rows held tight at one of their bounds. Returns `None` when no
/// enumerated point is feasible.
pub fn lp_vertex_optimum(prog: &RelaxProgram, tol: f64) -> Option<f64> {
    let n = prog.n;
    let m = prog.rows.len();
    let dense: Vec<Vec<f64>> = prog
        .rows
        .iter()
        .map(|r| {
            let mut d = vec![0.0; n];
            for &(j, c) in &r.coeffs {
                d[j] += c;
            }
            d
        })
        .collect();
    let mut best: Option<f64> = None;
    let mut status = vec![0u8; n];
    loop {
        let free: Vec<usize> = (0..n).filter(|&j| status[j] == 2).collect();
        let f = free.len();
        if f <= m {
            for rows in combinations(m, f) {
                for sides in 0..(1u32 << f) {
                    if let Some(y) = solve_pinned(prog, &dense, &status, &free, &rows, sides) {
                        if feasible(prog, &y, tol) {
                            let v = prog.objective_at(&y);
                            best = Some(best.map_or(v, |b: f64| b.max(v)));
                        }
                    }
                }
            }
        }
        // Next status vector in base 3.
        let mut i = 0;
        loop {
            if i == n {
                return best;
            }
            status[i] += 1;
            if status[i] == 3 {
                status[i] = 0;
                i += 1;
            } else {
                break;
            }
        }
    }
}

fn feasible(prog: &RelaxProgram, y: &[f64], tol: f64) -> bool {
    y.iter().all(|&v| v >= -tol && v <= 1.0 + tol)
        && prog.rows.iter().all(|r| {
            let v = r.value(y);
            v >= r.lower - tol && v <= r.upper + tol
        })
}

fn solve_pinned(
    prog: &RelaxProgram,
    dense: &[Vec<f64>],
    status: &[u8],
    free: &[usize],
    rows: &[usize],
    sides: u32,
) -> Option<Vec<f64>> {
    let n = prog.n;
    let mut y: Vec<f64> = status.iter().map(|&s| if s == 1 { 1.0 } else { 0.0 }).collect();
    let f = free.len();
    if f == 0 {
        return Some(y);
    }
    let mut a = vec![vec![0.0; f + 1]; f];
    for (k, &ri) in rows.iter().enumerate() {
        let row = &prog.rows[ri];
        let target = if sides >> k & 1 == 1 { row.upper } else { row.lower };
        let mut rhs = target - row.constant;
        let dense = &dense[ri];
        for j in 0..n {
            if status[j] != 2 {
                rhs -= dense[j] * y[j];
            }
        }
        for (c, &j) in free.iter().enumerate() {
            a[k][c] = dense[j];
        }
        a[k][f] = rhs;
    }
    // Gaussian elimination with partial pivoting.
    for col in 0..f {
        let piv = (col..f).max_by(|&p, &q| a[p][col].abs().total_cmp(&a[q][col].abs()))?;
        if a[piv][col].abs() < 1e-10 {
            return None;
        }
        a.swap(col, piv);
        for r in 0..f {
            if r != col {
                let factor = a[r][col] / a[col][col];
                for c in col..=f {
                    a[r][c] -= factor * a[col][c];
                }
            }
        }
    }
    for (c, &j) in free.iter().enumerate() {
        y[j] = a[c][f] / a[c][c];
    }
    Some(y)
}

pub fn combinations(m: usize, f: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn rec(start: usize, m: usize, f: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == f {
            out.push(cur.clone());
            return;
        }
        for i in start..m {
            cur.push(i);
            rec(i + 1, m, f, cur, out);
            cur.pop();
        }
    }
    rec(0, m, f, &mut cur, &mut out);
    out
}

/// A random two-sided program around a random interior point; roughly one in
/// six has a deliberately shifted row and is often infeasible.
pub fn random_program(rng: &mut StreamRng) -> RelaxProgram {
    let n = rng.gen_range(2..=8);
    let m = rng.gen_range(1..=10);
    let y0: Vec<f64> = (0..n).map(|_| rng.gen::<f64>()).collect();
    let mut rows = Vec::new();
    for i in 0..m {
        let mut coeffs = Vec::new();
        for j in 0..n {
            if rng.gen_bool(0.6) {
                let c = rng.gen_range(-3..=3) as f64;
                if c != 0.0 {
                    coeffs.push((j, c));
                }
            }
        }
        if coeffs.is_empty() {
            coeffs.push((rng.gen_range(0..n), 1.0));
        }
        let constant = rng.gen_range(-2..=2) as f64;
        let at: f64 = constant + coeffs.iter().map(|&(j, c)| c * y0[j]).sum::<f64>();
        let shift = if rng.gen_bool(1.0 / 6.0) { rng.gen_range(-4.0..4.0) } else { 0.0 };
        let (lower, upper) = if rng.gen_bool(0.15) {
            (at + shift, at + shift)
        } else {
            (
                at + shift - rng.gen_range(0.0..1.5),
                at + shift + rng.gen_range(0.0..1.5),
            )
        };
        rows.push(LinearRow {
            label: format!("r{i}"),
            constant,
            coeffs,
            lower,
            upper,
            dev_lower: lower,
            dev_upper: upper,
        });
    }
    RelaxProgram {
        n,
        objective_constant: 0.0,
        objective: (0..n).map(|_| rng.gen_range(-5.0..5.0)).collect(),
        rows,
        variant: Variant::Generic,
    }
}

/// Maximum cut by plain enumeration of all bipartitions.
pub fn brute_force_cut(g: &Graph) -> usize {
    let n = g.n();
    (0u64..1 << n)
        .map(|mask| {
            g.edges()
                .iter()
                .filter(|&&(u, v)| (mask >> u & 1) != (mask >> v & 1))
                .count()
        })
        .max()
        .unwrap_or(0)
}

/// Uniform random graph with exactly `m` distinct edges.
pub fn random_graph(n: usize, m: usize, rng: &mut StreamRng) -> Graph {
    let mut all: Vec<(usize, usize)> = (0..n)
        .flat_map(|u| (u + 1..n).map(move |v| (u, v)))
        .collect();
    for i in 0..m.min(all.len()) {
        let j = rng.gen_range(i..all.len());
        all.swap(i, j);
    }
    all.truncate(m);
    Graph::new(n, all).unwrap()
}
