//! Dense two-phase primal simplex for `max c·y` over `y ∈ [0,1]^n` subject to
//! two-sided rows `lo ≤ a·y ≤ hi`.
//!
//! Structural variables carry their box as bounds (nonbasic at lower or upper,
//! with bound flips), so the tableau only holds the row constraints. Each
//! two-sided row becomes up to two one-sided rows with nonnegative slacks; sides
//! that the box already implies are dropped. Rows whose initial residual has
//! the wrong sign get an artificial variable for phase 1.

use crate::error::{Error, Result};

pub(crate) struct BoxLp<'a> {
    pub n: usize,
    pub objective: &'a [f64],
    /// `(coefficients, lo, hi)`, with the row constant already moved into the bounds.
    pub rows: Vec<(&'a [(usize, f64)], f64, f64)>,
}

pub(crate) enum LpOutcome {
    Optimal(Vec<f64>),
    Infeasible,
}

const PIVOT_TOL: f64 = 1e-9;
const DEGENERATE_STREAK: usize = 50;

#[derive(Clone, Copy, PartialEq)]
enum Kind {
    Structural,
    Slack,
    Artificial,
}

struct Tableau {
    /// `m × cols` coefficient matrix `B⁻¹A`.
    t: Vec<Vec<f64>>,
    basis: Vec<usize>,
    /// Current value of each basic variable, by row.
    xb: Vec<f64>,
    /// Current value of every variable (basic entries are refreshed from `xb`).
    x: Vec<f64>,
    upper: Vec<f64>,
    kind: Vec<Kind>,
    is_basic: Vec<bool>,
}

pub(crate) fn solve_box_lp(lp: &BoxLp<'_>, tol: f64) -> Result<LpOutcome> {
    let n = lp.n;
    let mut eq_rows: Vec<(Vec<(usize, f64)>, f64, i8)> = Vec::new();
    for &(coeffs, lo, hi) in &lp.rows {
        let (mut emin, mut emax) = (0.0, 0.0);
        for &(_, a) in coeffs {
            if a < 0.0 {
                emin += a;
            } else {
                emax += a;
            }
        }
        let scale = 1.0 + lo.abs().max(hi.abs());
        if lo > hi + tol * scale || lo > emax + tol * scale || hi < emin - tol * scale {
            return Ok(LpOutcome::Infeasible);
        }
        let dense: Vec<(usize, f64)> = coeffs.iter().copied().filter(|&(_, a)| a != 0.0).collect();
        if dense.is_empty() {
            continue;
        }
        if (hi - lo).abs() <= tol * scale {
            eq_rows.push((dense, 0.5 * (lo + hi), 0));
            continue;
        }
        if hi < emax - tol * scale {
            eq_rows.push((dense.clone(), hi, 1));
        }
        if lo > emin + tol * scale {
            eq_rows.push((dense, lo, -1));
        }
    }

    let m = eq_rows.len();
    let slack_count = eq_rows.iter().filter(|r| r.2 != 0).count();
    // Structural variables start at 0, so the residual of row i is b_i. A row
    // `a·y + s = b` with b ≥ 0 (or `a·y − s = b` with b < 0) starts feasible
    // with its slack basic; every other row needs an artificial.
    let needs_art: Vec<bool> = eq_rows
        .iter()
        .map(|&(_, b, sense)| match sense {
            1 => b < 0.0,
            -1 => b >= 0.0,
            _ => true,
        })
        .collect();
    let art_count = needs_art.iter().filter(|&&a| a).count();
    let cols = n + slack_count + art_count;

    let mut tab = Tableau {
        t: vec![vec![0.0; cols]; m],
        basis: vec![0; m],
        xb: vec![0.0; m],
        x: vec![0.0; cols],
        upper: vec![f64::INFINITY; cols],
        kind: vec![Kind::Slack; cols],
        is_basic: vec![false; cols],
    };
    for j in 0..n {
        tab.upper[j] = 1.0;
        tab.kind[j] = Kind::Structural;
    }
    let mut next_slack = n;
    let mut next_art = n + slack_count;
    for (i, (coeffs, b, sense)) in eq_rows.iter().enumerate() {
        let flip = if *b < 0.0 { -1.0 } else { 1.0 };
        for &(j, a) in coeffs {
            tab.t[i][j] = a * flip;
        }
        let rhs = b * flip;
        let mut slack_col = None;
        if *sense != 0 {
            tab.t[i][next_slack] = f64::from(*sense) * flip;
            slack_col = Some(next_slack);
            next_slack += 1;
        }
        if needs_art[i] {
            tab.t[i][next_art] = 1.0;
            tab.kind[next_art] = Kind::Artificial;
            tab.basis[i] = next_art;
            next_art += 1;
        } else {
            tab.basis[i] = slack_col.expect("rows without artificials have a slack");
        }
        tab.xb[i] = rhs;
        tab.is_basic[tab.basis[i]] = true;
    }

    let max_iter = 200 * (m + cols) + 1000;

    if art_count > 0 {
        let phase1: Vec<f64> = tab
            .kind
            .iter()
            .map(|&k| if k == Kind::Artificial { -1.0 } else { 0.0 })
            .collect();
        run(&mut tab, &phase1, false, max_iter)?;
        let infeasibility: f64 = (0..m)
            .filter(|&i| tab.kind[tab.basis[i]] == Kind::Artificial)
            .map(|i| tab.xb[i].max(0.0))
            .sum();
        let scale = 1.0 + eq_rows.iter().map(|r| r.1.abs()).fold(0.0, f64::max);
        if infeasibility > tol * scale {
            return Ok(LpOutcome::Infeasible);
        }
        for j in 0..cols {
            if tab.kind[j] == Kind::Artificial {
                tab.upper[j] = 0.0;
                if !tab.is_basic[j] {
                    tab.x[j] = 0.0;
                }
            }
        }
        for i in 0..m {
            if tab.kind[tab.basis[i]] == Kind::Artificial {
                tab.xb[i] = 0.0;
            }
        }
    }

    let mut phase2 = vec![0.0; cols];
    phase2[..n].copy_from_slice(lp.objective);
    run(&mut tab, &phase2, true, max_iter)?;

    for i in 0..m {
        let v = tab.xb[i];
        tab.x[tab.basis[i]] = v;
    }
    Ok(LpOutcome::Optimal(
        tab.x[..n].iter().map(|v| v.clamp(0.0, 1.0)).collect(),
    ))
}

/// Primal simplex iterations maximizing `cost · x` from the current basis.
fn run(tab: &mut Tableau, cost: &[f64], skip_artificial: bool, max_iter: usize) -> Result<()> {
    let m = tab.t.len();
    let cols = cost.len();
    // Reduced costs d_j = c_j − Σ_i c_{B(i)} t_ij.
    let mut d = cost.to_vec();
    for i in 0..m {
        let cb = cost[tab.basis[i]];
        if cb != 0.0 {
            for (dj, tij) in d.iter_mut().zip(&tab.t[i]) {
                *dj -= cb * tij;
            }
        }
    }
    let mut degenerate = 0usize;
    for _ in 0..max_iter {
        let bland = degenerate >= DEGENERATE_STREAK;
        let mut enter: Option<(usize, f64)> = None;
        for j in 0..cols {
            if tab.is_basic[j] || (skip_artificial && tab.kind[j] == Kind::Artificial) {
                continue;
            }
            let at_upper = tab.upper[j].is_finite() && tab.x[j] >= tab.upper[j];
            let dir = if d[j] > PIVOT_TOL && !at_upper {
                1.0
            } else if d[j] < -PIVOT_TOL && tab.x[j] > 0.0 {
                -1.0
            } else {
                continue;
            };
            let better = match enter {
                None => true,
                Some((k, _)) => !bland && d[j].abs() > d[k].abs(),
            };
            if better {
                enter = Some((j, dir));
            }
            if bland {
                break;
            }
        }
        let Some((j, dir)) = enter else {
            return Ok(());
        };

        let mut theta = tab.upper[j];
        let mut leave: Option<(usize, bool)> = None;
        let mut best_alpha = 0.0f64;
        for i in 0..m {
            let alpha = tab.t[i][j] * dir;
            let b = tab.basis[i];
            let limit = if alpha > PIVOT_TOL {
                Some(((tab.xb[i] - 0.0).max(0.0) / alpha, false))
            } else if alpha < -PIVOT_TOL && tab.upper[b].is_finite() {
                Some(((tab.upper[b] - tab.xb[i]).max(0.0) / -alpha, true))
            } else {
                None
            };
            if let Some((lim, to_upper)) = limit {
                let take = match leave {
                    None => lim < theta,
                    Some((r, _)) => {
                        lim < theta - PIVOT_TOL
                            || (lim <= theta + PIVOT_TOL
                                && if bland {
                                    tab.basis[i] < tab.basis[r]
                                } else {
                                    alpha.abs() > best_alpha
                                })
                    }
                };
                if take {
                    theta = lim;
                    leave = Some((i, to_upper));
                    best_alpha = alpha.abs();
                }
            }
        }
        if !theta.is_finite() {
            return Err(Error::Solver("linear program is unbounded".into()));
        }
        degenerate = if theta <= 1e-12 { degenerate + 1 } else { 0 };

        for i in 0..m {
            tab.xb[i] -= dir * theta * tab.t[i][j];
        }
        match leave {
            None => {
                // Bound flip of the entering variable.
                tab.x[j] = if dir > 0.0 { tab.upper[j] } else { 0.0 };
            }
            Some((r, to_upper)) => {
                let leaving = tab.basis[r];
                tab.x[leaving] = if to_upper { tab.upper[leaving] } else { 0.0 };
                tab.is_basic[leaving] = false;
                let entering_value = tab.x[j] + dir * theta;
                pivot(tab, &mut d, r, j);
                tab.xb[r] = entering_value;
                tab.x[j] = entering_value;
            }
        }
    }
    Err(Error::Solver(format!(
        "simplex iteration limit ({max_iter}) reached"
    )))
}

fn pivot(tab: &mut Tableau, d: &mut [f64], r: usize, j: usize) {
    let p = tab.t[r][j];
    for v in tab.t[r].iter_mut() {
        *v /= p;
    }
    let pivot_row = tab.t[r].clone();
    for (i, row) in tab.t.iter_mut().enumerate() {
        if i == r {
            continue;
        }
        let f = row[j];
        if f != 0.0 {
            for (v, pv) in row.iter_mut().zip(&pivot_row) {
                *v -= f * pv;
            }
            row[j] = 0.0;
        }
    }
    let f = d[j];
    if f != 0.0 {
        for (v, pv) in d.iter_mut().zip(&pivot_row) {
            *v -= f * pv;
        }
        d[j] = 0.0;
    }
    tab.basis[r] = j;
    tab.is_basic[j] = true;
}
