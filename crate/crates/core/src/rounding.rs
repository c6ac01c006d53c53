//! Randomized rounding of fractional solutions and the deviation check.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::assignment::Assignment;
use crate::error::{Error, Result};
use crate::relaxation::{FractionalSolution, RelaxProgram};

const GAIN_TOL: f64 = 1e-12;
const INTEGRAL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RowSlack {
    pub label: String,
    pub value: f64,
    pub dev_lower: f64,
    pub dev_upper: f64,
    /// Distance outside `[dev_lower, dev_upper]`, zero when inside.
    pub violation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviationReport {
    pub rows: Vec<RowSlack>,
    pub worst_violation: f64,
    pub worst_row: Option<String>,
    pub pass: bool,
}

/// Evaluates every program row at `z` against its widened deviation bounds.
pub fn check_deviation(z: &Assignment, program: &RelaxProgram) -> Result<DeviationReport> {
    if z.len() != program.n {
        return Err(Error::input("assignment length does not match program"));
    }
    let y = z.as_f64();
    let mut rows = Vec::with_capacity(program.rows.len());
    let mut worst = 0.0f64;
    let mut worst_row = None;
    for row in &program.rows {
        let value = row.value(&y);
        let scale = 1e-9 * (1.0 + row.dev_lower.abs().max(row.dev_upper.abs()));
        let violation = (row.dev_lower - value).max(value - row.dev_upper).max(0.0);
        let violation = if violation <= scale { 0.0 } else { violation };
        if violation > worst {
            worst = violation;
            worst_row = Some(row.label.clone());
        }
        rows.push(RowSlack {
            label: row.label.clone(),
            value,
            dev_lower: row.dev_lower,
            dev_upper: row.dev_upper,
            violation,
        });
    }
    Ok(DeviationReport {
        rows,
        worst_violation: worst,
        worst_row,
        pass: worst == 0.0,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundingOutcome {
    pub z: Assignment,
    /// Program objective at `z`.
    pub objective: f64,
    pub trials_passing: usize,
    pub greedy_flips: usize,
    pub floor_flips: usize,
    pub deviation: DeviationReport,
}

/// Best-of-`trials` independent rounding followed by a greedy pass.
///
/// Each trial sets `z_j = 1` with probability `y_j`. Trials that pass the
/// deviation check are preferred (highest objective, then lexicographically
/// smallest); if none passes, the trial with the smallest worst violation is
/// kept. The greedy pass then flips single bits that strictly raise the
/// objective without increasing any row's violation of its program bounds,
/// in index order until stable. If the objective is still more than 1 below
/// the fractional optimum, best-gain flips ignoring the rows close the gap.
pub fn round<R: Rng + ?Sized>(
    sol: &FractionalSolution,
    program: &RelaxProgram,
    trials: usize,
    rng: &mut R,
) -> Result<RoundingOutcome> {
    round_scored(sol, program, trials, rng, |_, objective| objective)
}

/// [`round`] with trials ranked by `score(z, program objective at z)` instead
/// of the program objective alone; deviation-passing trials still come first.
pub fn round_scored<R, F>(
    sol: &FractionalSolution,
    program: &RelaxProgram,
    trials: usize,
    rng: &mut R,
    score: F,
) -> Result<RoundingOutcome>
where
    R: Rng + ?Sized,
    F: Fn(&Assignment, f64) -> f64,
{
    if !sol.is_optimal() {
        return Err(Error::input("cannot round an infeasible relaxation"));
    }
    if trials == 0 {
        return Err(Error::config("rounding needs at least one trial"));
    }
    let n = program.n;
    if sol.y.len() != n {
        return Err(Error::input("fractional solution length does not match program"));
    }

    if sol
        .y
        .iter()
        .all(|&v| v <= INTEGRAL_TOL || v >= 1.0 - INTEGRAL_TOL)
    {
        let z = Assignment::from_bools(sol.y.iter().map(|&v| v >= 0.5));
        let deviation = check_deviation(&z, program)?;
        return Ok(RoundingOutcome {
            objective: program.objective_at(&z.as_f64()),
            trials_passing: usize::from(deviation.pass),
            z,
            greedy_flips: 0,
            floor_flips: 0,
            deviation,
        });
    }

    let mut best: Option<(Assignment, f64, DeviationReport)> = None;
    let mut passing = 0;
    for _ in 0..trials {
        let z = Assignment::from_bools(sol.y.iter().map(|&p| rng.gen::<f64>() < p));
        let objective = score(&z, program.objective_at(&z.as_f64()));
        let report = check_deviation(&z, program)?;
        passing += usize::from(report.pass);
        let better = match &best {
            None => true,
            Some((bz, bobj, brep)) => match (report.pass, brep.pass) {
                (true, false) => true,
                (false, true) => false,
                (true, true) => objective > *bobj || (objective == *bobj && z < *bz),
                (false, false) => {
                    report.worst_violation < brep.worst_violation
                        || (report.worst_violation == brep.worst_violation
                            && (objective > *bobj || (objective == *bobj && z < *bz)))
                }
            },
        };
        if better {
            best = Some((z, objective, report));
        }
    }
    let (mut z, _, _) = best.expect("at least one trial");

    let mut columns: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for (r, row) in program.rows.iter().enumerate() {
        for &(j, a) in &row.coeffs {
            columns[j].push((r, a));
        }
    }
    let zf = z.as_f64();
    let mut values: Vec<f64> = program.rows.iter().map(|row| row.value(&zf)).collect();
    let violation = |r: usize, v: f64| {
        let row = &program.rows[r];
        (row.lower - v).max(v - row.upper).max(0.0)
    };

    let mut greedy_flips = 0;
    loop {
        let mut changed = false;
        for j in 0..n {
            let sign = if z.get(j) { -1.0 } else { 1.0 };
            if sign * program.objective[j] <= GAIN_TOL {
                continue;
            }
            let allowed = columns[j].iter().all(|&(r, a)| {
                violation(r, values[r] + sign * a) <= violation(r, values[r]) + GAIN_TOL
            });
            if allowed {
                for &(r, a) in &columns[j] {
                    values[r] += sign * a;
                }
                z.set(j, !z.get(j));
                greedy_flips += 1;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }

    let target = sol.objective_value - 1.0;
    let mut objective = program.objective_at(&z.as_f64());
    let mut floor_flips = 0;
    while objective < target {
        let pick = (0..n)
            .map(|j| {
                let sign = if z.get(j) { -1.0 } else { 1.0 };
                (j, sign * program.objective[j])
            })
            .filter(|&(_, gain)| gain > GAIN_TOL)
            .fold(None, |acc: Option<(usize, f64)>, cand| match acc {
                Some(a) if a.1 >= cand.1 => Some(a),
                _ => Some(cand),
            });
        let Some((j, gain)) = pick else { break };
        z.set(j, !z.get(j));
        objective += gain;
        floor_flips += 1;
    }

    let objective = program.objective_at(&z.as_f64());
    let deviation = check_deviation(&z, program)?;
    Ok(RoundingOutcome {
        z,
        objective,
        trials_passing: passing,
        greedy_flips,
        floor_flips,
        deviation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::relaxation::{LinearRow, LpStatus, Variant};
    use crate::rng;

    fn program(n: usize, objective: Vec<f64>, rows: Vec<LinearRow>) -> RelaxProgram {
        RelaxProgram {
            n,
            objective_constant: 0.0,
            objective,
            rows,
            variant: Variant::Generic,
        }
    }

    fn optimal(y: Vec<f64>, value: f64) -> FractionalSolution {
        FractionalSolution {
            y,
            objective_value: value,
            status: LpStatus::Optimal,
        }
    }

    #[test]
    fn integral_solution_is_kept() {
        let prog = program(3, vec![1.0, -1.0, 1.0], vec![]);
        let out = round(&optimal(vec![1.0, 0.0, 1.0], 2.0), &prog, 4, &mut rng::stream(1, &[])).unwrap();
        assert_eq!(out.z.bits(), &[1, 0, 1]);
    }

    #[test]
    fn greedy_reaches_monotone_optimum() {
        let prog = program(2, vec![1.0, 1.0], vec![]);
        let out = round(&optimal(vec![0.5, 0.5], 1.0), &prog, 8, &mut rng::stream(2, &[])).unwrap();
        assert_eq!(out.z.bits(), &[1, 1]);
        assert_eq!(out.objective, 2.0);
    }

    #[test]
    fn greedy_respects_rows() {
        // y1 + y2 ≤ 1 with objective y1 + y2: greedy must not set both.
        let row = LinearRow {
            label: "cap".into(),
            constant: 0.0,
            coeffs: vec![(0, 1.0), (1, 1.0)],
            lower: 0.0,
            upper: 1.0,
            dev_lower: 0.0,
            dev_upper: 1.0,
        };
        let prog = program(2, vec![1.0, 1.0], vec![row]);
        for seed in 0..20 {
            let out =
                round(&optimal(vec![0.5, 0.5], 1.0), &prog, 16, &mut rng::stream(seed, &[])).unwrap();
            assert_eq!(out.z.ones(), 1);
            assert!(out.deviation.pass);
        }
    }

    #[test]
    fn deviation_names_violated_row() {
        let row = LinearRow {
            label: "v3".into(),
            constant: 0.0,
            coeffs: vec![(0, 1.0)],
            lower: 0.0,
            upper: 0.2,
            dev_lower: 0.0,
            dev_upper: 0.5,
        };
        let prog = program(1, vec![0.0], vec![row]);
        let rep = check_deviation(&Assignment::from_bits(vec![1]).unwrap(), &prog).unwrap();
        assert!(!rep.pass);
        assert_eq!(rep.worst_row.as_deref(), Some("v3"));
        assert!((rep.worst_violation - 0.5).abs() < 1e-12);
        let empty = program(1, vec![0.0], vec![]);
        assert!(check_deviation(&Assignment::zeros(1), &empty).unwrap().pass);
    }
}
