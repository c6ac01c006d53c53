//! CNF formulas, general Boolean constraint instances and their arithmetization.
//!
//! Constraint file format (1-indexed variables):
//!
//! ```text
//! k n m
//! v1 v2 … vk : HEX
//! ```
//!
//! `HEX` is the truth table read as a number: bit `a` is set iff the
//! constraint holds when variable `v(i+1)` takes bit `i` of `a`. The clause
//! `x1 ∨ x2` is `1 2 : e`. Blank lines and lines starting with `#` or `c` are
//! ignored.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::assignment::Assignment;
use crate::error::{Error, Result};
use crate::poly::{Coeff, SmoothPolynomial};

/// Largest arity accepted by the constraint format (64-bit truth tables).
pub const MAX_ARITY: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Literal {
    pub var: usize,
    pub negated: bool,
}

impl Literal {
    /// From a DIMACS-style signed, 1-indexed integer.
    pub fn from_dimacs(lit: i64) -> Self {
        Literal {
            var: lit.unsigned_abs() as usize - 1,
            negated: lit < 0,
        }
    }

    pub fn to_dimacs(self) -> i64 {
        let v = self.var as i64 + 1;
        if self.negated {
            -v
        } else {
            v
        }
    }

    pub fn holds(self, x: &[u8]) -> bool {
        (x[self.var] == 1) != self.negated
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CnfFormula {
    n: usize,
    clauses: Vec<Vec<Literal>>,
}

impl CnfFormula {
    /// Repeated literals inside a clause are merged; empty clauses, clauses
    /// with complementary literals and out-of-range variables are rejected.
    pub fn new(n: usize, clauses: Vec<Vec<Literal>>) -> Result<Self> {
        let mut out = Vec::with_capacity(clauses.len());
        for (idx, mut clause) in clauses.into_iter().enumerate() {
            clause.sort();
            clause.dedup();
            check_clause(&clause, n).map_err(|msg| Error::input(format!("clause {}: {msg}", idx + 1)))?;
            out.push(clause);
        }
        Ok(CnfFormula { n, clauses: out })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.clauses.len()
    }

    pub fn clauses(&self) -> &[Vec<Literal>] {
        &self.clauses
    }

    /// Largest clause length.
    pub fn arity(&self) -> usize {
        self.clauses.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn count_satisfied(&self, x: &Assignment) -> Result<usize> {
        check_len(x, self.n)?;
        let bits = x.bits();
        Ok(self
            .clauses
            .iter()
            .filter(|c| c.iter().any(|l| l.holds(bits)))
            .count())
    }

    pub fn to_csp(&self) -> CspInstance {
        let constraints = self
            .clauses
            .iter()
            .map(|clause| {
                let vars: Vec<usize> = clause.iter().map(|l| l.var).collect();
                // The one falsifying row sets every literal false.
                let falsifying: usize = clause
                    .iter()
                    .enumerate()
                    .map(|(i, l)| usize::from(l.negated) << i)
                    .sum();
                let table = (0..1usize << vars.len()).map(|a| a != falsifying).collect();
                Constraint { vars, table }
            })
            .collect();
        CspInstance {
            n: self.n,
            k: self.arity(),
            constraints,
        }
    }

    pub fn parse_dimacs(text: &str) -> Result<Self> {
        let mut header: Option<(usize, usize, usize)> = None;
        let mut clauses: Vec<Vec<Literal>> = Vec::new();
        let mut current: Vec<Literal> = Vec::new();
        let mut current_line = 0;
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('c') || line.starts_with('%') {
                continue;
            }
            if line.starts_with('p') {
                if header.is_some() {
                    return Err(Error::parse(line_no, "duplicate header"));
                }
                let parts: Vec<&str> = line.split_whitespace().collect();
                if parts.len() != 4 || parts[1] != "cnf" {
                    return Err(Error::parse(line_no, "expected `p cnf <n> <m>`"));
                }
                let n = parts[2]
                    .parse()
                    .map_err(|_| Error::parse(line_no, "invalid variable count"))?;
                let m = parts[3]
                    .parse()
                    .map_err(|_| Error::parse(line_no, "invalid clause count"))?;
                header = Some((n, m, line_no));
                continue;
            }
            let (n, _, _) = header.ok_or_else(|| Error::parse(line_no, "clause before header"))?;
            for tok in line.split_whitespace() {
                let lit: i64 = tok
                    .parse()
                    .map_err(|_| Error::parse(line_no, format!("invalid literal `{tok}`")))?;
                if current.is_empty() {
                    current_line = line_no;
                }
                if lit == 0 {
                    let mut clause = std::mem::take(&mut current);
                    clause.sort();
                    clause.dedup();
                    if clause.is_empty() {
                        return Err(Error::parse(line_no, "empty clause"));
                    }
                    check_clause(&clause, n).map_err(|msg| Error::parse(current_line, msg))?;
                    clauses.push(clause);
                    continue;
                }
                if lit.unsigned_abs() as usize > n {
                    return Err(Error::parse(
                        line_no,
                        format!("variable {} out of range 1..={n}", lit.unsigned_abs()),
                    ));
                }
                current.push(Literal::from_dimacs(lit));
            }
        }
        let (n, m, header_line) = header.ok_or_else(|| Error::parse(1, "missing header"))?;
        if !current.is_empty() {
            return Err(Error::parse(current_line, "clause not terminated by 0"));
        }
        if clauses.len() != m {
            return Err(Error::parse(
                header_line,
                format!("header declares {m} clauses, found {}", clauses.len()),
            ));
        }
        Ok(CnfFormula { n, clauses })
    }

    pub fn to_dimacs(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "p cnf {} {}", self.n, self.m());
        for clause in &self.clauses {
            for l in clause {
                let _ = write!(out, "{} ", l.to_dimacs());
            }
            out.push_str("0\n");
        }
        out
    }
}

fn check_clause(clause: &[Literal], n: usize) -> std::result::Result<(), String> {
    if clause.is_empty() {
        return Err("empty clause".into());
    }
    if let Some(l) = clause.iter().find(|l| l.var >= n) {
        return Err(format!("variable {} out of range 1..={n}", l.var + 1));
    }
    if clause.windows(2).any(|w| w[0].var == w[1].var) {
        return Err("clause contains a variable and its negation".into());
    }
    Ok(())
}

fn check_len(x: &Assignment, n: usize) -> Result<()> {
    if x.len() != n {
        return Err(Error::input(format!(
            "assignment has {} entries, instance has {n} variables",
            x.len()
        )));
    }
    Ok(())
}

/// A Boolean constraint on distinct variables given by its truth table.
/// Row `a` of `table` is the value when `vars[i]` takes bit `i` of `a`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Constraint {
    pub vars: Vec<usize>,
    pub table: Vec<bool>,
}

impl Constraint {
    pub fn holds(&self, x: &[u8]) -> bool {
        let row: usize = self
            .vars
            .iter()
            .enumerate()
            .map(|(i, &v)| usize::from(x[v]) << i)
            .sum();
        self.table[row]
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CspInstance {
    n: usize,
    k: usize,
    constraints: Vec<Constraint>,
}

impl CspInstance {
    pub fn new(n: usize, constraints: Vec<Constraint>) -> Result<Self> {
        let mut k = 0;
        for (idx, c) in constraints.iter().enumerate() {
            let fail = |msg: String| Error::input(format!("constraint {}: {msg}", idx + 1));
            if c.vars.is_empty() || c.vars.len() > MAX_ARITY {
                return Err(fail(format!("arity must be 1..={MAX_ARITY}")));
            }
            if let Some(&v) = c.vars.iter().find(|&&v| v >= n) {
                return Err(fail(format!("variable {} out of range", v + 1)));
            }
            let mut sorted = c.vars.clone();
            sorted.sort_unstable();
            if sorted.windows(2).any(|w| w[0] == w[1]) {
                return Err(fail("repeated variable".into()));
            }
            if c.table.len() != 1 << c.vars.len() {
                return Err(fail("truth table length must be 2^arity".into()));
            }
            if !c.table.iter().any(|&b| b) {
                return Err(fail("constraint is unsatisfiable".into()));
            }
            k = k.max(c.vars.len());
        }
        Ok(CspInstance { n, k, constraints })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn m(&self) -> usize {
        self.constraints.len()
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn count_satisfied(&self, x: &Assignment) -> Result<usize> {
        check_len(x, self.n)?;
        Ok(self.constraints.iter().filter(|c| c.holds(x.bits())).count())
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut header: Option<(usize, usize, usize, usize)> = None;
        let mut constraints = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') || line.starts_with('c') {
                continue;
            }
            let Some((k, n, _, _)) = header else {
                let nums: Vec<usize> = line
                    .split_whitespace()
                    .map(|t| t.parse::<usize>())
                    .collect::<std::result::Result<_, _>>()
                    .map_err(|_| Error::parse(line_no, "expected header `k n m`"))?;
                if nums.len() != 3 {
                    return Err(Error::parse(line_no, "expected header `k n m`"));
                }
                if nums[0] == 0 || nums[0] > MAX_ARITY {
                    return Err(Error::parse(line_no, format!("arity must be 1..={MAX_ARITY}")));
                }
                header = Some((nums[0], nums[1], nums[2], line_no));
                continue;
            };
            let (vars_part, table_part) = line
                .split_once(':')
                .ok_or_else(|| Error::parse(line_no, "expected `v1 … vk : hex`"))?;
            let vars: Vec<usize> = vars_part
                .split_whitespace()
                .map(|t| match t.parse::<usize>() {
                    Ok(v) if v >= 1 && v <= n => Ok(v - 1),
                    _ => Err(Error::parse(line_no, format!("invalid variable `{t}`"))),
                })
                .collect::<Result<_>>()?;
            if vars.len() != k {
                return Err(Error::parse(line_no, format!("expected {k} variables")));
            }
            let hex = table_part.trim().trim_start_matches("0x");
            let bits = u64::from_str_radix(hex, 16)
                .map_err(|_| Error::parse(line_no, format!("invalid truth table `{hex}`")))?;
            let rows = 1usize << k;
            if rows < 64 && bits >> rows != 0 {
                return Err(Error::parse(line_no, "truth table has bits beyond 2^k rows"));
            }
            let table = (0..rows).map(|a| bits >> a & 1 == 1).collect();
            let c = Constraint { vars, table };
            CspInstance::new(n, vec![c.clone()]).map_err(|e| match e {
                Error::Input(msg) => Error::parse(line_no, msg),
                other => other,
            })?;
            constraints.push(c);
        }
        let (_, n, m, header_line) = header.ok_or_else(|| Error::parse(1, "missing header"))?;
        if constraints.len() != m {
            return Err(Error::parse(
                header_line,
                format!("header declares {m} constraints, found {}", constraints.len()),
            ));
        }
        CspInstance::new(n, constraints)
    }

    /// Serializes in the constraint file format; all constraints must share
    /// one arity.
    pub fn to_text(&self) -> Result<String> {
        if self.constraints.iter().any(|c| c.vars.len() != self.k) {
            return Err(Error::input("text format needs a uniform arity"));
        }
        let mut out = String::new();
        let _ = writeln!(out, "{} {} {}", self.k, self.n, self.m());
        for c in &self.constraints {
            for v in &c.vars {
                let _ = write!(out, "{} ", v + 1);
            }
            let bits: u64 = c
                .table
                .iter()
                .enumerate()
                .map(|(a, &b)| u64::from(b) << a)
                .sum();
            let _ = writeln!(out, ": {bits:x}");
        }
        Ok(out)
    }
}

/// `Σ_constraints Σ_{satisfying rows a} Π_i (x_i if a_i = 1 else 1 − x_i)`,
/// expanded into merged multilinear monomials. Its value at any binary point
/// is the number of satisfied constraints.
pub fn arithmetize(inst: &CspInstance) -> Result<SmoothPolynomial> {
    let mut merged: BTreeMap<Vec<usize>, i64> = BTreeMap::new();
    let mut constant: i64 = 0;
    for c in &inst.constraints {
        let arity = c.vars.len();
        // Coefficient of Π_{i∈mask} x_{vars[i]} in this constraint's polynomial.
        let mut local = vec![0i64; 1 << arity];
        for (a, _) in c.table.iter().enumerate().filter(|(_, &b)| b) {
            let zeros = !a & ((1 << arity) - 1);
            // Expand Π_{i∉a} (1 − x_i): every subset t of the zero positions.
            let mut t = zeros;
            loop {
                let sign = if t.count_ones() % 2 == 0 { 1 } else { -1 };
                local[a | t] += sign;
                if t == 0 {
                    break;
                }
                t = (t - 1) & zeros;
            }
        }
        for (mask, &coef) in local.iter().enumerate() {
            if coef == 0 {
                continue;
            }
            if mask == 0 {
                constant = constant
                    .checked_add(coef)
                    .ok_or_else(|| Error::input("coefficient overflow"))?;
                continue;
            }
            let mut vars: Vec<usize> = (0..arity)
                .filter(|i| mask >> i & 1 == 1)
                .map(|i| c.vars[i])
                .collect();
            vars.sort_unstable();
            let slot = merged.entry(vars).or_insert(0);
            *slot = slot
                .checked_add(coef)
                .ok_or_else(|| Error::input("coefficient overflow"))?;
        }
    }
    SmoothPolynomial::from_terms(
        inst.n,
        Coeff::from_integer(constant),
        merged
            .into_iter()
            .filter(|(_, c)| *c != 0)
            .map(|(v, c)| (v, Coeff::from_integer(c))),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn int(v: i64) -> Coeff {
        Coeff::from_integer(v)
    }

    fn cnf(text: &str) -> CnfFormula {
        CnfFormula::parse_dimacs(text).unwrap()
    }

    #[test]
    fn or_clause_arithmetization() {
        let p = arithmetize(&cnf("p cnf 2 1\n1 2 0\n").to_csp()).unwrap();
        let expected = SmoothPolynomial::from_terms(
            2,
            int(0),
            [(vec![0], int(1)), (vec![1], int(1)), (vec![0, 1], int(-1))],
        )
        .unwrap();
        assert_eq!(p, expected);
    }

    #[test]
    fn negated_clause_arithmetization() {
        let p = arithmetize(&cnf("p cnf 2 1\n-1 -2 0\n").to_csp()).unwrap();
        let expected = SmoothPolynomial::from_terms(2, int(1), [(vec![0, 1], int(-1))]).unwrap();
        assert_eq!(p, expected);
    }

    #[test]
    fn counting() {
        let f = cnf("p cnf 2 1\n1 2 0\n");
        assert_eq!(f.count_satisfied(&Assignment::zeros(2)).unwrap(), 0);
        assert_eq!(
            f.count_satisfied(&Assignment::from_bits(vec![1, 0]).unwrap()).unwrap(),
            1
        );
        let f = cnf("p cnf 3 4\n1 -2 3 0\n1 -2 3 0\n1 -2 3 0\n1 -2 3 0\n");
        assert_eq!(
            f.count_satisfied(&Assignment::from_bits(vec![1, 1, 0]).unwrap()).unwrap(),
            4
        );
    }

    #[test]
    fn dimacs_parsing() {
        let f = cnf("c comment\np cnf 2 1\n1 -2 0\n");
        assert_eq!(
            f.clauses()[0],
            vec![
                Literal { var: 0, negated: false },
                Literal { var: 1, negated: true }
            ]
        );
        assert!(matches!(
            CnfFormula::parse_dimacs("p cnf 2 1\n3 0\n"),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!(matches!(
            CnfFormula::parse_dimacs("p cnf 2 2\n1 2 0\n0\n"),
            Err(Error::Parse { line: 3, .. })
        ));
        assert!(matches!(
            CnfFormula::parse_dimacs("p cnf 2 1\n1 -1 0\n"),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!(CnfFormula::parse_dimacs("p cnf x 1\n").is_err());
        // Clauses may span lines.
        assert_eq!(cnf("p cnf 3 1\n1 2\n3 0\n").clauses()[0].len(), 3);
        let f = cnf("p cnf 3 2\n1 2 0\n-3 1 0\n");
        assert_eq!(CnfFormula::parse_dimacs(&f.to_dimacs()).unwrap(), f);
    }

    #[test]
    fn constraint_format_roundtrip() {
        let inst = CspInstance::parse("2 3 2\n1 2 : e\n2 3 : 6\n").unwrap();
        assert_eq!(inst.constraints()[0].table, vec![false, true, true, true]);
        assert_eq!(CspInstance::parse(&inst.to_text().unwrap()).unwrap(), inst);
        let x = Assignment::from_bits(vec![0, 1, 1]).unwrap();
        assert_eq!(inst.count_satisfied(&x).unwrap(), 1);
        assert!(matches!(
            CspInstance::parse("2 3 1\n1 2 : 0\n"),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!(matches!(
            CspInstance::parse("2 3 1\n1 1 : f\n"),
            Err(Error::Parse { line: 2, .. })
        ));
    }

    #[test]
    fn xor_constraint_arithmetization_counts() {
        let inst = CspInstance::parse("2 2 1\n1 2 : 6\n").unwrap();
        let p = arithmetize(&inst).unwrap();
        for mask in 0..4 {
            let x = Assignment::from_mask(mask, 2);
            assert_eq!(p.evaluate(&x).unwrap(), int(inst.count_satisfied(&x).unwrap() as i64));
        }
    }
}
