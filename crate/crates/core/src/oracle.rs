//! Exact brute-force optimizers and Monte-Carlo checks of the sampling and
//! rounding concentration bounds.

use num_integer::Integer;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::assignment::Assignment;
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::poly::{Coeff, SmoothPolynomial};
use crate::rng;

/// Largest `n` accepted by [`brute_force_max`].
pub const MAX_ENUMERATION_VARS: usize = 26;
/// Largest `C(n, k)` accepted by [`brute_force_kdense`].
pub const KDENSE_BUDGET: u64 = 5_000_000;

/// Low bits enumerated by Gray code inside one prefix block.
const PREFIX_BITS: usize = 6;

/// Exact maximum of `p` over `{0,1}^n`; ties go to the lexicographically
/// smallest vector (comparing entry 0 first).
///
/// Coefficients are scaled to integers by the lcm of their denominators and
/// each block of `2^(n−6)` points is walked in Gray-code order, updating the
/// value by the monomials that contain the flipped variable.
pub fn brute_force_max(p: &SmoothPolynomial) -> Result<(Assignment, Coeff)> {
    let n = p.n();
    if n > MAX_ENUMERATION_VARS {
        return Err(Error::config(format!(
            "brute force refuses n = {n} (limit {MAX_ENUMERATION_VARS})"
        )));
    }
    let mut lcm: i128 = 1;
    let denoms = std::iter::once(*p.constant().denom())
        .chain(p.monomials().iter().map(|m| *m.coeff().denom()));
    for d in denoms {
        lcm = lcm.lcm(&(d as i128));
        if lcm > 1 << 60 {
            return Err(Error::input("coefficient denominators too large to scale"));
        }
    }
    let scale = |c: Coeff| *c.numer() as i128 * (lcm / *c.denom() as i128);
    let constant = scale(p.constant());
    let coeffs: Vec<i128> = p.monomials().iter().map(|m| scale(m.coeff())).collect();
    let degrees: Vec<u8> = p.monomials().iter().map(|m| m.degree() as u8).collect();
    let mut by_var: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (idx, m) in p.monomials().iter().enumerate() {
        for &v in m.vars() {
            by_var[v].push(idx);
        }
    }
    let masks: Vec<u64> = p
        .monomials()
        .iter()
        .map(|m| m.vars().iter().map(|&v| 1u64 << v).sum())
        .collect();

    let low = n.saturating_sub(PREFIX_BITS);
    let prefixes = 1u64 << (n - low);
    let block = |prefix: u64| -> (i128, u64) {
        let mut x = prefix << low;
        let mut ones: Vec<u8> = masks.iter().map(|m| (m & x).count_ones() as u8).collect();
        let mut value = constant
            + coeffs
                .iter()
                .zip(&ones)
                .zip(&degrees)
                .filter(|((_, o), d)| o == d)
                .map(|((c, _), _)| *c)
                .sum::<i128>();
        let mut best = (value, lex_key(x, n));
        for g in 1u64..(1u64 << low) {
            let bit = g.trailing_zeros() as usize;
            let turning_on = x >> bit & 1 == 0;
            x ^= 1 << bit;
            for &mi in &by_var[bit] {
                if turning_on {
                    ones[mi] += 1;
                    if ones[mi] == degrees[mi] {
                        value += coeffs[mi];
                    }
                } else {
                    if ones[mi] == degrees[mi] {
                        value -= coeffs[mi];
                    }
                    ones[mi] -= 1;
                }
            }
            let key = lex_key(x, n);
            if value > best.0 || (value == best.0 && key < best.1) {
                best = (value, key);
            }
        }
        best
    };
    let merge = |a: (i128, u64), b: (i128, u64)| {
        if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) {
            b
        } else {
            a
        }
    };
    #[cfg(feature = "parallel")]
    let best = {
        use rayon::prelude::*;
        (0..prefixes)
            .into_par_iter()
            .map(block)
            .reduce(|| (i128::MIN, u64::MAX), merge)
    };
    #[cfg(not(feature = "parallel"))]
    let best = (0..prefixes)
        .map(block)
        .fold((i128::MIN, u64::MAX), merge);

    let x = Assignment::from_mask(lex_key(best.1, n), n);
    let value = p.evaluate(&x)?;
    Ok((x, value))
}

/// Bit-reversal within `n` bits: maps entry 0 to the most significant bit so
/// that numeric order equals lexicographic order of the vectors. It is its
/// own inverse.
fn lex_key(mask: u64, n: usize) -> u64 {
    if n == 0 {
        0
    } else {
        mask.reverse_bits() >> (64 - n)
    }
}

pub fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k) as u64;
    let n = n as u64;
    let mut acc: u64 = 1;
    for i in 0..k {
        acc = match acc.checked_mul(n - i) {
            Some(v) => v / (i + 1),
            None => return u64::MAX,
        };
    }
    acc
}

/// Densest `k`-subset by enumerating all `k`-subsets as bitmasks in
/// increasing numeric order (Gosper's hack). Ties go to the lexicographically
/// smallest indicator vector.
pub fn brute_force_kdense(g: &Graph, k: usize) -> Result<(Assignment, usize)> {
    let n = g.n();
    if k > n {
        return Err(Error::input(format!("k = {k} exceeds n = {n}")));
    }
    if n > 63 || binomial(n, k) > KDENSE_BUDGET {
        return Err(Error::config(format!(
            "C({n}, {k}) exceeds the enumeration budget of {KDENSE_BUDGET}"
        )));
    }
    let adj: Vec<u64> = (0..n)
        .map(|v| g.neighbors(v).iter().map(|&u| 1u64 << u).sum())
        .collect();
    let count = |s: u64| -> usize {
        let mut rest = s;
        let mut total = 0;
        while rest != 0 {
            let v = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            total += (adj[v] & s).count_ones() as usize;
        }
        total / 2
    };
    if k == 0 {
        return Ok((Assignment::zeros(n), 0));
    }
    let limit = 1u64 << n;
    let mut s: u64 = (1u64 << k) - 1;
    let mut best = (count(s), lex_key(s, n));
    loop {
        let c = s & s.wrapping_neg();
        let r = s + c;
        if r >= limit || r == 0 {
            break;
        }
        s = (((r ^ s) >> 2) / c) | r;
        let value = count(s);
        let key = lex_key(s, n);
        if value > best.0 || (value == best.0 && key < best.1) {
            best = (value, key);
        }
    }
    Ok((Assignment::from_mask(lex_key(best.1, n), n), best.0))
}

fn default_d() -> usize {
    2
}

fn default_scale() -> f64 {
    1.0
}

/// Parameters of the Monte-Carlo checks. Each trial draws a fresh binary
/// point (or fractional point) and fresh coefficients `|ρ_j| ≤ (q+1)β n^q`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LemmaCheckParams {
    pub n: usize,
    pub q: u32,
    pub beta: f64,
    pub delta: f64,
    pub alpha1: f64,
    pub alpha2: f64,
    pub trials: usize,
    pub seed: u64,
    /// Degree entering the failure budget `4/n^{d+1}` and the sample size.
    #[serde(default = "default_d")]
    pub d: usize,
    /// Multiplier on the sample-size constant.
    #[serde(default = "default_scale")]
    pub gamma_scale: f64,
    /// Fixed sample size instead of the formula.
    #[serde(default)]
    pub sample_size: Option<usize>,
    /// Sample every index exactly once instead of drawing.
    #[serde(default)]
    pub exact_coverage: bool,
    /// Multiplier on the coefficient bound; 0 makes every coefficient zero.
    #[serde(default = "default_scale")]
    pub coeff_scale: f64,
    /// Round an integral point instead of a uniform fractional one.
    #[serde(default)]
    pub integral_y: bool,
}

impl LemmaCheckParams {
    pub fn new(n: usize, q: u32, delta: f64, alpha1: f64, alpha2: f64, trials: usize, seed: u64) -> Self {
        LemmaCheckParams {
            n,
            q,
            beta: 1.0,
            delta,
            alpha1,
            alpha2,
            trials,
            seed,
            d: 2,
            gamma_scale: 1.0,
            sample_size: None,
            exact_coverage: false,
            coeff_scale: 1.0,
            integral_y: false,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::config("lemma checks need n ≥ 2"));
        }
        if self.trials == 0 {
            return Err(Error::config("lemma checks need at least one trial"));
        }
        if !(self.delta > 0.0 && self.delta <= 1.0) {
            return Err(Error::config("delta must lie in (0, 1]"));
        }
        if !(self.beta >= 1.0 && self.alpha1 > 0.0 && self.alpha2 > 0.0 && self.gamma_scale > 0.0) {
            return Err(Error::config("beta ≥ 1 and positive alphas and gamma_scale required"));
        }
        if !(0.0..=1.0).contains(&self.coeff_scale) {
            return Err(Error::config("coeff_scale must lie in [0, 1]"));
        }
        if self.sample_size == Some(0) {
            return Err(Error::config("sample size must be positive"));
        }
        Ok(())
    }

    /// `ceil(γ n^{1−δ} ln n)` with `γ = 3(d+1)(q+1)β/(α1² α2)`, the constant
    /// that makes the Chernoff argument give failure probability `2/n^{d+1}`
    /// per sign.
    pub fn sampling_size(&self) -> usize {
        if self.exact_coverage {
            return self.n;
        }
        if let Some(r) = self.sample_size {
            return r;
        }
        let nf = self.n as f64;
        let gamma = self.gamma_scale * 3.0 * (self.d as f64 + 1.0) * (f64::from(self.q) + 1.0) * self.beta
            / (self.alpha1 * self.alpha1 * self.alpha2);
        (gamma * nf.powf(1.0 - self.delta) * nf.ln()).ceil().max(1.0) as usize
    }

    fn coefficient_bound(&self) -> f64 {
        self.coeff_scale * (f64::from(self.q) + 1.0) * self.beta * (self.n as f64).powi(self.q as i32)
    }

    fn budget(&self) -> f64 {
        4.0 / (self.n as f64).powi(self.d as i32 + 1)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LemmaCheckResult {
    pub violation_count: usize,
    pub trials: usize,
    pub empirical_rate: f64,
    pub theoretical_budget: f64,
    pub sample_size: Option<usize>,
}

fn random_coefficients<R: Rng>(params: &LemmaCheckParams, g: &mut R) -> Vec<f64> {
    let bound = params.coefficient_bound();
    (0..params.n)
        .map(|_| if bound == 0.0 { 0.0 } else { g.gen_range(-bound..=bound) })
        .collect()
}

/// Sampled estimate `(n/r) Σ_{j∈R} ρ_j x_j` against `ρ̂ = Σ ρ_j x_j`, checked
/// two-sidedly against `ρ̂ ± α1 ρ̄ ± 2 α2 n^{q+δ}`.
pub fn check_sampling_lemma(params: &LemmaCheckParams) -> Result<LemmaCheckResult> {
    params.validate()?;
    let n = params.n;
    let r = params.sampling_size();
    let additive = 2.0 * params.alpha2 * (n as f64).powf(f64::from(params.q) + params.delta);
    let mut violations = 0;
    for trial in 0..params.trials {
        let mut g = rng::stream(params.seed, &[rng::TAG_LEMMA, 1, trial as u64]);
        let x: Vec<bool> = (0..n).map(|_| g.gen_bool(0.5)).collect();
        let rho = random_coefficients(params, &mut g);
        let exact: f64 = (0..n).filter(|&j| x[j]).map(|j| rho[j]).sum();
        let abs_sum: f64 = rho.iter().map(|v| v.abs()).sum();
        let sampled: f64 = if params.exact_coverage {
            exact
        } else {
            let total: f64 = (0..r)
                .map(|_| g.gen_range(0..n))
                .filter(|&j| x[j])
                .map(|j| rho[j])
                .sum();
            n as f64 / r as f64 * total
        };
        let radius = params.alpha1 * abs_sum + additive;
        if (sampled - exact).abs() > radius * (1.0 + 1e-12) {
            violations += 1;
        }
    }
    Ok(LemmaCheckResult {
        violation_count: violations,
        trials: params.trials,
        empirical_rate: violations as f64 / params.trials as f64,
        theoretical_budget: params.budget(),
        sample_size: Some(r),
    })
}

/// Rounded value `Σ ρ_j z_j` against `ρ̂ = Σ ρ_j y_j`, checked two-sidedly
/// against `ρ̂ ± α ρ̄ ± 2 α n^{q+δ}` with `α = max(α1, α2)`.
pub fn check_rounding_lemma(params: &LemmaCheckParams) -> Result<LemmaCheckResult> {
    params.validate()?;
    let n = params.n;
    let alpha = params.alpha1.max(params.alpha2);
    let additive = 2.0 * alpha * (n as f64).powf(f64::from(params.q) + params.delta);
    let mut violations = 0;
    for trial in 0..params.trials {
        let mut g = rng::stream(params.seed, &[rng::TAG_LEMMA, 2, trial as u64]);
        let y: Vec<f64> = (0..n)
            .map(|_| {
                if params.integral_y {
                    f64::from(u8::from(g.gen_bool(0.5)))
                } else {
                    g.gen::<f64>()
                }
            })
            .collect();
        let rho = random_coefficients(params, &mut g);
        let exact: f64 = rho.iter().zip(&y).map(|(r, v)| r * v).sum();
        let abs_sum: f64 = rho.iter().map(|v| v.abs()).sum();
        let rounded: f64 = (0..n)
            .filter(|&j| g.gen::<f64>() < y[j])
            .map(|j| rho[j])
            .sum();
        let radius = alpha * abs_sum + additive;
        if (rounded - exact).abs() > radius * (1.0 + 1e-12) {
            violations += 1;
        }
    }
    Ok(LemmaCheckResult {
        violation_count: violations,
        trials: params.trials,
        empirical_rate: violations as f64 / params.trials as f64,
        theoretical_budget: params.budget(),
        sample_size: None,
    })
}
