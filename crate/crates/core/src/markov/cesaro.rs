use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::chain::{decompose_chain, ChainDecomposition};
use super::matrix::Square;
use super::poly::{char_poly, deflate_unit_root, DEFLATION_TOL};
use super::{MarkovError, StochasticMatrix};

/// Row-sum agreement required of `T(Q)` before normalising.
pub const ROWSUM_TOL: f64 = 1e-6;
/// Tolerance on the identities a limiting matrix must satisfy.
pub const PROJECTION_TOL: f64 = 1e-8;
pub const AVERAGING_TOL: f64 = 1e-10;
pub const AVERAGING_MAX_TERMS: u64 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CesaroMethod {
    #[default]
    Structural,
    Lazari,
    Averaging,
}

impl fmt::Display for CesaroMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CesaroMethod::Structural => "structural",
            CesaroMethod::Lazari => "lazari",
            CesaroMethod::Averaging => "averaging",
        })
    }
}

impl FromStr for CesaroMethod {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "structural" => Ok(CesaroMethod::Structural),
            "lazari" => Ok(CesaroMethod::Lazari),
            "averaging" => Ok(CesaroMethod::Averaging),
            other => Err(format!(
                "unknown method `{other}` (expected structural, lazari or averaging)"
            )),
        }
    }
}

/// Tunables for the three limiting-matrix methods.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CesaroOptions {
    pub method: CesaroMethod,
    pub deflation_tol: f64,
    pub averaging_tol: f64,
    pub averaging_max_terms: u64,
}

impl Default for CesaroOptions {
    fn default() -> Self {
        CesaroOptions {
            method: CesaroMethod::Structural,
            deflation_tol: DEFLATION_TOL,
            averaging_tol: AVERAGING_TOL,
            averaging_max_terms: AVERAGING_MAX_TERMS,
        }
    }
}

impl CesaroOptions {
    pub fn with_method(method: CesaroMethod) -> Self {
        CesaroOptions {
            method,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "method", rename_all = "lowercase")]
pub enum CesaroDiagnostics {
    Lazari {
        /// Multiplicity of the eigenvalue 1.
        m1: usize,
        /// Common row sum of `T(Q)`.
        row_sum: f64,
    },
    Averaging {
        /// Number of powers in the last partial average used.
        terms: u64,
        converged: bool,
    },
    Structural {
        classes: Vec<Vec<usize>>,
        transient: Vec<usize>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CesaroResult {
    pub q_star: Square,
    pub diagnostics: CesaroDiagnostics,
}

impl CesaroResult {
    pub fn method(&self) -> CesaroMethod {
        match self.diagnostics {
            CesaroDiagnostics::Lazari { .. } => CesaroMethod::Lazari,
            CesaroDiagnostics::Averaging { .. } => CesaroMethod::Averaging,
            CesaroDiagnostics::Structural { .. } => CesaroMethod::Structural,
        }
    }
}

/// Limiting matrix through the characteristic polynomial: strip the unit
/// root, evaluate the quotient at `Q`, and normalise by the common row sum.
pub fn cesaro_lazari(
    q: &StochasticMatrix,
    deflation_tol: f64,
) -> Result<CesaroResult, MarkovError> {
    let p = char_poly(q)?;
    let (m1, t) = deflate_unit_root(&p, deflation_tol)?;
    let w = t.eval_matrix(q.as_square());
    let sums = w.row_sums();
    let mean = sums.iter().sum::<f64>() / sums.len() as f64;
    let spread = sums.iter().map(|s| (s - mean).abs()).fold(0.0, f64::max);
    if !mean.is_finite()
        || mean.abs() <= deflation_tol * w.norm_inf()
        || spread > ROWSUM_TOL * mean.abs()
    {
        return Err(MarkovError::NormalizationFailed {
            spread,
            row_sum: mean,
        });
    }
    let mut q_star = w;
    q_star.scale(1.0 / mean);
    Ok(CesaroResult {
        q_star,
        diagnostics: CesaroDiagnostics::Lazari { m1, row_sum: mean },
    })
}

/// Limiting matrix from the partial averages `A_n = (1/n) Σ_{m=1..n} Q^m`.
///
/// Horizons are `n = L · 2^k` with `L = lcm(1..=d)` for the largest `d`
/// allowed by `max_terms` (all of `1..=dim` when possible), so every cyclic
/// class's oscillation cancels exactly in `A_n`. What remains is
/// `Q* + C/n + O(ρ^n)`; the `1/n` term is removed by Richardson
/// extrapolation `R_n = 2 A_{2n} − A_n`. Iteration stops once successive
/// extrapolants agree within `tol` or `n` reaches `max_terms`.
pub fn cesaro_averaging(q: &StochasticMatrix, tol: f64, max_terms: u64) -> CesaroResult {
    let q = q.as_square();
    let base = period_base(q.n(), max_terms);
    let (mut power, mut avg) = power_and_average(q, base);
    let mut n = base;
    let mut prev: Option<Square> = None;
    loop {
        let next_avg = avg.combine(0.5, &power.matmul(&avg), 0.5); // A_{2n}
        let extrapolated = next_avg.combine(2.0, &avg, -1.0);
        n *= 2;
        let converged = prev
            .as_ref()
            .is_some_and(|p| p.dist_inf(&extrapolated) < tol);
        if converged || n >= max_terms {
            return CesaroResult {
                q_star: extrapolated,
                diagnostics: CesaroDiagnostics::Averaging {
                    terms: n,
                    converged,
                },
            };
        }
        power = power.matmul(&power);
        avg = next_avg;
        prev = Some(extrapolated);
    }
}

/// `lcm(1..=d)` for the largest `d ≤ dim` keeping at least eight doublings
/// below `max_terms`.
fn period_base(dim: usize, max_terms: u64) -> u64 {
    fn gcd(a: u64, b: u64) -> u64 {
        if b == 0 {
            a
        } else {
            gcd(b, a % b)
        }
    }
    let budget = (max_terms / 256).max(2);
    let mut base = 2u64;
    for d in 3..=dim as u64 {
        let next = base / gcd(base, d) * d;
        if next > budget {
            break;
        }
        base = next;
    }
    base
}

/// `(Q^n, A_n)` by binary splitting: `A_{a+b} = (a A_a + b Q^a A_b) / (a + b)`.
fn power_and_average(q: &Square, mut n: u64) -> (Square, Square) {
    let dim = q.n();
    let (mut power, mut avg, mut len) = (Square::identity(dim), Square::zeros(dim), 0u64);
    let (mut step_power, mut step_avg, mut step) = (q.clone(), q.clone(), 1u64);
    while n > 0 {
        if n & 1 == 1 {
            let total = (len + step) as f64;
            avg = avg.combine(
                len as f64 / total,
                &power.matmul(&step_avg),
                step as f64 / total,
            );
            power = power.matmul(&step_power);
            len += step;
        }
        n >>= 1;
        if n > 0 {
            step_avg = step_avg.combine(0.5, &step_power.matmul(&step_avg), 0.5);
            step_power = step_power.matmul(&step_power);
            step *= 2;
        }
    }
    (power, avg)
}

/// Limiting matrix assembled from the chain's class structure: recurrent
/// rows carry their class's stationary distribution, transient rows the
/// absorption-weighted mixture of them.
pub fn cesaro_structural(q: &StochasticMatrix) -> Result<CesaroResult, MarkovError> {
    let d = decompose_chain(q)?;
    Ok(CesaroResult {
        q_star: structural_limit(q.n(), &d),
        diagnostics: CesaroDiagnostics::Structural {
            classes: d.recurrent_classes,
            transient: d.transient,
        },
    })
}

fn structural_limit(n: usize, d: &ChainDecomposition) -> Square {
    let mut q_star = Square::zeros(n);
    for (class, pi) in d.recurrent_classes.iter().zip(&d.stationary) {
        for &s in class {
            for (&j, &p) in class.iter().zip(pi) {
                q_star[(s, j)] = p;
            }
        }
    }
    for (&s, weights) in d.transient.iter().zip(&d.absorption) {
        for ((class, pi), &w) in d.recurrent_classes.iter().zip(&d.stationary).zip(weights) {
            for (&j, &p) in class.iter().zip(pi) {
                q_star[(s, j)] += w * p;
            }
        }
    }
    q_star
}

/// Dispatch on `opts.method`.
pub fn cesaro(q: &StochasticMatrix, opts: &CesaroOptions) -> Result<CesaroResult, MarkovError> {
    match opts.method {
        CesaroMethod::Structural => cesaro_structural(q),
        CesaroMethod::Lazari => cesaro_lazari(q, opts.deflation_tol),
        CesaroMethod::Averaging => Ok(cesaro_averaging(
            q,
            opts.averaging_tol,
            opts.averaging_max_terms,
        )),
    }
}

/// Largest violation among `Q*Q = QQ* = Q*Q* = Q*`, unit row sums, and
/// the entry range `[0, 1]`.
pub fn projection_residual(q: &StochasticMatrix, q_star: &Square) -> f64 {
    let q = q.as_square();
    let mut worst = q_star
        .matmul(q)
        .dist_inf(q_star)
        .max(q.matmul(q_star).dist_inf(q_star))
        .max(q_star.matmul(q_star).dist_inf(q_star));
    for s in q_star.row_sums() {
        worst = worst.max((s - 1.0).abs());
    }
    for &x in q_star.as_slice() {
        worst = worst.max(-x).max(x - 1.0);
    }
    worst
}
