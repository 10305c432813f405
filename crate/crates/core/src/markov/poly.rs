use super::matrix::Square;
use super::{MarkovError, StochasticMatrix};

/// Largest dimension accepted by the characteristic-polynomial route.
pub const LAZARI_MAX_N: usize = 12;

/// Default relative tolerance for detecting the unit root.
pub const DEFLATION_TOL: f64 = 1e-7;

/// Real polynomial, coefficients in ascending degree.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    coeffs: Vec<f64>,
}

impl Polynomial {
    pub fn new(coeffs: Vec<f64>) -> Self {
        assert!(
            !coeffs.is_empty(),
            "polynomial needs at least one coefficient"
        );
        Polynomial { coeffs }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn eval(&self, z: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * z + c)
    }

    /// Largest coefficient magnitude.
    pub fn norm_inf(&self) -> f64 {
        self.coeffs.iter().map(|c| c.abs()).fold(0.0, f64::max)
    }

    /// Synthetic division by `(z − 1)`: returns the quotient and the
    /// remainder, which equals the value at 1.
    pub fn divide_by_z_minus_one(&self) -> (Polynomial, f64) {
        let d = self.degree();
        if d == 0 {
            return (Polynomial::new(vec![0.0]), self.coeffs[0]);
        }
        let mut quotient = vec![0.0; d];
        let mut carry = 0.0;
        for k in (1..=d).rev() {
            carry += self.coeffs[k];
            quotient[k - 1] = carry;
        }
        (Polynomial::new(quotient), self.coeffs[0] + carry)
    }

    /// Evaluate at a square matrix by Horner's scheme.
    pub fn eval_matrix(&self, m: &Square) -> Square {
        let n = m.n();
        let mut acc = Square::zeros(n);
        for &c in self.coeffs.iter().rev() {
            acc = acc.matmul(m);
            acc.add_diagonal(c);
        }
        acc
    }
}

/// Coefficients of `det(Q − zI)` by the Faddeev–LeVerrier recurrence.
pub fn char_poly(q: &StochasticMatrix) -> Result<Polynomial, MarkovError> {
    let n = q.n();
    if n > LAZARI_MAX_N {
        return Err(MarkovError::TooLarge {
            n,
            max: LAZARI_MAX_N,
        });
    }
    let a = q.as_square();
    // monic det(zI − A) = Σ c[k] z^k
    let mut c = vec![0.0; n + 1];
    c[n] = 1.0;
    let mut m = Square::zeros(n);
    for k in 1..=n {
        m = a.matmul(&m);
        m.add_diagonal(c[n + 1 - k]);
        let am = a.matmul(&m);
        c[n - k] = -am.trace() / k as f64;
    }
    if n % 2 == 1 {
        c.iter_mut().for_each(|x| *x = -*x);
    }
    Ok(Polynomial::new(c))
}

/// Strip every factor `(z − 1)` from a characteristic polynomial.
///
/// Returns the multiplicity of the unit root and the quotient `T(z)`.
/// A division counts as exact when the remainder is at most
/// `tol · max(1, ‖p‖∞)`.
pub fn deflate_unit_root(p: &Polynomial, tol: f64) -> Result<(usize, Polynomial), MarkovError> {
    let threshold = tol * p.norm_inf().max(1.0);
    let mut m1 = 0;
    let mut t = p.clone();
    while t.degree() > 0 {
        let (q, rem) = t.divide_by_z_minus_one();
        if rem.abs() > threshold {
            break;
        }
        m1 += 1;
        t = q;
    }
    if m1 == 0 {
        return Err(MarkovError::NoUnitRoot {
            residual: p.eval(1.0),
        });
    }
    let t_one = t.eval(1.0);
    if t_one.abs() <= tol {
        return Err(MarkovError::IllConditioned { m1, t_one });
    }
    Ok((m1, t))
}
