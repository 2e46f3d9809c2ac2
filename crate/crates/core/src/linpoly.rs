//! Linearized polynomials f(x) = Σ_p f_p x^{[p]} over GF(q^n).

use crate::error::{Error, Result};
use crate::field::{FieldOps, FieldTower, Fqn};
use crate::qlinalg::QMatrix;

/// Coefficients (f_0, …, f_t) low-to-high, no trailing zeros.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LinearizedPoly {
    coeffs: Vec<Fqn>,
}

impl LinearizedPoly {
    pub fn new(mut coeffs: Vec<Fqn>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn zero() -> Self {
        Self::default()
    }

    /// x^{[0]} = x.
    pub fn identity() -> Self {
        Self::new(vec![Fqn::ONE])
    }

    /// x^{[p]}.
    pub fn monomial(p: usize) -> Self {
        let mut c = vec![Fqn::ZERO; p + 1];
        c[p] = Fqn::ONE;
        Self::new(c)
    }

    pub fn coeffs(&self) -> &[Fqn] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Index of the highest nonzero coefficient; `None` for the zero polynomial.
    pub fn q_degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn eval(&self, tower: &FieldTower, x: Fqn) -> Fqn {
        self.coeffs
            .iter()
            .enumerate()
            .fold(Fqn::ZERO, |acc, (p, &c)| {
                if c.is_zero() {
                    acc
                } else {
                    tower.add(acc, tower.mul(c, tower.frobenius_power(x, p as i64)))
                }
            })
    }

    pub fn add(&self, tower: &FieldTower, other: &Self) -> Self {
        let len = self.coeffs.len().max(other.coeffs.len());
        Self::new(
            (0..len)
                .map(|i| {
                    let a = self.coeffs.get(i).copied().unwrap_or_default();
                    let b = other.coeffs.get(i).copied().unwrap_or_default();
                    tower.add(a, b)
                })
                .collect(),
        )
    }

    pub fn scale(&self, tower: &FieldTower, c: Fqn) -> Self {
        Self::new(self.coeffs.iter().map(|&a| tower.mul(c, a)).collect())
    }

    /// Symbolic composition self ∘ other: (f∘g)_k = Σ_{i+j=k} f_i g_j^{[i]}.
    pub fn compose(&self, tower: &FieldTower, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let mut out = vec![Fqn::ZERO; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &fi) in self.coeffs.iter().enumerate() {
            if fi.is_zero() {
                continue;
            }
            for (j, &gj) in other.coeffs.iter().enumerate() {
                let term = tower.mul(fi, tower.frobenius_power(gj, i as i64));
                out[i + j] = tower.add(out[i + j], term);
            }
        }
        Self::new(out)
    }

    /// q-ary n × n matrix of x ↦ f(x) over the tower basis.
    pub fn as_q_matrix(&self, tower: &FieldTower) -> QMatrix {
        let images: Vec<Vec<u32>> = tower
            .basis()
            .iter()
            .map(|&b| tower.expand(self.eval(tower, b)))
            .collect();
        QMatrix::from_fn(tower.n(), tower.n(), |i, j| images[j][i])
    }

    /// GF(q)-basis of the root space {x : f(x) = 0}.
    pub fn root_space_basis(&self, tower: &FieldTower) -> Result<Vec<Fqn>> {
        if self.is_zero() {
            return Err(Error::InvalidParameters(
                "the zero polynomial vanishes everywhere".into(),
            ));
        }
        Ok(self
            .as_q_matrix(tower)
            .nullspace(tower.base())
            .iter()
            .map(|v| tower.contract(v))
            .collect())
    }
}

/// Minimal monic linearized polynomial vanishing on span_q(values):
/// σ_{j+1}(x) = σ_j(x)^{[1]} − σ_j(E_{j+1})^{q−1} σ_j(x).
///
/// Values already in the span of their predecessors are skipped, so the
/// q-degree equals the rank of `values`.
pub fn subspace_polynomial(tower: &FieldTower, values: &[Fqn]) -> LinearizedPoly {
    let mut sigma = LinearizedPoly::identity();
    let frob = LinearizedPoly::monomial(1);
    for &e in values {
        let v = sigma.eval(tower, e);
        if v.is_zero() {
            continue;
        }
        let c = tower.pow(v, tower.q() as u128 - 1);
        let lifted = frob.compose(tower, &sigma);
        sigma = lifted.add(tower, &sigma.scale(tower, tower.neg(c)));
    }
    sigma
}
