//! Subspace subcodes (G|V_m): codewords of a Gabidulin code G whose
//! components all lie in an m-dimensional GF(q)-subspace V_m of GF(q^n).
//!
//! With b = (β_1..β_m) a basis of V_m, every c ∈ V_m^n factors uniquely as
//! c = b·U for a q-ary m × len matrix U. The map f_b(c) = h·U^T is a
//! rank-preserving GF(q)-linear bijection V_m^n → GF(q^n)^m sending (G|V_m)
//! onto the parent code LG(V_m), an [m, m − d + 1, d] Gabidulin code with
//! parity-check rows β^{[n]}, β^{[n−1]}, …, β^{[n−d+2]}.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{FieldOps, FieldTower, Fqn};
use crate::gabidulin::{Decoded, GabidulinCode};
use crate::qlinalg::{combine, rank_of_vector, CoordinateSystem, ExtMatrix, QMatrix};

/// An ordered GF(q)-basis of a subspace V_m ⊂ GF(q^n).
#[derive(Clone, Debug)]
pub struct SubspaceBasis {
    elements: Vec<Fqn>,
    coords: CoordinateSystem,
}

impl SubspaceBasis {
    pub fn new(tower: &FieldTower, elements: Vec<Fqn>) -> Result<Self> {
        let coords = CoordinateSystem::new(tower, &elements)?;
        Ok(Self { elements, coords })
    }

    pub fn dim(&self) -> usize {
        self.elements.len()
    }

    pub fn elements(&self) -> &[Fqn] {
        &self.elements
    }

    pub fn contains(&self, tower: &FieldTower, x: Fqn) -> bool {
        self.coords.contains(tower, x)
    }

    pub fn coordinates(&self, tower: &FieldTower, x: Fqn) -> Option<Vec<u32>> {
        self.coords.coordinates(tower, x)
    }
}

/// c = b·U → U (m × len). Fails on the first component outside V_m.
pub fn decompose(tower: &FieldTower, basis: &SubspaceBasis, c: &[Fqn]) -> Result<QMatrix> {
    let mut u = QMatrix::zeros(basis.dim(), c.len());
    for (j, &cj) in c.iter().enumerate() {
        let col = basis
            .coordinates(tower, cj)
            .ok_or(Error::NotInSubspace { position: j })?;
        for (i, v) in col.into_iter().enumerate() {
            u[(i, j)] = v;
        }
    }
    Ok(u)
}

/// U → b·U.
pub fn recompose(tower: &FieldTower, basis: &SubspaceBasis, u: &QMatrix) -> Vec<Fqn> {
    combine(tower, basis.elements(), u)
}

/// f_b(c) = h·U^T, where c = b·U.
pub fn f_b(code: &GabidulinCode, basis: &SubspaceBasis, c: &[Fqn]) -> Result<Vec<Fqn>> {
    check_len(code, c)?;
    let u = decompose(code.tower(), basis, c)?;
    Ok(combine(code.tower(), code.h(), &u.transpose()))
}

/// Inverse of [`f_b`]: row i of U is the expansion of v_i over h.
pub fn f_b_inv(code: &GabidulinCode, basis: &SubspaceBasis, v: &[Fqn]) -> Result<Vec<Fqn>> {
    if v.len() != basis.dim() {
        return Err(Error::DimensionMismatch {
            expected: basis.dim(),
            got: v.len(),
        });
    }
    let mut u = QMatrix::zeros(basis.dim(), code.len());
    for (i, &vi) in v.iter().enumerate() {
        let row = code.h_coordinates(vi).ok_or(Error::NoSolution)?;
        for (j, x) in row.into_iter().enumerate() {
            u[(i, j)] = x;
        }
    }
    Ok(recompose(code.tower(), basis, &u))
}

fn check_len(code: &GabidulinCode, c: &[Fqn]) -> Result<()> {
    if c.len() != code.len() {
        return Err(Error::DimensionMismatch {
            expected: code.len(),
            got: c.len(),
        });
    }
    Ok(())
}

/// H_{V_m}: rows β^{[n]}, β^{[n−1]}, …, β^{[n−d+2]}, for a code of distance d.
pub fn subspace_parity_check_matrix(
    tower: &FieldTower,
    basis: &SubspaceBasis,
    d: usize,
) -> ExtMatrix {
    let n = tower.n() as i64;
    ExtMatrix::from_fn(d - 1, basis.dim(), |r, j| {
        tower.frobenius_power(basis.elements()[j], n - r as i64)
    })
}

/// LG(V_m) as the Gabidulin code on h' = β^{[n−d+2]}: raising h' to
/// [0], …, [d−2] yields the rows of H_{V_m} in reverse order.
pub fn parent_code(code: &GabidulinCode, basis: &SubspaceBasis) -> Result<GabidulinCode> {
    let (m, d) = (basis.dim(), code.d());
    if m < d {
        return Err(Error::TrivialSubcode { m, d });
    }
    let tower = code.tower();
    let shift = tower.n() as i64 - d as i64 + 2;
    let h: Vec<Fqn> = basis
        .elements()
        .iter()
        .map(|&b| tower.frobenius_power(b, shift))
        .collect();
    GabidulinCode::from_parity(Arc::clone(tower), h, m - d + 1)
}

/// Brute-force (G|V_m): every codeword of G with all components in V_m.
pub fn enumerate_subcode(code: &GabidulinCode, basis: &SubspaceBasis) -> Result<Vec<Vec<Fqn>>> {
    let tower = code.tower();
    Ok(code
        .codewords()?
        .filter(|c| c.iter().all(|&x| basis.contains(tower, x)))
        .collect())
}

/// Which code performs the error correction in [`SubspaceSubcode::decode`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Route {
    /// Decode y directly in G.
    InG,
    /// Decode f_b(y) in the parent code and pull back through f_b^{-1}.
    InParent,
}

/// (G|V_m) together with its parent code.
#[derive(Clone, Debug)]
pub struct SubspaceSubcode {
    code: GabidulinCode,
    basis: SubspaceBasis,
    parent: GabidulinCode,
}

impl SubspaceSubcode {
    /// Fails with [`Error::TrivialSubcode`] when m < d.
    pub fn new(code: GabidulinCode, basis: SubspaceBasis) -> Result<Self> {
        let parent = parent_code(&code, &basis)?;
        Ok(Self {
            code,
            basis,
            parent,
        })
    }

    pub fn code(&self) -> &GabidulinCode {
        &self.code
    }

    pub fn basis(&self) -> &SubspaceBasis {
        &self.basis
    }

    pub fn parent(&self) -> &GabidulinCode {
        &self.parent
    }

    pub fn tower(&self) -> &FieldTower {
        self.code.tower()
    }

    /// Message length m − d + 1 over GF(q^n).
    pub fn message_len(&self) -> usize {
        self.parent.k()
    }

    /// log_q of the cardinality: n(m − d + 1).
    pub fn log_cardinality(&self) -> usize {
        self.tower().n() * self.message_len()
    }

    pub fn f_b(&self, c: &[Fqn]) -> Result<Vec<Fqn>> {
        f_b(&self.code, &self.basis, c)
    }

    pub fn f_b_inv(&self, v: &[Fqn]) -> Result<Vec<Fqn>> {
        f_b_inv(&self.code, &self.basis, v)
    }

    /// y = x·G_{V_m} in the parent, then c = f_b^{-1}(y).
    pub fn encode(&self, x: &[Fqn]) -> Result<Vec<Fqn>> {
        let y = self.parent.encode(x)?;
        self.f_b_inv(&y)
    }

    /// Whether every component lies in V_m and the word is a codeword of G.
    pub fn contains(&self, c: &[Fqn]) -> bool {
        c.len() == self.code.len()
            && c.iter().all(|&x| self.basis.contains(self.tower(), x))
            && self.code.is_codeword(c)
    }

    /// Decodes y ∈ V_m^n (the error is confined to V_m).
    pub fn decode(&self, y: &[Fqn], route: Route) -> Result<Decoded> {
        check_len(&self.code, y)?;
        if let Some(position) = y
            .iter()
            .position(|&x| !self.basis.contains(self.tower(), x))
        {
            return Err(Error::NotInSubspace { position });
        }
        match route {
            Route::InG => self.code.decode(y),
            Route::InParent => {
                let dec = self.parent.decode(&self.f_b(y)?)?;
                Ok(Decoded {
                    codeword: self.f_b_inv(&dec.codeword)?,
                    error: self.f_b_inv(&dec.error)?,
                })
            }
        }
    }

    /// Brute-force enumeration of the subcode.
    pub fn enumerate(&self) -> Result<Vec<Vec<Fqn>>> {
        enumerate_subcode(&self.code, &self.basis)
    }

    /// The subcode as the image of every parent message; q^{n(m−d+1)} words.
    pub fn enumerate_via_parent(&self) -> Result<Vec<Vec<Fqn>>> {
        self.parent.messages()?.map(|x| self.encode(&x)).collect()
    }

    /// Minimum nonzero rank over an enumerated word list.
    pub fn min_rank(&self, words: &[Vec<Fqn>]) -> Option<usize> {
        words
            .iter()
            .filter(|c| c.iter().any(|x| !x.is_zero()))
            .map(|c| rank_of_vector(self.tower(), c))
            .min()
    }
}

/// Componentwise sum.
pub(crate) fn add_vectors(tower: &FieldTower, a: &[Fqn], b: &[Fqn]) -> Vec<Fqn> {
    a.iter().zip(b).map(|(&x, &y)| tower.add(x, y)).collect()
}
