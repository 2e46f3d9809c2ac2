//! Subfield subcodes (G|GF(q^s)) of full-length Gabidulin codes, s | n.
//!
//! GF(q^s) is handled as the fixed field of x ↦ x^{[s]} inside GF(q^n), so
//! no second arithmetic core is needed. With a = (1, θ, …, θ^{s−1}) a
//! polynomial basis of GF(q^s) and β = (1, α, …, α^{n/s−1}) a basis of
//! GF(q^n) over GF(q^s), the parity-check matrix of the subcode factors as
//! blockdiag(A, …, A)·S with A the (d−1) × s Moore matrix of a and S an
//! invertible q-ary n × n matrix.
//!
//! Writing h_j = Σ_r h_{r,j} β_r with h_{r,j} ∈ GF(q^s) and applying [−l] to
//! Σ_j c_j h_j^{[l]} = 0 shows that c ∈ GF(q^s)^n is a codeword iff
//! Σ_j c_j h_{r,j}^{[l]} = 0 for every r and l < d − 1. Expanding h_{r,j}
//! over a gives the q-ary matrix M with row r·s + i holding coordinate i, and
//! then (A_r-block of blockdiag(A)·M)·c recovers exactly those sums.

use std::sync::Arc;

use num_bigint::BigUint;
use num_rational::BigRational;

use crate::error::{Error, Result};
use crate::field::{FieldOps, FieldTower, Fqn};
use crate::gabidulin::{moore_matrix, GabidulinCode, EXHAUSTIVE_LIMIT};
use crate::linpoly::LinearizedPoly;
use crate::qlinalg::{count_rank_matrices, rank_of_vector, CoordinateSystem, ExtMatrix, QMatrix};
use crate::subspace::SubspaceBasis;

fn check_divisor(tower: &FieldTower, s: usize) -> Result<()> {
    let n = tower.n();
    if s == 0 || !n.is_multiple_of(s) {
        return Err(Error::NotADivisor { s, n });
    }
    Ok(())
}

/// A GF(q)-basis of GF(q^s) ⊂ GF(q^n): the root space of x^{[s]} − x.
pub fn subfield_basis(tower: &FieldTower, s: usize) -> Result<Vec<Fqn>> {
    check_divisor(tower, s)?;
    let mut coeffs = vec![Fqn::ZERO; s + 1];
    coeffs[0] = tower.neg(Fqn::ONE);
    coeffs[s] = Fqn::ONE;
    let basis = LinearizedPoly::new(coeffs).root_space_basis(tower)?;
    debug_assert_eq!(basis.len(), s);
    Ok(basis)
}

/// Smallest element (in canonical integer order) of GF(q^s) whose powers
/// 1, θ, …, θ^{s−1} are GF(q)-independent.
pub fn canonical_subfield_generator(tower: &FieldTower, s: usize) -> Result<Fqn> {
    let basis = subfield_basis(tower, s)?;
    let size = (tower.q() as u128).pow(s as u32);
    if size > EXHAUSTIVE_LIMIT {
        return Err(Error::Oversized {
            size,
            limit: EXHAUSTIVE_LIMIT,
        });
    }
    let mut elements: Vec<Fqn> = (0..size as u64)
        .map(|mut idx| {
            basis.iter().fold(Fqn::ZERO, |acc, &b| {
                let c = (idx % tower.q() as u64) as u32;
                idx /= tower.q() as u64;
                tower.add(acc, tower.scale(c, b))
            })
        })
        .collect();
    elements.sort_unstable();
    elements
        .into_iter()
        .find(|&x| rank_of_vector(tower, &power_basis(tower, x, s)) == s)
        .ok_or(Error::InvalidParameters(format!(
            "GF(q^{s}) has no generator"
        )))
}

fn power_basis(tower: &FieldTower, x: Fqn, len: usize) -> Vec<Fqn> {
    std::iter::successors(Some(Fqn::ONE), |&p| Some(tower.mul(p, x)))
        .take(len)
        .collect()
}

/// (1, α, …, α^{n/s−1}): α has degree n/s over GF(q^s).
pub fn canonical_ext_basis(tower: &FieldTower, s: usize) -> Result<Vec<Fqn>> {
    check_divisor(tower, s)?;
    Ok(power_basis(tower, tower.alpha(), tower.n() / s))
}

/// Coordinates of elements of GF(q^n) over the q-basis {a_i β_r}, indexed
/// r·s + i.
#[derive(Clone, Debug)]
struct ProductBasis {
    s: usize,
    coords: CoordinateSystem,
}

impl ProductBasis {
    fn new(tower: &FieldTower, a: &[Fqn], basis_ext: &[Fqn]) -> Result<Self> {
        let s = a.len();
        if s == 0 || s * basis_ext.len() != tower.n() {
            return Err(Error::InvalidParameters(format!(
                "{} x {} product basis does not match degree {}",
                s,
                basis_ext.len(),
                tower.n()
            )));
        }
        let family: Vec<Fqn> = basis_ext
            .iter()
            .flat_map(|&b| a.iter().map(move |&ai| (ai, b)))
            .map(|(ai, b)| tower.mul(ai, b))
            .collect();
        Ok(Self {
            s,
            coords: CoordinateSystem::new(tower, &family)?,
        })
    }

    fn digits(&self, tower: &FieldTower, x: Fqn) -> Vec<u32> {
        self.coords
            .coordinates(tower, x)
            .expect("product basis spans GF(q^n)")
    }

    /// x = Σ_r x_r β_r with x_r ∈ GF(q^s).
    fn ext_coordinates(&self, tower: &FieldTower, a: &[Fqn], x: Fqn) -> Vec<Fqn> {
        self.digits(tower, x)
            .chunks(self.s)
            .map(|chunk| {
                chunk.iter().zip(a).fold(Fqn::ZERO, |acc, (&c, &ai)| {
                    tower.add(acc, tower.scale(c, ai))
                })
            })
            .collect()
    }
}

/// 𝓗: column j holds the coordinates of h_j over `basis_ext`, entries in
/// GF(q^s); (n/s) × len.
pub fn expand_h_over_subfield(
    tower: &FieldTower,
    h: &[Fqn],
    a: &[Fqn],
    basis_ext: &[Fqn],
) -> Result<ExtMatrix> {
    let pb = ProductBasis::new(tower, a, basis_ext)?;
    let columns: Vec<Vec<Fqn>> = h.iter().map(|&x| pb.ext_coordinates(tower, a, x)).collect();
    Ok(ExtMatrix::from_fn(basis_ext.len(), h.len(), |r, j| {
        columns[j][r]
    }))
}

/// Σ_r 𝓗_{r,j} β_r for every column.
pub fn contract_over_subfield(
    tower: &FieldTower,
    ext_h: &ExtMatrix,
    basis_ext: &[Fqn],
) -> Vec<Fqn> {
    (0..ext_h.cols())
        .map(|j| {
            basis_ext
                .iter()
                .enumerate()
                .fold(Fqn::ZERO, |acc, (r, &b)| {
                    tower.add(acc, tower.mul(ext_h[(r, j)], b))
                })
        })
        .collect()
}

/// Product of an extension-field matrix with a q-ary matrix.
pub fn mul_by_q_matrix(tower: &FieldTower, m: &ExtMatrix, s: &QMatrix) -> ExtMatrix {
    assert_eq!(m.cols(), s.rows(), "inner dimensions differ");
    ExtMatrix::from_fn(m.rows(), s.cols(), |i, j| {
        (0..m.cols()).fold(Fqn::ZERO, |acc, k| {
            tower.add(acc, tower.scale(s[(k, j)], m[(i, k)]))
        })
    })
}

/// Block-diagonal matrix with `blocks` copies of `a` on the diagonal.
pub fn block_diagonal(a: &ExtMatrix, blocks: usize) -> ExtMatrix {
    ExtMatrix::from_fn(a.rows() * blocks, a.cols() * blocks, |i, j| {
        if i / a.rows() == j / a.cols() {
            a[(i % a.rows(), j % a.cols())]
        } else {
            Fqn::ZERO
        }
    })
}

/// Parity-check factorization H_{q^s} = blockdiag(A, …, A)·S of (G|GF(q^s)).
#[derive(Clone, Debug)]
pub struct SubfieldFactorization {
    s: usize,
    d: usize,
    a: Vec<Fqn>,
    basis_ext: Vec<Fqn>,
    a_matrix: ExtMatrix,
    s_matrix: QMatrix,
    ext_h: ExtMatrix,
    tower: Arc<FieldTower>,
}

/// Factorization on the canonical choices θ = [`canonical_subfield_generator`]
/// and β = [`canonical_ext_basis`].
pub fn compute_factorization(code: &GabidulinCode, s: usize) -> Result<SubfieldFactorization> {
    let tower = code.tower();
    check_divisor(tower, s)?;
    let theta = canonical_subfield_generator(tower, s)?;
    let a = power_basis(tower, theta, s);
    let basis_ext = canonical_ext_basis(tower, s)?;
    compute_factorization_with(code, s, a, basis_ext)
}

/// Factorization for caller-chosen a (a q-basis of GF(q^s)) and β.
pub fn compute_factorization_with(
    code: &GabidulinCode,
    s: usize,
    a: Vec<Fqn>,
    basis_ext: Vec<Fqn>,
) -> Result<SubfieldFactorization> {
    let tower = code.tower();
    check_divisor(tower, s)?;
    let (n, d) = (tower.n(), code.d());
    if code.len() != n {
        return Err(Error::InvalidParameters(format!(
            "subfield factorization needs a full-length code, got length {} < {n}",
            code.len()
        )));
    }
    if s + 2 <= d {
        return Err(Error::SubfieldTooSmall { s, bound: d - 2 });
    }
    if s < d {
        return Err(Error::TrivialSubcode { m: s, d });
    }
    if a.len() != s || a.iter().any(|&x| !tower.in_subfield(x, s)) {
        return Err(Error::InvalidParameters(format!(
            "a must consist of {s} elements of GF(q^{s})"
        )));
    }
    let pb = ProductBasis::new(tower, &a, &basis_ext)?;
    let ext_h = expand_h_over_subfield(tower, code.h(), &a, &basis_ext)?;
    let base = tower.base();
    // M: q-ary expansion of 𝓗, row r·s + i = coordinate i of h_{r,j} over a.
    let digits: Vec<Vec<u32>> = code.h().iter().map(|&x| pb.digits(tower, x)).collect();
    let m = QMatrix::from_fn(n, n, |row, j| digits[j][row]);
    // T: q-ary expansion of blockdiag(a_1, …, a_{n/s}) over a, which is I.
    let t = QMatrix::identity(base, n);
    let t_inv = t.inverse(base).expect("identity is invertible");
    let s_matrix = t_inv.mul(base, &m);
    if s_matrix.rank(base) != n {
        return Err(Error::RankDeficient {
            rank: s_matrix.rank(base),
            expected: n,
        });
    }
    Ok(SubfieldFactorization {
        s,
        d,
        a_matrix: moore_matrix(tower, &a, d - 1),
        a,
        basis_ext,
        s_matrix,
        ext_h,
        tower: Arc::clone(tower),
    })
}

impl SubfieldFactorization {
    fn tower(&self) -> &FieldTower {
        &self.tower
    }

    pub fn s(&self) -> usize {
        self.s
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// Number of diagonal blocks n/s.
    pub fn blocks(&self) -> usize {
        self.basis_ext.len()
    }

    /// a_1, …, a_s.
    pub fn a(&self) -> &[Fqn] {
        &self.a
    }

    pub fn basis_ext(&self) -> &[Fqn] {
        &self.basis_ext
    }

    /// A: (d−1) × s Moore matrix of a.
    pub fn a_matrix(&self) -> &ExtMatrix {
        &self.a_matrix
    }

    /// S ∈ GL_n(GF(q)).
    pub fn s_matrix(&self) -> &QMatrix {
        &self.s_matrix
    }

    /// 𝓗 = the expansion of h over β.
    pub fn expanded_h(&self) -> &ExtMatrix {
        &self.ext_h
    }

    pub fn block_matrix(&self) -> ExtMatrix {
        block_diagonal(&self.a_matrix, self.blocks())
    }

    /// H_{q^s} = blockdiag(A, …, A)·S.
    pub fn parity_check_matrix(&self) -> ExtMatrix {
        self.parity_check_with(&self.s_matrix)
    }

    /// blockdiag(A, …, A)·S' for an arbitrary q-ary S'.
    pub fn parity_check_with(&self, s: &QMatrix) -> ExtMatrix {
        mul_by_q_matrix(self.tower(), &self.block_matrix(), s)
    }

    /// Whether H_{q^s}·c^T = 0.
    pub fn annihilates(&self, c: &[Fqn]) -> bool {
        let tower = self.tower();
        self.parity_check_matrix()
            .mul_vec(tower, c)
            .iter()
            .all(|x| x.is_zero())
    }

    /// The subfield as a [`SubspaceBasis`] spanned by a.
    pub fn subfield_basis(&self) -> Result<SubspaceBasis> {
        SubspaceBasis::new(self.tower(), self.a.clone())
    }

    /// Solves blockdiag(A, …, A)·X = H_{q^s} over q-ary X (n² unknowns) and
    /// checks that S is its only solution.
    pub fn verify_uniqueness(&self) -> Result<()> {
        let tower = self.tower();
        let n = tower.n();
        let block = self.block_matrix();
        let target = self.parity_check_matrix();
        let mut system = QMatrix::zeros(block.rows() * n * n, n * n);
        let mut rhs = Vec::with_capacity(block.rows() * n * n);
        let mut eq = 0;
        for row in 0..block.rows() {
            let coeffs: Vec<Vec<u32>> = (0..n).map(|k| tower.expand(block[(row, k)])).collect();
            for j in 0..n {
                let value = tower.expand(target[(row, j)]);
                for digit in 0..n {
                    for (k, ck) in coeffs.iter().enumerate() {
                        system[(eq, k * n + j)] = ck[digit];
                    }
                    rhs.push(value[digit]);
                    eq += 1;
                }
            }
        }
        let sol = system.solve(tower.base(), &rhs)?;
        if !sol.kernel.is_empty() {
            return Err(Error::NotUnique {
                kernel_dim: sol.kernel.len(),
            });
        }
        let found = QMatrix::from_fn(n, n, |i, j| sol.particular[i * n + j]);
        if found != self.s_matrix {
            return Err(Error::InvalidParameters(
                "the unique solution differs from the computed S".into(),
            ));
        }
        Ok(())
    }

    /// GF(q^s) as a standalone tower whose polynomial basis corresponds to a
    /// (a must be a power basis 1, θ, …), plus the embedding coordinates.
    fn standalone_subfield(&self) -> Result<(Arc<FieldTower>, CoordinateSystem)> {
        let tower = self.tower();
        let s = self.s;
        let theta = *self.a.get(1).unwrap_or(&Fqn::ONE);
        if power_basis(tower, theta, s) != self.a {
            return Err(Error::InvalidParameters("a is not a power basis".into()));
        }
        let coords = CoordinateSystem::new(tower, &self.a)?;
        let top = coords
            .coordinates(tower, tower.mul(self.a[s - 1], theta))
            .expect("θ^s lies in GF(q^s)");
        let base = tower.base();
        let mut modulus: Vec<u32> = top.iter().map(|&c| base.neg(c)).collect();
        modulus.push(1);
        Ok((Arc::new(FieldTower::new(tower.q(), s, &modulus)?), coords))
    }

    /// The [s, s−d+1, d] code with parity-check matrix A, realized over a
    /// separate copy of GF(q^s) so its rank metric is taken over GF(q).
    pub fn block_code(&self) -> Result<GabidulinCode> {
        let (sub, coords) = self.standalone_subfield()?;
        let tower = self.tower();
        let h: Vec<Fqn> = self
            .a
            .iter()
            .map(|&x| sub.contract(&coords.coordinates(tower, x).expect("a_i in GF(q^s)")))
            .collect();
        GabidulinCode::from_parity(sub, h, self.s + 1 - self.d)
    }
}

/// Probability that every one of the n/s column blocks (width s) of a
/// uniform t × n q-ary matrix has rank at most C.
pub fn subfield_success_probability_exact(
    q: u32,
    n: usize,
    s: usize,
    capability: usize,
    t: usize,
) -> BigRational {
    let good: BigUint = (0..=capability.min(s).min(t))
        .map(|r| count_rank_matrices(q, s, t, r))
        .sum();
    let per_block = BigRational::new(good.into(), BigUint::from(q).pow((t * s) as u32).into());
    num_traits::pow(per_block, n / s)
}

/// q^{−(n−C)(t−C)}; 1 when t ≤ C.
pub fn subfield_success_probability_leading_order(
    q: u32,
    n: usize,
    capability: usize,
    t: usize,
) -> f64 {
    if t <= capability {
        return 1.0;
    }
    (q as f64).powf(-((n - capability) as f64) * (t - capability) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::directsum::success_probability_exact;
    use crate::subspace::SubspaceSubcode;

    fn code(q: u32, n: usize, k: usize) -> GabidulinCode {
        let f = Arc::new(FieldTower::with_default_modulus(q, n).unwrap());
        GabidulinCode::with_default_generator(f, n, k).unwrap()
    }

    #[test]
    fn subfield_basis_is_fixed_field() {
        let c = code(2, 6, 4);
        let f = c.tower();
        for s in [1, 2, 3, 6] {
            let b = subfield_basis(f, s).unwrap();
            assert_eq!(b.len(), s);
            let count = f.elements().filter(|&x| f.in_subfield(x, s)).count();
            assert_eq!(count, 1 << s);
        }
        assert_eq!(subfield_basis(f, 4), Err(Error::NotADivisor { s: 4, n: 6 }));
        let theta = canonical_subfield_generator(f, 3).unwrap();
        assert!(f.in_subfield(theta, 3) && !f.in_subfield(theta, 1));
    }

    #[test]
    fn expansion_round_trips() {
        let c = code(2, 6, 4);
        let f = c.tower();
        let theta = canonical_subfield_generator(f, 3).unwrap();
        let a = power_basis(f, theta, 3);
        let beta = canonical_ext_basis(f, 3).unwrap();
        let ext = expand_h_over_subfield(f, c.h(), &a, &beta).unwrap();
        assert_eq!((ext.rows(), ext.cols()), (2, 6));
        assert_eq!(contract_over_subfield(f, &ext, &beta), c.h());
        for r in 0..2 {
            for j in 0..6 {
                assert!(f.in_subfield(ext[(r, j)], 3));
            }
        }
        let trivial =
            expand_h_over_subfield(f, c.h(), &subfield_basis(f, 6).unwrap(), &[Fqn::ONE]).unwrap();
        assert_eq!(trivial.row(0), c.h());
    }

    /// (G|GF(8)) by brute force: every vector of GF(8)^6 that is a codeword.
    fn subcode_by_scan(c: &GabidulinCode) -> Vec<Vec<Fqn>> {
        let f = c.tower();
        let sub: Vec<Fqn> = f.elements().filter(|&x| f.in_subfield(x, 3)).collect();
        (0..1u32 << 18)
            .map(|idx| {
                (0..6)
                    .map(|j| sub[((idx >> (3 * j)) & 7) as usize])
                    .collect::<Vec<_>>()
            })
            .filter(|w| c.is_codeword(w))
            .collect()
    }

    #[test]
    fn factorization_annihilates_subcode_exactly() {
        let c = code(2, 6, 4);
        let f = c.tower().clone();
        let fact = compute_factorization(&c, 3).unwrap();
        assert_eq!(fact.s_matrix().rank(f.base()), 6);
        let mut scanned = subcode_by_scan(&c);
        assert_eq!(scanned.len(), 64);
        let subcode = SubspaceSubcode::new(c.clone(), fact.subfield_basis().unwrap()).unwrap();
        let mut via_parent = subcode.enumerate_via_parent().unwrap();
        scanned.sort();
        via_parent.sort();
        assert_eq!(scanned, via_parent);
        // Kernel of H_{q^s} inside GF(8)^6 equals the subcode.
        let sub: Vec<Fqn> = f.elements().filter(|&x| f.in_subfield(x, 3)).collect();
        let mut kernel: Vec<Vec<Fqn>> = (0..1u32 << 18)
            .map(|idx| {
                (0..6)
                    .map(|j| sub[((idx >> (3 * j)) & 7) as usize])
                    .collect::<Vec<_>>()
            })
            .filter(|w| fact.annihilates(w))
            .collect();
        kernel.sort();
        assert_eq!(kernel, scanned);
        fact.verify_uniqueness().unwrap();
    }

    #[test]
    fn factorization_preconditions() {
        let c = code(2, 6, 2); // d = 5
        assert_eq!(
            compute_factorization(&c, 2).unwrap_err(),
            Error::SubfieldTooSmall { s: 2, bound: 3 }
        );
        assert_eq!(
            compute_factorization(&c, 4).unwrap_err(),
            Error::NotADivisor { s: 4, n: 6 }
        );
        let c = code(2, 6, 3); // d = 4
        assert_eq!(
            compute_factorization(&c, 3).unwrap_err(),
            Error::TrivialSubcode { m: 3, d: 4 }
        );
    }

    #[test]
    fn s_depends_on_ext_basis() {
        let c = code(2, 6, 4);
        let fact = compute_factorization(&c, 3).unwrap();
        let mut beta = fact.basis_ext().to_vec();
        beta.swap(0, 1);
        let other = compute_factorization_with(&c, 3, fact.a().to_vec(), beta).unwrap();
        assert_ne!(other.s_matrix(), fact.s_matrix());
        other.verify_uniqueness().unwrap();
        assert!(subcode_by_scan(&c).iter().all(|w| other.annihilates(w)));
    }

    #[test]
    fn block_code_is_mrd() {
        let c = code(2, 6, 4);
        let fact = compute_factorization(&c, 3).unwrap();
        let block = fact.block_code().unwrap();
        assert_eq!((block.len(), block.k(), block.d()), (3, 1, 3));
        assert_eq!(block.min_rank_distance_exhaustive().unwrap(), 3);
        let rank = fact.parity_check_matrix().rank(&**c.tower());
        assert_eq!(rank, 4);
    }

    #[test]
    fn subfield_probability_matches_direct_sum() {
        for (q, n, s, cap, t) in [
            (2u32, 6usize, 3usize, 1usize, 2usize),
            (2, 8, 4, 1, 3),
            (3, 6, 2, 0, 1),
        ] {
            assert_eq!(
                subfield_success_probability_exact(q, n, s, cap, t),
                success_probability_exact(q, &vec![s; n / s], cap, t)
            );
        }
    }
}
