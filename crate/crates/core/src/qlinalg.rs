//! Dense linear algebra over GF(q) and GF(q^n), the rank metric, random
//! rank-t errors, and exact counts of q-ary matrices of a given rank.

use std::ops::{Index, IndexMut};

use num_bigint::BigUint;
use num_traits::{One, Zero};
use rand::Rng;

use crate::error::{Error, Result};
use crate::field::{FieldOps, FieldTower, Fq, Fqn};

/// Row-major dense matrix. The field is supplied to each operation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Matrix<E> {
    rows: usize,
    cols: usize,
    data: Vec<E>,
}

/// q-ary matrix.
pub type QMatrix = Matrix<u32>;
/// Matrix over GF(q^n).
pub type ExtMatrix = Matrix<Fqn>;

/// Affine solution set `particular + span(kernel)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SolutionSet<E> {
    pub particular: Vec<E>,
    pub kernel: Vec<Vec<E>>,
}

impl<E> SolutionSet<E> {
    pub fn is_unique(&self) -> bool {
        self.kernel.is_empty()
    }
}

impl<E: Copy + Default> Matrix<E> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![E::default(); rows * cols],
        }
    }
}

impl<E: Copy> Matrix<E> {
    pub fn from_rows(rows: Vec<Vec<E>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        Self {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> E) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[E] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<E> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<E>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    /// Columns `range` of every row.
    pub fn columns(&self, start: usize, end: usize) -> Self {
        Self::from_fn(self.rows, end - start, |i, j| self[(i, start + j)])
    }

    pub fn hstack(&self, other: &Self) -> Self {
        assert_eq!(self.rows, other.rows);
        Self::from_fn(self.rows, self.cols + other.cols, |i, j| {
            if j < self.cols {
                self[(i, j)]
            } else {
                other[(i, j - self.cols)]
            }
        })
    }

    pub fn vstack(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.cols);
        let mut data = self.data.clone();
        data.extend_from_slice(&other.data);
        Self {
            rows: self.rows + other.rows,
            cols: self.cols,
            data,
        }
    }

    pub fn map<T>(&self, f: impl Fn(E) -> T) -> Matrix<T> {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&x| f(x)).collect(),
        }
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    pub fn identity<F: FieldOps<Elem = E>>(f: &F, n: usize) -> Self {
        Self::from_fn(n, n, |i, j| if i == j { f.one() } else { f.zero() })
    }

    pub fn mul<F: FieldOps<Elem = E>>(&self, f: &F, rhs: &Self) -> Self {
        assert_eq!(self.cols, rhs.rows, "inner dimensions differ");
        Self::from_fn(self.rows, rhs.cols, |i, j| {
            (0..self.cols).fold(f.zero(), |acc, l| {
                let a = self[(i, l)];
                if f.is_zero(a) {
                    acc
                } else {
                    f.add(acc, f.mul(a, rhs[(l, j)]))
                }
            })
        })
    }

    /// `self · v` for a column vector v.
    pub fn mul_vec<F: FieldOps<Elem = E>>(&self, f: &F, v: &[E]) -> Vec<E> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| {
                self.row(i).iter().zip(v).fold(f.zero(), |acc, (&a, &b)| {
                    if f.is_zero(a) || f.is_zero(b) {
                        acc
                    } else {
                        f.add(acc, f.mul(a, b))
                    }
                })
            })
            .collect()
    }

    /// `v · self` for a row vector v.
    pub fn vec_mul<F: FieldOps<Elem = E>>(&self, f: &F, v: &[E]) -> Vec<E> {
        assert_eq!(self.rows, v.len());
        (0..self.cols)
            .map(|j| {
                v.iter().enumerate().fold(f.zero(), |acc, (i, &a)| {
                    let b = self[(i, j)];
                    if f.is_zero(a) || f.is_zero(b) {
                        acc
                    } else {
                        f.add(acc, f.mul(a, b))
                    }
                })
            })
            .collect()
    }

    pub fn is_zero<F: FieldOps<Elem = E>>(&self, f: &F) -> bool {
        self.data.iter().all(|&x| f.is_zero(x))
    }

    /// Reduced row echelon form in place; returns the pivot columns.
    pub fn rref<F: FieldOps<Elem = E>>(&mut self, f: &F) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..self.cols {
            if r == self.rows {
                break;
            }
            let Some(p) = (r..self.rows).find(|&i| !f.is_zero(self[(i, c)])) else {
                continue;
            };
            self.swap_rows(r, p);
            let inv = f.inv(self[(r, c)]).expect("pivot is nonzero");
            for j in c..self.cols {
                self[(r, j)] = f.mul(self[(r, j)], inv);
            }
            for i in 0..self.rows {
                if i == r {
                    continue;
                }
                let factor = self[(i, c)];
                if f.is_zero(factor) {
                    continue;
                }
                for j in c..self.cols {
                    let t = self[(r, j)];
                    if !f.is_zero(t) {
                        self[(i, j)] = f.sub(self[(i, j)], f.mul(factor, t));
                    }
                }
            }
            pivots.push(c);
            r += 1;
        }
        pivots
    }

    pub fn rank<F: FieldOps<Elem = E>>(&self, f: &F) -> usize {
        self.clone().rref(f).len()
    }

    /// Basis of the right kernel {x : self · x = 0}; its size is cols − rank.
    pub fn nullspace<F: FieldOps<Elem = E>>(&self, f: &F) -> Vec<Vec<E>> {
        let mut m = self.clone();
        let pivots = m.rref(f);
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        free.iter()
            .map(|&fc| {
                let mut v = vec![f.zero(); self.cols];
                v[fc] = f.one();
                for (r, &pc) in pivots.iter().enumerate() {
                    v[pc] = f.neg(m[(r, fc)]);
                }
                v
            })
            .collect()
    }

    /// Solves `self · x = rhs`.
    pub fn solve<F: FieldOps<Elem = E>>(&self, f: &F, rhs: &[E]) -> Result<SolutionSet<E>> {
        if rhs.len() != self.rows {
            return Err(Error::DimensionMismatch {
                expected: self.rows,
                got: rhs.len(),
            });
        }
        let rhs_col = Matrix {
            rows: self.rows,
            cols: 1,
            data: rhs.to_vec(),
        };
        let mut aug = self.hstack(&rhs_col);
        let pivots = aug.rref(f);
        if pivots.last() == Some(&self.cols) {
            return Err(Error::NoSolution);
        }
        let mut particular = vec![f.zero(); self.cols];
        for (r, &pc) in pivots.iter().enumerate() {
            particular[pc] = aug[(r, self.cols)];
        }
        Ok(SolutionSet {
            particular,
            kernel: self.nullspace(f),
        })
    }

    pub fn inverse<F: FieldOps<Elem = E>>(&self, f: &F) -> Option<Self> {
        if self.rows != self.cols {
            return None;
        }
        let n = self.rows;
        let mut aug = self.hstack(&Self::identity(f, n));
        let pivots = aug.rref(f);
        if pivots.len() < n || pivots[n - 1] != n - 1 {
            return None;
        }
        Some(aug.columns(n, 2 * n))
    }
}

impl<E> Index<(usize, usize)> for Matrix<E> {
    type Output = E;

    fn index(&self, (i, j): (usize, usize)) -> &E {
        assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl<E> IndexMut<(usize, usize)> for Matrix<E> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut E {
        assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl QMatrix {
    /// Uniform random q-ary matrix.
    pub fn random<R: Rng + ?Sized>(base: &Fq, rows: usize, cols: usize, rng: &mut R) -> Self {
        Self::from_fn(rows, cols, |_, _| base.random(rng))
    }

    /// Uniform random q-ary matrix of full row rank, by rejection.
    pub fn random_full_row_rank<R: Rng + ?Sized>(
        base: &Fq,
        rows: usize,
        cols: usize,
        rng: &mut R,
    ) -> Self {
        assert!(rows <= cols, "full row rank needs rows <= cols");
        loop {
            let m = Self::random(base, rows, cols, rng);
            if m.rank(base) == rows {
                return m;
            }
        }
    }
}

/// n × len q-ary matrix whose column j is the expansion of `v[j]` over the
/// tower basis.
pub fn expand_vector(tower: &FieldTower, v: &[Fqn]) -> QMatrix {
    let cols: Vec<Vec<u32>> = v.iter().map(|&x| tower.expand(x)).collect();
    QMatrix::from_fn(tower.n(), v.len(), |i, j| cols[j][i])
}

/// Rk(v | GF(q)): rank of the expanded q-ary matrix.
pub fn rank_of_vector(tower: &FieldTower, v: &[Fqn]) -> usize {
    if v.iter().all(|x| x.is_zero()) {
        return 0;
    }
    expand_vector(tower, v).rank(tower.base())
}

/// `(x_1..x_r) · U` for a q-ary r × c matrix U: entry j is Σ_i x_i U_{ij}.
pub fn combine(tower: &FieldTower, x: &[Fqn], u: &QMatrix) -> Vec<Fqn> {
    assert_eq!(x.len(), u.rows());
    (0..u.cols())
        .map(|j| {
            x.iter().enumerate().fold(Fqn::ZERO, |acc, (i, &xi)| {
                tower.add(acc, tower.scale(u[(i, j)], xi))
            })
        })
        .collect()
}

/// Coordinates relative to a GF(q)-independent family of GF(q^n) elements.
///
/// Built once from the family; afterwards [`coordinates`](Self::coordinates)
/// both tests membership in the span and returns the unique coefficients.
#[derive(Clone, Debug)]
pub struct CoordinateSystem {
    dim: usize,
    /// Invertible n × n transform T with T · B = [I_dim; 0].
    transform: QMatrix,
}

impl CoordinateSystem {
    pub fn new(tower: &FieldTower, family: &[Fqn]) -> Result<Self> {
        let b = expand_vector(tower, family);
        let n = tower.n();
        let base = tower.base();
        let mut aug = b.hstack(&QMatrix::identity(base, n));
        let pivots = aug.rref(base);
        let rank = pivots.iter().take_while(|&&p| p < family.len()).count();
        if rank != family.len() {
            return Err(Error::RankDeficient {
                rank,
                expected: family.len(),
            });
        }
        Ok(Self {
            dim: family.len(),
            transform: aug.columns(family.len(), family.len() + n),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Coefficients of x over the family, or `None` when x is outside its span.
    pub fn coordinates(&self, tower: &FieldTower, x: Fqn) -> Option<Vec<u32>> {
        let y = self.transform.mul_vec(tower.base(), &tower.expand(x));
        if y[self.dim..].iter().any(|&d| d != 0) {
            return None;
        }
        Some(y[..self.dim].to_vec())
    }

    pub fn contains(&self, tower: &FieldTower, x: Fqn) -> bool {
        self.coordinates(tower, x).is_some()
    }
}

/// How [`random_error`] draws the q-ary mixing matrix A in e = (E_1..E_t)·A.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ErrorMode {
    /// A has full rank t, so the error has rank exactly t.
    ExactRank,
    /// A uniform over all t × len matrices; rank at most t.
    UniformMatrix,
}

/// Random error e = (E_1, …, E_t) · A of length `len`.
///
/// The E_j are GF(q)-independent elements of the support space (the span of
/// `support`, or all of GF(q^n) when `None`).
pub fn random_error<R: Rng + ?Sized>(
    tower: &FieldTower,
    t: usize,
    support: Option<&[Fqn]>,
    len: usize,
    mode: ErrorMode,
    rng: &mut R,
) -> Result<Vec<Fqn>> {
    let dim = support.map_or(tower.n(), <[Fqn]>::len);
    if t > dim || t > len {
        return Err(Error::InvalidParameters(format!(
            "error rank {t} exceeds support dimension {dim} or length {len}"
        )));
    }
    if t == 0 {
        return Ok(vec![Fqn::ZERO; len]);
    }
    let base = tower.base();
    let values = random_independent(tower, t, support, rng);
    let a = match mode {
        ErrorMode::ExactRank => QMatrix::random_full_row_rank(base, t, len, rng),
        ErrorMode::UniformMatrix => QMatrix::random(base, t, len, rng),
    };
    Ok(combine(tower, &values, &a))
}

/// t GF(q)-independent random elements of span(support) (or GF(q^n)).
pub fn random_independent<R: Rng + ?Sized>(
    tower: &FieldTower,
    t: usize,
    support: Option<&[Fqn]>,
    rng: &mut R,
) -> Vec<Fqn> {
    let base = tower.base();
    match support {
        None => loop {
            let v: Vec<Fqn> = (0..t).map(|_| tower.random(rng)).collect();
            if rank_of_vector(tower, &v) == t {
                return v;
            }
        },
        Some(b) => {
            let coeffs = QMatrix::random_full_row_rank(base, t, b.len(), rng);
            combine(tower, b, &coeffs.transpose())
        }
    }
}

/// N_C(m, t): number of t × m q-ary matrices of rank exactly C.
///
/// Π_{i<C} (q^m − q^i)(q^t − q^i) / (q^C − q^i), computed exactly; zero when
/// C exceeds min(m, t).
pub fn count_rank_matrices(q: u32, m: usize, t: usize, rank: usize) -> BigUint {
    if rank > m.min(t) {
        return BigUint::zero();
    }
    let qb = BigUint::from(q);
    let qm = qb.pow(m as u32);
    let qt = qb.pow(t as u32);
    let qc = qb.pow(rank as u32);
    let mut num = BigUint::one();
    let mut den = BigUint::one();
    let mut qi = BigUint::one();
    for _ in 0..rank {
        num *= (&qm - &qi) * (&qt - &qi);
        den *= &qc - &qi;
        qi *= &qb;
    }
    debug_assert!((&num % &den).is_zero());
    num / den
}
