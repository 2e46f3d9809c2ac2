//! Gabidulin codes: Moore-matrix generator and parity-check matrices,
//! encoding, syndromes, and bounded rank-distance decoding.
//!
//! # Decoding
//!
//! The decoder works on the syndromes s_l = Σ_i y_i h_i^{[l]}, l < d − 1.
//! For an error e = (E_1..E_t)·A with A q-ary, s_l = Σ_j E_j x_j^{[l]} where
//! x_j = Σ_i A_{j,i} h_i. The error span polynomial σ (monic, q-degree t)
//! vanishing on span(E_j) satisfies the key equation
//!
//! ```text
//! Σ_{p=0}^{t} σ_p s_{l-p}^{[p]} = 0,   l = t, …, d − 2,
//! ```
//!
//! which is solved as a dense linear system for t = 1, 2, …, C. The root space
//! of σ gives the E_j, the system s_l^{[-l]} = Σ_j E_j^{[-l]} x_j gives the
//! x_j, and expanding each x_j over h recovers A.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::field::{FieldOps, FieldTower, Fqn};
use crate::linpoly::LinearizedPoly;
use crate::qlinalg::{combine, rank_of_vector, CoordinateSystem, ExtMatrix, QMatrix};

/// Exhaustive oracles refuse to visit more words than this.
pub const EXHAUSTIVE_LIMIT: u128 = 1 << 20;

/// Rows v^{[0]}, v^{[1]}, …, v^{[rows-1]}.
pub fn moore_matrix(tower: &FieldTower, v: &[Fqn], rows: usize) -> ExtMatrix {
    ExtMatrix::from_fn(rows, v.len(), |i, j| tower.frobenius_power(v[j], i as i64))
}

/// The (len − 1) × len system Σ_i g_i^{[m]} h_i = 0, m = −(len−k−1), …, k−1.
pub fn dual_system(tower: &FieldTower, g: &[Fqn], k: usize) -> ExtMatrix {
    let len = g.len() as i64;
    let lo = -(len - k as i64 - 1);
    ExtMatrix::from_fn(g.len() - 1, g.len(), |r, j| {
        tower.frobenius_power(g[j], lo + r as i64)
    })
}

/// The vector h with moore(g, k) · moore(h, len − k)^T = 0, normalized so its
/// first nonzero component is 1.
pub fn compute_dual_vector(tower: &FieldTower, g: &[Fqn], k: usize) -> Result<Vec<Fqn>> {
    let len = g.len();
    if k == 0 || k >= len {
        return Err(Error::InvalidParameters(format!(
            "dimension k = {k} must satisfy 1 <= k < {len}"
        )));
    }
    check_full_rank(tower, g)?;
    let kernel = dual_system(tower, g, k).nullspace(tower);
    if kernel.len() != 1 {
        return Err(Error::InvalidParameters(format!(
            "dual system has a {}-dimensional solution space",
            kernel.len()
        )));
    }
    let h = normalize(tower, kernel.into_iter().next().expect("one kernel vector"));
    check_full_rank(tower, &h)?;
    Ok(h)
}

fn normalize(tower: &FieldTower, v: Vec<Fqn>) -> Vec<Fqn> {
    let Some(&lead) = v.iter().find(|x| !x.is_zero()) else {
        return v;
    };
    let inv = tower.inv(lead).expect("nonzero");
    v.into_iter().map(|x| tower.mul(x, inv)).collect()
}

fn check_full_rank(tower: &FieldTower, v: &[Fqn]) -> Result<()> {
    if v.len() > tower.n() {
        return Err(Error::InvalidParameters(format!(
            "length {} exceeds the extension degree {}",
            v.len(),
            tower.n()
        )));
    }
    let rank = rank_of_vector(tower, v);
    if rank != v.len() {
        return Err(Error::RankDeficient {
            rank,
            expected: v.len(),
        });
    }
    Ok(())
}

/// Default generator vector of length `len`: the start of the Frobenius
/// orbit of the first normal element of GF(q^n) in canonical order.
pub fn canonical_generator_vector(tower: &FieldTower, len: usize) -> Vec<Fqn> {
    let n = tower.n();
    let normal = (1..)
        .take(1 << 16)
        .map(Fqn::from_raw)
        .take_while(|x| (x.to_int() as u128) < tower.order())
        .find(|&x| {
            let orbit: Vec<Fqn> = (0..n).map(|i| tower.frobenius_power(x, i as i64)).collect();
            rank_of_vector(tower, &orbit) == n
        });
    match normal {
        Some(x) => (0..len)
            .map(|i| tower.frobenius_power(x, i as i64))
            .collect(),
        None => tower.basis()[..len].to_vec(),
    }
}

/// Result of a successful decoding: y = codeword + error.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Decoded {
    pub codeword: Vec<Fqn>,
    pub error: Vec<Fqn>,
}

/// An [len, k, d = len − k + 1] Gabidulin code over GF(q^n), len <= n.
#[derive(Clone, Debug)]
pub struct GabidulinCode {
    tower: Arc<FieldTower>,
    g: Vec<Fqn>,
    h: Vec<Fqn>,
    k: usize,
    h_coords: CoordinateSystem,
}

impl GabidulinCode {
    /// Code generated by moore(g, k); h is derived.
    pub fn from_generator(tower: Arc<FieldTower>, g: Vec<Fqn>, k: usize) -> Result<Self> {
        let h = compute_dual_vector(&tower, &g, k)?;
        Self::assemble(tower, g, h, k)
    }

    /// Code with parity-check matrix moore(h, len − k); a Moore generator
    /// vector is derived through the same dual computation.
    pub fn from_parity(tower: Arc<FieldTower>, h: Vec<Fqn>, k: usize) -> Result<Self> {
        let len = h.len();
        if k == 0 || k >= len {
            return Err(Error::InvalidParameters(format!(
                "dimension k = {k} must satisfy 1 <= k < {len}"
            )));
        }
        let g = compute_dual_vector(&tower, &h, len - k)?;
        Self::assemble(tower, g, h, k)
    }

    /// Code on [`canonical_generator_vector`].
    pub fn with_default_generator(tower: Arc<FieldTower>, len: usize, k: usize) -> Result<Self> {
        if len == 0 || len > tower.n() {
            return Err(Error::InvalidParameters(format!(
                "length {len} must lie in 1..={}",
                tower.n()
            )));
        }
        let g = canonical_generator_vector(&tower, len);
        Self::from_generator(tower, g, k)
    }

    fn assemble(tower: Arc<FieldTower>, g: Vec<Fqn>, h: Vec<Fqn>, k: usize) -> Result<Self> {
        let h_coords = CoordinateSystem::new(&tower, &h)?;
        let code = Self {
            tower,
            g,
            h,
            k,
            h_coords,
        };
        let gh = code
            .generator_matrix()
            .mul(&*code.tower, &code.parity_check_matrix().transpose());
        if !gh.is_zero(&*code.tower) {
            return Err(Error::InvalidParameters(
                "generator and parity-check matrices are not orthogonal".into(),
            ));
        }
        Ok(code)
    }

    pub fn tower(&self) -> &Arc<FieldTower> {
        &self.tower
    }

    pub fn len(&self) -> usize {
        self.h.len()
    }

    pub fn is_empty(&self) -> bool {
        self.h.is_empty()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Minimum rank distance len − k + 1.
    pub fn d(&self) -> usize {
        self.len() - self.k + 1
    }

    /// ⌊(d − 1)/2⌋.
    pub fn capability(&self) -> usize {
        (self.d() - 1) / 2
    }

    pub fn g(&self) -> &[Fqn] {
        &self.g
    }

    pub fn h(&self) -> &[Fqn] {
        &self.h
    }

    /// Coefficients of x over h, or `None` when x is outside span_q(h).
    pub fn h_coordinates(&self, x: Fqn) -> Option<Vec<u32>> {
        self.h_coords.coordinates(&self.tower, x)
    }

    /// k × len.
    pub fn generator_matrix(&self) -> ExtMatrix {
        moore_matrix(&self.tower, &self.g, self.k)
    }

    /// (d − 1) × len.
    pub fn parity_check_matrix(&self) -> ExtMatrix {
        moore_matrix(&self.tower, &self.h, self.d() - 1)
    }

    /// c = x · G.
    pub fn encode(&self, x: &[Fqn]) -> Result<Vec<Fqn>> {
        if x.len() != self.k {
            return Err(Error::DimensionMismatch {
                expected: self.k,
                got: x.len(),
            });
        }
        let t = &*self.tower;
        Ok((0..self.len())
            .map(|i| {
                x.iter().enumerate().fold(Fqn::ZERO, |acc, (r, &xr)| {
                    if xr.is_zero() {
                        acc
                    } else {
                        t.add(acc, t.mul(xr, t.frobenius_power(self.g[i], r as i64)))
                    }
                })
            })
            .collect())
    }

    /// s_l = Σ_i y_i h_i^{[l]} for l = 0, …, d − 2.
    pub fn syndromes(&self, y: &[Fqn]) -> Result<Vec<Fqn>> {
        self.check_len(y)?;
        let t = &*self.tower;
        Ok((0..self.d() - 1)
            .map(|l| {
                y.iter().zip(&self.h).fold(Fqn::ZERO, |acc, (&yi, &hi)| {
                    if yi.is_zero() {
                        acc
                    } else {
                        t.add(acc, t.mul(yi, t.frobenius_power(hi, l as i64)))
                    }
                })
            })
            .collect())
    }

    pub fn is_codeword(&self, y: &[Fqn]) -> bool {
        self.syndromes(y)
            .is_ok_and(|s| s.iter().all(|x| x.is_zero()))
    }

    fn check_len(&self, y: &[Fqn]) -> Result<()> {
        if y.len() != self.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                got: y.len(),
            });
        }
        Ok(())
    }

    /// Unique decoding up to rank distance C. Never returns a non-codeword.
    pub fn decode(&self, y: &[Fqn]) -> Result<Decoded> {
        let syn = self.syndromes(y)?;
        if syn.iter().all(|s| s.is_zero()) {
            return Ok(Decoded {
                codeword: y.to_vec(),
                error: vec![Fqn::ZERO; y.len()],
            });
        }
        let t = &*self.tower;
        for rank in 1..=self.capability() {
            let Some(error) = self.try_error_of_rank(&syn, rank) else {
                continue;
            };
            let codeword: Vec<Fqn> = y.iter().zip(&error).map(|(&a, &b)| t.sub(a, b)).collect();
            if self.is_codeword(&codeword) {
                return Ok(Decoded { codeword, error });
            }
        }
        Err(Error::DecodingFailure {
            capability: self.capability(),
        })
    }

    fn try_error_of_rank(&self, syn: &[Fqn], rank: usize) -> Option<Vec<Fqn>> {
        let t = &*self.tower;
        let dm1 = syn.len();
        // Key equation, unknowns σ_0..σ_{rank-1}, σ_rank = 1.
        let key = ExtMatrix::from_fn(dm1 - rank, rank, |r, p| {
            t.frobenius_power(syn[r + rank - p], p as i64)
        });
        let rhs: Vec<Fqn> = (rank..dm1)
            .map(|l| t.neg(t.frobenius_power(syn[l - rank], rank as i64)))
            .collect();
        let sol = key.solve(t, &rhs).ok()?;
        let mut coeffs = sol.particular;
        coeffs.push(Fqn::ONE);
        let sigma = LinearizedPoly::new(coeffs);
        let values = sigma.root_space_basis(t).ok()?;
        if values.len() != rank {
            return None;
        }
        // s_l^{[-l]} = Σ_j E_j^{[-l]} x_j
        let moore = ExtMatrix::from_fn(dm1, rank, |l, j| t.frobenius_power(values[j], -(l as i64)));
        let rhs: Vec<Fqn> = syn
            .iter()
            .enumerate()
            .map(|(l, &s)| t.frobenius_power(s, -(l as i64)))
            .collect();
        let xs = moore.solve(t, &rhs).ok()?;
        if !xs.is_unique() {
            return None;
        }
        let mut a = QMatrix::zeros(rank, self.len());
        for (j, &xj) in xs.particular.iter().enumerate() {
            let row = self.h_coords.coordinates(t, xj)?;
            for (i, v) in row.into_iter().enumerate() {
                a[(j, i)] = v;
            }
        }
        Some(combine(t, &values, &a))
    }

    /// Every message of GF(q^n)^k in mixed-radix order, for exhaustive oracles.
    pub fn messages(&self) -> Result<impl Iterator<Item = Vec<Fqn>> + '_> {
        let order = self.tower.order();
        let size = exhaustive_size(order, self.k)?;
        let k = self.k;
        Ok((0..size).map(move |mut idx| {
            (0..k)
                .map(|_| {
                    let v = (idx % order) as u64;
                    idx /= order;
                    Fqn::from_raw(v)
                })
                .collect()
        }))
    }

    /// Every codeword, for exhaustive oracles.
    pub fn codewords(&self) -> Result<impl Iterator<Item = Vec<Fqn>> + '_> {
        Ok(self
            .messages()?
            .map(|x| self.encode(&x).expect("message has length k")))
    }

    /// Brute-force minimum nonzero rank over all q^{nk} codewords.
    pub fn min_rank_distance_exhaustive(&self) -> Result<usize> {
        Ok(self
            .codewords()?
            .filter(|c| c.iter().any(|x| !x.is_zero()))
            .map(|c| rank_of_vector(&self.tower, &c))
            .min()
            .unwrap_or(0))
    }
}

/// order^k, refusing anything above [`EXHAUSTIVE_LIMIT`].
pub(crate) fn exhaustive_size(order: u128, k: usize) -> Result<u128> {
    let size = (0..k).try_fold(1u128, |acc, _| acc.checked_mul(order));
    match size {
        Some(s) if s <= EXHAUSTIVE_LIMIT => Ok(s),
        _ => Err(Error::Oversized {
            size: size.unwrap_or(u128::MAX),
            limit: EXHAUSTIVE_LIMIT,
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qlinalg::{random_error, ErrorMode};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn tower(q: u32, n: usize) -> Arc<FieldTower> {
        Arc::new(FieldTower::with_default_modulus(q, n).unwrap())
    }

    #[test]
    fn moore_examples() {
        let f = tower(2, 6);
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let v: Vec<Fqn> = (0..6).map(|_| f.random(&mut rng)).collect();
        let m1 = moore_matrix(&f, &v, 1);
        assert_eq!(m1.row(0), &v[..]);
        let m = moore_matrix(&f, &v, 4);
        for i in 1..4 {
            for j in 0..6 {
                assert_eq!(m[(i, j)], f.mul(m[(i - 1, j)], m[(i - 1, j)]));
            }
        }
        let mut seen = 0;
        while seen < 20 {
            let v: Vec<Fqn> = (0..6).map(|_| f.random(&mut rng)).collect();
            if rank_of_vector(&f, &v) < 6 {
                continue;
            }
            let mm = moore_matrix(&f, &v, 6);
            let b: Vec<Fqn> = (0..6).map(|_| f.random(&mut rng)).collect();
            assert!(mm.solve(&*f, &b).unwrap().is_unique());
            seen += 1;
        }
    }

    #[test]
    fn dual_vector_properties() {
        let f = tower(2, 4);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let g = loop {
            let g: Vec<Fqn> = (0..4).map(|_| f.random(&mut rng)).collect();
            if rank_of_vector(&f, &g) == 4 {
                break g;
            }
        };
        assert_eq!(dual_system(&f, &g, 2).nullspace(&*f).len(), 1);
        let h = compute_dual_vector(&f, &g, 2).unwrap();
        assert_eq!(h.iter().find(|x| !x.is_zero()), Some(&Fqn::ONE));
        let gm = moore_matrix(&f, &g, 2);
        let hm = moore_matrix(&f, &h, 2);
        assert!(gm.mul(&*f, &hm.transpose()).is_zero(&*f));
        let lam = f.alpha();
        let scaled: Vec<Fqn> = h.iter().map(|&x| f.mul(lam, x)).collect();
        assert!(gm
            .mul(&*f, &moore_matrix(&f, &scaled, 2).transpose())
            .is_zero(&*f));
    }

    #[test]
    fn dual_rejects_degenerate_input() {
        let f = tower(2, 4);
        let a = f.alpha();
        assert!(matches!(
            compute_dual_vector(&f, &[Fqn::ONE, a, f.add(Fqn::ONE, a), f.pow(a, 3)], 2),
            Err(Error::RankDeficient { rank: 3, .. })
        ));
        assert!(compute_dual_vector(&f, &[Fqn::ONE, a], 2).is_err());
    }

    #[test]
    fn from_parity_matches_from_generator() {
        let f = tower(2, 8);
        let c1 = GabidulinCode::with_default_generator(f.clone(), 8, 3).unwrap();
        let c2 = GabidulinCode::from_parity(f.clone(), c1.h().to_vec(), 3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..20 {
            let x: Vec<Fqn> = (0..3).map(|_| f.random(&mut rng)).collect();
            assert!(c1.is_codeword(&c2.encode(&x).unwrap()));
            assert!(c2.is_codeword(&c1.encode(&x).unwrap()));
        }
    }

    #[test]
    fn encode_examples() {
        let f = tower(2, 6);
        let code = GabidulinCode::with_default_generator(f.clone(), 6, 3).unwrap();
        assert_eq!(code.encode(&[Fqn::ZERO; 3]).unwrap(), vec![Fqn::ZERO; 6]);
        assert_eq!(
            code.encode(&[Fqn::ONE, Fqn::ZERO, Fqn::ZERO]).unwrap(),
            code.g()
        );
        assert!(code.encode(&[Fqn::ONE]).is_err());
    }

    #[test]
    fn syndromes_of_rank_one_error() {
        let f = tower(2, 8);
        let code = GabidulinCode::with_default_generator(f.clone(), 8, 4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let e1 = f.random(&mut rng);
            let a = QMatrix::random(f.base(), 1, 8, &mut rng);
            let e = combine(&f, &[e1], &a);
            let x1 = combine(&f, code.h(), &a.transpose())[0];
            let s = code.syndromes(&e).unwrap();
            for (l, &sl) in s.iter().enumerate() {
                assert_eq!(sl, f.mul(e1, f.frobenius_power(x1, l as i64)));
            }
        }
    }

    #[test]
    fn decode_round_trips_within_capability() {
        for (q, n, k) in [(2u32, 8usize, 4usize), (3, 6, 2), (2, 7, 2)] {
            let f = tower(q, n);
            let code = GabidulinCode::with_default_generator(f.clone(), n, k).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(21);
            for _ in 0..100 {
                let x: Vec<Fqn> = (0..k).map(|_| f.random(&mut rng)).collect();
                let c = code.encode(&x).unwrap();
                let t = rand::Rng::gen_range(&mut rng, 0..=code.capability());
                let e = random_error(&f, t, None, n, ErrorMode::ExactRank, &mut rng).unwrap();
                let y: Vec<Fqn> = c.iter().zip(&e).map(|(&a, &b)| f.add(a, b)).collect();
                let dec = code.decode(&y).unwrap();
                assert_eq!(dec.codeword, c);
                assert_eq!(dec.error, e);
            }
        }
    }

    #[test]
    fn shortened_length_code_decodes() {
        // len < n: the decoder must expand x_j over a non-spanning h.
        let f = tower(2, 9);
        let code = GabidulinCode::with_default_generator(f.clone(), 6, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let x: Vec<Fqn> = (0..2).map(|_| f.random(&mut rng)).collect();
            let c = code.encode(&x).unwrap();
            let e = random_error(&f, 2, None, 6, ErrorMode::ExactRank, &mut rng).unwrap();
            let y: Vec<Fqn> = c.iter().zip(&e).map(|(&a, &b)| f.add(a, b)).collect();
            assert_eq!(code.decode(&y).unwrap().codeword, c);
        }
    }

    #[test]
    fn exhaustive_distance_small() {
        let f = tower(2, 4);
        for k in 1..=3 {
            let code = GabidulinCode::with_default_generator(f.clone(), 4, k).unwrap();
            assert_eq!(code.min_rank_distance_exhaustive().unwrap(), 4 - k + 1);
        }
        let big = GabidulinCode::with_default_generator(tower(2, 12), 12, 8).unwrap();
        assert!(matches!(
            big.min_rank_distance_exhaustive(),
            Err(Error::Oversized { .. })
        ));
    }
}
