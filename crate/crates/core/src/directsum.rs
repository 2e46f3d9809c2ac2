//! Direct sums M = (G|V_{m_1}) ⊕ … ⊕ (G|V_{m_u}) of subspace subcodes over
//! pairwise trivially intersecting subspaces.
//!
//! A received word in V_{m_1}^n ⊕ … ⊕ V_{m_u}^n is projected onto each
//! V_{m_i} and every projection is decoded in its own parent code, so the
//! decoder succeeds whenever each projected error has rank at most C, even
//! when the total rank exceeds C.

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{self, FieldOps, FieldTower, Fqn};
use crate::gabidulin::{Decoded, GabidulinCode};
use crate::qlinalg::{
    combine, count_rank_matrices, CoordinateSystem, ErrorMode, ExtMatrix, QMatrix,
};
use crate::subspace::{add_vectors, Route, SubspaceBasis, SubspaceSubcode};

/// Trials per rng substream in the Monte Carlo routines. Block b always uses
/// stream b of the seed, so results do not depend on the thread count.
pub const TRIALS_PER_BLOCK: u64 = 4096;

/// Accepts iff the concatenated bases are GF(q)-independent.
pub fn validate_direct_sum(tower: &FieldTower, parts: &[SubspaceBasis]) -> Result<()> {
    let concat: Vec<Fqn> = parts
        .iter()
        .flat_map(|b| b.elements().iter().copied())
        .collect();
    let rank = crate::qlinalg::rank_of_vector(tower, &concat);
    if rank == concat.len() {
        Ok(())
    } else {
        Err(Error::SubspacesOverlap {
            overlap: concat.len() - rank,
        })
    }
}

#[derive(Clone, Debug)]
pub struct DirectSumCode {
    code: GabidulinCode,
    parts: Vec<SubspaceSubcode>,
    combined: CoordinateSystem,
}

impl DirectSumCode {
    pub fn new(code: GabidulinCode, bases: Vec<SubspaceBasis>) -> Result<Self> {
        if bases.is_empty() {
            return Err(Error::InvalidParameters(
                "a direct sum needs at least one part".into(),
            ));
        }
        validate_direct_sum(code.tower(), &bases)?;
        let concat: Vec<Fqn> = bases
            .iter()
            .flat_map(|b| b.elements().iter().copied())
            .collect();
        let combined = CoordinateSystem::new(code.tower(), &concat)?;
        let parts = bases
            .into_iter()
            .map(|b| SubspaceSubcode::new(code.clone(), b))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            code,
            parts,
            combined,
        })
    }

    pub fn code(&self) -> &GabidulinCode {
        &self.code
    }

    pub fn parts(&self) -> &[SubspaceSubcode] {
        &self.parts
    }

    pub fn tower(&self) -> &FieldTower {
        self.code.tower()
    }

    /// Subspace dimensions m_i.
    pub fn dims(&self) -> Vec<usize> {
        self.parts.iter().map(|p| p.basis().dim()).collect()
    }

    /// N = Σ m_i.
    pub fn total_dim(&self) -> usize {
        self.combined.dim()
    }

    /// Σ m_i − u(d − 1).
    pub fn message_len(&self) -> usize {
        self.parts.iter().map(SubspaceSubcode::message_len).sum()
    }

    /// log_q |M| = n Σ (m_i − (d − 1)).
    pub fn log_cardinality(&self) -> usize {
        self.tower().n() * self.message_len()
    }

    /// Concatenation (b_1, …, b_u).
    pub fn concatenated_basis(&self) -> Vec<Fqn> {
        self.parts
            .iter()
            .flat_map(|p| p.basis().elements().iter().copied())
            .collect()
    }

    /// y = y_1 + … + y_u with the components of y_i in V_{m_i}.
    pub fn project_components(&self, y: &[Fqn]) -> Result<Vec<Vec<Fqn>>> {
        let tower = self.tower();
        let mut out = vec![vec![Fqn::ZERO; y.len()]; self.parts.len()];
        for (j, &yj) in y.iter().enumerate() {
            let coords = self
                .combined
                .coordinates(tower, yj)
                .ok_or(Error::NotInSubspace { position: j })?;
            let mut offset = 0;
            for (i, part) in self.parts.iter().enumerate() {
                let m = part.basis().dim();
                out[i][j] = part
                    .basis()
                    .elements()
                    .iter()
                    .zip(&coords[offset..offset + m])
                    .fold(Fqn::ZERO, |acc, (&b, &c)| tower.add(acc, tower.scale(c, b)));
                offset += m;
            }
        }
        Ok(out)
    }

    /// (f_{b_1}(c_1), …, f_{b_u}(c_u)).
    pub fn f_multi(&self, c: &[Fqn]) -> Result<Vec<Vec<Fqn>>> {
        self.project_components(c)?
            .iter()
            .zip(&self.parts)
            .map(|(ci, part)| part.f_b(ci))
            .collect()
    }

    /// H(M): block-diagonal with blocks H_{V_{m_i}}, (u(d−1)) × N.
    pub fn parent_parity_check_matrix(&self) -> ExtMatrix {
        let dm1 = self.code.d() - 1;
        let n_total = self.total_dim();
        let mut h = ExtMatrix::zeros(self.parts.len() * dm1, n_total);
        let mut col = 0;
        for (i, part) in self.parts.iter().enumerate() {
            let block = crate::subspace::subspace_parity_check_matrix(
                self.tower(),
                part.basis(),
                self.code.d(),
            );
            for r in 0..dm1 {
                for c in 0..block.cols() {
                    h[(i * dm1 + r, col + c)] = block[(r, c)];
                }
            }
            col += block.cols();
        }
        h
    }

    /// Splits x into blocks of length m_i − d + 1, encodes each in its
    /// subspace subcode and sums.
    pub fn encode(&self, x: &[Fqn]) -> Result<Vec<Fqn>> {
        if x.len() != self.message_len() {
            return Err(Error::DimensionMismatch {
                expected: self.message_len(),
                got: x.len(),
            });
        }
        let tower = self.tower();
        let mut c = vec![Fqn::ZERO; self.code.len()];
        let mut offset = 0;
        for part in &self.parts {
            let k = part.message_len();
            let ci = part.encode(&x[offset..offset + k])?;
            c = add_vectors(tower, &c, &ci);
            offset += k;
        }
        Ok(c)
    }

    /// Decodes every projection through its parent code. On failure the
    /// error lists the indices of the parts that could not be decoded.
    pub fn decode(&self, y: &[Fqn]) -> Result<Decoded> {
        let tower = self.tower();
        let mut codeword = vec![Fqn::ZERO; y.len()];
        let mut error = vec![Fqn::ZERO; y.len()];
        let mut failed = Vec::new();
        for (i, (yi, part)) in self
            .project_components(y)?
            .iter()
            .zip(&self.parts)
            .enumerate()
        {
            match part.decode(yi, Route::InParent) {
                Ok(dec) => {
                    codeword = add_vectors(tower, &codeword, &dec.codeword);
                    error = add_vectors(tower, &error, &dec.error);
                }
                Err(Error::DecodingFailure { .. }) => failed.push(i),
                Err(e) => return Err(e),
            }
        }
        if failed.is_empty() {
            Ok(Decoded { codeword, error })
        } else {
            Err(Error::ComponentFailures { failed })
        }
    }

    /// Error (α_1..α_t)·S expressed in the concatenated basis: S is t × N,
    /// `mixing` is a t × len q-ary matrix of full row rank whose rows are
    /// the coordinates of the α_j. The rank of the part-i error equals
    /// rank(S_i).
    pub fn error_from_mixing(&self, s: &QMatrix, mixing: &QMatrix) -> Vec<Fqn> {
        let e = s.transpose().mul(self.tower().base(), mixing);
        combine(self.tower(), &self.concatenated_basis(), &e)
    }
}

/// Which closed form [`success_probability`] evaluates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProbabilityForm {
    /// Π_i P(rank of a uniform t × m_i matrix ≤ C).
    Exact,
    /// q^{−(N−C)(t−C)}.
    LeadingOrder,
}

/// Π_i [Σ_{r ≤ C} N_r(m_i, t)] / q^{t m_i}, exactly.
pub fn success_probability_exact(
    q: u32,
    dims: &[usize],
    capability: usize,
    t: usize,
) -> BigRational {
    dims.iter().fold(BigRational::one(), |acc, &m| {
        let good: BigUint = (0..=capability.min(m).min(t))
            .map(|r| count_rank_matrices(q, m, t, r))
            .sum();
        let all = BigUint::from(q).pow((t * m) as u32);
        acc * BigRational::new(good.into(), all.into())
    })
}

/// q^{−(N−C)(t−C)}, N = Σ m_i; 1 when t ≤ C.
pub fn success_probability_leading_order(
    q: u32,
    dims: &[usize],
    capability: usize,
    t: usize,
) -> f64 {
    if t <= capability {
        return 1.0;
    }
    let n_total: usize = dims.iter().sum();
    let exponent = (n_total as f64 - capability as f64) * (t - capability) as f64;
    (q as f64).powf(-exponent)
}

/// Product of the per-part leading terms q^{−(m_i−C)(t−C)}; 1 when t ≤ C.
pub fn success_probability_per_part_leading_order(
    q: u32,
    dims: &[usize],
    capability: usize,
    t: usize,
) -> f64 {
    if t <= capability {
        return 1.0;
    }
    let exponent: f64 = dims
        .iter()
        .map(|&m| (m as f64 - capability as f64) * (t - capability) as f64)
        .sum();
    (q as f64).powf(-exponent)
}

pub fn success_probability(
    q: u32,
    dims: &[usize],
    capability: usize,
    t: usize,
    form: ProbabilityForm,
) -> f64 {
    match form {
        ProbabilityForm::Exact => success_probability_exact(q, dims, capability, t)
            .to_f64()
            .expect("probability is finite"),
        ProbabilityForm::LeadingOrder => success_probability_leading_order(q, dims, capability, t),
    }
}

/// Empirical success frequency with a 3σ half-width.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloEstimate {
    pub trials: u64,
    pub successes: u64,
    pub frequency: f64,
    pub half_width: f64,
}

impl MonteCarloEstimate {
    fn from_counts(trials: u64, successes: u64) -> Self {
        let p = if trials == 0 {
            0.0
        } else {
            successes as f64 / trials as f64
        };
        let half_width = if trials == 0 {
            0.0
        } else {
            3.0 * (p * (1.0 - p) / trials as f64).sqrt()
        };
        Self {
            trials,
            successes,
            frequency: p,
            half_width,
        }
    }

    pub fn contains(&self, p: f64) -> bool {
        (self.frequency - p).abs() <= self.half_width
    }
}

fn block_rng(seed: u64, block: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(block);
    rng
}

fn blocks(trials: u64) -> impl ParallelIterator<Item = (u64, u64)> {
    let count = trials.div_ceil(TRIALS_PER_BLOCK);
    (0..count).into_par_iter().map(move |b| {
        let start = b * TRIALS_PER_BLOCK;
        (b, (trials - start).min(TRIALS_PER_BLOCK))
    })
}

/// Draws S (t × N) according to the channel.
fn sample_s(
    base: &crate::field::Fq,
    t: usize,
    n_total: usize,
    mode: ErrorMode,
    rng: &mut ChaCha8Rng,
) -> QMatrix {
    match mode {
        ErrorMode::UniformMatrix => QMatrix::random(base, t, n_total, rng),
        ErrorMode::ExactRank => QMatrix::random_full_row_rank(base, t, n_total, rng),
    }
}

/// Whether every column block S_i of S has rank at most C.
fn all_parts_decodable(
    base: &crate::field::Fq,
    s: &QMatrix,
    dims: &[usize],
    capability: usize,
) -> bool {
    let mut offset = 0;
    dims.iter().all(|&m| {
        let ok = s.columns(offset, offset + m).rank(base) <= capability;
        offset += m;
        ok
    })
}

/// Frequency of the event {rank(S_i) ≤ C for all i} for S drawn from the
/// channel; only the base field and the part dimensions matter.
pub fn monte_carlo_success(
    q: u32,
    dims: &[usize],
    capability: usize,
    t: usize,
    trials: u64,
    seed: u64,
    mode: ErrorMode,
) -> Result<MonteCarloEstimate> {
    let base = crate::field::Fq::new(q)?;
    let n_total: usize = dims.iter().sum();
    if mode == ErrorMode::ExactRank && t > n_total {
        return Err(Error::InvalidParameters(format!(
            "no {t} x {n_total} matrix has rank {t}"
        )));
    }
    let successes: u64 = blocks(trials)
        .map(|(b, len)| {
            let mut rng = block_rng(seed, b);
            (0..len)
                .filter(|_| {
                    let s = sample_s(&base, t, n_total, mode, &mut rng);
                    all_parts_decodable(&base, &s, dims, capability)
                })
                .count() as u64
        })
        .sum();
    Ok(MonteCarloEstimate::from_counts(trials, successes))
}

/// Outcome of [`monte_carlo_decoding`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecodingTally {
    pub trials: u64,
    /// Trials where the decoder returned the transmitted codeword.
    pub successes: u64,
    /// Trials where every S_i had rank ≤ C.
    pub rank_events: u64,
    /// Trials where decoder success and the rank event disagreed.
    pub mismatches: u64,
    pub field_mul_count: u64,
}

/// End-to-end version of [`monte_carlo_success`]: encode a random message,
/// add the channel error, decode with [`DirectSumCode::decode`].
pub fn monte_carlo_decoding(
    code: &DirectSumCode,
    t: usize,
    trials: u64,
    seed: u64,
    mode: ErrorMode,
) -> Result<DecodingTally> {
    let tower = code.tower();
    let base = *tower.base();
    let dims = code.dims();
    let n_total = code.total_dim();
    let len = code.code().len();
    let capability = code.code().capability();
    if t > len || (mode == ErrorMode::ExactRank && t > n_total) {
        return Err(Error::InvalidParameters(format!(
            "error rank {t} incompatible with N = {n_total}, length {len}"
        )));
    }
    let per_block = blocks(trials)
        .map(|(b, count)| -> Result<DecodingTally> {
            let mut rng = block_rng(seed, b);
            field::reset_mul_count();
            let mut tally = DecodingTally {
                trials: count,
                successes: 0,
                rank_events: 0,
                mismatches: 0,
                field_mul_count: 0,
            };
            for _ in 0..count {
                let x: Vec<Fqn> = (0..code.message_len())
                    .map(|_| tower.random(&mut rng))
                    .collect();
                let c = code.encode(&x)?;
                let s = sample_s(&base, t, n_total, mode, &mut rng);
                let mixing = QMatrix::random_full_row_rank(&base, t, len, &mut rng);
                let e = code.error_from_mixing(&s, &mixing);
                let y = add_vectors(tower, &c, &e);
                let decoded = match code.decode(&y) {
                    Ok(dec) => dec.codeword == c,
                    Err(Error::ComponentFailures { .. }) => false,
                    Err(err) => return Err(err),
                };
                let event = all_parts_decodable(&base, &s, &dims, capability);
                tally.successes += u64::from(decoded);
                tally.rank_events += u64::from(event);
                tally.mismatches += u64::from(decoded != event);
            }
            tally.field_mul_count = field::mul_count();
            Ok(tally)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(per_block.into_iter().fold(
        DecodingTally {
            trials: 0,
            successes: 0,
            rank_events: 0,
            mismatches: 0,
            field_mul_count: 0,
        },
        |acc, b| DecodingTally {
            trials: acc.trials + b.trials,
            successes: acc.successes + b.successes,
            rank_events: acc.rank_events + b.rank_events,
            mismatches: acc.mismatches + b.mismatches,
            field_mul_count: acc.field_mul_count + b.field_mul_count,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qlinalg::rank_of_vector;
    use num_bigint::BigInt;
    use rand::Rng;
    use std::sync::Arc;

    fn binary(n: usize) -> Arc<FieldTower> {
        Arc::new(FieldTower::with_default_modulus(2, n).unwrap())
    }

    fn basis(f: &FieldTower, exps: std::ops::Range<u32>) -> SubspaceBasis {
        SubspaceBasis::new(f, exps.map(|e| f.pow(f.alpha(), e as u128)).collect()).unwrap()
    }

    #[test]
    fn validate_examples() {
        let f = binary(4);
        let v1 = basis(&f, 0..2);
        let v2 = basis(&f, 2..4);
        assert!(validate_direct_sum(&f, std::slice::from_ref(&v1)).is_ok());
        assert!(validate_direct_sum(&f, &[v1.clone(), v2]).is_ok());
        let shared = basis(&f, 1..3);
        assert_eq!(
            validate_direct_sum(&f, &[v1, shared]),
            Err(Error::SubspacesOverlap { overlap: 1 })
        );
    }

    #[test]
    fn projections_and_extended_map() {
        let f = binary(8);
        let code = GabidulinCode::with_default_generator(f.clone(), 8, 6).unwrap();
        let m = DirectSumCode::new(code, vec![basis(&f, 0..3), basis(&f, 3..7)]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let zero = vec![Fqn::ZERO; 8];
        assert_eq!(
            m.project_components(&zero).unwrap(),
            vec![zero.clone(), zero.clone()]
        );
        for _ in 0..200 {
            let s = QMatrix::random(f.base(), 7, 8, &mut rng);
            let c = combine(&f, &m.concatenated_basis(), &s);
            let parts = m.project_components(&c).unwrap();
            let sum = add_vectors(&f, &parts[0], &parts[1]);
            assert_eq!(sum, c);
            let images = m.f_multi(&c).unwrap();
            let concat: Vec<Fqn> = images.concat();
            assert_eq!(rank_of_vector(&f, &concat), rank_of_vector(&f, &c));
        }
        let only_first = combine(
            &f,
            m.parts()[0].basis().elements(),
            &QMatrix::random(f.base(), 3, 8, &mut rng),
        );
        let img = m.f_multi(&only_first).unwrap();
        assert_eq!(img[0], m.parts()[0].f_b(&only_first).unwrap());
        assert!(img[1].iter().all(|x| x.is_zero()));
    }

    #[test]
    fn encode_decode_beyond_capability() {
        let f = binary(12);
        let code = GabidulinCode::with_default_generator(f.clone(), 12, 8).unwrap();
        let m = DirectSumCode::new(code, vec![basis(&f, 0..6), basis(&f, 6..12)]).unwrap();
        assert_eq!(m.message_len(), 4);
        let h = m.parent_parity_check_matrix();
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..30 {
            let x: Vec<Fqn> = (0..4).map(|_| f.random(&mut rng)).collect();
            let c = m.encode(&x).unwrap();
            assert!(m.code().is_codeword(&c));
            let image = m.f_multi(&c).unwrap().concat();
            assert!(h.mul_vec(&*f, &image).iter().all(|s| s.is_zero()));
            // Per-part ranks 2 and 2, total 4 > C = 2.
            let s = QMatrix::from_fn(4, 12, |i, j| {
                u32::from(
                    (i < 2 && j < 6 && rng.gen_bool(0.5))
                        || (i >= 2 && j >= 6 && rng.gen_bool(0.5)),
                )
            });
            let s_ranks = (
                s.columns(0, 6).rank(f.base()),
                s.columns(6, 12).rank(f.base()),
            );
            let mixing = QMatrix::random_full_row_rank(f.base(), 4, 12, &mut rng);
            let e = m.error_from_mixing(&s, &mixing);
            let y = add_vectors(&f, &c, &e);
            let res = m.decode(&y);
            if s_ranks.0 <= 2 && s_ranks.1 <= 2 {
                let dec = res.unwrap();
                assert_eq!(dec.codeword, c);
                assert_eq!(dec.error, e);
            }
        }
    }

    #[test]
    fn exact_probability_examples() {
        assert_eq!(
            success_probability_exact(2, &[3, 4], 2, 2),
            BigRational::one()
        );
        let p = success_probability_exact(2, &[2, 2], 1, 2);
        assert_eq!(p, BigRational::new(BigInt::from(25), BigInt::from(64)));
        assert_eq!(
            success_probability(2, &[2, 2], 1, 2, ProbabilityForm::Exact),
            0.390625
        );
        assert_eq!(
            success_probability_leading_order(2, &[4], 1, 3),
            2f64.powi(-6)
        );
    }

    #[test]
    fn exact_probability_monotone_in_t() {
        for dims in [vec![3usize], vec![2, 3], vec![4, 4]] {
            let mut prev = BigRational::one();
            for t in 0..=6 {
                let p = success_probability_exact(2, &dims, 1, t);
                assert!(p <= prev && p > BigRational::from_integer(0.into()));
                prev = p;
            }
        }
    }

    #[test]
    fn monte_carlo_is_deterministic_and_calibrated() {
        let a = monte_carlo_success(2, &[2, 2], 1, 2, 20_000, 5, ErrorMode::UniformMatrix).unwrap();
        let b = monte_carlo_success(2, &[2, 2], 1, 2, 20_000, 5, ErrorMode::UniformMatrix).unwrap();
        assert_eq!(a, b);
        assert!(a.contains(0.390625), "{a:?}");
        let one = monte_carlo_success(2, &[3, 3], 2, 2, 1000, 1, ErrorMode::UniformMatrix).unwrap();
        assert_eq!(one.frequency, 1.0);
    }

    #[test]
    fn decoding_tally_matches_rank_event() {
        let f = binary(8);
        let code = GabidulinCode::with_default_generator(f.clone(), 8, 6).unwrap();
        let m = DirectSumCode::new(code, vec![basis(&f, 0..4), basis(&f, 4..8)]).unwrap();
        let tally = monte_carlo_decoding(&m, 2, 300, 9, ErrorMode::UniformMatrix).unwrap();
        assert_eq!(tally.mismatches, 0);
        assert!(tally.successes > 0 && tally.successes < 300);
        assert!(tally.field_mul_count > 0);
    }
}
