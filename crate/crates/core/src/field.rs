//! Arithmetic in a prime field GF(q) and in its degree-n extension GF(q^n).
//!
//! Extension elements are stored as their canonical integer: the base-q
//! number whose digits are the coordinates over the polynomial basis
//! 1, α, …, α^{n-1}, α being the class of x modulo the tower's modulus.
//! Arithmetic goes through the [`FieldTower`], which owns the modulus, the
//! Frobenius tables, and the (optional) non-polynomial coordinate basis.

use std::cell::Cell;
use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly;
use crate::qlinalg::Matrix;

thread_local! {
    static MUL_COUNT: Cell<u64> = const { Cell::new(0) };
}

/// Number of GF(q^n) multiplications performed on this thread since the
/// last [`reset_mul_count`].
pub fn mul_count() -> u64 {
    MUL_COUNT.with(Cell::get)
}

pub fn reset_mul_count() {
    MUL_COUNT.with(|c| c.set(0));
}

/// The operations Gaussian elimination and friends need from a field.
pub trait FieldOps {
    type Elem: Copy + PartialEq + fmt::Debug;

    fn zero(&self) -> Self::Elem;
    fn one(&self) -> Self::Elem;
    fn add(&self, a: Self::Elem, b: Self::Elem) -> Self::Elem;
    fn sub(&self, a: Self::Elem, b: Self::Elem) -> Self::Elem;
    fn mul(&self, a: Self::Elem, b: Self::Elem) -> Self::Elem;
    fn inv(&self, a: Self::Elem) -> Option<Self::Elem>;

    fn is_zero(&self, a: Self::Elem) -> bool {
        a == self.zero()
    }

    fn neg(&self, a: Self::Elem) -> Self::Elem {
        self.sub(self.zero(), a)
    }
}

/// The prime field GF(q); elements are integers in `[0, q)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Fq {
    q: u32,
}

/// Largest supported base field; keeps every product of two digits in a `u32`.
pub const MAX_BASE_ORDER: u32 = 65_521;

impl Fq {
    pub fn new(q: u32) -> Result<Self> {
        if q > MAX_BASE_ORDER || !poly::is_prime(q) {
            return Err(Error::InvalidBaseField(q));
        }
        Ok(Self { q })
    }

    pub fn order(&self) -> u32 {
        self.q
    }

    pub fn random<R: Rng + ?Sized>(&self, rng: &mut R) -> u32 {
        rng.gen_range(0..self.q)
    }
}

impl FieldOps for Fq {
    type Elem = u32;

    fn zero(&self) -> u32 {
        0
    }
    fn one(&self) -> u32 {
        1
    }
    fn add(&self, a: u32, b: u32) -> u32 {
        (a + b) % self.q
    }
    fn sub(&self, a: u32, b: u32) -> u32 {
        (a + self.q - b) % self.q
    }
    fn mul(&self, a: u32, b: u32) -> u32 {
        a * b % self.q
    }
    fn inv(&self, a: u32) -> Option<u32> {
        (a != 0).then(|| poly::inv_mod(a, self.q))
    }
}

/// An element of GF(q^n) in canonical integer encoding.
#[derive(
    Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct Fqn(u64);

impl Fqn {
    pub const ZERO: Fqn = Fqn(0);
    pub const ONE: Fqn = Fqn(1);

    /// Wraps a canonical integer without range checking; see
    /// [`FieldTower::element`] for the checked constructor.
    pub const fn from_raw(v: u64) -> Self {
        Fqn(v)
    }

    pub const fn to_int(self) -> u64 {
        self.0
    }

    pub const fn is_zero(self) -> bool {
        self.0 == 0
    }
}

impl fmt::Display for Fqn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Default moduli for binary extensions: low-weight primitive polynomials,
/// given by the exponents of their nonzero terms.
const BINARY_MODULI: &[&[usize]] = &[
    &[0, 1],
    &[0, 1, 2],
    &[0, 1, 3],
    &[0, 1, 4],
    &[0, 2, 5],
    &[0, 1, 6],
    &[0, 1, 7],
    &[0, 2, 3, 4, 8],
    &[0, 4, 9],
    &[0, 3, 10],
    &[0, 2, 11],
    &[0, 1, 4, 6, 12],
    &[0, 1, 3, 4, 13],
    &[0, 1, 6, 10, 14],
    &[0, 1, 15],
    &[0, 1, 3, 12, 16],
];

/// The pair GF(q) ⊂ GF(q^n).
#[derive(Clone, Debug)]
pub struct FieldTower {
    base: Fq,
    n: usize,
    modulus: Vec<u32>,
    /// Modulus as a bit mask, binary towers only.
    modulus_bits: u128,
    /// `frob[r][j]` = α^{j q^r}.
    frob: Vec<Vec<Fqn>>,
    /// For odd q: column j of `frob_digits[r]` holds the digits of α^{j q^r}.
    frob_digits: Vec<Matrix<u32>>,
    basis: Vec<Fqn>,
    /// Maps polynomial-basis digits to coordinates over `basis`; `None`
    /// when `basis` is the polynomial basis.
    coords: Option<Matrix<u32>>,
}

impl FieldTower {
    /// Builds GF(q^n) from a monic modulus given low-to-high.
    pub fn new(q: u32, n: usize, modulus: &[u32]) -> Result<Self> {
        let base = Fq::new(q)?;
        // Canonical integers must fit in a u64: q^n <= 2^64.
        if n == 0 || n > 64 || (q as u128).pow(n as u32) > 1u128 << 64 {
            return Err(Error::InvalidDegree(n));
        }
        if modulus.len() != n + 1
            || modulus[n] != 1
            || modulus.iter().any(|&c| c >= q)
            || !poly::is_irreducible(modulus, q)
        {
            return Err(Error::ReducibleModulus { degree: n });
        }
        let modulus_bits = if q == 2 {
            modulus
                .iter()
                .enumerate()
                .fold(0u128, |acc, (i, &c)| acc | ((c as u128) << i))
        } else {
            0
        };
        let mut tower = Self {
            base,
            n,
            modulus: modulus.to_vec(),
            modulus_bits,
            frob: Vec::new(),
            frob_digits: Vec::new(),
            basis: Vec::new(),
            coords: None,
        };
        tower.basis = (0..n).map(|j| tower.alpha_pow_unit(j)).collect();
        tower.build_frobenius_tables();
        Ok(tower)
    }

    /// Builds GF(q^n) with the crate's default modulus: a fixed table for
    /// binary towers up to degree 16, otherwise the smallest irreducible
    /// monic polynomial in canonical order.
    pub fn with_default_modulus(q: u32, n: usize) -> Result<Self> {
        Fq::new(q)?;
        if n == 0 {
            return Err(Error::InvalidDegree(n));
        }
        let modulus = default_modulus(q, n);
        Self::new(q, n, &modulus)
    }

    /// Replaces the coordinate basis used by [`expand`](Self::expand) and
    /// [`contract`](Self::contract).
    pub fn with_basis(mut self, basis: Vec<Fqn>) -> Result<Self> {
        if basis.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: basis.len(),
            });
        }
        for &b in &basis {
            self.check(b)?;
        }
        let mut cols = Matrix::zeros(self.n, self.n);
        for (j, &b) in basis.iter().enumerate() {
            for (i, d) in self.digits(b).into_iter().enumerate() {
                cols[(i, j)] = d;
            }
        }
        let inverse = cols
            .inverse(&self.base)
            .ok_or_else(|| Error::RankDeficient {
                rank: cols.rank(&self.base),
                expected: self.n,
            })?;
        self.basis = basis;
        self.coords = Some(inverse);
        Ok(self)
    }

    fn alpha_pow_unit(&self, j: usize) -> Fqn {
        Fqn((self.base.q as u64).pow(j as u32))
    }

    fn build_frobenius_tables(&mut self) {
        let n = self.n;
        let mut frob = vec![(0..n).map(|j| self.alpha_pow_unit(j)).collect::<Vec<_>>()];
        for r in 1..n {
            let row = frob[r - 1]
                .iter()
                .map(|&x| self.pow_raw(x, self.base.q as u128))
                .collect();
            frob.push(row);
        }
        if self.base.q != 2 {
            self.frob_digits = frob
                .iter()
                .map(|row| {
                    let mut m = Matrix::zeros(n, n);
                    for (j, &x) in row.iter().enumerate() {
                        for (i, d) in self.digits(x).into_iter().enumerate() {
                            m[(i, j)] = d;
                        }
                    }
                    m
                })
                .collect();
        }
        self.frob = frob;
    }

    pub fn q(&self) -> u32 {
        self.base.q
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn base(&self) -> &Fq {
        &self.base
    }

    /// Modulus coefficients, low-to-high, monic.
    pub fn modulus(&self) -> &[u32] {
        &self.modulus
    }

    pub fn basis(&self) -> &[Fqn] {
        &self.basis
    }

    /// q^n.
    pub fn order(&self) -> u128 {
        (self.base.q as u128).pow(self.n as u32)
    }

    /// The class of x modulo the modulus.
    pub fn alpha(&self) -> Fqn {
        if self.n == 1 {
            // x = -modulus[0] in GF(q)
            Fqn(self.base.neg(self.modulus[0]) as u64)
        } else {
            Fqn(self.base.q as u64)
        }
    }

    /// Embeds a GF(q) scalar.
    pub fn from_base(&self, c: u32) -> Fqn {
        Fqn((c % self.base.q) as u64)
    }

    /// Checked constructor from a canonical integer.
    pub fn element(&self, v: u64) -> Result<Fqn> {
        self.check(Fqn(v))
    }

    fn check(&self, x: Fqn) -> Result<Fqn> {
        if (x.0 as u128) < self.order() {
            Ok(x)
        } else {
            Err(Error::ElementOutOfRange(x.0))
        }
    }

    /// Coordinates over the polynomial basis, length n.
    pub fn digits(&self, x: Fqn) -> Vec<u32> {
        if self.base.q == 2 {
            return (0..self.n).map(|i| ((x.0 >> i) & 1) as u32).collect();
        }
        let q = self.base.q as u64;
        let mut v = x.0;
        (0..self.n)
            .map(|_| {
                let d = (v % q) as u32;
                v /= q;
                d
            })
            .collect()
    }

    pub fn from_digits(&self, digits: &[u32]) -> Fqn {
        debug_assert!(digits.len() <= self.n);
        if self.base.q == 2 {
            return Fqn(digits
                .iter()
                .enumerate()
                .fold(0u64, |acc, (i, &d)| acc | (((d & 1) as u64) << i)));
        }
        let q = self.base.q as u64;
        Fqn(digits
            .iter()
            .rev()
            .fold(0u64, |acc, &d| acc * q + (d as u64 % q)))
    }

    /// Coordinates of `x` over the tower basis.
    pub fn expand(&self, x: Fqn) -> Vec<u32> {
        let d = self.digits(x);
        match &self.coords {
            None => d,
            Some(m) => m.mul_vec(&self.base, &d),
        }
    }

    /// Inverse of [`expand`](Self::expand).
    pub fn contract(&self, column: &[u32]) -> Fqn {
        assert_eq!(column.len(), self.n, "column length must equal n");
        if self.coords.is_none() {
            return self.from_digits(column);
        }
        column
            .iter()
            .zip(&self.basis)
            .fold(Fqn::ZERO, |acc, (&c, &b)| self.add(acc, self.scale(c, b)))
    }

    /// Multiplication by a GF(q) scalar (not counted as a field multiplication).
    pub fn scale(&self, c: u32, x: Fqn) -> Fqn {
        let c = c % self.base.q;
        if self.base.q == 2 {
            return if c == 0 { Fqn::ZERO } else { x };
        }
        let d: Vec<u32> = self
            .digits(x)
            .into_iter()
            .map(|v| self.base.mul(v, c))
            .collect();
        self.from_digits(&d)
    }

    /// x^{[i]}: x^{q^i} for i >= 0 and x^{q^{n+i}} for i < 0; only i mod n matters.
    pub fn frobenius_power(&self, x: Fqn, i: i64) -> Fqn {
        let r = i.rem_euclid(self.n as i64) as usize;
        if r == 0 || x.is_zero() {
            return x;
        }
        if self.base.q == 2 {
            let row = &self.frob[r];
            let mut bits = x.0;
            let mut acc = 0u64;
            while bits != 0 {
                let j = bits.trailing_zeros() as usize;
                acc ^= row[j].0;
                bits &= bits - 1;
            }
            return Fqn(acc);
        }
        let d = self.frob_digits[r].mul_vec(&self.base, &self.digits(x));
        self.from_digits(&d)
    }

    pub fn pow(&self, x: Fqn, mut e: u128) -> Fqn {
        let mut acc = Fqn::ONE;
        let mut b = x;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, b);
            }
            e >>= 1;
            if e > 0 {
                b = self.mul(b, b);
            }
        }
        acc
    }

    fn pow_raw(&self, x: Fqn, mut e: u128) -> Fqn {
        let mut acc = Fqn::ONE;
        let mut b = x;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul_raw(acc, b);
            }
            b = self.mul_raw(b, b);
            e >>= 1;
        }
        acc
    }

    fn mul_raw(&self, a: Fqn, b: Fqn) -> Fqn {
        if a.is_zero() || b.is_zero() {
            return Fqn::ZERO;
        }
        if self.base.q == 2 {
            return Fqn(self.mul_binary(a.0, b.0));
        }
        let q = self.base.q;
        let p = poly::mulmod(&self.digits(a), &self.digits(b), &self.modulus, q);
        self.from_digits(&p)
    }

    fn mul_binary(&self, a: u64, b: u64) -> u64 {
        let mut prod: u128 = 0;
        let mut aa = a as u128;
        let mut bb = b;
        while bb != 0 {
            if bb & 1 == 1 {
                prod ^= aa;
            }
            aa <<= 1;
            bb >>= 1;
        }
        let n = self.n;
        if n > 1 {
            for i in (n..=2 * n - 2).rev() {
                if (prod >> i) & 1 == 1 {
                    prod ^= self.modulus_bits << (i - n);
                }
            }
        } else if prod > 1 {
            unreachable!("GF(2) products stay in {{0, 1}}");
        }
        prod as u64
    }

    /// Uniform random element.
    pub fn random<R: Rng + ?Sized>(&self, rng: &mut R) -> Fqn {
        let order = self.order();
        if order > u64::MAX as u128 {
            Fqn(rng.gen())
        } else {
            Fqn(rng.gen_range(0..order as u64))
        }
    }

    /// All elements in canonical order; meant for small fields.
    pub fn elements(&self) -> impl Iterator<Item = Fqn> {
        let order = self.order();
        assert!(order <= 1 << 32, "field too large to enumerate");
        (0..order as u64).map(Fqn)
    }

    /// Whether x lies in the subfield GF(q^s) (requires s | n).
    pub fn in_subfield(&self, x: Fqn, s: usize) -> bool {
        self.frobenius_power(x, s as i64) == x
    }
}

impl FieldOps for FieldTower {
    type Elem = Fqn;

    fn zero(&self) -> Fqn {
        Fqn::ZERO
    }

    fn one(&self) -> Fqn {
        Fqn::ONE
    }

    fn add(&self, a: Fqn, b: Fqn) -> Fqn {
        if self.base.q == 2 {
            return Fqn(a.0 ^ b.0);
        }
        let q = self.base.q;
        let d: Vec<u32> = self
            .digits(a)
            .into_iter()
            .zip(self.digits(b))
            .map(|(x, y)| (x + y) % q)
            .collect();
        self.from_digits(&d)
    }

    fn sub(&self, a: Fqn, b: Fqn) -> Fqn {
        if self.base.q == 2 {
            return Fqn(a.0 ^ b.0);
        }
        let q = self.base.q;
        let d: Vec<u32> = self
            .digits(a)
            .into_iter()
            .zip(self.digits(b))
            .map(|(x, y)| (x + q - y) % q)
            .collect();
        self.from_digits(&d)
    }

    fn mul(&self, a: Fqn, b: Fqn) -> Fqn {
        MUL_COUNT.with(|c| c.set(c.get() + 1));
        self.mul_raw(a, b)
    }

    /// Extended Euclid against the modulus.
    fn inv(&self, a: Fqn) -> Option<Fqn> {
        if a.is_zero() {
            return None;
        }
        let inv = poly::inverse_mod(&self.digits(a), &self.modulus, self.base.q)?;
        Some(self.from_digits(&inv))
    }
}

fn default_modulus(q: u32, n: usize) -> Vec<u32> {
    if q == 2 && n <= BINARY_MODULI.len() {
        let mut m = vec![0u32; n + 1];
        for &e in BINARY_MODULI[n - 1] {
            m[e] = 1;
        }
        return m;
    }
    // Smallest monic irreducible: enumerate the lower coefficients as a
    // base-q counter, constant term first.
    let mut lower = vec![0u32; n];
    loop {
        let mut m = lower.clone();
        m.push(1);
        if poly::is_irreducible(&m, q) {
            return m;
        }
        for c in lower.iter_mut() {
            *c += 1;
            if *c < q {
                break;
            }
            *c = 0;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn gf16() -> FieldTower {
        FieldTower::new(2, 4, &[1, 1, 0, 0, 1]).unwrap()
    }

    #[test]
    fn default_binary_moduli_are_irreducible() {
        for n in 1..=BINARY_MODULI.len() {
            FieldTower::with_default_modulus(2, n).unwrap();
        }
    }

    #[test]
    fn default_search_for_odd_q() {
        let t = FieldTower::with_default_modulus(3, 5).unwrap();
        assert_eq!(t.order(), 243);
        FieldTower::with_default_modulus(31, 3).unwrap();
    }

    #[test]
    fn rejects_bad_towers() {
        assert_eq!(
            FieldTower::new(4, 2, &[1, 1, 1]).unwrap_err(),
            Error::InvalidBaseField(4)
        );
        assert!(matches!(
            FieldTower::new(2, 4, &[1, 0, 0, 0, 1]),
            Err(Error::ReducibleModulus { .. })
        ));
        assert!(matches!(
            FieldTower::with_default_modulus(3, 41),
            Err(Error::InvalidDegree(41))
        ));
    }

    #[test]
    fn frobenius_examples() {
        let f = gf16();
        let a = f.alpha();
        assert_eq!(f.frobenius_power(a, 4), a);
        let x = Fqn::from_raw(11);
        assert_eq!(f.frobenius_power(x, 0), x);
        // α^8 = α^2 + 1 under x^4 + x + 1.
        assert_eq!(f.frobenius_power(a, -1), f.pow(a, 8));
        assert_eq!(f.frobenius_power(a, -1), Fqn::from_raw(0b0101));
    }

    #[test]
    fn expand_examples() {
        let f = gf16();
        let a = f.alpha();
        assert_eq!(f.expand(Fqn::ZERO), vec![0, 0, 0, 0]);
        assert_eq!(f.expand(f.pow(a, 2)), vec![0, 0, 1, 0]);
        assert_eq!(f.expand(f.pow(a, 4)), vec![1, 1, 0, 0]);
    }

    #[test]
    fn custom_basis_round_trip() {
        let f = gf16();
        let a = f.alpha();
        let a2 = f.pow(a, 2);
        let skew = vec![Fqn::ONE, f.add(Fqn::ONE, a), f.add(a, a2), f.pow(a, 3)];
        let g = f.clone().with_basis(skew).unwrap();
        assert_eq!(g.expand(f.add(Fqn::ONE, a)), vec![0, 1, 0, 0]);
        for x in g.elements() {
            assert_eq!(g.contract(&g.expand(x)), x);
        }
        let dup = vec![Fqn::ONE, Fqn::ONE, a, a2];
        assert!(matches!(
            f.with_basis(dup),
            Err(Error::RankDeficient {
                rank: 3,
                expected: 4
            })
        ));
    }

    #[test]
    fn field_axioms_sampled() {
        for (q, n) in [(2u32, 8usize), (3, 4), (5, 3)] {
            let f = FieldTower::with_default_modulus(q, n).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(7);
            for _ in 0..10_000 {
                let (a, b, c) = (f.random(&mut rng), f.random(&mut rng), f.random(&mut rng));
                assert_eq!(f.mul(f.mul(a, b), c), f.mul(a, f.mul(b, c)));
                assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
                assert_eq!(f.add(f.sub(a, b), b), a);
                if !a.is_zero() {
                    assert_eq!(f.mul(a, f.inv(a).unwrap()), Fqn::ONE);
                }
            }
        }
    }

    #[test]
    fn frobenius_is_additive_and_composes() {
        let f = FieldTower::with_default_modulus(3, 5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..2_000 {
            let (x, y) = (f.random(&mut rng), f.random(&mut rng));
            let i = rng.gen_range(-12i64..12);
            let j = rng.gen_range(-12i64..12);
            assert_eq!(
                f.frobenius_power(f.add(x, y), i),
                f.add(f.frobenius_power(x, i), f.frobenius_power(y, i))
            );
            assert_eq!(
                f.frobenius_power(f.frobenius_power(x, i), j),
                f.frobenius_power(x, i + j)
            );
            let e = 3u128.pow(i.rem_euclid(5) as u32);
            assert_eq!(f.frobenius_power(x, i), f.pow(x, e));
        }
    }

    #[test]
    fn base_field_is_fixed() {
        let f = FieldTower::with_default_modulus(5, 3).unwrap();
        for c in 0..5 {
            assert_eq!(f.frobenius_power(f.from_base(c), 1), f.from_base(c));
        }
    }

    #[test]
    fn sixty_four_bit_binary_field() {
        // x^64 + x^4 + x^3 + x + 1
        let mut m = vec![0u32; 65];
        for e in [0, 1, 3, 4, 64] {
            m[e] = 1;
        }
        let f = FieldTower::new(2, 64, &m).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..200 {
            let a = f.random(&mut rng);
            if let Some(inv) = f.inv(a) {
                assert_eq!(f.mul(a, inv), Fqn::ONE);
            }
            assert_eq!(f.frobenius_power(a, 64), a);
            assert_eq!(f.frobenius_power(a, 1), f.mul(a, a));
        }
    }

    #[test]
    fn mul_counter_counts() {
        let f = gf16();
        reset_mul_count();
        let _ = f.mul(f.alpha(), f.alpha());
        let _ = f.frobenius_power(f.alpha(), 2);
        assert_eq!(mul_count(), 1);
    }
}
