//! Dense polynomials over a prime field GF(q), coefficients stored low-to-high.
//!
//! Only what the extension-field layer needs: reduction, gcd, the extended
//! Euclidean algorithm, and modular exponentiation by powers of q.

pub(crate) type Poly = Vec<u32>;

#[inline]
pub(crate) fn inv_mod(a: u32, q: u32) -> u32 {
    debug_assert!(!a.is_multiple_of(q));
    pow_mod(a, q - 2, q)
}

#[inline]
pub(crate) fn pow_mod(base: u32, mut exp: u32, q: u32) -> u32 {
    let q64 = q as u64;
    let mut acc = 1u64;
    let mut b = base as u64 % q64;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * b % q64;
        }
        b = b * b % q64;
        exp >>= 1;
    }
    acc as u32
}

pub(crate) fn trim(p: &mut Poly) {
    while p.last() == Some(&0) {
        p.pop();
    }
}

pub(crate) fn degree(p: &[u32]) -> Option<usize> {
    p.iter().rposition(|&c| c != 0)
}

pub(crate) fn sub(a: &[u32], b: &[u32], q: u32) -> Poly {
    let len = a.len().max(b.len());
    let mut out: Poly = (0..len)
        .map(|i| {
            let x = a.get(i).copied().unwrap_or(0);
            let y = b.get(i).copied().unwrap_or(0);
            (x + q - y) % q
        })
        .collect();
    trim(&mut out);
    out
}

pub(crate) fn mul(a: &[u32], b: &[u32], q: u32) -> Poly {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let q64 = q as u64;
    let mut out = vec![0u64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            out[i + j] = (out[i + j] + x as u64 * y as u64) % q64;
        }
    }
    let mut out: Poly = out.into_iter().map(|c| c as u32).collect();
    trim(&mut out);
    out
}

/// Quotient and remainder of `a` by a nonzero `b`.
pub(crate) fn divrem(a: &[u32], b: &[u32], q: u32) -> (Poly, Poly) {
    let db = degree(b).expect("division by the zero polynomial");
    let lead_inv = inv_mod(b[db], q) as u64;
    let q64 = q as u64;
    let mut rem: Poly = a.to_vec();
    trim(&mut rem);
    let mut quot = vec![0u32; rem.len().saturating_sub(db).max(1)];
    while let Some(dr) = degree(&rem) {
        if dr < db {
            break;
        }
        let coef = (rem[dr] as u64 * lead_inv % q64) as u32;
        let shift = dr - db;
        quot[shift] = coef;
        for (i, &bc) in b[..=db].iter().enumerate() {
            let t = (coef as u64 * bc as u64 % q64) as u32;
            rem[i + shift] = (rem[i + shift] + q - t) % q;
        }
        trim(&mut rem);
    }
    trim(&mut quot);
    (quot, rem)
}

pub(crate) fn rem(a: &[u32], b: &[u32], q: u32) -> Poly {
    divrem(a, b, q).1
}

pub(crate) fn mulmod(a: &[u32], b: &[u32], m: &[u32], q: u32) -> Poly {
    rem(&mul(a, b, q), m, q)
}

pub(crate) fn monic_gcd(a: &[u32], b: &[u32], q: u32) -> Poly {
    let mut x: Poly = a.to_vec();
    let mut y: Poly = b.to_vec();
    trim(&mut x);
    trim(&mut y);
    while !y.is_empty() {
        let r = rem(&x, &y, q);
        x = y;
        y = r;
    }
    if let Some(d) = degree(&x) {
        let inv = inv_mod(x[d], q) as u64;
        for c in x.iter_mut() {
            *c = (*c as u64 * inv % q as u64) as u32;
        }
    }
    x
}

/// Inverse of `a` modulo `m`, or `None` when they share a factor.
pub(crate) fn inverse_mod(a: &[u32], m: &[u32], q: u32) -> Option<Poly> {
    // Invariant: old_s * a == old_r (mod m).
    let mut old_r: Poly = a.to_vec();
    trim(&mut old_r);
    let mut r: Poly = m.to_vec();
    let mut old_s: Poly = vec![1];
    let mut s: Poly = Vec::new();
    while !r.is_empty() {
        let (quot, rr) = divrem(&old_r, &r, q);
        let ns = sub(&old_s, &mul(&quot, &s, q), q);
        old_r = std::mem::replace(&mut r, rr);
        old_s = std::mem::replace(&mut s, ns);
    }
    if degree(&old_r) != Some(0) {
        return None;
    }
    let c = inv_mod(old_r[0], q) as u64;
    let mut out: Poly = old_s
        .iter()
        .map(|&x| (x as u64 * c % q as u64) as u32)
        .collect();
    out = rem(&out, m, q);
    Some(out)
}

/// `x^(q^k) mod m`, by k successive q-th powers.
pub(crate) fn x_pow_q_pow(k: usize, m: &[u32], q: u32) -> Poly {
    let mut acc: Poly = rem(&[0, 1], m, q);
    for _ in 0..k {
        acc = pow_poly(&acc, q as u64, m, q);
    }
    acc
}

fn pow_poly(base: &[u32], mut exp: u64, m: &[u32], q: u32) -> Poly {
    let mut acc: Poly = vec![1];
    let mut b: Poly = base.to_vec();
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mulmod(&acc, &b, m, q);
        }
        b = mulmod(&b, &b, m, q);
        exp >>= 1;
    }
    acc
}

fn prime_factors(mut n: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= n {
        if n.is_multiple_of(p) {
            out.push(p);
            while n.is_multiple_of(p) {
                n /= p;
            }
        }
        p += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// Rabin's test: `m` is irreducible of degree n iff x^(q^n) = x mod m and
/// gcd(x^(q^(n/p)) - x, m) = 1 for every prime p dividing n.
pub(crate) fn is_irreducible(m: &[u32], q: u32) -> bool {
    let Some(n) = degree(m) else { return false };
    if n == 0 {
        return false;
    }
    let x: Poly = rem(&[0, 1], m, q);
    if sub(&x_pow_q_pow(n, m, q), &x, q) != Vec::<u32>::new() {
        return false;
    }
    prime_factors(n).into_iter().all(|p| {
        let diff = sub(&x_pow_q_pow(n / p, m, q), &x, q);
        degree(&monic_gcd(&diff, m, q)) == Some(0)
    })
}

pub(crate) fn is_prime(q: u32) -> bool {
    q >= 2
        && (2..)
            .take_while(|p: &u32| p * p <= q)
            .all(|p| !q.is_multiple_of(p))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn irreducibility_small_binary() {
        assert!(is_irreducible(&[1, 1, 0, 0, 1], 2)); // x^4 + x + 1
        assert!(!is_irreducible(&[1, 0, 0, 0, 1], 2)); // (x + 1)^4
                                                       // Product of the two binary cubics: x^(2^6) = x holds, only the gcd step rejects it.
        let prod = mul(&[1, 1, 0, 1], &[1, 0, 1, 1], 2);
        assert_eq!(
            sub(&x_pow_q_pow(6, &prod, 2), &[0, 1], 2),
            Vec::<u32>::new()
        );
        assert!(!is_irreducible(&prod, 2));
    }

    #[test]
    fn inverse_round_trip() {
        let m = [1, 1, 0, 0, 1];
        for a in 1u32..16 {
            let p: Poly = (0..4).map(|i| (a >> i) & 1).collect();
            let inv = inverse_mod(&p, &m, 2).unwrap();
            assert_eq!(mulmod(&p, &inv, &m, 2), vec![1]);
        }
    }

    #[test]
    fn ternary_irreducible() {
        assert!(is_irreducible(&[2, 1, 1], 3)); // x^2 + x + 2
        assert!(!is_irreducible(&[1, 0, 1], 5)); // x^2 + 1 = (x + 2)(x + 3) over GF(5)
    }
}
