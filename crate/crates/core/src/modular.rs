//! Exact stationary vectors by multi-modular state reduction.
//!
//! Rational state reduction is dominated by gcd work on ever-growing
//! entries. Instead the off-diagonal block is scaled to integers, reduced
//! modulo a sequence of 62-bit primes, solved mod each prime with the same
//! state-reduction recurrence, and lifted back by CRT. Every entry of the
//! unnormalised solution (`pi_0 = 1`) is a ratio of cofactors sharing the
//! denominator `C_0`, so after one full rational reconstruction the rest
//! usually fall out with a single modular multiplication. The candidate is
//! accepted only after an exact `pi P = pi` check in rationals.

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::chain::SparseMatrix;
use crate::error::{Error, Result};

const MAX_PRIMES: usize = 4096;

fn mul_mod(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

fn pow_mod(mut a: u64, mut e: u64, p: u64) -> u64 {
    let mut r = 1u64;
    while e > 0 {
        if e & 1 == 1 {
            r = mul_mod(r, a, p);
        }
        a = mul_mod(a, a, p);
        e >>= 1;
    }
    r
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    const BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    for b in BASES {
        if n % b == 0 {
            return n == b;
        }
    }
    let (mut d, mut s) = (n - 1, 0);
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'witness: for a in BASES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Primes below 2^62, descending.
fn primes() -> impl Iterator<Item = u64> {
    let mut c = (1u64 << 62) - 1;
    std::iter::from_fn(move || {
        while !is_prime(c) {
            c -= 2;
        }
        let p = c;
        c -= 2;
        Some(p)
    })
}

/// State reduction mod `p` on the dense `k x k` off-diagonal block.
/// Returns `None` when a pivot vanishes mod `p`.
fn gth_mod(block: &[u64], k: usize, p: u64, a: &mut Vec<u64>) -> Option<Vec<u64>> {
    a.clear();
    a.extend_from_slice(block);
    let mut row = Vec::with_capacity(k);
    let mut col = Vec::with_capacity(k);
    for l in (1..k).rev() {
        row.clear();
        col.clear();
        let mut s = 0u64;
        for j in 0..l {
            let v = a[l * k + j];
            if v != 0 {
                s = (s + v) % p;
                row.push(j);
            }
            if a[j * k + l] != 0 {
                col.push(j);
            }
        }
        if s == 0 {
            return None;
        }
        let inv = pow_mod(s, p - 2, p);
        for &i in &col {
            let scaled = mul_mod(a[i * k + l], inv, p);
            if scaled == 0 {
                a[i * k + l] = 0;
                continue;
            }
            for &j in &row {
                if i != j {
                    let idx = i * k + j;
                    a[idx] = (a[idx] + mul_mod(scaled, a[l * k + j], p)) % p;
                }
            }
            a[i * k + l] = scaled;
        }
    }
    let mut pi = vec![0u64; k];
    pi[0] = 1;
    for l in 1..k {
        let mut acc = 0u64;
        for i in 0..l {
            let v = a[i * k + l];
            if v != 0 {
                acc = (acc + mul_mod(pi[i], v, p)) % p;
            }
        }
        pi[l] = acc;
    }
    Some(pi)
}

/// `u/v` with `u = v r (mod m)`, `|u|, |v| <= sqrt(m/2)`.
fn rational_reconstruct(r: &BigUint, m: &BigUint) -> Option<(BigInt, BigInt)> {
    let bound = (m >> 1u32).sqrt();
    let mut r0 = BigInt::from_biguint(Sign::Plus, m.clone());
    let mut r1 = BigInt::from_biguint(Sign::Plus, r.clone());
    let mut t0 = BigInt::zero();
    let mut t1 = BigInt::one();
    let bound = BigInt::from_biguint(Sign::Plus, bound);
    while r1 > bound {
        let (q, rem) = r0.div_rem(&r1);
        r0 = std::mem::replace(&mut r1, rem);
        let t2 = &t0 - &q * &t1;
        t0 = std::mem::replace(&mut t1, t2);
    }
    if t1.is_zero() || t1.magnitude() > bound.magnitude() {
        return None;
    }
    if !r1.gcd(&t1).is_one() {
        return None;
    }
    if t1.sign() == Sign::Minus {
        Some((-r1, -t1))
    } else {
        Some((r1, t1))
    }
}

/// Symmetric residue of `x mod m` if it is at most `bound` in magnitude.
fn small_residue(x: &BigUint, m: &BigUint, bound: &BigUint) -> Option<BigInt> {
    if x <= bound {
        Some(BigInt::from_biguint(Sign::Plus, x.clone()))
    } else {
        let neg = m - x;
        (&neg <= bound).then(|| -BigInt::from_biguint(Sign::Plus, neg))
    }
}

fn reconstruct_all(res: &[BigUint], m: &BigUint) -> Option<Vec<BigRational>> {
    let bound = (m >> 1u32).sqrt();
    let mut den = BigUint::one();
    let mut out = Vec::with_capacity(res.len());
    for r in res {
        let scaled = (r * &den) % m;
        if let Some(num) = small_residue(&scaled, m, &bound) {
            out.push(BigRational::new(num, BigInt::from_biguint(Sign::Plus, den.clone())));
            continue;
        }
        let (u, v) = rational_reconstruct(&scaled, m)?;
        let v_abs = v.magnitude().clone();
        den *= &v_abs;
        if den > bound {
            return None;
        }
        out.push(BigRational::new(u, BigInt::from_biguint(Sign::Plus, den.clone())));
    }
    Some(out)
}

fn verify(block: &[BigUint], k: usize, pi: &[BigRational]) -> bool {
    // Balance of flow at every state: inflow == outflow, using the
    // off-diagonal block only (the diagonal cancels).
    let to_rat = |x: &BigUint| BigRational::from_integer(BigInt::from_biguint(Sign::Plus, x.clone()));
    let mut inflow = vec![BigRational::zero(); k];
    let mut outrate = vec![BigRational::zero(); k];
    for i in 0..k {
        if pi[i].is_zero() {
            continue;
        }
        for j in 0..k {
            let v = &block[i * k + j];
            if !v.is_zero() {
                let r = to_rat(v);
                outrate[i] += &r;
                inflow[j] += &pi[i] * r;
            }
        }
    }
    (0..k).all(|j| inflow[j] == &pi[j] * &outrate[j])
}

/// Normalised stationary vector restricted to `states`, which must form the
/// unique closed class of `m` (listed in elimination order).
pub(crate) fn stationary_exact(m: &SparseMatrix<BigRational>, states: &[usize]) -> Result<Vec<BigRational>> {
    let k = states.len();
    if k == 0 {
        return Ok(Vec::new());
    }
    if k == 1 {
        return Ok(vec![BigRational::one()]);
    }
    let mut pos = vec![usize::MAX; m.dim()];
    for (a, &s) in states.iter().enumerate() {
        pos[s] = a;
    }
    let mut lcm = BigInt::one();
    for &s in states {
        for (j, v) in &m.rows[s] {
            if pos[*j] != usize::MAX && *j != s && !v.is_zero() {
                lcm = lcm.lcm(v.denom());
            }
        }
    }
    let mut block = vec![BigUint::zero(); k * k];
    for (li, &s) in states.iter().enumerate() {
        for (j, v) in &m.rows[s] {
            let lj = pos[*j];
            if lj != usize::MAX && lj != li && !v.is_zero() {
                let scaled = v * BigRational::from_integer(lcm.clone());
                block[li * k + lj] += scaled.to_integer().magnitude();
            }
        }
    }

    let mut modulus = BigUint::one();
    let mut residues = vec![BigUint::zero(); k];
    let mut work = Vec::with_capacity(k * k);
    let mut used = 0usize;
    let mut next_check = 2usize;
    for p in primes().take(MAX_PRIMES) {
        let reduced: Vec<u64> = block
            .iter()
            .map(|x| if x.is_zero() { 0 } else { (x % p).to_u64().unwrap_or(0) })
            .collect();
        let Some(pi_p) = gth_mod(&reduced, k, p, &mut work) else {
            continue;
        };
        let m_mod_p = (&modulus % p).to_u64().unwrap_or(0);
        let inv = pow_mod(m_mod_p, p - 2, p);
        for (r, a) in residues.iter_mut().zip(&pi_p) {
            let r_mod = (&*r % p).to_u64().unwrap_or(0);
            let t = mul_mod((a + p - r_mod) % p, inv, p);
            if t != 0 {
                *r += &modulus * t;
            }
        }
        modulus *= p;
        used += 1;
        if used < next_check {
            continue;
        }
        next_check = used + used.div_ceil(2);
        let Some(candidate) = reconstruct_all(&residues, &modulus) else {
            continue;
        };
        if verify(&block, k, &candidate) {
            let total = candidate.iter().fold(BigRational::zero(), |a, b| a + b);
            return Ok(candidate.into_iter().map(|x| x / &total).collect());
        }
    }
    Err(Error::Singular)
}
