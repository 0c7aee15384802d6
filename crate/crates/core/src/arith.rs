//! Exact integer and rational number theory: divisor sums, the quadratic
//! character mod 3, Bernoulli numbers, p-adic valuations, and the
//! Euler–Fermat congruences used by the vanishing arguments.

use std::sync::Mutex;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

/// Coefficient domain for every q-expansion in this crate: an
/// arbitrary-precision rational, always in lowest terms with positive
/// denominator.
pub type Rational = num_rational::BigRational;

/// Shorthand for a rational from machine integers.
pub fn rat(numer: i64, denom: i64) -> Rational {
    Rational::new(BigInt::from(numer), BigInt::from(denom))
}

/// Shorthand for an integer rational.
pub fn rat_int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ArithError {
    #[error("sigma requires n >= 1, got 0")]
    SigmaZero,
    #[error("j_{{2k}} requires a positive even index, got {0}")]
    BadBernoulliIndex(i64),
    #[error("p-adic valuation of zero is undefined")]
    ZeroValuation,
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("lemma 2 part (i) requires n >= 1")]
    BadExponent,
    #[error("lemma 2 part (ii) requires odd d, got {0}")]
    EvenBase(i64),
}

/// Divisor power sum `σ_k(n) = Σ_{d|n} d^k`.
pub fn sigma(n: u64, k: u32) -> Result<BigInt, ArithError> {
    if n == 0 {
        return Err(ArithError::SigmaZero);
    }
    let mut total = BigInt::zero();
    let mut d = 1u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            total += BigInt::from(d).pow(k);
            let e = n / d;
            if e != d {
                total += BigInt::from(e).pow(k);
            }
        }
        d += 1;
    }
    Ok(total)
}

/// Quadratic character mod 3 (the Legendre symbol `(d/3)`): 0 on multiples
/// of 3, +1 on d ≡ 1, −1 on d ≡ 2.
pub fn chi3(d: i64) -> i64 {
    match d.rem_euclid(3) {
        0 => 0,
        1 => 1,
        _ => -1,
    }
}

// Bernoulli numbers are consumed repeatedly by the Eisenstein constructors,
// so the recurrence values are kept in a process-wide table. The lock
// serializes writes; values are cloned out.
static BERNOULLI_MEMO: Mutex<Vec<Option<Rational>>> = Mutex::new(Vec::new());

/// Bernoulli number `B_n` in the convention with `B_1 = −1/2`, computed by
/// the recurrence `Σ_{j=0}^{n} C(n+1, j) B_j = 0`.
///
/// Only even indices are consumed by the modular-form formulas downstream,
/// so the sign convention at `B_1` has no effect on anything but `B_1`
/// itself.
pub fn bernoulli(n: usize) -> Rational {
    let mut memo = BERNOULLI_MEMO.lock().expect("bernoulli memo poisoned");
    if memo.len() <= n {
        memo.resize(n + 1, None);
    }
    if let Some(v) = &memo[n] {
        return v.clone();
    }
    for m in 0..=n {
        if memo[m].is_some() {
            continue;
        }
        let value = if m == 0 {
            Rational::one()
        } else {
            // B_m = -1/(m+1) * Σ_{j<m} C(m+1, j) B_j, accumulating the
            // binomial column C(m+1, j) incrementally.
            let mut acc = Rational::zero();
            let mut binom = BigInt::one(); // C(m+1, 0)
            for (j, b) in memo.iter().enumerate().take(m) {
                let b = b.as_ref().expect("memo filled in order");
                acc += b * Rational::from_integer(binom.clone());
                // C(m+1, j+1) = C(m+1, j) * (m+1-j) / (j+1)
                binom = binom * BigInt::from(m + 1 - j) / BigInt::from(j + 1);
            }
            -acc / Rational::from_integer(BigInt::from(m + 1))
        };
        memo[m] = Some(value);
    }
    memo[n].clone().expect("just computed")
}

/// Denominator `j_{2k}` of `B_{2k}/2k` in lowest terms.
///
/// The von Staudt–Clausen theorem makes this sharp: `p^n | j_{2k}` exactly
/// when `(p−1)p^{n−1} | 2k`.
pub fn j_denominator(two_k: u32) -> Result<BigInt, ArithError> {
    if two_k == 0 || !two_k.is_multiple_of(2) {
        return Err(ArithError::BadBernoulliIndex(i64::from(two_k)));
    }
    let b = bernoulli(two_k as usize) / rat_int(i64::from(two_k));
    Ok(b.denom().clone())
}

/// p-adic valuation of a nonzero rational; negative when p divides the
/// denominator.
pub fn nu(p: u64, x: &Rational) -> Result<i64, ArithError> {
    if !is_prime(p) {
        return Err(ArithError::NotPrime(p));
    }
    if x.is_zero() {
        return Err(ArithError::ZeroValuation);
    }
    let p = BigInt::from(p);
    Ok(int_valuation(x.numer(), &p) - int_valuation(x.denom(), &p))
}

fn int_valuation(n: &BigInt, p: &BigInt) -> i64 {
    let mut n = n.abs();
    let mut v = 0;
    while !n.is_zero() && (&n % p).is_zero() {
        n /= p;
        v += 1;
    }
    v
}

/// Trial-division primality. All primes touched here are desk-scale.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// Part selector for [`lemma2_check`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Lemma2Part {
    /// `(d^{p^{n−1}(p−1)} − 1) d^n ≡ 0 mod p^n`
    I,
    /// `(d^{(2n'+1)2^n} − 1) d^{n+2} ≡ 0 mod 2^{n+2}`
    II,
}

/// Euler–Fermat congruence, part (i): whether
/// `(d^{p^{n−1}(p−1)} − 1) · d^n ≡ 0 (mod p^n)`.
pub fn lemma2_part_i(d: i64, p: u64, n: u32) -> Result<bool, ArithError> {
    if !is_prime(p) {
        return Err(ArithError::NotPrime(p));
    }
    if n == 0 {
        return Err(ArithError::BadExponent);
    }
    let modulus = BigInt::from(p).pow(n);
    let exponent = BigUint::from(p).pow(n - 1) * BigUint::from(p - 1);
    Ok(holds_mod(d, &exponent, n, &modulus))
}

/// Euler–Fermat congruence, part (ii): whether
/// `(d^{(2n'+1)2^n} − 1) · d^{n+2} ≡ 0 (mod 2^{n+2})` for odd `d`.
pub fn lemma2_part_ii(d: i64, n: u32, n_prime: u32) -> Result<bool, ArithError> {
    if d % 2 == 0 {
        return Err(ArithError::EvenBase(d));
    }
    if n == 0 {
        return Err(ArithError::BadExponent);
    }
    let modulus = BigInt::one() << (n + 2);
    let exponent = BigUint::from(2u32 * n_prime + 1) << n;
    Ok(holds_mod(d, &exponent, n + 2, &modulus))
}

/// Dispatch on the lemma part. For part (i) `p_or_nprime` is the prime p;
/// for part (ii) it is n'.
pub fn lemma2_check(
    part: Lemma2Part,
    d: i64,
    p_or_nprime: u64,
    n: u32,
) -> Result<bool, ArithError> {
    match part {
        Lemma2Part::I => lemma2_part_i(d, p_or_nprime, n),
        Lemma2Part::II => {
            let n_prime = u32::try_from(p_or_nprime).map_err(|_| ArithError::BadExponent)?;
            lemma2_part_ii(d, n, n_prime)
        }
    }
}

/// Checks `(d^exponent − 1) · d^dpow ≡ 0 (mod modulus)` by modular
/// exponentiation, which keeps the exhaustive sweeps fast while staying
/// exact: all moduli are explicit.
fn holds_mod(d: i64, exponent: &BigUint, dpow: u32, modulus: &BigInt) -> bool {
    let base = BigInt::from(d).mod_floor(modulus);
    let left = base.modpow(&BigInt::from(exponent.clone()), modulus) - BigInt::one();
    let right = base.modpow(&BigInt::from(dpow), modulus);
    (left * right).mod_floor(modulus).is_zero()
}
