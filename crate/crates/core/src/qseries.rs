//! Truncated formal power series in q over the rationals, with exact ring
//! operations and integrality tests relative to a set of inverted primes.

use std::collections::BTreeSet;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::arith::{is_prime, Rational};

/// A truncated power series `c_0 + c_1 q + … + c_{prec−1} q^{prec−1}`.
///
/// Precision is explicit and carried by value; binary operations truncate to
/// the minimum of the two operand precisions and never silently extend.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QSeries {
    coeffs: Vec<Rational>,
}

impl QSeries {
    /// Series from explicit coefficients; the precision is their count.
    pub fn from_coeffs(coeffs: Vec<Rational>) -> Self {
        assert!(
            !coeffs.is_empty(),
            "a series carries at least one coefficient"
        );
        QSeries { coeffs }
    }

    /// The zero series at the given precision.
    pub fn zero(prec: usize) -> Self {
        Self::constant(Rational::zero(), prec)
    }

    /// The constant series `1` at the given precision.
    pub fn one(prec: usize) -> Self {
        Self::constant(Rational::one(), prec)
    }

    /// A constant series.
    pub fn constant(c: Rational, prec: usize) -> Self {
        assert!(prec >= 1, "precision must be positive");
        let mut coeffs = vec![Rational::zero(); prec];
        coeffs[0] = c;
        QSeries { coeffs }
    }

    /// Number of known coefficients.
    pub fn prec(&self) -> usize {
        self.coeffs.len()
    }

    /// Coefficient of `q^i`; panics beyond the precision.
    pub fn coeff(&self, i: usize) -> &Rational {
        &self.coeffs[i]
    }

    /// All coefficients, in degree order.
    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    /// Restrict to the first `prec` coefficients. `prec` must not exceed the
    /// available precision.
    pub fn truncate(&self, prec: usize) -> QSeries {
        assert!(prec >= 1 && prec <= self.prec(), "cannot extend precision");
        QSeries {
            coeffs: self.coeffs[..prec].to_vec(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    pub fn add(&self, other: &QSeries) -> QSeries {
        let prec = self.prec().min(other.prec());
        let coeffs = (0..prec)
            .map(|i| &self.coeffs[i] + &other.coeffs[i])
            .collect();
        QSeries { coeffs }
    }

    pub fn sub(&self, other: &QSeries) -> QSeries {
        let prec = self.prec().min(other.prec());
        let coeffs = (0..prec)
            .map(|i| &self.coeffs[i] - &other.coeffs[i])
            .collect();
        QSeries { coeffs }
    }

    pub fn neg(&self) -> QSeries {
        QSeries {
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }

    /// Truncated Cauchy product at the minimum precision.
    pub fn mul(&self, other: &QSeries) -> QSeries {
        let prec = self.prec().min(other.prec());
        let mut coeffs = vec![Rational::zero(); prec];
        for (i, a) in self.coeffs.iter().take(prec).enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().take(prec - i).enumerate() {
                if b.is_zero() {
                    continue;
                }
                coeffs[i + j] += a * b;
            }
        }
        QSeries { coeffs }
    }

    /// Power by repeated squaring; `pow(a, 0)` is the constant 1 at `a`'s
    /// precision.
    pub fn pow(&self, e: u32) -> QSeries {
        let mut result = QSeries::one(self.prec());
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        result
    }

    /// Coefficientwise multiplication by a rational.
    pub fn scale(&self, c: &Rational) -> QSeries {
        QSeries {
            coeffs: self.coeffs.iter().map(|x| x * c).collect(),
        }
    }

    /// Whether every coefficient's reduced denominator factors entirely over
    /// `ring`'s inverted primes. The empty ring means plain integrality.
    pub fn is_integral(&self, ring: &IntegralityRing) -> bool {
        self.coeffs
            .iter()
            .all(|c| ring.strip_denominator(c.denom()).is_one())
    }

    /// Least common multiple of all coefficient denominators after removing
    /// the prime factors in `ignore`.
    pub fn denominator_profile(&self, ignore: &IntegralityRing) -> BigInt {
        let mut acc = BigInt::one();
        for c in &self.coeffs {
            let d = ignore.strip_denominator(c.denom());
            acc = num_integer::lcm(acc, d);
        }
        acc
    }
}

impl fmt::Display for QSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if first {
                first = false;
            } else {
                write!(f, " + ")?;
            }
            match i {
                0 => write!(f, "{c}")?,
                1 => write!(f, "({c})*q")?,
                _ => write!(f, "({c})*q^{i}")?,
            }
        }
        if first {
            write!(f, "0")?;
        }
        write!(f, " + O(q^{})", self.prec())
    }
}

// Wire format used by the CLI: {"prec": P, "coeffs": ["num/den", ...]}.
impl Serialize for QSeries {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut s = serializer.serialize_struct("QSeries", 2)?;
        s.serialize_field("prec", &self.prec())?;
        let coeffs: Vec<String> = self.coeffs.iter().map(rational_string).collect();
        s.serialize_field("coeffs", &coeffs)?;
        s.end()
    }
}

/// Canonical `num/den` rendering of a rational (lowest terms, positive
/// denominator), the form used everywhere in the JSON output.
pub fn rational_string(c: &Rational) -> String {
    format!("{}/{}", c.numer(), c.denom())
}

/// The set of primes inverted in the coefficient ring: `{3}` for rational
/// expansions at level 3, empty for strict integrality over Z.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntegralityRing {
    inverted_primes: BTreeSet<u64>,
}

impl IntegralityRing {
    /// Strict integrality: no primes inverted.
    pub fn strict() -> Self {
        IntegralityRing {
            inverted_primes: BTreeSet::new(),
        }
    }

    /// Primes dividing the level; `{3}` for Γ₁(3).
    pub fn level3() -> Self {
        Self::new([3]).expect("3 is prime")
    }

    /// A ring with the given inverted primes. All members must be prime.
    pub fn new(primes: impl IntoIterator<Item = u64>) -> Result<Self, u64> {
        let mut set = BTreeSet::new();
        for p in primes {
            if !is_prime(p) {
                return Err(p);
            }
            set.insert(p);
        }
        Ok(IntegralityRing {
            inverted_primes: set,
        })
    }

    pub fn inverted_primes(&self) -> impl Iterator<Item = u64> + '_ {
        self.inverted_primes.iter().copied()
    }

    pub fn contains(&self, p: u64) -> bool {
        self.inverted_primes.contains(&p)
    }

    /// Remove all inverted-prime factors from a positive integer.
    pub fn strip_denominator(&self, den: &BigInt) -> BigInt {
        let mut d = den.abs();
        for &p in &self.inverted_primes {
            let p = BigInt::from(p);
            while (&d % &p).is_zero() {
                d /= &p;
            }
        }
        d
    }
}
