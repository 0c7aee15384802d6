//! The divided-congruence engine: inhomogeneous sums of modular forms,
//! membership in the filtration ring `D_k`, and equivalence modulo
//! `D̄_k = D_k + M₀⊗Q + M_k⊗Q` decided by exact integer-lattice methods.
//!
//! Verdicts are statements about truncations: every certificate records the
//! precision it was checked at, and callers must stay at or above the Sturm
//! bound of the filtration.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::arith::Rational;
use crate::linalg::{self, hnf_rank, hnf_with_inverse, IntMatrix, SolveOutcome};
use crate::modforms::{self, GradedComponent};
use crate::qseries::{rational_string, IntegralityRing, QSeries};

#[derive(Debug, Error, PartialEq)]
pub enum DivcongError {
    #[error("form of weight {weight} is not comparable at filtration {filtration}")]
    NotComparable { weight: u32, filtration: u32 },
    #[error("precision {prec} is below the Sturm bound {bound} for filtration {filtration}")]
    PrecisionBelowSturm {
        prec: usize,
        bound: usize,
        filtration: u32,
    },
    #[error("operands live over different integrality rings")]
    RingMismatch,
    #[error("internal invariant violated: {0}")]
    Internal(String),
}

/// A finite rational combination `Σ f_w` of modular forms of distinct
/// weights for Γ₁(3), each stored by its coordinates over the monomial
/// basis of its weight. Zero components are normalized away on
/// construction, so weight-support queries are canonical.
#[derive(Debug, Clone, PartialEq)]
pub struct InhomogeneousForm {
    components: BTreeMap<u32, GradedComponent>,
    ring: IntegralityRing,
}

impl InhomogeneousForm {
    /// The zero form.
    pub fn zero(ring: IntegralityRing) -> Self {
        InhomogeneousForm {
            components: BTreeMap::new(),
            ring,
        }
    }

    /// Form with the given homogeneous components; components of equal
    /// weight are summed, zero components dropped.
    pub fn new(
        components: impl IntoIterator<Item = GradedComponent>,
        ring: IntegralityRing,
    ) -> Self {
        let mut map: BTreeMap<u32, GradedComponent> = BTreeMap::new();
        for c in components {
            match map.remove(&c.weight()) {
                Some(existing) => {
                    map.insert(c.weight(), existing.add(&c));
                }
                None => {
                    map.insert(c.weight(), c);
                }
            }
        }
        map.retain(|_, c| !c.is_zero());
        InhomogeneousForm {
            components: map,
            ring,
        }
    }

    /// A constant, living in weight 0.
    pub fn constant(c: Rational, ring: IntegralityRing) -> Self {
        Self::new([GradedComponent::new(0, vec![c])], ring)
    }

    pub fn ring(&self) -> &IntegralityRing {
        &self.ring
    }

    pub fn is_zero(&self) -> bool {
        self.components.is_empty()
    }

    /// Weights with a nonzero component, ascending.
    pub fn weights(&self) -> impl Iterator<Item = u32> + '_ {
        self.components.keys().copied()
    }

    /// Largest weight present; `None` for the zero form.
    pub fn max_weight(&self) -> Option<u32> {
        self.components.keys().next_back().copied()
    }

    pub fn component(&self, weight: u32) -> Option<&GradedComponent> {
        self.components.get(&weight)
    }

    pub fn components(&self) -> impl Iterator<Item = &GradedComponent> {
        self.components.values()
    }

    pub fn add(&self, other: &InhomogeneousForm) -> InhomogeneousForm {
        assert_eq!(self.ring, other.ring, "integrality rings must agree");
        Self::new(
            self.components
                .values()
                .chain(other.components.values())
                .cloned(),
            self.ring.clone(),
        )
    }

    pub fn neg(&self) -> InhomogeneousForm {
        self.scale(&-Rational::one())
    }

    pub fn sub(&self, other: &InhomogeneousForm) -> InhomogeneousForm {
        self.add(&other.neg())
    }

    pub fn scale(&self, c: &Rational) -> InhomogeneousForm {
        Self::new(
            self.components.values().map(|comp| comp.scale(c)),
            self.ring.clone(),
        )
    }

    /// Product, convolving the graded components in Q[E₁, E₃].
    pub fn mul(&self, other: &InhomogeneousForm) -> InhomogeneousForm {
        assert_eq!(self.ring, other.ring, "integrality rings must agree");
        let mut parts = Vec::new();
        for a in self.components.values() {
            for b in other.components.values() {
                parts.push(a.mul(b));
            }
        }
        Self::new(parts, self.ring.clone())
    }

    pub fn pow(&self, e: u32) -> InhomogeneousForm {
        let mut result = Self::constant(Rational::one(), self.ring.clone());
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

    /// Joint truncated q-expansion of all components.
    pub fn expansion(&self, prec: usize) -> QSeries {
        let mut acc = QSeries::zero(prec);
        for c in self.components.values() {
            acc = acc.add(&c.expand(prec));
        }
        acc
    }
}

/// A class in `D̄_k ⊗ Q/Z`: a representative together with its filtration.
#[derive(Debug, Clone, PartialEq)]
pub struct DividedCongruenceClass {
    rep: InhomogeneousForm,
    filtration: u32,
}

impl DividedCongruenceClass {
    pub fn new(rep: InhomogeneousForm, filtration: u32) -> Result<Self, DivcongError> {
        if let Some(w) = rep.max_weight() {
            if w > filtration {
                return Err(DivcongError::NotComparable {
                    weight: w,
                    filtration,
                });
            }
        }
        Ok(DividedCongruenceClass { rep, filtration })
    }

    pub fn rep(&self) -> &InhomogeneousForm {
        &self.rep
    }

    pub fn filtration(&self) -> u32 {
        self.filtration
    }
}

/// Audit trail for a decided congruence: on a true verdict, subtracting the
/// two adjustment witnesses from `f − g` leaves `integral_remainder`, which
/// expands integrally to `checked_precision`.
#[derive(Debug, Clone, PartialEq)]
pub struct CongruenceCertificate {
    pub verdict: bool,
    pub adjustment_weight0: Rational,
    pub adjustment_weightk: GradedComponent,
    pub checked_precision: usize,
    pub integral_remainder: Option<QSeries>,
}

impl Serialize for CongruenceCertificate {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut s = serializer.serialize_struct("CongruenceCertificate", 5)?;
        s.serialize_field("verdict", &self.verdict)?;
        s.serialize_field(
            "adjustment_weight0",
            &rational_string(&self.adjustment_weight0),
        )?;
        s.serialize_field("adjustment_weightk", &self.adjustment_weightk)?;
        s.serialize_field("checked_precision", &self.checked_precision)?;
        s.serialize_field("integral_remainder", &self.integral_remainder)?;
        s.end()
    }
}

/// Whether `f` lies in `D_k` at the given precision: every component weight
/// is at most `k` and the joint expansion is integral over `f`'s ring.
pub fn in_filtration(f: &InhomogeneousForm, k: u32, prec: usize) -> Result<bool, DivcongError> {
    let bound = modforms::sturm_bound(k);
    if prec < bound {
        return Err(DivcongError::PrecisionBelowSturm {
            prec,
            bound,
            filtration: k,
        });
    }
    if f.max_weight().is_some_and(|w| w > k) {
        return Ok(false);
    }
    Ok(f.expansion(prec).is_integral(f.ring()))
}

/// Decide `f ≡ g mod D̄_k` at the given precision and produce witnesses.
///
/// The subgroup is `D_k + M₀⊗Q + M_k⊗Q`, so the question is whether some
/// constant `c₀` and some rational weight-`k` form `m_k` make
/// `(f − g) − c₀ − m_k` expand integrally. With `v` the truncated expansion
/// of `f − g` (inverted primes stripped from its denominators, which is the
/// identity modulo integrality) and `B` the integer matrix whose columns
/// are the truncated basis monomials of weight `k` together with the
/// constant series 1, that is exactly `v ∈ B·Qᵐ + Zⁿ`.
///
/// Membership is decided through the Hermite normal form of `Bᵀ`: the
/// unimodular transform exhibits a basis of the full integer left kernel of
/// `B`, which is saturated, so pairing against it maps `Zⁿ` onto all of
/// `Z^{n−r}` and the condition collapses to the integrality of the kernel
/// pairings of `v`. Back-substitution through the tracked inverse transform
/// produces an integer vector `z` with the same pairings, and an exact
/// rational solve of `B·y = v − z` recovers the witnesses. Witness
/// denominators are bounded by the cleared denominator of `v` times an
/// r×r minor of `B`.
pub fn equiv_mod_dbar(
    f: &InhomogeneousForm,
    g: &InhomogeneousForm,
    k: u32,
    prec: usize,
) -> Result<CongruenceCertificate, DivcongError> {
    if f.ring() != g.ring() {
        return Err(DivcongError::RingMismatch);
    }
    let bound = modforms::sturm_bound(k);
    if prec < bound {
        return Err(DivcongError::PrecisionBelowSturm {
            prec,
            bound,
            filtration: k,
        });
    }
    let h = f.sub(g);
    if let Some(w) = h.max_weight() {
        if w > k {
            return Err(DivcongError::NotComparable {
                weight: w,
                filtration: k,
            });
        }
    }

    let ring = h.ring().clone();
    let expansion = h.expansion(prec);
    let v: Vec<Rational> = expansion
        .coeffs()
        .iter()
        .map(|c| strip_rational(c, &ring))
        .collect();

    // adjustment columns: basis(k) expansions, then the constant series 1
    let monomial_columns = modforms::expand_basis(k, prec);
    let mdim = monomial_columns.len();
    let mut int_columns: Vec<Vec<BigInt>> = Vec::with_capacity(mdim + 1);
    for col in &monomial_columns {
        int_columns.push(
            col.coeffs()
                .iter()
                .map(|c| {
                    debug_assert!(c.denom().is_one(), "monomial expansions are integral");
                    c.numer().clone()
                })
                .collect(),
        );
    }
    let mut const_col = vec![BigInt::zero(); prec];
    const_col[0] = BigInt::one();
    int_columns.push(const_col);

    // b_transpose has the adjustment columns as rows; its HNF transform
    // exhibits the integer left kernel of B
    let b_transpose = IntMatrix {
        rows: mdim + 1,
        cols: (0..prec)
            .map(|i| int_columns.iter().map(|c| c[i].clone()).collect())
            .collect(),
    };
    let (hmat, u, uinv) = hnf_with_inverse(&b_transpose);
    let rank = hnf_rank(&hmat);

    // kernel dot products: all integral iff the class is adjustable to Z
    let mut kernel_values = Vec::with_capacity(prec - rank);
    for j in rank..prec {
        let mut acc = Rational::zero();
        for (i, coeff) in u.cols[j].iter().enumerate() {
            if !coeff.is_zero() {
                acc += &v[i] * Rational::from_integer(coeff.clone());
            }
        }
        kernel_values.push(acc);
    }
    if kernel_values.iter().any(|w| !w.denom().is_one()) {
        return Ok(CongruenceCertificate {
            verdict: false,
            adjustment_weight0: Rational::zero(),
            adjustment_weightk: GradedComponent::zero(k),
            checked_precision: prec,
            integral_remainder: None,
        });
    }

    // integer vector z with the same kernel pairings as v, via the rows of
    // the inverse transform matching the kernel columns
    let mut z = vec![BigInt::zero(); prec];
    for (j, w) in kernel_values.iter().enumerate() {
        let w = w.numer();
        if w.is_zero() {
            continue;
        }
        for (i, zi) in z.iter_mut().enumerate() {
            *zi += uinv.entry(rank + j, i) * w;
        }
    }

    // exact witnesses: B·y = v − z
    let matrix: Vec<Vec<Rational>> = (0..prec)
        .map(|i| {
            int_columns
                .iter()
                .map(|c| Rational::from_integer(c[i].clone()))
                .collect()
        })
        .collect();
    let rhs: Vec<Rational> = v
        .iter()
        .zip(&z)
        .map(|(a, b)| a - Rational::from_integer(b.clone()))
        .collect();
    let y = match linalg::solve(&matrix, &rhs) {
        SolveOutcome::Unique(y) | SolveOutcome::Underdetermined(y) => y,
        SolveOutcome::Inconsistent => {
            return Err(DivcongError::Internal(
                "kernel-adjusted vector left the column span".into(),
            ))
        }
    };
    let adjustment_weightk = GradedComponent::new(k, y[..mdim].to_vec());
    let adjustment_weight0 = y[mdim].clone();

    let mut remainder = expansion;
    remainder = remainder.sub(&QSeries::constant(adjustment_weight0.clone(), prec));
    remainder = remainder.sub(&adjustment_weightk.expand(prec));
    if !remainder.is_integral(&ring) {
        return Err(DivcongError::Internal(
            "witnessed remainder failed the integrality check".into(),
        ));
    }

    Ok(CongruenceCertificate {
        verdict: true,
        adjustment_weight0,
        adjustment_weightk,
        checked_precision: prec,
        integral_remainder: Some(remainder),
    })
}

/// Smallest `m ≥ 1` with `m·f ≡ 0 mod D̄_k`, searched up to a bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OrderResult {
    Finite(u32),
    /// No multiple vanished up to the search bound: infinite at this
    /// precision as far as the search can tell.
    ExceedsBound(u32),
}

pub const DEFAULT_ORDER_BOUND: u32 = 64;

pub fn order_in_qz(
    f: &InhomogeneousForm,
    k: u32,
    prec: usize,
) -> Result<OrderResult, DivcongError> {
    order_in_qz_bounded(f, k, prec, DEFAULT_ORDER_BOUND)
}

pub fn order_in_qz_bounded(
    f: &InhomogeneousForm,
    k: u32,
    prec: usize,
    bound: u32,
) -> Result<OrderResult, DivcongError> {
    let zero = InhomogeneousForm::zero(f.ring().clone());
    for m in 1..=bound {
        let scaled = f.scale(&Rational::from_integer(BigInt::from(m)));
        if equiv_mod_dbar(&scaled, &zero, k, prec)?.verdict {
            return Ok(OrderResult::Finite(m));
        }
    }
    Ok(OrderResult::ExceedsBound(bound))
}

/// Column Hermite normal form `h = m_in · u` with unimodular `u`.
///
/// `h` is lower-triangular with positive pivots and the pivot-row entries of
/// earlier columns reduced into `[0, pivot)`; zero columns collect on the
/// right. Row-major in and out.
pub fn hnf(m_in: &[Vec<BigInt>]) -> (Vec<Vec<BigInt>>, Vec<Vec<BigInt>>) {
    let a = IntMatrix::from_rows(m_in);
    let (h, u, _) = hnf_with_inverse(&a);
    (h.to_rows(), u.to_rows())
}

/// Drop the inverted-prime part of a denominator, staying in the same class
/// modulo the ring-integral rationals: with `x = a/(d₀·s)` where `s`
/// collects the inverted-prime factors, the result is `(a·s⁻¹ mod d₀)/d₀`.
fn strip_rational(x: &Rational, ring: &IntegralityRing) -> Rational {
    let mut d0 = x.denom().clone();
    let mut s = BigInt::one();
    for p in ring.inverted_primes() {
        let p = BigInt::from(p);
        while (&d0 % &p).is_zero() {
            d0 /= &p;
            s *= &p;
        }
    }
    if s.is_one() {
        return x.clone();
    }
    if d0.is_one() {
        return Rational::zero();
    }
    let inv = mod_inverse(&s, &d0);
    Rational::new((x.numer() * inv).mod_floor(&d0), d0)
}

/// Inverse of `a` modulo `m`, for coprime inputs.
fn mod_inverse(a: &BigInt, m: &BigInt) -> BigInt {
    let e = a.mod_floor(m).extended_gcd(m);
    debug_assert!(e.gcd.is_one(), "mod_inverse requires coprime inputs");
    e.x.mod_floor(m)
}
