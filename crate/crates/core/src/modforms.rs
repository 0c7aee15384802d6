//! Eisenstein series for level 1 and Γ₁(3), the monomial basis E₁^a E₃^b of
//! each graded piece, coordinate solving against that basis, and the Sturm
//! precision policy that makes truncated verdicts meaningful.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Mutex;

use num_traits::{One, Zero};
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::arith::{bernoulli, chi3, rat_int, Rational};
use crate::linalg::{self, SolveOutcome};
use crate::qseries::{rational_string, QSeries};

/// Largest Eisenstein weight the constructors will touch. Everything the
/// verification suites need stays far below this.
pub const MAX_EISENSTEIN_WEIGHT: u32 = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Level {
    One,
    Three,
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Level::One => write!(f, "1"),
            Level::Three => write!(f, "3"),
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum ModFormsError {
    #[error("E_2 is only quasi-modular; weight 2 is not supported at level 1")]
    QuasiModularE2,
    #[error("Eisenstein weight must be even and at least 4, got {0}")]
    BadEisensteinWeight(u32),
    #[error("weight {0} exceeds the configured Eisenstein limit {MAX_EISENSTEIN_WEIGHT}")]
    WeightLimitExceeded(u32),
    #[error("form has weight {actual}, expected {expected}")]
    WeightMismatch { expected: u32, actual: u32 },
    #[error("precision {prec} is below the Sturm bound {bound} for weight {weight}")]
    PrecisionBelowSturm {
        prec: usize,
        bound: usize,
        weight: u32,
    },
    #[error("not a level-3 form of weight {0}: q-expansion leaves the basis span")]
    NotLevel3Form(u32),
}

/// A q-expansion tagged with its weight and level.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModularFormExpansion {
    weight: u32,
    level: Level,
    series: QSeries,
}

impl ModularFormExpansion {
    pub fn new(weight: u32, level: Level, series: QSeries) -> Self {
        ModularFormExpansion {
            weight,
            level,
            series,
        }
    }

    pub fn weight(&self) -> u32 {
        self.weight
    }

    pub fn level(&self) -> Level {
        self.level
    }

    pub fn series(&self) -> &QSeries {
        &self.series
    }

    pub fn into_series(self) -> QSeries {
        self.series
    }
}

/// Level-1 Eisenstein series `E_k = 1 − (2k/B_k) Σ σ_{k−1}(n) qⁿ` for even
/// `k ≥ 4`.
pub fn eisenstein_level1(k: u32, prec: usize) -> Result<ModularFormExpansion, ModFormsError> {
    if k == 2 {
        return Err(ModFormsError::QuasiModularE2);
    }
    if k < 4 || !k.is_multiple_of(2) {
        return Err(ModFormsError::BadEisensteinWeight(k));
    }
    if k > MAX_EISENSTEIN_WEIGHT {
        return Err(ModFormsError::WeightLimitExceeded(k));
    }
    let factor = -rat_int(2 * i64::from(k)) / bernoulli(k as usize);
    let mut coeffs = Vec::with_capacity(prec);
    coeffs.push(Rational::one());
    for n in 1..prec {
        let s = crate::arith::sigma(n as u64, k - 1).expect("n >= 1");
        coeffs.push(&factor * Rational::from_integer(s));
    }
    Ok(ModularFormExpansion::new(
        k,
        Level::One,
        QSeries::from_coeffs(coeffs),
    ))
}

/// Weight-1 generator `E₁ = 1 + 6 Σ Σ_{d|n} (d/3) qⁿ` of the Γ₁(3) ring.
pub fn e1(prec: usize) -> ModularFormExpansion {
    character_eisenstein(1, 6, 0, prec)
}

/// Weight-3 generator `E₃ = 1 − 9 Σ Σ_{d|n} (d/3) d² qⁿ`.
pub fn e3(prec: usize) -> ModularFormExpansion {
    character_eisenstein(3, -9, 2, prec)
}

fn character_eisenstein(weight: u32, scale: i64, dpow: u32, prec: usize) -> ModularFormExpansion {
    let mut coeffs = Vec::with_capacity(prec);
    coeffs.push(Rational::one());
    for n in 1..prec as u64 {
        let mut s = 0i64;
        for d in 1..=n {
            if n % d == 0 {
                s += chi3(d as i64) * (d as i64).pow(dpow);
            }
        }
        coeffs.push(rat_int(scale * s));
    }
    ModularFormExpansion::new(weight, Level::Three, QSeries::from_coeffs(coeffs))
}

/// A monomial `E₁^a E₃^b` in the free generators of the Γ₁(3) ring.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Monomial {
    pub e1_pow: u32,
    pub e3_pow: u32,
}

impl Monomial {
    pub fn weight(&self) -> u32 {
        self.e1_pow + 3 * self.e3_pow
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let factor = |f: &mut fmt::Formatter<'_>, name: &str, pow: u32| -> fmt::Result {
            match pow {
                1 => write!(f, "{name}"),
                _ => write!(f, "{name}^{pow}"),
            }
        };
        match (self.e1_pow, self.e3_pow) {
            (0, 0) => write!(f, "1"),
            (a, 0) => factor(f, "E1", a),
            (0, b) => factor(f, "E3", b),
            (a, b) => {
                factor(f, "E1", a)?;
                write!(f, "*")?;
                factor(f, "E3", b)
            }
        }
    }
}

/// Monomial basis of `M_w^{Γ₁(3)}`: all `(a, b)` with `a + 3b = w`, ordered
/// by increasing E₃ power. Its length is `⌊w/3⌋ + 1`.
pub fn basis(weight: u32) -> Vec<Monomial> {
    (0..=weight / 3)
        .map(|b| Monomial {
            e1_pow: weight - 3 * b,
            e3_pow: b,
        })
        .collect()
}

/// Dimension of the weight-`w` graded piece.
pub fn dim(weight: u32) -> usize {
    (weight / 3 + 1) as usize
}

/// q-expansion of a single basis monomial.
pub fn expand_monomial(m: Monomial, prec: usize) -> QSeries {
    e1(prec)
        .series()
        .pow(m.e1_pow)
        .mul(&e3(prec).series().pow(m.e3_pow))
}

/// Expansions of all of `basis(weight)`, sharing the incremental power
/// computations.
pub fn expand_basis(weight: u32, prec: usize) -> Vec<QSeries> {
    let e1s = e1(prec).into_series();
    let e3s = e3(prec).into_series();
    let mut e1_pows = vec![QSeries::one(prec)];
    for _ in 1..=weight {
        let next = e1_pows.last().unwrap().mul(&e1s);
        e1_pows.push(next);
    }
    let mut result = Vec::with_capacity(dim(weight));
    let mut e3_pow = QSeries::one(prec);
    for b in 0..=weight / 3 {
        if b > 0 {
            e3_pow = e3_pow.mul(&e3s);
        }
        result.push(e1_pows[(weight - 3 * b) as usize].mul(&e3_pow));
    }
    result
}

/// Coordinates of a weight-homogeneous form over `basis(weight)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GradedComponent {
    weight: u32,
    coords: Vec<Rational>,
}

impl GradedComponent {
    pub fn new(weight: u32, coords: Vec<Rational>) -> Self {
        assert_eq!(
            coords.len(),
            dim(weight),
            "coordinate count must match dim M_{weight}"
        );
        GradedComponent { weight, coords }
    }

    pub fn zero(weight: u32) -> Self {
        Self::new(weight, vec![Rational::zero(); dim(weight)])
    }

    pub fn weight(&self) -> u32 {
        self.weight
    }

    pub fn coords(&self) -> &[Rational] {
        &self.coords
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(Zero::is_zero)
    }

    pub fn add(&self, other: &GradedComponent) -> GradedComponent {
        assert_eq!(self.weight, other.weight);
        GradedComponent {
            weight: self.weight,
            coords: self
                .coords
                .iter()
                .zip(&other.coords)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn scale(&self, c: &Rational) -> GradedComponent {
        GradedComponent {
            weight: self.weight,
            coords: self.coords.iter().map(|x| x * c).collect(),
        }
    }

    /// Product in the free polynomial ring Q[E₁, E₃]: the monomial
    /// `(a, b)·(a', b')` lands at E₃-power `b + b'` of weight `w + w'`.
    pub fn mul(&self, other: &GradedComponent) -> GradedComponent {
        let weight = self.weight + other.weight;
        let mut coords = vec![Rational::zero(); dim(weight)];
        for (i, a) in self.coords.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coords.iter().enumerate() {
                if b.is_zero() {
                    continue;
                }
                coords[i + j] += a * b;
            }
        }
        GradedComponent { weight, coords }
    }

    /// Truncated q-expansion `Σ coords_i · E₁^{a_i} E₃^{b_i}`.
    pub fn expand(&self, prec: usize) -> QSeries {
        let monomials = expand_basis(self.weight, prec);
        let mut acc = QSeries::zero(prec);
        for (c, m) in self.coords.iter().zip(&monomials) {
            if !c.is_zero() {
                acc = acc.add(&m.scale(c));
            }
        }
        acc
    }
}

impl Serialize for GradedComponent {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut s = serializer.serialize_struct("GradedComponent", 2)?;
        s.serialize_field("weight", &self.weight)?;
        let coords: Vec<String> = self.coords.iter().map(rational_string).collect();
        s.serialize_field("coords", &coords)?;
        s.end()
    }
}

/// Standalone form of [`GradedComponent::expand`], matching the operation
/// naming used elsewhere.
pub fn expand_component(c: &GradedComponent, prec: usize) -> QSeries {
    c.expand(prec)
}

// E_4 and friends get re-expressed over E₁, E₃ constantly; cache the solved
// coordinates per weight.
static EISENSTEIN_COORDS: Mutex<BTreeMap<u32, GradedComponent>> = Mutex::new(BTreeMap::new());

/// Level-3 basis coordinates of the level-1 Eisenstein series `E_k`,
/// solved once per weight at twice the Sturm bound and cached.
pub fn eisenstein_in_basis(k: u32) -> Result<GradedComponent, ModFormsError> {
    {
        let cache = EISENSTEIN_COORDS.lock().expect("coords cache poisoned");
        if let Some(c) = cache.get(&k) {
            return Ok(c.clone());
        }
    }
    let prec = 2 * sturm_bound(k);
    let coords = express_in_basis(&eisenstein_level1(k, prec)?, k)?;
    EISENSTEIN_COORDS
        .lock()
        .expect("coords cache poisoned")
        .insert(k, coords.clone());
    Ok(coords)
}

/// Precision beyond which agreement of weight-`w` truncations forces exact
/// agreement: `⌈w·μ/12⌉ + 1` with index constant μ = 8 for Γ₁(3).
///
/// The constant is guarded by the rank property test; coordinate solving
/// refuses rank-deficient systems rather than silently miscomputing.
pub fn sturm_bound(weight: u32) -> usize {
    ((2 * weight).div_ceil(3) + 1) as usize
}

/// Default working precision for the verification suites: a generous margin
/// over the Sturm bound at negligible cost.
pub fn default_precision(top_weight: u32) -> usize {
    (2 * sturm_bound(top_weight)).max(50)
}

/// Solve for the unique coordinates of `f` over `basis(target_weight)`,
/// verified against f's full available precision.
pub fn express_in_basis(
    f: &ModularFormExpansion,
    target_weight: u32,
) -> Result<GradedComponent, ModFormsError> {
    if f.weight() != target_weight {
        return Err(ModFormsError::WeightMismatch {
            expected: target_weight,
            actual: f.weight(),
        });
    }
    express_series_in_basis(f.series(), target_weight)
}

/// As [`express_in_basis`], but directly on a q-expansion.
pub fn express_series_in_basis(
    series: &QSeries,
    target_weight: u32,
) -> Result<GradedComponent, ModFormsError> {
    let prec = series.prec();
    let bound = sturm_bound(target_weight);
    if prec < bound {
        return Err(ModFormsError::PrecisionBelowSturm {
            prec,
            bound,
            weight: target_weight,
        });
    }
    let columns = expand_basis(target_weight, prec);
    let matrix: Vec<Vec<Rational>> = (0..prec)
        .map(|i| columns.iter().map(|c| c.coeff(i).clone()).collect())
        .collect();
    match linalg::solve(&matrix, series.coeffs()) {
        SolveOutcome::Unique(coords) => Ok(GradedComponent::new(target_weight, coords)),
        SolveOutcome::Underdetermined(_) => Err(ModFormsError::PrecisionBelowSturm {
            prec,
            bound,
            weight: target_weight,
        }),
        SolveOutcome::Inconsistent => Err(ModFormsError::NotLevel3Form(target_weight)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::rat;

    #[test]
    fn eisenstein_level1_expansions() {
        let e4 = eisenstein_level1(4, 3).unwrap();
        assert_eq!(
            e4.series().coeffs(),
            &[rat_int(1), rat_int(240), rat_int(2160)]
        );
        let e6 = eisenstein_level1(6, 3).unwrap();
        assert_eq!(
            e6.series().coeffs(),
            &[rat_int(1), rat_int(-504), rat_int(-16632)]
        );
        assert_eq!(eisenstein_level1(2, 3), Err(ModFormsError::QuasiModularE2));
        assert_eq!(
            eisenstein_level1(5, 3),
            Err(ModFormsError::BadEisensteinWeight(5))
        );
        assert_eq!(
            eisenstein_level1(66, 3),
            Err(ModFormsError::WeightLimitExceeded(66))
        );
    }

    #[test]
    fn sigma3_from_e4() {
        let e4 = eisenstein_level1(4, 4).unwrap();
        let normalized = e4.series().sub(&QSeries::one(4)).scale(&rat(1, 240));
        for n in 1..4u64 {
            assert_eq!(
                normalized.coeff(n as usize),
                &Rational::from_integer(crate::arith::sigma(n, 3).unwrap())
            );
        }
    }

    #[test]
    fn level3_generators() {
        assert_eq!(
            e1(8).series().coeffs(),
            &[
                rat_int(1),
                rat_int(6),
                rat_int(0),
                rat_int(6),
                rat_int(6),
                rat_int(0),
                rat_int(0),
                rat_int(12)
            ]
        );
        assert_eq!(
            e3(3).series().coeffs(),
            &[rat_int(1), rat_int(-9), rat_int(27)]
        );
    }

    #[test]
    fn e1_squared_counts_nondivisible_divisors() {
        // E₁² = 1 + 12 Σ Σ_{3∤d|n} d qⁿ
        let sq = e1(20).series().pow(2);
        for n in 1..20u64 {
            let mut s = 0i64;
            for d in 1..=n {
                if n % d == 0 && d % 3 != 0 {
                    s += d as i64;
                }
            }
            assert_eq!(
                sq.coeff(n as usize),
                &rat_int(12 * s),
                "coefficient of q^{n}"
            );
        }
    }

    #[test]
    fn basis_enumeration() {
        let pairs =
            |w: u32| -> Vec<(u32, u32)> { basis(w).iter().map(|m| (m.e1_pow, m.e3_pow)).collect() };
        assert_eq!(pairs(0), vec![(0, 0)]);
        assert_eq!(pairs(3), vec![(3, 0), (0, 1)]);
        assert_eq!(pairs(4), vec![(4, 0), (1, 1)]);
        for w in 0..=24 {
            assert_eq!(basis(w).len(), dim(w));
            assert!(basis(w).iter().all(|m| m.weight() == w));
        }
    }

    #[test]
    fn sturm_bound_values() {
        assert_eq!(sturm_bound(0), 1);
        assert_eq!(sturm_bound(4), 4);
        assert_eq!(sturm_bound(8), 7);
    }

    #[test]
    fn expand_component_examples() {
        let c = GradedComponent::new(0, vec![rat_int(5)]);
        assert_eq!(c.expand(3), QSeries::constant(rat_int(5), 3));

        // (E₁²−1)/12 has q-coefficient 1
        let c = GradedComponent::new(2, vec![rat(1, 12)]);
        let series = c.expand(6).sub(&QSeries::constant(rat(1, 12), 6));
        assert_eq!(series.coeff(0), &Rational::zero());
        assert_eq!(series.coeff(1), &Rational::one());

        // E₄ = 9·E₁⁴ − 8·E₁E₃
        let c = GradedComponent::new(4, vec![rat_int(9), rat_int(-8)]);
        let e4 = eisenstein_level1(4, 10).unwrap();
        assert_eq!(&c.expand(10), e4.series());
    }

    #[test]
    fn express_e4_and_e6() {
        let e4 = eisenstein_level1(4, 12).unwrap();
        let coords = express_in_basis(&e4, 4).unwrap();
        assert_eq!(coords.coords(), &[rat_int(9), rat_int(-8)]);

        let e1form = e1(6);
        let coords = express_in_basis(&e1form, 1).unwrap();
        assert_eq!(coords.coords(), &[rat_int(1)]);

        // E₆ over {E₁⁶, E₁³E₃, E₃²}: solve, then verify well beyond the bound
        let e6 = eisenstein_level1(6, 20).unwrap();
        let coords = express_in_basis(&e6, 6).unwrap();
        assert_eq!(&coords.expand(20), e6.series());
    }

    #[test]
    fn express_in_basis_errors() {
        let e4 = eisenstein_level1(4, 2).unwrap();
        assert!(matches!(
            express_in_basis(&e4, 4),
            Err(ModFormsError::PrecisionBelowSturm { .. })
        ));
        let bogus = ModularFormExpansion::new(
            2,
            Level::Three,
            QSeries::from_coeffs(vec![
                rat_int(1),
                rat_int(1),
                rat_int(0),
                rat_int(0),
                rat_int(0),
            ]),
        );
        assert_eq!(
            express_in_basis(&bogus, 2),
            Err(ModFormsError::NotLevel3Form(2))
        );
        let e4 = eisenstein_level1(4, 12).unwrap();
        assert!(matches!(
            express_in_basis(&e4, 6),
            Err(ModFormsError::WeightMismatch { .. })
        ));
    }

    #[test]
    fn weight_three_forms_share_constant_term() {
        let cube = e1(10).series().pow(3);
        let e3s = e3(10);
        assert_ne!(&cube, e3s.series());
        let diff = cube.sub(e3s.series());
        assert!(diff.coeff(0).is_zero());
    }

    #[test]
    fn rank_is_full_at_sturm_bound_up_to_weight_24() {
        for w in 0..=24u32 {
            let bound = sturm_bound(w);
            let columns = expand_basis(w, bound);
            let matrix: Vec<Vec<Rational>> = (0..bound)
                .map(|i| columns.iter().map(|c| c.coeff(i).clone()).collect())
                .collect();
            assert_eq!(
                crate::linalg::rank(&matrix),
                dim(w),
                "basis matrix of weight {w} is rank-deficient at its Sturm bound"
            );
        }
    }

    #[test]
    fn grading_closed_under_products() {
        // spot-check closure: monomial expansions multiply back into the basis
        for (w1, w2) in [(1u32, 3u32), (2, 4), (3, 3), (4, 5)] {
            let prec = sturm_bound(w1 + w2) + 4;
            for m1 in basis(w1) {
                for m2 in basis(w2) {
                    let product = expand_monomial(m1, prec).mul(&expand_monomial(m2, prec));
                    let coords = express_series_in_basis(&product, w1 + w2).unwrap();
                    assert_eq!(coords.expand(prec), product);
                }
            }
        }
    }

    #[test]
    fn eisenstein_coefficients_inherit_multiplicativity() {
        let e8 = eisenstein_level1(8, 36).unwrap();
        let normalized = e8
            .series()
            .sub(&QSeries::one(36))
            .scale(&(Rational::one() / (-rat_int(16) / bernoulli(8))));
        for (m, n) in [(2usize, 3usize), (3, 4), (2, 5), (5, 7), (4, 7)] {
            assert_eq!(
                normalized.coeff(m * n),
                &(normalized.coeff(m) * normalized.coeff(n)),
                "σ_7({m}·{n})"
            );
        }
    }
}
