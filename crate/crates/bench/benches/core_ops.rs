use criterion::{black_box, criterion_group, criterion_main, Criterion};
use num_bigint::BigInt;

use finv_core::arith::rat;
use finv_core::divcong::{equiv_mod_dbar, hnf, InhomogeneousForm};
use finv_core::finvariant;
use finv_core::modforms::{self, GradedComponent};
use finv_core::qseries::IntegralityRing;
use finv_core::testsupport::Rng;

fn bench_expansions(c: &mut Criterion) {
    c.bench_function("e1_prec_200", |b| b.iter(|| modforms::e1(black_box(200))));
    c.bench_function("eisenstein_e12_prec_100", |b| {
        b.iter(|| modforms::eisenstein_level1(black_box(12), 100).unwrap())
    });
    c.bench_function("expand_basis_weight_16_prec_50", |b| {
        b.iter(|| modforms::expand_basis(black_box(16), 50))
    });
}

fn bench_hnf(c: &mut Criterion) {
    let mut rng = Rng(0xbe9c_4a11_0000_0001);
    let mat: Vec<Vec<BigInt>> = (0..20)
        .map(|_| (0..20).map(|_| BigInt::from(rng.range(-99, 99))).collect())
        .collect();
    c.bench_function("hnf_20x20", |b| b.iter(|| hnf(black_box(&mat))));
}

fn bench_congruences(c: &mut Criterion) {
    let ring = IntegralityRing::level3();
    let a = InhomogeneousForm::new(
        [
            GradedComponent::new(2, vec![rat(1, 12)]),
            GradedComponent::new(0, vec![rat(-1, 12)]),
        ],
        ring,
    );
    let lhs = a.scale(&rat(1, 12));
    let rhs = a.mul(&a).scale(&rat(1, 2));
    c.bench_function("equiv_mod_dbar_theorem_i_prec_50", |b| {
        b.iter(|| equiv_mod_dbar(black_box(&lhs), black_box(&rhs), 4, 50).unwrap())
    });
    c.bench_function("generic_vanishing_1_3_prec_50", |b| {
        b.iter(|| finvariant::verify_generic_vanishing(1, 3, 50).unwrap())
    });
}

criterion_group!(benches, bench_expansions, bench_hnf, bench_congruences);
criterion_main!(benches);
