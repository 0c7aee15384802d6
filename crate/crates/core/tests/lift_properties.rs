//! Structural properties of the product formula: well-definedness across
//! lift choices, antisymmetry under factor exchange, order-2 statements,
//! and integrality of every canonical lift.

use num_traits::Zero;

use finv_core::arith::{rat_int, Rational};
use finv_core::divcong::{equiv_mod_dbar, order_in_qz, InhomogeneousForm, OrderResult};
use finv_core::finvariant::{canonical_lift, e_invariant, f_of_product, GeneratorDescriptor};
use finv_core::modforms::{self, GradedComponent};
use finv_core::qseries::IntegralityRing;

/// Every generator with dimension ≤ 31: Im J indices 1..=8, μ indices 1..=3.
fn generators_up_to_dim_31() -> Vec<GeneratorDescriptor> {
    let mut gens = Vec::new();
    for k in 1..=8 {
        gens.push(GeneratorDescriptor::im_j(k).unwrap());
    }
    for k in 1..=3 {
        gens.push(GeneratorDescriptor::mu(k).unwrap());
    }
    assert!(gens.iter().all(|g| g.dimension() <= 31));
    gens
}

fn filtration(g1: &GeneratorDescriptor, g2: &GeneratorDescriptor) -> u32 {
    (g1.dimension() + g2.dimension() + 2) / 2
}

#[test]
fn every_canonical_lift_is_integral_over_z_one_third() {
    let ring = IntegralityRing::level3();
    let strict = IntegralityRing::strict();
    for g in generators_up_to_dim_31() {
        let lift = canonical_lift(&g, 50).unwrap();
        let series = lift.mbar().expansion(50);
        assert!(
            series.is_integral(&ring),
            "lift of {g} not integral over Z[1/3]"
        );
        // the x₃ and μ lifts are integral over Z outright
        if g.weight() == 2 || matches!(g, g if g.dimension() % 8 == 1) {
            assert!(
                series.is_integral(&strict),
                "lift of {g} not integral over Z"
            );
        }
    }
}

#[test]
fn product_classes_are_antisymmetric_for_all_pairs() {
    let gens = generators_up_to_dim_31();
    for (i, g1) in gens.iter().enumerate() {
        for g2 in &gens[i..] {
            let k = filtration(g1, g2);
            let prec = modforms::sturm_bound(k) + 10;
            let lhs = canonical_lift(g1, prec)
                .unwrap()
                .mbar()
                .scale(e_invariant(g2).value());
            let rhs = canonical_lift(g2, prec)
                .unwrap()
                .mbar()
                .scale(e_invariant(g1).value())
                .neg();
            let cert = equiv_mod_dbar(&lhs, &rhs, k, prec).unwrap();
            assert!(cert.verdict, "antisymmetry fails for {g1} x {g2}");
        }
    }
}

/// Replacing the canonical lift `m` by `m + h` for any same-weight form `h`
/// with integral expansion leaves the product class unchanged. The basis
/// monomials of the lift weight all qualify.
#[test]
fn product_classes_are_independent_of_the_lift_choice() {
    let gens = generators_up_to_dim_31();
    let ring = IntegralityRing::level3();
    let partners = [
        GeneratorDescriptor::im_j(1).unwrap(),
        GeneratorDescriptor::mu(1).unwrap(),
    ];
    for g in &gens {
        for partner in &partners {
            let k = filtration(g, partner);
            let prec = modforms::sturm_bound(k) + 10;
            let e2 = e_invariant(partner);
            let base = canonical_lift(g, prec).unwrap().mbar().scale(e2.value());
            for monomial_index in 0..modforms::dim(g.weight()) {
                let mut coords = vec![Rational::zero(); modforms::dim(g.weight())];
                coords[monomial_index] = rat_int(1);
                let h = InhomogeneousForm::new(
                    [GradedComponent::new(g.weight(), coords)],
                    ring.clone(),
                );
                let moved = base.add(&h.scale(e2.value()));
                let cert = equiv_mod_dbar(&moved, &base, k, prec).unwrap();
                assert!(
                    cert.verdict,
                    "class of {g} x {partner} moved under lift shift by monomial {monomial_index}"
                );
            }
        }
    }
}

#[test]
fn exceptional_and_periodic_classes_have_order_two() {
    let x3 = GeneratorDescriptor::im_j(1).unwrap();
    let x7 = GeneratorDescriptor::im_j(2).unwrap();
    let mu1 = GeneratorDescriptor::mu(1).unwrap();
    for (g1, g2) in [(x3, x3), (x7, x7), (mu1, mu1), (mu1, x7)] {
        let k = filtration(&g1, &g2);
        let prec = modforms::sturm_bound(k) + 10;
        let class = f_of_product(&g1, &g2, prec).unwrap();
        assert_eq!(
            order_in_qz(class.rep(), k, prec).unwrap(),
            OrderResult::Finite(2),
            "class of {g1} x {g2} should have order 2"
        );
    }
}
