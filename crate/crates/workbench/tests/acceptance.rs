//! End-to-end acceptance suite: one test per headline property of the
//! workbench, from the modular polynomial oracle through the seeded
//! reduction identities to the genus bookkeeping over a prime range.

use std::sync::OnceLock;

use x0_workbench::affinoid::{
    artin_schreier_chart, deligne_lusztig_chart, valuation_profile, verify_reduction, Component,
};
use x0_workbench::arith::{is_prime, rat, Rat};
use x0_workbench::graph::{bookkeeping, build_dual_graph, e_k, width_tables};
use x0_workbench::modpoly::{ModularPolynomial, ShiftedKronecker};
use x0_workbench::supersingular::SsLocus;

fn phi13() -> &'static ModularPolynomial {
    static PHI: OnceLock<ModularPolynomial> = OnceLock::new();
    PHI.get_or_init(|| ModularPolynomial::build(13).unwrap())
}

fn sk13() -> &'static ShiftedKronecker {
    static SK: OnceLock<ShiftedKronecker> = OnceLock::new();
    // β̄ = 5 is the unique supersingular j-invariant for p = 13
    SK.get_or_init(|| ShiftedKronecker::shift(phi13(), 5, 3).unwrap())
}

/// 1. Φ₂ equals the classical table exactly; Φ₁₃ is symmetric and
/// satisfies the Kronecker congruence mod 13.
#[test]
fn modular_polynomial_oracle_and_properties() {
    let phi2 = ModularPolynomial::build(2).unwrap();
    let classical: &[(usize, usize, i128)] = &[
        (3, 0, 1),
        (0, 3, 1),
        (2, 2, -1),
        (2, 1, 1488),
        (1, 2, 1488),
        (2, 0, -162000),
        (0, 2, -162000),
        (1, 1, 40773375),
        (1, 0, 8748000000),
        (0, 1, 8748000000),
        (0, 0, -157464000000000),
    ];
    let mut expect = vec![vec![num_bigint::BigInt::from(0); 4]; 4];
    for &(i, j, c) in classical {
        expect[i][j] = num_bigint::BigInt::from(c);
    }
    assert_eq!(phi2.coeffs, expect);

    let phi = phi13();
    assert_eq!(phi.coeffs.len(), 15);
    phi.check_symmetry().unwrap();
    phi.check_kronecker().unwrap();
}

/// 2. Eichler mass identity Σ 1/(2i(A)) = (p−1)/24 for 13 ≤ p ≤ 200,
/// and ss = (p+13)/12 when p ≡ 11 mod 12.
#[test]
fn supersingular_mass_identity_to_two_hundred() {
    let mut p = 13u64;
    while p <= 200 {
        if is_prime(p) {
            let locus = SsLocus::compute(p).unwrap();
            assert!(locus.mass_identity_holds(), "mass identity fails at p = {p}");
            if p % 12 == 11 {
                assert_eq!(locus.count() as u64, (p + 13) / 12, "ss count at p = {p}");
            }
        }
        p += 2;
    }
}

/// 3. Fibre-valuation case table at p = 13: five sample valuations per
/// case (unique-q cases vary the seed), Newton-polygon root multisets
/// matching the prediction exactly.
#[test]
fn valuation_case_table() {
    let sk = sk13();
    let p = 13i64;
    let per_case: [(u8, Vec<Rat>); 5] = [
        (1, vec![rat(1, p + 2), rat(1, p + 3), rat(1, p + 4), rat(1, p + 5), rat(1, 2 * p + 2)]),
        (2, vec![rat(1, p + 1)]),
        (3, vec![rat(1, 2), rat(1, 3), rat(2, 3), rat(1, p), rat(p - 1, p)]),
        (4, vec![rat(p, p + 1)]),
        (
            5,
            vec![
                rat(p + 1, p + 2),
                rat(p + 2, p + 3),
                rat(p + 3, p + 4),
                rat(2 * p + 1, 2 * p + 2),
                rat(2 * p + 3, 2 * p + 4),
            ],
        ),
    ];
    for (case, qs) in per_case {
        let mut samples = 0;
        for q in &qs {
            let reps = if qs.len() == 1 { 5 } else { 1 };
            for seed in 0..reps {
                let rep = valuation_profile(sk, q, seed).unwrap();
                assert_eq!(rep.case_id, case);
                assert!(rep.pass, "case {case} q = {q} seed {seed}");
                samples += 1;
            }
        }
        assert!(samples >= 5, "case {case} undersampled");
    }
}

/// 4. Reduction identities on every circle component at p = 13, 20
/// seeds each: all residue checks exact in F₁₆₉.
#[test]
fn reduction_identities_twenty_seeds_each() {
    let sk = sk13();
    for comp in Component::ALL {
        for seed in 0..20u64 {
            let rep = verify_reduction(sk, comp, seed)
                .unwrap_or_else(|e| panic!("{} seed {seed}: {e}", comp.name()));
            assert!(rep.pass, "{} seed {seed}", comp.name());
        }
    }
}

/// 5. Singular residue classes at p = 13: both ± branches of the
/// Artin–Schreier chart (levels p³ and p⁴) verify a^p − a − s² ≡ 0, and
/// the Deligne–Lusztig chart verifies a^p − a − c̄t^{p+1} ≡ 0 with c̄ a
/// unit, each on ≥ 10 sampled points, to the stated moduli.
#[test]
fn singular_residue_classes() {
    let sk = sk13();
    for deep in [false, true] {
        for plus in [true, false] {
            let rep = artin_schreier_chart(sk, deep, plus, 0, 11, 10).unwrap();
            assert!(rep.pass, "{} {}", rep.label, rep.branch);
            assert!(rep.points >= 10);
        }
    }
    let rep = deligne_lusztig_chart(sk, 11, 10).unwrap();
    assert!(rep.pass, "{} {}", rep.label, rep.branch);
    assert!(rep.points >= 10);
    assert!(rep
        .checks
        .iter()
        .any(|c| c.ok && c.name.contains("unit")), "unit c̄ check missing");
}

/// 6. Width/multiplicity tables for p ∈ {13, 23} at levels 2–4: every
/// M = e_K·w is a positive integer at e_K = (p²−1)/2, p²(p²−1),
/// p³(p²−1).
#[test]
fn width_tables_integral_multiplicities() {
    for p in [13i64, 23] {
        assert_eq!(e_k(p as u64, 2), (p * p - 1) / 2);
        assert_eq!(e_k(p as u64, 3), p * p * (p * p - 1));
        assert_eq!(e_k(p as u64, 4), p * p * p * (p * p - 1));
        for n in [2u32, 3, 4] {
            let rows = width_tables(p as u64, n).unwrap();
            assert!(!rows.is_empty());
            for r in &rows {
                assert!(r.mult > 0, "{}", r.pair);
                assert_eq!(r.width() * rat(e_k(p as u64, n), 1), rat(r.mult, 1), "{}", r.pair);
            }
        }
    }
}

/// 7. Dual graphs for 13 ≤ p ≤ 100: level 4 connected with Betti
/// 7(ss−1); levels 3 and 2 give 5(ss−1) and 3(ss−1).
#[test]
fn dual_graph_betti_numbers() {
    let mut p = 13u64;
    while p <= 100 {
        if is_prime(p) {
            let ss = SsLocus::compute(p).unwrap().count() as i64;
            for (n, factor) in [(4u32, 7i64), (3, 5), (2, 3)] {
                let g = build_dual_graph(p, n).unwrap();
                assert!(g.is_connected(), "p = {p} n = {n}");
                assert_eq!(g.betti(), factor * (ss - 1), "p = {p} n = {n}");
            }
        }
        p += 2;
    }
}

/// 8. Genus bookkeeping Σ g(C) + b(Γ) = g(X₀(pⁿ)) for 13 ≤ p ≤ 100 and
/// n ∈ {2,3,4}, with the level-4 anchors, plus the closed-form display
/// discrepancy flagged in the ledger.
#[test]
fn genus_bookkeeping_identity() {
    let anchors = [(13u64, 4u32, 2472i64), (23, 4, 24059), (13, 3, 184), (13, 2, 8)];
    for (p, n, g) in anchors {
        let l = bookkeeping(p, n).unwrap();
        assert!(l.holds);
        assert_eq!(l.total, g);
        assert_eq!(l.reference_genus, g);
    }
    let mut p = 13u64;
    while p <= 100 {
        if is_prime(p) {
            for n in [2u32, 3, 4] {
                let l = bookkeeping(p, n).unwrap();
                assert!(l.holds, "p = {p} n = {n}: {} vs {}", l.total, l.reference_genus);
                if n == 4 {
                    assert!(l.display_note.is_some(), "display discrepancy not flagged");
                }
            }
        }
        p += 2;
    }
}
