//! The supersingular locus in characteristic p.
//!
//! The Hasse (Deuring) polynomial H(λ) = Σ C((p−1)/2, i)² λ^i cuts out
//! the supersingular values of the Legendre parameter; all of its roots
//! lie in F_{p²} and push forward to the supersingular j-invariants via
//! j = 2⁸ (λ² − λ + 1)³ / (λ² (λ − 1)²).
//!
//! Each point carries its half-automorphism count i(A) = |Aut(A)|/2
//! (3 at j = 0, 2 at j = 1728, 1 otherwise), and the locus satisfies the
//! Eichler mass identity Σ 1/(2·i(A)) = (p − 1)/24.

use crate::arith::{pow_mod, rat, Fq2, Fq2Field, Rat};
use crate::error::{Error, Result};

/// A supersingular point: j-invariant in F_{p²} and i(A) = |Aut|/2.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SupersingularPoint {
    pub j: Fq2,
    /// i(A) ∈ {1, 2, 3}: 3 at j = 0, 2 at j = 1728, 1 otherwise.
    pub half_aut: u64,
}

/// The full supersingular locus for a prime p ≥ 5.
#[derive(Debug, Clone)]
pub struct SsLocus {
    pub p: u64,
    pub field: Fq2Field,
    pub points: Vec<SupersingularPoint>,
}

/// Coefficients of H(λ) = Σ_{i≤(p−1)/2} C((p−1)/2, i)² λ^i over F_p.
pub fn hasse_polynomial(p: u64) -> Vec<u64> {
    let h = (p - 1) / 2;
    let mut binom: u64 = 1; // C(h, 0)
    let mut coeffs = Vec::with_capacity(h as usize + 1);
    for i in 0..=h {
        coeffs.push(binom * binom % p);
        if i < h {
            // C(h, i+1) = C(h, i)·(h−i)/(i+1) mod p
            binom = binom * ((h - i) % p) % p;
            binom = binom * pow_mod(i + 1, p - 2, p) % p;
        }
    }
    coeffs
}

/// All roots of the Hasse polynomial in F_{p²}, by exhaustive scan.
/// There are exactly (p−1)/2 of them, all simple.
pub fn hasse_roots(field: &Fq2Field) -> Vec<Fq2> {
    let coeffs = hasse_polynomial(field.p);
    let eval = |x: Fq2| -> Fq2 {
        let mut acc = Fq2::ZERO;
        for &c in coeffs.iter().rev() {
            acc = field.add(field.mul(acc, x), Fq2::from_base(c));
        }
        acc
    };
    field.all_elements().filter(|&x| eval(x).is_zero()).collect()
}

/// j-invariant of the Legendre curve y² = x(x−1)(x−λ).
pub fn legendre_j(field: &Fq2Field, lam: Fq2) -> Fq2 {
    let one = Fq2::ONE;
    let l2 = field.mul(lam, lam);
    let num_core = field.add(field.sub(l2, lam), one); // λ² − λ + 1
    let num = field.mul(
        Fq2::from_base(256 % field.p),
        field.pow(num_core, 3),
    );
    let den = field.mul(l2, field.pow(field.sub(lam, one), 2));
    field.mul(num, field.inv(den))
}

impl SsLocus {
    pub fn compute(p: u64) -> Result<SsLocus> {
        if p < 5 {
            return Err(Error::Usage(format!(
                "supersingular locus needs p >= 5, got {p}"
            )));
        }
        let field = Fq2Field::new(p)?;
        let roots = hasse_roots(&field);
        if roots.len() != ((p - 1) / 2) as usize {
            return Err(Error::Bookkeeping(format!(
                "Hasse polynomial for p = {p} has {} roots in F_p2, expected {}",
                roots.len(),
                (p - 1) / 2
            )));
        }
        let j1728 = Fq2::from_base(1728 % p);
        let mut js: Vec<Fq2> = Vec::new();
        for lam in roots {
            let j = legendre_j(&field, lam);
            if !js.contains(&j) {
                js.push(j);
            }
        }
        js.sort_by_key(|j| (j.b, j.a));
        let points = js
            .into_iter()
            .map(|j| SupersingularPoint {
                j,
                half_aut: if j.is_zero() {
                    3
                } else if j == j1728 {
                    2
                } else {
                    1
                },
            })
            .collect();
        let locus = SsLocus { p, field, points };
        if !locus.mass_identity_holds() {
            return Err(Error::Bookkeeping(format!(
                "mass identity fails for p = {p}"
            )));
        }
        Ok(locus)
    }

    /// Σ 1/(2 i(A)) over the locus.
    pub fn mass(&self) -> Rat {
        self.points
            .iter()
            .map(|pt| rat(1, 2 * pt.half_aut as i64))
            .fold(rat(0, 1), |a, b| a + b)
    }

    /// Eichler: Σ 1/(2 i(A)) = (p − 1)/24.
    pub fn mass_identity_holds(&self) -> bool {
        self.mass() == rat(self.p as i64 - 1, 24)
    }

    pub fn count(&self) -> usize {
        self.points.len()
    }

    /// Smallest supersingular j lying in the prime field and distinct
    /// from 0 and 1728 — the recentring point for the Kronecker shift.
    pub fn base_field_generic_j(&self) -> Option<u64> {
        let j1728 = 1728 % self.p;
        self.points
            .iter()
            .filter(|pt| pt.j.in_base() && pt.j.a != 0 && pt.j.a != j1728)
            .map(|pt| pt.j.a)
            .min()
    }

    /// i(A) for a j-class selector: 3 (j=0), 2 (j=1728), or 1.
    pub fn half_aut_of(&self, j: Fq2) -> Option<u64> {
        self.points.iter().find(|pt| pt.j == j).map(|pt| pt.half_aut)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Point count of y² = x(x−1)(x−λ) over F_p (λ ∈ F_p). The curve is
    /// supersingular iff the trace vanishes, i.e. #E(F_p) = p + 1.
    fn legendre_count_fp(p: u64, lam: u64) -> u64 {
        let mut n = 1; // point at infinity
        for x in 0..p {
            let rhs = x * ((x + p - 1) % p) % p * ((x + p - lam) % p) % p;
            if rhs == 0 {
                n += 1;
            } else if pow_mod(rhs, (p - 1) / 2, p) == 1 {
                n += 2;
            }
        }
        n
    }

    #[test]
    fn hasse_roots_match_point_count_oracle() {
        for p in [13u64, 17, 19, 23] {
            let coeffs = hasse_polynomial(p);
            for lam in 2..p {
                let h: u64 = coeffs
                    .iter()
                    .rev()
                    .fold(0, |acc, &c| (acc * lam + c) % p);
                let ss_by_count = legendre_count_fp(p, lam) == p + 1;
                assert_eq!(h == 0, ss_by_count, "p={p} lambda={lam}");
            }
        }
    }

    #[test]
    fn locus_for_13_is_just_5() {
        let l = SsLocus::compute(13).unwrap();
        assert_eq!(l.count(), 1);
        assert_eq!(l.points[0].j, Fq2::from_base(5));
        assert_eq!(l.points[0].half_aut, 1);
        assert_eq!(l.base_field_generic_j(), Some(5));
    }

    #[test]
    fn locus_for_23_has_all_three_classes() {
        let l = SsLocus::compute(23).unwrap();
        let js: Vec<Fq2> = l.points.iter().map(|pt| pt.j).collect();
        assert!(js.contains(&Fq2::from_base(0)));
        assert!(js.contains(&Fq2::from_base(1728 % 23))); // = 3
        assert!(js.contains(&Fq2::from_base(19)));
        assert_eq!(l.count(), 3);
        assert_eq!(l.mass(), rat(22, 24));
        assert_eq!(l.base_field_generic_j(), Some(19));
    }

    #[test]
    fn mass_identity_up_to_two_hundred() {
        let mut p = 13u64;
        while p <= 200 {
            if crate::arith::is_prime(p) {
                let l = SsLocus::compute(p).unwrap();
                assert!(l.mass_identity_holds(), "p = {p}");
                // class membership criteria
                let has0 = l.points.iter().any(|pt| pt.j.is_zero());
                let has1728 = l
                    .points
                    .iter()
                    .any(|pt| pt.j == Fq2::from_base(1728 % p));
                assert_eq!(has0, p % 3 == 2, "j=0 iff p = 2 mod 3, p={p}");
                assert_eq!(has1728, p % 4 == 3, "j=1728 iff p = 3 mod 4, p={p}");
            }
            p += 2;
        }
    }
}
