//! Truncated Laurent series with arbitrary-precision integer
//! coefficients, and the classical q-expansions (E₄, Δ, j) they feed.
//!
//! A [`QSeries`] represents Σ_{k ≥ lead} c_k q^k with every coefficient
//! known for lead ≤ k < prec. The `prec` bound is the first *unknown*
//! exponent; arithmetic tracks it pessimistically so precision is never
//! overstated.

use crate::error::{Error, Result};
use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

/// A truncated Laurent series in one variable over Z.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QSeries {
    /// Exponent of the first stored coefficient (may be negative).
    pub lead: i64,
    /// Coefficients of q^{lead}, q^{lead+1}, …
    pub coeffs: Vec<BigInt>,
    /// First unknown exponent: coefficients are known for lead ≤ k < prec.
    pub prec: i64,
}

impl QSeries {
    pub fn new(lead: i64, coeffs: Vec<BigInt>) -> QSeries {
        let prec = lead + coeffs.len() as i64;
        QSeries { lead, coeffs, prec }
    }

    /// The zero series, known to the given precision.
    pub fn zero(prec: i64) -> QSeries {
        QSeries {
            lead: prec,
            coeffs: vec![],
            prec,
        }
    }

    pub fn coeff(&self, k: i64) -> BigInt {
        if k < self.lead || k >= self.prec {
            return BigInt::zero();
        }
        // prec may exceed the stored range: trailing coefficients are
        // known to be zero.
        let i = (k - self.lead) as usize;
        if i >= self.coeffs.len() {
            return BigInt::zero();
        }
        self.coeffs[i].clone()
    }

    /// One past the last stored exponent; the empty series stores nothing.
    fn end(&self) -> i64 {
        if self.coeffs.is_empty() {
            i64::MIN
        } else {
            self.lead + self.coeffs.len() as i64
        }
    }

    /// Exponent of the first nonzero known coefficient, if any.
    pub fn order(&self) -> Option<i64> {
        self.coeffs
            .iter()
            .position(|c| !c.is_zero())
            .map(|i| self.lead + i as i64)
    }

    fn normalized(mut self) -> QSeries {
        while let Some(first) = self.coeffs.first() {
            if first.is_zero() {
                self.coeffs.remove(0);
                self.lead += 1;
            } else {
                break;
            }
        }
        while self.lead + self.coeffs.len() as i64 > self.prec {
            self.coeffs.pop();
        }
        self
    }

    pub fn add(&self, other: &QSeries) -> QSeries {
        let prec = self.prec.min(other.prec);
        let lead = self.lead.min(other.lead);
        let end = self.end().max(other.end()).min(prec);
        let mut coeffs = vec![BigInt::zero(); (end - lead).max(0) as usize];
        for (i, c) in coeffs.iter_mut().enumerate() {
            let k = lead + i as i64;
            *c = self.coeff(k) + other.coeff(k);
        }
        QSeries { lead, coeffs, prec }.normalized()
    }

    pub fn sub(&self, other: &QSeries) -> QSeries {
        self.add(&other.scale(&BigInt::from(-1)))
    }

    pub fn scale(&self, s: &BigInt) -> QSeries {
        QSeries {
            lead: self.lead,
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
            prec: self.prec,
        }
        .normalized()
    }

    /// Substitute q ↦ q^k (exponent dilation), k ≥ 1.
    pub fn dilate(&self, k: i64) -> QSeries {
        assert!(k >= 1);
        let lead = self.lead * k;
        let mut coeffs = vec![BigInt::zero(); ((self.coeffs.len() as i64 - 1) * k + 1).max(0) as usize];
        for (i, c) in self.coeffs.iter().enumerate() {
            coeffs[i * k as usize] = c.clone();
        }
        QSeries {
            lead,
            coeffs,
            prec: self.prec * k,
        }
        .normalized()
    }

    /// Product, truncated to the honestly known range, additionally
    /// capped at exponent `cap` (exclusive) to keep work bounded.
    pub fn mul_capped(&self, other: &QSeries, cap: i64) -> QSeries {
        // Precision of a product of truncations: min over cross terms
        // (conservative: uses leads, not orders). Saturating keeps
        // effectively-unlimited precisions from overflowing.
        let prec = self
            .prec
            .saturating_add(other.lead)
            .min(other.prec.saturating_add(self.lead))
            .min(cap);
        if self.coeffs.is_empty() || other.coeffs.is_empty() {
            return QSeries::zero(prec);
        }
        let lead = self.lead + other.lead;
        // Products of the stored ranges reach exponent end_a + end_b - 2.
        let poly_end = self.end() + other.end() - 1;
        let n = (poly_end.min(prec) - lead).max(0) as usize;
        let mut coeffs = vec![BigInt::zero(); n];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                let k = i + j;
                if k >= n {
                    break;
                }
                coeffs[k] += a * b;
            }
        }
        QSeries { lead, coeffs, prec }.normalized()
    }

    pub fn mul(&self, other: &QSeries) -> QSeries {
        self.mul_capped(other, i64::MAX)
    }

    /// Inverse of a series whose leading coefficient is ±1.
    pub fn invert(&self) -> QSeries {
        let lead = self.order().expect("inverting a zero series");
        let lc = self.coeff(lead);
        assert!(
            lc.clone().abs().is_one(),
            "series inversion requires leading coefficient ±1"
        );
        let n = (self.prec - lead) as usize;
        let mut inv = vec![BigInt::zero(); n];
        inv[0] = lc.clone(); // 1/±1 = ±1
        for k in 1..n {
            // coefficient of q^{lead + k} in self * inv must vanish
            let mut s = BigInt::zero();
            for j in 0..k {
                s += self.coeff(lead + (k - j) as i64) * &inv[j];
            }
            inv[k] = -&lc * s;
        }
        QSeries::new(-lead, inv)
    }
}

/// Eisenstein series E₄ = 1 + 240 Σ σ₃(n) qⁿ to n_terms coefficients.
pub fn eisenstein_e4(n_terms: usize) -> QSeries {
    let mut coeffs = vec![BigInt::zero(); n_terms];
    coeffs[0] = BigInt::one();
    // sigma_3 by divisor sieve
    let mut sigma3 = vec![0u128; n_terms];
    for d in 1..n_terms {
        let d3 = (d as u128).pow(3);
        let mut m = d;
        while m < n_terms {
            sigma3[m] += d3;
            m += d;
        }
    }
    for (n, s) in sigma3.iter().enumerate().skip(1) {
        coeffs[n] = BigInt::from(240u32) * BigInt::from(*s);
    }
    QSeries::new(0, coeffs)
}

/// Δ = q Π_{n≥1} (1 − qⁿ)²⁴ to n_terms coefficients (starting at q¹).
pub fn delta(n_terms: usize) -> QSeries {
    // Build Π (1 - q^n) via Euler's pentagonal number theorem, then ^24.
    let mut euler = vec![BigInt::zero(); n_terms];
    euler[0] = BigInt::one();
    let mut k: i64 = 1;
    loop {
        let g1 = k * (3 * k - 1) / 2;
        let g2 = k * (3 * k + 1) / 2;
        if g1 as usize >= n_terms && g2 as usize >= n_terms {
            break;
        }
        let sign = if k % 2 == 0 { BigInt::one() } else { -BigInt::one() };
        if (g1 as usize) < n_terms {
            euler[g1 as usize] += &sign;
        }
        if (g2 as usize) < n_terms {
            euler[g2 as usize] += &sign;
        }
        k += 1;
    }
    let e = QSeries::new(0, euler);
    // e^24 by repeated squaring: e2 = e^2, e3 = e2^2 = e^4, ... capped.
    let cap = n_terms as i64;
    let e2 = e.mul_capped(&e, cap);
    let e4 = e2.mul_capped(&e2, cap);
    let e8 = e4.mul_capped(&e4, cap);
    let e16 = e8.mul_capped(&e8, cap);
    let e24 = e16.mul_capped(&e8, cap);
    // shift by q^1
    QSeries {
        lead: e24.lead + 1,
        coeffs: e24.coeffs,
        prec: e24.prec + 1,
    }
}

/// The modular j-function j = E₄³/Δ = q⁻¹ + 744 + 196884 q + …,
/// with n_terms known coefficients starting at q⁻¹.
pub fn j_qexpansion(n_terms: usize) -> Result<QSeries> {
    if n_terms < 1 {
        return Err(Error::Precision { needed: 1, have: 0 });
    }
    // j has exponents -1 .. n_terms-2; we need E4^3 and 1/Delta to
    // exponent n_terms-2, so n_terms+1 coefficients of each input.
    let n = n_terms + 1;
    let e4 = eisenstein_e4(n);
    let e4_3 = e4.mul_capped(&e4, n as i64).mul_capped(&e4, n as i64);
    let dinv = delta(n).invert();
    let j = e4_3.mul(&dinv);
    debug_assert_eq!(j.order(), Some(-1));
    Ok(j)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn j_first_terms_match_classical_values() {
        // Classical coefficients: q^-1 + 744 + 196884 q + 21493760 q^2 + 864299970 q^3.
        let j = j_qexpansion(6).unwrap();
        assert_eq!(j.coeff(-1), BigInt::from(1));
        assert_eq!(j.coeff(0), BigInt::from(744));
        assert_eq!(j.coeff(1), BigInt::from(196884));
        assert_eq!(j.coeff(2), BigInt::from(21493760u64));
        assert_eq!(j.coeff(3), BigInt::from(864299970u64));
    }

    #[test]
    fn j_times_delta_is_e4_cubed() {
        let n = 40;
        let j = j_qexpansion(n).unwrap();
        let d = delta(n);
        let e4 = eisenstein_e4(n);
        let lhs = j.mul(&d);
        let rhs = e4.mul_capped(&e4, n as i64).mul_capped(&e4, n as i64);
        for k in 0..(n as i64 - 4) {
            assert_eq!(lhs.coeff(k), rhs.coeff(k), "q^{k}");
        }
    }

    #[test]
    fn delta_first_terms() {
        // Delta = q - 24q^2 + 252q^3 - 1472q^4 + ...
        let d = delta(6);
        assert_eq!(d.coeff(1), BigInt::from(1));
        assert_eq!(d.coeff(2), BigInt::from(-24));
        assert_eq!(d.coeff(3), BigInt::from(252));
        assert_eq!(d.coeff(4), BigInt::from(-1472));
    }

    #[test]
    fn invert_roundtrip() {
        let d = delta(30);
        let prod = d.mul(&d.invert());
        assert_eq!(prod.coeff(0), BigInt::from(1));
        for k in 1..20 {
            assert_eq!(prod.coeff(k), BigInt::zero());
        }
    }
}
