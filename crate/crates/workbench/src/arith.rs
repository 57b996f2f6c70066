//! Exact arithmetic foundations.
//!
//! Three layers, no floating point anywhere:
//!
//! * [`Fq2`] / [`Fq2Field`] — the quadratic residue field F_{p²},
//!   realized as F_p\[ω\]/(ω² − d) for the smallest non-residue d;
//! * [`WittTrunc`] / [`WittRing`] — its ring of Witt vectors truncated to
//!   absolute precision p^M, realized as (Z/p^M)\[ω̂\]/(ω̂² − d);
//! * [`Rat`] — arbitrary-precision rationals, the sole representation of
//!   valuations and widths.

use crate::error::{Error, Result};
use num_bigint::BigInt;
use num_rational::Ratio;

/// Arbitrary-precision rational, used for all valuations and widths.
pub type Rat = Ratio<BigInt>;

/// Convenience constructor for a `Rat` from machine integers.
pub fn rat(num: i64, den: i64) -> Rat {
    Rat::new(BigInt::from(num), BigInt::from(den))
}

/// Deterministic primality check by trial division — adequate at desk
/// scale (inputs stay below a few hundred).
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n % 2 == 0 {
        return n == 2;
    }
    let mut d = 3u64;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

/// Modular exponentiation with u128 intermediates.
pub fn pow_mod(base: u64, mut exp: u64, modulus: u64) -> u64 {
    let mut acc: u128 = 1;
    let m = modulus as u128;
    let mut b = (base % modulus) as u128;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * b % m;
        }
        b = b * b % m;
        exp >>= 1;
    }
    acc as u64
}

/// An element a + bω of F_{p²}; the owning [`Fq2Field`] carries (p, d).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Fq2 {
    pub a: u64,
    pub b: u64,
}

impl Fq2 {
    pub const ZERO: Fq2 = Fq2 { a: 0, b: 0 };
    pub const ONE: Fq2 = Fq2 { a: 1, b: 0 };

    pub fn from_base(a: u64) -> Fq2 {
        Fq2 { a, b: 0 }
    }

    pub fn is_zero(&self) -> bool {
        self.a == 0 && self.b == 0
    }

    /// True when the element lies in the prime field F_p.
    pub fn in_base(&self) -> bool {
        self.b == 0
    }
}

/// Descriptor of F_{p²} = F_p\[ω\]/(ω² − d), d the smallest non-residue.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Fq2Field {
    pub p: u64,
    pub d: u64,
}

impl Fq2Field {
    /// Build the field descriptor for an odd prime p, scanning for the
    /// smallest positive quadratic non-residue (deterministic).
    pub fn new(p: u64) -> Result<Fq2Field> {
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        assert!(p > 2, "F_{{p^2}} arithmetic requires an odd prime");
        let mut d = 2;
        while pow_mod(d, (p - 1) / 2, p) != p - 1 {
            d += 1;
        }
        Ok(Fq2Field { p, d })
    }

    pub fn el(&self, a: i64, b: i64) -> Fq2 {
        let p = self.p as i64;
        Fq2 {
            a: (a.rem_euclid(p)) as u64,
            b: (b.rem_euclid(p)) as u64,
        }
    }

    pub fn add(&self, x: Fq2, y: Fq2) -> Fq2 {
        Fq2 {
            a: (x.a + y.a) % self.p,
            b: (x.b + y.b) % self.p,
        }
    }

    pub fn sub(&self, x: Fq2, y: Fq2) -> Fq2 {
        Fq2 {
            a: (x.a + self.p - y.a) % self.p,
            b: (x.b + self.p - y.b) % self.p,
        }
    }

    pub fn neg(&self, x: Fq2) -> Fq2 {
        Fq2 {
            a: (self.p - x.a) % self.p,
            b: (self.p - x.b) % self.p,
        }
    }

    pub fn mul(&self, x: Fq2, y: Fq2) -> Fq2 {
        let p = self.p as u128;
        let (xa, xb, ya, yb) = (x.a as u128, x.b as u128, y.a as u128, y.b as u128);
        let a = (xa * ya + xb * yb % p * (self.d as u128)) % p;
        let b = (xa * yb + xb * ya) % p;
        Fq2 {
            a: a as u64,
            b: b as u64,
        }
    }

    pub fn pow(&self, x: Fq2, mut e: u64) -> Fq2 {
        let mut acc = Fq2::ONE;
        let mut base = x;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    /// Multiplicative inverse via the norm map N(a+bω) = a² − d·b² ∈ F_p.
    pub fn inv(&self, x: Fq2) -> Fq2 {
        assert!(!x.is_zero(), "inverse of zero in F_{{p^2}}");
        let p = self.p;
        let a2 = (x.a as u128 * x.a as u128 % p as u128) as u64;
        let db2 = ((self.d as u128 * x.b as u128 % p as u128) * x.b as u128 % p as u128) as u64;
        let norm = (a2 + p - db2) % p;
        let ninv = pow_mod(norm, p - 2, p);
        let conj = Fq2 {
            a: x.a,
            b: (p - x.b) % p,
        };
        self.mul(conj, Fq2::from_base(ninv))
    }

    /// The p-power Frobenius x ↦ x^p; an order-2 automorphism, computed
    /// as conjugation since ω^p = −ω (d is a non-residue).
    pub fn frobenius(&self, x: Fq2) -> Fq2 {
        Fq2 {
            a: x.a,
            b: (self.p - x.b) % self.p,
        }
    }

    /// The unique p-th root in F_{p²}: the inverse of Frobenius, which is
    /// Frobenius itself because it has order 2.
    pub fn pth_root(&self, x: Fq2) -> Fq2 {
        self.frobenius(x)
    }

    /// Iterator over all p² field elements (scan order: a + bω, a fast).
    pub fn all_elements(&self) -> impl Iterator<Item = Fq2> + '_ {
        let p = self.p;
        (0..p).flat_map(move |b| (0..p).map(move |a| Fq2 { a, b }))
    }
}

/// An element a + bω̂ of W(F_{p²}) mod p^M.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WittTrunc {
    pub a: u64,
    pub b: u64,
}

impl WittTrunc {
    pub const ZERO: WittTrunc = WittTrunc { a: 0, b: 0 };
    pub const ONE: WittTrunc = WittTrunc { a: 1, b: 0 };

    pub fn from_base(a: u64) -> WittTrunc {
        WittTrunc { a, b: 0 }
    }

    pub fn is_zero(&self) -> bool {
        self.a == 0 && self.b == 0
    }
}

/// Descriptor of W(F_{p²})/p^M = (Z/p^M)\[ω̂\]/(ω̂² − d), sharing d with
/// the residue field so that reduction mod p is coefficientwise.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WittRing {
    pub p: u64,
    pub m: u32,
    /// p^M, the modulus.
    pub pm: u64,
    pub d: u64,
}

impl WittRing {
    pub fn new(fq2: Fq2Field, m: u32) -> WittRing {
        let pm = fq2.p.checked_pow(m).expect("p^M overflows u64");
        WittRing {
            p: fq2.p,
            m,
            pm,
            d: fq2.d,
        }
    }

    pub fn fq2(&self) -> Fq2Field {
        Fq2Field { p: self.p, d: self.d }
    }

    pub fn el(&self, a: i64, b: i64) -> WittTrunc {
        let pm = self.pm as i64;
        WittTrunc {
            a: a.rem_euclid(pm) as u64,
            b: b.rem_euclid(pm) as u64,
        }
    }

    pub fn add(&self, x: WittTrunc, y: WittTrunc) -> WittTrunc {
        WittTrunc {
            a: (x.a + y.a) % self.pm,
            b: (x.b + y.b) % self.pm,
        }
    }

    pub fn sub(&self, x: WittTrunc, y: WittTrunc) -> WittTrunc {
        WittTrunc {
            a: (x.a + self.pm - y.a) % self.pm,
            b: (x.b + self.pm - y.b) % self.pm,
        }
    }

    pub fn neg(&self, x: WittTrunc) -> WittTrunc {
        WittTrunc {
            a: (self.pm - x.a) % self.pm,
            b: (self.pm - x.b) % self.pm,
        }
    }

    pub fn mul(&self, x: WittTrunc, y: WittTrunc) -> WittTrunc {
        let m = self.pm as u128;
        let (xa, xb, ya, yb) = (x.a as u128, x.b as u128, y.a as u128, y.b as u128);
        let a = (xa * ya % m + xb * yb % m * (self.d as u128) % m) % m;
        let b = (xa * yb % m + xb * ya % m) % m;
        WittTrunc {
            a: a as u64,
            b: b as u64,
        }
    }

    pub fn pow(&self, x: WittTrunc, mut e: u64) -> WittTrunc {
        let mut acc = WittTrunc::ONE;
        let mut base = x;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    /// Reduction mod p onto the residue field — a ring morphism.
    pub fn reduce(&self, x: WittTrunc) -> Fq2 {
        Fq2 {
            a: x.a % self.p,
            b: x.b % self.p,
        }
    }

    /// p-adic valuation of x, capped at M. Valuation of a + bω̂ in the
    /// unramified extension is min(v_p(a), v_p(b)).
    pub fn valuation(&self, x: WittTrunc) -> u32 {
        let vp = |mut n: u64| -> u32 {
            if n == 0 {
                return self.m;
            }
            let mut v = 0;
            while n % self.p == 0 {
                n /= self.p;
                v += 1;
            }
            v
        };
        vp(x.a).min(vp(x.b))
    }

    pub fn is_unit(&self, x: WittTrunc) -> bool {
        self.valuation(x) == 0
    }

    /// Inverse of a unit by lifting the residue inverse with Newton
    /// iteration y ← y(2 − xy) (doubles p-adic accuracy each step).
    pub fn inv(&self, x: WittTrunc) -> WittTrunc {
        assert!(self.is_unit(x), "inverse of a non-unit in W(F_{{p^2}})/p^M");
        let f = self.fq2();
        let r = f.inv(self.reduce(x));
        let mut y = WittTrunc { a: r.a, b: r.b };
        let two = WittTrunc::from_base(2);
        let mut k = 1;
        while k < self.m {
            y = self.mul(y, self.sub(two, self.mul(x, y)));
            k *= 2;
        }
        y
    }

    /// Teichmüller lift: the unique t ≡ r mod p with t^{p²} = t mod p^M,
    /// computed by iterating x ← x^{p²} to its fixed point.
    pub fn teichmuller(&self, r: Fq2) -> WittTrunc {
        let mut t = WittTrunc { a: r.a, b: r.b };
        for _ in 0..self.m {
            t = self.pow(t, self.p * self.p);
        }
        t
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rng_vals(p: u64, n: usize) -> Vec<Fq2> {
        // Small deterministic LCG is plenty for algebraic-identity tests.
        let mut s = 0x9e3779b97f4a7c15u64;
        (0..n)
            .map(|_| {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                Fq2 {
                    a: (s >> 33) % p,
                    b: (s >> 7) % p,
                }
            })
            .collect()
    }

    #[test]
    fn smallest_nonresidue_examples() {
        assert_eq!(Fq2Field::new(13).unwrap().d, 2);
        assert_eq!(Fq2Field::new(17).unwrap().d, 3);
        assert_eq!(Fq2Field::new(19).unwrap().d, 2);
    }

    #[test]
    fn field_axioms_randomized() {
        for p in [13u64, 17, 19] {
            let f = Fq2Field::new(p).unwrap();
            let xs = rng_vals(p, 60);
            for w in xs.chunks(3) {
                let (x, y, z) = (w[0], w[1], w[2]);
                assert_eq!(f.mul(x, f.mul(y, z)), f.mul(f.mul(x, y), z));
                assert_eq!(f.mul(x, f.add(y, z)), f.add(f.mul(x, y), f.mul(x, z)));
                if !x.is_zero() {
                    assert_eq!(f.mul(x, f.inv(x)), Fq2::ONE);
                }
            }
        }
    }

    #[test]
    fn frobenius_is_pth_power_and_order_two() {
        let f = Fq2Field::new(13).unwrap();
        for x in rng_vals(13, 100) {
            assert_eq!(f.frobenius(x), f.pow(x, 13), "direct exponentiation oracle");
            assert_eq!(f.frobenius(f.frobenius(x)), x);
            if x.in_base() {
                assert_eq!(f.frobenius(x), x, "fixed field");
            }
        }
        // p=13, d=2: omega^13 = -omega since 2^6 = 64 = -1 mod 13.
        let omega = f.el(0, 1);
        assert_eq!(f.frobenius(omega), f.neg(omega));
    }

    #[test]
    fn pth_root_inverts_pth_power() {
        let f = Fq2Field::new(13).unwrap();
        assert_eq!(f.pth_root(Fq2::ZERO), Fq2::ZERO);
        assert_eq!(f.pth_root(Fq2::ONE), Fq2::ONE);
        for x in rng_vals(13, 50) {
            assert_eq!(f.pow(f.pth_root(x), 13), x);
        }
    }

    #[test]
    fn witt_ring_morphism_and_units() {
        let f = Fq2Field::new(13).unwrap();
        let w = WittRing::new(f, 4);
        let xs = rng_vals(13 * 13 * 13, 40);
        for pair in xs.chunks(2) {
            let x = WittTrunc {
                a: pair[0].a % w.pm,
                b: pair[0].b % w.pm,
            };
            let y = WittTrunc {
                a: pair[1].a % w.pm,
                b: pair[1].b % w.pm,
            };
            assert_eq!(w.reduce(w.mul(x, y)), f.mul(w.reduce(x), w.reduce(y)));
            assert_eq!(w.reduce(w.add(x, y)), f.add(w.reduce(x), w.reduce(y)));
            if w.is_unit(x) {
                assert_eq!(w.mul(x, w.inv(x)), WittTrunc::ONE);
            }
        }
    }

    #[test]
    fn teichmuller_fixed_point_and_multiplicativity() {
        let f = Fq2Field::new(13).unwrap();
        let w = WittRing::new(f, 3);
        assert_eq!(w.teichmuller(Fq2::ZERO), WittTrunc::ZERO);
        assert_eq!(w.teichmuller(Fq2::ONE), WittTrunc::ONE);
        let t5 = w.teichmuller(Fq2::from_base(5));
        assert_eq!(w.pow(t5, 169), t5, "t^(p^2) = t mod p^3");
        assert_eq!(t5.a % 13, 5, "t = 5 mod 13");
        for x in rng_vals(13, 30) {
            if x.is_zero() {
                continue;
            }
            let tx = w.teichmuller(x);
            let tinv = w.teichmuller(f.inv(x));
            assert_eq!(w.mul(tx, tinv), WittTrunc::ONE, "multiplicative section");
        }
    }
}
