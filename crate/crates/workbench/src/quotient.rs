//! Arithmetic in a quotient ring R = L[g]/(m(g)) over the ramified tower
//! L, for a monic modulus m of degree p whose reduction is a single
//! p-th power (z − r̄)^p over F_{p²}.
//!
//! Such rings host the wildly ramified chart centers of the singular
//! residue classes: the center is a root of a degree-p Eisenstein-like
//! polynomial with no root in L, so instead of approximating it we
//! adjoin it exactly and compute with coordinate vectors in the basis
//! 1, g, …, g^{p−1}.
//!
//! R is local: an element is a unit iff its image under g ↦ r̄ in F_{p²}
//! is nonzero. Units are inverted by the division-free Newton iteration
//! y ← y(2 − xy) (the error 1 − xy squares exactly each step), and n-th
//! roots of units (n prime to p) by the analogous inverse-root
//! iteration, both seeded from the residue field.
//!
//! Valuations of coordinates are exact, but cancellation between basis
//! coordinates is invisible to them; `val_floor` therefore returns a
//! *sound lower bound* (every coordinate is at least this deep, counting
//! an invisible coordinate at its precision). Congruence checks built on
//! it can fail spuriously, never pass spuriously.

use crate::arith::Fq2;
use crate::error::{Error, Result};
use crate::tower::{TowerElement, TowerField};

/// R = L[g]/(m(g)), m monic of degree `deg` with m̄(z) = (z − r̄)^deg.
#[derive(Debug, Clone)]
pub struct QuotientRing<'a> {
    pub f: &'a TowerField,
    /// Lower coefficients of the monic modulus: m(z) = z^deg + Σ_j lower[j] z^j.
    lower: Vec<TowerElement>,
    /// Residue of the generator: the unique root of m̄ over F_{p²}.
    pub gen_res: Fq2,
    pub deg: usize,
}

/// Element of R as coordinates in the basis 1, g, …, g^{deg−1}.
#[derive(Debug, Clone)]
pub struct RingElt {
    pub c: Vec<TowerElement>,
}

impl<'a> QuotientRing<'a> {
    /// Build R from the monic modulus (given by its lower coefficients)
    /// and the expected residue root. Verifies m̄(z) = (z − r̄)^deg.
    pub fn new(f: &'a TowerField, lower: Vec<TowerElement>, gen_res: Fq2) -> Result<QuotientRing<'a>> {
        let deg = lower.len();
        assert!(deg >= 2);
        let q = &f.fq2;
        // (z − r̄)^deg over F_{p²}: when deg = p this is z^p − r̄^p, but we
        // check every coefficient so smaller moduli are welcome too.
        let mut bin = vec![Fq2::ZERO; deg + 1];
        bin[0] = Fq2::ONE;
        for k in 1..=deg {
            for j in (1..=k).rev() {
                bin[j] = q.sub(bin[j - 1], q.mul(gen_res, bin[j]));
            }
            bin[0] = q.mul(q.neg(gen_res), bin[0]);
        }
        for (j, c) in lower.iter().enumerate() {
            let want = bin[j];
            let got = f.residue_at(c, 0)?;
            if got != want {
                return Err(Error::Verification {
                    check: "quotient modulus residue".into(),
                    seed: 0,
                    detail: format!("coefficient {j} reduces wrongly"),
                });
            }
        }
        Ok(QuotientRing { f, lower, gen_res, deg })
    }

    pub fn zero(&self) -> RingElt {
        RingElt {
            c: vec![self.f.zero(); self.deg],
        }
    }

    pub fn one(&self) -> RingElt {
        self.from_tower(self.f.one())
    }

    /// Embed a tower element as the constant coordinate.
    pub fn from_tower(&self, t: TowerElement) -> RingElt {
        let mut x = self.zero();
        x.c[0] = t;
        x
    }

    /// The generator g (a root of the modulus).
    pub fn generator(&self) -> RingElt {
        let mut x = self.zero();
        x.c[1] = self.f.one();
        x
    }

    pub fn add(&self, x: &RingElt, y: &RingElt) -> RingElt {
        RingElt {
            c: x.c.iter().zip(&y.c).map(|(a, b)| self.f.add(a, b)).collect(),
        }
    }

    pub fn sub(&self, x: &RingElt, y: &RingElt) -> RingElt {
        RingElt {
            c: x.c.iter().zip(&y.c).map(|(a, b)| self.f.sub(a, b)).collect(),
        }
    }

    pub fn neg(&self, x: &RingElt) -> RingElt {
        RingElt {
            c: x.c.iter().map(|a| self.f.neg(a)).collect(),
        }
    }

    /// Scale every coordinate by a tower element.
    pub fn mul_tower(&self, x: &RingElt, t: &TowerElement) -> RingElt {
        RingElt {
            c: x.c.iter().map(|a| self.f.mul(a, t)).collect(),
        }
    }

    /// Multiply by π^s.
    pub fn shift_up(&self, x: &RingElt, s: i64) -> RingElt {
        RingElt {
            c: x.c.iter().map(|a| self.f.shift_up(a, s)).collect(),
        }
    }

    /// Divide by π^s; fails when a coordinate has smaller valuation.
    pub fn shift_down(&self, x: &RingElt, s: i64) -> Result<RingElt> {
        let c = x
            .c
            .iter()
            .map(|a| self.f.shift_down(a, s))
            .collect::<Result<Vec<_>>>()?;
        Ok(RingElt { c })
    }

    /// Convolution product reduced by the monic modulus.
    pub fn mul(&self, x: &RingElt, y: &RingElt) -> RingElt {
        let d = self.deg;
        let mut acc = vec![self.f.zero(); 2 * d - 1];
        for (i, xi) in x.c.iter().enumerate() {
            if self.f.is_invisible(xi) {
                continue;
            }
            for (j, yj) in y.c.iter().enumerate() {
                acc[i + j] = self.f.add(&acc[i + j], &self.f.mul(xi, yj));
            }
        }
        for k in (d..2 * d - 1).rev() {
            let t = acc[k].clone();
            for (j, mj) in self.lower.iter().enumerate() {
                acc[k - d + j] = self.f.sub(&acc[k - d + j], &self.f.mul(&t, mj));
            }
        }
        acc.truncate(d);
        RingElt { c: acc }
    }

    pub fn pow(&self, x: &RingElt, mut n: u64) -> RingElt {
        let mut acc = self.one();
        let mut base = x.clone();
        while n > 0 {
            if n & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            n >>= 1;
            if n > 0 {
                base = self.mul(&base, &base);
            }
        }
        acc
    }

    /// Sound lower bound for the valuation (π-units): minimum over
    /// coordinates, counting invisible coordinates at their precision.
    /// "val_floor(x) > t" certifies v(x) > t.
    pub fn val_floor(&self, x: &RingElt) -> i64 {
        x.c
            .iter()
            .map(|a| self.f.val_pi(a).unwrap_or(a.prec))
            .min()
            .expect("nonempty coordinates")
    }

    /// True when every coordinate is zero modulo its precision.
    pub fn is_invisible(&self, x: &RingElt) -> bool {
        x.c.iter().all(|a| self.f.is_invisible(a))
    }

    /// Image in the residue field under g ↦ r̄ (reduction modulo the
    /// maximal ideal (π, g − r̄)). Coordinates must be integral.
    pub fn residue(&self, x: &RingElt) -> Result<Fq2> {
        let q = &self.f.fq2;
        let mut out = Fq2::ZERO;
        let mut rpow = Fq2::ONE;
        for a in &x.c {
            out = q.add(out, q.mul(self.f.residue_at(a, 0)?, rpow));
            rpow = q.mul(rpow, self.gen_res);
        }
        Ok(out)
    }

    /// Inverse of a unit (integral with nonzero residue), by the
    /// division-free iteration y ← y(2 − xy); 1 − xy squares exactly.
    pub fn inverse(&self, x: &RingElt) -> Result<RingElt> {
        let r = self.residue(x)?;
        if r.is_zero() {
            return Err(Error::PrecisionLoss { vnum: 0, vden: 1 });
        }
        let q = &self.f.fq2;
        let mut y = self.from_tower(self.f.teichmuller(q.inv(r), 0));
        let two = self.from_tower(self.f.scale_small(&self.f.one(), 2));
        for _ in 0..64 {
            let err = self.sub(&self.one(), &self.mul(x, &y));
            if self.is_invisible(&err) {
                return Ok(y);
            }
            y = self.mul(&y, &self.sub(&two, &self.mul(x, &y)));
        }
        Err(Error::HenselStall(self.val_floor(&self.sub(&self.one(), &self.mul(x, &y)))))
    }

    /// An n-th root of a unit, n prime to p, found by scanning the
    /// residue field for a seed and running the division-free inverse
    /// n-th root iteration w ← w(1 + (1 − x wⁿ)/n); returns x·w^{n−1}.
    /// Fails when the residue has no n-th root in F_{p²}.
    pub fn nth_root(&self, x: &RingElt, n: u64) -> Result<RingElt> {
        assert!(n >= 1 && n % self.f.p != 0);
        let q = &self.f.fq2;
        let r = self.residue(x)?;
        if r.is_zero() {
            return Err(Error::PrecisionLoss { vnum: 0, vden: 1 });
        }
        let seed = q
            .all_elements()
            .find(|u| !u.is_zero() && q.pow(*u, n) == r)
            .ok_or(Error::LiftRefusal)?;
        let inv_n = self.from_tower(self.f.scalar(self.f.witt.inv(crate::arith::WittTrunc::from_base(
            n % self.f.witt.pm,
        ))));
        let mut w = self.from_tower(self.f.teichmuller(q.inv(seed), 0));
        for _ in 0..64 {
            let err = self.sub(&self.one(), &self.mul(x, &self.pow(&w, n)));
            if self.is_invisible(&err) {
                let root = self.mul(x, &self.pow(&w, n - 1));
                // paranoia: the defining identity must be invisible too
                let check = self.sub(&self.pow(&root, n), x);
                if !self.is_invisible(&check) {
                    return Err(Error::HenselStall(self.val_floor(&check)));
                }
                return Ok(root);
            }
            w = self.mul(&w, &self.add(&self.one(), &self.mul(&err, &inv_n)));
        }
        Err(Error::HenselStall(
            self.val_floor(&self.sub(&self.one(), &self.mul(x, &self.pow(&w, n)))),
        ))
    }

    /// Horner evaluation of a polynomial with ring coefficients
    /// (ascending order).
    pub fn poly_eval(&self, coeffs: &[RingElt], x: &RingElt) -> RingElt {
        let mut acc = self.zero();
        for c in coeffs.iter().rev() {
            acc = self.add(&self.mul(&acc, x), c);
        }
        acc
    }

    /// Formal derivative of a polynomial with ring coefficients.
    pub fn poly_derivative(&self, coeffs: &[RingElt]) -> Vec<RingElt> {
        coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, c)| {
                let kk = (k as u64) % self.f.witt.pm;
                self.mul_tower(c, &self.f.scale_small(&self.f.one(), kk))
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::WittTrunc;

    /// R = L[g]/((g − 1)² − π) at p = 13, e = 4: g = 1 + √π, a genuinely
    /// ramified square root whose modulus reduces to (z − 1)².
    fn small_ring(f: &TowerField) -> QuotientRing<'_> {
        let lower = vec![
            f.sub(&f.one(), &f.pi_pow(1)),
            f.neg(&f.scale_small(&f.one(), 2)),
        ];
        QuotientRing::new(f, lower, Fq2::ONE).unwrap()
    }

    #[test]
    fn generator_squares_to_modulus_root() {
        let f = TowerField::new(13, 4, 3).unwrap();
        let r = small_ring(&f);
        let g = r.generator();
        // g² = 2g − 1 + π by the modulus
        let g2 = r.mul(&g, &g);
        let want = r.add(
            &r.add(&g, &g),
            &r.from_tower(f.sub(&f.pi_pow(1), &f.one())),
        );
        assert!(r.is_invisible(&r.sub(&g2, &want)));
        // (g − 1)² = π exactly
        let n = r.sub(&g, &r.one());
        assert!(r.is_invisible(&r.sub(&r.mul(&n, &n), &r.from_tower(f.pi_pow(1)))));
    }

    #[test]
    fn inverse_and_nth_root_round_trip() {
        let f = TowerField::new(13, 4, 3).unwrap();
        let r = small_ring(&f);
        // x = 3 + g + π²g: a unit with residue 3 + 1 = 4
        let mut x = r.generator();
        x.c[0] = f.scalar(WittTrunc::from_base(3));
        x.c[1] = f.add(&x.c[1], &f.pi_pow(2));
        let xi = r.inverse(&x).unwrap();
        assert!(r.is_invisible(&r.sub(&r.mul(&x, &xi), &r.one())));
        let c = r.nth_root(&r.pow(&x, 3), 3).unwrap();
        assert!(r.is_invisible(&r.sub(&r.pow(&c, 3), &r.pow(&x, 3))));
    }

    #[test]
    fn val_floor_is_sound() {
        let f = TowerField::new(13, 4, 3).unwrap();
        let r = small_ring(&f);
        let x = r.shift_up(&r.generator(), 5);
        assert_eq!(r.val_floor(&x), 5);
        assert!(r.val_floor(&r.zero()) >= f.work_prec);
    }
}
