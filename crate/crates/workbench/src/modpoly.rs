//! The modular polynomial Φ_p(X, Y) and its supersingular shift.
//!
//! Φ_p is built from q-expansions: with J the j-expansion and
//! v = q^{1/p}, the p conjugate roots j((τ+a)/p) = J(ζᵃv) have power
//! sums P_i = p · (every p-th v-coefficient of J(v)^i), since the
//! root-of-unity average kills all non-integral exponents. Newton's
//! identities recover the elementary symmetric functions, and
//! multiplying in the remaining root j(pτ) = J(q^p) gives each
//! X-coefficient of Φ_p as a q-series, which is then recognised as an
//! integer polynomial in Y = j(q) by greedy pole elimination.
//!
//! The supersingular shift replaces both variables by X + β₀, Y + β₀
//! where β₀ is the Teichmüller lift of a supersingular j-invariant
//! β̄ ∈ F_p. Kronecker's congruence makes the difference
//! F(X+β₀, Y+β₀) − (X^p − Y)(X − Y^p) divisible by p; the quotient f₁
//! carries the local constants c₀ = f₁(0,0), c₁ = ∂f₁, c₂ that drive
//! every reduction identity downstream. c₀ must be a p-adic unit: for
//! an ordinary β̄ the crossing degenerates and the shift is refused.

use crate::error::{Error, Result};
use crate::qseries::{j_qexpansion, QSeries};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use std::fmt::Write as _;
use std::path::Path;

/// Φ_p as a dense symmetric integer coefficient matrix,
/// `coeffs[i][j]` being the coefficient of X^i Y^j, 0 ≤ i,j ≤ p+1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModularPolynomial {
    pub p: u64,
    pub coeffs: Vec<Vec<BigInt>>,
}

/// Number of j-coefficients needed so that every pole-elimination
/// residual is still known for a couple of positive q-exponents.
fn required_terms(p: u64) -> usize {
    let g = 8u64; // guard coefficients beyond the strict minimum
    (2 * p * p + p * (g + 1) + 4) as usize
}

impl ModularPolynomial {
    /// Build Φ_p from scratch. Runs in a few seconds for p = 13.
    pub fn build(p: u64) -> Result<ModularPolynomial> {
        if !crate::arith::is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        let n_terms = required_terms(p);
        let pu = p as usize;
        let deg = pu + 1;

        // J(v) and its powers J(v)^i, i = 1..p, as v-series.
        let jv = j_qexpansion(n_terms)?;
        let vcap = jv.prec; // keep everything we honestly know
        let mut jpow_v = jv.clone();
        // Power sums P_i(q) = p * (v-coefficients of J^i at exponents ≡ 0 mod p).
        let mut psums: Vec<QSeries> = Vec::with_capacity(pu + 1);
        psums.push(QSeries::zero(i64::MAX / 4)); // P_0 unused
        for i in 1..=pu {
            if i > 1 {
                jpow_v = jpow_v.mul_capped(&jv, vcap);
            }
            // lowest multiple of p that is >= jpow_v.lead
            let lead_q = num_integer::div_ceil(jpow_v.lead, p as i64);
            let prec_q = num_integer::div_floor(jpow_v.prec - 1, p as i64) + 1;
            let mut cs = Vec::with_capacity((prec_q - lead_q).max(0) as usize);
            for k in lead_q..prec_q {
                cs.push(jpow_v.coeff(k * p as i64) * BigInt::from(p));
            }
            let mut s = QSeries::new(lead_q, cs);
            s.prec = prec_q;
            psums.push(s);
            let _ = i;
        }

        // Newton's identities: k e_k = Σ_{i=1..k} (-1)^{i-1} e_{k-i} P_i,
        // every division by k exact over Z.
        let qcap = i64::MAX / 4;
        let mut esym: Vec<QSeries> = Vec::with_capacity(pu + 1);
        esym.push(QSeries::new(0, vec![BigInt::from(1)])); // e_0 = 1
        esym[0].prec = qcap;
        for k in 1..=pu {
            let mut acc = QSeries::zero(qcap);
            for i in 1..=k {
                let term = esym[k - i].mul(&psums[i]);
                if i % 2 == 1 {
                    acc = acc.add(&term);
                } else {
                    acc = acc.sub(&term);
                }
            }
            let kk = BigInt::from(k);
            let mut cs = Vec::with_capacity(acc.coeffs.len());
            for (off, c) in acc.coeffs.iter().enumerate() {
                let (q, r) = c.div_rem(&kk);
                if !r.is_zero() {
                    return Err(Error::InexactDivision {
                        exp: acc.lead + off as i64,
                        divisor: k.to_string(),
                    });
                }
                cs.push(q);
            }
            let mut e = QSeries::new(acc.lead, cs);
            e.prec = acc.prec;
            esym.push(e);
        }

        // X-coefficients of Φ_p: with Q_m = (-1)^{p-m} e_{p-m},
        //   [X^m] Φ_p = Q_{m-1} - J(q^p) · Q_m.
        let jqp = jv.dilate(p as i64);
        let q_of = |m: usize| -> QSeries {
            if m > pu {
                return QSeries::zero(qcap);
            }
            let e = esym[pu - m].clone();
            if (pu - m) % 2 == 1 {
                e.scale(&BigInt::from(-1))
            } else {
                e
            }
        };
        // Powers of J(q) for pole elimination, degree up to p+1.
        let mut jq_pows: Vec<QSeries> = Vec::with_capacity(deg + 1);
        jq_pows.push({
            let mut one = QSeries::new(0, vec![BigInt::from(1)]);
            one.prec = jv.prec;
            one
        });
        for d in 1..=deg {
            jq_pows.push(jq_pows[d - 1].mul(&jv));
        }

        let mut coeffs = vec![vec![BigInt::zero(); deg + 1]; deg + 1];
        for m in 0..=deg {
            let mut series = if m == 0 {
                QSeries::zero(qcap).sub(&jqp.mul(&q_of(0)))
            } else {
                q_of(m - 1).sub(&jqp.mul(&q_of(m)))
            };
            // Greedy pole elimination recognises `series` as a
            // polynomial in Y = j(q).
            loop {
                match series.order() {
                    Some(ord) if ord < 0 => {
                        let d = (-ord) as usize;
                        if d > deg {
                            return Err(Error::Precision {
                                needed: required_terms(p) * 2,
                                have: n_terms,
                            });
                        }
                        let c = series.coeff(ord);
                        series = series.sub(&jq_pows[d].scale(&c));
                        coeffs[m][d] = c;
                    }
                    Some(0) => {
                        let c = series.coeff(0);
                        let mut konst = QSeries::new(0, vec![c.clone()]);
                        konst.prec = series.prec;
                        series = series.sub(&konst);
                        coeffs[m][0] = c;
                    }
                    _ => break,
                }
            }
            // Residual must vanish on every known coefficient, and we
            // insist on some genuinely known tail for the check to bite.
            if series.prec < 2 || series.order().is_some() {
                return Err(Error::Precision {
                    needed: required_terms(p) * 2,
                    have: n_terms,
                });
            }
        }

        let phi = ModularPolynomial { p, coeffs };
        phi.check_symmetry()?;
        phi.check_kronecker()?;
        Ok(phi)
    }

    /// Φ_p(X, Y) = Φ_p(Y, X).
    pub fn check_symmetry(&self) -> Result<()> {
        let d = self.coeffs.len();
        for i in 0..d {
            for j in 0..i {
                if self.coeffs[i][j] != self.coeffs[j][i] {
                    return Err(Error::CacheValidation(format!(
                        "asymmetric coefficient at ({i},{j})"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Kronecker's congruence Φ_p ≡ (X^p − Y)(X − Y^p) mod p.
    pub fn check_kronecker(&self) -> Result<()> {
        let p = self.p as usize;
        let pb = BigInt::from(self.p);
        for (i, row) in self.coeffs.iter().enumerate() {
            for (j, c) in row.iter().enumerate() {
                let mut expect = BigInt::zero();
                // (X^p - Y)(X - Y^p) = X^{p+1} - X^p Y^p - XY + Y^{p+1}
                if (i, j) == (p + 1, 0) || (i, j) == (0, p + 1) {
                    expect = BigInt::from(1);
                } else if (i, j) == (p, p) || (i, j) == (1, 1) {
                    expect = BigInt::from(-1);
                }
                if !((c - expect).mod_floor(&pb)).is_zero() {
                    return Err(Error::CacheValidation(format!(
                        "Kronecker congruence fails at ({i},{j})"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Serialise to the cache format:
    /// header `MODPOLY v1 p=<p>`, one `i j <coeff>` line per i ≤ j,
    /// trailer `END <fnv1a-64 of all preceding bytes>`.
    pub fn cache_write(&self, path: &Path) -> Result<()> {
        let mut body = String::new();
        writeln!(body, "MODPOLY v1 p={}", self.p).unwrap();
        let d = self.coeffs.len();
        for i in 0..d {
            for j in i..d {
                if !self.coeffs[i][j].is_zero() {
                    writeln!(body, "{} {} {}", i, j, self.coeffs[i][j]).unwrap();
                }
            }
        }
        let sum = fnv1a64(body.as_bytes());
        writeln!(body, "END {sum:016x}").unwrap();
        std::fs::write(path, body)?;
        Ok(())
    }

    pub fn cache_read(path: &Path) -> Result<ModularPolynomial> {
        let text = std::fs::read_to_string(path)?;
        let mut lines = text.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::CacheFormat("empty file".into()))?;
        let p: u64 = header
            .strip_prefix("MODPOLY v1 p=")
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::CacheFormat(format!("bad header: {header}")))?;
        let deg = (p + 1) as usize;
        let mut coeffs = vec![vec![BigInt::zero(); deg + 1]; deg + 1];
        let mut body_len = header.len() + 1;
        let mut seen_end = false;
        for line in lines {
            if let Some(sum_hex) = line.strip_prefix("END ") {
                let expect = u64::from_str_radix(sum_hex.trim(), 16)
                    .map_err(|_| Error::CacheFormat("bad checksum field".into()))?;
                let got = fnv1a64(&text.as_bytes()[..body_len]);
                if got != expect {
                    return Err(Error::CacheChecksum {
                        expected: format!("{expect:016x}"),
                        found: format!("{got:016x}"),
                    });
                }
                seen_end = true;
                break;
            }
            body_len += line.len() + 1;
            let mut it = line.split_whitespace();
            let (i, j, c) = (it.next(), it.next(), it.next());
            match (i, j, c) {
                (Some(i), Some(j), Some(c)) => {
                    let i: usize = i.parse().map_err(|_| Error::CacheFormat(line.into()))?;
                    let j: usize = j.parse().map_err(|_| Error::CacheFormat(line.into()))?;
                    let c: BigInt = c.parse().map_err(|_| Error::CacheFormat(line.into()))?;
                    if i > deg || j > deg || i > j {
                        return Err(Error::CacheFormat(line.into()));
                    }
                    coeffs[i][j] = c.clone();
                    coeffs[j][i] = c;
                }
                _ => return Err(Error::CacheFormat(line.into())),
            }
        }
        if !seen_end {
            return Err(Error::CacheFormat("missing END trailer".into()));
        }
        let phi = ModularPolynomial { p, coeffs };
        phi.check_symmetry()?;
        phi.check_kronecker()?;
        Ok(phi)
    }

    /// Build Φ_p, consulting/refreshing a cache directory if given.
    pub fn build_cached(p: u64, cache_dir: Option<&Path>) -> Result<ModularPolynomial> {
        if let Some(dir) = cache_dir {
            let path = dir.join(format!("phi_{p}.txt"));
            if path.exists() {
                if let Ok(phi) = ModularPolynomial::cache_read(&path) {
                    if phi.p == p {
                        return Ok(phi);
                    }
                }
            }
            let phi = ModularPolynomial::build(p)?;
            std::fs::create_dir_all(dir)?;
            phi.cache_write(&path)?;
            Ok(phi)
        } else {
            ModularPolynomial::build(p)
        }
    }
}

pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

/// Φ_p recentred at a supersingular point: all data needed to evaluate
/// F^β(X, Y) = (X^p − Y)(X − Y^p) + p·f₁(X, Y) over a ramified tower.
///
/// Coefficients of f₁ are stored mod p^m (the Witt modulus of the
/// tower they will be evaluated on).
#[derive(Debug, Clone)]
pub struct ShiftedKronecker {
    pub p: u64,
    /// Witt precision m: f₁ coefficients live mod p^m.
    pub m: u32,
    pub modulus: u64,
    /// Supersingular residue β̄ ∈ F_p.
    pub beta_bar: u64,
    /// Teichmüller lift of β̄, reduced mod p^{m+1}.
    pub beta0: u64,
    /// f₁[i][j] = coefficient of X^i Y^j, mod p^m.
    pub f1: Vec<Vec<u64>>,
    /// c₀ = f₁(0,0): the transversal crossing constant (a unit).
    pub c0: u64,
    /// c₁ = ∂f₁/∂X (0,0) = ∂f₁/∂Y (0,0).
    pub c1: u64,
    /// c₂ = coefficient of X² in f₁(X, 0).
    pub c2: u64,
}

impl ShiftedKronecker {
    /// Recentre `phi` at the Teichmüller lift of β̄ ∈ F_p and peel off
    /// the Kronecker part. Fails with `NotSupersingular` when the
    /// crossing constant c₀ is not a unit (e.g. ordinary β̄).
    pub fn shift(phi: &ModularPolynomial, beta_bar: u64, m: u32) -> Result<ShiftedKronecker> {
        let p = phi.p;
        let beta_bar = beta_bar % p;
        let modulus: u64 = p.pow(m); // f₁ modulus
        let big: u128 = (p as u128).pow(m + 1); // working modulus for F^β
        let deg = (p + 1) as usize;

        // Teichmüller lift: iterate x ← x^p mod p^{m+1} to convergence.
        let mut beta0: u128 = beta_bar as u128;
        for _ in 0..=(m + 2) {
            beta0 = powmod128(beta0, p, big);
        }

        // Reduce coefficients mod p^{m+1} and Taylor-shift both variables.
        let mut a: Vec<Vec<u128>> = phi
            .coeffs
            .iter()
            .map(|row| row.iter().map(|c| bigint_mod(c, big)).collect())
            .collect();
        for row in a.iter_mut() {
            taylor_shift(row, beta0, big);
        }
        // shift in the X direction: transpose, shift rows, transpose back
        for j in 0..=deg {
            let mut col: Vec<u128> = (0..=deg).map(|i| a[i][j]).collect();
            taylor_shift(&mut col, beta0, big);
            for (i, v) in col.into_iter().enumerate() {
                a[i][j] = v;
            }
        }

        // Subtract (X^p - Y)(X - Y^p); the difference must be ≡ 0 mod p.
        let pu = p as usize;
        let sub = |v: &mut u128, k: u128| *v = (*v + big - k % big) % big;
        sub(&mut a[pu + 1][0], 1);
        sub(&mut a[0][pu + 1], 1);
        a[pu][pu] = (a[pu][pu] + 1) % big;
        a[1][1] = (a[1][1] + 1) % big;

        let mut f1 = vec![vec![0u64; deg + 1]; deg + 1];
        for i in 0..=deg {
            for j in 0..=deg {
                if a[i][j] % p as u128 != 0 {
                    return Err(Error::NotSupersingular);
                }
                f1[i][j] = ((a[i][j] / p as u128) % modulus as u128) as u64;
            }
        }
        let c0 = f1[0][0];
        if c0 % p == 0 {
            return Err(Error::NotSupersingular);
        }
        debug_assert_eq!(f1[1][0], f1[0][1]);
        let (c1, c2) = (f1[1][0], f1[2][0]);
        Ok(ShiftedKronecker {
            p,
            m,
            modulus,
            beta_bar,
            beta0: (beta0 % modulus as u128) as u64,
            f1,
            c0,
            c1,
            c2,
        })
    }

    /// c₀ mod p (a residue in F_p ⊂ F_{p²}).
    pub fn c0_bar(&self) -> u64 {
        self.c0 % self.p
    }

    pub fn c1_bar(&self) -> u64 {
        self.c1 % self.p
    }

    pub fn c2_bar(&self) -> u64 {
        self.c2 % self.p
    }
}

fn powmod128(mut b: u128, mut e: u64, m: u128) -> u128 {
    let mut acc: u128 = 1 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * b % m;
        }
        b = b * b % m;
        e >>= 1;
    }
    acc
}

fn bigint_mod(c: &BigInt, m: u128) -> u128 {
    let mb = BigInt::from(m);
    let r = c.mod_floor(&mb);
    r.to_u128().expect("mod_floor result fits")
}

/// In-place Taylor shift a(T) ← a(T + c) mod m, Horner style.
fn taylor_shift(a: &mut [u128], c: u128, m: u128) {
    let d = a.len();
    if d == 0 {
        return;
    }
    // b(T) accumulates from the top coefficient down.
    let mut b = vec![0u128; d];
    b[0] = a[d - 1] % m;
    let mut blen = 1usize;
    for i in (0..d - 1).rev() {
        // b ← b·(T + c) + a[i]
        for k in (0..blen).rev() {
            let v = b[k];
            b[k + 1] = (b[k + 1] + v) % m;
            b[k] = v * (c % m) % m;
        }
        blen += 1;
        b[0] = (b[0] + a[i] % m) % m;
    }
    a.copy_from_slice(&b);
}

#[cfg(test)]
mod tests {
    use super::*;

    /// The full classical Φ₂, frozen as an oracle.
    fn phi2_reference() -> Vec<(usize, usize, i128)> {
        vec![
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
        ]
    }

    #[test]
    fn phi2_matches_classical_table() {
        let phi = ModularPolynomial::build(2).unwrap();
        let mut expect = vec![vec![BigInt::zero(); 4]; 4];
        for (i, j, c) in phi2_reference() {
            expect[i][j] = BigInt::from(c);
        }
        assert_eq!(phi.coeffs, expect);
    }

    #[test]
    fn phi3_symmetry_and_kronecker() {
        let phi = ModularPolynomial::build(3).unwrap();
        phi.check_symmetry().unwrap();
        phi.check_kronecker().unwrap();
        // Φ₃(0, 1728) = 0 up to the known relation? Spot checks instead:
        // classical leading data: [X^4 Y^0] = 1, [X^3 Y^3] = -1.
        assert_eq!(phi.coeffs[4][0], BigInt::from(1));
        assert_eq!(phi.coeffs[3][3], BigInt::from(-1));
        assert_eq!(phi.coeffs[3][2], BigInt::from(2232));
    }

    #[test]
    fn cache_roundtrip_and_checksum() {
        let phi = ModularPolynomial::build(2).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("phi_2.txt");
        phi.cache_write(&path).unwrap();
        let back = ModularPolynomial::cache_read(&path).unwrap();
        assert_eq!(phi, back);
        // corrupt a digit: checksum must catch it
        let mut text = std::fs::read_to_string(&path).unwrap();
        text = text.replace("1488", "1489");
        std::fs::write(&path, &text).unwrap();
        assert!(matches!(
            ModularPolynomial::cache_read(&path),
            Err(Error::CacheChecksum { .. })
        ));
    }

    #[test]
    fn shift_at_supersingular_point_gives_unit_c0() {
        let phi = ModularPolynomial::build(13).unwrap();
        // β̄ = 5 is the unique supersingular j-invariant for p = 13.
        let sk = ShiftedKronecker::shift(&phi, 5, 3).unwrap();
        assert_eq!(sk.beta_bar, 5);
        assert_ne!(sk.c0 % 13, 0);
        assert_eq!(sk.f1[1][0], sk.f1[0][1]);
        // Teichmüller: beta0^13 ≡ beta0 mod 13^3, beta0 ≡ 5 mod 13.
        let m = 13u128.pow(3);
        let b = sk.beta0 as u128 % m;
        assert_eq!(powmod128(b, 13, m), b);
        assert_eq!(b % 13, 5);
    }

    #[test]
    fn shift_at_ordinary_point_is_refused() {
        let phi = ModularPolynomial::build(13).unwrap();
        for ordinary in [1u64, 2, 3] {
            assert!(matches!(
                ShiftedKronecker::shift(&phi, ordinary, 3),
                Err(Error::NotSupersingular)
            ));
        }
    }

    #[test]
    fn phi13_symmetry_kronecker_and_degree() {
        let phi = ModularPolynomial::build(13).unwrap();
        assert_eq!(phi.coeffs.len(), 15);
        assert_eq!(phi.coeffs[14][0], BigInt::from(1));
        assert_eq!(phi.coeffs[13][13], BigInt::from(-1));
        phi.check_symmetry().unwrap();
        phi.check_kronecker().unwrap();
    }
}
