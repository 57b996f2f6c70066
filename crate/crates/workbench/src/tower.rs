//! Arithmetic in the totally ramified tower L = Q_{p²}(π), π^e = p.
//!
//! An element is written Σ_{k<e} w_k π^k with w_k ∈ W(F_{p²})/p^m; this
//! is a *canonical* coordinate system for O_L/p^m O_L, so valuations read
//! off slot-by-slot are exact. Valuations are measured in π-units
//! (integers; divide by e for the normalization v(p) = 1).
//!
//! Every element carries a precision `prec` (in π-units): digits at
//! π-level ≥ prec are garbage and are systematically ignored. A working
//! precision cap on the field keeps deep towers fast: multiplications
//! only compute convolution slots that carry information below the cap.
//!
//! On top of the ring sit polynomials, Newton polygons, segment root
//! extraction over the residue field F_{p²}, and Hensel lifting.

use crate::arith::{rat, Fq2, Fq2Field, Rat, WittRing, WittTrunc};
use crate::error::{Error, Result};

/// Descriptor of L = Q_{p²}(π), π^e = p, with Witt precision m.
#[derive(Debug, Clone)]
pub struct TowerField {
    pub p: u64,
    pub e: usize,
    pub m: u32,
    pub witt: WittRing,
    pub fq2: Fq2Field,
    /// Working precision cap in π-units (≤ e·m).
    pub work_prec: i64,
}

/// Σ_k w_k π^k with w_k = a[k] + b[k]·ω̂ mod p^m, known below π^prec.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TowerElement {
    pub a: Vec<u32>,
    pub b: Vec<u32>,
    pub prec: i64,
}

impl TowerField {
    pub fn new(p: u64, e: usize, m: u32) -> Result<TowerField> {
        let fq2 = Fq2Field::new(p)?;
        let witt = WittRing::new(fq2, m);
        assert!(witt.pm < (1 << 31), "p^m must fit in u32 slots");
        assert!(e >= 1);
        let n = (e as i64) * (m as i64);
        Ok(TowerField {
            p,
            e,
            m,
            witt,
            fq2,
            work_prec: n,
        })
    }

    /// Lower the working precision cap (π-units). All subsequently
    /// produced elements are truncated to it, which shortens every
    /// convolution in deep towers.
    pub fn set_work_prec(&mut self, t: i64) {
        let n = (self.e as i64) * (self.m as i64);
        self.work_prec = t.clamp(1, n);
    }

    fn cap(&self) -> i64 {
        self.work_prec
    }

    /// Number of genuine p-digits of slot k for an element of precision
    /// `prec`: digits t with k + e·t < prec.
    fn digits_known(&self, k: usize, prec: i64) -> u32 {
        let room = prec - k as i64;
        if room <= 0 {
            0
        } else {
            (num_integer::div_ceil(room, self.e as i64) as u32).min(self.m)
        }
    }

    pub fn zero(&self) -> TowerElement {
        TowerElement {
            a: vec![0; self.e],
            b: vec![0; self.e],
            prec: self.cap(),
        }
    }

    pub fn one(&self) -> TowerElement {
        self.scalar(WittTrunc::ONE)
    }

    /// The element w·π^k (k ≥ 0 in π-units; k may exceed e).
    pub fn pi_shifted_scalar(&self, w: WittTrunc, k: i64) -> TowerElement {
        assert!(k >= 0);
        let mut x = self.zero();
        let q = (k as usize) / self.e;
        let r = (k as usize) % self.e;
        if (q as u32) < self.m {
            let pq = self.p.pow(q as u32);
            let w = self.witt.mul(w, WittTrunc::from_base(pq % self.witt.pm));
            x.a[r] = w.a as u32;
            x.b[r] = w.b as u32;
        }
        x
    }

    pub fn scalar(&self, w: WittTrunc) -> TowerElement {
        self.pi_shifted_scalar(w, 0)
    }

    pub fn pi_pow(&self, k: i64) -> TowerElement {
        self.pi_shifted_scalar(WittTrunc::ONE, k)
    }

    /// Teichmüller representative of r̄ ∈ F_{p²}, placed at π-level k.
    pub fn teichmuller(&self, r: Fq2, k: i64) -> TowerElement {
        self.pi_shifted_scalar(self.witt.teichmuller(r), k)
    }

    fn slot(&self, x: &TowerElement, k: usize) -> WittTrunc {
        WittTrunc {
            a: x.a[k] as u64,
            b: x.b[k] as u64,
        }
    }

    pub fn add(&self, x: &TowerElement, y: &TowerElement) -> TowerElement {
        let pm = self.witt.pm as u32;
        let a = x.a.iter().zip(&y.a).map(|(u, v)| (u + v) % pm).collect();
        let b = x.b.iter().zip(&y.b).map(|(u, v)| (u + v) % pm).collect();
        TowerElement {
            a,
            b,
            prec: x.prec.min(y.prec),
        }
    }

    pub fn sub(&self, x: &TowerElement, y: &TowerElement) -> TowerElement {
        let pm = self.witt.pm as u32;
        let a = x.a.iter().zip(&y.a).map(|(u, v)| (u + pm - v) % pm).collect();
        let b = x.b.iter().zip(&y.b).map(|(u, v)| (u + pm - v) % pm).collect();
        TowerElement {
            a,
            b,
            prec: x.prec.min(y.prec),
        }
    }

    pub fn neg(&self, x: &TowerElement) -> TowerElement {
        self.sub(&self.zero(), x)
    }

    /// Multiply by a small integer scalar (used for derivatives).
    pub fn scale_small(&self, x: &TowerElement, n: u64) -> TowerElement {
        let pm = self.witt.pm;
        let n = n % pm;
        let sc = |v: &Vec<u32>| v.iter().map(|&u| ((u as u64 * n) % pm) as u32).collect();
        TowerElement {
            a: sc(&x.a),
            b: sc(&x.b),
            prec: x.prec,
        }
    }

    /// Valuation in π-units, or None when the element is invisible
    /// (zero modulo its precision). Exact thanks to canonical slots.
    pub fn val_pi(&self, x: &TowerElement) -> Option<i64> {
        let mut best: Option<i64> = None;
        for k in 0..self.e {
            let w = self.slot(x, k);
            if w.is_zero() {
                continue;
            }
            let lvl = k as i64 + (self.e as i64) * (self.witt.valuation(w) as i64);
            if lvl < x.prec && best.map_or(true, |b| lvl < b) {
                best = Some(lvl);
            }
        }
        best
    }

    /// Valuation normalized so that v(p) = 1, as an exact rational.
    pub fn valuation(&self, x: &TowerElement) -> Result<Rat> {
        match self.val_pi(x) {
            Some(v) => Ok(rat(v, self.e as i64)),
            None => Err(Error::BelowPrecision),
        }
    }

    pub fn is_invisible(&self, x: &TowerElement) -> bool {
        self.val_pi(x).is_none()
    }

    /// Residue of x / π^lvl in F_{p²}. Requires v(x) ≥ lvl and
    /// lvl < prec; the residue is zero when v(x) > lvl.
    pub fn residue_at(&self, x: &TowerElement, lvl: i64) -> Result<Fq2> {
        if lvl >= x.prec {
            return Err(Error::BelowPrecision);
        }
        if let Some(v) = self.val_pi(x) {
            if v < lvl {
                return Err(Error::PrecisionLoss {
                    vnum: v,
                    vden: lvl,
                });
            }
            if v > lvl {
                return Ok(Fq2::ZERO);
            }
        } else {
            return Ok(Fq2::ZERO);
        }
        assert!(lvl >= 0);
        let q = (lvl as usize) / self.e;
        let r = (lvl as usize) % self.e;
        let pq = self.p.pow(q as u32);
        Ok(Fq2 {
            a: (x.a[r] as u64 / pq) % self.p,
            b: (x.b[r] as u64 / pq) % self.p,
        })
    }

    /// Leading residue: (residue of x/π^{v(x)}, v(x) in π-units).
    pub fn leading(&self, x: &TowerElement) -> Option<(Fq2, i64)> {
        let v = self.val_pi(x)?;
        Some((self.residue_at(x, v).expect("valuation just computed"), v))
    }

    /// Multiply by π^s, s ≥ 0.
    pub fn shift_up(&self, x: &TowerElement, s: i64) -> TowerElement {
        assert!(s >= 0);
        let q = (s as usize) / self.e;
        let r = (s as usize) % self.e;
        let mut out = self.zero();
        out.prec = (x.prec + s).min(self.cap());
        let pm = self.witt.pm;
        for k in 0..self.e {
            let extra = q + usize::from(k + r >= self.e);
            if extra as u32 >= self.m {
                continue;
            }
            let j = (k + r) % self.e;
            let mult = self.p.pow(extra as u32) % pm;
            out.a[j] = ((x.a[k] as u64 * mult) % pm) as u32;
            out.b[j] = ((x.b[k] as u64 * mult) % pm) as u32;
        }
        out
    }

    /// Divide by π^s, s ≥ 0. Fails with `PrecisionLoss` when v(x) < s.
    pub fn shift_down(&self, x: &TowerElement, s: i64) -> Result<TowerElement> {
        assert!(s >= 0);
        if s == 0 {
            return Ok(x.clone());
        }
        if let Some(v) = self.val_pi(x) {
            if v < s {
                return Err(Error::PrecisionLoss { vnum: v, vden: s });
            }
        }
        if x.prec <= s {
            return Err(Error::BelowPrecision);
        }
        let q = (s as usize) / self.e;
        let r = (s as usize) % self.e;
        let mut out = self.zero();
        out.prec = x.prec - s;
        for k in 0..self.e {
            let t = (q + usize::from(k < r)) as u32;
            let j = (k + self.e - r) % self.e;
            let kn = self.digits_known(k, x.prec);
            if t >= kn {
                continue; // nothing but garbage would survive
            }
            let pt = self.p.pow(t);
            let pkn = self.p.pow(kn);
            // only genuine digits participate
            let av = x.a[k] as u64 % pkn;
            let bv = x.b[k] as u64 % pkn;
            debug_assert!(av % pt == 0 && bv % pt == 0, "visible digit below shift");
            out.a[j] = (av / pt) as u32;
            out.b[j] = (bv / pt) as u32;
        }
        Ok(out)
    }

    /// Product. Cost is one Karatsuba convolution triple, truncated to
    /// the slots that carry information below the result precision.
    pub fn mul(&self, x: &TowerElement, y: &TowerElement) -> TowerElement {
        let vx = self.val_pi(x).unwrap_or(x.prec);
        let vy = self.val_pi(y).unwrap_or(y.prec);
        let prec = (vx + y.prec).min(vy + x.prec).min(self.cap());
        if prec <= 0 || self.val_pi(x).is_none() || self.val_pi(y).is_none() {
            let mut z = self.zero();
            z.prec = prec.max(1);
            return z;
        }
        // Operand slots ≥ prec contribute only above the result precision.
        let nx = self.e.min(prec.max(0) as usize).max(1);
        let ny = nx;
        let to_i64 = |v: &[u32], n: usize| -> Vec<i64> {
            v.iter().take(n).map(|&u| u as i64).collect()
        };
        let (xa, xb) = (to_i64(&x.a, nx), to_i64(&x.b, nx));
        let (ya, yb) = (to_i64(&y.a, ny), to_i64(&y.b, ny));
        let pm = self.witt.pm as i64;
        let big_coeffs = self.witt.pm >= (1 << 20);

        let caa = conv(&xa, &ya, big_coeffs, pm);
        let cbb = conv(&xb, &yb, big_coeffs, pm);
        let sx: Vec<i64> = xa.iter().zip(&xb).map(|(u, v)| u + v).collect();
        let sy: Vec<i64> = ya.iter().zip(&yb).map(|(u, v)| u + v).collect();
        let mut cab = conv(&sx, &sy, big_coeffs, pm);
        for (c, (u, v)) in cab.iter_mut().zip(caa.iter().zip(&cbb)) {
            *c = (*c - u - v).rem_euclid(pm);
        }
        let d = self.witt.d as i64;
        let ra: Vec<i64> = caa
            .iter()
            .zip(&cbb)
            .map(|(u, v)| (u + v % pm * d).rem_euclid(pm))
            .collect();

        // Fold π^{e+k} = p·π^k and reduce into slots.
        let mut out = self.zero();
        out.prec = prec;
        let pm_u = self.witt.pm;
        let fold = |c: &[i64], dst: &mut [u32]| {
            let mut acc = vec![0u64; self.e];
            for (k, &v) in c.iter().enumerate() {
                let v = v.rem_euclid(pm_u as i64) as u64;
                if k < self.e {
                    acc[k] += v;
                } else {
                    acc[k - self.e] += v % pm_u * (self.p % pm_u) % pm_u;
                }
            }
            for (dk, ak) in dst.iter_mut().zip(acc) {
                *dk = (ak % pm_u) as u32;
            }
        };
        fold(&ra, &mut out.a);
        fold(&cab, &mut out.b);
        out
    }

    /// Inverse of a unit (v = 0), by Newton from the residue inverse.
    pub fn inverse(&self, x: &TowerElement) -> Result<TowerElement> {
        match self.val_pi(x) {
            Some(0) => {}
            Some(v) => return Err(Error::PrecisionLoss { vnum: 0, vden: v }),
            None => return Err(Error::BelowPrecision),
        }
        let w0 = self.slot(x, 0);
        let mut y = self.scalar(self.witt.inv(w0));
        let two = self.scalar(WittTrunc::from_base(2));
        // x·y ≡ 1 mod π; each step doubles the π-adic accuracy.
        let mut k: i64 = 1;
        while k < x.prec {
            y = self.mul(&y, &self.sub(&two, &self.mul(x, &y)));
            k *= 2;
        }
        Ok(y)
    }

    /// x / y. Requires v(x) ≥ v(y); precision drops by v(y).
    pub fn div(&self, x: &TowerElement, y: &TowerElement) -> Result<TowerElement> {
        let vy = self.val_pi(y).ok_or(Error::BelowPrecision)?;
        let yu = self.shift_down(y, vy)?;
        let xs = self.shift_down(x, vy)?;
        Ok(self.mul(&xs, &self.inverse(&yu)?))
    }

    /// Exponentiation by squaring.
    pub fn pow(&self, x: &TowerElement, mut n: u64) -> TowerElement {
        let mut acc = self.one();
        acc.prec = x.prec.max(1); // a power of x is no better known than x
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
}

/// Convolution dispatcher: Karatsuba over i64 (with lazy reduction) for
/// ordinary moduli, schoolbook over i128 when p^m is large enough that
/// the Karatsuba growth bound could overflow.
fn conv(a: &[i64], b: &[i64], big: bool, pm: i64) -> Vec<i64> {
    if a.is_empty() || b.is_empty() {
        return vec![0; (a.len() + b.len()).saturating_sub(1).max(1)];
    }
    if big {
        let mut out = vec![0i64; a.len() + b.len() - 1];
        for (i, &u) in a.iter().enumerate() {
            for (j, &v) in b.iter().enumerate() {
                out[i + j] = ((out[i + j] as i128 + u as i128 * v as i128)
                    % pm as i128) as i64;
            }
        }
        out
    } else {
        let mut out = vec![0i64; a.len() + b.len() - 1];
        kconv(a, b, &mut out);
        out
    }
}

const KARATSUBA_CUTOFF: usize = 32;

/// out += a * b (polynomial convolution), Karatsuba recursion.
fn kconv(a: &[i64], b: &[i64], out: &mut [i64]) {
    let (la, lb) = (a.len(), b.len());
    if la.min(lb) <= KARATSUBA_CUTOFF {
        for (i, &u) in a.iter().enumerate() {
            if u == 0 {
                continue;
            }
            for (j, &v) in b.iter().enumerate() {
                out[i + j] += u * v;
            }
        }
        return;
    }
    let h = la.max(lb) / 2;
    let (a0, a1) = a.split_at(h.min(la));
    let (b0, b1) = b.split_at(h.min(lb));
    if a1.is_empty() {
        // a = a0 entirely below the split point
        kconv(a0, b0, out);
        kconv(a0, b1, &mut out[h..]);
        return;
    }
    if b1.is_empty() {
        kconv(a0, b0, out);
        kconv(a1, b0, &mut out[h..]);
        return;
    }
    // z0 = a0 b0, z2 = a1 b1, z1 = (a0+a1)(b0+b1) - z0 - z2
    let mut z0 = vec![0i64; a0.len() + b0.len() - 1];
    kconv(a0, b0, &mut z0);
    let mut z2 = vec![0i64; a1.len() + b1.len() - 1];
    kconv(a1, b1, &mut z2);
    let sa: Vec<i64> = (0..a0.len().max(a1.len()))
        .map(|i| a0.get(i).copied().unwrap_or(0) + a1.get(i).copied().unwrap_or(0))
        .collect();
    let sb: Vec<i64> = (0..b0.len().max(b1.len()))
        .map(|i| b0.get(i).copied().unwrap_or(0) + b1.get(i).copied().unwrap_or(0))
        .collect();
    let mut z1 = vec![0i64; sa.len() + sb.len() - 1];
    kconv(&sa, &sb, &mut z1);
    for (i, &v) in z0.iter().enumerate() {
        out[i] += v;
        out[i + h] -= v;
    }
    for (i, &v) in z2.iter().enumerate() {
        out[i + 2 * h] += v;
        out[i + h] -= v;
    }
    for (i, &v) in z1.iter().enumerate() {
        out[i + h] += v;
    }
}

/// Polynomial over the tower, coeffs[i] the coefficient of Y^i.
#[derive(Debug, Clone)]
pub struct TowerPoly {
    pub coeffs: Vec<TowerElement>,
}

impl TowerPoly {
    pub fn eval(&self, f: &TowerField, x: &TowerElement) -> TowerElement {
        let mut acc = f.zero();
        for c in self.coeffs.iter().rev() {
            acc = f.add(&f.mul(&acc, x), c);
        }
        acc
    }

    pub fn derivative(&self, f: &TowerField) -> TowerPoly {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, c)| f.scale_small(c, i as u64))
            .collect();
        TowerPoly { coeffs }
    }
}

/// A segment of the lower Newton polygon: from (i0, v0) to (i1, v1),
/// carrying i1 − i0 roots of valuation (v0 − v1)/(i1 − i0) π-units.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Segment {
    pub i0: usize,
    pub v0: i64,
    pub i1: usize,
    pub v1: i64,
}

impl Segment {
    pub fn root_val_pi(&self) -> Rat {
        rat(self.v0 - self.v1, (self.i1 - self.i0) as i64)
    }

    pub fn len(&self) -> usize {
        self.i1 - self.i0
    }

    #[must_use]
    pub fn is_empty(&self) -> bool {
        false
    }
}

/// Newton polygon of a tower polynomial: lower convex hull of
/// (i, v_π(cᵢ)). Coefficients invisible at working precision are treated
/// as absent (their true valuation exceeds everything visible).
#[derive(Debug, Clone)]
pub struct NewtonPolygon {
    pub points: Vec<(usize, i64)>,
    pub hull: Vec<(usize, i64)>,
}

pub fn newton_polygon(f: &TowerField, poly: &TowerPoly) -> Result<NewtonPolygon> {
    let mut points = Vec::new();
    for (i, c) in poly.coeffs.iter().enumerate() {
        if let Some(v) = f.val_pi(c) {
            points.push((i, v));
        }
    }
    if points.is_empty() {
        return Err(Error::ZeroPolynomial);
    }
    // monotone-chain lower hull (points already sorted by i)
    let mut hull: Vec<(usize, i64)> = Vec::new();
    for &(i, v) in &points {
        while hull.len() >= 2 {
            let (i1, v1) = hull[hull.len() - 1];
            let (i0, v0) = hull[hull.len() - 2];
            // drop the middle point unless the chain turns strictly left
            let cross = (i1 - i0) as i64 * (v - v0) - (i - i0) as i64 * (v1 - v0);
            if cross <= 0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push((i, v));
    }
    Ok(NewtonPolygon { points, hull })
}

impl NewtonPolygon {
    pub fn segments(&self) -> Vec<Segment> {
        self.hull
            .windows(2)
            .map(|w| Segment {
                i0: w[0].0,
                v0: w[0].1,
                i1: w[1].0,
                v1: w[1].1,
            })
            .collect()
    }

    /// The segment whose roots have the given valuation (π-units).
    pub fn segment_with_root_val(&self, k: Rat) -> Result<Segment> {
        self.segments()
            .into_iter()
            .find(|s| s.root_val_pi() == k)
            .ok_or_else(|| Error::NoSegment(k.to_string()))
    }
}

/// Residues (in F_{p²}) of the simple residual roots of `poly` along
/// the valuation-k slope: the cheap scan half of `segment_roots`.
/// The residual polynomial of `poly` at slope k: μ = min_i (v(c_i) + i·k),
/// and the residual collects the residues of the slots attaining μ.
fn residual_poly(f: &TowerField, poly: &TowerPoly, k: i64) -> Result<Vec<Fq2>> {
    let deg = poly.coeffs.len() - 1;
    let mut mu: Option<i64> = None;
    let mut vals: Vec<Option<i64>> = Vec::with_capacity(deg + 1);
    for (i, c) in poly.coeffs.iter().enumerate() {
        let v = f.val_pi(c);
        if let Some(v) = v {
            let t = v + (i as i64) * k;
            if mu.map_or(true, |m| t < m) {
                mu = Some(t);
            }
        }
        vals.push(v);
    }
    let mu = mu.ok_or(Error::ZeroPolynomial)?;
    let mut res_poly = vec![Fq2::ZERO; deg + 1];
    for (i, c) in poly.coeffs.iter().enumerate() {
        if let Some(v) = vals[i] {
            if v + (i as i64) * k == mu {
                res_poly[i] = f.residue_at(c, v)?;
            }
        }
    }
    Ok(res_poly)
}

pub fn segment_root_residues(
    f: &TowerField,
    poly: &TowerPoly,
    k: i64,
    exclude: &[Fq2],
) -> Result<Vec<Fq2>> {
    let res_poly = residual_poly(f, poly, k)?;
    let eval_res = |u: Fq2| -> Fq2 {
        let mut acc = Fq2::ZERO;
        for c in res_poly.iter().rev() {
            acc = f.fq2.add(f.fq2.mul(acc, u), *c);
        }
        acc
    };
    let eval_res_deriv = |u: Fq2| -> Fq2 {
        let mut acc = Fq2::ZERO;
        for (i, c) in res_poly.iter().enumerate().skip(1).rev() {
            acc = f.fq2.add(
                f.fq2.mul(acc, u),
                f.fq2.mul(Fq2::from_base(i as u64 % f.p), *c),
            );
        }
        acc
    };
    let mut out = Vec::new();
    for u in f.fq2.all_elements() {
        if u.is_zero() || exclude.contains(&u) {
            continue;
        }
        if !eval_res(u).is_zero() || eval_res_deriv(u).is_zero() {
            continue;
        }
        out.push(u);
    }
    Ok(out)
}

/// Newton-refine the root of `poly` with valuation k π-units whose
/// residual residue is `u` (which must be simple — see
/// `segment_root_residues`).
pub fn refine_at_residue(
    f: &TowerField,
    poly: &TowerPoly,
    k: i64,
    u: Fq2,
) -> Result<TowerElement> {
    let fprime = poly.derivative(f);
    newton_refine(f, poly, &fprime, f.teichmuller(u, k))
}

/// Roots of `poly` with valuation exactly k π-units whose residual
/// residue is simple (and not excluded). Returns (residue, lifted root)
/// pairs; an empty result is the caller's `LiftRefusal` signal.
pub fn segment_roots(
    f: &TowerField,
    poly: &TowerPoly,
    k: i64,
    exclude: &[Fq2],
) -> Result<Vec<(Fq2, TowerElement)>> {
    let mut out = Vec::new();
    for u in segment_root_residues(f, poly, k, exclude)? {
        out.push((u, refine_at_residue(f, poly, k, u)?));
    }
    Ok(out)
}

/// Isolate the unique tower-rational root of a totally clustered
/// segment: at slope k the residual polynomial has a single nonzero
/// root, of multiplicity p (in residue characteristic p the p shallow
/// roots of a fibre share every residue until they separate at a
/// fractional valuation, so exactly one lies in the tower). Returns
/// the level-k residue together with the refined root.
///
/// The refinement alternates two moves, chosen by the Newton polygon
/// of the recentred polynomial: while the conjugates still cluster,
/// the bottom edge through index 0 pairs with index p and the next
/// correction is the inverse-Frobenius p-th root of −t̄₀/t̄_p; once the
/// target separates, the (0,1) edge takes over and plain Newton steps
/// finish the job.
pub fn cluster_root(f: &TowerField, poly: &TowerPoly, k: i64) -> Result<(Fq2, TowerElement)> {
    let deg = poly.coeffs.len() - 1;
    let res_poly = residual_poly(f, poly, k)?;
    let eval_res = |u: Fq2| -> Fq2 {
        let mut acc = Fq2::ZERO;
        for c in res_poly.iter().rev() {
            acc = f.fq2.add(f.fq2.mul(acc, u), *c);
        }
        acc
    };
    let mut roots = f
        .fq2
        .all_elements()
        .filter(|u| !u.is_zero() && eval_res(*u).is_zero());
    let u0 = roots.next().ok_or_else(|| Error::NoSegment(format!("no cluster at slope {k}")))?;
    if roots.next().is_some() {
        return Err(Error::NoSegment(format!(
            "slope {k} residual has several nonzero roots; not a cluster"
        )));
    }

    let mut center = f.teichmuller(u0, k);
    let mut last_v: Option<i64> = None;
    loop {
        // exact Taylor shift: coefficients of poly(center + w)
        let mut sh = poly.coeffs.clone();
        for i in 0..deg {
            for j in (i..deg).rev() {
                sh[j] = f.add(&sh[j], &f.mul(&sh[j + 1], &center));
            }
        }
        let shifted = TowerPoly { coeffs: sh };
        let v0 = match f.val_pi(&shifted.coeffs[0]) {
            None => return Ok((u0, center)), // residual invisible: converged
            Some(v) => v,
        };
        if last_v.is_some_and(|lv| v0 <= lv) {
            return Err(Error::HenselStall(v0));
        }
        last_v = Some(v0);
        // the leftmost polygon segment carries the deepest roots of the
        // shifted polynomial, i.e. the remaining corrections to the center
        let seg = newton_polygon(f, &shifted)?
            .segments()
            .into_iter()
            .next()
            .ok_or(Error::ZeroPolynomial)?;
        if seg.i0 != 0 {
            return Ok((u0, center)); // w = 0 is (visibly) a root already
        }
        let slope = seg.root_val_pi();
        if !slope.is_integer() {
            // fractional separation: the root is wild over this tower;
            // the accumulated center is the best rational approximant
            return Ok((u0, center));
        }
        let ell = i64::try_from(slope.to_integer()).expect("slope fits i64");
        if seg.len() == 1 {
            // unique deepest root, now simple: plain Newton doubles depth
            let t1 = shifted.coeffs[1].clone();
            let delta = f.div(&shifted.coeffs[0], &t1)?;
            if f.val_pi(&delta).is_none_or(|vd| vd >= center.prec) {
                return Ok((u0, center));
            }
            center = f.sub(&center, &delta);
            continue;
        }
        // next digit of the center: any nonzero root of the residual
        // polynomial along this segment (deterministic scan order)
        let res = residual_poly(f, &shifted, ell)?;
        let eval = |u: Fq2| -> Fq2 {
            let mut acc = Fq2::ZERO;
            for c in res.iter().rev() {
                acc = f.fq2.add(f.fq2.mul(acc, u), *c);
            }
            acc
        };
        let Some(u) = f.fq2.all_elements().find(|u| !u.is_zero() && eval(*u).is_zero()) else {
            return Ok((u0, center)); // residual has no rational digit
        };
        center = f.add(&center, &f.teichmuller(u, ell));
    }
}

/// Newton iteration x ← x − f(x)/f'(x) from a start whose residual root
/// is simple; v(f(x)) must strictly increase every step.
fn newton_refine(
    f: &TowerField,
    poly: &TowerPoly,
    fprime: &TowerPoly,
    mut x: TowerElement,
) -> Result<TowerElement> {
    let mut last_v: Option<i64> = None;
    for _ in 0..64 {
        let fx = poly.eval(f, &x);
        let v = match f.val_pi(&fx) {
            None => return Ok(x), // residual invisible: converged
            Some(v) => v,
        };
        if let Some(lv) = last_v {
            if v <= lv {
                return Err(Error::HenselStall(v));
            }
        }
        last_v = Some(v);
        let fpx = fprime.eval(f, &x);
        let delta = f.div(&fx, &fpx)?;
        if f.val_pi(&delta).map_or(true, |vd| vd >= x.prec) {
            return Ok(x);
        }
        x = f.sub(&x, &delta);
    }
    Err(Error::HenselStall(last_v.unwrap_or(0)))
}

/// Hensel lift from x₀: requires v(f(x₀)) > 2·v(f'(x₀)) after removing
/// the content of f (both in π-units), then runs Newton to convergence.
pub fn hensel_lift(f: &TowerField, poly: &TowerPoly, x0: &TowerElement) -> Result<TowerElement> {
    let fprime = poly.derivative(f);
    let fx = poly.eval(f, x0);
    let fpx = fprime.eval(f, x0);
    let vfp = f.val_pi(&fpx).ok_or(Error::BelowPrecision)?;
    let content = poly
        .coeffs
        .iter()
        .filter_map(|c| f.val_pi(c))
        .min()
        .ok_or(Error::ZeroPolynomial)?;
    match f.val_pi(&fx) {
        None => {} // already a root to working precision
        Some(vf) => {
            if vf - content <= 2 * (vfp - content) {
                return Err(Error::HenselPrecondition { vf, vfp });
            }
        }
    }
    newton_refine(f, poly, &fprime, x0.clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::rat;

    fn poly(f: &TowerField, cs: Vec<TowerElement>) -> TowerPoly {
        let _ = f;
        TowerPoly { coeffs: cs }
    }

    #[test]
    fn square_root_of_p_via_newton_polygon() {
        let f = TowerField::new(13, 2, 3).unwrap();
        // Y² − p: polygon from (0, 2) to (2, 0), root valuation 1 π-unit.
        let g = poly(
            &f,
            vec![f.neg(&f.pi_pow(2)), f.zero(), f.one()],
        );
        let np = newton_polygon(&f, &g).unwrap();
        let segs = np.segments();
        assert_eq!(segs.len(), 1);
        assert_eq!(segs[0].root_val_pi(), rat(1, 1));
        assert_eq!(segs[0].len(), 2);
        let roots = segment_roots(&f, &g, 1, &[]).unwrap();
        assert_eq!(roots.len(), 2, "±√p");
        for (_, r) in &roots {
            let back = f.mul(r, r);
            let diff = f.sub(&back, &f.pi_pow(2));
            assert!(f.is_invisible(&diff), "r² = p exactly");
            assert_eq!(f.valuation(r).unwrap(), rat(1, 2));
        }
    }

    #[test]
    fn hensel_lifts_unit_square_root() {
        // √(1+p) in the unramified part: e = 1, so π-units = p-units.
        let f = TowerField::new(13, 1, 3).unwrap();
        let target = f.scalar(f.witt.el(14, 0));
        let g = poly(&f, vec![f.neg(&target), f.zero(), f.one()]);
        let x0 = f.one(); // f(1) = −13: v = 1 > 2·v(f'(1)) = 0
        let r = hensel_lift(&f, &g, &x0).unwrap();
        let diff = f.sub(&f.mul(&r, &r), &target);
        assert!(f.is_invisible(&diff));
    }

    #[test]
    fn hensel_precondition_is_enforced() {
        let f = TowerField::new(13, 2, 3).unwrap();
        // Y² − p from x0 = 0: v(f) = 2, v(f') = ∞ → no derivative visible.
        let g = poly(&f, vec![f.neg(&f.pi_pow(2)), f.zero(), f.one()]);
        assert!(hensel_lift(&f, &g, &f.zero()).is_err());
        // from x0 = 1: v(f(1)) = 0, v(f'(1)) = 0 → precondition fails.
        assert!(matches!(
            hensel_lift(&f, &g, &f.one()),
            Err(Error::HenselPrecondition { .. })
        ));
    }

    #[test]
    fn shift_round_trip_and_valuations() {
        let f = TowerField::new(13, 338, 3).unwrap(); // e = 2p²
        let gamma = f.pi_pow(12); // v = (p−1)/2p²
        assert_eq!(f.valuation(&gamma).unwrap(), rat(12, 338));
        assert_eq!(f.valuation(&gamma).unwrap(), rat(6, 169));
        let x = f.shift_up(&f.teichmuller(f.fq2.el(7, 3), 0), 350); // crosses e
        assert_eq!(f.val_pi(&x), Some(350));
        let back = f.shift_down(&x, 350).unwrap();
        assert_eq!(f.val_pi(&back), Some(0));
        assert_eq!(
            f.residue_at(&back, 0).unwrap(),
            f.fq2.el(7, 3),
            "Teichmüller residue survives the round trip"
        );
        // dividing past the valuation must refuse
        assert!(matches!(
            f.shift_down(&x, 351),
            Err(Error::PrecisionLoss { .. })
        ));
    }

    #[test]
    fn inverse_of_unit_in_deep_tower() {
        let mut f = TowerField::new(13, 182, 3).unwrap();
        f.set_work_prec(200);
        // a unit with several slots occupied
        let mut x = f.teichmuller(f.fq2.el(4, 9), 0);
        x = f.add(&x, &f.teichmuller(f.fq2.el(1, 5), 3));
        x = f.add(&x, &f.pi_pow(170));
        let y = f.inverse(&x).unwrap();
        let diff = f.sub(&f.mul(&x, &y), &f.one());
        assert!(f.is_invisible(&diff));
    }

    #[test]
    fn karatsuba_matches_schoolbook() {
        let mut s = 0x2545f4914f6cdd1du64;
        for len in [5usize, 33, 64, 100, 257] {
            let mut next = || {
                s ^= s << 13;
                s ^= s >> 7;
                s ^= s << 17;
                (s % 2197) as i64
            };
            let a: Vec<i64> = (0..len).map(|_| next()).collect();
            let b: Vec<i64> = (0..len + 7).map(|_| next()).collect();
            let mut k = vec![0i64; a.len() + b.len() - 1];
            kconv(&a, &b, &mut k);
            let mut sb = vec![0i64; a.len() + b.len() - 1];
            for (i, &u) in a.iter().enumerate() {
                for (j, &v) in b.iter().enumerate() {
                    sb[i + j] += u * v;
                }
            }
            assert_eq!(k, sb, "len {len}");
        }
    }

    #[test]
    fn mul_agrees_with_defining_relation() {
        // π^e must equal p: (π^{e−1})·π = p·1.
        let f = TowerField::new(13, 14, 3).unwrap();
        let lhs = f.mul(&f.pi_pow(13), &f.pi_pow(1));
        let rhs = f.scalar(f.witt.el(13, 0));
        assert!(f.is_invisible(&f.sub(&lhs, &rhs)));
        // distributivity spot check with mixed slots
        let x = f.add(&f.teichmuller(f.fq2.el(2, 11), 1), &f.pi_pow(5));
        let y = f.add(&f.teichmuller(f.fq2.el(6, 1), 0), &f.pi_pow(13));
        let z = f.add(&f.teichmuller(f.fq2.el(3, 7), 2), &f.one());
        let lhs = f.mul(&x, &f.add(&y, &z));
        let rhs = f.add(&f.mul(&x, &y), &f.mul(&x, &z));
        assert!(f.is_invisible(&f.sub(&lhs, &rhs)));
    }
}
