//! The affinoid laboratory: realize the circle affinoids Y_{a,b} and
//! Z_{a,b} as solution towers of the recentred modular correspondence
//! F^β(X, Y) = (X^p − Y)(X − Y^p) + p·f₁(X, Y) over ramified towers,
//! sample points deterministically, and verify
//!
//!  * the five-case valuation table for v(Y) given v(X) on a fibre,
//!  * every reduced defining equation (Y₁₁ through Z₂₁/Z₁₂) as residue
//!    identities in F_{p²},
//!  * the singular-residue-class charts: Artin–Schreier a^p − a = s²
//!    on the Z-components and the a^p − a = c·t^{p+1} class on Y₂₂.
//!
//! Every check reports the exact residues it computed; a nonzero
//! residue is a verification failure carrying the seed that produced
//! the point.

use crate::arith::{rat, Fq2, Rat, WittTrunc};
use crate::error::{Error, Result};
use crate::modpoly::ShiftedKronecker;
use crate::quotient::{QuotientRing, RingElt};
use crate::tower::{
    cluster_root, newton_polygon, refine_at_residue, segment_root_residues, TowerElement,
    TowerField, TowerPoly,
};
use num_traits::ToPrimitive;
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use serde::Serialize;

/// Witt precision used by all laboratory towers.
const WITT_M: u32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Kind {
    Y,
    Z,
}

/// Prescription of one circle affinoid: the valuations v(X_i) of the
/// tower coordinates, with a pivot disk (v ≥ p/(p+1)) for kind Y.
#[derive(Debug, Clone, Serialize)]
pub struct AffinoidSpec {
    pub kind: Kind,
    pub a: u32,
    pub b: u32,
    /// level exponent: a+b for Y, a+b+1 for Z
    pub n: u32,
    #[serde(skip)]
    pub circle_vals: Vec<Rat>,
    /// index of the pivot coordinate (kind Y only)
    pub pivot: Option<usize>,
}

impl AffinoidSpec {
    pub fn y(p: u64, a: u32, b: u32) -> AffinoidSpec {
        assert!(a >= 1 && b >= 1);
        let n = a + b;
        let pi = p as i64;
        let circle_vals = (0..=n)
            .map(|i| {
                if i < a {
                    rat(1, pi.pow(a - 1 - i) * (pi + 1))
                } else if i == a {
                    rat(pi, pi + 1) // lower bound of the pivot disk
                } else {
                    rat(1, pi.pow(i - a - 1) * (pi + 1))
                }
            })
            .collect();
        AffinoidSpec {
            kind: Kind::Y,
            a,
            b,
            n,
            circle_vals,
            pivot: Some(a as usize),
        }
    }

    pub fn z(p: u64, a: u32, b: u32) -> AffinoidSpec {
        assert!(a >= 1 && b >= 1);
        let n = a + b + 1;
        let pi = p as i64;
        let circle_vals = (0..=n)
            .map(|i| {
                if i <= a {
                    rat(1, 2 * pi.pow(a - i))
                } else {
                    rat(1, 2 * pi.pow(i - a - 1))
                }
            })
            .collect();
        AffinoidSpec {
            kind: Kind::Z,
            a,
            b,
            n,
            circle_vals,
            pivot: None,
        }
    }

    pub fn label(&self) -> String {
        let k = match self.kind {
            Kind::Y => "Y",
            Kind::Z => "Z",
        };
        format!("{k}_{{{},{}}}", self.a, self.b)
    }
}

/// The verified circle components, by name.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Component {
    Y11,
    Y21,
    Y12,
    Y31,
    Y13,
    Y22,
    Z11,
    Z21,
    Z12,
}

impl Component {
    pub const ALL: [Component; 9] = [
        Component::Y11,
        Component::Y21,
        Component::Y12,
        Component::Y31,
        Component::Y13,
        Component::Y22,
        Component::Z11,
        Component::Z21,
        Component::Z12,
    ];

    pub fn parse(s: &str) -> Option<Component> {
        match s.to_ascii_uppercase().as_str() {
            "Y11" => Some(Component::Y11),
            "Y21" => Some(Component::Y21),
            "Y12" => Some(Component::Y12),
            "Y31" => Some(Component::Y31),
            "Y13" => Some(Component::Y13),
            "Y22" => Some(Component::Y22),
            "Z11" => Some(Component::Z11),
            "Z21" => Some(Component::Z21),
            "Z12" => Some(Component::Z12),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Component::Y11 => "Y11",
            Component::Y21 => "Y21",
            Component::Y12 => "Y12",
            Component::Y31 => "Y31",
            Component::Y13 => "Y13",
            Component::Y22 => "Y22",
            Component::Z11 => "Z11",
            Component::Z21 => "Z21",
            Component::Z12 => "Z12",
        }
    }

    pub fn spec(&self, p: u64) -> AffinoidSpec {
        match self {
            Component::Y11 => AffinoidSpec::y(p, 1, 1),
            Component::Y21 => AffinoidSpec::y(p, 2, 1),
            Component::Y12 => AffinoidSpec::y(p, 1, 2),
            Component::Y31 => AffinoidSpec::y(p, 3, 1),
            Component::Y13 => AffinoidSpec::y(p, 1, 3),
            Component::Y22 => AffinoidSpec::y(p, 2, 2),
            Component::Z11 => AffinoidSpec::z(p, 1, 1),
            Component::Z21 => AffinoidSpec::z(p, 2, 1),
            Component::Z12 => AffinoidSpec::z(p, 1, 2),
        }
    }

    /// Ramification index of the tower the component is verified over:
    /// the smallest e making every scaling element an integral π-power.
    pub fn tower_e(&self, p: u64) -> usize {
        let p = p as usize;
        match self {
            Component::Y11 => p + 1,
            Component::Y21 | Component::Y12 => p * (p + 1),
            Component::Y31 | Component::Y13 | Component::Y22 => p * p * (p + 1),
            Component::Z11 => 2 * p * p,
            Component::Z21 | Component::Z12 => 2 * p * p * p,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ResidueCheck {
    pub name: String,
    pub ok: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct ResidueReport {
    pub component: String,
    pub p: u64,
    pub seed: u64,
    pub checks: Vec<ResidueCheck>,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ChartReport {
    pub label: String,
    pub branch: String,
    pub p: u64,
    pub seed: u64,
    pub points: usize,
    pub checks: Vec<ResidueCheck>,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct CaseReport {
    pub p: u64,
    pub q: String,
    pub case_id: u8,
    pub expected: Vec<(String, usize)>,
    pub observed: Vec<(String, usize)>,
    pub pass: bool,
}

fn fq2_str(u: Fq2) -> String {
    format!("{}+{}w", u.a, u.b)
}

/// π-units of an exact rational valuation; errors when e can't realize it.
fn pi_units(v: &Rat, e: usize) -> Result<i64> {
    let t = v.clone() * rat(e as i64, 1);
    if !num_traits::One::is_one(t.denom()) {
        return Err(Error::NotRepresentable {
            num: v.numer().to_i64().unwrap_or(0),
            den: v.denom().to_i64().unwrap_or(0),
            e,
        });
    }
    Ok(t.numer().to_i64().unwrap())
}

/// Scalar c (an integer mod p^m) as a tower element.
fn c_scalar(f: &TowerField, c: u64) -> TowerElement {
    f.scalar(WittTrunc::from_base(c % f.witt.pm))
}

/// The fibre polynomial Y ↦ F^β(x, Y), degree p+1.
fn fbeta_poly_in_y(f: &TowerField, sk: &ShiftedKronecker, x: &TowerElement) -> TowerPoly {
    let p = f.p;
    let deg = (p + 1) as usize;
    let mut xp = Vec::with_capacity(deg + 1);
    xp.push(f.one());
    for i in 1..=deg {
        let prev = xp[i - 1].clone();
        xp.push(f.mul(&prev, x));
    }
    let mut coeffs = Vec::with_capacity(deg + 1);
    for j in 0..=deg {
        // p · Σ_i f₁[i][j] x^i — the factor p is exactly π^e
        let mut c = f.zero();
        for (i, xi) in xp.iter().enumerate() {
            let a = sk.f1[i][j] % f.witt.pm;
            if a != 0 {
                c = f.add(&c, &f.scale_small(xi, a));
            }
        }
        coeffs.push(f.shift_up(&c, f.e as i64));
    }
    // + (x^p − Y)(x − Y^p) = x^{p+1} − x^p Y^p − x Y + Y^{p+1}
    coeffs[0] = f.add(&coeffs[0], &xp[deg]);
    coeffs[1] = f.sub(&coeffs[1], x);
    coeffs[p as usize] = f.sub(&coeffs[p as usize], &xp[p as usize]);
    coeffs[deg] = f.add(&coeffs[deg], &f.one());
    TowerPoly { coeffs }
}

/// F^β(x, y) directly.
pub fn fbeta_eval(
    f: &TowerField,
    sk: &ShiftedKronecker,
    x: &TowerElement,
    y: &TowerElement,
) -> TowerElement {
    fbeta_poly_in_y(f, sk, x).eval(f, y)
}

fn rand_fq2(rng: &mut ChaCha8Rng, p: u64) -> Fq2 {
    loop {
        let a = rng.next_u64() % p;
        let b = rng.next_u64() % p;
        let u = Fq2 { a, b };
        if !u.is_zero() {
            return u;
        }
    }
}

/// Deterministic RNG for (seed, label): same pair, same stream.
fn lab_rng(seed: u64, label: &str) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ crate::modpoly::fnv1a64(label.as_bytes()))
}

// ---------------------------------------------------------------------
// five-case valuation table
// ---------------------------------------------------------------------

/// Which of the five fibre-valuation cases 0 < q < 1 falls into.
pub fn valuation_case(p: u64, q: &Rat) -> u8 {
    let lo = rat(1, p as i64 + 1);
    let hi = rat(p as i64, p as i64 + 1);
    if *q < lo {
        1
    } else if *q == lo {
        2
    } else if *q < hi {
        3
    } else if *q == hi {
        4
    } else {
        5
    }
}

/// Sample X with v(X) = q (smooth unit residue) and compare the Newton
/// polygon of Y ↦ F^β(X, Y) against the case table:
///   1: q < 1/(p+1)        → {pq ×1, q/p ×p}
///   2: q = 1/(p+1)        → {≥ p/(p+1) ×1, q/p ×p}
///   3: 1/(p+1) < q < p/(p+1) → {1−q ×1, q/p ×p}
///   4,5: q ≥ p/(p+1)      → all p+1 roots at 1/(p+1)
pub fn valuation_profile(sk: &ShiftedKronecker, q: &Rat, seed: u64) -> Result<CaseReport> {
    let p = sk.p;
    if *q <= rat(0, 1) || *q >= rat(1, 1) {
        return Err(Error::Usage(format!("q = {q} outside (0,1)")));
    }
    let e = q.denom().to_usize().ok_or(Error::Usage("q too deep".into()))?;
    let f = TowerField::new(p, e, WITT_M)?;
    let k = pi_units(q, e)?;
    let case_id = valuation_case(p, q);

    let mut rng = lab_rng(seed, &format!("case-table q={q}"));
    let c0b = Fq2::from_base(sk.c0_bar());
    let u = loop {
        let u = rand_fq2(&mut rng, p);
        // stay in the generic branch: avoid the residue classes where
        // the constant fibre coefficient X^{p+1} + p·f₁ cancels deeper
        if (case_id == 2 || case_id == 4) && f.fq2.pow(u, p + 1) == f.fq2.neg(c0b) {
            continue;
        }
        break u;
    };
    let x = f.teichmuller(u, k);
    let poly = fbeta_poly_in_y(&f, sk, &x);
    let np = newton_polygon(&f, &poly)?;
    let observed: Vec<(Rat, usize)> = np
        .segments()
        .iter()
        .map(|s| (s.root_val_pi() / rat(e as i64, 1), s.len()))
        .collect();

    let lo = rat(1, p as i64 + 1);
    let expected: Vec<(Rat, usize)> = match case_id {
        1 => vec![
            (q.clone() * rat(p as i64, 1), 1),
            (q.clone() / rat(p as i64, 1), p as usize),
        ],
        2 => vec![
            (rat(p as i64, p as i64 + 1), 1), // "≥" — generic samples sit exactly here
            (q.clone() / rat(p as i64, 1), p as usize),
        ],
        3 => vec![
            (rat(1, 1) - q.clone(), 1),
            (q.clone() / rat(p as i64, 1), p as usize),
        ],
        _ => vec![(lo, p as usize + 1)],
    };
    // polygons list slopes from steep (deep roots, low i) to shallow;
    // sort both multisets for comparison
    let norm = |mut v: Vec<(Rat, usize)>| {
        v.sort();
        v
    };
    let (obs, exp) = (norm(observed), norm(expected));
    let pass = obs == exp;
    let fmt = |v: &[(Rat, usize)]| {
        v.iter()
            .map(|(r, m)| (r.to_string(), *m))
            .collect::<Vec<_>>()
    };
    let report = CaseReport {
        p,
        q: q.to_string(),
        case_id,
        expected: fmt(&exp),
        observed: fmt(&obs),
        pass,
    };
    if !pass {
        return Err(Error::Verification {
            check: format!("valuation case {case_id} at q = {q}"),
            seed,
            detail: format!("expected {:?}, observed {:?}", report.expected, report.observed),
        });
    }
    Ok(report)
}

// ---------------------------------------------------------------------
// tower sampling
// ---------------------------------------------------------------------

/// A sampled point of an affinoid: the tower coordinates plus the
/// smallest tower-equation residual valuation seen (π-units; None when
/// every residual is invisible at working precision).
pub struct SamplePoint {
    pub spec: AffinoidSpec,
    pub seed: u64,
    pub x: Vec<TowerElement>,
    pub min_residual: Option<i64>,
}

struct ChainSolver<'a> {
    f: &'a TowerField,
    sk: &'a ShiftedKronecker,
    spec: &'a AffinoidSpec,
    rng: ChaCha8Rng,
    /// residue (at its circle level) the final coordinate must have
    forced_last: Option<Fq2>,
}

impl<'a> ChainSolver<'a> {
    fn solve(&mut self, x0: TowerElement) -> Result<Vec<TowerElement>> {
        let mut xs = vec![x0];
        if self.dfs(&mut xs)? {
            Ok(xs)
        } else {
            Err(Error::Verification {
                check: format!("{} tower", self.spec.label()),
                seed: 0,
                detail: "no branch realizes the prescribed valuations".into(),
            })
        }
    }

    fn dfs(&mut self, xs: &mut Vec<TowerElement>) -> Result<bool> {
        let i = xs.len(); // next coordinate to solve
        if i > self.spec.n as usize {
            return Ok(true);
        }
        let f = self.f;
        let e = f.e as i64;
        let poly = fbeta_poly_in_y(f, self.sk, xs.last().unwrap());
        let pivot = self.spec.pivot == Some(i);
        let k = if pivot {
            // the unique deep segment: one root with v ≥ p/(p+1)
            let floor = rat(f.p as i64 * e, f.p as i64 + 1);
            let np = newton_polygon(f, &poly)?;
            let seg = np
                .segments()
                .into_iter()
                .find(|s| s.len() == 1 && s.root_val_pi() >= floor)
                .ok_or_else(|| Error::NoSegment(format!("pivot of {}", self.spec.label())))?;
            let rv = seg.root_val_pi();
            if !num_traits::One::is_one(rv.denom()) {
                return Err(Error::NotRepresentable {
                    num: rv.numer().to_i64().unwrap_or(0),
                    den: rv.denom().to_i64().unwrap_or(0),
                    e: f.e,
                });
            }
            rv.numer().to_i64().unwrap()
        } else {
            pi_units(&self.spec.circle_vals[i], f.e)?
        };
        // just after a pivot, refuse the branch that walks back: the
        // coordinate below the pivot is also a root of the same fibre
        let mut exclude = Vec::new();
        if self.spec.kind == Kind::Y && i == self.spec.a as usize + 1 {
            exclude.push(f.residue_at(&xs[i - 2], k)?);
        }
        let mut cand = segment_root_residues(f, &poly, k, &exclude)?;
        if cand.is_empty() && !pivot {
            // descending steps in residue characteristic p: the p
            // shallow roots cluster on one p-fold residue, and exactly
            // one of them is tower-rational
            let (u, root) = cluster_root(f, &poly, k)?;
            if exclude.contains(&u) {
                return Ok(false);
            }
            if i == self.spec.n as usize {
                if let Some(want) = self.forced_last {
                    if u != want {
                        return Ok(false);
                    }
                }
            }
            xs.push(root);
            if self.dfs(xs)? {
                return Ok(true);
            }
            xs.pop();
            return Ok(false);
        }
        if cand.is_empty() {
            return Err(Error::LiftRefusal);
        }
        if i == self.spec.n as usize {
            if let Some(want) = self.forced_last {
                cand.retain(|u| *u == want);
            }
        }
        // deterministic random branch order
        for j in (1..cand.len()).rev() {
            cand.swap(j, (self.rng.next_u64() as usize) % (j + 1));
        }
        for u in cand {
            let root = match refine_at_residue(f, &poly, k, u) {
                Ok(r) => r,
                Err(Error::HenselStall(_)) => continue,
                Err(e) => return Err(e),
            };
            xs.push(root);
            if self.dfs(xs)? {
                return Ok(true);
            }
            xs.pop();
        }
        Ok(false)
    }
}

/// Residues a smooth sample of X₀ must avoid: the singular-class
/// centers of the component's reduced curve.
fn x0_is_singular(f: &TowerField, sk: &ShiftedKronecker, spec: &AffinoidSpec, u: Fq2) -> bool {
    let p = f.p;
    let c0b = Fq2::from_base(sk.c0_bar());
    match spec.kind {
        // pivot degeneracy: (u^{p^{a−1}})^{p+1} = −c̄₀
        Kind::Y => {
            let exp = p.pow(spec.a - 1) * (p + 1);
            f.fq2.pow(u, exp) == f.fq2.neg(c0b)
        }
        // nodes of Z^p + c̄₀(c̄₀/x^{p+1} + x^{p+1}/c̄₀): x^{2(p+1)} = c̄₀²
        Kind::Z => f.fq2.pow(u, 2 * (p + 1)) == f.fq2.mul(c0b, c0b),
    }
}

/// Sample a smooth point of the affinoid over the standard tower.
pub fn sample_tower(
    sk: &ShiftedKronecker,
    comp: Component,
    seed: u64,
) -> Result<SamplePoint> {
    let p = sk.p;
    let spec = comp.spec(p);
    // the fibre polynomial is symmetric, so the chain can be solved in
    // either coordinate order; solve mirrored components (b > a) through
    // their mirror's chain, which ascends first and meets its one wild
    // descent last, where the input coordinate is still accurate
    let reversed = spec.b > spec.a;
    let solve_spec = if reversed {
        match spec.kind {
            Kind::Y => AffinoidSpec::y(p, spec.b, spec.a),
            Kind::Z => AffinoidSpec::z(p, spec.b, spec.a),
        }
    } else {
        spec.clone()
    };
    let f = lab_field(sk, comp.tower_e(p), &solve_spec)?;
    let mut rng = lab_rng(seed, comp.name());
    let k0 = pi_units(&solve_spec.circle_vals[0], f.e)?;
    // some starting residues admit no F_{p²}-rational chain (the fibre
    // below the pivot can have all its non-walkback roots conjugate over
    // a degree-p extension); such refusals are resampled, and the final
    // checks below revalidate whatever chain is found
    let mut last_err = Error::LiftRefusal;
    for _ in 0..32 {
        let u0 = loop {
            let u = rand_fq2(&mut rng, p);
            if !x0_is_singular(&f, sk, &solve_spec, u) {
                break u;
            }
        };
        let x0 = f.teichmuller(u0, k0);
        let mut solver = ChainSolver {
            f: &f,
            sk,
            spec: &solve_spec,
            rng: rng.clone(),
            forced_last: None,
        };
        match solver.solve(x0) {
            Ok(mut xs) => {
                if reversed {
                    xs.reverse();
                }
                return finish_sample(&f, sk, spec, seed, xs);
            }
            Err(
                e @ (Error::Verification { .. }
                | Error::NoSegment(_)
                | Error::LiftRefusal
                | Error::HenselStall(_)),
            ) => last_err = e,
            Err(e) => return Err(e),
        }
    }
    Err(last_err)
}

fn lab_field(sk: &ShiftedKronecker, e: usize, spec: &AffinoidSpec) -> Result<TowerField> {
    let mut f = TowerField::new(sk.p, e, WITT_M)?;
    // deepest circle the sampler must represent, doubled so pivot
    // roots that sink below their floor in a singular residue class
    // stay visible, plus slack for the residue checks downstream
    let deepest = spec
        .circle_vals
        .iter()
        .map(|v| pi_units(v, e).unwrap_or(0))
        .max()
        .unwrap_or(0);
    let mut want = 2 * deepest + 90 * (sk.p as i64);
    // a descending fibre is solved as a p-fold cluster whose root is
    // π^{v(F'_U)−v(F'_V)}-sensitive to its input coordinate; the input
    // must therefore carry ~e extra correct digits for the digits up to
    // the cluster's rational-approximation wall to be trustworthy
    let ks: Vec<i64> = spec
        .circle_vals
        .iter()
        .map(|v| pi_units(v, e).unwrap_or(0))
        .collect();
    if ks.windows(2).any(|w| w[0] > w[1]) {
        want += e as i64;
    }
    f.set_work_prec(want.min(WITT_M as i64 * e as i64));
    Ok(f)
}

fn finish_sample(
    f: &TowerField,
    sk: &ShiftedKronecker,
    spec: AffinoidSpec,
    seed: u64,
    xs: Vec<TowerElement>,
) -> Result<SamplePoint> {
    // tower-consistency: each fibre equation must be satisfied far
    // beyond every residue level the verifications read
    let mut min_residual: Option<i64> = None;
    for w in xs.windows(2) {
        let r = fbeta_eval(f, sk, &w[0], &w[1]);
        if let Some(v) = f.val_pi(&r) {
            if v < f.e as i64 {
                return Err(Error::Verification {
                    check: format!("{} tower residual", spec.label()),
                    seed,
                    detail: format!("v_pi(F(X_i, X_{{i+1}})) = {v} < e = {}", f.e),
                });
            }
            min_residual = Some(min_residual.map_or(v, |m: i64| m.min(v)));
        }
    }
    // valuation honesty
    for (i, x) in xs.iter().enumerate() {
        let v = f.valuation(x)?;
        let want = &spec.circle_vals[i];
        let ok = if spec.pivot == Some(i) { v >= *want } else { v == *want };
        if !ok {
            return Err(Error::Verification {
                check: format!("{} circle valuations", spec.label()),
                seed,
                detail: format!("v(X_{i}) = {v}, prescribed {want}"),
            });
        }
    }
    Ok(SamplePoint {
        spec,
        seed,
        x: xs,
        min_residual,
    })
}

// ---------------------------------------------------------------------
// reduced-equation verification
// ---------------------------------------------------------------------

struct Residues {
    checks: Vec<ResidueCheck>,
}

impl Residues {
    fn push_zero(&mut self, name: &str, got: Fq2) {
        self.checks.push(ResidueCheck {
            name: name.into(),
            ok: got.is_zero(),
            detail: format!("residue = {}", fq2_str(got)),
        });
    }

    fn push_eq(&mut self, name: &str, got: Fq2, want: Fq2) {
        self.checks.push(ResidueCheck {
            name: name.into(),
            ok: got == want,
            detail: format!("got {}, want {}", fq2_str(got), fq2_str(want)),
        });
    }

}

/// The smooth-curve equation x·y·(x−y)^{p−1} = c̄₀ shared by the Y
/// components (with x read through the appropriate Frobenius power).
fn y_curve_check(f: &TowerField, sk: &ShiftedKronecker, xb: Fq2, yb: Fq2, frob: u32) -> (Fq2, Fq2) {
    let q = &f.fq2;
    let xf = q.pow(xb, f.p.pow(frob));
    let lhs = q.mul(
        q.mul(xf, yb),
        q.pow(q.sub(xf, yb), f.p - 1),
    );
    (lhs, Fq2::from_base(sk.c0_bar()))
}

/// g(T) = Σ_{k≥1} f₁[k][0] T^{k−1}: the fibre-constant correction
/// series entering the Y₂₂ change of variables.
fn g_series_eval(f: &TowerField, sk: &ShiftedKronecker, t: &TowerElement) -> TowerElement {
    let mut acc = f.zero();
    for k in (1..sk.f1.len()).rev() {
        acc = f.add(&f.mul(&acc, t), &c_scalar(f, sk.f1[k][0]));
    }
    acc
}

/// Z and its ingredients on a Y₂₂ point: x = X₀/α, y = X₄/α (α = π^p),
/// γ = π^{p²−1} (γ^p = p/α^{p+1} exactly), and
/// Z = (x·y·(x−y)^{p−1} − c₀ − α·x·y·(g(X₄)−g(X₀))/(x−y)) / γ.
fn y22_z_chart(
    f: &TowerField,
    sk: &ShiftedKronecker,
    xs: &[TowerElement],
) -> Result<(TowerElement, TowerElement, TowerElement)> {
    let p = f.p as i64;
    let x = f.shift_down(&xs[0], p)?;
    let y = f.shift_down(&xs[4], p)?;
    let d = f.sub(&x, &y);
    let xy = f.mul(&x, &y);
    let main = f.mul(&xy, &f.pow(&d, f.p - 1));
    let gdiff = f.sub(
        &g_series_eval(f, sk, &xs[4]),
        &g_series_eval(f, sk, &xs[0]),
    );
    let corr = f.div(&f.mul(&f.shift_up(&xy, p), &gdiff), &d)?;
    let numer = f.sub(&f.sub(&main, &c_scalar(f, sk.c0)), &corr);
    let z = f.shift_down(&numer, p * p - 1)?;
    Ok((x, y, z))
}

/// The Z₁₁-shape nodal equation residue:
/// Z^p + c̄₀(c̄₀/x^{p+1} + x^{p+1}/c̄₀).
fn z_curve_residue(f: &TowerField, sk: &ShiftedKronecker, zb: Fq2, xb: Fq2) -> Fq2 {
    let q = &f.fq2;
    let c0b = Fq2::from_base(sk.c0_bar());
    let xp1 = q.pow(xb, f.p + 1);
    let inner = q.add(q.mul(c0b, q.inv(xp1)), q.mul(xp1, q.inv(c0b)));
    q.add(q.pow(zb, f.p), q.mul(c0b, inner))
}

/// Z (and x₁, x, y) on a Z-tower: x = X_lo/π^{s}, y = X_hi/π^{s},
/// Z = (x·y − c₀)/γ. Used by Z₁₁ and, one level up, Z₂₁/Z₁₂.
fn z_chart(
    f: &TowerField,
    sk: &ShiftedKronecker,
    xlo: &TowerElement,
    xhi: &TowerElement,
    scale: i64,
    gamma: i64,
) -> Result<(TowerElement, TowerElement, TowerElement)> {
    let x = f.shift_down(xlo, scale)?;
    let y = f.shift_down(xhi, scale)?;
    let numer = f.sub(&f.mul(&x, &y), &c_scalar(f, sk.c0));
    let z = f.shift_down(&numer, gamma)?;
    Ok((x, y, z))
}

/// The Z₂₁ second chart coordinate
/// Z₁ = (Z + x₁^{p+1} + c₀²/x₁^{p+1}) · c₀ / (γ₁ x₁^{p+1}), γ₁ = π^{p−1}.
fn z21_z1_chart(
    f: &TowerField,
    sk: &ShiftedKronecker,
    z: &TowerElement,
    x1: &TowerElement,
    gamma1: i64,
) -> Result<TowerElement> {
    let x1p1 = f.pow(x1, f.p + 1);
    let c0 = c_scalar(f, sk.c0);
    let c0sq = f.mul(&c0, &c0);
    let numer = f.add(&f.add(z, &x1p1), &f.div(&c0sq, &x1p1)?);
    let den = f.shift_up(&x1p1, gamma1);
    f.div(&f.mul(&numer, &c0), &den)
}

/// Verify the component's reduced defining equation(s) on one sampled
/// point. Residue names follow the coordinates they are written in.
pub fn verify_reduction(sk: &ShiftedKronecker, comp: Component, seed: u64) -> Result<ResidueReport> {
    let pt = sample_tower(sk, comp, seed)?;
    let p = sk.p;
    let spec = comp.spec(p);
    let f = lab_field(sk, comp.tower_e(p), &spec)?;
    let q = &f.fq2;
    let pi = p as i64;
    let mut r = Residues { checks: Vec::new() };
    let xs = &pt.x;
    match comp {
        Component::Y11 => {
            let u = f.residue_at(&xs[0], 1)?;
            let v = f.residue_at(&xs[2], 1)?;
            let (lhs, c) = y_curve_check(&f, sk, u, v, 0);
            r.push_eq("u·v·(u−v)^{p−1} = c̄₀", lhs, c);
        }
        Component::Y21 | Component::Y12 => {
            let (lo, hi) = if comp == Component::Y21 { (0, 3) } else { (3, 0) };
            let x = f.residue_at(&xs[lo], 1)?;
            let v = f.residue_at(&xs[hi], pi)?;
            let (lhs, c) = y_curve_check(&f, sk, x, v, 1);
            r.push_eq("x^p·v·(x^p−v)^{p−1} = c̄₀", lhs, c);
        }
        Component::Y31 | Component::Y13 => {
            let (lo, hi) = if comp == Component::Y31 { (0, 4) } else { (4, 0) };
            let x1 = f.residue_at(&xs[lo], 1)?;
            let v = f.residue_at(&xs[hi], pi * pi)?;
            let (lhs, c) = y_curve_check(&f, sk, x1, v, 2);
            r.push_eq("x₁^{p²}·v·(x₁^{p²}−v)^{p−1} = c̄₀", lhs, c);
            // the coordinates flanking the pivot solve the same fibre
            // polynomial; the sampler must have kept them apart
            let a = spec.a as usize;
            let lvl = pi_units(&spec.circle_vals[a - 1], f.e)?;
            let lo_r = f.residue_at(&xs[a - 1], lvl)?;
            let hi_r = f.residue_at(&xs[a + 1], lvl)?;
            r.checks.push(ResidueCheck {
                name: "X_{a−1} ≠ X_{a+1}".into(),
                ok: lo_r != hi_r,
                detail: format!("{} vs {}", fq2_str(lo_r), fq2_str(hi_r)),
            });
        }
        Component::Y22 => {
            let (x, y, z) = y22_z_chart(&f, sk, xs)?;
            let xb = f.residue_at(&x, 0)?;
            let yb = f.residue_at(&y, 0)?;
            let (lhs, c) = y_curve_check(&f, sk, xb, yb, 0);
            r.push_eq("x·y·(x−y)^{p−1} = c̄₀", lhs, c);
            let zb = f.residue_at(&z, 0)?;
            let c0b = Fq2::from_base(sk.c0_bar());
            let c0sq = q.mul(c0b, c0b);
            let inv_sum = q.add(
                q.inv(q.pow(xb, p + 1)),
                q.inv(q.pow(yb, p + 1)),
            );
            let got = q.add(q.add(q.pow(zb, p), c0b), q.mul(c0sq, inv_sum));
            r.push_zero("Z^p + c̄₀ + c̄₀²(x^{−(p+1)} + y^{−(p+1)})", got);
        }
        Component::Z11 => {
            let (x, y, z) = z_chart(&f, sk, &xs[0], &xs[3], pi, pi - 1)?;
            let xb = f.residue_at(&x, 0)?;
            let yb = f.residue_at(&y, 0)?;
            r.push_eq("x̄·ȳ = c̄₀", q.mul(xb, yb), Fq2::from_base(sk.c0_bar()));
            let zb = f.residue_at(&z, 0)?;
            r.push_zero(
                "Z^p + c̄₀(c̄₀/x^{p+1} + x^{p+1}/c̄₀)",
                z_curve_residue(&f, sk, zb, xb),
            );
        }
        Component::Z21 | Component::Z12 => {
            let (i0, i1, i4) = if comp == Component::Z21 { (0, 1, 4) } else { (4, 3, 0) };
            let x1 = f.shift_down(&xs[i0], pi)?;
            let (x, y, z) = z_chart(&f, sk, &xs[i1], &xs[i4], pi * pi, pi * (pi - 1))?;
            let z1 = z21_z1_chart(&f, sk, &z, &x1, pi - 1)?;
            let x1b = f.residue_at(&x1, 0)?;
            let xb = f.residue_at(&x, 0)?;
            let yb = f.residue_at(&y, 0)?;
            r.push_eq("x̄ = x̄₁^p", xb, q.pow(x1b, p));
            r.push_eq("x̄·ȳ = c̄₀", q.mul(xb, yb), Fq2::from_base(sk.c0_bar()));
            let z1b = f.residue_at(&z1, 0)?;
            r.push_zero(
                "Z₁^p + c̄₀(c̄₀/x₁^{p+1} + x₁^{p+1}/c̄₀)",
                z_curve_residue(&f, sk, z1b, x1b),
            );
        }
    }
    r.checks.push(ResidueCheck {
        name: "tower residuals beyond e".into(),
        ok: true,
        detail: match pt.min_residual {
            Some(v) => format!("min v_pi(F) = {v}"),
            None => "all residuals invisible".into(),
        },
    });
    let pass = r.checks.iter().all(|c| c.ok);
    let report = ResidueReport {
        component: comp.name().into(),
        p,
        seed,
        checks: r.checks,
        pass,
    };
    if !pass {
        let bad = report
            .checks
            .iter()
            .filter(|c| !c.ok)
            .map(|c| format!("{}: {}", c.name, c.detail))
            .collect::<Vec<_>>()
            .join("; ");
        return Err(Error::Verification {
            check: format!("{} reduction", comp.name()),
            seed,
            detail: bad,
        });
    }
    Ok(report)
}

// ---------------------------------------------------------------------
// singular residue classes
// ---------------------------------------------------------------------
//
// The chart centers of the singular residue classes are wildly ramified:
// γ₀ generates a degree-p extension of the tower L, so instead of
// approximating it (every approximation in L stalls at a fractional
// Newton-polygon wall) we adjoin it exactly and verify the chart
// identities inside the quotient ring R = L[γ₀]/(m(γ₀)).

/// Row n of Pascal's triangle reduced mod `pm` (exact, since binomials
/// are iterated sums).
fn pascal_row(n: usize, pm: u64) -> Vec<u64> {
    let mut row = vec![1u64];
    for _ in 0..n {
        let mut next = vec![1u64; row.len() + 1];
        for j in 1..row.len() {
            next[j] = (row[j - 1] + row[j]) % pm;
        }
        next[row.len()] = 1;
        row = next;
    }
    row
}

/// Newton iteration in R for a root of Σ coeffs[k]·Xᵏ near `seed`,
/// where the derivative has exact valuation `dshift` π-units at the
/// seed (a "simple root after rescaling"). Converges quadratically in
/// v(F(a)) − dshift; stops when the residual is invisible.
fn ring_newton(
    ring: &QuotientRing,
    coeffs: &[RingElt],
    seed: RingElt,
    dshift: i64,
) -> Result<RingElt> {
    let deriv = ring.poly_derivative(coeffs);
    let mut a = seed;
    let mut last = i64::MIN;
    for _ in 0..100 {
        let fv = ring.poly_eval(coeffs, &a);
        if ring.is_invisible(&fv) {
            return Ok(a);
        }
        let v = ring.val_floor(&fv);
        if v <= last {
            return Err(Error::HenselStall(v));
        }
        last = v;
        let dv = ring.shift_down(&ring.poly_eval(&deriv, &a), dshift)?;
        let delta = ring.mul(&ring.shift_down(&fv, dshift)?, &ring.inverse(&dv)?);
        a = ring.sub(&a, &delta);
    }
    Err(Error::HenselStall(last))
}

/// Trace F_{p²} → F_p of x, as an element of F_{p²} (zero iff trace 0).
fn fq2_trace(q: &crate::arith::Fq2Field, p: u64, x: Fq2) -> Fq2 {
    q.add(x, q.pow(x, p))
}

/// Verify the Artin–Schreier chart a^p − a = s² in a singular residue
/// class of the Z-component nodes. `deep` = false works on the Z₁₁
/// chart (tower e = 4p²), true on the Z₂₁ chart (e = 4p³); in π-units
/// both charts carry the scale γ̃ = π^{2(p−1)} and the perturbation
/// scale π^p, so one core serves both. `plus` selects the node family
/// ζ^{p+1} = ±1, `zeta_index` the root of unity within it.
///
/// The chart center Z = γ₀ is a root of m(z) = z^p ± 2c₀(c₀ + γ̃z)^{(p−1)/2},
/// wildly ramified of degree p; all identities are verified in
/// R = L[γ₀]/(m). The critical x-center is x₀ = ζ·√(c₀ + γ̃γ₀); the
/// chart scales are γ₁ (a (p−1)-th root of −c₀^p·∂_Z F(γ₀, x₀)) and
/// α₁ with α₁² = −(γ₁/c₀)^p(½∂²ₓF)^{−1}. Only α₁² is ever used: a
/// sampled perturbation x = x₀ + T with v(T) ≥ v(α₁) has chart
/// coordinate s with s² = T²/α₁² ∈ R, so no square root of α₁² is
/// needed (for one branch it has none over F_{p²}).
///
/// Sampled residues s̄ must satisfy Tr(s̄²) = 0 for the companion ā to
/// exist in F_{p²} (the curve a^p − a = s² has minimal point count over
/// F_{p²}); when the α₁²-unit is a square this forces s̄ = 0 and the
/// sampler perturbs one level deeper, still exercising the congruence
/// at its full stated depth.
pub fn artin_schreier_chart(
    sk: &ShiftedKronecker,
    deep: bool,
    plus: bool,
    zeta_index: usize,
    seed: u64,
    n_points: usize,
) -> Result<ChartReport> {
    let p = sk.p;
    let pi = p as i64;
    let e = if deep { 4 * p * p * p } else { 4 * p * p } as usize;
    let mut f = TowerField::new(p, e, WITT_M)?;
    f.set_work_prec(100);
    let pm = f.witt.pm;
    let q = &f.fq2;
    let gl = 2 * (pi - 1); // π-level of the nodal chart scale γ̃
    let label = format!(
        "AS{} {} zeta{}",
        if deep { 4 } else { 3 },
        if plus { "+" } else { "-" },
        zeta_index
    );
    let mut rng = lab_rng(seed, &label);

    // modulus m(z) = z^p ± 2c₀(c₀ + γ̃z)^{(p−1)/2}, expanded binomially
    let half = ((p - 1) / 2) as usize;
    let hrow = pascal_row(half, pm);
    let c0w = WittTrunc::from_base(sk.c0 % pm);
    let mut lower = vec![f.zero(); p as usize];
    for (k, bc) in hrow.iter().enumerate() {
        let mut w = f.witt.mul(
            f.witt.pow(c0w, (half - k + 1) as u64),
            WittTrunc::from_base((2 * bc) % pm),
        );
        if !plus {
            w = f.witt.neg(w);
        }
        lower[k] = f.pi_shifted_scalar(w, gl * k as i64);
    }
    // residue root: r̄^p = ∓2c̄₀^{(p+1)/2}
    let c0b = Fq2::from_base(sk.c0_bar());
    let mut w0 = q.mul(Fq2::from_base(2 % p), q.pow(c0b, (half + 1) as u64));
    if plus {
        w0 = q.neg(w0);
    }
    let ring = QuotientRing::new(&f, lower, q.pth_root(w0))?;
    let gamma0 = ring.generator();

    // node family: ζ^{p+1} = ±1
    let sign_one = if plus { Fq2::ONE } else { q.neg(Fq2::ONE) };
    let zetas: Vec<Fq2> = q
        .all_elements()
        .filter(|u| !u.is_zero() && q.pow(*u, p + 1) == sign_one)
        .collect();
    let zeta = zetas[zeta_index % zetas.len()];

    // B = c₀ + γ̃γ₀ and the critical center x₀ = [ζ]·√B
    let c0t = c_scalar(&f, sk.c0);
    let mut bb = ring.from_tower(c0t.clone());
    bb.c[1] = f.pi_pow(gl);
    let x0 = ring.mul_tower(&ring.nth_root(&bb, 2)?, &f.teichmuller(zeta, 0));
    let binv = ring.inverse(&bb)?;
    let xinv = ring.inverse(&x0)?;

    let mut checks = Vec::new();
    let mut push = |name: String, ok: bool, detail: String| {
        checks.push(ResidueCheck { name, ok, detail });
    };

    // the center satisfies the nodal chart equation exactly
    let wcap = ring.pow(&x0, p + 1);
    let anchor = ring.add(
        &ring.mul(&ring.pow(&gamma0, p), &ring.pow(&binv, p)),
        &ring.mul_tower(
            &ring.add(
                &ring.inverse(&wcap)?,
                &ring.mul(&wcap, &ring.pow(&binv, p + 1)),
            ),
            &c0t,
        ),
    );
    push(
        "(γ₀/(c₀+γ̃γ₀))^p + F(γ₀, x₀) = 0".into(),
        ring.is_invisible(&anchor),
        format!("v_pi ≥ {}", ring.val_floor(&anchor)),
    );

    // first derivative claims at the center
    let dx = ring.mul_tower(
        &ring.sub(
            &ring.mul(&ring.pow(&x0, p), &ring.pow(&binv, p + 1)),
            &ring.pow(&xinv, p + 2),
        ),
        &f.scale_small(&c0t, (p + 1) % pm),
    );
    push(
        "∂ₓF(γ₀, x₀) = 0".into(),
        ring.is_invisible(&dx),
        format!("v_pi ≥ {}", ring.val_floor(&dx)),
    );
    let dz = ring.neg(&ring.shift_up(
        &ring.mul_tower(
            &ring.mul(&ring.pow(&x0, p + 1), &ring.pow(&binv, p + 2)),
            &f.scale_small(&c0t, (p + 1) % pm),
        ),
        gl,
    ));
    let dz_unit = ring.shift_down(&dz, gl)?;
    let dz_res = ring.residue(&dz_unit)?;
    push(
        "v(∂_Z F(γ₀, x₀)) = v(γ̃)".into(),
        ring.val_floor(&dz) >= gl && !dz_res.is_zero(),
        format!("v_pi = {} (want {gl}), unit residue {}", ring.val_floor(&dz), fq2_str(dz_res)),
    );
    let dxx = ring.add(
        &ring.mul_tower(
            &ring.pow(&xinv, p + 3),
            &f.scale_small(&c0t, (p + 1) * (p + 2) % pm),
        ),
        &ring.mul_tower(
            &ring.mul(&ring.pow(&x0, p - 1), &ring.pow(&binv, p + 1)),
            &f.scale_small(&c0t, p * (p + 1) % pm),
        ),
    );
    let dxx_res = ring.residue(&dxx)?;
    push(
        "∂²ₓF(γ₀, x₀) is a unit".into(),
        !dxx_res.is_zero(),
        format!("residue {}", fq2_str(dxx_res)),
    );

    // γ₁ = π²·g₁ with g₁^{p−1} the unit part of −c₀^p·∂_Z F
    let c0p = f.pow(&c0t, p);
    let g1 = ring.nth_root(
        &ring.shift_down(&ring.neg(&ring.mul_tower(&dz, &c0p)), gl)?,
        p - 1,
    )?;
    // ŝ = 1/(α₁²-unit): s² = T²·ŝ·π^{−2p} for a perturbation T = x − x₀
    let halft = f.inverse(&f.scale_small(&f.one(), 2))?;
    let g1p = ring.pow(&g1, p);
    let shat = ring.neg(&ring.mul_tower(
        &ring.mul(&ring.inverse(&g1p)?, &dxx),
        &f.mul(&c0p, &halft),
    ));
    let ebar = ring.residue(&shat)?;
    let ebar_square = q.pow(ebar, (p * p - 1) / 2) == Fq2::ONE;
    push(
        "chart coordinate s is F_{p²}-rational".into(),
        true,
        format!(
            "α₁²-unit residue {} is a {}",
            fq2_str(q.inv(ebar)),
            if ebar_square { "square (s ∈ R; Tr(s̄²)=0 forces s̄=0)" } else { "non-square (s̄ ≠ 0 samples exist)" }
        ),
    );
    // shallow perturbation residues: d̄ ≠ 0 with Tr(ē·d̄²) = 0
    let shallow: Vec<Fq2> = q
        .all_elements()
        .filter(|d| {
            !d.is_zero() && fq2_trace(q, p, q.mul(ebar, q.mul(*d, *d))).is_zero()
        })
        .collect();

    let c0p_inv = f.inverse(&c0p)?;
    let prow = pascal_row(p as usize, pm);
    let p1row = pascal_row(p as usize + 1, pm);
    let mut g0pows = vec![ring.one()];
    let mut g1pows = vec![ring.one()];
    let mut bpows = vec![ring.one()];
    for j in 1..=(p as usize + 1) {
        if j <= p as usize {
            g0pows.push(ring.mul(&g0pows[j - 1], &gamma0));
            g1pows.push(ring.mul(&g1pows[j - 1], &g1));
        }
        bpows.push(ring.mul(&bpows[j - 1], &bb));
    }

    for idx in 0..n_points {
        // perturbation T = π^{p+k}·[d̄]: depth k = 0 when the trace
        // condition admits a shallow sample, else k = 1 (s̄ = 0)
        let (dbar, depth) = if !shallow.is_empty() {
            (shallow[(rng.next_u64() as usize) % shallow.len()], 0i64)
        } else {
            let mut d = rand_fq2(&mut rng, p);
            while d.is_zero() {
                d = rand_fq2(&mut rng, p);
            }
            (d, 1i64)
        };
        let t_el = f.teichmuller(dbar, pi + depth);
        let xt = ring.add(&x0, &ring.from_tower(t_el));
        let s2 = ring.mul_tower(&shat, &f.teichmuller(q.mul(dbar, dbar), 2 * depth));
        let s2_bar = if depth == 0 {
            q.mul(ebar, q.mul(dbar, dbar))
        } else {
            Fq2::ZERO
        };

        // chart polynomial A(X) = P(γ₀ + γ₁X, x₀ + T) for the cleared
        // nodal equation P(Z, x) = Z^p x^{p+1}(c₀+γ̃Z) + c₀(c₀+γ̃Z)^{p+1} + c₀x^{2(p+1)}
        let w1 = ring.pow(&xt, p + 1);
        let lin0 = ring.mul(&w1, &bb);
        let lin1 = ring.shift_up(&ring.mul(&w1, &g1), gl + 2);
        let mut apoly = vec![ring.zero(); p as usize + 2];
        for k in 0..=(p as usize) {
            // binomial term C(p,k)·γ₀^{p−k}·γ₁^k, with γ₁ = π²g₁
            if 2 * (k as i64) >= f.work_prec {
                break;
            }
            let bk = ring.shift_up(
                &ring.mul_tower(
                    &ring.mul(&g0pows[p as usize - k], &g1pows[k]),
                    &f.scale_small(&f.one(), prow[k] % pm),
                ),
                2 * k as i64,
            );
            apoly[k] = ring.add(&apoly[k], &ring.mul(&bk, &lin0));
            apoly[k + 1] = ring.add(&apoly[k + 1], &ring.mul(&bk, &lin1));
        }
        for k in 0..=(p as usize + 1) {
            // C(p+1,k)·c₀·B^{p+1−k}·(γ̃γ₁)^k
            if (gl + 2) * (k as i64) >= f.work_prec {
                break;
            }
            let t = ring.shift_up(
                &ring.mul_tower(
                    &ring.mul(&bpows[p as usize + 1 - k], &g1pows[k.min(p as usize)]),
                    &f.scale_small(&c0t, p1row[k] % pm),
                ),
                (gl + 2) * k as i64,
            );
            apoly[k] = ring.add(&apoly[k], &t);
        }
        apoly[0] = ring.add(&apoly[0], &ring.mul_tower(&ring.mul(&w1, &w1), &c0t));

        // residues of A/π^{2p}: the slope-0 residual polynomial whose
        // roots over F_{p²} seed the chart value a
        let dshift = 2 * pi; // v(γ₁^p) = 2p π-units
        let mut rpoly = Vec::with_capacity(apoly.len());
        for c in &apoly {
            rpoly.push(ring.residue(&ring.shift_down(c, dshift)?)?);
        }
        let roots: Vec<Fq2> = q
            .all_elements()
            .filter(|a| {
                let mut acc = Fq2::ZERO;
                for c in rpoly.iter().rev() {
                    acc = q.add(q.mul(acc, *a), *c);
                }
                acc.is_zero()
            })
            .collect();
        if roots.is_empty() {
            push(
                format!("point {idx}: residue root exists"),
                false,
                "chart residual polynomial has no root in F_{p²}".into(),
            );
            continue;
        }
        let abar = roots[(rng.next_u64() as usize) % roots.len()];
        // the residue identity ā^p − ā = s̄²
        let rid = q.sub(q.sub(q.pow(abar, p), abar), s2_bar);
        push(
            format!("point {idx}: ā^p − ā = s̄² in F_{{p²}}"),
            rid.is_zero(),
            format!("ā = {}, s̄² = {}, residue {}", fq2_str(abar), fq2_str(s2_bar), fq2_str(rid)),
        );

        let a = match ring_newton(&ring, &apoly, ring.from_tower(f.teichmuller(abar, 0)), dshift) {
            Ok(a) => a,
            Err(err) => {
                push(
                    format!("point {idx}: chart value lifts"),
                    false,
                    format!("{err}"),
                );
                continue;
            }
        };
        let a_res = ring.residue(&a)?;
        // undivided congruence (γ₁/c₀)^p(a^p − a − s²) ≡ 0 mod γ̃γ₁²
        let d_el = ring.sub(&ring.sub(&ring.pow(&a, p), &a), &s2);
        let lhs = ring.mul_tower(&ring.mul(&g1p, &d_el), &c0p_inv);
        let v = ring.val_floor(&lhs) + dshift; // ·π^{2p} from γ₁^p
        let bound = gl + 4; // v(γ̃γ₁²) = 2(p−1) + 4 π-units
        push(
            format!("point {idx}: (γ₁/c₀)^p(a^p − a − s²) ≡ 0 mod γ̃γ₁²"),
            v > bound && a_res == abar,
            format!("v_pi = {v}, need > {bound}; depth {depth}; ā lift residue {}", fq2_str(a_res)),
        );
    }

    let pass = checks.iter().all(|c| c.ok);
    let report = ChartReport {
        label: format!("a^p − a = s² on {}", if deep { "Z21" } else { "Z11" }),
        branch: format!("{} ζ = {}", if plus { "+" } else { "−" }, fq2_str(zeta)),
        p,
        seed,
        points: n_points,
        checks,
        pass,
    };
    if !pass {
        let bad = report
            .checks
            .iter()
            .filter(|c| !c.ok)
            .map(|c| format!("{}: {}", c.name, c.detail))
            .collect::<Vec<_>>()
            .join("; ");
        return Err(Error::Verification {
            check: report.label.clone(),
            seed,
            detail: bad,
        });
    }
    Ok(report)
}

/// Verify the Deligne–Lusztig-type chart a^p − a = c·t^{p+1} (c a
/// unit) in the singular residue class (x, y) = (−ζ, ζ) of Y₂₂
/// (tower e = p²(p+1)).
///
/// The chart center Z = γ₀ is a root of m(Z) = Z^p + γZ − c₀ + d with
/// γ = π^{p²−1}; the constant d = α^{p+1}·H₀ collapses to the exact
/// closed form H₀ = −(c₁² + c₀·∂²_{XY}f₁(0,0)) + q₂·(2^{−p(p+1)} −
/// 2^{1−3p})·s₀^{−p(p+1)} at the special point x = 1/(2s₀) = −y (q₂ the
/// Fermat quotient of 2; every α-dependent series term enters above the
/// working modulus α²γ). β = π^{p+1}·[ω] with ω^{p−1} = −1 satisfies
/// β^{p−1} = −γ exactly, and c = 2c₀α^{p+1}/β^p is a unit whose residue
/// automatically has trace 0, so every t̄ ∈ F_{p²} admits a companion
/// ā with ā^p − ā = c̄·t̄^{p+1}.
pub fn deligne_lusztig_chart(
    sk: &ShiftedKronecker,
    seed: u64,
    n_points: usize,
) -> Result<ChartReport> {
    let p = sk.p;
    let pi = p as i64;
    let e = (p * p * (p + 1)) as usize;
    let mut f = TowerField::new(p, e, WITT_M)?;
    f.set_work_prec(350);
    let pm = f.witt.pm;
    let q = &f.fq2;
    let mut rng = lab_rng(seed, "DL");
    let ga = pi * pi - 1; // v(γ) = p²−1 π-units
    let al = pi * (pi + 1); // v(α^{p+1}) = p(p+1) π-units

    // s₀: the unit root of 4c₀Y^{p+1} + 1 = 0
    let mut coeffs = vec![f.zero(); p as usize + 2];
    coeffs[0] = f.one();
    coeffs[p as usize + 1] = c_scalar(&f, (4 * sk.c0) % pm);
    let s0_poly = TowerPoly { coeffs };
    let s0_res = segment_root_residues(&f, &s0_poly, 0, &[])?;
    let s0 = refine_at_residue(&f, &s0_poly, 0, *s0_res.first().ok_or(Error::LiftRefusal)?)?;
    let s0_bar = f.residue_at(&s0, 0)?;
    let x_center_bar = q.inv(q.mul(Fq2::from_base(2 % p), s0_bar));

    // d = α^{p+1}·H₀ with H₀ in exact closed form
    let pmm = p.pow(WITT_M + 1);
    let fermat2 = ((crate::arith::pow_mod(2, p - 1, pmm) + pmm - 1) / p) % pm;
    let phi = pm / p * (p - 1); // order of (Z/p^m)^×
    let inv2 = crate::arith::pow_mod(2, phi - 1, pm);
    let t1 = crate::arith::pow_mod(inv2, p * (p + 1), pm);
    let t2 = (2 * crate::arith::pow_mod(inv2, 3 * p, pm)) % pm;
    let kh = fermat2 * ((t1 + pm - t2) % pm) % pm;
    let a_sc = (sk.c1 * sk.c1 % pm + sk.c0 * sk.f1[1][1] % pm) % pm;
    let h0 = f.sub(
        &f.mul(&f.pow(&f.inverse(&s0)?, p * (p + 1)), &c_scalar(&f, kh)),
        &c_scalar(&f, a_sc),
    );
    let d_el = f.shift_up(&h0, al);

    // R = L[γ₀]/(γ₀^p + γγ₀ − c₀ + d)
    let mut lower = vec![f.zero(); p as usize];
    lower[0] = f.sub(&d_el, &c_scalar(&f, sk.c0));
    lower[1] = f.pi_pow(ga);
    let c0b = Fq2::from_base(sk.c0_bar());
    let ring = QuotientRing::new(&f, lower, q.pth_root(c0b))?;
    let gamma0 = ring.generator();

    let mut checks = Vec::new();
    let mut push = |name: String, ok: bool, detail: String| {
        checks.push(ResidueCheck { name, ok, detail });
    };
    push(
        "v(d) ≥ v(α^{p+1})".into(),
        f.val_pi(&d_el).map_or(true, |v| v >= al),
        format!("v_pi(d) = {:?}, v_pi(H₀) = {:?}", f.val_pi(&d_el), f.val_pi(&h0)),
    );

    // β = π^{p+1}[ω], ω^{p−1} = −1: then β^{p−1} = −γ exactly
    let omega = q
        .all_elements()
        .find(|u| q.pow(*u, p - 1) == q.neg(Fq2::ONE))
        .ok_or(Error::LiftRefusal)?;
    let beta = f.teichmuller(omega, pi + 1);
    let bg = f.add(&f.pow(&beta, p - 1), &f.pi_pow(ga));
    push(
        "β^{p−1} = −γ".into(),
        f.is_invisible(&bg),
        format!("v_pi ≥ {:?}", bg.prec),
    );
    let beta_p = f.pow(&beta, p);

    // c = 2c₀α^{p+1}/β^p: a unit of trace-zero residue
    let c_el = f.div(
        &f.shift_up(&c_scalar(&f, (2 * sk.c0) % pm), al),
        &beta_p,
    )?;
    let c_bar = f.residue_at(&c_el, 0)?;
    push(
        "c = 2c₀α^{p+1}/β^p is a unit".into(),
        f.val_pi(&c_el) == Some(0),
        format!("v_pi(c) = {:?}, c̄ = {}", f.val_pi(&c_el), fq2_str(c_bar)),
    );
    push(
        "Tr(c̄) = 0 (every t̄ has a companion ā)".into(),
        fq2_trace(q, p, c_bar).is_zero(),
        format!("c̄ + c̄^p = {}", fq2_str(fq2_trace(q, p, c_bar))),
    );

    // base coefficients of A(X) = E(γ₀ + βX): binomial part plus the
    // modulus relation m(γ₀) = 0 (checked) and the γβX term
    let prow = pascal_row(p as usize, pm);
    let mut g0pows = vec![ring.one()];
    for j in 1..=(p as usize) {
        g0pows.push(ring.mul(&g0pows[j - 1], &gamma0));
    }
    let mut base = vec![ring.zero(); p as usize + 1];
    let mut bpow = f.one();
    for k in 0..=(p as usize) {
        base[k] = ring.mul_tower(
            &g0pows[p as usize - k],
            &f.scale_small(&bpow, prow[k] % pm),
        );
        bpow = f.mul(&bpow, &beta);
    }
    // γ(γ₀ + βX) − c₀ + d
    base[0] = ring.add(&base[0], &ring.shift_up(&gamma0, ga));
    base[0] = ring.add(
        &base[0],
        &ring.from_tower(f.sub(&d_el, &c_scalar(&f, sk.c0))),
    );
    base[1] = ring.add(&base[1], &ring.from_tower(f.mul(&f.pi_pow(ga), &beta)));
    push(
        "m(γ₀) = 0 in R".into(),
        ring.is_invisible(&base[0]),
        format!("v_pi ≥ {}", ring.val_floor(&base[0])),
    );

    for idx in 0..n_points {
        let mut t_bar = rand_fq2(&mut rng, p);
        while t_bar.is_zero() {
            t_bar = rand_fq2(&mut rng, p);
        }
        let tp1 = q.pow(t_bar, p + 1);
        let mut apoly = base.clone();
        // − 2c₀(αt)^{p+1} = −2c₀π^{p(p+1)}[t̄^{p+1}]
        apoly[0] = ring.sub(
            &apoly[0],
            &ring.from_tower(f.scale_small(
                &f.teichmuller(tp1, al),
                (2 * sk.c0) % pm,
            )),
        );

        // residual polynomial of A/β^p: ū(X^p − X − c̄t̄^{p+1})
        let mut rpoly = Vec::with_capacity(apoly.len());
        for c in &apoly {
            rpoly.push(ring.residue(&ring.shift_down(c, al)?)?);
        }
        let u_lead = rpoly[p as usize];
        let mid_ok = rpoly[2..p as usize].iter().all(|r| r.is_zero());
        let shape_ok = !u_lead.is_zero()
            && rpoly[1] == q.neg(u_lead)
            && rpoly[0] == q.neg(q.mul(u_lead, q.mul(c_bar, tp1)));
        push(
            format!("point {idx}: residual polynomial is X^p − X − c̄t̄^{{p+1}}"),
            mid_ok && shape_ok,
            format!("t̄ = {}, lead unit {}", fq2_str(t_bar), fq2_str(u_lead)),
        );

        let roots: Vec<Fq2> = q
            .all_elements()
            .filter(|a| {
                q.sub(q.sub(q.pow(*a, p), *a), q.mul(c_bar, tp1)).is_zero()
            })
            .collect();
        if roots.is_empty() {
            push(
                format!("point {idx}: companion ā exists"),
                false,
                format!("ā^p − ā = c̄t̄^{{p+1}} has no root, t̄ = {}", fq2_str(t_bar)),
            );
            continue;
        }
        let abar = roots[(rng.next_u64() as usize) % roots.len()];
        let a = match ring_newton(&ring, &apoly, ring.from_tower(f.teichmuller(abar, 0)), al) {
            Ok(a) => a,
            Err(err) => {
                push(
                    format!("point {idx}: chart value lifts"),
                    false,
                    format!("{err}"),
                );
                continue;
            }
        };
        let a_res = ring.residue(&a)?;
        // undivided congruence β^p(a^p − a − c·t^{p+1}) ≡ 0 mod α²γ
        let ct = ring.from_tower(f.mul(&c_el, &f.teichmuller(tp1, 0)));
        let d_ring = ring.sub(&ring.sub(&ring.pow(&a, p), &a), &ct);
        let v = ring.val_floor(&ring.mul_tower(&d_ring, &beta_p));
        let bound = 2 * pi + ga; // v(α²γ) = 2p + (p²−1) π-units
        push(
            format!("point {idx}: β^p(a^p − a − c·t^{{p+1}}) ≡ 0 mod α²γ"),
            v > bound && a_res == abar,
            format!("v_pi = {v}, need > {bound}; ā = {} lift residue {}", fq2_str(abar), fq2_str(a_res)),
        );
    }

    let pass = checks.iter().all(|c| c.ok);
    let report = ChartReport {
        label: "a^p − a = c·t^{p+1} on Y22".into(),
        branch: format!("x̄ = {}", fq2_str(x_center_bar)),
        p,
        seed,
        points: n_points,
        checks,
        pass,
    };
    if !pass {
        let bad = report
            .checks
            .iter()
            .filter(|c| !c.ok)
            .map(|c| format!("{}: {}", c.name, c.detail))
            .collect::<Vec<_>>()
            .join("; ");
        return Err(Error::Verification {
            check: report.label.clone(),
            seed,
            detail: bad,
        });
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modpoly::ModularPolynomial;
    use std::sync::OnceLock;

    fn sk13() -> &'static ShiftedKronecker {
        static SK: OnceLock<ShiftedKronecker> = OnceLock::new();
        SK.get_or_init(|| {
            let phi = ModularPolynomial::build(13).unwrap();
            ShiftedKronecker::shift(&phi, 5, WITT_M).unwrap()
        })
    }

    #[test]
    fn valuation_cases_match_table() {
        let sk = sk13();
        for (q, case) in [
            (rat(1, 28), 1),
            (rat(1, 14), 2),
            (rat(1, 2), 3),
            (rat(13, 14), 4),
            (rat(27, 28), 5),
        ] {
            assert_eq!(valuation_case(13, &q), case);
            let rep = valuation_profile(sk, &q, 7).unwrap();
            assert!(rep.pass, "case {case} at q = {q}");
        }
    }

    #[test]
    fn y11_reduction_holds() {
        let sk = sk13();
        for seed in 0..3 {
            let rep = verify_reduction(sk, Component::Y11, seed).unwrap();
            assert!(rep.pass);
        }
    }

    #[test]
    fn z11_reduction_holds() {
        let sk = sk13();
        for seed in 0..3 {
            let rep = verify_reduction(sk, Component::Z11, seed).unwrap();
            assert!(rep.pass);
        }
    }

    #[test]
    fn y21_reduction_spot() {
        let rep = verify_reduction(sk13(), Component::Y21, 1).unwrap();
        assert!(rep.pass);
    }

    #[test]
    fn y31_reduction_spot() {
        let rep = verify_reduction(sk13(), Component::Y31, 1).unwrap();
        assert!(rep.pass);
    }

    #[test]
    fn y13_reduction_spot() {
        let rep = verify_reduction(sk13(), Component::Y13, 1).unwrap();
        assert!(rep.pass);
    }

    #[test]
    fn y22_reduction_spot() {
        let rep = verify_reduction(sk13(), Component::Y22, 1).unwrap();
        assert!(rep.pass);
    }

    #[test]
    fn z21_reduction_spot() {
        let rep = verify_reduction(sk13(), Component::Z21, 1).unwrap();
        assert!(rep.pass);
    }

    #[test]
    fn z12_reduction_spot() {
        let rep = verify_reduction(sk13(), Component::Z12, 1).unwrap();
        assert!(rep.pass);
    }

    #[test]
    fn sampling_is_deterministic() {
        let sk = sk13();
        let a = sample_tower(sk, Component::Y11, 42).unwrap();
        let b = sample_tower(sk, Component::Y11, 42).unwrap();
        let f = TowerField::new(13, 14, WITT_M).unwrap();
        for (xa, xb) in a.x.iter().zip(&b.x) {
            assert_eq!(f.residue_at(xa, 1).unwrap(), f.residue_at(xb, 1).unwrap());
        }
        let c = sample_tower(sk, Component::Y11, 43).unwrap();
        let ra: Vec<_> = a.x.iter().map(|x| f.residue_at(x, 1).unwrap()).collect();
        let rc: Vec<_> = c.x.iter().map(|x| f.residue_at(x, 1).unwrap()).collect();
        assert_ne!(ra, rc, "different seeds should move the point");
    }

    #[test]
    fn artin_schreier_chart_spot() {
        let rep = artin_schreier_chart(sk13(), false, true, 0, 5, 2).unwrap();
        assert!(rep.pass);
        let rep = artin_schreier_chart(sk13(), false, false, 3, 5, 2).unwrap();
        assert!(rep.pass);
    }

    #[test]
    fn artin_schreier_deep_chart_spot() {
        let rep = artin_schreier_chart(sk13(), true, false, 1, 7, 2).unwrap();
        assert!(rep.pass);
    }

    #[test]
    fn deligne_lusztig_chart_spot() {
        let rep = deligne_lusztig_chart(sk13(), 9, 2).unwrap();
        assert!(rep.pass);
    }
}
