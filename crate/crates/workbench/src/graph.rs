//! Dual graphs of the stable reductions of X₀(pⁿ) (n = 2, 3, 4), genus
//! formulas, width/intersection tables, and the exact bookkeeping
//! identity  Σ g(C) + b(Γ) = g(X₀(pⁿ)).
//!
//! The horizontal (ordinary) components are X_{n,0}, X^±_{a,b}, X_{0,n};
//! the middles X^±_{a,b} are Igusa-type curves of genus g_{min(a,b)}.
//! Above each supersingular point A (with i(A) = |Aut|/2) sits a chain
//! of circle components Y_{a,b} (genus (p+1)/2i − 1) and intermediate
//! components Z_{a,b} (genus 0), decorated with Artin–Schreier leaves
//! a^p − a = s² of genus (p−1)/2 on the Z's and "deep leaves"
//! a^p − a = t^{p+1} of genus p(p−1)/2 on Y_{2,2}. Leaf multiplicities
//! and genera follow the j-class rows (generic / j=0 / j=1728).

use crate::arith::{rat, Rat};
use crate::error::{Error, Result};
use crate::supersingular::SsLocus;
use num_traits::{One, Signed, ToPrimitive};
use serde::Serialize;

fn rat_to_int(x: &Rat, what: &str) -> Result<i64> {
    if !x.denom().is_one() {
        return Err(Error::Bookkeeping(format!("{what} = {x} is not an integer")));
    }
    x.numer()
        .to_i64()
        .ok_or_else(|| Error::Bookkeeping(format!("{what} overflows i64")))
}

/// Genus g_e of the level-e Igusa-type curve:
/// 2g_e − 2 = (1/24)(p−1)(p^{2e−1} − 12 p^{e−1} + 1) − ss.
pub fn igusa_genus(p: u64, e: u32, ss: usize) -> Result<i64> {
    let pi = p as i64;
    let a = pi.pow(2 * e - 1) - 12 * pi.pow(e - 1) + 1;
    let val = rat((pi - 1) * a, 24) - rat(ss as i64, 1);
    let g = (val + rat(2, 1)) / rat(2, 1);
    rat_to_int(&g, "igusa genus")
}

/// Genus of the Artin–Schreier curve a^p − a = f(t), deg f = m,
/// gcd(m, p) = 1: (p−1)(m−1)/2.
pub fn artin_schreier_genus(p: u64, m: u64) -> Result<i64> {
    if num_integer::gcd(m, p) != 1 {
        return Err(Error::Usage(format!(
            "Artin-Schreier rule needs gcd(m, p) = 1, got m = {m}, p = {p}"
        )));
    }
    rat_to_int(&rat((p as i64 - 1) * (m as i64 - 1), 2), "AS genus")
}

/// Genus of X₀(pⁿ) by the standard formula
/// g = 1 + μ/12 − ν₂/4 − ν₃/3 − ν_∞/2.
pub fn genus_x0(p: u64, n: u32) -> Result<i64> {
    assert!(n >= 1);
    let pi = p as i64;
    let mu = pi.pow(n - 1) * (pi + 1);
    let nu2: i64 = if p % 4 == 3 { 0 } else { 2 };
    let nu3: i64 = if p % 3 == 2 { 0 } else { 2 };
    // ν_∞ = Σ_{k=0}^{n} φ(p^{min(k, n−k)})
    let phi = |j: u32| -> i64 {
        if j == 0 {
            1
        } else {
            pi.pow(j - 1) * (pi - 1)
        }
    };
    let nu_inf: i64 = (0..=n).map(|k| phi(k.min(n - k))).sum();
    let g = rat(1, 1) + rat(mu, 12) - rat(nu2, 4) - rat(nu3, 3) - rat(nu_inf, 2);
    rat_to_int(&g, "genus of X0(p^n)")
}

/// One intersection point between two components: its width w and
/// multiplicity M = e_K · w (always a positive integer).
#[derive(Debug, Clone, Serialize)]
pub struct WidthEntry {
    pub pair: String,
    /// i(A) of the supersingular class the entry belongs to.
    pub i_class: u64,
    pub width_num: i64,
    pub width_den: i64,
    pub mult: i64,
}

impl WidthEntry {
    fn new(pair: &str, i: u64, width: Rat, e_k: i64) -> Result<WidthEntry> {
        let m = width.clone() * rat(e_k, 1);
        let mult = rat_to_int(&m, pair).map_err(|_| {
            Error::NonIntegralMultiplicity(format!("{pair}: e_K·({width}) = {m}"))
        })?;
        if mult <= 0 || width.is_negative() {
            return Err(Error::NonIntegralMultiplicity(format!(
                "{pair}: multiplicity {mult} not positive"
            )));
        }
        Ok(WidthEntry {
            pair: pair.to_string(),
            i_class: i,
            width_num: width.numer().to_i64().unwrap(),
            width_den: width.denom().to_i64().unwrap(),
            mult,
        })
    }

    pub fn width(&self) -> Rat {
        rat(self.width_num, self.width_den)
    }
}

/// The base-field ramification index e_K used for multiplicities.
pub fn e_k(p: u64, n: u32) -> i64 {
    let pi = p as i64;
    match n {
        2 => (pi * pi - 1) / 2,
        3 => pi * pi * (pi * pi - 1),
        4 => pi * pi * pi * (pi * pi - 1),
        _ => panic!("width tables exist for n in 2..=4"),
    }
}

/// All width-table rows at level n for the supersingular classes that
/// actually occur at p (i ∈ {1} ∪ {2 if p≡3 mod 4} ∪ {3 if p≡2 mod 3}).
pub fn width_tables(p: u64, n: u32) -> Result<Vec<WidthEntry>> {
    let locus = SsLocus::compute(p)?;
    let mut classes: Vec<u64> = locus.points.iter().map(|pt| pt.half_aut).collect();
    classes.sort_unstable();
    classes.dedup();
    let ek = e_k(p, n);
    let pi = p as i64;
    let mut out = Vec::new();
    for &iu in &classes {
        let i = iu as i64;
        let rows: Vec<(String, Rat)> = match n {
            2 => vec![
                (format!("(X_{{2,0}},Y_{{1,1}}) i={iu}"), rat(i, pi + 1)),
                (format!("(X_{{0,2}},Y_{{1,1}}) i={iu}"), rat(i, pi + 1)),
                (format!("(X^pm_{{1,1}},Y_{{1,1}}) i={iu}"), rat(2 * i, pi * pi - 1)),
            ],
            3 => vec![
                (format!("(X_{{3,0}},Y_{{2,1}}) i={iu}"), rat(i, pi * (pi + 1))),
                (format!("(X_{{0,3}},Y_{{1,2}}) i={iu}"), rat(i, pi * (pi + 1))),
                (
                    format!("(X^pm_{{2,1}},Y_{{2,1}}) i={iu}"),
                    rat(2 * i, pi * (pi * pi - 1)),
                ),
                (
                    format!("(X^pm_{{1,2}},Y_{{1,2}}) i={iu}"),
                    rat(2 * i, pi * (pi * pi - 1)),
                ),
                (
                    format!("(Y_{{2,1}},Z_{{1,1}}) i={iu}"),
                    rat((pi - 1) * i, 2 * pi * pi * (pi + 1)),
                ),
                (
                    format!("(Y_{{1,2}},Z_{{1,1}}) i={iu}"),
                    rat((pi - 1) * i, 2 * pi * pi * (pi + 1)),
                ),
                (format!("(X_S,Z_{{1,1}}) i={iu}"), rat(i, 4 * pi * pi)),
            ],
            4 => vec![
                (
                    format!("(X_{{4,0}},Y_{{3,1}}) i={iu}"),
                    rat(i, pi * pi * (pi + 1)),
                ),
                (
                    format!("(X_{{0,4}},Y_{{1,3}}) i={iu}"),
                    rat(i, pi * pi * (pi + 1)),
                ),
                (
                    format!("(X^pm_{{3,1}},Y_{{3,1}}) i={iu}"),
                    rat(2 * i, pi * pi * (pi * pi - 1)),
                ),
                (
                    format!("(X^pm_{{1,3}},Y_{{1,3}}) i={iu}"),
                    rat(2 * i, pi * pi * (pi * pi - 1)),
                ),
                (
                    format!("(X^pm_{{2,2}},Y_{{2,2}}) i={iu}"),
                    rat(2 * i, pi * pi * (pi * pi - 1)),
                ),
                (
                    format!("(X_T,Y_{{2,2}}) i={iu}"),
                    rat(i, pi * pi * (pi + 1)),
                ),
                (
                    format!("(Z_{{2,1}},Y_{{3,1}}) i={iu}"),
                    rat((pi - 1) * i, 2 * pi.pow(3) * (pi + 1)),
                ),
                (
                    format!("(Z_{{1,2}},Y_{{1,3}}) i={iu}"),
                    rat((pi - 1) * i, 2 * pi.pow(3) * (pi + 1)),
                ),
                (
                    format!("(Z_{{2,1}},Y_{{2,2}}) i={iu}"),
                    rat((pi - 1) * i, 2 * pi.pow(3) * (pi + 1)),
                ),
                (
                    format!("(Z_{{1,2}},Y_{{2,2}}) i={iu}"),
                    rat((pi - 1) * i, 2 * pi.pow(3) * (pi + 1)),
                ),
                (format!("(Z_{{2,1}},X_S) i={iu}"), rat(i, 4 * pi.pow(3))),
                (format!("(Z_{{1,2}},X_S) i={iu}"), rat(i, 4 * pi.pow(3))),
            ],
            _ => return Err(Error::Usage(format!("no width table for n = {n}"))),
        };
        for (pair, w) in rows {
            out.push(WidthEntry::new(&pair, iu, w, ek)?);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct Vertex {
    pub name: String,
    pub genus: i64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Edge {
    pub a: usize,
    pub b: usize,
    pub width_num: i64,
    pub width_den: i64,
    pub mult: i64,
}

/// Dual graph of the stable reduction of X₀(pⁿ).
#[derive(Debug, Clone, Serialize)]
pub struct DualGraph {
    pub p: u64,
    pub n: u32,
    pub vertices: Vec<Vertex>,
    pub edges: Vec<Edge>,
}

impl DualGraph {
    pub fn betti(&self) -> i64 {
        self.edges.len() as i64 - self.vertices.len() as i64 + 1
    }

    pub fn genus_sum(&self) -> i64 {
        self.vertices.iter().map(|v| v.genus).sum()
    }

    pub fn is_connected(&self) -> bool {
        if self.vertices.is_empty() {
            return false;
        }
        let mut adj = vec![Vec::new(); self.vertices.len()];
        for e in &self.edges {
            adj[e.a].push(e.b);
            adj[e.b].push(e.a);
        }
        let mut seen = vec![false; self.vertices.len()];
        let mut stack = vec![0usize];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            for &w in &adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    pub fn to_dot(&self) -> String {
        let mut s = String::from("graph stable_reduction {\n");
        for (k, v) in self.vertices.iter().enumerate() {
            s.push_str(&format!(
                "  v{k} [label=\"{}[genus={}]\"];\n",
                v.name, v.genus
            ));
        }
        for e in &self.edges {
            s.push_str(&format!(
                "  v{} -- v{} [label=\"w={}/{},M={}\"];\n",
                e.a, e.b, e.width_num, e.width_den, e.mult
            ));
        }
        s.push_str("}\n");
        s
    }
}

struct GraphBuilder {
    vertices: Vec<Vertex>,
    edges: Vec<Edge>,
    e_k: i64,
}

impl GraphBuilder {
    fn vertex(&mut self, name: String, genus: Rat) -> Result<usize> {
        let g = rat_to_int(&genus, &name)?;
        self.vertices.push(Vertex { name, genus: g });
        Ok(self.vertices.len() - 1)
    }

    fn edge(&mut self, a: usize, b: usize, width: Rat) -> Result<()> {
        let pair = format!("{} -- {}", self.vertices[a].name, self.vertices[b].name);
        let entry = WidthEntry::new(&pair, 0, width, self.e_k)?;
        self.edges.push(Edge {
            a,
            b,
            width_num: entry.width_num,
            width_den: entry.width_den,
            mult: entry.mult,
        });
        Ok(())
    }
}

/// Build the full dual graph at level n: the horizontal backbone plus
/// one vertical chain (with leaves) per supersingular point.
pub fn build_dual_graph(p: u64, n: u32) -> Result<DualGraph> {
    let locus = SsLocus::compute(p)?;
    let ss = locus.count();
    let pi = p as i64;
    let g1 = igusa_genus(p, 1, ss)?;
    let g2 = if n >= 4 { igusa_genus(p, 2, ss)? } else { 0 };
    let mut b = GraphBuilder {
        vertices: Vec::new(),
        edges: Vec::new(),
        e_k: e_k(p, n),
    };

    // Horizontal components: X_{n,0}, X^±_{a,b}, X_{0,n}.
    let x_n0 = b.vertex(format!("X_{{{n},0}}"), rat(0, 1))?;
    let x_0n = b.vertex(format!("X_{{0,{n}}}"), rat(0, 1))?;
    let mut mids = Vec::new(); // (a, b, plus-index, minus-index)
    for a in 1..n {
        let bb = n - a;
        let g = if a.min(bb) == 1 { g1 } else { g2 };
        let vp = b.vertex(format!("X^+_{{{a},{bb}}}"), rat(g, 1))?;
        let vm = b.vertex(format!("X^-_{{{a},{bb}}}"), rat(g, 1))?;
        mids.push((a, bb, vp, vm));
    }
    let mid = |mids: &[(u32, u32, usize, usize)], a: u32| -> (usize, usize) {
        let m = mids.iter().find(|t| t.0 == a).unwrap();
        (m.2, m.3)
    };

    for (idx, pt) in locus.points.iter().enumerate() {
        let i = pt.half_aut as i64;
        let tag = format!("A{idx}");
        let y_genus = rat(pi + 1, 2 * i) - rat(1, 1); // (p+1)/2i − 1
        match n {
            2 => {
                let y = b.vertex(format!("Y^{tag}_{{1,1}}"), y_genus)?;
                b.edge(x_n0, y, rat(i, pi + 1))?;
                b.edge(x_0n, y, rat(i, pi + 1))?;
                let (xp, xm) = mid(&mids, 1);
                b.edge(xp, y, rat(2 * i, pi * pi - 1))?;
                b.edge(xm, y, rat(2 * i, pi * pi - 1))?;
            }
            3 => {
                let y21 = b.vertex(format!("Y^{tag}_{{2,1}}"), y_genus.clone())?;
                let y12 = b.vertex(format!("Y^{tag}_{{1,2}}"), y_genus)?;
                let z11 = b.vertex(format!("Z^{tag}_{{1,1}}"), rat(0, 1))?;
                let w_yz = rat((pi - 1) * i, 2 * pi * pi * (pi + 1));
                b.edge(y21, z11, w_yz.clone())?;
                b.edge(y12, z11, w_yz)?;
                b.edge(x_n0, y21, rat(i, pi * (pi + 1)))?;
                b.edge(x_0n, y12, rat(i, pi * (pi + 1)))?;
                let (xp21, xm21) = mid(&mids, 2);
                let (xp12, xm12) = mid(&mids, 1);
                let w_mid = rat(2 * i, pi * (pi * pi - 1));
                b.edge(xp21, y21, w_mid.clone())?;
                b.edge(xm21, y21, w_mid.clone())?;
                b.edge(xp12, y12, w_mid.clone())?;
                b.edge(xm12, y12, w_mid)?;
                // Artin–Schreier leaves on Z_{1,1}
                let leaves = rat_to_int(&rat(2 * (pi + 1), i), "AS leaf count")?;
                let leaf_g = artin_schreier_genus(p, 2)?;
                for s in 0..leaves {
                    let v = b.vertex(format!("X^{tag}_S{s}"), rat(leaf_g, 1))?;
                    b.edge(z11, v, rat(i, 4 * pi * pi))?;
                }
            }
            4 => {
                let y31 = b.vertex(format!("Y^{tag}_{{3,1}}"), y_genus.clone())?;
                let z21 = b.vertex(format!("Z^{tag}_{{2,1}}"), rat(0, 1))?;
                let y22 = b.vertex(format!("Y^{tag}_{{2,2}}"), y_genus.clone())?;
                let z12 = b.vertex(format!("Z^{tag}_{{1,2}}"), rat(0, 1))?;
                let y13 = b.vertex(format!("Y^{tag}_{{1,3}}"), y_genus)?;
                let w_zy = rat((pi - 1) * i, 2 * pi.pow(3) * (pi + 1));
                b.edge(z21, y31, w_zy.clone())?;
                b.edge(z21, y22, w_zy.clone())?;
                b.edge(z12, y22, w_zy.clone())?;
                b.edge(z12, y13, w_zy)?;
                b.edge(x_n0, y31, rat(i, pi * pi * (pi + 1)))?;
                b.edge(x_0n, y13, rat(i, pi * pi * (pi + 1)))?;
                let w_mid = rat(2 * i, pi * pi * (pi * pi - 1));
                let (xp31, xm31) = mid(&mids, 3);
                let (xp22, xm22) = mid(&mids, 2);
                let (xp13, xm13) = mid(&mids, 1);
                b.edge(xp31, y31, w_mid.clone())?;
                b.edge(xm31, y31, w_mid.clone())?;
                b.edge(xp22, y22, w_mid.clone())?;
                b.edge(xm22, y22, w_mid.clone())?;
                b.edge(xp13, y13, w_mid.clone())?;
                b.edge(xm13, y13, w_mid)?;
                // Artin–Schreier leaves: 2(p+1)/i on each of Z_{2,1}, Z_{1,2}
                let as_leaves = rat_to_int(&rat(2 * (pi + 1), i), "AS leaf count")?;
                let as_g = artin_schreier_genus(p, 2)?;
                for (z, side) in [(z21, "S2"), (z12, "S1")] {
                    for s in 0..as_leaves {
                        let v = b.vertex(format!("X^{tag}_{side}{s}"), rat(as_g, 1))?;
                        b.edge(z, v, rat(i, 4 * pi.pow(3)))?;
                    }
                }
                // deep leaves a^p − a = t^{p+1}: (p+1)/i copies on Y_{2,2}
                let dl_leaves = rat_to_int(&rat(pi + 1, i), "deep leaf count")?;
                let dl_g = artin_schreier_genus(p, p + 1)?;
                for t in 0..dl_leaves {
                    let v = b.vertex(format!("X^{tag}_T{t}"), rat(dl_g, 1))?;
                    b.edge(y22, v, rat(i, pi * pi * (pi + 1)))?;
                }
            }
            _ => return Err(Error::Usage(format!("no dual graph for n = {n}"))),
        }
    }
    Ok(DualGraph {
        p,
        n,
        vertices: b.vertices,
        edges: b.edges,
    })
}

/// Full genus bookkeeping record for one (p, n).
#[derive(Debug, Clone, Serialize)]
pub struct GenusLedger {
    pub p: u64,
    pub n: u32,
    pub betti: i64,
    pub betti_formula: i64,
    pub ordinary_total: i64,
    pub supersingular_total: i64,
    /// per-class (label, count, per-point total)
    pub class_totals: Vec<(String, usize, i64)>,
    pub component_sum: i64,
    pub total: i64,
    pub reference_genus: i64,
    pub holds: bool,
    /// Set at n = 4: the closed-form genus display in the source
    /// derivation reads "… − p(p+1)/12 + 1", while the standard genus
    /// formula (and the component sum) require "… − p(p+1)/2 + 1".
    pub display_note: Option<String>,
}

/// Closed-form per-point totals (supersingular side, level 4):
/// G = (p³ + 4p² + 2p − c)/(2i) with c ∈ {7, 13, 19} by class.
fn per_point_total_n4(p: u64, i: u64) -> Result<i64> {
    let pi = p as i64;
    let num = pi.pow(3) + 4 * pi * pi + 2 * pi;
    let (c, d) = match i {
        1 => (7, 2),
        2 => (13, 4),
        3 => (19, 6),
        _ => return Err(Error::Bookkeeping(format!("unknown class i = {i}"))),
    };
    rat_to_int(&rat(num - c, d), "per-point total")
}

fn per_point_total(p: u64, n: u32, i: u64) -> Result<i64> {
    let pi = p as i64;
    let ii = i as i64;
    match n {
        2 => rat_to_int(&(rat(pi + 1, 2 * ii) - rat(1, 1)), "per-point total"),
        3 => {
            let y = rat(pi + 1, 2 * ii) - rat(1, 1);
            let leaves = rat(2 * (pi + 1), ii) * rat(pi - 1, 2);
            rat_to_int(&(y * rat(2, 1) + leaves), "per-point total")
        }
        4 => per_point_total_n4(p, i),
        _ => Err(Error::Usage(format!("no bookkeeping for n = {n}"))),
    }
}

/// Verify the bookkeeping identity at (p, n) and return the ledger.
pub fn bookkeeping(p: u64, n: u32) -> Result<GenusLedger> {
    let locus = SsLocus::compute(p)?;
    let ss = locus.count() as i64;
    let graph = build_dual_graph(p, n)?;
    let betti = graph.betti();
    let betti_formula = (2 * n as i64 - 1) * (ss - 1);
    let component_sum = graph.genus_sum();

    let g1 = igusa_genus(p, 1, ss as usize)?;
    let ordinary_total = match n {
        2 => 2 * g1,
        3 => 4 * g1,
        4 => 4 * g1 + 2 * igusa_genus(p, 2, ss as usize)?,
        _ => return Err(Error::Usage(format!("no bookkeeping for n = {n}"))),
    };

    // closed-form supersingular totals, cross-checked against the graph
    let mut class_totals = Vec::new();
    let mut supersingular_total = 0i64;
    let mut classes: Vec<u64> = locus.points.iter().map(|pt| pt.half_aut).collect();
    classes.sort_unstable();
    classes.dedup();
    for i in classes {
        let count = locus.points.iter().filter(|pt| pt.half_aut == i).count();
        let per = per_point_total(p, n, i)?;
        let label = match i {
            3 => "j=0".to_string(),
            2 => "j=1728".to_string(),
            _ => "generic".to_string(),
        };
        supersingular_total += per * count as i64;
        class_totals.push((label, count, per));
    }
    if component_sum != ordinary_total + supersingular_total {
        return Err(Error::Bookkeeping(format!(
            "graph genus sum {component_sum} != ordinary {ordinary_total} + supersingular {supersingular_total}"
        )));
    }
    if betti != betti_formula {
        return Err(Error::Bookkeeping(format!(
            "graph Betti {betti} != formula {betti_formula}"
        )));
    }

    let reference_genus = genus_x0(p, n)?;
    let total = component_sum + betti;
    let display_note = (n == 4).then(|| {
        "closed-form genus display: the quoted identity ends with \
         -p(p+1)/12 + 1, but the standard genus formula (and the \
         component sum verified here) require -p(p+1)/2 + 1; the \
         coefficient 1/12 appears to be a misprint for 1/2"
            .to_string()
    });
    Ok(GenusLedger {
        p,
        n,
        betti,
        betti_formula,
        ordinary_total,
        supersingular_total,
        class_totals,
        component_sum,
        total,
        reference_genus,
        holds: total == reference_genus,
        display_note,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn genus_x0_anchors() {
        assert_eq!(genus_x0(13, 2).unwrap(), 8);
        assert_eq!(genus_x0(13, 3).unwrap(), 184);
        assert_eq!(genus_x0(13, 4).unwrap(), 2472);
        assert_eq!(genus_x0(23, 4).unwrap(), 24059);
    }

    #[test]
    fn igusa_genus_anchors() {
        // ss counts: p=23 has 3 supersingular points, p=13 has 1
        assert_eq!(igusa_genus(23, 1, 3).unwrap(), 5);
        assert_eq!(igusa_genus(23, 2, 3).unwrap(), 5450);
        assert_eq!(igusa_genus(13, 1, 1).unwrap(), 1);
        assert_eq!(igusa_genus(13, 2, 1).unwrap(), 511);
        // closed forms quoted alongside (valid when ss = (p+13)/12)
        let p = 23i64;
        assert_eq!(igusa_genus(23, 1, 3).unwrap(), (p * p - 14 * p + 33) / 48);
        assert_eq!(
            igusa_genus(23, 2, 3).unwrap(),
            (p.pow(4) - p.pow(3) - 12 * p * p + 11 * p + 21) / 48
        );
    }

    #[test]
    fn artin_schreier_rule() {
        assert_eq!(artin_schreier_genus(13, 2).unwrap(), 6);
        assert_eq!(artin_schreier_genus(13, 14).unwrap(), 78); // p(p−1)/2
        assert_eq!(artin_schreier_genus(13, 1).unwrap(), 0);
        assert!(artin_schreier_genus(13, 26).is_err());
    }

    #[test]
    fn bookkeeping_anchor_examples() {
        let l = bookkeeping(13, 4).unwrap();
        assert!(l.holds);
        assert_eq!(l.total, 2472);
        assert_eq!(l.ordinary_total, 4 + 2 * 511);
        assert_eq!(l.class_totals, vec![("generic".to_string(), 1, 1446)]);

        let l = bookkeeping(23, 4).unwrap();
        assert!(l.holds);
        assert_eq!(l.total, 24059);
        assert_eq!(l.betti, 14);
        assert_eq!(l.ordinary_total, 4 * 5 + 2 * 5450);
        let per: i64 = l.class_totals.iter().map(|t| t.2).sum();
        assert_eq!(per, 2385 + 3579 + 7161);

        let l = bookkeeping(13, 2).unwrap();
        assert!(l.holds);
        assert_eq!(l.total, 8); // 0 + 2·1 + 6

        let l = bookkeeping(13, 3).unwrap();
        assert!(l.holds);
        assert_eq!(l.total, 184);
    }

    #[test]
    fn bookkeeping_all_levels_up_to_one_hundred() {
        let mut p = 13u64;
        while p <= 100 {
            if crate::arith::is_prime(p) {
                for n in [2u32, 3, 4] {
                    let l = bookkeeping(p, n).unwrap();
                    assert!(l.holds, "p = {p}, n = {n}: {} vs {}", l.total, l.reference_genus);
                    assert_eq!(
                        l.betti,
                        (2 * n as i64 - 1) * (l.class_totals.iter().map(|t| t.1 as i64).sum::<i64>() - 1)
                    );
                }
            }
            p += 2;
        }
    }

    #[test]
    fn graphs_are_connected_with_integral_multiplicities() {
        for (p, n) in [(13u64, 2u32), (13, 3), (13, 4), (23, 4), (37, 4)] {
            let g = build_dual_graph(p, n).unwrap();
            assert!(g.is_connected(), "p={p} n={n}");
            for e in &g.edges {
                assert!(e.mult > 0);
            }
        }
    }

    #[test]
    fn width_tables_are_integral_and_match_e_k() {
        for (p, n) in [(13u64, 2u32), (13, 3), (13, 4), (23, 2), (23, 3), (23, 4)] {
            let rows = width_tables(p, n).unwrap();
            assert!(!rows.is_empty());
            for r in &rows {
                // M = e_K · w exactly
                let m = r.width() * rat(e_k(p, n), 1);
                assert_eq!(m, rat(r.mult, 1), "{}", r.pair);
            }
        }
        // spot values from the level-2 table at p=13, i=1:
        let rows = width_tables(13, 2).unwrap();
        let r = rows.iter().find(|r| r.pair.starts_with("(X_{2,0}")).unwrap();
        assert_eq!(r.width(), rat(1, 14));
        assert_eq!(r.mult, 6); // (p−1)/2
        let r = rows.iter().find(|r| r.pair.starts_with("(X^pm")).unwrap();
        assert_eq!(r.width(), rat(2, 168));
        assert_eq!(r.mult, 1);
    }

    #[test]
    fn table_row_consistency_level4() {
        // per-column totals: component genus + leafcount·leafgenus
        for p in [13i64, 23, 37] {
            let pu = p as u64;
            for i in [1i64, 2, 3] {
                if i == 2 && p % 4 != 3 {
                    continue;
                }
                if i == 3 && p % 3 != 2 {
                    continue;
                }
                // Z column: 0 + (2(p+1)/i)·(p−1)/2 = (p²−1)/i·... per class
                let z_total = 2 * (p + 1) / i * ((p - 1) / 2);
                assert_eq!(z_total, (p * p - 1) * 2 / (2 * i));
                // Y22 column: (p+1)/2i−1 + ((p+1)/i)·p(p−1)/2 = (p³−c)/d
                let y22 = (p + 1) / (2 * i) - 1
                    + (p + 1) / i * artin_schreier_genus(pu, pu + 1).unwrap();
                let expect = match i {
                    1 => (p.pow(3) - 1) / 2,
                    2 => (p.pow(3) - 3) / 4,
                    _ => (p.pow(3) - 5) / 6,
                };
                assert_eq!(y22, expect, "p={p} i={i}");
            }
        }
    }
}
