//! Command-line entry point for the workbench: builds the modular
//! polynomial cache, runs seeded verification of the reduction
//! identities and singular residue classes, and emits the dual-graph /
//! width-table / genus-bookkeeping reports.
//!
//! Exit codes: 0 all checks pass, 1 a verification failed, 2 usage or
//! configuration error (clap's own parse failures also exit 2).

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use std::path::PathBuf;
use std::process::ExitCode;

use x0_workbench::affinoid::{
    artin_schreier_chart, deligne_lusztig_chart, valuation_profile, verify_reduction, CaseReport,
    ChartReport, Component, ResidueReport,
};
use x0_workbench::arith::{is_prime, rat, Rat};
use x0_workbench::error::Error;
use x0_workbench::graph::{build_dual_graph, bookkeeping, e_k, width_tables};
use x0_workbench::modpoly::{ModularPolynomial, ShiftedKronecker};
use x0_workbench::supersingular::SsLocus;

#[derive(Parser)]
#[command(
    name = "x0wb",
    about = "Exact-arithmetic workbench for stable reductions of X0(p^n)",
    version
)]
struct Cli {
    /// Output format (applies to every subcommand)
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Subcommand)]
enum Cmd {
    /// Build the modular polynomial Phi_p and run its property checks
    Modpoly {
        #[command(subcommand)]
        cmd: ModpolyCmd,
    },
    /// Run a named verification at several seeds
    Verify {
        #[arg(long)]
        p: u64,
        /// cases | Y11 | Y21 | Y12 | Y31 | Y13 | Y22 | Z11 | Z21 | Z12 | AS3 | AS4 | DL
        #[arg(long)]
        target: String,
        /// Number of seeds (components) or sampled points (charts)
        #[arg(long, default_value_t = 20)]
        seeds: u64,
        /// Base seed; run k uses seed + k
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Cache directory for Phi_p (default: $WORKBENCH_CACHE)
        #[arg(long)]
        cache: Option<PathBuf>,
    },
    /// Build and report the dual graph of the stable reduction
    Graph {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        level: u32,
        /// Write the graph in DOT format to this file
        #[arg(long)]
        dot: Option<PathBuf>,
    },
    /// Verify the genus bookkeeping identity over a range of primes
    GenusCheck {
        #[arg(long)]
        level: u32,
        /// Inclusive..exclusive prime range, e.g. 13..100
        #[arg(long, value_name = "A..B")]
        p_range: String,
    },
    /// Emit the width/multiplicity table at one level
    Widths {
        #[arg(long)]
        level: u32,
        #[arg(long)]
        p: u64,
    },
    /// Enumerate the supersingular locus and check the mass identity
    Ss {
        #[arg(long)]
        p: u64,
    },
}

#[derive(Subcommand)]
enum ModpolyCmd {
    Build {
        #[arg(long)]
        p: u64,
        /// Cache directory (default: $WORKBENCH_CACHE)
        #[arg(long)]
        cache: Option<PathBuf>,
    },
}

fn cache_dir(flag: Option<PathBuf>) -> Option<PathBuf> {
    flag.or_else(|| std::env::var_os("WORKBENCH_CACHE").map(PathBuf::from))
}

/// 1 for a failed check, 2 for a bad invocation or configuration.
fn code_of(e: &Error) -> u8 {
    match e {
        Error::Usage(_) | Error::NotPrime(_) | Error::NotRepresentable { .. } => 2,
        Error::Io(_) | Error::CacheFormat(_) => 2,
        _ => 1,
    }
}

fn emit<T: Serialize>(format: Format, value: &T, text: String) {
    match format {
        Format::Text => println!("{text}"),
        Format::Json => println!("{}", serde_json::to_string_pretty(value).unwrap()),
    }
}

fn shifted_kronecker(p: u64, cache: Option<PathBuf>) -> Result<ShiftedKronecker, Error> {
    let phi = ModularPolynomial::build_cached(p, cache_dir(cache).as_deref())?;
    let locus = SsLocus::compute(p)?;
    let beta = locus.base_field_generic_j().ok_or_else(|| {
        Error::Usage(format!(
            "p = {p} has no generic supersingular j-invariant in F_p to recentre at"
        ))
    })?;
    ShiftedKronecker::shift(&phi, beta, 3)
}

/// Five q-values per case of the fibre-valuation table, denominators
/// kept small so the sampling towers stay cheap.
fn case_table_qs(p: i64) -> Vec<(u8, Rat)> {
    let mut out = Vec::new();
    for d in [p + 2, p + 3, p + 4, p + 5, 2 * p + 2] {
        out.push((1u8, rat(1, d)));
    }
    out.push((2, rat(1, p + 1)));
    for q in [rat(1, 2), rat(1, 3), rat(2, 3), rat(1, p), rat(p - 1, p)] {
        out.push((3, q));
    }
    out.push((4, rat(p, p + 1)));
    for (n, d) in [
        (p + 1, p + 2),
        (p + 2, p + 3),
        (p + 3, p + 4),
        (2 * p + 1, 2 * p + 2),
        (2 * p + 3, 2 * p + 4),
    ] {
        out.push((5, rat(n, d)));
    }
    out
}

#[derive(Serialize)]
struct VerifyRun {
    target: String,
    p: u64,
    runs: usize,
    pass: bool,
    cases: Vec<CaseReport>,
    residues: Vec<ResidueReport>,
    charts: Vec<ChartReport>,
}

fn run_verify(p: u64, target: &str, seeds: u64, seed: u64, cache: Option<PathBuf>, format: Format) -> Result<bool, Error> {
    let mut run = VerifyRun {
        target: target.to_string(),
        p,
        runs: 0,
        pass: true,
        cases: Vec::new(),
        residues: Vec::new(),
        charts: Vec::new(),
    };
    let mut text = String::new();
    let sk = shifted_kronecker(p, cache)?;

    match target {
        "cases" => {
            for (case, q) in case_table_qs(p as i64) {
                // cases 2 and 4 have a unique q: vary the seed instead
                let reps = if case == 2 || case == 4 { seeds.min(5).max(1) } else { 1 };
                for k in 0..reps {
                    let rep = valuation_profile(&sk, &q, seed + k)?;
                    text.push_str(&format!(
                        "case {} q={} seed {}: {}\n",
                        rep.case_id,
                        rep.q,
                        seed + k,
                        if rep.pass { "ok" } else { "FAIL" }
                    ));
                    run.pass &= rep.pass;
                    run.runs += 1;
                    run.cases.push(rep);
                }
            }
        }
        "AS3" | "AS4" => {
            let deep = target == "AS4";
            for plus in [true, false] {
                let rep = artin_schreier_chart(&sk, deep, plus, 0, seed, seeds as usize)?;
                text.push_str(&chart_text(&rep));
                run.pass &= rep.pass;
                run.runs += rep.points;
                run.charts.push(rep);
            }
        }
        "DL" => {
            let rep = deligne_lusztig_chart(&sk, seed, seeds as usize)?;
            text.push_str(&chart_text(&rep));
            run.pass &= rep.pass;
            run.runs += rep.points;
            run.charts.push(rep);
        }
        other => {
            let comp = Component::parse(other).ok_or_else(|| {
                Error::Usage(format!(
                    "unknown target {other}; expected cases, a component (Y11..Y22, Z11, Z21, Z12), AS3, AS4 or DL"
                ))
            })?;
            for k in 0..seeds {
                let rep = verify_reduction(&sk, comp, seed + k)?;
                text.push_str(&format!("{} seed {}:\n", rep.component, rep.seed));
                for c in &rep.checks {
                    text.push_str(&format!(
                        "  [{}] {} ({})\n",
                        if c.ok { "ok" } else { "FAIL" },
                        c.name,
                        c.detail
                    ));
                }
                run.pass &= rep.pass;
                run.runs += 1;
                run.residues.push(rep);
            }
        }
    }
    text.push_str(&format!(
        "{}: {} runs, {}",
        target,
        run.runs,
        if run.pass { "all pass" } else { "FAILURES" }
    ));
    let pass = run.pass;
    emit(format, &run, text);
    Ok(pass)
}

fn chart_text(rep: &ChartReport) -> String {
    let mut s = format!(
        "{} [{}] seed {} ({} points):\n",
        rep.label, rep.branch, rep.seed, rep.points
    );
    for c in &rep.checks {
        s.push_str(&format!(
            "  [{}] {} ({})\n",
            if c.ok { "ok" } else { "FAIL" },
            c.name,
            c.detail
        ));
    }
    s
}

#[derive(Serialize)]
struct GenusCheckRun {
    level: u32,
    range: String,
    checked: Vec<(u64, bool)>,
    display_note: Option<String>,
    pass: bool,
}

fn parse_range(s: &str) -> Result<(u64, u64), Error> {
    let (a, b) = s
        .split_once("..")
        .ok_or_else(|| Error::Usage(format!("range must look like A..B, got {s}")))?;
    let a: u64 = a.parse().map_err(|_| Error::Usage(format!("bad range start {a}")))?;
    let b: u64 = b.parse().map_err(|_| Error::Usage(format!("bad range end {b}")))?;
    if a >= b {
        return Err(Error::Usage(format!("empty range {s}")));
    }
    Ok((a, b))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(code_of(&e))
        }
    }
}

fn dispatch(cli: Cli) -> Result<bool, Error> {
    let format = cli.format;
    match cli.cmd {
        Cmd::Modpoly { cmd: ModpolyCmd::Build { p, cache } } => {
            let phi = ModularPolynomial::build_cached(p, cache_dir(cache).as_deref())?;
            phi.check_symmetry()?;
            phi.check_kronecker()?;
            #[derive(Serialize)]
            struct Built {
                p: u64,
                degree: usize,
                symmetry: &'static str,
                kronecker_congruence: &'static str,
            }
            emit(
                format,
                &Built { p, degree: phi.coeffs.len() - 1, symmetry: "OK", kronecker_congruence: "OK" },
                format!("Phi_{p} built (degree {}): symmetry OK, kronecker-congruence OK", phi.coeffs.len() - 1),
            );
            Ok(true)
        }
        Cmd::Verify { p, target, seeds, seed, cache } => run_verify(p, &target, seeds, seed, cache, format),
        Cmd::Graph { p, level, dot } => {
            let g = build_dual_graph(p, level)?;
            if let Some(path) = &dot {
                std::fs::write(path, g.to_dot())?;
            }
            let text = format!(
                "dual graph X0({p}^{level}): {} vertices, {} edges, Betti {}, connected: {}{}",
                g.vertices.len(),
                g.edges.len(),
                g.betti(),
                g.is_connected(),
                dot.map(|p| format!(", DOT written to {}", p.display())).unwrap_or_default()
            );
            emit(format, &g, text);
            Ok(g.is_connected())
        }
        Cmd::GenusCheck { level, p_range } => {
            let (a, b) = parse_range(&p_range)?;
            let mut run = GenusCheckRun {
                level,
                range: p_range,
                checked: Vec::new(),
                display_note: None,
                pass: true,
            };
            let mut text = String::new();
            for p in a..b {
                if !is_prime(p) || p < 13 {
                    continue;
                }
                let l = bookkeeping(p, level)?;
                text.push_str(&format!(
                    "p={p}: components {} + Betti {} = {} vs genus {} -> {}\n",
                    l.component_sum,
                    l.betti,
                    l.total,
                    l.reference_genus,
                    if l.holds { "PASS" } else { "FAIL" }
                ));
                run.pass &= l.holds;
                run.checked.push((p, l.holds));
                if run.display_note.is_none() {
                    run.display_note = l.display_note;
                }
            }
            if let Some(note) = &run.display_note {
                text.push_str(&format!("note: {note}\n"));
            }
            text.push_str(&format!(
                "genus-check level {level}: {} primes, {}",
                run.checked.len(),
                if run.pass { "all PASS" } else { "FAILURES" }
            ));
            let pass = run.pass;
            emit(format, &run, text);
            Ok(pass)
        }
        Cmd::Widths { level, p } => {
            let rows = width_tables(p, level)?;
            let mut text = format!("widths at level {level}, p = {p}, e_K = {}\n", e_k(p, level));
            for r in &rows {
                text.push_str(&format!(
                    "{:<40} w = {}/{}  M = {}\n",
                    r.pair, r.width_num, r.width_den, r.mult
                ));
            }
            text.push_str(&format!("{} rows, all multiplicities integral", rows.len()));
            emit(format, &rows, text);
            Ok(true)
        }
        Cmd::Ss { p } => {
            let locus = SsLocus::compute(p)?;
            #[derive(Serialize)]
            struct SsOut {
                p: u64,
                count: usize,
                points: Vec<(String, u64)>,
                mass: String,
                mass_identity: bool,
            }
            let out = SsOut {
                p,
                count: locus.count(),
                points: locus
                    .points
                    .iter()
                    .map(|pt| (format!("{}+{}w", pt.j.a, pt.j.b), pt.half_aut))
                    .collect(),
                mass: locus.mass().to_string(),
                mass_identity: locus.mass_identity_holds(),
            };
            let mut text = format!("supersingular locus for p = {p}: {} points\n", out.count);
            for (j, i) in &out.points {
                text.push_str(&format!("  j = {j}  i(A) = {i}\n"));
            }
            text.push_str(&format!(
                "mass = {} ((p-1)/24 identity: {})",
                out.mass,
                if out.mass_identity { "holds" } else { "FAILS" }
            ));
            let ok = out.mass_identity;
            emit(format, &out, text);
            Ok(ok)
        }
    }
}
