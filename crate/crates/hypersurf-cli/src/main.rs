use std::io::Write;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use hypersurf::boundary::{build_boundary_system_with, detect_torsion, normalize_first_block, BoundaryOptions};
use hypersurf::json::poly_to_value;
use hypersurf::levi::{psd_verdict, PsdOptions, VerdictKind};
use hypersurf::multitype::{multitype_search_with, SearchOptions};
use hypersurf::normal_form::{auto_weight, normalize, verify_normal_form};
use hypersurf::num::parse_q;
use hypersurf::weights::{counting_bound, enumerate_multitypes, is_admissible};
use hypersurf::{ExtQ, HermPoly, InverseWeight, Weight};
use serde_json::{json, Value};

mod corpus;
mod input;

use input::Input;

#[derive(Parser)]
#[command(
    name = "hypersurf",
    version,
    about = "Exact computations on polynomial models of real hypersurfaces"
)]
struct Cli {
    /// Print machine-readable JSON
    #[arg(long, global = true)]
    json: bool,
    /// Seed for randomized sampling
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Bound on substitution degree and list length
    #[arg(long, global = true)]
    degree_bound: Option<u32>,
    /// Random points tried when looking for a negative Levi direction
    #[arg(long, global = true, default_value_t = 400)]
    samples: usize,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Parse and print in canonical form
    Parse(Input),
    /// Bounded multitype search
    Multitype(MultitypeArgs),
    /// Positivity of the Levi form
    Psd(PsdArgs),
    /// Sum-of-squares normal form
    Normalize(NormalizeArgs),
    /// Boundary system and commutator multitype
    BoundarySystem(BoundaryArgs),
    /// Torsion past the first block
    Torsion(Input),
    /// Admissible multitypes with entries at most m
    Enumerate(EnumerateArgs),
    /// Reproduce the bundled worked examples
    Examples(ExamplesArgs),
}

#[derive(Args)]
struct MultitypeArgs {
    #[command(flatten)]
    input: Input,
    /// Print the search value next to the commutator multitype
    #[arg(long)]
    commutator: bool,
    /// Skip the boundary-system cross-check
    #[arg(long, conflicts_with = "commutator")]
    search_only: bool,
}

#[derive(Args)]
struct PsdArgs {
    #[command(flatten)]
    input: Input,
    /// Exit 4 on Unknown and 3 on Refuted
    #[arg(long)]
    require_certificate: bool,
    /// Denominator of the fractions tried in the pairing certificate
    #[arg(long, default_value_t = 4)]
    cs_lattice_denominator: u32,
}

#[derive(Args)]
struct NormalizeArgs {
    #[command(flatten)]
    input: Input,
    /// `auto`, or inverse weights such as `1,8,12`
    #[arg(long, default_value = "auto")]
    weight: String,
    /// Treat the model as pseudoconvex; violations exit 3
    #[arg(long)]
    assert_psc: bool,
}

#[derive(Args)]
struct BoundaryArgs {
    #[command(flatten)]
    input: Input,
    /// Also normalize the first block
    #[arg(long)]
    first_block: bool,
}

#[derive(Args)]
struct EnumerateArgs {
    #[arg(long)]
    n: usize,
    /// Largest entry, an integer or fraction
    #[arg(long)]
    m: String,
}

#[derive(Args)]
struct ExamplesArgs {
    /// Run a single item
    #[arg(long)]
    only: Option<String>,
    /// Dimension for the counting item
    #[arg(long, default_value_t = 3)]
    n: usize,
    /// Largest entry for the counting item
    #[arg(long, default_value_t = 6)]
    m: u32,
}

/// Failure with its exit code.
#[derive(Debug)]
pub enum Fail {
    /// 1
    Structural(String),
    /// 2
    Input(String),
    /// 3
    Contradiction(String),
    /// 4
    Uncertified(String),
}

impl Fail {
    fn code(&self) -> u8 {
        match self {
            Fail::Structural(_) => 1,
            Fail::Input(_) => 2,
            Fail::Contradiction(_) => 3,
            Fail::Uncertified(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            Fail::Structural(m) | Fail::Input(m) | Fail::Contradiction(m) | Fail::Uncertified(m) => m,
        }
    }
}

struct Out {
    json: bool,
}

impl Out {
    fn emit(&self, human: impl FnOnce() -> String, value: impl FnOnce() -> Value) {
        let text = if self.json {
            serde_json::to_string_pretty(&value()).expect("JSON")
        } else {
            human()
        };
        let _ = writeln!(std::io::stdout().lock(), "{text}");
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}

fn compact(l: &InverseWeight) -> String {
    format!("({})", l.to_strings().join(","))
}

fn parse_lambda(s: &str) -> Result<Weight, Fail> {
    let body = s.trim().trim_start_matches('(').trim_end_matches(')');
    let lambda: Vec<ExtQ> = body
        .split(',')
        .map(|x| ExtQ::parse(x.trim()).ok_or_else(|| Fail::Input(format!("bad weight entry '{}'", x.trim()))))
        .collect::<Result<_, _>>()?;
    if lambda.iter().any(ExtQ::is_inf) {
        return Err(Fail::Input("normal forms need finite weights".into()));
    }
    let l = InverseWeight::new(lambda).map_err(|e| Fail::Input(e.to_string()))?;
    Ok(l.weight())
}

fn run(cli: &Cli) -> Result<(), Fail> {
    let out = Out { json: cli.json };
    match &cli.cmd {
        Cmd::Parse(input) => {
            let r = input.read()?;
            out.emit(|| r.to_string(), || poly_to_value(&r));
        }
        Cmd::Multitype(a) => {
            let r = a.input.read()?;
            let opts = SearchOptions {
                degree_bound: cli.degree_bound.unwrap_or(4),
                commutator: !a.search_only,
                ..SearchOptions::default()
            };
            let m = multitype_search_with(&r, &opts).map_err(|e| Fail::Input(e.to_string()))?;
            out.emit(
                || match (&m.commutator, a.commutator) {
                    (Some(c), true) => format!("search: {}; commutator: {}", compact(&m.value), compact(c)),
                    (None, true) => format!("search: {}; commutator: unavailable", compact(&m.value)),
                    _ => m.to_string(),
                },
                || m.to_json(),
            );
        }
        Cmd::Psd(a) => {
            let r = a.input.read()?;
            let opts = PsdOptions {
                samples: cli.samples,
                seed: cli.seed,
                cs_lattice_denominator: a.cs_lattice_denominator,
            };
            let v = psd_verdict(&r, &opts);
            out.emit(|| human_verdict(&v), || v.to_json());
            if a.require_certificate {
                match v.kind {
                    VerdictKind::CertifiedPsd => {}
                    VerdictKind::Refuted => {
                        return Err(Fail::Contradiction("the Levi form takes a negative value".into()))
                    }
                    VerdictKind::Unknown => {
                        return Err(Fail::Uncertified(format!(
                            "no certificate after {} samples",
                            v.samples_tried
                        )))
                    }
                }
            }
        }
        Cmd::Normalize(a) => {
            let r = a.input.read()?;
            let mu = if a.weight == "auto" {
                auto_weight(&r).map_err(|e| Fail::Input(e.to_string()))?
            } else {
                parse_lambda(&a.weight)?
            };
            if mu.n() != r.n() {
                return Err(Fail::Input(format!(
                    "weight has {} entries, the input has n = {}",
                    mu.n(),
                    r.n()
                )));
            }
            let nf = match normalize(&r, &mu, a.assert_psc) {
                Ok(nf) => nf,
                Err(e) if e.is_contradiction() => return Err(Fail::Contradiction(e.to_string())),
                Err(e) => return Err(Fail::Structural(e.to_string())),
            };
            let check = verify_normal_form(&nf, &r, &mu);
            out.emit(
                || {
                    let mut s = format!("weight: {}\n", nf.weight.inverse());
                    for l in &nf.lowering {
                        s += &format!(
                            "lowered at z{}: {} -> {}\n",
                            l.slot + 1,
                            l.from.inverse(),
                            l.to.inverse()
                        );
                    }
                    s += &format!("K = {:?}\n", nf.k_matrix());
                    let a: Vec<String> = nf.a_values().iter().map(|x| x.to_string()).collect();
                    s += &format!("A = [{}]\n", a.join(", "));
                    s += &format!("residual: {}\n", nf.residual);
                    for w in &nf.warnings {
                        s += &format!("warning: {w}\n");
                    }
                    if check.ok() {
                        s += "verified";
                    } else {
                        s += "verification failed:";
                        for v in &check.violations {
                            s += &format!("\n  {}: {}", v.clause, v.detail);
                        }
                    }
                    s
                },
                || nf.to_json(&check),
            );
            if !check.ok() {
                return Err(Fail::Structural("normal form did not verify".into()));
            }
        }
        Cmd::BoundarySystem(a) => {
            let r = a.input.read()?;
            let opts = BoundaryOptions {
                max_len: cli.degree_bound,
            };
            let bs = build_boundary_system_with(&r, &opts).map_err(|e| Fail::Input(e.to_string()))?;
            let nb = if a.first_block {
                Some(normalize_first_block(&bs).map_err(|e| match e {
                    hypersurf::boundary::BoundaryError::NotHarmonic { .. } => Fail::Contradiction(e.to_string()),
                    _ => Fail::Structural(e.to_string()),
                })?)
            } else {
                None
            };
            out.emit(
                || {
                    let mut s = format!("commutator: {}\nLevi rank: {}", bs.commutator, bs.levi_rank);
                    for sl in &bs.slots {
                        let part = if sl.uses_im { "Im" } else { "Re" };
                        s += &format!(
                            "\nz{}: c = {}, list {}, r = {part} of {}",
                            sl.var + 1,
                            sl.c,
                            sl.list,
                            sl.r
                        );
                    }
                    if let Some(nb) = &nb {
                        s += &format!("\nfirst block model: {}", nb.model);
                        s += &format!("\nfixpoint: {}", nb.fixpoint);
                    }
                    s
                },
                || {
                    let mut v = bs.to_json();
                    if let Some(nb) = &nb {
                        v["first_block"] = nb.to_json();
                    }
                    v
                },
            );
        }
        Cmd::Torsion(input) => {
            let r = input.read()?;
            let opts = BoundaryOptions {
                max_len: cli.degree_bound,
            };
            let bs = build_boundary_system_with(&r, &opts).map_err(|e| Fail::Input(e.to_string()))?;
            let t = detect_torsion(&bs);
            out.emit(|| t.to_string(), || t.to_json());
        }
        Cmd::Enumerate(a) => {
            let m = parse_q(&a.m).ok_or_else(|| Fail::Input(format!("bad bound '{}'", a.m)))?;
            if a.n < 1 {
                return Err(Fail::Input("n must be at least 1".into()));
            }
            let all = enumerate_multitypes(a.n, &m);
            let bound = counting_bound(a.n, &m);
            if let Some(bad) = all.iter().find(|l| !is_admissible(l).admissible) {
                return Err(Fail::Structural(format!("enumerated {bad} is not admissible")));
            }
            out.emit(
                || {
                    let mut s: Vec<String> = all.iter().map(|l| l.to_string()).collect();
                    s.push(format!("{} enumerated ≤ {}", all.len(), bound));
                    s.join("\n")
                },
                || json!({"n": a.n, "m": a.m, "multitypes": all.iter().map(|l| l.to_strings()).collect::<Vec<_>>(), "count": all.len(), "bound": bound.to_string()}),
            );
        }
        Cmd::Examples(a) => {
            let items = corpus::run(a.only.as_deref(), a.n, a.m, cli)?;
            out.emit(
                || items.iter().map(|i| i.line()).collect::<Vec<_>>().join("\n"),
                || Value::Array(items.iter().map(|i| i.to_json()).collect()),
            );
            if let Some(bad) = items.iter().find(|i| !i.pass) {
                return Err(Fail::Structural(format!("example '{}' did not reproduce", bad.name)));
            }
        }
    }
    Ok(())
}

fn human_verdict(v: &hypersurf::levi::PositivityVerdict) -> String {
    match v.kind {
        VerdictKind::CertifiedPsd => format!("CertifiedPSD (tier {})", v.tier.unwrap_or(0)),
        VerdictKind::Refuted => {
            let w = v.witness.as_ref().expect("refutations carry a witness");
            let pt = |z: &[hypersurf::C]| z.iter().map(hypersurf::num::fmt_c).collect::<Vec<_>>().join(", ");
            format!(
                "Refuted: Levi form {} at z = ({}) along a = ({})",
                w.value,
                pt(&w.z),
                pt(&w.a)
            )
        }
        VerdictKind::Unknown => format!("Unknown after {} samples", v.samples_tried),
    }
}

/// Parses a real model in `n` variables.
pub fn model(text: &str, n: usize) -> Result<HermPoly, Fail> {
    hypersurf::parse_poly(text, n).map_err(|e| Fail::Input(e.to_string()))
}
