use std::collections::BTreeMap;
use std::io::{self, Write};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use cobar_core::catalog::{self, CatalogId, Indices};
use cobar_core::cobar::{Cobar, CobarElement};
use cobar_core::coeff::check_prime;
use cobar_core::expr::{self, Side};
use cobar_core::may::{self, enumerate_e1, E1Line};
use cobar_core::verifier::{e1_monomial_of, nontriviality_by_degree, Claim, Report, Verdict, Verifier, VerifyOptions, DEFAULT_CAP};

#[derive(Parser)]
#[command(name = "cobar", version, about = "Cobar-complex calculus and secondary differential checks")]
struct Cli {
    /// The prime; every degree depends on it.
    #[arg(long, global = true)]
    prime: Option<u64>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Limit on correction candidates before a verdict is INCONCLUSIVE.
    #[arg(long, global = true)]
    cap: Option<usize>,
    /// Also check that correction candidates span the obstruction.
    #[arg(long, global = true)]
    r_coverage: bool,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Context {
    Bp,
    Pstar,
}

#[derive(Subcommand)]
enum Cmd {
    /// Structure maps of (BP_*, BP_*BP).
    #[command(subcommand)]
    Structure(StructureCmd),
    /// Cobar differential.
    #[command(subcommand)]
    Cobar(CobarCmd),
    /// May filtration.
    #[command(subcommand)]
    May(MayCmd),
    /// May E1 page.
    #[command(subcommand)]
    E1(E1Cmd),
    /// Verification of secondary differentials.
    #[command(subcommand)]
    Verify(VerifyCmd),
}

#[derive(Subcommand)]
enum StructureCmd {
    EtaR {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        mod_ideal: Option<u64>,
    },
    DeltaT {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        mod_ideal: Option<u64>,
    },
    B {
        #[arg(long)]
        i: u32,
        #[arg(long)]
        j: u32,
    },
}

#[derive(Args)]
struct ExprArgs {
    #[arg(long)]
    expr: String,
    #[arg(long, value_enum, default_value_t = Context::Bp)]
    context: Context,
}

#[derive(Subcommand)]
enum CobarCmd {
    D {
        #[command(flatten)]
        e: ExprArgs,
        #[arg(long, default_value_t = 2)]
        mod_ideal: u64,
    },
}

#[derive(Subcommand)]
enum MayCmd {
    Degree {
        #[command(flatten)]
        e: ExprArgs,
    },
    Leading {
        #[command(flatten)]
        e: ExprArgs,
    },
}

#[derive(Subcommand)]
enum E1Cmd {
    Enumerate {
        #[arg(long)]
        s: usize,
        #[arg(long)]
        t: u64,
        #[arg(long)]
        may_bound: Option<u64>,
    },
}

#[derive(Subcommand)]
enum VerifyCmd {
    D2 {
        #[arg(long)]
        source: String,
        #[arg(long)]
        target: String,
        #[arg(long)]
        expected_scalar: Option<i64>,
        #[arg(long)]
        relaxed: bool,
    },
    Catalog {
        #[arg(long)]
        id: String,
        /// Index bindings, e.g. `i=1,j=3`; unset indices take row defaults.
        #[arg(long)]
        index: Option<String>,
        #[arg(long)]
        row: Option<String>,
    },
    Nontrivial {
        #[arg(long)]
        target: String,
        #[arg(long)]
        s: usize,
    },
}

struct Failure(String);

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure(e.to_string())
    }
}

const PASS: u8 = 0;
const FAIL: u8 = 1;
const USAGE: u8 = 2;
const INCONCLUSIVE: u8 = 3;

fn exit_for<'a>(verdicts: impl IntoIterator<Item = &'a Verdict>) -> u8 {
    let mut code = PASS;
    for v in verdicts {
        match v {
            Verdict::Fail => return FAIL,
            Verdict::Inconclusive => code = INCONCLUSIVE,
            Verdict::Pass => {}
        }
    }
    code
}

fn parse_indices(s: &str) -> Result<Indices, Failure> {
    let mut out = BTreeMap::new();
    for part in s.split(',').map(str::trim).filter(|x| !x.is_empty()) {
        let (k, v) = part.split_once('=').ok_or_else(|| Failure(format!("bad index binding `{part}`")))?;
        let v: i64 = v.trim().parse().map_err(|_| Failure(format!("bad index value `{part}`")))?;
        out.insert(k.trim().to_string(), v);
    }
    Ok(out)
}

fn elaborate(cobar: &Cobar, e: &ExprArgs, k: Option<u64>) -> Result<CobarElement, Failure> {
    let side = match e.context {
        Context::Bp => Side::Bp(k),
        Context::Pstar => Side::Graded,
    };
    Ok(expr::parse_chain(&e.expr, cobar, side)?)
}

fn report_text(r: &Report) -> String {
    let mut s = format!("{}  d2({}) -> {}", r.verdict, r.claim.source, r.claim.target);
    if !r.claim.indices.is_empty() {
        let idx: Vec<String> = r.claim.indices.iter().map(|(k, v)| format!("{k}={v}")).collect();
        s += &format!("  [{}]", idx.join(","));
    }
    let opt = |x: Option<i64>| x.map_or("-".to_string(), |v| v.to_string());
    s += &format!(
        "\n  scalar {}  mayTarget {}  maySource {}  mayCompetitorMax {}  corrections {} (mayMax {})",
        opt(r.scalar),
        r.may_target,
        r.may_source,
        r.may_competitor_max.map_or("-".into(), |v| v.to_string()),
        r.corrections.count,
        r.corrections.may_max.map_or("-".into(), |v| v.to_string()),
    );
    if r.corrections.above_target > 0 {
        s += &format!(
            "\n  {} candidates reach mayTarget; residue spanned by the others: {}",
            r.corrections.above_target,
            r.corrections.safe_span.map_or("-".into(), |b| b.to_string())
        );
    }
    if !r.summand_scalars.is_empty() {
        let sc: Vec<String> = r.summand_scalars.iter().map(|x| opt(*x)).collect();
        s += &format!("\n  summand scalars {}  relative sign {}", sc.join(", "), opt(r.relative_sign));
    }
    if let Some(c) = r.r_coverage {
        s += &format!("\n  corrections span residue: {c}");
    }
    if let Some(reason) = &r.reason {
        s += &format!("\n  reason: {reason}");
    }
    if let Some(a) = &r.adams {
        s += &format!("\n  {a}");
    }
    s
}

fn run(cli: Cli, out: &mut impl Write) -> Result<u8, Failure> {
    let p = cli.prime.ok_or_else(|| Failure("--prime is required".into()))?;
    check_prime(p)?;
    let json = cli.format == Format::Json;
    let opts = VerifyOptions { cap: cli.cap.unwrap_or(DEFAULT_CAP), r_coverage: cli.r_coverage };
    if opts.cap == 0 {
        return Err(Failure("--cap must be positive".into()));
    }
    let cobar = Cobar::new(p);
    let code = match cli.cmd {
        Cmd::Structure(sc) => {
            let maps = cobar.maps();
            let (name, text, terms, k) = match sc {
                StructureCmd::EtaR { n, mod_ideal } => {
                    let r = maps.eta_r_v(n, mod_ideal)?;
                    (format!("eta_R(v{n})"), r.value.to_string(), r.value.len(), mod_ideal)
                }
                StructureCmd::DeltaT { n, mod_ideal } => {
                    let r = maps.delta_t(n, mod_ideal)?;
                    (format!("Delta(t{n})"), r.value.to_string(), r.value.len(), mod_ideal)
                }
                StructureCmd::B { i, j } => {
                    let b = maps.b_element(i, j)?;
                    (format!("b({i},{j})"), b.to_string(), b.len(), None)
                }
            };
            if json {
                writeln!(out, "{}", json!({"map": name, "p": p, "modIdeal": k, "terms": terms, "value": text}))?;
            } else {
                let m = k.map_or(String::new(), |k| format!(" mod I^{k}"));
                writeln!(out, "{name} ={m}\n{text}")?;
            }
            PASS
        }
        Cmd::Cobar(CobarCmd::D { e, mod_ideal }) => {
            if mod_ideal == 0 {
                return Err(Failure("--mod-ideal must be at least 1".into()));
            }
            let x = elaborate(&cobar, &e, Some(mod_ideal))?;
            let d = cobar.cobar_d(&x, mod_ideal)?;
            if json {
                writeln!(out, "{}", json!({"input": x.to_string(), "modIdeal": mod_ideal, "d": d.to_records()}))?;
            } else {
                writeln!(out, "{d}")?;
            }
            PASS
        }
        Cmd::May(MayCmd::Degree { e }) => {
            let x = elaborate(&cobar, &e, None)?;
            let m = may::may_degree(&x).ok_or_else(|| Failure("the zero chain has no May degree".into()))?;
            if json {
                writeln!(out, "{}", json!({"expr": x.to_string(), "may": m}))?;
            } else {
                writeln!(out, "{m}")?;
            }
            PASS
        }
        Cmd::May(MayCmd::Leading { e }) => {
            let x = elaborate(&cobar, &e, None)?;
            let (m, lead) = may::leading_term(&x)?;
            if json {
                writeln!(out, "{}", json!({"may": m, "leading": lead.to_records()}))?;
            } else {
                writeln!(out, "{m}\t{lead}")?;
            }
            PASS
        }
        Cmd::E1(E1Cmd::Enumerate { s, t, may_bound }) => {
            let lines: Vec<E1Line> = enumerate_e1(p, s, t, may_bound).iter().map(|m| E1Line::new(m, p)).collect();
            if json {
                writeln!(out, "{}", serde_json::to_string(&lines)?)?;
            } else {
                for l in &lines {
                    writeln!(out, "{l}")?;
                }
            }
            PASS
        }
        Cmd::Verify(vc) => {
            let verifier = Verifier::with_cobar(cobar);
            match vc {
                VerifyCmd::D2 { source, target, expected_scalar, relaxed } => {
                    let mut claim = Claim::new(&source, &target, p)?;
                    claim.expected_scalar = expected_scalar;
                    if relaxed {
                        claim.mode = cobar_core::verifier::Mode::Relaxed;
                    }
                    let r = verifier.verify(&claim, &opts)?;
                    if json {
                        writeln!(out, "{}", serde_json::to_string(&r)?)?;
                    } else {
                        writeln!(out, "{}", report_text(&r))?;
                    }
                    exit_for([&r.verdict])
                }
                VerifyCmd::Catalog { id, index, row } => {
                    let id: CatalogId = id.parse()?;
                    let given = index.as_deref().map(parse_indices).transpose()?.unwrap_or_default();
                    let reports = catalog::verify_catalog(&verifier, id, &given, row.as_deref(), &opts)?;
                    if json {
                        writeln!(out, "{}", serde_json::to_string(&reports)?)?;
                    } else {
                        for r in &reports {
                            writeln!(out, "{} row {}: {}", r.catalog, r.row, report_text(&r.report))?;
                            if r.adams_match == Some(false) {
                                writeln!(out, "  stated: {}", r.adams_expected)?;
                            }
                        }
                    }
                    exit_for(reports.iter().map(|r| &r.report.verdict))
                }
                VerifyCmd::Nontrivial { target, s } => {
                    let m = e1_monomial_of(&expr::parse(&target)?, p)?;
                    let r = nontriviality_by_degree(&m, s, p);
                    if json {
                        writeln!(out, "{}", serde_json::to_string(&r)?)?;
                    } else {
                        writeln!(out, "{}  {} (s={}, t={}, M={})", r.verdict, r.target, r.s, r.t, r.may_target)?;
                        for l in &r.stratum {
                            writeln!(out, "  {l}")?;
                        }
                    }
                    exit_for([&r.verdict])
                }
            }
        }
    };
    Ok(code)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { USAGE } else { PASS };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let stdout = io::stdout();
    let mut out = stdout.lock();
    match run(cli, &mut out) {
        Ok(code) => ExitCode::from(code),
        Err(Failure(msg)) => {
            let _ = out.flush();
            eprintln!("error: {msg}");
            ExitCode::from(USAGE)
        }
    }
}
