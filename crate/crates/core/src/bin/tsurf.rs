//! Command-line surface: cyclic-singularity arithmetic, lens-space
//! bookkeeping, embedding obstructions, cover verification, the action
//! table, and the global construction, all with deterministic JSON
//! reports.

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;
use tsurf::construct::{CertifyMode, ConstructionInput, FactorParams};
use tsurf::cover::VerifyMode;
use tsurf::lens::{AmbientModel, MilnorKind};
use tsurf::report::Report;
use tsurf::sing::{HJChain, NormalForm, ResolutionGraph};

#[derive(Parser)]
#[command(
    name = "tsurf",
    version,
    about = "exact arithmetic for flat (Z/2)^r covers, class-T singularities and lens-space obstructions"
)]
struct Cli {
    /// Emit the full JSON report envelope instead of human-readable text.
    #[arg(long, global = true)]
    json: bool,
    /// Seed for every sampled verification.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Exhaustive enumeration guard: a group of rank above this refuses
    /// per-element iteration.
    #[arg(long, global = true, default_value_t = 24)]
    rank_cap: usize,
    /// Search cap for the extension construction.
    #[arg(long, global = true, default_value_t = 65536)]
    q_cap: u32,
    /// Escalation cap for the ampleness multiplier.
    #[arg(long, global = true, default_value_t = 64)]
    m_cap: u32,
    /// Run the internal deterministic parallel loops on all cores.
    #[arg(long, global = true)]
    parallel: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Cyclic quotient singularity arithmetic.
    #[command(subcommand)]
    Sing(SingCmd),
    /// Lens spaces and their mapping classes.
    #[command(subcommand)]
    Lens(LensCmd),
    /// Milnor-lattice embedding obstructions.
    #[command(subcommand)]
    Obstruct(ObstructCmd),
    /// Cover building-data verification and invariants.
    #[command(subcommand)]
    Cover(CoverCmd),
    /// The catalogue of involutions on rational double points.
    #[command(subcommand)]
    Actions(ActionsCmd),
    /// Assemble and certify the global construction.
    Construct(ConstructArgs),
}

#[derive(Subcommand)]
enum SingCmd {
    /// Normal form of the quotient by weights (a, b) at order p.
    Normalize { p: u64, a: i64, b: i64 },
    /// Continued-fraction chain of 1/p (1,q).
    Hj { p: u64, q: u64 },
    /// Class-T witness search for the quotient with weights (a, b).
    ClassT { p: u64, a: i64, b: i64 },
    /// Fundamental cycle of a chain of self-intersections.
    FundamentalCycle {
        /// Comma-separated entries b_i >= 2 (self-intersections -b_i).
        #[arg(long, value_delimiter = ',')]
        chain: Vec<u64>,
    },
}

#[derive(Subcommand)]
enum LensCmd {
    /// Mapping-class generators of L(p,q).
    Mcg { p: u64, q: u64 },
    /// The link of the quotient with weights (a, b).
    Link { p: u64, a: i64, b: i64 },
}

#[derive(Subcommand)]
enum ObstructCmd {
    /// Search for an isometric embedding of a Milnor lattice.
    Embed {
        /// Source lattice: A<n>, D<n>, E<n>, B<n>, Yres<n> or YQGor.
        #[arg(long)]
        source: String,
        /// Ambient: plane, blowup or cxp1.
        #[arg(long)]
        ambient: String,
    },
    /// Reproduce the full lemma verdicts up to a size bound.
    Lemmas {
        #[arg(long, default_value_t = 6)]
        max_n: u64,
    },
}

#[derive(Subcommand)]
enum CoverCmd {
    /// Check the cover condition of a building-data file.
    Verify {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value = "exhaustive")]
        mode: String,
        #[arg(long, default_value_t = 200)]
        samples: u32,
    },
    /// K^2 and chi of the covering surface, along two routes.
    Invariants {
        #[arg(long)]
        input: PathBuf,
    },
    /// Extend branch data on a subgroup to ample data on the whole group.
    Extend {
        #[arg(long)]
        input: PathBuf,
        /// Lower bound demanded of the functional on every obligation.
        #[arg(long, default_value_t = 1)]
        bound: i128,
    },
    /// Sufficient conditions for completeness of Galois deformations.
    Completeness {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value = "exhaustive")]
        mode: String,
        #[arg(long, default_value_t = 200)]
        samples: u32,
    },
}

#[derive(Subcommand)]
enum ActionsCmd {
    /// All records of the action table.
    List,
    /// Validate the table against computation.
    Check,
    /// One logical row by id.
    Show { id: u32 },
}

#[derive(Args, Clone)]
struct ConstructArgs {
    /// Number of factors; must match the --factor occurrences.
    #[arg(long)]
    k: usize,
    /// One factor as a,b,n (repeatable, n strictly increasing).
    #[arg(long = "factor", value_name = "a,b,n", required = true)]
    factors: Vec<String>,
    #[arg(long, default_value = "bounded")]
    mode: String,
    /// Initial ampleness multiplier M (escalated on failure).
    #[arg(long, default_value_t = 1)]
    multiplier: u32,
    /// Write the certificate JSON here.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_verify_mode(mode: &str, samples: u32, seed: u64) -> Result<VerifyMode, String> {
    match mode {
        "exhaustive" => Ok(VerifyMode::Exhaustive),
        "sampled" => Ok(VerifyMode::Sampled { samples, seed }),
        "bounded" => Ok(VerifyMode::Bounded),
        other => Err(format!(
            "unknown mode {other}; use exhaustive|sampled|bounded"
        )),
    }
}

fn parse_milnor_kind(text: &str) -> Result<MilnorKind, String> {
    let t = text.trim();
    if t.eq_ignore_ascii_case("yqgor") || t.eq_ignore_ascii_case("yqgorenstein") {
        return Ok(MilnorKind::YQGorenstein);
    }
    if let Some(rest) = t.strip_prefix("Yres").or_else(|| t.strip_prefix("yres")) {
        let n = rest.parse().map_err(|_| format!("bad Y index in {text}"))?;
        return Ok(MilnorKind::YRes { n });
    }
    let (head, tail) = t.split_at(1);
    let n: u64 = tail.parse().map_err(|_| format!("bad index in {text}"))?;
    match head {
        "A" | "a" => Ok(MilnorKind::A { n }),
        "D" | "d" => Ok(MilnorKind::D { n }),
        "E" | "e" => Ok(MilnorKind::E { n }),
        "B" | "b" => Ok(MilnorKind::B { n }),
        _ => Err(format!("unknown lattice kind {text}")),
    }
}

fn parse_ambient(text: &str) -> Result<AmbientModel, String> {
    match text {
        "plane" => Ok(AmbientModel::PlaneC2),
        "blowup" => Ok(AmbientModel::BlowupC2),
        "cxp1" => Ok(AmbientModel::BlowupCxP1TwoPoints),
        other => Err(format!("unknown ambient {other}; use plane|blowup|cxp1")),
    }
}

#[derive(serde::Deserialize)]
struct ExtendInput {
    rank: usize,
    lattice_points: usize,
    h_basis: Vec<Vec<u8>>,
    d_on_h: Vec<ExtendBranch>,
    eta: Vec<u8>,
    v: tsurf::lattice::DivClass,
    alpha: tsurf::cover::Functional,
}

#[derive(serde::Deserialize)]
struct ExtendBranch {
    sigma: Vec<u8>,
    class: tsurf::lattice::DivClass,
}

fn load_building_data(path: &PathBuf) -> Result<tsurf::cover::BuildingData, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let json: tsurf::cover::BuildingDataJson =
        serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))?;
    tsurf::cover::BuildingData::try_from(json).map_err(|e| e.to_string())
}

/// What a subcommand hands back: payload, human text, and pass/fail.
struct Outcome {
    payload: serde_json::Value,
    text: String,
    ok: bool,
}

fn outcome<P: Serialize>(payload: &P, text: String, ok: bool) -> Result<Outcome, String> {
    Ok(Outcome {
        payload: serde_json::to_value(payload).map_err(|e| e.to_string())?,
        text,
        ok,
    })
}

fn run(cli: &Cli) -> Result<Outcome, String> {
    match &cli.command {
        Command::Sing(cmd) => run_sing(cmd),
        Command::Lens(cmd) => run_lens(cmd),
        Command::Obstruct(cmd) => run_obstruct(cmd, cli),
        Command::Cover(cmd) => run_cover(cmd, cli),
        Command::Actions(cmd) => run_actions(cmd),
        Command::Construct(args) => run_construct(args, cli),
    }
}

fn run_sing(cmd: &SingCmd) -> Result<Outcome, String> {
    match cmd {
        SingCmd::Normalize { p, a, b } => {
            let form = tsurf::sing::normalize(*p, *a, *b).map_err(|e| e.to_string())?;
            let text = match &form {
                NormalForm::Smooth => "smooth germ".to_string(),
                NormalForm::Cyclic(s) => format!("1/{} (1,{})", s.p, s.q),
            };
            outcome(&form, text, true)
        }
        SingCmd::Hj { p, q } => {
            let form = tsurf::sing::normalize(*p, 1, *q as i64).map_err(|e| e.to_string())?;
            match form {
                NormalForm::Smooth => outcome(
                    &serde_json::json!({"chain": []}),
                    "smooth germ".into(),
                    true,
                ),
                NormalForm::Cyclic(s) => {
                    let chain = tsurf::sing::hj(&s);
                    let text = format!(
                        "1/{} (1,{}) -> [{}]",
                        s.p,
                        s.q,
                        chain
                            .0
                            .iter()
                            .map(|b| b.to_string())
                            .collect::<Vec<_>>()
                            .join(",")
                    );
                    outcome(&chain, text, true)
                }
            }
        }
        SingCmd::ClassT { p, a, b } => {
            let form = tsurf::sing::normalize(*p, *a, *b).map_err(|e| e.to_string())?;
            let witness = tsurf::sing::class_t_witness(&form);
            let text = match &witness {
                Some(w) => format!("class T: d={} n={} a={}", w.d, w.n, w.a),
                None => "not of class T".to_string(),
            };
            let ok = witness.is_some();
            outcome(
                &serde_json::json!({"normal_form": form, "witness": witness}),
                text,
                ok,
            )
        }
        SingCmd::FundamentalCycle { chain } => {
            let chain = HJChain::new(chain.clone()).map_err(|e| e.to_string())?;
            let graph = ResolutionGraph::chain(&chain);
            let (z, z2) = tsurf::sing::fundamental_cycle(&graph).map_err(|e| e.to_string())?;
            let text = format!("Z = {z:?}, Z^2 = {z2}");
            outcome(
                &serde_json::json!({"coefficients": z, "self_intersection": z2.to_string()}),
                text,
                true,
            )
        }
    }
}

fn run_lens(cmd: &LensCmd) -> Result<Outcome, String> {
    match cmd {
        LensCmd::Mcg { p, q } => {
            let space = tsurf::lens::LensSpace::new(*p, *q).map_err(|e| e.to_string())?;
            let report = tsurf::lens::mcg(space);
            let text = format!(
                "L({p},{q}): sigma defined: {}, generators: {}",
                report.sigma_defined,
                report.generators.join(", ")
            );
            outcome(&report, text, true)
        }
        LensCmd::Link { p, a, b } => {
            let form = tsurf::sing::normalize(*p, *a, *b).map_err(|e| e.to_string())?;
            let report = tsurf::lens::link_report(&form);
            let text = if report.space.is_sphere() {
                "link: S^3".to_string()
            } else {
                format!(
                    "link: L({},{}) (same germ as q = {})",
                    report.space.p,
                    report.space.q,
                    report.iso_companion_q.unwrap()
                )
            };
            outcome(&report, text, true)
        }
    }
}

fn run_obstruct(cmd: &ObstructCmd, _cli: &Cli) -> Result<Outcome, String> {
    match cmd {
        ObstructCmd::Embed { source, ambient } => {
            let kind = parse_milnor_kind(source)?;
            let ambient = parse_ambient(ambient)?;
            let lattice = tsurf::lens::milnor_lattice(kind).map_err(|e| e.to_string())?;
            let result = tsurf::lens::embeds(&lattice, ambient).map_err(|e| e.to_string())?;
            let text = if result.embeds {
                format!("{kind} embeds in {ambient}: witness {:?}", result.witness)
            } else {
                format!("{kind} does not embed in {ambient}")
            };
            outcome(&result, text, true)
        }
        ObstructCmd::Lemmas { max_n } => {
            let report = tsurf::lens::lemma_verdicts(*max_n).map_err(|e| e.to_string())?;
            let mut text = String::new();
            for v in &report.verdicts {
                text.push_str(&format!(
                    "{} into {}: {} (expected {})\n",
                    v.source,
                    v.ambient,
                    if v.computed_embeds {
                        "embeds"
                    } else {
                        "no embedding"
                    },
                    if v.expected_embeds {
                        "embeds"
                    } else {
                        "no embedding"
                    },
                ));
            }
            text.push_str(&format!("all verdicts reproduced: {}", report.all_agree));
            let ok = report.all_agree;
            outcome(&report, text, ok)
        }
    }
}

fn run_cover(cmd: &CoverCmd, cli: &Cli) -> Result<Outcome, String> {
    match cmd {
        CoverCmd::Verify {
            input,
            mode,
            samples,
        } => {
            let data = load_building_data(input)?;
            let mode = parse_verify_mode(mode, *samples, cli.seed)?;
            let report =
                tsurf::cover::verify_all(&data, mode, cli.rank_cap).map_err(|e| e.to_string())?;
            let ok = report.passed();
            let text = format!(
                "checked {} pairs, {} failures",
                report.verified_pairs,
                report.failures.len()
            );
            outcome(&report, text, ok)
        }
        CoverCmd::Invariants { input } => {
            let data = load_building_data(input)?;
            let inv = tsurf::cover::invariants(&data, cli.rank_cap).map_err(|e| e.to_string())?;
            let text = format!("K^2 = {}, chi = {}", inv.k2, inv.chi);
            outcome(
                &serde_json::json!({
                    "schema_version": 1,
                    "k2": inv.k2.to_string(),
                    "chi": inv.chi.to_string(),
                }),
                text,
                true,
            )
        }
        CoverCmd::Extend { input, bound } => {
            let text =
                std::fs::read_to_string(input).map_err(|e| format!("{}: {e}", input.display()))?;
            let spec: ExtendInput =
                serde_json::from_str(&text).map_err(|e| format!("{}: {e}", input.display()))?;
            let group = tsurf::f2::GroupF2::new(spec.rank);
            let lattice = tsurf::lattice::BlownQuadricLattice::new(spec.lattice_points);
            let h_vectors: Vec<tsurf::f2::GVector> = spec
                .h_basis
                .iter()
                .map(|bits| tsurf::f2::GVector::from_bits(bits))
                .collect();
            let h = tsurf::f2::Subspace::span(spec.rank, &h_vectors).map_err(|e| e.to_string())?;
            let d_on_h = spec
                .d_on_h
                .into_iter()
                .map(|e| (tsurf::f2::GVector::from_bits(&e.sigma), e.class))
                .collect();
            let eta = tsurf::f2::GVector::from_bits(&spec.eta);
            let (data, ext) = tsurf::cover::ample_extension(
                group,
                lattice,
                &h,
                &d_on_h,
                &eta,
                &spec.v,
                &spec.alpha,
                *bound,
                cli.q_cap,
                cli.rank_cap,
            )
            .map_err(|e| e.to_string())?;
            let report = serde_json::json!({
                "schema_version": 1,
                "q": ext.q,
                "min_l_margin": ext.min_l_margin.to_string(),
                "min_d_margin": ext.min_d_margin.to_string(),
                "data": tsurf::cover::BuildingDataJson::from(&data),
            });
            let text = format!(
                "extension found at q = {}; margins {} and {} against bound {}",
                ext.q, ext.min_l_margin, ext.min_d_margin, bound
            );
            outcome(&report, text, true)
        }
        CoverCmd::Completeness {
            input,
            mode,
            samples,
        } => {
            let data = load_building_data(input)?;
            let mode = parse_verify_mode(mode, *samples, cli.seed)?;
            let report = tsurf::cover::check_galois_completeness(&data, mode, cli.rank_cap)
                .map_err(|e| e.to_string())?;
            let ok = report.passed();
            let text = format!(
                "bundle obligations: {}, branch obligations: {}, {} checked",
                report.bundle_obligations_ok, report.branch_obligations_ok, report.checked
            );
            outcome(&report, text, ok)
        }
    }
}

fn run_actions(cmd: &ActionsCmd) -> Result<Outcome, String> {
    match cmd {
        ActionsCmd::List => {
            let records = tsurf::actions::table().map_err(|e| e.to_string())?;
            let mut text = String::new();
            for rec in &records {
                text.push_str(&format!(
                    "row {:2}  r={}  X={:18} forms {:8} Y={:14} |I_x|={}  simple={:5} smoothable={}\n",
                    rec.row,
                    rec.r,
                    rec.x_family,
                    rec.basis_forms.iter().collect::<String>(),
                    rec.y_family,
                    rec.i_x_size,
                    rec.simple,
                    rec.smoothable,
                ));
            }
            outcome(&records, text.trim_end().to_string(), true)
        }
        ActionsCmd::Check => {
            let report = tsurf::actions::consistency_check().map_err(|e| e.to_string())?;
            let failures: Vec<&tsurf::actions::CheckItem> =
                report.items.iter().filter(|i| !i.ok).collect();
            let text = if report.passed {
                format!("all {} checks passed", report.items.len())
            } else {
                format!(
                    "{} of {} checks failed: {:?}",
                    failures.len(),
                    report.items.len(),
                    failures.iter().map(|i| &i.name).collect::<Vec<_>>()
                )
            };
            let ok = report.passed;
            outcome(&report, text, ok)
        }
        ActionsCmd::Show { id } => {
            let records = tsurf::actions::table().map_err(|e| e.to_string())?;
            let matching: Vec<_> = records.into_iter().filter(|r| r.row == *id).collect();
            if matching.is_empty() {
                return Err(format!("no row {id} (rows are 1..=13)"));
            }
            let text = matching
                .iter()
                .map(|rec| {
                    format!(
                        "row {}: r={} X={} forms={} Y={} |I_x|={} simple={} smoothable={}{}",
                        rec.row,
                        rec.r,
                        rec.x_family,
                        rec.basis_forms.iter().collect::<String>(),
                        rec.y_family,
                        rec.i_x_size,
                        rec.simple,
                        rec.smoothable,
                        rec.note
                            .as_ref()
                            .map(|n| format!("\n  note: {n}"))
                            .unwrap_or_default()
                    )
                })
                .collect::<Vec<_>>()
                .join("\n");
            outcome(&matching, text, true)
        }
    }
}

fn run_construct(args: &ConstructArgs, cli: &Cli) -> Result<Outcome, String> {
    if args.factors.len() != args.k {
        return Err(format!(
            "--k {} does not match {} --factor occurrences",
            args.k,
            args.factors.len()
        ));
    }
    let mut factors = Vec::new();
    for text in &args.factors {
        let parts: Vec<&str> = text.split(',').collect();
        if parts.len() != 3 {
            return Err(format!("--factor wants a,b,n; got {text}"));
        }
        let a: i64 = parts[0]
            .trim()
            .parse()
            .map_err(|_| format!("bad a in {text}"))?;
        let b: i64 = parts[1]
            .trim()
            .parse()
            .map_err(|_| format!("bad b in {text}"))?;
        let n: usize = parts[2]
            .trim()
            .parse()
            .map_err(|_| format!("bad n in {text}"))?;
        factors.push(FactorParams {
            a,
            b,
            n,
            bn_split: None,
        });
    }
    let mode = match args.mode.as_str() {
        "bounded" => CertifyMode::Bounded,
        "exhaustive" => CertifyMode::Exhaustive,
        other => return Err(format!("unknown mode {other}; use bounded|exhaustive")),
    };
    let input = ConstructionInput {
        factors,
        multiplier: args.multiplier,
        mode,
        seed: cli.seed,
    };
    let cert =
        tsurf::construct::certify(&input, cli.rank_cap, cli.m_cap).map_err(|e| e.to_string())?;
    let ok = cert.passed();
    if let Some(path) = &args.out {
        let text = serde_json::to_string_pretty(&cert).map_err(|e| e.to_string())?;
        std::fs::write(path, text).map_err(|e| format!("{}: {e}", path.display()))?;
    }
    let text =
        format!(
        "rank {} over {} points, multiplier {}, ampleness: {}, invariants K^2 = {}, chi = {}{}{}",
        cert.group_rank,
        cert.lattice_points,
        cert.final_multiplier,
        if cert.ampleness.passed { "pass" } else { "FAIL" },
        cert.invariants.k2,
        cert.invariants.chi,
        match cert.component_lower_bound {
            Some(b) => format!(", component lower bound {b}"),
            None => String::new(),
        },
        if ok { "" } else { " [certificate FAILED]" },
    );
    outcome(&cert, text, ok)
}

#[derive(Serialize)]
struct InputEcho {
    argv: Vec<String>,
    seed: u64,
    rank_cap: usize,
    q_cap: u32,
    m_cap: u32,
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    let cli = Cli::parse();
    tsurf::set_parallel(cli.parallel);
    let start = Instant::now();
    let result = run(&cli);
    let elapsed = start.elapsed().as_millis();
    match result {
        Ok(out) => {
            if cli.json {
                let echo = InputEcho {
                    argv: argv.clone(),
                    seed: cli.seed,
                    rank_cap: cli.rank_cap,
                    q_cap: cli.q_cap,
                    m_cap: cli.m_cap,
                };
                let report = Report::new(argv, &echo, &out.payload, elapsed);
                println!(
                    "{}",
                    serde_json::to_string_pretty(&report).expect("report serializes")
                );
            } else {
                println!("{}", out.text);
            }
            if out.ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
    }
}
