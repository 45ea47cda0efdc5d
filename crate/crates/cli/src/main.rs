use std::collections::BTreeMap;
use std::fmt::Display;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::Serialize;

use dichotomy::amalgam::{build_chain, lift_permutation, verify_chain, BigOptions, KModel, LimitChain, TaggedClass};
use dichotomy::classifier::{
    classify_finite, count_modules_upto, verify_witness, CensusOptions, Coeffs, Outcome, RingInput, VerdictKind, Witness, WitnessKind,
};
use dichotomy::coder::{decode_file, CodedModule, EngineFile, EngineN, Graph};
use dichotomy::error::{Failure, FailureKind};
use dichotomy::module::{FiniteModule, ModuleFile, TaggedModule};
use dichotomy::radic::{tfab_code, Bounds, TfabOptions};
use dichotomy::reductions::{
    endo_from_poly_module, endo_to_four_submodules, four_submodules_decode, freelike_normalize, freelike_recover, theorem_b_code,
    theorem_b_decode, EndoFile, EndoStructure, FreeLikeOptions, FreeLikeTagged, PolyQuotient, Scalars,
};
use dichotomy::ring::{catalog, FiniteRing, PresentedRing, RingTables};

const FORMATS: &str = "\
FORMATS
  Every structured file is JSON; `-` or an omitted optional input means stdin.

  ring      := tables | presented | \"catalog:\" NAME
  tables    := {\"size\": n, \"add\": [[e; n]; n], \"mul\": [[e; n]; n], \"zero\": e, \"one\": e}
  presented := {\"kind\": \"Z\"} | {\"kind\": \"Zmod\", \"n\": n}
             | {\"kind\": \"polyquot\", \"n\": n, \"modulus\": [c0, c1, ..., 1]}
  NAME      := Z/2 | Z/3 | Z/4 | Z/6 | Z/8 | Z/9 | Z/12 | Z/16 | F4 | F2[x]/(x^2) | F2[x]/(x^3)
             | F2[x,y]/(x^2,xy,y^2) | F2[x,y]/(x^2,y^2) | Z/4[x]/(x^2+x+1) | Z/4[x]/(x^2)
             | Z/2xZ/2 | Z/2xZ/4
  module    := {\"ring\": tables, \"size\": n, \"add\": [[e; n]; n], \"action\": [[e; n]; |R|],
                \"zero\": e?, \"tags\": [[e, ...], ...]?}
  endo      := module fields plus \"T\": [e; n]
  polymod   := {\"base\": tables, \"g\": [c0, ..., 1], \"module\": module}
               (module over R[x]/(g), element sum c_i x^i numbered sum c_i |R|^i)
  graph     := N NEWLINE (U \" \" V NEWLINE)*        vertices 0..N-1, U < V, '#' comments
  engine    := {\"ring\": tables, \"ideal\": [e], \"chain\": chain, \"v0_stage\": k,
                \"v1_stage\": k, \"v1_grows\": k}
  coded     := {\"context\": {...}, \"module\": module}          output of code-graph
  chain     := {\"stages\": [...], \"certificates\": [[entry]]}   output of chain build
  freelike  := {\"scalars\": \"Residues\" | \"Integers\", \"rank\": k, \"tags\": [lattice],
                \"handles\": {...}}                            output of reduce freelike
  witness   := {\"kind\": \"ThmA\", \"r\": elem} | {\"kind\": \"ThmB\", \"x\": elem, \"y\": elem}
             | {\"kind\": \"ThmC\", \"generators\": [elem]}
             | {\"kind\": \"NonMaximalPrime\", \"generators\": [elem]}
             | {\"kind\": \"InfOrthIdempotents\", \"family\": [elem]}
             plus \"path\": [[e]] (successive quotient ideals) when needed
  elem      := [i] (table index) | [c0, c1, ...] (coefficients of a presented ring)
  assign    := KEY \"=\" VALUE (\",\" KEY \"=\" VALUE)*    VALUE := INT | \"[\" INT (\" \" INT)* \"]\"

  tfab-code prints:
    \"rank\" K / \"depth\" M / \"r\" R / (\"gamma\" I S...)* / \"generators\" G / G lines of K residues mod R^M

EXIT CODES
  0 success (classify: PIR; verify-witness: the witness holds)
  1 verify-witness: the witness fails or cannot be checked
  2 parse, shape or precondition error
  3 guard refusal (an input above a configured bound)
  4 decode error
  10 classify: BorelComplete
";

#[derive(Parser)]
#[command(name = "dichotomy", version, about = "Finite rings, modules and the reductions between them", after_long_help = FORMATS)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Classify a finite ring: principal ideal ring with its ideal chains, or a witness.
    Classify { ring: String },
    /// Isomorphism classes of modules of each order up to the bound.
    Census {
        ring: String,
        #[arg(long, default_value_t = 8)]
        max_order: usize,
    },
    /// Build the graph-coding engine over F₂.
    Engine {
        /// Vertex classes (the chain stage feeding both sorts).
        #[arg(long, default_value_t = 3)]
        stage: usize,
        /// Chain length.
        #[arg(long, default_value_t = 4)]
        length: usize,
    },
    /// Code a graph as a tagged module.
    CodeGraph { engine: PathBuf, graph: PathBuf },
    /// Recover the graph from a coded module.
    DecodeModule { coded: Option<PathBuf> },
    /// Lift a graph isomorphism to an isomorphism of the coded modules.
    LiftIso {
        engine: PathBuf,
        from: PathBuf,
        to: PathBuf,
        /// Vertex map "h0 h1 ..."; found by search when omitted.
        #[arg(long)]
        map: Option<String>,
    },
    /// Reductions between module problems.
    Reduce {
        #[command(subcommand)]
        which: Reduce,
    },
    /// Code a graph as a torsion-free abelian group given by generators mod 2^depth.
    TfabCode {
        graph: PathBuf,
        #[arg(long, default_value_t = 64)]
        depth: u32,
        #[arg(long, default_value_t = 1)]
        degree: u32,
        #[arg(long, default_value_t = 1)]
        height: u32,
        #[arg(long, default_value_t = 4096)]
        max_rank: usize,
    },
    /// Build or inspect a chain of big extensions in the F₂ tagged class.
    Chain {
        #[command(subcommand)]
        which: ChainCmd,
    },
    /// Check the hypotheses of a Borel-completeness witness.
    VerifyWitness {
        ring: String,
        /// "r=ELEM"
        #[arg(long = "thmA")]
        thm_a: Option<String>,
        /// "x=ELEM,y=ELEM"
        #[arg(long = "thmB")]
        thm_b: Option<String>,
        /// A witness file.
        #[arg(long)]
        witness: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum Reduce {
    /// (V, T) to V ⊕ V with four tags.
    #[command(name = "endo-to-4sub")]
    EndoTo4sub { endo: Option<PathBuf> },
    /// Four tags back to (V, T).
    #[command(name = "4sub-to-endo")]
    FourSubToEndo { module: Option<PathBuf> },
    /// A module over R[x]/(g) to (M, action of x).
    #[command(name = "polymod-to-endo")]
    PolymodToEndo {
        polymod: Option<PathBuf>,
        #[arg(long, default_value_t = 4096)]
        max_size: usize,
    },
    /// A tagged ℤ/n-module to a free-like tagged module.
    Freelike {
        module: Option<PathBuf>,
        #[arg(long, default_value_t = 2)]
        omega: usize,
        /// Work over ℤ instead of ℤ/n.
        #[arg(long)]
        integers: bool,
        #[arg(long, default_value_t = 4096)]
        max_rank: usize,
    },
    /// A free-like tagged module back to the tagged module.
    FreelikeDecode { freelike: Option<PathBuf> },
    /// (V, T) over R/(Ann x + Ann y) to a single R-module.
    #[command(name = "thmB-code")]
    ThmBCode {
        ring: String,
        endo: PathBuf,
        #[arg(long)]
        x: usize,
        #[arg(long)]
        y: usize,
        #[arg(long, default_value_t = 1 << 20)]
        max_w: usize,
    },
    /// An R-module back to (xM, T).
    #[command(name = "thmB-decode")]
    ThmBDecode {
        ring: String,
        module: PathBuf,
        #[arg(long)]
        x: usize,
        #[arg(long)]
        y: usize,
    },
}

#[derive(Subcommand)]
enum ChainCmd {
    Build {
        #[arg(long, default_value_t = 4)]
        length: usize,
    },
    /// Replay every certificate; optionally lift a permutation of stage classes.
    Inspect {
        chain: Option<PathBuf>,
        #[arg(long)]
        stage: Option<usize>,
        /// Class permutation "l0 l1 ..." as images of the stage labels in order.
        #[arg(long)]
        perm: Option<String>,
    },
}

struct CliError {
    code: u8,
    msg: String,
}

impl From<anyhow::Error> for CliError {
    fn from(e: anyhow::Error) -> Self {
        CliError { code: 2, msg: format!("{e:#}") }
    }
}

fn code_of(k: FailureKind) -> u8 {
    match k {
        FailureKind::Input | FailureKind::Precondition => 2,
        FailureKind::Guard => 3,
        FailureKind::Decode => 4,
    }
}

trait Kinded<T> {
    fn kinded(self) -> Result<T, CliError>;
}

impl<T, E: Failure + Display> Kinded<T> for Result<T, E> {
    fn kinded(self) -> Result<T, CliError> {
        self.map_err(|e| CliError { code: code_of(e.kind()), msg: e.to_string() })
    }
}

fn read_text(path: Option<&Path>) -> anyhow::Result<String> {
    match path {
        Some(p) if p != Path::new("-") => std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display())),
        _ => {
            let mut s = String::new();
            std::io::stdin().read_to_string(&mut s).context("reading stdin")?;
            Ok(s)
        }
    }
}

fn read_json<T: DeserializeOwned>(path: Option<&Path>) -> anyhow::Result<T> {
    let text = read_text(path)?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.map_or("stdin".into(), |p| p.display().to_string())))
}

/// Write to stdout; a closed pipe downstream is not an error.
fn emit(text: &str) -> anyhow::Result<()> {
    let mut out = std::io::stdout().lock();
    match out.write_all(text.as_bytes()).and_then(|_| out.flush()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

fn print_json<T: Serialize>(v: &T) -> anyhow::Result<()> {
    emit(&format!("{}\n", serde_json::to_string_pretty(v)?))
}

enum RingArg {
    Tables(FiniteRing),
    Presented(PresentedRing),
}

fn load_ring(arg: &str) -> Result<RingArg, CliError> {
    if let Some(name) = arg.strip_prefix("catalog:") {
        return catalog()
            .into_iter()
            .find(|(n, _)| *n == name)
            .map(|(_, r)| RingArg::Tables(r))
            .ok_or_else(|| anyhow!("no catalog ring named {name:?}").into());
    }
    let text = read_text(Some(Path::new(arg)))?;
    let value: serde_json::Value = serde_json::from_str(&text).with_context(|| format!("parsing {arg}"))?;
    if value.get("kind").is_some() {
        let p: PresentedRing = serde_json::from_value(value).with_context(|| format!("parsing {arg} as a presented ring"))?;
        p.validate().kinded()?;
        return Ok(RingArg::Presented(p));
    }
    let t: RingTables = serde_json::from_value(value).with_context(|| format!("parsing {arg} as ring tables"))?;
    Ok(RingArg::Tables(FiniteRing::from_tables(&t).kinded()?))
}

fn finite_ring(arg: &str) -> Result<FiniteRing, CliError> {
    match load_ring(arg)? {
        RingArg::Tables(r) => Ok(r),
        RingArg::Presented(p) => p.to_finite().kinded(),
    }
}

fn load_graph(path: &Path) -> Result<Graph, CliError> {
    Graph::parse(&read_text(Some(path))?).kinded()
}

fn engine(path: &Path) -> Result<EngineN, CliError> {
    let recipe: EngineFile = read_json(Some(path))?;
    EngineN::from_file(recipe).kinded()
}

fn parse_list(s: &str) -> anyhow::Result<Vec<usize>> {
    s.split_whitespace().map(|t| t.parse().with_context(|| format!("bad number {t:?}"))).collect()
}

fn parse_elem(v: &str) -> anyhow::Result<Coeffs> {
    let v = v.trim();
    let inner = v.strip_prefix('[').and_then(|x| x.strip_suffix(']'));
    match inner {
        Some(list) => list
            .split(|c: char| c.is_whitespace() || c == ';')
            .filter(|t| !t.is_empty())
            .map(|t| t.parse().with_context(|| format!("bad coefficient {t:?}")))
            .collect(),
        None => Ok(vec![v.parse().with_context(|| format!("bad element {v:?}"))?]),
    }
}

/// KEY=VALUE pairs separated by commas outside brackets.
fn parse_assign(s: &str) -> anyhow::Result<BTreeMap<String, Coeffs>> {
    let mut out = BTreeMap::new();
    let mut depth = 0;
    let mut start = 0;
    let mut parts = Vec::new();
    for (i, c) in s.char_indices() {
        match c {
            '[' => depth += 1,
            ']' => depth -= 1,
            ',' if depth == 0 => {
                parts.push(&s[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    parts.push(&s[start..]);
    for p in parts {
        let (k, v) = p.split_once('=').ok_or_else(|| anyhow!("expected KEY=VALUE, got {p:?}"))?;
        out.insert(k.trim().to_string(), parse_elem(v)?);
    }
    Ok(out)
}

fn take(map: &mut BTreeMap<String, Coeffs>, key: &str) -> anyhow::Result<Coeffs> {
    map.remove(key).ok_or_else(|| anyhow!("missing {key}="))
}

fn run(cli: Cli) -> Result<u8, CliError> {
    match cli.cmd {
        Cmd::Classify { ring } => {
            let r = finite_ring(&ring)?;
            let v = classify_finite(&r).kinded()?;
            print_json(&v)?;
            Ok(if v.verdict == VerdictKind::BorelComplete { 10 } else { 0 })
        }
        Cmd::Census { ring, max_order } => {
            let r = finite_ring(&ring)?;
            let c = count_modules_upto(&r, max_order, &CensusOptions::default()).kinded()?;
            emit(&c.render())?;
            Ok(0)
        }
        Cmd::Engine { stage, length } => {
            let class = TaggedClass::prime_field(2);
            let chain = build_chain(&class, length, BigOptions::default()).kinded()?;
            let e = EngineN::from_chain(&class, chain, stage).kinded()?;
            print_json(&e.recipe)?;
            Ok(0)
        }
        Cmd::CodeGraph { engine: e, graph } => {
            let e = engine(&e)?;
            let g = load_graph(&graph)?;
            print_json(&e.code_graph_file(&g).kinded()?)?;
            Ok(0)
        }
        Cmd::DecodeModule { coded } => {
            let file: CodedModule = read_json(coded.as_deref())?;
            emit(&decode_file(&file).kinded()?.to_string())?;
            Ok(0)
        }
        Cmd::LiftIso { engine: e, from, to, map } => {
            let e = engine(&e)?;
            let (g, g2) = (load_graph(&from)?, load_graph(&to)?);
            let h = match map {
                Some(m) => parse_list(&m)?,
                None => g.isomorphism(&g2).ok_or_else(|| anyhow!("the graphs are not isomorphic"))?,
            };
            let f = e.lift_graph_iso(&g, &g2, &h).kinded()?;
            print_json(&serde_json::json!({ "vertex_map": h, "module_map": f }))?;
            Ok(0)
        }
        Cmd::Reduce { which } => reduce(which),
        Cmd::TfabCode { graph, depth, degree, height, max_rank } => {
            let g = load_graph(&graph)?;
            let p = tfab_code(&g, &TfabOptions { depth, bounds: Bounds { degree, height }, max_rank }).kinded()?;
            emit(&p.render())?;
            Ok(0)
        }
        Cmd::Chain { which } => chain_cmd(which),
        Cmd::VerifyWitness { ring, thm_a, thm_b, witness } => {
            let w = match (thm_a, thm_b, witness) {
                (Some(a), None, None) => {
                    let mut m = parse_assign(&a)?;
                    Witness { path: vec![], kind: WitnessKind::ThmA { r: take(&mut m, "r")? } }
                }
                (None, Some(b), None) => {
                    let mut m = parse_assign(&b)?;
                    Witness { path: vec![], kind: WitnessKind::ThmB { x: take(&mut m, "x")?, y: take(&mut m, "y")?, ideal: vec![] } }
                }
                (None, None, Some(p)) => read_json(Some(&p))?,
                _ => return Err(anyhow!("give exactly one of --thmA, --thmB, --witness").into()),
            };
            let input = match load_ring(&ring)? {
                RingArg::Tables(r) => RingInput::Finite(r),
                RingArg::Presented(p) => RingInput::Presented(p),
            };
            let check = verify_witness(&input, &w).kinded()?;
            let result = match check.outcome {
                Outcome::Holds => serde_json::json!(true),
                Outcome::Fails => serde_json::json!(false),
                Outcome::Unsupported => serde_json::json!("unsupported"),
            };
            print_json(&serde_json::json!({ "result": result, "transcript": check.transcript }))?;
            Ok(if check.holds() { 0 } else { 1 })
        }
    }
}

fn reduce(which: Reduce) -> Result<u8, CliError> {
    match which {
        Reduce::EndoTo4sub { endo } => {
            let f: EndoFile = read_json(endo.as_deref())?;
            let s = EndoStructure::from_file(&f).kinded()?;
            print_json(&endo_to_four_submodules(&s).to_file())?;
        }
        Reduce::FourSubToEndo { module } => {
            let f: ModuleFile = read_json(module.as_deref())?;
            let t = TaggedModule::from_file(&f).kinded()?;
            print_json(&four_submodules_decode(&t).kinded()?.to_file())?;
        }
        Reduce::PolymodToEndo { polymod, max_size } => {
            #[derive(serde::Deserialize)]
            struct PolyFile {
                base: RingTables,
                g: Vec<usize>,
                module: ModuleFile,
            }
            let f: PolyFile = read_json(polymod.as_deref())?;
            let base = FiniteRing::from_tables(&f.base).kinded()?;
            let pq = PolyQuotient::new(&base, &f.g, max_size).kinded()?;
            let (m, _) = FiniteModule::from_file(&f.module).kinded()?;
            print_json(&endo_from_poly_module(&pq, &m).kinded()?.to_file())?;
        }
        Reduce::Freelike { module, omega, integers, max_rank } => {
            let f: ModuleFile = read_json(module.as_deref())?;
            let t = TaggedModule::from_file(&f).kinded()?;
            let scalars = if integers { Scalars::Integers } else { Scalars::Residues };
            print_json(&freelike_normalize(&t, &FreeLikeOptions { omega, max_rank, scalars }).kinded()?)?;
        }
        Reduce::FreelikeDecode { freelike } => {
            let f: FreeLikeTagged = read_json(freelike.as_deref())?;
            print_json(&freelike_recover(&f).kinded()?.to_file())?;
        }
        Reduce::ThmBCode { ring, endo, x, y, max_w } => {
            let r = finite_ring(&ring)?;
            let f: EndoFile = read_json(Some(&endo))?;
            let s = EndoStructure::from_file(&f).kinded()?;
            let coded = theorem_b_code(&r, x, y, &s, max_w).kinded()?;
            print_json(&coded.module.to_file(&[]))?;
        }
        Reduce::ThmBDecode { ring, module, x, y } => {
            let r = finite_ring(&ring)?;
            let f: ModuleFile = read_json(Some(&module))?;
            let (m, _) = FiniteModule::from_file(&f).kinded()?;
            print_json(&theorem_b_decode(&r, x, y, &m).kinded()?.to_file())?;
        }
    }
    Ok(0)
}

fn chain_cmd(which: ChainCmd) -> Result<u8, CliError> {
    let class = TaggedClass::prime_field(2);
    match which {
        ChainCmd::Build { length } => {
            let chain = build_chain(&class, length, BigOptions::default()).kinded()?;
            print_json(&chain)?;
        }
        ChainCmd::Inspect { chain, stage, perm } => {
            let chain: LimitChain<KModel> = read_json(chain.as_deref())?;
            verify_chain(&class, &chain, BigOptions::default()).kinded()?;
            let stages: Vec<_> = chain
                .stages
                .iter()
                .map(|s| serde_json::json!({ "dim": s.base.dim(), "classes": s.class_labels().len() }))
                .collect();
            let certs: Vec<usize> = chain.certificates.iter().map(Vec::len).collect();
            let mut out = serde_json::json!({ "verified": true, "stages": stages, "certificate_entries": certs });
            match (stage, perm) {
                (Some(m), Some(p)) => {
                    let labels = chain.stages.get(m).ok_or_else(|| anyhow!("no stage {m}"))?.class_labels();
                    let images = parse_list(&p)?;
                    if images.len() != labels.len() {
                        return Err(anyhow!("stage {m} has {} classes, the permutation lists {}", labels.len(), images.len()).into());
                    }
                    let h = labels.iter().zip(&images).map(|(&l, &i)| (l, i as _)).collect();
                    let sigma = lift_permutation(&class, &chain, m, &h).kinded()?;
                    out["lift"] = serde_json::to_value(&sigma).map_err(anyhow::Error::from)?;
                }
                (None, None) => {}
                _ => return Err(anyhow!("--stage and --perm go together").into()),
            }
            print_json(&out)?;
        }
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {}", e.msg);
            ExitCode::from(e.code)
        }
    }
}
