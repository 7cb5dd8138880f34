//! Command-line front end. [`run`] returns the process exit code:
//! 0 on success, 1 for a computed negative answer, 2 for usage or input
//! errors and 3 when a computation exceeds the enumeration budget.

use std::fmt::Display;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use harsanyi::algebra::{
    check_reducibility_witness, check_sigma_h_laws, counterexample_algebra, make_powerset_algebra, operator_closure, search_k,
    AlgebraError, ModalAlgebra,
};
use harsanyi::bisequence::{BiSeqError, TruncatedBiSeqSpace};
use harsanyi::canon::{canonical_model, cardinality, sat, CanonError, Logic, SatWitness};
use harsanyi::exactnum::{format_rational, parse_rational};
use harsanyi::formula::{parse, Formula, ProbIndex};
use harsanyi::models::{check_operator_laws, extend_to_kb, validate_kb_space, ModelError, ModelFile, ParsedModel, Semantics};
use harsanyi::rewrite::{denest, statement_of, RewriteError};
use serde_json::{json, Value};

#[derive(Debug, Parser)]
#[command(name = "harsanyi", version, about = "Probability logic over Harsanyi type spaces")]
pub struct Cli {
    /// Emit machine-readable JSON.
    #[arg(long, global = true)]
    json: bool,
    /// Worker threads for parallel checks.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum LogicArg {
    H,
    Plus,
}

impl From<LogicArg> for Logic {
    fn from(l: LogicArg) -> Logic {
        match l {
            LogicArg::H => Logic::SigmaH,
            LogicArg::Plus => Logic::SigmaPlus,
        }
    }
}

#[derive(Debug, Args)]
struct Decide {
    formula: String,
    #[arg(long, value_enum, default_value = "h")]
    logic: LogicArg,
}

#[derive(Debug, Args)]
struct Language {
    #[arg(long)]
    q: u64,
    /// Number of letters; the language uses p1..pN.
    #[arg(long, default_value_t = 1)]
    letters: u32,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Parse a formula and print it in canonical syntax.
    Parse { formula: String },
    /// Decide satisfiability.
    Sat(Decide),
    /// Decide validity.
    Valid(Decide),
    /// Rewrite a normal formula to depth at most one.
    Denest { formula: String },
    /// List the atoms of the canonical model.
    Atoms(Language),
    /// Export the canonical model as a model file.
    Canonical {
        #[command(flatten)]
        lang: Language,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Count atoms of accuracy q and depth d over w letters.
    Cardinality {
        #[arg(long)]
        q: u64,
        #[arg(long)]
        d: usize,
        #[arg(long)]
        w: usize,
    },
    /// Explore the truncated bi-sequence space.
    Bisim {
        #[arg(long)]
        horizon: usize,
        #[arg(long, default_value = "1/1")]
        r: String,
        #[arg(long)]
        list_length: Option<usize>,
        /// Print only the number of consistent lists.
        #[arg(long)]
        count: bool,
        /// Also check the coordinate lemma.
        #[arg(long)]
        lemma: bool,
    },
    /// Check laws and knowledge operators of a finite modal algebra.
    Algebra {
        /// Algebra file; defaults to the four-element counterexample.
        #[arg(long, conflicts_with = "model")]
        file: Option<PathBuf>,
        /// Build the powerset algebra of a model file instead.
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        agent: u32,
        #[arg(long, default_value_t = 2)]
        q: u64,
        /// Print the algebra file and stop.
        #[arg(long)]
        export: bool,
    },
    /// Validate a model file, report its properties and evaluate formulas.
    CheckModel {
        path: PathBuf,
        #[arg(long = "formula")]
        formulas: Vec<String>,
        /// Grid for the operator-law check.
        #[arg(long)]
        laws: Option<u64>,
    },
    /// Extend a Harsanyi model with its type partitions.
    KbExtend { path: PathBuf },
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Budget(String),
}

impl Failure {
    fn code(&self) -> i32 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Budget(_) => 3,
        }
    }

    fn usage(e: impl Display) -> Failure {
        Failure::Usage(e.to_string())
    }
}

impl From<CanonError> for Failure {
    fn from(e: CanonError) -> Failure {
        match e {
            CanonError::BudgetExceeded { .. } => Failure::Budget(e.to_string()),
            other => Failure::usage(other),
        }
    }
}

impl From<RewriteError> for Failure {
    fn from(e: RewriteError) -> Failure {
        match e {
            RewriteError::Canon(c) => c.into(),
            other => Failure::usage(other),
        }
    }
}

impl From<AlgebraError> for Failure {
    fn from(e: AlgebraError) -> Failure {
        match e {
            AlgebraError::TooManyAtoms(_) | AlgebraError::CarrierTooLarge { .. } | AlgebraError::ClosureTooLarge(_) => {
                Failure::Budget(e.to_string())
            }
            other => Failure::usage(other),
        }
    }
}

impl From<ModelError> for Failure {
    fn from(e: ModelError) -> Failure {
        match e {
            ModelError::TooLarge { .. } => Failure::Budget(e.to_string()),
            other => Failure::usage(other),
        }
    }
}

impl From<BiSeqError> for Failure {
    fn from(e: BiSeqError) -> Failure {
        Failure::usage(e)
    }
}

type Outcome = Result<bool, Failure>;

struct Ctx<'a> {
    json: bool,
    out: &'a mut dyn Write,
}

impl Ctx<'_> {
    fn emit(&mut self, text: impl Display, value: Value) {
        if self.json {
            writeln!(self.out, "{value}").expect("stdout is writable");
        } else {
            writeln!(self.out, "{text}").expect("stdout is writable");
        }
    }
}

fn formula(text: &str) -> Result<Formula, Failure> {
    parse(text).map_err(Failure::usage)
}

fn prob_index(text: &str) -> Result<ProbIndex, Failure> {
    let value = parse_rational(text).map_err(Failure::usage)?;
    ProbIndex::new(value).map_err(Failure::usage)
}

fn load_model(path: &PathBuf) -> Result<ParsedModel, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    Ok(ModelFile::from_json(&text)?.into_model()?)
}

fn witness_json(w: &SatWitness) -> Value {
    match w {
        SatWitness::State { model, state } => {
            let e = model.atom_entry(*state);
            json!({
                "state": state,
                "assignment": e.assignment.iter().map(|(p, v)| (format!("p{p}"), Value::from(*v))).collect::<serde_json::Map<_, _>>(),
                "brackets": e.brackets.iter().map(|(k, v)| (k.clone(), Value::from(v.clone()))).collect::<serde_json::Map<_, _>>(),
            })
        }
        SatWitness::Measure { letters, assignment, measure } => json!({
            "assignment": letters.iter().enumerate().map(|(i, p)| (format!("p{p}"), Value::from(assignment >> i & 1 == 1))).collect::<serde_json::Map<_, _>>(),
            "measure": measure.iter().map(format_rational).collect::<Vec<_>>(),
        }),
    }
}

fn letters(n: u32) -> Vec<u32> {
    (1..=n).collect()
}

fn execute(command: Command, ctx: &mut Ctx) -> Outcome {
    match command {
        Command::Parse { formula: text } => {
            let f = formula(&text)?;
            let rendered = f.render();
            ctx.emit(
                &rendered,
                json!({
                    "formula": rendered,
                    "depth": f.depth(),
                    "accuracy": f.accuracy(),
                    "letters": f.letters(),
                    "agents": f.agents(),
                }),
            );
            Ok(true)
        }
        Command::Sat(d) => {
            let f = formula(&d.formula)?;
            match sat(&f, d.logic.into())? {
                Some(w) => {
                    ctx.emit(format!("sat\n{}", w.describe()), json!({"result": "sat", "witness": witness_json(&w)}));
                    Ok(true)
                }
                None => {
                    ctx.emit("unsat", json!({"result": "unsat"}));
                    Ok(false)
                }
            }
        }
        Command::Valid(d) => {
            let f = formula(&d.formula)?;
            match sat(&f.clone().not(), d.logic.into())? {
                None => {
                    ctx.emit("valid", json!({"result": "valid"}));
                    Ok(true)
                }
                Some(w) => {
                    ctx.emit(
                        format!("invalid\ncounter-witness: {}", w.describe()),
                        json!({"result": "invalid", "witness": witness_json(&w)}),
                    );
                    Ok(false)
                }
            }
        }
        Command::Denest { formula: text } => {
            let f = formula(&text)?;
            match denest(&f) {
                Ok(d) => {
                    ctx.emit(d.render(), json!({"input": f.render(), "output": d.render(), "depth": d.depth()}));
                    Ok(true)
                }
                Err(RewriteError::NotNormal(s)) => {
                    ctx.emit(format!("not normal: {s}"), json!({"input": f.render(), "normal": false}));
                    Ok(false)
                }
                Err(e) => Err(e.into()),
            }
        }
        Command::Atoms(lang) => {
            let model = canonical_model(lang.q, &letters(lang.letters))?;
            let text: Vec<String> = (0..model.space().num_states())
                .map(|s| format!("{s}: {}", statement_of(&model, s)))
                .collect();
            ctx.emit(text.join("\n"), model.atom_index_json());
            Ok(true)
        }
        Command::Canonical { lang, out } => {
            let model = canonical_model(lang.q, &letters(lang.letters))?;
            let file = ModelFile::from_space(model.space(), None).to_json();
            match out {
                Some(path) => {
                    std::fs::write(&path, &file).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
                    ctx.emit(
                        format!("wrote {} states to {}", model.space().num_states(), path.display()),
                        json!({"states": model.space().num_states(), "path": path.display().to_string()}),
                    );
                }
                None => writeln!(ctx.out, "{file}").expect("stdout is writable"),
            }
            Ok(true)
        }
        Command::Cardinality { q, d, w } => {
            let n = cardinality(q, d, w)?;
            ctx.emit(n, json!({"q": q, "d": d, "w": w, "atoms": n}));
            Ok(true)
        }
        Command::Bisim { horizon, r, list_length, count, lemma } => {
            let space = TruncatedBiSeqSpace::new(horizon)?;
            let r = prob_index(&r)?;
            let mut value = json!({"horizon": horizon, "r": format_rational(r.value())});
            let mut lines = Vec::new();
            let lengths: Vec<usize> = match list_length {
                Some(m) => vec![m],
                None => (1..=horizon + 1).collect(),
            };
            let counts = lengths
                .iter()
                .map(|&m| space.count_consistent_jlists(m, &r).map(|c| (m, c)))
                .collect::<Result<Vec<_>, _>>()?;
            if count && counts.len() == 1 && !ctx.json && !lemma {
                writeln!(ctx.out, "{}", counts[0].1).expect("stdout is writable");
                return Ok(true);
            }
            for (m, c) in &counts {
                lines.push(format!("lists of length {m}: {c} consistent of {}", 1u64 << m));
            }
            value["lists"] = if counts.len() == 1 {
                json!({"m": counts[0].0, "consistent": counts[0].1})
            } else {
                counts.iter().map(|(m, c)| json!({"m": m, "consistent": c})).collect()
            };
            if lemma {
                let report = space.verify_coordinate_lemma(&r);
                lines.push(format!("coordinate lemma: {}", if report.all_hold() { "holds" } else { "broken" }));
                value["lemma"] = json!({
                    "holds": report.all_hold(),
                    "broken": report.broken().map(|c| format!("{:?}{}", c.seq, c.k)).collect::<Vec<_>>(),
                });
            }
            ctx.emit(lines.join("\n"), value);
            Ok(true)
        }
        Command::Algebra { file, model, agent, q, export } => {
            let algebra = match (file, model) {
                (Some(path), _) => {
                    let text = std::fs::read_to_string(&path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
                    ModalAlgebra::from_json(&text)?
                }
                (None, Some(path)) => match load_model(&path)? {
                    ParsedModel::TypeSpace(m) => make_powerset_algebra(&m, agent, q)?,
                    ParsedModel::KnowledgeBelief(kb) => make_powerset_algebra(&kb, agent, q)?,
                },
                (None, None) => counterexample_algebra(),
            };
            if export {
                writeln!(ctx.out, "{}", algebra.to_json()).expect("stdout is writable");
                return Ok(true);
            }
            let laws = check_sigma_h_laws(&algebra, q)?;
            let failed: Vec<String> = laws.counts.iter().filter(|(_, &c)| c > 0).map(|(l, c)| format!("{l:?}:{c}")).collect();
            let reducibility = check_reducibility_witness(&algebra)?;
            let closure = operator_closure(&algebra, false)?;
            let ks = search_k(&algebra)?;
            let mut lines = vec![
                format!("elements: {}", algebra.size()),
                format!("belief laws: {}", if laws.passes() { "pass".to_string() } else { failed.join(", ") }),
                format!("knowledge operators: {}", ks.len()),
            ];
            for (k, inside) in &reducibility.candidates {
                lines.push(format!("  {k:?} {}", if *inside { "in belief closure" } else { "outside belief closure" }));
            }
            lines.push(format!("belief operator closure: {}", closure.len()));
            ctx.emit(
                lines.join("\n"),
                json!({
                    "elements": algebra.size(),
                    "laws": {"pass": laws.passes(), "failed": failed},
                    "knowledge": reducibility.candidates.iter().map(|(k, inside)| json!({"table": k, "in_closure": inside})).collect::<Vec<_>>(),
                    "closure": closure.len(),
                }),
            );
            Ok(laws.passes())
        }
        Command::CheckModel { path, formulas, laws } => {
            let parsed = load_model(&path)?;
            let space = parsed.space();
            let harsanyi: Vec<bool> =
                (1..=space.num_agents() as u32).map(|a| space.is_harsanyi(a)).collect::<Result<_, _>>()?;
            let mut lines = vec![
                format!("states: {}, agents: {}", space.num_states(), space.num_agents()),
                format!("harsanyi: {harsanyi:?}"),
            ];
            let mut value = json!({"states": space.num_states(), "agents": space.num_agents(), "harsanyi": harsanyi});
            if let ParsedModel::KnowledgeBelief(kb) = &parsed {
                let report = validate_kb_space(kb);
                lines.push(format!("knowledge-belief conditions: {}", if report.passes() { "pass" } else { "fail" }));
                value["kb"] = json!(report.passes());
            }
            let mut evaluations = Vec::new();
            for text in &formulas {
                let f = formula(text)?;
                let ext: Vec<usize> = match &parsed {
                    ParsedModel::TypeSpace(m) => m.extension(&f)?,
                    ParsedModel::KnowledgeBelief(kb) => kb.extension(&f)?,
                }
                .ones()
                .collect();
                lines.push(format!("{}: {:?}", f.render(), ext));
                evaluations.push(json!({"formula": f.render(), "states": ext}));
            }
            value["formulas"] = json!(evaluations);
            if let Some(q) = laws {
                let report = check_operator_laws(space, 1, q)?;
                let failed: Vec<String> = report.counts.keys().map(|l| format!("{l:?}")).collect();
                lines.push(format!("operator laws: {}", if failed.is_empty() { "pass".to_string() } else { failed.join(", ") }));
                value["laws"] = json!(failed);
            }
            ctx.emit(lines.join("\n"), value);
            Ok(true)
        }
        Command::KbExtend { path } => {
            let parsed = load_model(&path)?;
            match extend_to_kb(parsed.space()) {
                Ok(kb) => {
                    let file = ModelFile::from_space(kb.base(), Some(kb.partitions())).to_json();
                    writeln!(ctx.out, "{file}").expect("stdout is writable");
                    Ok(true)
                }
                Err(ModelError::NotHarsanyi(a)) => {
                    ctx.emit(format!("not harsanyi for agent {a}"), json!({"harsanyi": false, "agent": a}));
                    Ok(false)
                }
                Err(e) => Err(e.into()),
            }
        }
    }
}

/// Runs the command line `args` (including the program name), writing
/// results to `out` and errors to standard error.
pub fn run<I, T>(args: I, out: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            if code == 0 {
                write!(out, "{e}").expect("stdout is writable");
            } else {
                eprint!("{e}");
            }
            return code;
        }
    };
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return 2;
        }
    }
    let mut ctx = Ctx { json: cli.json, out };
    match execute(cli.command, &mut ctx) {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(f) => {
            let (Failure::Usage(msg) | Failure::Budget(msg)) = &f;
            eprintln!("error: {msg}");
            f.code()
        }
    }
}
