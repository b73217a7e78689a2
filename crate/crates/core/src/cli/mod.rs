//! The `cpsum` command line.
//!
//! Exit status is 0 on success, 1 when the input is well formed but the
//! answer is negative (an invalid tree, an unrealizable module, a search
//! that came back empty or ran out of budget), and 2 on usage or parse
//! errors.

pub mod doc;
pub mod dot;
pub mod report;

use std::ffi::OsString;
use std::fs;
use std::io::{self, Read, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::modular::Modulus;
use crate::realize::{
    enumerate_trees, min_n_for_isotropy, realize_stable, search_module, MinN, RealizeError, SearchBudget,
    SearchOutcome,
};
use crate::tree::validate_tree;

pub const EXIT_OK: i32 = 0;
pub const EXIT_NEGATIVE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Parser)]
#[command(name = "cpsum", version, about = "Weighted trees for cyclic actions on connected sums of CP2")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Io {
    /// Input document; standard input when absent.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Output file; standard output when absent.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct Budget {
    /// Largest rank searched.
    #[arg(long = "n-max")]
    n_max: Option<u64>,
    /// Cap on explored assignments.
    #[arg(long = "node-cap")]
    node_cap: Option<u64>,
}

impl Budget {
    fn get(&self) -> SearchBudget {
        let d = SearchBudget::default();
        SearchBudget { n_max: self.n_max.unwrap_or(d.n_max), node_cap: self.node_cap.unwrap_or(d.node_cap) }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
    Dot,
}

#[derive(Subcommand)]
enum Command {
    /// Check a tree document against the admissibility rules.
    Validate {
        #[command(flatten)]
        io: Io,
    },
    /// Module, singular sets, rotation data and Euler check of a tree.
    Analyze {
        #[command(flatten)]
        io: Io,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Build a tree for a module given as `{"m":.., "module":[{"stab":..,"mult":..}]}`.
    Realize {
        #[command(flatten)]
        io: Io,
    },
    /// Exhaustive search for a tree with exactly the given module.
    SearchModule {
        #[command(flatten)]
        io: Io,
        #[command(flatten)]
        budget: Budget,
    },
    /// Least rank of a fixed tree with isotropy spheres of the given orders,
    /// read as `{"m":.., "orders":[..]}`.
    MinN {
        #[command(flatten)]
        io: Io,
        #[command(flatten)]
        budget: Budget,
    },
    /// Every tree over `C_m` up to rank `--n-max`, one JSON document per line.
    Enumerate {
        #[arg(long)]
        m: u64,
        #[arg(long)]
        output: Option<PathBuf>,
        #[command(flatten)]
        budget: Budget,
    },
    /// Graphviz rendering of a tree document.
    ExportDot {
        #[command(flatten)]
        io: Io,
    },
}

/// Error that ends the command with the given status.
struct Fail(i32, String);

impl Fail {
    fn usage(msg: impl std::fmt::Display) -> Self {
        Fail(EXIT_USAGE, msg.to_string())
    }
}

impl From<doc::DocError> for Fail {
    fn from(e: doc::DocError) -> Self {
        Fail::usage(format!("parse error: {e}"))
    }
}

fn read_input(path: &Option<PathBuf>, stdin: &mut dyn Read) -> Result<String, Fail> {
    let mut text = String::new();
    match path {
        Some(p) => text = fs::read_to_string(p).map_err(|e| Fail::usage(format!("{}: {e}", p.display())))?,
        None => {
            stdin.read_to_string(&mut text).map_err(|e| Fail::usage(format!("stdin: {e}")))?;
        }
    }
    Ok(text)
}

fn write_output(path: &Option<PathBuf>, stdout: &mut dyn Write, text: &str) -> Result<(), Fail> {
    let res = match path {
        Some(p) => fs::write(p, text),
        None => stdout.write_all(text.as_bytes()),
    };
    res.map_err(|e| Fail(EXIT_USAGE, format!("write failed: {e}")))
}

fn with_newline(mut s: String) -> String {
    if !s.ends_with('\n') {
        s.push('\n');
    }
    s
}

fn pretty(v: &serde_json::Value) -> String {
    with_newline(serde_json::to_string_pretty(v).expect("plain data serializes"))
}

fn tree_record(t: &crate::tree::EquivariantTree) -> serde_json::Value {
    serde_json::to_value(doc::TreeDoc::from_tree(t)).expect("plain data serializes")
}

/// Negative answer from the realization layer, as a record and a status.
fn realize_failure(e: RealizeError) -> (serde_json::Value, i32) {
    let v = match &e {
        RealizeError::ConditionsFailed(r) => {
            json!({"result": "rejected", "rejection": r, "reason": r.to_string()})
        }
        RealizeError::BudgetExhausted { explored } => {
            json!({"result": "budget_exhausted", "explored": explored, "complete": false})
        }
        other => json!({"result": "failed", "reason": other.to_string()}),
    };
    (v, EXIT_NEGATIVE)
}

fn dispatch(cmd: Command, stdin: &mut dyn Read, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32, Fail> {
    match cmd {
        Command::Validate { io } => {
            let t = doc::parse_tree(&read_input(&io.input, stdin)?)?;
            let (v, code) = match validate_tree(&t) {
                Ok(v) => {
                    let flags: Vec<&str> = if v.is_bare_s4() { vec!["bare_s4"] } else { vec![] };
                    (json!({"valid": true, "violations": [], "flags": flags}), EXIT_OK)
                }
                Err(violations) => (json!({"valid": false, "violations": violations, "flags": []}), EXIT_NEGATIVE),
            };
            write_output(&io.output, stdout, &pretty(&v))?;
            Ok(code)
        }
        Command::Analyze { io, format } => {
            let t = doc::parse_tree(&read_input(&io.input, stdin)?)?;
            let r = report::analyze(&t);
            let text = match format {
                Format::Json => with_newline(r.to_json()),
                Format::Text => r.to_text(),
                Format::Dot => dot::to_dot(&t),
            };
            write_output(&io.output, stdout, &text)?;
            Ok(if r.valid { EXIT_OK } else { EXIT_NEGATIVE })
        }
        Command::Realize { io } => {
            let spec = doc::parse_module_spec(&read_input(&io.input, stdin)?)?;
            let (v, code) = match realize_stable(&spec) {
                Ok(t) => (json!({"result": "found", "module": spec.notation(), "tree": tree_record(&t)}), EXIT_OK),
                Err(e) => realize_failure(e),
            };
            write_output(&io.output, stdout, &pretty(&v))?;
            Ok(code)
        }
        Command::SearchModule { io, budget } => {
            let spec = doc::parse_module_spec(&read_input(&io.input, stdin)?)?;
            let (v, code) = match search_module(&spec, budget.get()) {
                Ok(SearchOutcome::Found(t)) => {
                    (json!({"result": "found", "module": spec.notation(), "tree": tree_record(&t)}), EXIT_OK)
                }
                Ok(SearchOutcome::Excluded(r)) => (
                    json!({"result": "excluded", "module": spec.notation(), "rejection": r, "reason": r.to_string()}),
                    EXIT_NEGATIVE,
                ),
                Ok(SearchOutcome::NoneWithin { explored }) => (
                    json!({"result": "none", "module": spec.notation(), "rank": spec.rank(), "explored": explored, "complete": true}),
                    EXIT_NEGATIVE,
                ),
                Err(e) => realize_failure(e),
            };
            write_output(&io.output, stdout, &pretty(&v))?;
            Ok(code)
        }
        Command::MinN { io, budget } => {
            let spec = doc::parse_isotropy_spec(&read_input(&io.input, stdin)?)?;
            let (v, code) = match min_n_for_isotropy(&spec, budget.get()) {
                Ok(MinN::Found { n, tree }) => (json!({"result": "found", "n": n, "tree": tree_record(&tree)}), EXIT_OK),
                Ok(MinN::NoneWithin { n_max, explored }) => {
                    (json!({"result": "none", "n_max": n_max, "explored": explored, "complete": true}), EXIT_NEGATIVE)
                }
                Err(e) => realize_failure(e),
            };
            write_output(&io.output, stdout, &pretty(&v))?;
            Ok(code)
        }
        Command::Enumerate { m, output, budget } => {
            let m = Modulus::new(m).map_err(Fail::usage)?;
            let e = enumerate_trees(m, budget.get());
            let mut text = String::new();
            for t in &e.trees {
                text.push_str(&doc::emit_tree_compact(t));
                text.push('\n');
            }
            write_output(&output, stdout, &text)?;
            if e.complete {
                Ok(EXIT_OK)
            } else {
                let _ = writeln!(stderr, "incomplete: node cap reached after {} assignments, {} trees listed", e.explored, e.trees.len());
                Ok(EXIT_NEGATIVE)
            }
        }
        Command::ExportDot { io } => {
            let t = doc::parse_tree(&read_input(&io.input, stdin)?)?;
            write_output(&io.output, stdout, &dot::to_dot(&t))?;
            Ok(EXIT_OK)
        }
    }
}

/// Run with explicit streams; `args` includes the program name.
pub fn run_with<I, T>(args: I, stdin: &mut dyn Read, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = write!(stderr, "{}", e.render());
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match dispatch(cli.command, stdin, stdout, stderr) {
        Ok(code) => code,
        Err(Fail(code, msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            code
        }
    }
}

pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    run_with(args, &mut io::stdin().lock(), &mut io::stdout().lock(), &mut io::stderr().lock())
}
