use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use lstag_core::diag::Diagnostic;
use lstag_core::engine::{self, EnumerationBudget, Grammar, Options};
use lstag_core::export;
use lstag_core::grammar_file::{GrammarDocument, GrammarKind};
use lstag_core::lstag::DerivedStructure;
use lstag_core::script::{self, Script};
use lstag_core::stag;
use lstag_core::tag;

#[derive(Parser)]
#[command(
    name = "lstag",
    version,
    about = "Validate, derive and enumerate TAG, STAG and link-sharing TAG grammars"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
    Dot,
}

#[derive(Subcommand)]
enum Command {
    /// Check a grammar file and report every diagnostic.
    Validate {
        grammar: PathBuf,
        /// Print diagnostics as JSON lines.
        #[arg(long)]
        json: bool,
        /// Skip the contiguity restrictions.
        #[arg(long)]
        no_restrictions: bool,
    },
    /// Replay a derivation script and print the result.
    Derive {
        grammar: PathBuf,
        script: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        #[arg(long)]
        no_restrictions: bool,
    },
    /// List every derivation within an operation budget.
    Enumerate {
        grammar: PathBuf,
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        max_ops: u64,
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..), default_value_t = EnumerationBudget::DEFAULT_MAX_STRUCTURES as u64)]
        max_structures: u64,
        /// Print only the distinct yields of complete derivations.
        #[arg(long)]
        strings_only: bool,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        #[arg(long)]
        no_restrictions: bool,
    },
    /// Print a grammar in canonical text, JSON or DOT form.
    Export {
        grammar: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
}

/// Failure with its exit status: 1 for validation, 2 for usage or parse.
struct Failure {
    status: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure {
            status: 2,
            message: message.into(),
        }
    }

    fn invalid(message: impl Into<String>) -> Self {
        Failure {
            status: 1,
            message: message.into(),
        }
    }
}

struct Style {
    color: bool,
}

impl Style {
    fn from_env() -> Self {
        Style {
            color: std::env::var("LSTAG_COLOR").is_ok_and(|v| v == "1"),
        }
    }

    fn paint(&self, code: &str, s: &str) -> String {
        if self.color {
            format!("\x1b[{code}m{s}\x1b[0m")
        } else {
            s.to_string()
        }
    }

    fn diagnostic(&self, d: &Diagnostic) -> String {
        format!(
            "{} at {}: {}",
            self.paint("31", &d.kind.to_string()),
            d.location,
            d.message
        )
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
}

fn load(path: &Path) -> Result<GrammarDocument, Failure> {
    GrammarDocument::parse(&read(path)?).map_err(|e| Failure::usage(format!("{}:{e}", path.display())))
}

/// Loads a grammar and refuses it if it has diagnostics.
fn load_valid(path: &Path, restrictions: bool, style: &Style) -> Result<GrammarDocument, Failure> {
    let doc = load(path)?;
    let diags = doc.diagnostics(restrictions);
    if diags.is_empty() {
        Ok(doc)
    } else {
        let lines: Vec<String> = diags.iter().map(|d| style.diagnostic(d)).collect();
        Err(Failure::invalid(lines.join("\n")))
    }
}

fn validate(path: &Path, json: bool, restrictions: bool, style: &Style) -> Result<String, Failure> {
    let doc = load(path)?;
    let diags = doc.diagnostics(restrictions);
    if diags.is_empty() {
        return Ok(format!("{} {} entries\n", style.paint("32", "ok:"), doc.entries.len()));
    }
    let lines: Vec<String> = diags
        .iter()
        .map(|d| if json { d.to_json_line() } else { style.diagnostic(d) })
        .collect();
    Err(Failure::invalid(lines.join("\n")))
}

fn render_derived(d: &DerivedStructure, format: Format) -> String {
    match format {
        Format::Text => export::derived_text(d),
        Format::Json => pretty(&export::derived_json(d)),
        Format::Dot => export::derived_dot(d),
    }
}

fn pretty(v: &serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("values serialize");
    s.push('\n');
    s
}

fn derive(
    grammar: &Path,
    script_path: &Path,
    format: Format,
    restrictions: bool,
    style: &Style,
) -> Result<String, Failure> {
    let doc = load_valid(grammar, restrictions, style)?;
    let script =
        Script::parse(&read(script_path)?).map_err(|e| Failure::usage(format!("{}:{e}", script_path.display())))?;
    let step_failure = |e: script::ScriptError| Failure::invalid(format!("{}: {e}", script_path.display()));
    match doc.kind() {
        GrammarKind::Tag => {
            let g = doc.tag_grammar();
            let d = script::tag_derivation(&script).map_err(step_failure)?;
            let diags = tag::validate_derivation(&g, &d);
            if !diags.is_empty() {
                let lines: Vec<String> = diags.iter().map(|d| style.diagnostic(d)).collect();
                return Err(Failure::invalid(lines.join("\n")));
            }
            let tree = tag::replay(&g, &d).map_err(|e| Failure::invalid(e.to_string()))?;
            Ok(match format {
                Format::Text => export::tag_text(&tree, &d),
                Format::Json => pretty(&export::tag_json(&tree, &d)),
                Format::Dot => export::tag_dot(&tree, &d),
            })
        }
        GrammarKind::Stag => {
            let g = doc.stag_grammar();
            let d = script::stag_derivation(&script).map_err(step_failure)?;
            let pair = stag::replay(&g, &d).map_err(|e| Failure::invalid(e.to_string()))?;
            let (l, r) = (d.left_projection(), d.right_projection());
            Ok(match format {
                Format::Text => export::stag_text(&pair, &l, &r),
                Format::Json => pretty(&export::stag_json(&pair, &l, &r)),
                Format::Dot => export::stag_dot(&pair, &l, &r),
            })
        }
        GrammarKind::Lstag => {
            let g = doc.lstag_grammar();
            let steps = script::run_steps(&script, &g).map_err(step_failure)?;
            Ok(render_derived(steps.last().expect("at least the start"), format))
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn enumerate(
    path: &Path,
    max_ops: u64,
    max_structures: u64,
    strings_only: bool,
    format: Format,
    restrictions: bool,
    style: &Style,
) -> Result<String, Failure> {
    // restriction violations filter pairs out rather than failing the load
    let doc = load_valid(path, false, style)?;
    let budget =
        EnumerationBudget::new(max_ops as usize, max_structures as usize).map_err(|e| Failure::usage(e.to_string()))?;
    let opts = Options {
        start: doc.start_symbol().to_string(),
        restrictions,
        ..Options::default()
    };
    let (tag_g, lstag_g);
    let grammar = match doc.kind() {
        GrammarKind::Tag => {
            tag_g = doc.tag_grammar();
            Grammar::Tag(&tag_g)
        }
        GrammarKind::Lstag => {
            lstag_g = doc.lstag_grammar();
            Grammar::Lstag(&lstag_g)
        }
        GrammarKind::Stag => return Err(Failure::usage("enumerate works on tree and lspair grammars")),
    };
    if strings_only {
        let lang = engine::language_sample(grammar, budget, &opts);
        return Ok(match format {
            Format::Json => pretty(&json!(lang)),
            _ => lang.iter().map(|s| format!("{s}\n")).collect(),
        });
    }
    let e = engine::enumerate(grammar, budget, &opts);
    if e.truncated {
        eprintln!("warning: stopped after {max_structures} structures; the listing is incomplete");
    }
    Ok(match format {
        Format::Json => {
            let rows: Vec<_> = e
                .results
                .iter()
                .map(|r| {
                    json!({
                        "yield": r.left_yield,
                        "complete": r.is_complete(),
                        "operations": r.operations(),
                        "key": r.key,
                        "history": r.history,
                        "right": r.right.as_ref().map(|d| d.tangled_text()),
                    })
                })
                .collect();
            pretty(&json!({ "truncated": e.truncated, "results": rows }))
        }
        _ => e
            .results
            .iter()
            .map(|r| {
                let mark = if r.is_complete() { "" } else { " (partial)" };
                let mut line = format!(
                    "{}{mark}\t{} ops\t{}",
                    r.left_yield,
                    r.operations(),
                    r.key.split('|').next().unwrap_or_default()
                );
                if let Some(d) = &r.right {
                    line.push('\t');
                    line.push_str(&d.tangled_text());
                }
                line.push('\n');
                line
            })
            .collect(),
    })
}

fn export_grammar(path: &Path, format: Format) -> Result<String, Failure> {
    let doc = load(path)?;
    Ok(match format {
        Format::Text => doc.to_string(),
        Format::Json => format!("{}\n", doc.to_json()),
        Format::Dot => export::grammar_dot(&doc),
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let style = Style::from_env();
    let result = match cli.command {
        Command::Validate {
            grammar,
            json,
            no_restrictions,
        } => validate(&grammar, json, !no_restrictions, &style),
        Command::Derive {
            grammar,
            script,
            format,
            no_restrictions,
        } => derive(&grammar, &script, format, !no_restrictions, &style),
        Command::Enumerate {
            grammar,
            max_ops,
            max_structures,
            strings_only,
            format,
            no_restrictions,
        } => enumerate(
            &grammar,
            max_ops,
            max_structures,
            strings_only,
            format,
            !no_restrictions,
            &style,
        ),
        Command::Export { grammar, format } => export_grammar(&grammar, format),
    };
    match result {
        Ok(out) => {
            let mut stdout = io::stdout().lock();
            if stdout.write_all(out.as_bytes()).is_err() {
                return ExitCode::from(2);
            }
            ExitCode::SUCCESS
        }
        Err(f) => {
            eprintln!("{}", f.message);
            ExitCode::from(f.status)
        }
    }
}
