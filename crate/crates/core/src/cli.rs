//! Command-line front end.
//!
//! Every subcommand writes its result to stdout (JSON by default) and exits
//! 0 whatever the verdict. Failures go to stderr with these exit codes:
//!
//! | code | meaning |
//! |------|---------|
//! | 1 | unreadable input, malformed JSON, schema or usage error |
//! | 2 | unsupported feature, or obligations under `--strict` |
//! | 3 | oracle domain too large |
//! | 4 | internal invariant violated |

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::Value as Json;

use crate::compare::{
    compare_policies, compare_rules_with, policy_value_index, rewrite_drop_permissions,
    rewrite_drop_prohibitions, CompareOptions, DEFAULT_WITNESS_CAP,
};
use crate::error::{Error, Result};
use crate::ingest::odrl::import_odrl_subset;
use crate::ingest::{
    check_value_set, parse_policy, parse_value_set, parse_world, policy_to_json, render,
};
use crate::intervals::{decompose, ValueIndex};
use crate::model::{validate_world, DefaultSemantics, Policy, Rule, Schema};
use crate::oracle::{cross_check_policies, cross_check_rules, DEFAULT_DOMAIN_CAP};
use crate::report;

#[derive(Parser, Debug)]
#[command(
    name = "odrl-normalize",
    version,
    about = "Normalise ODRL-style policies into disjoint simple rules and compare them"
)]
struct Cli {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    format: Format,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Drop {
    Prohibitions,
    Permissions,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum DefaultArg {
    Prohibit,
    Permit,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Decompose the permissions and prohibitions of a policy into simple rules.
    Normalize {
        policy: PathBuf,
        /// Value set to split against, merged with the policy's own operands.
        #[arg(long)]
        values: Option<PathBuf>,
    },
    /// Decompose a policy's rules against the operands of both policies.
    Split {
        policy: PathBuf,
        #[arg(long)]
        against: PathBuf,
    },
    /// Compare two policies, or one rule from each.
    Compare {
        a: PathBuf,
        b: PathBuf,
        /// Labels of the rules to compare instead of whole policies.
        #[arg(long, num_args = 2, value_names = ["LEFT", "RIGHT"])]
        rules: Option<Vec<String>>,
        /// Fail when either policy has obligations.
        #[arg(long)]
        strict: bool,
        /// Maximum number of witness cells listed per category.
        #[arg(long, default_value_t = DEFAULT_WITNESS_CAP)]
        witness_cap: usize,
    },
    /// Rewrite a policy so it contains only permissions or only prohibitions.
    Rewrite {
        policy: PathBuf,
        #[arg(long, value_enum)]
        drop: Drop,
    },
    /// Check a world of events against a policy.
    Validate {
        policy: PathBuf,
        world: PathBuf,
        /// Treatment of events no rule mentions.
        #[arg(long, value_enum, default_value_t = DefaultArg::Prohibit)]
        default: DefaultArg,
    },
    /// Cross-check the cell comparison against brute-force enumeration.
    Check {
        a: PathBuf,
        b: PathBuf,
        #[arg(long, num_args = 2, value_names = ["LEFT", "RIGHT"])]
        rules: Option<Vec<String>>,
        /// Largest number of events to enumerate.
        #[arg(long, default_value_t = DEFAULT_DOMAIN_CAP)]
        cap: u64,
    },
    /// Convert an ODRL JSON-LD policy in the supported subset to the native format.
    Import { policy: PathBuf },
}

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Parse { .. }
        | Error::Schema(_)
        | Error::TypeMismatch { .. }
        | Error::InvalidInput(_) => 1,
        Error::UnsupportedFeature { .. } | Error::ObligationsUnsupported => 2,
        Error::DomainTooLarge { .. } => 3,
        Error::Invariant(_) => 4,
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path)
        .map_err(|e| Error::InvalidInput(format!("cannot read {}: {e}", path.display())))
}

fn load_policy(path: &Path) -> Result<Policy> {
    parse_policy(&read(path)?)
}

fn merged_schema(a: &Schema, b: &Schema) -> Result<Schema> {
    let mut out = a.clone();
    for (attr, &kind) in b {
        match out.insert(attr.clone(), kind) {
            Some(k) if k != kind => {
                return Err(Error::Schema(format!(
                    "attribute `{attr}` is {} in one policy and {} in the other",
                    k.as_str(),
                    kind.as_str()
                )))
            }
            _ => {}
        }
    }
    Ok(out)
}

fn find_rule<'a>(policy: &'a Policy, label: &str, path: &Path) -> Result<&'a Rule> {
    policy.rule_by_label(label).ok_or_else(|| {
        Error::InvalidInput(format!("no rule labelled `{label}` in {}", path.display()))
    })
}

struct Output {
    json: Json,
    text: String,
}

fn decompositions(policy: &Policy, index: &ValueIndex) -> Output {
    let items = report::decompose_policy(policy, |r| decompose(r, index));
    Output {
        json: report::decompositions_to_json(&items),
        text: report::decompositions_to_text(&items),
    }
}

fn policy_text(policy: &Policy) -> String {
    let mut out = String::new();
    for (name, rules) in [
        ("permission", &policy.permissions),
        ("prohibition", &policy.prohibitions),
        ("obligation", &policy.obligations),
    ] {
        for r in rules {
            let body = r
                .constraints
                .iter()
                .map(ToString::to_string)
                .collect::<Vec<_>>()
                .join(" ∧ ");
            let body = if body.is_empty() {
                "⊤".to_string()
            } else {
                body
            };
            out.push_str(&format!("{name}: {body}\n"));
        }
    }
    out
}

fn execute(command: Command, err: &mut dyn Write) -> Result<(Output, i32)> {
    let output = match command {
        Command::Normalize { policy, values } => {
            let p = load_policy(&policy)?;
            let index = match values {
                None => ValueIndex::new(),
                Some(path) => {
                    let mut v = parse_value_set(&read(&path)?)?;
                    check_value_set(&p.schema, &v)?;
                    v.merge(&policy_value_index(&p));
                    v
                }
            };
            decompositions(&p, &index)
        }
        Command::Split { policy, against } => {
            let p = load_policy(&policy)?;
            let q = load_policy(&against)?;
            merged_schema(&p.schema, &q.schema)?;
            let mut index = policy_value_index(&p);
            index.merge(&policy_value_index(&q));
            decompositions(&p, &index)
        }
        Command::Compare {
            a,
            b,
            rules,
            strict,
            witness_cap,
        } => {
            let (pa, pb) = (load_policy(&a)?, load_policy(&b)?);
            merged_schema(&pa.schema, &pb.schema)?;
            let options = CompareOptions {
                witness_cap,
                strict_obligations: strict,
            };
            let r = match rules.as_deref() {
                Some([la, lb]) => {
                    compare_rules_with(find_rule(&pa, la, &a)?, find_rule(&pb, lb, &b)?, &options)
                }
                _ => compare_policies(&pa, &pb, &options)?,
            };
            Output {
                json: report::comparison_to_json(&r),
                text: report::comparison_to_text(&r),
            }
        }
        Command::Rewrite { policy, drop } => {
            let p = load_policy(&policy)?;
            let rewritten = match drop {
                Drop::Prohibitions => rewrite_drop_prohibitions(&p),
                Drop::Permissions => rewrite_drop_permissions(&p),
            };
            Output {
                json: policy_to_json(&rewritten),
                text: policy_text(&rewritten),
            }
        }
        Command::Validate {
            policy,
            world,
            default,
        } => {
            let p = load_policy(&policy)?;
            let w = parse_world(&read(&world)?)?;
            let index = policy_value_index(&p);
            for (i, e) in w.events.iter().enumerate() {
                for attr in index.attributes() {
                    if e.get(attr).is_none() {
                        let _ = writeln!(
                            err,
                            "warning: event {i} has no value for `{attr}`; conditions on it evaluate to false"
                        );
                    }
                }
            }
            let semantics = match default {
                DefaultArg::Prohibit => DefaultSemantics::Prohibit,
                DefaultArg::Permit => DefaultSemantics::Permit,
            };
            let r = validate_world(&p, &w, semantics)?;
            Output {
                json: report::validity_to_json(&r),
                text: report::validity_to_text(&r),
            }
        }
        Command::Check { a, b, rules, cap } => {
            let (pa, pb) = (load_policy(&a)?, load_policy(&b)?);
            merged_schema(&pa.schema, &pb.schema)?;
            let check = match rules.as_deref() {
                Some([la, lb]) => {
                    cross_check_rules(find_rule(&pa, la, &a)?, find_rule(&pb, lb, &b)?, cap)?
                }
                _ => cross_check_policies(&pa, &pb, cap)?,
            };
            let code = if check.agree { 0 } else { 4 };
            if !check.agree {
                let _ = writeln!(err, "error: cell comparison disagrees with enumeration");
            }
            return Ok((
                Output {
                    json: report::cross_check_to_json(&check),
                    text: report::cross_check_to_text(&check),
                },
                code,
            ));
        }
        Command::Import { policy } => {
            let p = import_odrl_subset(&read(&policy)?)?;
            Output {
                json: policy_to_json(&p),
                text: policy_text(&p),
            }
        }
    };
    Ok((output, 0))
}

/// Runs the CLI on `args` (including the program name) and returns the exit
/// code.
pub fn run_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let rendered = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(err, "{rendered}");
                1
            } else {
                let _ = write!(out, "{rendered}");
                0
            };
        }
    };
    match execute(cli.command, err) {
        Ok((output, code)) => {
            let text = match cli.format {
                Format::Json => render(&output.json),
                Format::Text => output.text,
            };
            let _ = out.write_all(text.as_bytes());
            code
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

pub fn run() -> i32 {
    run_with(
        std::env::args_os(),
        &mut std::io::stdout(),
        &mut std::io::stderr(),
    )
}
