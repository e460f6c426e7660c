//! The `plp` command line.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use super::bench::{run_benchmark, Family};
use super::{answer_conditional_query, format_prob, QueryOptions};
use crate::error::{Error, Result};
use crate::ground::{ground_analyzed, GroundOptions};
use crate::infer::{DisjointOptions, VeOptions};
use crate::stratify::check_sbtp;
use crate::syntax::{parse_program, parse_query, Literal, Program};

#[derive(Parser, Debug)]
#[command(
    name = "plp",
    version,
    about = "Exact inference for timed probabilistic logic programs"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Debug, Clone, Copy)]
struct Tuning {
    /// Ground without query guidance.
    #[arg(long)]
    unguided: bool,
    /// Disable inconsistency pruning in variable elimination.
    #[arg(long)]
    no_ip: bool,
    /// Disable the variable elimination cache.
    #[arg(long)]
    no_cache: bool,
    /// Keep introduced head atoms when making rule bodies exclusive.
    #[arg(long)]
    no_unfold: bool,
    /// Exclude only consistent earlier rule bodies when making rule bodies
    /// exclusive.
    #[arg(long)]
    refine: bool,
}

impl Tuning {
    fn options(self, eot: Option<i64>, oracle: bool) -> QueryOptions {
        QueryOptions {
            eot,
            ground: if self.unguided {
                GroundOptions::unguided()
            } else {
                GroundOptions::default()
            },
            ve: VeOptions {
                cache: !self.no_cache,
                pruning: !self.no_ip,
                tie_seed: None,
            },
            disjoint: DisjointOptions {
                unfold: !self.no_unfold,
                refine: self.refine,
            },
            oracle,
        }
    }
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Check that a program is stratified by time and predicates.
    Check { file: PathBuf },
    /// Print the grounding of a program.
    Ground {
        file: PathBuf,
        /// Ground literals `?- l1, ..., ln | e1, ...` guiding the grounding.
        #[arg(long)]
        query: Option<String>,
        #[arg(long)]
        eot: Option<i64>,
        #[arg(long)]
        unguided: bool,
        /// Print the normal program instead of the rule instances.
        #[arg(long)]
        normal: bool,
        #[arg(long)]
        stats: bool,
    },
    /// Answer a conditional query `?- B | E`.
    Query {
        file: PathBuf,
        #[arg(long = "q", short = 'q')]
        q: String,
        #[arg(long)]
        eot: Option<i64>,
        /// Use choice enumeration instead of variable elimination.
        #[arg(long)]
        oracle: bool,
        #[command(flatten)]
        tuning: Tuning,
        #[arg(long)]
        json: bool,
        /// Also print answers with probability 0.
        #[arg(long)]
        all: bool,
        #[arg(long)]
        stats: bool,
    },
    /// Run a scaled benchmark query over a corpus program.
    Bench {
        /// markov, hmm or urn.
        family: Family,
        #[arg(long)]
        n: usize,
        /// Defaults to the first scenario of the family.
        #[arg(long)]
        scenario: Option<String>,
        #[command(flatten)]
        tuning: Tuning,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Serialize)]
struct JsonAnswer {
    bindings: BTreeMap<String, String>,
    prob: f64,
}

#[derive(Serialize)]
struct JsonAnswers {
    answers: Vec<JsonAnswer>,
    evidence_prob: f64,
}

fn read(path: &Path) -> Result<Program> {
    let text =
        std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_program(&text)
}

fn io(e: std::io::Error) -> Error {
    Error::Io(e.to_string())
}

fn exec(cmd: Cmd, out: &mut dyn Write) -> Result<()> {
    match cmd {
        Cmd::Check { file } => {
            let p = read(&file)?;
            let a = check_sbtp(&p)?;
            write!(out, "{}", a.report(&p)).map_err(io)?;
        }
        Cmd::Ground {
            file,
            query,
            eot,
            unguided,
            normal,
            stats,
        } => {
            let p = read(&file)?;
            let (lits, qeot): (Vec<Literal>, i64) = match &query {
                Some(q) => {
                    let q = parse_query(q)?;
                    let mut lits = q.body.literals();
                    lits.extend(q.evidence.iter().cloned().map(|atom| Literal {
                        sign: crate::syntax::Sign::Positive,
                        atom,
                    }));
                    if let Some(l) = lits.iter().find(|l| !l.atom.is_ground()) {
                        return Err(Error::NonGroundQuery(l.atom.to_string()));
                    }
                    (lits, q.max_ground_time())
                }
                None => (Vec::new(), 0),
            };
            let opts = if unguided {
                GroundOptions::unguided()
            } else {
                GroundOptions::default()
            };
            let a = check_sbtp(&p)?;
            let g = ground_analyzed(&p, &a, &lits, eot.unwrap_or(qeot), opts)?;
            let text = if normal {
                g.normal_text()
            } else {
                g.instances_text()
            };
            write!(out, "{text}").map_err(io)?;
            if stats {
                writeln!(
                    out,
                    "% rules: {}, probabilistic facts: {}, atoms: {}, domain: {}",
                    g.rules.len(),
                    g.facts.len(),
                    g.atoms.len(),
                    g.domain.len()
                )
                .map_err(io)?;
            }
            if g.unsatisfiable {
                writeln!(out, "% the regressed query is inconsistent").map_err(io)?;
            }
        }
        Cmd::Query {
            file,
            q,
            eot,
            oracle,
            tuning,
            json,
            all,
            stats,
        } => {
            let p = read(&file)?;
            let q = parse_query(&q)?;
            let a = answer_conditional_query(&p, &q, tuning.options(eot, oracle))?;
            let shown: Vec<_> = a
                .answers
                .iter()
                .filter(|x| all || x.probability > 0.0)
                .collect();
            if json {
                let j = JsonAnswers {
                    answers: shown
                        .iter()
                        .map(|x| JsonAnswer {
                            bindings: x
                                .subst
                                .iter()
                                .map(|(k, v)| (k.to_string(), v.to_string()))
                                .collect(),
                            prob: x.probability,
                        })
                        .collect(),
                    evidence_prob: a.evidence_prob,
                };
                writeln!(
                    out,
                    "{}",
                    serde_json::to_string(&j).map_err(|e| Error::Internal(e.to_string()))?
                )
                .map_err(io)?;
            } else {
                for x in &shown {
                    writeln!(out, "{}  P={}", x.subst, format_prob(x.probability)).map_err(io)?;
                }
                if !q.evidence.is_empty() {
                    writeln!(out, "% evidence P={}", format_prob(a.evidence_prob)).map_err(io)?;
                }
            }
            if stats {
                writeln!(
                    out,
                    "% eot: {}, groundings: {}, ground rules: {}, expansions: {}",
                    a.eot, a.stats.groundings, a.stats.ground_rules, a.stats.expansions
                )
                .map_err(io)?;
            }
        }
        Cmd::Bench {
            family,
            n,
            scenario,
            tuning,
            json,
        } => {
            let scenario = scenario.unwrap_or_else(|| family.scenarios()[0].to_string());
            let r = run_benchmark(family, &scenario, n, tuning.options(None, false))?;
            if json {
                writeln!(
                    out,
                    "{}",
                    serde_json::to_string(&r).map_err(|e| Error::Internal(e.to_string()))?
                )
                .map_err(io)?;
            } else {
                writeln!(out, "{}", r.query).map_err(io)?;
                for x in &r.answers {
                    writeln!(out, "{}  P={}", x.bindings, format_prob(x.prob)).map_err(io)?;
                }
                writeln!(
                    out,
                    "% ground rules: {}, expansions: {}, time: {:.3} ms",
                    r.ground_rule_count, r.expansions, r.wall_time_ms
                )
                .map_err(io)?;
            }
        }
    }
    Ok(())
}

/// Run the command line with `args` (including the program name) and
/// return the exit code: 0 on success, 1 on user errors, 2 on internal
/// failures.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 {
                write!(out, "{text}")
            } else {
                write!(err, "{text}")
            };
            return code;
        }
    };
    match exec(cli.cmd, out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            if e.is_internal() {
                2
            } else {
                1
            }
        }
    }
}
