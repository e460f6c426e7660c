//! Scaled benchmark queries over the corpus programs.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde::Serialize;

use super::{answer_conditional_query, corpus, QueryOptions};
use crate::error::{Error, Result};
use crate::syntax::{parse_program, parse_query};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Markov,
    Hmm,
    Urn,
}

impl Family {
    pub fn program(self) -> &'static str {
        match self {
            Family::Markov => corpus::MARKOV,
            Family::Hmm => corpus::HMM,
            Family::Urn => corpus::URN,
        }
    }

    pub fn scenarios(self) -> &'static [&'static str] {
        match self {
            Family::Markov => &["timesteps", "specificity", "timepoint"],
            Family::Hmm => &["sunny", "rainy", "mixed", "relaxed"],
            Family::Urn => &["draws"],
        }
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "markov" => Ok(Family::Markov),
            "hmm" => Ok(Family::Hmm),
            "urn" => Ok(Family::Urn),
            _ => Err(Error::Query(format!(
                "unknown benchmark family `{s}` (expected markov, hmm or urn)"
            ))),
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::Markov => "markov",
            Family::Hmm => "hmm",
            Family::Urn => "urn",
        })
    }
}

/// Observations of the mixed weather scenario: 0, then alternately +4 and +20.
fn mixed_obs(n: usize) -> Vec<i64> {
    let mut v = vec![0];
    while v.len() < n {
        let step = if v.len() % 2 == 1 { 4 } else { 20 };
        v.push(v[v.len() - 1] + step);
    }
    v
}

fn conj(parts: &[String]) -> String {
    parts.join(", ")
}

/// The query text of a scenario at size `n`.
pub fn bench_query(family: Family, scenario: &str, n: usize) -> Result<String> {
    if n == 0 {
        return Err(Error::Query("benchmark size must be at least 1".into()));
    }
    let q = match (family, scenario) {
        (Family::Markov, "timesteps") => {
            conj(&(0..=n).map(|t| format!("in=a@{t}")).collect::<Vec<_>>())
        }
        (Family::Markov, "specificity") => {
            let vary = n.min(8);
            conj(
                &(0..=8)
                    .map(|t| {
                        if t + vary > 8 {
                            format!("in=L{t}@{t}")
                        } else {
                            format!("in=a@{t}")
                        }
                    })
                    .collect::<Vec<_>>(),
            )
        }
        (Family::Markov, "timepoint") => format!("in=a@{n}"),
        (Family::Hmm, s) => {
            let obs: Vec<(usize, i64)> = match s {
                "sunny" => (1..=n).map(|t| (t, 0)).collect(),
                "rainy" => (1..=n).map(|t| (t, 4 * t as i64)).collect(),
                "mixed" => (1..=n).zip(mixed_obs(n)).collect(),
                "relaxed" => (1..n.saturating_sub(1))
                    .map(|t| (t, 0))
                    .chain([(n, 10)])
                    .collect(),
                _ => return Err(unknown(family, scenario)),
            };
            let ev = conj(
                &obs.iter()
                    .map(|(t, v)| format!("obs={v}@{t}"))
                    .collect::<Vec<_>>(),
            );
            format!("state=X@{n} | {ev}")
        }
        (Family::Urn, "draws") => {
            let b = conj(
                &(1..=n)
                    .map(|t| format!("some(C{t})@{t}"))
                    .collect::<Vec<_>>(),
            );
            format!("{b} | some(red)@0")
        }
        _ => return Err(unknown(family, scenario)),
    };
    Ok(format!("?- {q}."))
}

fn unknown(family: Family, scenario: &str) -> Error {
    Error::Query(format!(
        "unknown scenario `{scenario}` for {family} (expected one of {})",
        family.scenarios().join(", ")
    ))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BenchAnswer {
    pub bindings: String,
    pub prob: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BenchRecord {
    pub family: Family,
    pub scenario: String,
    pub n: usize,
    pub query: String,
    pub guided: bool,
    pub pruning: bool,
    pub ground_rule_count: usize,
    pub expansions: u64,
    pub wall_time_ms: f64,
    pub evidence_prob: f64,
    pub answers: Vec<BenchAnswer>,
}

/// Run one scenario at size `n`.
pub fn run_benchmark(
    family: Family,
    scenario: &str,
    n: usize,
    opts: QueryOptions,
) -> Result<BenchRecord> {
    let query = bench_query(family, scenario, n)?;
    let p = parse_program(family.program())?;
    let q = parse_query(&query)?;
    let start = Instant::now();
    let a = answer_conditional_query(&p, &q, opts)?;
    let wall_time_ms = start.elapsed().as_secs_f64() * 1e3;
    Ok(BenchRecord {
        family,
        scenario: scenario.to_string(),
        n,
        query,
        guided: opts.ground.guided,
        pruning: opts.ve.pruning,
        ground_rule_count: a.stats.ground_rules,
        expansions: a.stats.expansions,
        wall_time_ms,
        evidence_prob: a.evidence_prob,
        answers: a
            .answers
            .iter()
            .map(|x| BenchAnswer {
                bindings: x.subst.to_string(),
                prob: x.probability,
            })
            .collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn queries() {
        assert_eq!(
            bench_query(Family::Markov, "timesteps", 2).unwrap(),
            "?- in=a@0, in=a@1, in=a@2."
        );
        assert_eq!(
            bench_query(Family::Markov, "specificity", 7).unwrap(),
            "?- in=a@0, in=a@1, in=L2@2, in=L3@3, in=L4@4, in=L5@5, in=L6@6, in=L7@7, in=L8@8."
        );
        assert_eq!(
            bench_query(Family::Hmm, "mixed", 3).unwrap(),
            "?- state=X@3 | obs=0@1, obs=4@2, obs=24@3."
        );
        assert_eq!(
            bench_query(Family::Hmm, "rainy", 3).unwrap(),
            "?- state=X@3 | obs=4@1, obs=8@2, obs=12@3."
        );
        assert_eq!(
            bench_query(Family::Hmm, "relaxed", 4).unwrap(),
            "?- state=X@4 | obs=0@1, obs=0@2, obs=10@4."
        );
        assert!(bench_query(Family::Urn, "sunny", 1).is_err());
        assert!(bench_query(Family::Hmm, "sunny", 0).is_err());
    }

    #[test]
    fn markov_timesteps_closed_form() {
        let r = run_benchmark(Family::Markov, "timesteps", 3, QueryOptions::default()).unwrap();
        assert!((r.answers[0].prob - 0.9f64.powi(3) / 3.0).abs() < 1e-12);
    }

    #[test]
    fn hmm_sunny_marginals() {
        let r = run_benchmark(Family::Hmm, "sunny", 3, QueryOptions::default()).unwrap();
        let total: f64 = r.answers.iter().map(|a| a.prob).sum();
        assert!((total - 1.0).abs() < 1e-9);
    }
}
