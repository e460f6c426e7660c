//! Conditional query answering, benchmarks and the command line driver.

pub mod app;
pub mod bench;
pub mod corpus;

use std::collections::BTreeSet;

use crate::builtins::eval_atom;
use crate::error::{Error, Result};
use crate::ground::{
    ground_analyzed, ground_negations, intern_query_literal, matchers, simplify, GroundOptions,
    GroundProgram, GroundRule, Lit,
};
use crate::infer::{make_disjoint_with, ve_with, DisjointOptions, VeOptions};
use crate::semantics::{oracle_success_probability, OracleOptions};
use crate::stratify::{check_sbtp, Analysis, TimedStratum};
use crate::syntax::{
    Atom, Body, ConditionalQuery, Literal, Program, Sign, Substitute, Substitution, Term,
};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct QueryOptions {
    /// End of time; defaults to the largest ground time in the query.
    pub eot: Option<i64>,
    pub ground: GroundOptions,
    pub ve: VeOptions,
    pub disjoint: DisjointOptions,
    /// Compute probabilities by choice enumeration instead of VE.
    pub oracle: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Answer {
    pub subst: Substitution,
    pub probability: f64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Stats {
    /// Largest ground program over all stages, rules plus probabilistic facts.
    pub ground_rules: usize,
    pub groundings: usize,
    pub expansions: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AnswerSet {
    /// Answers ordered by substitution, including those with probability 0.
    pub answers: Vec<Answer>,
    pub evidence_prob: f64,
    pub eot: i64,
    pub stats: Stats,
}

fn positive(atom: Atom) -> Literal {
    Literal {
        sign: Sign::Positive,
        atom,
    }
}

/// Ground literals of a body plus the evidence.
fn ground_literals(body: &Body, evidence: &[Atom]) -> Vec<Literal> {
    let mut out: Vec<Literal> = body
        .pos
        .iter()
        .filter(|a| !a.is_interpreted() && a.is_ground())
        .cloned()
        .map(positive)
        .collect();
    for e in &body.neg {
        if e.len() == 1 && !e[0].is_interpreted() && e[0].is_ground() {
            out.push(Literal {
                sign: Sign::Negative,
                atom: e[0].clone(),
            });
        }
    }
    out.extend(evidence.iter().cloned().map(positive));
    out
}

/// A query whose positive part is ground, split into literals and the
/// remaining negative elements.
struct Goal {
    lits: Vec<Literal>,
    elements: Vec<Vec<Atom>>,
    holds: bool,
}

fn goal(body: &Body, evidence: &[Atom]) -> Result<Goal> {
    let mut g = Goal {
        lits: Vec::new(),
        elements: Vec::new(),
        holds: true,
    };
    for a in &body.pos {
        if !a.is_ground() {
            return Err(Error::NonGroundQuery(a.to_string()));
        }
        if a.is_interpreted() {
            g.holds &= eval_atom(a)?;
        } else {
            g.lits.push(positive(a.clone()));
        }
    }
    for e in &body.neg {
        if e.len() == 1 && !e[0].is_interpreted() && e[0].is_ground() {
            g.lits.push(Literal {
                sign: Sign::Negative,
                atom: e[0].clone(),
            });
        } else {
            g.elements.push(e.clone());
        }
    }
    g.lits.extend(evidence.iter().cloned().map(positive));
    Ok(g)
}

struct Pipeline<'a> {
    program: &'a Program,
    analysis: Analysis,
    eot: i64,
    opts: QueryOptions,
    stats: Stats,
}

impl Pipeline<'_> {
    fn ground(&mut self, lits: &[Literal]) -> Result<GroundProgram> {
        let g = ground_analyzed(
            self.program,
            &self.analysis,
            lits,
            self.eot,
            self.opts.ground,
        )?;
        self.stats.groundings += 1;
        self.stats.ground_rules = self.stats.ground_rules.max(g.rule_count());
        Ok(g)
    }

    /// `P(goal)`, grounding with the goal's literals as the query.
    fn probability(&mut self, goal: &Goal) -> Result<f64> {
        if !goal.holds {
            return Ok(0.0);
        }
        if goal.lits.is_empty() && goal.elements.is_empty() {
            return Ok(1.0);
        }
        let mut g = self.ground(&goal.lits)?;
        let mut lits: Vec<Lit> = Vec::with_capacity(goal.lits.len());
        for l in &goal.lits {
            lits.push(intern_query_literal(&mut g.atoms, &g.strata, l)?);
        }
        let query = if goal.elements.is_empty() {
            lits
        } else {
            // `$query` holds iff the literals and one explanation of the
            // negative elements over the final domain hold.
            let alts = ground_negations(&goal.elements, &mut g.atoms, &g.strata, &g.domain, None)?;
            let top = TimedStratum {
                time: i64::MAX,
                stratum: g.strata.len() + 1,
            };
            let head = g
                .atoms
                .intern(Atom::ord("$query", Vec::new(), Term::Int(self.eot)), top);
            for n in alts {
                let mut body = lits.clone();
                body.extend(n);
                if let Some(body) = simplify(body) {
                    g.rules.push(GroundRule { head, body });
                }
            }
            vec![Lit::pos(head)]
        };
        if self.opts.oracle {
            return oracle_success_probability(&g, &query, OracleOptions::default());
        }
        let pd = make_disjoint_with(&g, self.opts.disjoint)?;
        let out = ve_with(&pd, &query, self.opts.ve)?;
        self.stats.expansions += out.expansions;
        Ok(out.probability)
    }
}

/// Answer substitutions for `q.body` with their conditional probabilities
/// given `q.evidence`.
pub fn answer_conditional_query(
    p: &Program,
    q: &ConditionalQuery,
    opts: QueryOptions,
) -> Result<AnswerSet> {
    let analysis = check_sbtp(p)?;
    let eot = opts.eot.unwrap_or_else(|| q.max_ground_time());
    let mut pl = Pipeline {
        program: p,
        analysis,
        eot,
        opts,
        stats: Stats::default(),
    };

    let evidence_prob = if q.evidence.is_empty() {
        1.0
    } else {
        pl.probability(&goal(&Body::default(), &q.evidence)?)?
    };
    if evidence_prob <= 0.0 {
        return Err(Error::EvidenceZero);
    }

    let vars: BTreeSet<_> = q.body.positive_vars();
    let substs: Vec<Substitution> = if vars.is_empty() {
        vec![Substitution::new()]
    } else {
        let g = pl.ground(&ground_literals(&q.body, &q.evidence))?;
        let named: BTreeSet<_> = vars
            .iter()
            .filter(|v| !v.starts_with('_'))
            .cloned()
            .collect();
        let mut seen: BTreeSet<Substitution> = BTreeSet::new();
        let mut out = Vec::new();
        for s in matchers(&q.body.pos, &g.atoms, &g.domain)? {
            let s = s.restrict(&vars);
            if seen.insert(s.clone()) {
                out.push(s);
            }
        }
        out.sort_by_key(|s| s.restrict(&named).to_string());
        out
    };

    let named: BTreeSet<_> = vars
        .iter()
        .filter(|v| !v.starts_with('_'))
        .cloned()
        .collect();
    let mut answers = Vec::with_capacity(substs.len());
    for s in substs {
        let body = q.body.apply(&s);
        let joint = pl.probability(&goal(&body, &q.evidence)?)?;
        answers.push(Answer {
            subst: s.restrict(&named),
            probability: (joint / evidence_prob).clamp(0.0, 1.0),
        });
    }
    Ok(AnswerSet {
        answers,
        evidence_prob,
        eot,
        stats: pl.stats,
    })
}

/// A probability with 15 significant digits.
pub fn format_prob(p: f64) -> String {
    if p == 0.0 || !p.is_finite() {
        return format!("{p}");
    }
    let digits = (14 - p.abs().log10().floor() as i64).max(0) as usize;
    format!("{p:.digits$}")
}
