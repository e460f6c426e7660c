//! Removal of head probabilities by introducing probabilistic case facts.

use super::atoms::{AtomId, AtomTable, Lit};
use super::body::intern_user;
use crate::builtins::{eval_ordinary_atom, eval_term, number};
use crate::error::{Error, Result};
use crate::stratify::{Stratification, TimedStratum};
use crate::syntax::{Atom, Head, Pred, Term};

const EPS: f64 = 1e-9;

/// A ground normal rule `head :- body`; an empty body is a deterministic fact.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GroundRule {
    pub head: AtomId,
    pub body: Vec<Lit>,
}

/// Evaluate all interpreted terms of a ground head.
pub fn eval_head(h: &Head) -> Result<Head> {
    Ok(match h {
        Head::Ordinary { prob, atom } => Head::Ordinary {
            prob: eval_term(prob)?,
            atom: eval_ordinary_atom(atom)?,
        },
        Head::Distribution { lhs, values, time } => Head::Distribution {
            lhs: eval_term(lhs)?,
            values: eval_term(values)?,
            time: eval_term(time)?,
        },
        Head::Sum(cases) => Head::Sum(
            cases
                .iter()
                .map(|(p, a)| Ok((eval_term(p)?, eval_ordinary_atom(a)?)))
                .collect::<Result<_>>()?,
        ),
    })
}

fn probability(p: &Term, head: &Head) -> Result<f64> {
    let x = number(p).ok_or_else(|| Error::HeadProbability {
        rule: head.to_string(),
        reason: format!("`{p}` is not a number"),
    })?;
    if !(-EPS..=1.0 + EPS).contains(&x) {
        return Err(Error::HeadProbability {
            rule: head.to_string(),
            reason: format!("{x} is not in [0, 1]"),
        });
    }
    Ok(x.clamp(0.0, 1.0))
}

/// The cases `(pr_i, a_i)` of an evaluated head. Distributions become
/// equations over their value list, uniform unless every value is a pair
/// `[v, w]` with a weight `w` in [0, 1] and the weights sum to at most 1.
pub fn head_cases(head: &Head) -> Result<Vec<(f64, Atom)>> {
    let cases = match head {
        Head::Ordinary { prob, atom } => vec![(probability(prob, head)?, atom.clone())],
        Head::Sum(cases) => cases
            .iter()
            .map(|(p, a)| Ok((probability(p, head)?, a.clone())))
            .collect::<Result<_>>()?,
        Head::Distribution { lhs, values, time } => {
            let Term::List(vs) = values else {
                return Err(Error::Sort(format!(
                    "distribution values `{values}` are not a list"
                )));
            };
            if vs.is_empty() {
                return Err(Error::EmptyDistribution(head.to_string()));
            }
            let weight = |v: &Term| match v {
                Term::List(pair) if pair.len() == 2 => match pair[1] {
                    Term::Real(w) if (0.0..=1.0).contains(&w.0) => Some(w.0),
                    Term::Int(w @ (0 | 1)) => Some(w as f64),
                    _ => None,
                },
                _ => None,
            };
            let weights: Option<Vec<f64>> = vs.iter().map(weight).collect();
            let weighted = weights.is_some_and(|w| w.iter().sum::<f64>() <= 1.0 + EPS);
            if weighted {
                vs.iter()
                    .map(|v| {
                        let Term::List(pair) = v else { unreachable!() };
                        let w = probability(&pair[1], head)?;
                        Ok((
                            w,
                            Atom::Eq {
                                lhs: lhs.clone(),
                                rhs: pair[0].clone(),
                                time: time.clone(),
                            },
                        ))
                    })
                    .collect::<Result<_>>()?
            } else {
                let w = 1.0 / vs.len() as f64;
                vs.iter()
                    .map(|v| {
                        (
                            w,
                            Atom::Eq {
                                lhs: lhs.clone(),
                                rhs: v.clone(),
                                time: time.clone(),
                            },
                        )
                    })
                    .collect()
            }
        }
    };
    let total: f64 = cases.iter().map(|(p, _)| p).sum();
    if total > 1.0 + EPS {
        return Err(Error::HeadProbability {
            rule: head.to_string(),
            reason: format!("probabilities sum to {total}"),
        });
    }
    Ok(cases)
}

/// Timed stratum of an evaluated head: the least stratum of its atoms.
pub fn head_strat(head: &Head, st: &Stratification) -> Result<TimedStratum> {
    let time = head
        .time()
        .as_int()
        .ok_or_else(|| Error::Sort(format!("head time of `{head}` is not an integer")))?;
    let stratum = head
        .preds()
        .iter()
        .map(|p| {
            st.stratum_of(p)
                .ok_or_else(|| Error::UnknownPredicate(p.to_string()))
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .min()
        .ok_or_else(|| Error::Sort(format!("head `{head}` defines no predicate")))?;
    Ok(TimedStratum { time, stratum })
}

/// Normal form of one ground rule instance (all bodies from one matcher).
#[derive(Clone, Debug, PartialEq)]
pub enum Shape {
    /// `a :- B` for each body.
    Certain(AtomId),
    /// Bare probabilistic fact `pr :: a`.
    Fact(f64, AtomId),
    /// `$head(k) :- B` for each body, plus the case rules and facts.
    Cases {
        head: AtomId,
        rules: Vec<GroundRule>,
        facts: Vec<(f64, AtomId)>,
    },
    /// All head probabilities are zero.
    Never,
}

impl Shape {
    /// Atom defined by each body, if any.
    pub fn body_head(&self) -> Option<AtomId> {
        match self {
            Shape::Certain(a) => Some(*a),
            Shape::Cases { head, .. } => Some(*head),
            Shape::Fact(..) | Shape::Never => None,
        }
    }

    /// User atoms that this instance can derive.
    pub fn produced(&self, table: &AtomTable) -> Vec<AtomId> {
        let mut v = match self {
            Shape::Certain(a) | Shape::Fact(_, a) => vec![*a],
            Shape::Cases { rules, .. } => rules
                .iter()
                .map(|r| r.head)
                .filter(|h| !table.is_internal(*h))
                .collect(),
            Shape::Never => Vec::new(),
        };
        v.sort();
        v.dedup();
        v
    }

    /// Emit the normal rules and probabilistic facts for the given bodies.
    pub fn emit(
        &self,
        bodies: &[Vec<Lit>],
        rules: &mut Vec<GroundRule>,
        facts: &mut Vec<(f64, AtomId)>,
    ) {
        match self {
            Shape::Certain(a) => rules.extend(bodies.iter().map(|b| GroundRule {
                head: *a,
                body: b.clone(),
            })),
            Shape::Fact(p, a) => facts.push((*p, *a)),
            Shape::Cases {
                head,
                rules: rs,
                facts: fs,
            } => {
                rules.extend(bodies.iter().map(|b| GroundRule {
                    head: *head,
                    body: b.clone(),
                }));
                rules.extend(rs.iter().cloned());
                facts.extend(fs.iter().copied());
            }
            Shape::Never => {}
        }
    }
}

fn internal(table: &mut AtomTable, name: &str, args: Vec<Term>, s: TimedStratum) -> AtomId {
    table.intern(Atom::ord(name, args, Term::Int(s.time)), s)
}

/// Normalize an evaluated ground head for instance `k`. `bare` marks a
/// source fact, whose probability goes directly into the fact set.
pub fn normalize(
    k: usize,
    head: &Head,
    bare: bool,
    table: &mut AtomTable,
    st: &Stratification,
) -> Result<Shape> {
    if let Head::Ordinary { atom, .. } = head {
        let cases = head_cases(head)?;
        let p = cases[0].0;
        let a = intern_user(table, st, atom)?;
        if p >= 1.0 - EPS {
            return Ok(Shape::Certain(a));
        }
        if p <= 0.0 {
            return Ok(Shape::Never);
        }
        if bare {
            return Ok(Shape::Fact(p, a));
        }
    }
    let s = head_strat(head, st)?;
    let cases = head_cases(head)?;
    let h = internal(table, "$head", vec![Term::Int(k as i64)], s);
    let mut rules = Vec::new();
    let mut facts = Vec::new();
    let mut negs: Vec<Lit> = Vec::new();
    let mut rem = 1.0;
    for (i, (p, a)) in cases.iter().enumerate() {
        if *p <= 0.0 {
            continue;
        }
        let case = internal(
            table,
            "$case",
            vec![Term::Int(k as i64), Term::Int(i as i64 + 1)],
            s,
        );
        let ai = intern_user(table, st, a)?;
        let mut body = vec![Lit::pos(h)];
        body.extend(negs.iter().copied());
        body.push(Lit::pos(case));
        rules.push(GroundRule { head: ai, body });
        let pi = p / rem;
        if pi >= 1.0 - EPS {
            rules.push(GroundRule {
                head: case,
                body: Vec::new(),
            });
            break;
        }
        facts.push((pi, case));
        negs.push(Lit::neg(case));
        rem -= p;
    }
    if rules.is_empty() {
        return Ok(Shape::Never);
    }
    Ok(Shape::Cases {
        head: h,
        rules,
        facts,
    })
}

type Facts = Vec<(f64, AtomId)>;

/// Normal rules and probabilistic facts for a ground rule with the given
/// normal bodies.
pub fn normalize_head(
    k: usize,
    head: &Head,
    bodies: &[Vec<Lit>],
    table: &mut AtomTable,
    st: &Stratification,
) -> Result<(Vec<GroundRule>, Facts)> {
    let bare = bodies.len() == 1 && bodies[0].is_empty();
    let shape = normalize(k, &eval_head(head)?, bare, table, st)?;
    let mut rules = Vec::new();
    let mut facts = Vec::new();
    shape.emit(bodies, &mut rules, &mut facts);
    Ok((rules, facts))
}

/// Predicate of the equations defined by a distribution head.
pub fn distribution_pred(lhs: &Term) -> Option<Pred> {
    match lhs {
        Term::Fn(f, args) => Some(Pred {
            name: f.clone(),
            arity: args.len() + 1,
        }),
        _ => None,
    }
}
