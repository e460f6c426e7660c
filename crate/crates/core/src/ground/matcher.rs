//! Domains of ground atoms and matchers of atom sequences to them.

use std::collections::{BTreeMap, HashMap, HashSet};

use super::atoms::{AtomId, AtomTable};
use crate::builtins::{eval_atom, eval_term};
use crate::error::{Error, Result};
use crate::syntax::{Atom, Pred, Substitute, Substitution, Term};

/// Set of ground ordinary/equation atoms indexed by predicate and time.
#[derive(Clone, Debug, Default)]
pub struct Domain {
    by_pred: HashMap<Pred, BTreeMap<i64, Vec<AtomId>>>,
    members: HashSet<AtomId>,
}

impl Domain {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_ids(table: &AtomTable, ids: impl IntoIterator<Item = AtomId>) -> Self {
        let mut d = Domain::new();
        for id in ids {
            d.insert(table, id);
        }
        d
    }

    /// Returns true if the atom was not yet present.
    pub fn insert(&mut self, table: &AtomTable, id: AtomId) -> bool {
        if !self.members.insert(id) {
            return false;
        }
        let a = table.atom(id);
        let p = a.pred().expect("domain atoms are ordinary or equations");
        self.by_pred
            .entry(p)
            .or_default()
            .entry(table.time(id))
            .or_default()
            .push(id);
        true
    }

    pub fn remove(&mut self, table: &AtomTable, id: AtomId) -> bool {
        if !self.members.remove(&id) {
            return false;
        }
        let p = table
            .atom(id)
            .pred()
            .expect("domain atoms are ordinary or equations");
        if let Some(times) = self.by_pred.get_mut(&p) {
            if let Some(v) = times.get_mut(&table.time(id)) {
                v.retain(|x| *x != id);
            }
        }
        true
    }

    pub fn contains(&self, id: AtomId) -> bool {
        self.members.contains(&id)
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn ids(&self) -> Vec<AtomId> {
        let mut v: Vec<AtomId> = self.members.iter().copied().collect();
        v.sort();
        v
    }

    fn candidates(&self, p: &Pred, time: Option<i64>) -> Vec<AtomId> {
        let Some(times) = self.by_pred.get(p) else {
            return Vec::new();
        };
        match time {
            Some(t) => times.get(&t).cloned().unwrap_or_default(),
            None => times.values().flatten().copied().collect(),
        }
    }
}

/// A matcher together with the domain atoms matched by the ordinary and
/// equation atoms of the pattern, in pattern order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Match {
    pub subst: Substitution,
    pub atoms: Vec<AtomId>,
}

type Deferred = Vec<(Term, Term)>;

/// Match a pattern term against an evaluated ground term. Interpreted
/// subterms that are not yet ground are deferred.
fn match_term(
    pat: &Term,
    val: &Term,
    s: &mut Substitution,
    deferred: &mut Deferred,
) -> Result<bool> {
    match pat {
        Term::Var(v) => match s.get(v) {
            Some(bound) => Ok(bound == val),
            None => {
                s.bind(v.clone(), val.clone());
                Ok(true)
            }
        },
        Term::Int(_) | Term::Real(_) => Ok(pat == val),
        Term::Op(..) | Term::Range(..) => defer_or_eval(pat, val, s, deferred),
        Term::List(items) if items.iter().any(|t| matches!(t, Term::Range(..))) => {
            defer_or_eval(pat, val, s, deferred)
        }
        Term::List(items) => match val {
            Term::List(vals) if vals.len() == items.len() => {
                for (p, v) in items.iter().zip(vals) {
                    if !match_term(p, v, s, deferred)? {
                        return Ok(false);
                    }
                }
                Ok(true)
            }
            _ => Ok(false),
        },
        Term::Fn(f, args) => match val {
            Term::Fn(g, vals) if f == g && args.len() == vals.len() => {
                for (p, v) in args.iter().zip(vals) {
                    if !match_term(p, v, s, deferred)? {
                        return Ok(false);
                    }
                }
                Ok(true)
            }
            _ => Ok(false),
        },
    }
}

fn defer_or_eval(
    pat: &Term,
    val: &Term,
    s: &Substitution,
    deferred: &mut Deferred,
) -> Result<bool> {
    let p = pat.apply(s);
    if p.is_ground() {
        Ok(eval_term(&p)? == *val)
    } else {
        deferred.push((p, val.clone()));
        Ok(true)
    }
}

fn match_atom(
    pat: &Atom,
    val: &Atom,
    s: &mut Substitution,
    deferred: &mut Deferred,
) -> Result<bool> {
    match (pat, val) {
        (
            Atom::Ord {
                pred: p,
                args: pa,
                time: pt,
            },
            Atom::Ord {
                pred: q,
                args: va,
                time: vt,
            },
        ) => {
            if p != q || pa.len() != va.len() {
                return Ok(false);
            }
            for (x, y) in pa.iter().zip(va) {
                if !match_term(x, y, s, deferred)? {
                    return Ok(false);
                }
            }
            match_term(pt, vt, s, deferred)
        }
        (
            Atom::Eq {
                lhs: pl,
                rhs: pr,
                time: pt,
            },
            Atom::Eq {
                lhs: vl,
                rhs: vr,
                time: vt,
            },
        ) => Ok(match_term(pl, vl, s, deferred)?
            && match_term(pr, vr, s, deferred)?
            && match_term(pt, vt, s, deferred)?),
        _ => Ok(false),
    }
}

/// Re-check deferred interpreted subterms that became ground.
fn resolve(s: &Substitution, deferred: &mut Deferred) -> Result<bool> {
    let mut keep = Vec::with_capacity(deferred.len());
    for (p, v) in deferred.drain(..) {
        let p = p.apply(s);
        if p.is_ground() {
            if eval_term(&p)? != v {
                return Ok(false);
            }
        } else {
            keep.push((p, v));
        }
    }
    *deferred = keep;
    Ok(true)
}

/// Evaluate every comparison that is ground under `s`.
fn comparisons_hold(cmps: &[&Atom], s: &Substitution) -> Result<bool> {
    for c in cmps {
        let g = c.apply(s);
        if g.is_ground() && !eval_atom(&g)? {
            return Ok(false);
        }
    }
    Ok(true)
}

struct Search<'a> {
    ords: Vec<&'a Atom>,
    cmps: Vec<&'a Atom>,
    table: &'a AtomTable,
    dom: &'a Domain,
    filter: &'a dyn Fn(AtomId) -> bool,
    out: Vec<Match>,
}

impl Search<'_> {
    fn candidates(&self, pat: &Atom) -> Result<Vec<AtomId>> {
        let Some(p) = pat.pred() else {
            return Ok(Vec::new());
        };
        let t = pat.time().expect("ordinary atoms have a time");
        let time = if t.is_ground() {
            match eval_term(t)? {
                Term::Int(n) => Some(n),
                _ => return Ok(Vec::new()),
            }
        } else {
            None
        };
        Ok(self.dom.candidates(&p, time))
    }

    fn step(
        &mut self,
        k: usize,
        s: Substitution,
        deferred: Deferred,
        matched: Vec<AtomId>,
    ) -> Result<()> {
        if k == self.ords.len() {
            for c in &self.cmps {
                let g = c.apply(&s);
                if !g.is_ground() {
                    return Err(Error::Flounder(g.to_string()));
                }
            }
            if let Some((p, _)) = deferred.first() {
                return Err(Error::Flounder(p.to_string()));
            }
            self.out.push(Match {
                subst: s,
                atoms: matched,
            });
            return Ok(());
        }
        let pat = self.ords[k].apply(&s);
        for id in self.candidates(&pat)? {
            if !(self.filter)(id) {
                continue;
            }
            let mut s2 = s.clone();
            let mut d2 = deferred.clone();
            if match_atom(&pat, self.table.atom(id), &mut s2, &mut d2)?
                && resolve(&s2, &mut d2)?
                && comparisons_hold(&self.cmps, &s2)?
            {
                let mut m2 = matched.clone();
                m2.push(id);
                self.step(k + 1, s2, d2, m2)?;
            }
        }
        Ok(())
    }
}

/// All matchers of `pattern` to the atoms of `dom` accepted by `filter`,
/// extending `init`. When `fixed = Some((i, a))`, the `i`-th ordinary atom
/// of the pattern must match `a` and is matched first.
pub fn match_atoms(
    pattern: &[Atom],
    table: &AtomTable,
    dom: &Domain,
    filter: &dyn Fn(AtomId) -> bool,
    fixed: Option<(usize, AtomId)>,
    init: &Substitution,
) -> Result<Vec<Match>> {
    let mut ords: Vec<&Atom> = pattern.iter().filter(|a| !a.is_interpreted()).collect();
    let cmps: Vec<&Atom> = pattern.iter().filter(|a| a.is_interpreted()).collect();
    let mut s = init.clone();
    let mut deferred = Vec::new();
    let mut first = Vec::new();
    if let Some((i, id)) = fixed {
        let pat = ords[i].apply(&s);
        if !match_atom(&pat, table.atom(id), &mut s, &mut deferred)?
            || !resolve(&s, &mut deferred)?
            || !comparisons_hold(&cmps, &s)?
        {
            return Ok(Vec::new());
        }
        ords.remove(i);
        first.push((i, id));
    } else if !comparisons_hold(&cmps, &s)? {
        return Ok(Vec::new());
    }
    let mut search = Search {
        ords,
        cmps,
        table,
        dom,
        filter,
        out: Vec::new(),
    };
    search.step(0, s, deferred, Vec::new())?;
    let mut out = search.out;
    if let Some((i, id)) = first.pop() {
        for m in &mut out {
            m.atoms.insert(i, id);
        }
    }
    Ok(out)
}

/// All grounding substitutions for the free variables of `pattern` that
/// map its ordinary atoms into `dom` and make its comparisons true.
pub fn matchers(pattern: &[Atom], table: &AtomTable, dom: &Domain) -> Result<Vec<Substitution>> {
    Ok(
        match_atoms(pattern, table, dom, &|_| true, None, &Substitution::new())?
            .into_iter()
            .map(|m| m.subst)
            .collect(),
    )
}
