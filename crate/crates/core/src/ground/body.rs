//! Grounding of negative body elements over a frozen domain.

use std::collections::BTreeSet;

use super::atoms::{AtomId, AtomTable, Lit};
use super::hitting::hitting_sets;
use super::matcher::{match_atoms, Domain};
use crate::builtins::{eval_atom, eval_ordinary_atom};
use crate::error::{Error, Result};
use crate::stratify::{strat, Stratification, TimedStratum};
use crate::syntax::{Atom, Body, Substitution};

/// Evaluate and intern a ground user atom.
pub fn intern_user(table: &mut AtomTable, st: &Stratification, a: &Atom) -> Result<AtomId> {
    let g = eval_ordinary_atom(a)?;
    let s = strat(&g, st)?;
    Ok(table.intern(g, s))
}

/// Order positive literals first and drop duplicates; `None` if the body contains some `a` and `-a`.
pub fn simplify(mut lits: Vec<Lit>) -> Option<Vec<Lit>> {
    lits.sort_by_key(|l| (!l.positive, l.atom));
    lits.dedup();
    let atoms: BTreeSet<AtomId> = lits.iter().filter(|l| l.positive).map(|l| l.atom).collect();
    if lits.iter().any(|l| !l.positive && atoms.contains(&l.atom)) {
        return None;
    }
    Some(lits)
}

/// Ground one negative element: the alternatives of negative literals
/// whose conjunction is equivalent to `not (c1, ..., ck)` over the domain.
/// Matching is restricted to atoms strictly below `below` when given.
fn ground_element(
    element: &[Atom],
    table: &mut AtomTable,
    st: &Stratification,
    dneg: &Domain,
    below: Option<TimedStratum>,
) -> Result<Vec<Vec<Lit>>> {
    let ords: Vec<&Atom> = element.iter().filter(|a| !a.is_interpreted()).collect();
    if ords.len() == 1 && element.len() == 1 && ords[0].is_ground() {
        // A single ground literal passes through unchanged.
        return Ok(vec![vec![Lit::neg(intern_user(table, st, ords[0])?)]]);
    }
    if ords.is_empty() {
        // Only comparisons: `not (cmp, ...)` is a truth value.
        for c in element {
            if !c.is_ground() {
                return Err(Error::Flounder(c.to_string()));
            }
            if !eval_atom(c)? {
                return Ok(vec![Vec::new()]);
            }
        }
        return Ok(Vec::new());
    }
    let t: &AtomTable = table;
    let filter = |id: AtomId| below.is_none_or(|b| t.strat(id) < b);
    let matches = match_atoms(element, t, dneg, &filter, None, &Substitution::new())?;
    let family: Vec<Vec<AtomId>> = matches.into_iter().map(|m| m.atoms).collect();
    Ok(hitting_sets(&family)
        .into_iter()
        .map(|h| h.into_iter().map(Lit::neg).collect())
        .collect())
}

/// Ground all negative elements of a body and combine their alternatives.
/// Returns the negative parts of the resulting normal bodies.
pub fn ground_negations(
    neg: &[Vec<Atom>],
    table: &mut AtomTable,
    st: &Stratification,
    dneg: &Domain,
    below: Option<TimedStratum>,
) -> Result<Vec<Vec<Lit>>> {
    let mut acc: Vec<Vec<Lit>> = vec![Vec::new()];
    for element in neg {
        let alts = ground_element(element, table, st, dneg, below)?;
        let mut next = Vec::with_capacity(acc.len() * alts.len());
        for a in &acc {
            for b in &alts {
                let mut c = a.clone();
                c.extend_from_slice(b);
                next.push(c);
            }
        }
        acc = next;
        if acc.is_empty() {
            break;
        }
    }
    Ok(acc)
}

/// `gnd_D(B)` for a body whose positive part is ground: the set of normal
/// bodies, after Boolean simplification.
pub fn ground_body(
    body: &Body,
    table: &mut AtomTable,
    st: &Stratification,
    dneg: &Domain,
) -> Result<Vec<Vec<Lit>>> {
    let mut pos = Vec::new();
    for a in &body.pos {
        if a.is_interpreted() {
            if !a.is_ground() {
                return Err(Error::Flounder(a.to_string()));
            }
            if !eval_atom(a)? {
                return Ok(Vec::new());
            }
        } else {
            pos.push(Lit::pos(intern_user(table, st, a)?));
        }
    }
    let negs = ground_negations(&body.neg, table, st, dneg, None)?;
    let mut out: Vec<Vec<Lit>> = Vec::new();
    for n in negs {
        let mut lits = pos.clone();
        lits.extend(n);
        if let Some(b) = simplify(lits) {
            if !out.contains(&b) {
                out.push(b);
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stratify::stratify;
    use crate::syntax::{parse_atom, parse_program, parse_rule};

    fn setup(src: &str, dom: &[&str]) -> (AtomTable, Stratification, Domain) {
        let st = stratify(&parse_program(src).unwrap()).unwrap();
        let mut t = AtomTable::new();
        let ids: Vec<AtomId> = dom
            .iter()
            .map(|a| intern_user(&mut t, &st, &parse_atom(a).unwrap()).unwrap())
            .collect();
        let d = Domain::from_ids(&t, ids);
        (t, st, d)
    }

    fn render(t: &AtomTable, bodies: &[Vec<Lit>]) -> Vec<String> {
        let mut v: Vec<String> = bodies.iter().map(|b| t.body_string(b)).collect();
        v.sort();
        v
    }

    #[test]
    fn example_one_bodies() {
        let src = "0.5 :: p(a). q(a). 0.5 :: p(b). q(b). 0.5 :: p(c). s :- \\+ (p(X), q(X)).";
        let (mut t, st, d) = setup(src, &["p(a)", "p(b)", "q(a)", "q(b)", "p(c)"]);
        let body = parse_rule("s :- \\+ (p(X), q(X)).").unwrap().body;
        let bodies = ground_body(&body, &mut t, &st, &d).unwrap();
        assert_eq!(
            render(&t, &bodies),
            vec![
                "-p(a), -p(b)",
                "-p(a), -q(b)",
                "-p(b), -q(a)",
                "-q(a), -q(b)"
            ]
        );
    }

    #[test]
    fn intro_body() {
        let src = "0.5 :: q(0). 0.5 :: p(T) :- q(T), \\+ (q(S), S < T).";
        let (mut t, st, d) = setup(src, &["q(0)", "q(1)", "q(2)"]);
        let body = parse_rule("p(2) :- q(2), \\+ (q(S), S < 2).").unwrap().body;
        let bodies = ground_body(&body, &mut t, &st, &d).unwrap();
        assert_eq!(render(&t, &bodies), vec!["q(2), -q(0), -q(1)"]);
        let body = parse_rule("p(0) :- q(0), \\+ (q(S), S < 0).").unwrap().body;
        let bodies = ground_body(&body, &mut t, &st, &d).unwrap();
        assert_eq!(render(&t, &bodies), vec!["q(0)"]);
    }

    #[test]
    fn no_negation_is_identity() {
        let (mut t, st, d) = setup("q(0). p :- q(0).", &["q(0)"]);
        let body = parse_rule("p :- q(0).").unwrap().body;
        let bodies = ground_body(&body, &mut t, &st, &d).unwrap();
        assert_eq!(render(&t, &bodies), vec!["q(0)"]);
    }

    #[test]
    fn single_ground_literal_passes_through() {
        let (mut t, st, d) = setup("q(0). r(0). p :- q(0), \\+ r(0).", &["q(0)"]);
        let body = parse_rule("p :- q(0), \\+ r(0).").unwrap().body;
        let bodies = ground_body(&body, &mut t, &st, &d).unwrap();
        assert_eq!(render(&t, &bodies), vec!["q(0), -r(0)"]);
    }

    #[test]
    fn contradictory_body_dropped() {
        let (mut t, st, d) = setup("q. p :- q, \\+ (q, 1 < 2).", &["q"]);
        let body = parse_rule("p :- q, \\+ (q, 1 < 2).").unwrap().body;
        assert!(ground_body(&body, &mut t, &st, &d).unwrap().is_empty());
        let body = parse_rule("p :- q, 2 < 1.").unwrap().body;
        assert!(ground_body(&body, &mut t, &st, &d).unwrap().is_empty());
    }
}
