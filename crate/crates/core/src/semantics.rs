//! Reference distribution semantics by exhaustive choice enumeration.

use std::collections::{BTreeSet, HashMap};

use crate::error::{Error, Result};
use crate::ground::{ground_levels, AtomId, AtomTable, GroundProgram, GroundRule, Lit};

/// Largest number of relevant probabilistic facts the oracle enumerates.
pub const ORACLE_GUARD: usize = 25;

pub type Choice = BTreeSet<AtomId>;
pub type Interpretation = BTreeSet<AtomId>;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct OracleOptions {
    /// Check right-uniqueness of every model over the whole program.
    pub strict: bool,
}

struct Evaluator<'a> {
    by_head: HashMap<AtomId, Vec<&'a [Lit]>>,
    order: Vec<AtomId>,
}

impl<'a> Evaluator<'a> {
    /// Atoms in an order where every body atom precedes the heads using it.
    fn new(
        table: &AtomTable,
        rules: &'a [GroundRule],
        atoms: impl IntoIterator<Item = AtomId>,
    ) -> Result<Self> {
        let levels = ground_levels(table.len(), rules, table)?;
        let mut by_head: HashMap<AtomId, Vec<&[Lit]>> = HashMap::new();
        for r in rules {
            by_head.entry(r.head).or_default().push(&r.body);
        }
        let mut order: Vec<AtomId> = atoms.into_iter().collect();
        order.sort_by_key(|a| (levels[a.index()], *a));
        order.dedup();
        Ok(Evaluator { by_head, order })
    }

    fn eval(&self, truth: &mut [bool], base: impl Fn(AtomId) -> bool) {
        for &a in &self.order {
            truth[a.index()] = base(a)
                || self.by_head.get(&a).is_some_and(|bodies| {
                    bodies
                        .iter()
                        .any(|b| b.iter().all(|l| truth[l.atom.index()] == l.positive))
                });
        }
    }
}

/// The least model of the normal rules `rules` over the atoms of `table`,
/// on top of the chosen facts `base`.
pub fn least_fixpoint_model(
    table: &AtomTable,
    rules: &[GroundRule],
    base: &Choice,
) -> Result<Interpretation> {
    let ev = Evaluator::new(table, rules, (0..table.len() as u32).map(AtomId))?;
    let mut truth = vec![false; table.len()];
    ev.eval(&mut truth, |a| base.contains(&a));
    Ok((0..table.len() as u32)
        .map(AtomId)
        .filter(|a| truth[a.index()])
        .collect())
}

/// `P(X)` for a choice `X` of the facts `facts`.
pub fn choice_probability(x: &Choice, facts: &[(f64, AtomId)]) -> f64 {
    facts
        .iter()
        .map(|(p, a)| if x.contains(a) { *p } else { 1.0 - p })
        .product()
}

/// Atoms the truth of `roots` depends on.
fn cone(roots: impl IntoIterator<Item = AtomId>, rules: &[GroundRule]) -> BTreeSet<AtomId> {
    let mut by_head: HashMap<AtomId, Vec<&[Lit]>> = HashMap::new();
    for r in rules {
        by_head.entry(r.head).or_default().push(&r.body);
    }
    let mut seen: BTreeSet<AtomId> = BTreeSet::new();
    let mut work: Vec<AtomId> = roots.into_iter().collect();
    while let Some(a) = work.pop() {
        if !seen.insert(a) {
            continue;
        }
        for b in by_head.get(&a).into_iter().flatten() {
            work.extend(b.iter().map(|l| l.atom).filter(|x| !seen.contains(x)));
        }
    }
    seen
}

fn check_unique(table: &AtomTable, truth: &[bool]) -> Result<()> {
    let mut eqs: HashMap<u32, AtomId> = HashMap::new();
    for (i, &t) in truth.iter().enumerate() {
        let a = AtomId(i as u32);
        if !t {
            continue;
        }
        if let Some(k) = table.eq_key(a) {
            if let Some(&b) = eqs.get(&k) {
                return Err(Error::Admissibility(
                    table.atom(b).to_string(),
                    table.atom(a).to_string(),
                ));
            }
            eqs.insert(k, a);
        }
    }
    Ok(())
}

/// Success probability of the ground query `q` by summing `P(X)` over every
/// choice whose least model satisfies `q`. Only facts that can influence
/// `q` are enumerated unless strict checking is on.
pub fn oracle_success_probability(
    g: &GroundProgram,
    q: &[Lit],
    opts: OracleOptions,
) -> Result<f64> {
    if g.unsatisfiable {
        return Ok(0.0);
    }
    let n = g.atoms.len();
    let relevant: BTreeSet<AtomId> = if opts.strict {
        (0..n as u32).map(AtomId).collect()
    } else {
        cone(q.iter().map(|l| l.atom), &g.rules)
    };
    let facts: Vec<(f64, AtomId)> = g
        .facts
        .iter()
        .copied()
        .filter(|(_, a)| relevant.contains(a))
        .collect();
    if facts.len() > ORACLE_GUARD {
        return Err(Error::OracleGuard(facts.len(), ORACLE_GUARD));
    }
    let ev = Evaluator::new(&g.atoms, &g.rules, relevant.iter().copied())?;
    let slot: HashMap<AtomId, usize> = facts
        .iter()
        .enumerate()
        .map(|(i, (_, a))| (*a, i))
        .collect();
    let mut truth = vec![false; n];
    let mut total = 0.0;
    for mask in 0u64..1 << facts.len() {
        ev.eval(&mut truth, |a| {
            slot.get(&a).is_some_and(|i| mask >> i & 1 == 1)
        });
        if opts.strict {
            check_unique(&g.atoms, &truth)?;
        }
        if q.iter().all(|l| truth[l.atom.index()] == l.positive) {
            total += facts
                .iter()
                .enumerate()
                .map(|(i, (p, _))| if mask >> i & 1 == 1 { *p } else { 1.0 - p })
                .product::<f64>();
        }
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ground::{ground_program, intern_query_literal, GroundOptions};
    use crate::syntax::{parse_program, parse_query, Literal};

    fn ground(src: &str, query: &str, eot: i64, opts: GroundOptions) -> (GroundProgram, Vec<Lit>) {
        let p = parse_program(src).unwrap();
        let q: Vec<Literal> = parse_query(query).unwrap().body.literals();
        let mut g = ground_program(&p, &q, eot, opts).unwrap();
        let lits = q
            .iter()
            .map(|l| intern_query_literal(&mut g.atoms, &g.strata, l).unwrap())
            .collect();
        (g, lits)
    }

    fn prob(src: &str, query: &str, eot: i64) -> f64 {
        let (g, q) = ground(src, query, eot, GroundOptions::unguided());
        oracle_success_probability(&g, &q, OracleOptions { strict: true }).unwrap()
    }

    const EXAMPLE1: &str =
        "0.5 :: p(a). q(a). 0.5 :: p(b). q(b). 0.5 :: p(c). s :- \\+ (p(X), q(X)).";

    #[test]
    fn example_one_model_without_choices() {
        let (g, _) = ground(EXAMPLE1, "?- s.", 0, GroundOptions::unguided());
        let m = least_fixpoint_model(&g.atoms, &g.rules, &Choice::new()).unwrap();
        let mut names: Vec<String> = m.iter().map(|a| g.atoms.atom(*a).to_string()).collect();
        names.sort();
        assert_eq!(names, vec!["q(a)", "q(b)", "s"]);
    }

    #[test]
    fn empty_program_has_empty_model() {
        let m = least_fixpoint_model(&AtomTable::new(), &[], &Choice::new()).unwrap();
        assert!(m.is_empty());
    }

    #[test]
    fn choice_probabilities() {
        let facts = [(0.5, AtomId(0)), (0.5, AtomId(1))];
        assert_eq!(
            choice_probability(&[AtomId(0)].into_iter().collect(), &facts[..1]),
            0.5
        );
        assert_eq!(choice_probability(&Choice::new(), &facts), 0.25);
        let facts = [(0.2, AtomId(0)), (0.7, AtomId(1)), (0.9, AtomId(2))];
        let mut total = 0.0;
        for mask in 0..8u32 {
            let x: Choice = (0..3).filter(|i| mask >> i & 1 == 1).map(AtomId).collect();
            total += choice_probability(&x, &facts);
        }
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn small_oracle_values() {
        assert_eq!(prob("0.5 :: p.", "?- p.", 0), 0.5);
        assert_eq!(prob("0.5 :: p.", "?- \\+ p.", 0), 0.5);
        assert!((prob(EXAMPLE1, "?- s.", 0) - 0.25).abs() < 1e-12);
        assert_eq!(prob("0.5 :: p.", "?- r.", 0), 0.0);
    }

    #[test]
    fn urn_draw() {
        let urn = "urn([r(1), r(2), g(1)]) @ 0.
            draw ~ L @ T :- urn(L) @ T.
            some(red) @ T :- draw=r(I) @ T.
            some(green) @ T :- draw=g(I) @ T.";
        assert!((prob(urn, "?- some(green)@0.", 0) - 1.0 / 3.0).abs() < 1e-12);
        assert!((prob(urn, "?- some(red)@0.", 0) - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn strict_mode_rejects_inadmissible_program() {
        let (g, q) = ground(
            "f = a @ 0. f = b @ 0. p :- f = a @ 0.",
            "?- p.",
            0,
            GroundOptions::unguided(),
        );
        assert!(matches!(
            oracle_success_probability(&g, &q, OracleOptions { strict: true }),
            Err(Error::Admissibility(_, _))
        ));
        assert_eq!(
            oracle_success_probability(&g, &q, OracleOptions::default()).unwrap(),
            1.0
        );
    }

    #[test]
    fn guard_limits_enumeration() {
        let src: String = (0..30)
            .map(|i| format!("0.5 :: c({i}). p :- c({i}).\n"))
            .collect();
        let (g, q) = ground(&src, "?- p.", 0, GroundOptions::unguided());
        assert!(matches!(
            oracle_success_probability(&g, &q, OracleOptions::default()),
            Err(Error::OracleGuard(30, 25))
        ));
    }

    #[test]
    fn evidence_monotone() {
        let src = "0.3 :: a. 0.6 :: b. c :- a. c :- b.";
        let c = prob(src, "?- c.", 0);
        let ca = prob(src, "?- c, a.", 0);
        let cab = prob(src, "?- c, a, \\+ b.", 0);
        assert!((c - (1.0 - 0.7 * 0.4)).abs() < 1e-12);
        assert!(ca <= c && cab <= ca);
    }
}
