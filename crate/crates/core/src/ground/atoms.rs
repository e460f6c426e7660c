//! Interned ground atoms, literals and the consistency test.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;

use crate::stratify::TimedStratum;
use crate::syntax::{Atom, Term};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AtomId(pub u32);

impl AtomId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Lit {
    pub atom: AtomId,
    pub positive: bool,
}

impl Lit {
    pub fn pos(atom: AtomId) -> Lit {
        Lit {
            atom,
            positive: true,
        }
    }

    pub fn neg(atom: AtomId) -> Lit {
        Lit {
            atom,
            positive: false,
        }
    }

    pub fn negate(self) -> Lit {
        Lit {
            atom: self.atom,
            positive: !self.positive,
        }
    }
}

/// Ground atoms with their timed strata. Equation atoms also carry a key
/// for `(lhs, time)` so right-uniqueness can be checked by integer compare.
#[derive(Clone, Debug, Default)]
pub struct AtomTable {
    atoms: Vec<Atom>,
    strat: Vec<TimedStratum>,
    eq_key: Vec<Option<u32>>,
    index: HashMap<Atom, AtomId>,
    eq_keys: HashMap<(Term, i64), u32>,
}

impl AtomTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// Intern an evaluated ground atom. The stratum of an existing atom is
    /// kept.
    pub fn intern(&mut self, a: Atom, strat: TimedStratum) -> AtomId {
        if let Some(&id) = self.index.get(&a) {
            return id;
        }
        let id = AtomId(self.atoms.len() as u32);
        let key = match &a {
            Atom::Eq { lhs, time, .. } => {
                let t = time.as_int().unwrap_or(i64::MIN);
                let next = self.eq_keys.len() as u32;
                Some(*self.eq_keys.entry((lhs.clone(), t)).or_insert(next))
            }
            _ => None,
        };
        self.index.insert(a.clone(), id);
        self.atoms.push(a);
        self.strat.push(strat);
        self.eq_key.push(key);
        id
    }

    pub fn get(&self, a: &Atom) -> Option<AtomId> {
        self.index.get(a).copied()
    }

    pub fn atom(&self, id: AtomId) -> &Atom {
        &self.atoms[id.index()]
    }

    pub fn strat(&self, id: AtomId) -> TimedStratum {
        self.strat[id.index()]
    }

    pub fn eq_key(&self, id: AtomId) -> Option<u32> {
        self.eq_key[id.index()]
    }

    pub fn time(&self, id: AtomId) -> i64 {
        self.atoms[id.index()].time_value().unwrap_or(0)
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// True for atoms introduced by normalization or the disjointness
    /// transform rather than written by the user.
    pub fn is_internal(&self, id: AtomId) -> bool {
        matches!(self.atom(id), Atom::Ord { pred, .. } if pred.starts_with('$'))
    }

    pub fn lit(&self, l: Lit) -> LitDisplay<'_> {
        LitDisplay {
            table: self,
            lit: l,
        }
    }

    pub fn body_string(&self, body: &[Lit]) -> String {
        body.iter()
            .map(|l| self.lit(*l).to_string())
            .collect::<Vec<_>>()
            .join(", ")
    }
}

pub struct LitDisplay<'a> {
    table: &'a AtomTable,
    lit: Lit,
}

impl fmt::Display for LitDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if !self.lit.positive {
            write!(f, "-")?;
        }
        write!(f, "{}", self.table.atom(self.lit.atom))
    }
}

/// False iff the literals contain some `a` and `-a`, or two positive
/// equations with the same left-hand side and time but different values.
pub fn literals_consistent(table: &AtomTable, lits: impl IntoIterator<Item = Lit>) -> bool {
    let mut seen: HashSet<Lit> = HashSet::new();
    let mut eqs: HashMap<u32, AtomId> = HashMap::new();
    for l in lits {
        if seen.contains(&l.negate()) {
            return false;
        }
        if l.positive {
            if let Some(k) = table.eq_key(l.atom) {
                match eqs.get(&k) {
                    Some(&other) if other != l.atom => return false,
                    _ => {
                        eqs.insert(k, l.atom);
                    }
                }
            }
        }
        seen.insert(l);
    }
    true
}

pub fn consistent(table: &AtomTable, b1: &[Lit], b2: &[Lit]) -> bool {
    literals_consistent(table, b1.iter().chain(b2).copied())
}

/// The regressed query `R`: a growing set of ground literals with indexes
/// for fast consistency tests against rule bodies.
#[derive(Clone, Debug, Default)]
pub struct RegressedQuery {
    lits: BTreeSet<Lit>,
    eqs: HashMap<u32, AtomId>,
    inconsistent: bool,
}

impl RegressedQuery {
    pub fn new() -> Self {
        Self::default()
    }

    /// Add a literal; returns true if it was new.
    pub fn insert(&mut self, table: &AtomTable, l: Lit) -> bool {
        if !self.lits.insert(l) {
            return false;
        }
        if self.lits.contains(&l.negate()) {
            self.inconsistent = true;
        }
        if l.positive {
            if let Some(k) = table.eq_key(l.atom) {
                match self.eqs.get(&k) {
                    Some(&other) if other != l.atom => self.inconsistent = true,
                    _ => {
                        self.eqs.insert(k, l.atom);
                    }
                }
            }
        }
        true
    }

    pub fn contains(&self, l: Lit) -> bool {
        self.lits.contains(&l)
    }

    pub fn is_inconsistent(&self) -> bool {
        self.inconsistent
    }

    pub fn literals(&self) -> impl Iterator<Item = Lit> + '_ {
        self.lits.iter().copied()
    }

    pub fn len(&self) -> usize {
        self.lits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lits.is_empty()
    }

    /// `consistent(body, R)`, including clashes inside the body itself.
    pub fn consistent_with(&self, table: &AtomTable, body: &[Lit]) -> bool {
        if self.inconsistent {
            return false;
        }
        for l in body {
            if self.lits.contains(&l.negate()) {
                return false;
            }
            if l.positive {
                if let Some(k) = table.eq_key(l.atom) {
                    if matches!(self.eqs.get(&k), Some(&other) if other != l.atom) {
                        return false;
                    }
                }
            }
        }
        literals_consistent(table, body.iter().copied())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_atom;

    fn table(atoms: &[&str]) -> (AtomTable, Vec<AtomId>) {
        let mut t = AtomTable::new();
        let ids = atoms
            .iter()
            .map(|s| {
                t.intern(
                    parse_atom(s).unwrap(),
                    TimedStratum {
                        time: 0,
                        stratum: 0,
                    },
                )
            })
            .collect();
        (t, ids)
    }

    #[test]
    fn equation_clash() {
        let (t, ids) = table(&[
            "state=sunny@0",
            "state=rainy@0",
            "state=rainy@1",
            "f(a)=b",
            "f(a)=c",
        ]);
        assert!(!consistent(&t, &[Lit::pos(ids[0])], &[Lit::pos(ids[1])]));
        assert!(consistent(&t, &[Lit::pos(ids[0])], &[Lit::pos(ids[2])]));
        assert!(!consistent(&t, &[Lit::pos(ids[3])], &[Lit::pos(ids[4])]));
        // A negated equation does not clash with a different value.
        assert!(consistent(&t, &[Lit::pos(ids[0])], &[Lit::neg(ids[1])]));
    }

    #[test]
    fn complementary_literals() {
        let (t, ids) = table(&["p", "q"]);
        assert!(consistent(&t, &[Lit::pos(ids[0])], &[Lit::neg(ids[1])]));
        assert!(!consistent(&t, &[Lit::pos(ids[0])], &[Lit::neg(ids[0])]));
    }

    #[test]
    fn regressed_query_tracks_clashes() {
        let (t, ids) = table(&["state=sunny@0", "state=rainy@0", "p"]);
        let mut r = RegressedQuery::new();
        assert!(r.insert(&t, Lit::pos(ids[0])));
        assert!(!r.insert(&t, Lit::pos(ids[0])));
        assert!(!r.consistent_with(&t, &[Lit::pos(ids[1]), Lit::pos(ids[2])]));
        assert!(r.consistent_with(&t, &[Lit::pos(ids[2])]));
        assert!(!r.consistent_with(&t, &[Lit::pos(ids[2]), Lit::neg(ids[2])]));
        r.insert(&t, Lit::pos(ids[1]));
        assert!(r.is_inconsistent());
    }

    #[test]
    fn interning_is_stable() {
        let (mut t, ids) = table(&["p(a)", "p(b)"]);
        let again = t.intern(
            parse_atom("p(a)").unwrap(),
            TimedStratum {
                time: 9,
                stratum: 9,
            },
        );
        assert_eq!(again, ids[0]);
        assert_eq!(t.strat(again).time, 0);
        assert_eq!(t.lit(Lit::neg(ids[1])).to_string(), "-p(b)");
    }
}
