//! Exact inference by variable elimination over a ground normal program
//! whose rules for each head have mutually exclusive bodies.

use std::collections::hash_map::DefaultHasher;
use std::collections::{BTreeMap, HashMap};
use std::hash::{Hash, Hasher};

use crate::error::{Error, Result};
use crate::ground::{
    consistent, ground_levels, literals_consistent, simplify, AtomId, AtomTable, GroundProgram,
    GroundRule, Lit,
};
use crate::syntax::{Atom, Term};

/// A ground program with pairwise exclusive rule bodies per head.
#[derive(Clone, Debug)]
pub struct DisjointProgram {
    pub atoms: AtomTable,
    pub facts: Vec<(f64, AtomId)>,
    pub rules: Vec<GroundRule>,
    /// Ground levels: every body atom sits strictly below its head.
    pub levels: Vec<u32>,
    pub unsatisfiable: bool,
}

/// Make the rule bodies of every head mutually exclusive: the rules
/// `h :- B1, ..., h :- Bm` become `h_i :- Bi` and `h :- -h_1, ..., -h_(i-1), h_i`.
/// Heads with a single rule are unchanged and a head with a deterministic
/// fact keeps only that fact.
pub fn make_disjoint(g: &GroundProgram) -> Result<DisjointProgram> {
    make_disjoint_with(g, DisjointOptions::default())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DisjointOptions {
    /// Replace positive occurrences of introduced `$head` atoms that have a
    /// single rule by that rule's body.
    pub unfold: bool,
    /// Exclude only the earlier bodies consistent with `Bi`. Inconsistent
    /// bodies already exclude each other in admissible programs, and a rule
    /// left without exclusions keeps its body when no later rule needs its
    /// indicator.
    pub refine: bool,
}

impl Default for DisjointOptions {
    fn default() -> Self {
        DisjointOptions {
            unfold: true,
            refine: false,
        }
    }
}

pub fn make_disjoint_with(g: &GroundProgram, opts: DisjointOptions) -> Result<DisjointProgram> {
    let mut atoms = g.atoms.clone();
    let mut count: HashMap<AtomId, usize> = HashMap::new();
    for r in &g.rules {
        *count.entry(r.head).or_insert(0) += 1;
    }
    let unfold: HashMap<AtomId, &[Lit]> = g
        .rules
        .iter()
        .filter(|r| opts.unfold && count[&r.head] == 1 && is_head_atom(&atoms, r.head))
        .map(|r| (r.head, r.body.as_slice()))
        .collect();
    let mut by_head: BTreeMap<AtomId, Vec<Vec<Lit>>> = BTreeMap::new();
    for r in &g.rules {
        let mut body = Vec::with_capacity(r.body.len());
        for l in &r.body {
            match unfold.get(&l.atom) {
                Some(b) if l.positive => body.extend_from_slice(b),
                _ => body.push(*l),
            }
        }
        if let Some(body) = simplify(body) {
            by_head.entry(r.head).or_default().push(body);
        }
    }
    let mut rules = Vec::with_capacity(g.rules.len());
    for (h, bodies) in by_head {
        if bodies.iter().any(|b| b.is_empty()) {
            rules.push(GroundRule {
                head: h,
                body: Vec::new(),
            });
            continue;
        }
        let m = bodies.len();
        let earlier: Vec<Vec<usize>> = (0..m)
            .map(|i| {
                (0..i)
                    .filter(|&j| !opts.refine || consistent(&atoms, &bodies[j], &bodies[i]))
                    .collect()
            })
            .collect();
        let mut needed = vec![false; m];
        for js in &earlier {
            for &j in js {
                needed[j] = true;
            }
        }
        let time = atoms.time(h);
        let strat = atoms.strat(h);
        let mut ind: Vec<Option<AtomId>> = vec![None; m];
        for (i, body) in bodies.into_iter().enumerate() {
            if !needed[i] && earlier[i].is_empty() {
                rules.push(GroundRule { head: h, body });
                continue;
            }
            let a = Atom::ord(
                "$ind",
                vec![Term::Int(h.0 as i64), Term::Int(i as i64 + 1)],
                Term::Int(time),
            );
            let hi = atoms.intern(a, strat);
            ind[i] = Some(hi);
            rules.push(GroundRule { head: hi, body });
            let mut b: Vec<Lit> = earlier[i]
                .iter()
                .map(|&j| Lit::neg(ind[j].expect("earlier indicators exist")))
                .collect();
            b.push(Lit::pos(hi));
            rules.push(GroundRule { head: h, body: b });
        }
    }
    let levels = ground_levels(atoms.len(), &rules, &atoms)?;
    for r in &rules {
        for l in &r.body {
            if (atoms.strat(l.atom), levels[l.atom.index()])
                >= (atoms.strat(r.head), levels[r.head.index()])
            {
                return Err(Error::Internal(format!(
                    "body atom `{}` is not below head `{}`",
                    atoms.atom(l.atom),
                    atoms.atom(r.head)
                )));
            }
        }
    }
    Ok(DisjointProgram {
        atoms,
        facts: g.facts.clone(),
        rules,
        levels,
        unsatisfiable: g.unsatisfiable,
    })
}

fn is_head_atom(table: &AtomTable, a: AtomId) -> bool {
    matches!(table.atom(a), Atom::Ord { pred, .. } if &**pred == "$head")
}

/// True iff `q` contains some `a` and `-a`, or two equations with the same
/// left-hand side and time but different values.
pub fn query_inconsistent(table: &AtomTable, q: &[Lit]) -> bool {
    !literals_consistent(table, q.iter().copied())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct VeOptions {
    pub cache: bool,
    /// Return 0 for inconsistent subqueries without expanding them.
    pub pruning: bool,
    /// Break ties among maximal literals by a hash of this seed instead of
    /// by atom text.
    pub tie_seed: Option<u64>,
}

impl Default for VeOptions {
    fn default() -> Self {
        VeOptions {
            cache: true,
            pruning: true,
            tie_seed: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VeOutcome {
    pub probability: f64,
    /// Subqueries expanded by resolving their maximal literal.
    pub expansions: u64,
    pub cache_hits: u64,
}

#[derive(Clone, Copy)]
enum Def {
    Fact(f64),
    Rules,
    Undefined,
}

/// Literals are encoded as `rank << 1 | negative`, so a sorted query has
/// its maximal literal last and complementary literals adjacent. With both
/// `a` and `-a` present the negative one is resolved first, which yields
/// exactly zero even without the consistency test.
type Code = u32;
type Query = Vec<Code>;

struct Engine {
    opts: VeOptions,
    atom_of: Vec<AtomId>,
    rank_of: Vec<u32>,
    def: Vec<Def>,
    bodies: Vec<Vec<Query>>,
    eq_key: Vec<Option<u32>>,
    cache: HashMap<Query, f64>,
    expansions: u64,
    cache_hits: u64,
}

struct Frame {
    key: Query,
    children: Vec<(f64, Query)>,
    next: usize,
    coef: f64,
    acc: f64,
}

impl Engine {
    fn new(pd: &DisjointProgram, opts: VeOptions) -> Self {
        let n = pd.atoms.len();
        let tie = |a: AtomId| -> (u64, String) {
            match opts.tie_seed {
                Some(seed) => {
                    let mut h = DefaultHasher::new();
                    (seed, a.0).hash(&mut h);
                    (h.finish(), String::new())
                }
                None => (0, pd.atoms.atom(a).to_string()),
            }
        };
        let mut order: Vec<(crate::stratify::TimedStratum, u32, (u64, String), AtomId)> = (0..n
            as u32)
            .map(AtomId)
            .map(|a| (pd.atoms.strat(a), pd.levels[a.index()], tie(a), a))
            .collect();
        order.sort();
        let atom_of: Vec<AtomId> = order.into_iter().map(|x| x.3).collect();
        let mut rank_of = vec![0u32; n];
        for (r, a) in atom_of.iter().enumerate() {
            rank_of[a.index()] = r as u32;
        }
        let mut def = vec![Def::Undefined; n];
        let mut bodies: Vec<Vec<Query>> = vec![Vec::new(); n];
        for &(p, a) in &pd.facts {
            def[rank_of[a.index()] as usize] = Def::Fact(p);
        }
        for r in &pd.rules {
            let h = rank_of[r.head.index()] as usize;
            if r.body.is_empty() {
                def[h] = Def::Fact(1.0);
                continue;
            }
            if matches!(def[h], Def::Undefined) {
                def[h] = Def::Rules;
            }
            let mut b: Query = r
                .body
                .iter()
                .map(|l| rank_of[l.atom.index()] << 1 | !l.positive as u32)
                .collect();
            b.sort_unstable();
            bodies[h].push(b);
        }
        let eq_key = atom_of.iter().map(|a| pd.atoms.eq_key(*a)).collect();
        Engine {
            opts,
            atom_of,
            rank_of,
            def,
            bodies,
            eq_key,
            cache: HashMap::new(),
            expansions: 0,
            cache_hits: 0,
        }
    }

    fn code(&self, l: Lit) -> Code {
        self.rank_of[l.atom.index()] << 1 | !l.positive as u32
    }

    fn inconsistent(&self, q: &[Code]) -> bool {
        if q.windows(2).any(|w| w[0] >> 1 == w[1] >> 1) {
            return true;
        }
        let mut eqs: Vec<(u32, u32)> = q
            .iter()
            .filter(|c| *c & 1 == 0)
            .filter_map(|c| self.eq_key[(c >> 1) as usize].map(|k| (k, c >> 1)))
            .collect();
        eqs.sort_unstable();
        eqs.windows(2).any(|w| w[0].0 == w[1].0 && w[0].1 != w[1].1)
    }

    /// The value of `q` if it is known without expansion.
    fn quick(&mut self, q: &Query) -> Option<f64> {
        if q.is_empty() {
            return Some(1.0);
        }
        if self.opts.pruning && self.inconsistent(q) {
            return Some(0.0);
        }
        if self.opts.cache {
            if let Some(&v) = self.cache.get(q) {
                self.cache_hits += 1;
                return Some(v);
            }
        }
        None
    }

    fn expand(&mut self, q: Query) -> Frame {
        self.expansions += 1;
        let mut rest = q.clone();
        let l = rest.pop().expect("expanded queries are non-empty");
        let rank = (l >> 1) as usize;
        let children = if l & 1 == 1 {
            let with = union(&rest, &[l & !1]);
            vec![(1.0, rest), (-1.0, with)]
        } else {
            match self.def[rank] {
                Def::Fact(p) => vec![(p, rest)],
                Def::Undefined => Vec::new(),
                Def::Rules => self.bodies[rank]
                    .iter()
                    .map(|b| (1.0, union(&rest, b)))
                    .collect(),
            }
        };
        Frame {
            key: q,
            children,
            next: 0,
            coef: 0.0,
            acc: 0.0,
        }
    }

    fn run(&mut self, q: Query) -> f64 {
        if let Some(v) = self.quick(&q) {
            return v;
        }
        let mut stack = vec![self.expand(q)];
        loop {
            let top = stack.last_mut().expect("stack is non-empty");
            if top.next < top.children.len() {
                let (c, child) = std::mem::take(&mut top.children[top.next]);
                top.next += 1;
                match self.quick(&child) {
                    Some(v) => stack.last_mut().unwrap().acc += c * v,
                    None => {
                        stack.last_mut().unwrap().coef = c;
                        let f = self.expand(child);
                        stack.push(f);
                    }
                }
                continue;
            }
            let done = stack.pop().unwrap();
            if self.opts.cache {
                self.cache.insert(done.key, done.acc);
            }
            match stack.last_mut() {
                Some(parent) => parent.acc += parent.coef * done.acc,
                None => return done.acc,
            }
        }
    }
}

fn union(a: &[Code], b: &[Code]) -> Query {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

/// `P(q)` in the disjoint program together with expansion statistics.
pub fn ve_with(pd: &DisjointProgram, q: &[Lit], opts: VeOptions) -> Result<VeOutcome> {
    if let Some(l) = q.iter().find(|l| l.atom.index() >= pd.atoms.len()) {
        return Err(Error::Internal(format!(
            "query atom {} is not in the program",
            l.atom.0
        )));
    }
    if pd.unsatisfiable {
        return Ok(VeOutcome {
            probability: 0.0,
            expansions: 0,
            cache_hits: 0,
        });
    }
    let mut e = Engine::new(pd, opts);
    let mut query: Query = q.iter().map(|l| e.code(*l)).collect();
    query.sort_unstable();
    query.dedup();
    let p = e.run(query);
    debug_assert!(e.atom_of.len() == pd.atoms.len());
    Ok(VeOutcome {
        probability: p.clamp(0.0, 1.0),
        expansions: e.expansions,
        cache_hits: e.cache_hits,
    })
}

/// `P(q)` in the disjoint program with caching and pruning on.
pub fn ve_probability(pd: &DisjointProgram, q: &[Lit]) -> Result<f64> {
    Ok(ve_with(pd, q, VeOptions::default())?.probability)
}
