//! Query-guided bottom-up grounding along the timed strata.

pub mod atoms;
pub mod body;
pub mod hitting;
pub mod matcher;
pub mod normal;

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet, VecDeque};
use std::fmt::Write as _;

pub use atoms::{consistent, literals_consistent, AtomId, AtomTable, Lit, RegressedQuery};
pub use body::{ground_body, ground_negations, intern_user, simplify};
pub use hitting::hitting_sets;
pub use matcher::{match_atoms, matchers, Domain, Match};
pub use normal::{eval_head, head_cases, head_strat, normalize, normalize_head, GroundRule, Shape};

use crate::builtins::{eval_atom, eval_ordinary_atom};
use crate::error::{Error, Result};
use crate::stratify::{check_sbtp, Analysis, Stratification, TimedStratum};
use crate::syntax::{Atom, Head, Literal, Pred, Program, Sign, Substitute, Substitution};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GroundOptions {
    /// Skip rule instances whose body is inconsistent with the regressed
    /// query, and prune them again after each stratum.
    pub guided: bool,
    /// Extend the query by goal regression after each stratum.
    pub regression: bool,
}

impl Default for GroundOptions {
    fn default() -> Self {
        GroundOptions {
            guided: true,
            regression: true,
        }
    }
}

impl GroundOptions {
    pub fn unguided() -> Self {
        GroundOptions {
            guided: false,
            regression: false,
        }
    }
}

/// A ground rule instance before head normalization, after grounding its
/// negative elements.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroundInstance {
    pub rule: usize,
    pub group: usize,
    pub head: Head,
    pub body: Vec<Lit>,
    pub positive: Vec<AtomId>,
    pub strat: TimedStratum,
}

/// Output of grounding: a normal program over interned atoms.
#[derive(Clone, Debug)]
pub struct GroundProgram {
    pub atoms: AtomTable,
    /// Probabilistic facts `pr :: a` with `0 < pr < 1`, pairwise distinct.
    pub facts: Vec<(f64, AtomId)>,
    /// Normal rules; empty bodies are deterministic facts.
    pub rules: Vec<GroundRule>,
    pub instances: Vec<GroundInstance>,
    pub strata: Stratification,
    pub domain: Domain,
    pub regressed: Vec<Lit>,
    /// The regressed query became inconsistent: it has probability zero.
    pub unsatisfiable: bool,
    pub eot: i64,
}

impl GroundProgram {
    pub fn rule_count(&self) -> usize {
        self.rules.len() + self.facts.len()
    }

    /// Ground instances as text, one clause per line, ordered by timed
    /// stratum and then lexicographically.
    pub fn instances_text(&self) -> String {
        let mut lines: Vec<(TimedStratum, String)> = self
            .instances
            .iter()
            .map(|i| {
                let text = if i.body.is_empty() {
                    format!("{}.", i.head)
                } else {
                    format!("{} :- {}.", i.head, self.atoms.body_string(&i.body))
                };
                (i.strat, text)
            })
            .collect();
        lines.sort();
        lines.dedup();
        let mut out = String::new();
        for (_, l) in lines {
            out.push_str(&l);
            out.push('\n');
        }
        out
    }

    /// The normal program as text: probabilistic facts first, then rules.
    pub fn normal_text(&self) -> String {
        let mut facts: Vec<(TimedStratum, String)> = self
            .facts
            .iter()
            .map(|(p, a)| {
                (
                    self.atoms.strat(*a),
                    format!("{p} :: {}.", self.atoms.atom(*a)),
                )
            })
            .collect();
        facts.sort();
        let mut rules: Vec<(TimedStratum, String)> = self
            .rules
            .iter()
            .map(|r| {
                let text = if r.body.is_empty() {
                    format!("{}.", self.atoms.atom(r.head))
                } else {
                    format!(
                        "{} :- {}.",
                        self.atoms.atom(r.head),
                        self.atoms.body_string(&r.body)
                    )
                };
                (self.atoms.strat(r.head), text)
            })
            .collect();
        rules.sort();
        let mut out = String::new();
        for (_, l) in facts.into_iter().chain(rules) {
            let _ = writeln!(out, "{l}");
        }
        out
    }

    /// Instance identities without their negative parts, for comparing
    /// groundings computed over different domains.
    pub fn instance_keys(&self) -> BTreeSet<(usize, String, Vec<String>)> {
        self.instances
            .iter()
            .map(|i| {
                let pos = i
                    .positive
                    .iter()
                    .map(|a| self.atoms.atom(*a).to_string())
                    .collect();
                (i.rule, i.head.to_string(), pos)
            })
            .collect()
    }

    /// Look up an interned atom, evaluating it first.
    pub fn atom_id(&self, a: &Atom) -> Option<AtomId> {
        eval_ordinary_atom(a).ok().and_then(|g| self.atoms.get(&g))
    }
}

/// Ground levels: 0 for atoms without rules, otherwise one more than the
/// highest level in any body. Fails on a positive cycle.
pub fn ground_levels(n: usize, rules: &[GroundRule], table: &AtomTable) -> Result<Vec<u32>> {
    let mut by_head: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (i, r) in rules.iter().enumerate() {
        by_head[r.head.index()].push(i);
    }
    let mut level: Vec<Option<u32>> = vec![None; n];
    let mut on_stack = vec![false; n];
    for start in 0..n {
        if level[start].is_some() {
            continue;
        }
        // Iterative depth-first search over (atom, rule index, literal index, best level).
        let mut stack: Vec<(usize, usize, usize, u32)> = vec![(start, 0, 0, 0)];
        on_stack[start] = true;
        while let Some(top) = stack.len().checked_sub(1) {
            let (a, ri, li, best) = stack[top];
            if ri == by_head[a].len() {
                let l = if by_head[a].is_empty() { 0 } else { best + 1 };
                level[a] = Some(l);
                on_stack[a] = false;
                stack.pop();
                if let Some(parent) = stack.last_mut() {
                    parent.3 = parent.3.max(l);
                }
                continue;
            }
            let body = &rules[by_head[a][ri]].body;
            if li == body.len() {
                stack[top] = (a, ri + 1, 0, best);
                continue;
            }
            stack[top].2 += 1;
            let b = body[li].atom.index();
            match level[b] {
                Some(l) => stack[top].3 = best.max(l),
                None if on_stack[b] => {
                    return Err(Error::GroundCycle(table.atom(AtomId(b as u32)).to_string()));
                }
                None => {
                    on_stack[b] = true;
                    stack.push((b, 0, 0, 0));
                }
            }
        }
    }
    Ok(level.into_iter().map(|l| l.unwrap_or(0)).collect())
}

/// One-step regression iterated to a fixpoint: every positive query atom
/// with rules gains the literals common to all of its rule bodies.
pub fn regress(q: &mut RegressedQuery, table: &AtomTable, rules: &[GroundRule]) -> bool {
    let mut by_head: HashMap<AtomId, Vec<&[Lit]>> = HashMap::new();
    for r in rules {
        by_head.entry(r.head).or_default().push(&r.body);
    }
    let mut done: HashSet<AtomId> = HashSet::new();
    let mut grew = false;
    loop {
        let todo: Vec<AtomId> = q
            .literals()
            .filter(|l| l.positive && !done.contains(&l.atom))
            .map(|l| l.atom)
            .collect();
        if todo.is_empty() {
            return grew;
        }
        for a in todo {
            done.insert(a);
            if let Some(bodies) = by_head.get(&a) {
                for l in intersect(bodies.iter().copied()) {
                    grew |= q.insert(table, l);
                }
            }
        }
    }
}

fn intersect<'a>(bodies: impl Iterator<Item = &'a [Lit]>) -> BTreeSet<Lit> {
    let mut acc: Option<BTreeSet<Lit>> = None;
    for b in bodies {
        let s: BTreeSet<Lit> = b.iter().copied().collect();
        acc = Some(match acc {
            None => s,
            Some(a) => a.intersection(&s).copied().collect(),
        });
        if acc.as_ref().is_some_and(BTreeSet::is_empty) {
            break;
        }
    }
    acc.unwrap_or_default()
}

/// Evaluate and intern a ground query literal. Atoms of predicates the
/// program does not mention sit above every stratum.
pub fn intern_query_literal(
    table: &mut AtomTable,
    st: &Stratification,
    l: &Literal,
) -> Result<Lit> {
    if !l.atom.is_ground() {
        return Err(Error::NonGroundQuery(l.atom.to_string()));
    }
    let g = eval_ordinary_atom(&l.atom)?;
    let id = match crate::stratify::strat(&g, st) {
        Ok(s) => table.intern(g, s),
        Err(Error::UnknownPredicate(_)) => {
            let time = g.time_value().unwrap_or(0);
            table.intern(
                g,
                TimedStratum {
                    time,
                    stratum: st.len(),
                },
            )
        }
        Err(e) => return Err(e),
    };
    Ok(match l.sign {
        Sign::Positive => Lit::pos(id),
        Sign::Negative => Lit::neg(id),
    })
}

struct Candidate {
    rule: usize,
    subst: Substitution,
    positive: Vec<AtomId>,
    head: Head,
    strat: TimedStratum,
}

struct Group {
    rule: usize,
    head: Head,
    strat: TimedStratum,
    positive: Vec<AtomId>,
    bodies: Vec<Vec<Lit>>,
    body_alive: Vec<bool>,
    alive: bool,
    shape: Shape,
    produced: Vec<AtomId>,
}

#[derive(Clone, Copy)]
enum Def {
    Body,
    Static(usize),
}

struct Grounder<'a> {
    program: &'a Program,
    strata: &'a Stratification,
    eot: i64,
    opts: GroundOptions,
    table: AtomTable,
    domain: Domain,
    delta: VecDeque<AtomId>,
    seen: HashSet<(usize, Vec<AtomId>)>,
    pending: BTreeMap<TimedStratum, Vec<Candidate>>,
    groups: Vec<Group>,
    groups_at: HashMap<TimedStratum, Vec<usize>>,
    support: HashMap<AtomId, usize>,
    users: HashMap<AtomId, Vec<usize>>,
    defining: HashMap<AtomId, Vec<(usize, Def)>>,
    positions: HashMap<Pred, Vec<(usize, usize)>>,
    r: RegressedQuery,
    regressed_done: HashSet<AtomId>,
    unsat: bool,
    current: TimedStratum,
}

impl<'a> Grounder<'a> {
    fn new(
        program: &'a Program,
        strata: &'a Stratification,
        eot: i64,
        opts: GroundOptions,
    ) -> Self {
        let mut positions: HashMap<Pred, Vec<(usize, usize)>> = HashMap::new();
        for (ri, rule) in program.rules.iter().enumerate() {
            for (pi, a) in rule
                .body
                .pos
                .iter()
                .filter(|a| !a.is_interpreted())
                .enumerate()
            {
                if let Some(p) = a.pred() {
                    positions.entry(p).or_default().push((ri, pi));
                }
            }
        }
        Grounder {
            program,
            strata,
            eot,
            opts,
            table: AtomTable::new(),
            domain: Domain::new(),
            delta: VecDeque::new(),
            seen: HashSet::new(),
            pending: BTreeMap::new(),
            groups: Vec::new(),
            groups_at: HashMap::new(),
            support: HashMap::new(),
            users: HashMap::new(),
            defining: HashMap::new(),
            positions,
            r: RegressedQuery::new(),
            regressed_done: HashSet::new(),
            unsat: false,
            current: TimedStratum {
                time: 0,
                stratum: 0,
            },
        }
    }

    fn candidate(&mut self, rule: usize, m: Match) -> Result<()> {
        if !self.seen.insert((rule, m.atoms.clone())) {
            return Ok(());
        }
        let head = eval_head(&self.program.rules[rule].head.apply(&m.subst))?;
        match head.time().as_int() {
            Some(t) if t <= self.eot => {}
            Some(_) => return Ok(()),
            None => {
                return Err(Error::Sort(format!(
                    "head time of `{head}` is not an integer"
                )))
            }
        }
        let strat = head_strat(&head, self.strata)?;
        let c = Candidate {
            rule,
            subst: m.subst,
            positive: m.atoms,
            head,
            strat,
        };
        if strat == self.current {
            self.process(c)
        } else if strat > self.current {
            self.pending.entry(strat).or_default().push(c);
            Ok(())
        } else {
            Err(Error::Internal(format!(
                "instance of `{}` at {} below the current stratum {}",
                c.head, strat, self.current
            )))
        }
    }

    /// Rules without ordinary positive atoms are instantiated once.
    fn seed(&mut self) -> Result<()> {
        for (ri, rule) in self.program.rules.iter().enumerate() {
            if rule.body.pos.iter().any(|a| !a.is_interpreted()) {
                continue;
            }
            let mut holds = true;
            for c in &rule.body.pos {
                if !c.is_ground() {
                    return Err(Error::Flounder(c.to_string()));
                }
                holds &= eval_atom(c)?;
            }
            if holds {
                self.candidate(
                    ri,
                    Match {
                        subst: Substitution::new(),
                        atoms: Vec::new(),
                    },
                )?;
            }
        }
        Ok(())
    }

    fn discover(&mut self, a: AtomId) -> Result<()> {
        let Some(p) = self.table.atom(a).pred() else {
            return Ok(());
        };
        let Some(spots) = self.positions.get(&p).cloned() else {
            return Ok(());
        };
        for (ri, pi) in spots {
            let rule = &self.program.rules[ri];
            let ms = match_atoms(
                &rule.body.pos,
                &self.table,
                &self.domain,
                &|_| true,
                Some((pi, a)),
                &Substitution::new(),
            )?;
            for m in ms {
                self.candidate(ri, m)?;
                if self.unsat {
                    return Ok(());
                }
            }
        }
        Ok(())
    }

    fn process(&mut self, c: Candidate) -> Result<()> {
        let rule = &self.program.rules[c.rule];
        let neg: Vec<Vec<Atom>> = rule
            .body
            .neg
            .iter()
            .map(|e| e.iter().map(|a| a.apply(&c.subst)).collect())
            .collect();
        let negs = ground_negations(
            &neg,
            &mut self.table,
            self.strata,
            &self.domain,
            Some(c.strat),
        )?;
        let mut bodies: Vec<Vec<Lit>> = Vec::new();
        for n in negs {
            let mut lits: Vec<Lit> = c.positive.iter().copied().map(Lit::pos).collect();
            lits.extend(n);
            if let Some(b) = simplify(lits) {
                if !bodies.contains(&b) {
                    bodies.push(b);
                }
            }
        }
        if bodies.is_empty() {
            return Ok(());
        }
        let body_alive: Vec<bool> = if self.opts.guided {
            bodies
                .iter()
                .map(|b| self.r.consistent_with(&self.table, b))
                .collect()
        } else {
            vec![true; bodies.len()]
        };
        if !body_alive.iter().any(|x| *x) {
            return Ok(());
        }
        let k = self.groups.len();
        let shape = normalize(k, &c.head, rule.is_fact(), &mut self.table, self.strata)?;
        if shape == Shape::Never {
            return Ok(());
        }
        let produced = shape.produced(&self.table);
        for &a in &produced {
            debug_assert!(self.table.strat(a) >= c.strat);
            *self.support.entry(a).or_insert(0) += 1;
            if self.domain.insert(&self.table, a) {
                self.delta.push_back(a);
            }
        }
        for &a in &c.positive {
            self.users.entry(a).or_default().push(k);
        }
        if let Some(h) = shape.body_head() {
            self.defining.entry(h).or_default().push((k, Def::Body));
        }
        if let Shape::Cases { rules, .. } = &shape {
            for (j, r) in rules.iter().enumerate() {
                self.defining
                    .entry(r.head)
                    .or_default()
                    .push((k, Def::Static(j)));
            }
        }
        self.groups_at.entry(c.strat).or_default().push(k);
        self.groups.push(Group {
            rule: c.rule,
            head: c.head,
            strat: c.strat,
            positive: c.positive,
            bodies,
            body_alive,
            alive: true,
            shape,
            produced,
        });
        Ok(())
    }

    /// Literals common to all live rule bodies for `a`, if it has rules.
    fn intersection(&self, a: AtomId) -> Option<BTreeSet<Lit>> {
        let defs = self.defining.get(&a)?;
        let mut bodies: Vec<&[Lit]> = Vec::new();
        for &(g, def) in defs {
            let group = &self.groups[g];
            if !group.alive {
                continue;
            }
            match def {
                Def::Body => {
                    for (b, alive) in group.bodies.iter().zip(&group.body_alive) {
                        if *alive {
                            bodies.push(b);
                        }
                    }
                }
                Def::Static(j) => {
                    if let Shape::Cases { rules, .. } = &group.shape {
                        bodies.push(&rules[j].body);
                    }
                }
            }
        }
        if bodies.is_empty() {
            return None;
        }
        Some(intersect(bodies.into_iter()))
    }

    fn regress_stratum(&mut self, s: TimedStratum) -> bool {
        let mut grew = false;
        loop {
            let todo: Vec<AtomId> = self
                .r
                .literals()
                .filter(|l| {
                    l.positive
                        && !self.regressed_done.contains(&l.atom)
                        && self.table.strat(l.atom) <= s
                })
                .map(|l| l.atom)
                .collect();
            let mut changed = false;
            for a in todo {
                let common = self.intersection(a);
                if self.table.strat(a) < s {
                    self.regressed_done.insert(a);
                }
                for l in common.into_iter().flatten() {
                    changed |= self.r.insert(&self.table, l);
                }
            }
            if self.r.is_inconsistent() {
                self.unsat = true;
                return true;
            }
            grew |= changed;
            if !changed {
                return grew;
            }
        }
    }

    fn kill_group(&mut self, g: usize) {
        let mut work = vec![g];
        while let Some(g) = work.pop() {
            if !self.groups[g].alive {
                continue;
            }
            self.groups[g].alive = false;
            for a in self.groups[g].produced.clone() {
                let n = self
                    .support
                    .get_mut(&a)
                    .expect("produced atoms have support");
                *n -= 1;
                if *n == 0 {
                    self.domain.remove(&self.table, a);
                    if let Some(us) = self.users.get(&a) {
                        work.extend(us.iter().copied().filter(|u| self.groups[*u].alive));
                    }
                }
            }
        }
    }

    /// Remove instances at `s` whose bodies clash with the regressed query.
    fn prune_stratum(&mut self, s: TimedStratum) -> bool {
        let Some(gs) = self.groups_at.get(&s).cloned() else {
            return false;
        };
        let mut killed = false;
        for g in gs {
            if !self.groups[g].alive {
                continue;
            }
            let mut any_alive = false;
            for j in 0..self.groups[g].bodies.len() {
                if !self.groups[g].body_alive[j] {
                    continue;
                }
                if self
                    .r
                    .consistent_with(&self.table, &self.groups[g].bodies[j])
                {
                    any_alive = true;
                } else {
                    self.groups[g].body_alive[j] = false;
                    killed = true;
                }
            }
            if !any_alive {
                self.kill_group(g);
            }
        }
        killed
    }

    fn run(&mut self, query: &[Literal]) -> Result<()> {
        for l in query {
            let lit = intern_query_literal(&mut self.table, self.strata, l)?;
            self.r.insert(&self.table, lit);
        }
        if self.opts.guided && self.r.is_inconsistent() {
            self.unsat = true;
            return Ok(());
        }
        let m = self.strata.len();
        for n in 0..=self.eot {
            for s in 0..m {
                let here = TimedStratum {
                    time: n,
                    stratum: s,
                };
                self.current = here;
                if n == 0 && s == 0 {
                    self.seed()?;
                }
                for c in self.pending.remove(&here).unwrap_or_default() {
                    if c.positive.iter().all(|a| self.domain.contains(*a)) {
                        self.process(c)?;
                    }
                }
                while let Some(a) = self.delta.pop_front() {
                    self.discover(a)?;
                }
                if self.opts.regression {
                    loop {
                        let grew = self.regress_stratum(here);
                        if self.unsat {
                            return Ok(());
                        }
                        let killed = self.opts.guided && self.prune_stratum(here);
                        if !grew && !killed {
                            break;
                        }
                    }
                }
            }
        }
        Ok(())
    }

    fn finish(self, strata: Stratification) -> Result<GroundProgram> {
        let mut rules = Vec::new();
        let mut facts: Vec<(f64, AtomId)> = Vec::new();
        let mut instances = Vec::new();
        for (k, g) in self.groups.iter().enumerate() {
            if !g.alive {
                continue;
            }
            let bodies: Vec<Vec<Lit>> = g
                .bodies
                .iter()
                .zip(&g.body_alive)
                .filter(|(_, a)| **a)
                .map(|(b, _)| b.clone())
                .collect();
            g.shape.emit(&bodies, &mut rules, &mut facts);
            for b in bodies {
                instances.push(GroundInstance {
                    rule: g.rule,
                    group: k,
                    head: g.head.clone(),
                    body: b,
                    positive: g.positive.clone(),
                    strat: g.strat,
                });
            }
        }
        facts.sort_by(|a, b| a.1.cmp(&b.1).then(a.0.total_cmp(&b.0)));
        facts.dedup();
        for w in facts.windows(2) {
            if w[0].1 == w[1].1 {
                return Err(Error::FactConflict(self.table.atom(w[0].1).to_string()));
            }
        }
        let fact_atoms: HashSet<AtomId> = facts.iter().map(|f| f.1).collect();
        if let Some(r) = rules.iter().find(|r| fact_atoms.contains(&r.head)) {
            return Err(Error::FactConflict(self.table.atom(r.head).to_string()));
        }
        rules.sort();
        rules.dedup();
        ground_levels(self.table.len(), &rules, &self.table)?;
        Ok(GroundProgram {
            atoms: self.table,
            facts,
            rules,
            instances,
            strata,
            domain: self.domain,
            regressed: self.r.literals().collect(),
            unsatisfiable: self.unsat,
            eot: self.eot,
        })
    }
}

/// Ground an SBTP program for the ground query literals `query` up to time
/// `eot`.
pub fn ground_program(
    p: &Program,
    query: &[Literal],
    eot: i64,
    opts: GroundOptions,
) -> Result<GroundProgram> {
    let analysis = check_sbtp(p)?;
    ground_analyzed(p, &analysis, query, eot, opts)
}

pub fn ground_analyzed(
    p: &Program,
    analysis: &Analysis,
    query: &[Literal],
    eot: i64,
    opts: GroundOptions,
) -> Result<GroundProgram> {
    if eot < 0 {
        return Err(Error::Query(format!(
            "end of time must be non-negative, got {eot}"
        )));
    }
    let mut g = Grounder::new(p, &analysis.strata, eot, opts);
    g.run(query)?;
    g.finish(analysis.strata.clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{parse_atom, parse_program};

    const INTRO: &str =
        "0.5 :: q(0). 0.5 :: q(1). 0.5 :: q(2). 0.5 :: p(T) :- q(T), \\+ (q(S), S < T).";

    const HMM: &str = "
        state ~ [[rainy, 0.6], [sunny, 0.4]] @ 0.
        obs ~ [3..30] @ 0 :- state=rainy @ 0.
        obs ~ [0..5] @ 0 :- state=sunny @ 0.
        state ~ [[rainy, 0.7], [sunny, 0.3]] @ T+1 :- state=rainy @ T.
        state ~ [[rainy, 0.4], [sunny, 0.6]] @ T+1 :- state=sunny @ T.
        obs ~ [R+3..R+30] @ T :- state=rainy @ T, T > 0, obs=R @ T-1.
        obs ~ [R..R+5] @ T :- state=sunny @ T, T > 0, obs=R @ T-1.
    ";

    fn lits(src: &[&str]) -> Vec<Literal> {
        src.iter()
            .map(|s| Literal {
                sign: Sign::Positive,
                atom: parse_atom(s).unwrap(),
            })
            .collect()
    }

    #[test]
    fn intro_grounding() {
        let g = ground_program(
            &parse_program(INTRO).unwrap(),
            &[],
            0,
            GroundOptions::default(),
        )
        .unwrap();
        assert_eq!(
            g.instances_text(),
            "0.5 :: q(0).\n0.5 :: q(1).\n0.5 :: q(2).\n\
             0.5 :: p(0) :- q(0).\n0.5 :: p(1) :- q(1), -q(0).\n0.5 :: p(2) :- q(2), -q(0), -q(1).\n"
        );
        assert_eq!(g.facts.len(), 6);
    }

    #[test]
    fn hmm_rainy_instances_pruned() {
        let p = parse_program(HMM).unwrap();
        let q = lits(&["obs=0@0", "obs=4@1", "obs=20@2", "obs=24@3"]);
        let g = ground_program(&p, &q, 3, GroundOptions::default()).unwrap();
        let text = g.instances_text();
        assert!(!text.contains(":- state=rainy."), "{text}");
        assert!(text.contains("obs ~ [0, 1, 2, 3, 4, 5] :- state=sunny."));
        let sunny0 = g.atom_id(&parse_atom("state=sunny@0").unwrap()).unwrap();
        assert!(g.regressed.contains(&Lit::pos(sunny0)));
        let rainy2 = g.atom_id(&parse_atom("state=rainy@2").unwrap()).unwrap();
        assert!(g.regressed.contains(&Lit::pos(rainy2)));
        let u = ground_program(&p, &q, 3, GroundOptions::unguided()).unwrap();
        assert!(g.instance_keys().is_subset(&u.instance_keys()));
        assert!(g.rule_count() * 2 < u.rule_count());
    }

    #[test]
    fn levels_and_cycles() {
        let mut t = AtomTable::new();
        let s = TimedStratum {
            time: 0,
            stratum: 0,
        };
        let a = t.intern(parse_atom("a").unwrap(), s);
        let b = t.intern(parse_atom("b").unwrap(), s);
        let rules = vec![GroundRule {
            head: a,
            body: vec![Lit::neg(b)],
        }];
        assert_eq!(ground_levels(2, &rules, &t).unwrap(), vec![1, 0]);
        let cyc = vec![
            GroundRule {
                head: a,
                body: vec![Lit::pos(b)],
            },
            GroundRule {
                head: b,
                body: vec![Lit::pos(a)],
            },
        ];
        assert!(matches!(
            ground_levels(2, &cyc, &t),
            Err(Error::GroundCycle(_))
        ));
    }

    #[test]
    fn regression_intersects_bodies() {
        let mut t = AtomTable::new();
        let s = TimedStratum {
            time: 0,
            stratum: 0,
        };
        let [a, b, c, d] = ["a", "b", "c", "d"].map(|x| t.intern(parse_atom(x).unwrap(), s));
        let rules = vec![
            GroundRule {
                head: a,
                body: vec![Lit::pos(b), Lit::pos(c)],
            },
            GroundRule {
                head: a,
                body: vec![Lit::pos(b), Lit::pos(d)],
            },
        ];
        let mut q = RegressedQuery::new();
        q.insert(&t, Lit::pos(a));
        assert!(regress(&mut q, &t, &rules));
        assert!(q.contains(Lit::pos(b)));
        assert!(!q.contains(Lit::pos(c)));
        let mut q = RegressedQuery::new();
        q.insert(&t, Lit::pos(d));
        assert!(!regress(&mut q, &t, &rules));
    }

    #[test]
    fn eot_caps_grounding() {
        let p = parse_program("p @ 0. p @ T+1 :- p @ T.").unwrap();
        let g = ground_program(&p, &[], 2, GroundOptions::default()).unwrap();
        assert_eq!(g.domain.len(), 3);
        assert!(g.atom_id(&parse_atom("p@3").unwrap()).is_none());
    }

    #[test]
    fn fact_conflicts() {
        let p = parse_program("0.5 :: p. q. p :- q.").unwrap();
        assert!(matches!(
            ground_program(&p, &[], 0, GroundOptions::default()),
            Err(Error::FactConflict(_))
        ));
        let p = parse_program("0.5 :: p. 0.4 :: p.").unwrap();
        assert!(matches!(
            ground_program(&p, &[], 0, GroundOptions::default()),
            Err(Error::FactConflict(_))
        ));
        let p = parse_program("0.5 :: p. 0.5 :: p.").unwrap();
        assert_eq!(
            ground_program(&p, &[], 0, GroundOptions::default())
                .unwrap()
                .facts
                .len(),
            1
        );
    }
}
