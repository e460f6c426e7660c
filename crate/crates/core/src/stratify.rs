//! Stratification by time and by predicates.
//!
//! A rule is time constrained when some positive body atom (the pivot) has a
//! variable time term `n` such that every other positive atom is at time
//! `<= n`, the head is at `n` or later, and every atom under negation is at
//! time `<= n`. Variable-free-time rules use their head as the anchor.

use std::cmp::Reverse;
use std::collections::{BTreeSet, BinaryHeap, HashMap};
use std::fmt;

use petgraph::algo::tarjan_scc;
use petgraph::graph::{DiGraph, NodeIndex};

use crate::builtins::eval_term;
use crate::error::{Error, Result};
use crate::syntax::{Atom, BinOp, CmpOp, Pred, Program, Rule, Symbol, Term};

/// Head time relative to the anchor.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HeadCase {
    /// (ii)-(a): head at the anchor time.
    Now,
    /// (ii)-(b): head strictly later; the rule adds no call-graph edges.
    Future,
}

/// Time of an atom under negation relative to the anchor.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NegCase {
    /// (iii)-(a): may be at the anchor time; contributes a negative edge.
    Now,
    /// (iii)-(b): strictly earlier; already time-stratified.
    Past,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Anchor {
    /// Index into `body.pos` of the chosen pivot.
    Pivot(usize),
    /// No pivot variable; all positive time terms are ground.
    Head,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RuleTiming {
    pub anchor: Anchor,
    pub head: HeadCase,
    /// Per negative element, per atom; `None` for interpreted atoms.
    pub neg: Vec<Vec<Option<NegCase>>>,
}

/// Per-rule pivot and case labels; `None` for facts.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PivotAssignment {
    pub rules: Vec<Option<RuleTiming>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EdgeSign {
    Positive,
    Negative,
}

/// Predicate call graph; edges run from body predicate to head predicate.
#[derive(Clone, Debug, Default)]
pub struct CallGraph {
    pub preds: Vec<Pred>,
    pub edges: BTreeSet<(usize, usize, EdgeSign)>,
    index: HashMap<Pred, usize>,
}

impl CallGraph {
    fn node(&mut self, p: Pred) -> usize {
        if let Some(&i) = self.index.get(&p) {
            return i;
        }
        self.preds.push(p.clone());
        self.index.insert(p, self.preds.len() - 1);
        self.preds.len() - 1
    }

    pub fn has_edge(&self, from: &Pred, to: &Pred, sign: EdgeSign) -> bool {
        match (self.index.get(from), self.index.get(to)) {
            (Some(&a), Some(&b)) => self.edges.contains(&(a, b, sign)),
            _ => false,
        }
    }

    pub fn contains(&self, p: &Pred) -> bool {
        self.index.contains_key(p)
    }
}

/// Linearized predicate strata `s_1 < ... < s_m`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Stratification {
    pub strata: Vec<Vec<Pred>>,
    pub index: HashMap<Pred, usize>,
}

impl Stratification {
    pub fn stratum_of(&self, p: &Pred) -> Option<usize> {
        self.index.get(p).copied()
    }

    pub fn len(&self) -> usize {
        self.strata.len()
    }

    pub fn is_empty(&self) -> bool {
        self.strata.is_empty()
    }
}

/// `(time, predicate stratum)`, ordered lexicographically.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TimedStratum {
    pub time: i64,
    pub stratum: usize,
}

impl fmt::Display for TimedStratum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, s{})", self.time, self.stratum + 1)
    }
}

/// Timed stratum of a ground ordinary or equation atom.
pub fn strat(a: &Atom, st: &Stratification) -> Result<TimedStratum> {
    let p = a
        .pred()
        .ok_or_else(|| Error::Sort(format!("`{a}` has no timed stratum")))?;
    let stratum = st
        .stratum_of(&p)
        .ok_or_else(|| Error::UnknownPredicate(p.to_string()))?;
    let time = a
        .time_value()
        .ok_or_else(|| Error::Sort(format!("`{a}` has no ground integer time")))?;
    Ok(TimedStratum { time, stratum })
}

// ---------------------------------------------------------------------------
// Time constraints

#[derive(Clone, Debug)]
enum Reference {
    Var(Symbol),
    Const(i64),
}

/// Closed interval of possible `t - reference`; `None` bounds are unbounded.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct Offset {
    lo: Option<i64>,
    hi: Option<i64>,
}

impl Offset {
    fn exact(k: i64) -> Self {
        Offset {
            lo: Some(k),
            hi: Some(k),
        }
    }

    fn meet(self, o: Offset) -> Offset {
        let lo = match (self.lo, o.lo) {
            (Some(a), Some(b)) => Some(a.max(b)),
            (a, b) => a.or(b),
        };
        let hi = match (self.hi, o.hi) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        };
        Offset { lo, hi }
    }

    fn at_most(self, k: i64) -> bool {
        matches!(self.hi, Some(h) if h <= k)
    }
}

/// Exact offset of `t` from the reference, for `n`, `n+k`, `n-k` and (with a
/// constant reference) ground integer terms.
fn exact_offset(t: &Term, r: &Reference) -> Option<i64> {
    match (t, r) {
        (Term::Var(v), Reference::Var(n)) if v == n => Some(0),
        (Term::Op(BinOp::Add, a, b), _) => match (
            exact_offset(a, r),
            b.as_ref(),
            a.as_ref(),
            exact_offset(b, r),
        ) {
            (Some(k), Term::Int(c), _, _) => Some(k + c),
            (_, _, Term::Int(c), Some(k)) => Some(k + c),
            _ => ground_offset(t, r),
        },
        (Term::Op(BinOp::Sub, a, b), _) => match (exact_offset(a, r), b.as_ref()) {
            (Some(k), Term::Int(c)) => Some(k - c),
            _ => ground_offset(t, r),
        },
        _ => ground_offset(t, r),
    }
}

fn ground_offset(t: &Term, r: &Reference) -> Option<i64> {
    match r {
        Reference::Const(h) if t.is_ground() => eval_term(t).ok()?.as_int().map(|v| v - h),
        _ => None,
    }
}

fn offset(t: &Term, r: &Reference, cmps: &[&Atom]) -> Option<Offset> {
    if let Some(k) = exact_offset(t, r) {
        return Some(Offset::exact(k));
    }
    let Term::Var(tv) = t else { return None };
    let mut acc: Option<Offset> = None;
    for c in cmps {
        let Atom::Cmp { op, lhs, rhs } = c else {
            continue;
        };
        // Normalize to `T op other`.
        let (op, other) = match (lhs, rhs) {
            (Term::Var(v), other) if v == tv => (*op, other),
            (other, Term::Var(v)) if v == tv => (mirror(*op), other),
            _ => continue,
        };
        let Some(k) = exact_offset(other, r) else {
            continue;
        };
        let bound = match op {
            CmpOp::Le => Offset {
                lo: None,
                hi: Some(k),
            },
            CmpOp::Lt => Offset {
                lo: None,
                hi: Some(k - 1),
            },
            CmpOp::Ge => Offset {
                lo: Some(k),
                hi: None,
            },
            CmpOp::Gt => Offset {
                lo: Some(k + 1),
                hi: None,
            },
            CmpOp::Same => Offset::exact(k),
            CmpOp::Ne => continue,
        };
        acc = Some(match acc {
            Some(a) => a.meet(bound),
            None => bound,
        });
    }
    acc
}

fn mirror(op: CmpOp) -> CmpOp {
    match op {
        CmpOp::Lt => CmpOp::Gt,
        CmpOp::Le => CmpOp::Ge,
        CmpOp::Gt => CmpOp::Lt,
        CmpOp::Ge => CmpOp::Le,
        o => o,
    }
}

fn timing_for(
    rule: &Rule,
    r: &Reference,
    anchor: Anchor,
) -> std::result::Result<RuleTiming, String> {
    let body_cmps: Vec<&Atom> = rule
        .body
        .pos
        .iter()
        .filter(|a| a.is_interpreted())
        .collect();
    for (j, b) in rule.body.pos.iter().enumerate() {
        if b.is_interpreted() || anchor == Anchor::Pivot(j) {
            continue;
        }
        let ok = offset(b.time().unwrap(), r, &body_cmps).is_some_and(|o| o.at_most(0));
        if !ok {
            return Err(format!(
                "positive atom `{b}` is not constrained to be no later than the pivot"
            ));
        }
    }
    let head = match anchor {
        Anchor::Head => HeadCase::Now,
        Anchor::Pivot(_) => match exact_offset(rule.head.time(), r) {
            Some(0) => HeadCase::Now,
            Some(k) if k >= 1 => HeadCase::Future,
            _ => {
                return Err(format!(
                    "head time `{}` is neither the pivot time nor later",
                    rule.head.time()
                ))
            }
        },
    };
    let mut neg = Vec::with_capacity(rule.body.neg.len());
    for element in &rule.body.neg {
        let mut cmps = body_cmps.clone();
        cmps.extend(element.iter().filter(|a| a.is_interpreted()));
        let mut cases = Vec::with_capacity(element.len());
        for a in element {
            if a.is_interpreted() {
                cases.push(None);
                continue;
            }
            match offset(a.time().unwrap(), r, &cmps) {
                Some(o) if o.at_most(-1) => cases.push(Some(NegCase::Past)),
                Some(o) if o.at_most(0) => cases.push(Some(NegCase::Now)),
                _ => {
                    return Err(format!(
                        "negated atom `{a}` is not constrained to be no later than the pivot"
                    ))
                }
            }
        }
        neg.push(cases);
    }
    Ok(RuleTiming { anchor, head, neg })
}

fn rule_timing(rule: &Rule) -> Result<RuleTiming> {
    let mut last_reason = String::from("no positive body atom has a variable time term");
    for (i, b) in rule.body.pos.iter().enumerate() {
        if b.is_interpreted() {
            continue;
        }
        let Some(Term::Var(n)) = b.time() else {
            continue;
        };
        match timing_for(rule, &Reference::Var(n.clone()), Anchor::Pivot(i)) {
            Ok(t) => return Ok(t),
            Err(reason) => last_reason = reason,
        }
    }
    let ground_times = rule
        .body
        .pos
        .iter()
        .filter(|a| !a.is_interpreted())
        .all(|a| a.time().is_some_and(Term::is_ground));
    if ground_times {
        if let Some(h) = ground_offset(rule.head.time(), &Reference::Const(0)) {
            match timing_for(rule, &Reference::Const(h), Anchor::Head) {
                Ok(t) => return Ok(t),
                Err(reason) => last_reason = reason,
            }
        }
    }
    Err(Error::NotTimeConstrained {
        line: rule.line,
        rule: rule.to_string(),
        reason: last_reason,
    })
}

/// Find a pivot for every non-fact rule and label its head and negated atoms.
pub fn check_time_constrained(p: &Program) -> Result<PivotAssignment> {
    let rules = p
        .rules
        .iter()
        .map(|r| {
            if r.is_fact() {
                Ok(None)
            } else {
                rule_timing(r).map(Some)
            }
        })
        .collect::<Result<_>>()?;
    Ok(PivotAssignment { rules })
}

/// Call graph ignoring future-head rules and strictly-earlier negated atoms.
pub fn build_call_graph(p: &Program, pa: &PivotAssignment) -> CallGraph {
    let mut g = CallGraph::default();
    for (rule, timing) in p.rules.iter().zip(&pa.rules) {
        let heads: Vec<usize> = rule.head.preds().into_iter().map(|h| g.node(h)).collect();
        let positives: Vec<usize> = rule
            .body
            .pos
            .iter()
            .filter_map(Atom::pred)
            .map(|q| g.node(q))
            .collect();
        let mut negatives = Vec::new();
        for (ei, element) in rule.body.neg.iter().enumerate() {
            for (ai, a) in element.iter().enumerate() {
                let Some(q) = a.pred() else { continue };
                let id = g.node(q);
                let counted = timing.as_ref().is_some_and(|t| {
                    t.head == HeadCase::Now && t.neg[ei][ai] == Some(NegCase::Now)
                });
                if counted {
                    negatives.push(id);
                }
            }
        }
        let Some(t) = timing else { continue };
        if t.head == HeadCase::Future {
            continue;
        }
        for &h in &heads {
            for &b in &positives {
                g.edges.insert((b, h, EdgeSign::Positive));
            }
            for &b in &negatives {
                g.edges.insert((b, h, EdgeSign::Negative));
            }
        }
    }
    g
}

/// Strongly connected components, rejected if a negative edge lies inside
/// one, linearized with ties broken by the least predicate name.
pub fn stratify_graph(g: &CallGraph) -> Result<Stratification> {
    let mut dg: DiGraph<usize, EdgeSign> = DiGraph::new();
    let nodes: Vec<NodeIndex> = (0..g.preds.len()).map(|i| dg.add_node(i)).collect();
    for &(a, b, s) in &g.edges {
        dg.add_edge(nodes[a], nodes[b], s);
    }
    let sccs = tarjan_scc(&dg);
    let mut comp = vec![0usize; g.preds.len()];
    let mut members: Vec<Vec<Pred>> = Vec::with_capacity(sccs.len());
    for (ci, scc) in sccs.iter().enumerate() {
        let mut ps: Vec<Pred> = scc.iter().map(|n| g.preds[dg[*n]].clone()).collect();
        ps.sort();
        for n in scc {
            comp[dg[*n]] = ci;
        }
        members.push(ps);
    }
    for &(a, b, s) in &g.edges {
        if s == EdgeSign::Negative && comp[a] == comp[b] {
            let names: Vec<String> = members[comp[a]].iter().map(|p| p.to_string()).collect();
            return Err(Error::NegationCycle(names.join(", ")));
        }
    }
    let n = members.len();
    let mut indeg = vec![0usize; n];
    let mut succ: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
    for &(a, b, _) in &g.edges {
        let (ca, cb) = (comp[a], comp[b]);
        if ca != cb && succ[ca].insert(cb) {
            indeg[cb] += 1;
        }
    }
    let mut ready: BinaryHeap<Reverse<(Pred, usize)>> = (0..n)
        .filter(|&c| indeg[c] == 0)
        .map(|c| Reverse((members[c][0].clone(), c)))
        .collect();
    let mut st = Stratification::default();
    while let Some(Reverse((_, c))) = ready.pop() {
        let k = st.strata.len();
        for p in &members[c] {
            st.index.insert(p.clone(), k);
        }
        st.strata.push(members[c].clone());
        for &d in &succ[c] {
            indeg[d] -= 1;
            if indeg[d] == 0 {
                ready.push(Reverse((members[d][0].clone(), d)));
            }
        }
    }
    if st.strata.len() != n {
        return Err(Error::Internal(
            "condensation of the call graph is cyclic".into(),
        ));
    }
    Ok(st)
}

/// Full SBTP analysis of a program.
#[derive(Clone, Debug)]
pub struct Analysis {
    pub pivots: PivotAssignment,
    pub graph: CallGraph,
    pub strata: Stratification,
}

pub fn check_sbtp(p: &Program) -> Result<Analysis> {
    let pivots = check_time_constrained(p)?;
    let graph = build_call_graph(p, &pivots);
    let strata = stratify_graph(&graph)?;
    Ok(Analysis {
        pivots,
        graph,
        strata,
    })
}

pub fn stratify(p: &Program) -> Result<Stratification> {
    check_sbtp(p).map(|a| a.strata)
}

impl Analysis {
    /// Stable text report used by the `check` subcommand.
    pub fn report(&self, p: &Program) -> String {
        let mut out = String::from("strata:\n");
        for (i, s) in self.strata.strata.iter().enumerate() {
            let names: Vec<String> = s.iter().map(|p| p.to_string()).collect();
            out.push_str(&format!("  s{}: {}\n", i + 1, names.join(", ")));
        }
        out.push_str("rules:\n");
        for (rule, timing) in p.rules.iter().zip(&self.pivots.rules) {
            out.push_str(&format!("  {rule}\n"));
            let Some(t) = timing else {
                out.push_str("    fact\n");
                continue;
            };
            let pivot = match t.anchor {
                Anchor::Pivot(i) => rule.body.pos[i].to_string(),
                Anchor::Head => "head".to_string(),
            };
            let head = match t.head {
                HeadCase::Now => "(ii)-(a)",
                HeadCase::Future => "(ii)-(b)",
            };
            let negs: Vec<&str> = t
                .neg
                .iter()
                .flatten()
                .flatten()
                .map(|c| match c {
                    NegCase::Now => "(iii)-(a)",
                    NegCase::Past => "(iii)-(b)",
                })
                .collect();
            out.push_str(&format!(
                "    pivot={pivot} head={head} neg=[{}]\n",
                negs.join(", ")
            ));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{parse_atom, parse_program, parse_rule, sym};

    fn pred(name: &str, arity: usize) -> Pred {
        Pred {
            name: sym(name),
            arity,
        }
    }

    #[test]
    fn negation_up_to_now_needs_predicate_stratification() {
        let p = parse_program("p @ N :- q @ N, \\+ (r @ T, T <= N).").unwrap();
        let pa = check_time_constrained(&p).unwrap();
        let t = pa.rules[0].as_ref().unwrap();
        assert_eq!(t.anchor, Anchor::Pivot(0));
        assert_eq!(t.head, HeadCase::Now);
        assert_eq!(t.neg[0], vec![Some(NegCase::Now), None]);
        let g = build_call_graph(&p, &pa);
        assert!(g.has_edge(&pred("q", 0), &pred("p", 0), EdgeSign::Positive));
        assert!(g.has_edge(&pred("r", 0), &pred("p", 0), EdgeSign::Negative));
        let st = stratify_graph(&g).unwrap();
        assert!(st.stratum_of(&pred("r", 0)) < st.stratum_of(&pred("p", 0)));
    }

    #[test]
    fn strictly_earlier_negation_is_ignored() {
        let p = parse_program("p @ N :- q @ N, \\+ (r @ T, T < N).").unwrap();
        let pa = check_time_constrained(&p).unwrap();
        assert_eq!(pa.rules[0].as_ref().unwrap().neg[0][0], Some(NegCase::Past));
        let g = build_call_graph(&p, &pa);
        assert!(g.has_edge(&pred("q", 0), &pred("p", 0), EdgeSign::Positive));
        assert!(g.contains(&pred("r", 0)));
        assert!(!g.edges.iter().any(|&(a, _, _)| g.preds[a] == pred("r", 0)));
    }

    #[test]
    fn urn_transition_is_future_headed() {
        let r = parse_rule("urn(Balls -- [B]) @ T+1 :- urn(Balls) @ T, draw = B @ T.").unwrap();
        let t = rule_timing(&r).unwrap();
        assert_eq!(t.anchor, Anchor::Pivot(0));
        assert_eq!(t.head, HeadCase::Future);
        let p = Program { rules: vec![r] };
        let g = build_call_graph(&p, &check_time_constrained(&p).unwrap());
        assert!(g.edges.is_empty());
        assert_eq!(g.preds.len(), 2);
    }

    #[test]
    fn pivot_is_the_latest_positive_atom() {
        let r =
            parse_rule("obs ~ [R+3..R+30] @ T :- state=rainy @ T, T > 0, obs=R @ T-1.").unwrap();
        let t = rule_timing(&r).unwrap();
        assert_eq!(t.anchor, Anchor::Pivot(0));
        let bad = parse_rule("p @ T :- q @ T, r @ S.").unwrap();
        assert!(matches!(
            rule_timing(&bad),
            Err(Error::NotTimeConstrained { .. })
        ));
        let future_neg = parse_rule("p @ T :- q @ T, \\+ r @ T+1.").unwrap();
        assert!(matches!(
            rule_timing(&future_neg),
            Err(Error::NotTimeConstrained { .. })
        ));
    }

    #[test]
    fn variable_free_rules_anchor_at_head() {
        let r = parse_rule("s :- \\+ (p(X), q(X)).").unwrap();
        let t = rule_timing(&r).unwrap();
        assert_eq!(t.anchor, Anchor::Head);
        assert_eq!(t.neg[0], vec![Some(NegCase::Now), Some(NegCase::Now)]);
        let r = parse_rule("obs ~ [3..30] @ 0 :- state=rainy @ 0.").unwrap();
        assert_eq!(rule_timing(&r).unwrap().anchor, Anchor::Head);
    }

    #[test]
    fn intro_and_example_strata() {
        let p = parse_program("0.5 :: q(0). 0.5 :: q(1). 0.5 :: p(T) :- q(T), \\+ (q(S), S < T).")
            .unwrap();
        let st = stratify(&p).unwrap();
        assert!(st.stratum_of(&pred("q", 1)) < st.stratum_of(&pred("p", 1)));

        let p = parse_program(
            "0.5 :: p(a). q(a). 0.5 :: p(b). q(b). 0.5 :: p(c). s :- \\+ (p(X), q(X)).",
        )
        .unwrap();
        let st = stratify(&p).unwrap();
        let s = st.stratum_of(&pred("s", 0)).unwrap();
        assert!(st.stratum_of(&pred("p", 1)).unwrap() < s);
        assert!(st.stratum_of(&pred("q", 1)).unwrap() < s);
    }

    #[test]
    fn negation_cycle_rejected() {
        let p = parse_program("a :- \\+ b. b :- \\+ a.").unwrap();
        match stratify(&p) {
            Err(Error::NegationCycle(s)) => assert_eq!(s, "a/0, b/0"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn facts_are_isolated_and_order_is_deterministic() {
        let p = parse_program("c. b. a.").unwrap();
        let a = check_sbtp(&p).unwrap();
        assert!(a.graph.edges.is_empty());
        let names: Vec<String> = a.strata.strata.iter().map(|s| s[0].to_string()).collect();
        assert_eq!(names, vec!["a/0", "b/0", "c/0"]);
        for _ in 0..5 {
            assert_eq!(stratify(&p).unwrap(), a.strata);
        }
    }

    #[test]
    fn timed_strata() {
        let p = parse_program("q(1). state ~ [rainy, sunny] @ 0. p :- q(1), state=rainy.").unwrap();
        let st = stratify(&p).unwrap();
        let q = strat(&parse_atom("q(1)").unwrap(), &st).unwrap();
        assert_eq!(q.time, 0);
        assert_eq!(Some(q.stratum), st.stratum_of(&pred("q", 1)));
        let s = strat(&parse_atom("state=rainy@2").unwrap(), &st).unwrap();
        assert_eq!(
            s,
            TimedStratum {
                time: 2,
                stratum: st.stratum_of(&pred("state", 1)).unwrap()
            }
        );
        assert!(
            TimedStratum {
                time: 1,
                stratum: 1
            } < TimedStratum {
                time: 2,
                stratum: 0
            }
        );
        assert!(matches!(
            strat(&parse_atom("zz").unwrap(), &st),
            Err(Error::UnknownPredicate(_))
        ));
    }

    #[test]
    fn report_is_stable() {
        let p = parse_program("0.5 :: q(0). 0.5 :: p(T) :- q(T), \\+ (q(S), S < T).").unwrap();
        let a = check_sbtp(&p).unwrap();
        let r = a.report(&p);
        assert!(r.contains("s1: q/1"));
        assert!(r.contains("pivot=head head=(ii)-(a) neg=[(iii)-(a)]"));
        let p = parse_program("p @ N :- q @ N, \\+ (r @ T, T < N).").unwrap();
        let r = check_sbtp(&p).unwrap().report(&p);
        assert!(r.contains("pivot=q@N head=(ii)-(a) neg=[(iii)-(b)]"), "{r}");
    }
}
