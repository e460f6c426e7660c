//! Abstract syntax: terms, atoms, bodies, heads, rules and substitutions.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use ordered_float::OrderedFloat;

/// Interned-ish name used for functors, predicates and variables.
pub type Symbol = Arc<str>;

pub fn sym(s: &str) -> Symbol {
    Arc::from(s)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    /// List append `++`.
    Append,
    /// Multiset list difference `--`.
    Diff,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Append => " ++ ",
            BinOp::Diff => " -- ",
        }
    }

    fn precedence(self) -> u8 {
        match self {
            BinOp::Add | BinOp::Sub | BinOp::Append | BinOp::Diff => 1,
            BinOp::Mul | BinOp::Div => 2,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Var(Symbol),
    Int(i64),
    Real(OrderedFloat<f64>),
    /// Ordinary (free) functional term; constants have no arguments.
    Fn(Symbol, Vec<Term>),
    /// Interpreted binary operator application.
    Op(BinOp, Box<Term>, Box<Term>),
    List(Vec<Term>),
    /// `[lo..hi]` segment, only meaningful as a list element.
    Range(Box<Term>, Box<Term>),
}

impl Term {
    pub fn var(name: &str) -> Term {
        Term::Var(sym(name))
    }

    pub fn constant(name: &str) -> Term {
        Term::Fn(sym(name), Vec::new())
    }

    pub fn func(name: &str, args: Vec<Term>) -> Term {
        Term::Fn(sym(name), args)
    }

    pub fn real(x: f64) -> Term {
        Term::Real(OrderedFloat(x))
    }

    pub fn op(op: BinOp, lhs: Term, rhs: Term) -> Term {
        Term::Op(op, Box::new(lhs), Box::new(rhs))
    }

    pub fn is_ground(&self) -> bool {
        match self {
            Term::Var(_) => false,
            Term::Int(_) | Term::Real(_) => true,
            Term::Fn(_, args) | Term::List(args) => args.iter().all(Term::is_ground),
            Term::Op(_, a, b) | Term::Range(a, b) => a.is_ground() && b.is_ground(),
        }
    }

    /// True if the term contains an interpreted operator or range anywhere.
    pub fn is_interpreted(&self) -> bool {
        match self {
            Term::Var(_) | Term::Int(_) | Term::Real(_) => false,
            Term::Op(..) | Term::Range(..) => true,
            Term::Fn(_, args) | Term::List(args) => args.iter().any(Term::is_interpreted),
        }
    }

    pub fn collect_vars(&self, out: &mut BTreeSet<Symbol>) {
        match self {
            Term::Var(v) => {
                out.insert(v.clone());
            }
            Term::Int(_) | Term::Real(_) => {}
            Term::Fn(_, args) | Term::List(args) => args.iter().for_each(|a| a.collect_vars(out)),
            Term::Op(_, a, b) | Term::Range(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
        }
    }

    pub fn vars(&self) -> BTreeSet<Symbol> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    pub fn as_int(&self) -> Option<i64> {
        match self {
            Term::Int(n) => Some(*n),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CmpOp {
    Lt,
    Le,
    Gt,
    Ge,
    /// `\=`: syntactic disequality of evaluated values.
    Ne,
    /// `==`: syntactic equality of evaluated values.
    Same,
}

impl CmpOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
            CmpOp::Ne => "\\=",
            CmpOp::Same => "==",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Atom {
    /// `pred(args) @ time`
    Ord {
        pred: Symbol,
        args: Vec<Term>,
        time: Term,
    },
    /// `lhs = rhs @ time`; `lhs` is an ordinary functional term.
    Eq { lhs: Term, rhs: Term, time: Term },
    /// Built-in comparison, evaluated rather than looked up.
    Cmp { op: CmpOp, lhs: Term, rhs: Term },
}

/// Predicate identity used for stratification. Equations and distribution
/// heads `f(t1..tn) = t` count as predicate `f` of arity `n + 1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Pred {
    pub name: Symbol,
    pub arity: usize,
}

impl fmt::Display for Pred {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.name, self.arity)
    }
}

impl Atom {
    pub fn ord(pred: &str, args: Vec<Term>, time: Term) -> Atom {
        Atom::Ord {
            pred: sym(pred),
            args,
            time,
        }
    }

    pub fn eq(lhs: Term, rhs: Term, time: Term) -> Atom {
        Atom::Eq { lhs, rhs, time }
    }

    pub fn is_interpreted(&self) -> bool {
        matches!(self, Atom::Cmp { .. })
    }

    pub fn time(&self) -> Option<&Term> {
        match self {
            Atom::Ord { time, .. } | Atom::Eq { time, .. } => Some(time),
            Atom::Cmp { .. } => None,
        }
    }

    pub fn pred(&self) -> Option<Pred> {
        match self {
            Atom::Ord { pred, args, .. } => Some(Pred {
                name: pred.clone(),
                arity: args.len(),
            }),
            Atom::Eq {
                lhs: Term::Fn(f, args),
                ..
            } => Some(Pred {
                name: f.clone(),
                arity: args.len() + 1,
            }),
            _ => None,
        }
    }

    pub fn is_ground(&self) -> bool {
        match self {
            Atom::Ord { args, time, .. } => time.is_ground() && args.iter().all(Term::is_ground),
            Atom::Eq { lhs, rhs, time } => lhs.is_ground() && rhs.is_ground() && time.is_ground(),
            Atom::Cmp { lhs, rhs, .. } => lhs.is_ground() && rhs.is_ground(),
        }
    }

    pub fn collect_vars(&self, out: &mut BTreeSet<Symbol>) {
        match self {
            Atom::Ord { args, time, .. } => {
                args.iter().for_each(|a| a.collect_vars(out));
                time.collect_vars(out);
            }
            Atom::Eq { lhs, rhs, time } => {
                lhs.collect_vars(out);
                rhs.collect_vars(out);
                time.collect_vars(out);
            }
            Atom::Cmp { lhs, rhs, .. } => {
                lhs.collect_vars(out);
                rhs.collect_vars(out);
            }
        }
    }

    pub fn vars(&self) -> BTreeSet<Symbol> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    /// Ground integer time of an ordinary or equation atom.
    pub fn time_value(&self) -> Option<i64> {
        self.time().and_then(Term::as_int)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sign {
    Positive,
    Negative,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Literal {
    pub sign: Sign,
    pub atom: Atom,
}

/// A rule body: positive atoms plus negative body elements, each the
/// conjunction under one `\+`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Body {
    pub pos: Vec<Atom>,
    pub neg: Vec<Vec<Atom>>,
}

impl Body {
    pub fn is_empty(&self) -> bool {
        self.pos.is_empty() && self.neg.is_empty()
    }

    /// Variables of the positive part (`X_B`).
    pub fn positive_vars(&self) -> BTreeSet<Symbol> {
        let mut out = BTreeSet::new();
        for a in &self.pos {
            a.collect_vars(&mut out);
        }
        out
    }

    pub fn is_variable_free(&self) -> bool {
        self.positive_vars().is_empty()
    }

    /// Normal: every negative element is a single ground ordinary/equation atom.
    pub fn is_normal(&self) -> bool {
        self.neg
            .iter()
            .all(|c| c.len() == 1 && !c[0].is_interpreted() && c[0].is_ground())
    }

    pub fn literals(&self) -> Vec<Literal> {
        let mut out: Vec<Literal> = self
            .pos
            .iter()
            .map(|a| Literal {
                sign: Sign::Positive,
                atom: a.clone(),
            })
            .collect();
        for c in &self.neg {
            if c.len() == 1 {
                out.push(Literal {
                    sign: Sign::Negative,
                    atom: c[0].clone(),
                });
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Head {
    /// `pr :: atom`; `atom` alone means probability 1.0.
    Ordinary { prob: Term, atom: Atom },
    /// `lhs ~ values @ time`
    Distribution { lhs: Term, values: Term, time: Term },
    /// `pr1 :: a1 @ tt + ... + prm :: am @ tt`, m >= 2
    Sum(Vec<(Term, Atom)>),
}

impl Head {
    pub fn time(&self) -> &Term {
        match self {
            Head::Ordinary { atom, .. } => atom.time().expect("ordinary head atom has a time term"),
            Head::Distribution { time, .. } => time,
            Head::Sum(cases) => cases[0].1.time().expect("sum head atom has a time term"),
        }
    }

    /// Predicate defined by this head (first summand for sum heads).
    pub fn preds(&self) -> Vec<Pred> {
        match self {
            Head::Ordinary { atom, .. } => atom.pred().into_iter().collect(),
            Head::Distribution {
                lhs: Term::Fn(f, args),
                ..
            } => {
                vec![Pred {
                    name: f.clone(),
                    arity: args.len() + 1,
                }]
            }
            Head::Distribution { .. } => Vec::new(),
            Head::Sum(cases) => {
                let mut ps: Vec<Pred> = cases.iter().filter_map(|(_, a)| a.pred()).collect();
                ps.sort();
                ps.dedup();
                ps
            }
        }
    }

    pub fn collect_vars(&self, out: &mut BTreeSet<Symbol>) {
        match self {
            Head::Ordinary { prob, atom } => {
                prob.collect_vars(out);
                atom.collect_vars(out);
            }
            Head::Distribution { lhs, values, time } => {
                lhs.collect_vars(out);
                values.collect_vars(out);
                time.collect_vars(out);
            }
            Head::Sum(cases) => {
                for (p, a) in cases {
                    p.collect_vars(out);
                    a.collect_vars(out);
                }
            }
        }
    }

    pub fn is_certain_ordinary(&self) -> bool {
        matches!(self, Head::Ordinary { prob: Term::Real(p), .. } if p.0 == 1.0)
            || matches!(
                self,
                Head::Ordinary {
                    prob: Term::Int(1),
                    ..
                }
            )
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Rule {
    pub head: Head,
    pub body: Body,
    /// 1-based source line, 0 when synthesized.
    pub line: usize,
}

impl Rule {
    pub fn is_fact(&self) -> bool {
        self.body.is_empty()
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Program {
    pub rules: Vec<Rule>,
}

/// Finite map from variables to terms.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Substitution(pub BTreeMap<Symbol, Term>);

impl Substitution {
    pub fn new() -> Self {
        Substitution(BTreeMap::new())
    }

    pub fn get(&self, v: &str) -> Option<&Term> {
        self.0.get(v)
    }

    pub fn bind(&mut self, v: Symbol, t: Term) {
        self.0.insert(v, t);
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Symbol, &Term)> {
        self.0.iter()
    }

    /// Restriction to the given variables.
    pub fn restrict(&self, vars: &BTreeSet<Symbol>) -> Substitution {
        Substitution(
            self.0
                .iter()
                .filter(|(k, _)| vars.contains(*k))
                .map(|(k, v)| (k.clone(), v.clone()))
                .collect(),
        )
    }

    /// `self` then `other`: x(self∘other) = (x self) other.
    pub fn compose(&self, other: &Substitution) -> Substitution {
        let mut out: BTreeMap<Symbol, Term> = self
            .0
            .iter()
            .map(|(k, v)| (k.clone(), v.apply(other)))
            .collect();
        for (k, v) in &other.0 {
            out.entry(k.clone()).or_insert_with(|| v.clone());
        }
        Substitution(out)
    }

    pub fn is_grounding_for(&self, vars: &BTreeSet<Symbol>) -> bool {
        self.0.keys().cloned().collect::<BTreeSet<_>>() == *vars
            && self.0.values().all(Term::is_ground)
    }
}

impl fmt::Display for Substitution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, (k, v)) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{k}={v}")?;
        }
        write!(f, "}}")
    }
}

/// Application of a substitution, `eσ`.
pub trait Substitute {
    fn apply(&self, s: &Substitution) -> Self;
}

impl Substitute for Term {
    fn apply(&self, s: &Substitution) -> Term {
        if s.is_empty() {
            return self.clone();
        }
        match self {
            Term::Var(v) => s.0.get(v).cloned().unwrap_or_else(|| self.clone()),
            Term::Int(_) | Term::Real(_) => self.clone(),
            Term::Fn(f, args) => Term::Fn(f.clone(), args.iter().map(|a| a.apply(s)).collect()),
            Term::List(items) => Term::List(items.iter().map(|a| a.apply(s)).collect()),
            Term::Op(op, a, b) => Term::Op(*op, Box::new(a.apply(s)), Box::new(b.apply(s))),
            Term::Range(a, b) => Term::Range(Box::new(a.apply(s)), Box::new(b.apply(s))),
        }
    }
}

impl Substitute for Atom {
    fn apply(&self, s: &Substitution) -> Atom {
        match self {
            Atom::Ord { pred, args, time } => Atom::Ord {
                pred: pred.clone(),
                args: args.iter().map(|a| a.apply(s)).collect(),
                time: time.apply(s),
            },
            Atom::Eq { lhs, rhs, time } => Atom::Eq {
                lhs: lhs.apply(s),
                rhs: rhs.apply(s),
                time: time.apply(s),
            },
            Atom::Cmp { op, lhs, rhs } => Atom::Cmp {
                op: *op,
                lhs: lhs.apply(s),
                rhs: rhs.apply(s),
            },
        }
    }
}

impl Substitute for Body {
    fn apply(&self, s: &Substitution) -> Body {
        Body {
            pos: self.pos.iter().map(|a| a.apply(s)).collect(),
            neg: self
                .neg
                .iter()
                .map(|c| c.iter().map(|a| a.apply(s)).collect())
                .collect(),
        }
    }
}

impl Substitute for Head {
    fn apply(&self, s: &Substitution) -> Head {
        match self {
            Head::Ordinary { prob, atom } => Head::Ordinary {
                prob: prob.apply(s),
                atom: atom.apply(s),
            },
            Head::Distribution { lhs, values, time } => Head::Distribution {
                lhs: lhs.apply(s),
                values: values.apply(s),
                time: time.apply(s),
            },
            Head::Sum(cases) => Head::Sum(
                cases
                    .iter()
                    .map(|(p, a)| (p.apply(s), a.apply(s)))
                    .collect(),
            ),
        }
    }
}

impl Substitute for Rule {
    fn apply(&self, s: &Substitution) -> Rule {
        Rule {
            head: self.head.apply(s),
            body: self.body.apply(s),
            line: self.line,
        }
    }
}

// ---------------------------------------------------------------------------
// Canonical text form

fn write_real(f: &mut fmt::Formatter<'_>, x: f64) -> fmt::Result {
    write!(f, "{x:?}")
}

fn write_operand(f: &mut fmt::Formatter<'_>, t: &Term, parent: u8, right: bool) -> fmt::Result {
    let wrap = match t {
        Term::Op(op, ..) => op.precedence() < parent || (right && op.precedence() == parent),
        Term::Int(n) => *n < 0,
        Term::Real(x) => x.0 < 0.0,
        _ => false,
    };
    if wrap {
        write!(f, "({t})")
    } else {
        write!(f, "{t}")
    }
}

fn write_args(f: &mut fmt::Formatter<'_>, args: &[Term]) -> fmt::Result {
    for (i, a) in args.iter().enumerate() {
        if i > 0 {
            write!(f, ", ")?;
        }
        write!(f, "{a}")?;
    }
    Ok(())
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => write!(f, "{v}"),
            Term::Int(n) => write!(f, "{n}"),
            Term::Real(x) => write_real(f, x.0),
            Term::Fn(name, args) if args.is_empty() => write!(f, "{name}"),
            Term::Fn(name, args) => {
                write!(f, "{name}(")?;
                write_args(f, args)?;
                write!(f, ")")
            }
            Term::List(items) => {
                write!(f, "[")?;
                write_args(f, items)?;
                write!(f, "]")
            }
            Term::Range(lo, hi) => write!(f, "{lo}..{hi}"),
            Term::Op(op, a, b) => {
                write_operand(f, a, op.precedence(), false)?;
                write!(f, "{}", op.symbol())?;
                write_operand(f, b, op.precedence(), true)
            }
        }
    }
}

fn write_time(f: &mut fmt::Formatter<'_>, time: &Term) -> fmt::Result {
    match time {
        Term::Int(0) => Ok(()),
        Term::Var(_) | Term::Int(_) => write!(f, "@{time}"),
        _ => write!(f, "@({time})"),
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Atom::Ord { pred, args, time } => {
                write!(f, "{pred}")?;
                if !args.is_empty() {
                    write!(f, "(")?;
                    write_args(f, args)?;
                    write!(f, ")")?;
                }
                write_time(f, time)
            }
            Atom::Eq { lhs, rhs, time } => {
                write!(f, "{lhs}={rhs}")?;
                write_time(f, time)
            }
            Atom::Cmp { op, lhs, rhs } => write!(f, "{lhs} {} {rhs}", op.symbol()),
        }
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.sign {
            Sign::Positive => write!(f, "{}", self.atom),
            Sign::Negative => write!(f, "\\+ {}", self.atom),
        }
    }
}

impl fmt::Display for Body {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for a in &self.pos {
            if !first {
                write!(f, ", ")?;
            }
            first = false;
            write!(f, "{a}")?;
        }
        for c in &self.neg {
            if !first {
                write!(f, ", ")?;
            }
            first = false;
            if c.len() == 1 {
                write!(f, "\\+ {}", c[0])?;
            } else {
                write!(f, "\\+ (")?;
                for (i, a) in c.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{a}")?;
                }
                write!(f, ")")?;
            }
        }
        Ok(())
    }
}

fn write_prob(f: &mut fmt::Formatter<'_>, prob: &Term) -> fmt::Result {
    match prob {
        Term::Op(..) => write!(f, "({prob})"),
        _ => write!(f, "{prob}"),
    }
}

impl fmt::Display for Head {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Head::Ordinary { atom, .. } if self.is_certain_ordinary() => write!(f, "{atom}"),
            Head::Ordinary { prob, atom } => {
                write_prob(f, prob)?;
                write!(f, " :: {atom}")
            }
            Head::Distribution { lhs, values, time } => {
                write!(f, "{lhs} ~ {values}")?;
                write_time(f, time)
            }
            Head::Sum(cases) => {
                for (i, (p, a)) in cases.iter().enumerate() {
                    if i > 0 {
                        write!(f, " + ")?;
                    }
                    write_prob(f, p)?;
                    write!(f, " :: {a}")?;
                }
                Ok(())
            }
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.body.is_empty() {
            write!(f, "{}.", self.head)
        } else {
            write!(f, "{} :- {}.", self.head, self.body)
        }
    }
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in &self.rules {
            writeln!(f, "{r}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn subst(pairs: &[(&str, Term)]) -> Substitution {
        Substitution(pairs.iter().map(|(k, v)| (sym(k), v.clone())).collect())
    }

    #[test]
    fn apply_binds_time_variable() {
        let a = Atom::ord("q", vec![], Term::var("T"));
        let b = a.apply(&subst(&[("T", Term::Int(1))]));
        assert_eq!(b, Atom::ord("q", vec![], Term::Int(1)));
        assert_eq!(b.to_string(), "q@1");
    }

    #[test]
    fn empty_substitution_is_identity() {
        let t = Term::op(BinOp::Add, Term::var("R"), Term::Int(3));
        assert_eq!(t.apply(&Substitution::new()), t);
    }

    #[test]
    fn unbound_negative_element_variables_survive() {
        let body = Body {
            pos: vec![Atom::ord("q", vec![], Term::var("T"))],
            neg: vec![vec![
                Atom::ord("q", vec![], Term::var("S")),
                Atom::Cmp {
                    op: CmpOp::Lt,
                    lhs: Term::var("S"),
                    rhs: Term::var("T"),
                },
            ]],
        };
        let b = body.apply(&subst(&[("T", Term::Int(0))]));
        assert!(b.neg[0][0].vars().contains("S"));
        assert_eq!(b.to_string(), "q, \\+ (q@S, S < 0)");
    }

    #[test]
    fn printing_parenthesizes_by_precedence() {
        let t = Term::op(
            BinOp::Mul,
            Term::op(BinOp::Add, Term::var("A"), Term::Int(1)),
            Term::Int(2),
        );
        assert_eq!(t.to_string(), "(A+1)*2");
        let t = Term::op(
            BinOp::Sub,
            Term::var("A"),
            Term::op(BinOp::Sub, Term::var("B"), Term::Int(1)),
        );
        assert_eq!(t.to_string(), "A-(B-1)");
    }
}
