//! Hand-written lexer and recursive-descent parser for `.plp` sources.

use std::collections::BTreeSet;

use super::term::*;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Var(String),
    Int(i64),
    Real(f64),
    Punct(&'static str),
    Eof,
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    line: usize,
    col: usize,
}

// Longest first, so maximal munch works by linear scan.
const PUNCT: &[&str] = &[
    ":-", "?-", "::", "\\+", "\\=", "==", "=<", "<=", ">=", "++", "--", "..", "(", ")", "[", "]",
    ",", ".", "~", "@", "+", "-", "*", "/", "=", "<", ">", "|",
];

fn lex(src: &str) -> Result<Vec<Token>> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    while i < chars.len() {
        let c = chars[i];
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '%' {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        let (start_line, start_col) = (line, col);
        if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let mut is_real = false;
            if i + 1 < chars.len() && chars[i] == '.' && chars[i + 1].is_ascii_digit() {
                is_real = true;
                i += 1;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    is_real = true;
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let text: String = chars[start..i].iter().collect();
            col += i - start;
            let tok =
                if is_real {
                    Tok::Real(
                        text.parse()
                            .map_err(|_| Error::syntax(start_line, start_col, "bad number"))?,
                    )
                } else {
                    Tok::Int(text.parse().map_err(|_| {
                        Error::syntax(start_line, start_col, "integer out of range")
                    })?)
                };
            out.push(Token {
                tok,
                line: start_line,
                col: start_col,
            });
            continue;
        }
        if c.is_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            let text: String = chars[start..i].iter().collect();
            col += i - start;
            let tok = if c.is_uppercase() || c == '_' {
                Tok::Var(text)
            } else {
                Tok::Ident(text)
            };
            out.push(Token {
                tok,
                line: start_line,
                col: start_col,
            });
            continue;
        }
        let rest: String = chars[i..chars.len().min(i + 2)].iter().collect();
        match PUNCT.iter().find(|p| rest.starts_with(**p)) {
            Some(p) => {
                i += p.len();
                col += p.len();
                out.push(Token {
                    tok: Tok::Punct(p),
                    line: start_line,
                    col: start_col,
                });
            }
            None => {
                return Err(Error::syntax(
                    line,
                    col,
                    format!("unexpected character `{c}`"),
                ))
            }
        }
    }
    out.push(Token {
        tok: Tok::Eof,
        line,
        col,
    });
    Ok(out)
}

/// Conditional query `?- B | E`.
#[derive(Clone, Debug, PartialEq)]
pub struct ConditionalQuery {
    pub body: Body,
    pub evidence: Vec<Atom>,
}

impl ConditionalQuery {
    /// Largest ground time term occurring in the body or the evidence.
    pub fn max_ground_time(&self) -> i64 {
        self.body
            .pos
            .iter()
            .chain(self.body.neg.iter().flatten())
            .chain(self.evidence.iter())
            .filter_map(|a| a.time().filter(|t| t.is_ground()))
            .filter_map(|t| crate::builtins::eval_term(t).ok().and_then(|v| v.as_int()))
            .max()
            .unwrap_or(0)
            .max(0)
    }
}

impl std::fmt::Display for ConditionalQuery {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "?- {}", self.body)?;
        if !self.evidence.is_empty() {
            write!(f, " |")?;
            for (i, e) in self.evidence.iter().enumerate() {
                write!(f, "{}{e}", if i == 0 { " " } else { ", " })?;
            }
        }
        write!(f, ".")
    }
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    anon: usize,
}

impl Parser {
    fn new(src: &str) -> Result<Self> {
        Ok(Parser {
            toks: lex(src)?,
            pos: 0,
            anon: 0,
        })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn here(&self) -> (usize, usize) {
        let t = &self.toks[self.pos];
        (t.line, t.col)
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        let (l, c) = self.here();
        Err(Error::syntax(l, c, msg))
    }

    fn is(&self, p: &str) -> bool {
        matches!(self.peek(), Tok::Punct(q) if *q == p)
    }

    fn eat(&mut self, p: &str) -> bool {
        if self.is(p) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, p: &str) -> Result<()> {
        if self.eat(p) {
            Ok(())
        } else {
            self.err(format!("expected `{p}`, found {}", describe(self.peek())))
        }
    }

    // ----- terms -----------------------------------------------------------

    /// Additive level. With `sum_stop`, a `+` that starts a new `pr :: atom`
    /// summand is left unconsumed.
    fn expr(&mut self, sum_stop: bool) -> Result<Term> {
        let mut lhs = self.mul()?;
        loop {
            let op = match self.peek() {
                Tok::Punct("+") => {
                    if sum_stop && self.starts_summand() {
                        break;
                    }
                    BinOp::Add
                }
                Tok::Punct("-") => BinOp::Sub,
                Tok::Punct("++") => BinOp::Append,
                Tok::Punct("--") => BinOp::Diff,
                _ => break,
            };
            self.pos += 1;
            let rhs = self.mul()?;
            lhs = Term::op(op, lhs, rhs);
        }
        Ok(lhs)
    }

    fn starts_summand(&mut self) -> bool {
        let save = (self.pos, self.anon);
        self.pos += 1;
        let ok = self.mul().is_ok() && self.is("::");
        (self.pos, self.anon) = save;
        ok
    }

    fn mul(&mut self) -> Result<Term> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Tok::Punct("*") => BinOp::Mul,
                Tok::Punct("/") => BinOp::Div,
                _ => break,
            };
            self.pos += 1;
            let rhs = self.unary()?;
            lhs = Term::op(op, lhs, rhs);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Term> {
        if self.eat("-") {
            return Ok(match self.unary()? {
                Term::Int(n) => Term::Int(-n),
                Term::Real(x) => Term::real(-x.0),
                t => Term::op(BinOp::Sub, Term::Int(0), t),
            });
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<Term> {
        match self.peek().clone() {
            Tok::Var(v) => {
                self.pos += 1;
                if v == "_" {
                    self.anon += 1;
                    Ok(Term::Var(sym(&format!("_{}", self.anon))))
                } else {
                    Ok(Term::Var(sym(&v)))
                }
            }
            Tok::Int(n) => {
                self.pos += 1;
                Ok(Term::Int(n))
            }
            Tok::Real(x) => {
                self.pos += 1;
                Ok(Term::real(x))
            }
            Tok::Ident(name) => {
                self.pos += 1;
                let mut args = Vec::new();
                if self.eat("(") {
                    loop {
                        args.push(self.expr(false)?);
                        if !self.eat(",") {
                            break;
                        }
                    }
                    self.expect(")")?;
                }
                Ok(Term::Fn(sym(&name), args))
            }
            Tok::Punct("[") => {
                self.pos += 1;
                let mut items = Vec::new();
                if !self.eat("]") {
                    loop {
                        let lo = self.expr(false)?;
                        if self.eat("..") {
                            let hi = self.expr(false)?;
                            items.push(Term::Range(Box::new(lo), Box::new(hi)));
                        } else {
                            items.push(lo);
                        }
                        if !self.eat(",") {
                            break;
                        }
                    }
                    self.expect("]")?;
                }
                Ok(Term::List(items))
            }
            Tok::Punct("(") => {
                self.pos += 1;
                let t = self.expr(false)?;
                self.expect(")")?;
                Ok(t)
            }
            other => self.err(format!("expected a term, found {}", describe(&other))),
        }
    }

    fn time(&mut self, sum_stop: bool) -> Result<Term> {
        if self.eat("@") {
            self.expr(sum_stop)
        } else {
            Ok(Term::Int(0))
        }
    }

    // ----- atoms -----------------------------------------------------------

    fn atom(&mut self, sum_stop: bool, line: usize) -> Result<Atom> {
        let (l, c) = self.here();
        let lhs = self.expr(sum_stop)?;
        let cmp = match self.peek() {
            Tok::Punct("<") => Some(CmpOp::Lt),
            Tok::Punct("<=") | Tok::Punct("=<") => Some(CmpOp::Le),
            Tok::Punct(">") => Some(CmpOp::Gt),
            Tok::Punct(">=") => Some(CmpOp::Ge),
            Tok::Punct("\\=") => Some(CmpOp::Ne),
            Tok::Punct("==") => Some(CmpOp::Same),
            _ => None,
        };
        if let Some(op) = cmp {
            self.pos += 1;
            let rhs = self.expr(sum_stop)?;
            if self.is("@") {
                return self.err("built-in comparisons take no time argument");
            }
            return Ok(Atom::Cmp { op, lhs, rhs });
        }
        if self.eat("=") {
            let rhs = self.expr(sum_stop)?;
            let time = self.time(sum_stop)?;
            if !matches!(lhs, Term::Fn(..)) {
                return Err(Error::InadmissibleEquation {
                    line: line.max(l),
                    lhs: lhs.to_string(),
                });
            }
            return Ok(Atom::Eq { lhs, rhs, time });
        }
        match lhs {
            Term::Fn(pred, args) => {
                let time = self.time(sum_stop)?;
                Ok(Atom::Ord { pred, args, time })
            }
            other => Err(Error::syntax(l, c, format!("`{other}` is not an atom"))),
        }
    }

    fn body(&mut self, line: usize) -> Result<Body> {
        let mut body = Body::default();
        loop {
            if self.eat("\\+") {
                let element = if self.eat("(") {
                    let mut conj = vec![self.atom(false, line)?];
                    while self.eat(",") {
                        conj.push(self.atom(false, line)?);
                    }
                    self.expect(")")?;
                    conj
                } else {
                    vec![self.atom(false, line)?]
                };
                body.neg.push(element);
            } else {
                body.pos.push(self.atom(false, line)?);
            }
            if !self.eat(",") {
                break;
            }
        }
        Ok(body)
    }

    // ----- clauses ---------------------------------------------------------

    fn head(&mut self, line: usize) -> Result<Head> {
        let start = (self.pos, self.anon);
        let first = self.expr(true)?;
        if self.eat("::") {
            let mut cases = vec![(first, self.head_atom(line)?)];
            while self.is("+") {
                self.pos += 1;
                let p = self.expr(true)?;
                self.expect("::")?;
                cases.push((p, self.head_atom(line)?));
            }
            if cases.len() == 1 {
                let (prob, atom) = cases.pop().unwrap();
                return Ok(Head::Ordinary { prob, atom });
            }
            let t0 = cases[0].1.time().cloned();
            if cases.iter().any(|(_, a)| a.time().cloned() != t0) {
                return Err(Error::MixedSumTime { line });
            }
            return Ok(Head::Sum(cases));
        }
        if self.eat("~") {
            if !matches!(first, Term::Fn(..)) {
                return Err(Error::InadmissibleEquation {
                    line,
                    lhs: first.to_string(),
                });
            }
            let values = self.expr(false)?;
            let time = self.time(false)?;
            return Ok(Head::Distribution {
                lhs: first,
                values,
                time,
            });
        }
        (self.pos, self.anon) = start;
        let atom = self.head_atom(line)?;
        Ok(Head::Ordinary {
            prob: Term::real(1.0),
            atom,
        })
    }

    fn head_atom(&mut self, line: usize) -> Result<Atom> {
        let (l, c) = self.here();
        let a = self.atom(true, line)?;
        if a.is_interpreted() {
            return Err(Error::syntax(
                l,
                c,
                "a built-in comparison cannot be a rule head",
            ));
        }
        Ok(a)
    }

    fn clause(&mut self) -> Result<Rule> {
        self.anon = 0;
        let line = self.here().0;
        let head = self.head(line)?;
        let body = if self.eat(":-") {
            self.body(line)?
        } else {
            Body::default()
        };
        self.expect(".")?;
        let rule = Rule { head, body, line };
        check_rule(&rule)?;
        Ok(rule)
    }
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Ident(s) | Tok::Var(s) => format!("`{s}`"),
        Tok::Int(n) => format!("`{n}`"),
        Tok::Real(x) => format!("`{x}`"),
        Tok::Punct(p) => format!("`{p}`"),
        Tok::Eof => "end of input".to_string(),
    }
}

fn check_atom_admissible(a: &Atom, line: usize) -> Result<()> {
    if let Atom::Eq { lhs, .. } = a {
        if !matches!(lhs, Term::Fn(..)) {
            return Err(Error::InadmissibleEquation {
                line,
                lhs: lhs.to_string(),
            });
        }
    }
    Ok(())
}

fn check_rule(rule: &Rule) -> Result<()> {
    for a in rule.body.pos.iter().chain(rule.body.neg.iter().flatten()) {
        check_atom_admissible(a, rule.line)?;
    }
    let mut bound = BTreeSet::new();
    for a in rule.body.pos.iter().filter(|a| !a.is_interpreted()) {
        a.collect_vars(&mut bound);
    }
    let mut head_vars = BTreeSet::new();
    rule.head.collect_vars(&mut head_vars);
    if let Some(v) = head_vars.iter().find(|v| !bound.contains(*v)) {
        return Err(Error::NotRangeRestricted {
            line: rule.line,
            var: v.to_string(),
        });
    }
    Ok(())
}

/// Parse a whole program.
pub fn parse_program(text: &str) -> Result<Program> {
    let mut p = Parser::new(text)?;
    let mut rules = Vec::new();
    while *p.peek() != Tok::Eof {
        rules.push(p.clause()?);
    }
    Ok(Program { rules })
}

/// Parse a single clause, e.g. for tests and the C API.
pub fn parse_rule(text: &str) -> Result<Rule> {
    let mut p = Parser::new(text)?;
    let r = p.clause()?;
    if *p.peek() != Tok::Eof {
        return p.err("trailing input after clause");
    }
    Ok(r)
}

/// Parse `?- b1, ..., \+ (...) | e1, ..., em.`; the final `.` is optional.
pub fn parse_query(text: &str) -> Result<ConditionalQuery> {
    let mut p = Parser::new(text)?;
    p.expect("?-")?;
    if matches!(p.peek(), Tok::Eof | Tok::Punct(".") | Tok::Punct("|")) {
        return Err(Error::Query("empty query body".into()));
    }
    let body = p.body(0)?;
    let mut evidence = Vec::new();
    if p.eat("|") {
        loop {
            let (l, c) = p.here();
            if p.is("\\+") {
                return Err(Error::syntax(
                    l,
                    c,
                    "evidence must consist of positive atoms",
                ));
            }
            let a = p.atom(false, l)?;
            if a.is_interpreted() {
                return Err(Error::syntax(
                    l,
                    c,
                    "evidence must consist of ordinary or equation atoms",
                ));
            }
            if !a.is_ground() {
                return Err(Error::Query(format!("evidence atom `{a}` is not ground")));
            }
            evidence.push(a);
            if !p.eat(",") {
                break;
            }
        }
    }
    p.eat(".");
    if *p.peek() != Tok::Eof {
        return p.err(format!("unexpected {} after query", describe(p.peek())));
    }
    for a in body.pos.iter().chain(body.neg.iter().flatten()) {
        check_atom_admissible(a, 0)?;
    }
    Ok(ConditionalQuery { body, evidence })
}

/// Parse a single atom (time defaults to 0).
pub fn parse_atom(text: &str) -> Result<Atom> {
    let mut p = Parser::new(text)?;
    let a = p.atom(false, 0)?;
    if *p.peek() != Tok::Eof {
        return p.err("trailing input after atom");
    }
    Ok(a)
}

/// Parse a single term.
pub fn parse_term(text: &str) -> Result<Term> {
    let mut p = Parser::new(text)?;
    let t = p.expr(false)?;
    if *p.peek() != Tok::Eof {
        return p.err("trailing input after term");
    }
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn intro_rule_with_negative_element() {
        let r = parse_rule("0.5 :: p(T) :- q(T), \\+ (q(S), S < T).").unwrap();
        match &r.head {
            Head::Ordinary { prob, atom } => {
                assert_eq!(*prob, Term::real(0.5));
                assert_eq!(atom.to_string(), "p(T)");
            }
            h => panic!("unexpected head {h:?}"),
        }
        assert_eq!(r.body.pos.len(), 1);
        assert_eq!(r.body.neg.len(), 1);
        assert_eq!(r.body.neg[0].len(), 2);
        assert!(r.body.neg[0][1].is_interpreted());
    }

    #[test]
    fn urn_fact() {
        let r = parse_rule("urn([r(1), r(2), g(1)]) @ 0.").unwrap();
        assert!(r.is_fact());
        assert!(r.head.is_certain_ordinary());
        assert_eq!(r.head.time(), &Term::Int(0));
        assert_eq!(r.to_string(), "urn([r(1), r(2), g(1)]).");
    }

    #[test]
    fn weighted_distribution_head() {
        let r = parse_rule("state ~ [[rainy, 0.6], [sunny, 0.4]] @ 0.").unwrap();
        match &r.head {
            Head::Distribution { lhs, values, time } => {
                assert_eq!(*lhs, Term::constant("state"));
                assert_eq!(values.to_string(), "[[rainy, 0.6], [sunny, 0.4]]");
                assert_eq!(*time, Term::Int(0));
            }
            h => panic!("unexpected head {h:?}"),
        }
    }

    #[test]
    fn range_list_and_time_expressions() {
        let r =
            parse_rule("obs ~ [R+3..R+30] @ T :- state=rainy @ T, T > 0, obs=R @ T-1.").unwrap();
        assert_eq!(r.body.pos.len(), 3);
        assert_eq!(r.body.pos[2].time().unwrap().to_string(), "T-1");
        assert!(
            matches!(&r.head, Head::Distribution { values: Term::List(v), .. } if matches!(v[0], Term::Range(..)))
        );
    }

    #[test]
    fn sum_head_with_time_addition() {
        let r = parse_rule("0.6 :: a @ T+1 + 0.4 :: b @ T+1 :- c @ T.").unwrap();
        match &r.head {
            Head::Sum(cases) => {
                assert_eq!(cases.len(), 2);
                assert_eq!(cases[1].1.time().unwrap().to_string(), "T+1");
            }
            h => panic!("unexpected head {h:?}"),
        }
        assert!(matches!(
            parse_rule("0.6 :: a @ 1 + 0.4 :: b @ 2."),
            Err(Error::MixedSumTime { .. })
        ));
    }

    #[test]
    fn urn_rules_and_anonymous_variables() {
        let p = parse_program(
            "draw ~ Balls @ T :- urn(Balls) @ T, Balls \\= [].\n\
             urn(Balls -- [B]) @ T+1 :- urn(Balls) @ T, draw = B @ T.\n\
             some(red) @ T :- draw=r(_) @ T.",
        )
        .unwrap();
        assert_eq!(p.rules.len(), 3);
        assert_eq!(p.rules[1].head.to_string(), "urn(Balls -- [B])@(T+1)");
        assert_eq!(p.rules[2].body.pos[0].to_string(), "draw=r(_1)@T");
    }

    #[test]
    fn errors_carry_positions() {
        match parse_program("p :- q\nr.") {
            Err(Error::Syntax { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            parse_program("X = 1 @ 0."),
            Err(Error::InadmissibleEquation { .. })
        ));
        assert!(matches!(
            parse_program("p(X) :- q."),
            Err(Error::NotRangeRestricted { .. })
        ));
        assert!(matches!(
            parse_program("p(X)."),
            Err(Error::NotRangeRestricted { .. })
        ));
        assert!(matches!(
            parse_program("p :- q # r."),
            Err(Error::Syntax { .. })
        ));
    }

    #[test]
    fn comments_are_skipped() {
        let p = parse_program("% header\nq(0). % trailing\n0.5 :: q(1).").unwrap();
        assert_eq!(p.rules.len(), 2);
    }

    #[test]
    fn conditional_queries() {
        let q = parse_query("?- some(green) @ 1 | some(red) @ 0.").unwrap();
        assert_eq!(q.body.pos[0].to_string(), "some(green)@1");
        assert_eq!(q.evidence[0].to_string(), "some(red)");

        let q = parse_query("?- some(C1) @ 1, some(C2) @ 2 | some(red) @ 0.").unwrap();
        let mut vars = BTreeSet::new();
        q.body.pos.iter().for_each(|a| a.collect_vars(&mut vars));
        assert_eq!(vars.len(), 2);

        let q = parse_query("?- p.").unwrap();
        assert_eq!(q.body.pos, vec![Atom::ord("p", vec![], Term::Int(0))]);
        assert!(q.evidence.is_empty());

        let q = parse_query("?- state=X@1 | obs=0@0").unwrap();
        assert_eq!(q.evidence.len(), 1);
        assert_eq!(q.max_ground_time(), 1);
    }

    #[test]
    fn bad_queries() {
        assert!(matches!(parse_query("?- p | q(X)."), Err(Error::Query(_))));
        assert!(matches!(parse_query("?- ."), Err(Error::Query(_))));
        assert!(parse_query("p.").is_err());
    }

    #[test]
    fn numbers_next_to_ranges_and_clause_ends() {
        assert_eq!(parse_term("[3..30]").unwrap().to_string(), "[3..30]");
        assert_eq!(parse_term("1.5e-3").unwrap(), Term::real(1.5e-3));
        assert_eq!(parse_term("-2").unwrap(), Term::Int(-2));
        assert!(parse_rule("q(0).").is_ok());
    }
}
