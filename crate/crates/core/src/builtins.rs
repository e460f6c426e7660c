//! Evaluation of interpreted terms and atoms.
//!
//! Ground interpreted terms reduce to a unique irreducible term: integers,
//! reals, ordinary terms with irreducible arguments, and lists thereof.

use crate::error::{Error, Result};
use crate::syntax::{Atom, BinOp, CmpOp, Term};

/// Evaluate a ground term to its irreducible value.
///
/// Integer `/` yields an integer when the division is exact and a real
/// otherwise. Ranges are only legal as list elements and expand in place.
pub fn eval_term(t: &Term) -> Result<Term> {
    match t {
        Term::Var(v) => Err(Error::Flounder(v.to_string())),
        Term::Int(_) | Term::Real(_) => Ok(t.clone()),
        Term::Fn(f, args) => Ok(Term::Fn(
            f.clone(),
            args.iter().map(eval_term).collect::<Result<_>>()?,
        )),
        Term::List(items) => Ok(Term::List(expand_range(items)?)),
        Term::Range(..) => Err(Error::Sort(format!("range `{t}` outside a list"))),
        Term::Op(op, a, b) => {
            let (x, y) = (eval_term(a)?, eval_term(b)?);
            apply_op(*op, x, y, t)
        }
    }
}

fn apply_op(op: BinOp, x: Term, y: Term, whole: &Term) -> Result<Term> {
    let overflow = || Error::Sort(format!("integer overflow in `{whole}`"));
    match (op, x, y) {
        (BinOp::Append, Term::List(mut xs), Term::List(ys)) => {
            xs.extend(ys);
            Ok(Term::List(xs))
        }
        (BinOp::Diff, Term::List(mut xs), Term::List(ys)) => {
            for y in &ys {
                if let Some(i) = xs.iter().position(|x| x == y) {
                    xs.remove(i);
                }
            }
            Ok(Term::List(xs))
        }
        (BinOp::Append | BinOp::Diff, x, y) => Err(Error::Sort(format!(
            "`{}` expects lists, got `{x}` and `{y}`",
            op.symbol().trim()
        ))),
        (op, Term::Int(a), Term::Int(b)) => match op {
            BinOp::Add => a.checked_add(b).map(Term::Int).ok_or_else(overflow),
            BinOp::Sub => a.checked_sub(b).map(Term::Int).ok_or_else(overflow),
            BinOp::Mul => a.checked_mul(b).map(Term::Int).ok_or_else(overflow),
            BinOp::Div => {
                if b == 0 {
                    Err(Error::DivisionByZero(whole.to_string()))
                } else if a % b == 0 {
                    Ok(Term::Int(a / b))
                } else {
                    Ok(Term::real(a as f64 / b as f64))
                }
            }
            BinOp::Append | BinOp::Diff => unreachable!(),
        },
        (op, x, y) => match (number(&x), number(&y)) {
            (Some(a), Some(b)) => match op {
                BinOp::Add => Ok(Term::real(a + b)),
                BinOp::Sub => Ok(Term::real(a - b)),
                BinOp::Mul => Ok(Term::real(a * b)),
                BinOp::Div if b == 0.0 => Err(Error::DivisionByZero(whole.to_string())),
                BinOp::Div => Ok(Term::real(a / b)),
                BinOp::Append | BinOp::Diff => unreachable!(),
            },
            _ => Err(Error::Sort(format!(
                "arithmetic on non-numbers in `{whole}`"
            ))),
        },
    }
}

/// Numeric value of an evaluated term.
pub fn number(t: &Term) -> Option<f64> {
    match t {
        Term::Int(n) => Some(*n as f64),
        Term::Real(x) => Some(x.0),
        _ => None,
    }
}

/// Evaluate a ground built-in comparison.
pub fn eval_atom(a: &Atom) -> Result<bool> {
    let Atom::Cmp { op, lhs, rhs } = a else {
        return Err(Error::Sort(format!("`{a}` is not an interpreted atom")));
    };
    if !lhs.is_ground() || !rhs.is_ground() {
        return Err(Error::Flounder(a.to_string()));
    }
    let (x, y) = (eval_term(lhs)?, eval_term(rhs)?);
    match op {
        CmpOp::Same => Ok(x == y),
        CmpOp::Ne => Ok(x != y),
        _ => {
            let ord = match (&x, &y) {
                (Term::Int(a), Term::Int(b)) => a.cmp(b),
                _ => match (number(&x), number(&y)) {
                    (Some(a), Some(b)) => a
                        .partial_cmp(&b)
                        .ok_or_else(|| Error::Sort(format!("incomparable values in `{a}`")))?,
                    _ => {
                        return Err(Error::Sort(format!(
                            "`{}` on non-numbers in `{a}`",
                            op.symbol()
                        )))
                    }
                },
            };
            Ok(match op {
                CmpOp::Lt => ord.is_lt(),
                CmpOp::Le => ord.is_le(),
                CmpOp::Gt => ord.is_gt(),
                CmpOp::Ge => ord.is_ge(),
                CmpOp::Same | CmpOp::Ne => unreachable!(),
            })
        }
    }
}

/// Expand `[lo..hi]` segments in place and evaluate the other elements.
pub fn expand_range(items: &[Term]) -> Result<Vec<Term>> {
    let mut out = Vec::with_capacity(items.len());
    for item in items {
        match item {
            Term::Range(lo, hi) => {
                let (lo_v, hi_v) = (eval_term(lo)?, eval_term(hi)?);
                match (lo_v, hi_v) {
                    (Term::Int(a), Term::Int(b)) => out.extend((a..=b).map(Term::Int)),
                    (a, b) => {
                        return Err(Error::Sort(format!("non-integer range bounds `{a}..{b}`")))
                    }
                }
            }
            other => out.push(eval_term(other)?),
        }
    }
    Ok(out)
}

/// Evaluate all terms of a ground ordinary or equation atom. The time term
/// must reduce to an integer.
pub fn eval_ordinary_atom(a: &Atom) -> Result<Atom> {
    let time_of = |t: &Term| -> Result<Term> {
        match eval_term(t)? {
            Term::Int(n) => Ok(Term::Int(n)),
            other => Err(Error::Sort(format!(
                "time term `{other}` of `{a}` is not an integer"
            ))),
        }
    };
    match a {
        Atom::Ord { pred, args, time } => Ok(Atom::Ord {
            pred: pred.clone(),
            args: args.iter().map(eval_term).collect::<Result<_>>()?,
            time: time_of(time)?,
        }),
        Atom::Eq { lhs, rhs, time } => Ok(Atom::Eq {
            lhs: eval_term(lhs)?,
            rhs: eval_term(rhs)?,
            time: time_of(time)?,
        }),
        Atom::Cmp { .. } => Err(Error::Sort(format!("`{a}` is interpreted"))),
    }
}
