#![allow(dead_code)]

use plp_core::ground::{ground_program, intern_query_literal, GroundOptions, GroundProgram, Lit};
use plp_core::semantics::{oracle_success_probability, OracleOptions};
use plp_core::stratify::check_sbtp;
use plp_core::syntax::{parse_program, Atom, Literal, Program, Sign};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub const MAX_FACTS: usize = 15;

pub struct Generated {
    pub source: String,
    pub program: Program,
    pub eot: i64,
    /// Unguided grounding without a query.
    pub full: GroundProgram,
}

const PROBS: [&str; 5] = ["0.2", "0.3", "0.5", "0.6", "0.7"];
const CONSTS: [&str; 2] = ["a", "b"];

fn pr(rng: &mut ChaCha8Rng) -> &'static str {
    PROBS.choose(rng).unwrap()
}

fn c(rng: &mut ChaCha8Rng) -> &'static str {
    CONSTS.choose(rng).unwrap()
}

fn template(rng: &mut ChaCha8Rng, k: usize) -> String {
    match k {
        0 => format!("{} :: p(X) @ T :- q(X) @ T.", pr(rng)),
        1 => "p(X) @ T :- q(X) @ T.".into(),
        2 => format!("{} :: q(X) @ T+1 :- p(X) @ T.", pr(rng)),
        3 => "q(X) @ T+1 :- r(X) @ T.".into(),
        4 => "r(X) @ T :- q(X) @ T, \\+ p(X) @ T.".into(),
        5 => format!(
            "{} :: r(X) @ T :- p(X) @ T, \\+ (q(Y) @ S, S < T).",
            pr(rng)
        ),
        6 => "p(Y) @ T :- f(X) = Y @ T.".into(),
        7 => format!(
            "{} :: r(X) @ T :- q(X) @ T, \\+ f(X) = {} @ T.",
            pr(rng),
            c(rng)
        ),
        8 => format!(
            "{} :: p(X) @ T + 0.3 :: u(X) @ T :- q(X) @ T.",
            ["0.1", "0.4", "0.6"].choose(rng).unwrap()
        ),
        9 => format!("{} :: s @ T :- p(X) @ T, r(X) @ T.", pr(rng)),
        10 => format!("{} :: r({}) @ T :- q({}) @ T.", pr(rng), c(rng), c(rng)),
        _ => "s @ T :- u(X) @ T, \\+ r(X) @ T.".into(),
    }
}

fn distribution(rng: &mut ChaCha8Rng) -> String {
    match rng.gen_range(0..3) {
        0 => "f(X) ~ [a, b] @ T :- q(X) @ T.".into(),
        1 => format!(
            "f(X) ~ [[a, {}], [b, 0.3]] @ T :- q(X) @ T.",
            ["0.2", "0.5", "0.7"].choose(rng).unwrap()
        ),
        _ => format!(
            "f({}) ~ [[a, 0.4], [b, 0.4]] @ {}.",
            c(rng),
            rng.gen_range(0..2)
        ),
    }
}

/// Try one random program; `None` when it is not stratified or too large.
pub fn try_program(rng: &mut ChaCha8Rng) -> Option<Generated> {
    let eot = rng.gen_range(1..=3);
    let mut lines = Vec::new();
    for _ in 0..rng.gen_range(1..=3) {
        let t = rng.gen_range(0..=eot.min(1));
        if rng.gen_bool(0.7) {
            lines.push(format!("{} :: q({}) @ {t}.", pr(rng), c(rng)));
        } else {
            lines.push(format!("q({}) @ {t}.", c(rng)));
        }
    }
    if rng.gen_bool(0.5) {
        lines.push(distribution(rng));
    }
    for _ in 0..rng.gen_range(1..=4) {
        let k = rng.gen_range(0..12);
        lines.push(template(rng, k));
    }
    lines.dedup();
    let source = lines.join("\n");
    let program = parse_program(&source).ok()?;
    check_sbtp(&program).ok()?;
    let full = ground_program(&program, &[], eot, GroundOptions::unguided()).ok()?;
    if full.facts.len() > MAX_FACTS {
        return None;
    }
    // Enumerates every choice and checks right-uniqueness in each model.
    oracle_success_probability(&full, &[], OracleOptions { strict: true })
        .unwrap_or_else(|e| panic!("generated program is not admissible ({e}):\n{source}"));
    Some(Generated {
        source,
        program,
        eot,
        full,
    })
}

pub fn random_program(rng: &mut ChaCha8Rng) -> Generated {
    loop {
        if let Some(g) = try_program(rng) {
            return g;
        }
    }
}

/// User atoms of a grounding.
pub fn user_atoms(g: &GroundProgram) -> Vec<Atom> {
    (0..g.atoms.len() as u32)
        .map(plp_core::ground::AtomId)
        .filter(|a| !g.atoms.is_internal(*a))
        .map(|a| g.atoms.atom(a).clone())
        .collect()
}

/// One to three random ground literals over the atoms of `full`.
pub fn random_literals(rng: &mut ChaCha8Rng, full: &GroundProgram) -> Vec<Literal> {
    let atoms = user_atoms(full);
    let n = rng.gen_range(1..=3);
    (0..n)
        .map(|_| Literal {
            sign: if rng.gen_bool(0.7) {
                Sign::Positive
            } else {
                Sign::Negative
            },
            atom: atoms.choose(rng).unwrap().clone(),
        })
        .collect()
}

/// A random conditional query text with 0 to 2 evidence atoms.
pub fn random_query(rng: &mut ChaCha8Rng, g: &Generated) -> String {
    let t = rng.gen_range(0..=g.eot);
    let body = match rng.gen_range(0..6) {
        0 => format!("p(X) @ {t}"),
        1 => format!("r(X) @ {t}, \\+ q(X) @ {}", rng.gen_range(0..=t)),
        2 => format!("f({}) = V @ {t}", c(rng)),
        3 => format!("\\+ (p(X) @ S, S < {t})"),
        4 => format!("s @ {t}"),
        _ => format!("q({}) @ {t}, \\+ u({}) @ {t}", c(rng), c(rng)),
    };
    let atoms = user_atoms(&g.full);
    let ev: Vec<String> = (0..rng.gen_range(0..=2))
        .map(|_| atoms.choose(rng).unwrap().to_string())
        .collect();
    if ev.is_empty() {
        format!("?- {body}.")
    } else {
        format!("?- {body} | {}.", ev.join(", "))
    }
}

/// Ground `p` for `lits` and intern the literals as a query.
pub fn ground_for(
    p: &Program,
    lits: &[Literal],
    eot: i64,
    opts: GroundOptions,
) -> (GroundProgram, Vec<Lit>) {
    let mut g = ground_program(p, lits, eot, opts).unwrap();
    let q = lits
        .iter()
        .map(|l| intern_query_literal(&mut g.atoms, &g.strata, l).unwrap())
        .collect();
    (g, q)
}
