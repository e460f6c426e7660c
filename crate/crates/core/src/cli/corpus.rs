//! Example programs shipped with the engine.

pub const INTRO: &str = include_str!("../../corpus/intro.plp");
pub const EXAMPLE1: &str = include_str!("../../corpus/example1.plp");
pub const MARKOV: &str = include_str!("../../corpus/markov.plp");
pub const HMM: &str = include_str!("../../corpus/hmm.plp");
pub const URN: &str = include_str!("../../corpus/urn.plp");

/// All corpus programs by name.
pub const ALL: [(&str, &str); 5] = [
    ("intro", INTRO),
    ("example1", EXAMPLE1),
    ("markov", MARKOV),
    ("hmm", HMM),
    ("urn", URN),
];

pub fn get(name: &str) -> Option<&'static str> {
    ALL.iter().find(|(n, _)| *n == name).map(|(_, s)| *s)
}
