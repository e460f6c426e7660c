use std::collections::BTreeSet;

/// All subset-minimal sets that contain at least one element of every
/// member of `family`. An empty family has the single hitting set `{}`.
pub fn hitting_sets<T: Ord + Clone>(family: &[Vec<T>]) -> Vec<BTreeSet<T>> {
    let mut sets: Vec<BTreeSet<T>> = family.iter().map(|s| s.iter().cloned().collect()).collect();
    sets.sort_by_key(|s| s.len());
    let mut current: Vec<BTreeSet<T>> = vec![BTreeSet::new()];
    for s in &sets {
        let mut next: BTreeSet<BTreeSet<T>> = BTreeSet::new();
        for h in &current {
            if h.iter().any(|x| s.contains(x)) {
                next.insert(h.clone());
            } else {
                for x in s {
                    let mut h2 = h.clone();
                    h2.insert(x.clone());
                    next.insert(h2);
                }
            }
        }
        current = minimize(next.into_iter().collect());
    }
    current.sort();
    current
}

fn minimize<T: Ord>(mut sets: Vec<BTreeSet<T>>) -> Vec<BTreeSet<T>> {
    sets.sort_by_key(|s| s.len());
    let mut out: Vec<BTreeSet<T>> = Vec::with_capacity(sets.len());
    for s in sets {
        if !out.iter().any(|m| m.is_subset(&s)) {
            out.push(s);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn set(xs: &[&'static str]) -> BTreeSet<&'static str> {
        xs.iter().copied().collect()
    }

    #[test]
    fn example_family() {
        let hs = hitting_sets(&[vec!["pa", "qa"], vec!["pb", "qb"]]);
        assert_eq!(hs.len(), 4);
        for want in [
            set(&["qa", "qb"]),
            set(&["qa", "pb"]),
            set(&["pa", "qb"]),
            set(&["pa", "pb"]),
        ] {
            assert!(hs.contains(&want));
        }
    }

    #[test]
    fn empty_family() {
        let hs: Vec<BTreeSet<u8>> = hitting_sets(&[]);
        assert_eq!(hs, vec![BTreeSet::new()]);
    }

    #[test]
    fn minimality() {
        assert_eq!(
            hitting_sets(&[vec!["a"], vec!["a", "b"]]),
            vec![set(&["a"])]
        );
    }

    /// Brute force: all subsets of the universe that hit every member and
    /// have no proper subset that does.
    fn brute(family: &[Vec<u8>]) -> Vec<BTreeSet<u8>> {
        let universe: Vec<u8> = family
            .iter()
            .flatten()
            .copied()
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let hits = |h: &BTreeSet<u8>| family.iter().all(|s| s.iter().any(|x| h.contains(x)));
        let all: Vec<BTreeSet<u8>> = (0u32..1 << universe.len())
            .map(|mask| {
                universe
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| mask >> i & 1 == 1)
                    .map(|(_, x)| *x)
                    .collect()
            })
            .filter(|h| hits(h))
            .collect();
        let mut out: Vec<BTreeSet<u8>> = all
            .iter()
            .filter(|h| !all.iter().any(|g| g.len() < h.len() && g.is_subset(h)))
            .cloned()
            .collect();
        out.sort();
        out
    }

    proptest! {
        #[test]
        fn agrees_with_brute_force(family in prop::collection::vec(prop::collection::vec(0u8..6, 1..4), 0..5)) {
            prop_assert_eq!(hitting_sets(&family), brute(&family));
        }
    }
}
