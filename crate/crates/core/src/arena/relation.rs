use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RelationError {
    #[error("fact index {index} out of range (|D*| = {dstar})")]
    OutOfRange { index: usize, dstar: usize },
    #[error("relation lacks the (0,0) pair")]
    MissingZero,
    #[error("relations over domains of size {left} and {right}")]
    DomainMismatch { left: usize, right: usize },
    #[error("fact set does not contain the zero fact")]
    ZeroFactAbsent,
}

/// Bipartite representation of a distributive flow function over `D*`.
///
/// Pairs are kept sorted and deduplicated, so equality is set equality.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FlowRelation {
    dstar: usize,
    pairs: Vec<(u32, u32)>,
}

impl FlowRelation {
    pub fn new(dstar: usize, pairs: impl IntoIterator<Item = (usize, usize)>) -> Result<Self, RelationError> {
        let mut v = Vec::new();
        for (s, d) in pairs {
            for index in [s, d] {
                if index >= dstar {
                    return Err(RelationError::OutOfRange { index, dstar });
                }
            }
            v.push((s as u32, d as u32));
        }
        v.sort_unstable();
        v.dedup();
        if v.first() != Some(&(0, 0)) {
            return Err(RelationError::MissingZero);
        }
        Ok(FlowRelation { dstar, pairs: v })
    }

    pub fn identity(dstar: usize) -> Self {
        FlowRelation { dstar, pairs: (0..dstar as u32).map(|d| (d, d)).collect() }
    }

    pub fn dstar(&self) -> usize {
        self.dstar
    }

    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.pairs.iter().map(|&(s, d)| (s as usize, d as usize))
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn contains(&self, s: usize, d: usize) -> bool {
        self.pairs.binary_search(&(s as u32, d as u32)).is_ok()
    }

    /// Right-hand nodes adjacent to `s`.
    pub fn image(&self, s: usize) -> impl Iterator<Item = usize> + '_ {
        let lo = self.pairs.partition_point(|&(a, _)| (a as usize) < s);
        self.pairs[lo..].iter().take_while(move |&&(a, _)| a as usize == s).map(|&(_, d)| d as usize)
    }

    /// Left-hand nodes adjacent to `d`.
    pub fn preimage(&self, d: usize) -> impl Iterator<Item = usize> + '_ {
        self.pairs.iter().filter(move |&&(_, b)| b as usize == d).map(|&(a, _)| a as usize)
    }

    /// Largest degree of any node on either side of the bipartite graph.
    pub fn max_degree(&self) -> usize {
        let mut left = vec![0usize; self.dstar];
        let mut right = vec![0usize; self.dstar];
        for &(s, d) in &self.pairs {
            left[s as usize] += 1;
            right[d as usize] += 1;
        }
        left.into_iter().chain(right).max().unwrap_or(0)
    }
}

/// Relational join `r1 ; r2`, i.e. the representation of applying `r1` then `r2`.
pub fn compose_relations(r1: &FlowRelation, r2: &FlowRelation) -> Result<FlowRelation, RelationError> {
    if r1.dstar != r2.dstar {
        return Err(RelationError::DomainMismatch { left: r1.dstar, right: r2.dstar });
    }
    let mut out = Vec::new();
    for (s, mid) in r1.pairs() {
        out.extend(r2.image(mid).map(|d| (s, d)));
    }
    FlowRelation::new(r1.dstar, out)
}

/// Image of a fact set that contains `0`.
pub fn apply_relation(r: &FlowRelation, facts: &BTreeSet<usize>) -> Result<BTreeSet<usize>, RelationError> {
    if !facts.contains(&0) {
        return Err(RelationError::ZeroFactAbsent);
    }
    if let Some(&index) = facts.iter().find(|&&f| f >= r.dstar) {
        return Err(RelationError::OutOfRange { index, dstar: r.dstar });
    }
    Ok(facts.iter().flat_map(|&f| r.image(f)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rel(dstar: usize, pairs: &[(usize, usize)]) -> FlowRelation {
        FlowRelation::new(dstar, pairs.iter().copied()).unwrap()
    }

    fn set(xs: &[usize]) -> BTreeSet<usize> {
        xs.iter().copied().collect()
    }

    // Independent oracle: enumerate every triple.
    fn join_by_triples(r1: &FlowRelation, r2: &FlowRelation) -> BTreeSet<(usize, usize)> {
        let n = r1.dstar();
        let mut out = BTreeSet::new();
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    if r1.contains(a, c) && r2.contains(c, b) {
                        out.insert((a, b));
                    }
                }
            }
        }
        out
    }

    #[test]
    fn composition_examples() {
        // facts: 0, a=1, b=2
        let r1 = rel(3, &[(0, 0), (0, 1)]);
        let r2 = rel(3, &[(0, 0), (1, 2)]);
        let got: Vec<_> = compose_relations(&r1, &r2).unwrap().pairs().collect();
        assert_eq!(got, vec![(0, 0), (0, 2)]);

        let r1 = rel(2, &[(0, 0)]);
        let r2 = rel(2, &[(0, 0), (0, 1)]);
        let got: Vec<_> = compose_relations(&r1, &r2).unwrap().pairs().collect();
        assert_eq!(got, vec![(0, 0), (0, 1)]);

        let r = rel(3, &[(0, 0), (2, 1), (1, 1)]);
        assert_eq!(compose_relations(&FlowRelation::identity(3), &r).unwrap(), r);
    }

    #[test]
    fn composition_rejects_mismatched_domains() {
        let e = compose_relations(&FlowRelation::identity(2), &FlowRelation::identity(3)).unwrap_err();
        assert_eq!(e, RelationError::DomainMismatch { left: 2, right: 3 });
    }

    #[test]
    fn application_examples() {
        assert_eq!(apply_relation(&FlowRelation::identity(2), &set(&[0, 1])).unwrap(), set(&[0, 1]));
        assert_eq!(apply_relation(&rel(2, &[(0, 0), (0, 1)]), &set(&[0])).unwrap(), set(&[0, 1]));
        assert_eq!(apply_relation(&rel(2, &[(0, 0)]), &set(&[0, 1])).unwrap(), set(&[0]));
        assert_eq!(apply_relation(&rel(2, &[(0, 0)]), &set(&[1])), Err(RelationError::ZeroFactAbsent));
    }

    #[test]
    fn construction_checks() {
        assert_eq!(FlowRelation::new(2, [(1, 1)]), Err(RelationError::MissingZero));
        assert_eq!(FlowRelation::new(2, [(0, 0), (0, 2)]), Err(RelationError::OutOfRange { index: 2, dstar: 2 }));
        assert_eq!(rel(3, &[(0, 0), (0, 1), (0, 2), (1, 2)]).max_degree(), 3);
    }

    fn arb_relation(dstar: usize) -> impl Strategy<Value = FlowRelation> {
        prop::collection::vec((0..dstar, 0..dstar), 0..12).prop_map(move |ps| FlowRelation::new(dstar, ps.into_iter().chain([(0, 0)])).unwrap())
    }

    fn arb_case() -> impl Strategy<Value = (FlowRelation, FlowRelation, BTreeSet<usize>)> {
        (1usize..=5).prop_flat_map(|dstar| {
            (arb_relation(dstar), arb_relation(dstar), prop::collection::btree_set(0..dstar, 0..dstar)).prop_map(|(a, b, mut s)| {
                s.insert(0);
                (a, b, s)
            })
        })
    }

    proptest! {
        #[test]
        fn compose_matches_triple_enumeration((r1, r2, _) in arb_case()) {
            let got: BTreeSet<_> = compose_relations(&r1, &r2).unwrap().pairs().collect();
            prop_assert_eq!(got, join_by_triples(&r1, &r2));
        }

        #[test]
        fn compose_distributes_over_application((r1, r2, s) in arb_case()) {
            let joined = apply_relation(&compose_relations(&r1, &r2).unwrap(), &s).unwrap();
            let stepwise = apply_relation(&r2, &apply_relation(&r1, &s).unwrap()).unwrap();
            prop_assert!(joined.contains(&0));
            prop_assert_eq!(joined, stepwise);
        }
    }
}
