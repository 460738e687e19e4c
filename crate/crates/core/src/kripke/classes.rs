use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{Frame, KripkeError};
use crate::worldset::WorldSet;

/// Frame-class predicates.
///
/// `Transitive`, `Universal`, `PartialOrder` and `StrictPartialOrder` are
/// the finite frame classes of K4, S5, Grz and GL.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum FrameClass {
    Arbitrary,
    Transitive,
    Preorder,
    DirectedPreorder,
    PreLattice,
    PreBooleanAlgebra,
    LinearPreorder,
    Universal,
    PartialOrder,
    StrictPartialOrder,
}

impl FrameClass {
    pub const ALL: [FrameClass; 10] = [
        FrameClass::Arbitrary,
        FrameClass::Transitive,
        FrameClass::Preorder,
        FrameClass::DirectedPreorder,
        FrameClass::PreLattice,
        FrameClass::PreBooleanAlgebra,
        FrameClass::LinearPreorder,
        FrameClass::Universal,
        FrameClass::PartialOrder,
        FrameClass::StrictPartialOrder,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FrameClass::Arbitrary => "Arbitrary",
            FrameClass::Transitive => "Transitive",
            FrameClass::Preorder => "Preorder",
            FrameClass::DirectedPreorder => "DirectedPreorder",
            FrameClass::PreLattice => "PreLattice",
            FrameClass::PreBooleanAlgebra => "PreBooleanAlgebra",
            FrameClass::LinearPreorder => "LinearPreorder",
            FrameClass::Universal => "Universal",
            FrameClass::PartialOrder => "PartialOrder",
            FrameClass::StrictPartialOrder => "StrictPartialOrder",
        }
    }

    /// Whether every frame of this class must be reflexive. Enumeration
    /// uses it to skip irreflexive candidates early.
    pub(crate) fn requires_reflexive(self) -> bool {
        !matches!(
            self,
            FrameClass::Arbitrary | FrameClass::Transitive | FrameClass::StrictPartialOrder
        )
    }

    pub fn contains(self, fr: &Frame) -> bool {
        match self {
            FrameClass::Arbitrary => true,
            FrameClass::Transitive => fr.is_transitive(),
            FrameClass::Preorder => is_preorder(fr),
            FrameClass::DirectedPreorder => is_preorder(fr) && is_convergent(fr),
            FrameClass::PreLattice => {
                is_preorder(fr) && quotient_unchecked(fr).is_lattice()
            }
            FrameClass::PreBooleanAlgebra => {
                is_preorder(fr) && quotient_unchecked(fr).powerset_embedding().is_some()
            }
            FrameClass::LinearPreorder => {
                is_preorder(fr) && fr.world_count() > 0 && quotient_unchecked(fr).is_chain()
            }
            FrameClass::Universal => {
                let all = fr.all_worlds();
                fr.world_count() > 0 && (0..fr.world_count()).all(|w| *fr.successors(w) == all)
            }
            FrameClass::PartialOrder => is_preorder(fr) && fr.is_antisymmetric(),
            FrameClass::StrictPartialOrder => fr.is_irreflexive() && fr.is_transitive(),
        }
    }
}

impl fmt::Display for FrameClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FrameClass {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        FrameClass::ALL
            .into_iter()
            .find(|c| c.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown frame class `{s}`"))
    }
}

fn is_preorder(fr: &Frame) -> bool {
    fr.is_reflexive() && fr.is_transitive()
}

/// wRu and wRv imply a common successor of u and v.
fn is_convergent(fr: &Frame) -> bool {
    (0..fr.world_count()).all(|w| {
        let succ = fr.successors(w);
        succ.iter().all(|u| {
            succ.iter()
                .filter(|&v| v > u)
                .all(|v| fr.successors(u).intersects(fr.successors(v)))
        })
    })
}

pub fn classify_frame(fr: &Frame) -> BTreeSet<FrameClass> {
    FrameClass::ALL
        .into_iter()
        .filter(|c| c.contains(fr))
        .collect()
}

/// Clusters of mutually accessible worlds with the order they inherit.
///
/// Clusters are numbered by their least world. Cluster `i` lies below
/// cluster `j` when the worlds of `j` are accessible from those of `i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClusterQuotient {
    pub clusters: Vec<Vec<usize>>,
    pub cluster_of: Vec<usize>,
    /// `up[i]` is the set of clusters `j` with `i ≤ j`.
    pub up: Vec<WorldSet>,
}

pub fn quotient_poset(fr: &Frame) -> Result<ClusterQuotient, KripkeError> {
    if !fr.is_reflexive() {
        let w = (0..fr.world_count())
            .find(|&w| !fr.accessible(w, w))
            .unwrap_or(0);
        return Err(KripkeError::NotAPreorder(format!("world {w} is not reflexive")));
    }
    if !fr.is_transitive() {
        for u in 0..fr.world_count() {
            for v in fr.successors(u).iter() {
                if let Some(t) = fr.successors(v).difference(fr.successors(u)).first() {
                    return Err(KripkeError::NotAPreorder(format!(
                        "edges ({u},{v}) and ({v},{t}) but not ({u},{t})"
                    )));
                }
            }
        }
    }
    Ok(quotient_unchecked(fr))
}

fn quotient_unchecked(fr: &Frame) -> ClusterQuotient {
    let n = fr.world_count();
    let mut cluster_of = vec![usize::MAX; n];
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    for w in 0..n {
        if cluster_of[w] != usize::MAX {
            continue;
        }
        let id = clusters.len();
        let members: Vec<usize> = fr
            .successors(w)
            .iter()
            .filter(|&v| fr.accessible(v, w))
            .collect();
        for &v in &members {
            cluster_of[v] = id;
        }
        clusters.push(members);
    }
    let up = clusters
        .iter()
        .map(|members| {
            fr.successors(members[0])
                .iter()
                .map(|v| cluster_of[v])
                .collect()
        })
        .collect();
    ClusterQuotient {
        clusters,
        cluster_of,
        up,
    }
}

impl ClusterQuotient {
    pub fn len(&self) -> usize {
        self.clusters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clusters.is_empty()
    }

    pub fn leq(&self, i: usize, j: usize) -> bool {
        self.up[i].contains(j)
    }

    fn down(&self, j: usize) -> WorldSet {
        (0..self.len()).filter(|&i| self.leq(i, j)).collect()
    }

    /// Least upper bound of `i` and `j`, if any.
    pub fn join(&self, i: usize, j: usize) -> Option<usize> {
        let upper = self.up[i].intersection(&self.up[j]);
        let found = upper.iter().find(|&k| upper.is_subset(&self.up[k]));
        found
    }

    /// Greatest lower bound of `i` and `j`, if any.
    pub fn meet(&self, i: usize, j: usize) -> Option<usize> {
        let lower = self.down(i).intersection(&self.down(j));
        let found = lower.iter().find(|&k| lower.is_subset(&self.down(k)));
        found
    }

    pub fn is_lattice(&self) -> bool {
        !self.is_empty()
            && (0..self.len()).all(|i| {
                (i + 1..self.len()).all(|j| self.join(i, j).is_some() && self.meet(i, j).is_some())
            })
    }

    pub fn is_chain(&self) -> bool {
        (0..self.len()).all(|i| (0..self.len()).all(|j| self.leq(i, j) || self.leq(j, i)))
    }

    pub fn bottom(&self) -> Option<usize> {
        (0..self.len()).find(|&i| self.up[i] == WorldSet::full(self.len()))
    }

    /// Clusters covering the bottom, in cluster order.
    pub fn atoms(&self) -> Vec<usize> {
        let Some(bot) = self.bottom() else {
            return Vec::new();
        };
        (0..self.len())
            .filter(|&a| a != bot)
            .filter(|&a| {
                (0..self.len())
                    .all(|c| c == bot || c == a || !(self.leq(c, a)))
            })
            .collect()
    }

    /// When the quotient is order-isomorphic to the powerset of its atoms,
    /// the isomorphism: cluster `c` maps to the bit mask of atoms below it
    /// (bit `k` for the `k`-th atom of [`ClusterQuotient::atoms`]).
    pub fn powerset_embedding(&self) -> Option<Vec<u64>> {
        if self.is_empty() || !self.is_lattice() {
            return None;
        }
        let atoms = self.atoms();
        if atoms.len() >= 63 || self.len() != 1usize << atoms.len() {
            return None;
        }
        let image: Vec<u64> = (0..self.len())
            .map(|c| {
                atoms
                    .iter()
                    .enumerate()
                    .filter(|(_, &a)| self.leq(a, c))
                    .fold(0u64, |acc, (k, _)| acc | (1 << k))
            })
            .collect();
        let distinct: BTreeSet<u64> = image.iter().copied().collect();
        if distinct.len() != self.len() {
            return None;
        }
        let order_preserved = (0..self.len()).all(|c| {
            (0..self.len()).all(|d| self.leq(c, d) == (image[c] & !image[d] == 0))
        });
        order_preserved.then_some(image)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn frame(n: usize, edges: &[(usize, usize)]) -> Frame {
        Frame::new(n, edges.iter().copied()).unwrap()
    }

    fn reflexive_closure(n: usize, edges: &[(usize, usize)]) -> Frame {
        let mut all: Vec<(usize, usize)> = (0..n).map(|w| (w, w)).collect();
        all.extend_from_slice(edges);
        frame(n, &all)
    }

    #[test]
    fn two_chain_is_in_every_preorder_class() {
        let chain = frame(2, &[(0, 0), (1, 1), (0, 1)]);
        let classes = classify_frame(&chain);
        for c in [
            FrameClass::Preorder,
            FrameClass::DirectedPreorder,
            FrameClass::PreLattice,
            FrameClass::PreBooleanAlgebra,
            FrameClass::LinearPreorder,
        ] {
            assert!(classes.contains(&c), "{c} missing");
        }
        assert!(!classes.contains(&FrameClass::Universal));
        assert_eq!(
            quotient_poset(&chain).unwrap().powerset_embedding(),
            Some(vec![0, 1])
        );
    }

    #[test]
    fn diamond_is_pre_boolean_but_not_linear() {
        // 0 bottom, 1 and 2 middle, 3 top.
        let d = reflexive_closure(4, &[(0, 1), (0, 2), (0, 3), (1, 3), (2, 3)]);
        let classes = classify_frame(&d);
        assert!(classes.contains(&FrameClass::PreBooleanAlgebra));
        assert!(classes.contains(&FrameClass::PreLattice));
        assert!(!classes.contains(&FrameClass::LinearPreorder));
    }

    #[test]
    fn fork_is_not_directed() {
        let v = reflexive_closure(3, &[(0, 1), (0, 2)]);
        let classes = classify_frame(&v);
        assert!(classes.contains(&FrameClass::Preorder));
        assert!(!classes.contains(&FrameClass::DirectedPreorder));
        assert!(!classes.contains(&FrameClass::PreLattice));
    }

    #[test]
    fn three_element_chain_is_lattice_but_not_boolean() {
        let c = reflexive_closure(3, &[(0, 1), (0, 2), (1, 2)]);
        let classes = classify_frame(&c);
        assert!(classes.contains(&FrameClass::PreLattice));
        assert!(!classes.contains(&FrameClass::PreBooleanAlgebra));
    }

    #[test]
    fn quotient_examples() {
        let total = frame(3, &(0..3).flat_map(|i| (0..3).map(move |j| (i, j))).collect::<Vec<_>>());
        let q = quotient_poset(&total).unwrap();
        assert_eq!(q.clusters, vec![vec![0, 1, 2]]);

        let id = reflexive_closure(3, &[]);
        let q = quotient_poset(&id).unwrap();
        assert_eq!(q.clusters, vec![vec![0], vec![1], vec![2]]);
        assert!((0..3).all(|i| (0..3).all(|j| q.leq(i, j) == (i == j))));

        let two = frame(3, &[(0, 0), (0, 1), (1, 0), (1, 1), (0, 2), (1, 2), (2, 2)]);
        let q = quotient_poset(&two).unwrap();
        assert_eq!(q.clusters, vec![vec![0, 1], vec![2]]);
        assert_eq!(q.cluster_of, vec![0, 0, 1]);
        assert!(q.leq(0, 1) && !q.leq(1, 0));
        assert!(q.is_chain());
    }

    #[test]
    fn quotient_rejects_non_preorders() {
        assert!(matches!(
            quotient_poset(&frame(2, &[(0, 0)])),
            Err(KripkeError::NotAPreorder(_))
        ));
        assert!(matches!(
            quotient_poset(&reflexive_closure(3, &[(0, 1), (1, 2)])),
            Err(KripkeError::NotAPreorder(_))
        ));
    }

    #[test]
    fn class_names_parse() {
        for c in FrameClass::ALL {
            assert_eq!(c.name().parse::<FrameClass>().unwrap(), c);
        }
        assert!("Nope".parse::<FrameClass>().is_err());
    }
}
