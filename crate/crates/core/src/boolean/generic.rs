//! Generic filters on finite posets by diagonalization through dense sets.

use serde::{Deserialize, Serialize};

use super::BvmError;

/// A finite partial order of forcing conditions. `p <= q` reads "p is
/// stronger than q".
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Poset {
    conditions: Vec<String>,
    /// `below[p][q]` iff `p <= q`, reflexive and transitive.
    below: Vec<Vec<bool>>,
}

/// `{"conditions": [...], "leq": [[i, j], ...]}` with `[i, j]` meaning
/// condition `i` lies below condition `j`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PosetJson {
    pub conditions: Vec<String>,
    #[serde(default)]
    pub leq: Vec<[usize; 2]>,
}

impl Poset {
    pub fn new(conditions: Vec<String>, leq: &[[usize; 2]]) -> Result<Self, BvmError> {
        let n = conditions.len();
        if n == 0 {
            return Err(BvmError::EmptyPoset);
        }
        let mut below = vec![vec![false; n]; n];
        for (p, row) in below.iter_mut().enumerate() {
            row[p] = true;
        }
        for &[p, q] in leq {
            if p >= n || q >= n {
                return Err(BvmError::UnknownCondition(format!("#{}", p.max(q))));
            }
            below[p][q] = true;
        }
        for k in 0..n {
            for p in 0..n {
                if below[p][k] {
                    for q in 0..n {
                        if below[k][q] {
                            below[p][q] = true;
                        }
                    }
                }
            }
        }
        for p in 0..n {
            for q in p + 1..n {
                if below[p][q] && below[q][p] {
                    return Err(BvmError::NotAPartialOrder(format!(
                        "{} and {} lie below each other",
                        conditions[p], conditions[q]
                    )));
                }
            }
        }
        Ok(Poset { conditions, below })
    }

    pub fn len(&self) -> usize {
        self.conditions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.conditions.is_empty()
    }

    pub fn conditions(&self) -> &[String] {
        &self.conditions
    }

    pub fn leq(&self, p: usize, q: usize) -> bool {
        self.below[p][q]
    }

    pub fn index(&self, name: &str) -> Result<usize, BvmError> {
        self.conditions
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| BvmError::UnknownCondition(name.into()))
    }

    /// Least condition with nothing strictly above it.
    pub fn root(&self) -> usize {
        (0..self.len())
            .find(|&p| (0..self.len()).all(|q| q == p || !self.leq(p, q)))
            .expect("a finite poset has a maximal element")
    }

    /// The least condition that lies below no member of `set`, if any.
    pub fn density_failure(&self, set: &[usize]) -> Option<usize> {
        (0..self.len()).find(|&p| !set.iter().any(|&d| self.leq(d, p)))
    }
}

impl TryFrom<PosetJson> for Poset {
    type Error = BvmError;

    fn try_from(j: PosetJson) -> Result<Self, BvmError> {
        Poset::new(j.conditions, &j.leq)
    }
}

impl From<&Poset> for PosetJson {
    fn from(p: &Poset) -> Self {
        let n = p.len();
        // Covering pairs only.
        let leq = (0..n)
            .flat_map(|a| (0..n).map(move |b| [a, b]))
            .filter(|&[a, b]| {
                a != b && p.leq(a, b) && !(0..n).any(|c| c != a && c != b && p.leq(a, c) && p.leq(c, b))
            })
            .collect();
        PosetJson {
            conditions: p.conditions.clone(),
            leq,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GenericFilter {
    /// The descending sequence, starting at the root.
    pub sequence: Vec<String>,
    /// Members of the filter, in condition order.
    pub filter: Vec<String>,
    /// For each dense set, the least filter member in it.
    pub meets: Vec<String>,
}

/// Descend from the root through the dense sets in order, taking the least
/// eligible condition each time, and return the generated filter.
pub fn build_generic_filter(p: &Poset, dense: &[Vec<usize>]) -> Result<GenericFilter, BvmError> {
    for (i, d) in dense.iter().enumerate() {
        if let Some(&bad) = d.iter().find(|&&x| x >= p.len()) {
            return Err(BvmError::UnknownCondition(format!("#{bad}")));
        }
        if let Some(c) = p.density_failure(d) {
            return Err(BvmError::NotDense {
                set: i,
                condition: p.conditions[c].clone(),
            });
        }
    }
    let mut current = p.root();
    let mut sequence = vec![current];
    for d in dense {
        let mut eligible: Vec<usize> = d.iter().copied().filter(|&x| p.leq(x, current)).collect();
        eligible.sort_unstable();
        current = eligible[0];
        sequence.push(current);
    }
    let members: Vec<usize> = (0..p.len()).filter(|&q| p.leq(current, q)).collect();

    // Verify the filter before returning it.
    let inside = |q: usize| members.contains(&q);
    for &a in &members {
        for q in 0..p.len() {
            if p.leq(a, q) && !inside(q) {
                return Err(BvmError::Internal("filter is not upward closed".into()));
            }
        }
        for &b in &members {
            if !members.iter().any(|&c| p.leq(c, a) && p.leq(c, b)) {
                return Err(BvmError::Internal("filter is not downward directed".into()));
            }
        }
    }
    let mut meets = Vec::new();
    for d in dense {
        let hit = members
            .iter()
            .copied()
            .find(|q| d.contains(q))
            .ok_or_else(|| BvmError::Internal("filter misses a dense set".into()))?;
        meets.push(p.conditions[hit].clone());
    }
    let name = |q: usize| p.conditions[q].clone();
    Ok(GenericFilter {
        sequence: sequence.into_iter().map(name).collect(),
        filter: members.into_iter().map(name).collect(),
        meets,
    })
}

/// Binary strings of length at most `height`, ordered by length and then
/// lexicographically; longer extensions are stronger. The empty string is
/// written `e`.
pub fn binary_tree(height: usize) -> Poset {
    let mut strings = vec![String::new()];
    let mut start = 0;
    for _ in 0..height {
        let end = strings.len();
        for i in start..end {
            for bit in ['0', '1'] {
                let mut s = strings[i].clone();
                s.push(bit);
                strings.push(s);
            }
        }
        start = end;
    }
    let mut leq = Vec::new();
    for (i, s) in strings.iter().enumerate().skip(1) {
        let parent = &s[..s.len() - 1];
        let j = strings.iter().position(|t| t == parent).expect("parent");
        leq.push([i, j]);
    }
    let conditions = strings
        .into_iter()
        .map(|s| if s.is_empty() { "e".into() } else { s })
        .collect();
    Poset::new(conditions, &leq).expect("a tree is a partial order")
}

/// For `k` in `1..=height`, the conditions of length at least `k`.
pub fn level_dense_sets(tree: &Poset, height: usize) -> Vec<Vec<usize>> {
    let len = |s: &str| if s == "e" { 0 } else { s.len() };
    (1..=height)
        .map(|k| {
            tree.conditions()
                .iter()
                .enumerate()
                .filter(|(_, s)| len(s) >= k)
                .map(|(i, _)| i)
                .collect()
        })
        .collect()
}
