//! Boolean ultrapowers of a finite classical structure.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use super::{
    quotient_by_ultrafilter, tuples, BRelation, BValuedStructure, BvmError, CRelation,
    ClassicalStructure, FiniteBooleanAlgebra, MaximalAntichain, Ultrafilter,
};

/// Cap on the number of functions from an index set into the structure.
const MAX_FUNCTIONS: usize = 4096;

/// Cap on the structure size for brute-force isomorphism search.
const MAX_ISO_SIZE: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum UltrapowerMode {
    Quotient,
    /// Direct limit of classical ultrapowers over a family of maximal
    /// antichains, directed under refinement.
    AntichainLimit(Vec<MaximalAntichain>),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct UltrapowerResult {
    #[serde(skip)]
    pub structure: ClassicalStructure,
    /// Image of each element of the base structure.
    pub embedding: Vec<usize>,
    /// Names (quotient mode) or stage elements (limit mode) collapsed.
    pub names: usize,
    pub stages: usize,
}

fn function_count(base: usize, len: usize) -> Result<usize, BvmError> {
    let count = (0..len).try_fold(1usize, |acc, _| acc.checked_mul(base));
    match count {
        Some(c) if c <= MAX_FUNCTIONS => Ok(c),
        _ => Err(BvmError::CapExceeded {
            what: "functions into the structure",
            requested: count.unwrap_or(usize::MAX),
            cap: MAX_FUNCTIONS,
        }),
    }
}

/// Function number `code` from `0..len` to `0..base`, little-endian digits.
fn decode(code: usize, base: usize, len: usize) -> Vec<usize> {
    let mut c = code;
    (0..len)
        .map(|_| {
            let d = c % base;
            c /= base;
            d
        })
        .collect()
}

fn encode(f: &[usize], base: usize) -> usize {
    f.iter().rev().fold(0, |acc, &d| acc * base + d)
}

fn constant_code(x: usize, base: usize, len: usize) -> usize {
    encode(&vec![x; len], base)
}

/// The Boolean-valued structure whose names are all functions from the
/// atoms of `alg` into `v0`; the constant functions are the check names.
/// Atomic values are computed atom by atom, so every atom's stalk is `v0`.
pub fn check_names_structure(
    v0: &ClassicalStructure,
    alg: &FiniteBooleanAlgebra,
) -> Result<BValuedStructure, BvmError> {
    let k = v0.len();
    let n = alg.atom_count();
    let count = function_count(k, n)?;
    let funcs: Vec<Vec<usize>> = (0..count).map(|c| decode(c, k, n)).collect();
    let names: Vec<String> = funcs
        .iter()
        .map(|f| {
            f.iter()
                .map(|&x| v0.elements[x].as_str())
                .collect::<Vec<_>>()
                .join(".")
        })
        .collect();
    let agree = |f: &[usize], g: &[usize]| -> u64 {
        (0..n).filter(|&a| f[a] == g[a]).fold(0, |acc, a| acc | 1 << a)
    };
    let eq = funcs
        .iter()
        .map(|f| funcs.iter().map(|g| agree(f, g)).collect())
        .collect();
    let mut relations = BTreeMap::new();
    for (r, rel) in &v0.relations {
        let mut values = BTreeMap::new();
        for tuple in tuples(count, rel.arity) {
            let v = (0..n)
                .filter(|&a| {
                    let image: Vec<usize> = tuple.iter().map(|&t| funcs[t][a]).collect();
                    rel.tuples.contains(&image)
                })
                .fold(0u64, |acc, a| acc | 1 << a);
            if v != 0 {
                values.insert(tuple, v);
            }
        }
        relations.insert(r.clone(), BRelation { arity: rel.arity, values });
    }
    Ok(BValuedStructure {
        algebra: *alg,
        names,
        eq,
        relations,
    })
}

pub fn boolean_ultrapower(
    v0: &ClassicalStructure,
    alg: &FiniteBooleanAlgebra,
    u: &Ultrafilter,
    mode: &UltrapowerMode,
) -> Result<UltrapowerResult, BvmError> {
    if v0.is_empty() {
        return Err(BvmError::Internal("the base structure is empty".into()));
    }
    let result = match mode {
        UltrapowerMode::Quotient => {
            let s = check_names_structure(v0, alg)?;
            let q = quotient_by_ultrafilter(&s, u)?;
            let n = alg.atom_count();
            let embedding = (0..v0.len())
                .map(|x| q.class_of[constant_code(x, v0.len(), n)])
                .collect();
            UltrapowerResult {
                structure: q.structure,
                embedding,
                names: s.names.len(),
                stages: 1,
            }
        }
        UltrapowerMode::AntichainLimit(family) => antichain_limit(v0, u, family)?,
    };
    if !is_isomorphism(v0, &result.structure, &result.embedding) {
        return Err(BvmError::Internal(
            "the embedding into the ultrapower is not an isomorphism".into(),
        ));
    }
    Ok(result)
}

struct Stage {
    antichain: MaximalAntichain,
    /// Class of each function `A -> V0`, by code.
    class_of: Vec<usize>,
    /// Least function code in each class.
    reps: Vec<usize>,
}

fn antichain_limit(
    v0: &ClassicalStructure,
    u: &Ultrafilter,
    family: &[MaximalAntichain],
) -> Result<UltrapowerResult, BvmError> {
    if family.is_empty() {
        return Err(BvmError::NotAnAntichain("the antichain family is empty".into()));
    }
    for i in 0..family.len() {
        for j in i + 1..family.len() {
            if !family
                .iter()
                .any(|c| c.refines(&family[i]) && c.refines(&family[j]))
            {
                return Err(BvmError::NotDirected(i, j));
            }
        }
    }
    let k = v0.len();
    // The ultrafilter induced on the index set of an antichain: a set of
    // positions is large when the join of those elements lies in `u`.
    let large = |a: &MaximalAntichain, positions: &[usize]| {
        u.contains(positions.iter().fold(0, |acc, &p| acc | a.elements()[p]))
    };

    let mut stages = Vec::new();
    for a in family {
        let m = a.elements().len();
        let count = function_count(k, m)?;
        let funcs: Vec<Vec<usize>> = (0..count).map(|c| decode(c, k, m)).collect();
        let mut class_of = vec![usize::MAX; count];
        let mut reps = Vec::new();
        for f in 0..count {
            if class_of[f] != usize::MAX {
                continue;
            }
            let c = reps.len();
            reps.push(f);
            for g in f..count {
                let agree: Vec<usize> = (0..m).filter(|&p| funcs[f][p] == funcs[g][p]).collect();
                if large(a, &agree) {
                    class_of[g] = c;
                }
            }
        }
        stages.push(Stage {
            antichain: a.clone(),
            class_of,
            reps,
        });
    }

    // Identify stage elements along the refinement maps.
    let offsets: Vec<usize> = stages
        .iter()
        .scan(0, |acc, s| {
            let o = *acc;
            *acc += s.reps.len();
            Some(o)
        })
        .collect();
    let total = offsets.last().unwrap() + stages.last().unwrap().reps.len();
    let mut parent: Vec<usize> = (0..total).collect();
    fn find(parent: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while parent[r] != r {
            r = parent[r];
        }
        let mut y = x;
        while parent[y] != r {
            let next = parent[y];
            parent[y] = r;
            y = next;
        }
        r
    }
    for (i, coarse) in stages.iter().enumerate() {
        for (j, fine) in stages.iter().enumerate() {
            if i == j || !fine.antichain.refines(&coarse.antichain) {
                continue;
            }
            let pi = fine
                .antichain
                .refinement_map(&coarse.antichain)
                .expect("refinement");
            let m = coarse.antichain.elements().len();
            for (c, &rep) in coarse.reps.iter().enumerate() {
                let f = decode(rep, k, m);
                let pulled: Vec<usize> = pi.iter().map(|&p| f[p]).collect();
                let target = fine.class_of[encode(&pulled, k)];
                let (x, y) = (find(&mut parent, offsets[i] + c), find(&mut parent, offsets[j] + target));
                if x != y {
                    parent[x.max(y)] = x.min(y);
                }
            }
        }
    }
    let mut limit_of = vec![usize::MAX; total];
    let mut roots: BTreeMap<usize, usize> = BTreeMap::new();
    for x in 0..total {
        let r = find(&mut parent, x);
        let next = roots.len();
        limit_of[x] = *roots.entry(r).or_insert(next);
    }
    let size = roots.len();

    // Relations: a tuple holds in the limit when it holds at some stage;
    // every stage must then agree.
    let mut relations = BTreeMap::new();
    for (r, rel) in &v0.relations {
        let holds_at = |stage: &Stage, classes: &[usize]| {
            let m = stage.antichain.elements().len();
            let funcs: Vec<Vec<usize>> = classes.iter().map(|&c| decode(stage.reps[c], k, m)).collect();
            let positions: Vec<usize> = (0..m)
                .filter(|&p| {
                    let image: Vec<usize> = funcs.iter().map(|f| f[p]).collect();
                    rel.tuples.contains(&image)
                })
                .collect();
            large(&stage.antichain, &positions)
        };
        let mut holds = BTreeSet::new();
        let mut seen: BTreeMap<Vec<usize>, bool> = BTreeMap::new();
        for (i, stage) in stages.iter().enumerate() {
            for classes in tuples(stage.reps.len(), rel.arity) {
                let image: Vec<usize> = classes.iter().map(|&c| limit_of[offsets[i] + c]).collect();
                let h = holds_at(stage, &classes);
                if let Some(&prev) = seen.get(&image) {
                    if prev != h {
                        return Err(BvmError::Internal(format!(
                            "relation {r} disagrees between stages of the direct limit"
                        )));
                    }
                }
                seen.insert(image.clone(), h);
                if h {
                    holds.insert(image);
                }
            }
        }
        relations.insert(r.clone(), CRelation { arity: rel.arity, tuples: holds });
    }
    let first = &stages[0];
    let m0 = first.antichain.elements().len();
    let embedding: Vec<usize> = (0..k)
        .map(|x| limit_of[first.class_of[constant_code(x, k, m0)]])
        .collect();
    let mut labels = vec![String::new(); size];
    for x in (0..k).rev() {
        labels[embedding[x]] = v0.elements[x].clone();
    }
    for (i, l) in labels.iter_mut().enumerate() {
        if l.is_empty() {
            *l = format!("#{i}");
        }
    }
    Ok(UltrapowerResult {
        structure: ClassicalStructure {
            elements: labels,
            relations,
        },
        embedding,
        names: total,
        stages: stages.len(),
    })
}

fn is_isomorphism(a: &ClassicalStructure, b: &ClassicalStructure, map: &[usize]) -> bool {
    if a.len() != b.len() || map.len() != a.len() {
        return false;
    }
    let image: BTreeSet<usize> = map.iter().copied().collect();
    if image.len() != a.len() || image.iter().any(|&x| x >= b.len()) {
        return false;
    }
    let names_a: BTreeSet<(&String, usize)> = a.relations.iter().map(|(r, x)| (r, x.arity)).collect();
    let names_b: BTreeSet<(&String, usize)> = b.relations.iter().map(|(r, x)| (r, x.arity)).collect();
    if names_a != names_b {
        return false;
    }
    a.relations.iter().all(|(r, rel)| {
        let mapped: BTreeSet<Vec<usize>> = rel
            .tuples
            .iter()
            .map(|t| t.iter().map(|&x| map[x]).collect())
            .collect();
        mapped == b.relations[r].tuples
    })
}

/// Least (lexicographic) isomorphism from `a` onto `b`, by brute force.
pub fn find_isomorphism(a: &ClassicalStructure, b: &ClassicalStructure) -> Result<Option<Vec<usize>>, BvmError> {
    if a.len() != b.len() {
        return Ok(None);
    }
    if a.len() > MAX_ISO_SIZE {
        return Err(BvmError::CapExceeded {
            what: "structure size for isomorphism search",
            requested: a.len(),
            cap: MAX_ISO_SIZE,
        });
    }
    fn go(
        a: &ClassicalStructure,
        b: &ClassicalStructure,
        map: &mut Vec<usize>,
        used: &mut Vec<bool>,
    ) -> bool {
        if map.len() == a.len() {
            return is_isomorphism(a, b, map);
        }
        for y in 0..b.len() {
            if !used[y] {
                used[y] = true;
                map.push(y);
                if go(a, b, map, used) {
                    return true;
                }
                map.pop();
                used[y] = false;
            }
        }
        false
    }
    let mut map = Vec::new();
    let found = go(a, b, &mut map, &mut vec![false; b.len()]);
    Ok(found.then_some(map))
}
