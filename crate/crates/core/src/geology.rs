//! Geology over finite multiverse graphs: grounds, bedrocks, mantles,
//! directedness, the generic multiverse and inner mantles.
//!
//! An edge `[w, v]` of the ground relation says `w` is a ground of `v`.
//! Every world is a ground of itself; those edges are implicit.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type WorldId = u64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GeologyError {
    #[error("unknown world {0}")]
    UnknownWorld(WorldId),
    #[error("duplicate world {0}")]
    DuplicateWorld(WorldId),
    #[error("ground relation is not transitive: {0} -> {1} -> {2} without {0} -> {2}")]
    NotTransitive(WorldId, WorldId, WorldId),
    #[error("ground relation is not antisymmetric: {0} and {1} are grounds of each other")]
    NotAntisymmetric(WorldId, WorldId),
    #[error("ground {ground} of {world} contains {element}, which {world} lacks")]
    ContentNotMonotone {
        ground: WorldId,
        world: WorldId,
        element: String,
    },
    #[error("forcing_ext edge {0} -> {1} is not a ground edge in reverse")]
    ForcingExtNotGround(WorldId, WorldId),
    #[error("relation {0} is required by the requested axioms but absent")]
    MissingRelation(&'static str),
    #[error("embeds edge {edge} has iterate tag {tag}, which is not an embeds edge")]
    BadIterateTag { edge: usize, tag: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WorldJson {
    pub id: WorldId,
    #[serde(default)]
    pub content: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EmbedsEdge {
    pub from: WorldId,
    pub to: WorldId,
    /// Index of the embeds edge this one is an iterate to.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub iterate: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LabelsJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inner_model: Option<Vec<[WorldId; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub forcing_ext: Option<Vec<[WorldId; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reflects: Option<Vec<[WorldId; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub countable_in: Option<Vec<[WorldId; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub illfounded_in: Option<Vec<[WorldId; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub embeds: Option<Vec<EmbedsEdge>>,
    #[serde(rename = "absorbed_L", default, skip_serializing_if = "Option::is_none")]
    pub absorbed_l: Option<Vec<[WorldId; 2]>>,
}

/// `{"worlds": [{"id": 0, "content": ["a"]}], "ground": [[0, 1]], "labels": {...}}`
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MultiverseJson {
    pub worlds: Vec<WorldJson>,
    #[serde(default)]
    pub ground: Vec<[WorldId; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<LabelsJson>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MultiverseGraph {
    ids: Vec<WorldId>,
    content: Vec<BTreeSet<String>>,
    /// `ground[w][v]` iff `w` is a ground of `v`.
    ground: Vec<Vec<bool>>,
}

impl MultiverseGraph {
    pub fn new(
        worlds: Vec<(WorldId, BTreeSet<String>)>,
        edges: &[[WorldId; 2]],
    ) -> Result<Self, GeologyError> {
        let mut ids = Vec::new();
        let mut content = Vec::new();
        for (id, c) in worlds {
            if ids.contains(&id) {
                return Err(GeologyError::DuplicateWorld(id));
            }
            ids.push(id);
            content.push(c);
        }
        let n = ids.len();
        let mut g = MultiverseGraph {
            ids,
            content,
            ground: vec![vec![false; n]; n],
        };
        for i in 0..n {
            g.ground[i][i] = true;
        }
        for &[w, v] in edges {
            let (w, v) = (g.index(w)?, g.index(v)?);
            g.ground[w][v] = true;
        }
        g.validate()?;
        Ok(g)
    }

    fn validate(&self) -> Result<(), GeologyError> {
        let n = self.len();
        for a in 0..n {
            for b in 0..n {
                if !self.ground[a][b] {
                    continue;
                }
                if a != b && self.ground[b][a] {
                    return Err(GeologyError::NotAntisymmetric(self.ids[a.min(b)], self.ids[a.max(b)]));
                }
                if let Some(x) = self.content[a].difference(&self.content[b]).next() {
                    return Err(GeologyError::ContentNotMonotone {
                        ground: self.ids[a],
                        world: self.ids[b],
                        element: x.clone(),
                    });
                }
                for c in 0..n {
                    if self.ground[b][c] && !self.ground[a][c] {
                        return Err(GeologyError::NotTransitive(self.ids[a], self.ids[b], self.ids[c]));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[WorldId] {
        &self.ids
    }

    pub fn index(&self, id: WorldId) -> Result<usize, GeologyError> {
        self.ids
            .iter()
            .position(|&x| x == id)
            .ok_or(GeologyError::UnknownWorld(id))
    }

    pub fn content(&self, id: WorldId) -> Result<&BTreeSet<String>, GeologyError> {
        Ok(&self.content[self.index(id)?])
    }

    pub fn is_ground(&self, w: WorldId, v: WorldId) -> Result<bool, GeologyError> {
        Ok(self.ground[self.index(w)?][self.index(v)?])
    }

    /// Indices of the grounds of world index `v`, in id order.
    fn grounds_of(&self, v: usize) -> Vec<usize> {
        let mut out: Vec<usize> = (0..self.len()).filter(|&w| self.ground[w][v]).collect();
        out.sort_by_key(|&w| self.ids[w]);
        out
    }

    fn common_ground(&self, a: usize, b: usize) -> bool {
        (0..self.len()).any(|c| self.ground[c][a] && self.ground[c][b])
    }

    fn sorted_ids(&self, idx: impl IntoIterator<Item = usize>) -> Vec<WorldId> {
        let mut out: Vec<WorldId> = idx.into_iter().map(|i| self.ids[i]).collect();
        out.sort_unstable();
        out
    }

    fn intersect_contents(&self, idx: &[usize]) -> BTreeSet<String> {
        let mut it = idx.iter();
        let first = it.next().map(|&i| self.content[i].clone()).unwrap_or_default();
        it.fold(first, |acc, &i| acc.intersection(&self.content[i]).cloned().collect())
    }

    /// The same graph with every content element renamed through `f`.
    pub fn relabel(&self, f: impl Fn(&str) -> String) -> Self {
        MultiverseGraph {
            ids: self.ids.clone(),
            content: self
                .content
                .iter()
                .map(|c| c.iter().map(|x| f(x)).collect())
                .collect(),
            ground: self.ground.clone(),
        }
    }
}

impl TryFrom<&MultiverseJson> for MultiverseGraph {
    type Error = GeologyError;

    fn try_from(j: &MultiverseJson) -> Result<Self, GeologyError> {
        let worlds = j
            .worlds
            .iter()
            .map(|w| (w.id, w.content.iter().cloned().collect()))
            .collect();
        MultiverseGraph::new(worlds, &j.ground)
    }
}

impl From<&MultiverseGraph> for MultiverseJson {
    fn from(g: &MultiverseGraph) -> Self {
        let n = g.len();
        let mut ground = Vec::new();
        for w in 0..n {
            for v in 0..n {
                if w != v && g.ground[w][v] {
                    ground.push([g.ids[w], g.ids[v]]);
                }
            }
        }
        ground.sort_unstable();
        MultiverseJson {
            worlds: g
                .ids
                .iter()
                .zip(&g.content)
                .map(|(&id, c)| WorldJson {
                    id,
                    content: c.iter().cloned().collect(),
                })
                .collect(),
            ground,
            labels: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WorldAnalysis {
    pub world: WorldId,
    pub grounds: Vec<WorldId>,
    pub bedrocks: Vec<WorldId>,
    pub ground_axiom: bool,
    pub mantle: Vec<String>,
}

pub fn analyze_world(g: &MultiverseGraph, v: WorldId) -> Result<WorldAnalysis, GeologyError> {
    let vi = g.index(v)?;
    let grounds = g.grounds_of(vi);
    let bedrocks = grounds
        .iter()
        .copied()
        .filter(|&w| grounds.iter().all(|&u| u == w || !g.ground[u][w]));
    let mantle = g.intersect_contents(&grounds);
    Ok(WorldAnalysis {
        world: v,
        bedrocks: g.sorted_ids(bedrocks),
        ground_axiom: grounds == [vi],
        grounds: g.sorted_ids(grounds),
        mantle: mantle.into_iter().collect(),
    })
}

pub const FINITE_STRONG_DDG_NOTE: &str =
    "on a finite graph every family of grounds is finite, so strong directedness coincides with directedness";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DdgReport {
    pub world: WorldId,
    pub ddg: bool,
    pub strong_ddg: bool,
    /// Least pair of grounds without a common ground.
    pub failing_pair: Option<[WorldId; 2]>,
    pub note: String,
}

pub fn check_ddg(g: &MultiverseGraph, v: WorldId) -> Result<DdgReport, GeologyError> {
    let vi = g.index(v)?;
    let grounds = g.grounds_of(vi);
    let mut failing_pair = None;
    'outer: for (i, &a) in grounds.iter().enumerate() {
        for &b in &grounds[i + 1..] {
            if !g.common_ground(a, b) {
                failing_pair = Some([g.ids[a], g.ids[b]]);
                break 'outer;
            }
        }
    }
    let ddg = failing_pair.is_none();
    // The whole family of grounds has a common ground iff every subfamily does.
    let strong_ddg = {
        let mut lower: Vec<usize> = grounds.clone();
        let mut ok = true;
        for &a in &grounds {
            lower.retain(|&c| g.ground[c][a]);
            if lower.is_empty() {
                ok = false;
                break;
            }
        }
        ok
    };
    Ok(DdgReport {
        world: v,
        ddg,
        strong_ddg,
        failing_pair,
        note: FINITE_STRONG_DDG_NOTE.into(),
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenericMultiverseReport {
    pub world: WorldId,
    pub worlds: Vec<WorldId>,
    pub generic_mantle: Vec<String>,
    pub two_step: bool,
    pub failing_pair: Option<[WorldId; 2]>,
}

pub fn generic_multiverse(g: &MultiverseGraph, v: WorldId) -> Result<GenericMultiverseReport, GeologyError> {
    let vi = g.index(v)?;
    let n = g.len();
    let mut inside = vec![false; n];
    inside[vi] = true;
    loop {
        let mut changed = false;
        for a in 0..n {
            if !inside[a] {
                continue;
            }
            for b in 0..n {
                if !inside[b] && (g.ground[a][b] || g.ground[b][a]) {
                    inside[b] = true;
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    let members: Vec<usize> = {
        let mut m: Vec<usize> = (0..n).filter(|&a| inside[a]).collect();
        m.sort_by_key(|&a| g.ids[a]);
        m
    };
    // Grounds of every extension of v.
    let deep: Vec<usize> = (0..n)
        .filter(|&w| (0..n).any(|x| g.ground[vi][x] && g.ground[w][x]))
        .collect();
    let generic_mantle = g.intersect_contents(&deep);
    let mut failing_pair = None;
    'outer: for (i, &a) in members.iter().enumerate() {
        for &b in &members[i + 1..] {
            if !g.common_ground(a, b) {
                failing_pair = Some([g.ids[a], g.ids[b]]);
                break 'outer;
            }
        }
    }
    Ok(GenericMultiverseReport {
        world: v,
        worlds: g.sorted_ids(members),
        generic_mantle: generic_mantle.into_iter().collect(),
        two_step: failing_pair.is_none(),
        failing_pair,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Termination {
    /// Reached a world satisfying the ground axiom.
    OuterCore { world: WorldId },
    /// No world of the graph has exactly the mantle as its content.
    MantleNotRealized { mantle: Vec<String> },
    /// The mantle is realized by the current world itself, which has
    /// nontrivial grounds of the same content.
    Stationary { world: WorldId },
    MaxIterations,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InnerMantleTrace {
    pub trace: Vec<WorldId>,
    pub mantles: Vec<Vec<String>>,
    pub termination: Termination,
}

impl InnerMantleTrace {
    pub fn outer_core(&self) -> Option<WorldId> {
        match self.termination {
            Termination::OuterCore { world } => Some(world),
            _ => None,
        }
    }
}

pub fn inner_mantles(g: &MultiverseGraph, v: WorldId, max_iter: usize) -> Result<InnerMantleTrace, GeologyError> {
    let mut current = g.index(v)?;
    let mut trace = vec![v];
    let mut mantles = Vec::new();
    let termination = loop {
        let a = analyze_world(g, g.ids[current])?;
        if a.ground_axiom {
            break Termination::OuterCore { world: a.world };
        }
        if mantles.len() >= max_iter {
            break Termination::MaxIterations;
        }
        let mantle: BTreeSet<String> = a.mantle.iter().cloned().collect();
        mantles.push(a.mantle.clone());
        let next = (0..g.len())
            .filter(|&w| g.content[w] == mantle)
            .min_by_key(|&w| g.ids[w]);
        match next {
            None => break Termination::MantleNotRealized { mantle: a.mantle },
            Some(w) if w == current => break Termination::Stationary { world: a.world },
            Some(w) => {
                current = w;
                trace.push(g.ids[w]);
            }
        }
    };
    Ok(InnerMantleTrace {
        trace,
        mantles,
        termination,
    })
}

/// Everything known about one world.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeologyReport {
    #[serde(flatten)]
    pub analysis: WorldAnalysis,
    pub generic_multiverse: Vec<WorldId>,
    pub generic_mantle: Vec<String>,
    pub ddg: bool,
    pub strong_ddg: bool,
    pub two_step: bool,
    pub inner_mantles: InnerMantleTrace,
    pub outer_core: Option<WorldId>,
}

pub fn geology_report(g: &MultiverseGraph, v: WorldId, max_iter: usize) -> Result<GeologyReport, GeologyError> {
    let analysis = analyze_world(g, v)?;
    let ddg = check_ddg(g, v)?;
    let gm = generic_multiverse(g, v)?;
    let trace = inner_mantles(g, v, max_iter)?;
    let mantle: BTreeSet<&String> = analysis.mantle.iter().collect();
    for &w in &analysis.grounds {
        let c = g.content(w)?;
        assert!(mantle.iter().all(|x| c.contains(*x)), "mantle escapes ground {w}");
    }
    assert!(gm.generic_mantle.iter().all(|x| mantle.contains(x)), "generic mantle escapes mantle");
    Ok(GeologyReport {
        analysis,
        generic_multiverse: gm.worlds,
        generic_mantle: gm.generic_mantle,
        ddg: ddg.ddg,
        strong_ddg: ddg.strong_ddg,
        two_step: gm.two_step,
        outer_core: trace.outer_core(),
        inner_mantles: trace,
    })
}

// Multiverse axioms on labeled graphs.

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MultiverseAxiom {
    Realizability,
    ForcingExtension,
    Reflection,
    Countability,
    WellFoundednessMirage,
    ReverseEmbedding,
    AbsorptionIntoL,
}

impl MultiverseAxiom {
    pub const ALL: [MultiverseAxiom; 7] = [
        MultiverseAxiom::Realizability,
        MultiverseAxiom::ForcingExtension,
        MultiverseAxiom::Reflection,
        MultiverseAxiom::Countability,
        MultiverseAxiom::WellFoundednessMirage,
        MultiverseAxiom::ReverseEmbedding,
        MultiverseAxiom::AbsorptionIntoL,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MultiverseAxiom::Realizability => "realizability",
            MultiverseAxiom::ForcingExtension => "forcing_extension",
            MultiverseAxiom::Reflection => "reflection",
            MultiverseAxiom::Countability => "countability",
            MultiverseAxiom::WellFoundednessMirage => "well_foundedness_mirage",
            MultiverseAxiom::ReverseEmbedding => "reverse_embedding",
            MultiverseAxiom::AbsorptionIntoL => "absorption_into_l",
        }
    }

    pub fn relation(self) -> &'static str {
        match self {
            MultiverseAxiom::Realizability => "inner_model",
            MultiverseAxiom::ForcingExtension => "forcing_ext",
            MultiverseAxiom::Reflection => "reflects",
            MultiverseAxiom::Countability => "countable_in",
            MultiverseAxiom::WellFoundednessMirage => "illfounded_in",
            MultiverseAxiom::ReverseEmbedding => "embeds",
            MultiverseAxiom::AbsorptionIntoL => "absorbed_l",
        }
    }
}

impl std::str::FromStr for MultiverseAxiom {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let key = s.to_ascii_lowercase().replace('-', "_");
        MultiverseAxiom::ALL
            .into_iter()
            .find(|a| a.name() == key)
            .ok_or_else(|| format!("unknown multiverse axiom {s:?}"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledMultiverse {
    pub graph: MultiverseGraph,
    pub labels: LabelsJson,
}

impl LabeledMultiverse {
    pub fn new(graph: MultiverseGraph, labels: LabelsJson) -> Result<Self, GeologyError> {
        let check = |edges: &Option<Vec<[WorldId; 2]>>| -> Result<(), GeologyError> {
            for &[a, b] in edges.iter().flatten() {
                graph.index(a)?;
                graph.index(b)?;
            }
            Ok(())
        };
        // inner_model targets may name worlds outside the graph; that is
        // what realizability checks.
        check(&labels.forcing_ext)?;
        check(&labels.reflects)?;
        check(&labels.countable_in)?;
        check(&labels.illfounded_in)?;
        check(&labels.absorbed_l)?;
        if let Some(embeds) = &labels.embeds {
            for (i, e) in embeds.iter().enumerate() {
                graph.index(e.from)?;
                graph.index(e.to)?;
                if let Some(tag) = e.iterate {
                    if tag >= embeds.len() {
                        return Err(GeologyError::BadIterateTag { edge: i, tag });
                    }
                }
            }
        }
        for &[v, w] in labels.forcing_ext.iter().flatten() {
            if !graph.is_ground(v, w)? {
                return Err(GeologyError::ForcingExtNotGround(v, w));
            }
        }
        Ok(LabeledMultiverse { graph, labels })
    }
}

impl TryFrom<&MultiverseJson> for LabeledMultiverse {
    type Error = GeologyError;

    fn try_from(j: &MultiverseJson) -> Result<Self, GeologyError> {
        LabeledMultiverse::new(MultiverseGraph::try_from(j)?, j.labels.clone().unwrap_or_default())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AxiomCheck {
    pub axiom: MultiverseAxiom,
    pub pass: bool,
    pub failures: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AxiomsReport {
    pub pass: bool,
    pub checks: Vec<AxiomCheck>,
}

pub const ABSORPTION_CYCLE_NOTE: &str =
    "absorbed_L edges form a cycle; at toy scale a cycle meets the unbounded demand on a finite graph";

fn has_cycle(edges: &[[WorldId; 2]]) -> bool {
    let nodes: BTreeSet<WorldId> = edges.iter().flatten().copied().collect();
    let mut reach: BTreeMap<WorldId, BTreeSet<WorldId>> = nodes.iter().map(|&n| (n, BTreeSet::new())).collect();
    for &[a, b] in edges {
        reach.get_mut(&a).unwrap().insert(b);
    }
    loop {
        let mut changed = false;
        for &a in &nodes {
            let next: BTreeSet<WorldId> = reach[&a].iter().flat_map(|b| reach[b].iter().copied()).collect();
            let entry = reach.get_mut(&a).unwrap();
            let before = entry.len();
            entry.extend(next);
            changed |= entry.len() != before;
        }
        if !changed {
            break;
        }
    }
    nodes.iter().any(|a| reach[a].contains(a))
}

pub fn check_multiverse_axioms(
    lm: &LabeledMultiverse,
    axioms: &[MultiverseAxiom],
) -> Result<AxiomsReport, GeologyError> {
    let l = &lm.labels;
    let g = &lm.graph;
    let every_world_has_successor = |edges: &[[WorldId; 2]], what: &str| -> Vec<String> {
        g.ids()
            .iter()
            .filter(|&&w| !edges.iter().any(|&[a, _]| a == w))
            .map(|w| format!("world {w} has no {what} successor"))
            .collect()
    };
    let mut checks = Vec::new();
    for &axiom in axioms {
        let missing = || GeologyError::MissingRelation(axiom.relation());
        let mut note = None;
        let failures = match axiom {
            MultiverseAxiom::Realizability => {
                let edges = l.inner_model.as_ref().ok_or_else(missing)?;
                edges
                    .iter()
                    .filter(|[w, _]| g.index(*w).is_err())
                    .map(|[w, v]| format!("inner model {w} of {v} is not a world"))
                    .collect()
            }
            MultiverseAxiom::ForcingExtension => {
                every_world_has_successor(l.forcing_ext.as_ref().ok_or_else(missing)?, "forcing_ext")
            }
            MultiverseAxiom::Reflection => {
                every_world_has_successor(l.reflects.as_ref().ok_or_else(missing)?, "reflects")
            }
            MultiverseAxiom::Countability => {
                every_world_has_successor(l.countable_in.as_ref().ok_or_else(missing)?, "countable_in")
            }
            MultiverseAxiom::WellFoundednessMirage => {
                every_world_has_successor(l.illfounded_in.as_ref().ok_or_else(missing)?, "illfounded_in")
            }
            MultiverseAxiom::AbsorptionIntoL => {
                let edges = l.absorbed_l.as_ref().ok_or_else(missing)?;
                if has_cycle(edges) {
                    note = Some(ABSORPTION_CYCLE_NOTE.to_string());
                }
                every_world_has_successor(edges, "absorbed_L")
            }
            MultiverseAxiom::ReverseEmbedding => {
                let edges = l.embeds.as_ref().ok_or_else(missing)?;
                edges
                    .iter()
                    .enumerate()
                    .filter(|&(j, e)| !edges.iter().any(|h| h.iterate == Some(j) && h.to == e.from))
                    .map(|(j, e)| format!("embeds edge {j} ({} -> {}) is not the iterate of any embedding into {}", e.from, e.to, e.from))
                    .collect()
            }
        };
        checks.push(AxiomCheck {
            axiom,
            pass: failures.is_empty(),
            failures,
            note,
        });
    }
    Ok(AxiomsReport {
        pass: checks.iter().all(|c| c.pass),
        checks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(xs: &[&str]) -> BTreeSet<String> {
        xs.iter().map(|s| s.to_string()).collect()
    }

    /// U = 0, W1 = 1, W2 = 2, V = 3.
    fn diamond() -> MultiverseGraph {
        MultiverseGraph::new(
            vec![
                (0, set(&["a"])),
                (1, set(&["a", "b"])),
                (2, set(&["a", "c"])),
                (3, set(&["a", "b", "c"])),
            ],
            &[[0, 1], [0, 2], [0, 3], [1, 3], [2, 3]],
        )
        .unwrap()
    }

    fn fork() -> MultiverseGraph {
        MultiverseGraph::new(
            vec![(1, set(&["a", "b"])), (2, set(&["a", "c"])), (3, set(&["a", "b", "c"]))],
            &[[1, 3], [2, 3]],
        )
        .unwrap()
    }

    #[test]
    fn validation_witnesses() {
        let w = |id, c: &[&str]| (id, set(c));
        assert_eq!(
            MultiverseGraph::new(vec![w(0, &[]), w(1, &[]), w(2, &[])], &[[0, 1], [1, 2]]),
            Err(GeologyError::NotTransitive(0, 1, 2))
        );
        assert_eq!(
            MultiverseGraph::new(vec![w(0, &[]), w(1, &[])], &[[0, 1], [1, 0]]),
            Err(GeologyError::NotAntisymmetric(0, 1))
        );
        assert_eq!(
            MultiverseGraph::new(vec![w(0, &["x"]), w(1, &[])], &[[0, 1]]),
            Err(GeologyError::ContentNotMonotone {
                ground: 0,
                world: 1,
                element: "x".into()
            })
        );
        assert_eq!(
            MultiverseGraph::new(vec![w(0, &[]), w(0, &[])], &[]),
            Err(GeologyError::DuplicateWorld(0))
        );
        assert_eq!(
            MultiverseGraph::new(vec![w(0, &[])], &[[0, 5]]),
            Err(GeologyError::UnknownWorld(5))
        );
    }

    #[test]
    fn diamond_analysis() {
        let g = diamond();
        let a = analyze_world(&g, 3).unwrap();
        assert_eq!(a.grounds, vec![0, 1, 2, 3]);
        assert_eq!(a.bedrocks, vec![0]);
        assert_eq!(a.mantle, vec!["a"]);
        assert!(!a.ground_axiom);
        assert!(analyze_world(&g, 0).unwrap().ground_axiom);
        assert!(check_ddg(&g, 3).unwrap().ddg);
        let gm = generic_multiverse(&g, 3).unwrap();
        assert_eq!(gm.worlds, vec![0, 1, 2, 3]);
        assert_eq!(gm.generic_mantle, vec!["a"]);
        assert!(gm.two_step);
        let t = inner_mantles(&g, 3, 10).unwrap();
        assert_eq!(t.trace, vec![3, 0]);
        assert_eq!(t.outer_core(), Some(0));
    }

    #[test]
    fn fork_analysis() {
        let g = fork();
        let a = analyze_world(&g, 3).unwrap();
        assert_eq!(a.mantle, vec!["a"]);
        assert_eq!(a.bedrocks, vec![1, 2]);
        let d = check_ddg(&g, 3).unwrap();
        assert!(!d.ddg && !d.strong_ddg);
        assert_eq!(d.failing_pair, Some([1, 2]));
        let t = inner_mantles(&g, 3, 10).unwrap();
        assert_eq!(t.termination, Termination::MantleNotRealized { mantle: vec!["a".into()] });
    }

    #[test]
    fn isolated_world() {
        let g = MultiverseGraph::new(vec![(7, set(&["z"]))], &[]).unwrap();
        let a = analyze_world(&g, 7).unwrap();
        assert!(a.ground_axiom);
        assert_eq!(a.mantle, vec!["z"]);
        assert!(check_ddg(&g, 7).unwrap().ddg);
        let t = inner_mantles(&g, 7, 10).unwrap();
        assert_eq!(t.trace, vec![7]);
        assert_eq!(t.outer_core(), Some(7));
    }

    #[test]
    fn components_stay_apart() {
        let g = MultiverseGraph::new(
            vec![(0, set(&[])), (1, set(&["x"])), (2, set(&[])), (3, set(&["y"]))],
            &[[0, 1], [2, 3]],
        )
        .unwrap();
        assert_eq!(generic_multiverse(&g, 1).unwrap().worlds, vec![0, 1]);
    }

    #[test]
    fn stationary_and_iteration_cap() {
        let g = MultiverseGraph::new(vec![(0, set(&["a"])), (1, set(&["a"]))], &[[0, 1]]).unwrap();
        let t = inner_mantles(&g, 1, 10).unwrap();
        assert_eq!(t.trace, vec![1, 0]);
        assert_eq!(t.outer_core(), Some(0));
        let t = inner_mantles(&diamond(), 3, 0).unwrap();
        assert_eq!(t.termination, Termination::MaxIterations);
    }

    fn labeled(labels: LabelsJson) -> LabeledMultiverse {
        LabeledMultiverse::new(diamond(), labels).unwrap()
    }

    fn total(ids: &[WorldId]) -> Vec<[WorldId; 2]> {
        ids.iter().flat_map(|&a| ids.iter().map(move |&b| [a, b])).collect()
    }

    #[test]
    fn axioms_on_total_relations() {
        let ids = [0, 1, 2, 3];
        let up: Vec<[WorldId; 2]> = total(&ids).into_iter().filter(|&[a, b]| diamond().is_ground(a, b).unwrap()).collect();
        let lm = labeled(LabelsJson {
            inner_model: Some(total(&ids)),
            forcing_ext: Some(up),
            reflects: Some(total(&ids)),
            countable_in: Some(total(&ids)),
            illfounded_in: Some(total(&ids)),
            embeds: Some(vec![
                EmbedsEdge { from: 0, to: 1, iterate: Some(1) },
                EmbedsEdge { from: 1, to: 0, iterate: Some(0) },
            ]),
            absorbed_l: Some(total(&ids)),
        });
        let r = check_multiverse_axioms(&lm, &MultiverseAxiom::ALL).unwrap();
        assert!(r.pass, "{r:?}");
        let absorption = r.checks.iter().find(|c| c.axiom == MultiverseAxiom::AbsorptionIntoL).unwrap();
        assert!(absorption.note.is_some());
    }

    #[test]
    fn axiom_failures() {
        let lm = labeled(LabelsJson {
            forcing_ext: Some(vec![[0, 1], [1, 3], [2, 3]]),
            inner_model: Some(vec![[9, 3]]),
            embeds: Some(vec![EmbedsEdge { from: 0, to: 1, iterate: None }]),
            ..Default::default()
        });
        let r = check_multiverse_axioms(
            &lm,
            &[MultiverseAxiom::ForcingExtension, MultiverseAxiom::Realizability, MultiverseAxiom::ReverseEmbedding],
        )
        .unwrap();
        assert!(!r.pass);
        assert_eq!(r.checks[0].failures, vec!["world 3 has no forcing_ext successor"]);
        assert_eq!(r.checks[1].failures.len(), 1);
        assert!(!r.checks[2].pass);
        assert_eq!(
            check_multiverse_axioms(&lm, &[MultiverseAxiom::Reflection]),
            Err(GeologyError::MissingRelation("reflects"))
        );
        assert_eq!(
            LabeledMultiverse::new(diamond(), LabelsJson { forcing_ext: Some(vec![[3, 0]]), ..Default::default() }),
            Err(GeologyError::ForcingExtNotGround(3, 0))
        );
    }

    #[test]
    fn absorption_cycle_passes() {
        let lm = labeled(LabelsJson {
            absorbed_l: Some(vec![[0, 1], [1, 2], [2, 3], [3, 0]]),
            ..Default::default()
        });
        let r = check_multiverse_axioms(&lm, &[MultiverseAxiom::AbsorptionIntoL]).unwrap();
        assert!(r.pass);
        assert_eq!(r.checks[0].note.as_deref(), Some(ABSORPTION_CYCLE_NOTE));
    }

    #[test]
    fn json_round_trip() {
        let g = diamond();
        let j = MultiverseJson::from(&g);
        let text = serde_json::to_string(&j).unwrap();
        let back: MultiverseJson = serde_json::from_str(&text).unwrap();
        assert_eq!(MultiverseGraph::try_from(&back).unwrap(), g);
    }
}
