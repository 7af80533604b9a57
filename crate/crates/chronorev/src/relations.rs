//! Binary-relation algebra over the option set: transitive closure,
//! asymmetric part, and detection of cycles that preclude a representing
//! utility function.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::data_model::OptionId;

/// How a revealed edge was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    /// Response-time dominance test on an observed pair.
    RtDominance,
    /// Pointwise density-ratio test on an observed pair.
    DensityRatio,
    /// Choice-frequency comparison on an observed pair.
    ChoiceFrequency,
    /// Percentile triangulation through a third option.
    Triangulation,
    /// Cross-pair probability comparison through a shared pivot.
    CrossPivot,
    /// Added by transitive closure.
    Closure,
}

/// Strength of a revealed edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strength {
    Weak,
    Strict,
}

/// A directed revealed-preference edge with its origin. A strict edge always
/// also satisfies the corresponding weak condition.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RevelationEdge {
    pub from: OptionId,
    pub to: OptionId,
    pub strength: Strength,
    pub provenance: Provenance,
}

/// Directed relation with a distinguished strict-capable subset.
///
/// `weak` holds every edge; `strict` is the subset carrying a strict tag from
/// the revelation layer and is always contained in `weak`. Reflexive edges
/// are permitted.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Relation {
    weak: BTreeSet<(OptionId, OptionId)>,
    strict: BTreeSet<(OptionId, OptionId)>,
}

impl Relation {
    pub fn new() -> Self {
        Relation::default()
    }

    pub fn from_edges<'a>(edges: impl IntoIterator<Item = &'a RevelationEdge>) -> Self {
        let mut rel = Relation::new();
        for e in edges {
            rel.insert(e.from.clone(), e.to.clone(), e.strength);
        }
        rel
    }

    pub fn insert(&mut self, from: OptionId, to: OptionId, strength: Strength) {
        if strength == Strength::Strict {
            self.strict.insert((from.clone(), to.clone()));
        }
        self.weak.insert((from, to));
    }

    pub fn insert_reflexive(&mut self, id: OptionId) {
        self.weak.insert((id.clone(), id));
    }

    pub fn contains(&self, from: &OptionId, to: &OptionId) -> bool {
        self.weak.contains(&(from.clone(), to.clone()))
    }

    pub fn contains_strict(&self, from: &OptionId, to: &OptionId) -> bool {
        self.strict.contains(&(from.clone(), to.clone()))
    }

    pub fn edges(&self) -> impl Iterator<Item = &(OptionId, OptionId)> {
        self.weak.iter()
    }

    pub fn strict_edges(&self) -> impl Iterator<Item = &(OptionId, OptionId)> {
        self.strict.iter()
    }

    pub fn len(&self) -> usize {
        self.weak.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weak.is_empty()
    }

    /// Union of edge sets, preserving strict tags from both sides.
    pub fn union(&self, other: &Relation) -> Relation {
        let mut out = self.clone();
        for (f, t) in &other.weak {
            out.weak.insert((f.clone(), t.clone()));
        }
        for (f, t) in &other.strict {
            out.strict.insert((f.clone(), t.clone()));
        }
        out
    }

    fn vertices(&self) -> Vec<OptionId> {
        let mut vs = BTreeSet::new();
        for (f, t) in &self.weak {
            vs.insert(f.clone());
            vs.insert(t.clone());
        }
        vs.into_iter().collect()
    }

    fn index(vertices: &[OptionId]) -> BTreeMap<&OptionId, usize> {
        vertices.iter().enumerate().map(|(i, v)| (v, i)).collect()
    }

    /// Transitive closure T(R): (x,y) is in T(R) iff a chain of R-edges of
    /// length >= 1 links x to y. Warshall over an adjacency matrix; fine at
    /// the option-set sizes this crate targets.
    pub fn transitive_closure(&self) -> Relation {
        let vertices = self.vertices();
        let n = vertices.len();
        let idx = Self::index(&vertices);
        let mut reach = vec![false; n * n];
        for (f, t) in &self.weak {
            reach[idx[f] * n + idx[t]] = true;
        }
        for k in 0..n {
            for i in 0..n {
                if reach[i * n + k] {
                    for j in 0..n {
                        if reach[k * n + j] {
                            reach[i * n + j] = true;
                        }
                    }
                }
            }
        }
        let mut out = Relation::new();
        for i in 0..n {
            for j in 0..n {
                if reach[i * n + j] {
                    out.weak.insert((vertices[i].clone(), vertices[j].clone()));
                }
            }
        }
        // strict part of a closure is its asymmetric part
        out.strict = out.asymmetric_pairs();
        out
    }

    fn asymmetric_pairs(&self) -> BTreeSet<(OptionId, OptionId)> {
        self.weak
            .iter()
            .filter(|(f, t)| !self.weak.contains(&(t.clone(), f.clone())))
            .cloned()
            .collect()
    }

    /// Asymmetric part P: (x,y) in P iff (x,y) in R and (y,x) not in R.
    pub fn asymmetric_part(&self) -> Relation {
        let pairs = self.asymmetric_pairs();
        Relation {
            weak: pairs.clone(),
            strict: pairs,
        }
    }

    /// Looks for a cycle through the weak edges that contains at least one
    /// strict-tagged edge. Such a cycle is inconsistent: no utility function
    /// can represent the relation. Pure-indifference cycles are fine.
    ///
    /// Returns the vertices of a witness cycle, starting and ending at the
    /// same option.
    pub fn inconsistent_cycle(&self) -> Option<Vec<OptionId>> {
        let vertices = self.vertices();
        let n = vertices.len();
        let idx = Self::index(&vertices);
        let mut adj = vec![false; n * n];
        for (f, t) in &self.weak {
            adj[idx[f] * n + idx[t]] = true;
        }
        for (f, t) in &self.strict {
            let (fi, ti) = (idx[f], idx[t]);
            // strict self-loop is a cycle on its own
            if fi == ti {
                return Some(vec![f.clone(), f.clone()]);
            }
            if let Some(path) = bfs_path(&adj, n, ti, fi) {
                let mut cycle = vec![f.clone()];
                cycle.extend(path.into_iter().map(|i| vertices[i].clone()));
                return Some(cycle);
            }
        }
        None
    }

    pub fn has_inconsistent_cycle(&self) -> bool {
        self.inconsistent_cycle().is_some()
    }
}

/// Shortest path from `from` to `to` through the adjacency matrix, inclusive
/// of both endpoints.
fn bfs_path(adj: &[bool], n: usize, from: usize, to: usize) -> Option<Vec<usize>> {
    let mut prev = vec![usize::MAX; n];
    let mut queue = std::collections::VecDeque::new();
    let mut seen = vec![false; n];
    seen[from] = true;
    queue.push_back(from);
    while let Some(u) = queue.pop_front() {
        if u == to {
            let mut path = vec![to];
            let mut cur = to;
            while cur != from {
                cur = prev[cur];
                path.push(cur);
            }
            path.reverse();
            return Some(path);
        }
        for v in 0..n {
            if adj[u * n + v] && !seen[v] {
                seen[v] = true;
                prev[v] = u;
                queue.push_back(v);
            }
        }
    }
    None
}
