//! Backtracking over partial assignments: the traversal engine, the
//! materialized tree of valid assignments, subtree/truncation views and the
//! JSON tree format.
//!
//! The tree contains every assignment reachable from the root through the
//! heuristic whose verdict is not `False`. Vertices whose assignment already
//! satisfies the predicate are still expanded until the depth bound, so the
//! vertex count matches the expected-size analysis of the random model level
//! by level. A vertex is marked iff it is a complete satisfying assignment.

use crate::csp::{Heuristic, PartialAssignment, Predicate, PredicateVerdict};
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Default cap on materialized vertices.
pub const DEFAULT_VERTEX_CAP: usize = 1 << 20;

/// One vertex of the backtracking tree.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Vertex {
    pub id: usize,
    /// Parent id; `None` for the root.
    pub parent: Option<usize>,
    /// Children ids ordered by branch value ascending.
    pub children: Vec<usize>,
    pub depth: usize,
    pub marked: bool,
    pub assignment: PartialAssignment,
}

/// Rooted tree of valid partial assignments.
///
/// Vertex 0 is the root; ids follow depth-first discovery order with children
/// visited in branch-value order, so identical inputs produce identical trees.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BacktrackTree {
    /// Depth bound (number of variables for CSP-derived trees).
    pub n: usize,
    /// Branching domain size.
    pub d: usize,
    #[serde(rename = "T")]
    pub vertex_count: usize,
    pub vertices: Vec<Vertex>,
}

impl BacktrackTree {
    pub fn root(&self) -> &Vertex {
        &self.vertices[0]
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn vertex(&self, id: usize) -> Result<&Vertex> {
        self.vertices
            .get(id)
            .ok_or_else(|| Error::Input(format!("unknown vertex id {id}")))
    }

    /// Undirected degree: `children + 1` for non-root vertices, `children`
    /// for the root.
    pub fn degree(&self, id: usize) -> usize {
        let v = &self.vertices[id];
        if v.parent.is_some() {
            v.children.len() + 1
        } else {
            v.children.len()
        }
    }

    pub fn max_depth(&self) -> usize {
        self.vertices.iter().map(|v| v.depth).max().unwrap_or(0)
    }

    pub fn marked_ids(&self) -> Vec<usize> {
        self.vertices
            .iter()
            .filter(|v| v.marked)
            .map(|v| v.id)
            .collect()
    }

    pub fn has_marked(&self) -> bool {
        self.vertices.iter().any(|v| v.marked)
    }

    /// Ids on the path from the root to `target`, inclusive.
    pub fn path_from_root(&self, target: usize) -> Result<Vec<usize>> {
        self.vertex(target)?;
        let mut path = vec![target];
        let mut cur = target;
        while let Some(p) = self.vertices[cur].parent {
            path.push(p);
            cur = p;
        }
        path.reverse();
        Ok(path)
    }

    /// Copy with the given vertices unmarked. Used to strike out previously
    /// found solutions when enumerating all of them.
    pub fn with_unmarked(&self, ids: &[usize]) -> BacktrackTree {
        let mut tree = self.clone();
        for &id in ids {
            if let Some(v) = tree.vertices.get_mut(id) {
                v.marked = false;
            }
        }
        tree
    }

    /// Subtree rooted at `id`, depths relabeled from 0, ids renumbered in
    /// depth-first order. The new root follows the root degree convention.
    pub fn subtree(&self, id: usize) -> Result<BacktrackTree> {
        self.extract(id, None)
    }

    /// Tree truncated at `depth` (vertices deeper than `depth` dropped),
    /// marks preserved on the remaining vertices.
    pub fn truncated(&self, depth: usize) -> BacktrackTree {
        self.extract(0, Some(depth)).expect("root always exists")
    }

    fn extract(&self, new_root: usize, depth_limit: Option<usize>) -> Result<BacktrackTree> {
        let root = self.vertex(new_root)?;
        let base_depth = root.depth;
        let mut vertices: Vec<Vertex> = Vec::new();
        // stack of (old id, new parent id)
        let mut stack: Vec<(usize, Option<usize>)> = vec![(new_root, None)];
        while let Some((old_id, parent)) = stack.pop() {
            let old = &self.vertices[old_id];
            let depth = old.depth - base_depth;
            if let Some(limit) = depth_limit {
                if depth > limit {
                    continue;
                }
            }
            let id = vertices.len();
            if let Some(p) = parent {
                vertices[p].children.push(id);
            }
            vertices.push(Vertex {
                id,
                parent,
                children: Vec::new(),
                depth,
                marked: old.marked,
                assignment: old.assignment.clone(),
            });
            // push in reverse so value order is preserved on pop
            for &child in old.children.iter().rev() {
                let keep = match depth_limit {
                    Some(limit) => self.vertices[child].depth - base_depth <= limit,
                    None => true,
                };
                if keep {
                    stack.push((child, Some(id)));
                }
            }
        }
        let n = self.n - base_depth;
        Ok(BacktrackTree {
            n,
            d: self.d,
            vertex_count: vertices.len(),
            vertices,
        })
    }

    /// Validate the structural invariants of a deserialized tree.
    pub fn validate(&self) -> Result<()> {
        if self.vertices.is_empty() {
            return Err(Error::Parse("tree has no vertices".into()));
        }
        if self.vertex_count != self.vertices.len() {
            return Err(Error::Parse(format!(
                "tree declares T={} but lists {} vertices",
                self.vertex_count,
                self.vertices.len()
            )));
        }
        if self.vertices[0].parent.is_some() || self.vertices[0].depth != 0 {
            return Err(Error::Parse("vertex 0 must be the depth-0 root".into()));
        }
        for (i, v) in self.vertices.iter().enumerate() {
            if v.id != i {
                return Err(Error::Parse(format!("vertex {i} carries id {}", v.id)));
            }
            if v.depth > self.n {
                return Err(Error::Parse(format!(
                    "vertex {i} at depth {} exceeds depth bound {}",
                    v.depth, self.n
                )));
            }
            for &c in &v.children {
                let child = self
                    .vertices
                    .get(c)
                    .ok_or_else(|| Error::Parse(format!("vertex {i} lists unknown child {c}")))?;
                if child.parent != Some(i) {
                    return Err(Error::Parse(format!(
                        "child {c} does not point back to {i}"
                    )));
                }
                if child.depth != v.depth + 1 {
                    return Err(Error::Parse(format!("child {c} has inconsistent depth")));
                }
            }
            if let Some(p) = v.parent {
                let parent = self
                    .vertices
                    .get(p)
                    .ok_or_else(|| Error::Parse(format!("vertex {i} lists unknown parent {p}")))?;
                if !parent.children.contains(&i) {
                    return Err(Error::Parse(format!("parent {p} does not list child {i}")));
                }
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("tree serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<BacktrackTree> {
        let tree: BacktrackTree =
            serde_json::from_str(text).map_err(|e| Error::Parse(format!("tree json: {e}")))?;
        tree.validate()?;
        Ok(tree)
    }
}

/// Traversal statistics of one full backtracking run.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraversalStats {
    pub tree_vertices: usize,
    pub predicate_evaluations: u64,
    pub heuristic_evaluations: u64,
    /// Complete satisfying assignments, in discovery order.
    pub solutions: Vec<PartialAssignment>,
    /// Vertex counts per depth, index 0 = root level.
    pub depth_histogram: Vec<u64>,
}

/// Options for tree materialization and traversal.
#[derive(Clone, Debug)]
pub struct BuildOptions {
    pub depth_limit: Option<usize>,
    pub vertex_cap: usize,
}

impl Default for BuildOptions {
    fn default() -> Self {
        BuildOptions {
            depth_limit: None,
            vertex_cap: DEFAULT_VERTEX_CAP,
        }
    }
}

fn check_heuristic_choice(x: &PartialAssignment, j: usize) -> Result<()> {
    if j == 0 || j > x.n() {
        return Err(Error::Input(format!(
            "heuristic returned index {j} out of range on {:?}",
            x.pairs()
        )));
    }
    if x.value(j).is_some() {
        return Err(Error::Input(format!(
            "heuristic returned already-assigned index {j} on {:?}",
            x.pairs()
        )));
    }
    Ok(())
}

/// Run the full backtracking traversal, exploring the entire tree of valid
/// assignments and reporting all complete solutions.
pub fn run_backtracking<P: Predicate, H: Heuristic>(
    predicate: &P,
    heuristic: &H,
    options: &BuildOptions,
) -> Result<TraversalStats> {
    let n = predicate.variable_count();
    let d = predicate.domain_size();
    let depth_limit = options.depth_limit.unwrap_or(n).min(n);
    let mut stats = TraversalStats {
        tree_vertices: 0,
        predicate_evaluations: 0,
        heuristic_evaluations: 0,
        solutions: Vec::new(),
        depth_histogram: vec![0; depth_limit + 1],
    };

    // explicit stack of assignments still to visit
    let mut stack: Vec<(PartialAssignment, usize)> = vec![(PartialAssignment::empty(n), 0)];
    while let Some((x, depth)) = stack.pop() {
        stats.predicate_evaluations += 1;
        let verdict = predicate.evaluate(&x)?;
        if verdict == PredicateVerdict::False {
            continue;
        }
        stats.tree_vertices += 1;
        if stats.tree_vertices > options.vertex_cap {
            return Err(Error::Resource(format!(
                "traversal exceeded the vertex cap of {}",
                options.vertex_cap
            )));
        }
        stats.depth_histogram[depth] += 1;
        if x.is_complete() && verdict == PredicateVerdict::True {
            stats.solutions.push(x.clone());
        }
        if x.is_complete() || depth == depth_limit {
            continue;
        }
        stats.heuristic_evaluations += 1;
        let j = heuristic.next_variable(&x)?;
        check_heuristic_choice(&x, j)?;
        // reversed so branch value 0 is visited first
        for w in (0..d).rev() {
            stack.push((x.child(j, w as u8)?, depth + 1));
        }
    }
    // solutions were collected in reverse branch order per level; restore
    // discovery order
    stats.solutions.reverse();
    stats.solutions.sort_by(|a, b| a.pairs().cmp(b.pairs()));
    Ok(stats)
}

/// Materialize the tree of valid assignments, truncated at
/// `options.depth_limit` when given.
pub fn build_tree<P: Predicate, H: Heuristic>(
    predicate: &P,
    heuristic: &H,
    options: &BuildOptions,
) -> Result<BacktrackTree> {
    let n = predicate.variable_count();
    let d = predicate.domain_size();
    let depth_limit = options.depth_limit.unwrap_or(n).min(n);
    let mut vertices: Vec<Vertex> = Vec::new();
    // stack of (assignment, parent id, depth)
    let mut stack: Vec<(PartialAssignment, Option<usize>, usize)> =
        vec![(PartialAssignment::empty(n), None, 0)];
    while let Some((x, parent, depth)) = stack.pop() {
        let verdict = predicate.evaluate(&x)?;
        if verdict == PredicateVerdict::False {
            continue;
        }
        let id = vertices.len();
        if id >= options.vertex_cap {
            return Err(Error::Resource(format!(
                "tree exceeded the vertex cap of {}",
                options.vertex_cap
            )));
        }
        if let Some(p) = parent {
            vertices[p].children.push(id);
        }
        let marked = x.is_complete() && verdict == PredicateVerdict::True;
        let expand = !x.is_complete() && depth < depth_limit;
        vertices.push(Vertex {
            id,
            parent,
            children: Vec::new(),
            depth,
            marked,
            assignment: x,
        });
        if expand {
            let x = vertices[id].assignment.clone();
            let j = heuristic.next_variable(&x)?;
            check_heuristic_choice(&x, j)?;
            for w in (0..d).rev() {
                stack.push((x.child(j, w as u8)?, Some(id), depth + 1));
            }
        }
    }
    // depth-first discovery order: the stack pops children of the most recent
    // vertex first, but ids were assigned on pop, so order is already DFS.
    let tree = BacktrackTree {
        n,
        d,
        vertex_count: vertices.len(),
        vertices,
    };
    debug_assert!(tree.validate().is_ok());
    Ok(tree)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::csp::{brute_force_solutions, random_ksat, KSatInstance, NaiveHeuristic, RngSpec};

    fn instance(n: usize, k: usize, clauses: Vec<Vec<i32>>) -> KSatInstance {
        KSatInstance::new(n, k, clauses).unwrap()
    }

    #[test]
    fn contradiction_leaves_only_the_root() {
        let inst = instance(1, 1, vec![vec![1], vec![-1]]);
        let stats = run_backtracking(&inst, &NaiveHeuristic, &BuildOptions::default()).unwrap();
        assert_eq!(stats.tree_vertices, 1);
        assert!(stats.solutions.is_empty());
        let tree = build_tree(&inst, &NaiveHeuristic, &BuildOptions::default()).unwrap();
        assert_eq!(tree.len(), 1);
        assert!(!tree.root().marked);
    }

    #[test]
    fn unconstrained_tree_is_complete_binary() {
        let inst = instance(2, 1, vec![]);
        let stats = run_backtracking(&inst, &NaiveHeuristic, &BuildOptions::default()).unwrap();
        assert_eq!(stats.tree_vertices, 7);
        assert_eq!(stats.solutions.len(), 4);
        assert_eq!(stats.depth_histogram, vec![1, 2, 4]);
        let tree = build_tree(&inst, &NaiveHeuristic, &BuildOptions::default()).unwrap();
        assert_eq!(tree.len(), 7);
        assert_eq!(tree.marked_ids().len(), 4);
        for id in tree.marked_ids() {
            assert!(tree.vertices[id].assignment.is_complete());
        }
    }

    #[test]
    fn single_clause_tree() {
        let inst = instance(2, 2, vec![vec![1, 2]]);
        let stats = run_backtracking(&inst, &NaiveHeuristic, &BuildOptions::default()).unwrap();
        assert_eq!(stats.tree_vertices, 6);
        let sols: Vec<Vec<(usize, u8)>> =
            stats.solutions.iter().map(|s| s.pairs().to_vec()).collect();
        assert_eq!(
            sols,
            vec![
                vec![(1, 0), (2, 1)],
                vec![(1, 1), (2, 0)],
                vec![(1, 1), (2, 1)],
            ]
        );
        let tree = build_tree(&inst, &NaiveHeuristic, &BuildOptions::default()).unwrap();
        assert_eq!(tree.len(), 6);
    }

    #[test]
    fn traversal_and_tree_counts_agree() {
        for salt in 0..30u64 {
            let inst = random_ksat(8, 3, 18, &RngSpec::new(1000 + salt)).unwrap();
            let stats = run_backtracking(&inst, &NaiveHeuristic, &BuildOptions::default()).unwrap();
            let tree = build_tree(&inst, &NaiveHeuristic, &BuildOptions::default()).unwrap();
            assert_eq!(stats.tree_vertices, tree.len());
            assert_eq!(stats.solutions.len(), tree.marked_ids().len());
            assert!(stats.predicate_evaluations <= (inst.domain_size() * tree.len() + 1) as u64);
            let brute = brute_force_solutions(&inst).unwrap();
            assert_eq!(stats.solutions.len(), brute.len());
        }
    }

    #[test]
    fn unconstrained_count_formula() {
        for n in 1..=4usize {
            let inst = instance(n, 1, vec![]);
            let stats = run_backtracking(&inst, &NaiveHeuristic, &BuildOptions::default()).unwrap();
            assert_eq!(stats.tree_vertices, (1 << (n + 1)) - 1);
        }
    }

    #[test]
    fn adding_a_clause_never_grows_the_tree() {
        let spec = RngSpec::new(77);
        for salt in 0..20u64 {
            let mut rng = spec.stream(salt).unwrap();
            let clauses: Vec<Vec<i32>> = (0..10)
                .map(|_| crate::csp::random_clause(7, 3, &mut rng))
                .collect();
            let mut prev = usize::MAX;
            for take in (0..=clauses.len()).rev() {
                let inst = instance(7, 3, clauses[..take].to_vec());
                let tree = build_tree(&inst, &NaiveHeuristic, &BuildOptions::default()).unwrap();
                assert!(tree.len() <= prev.max(tree.len()));
                if prev != usize::MAX {
                    assert!(tree.len() >= prev, "clause removal shrank the tree");
                }
                prev = tree.len();
            }
        }
    }

    #[test]
    fn depth_limit_truncates() {
        let inst = instance(2, 2, vec![vec![1, 2]]);
        let opts = BuildOptions {
            depth_limit: Some(0),
            ..Default::default()
        };
        assert_eq!(build_tree(&inst, &NaiveHeuristic, &opts).unwrap().len(), 1);
        let opts = BuildOptions {
            depth_limit: Some(1),
            ..Default::default()
        };
        assert_eq!(build_tree(&inst, &NaiveHeuristic, &opts).unwrap().len(), 3);
        let opts = BuildOptions {
            depth_limit: Some(2),
            ..Default::default()
        };
        let full = build_tree(&inst, &NaiveHeuristic, &BuildOptions::default()).unwrap();
        assert_eq!(build_tree(&inst, &NaiveHeuristic, &opts).unwrap(), full);
    }

    #[test]
    fn vertex_cap_is_enforced() {
        let inst = instance(10, 1, vec![]);
        let opts = BuildOptions {
            depth_limit: None,
            vertex_cap: 100,
        };
        match build_tree(&inst, &NaiveHeuristic, &opts) {
            Err(Error::Resource(msg)) => assert!(msg.contains("100")),
            other => panic!("expected resource error, got {other:?}"),
        }
    }

    #[test]
    fn subtree_views() {
        let inst = instance(2, 1, vec![]);
        let tree = build_tree(&inst, &NaiveHeuristic, &BuildOptions::default()).unwrap();
        assert_eq!(tree.subtree(0).unwrap(), tree);
        let child = tree.root().children[0];
        let sub = tree.subtree(child).unwrap();
        assert_eq!(sub.len(), 3);
        assert_eq!(sub.root().depth, 0);
        assert_eq!(sub.n, 1);
        // leaf subtree
        let leaf = sub.vertices.iter().find(|v| v.children.is_empty()).unwrap();
        let leaf_in_parent = tree
            .vertices
            .iter()
            .find(|v| v.assignment == leaf.assignment)
            .unwrap();
        assert_eq!(tree.subtree(leaf_in_parent.id).unwrap().len(), 1);
        assert!(tree.subtree(99).is_err());
    }

    #[test]
    fn truncation_preserves_marks() {
        let inst = instance(3, 2, vec![vec![1, 2]]);
        let tree = build_tree(&inst, &NaiveHeuristic, &BuildOptions::default()).unwrap();
        let cut = tree.truncated(1);
        assert!(cut.vertices.iter().all(|v| v.depth <= 1));
        assert!(!cut.has_marked());
        let full = tree.truncated(tree.max_depth());
        assert_eq!(full.len(), tree.len());
        assert_eq!(full.marked_ids().len(), tree.marked_ids().len());
    }

    #[test]
    fn json_roundtrip() {
        let inst = random_ksat(6, 3, 8, &RngSpec::new(9)).unwrap();
        let tree = build_tree(&inst, &NaiveHeuristic, &BuildOptions::default()).unwrap();
        let text = tree.to_json();
        let back = BacktrackTree::from_json(&text).unwrap();
        assert_eq!(tree, back);
    }

    #[test]
    fn degree_convention() {
        let inst = instance(2, 1, vec![]);
        let tree = build_tree(&inst, &NaiveHeuristic, &BuildOptions::default()).unwrap();
        assert_eq!(tree.degree(0), 2);
        let child = tree.root().children[0];
        assert_eq!(tree.degree(child), 3);
    }
}
