//! Deterministic families of test trees: paths, stars and random k-SAT trees.
//! Used for calibration and by the verification suites.

use crate::backtrack::{build_tree, BacktrackTree, BuildOptions, Vertex};
use crate::csp::{random_ksat, NaiveHeuristic, PartialAssignment, RngSpec};
use crate::error::Result;

/// A tree together with the depth parameter its walk should use.
#[derive(Clone, Debug)]
pub struct SuiteTree {
    pub description: String,
    pub tree: BacktrackTree,
    /// Depth parameter for walk construction.
    pub n: usize,
}

impl SuiteTree {
    pub fn is_marked(&self) -> bool {
        self.tree.has_marked()
    }

    /// Id of the unique marked leaf at depth `n`, if the tree has exactly one
    /// marked vertex and it sits at the bottom.
    pub fn unique_marked_leaf(&self) -> Option<usize> {
        let marked = self.tree.marked_ids();
        if marked.len() != 1 {
            return None;
        }
        let v = &self.tree.vertices[marked[0]];
        if v.depth == self.n && v.children.is_empty() {
            Some(marked[0])
        } else {
            None
        }
    }
}

fn dummy_assignment(n: usize, depth: usize) -> PartialAssignment {
    let pairs = (1..=depth).map(|i| (i, 0u8)).collect();
    PartialAssignment::from_pairs(n.max(depth), pairs).expect("valid synthetic assignment")
}

/// A path with `length + 1` vertices; the deepest vertex is marked on demand.
pub fn path_tree(length: usize, marked_leaf: bool) -> BacktrackTree {
    let n = length.max(1);
    let mut vertices = Vec::with_capacity(length + 1);
    for depth in 0..=length {
        vertices.push(Vertex {
            id: depth,
            parent: if depth == 0 { None } else { Some(depth - 1) },
            children: if depth == length {
                Vec::new()
            } else {
                vec![depth + 1]
            },
            depth,
            marked: marked_leaf && depth == length && length > 0,
            assignment: dummy_assignment(n, depth),
        });
    }
    BacktrackTree {
        n,
        d: 2,
        vertex_count: vertices.len(),
        vertices,
    }
}

/// A root with `arity` depth-1 children; `marked_child` marks one of them.
pub fn star_tree(arity: usize, marked_child: Option<usize>) -> BacktrackTree {
    let mut vertices = vec![Vertex {
        id: 0,
        parent: None,
        children: (1..=arity).collect(),
        depth: 0,
        marked: false,
        assignment: PartialAssignment::empty(1),
    }];
    for c in 0..arity {
        vertices.push(Vertex {
            id: c + 1,
            parent: Some(0),
            children: Vec::new(),
            depth: 1,
            marked: marked_child == Some(c),
            assignment: dummy_assignment(1, 1),
        });
    }
    BacktrackTree {
        n: 1,
        d: arity.max(1) + 1,
        vertex_count: vertices.len(),
        vertices,
    }
}

/// A path of `length` vertices with `bristles` extra leaves attached to every
/// path vertex; the far end of the path is marked on demand. Exercises tall,
/// thin trees with off-path weight.
pub fn caterpillar_tree(length: usize, bristles: usize, marked_leaf: bool) -> BacktrackTree {
    assert!(length >= 1);
    let mut vertices: Vec<Vertex> = vec![Vertex {
        id: 0,
        parent: None,
        children: Vec::new(),
        depth: 0,
        marked: false,
        assignment: dummy_assignment(length, 0),
    }];
    let mut spine = 0usize;
    for depth in 1..=length {
        let id = vertices.len();
        vertices[spine].children.push(id);
        vertices.push(Vertex {
            id,
            parent: Some(spine),
            children: Vec::new(),
            depth,
            marked: marked_leaf && depth == length,
            assignment: dummy_assignment(length, depth),
        });
        let new_spine = id;
        if depth < length {
            for _ in 0..bristles {
                let leaf = vertices.len();
                vertices[new_spine].children.push(leaf);
                vertices.push(Vertex {
                    id: leaf,
                    parent: Some(new_spine),
                    children: Vec::new(),
                    depth: depth + 1,
                    marked: false,
                    assignment: dummy_assignment(length, depth + 1),
                });
            }
        }
        spine = new_spine;
    }
    // keep children in id order; spine child first is fine for determinism
    BacktrackTree {
        n: length,
        d: bristles + 2,
        vertex_count: vertices.len(),
        vertices,
    }
}

/// Random k-SAT backtracking tree for the given parameters, with a vertex cap
/// of 512 rejected instances skipped by the caller.
pub fn ksat_tree(n: usize, k: usize, m: usize, seed: u64) -> Result<BacktrackTree> {
    let inst = random_ksat(n, k, m, &RngSpec::new(seed))?;
    build_tree(&inst, &NaiveHeuristic, &BuildOptions::default())
}

/// The standard calibration and verification suite: paths, stars,
/// caterpillars and random 3-SAT trees, marked and unmarked, vertex count at
/// most 512. Deterministic in `seed`.
pub fn standard_suite(seed: u64) -> Result<Vec<SuiteTree>> {
    let mut suite = Vec::new();
    for &length in &[1usize, 2, 3, 5, 8, 12, 16] {
        for &marked in &[false, true] {
            let tree = path_tree(length, marked);
            suite.push(SuiteTree {
                description: format!("path len={length} marked={marked}"),
                n: length,
                tree,
            });
        }
    }
    for &arity in &[1usize, 2, 3, 6, 12, 24] {
        for marked in [None, Some(0)] {
            let tree = star_tree(arity, marked);
            suite.push(SuiteTree {
                description: format!("star arity={arity} marked={}", marked.is_some()),
                n: 1,
                tree,
            });
        }
    }
    for &(length, bristles) in &[(4usize, 1usize), (6, 2), (10, 3)] {
        for &marked in &[false, true] {
            let tree = caterpillar_tree(length, bristles, marked);
            suite.push(SuiteTree {
                description: format!(
                    "caterpillar len={length} bristles={bristles} marked={marked}"
                ),
                n: length,
                tree,
            });
        }
    }
    // random 3-SAT trees across densities; keep both satisfiable and
    // unsatisfiable ones, plus unmarked copies of satisfiable trees
    let mut salt = 0u64;
    for &(n, m) in &[
        (5usize, 12usize),
        (6, 15),
        (7, 20),
        (8, 22),
        (9, 28),
        (10, 34),
        (11, 40),
    ] {
        let mut kept = 0;
        while kept < 4 && salt < 4000 {
            let tree = ksat_tree(
                n,
                3,
                m,
                seed ^ (0x9e37_79b9_7f4a_7c15u64.wrapping_mul(salt + 1)),
            )?;
            salt += 1;
            if tree.len() < 2 || tree.len() > 512 {
                continue;
            }
            kept += 1;
            let marked = tree.has_marked();
            if marked {
                let unmarked = tree.with_unmarked(&tree.marked_ids());
                suite.push(SuiteTree {
                    description: format!("ksat n={n} m={m} salt={salt} (marks cleared)"),
                    tree: unmarked,
                    n,
                });
            }
            suite.push(SuiteTree {
                description: format!("ksat n={n} m={m} salt={salt} marked={marked}"),
                tree,
                n,
            });
        }
    }
    Ok(suite)
}

/// Subset of [`standard_suite`] trees with a unique marked leaf at depth `n`.
pub fn unique_marked_suite(seed: u64) -> Result<Vec<SuiteTree>> {
    Ok(standard_suite(seed)?
        .into_iter()
        .filter(|t| t.unique_marked_leaf().is_some())
        .collect())
}
