//! Reflection operators of the quantum walk on a backtracking tree, and the
//! named analysis vectors built on the vertex basis.
//!
//! The vertex set splits into even-depth (`A`, containing the root) and
//! odd-depth (`B`) layers. Each unmarked vertex carries a diffusion operator
//! reflecting about the uniform superposition of itself and its children; the
//! root uses a superposition weighted by `sqrt(n)` on its children. `R_A` and
//! `R_B` are the direct sums of the diffusions over the two layers, with `R_B`
//! fixing the root coordinate, and one walk step applies `R_B * R_A`.

use crate::backtrack::BacktrackTree;
use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

/// One diffusion block: a reflection `I - 2|psi><psi|` supported on a vertex
/// and its children. Marked vertices carry no reflection (identity block).
#[derive(Clone, Debug)]
struct Diffusion {
    /// Member coordinates: the block's vertex followed by its children.
    members: Vec<usize>,
    /// Unit-vector coefficients over `members`; empty for identity blocks.
    psi: Vec<f64>,
}

/// The pair of reflections of the walk, stored block-wise so application is
/// `O(T d)` regardless of dimension; dense matrices are built on demand.
#[derive(Clone, Debug)]
pub struct WalkOperators {
    dim: usize,
    /// Depth parameter used in the root diffusion weights.
    n: usize,
    blocks_a: Vec<Diffusion>,
    blocks_b: Vec<Diffusion>,
    depths: Vec<usize>,
    marked: Vec<bool>,
}

/// Options for walk construction.
#[derive(Clone, Copy, Debug, Default)]
pub struct WalkOptions {
    /// Permit a marked root (identity block at the root).
    pub allow_marked_root: bool,
}

/// Build the walk operators for `tree` with depth parameter `n`.
///
/// `n` is a parameter rather than the tree's own depth: callers searching
/// subtrees keep the original bound, and depth-retuned searches pass the
/// learned target depth.
pub fn build_walk(tree: &BacktrackTree, n: usize) -> Result<WalkOperators> {
    build_walk_with_options(tree, n, WalkOptions::default())
}

pub fn build_walk_with_options(
    tree: &BacktrackTree,
    n: usize,
    options: WalkOptions,
) -> Result<WalkOperators> {
    if tree.is_empty() {
        return Err(Error::Input("cannot build a walk on an empty tree".into()));
    }
    if tree.max_depth() > n {
        return Err(Error::Input(format!(
            "tree depth {} exceeds the depth parameter n={n}",
            tree.max_depth()
        )));
    }
    if n == 0 {
        return Err(Error::Input("depth parameter n must be at least 1".into()));
    }
    if tree.root().marked && !options.allow_marked_root {
        return Err(Error::Input(
            "root is marked; check the root before building the walk".into(),
        ));
    }
    let mut blocks_a = Vec::new();
    let mut blocks_b = Vec::new();
    for v in &tree.vertices {
        let mut members = Vec::with_capacity(v.children.len() + 1);
        members.push(v.id);
        members.extend(v.children.iter().copied());
        let psi = if v.marked {
            Vec::new()
        } else if v.parent.is_none() {
            // root weights: 1 on the root, sqrt(n) on each child
            let d_r = v.children.len() as f64;
            let norm = (1.0 + d_r * n as f64).sqrt();
            let mut psi = vec![1.0 / norm];
            psi.extend(std::iter::repeat_n(
                (n as f64).sqrt() / norm,
                v.children.len(),
            ));
            psi
        } else {
            let d_x = (v.children.len() + 1) as f64;
            vec![1.0 / d_x.sqrt(); v.children.len() + 1]
        };
        let block = Diffusion { members, psi };
        if v.depth.is_multiple_of(2) {
            blocks_a.push(block);
        } else {
            blocks_b.push(block);
        }
    }
    Ok(WalkOperators {
        dim: tree.len(),
        n,
        blocks_a,
        blocks_b,
        depths: tree.vertices.iter().map(|v| v.depth).collect(),
        marked: tree.vertices.iter().map(|v| v.marked).collect(),
    })
}

fn apply_blocks(blocks: &[Diffusion], v: &mut DVector<f64>) {
    for block in blocks {
        if block.psi.is_empty() {
            continue;
        }
        let mut dot = 0.0;
        for (&m, &c) in block.members.iter().zip(&block.psi) {
            dot += c * v[m];
        }
        let scale = 2.0 * dot;
        for (&m, &c) in block.members.iter().zip(&block.psi) {
            v[m] -= scale * c;
        }
    }
}

impl WalkOperators {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn depth_parameter(&self) -> usize {
        self.n
    }

    pub fn depth(&self, id: usize) -> usize {
        self.depths[id]
    }

    pub fn is_marked(&self, id: usize) -> bool {
        self.marked[id]
    }

    pub fn apply_r_a(&self, v: &mut DVector<f64>) {
        apply_blocks(&self.blocks_a, v);
    }

    pub fn apply_r_b(&self, v: &mut DVector<f64>) {
        apply_blocks(&self.blocks_b, v);
    }

    /// One walk step: `R_A` then `R_B`.
    pub fn apply_step(&self, v: &mut DVector<f64>) {
        self.apply_r_a(v);
        self.apply_r_b(v);
    }

    /// Projection onto the +1 eigenspace of `R_A`: `(I + R_A)/2`.
    pub fn project_a(&self, v: &DVector<f64>) -> DVector<f64> {
        let mut reflected = v.clone();
        self.apply_r_a(&mut reflected);
        (v + reflected) * 0.5
    }

    /// Projection onto the +1 eigenspace of `R_B`: `(I + R_B)/2`.
    pub fn project_b(&self, v: &DVector<f64>) -> DVector<f64> {
        let mut reflected = v.clone();
        self.apply_r_b(&mut reflected);
        (v + reflected) * 0.5
    }

    fn dense_from_blocks(&self, blocks: &[Diffusion]) -> DMatrix<f64> {
        let mut m = DMatrix::identity(self.dim, self.dim);
        for block in blocks {
            if block.psi.is_empty() {
                continue;
            }
            for (i, &mi) in block.members.iter().enumerate() {
                for (j, &mj) in block.members.iter().enumerate() {
                    m[(mi, mj)] -= 2.0 * block.psi[i] * block.psi[j];
                }
            }
        }
        m
    }

    pub fn dense_r_a(&self) -> DMatrix<f64> {
        self.dense_from_blocks(&self.blocks_a)
    }

    pub fn dense_r_b(&self) -> DMatrix<f64> {
        self.dense_from_blocks(&self.blocks_b)
    }

    /// Dense walk step `R_B * R_A`.
    pub fn dense_step(&self) -> DMatrix<f64> {
        self.dense_r_b() * self.dense_r_a()
    }

    /// Root state `|r>`.
    pub fn root_state(&self) -> DVector<f64> {
        let mut v = DVector::zeros(self.dim);
        v[0] = 1.0;
        v
    }

    /// Coordinate-list text form `(row, col, value)` of a dense operator,
    /// one entry per line, for cross-checking in external tools.
    pub fn to_coo_string(matrix: &DMatrix<f64>) -> String {
        let mut out = String::new();
        for i in 0..matrix.nrows() {
            for j in 0..matrix.ncols() {
                let v = matrix[(i, j)];
                if v != 0.0 {
                    out.push_str(&format!("{i} {j} {v:.17e}\n"));
                }
            }
        }
        out
    }
}

/// Labels for the named analysis vectors.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VectorLabel {
    Phi,
    PhiNormalized,
    PhiPerp,
    Eta,
    Xi,
}

/// A vector over the vertex basis together with its role.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NamedVector {
    pub label: VectorLabel,
    /// Target marked vertex, where applicable.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub marked_id: Option<usize>,
    pub coefficients: Vec<f64>,
}

impl NamedVector {
    pub fn vector(&self) -> DVector<f64> {
        DVector::from_column_slice(&self.coefficients)
    }

    pub fn norm(&self) -> f64 {
        self.vector().norm()
    }
}

/// Residual tolerance for the invariance check of the path eigenvector.
const PHI_RESIDUAL_TOL: f64 = 1e-10;
/// Residual tolerance for the projector identities of `eta`.
const ETA_RESIDUAL_TOL: f64 = 1e-9;
/// Residual tolerance for the projector identities of the witness.
const XI_RESIDUAL_TOL: f64 = 1e-8;

/// Path vector for a marked target: `sqrt(n)` on the root and alternating
/// signs `(-1)^depth` along the unique root-to-target path. It is fixed by
/// one walk step; squared norm `n + depth(target)`.
pub fn phi_vector(
    tree: &BacktrackTree,
    walk: &WalkOperators,
    marked_id: usize,
) -> Result<NamedVector> {
    let target = tree.vertex(marked_id)?;
    if !target.marked {
        return Err(Error::Input(format!("vertex {marked_id} is not marked")));
    }
    if tree.root().marked {
        return Err(Error::Input("path vector requires an unmarked root".into()));
    }
    let n = walk.depth_parameter();
    let mut coeff = vec![0.0; tree.len()];
    coeff[0] = (n as f64).sqrt();
    for id in tree.path_from_root(marked_id)? {
        if id == 0 {
            continue;
        }
        let depth = tree.vertices[id].depth;
        coeff[id] = if depth.is_multiple_of(2) { 1.0 } else { -1.0 };
    }
    let named = NamedVector {
        label: VectorLabel::Phi,
        marked_id: Some(marked_id),
        coefficients: coeff,
    };
    // invariance check
    let phi = named.vector();
    let mut stepped = phi.clone();
    walk.apply_step(&mut stepped);
    let residual = (&stepped - &phi).norm();
    if residual > PHI_RESIDUAL_TOL * phi.norm() {
        return Err(Error::Input(format!(
            "path vector is not invariant: residual {residual:.3e}"
        )));
    }
    Ok(named)
}

/// Normalized form of [`phi_vector`].
pub fn phi_normalized(
    tree: &BacktrackTree,
    walk: &WalkOperators,
    marked_id: usize,
) -> Result<NamedVector> {
    let mut named = phi_vector(tree, walk, marked_id)?;
    let norm = named.norm();
    for c in &mut named.coefficients {
        *c /= norm;
    }
    named.label = VectorLabel::PhiNormalized;
    Ok(named)
}

/// The component of the root state orthogonal to the normalized path vector,
/// `sqrt(2)|r> - phi_normalized`, defined when the target sits at depth `n`.
pub fn phi_perp(
    tree: &BacktrackTree,
    walk: &WalkOperators,
    marked_id: usize,
) -> Result<NamedVector> {
    let depth = tree.vertex(marked_id)?.depth;
    if depth != walk.depth_parameter() {
        return Err(Error::Input(format!(
            "orthogonal component requires the target at depth n={}, found depth {depth}; \
             truncate the tree to the target depth first",
            walk.depth_parameter()
        )));
    }
    let normalized = phi_normalized(tree, walk, marked_id)?;
    let mut coeff = normalized.coefficients;
    for c in coeff.iter_mut() {
        *c = -*c;
    }
    coeff[0] += std::f64::consts::SQRT_2;
    Ok(NamedVector {
        label: VectorLabel::PhiPerp,
        marked_id: Some(marked_id),
        coefficients: coeff,
    })
}

/// Uniform certificate vector: 1 on the root, `sqrt(n)` elsewhere. On trees
/// without marked vertices it is annihilated by the `R_A` projector and maps
/// to the root under the `R_B` projector.
pub fn eta_vector(tree: &BacktrackTree, walk: &WalkOperators) -> Result<NamedVector> {
    let n = walk.depth_parameter();
    let mut coeff = vec![(n as f64).sqrt(); tree.len()];
    coeff[0] = 1.0;
    let named = NamedVector {
        label: VectorLabel::Eta,
        marked_id: None,
        coefficients: coeff,
    };
    if !tree.has_marked() {
        let eta = named.vector();
        let pa = walk.project_a(&eta);
        if pa.norm() > ETA_RESIDUAL_TOL {
            return Err(Error::Input(format!(
                "eta projector identity failed: |P_A eta| = {:.3e}",
                pa.norm()
            )));
        }
        let mut pb = walk.project_b(&eta);
        pb[0] -= 1.0;
        if pb.norm() > ETA_RESIDUAL_TOL {
            return Err(Error::Input(format!(
                "eta projector identity failed: |P_B eta - r| = {:.3e}",
                pb.norm()
            )));
        }
    }
    Ok(named)
}

/// Witness vector for the overlap bound of the unique-target search: a
/// combination of the unmarked even-layer diffusion states whose `R_B`
/// projection reproduces [`phi_perp`]. Coefficients are assigned top-down:
/// depth-1 vertices get `sqrt(n)` times the root coefficient, children copy
/// their parent except at odd path vertices, where off-path children subtract
/// `1/sqrt(2n)` and the path child subtracts `sqrt(2/n)`.
pub fn xi_witness(
    tree: &BacktrackTree,
    walk: &WalkOperators,
    marked_id: usize,
) -> Result<NamedVector> {
    let marked = tree.marked_ids();
    if marked != vec![marked_id] {
        return Err(Error::Input(format!(
            "witness requires a unique marked vertex; tree has {:?}",
            marked
        )));
    }
    let n = walk.depth_parameter();
    let target = tree.vertex(marked_id)?;
    if target.depth != n || !target.children.is_empty() {
        return Err(Error::Input(format!(
            "witness requires the marked vertex to be a leaf at depth n={n}; \
             truncate the tree to the target depth first"
        )));
    }
    let mut on_path = vec![false; tree.len()];
    for id in tree.path_from_root(marked_id)? {
        on_path[id] = true;
    }
    let sqrt_n = (n as f64).sqrt();
    let gamma_shift = 1.0 / (2.0 * n as f64).sqrt();
    let delta_shift = (2.0 / n as f64).sqrt();

    let mut alpha = vec![0.0; tree.len()];
    alpha[0] = std::f64::consts::FRAC_1_SQRT_2;
    // top-down in id order: parents precede children in DFS numbering
    for v in &tree.vertices {
        let a = alpha[v.id];
        for &c in &v.children {
            alpha[c] = if v.parent.is_none() {
                sqrt_n * a
            } else if v.depth % 2 == 1 && on_path[v.id] {
                if on_path[c] {
                    a - delta_shift
                } else {
                    a - gamma_shift
                }
            } else {
                a
            };
        }
    }

    let expected_target = if target.depth % 2 == 1 {
        gamma_shift
    } else {
        0.0
    };
    if (alpha[marked_id] - expected_target).abs() > 1e-9 {
        return Err(Error::Input(format!(
            "witness recurrence closed at {} instead of {expected_target}",
            alpha[marked_id]
        )));
    }
    let bound = (n as f64 / 2.0).sqrt() + 1e-12;
    if let Some(bad) = alpha.iter().find(|a| a.abs() > bound) {
        return Err(Error::Input(format!(
            "witness coefficient {bad} exceeds sqrt(n/2)"
        )));
    }

    let named = NamedVector {
        label: VectorLabel::Xi,
        marked_id: Some(marked_id),
        coefficients: alpha,
    };
    let xi = named.vector();
    let pa = walk.project_a(&xi);
    if pa.norm() > XI_RESIDUAL_TOL {
        return Err(Error::Input(format!(
            "witness projector identity failed: |P_A xi| = {:.3e}",
            pa.norm()
        )));
    }
    let pb = walk.project_b(&xi);
    let perp = phi_perp(tree, walk, marked_id)?.vector();
    let residual = (&pb - &perp).norm();
    if residual > XI_RESIDUAL_TOL {
        return Err(Error::Input(format!(
            "witness projector identity failed: |P_B xi - phi_perp| = {residual:.3e}"
        )));
    }
    Ok(named)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backtrack::{build_tree, BuildOptions};
    use crate::csp::{KSatInstance, NaiveHeuristic, RngSpec};
    use crate::suite;
    use rand::Rng;

    fn random_vector<R: Rng>(dim: usize, rng: &mut R) -> DVector<f64> {
        DVector::from_fn(dim, |_, _| rng.random::<f64>() * 2.0 - 1.0)
    }

    #[test]
    fn single_vertex_degenerate_walk() {
        let tree = suite::path_tree(0, false);
        let walk = build_walk(&tree, 1).unwrap();
        let ra = walk.dense_r_a();
        let rb = walk.dense_r_b();
        assert!((ra[(0, 0)] + 1.0).abs() < 1e-15);
        assert!((rb[(0, 0)] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn two_step_path_matches_hand_computation() {
        let tree = suite::path_tree(2, true);
        let walk = build_walk(&tree, 2).unwrap();
        let ra = walk.dense_r_a();
        // psi_r = (|r> + sqrt(2)|a>)/sqrt(3)
        let s2 = 2.0f64.sqrt();
        assert!((ra[(0, 0)] - 1.0 / 3.0).abs() < 1e-12);
        assert!((ra[(0, 1)] + 2.0 * s2 / 3.0).abs() < 1e-12);
        assert!((ra[(1, 1)] + 1.0 / 3.0).abs() < 1e-12);
        // marked leaf block is identity
        assert!((ra[(2, 2)] - 1.0).abs() < 1e-15);
        let rb = walk.dense_r_b();
        assert!((rb[(0, 0)] - 1.0).abs() < 1e-15);
        assert!((rb[(1, 2)] + 1.0).abs() < 1e-12);
        assert!((rb[(1, 1)]).abs() < 1e-12);
    }

    #[test]
    fn reflections_are_orthogonal_involutions() {
        let mut rng = RngSpec::new(400).build().unwrap();
        for salt in 0..20u64 {
            let inst = crate::csp::random_ksat(7, 3, 14, &RngSpec::new(500 + salt)).unwrap();
            let tree = build_tree(&inst, &NaiveHeuristic, &BuildOptions::default()).unwrap();
            let walk = build_walk(&tree, 7).unwrap();
            for _ in 0..5 {
                let v = random_vector(tree.len(), &mut rng);
                let mut w = v.clone();
                walk.apply_r_a(&mut w);
                assert!((w.norm() - v.norm()).abs() < 1e-10);
                walk.apply_r_a(&mut w);
                assert!((&w - &v).norm() < 1e-10);
                let mut u = v.clone();
                walk.apply_r_b(&mut u);
                assert!((u.norm() - v.norm()).abs() < 1e-10);
                walk.apply_r_b(&mut u);
                assert!((&u - &v).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn dense_and_blockwise_application_agree() {
        let inst = crate::csp::random_ksat(6, 3, 10, &RngSpec::new(123)).unwrap();
        let tree = build_tree(&inst, &NaiveHeuristic, &BuildOptions::default()).unwrap();
        let walk = build_walk(&tree, 6).unwrap();
        let step = walk.dense_step();
        let mut rng = RngSpec::new(8).build().unwrap();
        for _ in 0..5 {
            let v = random_vector(tree.len(), &mut rng);
            let mut fast = v.clone();
            walk.apply_step(&mut fast);
            let slow = &step * &v;
            assert!((&fast - &slow).norm() < 1e-12);
        }
    }

    #[test]
    fn phi_examples() {
        let tree = suite::path_tree(2, true);
        let walk = build_walk(&tree, 2).unwrap();
        let phi = phi_vector(&tree, &walk, 2).unwrap();
        let v = phi.vector();
        assert!((v[0] - 2.0f64.sqrt()).abs() < 1e-15);
        assert!((v[1] + 1.0).abs() < 1e-15);
        assert!((v[2] - 1.0).abs() < 1e-15);
        // orthogonal to the root diffusion state
        let psi_r = DVector::from_column_slice(&[1.0, 2.0f64.sqrt(), 0.0]) / 3.0f64.sqrt();
        assert!(psi_r.dot(&v).abs() < 1e-12);
        // squared norm n + depth(target)
        assert!((v.norm_squared() - 4.0).abs() < 1e-12);
        // root overlap at least 1/sqrt(2)
        assert!(v[0] / v.norm() >= std::f64::consts::FRAC_1_SQRT_2 - 1e-12);
    }

    #[test]
    fn phi_rejects_unmarked_target() {
        let tree = suite::path_tree(2, true);
        let walk = build_walk(&tree, 2).unwrap();
        assert!(phi_vector(&tree, &walk, 1).is_err());
    }

    #[test]
    fn eta_examples() {
        let tree = suite::path_tree(0, false);
        let walk = build_walk(&tree, 1).unwrap();
        let eta = eta_vector(&tree, &walk).unwrap();
        assert_eq!(eta.coefficients, vec![1.0]);

        let inst = KSatInstance::new(2, 1, vec![]).unwrap();
        let tree = build_tree(&inst, &NaiveHeuristic, &BuildOptions::default()).unwrap();
        let unmarked = tree.with_unmarked(&tree.marked_ids());
        let walk = build_walk(&unmarked, 2).unwrap();
        let eta = eta_vector(&unmarked, &walk).unwrap();
        assert!((eta.vector().norm_squared() - 13.0).abs() < 1e-12);
    }

    #[test]
    fn xi_path_example() {
        // path of length 2 with target in the even layer: final coefficient 0
        let tree = suite::path_tree(2, true);
        let walk = build_walk(&tree, 2).unwrap();
        let xi = xi_witness(&tree, &walk, 2).unwrap();
        assert!((xi.coefficients[0] - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
        assert!((xi.coefficients[1] - 1.0).abs() < 1e-12);
        assert!(xi.coefficients[2].abs() < 1e-12);
    }

    #[test]
    fn xi_requires_unique_marked_leaf_at_depth_n() {
        let tree = suite::path_tree(3, true);
        let walk = build_walk(&tree, 4).unwrap();
        // depth 3 != n = 4
        assert!(xi_witness(&tree, &walk, 3).is_err());
    }

    #[test]
    fn coo_export_roundtrips_values() {
        let tree = suite::path_tree(2, true);
        let walk = build_walk(&tree, 2).unwrap();
        let text = WalkOperators::to_coo_string(&walk.dense_r_a());
        let mut rebuilt = DMatrix::zeros(3, 3);
        for line in text.lines() {
            let fields: Vec<&str> = line.split_whitespace().collect();
            rebuilt[(
                fields[0].parse::<usize>().unwrap(),
                fields[1].parse::<usize>().unwrap(),
            )] = fields[2].parse::<f64>().unwrap();
        }
        assert!((rebuilt - walk.dense_r_a()).norm() < 1e-12);
    }

    #[test]
    fn invariants_across_the_randomized_suite() {
        let mut rng = RngSpec::new(808).build().unwrap();
        let mut suite = crate::suite::standard_suite(1).unwrap();
        suite.extend(crate::suite::standard_suite(2).unwrap());
        assert!(suite.len() >= 100);
        for entry in &suite {
            let walk = build_walk(&entry.tree, entry.n).unwrap();
            for _ in 0..2 {
                let v = random_vector(entry.tree.len(), &mut rng);
                let mut w = v.clone();
                walk.apply_r_a(&mut w);
                assert!((w.norm() - v.norm()).abs() <= 1e-10 * (1.0 + v.norm()));
                walk.apply_r_a(&mut w);
                assert!((&w - &v).norm() <= 1e-10 * (1.0 + v.norm()));
                let mut u = v.clone();
                walk.apply_r_b(&mut u);
                assert!((u.norm() - v.norm()).abs() <= 1e-10 * (1.0 + v.norm()));
                walk.apply_r_b(&mut u);
                assert!((&u - &v).norm() <= 1e-10 * (1.0 + v.norm()));
            }
            if entry.is_marked() {
                for id in entry.tree.marked_ids() {
                    // construction verifies the fixed-point residual internally
                    let phi = phi_vector(&entry.tree, &walk, id).unwrap();
                    let expected = (entry.n + entry.tree.vertices[id].depth) as f64;
                    assert!((phi.vector().norm_squared() - expected).abs() < 1e-9);
                }
            } else {
                // construction verifies the projector identities internally
                eta_vector(&entry.tree, &walk).unwrap();
            }
            if let Some(id) = entry.unique_marked_leaf() {
                xi_witness(&entry.tree, &walk, id).unwrap();
            }
        }
    }

    #[test]
    fn marked_root_is_rejected_without_override() {
        let mut tree = suite::path_tree(1, true);
        tree.vertices[0].marked = true;
        assert!(build_walk(&tree, 1).is_err());
        let walk = build_walk_with_options(
            &tree,
            1,
            WalkOptions {
                allow_marked_root: true,
            },
        )
        .unwrap();
        assert!((walk.dense_r_a()[(0, 0)] - 1.0).abs() < 1e-15);
    }
}
