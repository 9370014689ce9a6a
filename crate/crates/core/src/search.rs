//! Walk-based search on backtracking trees: phase-estimation detection with
//! majority voting, descent-based finding with size doubling, enumeration of
//! all solutions, and the faster unique-target search driven by path
//! sampling. All walk-step, predicate and heuristic counters are exact counts
//! of the simulated operations.

use crate::backtrack::{build_tree, BacktrackTree, BuildOptions, DEFAULT_VERTEX_CAP};
use crate::csp::{Heuristic, PartialAssignment, Predicate, PredicateVerdict};
use crate::error::{Error, Result};
use crate::spectral::{
    eigendecompose, qpe_accept_probability, qpe_conditional_state, EigenDecomposition,
    DEFAULT_DENSE_DIM,
};
use crate::suite::SuiteTree;
use crate::walk::build_walk;
use nalgebra::DVector;
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::rc::Rc;

/// Repetition constant: with acceptance gap 1/8 around the 3/8 threshold,
/// Hoeffding gives failure probability `exp(-K/32)`, so `K = 32 ln(1/delta)`
/// repetitions suffice.
pub const DEFAULT_GAMMA: f64 = 32.0;

/// Precision constant selected by [`calibrate_constants`] on the standard
/// suite (seed 1), pinned here as the default.
pub const DEFAULT_BETA: f64 = 0.5;

/// Candidate precision constants scanned by calibration, descending.
pub const BETA_GRID: [f64; 24] = [
    2.0, 1.6, 1.25, 1.0, 0.8, 0.625, 0.5, 0.4, 0.32, 0.25, 0.2, 0.16, 0.125, 0.1, 0.08, 0.0625,
    0.05, 0.04, 0.032, 0.025, 0.02, 0.016, 0.0125, 0.01,
];

/// Configuration of the detection subroutine and everything built on it.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DetectionConfig {
    /// Precision constant: phase-estimation precision is `beta / sqrt(T n)`.
    pub beta: f64,
    /// Repetition constant: `K = ceil(gamma ln(1/delta))` repetitions.
    pub gamma: f64,
    /// Target failure probability.
    pub delta: f64,
    /// Dense eigendecomposition threshold.
    pub max_dim: usize,
    /// Vertex budget for materialization and size doubling.
    pub vertex_cap: usize,
    /// Verify search promises against the materialized tree.
    pub verify_promise: bool,
}

impl Default for DetectionConfig {
    fn default() -> Self {
        DetectionConfig {
            beta: DEFAULT_BETA,
            gamma: DEFAULT_GAMMA,
            delta: 0.05,
            max_dim: DEFAULT_DENSE_DIM,
            vertex_cap: DEFAULT_VERTEX_CAP,
            verify_promise: true,
        }
    }
}

impl DetectionConfig {
    fn validate(&self) -> Result<()> {
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::Input(format!(
                "delta {} must lie in (0, 1)",
                self.delta
            )));
        }
        if self.beta <= 0.0 || self.gamma <= 0.0 {
            return Err(Error::Input("beta and gamma must be positive".into()));
        }
        Ok(())
    }

    /// Ancilla count for a size bound and depth bound: `ceil(log2(1/chi))`
    /// with `chi = beta / sqrt(T n)`, at least 1.
    pub fn ancilla_count(&self, t_bound: usize, n: usize) -> u32 {
        let chi = self.beta / ((t_bound as f64) * (n as f64)).sqrt();
        let s = (1.0 / chi).log2().ceil();
        if s < 1.0 {
            1
        } else {
            s as u32
        }
    }

    /// Repetition count for a per-use failure probability.
    pub fn repetitions(&self, delta: f64) -> u64 {
        (self.gamma * (1.0 / delta).ln()).ceil().max(1.0) as u64
    }
}

/// Exact count of controlled walk-step applications in one phase-estimation
/// run with `s` ancillas.
pub fn steps_per_estimation(s: u32) -> u64 {
    (1u64 << s) - 1
}

/// Per-phase operation counts of a search run.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct PhaseBreakdown {
    pub detect_calls: u64,
    pub detect_steps: u64,
    pub depth_search_calls: u64,
    pub depth_search_steps: u64,
    pub sampling_rounds: u64,
    pub sampling_attempts: u64,
    pub sampling_steps: u64,
    pub verification_checks: u64,
}

/// Exact operation counters for a search run.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct SearchTranscript {
    /// Applications of the walk step operator (controlled uses included).
    pub walk_steps: u64,
    pub predicate_evaluations: u64,
    pub heuristic_evaluations: u64,
    pub per_phase: PhaseBreakdown,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DetectionVerdict {
    MarkedExists,
    NoMarked,
}

/// Outcome of one detection run.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DetectionOutcome {
    pub verdict: DetectionVerdict,
    /// Per-repetition acceptance bits.
    pub acceptances: Vec<bool>,
    /// Exact single-run acceptance probability from the spectral model.
    pub acceptance_probability: f64,
    pub ancilla_count: u32,
    pub repetitions: u64,
}

impl DetectionOutcome {
    pub fn accepted_count(&self) -> u64 {
        self.acceptances.iter().filter(|&&b| b).count() as u64
    }
}

/// Decompositions of subtree walks computed during one search run, keyed by
/// `(root vertex, depth limit, depth parameter)`. Shared across repeated runs
/// on the same tree to avoid recomputing identical factorizations.
#[derive(Default)]
pub struct WalkCache {
    entries: HashMap<(usize, usize, usize), Rc<CachedSubtree>>,
}

struct CachedSubtree {
    /// Map from subtree vertex ids to ids in the original tree.
    map: Vec<usize>,
    dim: usize,
    root_marked: bool,
    decomp: Option<EigenDecomposition>,
}

impl WalkCache {
    pub fn new() -> Self {
        WalkCache::default()
    }

    fn subtree(
        &mut self,
        tree: &BacktrackTree,
        root: usize,
        depth_limit: Option<usize>,
        n: usize,
        max_dim: usize,
    ) -> Result<Rc<CachedSubtree>> {
        let key = (root, depth_limit.unwrap_or(usize::MAX), n);
        if let Some(hit) = self.entries.get(&key) {
            return Ok(hit.clone());
        }
        let (sub, map) = extract_with_map(tree, root, depth_limit)?;
        let root_marked = sub.root().marked;
        let decomp = if root_marked {
            None
        } else {
            let walk = build_walk(&sub, n)?;
            Some(eigendecompose(&walk, max_dim)?)
        };
        let entry = Rc::new(CachedSubtree {
            map,
            dim: sub.len(),
            root_marked,
            decomp,
        });
        self.entries.insert(key, entry.clone());
        Ok(entry)
    }
}

fn extract_with_map(
    tree: &BacktrackTree,
    root: usize,
    depth_limit: Option<usize>,
) -> Result<(BacktrackTree, Vec<usize>)> {
    let base_depth = tree.vertex(root)?.depth;
    let mut map = Vec::new();
    let mut vertices = Vec::new();
    let mut stack: Vec<(usize, Option<usize>)> = vec![(root, None)];
    while let Some((old_id, parent)) = stack.pop() {
        let old = &tree.vertices[old_id];
        let depth = old.depth - base_depth;
        if let Some(limit) = depth_limit {
            if depth > limit {
                continue;
            }
        }
        let id = vertices.len();
        if let Some(p) = parent {
            let parent_vertex: &mut crate::backtrack::Vertex = &mut vertices[p];
            parent_vertex.children.push(id);
        }
        vertices.push(crate::backtrack::Vertex {
            id,
            parent,
            children: Vec::new(),
            depth,
            marked: old.marked,
            assignment: old.assignment.clone(),
        });
        map.push(old_id);
        for &child in old.children.iter().rev() {
            stack.push((child, Some(id)));
        }
    }
    let sub = BacktrackTree {
        n: tree.n - base_depth,
        d: tree.d,
        vertex_count: vertices.len(),
        vertices,
    };
    Ok((sub, map))
}

fn majority_verdict(acceptances: &[bool], repetitions: u64) -> DetectionVerdict {
    let accepted = acceptances.iter().filter(|&&b| b).count() as f64;
    if accepted >= 3.0 * repetitions as f64 / 8.0 {
        DetectionVerdict::MarkedExists
    } else {
        DetectionVerdict::NoMarked
    }
}

fn run_estimations(
    decomp: &EigenDecomposition,
    s: u32,
    delta: f64,
    config: &DetectionConfig,
    rng: &mut ChaCha12Rng,
) -> Result<DetectionOutcome> {
    let mut root = DVector::zeros(decomp.dim());
    root[0] = 1.0;
    let p = qpe_accept_probability(decomp, &root, s)?;
    let repetitions = config.repetitions(delta);
    let acceptances: Vec<bool> = (0..repetitions).map(|_| rng.random::<f64>() < p).collect();
    Ok(DetectionOutcome {
        verdict: majority_verdict(&acceptances, repetitions),
        acceptances,
        acceptance_probability: p,
        ancilla_count: s,
        repetitions,
    })
}

/// Run the detection algorithm on a tree: `K` phase estimations of the walk
/// step at precision `beta / sqrt(t_bound * n)`, accepting on eigenvalue 1,
/// with the 3K/8 majority rule.
pub fn detect(
    tree: &BacktrackTree,
    n: usize,
    t_bound: usize,
    config: &DetectionConfig,
    rng: &mut ChaCha12Rng,
) -> Result<(DetectionOutcome, SearchTranscript)> {
    config.validate()?;
    if t_bound == 0 {
        return Err(Error::Input("size bound must be at least 1".into()));
    }
    if tree.root().marked {
        return Err(Error::Input(
            "root is marked; check the root before running detection".into(),
        ));
    }
    let walk = build_walk(tree, n)?;
    let decomp = eigendecompose(&walk, config.max_dim)?;
    let s = config.ancilla_count(t_bound, n);
    let mut transcript = SearchTranscript::default();
    let outcome = run_estimations(&decomp, s, config.delta, config, rng)?;
    transcript.per_phase.detect_calls += 1;
    transcript.per_phase.detect_steps += outcome.repetitions * steps_per_estimation(s);
    transcript.walk_steps = transcript.per_phase.detect_steps;
    Ok((outcome, transcript))
}

/// Result of a finding run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FindOutcome {
    Found(PartialAssignment),
    NotFound,
}

struct TreeSearcher<'a> {
    tree: &'a BacktrackTree,
    n: usize,
    config: &'a DetectionConfig,
    cache: &'a mut WalkCache,
    transcript: SearchTranscript,
}

enum CachedDetect {
    RootMarked,
    Verdict(DetectionVerdict),
}

impl<'a> TreeSearcher<'a> {
    fn detect_subtree(
        &mut self,
        root: usize,
        depth_limit: Option<usize>,
        t_bound: usize,
        delta: f64,
        rng: &mut ChaCha12Rng,
        depth_search: bool,
    ) -> Result<CachedDetect> {
        let entry =
            self.cache
                .subtree(self.tree, root, depth_limit, self.n, self.config.max_dim)?;
        if entry.root_marked {
            // pre-check: the subtree root itself satisfies the predicate
            self.transcript.predicate_evaluations += 1;
            return Ok(CachedDetect::RootMarked);
        }
        let decomp = entry
            .decomp
            .as_ref()
            .expect("unmarked root implies decomposition");
        let s = self.config.ancilla_count(t_bound, self.n);
        let outcome = run_estimations(decomp, s, delta, self.config, rng)?;
        let steps = outcome.repetitions * steps_per_estimation(s);
        self.transcript.walk_steps += steps;
        if depth_search {
            self.transcript.per_phase.depth_search_calls += 1;
            self.transcript.per_phase.depth_search_steps += steps;
        } else {
            self.transcript.per_phase.detect_calls += 1;
            self.transcript.per_phase.detect_steps += steps;
        }
        Ok(CachedDetect::Verdict(outcome.verdict))
    }
}

/// Walk-based search for one marked vertex in a materialized tree, wrapped in
/// the size-doubling loop. `verify` is the predicate check applied to every
/// candidate root before it is returned; it must be exact.
fn find_in_tree(
    searcher: &mut TreeSearcher<'_>,
    rng: &mut ChaCha12Rng,
    verify: &mut dyn FnMut(usize, &mut SearchTranscript) -> Result<bool>,
) -> Result<Option<usize>> {
    let tree = searcher.tree;
    let n = searcher.n;
    let d = tree.d.max(2);
    // per-use failure budget: doubling rounds x descent detections per round
    let rounds_bound = (searcher.config.vertex_cap as f64).log2().ceil() as u64 + 2;
    let uses_bound = rounds_bound * (1 + (n as u64) * (d as u64));
    let delta_use = searcher.config.delta / uses_bound as f64;

    let mut t_bound = 1usize;
    while t_bound <= searcher.config.vertex_cap {
        let whole = searcher.detect_subtree(0, None, t_bound, delta_use, rng, false)?;
        let whole_verdict = match whole {
            CachedDetect::RootMarked => {
                searcher.transcript.per_phase.verification_checks += 1;
                if verify(0, &mut searcher.transcript)? {
                    return Ok(Some(0));
                }
                DetectionVerdict::MarkedExists
            }
            CachedDetect::Verdict(v) => v,
        };
        if whole_verdict == DetectionVerdict::NoMarked {
            return Ok(None);
        }
        // descend child by child, branch value ascending
        let mut current = 0usize;
        'descend: loop {
            searcher.transcript.per_phase.verification_checks += 1;
            if verify(current, &mut searcher.transcript)? {
                return Ok(Some(current));
            }
            let children = tree.vertices[current].children.clone();
            for child in children {
                match searcher.detect_subtree(child, None, t_bound, delta_use, rng, false)? {
                    CachedDetect::RootMarked => {
                        searcher.transcript.per_phase.verification_checks += 1;
                        if verify(child, &mut searcher.transcript)? {
                            return Ok(Some(child));
                        }
                        current = child;
                        continue 'descend;
                    }
                    CachedDetect::Verdict(DetectionVerdict::MarkedExists) => {
                        current = child;
                        continue 'descend;
                    }
                    CachedDetect::Verdict(DetectionVerdict::NoMarked) => {}
                }
            }
            // no child reported a marked vertex: this round failed
            break;
        }
        t_bound = t_bound.saturating_mul(2);
    }
    Err(Error::Resource(format!(
        "size-doubling exceeded the vertex cap of {}",
        searcher.config.vertex_cap
    )))
}

struct CountingOracle<'a, P: Predicate, H: Heuristic> {
    predicate: &'a P,
    heuristic: &'a H,
    predicate_evals: std::cell::Cell<u64>,
    heuristic_evals: std::cell::Cell<u64>,
}

impl<'a, P: Predicate, H: Heuristic> CountingOracle<'a, P, H> {
    fn new(predicate: &'a P, heuristic: &'a H) -> Self {
        CountingOracle {
            predicate,
            heuristic,
            predicate_evals: std::cell::Cell::new(0),
            heuristic_evals: std::cell::Cell::new(0),
        }
    }
}

impl<P: Predicate, H: Heuristic> Predicate for CountingOracle<'_, P, H> {
    fn variable_count(&self) -> usize {
        self.predicate.variable_count()
    }
    fn domain_size(&self) -> usize {
        self.predicate.domain_size()
    }
    fn evaluate(&self, x: &PartialAssignment) -> Result<PredicateVerdict> {
        self.predicate_evals.set(self.predicate_evals.get() + 1);
        self.predicate.evaluate(x)
    }
}

impl<P: Predicate, H: Heuristic> Heuristic for CountingOracle<'_, P, H> {
    fn next_variable(&self, x: &PartialAssignment) -> Result<usize> {
        self.heuristic_evals.set(self.heuristic_evals.get() + 1);
        self.heuristic.next_variable(x)
    }
}

fn materialize<P: Predicate, H: Heuristic>(
    predicate: &P,
    heuristic: &H,
    config: &DetectionConfig,
    transcript: &mut SearchTranscript,
) -> Result<BacktrackTree> {
    let oracle = CountingOracle::new(predicate, heuristic);
    let options = BuildOptions {
        depth_limit: None,
        vertex_cap: config.vertex_cap,
    };
    let tree = build_tree(&oracle, &oracle, &options)?;
    transcript.predicate_evaluations += oracle.predicate_evals.get();
    transcript.heuristic_evaluations += oracle.heuristic_evals.get();
    Ok(tree)
}

/// Find an assignment accepted by the predicate, or report that none exists.
///
/// Checks the empty assignment first, then searches the materialized tree
/// with detection and descent inside the size-doubling loop. The returned
/// assignment is always re-checked against the predicate before being
/// reported.
pub fn find_marked<P: Predicate, H: Heuristic>(
    predicate: &P,
    heuristic: &H,
    config: &DetectionConfig,
    rng: &mut ChaCha12Rng,
) -> Result<(FindOutcome, SearchTranscript)> {
    config.validate()?;
    let mut transcript = SearchTranscript::default();
    let root = PartialAssignment::empty(predicate.variable_count());
    transcript.predicate_evaluations += 1;
    if predicate.evaluate(&root)? == PredicateVerdict::True {
        return Ok((FindOutcome::Found(root), transcript));
    }
    let tree = materialize(predicate, heuristic, config, &mut transcript)?;
    let mut cache = WalkCache::new();
    let mut searcher = TreeSearcher {
        tree: &tree,
        n: predicate.variable_count(),
        config,
        cache: &mut cache,
        transcript,
    };
    let mut verify = |id: usize, t: &mut SearchTranscript| -> Result<bool> {
        t.predicate_evaluations += 1;
        predicate.is_solution(&tree.vertices[id].assignment)
    };
    let found = find_in_tree(&mut searcher, rng, &mut verify)?;
    let transcript = searcher.transcript;
    match found {
        Some(id) => Ok((
            FindOutcome::Found(tree.vertices[id].assignment.clone()),
            transcript,
        )),
        None => Ok((FindOutcome::NotFound, transcript)),
    }
}

/// Detection on a bare tree without an attached problem; the tree's marks are
/// taken as ground truth for the pre-check.
pub fn find_in_bare_tree(
    tree: &BacktrackTree,
    n: usize,
    config: &DetectionConfig,
    rng: &mut ChaCha12Rng,
) -> Result<(Option<usize>, SearchTranscript)> {
    config.validate()?;
    let mut cache = WalkCache::new();
    let mut searcher = TreeSearcher {
        tree,
        n,
        config,
        cache: &mut cache,
        transcript: SearchTranscript::default(),
    };
    let mut verify = |id: usize, t: &mut SearchTranscript| -> Result<bool> {
        t.predicate_evaluations += 1;
        Ok(tree.vertices[id].marked)
    };
    let found = find_in_tree(&mut searcher, rng, &mut verify)?;
    Ok((found, searcher.transcript))
}

/// Enumerate all solutions by repeating the tree search with previously
/// returned vertices struck from the marking.
pub fn find_all<P: Predicate, H: Heuristic>(
    predicate: &P,
    heuristic: &H,
    config: &DetectionConfig,
    rng: &mut ChaCha12Rng,
) -> Result<(Vec<PartialAssignment>, SearchTranscript)> {
    config.validate()?;
    let mut transcript = SearchTranscript::default();
    let tree = materialize(predicate, heuristic, config, &mut transcript)?;
    let mut struck: Vec<usize> = Vec::new();
    let mut found: Vec<PartialAssignment> = Vec::new();
    loop {
        let masked = tree.with_unmarked(&struck);
        let mut cache = WalkCache::new();
        let mut searcher = TreeSearcher {
            tree: &masked,
            n: predicate.variable_count(),
            config,
            cache: &mut cache,
            transcript,
        };
        let mut verify = |id: usize, t: &mut SearchTranscript| -> Result<bool> {
            t.predicate_evaluations += 1;
            if struck.contains(&id) {
                return Ok(false);
            }
            predicate.is_solution(&masked.vertices[id].assignment)
        };
        let outcome = find_in_tree(&mut searcher, rng, &mut verify)?;
        transcript = searcher.transcript;
        match outcome {
            Some(id) => {
                struck.push(id);
                found.push(tree.vertices[id].assignment.clone());
            }
            None => break,
        }
    }
    Ok((found, transcript))
}

/// Target accuracy of each prepared path state: `Theta(1/log n)`.
fn sampling_accuracy(n: usize) -> f64 {
    (0.25 / ((n.max(2) as f64).log2() + 1.0)).min(0.2)
}

fn sample_vertex(state: &DVector<Complex64>, rng: &mut ChaCha12Rng) -> usize {
    let total: f64 = state.iter().map(|a| a.norm_sqr()).sum();
    let mut u = rng.random::<f64>() * total;
    for (i, a) in state.iter().enumerate() {
        u -= a.norm_sqr();
        if u <= 0.0 {
            return i;
        }
    }
    state.len() - 1
}

/// Geometric number of preparation attempts until post-selection succeeds.
fn preparation_attempts(p: f64, rng: &mut ChaCha12Rng) -> u64 {
    const ATTEMPT_CAP: u64 = 10_000_000;
    if p >= 1.0 - 1e-15 {
        return 1;
    }
    if p <= 1e-12 {
        return ATTEMPT_CAP;
    }
    let u: f64 = rng.random::<f64>();
    let attempts = ((1.0 - u).ln() / (1.0 - p).ln()).ceil();
    (attempts.max(1.0) as u64).min(ATTEMPT_CAP)
}

const UNIQUE_FIND_RESTART_CAP: usize = 50;

/// Search for the unique marked vertex of a tree: binary search over
/// depth-truncated trees locates the target depth, then repeated path-state
/// sampling descends to the target. Returns the vertex id.
pub fn unique_find_in_tree(
    tree: &BacktrackTree,
    n: usize,
    config: &DetectionConfig,
    rng: &mut ChaCha12Rng,
    cache: &mut WalkCache,
) -> Result<(usize, SearchTranscript)> {
    config.validate()?;
    if config.verify_promise {
        let marked = tree.marked_ids();
        if marked.len() != 1 {
            return Err(Error::Promise(format!(
                "unique-target search requires exactly one marked vertex, found {}",
                marked.len()
            )));
        }
    }
    let mut searcher = TreeSearcher {
        tree,
        n,
        config,
        cache,
        transcript: SearchTranscript::default(),
    };
    if tree.root().marked {
        searcher.transcript.predicate_evaluations += 1;
        return Ok((0, searcher.transcript));
    }
    let t_bound = tree.len();
    let log_n = (n.max(2) as f64).log2().ceil() as u64 + 1;
    let delta_bs = config.delta / (3.0 * log_n as f64);
    let delta_acc = sampling_accuracy(n);
    let round_budget = 24 * (log_n as usize + 2);

    for _restart in 0..UNIQUE_FIND_RESTART_CAP {
        // locate the target depth by binary search on truncations
        let mut lo = 1usize;
        let mut hi = n;
        while lo < hi {
            let mid = lo + (hi - lo) / 2;
            let verdict = searcher.detect_subtree(0, Some(mid), t_bound, delta_bs, rng, true)?;
            match verdict {
                CachedDetect::RootMarked => unreachable!("root checked above"),
                CachedDetect::Verdict(DetectionVerdict::MarkedExists) => hi = mid,
                CachedDetect::Verdict(DetectionVerdict::NoMarked) => lo = mid + 1,
            }
        }
        let target_depth = lo;

        // descend by sampling path states on shrinking subtrees
        let mut current = 0usize;
        let mut remaining = target_depth;
        let mut rounds = 0usize;
        'sampling: while rounds < round_budget {
            rounds += 1;
            if remaining == 0 {
                break 'sampling;
            }
            let entry = searcher.cache.subtree(
                tree,
                current,
                Some(remaining),
                remaining,
                config.max_dim,
            )?;
            let decomp = match entry.decomp.as_ref() {
                Some(d) => d,
                None => break 'sampling,
            };
            let t_sub = entry.dim;
            let scaled = ((t_sub as f64) * (remaining as f64)).sqrt() / delta_acc.powi(3);
            let s = scaled.log2().ceil().max(1.0) as u32;
            let mut root = DVector::zeros(decomp.dim());
            root[0] = 1.0;
            let (p_accept, state) = match qpe_conditional_state(decomp, &root, s) {
                Ok(result) => result,
                Err(Error::Degenerate(_)) => break 'sampling,
                Err(e) => return Err(e),
            };
            let attempts = preparation_attempts(p_accept, rng);
            searcher.transcript.per_phase.sampling_rounds += 1;
            searcher.transcript.per_phase.sampling_attempts += attempts;
            let steps = attempts * steps_per_estimation(s);
            searcher.transcript.per_phase.sampling_steps += steps;
            searcher.transcript.walk_steps += steps;
            if attempts >= 10_000_000 {
                break 'sampling;
            }
            let sampled = sample_vertex(&state, rng);
            if sampled == 0 {
                // root outcome carries no information; discard and resample
                continue;
            }
            let original = entry.map[sampled];
            searcher.transcript.per_phase.verification_checks += 1;
            searcher.transcript.predicate_evaluations += 1;
            if tree.vertices[original].marked {
                return Ok((original, searcher.transcript));
            }
            current = original;
            remaining = target_depth - tree.vertices[original].depth;
        }
        // restart: sampling wandered off the path or the depth search failed
    }
    Err(Error::Resource(format!(
        "unique-target sampling exhausted {UNIQUE_FIND_RESTART_CAP} restarts"
    )))
}

/// Unique-solution search at the problem level.
pub fn unique_find<P: Predicate, H: Heuristic>(
    predicate: &P,
    heuristic: &H,
    config: &DetectionConfig,
    rng: &mut ChaCha12Rng,
) -> Result<(PartialAssignment, SearchTranscript)> {
    let mut transcript = SearchTranscript::default();
    let tree = materialize(predicate, heuristic, config, &mut transcript)?;
    let mut cache = WalkCache::new();
    let (id, inner) =
        unique_find_in_tree(&tree, predicate.variable_count(), config, rng, &mut cache)?;
    transcript.walk_steps += inner.walk_steps;
    transcript.predicate_evaluations += inner.predicate_evaluations;
    transcript.heuristic_evaluations += inner.heuristic_evaluations;
    transcript.per_phase = inner.per_phase;
    Ok((tree.vertices[id].assignment.clone(), transcript))
}

/// Outcome of constant calibration on a suite of trees.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CalibrationResult {
    pub beta: f64,
    pub gamma: f64,
    pub delta: f64,
    pub grid: Vec<f64>,
    pub suite_size: usize,
    /// Largest unmarked-tree acceptance at the chosen beta.
    pub unmarked_max_acceptance: f64,
    /// Smallest marked-tree acceptance at the chosen beta.
    pub marked_min_acceptance: f64,
}

/// Select the largest precision constant from [`BETA_GRID`] for which every
/// unmarked suite tree accepts with probability at most 1/4; the repetition
/// constant follows from the Hoeffding bound for the 3/8 threshold.
pub fn calibrate_constants(suite: &[SuiteTree], delta: f64) -> Result<CalibrationResult> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::Input(format!("delta {delta} must lie in (0, 1)")));
    }
    if suite.is_empty() {
        return Err(Error::Calibration("calibration suite is empty".into()));
    }
    struct Prepared<'a> {
        entry: &'a SuiteTree,
        decomp: EigenDecomposition,
    }
    let mut prepared = Vec::with_capacity(suite.len());
    for entry in suite {
        let walk = build_walk(&entry.tree, entry.n)?;
        let decomp = eigendecompose(&walk, DEFAULT_DENSE_DIM)?;
        prepared.push(Prepared { entry, decomp });
    }
    let probe = DetectionConfig::default();
    let acceptance = |p: &Prepared<'_>, beta: f64| -> Result<f64> {
        let config = DetectionConfig {
            beta,
            ..probe.clone()
        };
        let s = config.ancilla_count(p.entry.tree.len(), p.entry.n);
        let mut root = DVector::zeros(p.decomp.dim());
        root[0] = 1.0;
        qpe_accept_probability(&p.decomp, &root, s)
    };
    for &beta in BETA_GRID.iter() {
        let mut unmarked_max: f64 = 0.0;
        let mut marked_min: f64 = 1.0;
        let mut ok = true;
        for p in &prepared {
            let a = acceptance(p, beta)?;
            if p.entry.is_marked() {
                marked_min = marked_min.min(a);
            } else {
                unmarked_max = unmarked_max.max(a);
                if a > 0.25 {
                    ok = false;
                    break;
                }
            }
        }
        if ok {
            return Ok(CalibrationResult {
                beta,
                gamma: DEFAULT_GAMMA,
                delta,
                grid: BETA_GRID.to_vec(),
                suite_size: suite.len(),
                unmarked_max_acceptance: unmarked_max,
                marked_min_acceptance: marked_min,
            });
        }
    }
    let worst = prepared
        .iter()
        .filter(|p| !p.entry.is_marked())
        .map(|p| {
            (
                p.entry.description.clone(),
                acceptance(p, BETA_GRID[BETA_GRID.len() - 1]),
            )
        })
        .max_by(|a, b| {
            let av = a.1.as_ref().cloned().unwrap_or(0.0);
            let bv = b.1.as_ref().cloned().unwrap_or(0.0);
            av.partial_cmp(&bv).unwrap()
        });
    Err(Error::Calibration(format!(
        "no grid beta keeps every unmarked tree below 1/4; worst offender: {:?}",
        worst.map(|(d, a)| (d, a.unwrap_or(f64::NAN)))
    )))
}
