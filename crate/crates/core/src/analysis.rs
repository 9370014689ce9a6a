//! Tree-size expectations for the random k-SAT model, exponent bounds,
//! heavy-tailed clause-count distributions and the paired average-case
//! experiment comparing classical tree size against quantum walk steps.

use crate::backtrack::{build_tree, BuildOptions};
use crate::csp::{KSatInstance, NaiveHeuristic, RngSpec};
use crate::error::{Error, Result};
use crate::search::{detect, DetectionConfig};
use serde::{Deserialize, Serialize};

fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let mut acc = 1.0f64;
    for i in 0..k {
        acc *= (n - i) as f64 / (i + 1) as f64;
    }
    acc
}

/// `log2` of the expected number of consistent assignments at level `l`:
/// `l + m log2(1 - C(l,k) / (2^k C(n,k)))`.
pub fn log2_level_expectation(n: usize, k: usize, m: usize, l: usize) -> f64 {
    let q = binomial(l, k) / (2f64.powi(k as i32) * binomial(n, k));
    l as f64 + m as f64 * (1.0 - q).log2()
}

fn log2_sum_exp2(terms: &[f64]) -> f64 {
    let max = terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    max + terms.iter().map(|t| (t - max).exp2()).sum::<f64>().log2()
}

/// Expected-size model of the backtracking tree for random k-SAT.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TreeSizeModel {
    pub n: usize,
    pub k: usize,
    pub m: usize,
    pub alpha: f64,
    /// Per-level `log2` expectations, index 0 = root level.
    pub log2_terms: Vec<f64>,
    /// Exact expected vertex count (may overflow to infinity; the log2 field
    /// stays finite).
    pub expected_vertices: f64,
    pub log2_expected_vertices: f64,
    pub expected_solutions: f64,
    /// Upper exponent: expected size is at most `(n+1) 2^(C n)`.
    pub exponent_upper: f64,
    /// Lower exponent: expected size is at least `2^(C' n)`.
    pub exponent_lower: f64,
    /// Whether `alpha` lies in the analyzed range `1 <= alpha <= n^(k-1)`.
    pub alpha_in_range: bool,
}

/// Evaluate the exact expected tree size `sum_l 2^l (1 - C(l,k)/(2^k C(n,k)))^m`
/// in the log domain.
pub fn expected_tree_size(n: usize, k: usize, m: usize) -> Result<TreeSizeModel> {
    if k == 0 || k > n {
        return Err(Error::Input(format!(
            "clause width k={k} out of range 1..={n}"
        )));
    }
    let alpha = m as f64 / n as f64;
    let log2_terms: Vec<f64> = (0..=n)
        .map(|l| log2_level_expectation(n, k, m, l))
        .collect();
    let log2_total = log2_sum_exp2(&log2_terms);
    let (c_upper, c_lower) = exponent_bounds(k, alpha.max(f64::MIN_POSITIVE));
    Ok(TreeSizeModel {
        n,
        k,
        m,
        alpha,
        expected_vertices: log2_total.exp2(),
        log2_expected_vertices: log2_total,
        expected_solutions: crate::csp::expected_solution_count(n, k, m),
        exponent_upper: c_upper,
        exponent_lower: c_lower,
        log2_terms,
        alpha_in_range: alpha >= 1.0 && alpha <= (n as f64).powi(k as i32 - 1),
    })
}

/// Closed-form exponent bounds `(C, C')` for clause density `alpha`:
/// with `b = (2^k ln2 / (alpha k))^(1/(k-1))`,
/// `C = b (1 - 1/k)` and `C' = b (1 - 1/k - ln2 b / (alpha k^2))`.
pub fn exponent_bounds(k: usize, alpha: f64) -> (f64, f64) {
    let ln2 = std::f64::consts::LN_2;
    let base = (2f64.powi(k as i32) * ln2 / (alpha * k as f64)).powf(1.0 / (k as f64 - 1.0));
    let c = base * (1.0 - 1.0 / k as f64);
    let c_lower = base * (1.0 - 1.0 / k as f64 - ln2 * base / (alpha * (k * k) as f64));
    (c, c_lower)
}

/// Distribution over clause counts with weight `2^(-c n^(3/2) / sqrt(m))` on
/// integers `16 n / ln2 < m <= n^3`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RuntimeDistribution {
    pub n: usize,
    pub exponent_constant: f64,
    pub m_min: usize,
    pub m_max: usize,
    pub probabilities: Vec<f64>,
}

pub const HEAVY_TAIL_EXPONENT: f64 = 0.454;

/// Build the normalized heavy-tail clause-count distribution for `n`
/// variables.
pub fn heavy_tail_distribution(n: usize, c: f64) -> Result<RuntimeDistribution> {
    if n < 4 {
        return Err(Error::Input(format!(
            "n={n} is too small for the supported range"
        )));
    }
    let cutoff = 16.0 * n as f64 / std::f64::consts::LN_2;
    let m_min = cutoff.floor() as usize + 1;
    let m_max = n * n * n;
    if m_min > m_max {
        return Err(Error::Input(format!(
            "empty support: cutoff {cutoff:.1} exceeds n^3 = {m_max}"
        )));
    }
    let scale = c * (n as f64).powf(1.5);
    let mut weights: Vec<f64> = (m_min..=m_max)
        .map(|m| (-scale / (m as f64).sqrt()).exp2())
        .collect();
    let total: f64 = weights.iter().sum();
    for w in &mut weights {
        *w /= total;
    }
    Ok(RuntimeDistribution {
        n,
        exponent_constant: c,
        m_min,
        m_max,
        probabilities: weights,
    })
}

impl RuntimeDistribution {
    pub fn support(&self) -> std::ops::RangeInclusive<usize> {
        self.m_min..=self.m_max
    }

    /// Draw a clause count.
    pub fn sample<R: rand::Rng>(&self, rng: &mut R) -> usize {
        let mut u: f64 = rng.random();
        for (i, &p) in self.probabilities.iter().enumerate() {
            u -= p;
            if u <= 0.0 {
                return self.m_min + i;
            }
        }
        self.m_max
    }
}

/// One paired trial of the average-case experiment.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TrialRow {
    pub n: usize,
    pub m: usize,
    pub seed: u64,
    /// Classical cost: vertices in the backtracking tree.
    pub tree_vertices: usize,
    /// Quantum cost: exact walk steps of the detection run at the tree's size.
    pub walk_steps: u64,
    pub satisfiable: bool,
    pub solutions: usize,
}

/// Per-`n` aggregates of the experiment.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NSummary {
    pub n: usize,
    pub samples: usize,
    pub classical_mean: f64,
    pub classical_se: f64,
    pub quantum_mean: f64,
    pub quantum_se: f64,
    /// `classical_mean / quantum_mean`.
    pub ratio: f64,
}

/// Full experiment output: paired rows plus per-`n` summaries.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SeparationReport {
    pub rows: Vec<TrialRow>,
    pub summary: Vec<NSummary>,
    /// Largest observed `walk_steps / sqrt(T n)` over all rows.
    pub fitted_step_constant: f64,
}

impl SeparationReport {
    /// Whether the classical/quantum ratio strictly increases along `summary`.
    pub fn ratios_strictly_increasing(&self) -> bool {
        self.summary.windows(2).all(|w| w[1].ratio > w[0].ratio)
    }

    /// CSV rendering of the rows.
    pub fn rows_csv(&self) -> String {
        let mut out = String::from("n,m,seed,T,walk_steps,satisfiable,solutions\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                r.n, r.m, r.seed, r.tree_vertices, r.walk_steps, r.satisfiable, r.solutions
            ));
        }
        out
    }
}

/// Sample mean and standard error.
pub fn mean_and_standard_error(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (0.0, 0.0);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Run the paired average-case experiment: for each `n`, draw clause counts
/// from the heavy-tail distribution, build the tree (classical cost) and run
/// detection at the materialized size bound (quantum cost) on the same
/// instance stream.
pub fn separation_experiment(
    n_values: &[usize],
    samples: usize,
    config: &DetectionConfig,
    rng_spec: &RngSpec,
) -> Result<SeparationReport> {
    let mut rows = Vec::new();
    let mut summary = Vec::new();
    let mut fitted = 0.0f64;
    for (ni, &n) in n_values.iter().enumerate() {
        let dist = heavy_tail_distribution(n, HEAVY_TAIL_EXPONENT)?;
        let mut classical = Vec::with_capacity(samples);
        let mut quantum = Vec::with_capacity(samples);
        for trial in 0..samples {
            let salt = (ni as u64) * 1_000_000 + trial as u64;
            let mut rng = rng_spec.stream(salt)?;
            let m = dist.sample(&mut rng);
            let clauses: Vec<Vec<i32>> = (0..m)
                .map(|_| crate::csp::random_clause(n, 3, &mut rng))
                .collect();
            let instance = KSatInstance::new(n, 3, clauses)?;
            let options = BuildOptions {
                depth_limit: None,
                vertex_cap: config.vertex_cap,
            };
            let tree = build_tree(&instance, &NaiveHeuristic, &options)?;
            let (_, transcript) = detect(&tree, n, tree.len(), config, &mut rng)?;
            let row = TrialRow {
                n,
                m,
                seed: salt,
                tree_vertices: tree.len(),
                walk_steps: transcript.walk_steps,
                satisfiable: tree.has_marked(),
                solutions: tree.marked_ids().len(),
            };
            fitted = fitted.max(row.walk_steps as f64 / ((row.tree_vertices * n) as f64).sqrt());
            classical.push(row.tree_vertices as f64);
            quantum.push(row.walk_steps as f64);
            rows.push(row);
        }
        if samples > 0 {
            let (c_mean, c_se) = mean_and_standard_error(&classical);
            let (q_mean, q_se) = mean_and_standard_error(&quantum);
            summary.push(NSummary {
                n,
                samples,
                classical_mean: c_mean,
                classical_se: c_se,
                quantum_mean: q_mean,
                quantum_se: q_se,
                ratio: c_mean / q_mean,
            });
        }
    }
    Ok(SeparationReport {
        rows,
        summary,
        fitted_step_constant: fitted,
    })
}
