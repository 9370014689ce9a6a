//! Eigendecomposition of the walk step operator, projector norms onto
//! low-phase eigenspaces, and the analytic phase-estimation acceptance model.

use crate::backtrack::BacktrackTree;
use crate::error::{Error, Result};
use crate::walk::{phi_perp, xi_witness, WalkOperators};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

/// Default dimension limit for dense eigendecomposition.
pub const DEFAULT_DENSE_DIM: usize = 4096;

/// Phases below this magnitude are snapped to zero.
const PHASE_SNAP: f64 = 1e-12;
/// Residual tolerance for eigenpair reconstruction.
const RECONSTRUCTION_TOL: f64 = 1e-9;

/// Spectral decomposition of the walk step `R_B R_A`.
///
/// The operator is real orthogonal, so eigenvalues have the form
/// `exp(2 i theta)` with `theta` reduced to `(-pi/2, pi/2]`; boundary ties map
/// to `+pi/2`. Eigenvectors are orthonormal even inside degenerate
/// eigenspaces because they are read off the real Schur form.
#[derive(Clone, Debug)]
pub struct EigenDecomposition {
    dim: usize,
    phases: Vec<f64>,
    vectors: DMatrix<Complex64>,
}

/// Decompose the walk step operator of `walk`.
pub fn eigendecompose(walk: &WalkOperators, max_dim: usize) -> Result<EigenDecomposition> {
    let dim = walk.dim();
    if dim > max_dim {
        return Err(Error::Resource(format!(
            "dimension {dim} exceeds the dense threshold {max_dim}; \
             use matrix-free stepping instead"
        )));
    }
    let step = walk.dense_step();
    decompose_orthogonal(&step)
}

/// Decompose a real orthogonal matrix.
///
/// Nonsymmetric QR iterations can stall on orthogonal matrices (all
/// eigenvalues sit on the unit circle), so the decomposition goes through the
/// symmetric part `S = (U + U^T)/2`, whose eigenvalues are `cos(2 theta)` and
/// whose solver converges unconditionally. Within each `cos(2 theta)`
/// eigenspace the antisymmetric part `A = (U - U^T)/2` acts as a rotation by
/// `sin(2 theta)`, which pins down the complex eigenvectors exactly.
pub fn decompose_orthogonal(step: &DMatrix<f64>) -> Result<EigenDecomposition> {
    let dim = step.nrows();
    let symmetric = (step + step.transpose()) * 0.5;
    let antisymmetric = (step - step.transpose()) * 0.5;
    let eigen = nalgebra::linalg::SymmetricEigen::try_new(symmetric, f64::EPSILON, 0)
        .ok_or_else(|| Error::Input("symmetric eigeniteration did not converge".into()))?;

    // sort indices by eigenvalue so clusters are contiguous
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| {
        eigen.eigenvalues[a]
            .partial_cmp(&eigen.eigenvalues[b])
            .unwrap()
    });

    const CLUSTER_TOL: f64 = 1e-10;
    let mut phases = Vec::with_capacity(dim);
    let mut vectors = DMatrix::<Complex64>::zeros(dim, dim);
    let mut next_column = 0;

    let mut start = 0;
    while start < dim {
        let mut end = start + 1;
        let c0 = eigen.eigenvalues[order[start]];
        while end < dim && (eigen.eigenvalues[order[end]] - c0).abs() <= CLUSTER_TOL {
            end += 1;
        }
        let cluster: Vec<DVector<f64>> = order[start..end]
            .iter()
            .map(|&k| eigen.eigenvectors.column(k).into_owned())
            .collect();
        let c = (order[start..end]
            .iter()
            .map(|&k| eigen.eigenvalues[k])
            .sum::<f64>()
            / (end - start) as f64)
            .clamp(-1.0, 1.0);

        if c >= 1.0 - CLUSTER_TOL || c <= -1.0 + CLUSTER_TOL {
            let phase = if c > 0.0 {
                0.0
            } else {
                std::f64::consts::FRAC_PI_2
            };
            for v in &cluster {
                for row in 0..dim {
                    vectors[(row, next_column)] = Complex64::new(v[row], 0.0);
                }
                phases.push(phase);
                next_column += 1;
            }
        } else {
            let mut theta = 0.5 * c.acos();
            if theta < PHASE_SNAP {
                theta = 0.0;
            }
            let sin2t = (2.0 * theta).sin();
            let mut basis = cluster;
            while !basis.is_empty() {
                let x = basis.remove(0);
                let mut y = &antisymmetric * &x;
                y /= -sin2t;
                let y_norm = y.norm();
                if (y_norm - 1.0).abs() > 1e-6 {
                    return Err(Error::Input(format!(
                        "rotation pairing failed at cos(2 theta) = {c}: |y| = {y_norm}"
                    )));
                }
                y /= y_norm;
                let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
                for row in 0..dim {
                    vectors[(row, next_column)] = Complex64::new(x[row], y[row]) * inv_sqrt2;
                    vectors[(row, next_column + 1)] = Complex64::new(x[row], -y[row]) * inv_sqrt2;
                }
                phases.push(theta);
                phases.push(-theta);
                next_column += 2;
                // remove the consumed plane and re-orthonormalize the rest
                let mut reduced = Vec::with_capacity(basis.len().saturating_sub(1));
                for mut b in basis {
                    b -= &x * x.dot(&b);
                    b -= &y * y.dot(&b);
                    for kept in &reduced {
                        let kept: &DVector<f64> = kept;
                        b -= kept * kept.dot(&b);
                    }
                    let norm = b.norm();
                    if norm > 1e-6 {
                        reduced.push(b / norm);
                    }
                }
                basis = reduced;
            }
        }
        start = end;
    }
    if next_column != dim {
        return Err(Error::Input(format!(
            "eigenbasis is incomplete: {next_column} of {dim} vectors"
        )));
    }

    let decomp = EigenDecomposition {
        dim,
        phases,
        vectors,
    };
    decomp.check_reconstruction(step)?;
    Ok(decomp)
}

impl EigenDecomposition {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn phases(&self) -> &[f64] {
        &self.phases
    }

    fn check_reconstruction(&self, step: &DMatrix<f64>) -> Result<()> {
        // split the eigenbasis into real and imaginary parts so the products
        // go through optimized real gemm
        let re = DMatrix::from_fn(self.dim, self.dim, |i, j| self.vectors[(i, j)].re);
        let im = DMatrix::from_fn(self.dim, self.dim, |i, j| self.vectors[(i, j)].im);
        let step_re = step * &re;
        let step_im = step * &im;
        for k in 0..self.dim {
            let lambda = Complex64::from_polar(1.0, 2.0 * self.phases[k]);
            let mut worst = 0.0f64;
            for row in 0..self.dim {
                let got = Complex64::new(step_re[(row, k)], step_im[(row, k)]);
                worst += (got - lambda * self.vectors[(row, k)]).norm_sqr();
            }
            if worst.sqrt() > RECONSTRUCTION_TOL {
                return Err(Error::Input(format!(
                    "eigenpair {k} reconstruction residual {:.3e} exceeds {RECONSTRUCTION_TOL:.0e}",
                    worst.sqrt()
                )));
            }
        }
        Ok(())
    }

    /// Overlaps `<psi_k | v>` for a real vector `v`.
    pub fn overlaps(&self, v: &DVector<f64>) -> Vec<Complex64> {
        (0..self.dim)
            .map(|k| {
                let mut acc = Complex64::new(0.0, 0.0);
                for row in 0..self.dim {
                    acc += self.vectors[(row, k)].conj() * v[row];
                }
                acc
            })
            .collect()
    }

    /// Norm of the projection of `v` onto eigenvectors with `|theta| <= chi`.
    pub fn projector_norm(&self, v: &DVector<f64>, chi: f64) -> f64 {
        let overlaps = self.overlaps(v);
        overlaps
            .iter()
            .zip(&self.phases)
            .filter(|&(_, &theta)| theta.abs() <= chi)
            .map(|(l, _)| l.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// Reassemble a vector from eigenbasis amplitudes.
    pub fn synthesize(&self, amplitudes: &[Complex64]) -> DVector<Complex64> {
        let mut out = DVector::zeros(self.dim);
        for (k, &amplitude) in amplitudes.iter().enumerate() {
            if amplitude != Complex64::new(0.0, 0.0) {
                for row in 0..self.dim {
                    out[row] += amplitude * self.vectors[(row, k)];
                }
            }
        }
        out
    }

    /// CSV spectrum export: one `theta,weight` row per eigenvector, where the
    /// weight is the squared overlap with `v`.
    pub fn spectrum_csv(&self, v: &DVector<f64>) -> String {
        let overlaps = self.overlaps(v);
        let mut rows: Vec<(f64, f64)> = self
            .phases
            .iter()
            .zip(&overlaps)
            .map(|(&theta, l)| (theta, l.norm_sqr()))
            .collect();
        rows.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        let mut out = String::from("theta,weight\n");
        for (theta, w) in rows {
            out.push_str(&format!("{theta:.17e},{w:.17e}\n"));
        }
        out
    }
}

/// Coherent acceptance amplitude of phase estimation with `s` ancilla qubits
/// on an eigenvector of phase `theta`: the mean of the first `2^s` powers of
/// `exp(2 i theta)`. Its squared magnitude is
/// `sin^2(2^s theta) / (2^(2s) sin^2 theta)`, and exactly 1 at `theta = 0`.
pub fn mu_amplitude(theta: f64, s: u32) -> Complex64 {
    if theta == 0.0 {
        return Complex64::new(1.0, 0.0);
    }
    if theta == std::f64::consts::FRAC_PI_2 {
        // eigenvalue -1: an even number of powers averages to exactly zero
        return Complex64::new(0.0, 0.0);
    }
    let count = (1u64 << s) as f64;
    let magnitude = (count * theta).sin() / (count * theta.sin());
    Complex64::from_polar(magnitude, (count - 1.0) * theta)
}

/// Per-eigenvector acceptance amplitudes for a decomposition.
#[derive(Clone, Debug)]
pub struct PhaseEstimationModel {
    pub s: u32,
    pub mu: Vec<Complex64>,
}

impl PhaseEstimationModel {
    pub fn new(decomp: &EigenDecomposition, s: u32) -> Self {
        PhaseEstimationModel {
            s,
            mu: decomp
                .phases()
                .iter()
                .map(|&t| mu_amplitude(t, s))
                .collect(),
        }
    }
}

fn require_normalized(input: &DVector<f64>) -> Result<()> {
    if (input.norm() - 1.0).abs() > 1e-9 {
        return Err(Error::Input(format!(
            "input vector must be normalized, got norm {}",
            input.norm()
        )));
    }
    Ok(())
}

/// Exact probability of the all-zeros ancilla outcome when phase estimation
/// with `s` ancillas runs on `input`.
pub fn qpe_accept_probability(
    decomp: &EigenDecomposition,
    input: &DVector<f64>,
    s: u32,
) -> Result<f64> {
    require_normalized(input)?;
    let model = PhaseEstimationModel::new(decomp, s);
    let overlaps = decomp.overlaps(input);
    let p: f64 = overlaps
        .iter()
        .zip(&model.mu)
        .map(|(l, m)| l.norm_sqr() * m.norm_sqr())
        .sum();
    Ok(p.clamp(0.0, 1.0))
}

/// Exact post-selected state of the vertex register after the all-zeros
/// ancilla outcome, with its probability.
pub fn qpe_conditional_state(
    decomp: &EigenDecomposition,
    input: &DVector<f64>,
    s: u32,
) -> Result<(f64, DVector<Complex64>)> {
    require_normalized(input)?;
    let model = PhaseEstimationModel::new(decomp, s);
    let overlaps = decomp.overlaps(input);
    let amplitudes: Vec<Complex64> = overlaps.iter().zip(&model.mu).map(|(l, m)| l * m).collect();
    let p: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
    if p <= 1e-300 {
        return Err(Error::Degenerate(
            "acceptance probability is zero; no conditional state exists".into(),
        ));
    }
    let mut state = decomp.synthesize(&amplitudes);
    state /= Complex64::new(p.sqrt(), 0.0);
    Ok((p.clamp(0.0, 1.0), state))
}

/// Default grid of phase cutoffs for the effective-gap check.
pub const DEFAULT_CHI_GRID: [f64; 5] = [0.0, 1e-3, 1e-2, 1e-1, 1.0];
/// Absolute slack added to the effective-gap bound.
pub const GAP_TOLERANCE: f64 = 1e-8;

/// Outcome of the randomized effective-gap check.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GapReport {
    pub trials: usize,
    pub chi_values: Vec<f64>,
    pub violations: usize,
    /// Largest value of `|P_chi Pi_B psi| - chi |psi|` observed.
    pub worst_margin: f64,
}

/// Check `|P_chi Pi_B psi| <= chi |psi|` for random unit `psi` annihilated by
/// the `R_A` projector (sampled inside the -1 eigenspace of `R_A`).
pub fn verify_effective_gap(
    walk: &WalkOperators,
    trials: usize,
    rng: &mut ChaCha12Rng,
) -> Result<GapReport> {
    verify_effective_gap_with(walk, trials, &DEFAULT_CHI_GRID, rng)
}

pub fn verify_effective_gap_with(
    walk: &WalkOperators,
    trials: usize,
    chi_grid: &[f64],
    rng: &mut ChaCha12Rng,
) -> Result<GapReport> {
    let decomp = eigendecompose(walk, DEFAULT_DENSE_DIM)?;
    let mut report = GapReport {
        trials,
        chi_values: chi_grid.to_vec(),
        violations: 0,
        worst_margin: f64::NEG_INFINITY,
    };
    let dim = walk.dim();
    let mut done = 0;
    while done < trials {
        let z = DVector::from_fn(dim, |_, _| {
            <StandardNormal as Distribution<f64>>::sample(&StandardNormal, rng)
        });
        // project onto the -1 eigenspace of R_A: (I - R_A)/2
        let mut reflected = z.clone();
        walk.apply_r_a(&mut reflected);
        let mut psi = (&z - &reflected) * 0.5;
        if psi.norm() < 1e-9 {
            continue;
        }
        psi /= psi.norm();
        done += 1;
        let projected = walk.project_b(&psi);
        for &chi in chi_grid {
            let margin = decomp.projector_norm(&projected, chi) - chi;
            report.worst_margin = report.worst_margin.max(margin);
            if margin > GAP_TOLERANCE {
                report.violations += 1;
            }
        }
    }
    Ok(report)
}

/// Outcome of the low-phase overlap check for the orthogonal component of the
/// root state on a unique-target tree.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PerpBoundReport {
    pub epsilons: Vec<f64>,
    /// `|P_eps phi_perp| / (eps sqrt(T n))` per grid point.
    pub ratios: Vec<f64>,
    pub max_ratio: f64,
    pub witness_norm: f64,
    /// Largest value of `|P_eps phi_perp| - eps |xi|` observed; the witness
    /// bound holds when this stays below the gap tolerance.
    pub worst_witness_margin: f64,
}

/// Measure `|P_eps phi_perp|` against the `eps sqrt(T n)` envelope and the
/// witness-vector bound `eps |xi|`.
pub fn verify_phi_perp_bound(
    tree: &BacktrackTree,
    walk: &WalkOperators,
    marked_id: usize,
    epsilons: &[f64],
) -> Result<PerpBoundReport> {
    let decomp = eigendecompose(walk, DEFAULT_DENSE_DIM)?;
    let perp = phi_perp(tree, walk, marked_id)?.vector();
    let xi = xi_witness(tree, walk, marked_id)?.vector();
    let scale = ((tree.len() * walk.depth_parameter()) as f64).sqrt();
    let mut ratios = Vec::with_capacity(epsilons.len());
    let mut worst_witness = f64::NEG_INFINITY;
    for &eps in epsilons {
        if eps <= 0.0 {
            return Err(Error::Input("epsilon grid must be positive".into()));
        }
        let mass = decomp.projector_norm(&perp, eps);
        ratios.push(mass / (eps * scale));
        worst_witness = worst_witness.max(mass - eps * xi.norm());
    }
    let max_ratio = ratios.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    Ok(PerpBoundReport {
        epsilons: epsilons.to_vec(),
        ratios,
        max_ratio,
        witness_norm: xi.norm(),
        worst_witness_margin: worst_witness,
    })
}
