//! Explicit statevector simulation of the phase-estimation circuit on the
//! joint (vertex register) x (ancilla register) space.
//!
//! This is an independent reference for the analytic acceptance model: it
//! applies controlled powers of the dense step operator followed by an
//! inverse Fourier transform on the ancillas, without touching the
//! eigendecomposition path.

use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

/// Outcome of the circuit run: probability of the all-zeros ancilla outcome
/// and the post-selected vertex-register state.
pub struct CircuitOutcome {
    pub accept_probability: f64,
    pub conditional_state: DVector<Complex64>,
}

/// Simulate phase estimation with `s` ancilla qubits applied to `step` on
/// `input`. The joint state has dimension `dim * 2^s`.
pub fn qpe_circuit(step: &DMatrix<f64>, input: &DVector<f64>, s: u32) -> Result<CircuitOutcome> {
    let dim = step.nrows();
    if step.ncols() != dim || input.len() != dim {
        return Err(Error::Input(
            "step operator and input dimensions disagree".into(),
        ));
    }
    if (input.norm() - 1.0).abs() > 1e-9 {
        return Err(Error::Input("circuit input must be normalized".into()));
    }
    if s == 0 || s > 20 {
        return Err(Error::Input(format!(
            "ancilla count s={s} out of range 1..=20"
        )));
    }
    let count = 1usize << s;

    // Hadamards on the ancillas: every ancilla basis state j holds input/sqrt(N).
    let scale = 1.0 / (count as f64).sqrt();
    let mut columns: Vec<DVector<Complex64>> =
        vec![input.map(|x| Complex64::new(x * scale, 0.0)); count];

    // Controlled powers: ancilla bit a applies step^(2^a), so column j ends
    // up holding step^j input / sqrt(N).
    let mut power = step.clone();
    for a in 0..s {
        for (j, column) in columns.iter_mut().enumerate() {
            if (j >> a) & 1 == 1 {
                *column = apply_real(&power, column);
            }
        }
        if a + 1 < s {
            power = &power * &power;
        }
    }

    // Inverse Fourier transform on the ancilla register; only the all-zeros
    // component is post-selected but all components are produced.
    let mut accept = 0.0;
    let mut conditional = DVector::<Complex64>::zeros(dim);
    let mut total = 0.0;
    for l in 0..count {
        let mut out = DVector::<Complex64>::zeros(dim);
        for (j, column) in columns.iter().enumerate() {
            let angle = -2.0 * std::f64::consts::PI * (j as f64) * (l as f64) / count as f64;
            let phase = Complex64::from_polar(scale, angle);
            out.axpy(phase, column, Complex64::new(1.0, 0.0));
        }
        let weight = out.norm_squared();
        total += weight;
        if l == 0 {
            accept = weight;
            conditional = out;
        }
    }
    debug_assert!((total - 1.0).abs() < 1e-9, "circuit lost norm: {total}");
    if accept > 0.0 {
        conditional /= Complex64::new(accept.sqrt(), 0.0);
    }
    Ok(CircuitOutcome {
        accept_probability: accept,
        conditional_state: conditional,
    })
}

fn apply_real(m: &DMatrix<f64>, v: &DVector<Complex64>) -> DVector<Complex64> {
    let dim = v.len();
    let mut out = DVector::<Complex64>::zeros(dim);
    for row in 0..dim {
        let mut acc = Complex64::new(0.0, 0.0);
        for col in 0..dim {
            acc += m[(row, col)] * v[col];
        }
        out[row] = acc;
    }
    out
}
