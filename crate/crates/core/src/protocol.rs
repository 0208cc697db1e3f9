//! Piecewise-constant periodic driving protocols and their exact Fourier
//! components.
//!
//! The period is normalized to 1 internally; only step fractions matter for
//! the Fourier data, the driving frequency enters downstream.

use num_complex::Complex64;
use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::operator::{ComplexMatrix, HermitianOperator};

pub const ZERO_SUM_TOL: f64 = 1e-12;

/// Ordered sequence of potentials covering one period: step `r` occupies the
/// fraction interval [f_{r-1}, f_r]. Zero-width steps are legal and
/// contribute nothing.
#[derive(Debug, Clone)]
pub struct StepProtocol {
    potentials: Vec<HermitianOperator>,
    fractions: Vec<f64>,
}

impl StepProtocol {
    pub fn new(potentials: Vec<HermitianOperator>, fractions: Vec<f64>) -> Result<Self> {
        if fractions.len() != potentials.len() + 1 {
            return Err(Error::BadFractions(format!(
                "{} fractions for {} steps",
                fractions.len(),
                potentials.len()
            )));
        }
        if potentials.is_empty() {
            return Err(Error::BadFractions("no steps".into()));
        }
        if fractions[0] != 0.0 || *fractions.last().unwrap() != 1.0 {
            return Err(Error::BadFractions(
                "fractions must start at 0 and end at 1".into(),
            ));
        }
        if fractions.windows(2).any(|w| !(w[1] >= w[0])) {
            return Err(Error::BadFractions("fractions must be non-decreasing".into()));
        }
        let dim = potentials[0].dim();
        if potentials.iter().any(|p| p.dim() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: potentials.iter().map(|p| p.dim()).find(|d| *d != dim).unwrap(),
            });
        }
        Ok(Self {
            potentials,
            fractions,
        })
    }

    pub fn len(&self) -> usize {
        self.potentials.len()
    }

    pub fn is_empty(&self) -> bool {
        self.potentials.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.potentials[0].dim()
    }

    pub fn potentials(&self) -> &[HermitianOperator] {
        &self.potentials
    }

    pub fn fractions(&self) -> &[f64] {
        &self.fractions
    }

    /// Potential active at period fraction `x`, half-open step intervals
    /// [f_{r-1}, f_r). Zero-width steps are never selected.
    pub fn potential_at(&self, x: f64) -> Result<&HermitianOperator> {
        if !(0.0..1.0).contains(&x) {
            return Err(Error::PositionOutOfRange(x));
        }
        for r in 0..self.len() {
            let lo = self.fractions[r];
            let hi = self.fractions[r + 1];
            if hi > lo && x >= lo && x < hi {
                return Ok(&self.potentials[r]);
            }
        }
        // x < 1 and fractions end at 1, so the loop always returns.
        unreachable!("position {x} not covered by step intervals");
    }

    /// Fourier component V^(j) = ∫₀¹ V(x) e^{-i 2π j x} dx, exact per-step
    /// antiderivative. Satisfies V^(-j) = (V^(j))†.
    pub fn fourier_component(&self, j: i64) -> ComplexMatrix {
        let mut acc = ComplexMatrix::zeros(self.dim());
        if j == 0 {
            for r in 0..self.len() {
                let width = self.fractions[r + 1] - self.fractions[r];
                if width > 0.0 {
                    acc = acc
                        .add(&self.potentials[r].matrix().scale_re(width))
                        .expect("same dim");
                }
            }
            return acc;
        }
        let jw = TAU * j as f64;
        for r in 0..self.len() {
            let lo = self.fractions[r];
            let hi = self.fractions[r + 1];
            if hi <= lo {
                continue;
            }
            let phase_hi = Complex64::from_polar(1.0, -jw * hi);
            let phase_lo = Complex64::from_polar(1.0, -jw * lo);
            let coeff = (phase_hi - phase_lo) / Complex64::new(0.0, -jw);
            acc = acc
                .add(&self.potentials[r].matrix().scale(coeff))
                .expect("same dim");
        }
        acc
    }
}

/// Partition parameters α_1..α_{N-1} of the generalized N-step protocol,
/// each in [0, 1].
#[derive(Debug, Clone)]
pub struct PartitionParams {
    alphas: Vec<f64>,
}

impl PartitionParams {
    pub fn new(alphas: Vec<f64>) -> Result<Self> {
        for &a in &alphas {
            if !(0.0..=1.0).contains(&a) {
                return Err(Error::ParamOutOfRange {
                    name: "alpha_n",
                    value: a,
                });
            }
        }
        Ok(Self { alphas })
    }

    pub fn alphas(&self) -> &[f64] {
        &self.alphas
    }
}

/// Four-step protocol Π(α, β) with switch fractions (0, α/2, 1/2, (1+β)/2, 1).
pub fn four_step_protocol(
    alpha: f64,
    beta: f64,
    potentials: [HermitianOperator; 4],
) -> Result<StepProtocol> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::ParamOutOfRange {
            name: "alpha",
            value: alpha,
        });
    }
    if !(0.0..=1.0).contains(&beta) {
        return Err(Error::ParamOutOfRange {
            name: "beta",
            value: beta,
        });
    }
    let fractions = vec![0.0, alpha / 2.0, 0.5, (1.0 + beta) / 2.0, 1.0];
    StepProtocol::new(potentials.into(), fractions)
}

/// Recover (α, β) from a protocol built by [`four_step_protocol`].
pub fn four_step_params(p: &StepProtocol) -> Result<(f64, f64)> {
    let f = p.fractions();
    if p.len() != 4 || f[2] != 0.5 {
        return Err(Error::NotFourStep);
    }
    Ok((2.0 * f[1], 2.0 * f[3] - 1.0))
}

/// Switch fractions f_0..f_N from partition parameters.
///
/// Stored product form f_n = 1 - Π_{i<=n}(1 - α_i), algebraically identical
/// to the alternating inclusion-exclusion sum but free of its cancellation.
pub fn partition_fractions(params: &PartitionParams) -> Vec<f64> {
    let n = params.alphas.len();
    let mut fractions = Vec::with_capacity(n + 2);
    fractions.push(0.0);
    let mut survive = 1.0;
    for &a in &params.alphas {
        survive *= 1.0 - a;
        fractions.push((1.0 - survive).clamp(0.0, 1.0));
    }
    fractions.push(1.0);
    fractions
}

/// Generalized N-step protocol from N-1 partition parameters and N potentials.
pub fn generalized_protocol(
    params: &PartitionParams,
    potentials: Vec<HermitianOperator>,
) -> Result<StepProtocol> {
    if potentials.len() != params.alphas.len() + 1 {
        return Err(Error::LengthMismatch {
            expected: params.alphas.len() + 1,
            found: potentials.len(),
        });
    }
    StepProtocol::new(potentials, partition_fractions(params))
}

/// True iff Σ_r V_r vanishes within [`ZERO_SUM_TOL`] (max-entry magnitude).
pub fn zero_sum_check(potentials: &[HermitianOperator]) -> bool {
    if potentials.is_empty() {
        return true;
    }
    let mut acc = ComplexMatrix::zeros(potentials[0].dim());
    for p in potentials {
        match acc.add(p.matrix()) {
            Ok(sum) => acc = sum,
            Err(_) => return false,
        }
    }
    acc.max_abs() <= ZERO_SUM_TOL
}
