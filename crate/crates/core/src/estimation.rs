//! Per-segment loss, its exact gradient, and the gradient-descent fit.
//!
//! The loss is the normalized residual energy
//!
//! ```text
//! J(ω0, ωc, C) = 1/(2M) · ‖x − V(ω0, ωc)·C‖²
//! ```
//!
//! over one segment of `M` samples, with the time index running `0..M`
//! inside the segment. `J` is quadratic (hence convex) in the phasors at
//! fixed frequencies but not jointly convex.
//!
//! Phasor gradients follow the real-coordinate convention: the complex
//! gradient `g` has `Re g = ∂J/∂Re c` and `Im g = ∂J/∂Im c`, which works out
//! to `g_u = −(1/M) Σ r[n]·e^{−jω_u n}` with residual `r = x − V·C`.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::{frequency_grid, ComplexSignal, ComponentKey, ModelParams, ModelStructure};

/// Two frequencies closer than this (rad/sample) make the basis rank deficient.
pub const DUPLICATE_FREQUENCY_TOL: f64 = 1e-9;

/// Relative damping of the frequency curvature used to precondition steps.
const CURVATURE_DAMPING: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Simultaneous descent on ω0, ωc and every phasor.
    Joint,
    /// Phasors solved exactly by least squares each iteration; descent on
    /// the two frequencies only.
    #[default]
    Concentrated,
}

impl std::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "joint" => Ok(Mode::Joint),
            "concentrated" => Ok(Mode::Concentrated),
            other => Err(Error::config(
                "mode",
                format!("expected \"joint\" or \"concentrated\", got {other:?}"),
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimatorConfig {
    /// Learning rate.
    pub alpha: f64,
    pub max_iters: usize,
    pub mode: Mode,
    /// Early stop once one iteration changes the loss by less than this
    /// fraction, in either direction.
    pub rel_tol: f64,
    /// Scale frequency steps by their Gauss-Newton curvature: the full 2 × 2
    /// metric with phasors eliminated in concentrated mode, its diagonal
    /// with phasors held fixed in joint mode.
    pub freq_precondition: bool,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        Self {
            alpha: 0.1,
            max_iters: 350,
            mode: Mode::Concentrated,
            rel_tol: 1e-12,
            freq_precondition: true,
        }
    }
}

impl EstimatorConfig {
    pub fn concentrated() -> Self {
        Self {
            mode: Mode::Concentrated,
            ..Self::default()
        }
    }

    pub fn joint() -> Self {
        Self {
            mode: Mode::Joint,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha.is_finite() && self.alpha > 0.0) {
            return Err(Error::config("alpha", "must be finite and > 0"));
        }
        if self.max_iters == 0 {
            return Err(Error::config("max_iters", "must be >= 1"));
        }
        if !(self.rel_tol.is_finite() && self.rel_tol >= 0.0) {
            return Err(Error::config("rel_tol", "must be finite and >= 0"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradientVector {
    pub d_omega0: f64,
    pub d_omegac: f64,
    pub d_phasors: BTreeMap<ComponentKey, Complex64>,
}

impl GradientVector {
    /// Euclidean norm over all real coordinates.
    pub fn norm(&self) -> f64 {
        let phasors: f64 = self.d_phasors.values().map(|g| g.norm_sqr()).sum();
        (self.d_omega0.powi(2) + self.d_omegac.powi(2) + phasors).sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.d_omega0.is_finite()
            && self.d_omegac.is_finite()
            && self.d_phasors.values().all(|g| g.is_finite())
    }

    /// Real coordinates in the order ω0, ωc, then `(re, im)` per phasor.
    pub fn coordinates(&self) -> Vec<f64> {
        let mut v = vec![self.d_omega0, self.d_omegac];
        for g in self.d_phasors.values() {
            v.push(g.re);
            v.push(g.im);
        }
        v
    }

    /// Largest coordinate-wise relative error `|a − b| / max(|a|, |b|, floor)`.
    pub fn max_relative_error(&self, other: &GradientVector, floor: f64) -> f64 {
        self.coordinates()
            .into_iter()
            .zip(other.coordinates())
            .map(|(a, b)| (a - b).abs() / a.abs().max(b.abs()).max(floor))
            .fold(0.0, f64::max)
    }

    /// `params − step·self`, a raw (unpreconditioned) descent step.
    pub fn descend(&self, params: &ModelParams, step: f64) -> ModelParams {
        ModelParams::new(
            params.omega0 - step * self.d_omega0,
            params.omegac - step * self.d_omegac,
            params
                .phasors
                .iter()
                .map(|(k, c)| (*k, c - step * self.d_phasors[k]))
                .collect(),
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimationTrace {
    /// Loss at the starting point, before any update.
    pub initial_loss: f64,
    /// Loss after each completed iteration.
    pub loss_history: Vec<f64>,
    pub final_params: ModelParams,
    pub iterations_run: usize,
    pub converged_early: bool,
}

impl EstimationTrace {
    pub fn final_loss(&self) -> f64 {
        self.loss_history
            .last()
            .copied()
            .unwrap_or(self.initial_loss)
    }
}

/// Sampled carriers and residual at one parameter point.
struct Evaluation {
    keys: Vec<ComponentKey>,
    /// One column per component, `e^{jω n}` for `n = 0..M`.
    basis: Vec<Vec<Complex64>>,
    residual: Vec<Complex64>,
    loss: f64,
}

fn check_sizes(segment: &ComplexSignal, structure: &ModelStructure) -> Result<()> {
    let components = structure.component_count();
    if segment.len() < components {
        return Err(Error::Underdetermined {
            components,
            samples: segment.len(),
        });
    }
    Ok(())
}

fn carriers(grid: &[(ComponentKey, f64)], m: usize) -> Vec<Vec<Complex64>> {
    grid.iter()
        .map(|(_, w)| (0..m).map(|n| Complex64::cis(w * n as f64)).collect())
        .collect()
}

fn residual_of(
    segment: &ComplexSignal,
    basis: &[Vec<Complex64>],
    phasors: &[Complex64],
) -> (Vec<Complex64>, f64) {
    let mut residual = segment.samples().to_vec();
    for (column, c) in basis.iter().zip(phasors) {
        for (r, e) in residual.iter_mut().zip(column) {
            *r -= c * e;
        }
    }
    let m = residual.len() as f64;
    let loss = residual.iter().map(|r| r.norm_sqr()).sum::<f64>() / (2.0 * m);
    (residual, loss)
}

fn evaluate(
    segment: &ComplexSignal,
    params: &ModelParams,
    structure: &ModelStructure,
) -> Result<Evaluation> {
    check_sizes(segment, structure)?;
    params.check_shape(structure)?;
    let grid = frequency_grid(params, structure)?;
    let basis = carriers(&grid, segment.len());
    let (residual, loss) = residual_of(segment, &basis, &params.ordered_phasors());
    Ok(Evaluation {
        keys: grid.into_iter().map(|(k, _)| k).collect(),
        basis,
        residual,
        loss,
    })
}

fn gradient_at(eval: &Evaluation, params: &ModelParams) -> GradientVector {
    let m = eval.residual.len() as f64;
    let mut d_omega0 = 0.0;
    let mut d_omegac = 0.0;
    let mut d_phasors = BTreeMap::new();
    for (key, column) in eval.keys.iter().zip(&eval.basis) {
        // s = Σ r·conj(e),  t = Σ n·conj(r)·e
        let mut s = Complex64::new(0.0, 0.0);
        let mut t = Complex64::new(0.0, 0.0);
        for (n, (r, e)) in eval.residual.iter().zip(column).enumerate() {
            s += r * e.conj();
            t += n as f64 * r.conj() * e;
        }
        d_phasors.insert(*key, -s / m);
        let d_omega = (params.phasors[key] * t).im / m;
        d_omega0 += key.omega0_factor() * d_omega;
        d_omegac += key.omegac_factor() * d_omega;
    }
    GradientVector {
        d_omega0,
        d_omegac,
        d_phasors,
    }
}

/// `1/(2M)·‖x − V·C‖²` for one segment.
pub fn loss(
    segment: &ComplexSignal,
    params: &ModelParams,
    structure: &ModelStructure,
) -> Result<f64> {
    Ok(evaluate(segment, params, structure)?.loss)
}

/// Exact gradient of [`loss`] with respect to ω0, ωc and every phasor.
pub fn gradient(
    segment: &ComplexSignal,
    params: &ModelParams,
    structure: &ModelStructure,
) -> Result<GradientVector> {
    let eval = evaluate(segment, params, structure)?;
    Ok(gradient_at(&eval, params))
}

fn check_distinct(grid: &[(ComponentKey, f64)]) -> Result<()> {
    for (i, (ka, wa)) in grid.iter().enumerate() {
        for (kb, wb) in &grid[i + 1..] {
            if (wa - wb).abs() < DUPLICATE_FREQUENCY_TOL {
                return Err(Error::RankDeficient(format!(
                    "{ka} and {kb} share frequency {wa} rad/sample"
                )));
            }
        }
    }
    Ok(())
}

/// Least-squares phasors, and an orthonormal basis of the model columns.
fn least_squares(
    segment: &ComplexSignal,
    basis: &[Vec<Complex64>],
) -> Result<(Vec<Complex64>, DMatrix<Complex64>)> {
    let m = segment.len();
    let l = basis.len();
    let v = DMatrix::from_fn(m, l, |n, u| basis[u][n]);
    let x = DVector::from_column_slice(segment.samples());
    let qr = v.qr();
    let r = qr.r();
    let max_diag = (0..l).map(|i| r[(i, i)].norm()).fold(0.0, f64::max);
    if (0..l).any(|i| r[(i, i)].norm() <= 1e-13 * max_diag.max(f64::MIN_POSITIVE)) {
        return Err(Error::RankDeficient(
            "model columns are numerically dependent".into(),
        ));
    }
    let q = qr.q();
    let rhs = q.adjoint() * x;
    let c = r
        .solve_upper_triangular(&rhs)
        .ok_or_else(|| Error::RankDeficient("singular triangular factor".into()))?;
    Ok((c.iter().copied().collect(), q))
}

/// Phasors minimizing the loss at fixed `(ω0, ωc)`.
pub fn solve_phasors_ls(
    segment: &ComplexSignal,
    omega0: f64,
    omegac: f64,
    structure: &ModelStructure,
) -> Result<BTreeMap<ComponentKey, Complex64>> {
    check_sizes(segment, structure)?;
    let probe = ModelParams::zeros(omega0, omegac, structure);
    let grid = frequency_grid(&probe, structure)?;
    check_distinct(&grid)?;
    let basis = carriers(&grid, segment.len());
    let (c, _) = least_squares(segment, &basis)?;
    Ok(grid.into_iter().map(|(k, _)| k).zip(c).collect())
}

/// Loss with the phasors eliminated, i.e. evaluated at [`solve_phasors_ls`].
pub fn concentrated_loss(
    segment: &ComplexSignal,
    omega0: f64,
    omegac: f64,
    structure: &ModelStructure,
) -> Result<f64> {
    let phasors = solve_phasors_ls(segment, omega0, omegac, structure)?;
    loss(
        segment,
        &ModelParams::new(omega0, omegac, phasors),
        structure,
    )
}

/// Per-coordinate step sizes for [`fd_gradient`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FdSteps {
    pub frequency: f64,
    pub phasor: f64,
}

impl Default for FdSteps {
    fn default() -> Self {
        Self {
            frequency: 1e-6,
            phasor: 1e-7,
        }
    }
}

impl From<f64> for FdSteps {
    fn from(step: f64) -> Self {
        Self {
            frequency: step,
            phasor: step,
        }
    }
}

/// Central finite-difference gradient of [`loss`].
pub fn fd_gradient(
    segment: &ComplexSignal,
    params: &ModelParams,
    structure: &ModelStructure,
    steps: impl Into<FdSteps>,
) -> Result<GradientVector> {
    let steps = steps.into();
    let central = |plus: ModelParams, minus: ModelParams, h: f64| -> Result<f64> {
        Ok((loss(segment, &plus, structure)? - loss(segment, &minus, structure)?) / (2.0 * h))
    };
    let shifted = |d0: f64, dc: f64| {
        ModelParams::new(
            params.omega0 + d0,
            params.omegac + dc,
            params.phasors.clone(),
        )
    };
    let hf = steps.frequency;
    let d_omega0 = central(shifted(hf, 0.0), shifted(-hf, 0.0), hf)?;
    let d_omegac = central(shifted(0.0, hf), shifted(0.0, -hf), hf)?;

    let hp = steps.phasor;
    let mut d_phasors = BTreeMap::new();
    for key in params.phasors.keys() {
        let nudged = |delta: Complex64| {
            let mut p = params.clone();
            *p.phasors.get_mut(key).expect("key from same map") += delta;
            p
        };
        let re = central(
            nudged(Complex64::new(hp, 0.0)),
            nudged(Complex64::new(-hp, 0.0)),
            hp,
        )?;
        let im = central(
            nudged(Complex64::new(0.0, hp)),
            nudged(Complex64::new(0.0, -hp)),
            hp,
        )?;
        d_phasors.insert(*key, Complex64::new(re, im));
    }
    Ok(GradientVector {
        d_omega0,
        d_omegac,
        d_phasors,
    })
}

/// Diagonal Gauss-Newton curvature of `(ω0, ωc)` with the phasors held
/// fixed: the time moment of the carriers times the amplitude-weighted
/// chain-rule factors.
fn frequency_curvature(params: &ModelParams, m: usize) -> (f64, f64) {
    let mf = m as f64;
    let moment = (mf - 1.0) * (2.0 * mf - 1.0) / 6.0;
    let energy: f64 = params.phasors.values().map(|c| c.norm_sqr()).sum();
    let damping = CURVATURE_DAMPING * energy;
    let mut w0 = damping;
    let mut wc = damping;
    for (key, c) in &params.phasors {
        w0 += key.omega0_factor().powi(2) * c.norm_sqr();
        wc += key.omegac_factor().powi(2) * c.norm_sqr();
    }
    (moment * w0, moment * wc)
}

/// Gauss-Newton metric of `(ω0, ωc)` with the phasors eliminated,
/// `Re(Dᴴ P D)/M`, where the columns of `D` are the derivatives of the model
/// with respect to each frequency and `P` projects out the carriers spanned
/// by `q`.
fn projected_metric(
    eval: &Evaluation,
    params: &ModelParams,
    q: &DMatrix<Complex64>,
) -> [[f64; 2]; 2] {
    let m = eval.residual.len();
    let mut d = DMatrix::<Complex64>::zeros(m, 2);
    for (key, column) in eval.keys.iter().zip(&eval.basis) {
        let c = params.phasors[key] * Complex64::i();
        let (f0, fc) = (key.omega0_factor(), key.omegac_factor());
        for (n, e) in column.iter().enumerate() {
            let dy = c * e * n as f64;
            d[(n, 0)] += dy * f0;
            d[(n, 1)] += dy * fc;
        }
    }
    let projected = &d - q * (q.adjoint() * &d);
    let h = projected.adjoint() * projected;
    let mf = m as f64;
    [
        [h[(0, 0)].re / mf, h[(0, 1)].re / mf],
        [h[(1, 0)].re / mf, h[(1, 1)].re / mf],
    ]
}

fn scaled_step(grad: f64, curvature: f64) -> f64 {
    if curvature > 0.0 {
        grad / curvature
    } else {
        0.0
    }
}

/// Solves the damped 2 × 2 system `H·δ = g`. A zero diagonal entry (no
/// interharmonics, or no energy on them) leaves that frequency in place.
fn metric_step(h: [[f64; 2]; 2], g0: f64, gc: f64) -> (f64, f64) {
    let a = h[0][0] * (1.0 + CURVATURE_DAMPING);
    let d = h[1][1] * (1.0 + CURVATURE_DAMPING);
    let b = h[0][1];
    let det = a * d - b * b;
    if a > 0.0 && d > 0.0 && det > 0.0 {
        ((d * g0 - b * gc) / det, (a * gc - b * g0) / det)
    } else {
        (scaled_step(g0, a), scaled_step(gc, d))
    }
}

fn diverged(iteration: usize, reason: impl Into<String>) -> Error {
    Error::Divergence {
        iteration,
        reason: reason.into(),
    }
}

/// Gradient descent on one segment from `init`.
pub fn fit_segment(
    segment: &ComplexSignal,
    init: &ModelParams,
    structure: &ModelStructure,
    config: &EstimatorConfig,
) -> Result<EstimationTrace> {
    config.validate()?;
    init.validate(structure)?;
    let m = segment.len();

    let mut params = init.clone();
    let mut eval = evaluate(segment, &params, structure)?;
    let initial_loss = eval.loss;
    // orthonormal carrier basis at the current frequencies, concentrated mode only
    let mut carrier_q = None;
    if config.mode == Mode::Concentrated {
        check_distinct(&frequency_grid(&params, structure)?)?;
        let (c, q) = least_squares(segment, &eval.basis)?;
        carrier_q = Some(q);
        params.phasors = eval.keys.iter().copied().zip(c.iter().copied()).collect();
        let (residual, loss) = residual_of(segment, &eval.basis, &c);
        eval.residual = residual;
        eval.loss = loss;
    }

    let mut history = Vec::with_capacity(config.max_iters);
    let mut prev = initial_loss;
    let mut converged_early = false;

    for iteration in 1..=config.max_iters {
        let grad = gradient_at(&eval, &params);
        if !grad.is_finite() {
            return Err(diverged(iteration, "non-finite gradient"));
        }

        let (step0, stepc) = match (&carrier_q, config.freq_precondition) {
            (_, false) => (grad.d_omega0, grad.d_omegac),
            (Some(q), true) => metric_step(
                projected_metric(&eval, &params, q),
                grad.d_omega0,
                grad.d_omegac,
            ),
            (None, true) => {
                let (p0, pc) = frequency_curvature(&params, m);
                (
                    scaled_step(grad.d_omega0, p0),
                    scaled_step(grad.d_omegac, pc),
                )
            }
        };
        params.omega0 -= config.alpha * step0;
        params.omegac -= config.alpha * stepc;

        if config.mode == Mode::Joint {
            for (key, c) in params.phasors.iter_mut() {
                *c -= config.alpha * grad.d_phasors[key];
            }
        }

        let grid =
            frequency_grid(&params, structure).map_err(|e| diverged(iteration, e.to_string()))?;
        let basis = carriers(&grid, m);
        let phasors = if config.mode == Mode::Concentrated {
            check_distinct(&grid).map_err(|e| diverged(iteration, e.to_string()))?;
            let (c, q) =
                least_squares(segment, &basis).map_err(|e| diverged(iteration, e.to_string()))?;
            carrier_q = Some(q);
            params.phasors = eval.keys.iter().copied().zip(c.iter().copied()).collect();
            c
        } else {
            params.ordered_phasors()
        };
        let (residual, current) = residual_of(segment, &basis, &phasors);
        if !current.is_finite() {
            return Err(diverged(iteration, "non-finite loss"));
        }
        eval.basis = basis;
        eval.residual = residual;
        eval.loss = current;
        history.push(current);

        let decrease = (prev - current) / prev.max(1e-30);
        if decrease.abs() < config.rel_tol || current == 0.0 {
            converged_early = iteration < config.max_iters;
            break;
        }
        prev = current;
    }

    Ok(EstimationTrace {
        initial_loss,
        iterations_run: history.len(),
        loss_history: history,
        final_params: params,
        converged_early,
    })
}
