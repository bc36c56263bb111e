//! The tracker should be statistically efficient: its frequency RMSE over a
//! Monte Carlo study should sit close to the Cramér-Rao bound computed from
//! the Fisher information of the model.

use mcsa::signal::{ModelParams, ModelStructure, ReferenceSpec};
use mcsa::validation::{monte_carlo, MonteCarloSetup};
use nalgebra::DMatrix;
use num_complex::Complex64;

/// Bound on the standard deviation of `(ω0, ωc)` for one segment of `m`
/// samples in complex white noise of per-channel deviation `sigma`. The
/// `ωc` bound is NaN when the structure has no interharmonics.
fn frequency_crb(
    params: &ModelParams,
    structure: &ModelStructure,
    m: usize,
    sigma: f64,
) -> (f64, f64) {
    let keys = structure.components();
    let n_freq = if structure.has_interharmonics() { 2 } else { 1 };
    let n_params = n_freq + 2 * keys.len();
    // derivative of the model with respect to each real parameter
    let mut d = DMatrix::<Complex64>::zeros(m, n_params);
    for (u, key) in keys.iter().enumerate() {
        let w = key.omega(params.omega0, params.omegac);
        let c = params.phasors[key];
        for n in 0..m {
            let e = Complex64::cis(w * n as f64);
            let dw = Complex64::i() * n as f64 * c * e;
            d[(n, 0)] += key.omega0_factor() * dw;
            if n_freq == 2 {
                d[(n, 1)] += key.omegac_factor() * dw;
            }
            d[(n, n_freq + u)] = e;
            d[(n, n_freq + keys.len() + u)] = Complex64::i() * e;
        }
    }
    let gram = d.adjoint() * &d;
    let fisher = DMatrix::from_fn(n_params, n_params, |i, j| gram[(i, j)].re / (sigma * sigma));
    let cov = fisher.try_inverse().expect("fisher information is regular");
    let bc = if n_freq == 2 {
        cov[(1, 1)].sqrt()
    } else {
        f64::NAN
    };
    (cov[(0, 0)].sqrt(), bc)
}

#[test]
fn frequency_rmse_is_near_the_cramer_rao_bound() {
    let setup = MonteCarloSetup {
        n_trials: 100,
        base_seed: 7,
        ..MonteCarloSetup::default()
    };
    let report = monte_carlo(&setup).unwrap();
    assert_eq!(report.total_divergences(), 0);
    let (truth, structure) = ReferenceSpec::default().params().unwrap();
    let m = setup.segment_length;
    for (s, seg) in report.per_segment.iter().enumerate() {
        let (b0, bc) = frequency_crb(&truth.time_shifted(s * m), &structure, m, setup.noise_sigma);
        let r0 = seg.omega0.unwrap() / b0;
        let rc = seg.omegac.unwrap() / bc;
        assert!(
            (0.7..1.5).contains(&r0),
            "segment {s}: omega0 RMSE / CRB = {r0}"
        );
        assert!(
            (0.7..1.5).contains(&rc),
            "segment {s}: omegac RMSE / CRB = {rc}"
        );
    }
}

#[test]
fn bound_matches_closed_form_for_a_single_tone() {
    // one complex tone of amplitude a in noise of total variance 2σ²:
    // var(ω) = 12σ² / (a² M (M² − 1))
    let structure = ModelStructure::fundamental_only();
    let a = 0.7;
    let params =
        ModelParams::from_ordered(0.3, 0.0, &structure, &[Complex64::new(a, 0.0)]).unwrap();
    let (m, sigma) = (250usize, 0.25);
    let (b0, _) = frequency_crb(&params, &structure, m, sigma);
    let mf = m as f64;
    let expected = (12.0 * sigma * sigma / (a * a * mf * (mf * mf - 1.0))).sqrt();
    assert!((b0 / expected - 1.0).abs() < 1e-9, "{b0} vs {expected}");
}
