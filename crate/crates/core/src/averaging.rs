//! Averages over the switch time, over the coupling distribution, and
//! over Monte-Carlo noise trajectories.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analytic::{Provenance, SurvivalResult};
use crate::model::DKParams;
use crate::noise::{
    sample_ou_path_with, sample_telegraph_switches, uniform_grid, NoiseError, NoiseKind, NoiseSpec,
};
use crate::propagator::{survival_numeric, CouplingProfile, PropagatorError};

type BoxError = Box<dyn std::error::Error + Send + Sync>;

const MAX_T0_POINTS: usize = 1 << 16;
const MAX_HERMITE_ORDER: usize = 128;
const MAX_DE_LEVEL: u32 = 10;

#[derive(Debug, Error)]
pub enum AveragingError {
    #[error("invalid averaging spec: {0}")]
    InvalidSpec(&'static str),
    #[error("quadrature did not converge with {points} points (last change {change:e})")]
    NonConvergence { points: usize, change: f64 },
    #[error("integrand failed at {at}: {source}")]
    Integrand { at: f64, source: BoxError },
    #[error("trajectory {index} failed: {source}")]
    Trajectory { index: u64, source: BoxError },
    #[error(transparent)]
    Noise(#[from] NoiseError),
    #[error(transparent)]
    Propagator(#[from] PropagatorError),
}

pub type Result<T> = std::result::Result<T, AveragingError>;

/// Normalisation of the switch-time integral.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum T0Measure {
    /// Divide by the window length: a uniform distribution of `t0`.
    Normalized,
    /// Divide by `tau_c`, as in the bare `int dt0 / tau_c`.
    PerTauC(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AverageSpec {
    pub t0_window: (f64, f64),
    /// Initial number of `t0` nodes; refinement doubles the intervals.
    pub t0_points: usize,
    pub j_sigma: f64,
    /// Initial Gauss-Hermite order; doubled until converged.
    pub quad_order: usize,
    pub mc_trajectories: usize,
    pub seed: u64,
    pub measure: T0Measure,
    /// Convergence threshold for both quadratures.
    pub tol: f64,
}

impl Default for AverageSpec {
    fn default() -> Self {
        Self {
            t0_window: (-5.0, 5.0),
            t0_points: 41,
            j_sigma: 1.0,
            quad_order: 16,
            mc_trajectories: 1000,
            seed: 0,
            measure: T0Measure::Normalized,
            tol: 1e-6,
        }
    }
}

impl AverageSpec {
    /// Window `[-5 tau_c, 5 tau_c]`.
    pub fn with_tau_c(self, tau_c: f64) -> Self {
        Self {
            t0_window: (-5.0 * tau_c, 5.0 * tau_c),
            ..self
        }
    }

    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = self.t0_window;
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(AveragingError::InvalidSpec(
                "t0 window must be finite with lo < hi",
            ));
        }
        if self.t0_points < 3 {
            return Err(AveragingError::InvalidSpec("t0_points must be at least 3"));
        }
        if self.quad_order < 2 {
            return Err(AveragingError::InvalidSpec("quad_order must be at least 2"));
        }
        if self.mc_trajectories < 1 {
            return Err(AveragingError::InvalidSpec(
                "mc_trajectories must be at least 1",
            ));
        }
        if self.tol.is_nan() || self.tol <= 0.0 {
            return Err(AveragingError::InvalidSpec("tol must be positive"));
        }
        if let T0Measure::PerTauC(tau) = self.measure {
            if !(tau > 0.0 && tau.is_finite()) {
                return Err(AveragingError::InvalidSpec("tau_c must be positive"));
            }
        }
        Ok(())
    }
}

/// Neumaier summation in a fixed order.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(xs: I) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for x in xs {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            comp += (sum - t) + x;
        } else {
            comp += (x - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

fn evaluate<F, E>(f: &F, points: &[f64]) -> Result<Vec<f64>>
where
    F: Fn(f64) -> std::result::Result<f64, E> + Sync,
    E: std::error::Error + Send + Sync + 'static,
{
    points
        .par_iter()
        .map(|&t| {
            f(t).map_err(|e| AveragingError::Integrand {
                at: t,
                source: Box::new(e),
            })
        })
        .collect()
}

/// Average of `q(t0)` over the switch-time window.
///
/// Trapezoid sums on successively halved grids, with one Richardson step
/// (Simpson) applied to each pair; stops when that estimate changes by
/// less than `spec.tol`.
pub fn average_over_t0<F, E>(q_of_t0: F, spec: &AverageSpec) -> Result<f64>
where
    F: Fn(f64) -> std::result::Result<f64, E> + Sync,
    E: std::error::Error + Send + Sync + 'static,
{
    spec.validate()?;
    let (lo, hi) = spec.t0_window;
    let norm = match spec.measure {
        T0Measure::Normalized => 1.0 / (hi - lo),
        T0Measure::PerTauC(tau) => 1.0 / tau,
    };
    let mut intervals = spec.t0_points - 1;
    let grid = uniform_grid(lo, hi, intervals);
    let values = evaluate(&q_of_t0, &grid)?;
    let mut h = (hi - lo) / intervals as f64;
    let interior = compensated_sum(values[1..intervals].iter().copied());
    let mut trap = h * (0.5 * (values[0] + values[intervals]) + interior);
    let mut previous: Option<f64> = None;
    let mut change = f64::INFINITY;
    while intervals * 2 < MAX_T0_POINTS {
        let mids: Vec<f64> = (0..intervals).map(|k| lo + h * (k as f64 + 0.5)).collect();
        let mid_values = evaluate(&q_of_t0, &mids)?;
        let refined = 0.5 * trap + 0.5 * h * compensated_sum(mid_values);
        let simpson = (4.0 * refined - trap) / 3.0;
        intervals *= 2;
        h *= 0.5;
        trap = refined;
        if let Some(prev) = previous {
            change = ((simpson - prev) * norm).abs();
            if change < spec.tol {
                return Ok(simpson * norm);
            }
        }
        previous = Some(simpson);
    }
    Err(AveragingError::NonConvergence {
        points: intervals + 1,
        change,
    })
}

/// Orthonormal Hermite values `(h_n(x), h_{n-1}(x))` for the weight
/// `exp(-x^2)`.
fn hermite_pair(n: usize, x: f64) -> (f64, f64) {
    const PIM4: f64 = 0.751_125_544_464_942_5;
    let mut p1 = PIM4;
    let mut p2 = 0.0;
    for j in 1..=n {
        let p3 = p2;
        p2 = p1;
        let jf = j as f64;
        p1 = x * (2.0 / jf).sqrt() * p2 - ((jf - 1.0) / jf).sqrt() * p3;
    }
    (p1, p2)
}

/// Gauss-Hermite nodes and weights for the weight `exp(-x^2)`.
///
/// Positive roots are bracketed by scanning `h_n` on a grid finer than
/// the smallest root spacing, then polished by safeguarded Newton steps.
/// Scanning avoids the root skipping that extrapolated starting guesses
/// suffer above a few hundred nodes. Orders up to about 700 stay clear of
/// overflow in the unweighted recurrence.
pub fn gauss_hermite(n: usize) -> (Vec<f64>, Vec<f64>) {
    let nf = n as f64;
    let deriv = |x: f64| {
        let (p, q) = hermite_pair(n, x);
        (p, (2.0 * nf).sqrt() * q)
    };
    let mut roots = Vec::with_capacity(n.div_ceil(2));
    if n % 2 == 1 {
        roots.push(0.0);
    }
    let step = 0.05 * std::f64::consts::PI / (2.0 * nf + 1.0).sqrt();
    let x_end = (2.0 * nf + 1.0).sqrt() + 1.0;
    let mut a = if n % 2 == 1 { 0.5 * step } else { 0.0 };
    let mut fa = deriv(a).0;
    while a < x_end && roots.len() < n.div_ceil(2) {
        let b = a + step;
        let fb = deriv(b).0;
        if fa == 0.0 && a > 0.0 {
            roots.push(a);
        } else if fa * fb < 0.0 {
            let (mut lo, mut hi) = (a, b);
            let mut x = 0.5 * (lo + hi);
            for _ in 0..100 {
                let (p, dp) = deriv(x);
                if p == 0.0 {
                    break;
                }
                if (p < 0.0) == (deriv(lo).0 < 0.0) {
                    lo = x;
                } else {
                    hi = x;
                }
                let newton = x - p / dp;
                let next = if newton > lo && newton < hi {
                    newton
                } else {
                    0.5 * (lo + hi)
                };
                if (next - x).abs() <= 1e-15 * x.abs().max(1.0) {
                    x = next;
                    break;
                }
                x = next;
            }
            roots.push(x);
        }
        a = b;
        fa = fb;
    }
    roots.sort_by(|a, b| a.total_cmp(b));
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for (k, &r) in roots.iter().enumerate() {
        let dp = deriv(r).1;
        let weight = 2.0 / (dp * dp);
        // roots[k] is the k-th non-negative root; mirror it
        let idx_pos = n / 2 + k;
        let idx_neg = n - 1 - idx_pos;
        x[idx_pos] = r;
        x[idx_neg] = -r;
        w[idx_pos] = weight;
        w[idx_neg] = weight;
    }
    (x, w)
}

fn hermite_average<F, E>(f: &F, sigma: f64, order: usize) -> Result<f64>
where
    F: Fn(f64) -> std::result::Result<f64, E> + Sync,
    E: std::error::Error + Send + Sync + 'static,
{
    let (x, w) = gauss_hermite(order);
    let points: Vec<f64> = x
        .iter()
        .map(|xi| std::f64::consts::SQRT_2 * sigma * xi)
        .collect();
    let values = evaluate(f, &points)?;
    Ok(compensated_sum(w.iter().zip(values).map(|(wi, v)| wi * v)) / PI.sqrt())
}

/// Exp-sinh nodes `s = exp(pi/2 sinh t)` at `t = k h`, `k` in `ks`, with
/// weights `h ds/dt phi(s)`; nodes beyond `s = 12` carry no weight and
/// are dropped.
fn exp_sinh_nodes(h: f64, ks: impl Iterator<Item = i64>) -> Vec<(f64, f64)> {
    ks.filter_map(|k| {
        let t = k as f64 * h;
        let s = (0.5 * PI * t.sinh()).exp();
        (s <= 12.0).then(|| {
            let phi = (-0.5 * s * s).exp() / (2.0 * PI).sqrt();
            (s, h * 0.5 * PI * t.cosh() * s * phi)
        })
    })
    .collect()
}

/// `int_0^inf [q(sigma s) + q(-sigma s)] phi(s) ds` by exp-sinh
/// quadrature with step halving. The nodes cluster at `J = 0`, where the
/// switch-time averages vary on a scale much finer than `sigma`.
fn double_exponential_average<F, E>(f: &F, sigma: f64, tol: f64) -> Result<f64>
where
    F: Fn(f64) -> std::result::Result<f64, E> + Sync,
    E: std::error::Error + Send + Sync + 'static,
{
    const T_LO: f64 = -4.0;
    const T_HI: f64 = 1.5;
    let level_sum = |nodes: &[(f64, f64)]| -> Result<f64> {
        let points: Vec<f64> = nodes
            .iter()
            .map(|&(s, _)| sigma * s)
            .chain(nodes.iter().map(|&(s, _)| -sigma * s))
            .collect();
        let values = evaluate(f, &points)?;
        let n = nodes.len();
        Ok(compensated_sum(
            nodes
                .iter()
                .enumerate()
                .map(|(i, &(_, w))| w * (values[i] + values[i + n])),
        ))
    };
    let mut h = 0.5;
    let span = |h: f64| (T_LO / h).ceil() as i64..=(T_HI / h).floor() as i64;
    let mut estimate = level_sum(&exp_sinh_nodes(h, span(h)))?;
    let mut change = f64::INFINITY;
    for _ in 0..MAX_DE_LEVEL {
        h *= 0.5;
        let fresh = level_sum(&exp_sinh_nodes(h, span(h).filter(|k| k % 2 != 0)))?;
        let next = 0.5 * estimate + fresh;
        change = (next - estimate).abs();
        estimate = next;
        if change < tol {
            return Ok(estimate);
        }
    }
    Err(AveragingError::NonConvergence {
        points: 2 * exp_sinh_nodes(h, span(h)).len(),
        change,
    })
}

/// `int dJ P(J) q(J)` with `P` a zero-mean Gaussian of width `spec.j_sigma`.
///
/// Gauss-Hermite with order doubling; if that has not converged by order
/// 128, an exp-sinh rule on each half-line takes over.
pub fn average_over_j<F, E>(q_of_j: F, spec: &AverageSpec) -> Result<f64>
where
    F: Fn(f64) -> std::result::Result<f64, E> + Sync,
    E: std::error::Error + Send + Sync + 'static,
{
    spec.validate()?;
    if !(spec.j_sigma > 0.0 && spec.j_sigma.is_finite()) {
        return Err(AveragingError::InvalidSpec("j_sigma must be positive"));
    }
    let mut order = (spec.quad_order + spec.quad_order % 2).min(MAX_HERMITE_ORDER);
    let mut estimate = hermite_average(&q_of_j, spec.j_sigma, order)?;
    while order * 2 <= MAX_HERMITE_ORDER {
        order *= 2;
        let next = hermite_average(&q_of_j, spec.j_sigma, order)?;
        let change = (next - estimate).abs();
        estimate = next;
        if change < spec.tol {
            return Ok(estimate);
        }
    }
    double_exponential_average(&q_of_j, spec.j_sigma, spec.tol)
}

/// Coupling profile for one noise realisation on `[-t_max, t_max]`.
pub fn trajectory_profile(
    p: &DKParams,
    spec: &NoiseSpec,
    t_max: f64,
    index: u64,
) -> Result<CouplingProfile> {
    if spec.sigma == 0.0 {
        return Ok(CouplingProfile::Constant { j: 0.0 });
    }
    let mut rng = spec.rng(index);
    Ok(match spec.kind {
        NoiseKind::Telegraph => {
            let (values, switch_times) = sample_telegraph_switches(spec, -t_max, t_max, &mut rng)?;
            CouplingProfile::Switching {
                values,
                switch_times,
            }
        }
        NoiseKind::GaussianOu => {
            let dt = (spec.tau_c / 50.0).min(p.t_cap / 4.0);
            let n = (2.0 * t_max / dt).ceil() as usize;
            let path = sample_ou_path_with(spec, &uniform_grid(-t_max, t_max, n), &mut rng)?;
            CouplingProfile::SampledPath {
                times: path.times,
                values: path.values,
            }
        }
    })
}

/// Mean survival probability over `n` independent noise trajectories.
///
/// Trajectory `i` uses stream `i` of `spec.seed`; the coupling amplitude
/// comes from the noise, so `p.j` is ignored. The result does not depend
/// on how many worker threads run it.
pub fn monte_carlo_survival(
    p: &DKParams,
    spec: &NoiseSpec,
    n: usize,
    t_max: f64,
    tol: f64,
) -> Result<SurvivalResult> {
    spec.validate()?;
    if n < 1 {
        return Err(AveragingError::InvalidSpec(
            "at least one trajectory is required",
        ));
    }
    let samples: Vec<f64> = (0..n as u64)
        .into_par_iter()
        .map(|i| {
            let run = || -> Result<f64> {
                let profile = trajectory_profile(p, spec, t_max, i)?;
                Ok(survival_numeric(p, &profile, t_max, tol)?.q)
            };
            run().map_err(|e| AveragingError::Trajectory {
                index: i,
                source: Box::new(e),
            })
        })
        .collect::<Result<_>>()?;
    let nf = n as f64;
    let mean = compensated_sum(samples.iter().copied()) / nf;
    let stderr = if n == 1 {
        0.0
    } else {
        let var = compensated_sum(samples.iter().map(|q| (q - mean) * (q - mean))) / (nf - 1.0);
        (var / nf).sqrt()
    };
    SurvivalResult::new(mean, Provenance::MonteCarlo, Some(stderr))
        .map_err(|e| AveragingError::Propagator(e.into()))
}

#[cfg(test)]
#[allow(clippy::excessive_precision)]
mod tests {
    use super::*;
    use std::convert::Infallible;

    fn ok(x: f64) -> std::result::Result<f64, Infallible> {
        Ok(x)
    }

    #[test]
    fn constant_t0_average() {
        let spec = AverageSpec::default();
        assert!((average_over_t0(|_| ok(0.37), &spec).unwrap() - 0.37).abs() < 1e-15);
    }

    #[test]
    fn gaussian_bump_t0_average() {
        let spec = AverageSpec {
            tol: 1e-11,
            ..AverageSpec::default()
        };
        let got = average_over_t0(|t| ok((-t * t).exp()), &spec).unwrap();
        // erf(5) differs from 1 by 1.5e-12
        let expected = PI.sqrt() * (1.0 - 1.5374597944280349e-12) / 10.0;
        assert!((got - expected).abs() < 1e-8);
    }

    #[test]
    fn literal_measure_scales_by_tau_c() {
        let spec = AverageSpec {
            measure: T0Measure::PerTauC(2.0),
            ..AverageSpec::default()
        };
        assert!((average_over_t0(|_| ok(1.0), &spec).unwrap() - 5.0).abs() < 1e-12);
    }

    #[test]
    fn point_cap_reports_non_convergence() {
        let spec = AverageSpec {
            tol: 1e-300,
            ..AverageSpec::default()
        };
        let err = average_over_t0(|t| ok((37.0 * t).sin().abs()), &spec).unwrap_err();
        assert!(matches!(err, AveragingError::NonConvergence { .. }));
    }

    #[test]
    fn hermite_moments() {
        let spec = AverageSpec {
            j_sigma: 1.7,
            ..AverageSpec::default()
        };
        assert!((average_over_j(|_| ok(2.5), &spec).unwrap() - 2.5).abs() < 1e-13);
        assert!((average_over_j(|j| ok(j * j), &spec).unwrap() - 1.7 * 1.7).abs() < 1e-12);
        assert!(
            (average_over_j(|j| ok(j.powi(4)), &spec).unwrap() - 3.0 * 1.7f64.powi(4)).abs()
                < 1e-10
        );
    }

    #[test]
    fn sharp_features_near_zero_coupling_fall_back() {
        // E[1 - exp(-|J| / eps)] = 1 - 2 exp(eps^-2 / 2) Phi(-1/eps) for unit sigma
        let spec = AverageSpec {
            tol: 1e-9,
            ..AverageSpec::default()
        };
        let eps = 0.02f64;
        let got = average_over_j(|j| ok(1.0 - (-j.abs() / eps).exp()), &spec).unwrap();
        // 2 exp(x^2/2) Phi(-x) at x = 50, from the asymptotic series of erfc
        let x = 1.0 / eps;
        let tail = 2.0 / (x * (2.0 * PI).sqrt())
            * (1.0 - 1.0 / (x * x) + 3.0 / x.powi(4) - 15.0 / x.powi(6));
        assert!((got - (1.0 - tail)).abs() < 1e-8, "{got} vs {}", 1.0 - tail);
    }

    #[test]
    fn hermite_rule_is_accurate_at_high_order() {
        for n in [2usize, 16, 128, 512] {
            let (x, w) = gauss_hermite(n);
            assert!(
                (compensated_sum(w.iter().copied()) - PI.sqrt()).abs() < 1e-12,
                "order {n}"
            );
            let second: f64 = compensated_sum(x.iter().zip(&w).map(|(x, w)| w * x * x));
            assert!((second - PI.sqrt() / 2.0).abs() < 1e-11, "order {n}");
        }
    }

    #[test]
    fn invalid_specs() {
        let spec = AverageSpec {
            t0_points: 2,
            ..AverageSpec::default()
        };
        assert!(matches!(
            average_over_t0(|_| ok(1.0), &spec),
            Err(AveragingError::InvalidSpec(_))
        ));
        let spec = AverageSpec {
            j_sigma: 0.0,
            ..AverageSpec::default()
        };
        assert!(matches!(
            average_over_j(|_| ok(1.0), &spec),
            Err(AveragingError::InvalidSpec(_))
        ));
    }

    #[test]
    fn zero_noise_ensemble() {
        let p = DKParams::unit(4.0, 5.0, 1.0).unwrap();
        let spec = NoiseSpec::new(NoiseKind::Telegraph, 0.5, 0.0, 11).unwrap();
        let r = monte_carlo_survival(&p, &spec, 8, 15.0, 1e-8).unwrap();
        assert!((r.q - 1.0).abs() < 1e-7);
        assert_eq!(r.stderr, Some(0.0));
        assert_eq!(r.provenance, Provenance::MonteCarlo);
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(48))]
        #[test]
        fn averages_of_probabilities_are_probabilities(
            a in 0.1f64..6.0,
            b in -3.0f64..3.0,
            sigma in 0.2f64..3.0,
        ) {
            let f = |x: f64| ok((a * x + b).sin().powi(2));
            let spec = AverageSpec { j_sigma: sigma, ..AverageSpec::default() };
            for v in [average_over_t0(f, &spec).unwrap(), average_over_j(f, &spec).unwrap()] {
                proptest::prop_assert!((0.0..=1.0).contains(&v), "{}", v);
            }
        }
    }
}
