//! Numerical reference: Dormand-Prince 5(4) integration of the two-level
//! Schrödinger equation `i dC/dt = H(t) C` for an arbitrary coupling profile.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analytic::{AnalyticError, Provenance, SurvivalResult};
use crate::model::{sech, AmplitudePair, DKParams, ModelError};
use crate::specfun::Complex;

/// Default truncation of the infinite time axis, in units of `T`.
pub const DEFAULT_T_MAX: f64 = 25.0;
pub const DEFAULT_TOL: f64 = 1e-10;
const MAX_STEPS: usize = 50_000_000;
/// Local error target relative to the requested tolerance. Accumulated
/// norm drift over a full window is roughly 150 local targets.
const LOCAL_TOL_FACTOR: f64 = 0.01;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PropagatorError {
    #[error("step size underflow at t = {t}")]
    StepUnderflow { t: f64 },
    #[error("step budget exhausted at t = {t}")]
    TooManySteps { t: f64 },
    #[error("invalid coupling profile: {0}")]
    InvalidProfile(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(&'static str),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Analytic(#[from] AnalyticError),
}

pub type Result<T> = std::result::Result<T, PropagatorError>;

/// Time dependence of the off-diagonal Hamiltonian element.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum CouplingProfile {
    /// `J sech(t/T)`.
    Constant { j: f64 },
    /// `+J sech(t/T)` before `t0`, `-J sech(t/T)` after.
    SingleFlip { j: f64, t0: f64 },
    /// `J [tanh(t/T) - tanh(t0/T)]`, with no sech envelope.
    GaussianForm { j: f64, t0: f64 },
    /// Piecewise-constant amplitude times `sech(t/T)`: `values[k]` holds
    /// between `switch_times[k-1]` and `switch_times[k]`.
    Switching {
        values: Vec<f64>,
        switch_times: Vec<f64>,
    },
    /// Piecewise-linear amplitude on a grid, times `sech(t/T)`.
    SampledPath { times: Vec<f64>, values: Vec<f64> },
}

fn strictly_increasing(xs: &[f64]) -> bool {
    xs.windows(2).all(|w| w[0] < w[1])
}

impl CouplingProfile {
    pub fn validate(&self, t_lo: f64, t_hi: f64) -> Result<()> {
        let bad = |msg: &str| Err(PropagatorError::InvalidProfile(msg.to_string()));
        match self {
            CouplingProfile::Constant { j } => {
                if !j.is_finite() {
                    return bad("non-finite coupling");
                }
            }
            CouplingProfile::SingleFlip { j, t0 } | CouplingProfile::GaussianForm { j, t0 } => {
                if !j.is_finite() || t0.is_nan() {
                    return bad("non-finite coupling or NaN switch time");
                }
            }
            CouplingProfile::Switching {
                values,
                switch_times,
            } => {
                if values.len() != switch_times.len() + 1 {
                    return bad("switching profile needs one more value than switch times");
                }
                if !values.iter().chain(switch_times).all(|x| x.is_finite()) {
                    return bad("non-finite switching data");
                }
                if !strictly_increasing(switch_times) {
                    return bad("switch times must be strictly increasing");
                }
            }
            CouplingProfile::SampledPath { times, values } => {
                if times.len() != values.len() || times.len() < 2 {
                    return bad("sampled path needs at least two aligned samples");
                }
                if !times.iter().chain(values).all(|x| x.is_finite()) {
                    return bad("non-finite sample");
                }
                if !strictly_increasing(times) {
                    return bad("sample times must be strictly increasing");
                }
                if times[0] > t_lo || times[times.len() - 1] < t_hi {
                    return bad("sample grid does not cover the integration window");
                }
            }
        }
        Ok(())
    }

    /// Times where the profile is not smooth.
    pub fn breakpoints(&self) -> Vec<f64> {
        match self {
            CouplingProfile::SingleFlip { t0, .. } if t0.is_finite() => vec![*t0],
            CouplingProfile::Switching { switch_times, .. } => switch_times.clone(),
            CouplingProfile::SampledPath { times, .. } => times.clone(),
            _ => Vec::new(),
        }
    }

    /// Off-diagonal element at `t`; `side` is any time strictly inside the
    /// smooth piece that contains `t`, so breakpoints resolve correctly.
    pub fn offdiag(&self, t: f64, side: f64, t_cap: f64) -> f64 {
        match self {
            CouplingProfile::Constant { j } => j * sech(t / t_cap),
            CouplingProfile::SingleFlip { j, t0 } => {
                let sign = if side < *t0 { 1.0 } else { -1.0 };
                sign * j * sech(t / t_cap)
            }
            CouplingProfile::GaussianForm { j, t0 } => {
                j * ((t / t_cap).tanh() - (t0 / t_cap).tanh())
            }
            CouplingProfile::Switching {
                values,
                switch_times,
            } => {
                let k = switch_times.partition_point(|&s| s <= side);
                values[k] * sech(t / t_cap)
            }
            CouplingProfile::SampledPath { times, values } => {
                let k = times
                    .partition_point(|&s| s <= side)
                    .clamp(1, times.len() - 1)
                    - 1;
                let (t0, t1) = (times[k], times[k + 1]);
                let w = (t - t0) / (t1 - t0);
                (values[k] + w * (values[k + 1] - values[k])) * sech(t / t_cap)
            }
        }
    }
}

/// Error tolerance and step cap of the adaptive integrator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepControl {
    pub tol: f64,
    pub max_step: f64,
}

impl StepControl {
    /// Step cap `T/10`.
    pub fn new(tol: f64, t_cap: f64) -> Self {
        Self {
            tol,
            max_step: t_cap / 10.0,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(PropagatorError::InvalidArgument(
                "tolerance must be positive",
            ));
        }
        if !(self.max_step > 0.0 && self.max_step.is_finite()) {
            return Err(PropagatorError::InvalidArgument(
                "max step must be positive",
            ));
        }
        Ok(())
    }
}

type State = [Complex; 2];

#[inline]
fn rhs(d: f64, x: f64, y: &State) -> State {
    // -i H y
    let h1 = y[0] * d + y[1] * x;
    let h2 = y[0] * x - y[1] * d;
    [Complex::new(h1.im, -h1.re), Complex::new(h2.im, -h2.re)]
}

#[inline]
fn axpy(y: &State, h: f64, terms: &[(f64, &State)]) -> State {
    let mut out = *y;
    for (c, k) in terms {
        out[0] += k[0] * (h * c);
        out[1] += k[1] * (h * c);
    }
    out
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// One Dormand-Prince step. Returns the fifth-order solution, the
/// embedded error estimate, and the derivative at the new point.
fn dopri_step<H>(ham: &H, side: f64, t: f64, y: &State, k1: &State, h: f64) -> (State, State, State)
where
    H: Fn(f64, f64) -> (f64, f64),
{
    let f = |tt: f64, yy: &State| {
        let (d, x) = ham(tt, side);
        rhs(d, x, yy)
    };
    let k2 = f(t + C2 * h, &axpy(y, h, &[(A21, k1)]));
    let k3 = f(t + C3 * h, &axpy(y, h, &[(A31, k1), (A32, &k2)]));
    let k4 = f(
        t + C4 * h,
        &axpy(y, h, &[(A41, k1), (A42, &k2), (A43, &k3)]),
    );
    let k5 = f(
        t + C5 * h,
        &axpy(y, h, &[(A51, k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
    );
    let k6 = f(
        t + h,
        &axpy(
            y,
            h,
            &[(A61, k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
        ),
    );
    let y5 = axpy(
        y,
        h,
        &[(B1, k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)],
    );
    let k7 = f(t + h, &y5);
    let zero = [Complex::new(0.0, 0.0); 2];
    let err = axpy(
        &zero,
        h,
        &[
            (E1, k1),
            (E3, &k3),
            (E4, &k4),
            (E5, &k5),
            (E6, &k6),
            (E7, &k7),
        ],
    );
    (y5, err, k7)
}

fn error_norm(err: &State, y0: &State, y1: &State, tol: f64) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..2 {
        let parts = [
            (err[i].re, y0[i].re, y1[i].re),
            (err[i].im, y0[i].im, y1[i].im),
        ];
        for (e, a, b) in parts {
            let scale = tol * (1.0 + a.abs().max(b.abs()));
            worst = worst.max(e.abs() / scale);
        }
    }
    worst
}

/// Sorted segment boundaries from `t_start` to `t_end`, in travel order.
fn segments(breakpoints: &[f64], t_start: f64, t_end: f64) -> Vec<f64> {
    let (lo, hi) = if t_start < t_end {
        (t_start, t_end)
    } else {
        (t_end, t_start)
    };
    let mut pts: Vec<f64> = breakpoints
        .iter()
        .copied()
        .filter(|&b| b > lo && b < hi)
        .collect();
    pts.sort_by(|a, b| a.total_cmp(b));
    pts.dedup();
    let mut out = Vec::with_capacity(pts.len() + 2);
    out.push(lo);
    out.extend(pts);
    out.push(hi);
    if t_start > t_end {
        out.reverse();
    }
    out
}

fn check_endpoints(t_start: f64, t_end: f64, initial: &AmplitudePair) -> Result<()> {
    if !(t_start.is_finite() && t_end.is_finite()) {
        return Err(PropagatorError::InvalidArgument(
            "integration bounds must be finite",
        ));
    }
    let n = initial.norm_sqr();
    if !n.is_finite() {
        return Err(PropagatorError::InvalidArgument(
            "initial amplitudes must be finite",
        ));
    }
    Ok(())
}

/// Adaptive integration for a caller-supplied Hamiltonian.
///
/// `ham(t, side)` returns `(detuning, offdiag)`; `side` identifies the
/// smooth piece between consecutive `breakpoints`. No step crosses a
/// breakpoint. Integration runs backwards when `t_end < t_start`.
pub fn propagate_with<H>(
    ham: H,
    breakpoints: &[f64],
    t_start: f64,
    t_end: f64,
    initial: AmplitudePair,
    ctrl: StepControl,
) -> Result<AmplitudePair>
where
    H: Fn(f64, f64) -> (f64, f64),
{
    ctrl.validate()?;
    check_endpoints(t_start, t_end, &initial)?;
    if t_start == t_end {
        return Ok(initial);
    }
    let bounds = segments(breakpoints, t_start, t_end);
    let dir = (t_end - t_start).signum();
    let mut y: State = [initial.c1, initial.c2];
    let mut h_abs = ctrl.max_step.min(1e-2);
    let mut steps = 0usize;

    for w in bounds.windows(2) {
        let (a, b) = (w[0], w[1]);
        let side = 0.5 * (a + b);
        let mut t = a;
        let (d, x) = ham(t, side);
        let mut k1 = rhs(d, x, &y);
        while (b - t) * dir > 0.0 {
            let remaining = (b - t).abs();
            let mut h = h_abs.min(ctrl.max_step);
            let last = h >= remaining;
            if last {
                h = remaining;
            }
            let hs = h * dir;
            let (y_new, err, k7) = dopri_step(&ham, side, t, &y, &k1, hs);
            let e = error_norm(&err, &y, &y_new, ctrl.tol * LOCAL_TOL_FACTOR);
            steps += 1;
            if steps > MAX_STEPS {
                return Err(PropagatorError::TooManySteps { t });
            }
            if e <= 1.0 && e.is_finite() {
                t = if last { b } else { t + hs };
                y = y_new;
                k1 = k7;
                let factor = if e == 0.0 {
                    5.0
                } else {
                    (0.9 * e.powf(-0.2)).clamp(0.2, 5.0)
                };
                // a forced short final step says nothing about the next one
                if !last {
                    h_abs = h * factor;
                }
            } else {
                let factor = if e.is_finite() {
                    (0.9 * e.powf(-0.2)).clamp(0.1, 0.9)
                } else {
                    0.1
                };
                h_abs = h * factor;
                if h_abs < 1e-13 * t.abs().max(1.0) {
                    return Err(PropagatorError::StepUnderflow { t });
                }
            }
        }
    }
    Ok(AmplitudePair::new(y[0], y[1]))
}

/// Fixed-step integration with the fifth-order stage combination; each
/// smooth piece is divided into equal steps no longer than `h`.
pub fn propagate_fixed_with<H>(
    ham: H,
    breakpoints: &[f64],
    t_start: f64,
    t_end: f64,
    initial: AmplitudePair,
    h: f64,
) -> Result<AmplitudePair>
where
    H: Fn(f64, f64) -> (f64, f64),
{
    check_endpoints(t_start, t_end, &initial)?;
    if !(h > 0.0 && h.is_finite()) {
        return Err(PropagatorError::InvalidArgument("step must be positive"));
    }
    let mut y: State = [initial.c1, initial.c2];
    for w in segments(breakpoints, t_start, t_end).windows(2) {
        let (a, b) = (w[0], w[1]);
        let side = 0.5 * (a + b);
        let n = ((b - a).abs() / h).ceil().max(1.0) as usize;
        let hs = (b - a) / n as f64;
        for i in 0..n {
            let t = a + i as f64 * hs;
            let (d, x) = ham(t, side);
            let k1 = rhs(d, x, &y);
            y = dopri_step(&ham, side, t, &y, &k1, hs).0;
        }
    }
    Ok(AmplitudePair::new(y[0], y[1]))
}

fn profile_hamiltonian<'a>(
    p: &'a DKParams,
    profile: &'a CouplingProfile,
) -> impl Fn(f64, f64) -> (f64, f64) + 'a {
    move |t, side| (p.detuning(t), profile.offdiag(t, side, p.t_cap))
}

/// Amplitudes at `t_end` given `initial` at `t_start`.
pub fn propagate(
    p: &DKParams,
    profile: &CouplingProfile,
    t_start: f64,
    t_end: f64,
    initial: AmplitudePair,
    tol: f64,
) -> Result<AmplitudePair> {
    propagate_ctrl(
        p,
        profile,
        t_start,
        t_end,
        initial,
        StepControl::new(tol, p.t_cap),
    )
}

pub fn propagate_ctrl(
    p: &DKParams,
    profile: &CouplingProfile,
    t_start: f64,
    t_end: f64,
    initial: AmplitudePair,
    ctrl: StepControl,
) -> Result<AmplitudePair> {
    p.validate()?;
    profile.validate(t_start.min(t_end), t_start.max(t_end))?;
    let ham = profile_hamiltonian(p, profile);
    propagate_with(ham, &profile.breakpoints(), t_start, t_end, initial, ctrl)
}

pub fn propagate_fixed(
    p: &DKParams,
    profile: &CouplingProfile,
    t_start: f64,
    t_end: f64,
    initial: AmplitudePair,
    h: f64,
) -> Result<AmplitudePair> {
    p.validate()?;
    profile.validate(t_start.min(t_end), t_start.max(t_end))?;
    let ham = profile_hamiltonian(p, profile);
    propagate_fixed_with(ham, &profile.breakpoints(), t_start, t_end, initial, h)
}

/// `|C1(t_max)|^2` starting from `(1, 0)` at `-t_max`.
pub fn survival_numeric(
    p: &DKParams,
    profile: &CouplingProfile,
    t_max: f64,
    tol: f64,
) -> Result<SurvivalResult> {
    if t_max.is_nan() || t_max < 10.0 * p.t_cap || t_max.is_infinite() {
        return Err(PropagatorError::InvalidArgument(
            "t_max must be finite and at least 10 T",
        ));
    }
    let end = propagate(p, profile, -t_max, t_max, AmplitudePair::up(), tol)?;
    Ok(SurvivalResult::new(
        end.c1.norm_sqr(),
        Provenance::NumericOracle,
        None,
    )?)
}

/// Numerical results for the coupling `J [tanh(t/T) - tanh(t0/T)]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianOracle {
    /// Probability of ending on the other adiabatic level.
    pub adiabatic_transfer: f64,
    /// Population kept in the adiabatic state that is mostly `|up>`; `None`
    /// when that state is not defined at one of the ends.
    pub diabatic_survival: Option<f64>,
}

/// Upper and lower eigenvectors of `[[d, x], [x, -d]]`.
fn eigenvectors(d: f64, x: f64) -> ([f64; 2], [f64; 2]) {
    let half = 0.5 * x.atan2(d);
    let (s, c) = half.sin_cos();
    ([c, s], [-s, c])
}

fn project(v: [f64; 2], a: &AmplitudePair) -> f64 {
    (a.c1 * v[0] + a.c2 * v[1]).norm_sqr()
}

pub fn gaussian_oracle(p: &DKParams, t0: f64, t_max: f64, tol: f64) -> Result<GaussianOracle> {
    if t_max.is_nan() || t_max < 10.0 * p.t_cap || t_max.is_infinite() {
        return Err(PropagatorError::InvalidArgument(
            "t_max must be finite and at least 10 T",
        ));
    }
    let profile = CouplingProfile::GaussianForm { j: p.j, t0 };
    let ends = [-t_max, t_max].map(|t| (p.detuning(t), profile.offdiag(t, t, p.t_cap)));
    if ends.iter().any(|&(d, x)| d == 0.0 && x == 0.0) {
        return Err(PropagatorError::InvalidArgument(
            "degenerate levels at the window edge",
        ));
    }
    let (upper_start, _) = eigenvectors(ends[0].0, ends[0].1);
    let (_, lower_end) = eigenvectors(ends[1].0, ends[1].1);
    let start = AmplitudePair::new(upper_start[0].into(), upper_start[1].into());
    let end = propagate(p, &profile, -t_max, t_max, start, tol)?;
    let transfer = project(lower_end, &end);
    let survival = if ends[0].0 == 0.0 || ends[1].0 == 0.0 {
        None
    } else if ends[0].0.signum() == ends[1].0.signum() {
        Some(1.0 - transfer)
    } else {
        Some(transfer)
    };
    Ok(GaussianOracle {
        adiabatic_transfer: transfer,
        diabatic_survival: survival,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn fig2() -> DKParams {
        DKParams::unit(4.0, 5.0, PI / 2.0).unwrap()
    }

    #[test]
    fn decoupled_evolution_is_a_pure_phase() {
        let p = DKParams::unit(4.0, 5.0, 0.0).unwrap();
        let (a, b) = (-3.0f64, 2.5f64);
        let end = propagate(
            &p,
            &CouplingProfile::Constant { j: 0.0 },
            a,
            b,
            AmplitudePair::up(),
            1e-11,
        )
        .unwrap();
        // phase = -int (D0 + D1 tanh t) dt = -(D0 (b - a) + D1 ln(cosh b / cosh a))
        let phase = -(4.0 * (b - a) + 5.0 * (b.cosh() / a.cosh()).ln());
        let expected = Complex::from_polar(1.0, phase);
        assert!((end.c1 - expected).norm() < 1e-8);
        assert_eq!(end.c2, Complex::new(0.0, 0.0));
    }

    #[test]
    fn frozen_hamiltonian_matches_rabi_formula() {
        let (d, x) = (1.3, 0.7);
        let t_end: f64 = 4.0;
        let ctrl = StepControl {
            tol: 1e-12,
            max_step: 0.1,
        };
        let end =
            propagate_with(|_, _| (d, x), &[], 0.0, t_end, AmplitudePair::up(), ctrl).unwrap();
        let omega = (d * d + x * x).sqrt();
        let rabi = 1.0 - x * x / (omega * omega) * (omega * t_end).sin().powi(2);
        assert!((end.c1.norm_sqr() - rabi).abs() < 1e-9);
    }

    #[test]
    fn zero_coupling_survives() {
        let p = fig2().with_j(0.0);
        let q = survival_numeric(&p, &CouplingProfile::Constant { j: 0.0 }, 25.0, 1e-10).unwrap();
        assert!((q.q - 1.0).abs() < 1e-9);
        assert_eq!(q.provenance, Provenance::NumericOracle);
    }

    #[test]
    fn norm_and_time_reversal() {
        let p = fig2();
        let profile = CouplingProfile::SingleFlip { j: p.j, t0: -0.4 };
        let tol = 1e-10;
        let fwd = propagate(&p, &profile, -25.0, 25.0, AmplitudePair::up(), tol).unwrap();
        assert!((fwd.norm_sqr() - 1.0).abs() < 10.0 * tol);
        let back = propagate(&p, &profile, 25.0, -25.0, fwd, tol).unwrap();
        assert!(back.max_component_diff(&AmplitudePair::up()) < 100.0 * tol);
    }

    #[test]
    fn breakpoint_is_honoured() {
        // a flip placed exactly on the boundary of a segment must not leak
        // the post-flip sign into the pre-flip piece
        let profile = CouplingProfile::SingleFlip { j: 1.0, t0: 0.0 };
        assert_eq!(profile.offdiag(0.0, -0.1, 1.0), 1.0);
        assert_eq!(profile.offdiag(0.0, 0.1, 1.0), -1.0);
        assert_eq!(
            segments(&[0.0, 5.0, -1.0], -2.0, 2.0),
            vec![-2.0, -1.0, 0.0, 2.0]
        );
        assert_eq!(segments(&[0.0], 2.0, -2.0), vec![2.0, 0.0, -2.0]);
    }

    #[test]
    fn switching_profile_matches_single_flip() {
        let p = fig2();
        let a = CouplingProfile::SingleFlip { j: p.j, t0: 0.3 };
        let b = CouplingProfile::Switching {
            values: vec![p.j, -p.j],
            switch_times: vec![0.3],
        };
        let qa = survival_numeric(&p, &a, 25.0, 1e-10).unwrap().q;
        let qb = survival_numeric(&p, &b, 25.0, 1e-10).unwrap().q;
        assert!((qa - qb).abs() < 1e-12);
    }

    #[test]
    fn sampled_constant_path_matches_constant_profile() {
        let p = fig2();
        let times: Vec<f64> = (0..=100).map(|k| -25.0 + 0.5 * k as f64).collect();
        let values = vec![p.j; times.len()];
        let sampled = CouplingProfile::SampledPath { times, values };
        let qa = survival_numeric(&p, &sampled, 25.0, 1e-10).unwrap().q;
        let qb = survival_numeric(&p, &CouplingProfile::Constant { j: p.j }, 25.0, 1e-10)
            .unwrap()
            .q;
        assert!((qa - qb).abs() < 1e-8);
    }

    #[test]
    fn invalid_profiles() {
        let short = CouplingProfile::SampledPath {
            times: vec![-1.0, 1.0],
            values: vec![0.0, 0.0],
        };
        assert!(matches!(
            short.validate(-2.0, 2.0),
            Err(PropagatorError::InvalidProfile(_))
        ));
        let bad = CouplingProfile::Switching {
            values: vec![1.0],
            switch_times: vec![0.0],
        };
        assert!(matches!(
            bad.validate(-2.0, 2.0),
            Err(PropagatorError::InvalidProfile(_))
        ));
        let p = fig2();
        let c = CouplingProfile::Constant { j: 1.0 };
        assert!(matches!(
            survival_numeric(&p, &c, 5.0, 1e-10),
            Err(PropagatorError::InvalidArgument(_))
        ));
        assert!(matches!(
            propagate(&p, &c, 0.0, 1.0, AmplitudePair::up(), 0.0),
            Err(PropagatorError::InvalidArgument(_))
        ));
    }

    #[test]
    fn fixed_step_order_is_five() {
        let p = fig2();
        let profile = CouplingProfile::Constant { j: p.j };
        let reference = propagate_ctrl(
            &p,
            &profile,
            -4.0,
            4.0,
            AmplitudePair::up(),
            StepControl {
                tol: 1e-14,
                max_step: 0.01,
            },
        )
        .unwrap();
        let err = |h: f64| {
            propagate_fixed(&p, &profile, -4.0, 4.0, AmplitudePair::up(), h)
                .unwrap()
                .max_component_diff(&reference)
        };
        let (e1, e2) = (err(0.1), err(0.05));
        let slope = (e1 / e2).log2();
        assert!((slope - 5.0).abs() < 0.5, "measured order {slope}");
    }
}
