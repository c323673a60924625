//! The four commands. Each returns tables; rows are computed in parallel
//! and assembled in sweep order.

use std::f64::consts::{PI, SQRT_2};
use std::fmt::Display;

use noisydk_core::analytic::{
    continuity_residual, discrepancy_ledger, matched_coefficients, survival_ae, survival_gaussian,
    survival_noise_free, survival_rz, survival_telegraph_single_flip, survival_telegraph_with,
};
use noisydk_core::averaging::{
    average_over_j, average_over_t0, compensated_sum, gauss_hermite, monte_carlo_survival,
};
use noisydk_core::propagator::{gaussian_oracle, survival_numeric, CouplingProfile};
use noisydk_core::{AverageSpec, DKParams, Provenance, SurvivalResult, T0Measure, Variant};
use rayon::prelude::*;

use crate::config::{Axis, Command, Fig2Panel, Fig3Panel, Operation, RunConfig};
use crate::output::{Artifact, Cell, Table};
use crate::CliError;

/// Result of a command: its tables and whether every gated check passed.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub artifact: Artifact,
    pub passed: bool,
}

pub fn run(config: &RunConfig) -> Result<Outcome, CliError> {
    config.validate()?;
    let artifact = match config.command {
        Command::Fig2(panel) => fig2(panel, config)?,
        Command::Fig3(panel) => fig3(panel, config)?,
        Command::Sweep => sweep(config)?,
        Command::Verify => return verify(config),
    };
    Ok(Outcome {
        artifact,
        passed: true,
    })
}

fn compute<E: Display>(what: impl Display) -> impl FnOnce(E) -> CliError {
    move |e| CliError::Compute(format!("{what}: {e}"))
}

fn columns(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}

fn rows<F>(grid: &[f64], f: F) -> Result<Vec<Vec<Cell>>, CliError>
where
    F: Fn(usize, f64) -> Result<Vec<Cell>, CliError> + Sync,
{
    grid.par_iter().enumerate().map(|(i, &x)| f(i, x)).collect()
}

fn params(config: &RunConfig) -> Result<DKParams, CliError> {
    config.params().map_err(|e| CliError::InvalidValue {
        key: "delta0/delta1/j/t-cap".into(),
        msg: e.to_string(),
    })
}

fn oracle_flip(p: &DKParams, t0: f64, config: &RunConfig) -> Result<f64, CliError> {
    let profile = if t0.is_finite() {
        CouplingProfile::SingleFlip { j: p.j, t0 }
    } else if t0 > 0.0 {
        CouplingProfile::Constant { j: p.j }
    } else {
        CouplingProfile::Constant { j: -p.j }
    };
    survival_numeric(p, &profile, config.t_max, config.tol)
        .map(|r| r.q)
        .map_err(compute(format_args!("oracle at t0 = {t0}")))
}

fn flip_q(p: &DKParams, t0: f64, variant: Variant) -> Result<f64, CliError> {
    survival_telegraph_single_flip(p, t0, variant)
        .map(|r| r.q)
        .map_err(compute(format_args!("single-flip survival at t0 = {t0}")))
}

fn fig2(panel: Fig2Panel, config: &RunConfig) -> Result<Artifact, CliError> {
    let base = params(config)?;
    let grid = config.grid();
    let variant = config.variant;
    let provenance = Provenance::from(variant).to_string();
    let table = match panel {
        Fig2Panel::A | Fig2Panel::C => {
            let axis = if panel == Fig2Panel::A {
                "t0"
            } else {
                "delta1"
            };
            let mut t = Table::new(
                "main",
                columns(&[
                    axis,
                    "abs_a",
                    "abs_b",
                    "continuity_residual",
                    "q",
                    "q_oracle",
                    "abs_dev",
                    "provenance",
                ]),
            );
            t.rows = rows(&grid, |_, x| {
                let (p, t0) = if panel == Fig2Panel::A {
                    (base, x)
                } else {
                    (base.with_delta1(x), config.t0)
                };
                let coeffs = matched_coefficients(&p, t0)
                    .map_err(compute(format_args!("(A, B) at {axis} = {x}")))?;
                let residual =
                    continuity_residual(&p, &coeffs).map_err(compute("continuity residual"))?;
                let q = survival_telegraph_with(&p, &coeffs, variant)
                    .map_err(compute(format_args!("survival at {axis} = {x}")))?
                    .q;
                let oracle = oracle_flip(&p, t0, config)?;
                Ok(vec![
                    x.into(),
                    coeffs.a_coef.norm().into(),
                    coeffs.b_coef.norm().into(),
                    residual.into(),
                    q.into(),
                    oracle.into(),
                    (q - oracle).abs().into(),
                    provenance.as_str().into(),
                ])
            })?;
            t
        }
        Fig2Panel::B => {
            let mut delta0s = vec![0.0];
            if config.delta0 != 0.0 {
                delta0s.push(config.delta0);
            }
            let mut names = vec!["t0".to_string()];
            for d in &delta0s {
                for prefix in ["q", "q_noise_free", "q_oracle", "abs_dev"] {
                    names.push(format!("{prefix}_delta0_{d}"));
                }
            }
            names.push("provenance".into());
            let mut t = Table::new("main", names);
            t.rows = rows(&grid, |_, t0| {
                let mut row = vec![t0.into()];
                for &d in &delta0s {
                    let p = base.with_delta0(d);
                    let q = flip_q(&p, t0, variant)?;
                    let oracle = oracle_flip(&p, t0, config)?;
                    row.push(q.into());
                    row.push(survival_noise_free(&p, variant).q.into());
                    row.push(oracle.into());
                    row.push((q - oracle).abs().into());
                }
                row.push(provenance.as_str().into());
                Ok(row)
            })?;
            t
        }
        Fig2Panel::D => {
            let spec = config.average_spec();
            let mut t = Table::new(
                "main",
                columns(&[
                    "delta1",
                    "q_noise_free",
                    "q_t0_neg_inf",
                    "q_t0",
                    "q_t0_pos_inf",
                    "q_t0_average",
                    "q_oracle",
                    "abs_dev",
                    "provenance",
                ]),
            );
            t.rows = rows(&grid, |_, d1| {
                let p = base.with_delta1(d1);
                let q = flip_q(&p, config.t0, variant)?;
                let avg = average_over_t0(
                    |t0| survival_telegraph_single_flip(&p, t0, variant).map(|r| r.q),
                    &spec,
                )
                .map_err(compute(format_args!(
                    "switch-time average at delta1 = {d1}"
                )))?;
                let oracle = oracle_flip(&p, config.t0, config)?;
                Ok(vec![
                    d1.into(),
                    survival_noise_free(&p, variant).q.into(),
                    flip_q(&p, f64::NEG_INFINITY, variant)?.into(),
                    q.into(),
                    flip_q(&p, f64::INFINITY, variant)?.into(),
                    avg.into(),
                    oracle.into(),
                    (q - oracle).abs().into(),
                    provenance.as_str().into(),
                ])
            })?;
            t
        }
    };
    Ok(Artifact::single(table))
}

/// Probability of changing adiabatic level in the rotated-coupling model.
fn level_transfer(p: &DKParams, t0: f64) -> Result<f64, CliError> {
    survival_gaussian(p, t0, Variant::AsPrinted)
        .map(|r| r.q)
        .map_err(compute(format_args!(
            "level transfer at delta1 = {}, t0 = {t0}",
            p.delta1
        )))
}

fn oracle_transfer(p: &DKParams, t0: f64, config: &RunConfig) -> Result<f64, CliError> {
    gaussian_oracle(p, t0, config.t_max, config.tol)
        .map(|o| o.adiabatic_transfer)
        .map_err(compute(format_args!(
            "oracle at delta1 = {}, t0 = {t0}",
            p.delta1
        )))
}

fn t0_average<F>(f: F, spec: &AverageSpec) -> Result<f64, CliError>
where
    F: Fn(f64) -> Result<f64, CliError> + Sync,
{
    average_over_t0(f, spec).map_err(compute("switch-time average"))
}

/// Fixed quadrature rule as `(t0, J, weight)`: composite Simpson over the
/// switch-time window on `spec.t0_points` nodes (rounded up to odd), times
/// Gauss-Hermite of order `spec.quad_order` over the coupling when `over_j`.
/// Survival is even in `J`, so negative coupling nodes fold onto positive
/// ones. Analytic and oracle integrands evaluated on the same rule differ
/// only by the integrand error.
fn fixed_rule(spec: &AverageSpec, over_j: bool) -> Vec<(f64, Option<f64>, f64)> {
    let n = spec.t0_points + 1 - spec.t0_points % 2;
    let (lo, hi) = spec.t0_window;
    let h = (hi - lo) / (n - 1) as f64;
    let norm = match spec.measure {
        T0Measure::Normalized => hi - lo,
        T0Measure::PerTauC(tau) => tau,
    };
    let couplings: Vec<(Option<f64>, f64)> = if over_j {
        let (x, w) = gauss_hermite(spec.quad_order);
        x.iter()
            .zip(&w)
            .filter(|(xi, _)| **xi >= 0.0)
            .map(|(xi, wi)| {
                let fold = if *xi > 0.0 { 2.0 } else { 1.0 };
                (Some(SQRT_2 * spec.j_sigma * xi), fold * wi / PI.sqrt())
            })
            .collect()
    } else {
        vec![(None, 1.0)]
    };
    (0..n)
        .flat_map(|k| {
            let t0 = lo + h * k as f64;
            let simpson = if k == 0 || k == n - 1 {
                1.0
            } else if k % 2 == 1 {
                4.0
            } else {
                2.0
            };
            couplings
                .iter()
                .map(move |&(j, wj)| (t0, j, simpson * h / 3.0 / norm * wj))
        })
        .collect()
}

fn fixed_average<F>(f: F, spec: &AverageSpec, over_j: bool) -> Result<f64, CliError>
where
    F: Fn(f64, Option<f64>) -> Result<f64, CliError> + Sync,
{
    let terms: Vec<f64> = fixed_rule(spec, over_j)
        .par_iter()
        .map(|&(t0, j, weight)| f(t0, j).map(|v| weight * v))
        .collect::<Result<_, _>>()?;
    Ok(compensated_sum(terms))
}

fn fig3(panel: Fig3Panel, config: &RunConfig) -> Result<Artifact, CliError> {
    let base = params(config)?;
    let grid = config.grid();
    let spec = config.average_spec();
    let stride = config.oracle_stride;
    let checked = |i: usize| stride > 0 && i.is_multiple_of(stride);
    let provenance = Provenance::AnalyticAsPrinted.to_string();
    let table = match panel {
        Fig3Panel::A => {
            let js = &config.j_values;
            let mut names = vec!["delta1".to_string()];
            for prefix in [
                "qbar",
                "fixed_rule_analytic",
                "fixed_rule_oracle",
                "abs_dev",
            ] {
                names.extend(js.iter().map(|j| format!("{prefix}_j_{j}")));
            }
            names.push("provenance".into());
            let mut t = Table::new("main", names);
            t.rows = rows(&grid, |i, d1| {
                let mut q = Vec::new();
                let mut fa = Vec::new();
                let mut fo = Vec::new();
                for &j in js {
                    let p = base.with_delta1(d1).with_j(j);
                    q.push(t0_average(|t0| level_transfer(&p, t0), &spec)?);
                    if checked(i) {
                        fa.push(Some(fixed_average(
                            |t0, _| level_transfer(&p, t0),
                            &spec,
                            false,
                        )?));
                        fo.push(Some(fixed_average(
                            |t0, _| oracle_transfer(&p, t0, config),
                            &spec,
                            false,
                        )?));
                    } else {
                        fa.push(None);
                        fo.push(None);
                    }
                }
                let mut row: Vec<Cell> = vec![d1.into()];
                row.extend(q.iter().map(|&x| Cell::from(x)));
                row.extend(fa.iter().map(|&x| Cell::from(x)));
                row.extend(fo.iter().map(|&x| Cell::from(x)));
                row.extend(
                    fa.iter()
                        .zip(&fo)
                        .map(|(a, o)| Cell::from(a.zip(*o).map(|(a, o)| (a - o).abs()))),
                );
                row.push(provenance.as_str().into());
                Ok(row)
            })?;
            t
        }
        Fig3Panel::B => {
            let mut t = Table::new(
                "main",
                columns(&[
                    "delta1",
                    "mean_qbar",
                    "fixed_rule_analytic",
                    "fixed_rule_oracle",
                    "abs_dev",
                    "provenance",
                ]),
            );
            t.rows = rows(&grid, |i, d1| {
                let p = base.with_delta1(d1);
                let mean = average_over_j(
                    |j| t0_average(|t0| level_transfer(&p.with_j(j), t0), &spec),
                    &spec,
                )
                .map_err(compute(format_args!("coupling average at delta1 = {d1}")))?;
                let (fa, fo) = if checked(i) {
                    let at = |j: Option<f64>| p.with_j(j.unwrap_or(p.j));
                    let a = fixed_average(|t0, j| level_transfer(&at(j), t0), &spec, true)?;
                    let o =
                        fixed_average(|t0, j| oracle_transfer(&at(j), t0, config), &spec, true)?;
                    (Some(a), Some(o))
                } else {
                    (None, None)
                };
                Ok(vec![
                    d1.into(),
                    mean.into(),
                    fa.into(),
                    fo.into(),
                    fa.zip(fo).map(|(a, o)| (a - o).abs()).into(),
                    provenance.as_str().into(),
                ])
            })?;
            t
        }
    };
    Ok(Artifact::single(table))
}

fn with_axis(config: &RunConfig, axis: Axis, x: f64) -> RunConfig {
    let mut c = config.clone();
    match axis {
        Axis::Delta0 => c.delta0 = x,
        Axis::Delta1 => c.delta1 = x,
        Axis::J => c.j = x,
        Axis::T0 => c.t0 = x,
        Axis::TauC => c.tau_c = x,
        Axis::Sigma => c.sigma = x,
    }
    c
}

/// One survival value for `config.operation` at the configured point.
pub fn evaluate(config: &RunConfig) -> Result<SurvivalResult, CliError> {
    let p = params(config)?;
    let v = config.variant;
    let spec = config.average_spec();
    let averaged = |q: f64| SurvivalResult {
        q,
        provenance: v.into(),
        stderr: None,
    };
    let pick = |case: noisydk_core::analytic::SpecialCase| match v {
        Variant::AsPrinted => case.as_printed,
        Variant::Validated => case.validated,
    };
    let op = config.operation;
    Ok(match op {
        Operation::NoiseFree => survival_noise_free(&p, v),
        Operation::AllenEberly => pick(survival_ae(&p).map_err(compute(op))?),
        Operation::RosenZener => pick(survival_rz(&p).map_err(compute(op))?),
        Operation::Telegraph => {
            survival_telegraph_single_flip(&p, config.t0, v).map_err(compute(op))?
        }
        Operation::TelegraphAverage => averaged(
            average_over_t0(
                |t0| survival_telegraph_single_flip(&p, t0, v).map(|r| r.q),
                &spec,
            )
            .map_err(compute(op))?,
        ),
        Operation::Gaussian => survival_gaussian(&p, config.t0, v).map_err(compute(op))?,
        Operation::GaussianAverage => averaged(
            average_over_t0(|t0| survival_gaussian(&p, t0, v).map(|r| r.q), &spec)
                .map_err(compute(op))?,
        ),
        Operation::GaussianJAverage => averaged(
            average_over_j(
                |j| {
                    average_over_t0(
                        |t0| survival_gaussian(&p.with_j(j), t0, v).map(|r| r.q),
                        &spec,
                    )
                },
                &spec,
            )
            .map_err(compute(op))?,
        ),
        Operation::MonteCarlo => monte_carlo_survival(
            &p,
            &config.noise_spec(),
            config.trajectories,
            config.t_max,
            config.tol,
        )
        .map_err(compute(op))?,
        Operation::Oracle => survival_numeric(
            &p,
            &CouplingProfile::Constant { j: p.j },
            config.t_max,
            config.tol,
        )
        .map_err(compute(op))?,
    })
}

fn sweep(config: &RunConfig) -> Result<Artifact, CliError> {
    let axis = config.axis;
    let mut t = Table::new(
        "main",
        vec![
            axis.to_string(),
            "q".into(),
            "stderr".into(),
            "provenance".into(),
        ],
    );
    t.rows = rows(&config.grid(), |_, x| {
        let r = evaluate(&with_axis(config, axis, x))?;
        Ok(vec![
            x.into(),
            r.q.into(),
            r.stderr.into(),
            r.provenance.to_string().into(),
        ])
    })?;
    Ok(Artifact::single(t))
}

/// Tolerance for gated oracle comparisons.
pub const ORACLE_TOL: f64 = 1e-6;
pub const ZERO_COUPLING_TOL: f64 = 1e-12;
pub const CONTINUITY_TOL: f64 = 1e-9;

struct Check {
    formula: &'static str,
    variant: &'static str,
    points: usize,
    max_dev: f64,
    tolerance: f64,
    gated: bool,
}

impl Check {
    fn passed(&self) -> bool {
        self.max_dev < self.tolerance
    }
}

fn max_dev<I: IntoParallelIterator<Item = Result<f64, CliError>>>(
    devs: I,
) -> Result<(usize, f64), CliError> {
    let devs: Vec<f64> = devs.into_par_iter().collect::<Result<_, _>>()?;
    Ok((devs.len(), devs.iter().copied().fold(0.0, f64::max)))
}

/// The oracle grid: `Delta0` in {0, 2, 4}, `Delta1` in 0.5..8, three couplings.
pub fn oracle_grid() -> Vec<(f64, f64, f64)> {
    let mut out = Vec::new();
    for d0 in [0.0, 2.0, 4.0] {
        for k in 1..=16 {
            for j in [0.5, PI / 2.0, 3.0] {
                out.push((d0, 0.5 * k as f64, j));
            }
        }
    }
    out
}

fn verify(config: &RunConfig) -> Result<Outcome, CliError> {
    let t_cap = config.t_cap;
    let constant = |p: &DKParams| {
        survival_numeric(
            p,
            &CouplingProfile::Constant { j: p.j },
            config.t_max,
            config.tol,
        )
        .map(|r| r.q)
        .map_err(compute("constant-coupling oracle"))
    };
    let point = |(d0, d1, j): (f64, f64, f64)| {
        DKParams::new(d0, d1, j, t_cap).map_err(compute("grid point"))
    };
    let grid = oracle_grid();
    let mut checks = Vec::new();

    let nf: Vec<(f64, f64, f64)> = grid
        .par_iter()
        .map(|&g| {
            let p = point(g)?;
            let o = constant(&p)?;
            Ok::<_, CliError>((
                o,
                survival_noise_free(&p, Variant::Validated).q,
                survival_noise_free(&p, Variant::AsPrinted).q,
            ))
        })
        .collect::<Result<_, _>>()?;
    let worst = |f: fn(&(f64, f64, f64)) -> f64| nf.iter().map(f).fold(0.0, f64::max);
    for (variant, max, gated) in [
        ("validated", worst(|r| (r.1 - r.0).abs()), true),
        ("as-printed", worst(|r| (r.2 - r.0).abs()), false),
    ] {
        checks.push(Check {
            formula: "noise_free",
            variant,
            points: nf.len(),
            max_dev: max,
            tolerance: ORACLE_TOL,
            gated,
        });
    }

    for (formula, cases) in [
        (
            "allen_eberly",
            grid.iter()
                .filter(|g| g.0 == 0.0)
                .copied()
                .collect::<Vec<_>>(),
        ),
        (
            "rosen_zener",
            [0.5, 1.0, 2.0, 4.0]
                .iter()
                .flat_map(|&d0| [0.3, 0.5, PI / 2.0, 3.0].map(|j| (d0, 0.0, j)))
                .collect(),
        ),
    ] {
        for (variant, gated) in [(Variant::Validated, true), (Variant::AsPrinted, false)] {
            let (n, max) = max_dev(cases.par_iter().map(|&g| {
                let p = point(g)?;
                let case = if formula == "allen_eberly" {
                    survival_ae(&p)
                } else {
                    survival_rz(&p)
                }
                .map_err(compute(formula))?;
                let q = if variant == Variant::Validated {
                    case.validated.q
                } else {
                    case.as_printed.q
                };
                Ok((q - constant(&p)?).abs())
            }))?;
            let variant = if gated { "validated" } else { "as-printed" };
            checks.push(Check {
                formula,
                variant,
                points: n,
                max_dev: max,
                tolerance: ORACLE_TOL,
                gated,
            });
        }
    }

    let flips: Vec<((f64, f64, f64), f64)> = grid
        .iter()
        .flat_map(|&g| [-2.0, 0.0, 2.0].map(|t0| (g, t0)))
        .collect();
    let tele: Vec<(f64, f64, f64)> = flips
        .par_iter()
        .map(|&(g, t0)| {
            let p = point(g)?;
            let o = oracle_flip(&p, t0, config)?;
            Ok::<_, CliError>((
                o,
                flip_q(&p, t0, Variant::Validated)?,
                flip_q(&p, t0, Variant::AsPrinted)?,
            ))
        })
        .collect::<Result<_, _>>()?;
    let worst = |f: fn(&(f64, f64, f64)) -> f64| tele.iter().map(f).fold(0.0, f64::max);
    for (variant, max, gated) in [
        ("validated", worst(|r| (r.1 - r.0).abs()), true),
        ("as-printed", worst(|r| (r.2 - r.0).abs()), false),
    ] {
        checks.push(Check {
            formula: "telegraph_single_flip",
            variant,
            points: tele.len(),
            max_dev: max,
            tolerance: ORACLE_TOL,
            gated,
        });
    }

    let gauss: Vec<(f64, f64, f64)> = [3.0, 4.0, 5.0, 6.0]
        .iter()
        .flat_map(|&d1| {
            [0.5, 1.0, 2.0]
                .iter()
                .flat_map(move |&j| [-1.0, 0.0, 1.0].map(|t0| (d1, j, t0)))
        })
        .collect();
    let gauss_rows: Vec<(f64, Option<f64>)> = gauss
        .par_iter()
        .map(|&(d1, j, t0)| {
            let p = point((4.0, d1, j))?;
            let o = gaussian_oracle(&p, t0, config.t_max, config.tol)
                .map_err(compute("rotated-coupling oracle"))?;
            let printed = level_transfer(&p, t0)?;
            let validated = match survival_gaussian(&p, t0, Variant::Validated) {
                Ok(r) => o.diabatic_survival.map(|s| (r.q - s).abs()),
                Err(noisydk_core::AnalyticError::AmbiguousLabel) => None,
                Err(e) => return Err(CliError::Compute(e.to_string())),
            };
            Ok(((printed - o.adiabatic_transfer).abs(), validated))
        })
        .collect::<Result<_, _>>()?;
    checks.push(Check {
        formula: "gaussian_level_transfer",
        variant: "as-printed",
        points: gauss_rows.len(),
        max_dev: gauss_rows.iter().map(|r| r.0).fold(0.0, f64::max),
        tolerance: ORACLE_TOL,
        gated: true,
    });
    let defined: Vec<f64> = gauss_rows.iter().filter_map(|r| r.1).collect();
    checks.push(Check {
        formula: "gaussian_survival",
        variant: "validated",
        points: defined.len(),
        max_dev: defined.iter().copied().fold(0.0, f64::max),
        tolerance: ORACLE_TOL,
        gated: true,
    });

    let zero = config
        .params()
        .map_err(compute("configured parameters"))?
        .with_j(0.0);
    let mut zero_devs = vec![
        survival_noise_free(&zero, Variant::Validated).q,
        survival_ae(&zero.with_delta0(0.0))
            .map_err(compute("allen_eberly"))?
            .validated
            .q,
        survival_rz(&zero.with_delta1(0.0))
            .map_err(compute("rosen_zener"))?
            .validated
            .q,
        flip_q(&zero, 0.0, Variant::Validated)?,
    ];
    if zero.delta1 != 0.0 && zero.delta0.abs() != zero.delta1.abs() {
        zero_devs.push(
            survival_gaussian(&zero, 0.0, Variant::Validated)
                .map_err(compute("gaussian"))?
                .q,
        );
    }
    checks.push(Check {
        formula: "zero_coupling",
        variant: "validated",
        points: zero_devs.len(),
        max_dev: zero_devs
            .iter()
            .map(|q| (q - 1.0).abs())
            .fold(0.0, f64::max),
        tolerance: ZERO_COUPLING_TOL,
        gated: true,
    });

    let p = params(config)?;
    let t0s: Vec<f64> = (0..41)
        .map(|k| -4.0 * t_cap + 0.2 * t_cap * k as f64)
        .collect();
    let (n, max) = max_dev(t0s.par_iter().map(|&t0| {
        let c = matched_coefficients(&p, t0).map_err(compute("(A, B)"))?;
        continuity_residual(&p, &c).map_err(compute("continuity residual"))
    }))?;
    checks.push(Check {
        formula: "matched_continuity",
        variant: "validated",
        points: n,
        max_dev: max,
        tolerance: CONTINUITY_TOL,
        gated: true,
    });

    let passed = checks.iter().all(|c| !c.gated || c.passed());
    let mut report = Table::new(
        "checks",
        columns(&[
            "formula",
            "variant",
            "points",
            "max_abs_dev",
            "tolerance",
            "gated",
            "status",
        ]),
    );
    for c in &checks {
        let status = match (c.gated, c.passed()) {
            (_, true) => "pass",
            (true, false) => "fail",
            (false, false) => "deviates",
        };
        report.push(vec![
            c.formula.into(),
            c.variant.into(),
            (c.points as f64).into(),
            c.max_dev.into(),
            c.tolerance.into(),
            (if c.gated { "yes" } else { "no" }).into(),
            status.into(),
        ]);
    }

    let mut ledger = Table::new(
        "ledger",
        columns(&[
            "formula",
            "forcing_limit",
            "delta0",
            "delta1",
            "j",
            "t_cap",
            "t0",
            "printed",
            "validated",
            "deviation",
        ]),
    );
    for e in discrepancy_ledger(config.delta0, config.delta1, t_cap)
        .map_err(compute("discrepancy ledger"))?
    {
        ledger.push(vec![
            e.formula.as_str().into(),
            e.forcing_limit.as_str().into(),
            e.params.delta0.into(),
            e.params.delta1.into(),
            e.params.j.into(),
            e.params.t_cap.into(),
            e.t0.into(),
            e.printed.into(),
            e.validated.into(),
            e.deviation().into(),
        ]);
    }
    Ok(Outcome {
        artifact: Artifact {
            tables: vec![report, ledger],
        },
        passed,
    })
}
