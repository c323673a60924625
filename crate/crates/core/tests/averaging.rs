//! Ensemble averages over switch times, coupling amplitudes and trajectories.

use std::f64::consts::PI;

use noisydk_core::analytic::{survival_noise_free, survival_telegraph_single_flip, Variant};
use noisydk_core::averaging::{average_over_j, average_over_t0, monte_carlo_survival, AverageSpec};
use noisydk_core::model::DKParams;
use noisydk_core::noise::{NoiseKind, NoiseSpec};

const T_MAX: f64 = 25.0;

fn figure_params() -> DKParams {
    DKParams::unit(4.0, 5.0, PI / 2.0).unwrap()
}

#[test]
fn switch_time_average_matches_dense_simpson() {
    let p = figure_params();
    let q = |t0: f64| survival_telegraph_single_flip(&p, t0, Variant::Validated).map(|r| r.q);
    let spec = AverageSpec {
        tol: 1e-9,
        ..AverageSpec::default()
    };
    let avg = average_over_t0(q, &spec).unwrap();
    let n = 2000;
    let h = 10.0 / n as f64;
    let simpson: f64 = (0..=n)
        .map(|k| {
            let w = if k == 0 || k == n {
                1.0
            } else if k % 2 == 1 {
                4.0
            } else {
                2.0
            };
            w * q(-5.0 + h * k as f64).unwrap()
        })
        .sum::<f64>()
        * h
        / 3.0
        / 10.0;
    assert!((avg - simpson).abs() < 1e-8, "{avg} vs {simpson}");
    // a flip near the transition changes the outcome
    let q_nf = survival_noise_free(&p, Variant::Validated).q;
    assert!((avg - q_nf).abs() > 1e-3);
}

#[test]
fn switch_time_average_sits_below_noise_free_up_to_delta1_4() {
    for d1 in [3.5, 3.75, 4.0] {
        let p = DKParams::unit(4.0, d1, PI / 2.0).unwrap();
        let q = |t0: f64| survival_telegraph_single_flip(&p, t0, Variant::Validated).map(|r| r.q);
        let avg = average_over_t0(q, &AverageSpec::default()).unwrap();
        let q_nf = survival_noise_free(&p, Variant::Validated).q;
        assert!(avg < q_nf, "delta1 = {d1}: {avg} vs {q_nf}");
    }
}

#[test]
fn amplitude_average_of_a_quadratic_is_exact() {
    // E[(1 + sigma x)^2] = 1 + sigma^2 for standard normal x
    let spec = AverageSpec {
        j_sigma: 0.7,
        tol: 1e-12,
        ..AverageSpec::default()
    };
    let got = average_over_j(
        |j| Ok::<_, std::convert::Infallible>((1.0 + j) * (1.0 + j)),
        &spec,
    )
    .unwrap();
    assert!((got - 1.49).abs() < 1e-12, "{got}");
}

#[test]
fn monte_carlo_error_scales_as_inverse_root_n() {
    let p = figure_params();
    let spec = NoiseSpec::new(NoiseKind::Telegraph, 1.0, PI / 2.0, 17).unwrap();
    let small = monte_carlo_survival(&p, &spec, 100, T_MAX, 1e-8).unwrap();
    let large = monte_carlo_survival(&p, &spec, 400, T_MAX, 1e-8).unwrap();
    let ratio = small.stderr.unwrap() / large.stderr.unwrap();
    assert!((ratio - 2.0).abs() < 0.5, "{ratio}");
    let gap = (small.q - large.q).abs();
    assert!(gap < 4.0 * small.stderr.unwrap(), "{gap}");
}

#[test]
fn monte_carlo_is_independent_of_worker_count() {
    let p = figure_params();
    let spec = NoiseSpec::new(NoiseKind::GaussianOu, 2.0, 1.0, 5).unwrap();
    let run = |workers: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .unwrap()
            .install(|| monte_carlo_survival(&p, &spec, 24, 15.0, 1e-8).unwrap())
    };
    let one = run(1);
    let four = run(4);
    assert_eq!(one.q.to_bits(), four.q.to_bits());
    assert_eq!(
        one.stderr.unwrap().to_bits(),
        four.stderr.unwrap().to_bits()
    );
}
