//! Acceptance run: every criterion at its stated tolerance, one line each.
//!
//! The criteria run one after another inside a single test so their wall
//! clock budgets are not shared with other tests.

use std::f64::consts::TAU;
use std::fs;
use std::io::Write as _;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use amvp_core::amvp::{first_term_scale, fit_ladder, hodographic_su_mu, ladder_radii, rung_ladder, DecayOutcome};
use amvp_core::crosscheck::{compare_fields, minimize_energy, GridProblem};
use amvp_core::decay::{decay_fit_above, noise_floor};
use amvp_core::harness::campaign::{FIXED_ALPHAS, PLAPLACIAN_STEPS};
use amvp_core::harness::output::{CSV_FILE, REPORT_FILE};
use amvp_core::harness::{emit_outputs, run_campaign, CampaignConfig};
use amvp_core::hodograph::{CoefficientSet, HodographModel, PolarPoint};
use amvp_core::inequalities::{
    check_first_term_injectivity, check_power_chord, comparable_pair_ratios, power_chord_infimum,
};
use amvp_core::pharmonic::{eval_u, residual_decay, singular_gap};
use amvp_core::spectral::{amvp_weights, cubic_n1, exponent_ratio, spectral_sweep, ProblemParams, SweepGrid};
use amvp_core::Result;

struct Outcome {
    passed: bool,
    summary: String,
}

impl Outcome {
    fn new(passed: bool, summary: impl Into<String>) -> Self {
        Self {
            passed,
            summary: summary.into(),
        }
    }
}

fn within(elapsed: Duration, budget_secs: u64) -> bool {
    elapsed <= Duration::from_secs(budget_secs)
}

fn rng(stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(42);
    r.set_stream(stream);
    r
}

/// `A_{n+1} = 1` plus a small second coefficient, so the expansion has a
/// genuine correction term.
fn two_term(p: f64, n: u32) -> Result<HodographModel> {
    let params = ProblemParams::new(p, n)?;
    HodographModel::new(CoefficientSet::new(
        params,
        vec![(n + 1, Complex64::new(1.0, 0.0)), (n + 2, Complex64::new(0.05, 0.0))],
    )?)
}

fn spectral_sweep_criterion() -> Result<Outcome> {
    let start = Instant::now();
    let grid = SweepGrid::default();
    let s = spectral_sweep(&grid);
    let cubic = cubic_n1(1.0).abs();
    let elapsed = start.elapsed();
    let passed = s.bound_violations == 0
        && s.min_epsilon_margin > 0.0
        && s.min_exponent_ratio > 2.0
        && cubic <= 1e-12
        && within(elapsed, 5);
    Ok(Outcome::new(
        passed,
        format!(
            "{} triples on {}x{}x{}, {} violations, min ratio {:.6}, min eps margin {:.3e}, |cubic(1)| {cubic:.1e}, {elapsed:.2?}",
            s.triples_checked,
            grid.p_points,
            grid.n_max,
            grid.k_span,
            s.bound_violations,
            s.min_exponent_ratio,
            s.min_epsilon_margin
        ),
    ))
}

fn power_chord_criterion() -> Result<Outcome> {
    let start = Instant::now();
    let upper = check_power_chord(&mut rng(1), 100_000, 50);
    let mut infimum = f64::INFINITY;
    for (i, lambda) in [0.5, 1.37, 2.2].into_iter().enumerate() {
        let r = power_chord_infimum(&mut rng(10 + i as u64), lambda, 4.0, 200, 100_000);
        infimum = infimum.min(r.min);
    }
    let elapsed = start.elapsed();
    Ok(Outcome::new(
        upper.holds() && infimum >= 1e-6 && within(elapsed, 5),
        format!(
            "upper: {} violations in {}; lower infimum {infimum:.4e}; {elapsed:.2?}",
            upper.violations, upper.samples
        ),
    ))
}

fn injectivity_criterion() -> Result<Outcome> {
    let start = Instant::now();
    let mut violations = 0;
    let mut comparable_min = f64::INFINITY;
    let mut stream = 100;
    for p in [2.0, 3.0, 12.0] {
        for n in 1..=3 {
            let params = ProblemParams::new(p, n)?;
            // a non-unit leading coefficient exercises the rotation and scaling
            let model = HodographModel::new(CoefficientSet::single(params, Complex64::new(0.7, -0.4))?)?;
            stream += 1;
            violations += check_first_term_injectivity(&mut rng(stream), &model, 100_000).violations;
            stream += 1;
            comparable_min = comparable_min.min(comparable_pair_ratios(&mut rng(stream), &model, 4.0, 10_000).min);
        }
    }
    let elapsed = start.elapsed();
    Ok(Outcome::new(
        violations == 0 && comparable_min > 0.0 && within(elapsed, 10),
        format!(
            "{violations} violations over 9 models x 1e5 pairs; comparable infimum {comparable_min:.4e}; {elapsed:.2?}"
        ),
    ))
}

fn round_trip_criterion() -> Result<Outcome> {
    let (mut err_a, mut err_h, mut err_u) = (0.0f64, 0.0f64, 0.0f64);
    let mut models = 0;
    for p in [1.5, 2.0, 3.0, 12.0] {
        for n in [1, 2] {
            let model = two_term(p, n)?;
            models += 1;
            let mut r = rng(200 + models);
            let outer = 0.9 * model.validity_radius();
            for _ in 0..1000 {
                let xi = PolarPoint::new(
                    outer * r.random_range((1e-4f64).ln()..0.0).exp(),
                    r.random_range(0.0..TAU),
                );
                err_a = err_a.max((model.invert_a(model.eval_a(xi))?.to_complex() - xi.to_complex()).norm());
                let z = model.eval_h(xi)?;
                err_h = err_h.max((model.invert_h(z)?.to_complex() - xi.to_complex()).norm());
                err_u = err_u.max((eval_u(&model, z)? - model.eval_u_tilde(xi)?).abs());
            }
        }
    }
    Ok(Outcome::new(
        err_a <= 1e-10 && err_h <= 1e-10 && err_u <= 1e-9,
        format!("{models} models x 1e3 points: first term {err_a:.2e}, series {err_h:.2e}, pull-back {err_u:.2e}"),
    ))
}

fn plaplacian_criterion() -> Result<Outcome> {
    let mut min_slope = f64::INFINITY;
    let mut max_control = f64::NEG_INFINITY;
    let mut points = 0;
    for p in [1.5, 3.0, 12.0] {
        for n in [1, 2] {
            let model = two_term(p, n)?;
            for j in 0..16 {
                let f = if j % 2 == 0 { 0.25 } else { 0.5 };
                let z = Complex64::from_polar(f * model.plane_radius(), 0.3 + TAU * j as f64 / 16.0);
                points += 1;
                let slope = residual_decay(&model, z, &PLAPLACIAN_STEPS, p)?.slope();
                min_slope = min_slope.min(slope.unwrap_or(f64::NEG_INFINITY));
                let control = residual_decay(&model, z, &PLAPLACIAN_STEPS, p + 3.0)?.slope();
                max_control = max_control.max(control.unwrap_or(f64::INFINITY));
            }
        }
    }
    Ok(Outcome::new(
        min_slope >= 1.8 && max_control < 0.5,
        format!("{points} points: min slope {min_slope:.4}, wrong-p max slope {max_control:.4}"),
    ))
}

fn hodographic_disc_criterion() -> Result<Outcome> {
    let start = Instant::now();
    let mut worst = 0.0f64;
    for p in [1.5, 2.0, 3.0, 9.52, 12.0, 20.0] {
        for n in [1, 2] {
            let model = two_term(p, n)?;
            for big_r in [0.05, 0.1] {
                let (su, mu) = hodographic_su_mu(&model, big_r, 128)?;
                worst = worst.max(su.abs().max(mu.abs()) / first_term_scale(&model, big_r));
            }
        }
    }
    let elapsed = start.elapsed();
    Ok(Outcome::new(
        worst <= 1e-8 && within(elapsed, 10),
        format!("largest relative midrange/mean {worst:.3e}; {elapsed:.2?}"),
    ))
}

fn singular_gap_criterion() -> Result<Outcome> {
    let mut worst_margin = f64::INFINITY;
    let mut lines = Vec::new();
    for p in [2.0, 3.0, 12.0] {
        for n in [1, 2] {
            let model = two_term(p, n)?;
            let ratio = exponent_ratio(model.params());
            let radii = ladder_radii(0.3 * model.plane_radius(), 9);
            let mut values = Vec::with_capacity(radii.len());
            for &r in &radii {
                let mut m = 0.0f64;
                for j in 0..16 {
                    m = m.max(singular_gap(
                        &model,
                        Complex64::from_polar(r, 0.1 + TAU * j as f64 / 16.0),
                    )?);
                }
                values.push(m);
            }
            let floors: Vec<f64> = radii
                .iter()
                .map(|&r| noise_floor(first_term_scale(&model, r)))
                .collect();
            let slope = decay_fit_above(&radii, &values, &floors)?.slope;
            worst_margin = worst_margin.min(slope - ratio);
            lines.push(format!("p={p} n={n}: {slope:.3}/{ratio:.3}"));
        }
    }
    Ok(Outcome::new(
        worst_margin >= -0.1,
        format!(
            "slope/ratio {}; worst slope - ratio {worst_margin:.4}",
            lines.join(", ")
        ),
    ))
}

fn critical_amvp_criterion() -> Result<Outcome> {
    let mut passed = true;
    let mut lines = Vec::new();
    for p in [1.5, 3.0, 9.52, 12.0, 20.0] {
        let start = Instant::now();
        let (wa, wb) = amvp_weights(p);
        let swap_control = p != 2.0 && p != 6.0;
        let mut critical_margin = f64::INFINITY;
        let mut smooth = f64::INFINITY;
        let mut control = f64::NEG_INFINITY;
        for n in [1, 2] {
            let model = two_term(p, n)?;
            let ratio = exponent_ratio(model.params());
            let pr = model.plane_radius();
            let rungs = rung_ladder(
                |z| eval_u(&model, z),
                Complex64::new(0.0, 0.0),
                &ladder_radii(0.3 * pr, 9),
                32,
            )?;
            for alpha in FIXED_ALPHAS.into_iter().chain([wa]) {
                // a vanishing residual would show nothing about the rate here
                let slope = fit_ladder(&rungs, alpha)?.slope().unwrap_or(f64::NEG_INFINITY);
                critical_margin = critical_margin.min(slope - ratio);
            }
            for j in 0..8 {
                let z0 = Complex64::from_polar(0.5 * pr, 0.3 + TAU * j as f64 / 8.0);
                let radii = ladder_radii(0.3 * 0.5 * pr, 9);
                let rungs = rung_ladder(|z| eval_u(&model, z), z0, &radii, 32)?;
                smooth = smooth.min(fit_ladder(&rungs, wa)?.slope().unwrap_or(f64::INFINITY));
                if swap_control {
                    let swapped = match fit_ladder(&rungs, wb)? {
                        DecayOutcome::Fitted(f) => f.slope,
                        DecayOutcome::Vanishing { .. } => f64::INFINITY,
                    };
                    control = control.max(swapped);
                }
            }
        }
        let elapsed = start.elapsed();
        let ok = critical_margin >= -0.15 && smooth > 2.0 && control <= 2.15 && within(elapsed, 120);
        passed &= ok;
        lines.push(format!(
            "p={p}: critical slope-ratio {critical_margin:+.3}, smooth {smooth:.3}, swapped {control:.3}, {elapsed:.1?}"
        ));
    }
    Ok(Outcome::new(passed, lines.join("; ")))
}

fn crosscheck_criterion() -> Result<Outcome> {
    let start = Instant::now();
    let mut passed = true;
    let mut lines = Vec::new();
    for p in [2.0, 3.0] {
        let model = two_term(p, 1)?;
        let companion = two_term(p + 2.0, 1)?;
        let pr = model.plane_radius();
        let (center, half) = (Complex64::new(0.45 * pr, 0.0), 0.2 * pr);
        let mut errors = Vec::new();
        let mut controls = Vec::new();
        for cells in [64, 128] {
            let problem = GridProblem::from_model(&model, center, half, cells, p)?;
            errors.push(compare_fields(&minimize_energy(&problem, 1e-10, 200)?, &model)?);
            let control = GridProblem::from_model(&companion, center, half, cells, p)?;
            controls.push(compare_fields(&minimize_energy(&control, 1e-10, 200)?, &companion)?);
        }
        let ratio = errors[0] / errors[1];
        let control_ratio = controls[0] / controls[1];
        let ok = ratio >= 1.5 && control_ratio < 1.5 && controls[1] > 10.0 * errors[1];
        passed &= ok;
        lines.push(format!(
            "p={p}: error {:.3e} -> {:.3e} (ratio {ratio:.3}), control {:.3e} -> {:.3e}",
            errors[0], errors[1], controls[0], controls[1]
        ));
    }
    let elapsed = start.elapsed();
    passed &= within(elapsed, 180);
    Ok(Outcome::new(passed, format!("{}; {elapsed:.1?}", lines.join("; "))))
}

fn reproducibility_criterion() -> Result<Outcome> {
    let config = CampaignConfig::new(3.0, 1, vec![(2, 1.0, 0.0), (3, 0.05, 0.0)]);
    let dirs = [
        tempfile::tempdir().expect("tempdir"),
        tempfile::tempdir().expect("tempdir"),
    ];
    for dir in &dirs {
        emit_outputs(&run_campaign(&config), dir.path())?;
    }
    let read = |i: usize, name: &str| fs::read(dirs[i].path().join(name)).expect("report file");
    let same_json = read(0, REPORT_FILE) == read(1, REPORT_FILE);
    let same_csv = read(0, CSV_FILE) == read(1, CSV_FILE);
    Ok(Outcome::new(
        same_json && same_csv,
        format!("report.json identical: {same_json}, amvp_decay.csv identical: {same_csv}"),
    ))
}

#[test]
fn acceptance_criteria() {
    type Criterion = (&'static str, fn() -> Result<Outcome>);
    let criteria: [Criterion; 10] = [
        ("spectral sweep", spectral_sweep_criterion),
        ("power-chord inequalities", power_chord_criterion),
        ("first-term injectivity", injectivity_criterion),
        ("round trips and pull-back", round_trip_criterion),
        ("p-Laplacian certificate", plaplacian_criterion),
        ("hodographic disc symmetry", hodographic_disc_criterion),
        ("singular expansion rate", singular_gap_criterion),
        ("AMVP at the critical point", critical_amvp_criterion),
        ("energy crosscheck", crosscheck_criterion),
        ("reproducibility", reproducibility_criterion),
    ];
    let mut failed = Vec::new();
    for (i, (name, run)) in criteria.iter().enumerate() {
        let outcome = run().unwrap_or_else(|e| Outcome::new(false, format!("error: {e}")));
        let status = if outcome.passed { "PASS" } else { "FAIL" };
        // written to the handle directly so the line shows even when libtest captures output
        let mut out = std::io::stdout().lock();
        let _ = writeln!(out, "criterion {:2} {status} {name}: {}", i + 1, outcome.summary);
        let _ = out.flush();
        if !outcome.passed {
            failed.push(i + 1);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
