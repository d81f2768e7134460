use std::fs;

use amvp_core::amvp::DecayOutcome;
use amvp_core::harness::output::{decay_csv, load_report, report_json, CSV_FILE, CSV_HEADER, REPORT_FILE, SVG_FILE};
use amvp_core::harness::{emit_outputs, run_campaign, CampaignConfig, Status};

/// A campaign small enough for a unit-speed test run.
fn quick(p: f64, n: u32, coefficients: Vec<(u32, f64, f64)>) -> CampaignConfig {
    let mut c = CampaignConfig::new(p, n, coefficients);
    c.sampling.inequality_samples = 2000;
    c.sampling.round_trip_points = 100;
    c.ladder.probes = 4;
    c.crosscheck.cells = vec![16, 32];
    c
}

/// `(alpha, slope)` from each legend label of the plot; `None` slopes mark
/// vanishing series.
fn svg_labels(svg: &str) -> Vec<(f64, Option<f64>)> {
    svg.split(r#"<text class="label""#)
        .skip(1)
        .map(|chunk| {
            let text = &chunk[chunk.find('>').unwrap() + 1..chunk.find("</text>").unwrap()];
            let field = |key: &str| {
                text.split_whitespace()
                    .find_map(|w| w.strip_prefix(key))
                    .map(|v| v.parse::<f64>().unwrap())
            };
            (field("alpha=").unwrap(), field("slope="))
        })
        .collect()
}

#[test]
fn identity_model_passes_with_residuals_at_rounding_level() {
    let report = run_campaign(&quick(2.0, 1, vec![(2, 1.0, 0.0)]));
    let failed: Vec<_> = report.records.iter().filter(|r| !r.passed()).map(|r| &r.name).collect();
    assert!(failed.is_empty(), "{failed:?}");
    assert_eq!(report.critical.len(), 6);
    for s in &report.critical {
        assert!(matches!(s.outcome, DecayOutcome::Vanishing { .. }));
        assert!(s.residuals.iter().zip(&s.floors).all(|(r, f)| r.abs() <= *f));
    }
    let csv = decay_csv(&report);
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some(CSV_HEADER));
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 6 * report.config.ladder.rungs);
    assert!(rows.iter().all(|r| r.len() == 4 && r[3].is_empty()));
}

#[test]
fn nonlinear_campaign_plot_matches_report() {
    let report = run_campaign(&quick(3.0, 1, vec![(2, 1.0, 0.0), (3, 0.05, 0.02)]));
    let failed: Vec<_> = report.records.iter().filter(|r| !r.passed()).map(|r| &r.name).collect();
    assert!(failed.is_empty(), "{failed:?}");
    assert_eq!(report.overall, Status::Pass);

    let dir = tempfile::tempdir().unwrap();
    emit_outputs(&report, dir.path()).unwrap();
    let svg = fs::read_to_string(dir.path().join(SVG_FILE)).unwrap();
    let labels = svg_labels(&svg);
    assert_eq!(labels.len(), report.critical.len());
    for ((alpha, slope), series) in labels.iter().zip(&report.critical) {
        assert!((alpha - series.alpha).abs() <= 5e-5);
        let fitted = series.outcome.slope().expect("multi-term residuals decay visibly");
        assert!((slope.unwrap() - fitted).abs() <= 5e-5);
    }

    let csv = fs::read_to_string(dir.path().join(CSV_FILE)).unwrap();
    let windows: Vec<f64> = csv
        .lines()
        .skip(1)
        .filter_map(|l| {
            l.split(',')
                .nth(3)
                .filter(|w| !w.is_empty())
                .map(|w| w.parse().unwrap())
        })
        .collect();
    assert!(!windows.is_empty());
    let ratio = report.model.as_ref().unwrap().exponent_ratio;
    // local slopes settle at the exponent ratio or, for alpha = 0, above it
    assert!(windows.iter().all(|w| *w > ratio - 0.2), "{windows:?}");
}

#[test]
fn saved_report_renders_identically() {
    let mut config = quick(2.5, 2, vec![(3, 1.0, 0.0), (4, 0.05, 0.0)]);
    config.crosscheck.enabled = false;
    let report = run_campaign(&config);
    let dir = tempfile::tempdir().unwrap();
    emit_outputs(&report, dir.path()).unwrap();
    let loaded = load_report(&dir.path().join(REPORT_FILE)).unwrap();
    assert_eq!(
        report_json(&loaded).unwrap(),
        fs::read_to_string(dir.path().join(REPORT_FILE)).unwrap()
    );
    let again = tempfile::tempdir().unwrap();
    emit_outputs(&loaded, again.path()).unwrap();
    for name in [REPORT_FILE, CSV_FILE, SVG_FILE] {
        assert_eq!(
            fs::read(dir.path().join(name)).unwrap(),
            fs::read(again.path().join(name)).unwrap(),
            "{name}"
        );
    }
}

#[test]
fn invalid_model_is_reported_not_raised() {
    // A_{n+1} = 0 is not a valid coefficient set; validation is bypassed here
    let report = run_campaign(&CampaignConfig::new(3.0, 1, vec![(2, 0.0, 0.0), (3, 1.0, 0.0)]));
    assert_eq!(report.overall, Status::Fail);
    assert!(report.record("certified-region").is_some_and(|r| !r.passed()));
}

#[test]
fn config_documents() {
    let c = CampaignConfig::from_json(
        r#"{"p": 4, "n": 2, "coefficients": [[3, 1, 0], [5, 0.1, -0.2]], "ladder": {"rungs": 6}, "seed": 7}"#,
    )
    .unwrap();
    assert_eq!(c.coefficients, vec![(3, 1.0, 0.0), (5, 0.1, -0.2)]);
    assert_eq!(c.ladder.rungs, 6);
    assert_eq!(c.ladder.resolution, 32);
    assert_eq!(c.seed, 7);
    assert!(
        CampaignConfig::from_json(r#"{"p": 4, "n": 2, "coefficients": [[3, 1, 0]], "ladder": {"rung": 6}}"#).is_err()
    );
    assert!(CampaignConfig::from_json(r#"{"p": 4, "n": 2, "coefficients": [[2, 1, 0]]}"#).is_err());
    assert!(CampaignConfig::from_json(r#"{"p": 0.5, "n": 1, "coefficients": [[2, 1, 0]]}"#).is_err());
}
