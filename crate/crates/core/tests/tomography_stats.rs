use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sdt_core::expsim::{simulate_counts, CountMode, NoiseModel};
use sdt_core::pipeline::{analyze_counts, run_pipeline, PipelineConfig};
use sdt_core::protocols::{EquimodularPhases, REFERENCE_TARGETS};
use sdt_core::tomography::{write_report_csv, MleOptions, ReportRow};

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2])
    }
}

fn row(i: usize) -> EquimodularPhases {
    EquimodularPhases::from_degrees(&REFERENCE_TARGETS[i].1).unwrap()
}

#[test]
fn fidelity_improves_with_shots() {
    let mut prev = 0.0;
    for shots in [100, 1_000, 10_000, 100_000] {
        let cfg = PipelineConfig {
            shots,
            ..PipelineConfig::default()
        };
        let fids = (0..20)
            .map(|s| {
                run_pipeline(&row(2), &cfg, &mut ChaCha8Rng::seed_from_u64(s))
                    .unwrap()
                    .fidelity
            })
            .collect();
        let m = median(fids);
        assert!(m >= prev, "median fidelity fell to {m} at {shots} shots");
        prev = m;
    }
}

#[test]
fn noiseless_analytic_batch_covers_all_targets() {
    let cfg = PipelineConfig {
        mode: CountMode::Analytic,
        ..PipelineConfig::default()
    };
    let rows: Vec<ReportRow> = REFERENCE_TARGETS
        .iter()
        .enumerate()
        .map(|(i, (label, _))| {
            run_pipeline(&row(i), &cfg, &mut ChaCha8Rng::seed_from_u64(0))
                .unwrap()
                .report_row()
                .with_label(label.to_string())
        })
        .collect();
    assert_eq!(rows.len(), 9);
    for r in &rows {
        assert_eq!(format!("{:.1}", r.fidelity_percent()), "100.0");
        let measured: Vec<String> = r.measured_deg.iter().map(|x| format!("{x:.1}")).collect();
        let target: Vec<String> = r.target_deg.iter().map(|x| format!("{x:.1}")).collect();
        assert_eq!(measured, target);
    }
    let mut buf = Vec::new();
    write_report_csv(&rows, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert_eq!(text.lines().count(), 10);
    assert!(text.contains("\ne,26,202,145,26.0,202.0,145.0,100.0\n"));
}

#[test]
fn binomial_likelihood_agrees_with_gaussian() {
    let p = row(6);
    let recs = simulate_counts(
        &p,
        &NoiseModel::crosstalk(0.02).unwrap(),
        50_000,
        CountMode::Sampled,
        &mut ChaCha8Rng::seed_from_u64(3),
    )
    .unwrap();
    let g = analyze_counts(&recs, None, &MleOptions::default()).unwrap();
    let b = analyze_counts(
        &recs,
        None,
        &MleOptions {
            likelihood: sdt_core::tomography::Likelihood::Binomial,
            ..MleOptions::default()
        },
    )
    .unwrap();
    for (x, y) in g.estimate.degrees().iter().zip(b.estimate.degrees()) {
        assert!((x - y).abs() < 0.5, "{x} vs {y}");
    }
}
