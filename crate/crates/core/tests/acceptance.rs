//! Acceptance gate. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails. Tolerances are pinned here, not in the library.

use std::f64::consts::{E, PI, TAU};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sdt_core::expsim::{fringe_scan, setting_probability, tomography_counts, CountMode, NoiseModel};
use sdt_core::infogeo::*;
use sdt_core::pipeline::{run_pipeline, PipelineConfig};
use sdt_core::protocols::*;
use sdt_core::qcore::{fidelity, random_pure_state, DensityMatrix};
use sdt_core::tomography::{mle_reconstruct, MleOptions};

struct Outcome {
    id: &'static str,
    title: &'static str,
    pass: bool,
    detail: String,
}

fn outcome(id: &'static str, title: &'static str, pass: bool, detail: String) -> Outcome {
    Outcome {
        id,
        title,
        pass,
        detail,
    }
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let t = Instant::now();
    let v = f();
    (v, t.elapsed())
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2])
    }
}

fn angle_error_deg(a: f64, b: f64) -> f64 {
    ((a - b).rem_euclid(360.0) + 180.0).rem_euclid(360.0) - 180.0
}

fn targets() -> Vec<EquimodularPhases> {
    REFERENCE_TARGETS
        .iter()
        .map(|(_, t)| EquimodularPhases::from_degrees(t).unwrap())
        .collect()
}

fn c1_ququart_limit() -> Outcome {
    let exact = classical_fidelity_equimodular(4).unwrap();
    let ((strategy, integrand), elapsed) = timed(|| {
        let mut a = ChaCha8Rng::seed_from_u64(101);
        let mut b = ChaCha8Rng::seed_from_u64(102);
        (
            mc_classical_fidelity_equimodular(4, 1_000_000, McEstimator::Strategy, &mut a).unwrap(),
            mc_classical_fidelity_equimodular(4, 1_000_000, McEstimator::Integrand, &mut b).unwrap(),
        )
    });
    let z_s = (strategy.value - exact).abs() / strategy.standard_error;
    let z_i = (integrand.value - exact).abs() / integrand.standard_error;
    let combined = strategy.standard_error.hypot(integrand.standard_error);
    let z_pair = (strategy.value - integrand.value).abs() / combined;
    let pass = exact == 28.0 / 64.0 && z_s < 4.0 && z_i < 4.0 && z_pair < 3.0 && elapsed < Duration::from_secs(5);
    outcome(
        "1",
        "equimodular ququart classical limit",
        pass,
        format!(
            "closed form {exact}; MC strategy {:.5} ± {:.5} ({z_s:.2}σ), integrand {:.5} ± {:.5} ({z_i:.2}σ), pair {z_pair:.2}σ; {:.2?}",
            strategy.value, strategy.standard_error, integrand.value, integrand.standard_error, elapsed
        ),
    )
}

fn c2_qubit_limit() -> Outcome {
    let f = classical_fidelity_general(2).unwrap();
    let gap = 1.0 - f;
    let pass = (f - 2.0 / 3.0).abs() <= f64::EPSILON && (gap - 1.0 / 3.0).abs() <= f64::EPSILON;
    outcome(
        "2",
        "general qubit classical limit",
        pass,
        format!("F = {f}, 1 − F = {gap}"),
    )
}

fn c3_sdt_exact() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut inputs = targets();
    for _ in 0..100 {
        inputs.push(EquimodularPhases::new((0..3).map(|_| rng.random::<f64>() * TAU).collect()).unwrap());
    }
    let (worst, elapsed) = timed(|| {
        let mut worst = f64::INFINITY;
        for p in &inputs {
            for basis in [SdtBasis::SpinOrbit, SdtBasis::Fourier] {
                for t in run_sdt_exhaustive(p, basis).unwrap() {
                    worst = worst.min(t.fidelity());
                }
            }
        }
        worst
    });
    let pass = worst >= 1.0 - 1e-10 && elapsed < Duration::from_secs(1);
    outcome(
        "3",
        "noiseless SDT is exact on every outcome",
        pass,
        format!(
            "{} triples x 2 bases x 4 outcomes, min fidelity 1 − {:.1e}; {elapsed:.2?}",
            inputs.len(),
            1.0 - worst
        ),
    )
}

fn c4_crosstalk() -> Outcome {
    const EPS: [f64; 4] = [0.01, 0.03, 0.05, 0.10];
    const SEEDS: u64 = 20;
    let limit = classical_fidelity_equimodular(4).unwrap();
    let mut all_inside = true;
    let mut monotone = true;
    let mut worst_phase_at_small_eps: f64 = 0.0;
    let mut summary = Vec::new();
    let mut prev_median = vec![f64::INFINITY; REFERENCE_TARGETS.len()];
    for eps in EPS {
        let cfg = PipelineConfig {
            noise: NoiseModel::crosstalk(eps).unwrap(),
            shots: 100_000,
            ..PipelineConfig::default()
        };
        let mut fid_medians = Vec::new();
        for (ti, p) in targets().iter().enumerate() {
            let mut fids = Vec::new();
            let mut errs = vec![Vec::new(); 3];
            for seed in 0..SEEDS {
                let mut rng = ChaCha8Rng::seed_from_u64(4000 + seed);
                rng.set_stream(ti as u64);
                let r = run_pipeline(p, &cfg, &mut rng).unwrap();
                all_inside &= r.fidelity > limit && r.fidelity < 1.0;
                fids.push(r.fidelity);
                for (j, (m, t)) in r.estimate().degrees().iter().zip(p.degrees()).enumerate() {
                    errs[j].push(angle_error_deg(*m, t).abs());
                }
            }
            let med = median(fids);
            monotone &= med < prev_median[ti];
            prev_median[ti] = med;
            fid_medians.push(med);
            if eps <= 0.05 {
                for e in errs {
                    worst_phase_at_small_eps = worst_phase_at_small_eps.max(median(e));
                }
            }
        }
        let mean = fid_medians.iter().sum::<f64>() / fid_medians.len() as f64;
        summary.push(format!("ε={eps}: {:.1}%", 100.0 * mean));
    }
    let pass = all_inside && monotone && worst_phase_at_small_eps <= 5.0;
    outcome(
        "4",
        "crosstalk substitute for the measured fidelity",
        pass,
        format!(
            "nine targets, 20 seeds, 1e5 shots; mean median fidelity {}; strictly inside ({limit}, 1): {all_inside}; decreasing: {monotone}; worst median phase error at ε ≤ 0.05: {worst_phase_at_small_eps:.2}°",
            summary.join(", ")
        ),
    )
}

fn c5_tomography_roundtrip() -> Outcome {
    let (detail, elapsed_and_pass) = {
        let start = Instant::now();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut exact_min: f64 = 1.0;
        for _ in 0..10 {
            let psi = random_pure_state(4, &mut rng);
            let recs = tomography_counts(&psi.projector(), 0, 10_000, CountMode::Analytic, &mut rng).unwrap();
            let rho = mle_reconstruct(&recs, &MleOptions::default()).unwrap().rho;
            exact_min = exact_min.min(fidelity(&rho, &psi).unwrap());
        }

        let row_a = &targets()[0];
        let cfg4 = PipelineConfig {
            shots: 10_000,
            ..PipelineConfig::default()
        };
        let fids: Vec<f64> = (0..20)
            .map(|s| {
                run_pipeline(row_a, &cfg4, &mut ChaCha8Rng::seed_from_u64(500 + s))
                    .unwrap()
                    .fidelity
            })
            .collect();
        let med_fid = median(fids);

        let cfg5 = PipelineConfig {
            shots: 100_000,
            ..PipelineConfig::default()
        };
        let mut errs = vec![Vec::new(); 3];
        for s in 0..20 {
            let r = run_pipeline(row_a, &cfg5, &mut ChaCha8Rng::seed_from_u64(600 + s)).unwrap();
            for (j, (m, t)) in r.estimate().degrees().iter().zip(row_a.degrees()).enumerate() {
                errs[j].push(angle_error_deg(*m, t).abs());
            }
        }
        let worst_phase = errs.into_iter().map(median).fold(0.0, f64::max);
        let elapsed = start.elapsed();
        let pass = exact_min > 0.999 && med_fid > 0.98 && worst_phase <= 0.5 && elapsed < Duration::from_secs(60);
        (
            format!(
                "analytic min fidelity {exact_min:.6}; 1e4-shot median fidelity {med_fid:.4}; 1e5-shot worst median phase error {worst_phase:.3}°; {elapsed:.2?}"
            ),
            pass,
        )
    };
    outcome("5", "tomography round trip", elapsed_and_pass, detail)
}

fn c6a_volume_values() -> Outcome {
    let torus = volume_equimodular(3).unwrap();
    let proj = volume_projective(2).unwrap();
    let rel_t = (torus / (4.0 * PI * PI / 3.0) - 1.0).abs();
    let rel_p = (proj / (3.0 * PI.sqrt() / 4.0) - 1.0).abs();
    outcome(
        "6a",
        "torus and projective volume values",
        rel_t < 1e-12 && rel_p < 1e-12,
        format!("vol_T(3) = {torus:.12} (rel {rel_t:.1e}), vol_P(2) = {proj:.12} (rel {rel_p:.1e})"),
    )
}

fn c6b_projective_sphere_identity() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut first_bad = None;
    for m in 2..=20 {
        let lhs = ln_volume_projective(m).unwrap() + TAU.ln();
        let rhs = ln_volume_sphere(2 * m - 1).unwrap();
        let rel = ((lhs - rhs).exp() - 1.0).abs();
        if rel > 1e-10 && first_bad.is_none() {
            first_bad = Some((m, (lhs - rhs).exp()));
        }
        worst = worst.max(rel);
    }
    let detail = match first_bad {
        None => format!("max relative deviation {worst:.1e} over m = 2..20"),
        Some((m, ratio)) => format!(
            "2π·vol_P(m) / vol_S(2m−1) = {ratio:.6} at m = {m}; max relative deviation {worst:.3} over m = 2..20"
        ),
    };
    outcome(
        "6b",
        "projective volume equals sphere volume over 2π",
        first_bad.is_none(),
        detail,
    )
}

fn c6c_ratio_growth() -> Outcome {
    let logs: Vec<(usize, f64)> = (3..=41).step_by(2).map(|n| (n, ln_volume_ratio(n).unwrap())).collect();
    let increasing = logs.windows(2).all(|w| w[1].1 > w[0].1);
    let limit = 2.0 * ratio_asymptotic_base().ln();
    let last = logs[logs.len() - 1].1 - logs[logs.len() - 2].1;
    let rel = (last / limit - 1.0).abs();
    let exact_limit_check = (limit - (TAU / E).ln()).abs() < 1e-14;
    outcome(
        "6c",
        "log volume ratio grows toward the asymptotic slope",
        increasing && exact_limit_check && rel <= 0.01,
        format!(
            "increasing on 3..41: {increasing}; step at n = 41 is {last:.5} vs limit {limit:.5} (off by {:.2}%)",
            100.0 * rel
        ),
    )
}

fn c7_packing() -> Outcome {
    let mut ordered = true;
    for n in 1..=1000 {
        let b = sudakov_packing_bounds(n, 1.0).unwrap();
        ordered &= b.delta_threshold <= std::f64::consts::LN_2 / (32.0 * PI) + 1e-18;
        ordered &= (b.lower_log2 - n as f64 / (8.0 * PI)).abs() <= 1e-12 * b.lower_log2;
        ordered &= b.lower_ln() <= b.upper_ln;
    }
    let mut worst: f64 = 0.0;
    for eps in [0.1f64, 0.5, 1.0, 2.0, 7.5] {
        for n in 1..=200 {
            let direct = (1.0 + 2.0 / eps).powi(n as i32);
            if direct.is_finite() {
                let lg = log2_entropy_number_bound(n, eps).unwrap();
                worst = worst.max((direct.log2() - lg).abs() / lg.max(1.0));
            }
        }
    }
    let pass = ordered && worst <= 8.0 * f64::EPSILON;
    outcome(
        "7",
        "packing and entropy-number bounds",
        pass,
        format!("lower ≤ upper at δ threshold for n = 1..1000: {ordered}; log₂ entropy bound vs direct: max rel {worst:.1e}"),
    )
}

fn c8_region() -> Outcome {
    let (r, elapsed) =
        timed(|| qutrit_outcome_region_fraction(1_000_000, 200, &mut ChaCha8Rng::seed_from_u64(8)).unwrap());
    let pass = (r.fraction - 0.31).abs() <= 0.03 && elapsed < Duration::from_secs(30);
    outcome(
        "8",
        "equimodular qutrit outcome region",
        pass,
        format!(
            "fraction {:.4} ± {:.4} ({} of {} cells, {} samples); {elapsed:.2?}",
            r.fraction, r.standard_error, r.cells_hit, r.cells_total, r.samples
        ),
    )
}

fn c9_resources() -> Outcome {
    let close = |a: f64, b: f64| (a - b).abs() <= 1e-12 * b.abs().max(1.0);
    let mut ok = true;
    let mut checked = 0;
    let mut rejected = 0;
    for n in [2usize, 3, 4, 6] {
        let nf = n as f64;
        let rsp_d = (n + 2) / 2;
        for proto in Protocol::ALL {
            let got = resource_profile(proto, n);
            let expected: Option<(usize, f64, f64, usize, usize, CharlesKnowledge)> = match proto {
                Protocol::Qt if n == 2 => Some((2, 0.5, 2.0, 4, 4, CharlesKnowledge::Optional)),
                Protocol::RspProbabilistic if n % 2 == 0 => {
                    Some((rsp_d, 2.0 / (nf + 2.0), 1.0, 1, 1, CharlesKnowledge::Required))
                }
                Protocol::RspDeterministic if n % 2 == 0 => Some((
                    rsp_d,
                    1.0,
                    2.0 * ((nf + 2.0) / 2.0).log2(),
                    rsp_d * rsp_d,
                    rsp_d * rsp_d,
                    CharlesKnowledge::Required,
                )),
                Protocol::Sdt => Some((n + 1, 1.0, (nf + 1.0).log2(), n + 1, n + 1, CharlesKnowledge::Required)),
                _ => None,
            };
            match (expected, got) {
                (Some((dim, p, bits, det, tr, know)), Ok(g)) => {
                    checked += 1;
                    ok &= g.state_dim == dim
                        && close(g.success_probability, p)
                        && close(g.classical_bits, bits)
                        && g.alice_detectors == det
                        && g.bob_transformations == tr
                        && g.charles_knowledge == know;
                }
                (None, Err(_)) => rejected += 1,
                _ => ok = false,
            }
        }
    }
    let n = (1u64 << 10) as f64 - 1.0;
    let ratio = bits_ratio_rsp_to_sdt(n);
    outcome(
        "9",
        "resource table",
        ok && ratio > 1.8,
        format!("{checked} rows match, {rejected} undefined rows rejected; RSP_det/SDT bits at N = 1023: {ratio:.4}"),
    )
}

fn c10_fringes() -> Outcome {
    let base = ExperimentalPhases::from_degrees(40.0, 75.0, 130.0);
    let angles: Vec<f64> = (0..=72).map(|i| i as f64 * 5.0).collect();
    let scan = fringe_scan(ExperimentalPhase::A, base, &angles, &NoiseModel::noiseless()).unwrap();
    let dr0 = {
        let rho: DensityMatrix = equimodular_state(&base.to_equimodular()).projector();
        setting_probability(&rho, &sdt_core::expsim::fringe_settings()[1]).unwrap()
    };
    let mut worst: f64 = 0.0;
    for pt in &scan.points {
        let p = base
            .with(ExperimentalPhase::A, pt.angle_deg.to_radians())
            .to_equimodular();
        let [p1, _, p3] = [p.radians()[0], p.radians()[1], p.radians()[2]];
        worst = worst
            .max((pt.p_hh - (1.0 + p1.cos()) / 4.0).abs())
            .max((pt.p_dr - dr0).abs())
            .max((pt.p_dl - (1.0 + (p3 - p1).cos()) / 4.0).abs());
    }
    outcome(
        "10",
        "noiseless fringes",
        worst <= 1e-12,
        format!("{} points, max deviation {worst:.1e}", scan.points.len()),
    )
}

fn main() -> ExitCode {
    let checks: [fn() -> Outcome; 12] = [
        c1_ququart_limit,
        c2_qubit_limit,
        c3_sdt_exact,
        c4_crosstalk,
        c5_tomography_roundtrip,
        c6a_volume_values,
        c6b_projective_sphere_identity,
        c6c_ratio_growth,
        c7_packing,
        c8_region,
        c9_resources,
        c10_fringes,
    ];
    let mut failed = 0;
    for check in checks {
        let o = check();
        if !o.pass {
            failed += 1;
        }
        println!(
            "criterion {:<3} {}  {}: {}",
            o.id,
            if o.pass { "PASS" } else { "FAIL" },
            o.title,
            o.detail
        );
    }
    println!("acceptance: {} of {} passed", checks.len() - failed, checks.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
