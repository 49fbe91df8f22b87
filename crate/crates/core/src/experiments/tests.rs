use super::*;
use std::path::Path;

use proptest::prelude::*;

use crate::neural::ArchitectureSpec;

fn lp() -> Extrapolator {
    Extrapolator::LinearPrediction { order: None, stabilize: false }
}

fn all_methods() -> Vec<MethodSpec> {
    vec![
        MethodSpec::m1(Estimator::Esprit),
        MethodSpec::m2(Estimator::Esprit),
        MethodSpec::m3(Estimator::Esprit, lp()),
    ]
}

const SC: Scenario = Scenario { n: 150, m: 50 };

#[test]
fn noiseless_routes_recover_truth() {
    let truth = SinusoidSpec::unit(vec![0.11, 0.27]).unwrap();
    for method in all_methods() {
        let est = run_method(&method, &truth, 150, 50, f64::INFINITY, 3).unwrap();
        for (a, b) in est.frequencies.iter().zip(truth.frequencies()) {
            assert!((a - b).abs() < 1e-6, "{}: {a} vs {b}", method.label());
        }
        assert_eq!(est.method_tag, method.label());
    }
}

#[test]
fn exact_extrapolation_matches_full_window() {
    let truth = SinusoidSpec::new(vec![1.0, 0.6], vec![0.07, 0.31]).unwrap();
    let m2 = run_method(&MethodSpec::m2(Estimator::Esprit), &truth, 150, 50, f64::INFINITY, 0).unwrap();
    let m3 = run_method(&MethodSpec::m3(Estimator::Esprit, lp()), &truth, 150, 50, f64::INFINITY, 0).unwrap();
    for (a, b) in m2.frequencies.iter().zip(&m3.frequencies) {
        assert!((a - b).abs() < 1e-6);
    }
}

#[test]
fn labels() {
    assert_eq!(MethodSpec::m1(Estimator::Prony).label(), "M1-prony");
    assert_eq!(MethodSpec::m3(Estimator::Esprit, lp()).label(), "M3-lp-esprit");
    assert_eq!(MethodSpec::m2(Estimator::Esprit).with_label("full").label(), "full");
}

#[test]
fn m3_needs_compatible_predictor() {
    let truth = SinusoidSpec::unit(vec![0.2]).unwrap();
    let bare = MethodSpec { id: MethodId::M3PredictThenEstimate, estimator: Estimator::Esprit, predictor: None, label: None };
    assert!(matches!(run_method(&bare, &truth, 150, 50, 10.0, 0), Err(Error::Config(_))));

    let params = PredictorParams::init(&ArchitectureSpec::desk(40, 110), 0);
    let wrong = MethodSpec::m3(Estimator::Esprit, Extrapolator::Neural(Arc::new(params)));
    assert!(matches!(run_method(&wrong, &truth, 150, 50, 10.0, 0), Err(Error::Config(_))));

    let mut params = PredictorParams::init(&ArchitectureSpec::desk(50, 100), 0);
    params.components = Some(2);
    let wrong_l = MethodSpec::m3(Estimator::Esprit, Extrapolator::Neural(Arc::new(params)));
    assert!(matches!(run_method(&wrong_l, &truth, 150, 50, 10.0, 0), Err(Error::Config(_))));
}

#[test]
fn scenario_validation() {
    assert!(Scenario { n: 50, m: 50 }.validate().is_err());
    assert!(Scenario { n: 50, m: 0 }.validate().is_err());
}

#[test]
fn sweep_is_deterministic_and_paired() {
    let sampler = FrequencySampler::Uniform { l: 2, min_sep: 1.0 / 150.0 };
    let a = snr_sweep(&all_methods(), SC, &[0.0, 20.0], 6, sampler, 11).unwrap();
    let b = snr_sweep(&all_methods(), SC, &[0.0, 20.0], 6, sampler, 11).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.trials.len(), 2 * 3 * 6);
    assert_eq!(a.aggregates.len(), 6);
    assert!(a.aggregates.iter().all(|g| g.trials == 6));
    let c = snr_sweep(&all_methods(), SC, &[0.0, 20.0], 6, sampler, 12).unwrap();
    assert_ne!(a, c);

    // Worker count must not matter.
    let pool = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
    let d = pool.install(|| snr_sweep(&all_methods(), SC, &[0.0, 20.0], 6, sampler, 11)).unwrap();
    assert_eq!(a, d);
}

#[test]
fn trials_share_realizations_across_methods() {
    // Two labels for the same method must see identical data.
    let methods = vec![
        MethodSpec::m2(Estimator::Esprit).with_label("a"),
        MethodSpec::m2(Estimator::Esprit).with_label("b"),
    ];
    let r = snr_sweep(&methods, SC, &[5.0], 10, FrequencySampler::CoarseGrid { l: 2 }, 4).unwrap();
    let (a, b) = r.trials.split_at(10);
    for (x, y) in a.iter().zip(b) {
        assert_eq!(x.outcome, y.outcome);
    }
}

#[test]
fn duplicate_labels_rejected() {
    let methods = vec![MethodSpec::m2(Estimator::Esprit), MethodSpec::m2(Estimator::Esprit)];
    let r = snr_sweep(&methods, SC, &[5.0], 2, FrequencySampler::CoarseGrid { l: 2 }, 0);
    assert!(matches!(r, Err(Error::Config(_))));
}

#[test]
fn failures_are_counted_not_averaged() {
    let methods = vec![MethodSpec::m1(Estimator::Periodogram), MethodSpec::m2(Estimator::Esprit)];
    let r = resolution_sweep(&methods, SC, &[0.002], 30.0, 5, 1).unwrap();
    let p = r.aggregate("M1-periodogram", 0.002).unwrap();
    let errs = r.trials.iter().filter(|t| t.method == "M1-periodogram" && t.outcome.is_err()).count();
    assert_eq!(p.trials, 5);
    assert!(errs >= 3);
    assert_eq!(p.failures, errs);
    assert_eq!(p.mean_nmse_db.is_nan(), errs == 5);
    let e = r.aggregate("M2-esprit", 0.002).unwrap();
    assert_eq!(e.failures, 0);
    assert!(e.mean_nmse_db.is_finite());
    assert!(r.trials.iter().all(|t| t.delta == Some(0.002) && t.snr_db == 30.0));
}

#[test]
fn full_window_resolves_fine_separation() {
    let methods = [MethodSpec::m2(Estimator::Esprit)];
    let d = 1.0 / 150.0;
    let r = resolution_sweep(&methods, SC, &[d], 20.0, 50, 3).unwrap();
    let g = r.aggregate("M2-esprit", d).unwrap();
    assert!(g.mean_nmse_db <= -40.0, "{}", g.mean_nmse_db);
}

#[test]
fn resolution_sweep_input_checks() {
    assert!(resolution_sweep(&all_methods(), SC, &[0.5], 20.0, 1, 0).is_err());
    assert!(resolution_sweep(&all_methods(), SC, &[0.0], 20.0, 1, 0).is_err());
    assert!(snr_sweep(&all_methods(), SC, &[], 1, FrequencySampler::CoarseGrid { l: 2 }, 0).is_err());
    assert!(snr_sweep(&all_methods(), SC, &[1.0], 0, FrequencySampler::CoarseGrid { l: 2 }, 0).is_err());
    assert!(snr_sweep(&all_methods(), SC, &[1.0], 1, FrequencySampler::CoarseGrid { l: 5 }, 0).is_err());
}

#[test]
fn grid_experiment_uses_four_components() {
    let methods = [MethodSpec::m2(Estimator::Esprit)];
    let on = grid_experiment_l4(&methods, SC, &[f64::INFINITY], true, 3, 0).unwrap();
    assert_eq!(on.name, "l4_on_grid");
    for t in &on.trials {
        assert!(t.outcome.as_ref().unwrap() < &1e-12);
    }
    let off = grid_experiment_l4(&methods, SC, &[20.0], false, 3, 0).unwrap();
    assert_eq!(off.name, "l4_off_grid");
    assert_eq!(off.aggregates[0].failures, 0);
}

fn parse_csv_line(line: &str) -> Vec<String> {
    let mut out = vec![String::new()];
    let mut quoted = false;
    let mut chars = line.chars().peekable();
    while let Some(c) = chars.next() {
        match (c, quoted) {
            ('"', true) if chars.peek() == Some(&'"') => {
                chars.next();
                out.last_mut().unwrap().push('"');
            }
            ('"', _) => quoted = !quoted,
            (',', false) => out.push(String::new()),
            _ => out.last_mut().unwrap().push(c),
        }
    }
    out
}

#[test]
fn aggregates_reproducible_from_trials_csv() {
    let methods = vec![MethodSpec::m1(Estimator::Periodogram), MethodSpec::m2(Estimator::Esprit)];
    let r = snr_sweep(&methods, SC, &[0.0, 10.0], 8, FrequencySampler::Uniform { l: 2, min_sep: 0.004 }, 9).unwrap();
    let csv = trials_csv(&r);
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), emit::TRIALS_HEADER);
    let mut groups: BTreeMap<(String, String), (Vec<f64>, usize)> = BTreeMap::new();
    for line in lines {
        let f = parse_csv_line(line);
        assert_eq!(f.len(), 8);
        let g = groups.entry((f[0].clone(), f[2].clone())).or_default();
        if f[6].is_empty() {
            assert!(!f[7].is_empty());
            g.1 += 1;
        } else {
            g.0.push(f[6].parse().unwrap());
        }
    }
    let agg = aggregates_csv(&r);
    let mut lines = agg.lines();
    assert_eq!(lines.next().unwrap(), "method,sweep_var,value,mean_nmse_db,trials,failures");
    let mut seen = 0;
    for line in lines {
        let f = parse_csv_line(line);
        let (vals, fails) = &groups[&(f[0].clone(), f[2].clone())];
        assert_eq!(f[1], "snr_db");
        assert_eq!(f[4].parse::<usize>().unwrap(), vals.len() + fails);
        assert_eq!(f[5].parse::<usize>().unwrap(), *fails);
        let mean = vals.iter().sum::<f64>() / vals.len() as f64;
        let db: f64 = f[3].parse().unwrap();
        assert!((db - 10.0 * mean.log10()).abs() <= 1e-12, "{db}");
        seen += 1;
    }
    assert_eq!(seen, groups.len());
}

#[test]
fn emit_writes_tables_and_plot() {
    let dir = tempfile::tempdir().unwrap();
    let r = snr_sweep(&all_methods(), SC, &[0.0, 10.0, 20.0], 3, FrequencySampler::CoarseGrid { l: 2 }, 2).unwrap();
    let files = emit(&r, dir.path()).unwrap();
    assert_eq!(files.len(), 3);
    let svg = std::fs::read_to_string(dir.path().join("snr_sweep.svg")).unwrap();
    assert!(svg.contains("SNR (dB)") && svg.contains("NMSE (dB)"));
    assert_eq!(svg.matches("<polyline").count(), 3);
    assert_eq!(Some(svg), plot_svg(&r));

    let d = resolution_sweep(&all_methods(), SC, &[0.01, 0.02], 20.0, 2, 2).unwrap();
    assert!(plot_svg(&d).unwrap().contains("Δ (cycles/sample)"));
}

#[test]
fn empty_result_emits_headers_only() {
    let dir = tempfile::tempdir().unwrap();
    let r = ExperimentResult { name: "empty".into(), sweep_var: "snr_db".into(), trials: vec![], aggregates: vec![] };
    let files = emit(&r, dir.path()).unwrap();
    assert_eq!(files.len(), 2);
    assert_eq!(std::fs::read_to_string(&files[1]).unwrap(), format!("{}\n", emit::AGGREGATES_HEADER));
    assert_eq!(std::fs::read_to_string(&files[0]).unwrap(), format!("{}\n", emit::TRIALS_HEADER));
    assert!(!dir.path().join("empty.svg").exists());
}

#[test]
fn config_round_trip() {
    let text = r#"
name = "tiny"
n = 60
m = 20
seed = 5
trials = 4
out_dir = "res"

[[methods]]
id = "m1"

[[methods]]
id = "m3"
estimator = "prony"
predictor = { kind = "linear", order = 6 }

[sweep]
kind = "snr"
snr_db = [5, 15]
sampler = { kind = "fine-grid", l = 2, n = 60 }
"#;
    let mut cfg = BenchConfig::parse(text).unwrap();
    cfg.resolve_paths(Path::new("/base"));
    assert_eq!(cfg.out_dir, Path::new("/base/res"));
    let r = run_config(&cfg).unwrap();
    assert_eq!(r.name, "tiny");
    assert_eq!(r.trials.len(), 2 * 2 * 4);
    assert!(r.aggregate("M3-lp-prony", 15.0).is_some());
    assert_eq!(r, run_config(&cfg).unwrap());

    assert!(BenchConfig::parse(&text.replace("trials", "trails")).is_err());
    let bad = text.replace("estimator = \"prony\"\npredictor = { kind = \"linear\", order = 6 }", "");
    assert!(matches!(run_config(&BenchConfig::parse(&bad).unwrap()), Err(Error::Config(_))));
}

#[test]
fn config_trains_inline_predictor() {
    let text = r#"
n = 30
m = 10
trials = 2

[[methods]]
id = "m3"
predictor = { kind = "neural-train", recipes = ["grid-l2"], noise_instances = 1, train = { epochs = 2, batch_size = 16 } }

[sweep]
kind = "snr"
snr_db = [10]
sampler = { kind = "coarse-grid", l = 2 }
"#;
    let cfg = BenchConfig::parse(text).unwrap();
    let a = run_config(&cfg).unwrap();
    assert_eq!(a, run_config(&cfg).unwrap());
    assert_eq!(a.aggregates[0].method, "M3-nn-esprit");
}

#[test]
fn missing_config_is_io_error() {
    assert!(matches!(load_config(Path::new("/nonexistent/x.toml")), Err(Error::Io { .. })));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn uniform_sampler_respects_constraints(l in 1usize..5, sep in 0.0f64..0.05, seed in any::<u64>()) {
        let s = FrequencySampler::Uniform { l, min_sep: sep };
        let f = s.sample(&mut rng::stream(seed, &[]));
        prop_assert_eq!(f.len(), l);
        prop_assert!(f.iter().all(|&x| x > 0.0 && x < 0.5 && x >= sep && x <= 0.5 - sep));
        prop_assert!(f.windows(2).all(|p| p[1] - p[0] >= sep));
    }

    #[test]
    fn grid_samplers_are_distinct(l in 1usize..5, seed in any::<u64>()) {
        for s in [FrequencySampler::CoarseGrid { l }, FrequencySampler::FineGrid { l, n: 150 }] {
            let f = s.sample(&mut rng::stream(seed, &[]));
            prop_assert!(f.windows(2).all(|p| p[1] > p[0]));
            prop_assert!(f.iter().all(|&x| x > 0.0 && x < 0.5));
        }
    }

    #[test]
    fn aggregate_counts_partition(outcomes in proptest::collection::vec(proptest::option::of(1e-9f64..1.0), 1..40)) {
        let rows: Vec<TrialRow> = outcomes.iter().enumerate().map(|(i, o)| TrialRow {
            method: if i % 2 == 0 { "a".into() } else { "b".into() },
            value: 1.0,
            trial: i,
            snr_db: 1.0,
            delta: None,
            outcome: o.ok_or_else(|| "x".to_string()),
        }).collect();
        let agg = aggregate(&rows);
        prop_assert_eq!(agg.iter().map(|a| a.trials).sum::<usize>(), rows.len());
        prop_assert_eq!(agg.iter().map(|a| a.failures).sum::<usize>(), outcomes.iter().filter(|o| o.is_none()).count());
    }
}
