use sparsefool::{AffineClassifier, Classifier, MlpClassifier, Rng, SparseFoolConfig, Tensor};
use sparsefool_bench::report::report_to_csv;
use sparsefool_bench::{
    evaluate, random_sparse_baseline, read_report, sweep_delta, sweep_lambda, synth_blobs, transfer_matrix,
    write_report, BoundsPolicy, Dataset, EvalReport, Format,
};

/// Random MLP and `n` inputs in `[0, 1]⁶`.
fn unit_box_problem(seed: u64, n: usize) -> (MlpClassifier, Dataset) {
    let mut rng = Rng::new(seed);
    let m = MlpClassifier::random(&[6, 12, 3], &mut rng).unwrap();
    let samples: Vec<Tensor> =
        (0..n).map(|_| Tensor::from_vec((0..6).map(|_| rng.uniform()).collect()).unwrap()).collect();
    let labels = samples.iter().map(|x| m.predict(x).unwrap()).collect();
    (m, Dataset::new(samples, labels, "unit-box", 0.0, 1.0).unwrap())
}

/// Nearest-centre rule written as an affine map: `f_k(x) = μ_kᵀx − ‖μ_k‖²/2`.
fn nearest_mean(d: &Dataset, classes: usize) -> AffineClassifier {
    let dim = d.samples[0].len();
    let mut w = vec![vec![0.0; dim]; classes];
    let mut counts = vec![0.0; classes];
    for (x, &y) in d.samples.iter().zip(&d.labels) {
        counts[y] += 1.0;
        for (a, v) in w[y].iter_mut().zip(x.as_slice()) {
            *a += v;
        }
    }
    for (row, c) in w.iter_mut().zip(&counts) {
        row.iter_mut().for_each(|a| *a /= c);
    }
    let b = w.iter().map(|row| -row.iter().map(|v| v * v).sum::<f64>() / 2.0).collect();
    AffineClassifier::new(w, b).unwrap()
}

fn untimed(mut r: EvalReport) -> EvalReport {
    r.strip_timing();
    r
}

#[test]
fn singleton_lambda_sweep_equals_direct_evaluation() {
    let (m, d) = unit_box_problem(1, 25);
    let cfg = SparseFoolConfig::with_lambda(2.0);
    let direct = untimed(evaluate(&m, &d, BoundsPolicy::Domain, &cfg).unwrap());
    let (rows, reports) = sweep_lambda(&m, &d, &[2.0], BoundsPolicy::Domain, &SparseFoolConfig::default()).unwrap();
    assert_eq!(rows.len(), 1);
    assert_eq!(untimed(reports[0].clone()), direct);
    assert_eq!(rows[0].fooling_rate.to_bits(), direct.fooling_rate.to_bits());
    assert_eq!(rows[0].median_pert_pct, direct.median_pert_pct);
    assert_eq!(rows[0].mean_outer_iterations, direct.mean_outer_iterations);
}

#[test]
fn affine_model_needs_one_outer_iteration_at_every_lambda() {
    let d = synth_blobs(60, 3, 5, 1.0, 3).unwrap();
    let c = nearest_mean(&d, 3);
    let (rows, _) =
        sweep_lambda(&c, &d, &[1.0, 2.0, 3.0, 5.0], BoundsPolicy::Unbounded, &SparseFoolConfig::default()).unwrap();
    for r in rows {
        assert_eq!(r.mean_outer_iterations, 1.0, "lambda {}", r.lambda);
        assert_eq!(r.fooling_rate, 1.0);
    }
}

#[test]
fn full_width_delta_matches_domain_bounds_and_zero_delta_fools_nothing() {
    let (m, d) = unit_box_problem(2, 20);
    let cfg = SparseFoolConfig::with_lambda(1.0);
    let full = untimed(evaluate(&m, &d, BoundsPolicy::Domain, &cfg).unwrap());
    let (rows, reports) = sweep_delta(&m, &d, &[d.domain_width(), 0.0], &cfg).unwrap();
    let mut wide = untimed(reports[0].clone());
    wide.config_echo.delta = None;
    assert_eq!(wide, full);
    assert_eq!(rows[1].fooling_rate, 0.0);
    assert_eq!(rows[1].median_pert_pct, None);
}

#[test]
fn baseline_budget_edges() {
    let (m, d) = unit_box_problem(3, 30);
    let none = random_sparse_baseline(&m, &d, &[0], 5).unwrap();
    assert_eq!(none.fooling_rate, 0.0);
    assert!(none.per_sample.iter().all(|s| s.perturbed_elements == 0));
    let full = random_sparse_baseline(&m, &d, &[6], 5).unwrap();
    for (s, x) in full.per_sample.iter().zip(&d.samples) {
        assert_eq!(s.perturbed_elements, x.as_slice().iter().filter(|&&v| v != 0.0 && v != 1.0).count());
    }
    assert!(random_sparse_baseline(&m, &d, &[7], 5).is_err());
    assert!(random_sparse_baseline(&m, &d, &[1, 1], 5).is_err());
}

#[test]
fn baseline_replays_under_a_fixed_seed() {
    let (m, d) = unit_box_problem(4, 30);
    let a = random_sparse_baseline(&m, &d, &[2], 9).unwrap();
    assert_eq!(a, random_sparse_baseline(&m, &d, &[2], 9).unwrap());
    let other = random_sparse_baseline(&m, &d, &[2], 10).unwrap();
    assert_ne!(
        a.per_sample.iter().map(|s| s.l1).collect::<Vec<_>>(),
        other.per_sample.iter().map(|s| s.l1).collect::<Vec<_>>()
    );
}

#[test]
fn matched_budget_is_the_per_channel_median() {
    let (m, d) = unit_box_problem(5, 30);
    let r = evaluate(&m, &d, BoundsPolicy::Domain, &SparseFoolConfig::with_lambda(1.0)).unwrap();
    let mut counts: Vec<usize> = r.per_sample.iter().filter(|s| s.fooled).map(|s| s.perturbed_elements).collect();
    counts.sort_unstable();
    let k = counts.len();
    let expect = if k % 2 == 1 { counts[k / 2] } else { (counts[k / 2 - 1] + counts[k / 2]).div_ceil(2) };
    assert_eq!(r.matched_budget(), Some(vec![expect]));
}

#[test]
fn transfer_matrix_shapes_and_diagonal() {
    let (m, d) = unit_box_problem(6, 15);
    let cfg = SparseFoolConfig::with_lambda(1.0);
    let own = evaluate(&m, &d, BoundsPolicy::Domain, &cfg).unwrap().fooling_rate;

    let single = transfer_matrix(&[("a".to_string(), m.clone())], &d, BoundsPolicy::Domain, &cfg).unwrap();
    assert_eq!(single.rates, vec![vec![own]]);

    let copies = [("a".to_string(), m.clone()), ("b".to_string(), m.clone())];
    let twin = transfer_matrix(&copies, &d, BoundsPolicy::Domain, &cfg).unwrap();
    assert_eq!(twin.rates, vec![vec![own, own], vec![own, own]]);

    let (other, _) = unit_box_problem(7, 1);
    let mixed = [("a".to_string(), m.clone()), ("b".to_string(), other.clone())];
    let t = transfer_matrix(&mixed, &d, BoundsPolicy::Domain, &cfg).unwrap();
    assert_eq!(t.rates[0][0], own);
    assert_eq!(t.rates[1][1], evaluate(&other, &d, BoundsPolicy::Domain, &cfg).unwrap().fooling_rate);

    let narrow = MlpClassifier::random(&[5, 4, 3], &mut Rng::new(0)).unwrap();
    let bad = [("a".to_string(), m), ("b".to_string(), narrow)];
    assert!(transfer_matrix(&bad, &d, BoundsPolicy::Domain, &cfg).is_err());
}

#[test]
fn reports_round_trip_and_csv_has_summary_then_rows() {
    let (m, d) = unit_box_problem(8, 12);
    let r = evaluate(&m, &d, BoundsPolicy::Delta(0.3), &SparseFoolConfig::with_lambda(1.5)).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.json");
    write_report(&r, &path, Format::Json).unwrap();
    assert_eq!(read_report(&path).unwrap(), r);
    assert_eq!(r.config_echo.delta, Some(0.3));
    assert_eq!(r.config_echo.lambda, Some(1.5));

    let mut buf = Vec::new();
    report_to_csv(&r, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert!(lines[0].starts_with("fooling_rate,"));
    let header = lines.iter().position(|l| l.starts_with("index,")).unwrap();
    assert_eq!(lines.len() - header - 1, d.len());
    assert!("xml".parse::<Format>().is_err());
}

#[test]
fn per_sample_rows_are_in_dataset_order() {
    let (m, d) = unit_box_problem(9, 40);
    let r = evaluate(&m, &d, BoundsPolicy::Domain, &SparseFoolConfig::with_lambda(1.0)).unwrap();
    let idx: Vec<usize> = r.per_sample.iter().map(|s| s.index).collect();
    assert_eq!(idx, (0..40).collect::<Vec<_>>());
    assert!((0.0..=1.0).contains(&r.fooling_rate));
}
