use proptest::prelude::*;
use sparsefool::{
    delta_bounds, sparsefool, AffineClassifier, BoxBounds, Classifier, MlpClassifier, Rng, SparseFoolConfig, Tensor,
};

fn check_outcome(x: &Tensor, b: &BoxBounds, out: &sparsefool::AttackOutcome) -> Result<(), TestCaseError> {
    prop_assert!(b.contains(&out.adversarial));
    for i in 0..x.len() {
        prop_assert_eq!(out.adversarial.get(i), x.get(i) + out.perturbation.get(i));
        if !out.selected_coordinates.contains(&i) {
            prop_assert_eq!(out.adversarial.get(i).to_bits(), x.get(i).to_bits());
        }
    }
    prop_assert_eq!(out.perturbed_coordinates.clone(), out.perturbation.nonzero_indices());
    prop_assert_eq!(out.fooled, out.adversarial_label != out.original_label);
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn mlp_outputs_respect_box_and_support(seed in any::<u64>(), delta in 0.0f64..1.0, lambda in 1.0f64..4.0) {
        let mut rng = Rng::new(seed);
        let n = 2 + rng.below(10);
        let m = MlpClassifier::random(&[n, 8, 3], &mut rng).unwrap();
        let x = Tensor::from_vec((0..n).map(|_| rng.uniform()).collect()).unwrap();
        let b = delta_bounds(&x, delta, 0.0, 1.0).unwrap();
        let out = sparsefool(&m, &x, &b, &SparseFoolConfig::with_lambda(lambda)).unwrap();
        check_outcome(&x, &b, &out)?;
        if out.fooled {
            prop_assert_eq!(m.predict(&out.adversarial).unwrap(), out.adversarial_label);
        }
    }

    #[test]
    fn targeted_success_lands_on_target(seed in any::<u64>()) {
        let mut rng = Rng::new(seed);
        let n = 4;
        let m = MlpClassifier::random(&[n, 6, 4], &mut rng).unwrap();
        let x = Tensor::from_vec((0..n).map(|_| rng.uniform()).collect()).unwrap();
        let target = rng.below(4);
        let b = BoxBounds::uniform(&[n], -3.0, 4.0).unwrap();
        let cfg = SparseFoolConfig { target: Some(target), ..SparseFoolConfig::with_lambda(2.0) };
        let out = sparsefool(&m, &x, &b, &cfg).unwrap();
        check_outcome(&x, &b, &out)?;
        if out.fooled {
            prop_assert_eq!(out.adversarial_label, target);
        }
    }
}

#[test]
fn affine_unbounded_is_one_shot() {
    let mut rng = Rng::new(12);
    for _ in 0..100 {
        let n = 2 + rng.below(10);
        let k = 2 + rng.below(4);
        let w = (0..k).map(|_| (0..n).map(|_| rng.uniform_range(-1.0, 1.0)).collect()).collect();
        let b = (0..k).map(|_| rng.uniform_range(-0.5, 0.5)).collect();
        let c = AffineClassifier::new(w, b).unwrap();
        let x = Tensor::from_vec((0..n).map(|_| rng.uniform_range(-1.0, 1.0)).collect()).unwrap();
        let out = sparsefool(&c, &x, &BoxBounds::unbounded(&[n]), &SparseFoolConfig::with_lambda(1.0)).unwrap();
        assert!(out.fooled);
        assert_eq!(out.outer_iterations, 1);
        assert_eq!(out.perturbed_element_count(), 1);
    }
}

#[test]
fn full_delta_equals_full_domain() {
    let mut rng = Rng::new(2);
    let m = MlpClassifier::random(&[6, 8, 3], &mut rng).unwrap();
    let x = Tensor::from_vec((0..6).map(|_| rng.uniform()).collect()).unwrap();
    let full = BoxBounds::uniform(&[6], 0.0, 1.0).unwrap();
    let by_delta = delta_bounds(&x, 1.0, 0.0, 1.0).unwrap();
    assert_eq!(full, by_delta);
    let cfg = SparseFoolConfig::with_lambda(1.0);
    let a = sparsefool(&m, &x, &full, &cfg).unwrap();
    let b = sparsefool(&m, &x, &by_delta, &cfg).unwrap();
    assert_eq!(a.perturbation, b.perturbation);
}
