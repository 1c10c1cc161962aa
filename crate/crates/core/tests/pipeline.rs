use prefspace::datagen::{generate, SceneKind, SyntheticSpec};
use prefspace::distances::DistanceKind;
use prefspace::embedding::{embed_dataset, EmbeddingConfig, PreferenceMode};
use prefspace::eval::{estimate_sigma, roc_auc};
use prefspace::forest::{build_forest, score_all, score_all_counted, ForestConfig, Method};
use prefspace::models::{sample_pool, ModelKind};
use prefspace::seeded_rng;

fn mean(v: impl Iterator<Item = f64>) -> f64 {
    let v: Vec<f64> = v.collect();
    v.iter().sum::<f64>() / v.len() as f64
}

#[test]
fn genuine_points_carry_more_preference_mass() {
    for seed in 0..5 {
        let scene = generate(&SyntheticSpec { seed, ..Default::default() }).unwrap();
        let pool = sample_pool(&scene.data, 2000, &[ModelKind::Line], &mut seeded_rng(seed)).unwrap();
        let cfg = EmbeddingConfig::new(0.05, 3.0, PreferenceMode::Continuous).unwrap();
        let matrix = embed_dataset(&scene.data, &pool, &cfg);
        let labels = scene.data.labels();
        let genuine = mean(matrix.rows().iter().zip(labels).filter(|(_, l)| !l.is_anomaly()).map(|(r, _)| r.l1()));
        let anomalous = mean(matrix.rows().iter().zip(labels).filter(|(_, l)| l.is_anomaly()).map(|(r, _)| r.l1()));
        assert!(genuine > anomalous, "seed {seed}: {genuine} vs {anomalous}");
    }
}

#[test]
fn every_detector_separates_circles() {
    let scene = generate(&SyntheticSpec {
        kind: SceneKind::Circles,
        structures: 2,
        seed: 4,
        ..Default::default()
    })
    .unwrap();
    let sigma = estimate_sigma(&scene.data, &scene.structures).unwrap();
    let pool = sample_pool(&scene.data, 2500, &[ModelKind::Circle], &mut seeded_rng(1)).unwrap();
    for (method, mode) in [
        (Method::RuzHash, PreferenceMode::Continuous),
        (Method::RuzHash, PreferenceMode::Binary),
        (Method::PiForest(DistanceKind::Ruzicka), PreferenceMode::Continuous),
        (Method::PiForest(DistanceKind::Jaccard), PreferenceMode::Binary),
    ] {
        let matrix = embed_dataset(&scene.data, &pool, &EmbeddingConfig::new(sigma, 3.0, mode).unwrap());
        let forest = build_forest(&matrix, &ForestConfig::new(method, 50, 256, 4, 2)).unwrap();
        let auc = roc_auc(&score_all(&matrix, &forest).unwrap(), scene.data.labels()).unwrap();
        assert!(auc > 0.8, "{method:?} {mode:?}: {auc}");
    }
}

#[test]
fn hash_forest_never_evaluates_distances() {
    let scene = generate(&SyntheticSpec::default()).unwrap();
    let pool = sample_pool(&scene.data, 1000, &[ModelKind::Line], &mut seeded_rng(0)).unwrap();
    let matrix = embed_dataset(&scene.data, &pool, &EmbeddingConfig::new(0.05, 3.0, PreferenceMode::Continuous).unwrap());
    let forest = build_forest(&matrix, &ForestConfig::new(Method::RuzHash, 30, 256, 8, 0)).unwrap();
    let (_, ops) = score_all_counted(&matrix, &forest).unwrap();
    assert_eq!(ops.distance_evaluations, 0);
    assert_eq!(forest.train_ops().distance_evaluations, 0);
    // Every point traverses at least the root of every tree.
    assert!(ops.rule_evaluations >= 500 * 30);
}
