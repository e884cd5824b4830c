use beanrec_core::dataset::synthetic::{synthetic_records, SyntheticConfig};
use beanrec_core::dataset::{subjective_matrix, tree_importance, CoffeeRecord, Encoder};
use beanrec_core::evaluation::rmse;
use beanrec_core::regressors::{
    fit_forest, fit_svr, FeatureSubset, ForestConfig, MlpConfig, RegressorConfig, SvrConfig, SvrParams,
    TrainedRegressor,
};
use beanrec_core::{rng, Error};
use ndarray::{Array2, Axis};
use rand::Rng;

fn records(n: usize, seed: u64) -> Vec<CoffeeRecord> {
    synthetic_records(&SyntheticConfig {
        rows: n,
        seed,
        dirty: false,
        ..Default::default()
    })
}

fn mean_rmse(pred: &Array2<f64>, truth: &Array2<f64>) -> f64 {
    let r = rmse(pred.view(), truth.view()).unwrap();
    r.iter().sum::<f64>() / r.len() as f64
}

#[test]
fn single_unbootstrapped_tree_memorizes() {
    let mut r = rng::stream(5, &[0]);
    let x = Array2::from_shape_simple_fn((80, 4), || r.random_range(-1.0..1.0));
    let y = Array2::from_shape_simple_fn((80, 8), || r.random_range(5.0..9.0));
    let cfg = ForestConfig {
        n_trees: 1,
        bootstrap: false,
        ..Default::default()
    };
    let fit = fit_forest(x.view(), y.view(), &cfg).unwrap();
    assert_eq!(fit.forest.predict_raw(x.view()), y);
}

#[test]
fn forest_is_deterministic() {
    let recs = records(200, 1);
    let cfg = RegressorConfig::Forest(ForestConfig {
        n_trees: 5,
        features_per_split: FeatureSubset::Sqrt,
        seed: 9,
        ..Default::default()
    });
    let a = TrainedRegressor::train(&recs, &cfg).unwrap();
    let b = TrainedRegressor::train(&recs, &cfg).unwrap();
    assert_eq!(a.to_json().unwrap(), b.to_json().unwrap());
    let c = TrainedRegressor::train(&recs, &cfg.with_seed(10)).unwrap();
    assert_ne!(a.to_json().unwrap(), c.to_json().unwrap());
}

#[test]
fn more_trees_do_not_hurt_held_out_error() {
    let recs = records(400, 2);
    let (train, test) = recs.split_at(300);
    let truth = subjective_matrix(test);
    let err = |n_trees| {
        let cfg = RegressorConfig::Forest(ForestConfig {
            n_trees,
            seed: 3,
            ..Default::default()
        });
        let m = TrainedRegressor::train(train, &cfg).unwrap();
        mean_rmse(&m.predict_records(test), &truth)
    };
    let one = err(1);
    let twenty = err(20);
    assert!(twenty <= one, "20 trees {twenty} vs 1 tree {one}");
}

#[test]
fn noise_column_ranks_low() {
    let reps = 30;
    let mut below = 0;
    for rep in 0..reps {
        let mut r = rng::stream(rep, &[1]);
        let n = 150;
        let x = Array2::from_shape_simple_fn((n, 5), || r.random_range(-1.0..1.0));
        let mut y = Array2::zeros((n, 2));
        for i in 0..n {
            let row = x.row(i);
            y[[i, 0]] = 3.0 * row[0] + 2.0 * row[1] + row[2] + 0.1 * r.random_range(-1.0..1.0);
            y[[i, 1]] = row[3] - 2.0 * row[0];
        }
        // column 4 is pure noise
        let cfg = ForestConfig {
            n_trees: 10,
            seed: rep,
            ..Default::default()
        };
        let imp = tree_importance(x.view(), y.view(), &cfg).unwrap().importances;
        let mut sorted = imp.clone();
        sorted.sort_by(f64::total_cmp);
        let median = sorted[sorted.len() / 2];
        if imp[4] < median {
            below += 1;
        }
    }
    assert!(below * 2 > reps, "noise below median in {below}/{reps} runs");
}

#[test]
fn svr_beats_the_mean_on_a_sine() {
    let n = 80;
    let x = Array2::from_shape_fn((n, 1), |(i, _)| i as f64 * std::f64::consts::TAU / n as f64);
    let y = x.mapv(|v| 5.0 + 2.0 * v.sin());
    let cfg = SvrConfig::uniform(SvrParams { c: 10.0, gamma: 1.0 }, 1);
    let fit = fit_svr(x.view(), y.view(), &cfg).unwrap();
    assert!(fit.all_converged());
    let pred = fit.predict_raw(x.view());
    let mean = y.mean_axis(Axis(0)).unwrap();
    let baseline = y.mapv(|_| mean[0]);
    let model_err = mean_rmse(&pred, &y);
    let base_err = mean_rmse(&baseline, &y);
    assert!(model_err < base_err / 4.0, "svr {model_err} vs mean {base_err}");
}

fn small_configs() -> Vec<RegressorConfig> {
    vec![
        RegressorConfig::Forest(ForestConfig {
            n_trees: 4,
            seed: 1,
            ..Default::default()
        }),
        RegressorConfig::Svr(SvrConfig::default()),
        RegressorConfig::Mlp(MlpConfig {
            hidden_layers: vec![16, 16],
            epochs: 5,
            seed: 1,
            ..Default::default()
        }),
    ]
}

#[test]
fn save_and_load_round_trip() {
    let recs = records(120, 3);
    let probe = records(40, 4);
    let dir = tempfile::tempdir().unwrap();
    for cfg in small_configs() {
        let model = TrainedRegressor::train(&recs, &cfg).unwrap();
        let path = dir.path().join(format!("{}.json", cfg.family().name()));
        model.save(&path).unwrap();
        let loaded = TrainedRegressor::load(&path).unwrap();
        assert_eq!(loaded, model);
        let a = model.predict_records(&probe);
        let b = loaded.predict_records(&probe);
        assert!(a.iter().zip(&b).all(|(p, q)| p.to_bits() == q.to_bits()));
        assert!(a.iter().all(|&v| v > 0.0 && v <= 10.0));

        let again = TrainedRegressor::train(&recs, &cfg).unwrap();
        let path2 = dir.path().join("again.json");
        again.save(&path2).unwrap();
        assert_eq!(std::fs::read(&path).unwrap(), std::fs::read(&path2).unwrap());
    }
}

#[test]
fn foreign_encoding_is_rejected() {
    let recs = records(120, 3);
    let other = records(60, 8);
    let model = TrainedRegressor::train(&recs, &small_configs()[0]).unwrap();
    let foreign = Encoder::fit_records(&other).unwrap();
    let (x, _) = foreign.transform_records(&recs);
    assert!(matches!(model.predict(&x), Err(Error::SchemaMismatch(_))));
    let (own, _) = model.encoder.transform_records(&recs);
    assert_eq!(model.predict(&own).unwrap(), model.predict_records(&recs));
}

#[test]
fn corrupt_model_files_are_rejected() {
    let recs = records(60, 3);
    let model = TrainedRegressor::train(&recs, &small_configs()[0]).unwrap();
    let json = model.to_json().unwrap();
    assert!(TrainedRegressor::from_json(&json.replace("\"beanrec-model\"", "\"other\"")).is_err());
    assert!(TrainedRegressor::from_json(&json.replacen("\"version\": 1", "\"version\": 99", 1)).is_err());
    assert!(TrainedRegressor::from_json(&json[..json.len() / 2]).is_err());
}
