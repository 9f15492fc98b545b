use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use veridict::classifiers::{
    flatten, train, train_boosted, GbdtParams, Model, ModelKind, Network, RfParams, TrainConfig,
};
use veridict::synth::gaussian_clouds;
use veridict::{Error, Matrix};

const FP: &str = "fixture";

fn accuracy(pred: &[u8], y: &[u8]) -> f64 {
    pred.iter().zip(y).filter(|(a, b)| a == b).count() as f64 / y.len() as f64
}

type Labelled = (Matrix, Vec<u8>);

/// Rows 0..140 train, 140..160 validation, 160..200 test.
fn gaussian_split() -> (Labelled, Labelled, Labelled) {
    let (x, y) = gaussian_clouds(100, 5, 3.0, 0);
    let part = |r: std::ops::Range<usize>| {
        let idx: Vec<usize> = r.collect();
        (x.select_rows(&idx), idx.iter().map(|&i| y[i]).collect::<Vec<u8>>())
    };
    (part(0..140), part(140..160), part(160..200))
}

#[test]
fn mlp_gradients_match_central_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let x = Matrix::from_vec(10, 4, (0..40).map(|_| rng.random_range(-2.0..2.0)).collect()).unwrap();
    let y: Vec<u8> = (0..10).map(|i| (i % 2) as u8).collect();
    let rows: Vec<usize> = (0..10).collect();
    let mut net = Network::init(4, &[6, 3], &mut rng);
    // non-zero biases so every parameter kind is exercised
    for layer in &mut net.layers {
        layer.b.iter_mut().for_each(|b| *b = rng.random_range(-0.5..0.5));
    }
    let (_, grads) = net.loss_and_grad(&x, &y, &rows);
    let analytic = flatten(&grads);
    let eps = 1e-4;
    let mut worst: f64 = 0.0;
    for (k, &a) in analytic.iter().enumerate() {
        let mut plus = net.clone();
        *plus.params_mut().nth(k).unwrap() += eps;
        let mut minus = net.clone();
        *minus.params_mut().nth(k).unwrap() -= eps;
        let numeric = (plus.loss(&x, &y, &rows) - minus.loss(&x, &y, &rows)) / (2.0 * eps);
        let rel = (a - numeric).abs() / a.abs().max(numeric.abs()).max(1e-8);
        worst = worst.max(rel);
    }
    assert!(worst < 1e-4, "max relative error {worst}");
}

#[test]
fn gbdt_training_loss_never_increases() {
    let (x, y) = gaussian_clouds(60, 4, 1.0, 11);
    let (_, losses) = train_boosted(&x, &y, &GbdtParams::default());
    assert_eq!(losses.len(), 201);
    for w in losses.windows(2) {
        assert!(w[1] <= w[0] + 1e-12, "loss rose from {} to {}", w[0], w[1]);
    }
    assert!(losses[200] < losses[0]);
}

#[test]
fn all_models_separate_two_gaussians() {
    let ((xt, yt), (xv, yv), (xs, ys)) = gaussian_split();
    for kind in ModelKind::ALL {
        let start = Instant::now();
        let model = train(&xt, &yt, Some((&xv, &yv)), &TrainConfig::new(kind, 0), FP).unwrap();
        let acc = accuracy(&model.predict(&xs, FP, 0.5).unwrap(), &ys);
        let elapsed = start.elapsed();
        assert!(acc >= 0.98, "{kind}: accuracy {acc}");
        assert!(elapsed < Duration::from_secs(10), "{kind}: {elapsed:?}");
    }
}

fn memorizable() -> (Matrix, Vec<u8>) {
    // 20 distinct points with shuffled balanced labels: no structure to learn
    use rand::seq::SliceRandom;
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let x = Matrix::from_vec(20, 2, (0..40).map(|_| rng.random_range(0.0..1.0)).collect()).unwrap();
    let mut y: Vec<u8> = (0..20).map(|i| (i % 2) as u8).collect();
    y.shuffle(&mut rng);
    (x, y)
}

#[test]
fn trees_memorize_a_small_training_set() {
    let (x, y) = memorizable();
    let mut rf = TrainConfig::new(ModelKind::Rf, 0);
    rf.rf.min_samples_leaf = 1;
    let gbdt = TrainConfig::new(ModelKind::Gbdt, 0);
    for cfg in [rf, gbdt] {
        let mut cfg = cfg;
        cfg.gbdt.min_child_weight = 0.0;
        let model = train(&x, &y, None, &cfg, FP).unwrap();
        assert_eq!(accuracy(&model.predict(&x, FP, 0.5).unwrap(), &y), 1.0, "{}", cfg.model);
    }
}

#[test]
fn mlp_puts_training_points_on_the_right_side() {
    let (x, y) = gaussian_clouds(20, 2, 4.0, 5);
    let model = train(&x, &y, None, &TrainConfig::new(ModelKind::Mlp, 0), FP).unwrap();
    let proba = model.predict_proba(&x, FP).unwrap();
    for (p, t) in proba.iter().zip(&y) {
        assert_eq!(u8::from(*p >= 0.5), *t, "proba {p} for label {t}");
    }
}

#[test]
fn training_is_deterministic() {
    let ((xt, yt), (xv, yv), (xs, _)) = gaussian_split();
    for kind in ModelKind::ALL {
        let cfg = TrainConfig::new(kind, 7);
        let a = train(&xt, &yt, Some((&xv, &yv)), &cfg, FP).unwrap();
        let b = train(&xt, &yt, Some((&xv, &yv)), &cfg, FP).unwrap();
        assert_eq!(a.predict_proba(&xs, FP).unwrap(), b.predict_proba(&xs, FP).unwrap(), "{kind}");
    }
}

#[test]
fn tree_predictions_survive_monotone_rescaling() {
    let (x, y) = gaussian_clouds(40, 3, 1.0, 9);
    let (probe, _) = gaussian_clouds(15, 3, 1.0, 10);
    let rescale = |m: &Matrix| {
        let mut out = m.clone();
        for i in 0..m.rows() {
            out.set(i, 1, 2.0 * m.get(i, 1) + 1.0);
        }
        out
    };
    for kind in [ModelKind::Rf, ModelKind::Gbdt] {
        let cfg = TrainConfig::new(kind, 4);
        let a = train(&x, &y, None, &cfg, FP).unwrap();
        let b = train(&rescale(&x), &y, None, &cfg, FP).unwrap();
        assert_eq!(
            a.predict_proba(&probe, FP).unwrap(),
            b.predict_proba(&rescale(&probe), FP).unwrap(),
            "{kind}"
        );
    }
}

#[test]
fn forest_golden_predictions() {
    let (x, y) = gaussian_clouds(30, 4, 0.8, 21);
    let (probe, _) = gaussian_clouds(4, 4, 0.8, 22);
    let mut cfg = TrainConfig::new(ModelKind::Rf, 1);
    cfg.rf = RfParams {
        n_trees: 25,
        ..RfParams::default()
    };
    let model = train(&x, &y, None, &cfg, FP).unwrap();
    let got = model.predict_proba(&probe, FP).unwrap();
    // frozen output; a change here means tree growth or sampling changed
    let golden = [0.72, 0.88, 0.24, 0.76, 0.28, 0.56, 0.12, 0.68];
    assert_eq!(got, golden);
}

#[test]
fn model_file_round_trips() {
    let ((xt, yt), (xv, yv), (xs, _)) = gaussian_split();
    let dir = tempfile::tempdir().unwrap();
    for kind in ModelKind::ALL {
        let mut cfg = TrainConfig::new(kind, 2);
        cfg.rf.n_trees = 20;
        cfg.gbdt.rounds = 20;
        cfg.mlp.epochs = 20;
        let model = train(&xt, &yt, Some((&xv, &yv)), &cfg, FP).unwrap();
        let path = dir.path().join(format!("{kind}.vrd"));
        model.save(&path).unwrap();
        assert!(std::fs::read(&path).unwrap().starts_with(b"VRD1\n"));
        let back = Model::load(&path).unwrap();
        assert_eq!(back, model);
        assert_eq!(back.predict_proba(&xs, FP).unwrap(), model.predict_proba(&xs, FP).unwrap());
    }
    let bad = dir.path().join("bad.vrd");
    std::fs::write(&bad, b"{}").unwrap();
    assert!(matches!(Model::load(&bad), Err(Error::ModelFormat(_))));
}

#[test]
fn prediction_checks_manifest_and_width() {
    let (x, y) = gaussian_clouds(10, 3, 3.0, 1);
    let model = train(&x, &y, None, &TrainConfig::new(ModelKind::Gbdt, 0), FP).unwrap();
    assert!(matches!(model.predict_proba(&x, "other"), Err(Error::Manifest(_))));
    let narrow = x.select_cols(&[0, 1]);
    assert!(matches!(model.predict_proba(&narrow, FP), Err(Error::Manifest(_))));
}

#[test]
fn constant_columns_are_allowed() {
    let (x, y) = gaussian_clouds(20, 2, 3.0, 2);
    let mut rows: Vec<Vec<f64>> = x.iter_rows().map(|r| r.to_vec()).collect();
    rows.iter_mut().for_each(|r| r.push(4.0));
    let x = Matrix::from_rows(&rows).unwrap();
    for kind in ModelKind::ALL {
        let model = train(&x, &y, None, &TrainConfig::new(kind, 0), FP).unwrap();
        assert!(model.predict_proba(&x, FP).unwrap().iter().all(|p| p.is_finite()));
    }
}
