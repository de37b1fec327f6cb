use hipfrac::classifiers::{train, ClassifierKind, ClassifierSpec, TrainedModel};
use hipfrac::stats::roc_auc;
use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

fn names(p: usize) -> Vec<String> {
    (0..p).map(|j| format!("f{j}")).collect()
}

/// Two Gaussian blobs whose means differ by `shift` on every axis.
fn blobs(n: usize, p: usize, shift: f64, seed: u64) -> (DMatrix<f64>, Vec<u8>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let y: Vec<u8> = (0..n).map(|i| (i % 2) as u8).collect();
    let x = DMatrix::from_fn(n, p, |i, _| {
        let e: f64 = StandardNormal.sample(&mut rng);
        e + shift * f64::from(y[i])
    });
    (x, y)
}

fn rows(x: &DMatrix<f64>, idx: &[usize]) -> DMatrix<f64> {
    x.select_rows(idx)
}

#[test]
fn separated_blobs_are_learned_by_every_kind() {
    let (x, y) = blobs(200, 3, 4.0, 1);
    for kind in ClassifierKind::ALL {
        let model = train(&ClassifierSpec::new(kind), &x, &y, &names(3)).unwrap();
        let scores = model.predict_scores(&x).unwrap();
        assert!(scores.iter().all(|s| (0.0..=1.0).contains(s)));
        let (_, auc) = roc_auc(&scores, &y).unwrap();
        assert!(auc > 0.95, "{kind}: {auc}");
    }
}

#[test]
fn null_labels_give_chance_auc_out_of_sample() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let n = 400;
    let x = DMatrix::from_fn(n, 4, |_, _| StandardNormal.sample(&mut rng));
    let mut y: Vec<u8> = (0..n).map(|i| u8::from(i < n / 2)).collect();
    y.shuffle(&mut rng);
    for kind in ClassifierKind::ALL {
        let mut scores = vec![0.0; n];
        for fold in 0..5 {
            let test: Vec<usize> = (0..n).filter(|i| i % 5 == fold).collect();
            let train_idx: Vec<usize> = (0..n).filter(|i| i % 5 != fold).collect();
            let ty: Vec<u8> = train_idx.iter().map(|&i| y[i]).collect();
            let m = train(&ClassifierSpec::new(kind), &rows(&x, &train_idx), &ty, &names(4)).unwrap();
            for (s, &i) in m.predict_scores(&rows(&x, &test)).unwrap().into_iter().zip(&test) {
                scores[i] = s;
            }
        }
        let (_, auc) = roc_auc(&scores, &y).unwrap();
        assert!((auc - 0.5).abs() < 0.1, "{kind}: {auc}");
    }
}

#[test]
fn qda_far_positive_point_is_confident() {
    let (x, y) = blobs(100, 2, 3.0, 8);
    let m = train(&ClassifierSpec::new(ClassifierKind::Qda), &x, &y, &names(2)).unwrap();
    let s = m.predict_scores(&DMatrix::from_row_slice(1, 2, &[9.0, 9.0])).unwrap();
    assert!(s[0] > 0.99);
}

#[test]
fn row_order_does_not_change_predictions() {
    let (x, y) = blobs(80, 3, 1.0, 21);
    let mut perm: Vec<usize> = (0..80).collect();
    perm.shuffle(&mut ChaCha8Rng::seed_from_u64(4));
    let xp = rows(&x, &perm);
    let yp: Vec<u8> = perm.iter().map(|&i| y[i]).collect();
    let (query, _) = blobs(20, 3, 0.5, 22);
    for kind in ClassifierKind::ALL {
        let spec = ClassifierSpec::new(kind);
        let a = train(&spec, &x, &y, &names(3)).unwrap().predict_scores(&query).unwrap();
        let b = train(&spec, &xp, &yp, &names(3)).unwrap().predict_scores(&query).unwrap();
        for (u, v) in a.iter().zip(&b) {
            assert!((u - v).abs() < 1e-12, "{kind}: {u} vs {v}");
        }
    }
}

#[test]
fn trained_models_round_trip_through_json() {
    let (x, y) = blobs(60, 3, 1.5, 5);
    for kind in ClassifierKind::ALL {
        let m = train(&ClassifierSpec::new(kind), &x, &y, &names(3)).unwrap();
        let back: TrainedModel = serde_json::from_str(&serde_json::to_string(&m).unwrap()).unwrap();
        assert_eq!(m.predict_scores(&x).unwrap(), back.predict_scores(&x).unwrap());
    }
}
