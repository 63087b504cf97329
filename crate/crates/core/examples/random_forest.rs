//! Trains a regression forest and a classification forest on toy data.
//!
//! cargo run --release --example random_forest

use mwd_assay::features::FeatureTable;
use mwd_assay::linalg::Matrix;
use mwd_assay::models::{train_mvrf, train_rf, RfParams, Task};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let rows: Vec<Vec<f64>> = (0..300).map(|_| (0..4).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
    let y: Vec<f64> = rows.iter().map(|r| r[0] * r[0] + 0.5 * r[1]).collect();
    let table = FeatureTable::from_matrix(Matrix::from_rows(&rows[..200]));
    let test = FeatureTable::from_matrix(Matrix::from_rows(&rows[200..]));

    let params = RfParams { n_trees: 100, ..RfParams::default() };
    let reg = train_rf(&table, &y[..200], &params, Task::Regression).unwrap();
    let pred = reg.predict(&test).unwrap();
    let mse = pred.values().iter().zip(&y[200..]).map(|(p, t)| (p - t).powi(2)).sum::<f64>() / 100.0;
    println!("regression: held-out MSE {mse:.4}");

    let class: Vec<f64> = y.iter().map(|v| if *v > 0.3 { 1.0 } else { 0.0 }).collect();
    let clf = train_rf(&table, &class[..200], &params, Task::Classification).unwrap();
    let hits = clf.predict(&test).unwrap().values().iter().zip(&class[200..]).filter(|(p, t)| p == t).count();
    println!("classification: {hits}/100 held-out rows correct");

    let y2: Vec<f64> = rows.iter().map(|r| r[2] - r[3]).collect();
    let mv = train_mvrf(&table, &[y[..200].to_vec(), y2[..200].to_vec()], &params).unwrap();
    let out = mv.predict(&test).unwrap();
    println!("multivariate: first test row -> ({:.3}, {:.3}), truth ({:.3}, {:.3})", out.outputs[0][0], out.outputs[1][0], y[200], y2[200]);

    for (name, v) in reg.feature_importance().unwrap() {
        println!("  importance {name}: {v:.3}");
    }
}
