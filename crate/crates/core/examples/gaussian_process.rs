//! Grid-selected Gaussian-process regression with predictive variance.
//!
//! cargo run --release --example gaussian_process

use mwd_assay::features::FeatureTable;
use mwd_assay::linalg::Matrix;
use mwd_assay::models::{train_gp, Fitted, GpGrid};

fn main() {
    let f = |x: f64| x.sin() + 0.05 * (7.0 * x).cos();
    let xs: Vec<f64> = (0..30).map(|i| i as f64 * 0.2).collect();
    let y: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
    let rows: Vec<[f64; 1]> = xs.iter().map(|x| [*x]).collect();
    let model = train_gp(&FeatureTable::from_matrix(Matrix::from_rows(&rows)), &y, &GpGrid::default()).unwrap();
    if let Fitted::Gp(gp) = &model.fitted {
        let best = gp.best_grid_point().unwrap();
        println!(
            "selected lengthscale {} noise ratio {} (log likelihood {:.3})",
            best.lengthscale,
            best.noise_ratio,
            best.log_likelihood.unwrap()
        );
    }
    let probe: Vec<[f64; 1]> = [0.5, 2.9, 5.5, 9.0].iter().map(|x| [*x]).collect();
    let out = model.predict(&FeatureTable::from_matrix(Matrix::from_rows(&probe))).unwrap();
    let var = out.variance.unwrap();
    for (k, p) in probe.iter().enumerate() {
        println!("x = {:>4}: mean {:+.4} sd {:.4} (true {:+.4})", p[0], out.outputs[0][k], var[0][k].sqrt(), f(p[0]));
    }
}
