//! RBF support vector machine on the XOR pattern and on noisy blobs.
//!
//! cargo run --example svm_classifier

use mwd_assay::features::FeatureTable;
use mwd_assay::linalg::Matrix;
use mwd_assay::models::{train_svm, Fitted, SvmParams};

fn main() {
    let xor = [[0.0, 0.0], [1.0, 1.0], [0.0, 1.0], [1.0, 0.0]];
    let labels = [-1.0, -1.0, 1.0, 1.0];
    let table = FeatureTable::from_matrix(Matrix::from_rows(&xor));
    let params = SvmParams { c: 10.0, rbf_gamma: Some(1.0), ..SvmParams::default() };
    let model = train_svm(&table, &labels, &params).unwrap();
    println!("XOR predictions {:?} (labels {labels:?})", model.predict(&table).unwrap().values());
    if let Fitted::Svm(svm) = &model.fitted {
        println!(
            "converged {} after {} iterations, KKT gap {:.2e}, decision {:?}",
            svm.converged,
            svm.iterations,
            svm.kkt_gap,
            svm.decision_function(&table.data)
        );
    }
}
