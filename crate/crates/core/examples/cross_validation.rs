//! Random and leave-one-blast-out cross-validation on a synthetic site.
//!
//! cargo run --release --example cross_validation

use mwd_assay::datamodel::Assay;
use mwd_assay::features::FeatureConfig;
use mwd_assay::models::RfParams;
use mwd_assay::synth::{generate_site, truth_check, SiteSpec};
use mwd_assay::validation::{make_folds, run_cv, ExperimentData, FoldMode, ModelSpec, Target};

fn main() {
    let spec = SiteSpec { n_regions: 1, blasts_per_region: 10, holes_per_blast: 40, chemistry_coverage: 1.0, ..SiteSpec::default() };
    let (dataset, truth) = generate_site(&spec).unwrap();
    let fe = Target::Assay(Assay::Fe);
    let data = ExperimentData::from_dataset(&dataset, &FeatureConfig::default()).unwrap().restrict(&fe, None);
    let rf = ModelSpec::Rf(RfParams { n_trees: 100, ..RfParams::default() });

    for mode in [FoldMode::RandomKFold, FoldMode::LeaveOneBlastOut] {
        let plan = make_folds(&data.fold_keys(), mode, 5, 0).unwrap();
        let report = run_cv(&data, &fe, &rf, &plan, None).unwrap();
        let s = report.stats().unwrap();
        let d = truth_check(&truth, &report).unwrap();
        println!(
            "{:>7} CV, {} folds: r {:.3}, RMSE {:.3}, bias {:+.3}; against noiseless truth r {:.3}",
            mode.as_str(),
            plan.k,
            s.r.unwrap(),
            s.rmse,
            s.bias,
            d.r_vs_truth.unwrap()
        );
    }
}
