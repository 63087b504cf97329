//! Ranks the MWD features that drive the Fe prediction.
//!
//! cargo run --release --example feature_importance

use mwd_assay::datamodel::Assay;
use mwd_assay::features::FeatureConfig;
use mwd_assay::models::{rf_feature_importance, RfParams, Task};
use mwd_assay::synth::{generate_site, SiteSpec};
use mwd_assay::validation::{ExperimentData, ModelSpec, Target};

fn main() {
    let spec = SiteSpec { n_regions: 1, blasts_per_region: 8, holes_per_blast: 30, chemistry_coverage: 1.0, ..SiteSpec::default() };
    let (dataset, _) = generate_site(&spec).unwrap();
    let fe = Target::Assay(Assay::Fe);
    let data = ExperimentData::from_dataset(&dataset, &FeatureConfig::default()).unwrap().restrict(&fe, None);
    let y: Vec<f64> = data.labels.iter().map(|l| l.as_ref().unwrap().assay(Assay::Fe).unwrap()).collect();
    let model = ModelSpec::Rf(RfParams { n_trees: 200, ..RfParams::default() })
        .fit(&data.table, &[y], Task::Regression)
        .unwrap()
        .remove(0);
    for (k, (name, v)) in rf_feature_importance(&model).unwrap().iter().take(10).enumerate() {
        println!("{:>2}. {name:<32} {v:.4}", k + 1);
    }
}
