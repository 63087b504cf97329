//! Writes the report text and plots of one cross-validated evaluation.
//!
//! cargo run --release --example evaluation_report -- [out_dir]

use mwd_assay::datamodel::Assay;
use mwd_assay::features::FeatureConfig;
use mwd_assay::models::RfParams;
use mwd_assay::report::{evaluation_artifacts, Provenance};
use mwd_assay::synth::{generate_site, SiteSpec};
use mwd_assay::validation::{make_folds, run_cv, ExperimentData, FoldMode, ModelSpec, Target};

fn main() {
    let out = std::env::args().nth(1).unwrap_or_else(|| "evaluation_report".into());
    let spec = SiteSpec { n_regions: 1, blasts_per_region: 8, holes_per_blast: 30, chemistry_coverage: 1.0, ..SiteSpec::default() };
    let (dataset, _) = generate_site(&spec).unwrap();
    let fe = Target::Assay(Assay::Fe);
    let data = ExperimentData::from_dataset(&dataset, &FeatureConfig::default()).unwrap().restrict(&fe, None);
    let params = RfParams { n_trees: 100, ..RfParams::default() };
    let plan = make_folds(&data.fold_keys(), FoldMode::RandomKFold, 5, 0).unwrap();
    let report = run_cv(&data, &fe, &ModelSpec::Rf(params.clone()), &plan, None).unwrap();

    let prov = Provenance::new(0, &params);
    std::fs::create_dir_all(&out).unwrap();
    for (name, contents) in evaluation_artifacts(&report, &prov) {
        std::fs::write(format!("{out}/{name}"), contents).unwrap();
        println!("wrote {out}/{name}");
    }
    print!("{}", mwd_assay::report::report_text(&report, &prov));
}
