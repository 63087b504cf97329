//! Pilot run over synthetic sites: prints the cross-validated numbers the
//! acceptance thresholds are set from.
//!
//! cargo run --release --example pilot -- [n_seeds] [n_trees]

use std::time::Instant;

use mwd_assay::datamodel::Assay;
use mwd_assay::features::FeatureConfig;
use mwd_assay::models::RfParams;
use mwd_assay::synth::{generate_site, SiteSpec};
use mwd_assay::validation::{
    make_folds, run_cv, run_cv_multi, ExperimentData, FoldMode, ModelSpec, Target,
};

fn r_of(data: &ExperimentData, target: &Target, spec: &ModelSpec, mode: FoldMode, seed: u64, augment: Option<Assay>) -> f64 {
    let data = data.restrict(target, augment);
    let plan = make_folds(&data.fold_keys(), mode, 5, seed).unwrap();
    let rep = run_cv(&data, target, spec, &plan, augment).unwrap();
    match rep.stats() {
        Some(s) => s.r.unwrap_or(f64::NAN),
        None => rep.confusion().unwrap().accuracy,
    }
}

fn main() {
    let args: Vec<u64> = std::env::args().skip(1).map(|a| a.parse().unwrap()).collect();
    let n_seeds = args.first().copied().unwrap_or(3);
    let n_trees = args.get(1).copied().unwrap_or(100) as usize;
    let cfg = FeatureConfig::default();
    println!("seed,sigma_b,fe_random,fe_spatial,shl_acc,al_mwd,al_aug,mv_fe,mv_si,mv_al,uv_si");
    for seed in 0..n_seeds {
        for sigma_b in [0.2, 0.0] {
            let t0 = Instant::now();
            let spec = SiteSpec { seed, blast_bias: sigma_b, ..SiteSpec::default() };
            let (ds, _) = generate_site(&spec).unwrap();
            let data = ExperimentData::from_dataset(&ds, &cfg).unwrap();
            let rf = ModelSpec::Rf(RfParams { n_trees, seed, ..RfParams::default() });
            let fe = Target::Assay(Assay::Fe);
            let fe_random = r_of(&data, &fe, &rf, FoldMode::RandomKFold, seed, None);
            let fe_spatial = r_of(&data, &fe, &rf, FoldMode::LeaveOneBlastOut, seed, None);
            let shl = Target::Material { code: "SHL".into(), threshold: 0.0 };
            let shl_acc = r_of(&data, &shl, &rf, FoldMode::RandomKFold, seed, None);
            let al = Target::Assay(Assay::Al2O3);
            let al_mwd = r_of(&data, &al, &rf, FoldMode::RandomKFold, seed, None);
            let al_aug = r_of(&data, &al, &rf, FoldMode::RandomKFold, seed, Some(Assay::Fe));
            let three = Target::Assays(vec![Assay::Fe, Assay::SiO2, Assay::Al2O3]);
            let d3 = data.restrict(&three, None);
            let plan = make_folds(&d3.fold_keys(), FoldMode::RandomKFold, 5, seed).unwrap();
            let mv = run_cv_multi(&d3, &three, &ModelSpec::Mvrf(RfParams { n_trees, seed, ..RfParams::default() }), &plan, None).unwrap();
            let uv_si = r_of(&data, &Target::Assay(Assay::SiO2), &rf, FoldMode::RandomKFold, seed, None);
            let mvr: Vec<f64> = mv.iter().map(|r| r.stats().unwrap().r.unwrap()).collect();
            println!(
                "{seed},{sigma_b},{fe_random:.3},{fe_spatial:.3},{shl_acc:.3},{al_mwd:.3},{al_aug:.3},{:.3},{:.3},{:.3},{uv_si:.3}  ({:.1}s)",
                mvr[0], mvr[1], mvr[2], t0.elapsed().as_secs_f64()
            );
        }
    }
}
