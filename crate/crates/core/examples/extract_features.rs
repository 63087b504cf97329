//! Extracts the per-hole feature matrix and prints a few columns.
//!
//! cargo run --example extract_features

use mwd_assay::features::{extract_features, FeatureConfig};
use mwd_assay::synth::{generate_site, SiteSpec};

fn main() {
    let spec = SiteSpec {
        n_regions: 1,
        blasts_per_region: 2,
        holes_per_blast: 5,
        ..SiteSpec::default()
    };
    let (dataset, _) = generate_site(&spec).unwrap();
    let cfg = FeatureConfig::default();
    let table = extract_features(dataset.signal_sets(), &cfg).unwrap();
    println!("{} holes x {} features", table.len(), table.names.len());

    let show = ["torque__hjorth_mobility", "rop__svd_entropy", "pr__sad"];
    let cols: Vec<usize> = show.iter().map(|n| table.column_index(n).expect("known column")).collect();
    println!("{:<14} {}", "hole", show.join("  "));
    for (i, id) in table.hole_ids.iter().enumerate() {
        let vals: Vec<String> = cols.iter().map(|&c| format!("{:>10.4}", table.data[(i, c)])).collect();
        println!("{id:<14} {}", vals.join("  "));
    }
}
