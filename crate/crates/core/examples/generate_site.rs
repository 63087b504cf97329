//! Generates a small synthetic site and prints what is in it.
//!
//! cargo run --example generate_site

use mwd_assay::datamodel::Assay;
use mwd_assay::synth::{generate_site, SiteSpec};

fn main() {
    let spec = SiteSpec {
        n_regions: 1,
        blasts_per_region: 3,
        holes_per_blast: 8,
        seed: 42,
        ..SiteSpec::default()
    };
    let (dataset, truth) = generate_site(&spec).expect("valid spec");
    println!("{} holes, {} samples each, fingerprint {}", dataset.len(), spec.samples_per_hole(), &truth.fingerprint[..12]);

    for (hole, label) in dataset.holes().iter().take(5) {
        let t = truth.hole(&hole.hole_id).unwrap();
        let fe = label.as_ref().and_then(|l| l.assay(Assay::Fe));
        println!(
            "{}  blast {}  mean hardness {:.2}  Fe truth {:.1}  Fe label {}",
            hole.hole_id,
            hole.blast_id,
            t.hardness.iter().sum::<f64>() / t.hardness.len() as f64,
            t.assays[&Assay::Fe],
            fe.map_or("-".to_string(), |v| format!("{v:.1}")),
        );
    }
}
