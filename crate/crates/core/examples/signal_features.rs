//! The individual extractors on hand-made signals.
//!
//! cargo run --example signal_features

use mwd_assay::features::{
    crest_factor, descriptive_stats, flatness, hjorth, pressure_ratio_features, ssi, svd_entropy, waveform_length,
    PositivityPolicy,
};

fn main() {
    let smooth: Vec<f64> = (0..200).map(|i| 10.0 + (i as f64 * 0.05).sin()).collect();
    let rough: Vec<f64> = (0..200).map(|i| 10.0 + if i % 2 == 0 { 1.0 } else { -1.0 }).collect();

    for (name, x) in [("smooth", &smooth), ("rough", &rough)] {
        let h = hjorth(x).unwrap();
        println!(
            "{name:>6}: activity {:.4} mobility {:.4} complexity {:.4}",
            h.activity, h.mobility, h.complexity
        );
        println!(
            "        waveform length {:.2}, energy {:.1}, crest {:.4}, flatness {:.6}, svd entropy {:.4}",
            waveform_length(x).unwrap(),
            ssi(x),
            crest_factor(x).unwrap(),
            flatness(x).unwrap(),
            svd_entropy(x, 10).unwrap()
        );
        let d = descriptive_stats(x, PositivityPolicy::Offset).unwrap();
        println!("        {d:?}");
    }

    let rot = vec![60.0, 62.0, 65.0, 61.0, 59.0];
    let feed = vec![100.0, 98.0, 101.0, 99.0, 100.0];
    let fob = vec![80.0, 85.0, 83.0, 90.0, 82.0];
    println!("pressure ratio indicators: {:?}", pressure_ratio_features(&rot, &feed, &fob).unwrap());
}
