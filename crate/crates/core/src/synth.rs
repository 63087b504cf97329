//! Synthetic drill sites with a known link between rock hardness, MWD
//! signals and per-hole labels.
//!
//! Every blast has a layer template (one to `max_layers` layers, each filled
//! with one material). Holes jitter the template's boundaries and now and
//! then swap a layer's material. Each 0.1 m sample's signals are affine in a
//! saturating transform of the local hardness, plus Gaussian noise scaled by
//! `signal_noise` and a per-blast offset scaled by `blast_bias`. Labels are
//! depth-weighted material signatures plus observation noise and a per-blast
//! assay offset.
//!
//! All numeric defaults are arbitrary: there is no real geology to calibrate
//! against.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::datamodel::{Assay, DataError, Dataset, HoleSignalSet, LabelRecord, SignalName, MWD_HEADER};
use crate::validation::{pearson_r, rmse, EvaluationReport};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SynthError {
    #[error("invalid site spec: {0}")]
    InvalidSpec(String),
    #[error("report does not belong to this site: {0}")]
    MismatchedProvenance(String),
    #[error(transparent)]
    Data(#[from] DataError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AssaySignature {
    /// Mean mass %.
    pub mean: f64,
    /// SD of a single hole's observation around the mean.
    pub spread: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaterialSpec {
    pub code: String,
    /// Dimensionless, typically in [0.5, 3].
    pub hardness: f64,
    pub assay_signature: BTreeMap<Assay, AssaySignature>,
}

impl MaterialSpec {
    fn new(code: &str, hardness: f64, sig: [(f64, f64); 10]) -> Self {
        MaterialSpec {
            code: code.to_string(),
            hardness,
            assay_signature: Assay::ALL
                .iter()
                .zip(sig)
                .map(|(a, (mean, spread))| (*a, AssaySignature { mean, spread }))
                .collect(),
        }
    }

    /// Eight material types loosely modelled on iron ore stratigraphy: two
    /// shales, banded iron formation and five ore types. Iron runs opposite
    /// to silica and alumina. Hardness is deliberately close for some pairs
    /// with different chemistry (SHF/GOL), so a lab value of one assay
    /// carries information about another that the signals do not.
    pub fn defaults() -> Vec<MaterialSpec> {
        // order: Al2O3 Fe SiO2 P S Mn MgO TiO2 CaO LOI
        vec![
            MaterialSpec::new(
                "SHL",
                0.7,
                [(17.0, 1.5), (28.0, 2.0), (32.0, 2.0), (0.06, 0.01), (0.08, 0.02), (0.2, 0.05), (1.8, 0.3), (0.9, 0.1), (0.3, 0.1), (9.0, 1.0)],
            ),
            MaterialSpec::new(
                "BIF",
                2.9,
                [(1.5, 0.4), (36.0, 2.0), (44.0, 2.0), (0.05, 0.01), (0.02, 0.01), (0.1, 0.03), (0.8, 0.2), (0.05, 0.02), (0.5, 0.1), (2.5, 0.5)],
            ),
            MaterialSpec::new(
                "BPO",
                2.0,
                [(2.2, 0.4), (61.0, 1.0), (4.5, 0.8), (0.12, 0.02), (0.02, 0.01), (0.05, 0.02), (0.1, 0.05), (0.08, 0.02), (0.05, 0.02), (5.0, 0.6)],
            ),
            MaterialSpec::new(
                "GOL",
                1.15,
                [(2.8, 0.5), (57.5, 1.2), (6.0, 1.0), (0.14, 0.02), (0.03, 0.01), (0.08, 0.03), (0.15, 0.05), (0.1, 0.03), (0.05, 0.02), (8.5, 0.8)],
            ),
            MaterialSpec::new(
                "HGM",
                2.5,
                [(1.0, 0.3), (65.0, 0.8), (2.5, 0.5), (0.06, 0.01), (0.01, 0.005), (0.03, 0.01), (0.05, 0.02), (0.04, 0.01), (0.03, 0.01), (1.5, 0.3)],
            ),
            MaterialSpec::new(
                "HGF",
                1.5,
                [(1.6, 0.3), (62.5, 0.9), (3.5, 0.6), (0.09, 0.02), (0.02, 0.01), (0.04, 0.01), (0.06, 0.02), (0.06, 0.02), (0.04, 0.01), (3.5, 0.5)],
            ),
            MaterialSpec::new(
                "SHF",
                1.0,
                [(9.0, 1.0), (47.0, 1.5), (15.0, 1.5), (0.1, 0.02), (0.05, 0.02), (0.15, 0.05), (0.9, 0.2), (0.45, 0.08), (0.15, 0.05), (7.5, 0.8)],
            ),
            MaterialSpec::new(
                "GMO",
                1.8,
                [(2.5, 0.4), (59.5, 1.0), (5.0, 0.8), (0.11, 0.02), (0.02, 0.01), (0.06, 0.02), (0.1, 0.04), (0.07, 0.02), (0.05, 0.02), (6.0, 0.6)],
            ),
        ]
    }
}

/// Site parameters. Fields missing from a JSON spec take their defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SiteSpec {
    pub n_regions: usize,
    pub blasts_per_region: usize,
    pub holes_per_blast: usize,
    /// Metres.
    pub hole_depth: f64,
    /// Metres.
    pub depth_step: f64,
    /// Each blast template has between 1 and `max_layers` layers.
    pub max_layers: usize,
    /// SD of the per-hole shift of each layer boundary, metres.
    pub layer_jitter: f64,
    /// Probability that a hole replaces a template layer's material.
    pub material_swap: f64,
    pub materials: Vec<MaterialSpec>,
    /// Per-sample signal noise, as a fraction of each channel's hardness gain.
    pub signal_noise: f64,
    /// Per-blast offset, as a fraction of each channel's hardness gain (and
    /// of half each assay's range across materials).
    pub blast_bias: f64,
    /// Multiplier on the materials' assay spreads.
    pub label_noise: f64,
    /// Fraction of holes with chemistry labels.
    pub chemistry_coverage: f64,
    /// Fraction of holes with material logs.
    pub material_coverage: f64,
    pub seed: u64,
}

impl Default for SiteSpec {
    fn default() -> Self {
        SiteSpec {
            n_regions: 2,
            blasts_per_region: 20,
            holes_per_blast: 50,
            hole_depth: 12.0,
            depth_step: 0.1,
            max_layers: 3,
            layer_jitter: 0.8,
            material_swap: 0.3,
            materials: MaterialSpec::defaults(),
            signal_noise: 0.1,
            blast_bias: 0.2,
            label_noise: 1.0,
            chemistry_coverage: 0.25,
            material_coverage: 1.0 / 6.0,
            seed: 0,
        }
    }
}

impl SiteSpec {
    pub fn n_holes(&self) -> usize {
        self.n_regions * self.blasts_per_region * self.holes_per_blast
    }

    pub fn samples_per_hole(&self) -> usize {
        (self.hole_depth / self.depth_step).round() as usize
    }

    pub fn validate(&self) -> Result<(), SynthError> {
        let bad = |m: &str| Err(SynthError::InvalidSpec(m.to_string()));
        if self.n_holes() == 0 {
            return bad("site has no holes");
        }
        if !(self.depth_step > 0.0) || !(self.hole_depth > 0.0) || self.samples_per_hole() < 2 {
            return bad("hole needs at least two samples");
        }
        if self.max_layers == 0 {
            return bad("max_layers must be at least 1");
        }
        if self.materials.is_empty() {
            return bad("no materials");
        }
        for m in &self.materials {
            if !(m.hardness > 0.0) {
                return bad(&format!("{}: hardness must be positive", m.code));
            }
            if m.assay_signature.values().any(|s| !(s.mean >= 0.0) || !(s.spread >= 0.0)) {
                return bad(&format!("{}: negative signature", m.code));
            }
            let major: f64 = [Assay::Fe, Assay::SiO2, Assay::Al2O3]
                .iter()
                .filter_map(|a| m.assay_signature.get(a))
                .map(|s| s.mean)
                .sum();
            if major > 100.0 {
                return bad(&format!("{}: Fe + SiO2 + Al2O3 above 100 %", m.code));
            }
        }
        for (name, f) in [
            ("chemistry_coverage", self.chemistry_coverage),
            ("material_coverage", self.material_coverage),
        ] {
            if !(f > 0.0 && f <= 1.0) {
                return bad(&format!("{name} must be in (0, 1]"));
            }
        }
        if !(0.0..=1.0).contains(&self.material_swap) {
            return bad("material_swap must be a probability");
        }
        for (name, v) in [
            ("signal_noise", self.signal_noise),
            ("blast_bias", self.blast_bias),
            ("label_noise", self.label_noise),
            ("layer_jitter", self.layer_jitter),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return bad(&format!("{name} must be finite and non-negative"));
            }
        }
        Ok(())
    }

    /// sha256 of the JSON form, used to tie reports to their site.
    pub fn fingerprint(&self) -> String {
        let json = serde_json::to_string(self).expect("spec serializes");
        Sha256::digest(json.as_bytes())
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }
}

/// Saturating hardness response; rises steeply for soft rock and flattens
/// towards 3 for hard rock.
pub fn hardness_response(h: f64) -> f64 {
    3.0 * h / (3.0 + h)
}

/// `(base, gain)` of each channel's response to [`hardness_response`].
/// Depth and duration are derived separately.
fn channel_law(s: SignalName) -> (f64, f64) {
    match s {
        SignalName::RotationRpm => (90.0, -6.0),
        SignalName::AirPressure => (350.0, 15.0),
        SignalName::FeedPressure => (110.0, 4.0),
        SignalName::Torque => (15.0, 30.0),
        SignalName::Rop => (70.0, -35.0),
        SignalName::Fob => (60.0, 40.0),
        SignalName::RotationPressure => (80.0, 60.0),
        SignalName::Apr => (4.0, 6.0),
        SignalName::Sed => (40.0, 120.0),
        // seconds per interval, see `duration_of`
        SignalName::Duration => (0.0, 10.0),
        SignalName::Depth => (0.0, 0.0),
    }
}

fn duration_of(rop_m_per_h: f64, step: f64) -> f64 {
    step / rop_m_per_h * 3600.0
}

/// Noiseless description of one hole.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HoleTruth {
    pub hole_id: String,
    pub blast_id: String,
    /// Index into the spec's materials, per sample.
    pub material: Vec<usize>,
    pub hardness: Vec<f64>,
    pub signals: BTreeMap<SignalName, Vec<f64>>,
    /// Depth-weighted signature means.
    pub assays: BTreeMap<Assay, f64>,
    /// Depth share of each material code, in percent.
    pub material_share: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub spec: SiteSpec,
    pub fingerprint: String,
    pub holes: Vec<HoleTruth>,
}

impl GroundTruth {
    pub fn hole(&self, hole_id: &str) -> Option<&HoleTruth> {
        self.holes.iter().find(|h| h.hole_id == hole_id)
    }

    /// Per-sample noiseless signals in the MWD CSV layout, followed by
    /// `hardness` and `material` columns.
    pub fn to_csv(&self) -> String {
        let mut out = MWD_HEADER.join(",");
        out.push_str(",hardness,material\n");
        for h in &self.holes {
            for j in 0..h.hardness.len() {
                out.push_str(&format!("{},{}", h.hole_id, h.blast_id));
                for col in &MWD_HEADER[2..] {
                    match col.parse::<SignalName>() {
                        Ok(s) => out.push_str(&format!(",{}", h.signals[&s][j])),
                        // collar columns are not part of the truth
                        Err(_) => out.push(','),
                    }
                }
                out.push_str(&format!(
                    ",{},{}\n",
                    h.hardness[j], self.spec.materials[h.material[j]].code
                ));
            }
        }
        out
    }
}

struct Template {
    /// Interior boundaries in metres, sorted.
    bounds: Vec<f64>,
    materials: Vec<usize>,
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Whether index `i` is kept under a coverage fraction `f`: exactly
/// `floor(n·f)` of the first `n` indices are.
fn covered(i: usize, f: f64) -> bool {
    ((i + 1) as f64 * f).floor() > (i as f64 * f).floor()
}

/// Generates the site. Holes are ordered by region, blast and hole number;
/// ids look like `R1-B03-H017`.
pub fn generate_site(spec: &SiteSpec) -> Result<(Dataset, GroundTruth), SynthError> {
    spec.validate()?;
    let n_samples = spec.samples_per_hole();
    let n_mat = spec.materials.len();
    let assay_ranges: BTreeMap<Assay, f64> = Assay::ALL
        .iter()
        .map(|a| {
            let means = spec.materials.iter().filter_map(|m| m.assay_signature.get(a)).map(|s| s.mean);
            let (lo, hi) = means.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
            (*a, if hi > lo { hi - lo } else { 0.0 })
        })
        .collect();

    let mut holes = Vec::with_capacity(spec.n_holes());
    let mut truths = Vec::with_capacity(spec.n_holes());
    let mut index = 0usize;
    let n_blasts = spec.n_regions * spec.blasts_per_region;
    for b in 0..n_blasts {
        let region = b / spec.blasts_per_region;
        let blast_id = format!("R{}-B{:02}", region + 1, b % spec.blasts_per_region + 1);
        // stream 0..n_blasts for blast draws, above that for holes
        let mut brng = rng_for(spec.seed, b as u64);
        let n_layers = brng.random_range(1..=spec.max_layers);
        let mut bounds: Vec<f64> = (1..n_layers).map(|_| brng.random::<f64>() * spec.hole_depth).collect();
        bounds.sort_by(f64::total_cmp);
        let template = Template {
            bounds,
            materials: (0..n_layers).map(|_| brng.random_range(0..n_mat)).collect(),
        };
        let signal_bias: BTreeMap<SignalName, f64> = SignalName::ALL
            .iter()
            .map(|s| (*s, spec.blast_bias * channel_law(*s).1.abs() * normal(&mut brng)))
            .collect();
        let assay_bias: BTreeMap<Assay, f64> = Assay::ALL
            .iter()
            .map(|a| (*a, spec.blast_bias * 0.5 * assay_ranges[a] * normal(&mut brng)))
            .collect();
        let origin = (region as f64 * 5000.0 + (b % 5) as f64 * 200.0, (b % spec.blasts_per_region / 5) as f64 * 200.0);

        for k in 0..spec.holes_per_blast {
            let hole_id = format!("{blast_id}-H{:03}", k + 1);
            let mut rng = rng_for(spec.seed, (n_blasts + index) as u64);
            let mut hb: Vec<f64> = template
                .bounds
                .iter()
                .map(|v| (v + spec.layer_jitter * normal(&mut rng)).clamp(0.0, spec.hole_depth))
                .collect();
            hb.sort_by(f64::total_cmp);
            let mats: Vec<usize> = template
                .materials
                .iter()
                .map(|&m| {
                    if rng.random::<f64>() < spec.material_swap {
                        rng.random_range(0..n_mat)
                    } else {
                        m
                    }
                })
                .collect();

            let mut material = Vec::with_capacity(n_samples);
            for j in 0..n_samples {
                let mid = (j as f64 + 0.5) * spec.depth_step;
                let layer = hb.iter().filter(|v| **v <= mid).count();
                material.push(mats[layer]);
            }
            let hardness: Vec<f64> = material.iter().map(|&m| spec.materials[m].hardness).collect();

            let mut clean = BTreeMap::new();
            let mut noisy = BTreeMap::new();
            for s in SignalName::ALL {
                let (base, gain) = channel_law(s);
                let c: Vec<f64> = match s {
                    SignalName::Depth => (1..=n_samples).map(|j| j as f64 * spec.depth_step).collect(),
                    SignalName::Duration => {
                        let (rb, rg) = channel_law(SignalName::Rop);
                        hardness
                            .iter()
                            .map(|h| duration_of(rb + rg * hardness_response(*h), spec.depth_step))
                            .collect()
                    }
                    _ => hardness.iter().map(|h| base + gain * hardness_response(*h)).collect(),
                };
                let n: Vec<f64> = if s == SignalName::Depth {
                    c.clone()
                } else {
                    let sd = spec.signal_noise * gain.abs();
                    c.iter().map(|v| v + signal_bias[&s] + sd * normal(&mut rng)).collect()
                };
                clean.insert(s, c);
                noisy.insert(s, n);
            }

            let mut counts = vec![0usize; n_mat];
            for &m in &material {
                counts[m] += 1;
            }
            // exact ratios: a material filling the hole is 100%, not 100 + ulp
            let share: Vec<f64> = counts.iter().map(|&c| c as f64 / n_samples as f64).collect();
            let mut assays = BTreeMap::new();
            let mut observed = BTreeMap::new();
            for a in Assay::ALL {
                let (mut mean, mut spread) = (0.0, 0.0);
                for (m, w) in share.iter().enumerate() {
                    if let Some(sig) = spec.materials[m].assay_signature.get(&a) {
                        mean += w * sig.mean;
                        spread += w * sig.spread;
                    }
                }
                let obs = mean + assay_bias[&a] + spec.label_noise * spread * normal(&mut rng);
                assays.insert(a, mean);
                observed.insert(a, obs.max(0.0));
            }
            let material_share: BTreeMap<String, f64> = spec
                .materials
                .iter()
                .zip(&share)
                .map(|(m, w)| (m.code.clone(), w * 100.0))
                .collect();

            let label = {
                let chem = covered(index, spec.chemistry_coverage);
                let mats = covered(index, spec.material_coverage);
                (chem || mats).then(|| LabelRecord {
                    hole_id: hole_id.clone(),
                    assays: if chem { observed } else { BTreeMap::new() },
                    materials: if mats { material_share.clone() } else { BTreeMap::new() },
                })
            };
            let collar = (origin.0 + (k % 10) as f64 * 6.0, origin.1 + (k / 10) as f64 * 6.0);
            holes.push((
                HoleSignalSet::new(&hole_id, &blast_id, collar, spec.depth_step, noisy)?,
                label,
            ));
            truths.push(HoleTruth {
                hole_id,
                blast_id: blast_id.clone(),
                material,
                hardness,
                signals: clean,
                assays,
                material_share,
            });
            index += 1;
        }
    }
    Ok((
        Dataset::new(holes, "synthetic")?,
        GroundTruth {
            spec: spec.clone(),
            fingerprint: spec.fingerprint(),
            holes: truths,
        },
    ))
}

/// Agreement of a report's pooled predictions with the noisy lab labels and
/// with the noiseless truth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruthDiagnostics {
    pub n: usize,
    pub r_vs_labels: Option<f64>,
    pub rmse_vs_labels: f64,
    pub r_vs_truth: Option<f64>,
    pub rmse_vs_truth: f64,
}

/// Compares a regression report built from this site against the truth.
pub fn truth_check(truth: &GroundTruth, report: &EvaluationReport) -> Result<TruthDiagnostics, SynthError> {
    let assay: Assay = report
        .target
        .parse()
        .map_err(|_| SynthError::MismatchedProvenance(format!("target {} is not an assay", report.target)))?;
    let index: BTreeMap<&str, &HoleTruth> = truth.holes.iter().map(|h| (h.hole_id.as_str(), h)).collect();
    let clean = report
        .hole_ids
        .iter()
        .map(|id| {
            index
                .get(id.as_str())
                .map(|h| h.assays[&assay])
                .ok_or_else(|| SynthError::MismatchedProvenance(format!("hole {id} is not in the site")))
        })
        .collect::<Result<Vec<f64>, _>>()?;
    let mis = |e: crate::validation::ValidationError| SynthError::MismatchedProvenance(e.to_string());
    Ok(TruthDiagnostics {
        n: clean.len(),
        r_vs_labels: pearson_r(&report.lab, &report.pred).ok(),
        rmse_vs_labels: rmse(&report.lab, &report.pred).map_err(mis)?,
        r_vs_truth: pearson_r(&clean, &report.pred).ok(),
        rmse_vs_truth: rmse(&clean, &report.pred).map_err(mis)?,
    })
}
