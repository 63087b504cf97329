//! Soft-margin binary SVM with an RBF kernel, trained by sequential minimal
//! optimization using second-order working-set selection.

use serde::{Deserialize, Serialize};

use super::{check_training, Fitted, ModelError, ModelHandle, ModelKind, Standardizer};
use crate::features::FeatureTable;
use crate::linalg::Matrix;

const TAU: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmParams {
    pub c: f64,
    /// `None` uses `1 / p`.
    pub rbf_gamma: Option<f64>,
    /// Stop once the maximal KKT violation drops below this.
    pub tolerance: f64,
    /// Iteration budget in units of the training-set size.
    pub max_passes: usize,
    /// Seeds the tie-breaking keys of the working-set selection.
    pub seed: u64,
}

impl Default for SvmParams {
    fn default() -> Self {
        SvmParams {
            c: 1.0,
            rbf_gamma: None,
            tolerance: 1e-3,
            max_passes: 100,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmModel {
    pub params: SvmParams,
    pub gamma: f64,
    pub input_scaling: Standardizer,
    /// Standardized support vectors.
    support: Matrix,
    /// `α_i y_i` per support vector.
    coef: Vec<f64>,
    pub rho: f64,
    pub converged: bool,
    pub iterations: usize,
    /// Full dual solution in training-row order.
    pub alpha: Vec<f64>,
    pub labels: Vec<f64>,
    /// `max_{I_up} -y∇f - min_{I_low} -y∇f` at termination.
    pub kkt_gap: f64,
}

fn rbf(a: &[f64], b: &[f64], gamma: f64) -> f64 {
    let d: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    (-gamma * d).exp()
}

/// Order-independent tie-breaking key derived from the row content and the seed.
fn row_key(seed: u64, row: &[f64], label: f64) -> u64 {
    let mut h = seed ^ 0x9e37_79b9_7f4a_7c15;
    let mix = |h: u64, v: u64| {
        let mut z = h ^ v.wrapping_add(0x9e37_79b9_7f4a_7c15).wrapping_add(h << 6).wrapping_add(h >> 2);
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    };
    for v in row {
        h = mix(h, v.to_bits());
    }
    mix(h, label.to_bits())
}

impl SvmModel {
    /// `Σ α_i y_i k(x_i, x) − ρ` for each row of `x`.
    pub fn decision_function(&self, x: &Matrix) -> Vec<f64> {
        x.rows()
            .map(|row| {
                let z = self.input_scaling.transform_row(row);
                self.support
                    .rows()
                    .zip(&self.coef)
                    .map(|(s, c)| c * rbf(s, &z, self.gamma))
                    .sum::<f64>()
                    - self.rho
            })
            .collect()
    }

    /// Class labels in {-1, +1}; a zero decision value maps to +1.
    pub fn predict(&self, x: &Matrix) -> Vec<f64> {
        self.decision_function(x)
            .into_iter()
            .map(|d| if d >= 0.0 { 1.0 } else { -1.0 })
            .collect()
    }
}

/// Trains the SVM on labels in {-1, +1}. When the iteration budget runs out
/// the last iterate is returned with `converged == false`.
pub fn train_svm(table: &FeatureTable, labels: &[f64], params: &SvmParams) -> Result<ModelHandle, ModelError> {
    check_training(&table.data, labels.len(), 2)?;
    if let Some(bad) = labels.iter().find(|v| **v != 1.0 && **v != -1.0) {
        return Err(ModelError::InvalidLabel(*bad));
    }
    if !(labels.contains(&1.0) && labels.contains(&-1.0)) {
        return Err(ModelError::SingleClass);
    }
    if !(params.c > 0.0) || !(params.tolerance > 0.0) || params.rbf_gamma.is_some_and(|g| !(g > 0.0)) {
        return Err(ModelError::InvalidParams(format!("{params:?}")));
    }
    let n = labels.len();
    let p = table.data.ncols().max(1);
    let gamma = params.rbf_gamma.unwrap_or(1.0 / p as f64);
    let input_scaling = Standardizer::fit(&table.data);
    let x = input_scaling.transform(&table.data);
    let y = labels;
    let c = params.c;

    let mut k = Matrix::zeros(n, n);
    for i in 0..n {
        k[(i, i)] = 1.0;
        for j in 0..i {
            let v = rbf(x.row(i), x.row(j), gamma);
            k[(i, j)] = v;
            k[(j, i)] = v;
        }
    }
    let keys: Vec<u64> = (0..n).map(|i| row_key(params.seed, table.data.row(i), y[i])).collect();

    let mut alpha = vec![0.0; n];
    let mut grad = vec![-1.0; n];
    let in_up = |a: f64, yi: f64| (yi > 0.0 && a < c) || (yi < 0.0 && a > 0.0);
    let in_low = |a: f64, yi: f64| (yi > 0.0 && a > 0.0) || (yi < 0.0 && a < c);
    let max_iter = params.max_passes.saturating_mul(n).max(1);
    let mut iterations = 0;
    let mut converged = false;
    let mut gap = f64::INFINITY;

    while iterations < max_iter {
        // i: maximal -y∇f over I_up
        let mut gmax = f64::NEG_INFINITY;
        let mut sel_i: Option<usize> = None;
        for t in 0..n {
            if in_up(alpha[t], y[t]) {
                let v = -y[t] * grad[t];
                if v > gmax || (v == gmax && sel_i.is_some_and(|s| keys[t] < keys[s])) {
                    gmax = v;
                    sel_i = Some(t);
                }
            }
        }
        // j: second-order choice over I_low; gmax2 tracks max y∇f there
        let mut gmax2 = f64::NEG_INFINITY;
        let mut sel_j: Option<usize> = None;
        let mut obj_min = f64::INFINITY;
        if let Some(i) = sel_i {
            for t in 0..n {
                if !in_low(alpha[t], y[t]) {
                    continue;
                }
                let v = y[t] * grad[t];
                gmax2 = gmax2.max(v);
                let b = gmax + v;
                if b > 0.0 {
                    let a = k[(i, i)] + k[(t, t)] - 2.0 * k[(i, t)];
                    let obj = -(b * b) / if a > 0.0 { a } else { TAU };
                    if obj < obj_min || (obj == obj_min && sel_j.is_some_and(|s| keys[t] < keys[s])) {
                        obj_min = obj;
                        sel_j = Some(t);
                    }
                }
            }
        }
        gap = gmax + gmax2;
        let (Some(i), Some(j)) = (sel_i, sel_j) else {
            converged = true;
            break;
        };
        if gap < params.tolerance {
            converged = true;
            break;
        }
        iterations += 1;

        let (old_i, old_j) = (alpha[i], alpha[j]);
        let quad = {
            let q = k[(i, i)] + k[(j, j)] - 2.0 * k[(i, j)];
            if q > 0.0 {
                q
            } else {
                TAU
            }
        };
        if y[i] != y[j] {
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if diff > 0.0 {
                if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if diff > 0.0 {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = c - diff;
                }
            } else if alpha[j] > c {
                alpha[j] = c;
                alpha[i] = c + diff;
            }
        } else {
            let delta = (grad[i] - grad[j]) / quad;
            let sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if sum > c {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = sum - c;
                }
            } else if alpha[j] < 0.0 {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if sum > c {
                if alpha[j] > c {
                    alpha[j] = c;
                    alpha[i] = sum - c;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }
        let (di, dj) = (alpha[i] - old_i, alpha[j] - old_j);
        for t in 0..n {
            grad[t] += y[t] * (y[i] * k[(t, i)] * di + y[j] * k[(t, j)] * dj);
        }
    }
    if !converged {
        log::warn!("svm: iteration budget exhausted with KKT gap {gap:.3e}");
    }

    // ρ: average y∇f over free vectors, else midpoint of the feasible interval
    let (mut ub, mut lb) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut sum_free, mut n_free) = (0.0, 0usize);
    for t in 0..n {
        let yg = y[t] * grad[t];
        if alpha[t] >= c {
            if y[t] < 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else if alpha[t] <= 0.0 {
            if y[t] > 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else {
            n_free += 1;
            sum_free += yg;
        }
    }
    let rho = if n_free > 0 {
        sum_free / n_free as f64
    } else {
        0.5 * (ub + lb)
    };

    let sv: Vec<usize> = (0..n).filter(|&t| alpha[t] > 0.0).collect();
    let support = x.select_rows(&sv);
    let coef = sv.iter().map(|&t| alpha[t] * y[t]).collect();
    let model = SvmModel {
        params: params.clone(),
        gamma,
        input_scaling,
        support,
        coef,
        rho,
        converged,
        iterations,
        alpha,
        labels: labels.to_vec(),
        kkt_gap: gap,
    };
    Ok(ModelHandle::new(ModelKind::Svm, table, params.seed, Fitted::Svm(model)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(rows: &[[f64; 2]]) -> FeatureTable {
        FeatureTable::from_matrix(Matrix::from_rows(rows))
    }

    #[test]
    fn xor_with_rbf() {
        let t = table(&[[0.0, 0.0], [1.0, 1.0], [0.0, 1.0], [1.0, 0.0]]);
        let y = [-1.0, -1.0, 1.0, 1.0];
        let params = SvmParams {
            c: 10.0,
            rbf_gamma: Some(1.0),
            ..Default::default()
        };
        let m = train_svm(&t, &y, &params).unwrap();
        assert_eq!(m.predict(&t).unwrap().values(), &y);
    }

    #[test]
    fn dual_feasibility() {
        let t = table(&[[0.0, 0.1], [0.3, 0.9], [1.0, 0.2], [0.8, 0.7], [0.5, 0.5], [0.2, 0.4]]);
        let y = [-1.0, 1.0, -1.0, 1.0, 1.0, -1.0];
        let params = SvmParams {
            c: 0.5,
            ..Default::default()
        };
        let m = train_svm(&t, &y, &params).unwrap();
        let Fitted::Svm(s) = &m.fitted else { unreachable!() };
        assert!(s.converged);
        assert!(s.alpha.iter().all(|a| (0.0..=0.5).contains(a)));
        let balance: f64 = s.alpha.iter().zip(&y).map(|(a, y)| a * y).sum();
        assert!(balance.abs() < 1e-8);
        assert!(s.kkt_gap < 1e-3);
    }

    #[test]
    fn single_class_rejected() {
        let t = table(&[[0.0, 0.0], [1.0, 1.0]]);
        assert_eq!(
            train_svm(&t, &[1.0, 1.0], &SvmParams::default()).unwrap_err(),
            ModelError::SingleClass
        );
        assert_eq!(
            train_svm(&t, &[1.0, 0.0], &SvmParams::default()).unwrap_err(),
            ModelError::InvalidLabel(0.0)
        );
    }

    #[test]
    fn exhausted_budget_is_flagged() {
        let rows: Vec<[f64; 2]> = (0..40).map(|i| [(i as f64 * 0.77).sin(), (i as f64 * 1.3).cos()]).collect();
        let y: Vec<f64> = (0..40).map(|i| if (i * 7) % 3 == 0 { 1.0 } else { -1.0 }).collect();
        let params = SvmParams {
            c: 100.0,
            max_passes: 0,
            tolerance: 1e-9,
            ..Default::default()
        };
        let m = train_svm(&table(&rows), &y, &params).unwrap();
        let Fitted::Svm(s) = &m.fitted else { unreachable!() };
        assert!(!s.converged);
        assert_eq!(s.iterations, 1);
    }
}
