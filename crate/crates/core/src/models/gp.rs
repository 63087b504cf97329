//! Zero-mean Gaussian-process regression with a squared-exponential kernel,
//! hyperparameters picked by maximizing the log marginal likelihood over a
//! fixed log-spaced grid.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{check_training, Fitted, ModelError, ModelHandle, ModelKind, Standardizer};
use crate::features::FeatureTable;
use crate::linalg::{Cholesky, Matrix};

/// Kernel hyperparameters in target units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GpParams {
    /// Lengthscale in standardized-feature units.
    pub lengthscale: f64,
    pub signal_variance: f64,
    pub noise_variance: f64,
}

impl GpParams {
    fn validate(&self) -> Result<(), ModelError> {
        let ok = |v: f64| v > 0.0 && v.is_finite();
        if ok(self.lengthscale) && ok(self.signal_variance) && ok(self.noise_variance) {
            Ok(())
        } else {
            Err(ModelError::InvalidParams(format!(
                "gp hyperparameters must be positive: {self:?}"
            )))
        }
    }
}

/// Search grid: lengthscales and noise-to-signal variance ratios. The signal
/// variance is always the target variance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GpGrid {
    pub lengthscales: Vec<f64>,
    pub noise_ratios: Vec<f64>,
}

impl Default for GpGrid {
    /// ℓ ∈ {2⁻³, …, 2⁶}, σ_n²/σ_f² ∈ {10⁻⁴, …, 10⁰}.
    fn default() -> Self {
        GpGrid {
            lengthscales: (-3..=6).map(|e| 2f64.powi(e)).collect(),
            noise_ratios: (-4..=0).map(|e| 10f64.powi(e)).collect(),
        }
    }
}

/// One evaluated grid point (summed over outputs for multi-output fits).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub lengthscale: f64,
    pub noise_ratio: f64,
    /// `None` when the kernel could not be factorized.
    pub log_likelihood: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GpModel {
    /// Hyperparameters on the scale the kernel was fitted in.
    pub params: GpParams,
    pub input_scaling: Standardizer,
    /// Per-output `(mean, scale)` mapping fitted values back to target units.
    pub output_scaling: Vec<(f64, f64)>,
    pub jitter: f64,
    pub grid: Vec<GridPoint>,
    x_train: Matrix,
    alphas: Vec<Vec<f64>>,
    chol: Cholesky,
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn kernel_matrix(x: &Matrix, p: &GpParams) -> Matrix {
    let n = x.nrows();
    let mut k = Matrix::zeros(n, n);
    let inv = 1.0 / (2.0 * p.lengthscale * p.lengthscale);
    for i in 0..n {
        k[(i, i)] = p.signal_variance + p.noise_variance;
        for j in 0..i {
            let v = p.signal_variance * (-sq_dist(x.row(i), x.row(j)) * inv).exp();
            k[(i, j)] = v;
            k[(j, i)] = v;
        }
    }
    k
}

/// Factorizes `K`, escalating a diagonal jitter from `1e-10·tr(K)/n` by
/// factors of ten up to `1e-4·tr(K)/n`.
fn factorize(k: &Matrix) -> Result<(Cholesky, f64), ModelError> {
    if let Some(c) = Cholesky::new(k) {
        return Ok((c, 0.0));
    }
    let n = k.nrows();
    let mean_diag = (0..n).map(|i| k[(i, i)]).sum::<f64>() / n as f64;
    let mut rel = 1e-10;
    while rel <= 1e-4 * (1.0 + 1e-9) {
        let jitter = rel * mean_diag;
        let mut kj = k.clone();
        for i in 0..n {
            kj[(i, i)] += jitter;
        }
        if let Some(c) = Cholesky::new(&kj) {
            return Ok((c, jitter));
        }
        rel *= 10.0;
    }
    Err(ModelError::IllConditionedKernel)
}

fn lml_from_factor(chol: &Cholesky, y: &[f64]) -> (f64, Vec<f64>) {
    let alpha = chol.solve(y);
    let fit: f64 = y.iter().zip(&alpha).map(|(a, b)| a * b).sum();
    let n = y.len() as f64;
    (-0.5 * fit - 0.5 * chol.log_det() - 0.5 * n * (2.0 * PI).ln(), alpha)
}

/// Log marginal likelihood of targets `y` under inputs `x` (used as given).
pub fn log_marginal_likelihood(x: &Matrix, y: &[f64], params: &GpParams) -> Result<f64, ModelError> {
    params.validate()?;
    let (chol, _) = factorize(&kernel_matrix(x, params))?;
    Ok(lml_from_factor(&chol, y).0)
}

/// Gradient of the log marginal likelihood with respect to
/// `(ln ℓ, ln σ_f², ln σ_n²)`.
pub fn log_marginal_likelihood_grad(
    x: &Matrix,
    y: &[f64],
    params: &GpParams,
) -> Result<[f64; 3], ModelError> {
    params.validate()?;
    let n = x.nrows();
    let k = kernel_matrix(x, params);
    let chol = Cholesky::new(&k).ok_or(ModelError::IllConditionedKernel)?;
    let alpha = chol.solve(y);
    let kinv = chol.inverse();
    let l2 = params.lengthscale * params.lengthscale;
    let mut grad = [0.0; 3];
    // dL/dθ = ½ tr((ααᵀ − K⁻¹) ∂K/∂θ)
    for i in 0..n {
        for j in 0..n {
            let w = alpha[i] * alpha[j] - kinv[(i, j)];
            let d2 = sq_dist(x.row(i), x.row(j));
            let kf = params.signal_variance * (-d2 / (2.0 * l2)).exp();
            grad[0] += w * kf * d2 / l2;
            grad[1] += w * kf;
            if i == j {
                grad[2] += w * params.noise_variance;
            }
        }
    }
    Ok(grad.map(|g| 0.5 * g))
}

struct Fit {
    chol: Cholesky,
    jitter: f64,
    alphas: Vec<Vec<f64>>,
    lml: f64,
}

fn fit_outputs(x: &Matrix, ys: &[Vec<f64>], params: &GpParams) -> Result<Fit, ModelError> {
    let (chol, jitter) = factorize(&kernel_matrix(x, params))?;
    let mut lml = 0.0;
    let mut alphas = Vec::with_capacity(ys.len());
    for y in ys {
        let (l, a) = lml_from_factor(&chol, y);
        lml += l;
        alphas.push(a);
    }
    Ok(Fit {
        chol,
        jitter,
        alphas,
        lml,
    })
}

fn scale_outputs(ys: &[Vec<f64>], unit_variance: bool) -> (Vec<Vec<f64>>, Vec<(f64, f64)>, f64) {
    let mut scaled = Vec::with_capacity(ys.len());
    let mut scaling = Vec::with_capacity(ys.len());
    let mut var0 = 1.0;
    for (k, y) in ys.iter().enumerate() {
        let n = y.len() as f64;
        let mean = y.iter().sum::<f64>() / n;
        let var = y.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        if k == 0 {
            var0 = var;
        }
        let scale = if unit_variance && var > 0.0 { var.sqrt() } else { 1.0 };
        scaled.push(y.iter().map(|v| (v - mean) / scale).collect());
        scaling.push((mean, scale));
    }
    (scaled, scaling, var0)
}

fn grid_search(
    x: &Matrix,
    ys: &[Vec<f64>],
    signal_variance: f64,
    grid: &GpGrid,
) -> Result<(GpParams, Fit, Vec<GridPoint>), ModelError> {
    let mut points = Vec::new();
    let mut best: Option<(GpParams, Fit)> = None;
    for &lengthscale in &grid.lengthscales {
        for &ratio in &grid.noise_ratios {
            let params = GpParams {
                lengthscale,
                signal_variance,
                noise_variance: ratio * signal_variance,
            };
            params.validate()?;
            let fit = fit_outputs(x, ys, &params).ok();
            points.push(GridPoint {
                lengthscale,
                noise_ratio: ratio,
                log_likelihood: fit.as_ref().map(|f| f.lml),
            });
            if let Some(f) = fit {
                if best.as_ref().is_none_or(|(_, b)| f.lml > b.lml) {
                    best = Some((params, f));
                }
            }
        }
    }
    let (params, fit) = best.ok_or(ModelError::IllConditionedKernel)?;
    Ok((params, fit, points))
}

fn handle(table: &FeatureTable, model: GpModel) -> ModelHandle {
    ModelHandle::new(ModelKind::Gp, table, 0, Fitted::Gp(model))
}

/// Fits a GP with the default or given grid. Inputs are standardized and
/// the target centered internally; `σ_f²` is the target variance.
pub fn train_gp(table: &FeatureTable, y: &[f64], grid: &GpGrid) -> Result<ModelHandle, ModelError> {
    check_training(&table.data, y.len(), 3)?;
    if y.iter().any(|v| !v.is_finite()) {
        return Err(ModelError::NonFinite);
    }
    let input_scaling = Standardizer::fit(&table.data);
    let x = input_scaling.transform(&table.data);
    let (ys, output_scaling, var) = scale_outputs(&[y.to_vec()], false);
    let signal_variance = if var > 0.0 { var } else { 1e-12 };
    let (params, fit, grid) = grid_search(&x, &ys, signal_variance, grid)?;
    Ok(handle(
        table,
        GpModel {
            params,
            input_scaling,
            output_scaling,
            jitter: fit.jitter,
            grid,
            x_train: x,
            alphas: fit.alphas,
            chol: fit.chol,
        },
    ))
}

/// Fits a GP with fixed hyperparameters (no grid search).
pub fn train_gp_with(table: &FeatureTable, y: &[f64], params: GpParams) -> Result<ModelHandle, ModelError> {
    check_training(&table.data, y.len(), 3)?;
    if y.iter().any(|v| !v.is_finite()) {
        return Err(ModelError::NonFinite);
    }
    params.validate()?;
    let input_scaling = Standardizer::fit(&table.data);
    let x = input_scaling.transform(&table.data);
    let (ys, output_scaling, _) = scale_outputs(&[y.to_vec()], false);
    let fit = fit_outputs(&x, &ys, &params)?;
    Ok(handle(
        table,
        GpModel {
            params,
            input_scaling,
            output_scaling,
            jitter: fit.jitter,
            grid: Vec::new(),
            x_train: x,
            alphas: fit.alphas,
            chol: fit.chol,
        },
    ))
}

/// Independent GPs for several targets sharing one kernel: each target is
/// standardized and the grid point maximizing the summed likelihood is used
/// for all of them.
pub fn train_gp_multi(
    table: &FeatureTable,
    ys: &[Vec<f64>],
    grid: &GpGrid,
) -> Result<ModelHandle, ModelError> {
    let n = ys.first().map_or(0, Vec::len);
    if ys.iter().any(|y| y.len() != n) {
        return Err(ModelError::Dimension("targets differ in length".into()));
    }
    check_training(&table.data, n, 3)?;
    if ys.iter().flatten().any(|v| !v.is_finite()) {
        return Err(ModelError::NonFinite);
    }
    let input_scaling = Standardizer::fit(&table.data);
    let x = input_scaling.transform(&table.data);
    let (scaled, output_scaling, _) = scale_outputs(ys, true);
    let (params, fit, grid) = grid_search(&x, &scaled, 1.0, grid)?;
    Ok(handle(
        table,
        GpModel {
            params,
            input_scaling,
            output_scaling,
            jitter: fit.jitter,
            grid,
            x_train: x,
            alphas: fit.alphas,
            chol: fit.chol,
        },
    ))
}

impl GpModel {
    /// Grid point with the highest likelihood (what training selected).
    pub fn best_grid_point(&self) -> Option<&GridPoint> {
        self.grid
            .iter()
            .filter(|g| g.log_likelihood.is_some())
            .fold(None, |best: Option<&GridPoint>, g| match best {
                Some(b) if b.log_likelihood >= g.log_likelihood => Some(b),
                _ => Some(g),
            })
    }

    /// Posterior mean and predictive variance (including observation noise)
    /// per output, in target units.
    pub fn predict(&self, x: &Matrix) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
        let q = self.alphas.len();
        let mut means = vec![Vec::with_capacity(x.nrows()); q];
        let mut vars = vec![Vec::with_capacity(x.nrows()); q];
        let inv = 1.0 / (2.0 * self.params.lengthscale * self.params.lengthscale);
        let prior = self.params.signal_variance + self.params.noise_variance;
        for row in x.rows() {
            let z = self.input_scaling.transform_row(row);
            let kstar: Vec<f64> = self
                .x_train
                .rows()
                .map(|t| self.params.signal_variance * (-sq_dist(t, &z) * inv).exp())
                .collect();
            let v = self.chol.solve_lower(&kstar);
            let latent_var = (prior - v.iter().map(|a| a * a).sum::<f64>()).max(0.0);
            for k in 0..q {
                let (mean, scale) = self.output_scaling[k];
                let mu: f64 = kstar.iter().zip(&self.alphas[k]).map(|(a, b)| a * b).sum();
                means[k].push(mu * scale + mean);
                vars[k].push(latent_var * scale * scale);
            }
        }
        (means, vars)
    }
}
