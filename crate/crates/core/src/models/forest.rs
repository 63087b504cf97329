//! CART trees and random forests.
//!
//! Splits maximize the decrease of the summed squared error over all target
//! columns. Regression uses the raw target (one column) or the standardized
//! targets (multivariate); classification runs on the one-hot encoding of
//! the 0/1 label, where the squared-error decrease equals half the weighted
//! Gini decrease, so both rank splits identically.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{check_training, Fitted, ModelError, ModelHandle, ModelKind};
use crate::features::FeatureTable;
use crate::linalg::Matrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Task {
    Regression,
    Classification,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RfParams {
    pub n_trees: usize,
    /// `None` grows until leaves are pure or too small to split.
    pub max_depth: Option<usize>,
    pub min_leaf: usize,
    /// Features tried per split; `None` picks ⌈p/3⌉ for regression and
    /// ⌈√p⌉ for classification.
    pub mtry: Option<usize>,
    pub bootstrap: bool,
    pub seed: u64,
}

impl Default for RfParams {
    fn default() -> Self {
        RfParams {
            n_trees: 300,
            max_depth: None,
            min_leaf: 5,
            mtry: None,
            bootstrap: true,
            seed: 0,
        }
    }
}

impl RfParams {
    pub fn resolved_mtry(&self, p: usize, task: Task) -> usize {
        self.mtry.unwrap_or(match task {
            Task::Regression => p.div_ceil(3),
            Task::Classification => (p as f64).sqrt().ceil() as usize,
        })
    }

    fn validate(&self, p: usize, task: Task) -> Result<(), ModelError> {
        if self.n_trees == 0 {
            return Err(ModelError::InvalidParams("n_trees must be at least 1".into()));
        }
        if self.min_leaf == 0 {
            return Err(ModelError::InvalidParams("min_leaf must be at least 1".into()));
        }
        let m = self.resolved_mtry(p, task);
        if m == 0 || m > p {
            return Err(ModelError::InvalidParams(format!(
                "mtry {m} outside 1..={p}"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum TreeNode {
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        value: Vec<f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<TreeNode>,
}

impl Tree {
    pub fn leaf_value(&self, x: &[f64]) -> &[f64] {
        let mut i = 0;
        loop {
            match &self.nodes[i] {
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => i = if x[*feature] <= *threshold { *left } else { *right },
                TreeNode::Leaf { value } => return value,
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn go(t: &Tree, i: usize) -> usize {
            match &t.nodes[i] {
                TreeNode::Leaf { .. } => 0,
                TreeNode::Split { left, right, .. } => 1 + go(t, *left).max(go(t, *right)),
            }
        }
        go(self, 0)
    }
}

/// Target standardization used by the multivariate forest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetScaling {
    pub mean: Vec<f64>,
    pub scale: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Forest {
    pub task: Task,
    pub n_outputs: usize,
    pub params: RfParams,
    pub mtry: usize,
    pub trees: Vec<Tree>,
    pub target_scaling: Option<TargetScaling>,
    importance: Vec<f64>,
}

impl Forest {
    pub(crate) fn importance_raw(&self) -> &[f64] {
        &self.importance
    }

    /// One prediction vector per output. Classification returns the majority
    /// vote as 0/1 (ties go to class 0).
    pub fn predict(&self, x: &Matrix) -> Vec<Vec<f64>> {
        match self.task {
            Task::Regression => {
                let q = self.n_outputs;
                let mut out = vec![Vec::with_capacity(x.nrows()); q];
                for row in x.rows() {
                    let mut acc = vec![0.0; q];
                    for t in &self.trees {
                        for (a, v) in acc.iter_mut().zip(t.leaf_value(row)) {
                            *a += v;
                        }
                    }
                    for (k, a) in acc.into_iter().enumerate() {
                        let mut v = a / self.trees.len() as f64;
                        if let Some(s) = &self.target_scaling {
                            v = v * s.scale[k] + s.mean[k];
                        }
                        out[k].push(v);
                    }
                }
                out
            }
            Task::Classification => vec![self
                .vote_share(x)
                .into_iter()
                .map(|p| if p > 0.5 { 1.0 } else { 0.0 })
                .collect()],
        }
    }

    /// Fraction of trees voting for class 1.
    pub fn vote_share(&self, x: &Matrix) -> Vec<f64> {
        x.rows()
            .map(|row| {
                let votes = self
                    .trees
                    .iter()
                    .filter(|t| {
                        let v = t.leaf_value(row);
                        v[1] > v[0]
                    })
                    .count();
                votes as f64 / self.trees.len() as f64
            })
            .collect()
    }
}

struct Builder<'a> {
    x: &'a Matrix,
    /// `x` transposed, so one feature's values are contiguous.
    xt: &'a [f64],
    /// Per feature, the rank of each row's value (equal values share a rank).
    ranks: &'a [u32],
    /// Row-major n × q target matrix.
    y: &'a Matrix,
    min_leaf: usize,
    max_depth: Option<usize>,
    mtry: usize,
    nodes: Vec<TreeNode>,
    importance: Vec<f64>,
    rng: ChaCha8Rng,
    features: Vec<usize>,
    sorted: Vec<u64>,
}

struct BestSplit {
    feature: usize,
    threshold: f64,
    gain: f64,
}

impl Builder<'_> {
    fn leaf(&mut self, idx: &[usize]) -> usize {
        let q = self.y.ncols();
        let first = self.y.row(idx[0]);
        let constant = idx.iter().all(|&i| self.y.row(i) == first);
        let value = if constant {
            first.to_vec()
        } else {
            let mut sum = vec![0.0; q];
            for &i in idx {
                for (s, v) in sum.iter_mut().zip(self.y.row(i)) {
                    *s += v;
                }
            }
            let n = idx.len() as f64;
            sum.iter()
                .enumerate()
                .map(|(k, s)| {
                    let (lo, hi) = idx.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &i| {
                        let v = self.y[(i, k)];
                        (lo.min(v), hi.max(v))
                    });
                    (s / n).clamp(lo, hi)
                })
                .collect()
        };
        self.nodes.push(TreeNode::Leaf { value });
        self.nodes.len() - 1
    }

    fn node_sse(&self, idx: &[usize]) -> f64 {
        let n = idx.len() as f64;
        (0..self.y.ncols())
            .map(|k| {
                let mean = idx.iter().map(|&i| self.y[(i, k)]).sum::<f64>() / n;
                idx.iter().map(|&i| (self.y[(i, k)] - mean).powi(2)).sum::<f64>()
            })
            .sum()
    }

    /// Best threshold on feature `f`. Targets enter centered on the node
    /// mean `mu` to avoid cancellation in the score difference.
    fn best_split_on(
        &mut self,
        idx: &[usize],
        f: usize,
        mu: &[f64],
        totals: &[f64],
        base: f64,
    ) -> Option<BestSplit> {
        let n = idx.len();
        let q = self.y.ncols();
        self.sorted.clear();
        let rows = self.x.nrows();
        let col = &self.xt[f * rows..(f + 1) * rows];
        let ranks = &self.ranks[f * rows..(f + 1) * rows];
        self.sorted
            .extend(idx.iter().map(|&i| (u64::from(ranks[i]) << 32) | i as u64));
        self.sorted.sort_unstable();

        let mut left = vec![0.0; q];
        let mut best: Option<BestSplit> = None;
        for pos in 0..n - 1 {
            let i = (self.sorted[pos] & 0xffff_ffff) as usize;
            let v = col[i];
            for ((l, y), m) in left.iter_mut().zip(self.y.row(i)).zip(mu) {
                *l += y - m;
            }
            let nl = pos + 1;
            let nr = n - nl;
            if nl < self.min_leaf {
                continue;
            }
            if nr < self.min_leaf {
                break;
            }
            let next = col[(self.sorted[pos + 1] & 0xffff_ffff) as usize];
            if next <= v {
                continue;
            }
            let score: f64 = left
                .iter()
                .zip(totals)
                .map(|(l, t)| l * l / nl as f64 + (t - l) * (t - l) / nr as f64)
                .sum();
            let gain = score - base;
            if best.as_ref().is_none_or(|b| gain > b.gain) {
                let mid = 0.5 * (v + next);
                let threshold = if mid < next { mid } else { v };
                best = Some(BestSplit {
                    feature: f,
                    threshold,
                    gain,
                });
            }
        }
        best
    }

    fn build(&mut self, idx: &mut [usize], depth: usize) -> usize {
        let n = idx.len();
        let depth_ok = self.max_depth.is_none_or(|d| depth < d);
        if n < 2 * self.min_leaf || !depth_ok {
            return self.leaf(idx);
        }
        let sse = self.node_sse(idx);
        if sse <= 0.0 {
            return self.leaf(idx);
        }
        let q = self.y.ncols();
        let mut mu = vec![0.0; q];
        for &i in idx.iter() {
            for (m, v) in mu.iter_mut().zip(self.y.row(i)) {
                *m += v;
            }
        }
        mu.iter_mut().for_each(|m| *m /= n as f64);
        let mut totals = vec![0.0; q];
        for &i in idx.iter() {
            for ((t, v), m) in totals.iter_mut().zip(self.y.row(i)).zip(&mu) {
                *t += v - m;
            }
        }
        let base: f64 = totals.iter().map(|t| t * t / n as f64).sum();
        let min_gain = 1e-12 * sse;

        // Draw candidate features without replacement; keep drawing past
        // mtry only while no valid split has been found.
        self.features.shuffle(&mut self.rng);
        let mut best: Option<BestSplit> = None;
        for k in 0..self.features.len() {
            if k >= self.mtry && best.is_some() {
                break;
            }
            let f = self.features[k];
            if let Some(s) = self.best_split_on(idx, f, &mu, &totals, base) {
                if s.gain > min_gain && best.as_ref().is_none_or(|b| s.gain > b.gain) {
                    best = Some(s);
                }
            }
        }
        let Some(split) = best else {
            return self.leaf(idx);
        };
        self.importance[split.feature] += split.gain;

        let mut lo = 0;
        for k in 0..n {
            if self.x[(idx[k], split.feature)] <= split.threshold {
                idx.swap(lo, k);
                lo += 1;
            }
        }
        let me = self.nodes.len();
        self.nodes.push(TreeNode::Leaf { value: Vec::new() });
        let (l_idx, r_idx) = idx.split_at_mut(lo);
        let left = self.build(l_idx, depth + 1);
        let right = self.build(r_idx, depth + 1);
        self.nodes[me] = TreeNode::Split {
            feature: split.feature,
            threshold: split.threshold,
            left,
            right,
        };
        me
    }
}

fn grow_forest(
    x: &Matrix,
    y: &Matrix,
    params: &RfParams,
    task: Task,
    target_scaling: Option<TargetScaling>,
) -> Forest {
    let n = x.nrows();
    let p = x.ncols();
    let mtry = params.resolved_mtry(p, task);
    let mut importance = vec![0.0; p];
    let mut trees = Vec::with_capacity(params.n_trees);
    let mut xt = vec![0.0; n * p];
    for (r, row) in x.rows().enumerate() {
        for (c, v) in row.iter().enumerate() {
            xt[c * n + r] = *v;
        }
    }
    let mut ranks = vec![0u32; n * p];
    let mut order: Vec<usize> = (0..n).collect();
    for c in 0..p {
        let col = &xt[c * n..(c + 1) * n];
        order.sort_by(|&a, &b| col[a].total_cmp(&col[b]));
        let mut rank = 0u32;
        for k in 0..n {
            if k > 0 && col[order[k]] > col[order[k - 1]] {
                rank += 1;
            }
            ranks[c * n + order[k]] = rank;
        }
    }
    for t in 0..params.n_trees {
        let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
        rng.set_stream(t as u64);
        let mut idx: Vec<usize> = if params.bootstrap {
            (0..n).map(|_| rng.random_range(0..n)).collect()
        } else {
            (0..n).collect()
        };
        let mut b = Builder {
            x,
            xt: &xt,
            ranks: &ranks,
            y,
            min_leaf: params.min_leaf,
            max_depth: params.max_depth,
            mtry,
            nodes: Vec::new(),
            importance: vec![0.0; p],
            rng,
            features: (0..p).collect(),
            sorted: Vec::with_capacity(n),
        };
        b.build(&mut idx, 0);
        for (a, v) in importance.iter_mut().zip(&b.importance) {
            *a += v;
        }
        trees.push(Tree { nodes: b.nodes });
    }
    Forest {
        task,
        n_outputs: if task == Task::Classification { 1 } else { y.ncols() },
        params: params.clone(),
        mtry,
        trees,
        target_scaling,
        importance,
    }
}

/// Trains a single-target forest. Classification labels must be 0 or 1.
pub fn train_rf(
    table: &FeatureTable,
    y: &[f64],
    params: &RfParams,
    task: Task,
) -> Result<ModelHandle, ModelError> {
    check_training(&table.data, y.len(), 2)?;
    if y.iter().any(|v| !v.is_finite()) {
        return Err(ModelError::NonFinite);
    }
    params.validate(table.data.ncols(), task)?;
    let targets = match task {
        Task::Regression => Matrix::from_column(y),
        Task::Classification => {
            if let Some(bad) = y.iter().find(|v| **v != 0.0 && **v != 1.0) {
                return Err(ModelError::InvalidLabel(*bad));
            }
            if y.iter().all(|v| *v == y[0]) {
                return Err(ModelError::DegenerateTarget);
            }
            let rows: Vec<[f64; 2]> = y.iter().map(|v| [1.0 - v, *v]).collect();
            Matrix::from_rows(&rows)
        }
    };
    let forest = grow_forest(&table.data, &targets, params, task, None);
    Ok(ModelHandle::new(
        ModelKind::Rf,
        table,
        params.seed,
        Fitted::Forest(forest),
    ))
}

/// Trains one forest for several regression targets (`ys[k]` is target k).
/// Targets are standardized internally so each contributes equally to the
/// split criterion; predictions come back in original units.
pub fn train_mvrf(
    table: &FeatureTable,
    ys: &[Vec<f64>],
    params: &RfParams,
) -> Result<ModelHandle, ModelError> {
    if ys.is_empty() {
        return Err(ModelError::InvalidParams("no targets".into()));
    }
    let n = ys[0].len();
    if ys.iter().any(|y| y.len() != n) {
        return Err(ModelError::Dimension("targets differ in length".into()));
    }
    check_training(&table.data, n, 2)?;
    if ys.iter().flatten().any(|v| !v.is_finite()) {
        return Err(ModelError::NonFinite);
    }
    params.validate(table.data.ncols(), Task::Regression)?;
    let q = ys.len();
    let mut mean = Vec::with_capacity(q);
    let mut scale = Vec::with_capacity(q);
    for y in ys {
        let m = y.iter().sum::<f64>() / n as f64;
        let sd = (y.iter().map(|v| (v - m).powi(2)).sum::<f64>() / n as f64).sqrt();
        mean.push(m);
        scale.push(if sd > 0.0 { sd } else { 1.0 });
    }
    let mut targets = Matrix::zeros(n, q);
    for (k, y) in ys.iter().enumerate() {
        for (i, v) in y.iter().enumerate() {
            targets[(i, k)] = (v - mean[k]) / scale[k];
        }
    }
    let forest = grow_forest(
        &table.data,
        &targets,
        params,
        Task::Regression,
        Some(TargetScaling { mean, scale }),
    );
    Ok(ModelHandle::new(
        ModelKind::Mvrf,
        table,
        params.seed,
        Fitted::Forest(forest),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::FeatureTable;
    use rand::Rng;

    fn random_table(n: usize, p: usize, seed: u64) -> FeatureTable {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..p).map(|_| rng.random::<f64>()).collect())
            .collect();
        FeatureTable::from_matrix(Matrix::from_rows(&rows))
    }

    #[test]
    fn constant_target_predicts_constant() {
        let t = random_table(40, 3, 1);
        let m = train_rf(&t, &[7.0; 40], &RfParams { n_trees: 10, ..Default::default() }, Task::Regression)
            .unwrap();
        let p = m.predict(&t).unwrap();
        assert!(p.values().iter().all(|v| *v == 7.0));
    }

    #[test]
    fn single_unpruned_tree_memorizes() {
        let t = random_table(60, 4, 2);
        let y: Vec<f64> = (0..60).map(|i| (i as f64 * 0.37).sin()).collect();
        let params = RfParams {
            n_trees: 1,
            bootstrap: false,
            min_leaf: 1,
            max_depth: None,
            mtry: Some(2),
            seed: 3,
        };
        let m = train_rf(&t, &y, &params, Task::Regression).unwrap();
        assert_eq!(m.predict(&t).unwrap().values(), y.as_slice());
    }

    #[test]
    fn classification_validation() {
        let t = random_table(10, 2, 4);
        let p = RfParams { n_trees: 3, ..Default::default() };
        assert_eq!(
            train_rf(&t, &[1.0; 10], &p, Task::Classification).unwrap_err(),
            ModelError::DegenerateTarget
        );
        let mut y = vec![0.0; 10];
        y[3] = 2.0;
        assert_eq!(
            train_rf(&t, &y, &p, Task::Classification).unwrap_err(),
            ModelError::InvalidLabel(2.0)
        );
    }

    #[test]
    fn classifier_separates_threshold() {
        let t = random_table(200, 3, 5);
        let y: Vec<f64> = (0..200).map(|i| if t.data[(i, 1)] > 0.5 { 1.0 } else { 0.0 }).collect();
        let m = train_rf(&t, &y, &RfParams { n_trees: 25, seed: 1, ..Default::default() }, Task::Classification)
            .unwrap();
        let test = random_table(200, 3, 6);
        let pred = m.predict(&test).unwrap();
        let acc = (0..200)
            .filter(|&i| pred.values()[i] == if test.data[(i, 1)] > 0.5 { 1.0 } else { 0.0 })
            .count() as f64
            / 200.0;
        assert!(acc > 0.9, "{acc}");
    }

    #[test]
    fn max_depth_is_respected() {
        let t = random_table(100, 3, 7);
        let y: Vec<f64> = (0..100).map(|i| t.data[(i, 0)]).collect();
        let m = train_rf(
            &t,
            &y,
            &RfParams { n_trees: 5, max_depth: Some(2), min_leaf: 1, ..Default::default() },
            Task::Regression,
        )
        .unwrap();
        let Fitted::Forest(f) = &m.fitted else { unreachable!() };
        assert!(f.trees.iter().all(|t| t.depth() <= 2));
    }

    #[test]
    fn bad_params() {
        let t = random_table(10, 2, 8);
        let y = vec![0.0; 10];
        let bad = RfParams { mtry: Some(3), ..Default::default() };
        assert!(matches!(train_rf(&t, &y, &bad, Task::Regression), Err(ModelError::InvalidParams(_))));
        let bad = RfParams { n_trees: 0, ..Default::default() };
        assert!(matches!(train_rf(&t, &y, &bad, Task::Regression), Err(ModelError::InvalidParams(_))));
    }

    #[test]
    fn duplicated_target_gives_identical_outputs() {
        let t = random_table(80, 4, 9);
        let y: Vec<f64> = (0..80).map(|i| t.data[(i, 0)] * 3.0 + t.data[(i, 2)]).collect();
        let m = train_mvrf(&t, &[y.clone(), y], &RfParams { n_trees: 20, ..Default::default() }).unwrap();
        let p = m.predict(&t).unwrap();
        assert_eq!(p.outputs[0], p.outputs[1]);
    }

    #[test]
    fn single_output_mvrf_matches_rf() {
        let t = random_table(80, 4, 10);
        let y: Vec<f64> = (0..80).map(|i| t.data[(i, 1)].powi(2) + 0.1 * t.data[(i, 3)]).collect();
        let params = RfParams { n_trees: 20, seed: 11, ..Default::default() };
        let uni = train_rf(&t, &y, &params, Task::Regression).unwrap().predict(&t).unwrap();
        let mv = train_mvrf(&t, &[y], &params).unwrap().predict(&t).unwrap();
        for (a, b) in uni.values().iter().zip(mv.values()) {
            assert!((a - b).abs() < 1e-9, "{a} vs {b}");
        }
    }
}
