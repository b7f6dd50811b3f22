//! From-scratch random forest with probability output.
//!
//! Axis-aligned binary trees trained on gini impurity, bagged over
//! bootstrap resamples, with per-node random feature subsets. The forest
//! does not output class labels directly but class probabilities: the
//! average of each tree's leaf class fractions. Training is deterministic
//! given (data, params, seed) — tree `i` derives its own RNG stream, so
//! parallel and sequential training build identical models. Split ties
//! break on lowest impurity, then lowest feature index, then lowest
//! threshold.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::path::Path;

use crate::error::{Error, Result};
use crate::{derive_seed, Scalar};

/// How many candidate features each split considers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureRule {
    /// `max(1, floor(sqrt(d)))` random features per node.
    Sqrt,
    /// Every feature at every node.
    All,
}

/// Split quality criterion. Only gini impurity is implemented.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Criterion {
    Gini,
}

/// Forest hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForestParams {
    pub bootstrap: bool,
    pub criterion: Criterion,
    pub max_depth: usize,
    pub n_estimators: usize,
    pub min_leaf: usize,
    pub features_per_split: FeatureRule,
}

impl Default for ForestParams {
    fn default() -> Self {
        ForestParams {
            bootstrap: true,
            criterion: Criterion::Gini,
            max_depth: 10,
            n_estimators: 200,
            min_leaf: 1,
            features_per_split: FeatureRule::Sqrt,
        }
    }
}

impl ForestParams {
    pub fn validate(&self) -> Result<()> {
        if self.n_estimators < 1 {
            return Err(Error::InvalidArgument("n_estimators must be >= 1".into()));
        }
        if self.max_depth < 1 {
            return Err(Error::InvalidArgument("max_depth must be >= 1".into()));
        }
        if self.min_leaf < 1 {
            return Err(Error::InvalidArgument("min_leaf must be >= 1".into()));
        }
        Ok(())
    }
}

/// Feature matrix, integer labels, and class names.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingData {
    pub features: Vec<Vec<Scalar>>,
    pub labels: Vec<usize>,
    pub classes: Vec<String>,
}

impl TrainingData {
    pub fn validate(&self) -> Result<()> {
        if self.features.is_empty() {
            return Err(Error::InvalidArgument("empty dataset".into()));
        }
        if self.features.len() != self.labels.len() {
            return Err(Error::InvalidArgument("features/labels length mismatch".into()));
        }
        let dim = self.features[0].len();
        if dim == 0 {
            return Err(Error::InvalidArgument("zero-dimensional features".into()));
        }
        if self.features.iter().any(|row| row.len() != dim) {
            return Err(Error::InvalidArgument("ragged feature rows".into()));
        }
        if self.labels.iter().any(|&l| l >= self.classes.len()) {
            return Err(Error::InvalidArgument("label outside class order".into()));
        }
        Ok(())
    }

    pub fn n_features(&self) -> usize {
        self.features.first().map_or(0, Vec::len)
    }
}

/// One tree node; children are indices into the tree's node vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Node {
    Split {
        feature: usize,
        threshold: Scalar,
        left: usize,
        right: usize,
    },
    Leaf {
        counts: Vec<u32>,
    },
}

/// A single decision tree; the root is node 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<Node>,
}

impl Tree {
    /// Leaf class counts for a sample.
    pub fn leaf_counts<'a>(&'a self, x: &[Scalar]) -> &'a [u32] {
        let mut idx = 0usize;
        loop {
            match &self.nodes[idx] {
                Node::Leaf { counts } => return counts,
                Node::Split { feature, threshold, left, right } => {
                    idx = if x[*feature] <= *threshold { *left } else { *right };
                }
            }
        }
    }

    /// Leaf class fractions for a sample.
    pub fn leaf_fractions(&self, x: &[Scalar], n_classes: usize) -> Vec<Scalar> {
        let counts = self.leaf_counts(x);
        let total: u32 = counts.iter().sum();
        let mut out = vec![0.0; n_classes];
        if total > 0 {
            for (c, &n) in counts.iter().enumerate() {
                out[c] = n as Scalar / total as Scalar;
            }
        }
        out
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], idx: usize) -> usize {
            match &nodes[idx] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, *left).max(walk(nodes, *right)),
            }
        }
        walk(&self.nodes, 0)
    }
}

/// A trained random forest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestModel {
    pub schema: String,
    pub trees: Vec<Tree>,
    pub class_order: Vec<String>,
    pub params: ForestParams,
    pub train_seed: u64,
    pub n_features: usize,
}

pub const MODEL_SCHEMA: &str = "vasim-forest/v1";

impl ForestModel {
    pub fn n_classes(&self) -> usize {
        self.class_order.len()
    }

    /// Index of a class by name.
    pub fn class_index(&self, name: &str) -> Result<usize> {
        self.class_order
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| Error::ModelMismatch(format!("model has no class {name:?}")))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<ForestModel> {
        let model: ForestModel = serde_json::from_str(text)?;
        if model.schema != MODEL_SCHEMA {
            return Err(Error::ModelMismatch(format!(
                "unsupported model schema {:?} (expected {MODEL_SCHEMA:?})",
                model.schema
            )));
        }
        Ok(model)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<ForestModel> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        ForestModel::from_json(&text)
    }
}

/// Draws a bootstrap resample of `0..n` (n draws with replacement).
///
/// Exposed so out-of-bag analyses can re-derive each tree's bag from the
/// same seed stream the trainer used.
pub fn bootstrap_indices(n: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    (0..n).map(|_| rng.gen_range(0..n)).collect()
}

/// RNG stream for tree `i` under a given training seed.
pub fn tree_rng(train_seed: u64, tree_index: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(train_seed, tree_index as u64))
}

/// Trains a random forest.
///
/// Each tree grows on a bootstrap resample (when enabled) with
/// `features_per_split` candidate features per node, choosing the
/// gini-optimal threshold among midpoints of consecutive distinct feature
/// values. Growth stops at `max_depth`, on pure nodes, and when a split
/// would leave a child below `min_leaf` samples.
pub fn train(data: &TrainingData, params: &ForestParams, seed: u64) -> Result<ForestModel> {
    data.validate()?;
    params.validate()?;
    let n_classes = data.classes.len();
    if n_classes == 0 {
        return Err(Error::InvalidArgument("no classes declared".into()));
    }

    let trees: Vec<Tree> = (0..params.n_estimators)
        .into_par_iter()
        .map(|i| {
            let mut rng = tree_rng(seed, i);
            let indices: Vec<usize> = if params.bootstrap {
                bootstrap_indices(data.features.len(), &mut rng)
            } else {
                (0..data.features.len()).collect()
            };
            let mut builder = TreeBuilder {
                data,
                params,
                n_classes,
                rng,
                nodes: Vec::new(),
            };
            builder.grow(indices, 0);
            Tree { nodes: builder.nodes }
        })
        .collect();

    Ok(ForestModel {
        schema: MODEL_SCHEMA.to_string(),
        trees,
        class_order: data.classes.clone(),
        params: *params,
        train_seed: seed,
        n_features: data.n_features(),
    })
}

struct TreeBuilder<'a> {
    data: &'a TrainingData,
    params: &'a ForestParams,
    n_classes: usize,
    rng: ChaCha8Rng,
    nodes: Vec<Node>,
}

impl<'a> TreeBuilder<'a> {
    /// Grows the subtree for `indices`, returning its node id.
    fn grow(&mut self, indices: Vec<usize>, depth: usize) -> usize {
        let counts = self.class_counts(&indices);
        let n_nonzero = counts.iter().filter(|&&c| c > 0).count();
        let stop = depth >= self.params.max_depth
            || n_nonzero <= 1
            || indices.len() < 2 * self.params.min_leaf
            || indices.len() < 2;

        let best = if stop { None } else { self.best_split(&indices) };
        match best {
            None => {
                self.nodes.push(Node::Leaf { counts });
                self.nodes.len() - 1
            }
            Some((feature, threshold)) => {
                let (left_idx, right_idx): (Vec<usize>, Vec<usize>) = indices
                    .into_iter()
                    .partition(|&i| self.data.features[i][feature] <= threshold);
                // reserve our slot before recursing so node 0 stays the root
                let id = self.nodes.len();
                self.nodes.push(Node::Leaf { counts: Vec::new() });
                let left = self.grow(left_idx, depth + 1);
                let right = self.grow(right_idx, depth + 1);
                self.nodes[id] = Node::Split { feature, threshold, left, right };
                id
            }
        }
    }

    fn class_counts(&self, indices: &[usize]) -> Vec<u32> {
        let mut counts = vec![0u32; self.n_classes];
        for &i in indices {
            counts[self.data.labels[i]] += 1;
        }
        counts
    }

    fn candidate_features(&mut self) -> Vec<usize> {
        let d = self.data.n_features();
        match self.params.features_per_split {
            FeatureRule::All => (0..d).collect(),
            FeatureRule::Sqrt => {
                let k = ((d as f64).sqrt().floor() as usize).max(1);
                // partial Fisher-Yates over the feature index pool
                let mut pool: Vec<usize> = (0..d).collect();
                for i in 0..k {
                    let j = self.rng.gen_range(i..d);
                    pool.swap(i, j);
                }
                pool.truncate(k);
                pool
            }
        }
    }

    /// Best (feature, threshold) by gini, or None when no valid split
    /// exists. Ties break on impurity, then feature index, then threshold —
    /// the order that makes tree structure independent of row order.
    fn best_split(&mut self, indices: &[usize]) -> Option<(usize, Scalar)> {
        let min_leaf = self.params.min_leaf;
        let total = indices.len();
        let mut best: Option<(Scalar, usize, Scalar)> = None;

        let mut candidates = self.candidate_features();
        candidates.sort_unstable();

        for feature in candidates {
            let mut pairs: Vec<(Scalar, usize)> = indices
                .iter()
                .map(|&i| (self.data.features[i][feature], self.data.labels[i]))
                .collect();
            pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("no NaN features"));

            let mut left_counts = vec![0u32; self.n_classes];
            let mut right_counts = self.class_counts(indices);
            let mut left_n = 0usize;

            for w in 0..total - 1 {
                let (value, label) = pairs[w];
                left_counts[label] += 1;
                right_counts[label] -= 1;
                left_n += 1;
                let next_value = pairs[w + 1].0;
                if next_value <= value {
                    continue; // not a boundary between distinct values
                }
                let right_n = total - left_n;
                if left_n < min_leaf || right_n < min_leaf {
                    continue;
                }
                let threshold = (value + next_value) / 2.0;
                let impurity = (left_n as Scalar * gini(&left_counts, left_n)
                    + right_n as Scalar * gini(&right_counts, right_n))
                    / total as Scalar;
                let candidate = (impurity, feature, threshold);
                best = Some(match best {
                    None => candidate,
                    Some(b) => {
                        if candidate.0 < b.0
                            || (candidate.0 == b.0 && candidate.1 < b.1)
                            || (candidate.0 == b.0 && candidate.1 == b.1 && candidate.2 < b.2)
                        {
                            candidate
                        } else {
                            b
                        }
                    }
                });
            }
        }
        best.map(|(_, feature, threshold)| (feature, threshold))
    }
}

fn gini(counts: &[u32], n: usize) -> Scalar {
    let n = n as Scalar;
    let mut g = 1.0;
    for &c in counts {
        let p = c as Scalar / n;
        g -= p * p;
    }
    g
}

/// Class probabilities for one sample: the average of per-tree leaf
/// fractions. Sums to 1 within 1e-9.
pub fn predict_proba(model: &ForestModel, x: &[Scalar]) -> Result<Vec<Scalar>> {
    if x.len() != model.n_features {
        return Err(Error::ModelMismatch(format!(
            "sample has {} features, model expects {}",
            x.len(),
            model.n_features
        )));
    }
    let n_classes = model.n_classes();
    let mut acc = vec![0.0; n_classes];
    for tree in &model.trees {
        let frac = tree.leaf_fractions(x, n_classes);
        for (a, f) in acc.iter_mut().zip(frac) {
            *a += f;
        }
    }
    let n = model.trees.len() as Scalar;
    for a in acc.iter_mut() {
        *a /= n;
    }
    Ok(acc)
}

/// Predicted class index (argmax probability, lowest index on ties).
pub fn predict(model: &ForestModel, x: &[Scalar]) -> Result<usize> {
    let proba = predict_proba(model, x)?;
    let mut best = 0usize;
    for (i, &p) in proba.iter().enumerate() {
        if p > proba[best] {
            best = i;
        }
    }
    Ok(best)
}

/// Per-class and macro-averaged evaluation metrics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub precision: Scalar,
    pub recall: Scalar,
    pub f1: Scalar,
    pub support: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalMetrics {
    pub per_class: Vec<ClassMetrics>,
    pub macro_precision: Scalar,
    pub macro_recall: Scalar,
    pub macro_f1: Scalar,
    pub accuracy: Scalar,
    /// `confusion[actual][predicted]`
    pub confusion: Vec<Vec<usize>>,
}

/// Confusion-derived metrics for predicted vs actual label pairs.
pub fn metrics(predictions: &[usize], labels: &[usize], n_classes: usize) -> Result<EvalMetrics> {
    if predictions.is_empty() {
        return Err(Error::InvalidArgument("metrics: empty input".into()));
    }
    if predictions.len() != labels.len() {
        return Err(Error::InvalidArgument("metrics: length mismatch".into()));
    }
    let mut confusion = vec![vec![0usize; n_classes]; n_classes];
    for (&p, &a) in predictions.iter().zip(labels) {
        if p >= n_classes || a >= n_classes {
            return Err(Error::InvalidArgument("metrics: label out of range".into()));
        }
        confusion[a][p] += 1;
    }
    let mut per_class = Vec::with_capacity(n_classes);
    for c in 0..n_classes {
        let tp = confusion[c][c];
        let fn_: usize = (0..n_classes).filter(|&j| j != c).map(|j| confusion[c][j]).sum();
        let fp: usize = (0..n_classes).filter(|&i| i != c).map(|i| confusion[i][c]).sum();
        let precision = if tp + fp > 0 { tp as Scalar / (tp + fp) as Scalar } else { 0.0 };
        let recall = if tp + fn_ > 0 { tp as Scalar / (tp + fn_) as Scalar } else { 0.0 };
        let f1 = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        per_class.push(ClassMetrics { precision, recall, f1, support: tp + fn_ });
    }
    let k = n_classes as Scalar;
    let correct: usize = (0..n_classes).map(|c| confusion[c][c]).sum();
    Ok(EvalMetrics {
        macro_precision: per_class.iter().map(|m| m.precision).sum::<Scalar>() / k,
        macro_recall: per_class.iter().map(|m| m.recall).sum::<Scalar>() / k,
        macro_f1: per_class.iter().map(|m| m.f1).sum::<Scalar>() / k,
        accuracy: correct as Scalar / predictions.len() as Scalar,
        per_class,
        confusion,
    })
}

/// Cross-validation output; `stratified` is false when some class had
/// fewer samples than folds and the split fell back to plain shuffling.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvResult {
    pub metrics: EvalMetrics,
    pub stratified: bool,
    pub folds: usize,
}

/// Stratified k-fold cross-validation, aggregating the confusion matrix
/// over folds.
pub fn cross_validate(
    data: &TrainingData,
    params: &ForestParams,
    k: usize,
    seed: u64,
) -> Result<CvResult> {
    data.validate()?;
    if k < 2 {
        return Err(Error::InvalidArgument("cross_validate: k must be >= 2".into()));
    }
    let n = data.features.len();
    if n < k {
        return Err(Error::InvalidArgument(format!(
            "cross_validate: dataset size {n} smaller than k = {k}"
        )));
    }
    let n_classes = data.classes.len();

    // per-class index pools
    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); n_classes];
    for (i, &l) in data.labels.iter().enumerate() {
        by_class[l].push(i);
    }
    let stratified = by_class.iter().all(|pool| pool.is_empty() || pool.len() >= k);

    let mut folds: Vec<Vec<usize>> = vec![Vec::new(); k];
    if stratified {
        for (c, pool) in by_class.iter().enumerate() {
            let mut pool = pool.clone();
            shuffle(&mut pool, &mut ChaCha8Rng::seed_from_u64(derive_seed(seed, 0x1000 + c as u64)));
            for (j, idx) in pool.into_iter().enumerate() {
                folds[j % k].push(idx);
            }
        }
    } else {
        let mut all: Vec<usize> = (0..n).collect();
        shuffle(&mut all, &mut ChaCha8Rng::seed_from_u64(derive_seed(seed, 0x2000)));
        for (j, idx) in all.into_iter().enumerate() {
            folds[j % k].push(idx);
        }
    }

    let fold_results: Result<Vec<(Vec<usize>, Vec<usize>)>> = (0..k)
        .into_par_iter()
        .map(|fold| {
            let test = &folds[fold];
            let mut train_rows = Vec::with_capacity(n - test.len());
            let mut train_labels = Vec::with_capacity(n - test.len());
            for (j, f) in folds.iter().enumerate() {
                if j != fold {
                    for &i in f {
                        train_rows.push(data.features[i].clone());
                        train_labels.push(data.labels[i]);
                    }
                }
            }
            let sub = TrainingData {
                features: train_rows,
                labels: train_labels,
                classes: data.classes.clone(),
            };
            let model = train(&sub, params, derive_seed(seed, 0x3000 + fold as u64))?;
            let mut preds = Vec::with_capacity(test.len());
            let mut actuals = Vec::with_capacity(test.len());
            for &i in test {
                preds.push(predict(&model, &data.features[i])?);
                actuals.push(data.labels[i]);
            }
            Ok((preds, actuals))
        })
        .collect();

    let mut predictions = Vec::with_capacity(n);
    let mut actuals = Vec::with_capacity(n);
    for (p, a) in fold_results? {
        predictions.extend(p);
        actuals.extend(a);
    }
    Ok(CvResult {
        metrics: metrics(&predictions, &actuals, n_classes)?,
        stratified,
        folds: k,
    })
}

fn shuffle(indices: &mut [usize], rng: &mut ChaCha8Rng) {
    for i in (1..indices.len()).rev() {
        let j = rng.gen_range(0..=i);
        indices.swap(i, j);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn blobs(n_per: usize, centers: &[(Scalar, Scalar)], spread: Scalar, seed: u64) -> TrainingData {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut features = Vec::new();
        let mut labels = Vec::new();
        for (c, &(cx, cy)) in centers.iter().enumerate() {
            for _ in 0..n_per {
                features.push(vec![
                    cx + spread * crate::scenegen::sample_normal(&mut rng),
                    cy + spread * crate::scenegen::sample_normal(&mut rng),
                ]);
                labels.push(c);
            }
        }
        TrainingData {
            features,
            labels,
            classes: (0..centers.len()).map(|c| format!("class{c}")).collect(),
        }
    }

    #[test]
    fn single_class_training_predicts_probability_one() {
        let data = TrainingData {
            features: vec![vec![1.0, 2.0], vec![3.0, 4.0], vec![0.5, 0.1]],
            labels: vec![0, 0, 0],
            classes: vec!["only".into()],
        };
        let model = train(&data, &ForestParams::default(), 1).unwrap();
        let p = predict_proba(&model, &[2.0, 2.0]).unwrap();
        assert_eq!(p, vec![1.0]);
    }

    #[test]
    fn two_points_separate_at_depth_one() {
        let data = TrainingData {
            features: vec![vec![0.0], vec![1.0]],
            labels: vec![0, 1],
            classes: vec!["a".into(), "b".into()],
        };
        let params = ForestParams {
            bootstrap: false,
            n_estimators: 1,
            max_depth: 1,
            features_per_split: FeatureRule::All,
            ..ForestParams::default()
        };
        let model = train(&data, &params, 0).unwrap();
        assert_eq!(predict(&model, &[0.0]).unwrap(), 0);
        assert_eq!(predict(&model, &[1.0]).unwrap(), 1);
    }

    #[test]
    fn proba_matches_per_tree_average_oracle() {
        let data = blobs(60, &[(0.0, 0.0), (3.0, 3.0), (6.0, 0.0)], 1.2, 7);
        let model = train(&data, &ForestParams { n_estimators: 50, ..Default::default() }, 3).unwrap();
        for x in [&[1.0, 0.5][..], &[3.0, 2.5], &[5.0, 1.0], &[-2.0, 4.0]] {
            let fast = predict_proba(&model, x).unwrap();
            // brute-force: walk every tree by hand and average
            let mut acc = vec![0.0; 3];
            for tree in &model.trees {
                let mut idx = 0usize;
                let counts = loop {
                    match &tree.nodes[idx] {
                        Node::Leaf { counts } => break counts,
                        Node::Split { feature, threshold, left, right } => {
                            idx = if x[*feature] <= *threshold { *left } else { *right };
                        }
                    }
                };
                let total: u32 = counts.iter().sum();
                for c in 0..3 {
                    acc[c] += counts[c] as Scalar / total as Scalar;
                }
            }
            for c in 0..3 {
                acc[c] /= model.trees.len() as Scalar;
                assert!((fast[c] - acc[c]).abs() < 1e-12);
            }
            let sum: Scalar = fast.iter().sum();
            assert!((sum - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn leaf_fraction_counting_definition() {
        // single tree, landing in a leaf with counts (3, 1) -> (0.75, 0.25)
        let tree = Tree {
            nodes: vec![Node::Leaf { counts: vec![3, 1] }],
        };
        assert_eq!(tree.leaf_fractions(&[0.0], 2), vec![0.75, 0.25]);
    }

    #[test]
    fn training_is_deterministic() {
        let data = blobs(40, &[(0.0, 0.0), (4.0, 4.0)], 1.0, 5);
        let params = ForestParams { n_estimators: 20, ..Default::default() };
        let a = train(&data, &params, 99).unwrap();
        let b = train(&data, &params, 99).unwrap();
        assert_eq!(a, b);
        let c = train(&data, &params, 100).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn single_tree_structure_invariant_to_row_order() {
        let data = blobs(30, &[(0.0, 0.0), (2.5, 2.5)], 1.0, 13);
        let params = ForestParams {
            bootstrap: false,
            n_estimators: 1,
            features_per_split: FeatureRule::All,
            ..Default::default()
        };
        let base = train(&data, &params, 1).unwrap();

        // shuffle rows
        let mut order: Vec<usize> = (0..data.features.len()).collect();
        shuffle(&mut order, &mut ChaCha8Rng::seed_from_u64(77));
        let shuffled = TrainingData {
            features: order.iter().map(|&i| data.features[i].clone()).collect(),
            labels: order.iter().map(|&i| data.labels[i]).collect(),
            classes: data.classes.clone(),
        };
        let moved = train(&shuffled, &params, 1).unwrap();
        assert_eq!(base.trees, moved.trees);
    }

    #[test]
    fn training_accuracy_monotone_in_depth() {
        let data = blobs(50, &[(0.0, 0.0), (1.5, 1.5)], 1.0, 21);
        let mut prev = 0.0;
        for depth in 1..=6 {
            let params = ForestParams {
                bootstrap: false,
                n_estimators: 1,
                max_depth: depth,
                features_per_split: FeatureRule::All,
                ..Default::default()
            };
            let model = train(&data, &params, 2).unwrap();
            let correct = data
                .features
                .iter()
                .zip(&data.labels)
                .filter(|(x, &y)| predict(&model, x).unwrap() == y)
                .count();
            let acc = correct as Scalar / data.features.len() as Scalar;
            assert!(acc >= prev - 1e-12, "depth {depth}: {acc} < {prev}");
            prev = acc;
        }
    }

    #[test]
    fn out_of_bag_accuracy_on_separable_blobs() {
        let data = blobs(100, &[(0.0, 0.0), (5.0, 5.0)], 1.0, 3);
        let params = ForestParams::default(); // paper settings
        let model = train(&data, &params, 17).unwrap();

        // nearest-centroid oracle confirms the blobs are separable at all
        let centroid = |class: usize| {
            let rows: Vec<&Vec<Scalar>> = data
                .features
                .iter()
                .zip(&data.labels)
                .filter(|(_, &l)| l == class)
                .map(|(x, _)| x)
                .collect();
            let n = rows.len() as Scalar;
            vec![
                rows.iter().map(|r| r[0]).sum::<Scalar>() / n,
                rows.iter().map(|r| r[1]).sum::<Scalar>() / n,
            ]
        };
        let (c0, c1) = (centroid(0), centroid(1));
        let oracle_correct = data
            .features
            .iter()
            .zip(&data.labels)
            .filter(|(x, &y)| {
                let d0 = (x[0] - c0[0]).powi(2) + (x[1] - c0[1]).powi(2);
                let d1 = (x[0] - c1[0]).powi(2) + (x[1] - c1[1]).powi(2);
                (if d0 <= d1 { 0 } else { 1 }) == y
            })
            .count();
        assert!(oracle_correct as Scalar / 200.0 > 0.99, "blobs not separable");

        // out-of-bag vote per sample, re-deriving each tree's bag
        let n = data.features.len();
        let mut votes = vec![vec![0usize; 2]; n];
        for (i, tree) in model.trees.iter().enumerate() {
            let mut rng = tree_rng(model.train_seed, i);
            let bag = bootstrap_indices(n, &mut rng);
            let mut in_bag = vec![false; n];
            for &b in &bag {
                in_bag[b] = true;
            }
            for s in 0..n {
                if !in_bag[s] {
                    let frac = tree.leaf_fractions(&data.features[s], 2);
                    let pred = if frac[1] > frac[0] { 1 } else { 0 };
                    votes[s][pred] += 1;
                }
            }
        }
        let mut correct = 0usize;
        let mut counted = 0usize;
        for s in 0..n {
            if votes[s][0] + votes[s][1] > 0 {
                counted += 1;
                let pred = if votes[s][1] > votes[s][0] { 1 } else { 0 };
                if pred == data.labels[s] {
                    correct += 1;
                }
            }
        }
        let oob = correct as Scalar / counted as Scalar;
        assert!(oob >= 0.95, "out-of-bag accuracy {oob}");
    }

    #[test]
    fn predict_rejects_dimension_mismatch() {
        let data = blobs(10, &[(0.0, 0.0), (4.0, 4.0)], 0.5, 1);
        let model = train(&data, &ForestParams { n_estimators: 5, ..Default::default() }, 1).unwrap();
        assert!(matches!(
            predict_proba(&model, &[1.0, 2.0, 3.0]),
            Err(Error::ModelMismatch(_))
        ));
    }

    #[test]
    fn empty_dataset_is_rejected() {
        let data = TrainingData { features: vec![], labels: vec![], classes: vec!["a".into()] };
        assert!(train(&data, &ForestParams::default(), 0).is_err());
    }

    #[test]
    fn metrics_reference_values() {
        // all correct
        let m = metrics(&[0, 1, 0, 1], &[0, 1, 0, 1], 2).unwrap();
        assert_eq!(m.macro_f1, 1.0);
        assert_eq!(m.accuracy, 1.0);

        // TP=98, FN=2, FP=3 for class 1
        let mut preds = vec![1usize; 98]; // true positives
        let mut labels = vec![1usize; 98];
        preds.extend([0, 0]); // false negatives
        labels.extend([1, 1]);
        preds.extend([1, 1, 1]); // false positives
        labels.extend([0, 0, 0]);
        preds.extend(vec![0; 97]); // true negatives
        labels.extend(vec![0; 97]);
        let m = metrics(&preds, &labels, 2).unwrap();
        assert!((m.per_class[1].recall - 0.98).abs() < 1e-9);
        assert!((m.per_class[1].precision - 0.9703).abs() < 1e-4);

        // everything predicted as class 0 on balanced data
        let m = metrics(&[0, 0, 0, 0], &[0, 0, 1, 1], 2).unwrap();
        assert_eq!(m.per_class[0].recall, 1.0);
        assert_eq!(m.per_class[1].recall, 0.0);

        assert!(metrics(&[], &[], 2).is_err());
    }

    #[test]
    fn cross_validation_on_separable_data_is_perfect() {
        let data = blobs(40, &[(0.0, 0.0), (6.0, 6.0)], 0.8, 9);
        let params = ForestParams { n_estimators: 30, ..Default::default() };
        let cv = cross_validate(&data, &params, 5, 4).unwrap();
        assert!(cv.stratified);
        assert_eq!(cv.metrics.macro_f1, 1.0);
        assert_eq!(cv.metrics.macro_precision, 1.0);
        assert_eq!(cv.metrics.macro_recall, 1.0);
    }

    #[test]
    fn cross_validation_on_shuffled_labels_is_chance_level() {
        // balanced binary labels assigned independently of the features
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let features: Vec<Vec<Scalar>> = (0..400)
            .map(|_| vec![crate::scenegen::sample_normal(&mut rng), crate::scenegen::sample_normal(&mut rng)])
            .collect();
        let labels: Vec<usize> = (0..400).map(|i| i % 2).collect();
        let data = TrainingData { features, labels, classes: vec!["a".into(), "b".into()] };
        let params = ForestParams { n_estimators: 40, ..Default::default() };
        let cv = cross_validate(&data, &params, 5, 8).unwrap();
        assert!(
            (cv.metrics.macro_f1 - 0.5).abs() < 0.07,
            "chance-level macro f1 was {}",
            cv.metrics.macro_f1
        );
    }

    #[test]
    fn cross_validation_falls_back_when_class_too_small() {
        let mut data = blobs(30, &[(0.0, 0.0), (5.0, 5.0)], 0.8, 2);
        // a third class with fewer samples than folds
        data.features.push(vec![10.0, 10.0]);
        data.features.push(vec![10.5, 10.2]);
        data.labels.push(2);
        data.labels.push(2);
        data.classes.push("rare".into());
        let params = ForestParams { n_estimators: 10, ..Default::default() };
        let cv = cross_validate(&data, &params, 5, 3).unwrap();
        assert!(!cv.stratified);
    }

    #[test]
    fn model_json_round_trip() {
        let data = blobs(20, &[(0.0, 0.0), (4.0, 4.0)], 0.7, 6);
        let params = ForestParams { n_estimators: 8, ..Default::default() };
        let model = train(&data, &params, 12).unwrap();
        let json = model.to_json().unwrap();
        let back = ForestModel::from_json(&json).unwrap();
        assert_eq!(model, back);

        let mut tampered = json.replace(MODEL_SCHEMA, "vasim-forest/v9");
        tampered.truncate(tampered.len()); // no-op, keep it valid json
        assert!(ForestModel::from_json(&tampered).is_err());
    }

    #[test]
    fn depth_never_exceeds_max_depth() {
        let data = blobs(80, &[(0.0, 0.0), (1.0, 1.0)], 1.5, 10); // overlapping
        for max_depth in [1usize, 3, 10] {
            let params = ForestParams {
                n_estimators: 10,
                max_depth,
                ..Default::default()
            };
            let model = train(&data, &params, 5).unwrap();
            for tree in &model.trees {
                assert!(tree.depth() <= max_depth);
            }
        }
    }
}
