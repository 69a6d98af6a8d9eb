//! Downstream evaluation: train simple classifiers on (augmented) training
//! data, score weighted F1 on held-out data, repeat over seeds, and report
//! mean and standard deviation. Also the SMOTE baseline and fixed-edge
//! column histograms for real-vs-fake comparison.

use rand::Rng;
use rand::SeedableRng;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SosError};
use crate::tabular::{encode, fit_encoder, Cell, ClassId, ColumnKind, Table};
use crate::training::{adam_step, GradBuffer};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ClassifierKind {
    LogisticRegression,
    Mlp,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvalConfig {
    pub classifiers: Vec<ClassifierKind>,
    pub seeds: Vec<u64>,
    /// Held-out fraction used by the dataset generators.
    #[serde(default = "default_test_fraction")]
    pub test_fraction: f64,
}

fn default_test_fraction() -> f64 {
    0.2
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            classifiers: vec![ClassifierKind::LogisticRegression, ClassifierKind::Mlp],
            seeds: vec![0, 1, 2, 3, 4],
            test_fraction: default_test_fraction(),
        }
    }
}

impl EvalConfig {
    pub fn validate(&self) -> Result<()> {
        if self.classifiers.is_empty() {
            return Err(SosError::BadConfig("need at least one classifier".into()));
        }
        let mut seeds = self.seeds.clone();
        seeds.sort_unstable();
        seeds.dedup();
        if seeds.len() != self.seeds.len() || self.seeds.is_empty() {
            return Err(SosError::BadConfig("seeds must be distinct and non-empty".into()));
        }
        if !(self.test_fraction > 0.0 && self.test_fraction < 1.0) {
            return Err(SosError::BadConfig("test_fraction must lie in (0, 1)".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ClassMetrics {
    pub class: ClassId,
    pub support: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Metrics {
    pub weighted_f1: f64,
    pub accuracy: f64,
    pub per_class: Vec<ClassMetrics>,
}

/// Support-weighted mean of per-class F1. Classes with undefined precision
/// or recall score zero.
pub fn weighted_f1(y_true: &[ClassId], y_pred: &[ClassId]) -> Result<f64> {
    Ok(classification_metrics(y_true, y_pred)?.weighted_f1)
}

pub fn classification_metrics(y_true: &[ClassId], y_pred: &[ClassId]) -> Result<Metrics> {
    if y_true.len() != y_pred.len() {
        return Err(SosError::LengthMismatch(y_true.len(), y_pred.len()));
    }
    if y_true.is_empty() {
        return Err(SosError::TooFewRows { need: 1, got: 0 });
    }
    let n_classes = y_true.iter().chain(y_pred).max().unwrap() + 1;
    let mut tp = vec![0usize; n_classes];
    let mut fp = vec![0usize; n_classes];
    let mut fn_ = vec![0usize; n_classes];
    let mut correct = 0usize;
    for (t, p) in y_true.iter().zip(y_pred) {
        if t == p {
            tp[*t] += 1;
            correct += 1;
        } else {
            fp[*p] += 1;
            fn_[*t] += 1;
        }
    }
    let mut per_class = Vec::new();
    let mut weighted = 0.0;
    for class in 0..n_classes {
        let support = tp[class] + fn_[class];
        let precision = if tp[class] + fp[class] > 0 {
            tp[class] as f64 / (tp[class] + fp[class]) as f64
        } else {
            0.0
        };
        let recall = if support > 0 { tp[class] as f64 / support as f64 } else { 0.0 };
        let f1 =
            if precision + recall > 0.0 { 2.0 * precision * recall / (precision + recall) } else { 0.0 };
        weighted += support as f64 / y_true.len() as f64 * f1;
        per_class.push(ClassMetrics { class, support, precision, recall, f1 });
    }
    Ok(Metrics {
        weighted_f1: weighted,
        accuracy: correct as f64 / y_true.len() as f64,
        per_class,
    })
}

#[derive(Debug, Clone)]
pub struct LogisticModel {
    weights: Vec<f64>, // [class][feature], row-major
    bias: Vec<f64>,
    dim: usize,
}

#[derive(Debug, Clone)]
pub struct MlpModel {
    w1: Vec<f64>, // hidden x dim
    b1: Vec<f64>,
    w2: Vec<f64>, // classes x hidden
    b2: Vec<f64>,
    hidden: usize,
    dim: usize,
}

#[derive(Debug, Clone)]
pub enum Classifier {
    Logistic(LogisticModel),
    Mlp(MlpModel),
}

const MLP_HIDDEN: usize = 64;
const MLP_EPOCHS: usize = 200;
const LOGISTIC_MAX_ITERS: usize = 2000;
const LOGISTIC_LOSS_TOL: f64 = 1e-6;

fn softmax_in_place(logits: &mut [f64]) {
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for l in logits.iter_mut() {
        *l = (*l - max).exp();
        sum += *l;
    }
    for l in logits.iter_mut() {
        *l /= sum;
    }
}

fn n_classes_of(y: &[ClassId]) -> Result<usize> {
    let n = y.iter().max().map(|m| m + 1).unwrap_or(0);
    let mut seen = vec![false; n];
    for c in y {
        seen[*c] = true;
    }
    if seen.iter().filter(|s| **s).count() < 2 {
        return Err(SosError::SingleClassTraining);
    }
    Ok(n)
}

fn fit_logistic(x: &[Vec<f64>], y: &[ClassId]) -> Result<LogisticModel> {
    let n_classes = n_classes_of(y)?;
    let dim = x[0].len();
    let n = x.len() as f64;
    let mut model = LogisticModel {
        weights: vec![0.0; n_classes * dim],
        bias: vec![0.0; n_classes],
        dim,
    };
    // full-batch gradient descent; step bounded by the softmax smoothness
    let max_sq: f64 = x.iter().map(|r| r.iter().map(|v| v * v).sum()).fold(0.0, f64::max);
    let lr = (4.0 / max_sq.max(1.0)).min(1.0);
    let mut prev_loss = f64::INFINITY;
    let mut probs = vec![0.0; n_classes];
    for _ in 0..LOGISTIC_MAX_ITERS {
        let mut grad_w = vec![0.0; n_classes * dim];
        let mut grad_b = vec![0.0; n_classes];
        let mut loss = 0.0;
        for (row, label) in x.iter().zip(y) {
            for (c, p) in probs.iter_mut().enumerate() {
                let mut l = model.bias[c];
                for (w, v) in model.weights[c * dim..(c + 1) * dim].iter().zip(row) {
                    l += w * v;
                }
                *p = l;
            }
            softmax_in_place(&mut probs);
            loss -= probs[*label].max(1e-300).ln();
            for c in 0..n_classes {
                let err = probs[c] - if c == *label { 1.0 } else { 0.0 };
                grad_b[c] += err / n;
                for (g, v) in grad_w[c * dim..(c + 1) * dim].iter_mut().zip(row) {
                    *g += err * v / n;
                }
            }
        }
        loss /= n;
        for (w, g) in model.weights.iter_mut().zip(&grad_w) {
            *w -= lr * g;
        }
        for (b, g) in model.bias.iter_mut().zip(&grad_b) {
            *b -= lr * g;
        }
        if (prev_loss - loss).abs() < LOGISTIC_LOSS_TOL {
            break;
        }
        prev_loss = loss;
    }
    Ok(model)
}

fn fit_mlp(x: &[Vec<f64>], y: &[ClassId], seed: u64) -> Result<MlpModel> {
    let n_classes = n_classes_of(y)?;
    let dim = x[0].len();
    let hidden = MLP_HIDDEN;
    let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
    let glorot = |rng: &mut rand::rngs::StdRng, fan_in: usize, fan_out: usize, len: usize| {
        let a = (6.0 / (fan_in + fan_out) as f64).sqrt();
        (0..len).map(|_| rng.gen_range(-a..a)).collect::<Vec<f64>>()
    };
    let w1 = glorot(&mut rng, dim, hidden, hidden * dim);
    let w2 = glorot(&mut rng, hidden, n_classes, n_classes * hidden);
    let layout = [hidden * dim, hidden, n_classes * hidden, n_classes];
    let total: usize = layout.iter().sum();
    let mut flat = vec![0.0; total];
    flat[..w1.len()].copy_from_slice(&w1);
    flat[w1.len() + hidden..w1.len() + hidden + w2.len()].copy_from_slice(&w2);
    let mut params = crate::scorenet::Params(flat);
    let mut buf = GradBuffer::new(total);
    let n = x.len() as f64;

    let (o_w1, o_b1) = (0, hidden * dim);
    let (o_w2, o_b2) = (o_b1 + hidden, o_b1 + hidden + n_classes * hidden);
    let mut h = vec![0.0; hidden];
    let mut probs = vec![0.0; n_classes];
    for _ in 0..MLP_EPOCHS {
        buf.zero_grads();
        for (row, label) in x.iter().zip(y) {
            let p = &params.0;
            for k in 0..hidden {
                let mut acc = p[o_b1 + k];
                for (w, v) in p[o_w1 + k * dim..o_w1 + (k + 1) * dim].iter().zip(row) {
                    acc += w * v;
                }
                h[k] = acc.max(0.0);
            }
            for c in 0..n_classes {
                let mut acc = p[o_b2 + c];
                for (w, v) in p[o_w2 + c * hidden..o_w2 + (c + 1) * hidden].iter().zip(&h) {
                    acc += w * v;
                }
                probs[c] = acc;
            }
            softmax_in_place(&mut probs);
            let mut d_h = vec![0.0; hidden];
            for c in 0..n_classes {
                let err = (probs[c] - if c == *label { 1.0 } else { 0.0 }) / n;
                buf.grads[o_b2 + c] += err;
                for k in 0..hidden {
                    buf.grads[o_w2 + c * hidden + k] += err * h[k];
                    d_h[k] += err * p[o_w2 + c * hidden + k];
                }
            }
            for k in 0..hidden {
                if h[k] > 0.0 {
                    buf.grads[o_b1 + k] += d_h[k];
                    for (g, v) in
                        buf.grads[o_w1 + k * dim..o_w1 + (k + 1) * dim].iter_mut().zip(row)
                    {
                        *g += d_h[k] * v;
                    }
                }
            }
        }
        adam_step(&mut params, &mut buf, 1e-2);
    }
    let p = params.0;
    Ok(MlpModel {
        w1: p[o_w1..o_w1 + hidden * dim].to_vec(),
        b1: p[o_b1..o_b1 + hidden].to_vec(),
        w2: p[o_w2..o_w2 + n_classes * hidden].to_vec(),
        b2: p[o_b2..o_b2 + n_classes].to_vec(),
        hidden,
        dim,
    })
}

pub fn train_classifier(
    kind: ClassifierKind,
    x: &[Vec<f64>],
    y: &[ClassId],
    seed: u64,
) -> Result<Classifier> {
    if x.is_empty() || x.len() != y.len() {
        return Err(SosError::LengthMismatch(x.len(), y.len()));
    }
    match kind {
        ClassifierKind::LogisticRegression => Ok(Classifier::Logistic(fit_logistic(x, y)?)),
        ClassifierKind::Mlp => Ok(Classifier::Mlp(fit_mlp(x, y, seed)?)),
    }
}

pub fn predict(model: &Classifier, x: &[Vec<f64>]) -> Vec<ClassId> {
    x.iter().map(|row| predict_one(model, row)).collect()
}

fn argmax(scores: &[f64]) -> usize {
    let mut best = 0;
    for (k, v) in scores.iter().enumerate() {
        if *v > scores[best] {
            best = k;
        }
    }
    best
}

fn predict_one(model: &Classifier, row: &[f64]) -> ClassId {
    match model {
        Classifier::Logistic(m) => {
            let mut scores = m.bias.clone();
            for (c, s) in scores.iter_mut().enumerate() {
                for (w, v) in m.weights[c * m.dim..(c + 1) * m.dim].iter().zip(row) {
                    *s += w * v;
                }
            }
            argmax(&scores)
        }
        Classifier::Mlp(m) => {
            let mut h = vec![0.0; m.hidden];
            for (k, hk) in h.iter_mut().enumerate() {
                let mut acc = m.b1[k];
                for (w, v) in m.w1[k * m.dim..(k + 1) * m.dim].iter().zip(row) {
                    acc += w * v;
                }
                *hk = acc.max(0.0);
            }
            let mut scores = m.b2.clone();
            for (c, s) in scores.iter_mut().enumerate() {
                for (w, v) in m.w2[c * m.hidden..(c + 1) * m.hidden].iter().zip(&h) {
                    *s += w * v;
                }
            }
            argmax(&scores)
        }
    }
}

/// Linear interpolation between a minor row and one of its nearest minor
/// neighbours; the core of the SMOTE baseline.
pub fn smote_interpolate(base: &[f64], neighbor: &[f64], lambda: f64) -> Vec<f64> {
    base.iter().zip(neighbor).map(|(a, b)| a + lambda * (b - a)).collect()
}

/// Classic SMOTE: n synthetic rows, each on the segment between a random
/// minor row and one of its k nearest minor neighbours.
pub fn smote<R: Rng>(
    minor_rows: &[Vec<f64>],
    k: usize,
    n: usize,
    rng: &mut R,
) -> Result<Vec<Vec<f64>>> {
    if minor_rows.len() < 2 {
        return Err(SosError::TooFewRows { need: 2, got: minor_rows.len() });
    }
    if k == 0 {
        return Err(SosError::BadConfig("smote needs k >= 1".into()));
    }
    let k = k.min(minor_rows.len() - 1);
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        let base_idx = rng.gen_range(0..minor_rows.len());
        let base = &minor_rows[base_idx];
        let mut dists: Vec<(usize, f64)> = minor_rows
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != base_idx)
            .map(|(i, row)| {
                let d: f64 = row.iter().zip(base).map(|(a, b)| (a - b) * (a - b)).sum();
                (i, d)
            })
            .collect();
        dists.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap().then(a.0.cmp(&b.0)));
        let neighbor = &minor_rows[dists[rng.gen_range(0..k)].0];
        let lambda: f64 = rng.gen();
        out.push(smote_interpolate(base, neighbor, lambda));
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, Default, Serialize)]
pub struct MeanStd {
    pub mean: f64,
    pub std: f64,
}

fn mean_std(values: &[f64]) -> MeanStd {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let std = if values.len() > 1 {
        (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    MeanStd { mean, std }
}

#[derive(Debug, Clone, Serialize)]
pub struct EvalRun {
    pub classifier: ClassifierKind,
    pub seed: u64,
    pub weighted_f1: f64,
    pub accuracy: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct EvalSummary {
    pub per_classifier: Vec<(ClassifierKind, MeanStd)>,
    pub overall: MeanStd,
    pub runs: Vec<EvalRun>,
}

fn schemas_match(a: &Table, b: &Table) -> bool {
    a.schema.label_column == b.schema.label_column
        && a.schema.columns.len() == b.schema.columns.len()
        && a.schema
            .columns
            .iter()
            .zip(&b.schema.columns)
            .all(|(x, y)| x.name == y.name && x.kind == y.kind)
}

/// Fit each configured classifier for each seed on the encoded training
/// table, score weighted F1 on the encoded test table, and aggregate.
pub fn evaluate(train_table: &Table, test_table: &Table, cfg: &EvalConfig) -> Result<EvalSummary> {
    cfg.validate()?;
    if !schemas_match(train_table, test_table) {
        return Err(SosError::SchemaMismatch);
    }
    let encoder = fit_encoder(train_table)?;
    let (train_x, train_y) = encode(&encoder, train_table)?;
    let (test_x, test_y) = encode(&encoder, test_table)?;

    let mut runs = Vec::new();
    for kind in &cfg.classifiers {
        for seed in &cfg.seeds {
            let model = train_classifier(*kind, &train_x, &train_y, *seed)?;
            let pred = predict(&model, &test_x);
            let metrics = classification_metrics(&test_y, &pred)?;
            runs.push(EvalRun {
                classifier: *kind,
                seed: *seed,
                weighted_f1: metrics.weighted_f1,
                accuracy: metrics.accuracy,
            });
        }
    }
    let per_classifier = cfg
        .classifiers
        .iter()
        .map(|kind| {
            let scores: Vec<f64> = runs
                .iter()
                .filter(|r| r.classifier == *kind)
                .map(|r| r.weighted_f1)
                .collect();
            (*kind, mean_std(&scores))
        })
        .collect();
    let all: Vec<f64> = runs.iter().map(|r| r.weighted_f1).collect();
    Ok(EvalSummary { per_classifier, overall: mean_std(&all), runs })
}

/// Equal-width bin edges over the column's [min, max]; `bins + 1` values.
pub fn histogram_edges(table: &Table, column: &str, bins: usize) -> Result<Vec<f64>> {
    if bins == 0 {
        return Err(SosError::BadConfig("bins must be >= 1".into()));
    }
    let values = column_values(table, column)?;
    let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let mut hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if hi <= lo {
        hi = lo + 1e-6;
    }
    Ok((0..=bins).map(|k| lo + (hi - lo) * k as f64 / bins as f64).collect())
}

/// Counts against fixed edges; out-of-range values land in the edge bins.
pub fn histogram_counts(edges: &[f64], values: &[f64]) -> Vec<usize> {
    let bins = edges.len() - 1;
    let lo = edges[0];
    let hi = edges[bins];
    let width = (hi - lo) / bins as f64;
    let mut counts = vec![0usize; bins];
    for v in values {
        let idx = ((v - lo) / width).floor() as i64;
        counts[idx.clamp(0, bins as i64 - 1) as usize] += 1;
    }
    counts
}

pub fn column_values(table: &Table, column: &str) -> Result<Vec<f64>> {
    let idx = table
        .schema
        .columns
        .iter()
        .position(|c| c.name == column)
        .ok_or_else(|| SosError::MissingColumn(column.to_string()))?;
    if table.schema.columns[idx].kind != ColumnKind::Continuous {
        return Err(SosError::NotContinuous(column.to_string()));
    }
    Ok(table
        .rows
        .iter()
        .map(|row| match &row[idx] {
            Cell::Continuous(v) => *v,
            Cell::Categorical(_) => unreachable!("kind checked"),
        })
        .collect())
}

/// Histogram of one continuous column of a table.
pub fn histogram(table: &Table, column: &str, bins: usize) -> Result<Vec<(f64, f64, usize)>> {
    let edges = histogram_edges(table, column, bins)?;
    let counts = histogram_counts(&edges, &column_values(table, column)?);
    Ok(counts
        .into_iter()
        .enumerate()
        .map(|(k, c)| (edges[k], edges[k + 1], c))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tabular::{parse_csv, Column, Schema};
    use rand::rngs::StdRng;

    #[test]
    fn weighted_f1_hand_oracle() {
        // truth [A,A,A,B], pred [A,A,B,B]: F1_A = 0.8, F1_B = 2/3
        let wf1 = weighted_f1(&[0, 0, 0, 1], &[0, 0, 1, 1]).unwrap();
        assert!((wf1 - 0.76667).abs() < 1e-5, "{wf1}");
    }

    #[test]
    fn perfect_prediction_scores_one() {
        assert_eq!(weighted_f1(&[0, 1, 2, 1], &[0, 1, 2, 1]).unwrap(), 1.0);
    }

    #[test]
    fn single_class_truth_all_correct() {
        assert_eq!(weighted_f1(&[0, 0, 0], &[0, 0, 0]).unwrap(), 1.0);
    }

    #[test]
    fn weighted_equals_plain_f1_with_one_supported_class() {
        // truth all class 0, one wrong prediction into class 1
        let m = classification_metrics(&[0, 0, 0, 0], &[0, 0, 0, 1]).unwrap();
        assert!((m.weighted_f1 - m.per_class[0].f1).abs() < 1e-15);
    }

    #[test]
    fn length_mismatch_rejected() {
        assert!(matches!(weighted_f1(&[0, 1], &[0]), Err(SosError::LengthMismatch(2, 1))));
    }

    #[test]
    fn constant_prediction_on_balanced_truth() {
        // all-A predictions on balanced 2-class truth: F1_A = 2/3, weighted = F1_A / 2
        let wf1 = weighted_f1(&[0, 0, 1, 1], &[0, 0, 0, 0]).unwrap();
        assert!((wf1 - (2.0 / 3.0) * 0.5).abs() < 1e-12, "{wf1}");
    }

    fn separable_2d(n: usize) -> (Vec<Vec<f64>>, Vec<ClassId>) {
        let mut rng = StdRng::seed_from_u64(50);
        let mut x = Vec::new();
        let mut y = Vec::new();
        for _ in 0..n {
            let (dx, dy): (f64, f64) = (rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5);
            x.push(vec![-1.0 + 0.3 * dx, -1.0 + 0.3 * dy]);
            y.push(0);
            let (dx, dy): (f64, f64) = (rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5);
            x.push(vec![1.0 + 0.3 * dx, 1.0 + 0.3 * dy]);
            y.push(1);
        }
        (x, y)
    }

    #[test]
    fn logistic_separates_separable_data() {
        let (x, y) = separable_2d(50);
        let model = train_classifier(ClassifierKind::LogisticRegression, &x, &y, 0).unwrap();
        let pred = predict(&model, &x);
        let acc = pred.iter().zip(&y).filter(|(a, b)| a == b).count() as f64 / y.len() as f64;
        assert!(acc >= 0.99, "train accuracy {acc}");
    }

    #[test]
    fn mlp_separates_and_is_deterministic() {
        let (x, y) = separable_2d(30);
        let a = train_classifier(ClassifierKind::Mlp, &x, &y, 7).unwrap();
        let b = train_classifier(ClassifierKind::Mlp, &x, &y, 7).unwrap();
        let grid: Vec<Vec<f64>> =
            (0..20).map(|i| vec![-2.0 + 0.2 * i as f64, -2.0 + 0.2 * i as f64]).collect();
        assert_eq!(predict(&a, &grid), predict(&b, &grid));
        let pred = predict(&a, &x);
        let acc = pred.iter().zip(&y).filter(|(p, t)| p == t).count() as f64 / y.len() as f64;
        assert!(acc >= 0.99, "train accuracy {acc}");
    }

    #[test]
    fn duplicated_dataset_gives_identical_decision_function() {
        let (x, y) = separable_2d(20);
        let mut x2 = x.clone();
        x2.extend(x.iter().cloned());
        let mut y2 = y.clone();
        y2.extend(y.iter().cloned());
        let a = train_classifier(ClassifierKind::LogisticRegression, &x, &y, 0).unwrap();
        let b = train_classifier(ClassifierKind::LogisticRegression, &x2, &y2, 0).unwrap();
        let grid: Vec<Vec<f64>> =
            (0..40).map(|i| vec![-2.0 + 0.1 * i as f64, 2.0 - 0.1 * i as f64]).collect();
        assert_eq!(predict(&a, &grid), predict(&b, &grid));
    }

    #[test]
    fn single_class_training_rejected() {
        let x = vec![vec![0.0], vec![1.0]];
        assert!(matches!(
            train_classifier(ClassifierKind::LogisticRegression, &x, &[0, 0], 0),
            Err(SosError::SingleClassTraining)
        ));
    }

    #[test]
    fn smote_interpolation_endpoints() {
        assert_eq!(smote_interpolate(&[0.0, 0.0], &[2.0, 2.0], 0.5), vec![1.0, 1.0]);
        assert_eq!(smote_interpolate(&[0.0, 0.0], &[2.0, 2.0], 0.0), vec![0.0, 0.0]);
    }

    #[test]
    fn smote_outputs_lie_on_minor_segments() {
        let rows = vec![
            vec![0.0, 0.0],
            vec![2.0, 0.0],
            vec![0.0, 2.0],
            vec![2.0, 2.0],
            vec![1.0, 1.0],
        ];
        let mut rng = StdRng::seed_from_u64(33);
        let out = smote(&rows, 2, 40, &mut rng).unwrap();
        assert_eq!(out.len(), 40);
        for p in &out {
            let on_some_segment = rows.iter().enumerate().any(|(i, a)| {
                rows.iter().skip(i + 1).any(|b| {
                    let seg: Vec<f64> = b.iter().zip(a).map(|(x, y)| x - y).collect();
                    let rel: Vec<f64> = p.iter().zip(a).map(|(x, y)| x - y).collect();
                    let seg_sq: f64 = seg.iter().map(|v| v * v).sum();
                    let t = (rel.iter().zip(&seg).map(|(r, s)| r * s).sum::<f64>() / seg_sq)
                        .clamp(0.0, 1.0);
                    let d: f64 = rel
                        .iter()
                        .zip(&seg)
                        .map(|(r, s)| (r - t * s) * (r - t * s))
                        .sum::<f64>()
                        .sqrt();
                    d < 1e-9
                })
            });
            assert!(on_some_segment, "{p:?} off every segment");
        }
    }

    #[test]
    fn smote_needs_two_rows() {
        let mut rng = StdRng::seed_from_u64(1);
        assert!(matches!(
            smote(&[vec![1.0]], 1, 5, &mut rng),
            Err(SosError::TooFewRows { need: 2, got: 1 })
        ));
    }

    fn toy_tables() -> (Table, Table) {
        let schema = Schema::new(
            vec![
                Column { name: "x".into(), kind: ColumnKind::Continuous, integer: false },
                Column { name: "y".into(), kind: ColumnKind::Continuous, integer: false },
                Column { name: "cls".into(), kind: ColumnKind::Categorical, integer: false },
            ],
            "cls",
        )
        .unwrap();
        let mut csv = String::from("x,y,cls\n");
        let mut rng = StdRng::seed_from_u64(60);
        for _ in 0..30 {
            let d: f64 = rng.gen::<f64>() - 0.5;
            csv.push_str(&format!("{},{},A\n", -1.0 + 0.2 * d, -1.0 - 0.2 * d));
            csv.push_str(&format!("{},{},B\n", 1.0 + 0.2 * d, 1.0 - 0.2 * d));
        }
        let table = parse_csv(&csv, &schema).unwrap();
        (table.clone(), table)
    }

    #[test]
    fn evaluate_on_separable_toy() {
        let (train, test) = toy_tables();
        let cfg = EvalConfig {
            classifiers: vec![ClassifierKind::LogisticRegression],
            seeds: vec![0, 1, 2, 3, 4],
            test_fraction: 0.2,
        };
        let summary = evaluate(&train, &test, &cfg).unwrap();
        assert_eq!(summary.runs.len(), 5);
        assert!(summary.overall.mean >= 0.99, "mean wf1 {}", summary.overall.mean);
        assert!(summary.overall.std >= 0.0);
    }

    #[test]
    fn evaluate_counts_runs_per_classifier() {
        let (train, test) = toy_tables();
        let cfg = EvalConfig::default();
        let summary = evaluate(&train, &test, &cfg).unwrap();
        assert_eq!(summary.runs.len(), 10);
        assert_eq!(summary.per_classifier.len(), 2);
    }

    #[test]
    fn evaluate_invariant_to_train_row_order() {
        let (train, test) = toy_tables();
        let mut shuffled_rows = train.rows.clone();
        shuffled_rows.reverse();
        let shuffled = Table::new(train.schema.clone(), shuffled_rows).unwrap();
        let cfg = EvalConfig {
            classifiers: vec![ClassifierKind::LogisticRegression],
            seeds: vec![0],
            test_fraction: 0.2,
        };
        let a = evaluate(&train, &test, &cfg).unwrap();
        let b = evaluate(&shuffled, &test, &cfg).unwrap();
        assert!((a.overall.mean - b.overall.mean).abs() < 1e-9);
    }

    #[test]
    fn schema_mismatch_rejected() {
        let (train, _) = toy_tables();
        let other_schema = Schema::new(
            vec![
                Column { name: "z".into(), kind: ColumnKind::Continuous, integer: false },
                Column { name: "cls".into(), kind: ColumnKind::Categorical, integer: false },
            ],
            "cls",
        )
        .unwrap();
        let other = parse_csv("z,cls\n1,A\n2,B\n", &other_schema).unwrap();
        assert!(matches!(
            evaluate(&train, &other, &EvalConfig::default()),
            Err(SosError::SchemaMismatch)
        ));
    }

    #[test]
    fn histogram_hand_binning() {
        let schema = Schema::new(
            vec![
                Column { name: "v".into(), kind: ColumnKind::Continuous, integer: false },
                Column { name: "cls".into(), kind: ColumnKind::Categorical, integer: false },
            ],
            "cls",
        )
        .unwrap();
        let table = parse_csv("v,cls\n0,A\n5,A\n10,A\n", &schema).unwrap();
        let hist = histogram(&table, "v", 2).unwrap();
        assert_eq!(hist.len(), 2);
        assert_eq!(hist[0], (0.0, 5.0, 1));
        assert_eq!(hist[1], (5.0, 10.0, 2));
    }

    #[test]
    fn histogram_counts_conserve_and_clamp() {
        let edges = vec![0.0, 1.0, 2.0];
        let counts = histogram_counts(&edges, &[-5.0, 0.5, 1.5, 99.0]);
        assert_eq!(counts, vec![2, 2]);
        assert_eq!(histogram_counts(&edges, &[]), vec![0, 0]);
    }

    #[test]
    fn histogram_rejects_categorical() {
        let (train, _) = toy_tables();
        assert!(matches!(histogram(&train, "cls", 3), Err(SosError::NotContinuous(_))));
    }
}
