//! End-to-end orchestration: one score network per class, boundary
//! (style-transfer) or regular (prior-noise) oversampling of minor classes
//! until the table is balanced, and single-network full-table synthesis.

use std::collections::BTreeMap;

use rand::rngs::StdRng;
use rand::Rng;
use rand::SeedableRng;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SosError};
use crate::sampling::{forward_perturb, reverse_solve, SamplerConfig};
use crate::scorenet::{NetScore, NetSpec, Params};
use crate::sde::{sample_prior, SdeConfig};
use crate::tabular::{encode, partition_classes, ClassId, Encoder, Table};
use crate::training::{train_class, EpochStat, TrainConfig};

/// SplitMix64 step; stable way to derive independent seed streams.
pub(crate) fn derive_seed(base: u64, stream: u64) -> u64 {
    let mut z = base ^ stream.wrapping_mul(0x9e3779b97f4a7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// Per-class epoch logs emitted by [`train_all`].
pub type TrainLogs = Vec<(ClassId, Vec<EpochStat>)>;

/// One trained score network per class plus everything needed to sample.
#[derive(Debug, Clone)]
pub struct ModelSet {
    pub spec: NetSpec,
    pub sde: SdeConfig,
    pub encoder: Encoder,
    pub models: BTreeMap<ClassId, Params>,
    pub major_class: ClassId,
    pub finetuned: bool,
}

impl ModelSet {
    pub fn params(&self, class: ClassId) -> Result<&Params> {
        self.models
            .get(&class)
            .ok_or_else(|| SosError::MissingArtifact(class.to_string()))
    }
}

/// Train one network per class present in the table. Classes may train
/// concurrently; seeds derive from the class id so the result is identical
/// for any thread count.
pub fn train_all(
    table: &Table,
    encoder: &Encoder,
    spec: &NetSpec,
    sde: &SdeConfig,
    train_cfg: &TrainConfig,
    threads: usize,
) -> Result<(ModelSet, TrainLogs)> {
    if spec.input_dim != encoder.dim {
        return Err(SosError::DimensionMismatch { want: encoder.dim, got: spec.input_dim });
    }
    let (features, labels) = encode(encoder, table)?;
    let n_classes = table.class_labels.len();
    let mut per_class_rows: Vec<Vec<Vec<f64>>> = vec![Vec::new(); n_classes];
    for (row, class) in features.into_iter().zip(labels) {
        per_class_rows[class].push(row);
    }

    let jobs: Vec<(ClassId, Vec<Vec<f64>>)> = per_class_rows.into_iter().enumerate().collect();
    let results = run_parallel(jobs, threads, |(class, rows)| {
        let cfg = TrainConfig { seed: derive_seed(train_cfg.seed, class as u64), ..train_cfg.clone() };
        train_class(&rows, spec, sde, &cfg).map(|(params, stats)| (class, params, stats))
    })?;

    let mut models = BTreeMap::new();
    let mut logs = Vec::new();
    for (class, params, stats) in results {
        models.insert(class, params);
        logs.push((class, stats));
    }
    let major_class = match partition_classes(table) {
        Ok(part) => part.major,
        // single class: full synthesis still works, call it the major
        Err(SosError::SingleClass) => 0,
        Err(e) => return Err(e),
    };
    let modelset = ModelSet {
        spec: spec.clone(),
        sde: *sde,
        encoder: encoder.clone(),
        models,
        major_class,
        finetuned: false,
    };
    Ok((modelset, logs))
}

fn run_parallel<J, T, F>(jobs: Vec<J>, threads: usize, f: F) -> Result<Vec<T>>
where
    J: Send,
    T: Send,
    F: Fn(J) -> Result<T> + Sync,
{
    if threads <= 1 || jobs.len() <= 1 {
        return jobs.into_iter().map(&f).collect();
    }
    let n = jobs.len();
    let mut slots: Vec<Option<Result<T>>> = (0..n).map(|_| None).collect();
    let queue = std::sync::Mutex::new(jobs.into_iter().enumerate().collect::<Vec<_>>());
    let slots_mx = std::sync::Mutex::new(&mut slots);
    std::thread::scope(|scope| {
        for _ in 0..threads.min(n) {
            scope.spawn(|| loop {
                let job = queue.lock().unwrap().pop();
                match job {
                    Some((i, job)) => {
                        let out = f(job);
                        slots_mx.lock().unwrap()[i] = Some(out);
                    }
                    None => break,
                }
            });
        }
    });
    slots.into_iter().map(|s| s.expect("worker filled every slot")).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OversampleOption {
    Boundary,
    Regular,
}

#[derive(Debug, Clone)]
pub struct OversampleJob {
    pub option: OversampleOption,
    pub sampler: SamplerConfig,
    /// Noising horizon for boundary seeding; the reverse solve starts here.
    pub t_end: f64,
    pub target: ClassId,
    pub count: usize,
}

/// Generate `job.count` encoded fake rows for the target class.
///
/// Boundary: noise a real record drawn uniformly from the pooled non-target
/// classes up to `t_end`, then denoise it with the target network. Regular:
/// denoise a pure prior draw. Each sample runs on its own derived RNG stream,
/// so output is deterministic and indexed by sample, not by completion order.
pub fn oversample_class<R: Rng>(
    modelset: &ModelSet,
    table: &Table,
    job: &OversampleJob,
    rng: &mut R,
) -> Result<Vec<Vec<f64>>> {
    let params = modelset.params(job.target)?;
    let score = NetScore { spec: &modelset.spec, params };
    let dim = modelset.encoder.dim;
    job.sampler.validate(modelset.sde.family)?;
    if job.count == 0 {
        return Ok(Vec::new());
    }

    let seed_pool: Vec<Vec<f64>> = match job.option {
        OversampleOption::Regular => Vec::new(),
        OversampleOption::Boundary => {
            let (features, labels) = encode(&modelset.encoder, table)?;
            let pool: Vec<Vec<f64>> = features
                .into_iter()
                .zip(labels)
                .filter(|(_, class)| *class != job.target)
                .map(|(row, _)| row)
                .collect();
            if pool.is_empty() {
                return Err(SosError::NoSeedRows);
            }
            pool
        }
    };

    let base: u64 = rng.gen();
    let mut out = Vec::with_capacity(job.count);
    for i in 0..job.count {
        let mut stream = StdRng::seed_from_u64(derive_seed(base, i as u64));
        let sample = match job.option {
            OversampleOption::Regular => {
                let x_end = sample_prior(&modelset.sde, dim, 1, &mut stream).remove(0);
                reverse_solve(&modelset.sde, &score, &x_end, &job.sampler, 1.0, &mut stream)?
            }
            OversampleOption::Boundary => {
                let pick = stream.gen_range(0..seed_pool.len());
                let x_end =
                    forward_perturb(&modelset.sde, &seed_pool[pick], job.t_end, &mut stream)?;
                reverse_solve(&modelset.sde, &score, &x_end, &job.sampler, job.t_end, &mut stream)?
            }
        };
        out.push(sample);
    }
    Ok(out)
}

/// Oversample every minor class up to the major cardinality, decode, and
/// append in class order. Minor classes may generate concurrently; each gets
/// a base seed drawn up front, so the result is identical for any `threads`.
pub fn balance<R: Rng>(
    table: &Table,
    modelset: &ModelSet,
    option: OversampleOption,
    sampler: &SamplerConfig,
    t_end: f64,
    rng: &mut R,
    threads: usize,
) -> Result<(Table, Vec<(ClassId, usize)>)> {
    let part = partition_classes(table)?;
    let max_count = part.counts.iter().map(|(_, n)| *n).max().unwrap_or(0);
    let jobs: Vec<(ClassId, usize, u64)> = part
        .minors
        .iter()
        .map(|&minor| (minor, max_count - part.counts[minor].1, rng.gen()))
        .collect();
    let results = run_parallel(jobs, threads, |(minor, deficit, base)| {
        let job = OversampleJob {
            option,
            sampler: sampler.clone(),
            t_end,
            target: minor,
            count: deficit,
        };
        let fake = oversample_class(modelset, table, &job, &mut StdRng::seed_from_u64(base))?;
        Ok((minor, deficit, crate::tabular::decode(&modelset.encoder, &fake)?))
    })?;
    let mut augmented = table.clone();
    let mut generated = Vec::new();
    for (minor, deficit, rows) in results {
        augmented.append_labeled(minor, rows);
        generated.push((minor, deficit));
    }
    Ok((augmented, generated))
}

/// Train one network on every row regardless of class, then synthesize a
/// full fake table of the same size from prior noise. Fake labels come from
/// the nearest real-class centroid in encoded space.
pub fn synth_full<R: Rng>(
    table: &Table,
    spec: &NetSpec,
    sde: &SdeConfig,
    train_cfg: &TrainConfig,
    sampler: &SamplerConfig,
    rng: &mut R,
) -> Result<Table> {
    let encoder = crate::tabular::fit_encoder(table)?;
    if spec.input_dim != encoder.dim {
        return Err(SosError::DimensionMismatch { want: encoder.dim, got: spec.input_dim });
    }
    let (features, labels) = encode(&encoder, table)?;
    let (params, _) = train_class(&features, spec, sde, train_cfg)?;
    let score = NetScore { spec, params: &params };

    let n_classes = table.class_labels.len();
    let mut centroids = vec![vec![0.0; encoder.dim]; n_classes];
    let mut counts = vec![0usize; n_classes];
    for (row, class) in features.iter().zip(&labels) {
        counts[*class] += 1;
        for (c, v) in centroids[*class].iter_mut().zip(row) {
            *c += v;
        }
    }
    for (centroid, count) in centroids.iter_mut().zip(&counts) {
        for c in centroid.iter_mut() {
            *c /= (*count).max(1) as f64;
        }
    }

    let base: u64 = rng.gen();
    let mut fake_rows = Vec::with_capacity(table.n_rows());
    for i in 0..table.n_rows() {
        let mut stream = StdRng::seed_from_u64(derive_seed(base, i as u64));
        let x_end = sample_prior(sde, encoder.dim, 1, &mut stream).remove(0);
        let x0 = reverse_solve(sde, &score, &x_end, sampler, 1.0, &mut stream)?;
        fake_rows.push(x0);
    }

    let decoded = crate::tabular::decode(&encoder, &fake_rows)?;
    let label_idx = table.schema.label_index();
    let mut rows = Vec::with_capacity(decoded.len());
    for (cells, feat) in decoded.into_iter().zip(&fake_rows) {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (class, centroid) in centroids.iter().enumerate() {
            let d: f64 = centroid.iter().zip(feat).map(|(c, f)| (c - f) * (c - f)).sum();
            if d < best_d {
                best_d = d;
                best = class;
            }
        }
        let mut row = cells;
        row.insert(label_idx, crate::tabular::Cell::Categorical(table.class_labels[best].clone()));
        rows.push(row);
    }
    Table::new(table.schema.clone(), rows)
}
