//! Desk-scale synthetic datasets: an imbalanced two-Gaussian binary problem,
//! a one-major/two-minor three-class problem, and a single 1-D Gaussian
//! column for analytic-score checks. All generators are deterministic for a
//! given seed and split train/test stratified by class.

use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_distr::StandardNormal;

use crate::error::Result;
use crate::tabular::{Cell, Column, ColumnKind, Schema, Table};

fn gauss_schema(label: &str) -> Schema {
    Schema::new(
        vec![
            Column { name: "f1".into(), kind: ColumnKind::Continuous, integer: false },
            Column { name: "f2".into(), kind: ColumnKind::Continuous, integer: false },
            Column { name: label.into(), kind: ColumnKind::Categorical, integer: false },
        ],
        label,
    )
    .expect("static schema is valid")
}

fn cluster_rows<R: Rng>(
    rng: &mut R,
    n: usize,
    center: (f64, f64),
    label: &str,
) -> Vec<Vec<Cell>> {
    (0..n)
        .map(|_| {
            let dx: f64 = rng.sample(StandardNormal);
            let dy: f64 = rng.sample(StandardNormal);
            vec![
                Cell::Continuous(center.0 + dx),
                Cell::Continuous(center.1 + dy),
                Cell::Categorical(label.to_string()),
            ]
        })
        .collect()
}

/// Binary problem: `n_major` rows at the origin, `n_minor` rows offset by
/// `delta` along both axes, unit isotropic noise.
pub fn two_gauss_imbalanced(n_major: usize, n_minor: usize, delta: f64, seed: u64) -> Result<Table> {
    let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
    let mut rows = cluster_rows(&mut rng, n_major, (0.0, 0.0), "maj");
    rows.extend(cluster_rows(&mut rng, n_minor, (delta, delta), "min"));
    Table::new(gauss_schema("cls"), rows)
}

/// Three-class problem: one major and two minors at the given counts,
/// cluster centers `separation` apart.
pub fn multi_minor(counts: [usize; 3], separation: f64, seed: u64) -> Result<Table> {
    let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
    let centers = [(0.0, 0.0), (separation, 0.0), (0.0, separation)];
    let mut rows = Vec::new();
    for (k, (&n, center)) in counts.iter().zip(&centers).enumerate() {
        rows.extend(cluster_rows(&mut rng, n, *center, &format!("c{k}")));
    }
    Table::new(gauss_schema("cls"), rows)
}

/// One continuous column drawn from N(mean, std^2); single constant class.
pub fn gauss1d(mean: f64, std: f64, n: usize, seed: u64) -> Result<Table> {
    let schema = Schema::new(
        vec![
            Column { name: "value".into(), kind: ColumnKind::Continuous, integer: false },
            Column { name: "cls".into(), kind: ColumnKind::Categorical, integer: false },
        ],
        "cls",
    )?;
    let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
    let rows = (0..n)
        .map(|_| {
            let z: f64 = rng.sample(StandardNormal);
            vec![Cell::Continuous(mean + std * z), Cell::Categorical("all".into())]
        })
        .collect();
    Table::new(schema, rows)
}

/// Split per class: round(n * test_fraction) held-out rows chosen by a seeded
/// shuffle, original row order preserved inside each side.
pub fn stratified_split(table: &Table, test_fraction: f64, seed: u64) -> Result<(Table, Table)> {
    let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
    let mut in_test = vec![false; table.n_rows()];
    for rows in &table.class_index {
        let mut order = rows.clone();
        order.shuffle(&mut rng);
        let n_test = (rows.len() as f64 * test_fraction).round() as usize;
        for &idx in order.iter().take(n_test) {
            in_test[idx] = true;
        }
    }
    let pick = |test: bool| -> Vec<Vec<Cell>> {
        table
            .rows
            .iter()
            .zip(&in_test)
            .filter(|(_, t)| **t == test)
            .map(|(row, _)| row.clone())
            .collect()
    };
    Ok((Table::new(table.schema.clone(), pick(false))?, Table::new(table.schema.clone(), pick(true))?))
}
