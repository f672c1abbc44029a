#![allow(dead_code)]

use parity_spectrum::model::{validate_schema, Dataset, RawTable, Schema};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Shape of a random discrete SFM dataset.
#[derive(Debug, Clone)]
pub struct Shape {
    pub n: usize,
    pub z_arity: Vec<u32>,
    pub w_arity: Vec<u32>,
    pub y_arity: u32,
}

impl Shape {
    pub fn random(rng: &mut impl Rng, n_range: std::ops::RangeInclusive<usize>) -> Self {
        let arity = |rng: &mut dyn rand::RngCore| rng.random_range(2..=4u32);
        let nz = rng.random_range(0..=2);
        let nw = rng.random_range(0..=2);
        Shape {
            n: rng.random_range(n_range),
            z_arity: (0..nz).map(|_| arity(rng)).collect(),
            w_arity: (0..nw).map(|_| arity(rng)).collect(),
            y_arity: arity(rng),
        }
    }
}

/// Random dataset where each variable depends on its SFM parents through a
/// random conditional table, so strata are unevenly populated.
pub fn random_dataset(shape: &Shape, seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = shape.n;
    let bias: f64 = rng.random_range(0.1..0.9);
    let mut cols: Vec<(String, Vec<u32>)> = Vec::new();
    let mut x: Vec<u32> = (0..n)
        .map(|_| u32::from(rng.random::<f64>() < bias))
        .collect();
    x[0] = 0;
    x[1] = 1;
    // a random "hash" of the parents picks one of `arity` skewed categories
    let child = |rng: &mut ChaCha8Rng, parents: &[&Vec<u32>], arity: u32| -> Vec<u32> {
        let salt: u64 = rng.random();
        let noise: f64 = rng.random_range(0.0..1.0);
        (0..n)
            .map(|r| {
                let mut h = salt;
                for p in parents {
                    h = h
                        .wrapping_mul(0x9E37_79B9_7F4A_7C15)
                        .wrapping_add(u64::from(p[r]) + 1);
                }
                if rng.random::<f64>() < noise {
                    rng.random_range(0..arity)
                } else {
                    (h >> 33) as u32 % arity
                }
            })
            .collect()
    };
    for (i, &a) in shape.z_arity.iter().enumerate() {
        let parents: Vec<&Vec<u32>> = if rng.random::<bool>() {
            vec![&x]
        } else {
            vec![]
        };
        let col = child(&mut rng, &parents, a);
        cols.push((format!("z{i}"), col));
    }
    for (i, &a) in shape.w_arity.iter().enumerate() {
        let mut parents: Vec<&Vec<u32>> = vec![&x];
        parents.extend(cols.iter().map(|c| &c.1));
        let col = child(&mut rng, &parents, a);
        cols.push((format!("w{i}"), col));
    }
    let mut parents: Vec<&Vec<u32>> = vec![&x];
    parents.extend(cols.iter().map(|c| &c.1));
    let y = child(&mut rng, &parents, shape.y_arity);

    let label =
        |prefix: &str, v: &[u32]| v.iter().map(|c| format!("{prefix}{c}")).collect::<Vec<_>>();
    let mut table: Vec<(&str, Vec<String>)> = vec![("x", label("g", &x))];
    for (name, col) in &cols {
        table.push((name.as_str(), label("", col)));
    }
    table.push(("y", label("", &y)));
    let z: Vec<&str> = (0..shape.z_arity.len())
        .map(|i| cols[i].0.as_str())
        .collect();
    let w: Vec<&str> = (shape.z_arity.len()..cols.len())
        .map(|i| cols[i].0.as_str())
        .collect();
    validate_schema(
        &RawTable::from_columns(&table),
        &Schema::new("x", "g0", "g1")
            .with_z(&z)
            .with_w(&w)
            .with_y("y"),
    )
    .expect("generated table is valid")
}
