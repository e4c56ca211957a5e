//! Uniform cell grid over ambient coordinates for fixed-radius queries.

use std::collections::HashMap;

use crate::scalar::Real;

const MAX_DIM: usize = 4;

type CellKey = [i64; MAX_DIM];

/// Bucket grid with cubic cells of a fixed side length.
///
/// Points are referenced by index into a flat coordinate array owned by the
/// caller. Within each bucket indices are kept ascending.
#[derive(Debug, Clone)]
pub struct SpatialHash<T> {
    dim: usize,
    cell: T,
    buckets: HashMap<CellKey, Vec<u32>>,
}

impl<T: Real> SpatialHash<T> {
    /// Index `coords` (row-major, `dim` values per point) with cells of side `cell`.
    pub fn build(coords: &[T], dim: usize, cell: T) -> Self {
        assert!((1..=MAX_DIM).contains(&dim), "ambient dimension {dim} unsupported");
        assert!(cell > T::zero(), "cell side must be positive");
        let mut buckets: HashMap<CellKey, Vec<u32>> = HashMap::new();
        for (i, p) in coords.chunks_exact(dim).enumerate() {
            buckets.entry(key_of(p, cell)).or_default().push(i as u32);
        }
        Self { dim, cell, buckets }
    }

    pub fn cell(&self) -> T {
        self.cell
    }

    /// Visit every indexed point whose cell intersects the axis-aligned box of
    /// half-width `radius` around `x`. Candidates still need an exact distance test.
    pub fn for_each_candidate(&self, x: &[T], radius: T, mut visit: impl FnMut(u32)) {
        let mut lo = [0i64; MAX_DIM];
        let mut hi = [0i64; MAX_DIM];
        let mut boxed: u128 = 1;
        for k in 0..self.dim {
            lo[k] = floor_index(x[k] - radius, self.cell);
            hi[k] = floor_index(x[k] + radius, self.cell);
            boxed = boxed.saturating_mul((hi[k] - lo[k] + 1) as u128);
        }
        if boxed > self.buckets.len() as u128 {
            for (key, members) in &self.buckets {
                if (0..self.dim).all(|k| key[k] >= lo[k] && key[k] <= hi[k]) {
                    members.iter().copied().for_each(&mut visit);
                }
            }
            return;
        }
        let mut key = lo;
        loop {
            if let Some(members) = self.buckets.get(&key) {
                members.iter().copied().for_each(&mut visit);
            }
            // odometer increment over the box
            let mut k = 0;
            loop {
                if k == self.dim {
                    return;
                }
                if key[k] < hi[k] {
                    key[k] += 1;
                    break;
                }
                key[k] = lo[k];
                k += 1;
            }
        }
    }
}

fn floor_index<T: Real>(v: T, cell: T) -> i64 {
    let q = (v / cell).floor();
    q.to_i64().unwrap_or(if q > T::zero() { i64::MAX / 4 } else { i64::MIN / 4 })
}

fn key_of<T: Real>(p: &[T], cell: T) -> CellKey {
    let mut key = [0i64; MAX_DIM];
    for (k, v) in p.iter().enumerate() {
        key[k] = floor_index(*v, cell);
    }
    key
}
