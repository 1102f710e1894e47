//! The built-in polytope catalog: intervals, dilated simplices, a rectangle,
//! and the slanted triangle, each paired with the two smallest primes above
//! `3D`.

use crate::padic::is_prime_u64;
use crate::polytope::{build_cone_data, ConeData, Polytope};
use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub struct CatalogEntry {
    pub id: String,
    pub n: usize,
    pub vertices: Vec<Vec<i64>>,
    pub d: u64,
    pub normalized_volume: u64,
    /// Two smallest primes above `3D`.
    pub primes: [u64; 2],
}

impl CatalogEntry {
    pub fn polytope(&self) -> Polytope {
        Polytope::new(self.n, self.vertices.clone()).expect("catalog polytope is valid")
    }

    pub fn cone(&self) -> ConeData {
        build_cone_data(&self.polytope()).expect("catalog cone data")
    }
}

fn next_primes_above(bound: u64, count: usize) -> Vec<u64> {
    let mut out = Vec::with_capacity(count);
    let mut p = bound + 1;
    while out.len() < count {
        if is_prime_u64(p) {
            out.push(p);
        }
        p += 1;
    }
    out
}

/// The full catalog, in a fixed order.
pub fn catalog() -> Vec<CatalogEntry> {
    let mut shapes: Vec<(String, usize, Vec<Vec<i64>>)> = Vec::new();
    for d in 1..=6i64 {
        shapes.push((format!("interval-{d}"), 1, vec![vec![0], vec![d]]));
    }
    for d in 1..=3i64 {
        shapes.push((
            format!("simplex-{d}"),
            2,
            vec![vec![0, 0], vec![d, 0], vec![0, d]],
        ));
    }
    shapes.push((
        "rectangle-2x1".into(),
        2,
        vec![vec![0, 0], vec![2, 0], vec![0, 1], vec![2, 1]],
    ));
    shapes.push((
        "triangle-2-3".into(),
        2,
        vec![vec![0, 0], vec![2, 0], vec![0, 3]],
    ));
    shapes
        .into_iter()
        .map(|(id, n, vertices)| {
            let cone = build_cone_data(
                &Polytope::new(n, vertices.clone()).expect("catalog polytope"),
            )
            .expect("catalog cone");
            let primes = next_primes_above(3 * cone.d(), 2);
            CatalogEntry {
                id,
                n,
                vertices,
                d: cone.d(),
                normalized_volume: cone.normalized_volume(),
                primes: [primes[0], primes[1]],
            }
        })
        .collect()
}

/// Looks a catalog entry up by id.
pub fn catalog_entry(id: &str) -> Option<CatalogEntry> {
    catalog().into_iter().find(|e| e.id == id)
}


#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_shape_and_primes() {
        let entries = catalog();
        assert_eq!(entries.len(), 11);
        let interval3 = entries.iter().find(|e| e.id == "interval-3").unwrap();
        assert_eq!(interval3.d, 3);
        assert_eq!(interval3.primes, [11, 13]);
        let tri = entries.iter().find(|e| e.id == "triangle-2-3").unwrap();
        assert_eq!(tri.d, 6);
        assert_eq!(tri.normalized_volume, 6);
        assert_eq!(tri.primes, [19, 23]);
        let rect = entries.iter().find(|e| e.id == "rectangle-2x1").unwrap();
        assert_eq!(rect.d, 2);
        assert_eq!(rect.normalized_volume, 4);
        assert_eq!(rect.primes, [7, 11]);
        let interval1 = entries.iter().find(|e| e.id == "interval-1").unwrap();
        assert_eq!(interval1.primes, [5, 7]);
    }
}
