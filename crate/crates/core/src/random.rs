//! Seeded random filtrations for tests and benchmarks.
//!
//! The generator draws a random flag complex of dimension at most three,
//! assigns each simplex a level slightly above the maximum of its vertex
//! levels, sorts into filtration order, and truncates to the requested
//! length. The same `(n, seed)` pair always yields the same filtration.

use crate::filtration::{extend_partial_order, Filtration, Simplex};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Deterministic random filtration with exactly `n` simplices.
///
/// The vertex count grows until the generated complex has at least `n`
/// simplices; the filtration is then cut after its first `n` entries. A
/// prefix of a filtration is again a filtration, so the result is valid
/// by construction.
pub fn random_filtration(n: usize, seed: u64) -> Filtration {
    if n == 0 {
        return Filtration::new(Vec::new()).expect("empty filtration is valid");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut vertices = 4usize;
    loop {
        let full = random_flag_filtration(vertices, &mut rng);
        if full.len() >= n {
            let prefix: Vec<Simplex> = full.simplices()[..n].to_vec();
            return Filtration::new(prefix).expect("prefix of a filtration is a filtration");
        }
        vertices += 2;
    }
}

/// One attempt: a flag complex on `vertices` vertices, dimension capped
/// at three, in filtration order.
fn random_flag_filtration(vertices: usize, rng: &mut ChaCha8Rng) -> Filtration {
    let levels: Vec<f64> = (0..vertices).map(|_| rng.gen::<f64>()).collect();
    let edge_prob: f64 = rng.gen_range(0.35..0.75);
    let mut adjacent = vec![vec![false; vertices]; vertices];
    let mut entries: Vec<(Simplex, f64)> = Vec::new();

    for (v, &level) in levels.iter().enumerate() {
        entries.push((Simplex::new(vec![v as u32]), level));
    }
    for i in 0..vertices {
        for j in i + 1..vertices {
            if rng.gen_bool(edge_prob) {
                adjacent[i][j] = true;
                adjacent[j][i] = true;
                let level = levels[i].max(levels[j]) + 0.01 + 0.001 * rng.gen::<f64>();
                entries.push((Simplex::new(vec![i as u32, j as u32]), level));
            }
        }
    }
    for i in 0..vertices {
        for j in i + 1..vertices {
            if !adjacent[i][j] {
                continue;
            }
            for k in j + 1..vertices {
                if !(adjacent[i][k] && adjacent[j][k]) {
                    continue;
                }
                let level = levels[i].max(levels[j]).max(levels[k]) + 0.02 + 0.001 * rng.gen::<f64>();
                entries.push((Simplex::new(vec![i as u32, j as u32, k as u32]), level));
                for l in k + 1..vertices {
                    if adjacent[i][l] && adjacent[j][l] && adjacent[k][l] {
                        let level = levels[i]
                            .max(levels[j])
                            .max(levels[k])
                            .max(levels[l])
                            + 0.03
                            + 0.001 * rng.gen::<f64>();
                        entries.push((
                            Simplex::new(vec![i as u32, j as u32, k as u32, l as u32]),
                            level,
                        ));
                    }
                }
            }
        }
    }
    extend_partial_order(entries).expect("levels respect the face relation by construction")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_length_and_determinism() {
        for &n in &[1usize, 7, 32, 128] {
            let a = random_filtration(n, 42);
            let b = random_filtration(n, 42);
            assert_eq!(a.len(), n);
            assert_eq!(a.simplices(), b.simplices());
        }
    }

    #[test]
    fn different_seeds_differ() {
        let a = random_filtration(64, 1);
        let b = random_filtration(64, 2);
        assert_ne!(a.simplices(), b.simplices());
    }

    #[test]
    fn contains_higher_dimensional_simplices() {
        // A corpus that never leaves dimension zero would test nothing.
        let f = random_filtration(128, 7);
        let max_dim = f.simplices().iter().map(|s| s.dim()).max().unwrap();
        assert!(max_dim >= 2, "expected simplices of dimension >= 2");
    }

    #[test]
    fn zero_length_is_empty() {
        assert!(random_filtration(0, 9).is_empty());
    }
}
