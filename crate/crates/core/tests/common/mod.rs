#![allow(dead_code)]

use frcert::linalg::{invert, rat, Rat, RatMatrix, SymRatMatrix};
use num_traits::One;
use rand::RngExt;
use rand_chacha::ChaCha8Rng;

pub fn ints(xs: &[i64]) -> Vec<Rat> {
    xs.iter().map(|&x| rat(x)).collect()
}

pub fn random_vec(rng: &mut ChaCha8Rng, len: usize, range: i64) -> Vec<Rat> {
    (0..len).map(|_| rat(rng.random_range(-range..=range))).collect()
}

pub fn random_invertible(rng: &mut ChaCha8Rng, n: usize, range: i64) -> RatMatrix {
    loop {
        let m = RatMatrix::new(n, n, random_vec(rng, n * n, range)).unwrap();
        if invert(&m).is_some() {
            return m;
        }
    }
}

// Staircase sequence: identity on its own block, random entries in earlier rows.
pub fn random_regfr(rng: &mut ChaCha8Rng, n: usize, sizes: &[usize]) -> Vec<SymRatMatrix> {
    let mut out = Vec::new();
    let mut s = 0;
    for &p in sizes {
        let mut y = SymRatMatrix::zeros(n);
        for r in 0..s {
            for c in r..n {
                y.set(r, c, rat(rng.random_range(-2..=2)));
            }
        }
        for d in s..s + p {
            y.set(d, d, Rat::one());
        }
        out.push(y);
        s += p;
    }
    out
}

// k positive sizes summing to at most n.
pub fn random_strict_sizes(rng: &mut ChaCha8Rng, n: usize, k: usize) -> Vec<usize> {
    let mut sizes = vec![1; k];
    let mut left = n - k;
    for p in sizes.iter_mut() {
        let extra = rng.random_range(0..=left);
        *p += extra;
        left -= extra;
    }
    sizes
}

// g^T g for a random integer g: psd, often singular.
pub fn random_psd(rng: &mut ChaCha8Rng, n: usize, rank: usize) -> SymRatMatrix {
    let g = RatMatrix::new(rank, n, random_vec(rng, rank * n, 2)).unwrap();
    SymRatMatrix::from_full(&g.transpose().mul(&g).unwrap()).unwrap()
}

pub fn scratch_dir(tag: &str) -> std::path::PathBuf {
    let dir = std::env::temp_dir().join(format!("frcert-{tag}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    dir
}
