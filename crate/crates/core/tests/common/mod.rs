#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use structag::bigram::{count_bigrams, BigramStore};
use structag::corpus::TokenStream;
use structag::ClassId;

/// Random stream over `v` words with a few segment breaks.
pub fn random_stream(v: usize, len: usize, seed: u64) -> TokenStream {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ids: Vec<u32> = (0..len).map(|_| rng.gen_range(0..v as u32)).collect();
    let mut boundaries: Vec<usize> = (0..len / 200).map(|_| rng.gen_range(1..len.max(2))).collect();
    boundaries.sort_unstable();
    boundaries.dedup();
    TokenStream { ids, boundaries }
}

pub fn random_assignment(v: usize, classes: usize, seed: u64) -> Vec<ClassId> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9);
    (0..v).map(|_| rng.gen_range(0..classes as u32)).collect()
}

pub fn store(stream: &TokenStream, v: usize) -> BigramStore {
    count_bigrams(stream, v).unwrap()
}

/// Dense class bigram counts straight from the stream.
pub fn brute_matrix(stream: &TokenStream, assignment: &[ClassId], classes: usize) -> Vec<Vec<u64>> {
    let mut m = vec![vec![0u64; classes]; classes];
    for seg in stream.segments() {
        for w in seg.windows(2) {
            m[assignment[w[0] as usize] as usize][assignment[w[1] as usize] as usize] += 1;
        }
    }
    m
}

/// Mutual information of a dense count matrix, natural log converted to bits.
pub fn dense_acmi(m: &[Vec<u64>]) -> f64 {
    let t: u64 = m.iter().flatten().sum();
    let t = t as f64;
    let rows: Vec<f64> = m.iter().map(|r| r.iter().sum::<u64>() as f64 / t).collect();
    let cols: Vec<f64> = (0..m.len())
        .map(|j| m.iter().map(|r| r[j]).sum::<u64>() as f64 / t)
        .collect();
    let mut mi = 0.0;
    for (i, r) in m.iter().enumerate() {
        for (j, &n) in r.iter().enumerate() {
            if n > 0 {
                let p = n as f64 / t;
                mi += p * (p / (rows[i] * cols[j])).ln();
            }
        }
    }
    mi / std::f64::consts::LN_2
}
