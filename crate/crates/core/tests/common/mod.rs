#![allow(dead_code)]

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type CMat = DMatrix<Complex64>;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn frob(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn dist(a: &CMat, b: &CMat) -> f64 {
    frob(&(a - b))
}

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn real(rows: usize, entries: &[f64]) -> CMat {
    CMat::from_row_slice(rows, entries.len() / rows, &entries.iter().map(|&x| c(x, 0.0)).collect::<Vec<_>>())
}
