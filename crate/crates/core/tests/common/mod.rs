#![allow(dead_code)]

use std::path::PathBuf;

use hetcec::model::{AvailabilitySet, LoadVector, Scenario};
use hetcec::rational::Rational;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(name)
}

pub fn ints(v: &[i128]) -> Vec<Rational> {
    v.iter().map(|&x| Rational::from_integer(x)).collect()
}

/// Small optimizer instance: up to 6 machines, integer speeds in 1..=8,
/// storage in 1..=3, a nonempty availability set and `1 ≤ L ≤ Z_t`.
pub fn random_instance(seed: u64) -> (Scenario, AvailabilitySet) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(1..=6usize);
    let speeds: Vec<Rational> = (0..n)
        .map(|_| Rational::from_integer(rng.random_range(1..=8)))
        .collect();
    let storage: Vec<u32> = (0..n).map(|_| rng.random_range(1..=3)).collect();
    let mut avail: Vec<usize> = (1..=n).filter(|_| rng.random_bool(0.7)).collect();
    if avail.is_empty() {
        avail.push(rng.random_range(1..=n));
    }
    let z_t: u32 = avail.iter().map(|&m| storage[m - 1]).sum();
    let l = rng.random_range(1..=z_t as usize);
    let sc = Scenario::new(speeds, storage, l, l, 1);
    (sc, AvailabilitySet::new(1, avail))
}

/// Loads with `0 ≤ μ[n] ≤ 1`, `Σμ = L` and a common denominator at most 12,
/// which is exactly the feasible region of the filling problem.
pub fn random_feasible_loads(seed: u64) -> (LoadVector, usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(1..=6usize);
    let l = rng.random_range(1..=n);
    let d = rng.random_range(1..=12i128);
    let mut a: Vec<i128> = (0..n).map(|_| rng.random_range(0..=d)).collect();
    let target = l as i128 * d;
    let mut idx: Vec<usize> = (0..n).collect();
    loop {
        let total: i128 = a.iter().sum();
        if total == target {
            break;
        }
        idx.shuffle(&mut rng);
        if total < target {
            let i = *idx.iter().find(|&&i| a[i] < d).expect("room below n·d");
            a[i] += 1;
        } else {
            let i = *idx.iter().find(|&&i| a[i] > 0).expect("mass above zero");
            a[i] -= 1;
        }
    }
    (
        LoadVector(a.iter().map(|&x| Rational::new(x, d)).collect()),
        l,
    )
}

pub fn random_field_vec(rng: &mut ChaCha8Rng, len: usize, p: u64) -> Vec<u64> {
    (0..len).map(|_| rng.random_range(0..p)).collect()
}
