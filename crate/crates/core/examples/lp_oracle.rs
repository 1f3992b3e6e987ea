//! Cross-checks the closed-form optimizer against the exact LP on a few
//! random instances.

use hetcec::model::{AvailabilitySet, Scenario};
use hetcec::optimizer::solve_load;
use hetcec::oracle::lp_min_time;
use hetcec::rational::{format_rational, Rational};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    for _ in 0..5 {
        let speeds: Vec<Rational> = (0..5)
            .map(|_| Rational::new(rng.random_range(1..=12), rng.random_range(1..=4)))
            .collect();
        let storage: Vec<u32> = (0..5).map(|_| rng.random_range(1..=3)).collect();
        let l = rng.random_range(1..=storage.iter().sum::<u32>() as usize);
        let sc = Scenario::new(speeds.clone(), storage.clone(), l, l, 1);
        let avail = AvailabilitySet::all(1, 5);
        let closed = solve_load(&sc, &avail).unwrap().time;
        let (lp, _) = lp_min_time(&speeds, &storage, l, &avail).unwrap();
        println!(
            "L={l} storage={storage:?} closed form {} LP {}",
            format_rational(&closed),
            format_rational(&lp)
        );
    }
}
