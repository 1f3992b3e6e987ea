//! Optimal computation loads as machines leave, for six machines with three
//! speed classes and one cs-matrix each.

use hetcec::model::{AvailabilitySet, Scenario};
use hetcec::optimizer::solve_load;
use hetcec::rational::{format_rational, Rational};

fn main() {
    let speeds = [2, 2, 3, 3, 4, 4].map(Rational::from_integer).to_vec();
    let sc = Scenario::new(speeds, vec![1; 6], 3, 105, 4);
    let steps: [&[usize]; 4] = [
        &[1, 2, 3, 4, 5, 6],
        &[1, 2, 3, 5, 6],
        &[1, 2, 3, 5],
        &[2, 3, 5],
    ];

    for (t, avail) in steps.iter().enumerate() {
        let avail = AvailabilitySet::new(t + 1, avail.iter().copied());
        let sol = solve_load(&sc, &avail).expect("enough storage");
        let loads: Vec<String> = sol.loads.as_slice().iter().map(format_rational).collect();
        println!(
            "t={} available={:?} k*={} time={} loads=[{}]",
            t + 1,
            avail.available,
            sol.k_star,
            format_rational(&sol.time),
            loads.join(", ")
        );
    }
}
