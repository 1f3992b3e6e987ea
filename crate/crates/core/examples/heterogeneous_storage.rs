//! Machines holding different numbers of cs-matrices: loads, the split into
//! fully and partially computed cs-matrices, and the resulting row sets.

use hetcec::assignment::{fill_heterogeneous, plan_partials};
use hetcec::model::{AvailabilitySet, Scenario};
use hetcec::optimizer::solve_load;
use hetcec::rational::{format_rational, Rational};

fn main() {
    let speeds = [2, 3, 4, 2, 3, 4].map(Rational::from_integer).to_vec();
    let sc = Scenario::new(speeds, vec![2, 2, 2, 1, 1, 1], 6, 66, 4);
    let avail = AvailabilitySet::all(1, 6);

    let sol = solve_load(&sc, &avail).unwrap();
    println!("time {} with k*={}", format_rational(&sol.time), sol.k_star);

    let partials = plan_partials(&sol.loads, &sc.storage_map).unwrap();
    for (n, q) in sc.storage_map.iter() {
        println!(
            "machine {n}: stores {q:?} load {} full {:?} partial {:?}",
            format_rational(&sol.loads.get(n)),
            partials.full[n - 1],
            partials.partial[n - 1]
        );
    }

    let plan = fill_heterogeneous(&sol.loads, &sc.storage_map, 6).unwrap();
    for (alpha, set) in plan.alphas.iter().zip(&plan.sets) {
        println!("alpha={:>5} cs-matrices={set:?}", format_rational(alpha));
    }
}
