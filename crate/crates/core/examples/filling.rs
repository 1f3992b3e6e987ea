//! Turns a load vector into row sets, printing the remaining loads after
//! every iteration.

use hetcec::assignment::fill_traced;
use hetcec::model::LoadVector;
use hetcec::rational::{format_rational, Rational};

fn show(v: &[Rational]) -> String {
    v.iter().map(format_rational).collect::<Vec<_>>().join(" ")
}

fn main() {
    let loads = LoadVector(
        [(2, 5), (2, 5), (3, 5), (4, 5), (4, 5)]
            .map(|(n, d)| Rational::new(n, d))
            .to_vec(),
    );
    let (plan, trace) = fill_traced(&loads, 3).expect("feasible loads");

    for state in &trace {
        println!(
            "iteration {}: remaining [{}]",
            state.iteration,
            show(&state.remaining)
        );
    }
    for (f, (alpha, set)) in plan.alphas.iter().zip(&plan.sets).enumerate() {
        println!(
            "row set {}: alpha={} machines={set:?}",
            f + 1,
            format_rational(alpha)
        );
    }
}
