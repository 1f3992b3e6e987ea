//! Reference checks that share no code with the solvers they audit.
//!
//! * [`lp_min_time`] solves the load problem as a plain linear program with an
//!   exact-rational two-phase simplex (Bland's rule, so degenerate pivots
//!   cannot cycle).
//! * [`verify_plan`] recomputes every constraint of a row-set plan from
//!   scratch.

use std::collections::BTreeSet;

use num_traits::{One, Zero};

use crate::assignment::AssignmentPlan;
use crate::model::{AvailabilitySet, LoadVector, StorageMap};
use crate::rational::{format_rational, Rational};

/// Outcome of [`minimize`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LpResult {
    Optimal { value: Rational, x: Vec<Rational> },
    Infeasible,
    Unbounded,
}

struct Tableau {
    rows: Vec<Vec<Rational>>,
    basis: Vec<usize>,
    width: usize,
}

impl Tableau {
    fn rhs(&self, i: usize) -> Rational {
        self.rows[i][self.width]
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let p = self.rows[row][col];
        for v in self.rows[row].iter_mut() {
            *v /= p;
        }
        let pivot_row = self.rows[row].clone();
        for (i, r) in self.rows.iter_mut().enumerate() {
            if i == row || r[col].is_zero() {
                continue;
            }
            let factor = r[col];
            for (v, pv) in r.iter_mut().zip(&pivot_row) {
                *v -= factor * pv;
            }
        }
        self.basis[row] = col;
    }

    /// Runs simplex iterations for `cost` over the columns in `allowed`.
    fn optimize(&mut self, cost: &[Rational], allowed: &[bool]) -> bool {
        loop {
            let entering = (0..self.width).find(|&j| {
                if !allowed[j] || self.basis.contains(&j) {
                    return false;
                }
                let reduced = cost[j]
                    - self
                        .basis
                        .iter()
                        .enumerate()
                        .map(|(i, &b)| cost[b] * self.rows[i][j])
                        .sum::<Rational>();
                reduced < Rational::zero()
            });
            let Some(col) = entering else {
                return true;
            };
            let mut leave: Option<(usize, Rational)> = None;
            for i in 0..self.rows.len() {
                let a = self.rows[i][col];
                if a <= Rational::zero() {
                    continue;
                }
                let ratio = self.rhs(i) / a;
                leave = match leave {
                    None => Some((i, ratio)),
                    Some((bi, br)) => {
                        if ratio < br || (ratio == br && self.basis[i] < self.basis[bi]) {
                            Some((i, ratio))
                        } else {
                            Some((bi, br))
                        }
                    }
                };
            }
            match leave {
                Some((row, _)) => self.pivot(row, col),
                None => return false,
            }
        }
    }
}

/// Minimizes `cost·x` subject to `a·x = b`, `x ≥ 0`.
pub fn minimize(a: &[Vec<Rational>], b: &[Rational], cost: &[Rational]) -> LpResult {
    let m = a.len();
    let n = cost.len();
    let width = n + m;
    let mut rows = Vec::with_capacity(m);
    for (i, (row, &rhs)) in a.iter().zip(b).enumerate() {
        let flip = rhs < Rational::zero();
        let sign = if flip {
            -Rational::one()
        } else {
            Rational::one()
        };
        let mut r: Vec<Rational> = row.iter().map(|v| v * sign).collect();
        r.resize(n, Rational::zero());
        for k in 0..m {
            r.push(if k == i {
                Rational::one()
            } else {
                Rational::zero()
            });
        }
        r.push(rhs * sign);
        rows.push(r);
    }
    let mut t = Tableau {
        rows,
        basis: (n..n + m).collect(),
        width,
    };

    let phase1: Vec<Rational> = (0..width)
        .map(|j| {
            if j >= n {
                Rational::one()
            } else {
                Rational::zero()
            }
        })
        .collect();
    t.optimize(&phase1, &vec![true; width]);
    let infeasibility: Rational = (0..m).filter(|&i| t.basis[i] >= n).map(|i| t.rhs(i)).sum();
    if infeasibility > Rational::zero() {
        return LpResult::Infeasible;
    }
    // Move zero-valued artificials out of the basis where possible.
    for i in 0..m {
        if t.basis[i] >= n {
            if let Some(j) = (0..n).find(|&j| !t.rows[i][j].is_zero() && !t.basis.contains(&j)) {
                t.pivot(i, j);
            }
        }
    }

    let mut phase2 = cost.to_vec();
    phase2.resize(width, Rational::zero());
    let allowed: Vec<bool> = (0..width).map(|j| j < n).collect();
    if !t.optimize(&phase2, &allowed) {
        return LpResult::Unbounded;
    }
    let mut x = vec![Rational::zero(); n];
    for (i, &b) in t.basis.iter().enumerate() {
        if b < n {
            x[b] = t.rhs(i);
        }
    }
    let value = x.iter().zip(cost).map(|(xi, ci)| xi * ci).sum();
    LpResult::Optimal { value, x }
}

/// Minimum of `max_n μ[n]/s[n]` over `Σμ = L`, `0 ≤ μ ≤ σ`, restricted to the
/// available machines. `None` when infeasible.
///
/// Variables are `μ` (one per available machine), the level `c`, then one
/// slack per time constraint `μ[n] − s[n]·c ≤ 0` and one per box constraint.
pub fn lp_min_time(
    speeds: &[Rational],
    storage: &[u32],
    l: usize,
    avail: &AvailabilitySet,
) -> Option<(Rational, LoadVector)> {
    let machines: Vec<usize> = avail.available.iter().copied().collect();
    let k = machines.len();
    let vars = 3 * k + 1;
    let level = k;
    let mut a = Vec::with_capacity(2 * k + 1);
    let mut b = Vec::with_capacity(2 * k + 1);
    for (i, &n) in machines.iter().enumerate() {
        let mut row = vec![Rational::zero(); vars];
        row[i] = Rational::one();
        row[level] = -speeds[n - 1];
        row[k + 1 + i] = Rational::one();
        a.push(row);
        b.push(Rational::zero());
    }
    for (i, &n) in machines.iter().enumerate() {
        let mut row = vec![Rational::zero(); vars];
        row[i] = Rational::one();
        row[2 * k + 1 + i] = Rational::one();
        a.push(row);
        b.push(Rational::from_integer(storage[n - 1] as i128));
    }
    let mut row = vec![Rational::zero(); vars];
    for v in row.iter_mut().take(k) {
        *v = Rational::one();
    }
    a.push(row);
    b.push(Rational::from_integer(l as i128));

    let mut cost = vec![Rational::zero(); vars];
    cost[level] = Rational::one();
    match minimize(&a, &b, &cost) {
        LpResult::Optimal { value, x } => {
            let mut loads = LoadVector::zeros(speeds.len());
            for (i, &n) in machines.iter().enumerate() {
                loads.set(n, x[i]);
            }
            Some((value, loads))
        }
        _ => None,
    }
}

/// Every violated load constraint: mass `L`, the box `0 ≤ μ ≤ σ`, nothing on
/// unavailable machines, and finishing time no worse than `time`.
pub fn verify_loads(
    loads: &LoadVector,
    speeds: &[Rational],
    storage: &[u32],
    l: usize,
    avail: &AvailabilitySet,
    time: Rational,
) -> Vec<String> {
    let mut problems = Vec::new();
    let mass: Rational = loads.as_slice().iter().sum();
    if mass != Rational::from_integer(l as i128) {
        problems.push(format!("loads sum to {}, not {l}", format_rational(&mass)));
    }
    for (i, mu) in loads.as_slice().iter().enumerate() {
        let n = i + 1;
        if *mu < Rational::zero() || *mu > Rational::from_integer(storage[i] as i128) {
            problems.push(format!(
                "machine {n}: load {} outside [0, {}]",
                format_rational(mu),
                storage[i]
            ));
        }
        if !avail.contains(n) && !mu.is_zero() {
            problems.push(format!(
                "machine {n} is unavailable but has load {}",
                format_rational(mu)
            ));
        }
        if avail.contains(n) && *mu / speeds[i] > time {
            problems.push(format!(
                "machine {n} finishes at {}",
                format_rational(&(*mu / speeds[i]))
            ));
        }
    }
    problems
}

/// Every violated plan constraint, as text. Empty means the plan is valid
/// and realizes `loads` exactly.
pub fn verify_plan(
    loads: &LoadVector,
    plan: &AssignmentPlan,
    storage: &StorageMap,
    avail: &AvailabilitySet,
    l: usize,
) -> Vec<String> {
    let mut problems = Vec::new();
    if plan.alphas.len() != plan.sets.len() {
        problems.push(format!(
            "{} fractions but {} cs-matrix sets",
            plan.alphas.len(),
            plan.sets.len()
        ));
        return problems;
    }
    let total: Rational = plan.alphas.iter().sum();
    if total != Rational::one() {
        problems.push(format!("fractions sum to {}", format_rational(&total)));
    }
    if plan.alphas.len() > avail.len() {
        problems.push(format!(
            "{} row sets for {} machines",
            plan.alphas.len(),
            avail.len()
        ));
    }
    let usable: BTreeSet<usize> = avail
        .available
        .iter()
        .flat_map(|&n| storage.stored_by(n).iter().copied())
        .collect();
    for (f, (alpha, set)) in plan.alphas.iter().zip(&plan.sets).enumerate() {
        if *alpha <= Rational::zero() {
            problems.push(format!(
                "row set {} has fraction {}",
                f + 1,
                format_rational(alpha)
            ));
        }
        if set.len() != l {
            problems.push(format!(
                "row set {} uses {} cs-matrices, not {l}",
                f + 1,
                set.len()
            ));
        }
        if let Some(bad) = set.iter().find(|i| !usable.contains(i)) {
            problems.push(format!(
                "row set {} uses cs-matrix {bad} of an unavailable machine",
                f + 1
            ));
        }
    }
    for (n, q) in storage.iter() {
        let mut realized = Rational::zero();
        for (alpha, set) in plan.alphas.iter().zip(&plan.sets) {
            let hits = q.iter().filter(|i| set.contains(i)).count();
            realized += alpha * Rational::from_integer(hits as i128);
        }
        if realized != loads.get(n) {
            problems.push(format!(
                "machine {n} computes {} but load is {}",
                format_rational(&realized),
                format_rational(&loads.get(n))
            ));
        }
    }
    problems
}
