//! Optimal computation loads.
//!
//! Given the available machines, find the load vector `μ` that minimizes the
//! overall computation time `max_n μ[n]/s[n]` subject to `Σμ = L` and
//! `0 ≤ μ[n] ≤ σ[n]`. The minimizer has a water-filling shape: sort machines
//! by storage-to-speed ratio (SCR) `σ[n]/s[n]`, largest first. The first `k*`
//! machines all finish at the common level `ĉ*` (`μ[n] = ĉ*·s[n]`); the rest
//! are storage-limited and compute everything they hold (`μ[n] = σ[n]`),
//! finishing strictly earlier.
//!
//! `k*` is found by walking down from `k = N_t`: the candidate level is
//! `ĉ_k = (L − Σ_{n>k} σ[n]) / Σ_{n≤k} s[n]`, accepted at the first `k` with
//! `ĉ_k ≤ σ[k]/s[k]`.

use std::cmp::Ordering;

use num_traits::{One, Zero};
use thiserror::Error;

use crate::model::{AvailabilitySet, LoadVector, MachineId, Scenario};
use crate::rational::{sum, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OptimizerError {
    #[error("no machines are available")]
    EmptyAvailability,
    #[error("machine {0} is not part of the scenario")]
    UnknownMachine(MachineId),
    #[error("infeasible: available machines hold {available} cs-matrices, need L = {required}")]
    Infeasible { available: usize, required: usize },
    #[error("homogeneous solver needs σ[n] = 1, machine {0} stores more")]
    NotHomogeneous(MachineId),
    #[error("internal: no k satisfies the level bounds")]
    NoLevel,
}

/// Available machines sorted by non-increasing SCR, ties by ascending id.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrderedMachines {
    pub order: Vec<MachineId>,
    pub scr: Vec<Rational>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OptimizerSolution {
    pub loads: LoadVector,
    /// `ĉ*`, the overall computation time of `loads`.
    pub time: Rational,
    /// Number of time-limited machines, counted in SCR order.
    pub k_star: usize,
    pub order: Vec<MachineId>,
}

fn check_availability(sc: &Scenario, avail: &AvailabilitySet) -> Result<(), OptimizerError> {
    if avail.is_empty() {
        return Err(OptimizerError::EmptyAvailability);
    }
    if let Some(&bad) = avail
        .available
        .iter()
        .find(|&&n| n == 0 || n > sc.machines())
    {
        return Err(OptimizerError::UnknownMachine(bad));
    }
    Ok(())
}

pub fn order_by_scr(
    sc: &Scenario,
    avail: &AvailabilitySet,
) -> Result<OrderedMachines, OptimizerError> {
    check_availability(sc, avail)?;
    let mut keyed: Vec<(MachineId, Rational)> = avail
        .available
        .iter()
        .map(|&n| {
            (
                n,
                Rational::from_integer(sc.capacity(n) as i128) / sc.speed(n),
            )
        })
        .collect();
    keyed.sort_by(|(ia, ra), (ib, rb)| match rb.cmp(ra) {
        Ordering::Equal => ia.cmp(ib),
        other => other,
    });
    let (order, scr) = keyed.into_iter().unzip();
    Ok(OrderedMachines { order, scr })
}

/// Level `ĉ_k` when the first `k` machines (in the given order) are
/// time-limited and the remainder run at full storage.
fn level(k: usize, speeds: &[Rational], capacity: &[Rational], l: Rational) -> Rational {
    let tail = sum(&capacity[k..]);
    let head = sum(&speeds[..k]);
    (l - tail) / head
}

/// Descending search for `k*` over machines already sorted by SCR.
fn search_level(
    speeds: &[Rational],
    capacity: &[Rational],
    l: Rational,
) -> Result<(usize, Rational), OptimizerError> {
    let n = speeds.len();
    for k in (1..=n).rev() {
        let c = level(k, speeds, capacity, l);
        let upper = capacity[k - 1] / speeds[k - 1];
        if c > upper {
            continue;
        }
        if k < n && capacity[k] / speeds[k] >= c {
            // Cannot happen when the previous step's upper bound failed.
            return Err(OptimizerError::NoLevel);
        }
        return Ok((k, c));
    }
    Err(OptimizerError::NoLevel)
}

pub fn solve_load(
    sc: &Scenario,
    avail: &AvailabilitySet,
) -> Result<OptimizerSolution, OptimizerError> {
    let ordered = order_by_scr(sc, avail)?;
    let l = sc.recovery_threshold;
    let z_t = sc.available_storage(avail);
    if z_t < l {
        return Err(OptimizerError::Infeasible {
            available: z_t,
            required: l,
        });
    }
    let speeds: Vec<Rational> = ordered.order.iter().map(|&n| sc.speed(n)).collect();
    let capacity: Vec<Rational> = ordered
        .order
        .iter()
        .map(|&n| Rational::from_integer(sc.capacity(n) as i128))
        .collect();
    let (k_star, c) = search_level(&speeds, &capacity, Rational::from_integer(l as i128))?;

    let mut loads = LoadVector::zeros(sc.machines());
    if z_t == l {
        // Every stored cs-matrix is needed in full.
        for &n in &ordered.order {
            loads.set(n, Rational::from_integer(sc.capacity(n) as i128));
        }
    } else {
        for (pos, &n) in ordered.order.iter().enumerate() {
            let mu = if pos < k_star {
                c * speeds[pos]
            } else {
                capacity[pos]
            };
            loads.set(n, mu);
        }
    }
    let time = overall_time(&loads, &sc.speeds, avail);
    debug_assert_eq!(time, c);
    Ok(OptimizerSolution {
        loads,
        time,
        k_star,
        order: ordered.order,
    })
}

/// Unit-storage special case: machines sorted by ascending speed and the
/// level is `ĉ_k = (L − N_t + k) / Σ_{n≤k} s[n]`.
///
/// Kept as an independent route for cross-checking [`solve_load`].
pub fn solve_load_homogeneous(
    speeds: &[Rational],
    l: usize,
    avail: &AvailabilitySet,
) -> Result<OptimizerSolution, OptimizerError> {
    if avail.is_empty() {
        return Err(OptimizerError::EmptyAvailability);
    }
    if let Some(&bad) = avail
        .available
        .iter()
        .find(|&&n| n == 0 || n > speeds.len())
    {
        return Err(OptimizerError::UnknownMachine(bad));
    }
    let n_t = avail.len();
    if n_t < l {
        return Err(OptimizerError::Infeasible {
            available: n_t,
            required: l,
        });
    }
    let mut order: Vec<MachineId> = avail.available.iter().copied().collect();
    order.sort_by(|&a, &b| speeds[a - 1].cmp(&speeds[b - 1]).then(a.cmp(&b)));

    let mut found = None;
    for k in (1..=n_t).rev() {
        let head: Rational = order[..k].iter().map(|&n| speeds[n - 1]).sum();
        let c = Rational::from_integer((l + k) as i128 - n_t as i128) / head;
        if c <= Rational::one() / speeds[order[k - 1] - 1] {
            found = Some((k, c));
            break;
        }
    }
    let (k_star, c) = found.ok_or(OptimizerError::NoLevel)?;
    let mut loads = LoadVector::zeros(speeds.len());
    for (pos, &n) in order.iter().enumerate() {
        let mu = if pos < k_star {
            c * speeds[n - 1]
        } else {
            Rational::one()
        };
        loads.set(n, mu);
    }
    Ok(OptimizerSolution {
        time: overall_time(&loads, speeds, avail),
        loads,
        k_star,
        order,
    })
}

/// `c(μ) = max_{n ∈ N_t} μ[n]/s[n]`; zero when nothing is available.
pub fn overall_time(loads: &LoadVector, speeds: &[Rational], avail: &AvailabilitySet) -> Rational {
    avail
        .available
        .iter()
        .map(|&n| loads.get(n) / speeds[n - 1])
        .max()
        .unwrap_or_else(Rational::zero)
}

/// Per-machine time `μ[n]/s[n]` over every machine; zero for unavailable ones.
pub fn machine_times(
    loads: &LoadVector,
    speeds: &[Rational],
    avail: &AvailabilitySet,
) -> Vec<Rational> {
    (1..=speeds.len())
        .map(|n| {
            if avail.contains(n) {
                loads.get(n) / speeds[n - 1]
            } else {
                Rational::zero()
            }
        })
        .collect()
}

impl Scenario {
    pub fn solve_load(&self, avail: &AvailabilitySet) -> Result<OptimizerSolution, OptimizerError> {
        solve_load(self, avail)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{frac, int};

    fn rats(v: &[(i128, i128)]) -> Vec<Rational> {
        v.iter().map(|&(n, d)| frac(n, d)).collect()
    }

    fn ints(v: &[i128]) -> Vec<Rational> {
        v.iter().map(|&x| int(x)).collect()
    }

    fn speed_only() -> Scenario {
        Scenario::new(ints(&[2, 2, 3, 3, 4, 4]), vec![1; 6], 3, 3, 1)
    }

    fn mixed_storage() -> Scenario {
        Scenario::new(ints(&[2, 3, 4, 2, 3, 4]), vec![2, 2, 2, 1, 1, 1], 6, 6, 1)
    }

    #[test]
    fn scr_order_mixed_storage() {
        let sc = mixed_storage();
        let o = order_by_scr(&sc, &AvailabilitySet::all(1, 6)).unwrap();
        assert_eq!(o.order, vec![1, 2, 3, 4, 5, 6]);
        assert_eq!(
            o.scr,
            rats(&[(1, 1), (2, 3), (1, 2), (1, 2), (1, 3), (1, 4)])
        );
    }

    #[test]
    fn scr_order_ties_and_swaps() {
        let sc = Scenario::new(ints(&[1, 1]), vec![1, 1], 1, 1, 1);
        assert_eq!(
            order_by_scr(&sc, &AvailabilitySet::all(1, 2))
                .unwrap()
                .order,
            vec![1, 2]
        );
        let sc = Scenario::new(ints(&[4, 1]), vec![1, 1], 1, 1, 1);
        assert_eq!(
            order_by_scr(&sc, &AvailabilitySet::all(1, 2))
                .unwrap()
                .order,
            vec![2, 1]
        );
    }

    #[test]
    fn scr_order_rejects_empty() {
        let sc = speed_only();
        assert_eq!(
            order_by_scr(&sc, &AvailabilitySet::new(1, [])),
            Err(OptimizerError::EmptyAvailability)
        );
    }

    #[test]
    fn all_machines_up() {
        let sol = solve_load(&speed_only(), &AvailabilitySet::all(1, 6)).unwrap();
        assert_eq!(sol.k_star, 6);
        assert_eq!(sol.time, frac(1, 6));
        assert_eq!(
            sol.loads.0,
            rats(&[(1, 3), (1, 3), (1, 2), (1, 2), (2, 3), (2, 3)])
        );
    }

    #[test]
    fn storage_limited_fast_machine() {
        let sol = solve_load(&speed_only(), &AvailabilitySet::new(3, [1, 2, 3, 5])).unwrap();
        assert_eq!(sol.k_star, 3);
        assert_eq!(sol.time, frac(2, 7));
        assert_eq!(
            sol.loads.0,
            rats(&[(4, 7), (4, 7), (6, 7), (0, 1), (1, 1), (0, 1)])
        );
    }

    #[test]
    fn mixed_storage_level() {
        let sol = solve_load(&mixed_storage(), &AvailabilitySet::all(1, 6)).unwrap();
        assert_eq!(sol.k_star, 4);
        assert_eq!(sol.time, frac(4, 11));
        assert_eq!(
            sol.loads.0,
            rats(&[(8, 11), (12, 11), (16, 11), (8, 11), (1, 1), (1, 1)])
        );
    }

    #[test]
    fn exact_storage_uses_everything() {
        let sc = Scenario::new(ints(&[1, 2, 5]), vec![1, 1, 1], 3, 3, 1);
        let sol = solve_load(&sc, &AvailabilitySet::all(1, 3)).unwrap();
        assert_eq!(sol.loads.0, ints(&[1, 1, 1]));
        assert_eq!(sol.time, int(1));
        // t = 4 of the speed-only timeline.
        let sol = solve_load(&speed_only(), &AvailabilitySet::new(4, [2, 3, 5])).unwrap();
        assert_eq!(sol.loads.0, ints(&[0, 1, 1, 0, 1, 0]));
        assert_eq!(sol.time, frac(1, 2));
        assert_eq!(sol.k_star, 1);
    }

    #[test]
    fn infeasible_when_storage_short() {
        let err = solve_load(&speed_only(), &AvailabilitySet::new(1, [1, 2])).unwrap_err();
        assert_eq!(
            err,
            OptimizerError::Infeasible {
                available: 2,
                required: 3
            }
        );
    }

    #[test]
    fn homogeneous_route() {
        let s = ints(&[2, 2, 3, 3, 4, 4]);
        let sol = solve_load_homogeneous(&s, 3, &AvailabilitySet::new(2, [1, 2, 3, 5, 6])).unwrap();
        assert_eq!(sol.time, frac(1, 5));
        assert_eq!(
            sol.loads.0,
            rats(&[(2, 5), (2, 5), (3, 5), (0, 1), (4, 5), (4, 5)])
        );

        let sol = solve_load_homogeneous(&s, 3, &AvailabilitySet::new(4, [2, 3, 5])).unwrap();
        assert_eq!(sol.loads.0, ints(&[0, 1, 1, 0, 1, 0]));

        let sol = solve_load_homogeneous(&ints(&[7]), 1, &AvailabilitySet::all(1, 1)).unwrap();
        assert_eq!(sol.loads.0, ints(&[1]));
        assert_eq!(sol.time, frac(1, 7));
    }

    #[test]
    fn overall_time_examples() {
        let avail = AvailabilitySet::all(1, 6);
        let mu = LoadVector(rats(&[(1, 3), (1, 3), (1, 2), (1, 2), (2, 3), (2, 3)]));
        assert_eq!(
            overall_time(&mu, &ints(&[2, 2, 3, 3, 4, 4]), &avail),
            frac(1, 6)
        );
        assert_eq!(
            overall_time(&LoadVector::zeros(6), &ints(&[2, 2, 3, 3, 4, 4]), &avail),
            int(0)
        );
        let mu = LoadVector(rats(&[(4, 7), (4, 7), (6, 7), (1, 1)]));
        assert_eq!(
            overall_time(&mu, &ints(&[2, 2, 3, 4]), &AvailabilitySet::all(3, 4)),
            frac(2, 7)
        );
    }
}
