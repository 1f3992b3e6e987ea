//! Turning loads into row sets.
//!
//! A plan is a list of row-set fractions `α_f` (summing to 1) and, for each,
//! the `L` cs-matrices whose owners compute those rows. [`fill`] builds the
//! plan directly when every machine holds one cs-matrix; [`fill_heterogeneous`]
//! first lets each machine compute `⌊μ[n]⌋` of its cs-matrices in full and
//! fills only the fractional remainders.
//!
//! A `(μ, L)` plan exists iff `μ[n] ≤ Σμ / L` for every `n`.

use std::collections::BTreeSet;

use num_traits::{One, Zero};
use thiserror::Error;

use crate::model::{CsIndex, LoadVector, MachineId, StorageMap};
use crate::rational::{format_rational, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AssignmentError {
    #[error("no plan exists: machine {machine} needs {load} > Σμ/L = {bound}")]
    Infeasible {
        machine: MachineId,
        load: String,
        bound: String,
    },
    #[error("loads sum to {total}, expected L = {l}")]
    MassMismatch { total: String, l: usize },
    #[error("negative load on machine {0}")]
    NegativeLoad(MachineId),
    #[error("machine {machine} load {load} exceeds its storage {capacity}")]
    OverCapacity {
        machine: MachineId,
        load: String,
        capacity: usize,
    },
    #[error("load vector covers {loads} machines, storage map {map}")]
    ShapeMismatch { loads: usize, map: usize },
    #[error("internal: {remaining} machines left with load but L = {l}")]
    Stalled { remaining: usize, l: usize },
    #[error("internal: row set {0} got a non-positive fraction")]
    EmptyRowSet(usize),
    #[error("internal: row set {f} has {size} cs-matrices, expected {l}")]
    WrongWidth { f: usize, size: usize, l: usize },
}

/// `F` row sets: fraction `alphas[f]` of the rows goes to the cs-matrices in
/// `sets[f]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AssignmentPlan {
    pub alphas: Vec<Rational>,
    pub sets: Vec<BTreeSet<CsIndex>>,
}

impl AssignmentPlan {
    pub fn row_set_count(&self) -> usize {
        self.alphas.len()
    }

    /// Rewrites every set through `map` (machine id → cs-matrix index).
    pub fn map_indices(&self, map: impl Fn(usize) -> CsIndex) -> Self {
        Self {
            alphas: self.alphas.clone(),
            sets: self
                .sets
                .iter()
                .map(|s| s.iter().map(|&i| map(i)).collect())
                .collect(),
        }
    }

    /// Load each machine ends up with: `Σ_f α_f · |P_f ∩ Q_n|`.
    pub fn realized_loads(&self, storage: &StorageMap) -> LoadVector {
        let mut out = LoadVector::zeros(storage.machines());
        for (alpha, set) in self.alphas.iter().zip(&self.sets) {
            for &cs in set {
                if let Some(n) = storage.owner_of(cs) {
                    out.set(n, out.get(n) + alpha);
                }
            }
        }
        out
    }
}

/// Snapshot of the remaining loads at the start of a fill iteration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FillState {
    pub remaining: Vec<Rational>,
    pub remaining_total: Rational,
    pub iteration: usize,
}

/// `μ[n] ≤ (Σμ)/L` for all `n`.
pub fn check_feasible(loads: &LoadVector, l: usize) -> bool {
    first_infeasible(loads.as_slice(), l).is_none()
}

fn first_infeasible(loads: &[Rational], l: usize) -> Option<(usize, Rational)> {
    let bound = crate::rational::sum(loads) / Rational::from_integer(l as i128);
    loads.iter().position(|m| *m > bound).map(|i| (i, bound))
}

/// Fills unit mass into row sets of `l` machines realizing `loads` exactly.
///
/// Sets in the returned plan hold machine ids; with one cs-matrix per machine
/// they double as cs-matrix indices.
pub fn fill(loads: &LoadVector, l: usize) -> Result<AssignmentPlan, AssignmentError> {
    fill_traced(loads, l).map(|(plan, _)| plan)
}

/// [`fill`], also returning the state at every iteration boundary
/// (including the final all-zero state).
pub fn fill_traced(
    loads: &LoadVector,
    l: usize,
) -> Result<(AssignmentPlan, Vec<FillState>), AssignmentError> {
    let mu = loads.as_slice();
    if let Some(i) = mu.iter().position(|m| *m < Rational::zero()) {
        return Err(AssignmentError::NegativeLoad(i + 1));
    }
    let total = loads.total();
    if total != Rational::from_integer(l as i128) {
        return Err(AssignmentError::MassMismatch {
            total: format_rational(&total),
            l,
        });
    }
    if let Some((i, bound)) = first_infeasible(mu, l) {
        return Err(AssignmentError::Infeasible {
            machine: i + 1,
            load: format_rational(&mu[i]),
            bound: format_rational(&bound),
        });
    }

    let width = Rational::from_integer(l as i128);
    let mut m = mu.to_vec();
    let mut plan = AssignmentPlan {
        alphas: Vec::new(),
        sets: Vec::new(),
    };
    let mut trace = Vec::new();
    loop {
        let remaining_total = crate::rational::sum(&m);
        trace.push(FillState {
            remaining: m.clone(),
            remaining_total,
            iteration: plan.alphas.len(),
        });
        // Nonzero entries, ascending by load then by machine index.
        let mut order: Vec<usize> = (0..m.len()).filter(|&i| !m[i].is_zero()).collect();
        if order.is_empty() {
            break;
        }
        order.sort_by(|&a, &b| m[a].cmp(&m[b]).then(a.cmp(&b)));
        let live = order.len();
        if live < l {
            return Err(AssignmentError::Stalled { remaining: live, l });
        }
        // Smallest remaining load plus the L−1 largest.
        let mut members = Vec::with_capacity(l);
        members.push(order[0]);
        members.extend_from_slice(&order[live - l + 1..]);

        let smallest = m[order[0]];
        let alpha = if live > l {
            let cap = remaining_total / width - m[order[live - l]];
            cap.min(smallest)
        } else {
            smallest
        };
        if alpha <= Rational::zero() {
            return Err(AssignmentError::EmptyRowSet(plan.alphas.len() + 1));
        }
        for &i in &members {
            m[i] -= alpha;
        }
        plan.alphas.push(alpha);
        plan.sets.push(members.iter().map(|&i| i + 1).collect());
    }
    Ok((plan, trace))
}

/// Which cs-matrices each machine computes fully and which one partially.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartialComputePlan {
    /// `Q̃_n`: the `⌊μ[n]⌋` cs-matrices machine `n` computes entirely.
    pub full: Vec<BTreeSet<CsIndex>>,
    /// `θ̂[n]`: the cs-matrix computed in part, absent when `μ[n]` is integral.
    pub partial: Vec<Option<CsIndex>>,
    /// `μ̂[n] = μ[n] − ⌊μ[n]⌋`.
    pub fractional: LoadVector,
    /// `L̂ = Σ μ̂`.
    pub fractional_total: Rational,
}

/// Lowest-index-first choice of fully and partially computed cs-matrices.
pub fn plan_partials(
    loads: &LoadVector,
    storage: &StorageMap,
) -> Result<PartialComputePlan, AssignmentError> {
    if loads.len() != storage.machines() {
        return Err(AssignmentError::ShapeMismatch {
            loads: loads.len(),
            map: storage.machines(),
        });
    }
    let mut full = Vec::with_capacity(loads.len());
    let mut partial = Vec::with_capacity(loads.len());
    let mut fractional = LoadVector::zeros(loads.len());
    for (n, q) in storage.iter() {
        let mu = loads.get(n);
        if mu < Rational::zero() {
            return Err(AssignmentError::NegativeLoad(n));
        }
        if mu > Rational::from_integer(q.len() as i128) {
            return Err(AssignmentError::OverCapacity {
                machine: n,
                load: format_rational(&mu),
                capacity: q.len(),
            });
        }
        let whole = mu.floor();
        let frac = mu - whole;
        let whole = whole.to_integer() as usize;
        full.push(q.iter().copied().take(whole).collect());
        partial.push(if frac.is_zero() {
            None
        } else {
            q.iter().copied().nth(whole)
        });
        fractional.set(n, frac);
    }
    let fractional_total = fractional.total();
    Ok(PartialComputePlan {
        full,
        partial,
        fractional,
        fractional_total,
    })
}

/// Plan for machines holding any number of cs-matrices.
pub fn fill_heterogeneous(
    loads: &LoadVector,
    storage: &StorageMap,
    l: usize,
) -> Result<AssignmentPlan, AssignmentError> {
    let total = loads.total();
    if total != Rational::from_integer(l as i128) {
        return Err(AssignmentError::MassMismatch {
            total: format_rational(&total),
            l,
        });
    }
    let partials = plan_partials(loads, storage)?;
    let always: BTreeSet<CsIndex> = partials.full.iter().flatten().copied().collect();

    // L̂ is an integer: Σμ = L and every ⌊μ[n]⌋ is.
    debug_assert!(partials.fractional_total.is_integer());
    let inner_width = partials.fractional_total.to_integer() as usize;
    let plan = if inner_width == 0 {
        AssignmentPlan {
            alphas: vec![Rational::one()],
            sets: vec![always.clone()],
        }
    } else {
        let inner = fill(&partials.fractional, inner_width)?;
        let sets = inner
            .sets
            .iter()
            .map(|machines| {
                machines
                    .iter()
                    .map(|&n| {
                        partials.partial[n - 1].expect("filled machine has a partial cs-matrix")
                    })
                    .chain(always.iter().copied())
                    .collect()
            })
            .collect();
        AssignmentPlan {
            alphas: inner.alphas,
            sets,
        }
    };
    for (f, set) in plan.sets.iter().enumerate() {
        if set.len() != l {
            return Err(AssignmentError::WrongWidth {
                f: f + 1,
                size: set.len(),
                l,
            });
        }
    }
    Ok(plan)
}
