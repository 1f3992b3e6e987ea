//! Time-step execution of coded matrix–vector products.
//!
//! Every step is planned from scratch for its availability set: optimal
//! loads, then a row-set plan, then concrete row ranges. Workers compute
//! their coded rows, the master decodes each row from the `L` results it
//! receives and the assembled `y` is checked against a direct `X·w`.
//!
//! Time is reported analytically as `μ[n]/s[n]`, not wall clock.

use std::collections::BTreeSet;
use std::ops::Range;

use num_traits::Zero;
use thiserror::Error;

use crate::assignment::{fill, fill_heterogeneous, AssignmentError, AssignmentPlan};
use crate::codec::{
    build_generator, encode, worker_compute, CodecError, CsMatrix, Generator, SubsetDecoder,
};
use crate::field::FieldMatrix;
use crate::model::{AvailabilitySet, CsIndex, LoadVector, MachineId, Scenario, StorageMap};
use crate::optimizer::{machine_times, solve_load, OptimizerError};
use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SimError {
    #[error(transparent)]
    Optimizer(#[from] OptimizerError),
    #[error(transparent)]
    Assignment(#[from] AssignmentError),
    #[error(transparent)]
    Codec(#[from] CodecError),
    #[error("{vectors} input vectors for {steps} time steps")]
    VectorCount { vectors: usize, steps: usize },
    #[error("X is {rows}x{cols}, scenario expects {want_rows}x{want_cols}")]
    MatrixShape {
        rows: usize,
        cols: usize,
        want_rows: usize,
        want_cols: usize,
    },
}

/// Consecutive row ranges over `[0, q/L)`; row set `f` is
/// `boundaries[f]..boundaries[f + 1]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RowMaterialization {
    pub boundaries: Vec<usize>,
    /// Whether every `α_f·q/L` was already an integer.
    pub exact: bool,
}

impl RowMaterialization {
    pub fn range(&self, f: usize) -> Range<usize> {
        self.boundaries[f]..self.boundaries[f + 1]
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.boundaries.windows(2).map(|w| w[1] - w[0]).collect()
    }
}

/// Splits `q/L` rows in proportion to the plan's fractions.
///
/// Non-integral targets are rounded by largest remainder, ties going to the
/// earlier row set.
pub fn materialize(plan: &AssignmentPlan, rows: usize, l: usize) -> RowMaterialization {
    let total = rows / l;
    let total_r = Rational::from_integer(total as i128);
    let targets: Vec<Rational> = plan.alphas.iter().map(|a| a * total_r).collect();
    let mut sizes: Vec<usize> = targets
        .iter()
        .map(|t| t.floor().to_integer() as usize)
        .collect();
    let exact = targets.iter().all(Rational::is_integer);
    let assigned: usize = sizes.iter().sum();
    let mut leftover = total.saturating_sub(assigned);
    if leftover > 0 {
        let mut by_remainder: Vec<usize> = (0..targets.len()).collect();
        by_remainder.sort_by(|&a, &b| {
            let ra = targets[a] - targets[a].floor();
            let rb = targets[b] - targets[b].floor();
            rb.cmp(&ra).then(a.cmp(&b))
        });
        for f in by_remainder {
            if leftover == 0 {
                break;
            }
            sizes[f] += 1;
            leftover -= 1;
        }
    }
    let mut boundaries = Vec::with_capacity(sizes.len() + 1);
    boundaries.push(0);
    for s in sizes {
        boundaries.push(boundaries.last().unwrap() + s);
    }
    RowMaterialization { boundaries, exact }
}

/// The encoded data, placed once and reused across elastic events.
#[derive(Debug, Clone)]
pub struct CodedStore {
    pub generator: Generator,
    pub cs_matrices: Vec<CsMatrix>,
    pub storage_map: StorageMap,
    data: FieldMatrix,
}

impl CodedStore {
    /// Reduces `x` into the field and encodes it for the scenario's storage map.
    pub fn build(sc: &Scenario, x: &FieldMatrix, prime: u64) -> Result<Self, SimError> {
        if x.rows() != sc.rows || x.cols() != sc.cols {
            return Err(SimError::MatrixShape {
                rows: x.rows(),
                cols: x.cols(),
                want_rows: sc.rows,
                want_cols: sc.cols,
            });
        }
        let generator = build_generator(sc.total_cs, sc.recovery_threshold, prime)?;
        let field = *generator.field();
        let mut data = x.clone();
        for r in 0..data.rows() {
            for v in data.row_mut(r) {
                *v = field.reduce(*v);
            }
        }
        let cs_matrices = encode(&data, &generator)?;
        Ok(Self {
            generator,
            cs_matrices,
            storage_map: sc.storage_map.clone(),
            data,
        })
    }

    pub fn data(&self) -> &FieldMatrix {
        &self.data
    }

    pub fn cs(&self, index: CsIndex) -> &CsMatrix {
        &self.cs_matrices[index - 1]
    }

    /// `X·w` computed directly, the reference the decoded output is checked against.
    pub fn direct_product(&self, w: &[u64]) -> Result<Vec<u64>, SimError> {
        Ok(self
            .data
            .mul_vec(self.generator.field(), w)
            .map_err(CodecError::from)?)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct StepOptions {
    /// Corrupt one partial result before decoding.
    pub fault_inject: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StepReport {
    pub t: usize,
    pub loads: LoadVector,
    pub time: Rational,
    pub k_star: usize,
    pub plan: AssignmentPlan,
    pub rows: RowMaterialization,
    /// `μ[n]/s[n]` per machine, zero for unavailable machines.
    pub machine_times: Vec<Rational>,
    /// Coded rows each machine actually computed.
    pub machine_rows: Vec<usize>,
    pub output: Vec<u64>,
    pub decode_ok: bool,
}

impl StepReport {
    pub fn row_set_count(&self) -> usize {
        self.plan.row_set_count()
    }

    pub fn rows_per_set(&self) -> Vec<usize> {
        self.rows.sizes()
    }
}

/// Optimal plan for one availability set, without touching any data.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StepPlan {
    pub t: usize,
    pub loads: LoadVector,
    pub time: Rational,
    pub k_star: usize,
    pub plan: AssignmentPlan,
    pub rows: RowMaterialization,
    pub machine_times: Vec<Rational>,
}

/// Loads, row-set plan and row ranges for one step.
///
/// Unit-storage steps go through [`fill`] directly; otherwise
/// [`fill_heterogeneous`] splits off the fully computed cs-matrices first.
pub fn plan_step(sc: &Scenario, avail: &AvailabilitySet) -> Result<StepPlan, SimError> {
    let solution = solve_load(sc, avail)?;
    let l = sc.recovery_threshold;
    let unit = avail.available.iter().all(|&n| sc.capacity(n) == 1);
    let plan = if unit {
        fill(&solution.loads, l)?.map_indices(|n: MachineId| {
            *sc.storage_map
                .stored_by(n)
                .iter()
                .next()
                .expect("unit-storage machine holds one cs-matrix")
        })
    } else {
        fill_heterogeneous(&solution.loads, &sc.storage_map, l)?
    };
    let rows = materialize(&plan, sc.rows, l);
    Ok(StepPlan {
        t: avail.t,
        machine_times: machine_times(&solution.loads, &sc.speeds, avail),
        loads: solution.loads,
        time: solution.time,
        k_star: solution.k_star,
        plan,
        rows,
    })
}

pub fn run_step(
    sc: &Scenario,
    store: &CodedStore,
    avail: &AvailabilitySet,
    w: &[u64],
    opts: StepOptions,
) -> Result<StepReport, SimError> {
    let step = plan_step(sc, avail)?;
    let field = *store.generator.field();
    let l = sc.recovery_threshold;
    let block = sc.block_rows();
    let mut output = vec![0u64; sc.rows];
    let mut machine_rows = vec![0usize; sc.machines()];
    let mut corrupted = !opts.fault_inject;
    let mut computed: BTreeSet<(CsIndex, usize)> = BTreeSet::new();

    for (f, set) in step.plan.sets.iter().enumerate() {
        let range = step.rows.range(f);
        if range.is_empty() {
            continue;
        }
        let decoder = SubsetDecoder::new(&store.generator, set)?;
        // coded[k][j]: result of the k-th cs-matrix of the set for row j of the range.
        let mut coded: Vec<Vec<u64>> = Vec::with_capacity(l);
        for &cs in decoder.subset() {
            let results = worker_compute(store.cs(cs), range.clone(), w, &field)?;
            if let Some(owner) = store.storage_map.owner_of(cs) {
                machine_rows[owner - 1] += results.len();
            }
            for r in &results {
                let fresh = computed.insert((cs, r.row));
                debug_assert!(fresh, "cs-matrix {cs} row {} computed twice", r.row);
            }
            coded.push(results.into_iter().map(|r| r.value).collect());
        }
        if !corrupted {
            coded[0][0] = field.add(coded[0][0], 1);
            corrupted = true;
        }
        for (offset, j) in range.enumerate() {
            let column: Vec<u64> = coded.iter().map(|c| c[offset]).collect();
            let blocks = decoder.decode(&column)?;
            for (ell, v) in blocks.into_iter().enumerate() {
                output[ell * block + j] = v;
            }
        }
    }

    let decode_ok = output == store.direct_product(w)?;
    Ok(StepReport {
        t: step.t,
        loads: step.loads,
        time: step.time,
        k_star: step.k_star,
        plan: step.plan,
        rows: step.rows,
        machine_times: step.machine_times,
        machine_rows,
        output,
        decode_ok,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StepOutcome {
    Completed(Box<StepReport>),
    /// The available machines hold fewer than `L` cs-matrices.
    Infeasible {
        t: usize,
        available: usize,
        required: usize,
    },
}

impl StepOutcome {
    pub fn report(&self) -> Option<&StepReport> {
        match self {
            StepOutcome::Completed(r) => Some(r.as_ref()),
            StepOutcome::Infeasible { .. } => None,
        }
    }
}

/// Encodes `x` once and runs every event of the scenario's timeline.
pub fn run_timeline(
    sc: &Scenario,
    x: &FieldMatrix,
    ws: &[Vec<u64>],
    prime: u64,
    opts: StepOptions,
) -> Result<Vec<StepOutcome>, SimError> {
    if ws.len() != sc.events.len() {
        return Err(SimError::VectorCount {
            vectors: ws.len(),
            steps: sc.events.len(),
        });
    }
    let store = CodedStore::build(sc, x, prime)?;
    sc.events
        .iter()
        .zip(ws)
        .map(|(avail, w)| match run_step(sc, &store, avail, w, opts) {
            Ok(report) => Ok(StepOutcome::Completed(Box::new(report))),
            Err(SimError::Optimizer(OptimizerError::Infeasible {
                available,
                required,
            })) => Ok(StepOutcome::Infeasible {
                t: avail.t,
                available,
                required,
            }),
            Err(e) => Err(e),
        })
        .collect()
}

/// Total coded rows computed in a step.
pub fn total_work(report: &StepReport) -> usize {
    report.machine_rows.iter().sum()
}

/// Loads implied by the rows actually computed, `rows / (q/L)`.
pub fn realized_row_loads(report: &StepReport, block_rows: usize) -> LoadVector {
    LoadVector(
        report
            .machine_rows
            .iter()
            .map(|&r| {
                if block_rows == 0 {
                    Rational::zero()
                } else {
                    Rational::new(r as i128, block_rows as i128)
                }
            })
            .collect(),
    )
}
