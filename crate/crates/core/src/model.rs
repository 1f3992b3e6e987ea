//! Machines, storage placement and elastic timelines.
//!
//! Machine ids and cs-matrix indices are 1-based everywhere in the public
//! API. Per-machine vectors are stored 0-based, so machine `n` lives at
//! position `n - 1`.

use std::collections::BTreeSet;
use std::fmt;

use num_traits::{Signed, Zero};

use crate::rational::Rational;

/// 1-based machine index.
pub type MachineId = usize;
/// 1-based cs-matrix index in `[Z]`.
pub type CsIndex = usize;

/// The machines that are up during one time step.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AvailabilitySet {
    pub t: usize,
    pub available: BTreeSet<MachineId>,
}

impl AvailabilitySet {
    pub fn new(t: usize, available: impl IntoIterator<Item = MachineId>) -> Self {
        Self {
            t,
            available: available.into_iter().collect(),
        }
    }

    /// Every machine in `1..=n` available.
    pub fn all(t: usize, n: usize) -> Self {
        Self::new(t, 1..=n)
    }

    pub fn len(&self) -> usize {
        self.available.len()
    }

    pub fn is_empty(&self) -> bool {
        self.available.is_empty()
    }

    pub fn contains(&self, id: MachineId) -> bool {
        self.available.contains(&id)
    }
}

/// Which cs-matrices each machine stores (`Q_n`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StorageMap {
    sets: Vec<BTreeSet<CsIndex>>,
}

impl StorageMap {
    pub fn from_sets(sets: Vec<BTreeSet<CsIndex>>) -> Self {
        Self { sets }
    }

    /// Contiguous placement in machine order: `Q_1 = {1..σ[1]}`,
    /// `Q_2 = {σ[1]+1 .. σ[1]+σ[2]}`, and so on.
    pub fn contiguous(storage: &[u32]) -> Self {
        let mut next = 1;
        let sets = storage
            .iter()
            .map(|&count| {
                let set: BTreeSet<CsIndex> = (next..next + count as usize).collect();
                next += count as usize;
                set
            })
            .collect();
        Self { sets }
    }

    pub fn machines(&self) -> usize {
        self.sets.len()
    }

    /// `Q_n` for the 1-based machine `n`.
    pub fn stored_by(&self, machine: MachineId) -> &BTreeSet<CsIndex> {
        &self.sets[machine - 1]
    }

    pub fn owner_of(&self, cs: CsIndex) -> Option<MachineId> {
        self.sets
            .iter()
            .position(|q| q.contains(&cs))
            .map(|i| i + 1)
    }

    pub fn total(&self) -> usize {
        self.sets.iter().map(BTreeSet::len).sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (MachineId, &BTreeSet<CsIndex>)> {
        self.sets.iter().enumerate().map(|(i, q)| (i + 1, q))
    }

    /// Checks `|Q_n| = σ[n]`, pairwise disjointness and `∪ Q_n = [Z]`.
    pub fn partition_violations(&self, storage: &[u32], z: usize) -> Vec<Violation> {
        let mut out = Vec::new();
        if self.sets.len() != storage.len() {
            out.push(Violation::StorageMapShape {
                machines: self.sets.len(),
                expected: storage.len(),
            });
            return out;
        }
        let mut seen = BTreeSet::new();
        for (machine, q) in self.iter() {
            if q.len() != storage[machine - 1] as usize {
                out.push(Violation::StorageMapSize {
                    machine,
                    stored: q.len(),
                    capacity: storage[machine - 1],
                });
            }
            for &i in q {
                if i == 0 || i > z {
                    out.push(Violation::CsIndexOutOfRange {
                        machine,
                        index: i,
                        z,
                    });
                } else if !seen.insert(i) {
                    out.push(Violation::StorageOverlap { index: i });
                }
            }
        }
        if let Some(missing) = (1..=z).find(|i| !seen.contains(i)) {
            out.push(Violation::StorageGap { index: missing });
        }
        out
    }
}

/// A full problem instance: machines, code parameters and the elastic timeline.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    /// Row multiplications per unit time, one per machine.
    pub speeds: Vec<Rational>,
    /// Number of cs-matrices each machine stores.
    pub storage: Vec<u32>,
    /// Recovery threshold `L`: number of uncoded blocks `X` is split into.
    pub recovery_threshold: usize,
    /// Rows of `X`.
    pub rows: usize,
    /// Columns of `X`.
    pub cols: usize,
    /// Declared total number of cs-matrices. Must equal `Σσ`.
    pub total_cs: usize,
    pub storage_map: StorageMap,
    pub events: Vec<AvailabilitySet>,
}

impl Scenario {
    /// Builds a scenario with `Z = Σσ`, the contiguous storage map and an
    /// empty timeline.
    pub fn new(
        speeds: Vec<Rational>,
        storage: Vec<u32>,
        recovery_threshold: usize,
        rows: usize,
        cols: usize,
    ) -> Self {
        let total_cs = storage.iter().map(|&s| s as usize).sum();
        let storage_map = StorageMap::contiguous(&storage);
        Self {
            speeds,
            storage,
            recovery_threshold,
            rows,
            cols,
            total_cs,
            storage_map,
            events: Vec::new(),
        }
    }

    pub fn with_events(mut self, events: Vec<AvailabilitySet>) -> Self {
        self.events = events;
        self
    }

    pub fn machines(&self) -> usize {
        self.speeds.len()
    }

    pub fn speed(&self, machine: MachineId) -> Rational {
        self.speeds[machine - 1]
    }

    pub fn capacity(&self, machine: MachineId) -> u32 {
        self.storage[machine - 1]
    }

    /// Rows per cs-matrix, `q / L`.
    pub fn block_rows(&self) -> usize {
        self.rows / self.recovery_threshold
    }

    /// `Z_t`: cs-matrices held by the available machines.
    pub fn available_storage(&self, avail: &AvailabilitySet) -> usize {
        avail
            .available
            .iter()
            .filter(|&&n| n >= 1 && n <= self.machines())
            .map(|&n| self.storage[n - 1] as usize)
            .sum()
    }
}

/// One broken invariant found by [`validate_scenario`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    NoMachines,
    LengthMismatch {
        speeds: usize,
        storage: usize,
    },
    NonPositiveSpeed {
        machine: MachineId,
    },
    ZeroStorage {
        machine: MachineId,
    },
    ZeroRecoveryThreshold,
    TotalStorageMismatch {
        declared: usize,
        actual: usize,
    },
    RowsNotDivisible {
        rows: usize,
        recovery_threshold: usize,
    },
    ZeroColumns,
    UnknownMachine {
        t: usize,
        machine: MachineId,
    },
    InsufficientStorage {
        t: usize,
        available: usize,
        required: usize,
    },
    StorageMapShape {
        machines: usize,
        expected: usize,
    },
    StorageMapSize {
        machine: MachineId,
        stored: usize,
        capacity: u32,
    },
    CsIndexOutOfRange {
        machine: MachineId,
        index: CsIndex,
        z: usize,
    },
    StorageOverlap {
        index: CsIndex,
    },
    StorageGap {
        index: CsIndex,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use Violation::*;
        match self {
            NoMachines => write!(f, "scenario has no machines"),
            LengthMismatch { speeds, storage } => {
                write!(f, "{speeds} speeds but {storage} storage entries")
            }
            NonPositiveSpeed { machine } => write!(f, "machine {machine}: speed must be > 0"),
            ZeroStorage { machine } => write!(f, "machine {machine}: storage must be >= 1"),
            ZeroRecoveryThreshold => write!(f, "L must be >= 1"),
            TotalStorageMismatch { declared, actual } => {
                write!(f, "Z ≠ Σσ: declared Z = {declared}, Σσ = {actual}")
            }
            RowsNotDivisible {
                rows,
                recovery_threshold,
            } => {
                write!(f, "q % L ≠ 0: q = {rows}, L = {recovery_threshold}")
            }
            ZeroColumns => write!(f, "r must be >= 1"),
            UnknownMachine { t, machine } => write!(f, "t = {t}: unknown machine {machine}"),
            InsufficientStorage {
                t,
                available,
                required,
            } => {
                write!(f, "Z_t < L at t = {t}: Z_t = {available}, L = {required}")
            }
            StorageMapShape { machines, expected } => {
                write!(
                    f,
                    "storage map covers {machines} machines, expected {expected}"
                )
            }
            StorageMapSize {
                machine,
                stored,
                capacity,
            } => {
                write!(f, "machine {machine}: |Q_n| = {stored} but σ = {capacity}")
            }
            CsIndexOutOfRange { machine, index, z } => {
                write!(f, "machine {machine}: cs-matrix {index} outside [1, {z}]")
            }
            StorageOverlap { index } => write!(f, "cs-matrix {index} stored by two machines"),
            StorageGap { index } => write!(f, "cs-matrix {index} stored by no machine"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

pub fn validate_scenario(sc: &Scenario) -> ValidationReport {
    let mut v = Vec::new();
    if sc.speeds.is_empty() {
        v.push(Violation::NoMachines);
    }
    if sc.speeds.len() != sc.storage.len() {
        v.push(Violation::LengthMismatch {
            speeds: sc.speeds.len(),
            storage: sc.storage.len(),
        });
        return ValidationReport { violations: v };
    }
    for (i, s) in sc.speeds.iter().enumerate() {
        if !s.is_positive() {
            v.push(Violation::NonPositiveSpeed { machine: i + 1 });
        }
    }
    for (i, &s) in sc.storage.iter().enumerate() {
        if s == 0 {
            v.push(Violation::ZeroStorage { machine: i + 1 });
        }
    }
    let actual: usize = sc.storage.iter().map(|&s| s as usize).sum();
    if sc.total_cs != actual {
        v.push(Violation::TotalStorageMismatch {
            declared: sc.total_cs,
            actual,
        });
    }
    if sc.recovery_threshold == 0 {
        v.push(Violation::ZeroRecoveryThreshold);
    } else if !sc.rows.is_multiple_of(sc.recovery_threshold) || sc.rows.is_zero() {
        v.push(Violation::RowsNotDivisible {
            rows: sc.rows,
            recovery_threshold: sc.recovery_threshold,
        });
    }
    if sc.cols == 0 {
        v.push(Violation::ZeroColumns);
    }
    for ev in &sc.events {
        for &m in &ev.available {
            if m == 0 || m > sc.machines() {
                v.push(Violation::UnknownMachine {
                    t: ev.t,
                    machine: m,
                });
            }
        }
        let available = sc.available_storage(ev);
        if available < sc.recovery_threshold {
            v.push(Violation::InsufficientStorage {
                t: ev.t,
                available,
                required: sc.recovery_threshold,
            });
        }
    }
    v.extend(sc.storage_map.partition_violations(&sc.storage, actual));
    ValidationReport { violations: v }
}

/// A per-machine load vector `μ`; unavailable machines carry zero.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LoadVector(pub Vec<Rational>);

impl LoadVector {
    pub fn zeros(n: usize) -> Self {
        Self(vec![Rational::zero(); n])
    }

    pub fn get(&self, machine: MachineId) -> Rational {
        self.0[machine - 1]
    }

    pub fn set(&mut self, machine: MachineId, value: Rational) {
        self.0[machine - 1] = value;
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn total(&self) -> Rational {
        crate::rational::sum(&self.0)
    }

    pub fn as_slice(&self) -> &[Rational] {
        &self.0
    }
}

impl From<Vec<Rational>> for LoadVector {
    fn from(v: Vec<Rational>) -> Self {
        Self(v)
    }
}
