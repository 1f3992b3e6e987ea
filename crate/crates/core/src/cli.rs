//! Scenario files, report files and the `plan` / `run` / `oracle` commands.
//!
//! Scenarios are TOML:
//!
//! ```toml
//! seed = 7
//!
//! [code]
//! L = 3
//! q = 105
//! r = 4
//! prime = 65537   # optional
//!
//! [[machines]]
//! id = 1
//! speed = "2"     # integer or "a/b"
//! storage = 1
//!
//! [[timeline]]
//! t = 1
//! available = [1, 2, 3]
//! ```
//!
//! Reports are JSON with every rational written as an `"a/b"` string.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::field::{FieldMatrix, PrimeField, DEFAULT_PRIME};
use crate::model::{validate_scenario, AvailabilitySet, Scenario, Violation};
use crate::optimizer::OptimizerError;
use crate::oracle::{lp_min_time, verify_loads, verify_plan};
use crate::rational::{self, Rational};
use crate::sim::{
    plan_step, run_timeline, RowMaterialization, SimError, StepOptions, StepOutcome, StepPlan,
};

/// Largest availability set the oracle accepts.
pub const ORACLE_MAX_MACHINES: usize = 6;
/// Largest speed denominator the oracle accepts.
pub const ORACLE_MAX_DENOMINATOR: i128 = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitStatus {
    Success = 0,
    Validation = 1,
    Infeasible = 2,
    Verification = 3,
}

impl ExitStatus {
    pub fn code(self) -> i32 {
        self as i32
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorKind {
    Io,
    Parse,
    Validation,
    Dimension,
    OracleLimit,
    Internal,
}

/// A failure before any report could be produced. Always exit code 1.
#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize)]
#[error("{message}")]
pub struct CliError {
    pub kind: ErrorKind,
    /// Dotted path of the offending key, e.g. `machines[2].speed`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub key: Option<String>,
    pub message: String,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub violations: Vec<String>,
}

impl CliError {
    fn new(kind: ErrorKind, key: Option<String>, message: impl Into<String>) -> Self {
        Self {
            kind,
            key,
            message: message.into(),
            violations: Vec::new(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("error serializes")
    }
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        CliError::new(ErrorKind::Internal, None, e.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MachineEntry {
    pub id: usize,
    #[serde(with = "rational::serde_str")]
    pub speed: Rational,
    pub storage: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CodeEntry {
    #[serde(rename = "L")]
    pub recovery_threshold: usize,
    pub q: usize,
    pub r: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prime: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimelineEntry {
    pub t: usize,
    pub available: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub code: CodeEntry,
    pub machines: Vec<MachineEntry>,
    pub timeline: Vec<TimelineEntry>,
}

/// A validated scenario plus the field it runs over.
#[derive(Debug, Clone)]
pub struct LoadedScenario {
    pub scenario: Scenario,
    pub prime: u64,
    pub seed: Option<u64>,
}

impl ScenarioFile {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        let de = toml::Deserializer::parse(text)
            .map_err(|e| CliError::new(ErrorKind::Parse, None, e.message().to_string()))?;
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let key = (path != ".").then_some(path);
            CliError::new(ErrorKind::Parse, key, e.inner().message().to_string())
        })
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            CliError::new(
                ErrorKind::Io,
                None,
                format!("cannot read {}: {e}", path.display()),
            )
        })?;
        Self::from_toml(&text)
    }

    /// Checks ids and every scenario invariant except per-step feasibility,
    /// which is reported per step instead.
    pub fn to_scenario(&self, prime_override: Option<u64>) -> Result<LoadedScenario, CliError> {
        let n = self.machines.len();
        if n == 0 {
            return Err(CliError::new(
                ErrorKind::Validation,
                Some("machines".into()),
                "no machines",
            ));
        }
        // id -> position in the file
        let mut position = BTreeMap::new();
        for (i, m) in self.machines.iter().enumerate() {
            if m.id == 0 || m.id > n {
                return Err(CliError::new(
                    ErrorKind::Validation,
                    Some(format!("machines[{i}].id")),
                    format!("machine id {} outside 1..={n}", m.id),
                ));
            }
            if position.insert(m.id, i).is_some() {
                return Err(CliError::new(
                    ErrorKind::Validation,
                    Some(format!("machines[{i}].id")),
                    format!("duplicate machine id {}", m.id),
                ));
            }
        }
        let ordered: Vec<&MachineEntry> = position.values().map(|&i| &self.machines[i]).collect();
        let events = self
            .timeline
            .iter()
            .map(|e| AvailabilitySet::new(e.t, e.available.iter().copied()))
            .collect();
        let scenario = Scenario::new(
            ordered.iter().map(|m| m.speed).collect(),
            ordered.iter().map(|m| m.storage).collect(),
            self.code.recovery_threshold,
            self.code.q,
            self.code.r,
        )
        .with_events(events);

        let violations: Vec<Violation> = validate_scenario(&scenario)
            .violations
            .into_iter()
            .filter(|v| !matches!(v, Violation::InsufficientStorage { .. }))
            .collect();
        if let Some(first) = violations.first() {
            let mut err = CliError::new(
                ErrorKind::Validation,
                Some(self.key_of(first, &position)),
                first.to_string(),
            );
            err.violations = violations.iter().map(Violation::to_string).collect();
            return Err(err);
        }

        let prime = prime_override.or(self.code.prime).unwrap_or(DEFAULT_PRIME);
        let prime_key = if prime_override.is_some() {
            "--prime"
        } else {
            "code.prime"
        };
        if let Err(e) = PrimeField::new(prime) {
            return Err(CliError::new(
                ErrorKind::Validation,
                Some(prime_key.into()),
                e.to_string(),
            ));
        }
        if prime <= scenario.total_cs as u64 {
            return Err(CliError::new(
                ErrorKind::Validation,
                Some(prime_key.into()),
                format!("prime {prime} must exceed Z = {}", scenario.total_cs),
            ));
        }
        Ok(LoadedScenario {
            scenario,
            prime,
            seed: self.seed,
        })
    }

    fn key_of(&self, v: &Violation, position: &BTreeMap<usize, usize>) -> String {
        let timeline_index = |t: usize| self.timeline.iter().position(|e| e.t == t).unwrap_or(0);
        match v {
            Violation::NonPositiveSpeed { machine } => {
                format!("machines[{}].speed", position[machine])
            }
            Violation::ZeroStorage { machine } => {
                format!("machines[{}].storage", position[machine])
            }
            Violation::ZeroRecoveryThreshold => "code.L".into(),
            Violation::RowsNotDivisible { .. } => "code.q".into(),
            Violation::ZeroColumns => "code.r".into(),
            Violation::UnknownMachine { t, .. } => {
                format!("timeline[{}].available", timeline_index(*t))
            }
            _ => "machines".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RowSetRecord {
    pub f: usize,
    #[serde(with = "rational::serde_str")]
    pub alpha: Rational,
    pub cs_indices: Vec<usize>,
    /// First row of the set, 1-based. An empty set has `row_start = row_end + 1`.
    pub row_start: usize,
    /// Last row of the set, 1-based, inclusive.
    pub row_end: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepStatus {
    Ok,
    Infeasible,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepRecord {
    pub t: usize,
    pub available: Vec<usize>,
    pub status: StepStatus,
    /// `Z_t`, cs-matrices held by the available machines.
    pub available_storage: usize,
    #[serde(with = "rational::serde_str_vec")]
    pub loads: Vec<Rational>,
    #[serde(with = "rational::serde_str_opt")]
    pub time: Option<Rational>,
    pub k_star: Option<usize>,
    pub row_sets: Vec<RowSetRecord>,
    /// False when some `α_f·q/L` had to be rounded.
    pub rows_exact: Option<bool>,
    #[serde(with = "rational::serde_str_vec")]
    pub machine_times: Vec<Rational>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub machine_rows: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub decode_ok: Option<bool>,
}

impl StepRecord {
    fn infeasible(sc: &Scenario, avail: &AvailabilitySet) -> Self {
        Self {
            t: avail.t,
            available: avail.available.iter().copied().collect(),
            status: StepStatus::Infeasible,
            available_storage: sc.available_storage(avail),
            loads: Vec::new(),
            time: None,
            k_star: None,
            row_sets: Vec::new(),
            rows_exact: None,
            machine_times: Vec::new(),
            machine_rows: None,
            decode_ok: None,
        }
    }

    fn planned(sc: &Scenario, avail: &AvailabilitySet, step: &StepPlan) -> Self {
        Self {
            t: avail.t,
            available: avail.available.iter().copied().collect(),
            status: StepStatus::Ok,
            available_storage: sc.available_storage(avail),
            loads: step.loads.0.clone(),
            time: Some(step.time),
            k_star: Some(step.k_star),
            row_sets: row_sets(&step.plan.alphas, &step.plan.sets, &step.rows),
            rows_exact: Some(step.rows.exact),
            machine_times: step.machine_times.clone(),
            machine_rows: None,
            decode_ok: None,
        }
    }
}

fn row_sets(
    alphas: &[Rational],
    sets: &[std::collections::BTreeSet<usize>],
    rows: &RowMaterialization,
) -> Vec<RowSetRecord> {
    alphas
        .iter()
        .zip(sets)
        .enumerate()
        .map(|(f, (alpha, set))| {
            let range = rows.range(f);
            RowSetRecord {
                f: f + 1,
                alpha: *alpha,
                cs_indices: set.iter().copied().collect(),
                row_start: range.start + 1,
                row_end: range.end,
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportFile {
    pub command: String,
    pub machines: usize,
    #[serde(rename = "L")]
    pub recovery_threshold: usize,
    pub q: usize,
    pub r: usize,
    #[serde(rename = "Z")]
    pub total_cs: usize,
    pub prime: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub steps: Vec<StepRecord>,
}

impl ReportFile {
    fn header(command: &str, loaded: &LoadedScenario, seed: Option<u64>) -> Self {
        let sc = &loaded.scenario;
        Self {
            command: command.into(),
            machines: sc.machines(),
            recovery_threshold: sc.recovery_threshold,
            q: sc.rows,
            r: sc.cols,
            total_cs: sc.total_cs,
            prime: loaded.prime,
            seed,
            steps: Vec::new(),
        }
    }

    pub fn status(&self) -> ExitStatus {
        if self.steps.iter().any(|s| s.decode_ok == Some(false)) {
            ExitStatus::Verification
        } else if self
            .steps
            .iter()
            .any(|s| s.status == StepStatus::Infeasible)
        {
            ExitStatus::Infeasible
        } else {
            ExitStatus::Success
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    /// One line per row set: `step,f,alpha,row_start,row_end,cs_indices`.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["step", "f", "alpha", "row_start", "row_end", "cs_indices"])
            .expect("in-memory write");
        for step in &self.steps {
            for set in &step.row_sets {
                let cs: Vec<String> = set.cs_indices.iter().map(usize::to_string).collect();
                w.write_record([
                    step.t.to_string(),
                    set.f.to_string(),
                    rational::format_rational(&set.alpha),
                    set.row_start.to_string(),
                    set.row_end.to_string(),
                    cs.join(" "),
                ])
                .expect("in-memory write");
            }
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv is utf-8")
    }
}

/// Where `X` comes from for `run`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RunOptions {
    /// CSV file of integers, `q` rows by `r` columns, no header.
    pub matrix: Option<std::path::PathBuf>,
    /// Overrides the scenario's seed.
    pub seed: Option<u64>,
    pub prime: Option<u64>,
    pub fault_inject: bool,
}

pub fn cmd_plan(file: &ScenarioFile, prime: Option<u64>) -> Result<ReportFile, CliError> {
    let loaded = file.to_scenario(prime)?;
    let sc = &loaded.scenario;
    let mut report = ReportFile::header("plan", &loaded, None);
    for avail in &sc.events {
        let record = match plan_step(sc, avail) {
            Ok(step) => StepRecord::planned(sc, avail, &step),
            Err(SimError::Optimizer(OptimizerError::Infeasible { .. })) => {
                StepRecord::infeasible(sc, avail)
            }
            Err(e) => return Err(e.into()),
        };
        report.steps.push(record);
    }
    Ok(report)
}

/// Reads a `q × r` integer matrix from CSV and reduces it into the field.
pub fn read_matrix(
    path: &Path,
    rows: usize,
    cols: usize,
    field: &PrimeField,
) -> Result<FieldMatrix, CliError> {
    let dim = |msg: String| CliError::new(ErrorKind::Dimension, Some("--matrix".into()), msg);
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| {
            CliError::new(
                ErrorKind::Io,
                Some("--matrix".into()),
                format!("{}: {e}", path.display()),
            )
        })?;
    let mut data = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record
            .map_err(|e| CliError::new(ErrorKind::Parse, Some("--matrix".into()), e.to_string()))?;
        if record.len() != cols {
            return Err(dim(format!(
                "row {} has {} columns, expected r = {cols}",
                i + 1,
                record.len()
            )));
        }
        let row = record
            .iter()
            .map(|v| {
                v.parse::<i64>()
                    .map(|x| field.reduce_signed(x))
                    .map_err(|_| {
                        CliError::new(
                            ErrorKind::Parse,
                            Some("--matrix".into()),
                            format!("row {}: {v:?} is not an integer", i + 1),
                        )
                    })
            })
            .collect::<Result<Vec<u64>, CliError>>()?;
        data.push(row);
    }
    if data.len() != rows {
        return Err(dim(format!("{} rows, expected q = {rows}", data.len())));
    }
    FieldMatrix::from_rows(data).map_err(|e| dim(e.to_string()))
}

fn random_vec(rng: &mut ChaCha8Rng, len: usize, p: u64) -> Vec<u64> {
    (0..len).map(|_| rng.random_range(0..p)).collect()
}

/// `X` (unless read from a file) then one `w` per step, all from one seeded stream.
pub fn seeded_inputs(
    sc: &Scenario,
    prime: u64,
    seed: u64,
    x_from_file: bool,
) -> (Option<FieldMatrix>, Vec<Vec<u64>>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x = (!x_from_file).then(|| {
        let rows = (0..sc.rows)
            .map(|_| random_vec(&mut rng, sc.cols, prime))
            .collect();
        FieldMatrix::from_rows(rows).expect("rectangular")
    });
    let ws = sc
        .events
        .iter()
        .map(|_| random_vec(&mut rng, sc.cols, prime))
        .collect();
    (x, ws)
}

pub fn cmd_run(file: &ScenarioFile, opts: &RunOptions) -> Result<ReportFile, CliError> {
    let loaded = file.to_scenario(opts.prime)?;
    let sc = &loaded.scenario;
    let seed = opts.seed.or(loaded.seed).unwrap_or(0);
    let field = PrimeField::new(loaded.prime).expect("checked during validation");
    let (generated, ws) = seeded_inputs(sc, loaded.prime, seed, opts.matrix.is_some());
    let x = match (&opts.matrix, generated) {
        (Some(path), _) => read_matrix(path, sc.rows, sc.cols, &field)?,
        (None, Some(x)) => x,
        (None, None) => unreachable!("matrix generated when no file is given"),
    };
    let outcomes = run_timeline(
        sc,
        &x,
        &ws,
        loaded.prime,
        StepOptions {
            fault_inject: opts.fault_inject,
        },
    )?;
    let mut report = ReportFile::header("run", &loaded, Some(seed));
    for (avail, outcome) in sc.events.iter().zip(outcomes) {
        let record = match outcome {
            StepOutcome::Completed(r) => {
                let r = *r;
                StepRecord {
                    t: avail.t,
                    available: avail.available.iter().copied().collect(),
                    status: StepStatus::Ok,
                    available_storage: sc.available_storage(avail),
                    row_sets: row_sets(&r.plan.alphas, &r.plan.sets, &r.rows),
                    rows_exact: Some(r.rows.exact),
                    loads: r.loads.0,
                    time: Some(r.time),
                    k_star: Some(r.k_star),
                    machine_times: r.machine_times,
                    machine_rows: Some(r.machine_rows),
                    decode_ok: Some(r.decode_ok),
                }
            }
            StepOutcome::Infeasible { .. } => StepRecord::infeasible(sc, avail),
        };
        report.steps.push(record);
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleStep {
    pub t: usize,
    /// Optimal time from the closed-form solver, `None` if it reports infeasible.
    #[serde(with = "rational::serde_str_opt")]
    pub solver_time: Option<Rational>,
    /// Optimal time from the linear program, `None` if infeasible.
    #[serde(with = "rational::serde_str_opt")]
    pub lp_time: Option<Rational>,
    pub problems: Vec<String>,
    pub agree: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleReport {
    pub steps: Vec<OracleStep>,
    pub agreed: usize,
    pub total: usize,
}

impl OracleReport {
    pub fn status(&self) -> ExitStatus {
        if self.agreed != self.total {
            ExitStatus::Verification
        } else if self.steps.iter().any(|s| s.solver_time.is_none()) {
            ExitStatus::Infeasible
        } else {
            ExitStatus::Success
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

/// Checks every step against the linear program and the plan verifier.
pub fn cmd_oracle(file: &ScenarioFile, prime: Option<u64>) -> Result<OracleReport, CliError> {
    let loaded = file.to_scenario(prime)?;
    let sc = &loaded.scenario;
    for (i, m) in file.machines.iter().enumerate() {
        if *m.speed.denom() > ORACLE_MAX_DENOMINATOR {
            return Err(CliError::new(
                ErrorKind::OracleLimit,
                Some(format!("machines[{i}].speed")),
                format!("speed denominator above {ORACLE_MAX_DENOMINATOR}"),
            ));
        }
    }
    for (i, ev) in sc.events.iter().enumerate() {
        if ev.len() > ORACLE_MAX_MACHINES {
            return Err(CliError::new(
                ErrorKind::OracleLimit,
                Some(format!("timeline[{i}].available")),
                format!(
                    "{} machines available, oracle handles at most {ORACLE_MAX_MACHINES}",
                    ev.len()
                ),
            ));
        }
    }

    let l = sc.recovery_threshold;
    let mut steps = Vec::new();
    for avail in &sc.events {
        let lp = lp_min_time(&sc.speeds, &sc.storage, l, avail).map(|(t, _)| t);
        let (solver_time, problems) = match plan_step(sc, avail) {
            Ok(step) => {
                let mut problems =
                    verify_loads(&step.loads, &sc.speeds, &sc.storage, l, avail, step.time);
                problems.extend(verify_plan(
                    &step.loads,
                    &step.plan,
                    &sc.storage_map,
                    avail,
                    l,
                ));
                (Some(step.time), problems)
            }
            Err(SimError::Optimizer(OptimizerError::Infeasible { .. })) => (None, Vec::new()),
            Err(e) => return Err(e.into()),
        };
        let agree = problems.is_empty() && solver_time == lp;
        steps.push(OracleStep {
            t: avail.t,
            solver_time,
            lp_time: lp,
            problems,
            agree,
        });
    }
    let agreed = steps.iter().filter(|s| s.agree).count();
    Ok(OracleReport {
        total: steps.len(),
        agreed,
        steps,
    })
}

impl fmt::Display for OracleStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let show = |r: &Option<Rational>| {
            r.as_ref()
                .map_or("infeasible".to_string(), rational::format_rational)
        };
        write!(
            f,
            "t={} solver={} lp={} {}",
            self.t,
            show(&self.solver_time),
            show(&self.lp_time),
            if self.agree { "agree" } else { "DISAGREE" }
        )
    }
}
