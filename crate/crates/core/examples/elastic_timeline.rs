//! Runs a scenario file end to end: encode once, then plan, compute and
//! verify every step of the timeline.
//!
//! cargo run --example elastic_timeline -- fixtures/heterogeneous_speeds.toml

use std::path::PathBuf;

use hetcec::cli::{seeded_inputs, ScenarioFile};
use hetcec::rational::format_rational;
use hetcec::sim::{run_timeline, total_work, StepOptions, StepOutcome};

fn main() {
    let path = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| {
            PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures/heterogeneous_speeds.toml")
        });
    let loaded = ScenarioFile::load(&path)
        .and_then(|f| f.to_scenario(None))
        .unwrap_or_else(|e| panic!("{}", e.to_json()));
    let sc = &loaded.scenario;
    let (x, ws) = seeded_inputs(sc, loaded.prime, loaded.seed.unwrap_or(0), false);

    let outcomes =
        run_timeline(sc, &x.unwrap(), &ws, loaded.prime, StepOptions::default()).unwrap();
    for outcome in outcomes {
        match outcome {
            StepOutcome::Completed(r) => println!(
                "t={} time={} F={} rows/set={:?} work={} decode_ok={}",
                r.t,
                format_rational(&r.time),
                r.row_set_count(),
                r.rows_per_set(),
                total_work(&r),
                r.decode_ok
            ),
            StepOutcome::Infeasible {
                t,
                available,
                required,
            } => {
                println!("t={t} skipped: {available} cs-matrices available, {required} needed")
            }
        }
    }
}
