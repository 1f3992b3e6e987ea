//! One PASS/FAIL line per acceptance criterion, each with its time limit.

mod common;

use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use hetcec::assignment::{fill, fill_heterogeneous, fill_traced};
use hetcec::cli::{cmd_plan, cmd_run, RunOptions, ScenarioFile};
use hetcec::codec::build_generator;
use hetcec::field::DEFAULT_PRIME;
use hetcec::model::{AvailabilitySet, LoadVector, Scenario, StorageMap};
use hetcec::optimizer::solve_load;
use hetcec::oracle::{lp_min_time, verify_plan};
use hetcec::rational::{frac, Rational};
use hetcec::sim::{run_timeline, StepOptions};
use num_traits::{One, Zero};

type Check = fn() -> Result<(), String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn fracs(v: &[(i128, i128)]) -> Vec<Rational> {
    v.iter().map(|&(n, d)| frac(n, d)).collect()
}

fn sets(v: &[&[usize]]) -> Vec<BTreeSet<usize>> {
    v.iter().map(|s| s.iter().copied().collect()).collect()
}

/// Availability set, expected loads as (numerator, denominator), expected time.
type LoadCase<'a> = (&'a [usize], &'a [(i128, i128)], (i128, i128));

fn ac1() -> Result<(), String> {
    let sc = Scenario::new(common::ints(&[2, 2, 3, 3, 4, 4]), vec![1; 6], 3, 3, 1);
    let cases: [LoadCase; 4] = [
        (
            &[1, 2, 3, 4, 5, 6],
            &[(1, 3), (1, 3), (1, 2), (1, 2), (2, 3), (2, 3)],
            (1, 6),
        ),
        (
            &[1, 2, 3, 5, 6],
            &[(2, 5), (2, 5), (3, 5), (0, 1), (4, 5), (4, 5)],
            (1, 5),
        ),
        (
            &[1, 2, 3, 5],
            &[(4, 7), (4, 7), (6, 7), (0, 1), (1, 1), (0, 1)],
            (2, 7),
        ),
        (
            &[2, 3, 5],
            &[(0, 1), (1, 1), (1, 1), (0, 1), (1, 1), (0, 1)],
            (1, 2),
        ),
    ];
    for (t, (avail, mu, c)) in cases.iter().enumerate() {
        let sol = solve_load(&sc, &AvailabilitySet::new(t + 1, avail.iter().copied()))
            .map_err(|e| e.to_string())?;
        ensure(sol.loads.0 == fracs(mu), || {
            format!("t={} loads {:?}", t + 1, sol.loads)
        })?;
        ensure(sol.time == frac(c.0, c.1), || {
            format!("t={} time {}", t + 1, sol.time)
        })?;
    }
    Ok(())
}

fn ac2() -> Result<(), String> {
    let sc = Scenario::new(
        common::ints(&[2, 3, 4, 2, 3, 4]),
        vec![2, 2, 2, 1, 1, 1],
        6,
        66,
        4,
    );
    let avail = AvailabilitySet::all(1, 6);
    let sol = solve_load(&sc, &avail).map_err(|e| e.to_string())?;
    let mu = fracs(&[(8, 11), (12, 11), (16, 11), (8, 11), (1, 1), (1, 1)]);
    ensure(sol.k_star == 4, || format!("k* = {}", sol.k_star))?;
    ensure(sol.time == frac(4, 11), || format!("time {}", sol.time))?;
    ensure(sol.loads.0 == mu, || format!("loads {:?}", sol.loads))?;
    let plan = fill_heterogeneous(&sol.loads, &sc.storage_map, 6).map_err(|e| e.to_string())?;
    ensure(plan.row_set_count() == 4, || {
        format!("F = {}", plan.row_set_count())
    })?;
    let mut got = plan.alphas.clone();
    got.sort();
    let mut want = fracs(&[(1, 11), (3, 11), (2, 11), (5, 11)]);
    want.sort();
    ensure(got == want, || format!("alphas {:?}", plan.alphas))?;
    ensure(plan.realized_loads(&sc.storage_map).0 == mu, || {
        "realization differs".into()
    })?;
    let expected = sets(&[
        &[3, 4, 5, 7, 8, 9],
        &[1, 3, 5, 6, 8, 9],
        &[3, 5, 6, 7, 8, 9],
        &[1, 3, 5, 7, 8, 9],
    ]);
    ensure(plan.sets == expected, || format!("sets {:?}", plan.sets))
}

fn ac3() -> Result<(), String> {
    // Positions 1..=5 stand for machines 1, 2, 3, 5, 6.
    let machines = [1, 2, 3, 5, 6];
    let mu = LoadVector(fracs(&[(2, 5), (2, 5), (3, 5), (4, 5), (4, 5)]));
    let plan = fill(&mu, 3).map_err(|e| e.to_string())?;
    ensure(
        plan.alphas == fracs(&[(2, 5), (1, 5), (1, 5), (1, 5)]),
        || format!("alphas {:?}", plan.alphas),
    )?;
    let named: Vec<BTreeSet<usize>> = plan
        .sets
        .iter()
        .map(|s| s.iter().map(|&i| machines[i - 1]).collect())
        .collect();
    let expected = sets(&[&[1, 5, 6], &[2, 3, 6], &[2, 3, 5], &[3, 5, 6]]);
    ensure(named == expected, || format!("sets {named:?}"))
}

fn ac4() -> Result<(), String> {
    for seed in 0..200 {
        let (sc, avail) = common::random_instance(seed);
        let sol = solve_load(&sc, &avail).map_err(|e| format!("seed {seed}: {e}"))?;
        let (lp, _) = lp_min_time(&sc.speeds, &sc.storage, sc.recovery_threshold, &avail)
            .ok_or_else(|| format!("seed {seed}: LP infeasible"))?;
        ensure(sol.time == lp, || {
            format!("seed {seed}: solver {} vs LP {lp}", sol.time)
        })?;
    }
    Ok(())
}

fn ac5() -> Result<(), String> {
    for seed in 0..500 {
        let (mu, l) = common::random_feasible_loads(seed);
        let n = mu.len();
        let (plan, trace) = fill_traced(&mu, l).map_err(|e| format!("seed {seed}: {e}"))?;
        ensure(plan.row_set_count() <= n, || {
            format!("seed {seed}: F = {}", plan.row_set_count())
        })?;
        ensure(
            plan.alphas.iter().sum::<Rational>() == Rational::one(),
            || format!("seed {seed}: Σα ≠ 1"),
        )?;
        ensure(plan.sets.iter().all(|s| s.len() == l), || {
            format!("seed {seed}: |P_f| ≠ L")
        })?;
        let problems = verify_plan(
            &mu,
            &plan,
            &StorageMap::contiguous(&vec![1; n]),
            &AvailabilitySet::all(1, n),
            l,
        );
        ensure(problems.is_empty(), || format!("seed {seed}: {problems:?}"))?;
        let width = Rational::from_integer(l as i128);
        for state in &trace {
            let ok = state
                .remaining
                .iter()
                .all(|m| *m >= Rational::zero() && *m <= state.remaining_total / width);
            ensure(ok, || {
                format!(
                    "seed {seed}: invariant broken at iteration {}",
                    state.iteration
                )
            })?;
        }
    }
    Ok(())
}

fn ac6() -> Result<(), String> {
    for (z, l) in [(6usize, 3usize), (9, 6)] {
        let g = build_generator(z, l, DEFAULT_PRIME).map_err(|e| e.to_string())?;
        let mut count = 0;
        for mask in 0u32..(1 << z) {
            if mask.count_ones() as usize != l {
                continue;
            }
            let subset: BTreeSet<usize> = (0..z)
                .filter(|i| mask & (1 << i) != 0)
                .map(|i| i + 1)
                .collect();
            let det = g
                .submatrix(&subset)
                .unwrap()
                .determinant(g.field())
                .unwrap();
            ensure(det != 0, || {
                format!("(Z={z}, L={l}) subset {subset:?} singular")
            })?;
            count += 1;
        }
        let expected = [(6, 3, 20), (9, 6, 84)]
            .iter()
            .find(|c| c.0 == z)
            .unwrap()
            .2;
        ensure(count == expected, || format!("checked {count} subsets"))?;
    }
    Ok(())
}

fn ac7() -> Result<(), String> {
    for name in ["heterogeneous_speeds.toml", "heterogeneous_storage.toml"] {
        let loaded = ScenarioFile::load(&common::fixture(name))
            .and_then(|f| f.to_scenario(None))
            .map_err(|e| e.to_string())?;
        let sc = &loaded.scenario;
        let (x, ws) = hetcec::cli::seeded_inputs(sc, loaded.prime, 99, false);
        let x = x.unwrap();
        for fault in [false, true] {
            let out = run_timeline(
                sc,
                &x,
                &ws,
                loaded.prime,
                StepOptions {
                    fault_inject: fault,
                },
            )
            .map_err(|e| e.to_string())?;
            for o in &out {
                let r = o
                    .report()
                    .ok_or_else(|| format!("{name}: infeasible step"))?;
                ensure(r.decode_ok != fault, || {
                    format!("{name} t={} fault={fault} decode_ok={}", r.t, r.decode_ok)
                })?;
            }
        }
    }
    Ok(())
}

fn ac8() -> Result<(), String> {
    let path = common::fixture("heterogeneous_speeds.toml");
    let file = ScenarioFile::load(&path).map_err(|e| e.to_string())?;
    let opts = RunOptions {
        seed: Some(8),
        ..Default::default()
    };
    let a = cmd_run(&file, &opts).map_err(|e| e.to_string())?.to_json();
    let b = cmd_run(&file, &opts).map_err(|e| e.to_string())?.to_json();
    ensure(a == b, || "library reports differ".into())?;
    let p1 = cmd_plan(&file, None).map_err(|e| e.to_string())?.to_csv();
    let p2 = cmd_plan(&file, None).map_err(|e| e.to_string())?.to_csv();
    ensure(p1 == p2, || "csv tables differ".into())?;
    let run = || {
        Command::new(env!("CARGO_BIN_EXE_hetcec"))
            .args(["run", "--scenario", path.to_str().unwrap(), "--seed", "8"])
            .output()
            .map(|o| o.stdout)
            .map_err(|e| e.to_string())
    };
    let (c, d) = (run()?, run()?);
    ensure(c == d && c == a.as_bytes(), || {
        "binary reports differ".into()
    })
}

fn main() -> ExitCode {
    let criteria: [(&str, &str, Check, Duration); 8] = [
        (
            "AC1",
            "speed-class optimal loads",
            ac1,
            Duration::from_secs(1),
        ),
        (
            "AC2",
            "mixed-storage loads and fill",
            ac2,
            Duration::from_secs(1),
        ),
        ("AC3", "speed-class fill after one leaves", ac3, Duration::from_secs(1)),
        (
            "AC4",
            "optimizer vs exact LP, 200 instances",
            ac4,
            Duration::from_secs(30),
        ),
        (
            "AC5",
            "fill properties, 500 instances",
            ac5,
            Duration::from_secs(30),
        ),
        (
            "AC6",
            "MDS submatrices (6,3) and (9,6)",
            ac6,
            Duration::from_secs(10),
        ),
        (
            "AC7",
            "end-to-end decode and fault injection",
            ac7,
            Duration::from_secs(30),
        ),
        (
            "AC8",
            "byte-identical reports",
            ac8,
            Duration::from_secs(30),
        ),
    ];
    let mut failed = 0;
    for (id, what, check, limit) in criteria {
        let start = Instant::now();
        let result =
            catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|_| Err("panicked".into()));
        let elapsed = start.elapsed();
        let verdict = match result {
            Ok(()) if elapsed <= limit => "PASS".to_string(),
            Ok(()) => format!("FAIL (over time limit {limit:?})"),
            Err(e) => format!("FAIL ({e})"),
        };
        if !verdict.starts_with("PASS") {
            failed += 1;
        }
        println!(
            "{id} {verdict} {what} [{:.3}s / {}s]",
            elapsed.as_secs_f64(),
            limit.as_secs()
        );
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
