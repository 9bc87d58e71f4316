//! Acceptance gate: one test per criterion, each printing a single
//! PASS/FAIL line (visible with `--nocapture`; the test verdicts carry the
//! same information either way).

use std::collections::BTreeMap;
use std::time::Instant;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use splitsim::complexity::{LoadPoint, OpCountTable, REFERENCE_OP_COUNTS};
use splitsim::control::{self, PolicyParams};
use splitsim::fronthaul::sector_fh;
use splitsim::model::Split;
use splitsim::optimizer::{evaluate, exhaustive_search, Objective, Site};
use splitsim::scenario::{self, ExportFormat, Method, Scenario};
use splitsim::{CellConfig, FhLink};

fn verdict(id: u32, name: &str, ok: bool, detail: &str) {
    println!(
        "criterion {id} ({name}): {} — {detail}",
        if ok { "PASS" } else { "FAIL" }
    );
    assert!(ok, "criterion {id} ({name}) failed: {detail}");
}

#[test]
fn criterion_1_operation_count_calibration() {
    let start = Instant::now();
    let table = OpCountTable::default();
    let cell = CellConfig::default();
    let mut mismatches = Vec::new();
    for (f, expected) in REFERENCE_OP_COUNTS {
        let computed: f64 = table.ops_per_execution(f, &cell).unwrap();
        if computed != expected as f64 {
            mismatches.push(format!("{}: expected {expected}, got {computed}", f.name()));
        }
    }
    let elapsed = start.elapsed();
    let ok = mismatches.is_empty() && elapsed.as_secs_f64() < 1.0;
    verdict(
        1,
        "operation-count calibration",
        ok,
        &format!(
            "9 functions checked, {} mismatches, {:.3} s",
            mismatches.len(),
            elapsed.as_secs_f64()
        ),
    );
}

#[test]
fn criterion_2_constraint_semantics_on_default_scenario() {
    let sc = Scenario::bundled_default();
    let result = scenario::run(&sc, Method::Exhaustive).unwrap();
    let mut problems = Vec::new();
    for (idx, p) in result.periods.iter().enumerate() {
        for split in [Split::S8, Split::S7a] {
            if p.fixed[&split].feasible {
                problems.push(format!("fixed {split} feasible at {}", p.label));
            }
        }
        for split in [Split::S7c, Split::S7d, Split::S6] {
            if !p.fixed[&split].feasible {
                problems.push(format!("fixed {split} infeasible at {}", p.label));
            }
        }
        let want_7b = idx == 0; // only the 08h-10h valley
        if p.fixed[&Split::S7b].feasible != want_7b {
            problems.push(format!(
                "fixed S7b feasible={} at {}, expected {}",
                p.fixed[&Split::S7b].feasible,
                p.label,
                want_7b
            ));
        }
    }
    verdict(
        2,
        "constraint semantics",
        problems.is_empty(),
        &if problems.is_empty() {
            "S8/S7a never fit, S7c/S7d/S6 always fit, S7b fits only 08h-10h".to_string()
        } else {
            problems.join("; ")
        },
    );
}

/// Independent brute-force argmin: plain nested loops over all 6^3 vectors,
/// no shared enumeration or tie-break code with the optimizer.
fn brute_force(
    site: &Site<f64>,
    loads: &[LoadPoint<f64>],
    obj: &Objective<f64>,
    link: &FhLink,
) -> Option<(Vec<Split>, f64)> {
    let mut best: Option<(Vec<Split>, f64)> = None;
    for a in Split::ALL {
        for b in Split::ALL {
            for c in Split::ALL {
                let splits = vec![a, b, c];
                let sol = evaluate(site, &splits, loads, obj, link).unwrap();
                if !sol.feasible {
                    continue;
                }
                if best.as_ref().is_none_or(|(_, v)| sol.objective_value < *v) {
                    best = Some((splits, sol.objective_value));
                }
            }
        }
    }
    best
}

#[test]
fn criterion_3_optimizer_matches_brute_force() {
    let start = Instant::now();
    let mut rng = StdRng::seed_from_u64(0x5eed_5111);
    let mut checked = 0usize;
    for trial in 0..120 {
        let cells = vec![CellConfig::default(); 3];
        let mut site = Site::new(cells);
        site.fh_overhead = 1.0 + rng.gen_range(0.0..0.2);
        let loads: Vec<LoadPoint<f64>> = (0..3)
            .map(|s| LoadPoint::new(s, rng.gen_range(0.0..0.35)).unwrap())
            .collect();
        let obj = Objective::new(rng.gen_range(1.0..4.0)).unwrap();
        let link = FhLink {
            capacity_gbps: rng.gen_range(10.0..80.0),
        };
        let sol = exhaustive_search(&site, &loads, &obj, &link).unwrap();
        match brute_force(&site, &loads, &obj, &link) {
            Some((_, best_value)) => {
                assert!(
                    sol.feasible,
                    "trial {trial}: optimizer infeasible but brute force found a vector"
                );
                let tol = 1e-12 * best_value.abs().max(1.0);
                assert!(
                    (sol.objective_value - best_value).abs() <= tol,
                    "trial {trial}: optimizer {} vs brute force {}",
                    sol.objective_value,
                    best_value
                );
            }
            None => assert!(
                !sol.feasible,
                "trial {trial}: optimizer claims feasible, brute force found none"
            ),
        }
        checked += 1;
    }
    let elapsed = start.elapsed();
    let ok = checked >= 100 && elapsed.as_secs_f64() < 10.0;
    verdict(
        3,
        "brute-force equivalence",
        ok,
        &format!(
            "{checked} randomized instances, {:.2} s",
            elapsed.as_secs_f64()
        ),
    );
}

#[test]
fn criterion_4_degeneracy_properties() {
    let sc = Scenario::bundled_default();
    let site = sc.site();
    let unit = Objective::new(1.0).unwrap();
    let unlimited = FhLink::unlimited();
    let mut max_spread: f64 = 0.0;
    for period in &sc.periods {
        let loads = sc.load_points(period);
        // At eps=1 every vector (all feasible on an unlimited link) must
        // carry the same objective.
        let mut values = Vec::new();
        for a in Split::ALL {
            for b in Split::ALL {
                for c in Split::ALL {
                    let sol = evaluate(&site, &[a, b, c], &loads, &unit, &unlimited).unwrap();
                    values.push(sol.objective_value);
                }
            }
        }
        let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        max_spread = max_spread.max((hi - lo) / hi);
    }
    // Unlimited capacity with eps>1 centralizes fully at every period.
    let eps2 = Objective::new(sc.epsilon).unwrap();
    let mut all_s8 = true;
    for period in &sc.periods {
        let loads = sc.load_points(period);
        let sol = exhaustive_search(&site, &loads, &eps2, &unlimited).unwrap();
        all_s8 &= sol.splits == vec![Split::S8; 3];
    }
    let ok = max_spread < 1e-9 && all_s8;
    verdict(
        4,
        "degeneracy properties",
        ok,
        &format!("eps=1 relative spread {max_spread:.2e}; unconstrained eps>1 all-S8: {all_s8}"),
    );
}

#[test]
fn criterion_5_adaptive_gain_shape() {
    let sc = Scenario::bundled_default();
    let result = scenario::run(&sc, Method::Exhaustive).unwrap();
    let peak = [4usize, 5, 6]; // 16h-18h, 18h-20h, 20h-22h
    let mut problems = Vec::new();
    let mut band: BTreeMap<Split, (f64, f64)> = BTreeMap::new();
    for (idx, p) in result.periods.iter().enumerate() {
        let d7c = p.fixed[&Split::S7c].pct_diff.unwrap();
        let d7d = p.fixed[&Split::S7d].pct_diff.unwrap();
        let d6 = p.fixed[&Split::S6].pct_diff.unwrap();
        if peak.contains(&idx) {
            if d7c != 0.0 {
                problems.push(format!(
                    "{}: pct_diff(S7c)={d7c} expected exactly 0",
                    p.label
                ));
            }
        } else if d7c <= 0.0 {
            problems.push(format!("{}: pct_diff(S7c)={d7c} expected > 0", p.label));
        }
        if d7d <= d7c || d6 <= d7c {
            problems.push(format!(
                "{}: S7d {d7d:.2} / S6 {d6:.2} not above S7c {d7c:.2}",
                p.label
            ));
        }
        for (split, d) in [(Split::S7c, d7c), (Split::S7d, d7d), (Split::S6, d6)] {
            let e = band
                .entry(split)
                .or_insert((f64::INFINITY, f64::NEG_INFINITY));
            e.0 = e.0.min(d);
            e.1 = e.1.max(d);
        }
    }
    // Calibration-target bands are informational, not gating: the structural
    // assertions above are the hard criteria.
    for (split, (lo, hi)) in &band {
        println!(
            "  informational: pct_diff({split}) ranges {:.1}%..{:.1}% over the day",
            lo, hi
        );
    }
    verdict(
        5,
        "adaptive-gain shape",
        problems.is_empty(),
        &if problems.is_empty() {
            "S7c gap zero exactly at peak, positive elsewhere; S7d/S6 gaps dominate S7c".to_string()
        } else {
            problems.join("; ")
        },
    );
}

#[test]
fn criterion_6_objective_tracks_load() {
    let sc = Scenario::bundled_default();
    let result = scenario::run(&sc, Method::Exhaustive).unwrap();
    let mut ok = true;
    let mut detail = String::new();
    for w in result.periods.windows(2) {
        let d_load = w[1].aggregate_load - w[0].aggregate_load;
        let d_obj = w[1].optimum.objective_value - w[0].optimum.objective_value;
        let sign = |x: f64| {
            if x > 0.0 {
                1
            } else if x < 0.0 {
                -1
            } else {
                0
            }
        };
        if sign(d_load) != sign(d_obj) {
            ok = false;
            detail.push_str(&format!(
                "{}→{}: load {d_load:+.2} vs objective {d_obj:+.1}; ",
                w[0].label, w[1].label
            ));
        }
    }
    if ok {
        detail = "period-over-period objective changes match aggregate-load changes in sign".into();
    }
    verdict(6, "load tracking", ok, &detail);
}

#[test]
fn criterion_7_fronthaul_model_properties() {
    let cell = CellConfig::default();
    let occs = [0.05, 0.1, 0.2, 0.4, 0.6, 0.8, 1.0];
    let mut problems = Vec::new();
    let at = |split: Split, occ: f64| sector_fh(split, &cell, &LoadPoint::new(0, occ).unwrap());
    for &occ in &occs {
        let fh0 = at(Split::S8, occs[0]);
        let fh = at(Split::S8, occ);
        if fh.dl_gbps != fh0.dl_gbps || fh.ul_gbps != fh0.ul_gbps {
            problems.push(format!("S8 rate varies with occupancy at {occ}"));
        }
        let fh7a = at(Split::S7a, occ);
        let fh7a0 = at(Split::S7a, occs[0]);
        if fh7a.dl_gbps != fh7a0.dl_gbps || fh7a.ul_gbps != fh7a0.ul_gbps {
            problems.push(format!("S7a rate varies with occupancy at {occ}"));
        }
        // Load-dependent splits: linear with zero intercept means f(occ) = occ * f(1).
        for split in [Split::S7b, Split::S7c, Split::S7d, Split::S6] {
            let unit = at(split, 1.0);
            let fh = at(split, occ);
            if (fh.dl_gbps - occ * unit.dl_gbps).abs() > 1e-9 * unit.dl_gbps
                || (fh.ul_gbps - occ * unit.ul_gbps).abs() > 1e-9 * unit.ul_gbps.max(1e-300)
            {
                problems.push(format!("{split} not linear-through-zero at {occ}"));
            }
        }
        // DL ordering with centralization.
        let dl: Vec<f64> = Split::ALL.iter().map(|s| at(*s, occ).dl_gbps).collect();
        for pair in dl.windows(2) {
            if pair[0] < pair[1] - 1e-12 {
                problems.push(format!("DL ordering violated at occ {occ}: {dl:?}"));
                break;
            }
        }
        // UL softbit expansion across the demodulation boundary.
        let ratio = at(Split::S7d, occ).ul_gbps / at(Split::S7c, occ).ul_gbps;
        if at(Split::S7d, occ).ul_gbps <= at(Split::S7c, occ).ul_gbps
            || (ratio - 48.0 / 32.0).abs() > 1e-9
        {
            problems.push(format!(
                "softbit expansion wrong at occ {occ}: ratio {ratio}"
            ));
        }
    }
    let zero = at(Split::S7b, 0.0);
    if zero.dl_gbps != 0.0 || zero.ul_gbps != 0.0 {
        problems.push("load-dependent split has nonzero intercept".into());
    }
    verdict(
        7,
        "fronthaul model properties",
        problems.is_empty(),
        &if problems.is_empty() {
            "constant S8/S7a, linear S7b-S6, DL monotone with centralization, UL softbit ratio 48/32".to_string()
        } else {
            problems.join("; ")
        },
    );
}

#[test]
fn criterion_8_closed_loop_consistency() {
    let sc = Scenario::bundled_default();
    let offline = scenario::run(&sc, Method::Exhaustive).unwrap();
    let zero_h = PolicyParams {
        hysteresis: 0.0,
        method: Method::Exhaustive,
    };
    let replayed = control::replay(&sc, 1, &zero_h).unwrap();
    let mut problems = Vec::new();
    if replayed.decisions.len() != offline.periods.len() {
        problems.push(format!(
            "{} decisions vs {} periods",
            replayed.decisions.len(),
            offline.periods.len()
        ));
    }
    for (dec, p) in replayed.decisions.iter().zip(&offline.periods) {
        if dec.splits != p.optimum.splits {
            problems.push(format!(
                "{}: loop {:?} vs offline {:?}",
                p.label, dec.splits, p.optimum.splits
            ));
        }
    }
    let expected_switches = offline
        .periods
        .windows(2)
        .filter(|w| w[0].optimum.splits != w[1].optimum.splits)
        .count();
    if replayed.switch_count != expected_switches {
        problems.push(format!(
            "switch count {} vs expected {expected_switches}",
            replayed.switch_count
        ));
    }
    // Hysteresis monotonicity: larger thresholds never switch more often.
    let mut prev = usize::MAX;
    for h in [0.0, 0.01, 0.05, 0.2, 1.0] {
        let r = control::replay(
            &sc,
            1,
            &PolicyParams {
                hysteresis: h,
                method: Method::Exhaustive,
            },
        )
        .unwrap();
        if r.switch_count > prev {
            problems.push(format!(
                "switch count increased to {} at h={h}",
                r.switch_count
            ));
        }
        prev = r.switch_count;
    }
    verdict(
        8,
        "closed-loop consistency",
        problems.is_empty(),
        &if problems.is_empty() {
            format!("h=0 timeline matches offline run; {expected_switches} switches; monotone in h")
        } else {
            problems.join("; ")
        },
    );
}

#[test]
fn criterion_9_runtime_and_byte_stability() {
    let sc = Scenario::bundled_default();
    let start = Instant::now();
    let result = scenario::run(&sc, Method::Exhaustive).unwrap();
    let elapsed = start.elapsed();
    let dir_a = tempfile::tempdir().unwrap();
    let dir_b = tempfile::tempdir().unwrap();
    let result_b = scenario::run(&sc, Method::Exhaustive).unwrap();
    let files_a = scenario::export(&result, ExportFormat::Both, dir_a.path()).unwrap();
    let files_b = scenario::export(&result_b, ExportFormat::Both, dir_b.path()).unwrap();
    let mut stable = files_a.len() == files_b.len();
    for (a, b) in files_a.iter().zip(&files_b) {
        stable &= std::fs::read(a).unwrap() == std::fs::read(b).unwrap();
    }
    let ok = elapsed.as_secs_f64() < 1.0 && stable;
    verdict(
        9,
        "runtime and byte stability",
        ok,
        &format!(
            "8-period exhaustive run in {:.3} s; {} export files byte-identical: {stable}",
            elapsed.as_secs_f64(),
            files_a.len()
        ),
    );
}
