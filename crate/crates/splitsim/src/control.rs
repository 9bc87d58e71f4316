//! Closed-loop split selection: PM-counter ingestion, periodic decisions
//! with a hysteresis threshold, and reconfiguration events.
//!
//! This emulates the decision application of a non-real-time controller: it
//! consumes occupancy counters, re-optimizes at a fixed cadence and emits an
//! event per sector whose split changed. Reconfiguration is modeled as
//! instantaneous.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::complexity::LoadPoint;
use crate::error::{Error, Result};
use crate::fronthaul::FhLink;
use crate::model::{placement_of, BbFunction, Side, Split};
use crate::optimizer::{evaluate, exhaustive_search, greedy_search, Objective, Site};
use crate::scenario::{Method, Scenario};

/// Origin of a performance-management counter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum CounterSource {
    ODu,
    ORu,
    FhSwitch,
}

/// One performance-management measurement for one sector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PmCounterRecord {
    pub timestamp_s: f64,
    pub sector_id: usize,
    pub prb_occupancy_dl: f64,
    pub prb_occupancy_ul: f64,
    pub traffic_volume_bits: f64,
    pub source: CounterSource,
}

/// One function moved across the fronthaul by a reconfiguration.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MovedFunction {
    pub function: BbFunction,
    pub from: Side,
    pub to: Side,
}

/// A per-sector split change enacted by the loop.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReconfigEvent {
    pub timestamp_s: f64,
    pub sector_id: usize,
    pub from_split: Split,
    pub to_split: Split,
    pub moved_functions: Vec<MovedFunction>,
}

impl ReconfigEvent {
    pub fn new(timestamp_s: f64, sector_id: usize, from_split: Split, to_split: Split) -> Self {
        let before = placement_of(from_split);
        let after = placement_of(to_split);
        let moved_functions = BbFunction::ALL
            .iter()
            .filter(|f| before.side_of(**f) != after.side_of(**f))
            .map(|f| MovedFunction {
                function: *f,
                from: before.side_of(*f),
                to: after.side_of(*f),
            })
            .collect();
        ReconfigEvent {
            timestamp_s,
            sector_id,
            from_split,
            to_split,
            moved_functions,
        }
    }
}

/// Decision-policy knobs. The hysteresis threshold is the minimum relative
/// objective improvement required to move away from the current vector;
/// infeasibility of the current vector always forces a change.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolicyParams {
    pub hysteresis: f64,
    pub method: Method,
}

impl Default for PolicyParams {
    fn default() -> Self {
        PolicyParams {
            hysteresis: 0.02,
            method: Method::Exhaustive,
        }
    }
}

/// Outcome of one decision tick.
#[derive(Debug, Clone, PartialEq)]
pub enum DecideOutcome {
    Change(Vec<Split>),
    NoChange,
    /// No decision could be made; carries a diagnostic.
    Skipped(String),
}

/// Windowed occupancy averages per sector, O-DU counters authoritative.
/// Returns None if any sector has no record in the window.
fn window_occupancies(
    counters: &[PmCounterRecord],
    sectors: usize,
) -> (Option<Vec<f64>>, Vec<String>) {
    let mut sums = vec![0.0; sectors];
    let mut counts = vec![0usize; sectors];
    let mut diagnostics = Vec::new();
    let have_odu = counters.iter().any(|c| c.source == CounterSource::ODu);
    for c in counters {
        if c.sector_id >= sectors {
            diagnostics.push(format!(
                "ignoring counter for unknown sector {}",
                c.sector_id
            ));
            continue;
        }
        if have_odu && c.source != CounterSource::ODu {
            continue;
        }
        sums[c.sector_id] += 0.5 * (c.prb_occupancy_dl + c.prb_occupancy_ul);
        counts[c.sector_id] += 1;
    }
    for (i, n) in counts.iter().enumerate() {
        if *n == 0 {
            diagnostics.push(format!("no counters for sector {i} in window"));
            return (None, diagnostics);
        }
    }
    let occs = sums
        .iter()
        .zip(&counts)
        .map(|(s, n)| (s / *n as f64).clamp(0.0, 1.0))
        .collect();
    (Some(occs), diagnostics)
}

/// One decision: map the counter window to loads, re-optimize, and change
/// only when the improvement over the current vector beats the hysteresis
/// threshold (or the current vector became infeasible).
pub fn decide(
    counters: &[PmCounterRecord],
    current: Option<&[Split]>,
    params: &PolicyParams,
    site: &Site<f64>,
    objective: &Objective<f64>,
    link: &FhLink<f64>,
) -> Result<DecideOutcome> {
    let (occs, diagnostics) = window_occupancies(counters, site.sectors());
    let Some(occs) = occs else {
        return Ok(DecideOutcome::Skipped(diagnostics.join("; ")));
    };
    let loads: Vec<LoadPoint<f64>> = occs
        .iter()
        .enumerate()
        .map(|(i, occ)| LoadPoint {
            sector_id: i,
            occupancy: *occ,
            label: None,
        })
        .collect();
    let optimum = match params.method {
        Method::Exhaustive => exhaustive_search(site, &loads, objective, link)?,
        Method::Greedy => greedy_search(site, &loads, objective, link)?,
    };
    let Some(current) = current else {
        return Ok(DecideOutcome::Change(optimum.splits));
    };
    if optimum.splits == current {
        return Ok(DecideOutcome::NoChange);
    }
    let standing = evaluate(site, current, &loads, objective, link)?;
    if !standing.feasible {
        // Feasibility overrides hysteresis.
        return Ok(DecideOutcome::Change(optimum.splits));
    }
    if standing.objective_value > 0.0 {
        let improvement =
            (standing.objective_value - optimum.objective_value) / standing.objective_value;
        if improvement > params.hysteresis {
            return Ok(DecideOutcome::Change(optimum.splits));
        }
    }
    Ok(DecideOutcome::NoChange)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionRecord {
    pub timestamp_s: f64,
    pub period_label: String,
    pub splits: Vec<Split>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplayResult {
    pub decisions: Vec<DecisionRecord>,
    pub events: Vec<ReconfigEvent>,
    /// Number of decision ticks (after the first) at which the vector changed.
    pub switch_count: usize,
    pub skipped: Vec<String>,
}

/// Synthesize PM counters from the scenario's period loads and run the
/// decision loop at `ticks_per_period` decisions per period.
pub fn replay(
    scenario: &Scenario,
    ticks_per_period: usize,
    params: &PolicyParams,
) -> Result<ReplayResult> {
    if ticks_per_period == 0 {
        return Err(Error::InvalidConfig {
            field: "ticks_per_period".into(),
            message: "must be at least 1".into(),
        });
    }
    let site = scenario.site();
    let objective = Objective::new(scenario.epsilon)?;
    let link = scenario.link;
    let mut state: Option<Vec<Split>> = None;
    let mut result = ReplayResult {
        decisions: Vec::new(),
        events: Vec::new(),
        switch_count: 0,
        skipped: Vec::new(),
    };
    for period in &scenario.periods {
        let occs = scenario.occupancies(period);
        let duration_s = (period.hours[1] - period.hours[0]) * 3600.0;
        for tick in 0..ticks_per_period {
            let timestamp_s =
                period.hours[0] * 3600.0 + tick as f64 * duration_s / ticks_per_period as f64;
            let counters: Vec<PmCounterRecord> = occs
                .iter()
                .enumerate()
                .map(|(sector_id, occ)| PmCounterRecord {
                    timestamp_s,
                    sector_id,
                    prb_occupancy_dl: *occ,
                    prb_occupancy_ul: *occ,
                    traffic_volume_bits: 0.0,
                    source: CounterSource::ODu,
                })
                .collect();
            step(
                &counters,
                timestamp_s,
                &period.label,
                params,
                &site,
                &objective,
                &link,
                &mut state,
                &mut result,
            )?;
        }
    }
    Ok(result)
}

/// Replay externally captured counters, deciding once per window of
/// `decision_interval_s` seconds. Timestamps must be non-decreasing.
pub fn replay_counters(
    records: &[PmCounterRecord],
    scenario: &Scenario,
    decision_interval_s: f64,
    params: &PolicyParams,
) -> Result<ReplayResult> {
    if !(decision_interval_s >= 1.0) {
        // The controller operates on cadences of one second or slower.
        return Err(Error::InvalidConfig {
            field: "decision_interval_s".into(),
            message: format!("{decision_interval_s} must be >= 1"),
        });
    }
    let site = scenario.site();
    let objective = Objective::new(scenario.epsilon)?;
    let link = scenario.link;
    let mut state: Option<Vec<Split>> = None;
    let mut result = ReplayResult {
        decisions: Vec::new(),
        events: Vec::new(),
        switch_count: 0,
        skipped: Vec::new(),
    };
    if records.is_empty() {
        return Ok(result);
    }
    let start = records[0].timestamp_s;
    let end = records[records.len() - 1].timestamp_s;
    let mut window_start = start;
    while window_start <= end {
        let window_end = window_start + decision_interval_s;
        let window: Vec<PmCounterRecord> = records
            .iter()
            .filter(|r| r.timestamp_s >= window_start && r.timestamp_s < window_end)
            .cloned()
            .collect();
        if !window.is_empty() {
            step(
                &window,
                window_end,
                "",
                params,
                &site,
                &objective,
                &link,
                &mut state,
                &mut result,
            )?;
        }
        window_start = window_end;
    }
    Ok(result)
}

#[allow(clippy::too_many_arguments)]
fn step(
    counters: &[PmCounterRecord],
    timestamp_s: f64,
    label: &str,
    params: &PolicyParams,
    site: &Site<f64>,
    objective: &Objective<f64>,
    link: &FhLink<f64>,
    state: &mut Option<Vec<Split>>,
    result: &mut ReplayResult,
) -> Result<()> {
    match decide(counters, state.as_deref(), params, site, objective, link)? {
        DecideOutcome::Change(new_splits) => {
            if let Some(old) = state.as_deref() {
                let mut changed = false;
                for (sector_id, (from, to)) in old.iter().zip(&new_splits).enumerate() {
                    if from != to {
                        result
                            .events
                            .push(ReconfigEvent::new(timestamp_s, sector_id, *from, *to));
                        changed = true;
                    }
                }
                if changed {
                    result.switch_count += 1;
                }
            }
            *state = Some(new_splits);
        }
        DecideOutcome::NoChange => {}
        DecideOutcome::Skipped(diag) => result.skipped.push(format!("t={timestamp_s}: {diag}")),
    }
    if let Some(splits) = state.as_deref() {
        result.decisions.push(DecisionRecord {
            timestamp_s,
            period_label: label.to_string(),
            splits: splits.to_vec(),
        });
    }
    Ok(())
}

/// Write the event log as JSON lines, one event per line.
pub fn write_events_jsonl(events: &[ReconfigEvent], path: &Path) -> Result<()> {
    let mut out = String::new();
    for event in events {
        out.push_str(&serde_json::to_string(event)?);
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Load PM counters from a CSV file with columns
/// timestamp_s,sector_id,prb_occupancy_dl,prb_occupancy_ul,traffic_volume_bits,source.
pub fn read_counters_csv(path: &Path) -> Result<Vec<PmCounterRecord>> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| match e.kind() {
        csv::ErrorKind::Io(_) => Error::io(path, std::io::Error::other(e.to_string())),
        _ => Error::Csv(e),
    })?;
    let mut records = Vec::new();
    let mut last_ts = f64::NEG_INFINITY;
    for (i, row) in reader.deserialize::<PmCounterRecord>().enumerate() {
        let record: PmCounterRecord = row?;
        if !(0.0..=1.0).contains(&record.prb_occupancy_dl)
            || !(0.0..=1.0).contains(&record.prb_occupancy_ul)
        {
            return Err(Error::Schema {
                path: format!("{}:{}", path.display(), i + 2),
                message: "occupancies must be in [0,1]".into(),
            });
        }
        if record.timestamp_s < last_ts {
            return Err(Error::Schema {
                path: format!("{}:{}", path.display(), i + 2),
                message: "timestamps must be non-decreasing".into(),
            });
        }
        last_ts = record.timestamp_s;
        records.push(record);
    }
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{run, Scenario};

    fn counters_for(occs: &[f64]) -> Vec<PmCounterRecord> {
        occs.iter()
            .enumerate()
            .map(|(sector_id, occ)| PmCounterRecord {
                timestamp_s: 0.0,
                sector_id,
                prb_occupancy_dl: *occ,
                prb_occupancy_ul: *occ,
                traffic_volume_bits: 0.0,
                source: CounterSource::ODu,
            })
            .collect()
    }

    #[test]
    fn reconfig_event_lists_moved_functions() {
        let e = ReconfigEvent::new(0.0, 0, Split::S7b, Split::S7c);
        // 7b -> 7c moves the estimation, detection and precoding functions
        // to the BBL.
        assert_eq!(e.moved_functions.len(), 5);
        for m in &e.moved_functions {
            assert_eq!(m.from, Side::Bbh);
            assert_eq!(m.to, Side::Bbl);
        }
        let none = ReconfigEvent::new(0.0, 0, Split::S7a, Split::S7b);
        assert!(none.moved_functions.is_empty());
    }

    #[test]
    fn decide_with_zero_hysteresis_matches_offline_optimum() {
        let sc = Scenario::bundled_default();
        let site = sc.site();
        let objective = Objective::new(sc.epsilon).unwrap();
        let params = PolicyParams {
            hysteresis: 0.0,
            method: Method::Exhaustive,
        };
        let offline = run(&sc, Method::Exhaustive).unwrap();
        for (period, expected) in sc.periods.iter().zip(offline.periods.iter()) {
            let counters = counters_for(&sc.occupancies(period));
            match decide(&counters, None, &params, &site, &objective, &sc.link).unwrap() {
                DecideOutcome::Change(splits) => {
                    assert_eq!(splits, expected.optimum.splits, "{}", period.label)
                }
                other => panic!("expected a decision, got {other:?}"),
            }
        }
    }

    #[test]
    fn identical_counters_produce_no_change() {
        let sc = Scenario::bundled_default();
        let site = sc.site();
        let objective = Objective::new(sc.epsilon).unwrap();
        let params = PolicyParams::default();
        let counters = counters_for(&sc.occupancies(&sc.periods[0]));
        let first = match decide(&counters, None, &params, &site, &objective, &sc.link).unwrap() {
            DecideOutcome::Change(s) => s,
            other => panic!("{other:?}"),
        };
        let second = decide(
            &counters,
            Some(&first),
            &params,
            &site,
            &objective,
            &sc.link,
        )
        .unwrap();
        assert_eq!(second, DecideOutcome::NoChange);
    }

    #[test]
    fn missing_sector_skips_with_diagnostic() {
        let sc = Scenario::bundled_default();
        let site = sc.site();
        let objective = Objective::new(sc.epsilon).unwrap();
        let counters = counters_for(&[0.1, 0.1]); // sector 2 missing
        match decide(
            &counters,
            None,
            &PolicyParams::default(),
            &site,
            &objective,
            &sc.link,
        )
        .unwrap()
        {
            DecideOutcome::Skipped(diag) => assert!(diag.contains("sector 2"), "{diag}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn infeasibility_overrides_hysteresis() {
        let sc = Scenario::bundled_default();
        let site = sc.site();
        let objective = Objective::new(sc.epsilon).unwrap();
        // Extreme hysteresis: improvement alone can never trigger a change.
        let params = PolicyParams {
            hysteresis: 1.0,
            method: Method::Exhaustive,
        };
        // All-S7b is feasible at the morning loads but not at the peak.
        let current = vec![Split::S7b; 3];
        let peak = counters_for(&sc.occupancies(&sc.periods[5]));
        match decide(&peak, Some(&current), &params, &site, &objective, &sc.link).unwrap() {
            DecideOutcome::Change(splits) => assert_ne!(splits, current),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn replay_matches_offline_timeline_at_zero_hysteresis() {
        let sc = Scenario::bundled_default();
        let params = PolicyParams {
            hysteresis: 0.0,
            method: Method::Exhaustive,
        };
        let replayed = replay(&sc, 1, &params).unwrap();
        let offline = run(&sc, Method::Exhaustive).unwrap();
        assert_eq!(replayed.decisions.len(), sc.periods.len());
        for (decision, period) in replayed.decisions.iter().zip(offline.periods.iter()) {
            assert_eq!(decision.splits, period.optimum.splits, "{}", period.label);
        }
        let optimum_changes = offline
            .periods
            .windows(2)
            .filter(|w| w[0].optimum.splits != w[1].optimum.splits)
            .count();
        assert_eq!(replayed.switch_count, optimum_changes);
        assert!(replayed.skipped.is_empty());
    }

    #[test]
    fn constant_load_scenario_never_reconfigures() {
        let json = r#"{
            "link": {"capacity_gbps": 40.0},
            "periods": [
                {"label": "a", "hours": [0,1], "aggregate_load": 0.5, "sector_shares": [0.34, 0.33, 0.33]},
                {"label": "b", "hours": [1,2], "aggregate_load": 0.5, "sector_shares": [0.34, 0.33, 0.33]},
                {"label": "c", "hours": [2,3], "aggregate_load": 0.5, "sector_shares": [0.34, 0.33, 0.33]}
            ]
        }"#;
        let sc = crate::scenario::load_scenario(json).unwrap();
        let replayed = replay(&sc, 4, &PolicyParams::default()).unwrap();
        assert_eq!(replayed.switch_count, 0);
        assert!(replayed.events.is_empty());
    }

    #[test]
    fn hysteresis_monotonicity_of_switch_count() {
        let sc = Scenario::bundled_default();
        let mut previous = usize::MAX;
        for h in [0.0, 0.01, 0.05, 0.2, 1.0] {
            let params = PolicyParams {
                hysteresis: h,
                method: Method::Exhaustive,
            };
            let count = replay(&sc, 1, &params).unwrap().switch_count;
            assert!(count <= previous, "h={h}: {count} > {previous}");
            previous = count;
        }
    }

    #[test]
    fn replay_keeps_state_feasible() {
        let sc = Scenario::bundled_default();
        for h in [0.0, 0.1, 1.0] {
            let params = PolicyParams {
                hysteresis: h,
                method: Method::Exhaustive,
            };
            let replayed = replay(&sc, 2, &params).unwrap();
            let site = sc.site();
            let objective = Objective::new(sc.epsilon).unwrap();
            for decision in &replayed.decisions {
                // Each decision belongs to some period; find it by timestamp.
                let period = sc
                    .periods
                    .iter()
                    .find(|p| {
                        decision.timestamp_s >= p.hours[0] * 3600.0
                            && decision.timestamp_s < p.hours[1] * 3600.0
                    })
                    .unwrap();
                let loads = sc.load_points(period);
                let sol = evaluate(&site, &decision.splits, &loads, &objective, &sc.link).unwrap();
                assert!(
                    sol.feasible,
                    "infeasible state at t={}",
                    decision.timestamp_s
                );
            }
        }
    }

    #[test]
    fn counters_csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("counters.csv");
        std::fs::write(
            &path,
            "timestamp_s,sector_id,prb_occupancy_dl,prb_occupancy_ul,traffic_volume_bits,source\n\
             0.0,0,0.1,0.1,1000,O_DU\n\
             0.0,1,0.2,0.2,2000,O_DU\n\
             0.0,2,0.1,0.1,1000,O_DU\n\
             10.0,0,0.1,0.1,1000,O_DU\n\
             10.0,1,0.2,0.2,2000,O_DU\n\
             10.0,2,0.1,0.1,1000,O_DU\n",
        )
        .unwrap();
        let records = read_counters_csv(&path).unwrap();
        assert_eq!(records.len(), 6);
        let sc = Scenario::bundled_default();
        let replayed = replay_counters(&records, &sc, 10.0, &PolicyParams::default()).unwrap();
        assert!(!replayed.decisions.is_empty());
        assert_eq!(replayed.switch_count, 0);
    }

    #[test]
    fn events_jsonl_one_line_per_event() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("events.jsonl");
        let events = vec![
            ReconfigEvent::new(0.0, 0, Split::S7b, Split::S7c),
            ReconfigEvent::new(1.0, 1, Split::S7c, Split::S7b),
        ];
        write_events_jsonl(&events, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().count(), 2);
        let parsed: ReconfigEvent = serde_json::from_str(text.lines().next().unwrap()).unwrap();
        assert_eq!(parsed, events[0]);
    }
}
