//! Daily traffic scenarios: JSON loading and validation, per-period
//! optimization, fixed-split comparison and deterministic CSV/JSON export.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::complexity::{granularity_table_description, LoadPoint, OpCountTable};
use crate::error::{Error, Result};
use crate::fronthaul::{FhDemand, FhLink};
use crate::model::{CellConfig, Split};
use crate::optimizer::{
    evaluate, exhaustive_search, fixed_split_eval, greedy_search, pct_diff, Objective, Site,
    Solution,
};

/// Bundled three-sector daily scenario.
///
/// The per-period loads, shares and the load_scale factor are calibration
/// values: they are chosen so that the feasibility structure of the splits on
/// a 40 Gb/s link is non-trivial (the two most centralized splits never fit,
/// the all-S7b vector fits only in the lowest-load morning period, S7c fits
/// everywhere).
pub const DEFAULT_SCENARIO_JSON: &str = include_str!("../data/default_scenario.json");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
#[clap(rename_all = "lowercase")]
pub enum Method {
    Exhaustive,
    Greedy,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Exhaustive => "exhaustive",
            Method::Greedy => "greedy",
        }
    }
}

/// One period of the day with its aggregate site load and the per-sector
/// shares of that load.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Period {
    pub label: String,
    /// Start and end hour of day.
    pub hours: [f64; 2],
    /// Aggregate site load as a fraction of the site maximum.
    pub aggregate_load: f64,
    /// Fraction of the aggregate load carried by each sector; sums to 1.
    pub sector_shares: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LinkDoc {
    capacity_gbps: f64,
}

/// Raw scenario document as stored on disk.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioDoc {
    #[serde(default)]
    description: Option<String>,
    #[serde(default)]
    cells: Option<Vec<CellConfig<f64>>>,
    link: LinkDoc,
    #[serde(default = "default_epsilon")]
    epsilon: f64,
    #[serde(default = "default_one")]
    load_scale: f64,
    #[serde(default = "default_one")]
    fh_overhead: f64,
    #[serde(default)]
    fixed_splits: Option<Vec<String>>,
    periods: Vec<Period>,
}

fn default_epsilon() -> f64 {
    2.0
}

fn default_one() -> f64 {
    1.0
}

/// A validated scenario, ready to run.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub description: Option<String>,
    pub cells: Vec<CellConfig<f64>>,
    pub link: FhLink<f64>,
    pub epsilon: f64,
    pub load_scale: f64,
    pub fh_overhead: f64,
    /// Fixed splits to compare against the adaptive optimum.
    pub fixed_splits: Vec<Split>,
    pub periods: Vec<Period>,
    pub op_table: OpCountTable,
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Scenario> {
        let doc: ScenarioDoc = serde_json::from_str(text).map_err(|e| Error::Schema {
            path: "<document>".into(),
            message: e.to_string(),
        })?;
        Scenario::from_doc(doc)
    }

    pub fn from_path(path: &Path) -> Result<Scenario> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Scenario::from_json(&text)
    }

    pub fn bundled_default() -> Scenario {
        Scenario::from_json(DEFAULT_SCENARIO_JSON).expect("bundled scenario is valid")
    }

    fn from_doc(doc: ScenarioDoc) -> Result<Scenario> {
        let cells = doc.cells.unwrap_or_else(|| vec![CellConfig::default(); 3]);
        if cells.is_empty() {
            return Err(Error::Schema {
                path: "cells".into(),
                message: "at least one sector required".into(),
            });
        }
        for (i, cell) in cells.iter().enumerate() {
            cell.validate().map_err(|e| Error::Schema {
                path: format!("cells[{i}]"),
                message: e.to_string(),
            })?;
        }
        let link = FhLink::new(doc.link.capacity_gbps).map_err(|e| Error::Schema {
            path: "link.capacity_gbps".into(),
            message: e.to_string(),
        })?;
        if doc.epsilon < 1.0 {
            return Err(Error::Schema {
                path: "epsilon".into(),
                message: format!("{} must be >= 1", doc.epsilon),
            });
        }
        if !(doc.load_scale > 0.0 && doc.load_scale <= 1.0) {
            return Err(Error::Schema {
                path: "load_scale".into(),
                message: format!("{} not in (0,1]", doc.load_scale),
            });
        }
        if !(doc.fh_overhead >= 1.0) {
            return Err(Error::Schema {
                path: "fh_overhead".into(),
                message: format!("{} must be >= 1", doc.fh_overhead),
            });
        }
        let fixed_splits = match &doc.fixed_splits {
            None => Split::ALL.to_vec(),
            Some(names) => {
                let mut list = Vec::with_capacity(names.len());
                for (i, name) in names.iter().enumerate() {
                    list.push(name.parse::<Split>().map_err(|e| Error::Schema {
                        path: format!("fixed_splits[{i}]"),
                        message: e.to_string(),
                    })?);
                }
                list
            }
        };
        if doc.periods.is_empty() {
            return Err(Error::Schema {
                path: "periods".into(),
                message: "at least one period required".into(),
            });
        }
        for (i, period) in doc.periods.iter().enumerate() {
            if !(0.0..=1.0).contains(&period.aggregate_load) {
                return Err(Error::Schema {
                    path: format!("periods[{i}].aggregate_load"),
                    message: format!("{} not in [0,1]", period.aggregate_load),
                });
            }
            if period.sector_shares.len() != cells.len() {
                return Err(Error::Schema {
                    path: format!("periods[{i}].sector_shares"),
                    message: format!(
                        "{} shares for {} sectors",
                        period.sector_shares.len(),
                        cells.len()
                    ),
                });
            }
            if period.sector_shares.iter().any(|s| *s < 0.0) {
                return Err(Error::Schema {
                    path: format!("periods[{i}].sector_shares"),
                    message: "shares must be non-negative".into(),
                });
            }
            let sum: f64 = period.sector_shares.iter().sum();
            if (sum - 1.0).abs() > 1e-9 {
                return Err(Error::Schema {
                    path: format!("periods[{i}].sector_shares"),
                    message: format!("sum {sum} != 1"),
                });
            }
            if period.hours[1] <= period.hours[0] {
                return Err(Error::Schema {
                    path: format!("periods[{i}].hours"),
                    message: format!(
                        "end {} not after start {}",
                        period.hours[1], period.hours[0]
                    ),
                });
            }
        }
        Ok(Scenario {
            description: doc.description,
            cells,
            link,
            epsilon: doc.epsilon,
            load_scale: doc.load_scale,
            fh_overhead: doc.fh_overhead,
            fixed_splits,
            periods: doc.periods,
            op_table: OpCountTable::default(),
        })
    }

    pub fn sectors(&self) -> usize {
        self.cells.len()
    }

    /// Per-sector occupancies at one period:
    /// aggregate_load * share * sector_count * load_scale, clamped to [0,1].
    pub fn occupancies(&self, period: &Period) -> Vec<f64> {
        let s = self.sectors() as f64;
        period
            .sector_shares
            .iter()
            .map(|share| (period.aggregate_load * share * s * self.load_scale).clamp(0.0, 1.0))
            .collect()
    }

    pub fn load_points(&self, period: &Period) -> Vec<LoadPoint<f64>> {
        self.occupancies(period)
            .into_iter()
            .enumerate()
            .map(|(i, occ)| LoadPoint {
                sector_id: i,
                occupancy: occ,
                label: Some(period.label.clone()),
            })
            .collect()
    }

    pub fn site(&self) -> Site<f64> {
        Site {
            cells: self.cells.clone(),
            op_table: self.op_table.clone(),
            fh_overhead: self.fh_overhead,
        }
    }
}

/// Load a scenario from a JSON document string.
pub fn load_scenario(text: &str) -> Result<Scenario> {
    Scenario::from_json(text)
}

/// Model knobs recorded with every run so results are reproducible.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetadata {
    pub method: Method,
    pub sectors: usize,
    pub epsilon: f64,
    pub capacity_gbps: f64,
    pub load_scale: f64,
    pub fh_overhead: f64,
    /// How IQ bits are counted: n_iq covers I and Q of one complex sample.
    pub n_iq_convention: String,
    /// SHA-256 of the execution-granularity table behind the GOPS figures.
    pub granularity_table_sha256: String,
}

/// One fixed split evaluated across all sectors of one period.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixedEval {
    pub objective_gops: f64,
    pub fh: FhDemand<f64>,
    pub feasible: bool,
    /// Percentage above the adaptive optimum; None when the optimum itself
    /// is infeasible or zero.
    pub pct_diff: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodResult {
    pub label: String,
    pub hours: [f64; 2],
    pub aggregate_load: f64,
    pub occupancies: Vec<f64>,
    pub optimum: Solution<f64>,
    pub fixed: BTreeMap<Split, FixedEval>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioResult {
    pub metadata: RunMetadata,
    pub periods: Vec<PeriodResult>,
}

impl ScenarioResult {
    pub fn optimum_splits(&self) -> Vec<Vec<Split>> {
        self.periods
            .iter()
            .map(|p| p.optimum.splits.clone())
            .collect()
    }
}

pub fn granularity_table_sha256() -> String {
    let digest = Sha256::digest(granularity_table_description().as_bytes());
    format!("{digest:x}")
}

/// Run the optimizer and the fixed-split comparison over every period.
pub fn run(scenario: &Scenario, method: Method) -> Result<ScenarioResult> {
    let site = scenario.site();
    let objective = Objective::new(scenario.epsilon)?;
    let link = scenario.link;
    let mut periods = Vec::with_capacity(scenario.periods.len());
    for period in &scenario.periods {
        let loads = scenario.load_points(period);
        let optimum = match method {
            Method::Exhaustive => exhaustive_search(&site, &loads, &objective, &link)?,
            Method::Greedy => greedy_search(&site, &loads, &objective, &link)?,
        };
        let mut fixed = BTreeMap::new();
        for split in &scenario.fixed_splits {
            let sol = fixed_split_eval(*split, &site, &loads, &objective, &link)?;
            // The adaptive optimum can never lose to a feasible fixed split.
            if method == Method::Exhaustive
                && optimum.feasible
                && sol.feasible
                && sol.objective_value < optimum.objective_value * (1.0 - 1e-9)
            {
                return Err(Error::Internal(format!(
                    "fixed {split} beats the exhaustive optimum in period {}",
                    period.label
                )));
            }
            let diff = if optimum.feasible && optimum.objective_value > 0.0 {
                Some(pct_diff(&sol, &optimum)?)
            } else {
                None
            };
            fixed.insert(
                *split,
                FixedEval {
                    objective_gops: sol.objective_value,
                    fh: sol.fh,
                    feasible: sol.feasible,
                    pct_diff: diff,
                },
            );
        }
        periods.push(PeriodResult {
            label: period.label.clone(),
            hours: period.hours,
            aggregate_load: period.aggregate_load,
            occupancies: scenario.occupancies(period),
            optimum,
            fixed,
        });
    }
    Ok(ScenarioResult {
        metadata: RunMetadata {
            method,
            sectors: scenario.sectors(),
            epsilon: scenario.epsilon,
            capacity_gbps: scenario.link.capacity_gbps,
            load_scale: scenario.load_scale,
            fh_overhead: scenario.fh_overhead,
            n_iq_convention: "n_iq bits encode one complex sample (I and Q jointly)".into(),
            granularity_table_sha256: granularity_table_sha256(),
        },
        periods,
    })
}

/// Re-evaluate one split vector at one period's loads (used by the control
/// loop and by tests as a cross-check).
pub fn evaluate_at_period(
    scenario: &Scenario,
    period: &Period,
    splits: &[Split],
) -> Result<Solution<f64>> {
    let site = scenario.site();
    let objective = Objective::new(scenario.epsilon)?;
    evaluate(
        &site,
        splits,
        &scenario.load_points(period),
        &objective,
        &scenario.link,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
#[clap(rename_all = "lowercase")]
pub enum ExportFormat {
    Csv,
    Json,
    Both,
}

/// Write the result series: five CSV files plus the full JSON document.
/// Output is byte-stable for identical inputs.
pub fn export(
    result: &ScenarioResult,
    format: ExportFormat,
    out_dir: &Path,
) -> Result<Vec<std::path::PathBuf>> {
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let mut written = Vec::new();
    let write =
        |name: &str, contents: String, written: &mut Vec<std::path::PathBuf>| -> Result<()> {
            let path = out_dir.join(name);
            fs::write(&path, contents).map_err(|e| Error::io(&path, e))?;
            written.push(path);
            Ok(())
        };

    if matches!(format, ExportFormat::Csv | ExportFormat::Both) {
        let sectors = result.metadata.sectors;
        let fixed_cols: Vec<Split> = result
            .periods
            .first()
            .map(|p| p.fixed.keys().copied().collect())
            .unwrap_or_default();

        let mut splits_csv = String::from("period");
        for i in 0..sectors {
            splits_csv.push_str(&format!(",sector_{i}"));
        }
        splits_csv.push('\n');
        for p in &result.periods {
            splits_csv.push_str(&p.label);
            for s in &p.optimum.splits {
                splits_csv.push_str(&format!(",{s}"));
            }
            splits_csv.push('\n');
        }
        write("splits.csv", splits_csv, &mut written)?;

        let header = |what: &str| {
            let mut h = format!("period,{what}_optimum");
            for s in &fixed_cols {
                h.push_str(&format!(",{what}_{s}"));
            }
            h.push('\n');
            h
        };

        let mut objective_csv = header("gops");
        let mut fh_dl_csv = header("gbps_dl");
        let mut fh_ul_csv = header("gbps_ul");
        let mut pct_csv = String::from("period");
        for s in &fixed_cols {
            pct_csv.push_str(&format!(",pct_{s}"));
        }
        pct_csv.push('\n');

        for p in &result.periods {
            objective_csv.push_str(&format!("{},{:.6}", p.label, p.optimum.objective_value));
            fh_dl_csv.push_str(&format!("{},{:.3}", p.label, p.optimum.fh.dl_gbps));
            fh_ul_csv.push_str(&format!("{},{:.3}", p.label, p.optimum.fh.ul_gbps));
            pct_csv.push_str(&p.label);
            for s in &fixed_cols {
                let f = &p.fixed[s];
                objective_csv.push_str(&format!(",{:.6}", f.objective_gops));
                fh_dl_csv.push_str(&format!(",{:.3}", f.fh.dl_gbps));
                fh_ul_csv.push_str(&format!(",{:.3}", f.fh.ul_gbps));
                match f.pct_diff {
                    Some(d) if f.feasible => pct_csv.push_str(&format!(",{d:.4}")),
                    _ => pct_csv.push(','),
                }
            }
            objective_csv.push('\n');
            fh_dl_csv.push('\n');
            fh_ul_csv.push('\n');
            pct_csv.push('\n');
        }
        write("objective.csv", objective_csv, &mut written)?;
        write("fh_dl.csv", fh_dl_csv, &mut written)?;
        write("fh_ul.csv", fh_ul_csv, &mut written)?;
        write("pct_diff.csv", pct_csv, &mut written)?;
    }

    if matches!(format, ExportFormat::Json | ExportFormat::Both) {
        let json = serde_json::to_string_pretty(result)?;
        write("result.json", json + "\n", &mut written)?;
    }
    Ok(written)
}
