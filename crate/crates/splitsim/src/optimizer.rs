//! Split-vector selection: minimize the weighted energy cost of the site
//! subject to the per-direction fronthaul capacity.
//!
//! The exhaustive search enumerates all 6^S combinations and is the
//! benchmark; the greedy search scales to larger sites and starts from the
//! fully centralized vector, demoting sectors until the fronthaul fits.

use serde::{Deserialize, Serialize};

use crate::complexity::{sector_cost, CostBreakdown, LoadPoint, OpCountTable};
use crate::error::{Error, Result};
use crate::fronthaul::{feasible, sector_fh_scaled, site_fh, FhDemand, FhLink};
use crate::model::{CellConfig, Split};
use crate::scalar::Scalar;

/// Guard for the exhaustive enumeration (6^8 ~ 1.7M combinations).
pub const MAX_EXHAUSTIVE_SECTORS: usize = 8;

/// Energy-cost objective: C_BBH + epsilon * C_BBL, in GOPS-equivalents.
/// epsilon is the BBL/BBH energy-cost ratio; values below 1 are rejected
/// (1 is permitted for degeneracy tests).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound(
    serialize = "F: Serialize",
    deserialize = "F: Scalar + Deserialize<'de>"
))]
pub struct Objective<F> {
    epsilon: F,
}

impl<F: Scalar> Objective<F> {
    pub fn new(epsilon: F) -> Result<Self> {
        if !(epsilon >= F::one()) {
            return Err(Error::InvalidConfig {
                field: "epsilon".into(),
                message: format!("{epsilon} must be >= 1"),
            });
        }
        Ok(Objective { epsilon })
    }

    pub fn epsilon(&self) -> F {
        self.epsilon
    }
}

impl<F: Scalar> Default for Objective<F> {
    fn default() -> Self {
        Objective {
            epsilon: F::of(2.0),
        }
    }
}

/// A site: per-sector cells plus the model knobs shared by all evaluations.
#[derive(Debug, Clone)]
pub struct Site<F> {
    pub cells: Vec<CellConfig<F>>,
    pub op_table: OpCountTable,
    pub fh_overhead: F,
}

impl<F: Scalar> Site<F> {
    pub fn new(cells: Vec<CellConfig<F>>) -> Self {
        Site {
            cells,
            op_table: OpCountTable::default(),
            fh_overhead: F::one(),
        }
    }

    pub fn sectors(&self) -> usize {
        self.cells.len()
    }
}

/// Result of evaluating or optimizing a split vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(
    serialize = "F: Serialize",
    deserialize = "F: Scalar + Deserialize<'de>"
))]
pub struct Solution<F> {
    pub splits: Vec<Split>,
    pub objective_value: F,
    pub fh: FhDemand<F>,
    pub feasible: bool,
    pub breakdowns: Vec<CostBreakdown<F>>,
    /// Number of feasible vectors within 1e-9 relative of the optimum
    /// (1 for plain evaluations).
    pub tie_count: usize,
    /// The tied optimal vectors, when the search found more than one.
    pub tied_optima: Vec<Vec<Split>>,
}

/// Evaluate a fixed split vector: objective value, fronthaul demand and
/// feasibility.
pub fn evaluate<F: Scalar>(
    site: &Site<F>,
    splits: &[Split],
    loads: &[LoadPoint<F>],
    objective: &Objective<F>,
    link: &FhLink<F>,
) -> Result<Solution<F>> {
    if splits.len() != site.cells.len() || loads.len() != site.cells.len() {
        return Err(Error::LengthMismatch {
            expected: site.cells.len(),
            actual: splits.len().min(loads.len()),
        });
    }
    let mut breakdowns = Vec::with_capacity(splits.len());
    let mut bbh = F::zero();
    let mut bbl = F::zero();
    for ((split, cell), load) in splits.iter().zip(&site.cells).zip(loads) {
        let cost = sector_cost(&site.op_table, *split, cell, load)?;
        bbh += cost.bbh_gops;
        bbl += cost.bbl_gops;
        breakdowns.push(cost);
    }
    let fh = site_fh(splits, &site.cells, loads, site.fh_overhead)?;
    let ok = feasible(splits, &site.cells, loads, link, site.fh_overhead)?;
    Ok(Solution {
        splits: splits.to_vec(),
        objective_value: bbh + objective.epsilon * bbl,
        fh,
        feasible: ok,
        breakdowns,
        tie_count: 1,
        tied_optima: Vec::new(),
    })
}

/// Per-sector per-split partial evaluation, precomputed once so that the
/// enumeration only sums.
struct SectorTable<F> {
    // [sector][split_rank] -> (bbh, bbl, dl, ul)
    rows: Vec<[(F, F, F, F); 6]>,
}

impl<F: Scalar> SectorTable<F> {
    fn build(site: &Site<F>, loads: &[LoadPoint<F>]) -> Result<Self> {
        let mut rows = Vec::with_capacity(site.cells.len());
        for (cell, load) in site.cells.iter().zip(loads) {
            let mut row = [(F::zero(), F::zero(), F::zero(), F::zero()); 6];
            for split in Split::ALL {
                let cost = sector_cost(&site.op_table, split, cell, load)?;
                let fh = sector_fh_scaled(split, cell, load, site.fh_overhead);
                row[split.rank()] = (cost.bbh_gops, cost.bbl_gops, fh.dl_gbps, fh.ul_gbps);
            }
            rows.push(row);
        }
        Ok(SectorTable { rows })
    }

    fn combo(&self, ranks: &[usize], epsilon: F) -> (F, F, F) {
        let mut value = F::zero();
        let mut dl = F::zero();
        let mut ul = F::zero();
        for (row, rank) in self.rows.iter().zip(ranks) {
            let (bbh, bbl, d, u) = row[*rank];
            value += bbh + epsilon * bbl;
            dl += d;
            ul += u;
        }
        (value, dl, ul)
    }
}

fn violation<F: Scalar>(dl: F, ul: F, cap: F) -> F {
    (dl - cap).max(F::zero()) + (ul - cap).max(F::zero())
}

fn ranks_to_splits(ranks: &[usize]) -> Vec<Split> {
    ranks
        .iter()
        .map(|r| Split::from_rank(*r).unwrap())
        .collect()
}

/// Advance a base-6 counter where the first sector is the most significant
/// digit, so the enumeration order is the centralization-lexicographic order.
fn next_combo(ranks: &mut [usize]) -> bool {
    for i in (0..ranks.len()).rev() {
        if ranks[i] < 5 {
            ranks[i] += 1;
            for r in ranks[i + 1..].iter_mut() {
                *r = 0;
            }
            return true;
        }
    }
    false
}

/// Exhaustive search over all 6^S split combinations.
///
/// Returns a feasible minimizer; ties (within 1e-9 relative) are broken by
/// the more centralized lexicographic vector, then by lower dl+ul demand.
/// When no combination is feasible the result is the infeasible-flagged
/// minimizer of the constraint violation.
pub fn exhaustive_search<F: Scalar>(
    site: &Site<F>,
    loads: &[LoadPoint<F>],
    objective: &Objective<F>,
    link: &FhLink<F>,
) -> Result<Solution<F>> {
    let sectors = site.sectors();
    if sectors == 0 {
        return Err(Error::LengthMismatch {
            expected: 1,
            actual: 0,
        });
    }
    if sectors > MAX_EXHAUSTIVE_SECTORS {
        return Err(Error::TooManySectors {
            sectors,
            max: MAX_EXHAUSTIVE_SECTORS,
        });
    }
    if loads.len() != sectors {
        return Err(Error::LengthMismatch {
            expected: sectors,
            actual: loads.len(),
        });
    }
    let table = SectorTable::build(site, loads)?;
    let cap = link.capacity_gbps;
    let eps = objective.epsilon();

    // Pass 1: best feasible value (and best-effort fallback).
    let mut best_value: Option<F> = None;
    let mut best_infeasible: Option<(F, F, Vec<usize>)> = None; // (violation, value, ranks)
    let mut ranks = vec![0usize; sectors];
    loop {
        let (value, dl, ul) = table.combo(&ranks, eps);
        if dl <= cap && ul <= cap {
            if best_value.is_none_or(|b| value < b) {
                best_value = Some(value);
            }
        } else {
            let v = violation(dl, ul, cap);
            let better = match &best_infeasible {
                None => true,
                Some((bv, bval, _)) => v < *bv || (v == *bv && value < *bval),
            };
            if better {
                best_infeasible = Some((v, value, ranks.clone()));
            }
        }
        if !next_combo(&mut ranks) {
            break;
        }
    }

    let Some(best) = best_value else {
        // No feasible combination at all.
        let (_, _, ranks) = best_infeasible.expect("non-empty enumeration");
        return evaluate(site, &ranks_to_splits(&ranks), loads, objective, link);
    };

    // Pass 2: collect ties. The first tie in enumeration order is the most
    // centralized lexicographically; among value-ties prefer lower dl+ul.
    let tol = best.abs() * F::of(1e-9) + F::of(1e-15);
    let mut ties: Vec<Vec<Split>> = Vec::new();
    let mut winner: Option<(Vec<usize>, F)> = None; // (ranks, dl+ul)
    let mut ranks = vec![0usize; sectors];
    loop {
        let (value, dl, ul) = table.combo(&ranks, eps);
        if dl <= cap && ul <= cap && (value - best).abs() <= tol {
            ties.push(ranks_to_splits(&ranks));
            if winner.is_none() {
                winner = Some((ranks.clone(), dl + ul));
            }
        }
        if !next_combo(&mut ranks) {
            break;
        }
    }
    let (winner_ranks, _) = winner.expect("best value seen in pass 1");
    let mut solution = evaluate(
        site,
        &ranks_to_splits(&winner_ranks),
        loads,
        objective,
        link,
    )?;
    solution.tie_count = ties.len();
    if ties.len() > 1 {
        solution.tied_optima = ties;
    }
    Ok(solution)
}

/// Greedy alternative to the exhaustive benchmark.
///
/// Starts fully centralized; while infeasible, demotes the sector whose
/// one-step move toward the BBL buys the largest fronthaul reduction per unit
/// of objective increase. Once feasible, re-promotes sectors one step at a
/// time while feasibility is preserved.
pub fn greedy_search<F: Scalar>(
    site: &Site<F>,
    loads: &[LoadPoint<F>],
    objective: &Objective<F>,
    link: &FhLink<F>,
) -> Result<Solution<F>> {
    let sectors = site.sectors();
    if sectors == 0 {
        return Err(Error::LengthMismatch {
            expected: 1,
            actual: 0,
        });
    }
    if loads.len() != sectors {
        return Err(Error::LengthMismatch {
            expected: sectors,
            actual: loads.len(),
        });
    }
    let table = SectorTable::build(site, loads)?;
    let cap = link.capacity_gbps;
    let eps = objective.epsilon();
    let is_feasible = |ranks: &[usize]| {
        let (_, dl, ul) = table.combo(ranks, eps);
        dl <= cap && ul <= cap
    };

    let mut ranks = vec![0usize; sectors];
    // Demotion phase.
    while !is_feasible(&ranks) {
        let (cur_value, cur_dl, cur_ul) = table.combo(&ranks, eps);
        let mut best: Option<(f64, usize)> = None; // (score, sector)
        for s in 0..sectors {
            if ranks[s] == 5 {
                continue;
            }
            let mut cand = ranks.clone();
            cand[s] += 1;
            let (value, dl, ul) = table.combo(&cand, eps);
            let fh_gain = ((cur_dl - dl) + (cur_ul - ul)).as_f64();
            if fh_gain <= 0.0 {
                continue;
            }
            let cost = (value - cur_value).as_f64();
            let score = if cost > 0.0 {
                fh_gain / cost
            } else {
                f64::INFINITY
            };
            if best.is_none_or(|(b, _)| score > b) {
                best = Some((score, s));
            }
        }
        match best {
            Some((_, s)) => ranks[s] += 1,
            None => break, // all sectors at S6 or no demotion reduces the fronthaul
        }
    }
    // Promotion phase: single-sector promotions that preserve feasibility.
    if is_feasible(&ranks) {
        loop {
            let (cur_value, _, _) = table.combo(&ranks, eps);
            let mut best: Option<(F, usize)> = None; // (objective decrease, sector)
            for s in 0..sectors {
                if ranks[s] == 0 {
                    continue;
                }
                let mut cand = ranks.clone();
                cand[s] -= 1;
                if !is_feasible(&cand) {
                    continue;
                }
                let (value, _, _) = table.combo(&cand, eps);
                let gain = cur_value - value;
                if gain < F::zero() {
                    continue;
                }
                if best.is_none_or(|(b, _)| gain > b) {
                    best = Some((gain, s));
                }
            }
            match best {
                Some((_, s)) => ranks[s] -= 1,
                None => break,
            }
        }
        // Swap refinement: promoting one sector while demoting another can
        // rebalance the fronthaul budget in ways single moves cannot reach.
        loop {
            let (cur_value, _, _) = table.combo(&ranks, eps);
            let mut best: Option<(F, usize, usize)> = None;
            for up in 0..sectors {
                if ranks[up] == 0 {
                    continue;
                }
                for down in 0..sectors {
                    if down == up || ranks[down] == 5 {
                        continue;
                    }
                    let mut cand = ranks.clone();
                    cand[up] -= 1;
                    cand[down] += 1;
                    if !is_feasible(&cand) {
                        continue;
                    }
                    let (value, _, _) = table.combo(&cand, eps);
                    let gain = cur_value - value;
                    if gain <= F::zero() {
                        continue;
                    }
                    if best.is_none_or(|(b, _, _)| gain > b) {
                        best = Some((gain, up, down));
                    }
                }
            }
            match best {
                Some((_, up, down)) => {
                    ranks[up] -= 1;
                    ranks[down] += 1;
                }
                None => break,
            }
        }
    }
    evaluate(site, &ranks_to_splits(&ranks), loads, objective, link)
}

/// Evaluate the same fixed split in every sector.
pub fn fixed_split_eval<F: Scalar>(
    split: Split,
    site: &Site<F>,
    loads: &[LoadPoint<F>],
    objective: &Objective<F>,
    link: &FhLink<F>,
) -> Result<Solution<F>> {
    evaluate(site, &vec![split; site.sectors()], loads, objective, link)
}

/// Percentage difference of a solution's objective with respect to a
/// reference (normally the exhaustive optimum).
pub fn pct_diff<F: Scalar>(solution: &Solution<F>, reference: &Solution<F>) -> Result<F> {
    if !(reference.objective_value > F::zero()) {
        return Err(Error::ZeroReference);
    }
    Ok(
        F::of(100.0) * (solution.objective_value - reference.objective_value)
            / reference.objective_value,
    )
}
