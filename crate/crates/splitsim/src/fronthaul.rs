//! Fronthaul bandwidth requirement per sector and per direction, plus the
//! aggregation of sectors onto the shared site-to-central link.
//!
//! Rates are time-averaged over the TDD frame (duty-scaled), matching the
//! shared-link dimensioning use. The instantaneous per-symbol peak is kept as
//! a secondary field.

use std::ops::Add;

use serde::{Deserialize, Serialize};

use crate::complexity::LoadPoint;
use crate::error::{Error, Result};
use crate::model::{fh_boundary, BoundaryKind, CellConfig, Direction, Split};
use crate::scalar::Scalar;

/// Fronthaul demand of a sector (or a whole site) in Gb/s per direction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound(
    serialize = "F: Serialize",
    deserialize = "F: Scalar + Deserialize<'de>"
))]
pub struct FhDemand<F> {
    pub dl_gbps: F,
    pub ul_gbps: F,
    /// Instantaneous symbol-rate demand before duty scaling.
    pub dl_peak_gbps: F,
    pub ul_peak_gbps: F,
}

impl<F: Scalar> FhDemand<F> {
    pub fn zero() -> Self {
        FhDemand {
            dl_gbps: F::zero(),
            ul_gbps: F::zero(),
            dl_peak_gbps: F::zero(),
            ul_peak_gbps: F::zero(),
        }
    }
}

impl<F: Scalar> Add for FhDemand<F> {
    type Output = FhDemand<F>;

    fn add(self, rhs: FhDemand<F>) -> FhDemand<F> {
        FhDemand {
            dl_gbps: self.dl_gbps + rhs.dl_gbps,
            ul_gbps: self.ul_gbps + rhs.ul_gbps,
            dl_peak_gbps: self.dl_peak_gbps + rhs.dl_peak_gbps,
            ul_peak_gbps: self.ul_peak_gbps + rhs.ul_peak_gbps,
        }
    }
}

/// Shared fronthaul link between the site switch and the central switch.
/// Each direction has its own capacity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound(
    serialize = "F: Serialize",
    deserialize = "F: Scalar + Deserialize<'de>"
))]
pub struct FhLink<F> {
    pub capacity_gbps: F,
}

impl<F: Scalar> FhLink<F> {
    pub fn new(capacity_gbps: F) -> Result<Self> {
        if !(capacity_gbps > F::zero()) {
            return Err(Error::InvalidConfig {
                field: "link.capacity_gbps".into(),
                message: format!("{capacity_gbps} must be positive"),
            });
        }
        Ok(FhLink { capacity_gbps })
    }

    pub fn unlimited() -> Self {
        FhLink {
            capacity_gbps: F::infinity(),
        }
    }
}

impl<F: Scalar> Default for FhLink<F> {
    fn default() -> Self {
        FhLink {
            capacity_gbps: F::of(40.0),
        }
    }
}

/// Payload bits crossing the boundary per symbol period at occupancy `occ`.
pub fn payload_bits_per_symbol<F: Scalar>(kind: BoundaryKind, cell: &CellConfig<F>, occ: F) -> F {
    let b = F::of_u32(cell.n_ant_bs);
    let u = F::of_u32(cell.n_layers);
    let grid = F::of_u32(cell.occupied_subcarriers());
    let n_iq = F::of_u32(cell.n_iq);
    let m = F::of_u32(cell.mod_order);
    match kind {
        BoundaryKind::TimeIq => b * F::of_u32(cell.n_fft + cell.n_cp) * n_iq,
        BoundaryKind::FreqIqFullGridPerAnt => b * grid * n_iq,
        BoundaryKind::FreqIqOccPerAnt => b * grid * occ * n_iq,
        BoundaryKind::FreqIqOccPerLayer => u * grid * occ * n_iq,
        BoundaryKind::CodedBits => u * grid * occ * m,
        BoundaryKind::Softbits => u * grid * occ * m * F::of_u32(cell.n_soft),
        BoundaryKind::InfoBits => u * grid * occ * m * cell.code_rate.value(),
    }
}

/// Fronthaul demand of one sector with an explicit overhead multiplier.
pub fn sector_fh_scaled<F: Scalar>(
    split: Split,
    cell: &CellConfig<F>,
    load: &LoadPoint<F>,
    overhead: F,
) -> FhDemand<F> {
    let gbps = F::of(1e-9);
    let rate = |dir: Direction| {
        let kind = fh_boundary(split, dir);
        let bits = payload_bits_per_symbol(kind, cell, load.occupancy);
        let peak = bits / cell.t_sym_s() * overhead * gbps;
        let duty = match dir {
            Direction::Dl => cell.dl_duty(),
            Direction::Ul => cell.ul_duty(),
        };
        (peak * duty, peak)
    };
    let (dl, dl_peak) = rate(Direction::Dl);
    let (ul, ul_peak) = rate(Direction::Ul);
    FhDemand {
        dl_gbps: dl,
        ul_gbps: ul,
        dl_peak_gbps: dl_peak,
        ul_peak_gbps: ul_peak,
    }
}

/// Fronthaul demand of one sector (no overhead factor).
pub fn sector_fh<F: Scalar>(
    split: Split,
    cell: &CellConfig<F>,
    load: &LoadPoint<F>,
) -> FhDemand<F> {
    sector_fh_scaled(split, cell, load, F::one())
}

/// Element-wise sum of the sector demands multiplexed by the site switch.
pub fn site_fh<F: Scalar>(
    splits: &[Split],
    cells: &[CellConfig<F>],
    loads: &[LoadPoint<F>],
    overhead: F,
) -> Result<FhDemand<F>> {
    if splits.len() != cells.len() || splits.len() != loads.len() {
        return Err(Error::LengthMismatch {
            expected: splits.len(),
            actual: cells.len().min(loads.len()),
        });
    }
    let mut total = FhDemand::zero();
    for ((split, cell), load) in splits.iter().zip(cells).zip(loads) {
        total = total + sector_fh_scaled(*split, cell, load, overhead);
    }
    Ok(total)
}

/// Both directions of the site demand fit within the link capacity.
pub fn feasible<F: Scalar>(
    splits: &[Split],
    cells: &[CellConfig<F>],
    loads: &[LoadPoint<F>],
    link: &FhLink<F>,
    overhead: F,
) -> Result<bool> {
    let demand = site_fh(splits, cells, loads, overhead)?;
    Ok(demand.dl_gbps <= link.capacity_gbps && demand.ul_gbps <= link.capacity_gbps)
}
