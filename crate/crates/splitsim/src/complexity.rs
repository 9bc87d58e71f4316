//! Per-function computational cost in GOPS for a sector, given its split,
//! cell configuration and load.
//!
//! Per-execution operation counts are calibrated so that at the default cell
//! parameters they reproduce the reference constants of the considered
//! algorithms exactly. Execution rates follow a fixed granularity table
//! (per symbol, per PRB, per RE or per code block) with load-dependent
//! functions scaled linearly by occupancy.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{placement_of, BbFunction, CellConfig, Direction, Side, Split};
use crate::scalar::Scalar;

/// Per-sector occupancy at one time period. A single occupancy fraction is
/// applied to both directions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(
    serialize = "F: Serialize",
    deserialize = "F: Scalar + Deserialize<'de>"
))]
pub struct LoadPoint<F> {
    pub sector_id: usize,
    pub occupancy: F,
    #[serde(default)]
    pub label: Option<String>,
}

impl<F: Scalar> LoadPoint<F> {
    pub fn new(sector_id: usize, occupancy: F) -> Result<Self> {
        if occupancy < F::zero() || occupancy > F::one() {
            return Err(Error::InvalidConfig {
                field: format!("load[{sector_id}].occupancy"),
                message: format!("{occupancy} not in [0,1]"),
            });
        }
        Ok(LoadPoint {
            sector_id,
            occupancy,
            label: None,
        })
    }
}

/// Cell parameter a per-execution count scales with, relative to its default.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScaleParam {
    BsAntennas,
    UeLayers,
    SrsLen,
    DmrsLen,
    /// Modulation alphabet size 2^m.
    ModAlphabet,
    CodedBlockLen,
}

impl ScaleParam {
    pub fn value<F: Scalar>(self, cell: &CellConfig<F>) -> f64 {
        match self {
            ScaleParam::BsAntennas => cell.n_ant_bs as f64,
            ScaleParam::UeLayers => cell.n_layers as f64,
            ScaleParam::SrsLen => cell.l_srs as f64,
            ScaleParam::DmrsLen => cell.l_dmrs as f64,
            ScaleParam::ModAlphabet => (1u64 << cell.mod_order) as f64,
            ScaleParam::CodedBlockLen => coded_block_len(cell) as f64,
        }
    }

    /// Parameter value at the default cell, the calibration point.
    pub fn default_value(self) -> f64 {
        match self {
            ScaleParam::BsAntennas => 64.0,
            ScaleParam::UeLayers => 16.0,
            ScaleParam::SrsLen => 12.0,
            ScaleParam::DmrsLen => 8.0,
            ScaleParam::ModAlphabet => 64.0,
            ScaleParam::CodedBlockLen => 12952.0,
        }
    }
}

/// Coded block length n = round(8424/r).
pub fn coded_block_len<F: Scalar>(cell: &CellConfig<F>) -> u32 {
    (8424.0 * cell.code_rate.den as f64 / cell.code_rate.num as f64).round() as u32
}

/// How the per-execution operation count of a function is computed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CountForm {
    /// Radix-4 transform: 8 * (N/4) * log4(N) operations.
    Radix4Fft,
    /// One LDPC code block: n = round(8424/r) operations.
    CodeBlock,
    /// Calibrated constant scaled by power laws of cell parameters:
    /// base * prod((param/param_default)^exponent).
    Scaled {
        base: f64,
        scaling: Vec<(ScaleParam, f64)>,
    },
    /// Fixed constant regardless of the cell.
    Constant(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OpCountEntry {
    pub algorithm: String,
    pub form: CountForm,
}

/// Per-function operation counts and the algorithm each one models.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OpCountTable {
    entries: BTreeMap<BbFunction, OpCountEntry>,
}

/// JSON override for one function: either a constant count or new power-law
/// calibration (base and/or scaling exponents).
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OpCountOverride {
    pub constant: Option<f64>,
    pub base: Option<f64>,
    pub scaling: Option<BTreeMap<ScaleParam, f64>>,
}

impl Default for OpCountTable {
    fn default() -> Self {
        let scaled = |base: f64, scaling: &[(ScaleParam, f64)]| CountForm::Scaled {
            base,
            scaling: scaling.to_vec(),
        };
        let mut entries = BTreeMap::new();
        let mut put = |f: BbFunction, algorithm: &str, form: CountForm| {
            entries.insert(
                f,
                OpCountEntry {
                    algorithm: algorithm.into(),
                    form,
                },
            );
        };
        put(BbFunction::IfftDl, "Radix-4", CountForm::Radix4Fft);
        put(BbFunction::FftUl, "Radix-4", CountForm::Radix4Fft);
        put(
            BbFunction::UlChanEst,
            "Beamspace Local LMMSE",
            scaled(
                297_984.0,
                &[
                    (ScaleParam::BsAntennas, 1.0),
                    (ScaleParam::UeLayers, 1.0),
                    (ScaleParam::DmrsLen, 1.0),
                ],
            ),
        );
        put(
            BbFunction::MimoDetect,
            "Beamspace Local LMMSE",
            scaled(
                640.0,
                &[(ScaleParam::BsAntennas, 1.0), (ScaleParam::UeLayers, 1.0)],
            ),
        );
        put(
            BbFunction::DlChanEst,
            "Beam Space Channel Estimation",
            scaled(
                727_072.0,
                &[
                    (ScaleParam::BsAntennas, 1.0),
                    (ScaleParam::UeLayers, 1.0),
                    (ScaleParam::SrsLen, 1.0),
                ],
            ),
        );
        put(
            BbFunction::PrecodeMatrix,
            "Zero Forcing",
            scaled(
                151_808.0,
                &[(ScaleParam::BsAntennas, 1.0), (ScaleParam::UeLayers, 2.0)],
            ),
        );
        put(
            BbFunction::PrecodeApply,
            "Matrix multiplication",
            scaled(
                4096.0,
                &[(ScaleParam::BsAntennas, 1.0), (ScaleParam::UeLayers, 1.0)],
            ),
        );
        put(
            BbFunction::Demodulation,
            "Maximum Likelihood",
            scaled(838.0, &[(ScaleParam::ModAlphabet, 1.0)]),
        );
        put(
            BbFunction::ChannelCoding,
            "Richardson Urbanke",
            CountForm::CodeBlock,
        );
        put(
            BbFunction::ChannelDecoding,
            "Flooding",
            scaled(181_128.0, &[(ScaleParam::CodedBlockLen, 1.0)]),
        );
        OpCountTable { entries }
    }
}

impl OpCountTable {
    pub fn entry(&self, f: BbFunction) -> Result<&OpCountEntry> {
        self.entries
            .get(&f)
            .ok_or_else(|| Error::UnsupportedFunction(f.name().into()))
    }

    pub fn algorithm(&self, f: BbFunction) -> &str {
        self.entries
            .get(&f)
            .map(|e| e.algorithm.as_str())
            .unwrap_or("unknown")
    }

    /// Operation count for one execution of `f` at the given cell parameters.
    pub fn ops_per_execution<F: Scalar>(&self, f: BbFunction, cell: &CellConfig<F>) -> Result<F> {
        let ops = match &self.entry(f)?.form {
            CountForm::Radix4Fft => {
                let n = cell.n_fft as f64;
                8.0 * (n / 4.0) * n.log(4.0)
            }
            CountForm::CodeBlock => coded_block_len(cell) as f64,
            CountForm::Scaled { base, scaling } => {
                scaling.iter().fold(*base, |acc, (param, exp)| {
                    acc * (param.value(cell) / param.default_value()).powf(*exp)
                })
            }
            CountForm::Constant(c) => *c,
        };
        Ok(F::of(ops))
    }

    /// Replace calibration for the overridden functions; the rest keep defaults.
    pub fn with_overrides(mut self, overrides: &BTreeMap<BbFunction, OpCountOverride>) -> Self {
        for (f, ov) in overrides {
            let entry = self
                .entries
                .get_mut(f)
                .expect("all functions present in default table");
            if let Some(c) = ov.constant {
                entry.form = CountForm::Constant(c);
                continue;
            }
            if ov.base.is_some() || ov.scaling.is_some() {
                let (old_base, old_scaling) = match &entry.form {
                    CountForm::Scaled { base, scaling } => (*base, scaling.clone()),
                    _ => (0.0, Vec::new()),
                };
                entry.form = CountForm::Scaled {
                    base: ov.base.unwrap_or(old_base),
                    scaling: ov
                        .scaling
                        .as_ref()
                        .map(|m| m.iter().map(|(p, e)| (*p, *e)).collect())
                        .unwrap_or(old_scaling),
                };
            }
        }
        self
    }
}

/// Executions of `f` per slot at full occupancy, and the duty cycle that
/// scales the rate to the shared TDD frame.
///
/// DL channel estimation runs per occupied PRB per UL slot: it is SRS-driven,
/// so its executions follow the UL duty even though the function sits in the
/// DL chain.
fn granularity<F: Scalar>(f: BbFunction, cell: &CellConfig<F>) -> (f64, Direction) {
    let b = cell.n_ant_bs as f64;
    let u = cell.n_layers as f64;
    let prb = cell.n_prb as f64;
    let re_per_slot = 12.0 * prb * 14.0;
    let m = cell.mod_order as f64;
    match f {
        BbFunction::IfftDl => (b * 14.0, Direction::Dl),
        BbFunction::FftUl => (b * 14.0, Direction::Ul),
        BbFunction::UlChanEst => (prb, Direction::Ul),
        BbFunction::DlChanEst => (prb, Direction::Ul),
        BbFunction::MimoDetect => (re_per_slot, Direction::Ul),
        BbFunction::PrecodeApply => (re_per_slot, Direction::Dl),
        BbFunction::PrecodeMatrix => (prb, Direction::Dl),
        BbFunction::Demodulation => (u * re_per_slot, Direction::Ul),
        BbFunction::ChannelCoding => (
            u * 12.0 * prb * m * 14.0 / coded_block_len(cell) as f64,
            Direction::Dl,
        ),
        BbFunction::ChannelDecoding => (
            u * 12.0 * prb * m * 14.0 / coded_block_len(cell) as f64,
            Direction::Ul,
        ),
    }
}

/// Executions per second of `f` at the given load.
pub fn executions_per_second<F: Scalar>(
    f: BbFunction,
    cell: &CellConfig<F>,
    load: &LoadPoint<F>,
) -> F {
    let (count_per_slot, duty_dir) = granularity(f, cell);
    let duty = match duty_dir {
        Direction::Dl => cell.dl_duty(),
        Direction::Ul => cell.ul_duty(),
    };
    F::of(count_per_slot) * load.occupancy * duty / cell.t_slot_s()
}

/// Canonical description of the execution-granularity model, emitted into
/// result metadata so downstream consumers can tell which calibration
/// produced a run.
pub fn granularity_table_description() -> String {
    let mut lines = vec![
        "rate = executions_per_slot * occupancy * duty / t_slot".to_string(),
        "IFFT_DL: B*14 per slot, DL duty".to_string(),
        "FFT_UL: B*14 per slot, UL duty".to_string(),
        "UL_CHAN_EST: N_PRB per slot, UL duty".to_string(),
        "DL_CHAN_EST: N_PRB per slot, UL duty (SRS-driven)".to_string(),
        "MIMO_DETECT: 12*N_PRB*14 per slot, UL duty".to_string(),
        "PRECODE_APPLY: 12*N_PRB*14 per slot, DL duty".to_string(),
        "PRECODE_MATRIX: N_PRB per slot, DL duty".to_string(),
        "DEMODULATION: U*12*N_PRB*14 per slot, UL duty".to_string(),
        "CHANNEL_CODING: U*12*N_PRB*m*14/n_coded per slot, DL duty".to_string(),
        "CHANNEL_DECODING: U*12*N_PRB*m*14/n_coded per slot, UL duty".to_string(),
    ];
    lines.push(
        "occupancy applied to both directions; placement does not change per-function cost".into(),
    );
    lines.join("\n")
}

/// Per-sector, per-function GOPS partitioned between BBH and BBL.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(
    serialize = "F: Serialize",
    deserialize = "F: Scalar + Deserialize<'de>"
))]
pub struct CostBreakdown<F> {
    pub sector_id: usize,
    pub per_function: BTreeMap<BbFunction, F>,
    pub bbh_gops: F,
    pub bbl_gops: F,
}

impl<F: Scalar> CostBreakdown<F> {
    pub fn total_gops(&self) -> F {
        self.bbh_gops + self.bbl_gops
    }
}

/// Compute the cost breakdown of one sector under `split`.
pub fn sector_cost<F: Scalar>(
    table: &OpCountTable,
    split: Split,
    cell: &CellConfig<F>,
    load: &LoadPoint<F>,
) -> Result<CostBreakdown<F>> {
    let placement = placement_of(split);
    let giga = F::of(1e9);
    let mut per_function = BTreeMap::new();
    let mut bbh = F::zero();
    let mut bbl = F::zero();
    for f in BbFunction::ALL {
        let gops = table.ops_per_execution(f, cell)? * executions_per_second(f, cell, load) / giga;
        match placement.side_of(f) {
            Side::Bbh => bbh += gops,
            Side::Bbl => bbl += gops,
        }
        per_function.insert(f, gops);
    }
    Ok(CostBreakdown {
        sector_id: load.sector_id,
        per_function,
        bbh_gops: bbh,
        bbl_gops: bbl,
    })
}

/// The nine reference per-execution counts at the default cell.
pub const REFERENCE_OP_COUNTS: [(BbFunction, u64); 9] = [
    (BbFunction::FftUl, 49_152),
    (BbFunction::UlChanEst, 297_984),
    (BbFunction::MimoDetect, 640),
    (BbFunction::DlChanEst, 727_072),
    (BbFunction::PrecodeMatrix, 151_808),
    (BbFunction::PrecodeApply, 4096),
    (BbFunction::Demodulation, 838),
    (BbFunction::ChannelCoding, 12_952),
    (BbFunction::ChannelDecoding, 181_128),
];
