//! Domain types for NR cells, functional splits, the PHY function chain and
//! the BBH/BBL placement each split induces.
//!
//! The split taxonomy covers the low-layer options 8, 7a, 7b, 7c, 7d and 6,
//! ordered from most to least centralized. Each split cuts the per-direction
//! PHY chain at one point; everything on the antenna side of the cut runs at
//! the BBL (far edge), the rest at the BBH (central site).

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Candidate functional splits, ordered from most to least centralized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Split {
    S8,
    S7a,
    S7b,
    S7c,
    S7d,
    S6,
}

impl Split {
    pub const ALL: [Split; 6] = [
        Split::S8,
        Split::S7a,
        Split::S7b,
        Split::S7c,
        Split::S7d,
        Split::S6,
    ];

    /// Centralization rank: 0 is the most centralized (S8), 5 the least (S6).
    pub fn rank(self) -> usize {
        self as usize
    }

    pub fn from_rank(rank: usize) -> Option<Split> {
        Split::ALL.get(rank).copied()
    }

    /// One step toward the BBL (less centralized). None when already at S6.
    pub fn toward_bbl(self) -> Option<Split> {
        Split::from_rank(self.rank() + 1)
    }

    /// One step toward the BBH (more centralized). None when already at S8.
    pub fn toward_bbh(self) -> Option<Split> {
        self.rank().checked_sub(1).and_then(Split::from_rank)
    }

    pub fn name(self) -> &'static str {
        match self {
            Split::S8 => "S8",
            Split::S7a => "S7a",
            Split::S7b => "S7b",
            Split::S7c => "S7c",
            Split::S7d => "S7d",
            Split::S6 => "S6",
        }
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Split {
    type Err = Error;

    fn from_str(s: &str) -> Result<Split> {
        match s {
            "S8" | "8" => Ok(Split::S8),
            "S7a" | "7a" => Ok(Split::S7a),
            "S7b" | "7b" => Ok(Split::S7b),
            "S7c" | "7c" => Ok(Split::S7c),
            "S7d" | "7d" => Ok(Split::S7d),
            "S6" | "6" => Ok(Split::S6),
            other => Err(Error::Schema {
                path: "split".into(),
                message: format!(
                    "unknown split name '{other}' (expected one of S8, S7a, S7b, S7c, S7d, S6)"
                ),
            }),
        }
    }
}

/// Transmission direction of a PHY function or fronthaul stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Direction {
    Dl,
    Ul,
}

/// Side of the fronthaul a function is placed on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Side {
    Bbh,
    Bbl,
}

/// Baseband PHY functions of the DL transmission and UL reception chains.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum BbFunction {
    IfftDl,
    FftUl,
    UlChanEst,
    MimoDetect,
    DlChanEst,
    PrecodeMatrix,
    PrecodeApply,
    Demodulation,
    ChannelCoding,
    ChannelDecoding,
}

impl BbFunction {
    pub const ALL: [BbFunction; 10] = [
        BbFunction::IfftDl,
        BbFunction::FftUl,
        BbFunction::UlChanEst,
        BbFunction::MimoDetect,
        BbFunction::DlChanEst,
        BbFunction::PrecodeMatrix,
        BbFunction::PrecodeApply,
        BbFunction::Demodulation,
        BbFunction::ChannelCoding,
        BbFunction::ChannelDecoding,
    ];

    /// Chain the function belongs to for placement purposes.
    ///
    /// DL channel estimation is SRS-driven (its input arrives on the UL) but
    /// it feeds the precoder, so it sits in the DL chain next to the
    /// precoding-matrix computation.
    pub fn direction(self) -> Direction {
        match self {
            BbFunction::IfftDl
            | BbFunction::PrecodeApply
            | BbFunction::PrecodeMatrix
            | BbFunction::DlChanEst
            | BbFunction::ChannelCoding => Direction::Dl,
            BbFunction::FftUl
            | BbFunction::UlChanEst
            | BbFunction::MimoDetect
            | BbFunction::Demodulation
            | BbFunction::ChannelDecoding => Direction::Ul,
        }
    }

    /// Position within the direction's chain, counted from the antenna side.
    pub fn chain_position(self) -> usize {
        match self {
            BbFunction::IfftDl => 0,
            BbFunction::PrecodeApply => 1,
            BbFunction::PrecodeMatrix => 2,
            BbFunction::DlChanEst => 3,
            BbFunction::ChannelCoding => 4,
            BbFunction::FftUl => 0,
            BbFunction::UlChanEst => 1,
            BbFunction::MimoDetect => 2,
            BbFunction::Demodulation => 3,
            BbFunction::ChannelDecoding => 4,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            BbFunction::IfftDl => "IFFT_DL",
            BbFunction::FftUl => "FFT_UL",
            BbFunction::UlChanEst => "UL_CHAN_EST",
            BbFunction::MimoDetect => "MIMO_DETECT",
            BbFunction::DlChanEst => "DL_CHAN_EST",
            BbFunction::PrecodeMatrix => "PRECODE_MATRIX",
            BbFunction::PrecodeApply => "PRECODE_APPLY",
            BbFunction::Demodulation => "DEMODULATION",
            BbFunction::ChannelCoding => "CHANNEL_CODING",
            BbFunction::ChannelDecoding => "CHANNEL_DECODING",
        }
    }
}

impl fmt::Display for BbFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Placement of the PHY chain on the two sides of the fronthaul, expressed as
/// a cut index per direction: functions with `chain_position < cut` run at
/// the BBL, the rest at the BBH. This representation makes the contiguity
/// (cut) property hold by construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Placement {
    pub dl_cut: usize,
    pub ul_cut: usize,
}

impl Placement {
    pub fn side_of(&self, f: BbFunction) -> Side {
        let cut = match f.direction() {
            Direction::Dl => self.dl_cut,
            Direction::Ul => self.ul_cut,
        };
        if f.chain_position() < cut {
            Side::Bbl
        } else {
            Side::Bbh
        }
    }

    pub fn bbl_functions(&self) -> Vec<BbFunction> {
        BbFunction::ALL
            .iter()
            .copied()
            .filter(|f| self.side_of(*f) == Side::Bbl)
            .collect()
    }

    pub fn bbh_functions(&self) -> Vec<BbFunction> {
        BbFunction::ALL
            .iter()
            .copied()
            .filter(|f| self.side_of(*f) == Side::Bbh)
            .collect()
    }

    pub fn to_map(&self) -> BTreeMap<BbFunction, Side> {
        BbFunction::ALL
            .iter()
            .map(|f| (*f, self.side_of(*f)))
            .collect()
    }
}

/// Canonical placement induced by a split.
///
/// S7a and S7b place the same functions (only FFT/IFFT at the BBL); they
/// differ in where the cut crosses the resource (de)mapping stage, which
/// carries no compute cost but changes the fronthaul payload kind.
pub fn placement_of(split: Split) -> Placement {
    match split {
        Split::S8 => Placement {
            dl_cut: 0,
            ul_cut: 0,
        },
        Split::S7a | Split::S7b => Placement {
            dl_cut: 1,
            ul_cut: 1,
        },
        Split::S7c => Placement {
            dl_cut: 4,
            ul_cut: 3,
        },
        Split::S7d => Placement {
            dl_cut: 4,
            ul_cut: 4,
        },
        Split::S6 => Placement {
            dl_cut: 5,
            ul_cut: 5,
        },
    }
}

/// Kind of payload crossing the fronthaul at the split boundary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum BoundaryKind {
    /// Time-domain IQ samples, per antenna, occupancy-independent.
    TimeIq,
    /// Frequency-domain IQ for the full active grid, per antenna, occupancy-independent.
    FreqIqFullGridPerAnt,
    /// Frequency-domain IQ for occupied REs, per antenna.
    FreqIqOccPerAnt,
    /// Frequency-domain IQ for occupied REs, per layer.
    FreqIqOccPerLayer,
    /// Coded bits (DL only).
    CodedBits,
    /// Demodulator softbits (UL only).
    Softbits,
    /// Information bits at the MAC-PHY boundary.
    InfoBits,
}

impl BoundaryKind {
    /// Whether the payload scales with cell occupancy.
    pub fn load_dependent(self) -> bool {
        !matches!(
            self,
            BoundaryKind::TimeIq | BoundaryKind::FreqIqFullGridPerAnt
        )
    }
}

/// Fronthaul payload kind at the cut of `split` in `direction`.
pub fn fh_boundary(split: Split, direction: Direction) -> BoundaryKind {
    match (split, direction) {
        (Split::S8, _) => BoundaryKind::TimeIq,
        (Split::S7a, _) => BoundaryKind::FreqIqFullGridPerAnt,
        (Split::S7b, _) => BoundaryKind::FreqIqOccPerAnt,
        (Split::S7c, _) => BoundaryKind::FreqIqOccPerLayer,
        (Split::S7d, Direction::Dl) => BoundaryKind::CodedBits,
        (Split::S7d, Direction::Ul) => BoundaryKind::Softbits,
        (Split::S6, _) => BoundaryKind::InfoBits,
    }
}

/// Code rate as an exact rational.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodeRate {
    pub num: u32,
    pub den: u32,
}

impl CodeRate {
    pub fn value<F: Scalar>(self) -> F {
        F::of_u32(self.num) / F::of_u32(self.den)
    }
}

/// TDD slot pattern over a 5-slot (70-symbol) period.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct TddPattern {
    pub dl_slots: u32,
    pub special_dl_syms: u32,
    pub special_guard_syms: u32,
    pub special_ul_syms: u32,
    pub ul_slots: u32,
}

impl Default for TddPattern {
    fn default() -> Self {
        TddPattern {
            dl_slots: 3,
            special_dl_syms: 10,
            special_guard_syms: 2,
            special_ul_syms: 2,
            ul_slots: 1,
        }
    }
}

impl TddPattern {
    pub fn period_slots(&self) -> u32 {
        self.dl_slots + self.ul_slots + 1
    }

    pub fn period_symbols(&self) -> u32 {
        14 * self.period_slots()
    }

    pub fn dl_symbols(&self) -> u32 {
        14 * self.dl_slots + self.special_dl_syms
    }

    pub fn ul_symbols(&self) -> u32 {
        14 * self.ul_slots + self.special_ul_syms
    }

    /// Fraction of symbols carrying DL (52/70 at defaults).
    pub fn dl_duty<F: Scalar>(&self) -> F {
        F::of_u32(self.dl_symbols()) / F::of_u32(self.period_symbols())
    }

    /// Fraction of symbols carrying UL (16/70 at defaults).
    pub fn ul_duty<F: Scalar>(&self) -> F {
        F::of_u32(self.ul_symbols()) / F::of_u32(self.period_symbols())
    }

    pub fn validate(&self) -> Result<()> {
        let special = self.special_dl_syms + self.special_guard_syms + self.special_ul_syms;
        if special != 14 {
            return Err(Error::InvalidConfig {
                field: "tdd".into(),
                message: format!("special slot symbols sum to {special}, expected 14"),
            });
        }
        if self.dl_symbols() + self.ul_symbols() > self.period_symbols() {
            return Err(Error::InvalidConfig {
                field: "tdd".into(),
                message: "DL and UL duty cycles exceed 1".into(),
            });
        }
        Ok(())
    }
}

/// Channel decoding parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(
    default,
    bound(
        serialize = "F: Serialize",
        deserialize = "F: Scalar + Deserialize<'de>"
    )
)]
pub struct LdpcParams<F> {
    pub bler: F,
    pub i_max: u32,
    pub d_c: u32,
    pub n_coded: u32,
    pub d_s: F,
    pub e_bits: u32,
}

impl<F: Scalar> Default for LdpcParams<F> {
    fn default() -> Self {
        LdpcParams {
            bler: F::of(0.1),
            i_max: 10,
            d_c: 2,
            n_coded: 12952,
            d_s: F::of(0.699),
            e_bits: 4528,
        }
    }
}

/// Physical parameters of one NR cell (one per sector).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(
    default,
    bound(
        serialize = "F: Serialize",
        deserialize = "F: Scalar + Deserialize<'de>"
    )
)]
pub struct CellConfig<F> {
    pub carrier_freq_ghz: F,
    pub scs_khz: F,
    pub n_prb: u32,
    pub t_slot_ms: F,
    pub t_sym_us: F,
    pub n_fft: u32,
    pub n_cp: u32,
    pub n_ant_bs: u32,
    pub n_layers: u32,
    pub l_srs: u32,
    pub l_dmrs: u32,
    pub mod_order: u32,
    pub code_rate: CodeRate,
    pub tdd: TddPattern,
    pub n_iq: u32,
    pub n_soft: u32,
    pub ldpc: LdpcParams<F>,
}

impl<F: Scalar> Default for CellConfig<F> {
    fn default() -> Self {
        CellConfig {
            carrier_freq_ghz: F::of(3.5),
            scs_khz: F::of(30.0),
            n_prb: 273,
            t_slot_ms: F::of(0.5),
            t_sym_us: F::of(500.0 / 14.0),
            n_fft: 4096,
            n_cp: 292,
            n_ant_bs: 64,
            n_layers: 16,
            l_srs: 12,
            l_dmrs: 8,
            mod_order: 6,
            code_rate: CodeRate {
                num: 666,
                den: 1024,
            },
            tdd: TddPattern::default(),
            n_iq: 32,
            n_soft: 8,
            ldpc: LdpcParams::default(),
        }
    }
}

impl<F: Scalar> CellConfig<F> {
    pub fn t_slot_s(&self) -> F {
        self.t_slot_ms * F::of(1e-3)
    }

    pub fn t_sym_s(&self) -> F {
        self.t_sym_us * F::of(1e-6)
    }

    /// Occupied subcarriers on the active grid (12 per PRB).
    pub fn occupied_subcarriers(&self) -> u32 {
        12 * self.n_prb
    }

    pub fn dl_duty(&self) -> F {
        self.tdd.dl_duty()
    }

    pub fn ul_duty(&self) -> F {
        self.tdd.ul_duty()
    }

    pub fn validate(&self) -> Result<()> {
        let err = |field: &str, message: String| {
            Err(Error::InvalidConfig {
                field: field.into(),
                message,
            })
        };
        if self.n_prb == 0 {
            return err("n_prb", "must be positive".into());
        }
        if self.t_slot_ms <= F::zero() {
            return err("t_slot_ms", "must be positive".into());
        }
        let nominal_sym = self.t_slot_ms * F::of(1000.0 / 14.0);
        let rel = ((self.t_sym_us - nominal_sym) / nominal_sym).abs();
        if rel > F::of(1e-3) {
            return err(
                "t_sym_us",
                format!(
                    "must equal t_slot/14 within 0.1% (expected {nominal_sym}, got {})",
                    self.t_sym_us
                ),
            );
        }
        let nominal_cp = self.n_fft as f64 / 14.0;
        if (self.n_cp as f64 - nominal_cp).abs() >= 1.0 {
            return err(
                "n_cp",
                format!("must be n_fft/14 rounded to an integer (~{nominal_cp:.1})"),
            );
        }
        if self.n_fft < self.occupied_subcarriers() {
            return err(
                "n_fft",
                format!(
                    "{} bins cannot hold the {} occupied subcarriers",
                    self.n_fft,
                    self.occupied_subcarriers()
                ),
            );
        }
        if self.n_layers > self.n_ant_bs {
            return err(
                "n_layers",
                format!(
                    "{} layers exceed {} BS antennas",
                    self.n_layers, self.n_ant_bs
                ),
            );
        }
        if self.code_rate.num == 0 || self.code_rate.num >= self.code_rate.den {
            return err(
                "code_rate",
                format!(
                    "{}/{} is not in (0,1)",
                    self.code_rate.num, self.code_rate.den
                ),
            );
        }
        if ![2, 4, 6, 8].contains(&self.mod_order) {
            return err(
                "mod_order",
                format!("{} not in {{2,4,6,8}}", self.mod_order),
            );
        }
        if self.n_iq == 0 || self.n_soft == 0 || self.l_srs == 0 || self.l_dmrs == 0 {
            return err("n_iq/n_soft/l_srs/l_dmrs", "must be positive".into());
        }
        self.tdd.validate()?;
        let bler = self.ldpc.bler.as_f64();
        if !(0.0 < bler && bler < 1.0) {
            return err("ldpc.bler", format!("{bler} not in (0,1)"));
        }
        let expected_coded =
            (8424.0 * self.code_rate.den as f64 / self.code_rate.num as f64).round() as u32;
        if self.ldpc.n_coded != expected_coded {
            return err(
                "ldpc.n_coded",
                format!(
                    "{} does not match round(8424/r) = {expected_coded}",
                    self.ldpc.n_coded
                ),
            );
        }
        Ok(())
    }
}
