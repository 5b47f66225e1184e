//! Channel quality, MCS selection, BLER and per-period transmission capacity.
//!
//! The physical layer is a parameterized stand-in: log-distance pathloss,
//! per-client log-normal shadowing and per-RB Rayleigh fast fading, all
//! seeded and reproducible from (seed, period, client, RB). The MCS table
//! defaults to 15 entries with rates proportional to 3GPP CQI spectral
//! efficiencies; these are standard-derived values, not measurements.

use crate::rng::stream;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use std::io::{BufReader, BufWriter};
use std::path::Path;
use thiserror::Error;

const TAG_SHADOW: u64 = 0x5348;
const TAG_FADING: u64 = 0x4641;

#[derive(Debug, Error)]
pub enum RadioError {
    #[error("resource block set is empty")]
    EmptyRbSet,
    #[error("invalid MCS table: {0}")]
    InvalidTable(String),
    #[error("MCS table parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("mcs table io error: {0}")]
    Io(#[from] std::io::Error),
}

/// One modulation-and-coding scheme.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct McsEntry {
    /// 1-based index m.
    pub index: u8,
    /// Bits one RB carries in one scheduling period at this MCS.
    pub bits_per_rb: f64,
    /// SNR at which the block error rate crosses 0.5.
    pub midpoint_snr_db: f64,
    /// Logistic steepness of the BLER curve (per dB).
    pub slope: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct McsTable {
    entries: Vec<McsEntry>,
}

/// 3GPP CQI spectral efficiencies (bits/symbol), CQI 1..15.
const CQI_EFFICIENCY: [f64; 15] = [
    0.1523, 0.2344, 0.3770, 0.6016, 0.8770, 1.1758, 1.4766, 1.9141, 2.4063, 2.7305, 3.3223,
    3.9023, 4.5234, 5.1152, 5.5547,
];

/// Approximate CQI switching thresholds in dB.
const CQI_MIDPOINT_DB: [f64; 15] = [
    -6.7, -4.7, -2.3, 0.2, 2.4, 4.3, 5.9, 8.1, 10.3, 11.7, 14.1, 16.3, 18.7, 21.0, 22.7,
];

const RB_BANDWIDTH_HZ: f64 = 180_000.0;

impl McsTable {
    pub fn new(entries: Vec<McsEntry>) -> Result<Self, RadioError> {
        if entries.is_empty() {
            return Err(RadioError::InvalidTable("no entries".into()));
        }
        for (i, e) in entries.iter().enumerate() {
            if e.index as usize != i + 1 {
                return Err(RadioError::InvalidTable(format!(
                    "entry {} has index {}, expected contiguous 1-based indices",
                    i, e.index
                )));
            }
            if e.bits_per_rb <= 0.0 || e.slope <= 0.0 {
                return Err(RadioError::InvalidTable(format!(
                    "entry {} must have positive rate and slope",
                    e.index
                )));
            }
            if i > 0 {
                if e.bits_per_rb <= entries[i - 1].bits_per_rb {
                    return Err(RadioError::InvalidTable(
                        "bits_per_rb must strictly increase with m".into(),
                    ));
                }
                if e.midpoint_snr_db <= entries[i - 1].midpoint_snr_db {
                    return Err(RadioError::InvalidTable(
                        "midpoint_snr_db must strictly increase with m".into(),
                    ));
                }
            }
        }
        Ok(Self { entries })
    }

    /// The default 15-entry table; per-RB bits scale with the period length.
    pub fn default_lte(td_s: f64) -> Self {
        let entries = CQI_EFFICIENCY
            .iter()
            .zip(&CQI_MIDPOINT_DB)
            .enumerate()
            .map(|(i, (eff, mid))| McsEntry {
                index: i as u8 + 1,
                bits_per_rb: eff * RB_BANDWIDTH_HZ * td_s,
                midpoint_snr_db: *mid,
                slope: 1.0,
            })
            .collect();
        Self::new(entries).expect("default table is valid")
    }

    pub fn entries(&self) -> &[McsEntry] {
        &self.entries
    }

    /// Look up by 1-based index.
    pub fn get(&self, index: u8) -> Option<&McsEntry> {
        self.entries.get(index as usize - 1)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn save(&self, path: &Path) -> Result<(), RadioError> {
        let file = std::fs::File::create(path)?;
        let mut w = csv::Writer::from_writer(BufWriter::new(file));
        w.write_record(["m", "bits_per_rb_per_period", "midpoint_snr_db", "slope"])
            .map_err(csv_io)?;
        for e in &self.entries {
            w.write_record([
                e.index.to_string(),
                e.bits_per_rb.to_string(),
                e.midpoint_snr_db.to_string(),
                e.slope.to_string(),
            ])
            .map_err(csv_io)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, RadioError> {
        let file = std::fs::File::open(path)?;
        let mut r = csv::ReaderBuilder::new()
            .has_headers(true)
            .from_reader(BufReader::new(file));
        let mut entries = Vec::new();
        for (i, record) in r.records().enumerate() {
            let line = i + 2;
            let record = record.map_err(csv_io)?;
            let get = |idx: usize| -> Result<f64, RadioError> {
                record
                    .get(idx)
                    .ok_or(RadioError::Parse {
                        line,
                        msg: "missing column".into(),
                    })?
                    .parse()
                    .map_err(|e: std::num::ParseFloatError| RadioError::Parse {
                        line,
                        msg: e.to_string(),
                    })
            };
            entries.push(McsEntry {
                index: get(0)? as u8,
                bits_per_rb: get(1)?,
                midpoint_snr_db: get(2)?,
                slope: get(3)?,
            });
        }
        Self::new(entries)
    }
}

fn csv_io(e: csv::Error) -> RadioError {
    RadioError::Io(std::io::Error::new(std::io::ErrorKind::Other, e))
}

/// Block error rate at the given SNR: logistic, decreasing in SNR.
pub fn bler(snr_db: f64, entry: &McsEntry) -> f64 {
    1.0 / (1.0 + (entry.slope * (snr_db - entry.midpoint_snr_db)).exp())
}

/// Effective SNR of an RB set: arithmetic mean in dB.
pub fn effective_snr(rb_snrs_db: &[f64]) -> Result<f64, RadioError> {
    if rb_snrs_db.is_empty() {
        return Err(RadioError::EmptyRbSet);
    }
    Ok(rb_snrs_db.iter().sum::<f64>() / rb_snrs_db.len() as f64)
}

/// The MCS maximizing expected goodput over an RB set.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct McsChoice {
    pub index: u8,
    /// (1 − E) · r at the effective SNR.
    pub per_rb_goodput_bits: f64,
    /// |set| · (1 − E) · r.
    pub expected_goodput_bits: f64,
    pub bler: f64,
}

/// Pick m* = argmax (1−E)·r over the table (ties to the smaller m).
pub fn select_mcs(rb_snrs_db: &[f64], table: &McsTable) -> Result<McsChoice, RadioError> {
    let snr = effective_snr(rb_snrs_db)?;
    let mut best: Option<McsChoice> = None;
    for e in table.entries() {
        let err = bler(snr, e);
        let per_rb = (1.0 - err) * e.bits_per_rb;
        if best.map_or(true, |b| per_rb > b.per_rb_goodput_bits) {
            best = Some(McsChoice {
                index: e.index,
                per_rb_goodput_bits: per_rb,
                expected_goodput_bits: per_rb * rb_snrs_db.len() as f64,
                bler: err,
            });
        }
    }
    Ok(best.expect("table is never empty"))
}

/// Raw capacity of an RB set at one MCS, in bits per period.
pub fn capacity_bits(rb_count: usize, entry: &McsEntry) -> f64 {
    rb_count as f64 * entry.bits_per_rb
}

/// Seeded pathloss + shadowing + fast-fading channel realization.
#[derive(Clone, Debug)]
pub struct ChannelModel {
    pub pathloss_exponent: f64,
    pub shadowing_sigma_db: f64,
    /// SNR at the reference distance before shadowing and fading.
    pub ref_snr_db: f64,
    pub ref_distance_m: f64,
    seed: u64,
}

impl ChannelModel {
    pub fn new(
        pathloss_exponent: f64,
        shadowing_sigma_db: f64,
        ref_snr_db: f64,
        ref_distance_m: f64,
        seed: u64,
    ) -> Self {
        Self {
            pathloss_exponent,
            shadowing_sigma_db,
            ref_snr_db,
            ref_distance_m,
            seed,
        }
    }

    /// Per-client shadowing; constant over a run.
    fn shadow_db(&self, entity: u64) -> f64 {
        let n: f64 = StandardNormal.sample(&mut stream(self.seed, &[TAG_SHADOW, entity]));
        n * self.shadowing_sigma_db
    }

    /// SNR of one RB for one client in one period.
    pub fn snr_db(&self, entity: u64, period: u64, rb: u32, distance_m: f64) -> f64 {
        let d = distance_m.max(self.ref_distance_m);
        let pathloss = 10.0 * self.pathloss_exponent * (d / self.ref_distance_m).log10();
        let u: f64 = stream(self.seed, &[TAG_FADING, entity, period, rb as u64]).gen();
        // Rayleigh fading: power is Exp(1), expressed in dB.
        let fading_db = 10.0 * (-(1.0 - u).ln()).log10();
        self.ref_snr_db - pathloss + self.shadow_db(entity) + fading_db
    }
}
