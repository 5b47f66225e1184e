//! Video/segment/presentation data model, synthetic catalog generation and
//! catalog file IO.
//!
//! Experiments need no real video assets: a catalog is synthesized from a
//! parametric rate-distortion model. Per-frame distortion values are catalog
//! inputs to every downstream computation, never derived from pixels.

use crate::apportion::largest_remainder;
use crate::rng::stream;
use crate::types::{EntryKey, Level, SegmentKey, VideoId};
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::io::{BufReader, BufWriter};
use std::path::Path;
use thiserror::Error;

/// Peak squared pixel value for 8-bit content; PSNR = 10·log10(PEAK / MSE).
pub const PEAK_MSE: f64 = 255.0 * 255.0;

const TAG_SEGMENT_COUNT: u64 = 0x5343;
const TAG_BASE_RATE: u64 = 0x4252;
const TAG_FRAME_SIZES: u64 = 0x4653;
const TAG_FRAME_MSE: u64 = 0x464d;

#[derive(Debug, Error)]
pub enum CatalogError {
    #[error("invalid catalog parameters: {0}")]
    InvalidSpec(String),
    #[error("catalog parse error at line {line}, field `{field}`: {msg}")]
    Parse {
        line: usize,
        field: String,
        msg: String,
    },
    #[error("catalog validation error at {record}, field `{field}`: {msg}")]
    Validation {
        record: String,
        field: String,
        msg: String,
    },
    #[error("catalog io error: {0}")]
    Io(#[from] std::io::Error),
}

/// One encoded variant of a segment.
#[derive(Clone, Debug, PartialEq)]
pub struct PresentationVariant {
    pub level: Level,
    pub size_bytes: u64,
    pub rate_bps: u64,
    /// Per-frame byte counts; sums to `size_bytes`.
    pub frame_sizes: Vec<u32>,
    /// Per-frame mean squared error, each in (0, 255^2].
    pub frame_mse: Vec<f64>,
    size_prefix: Vec<u64>,
    psnr_prefix: Vec<f64>,
}

impl PresentationVariant {
    pub fn new(level: Level, rate_bps: u64, frame_sizes: Vec<u32>, frame_mse: Vec<f64>) -> Self {
        let size_bytes = frame_sizes.iter().map(|&s| s as u64).sum();
        let mut size_prefix = Vec::with_capacity(frame_sizes.len() + 1);
        let mut psnr_prefix = Vec::with_capacity(frame_sizes.len() + 1);
        size_prefix.push(0);
        psnr_prefix.push(0.0);
        let mut bytes = 0u64;
        let mut psnr = 0.0f64;
        for (sz, mse) in frame_sizes.iter().zip(&frame_mse) {
            bytes += *sz as u64;
            psnr += 10.0 * (PEAK_MSE / mse).log10();
            size_prefix.push(bytes);
            psnr_prefix.push(psnr);
        }
        Self {
            level,
            size_bytes,
            rate_bps,
            frame_sizes,
            frame_mse,
            size_prefix,
            psnr_prefix,
        }
    }

    pub fn frames(&self) -> usize {
        self.frame_sizes.len()
    }

    /// Number of complete frames whose byte prefix fits in `bytes`.
    pub fn frames_complete(&self, bytes: u64) -> usize {
        // size_prefix is sorted; partition_point finds the last prefix <= bytes.
        self.size_prefix.partition_point(|&p| p <= bytes) - 1
    }

    /// Sum of per-frame PSNR (dB) over the first `frames` frames.
    pub fn psnr_sum(&self, frames: usize) -> f64 {
        self.psnr_prefix[frames.min(self.frames())]
    }

    /// Mean MSE across frames.
    pub fn mean_mse(&self) -> f64 {
        self.frame_mse.iter().sum::<f64>() / self.frame_mse.len() as f64
    }
}

/// The smallest cacheable/deliverable video unit.
#[derive(Clone, Debug, PartialEq)]
pub struct Segment {
    /// 1-based index within the video.
    pub index: u32,
    /// Playback duration in seconds; equals frames / frame rate.
    pub duration_s: f64,
    /// One variant per level, ordered level 1..=L.
    pub variants: Vec<PresentationVariant>,
}

impl Segment {
    pub fn variant(&self, level: Level) -> Option<&PresentationVariant> {
        self.variants.get(level.0 as usize - 1)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Video {
    pub id: VideoId,
    pub segments: Vec<Segment>,
}

impl Video {
    /// Number of head segments: ceil(0.15 · segment count).
    pub fn head_segments(&self) -> u32 {
        head_segment_count(self.segments.len() as u32)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct VideoCatalog {
    pub videos: Vec<Video>,
    pub frame_rate: f64,
    /// Presentation count L; every segment carries exactly this many variants.
    pub levels: u8,
}

impl VideoCatalog {
    pub fn empty() -> Self {
        Self {
            videos: Vec::new(),
            frame_rate: 30.0,
            levels: 0,
        }
    }

    pub fn video(&self, id: VideoId) -> Option<&Video> {
        self.videos.iter().find(|v| v.id == id)
    }

    pub fn segment(&self, key: SegmentKey) -> Option<&Segment> {
        self.video(key.video)
            .and_then(|v| v.segments.get(key.index as usize - 1))
    }

    pub fn variant(&self, key: EntryKey) -> Option<&PresentationVariant> {
        self.segment(key.segment()).and_then(|s| s.variant(key.level))
    }

    pub fn size_of(&self, key: EntryKey) -> Option<u64> {
        self.variant(key).map(|v| v.size_bytes)
    }

    /// Total bytes over all variants of all segments.
    pub fn total_bytes(&self) -> u64 {
        self.videos
            .iter()
            .flat_map(|v| &v.segments)
            .flat_map(|s| &s.variants)
            .map(|p| p.size_bytes)
            .sum()
    }

    pub fn level_range(&self) -> (Level, Level) {
        (Level(1), Level(self.levels.max(1)))
    }

    pub fn validate(&self) -> Result<(), CatalogError> {
        let mut seen = BTreeMap::new();
        for video in &self.videos {
            if seen.insert(video.id, ()).is_some() {
                return Err(CatalogError::Validation {
                    record: format!("{}", video.id),
                    field: "video_id".into(),
                    msg: "duplicate video id".into(),
                });
            }
            for (pos, seg) in video.segments.iter().enumerate() {
                let record = format!("{}/s{}", video.id, seg.index);
                if seg.index as usize != pos + 1 {
                    return Err(CatalogError::Validation {
                        record,
                        field: "segment_index".into(),
                        msg: format!("expected contiguous index {}", pos + 1),
                    });
                }
                if seg.variants.len() != self.levels as usize {
                    return Err(CatalogError::Validation {
                        record,
                        field: "level".into(),
                        msg: format!(
                            "expected {} variants, found {}",
                            self.levels,
                            seg.variants.len()
                        ),
                    });
                }
                let mut prev: Option<&PresentationVariant> = None;
                for (vpos, var) in seg.variants.iter().enumerate() {
                    let record = format!("{}/s{}/{}", video.id, seg.index, var.level);
                    if var.level.0 as usize != vpos + 1 {
                        return Err(CatalogError::Validation {
                            record,
                            field: "level".into(),
                            msg: format!("expected contiguous level {}", vpos + 1),
                        });
                    }
                    if var.frame_sizes.len() != var.frame_mse.len() {
                        return Err(CatalogError::Validation {
                            record,
                            field: "frame_mse".into(),
                            msg: "frame_sizes and frame_mse lengths differ".into(),
                        });
                    }
                    if var.frame_sizes.is_empty() {
                        return Err(CatalogError::Validation {
                            record,
                            field: "frame_sizes".into(),
                            msg: "variant has no frames".into(),
                        });
                    }
                    let sum: u64 = var.frame_sizes.iter().map(|&s| s as u64).sum();
                    if sum != var.size_bytes {
                        return Err(CatalogError::Validation {
                            record,
                            field: "size_bytes".into(),
                            msg: format!("frame_sizes sum {} != size_bytes {}", sum, var.size_bytes),
                        });
                    }
                    if var
                        .frame_mse
                        .iter()
                        .any(|&m| !(m > 0.0 && m <= PEAK_MSE))
                    {
                        return Err(CatalogError::Validation {
                            record,
                            field: "frame_mse".into(),
                            msg: format!("per-frame MSE must lie in (0, {PEAK_MSE}]"),
                        });
                    }
                    let dur = var.frame_sizes.len() as f64 / self.frame_rate;
                    if (dur - seg.duration_s).abs() > 1e-9 {
                        return Err(CatalogError::Validation {
                            record,
                            field: "duration_s".into(),
                            msg: format!(
                                "duration {} != frames/frame_rate {}",
                                seg.duration_s, dur
                            ),
                        });
                    }
                    if let Some(p) = prev {
                        if var.rate_bps <= p.rate_bps || var.size_bytes <= p.size_bytes {
                            return Err(CatalogError::Validation {
                                record,
                                field: "rate_bps".into(),
                                msg: "rate and size must strictly increase with level".into(),
                            });
                        }
                        if var.mean_mse() >= p.mean_mse() {
                            return Err(CatalogError::Validation {
                                record,
                                field: "frame_mse".into(),
                                msg: "segment-mean MSE must strictly decrease with level".into(),
                            });
                        }
                    }
                    prev = Some(var);
                }
            }
        }
        Ok(())
    }
}

/// ceil(0.15 · n): the number of head segments of an n-segment video.
pub fn head_segment_count(n_f: u32) -> u32 {
    debug_assert!(n_f >= 1);
    // ceil(0.15 n) = ceil(3n / 20) in exact integer arithmetic.
    (3 * n_f + 19) / 20
}

/// Parameters of synthetic catalog generation.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CatalogSpec {
    pub videos: u32,
    pub segments_min: u32,
    pub segments_max: u32,
    pub levels: u8,
    pub frame_rate: f64,
    pub frames_per_segment: u32,
    pub base_rate_bps_min: u64,
    pub base_rate_bps_max: u64,
    /// Multiplicative rate growth per level; must exceed 1.
    pub rate_growth: f64,
    /// Rate-distortion model MSE = rd_a · rate^(−rd_b).
    pub rd_a: f64,
    pub rd_b: f64,
    /// Relative per-frame size jitter in [0, 1).
    pub size_jitter: f64,
    /// Relative per-frame MSE jitter in [0, 1).
    pub mse_jitter: f64,
}

impl Default for CatalogSpec {
    fn default() -> Self {
        Self {
            videos: 24,
            segments_min: 12,
            segments_max: 24,
            levels: 5,
            frame_rate: 30.0,
            frames_per_segment: 60,
            base_rate_bps_min: 350_000,
            base_rate_bps_max: 450_000,
            rate_growth: 1.4,
            rd_a: 2.8e6,
            rd_b: 0.9,
            size_jitter: 0.4,
            mse_jitter: 0.3,
        }
    }
}

impl CatalogSpec {
    pub fn validate(&self) -> Result<(), CatalogError> {
        let fail = |msg: String| Err(CatalogError::InvalidSpec(msg));
        if self.levels < 2 {
            return fail(format!("levels must be >= 2, got {}", self.levels));
        }
        if self.base_rate_bps_min == 0 || self.base_rate_bps_max < self.base_rate_bps_min {
            return fail("base rate range must be positive and ordered".into());
        }
        if self.rate_growth <= 1.0 {
            return fail(format!(
                "rate_growth must exceed 1 to keep sizes strictly increasing, got {}",
                self.rate_growth
            ));
        }
        if self.segments_min == 0 || self.segments_max < self.segments_min {
            return fail("segment count range must be positive and ordered".into());
        }
        if self.frames_per_segment == 0 || self.frame_rate <= 0.0 {
            return fail("frames_per_segment and frame_rate must be positive".into());
        }
        if !(0.0..1.0).contains(&self.size_jitter) || !(0.0..1.0).contains(&self.mse_jitter) {
            return fail("jitters must lie in [0, 1)".into());
        }
        if self.rd_a <= 0.0 || self.rd_b <= 0.0 {
            return fail("rate-distortion coefficients must be positive".into());
        }
        // Worst-case per-frame MSE occurs at the lowest rate with positive jitter.
        let worst = self.rd_a * (self.base_rate_bps_min as f64).powf(-self.rd_b);
        let bound = worst * (1.0 + self.mse_jitter) / (1.0 - self.mse_jitter);
        if bound > PEAK_MSE {
            return fail(format!(
                "rate-distortion model yields MSE up to {bound:.1}, above the {PEAK_MSE} peak"
            ));
        }
        Ok(())
    }
}

/// Deterministically synthesize a catalog from (`spec`, `seed`).
pub fn generate_synthetic_catalog(spec: &CatalogSpec, seed: u64) -> Result<VideoCatalog, CatalogError> {
    spec.validate()?;
    let frames = spec.frames_per_segment as usize;
    // Store the canonical frame rate frames/duration so file round trips are exact.
    let duration = frames as f64 / spec.frame_rate;
    let frame_rate = frames as f64 / duration;

    let mut videos = Vec::with_capacity(spec.videos as usize);
    for vid in 0..spec.videos {
        let v = vid as u64;
        let n_segs = stream(seed, &[TAG_SEGMENT_COUNT, v])
            .gen_range(spec.segments_min..=spec.segments_max);
        let base_rate = stream(seed, &[TAG_BASE_RATE, v])
            .gen_range(spec.base_rate_bps_min..=spec.base_rate_bps_max);

        let mut segments = Vec::with_capacity(n_segs as usize);
        for si in 1..=n_segs {
            let mut variants = Vec::with_capacity(spec.levels as usize);
            let mut size_rng = stream(seed, &[TAG_FRAME_SIZES, v, si as u64]);
            // One weight vector per level keeps levels independent while the
            // segment stays deterministic.
            for l in 1..=spec.levels {
                let rate = (base_rate as f64 * spec.rate_growth.powi(l as i32 - 1)).round() as u64;
                let size = (rate as f64 * duration / 8.0).round() as u64;
                if size < frames as u64 {
                    return Err(CatalogError::InvalidSpec(format!(
                        "segment size {size} smaller than frame count {frames}"
                    )));
                }
                let weights: Vec<f64> = (0..frames)
                    .map(|_| 1.0 + spec.size_jitter * (size_rng.gen::<f64>() * 2.0 - 1.0))
                    .collect();
                let frame_sizes: Vec<u32> = largest_remainder(size, &weights)
                    .into_iter()
                    .map(|s| s as u32)
                    .collect();

                let mean_mse = spec.rd_a * (rate as f64).powf(-spec.rd_b);
                let mut mse_rng = stream(seed, &[TAG_FRAME_MSE, v, si as u64, l as u64]);
                let raw: Vec<f64> = (0..frames)
                    .map(|_| mean_mse * (1.0 + spec.mse_jitter * (mse_rng.gen::<f64>() * 2.0 - 1.0)))
                    .collect();
                // Rescale so the segment mean equals the model exactly; jitter
                // then never breaks cross-level monotonicity of the mean.
                let raw_mean = raw.iter().sum::<f64>() / frames as f64;
                let scale = mean_mse / raw_mean;
                let frame_mse: Vec<f64> = raw.iter().map(|m| m * scale).collect();

                variants.push(PresentationVariant::new(
                    Level(l),
                    rate,
                    frame_sizes,
                    frame_mse,
                ));
            }
            segments.push(Segment {
                index: si,
                duration_s: duration,
                variants,
            });
        }
        videos.push(Video {
            id: VideoId(vid),
            segments,
        });
    }

    let catalog = VideoCatalog {
        videos,
        frame_rate,
        levels: spec.levels,
    };
    catalog.validate()?;
    Ok(catalog)
}

const HEADER: [&str; 8] = [
    "video_id",
    "segment_index",
    "level",
    "size_bytes",
    "rate_bps",
    "duration_s",
    "frame_sizes",
    "frame_mse",
];

/// Write a catalog as line-oriented CSV, one record per (video, segment, level).
pub fn save_catalog(catalog: &VideoCatalog, path: &Path) -> Result<(), CatalogError> {
    let file = std::fs::File::create(path)?;
    let mut w = csv::Writer::from_writer(BufWriter::new(file));
    w.write_record(HEADER).map_err(io_of_csv)?;
    for video in &catalog.videos {
        for seg in &video.segments {
            for var in &seg.variants {
                let sizes = var
                    .frame_sizes
                    .iter()
                    .map(|s| s.to_string())
                    .collect::<Vec<_>>()
                    .join(";");
                let mses = var
                    .frame_mse
                    .iter()
                    .map(|m| m.to_string())
                    .collect::<Vec<_>>()
                    .join(";");
                w.write_record([
                    video.id.0.to_string(),
                    seg.index.to_string(),
                    var.level.0.to_string(),
                    var.size_bytes.to_string(),
                    var.rate_bps.to_string(),
                    seg.duration_s.to_string(),
                    sizes,
                    mses,
                ])
                .map_err(io_of_csv)?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

fn io_of_csv(e: csv::Error) -> CatalogError {
    CatalogError::Io(std::io::Error::new(std::io::ErrorKind::Other, e))
}

/// Load a catalog file written by [`save_catalog`]; validates all invariants.
pub fn load_catalog(path: &Path) -> Result<VideoCatalog, CatalogError> {
    let file = std::fs::File::open(path)?;
    let mut r = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(BufReader::new(file));

    let headers = r.headers().map_err(io_of_csv)?.clone();
    if headers.iter().collect::<Vec<_>>() != HEADER {
        return Err(CatalogError::Parse {
            line: 1,
            field: "header".into(),
            msg: format!("expected columns {HEADER:?}"),
        });
    }

    struct Row {
        size_bytes: u64,
        rate_bps: u64,
        duration_s: f64,
        frame_sizes: Vec<u32>,
        frame_mse: Vec<f64>,
    }
    let mut rows: BTreeMap<(u32, u32, u8), Row> = BTreeMap::new();

    for (i, record) in r.records().enumerate() {
        let line = i + 2;
        let record = record.map_err(io_of_csv)?;
        let field = |idx: usize, name: &str| -> Result<&str, CatalogError> {
            record.get(idx).ok_or_else(|| CatalogError::Parse {
                line,
                field: name.into(),
                msg: "missing field".into(),
            })
        };
        fn parse<T: std::str::FromStr>(
            s: &str,
            line: usize,
            name: &str,
        ) -> Result<T, CatalogError>
        where
            T::Err: std::fmt::Display,
        {
            s.parse().map_err(|e: T::Err| CatalogError::Parse {
                line,
                field: name.into(),
                msg: e.to_string(),
            })
        }

        let video: u32 = parse(field(0, "video_id")?, line, "video_id")?;
        let seg: u32 = parse(field(1, "segment_index")?, line, "segment_index")?;
        let level: u8 = parse(field(2, "level")?, line, "level")?;
        let size_bytes: u64 = parse(field(3, "size_bytes")?, line, "size_bytes")?;
        let rate_bps: u64 = parse(field(4, "rate_bps")?, line, "rate_bps")?;
        let duration_s: f64 = parse(field(5, "duration_s")?, line, "duration_s")?;
        let frame_sizes = field(6, "frame_sizes")?
            .split(';')
            .filter(|s| !s.is_empty())
            .map(|s| parse::<u32>(s, line, "frame_sizes"))
            .collect::<Result<Vec<_>, _>>()?;
        let frame_mse = field(7, "frame_mse")?
            .split(';')
            .filter(|s| !s.is_empty())
            .map(|s| parse::<f64>(s, line, "frame_mse"))
            .collect::<Result<Vec<_>, _>>()?;

        if rows
            .insert(
                (video, seg, level),
                Row {
                    size_bytes,
                    rate_bps,
                    duration_s,
                    frame_sizes,
                    frame_mse,
                },
            )
            .is_some()
        {
            return Err(CatalogError::Parse {
                line,
                field: "video_id".into(),
                msg: format!("duplicate record for v{video}/s{seg}/l{level}"),
            });
        }
    }

    if rows.is_empty() {
        return Ok(VideoCatalog::empty());
    }

    let levels = rows.keys().map(|k| k.2).max().unwrap();
    let mut videos: Vec<Video> = Vec::new();
    let mut frame_rate = None;
    let mut current: Option<(u32, Vec<Segment>)> = None;
    let mut seg_acc: Option<(u32, f64, Vec<PresentationVariant>)> = None;

    let flush_seg =
        |seg_acc: &mut Option<(u32, f64, Vec<PresentationVariant>)>, segs: &mut Vec<Segment>| {
            if let Some((index, duration_s, variants)) = seg_acc.take() {
                segs.push(Segment {
                    index,
                    duration_s,
                    variants,
                });
            }
        };

    for ((video, seg, level), row) in rows {
        let declared: u64 = row.frame_sizes.iter().map(|&s| s as u64).sum();
        if declared != row.size_bytes {
            return Err(CatalogError::Validation {
                record: format!("v{video}/s{seg}/l{level}"),
                field: "size_bytes".into(),
                msg: format!(
                    "frame_sizes sum {declared} != size_bytes {}",
                    row.size_bytes
                ),
            });
        }
        if current.as_ref().map(|c| c.0) != Some(video) {
            if let Some((id, mut segs)) = current.take() {
                flush_seg(&mut seg_acc, &mut segs);
                videos.push(Video {
                    id: VideoId(id),
                    segments: segs,
                });
            }
            current = Some((video, Vec::new()));
        }
        let (_, segs) = current.as_mut().unwrap();
        if seg_acc.as_ref().map(|s| s.0) != Some(seg) {
            flush_seg(&mut seg_acc, segs);
            seg_acc = Some((seg, row.duration_s, Vec::new()));
        }
        if frame_rate.is_none() && row.duration_s > 0.0 {
            frame_rate = Some(row.frame_sizes.len() as f64 / row.duration_s);
        }
        seg_acc.as_mut().unwrap().2.push(PresentationVariant::new(
            Level(level),
            row.rate_bps,
            row.frame_sizes,
            row.frame_mse,
        ));
    }
    if let Some((id, mut segs)) = current.take() {
        flush_seg(&mut seg_acc, &mut segs);
        videos.push(Video {
            id: VideoId(id),
            segments: segs,
        });
    }

    let catalog = VideoCatalog {
        videos,
        frame_rate: frame_rate.unwrap_or(30.0),
        levels,
    };
    catalog.validate()?;
    Ok(catalog)
}
