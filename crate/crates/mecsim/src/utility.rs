//! Per-client QoE utility ingredients.
//!
//! Everything here is a pure function of client state, decision variables and
//! catalog data: playback urgency, client priority, presentation switching
//! magnitude, transcode cost, continuous-playback support and PSNR gain, and
//! the weighted utility that drives all cache/transcode/RB decisions.

use crate::catalog::PresentationVariant;
use crate::types::Level;
use serde::{Deserialize, Serialize};

/// Weights of the utility terms.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct UtilityWeights {
    pub theta1: f64,
    pub theta2: f64,
    pub theta3: f64,
    pub theta4: f64,
    pub omega: f64,
}

impl Default for UtilityWeights {
    fn default() -> Self {
        Self {
            theta1: 0.125,
            theta2: 1.0,
            theta3: 1.0,
            theta4: 0.025,
            omega: 2.0,
        }
    }
}

/// How the availability gate treats a local cache hit that is being served.
///
/// Taken literally, the gate is `cache + transcode`, which starves clients
/// whose request is already cached locally (the cache decision is forced to
/// zero for them). The serve-aware gate also opens for a local hit selected
/// for delivery.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GatingMode {
    ServeAware,
    Literal,
}

/// Whether the PSNR term counts only newly completed frames or the full
/// received prefix.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PsnrMode {
    Incremental,
    Cumulative,
}

/// Availability of one (client, segment, level) candidate.
#[derive(Clone, Copy, Debug, Default)]
pub struct Availability {
    /// The optimizer decided to fetch-and-cache this level.
    pub decided_cache: bool,
    /// The optimizer decided to transcode to this level.
    pub decided_transcode: bool,
    /// The level is a local cache hit selected for delivery.
    pub local_hit_served: bool,
    /// Some cooperating server holds the level.
    pub peer_holds: bool,
}

impl Availability {
    /// The 0/1 indicator gating every utility term.
    pub fn gate(&self, mode: GatingMode) -> f64 {
        let mut g = u8::from(self.decided_cache) + u8::from(self.decided_transcode);
        if mode == GatingMode::ServeAware {
            g += u8::from(self.local_hit_served);
        }
        f64::from(g.min(1))
    }
}

/// Playback urgency exp(ω / (1 + BT/d)) − 1; strictly decreasing in the
/// remaining buffer time.
pub fn urgency(buffer_s: f64, seg_duration_s: f64, omega: f64) -> f64 {
    debug_assert!(seg_duration_s > 0.0);
    (omega / (1.0 + buffer_s / seg_duration_s)).exp() - 1.0
}

/// Client priority: the urgency, doubled exactly when no cooperating server
/// holds the segment (it must come from the cloud), gated by availability.
pub fn priority(avail: &Availability, mode: GatingMode, urgency: f64) -> f64 {
    let no_peer = if avail.peer_holds { 0.0 } else { 1.0 };
    avail.gate(mode) * urgency * (1.0 + no_peer)
}

/// Presentation switching magnitude in [0, 1].
pub fn switch_magnitude(level: Level, last: Level, l_min: Level, l_max: Level, active: bool) -> f64 {
    debug_assert!(l_max.0 > l_min.0);
    if !active {
        return 0.0;
    }
    f64::from(level.0.abs_diff(last.0)) / f64::from(l_max.0 - l_min.0)
}

/// Compute cycles needed to transcode a segment of the given size.
pub fn transcode_cycles(size_bytes: u64, mu_cycles_per_byte: f64) -> f64 {
    mu_cycles_per_byte * size_bytes as f64
}

/// Bytes received in one period: capacity-limited, clamped at the remainder
/// of the segment.
pub fn received_bytes(capacity_bytes_per_s: f64, td_s: f64, size_bytes: u64, sent_bytes: u64) -> u64 {
    debug_assert!(sent_bytes <= size_bytes);
    let cap = (capacity_bytes_per_s * td_s).floor().max(0.0) as u64;
    cap.min(size_bytes - sent_bytes)
}

/// Continuous playback seconds the first `bytes` of a variant can support:
/// complete frames only, a partially transferred frame contributes nothing.
pub fn playable_seconds(variant: &PresentationVariant, frame_rate: f64, bytes: u64) -> f64 {
    variant.frames_complete(bytes) as f64 / frame_rate
}

/// Ratio of newly supported playback time to the segment duration.
pub fn support_ratio(variant: &PresentationVariant, frame_rate: f64, sent: u64, delta: u64) -> f64 {
    debug_assert!(sent + delta <= variant.size_bytes);
    let duration = variant.frames() as f64 / frame_rate;
    (playable_seconds(variant, frame_rate, sent + delta) - playable_seconds(variant, frame_rate, sent))
        / duration
}

/// Sum of per-frame PSNR (dB) over frames newly completed by `delta` bytes.
pub fn psnr_gain(variant: &PresentationVariant, sent: u64, delta: u64) -> f64 {
    let before = variant.frames_complete(sent);
    let after = variant.frames_complete(sent + delta);
    variant.psnr_sum(after) - variant.psnr_sum(before)
}

/// Client-side inputs to the utility evaluation.
#[derive(Clone, Copy, Debug)]
pub struct ClientView {
    /// Remaining playable buffer seconds.
    pub buffer_s: f64,
    /// Duration of the previously received segment (urgency denominator).
    pub prev_seg_duration_s: f64,
    /// Presentation of the previous segment; `None` before the first one.
    pub last_level: Option<Level>,
    /// Bytes of the candidate variant already transmitted.
    pub sent_bytes: u64,
}

/// The weighted per-client utility of delivering one candidate level at the
/// given transmission capacity.
#[allow(clippy::too_many_arguments)]
pub fn utility(
    weights: &UtilityWeights,
    avail: &Availability,
    gating: GatingMode,
    psnr_mode: PsnrMode,
    view: &ClientView,
    variant: &PresentationVariant,
    frame_rate: f64,
    level_bounds: (Level, Level),
    capacity_bytes_per_s: f64,
    td_s: f64,
) -> f64 {
    let gate = avail.gate(gating);
    let el = urgency(view.buffer_s, view.prev_seg_duration_s, weights.omega);
    let pr = priority(avail, gating, el);

    let delta = received_bytes(capacity_bytes_per_s, td_s, variant.size_bytes, view.sent_bytes);
    let sp = support_ratio(variant, frame_rate, view.sent_bytes, delta);
    let rs = match view.last_level {
        Some(last) => {
            switch_magnitude(variant.level, last, level_bounds.0, level_bounds.1, gate > 0.0)
        }
        None => 0.0,
    };
    let psnr = match psnr_mode {
        PsnrMode::Incremental => psnr_gain(variant, view.sent_bytes, delta),
        PsnrMode::Cumulative => variant.psnr_sum(variant.frames_complete(view.sent_bytes + delta)),
    };

    weights.theta1 * pr + weights.theta2 * gate * sp - weights.theta3 * rs
        + weights.theta4 * gate * psnr
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::PEAK_MSE;

    fn variant(frame_sizes: Vec<u32>, frame_mse: Vec<f64>) -> PresentationVariant {
        PresentationVariant::new(Level(1), 1_000_000, frame_sizes, frame_mse)
    }

    fn served() -> Availability {
        Availability {
            decided_cache: true,
            peer_holds: true,
            ..Default::default()
        }
    }

    #[test]
    fn urgency_closed_forms() {
        let e2 = std::f64::consts::E.powi(2) - 1.0;
        assert!((urgency(0.0, 2.0, 2.0) - e2).abs() < 1e-12);
        assert!((e2 - 6.38906).abs() < 1e-5);
        let e1 = std::f64::consts::E - 1.0;
        assert!((urgency(2.0, 2.0, 2.0) - e1).abs() < 1e-12);
        assert!(urgency(1e12, 2.0, 2.0) < 1e-9);
    }

    #[test]
    fn priority_doubling_rules() {
        let el = 1.5;
        let mut avail = served();
        assert!((priority(&avail, GatingMode::ServeAware, el) - el).abs() < 1e-12);
        avail.peer_holds = false;
        assert!((priority(&avail, GatingMode::ServeAware, el) - 2.0 * el).abs() < 1e-12);
        let idle = Availability::default();
        assert_eq!(priority(&idle, GatingMode::ServeAware, el), 0.0);
    }

    #[test]
    fn literal_gating_ignores_local_hits() {
        let avail = Availability {
            local_hit_served: true,
            ..Default::default()
        };
        assert_eq!(avail.gate(GatingMode::ServeAware), 1.0);
        assert_eq!(avail.gate(GatingMode::Literal), 0.0);
    }

    #[test]
    fn switch_magnitude_examples() {
        let (lo, hi) = (Level(1), Level(5));
        assert_eq!(switch_magnitude(Level(5), Level(1), lo, hi, true), 1.0);
        assert_eq!(switch_magnitude(Level(3), Level(3), lo, hi, true), 0.0);
        assert_eq!(switch_magnitude(Level(2), Level(4), lo, hi, true), 0.5);
        assert_eq!(switch_magnitude(Level(5), Level(1), lo, hi, false), 0.0);
    }

    #[test]
    fn transcode_cycles_is_linear() {
        assert_eq!(transcode_cycles(1_000_000, 30.0), 3e7);
        assert_eq!(transcode_cycles(0, 30.0), 0.0);
        assert_eq!(transcode_cycles(2_000_000, 30.0), 6e7);
    }

    #[test]
    fn received_bytes_clamps() {
        assert_eq!(received_bytes(100_000.0, 0.05, 3_000, 0), 3_000);
        assert_eq!(received_bytes(20_000.0, 0.05, 3_000, 1_000), 1_000);
        assert_eq!(received_bytes(1e9, 0.05, 3_000, 3_000), 0);
    }

    #[test]
    fn playable_seconds_prefix_oracle() {
        let v = variant(vec![100; 30], vec![10.0; 30]);
        assert!((playable_seconds(&v, 30.0, 600) - 0.2).abs() < 1e-12);
        assert_eq!(playable_seconds(&v, 30.0, 0), 0.0);
        assert!((playable_seconds(&v, 30.0, v.size_bytes) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn support_ratio_examples() {
        let v = variant(vec![100; 30], vec![10.0; 30]);
        assert!((support_ratio(&v, 30.0, 0, 1_500) - 0.5).abs() < 1e-12);
        assert_eq!(support_ratio(&v, 30.0, 100, 0), 0.0);
        assert!((support_ratio(&v, 30.0, 0, v.size_bytes) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn psnr_gain_closed_forms() {
        let v = variant(vec![100, 100], vec![1.0, PEAK_MSE]);
        let full_scale = 20.0 * 255f64.log10();
        assert!((psnr_gain(&v, 0, 100) - full_scale).abs() < 1e-9);
        assert!((full_scale - 48.1308).abs() < 1e-4);
        assert!(psnr_gain(&v, 100, 100).abs() < 1e-12);
        assert_eq!(psnr_gain(&v, 0, 99), 0.0);
    }

    #[test]
    fn utility_weighted_sum() {
        // Two equal frames; one period delivers exactly the first frame with
        // MSE 1, so SP = 0.5 and the PSNR gain is 20·log10(255).
        let v = variant(vec![100, 100], vec![1.0, 1.0]);
        let w = UtilityWeights::default();
        let view = ClientView {
            buffer_s: 0.0,
            prev_seg_duration_s: 2.0,
            last_level: Some(Level(1)),
            sent_bytes: 0,
        };
        let got = utility(
            &w,
            &served(),
            GatingMode::ServeAware,
            PsnrMode::Incremental,
            &view,
            &v,
            1.0,
            (Level(1), Level(5)),
            100.0 / 0.05,
            0.05,
        );
        let expected = 0.125 * (std::f64::consts::E.powi(2) - 1.0)
            + 0.5
            + 0.025 * 20.0 * 255f64.log10();
        assert!((got - expected).abs() < 1e-9);
        assert!((got - 2.50190).abs() < 1e-5);
    }

    #[test]
    fn utility_is_zero_when_unavailable() {
        let v = variant(vec![100, 100], vec![1.0, 1.0]);
        let w = UtilityWeights::default();
        let view = ClientView {
            buffer_s: 0.0,
            prev_seg_duration_s: 2.0,
            last_level: Some(Level(4)),
            sent_bytes: 0,
        };
        let got = utility(
            &w,
            &Availability::default(),
            GatingMode::ServeAware,
            PsnrMode::Incremental,
            &view,
            &v,
            1.0,
            (Level(1), Level(5)),
            1e9,
            0.05,
        );
        assert_eq!(got, 0.0);
    }

    #[test]
    fn utility_pure_switch_penalty() {
        // Huge buffer kills urgency, zero capacity kills SP/PSNR; a max-range
        // switch with availability leaves exactly -theta3.
        let v = PresentationVariant::new(Level(5), 1_000, vec![100, 100], vec![1.0, 1.0]);
        let w = UtilityWeights::default();
        let view = ClientView {
            buffer_s: 1e12,
            prev_seg_duration_s: 2.0,
            last_level: Some(Level(1)),
            sent_bytes: 0,
        };
        let got = utility(
            &w,
            &served(),
            GatingMode::ServeAware,
            PsnrMode::Incremental,
            &view,
            &v,
            1.0,
            (Level(1), Level(5)),
            0.0,
            0.05,
        );
        assert!((got + 1.0).abs() < 1e-9);
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        fn arb_variant() -> impl Strategy<Value = PresentationVariant> {
            (2usize..40, 1u32..500, 0.5f64..1000.0).prop_map(|(frames, base, mse)| {
                let sizes: Vec<u32> = (0..frames).map(|i| base + (i as u32 * 7) % 91).collect();
                let mses: Vec<f64> = (0..frames)
                    .map(|i| mse * (1.0 + 0.3 * ((i * 13 % 7) as f64 / 7.0)))
                    .collect();
                PresentationVariant::new(Level(1), 1_000, sizes, mses)
            })
        }

        proptest! {
            #[test]
            fn urgency_strictly_decreasing(bt in 0.0f64..100.0, d in 0.5f64..10.0) {
                prop_assert!(urgency(bt, d, 2.0) > urgency(bt + 0.25, d, 2.0));
            }

            #[test]
            fn switch_bounds_and_symmetry(l in 1u8..=5, lp in 1u8..=5) {
                let v = switch_magnitude(Level(l), Level(lp), Level(1), Level(5), true);
                prop_assert!((0.0..=1.0).contains(&v));
                let w = switch_magnitude(Level(lp), Level(l), Level(1), Level(5), true);
                prop_assert!((v - w).abs() < 1e-15);
            }

            #[test]
            fn playable_seconds_monotone(v in arb_variant(), a in 0u64..10_000, b in 0u64..10_000) {
                let (lo, hi) = (a.min(b), a.max(b));
                prop_assert!(
                    playable_seconds(&v, 30.0, lo.min(v.size_bytes))
                        <= playable_seconds(&v, 30.0, hi.min(v.size_bytes))
                );
            }

            #[test]
            fn psnr_gain_additive(v in arb_variant(), phi in 0u64..5_000, a in 0u64..5_000, b in 0u64..5_000) {
                let phi = phi.min(v.size_bytes);
                let a = a.min(v.size_bytes - phi);
                let b = b.min(v.size_bytes - phi - a);
                let split = psnr_gain(&v, phi, a) + psnr_gain(&v, phi + a, b);
                let joint = psnr_gain(&v, phi, a + b);
                prop_assert!((split - joint).abs() < 1e-9);
            }

            #[test]
            fn utility_nondecreasing_in_capacity(v in arb_variant(), c1 in 0.0f64..1e7, c2 in 0.0f64..1e7) {
                let (lo, hi) = if c1 <= c2 { (c1, c2) } else { (c2, c1) };
                let w = UtilityWeights::default();
                let view = ClientView {
                    buffer_s: 1.0,
                    prev_seg_duration_s: 2.0,
                    last_level: Some(Level(3)),
                    sent_bytes: 0,
                };
                let avail = Availability { decided_cache: true, peer_holds: false, ..Default::default() };
                let eval = |c: f64| utility(
                    &w, &avail, GatingMode::ServeAware, PsnrMode::Incremental,
                    &view, &v, 30.0, (Level(1), Level(5)), c, 0.05,
                );
                prop_assert!(eval(lo) <= eval(hi) + 1e-12);
            }
        }
    }
}
