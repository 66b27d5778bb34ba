//! Probabilistic pedestrian crossing model and pedestrian kinematics.
//!
//! The crossing threshold is the clamped sum of a base threshold, a
//! waiting-time patience factor, a nearest-vehicle distance factor, a
//! traffic-light factor, and a wait-for-red bias. The result is used as a
//! Bernoulli crossing probability at each decision evaluation.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::light::LightState;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DecisionParams {
    pub base_threshold: f64,
    pub patience_divisor_green: f64,
    pub patience_divisor_yellow: f64,
    pub patience_divisor_red: f64,
    pub patience_cap_green: f64,
    pub patience_cap_yellow: f64,
    pub patience_cap_red: f64,
    pub dist_far_m: f64,
    pub dist_near_m: f64,
    pub dist_far_bonus: f64,
    pub dist_mid_bonus: f64,
    pub dist_near_penalty: f64,
    pub light_red_bonus: f64,
    pub light_yellow_far_bonus: f64,
    pub light_green_penalty: f64,
    pub wait_for_red_bias: f64,
    pub early_wait_cutoff_s: f64,
}

impl Default for DecisionParams {
    fn default() -> Self {
        Self {
            // Largest base for which the green-state threshold is
            // identically zero: -0.4 + 0.4 + 0.4 - 0.4 = 0.
            base_threshold: -0.4,
            patience_divisor_green: 20.0,
            patience_divisor_yellow: 11.5,
            patience_divisor_red: 10.0,
            patience_cap_green: 0.4,
            patience_cap_yellow: 0.5,
            patience_cap_red: 0.5,
            dist_far_m: 4.0,
            dist_near_m: 2.0,
            dist_far_bonus: 0.4,
            dist_mid_bonus: 0.1,
            dist_near_penalty: -0.4,
            light_red_bonus: 0.45,
            light_yellow_far_bonus: 0.4,
            light_green_penalty: -0.4,
            wait_for_red_bias: -0.2,
            early_wait_cutoff_s: 10.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Top,
    Bottom,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PedStatus {
    Waiting,
    Crossing,
    Arrived,
    Hit,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PedestrianState {
    pub side: Side,
    /// Disc center across the road; 0 at the bottom road edge.
    pub lateral_m: f64,
    pub speed_mps: f64,
    pub wait_s: f64,
    pub status: PedStatus,
}

impl PedestrianState {
    /// Pedestrian poised at the road edge on the given side.
    pub fn at_curb(side: Side, speed_mps: f64, road_width_m: f64, radius_m: f64) -> Self {
        let lateral_m = match side {
            Side::Bottom => -radius_m,
            Side::Top => road_width_m + radius_m,
        };
        Self {
            side,
            lateral_m,
            speed_mps,
            wait_s: 0.0,
            status: PedStatus::Waiting,
        }
    }
}

/// min(wait / divisor(light), cap(light)).
pub fn patience_factor(wait_s: f64, light: LightState, p: &DecisionParams) -> f64 {
    let (divisor, cap) = match light {
        LightState::Green => (p.patience_divisor_green, p.patience_cap_green),
        LightState::Yellow => (p.patience_divisor_yellow, p.patience_cap_yellow),
        LightState::Red => (p.patience_divisor_red, p.patience_cap_red),
    };
    (wait_s / divisor).min(cap)
}

/// Piecewise-constant in d with breakpoints at dist_near_m and dist_far_m;
/// "greater than far" is strict, so d exactly at the far breakpoint lands in
/// the middle band.
pub fn distance_factor(d: f64, p: &DecisionParams) -> f64 {
    if d > p.dist_far_m {
        p.dist_far_bonus
    } else if d > p.dist_near_m {
        p.dist_mid_bonus
    } else {
        p.dist_near_penalty
    }
}

pub fn light_factor(light: LightState, d: f64, p: &DecisionParams) -> f64 {
    match light {
        LightState::Red => p.light_red_bonus,
        LightState::Yellow => {
            if d > p.dist_far_m {
                p.light_yellow_far_bonus
            } else {
                0.0
            }
        }
        LightState::Green => p.light_green_penalty,
    }
}

/// Extra penalty during a green light and an early wait, nudging the
/// pedestrian to hold out for red.
pub fn wait_for_red_bias(light: LightState, wait_s: f64, p: &DecisionParams) -> f64 {
    if light == LightState::Green && wait_s < p.early_wait_cutoff_s {
        p.wait_for_red_bias
    } else {
        0.0
    }
}

/// Bernoulli crossing probability: the factor sum clamped to [0, 1].
pub fn crossing_threshold(light: LightState, wait_s: f64, d: f64, p: &DecisionParams) -> f64 {
    let sum = p.base_threshold
        + patience_factor(wait_s, light, p)
        + distance_factor(d, p)
        + light_factor(light, d, p)
        + wait_for_red_bias(light, wait_s, p);
    sum.clamp(0.0, 1.0)
}

/// One Bernoulli evaluation; always consumes exactly one uniform draw.
pub fn decide_cross<R: Rng + ?Sized>(rng: &mut R, threshold: f64) -> bool {
    rng.random::<f64>() < threshold
}

/// Advances a crossing pedestrian toward the opposite side; no-op for any
/// other status. Arrival is when the disc fully clears the far road edge.
pub fn step_pedestrian(
    state: &PedestrianState,
    dt: f64,
    road_width_m: f64,
    radius_m: f64,
) -> PedestrianState {
    if state.status != PedStatus::Crossing {
        return *state;
    }
    let mut next = *state;
    match state.side {
        Side::Bottom => {
            next.lateral_m += state.speed_mps * dt;
            if next.lateral_m >= road_width_m + radius_m {
                next.status = PedStatus::Arrived;
            }
        }
        Side::Top => {
            next.lateral_m -= state.speed_mps * dt;
            if next.lateral_m <= -radius_m {
                next.status = PedStatus::Arrived;
            }
        }
    }
    next
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::trial_rng;

    fn p() -> DecisionParams {
        DecisionParams::default()
    }

    #[test]
    fn patience_hand_values() {
        let p = p();
        for light in [LightState::Green, LightState::Yellow, LightState::Red] {
            assert_eq!(patience_factor(0.0, light, &p), 0.0);
        }
        // 10/20 = 0.5 capped at 0.4.
        assert_eq!(patience_factor(10.0, LightState::Green, &p), 0.4);
        assert!((patience_factor(2.3, LightState::Yellow, &p) - 0.2).abs() < 1e-12);
        assert_eq!(patience_factor(5.0, LightState::Red, &p), 0.5);
    }

    #[test]
    fn distance_bands() {
        let p = p();
        assert_eq!(distance_factor(10.0, &p), 0.4);
        assert_eq!(distance_factor(3.0, &p), 0.1);
        assert_eq!(distance_factor(1.5, &p), -0.4);
        // Boundary goes to the middle band.
        assert_eq!(distance_factor(4.0, &p), 0.1);
        assert_eq!(distance_factor(2.0, &p), -0.4);
        assert_eq!(distance_factor(f64::INFINITY, &p), 0.4);
    }

    #[test]
    fn light_factor_values() {
        let p = p();
        assert_eq!(light_factor(LightState::Red, 1.0, &p), 0.45);
        assert_eq!(light_factor(LightState::Yellow, 5.0, &p), 0.4);
        assert_eq!(light_factor(LightState::Yellow, 3.0, &p), 0.0);
        assert_eq!(light_factor(LightState::Green, 100.0, &p), -0.4);
    }

    #[test]
    fn bias_values() {
        let p = p();
        assert_eq!(wait_for_red_bias(LightState::Green, 5.0, &p), -0.2);
        assert_eq!(wait_for_red_bias(LightState::Green, 12.0, &p), 0.0);
        assert_eq!(wait_for_red_bias(LightState::Red, 5.0, &p), 0.0);
    }

    #[test]
    fn threshold_hand_values() {
        let p = p();
        // -0.4 + 0.5 + 0.4 + 0.45 = 0.95
        assert!((crossing_threshold(LightState::Red, 5.0, 10.0, &p) - 0.95).abs() < 1e-12);
        // Negative sum clamps to zero.
        assert_eq!(crossing_threshold(LightState::Green, 3.0, 1.0, &p), 0.0);
        // A sum above one caps at one.
        let generous = DecisionParams {
            base_threshold: 0.5,
            ..p
        };
        assert_eq!(
            crossing_threshold(LightState::Red, 10.0, 100.0, &generous),
            1.0
        );
    }

    #[test]
    fn green_threshold_identically_zero_at_default_base() {
        // The green-state maximum factor sum is -0.4 + 0.4 + 0.4 - 0.4 = 0,
        // so no crossing can start on green with the default base.
        let p = p();
        for w in 0..400 {
            for d10 in 0..200 {
                let t =
                    crossing_threshold(LightState::Green, w as f64 * 0.25, d10 as f64 * 0.1, &p);
                assert_eq!(t, 0.0);
            }
        }
        assert_eq!(
            crossing_threshold(LightState::Green, 1e6, f64::INFINITY, &p),
            0.0
        );
    }

    #[test]
    fn decide_cross_degenerate_thresholds() {
        let mut rng = trial_rng(3);
        for _ in 0..1000 {
            assert!(!decide_cross(&mut rng, 0.0));
            assert!(decide_cross(&mut rng, 1.0));
        }
    }

    #[test]
    fn decide_cross_frequency() {
        let mut rng = trial_rng(17);
        let n = 100_000;
        let crossed = (0..n).filter(|_| decide_cross(&mut rng, 0.95)).count();
        let freq = crossed as f64 / n as f64;
        assert!((freq - 0.95).abs() < 0.005, "freq = {freq}");
    }

    #[test]
    fn decide_cross_consumes_one_draw() {
        let mut a = trial_rng(5);
        let mut b = trial_rng(5);
        decide_cross(&mut a, 0.0);
        decide_cross(&mut b, 1.0);
        assert_eq!(a.random::<u64>(), b.random::<u64>());
    }

    #[test]
    fn pedestrian_advance_and_arrival() {
        let mut s = PedestrianState::at_curb(Side::Bottom, 1.4, 7.0, 0.3);
        s.status = PedStatus::Crossing;
        let s2 = step_pedestrian(&s, 1.0 / 60.0, 7.0, 0.3);
        assert!((s2.lateral_m - (-0.3 + 1.4 / 60.0)).abs() < 1e-12);

        // Full crossing takes (7 + 0.6) / 1.4 seconds.
        let dt = 1.0 / 60.0;
        let mut steps = 0;
        let mut cur = s;
        while cur.status == PedStatus::Crossing {
            cur = step_pedestrian(&cur, dt, 7.0, 0.3);
            steps += 1;
            assert!(steps < 100_000);
        }
        let elapsed = steps as f64 * dt;
        assert!((elapsed - 7.6 / 1.4).abs() < 0.05, "elapsed = {elapsed}");
        assert_eq!(cur.status, PedStatus::Arrived);
    }

    #[test]
    fn waiting_pedestrian_does_not_move() {
        let s = PedestrianState::at_curb(Side::Top, 1.4, 7.0, 0.3);
        assert_eq!(step_pedestrian(&s, 1.0, 7.0, 0.3), s);
    }
}
