//! Intelligent Driver Model: acceleration, desired dynamic gap, obstacle
//! selection, and kinematic integration.

use serde::{Deserialize, Serialize};

use crate::light::LightState;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IdmParams {
    /// Maximum acceleration, m/s^2.
    pub a_max: f64,
    /// Comfortable braking deceleration, m/s^2.
    pub b_comfortable: f64,
    /// Minimum desired standstill gap, m.
    pub s0_m: f64,
    /// Desired time headway, s.
    #[serde(rename = "T_headway_s")]
    pub t_headway_s: f64,
    /// Free-flow acceleration exponent.
    pub delta_exponent: f64,
}

impl Default for IdmParams {
    fn default() -> Self {
        Self {
            a_max: 1.5,
            b_comfortable: 2.0,
            s0_m: 2.0,
            t_headway_s: 1.5,
            delta_exponent: 4.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Lane {
    Eastbound,
    Westbound,
}

impl std::fmt::Display for Lane {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Lane::Eastbound => write!(f, "eastbound"),
            Lane::Westbound => write!(f, "westbound"),
        }
    }
}

/// Longitudinal state of one vehicle. `x_m` is the front-bumper position
/// along the lane's travel direction, measured from the lane's upstream road
/// edge, so it is monotone increasing for both lanes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VehicleState {
    pub id: u64,
    pub lane: Lane,
    pub x_m: f64,
    pub v_mps: f64,
    /// Desired (free-flow) speed.
    pub v0_mps: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ObstacleKind {
    LeadVehicle,
    StopLine,
    PedestrianBuffer,
    None,
}

/// What the vehicle is reacting to: the governing gap and closing speed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObstacleView {
    pub gap_m: f64,
    pub closing_speed_mps: f64,
    pub kind: ObstacleKind,
}

impl ObstacleView {
    pub const NONE: ObstacleView = ObstacleView {
        gap_m: f64::INFINITY,
        closing_speed_mps: 0.0,
        kind: ObstacleKind::None,
    };
}

/// Inputs to obstacle selection for one vehicle, gaps measured
/// front-bumper to rear-bumper (lead) or front-bumper to line (static).
#[derive(Debug, Clone, Copy)]
pub struct ObstacleCandidates {
    /// Gap and speed of the lead vehicle in the same lane, if any.
    pub lead: Option<(f64, f64)>,
    pub light: LightState,
    /// Front bumper to the stop line; negative once past it.
    pub stop_line_gap_m: f64,
    /// Front bumper past the crosswalk near edge but rear not yet clear.
    pub in_crosswalk: bool,
    /// Front bumper to the pedestrian buffer line, present only while the
    /// crossing pedestrian has not yet cleared this vehicle's lane.
    pub ped_buffer_gap_m: Option<f64>,
}

/// Desired dynamic gap s* = s0 + v T + v dv / (2 sqrt(a_max b)), floored at
/// s0 so strongly negative closing speeds never pull the target gap below
/// the standstill minimum.
pub fn desired_gap(v: f64, dv: f64, p: &IdmParams) -> f64 {
    let dynamic = p.s0_m + v * p.t_headway_s + v * dv / (2.0 * (p.a_max * p.b_comfortable).sqrt());
    dynamic.max(p.s0_m)
}

/// IDM acceleration a = a_max (1 - (v/v0)^delta - (s*/s)^2). With no
/// obstacle the interaction term vanishes.
pub fn idm_acceleration(v: f64, obstacle: &ObstacleView, v0: f64, p: &IdmParams) -> f64 {
    let free = 1.0 - (v / v0).powf(p.delta_exponent);
    let interaction = match obstacle.kind {
        ObstacleKind::None => 0.0,
        _ => {
            let s_star = desired_gap(v, obstacle.closing_speed_mps, p);
            (s_star / obstacle.gap_m).powi(2)
        }
    };
    p.a_max * (free - interaction)
}

/// Picks the governing obstacle: the eligible candidate that binds hardest,
/// i.e. maximizes s*/gap (equivalently, minimizes the IDM acceleration).
/// Gap alone would mislead: a follower tailgating a vehicle that is running
/// the light would inherit the run, since its lead gap is smaller than its
/// stop-line gap even though the stop line demands far more braking.
///
/// - The lead vehicle always counts.
/// - The stop line counts only on yellow/red, only while the vehicle is
///   before it, and only if the vehicle can stop comfortably
///   (gap >= v^2 / (2 b_comfortable)). A vehicle that cannot proceeds and
///   clears the crosswalk.
/// - The pedestrian buffer line always counts while the vehicle is before
///   it, regardless of light state: a driver brakes as hard as needed for a
///   pedestrian in their path. Vehicles already past the line are committed
///   and proceed.
/// - A vehicle already inside the crosswalk span ignores both static lines.
pub fn select_obstacle(v: f64, c: &ObstacleCandidates, p: &IdmParams) -> ObstacleView {
    let mut best = ObstacleView::NONE;
    let mut best_ratio = 0.0;
    let mut consider = |gap: f64, dv: f64, kind: ObstacleKind| {
        if gap <= 0.0 {
            return;
        }
        let ratio = desired_gap(v, dv, p) / gap;
        if ratio > best_ratio {
            best_ratio = ratio;
            best = ObstacleView {
                gap_m: gap,
                closing_speed_mps: dv,
                kind,
            };
        }
    };

    if let Some((gap, lead_v)) = c.lead {
        consider(gap, v - lead_v, ObstacleKind::LeadVehicle);
    }

    let comfortable_stop = |gap: f64| gap >= v * v / (2.0 * p.b_comfortable);

    if !c.in_crosswalk {
        if c.light != LightState::Green && comfortable_stop(c.stop_line_gap_m) {
            consider(c.stop_line_gap_m, v, ObstacleKind::StopLine);
        }
        if let Some(gap) = c.ped_buffer_gap_m {
            consider(gap, v, ObstacleKind::PedestrianBuffer);
        }
    }

    best
}

/// Semi-implicit Euler step with speed clamped at zero (vehicles never
/// reverse).
pub fn step_vehicle(state: &VehicleState, a: f64, dt: f64) -> VehicleState {
    let v = (state.v_mps + a * dt).max(0.0);
    VehicleState {
        x_m: state.x_m + v * dt,
        v_mps: v,
        ..*state
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn defaults() -> IdmParams {
        IdmParams::default()
    }

    #[test]
    fn desired_gap_standing() {
        assert_eq!(desired_gap(0.0, 0.0, &defaults()), 2.0);
    }

    #[test]
    fn desired_gap_hand_values() {
        let p = defaults();
        assert!((desired_gap(10.0, 0.0, &p) - 17.0).abs() < 1e-12);
        // 2 + 15 + 50 / (2 sqrt(3))
        let expected = 17.0 + 50.0 / (2.0 * 3.0f64.sqrt());
        assert!((desired_gap(10.0, 5.0, &p) - expected).abs() < 1e-12);
        assert!((desired_gap(10.0, 5.0, &p) - 31.4337567).abs() < 1e-6);
    }

    #[test]
    fn desired_gap_floored_at_s0() {
        // Strongly negative closing speed would otherwise drag s* below s0.
        let p = defaults();
        assert_eq!(desired_gap(5.0, -100.0, &p), p.s0_m);
    }

    #[test]
    fn free_flow_equilibrium_is_exact_zero() {
        let a = idm_acceleration(15.0, &ObstacleView::NONE, 15.0, &defaults());
        assert!(a.abs() < 1e-12);
    }

    #[test]
    fn standing_start_free_road() {
        let a = idm_acceleration(0.0, &ObstacleView::NONE, 15.0, &defaults());
        assert!((a - 1.5).abs() < 1e-12);
    }

    #[test]
    fn interaction_hand_value() {
        let obstacle = ObstacleView {
            gap_m: 20.0,
            closing_speed_mps: 0.0,
            kind: ObstacleKind::LeadVehicle,
        };
        let a = idm_acceleration(10.0, &obstacle, 15.0, &defaults());
        let expected = 1.5 * (1.0 - (2.0f64 / 3.0).powi(4) - (17.0f64 / 20.0).powi(2));
        assert!((a - expected).abs() < 1e-12);
        assert!((a - 0.120).abs() < 1e-3);
    }

    #[test]
    fn acceleration_monotone_in_gap() {
        let p = defaults();
        let mut last = f64::NEG_INFINITY;
        for i in 1..200 {
            let obstacle = ObstacleView {
                gap_m: i as f64 * 0.5,
                closing_speed_mps: 2.0,
                kind: ObstacleKind::LeadVehicle,
            };
            let a = idm_acceleration(12.0, &obstacle, 15.0, &p);
            assert!(a >= last);
            last = a;
        }
    }

    #[test]
    fn stop_line_skipped_when_stop_is_uncomfortable() {
        // v = 12, b = 2 -> stopping distance 36 m > 30 m gap: proceed.
        let c = ObstacleCandidates {
            lead: None,
            light: LightState::Red,
            stop_line_gap_m: 30.0,
            in_crosswalk: false,
            ped_buffer_gap_m: None,
        };
        let view = select_obstacle(12.0, &c, &defaults());
        assert_eq!(view.kind, ObstacleKind::None);
    }

    #[test]
    fn stop_line_selected_when_stoppable() {
        let c = ObstacleCandidates {
            lead: None,
            light: LightState::Red,
            stop_line_gap_m: 50.0,
            in_crosswalk: false,
            ped_buffer_gap_m: None,
        };
        let view = select_obstacle(12.0, &c, &defaults());
        assert_eq!(view.kind, ObstacleKind::StopLine);
        assert_eq!(view.gap_m, 50.0);
        // Static obstacle: closing speed is the vehicle's own speed.
        assert_eq!(view.closing_speed_mps, 12.0);
    }

    #[test]
    fn green_free_road() {
        let c = ObstacleCandidates {
            lead: None,
            light: LightState::Green,
            stop_line_gap_m: 40.0,
            in_crosswalk: false,
            ped_buffer_gap_m: None,
        };
        assert_eq!(
            select_obstacle(12.0, &c, &defaults()).kind,
            ObstacleKind::None
        );
    }

    #[test]
    fn in_crosswalk_ignores_static_lines() {
        let c = ObstacleCandidates {
            lead: None,
            light: LightState::Red,
            stop_line_gap_m: -1.0,
            in_crosswalk: true,
            ped_buffer_gap_m: Some(0.5),
        };
        assert_eq!(
            select_obstacle(3.0, &c, &defaults()).kind,
            ObstacleKind::None
        );
    }

    #[test]
    fn binding_obstacle_wins() {
        let c = ObstacleCandidates {
            lead: Some((8.0, 10.0)),
            light: LightState::Red,
            stop_line_gap_m: 12.0,
            in_crosswalk: false,
            ped_buffer_gap_m: Some(5.0),
        };
        let view = select_obstacle(3.0, &c, &defaults());
        assert_eq!(view.kind, ObstacleKind::PedestrianBuffer);
        assert_eq!(view.gap_m, 5.0);
    }

    #[test]
    fn red_light_binds_over_receding_lead() {
        // A follower 17 m behind a red-runner moving at nearly its own speed
        // must still brake for the stop line 43 m out: the line demands far
        // more deceleration even though its gap is larger.
        let c = ObstacleCandidates {
            lead: Some((17.0, 11.0)),
            light: LightState::Red,
            stop_line_gap_m: 43.0,
            in_crosswalk: false,
            ped_buffer_gap_m: None,
        };
        let view = select_obstacle(10.0, &c, &defaults());
        assert_eq!(view.kind, ObstacleKind::StopLine);
        assert_eq!(view.gap_m, 43.0);
    }

    #[test]
    fn step_uniform_motion() {
        let s = VehicleState {
            id: 0,
            lane: Lane::Eastbound,
            x_m: 0.0,
            v_mps: 10.0,
            v0_mps: 12.0,
        };
        let s2 = step_vehicle(&s, 0.0, 1.0 / 60.0);
        assert_eq!(s2.v_mps, 10.0);
        assert!((s2.x_m - 1.0 / 6.0).abs() < 1e-12);
    }

    #[test]
    fn step_clamps_speed_at_zero() {
        let s = VehicleState {
            id: 0,
            lane: Lane::Eastbound,
            x_m: 5.0,
            v_mps: 0.01,
            v0_mps: 12.0,
        };
        let s2 = step_vehicle(&s, -1.5, 1.0 / 60.0);
        assert_eq!(s2.v_mps, 0.0);
        assert_eq!(s2.x_m, 5.0);
    }

    #[test]
    fn step_hand_value() {
        let s = VehicleState {
            id: 0,
            lane: Lane::Westbound,
            x_m: 0.0,
            v_mps: 10.0,
            v0_mps: 12.0,
        };
        let s2 = step_vehicle(&s, 1.2, 0.1);
        assert!((s2.v_mps - 10.12).abs() < 1e-12);
        assert!((s2.x_m - 1.012).abs() < 1e-12);
    }
}
