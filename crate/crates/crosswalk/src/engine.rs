//! Single-trial engine: fixed-timestep world update, vehicle spawning,
//! collision detection, outcome determination, and event logging.
//!
//! A trial is a pure function of (seed, config). The per-step update order
//! is fixed: light -> pedestrian decision/move -> vehicle accelerations from
//! the pre-step snapshot -> vehicle integration -> spawning -> collision
//! check. Snapshot-based accelerations make the result independent of
//! vehicle iteration order.
//!
//! The trial starts at the pedestrian's arrival (t = 0) with the road
//! pre-populated: vehicles are placed at random positions along each lane
//! with exponential spacing matching the spawn process, in a state
//! consistent with the current light. Under a red light the crosswalk
//! region itself is left clear and approaching vehicles are capped to a
//! speed from which they can still stop comfortably at the stop line (they
//! have been reacting to the light for a while); under yellow and green,
//! vehicles carry their drawn speeds, including vehicles committed to
//! running the tail of a yellow.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};
use serde::{Deserialize, Serialize};

use crate::config::{sample_pedestrian_speed, sample_vehicle_speed, ValidatedConfig};
use crate::error::Result;
use crate::geometry::Rect;
use crate::idm::{
    idm_acceleration, select_obstacle, step_vehicle, Lane, ObstacleCandidates, VehicleState,
};
use crate::light::{light_state_at, sample_schedule, LightSchedule, LightState};
use crate::pedestrian::{
    crossing_threshold, decide_cross, distance_factor, light_factor, patience_factor,
    step_pedestrian, wait_for_red_bias, PedStatus, PedestrianState, Side,
};
use crate::seed::trial_rng;

/// Static geometry derived from the config. The crosswalk is centered on
/// the corridor; lane-frame positions measure front-bumper travel from each
/// lane's upstream road edge, so both lanes share the same line positions.
#[derive(Debug, Clone, Copy)]
pub struct Geometry {
    pub road_length_m: f64,
    pub road_width_m: f64,
    /// Crosswalk near/far edges in the lane frame (same for both lanes by
    /// symmetry).
    pub crosswalk_near_m: f64,
    pub crosswalk_far_m: f64,
    pub stop_line_m: f64,
    pub buffer_line_m: f64,
    /// Pedestrian walking line (corridor center), world x.
    pub ped_x_m: f64,
    pub lane_center_y: [f64; 2],
}

impl Geometry {
    pub fn new(cfg: &ValidatedConfig) -> Self {
        let half = cfg.road_length_m / 2.0;
        let near = half - cfg.crosswalk_width_m / 2.0;
        Geometry {
            road_length_m: cfg.road_length_m,
            road_width_m: f64::from(cfg.lane_count) * cfg.lane_width_m,
            crosswalk_near_m: near,
            crosswalk_far_m: half + cfg.crosswalk_width_m / 2.0,
            stop_line_m: near - cfg.stop_line_setback_m,
            buffer_line_m: near - cfg.ped_buffer_margin_m,
            ped_x_m: half,
            lane_center_y: [cfg.lane_width_m / 2.0, 1.5 * cfg.lane_width_m],
        }
    }

    fn lane_index(lane: Lane) -> usize {
        match lane {
            Lane::Eastbound => 0,
            Lane::Westbound => 1,
        }
    }

    /// Vehicle footprint in world coordinates.
    pub fn vehicle_rect(&self, v: &VehicleState, length: f64, width: f64) -> Rect {
        let cy = self.lane_center_y[Self::lane_index(v.lane)];
        let (min_x, max_x) = match v.lane {
            Lane::Eastbound => (v.x_m - length, v.x_m),
            Lane::Westbound => (
                self.road_length_m - v.x_m,
                self.road_length_m - v.x_m + length,
            ),
        };
        Rect {
            min_x,
            min_y: cy - width / 2.0,
            max_x,
            max_y: cy + width / 2.0,
        }
    }
}

/// Full per-trial world state.
pub struct WorldState {
    pub t_s: f64,
    /// Per lane, ordered front-most first (descending lane-frame position).
    pub vehicles: [Vec<VehicleState>; 2],
    pub pedestrian: PedestrianState,
    pub schedule: LightSchedule,
    pub next_spawn_s: [f64; 2],
    next_vehicle_id: u64,
}

/// Outcome record for one trial; the fields feed every reported grouping.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialOutcome {
    pub success: bool,
    /// Arrival to crossing start; for timeouts, the full trial budget.
    pub wait_s: f64,
    pub light_at_arrival: LightState,
    pub light_at_crossing: Option<LightState>,
    /// Distance to the nearest vehicle at the decision that started the
    /// crossing; infinite when no vehicle existed.
    pub nearest_vehicle_at_decision_m: Option<f64>,
    pub crossing_duration_s: Option<f64>,
    pub timeout: bool,
    pub seed: u64,
}

/// One line of the optional per-trial event log (JSON Lines).
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum Event {
    Spawn {
        t_s: f64,
        lane: Lane,
        speed_mps: f64,
    },
    LightChange {
        t_s: f64,
        from: LightState,
        to: LightState,
    },
    Decision {
        t_s: f64,
        wait_s: f64,
        light: LightState,
        nearest_vehicle_m: Option<f64>,
        patience: f64,
        distance_factor: f64,
        light_factor: f64,
        wait_for_red_bias: f64,
        threshold: f64,
        crossed: bool,
    },
    CrossingStart {
        t_s: f64,
        side: Side,
    },
    Collision {
        t_s: f64,
        vehicle_id: u64,
    },
    Arrival {
        t_s: f64,
    },
    Timeout {
        t_s: f64,
    },
}

/// Minimum over all vehicles of the distance from the pedestrian center to
/// the vehicle rectangle; infinite when the road is empty.
pub fn nearest_vehicle_distance(world: &WorldState, geom: &Geometry, cfg: &ValidatedConfig) -> f64 {
    let (px, py) = (geom.ped_x_m, world.pedestrian.lateral_m);
    world
        .vehicles
        .iter()
        .flatten()
        .map(|v| {
            geom.vehicle_rect(v, cfg.vehicle_length_m, cfg.vehicle_width_m)
                .distance_to_point(px, py)
        })
        .fold(f64::INFINITY, f64::min)
}

/// True iff the pedestrian disc strictly intersects any vehicle rectangle.
/// Returns the offending vehicle id.
pub fn detect_collision(world: &WorldState, geom: &Geometry, cfg: &ValidatedConfig) -> Option<u64> {
    let (px, py) = (geom.ped_x_m, world.pedestrian.lateral_m);
    world
        .vehicles
        .iter()
        .flatten()
        .find(|v| {
            geom.vehicle_rect(v, cfg.vehicle_length_m, cfg.vehicle_width_m)
                .intersects_disc(px, py, cfg.pedestrian_radius_m)
        })
        .map(|v| v.id)
}

/// Below this speed a vehicle counts as stopped for crosswalk etiquette:
/// it holds until the pedestrian has cleared its lane instead of pulling
/// out in front of them.
const CREEP_SPEED_MPS: f64 = 0.5;

/// Is the crossing pedestrian laterally within this lane's vehicle sweep?
/// Moving vehicles yield only while the pedestrian disc overlaps the band
/// their body sweeps; a lane not yet reached or already cleared is free.
fn ped_blocks_lane(
    ped: &PedestrianState,
    lane: Lane,
    geom: &Geometry,
    radius: f64,
    vehicle_width: f64,
) -> bool {
    if ped.status != PedStatus::Crossing {
        return false;
    }
    let center = geom.lane_center_y[Geometry::lane_index(lane)];
    (ped.lateral_m - center).abs() <= vehicle_width / 2.0 + radius
}

/// Will the crossing pedestrian's remaining path still take them through
/// this lane? Stopped vehicles assess position and crossing status: they
/// stay put until the pedestrian has cleared their lane, not merely left
/// the sweep.
fn ped_path_blocks_lane(
    ped: &PedestrianState,
    lane: Lane,
    geom: &Geometry,
    radius: f64,
    vehicle_width: f64,
) -> bool {
    if ped.status != PedStatus::Crossing {
        return false;
    }
    let center = geom.lane_center_y[Geometry::lane_index(lane)];
    let sweep = vehicle_width / 2.0 + radius;
    match ped.side {
        // Moving upward: clear once the disc is fully above the sweep band.
        Side::Bottom => ped.lateral_m <= center + sweep,
        Side::Top => ped.lateral_m >= center - sweep,
    }
}

struct StepCtx<'a> {
    cfg: &'a ValidatedConfig,
    geom: Geometry,
    exp_headway: Exp<f64>,
}

impl WorldState {
    fn advance_vehicles(&mut self, ctx: &StepCtx, light: LightState) {
        let cfg = ctx.cfg;
        let geom = &ctx.geom;
        for lane in [Lane::Eastbound, Lane::Westbound] {
            let idx = Geometry::lane_index(lane);
            let blocks = ped_blocks_lane(
                &self.pedestrian,
                lane,
                geom,
                cfg.pedestrian_radius_m,
                cfg.vehicle_width_m,
            );
            let path_blocks = ped_path_blocks_lane(
                &self.pedestrian,
                lane,
                geom,
                cfg.pedestrian_radius_m,
                cfg.vehicle_width_m,
            );
            let snapshot = self.vehicles[idx].clone();
            let mut accels = Vec::with_capacity(snapshot.len());
            for (i, veh) in snapshot.iter().enumerate() {
                let lead = if i > 0 {
                    let ahead = &snapshot[i - 1];
                    Some((ahead.x_m - cfg.vehicle_length_m - veh.x_m, ahead.v_mps))
                } else {
                    None
                };
                let rear = veh.x_m - cfg.vehicle_length_m;
                let candidates = ObstacleCandidates {
                    lead,
                    light,
                    stop_line_gap_m: geom.stop_line_m - veh.x_m,
                    in_crosswalk: veh.x_m > geom.crosswalk_near_m && rear < geom.crosswalk_far_m,
                    ped_buffer_gap_m: if blocks || (veh.v_mps < CREEP_SPEED_MPS && path_blocks) {
                        Some(geom.buffer_line_m - veh.x_m)
                    } else {
                        None
                    },
                };
                let obstacle = select_obstacle(veh.v_mps, &candidates, &cfg.idm);
                accels.push(idm_acceleration(veh.v_mps, &obstacle, veh.v0_mps, &cfg.idm));
            }
            for (veh, a) in self.vehicles[idx].iter_mut().zip(accels) {
                *veh = step_vehicle(veh, a, cfg.dt_s);
            }
            // Despawn vehicles fully past the downstream edge.
            self.vehicles[idx].retain(|v| v.x_m - cfg.vehicle_length_m <= geom.road_length_m);
        }
    }

    fn spawn_vehicles(
        &mut self,
        rng: &mut ChaCha8Rng,
        ctx: &StepCtx,
        log: &mut Option<&mut Vec<Event>>,
    ) {
        let cfg = ctx.cfg;
        if !cfg.spawn_enabled {
            return;
        }
        for lane in [Lane::Eastbound, Lane::Westbound] {
            let idx = Geometry::lane_index(lane);
            if self.t_s < self.next_spawn_s[idx] {
                continue;
            }
            let speed = sample_vehicle_speed(rng, cfg);
            let entry_gap = self.vehicles[idx]
                .last()
                .map(|v| v.x_m - cfg.vehicle_length_m)
                .unwrap_or(f64::INFINITY);
            if entry_gap <= cfg.idm.s0_m + speed * cfg.idm.t_headway_s {
                // Entry blocked; retry next step.
                continue;
            }
            self.vehicles[idx].push(VehicleState {
                id: self.next_vehicle_id,
                lane,
                x_m: 0.0,
                v_mps: speed,
                v0_mps: speed,
            });
            self.next_vehicle_id += 1;
            self.next_spawn_s[idx] = self.t_s + ctx.exp_headway.sample(rng);
            if let Some(log) = log.as_deref_mut() {
                log.push(Event::Spawn {
                    t_s: self.t_s,
                    lane,
                    speed_mps: speed,
                });
            }
        }
    }

    /// Places free-flowing traffic along both lanes, walking each lane
    /// downstream-to-upstream with exponential spacing (headway draw times
    /// the placed vehicle's own speed, floored at the minimum gap). Called
    /// at the start of the signal cycle's green phase, where free flow is
    /// the steady state; the warm roll then evolves it to the arrival time.
    fn seed_initial_vehicles(
        &mut self,
        rng: &mut ChaCha8Rng,
        ctx: &StepCtx,
        log: &mut Option<&mut Vec<Event>>,
    ) {
        let cfg = ctx.cfg;
        let geom = &ctx.geom;
        if !cfg.spawn_enabled {
            return;
        }
        for lane in [Lane::Eastbound, Lane::Westbound] {
            let idx = Geometry::lane_index(lane);
            let mut front = geom.road_length_m;
            loop {
                let headway = ctx.exp_headway.sample(rng);
                let speed = sample_vehicle_speed(rng, cfg);
                let spacing = (headway * speed)
                    .max(cfg.vehicle_length_m + cfg.idm.s0_m + speed * cfg.idm.t_headway_s);
                front -= spacing;
                if front <= 0.0 {
                    break;
                }
                self.vehicles[idx].push(VehicleState {
                    id: self.next_vehicle_id,
                    lane,
                    x_m: front,
                    v_mps: speed,
                    v0_mps: speed,
                });
                self.next_vehicle_id += 1;
                if let Some(log) = log.as_deref_mut() {
                    log.push(Event::Spawn {
                        t_s: self.t_s,
                        lane,
                        speed_mps: speed,
                    });
                }
            }
        }
    }
}

/// Runs one trial to completion. Deterministic in (seed, cfg).
pub fn run_trial(seed: u64, cfg: &ValidatedConfig) -> Result<TrialOutcome> {
    run_trial_with_log(seed, cfg, None)
}

/// As [`run_trial`], optionally appending every event to `log`.
pub fn run_trial_with_log(
    seed: u64,
    cfg: &ValidatedConfig,
    mut log: Option<&mut Vec<Event>>,
) -> Result<TrialOutcome> {
    let mut rng = trial_rng(seed);
    let geom = Geometry::new(cfg);

    // Fixed draw order: schedule, side, walking speed, then event-driven
    // draws (spawns and decisions) strictly in simulation order.
    let schedule = sample_schedule(&mut rng, &cfg.light);
    let side = if rng.random::<f64>() < 0.5 {
        Side::Bottom
    } else {
        Side::Top
    };
    let ped_speed = sample_pedestrian_speed(&mut rng, cfg)?;

    let ctx = StepCtx {
        cfg,
        geom,
        exp_headway: Exp::new(1.0 / cfg.spawn_headway_mean_s).expect("validated headway mean"),
    };

    let mut world = WorldState {
        t_s: 0.0,
        vehicles: [Vec::new(), Vec::new()],
        pedestrian: PedestrianState::at_curb(
            side,
            ped_speed,
            geom.road_width_m,
            cfg.pedestrian_radius_m,
        ),
        schedule,
        next_spawn_s: [0.0, 0.0],
        next_vehicle_id: 0,
    };

    let light_at_arrival = light_state_at(&schedule, 0.0);

    // Warm roll: traffic is seeded free-flowing at the start of the current
    // signal cycle (green onset) and the vehicle dynamics run forward to
    // t = 0, so the pedestrian arrives to a physically consistent world —
    // queues formed during red, braking platoons at yellow, runners caught
    // mid-flight. The pedestrian is absent for t < 0.
    let warm_steps = (schedule.phase_offset_s / cfg.dt_s).round() as i64;
    world.t_s = -(warm_steps as f64) * cfg.dt_s;
    world.seed_initial_vehicles(&mut rng, &ctx, &mut log);
    world.next_spawn_s = [
        world.t_s + ctx.exp_headway.sample(&mut rng),
        world.t_s + ctx.exp_headway.sample(&mut rng),
    ];
    let mut prev_light = light_state_at(&schedule, world.t_s);
    for step in -warm_steps..0 {
        world.t_s = step as f64 * cfg.dt_s;
        let light = light_state_at(&schedule, world.t_s);
        if light != prev_light {
            if let Some(log) = log.as_deref_mut() {
                log.push(Event::LightChange {
                    t_s: world.t_s,
                    from: prev_light,
                    to: light,
                });
            }
            prev_light = light;
        }
        world.advance_vehicles(&ctx, light);
        world.spawn_vehicles(&mut rng, &ctx, &mut log);
    }

    let decision_every = (cfg.decision_interval_s / cfg.dt_s).round().max(1.0) as i64;

    let mut crossing_start: Option<(f64, LightState, f64)> = None; // (wait, light, nearest)
    let mut step: i64 = 0;

    loop {
        world.t_s = step as f64 * cfg.dt_s;
        let t = world.t_s;
        let light = light_state_at(&schedule, t);
        if light != prev_light {
            if let Some(log) = log.as_deref_mut() {
                log.push(Event::LightChange {
                    t_s: t,
                    from: prev_light,
                    to: light,
                });
            }
            prev_light = light;
        }

        match world.pedestrian.status {
            PedStatus::Waiting => {
                world.pedestrian.wait_s = t;
                if step % decision_every == 0 {
                    let d = nearest_vehicle_distance(&world, &geom, cfg);
                    let threshold = crossing_threshold(light, t, d, &cfg.decision);
                    let crossed = decide_cross(&mut rng, threshold);
                    if let Some(log) = log.as_deref_mut() {
                        log.push(Event::Decision {
                            t_s: t,
                            wait_s: t,
                            light,
                            nearest_vehicle_m: d.is_finite().then_some(d),
                            patience: patience_factor(t, light, &cfg.decision),
                            distance_factor: distance_factor(d, &cfg.decision),
                            light_factor: light_factor(light, d, &cfg.decision),
                            wait_for_red_bias: wait_for_red_bias(light, t, &cfg.decision),
                            threshold,
                            crossed,
                        });
                    }
                    if crossed {
                        world.pedestrian.status = PedStatus::Crossing;
                        crossing_start = Some((t, light, d));
                        if let Some(log) = log.as_deref_mut() {
                            log.push(Event::CrossingStart { t_s: t, side });
                        }
                    }
                }
            }
            PedStatus::Crossing => {
                world.pedestrian = step_pedestrian(
                    &world.pedestrian,
                    cfg.dt_s,
                    geom.road_width_m,
                    cfg.pedestrian_radius_m,
                );
            }
            PedStatus::Arrived | PedStatus::Hit => unreachable!("terminal states exit the loop"),
        }

        world.advance_vehicles(&ctx, light);
        world.spawn_vehicles(&mut rng, &ctx, &mut log);

        if world.pedestrian.status == PedStatus::Crossing {
            if let Some(vehicle_id) = detect_collision(&world, &geom, cfg) {
                world.pedestrian.status = PedStatus::Hit;
                if let Some(log) = log.as_deref_mut() {
                    log.push(Event::Collision { t_s: t, vehicle_id });
                }
            }
        }

        match world.pedestrian.status {
            PedStatus::Arrived => {
                let (wait, light_x, d) = crossing_start.expect("crossing preceded arrival");
                if let Some(log) = log.as_deref_mut() {
                    log.push(Event::Arrival { t_s: t });
                }
                return Ok(TrialOutcome {
                    success: true,
                    wait_s: wait,
                    light_at_arrival,
                    light_at_crossing: Some(light_x),
                    nearest_vehicle_at_decision_m: Some(d),
                    crossing_duration_s: Some(t - wait),
                    timeout: false,
                    seed,
                });
            }
            PedStatus::Hit => {
                let (wait, light_x, d) = crossing_start.expect("crossing preceded collision");
                return Ok(TrialOutcome {
                    success: false,
                    wait_s: wait,
                    light_at_arrival,
                    light_at_crossing: Some(light_x),
                    nearest_vehicle_at_decision_m: Some(d),
                    crossing_duration_s: None,
                    timeout: false,
                    seed,
                });
            }
            PedStatus::Waiting if t > cfg.max_trial_time_s => {
                if let Some(log) = log.as_deref_mut() {
                    log.push(Event::Timeout { t_s: t });
                }
                return Ok(TrialOutcome {
                    success: false,
                    wait_s: cfg.max_trial_time_s,
                    light_at_arrival,
                    light_at_crossing: None,
                    nearest_vehicle_at_decision_m: None,
                    crossing_duration_s: None,
                    timeout: true,
                    seed,
                });
            }
            _ => {}
        }

        step += 1;
    }
}
