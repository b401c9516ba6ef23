//! Wolf pack predation. Sheep wander randomly and die when caught; the
//! wolf population is fixed and only the wolves are tracked in the
//! trajectory tensor. Organized mode: the alpha designates one prey
//! animal and the whole pack converges on it. Disorganized mode:
//! every wolf picks its own prey. After the last sheep is eaten
//! the pack disbands into a random walk.

use std::f64::consts::PI;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{
    angle_to, deg, dist, record_frame, step_bounded, turn_toward, wiggle, ScenarioConfig,
    SimEvent, SimulationRun,
};
use crate::error::Result;
use crate::trajectory::TrajectoryTensor;

struct Sheep {
    pos: [f64; 2],
    heading: f64,
    alive: bool,
}

struct Wolf {
    pos: [f64; 2],
    heading: f64,
    // the wolf's own chosen prey (disorganized mode)
    target: Option<usize>,
}

/// Uniform pick among the alive sheep.
fn random_sheep(sheep: &[Sheep], rng: &mut ChaCha8Rng) -> Option<usize> {
    let alive: Vec<usize> = sheep
        .iter()
        .enumerate()
        .filter(|(_, s)| s.alive)
        .map(|(i, _)| i)
        .collect();
    if alive.is_empty() {
        None
    } else {
        Some(alive[rng.gen_range(0..alive.len())])
    }
}

pub fn run(config: &ScenarioConfig) -> Result<SimulationRun> {
    let world = config.world;
    let p = &config.params;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);

    let mut wolves: Vec<Wolf> = (0..config.num_agents)
        .map(|_| Wolf {
            pos: [
                rng.gen_range(world.x_min()..world.x_max()),
                rng.gen_range(world.y_min()..world.y_max()),
            ],
            heading: rng.gen_range(-PI..PI),
            target: None,
        })
        .collect();
    let mut sheep: Vec<Sheep> = (0..p.num_sheep)
        .map(|_| Sheep {
            pos: [
                rng.gen_range(world.x_min()..world.x_max()),
                rng.gen_range(world.y_min()..world.y_max()),
            ],
            heading: rng.gen_range(-PI..PI),
            alive: true,
        })
        .collect();

    let turn_limit = deg(p.wolf_turn_limit_deg);
    let mut pack_target: Option<usize> = None;
    let mut alive_count = p.num_sheep;

    let mut frames = Vec::with_capacity(config.num_steps * config.num_agents);
    let mut events = Vec::new();
    record_frame(&mut frames, wolves.iter().map(|w| w.pos), &world);

    for step in 1..config.num_steps {
        // sheep wander
        for s in sheep.iter_mut().filter(|s| s.alive) {
            s.heading += wiggle(&mut rng, 30.0);
            let (pos, heading) = step_bounded(s.pos, s.heading, p.speed, &world);
            s.pos = pos;
            s.heading = heading;
        }

        // the alpha re-selects prey whenever the pack has none
        if config.organized {
            if pack_target.map_or(true, |t| !sheep[t].alive) {
                pack_target = random_sheep(&sheep, &mut rng);
            }
        }

        for wolf in wolves.iter_mut() {
            let target = if alive_count == 0 {
                None
            } else if config.organized {
                pack_target
            } else {
                // each wolf sticks with its own randomly chosen prey
                if wolf.target.map_or(true, |t| !sheep[t].alive) {
                    wolf.target = random_sheep(&sheep, &mut rng);
                }
                wolf.target
            };
            match target {
                Some(t) => {
                    let desired = angle_to(wolf.pos, sheep[t].pos);
                    wolf.heading = turn_toward(wolf.heading, desired, turn_limit)
                        + wiggle(&mut rng, p.hunt_wiggle_deg);
                }
                None => {
                    wolf.heading += wiggle(&mut rng, p.wiggle_deg);
                }
            }
            let (pos, heading) = step_bounded(wolf.pos, wolf.heading, p.speed, &world);
            wolf.pos = pos;
            wolf.heading = heading;
        }

        // catches: any wolf close enough eats the sheep
        for (si, s) in sheep.iter_mut().enumerate() {
            if !s.alive {
                continue;
            }
            if let Some(wi) = wolves
                .iter()
                .position(|w| dist(w.pos, s.pos) <= p.catch_radius)
            {
                s.alive = false;
                alive_count -= 1;
                events.push(SimEvent {
                    step,
                    event: "sheep_eaten".into(),
                    detail: format!("sheep {si} by wolf {wi}"),
                });
                if alive_count == 0 {
                    events.push(SimEvent {
                        step,
                        event: "sheep_exhausted".into(),
                        detail: String::new(),
                    });
                }
            }
        }

        record_frame(&mut frames, wolves.iter().map(|w| w.pos), &world);
    }

    let trajectory =
        TrajectoryTensor::new(config.num_agents, config.num_steps, frames, world)?;
    Ok(SimulationRun {
        config: config.clone(),
        trajectory,
        events,
        carrying: Vec::new(),
    })
}
