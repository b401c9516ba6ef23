//! Two competing ant colonies foraging among flower patches. Each colony
//! has its own pheromone field; encounters between opposing ants scare
//! both away (a displacement, never a death — the population is fixed).
//! Disorganized mode turns both pheromone channels off.

use std::f64::consts::PI;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::ants::uphill;
use super::{
    angle_to, dist, norm_angle, record_frame, step_bounded, wiggle, Field, ScenarioConfig,
    SimEvent, SimulationRun,
};
use crate::error::Result;
use crate::trajectory::TrajectoryTensor;

struct Ant {
    pos: [f64; 2],
    heading: f64,
    carrying: bool,
    colony: usize,
}

struct Flower {
    pos: [f64; 2],
    nectar: u32,
}

fn clamp_to(pt: [f64; 2], world: &crate::trajectory::WorldSpec) -> [f64; 2] {
    [
        pt[0].clamp(world.x_min() + 1.0, world.x_max() - 1.0),
        pt[1].clamp(world.y_min() + 1.0, world.y_max() - 1.0),
    ]
}

pub fn run(config: &ScenarioConfig) -> Result<SimulationRun> {
    let world = config.world;
    let p = &config.params;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);

    // side by side rather than diagonally opposed, so the colonies sit in
    // clearly different directions from the world center
    let nests = [
        [-world.width * 0.25, -world.height * 0.25],
        [world.width * 0.25, -world.height * 0.25],
    ];
    let per_colony = config.num_agents / 2;

    let mut ants: Vec<Ant> = (0..config.num_agents)
        .map(|i| {
            let colony = i / per_colony;
            Ant {
                pos: [
                    nests[colony][0] + rng.gen_range(-1.0..1.0),
                    nests[colony][1] + rng.gen_range(-1.0..1.0),
                ],
                heading: rng.gen_range(-PI..PI),
                carrying: false,
                colony,
            }
        })
        .collect();

    // each colony gets a flower field a short march from its nest
    let field_offset = world.height * 0.2;
    let field_radius = world.width.min(world.height) * 0.07;
    let fields = [
        [nests[0][0], nests[0][1] + field_offset],
        [nests[1][0], nests[1][1] + field_offset],
    ];
    let mut flowers: Vec<Flower> = (0..p.num_flowers)
        .map(|i| {
            let center = fields[i % 2];
            let angle = rng.gen_range(-PI..PI);
            let r = field_radius * rng.gen_range(0.0f64..1.0).sqrt();
            Flower {
                pos: clamp_to(
                    [center[0] + r * angle.cos(), center[1] + r * angle.sin()],
                    &world,
                ),
                nectar: p.nectar_per_flower,
            }
        })
        .collect();
    let mut total_nectar: u32 = flowers.iter().map(|f| f.nectar).sum();

    let mut fields = [Field::new(&world), Field::new(&world)];
    let mut frames = Vec::with_capacity(config.num_steps * config.num_agents);
    let mut events = Vec::new();
    let mut carrying_log = Vec::with_capacity(config.num_steps);

    record_frame(&mut frames, ants.iter().map(|a| a.pos), &world);
    carrying_log.push(Vec::new());

    let clamp = |pt: [f64; 2]| {
        [
            pt[0].clamp(world.x_min(), world.x_max()),
            pt[1].clamp(world.y_min(), world.y_max()),
        ]
    };

    for step in 1..config.num_steps {
        let exhausted = total_nectar == 0;
        for idx in 0..ants.len() {
            let ant = &mut ants[idx];
            let nest = nests[ant.colony];
            if ant.carrying {
                if config.organized {
                    fields[ant.colony].add(ant.pos, p.pheromone_deposit);
                }
                ant.heading = angle_to(ant.pos, nest) + wiggle(&mut rng, 10.0);
                let (pos, heading) = step_bounded(ant.pos, ant.heading, p.speed, &world);
                ant.pos = pos;
                ant.heading = heading;
                if dist(ant.pos, nest) < 2.0 {
                    ant.carrying = false;
                    ant.heading = norm_angle(ant.heading + PI);
                }
            } else {
                if !exhausted {
                    if let Some(fi) = flowers
                        .iter()
                        .position(|f| f.nectar > 0 && dist(ant.pos, f.pos) <= 1.2)
                    {
                        flowers[fi].nectar -= 1;
                        total_nectar -= 1;
                        ant.carrying = true;
                        ant.heading = norm_angle(ant.heading + PI);
                        if total_nectar == 0 {
                            events.push(SimEvent {
                                step,
                                event: "food_exhausted".into(),
                                detail: String::new(),
                            });
                        }
                        continue;
                    }
                }
                let chem = fields[ant.colony].get(ant.pos);
                if config.organized && !exhausted && chem >= p.sniff_low && chem < p.sniff_high {
                    ant.heading = uphill(&fields[ant.colony], ant.pos, ant.heading, clamp);
                } else {
                    ant.heading += wiggle(&mut rng, p.wiggle_deg);
                }
                let (pos, heading) = step_bounded(ant.pos, ant.heading, p.speed, &world);
                ant.pos = pos;
                ant.heading = heading;
            }
        }

        // opposing ants that meet scare each other away
        for i in 0..ants.len() {
            for j in i + 1..ants.len() {
                if ants[i].colony == ants[j].colony {
                    continue;
                }
                if dist(ants[i].pos, ants[j].pos) <= p.scare_radius {
                    let away = angle_to(ants[j].pos, ants[i].pos);
                    for (k, dir) in [(i, away), (j, norm_angle(away + PI))] {
                        ants[k].heading = dir;
                        let (pos, heading) =
                            step_bounded(ants[k].pos, dir, p.speed, &world);
                        ants[k].pos = pos;
                        ants[k].heading = heading;
                    }
                    events.push(SimEvent {
                        step,
                        event: "scare".into(),
                        detail: format!("ants {i} and {j}"),
                    });
                }
            }
        }

        for field in fields.iter_mut() {
            field.diffuse_and_evaporate(p.diffusion_rate, p.evaporation_rate);
        }

        record_frame(&mut frames, ants.iter().map(|a| a.pos), &world);
        carrying_log.push(
            ants.iter()
                .enumerate()
                .filter(|(_, a)| a.carrying)
                .map(|(i, _)| i as u32)
                .collect(),
        );
    }

    let trajectory =
        TrajectoryTensor::new(config.num_agents, config.num_steps, frames, world)?;
    Ok(SimulationRun {
        config: config.clone(),
        trajectory,
        events,
        carrying: carrying_log,
    })
}
