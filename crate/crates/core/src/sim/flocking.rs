//! Boid flocking on a toroidal world. Headings follow the separate /
//! align / cohere rules with per-rule turn limits; separation overrides
//! the other two. The disorganized variant replaces the rules with pure
//! heading jitter at the same constant speed.

use std::f64::consts::PI;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{
    deg, norm_angle, record_frame, step_toroidal, toroidal_delta, turn_toward, wiggle,
    ScenarioConfig, SimulationRun,
};
use crate::error::Result;
use crate::trajectory::TrajectoryTensor;

#[derive(Clone, Copy)]
struct Boid {
    pos: [f64; 2],
    heading: f64,
}

pub fn run(config: &ScenarioConfig) -> Result<SimulationRun> {
    let world = config.world;
    let p = &config.params;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);

    let mut boids: Vec<Boid> = (0..config.num_agents)
        .map(|_| Boid {
            pos: [
                rng.gen_range(0.0..world.width),
                rng.gen_range(0.0..world.height),
            ],
            heading: rng.gen_range(-PI..PI),
        })
        .collect();

    let mut frames = Vec::with_capacity(config.num_steps * config.num_agents);
    record_frame(&mut frames, boids.iter().map(|b| b.pos), &world);

    let vision2 = p.vision * p.vision;
    for _step in 1..config.num_steps {
        if config.organized {
            let snapshot = boids.clone();
            for (i, boid) in boids.iter_mut().enumerate() {
                let mut mates: Vec<(usize, [f64; 2], f64)> = Vec::new();
                for (j, other) in snapshot.iter().enumerate() {
                    if i == j {
                        continue;
                    }
                    let d = toroidal_delta(boid.pos, other.pos, &world);
                    let d2 = d[0] * d[0] + d[1] * d[1];
                    if d2 <= vision2 {
                        mates.push((j, d, d2));
                    }
                }
                if mates.is_empty() {
                    continue;
                }
                let nearest = mates
                    .iter()
                    .min_by(|a, b| a.2.partial_cmp(&b.2).unwrap())
                    .unwrap();
                if nearest.2.sqrt() < p.min_separation {
                    // separate: turn away from the nearest flockmate
                    let away = norm_angle(nearest.1[1].atan2(nearest.1[0]) + PI);
                    boid.heading =
                        turn_toward(boid.heading, away, deg(p.max_separate_turn_deg));
                } else {
                    // align with the average flockmate heading
                    let (sy, sx) = mates
                        .iter()
                        .map(|&(j, _, _)| snapshot[j].heading.sin_cos())
                        .fold((0.0, 0.0), |(ay, ax), (y, x)| (ay + y, ax + x));
                    let avg_heading = sy.atan2(sx);
                    boid.heading =
                        turn_toward(boid.heading, avg_heading, deg(p.max_align_turn_deg));
                    // cohere toward the average direction of flockmates
                    let (cy, cx) = mates
                        .iter()
                        .fold((0.0, 0.0), |(ay, ax), &(_, d, _)| (ay + d[1], ax + d[0]));
                    let toward = cy.atan2(cx);
                    boid.heading =
                        turn_toward(boid.heading, toward, deg(p.max_cohere_turn_deg));
                }
            }
        } else {
            for boid in boids.iter_mut() {
                boid.heading = norm_angle(boid.heading + wiggle(&mut rng, p.jitter_deg));
            }
        }
        for boid in boids.iter_mut() {
            boid.pos = step_toroidal(boid.pos, boid.heading, p.speed, &world);
        }
        record_frame(&mut frames, boids.iter().map(|b| b.pos), &world);
    }

    let trajectory =
        TrajectoryTensor::new(config.num_agents, config.num_steps, frames, world)?;
    Ok(SimulationRun {
        config: config.clone(),
        trajectory,
        events: Vec::new(),
        carrying: Vec::new(),
    })
}
