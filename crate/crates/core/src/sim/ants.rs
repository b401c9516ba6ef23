//! Single-colony ant foraging: ants search for food piles and carry
//! pieces back to the nest. In the organized mode returning ants lay a
//! pheromone trail that searching ants follow uphill; the disorganized
//! mode forages with the pheromone channel disabled. Once the food is
//! gone both modes degenerate to a random walk.

use std::f64::consts::PI;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_chacha::rand_core::SeedableRng;

use super::{
    angle_to, deg, dist, record_frame, step_bounded, wiggle, Field, ScenarioConfig, SimEvent,
    SimulationRun,
};
use crate::error::Result;
use crate::trajectory::TrajectoryTensor;

pub(crate) struct FoodGrid {
    pub cells: Vec<(f64, f64, u32)>, // (x, y, remaining) cell centers
    pub pile_of: Vec<usize>,
    pub pile_remaining: Vec<u32>,
}

impl FoodGrid {
    pub fn total(&self) -> u32 {
        self.pile_remaining.iter().sum()
    }

    /// Index of a non-empty food cell within `radius` of `pos`.
    pub fn find_near(&self, pos: [f64; 2], radius: f64) -> Option<usize> {
        self.cells
            .iter()
            .position(|&(x, y, left)| left > 0 && dist(pos, [x, y]) <= radius)
    }

    pub fn take(&mut self, idx: usize) -> usize {
        self.cells[idx].2 -= 1;
        let pile = self.pile_of[idx];
        self.pile_remaining[pile] -= 1;
        pile
    }
}

pub(crate) fn build_piles(
    centers: &[[f64; 2]],
    pile_radius: f64,
    food_per_cell: u32,
) -> FoodGrid {
    let mut cells = Vec::new();
    let mut pile_of = Vec::new();
    let mut pile_remaining = vec![0u32; centers.len()];
    for (pi, &[cx, cy]) in centers.iter().enumerate() {
        let r = pile_radius.ceil() as i32;
        for dy in -r..=r {
            for dx in -r..=r {
                let x = cx + dx as f64;
                let y = cy + dy as f64;
                if dist([x, y], [cx, cy]) <= pile_radius {
                    cells.push((x, y, food_per_cell));
                    pile_of.push(pi);
                    pile_remaining[pi] += food_per_cell;
                }
            }
        }
    }
    FoodGrid {
        cells,
        pile_of,
        pile_remaining,
    }
}

/// Turn uphill on the pheromone field by sampling ahead, ahead-left and
/// ahead-right, NetLogo style.
pub(crate) fn uphill(field: &Field, pos: [f64; 2], heading: f64, world_clamp: impl Fn([f64; 2]) -> [f64; 2]) -> f64 {
    let sample = |angle: f64| {
        let p = world_clamp([pos[0] + angle.cos(), pos[1] + angle.sin()]);
        field.get(p)
    };
    let ahead = sample(heading);
    let left = sample(heading + deg(45.0));
    let right = sample(heading - deg(45.0));
    if left > ahead && left >= right {
        heading + deg(45.0)
    } else if right > ahead {
        heading - deg(45.0)
    } else {
        heading
    }
}

struct Ant {
    pos: [f64; 2],
    heading: f64,
    carrying: bool,
}

pub fn run(config: &ScenarioConfig) -> Result<SimulationRun> {
    let world = config.world;
    let p = &config.params;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);

    let nest = [0.0, 0.0]; // world center
    let pile_dist = world.width.min(world.height) * p.pile_distance_frac;
    let centers: Vec<[f64; 2]> = (0..p.num_food_piles)
        .map(|i| {
            let angle = deg(20.0) + i as f64 * 2.0 * PI / p.num_food_piles as f64;
            [
                nest[0] + pile_dist * angle.cos(),
                nest[1] + pile_dist * angle.sin(),
            ]
        })
        .collect();
    let mut food = build_piles(&centers, p.pile_radius, p.food_per_cell);

    let mut ants: Vec<Ant> = (0..config.num_agents)
        .map(|_| Ant {
            pos: [
                nest[0] + rng.gen_range(-2.0..2.0),
                nest[1] + rng.gen_range(-2.0..2.0),
            ],
            heading: rng.gen_range(-PI..PI),
            carrying: false,
        })
        .collect();

    let mut chemical = Field::new(&world);
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
        let exhausted = food.total() == 0;
        for ant in ants.iter_mut() {
            if ant.carrying {
                if config.organized {
                    chemical.add(ant.pos, p.pheromone_deposit);
                }
                // head home
                ant.heading = angle_to(ant.pos, nest) + wiggle(&mut rng, 10.0);
                let (pos, heading) = step_bounded(ant.pos, ant.heading, p.speed, &world);
                ant.pos = pos;
                ant.heading = heading;
                if dist(ant.pos, nest) < 3.0 {
                    ant.carrying = false;
                    ant.heading = super::norm_angle(ant.heading + PI);
                }
            } else {
                if !exhausted {
                    if let Some(cell) = food.find_near(ant.pos, 1.2) {
                        let pile = food.take(cell);
                        ant.carrying = true;
                        ant.heading = super::norm_angle(ant.heading + PI);
                        if food.pile_remaining[pile] == 0 {
                            events.push(SimEvent {
                                step,
                                event: "pile_exhausted".into(),
                                detail: format!("pile {pile}"),
                            });
                        }
                        if food.total() == 0 {
                            events.push(SimEvent {
                                step,
                                event: "food_exhausted".into(),
                                detail: String::new(),
                            });
                        }
                        continue;
                    }
                }
                let chem = chemical.get(ant.pos);
                if config.organized && !exhausted && chem >= p.sniff_low && chem < p.sniff_high {
                    ant.heading = uphill(&chemical, ant.pos, ant.heading, clamp);
                } else {
                    ant.heading += wiggle(&mut rng, p.wiggle_deg);
                }
                let (pos, heading) = step_bounded(ant.pos, ant.heading, p.speed, &world);
                ant.pos = pos;
                ant.heading = heading;
            }
        }
        chemical.diffuse_and_evaporate(p.diffusion_rate, p.evaporation_rate);

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
