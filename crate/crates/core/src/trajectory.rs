//! Dense trajectory tensor, CSV persistence, and window extraction.
//!
//! A run is stored as one CSV (`step,agent,x,y`, rows sorted by step then
//! agent, coordinates printed with 6 fractional digits) plus a companion
//! `.meta` file with `key=value` lines describing the world and the run.

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Topology {
    Bounded,
    Toroidal,
}

impl Topology {
    pub fn as_str(&self) -> &'static str {
        match self {
            Topology::Bounded => "bounded",
            Topology::Toroidal => "toroidal",
        }
    }

    pub fn parse(s: &str) -> Option<Topology> {
        match s {
            "bounded" => Some(Topology::Bounded),
            "toroidal" => Some(Topology::Toroidal),
            _ => None,
        }
    }
}

impl fmt::Display for Topology {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Extent and wrap behavior of the simulation world.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WorldSpec {
    pub width: f64,
    pub height: f64,
    pub topology: Topology,
}

impl WorldSpec {
    pub fn new(width: f64, height: f64, topology: Topology) -> Result<Self> {
        if !(width > 0.0) || !(height > 0.0) {
            return Err(Error::Config(format!(
                "world dimensions must be positive, got {width}x{height}"
            )));
        }
        Ok(WorldSpec {
            width,
            height,
            topology,
        })
    }

    /// Bounded worlds are centered on the origin (coordinates span
    /// `[-w/2, w/2] x [-h/2, h/2]`, the NetLogo patch convention), while
    /// toroidal worlds wrap coordinates into `[0, w) x [0, h)`.
    pub fn x_min(&self) -> f64 {
        match self.topology {
            Topology::Bounded => -self.width / 2.0,
            Topology::Toroidal => 0.0,
        }
    }

    pub fn x_max(&self) -> f64 {
        match self.topology {
            Topology::Bounded => self.width / 2.0,
            Topology::Toroidal => self.width,
        }
    }

    pub fn y_min(&self) -> f64 {
        match self.topology {
            Topology::Bounded => -self.height / 2.0,
            Topology::Toroidal => 0.0,
        }
    }

    pub fn y_max(&self) -> f64 {
        match self.topology {
            Topology::Bounded => self.height / 2.0,
            Topology::Toroidal => self.height,
        }
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        match self.topology {
            Topology::Bounded => {
                x >= self.x_min() && x <= self.x_max() && y >= self.y_min() && y <= self.y_max()
            }
            Topology::Toroidal => {
                x >= 0.0 && x < self.width && y >= 0.0 && y < self.height
            }
        }
    }
}

/// Run annotations persisted alongside the coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct RunMeta {
    pub scenario: String,
    pub organized: bool,
    pub seed: u64,
}

impl Default for RunMeta {
    fn default() -> Self {
        RunMeta {
            scenario: "unknown".to_string(),
            organized: false,
            seed: 0,
        }
    }
}

/// Per-step (x, y) positions for a fixed agent population.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryTensor {
    num_agents: usize,
    num_steps: usize,
    /// Indexed `step * num_agents + agent`.
    positions: Vec<[f64; 2]>,
    world: WorldSpec,
}

impl TrajectoryTensor {
    pub fn new(
        num_agents: usize,
        num_steps: usize,
        positions: Vec<[f64; 2]>,
        world: WorldSpec,
    ) -> Result<Self> {
        if num_agents == 0 || num_steps == 0 {
            return Err(Error::Invalid(format!(
                "tensor dimensions must be positive, got {num_steps} steps x {num_agents} agents"
            )));
        }
        if positions.len() != num_agents * num_steps {
            return Err(Error::Invalid(format!(
                "expected {} positions, got {}",
                num_agents * num_steps,
                positions.len()
            )));
        }
        for (idx, &[x, y]) in positions.iter().enumerate() {
            if !x.is_finite() || !y.is_finite() || !world.contains(x, y) {
                return Err(Error::Invalid(format!(
                    "position ({x}, {y}) at step {} agent {} outside {}x{} {} world",
                    idx / num_agents,
                    idx % num_agents,
                    world.width,
                    world.height,
                    world.topology
                )));
            }
        }
        Ok(TrajectoryTensor {
            num_agents,
            num_steps,
            positions,
            world,
        })
    }

    pub fn num_agents(&self) -> usize {
        self.num_agents
    }

    pub fn num_steps(&self) -> usize {
        self.num_steps
    }

    pub fn world(&self) -> &WorldSpec {
        &self.world
    }

    pub fn position(&self, step: usize, agent: usize) -> [f64; 2] {
        self.positions[step * self.num_agents + agent]
    }

    /// All agent positions at one step.
    pub fn step_positions(&self, step: usize) -> &[[f64; 2]] {
        let base = step * self.num_agents;
        &self.positions[base..base + self.num_agents]
    }
}

/// One sliding window over a tensor, flattened per agent into the feature
/// vector fed to the similarity stage: the window's x coordinates followed
/// by its y coordinates (length `2 * length`).
#[derive(Debug, Clone, PartialEq)]
pub struct WindowSlice {
    pub start: usize,
    pub length: usize,
    features: Vec<Vec<f64>>,
}

impl WindowSlice {
    pub fn num_agents(&self) -> usize {
        self.features.len()
    }

    pub fn feature(&self, agent: usize) -> &[f64] {
        &self.features[agent]
    }

    pub fn features(&self) -> &[Vec<f64>] {
        &self.features
    }
}

/// Slice `[start, start + length)` out of the tensor.
pub fn extract_window(t: &TrajectoryTensor, start: usize, length: usize) -> Result<WindowSlice> {
    if length < 2 || start + length > t.num_steps() {
        return Err(Error::WindowOutOfRange {
            start,
            length,
            num_steps: t.num_steps(),
        });
    }
    let features = (0..t.num_agents())
        .map(|agent| {
            let mut v = Vec::with_capacity(2 * length);
            for step in start..start + length {
                v.push(t.position(step, agent)[0]);
            }
            for step in start..start + length {
                v.push(t.position(step, agent)[1]);
            }
            v
        })
        .collect();
    Ok(WindowSlice {
        start,
        length,
        features,
    })
}

/// Round to the 6-decimal grid used by the CSV format.
pub fn quantize(v: f64) -> f64 {
    (v * 1e6).round() / 1e6
}

fn meta_path(path: &Path) -> PathBuf {
    path.with_extension("meta")
}

pub fn save_trajectory(t: &TrajectoryTensor, path: &Path) -> Result<()> {
    save_trajectory_with_meta(t, &RunMeta::default(), path)
}

pub fn save_trajectory_with_meta(t: &TrajectoryTensor, meta: &RunMeta, path: &Path) -> Result<()> {
    let mut out = String::with_capacity(t.num_steps * t.num_agents * 24 + 16);
    out.push_str("step,agent,x,y\n");
    for step in 0..t.num_steps {
        for agent in 0..t.num_agents {
            let [x, y] = t.position(step, agent);
            out.push_str(&format!("{step},{agent},{x:.6},{y:.6}\n"));
        }
    }
    write_atomic(path, out.as_bytes())?;

    let meta_text = format!(
        "num_agents={}\nnum_steps={}\nworld_width={}\nworld_height={}\ntopology={}\nscenario={}\norganized={}\nseed={}\n",
        t.num_agents,
        t.num_steps,
        t.world.width,
        t.world.height,
        t.world.topology,
        meta.scenario,
        meta.organized,
        meta.seed,
    );
    write_atomic(&meta_path(path), meta_text.as_bytes())
}

/// Write through a temp file and rename, so a failure never leaves a
/// partial file at the final path.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension("tmp");
    let mut f = fs::File::create(&tmp).map_err(|e| Error::io(&tmp, e))?;
    f.write_all(bytes).map_err(|e| Error::io(&tmp, e))?;
    drop(f);
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

struct ParsedMeta {
    num_agents: usize,
    num_steps: usize,
    world: WorldSpec,
    run: RunMeta,
}

fn parse_meta(path: &Path) -> Result<ParsedMeta> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut num_agents = None;
    let mut num_steps = None;
    let mut width = None;
    let mut height = None;
    let mut topology = None;
    let mut run = RunMeta::default();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::parse(path, i + 1, "expected key=value"))?;
        let bad = |what: &str| Error::parse(path, i + 1, format!("invalid {what}: {value}"));
        match key.trim() {
            "num_agents" => num_agents = Some(value.parse().map_err(|_| bad("num_agents"))?),
            "num_steps" => num_steps = Some(value.parse().map_err(|_| bad("num_steps"))?),
            "world_width" => width = Some(value.parse().map_err(|_| bad("world_width"))?),
            "world_height" => height = Some(value.parse().map_err(|_| bad("world_height"))?),
            "topology" => {
                topology = Some(Topology::parse(value.trim()).ok_or_else(|| bad("topology"))?)
            }
            "scenario" => run.scenario = value.trim().to_string(),
            "organized" => run.organized = value.trim().parse().map_err(|_| bad("organized"))?,
            "seed" => run.seed = value.trim().parse().map_err(|_| bad("seed"))?,
            other => {
                return Err(Error::parse(path, i + 1, format!("unknown key: {other}")));
            }
        }
    }
    let missing = |what: &str| Error::parse(path, 0, format!("missing key: {what}"));
    let world = WorldSpec::new(
        width.ok_or_else(|| missing("world_width"))?,
        height.ok_or_else(|| missing("world_height"))?,
        topology.ok_or_else(|| missing("topology"))?,
    )?;
    Ok(ParsedMeta {
        num_agents: num_agents.ok_or_else(|| missing("num_agents"))?,
        num_steps: num_steps.ok_or_else(|| missing("num_steps"))?,
        world,
        run,
    })
}

/// Read the run annotations of a stored trajectory.
pub fn load_meta(path: &Path) -> Result<RunMeta> {
    Ok(parse_meta(&meta_path(path))?.run)
}

/// Load a trajectory CSV together with its companion `.meta` file.
///
/// Agent ids are remapped to `0..num_agents-1` in first-appearance order;
/// ragged data and non-monotone step indices are reported with the
/// offending line number.
pub fn load_trajectory(path: &Path) -> Result<TrajectoryTensor> {
    let meta = parse_meta(&meta_path(path))?;
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = text.lines().enumerate();

    match lines.next() {
        Some((_, header)) if header.trim() == "step,agent,x,y" => {}
        Some((_, header)) => {
            return Err(Error::parse(path, 1, format!("bad header: {header}")));
        }
        None => return Err(Error::parse(path, 1, "empty file")),
    }

    // agent ids in first-appearance order during step 0
    let mut agent_order: Vec<u64> = Vec::new();
    let mut positions: Vec<[f64; 2]> = Vec::new();
    let mut cur_step: Option<usize> = None;
    let mut seen_in_step = 0usize;
    let mut num_agents: Option<usize> = None;
    let mut last_line = 1usize;

    for (i, line) in lines {
        let lineno = i + 1;
        last_line = lineno;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let mut fields = line.split(',');
        let mut next = |what: &str| {
            fields
                .next()
                .ok_or_else(|| Error::parse(path, lineno, format!("missing field: {what}")))
        };
        let step: usize = next("step")?
            .parse()
            .map_err(|_| Error::parse(path, lineno, "invalid step"))?;
        let agent: u64 = next("agent")?
            .parse()
            .map_err(|_| Error::parse(path, lineno, "invalid agent id"))?;
        let x: f64 = next("x")?
            .parse()
            .map_err(|_| Error::parse(path, lineno, "invalid x coordinate"))?;
        let y: f64 = next("y")?
            .parse()
            .map_err(|_| Error::parse(path, lineno, "invalid y coordinate"))?;

        match cur_step {
            None => {
                if step != 0 {
                    return Err(Error::parse(path, lineno, "steps must start at 0"));
                }
                cur_step = Some(0);
            }
            Some(s) if step == s => {}
            Some(s) if step == s + 1 => {
                let expected = num_agents.unwrap_or(seen_in_step);
                if num_agents.is_none() {
                    num_agents = Some(seen_in_step);
                }
                if seen_in_step != expected {
                    return Err(Error::parse(
                        path,
                        lineno,
                        format!("ragged data: step {s} has {seen_in_step} agents, expected {expected}"),
                    ));
                }
                cur_step = Some(step);
                seen_in_step = 0;
            }
            Some(s) if step > s => {
                return Err(Error::parse(
                    path,
                    lineno,
                    format!("step gap: {s} followed by {step}"),
                ));
            }
            Some(s) => {
                return Err(Error::parse(
                    path,
                    lineno,
                    format!("non-monotone step index: {s} followed by {step}"),
                ));
            }
        }

        if cur_step == Some(0) && num_agents.is_none() {
            if agent_order.contains(&agent) {
                return Err(Error::parse(
                    path,
                    lineno,
                    format!("duplicate agent {agent} in step 0"),
                ));
            }
            agent_order.push(agent);
        } else {
            let expected = agent_order.get(seen_in_step).copied();
            if expected != Some(agent) {
                return Err(Error::parse(
                    path,
                    lineno,
                    format!(
                        "ragged data: step {} expected agent {:?} at row position {}, got {agent}",
                        cur_step.unwrap(),
                        expected,
                        seen_in_step
                    ),
                ));
            }
        }
        positions.push([x, y]);
        seen_in_step += 1;
    }

    let num_agents = num_agents.unwrap_or(seen_in_step);
    if num_agents == 0 {
        return Err(Error::parse(path, last_line, "no data rows"));
    }
    if seen_in_step != num_agents {
        return Err(Error::parse(
            path,
            last_line,
            format!("ragged data: final step has {seen_in_step} agents, expected {num_agents}"),
        ));
    }
    let num_steps = positions.len() / num_agents;

    if num_agents != meta.num_agents || num_steps != meta.num_steps {
        return Err(Error::parse(
            path,
            last_line,
            format!(
                "dimensions {num_steps}x{num_agents} disagree with metadata {}x{}",
                meta.num_steps, meta.num_agents
            ),
        ));
    }

    TrajectoryTensor::new(num_agents, num_steps, positions, meta.world)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use tempfile::TempDir;

    fn world(w: f64, h: f64) -> WorldSpec {
        WorldSpec::new(w, h, Topology::Bounded).unwrap()
    }

    fn small_tensor() -> TrajectoryTensor {
        // 3 steps, 2 agents
        let positions = vec![
            [0.0, 0.0],
            [1.0, 1.0],
            [0.5, 0.25],
            [1.5, 1.25],
            [1.0, 0.5],
            [2.0, 1.5],
        ];
        TrajectoryTensor::new(2, 3, positions, world(40.0, 40.0)).unwrap()
    }

    #[test]
    fn round_trip_small() {
        let dir = TempDir::new().unwrap();
        let path = dir.path().join("run.csv");
        let t = small_tensor();
        save_trajectory(&t, &path).unwrap();
        let loaded = load_trajectory(&path).unwrap();
        assert_eq!(t, loaded);
        assert_eq!(loaded.num_agents(), 2);
        assert_eq!(loaded.num_steps(), 3);
    }

    #[test]
    fn one_agent_one_step_is_one_row() {
        let dir = TempDir::new().unwrap();
        let path = dir.path().join("run.csv");
        let t = TrajectoryTensor::new(1, 1, vec![[3.5, 4.25]], world(40.0, 40.0)).unwrap();
        save_trajectory(&t, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text, "step,agent,x,y\n0,0,3.500000,4.250000\n");
        assert_eq!(load_trajectory(&path).unwrap(), t);
    }

    #[test]
    fn missing_agent_row_is_ragged_error() {
        let dir = TempDir::new().unwrap();
        let path = dir.path().join("run.csv");
        let t = small_tensor();
        save_trajectory(&t, &path).unwrap();
        // drop agent 1 at step 2 (line 6 of the file)
        let text = std::fs::read_to_string(&path).unwrap();
        let truncated: Vec<&str> = text.lines().filter(|l| *l != "2,1,2.000000,1.500000").collect();
        std::fs::write(&path, truncated.join("\n")).unwrap();
        let err = load_trajectory(&path).unwrap_err();
        assert!(err.to_string().contains("ragged"), "{err}");
    }

    #[test]
    fn non_monotone_step_reported_with_line() {
        let dir = TempDir::new().unwrap();
        let path = dir.path().join("run.csv");
        save_trajectory(&small_tensor(), &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let mut lines: Vec<&str> = text.lines().collect();
        lines.swap(3, 5); // move a step-2 row before step 1
        std::fs::write(&path, lines.join("\n")).unwrap();
        let err = load_trajectory(&path).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("step"), "{msg}");
        assert!(msg.contains(":4:"), "line number missing: {msg}");
    }

    #[test]
    fn out_of_bounds_rejected() {
        let r = TrajectoryTensor::new(1, 1, vec![[11.0, 5.0]], world(10.0, 10.0));
        assert!(r.is_err());
    }

    #[test]
    fn extract_window_trivial_cases() {
        let t = small_tensor();
        let w = extract_window(&t, 0, 3).unwrap();
        assert_eq!(w.feature(0), &[0.0, 0.5, 1.0, 0.0, 0.25, 0.5]);
        assert_eq!(w.feature(1), &[1.0, 1.5, 2.0, 1.0, 1.25, 1.5]);

        // stationary agent at (3, 4)
        let t2 = TrajectoryTensor::new(1, 2, vec![[3.0, 4.0], [3.0, 4.0]], world(40.0, 40.0))
            .unwrap();
        let w2 = extract_window(&t2, 0, 2).unwrap();
        assert_eq!(w2.feature(0), &[3.0, 3.0, 4.0, 4.0]);
    }

    #[test]
    fn extract_window_out_of_range() {
        let t = small_tensor();
        assert!(extract_window(&t, 2, 2).is_err());
        assert!(extract_window(&t, 0, 4).is_err());
        assert!(extract_window(&t, 0, 1).is_err());
    }

    prop_compose! {
        fn arb_tensor()(num_agents in 1usize..8, num_steps in 1usize..12)
            (num_agents in Just(num_agents),
             num_steps in Just(num_steps),
             coords in proptest::collection::vec(-10_000_000i64..10_000_000, num_agents * num_steps * 2))
            -> TrajectoryTensor
        {
            // coordinates already on the 6-decimal grid
            let positions = coords
                .chunks(2)
                .map(|c| [c[0] as f64 / 1e6, c[1] as f64 / 1e6])
                .collect();
            TrajectoryTensor::new(num_agents, num_steps, positions, world(40.0, 40.0)).unwrap()
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        #[test]
        fn round_trip_random(t in arb_tensor()) {
            let dir = TempDir::new().unwrap();
            let path = dir.path().join("run.csv");
            save_trajectory(&t, &path).unwrap();
            prop_assert_eq!(load_trajectory(&path).unwrap(), t);
        }

        #[test]
        fn window_matches_direct_indexing(t in arb_tensor(), start in 0usize..10, len in 2usize..6) {
            prop_assume!(start + len <= t.num_steps());
            let w = extract_window(&t, start, len).unwrap();
            for agent in 0..t.num_agents() {
                for k in 0..len {
                    prop_assert_eq!(w.feature(agent)[k], t.position(start + k, agent)[0]);
                    prop_assert_eq!(w.feature(agent)[len + k], t.position(start + k, agent)[1]);
                }
            }
            // purity
            prop_assert_eq!(&w, &extract_window(&t, start, len).unwrap());
        }
    }
}
