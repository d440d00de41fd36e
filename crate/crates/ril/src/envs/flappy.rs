//! Scalar-dynamics side-scroller: gravity pulls the bird down, flapping
//! resets its velocity upward, pipe pairs with seeded gap centers approach
//! at constant speed. +1 for each pipe pair passed; hitting a pipe or the
//! ground ends the episode with a penalty. The ceiling clamps instead of
//! killing.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::VecDeque;

use super::{EnvError, EnvSpec, Environment, FlappyView, Observation, ObsView, StepResult};
use crate::rules::ActionId;

pub const FLAP: ActionId = ActionId(0);
pub const NULL: ActionId = ActionId(1);

// All lengths in bird-sizes. Impulse and gravity are sized so bang-bang
// control oscillates well inside the 4-unit gap, and one inter-pipe stretch
// (spacing / speed ticks) is enough to climb between extreme gap centers.
pub const BIRD_SIZE: f64 = 1.0;
pub const WORLD_HEIGHT: f64 = 12.0;
pub const GRAVITY: f64 = 0.25;
pub const FLAP_IMPULSE: f64 = 0.7;
pub const PIPE_SPEED: f64 = 0.5;
pub const PIPE_WIDTH: f64 = 1.5;
pub const PIPE_SPACING: f64 = 10.0;
pub const GAP_HEIGHT: f64 = 4.0;
pub const FIRST_PIPE_X: f64 = 10.0;
pub const PASS_REWARD: f64 = 1.0;
pub const CRASH_PENALTY: f64 = -5.0;
pub const MAX_STEPS: u32 = 500;

const BIRD_X: f64 = 0.0;
const GAP_MARGIN: f64 = 0.5;

#[derive(Clone, Copy, Debug)]
struct Pipe {
    x: f64,
    gap_center: f64,
}

impl Pipe {
    fn gap_top(&self) -> f64 {
        self.gap_center + GAP_HEIGHT / 2.0
    }

    fn gap_bottom(&self) -> f64 {
        self.gap_center - GAP_HEIGHT / 2.0
    }

    fn overlaps_bird(&self) -> bool {
        self.x < BIRD_X + BIRD_SIZE && self.x + PIPE_WIDTH > BIRD_X
    }
}

pub struct FlappyLite {
    spec: EnvSpec,
    y: f64,
    velocity: f64,
    pipes: VecDeque<Pipe>,
    rng: ChaCha8Rng,
    steps: u32,
    done: bool,
}

impl FlappyLite {
    pub fn new() -> Self {
        let spec = EnvSpec {
            name: "flappy".into(),
            action_labels: vec!["flap", "null"],
            feature_dim: 4,
            max_episode_steps: MAX_STEPS,
            constants: vec![
                ("bird_size", BIRD_SIZE),
                ("world_height", WORLD_HEIGHT),
                ("gravity", GRAVITY),
                ("flap_impulse", FLAP_IMPULSE),
                ("pipe_speed", PIPE_SPEED),
                ("pipe_width", PIPE_WIDTH),
                ("pipe_spacing", PIPE_SPACING),
                ("gap_height", GAP_HEIGHT),
                ("pass_reward", PASS_REWARD),
                ("crash_penalty", CRASH_PENALTY),
            ],
        };
        FlappyLite {
            spec,
            y: 0.0,
            velocity: 0.0,
            pipes: VecDeque::new(),
            rng: ChaCha8Rng::seed_from_u64(0),
            steps: 0,
            done: true,
        }
    }

    fn seeded_gap_center(&mut self) -> f64 {
        let lo = GAP_HEIGHT / 2.0 + GAP_MARGIN;
        let hi = WORLD_HEIGHT - GAP_HEIGHT / 2.0 - GAP_MARGIN;
        self.rng.random_range(lo..hi)
    }

    fn push_pipe(&mut self, x: f64) {
        let gap_center = self.seeded_gap_center();
        self.pipes.push_back(Pipe { x, gap_center });
    }

    /// The pipe pair the bird is approaching or crossing.
    fn next_pipe(&self) -> Pipe {
        *self
            .pipes
            .iter()
            .find(|p| p.x + PIPE_WIDTH > BIRD_X)
            .expect("pipe queue never runs dry")
    }

    fn observe(&self) -> Observation {
        let pipe = self.next_pipe();
        let view = FlappyView {
            crossing: pipe.overlaps_bird(),
            clearance_above: pipe.gap_top() - (self.y + BIRD_SIZE),
            clearance_below: self.y - pipe.gap_bottom(),
            bird_size: BIRD_SIZE,
        };
        let bird_center = self.y + BIRD_SIZE / 2.0;
        let features = vec![
            2.0 * self.y / (WORLD_HEIGHT - BIRD_SIZE) - 1.0,
            self.velocity / 3.0,
            (pipe.x - BIRD_X) / PIPE_SPACING,
            (bird_center - pipe.gap_center) / (WORLD_HEIGHT / 2.0),
        ];
        Observation {
            features,
            view: ObsView::Flappy(view),
        }
    }

    #[cfg(test)]
    fn bird(&self) -> (f64, f64) {
        (self.y, self.velocity)
    }
}

impl Default for FlappyLite {
    fn default() -> Self {
        FlappyLite::new()
    }
}

impl Environment for FlappyLite {
    fn spec(&self) -> &EnvSpec {
        &self.spec
    }

    fn reset(&mut self, seed: u64) -> Observation {
        self.rng = ChaCha8Rng::seed_from_u64(seed);
        self.y = (WORLD_HEIGHT - BIRD_SIZE) / 2.0;
        self.velocity = 0.0;
        self.steps = 0;
        self.done = false;
        self.pipes.clear();
        for i in 0..3 {
            self.push_pipe(FIRST_PIPE_X + i as f64 * PIPE_SPACING);
        }
        self.observe()
    }

    fn step(&mut self, action: ActionId) -> Result<StepResult, EnvError> {
        if self.done {
            return Err(EnvError::EpisodeOver);
        }
        match action {
            FLAP => self.velocity = FLAP_IMPULSE,
            NULL => {}
            other => return Err(EnvError::InvalidAction(other)),
        }
        self.velocity -= GRAVITY;
        self.y += self.velocity;
        if self.y > WORLD_HEIGHT - BIRD_SIZE {
            self.y = WORLD_HEIGHT - BIRD_SIZE;
            self.velocity = 0.0;
        }
        let mut crashed = self.y < 0.0;
        for pipe in &mut self.pipes {
            pipe.x -= PIPE_SPEED;
        }
        if !crashed {
            let front = self.pipes[0];
            if front.overlaps_bird()
                && (self.y < front.gap_bottom() || self.y + BIRD_SIZE > front.gap_top())
            {
                crashed = true;
            }
        }
        let mut reward = 0.0;
        if crashed {
            reward = CRASH_PENALTY;
        } else {
            while self.pipes[0].x + PIPE_WIDTH <= BIRD_X {
                reward += PASS_REWARD;
                let back_x = self.pipes.back().expect("non-empty").x;
                self.pipes.pop_front();
                self.push_pipe(back_x + PIPE_SPACING);
            }
        }
        self.steps += 1;
        let terminal = crashed || self.steps >= self.spec.max_episode_steps;
        self.done = terminal;
        Ok(StepResult {
            obs: self.observe(),
            reward,
            terminal,
        })
    }
}
