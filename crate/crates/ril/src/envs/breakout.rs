//! Grid breakout: a ball with unit diagonal velocity reflects off walls,
//! bricks, and a three-cell paddle. +1 per brick; letting the ball past the
//! paddle ends the episode with a penalty. Cleared brick rows respawn so an
//! episode is bounded only by the step cap or a miss.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{BreakoutView, EnvError, EnvSpec, Environment, Observation, ObsView, StepResult};
use crate::rules::ActionId;

pub const MOVE_LEFT: ActionId = ActionId(0);
pub const MOVE_RIGHT: ActionId = ActionId(1);
pub const NULL: ActionId = ActionId(2);

pub const WIDTH: i32 = 10;
pub const HEIGHT: i32 = 9;
pub const BRICK_ROWS: std::ops::Range<i32> = 1..3;
pub const PADDLE_ROW: i32 = HEIGHT - 1;
pub const PADDLE_HALF_WIDTH: i32 = 1;
pub const BRICK_REWARD: f64 = 1.0;
pub const MISS_PENALTY: f64 = -5.0;
pub const MAX_STEPS: u32 = 500;

pub struct BreakoutLite {
    spec: EnvSpec,
    ball: (i32, i32),
    vel: (i32, i32),
    paddle_center: i32,
    bricks: Vec<bool>,
    steps: u32,
    done: bool,
}

impl BreakoutLite {
    pub fn new() -> Self {
        let spec = EnvSpec {
            name: "breakout".into(),
            action_labels: vec!["move_left", "move_right", "null"],
            feature_dim: 5,
            max_episode_steps: MAX_STEPS,
            constants: vec![
                ("width", WIDTH as f64),
                ("height", HEIGHT as f64),
                ("paddle_half_width", PADDLE_HALF_WIDTH as f64),
                ("brick_reward", BRICK_REWARD),
                ("miss_penalty", MISS_PENALTY),
            ],
        };
        BreakoutLite {
            spec,
            ball: (0, 0),
            vel: (1, -1),
            paddle_center: WIDTH / 2,
            bricks: Vec::new(),
            steps: 0,
            done: true,
        }
    }

    fn brick_index(x: i32, y: i32) -> Option<usize> {
        if BRICK_ROWS.contains(&y) && (0..WIDTH).contains(&x) {
            Some(((y - BRICK_ROWS.start) * WIDTH + x) as usize)
        } else {
            None
        }
    }

    fn brick_at(&self, x: i32, y: i32) -> bool {
        Self::brick_index(x, y).is_some_and(|i| self.bricks[i])
    }

    pub fn bricks_remaining(&self) -> usize {
        self.bricks.iter().filter(|&&b| b).count()
    }

    pub fn ball(&self) -> (i32, i32) {
        self.ball
    }

    pub fn paddle_center(&self) -> i32 {
        self.paddle_center
    }

    fn respawn_bricks(&mut self) {
        self.bricks = vec![true; (BRICK_ROWS.end - BRICK_ROWS.start) as usize * WIDTH as usize];
    }

    fn observe(&self) -> Observation {
        let features = vec![
            2.0 * self.ball.0 as f64 / (WIDTH - 1) as f64 - 1.0,
            2.0 * self.ball.1 as f64 / (HEIGHT - 1) as f64 - 1.0,
            self.vel.0 as f64,
            self.vel.1 as f64,
            2.0 * self.paddle_center as f64 / (WIDTH - 1) as f64 - 1.0,
        ];
        Observation {
            features,
            view: ObsView::Breakout(BreakoutView {
                ball_dx: self.ball.0 - self.paddle_center,
            }),
        }
    }
}

impl Default for BreakoutLite {
    fn default() -> Self {
        BreakoutLite::new()
    }
}

impl Environment for BreakoutLite {
    fn spec(&self) -> &EnvSpec {
        &self.spec
    }

    fn reset(&mut self, seed: u64) -> Observation {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        self.paddle_center = WIDTH / 2;
        self.ball = (rng.random_range(2..WIDTH - 2), 5);
        self.vel = (if rng.random::<bool>() { 1 } else { -1 }, -1);
        self.respawn_bricks();
        self.steps = 0;
        self.done = false;
        self.observe()
    }

    fn step(&mut self, action: ActionId) -> Result<StepResult, EnvError> {
        if self.done {
            return Err(EnvError::EpisodeOver);
        }
        match action {
            MOVE_LEFT => {
                self.paddle_center = (self.paddle_center - 1).max(PADDLE_HALF_WIDTH);
            }
            MOVE_RIGHT => {
                self.paddle_center = (self.paddle_center + 1).min(WIDTH - 1 - PADDLE_HALF_WIDTH);
            }
            NULL => {}
            other => return Err(EnvError::InvalidAction(other)),
        }
        let mut reward = 0.0;
        let mut terminal = false;

        let mut nx = self.ball.0 + self.vel.0;
        if nx < 0 || nx >= WIDTH {
            self.vel.0 = -self.vel.0;
            nx = self.ball.0 + self.vel.0;
        }
        let mut ny = self.ball.1 + self.vel.1;
        if ny < 0 {
            self.vel.1 = -self.vel.1;
            ny = self.ball.1 + self.vel.1;
        }
        if self.brick_at(nx, ny) {
            let idx = Self::brick_index(nx, ny).expect("checked");
            self.bricks[idx] = false;
            reward += BRICK_REWARD;
            self.vel.1 = -self.vel.1;
            ny = self.ball.1; // the bounce consumes the vertical move
        }
        if ny == PADDLE_ROW {
            if (nx - self.paddle_center).abs() <= PADDLE_HALF_WIDTH {
                self.vel.1 = -self.vel.1;
                ny = self.ball.1;
            } else {
                reward = MISS_PENALTY;
                terminal = true;
            }
        }
        self.ball = (nx, ny);
        if self.bricks_remaining() == 0 {
            self.respawn_bricks();
        }
        self.steps += 1;
        if self.steps >= self.spec.max_episode_steps {
            terminal = true;
        }
        self.done = terminal;
        Ok(StepResult {
            obs: self.observe(),
            reward,
            terminal,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Follow the ball with the paddle; the ball never gets past.
    #[test]
    fn tracking_policy_survives_and_scores() {
        let mut env = BreakoutLite::new();
        let mut obs = env.reset(11);
        let mut total = 0.0;
        for _ in 0..MAX_STEPS {
            let ObsView::Breakout(v) = obs.view else {
                panic!("wrong view")
            };
            let action = match v.ball_dx {
                dx if dx < 0 => MOVE_LEFT,
                dx if dx > 0 => MOVE_RIGHT,
                _ => NULL,
            };
            let r = env.step(action).unwrap();
            assert_ne!(r.reward, MISS_PENALTY, "tracking paddle missed the ball");
            total += r.reward;
            if r.terminal {
                break;
            }
            obs = r.obs;
        }
        assert!(total > 5.0, "tracking policy only earned {total}");
    }

    #[test]
    fn motionless_paddle_eventually_misses() {
        let mut env = BreakoutLite::new();
        env.reset(2);
        let mut last = 0.0;
        for _ in 0..MAX_STEPS {
            let r = env.step(NULL).unwrap();
            last = r.reward;
            if r.terminal {
                break;
            }
        }
        assert_eq!(last, MISS_PENALTY);
    }

    #[test]
    fn ball_stays_on_the_field() {
        let mut env = BreakoutLite::new();
        env.reset(5);
        for i in 0..MAX_STEPS {
            let (x, y) = env.ball();
            assert!((0..WIDTH).contains(&x), "x={x}");
            assert!((0..HEIGHT).contains(&y), "y={y}");
            let r = env.step(ActionId((i % 3) as u8)).unwrap();
            if r.terminal {
                break;
            }
        }
    }

    #[test]
    fn brick_hits_pay_and_deplete() {
        let mut env = BreakoutLite::new();
        let mut obs = env.reset(11);
        let before = env.bricks_remaining();
        let mut earned = 0.0;
        for _ in 0..80 {
            let ObsView::Breakout(v) = obs.view else {
                panic!("wrong view")
            };
            let action = match v.ball_dx {
                dx if dx < 0 => MOVE_LEFT,
                dx if dx > 0 => MOVE_RIGHT,
                _ => NULL,
            };
            let r = env.step(action).unwrap();
            earned += r.reward;
            if r.terminal {
                break;
            }
            obs = r.obs;
        }
        let destroyed = before - env.bricks_remaining();
        assert!(destroyed > 0);
        assert_eq!(earned, destroyed as f64 * BRICK_REWARD);
    }

    #[test]
    fn view_offset_matches_state() {
        let mut env = BreakoutLite::new();
        let obs = env.reset(1);
        let ObsView::Breakout(v) = obs.view else {
            panic!("wrong view")
        };
        assert_eq!(v.ball_dx, env.ball().0 - env.paddle_center());
    }
}
