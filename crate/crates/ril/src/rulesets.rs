//! The built-in rule sets for the four game environments, bound to their
//! observation views, plus the name registry the CLI selects from.
//!
//! Acceleration sets: keep the bird inside the pipe gap, chase the nearest
//! enemy jet, track the ball with the paddle. Safety set: never step into an
//! adjacent trap. The trap rule is shipped as four fixed-recommendation
//! directional rules whose intersection yields "all actions except the
//! trap-entering moves" — equivalent to the single complement-form rule, but
//! each rule keeps a constant recommendation set.

use crate::envs::{breakout, flappy, gridworld, spacewar, Observation, ObsView};
use crate::rules::{ActionSet, Rule, RuleKind, RuleSet};

/// Registry names accepted by configs and the CLI.
pub const RULE_SET_NAMES: &[&str] = &[
    "flappy",
    "spacewar",
    "spacewar-literal",
    "breakout",
    "gridworld-safety",
];

pub fn by_name(name: &str) -> Option<RuleSet<Observation>> {
    match name {
        "flappy" => Some(flappy_rules()),
        "spacewar" => Some(spacewar_rules()),
        "spacewar-literal" => Some(spacewar_rules_literal()),
        "breakout" => Some(breakout_rules()),
        "gridworld-safety" => Some(gridworld_rules()),
        _ => None,
    }
}

/// While the bird is crossing a pipe pair: flap when within one bird-size of
/// the gap's lower edge (r1), glide when within one bird-size of its upper
/// edge (r2).
pub fn flappy_rules() -> RuleSet<Observation> {
    let r1 = Rule::new(
        "r1",
        RuleKind::Acceleration,
        ActionSet::from_actions([flappy::FLAP]),
        |obs: &Observation| match obs.view {
            ObsView::Flappy(v) => v.crossing && v.clearance_below < v.bird_size,
            _ => false,
        },
    )
    .expect("non-empty recommendation");
    let r2 = Rule::new(
        "r2",
        RuleKind::Acceleration,
        ActionSet::from_actions([flappy::NULL]),
        |obs: &Observation| match obs.view {
            ObsView::Flappy(v) => v.crossing && v.clearance_above < v.bird_size,
            _ => false,
        },
    )
    .expect("non-empty recommendation");
    RuleSet::new(RuleKind::Acceleration, vec![r1, r2]).expect("valid rule set")
}

/// Chase the horizontally nearest enemy jet: left when it is left of the
/// agent (r3), right when it is right (r4). Distance ties resolve to the
/// left enemy.
pub fn spacewar_rules() -> RuleSet<Observation> {
    RuleSet::new(
        RuleKind::Acceleration,
        vec![spacewar_r3(), spacewar_r4(spacewar::MOVE_RIGHT)],
    )
    .expect("valid rule set")
}

/// Variant keeping r4's recommendation as `move_left`, so both rules push
/// the same way; selectable for comparison against the corrected set.
pub fn spacewar_rules_literal() -> RuleSet<Observation> {
    RuleSet::new(
        RuleKind::Acceleration,
        vec![spacewar_r3(), spacewar_r4(spacewar::MOVE_LEFT)],
    )
    .expect("valid rule set")
}

fn spacewar_r3() -> Rule<Observation> {
    Rule::new(
        "r3",
        RuleKind::Acceleration,
        ActionSet::from_actions([spacewar::MOVE_LEFT]),
        |obs: &Observation| match obs.view {
            ObsView::SpaceWar(v) => matches!(v.nearest_enemy_dx, Some(dx) if dx < 0),
            _ => false,
        },
    )
    .expect("non-empty recommendation")
}

fn spacewar_r4(recommend: crate::rules::ActionId) -> Rule<Observation> {
    Rule::new(
        "r4",
        RuleKind::Acceleration,
        ActionSet::from_actions([recommend]),
        |obs: &Observation| match obs.view {
            ObsView::SpaceWar(v) => matches!(v.nearest_enemy_dx, Some(dx) if dx > 0),
            _ => false,
        },
    )
    .expect("non-empty recommendation")
}

/// Move the paddle toward the ball: strict left/right comparison against the
/// paddle center; an aligned ball activates neither rule.
pub fn breakout_rules() -> RuleSet<Observation> {
    let r5 = Rule::new(
        "r5",
        RuleKind::Acceleration,
        ActionSet::from_actions([breakout::MOVE_LEFT]),
        |obs: &Observation| match obs.view {
            ObsView::Breakout(v) => v.ball_dx < 0,
            _ => false,
        },
    )
    .expect("non-empty recommendation");
    let r6 = Rule::new(
        "r6",
        RuleKind::Acceleration,
        ActionSet::from_actions([breakout::MOVE_RIGHT]),
        |obs: &Observation| match obs.view {
            ObsView::Breakout(v) => v.ball_dx > 0,
            _ => false,
        },
    )
    .expect("non-empty recommendation");
    RuleSet::new(RuleKind::Acceleration, vec![r5, r6]).expect("valid rule set")
}

/// Forbid stepping into an adjacent trap (4-neighborhood). One directional
/// rule per move, each recommending the complement of that move; their
/// intersection removes exactly the trap-entering moves.
pub fn gridworld_rules() -> RuleSet<Observation> {
    let all = ActionSet::all_below(4);
    type TrapFlag = fn(&crate::envs::GridView) -> bool;
    let directions: [(&str, crate::rules::ActionId, TrapFlag); 4] = [
        ("r7-up", gridworld::UP, |v| v.trap_up),
        ("r7-down", gridworld::DOWN, |v| v.trap_down),
        ("r7-left", gridworld::LEFT, |v| v.trap_left),
        ("r7-right", gridworld::RIGHT, |v| v.trap_right),
    ];
    let rules = directions
        .into_iter()
        .map(|(id, forbidden, flag)| {
            Rule::new(
                id,
                RuleKind::Safety,
                all.minus(ActionSet::from_actions([forbidden])),
                move |obs: &Observation| match &obs.view {
                    ObsView::Grid(v) => flag(v),
                    _ => false,
                },
            )
            .expect("non-empty recommendation")
        })
        .collect();
    RuleSet::new(RuleKind::Safety, rules).expect("valid rule set")
}
