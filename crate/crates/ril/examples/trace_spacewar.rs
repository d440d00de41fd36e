use ril::envs::{flappy::*, Environment, ObsView};

fn main() {
    for seed in [1u64, 3] {
        let mut env = FlappyLite::new();
        let mut obs = env.reset(seed);
        println!("=== seed {seed}");
        for t in 1..=80 {
            let ObsView::Flappy(v) = obs.view else { panic!() };
            let action = if v.clearance_below < v.clearance_above { FLAP } else { NULL };
            let r = env.step(action).unwrap();
            let ObsView::Flappy(nv) = r.obs.view else { panic!() };
            println!(
                "t={t} cross={} below={:.2} above={:.2} r={} term={}",
                nv.crossing, nv.clearance_below, nv.clearance_above, r.reward, r.terminal
            );
            if r.terminal { break; }
            obs = r.obs;
        }
    }
}
