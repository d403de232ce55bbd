use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::envs::{make_env, EnvConfig};
use crate::error::Result;
use crate::par::{map_indexed, Execution};

/// Returns of `episodes` episodes under a uniformly random policy.
/// Episode `i` uses the run seed with stream `i + 1`, the stream worker `i` would use.
pub fn random_policy_returns(env: &EnvConfig, episodes: usize, seed: u64, exec: Execution) -> Result<Vec<f64>> {
    map_indexed(episodes, exec, |i| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(i as u64 + 1);
        let mut e = make_env(env)?;
        let n_actions = e.spec().n_actions;
        e.reset(&mut rng);
        let mut ret = 0.0;
        loop {
            let r = e.step(rng.gen_range(0..n_actions))?;
            ret += r.reward;
            if r.done() {
                return Ok(ret);
            }
        }
    })
    .into_iter()
    .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::envs::EnvName;

    #[test]
    fn random_cartpole_is_short_and_repeatable() {
        let env = EnvConfig::new(EnvName::CartPole);
        let a = random_policy_returns(&env, 200, 4, Execution::Sequential).unwrap();
        let b = random_policy_returns(&env, 200, 4, Execution::default()).unwrap();
        assert_eq!(a, b);
        let mean = a.iter().sum::<f64>() / a.len() as f64;
        assert!((15.0..30.0).contains(&mean), "{mean}");
    }
}
