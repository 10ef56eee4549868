//! A one-step generator learning a two-armed bandit through the policy
//! gradient update used for the address generators.
//!
//! ```bash
//! cargo run --release --example policy_gradient_bandit
//! ```

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sixgan::gan::{reinforce_update, sample_tokens};
use sixgan::nn::{LstmParams, LstmRunner, RmsPropState};

fn main() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut params = LstmParams::init(2, 4, 4, 0.1, &mut rng);
    let mut opt = RmsPropState::new(&params, 0.05);
    // Token 0 is penalised, token 1 is free.
    let penalty = [1.0, 0.0];
    for update in 0..=40 {
        let runner = LstmRunner::new(&params);
        if update % 5 == 0 {
            let p = runner.step(&runner.initial_state(), params.bos()).unwrap().probs[1];
            println!("update {update:>3}: p(free arm) = {p:.3}");
        }
        let xs: Vec<Vec<usize>> = (0..32).map(|_| sample_tokens(&runner, 1, &mut rng).unwrap()).collect();
        let qs: Vec<Vec<f64>> = xs.iter().map(|x| vec![penalty[x[0]]]).collect();
        reinforce_update(&mut params, &mut opt, &xs, &qs, false).unwrap();
    }
}
