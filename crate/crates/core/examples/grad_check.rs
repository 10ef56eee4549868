//! Finite-difference check of the generator and discriminator gradients at
//! full model size (embedding 200, hidden 200, kernels 1..=16 with 32 filters).
//!
//! ```bash
//! cargo run --release --example grad_check
//! ```

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sixgan::nn::{
    grad_check, CnnGradAccumulator, CnnParams, CnnRunner, GradCheckConfig, LstmParams, LstmRunner,
};

fn main() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let cfg = GradCheckConfig::default();

    let mut lstm = LstmParams::init(16, 200, 200, 0.1, &mut rng);
    let seq: Vec<usize> = (0..32).map(|_| rng.random_range(0..16)).collect();
    let weights = vec![1.0 / 32.0; 32];
    let mut grads = lstm.zero_grads();
    LstmRunner::new(&lstm).accumulate_gradient(&seq, &weights, &mut grads).unwrap();
    let loss = |p: &LstmParams| LstmRunner::new(p).step_nll(&seq).unwrap().iter().sum::<f64>() / 32.0;
    let report = grad_check(&mut lstm, &grads, loss, &cfg, &mut rng);
    println!("lstm: {} coords, max rel err {:.3e}, max abs err {:.3e}", report.checked, report.max_rel_err, report.max_abs_err);
    println!("  worst: {:?}", report.worst);

    let k = 6;
    let mut cnn = CnnParams::init(17, 200, 16, 32, k + 1, 0.1, &mut rng);
    let batch: Vec<(Vec<usize>, usize)> = (0..4)
        .map(|_| ((0..32).map(|_| rng.random_range(0..16)).collect(), rng.random_range(0..=k)))
        .collect();
    let mut acc = CnnGradAccumulator::new(&cnn);
    {
        let runner = CnnRunner::new(&cnn);
        for (x, y) in &batch {
            let trace = runner.trace(x, None).unwrap();
            acc.add(&cnn, &trace, *y, 1.0 / batch.len() as f64);
        }
    }
    let grads = acc.finish(&cnn);
    let loss = |p: &CnnParams| {
        let runner = CnnRunner::new(p);
        batch.iter().map(|(x, y)| -runner.forward(x).unwrap()[*y].ln()).sum::<f64>() / batch.len() as f64
    };
    let report = grad_check(&mut cnn, &grads, loss, &cfg, &mut rng);
    println!("cnn:  {} coords, max rel err {:.3e}, max abs err {:.3e}", report.checked, report.max_rel_err, report.max_abs_err);
    println!("  worst: {:?}", report.worst);
}
