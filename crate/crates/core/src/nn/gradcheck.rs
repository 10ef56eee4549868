//! Finite-difference verification of analytic gradients.

use rand::seq::index::sample;
use rand::Rng;

use super::{Parameters, Tensor};

#[derive(Clone, Debug)]
pub struct GradCheckConfig {
    pub step: f64,
    /// Minimum number of coordinates to check across all tensors.
    pub samples: usize,
    /// Lower bound on the relative-error denominator, so coordinates whose
    /// true gradient is (near) zero are judged on absolute error.
    pub denom_floor: f64,
}

impl Default for GradCheckConfig {
    fn default() -> Self {
        GradCheckConfig { step: 1e-5, samples: 200, denom_floor: 1e-5 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Coordinate {
    pub tensor: String,
    pub index: usize,
    pub analytic: f64,
    pub numeric: f64,
    pub rel_err: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GradCheckReport {
    pub checked: usize,
    pub max_rel_err: f64,
    pub max_abs_err: f64,
    pub worst: Option<Coordinate>,
}

impl GradCheckReport {
    pub fn passes(&self, tol: f64) -> bool {
        self.checked > 0 && self.max_rel_err < tol
    }
}

/// Picks coordinates: an equal share per tensor, topped up uniformly at
/// random when small tensors cannot fill their share.
fn pick(sizes: &[usize], samples: usize, rng: &mut impl Rng) -> Vec<(usize, usize)> {
    let share = samples.div_ceil(sizes.len().max(1));
    let mut chosen = Vec::new();
    let mut taken: Vec<Vec<bool>> = sizes.iter().map(|&n| vec![false; n]).collect();
    for (ti, &n) in sizes.iter().enumerate() {
        for i in sample(rng, n, share.min(n)).into_iter() {
            taken[ti][i] = true;
            chosen.push((ti, i));
        }
    }
    let total: usize = sizes.iter().sum();
    while chosen.len() < samples.min(total) {
        let mut flat = rng.random_range(0..total);
        let mut ti = 0;
        while flat >= sizes[ti] {
            flat -= sizes[ti];
            ti += 1;
        }
        if !taken[ti][flat] {
            taken[ti][flat] = true;
            chosen.push((ti, flat));
        }
    }
    chosen.sort_unstable();
    chosen
}

/// Compares `analytic` (ordered as `params.named_tensors()`) with central
/// differences of `loss` on a sampled subset of coordinates.
///
/// Relative error is `|a − n| / max(|a|, |n|, denom_floor)`.
pub fn grad_check<P: Parameters>(
    params: &mut P,
    analytic: &[Tensor],
    loss: impl Fn(&P) -> f64,
    cfg: &GradCheckConfig,
    rng: &mut impl Rng,
) -> GradCheckReport {
    let named: Vec<(String, usize)> =
        params.named_tensors().iter().map(|(n, t)| (n.clone(), t.len())).collect();
    assert_eq!(named.len(), analytic.len(), "gradient list does not match parameters");
    let sizes: Vec<usize> = named.iter().map(|(_, n)| *n).collect();
    let mut report = GradCheckReport { checked: 0, max_rel_err: 0.0, max_abs_err: 0.0, worst: None };

    for (ti, idx) in pick(&sizes, cfg.samples, rng) {
        let original = params.tensors_mut()[ti].data()[idx];
        params.tensors_mut()[ti].data_mut()[idx] = original + cfg.step;
        let plus = loss(params);
        params.tensors_mut()[ti].data_mut()[idx] = original - cfg.step;
        let minus = loss(params);
        params.tensors_mut()[ti].data_mut()[idx] = original;

        let numeric = (plus - minus) / (2.0 * cfg.step);
        let a = analytic[ti].data()[idx];
        let abs = (a - numeric).abs();
        let rel = abs / a.abs().max(numeric.abs()).max(cfg.denom_floor);
        report.checked += 1;
        report.max_abs_err = report.max_abs_err.max(abs);
        if rel > report.max_rel_err || report.worst.is_none() {
            report.max_rel_err = report.max_rel_err.max(rel);
            report.worst = Some(Coordinate {
                tensor: named[ti].0.clone(),
                index: idx,
                analytic: a,
                numeric,
                rel_err: rel,
            });
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    struct Quad(Tensor);

    impl Parameters for Quad {
        fn named_tensors(&self) -> Vec<(String, &Tensor)> {
            vec![("x".into(), &self.0)]
        }
        fn tensors_mut(&mut self) -> Vec<&mut Tensor> {
            vec![&mut self.0]
        }
    }

    #[test]
    fn quadratic_matches_exactly() {
        // loss = Σ c_i x_i², grad = 2 c_i x_i
        let c = [1.0, 3.0, -0.5];
        let mut q = Quad(Tensor::from_vec(&[3], vec![0.7, -1.2, 2.0]).unwrap());
        let g: Vec<f64> = q.0.data().iter().zip(c).map(|(x, c)| 2.0 * c * x).collect();
        let analytic = [Tensor::from_vec(&[3], g).unwrap()];
        let loss = |q: &Quad| q.0.data().iter().zip(c).map(|(x, c)| c * x * x).sum::<f64>();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let r = grad_check(&mut q, &analytic, loss, &GradCheckConfig::default(), &mut rng);
        assert_eq!(r.checked, 3);
        assert!(r.max_rel_err < 1e-8, "{r:?}");
    }

    #[test]
    fn detects_wrong_gradient() {
        let mut q = Quad(Tensor::from_vec(&[1], vec![1.0]).unwrap());
        let analytic = [Tensor::from_vec(&[1], vec![3.0]).unwrap()];
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let r = grad_check(&mut q, &analytic, |q| q.0.data()[0].powi(2), &GradCheckConfig::default(), &mut rng);
        assert!(!r.passes(1e-4));
    }

    #[test]
    fn picks_requested_count_across_tensors() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let picked = pick(&[2, 1000, 5], 200, &mut rng);
        assert_eq!(picked.len(), 200);
        assert!(picked.iter().any(|&(t, _)| t == 0));
        assert!(picked.iter().any(|&(t, _)| t == 2));
        let mut dedup = picked.clone();
        dedup.dedup();
        assert_eq!(dedup.len(), picked.len());
    }
}
