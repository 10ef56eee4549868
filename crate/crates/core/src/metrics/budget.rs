use super::MetricsError;

/// Splits `total` across patterns in proportion to `rates` using largest
/// remainders; ties go to the lower index. The result sums to `total`.
pub fn allocate_budget(rates: &[f64], total: usize) -> Result<Vec<usize>, MetricsError> {
    if let Some(r) = rates.iter().find(|r| !(r.is_finite() && **r >= 0.0)) {
        return Err(MetricsError::Rates(format!("rate {r} is negative or not finite")));
    }
    let sum: f64 = rates.iter().sum();
    if rates.is_empty() || sum <= 0.0 {
        return Err(MetricsError::Rates("at least one rate must be positive".into()));
    }
    let quotas: Vec<f64> = rates.iter().map(|r| r * total as f64 / sum).collect();
    let mut out: Vec<usize> = quotas.iter().map(|q| q.floor() as usize).collect();
    let mut order: Vec<usize> = (0..rates.len()).collect();
    let frac = |i: usize| quotas[i] - quotas[i].floor();
    order.sort_by(|&a, &b| frac(b).total_cmp(&frac(a)).then(a.cmp(&b)));

    let assigned: usize = out.iter().sum();
    if assigned <= total {
        for &i in order.iter().cycle().take(total - assigned) {
            out[i] += 1;
        }
    } else {
        // Rounding pushed a floor up; take back from the smallest remainders.
        let mut extra = assigned - total;
        for &i in order.iter().rev() {
            if extra == 0 {
                break;
            }
            if out[i] > 0 {
                out[i] -= 1;
                extra -= 1;
            }
        }
    }
    Ok(out)
}
