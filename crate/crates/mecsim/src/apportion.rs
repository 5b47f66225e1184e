//! Largest-remainder apportionment of an integer total over weights.

/// Split `total` into one integer share per weight, proportional to the
/// weights, with shares summing to `total` exactly. Remainders go to the
/// largest fractional parts; ties break toward the lower index. An all-zero
/// (or degenerate) weight vector falls back to an equal split.
pub fn largest_remainder(total: u64, weights: &[f64]) -> Vec<u64> {
    if weights.is_empty() {
        return Vec::new();
    }
    let sum: f64 = weights.iter().copied().filter(|w| *w > 0.0).sum();
    let uniform = vec![1.0; weights.len()];
    let weights: &[f64] = if sum > 0.0 { weights } else { &uniform };
    let sum: f64 = if sum > 0.0 {
        sum
    } else {
        weights.len() as f64
    };

    let mut shares = Vec::with_capacity(weights.len());
    let mut fracs = Vec::with_capacity(weights.len());
    let mut assigned: u64 = 0;
    for &w in weights {
        let quota = total as f64 * (w.max(0.0) / sum);
        let floor = quota.floor() as u64;
        assigned += floor;
        shares.push(floor);
        fracs.push(quota - floor as f64);
    }
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by(|&a, &b| fracs[b].partial_cmp(&fracs[a]).unwrap().then(a.cmp(&b)));
    let mut remainder = total - assigned.min(total);
    for &i in &order {
        if remainder == 0 {
            break;
        }
        shares[i] += 1;
        remainder -= 1;
    }
    shares
}
