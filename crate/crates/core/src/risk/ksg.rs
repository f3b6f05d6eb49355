use super::RiskError;
use crate::exec::Execution;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// `psi(n)` for integers `0..=max` (index 0 unused), via `psi(n) = H(n-1) - gamma`.
fn digamma_table(max: usize) -> Vec<f64> {
    let mut t = vec![f64::NAN; max + 1];
    if max >= 1 {
        t[1] = -EULER_GAMMA;
    }
    for n in 2..=max {
        t[n] = t[n - 1] + 1.0 / (n - 1) as f64;
    }
    t
}

/// Number of values in sorted `v` strictly inside `(c - r, c + r)`.
fn count_within(sorted: &[f64], c: f64, r: f64) -> usize {
    let lo = sorted.partition_point(|&v| v <= c - r);
    let hi = sorted.partition_point(|&v| v < c + r);
    hi.saturating_sub(lo)
}

/// Kraskov-Stögbauer-Grassberger estimator (algorithm 1), in nats.
///
/// `psi(k) + psi(N) - <psi(n_x + 1) + psi(n_y + 1)>`, where the averages run
/// over points, `eps` is the max-norm distance to the `k`-th neighbour and
/// `n_x`, `n_y` count other points strictly closer than `eps` in each
/// marginal. The value is not clamped and can be slightly negative.
pub fn mutual_information_knn(
    x: &[f64],
    y: &[f64],
    k: usize,
    exec: Execution,
) -> Result<f64, RiskError> {
    let n = x.len();
    if n != y.len() {
        return Err(RiskError::LengthMismatch(n, y.len()));
    }
    if k == 0 || k >= n {
        return Err(RiskError::TooFewSamples { n, k });
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(RiskError::NonFinite);
    }

    let mut by_x: Vec<usize> = (0..n).collect();
    by_x.sort_by(|&a, &b| x[a].total_cmp(&x[b]).then(a.cmp(&b)));
    let xs: Vec<f64> = by_x.iter().map(|&i| x[i]).collect();
    let ys_by_x: Vec<f64> = by_x.iter().map(|&i| y[i]).collect();
    let mut ys = y.to_vec();
    ys.sort_by(f64::total_cmp);
    let psi = digamma_table(n + 1);

    let terms = exec.map_range(n, |p| {
        let eps = kth_distance(&xs, &ys_by_x, p, k);
        let nx = count_within(&xs, xs[p], eps).saturating_sub(1);
        let ny = count_within(&ys, ys_by_x[p], eps).saturating_sub(1);
        psi[nx + 1] + psi[ny + 1]
    });
    let mean = terms.iter().sum::<f64>() / n as f64;
    Ok(psi[k] + psi[n] - mean)
}

/// Max-norm distance from point `p` (index into x-sorted order) to its
/// `k`-th nearest neighbour, scanning outward in x and stopping once the
/// x gap alone exceeds the current `k`-th best.
fn kth_distance(xs: &[f64], ys: &[f64], p: usize, k: usize) -> f64 {
    let mut best: Vec<f64> = Vec::with_capacity(k + 1);
    let offer = |best: &mut Vec<f64>, d: f64| {
        if best.len() < k || d < best[k - 1] {
            let at = best.partition_point(|&b| b <= d);
            best.insert(at, d);
            best.truncate(k);
        }
    };
    let (mut lo, mut hi) = (p, p + 1);
    loop {
        let bound = if best.len() == k {
            best[k - 1]
        } else {
            f64::INFINITY
        };
        let left_gap = (lo > 0).then(|| xs[p] - xs[lo - 1]);
        let right_gap = (hi < xs.len()).then(|| xs[hi] - xs[p]);
        let go_left = match (left_gap, right_gap) {
            (Some(l), Some(r)) => l <= r,
            (Some(_), None) => true,
            (None, Some(_)) => false,
            (None, None) => break,
        };
        let gap = if go_left { left_gap } else { right_gap }.unwrap();
        if gap > bound {
            break;
        }
        let q = if go_left {
            lo -= 1;
            lo
        } else {
            hi += 1;
            hi - 1
        };
        offer(&mut best, gap.max((ys[q] - ys[p]).abs()));
    }
    best[k - 1]
}
