//! Independent reference computations used only by the acceptance suite.

/// Transport cost between two equal-mass histograms on positions `0..n`,
/// computed by the north-west corner rule (optimal on the line).
pub fn transport_cost(c: &[f64], d: &[f64]) -> f64 {
    let (mut i, mut j) = (0, 0);
    let (mut left, mut right) = (c[0], d[0]);
    let mut cost = 0.0;
    loop {
        let moved = left.min(right);
        cost += moved * (i as f64 - j as f64).abs();
        left -= moved;
        right -= moved;
        if left <= 1e-15 {
            i += 1;
            if i == c.len() {
                break;
            }
            left = c[i];
        }
        if right <= 1e-15 {
            j += 1;
            if j == d.len() {
                break;
            }
            right = d[j];
        }
    }
    cost
}

/// Exact minimum of `sum_t |C_t - D_t|` over monotone `D` with steps in
/// `[0, rate]`, `D_0 = 0`, `D_T = C_T`, by shortest path over the grid of
/// values an LP vertex can take (an anchor `0`, `C_T` or `C_s` plus a whole
/// number of full-rate steps).
pub fn subpacing_distance(c: &[f64], rate: f64) -> f64 {
    let n = c.len();
    let prefix: Vec<f64> = c
        .iter()
        .scan(0.0, |a, x| {
            *a += x;
            Some(*a)
        })
        .collect();
    let mass = prefix[n - 1];
    let mut grid: Vec<f64> = Vec::new();
    for anchor in std::iter::once(0.0).chain(std::iter::once(mass)).chain(prefix.iter().copied()) {
        for k in -(n as i64)..=(n as i64) {
            let v = anchor + k as f64 * rate;
            if (-1e-12..=mass + 1e-12).contains(&v) {
                grid.push(v.clamp(0.0, mass));
            }
        }
    }
    grid.sort_by(f64::total_cmp);
    grid.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    let mut best = vec![f64::INFINITY; grid.len()];
    for (g, b) in grid.iter().zip(best.iter_mut()) {
        if *g <= rate + 1e-12 {
            *b = (prefix[0] - g).abs();
        }
    }
    for &target in &prefix[1..] {
        let mut next = vec![f64::INFINITY; grid.len()];
        for (vi, v) in grid.iter().enumerate() {
            for (ui, u) in grid.iter().enumerate() {
                let step = v - u;
                if best[ui].is_finite() && step >= -1e-12 && step <= rate + 1e-12 {
                    next[vi] = next[vi].min(best[ui]);
                }
            }
            next[vi] += (target - v).abs();
        }
        best = next;
    }
    grid.iter()
        .zip(&best)
        .filter(|(g, _)| (**g - mass).abs() < 1e-9)
        .map(|(_, b)| *b)
        .fold(f64::INFINITY, f64::min)
}

/// Ordinary least squares slope of `ln y` on `ln x`.
pub fn log_log_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let num: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let den: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    num / den
}

/// Mean and standard error of the mean.
pub fn mean_se(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, (var / n).sqrt())
}
