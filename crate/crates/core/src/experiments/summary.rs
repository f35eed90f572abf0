//! Small summaries used by the experiments: quantiles, log-log slopes,
//! two-sample Kolmogorov-Smirnov distance and Spearman correlation.

/// Linearly interpolated quantile of sorted data (R type 7).
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    assert!(!sorted.is_empty(), "quantile of empty sample");
    let h = (sorted.len() - 1) as f64 * q.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn sorted(values: &[f64]) -> Vec<f64> {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

pub const QUANTILE_LEVELS: [f64; 5] = [0.05, 0.25, 0.5, 0.75, 0.95];

pub fn quantile_table(values: &[f64]) -> [f64; 5] {
    let s = sorted(values);
    QUANTILE_LEVELS.map(|q| quantile_sorted(&s, q))
}

/// Ordinary least squares slope of `y` on `x` and its standard error
/// (`NaN` when fewer than three points).
pub fn ols(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    if x.len() < 3 {
        return (slope, f64::NAN);
    }
    let icept = my - slope * mx;
    let rss: f64 = x.iter().zip(y).map(|(a, b)| (b - icept - slope * a).powi(2)).sum();
    (slope, (rss / (n - 2.0) / sxx).sqrt())
}

/// `sup_x |F_a(x) - F_b(x)|` for two empirical distributions.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    let (a, b) = (sorted(a), sorted(b));
    let (n, m) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut d) = (0, 0, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / n - j as f64 / m).abs());
    }
    d
}

/// Ranks starting at 1, ties sharing their average rank.
pub fn ranks(values: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut out = vec![0.0; values.len()];
    let mut k = 0;
    while k < idx.len() {
        let mut end = k;
        while end + 1 < idx.len() && values[idx[end + 1]] == values[idx[k]] {
            end += 1;
        }
        let avg = (k + end) as f64 / 2.0 + 1.0;
        for &i in &idx[k..=end] {
            out[i] = avg;
        }
        k = end + 1;
    }
    out
}

fn pearson_corr(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    sxy / (sxx * syy).sqrt()
}

pub fn spearman(x: &[f64], y: &[f64]) -> f64 {
    pearson_corr(&ranks(x), &ranks(y))
}

/// Spearman matrix of the columns of `rows`.
pub fn spearman_matrix<const K: usize>(rows: &[[f64; K]]) -> [[f64; K]; K] {
    let cols: Vec<Vec<f64>> = (0..K).map(|k| rows.iter().map(|r| r[k]).collect()).collect();
    let mut m = [[1.0; K]; K];
    for a in 0..K {
        for b in a + 1..K {
            let r = spearman(&cols[a], &cols[b]);
            m[a][b] = r;
            m[b][a] = r;
        }
    }
    m
}
