//! Deliberately naive reference implementations used to cross-check the
//! optimized estimators on short series.
#![allow(dead_code)]

/// Cumulative sum of the demeaned series, plain loops.
pub fn profile(series: &[f64]) -> Vec<f64> {
    let mean = series.iter().sum::<f64>() / series.len() as f64;
    let mut out = Vec::with_capacity(series.len());
    let mut acc = 0.0;
    for v in series {
        acc += v - mean;
        out.push(acc);
    }
    out
}

/// Least-squares line through `(1, v_1), ..., (s, v_s)` via the 2x2 normal
/// equations on raw (uncentered) time indices; returns residuals.
fn ols_residuals(values: &[f64]) -> Vec<f64> {
    let n = values.len() as f64;
    let (mut st, mut stt, mut sv, mut stv) = (0.0, 0.0, 0.0, 0.0);
    for (k, v) in values.iter().enumerate() {
        let t = (k + 1) as f64;
        st += t;
        stt += t * t;
        sv += v;
        stv += t * v;
    }
    let det = n * stt - st * st;
    let intercept = (stt * sv - st * stv) / det;
    let slope = (n * stv - st * sv) / det;
    values
        .iter()
        .enumerate()
        .map(|(k, v)| v - intercept - slope * (k + 1) as f64)
        .collect()
}

/// `(xy, xx, yy)` DCCA moments of two profiles with boxes of size `s`
/// starting every `stride` points.
pub fn dcca(px: &[f64], py: &[f64], s: usize, stride: usize) -> (f64, f64, f64) {
    let mut acc = (0.0, 0.0, 0.0);
    let mut boxes = 0;
    let mut start = 0;
    while start + s <= px.len() {
        let rx = ols_residuals(&px[start..start + s]);
        let ry = ols_residuals(&py[start..start + s]);
        let d = (s - 1) as f64;
        acc.0 += rx.iter().zip(&ry).map(|(a, b)| a * b).sum::<f64>() / d;
        acc.1 += rx.iter().map(|a| a * a).sum::<f64>() / d;
        acc.2 += ry.iter().map(|b| b * b).sum::<f64>() / d;
        boxes += 1;
        start += stride;
    }
    let n = boxes as f64;
    (acc.0 / n, acc.1 / n, acc.2 / n)
}

/// Centered moving average recomputed from scratch at every position.
fn ma_residuals(p: &[f64], window: usize) -> Vec<f64> {
    let half = window / 2;
    (half..p.len() - half)
        .map(|i| {
            let ma = p[i - half..=i + half].iter().sum::<f64>() / window as f64;
            p[i] - ma
        })
        .collect()
}

pub fn dmca(px: &[f64], py: &[f64], window: usize) -> (f64, f64, f64) {
    let rx = ma_residuals(px, window);
    let ry = ma_residuals(py, window);
    let n = (px.len() - window + 1) as f64;
    assert_eq!(rx.len() as f64, n);
    (
        rx.iter().zip(&ry).map(|(a, b)| a * b).sum::<f64>() / n,
        rx.iter().map(|a| a * a).sum::<f64>() / n,
        ry.iter().map(|b| b * b).sum::<f64>() / n,
    )
}

pub fn hxa(px: &[f64], py: &[f64], lag: usize) -> (f64, f64, f64) {
    let n = px.len() - lag;
    let mut acc = (0.0, 0.0, 0.0);
    for t in 0..n {
        let dx = px[t + lag] - px[t];
        let dy = py[t + lag] - py[t];
        acc.0 += dx * dy;
        acc.1 += dx * dx;
        acc.2 += dy * dy;
    }
    let n = n as f64;
    (acc.0 / n, acc.1 / n, acc.2 / n)
}

/// Ordinary least-squares slope of `ln v` on `ln s`.
pub fn loglog_slope(points: &[(f64, f64)]) -> f64 {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|p| p.0 > 0.0 && p.1 > 0.0)
        .map(|p| (p.0.ln(), p.1.ln()))
        .collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    sxy / sxx
}

/// Small deterministic corpus of awkward short series (T <= 50).
pub fn corpus() -> Vec<(Vec<f64>, Vec<f64>)> {
    let lcg = |seed: u64, n: usize| -> Vec<f64> {
        let mut state = seed;
        (0..n)
            .map(|_| {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                ((state >> 11) as f64 / (1u64 << 53) as f64) - 0.5
            })
            .collect()
    };
    let ramp: Vec<f64> = (0..40).map(|i| i as f64 * 0.25).collect();
    let spikes: Vec<f64> = (0..30).map(|i| if i % 7 == 0 { 1e3 } else { -1.0 }).collect();
    let offset: Vec<f64> = lcg(3, 50).iter().map(|v| v + 1e6).collect();
    vec![
        (lcg(1, 50), lcg(2, 50)),
        (lcg(5, 24), lcg(5, 24).iter().map(|v| -2.0 * v).collect()),
        (ramp.clone(), lcg(7, 40)),
        (spikes, lcg(9, 30)),
        (offset, lcg(11, 50)),
        (lcg(13, 20), ramp[..20].iter().map(|v| v * v).collect()),
    ]
}
