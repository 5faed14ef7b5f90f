use super::linear::solve_transient;
use super::VerifyError;

/// Statistics of a counting IDS that alarms when more than `threshold` of
/// the last `window` steps were anomalous.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdsStats {
    /// Probability that one window of i.i.d. steps exceeds the threshold.
    pub alarm_prob: f64,
    /// Mean number of steps until the first alarm, the alarming step
    /// included; `f64::INFINITY` when no alarm can occur.
    pub expected_steps: f64,
}

const MAX_WINDOW: u32 = 24;

fn binomial(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

pub fn window_ids_analytics(p_eps: f64, window: u32, threshold: u32) -> Result<IdsStats, VerifyError> {
    if !(0.0..=1.0).contains(&p_eps) {
        return Err(VerifyError::Parameter(format!("anomaly probability {p_eps}")));
    }
    if window == 0 || window > MAX_WINDOW {
        return Err(VerifyError::Parameter(format!(
            "window {window} (must be in 1..={MAX_WINDOW})"
        )));
    }
    let alarm_prob: f64 = (threshold + 1..=window)
        .map(|k| binomial(window, k) * p_eps.powi(k as i32) * (1.0 - p_eps).powi((window - k) as i32))
        .sum();
    if threshold >= window || p_eps == 0.0 {
        return Ok(IdsStats {
            alarm_prob,
            expected_steps: f64::INFINITY,
        });
    }
    // Chain over the anomaly pattern of the last `window − 1` steps (bit 0
    // most recent). Before the first step the pattern is all clear.
    let hist = window - 1;
    let n = 1usize << hist;
    let mask = n - 1;
    let mut rows = Vec::with_capacity(n);
    for h in 0..n {
        let seen = h.count_ones();
        let mut row = Vec::with_capacity(2);
        for (bit, p) in [(0usize, 1.0 - p_eps), (1, p_eps)] {
            if p == 0.0 || seen + bit as u32 > threshold {
                continue;
            }
            row.push((((h << 1) | bit) & mask, p));
        }
        rows.push(row);
    }
    let steps = solve_transient(&rows, &vec![1.0; n]);
    Ok(IdsStats {
        alarm_prob,
        expected_steps: steps[0],
    })
}
