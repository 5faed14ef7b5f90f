//! Builders for window-based intrusion-detection formulas and the
//! controller's winning condition.

use super::{Formula, LtlError};

pub const ANOMALY: &str = "anomaly";
pub const ATTACK: &str = "attack";

// `F<=0 φ` collapses to `φ` so that zero windows produce plain `X` chains.
fn within(k: u32, f: Formula) -> Formula {
    if k == 0 {
        f
    } else {
        Formula::bounded(k, f)
    }
}

// anomaly & X F<=m1 (anomaly & X F<=m2 ( ... tail))
fn chain(windows: &[u32], tail: Formula) -> Formula {
    windows
        .iter()
        .rev()
        .fold(tail, |inner, &m| {
            Formula::and(Formula::atom(ANOMALY), Formula::next(within(m, inner)))
        })
}

/// `F (anomaly & X F<=m1 (anomaly & ... X F<=mj anomaly))`.
pub fn build_alarm(windows: &[u32]) -> Result<Formula, LtlError> {
    if windows.is_empty() {
        return Err(LtlError::EmptyWindows);
    }
    Ok(Formula::eventually(chain(windows, Formula::atom(ANOMALY))))
}

/// `F<=n attack`.
pub fn build_detect(n: u32) -> Formula {
    within(n, Formula::atom(ATTACK))
}

/// Alarm with window `m` followed by detection within `n` steps of the
/// triggering anomaly. With `extended`, the detected attack must be followed
/// by a second one (`attack & X F attack`), so a single attack after the
/// alarm does not by itself hand the win to the controller.
pub fn build_ids(m: u32, n: u32, extended: bool) -> Formula {
    build_ids_nested(&[m], n, extended).expect("single window")
}

/// [`build_ids`] generalised to nested alarm windows.
pub fn build_ids_nested(windows: &[u32], n: u32, extended: bool) -> Result<Formula, LtlError> {
    if windows.is_empty() {
        return Err(LtlError::EmptyWindows);
    }
    let attack = if extended {
        Formula::and(
            Formula::atom(ATTACK),
            Formula::next(Formula::eventually(Formula::atom(ATTACK))),
        )
    } else {
        Formula::atom(ATTACK)
    };
    let trigger = Formula::and(
        Formula::atom(ANOMALY),
        Formula::next(within(n, attack)),
    );
    Ok(Formula::eventually(chain(windows, trigger)))
}

/// `ids | task`.
pub fn build_win(ids: Formula, task: Formula) -> Formula {
    Formula::or(ids, task)
}
