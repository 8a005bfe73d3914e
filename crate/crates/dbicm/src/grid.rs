//! SNR grids written as `start:step:stop` or comma lists.

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum GridError {
    #[error("bad number '{0}' in grid")]
    Number(String),
    #[error("grid step must be positive")]
    Step,
    #[error("grid stop lies below start")]
    Order,
    #[error("grid is empty")]
    Empty,
    #[error("grid has more than {0} points")]
    TooLong(usize),
}

const MAX_POINTS: usize = 100_000;

fn num(s: &str) -> Result<f64, GridError> {
    let v: f64 = s.trim().parse().map_err(|_| GridError::Number(s.trim().to_string()))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(GridError::Number(s.trim().to_string()))
    }
}

/// Snaps to 1e-9 so `0:0.1:1` prints as `0.3` and not `0.30000000000000004`.
fn snap(x: f64) -> f64 {
    let r = (x * 1e9).round() / 1e9;
    if r == 0.0 {
        0.0
    } else {
        r
    }
}

/// Parses `"0:0.5:2"` (stop inclusive), `"0,4,8"` or a single value.
pub fn parse_grid(s: &str) -> Result<Vec<f64>, GridError> {
    let s = s.trim();
    if s.is_empty() {
        return Err(GridError::Empty);
    }
    if s.contains(':') {
        let parts: Vec<&str> = s.split(':').collect();
        let (a, step, b) = match parts.as_slice() {
            [a, b] => (num(a)?, 1.0, num(b)?),
            [a, st, b] => (num(a)?, num(st)?, num(b)?),
            _ => return Err(GridError::Number(s.to_string())),
        };
        if step <= 0.0 {
            return Err(GridError::Step);
        }
        if b < a {
            return Err(GridError::Order);
        }
        let count = ((b - a) / step + 1e-9).floor() as usize + 1;
        if count > MAX_POINTS {
            return Err(GridError::TooLong(MAX_POINTS));
        }
        return Ok((0..count).map(|k| snap(a + k as f64 * step)).collect());
    }
    s.split(',').map(num).collect()
}
