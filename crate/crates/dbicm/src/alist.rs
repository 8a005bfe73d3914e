//! Sparse parity-check matrices in MacKay's alist text format.
//!
//! ```text
//! N M
//! max_column_weight max_row_weight
//! column weights (N values)
//! row weights (M values)
//! N lines: 1-based row indices of each column, zero padded
//! M lines: 1-based column indices of each row, zero padded
//! ```
//!
//! The reader accepts files with or without the zero padding and checks the
//! column lists against the row lists.

use std::fmt::Write as _;

use dbicm_core::TannerCode;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum AlistError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("unexpected end of file while reading {0}")]
    Truncated(&'static str),
    #[error("column lists and row lists describe different matrices")]
    Inconsistent,
    #[error(transparent)]
    Graph(#[from] dbicm_core::ldpc::LdpcError),
}

pub fn write_alist(code: &TannerCode) -> String {
    let n = code.n();
    let m = code.checks();
    let col_w = code.variable_degrees();
    let row_w = code.check_degrees();
    let max_col = col_w.iter().copied().max().unwrap_or(0);
    let max_row = row_w.iter().copied().max().unwrap_or(0);
    let mut out = String::new();
    let join = |v: &mut dyn Iterator<Item = usize>| v.map(|x| x.to_string()).collect::<Vec<_>>().join(" ");
    writeln!(out, "{n} {m}").unwrap();
    writeln!(out, "{max_col} {max_row}").unwrap();
    writeln!(out, "{}", join(&mut col_w.iter().copied())).unwrap();
    writeln!(out, "{}", join(&mut row_w.iter().copied())).unwrap();
    for v in 0..n {
        let mut idx: Vec<usize> = code.variable_neighbors(v).iter().map(|&c| c as usize + 1).collect();
        idx.sort_unstable();
        idx.resize(max_col, 0);
        writeln!(out, "{}", join(&mut idx.into_iter())).unwrap();
    }
    for c in 0..m {
        let mut idx: Vec<usize> = code.check_neighbors(c).iter().map(|&v| v as usize + 1).collect();
        idx.sort_unstable();
        idx.resize(max_row, 0);
        writeln!(out, "{}", join(&mut idx.into_iter())).unwrap();
    }
    out
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
}

impl<'a> Lines<'a> {
    /// Next non-blank line as numbers, with its 1-based line number.
    fn next_numbers(&mut self, what: &'static str) -> Result<(usize, Vec<usize>), AlistError> {
        for (i, line) in self.inner.by_ref() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let nums = line
                .split_whitespace()
                .map(|t| {
                    t.parse::<usize>().map_err(|_| AlistError::Syntax {
                        line: i + 1,
                        msg: format!("'{t}' is not a non-negative integer"),
                    })
                })
                .collect::<Result<Vec<_>, _>>()?;
            return Ok((i + 1, nums));
        }
        Err(AlistError::Truncated(what))
    }

    fn expect(&mut self, what: &'static str, count: usize) -> Result<(usize, Vec<usize>), AlistError> {
        let (line, nums) = self.next_numbers(what)?;
        if nums.len() != count {
            return Err(AlistError::Syntax {
                line,
                msg: format!("expected {count} values for {what}, found {}", nums.len()),
            });
        }
        Ok((line, nums))
    }
}

/// Reads one index list, dropping zero padding and checking bounds.
fn index_list(line: usize, nums: &[usize], weight: usize, bound: usize) -> Result<Vec<usize>, AlistError> {
    let idx: Vec<usize> = nums.iter().copied().filter(|&x| x != 0).collect();
    if idx.len() != weight {
        return Err(AlistError::Syntax {
            line,
            msg: format!("expected {weight} indices, found {}", idx.len()),
        });
    }
    if let Some(&bad) = idx.iter().find(|&&x| x > bound) {
        return Err(AlistError::Syntax {
            line,
            msg: format!("index {bad} exceeds {bound}"),
        });
    }
    Ok(idx.into_iter().map(|x| x - 1).collect())
}

pub fn parse_alist(text: &str) -> Result<TannerCode, AlistError> {
    let mut lines = Lines {
        inner: text.lines().enumerate(),
    };
    let (_, dims) = lines.expect("dimensions", 2)?;
    let (n, m) = (dims[0], dims[1]);
    lines.expect("maximum weights", 2)?;
    let (_, col_w) = lines.expect("column weights", n)?;
    let (_, row_w) = lines.expect("row weights", m)?;
    let mut cols = Vec::with_capacity(n);
    for &w in &col_w {
        let (line, nums) = lines.next_numbers("column lists")?;
        cols.push(index_list(line, &nums, w, m)?);
    }
    let mut rows = Vec::with_capacity(m);
    for &w in &row_w {
        let (line, nums) = lines.next_numbers("row lists")?;
        rows.push(index_list(line, &nums, w, n)?);
    }
    let mut from_rows: Vec<(usize, usize)> = rows
        .iter()
        .enumerate()
        .flat_map(|(c, r)| r.iter().map(move |&v| (c, v)))
        .collect();
    let mut from_cols: Vec<(usize, usize)> = cols
        .iter()
        .enumerate()
        .flat_map(|(v, cs)| cs.iter().map(move |&c| (c, v)))
        .collect();
    from_rows.sort_unstable();
    from_cols.sort_unstable();
    if from_rows != from_cols {
        return Err(AlistError::Inconsistent);
    }
    Ok(TannerCode::from_edges(n, m, &from_rows)?)
}
