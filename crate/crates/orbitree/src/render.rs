//! Deterministic figure emission for orbit matrices: ASCII (1 → `X`,
//! 0 → space, fixed-width rows joined by newlines) and plain PBM.

use crate::error::{Error, Result};
use crate::series::{OrbitMatrix, Poly2};

/// The expected ASCII rendering of the 32-row orbit matrix of `1 0^31`
/// under `b`: a Sierpinski triangle.
pub const SIERPINSKI_32: &str = include_str!("../golden/sierpinski_10_31.txt");

/// Renders a matrix with `X` for 1 and a space for 0. Rows keep their fixed
/// width (trailing spaces are not trimmed) and are joined by `\n`.
pub fn matrix_to_ascii(m: &OrbitMatrix) -> String {
    (0..m.height())
        .map(|i| {
            (0..m.width())
                .map(|j| if m.bit(i, j) { 'X' } else { ' ' })
                .collect::<String>()
        })
        .collect::<Vec<_>>()
        .join("\n")
}

/// Encodes a matrix as a plain (P1) PBM: magic line, dimension line, then
/// one line of space-separated bits per row.
pub fn matrix_to_pbm(m: &OrbitMatrix) -> Vec<u8> {
    let mut out = format!("P1\n{} {}\n", m.width(), m.height());
    for i in 0..m.height() {
        let row: Vec<&str> = (0..m.width())
            .map(|j| if m.bit(i, j) { "1" } else { "0" })
            .collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out.into_bytes()
}

/// Parses a plain PBM produced by [`matrix_to_pbm`] (whitespace-separated
/// bits after the `P1` magic and dimensions).
pub fn parse_pbm(bytes: &[u8]) -> Result<OrbitMatrix> {
    let text = std::str::from_utf8(bytes)
        .map_err(|_| Error::InvalidWord("PBM is not valid UTF-8".into()))?;
    let mut tokens = text.split_whitespace();
    if tokens.next() != Some("P1") {
        return Err(Error::InvalidWord("missing P1 magic".into()));
    }
    let mut dim = || -> Result<usize> {
        tokens
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| Error::InvalidWord("missing PBM dimension".into()))
    };
    let width = dim()?;
    let height = dim()?;
    let mut rows = Vec::with_capacity(height);
    for _ in 0..height {
        let mut row = Poly2::zero(width);
        for j in 0..width {
            match tokens.next() {
                Some("1") => row.set(j, true),
                Some("0") => {}
                other => {
                    return Err(Error::InvalidWord(format!(
                        "bad PBM bit {other:?}"
                    )))
                }
            }
        }
        rows.push(row);
    }
    Ok(OrbitMatrix::from_rows(rows))
}
