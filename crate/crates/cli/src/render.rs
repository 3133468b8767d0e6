use std::fmt::Write;

use approval_heuristics::{Ballot, Candidates, ExactUtility};

/// Ballot as labels; the empty ballot prints as `{}`.
pub fn profile(candidates: &Candidates, ballot: Ballot) -> String {
    if ballot.is_empty() {
        "{}".to_string()
    } else {
        candidates.format_set(ballot)
    }
}

pub fn value(v: Option<&ExactUtility>) -> String {
    v.map_or_else(|| "-".to_string(), ExactUtility::to_fixed6)
}

/// Left-aligned columns separated by two spaces, no trailing whitespace.
pub fn table(headers: &[&str], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = headers.iter().map(|h| h.len()).collect();
    for row in rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let mut out = String::new();
    let header: Vec<String> = headers.iter().map(|h| h.to_string()).collect();
    for row in std::iter::once(&header).chain(rows) {
        let mut line = String::new();
        for (cell, w) in row.iter().zip(&widths) {
            let _ = write!(line, "{cell:<w$}  ");
        }
        out.push_str(line.trim_end());
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn aligns_columns() {
        let t = table(
            &["a", "bb"],
            &[
                vec!["xyz".into(), "1".into()],
                vec!["q".into(), "22".into()],
            ],
        );
        assert_eq!(t, "a    bb\nxyz  1\nq    22\n");
    }
}
