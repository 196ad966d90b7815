//! Plain-text tables for terminal output.

use crate::retrieval::{BrowseView, HitRow};

/// Column-aligned rows; the last column is left unpadded.
pub fn aligned(header: &[&str], rows: &[Vec<String>]) -> String {
    let columns = header.len();
    let mut widths: Vec<usize> = header.iter().map(|h| display_width(h)).collect();
    for row in rows {
        for (i, cell) in row.iter().enumerate().take(columns) {
            widths[i] = widths[i].max(display_width(cell));
        }
    }
    let mut out = String::new();
    let mut line = |cells: &[String]| {
        let mut text = String::new();
        for (i, cell) in cells.iter().enumerate() {
            text.push_str(cell);
            if i + 1 < cells.len() {
                let pad = widths[i] - display_width(cell) + 2;
                text.extend(std::iter::repeat_n(' ', pad));
            }
        }
        out.push_str(text.trim_end());
        out.push('\n');
    };
    line(&header.iter().map(|h| h.to_string()).collect::<Vec<_>>());
    for row in rows {
        line(row);
    }
    out
}

/// Term-search display: query line, then notation, caption and hits.
pub fn hit_table(query: &str, rows: &[HitRow], aggregate: bool) -> String {
    let body: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            let hits = if aggregate { r.aggregate_hits } else { r.direct_hits };
            vec![r.notation.canonical(), r.caption.clone(), hits.to_string()]
        })
        .collect();
    format!("{query}\n{}", aligned(&["Notation", "Caption", "Hits"], &body))
}

pub fn browse_table(view: &BrowseView) -> String {
    let mut out = String::new();
    if !view.breadcrumbs.is_empty() {
        let trail: Vec<String> = view
            .breadcrumbs
            .iter()
            .map(|c| format!("{} {}", c.notation, c.caption))
            .collect();
        out.push_str(&trail.join(" > "));
        out.push('\n');
    }
    let mut rows = Vec::new();
    if let Some(class) = &view.class {
        rows.push(vec![
            class.notation.canonical(),
            class.caption.clone(),
            view.count(class).to_string(),
        ]);
    }
    for child in &view.children {
        rows.push(vec![
            format!("  {}", child.notation),
            child.caption.clone(),
            view.count(child).to_string(),
        ]);
    }
    out.push_str(&aligned(&["Notation", "Caption", "Hits"], &rows));
    out
}

/// Width in chars; wide and combining characters are not accounted for.
fn display_width(text: &str) -> usize {
    text.chars().count()
}
