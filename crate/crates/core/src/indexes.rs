//! Word access to a scheme: alphabetical listing, chain index, relative
//! index and the term lookup used by retrieval.
//!
//! Matching folds case with `to_lowercase` and nothing else; there is no
//! stemming or transliteration.

use std::collections::{BTreeMap, HashSet};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::notation::NotationExpr;
use crate::scheme::Scheme;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ListingEntry {
    pub term: String,
    pub notation: NotationExpr,
}

/// Captions and index terms of every class, once per class, in codepoint order.
pub fn alphabetical_listing(scheme: &Scheme, lang: &str) -> Vec<ListingEntry> {
    let mut out: Vec<ListingEntry> = scheme
        .classes()
        .flat_map(|record| {
            record.terms(lang).into_iter().map(move |term| ListingEntry {
                term: term.to_string(),
                notation: record.notation.clone(),
            })
        })
        .collect();
    out.sort_by(|a, b| a.term.cmp(&b.term).then_with(|| a.notation.cmp(&b.notation)));
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ChainEntry {
    pub notation: NotationExpr,
    /// Captions from the class itself up to its top-level ancestor.
    pub chain: Vec<String>,
}

pub fn chain_index(scheme: &Scheme, lang: &str) -> Result<Vec<ChainEntry>> {
    scheme
        .classes()
        .map(|record| {
            let mut chain = vec![scheme.caption(record, lang)];
            let mut seen = vec![record.key()];
            let mut current = scheme.parent(&record.notation);
            while let Some(parent) = current {
                let key = parent.key();
                if seen.contains(&key) {
                    seen.push(key);
                    return Err(Error::Cycle(seen));
                }
                seen.push(key);
                chain.push(scheme.caption(parent, lang));
                current = scheme.parent(&parent.notation);
            }
            Ok(ChainEntry {
                notation: record.notation.clone(),
                chain,
            })
        })
        .collect()
}

/// One placement of a term; `context` names the discipline it sits under.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Placement {
    pub context: String,
    pub notation: NotationExpr,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IndexEntry {
    pub term: String,
    pub context: Option<String>,
    pub notation: NotationExpr,
    pub language: String,
}

/// Gathers each term's placements across the scheme. A caption is its own
/// class's primary placement (empty context); index terms are qualified by
/// the nearest discipline above the class.
pub fn relative_index(scheme: &Scheme, lang: &str) -> BTreeMap<String, Vec<Placement>> {
    let mut index: BTreeMap<String, Vec<Placement>> = BTreeMap::new();
    for record in scheme.classes() {
        let caption = record.caption(lang);
        for term in record.terms(lang) {
            let context = if Some(term) == caption {
                String::new()
            } else {
                scheme
                    .discipline_of(record)
                    .map(|d| scheme.caption(d, lang).to_lowercase())
                    .unwrap_or_default()
            };
            index.entry(term.to_string()).or_default().push(Placement {
                context,
                notation: record.notation.clone(),
            });
        }
    }
    for placements in index.values_mut() {
        placements.sort_by(|a, b| a.context.cmp(&b.context).then_with(|| a.notation.cmp(&b.notation)));
    }
    index
}

/// The relative index flattened into entries.
pub fn relative_index_entries(scheme: &Scheme, lang: &str) -> Vec<IndexEntry> {
    relative_index(scheme, lang)
        .into_iter()
        .flat_map(|(term, placements)| {
            placements.into_iter().map(move |p| IndexEntry {
                term: term.clone(),
                context: (!p.context.is_empty()).then_some(p.context),
                notation: p.notation,
                language: lang.to_string(),
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MatchKind {
    Exact,
    Prefix,
    Substring,
}

impl MatchKind {
    pub fn weight(self) -> u32 {
        match self {
            MatchKind::Exact => 3,
            MatchKind::Prefix => 2,
            MatchKind::Substring => 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TermMatch {
    pub notation: NotationExpr,
    pub term: String,
    pub kind: MatchKind,
}

/// Case-insensitive match of `query` against captions and index terms;
/// one row per class with its best match, exact before prefix before
/// substring, then by notation.
pub fn lookup_term(scheme: &Scheme, query: &str, lang: &str) -> Vec<TermMatch> {
    let needle = query.trim().to_lowercase();
    if needle.is_empty() {
        return Vec::new();
    }
    let mut out: Vec<TermMatch> = scheme
        .classes()
        .filter_map(|record| {
            record
                .terms(lang)
                .into_iter()
                .filter_map(|term| {
                    let folded = term.to_lowercase();
                    let kind = if folded == needle {
                        MatchKind::Exact
                    } else if folded.starts_with(&needle) {
                        MatchKind::Prefix
                    } else if folded.contains(&needle) {
                        MatchKind::Substring
                    } else {
                        return None;
                    };
                    Some((kind, term))
                })
                .min_by_key(|(kind, _)| *kind)
                .map(|(kind, term)| TermMatch {
                    notation: record.notation.clone(),
                    term: term.to_string(),
                    kind,
                })
        })
        .collect();
    out.sort_by(|a, b| a.kind.cmp(&b.kind).then_with(|| a.notation.cmp(&b.notation)));
    out
}

fn tsv_field(text: &str) -> String {
    text.replace(['\t', '\n', '\r'], " ")
}

fn tsv_lines(mut rows: Vec<(String, String, String)>) -> String {
    rows.sort();
    let mut out = String::new();
    for (term, context, notation) in rows {
        out.push_str(&format!(
            "{}\t{}\t{}\n",
            tsv_field(&term),
            tsv_field(&context),
            notation
        ));
    }
    out
}

/// Separator between ancestor captions in exported chain contexts.
pub const CHAIN_SEPARATOR: &str = " < ";

/// `term<TAB>context<TAB>notation` lines, sorted; the context is the
/// ancestor chain, nearest first.
pub fn chain_index_tsv(scheme: &Scheme, lang: &str) -> Result<String> {
    let rows = chain_index(scheme, lang)?
        .into_iter()
        .map(|entry| {
            let context = entry.chain[1..].join(CHAIN_SEPARATOR);
            (entry.chain[0].clone(), context, entry.notation.canonical())
        })
        .collect();
    Ok(tsv_lines(rows))
}

pub fn relative_index_tsv(scheme: &Scheme, lang: &str) -> String {
    let rows = relative_index(scheme, lang)
        .into_iter()
        .flat_map(|(term, placements)| {
            placements
                .into_iter()
                .map(move |p| (term.clone(), p.context, p.notation.canonical()))
        })
        .collect();
    tsv_lines(rows)
}

/// Distinct classes reached by any match of `query`.
pub fn matched_classes(scheme: &Scheme, query: &str, lang: &str) -> Vec<NotationExpr> {
    let mut seen = HashSet::new();
    lookup_term(scheme, query, lang)
        .into_iter()
        .filter(|m| seen.insert(m.notation.canonical()))
        .map(|m| m.notation)
        .collect()
}
