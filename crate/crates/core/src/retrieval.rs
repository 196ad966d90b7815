//! Classified-document store and the subject-search operations built on
//! a scheme: term search over perspective hierarchies, browsing with hit
//! counts, explode, broaden-until and see-also expansion.
//!
//! Documents are posted under every component of every classmark, keyed by
//! canonical component text. A component counts as a direct hit of the
//! deepest stored class containing it (see [`Scheme::resolve`]).

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::indexes::lookup_term;
use crate::notation::{self, decompose, NotationExpr, NotationSyntax, ROOT_LABEL};
use crate::scheme::{ClassRecord, Scheme};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ClassifiedDocument {
    pub doc_id: String,
    pub title: String,
    pub language: String,
    pub classmarks: Vec<NotationExpr>,
}

/// A document as read from a source file, classmarks still unparsed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DocumentInput {
    pub doc_id: String,
    pub title: String,
    pub language: String,
    pub classmarks: Vec<String>,
    /// Source line, for diagnostics.
    pub line: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Rejection {
    pub doc_id: String,
    pub line: Option<usize>,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct IngestReport {
    pub accepted: usize,
    pub rejected: Vec<Rejection>,
}

#[derive(Debug, Clone, Default)]
pub struct DocumentStore {
    docs: BTreeMap<String, ClassifiedDocument>,
    postings: BTreeMap<String, BTreeSet<String>>,
    components: BTreeMap<String, NotationExpr>,
}

impl DocumentStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.docs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.docs.is_empty()
    }

    pub fn documents(&self) -> impl Iterator<Item = &ClassifiedDocument> + '_ {
        self.docs.values()
    }

    pub fn document(&self, doc_id: &str) -> Option<&ClassifiedDocument> {
        self.docs.get(doc_id)
    }

    /// Documents posted under exactly this component.
    pub fn posting(&self, component: &NotationExpr) -> Option<&BTreeSet<String>> {
        self.postings.get(&component.canonical())
    }

    /// Distinct components with their postings.
    pub fn components(&self) -> impl Iterator<Item = (&NotationExpr, &BTreeSet<String>)> + '_ {
        self.components.iter().map(|(key, expr)| (expr, &self.postings[key]))
    }

    /// Parses and indexes each input. Rejections leave the store untouched
    /// for that document; the rest are accepted independently.
    pub fn ingest(&mut self, syntax: &NotationSyntax, inputs: impl IntoIterator<Item = DocumentInput>) -> IngestReport {
        let mut report = IngestReport::default();
        for input in inputs {
            match self.prepare(syntax, &input) {
                Ok(doc) => {
                    self.insert(doc);
                    report.accepted += 1;
                }
                Err(reason) => report.rejected.push(Rejection {
                    doc_id: input.doc_id.clone(),
                    line: input.line,
                    reason,
                }),
            }
        }
        report
    }

    fn prepare(
        &self,
        syntax: &NotationSyntax,
        input: &DocumentInput,
    ) -> std::result::Result<ClassifiedDocument, String> {
        if input.doc_id.trim().is_empty() {
            return Err("empty document id".into());
        }
        if self.docs.contains_key(&input.doc_id) {
            return Err(format!("duplicate document id {}", input.doc_id));
        }
        if input.classmarks.is_empty() {
            return Err("no classmarks".into());
        }
        let classmarks = input
            .classmarks
            .iter()
            .map(|mark| syntax.parse(mark).map_err(|e| format!("classmark {mark:?}: {e}")))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        Ok(ClassifiedDocument {
            doc_id: input.doc_id.clone(),
            title: input.title.clone(),
            language: input.language.clone(),
            classmarks,
        })
    }

    fn insert(&mut self, doc: ClassifiedDocument) {
        for mark in &doc.classmarks {
            for component in decompose(mark) {
                let key = component.key.canonical();
                self.postings.entry(key.clone()).or_default().insert(doc.doc_id.clone());
                self.components.entry(key).or_insert(component.key);
            }
        }
        self.docs.insert(doc.doc_id.clone(), doc);
    }
}

/// One row of a hit display.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct HitRow {
    pub notation: NotationExpr,
    pub caption: String,
    pub direct_hits: usize,
    pub aggregate_hits: usize,
    pub depth: usize,
    /// Caption of the discipline (or top-level class) the row is seen under.
    pub perspective: String,
    /// True when the row's class itself matched the query term.
    pub matched: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Crumb {
    pub notation: NotationExpr,
    pub caption: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BrowseView {
    /// `None` when browsing the root.
    pub class: Option<HitRow>,
    pub parent: Option<HitRow>,
    /// Ancestors from the top-level class down to the parent.
    pub breadcrumbs: Vec<Crumb>,
    pub children: Vec<HitRow>,
    /// Which count the caller asked to display.
    pub aggregate: bool,
}

impl BrowseView {
    /// The count selected by the aggregate flag.
    pub fn count(&self, row: &HitRow) -> usize {
        if self.aggregate {
            row.aggregate_hits
        } else {
            row.direct_hits
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Broadened {
    /// `None` is the root.
    pub notation: Option<NotationExpr>,
    pub label: String,
    pub hits: usize,
    pub steps: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RelatedRow {
    pub notation: NotationExpr,
    pub caption: String,
    pub direct_hits: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Suggestion {
    pub notation: NotationExpr,
    pub caption: String,
    pub score: u32,
}

/// A scheme joined with a document store. Direct postings per class are
/// computed once on construction.
pub struct Retrieval<'a> {
    scheme: &'a Scheme,
    store: &'a DocumentStore,
    direct: HashMap<String, BTreeSet<String>>,
}

impl<'a> Retrieval<'a> {
    pub fn new(scheme: &'a Scheme, store: &'a DocumentStore) -> Self {
        let mut direct: HashMap<String, BTreeSet<String>> = HashMap::new();
        for (component, docs) in store.components() {
            if let Some(class) = scheme.resolve(component) {
                direct.entry(class.key()).or_default().extend(docs.iter().cloned());
            }
        }
        Self { scheme, store, direct }
    }

    pub fn scheme(&self) -> &Scheme {
        self.scheme
    }

    pub fn direct_docs(&self, record: &ClassRecord) -> BTreeSet<String> {
        self.direct.get(&record.key()).cloned().unwrap_or_default()
    }

    pub fn direct_hits(&self, record: &ClassRecord) -> usize {
        self.direct.get(&record.key()).map_or(0, BTreeSet::len)
    }

    /// Direct hits plus the aggregates of the class's children.
    pub fn aggregate_hits(&self, record: &ClassRecord) -> usize {
        self.direct_hits(record)
            + self
                .scheme
                .children(Some(&record.notation))
                .into_iter()
                .map(|child| self.aggregate_hits(child))
                .sum::<usize>()
    }

    fn row(&self, record: &ClassRecord, lang: &str, matched: bool) -> HitRow {
        HitRow {
            notation: record.notation.clone(),
            caption: self.scheme.caption(record, lang),
            direct_hits: self.direct_hits(record),
            aggregate_hits: self.aggregate_hits(record),
            depth: self.scheme.depth(record),
            perspective: self.scheme.caption(self.scheme.perspective_of(record), lang),
            matched,
        }
    }

    /// Every document with a component at or below `target`; `None` is the root.
    pub fn explode(&self, target: Option<&NotationExpr>) -> BTreeSet<String> {
        let Some(target) = target else {
            return self.store.docs.keys().cloned().collect();
        };
        let mut closure: BTreeSet<String> = BTreeSet::new();
        let seeds = self
            .scheme
            .classes()
            .filter(|c| &c.notation == target || notation::contains(target, &c.notation));
        for seed in seeds {
            closure.insert(seed.key());
            closure.extend(
                self.scheme
                    .descendants(&seed.notation)
                    .into_iter()
                    .map(ClassRecord::key),
            );
        }
        let mut out = BTreeSet::new();
        for (component, docs) in self.store.components() {
            let hit = component == target
                || notation::contains(target, component)
                || self
                    .scheme
                    .resolve(component)
                    .is_some_and(|c| closure.contains(&c.key()));
            if hit {
                out.extend(docs.iter().cloned());
            }
        }
        out
    }

    /// Rows for the classes matching `query`, with the stored parent and
    /// descendants of each match that carry hits, in notation order.
    pub fn search_term(&self, query: &str, lang: &str) -> Vec<HitRow> {
        let matches = lookup_term(self.scheme, query, lang);
        let matched: BTreeSet<String> = matches.iter().map(|m| m.notation.canonical()).collect();
        let mut rows: BTreeMap<String, &ClassRecord> = BTreeMap::new();
        for m in &matches {
            let record = self.scheme.get(&m.notation).expect("lookup returns stored classes");
            rows.insert(record.key(), record);
            let context = self
                .scheme
                .parent(&record.notation)
                .into_iter()
                .chain(self.scheme.descendants(&record.notation));
            for other in context {
                if self.direct_hits(other) > 0 {
                    rows.insert(other.key(), other);
                }
            }
        }
        let mut out: Vec<HitRow> = rows
            .into_values()
            .map(|record| self.row(record, lang, matched.contains(&record.key())))
            .collect();
        out.sort_by(|a, b| a.notation.cmp(&b.notation));
        out
    }

    pub fn browse(&self, target: Option<&NotationExpr>, lang: &str, aggregate: bool) -> Result<BrowseView> {
        let Some(target) = target else {
            return Ok(BrowseView {
                class: None,
                parent: None,
                breadcrumbs: Vec::new(),
                children: self
                    .scheme
                    .root_classes()
                    .into_iter()
                    .map(|c| self.row(c, lang, false))
                    .collect(),
                aggregate,
            });
        };
        let record = self
            .scheme
            .get(target)
            .ok_or_else(|| Error::not_found("class", target.canonical()))?;
        let mut breadcrumbs: Vec<Crumb> = self
            .scheme
            .ancestors(&record.notation)
            .into_iter()
            .map(|a| Crumb {
                notation: a.notation.clone(),
                caption: self.scheme.caption(a, lang),
            })
            .collect();
        breadcrumbs.reverse();
        Ok(BrowseView {
            class: Some(self.row(record, lang, false)),
            parent: self.scheme.parent(&record.notation).map(|p| self.row(p, lang, false)),
            breadcrumbs,
            children: self
                .scheme
                .children(Some(&record.notation))
                .into_iter()
                .map(|c| self.row(c, lang, false))
                .collect(),
            aggregate,
        })
    }

    /// Broadens a simple number one digit at a time until explode reaches
    /// `min_hits`, stopping at the root.
    pub fn broaden_until(&self, start: &NotationExpr, min_hits: usize, lang: &str) -> Result<Broadened> {
        let mut current = Some(start.clone());
        let mut steps = 0;
        loop {
            let hits = self.explode(current.as_ref()).len();
            if hits >= min_hits || current.is_none() {
                let label = match &current {
                    None => ROOT_LABEL.to_string(),
                    Some(n) => self
                        .scheme
                        .get(n)
                        .map(|r| self.scheme.caption(r, lang))
                        .unwrap_or_default(),
                };
                return Ok(Broadened {
                    notation: current,
                    label,
                    hits,
                    steps,
                });
            }
            current = notation::broaden(current.as_ref().expect("checked above"))?;
            steps += 1;
        }
    }

    pub fn syndetic_expand(&self, target: &NotationExpr, lang: &str) -> Result<Vec<RelatedRow>> {
        let record = self
            .scheme
            .get(target)
            .ok_or_else(|| Error::not_found("class", target.canonical()))?;
        Ok(record
            .see_also
            .iter()
            .map(|t| {
                let related = self.scheme.get(t).expect("see-also targets are validated");
                RelatedRow {
                    notation: related.notation.clone(),
                    caption: self.scheme.caption(related, lang),
                    direct_hits: self.direct_hits(related),
                }
            })
            .collect())
    }
}

/// Lowercased alphanumeric runs.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
        .collect()
}

/// Shortest token probed on its own; shorter ones only take part in
/// bigrams, since substring matching makes them match almost anything.
pub const MIN_SUGGEST_TOKEN: usize = 3;

/// Ranks classes by summed match weights of the text's tokens and bigrams
/// against the term lookup.
pub fn suggest_classes(scheme: &Scheme, text: &str, lang: &str, top_k: usize) -> Vec<Suggestion> {
    let tokens = tokenize(text);
    let bigrams = tokens.windows(2).map(|w| format!("{} {}", w[0], w[1]));
    let singles = tokens
        .iter()
        .filter(|t| t.chars().count() >= MIN_SUGGEST_TOKEN)
        .cloned();
    let mut scores: BTreeMap<String, u32> = BTreeMap::new();
    for probe in singles.chain(bigrams) {
        for m in lookup_term(scheme, &probe, lang) {
            *scores.entry(m.notation.canonical()).or_default() += m.kind.weight();
        }
    }
    let mut out: Vec<Suggestion> = scores
        .into_iter()
        .map(|(key, score)| {
            let record = scheme.by_key(&key).expect("lookup returns stored classes");
            Suggestion {
                notation: record.notation.clone(),
                caption: scheme.caption(record, lang),
                score,
            }
        })
        .collect();
    out.sort_by(|a, b| b.score.cmp(&a.score).then_with(|| a.notation.cmp(&b.notation)));
    out.truncate(top_k);
    out
}
