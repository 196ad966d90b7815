//! Operations shared by the CLI and the HTTP API. Every operation returns a
//! serializable value; both front ends render the same value.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::{Arc, Mutex, RwLock};

use classweave_core::indexes::{self, ChainEntry, IndexEntry};
use classweave_core::interchange::{self, Concordance, Translation};
use classweave_core::notation::Digits;
use classweave_core::retrieval::{
    suggest_classes, Broadened, BrowseView, ClassifiedDocument, Crumb, DocumentInput, DocumentStore, HitRow,
    IngestReport, RelatedRow, Retrieval, Suggestion,
};
use classweave_core::scheme::{AuthorityRecord, Label, SeeAlso};
use classweave_core::synthesis::{self, AddInstruction};
use classweave_core::{ClassRecord, HierarchyMode, NotationExpr, Scheme};
use serde::Serialize;

use crate::config::ServiceConfig;
use crate::error::ServiceError;

pub type Result<T> = std::result::Result<T, ServiceError>;

pub const DEFAULT_SUGGESTIONS: usize = 5;

/// A loader or ingest problem, located by file and line.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SourceDiagnostic {
    pub path: String,
    pub line: Option<usize>,
    pub message: String,
}

impl std::fmt::Display for SourceDiagnostic {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.line {
            Some(line) => write!(f, "{}:{line}: {}", self.path, self.message),
            None => write!(f, "{}: {}", self.path, self.message),
        }
    }
}

/// Documents as seen by one generation of readers.
#[derive(Debug, Default)]
pub struct Snapshot {
    pub store: DocumentStore,
}

/// Loaded schemes and concordance, immutable after startup, plus the
/// swappable document snapshot.
pub struct Service {
    config: ServiceConfig,
    schemes: Vec<Scheme>,
    sources: Vec<PathBuf>,
    concordance: Concordance,
    diagnostics: Vec<SourceDiagnostic>,
    snapshot: RwLock<Arc<Snapshot>>,
    ingest_lock: Mutex<()>,
    empty: DocumentStore,
}

#[derive(Debug, Serialize)]
pub struct SchemeSummary {
    pub id: String,
    pub title: String,
    pub mode: HierarchyMode,
    pub default_lang: String,
    pub classes: usize,
    pub languages: Vec<String>,
    pub facets: Vec<String>,
    pub formulas: Vec<String>,
    pub add_instructions: usize,
    pub primary: bool,
}

#[derive(Debug, Serialize)]
pub struct SchemeList {
    pub schemes: Vec<SchemeSummary>,
    pub documents: usize,
    pub concordance_entries: usize,
}

#[derive(Debug, Serialize)]
pub struct SourceSummary {
    pub id: String,
    pub path: String,
    pub classes: usize,
}

#[derive(Debug, Serialize)]
pub struct ValidationReport {
    pub ok: bool,
    pub schemes: Vec<SourceSummary>,
    pub documents: usize,
    pub concordance_entries: usize,
    pub diagnostics: Vec<SourceDiagnostic>,
}

#[derive(Debug, Serialize)]
pub struct ClassView {
    pub scheme: String,
    pub notation: NotationExpr,
    pub caption: String,
    pub label: Label,
    pub direct_hits: usize,
    pub aggregate_hits: usize,
    pub parent: Option<Crumb>,
    /// Top-level class first.
    pub breadcrumbs: Vec<Crumb>,
    pub children: Vec<HitRow>,
    pub see_also: Vec<SeeAlso>,
    pub record: ClassRecord,
}

#[derive(Debug, Serialize)]
pub struct SearchResult {
    pub query: String,
    pub lang: String,
    pub rows: Vec<HitRow>,
}

#[derive(Debug, Serialize)]
pub struct ExplodeResult {
    /// `None` explodes the root.
    pub notation: Option<NotationExpr>,
    pub count: usize,
    pub documents: Vec<ClassifiedDocument>,
}

#[derive(Debug, Serialize)]
pub struct BroadenResult {
    pub start: NotationExpr,
    pub min_hits: usize,
    pub reached: Broadened,
}

#[derive(Debug, Serialize)]
pub struct RelatedResult {
    pub notation: NotationExpr,
    pub rows: Vec<RelatedRow>,
}

#[derive(Debug, Serialize)]
pub struct SuggestResult {
    pub text: String,
    pub suggestions: Vec<Suggestion>,
}

#[derive(Debug, Serialize)]
pub struct SynthesisResult {
    pub scheme: String,
    pub notation: String,
}

#[derive(Debug, Serialize)]
pub struct Expansion {
    pub scheme: String,
    pub instruction: AddInstruction,
    pub source: NotationExpr,
    pub notation: NotationExpr,
}

#[derive(Debug, Serialize)]
pub struct ChainIndex {
    pub scheme: String,
    pub lang: String,
    pub entries: Vec<ChainEntry>,
}

#[derive(Debug, Serialize)]
pub struct RelativeIndex {
    pub scheme: String,
    pub lang: String,
    pub entries: Vec<IndexEntry>,
}

#[derive(Debug, Serialize)]
pub struct SkosExport {
    pub scheme: String,
    pub concepts: usize,
    pub text: String,
}

#[derive(Debug, Serialize)]
pub struct AuthorityExport {
    pub scheme: String,
    pub langs: Vec<String>,
    pub records: Vec<AuthorityRecord>,
    pub text: String,
    pub skipped: Vec<String>,
}

#[derive(Debug, Serialize)]
pub struct IngestResult {
    pub accepted: usize,
    pub documents: usize,
}

/// How a synthesis request names its inputs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SynthesisRequest {
    /// A main number and `(facet, auxiliary)` pairs applied in order.
    Auxiliaries { main: String, aux: Vec<(String, String)> },
    /// A named facet formula and its slot values.
    Formula {
        name: String,
        components: BTreeMap<String, String>,
    },
}

impl Service {
    /// Loads every configured source. Loader diagnostics and rejected
    /// documents are kept for `validate`; they do not abort startup.
    pub fn load(config: ServiceConfig) -> Result<Self> {
        config.validate()?;
        let mut schemes: Vec<Scheme> = Vec::new();
        let mut diagnostics = Vec::new();
        let mut mappings = Vec::new();
        let mut documents: Vec<(String, Vec<DocumentInput>)> = Vec::new();
        for (i, path) in config.scheme_paths.iter().enumerate() {
            let loaded = interchange::load_scheme(path)?;
            let shown = path.display().to_string();
            if schemes.iter().any(|s| s.id() == loaded.scheme.id()) {
                return Err(ServiceError::Config(format!(
                    "{shown}: scheme id {} is already loaded",
                    loaded.scheme.id()
                )));
            }
            diagnostics.extend(loaded.diagnostics.iter().map(|d| SourceDiagnostic {
                path: shown.clone(),
                line: Some(d.line),
                message: d.message.clone(),
            }));
            if !loaded.documents.is_empty() {
                if i == 0 {
                    documents.push((shown.clone(), loaded.documents));
                } else {
                    diagnostics.push(SourceDiagnostic {
                        path: shown.clone(),
                        line: None,
                        message: format!(
                            "{} document records ignored: documents are classified against the primary scheme",
                            loaded.documents.len()
                        ),
                    });
                }
            }
            mappings.extend(loaded.concordance);
            schemes.push(loaded.scheme);
        }
        for path in &config.docs_paths {
            let (docs, diags) = interchange::load_documents(path)?;
            let shown = path.display().to_string();
            diagnostics.extend(diags.into_iter().map(|d| SourceDiagnostic {
                path: shown.clone(),
                line: Some(d.line),
                message: d.message,
            }));
            documents.push((shown, docs));
        }
        let mut store = DocumentStore::new();
        for (path, docs) in documents {
            let report = store.ingest(schemes[0].syntax(), docs);
            diagnostics.extend(report.rejected.into_iter().map(|r| SourceDiagnostic {
                path: path.clone(),
                line: r.line,
                message: format!("document {} rejected: {}", r.doc_id, r.reason),
            }));
        }
        Ok(Self {
            sources: config.scheme_paths.clone(),
            config,
            schemes,
            concordance: Concordance::new(mappings),
            diagnostics,
            snapshot: RwLock::new(Arc::new(Snapshot { store })),
            ingest_lock: Mutex::new(()),
            empty: DocumentStore::new(),
        })
    }

    pub fn config(&self) -> &ServiceConfig {
        &self.config
    }

    pub fn diagnostics(&self) -> &[SourceDiagnostic] {
        &self.diagnostics
    }

    pub fn schemes_loaded(&self) -> &[Scheme] {
        &self.schemes
    }

    pub fn snapshot(&self) -> Arc<Snapshot> {
        self.snapshot.read().expect("snapshot lock poisoned").clone()
    }

    pub fn lang(&self, lang: Option<&str>) -> String {
        lang.filter(|l| !l.is_empty())
            .unwrap_or(&self.config.default_lang)
            .to_string()
    }

    /// The named scheme, or the primary one. Ids match case-insensitively.
    pub fn scheme(&self, id: Option<&str>) -> Result<&Scheme> {
        self.scheme_index(id).map(|i| &self.schemes[i])
    }

    fn scheme_index(&self, id: Option<&str>) -> Result<usize> {
        let Some(id) = id.filter(|s| !s.is_empty()) else {
            return Ok(0);
        };
        self.schemes
            .iter()
            .position(|s| s.id() == id)
            .or_else(|| self.schemes.iter().position(|s| s.id().eq_ignore_ascii_case(id)))
            .ok_or_else(|| ServiceError::NotFound(format!("scheme not found: {id}")))
    }

    /// Non-primary schemes are searched against an empty document store.
    fn with_retrieval<T>(
        &self,
        scheme: Option<&str>,
        f: impl FnOnce(&Retrieval<'_>, &DocumentStore) -> Result<T>,
    ) -> Result<T> {
        let index = self.scheme_index(scheme)?;
        let snapshot = self.snapshot();
        let store = if index == 0 { &snapshot.store } else { &self.empty };
        f(&Retrieval::new(&self.schemes[index], store), store)
    }

    /// Candidate schemes for a lookup that is not tied to one scheme: the
    /// named one, or all of them in configuration order.
    fn candidates(&self, scheme: Option<&str>) -> Result<Vec<&Scheme>> {
        match scheme.filter(|s| !s.is_empty()) {
            Some(_) => Ok(vec![self.scheme(scheme)?]),
            None => Ok(self.schemes.iter().collect()),
        }
    }

    pub fn validate(&self) -> ValidationReport {
        ValidationReport {
            ok: self.diagnostics.is_empty(),
            schemes: self
                .schemes
                .iter()
                .zip(&self.sources)
                .map(|(s, p)| SourceSummary {
                    id: s.id().to_string(),
                    path: p.display().to_string(),
                    classes: s.len(),
                })
                .collect(),
            documents: self.snapshot().store.len(),
            concordance_entries: self.concordance.len(),
            diagnostics: self.diagnostics.clone(),
        }
    }

    pub fn schemes(&self) -> SchemeList {
        SchemeList {
            schemes: self
                .schemes
                .iter()
                .enumerate()
                .map(|(i, s)| SchemeSummary {
                    id: s.id().to_string(),
                    title: s.title().to_string(),
                    mode: s.mode(),
                    default_lang: s.default_lang().to_string(),
                    classes: s.len(),
                    languages: s.languages().into_iter().map(str::to_string).collect(),
                    facets: s.aux_facets().iter().map(|f| f.facet_id.clone()).collect(),
                    formulas: s.facet_formulas().keys().cloned().collect(),
                    add_instructions: s.add_instructions().len(),
                    primary: i == 0,
                })
                .collect(),
            documents: self.snapshot().store.len(),
            concordance_entries: self.concordance.len(),
        }
    }

    pub fn class(&self, scheme: Option<&str>, text: &str, lang: Option<&str>) -> Result<ClassView> {
        let lang = self.lang(lang);
        self.with_retrieval(scheme, |r, _| {
            let s = r.scheme();
            let expr = s.parse(text)?;
            let record = s
                .get(&expr)
                .ok_or_else(|| ServiceError::NotFound(format!("class not found: {}", expr.canonical())))?;
            let crumb = |c: &ClassRecord| Crumb {
                notation: c.notation.clone(),
                caption: s.caption(c, &lang),
            };
            let mut breadcrumbs: Vec<Crumb> = s.ancestors(&record.notation).into_iter().map(crumb).collect();
            breadcrumbs.reverse();
            let view = r.browse(Some(&record.notation), &lang, false)?;
            Ok(ClassView {
                scheme: s.id().to_string(),
                notation: record.notation.clone(),
                caption: s.caption(record, &lang),
                label: s.label(record, &lang),
                direct_hits: r.direct_hits(record),
                aggregate_hits: r.aggregate_hits(record),
                parent: s.parent(&record.notation).map(crumb),
                breadcrumbs,
                children: view.children,
                see_also: s.see_also_of(&record.key())?,
                record: record.clone(),
            })
        })
    }

    pub fn search(&self, scheme: Option<&str>, query: &str, lang: Option<&str>) -> Result<SearchResult> {
        if query.trim().is_empty() {
            return Err(ServiceError::Usage("search needs a non-empty term".into()));
        }
        let lang = self.lang(lang);
        self.with_retrieval(scheme, |r, _| {
            Ok(SearchResult {
                query: query.to_string(),
                rows: r.search_term(query, &lang),
                lang: lang.clone(),
            })
        })
    }

    pub fn browse(
        &self,
        scheme: Option<&str>,
        n: Option<&str>,
        aggregate: bool,
        lang: Option<&str>,
    ) -> Result<BrowseView> {
        let lang = self.lang(lang);
        self.with_retrieval(scheme, |r, _| {
            let target = n.filter(|t| !t.is_empty()).map(|t| r.scheme().parse(t)).transpose()?;
            Ok(r.browse(target.as_ref(), &lang, aggregate)?)
        })
    }

    pub fn explode(&self, scheme: Option<&str>, n: Option<&str>) -> Result<ExplodeResult> {
        self.with_retrieval(scheme, |r, store| {
            let target = n.filter(|t| !t.is_empty()).map(|t| r.scheme().parse(t)).transpose()?;
            let ids = r.explode(target.as_ref());
            let documents: Vec<ClassifiedDocument> = ids.iter().filter_map(|id| store.document(id).cloned()).collect();
            Ok(ExplodeResult {
                notation: target,
                count: ids.len(),
                documents,
            })
        })
    }

    pub fn broaden(
        &self,
        scheme: Option<&str>,
        n: &str,
        min_hits: Option<usize>,
        lang: Option<&str>,
    ) -> Result<BroadenResult> {
        let lang = self.lang(lang);
        let min_hits = min_hits.unwrap_or(self.config.min_hits_default);
        self.with_retrieval(scheme, |r, _| {
            let start = r.scheme().parse(n)?;
            let reached = r.broaden_until(&start, min_hits, &lang)?;
            Ok(BroadenResult {
                start,
                min_hits,
                reached,
            })
        })
    }

    pub fn related(&self, scheme: Option<&str>, n: &str, lang: Option<&str>) -> Result<RelatedResult> {
        let lang = self.lang(lang);
        self.with_retrieval(scheme, |r, _| {
            let notation = r.scheme().parse(n)?;
            let rows = r.syndetic_expand(&notation, &lang)?;
            Ok(RelatedResult { notation, rows })
        })
    }

    pub fn suggest(
        &self,
        scheme: Option<&str>,
        text: &str,
        lang: Option<&str>,
        top_k: Option<usize>,
    ) -> Result<SuggestResult> {
        let lang = self.lang(lang);
        let scheme = self.scheme(scheme)?;
        Ok(SuggestResult {
            text: text.to_string(),
            suggestions: suggest_classes(scheme, text, &lang, top_k.unwrap_or(DEFAULT_SUGGESTIONS)),
        })
    }

    /// Auxiliary synthesis uses the named or primary scheme; a formula is
    /// looked up across all schemes unless one is named.
    pub fn synthesize(&self, scheme: Option<&str>, request: &SynthesisRequest) -> Result<SynthesisResult> {
        match request {
            SynthesisRequest::Auxiliaries { main, aux } => {
                let s = self.scheme(scheme)?;
                let mut expr = s.parse(main)?;
                for (facet, value) in aux {
                    expr = synthesis::apply_auxiliary(s, &expr, facet, value)?;
                }
                Ok(SynthesisResult {
                    scheme: s.id().to_string(),
                    notation: expr.canonical(),
                })
            }
            SynthesisRequest::Formula { name, components } => {
                let (s, formula) = self
                    .candidates(scheme)?
                    .into_iter()
                    .find_map(|s| s.facet_formulas().get(name).map(|f| (s, f)))
                    .ok_or_else(|| ServiceError::NotFound(format!("facet formula not found: {name}")))?;
                Ok(SynthesisResult {
                    scheme: s.id().to_string(),
                    notation: formula.synthesize(components)?,
                })
            }
        }
    }

    /// Applies the add instruction with the given base whose source span
    /// covers `source`.
    pub fn expand_add(&self, scheme: Option<&str>, base: &str, source: &str) -> Result<Expansion> {
        let mut near_miss = None;
        for s in self.candidates(scheme)? {
            let base_digits = match s.parse(base)? {
                NotationExpr::Simple(d) => d,
                other => {
                    return Err(ServiceError::Invalid(format!("base {other} is not a simple number")));
                }
            };
            let source_expr = s.parse(source)?;
            for instruction in s.add_instructions().iter().filter(|i| i.base == base_digits) {
                if instruction.covers(&source_expr) {
                    return Ok(Expansion {
                        scheme: s.id().to_string(),
                        notation: synthesis::expand_add(instruction, &source_expr)?,
                        instruction: instruction.clone(),
                        source: source_expr,
                    });
                }
                near_miss.get_or_insert((instruction.clone(), source_expr.clone()));
            }
        }
        match near_miss {
            Some((instruction, source)) => Err(synthesis::expand_add(&instruction, &source).err().map_or_else(
                || ServiceError::Invalid(format!("{source} is not covered by the instruction for {base}")),
                ServiceError::from,
            )),
            None => Err(ServiceError::NotFound(format!(
                "add instruction not found for base {}",
                Digits::parse_dotted(base, 0)
                    .map(|d| d.to_dotted())
                    .unwrap_or_else(|_| base.to_string())
            ))),
        }
    }

    pub fn chain_index(&self, scheme: Option<&str>, lang: Option<&str>) -> Result<ChainIndex> {
        let s = self.scheme(scheme)?;
        let lang = self.lang(lang);
        Ok(ChainIndex {
            scheme: s.id().to_string(),
            entries: indexes::chain_index(s, &lang)?,
            lang,
        })
    }

    pub fn relative_index(&self, scheme: Option<&str>, lang: Option<&str>) -> Result<RelativeIndex> {
        let s = self.scheme(scheme)?;
        let lang = self.lang(lang);
        Ok(RelativeIndex {
            scheme: s.id().to_string(),
            entries: indexes::relative_index_entries(s, &lang),
            lang,
        })
    }

    pub fn skos(&self, scheme: Option<&str>) -> Result<SkosExport> {
        let s = self.scheme(scheme)?;
        Ok(SkosExport {
            scheme: s.id().to_string(),
            concepts: s.len(),
            text: interchange::export_skos(s),
        })
    }

    /// Without `langs`, every language of the scheme is exported. When no
    /// requested notation yields a record the first failure is returned.
    pub fn authority(
        &self,
        scheme: Option<&str>,
        notations: &[String],
        langs: Option<&[String]>,
    ) -> Result<AuthorityExport> {
        let s = self.scheme(scheme)?;
        if notations.is_empty() {
            return Err(ServiceError::Usage("authority needs at least one notation".into()));
        }
        let langs: Vec<String> = match langs {
            Some(l) if !l.is_empty() => l.to_vec(),
            _ => s.languages().into_iter().map(str::to_string).collect(),
        };
        let (text, skipped) = interchange::export_authority(s, notations, &langs)?;
        let records: Vec<AuthorityRecord> = notations
            .iter()
            .filter_map(|n| s.authority_record(n, &langs).ok())
            .collect();
        if records.is_empty() {
            s.authority_record(&notations[0], &langs)?;
        }
        Ok(AuthorityExport {
            scheme: s.id().to_string(),
            langs,
            records,
            text,
            skipped,
        })
    }

    pub fn map(&self, source: &str, n: &str, target: &str) -> Result<Translation> {
        let notation = interchange::mapping_syntax()
            .parse(n)
            .map_err(classweave_core::Error::from)?;
        let source = self.canonical_id(source);
        let target = self.canonical_id(target);
        Ok(self.concordance.translate(source, &notation, target)?)
    }

    /// Loaded scheme id matching `id` ignoring case, else `id` unchanged.
    fn canonical_id<'a>(&'a self, id: &'a str) -> &'a str {
        self.scheme(Some(id)).map(Scheme::id).unwrap_or(id)
    }

    /// Ingests `D` records into a copy of the current store and swaps it
    /// in. Any malformed line or rejected document leaves the store as it
    /// was.
    pub fn ingest(&self, text: &str) -> Result<IngestResult> {
        let (docs, diagnostics) = interchange::parse_documents(text);
        if !diagnostics.is_empty() {
            let lines: Vec<String> = diagnostics.iter().map(|d| d.to_string()).collect();
            return Err(ServiceError::Invalid(format!(
                "malformed document records: {}",
                lines.join("; ")
            )));
        }
        let _writer = self.ingest_lock.lock().expect("ingest lock poisoned");
        let mut store = self.snapshot().store.clone();
        let IngestReport { accepted, rejected } = store.ingest(self.schemes[0].syntax(), docs);
        if !rejected.is_empty() {
            let reasons: Vec<String> = rejected.iter().map(|r| format!("{}: {}", r.doc_id, r.reason)).collect();
            return Err(ServiceError::Invalid(format!(
                "documents rejected: {}",
                reasons.join("; ")
            )));
        }
        let documents = store.len();
        *self.snapshot.write().expect("snapshot lock poisoned") = Arc::new(Snapshot { store });
        Ok(IngestResult { accepted, documents })
    }
}
