//! Flat-file formats.
//!
//! Scheme sources are UTF-8, LF, tab-separated, one record per line, with
//! `#` comments and blank lines ignored:
//!
//! ```text
//! SCHEME  id  title  notational|explicit  [default-lang]
//! AUX     facet-id  open  [close]
//! C       notation  lang  caption
//! A       facet-id  notation  lang  caption
//! T       notation  lang  term
//! P       notation  parent
//! SA      notation  target
//! DISC    notation
//! SYS     notation  system-number
//! ADD     base  left  right  strip
//! FACET   formula  slot  marker
//! MAP     src-scheme  src-notation  tgt-scheme  tgt-notation  exact|broader|narrower
//! D       doc-id  lang  classmark(;classmark)*  title
//! ```
//!
//! Record order is free. Malformed or dangling records are skipped with a
//! line diagnostic; duplicate keys are fatal.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::path::Path;

use percent_encoding::{utf8_percent_encode, NON_ALPHANUMERIC};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::notation::{self, Digits, NotationExpr, NotationSyntax};
use crate::retrieval::DocumentInput;
use crate::scheme::{ClassRecord, HierarchyMode, Scheme, SchemeBuilder};
use crate::synthesis::{AddInstruction, FacetFormula, FacetSlot, Marker};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    /// 1-based source line.
    pub line: usize,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}", self.line, self.message)
    }
}

#[derive(Debug, Clone)]
pub struct LoadedSource {
    pub scheme: Scheme,
    pub concordance: Vec<ConcordanceEntry>,
    pub documents: Vec<DocumentInput>,
    pub diagnostics: Vec<Diagnostic>,
}

struct Line<'a> {
    number: usize,
    tag: &'a str,
    fields: Vec<&'a str>,
}

fn split_lines(text: &str) -> Vec<Line<'_>> {
    text.lines()
        .enumerate()
        .filter(|(_, raw)| {
            let trimmed = raw.trim();
            !trimmed.is_empty() && !trimmed.starts_with('#')
        })
        .map(|(i, raw)| {
            let mut parts = raw.trim_end_matches('\r').split('\t');
            let tag = parts.next().unwrap_or("").trim();
            Line {
                number: i + 1,
                tag,
                fields: parts.map(str::trim).collect(),
            }
        })
        .collect()
}

fn arity(line: &Line<'_>, min: usize, max: usize) -> std::result::Result<(), String> {
    let n = line.fields.len();
    if n < min || n > max {
        let expected = if min == max {
            min.to_string()
        } else {
            format!("{min}-{max}")
        };
        return Err(format!("{} record needs {expected} fields, found {n}", line.tag));
    }
    if line.fields[..min].iter().any(|f| f.is_empty()) {
        return Err(format!("{} record has an empty field", line.tag));
    }
    Ok(())
}

fn duplicate(line: &Line<'_>, what: &str) -> Error {
    Error::InvalidScheme(format!("line {}: duplicate {what}", line.number))
}

fn single_char(text: &str) -> std::result::Result<char, String> {
    let mut chars = text.chars();
    match (chars.next(), chars.next()) {
        (Some(c), None) => Ok(c),
        _ => Err(format!("delimiter {text:?} must be one character")),
    }
}

/// Syntax for concordance notations, which may belong to schemes not
/// loaded here.
pub fn mapping_syntax() -> NotationSyntax {
    NotationSyntax::udc().with_opaque(true)
}

/// Parses a scheme source. `fallback_id` names the scheme when the source
/// has no `SCHEME` header.
pub fn parse_scheme_source(text: &str, fallback_id: &str) -> Result<LoadedSource> {
    let lines = split_lines(text);
    let mut diagnostics = Vec::new();
    let mut diag = |line: &Line<'_>, message: String| {
        diagnostics.push(Diagnostic {
            line: line.number,
            message,
        })
    };

    let mut header: Option<(String, String, HierarchyMode, Option<String>)> = None;
    for line in lines.iter().filter(|l| l.tag == "SCHEME") {
        if header.is_some() {
            return Err(duplicate(line, "SCHEME header"));
        }
        if let Err(e) = arity(line, 3, 4) {
            diag(line, e);
            continue;
        }
        let Some(mode) = HierarchyMode::parse(line.fields[2]) else {
            diag(line, format!("unknown hierarchy mode {:?}", line.fields[2]));
            continue;
        };
        let lang = line.fields.get(3).filter(|l| !l.is_empty()).map(|l| l.to_string());
        header = Some((line.fields[0].to_string(), line.fields[1].to_string(), mode, lang));
    }
    let (id, title, mode, lang) = header.unwrap_or_else(|| {
        (
            fallback_id.to_string(),
            fallback_id.to_string(),
            HierarchyMode::Notational,
            None,
        )
    });
    let mut builder = SchemeBuilder::new(id, title, mode);
    if let Some(lang) = lang {
        builder = builder.default_lang(lang);
    }

    for line in lines.iter().filter(|l| l.tag == "AUX") {
        let result = arity(line, 2, 3).and_then(|_| {
            let open = single_char(line.fields[1])?;
            let close = match line.fields.get(2).filter(|c| !c.is_empty()) {
                Some(c) => Some(single_char(c)?),
                None => None,
            };
            builder
                .add_facet(line.fields[0], open, close)
                .map_err(|e| e.to_string())
        });
        if let Err(e) = result {
            diag(line, e);
        }
    }
    let syntax = builder.syntax();

    // Captions create classes; every other class record refers to one.
    let mut captions_seen: BTreeSet<(String, String)> = BTreeSet::new();
    for line in lines.iter().filter(|l| l.tag == "C" || l.tag == "A") {
        let (min, offset) = if line.tag == "C" { (3, 0) } else { (4, 1) };
        let prepared = arity(line, min, min).and_then(|_| {
            let expr = parse_with(&syntax, line.fields[offset])?;
            match (&expr, line.tag) {
                (NotationExpr::Aux(aux), "A") if aux.facet == line.fields[0] => Ok(expr),
                (_, "A") => Err(format!(
                    "{} is not an auxiliary of facet {:?}",
                    line.fields[1], line.fields[0]
                )),
                (NotationExpr::Aux(_), _) => Err(format!("auxiliary {} belongs in an A record", line.fields[0])),
                _ => Ok(expr),
            }
        });
        let expr = match prepared {
            Ok(expr) => expr,
            Err(e) => {
                diag(line, e);
                continue;
            }
        };
        let (lang, caption) = (line.fields[offset + 1], line.fields[offset + 2]);
        let key = expr.canonical();
        if !captions_seen.insert((key.clone(), lang.to_string())) {
            return Err(duplicate(line, &format!("caption for {key} in {lang}")));
        }
        if !builder.contains(&key) {
            builder.insert_class(ClassRecord::new(expr))?;
        }
        builder
            .class_mut(&key)
            .expect("inserted above")
            .captions
            .insert(lang.to_string(), caption.to_string());
    }

    let mut concordance: BTreeMap<(String, String, String), ConcordanceEntry> = BTreeMap::new();
    let mut documents = Vec::new();
    let mut formulas: BTreeMap<String, (usize, Vec<FacetSlot>)> = BTreeMap::new();
    let mut parents_seen = BTreeSet::new();
    let mut sys_seen = BTreeSet::new();
    for line in &lines {
        let outcome: std::result::Result<(), String> = match line.tag {
            "SCHEME" | "AUX" | "C" | "A" => Ok(()),
            "T" => arity(line, 3, 3).and_then(|_| {
                let key = known_key(&builder, &syntax, line.fields[0])?;
                let record = builder.class_mut(&key).expect("checked");
                let terms = record.index_terms.entry(line.fields[1].to_string()).or_default();
                if !terms.iter().any(|t| t == line.fields[2]) {
                    terms.push(line.fields[2].to_string());
                }
                Ok(())
            }),
            "P" => match arity(line, 2, 2).and_then(|_| {
                Ok((
                    known_key(&builder, &syntax, line.fields[0])?,
                    known_key(&builder, &syntax, line.fields[1])?,
                ))
            }) {
                Ok((key, parent_key)) => {
                    if !parents_seen.insert(key.clone()) {
                        return Err(duplicate(line, &format!("parent link for {key}")));
                    }
                    if key == parent_key {
                        Err(format!("{key} cannot be its own parent"))
                    } else {
                        let parent = builder.class_mut(&parent_key).expect("checked").notation.clone();
                        builder.class_mut(&key).expect("checked").parent = Some(parent);
                        Ok(())
                    }
                }
                Err(e) => Err(e),
            },
            "SA" => arity(line, 2, 2).and_then(|_| {
                let key = known_key(&builder, &syntax, line.fields[0])?;
                let target =
                    known_key(&builder, &syntax, line.fields[1]).map_err(|e| format!("dangling see-also: {e}"))?;
                if key == target {
                    return Err(format!("{key} cannot refer to itself"));
                }
                let target = builder.class_mut(&target).expect("checked").notation.clone();
                let record = builder.class_mut(&key).expect("checked");
                if record.see_also.contains(&target) {
                    return Err(format!("repeated see-also {key} -> {target}"));
                }
                record.see_also.push(target);
                Ok(())
            }),
            "DISC" => arity(line, 1, 1).and_then(|_| {
                let key = known_key(&builder, &syntax, line.fields[0])?;
                builder.class_mut(&key).expect("checked").is_discipline = true;
                Ok(())
            }),
            "SYS" => match arity(line, 2, 2).and_then(|_| known_key(&builder, &syntax, line.fields[0])) {
                Ok(key) => {
                    if !sys_seen.insert(key.clone()) {
                        return Err(duplicate(line, &format!("system number for {key}")));
                    }
                    builder.class_mut(&key).expect("checked").system_no = Some(line.fields[1].to_string());
                    Ok(())
                }
                Err(e) => Err(e),
            },
            "ADD" => arity(line, 4, 4).and_then(|_| {
                let digits = line
                    .fields
                    .iter()
                    .map(|f| Digits::parse_dotted(f, 0).map_err(|e| format!("{f:?}: {e}")))
                    .collect::<std::result::Result<Vec<_>, _>>()?;
                let [base, left, right, strip]: [Digits; 4] = digits.try_into().expect("arity checked");
                let instruction = AddInstruction::new(base, left, right, strip).map_err(|e| e.to_string())?;
                builder.add_instruction(instruction);
                Ok(())
            }),
            "FACET" => arity(line, 3, 3).and_then(|_| {
                let marker =
                    Marker::parse(line.fields[2]).ok_or_else(|| format!("unknown marker {:?}", line.fields[2]))?;
                formulas
                    .entry(line.fields[0].to_string())
                    .or_insert_with(|| (line.number, Vec::new()))
                    .1
                    .push(FacetSlot {
                        name: line.fields[1].to_string(),
                        marker,
                    });
                Ok(())
            }),
            "MAP" => match arity(line, 5, 5).and_then(|_| parse_mapping(&line.fields)) {
                Ok(entry) => {
                    let key = (
                        entry.source_scheme.clone(),
                        entry.source_notation.canonical(),
                        entry.target_scheme.clone(),
                    );
                    if concordance.contains_key(&key) {
                        return Err(duplicate(line, &format!("mapping {} {} -> {}", key.0, key.1, key.2)));
                    }
                    concordance.insert(key, entry);
                    Ok(())
                }
                Err(e) => Err(e),
            },
            "D" => parse_document(line).map(|doc| documents.push(doc)),
            other => Err(format!("unknown record type {other:?}")),
        };
        if let Err(e) = outcome {
            diag(line, e);
        }
    }

    for (name, (line_no, slots)) in formulas {
        match FacetFormula::new(slots) {
            Ok(formula) => builder.add_formula(name, formula),
            Err(e) => diagnostics.push(Diagnostic {
                line: line_no,
                message: format!("formula {name}: {e}"),
            }),
        }
    }
    if let Some(cycle) = builder.find_cycle() {
        return Err(Error::Cycle(cycle));
    }
    let scheme = builder.build()?;
    diagnostics.sort_by_key(|d| d.line);
    Ok(LoadedSource {
        scheme,
        concordance: concordance.into_values().collect(),
        documents,
        diagnostics,
    })
}

fn parse_with(syntax: &NotationSyntax, text: &str) -> std::result::Result<NotationExpr, String> {
    syntax.parse(text).map_err(|e| format!("notation {text:?}: {e}"))
}

fn known_key(builder: &SchemeBuilder, syntax: &NotationSyntax, text: &str) -> std::result::Result<String, String> {
    let key = parse_with(syntax, text)?.canonical();
    if builder.contains(&key) {
        Ok(key)
    } else {
        Err(format!("unknown class {text}"))
    }
}

fn parse_mapping(fields: &[&str]) -> std::result::Result<ConcordanceEntry, String> {
    let syntax = mapping_syntax();
    Ok(ConcordanceEntry {
        source_scheme: fields[0].to_string(),
        source_notation: parse_with(&syntax, fields[1])?,
        target_scheme: fields[2].to_string(),
        target_notation: parse_with(&syntax, fields[3])?,
        exactness: Exactness::parse(fields[4]).ok_or_else(|| format!("unknown exactness {:?}", fields[4]))?,
    })
}

fn parse_document(line: &Line<'_>) -> std::result::Result<DocumentInput, String> {
    arity(line, 3, 4)?;
    Ok(DocumentInput {
        doc_id: line.fields[0].to_string(),
        language: line.fields[1].to_string(),
        classmarks: line.fields[2]
            .split(';')
            .map(str::trim)
            .filter(|m| !m.is_empty())
            .map(str::to_string)
            .collect(),
        title: line.fields.get(3).map(|t| t.to_string()).unwrap_or_default(),
        line: Some(line.number),
    })
}

/// `D` records only; any other record type is diagnosed.
pub fn parse_documents(text: &str) -> (Vec<DocumentInput>, Vec<Diagnostic>) {
    let mut docs = Vec::new();
    let mut diagnostics = Vec::new();
    for line in split_lines(text) {
        let result = if line.tag == "D" {
            parse_document(&line).map(|d| docs.push(d))
        } else {
            Err(format!("expected a D record, found {:?}", line.tag))
        };
        if let Err(message) = result {
            diagnostics.push(Diagnostic {
                line: line.number,
                message,
            });
        }
    }
    (docs, diagnostics)
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn load_scheme(path: impl AsRef<Path>) -> Result<LoadedSource> {
    let path = path.as_ref();
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("scheme");
    parse_scheme_source(&read(path)?, stem)
}

pub fn load_documents(path: impl AsRef<Path>) -> Result<(Vec<DocumentInput>, Vec<Diagnostic>)> {
    Ok(parse_documents(&read(path.as_ref())?))
}

/// Writes a scheme back in source form. Loading the output yields the same
/// class records.
pub fn export_source(scheme: &Scheme) -> String {
    let mut out = vec![format!(
        "SCHEME\t{}\t{}\t{}\t{}",
        scheme.id(),
        scheme.title(),
        scheme.mode().as_str(),
        scheme.default_lang()
    )];
    for facet in scheme.aux_facets() {
        let close = facet.close.map(String::from).unwrap_or_default();
        out.push(
            format!("AUX\t{}\t{}\t{}", facet.facet_id, facet.open, close)
                .trim_end()
                .to_string(),
        );
    }
    for record in scheme.classes() {
        let n = record.key();
        for (lang, caption) in &record.captions {
            match &record.notation {
                NotationExpr::Aux(aux) => out.push(format!("A\t{}\t{n}\t{lang}\t{caption}", aux.facet)),
                _ => out.push(format!("C\t{n}\t{lang}\t{caption}")),
            }
        }
        for (lang, terms) in &record.index_terms {
            out.extend(terms.iter().map(|t| format!("T\t{n}\t{lang}\t{t}")));
        }
        if let Some(parent) = &record.parent {
            out.push(format!("P\t{n}\t{parent}"));
        }
        out.extend(record.see_also.iter().map(|t| format!("SA\t{n}\t{t}")));
        if record.is_discipline {
            out.push(format!("DISC\t{n}"));
        }
        if let Some(sys) = &record.system_no {
            out.push(format!("SYS\t{n}\t{sys}"));
        }
    }
    for add in scheme.add_instructions() {
        out.push(format!(
            "ADD\t{}\t{}\t{}\t{}",
            add.base.to_dotted(),
            add.source_left.to_dotted(),
            add.source_right.to_dotted(),
            add.strip_prefix.to_dotted()
        ));
    }
    for (name, formula) in scheme.facet_formulas() {
        out.extend(
            formula
                .slots()
                .iter()
                .map(|s| format!("FACET\t{name}\t{}\t{}", s.name, s.marker.as_str())),
        );
    }
    out.iter().map(|l| format!("{l}\n")).collect()
}

pub const RDF_TYPE: &str = "<http://www.w3.org/1999/02/22-rdf-syntax-ns#type>";
const SKOS: &str = "http://www.w3.org/2004/02/skos/core#";

pub fn concept_uri(scheme_id: &str, expr: &NotationExpr) -> String {
    let encoded = utf8_percent_encode(&expr.canonical(), NON_ALPHANUMERIC).to_string();
    format!("<urn:kos:{scheme_id}:{encoded}>")
}

fn skos(term: &str) -> String {
    format!("<{SKOS}{term}>")
}

fn literal(text: &str) -> String {
    let mut out = String::with_capacity(text.len() + 2);
    out.push('"');
    for c in text.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

/// N-Triples concept export: type, labels, notation, broader/narrower and
/// symmetric related statements, sorted by subject, predicate, object.
pub fn export_skos(scheme: &Scheme) -> String {
    let id = scheme.id();
    let mut triples: BTreeSet<(String, String, String)> = BTreeSet::new();
    for record in scheme.classes() {
        let subject = concept_uri(id, &record.notation);
        let mut add = |p: String, o: String| {
            triples.insert((subject.clone(), p, o));
        };
        add(RDF_TYPE.to_string(), skos("Concept"));
        for (lang, caption) in &record.captions {
            add(skos("prefLabel"), format!("{}@{lang}", literal(caption)));
        }
        add(skos("notation"), literal(&record.key()));
        if let Some(parent) = scheme.parent(&record.notation) {
            add(skos("broader"), concept_uri(id, &parent.notation));
        }
        for child in scheme.children(Some(&record.notation)) {
            add(skos("narrower"), concept_uri(id, &child.notation));
        }
        for target in &record.see_also {
            add(skos("related"), concept_uri(id, target));
        }
        for target in &record.see_also {
            triples.insert((concept_uri(id, target), skos("related"), subject.clone()));
        }
    }
    triples
        .into_iter()
        .map(|(s, p, o)| format!("{s} {p} {o} .\n"))
        .collect()
}

/// Authority records for `notations`, in the given order. Unknown or
/// unparsable notations are skipped and reported.
pub fn export_authority(scheme: &Scheme, notations: &[String], langs: &[String]) -> Result<(String, Vec<String>)> {
    let known = scheme.languages();
    if let Some(missing) = langs.iter().find(|l| !known.contains(l.as_str())) {
        return Err(Error::UnknownLanguage(missing.clone()));
    }
    let mut records = Vec::new();
    let mut skipped = Vec::new();
    for text in notations {
        match scheme.authority_record(text, langs) {
            Ok(record) => {
                let mut lines = vec![format!("{}\t{}", scheme.id(), record.notation)];
                for label in &record.terms {
                    lines.push(with_fallback(
                        format!("Term\t{}\t{}", label.lang, label.text),
                        label.fallback,
                    ));
                }
                for (tag, links) in [
                    ("Broader term", &record.broader),
                    ("Narrower term", &record.narrower),
                    ("Related term", &record.related),
                ] {
                    for link in links {
                        lines.push(with_fallback(
                            format!("{tag}\t{}\t{} : {}", link.label.lang, link.label.text, link.notation),
                            link.label.fallback,
                        ));
                    }
                }
                if let Some(sys) = &record.system_no {
                    lines.push(format!("System No\t{sys}"));
                }
                records.push(lines.join("\n") + "\n");
            }
            Err(e @ (Error::NotFound { .. } | Error::Parse(_))) => skipped.push(format!("{text}: {e}")),
            Err(e) => return Err(e),
        }
    }
    Ok((records.join("\n"), skipped))
}

fn with_fallback(line: String, fallback: bool) -> String {
    if fallback {
        line + "\tfallback"
    } else {
        line
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Exactness {
    Exact,
    Broader,
    Narrower,
}

impl Exactness {
    pub fn parse(text: &str) -> Option<Self> {
        match text {
            "exact" => Some(Self::Exact),
            "broader" => Some(Self::Broader),
            "narrower" => Some(Self::Narrower),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Exact => "exact",
            Self::Broader => "broader",
            Self::Narrower => "narrower",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConcordanceEntry {
    pub source_scheme: String,
    pub source_notation: NotationExpr,
    pub target_scheme: String,
    pub target_notation: NotationExpr,
    pub exactness: Exactness,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Translation {
    pub source_scheme: String,
    pub source_notation: NotationExpr,
    pub target_scheme: String,
    /// `None` when no entry matched up to the root.
    pub target_notation: Option<NotationExpr>,
    pub exactness: Option<Exactness>,
    pub hops: usize,
    /// The source-side notation the matching entry is keyed on.
    pub matched_source: Option<NotationExpr>,
}

#[derive(Debug, Clone, Default)]
pub struct Concordance {
    entries: HashMap<(String, String, String), ConcordanceEntry>,
    schemes: BTreeSet<String>,
}

impl Concordance {
    /// Later entries with a repeated key are ignored.
    pub fn new(entries: impl IntoIterator<Item = ConcordanceEntry>) -> Self {
        let mut out = Self::default();
        for entry in entries {
            out.schemes.insert(entry.source_scheme.clone());
            out.schemes.insert(entry.target_scheme.clone());
            let key = (
                entry.source_scheme.clone(),
                entry.source_notation.canonical(),
                entry.target_scheme.clone(),
            );
            out.entries.entry(key).or_insert(entry);
        }
        out
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn schemes(&self) -> &BTreeSet<String> {
        &self.schemes
    }

    pub fn entries(&self) -> impl Iterator<Item = &ConcordanceEntry> + '_ {
        self.entries.values()
    }

    /// Looks up `notation`, generalizing one step at a time until an entry
    /// matches. Any match after a step is reported as broader.
    pub fn translate(&self, source_scheme: &str, notation: &NotationExpr, target_scheme: &str) -> Result<Translation> {
        for scheme in [source_scheme, target_scheme] {
            if !self.schemes.contains(scheme) {
                return Err(Error::not_found("scheme", scheme));
            }
        }
        let mut current = Some(notation.clone());
        let mut hops = 0;
        while let Some(candidate) = current {
            let key = (
                source_scheme.to_string(),
                candidate.canonical(),
                target_scheme.to_string(),
            );
            if let Some(entry) = self.entries.get(&key) {
                return Ok(Translation {
                    source_scheme: source_scheme.to_string(),
                    source_notation: notation.clone(),
                    target_scheme: target_scheme.to_string(),
                    target_notation: Some(entry.target_notation.clone()),
                    exactness: Some(if hops == 0 { entry.exactness } else { Exactness::Broader }),
                    hops,
                    matched_source: Some(candidate),
                });
            }
            current = notation::generalize(&candidate);
            hops += 1;
        }
        Ok(Translation {
            source_scheme: source_scheme.to_string(),
            source_notation: notation.clone(),
            target_scheme: target_scheme.to_string(),
            target_notation: None,
            exactness: None,
            hops: hops - 1,
            matched_source: None,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SOURCE: &str = "\
# sample
SCHEME\tX\tSample\tnotational\ten
AUX\tplace\t(\t)
C\t5\ten\tScience
C\t53\ten\tPhysics
C\t53\tfr\tPhysique
T\t53\ten\tNatural philosophy
A\tplace\t(4)\ten\tEurope
SA\t53\t(4)
SA\t53\t999
BOGUS\tx
MAP\tX\t53\tY\t530\texact
D\td1\ten\t53;5\tA title
";

    #[test]
    fn loads_with_line_diagnostics() {
        let loaded = parse_scheme_source(SOURCE, "fallback").unwrap();
        assert_eq!(loaded.scheme.id(), "X");
        assert_eq!(loaded.scheme.len(), 3);
        let lines: Vec<usize> = loaded.diagnostics.iter().map(|d| d.line).collect();
        assert_eq!(lines, vec![10, 11]);
        assert!(loaded.diagnostics[0].message.contains("dangling"));
        assert_eq!(loaded.concordance.len(), 1);
        assert_eq!(loaded.documents[0].classmarks, vec!["53", "5"]);
    }

    #[test]
    fn duplicate_caption_is_fatal() {
        let text = "C\t5\ten\tScience\nC\t5\ten\tAgain\n";
        let err = parse_scheme_source(text, "x").unwrap_err();
        assert!(err.to_string().contains("line 2"));
    }

    #[test]
    fn source_round_trip() {
        let first = parse_scheme_source(SOURCE, "x").unwrap().scheme;
        let second = parse_scheme_source(&export_source(&first), "x").unwrap().scheme;
        assert_eq!(
            first.classes().collect::<Vec<_>>(),
            second.classes().collect::<Vec<_>>()
        );
        assert_eq!(export_source(&first), export_source(&second));
    }

    #[test]
    fn uri_encodes_every_symbol() {
        let expr = notation::parse("338.48(469)").unwrap();
        assert_eq!(concept_uri("UDC", &expr), "<urn:kos:UDC:338%2E48%28469%29>");
    }

    #[test]
    fn translate_falls_back_by_generalizing() {
        let syntax = mapping_syntax();
        let c = Concordance::new(vec![ConcordanceEntry {
            source_scheme: "A".into(),
            source_notation: syntax.parse("536").unwrap(),
            target_scheme: "B".into(),
            target_notation: syntax.parse("536").unwrap(),
            exactness: Exactness::Exact,
        }]);
        let t = c.translate("A", &syntax.parse("536").unwrap(), "B").unwrap();
        assert_eq!((t.exactness, t.hops), (Some(Exactness::Exact), 0));
        let t = c.translate("A", &syntax.parse("536.21").unwrap(), "B").unwrap();
        assert_eq!((t.exactness, t.hops), (Some(Exactness::Broader), 2));
        let t = c.translate("A", &syntax.parse("7").unwrap(), "B").unwrap();
        assert_eq!(t.target_notation, None);
        assert!(c.translate("A", &syntax.parse("7").unwrap(), "Q").is_err());
    }
}
