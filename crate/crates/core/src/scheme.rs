//! In-memory classification scheme: class records keyed by canonical
//! notation, the resolved browse hierarchy, see-also structure and
//! auxiliary tables.
//!
//! A [`Scheme`] is built once through [`SchemeBuilder`] and is read-only
//! afterwards, so shared references can be handed to any number of readers.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::notation::{self, FacetDelimiter, NotationExpr, NotationSyntax};
use crate::synthesis::{AddInstruction, FacetFormula};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum HierarchyMode {
    /// Parents follow from notation (digit truncation).
    Notational,
    /// Parents come only from stored links; notation is an ordering device.
    Explicit,
}

impl HierarchyMode {
    pub fn parse(text: &str) -> Option<Self> {
        match text {
            "notational" => Some(HierarchyMode::Notational),
            "explicit" => Some(HierarchyMode::Explicit),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            HierarchyMode::Notational => "notational",
            HierarchyMode::Explicit => "explicit",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ClassKind {
    Simple,
    Span,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassRecord {
    pub notation: NotationExpr,
    pub kind: ClassKind,
    pub captions: BTreeMap<String, String>,
    pub index_terms: BTreeMap<String, Vec<String>>,
    /// Stored parent link; overrides notational ancestry.
    pub parent: Option<NotationExpr>,
    pub see_also: Vec<NotationExpr>,
    pub is_discipline: bool,
    pub system_no: Option<String>,
}

impl ClassRecord {
    pub fn new(notation: NotationExpr) -> Self {
        let kind = if notation.is_span() {
            ClassKind::Span
        } else {
            ClassKind::Simple
        };
        Self {
            notation,
            kind,
            captions: BTreeMap::new(),
            index_terms: BTreeMap::new(),
            parent: None,
            see_also: Vec::new(),
            is_discipline: false,
            system_no: None,
        }
    }

    pub fn key(&self) -> String {
        self.notation.canonical()
    }

    pub fn with_caption(mut self, lang: &str, caption: &str) -> Self {
        self.captions.insert(lang.to_string(), caption.to_string());
        self
    }

    pub fn caption(&self, lang: &str) -> Option<&str> {
        self.captions.get(lang).map(String::as_str)
    }

    /// Captions and index terms in one language, caption first, deduplicated.
    pub fn terms(&self, lang: &str) -> Vec<&str> {
        let mut out: Vec<&str> = Vec::new();
        let caption = self.caption(lang).into_iter();
        let extra = self.index_terms.get(lang).into_iter().flatten().map(String::as_str);
        for term in caption.chain(extra) {
            if !out.contains(&term) {
                out.push(term);
            }
        }
        out
    }
}

/// A caption resolved for a requested language.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Label {
    pub lang: String,
    pub text: String,
    /// True when the text comes from another language.
    pub fallback: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AuxFacet {
    pub facet_id: String,
    pub open: char,
    pub close: Option<char>,
    /// Canonical keys of the facet's auxiliary table.
    pub classes: BTreeSet<String>,
}

impl AuxFacet {
    pub fn delimiter(&self) -> FacetDelimiter {
        FacetDelimiter::new(self.facet_id.clone(), self.open, self.close)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AuthorityLink {
    pub notation: NotationExpr,
    #[serde(flatten)]
    pub label: Label,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AuthorityRecord {
    pub notation: NotationExpr,
    pub terms: Vec<Label>,
    pub broader: Vec<AuthorityLink>,
    pub narrower: Vec<AuthorityLink>,
    pub related: Vec<AuthorityLink>,
    pub system_no: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SeeAlso {
    pub notation: NotationExpr,
    pub caption: String,
}

/// Single-writer construction of a [`Scheme`].
#[derive(Debug, Clone)]
pub struct SchemeBuilder {
    id: String,
    title: String,
    mode: HierarchyMode,
    default_lang: String,
    facets: Vec<AuxFacet>,
    classes: BTreeMap<String, ClassRecord>,
    add_instructions: Vec<AddInstruction>,
    facet_formulas: BTreeMap<String, FacetFormula>,
}

impl SchemeBuilder {
    pub fn new(id: impl Into<String>, title: impl Into<String>, mode: HierarchyMode) -> Self {
        Self {
            id: id.into(),
            title: title.into(),
            mode,
            default_lang: "en".to_string(),
            facets: Vec::new(),
            classes: BTreeMap::new(),
            add_instructions: Vec::new(),
            facet_formulas: BTreeMap::new(),
        }
    }

    pub fn default_lang(mut self, lang: impl Into<String>) -> Self {
        self.default_lang = lang.into();
        self
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn add_facet(&mut self, facet_id: &str, open: char, close: Option<char>) -> Result<()> {
        if self.facets.iter().any(|f| f.facet_id == facet_id) {
            return Err(Error::InvalidScheme(format!("facet {facet_id:?} declared twice")));
        }
        let mut delimiters: Vec<FacetDelimiter> = self.facets.iter().map(AuxFacet::delimiter).collect();
        delimiters.push(FacetDelimiter::new(facet_id, open, close));
        NotationSyntax::new(delimiters, false)?;
        self.facets.push(AuxFacet {
            facet_id: facet_id.to_string(),
            open,
            close,
            classes: BTreeSet::new(),
        });
        Ok(())
    }

    /// Parsing rules implied by the declared facets and hierarchy mode.
    pub fn syntax(&self) -> NotationSyntax {
        syntax_for(&self.facets, self.mode)
    }

    pub fn insert_class(&mut self, record: ClassRecord) -> Result<()> {
        let key = record.key();
        if self.classes.contains_key(&key) {
            return Err(Error::InvalidScheme(format!("duplicate notation {key}")));
        }
        self.classes.insert(key, record);
        Ok(())
    }

    pub fn contains(&self, key: &str) -> bool {
        self.classes.contains_key(key)
    }

    pub fn class_mut(&mut self, key: &str) -> Option<&mut ClassRecord> {
        self.classes.get_mut(key)
    }

    pub fn add_instruction(&mut self, instruction: AddInstruction) {
        self.add_instructions.push(instruction);
    }

    pub fn add_formula(&mut self, name: impl Into<String>, formula: FacetFormula) {
        self.facet_formulas.insert(name.into(), formula);
    }

    /// First hierarchy cycle found, as the list of keys on it.
    pub fn find_cycle(&self) -> Option<Vec<String>> {
        let mut cleared: HashSet<String> = HashSet::new();
        for start in self.classes.keys() {
            let mut path: Vec<String> = Vec::new();
            let mut current = Some(start.clone());
            while let Some(key) = current {
                if cleared.contains(&key) {
                    break;
                }
                if let Some(pos) = path.iter().position(|k| *k == key) {
                    return Some(path[pos..].to_vec());
                }
                current = self
                    .classes
                    .get(&key)
                    .and_then(|record| stored_parent_key(&self.classes, self.mode, record))
                    .filter(|k| self.classes.contains_key(k));
                path.push(key);
            }
            cleared.extend(path);
        }
        None
    }

    pub fn build(mut self) -> Result<Scheme> {
        for (key, record) in &self.classes {
            if record.captions.is_empty() {
                return Err(Error::InvalidScheme(format!("class {key} has no caption")));
            }
            if let Some(parent) = &record.parent {
                if !self.classes.contains_key(&parent.canonical()) {
                    return Err(Error::InvalidScheme(format!("class {key}: dangling parent {parent}")));
                }
            }
            for target in &record.see_also {
                let target_key = target.canonical();
                if &target_key == key {
                    return Err(Error::InvalidScheme(format!("class {key} refers to itself")));
                }
                if !self.classes.contains_key(&target_key) {
                    return Err(Error::InvalidScheme(format!("class {key}: dangling see-also {target}")));
                }
            }
            if let NotationExpr::Aux(aux) = &record.notation {
                let facet = self.facets.iter_mut().find(|f| f.facet_id == aux.facet);
                match facet {
                    Some(facet) if facet.open == aux.open && facet.close == aux.close => {
                        facet.classes.insert(key.clone());
                    }
                    _ => {
                        return Err(Error::InvalidScheme(format!(
                            "auxiliary {key} does not belong to a declared facet"
                        )))
                    }
                }
            }
        }
        if let Some(cycle) = self.find_cycle() {
            return Err(Error::Cycle(cycle));
        }

        let mut parents: HashMap<String, Option<String>> = HashMap::new();
        let mut children: HashMap<Option<String>, Vec<String>> = HashMap::new();
        for (key, record) in &self.classes {
            let parent = stored_parent_key(&self.classes, self.mode, record);
            children.entry(parent.clone()).or_default().push(key.clone());
            parents.insert(key.clone(), parent);
        }
        for list in children.values_mut() {
            list.sort_by(|a, b| self.classes[a].notation.cmp(&self.classes[b].notation));
        }
        let mut order: Vec<String> = self.classes.keys().cloned().collect();
        order.sort_by(|a, b| self.classes[a].notation.cmp(&self.classes[b].notation));

        let mut depths: HashMap<String, usize> = HashMap::new();
        for key in &order {
            let mut depth = 0;
            let mut current = parents[key].as_ref();
            while let Some(parent) = current {
                depth += 1;
                current = parents[parent].as_ref();
            }
            depths.insert(key.clone(), depth);
        }
        let spans = order
            .iter()
            .filter(|k| self.classes[*k].notation.is_span())
            .cloned()
            .collect();

        let syntax = syntax_for(&self.facets, self.mode);
        Ok(Scheme {
            id: self.id,
            title: self.title,
            mode: self.mode,
            default_lang: self.default_lang,
            syntax,
            classes: self.classes,
            aux_facets: self.facets,
            add_instructions: self.add_instructions,
            facet_formulas: self.facet_formulas,
            order,
            parents,
            children,
            depths,
            spans,
        })
    }
}

fn syntax_for(facets: &[AuxFacet], mode: HierarchyMode) -> NotationSyntax {
    NotationSyntax::new(
        facets.iter().map(AuxFacet::delimiter).collect(),
        mode == HierarchyMode::Explicit,
    )
    .expect("delimiters are validated when facets are added")
}

fn stored_parent_key(
    classes: &BTreeMap<String, ClassRecord>,
    mode: HierarchyMode,
    record: &ClassRecord,
) -> Option<String> {
    if let Some(parent) = &record.parent {
        return Some(parent.canonical());
    }
    if mode == HierarchyMode::Explicit {
        return None;
    }
    nearest_stored_ancestor(classes, &record.notation)
}

fn nearest_stored_ancestor(classes: &BTreeMap<String, ClassRecord>, expr: &NotationExpr) -> Option<String> {
    let mut current = notation::generalize(expr);
    while let Some(candidate) = current {
        let key = candidate.canonical();
        if classes.contains_key(&key) {
            return Some(key);
        }
        current = notation::generalize(&candidate);
    }
    None
}

/// A loaded, validated classification scheme.
#[derive(Debug, Clone)]
pub struct Scheme {
    id: String,
    title: String,
    mode: HierarchyMode,
    default_lang: String,
    syntax: NotationSyntax,
    classes: BTreeMap<String, ClassRecord>,
    aux_facets: Vec<AuxFacet>,
    add_instructions: Vec<AddInstruction>,
    facet_formulas: BTreeMap<String, FacetFormula>,
    order: Vec<String>,
    parents: HashMap<String, Option<String>>,
    children: HashMap<Option<String>, Vec<String>>,
    depths: HashMap<String, usize>,
    spans: Vec<String>,
}

impl Scheme {
    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn title(&self) -> &str {
        &self.title
    }

    pub fn mode(&self) -> HierarchyMode {
        self.mode
    }

    pub fn default_lang(&self) -> &str {
        &self.default_lang
    }

    pub fn syntax(&self) -> &NotationSyntax {
        &self.syntax
    }

    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    /// All classes, main and auxiliary, in notation order.
    pub fn classes(&self) -> impl Iterator<Item = &ClassRecord> + '_ {
        self.order.iter().map(move |k| &self.classes[k])
    }

    pub fn aux_facets(&self) -> &[AuxFacet] {
        &self.aux_facets
    }

    pub fn facet(&self, facet_id: &str) -> Option<&AuxFacet> {
        self.aux_facets.iter().find(|f| f.facet_id == facet_id)
    }

    pub fn facet_classes<'a>(&'a self, facet_id: &str) -> impl Iterator<Item = &'a ClassRecord> + 'a {
        self.facet(facet_id)
            .into_iter()
            .flat_map(move |f| f.classes.iter().map(move |k| &self.classes[k]))
    }

    pub fn add_instructions(&self) -> &[AddInstruction] {
        &self.add_instructions
    }

    pub fn facet_formulas(&self) -> &BTreeMap<String, FacetFormula> {
        &self.facet_formulas
    }

    pub fn parse(&self, text: &str) -> Result<NotationExpr> {
        Ok(self.syntax.parse(text)?)
    }

    pub fn get(&self, expr: &NotationExpr) -> Option<&ClassRecord> {
        self.classes.get(&expr.canonical())
    }

    pub fn by_key(&self, key: &str) -> Option<&ClassRecord> {
        self.classes.get(key)
    }

    pub fn get_class(&self, text: &str) -> Result<Option<&ClassRecord>> {
        let expr = self.parse(text)?;
        Ok(self.get(&expr))
    }

    fn require(&self, text: &str) -> Result<&ClassRecord> {
        self.get_class(text)?
            .ok_or_else(|| Error::not_found("class", text.trim()))
    }

    /// Browse-tree parent; `None` is the root. Works for unstored notations
    /// by walking up to the nearest stored ancestor.
    pub fn parent(&self, expr: &NotationExpr) -> Option<&ClassRecord> {
        let key = expr.canonical();
        let parent_key = match self.parents.get(&key) {
            Some(parent) => parent.clone(),
            None => nearest_stored_ancestor(&self.classes, expr),
        };
        parent_key.map(|k| &self.classes[&k])
    }

    pub fn parent_of(&self, text: &str) -> Result<Option<&ClassRecord>> {
        let expr = self.parse(text)?;
        Ok(self.parent(&expr))
    }

    /// Children in notation order; `None` lists the top-level classes.
    pub fn children(&self, expr: Option<&NotationExpr>) -> Vec<&ClassRecord> {
        let key = expr.map(NotationExpr::canonical);
        self.children
            .get(&key)
            .map(|keys| keys.iter().map(|k| &self.classes[k]).collect())
            .unwrap_or_default()
    }

    pub fn children_of(&self, text: &str) -> Result<Vec<&ClassRecord>> {
        let expr = self.parse(text)?;
        Ok(self.children(Some(&expr)))
    }

    pub fn root_classes(&self) -> Vec<&ClassRecord> {
        self.children(None)
    }

    /// Ancestors, nearest first, ending at a top-level class.
    pub fn ancestors(&self, expr: &NotationExpr) -> Vec<&ClassRecord> {
        let mut out = Vec::new();
        let mut current = self.parent(expr);
        while let Some(record) = current {
            out.push(record);
            current = self.parent(&record.notation);
        }
        out
    }

    /// Every stored class below `expr` in the browse tree, in notation order.
    pub fn descendants(&self, expr: &NotationExpr) -> Vec<&ClassRecord> {
        let mut out = Vec::new();
        let mut stack = vec![expr.canonical()];
        while let Some(key) = stack.pop() {
            if let Some(kids) = self.children.get(&Some(key)) {
                for kid in kids {
                    out.push(&self.classes[kid]);
                    stack.push(kid.clone());
                }
            }
        }
        out.sort_by(|a, b| a.notation.cmp(&b.notation));
        out
    }

    pub fn depth(&self, record: &ClassRecord) -> usize {
        self.depths.get(&record.key()).copied().unwrap_or(0)
    }

    /// The deepest stored class that is `expr` itself or notationally
    /// contains it. Used to attach arbitrary classmark components to the
    /// browse tree.
    pub fn resolve(&self, expr: &NotationExpr) -> Option<&ClassRecord> {
        if let Some(record) = self.get(expr) {
            return Some(record);
        }
        let mut candidates: Vec<&ClassRecord> = Vec::new();
        let mut current = notation::generalize(expr);
        while let Some(step) = current {
            if let Some(record) = self.get(&step) {
                candidates.push(record);
            }
            current = notation::generalize(&step);
        }
        candidates.extend(
            self.spans
                .iter()
                .map(|k| &self.classes[k])
                .filter(|span| notation::contains(&span.notation, expr)),
        );
        candidates.into_iter().max_by(|a, b| {
            self.depth(a)
                .cmp(&self.depth(b))
                .then_with(|| a.notation.cmp(&b.notation))
        })
    }

    /// Nearest ancestor (excluding the class itself) flagged as a discipline.
    pub fn discipline_of(&self, record: &ClassRecord) -> Option<&ClassRecord> {
        self.ancestors(&record.notation).into_iter().find(|a| a.is_discipline)
    }

    /// The perspective a class is seen under: nearest discipline at or above
    /// it, else its top-level ancestor.
    pub fn perspective_of<'a>(&'a self, record: &'a ClassRecord) -> &'a ClassRecord {
        if record.is_discipline {
            return record;
        }
        let ancestors = self.ancestors(&record.notation);
        ancestors
            .iter()
            .copied()
            .find(|a| a.is_discipline)
            .or_else(|| ancestors.last().copied())
            .unwrap_or(record)
    }

    pub fn languages(&self) -> BTreeSet<&str> {
        self.classes
            .values()
            .flat_map(|r| r.captions.keys().map(String::as_str))
            .collect()
    }

    /// Caption in `lang`, else in the default language, else any caption.
    pub fn label(&self, record: &ClassRecord, lang: &str) -> Label {
        if let Some(text) = record.caption(lang) {
            return Label {
                lang: lang.to_string(),
                text: text.to_string(),
                fallback: false,
            };
        }
        let text = record
            .caption(&self.default_lang)
            .or_else(|| record.captions.values().next().map(String::as_str))
            .expect("every class has a caption");
        Label {
            lang: lang.to_string(),
            text: text.to_string(),
            fallback: true,
        }
    }

    pub fn caption(&self, record: &ClassRecord, lang: &str) -> String {
        self.label(record, lang).text
    }

    pub fn see_also_of(&self, text: &str) -> Result<Vec<SeeAlso>> {
        let record = self.require(text)?;
        Ok(record
            .see_also
            .iter()
            .map(|target| {
                let target_record = self.get(target).expect("see-also targets are validated");
                SeeAlso {
                    notation: target.clone(),
                    caption: self.caption(target_record, &self.default_lang),
                }
            })
            .collect())
    }

    pub fn authority_record(&self, text: &str, langs: &[String]) -> Result<AuthorityRecord> {
        let record = self.require(text)?;
        let known = self.languages();
        if let Some(missing) = langs.iter().find(|l| !known.contains(l.as_str())) {
            return Err(Error::UnknownLanguage(missing.clone()));
        }
        let links = |targets: Vec<&ClassRecord>| -> Vec<AuthorityLink> {
            targets
                .into_iter()
                .flat_map(|target| {
                    langs.iter().map(move |lang| AuthorityLink {
                        notation: target.notation.clone(),
                        label: self.label(target, lang),
                    })
                })
                .collect()
        };
        let related = record
            .see_also
            .iter()
            .map(|t| self.get(t).expect("see-also targets are validated"))
            .collect();
        Ok(AuthorityRecord {
            notation: record.notation.clone(),
            terms: langs.iter().map(|lang| self.label(record, lang)).collect(),
            broader: links(self.parent(&record.notation).into_iter().collect()),
            narrower: links(self.children(Some(&record.notation))),
            related: links(related),
            system_no: record.system_no.clone(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn class(scheme: &SchemeBuilder, text: &str, caption: &str) -> ClassRecord {
        ClassRecord::new(scheme.syntax().parse(text).unwrap()).with_caption("en", caption)
    }

    fn small() -> Scheme {
        let mut b = SchemeBuilder::new("T", "test", HierarchyMode::Notational);
        b.add_facet("place", '(', Some(')')).unwrap();
        for (n, c) in [
            ("539.1", "Nuclear physics"),
            ("539.12", "Elementary particles"),
            ("539.125/.126", "Hadrons"),
            ("539.125", "Nucleons"),
            ("539.125.46", "Antiprotons"),
            ("(4)", "Europe"),
            ("(469)", "Portugal"),
            ("94", "History"),
            ("94(469)", "History of Portugal"),
        ] {
            let rec = class(&b, n, c);
            b.insert_class(rec).unwrap();
        }
        let span = b.syntax().parse("539.125/.126").unwrap();
        b.class_mut("539.125").unwrap().parent = Some(span);
        b.build().unwrap()
    }

    #[test]
    fn notational_parents_skip_unstored_levels() {
        let s = small();
        let key = |r: Option<&ClassRecord>| r.map(|r| r.key());
        assert_eq!(key(s.parent_of("539.125.46").unwrap()), Some("539.125".into()));
        assert_eq!(key(s.parent_of("539.125").unwrap()), Some("539.125/.126".into()));
        assert_eq!(key(s.parent_of("539.125/.126").unwrap()), Some("539.12".into()));
        assert_eq!(key(s.parent_of("539.1").unwrap()), None);
        assert_eq!(key(s.parent_of("(469)").unwrap()), Some("(4)".into()));
        assert_eq!(key(s.parent_of("94(469)").unwrap()), Some("94".into()));
        assert_eq!(key(s.parent_of("539.125.467").unwrap()), Some("539.125.46".into()));
    }

    #[test]
    fn resolve_prefers_deepest_container() {
        let s = small();
        let resolved = |t: &str| s.resolve(&s.parse(t).unwrap()).map(|r| r.key());
        assert_eq!(resolved("539.126"), Some("539.125/.126".into()));
        assert_eq!(resolved("539.127"), Some("539.12".into()));
        assert_eq!(resolved("539.125.9"), Some("539.125".into()));
        assert_eq!(resolved("7"), None);
    }

    #[test]
    fn duplicate_and_dangling_are_rejected() {
        let mut b = SchemeBuilder::new("T", "test", HierarchyMode::Notational);
        let rec = class(&b, "5", "Science");
        b.insert_class(rec.clone()).unwrap();
        assert!(b.insert_class(rec).is_err());
        let six = b.syntax().parse("6").unwrap();
        b.class_mut("5").unwrap().see_also.push(six);
        assert!(matches!(b.build(), Err(Error::InvalidScheme(_))));
    }

    #[test]
    fn explicit_cycles_are_detected() {
        let mut b = SchemeBuilder::new("T", "test", HierarchyMode::Explicit);
        for (n, p) in [("A", "B"), ("B", "C"), ("C", "A")] {
            let mut rec = class(&b, n, n);
            rec.parent = Some(NotationExpr::Opaque(p.into()));
            b.insert_class(rec).unwrap();
        }
        let cycle = b.find_cycle().unwrap();
        assert_eq!(cycle.len(), 3);
        assert!(matches!(b.build(), Err(Error::Cycle(_))));
    }

    #[test]
    fn label_falls_back_to_default_language() {
        let s = small();
        let rec = s.get_class("94").unwrap().unwrap();
        let label = s.label(rec, "fr");
        assert!(label.fallback);
        assert_eq!(label.text, "History");
        assert!(matches!(
            s.authority_record("94", &["xx".into()]),
            Err(Error::UnknownLanguage(_))
        ));
    }
}
