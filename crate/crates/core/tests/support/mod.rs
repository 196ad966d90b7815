//! Fixture loading, generators and independently computed oracles shared by
//! the integration targets.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

use classweave_core::interchange::{self, LoadedSource};
use classweave_core::notation::{Auxiliary, Digits, NotationExpr, Relator};
use classweave_core::retrieval::{DocumentInput, DocumentStore};
use classweave_core::synthesis::{FacetFormula, Marker};
use classweave_core::Scheme;
use proptest::prelude::*;

pub fn fixtures_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

pub fn load(name: &str) -> LoadedSource {
    let loaded = interchange::load_scheme(fixtures_dir().join(name)).expect("fixture loads");
    assert!(loaded.diagnostics.is_empty(), "{name}: {:?}", loaded.diagnostics);
    loaded
}

pub fn udc() -> Scheme {
    load("udc.kos").scheme
}

pub fn documents(names: &[&str]) -> Vec<DocumentInput> {
    names
        .iter()
        .flat_map(|name| {
            let (docs, diagnostics) = interchange::load_documents(fixtures_dir().join(name)).expect("documents load");
            assert!(diagnostics.is_empty(), "{name}: {diagnostics:?}");
            docs
        })
        .collect()
}

/// UDC scheme with every shipped document file ingested.
pub fn udc_with_documents() -> (Scheme, DocumentStore) {
    let scheme = udc();
    let mut store = DocumentStore::new();
    let report = store.ingest(
        scheme.syntax(),
        documents(&["physics_docs.kos", "rabbit_docs.kos", "compound_docs.kos"]),
    );
    assert!(report.rejected.is_empty(), "{:?}", report.rejected);
    (scheme, store)
}

/// Direct counts shown in the hadrons search display.
pub const HADRONS_DIRECT: [(&str, &str, usize); 10] = [
    ("539.12", "Elementary Particles", 132),
    ("539.125/.126", "Hadrons, Baryons and mesons", 58),
    ("539.125", "Nucleons", 38),
    ("539.125.4", "Protons", 5),
    ("539.125.46", "Antiprotons", 2),
    ("539.125.5", "Neutrons", 7),
    ("539.125.56", "Antineutrons", 1),
    ("539.126.3", "Mesons", 9),
    ("539.126.5", "Resonances", 11),
    ("539.126.6", "Hyperons", 6),
];

/// Direct counts shown in the rabbit search display.
pub const RABBIT_DIRECT: [(&str, &str, usize); 8] = [
    ("569.32", "Zoology: Rodentia and Lagomorpha", 7),
    ("632.935.7", "Protection of Crops", 3),
    ("636.92", "Animal Husbandry: Domestic Rabbits", 38),
    ("636.92.045", "Animal Husbandry: Domestic Rabbits, Pets", 10),
    ("636.932", "Animal Husbandry: Rodents kept for fur", 9),
    ("639.112", "Hunting: Small game generally", 22),
    ("641.8", "Cooking: Main dishes", 2),
    ("677.534", "Textile industry: Hare fur, Rabbit fur", 8),
];

/// Caption chain by repeated `parent_of`, most specific first.
pub fn caption_walk(scheme: &Scheme, start: &NotationExpr, lang: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut current = scheme.get(start);
    let mut guard = 0;
    while let Some(record) = current {
        out.push(scheme.caption(record, lang));
        current = scheme
            .parent_of(&record.notation.canonical())
            .expect("stored notation parses");
        guard += 1;
        assert!(guard <= scheme.len(), "parent walk does not terminate");
    }
    out
}

/// Aggregate by brute force: documents whose resolved class has `target`
/// at or above it in the parent walk, counted once per (document, class).
pub fn subtree_sum(scheme: &Scheme, store: &DocumentStore, target: &str) -> usize {
    let mut per_class: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    for (component, docs) in store.components() {
        if let Some(class) = scheme.resolve(component) {
            per_class.entry(class.key()).or_default().extend(docs.iter().cloned());
        }
    }
    per_class
        .iter()
        .filter(|(key, _)| {
            let mut current = scheme.by_key(key);
            while let Some(record) = current {
                if record.key() == target {
                    return true;
                }
                current = scheme.parent(&record.notation);
            }
            false
        })
        .map(|(_, docs)| docs.len())
        .sum()
}

/// Add-to-base oracle on display text: drop dots, strip the prefix,
/// concatenate, and re-insert a dot after every third digit.
pub fn add_oracle(base: &str, source: &str, strip: &str) -> String {
    let plain = |s: &str| s.replace('.', "");
    let joined = format!("{}{}", plain(base), &plain(source)[plain(strip).len()..]);
    joined
        .as_bytes()
        .chunks(3)
        .map(|c| std::str::from_utf8(c).unwrap())
        .collect::<Vec<_>>()
        .join(".")
}

/// Span coverage by integer comparison of the candidate's leading digits.
pub fn span_oracle(left: &str, right: &str, candidate: &str) -> bool {
    if candidate.len() < left.len() {
        return false;
    }
    let head: u64 = candidate[..left.len()].parse().unwrap();
    let (l, r): (u64, u64) = (left.parse().unwrap(), right.parse().unwrap());
    l <= head && head <= r
}

pub fn digit_string(min: usize, max: usize) -> impl Strategy<Value = String> {
    proptest::collection::vec(0u8..10, min..=max).prop_map(|d| d.iter().map(|x| char::from(b'0' + x)).collect())
}

pub fn simple() -> impl Strategy<Value = NotationExpr> {
    digit_string(1, 12).prop_map(|d| NotationExpr::Simple(Digits::new(d).unwrap()))
}

fn span() -> impl Strategy<Value = NotationExpr> {
    (1usize..9)
        .prop_flat_map(|len| (digit_string(len, len), digit_string(len, len)))
        .prop_filter("distinct endpoints", |(a, b)| a != b)
        .prop_map(|(a, b)| {
            let (left, right) = if a < b { (a, b) } else { (b, a) };
            NotationExpr::Span {
                left: Digits::new(left).unwrap(),
                right: Digits::new(right).unwrap(),
            }
        })
}

fn auxiliary() -> impl Strategy<Value = Auxiliary> {
    (0usize..3, digit_string(1, 6)).prop_map(|(kind, d)| {
        let (facet, open, close) = [
            ("place", '(', Some(')')),
            ("language", '=', None),
            ("special", '-', None),
        ][kind];
        Auxiliary {
            facet: facet.into(),
            open,
            close,
            digits: Digits::new(d).unwrap(),
        }
    })
}

fn compound() -> impl Strategy<Value = NotationExpr> {
    (simple(), proptest::collection::vec(auxiliary(), 1..3))
        .prop_filter("one auxiliary per facet", |(_, auxes)| {
            let facets: BTreeSet<&str> = auxes.iter().map(|a| a.facet.as_str()).collect();
            facets.len() == auxes.len()
        })
        .prop_map(|(main, auxiliaries)| NotationExpr::Compound {
            main: Box::new(main),
            auxiliaries,
        })
}

/// Any well-formed UDC-syntax expression.
pub fn expression() -> impl Strategy<Value = NotationExpr> {
    let leaf = prop_oneof![
        4 => simple(),
        2 => span(),
        1 => auxiliary().prop_map(NotationExpr::Aux),
        2 => compound(),
    ];
    prop_oneof![
        3 => leaf.clone(),
        1 => (prop_oneof![Just(Relator::Plus), Just(Relator::Colon)], proptest::collection::vec(leaf, 2..4))
            .prop_map(|(op, operands)| classweave_core::synthesis::relate(op, operands).unwrap()),
    ]
}

/// Token of the given marker's character class.
pub fn marker_token(marker: Marker) -> BoxedStrategy<String> {
    match marker {
        Marker::UppercaseLetters => "[A-Z]{1,3}".boxed(),
        Marker::DashDigits => "-[1-9]{1,2}".boxed(),
        Marker::LowercaseLetters => "[a-z]{1,3}".boxed(),
        Marker::ZeroLedDigits => "0[0-9]{0,3}".boxed(),
    }
}

/// Component maps valid for `formula`, every slot optional but not all absent.
pub fn component_map(formula: &FacetFormula) -> impl Strategy<Value = BTreeMap<String, String>> {
    let slots: Vec<_> = formula
        .slots()
        .iter()
        .map(|s| {
            proptest::option::of(marker_token(s.marker)).prop_map({
                let name = s.name.clone();
                move |t| (name.clone(), t)
            })
        })
        .collect();
    slots
        .prop_map(|pairs| {
            pairs
                .into_iter()
                .filter_map(|(name, token)| token.map(|t| (name, t)))
                .collect::<BTreeMap<_, _>>()
        })
        .prop_filter("at least one component", |m| !m.is_empty())
}

/// Random single-classmark corpora over the stored classes of `scheme`
/// below `prefix`, plus unstored descendants of them.
pub fn corpus(scheme: &Scheme, prefix: &str) -> impl Strategy<Value = Vec<DocumentInput>> {
    let mut marks: Vec<String> = scheme
        .classes()
        .map(|c| c.key())
        .filter(|k| k.starts_with(prefix))
        .collect();
    let extended: Vec<String> = marks
        .iter()
        .filter(|k| !k.contains('/'))
        .map(|k| format!("{k}9"))
        .collect();
    marks.extend(extended);
    proptest::collection::vec(proptest::sample::select(marks), 0..40).prop_map(|picks| {
        picks
            .into_iter()
            .enumerate()
            .map(|(i, mark)| DocumentInput {
                doc_id: format!("d{i}"),
                title: String::new(),
                language: "en".into(),
                classmarks: vec![mark],
                line: None,
            })
            .collect()
    })
}
