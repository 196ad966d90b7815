//! Behaviour of every operation against the shipped fixtures.

mod support;

use std::collections::BTreeSet;

use classweave_core::indexes::{alphabetical_listing, lookup_term, relative_index, MatchKind};
use classweave_core::interchange::{self, parse_scheme_source};
use classweave_core::notation::{NotationExpr, Relator};
use classweave_core::retrieval::{suggest_classes, DocumentInput, DocumentStore, Retrieval};
use classweave_core::synthesis::{apply_auxiliary, expand_add, relate};
use classweave_core::{Error, HierarchyMode};
use support::*;

fn keys(exprs: impl IntoIterator<Item = NotationExpr>) -> Vec<String> {
    exprs.into_iter().map(|e| e.canonical()).collect()
}

#[test]
fn every_fixture_loads_cleanly() {
    let counts: Vec<(String, usize)> = ["udc.kos", "ddc.kos", "nebis.kos", "bc2.kos", "lcc.kos"]
        .iter()
        .map(|f| {
            let s = load(f).scheme;
            (s.id().to_string(), s.len())
        })
        .collect();
    assert_eq!(
        counts,
        [("UDC", 75), ("DDC", 35), ("NEBIS", 5), ("BC2", 8), ("LCC", 3)]
            .map(|(a, b)| (a.to_string(), b))
            .to_vec()
    );
}

#[test]
fn explicit_schemes_use_stored_links_only() {
    let bc2 = load("bc2.kos").scheme;
    assert_eq!(bc2.mode(), HierarchyMode::Explicit);
    let parent = |n: &str| bc2.parent_of(n).unwrap().map(|p| p.key());
    assert_eq!(parent("PIJ D").as_deref(), Some("PIJ C"));
    assert_eq!(parent("PIJ BK").as_deref(), Some("PIJ"));
    assert_eq!(parent("PBK"), None);
    assert_eq!(parent("CO").as_deref(), Some("C"));
    let lcc = load("lcc.kos").scheme;
    let chain: Vec<String> = lcc
        .ancestors(&lcc.parse("QD241-441").unwrap())
        .iter()
        .map(|c| c.key())
        .collect();
    assert_eq!(chain, ["QD1-999", "Q"]);
}

#[test]
fn alphabetical_listing_examples() {
    let udc = udc();
    let listing: Vec<_> = alphabetical_listing(&udc, "en")
        .into_iter()
        .filter(|e| e.notation.canonical().starts_with("539"))
        .collect();
    assert_eq!(listing[0].term, "Antineutrinos");
    assert_eq!(listing[0].notation.canonical(), "539.123.6");
    let positrons: Vec<_> = listing.iter().filter(|e| e.term == "Positrons").collect();
    assert_eq!(positrons.len(), 1);
    assert_eq!(positrons[0].notation.canonical(), "539.124.6");
    let mesons: BTreeSet<String> = listing
        .iter()
        .filter(|e| e.term == "Mesons")
        .map(|e| e.notation.canonical())
        .collect();
    assert_eq!(mesons, ["539.125/.126", "539.126.3"].map(String::from).into());
}

#[test]
fn chain_index_example() {
    let udc = udc();
    let entries = classweave_core::indexes::chain_index(&udc, "en").unwrap();
    let entry = entries.iter().find(|e| e.notation.canonical() == "539.125.46").unwrap();
    assert_eq!(
        entry.chain,
        [
            "Antiprotons",
            "Protons",
            "Nucleons",
            "Hadrons. Baryons and mesons",
            "Elementary and simple particles",
            "Nuclear physics. Atomic physics. Molecular physics"
        ]
    );
    let root = entries.iter().find(|e| e.notation.canonical() == "539.1").unwrap();
    assert_eq!(root.chain.len(), 1);
}

#[test]
fn relative_index_references_resolve() {
    let ddc = load("ddc.kos").scheme;
    for (term, placements) in relative_index(&ddc, "en") {
        assert!(!term.is_empty());
        for p in placements {
            assert!(ddc.get(&p.notation).is_some(), "{term} -> {}", p.notation);
        }
    }
}

#[test]
fn lookup_examples() {
    let udc = udc();
    let hadrons = lookup_term(&udc, "hadrons", "en");
    assert_eq!(hadrons.len(), 1);
    assert_eq!(hadrons[0].notation.canonical(), "539.125/.126");
    assert_eq!(hadrons[0].kind, MatchKind::Exact);
    let tepehua = lookup_term(&udc, "Tepehua", "en");
    assert_eq!(
        keys(tepehua.iter().map(|m| m.notation.clone())),
        ["=821.221", "=822.248"]
    );
    assert_eq!(
        (tepehua[0].kind, tepehua[1].kind),
        (MatchKind::Exact, MatchKind::Prefix)
    );
    assert_eq!(tepehua[1].term, "Tepehuan");
    assert!(lookup_term(&udc, "zzz", "en").is_empty());
}

#[test]
fn compound_and_relation_classmarks_are_retrievable_by_component() {
    let (udc, store) = udc_with_documents();
    let r = Retrieval::new(&udc, &store);
    let docs = |n: &str| r.explode(Some(&udc.parse(n).unwrap()));
    assert!(docs("338.48").contains("tour-pt"));
    assert!(docs("(469)").contains("tour-pt"));
    assert!(docs("(4)").contains("tour-pt"));
    assert!(docs("73").contains("sculpt-paint"));
    assert!(docs("75").contains("sculpt-paint"));
    assert!(docs("=821.221").contains("tepehua"));
    for doc in store.documents() {
        for mark in &doc.classmarks {
            for c in classweave_core::notation::decompose(mark) {
                assert!(store.posting(&c.key).unwrap().contains(&doc.doc_id));
            }
        }
    }
}

#[test]
fn ingest_rejections() {
    let udc = udc();
    let mut store = DocumentStore::new();
    let doc = |id: &str, marks: &[&str]| DocumentInput {
        doc_id: id.into(),
        title: String::new(),
        language: "en".into(),
        classmarks: marks.iter().map(|m| m.to_string()).collect(),
        line: None,
    };
    let report = store.ingest(
        udc.syntax(),
        [
            doc("x", &[]),
            doc("y", &["539..1"]),
            doc("z", &["536"]),
            doc("z", &["536"]),
        ],
    );
    assert_eq!(report.accepted, 1);
    assert_eq!(report.rejected.len(), 3);
}

#[test]
fn search_rows_are_disjoint_and_sum_to_column_totals() {
    let (udc, store) = udc_with_documents();
    let r = Retrieval::new(&udc, &store);
    let rabbit = r.search_term("rabbit", "en");
    let distinct: BTreeSet<String> = rabbit.iter().map(|row| row.notation.canonical()).collect();
    assert_eq!(distinct.len(), rabbit.len());
    assert_eq!(rabbit.iter().map(|row| row.direct_hits).sum::<usize>(), 99);
    let perspectives: BTreeSet<&str> = rabbit.iter().map(|row| row.perspective.as_str()).collect();
    assert!(perspectives.len() >= 4, "{perspectives:?}");
    let hadrons = r.search_term("hadrons", "en");
    assert!(hadrons.iter().all(|row| row.perspective == hadrons[0].perspective));
    assert!(r.search_term("zzz", "en").is_empty());
}

#[test]
fn browse_examples() {
    let (udc, store) = udc_with_documents();
    let r = Retrieval::new(&udc, &store);
    let view = r.browse(Some(&udc.parse("539.125").unwrap()), "en", false).unwrap();
    let kids: Vec<(String, usize)> = view
        .children
        .iter()
        .map(|c| (c.notation.canonical(), c.direct_hits))
        .collect();
    assert_eq!(kids, [("539.125.4".to_string(), 5), ("539.125.5".to_string(), 7)]);
    assert_eq!(view.parent.as_ref().unwrap().notation.canonical(), "539.125/.126");
    let class = view.class.as_ref().unwrap();
    assert_eq!(class.aggregate_hits, r.explode(Some(&class.notation)).len());
    let root = r.browse(None, "en", false).unwrap();
    assert!(root.children.iter().any(|c| c.notation.canonical() == "539.1"));
    assert!(root.class.is_none());
    assert!(matches!(
        r.browse(Some(&udc.parse("999").unwrap()), "en", false),
        Err(Error::NotFound { .. })
    ));
    let crumbs: Vec<String> = r
        .browse(Some(&udc.parse("539.125.46").unwrap()), "en", true)
        .unwrap()
        .breadcrumbs
        .iter()
        .map(|c| c.notation.canonical())
        .collect();
    assert_eq!(crumbs, ["539.1", "539.12", "539.125/.126", "539.125", "539.125.4"]);
}

#[test]
fn explode_examples() {
    let (udc, store) = udc_with_documents();
    let r = Retrieval::new(&udc, &store);
    let docs = |n: &str| r.explode(Some(&udc.parse(n).unwrap()));
    let mut union = BTreeSet::new();
    for n in ["539.125", "539.125.4", "539.125.46", "539.125.5", "539.125.56"] {
        union.extend(r.direct_docs(udc.get_class(n).unwrap().unwrap()));
    }
    assert_eq!(docs("539.125"), union);
    assert_eq!(
        docs("539.125.46"),
        r.direct_docs(udc.get_class("539.125.46").unwrap().unwrap())
    );
    let leptons = docs("539.123/.124");
    assert!(leptons.is_subset(&docs("539.12")));
    assert_eq!(r.explode(None).len(), store.len());
}

#[test]
fn broaden_until_examples() {
    let (udc, store) = udc_with_documents();
    let r = Retrieval::new(&udc, &store);
    let b = r.broaden_until(&udc.parse("539.125.46").unwrap(), 10, "en").unwrap();
    assert_eq!(
        (b.notation.unwrap().canonical(), b.hits, b.steps),
        ("539.125".to_string(), 53, 2)
    );
    let b = r.broaden_until(&udc.parse("539.125.46").unwrap(), 1, "en").unwrap();
    assert_eq!(b.notation.unwrap().canonical(), "539.125.46");
    let b = r
        .broaden_until(&udc.parse("539.125.46").unwrap(), store.len() + 1, "en")
        .unwrap();
    assert_eq!((b.notation, b.hits), (None, store.len()));
}

#[test]
fn syndetic_expansion_of_sexual_ethics() {
    let (udc, store) = udc_with_documents();
    let r = Retrieval::new(&udc, &store);
    let rows = r.syndetic_expand(&udc.parse("176").unwrap(), "en").unwrap();
    assert_eq!(
        keys(rows.iter().map(|r| r.notation.clone())),
        ["173", "2-447", "316.36", "343.5", "351.764", "364.633", "392.53", "613.88"]
    );
    for row in &rows {
        assert_eq!(row.direct_hits, r.direct_hits(udc.get(&row.notation).unwrap()));
    }
    assert!(r.syndetic_expand(&udc.parse("173").unwrap(), "en").unwrap().is_empty());
}

#[test]
fn suggestions() {
    let udc = udc();
    let top = suggest_classes(&udc, "rabbit fur for the textile industry", "en", 3);
    assert_eq!(top[0].notation.canonical(), "677.534");
    let hadrons = suggest_classes(&udc, "hadrons", "en", 5);
    assert_eq!(hadrons[0].notation.canonical(), "539.125/.126");
    assert!(suggest_classes(&udc, "qqqq xyzzy", "en", 5).is_empty());
    assert_eq!(suggest_classes(&udc, "rabbit", "en", 2).len(), 2);
}

#[test]
fn synthesis_examples() {
    let udc = udc();
    let tourism = udc.parse("338.48").unwrap();
    assert_eq!(
        apply_auxiliary(&udc, &tourism, "place", "469").unwrap().canonical(),
        "338.48(469)"
    );
    let compound = apply_auxiliary(&udc, &tourism, "place", "(469)").unwrap();
    assert!(apply_auxiliary(&udc, &compound, "place", "(4)").is_err());
    assert!(apply_auxiliary(&udc, &tourism, "place", "(999)").is_err());
    assert!(apply_auxiliary(&udc, &tourism, "time", "(4)").is_err());
    let with_lang = apply_auxiliary(&udc, &compound, "language", "=821.221").unwrap();
    assert_eq!(with_lang.canonical(), "338.48(469)=821.221");
    let related = relate(Relator::Colon, vec![udc.parse("73").unwrap(), udc.parse("75").unwrap()]).unwrap();
    assert_eq!(related.canonical(), "73:75");
    let ddc = load("ddc.kos").scheme;
    let add = &ddc.add_instructions()[0];
    assert!(matches!(
        expand_add(add, &ddc.parse("595.8").unwrap()),
        Err(Error::OutOfSpan { .. })
    ));
}

#[test]
fn trilingual_captions_and_fallback() {
    let nebis = load("nebis.kos").scheme;
    let hadrons = nebis.get_class("539.12.000.1").unwrap().unwrap();
    assert_eq!(hadrons.captions.len(), 3);
    assert_eq!(
        hadrons.caption("fr"),
        Some("HADRONS (PHYSIQUE DES PARTICULES ÉLÉMENTAIRES)")
    );
    let udc = udc();
    let heat = udc.get_class("536").unwrap().unwrap();
    assert_eq!(udc.label(heat, "ru").text, "Тепло. Термодинамика");
    let fallback = udc.label(udc.get_class("176").unwrap().unwrap(), "fr");
    assert!(fallback.fallback);
    assert_eq!(fallback.text, "Sexual ethics. Sexual morality");
}

#[test]
fn authority_reciprocity() {
    let nebis = load("nebis.kos").scheme;
    let langs = vec!["en".to_string()];
    for class in nebis.classes() {
        let record = nebis.authority_record(&class.key(), &langs).unwrap();
        for narrower in &record.narrower {
            let child = nebis.authority_record(&narrower.notation.canonical(), &langs).unwrap();
            assert!(child.broader.iter().any(|b| b.notation == class.notation));
        }
    }
    let (text, skipped) = interchange::export_authority(&nebis, &["539.125".into(), "999".into()], &langs).unwrap();
    assert_eq!(skipped.len(), 1);
    assert!(!text.contains("Related term"));
    assert!(matches!(
        interchange::export_authority(&nebis, &["539.125".into()], &["xx".into()]),
        Err(Error::UnknownLanguage(_))
    ));
}

#[test]
fn loader_diagnostics() {
    let base = std::fs::read_to_string(fixtures_dir().join("udc.kos")).unwrap();
    let loaded = parse_scheme_source(&format!("{base}SA\t176\t999\n"), "udc").unwrap();
    assert_eq!(loaded.diagnostics.len(), 1);
    assert!(loaded.diagnostics[0].message.contains("dangling"));
    let loaded = parse_scheme_source(
        &format!("{base}A\ttime\t(4)\ten\tEurope again\nP\t5\t6\nC\t5(\ten\tx\n"),
        "udc",
    )
    .unwrap();
    assert_eq!(loaded.diagnostics.len(), 3);
    assert!(parse_scheme_source(&format!("{base}C\t536\ten\tHeat again\n"), "udc").is_err());
    assert!(parse_scheme_source(&format!("{base}MAP\tUDC\t536\tDDC\t536\texact\n"), "udc").is_err());
    let cyclic = "SCHEME\tX\tx\texplicit\nC\tA\ten\ta\nC\tB\ten\tb\nP\tA\tB\nP\tB\tA\n";
    assert!(matches!(parse_scheme_source(cyclic, "x"), Err(Error::Cycle(_))));
}

#[test]
fn source_export_round_trips_every_fixture() {
    for name in ["udc.kos", "ddc.kos", "nebis.kos", "bc2.kos", "lcc.kos"] {
        let first = load(name).scheme;
        let text = interchange::export_source(&first);
        let second = parse_scheme_source(&text, "x").unwrap();
        assert!(second.diagnostics.is_empty(), "{name}: {:?}", second.diagnostics);
        assert_eq!(
            first.classes().collect::<Vec<_>>(),
            second.scheme.classes().collect::<Vec<_>>(),
            "{name}"
        );
        assert_eq!(first.facet_formulas(), second.scheme.facet_formulas());
        assert_eq!(first.add_instructions(), second.scheme.add_instructions());
    }
}
