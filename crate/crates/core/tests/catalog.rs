mod common;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sdatlas::catalog::{
    classify_sdg, cosine, embed, load_snapshot, save_snapshot, Catalog, CatalogDocument, CatalogError, SearchQuery,
    SearchResult, EMBEDDING_DIM,
};
use sdatlas::xmile::parse_xmile;

/// Reference 64-bit FNV-1a, written out independently of the library.
fn reference_fnv(bytes: &[u8]) -> u64 {
    let mut h: u64 = 14695981039346656037;
    for b in bytes {
        h ^= u64::from(*b);
        h = h.wrapping_mul(1099511628211);
    }
    h
}

fn reference_embed(terms: &[&str]) -> Vec<f64> {
    let mut v = vec![0.0; 256];
    for t in terms {
        let h = reference_fnv(t.as_bytes());
        v[(h % 256) as usize] += if h & (1 << 63) != 0 { -1.0 } else { 1.0 };
    }
    let n = v.iter().map(|x: &f64| x * x).sum::<f64>().sqrt();
    v.iter().map(|x| x / n).collect()
}

#[test]
fn embedding_matches_reference_hashing() {
    let terms = ["malaria", "transmission", "malaria transmission", "urban", "traffic", "urban traffic", "dynamics", "malaria dynamics"];
    let buckets: std::collections::BTreeSet<u64> = terms.iter().map(|t| reference_fnv(t.as_bytes()) % 256).collect();
    assert_eq!(buckets.len(), terms.len(), "hash collision among the example terms");

    let mt = embed("malaria transmission");
    assert_eq!(mt, reference_embed(&["malaria", "transmission", "malaria transmission"]));
    let ut = embed("urban traffic");
    let md = embed("malaria dynamics");
    assert!(cosine(&mt, &ut) < cosine(&mt, &md));
    assert_eq!(mt.len(), EMBEDDING_DIM);
}

#[test]
fn population_document_from_model() {
    let bytes = common::corpus_file("population");
    let mut doc = CatalogDocument::new(sdatlas::catalog::content_id(&bytes), "Population");
    assert!(!doc.attach_model(parse_xmile(&bytes).unwrap()).unwrap());
    assert!(doc.has_cld && doc.has_sfd);
    assert_eq!(doc.loop_count, 2);
    let mut c = Catalog::new();
    let id = c.index_document(doc.clone()).unwrap();
    assert_eq!(c.get(&id), Some(&doc));
    let r = c.search(&SearchQuery::text("deaths")).unwrap();
    assert_eq!(r[0].matched_fields, vec!["variables"]);
}

fn catalog_of(docs: Vec<CatalogDocument>) -> Catalog {
    let mut c = Catalog::new();
    for d in docs {
        c.index_document(d).unwrap();
    }
    c
}

fn check_ranking(results: &[SearchResult]) -> Result<(), TestCaseError> {
    for w in results.windows(2) {
        prop_assert!(w[0].score > w[1].score || (w[0].score == w[1].score && w[0].id < w[1].id));
    }
    for (i, a) in results.iter().enumerate() {
        for b in &results[i + 1..] {
            let dominates = b.keyword_score >= a.keyword_score
                && b.vector_score.max(0.0) >= a.vector_score.max(0.0)
                && (b.keyword_score > a.keyword_score || b.vector_score.max(0.0) > a.vector_score.max(0.0));
            prop_assert!(!dominates || b.score == a.score, "{} ranked below a dominated {}", b.id, a.id);
        }
        prop_assert!(a.score >= 0.0 && (-1.0..=1.0).contains(&a.vector_score));
    }
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn retrieval_completeness(seed in any::<u64>(), word in 0usize..28) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let docs = common::random_documents(&mut rng, 60);
        let term = common::vocabulary()[word];
        let c = catalog_of(docs.clone());
        let results = c.search(&SearchQuery { limit: 100, ..SearchQuery::text(term) }).unwrap();
        let ids: Vec<&str> = results.iter().map(|r| r.id.as_str()).collect();
        for d in &docs {
            let contains = sdatlas::catalog::tokenize(&format!("{} {}", d.title, d.abstract_text)).iter().any(|t| t == term);
            if contains {
                prop_assert!(ids.contains(&d.id.as_str()), "{} missing for {}", d.id, term);
            }
        }
        check_ranking(&results)?;
    }

    #[test]
    fn filter_soundness(seed in any::<u64>(), sdg in prop::option::of(1u8..=17), topic in prop::option::of(0usize..6),
                        require_diagram: bool, text: bool) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = catalog_of(common::random_documents(&mut rng, 60));
        let topic = topic.map(|i| common::vocabulary()[i].to_string());
        let q = SearchQuery {
            text: text.then(|| "malaria traffic policy".to_string()),
            sdg,
            topic: topic.clone(),
            require_diagram,
            limit: 100,
        };
        match c.search(&q) {
            Err(CatalogError::EmptyQuery) => prop_assert!(!text && sdg.is_none() && topic.is_none()),
            Err(e) => return Err(TestCaseError::fail(e.to_string())),
            Ok(results) => {
                for r in &results {
                    let d = c.get(&r.id).unwrap();
                    prop_assert!(sdg.is_none_or(|g| d.sdg_labels.iter().any(|l| l.goal == g)));
                    prop_assert!(topic.as_ref().is_none_or(|t| d.topics.contains(t)));
                    prop_assert!(!require_diagram || d.has_cld || d.has_sfd);
                }
                if !text {
                    for w in results.windows(2) {
                        let (a, b) = (c.get(&w[0].id).unwrap(), c.get(&w[1].id).unwrap());
                        prop_assert!(a.year > b.year || (a.year == b.year && a.id < b.id));
                    }
                    let expected = c.documents().filter(|d| {
                        sdg.is_none_or(|g| d.sdg_labels.iter().any(|l| l.goal == g))
                            && topic.as_ref().is_none_or(|t| d.topics.contains(t))
                            && (!require_diagram || d.has_cld || d.has_sfd)
                    }).count();
                    prop_assert_eq!(results.len(), expected.min(100));
                } else {
                    check_ranking(&results)?;
                }
            }
        }
    }

    #[test]
    fn embedding_norms(text in "[a-z ]{0,60}") {
        let v = embed(&text);
        prop_assert_eq!(v.clone(), embed(&text));
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        prop_assert!(norm == 0.0 || (norm - 1.0).abs() < 1e-9);
    }

    #[test]
    fn sdg_labels_are_a_function_of_text(text in "[a-z ]{0,80}") {
        prop_assert_eq!(classify_sdg(&text), classify_sdg(&text));
    }
}

#[test]
fn snapshot_round_trip_is_bit_stable() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let c = catalog_of(common::random_documents(&mut rng, 80));
    let dir = tempfile::tempdir().unwrap();
    save_snapshot(&c, dir.path()).unwrap();
    let loaded = load_snapshot(dir.path()).unwrap();
    assert_eq!(loaded.len(), c.len());
    for q in ["malaria", "urban traffic policy", "water supply housing", "feedback"] {
        let q = SearchQuery { limit: 100, ..SearchQuery::text(q) };
        let (a, b) = (c.search(&q).unwrap(), loaded.search(&q).unwrap());
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.id, y.id);
            assert_eq!(x.score.to_bits(), y.score.to_bits());
            assert_eq!(x.vector_score.to_bits(), y.vector_score.to_bits());
        }
    }
    let again = tempfile::tempdir().unwrap();
    save_snapshot(&loaded, again.path()).unwrap();
    for f in ["manifest.json", "documents.jsonl", "vectors.bin", "docids.txt"] {
        assert_eq!(std::fs::read(dir.path().join(f)).unwrap(), std::fs::read(again.path().join(f)).unwrap(), "{f}");
    }
}

#[test]
fn damaged_snapshots_are_rejected() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let c = catalog_of(common::random_documents(&mut rng, 10));
    let dir = tempfile::tempdir().unwrap();
    save_snapshot(&c, dir.path()).unwrap();

    let vectors = dir.path().join("vectors.bin");
    let bytes = std::fs::read(&vectors).unwrap();
    std::fs::write(&vectors, &bytes[..bytes.len() - 7]).unwrap();
    assert!(matches!(load_snapshot(dir.path()), Err(CatalogError::CorruptSnapshot(_))));
    std::fs::write(&vectors, &bytes).unwrap();
    assert!(load_snapshot(dir.path()).is_ok());

    let manifest = dir.path().join("manifest.json");
    let text = std::fs::read_to_string(&manifest).unwrap();
    std::fs::write(&manifest, text.replace("\"format_version\": 1", "\"format_version\": 9")).unwrap();
    assert_eq!(load_snapshot(dir.path()).unwrap_err(), CatalogError::VersionMismatch { found: 9, expected: 1 });
}

#[test]
fn empty_catalog_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    save_snapshot(&Catalog::new(), dir.path()).unwrap();
    assert!(load_snapshot(dir.path()).unwrap().is_empty());
    assert!(matches!(load_snapshot(dir.path().join("missing")), Err(CatalogError::Io(_))));
}
