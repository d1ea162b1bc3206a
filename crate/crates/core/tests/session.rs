use proptest::prelude::*;
use recipe_adapt::contextgen::AdaptedRecipe;
use recipe_adapt::embedding::EmbeddingVector;
use recipe_adapt::session::{SessionRecord, SessionStore};

type RawRecord = (String, String, Vec<String>, Vec<f64>, Vec<String>);

fn records() -> impl Strategy<Value = Vec<RawRecord>> {
    prop::collection::vec(
        (
            prop::sample::select(vec![
                "a".to_string(),
                "b/1".to_string(),
                "ñandú".to_string(),
            ]),
            "\\PC{1,20}",
            prop::collection::vec("\\PC{1,12}", 1..4),
            prop::collection::vec(
                prop::num::f64::NORMAL | prop::num::f64::SUBNORMAL | prop::num::f64::ZERO,
                3,
            ),
            prop::collection::vec("[a-z0-9-]{1,6}", 0..3),
        ),
        1..8,
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn append_fetch_and_reload_are_exact(recs in records()) {
        let dir = tempfile::tempdir().unwrap();
        let store = SessionStore::open(dir.path(), "p").unwrap();
        let mut written: Vec<SessionRecord> = Vec::new();
        for (source, title, ingredients, emb, ctx) in recs {
            let t = store.count(&source);
            let a = AdaptedRecipe { title, ingredients: ingredients.clone(), steps: ingredients, raw: String::new(), t: t as u32 };
            let rec = SessionRecord {
                source_recipe_id: source,
                t,
                adaptation: AdaptedRecipe { raw: a.text(), ..a },
                embedding: EmbeddingVector::new("p", emb).unwrap(),
                context_ids: ctx,
                ts: t,
            };
            store.record(&rec).unwrap();
            written.push(rec);
        }
        let reloaded = SessionStore::open(dir.path(), "p").unwrap();
        for id in store.sources() {
            let mine: Vec<&SessionRecord> = written.iter().filter(|r| r.source_recipe_id == id).collect();
            let fetched = store.records(&id).unwrap();
            prop_assert_eq!(fetched.iter().collect::<Vec<_>>(), mine);
            prop_assert_eq!(&reloaded.records(&id).unwrap(), &fetched);
            let (h, texts) = reloaded.fetch_history(&id).unwrap();
            prop_assert_eq!(h.len(), texts.len());
            prop_assert!(texts.iter().enumerate().all(|(i, a)| a.t as usize == i));
        }
    }
}
