mod common;

use proptest::prelude::*;
use recipe_adapt::contextgen::{
    assemble_prompt, build_window, parse_recipe, AdaptedRecipe, AssemblyMode, Templates,
};
use recipe_adapt::embedding::EmbeddingVector;
use recipe_adapt::rerank::Selected;
use recipe_adapt::retrieval::Candidate;

fn selection(k: usize) -> Vec<Selected> {
    (0..k)
        .map(|i| Selected {
            candidate: Candidate {
                recipe_id: format!("D{}", i + 1),
                dense_score: 0.0,
                embedding: EmbeddingVector::new("p", vec![1.0]).unwrap(),
            },
            rel: 0.0,
            score: 0.0,
        })
        .collect()
}

fn noisy_line() -> impl Strategy<Value = String> {
    (
        prop::sample::select(vec!["", "- ", "* ", "• ", "  ", "3. ", "12) "]),
        "[a-zñáé]{1,8}( [a-zñáé,]{1,8}){0,3}",
        prop::sample::select(vec!["", " ", "  "]),
    )
        .prop_map(|(p, body, s)| format!("{p}{body}{s}"))
}

fn raw_output() -> impl Strategy<Value = String> {
    (
        "[A-Za-záéñ]{1,10}( [a-záéñ]{1,10}){0,3}",
        prop::collection::vec(noisy_line(), 1..6),
        prop::collection::vec(noisy_line(), 1..6),
        prop::sample::select(vec!["Nombre:", "**Nombre:**", "nombre:", "## Nombre:"]),
    )
        .prop_map(|(title, ings, steps, header)| {
            format!(
                "{header} {title}\nIngredientes:\n{}\nPasos:\n{}",
                ings.join("\n"),
                steps.join("\n")
            )
        })
}

proptest! {
    #[test]
    fn parse_render_round_trip(raw in raw_output(), t in 0u32..10) {
        let a = parse_recipe(&raw, t).unwrap();
        let again = parse_recipe(&a.text(), t).unwrap();
        prop_assert_eq!(AdaptedRecipe { raw: String::new(), ..again }, AdaptedRecipe { raw: String::new(), ..a.clone() });
        prop_assert!(!a.title.is_empty());
        for (i, line) in a.text().lines().skip_while(|l| *l != "Pasos:").skip(1).enumerate() {
            let prefix = format!("{}. ", i + 1);
            prop_assert!(line.starts_with(&prefix));
        }
    }

    #[test]
    fn window_members_are_contiguous(k in 1usize..8, w in 1usize..8, t in 0usize..20) {
        prop_assume!(w <= k);
        let sel = selection(k);
        let win = build_window(&sel, w, t).unwrap();
        prop_assert_eq!(win.members.len(), w);
        let first: usize = win.members[0].candidate.recipe_id[1..].parse().unwrap();
        let tp = t % (k / w);
        prop_assert_eq!(first, tp * w + 1);
        for (j, m) in win.members.iter().enumerate() {
            prop_assert_eq!(&m.candidate.recipe_id, &format!("D{}", first + j));
        }
    }
}

#[test]
fn window_examples() {
    let sel = selection(5);
    let ids = |w, t| build_window(&sel, w, t).unwrap().ids();
    assert_eq!(ids(1, 0), ["D1"]);
    assert_eq!(ids(1, 2), ["D3"]);
    assert_eq!(ids(2, 1), ["D3", "D4"]);
    assert_eq!(ids(1, 5), ["D1"]);
    let all: Vec<String> = (0..5).flat_map(|t| ids(1, t)).collect();
    assert_eq!(all, ["D1", "D2", "D3", "D4", "D5"]);
    assert!(build_window(&sel, 6, 0).is_err());
    assert!(build_window(&sel, 0, 0).is_err());
}

#[test]
fn tag_counts_in_assembled_prompt() {
    let store = common::synthetic_store(3, 1);
    let ctx = store.get("esp-00").unwrap();
    let src = store.get("mex-00").unwrap();
    let hist: Vec<AdaptedRecipe> = (0..2)
        .map(|t| AdaptedRecipe {
            title: format!("h{t}"),
            ingredients: vec!["sal".into()],
            steps: vec!["x".into()],
            raw: String::new(),
            t,
        })
        .collect();
    let tpl = Templates::default();
    let p = assemble_prompt(
        &tpl.contrastive,
        AssemblyMode::Contrastive,
        &[ctx],
        src,
        &hist,
        5,
    )
    .unwrap();
    let count = |tag: &str| p.lines().filter(|l| *l == tag).count();
    assert_eq!(count("[reference]"), 1);
    assert_eq!(count("[history]"), 2);
    assert!(p.contains(&src.document_text()));
    let empty = assemble_prompt(
        &tpl.contrastive,
        AssemblyMode::Contrastive,
        &[ctx],
        src,
        &[],
        5,
    )
    .unwrap();
    assert!(empty.contains("(ninguna)"));
    assert!(!empty.lines().any(|l| l == "[history]"));
}
