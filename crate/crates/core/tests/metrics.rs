use std::collections::{HashMap, HashSet};

use proptest::prelude::*;
use recipe_adapt::corpus::StandardIngredient;
use recipe_adapt::embedding::EmbeddingVector;
use recipe_adapt::metrics::{
    context_utilization_probe, global_ingredient_stats, greedy_match, ingredient_diversity,
    pearson_matrix, per_input_diversity, semantic_diversity, unique_n, AdaptationSet,
};

fn ev(v: &[f64]) -> EmbeddingVector {
    EmbeddingVector::new("p", v.to_vec()).unwrap()
}

fn cos(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let n = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
    dot / (n(a) * n(b))
}

fn vecs(n: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(
        prop::collection::vec(-1.0..1.0f64, 4)
            .prop_filter("nonzero", |v| v.iter().any(|x| x.abs() > 1e-3)),
        n,
    )
}

fn ingredient_lists(n: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = Vec<Vec<String>>> {
    prop::collection::vec(prop::collection::vec("[a-f]", 1..5), n)
}

fn to_std(l: &[String]) -> Vec<StandardIngredient> {
    l.iter()
        .map(|s| StandardIngredient::from(s.as_str()))
        .collect()
}

proptest! {
    #[test]
    fn semantic_matches_pair_enumeration(vs in vecs(2..=6)) {
        let mut pairs = Vec::new();
        for i in 0..vs.len() {
            for j in 0..vs.len() {
                if i < j {
                    pairs.push((1.0 - cos(&vs[i], &vs[j])) / 2.0);
                }
            }
        }
        let want = pairs.iter().sum::<f64>() / pairs.len() as f64;
        let got = semantic_diversity(&vs.iter().map(|v| ev(v)).collect::<Vec<_>>()).unwrap();
        prop_assert!((got - want).abs() < 1e-9);
        prop_assert!((0.0..=1.0).contains(&got));
    }

    #[test]
    fn semantic_permutation_and_duplication(vs in vecs(2..=6), rot in 0usize..6) {
        let e: Vec<EmbeddingVector> = vs.iter().map(|v| ev(v)).collect();
        let base = semantic_diversity(&e).unwrap();
        let mut r = e.clone();
        r.rotate_left(rot % e.len());
        prop_assert!((semantic_diversity(&r).unwrap() - base).abs() < 1e-12);
        // Duplicating an outlier can raise the pair mean once K >= 4, so the
        // duplicate is taken from the member with the highest mean similarity.
        let mut closest = 0;
        let mut best = f64::MIN;
        for i in 0..vs.len() {
            let mean_sim: f64 = (0..vs.len()).filter(|&j| j != i).map(|j| cos(&vs[i], &vs[j])).sum::<f64>() / (vs.len() - 1) as f64;
            if mean_sim > best { best = mean_sim; closest = i; }
        }
        let mut d = e.clone();
        d.push(e[closest].clone());
        prop_assert!(semantic_diversity(&d).unwrap() <= base + 1e-12);
    }

    #[test]
    fn semantic_any_duplicate_for_small_sets(vs in vecs(2..=3), dup in 0usize..3) {
        let e: Vec<EmbeddingVector> = vs.iter().map(|v| ev(v)).collect();
        let base = semantic_diversity(&e).unwrap();
        let mut d = e.clone();
        d.push(e[dup % e.len()].clone());
        prop_assert!(semantic_diversity(&d).unwrap() <= base + 1e-12);
    }

    #[test]
    fn ingredient_matches_set_oracle(lists in ingredient_lists(1..=6), dup in 0usize..6) {
        let sets: Vec<HashSet<&String>> = lists.iter().map(|l| l.iter().collect()).collect();
        let union: HashSet<&String> = sets.iter().flatten().copied().collect();
        let want = union.len() as f64 / sets.iter().map(HashSet::len).sum::<usize>() as f64;
        let std_lists: Vec<Vec<StandardIngredient>> = lists.iter().map(|l| to_std(l)).collect();
        let got = ingredient_diversity(&std_lists).unwrap();
        prop_assert!((got - want).abs() < 1e-9);
        prop_assert!(got > 0.0 && got <= 1.0);
        let mut rev = std_lists.clone();
        rev.reverse();
        prop_assert_eq!(ingredient_diversity(&rev).unwrap(), got);
        let mut d = std_lists.clone();
        d.push(std_lists[dup % std_lists.len()].clone());
        prop_assert!(ingredient_diversity(&d).unwrap() <= got);
    }

    #[test]
    fn unique_n_matches_counting_oracle(texts in prop::collection::vec("[a-c]{1,2}( [a-c]{1,2}){0,5}", 1..5)) {
        let toks: Vec<Vec<&str>> = texts.iter().map(|t| t.split(' ').collect()).collect();
        let mut ratios = Vec::new();
        for n in 1..=3 {
            let mut grams: Vec<String> = Vec::new();
            for t in &toks {
                if t.len() >= n {
                    for i in 0..=t.len() - n {
                        grams.push(t[i..i + n].join("\u{1}"));
                    }
                }
            }
            if !grams.is_empty() {
                let uniq: HashSet<&String> = grams.iter().collect();
                ratios.push(uniq.len() as f64 / grams.len() as f64);
            }
        }
        let want = ratios.iter().sum::<f64>() / ratios.len() as f64;
        let got = unique_n(&texts, &[1, 2, 3]).unwrap();
        prop_assert!((got - want).abs() < 1e-9);
        prop_assert!(got > 0.0 && got <= 1.0);
        let mut rev = texts.clone();
        rev.reverse();
        prop_assert!((unique_n(&rev, &[1, 2, 3]).unwrap() - got).abs() < 1e-12);
    }

    #[test]
    fn pearson_matches_textbook(cols in prop::collection::vec(prop::collection::vec(-10.0..10.0f64, 5), 2..5)) {
        let m = pearson_matrix(&cols).unwrap();
        let n = 5.0;
        for i in 0..cols.len() {
            for j in 0..cols.len() {
                let (x, y) = (&cols[i], &cols[j]);
                let sx: f64 = x.iter().sum();
                let sy: f64 = y.iter().sum();
                let sxy: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
                let sxx: f64 = x.iter().map(|a| a * a).sum();
                let syy: f64 = y.iter().map(|b| b * b).sum();
                let want = (n * sxy - sx * sy) / ((n * sxx - sx * sx).sqrt() * (n * syy - sy * sy).sqrt());
                let got = m[i][j].unwrap();
                prop_assert!((got - want).abs() < 1e-9, "{} vs {}", got, want);
                prop_assert_eq!(m[i][j], m[j][i]);
                prop_assert!((-1.0..=1.0).contains(&got));
            }
            prop_assert_eq!(m[i][i], Some(1.0));
        }
    }

    #[test]
    fn greedy_matching_matches_pairwise_max(src in vecs(1..=5), out in vecs(1..=5)) {
        let mapped = |a: &[f64], b: &[f64]| (cos(a, b) + 1.0) / 2.0;
        let r = src.iter().map(|s| out.iter().map(|o| mapped(s, o)).fold(f64::MIN, f64::max)).sum::<f64>() / src.len() as f64;
        let p = out.iter().map(|o| src.iter().map(|s| mapped(s, o)).fold(f64::MIN, f64::max)).sum::<f64>() / out.len() as f64;
        let f = 2.0 * p * r / (p + r);
        let g = greedy_match(&src.iter().map(|v| ev(v)).collect::<Vec<_>>(), &out.iter().map(|v| ev(v)).collect::<Vec<_>>()).unwrap();
        prop_assert!((g.f1 - f).abs() < 1e-9);
        prop_assert!((g.precision - p).abs() < 1e-9 && (g.recall - r).abs() < 1e-9);
    }

    #[test]
    fn probe_count_is_bounded(outs in vecs(1..=5), ctx in vecs(1..=5)) {
        let contexts: Vec<(String, EmbeddingVector)> = ctx.iter().enumerate().map(|(i, v)| (format!("d{i}"), ev(v))).collect();
        let r = context_utilization_probe(&outs.iter().map(|v| ev(v)).collect::<Vec<_>>(), &contexts).unwrap();
        prop_assert!(r.distinct_count >= 1 && r.distinct_count <= outs.len().min(ctx.len()));
    }

    #[test]
    fn global_stats_match_frequency_table(lists in ingredient_lists(1..=10)) {
        let std_lists: Vec<Vec<StandardIngredient>> = lists.iter().map(|l| to_std(l)).collect();
        let mut freq: HashMap<&str, usize> = HashMap::new();
        for l in &lists { for x in l { *freq.entry(x).or_default() += 1; } }
        let total: usize = freq.values().sum();
        let mut counts: Vec<usize> = freq.values().copied().collect();
        counts.sort_unstable_by(|a, b| b.cmp(a));
        let top = ((counts.len() as f64 * 0.01).ceil() as usize).max(1);
        let cutoff = counts[top - 1];
        let hf: usize = counts.iter().filter(|&&c| c >= cutoff).sum();
        let s = global_ingredient_stats(&std_lists, 0.01).unwrap();
        prop_assert!((s.hf_share - hf as f64 / total as f64).abs() < 1e-12);
        prop_assert!((s.across_input_diversity - freq.len() as f64 / total as f64).abs() < 1e-12);
        prop_assert!((s.unique_count_normalized - freq.len() as f64 / (total as f64 / lists.len() as f64)).abs() < 1e-12);
    }
}

#[test]
fn ten_recipe_frequency_table() {
    // "sal" appears in all 10, "ajo" in 6, everything else once.
    let mut lists: Vec<Vec<String>> = (0..10)
        .map(|i| vec!["sal".to_string(), format!("x{i}")])
        .collect();
    for l in lists.iter_mut().take(6) {
        l.push("ajo".into());
    }
    let std_lists: Vec<Vec<StandardIngredient>> = lists.iter().map(|l| to_std(l)).collect();
    let s = global_ingredient_stats(&std_lists, 0.01).unwrap();
    // 12 distinct names; top 1% rounds up to one name, "sal".
    assert_eq!(s.hf_names, ["sal"]);
    assert_eq!(s.occurrences, 26);
    assert_eq!(s.hf_share, 10.0 / 26.0);
    assert_eq!(s.across_input_diversity, 12.0 / 26.0);
    assert_eq!(s.unique_count_normalized, 12.0 / 2.6);
    let s = global_ingredient_stats(&std_lists, 0.1).unwrap();
    assert_eq!(s.hf_names, ["ajo", "sal"]);
}

#[test]
fn per_input_oracle_on_three_sets() {
    let sets: Vec<AdaptationSet> = (0..3)
        .map(|i| AdaptationSet {
            source_recipe_id: format!("s{i}"),
            config: "c".into(),
            adaptations: (0..=i)
                .map(|t| recipe_adapt::contextgen::AdaptedRecipe {
                    title: format!("plato {t}"),
                    ingredients: vec!["a".into()],
                    steps: vec!["mezclar todo".into()],
                    raw: String::new(),
                    t: t as u32,
                })
                .collect(),
        })
        .collect();
    let metric = |s: &AdaptationSet| {
        let texts: Vec<String> = s.adaptations.iter().map(|a| a.text()).collect();
        unique_n(&texts, &[1, 2, 3])
    };
    let want = sets.iter().map(|s| metric(s).unwrap()).sum::<f64>() / 3.0;
    assert!((per_input_diversity(&sets, metric).unwrap() - want).abs() < 1e-12);
}
