use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::embedding::{cosine_similarity, EmbeddingVector};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeResult {
    pub distinct_count: usize,
    /// Nearest context per output, in output order.
    pub argmax_ids: Vec<String>,
}

/// For every output, the context with the highest cosine (first position
/// wins ties); reports how many distinct contexts were hit.
pub fn context_utilization_probe(
    outputs: &[EmbeddingVector],
    contexts: &[(String, EmbeddingVector)],
) -> Result<ProbeResult> {
    if outputs.is_empty() || contexts.is_empty() {
        return Err(Error::Domain(
            "probe needs at least one output and one context".into(),
        ));
    }
    let mut argmax_ids = Vec::with_capacity(outputs.len());
    for o in outputs {
        let mut best: Option<(usize, f64)> = None;
        for (i, (_, c)) in contexts.iter().enumerate() {
            let s = cosine_similarity(o, c)?;
            if best.is_none_or(|(_, b)| s > b) {
                best = Some((i, s));
            }
        }
        argmax_ids.push(contexts[best.expect("contexts nonempty").0].0.clone());
    }
    let distinct_count = argmax_ids.iter().collect::<BTreeSet<_>>().len();
    Ok(ProbeResult {
        distinct_count,
        argmax_ids,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeDistribution {
    /// `buckets[i]` counts sources whose distinct count is `i + 1`.
    pub buckets: Vec<usize>,
    pub average: f64,
}

pub fn probe_distribution(distinct_counts: &[usize], k: usize) -> Result<ProbeDistribution> {
    if distinct_counts.is_empty() {
        return Err(Error::Domain("no probe results to tally".into()));
    }
    let mut buckets = vec![0; k];
    for &c in distinct_counts {
        if c == 0 || c > k {
            return Err(Error::Domain(format!("distinct count {c} outside 1..={k}")));
        }
        buckets[c - 1] += 1;
    }
    let average = distinct_counts.iter().sum::<usize>() as f64 / distinct_counts.len() as f64;
    Ok(ProbeDistribution { buckets, average })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(x: &[f64]) -> EmbeddingVector {
        EmbeddingVector::new("p", x.to_vec()).unwrap()
    }

    fn ctx() -> Vec<(String, EmbeddingVector)> {
        vec![
            ("d1".into(), v(&[1.0, 0.0, 0.0])),
            ("d2".into(), v(&[0.0, 1.0, 0.0])),
            ("d3".into(), v(&[0.0, 0.0, 1.0])),
        ]
    }

    #[test]
    fn identical_outputs_hit_one_context() {
        let outs = vec![v(&[0.0, 1.0, 0.0]); 5];
        let r = context_utilization_probe(&outs, &ctx()).unwrap();
        assert_eq!(r.distinct_count, 1);
        assert_eq!(r.argmax_ids, vec!["d2"; 5]);
    }

    #[test]
    fn ties_go_to_first_position() {
        let r = context_utilization_probe(&[v(&[1.0, 1.0, 0.0])], &ctx()).unwrap();
        assert_eq!(r.argmax_ids, ["d1"]);
    }

    #[test]
    fn tally() {
        let d = probe_distribution(&[5, 5, 5], 5).unwrap();
        assert_eq!(d.buckets, [0, 0, 0, 0, 3]);
        assert_eq!(d.average, 5.0);
        let d = probe_distribution(&[1, 2, 2, 3, 1, 1], 5).unwrap();
        assert_eq!(d.buckets, [3, 2, 1, 0, 0]);
        assert_eq!(d.average, 10.0 / 6.0);
    }
}
