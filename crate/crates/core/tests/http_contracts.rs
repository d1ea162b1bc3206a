//! Request/response shapes of the HTTP providers, checked against a local
//! one-shot server.

use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpListener;
use std::sync::mpsc;
use std::thread;
use std::time::Duration;

use recipe_adapt::contextgen::{GenerationRequest, Generator, HttpGenerator, SamplingParams, Task};
use recipe_adapt::embedding::{EmbeddingProvider, EmbeddingVector, HttpEmbedder};
use recipe_adapt::metrics::{ClassifierProvider, HttpClassifier};
use recipe_adapt::rerank::{score_relevance, HttpReranker, RelevanceScorer};
use recipe_adapt::retrieval::Candidate;
use serde_json::{json, Value};

/// Serve one request with `reply` and hand back the parsed request body.
fn serve_once(reply: Value) -> (String, mpsc::Receiver<Value>) {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let url = format!("http://{}/", listener.local_addr().unwrap());
    let (tx, rx) = mpsc::channel();
    thread::spawn(move || {
        let (stream, _) = listener.accept().unwrap();
        let mut reader = BufReader::new(stream.try_clone().unwrap());
        let mut len = 0;
        loop {
            let mut line = String::new();
            reader.read_line(&mut line).unwrap();
            if line == "\r\n" {
                break;
            }
            if let Some(v) = line.to_ascii_lowercase().strip_prefix("content-length:") {
                len = v.trim().parse().unwrap();
            }
        }
        let mut body = vec![0; len];
        reader.read_exact(&mut body).unwrap();
        tx.send(serde_json::from_slice(&body).unwrap()).unwrap();
        let out = reply.to_string();
        let mut stream = stream;
        write!(
            stream,
            "HTTP/1.1 200 OK\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{out}",
            out.len()
        )
        .unwrap();
    });
    (url, rx)
}

const TIMEOUT: Duration = Duration::from_secs(5);

#[test]
fn embedder_contract() {
    let (url, rx) = serve_once(json!({"vectors": [[1.0, 0.0], [0.0, 1.0]]}));
    let e = HttpEmbedder::new(&url, TIMEOUT).unwrap();
    let v = e.embed_batch(&["a", "b"]).unwrap();
    assert_eq!(v, vec![vec![1.0, 0.0], vec![0.0, 1.0]]);
    assert_eq!(rx.recv().unwrap(), json!({"texts": ["a", "b"]}));
}

#[test]
fn embedder_count_mismatch_is_rejected() {
    let (url, _rx) = serve_once(json!({"vectors": [[1.0]]}));
    assert!(HttpEmbedder::new(&url, TIMEOUT)
        .unwrap()
        .embed_batch(&["a", "b"])
        .is_err());
}

#[test]
fn reranker_contract_and_normalization() {
    let (url, rx) = serve_once(json!({"scores": [2.0, 4.0, 6.0]}));
    let scorer = RelevanceScorer::Http(HttpReranker::new(&url, TIMEOUT).unwrap());
    let cands: Vec<Candidate> = (0..3)
        .map(|i| Candidate {
            recipe_id: format!("r{i}"),
            dense_score: 0.0,
            embedding: EmbeddingVector::new("p", vec![1.0, f64::from(i)]).unwrap(),
        })
        .collect();
    let docs: Vec<String> = ["d0", "d1", "d2"].map(String::from).to_vec();
    let q = EmbeddingVector::new("p", vec![1.0, 0.0]).unwrap();
    let r = score_relevance("tortilla", &q, &cands, &docs, &scorer).unwrap();
    assert_eq!(
        r.scored.iter().map(|s| s.rel).collect::<Vec<_>>(),
        [0.0, 0.5, 1.0]
    );
    assert!(r.fallback_warning.is_none());
    assert_eq!(
        rx.recv().unwrap(),
        json!({"query": "tortilla", "documents": ["d0", "d1", "d2"]})
    );
}

#[test]
fn generator_contract() {
    let (url, rx) = serve_once(json!({"text": "Nombre: X"}));
    let g = HttpGenerator::new(&url, TIMEOUT).unwrap();
    let req = GenerationRequest {
        task: Task::Adapt,
        prompt: "hola".into(),
        params: SamplingParams::default(),
        seed: Some(9),
        generation: 0,
        attempt: 0,
    };
    assert_eq!(g.generate(&req).unwrap(), "Nombre: X");
    assert_eq!(
        rx.recv().unwrap(),
        json!({"prompt": "hola", "temperature": 0.7, "top_k": 40, "top_p": 0.9, "min_p": 0.0, "seed": 9})
    );
}

#[test]
fn generator_omits_absent_seed() {
    let (url, rx) = serve_once(json!({"text": "x"}));
    let g = HttpGenerator::new(&url, TIMEOUT).unwrap();
    let req = GenerationRequest {
        task: Task::CulturalTitle,
        prompt: "p".into(),
        params: SamplingParams::default(),
        seed: None,
        generation: 0,
        attempt: 0,
    };
    g.generate(&req).unwrap();
    assert!(rx.recv().unwrap().get("seed").is_none());
}

#[test]
fn classifier_contract() {
    let (url, rx) = serve_once(json!({"probabilities": [0.25, 0.75]}));
    let c = HttpClassifier::new(&url, TIMEOUT).unwrap();
    let texts = vec!["a".to_string(), "b".to_string()];
    assert_eq!(c.probabilities(&texts, "ESP").unwrap(), [0.25, 0.75]);
    assert_eq!(
        rx.recv().unwrap(),
        json!({"texts": ["a", "b"], "target": "ESP"})
    );
}
