use std::collections::HashMap;

use hopwalk::embedding::EmbeddingMatrix;
use hopwalk::graph::{GraphBuilder, HeteroGraph};
use hopwalk::linkpred::{
    auc, evaluate, logistic_loss_and_gradient, sample_negative_pairs, train_logistic_regression, train_naive_bayes,
    Classifier, ClassifierKind, EvalConfig, Features, LabeledPair, LabeledPairSet, LogisticConfig, NB_VARIANCE_FLOOR,
};
use hopwalk::NodeId;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn brute_auc(scores: &[f64], labels: &[u8]) -> f64 {
    let (mut wins, mut pairs) = (0.0, 0.0);
    for i in 0..scores.len() {
        for j in 0..scores.len() {
            if labels[i] == 1 && labels[j] == 0 {
                pairs += 1.0;
                if scores[i] > scores[j] {
                    wins += 1.0;
                } else if scores[i] == scores[j] {
                    wins += 0.5;
                }
            }
        }
    }
    wins / pairs
}

fn random_instance(rng: &mut ChaCha8Rng) -> (Vec<f64>, Vec<u8>) {
    let n = rng.gen_range(2..80);
    let levels = rng.gen_range(1..20);
    let mut labels: Vec<u8> = (0..n).map(|_| rng.gen_range(0..=1)).collect();
    labels[0] = 1;
    labels[n - 1] = 0;
    let scores = (0..n).map(|_| rng.gen_range(0..levels) as f64 / 3.0).collect();
    (scores, labels)
}

#[test]
fn auc_equals_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..1000 {
        let (s, l) = random_instance(&mut rng);
        assert_eq!(auc(&s, &l).unwrap(), brute_auc(&s, &l));
    }
}

#[test]
fn auc_ignores_monotone_transforms() {
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    for _ in 0..200 {
        let (s, l) = random_instance(&mut rng);
        let t: Vec<f64> = s.iter().map(|x| (2.0 * x).exp() - 7.0).collect();
        assert_eq!(auc(&s, &l).unwrap(), auc(&t, &l).unwrap());
        let flipped: Vec<f64> = s.iter().map(|x| -x).collect();
        assert!((auc(&flipped, &l).unwrap() - (1.0 - auc(&s, &l).unwrap())).abs() < 1e-12);
    }
}

proptest! {
    #[test]
    fn logistic_gradient_matches_finite_differences(seed in any::<u64>(), l2 in 0.0f64..0.1) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (rows, cols) = (rng.gen_range(2..20), rng.gen_range(1..6));
        let x = Features::from_rows(
            &(0..rows).map(|_| (0..cols).map(|_| rng.gen_range(-2.0..2.0)).collect()).collect::<Vec<_>>(),
        );
        let labels: Vec<u8> = (0..rows).map(|_| rng.gen_range(0..=1)).collect();
        let mut w: Vec<f64> = (0..cols).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let b = rng.gen_range(-1.0..1.0);
        let (_, dw, db) = logistic_loss_and_gradient(&w, b, &x, &labels, l2);
        let h = 1e-6;
        for j in 0..cols {
            let orig = w[j];
            w[j] = orig + h;
            let up = logistic_loss_and_gradient(&w, b, &x, &labels, l2).0;
            w[j] = orig - h;
            let down = logistic_loss_and_gradient(&w, b, &x, &labels, l2).0;
            w[j] = orig;
            prop_assert!(((up - down) / (2.0 * h) - dw[j]).abs() < 1e-6);
        }
        let up = logistic_loss_and_gradient(&w, b + h, &x, &labels, l2).0;
        let down = logistic_loss_and_gradient(&w, b - h, &x, &labels, l2).0;
        prop_assert!(((up - down) / (2.0 * h) - db).abs() < 1e-6);
    }
}

#[test]
fn naive_bayes_matches_hand_computation() {
    // positives (1,2) and (3,6); the lone negative (0,5) has zero variance
    let x = Features::from_rows(&[vec![1.0, 2.0], vec![3.0, 6.0], vec![0.0, 5.0]]);
    let nb = train_naive_bayes(&x, &[1, 1, 0]).unwrap();
    assert_eq!(nb.means[1], vec![2.0, 4.0]);
    assert_eq!(nb.variances[1], vec![1.0, 4.0]);
    assert_eq!(nb.variances[0], vec![NB_VARIANCE_FLOOR, NB_VARIANCE_FLOOR]);
    let tau = 2.0 * std::f64::consts::PI;
    let pos = -0.5 * (tau.ln() + 4.0) - 0.5 * ((4.0 * tau).ln() + 0.25) + (2.0f64 / 3.0).ln();
    let neg = -(tau * 1e-9).ln() + (1.0f64 / 3.0).ln();
    let s = nb.score(&[0.0, 5.0]);
    assert!((s - (pos - neg)).abs() < 1e-9, "{s} vs {}", pos - neg);
}

#[test]
fn logistic_scores_are_logits() {
    let x = Features::from_rows(&[vec![-1.0], vec![-0.5], vec![0.5], vec![1.0]]);
    let lr = train_logistic_regression(&x, &[0, 0, 1, 1], &LogisticConfig::default()).unwrap();
    let s = lr.score(&[0.8]);
    assert!((lr.predict_proba(&[0.8]) - 1.0 / (1.0 + (-s).exp())).abs() < 1e-12);
    assert!(s > 0.0 && lr.score(&[-0.8]) < 0.0);
}

fn pool_graph(n: usize) -> HeteroGraph {
    let mut b = GraphBuilder::new();
    for i in 0..n {
        b.add_edge((&format!("a{i}"), "author"), (&format!("p{i}"), "paper")).unwrap();
    }
    b.finish()
}

#[test]
fn negatives_are_uniform_over_valid_pairs() {
    let g = pool_graph(6);
    let a = |i: usize| g.lookup(&format!("a{i}")).unwrap();
    let positives = vec![(a(0), a(1)), (a(2), a(3)), (a(4), a(5))];
    let mut counts: HashMap<(NodeId, NodeId), usize> = HashMap::new();
    let draws = 400_000;
    for seed in 0..draws {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for p in sample_negative_pairs(&positives, &g, 1, &mut rng).unwrap() {
            *counts.entry(p).or_default() += 1;
        }
    }
    // 15 author pairs minus the 3 positives
    assert_eq!(counts.len(), 12);
    let expected = draws as f64 / 12.0;
    for (pair, c) in counts {
        assert!(!positives.contains(&pair));
        assert!((c as f64 - expected).abs() <= 0.02 * expected, "{pair:?}: {c}");
    }
}

/// Embedding with one row per author and a pair set over those authors.
fn fixture(n_pairs: usize, dim: usize, separable: bool, seed: u64) -> (EmbeddingMatrix, LabeledPairSet) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = 2 * n_pairs;
    let keys: Vec<String> = (0..n).map(|i| format!("a{i}")).collect();
    let mut data = Vec::with_capacity(n * dim);
    for i in 0..n {
        for d in 0..dim {
            let v = if separable && d == 0 {
                // first half of the nodes share a strong coordinate
                if i < n_pairs { 2.0 } else { 0.1 }
            } else {
                rng.gen_range(-1.0..1.0)
            };
            data.push(v);
        }
    }
    let emb = EmbeddingMatrix::from_rows(keys.clone(), dim, data).unwrap();
    let mut pairs = Vec::new();
    for i in 0..n_pairs / 2 {
        pairs.push(LabeledPair {
            u: keys[2 * i].clone(),
            v: keys[2 * i + 1].clone(),
            label: 1,
        });
        pairs.push(LabeledPair {
            u: keys[n_pairs + 2 * i].clone(),
            v: keys[n_pairs + 2 * i + 1].clone(),
            label: 0,
        });
    }
    if !separable {
        for (i, p) in pairs.iter_mut().enumerate() {
            p.label = (i % 2) as u8;
        }
    }
    (emb, LabeledPairSet::new(pairs).unwrap())
}

#[test]
fn separable_pairs_score_perfectly() {
    let (emb, pairs) = fixture(200, 4, true, 1);
    for r in evaluate(&emb, &pairs, &EvalConfig::default(), 1).unwrap() {
        assert_eq!(r.mean_auc, 1.0, "{:?}", r.classifier);
        assert_eq!(r.std_auc, 0.0);
    }
}

#[test]
fn noise_scores_near_chance() {
    let (emb, pairs) = fixture(2000, 8, false, 2);
    for r in evaluate(&emb, &pairs, &EvalConfig::default(), 1).unwrap() {
        assert!((r.mean_auc - 0.5).abs() <= 0.05, "{:?}: {}", r.classifier, r.mean_auc);
    }
}

#[test]
fn evaluation_is_reproducible_and_order_free() {
    let (emb, pairs) = fixture(300, 6, false, 3);
    let cfg = EvalConfig {
        repeats: 4,
        ..EvalConfig::default()
    };
    let a = evaluate(&emb, &pairs, &cfg, 1).unwrap();
    assert_eq!(a, evaluate(&emb, &pairs, &cfg, 1).unwrap());
    assert_eq!(a, evaluate(&emb, &pairs, &cfg, 3).unwrap());

    let swapped: Vec<LabeledPair> = pairs
        .pairs()
        .iter()
        .map(|p| LabeledPair {
            u: p.v.clone(),
            v: p.u.clone(),
            label: p.label,
        })
        .collect();
    let b = evaluate(&emb, &LabeledPairSet::new(swapped).unwrap(), &cfg, 1).unwrap();
    assert_eq!(a, b);

    assert_eq!(a.len(), 2);
    assert_eq!(a[0].classifier, ClassifierKind::LogisticRegression);
    assert_eq!(a[1].classifier, ClassifierKind::NaiveBayes);
    for r in &a {
        assert_eq!(r.aucs.len(), 4);
        let mean = r.aucs.iter().sum::<f64>() / 4.0;
        let var = r.aucs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / 3.0;
        assert!((r.mean_auc - mean).abs() < 1e-12);
        assert!((r.std_auc - var.sqrt()).abs() < 1e-12);
    }
}
