use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use formula_gcl::embed::{
    build_vocab, sample_walks, train_token_embeddings, train_token_table, unigram_distribution, SkipGramConfig,
    SkipGramPair, TokenConfig, Vocabulary,
};
use formula_gcl::formula::{build_graph, parse_formula, EdgeLabel, FormulaSampler, Layout, MathGraph};

fn random_vec(len: usize, scale: f64, rng: &mut impl Rng) -> Vec<f64> {
    (0..len).map(|_| rng.gen_range(-scale..scale)).collect()
}

fn random_pair(rng: &mut impl Rng) -> SkipGramPair {
    let d = rng.gen_range(2..8);
    SkipGramPair {
        token_row: random_vec(d, 1.0, rng),
        bucket_rows: (0..rng.gen_range(0..4)).map(|_| random_vec(d, 1.0, rng)).collect(),
        context: random_vec(d, 1.0, rng),
        negatives: (0..rng.gen_range(1..6)).map(|_| random_vec(d, 1.0, rng)).collect(),
    }
}

/// Every scalar of the pair, addressed by (block, row, column).
fn coordinates(p: &SkipGramPair) -> Vec<(usize, usize, usize)> {
    let d = p.token_row.len();
    let mut out: Vec<_> = (0..d).map(|c| (0, 0, c)).collect();
    out.extend((0..p.bucket_rows.len()).flat_map(|r| (0..d).map(move |c| (1, r, c))));
    out.extend((0..d).map(|c| (2, 0, c)));
    out.extend((0..p.negatives.len()).flat_map(|r| (0..d).map(move |c| (3, r, c))));
    out
}

fn slot(p: &mut SkipGramPair, (block, r, c): (usize, usize, usize)) -> &mut f64 {
    match block {
        0 => &mut p.token_row[c],
        1 => &mut p.bucket_rows[r][c],
        2 => &mut p.context[c],
        _ => &mut p.negatives[r][c],
    }
}

fn grad_at(p: &SkipGramPair, (block, r, c): (usize, usize, usize)) -> f64 {
    let g = p.gradients();
    match block {
        0 => g.token_row[c],
        1 => g.bucket_rows[r][c],
        2 => g.context[c],
        _ => g.negatives[r][c],
    }
}

#[test]
fn pair_gradient_matches_central_differences() {
    let h = 1e-5;
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let pair = random_pair(&mut rng);
        for at in coordinates(&pair) {
            let mut plus = pair.clone();
            *slot(&mut plus, at) += h;
            let mut minus = pair.clone();
            *slot(&mut minus, at) -= h;
            let numeric = (plus.loss() - minus.loss()) / (2.0 * h);
            let analytic = grad_at(&pair, at);
            let rel = (numeric - analytic).abs() / numeric.abs().max(analytic.abs()).max(1e-6);
            worst = worst.max(rel);
        }
    }
    assert!(worst < 1e-4, "worst relative error {worst:e}");
}

fn synthetic_graphs(n: usize, seed: u64) -> Vec<MathGraph> {
    let sampler = FormulaSampler::default();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| build_graph(&parse_formula(&sampler.sample(&mut rng)).unwrap(), Layout::Slt)).collect()
}

#[test]
fn token_loss_decreases_over_ten_epochs() {
    let graphs = synthetic_graphs(200, 5);
    for seed in 0..3 {
        let cfg = TokenConfig {
            walks_per_node: 2,
            skipgram: SkipGramConfig { dim: 32, epochs: 10, ..Default::default() },
            ..Default::default()
        };
        let (table, history) = train_token_table(&graphs, &cfg, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        assert_eq!(history.len(), 10);
        assert!(history[9] < history[0], "seed {seed}: {history:?}");
        assert!(table.is_finite());
    }
}

#[test]
fn co_occurring_tokens_end_up_closer() {
    // `a` and `b` share every context; `z` never appears next to them
    let graphs: Vec<MathGraph> = ["a+c", "b+c", "a+d", "b+d", "z-q", "z-w"]
        .iter()
        .cycle()
        .take(120)
        .map(|t| build_graph(&parse_formula(t).unwrap(), Layout::Slt))
        .collect();
    let cfg = TokenConfig {
        walks_per_node: 4,
        skipgram: SkipGramConfig { dim: 16, epochs: 20, n_min: 9, n_max: 9, ..Default::default() },
        ..Default::default()
    };
    let (table, _) = train_token_table(&graphs, &cfg, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
    let cos = |x: &str, y: &str| {
        let (u, v) = (table.token_vector(x), table.token_vector(y));
        let dot: f64 = u.iter().zip(&v).map(|(a, b)| a * b).sum();
        dot / (u.iter().map(|a| a * a).sum::<f64>().sqrt() * v.iter().map(|a| a * a).sum::<f64>().sqrt())
    };
    assert!(cos("V!a", "V!b") > cos("V!a", "V!z") + 0.1, "{} vs {}", cos("V!a", "V!b"), cos("V!a", "V!z"));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn walks_follow_real_edges(seed in any::<u64>(), per_node in 1usize..4, len in 1usize..8) {
        let g = synthetic_graphs(1, seed).pop().unwrap();
        let walks = sample_walks(&g, per_node, len, &mut ChaCha8Rng::seed_from_u64(seed));
        prop_assert_eq!(walks.len(), g.node_count() * per_node);
        for w in &walks {
            prop_assert!(w.node_visits() <= len);
            prop_assert_eq!(w.tokens.len() % 2, 1);
            for step in w.tokens.windows(3).step_by(2) {
                let label = EdgeLabel::parse(&step[1]).unwrap();
                let real = g.edges.iter().any(|e| {
                    g.nodes[e.src].label == step[0] && e.label == label && g.nodes[e.dst].label == step[2]
                });
                prop_assert!(real, "no edge for {:?}", step);
            }
        }
    }

    #[test]
    fn unigram_sums_to_one_and_follows_token_order(
        counts in prop::collection::vec(1u64..1000, 1..20),
        power in 0.0f64..1.5,
        rotate in 0usize..20,
    ) {
        let pairs: Vec<(String, u64)> = counts.iter().enumerate().map(|(i, &c)| (format!("t{i}"), c)).collect();
        let vocab = Vocabulary::from_counts(pairs.clone());
        let p = unigram_distribution(&vocab, power);
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let mut shuffled = pairs;
        let k = rotate % shuffled.len();
        shuffled.rotate_left(k);
        let other = Vocabulary::from_counts(shuffled);
        let q = unigram_distribution(&other, power);
        for (id, t) in vocab.tokens().iter().enumerate() {
            prop_assert!((p[id] - q[other.id(t).unwrap()]).abs() < 1e-15);
        }
    }

    #[test]
    fn token_vectors_are_total(token in "\\PC{0,12}") {
        let graphs = synthetic_graphs(5, 1);
        let walks: Vec<_> =
            graphs.iter().flat_map(|g| sample_walks(g, 1, 3, &mut ChaCha8Rng::seed_from_u64(0))).collect();
        let vocab = build_vocab(&walks, 1).unwrap();
        let cfg = SkipGramConfig { dim: 8, epochs: 1, buckets: 64, ..Default::default() };
        let (table, _) = train_token_embeddings(&walks, &vocab, &cfg, &mut ChaCha8Rng::seed_from_u64(0));
        let v = table.token_vector(&token);
        prop_assert_eq!(v.len(), 8);
        prop_assert!(v.iter().all(|x| x.is_finite()));
        prop_assert_eq!(v, table.token_vector(&token));
    }
}
