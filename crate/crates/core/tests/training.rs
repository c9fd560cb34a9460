//! Training-run checks of the contrastive encoder.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use formula_gcl::augment::{apply_substitution, node_drop, sample_substitution, AugmentConfig, Strategy};
use formula_gcl::embed::{featurize, train_token_table, EmbeddingTable, SkipGramConfig, TokenConfig};
use formula_gcl::encoder::{encode, loss_gradients, train_gcl, EncoderParams, TrainConfig};
use formula_gcl::formula::{build_graph, parse_formula, FormulaSampler, Layout, MathGraph};
use formula_gcl::linalg::dot;

/// Distinct formulas of at most eight variables, so renaming always has room.
fn corpus(n: usize, seed: u64, layout: Layout) -> Vec<MathGraph> {
    let sampler = FormulaSampler::default();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut seen = std::collections::HashSet::new();
    let mut out = Vec::new();
    while out.len() < n {
        let text = sampler.sample(&mut rng);
        let g = build_graph(&parse_formula(&text).unwrap(), layout);
        let vars: std::collections::BTreeSet<&str> =
            g.nodes.iter().filter(|n| n.label.starts_with("V!")).map(|n| n.lexeme()).collect();
        let nums = g.nodes.iter().filter(|n| n.label.starts_with("N!")).count();
        if (1..=8).contains(&vars.len()) && nums <= 3 && seen.insert(text) {
            out.push(g);
        }
    }
    out
}

fn table(graphs: &[MathGraph], seed: u64) -> EmbeddingTable {
    let cfg = TokenConfig {
        walks_per_node: 4,
        skipgram: SkipGramConfig { dim: 32, ..Default::default() },
        ..Default::default()
    };
    train_token_table(graphs, &cfg, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap().0
}

#[test]
fn identity_augmentation_lowers_the_loss() {
    let graphs = corpus(64, 3, Layout::Slt);
    let table = table(&graphs, 3);
    for seed in 0..3 {
        let cfg = TrainConfig {
            epochs: 50,
            batch_size: 16,
            hidden: vec![32, 32],
            augment: AugmentConfig::with_strategy(Strategy::Identity),
            ..Default::default()
        };
        let (params, history) = train_gcl(&graphs, &table, &cfg, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        assert_eq!(history.len(), 50);
        assert!(history[49] < history[0], "seed {seed}: {} -> {}", history[0], history[49]);
        assert!(params.is_finite());
    }
}

#[test]
fn varsub_training_pulls_renamings_together() {
    let graphs = corpus(600, 8, Layout::Slt);
    let table = table(&graphs, 8);
    let edge_dim = TrainConfig::default().edge_dim;
    for seed in 0..3 {
        let cfg = TrainConfig { batch_size: 32, ..Default::default() };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (params, _) = train_gcl(&graphs, &table, &cfg, &mut rng).unwrap();
        let embed = |g: &MathGraph| encode(&params, &featurize(g, &table, edge_dim)).unwrap();
        let (mut renamed, mut unrelated) = (0.0, 0.0);
        for i in 0..100 {
            let f = &graphs[i];
            let m = sample_substitution(f, &cfg.augment, &mut rng).unwrap();
            let j = (i + 1 + rng.gen_range(0..graphs.len() - 1)) % graphs.len();
            let e = embed(f);
            renamed += dot(&e, &embed(&apply_substitution(f, &m).unwrap()));
            unrelated += dot(&e, &embed(&graphs[j]));
        }
        let margin = (renamed - unrelated) / 100.0;
        assert!(margin >= 0.1, "seed {seed}: margin {margin:.3}");
    }
}

#[test]
fn gradients_stay_finite_on_forests() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let graphs = corpus(8, 4, Layout::Opt);
    let table = table(&graphs, 4);
    let a: Vec<_> = graphs.iter().map(|g| featurize(g, &table, 4)).collect();
    let b: Vec<_> = graphs.iter().map(|g| featurize(&node_drop(g, 0.6, &mut rng), &table, 4)).collect();
    assert!(b.iter().any(|fg| fg.graph.edge_count() + 1 < fg.graph.node_count()), "no forest produced");
    let params = EncoderParams::initialize(&[32, 8, 8], 4, &mut rng);
    let (loss, grads) = loss_gradients(&params, &a, &b, 0.5).unwrap();
    assert!(loss.is_finite() && grads.is_finite());
}
