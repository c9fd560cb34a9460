use std::collections::HashMap;

use super::walks::Walk;
use super::EmbedError;

/// Token ↔ id mapping with occurrence counts. Ids are assigned by descending
/// count, ties broken lexicographically.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    tokens: Vec<String>,
    counts: Vec<u64>,
    index: HashMap<String, usize>,
    total: u64,
}

impl Vocabulary {
    /// Builds a vocabulary from explicit `(token, count)` pairs.
    pub fn from_counts(pairs: impl IntoIterator<Item = (String, u64)>) -> Self {
        let mut pairs: Vec<(String, u64)> = pairs.into_iter().collect();
        pairs.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        let index = pairs.iter().enumerate().map(|(i, (t, _))| (t.clone(), i)).collect();
        let total = pairs.iter().map(|(_, c)| c).sum();
        let (tokens, counts) = pairs.into_iter().unzip();
        Vocabulary { tokens, counts, index, total }
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn id(&self, token: &str) -> Option<usize> {
        self.index.get(token).copied()
    }

    pub fn token(&self, id: usize) -> &str {
        &self.tokens[id]
    }

    pub fn count(&self, id: usize) -> u64 {
        self.counts[id]
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.total
    }
}

pub fn build_vocab(walks: &[Walk], min_count: u64) -> Result<Vocabulary, EmbedError> {
    assert!(min_count >= 1, "min_count must be at least 1");
    let mut counts: HashMap<&str, u64> = HashMap::new();
    for w in walks {
        for t in &w.tokens {
            *counts.entry(t.as_str()).or_default() += 1;
        }
    }
    let vocab = Vocabulary::from_counts(
        counts.into_iter().filter(|&(_, c)| c >= min_count).map(|(t, c)| (t.to_string(), c)),
    );
    if vocab.is_empty() {
        return Err(EmbedError::EmptyVocabulary);
    }
    Ok(vocab)
}

/// Negative-sampling distribution `count^power / Σ count^power`, indexed by id.
pub fn unigram_distribution(vocab: &Vocabulary, power: f64) -> Vec<f64> {
    assert!(!vocab.is_empty(), "empty vocabulary");
    let weights: Vec<f64> = vocab.counts.iter().map(|&c| (c as f64).powf(power)).collect();
    let z: f64 = weights.iter().sum();
    weights.into_iter().map(|w| w / z).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn walk(tokens: &[&str]) -> Walk {
        Walk { tokens: tokens.iter().map(|s| s.to_string()).collect() }
    }

    #[test]
    fn single_walk_vocab() {
        let v = build_vocab(&[walk(&["V!x", "NEXT", "V!y"])], 1).unwrap();
        assert_eq!(v.len(), 3);
        assert_eq!(v.total(), 3);
        assert!(v.id("NEXT").is_some());
    }

    #[test]
    fn min_count_filters_everything() {
        assert!(matches!(
            build_vocab(&[walk(&["V!x", "NEXT", "V!y"])], 2),
            Err(EmbedError::EmptyVocabulary)
        ));
    }

    #[test]
    fn ties_break_lexicographically() {
        let v = Vocabulary::from_counts([("B".to_string(), 5), ("A".to_string(), 5), ("C".to_string(), 9)]);
        assert_eq!(v.tokens(), ["C", "A", "B"]);
        assert!(v.id("A").unwrap() < v.id("B").unwrap());
    }

    #[test]
    fn unigram_hand_values() {
        let v = Vocabulary::from_counts([("a".to_string(), 1), ("b".to_string(), 3)]);
        let p = unigram_distribution(&v, 0.75);
        let pa = p[v.id("a").unwrap()];
        let pb = p[v.id("b").unwrap()];
        // 3^0.75 = 2.2795070569547775
        assert!((pa - 1.0 / (1.0 + 2.279_507_056_954_777_5)).abs() < 1e-12);
        assert!((pa - 0.3049).abs() < 5e-5);
        assert!((pb - 0.6951).abs() < 5e-5);
    }

    #[test]
    fn unigram_edge_cases() {
        let single = Vocabulary::from_counts([("a".to_string(), 7)]);
        assert_eq!(unigram_distribution(&single, 0.75), vec![1.0]);
        let v = Vocabulary::from_counts([("a".to_string(), 1), ("b".to_string(), 30), ("c".to_string(), 4)]);
        let p = unigram_distribution(&v, 0.0);
        assert!(p.iter().all(|&x| (x - 1.0 / 3.0).abs() < 1e-15));
    }
}
