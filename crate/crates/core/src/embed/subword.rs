/// 32-bit FNV-1a over raw bytes.
pub fn fnv1a32(bytes: &[u8]) -> u32 {
    let mut h: u32 = 0x811c_9dc5;
    for &b in bytes {
        h ^= b as u32;
        h = h.wrapping_mul(0x0100_0193);
    }
    h
}

/// Character n-grams of `<token>` for `n_min ..= n_max`. The whole bracketed
/// token is not an n-gram; its own row in the table plays that role.
pub fn ngrams(token: &str, n_min: usize, n_max: usize) -> Vec<String> {
    let chars: Vec<char> = format!("<{token}>").chars().collect();
    let mut out = Vec::new();
    for n in n_min.max(1)..=n_max {
        if n >= chars.len() {
            break;
        }
        for w in chars.windows(n) {
            out.push(w.iter().collect());
        }
    }
    out
}

/// Bucket indices of the token's n-grams (FNV-1a modulo `buckets`).
pub fn ngram_buckets(token: &str, n_min: usize, n_max: usize, buckets: usize) -> Vec<usize> {
    if buckets == 0 {
        return Vec::new();
    }
    ngrams(token, n_min, n_max)
        .iter()
        .map(|g| (fnv1a32(g.as_bytes()) as usize) % buckets)
        .collect()
}
