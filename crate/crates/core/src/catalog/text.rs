//! Tokenization and the hashed term-frequency embedding.

use crate::fnv1a64;

pub const EMBEDDING_DIM: usize = 256;

const STOPWORDS: &[&str] = &[
    "a", "about", "after", "all", "also", "an", "and", "any", "are", "as", "at", "be", "been", "but", "by", "can",
    "do", "does", "for", "from", "had", "has", "have", "how", "if", "in", "into", "is", "it", "its", "more", "most",
    "no", "not", "of", "on", "or", "other", "our", "over", "so", "such", "than", "that", "the", "their", "them",
    "then", "there", "these", "they", "this", "those", "through", "to", "under", "up", "was", "we", "were", "what",
    "when", "which", "while", "who", "will", "with", "within", "would",
];

pub fn is_stopword(word: &str) -> bool {
    STOPWORDS.binary_search(&word).is_ok()
}

/// Lowercased alphanumeric words, stopwords included.
pub fn words(text: &str) -> impl Iterator<Item = String> + '_ {
    text.split(|c: char| !c.is_alphanumeric()).filter(|w| !w.is_empty()).map(str::to_lowercase)
}

/// Lowercased words with stopwords removed.
pub fn tokenize(text: &str) -> Vec<String> {
    words(text).filter(|w| !is_stopword(w)).collect()
}

/// Feature-hashed unigram and bigram counts over [`tokenize`]d text,
/// L2-normalized. Each term lands in bucket `h % 256` of its FNV-1a hash,
/// negated when the hash's top bit is set. Text without content words gives
/// the zero vector.
pub fn embed(text: &str) -> Vec<f64> {
    let tokens = tokenize(text);
    let mut v = vec![0.0f64; EMBEDDING_DIM];
    let mut add = |term: &str| {
        let h = fnv1a64(term.as_bytes());
        let sign = if h >> 63 == 1 { -1.0 } else { 1.0 };
        v[(h % EMBEDDING_DIM as u64) as usize] += sign;
    };
    for t in &tokens {
        add(t);
    }
    for pair in tokens.windows(2) {
        add(&format!("{} {}", pair[0], pair[1]));
    }
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        v.iter_mut().for_each(|x| *x /= norm);
    }
    v
}

pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        (dot / (na * nb)).clamp(-1.0, 1.0)
    }
}
