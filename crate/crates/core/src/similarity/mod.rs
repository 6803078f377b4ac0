//! CodeBLEU: n-gram, keyword-weighted n-gram, syntax-subtree and data-flow match.
//!
//! The original program is always the reference and the refactored program the
//! hypothesis.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::source::{
    extract_def_use, normalized_pairs, parse, tokenize, unit_subtree_multiset, NormalizedPair, ParsedUnit,
    SourceError, SourceUnit, TokenClass, TokenStream,
};

pub const N_MAX: usize = 4;
pub const KEYWORD_WEIGHT: f64 = 5.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimilarityError {
    #[error("weights must be non-negative and sum to 1, got {0:?}")]
    InvalidWeights([f64; 4]),
    #[error("reference does not parse: {0}")]
    Reference(#[from] SourceError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CodeBleuWeights {
    pub w_ngram: f64,
    pub w_weighted: f64,
    pub w_syntax: f64,
    pub w_dataflow: f64,
}

impl Default for CodeBleuWeights {
    fn default() -> Self {
        CodeBleuWeights { w_ngram: 0.25, w_weighted: 0.25, w_syntax: 0.25, w_dataflow: 0.25 }
    }
}

impl CodeBleuWeights {
    pub fn new(w_ngram: f64, w_weighted: f64, w_syntax: f64, w_dataflow: f64) -> Result<Self, SimilarityError> {
        let w = CodeBleuWeights { w_ngram, w_weighted, w_syntax, w_dataflow };
        w.validate()?;
        Ok(w)
    }

    pub fn validate(&self) -> Result<(), SimilarityError> {
        let arr = [self.w_ngram, self.w_weighted, self.w_syntax, self.w_dataflow];
        let sum: f64 = arr.iter().sum();
        if arr.iter().any(|w| !(*w >= 0.0)) || (sum - 1.0).abs() > 1e-9 {
            return Err(SimilarityError::InvalidWeights(arr));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Components {
    pub ngram: f64,
    pub weighted_ngram: f64,
    pub syntax: f64,
    pub dataflow: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct SimilarityScore {
    pub total: f64,
    pub components: Components,
}

fn ngrams<'a, 'b>(tokens: &'b [&'a str], n: usize) -> HashMap<&'b [&'a str], usize> {
    let mut out = HashMap::new();
    if tokens.len() >= n {
        for w in tokens.windows(n) {
            *out.entry(w).or_default() += 1;
        }
    }
    out
}

fn bleu(reference: &[&str], hypothesis: &[&str], n_max: usize, unigram_weight: &dyn Fn(&str) -> f64) -> f64 {
    if hypothesis.is_empty() || n_max == 0 {
        return 0.0;
    }
    let mut log_sum = 0.0;
    for n in 1..=n_max {
        let hyp = ngrams(hypothesis, n);
        let refs = ngrams(reference, n);
        let (mut matched, mut total) = (0.0, 0.0);
        for (gram, count) in &hyp {
            let w = if n == 1 { unigram_weight(gram[0]) } else { 1.0 };
            let clipped = (*count).min(refs.get(gram).copied().unwrap_or(0));
            matched += w * clipped as f64;
            total += w * *count as f64;
        }
        let p = if matched > 0.0 {
            matched / total
        } else if n == 1 {
            return 0.0;
        } else {
            (matched + 1.0) / (total + 1.0)
        };
        log_sum += p.ln() / n_max as f64;
    }
    let (r, c) = (reference.len() as f64, hypothesis.len() as f64);
    let bp = if c > r { 1.0 } else { (1.0 - r / c).exp() };
    (bp * log_sum.exp()).clamp(0.0, 1.0)
}

/// Modified n-gram precision geometric mean with brevity penalty.
pub fn ngram_match(reference: &TokenStream, hypothesis: &TokenStream, n_max: usize) -> f64 {
    let (r, h): (Vec<&str>, Vec<&str>) = (reference.lexemes().collect(), hypothesis.lexemes().collect());
    bleu(&r, &h, n_max, &|_| 1.0)
}

/// As [`ngram_match`], with unigram counts of keyword tokens scaled by `keyword_weight`.
pub fn weighted_ngram_match(reference: &TokenStream, hypothesis: &TokenStream, keyword_weight: f64) -> f64 {
    let keywords: std::collections::HashSet<&str> = reference
        .tokens
        .iter()
        .chain(hypothesis.tokens.iter())
        .filter(|t| t.class == TokenClass::Keyword)
        .map(|t| t.lexeme.as_str())
        .collect();
    let weight = |tok: &str| if keywords.contains(tok) { keyword_weight } else { 1.0 };
    let (r, h): (Vec<&str>, Vec<&str>) = (reference.lexemes().collect(), hypothesis.lexemes().collect());
    bleu(&r, &h, N_MAX, &weight)
}

/// Share of the reference's subtree fingerprints found in the hypothesis.
/// `None` stands for an unparseable hypothesis.
pub fn syntax_match(reference: &ParsedUnit, hypothesis: Option<&ParsedUnit>) -> f64 {
    let Some(hyp) = hypothesis else { return 0.0 };
    let r = unit_subtree_multiset(reference);
    let h = unit_subtree_multiset(hyp);
    let total: usize = r.values().sum();
    if total == 0 {
        return 1.0;
    }
    let common: usize = r.iter().map(|(k, n)| (*n).min(h.get(k).copied().unwrap_or(0))).sum();
    common as f64 / total as f64
}

fn pair_multiset(unit: &ParsedUnit) -> BTreeMap<NormalizedPair, usize> {
    let mut out = BTreeMap::new();
    for f in &unit.functions {
        for p in normalized_pairs(&extract_def_use(f)) {
            *out.entry(p).or_default() += 1;
        }
    }
    out
}

/// Share of the reference's normalized def-use pairs found in the hypothesis.
pub fn dataflow_match(reference: &ParsedUnit, hypothesis: Option<&ParsedUnit>) -> f64 {
    let r = pair_multiset(reference);
    let total: usize = r.values().sum();
    if total == 0 {
        return 1.0;
    }
    let Some(hyp) = hypothesis else { return 0.0 };
    let h = pair_multiset(hyp);
    let common: usize = r.iter().map(|(k, n)| (*n).min(h.get(k).copied().unwrap_or(0))).sum();
    common as f64 / total as f64
}

/// Scores `refactored` against `original`. Only an unparseable original is an error;
/// a bad hypothesis just scores low, and a blank one scores 0 everywhere.
pub fn codebleu(
    original: &SourceUnit,
    refactored: &SourceUnit,
    weights: &CodeBleuWeights,
) -> Result<SimilarityScore, SimilarityError> {
    weights.validate()?;
    let ref_parsed = parse(original)?;
    if refactored.is_blank() {
        return Ok(SimilarityScore::default());
    }
    let ref_tokens = tokenize(original)?;
    let components = match tokenize(refactored) {
        Err(_) => Components { dataflow: dataflow_match(&ref_parsed, None), ..Components::default() },
        Ok(hyp_tokens) => {
            let hyp_parsed = parse(refactored).ok();
            Components {
                ngram: ngram_match(&ref_tokens, &hyp_tokens, N_MAX),
                weighted_ngram: weighted_ngram_match(&ref_tokens, &hyp_tokens, KEYWORD_WEIGHT),
                syntax: syntax_match(&ref_parsed, hyp_parsed.as_ref()),
                dataflow: dataflow_match(&ref_parsed, hyp_parsed.as_ref()),
            }
        }
    };
    Ok(SimilarityScore { total: combine(&components, weights), components })
}

pub fn combine(c: &Components, w: &CodeBleuWeights) -> f64 {
    w.w_ngram * c.ngram + w.w_weighted * c.weighted_ngram + w.w_syntax * c.syntax + w.w_dataflow * c.dataflow
}
