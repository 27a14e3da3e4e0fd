//! Character-level n-gram language model with add-1 smoothing.
//!
//! Perplexity under this model scores how far a prompt sits from the
//! training distribution; outlier prompts (high perplexity) are the input
//! filter's block signal. Character level keeps the model free of tokenizer
//! dependencies and small enough to check against closed-form hand
//! computations.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

/// A model symbol: a start-of-text pad, the out-of-vocabulary stand-in, or
/// an observed character.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Sym {
    Boundary,
    Oov,
    Char(char),
}

#[derive(Debug, Clone, PartialEq)]
pub struct NgramModel {
    n: usize,
    counts: BTreeMap<(Vec<Sym>, Sym), u64>,
    context_totals: BTreeMap<Vec<Sym>, u64>,
    vocabulary: BTreeSet<Sym>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PerplexityError {
    #[error("perplexity is undefined for empty text")]
    EmptyText,
}

/// Trains on every length-n character window of the corpus; windows at the
/// start are padded with the boundary symbol. The vocabulary is the set of
/// observed characters plus OOV, so an empty corpus yields the degenerate
/// one-symbol model.
pub fn train_ngram(corpus: &str, n: usize) -> NgramModel {
    assert!(n >= 1, "n-gram order must be at least 1");
    let chars: Vec<char> = corpus.chars().collect();
    let mut model = NgramModel {
        n,
        counts: BTreeMap::new(),
        context_totals: BTreeMap::new(),
        vocabulary: BTreeSet::from([Sym::Oov]),
    };
    for (i, &c) in chars.iter().enumerate() {
        model.vocabulary.insert(Sym::Char(c));
        let context = context_at(&chars, i, n);
        *model.counts.entry((context.clone(), Sym::Char(c))).or_insert(0) += 1;
        *model.context_totals.entry(context).or_insert(0) += 1;
    }
    model
}

fn context_at(chars: &[char], i: usize, n: usize) -> Vec<Sym> {
    let mut context = Vec::with_capacity(n - 1);
    for back in (1..n).rev() {
        context.push(match i.checked_sub(back) {
            Some(j) => Sym::Char(chars[j]),
            None => Sym::Boundary,
        });
    }
    context
}

impl NgramModel {
    pub fn order(&self) -> usize {
        self.n
    }

    pub fn vocabulary_size(&self) -> usize {
        self.vocabulary.len()
    }

    pub fn context_total(&self, context: &[Sym]) -> u64 {
        self.context_totals.get(context).copied().unwrap_or(0)
    }

    pub fn count(&self, context: &[Sym], sym: Sym) -> u64 {
        self.counts.get(&(context.to_vec(), sym)).copied().unwrap_or(0)
    }

    /// Maps a character to its model symbol: itself if observed in
    /// training, OOV otherwise.
    pub fn map_char(&self, c: char) -> Sym {
        if self.vocabulary.contains(&Sym::Char(c)) {
            Sym::Char(c)
        } else {
            Sym::Oov
        }
    }

    /// Add-1 smoothed probability of `sym` after `context`.
    pub fn probability(&self, context: &[Sym], sym: Sym) -> f64 {
        let count = self.count(context, sym);
        let total = self.context_total(context);
        (count as f64 + 1.0) / (total as f64 + self.vocabulary.len() as f64)
    }
}

/// `exp(-(1/N) * sum ln p(c_i | ctx_i))` over the text's characters, after
/// mapping unseen characters to OOV (in contexts as well as targets).
pub fn perplexity(model: &NgramModel, text: &str) -> Result<f64, PerplexityError> {
    let mapped: Vec<Sym> = text.chars().map(|c| model.map_char(c)).collect();
    if mapped.is_empty() {
        return Err(PerplexityError::EmptyText);
    }
    let mut sum_ln = 0.0;
    for (i, &sym) in mapped.iter().enumerate() {
        let mut context = Vec::with_capacity(model.n - 1);
        for back in (1..model.n).rev() {
            context.push(match i.checked_sub(back) {
                Some(j) => mapped[j],
                None => Sym::Boundary,
            });
        }
        sum_ln += model.probability(&context, sym).ln();
    }
    Ok((-sum_ln / mapped.len() as f64).exp())
}
