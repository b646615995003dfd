//! Finitely generated semigroups, words and orbits.
//!
//! A word `[i1, i2, ..., ik]` denotes `f_ik o ... o f_i2 o f_i1`: letters are
//! applied first to last, the order in which an orbit visits them.

use std::fmt;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::catalog::{is_overflow, ComplexPoint, MapDescriptor, OVERFLOW};
use crate::error::{Error, Result};
use crate::escape::{run_escape, EscapeParams, OrbitOutcome};
use crate::rng::{stream_rng, Purpose};

pub const DEFAULT_WORD_BUDGET: usize = 100_000;

#[derive(Debug, Clone, PartialEq)]
pub struct SemigroupSpec {
    generators: Vec<MapDescriptor>,
    label: String,
}

impl SemigroupSpec {
    pub fn new(label: impl Into<String>, generators: Vec<MapDescriptor>) -> Result<Self> {
        if generators.is_empty() {
            return Err(Error::invalid("a semigroup needs at least one generator"));
        }
        Ok(SemigroupSpec {
            generators,
            label: label.into(),
        })
    }

    pub fn generators(&self) -> &[MapDescriptor] {
        &self.generators
    }

    pub fn len(&self) -> usize {
        self.generators.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// One generator means classical iteration.
    pub fn is_cyclic(&self) -> bool {
        self.generators.len() == 1
    }

    pub fn word(&self, letters: Vec<usize>) -> Result<Word> {
        Word::new(letters, self.len())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word(Vec<usize>);

impl Word {
    pub fn new(letters: Vec<usize>, generators: usize) -> Result<Self> {
        if letters.is_empty() {
            return Err(Error::invalid("words are nonempty"));
        }
        if let Some(&bad) = letters.iter().find(|&&l| l >= generators) {
            return Err(Error::invalid(format!(
                "letter {bad} out of range for {generators} generators"
            )));
        }
        Ok(Word(letters))
    }

    pub fn letters(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// `u.concat(v)` applies `u` first, then `v`.
    pub fn concat(&self, other: &Word) -> Word {
        let mut letters = self.0.clone();
        letters.extend_from_slice(&other.0);
        Word(letters)
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (k, l) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{l}")?;
        }
        write!(f, "]")
    }
}

/// Number of words of length `1..=max_len` over `n` letters.
pub fn word_count(n: usize, max_len: usize) -> u128 {
    let n = n as u128;
    let mut total: u128 = 0;
    let mut layer: u128 = 1;
    for _ in 0..max_len {
        layer = layer.saturating_mul(n);
        total = total.saturating_add(layer);
    }
    total
}

/// Shortlex enumeration: by length, then lexicographically.
#[derive(Debug, Clone)]
pub struct Words {
    n: usize,
    max_len: usize,
    next: Option<Vec<usize>>,
}

impl Iterator for Words {
    type Item = Word;

    fn next(&mut self) -> Option<Word> {
        let cur = self.next.take()?;
        let mut succ = cur.clone();
        // odometer increment, last letter fastest
        let mut k = succ.len();
        loop {
            if k == 0 {
                if succ.len() < self.max_len {
                    self.next = Some(vec![0; succ.len() + 1]);
                }
                break;
            }
            k -= 1;
            succ[k] += 1;
            if succ[k] < self.n {
                self.next = Some(succ);
                break;
            }
            succ[k] = 0;
        }
        Some(Word(cur))
    }
}

pub fn words_up_to(spec: &SemigroupSpec, max_len: usize) -> Result<Words> {
    words_up_to_with_budget(spec, max_len, DEFAULT_WORD_BUDGET)
}

pub fn words_up_to_with_budget(spec: &SemigroupSpec, max_len: usize, budget: usize) -> Result<Words> {
    if max_len == 0 {
        return Err(Error::invalid("maximum word length must be at least 1"));
    }
    let needed = word_count(spec.len(), max_len);
    if needed > budget as u128 {
        return Err(Error::BudgetExceeded { needed, budget });
    }
    Ok(Words {
        n: spec.len(),
        max_len,
        next: Some(vec![0]),
    })
}

/// Applies the word's generators in letter order. Overflow is absorbing.
#[inline]
pub fn eval_word(spec: &SemigroupSpec, w: &Word, z: ComplexPoint) -> ComplexPoint {
    eval_letters(spec.generators(), w.letters(), z)
}

#[inline]
pub(crate) fn eval_letters(gens: &[MapDescriptor], letters: &[usize], mut z: ComplexPoint) -> ComplexPoint {
    for &l in letters {
        if is_overflow(z) {
            return OVERFLOW;
        }
        z = gens[l].eval(z);
    }
    z
}

#[derive(Debug, Clone, PartialEq)]
pub struct Orbit {
    pub start: ComplexPoint,
    /// `points[0] == start`, then one entry per application of the word map.
    pub points: Vec<ComplexPoint>,
    pub outcome: OrbitOutcome,
}

/// Iterates the word map from `z`, recording every point.
pub fn iterate_word(spec: &SemigroupSpec, w: &Word, z: ComplexPoint, params: &EscapeParams) -> Orbit {
    let mut points = vec![z];
    let gens = spec.generators();
    let outcome = run_escape(
        z,
        params,
        |p| eval_letters(gens, w.letters(), p),
        |p| points.push(p),
    );
    Orbit {
        start: z,
        points,
        outcome,
    }
}

/// Deterministic stream of uniformly distributed generator indices.
#[derive(Debug, Clone)]
pub struct RandomWordStream {
    rng: ChaCha8Rng,
    n: usize,
}

impl Iterator for RandomWordStream {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        Some(self.rng.gen_range(0..self.n))
    }
}

pub fn random_word_stream(spec: &SemigroupSpec, seed: u64) -> RandomWordStream {
    random_word_substream(spec, seed, 0)
}

/// Independent stream number `index` under the same seed (one per trial or
/// worker).
pub fn random_word_substream(spec: &SemigroupSpec, seed: u64, index: u32) -> RandomWordStream {
    RandomWordStream {
        rng: stream_rng(seed, Purpose::WordStream, index),
        n: spec.len(),
    }
}
