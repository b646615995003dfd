//! Escape-time classification of points and grids.
//!
//! A point is an escaping-set *candidate* when the orbit of every word of
//! length at most `L` escapes. This is necessary evidence only: `R`, `N`, `L`
//! and `m` are finite, so candidates can be false positives and every grid
//! carries the parameters that produced it.

use rayon::prelude::*;

use crate::catalog::{is_overflow, ComplexPoint, MapDescriptor};
use crate::error::{Error, Result};
use crate::grid::{GridMeta, GridSpec, IndicatorGrid, PixelClass};
use crate::semigroup::{eval_letters, random_word_substream, words_up_to, SemigroupSpec, Word};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EscapeParams {
    /// Escape radius `R`.
    pub radius: f64,
    /// Maximum applications of the word map per orbit (`N`).
    pub max_iter: usize,
    /// Maximum word length (`L`).
    pub max_word_len: usize,
    /// Confirmation steps (`m`).
    pub confirm: usize,
}

impl Default for EscapeParams {
    fn default() -> Self {
        EscapeParams {
            radius: 1e10,
            max_iter: 200,
            max_word_len: 3,
            confirm: 3,
        }
    }
}

impl EscapeParams {
    pub fn new(radius: f64, max_iter: usize, max_word_len: usize, confirm: usize) -> Result<Self> {
        let p = EscapeParams {
            radius,
            max_iter,
            max_word_len,
            confirm,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.radius >= 100.0) || !self.radius.is_finite() {
            return Err(Error::invalid(format!("escape radius {} < 100", self.radius)));
        }
        if self.max_iter < 10 {
            return Err(Error::invalid(format!("max_iter {} < 10", self.max_iter)));
        }
        if self.max_word_len < 1 {
            return Err(Error::invalid("max_word_len must be at least 1"));
        }
        if self.confirm < 1 || self.confirm >= self.max_iter {
            return Err(Error::invalid(format!(
                "confirm steps {} must be in [1, max_iter)",
                self.confirm
            )));
        }
        Ok(())
    }

    pub fn with_word_len(mut self, max_word_len: usize) -> Self {
        self.max_word_len = max_word_len;
        self
    }

    pub fn echo(&self) -> String {
        format!(
            "R={:e} N={} L={} m={}",
            self.radius, self.max_iter, self.max_word_len, self.confirm
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OrbitOutcome {
    /// `|z| > R` first held at this step and did not decrease for `m` more
    /// steps (or the orbit overflowed meanwhile).
    Escaped(usize),
    /// `N` applications without confirmed escape.
    Bounded,
    /// Overflowed at this step without a prior finite exceedance of `R`.
    Overflow(usize),
    /// Above `R` when the iteration budget ran out, before confirmation.
    Indeterminate,
}

impl OrbitOutcome {
    /// Escaped and Overflow both count as escape evidence.
    pub fn is_escape(self) -> bool {
        matches!(self, OrbitOutcome::Escaped(_) | OrbitOutcome::Overflow(_))
    }
}

/// Shared escape loop. `step` advances the orbit by one application of the
/// word map, `record` sees every new point.
///
/// An orbit that lands exactly on a fixed point inside the radius is
/// reported Bounded immediately; the remaining iterations could not change
/// the outcome.
#[inline]
pub(crate) fn run_escape<S, Rec>(z0: ComplexPoint, p: &EscapeParams, mut step: S, mut record: Rec) -> OrbitOutcome
where
    S: FnMut(ComplexPoint) -> ComplexPoint,
    Rec: FnMut(ComplexPoint),
{
    if is_overflow(z0) {
        return OrbitOutcome::Overflow(0);
    }
    let r2 = p.radius * p.radius;
    // (step of first exceedance, last |z|^2, confirmations so far)
    let mut cand: Option<(usize, f64, usize)> = None;
    let m0 = z0.norm_sqr();
    if m0 > r2 {
        cand = Some((0, m0, 0));
    }
    let mut z = z0;
    for k in 1..=p.max_iter {
        let next = step(z);
        record(next);
        if is_overflow(next) {
            return match cand {
                Some((s, _, _)) => OrbitOutcome::Escaped(s),
                None => OrbitOutcome::Overflow(k),
            };
        }
        let mag = next.norm_sqr();
        cand = match cand {
            Some((s, last, c)) if mag >= last => {
                if c + 1 >= p.confirm {
                    return OrbitOutcome::Escaped(s);
                }
                Some((s, mag, c + 1))
            }
            _ if mag > r2 => Some((k, mag, 0)),
            _ => None,
        };
        if cand.is_none() && next == z {
            return OrbitOutcome::Bounded;
        }
        z = next;
    }
    if cand.is_some() {
        OrbitOutcome::Indeterminate
    } else {
        OrbitOutcome::Bounded
    }
}

#[inline]
pub(crate) fn classify_letters(gens: &[MapDescriptor], letters: &[usize], z: ComplexPoint, p: &EscapeParams) -> OrbitOutcome {
    run_escape(z, p, |q| eval_letters(gens, letters, q), |_| {})
}

pub fn classify_orbit(spec: &SemigroupSpec, w: &Word, z: ComplexPoint, p: &EscapeParams) -> OrbitOutcome {
    classify_letters(spec.generators(), w.letters(), z, p)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SemigroupEscapeClass {
    EscapingCandidate,
    /// The first word (shortlex) whose orbit stayed bounded.
    BoundedWitness(Word),
    Indeterminate,
}

impl SemigroupEscapeClass {
    pub fn pixel_class(&self) -> PixelClass {
        match self {
            SemigroupEscapeClass::EscapingCandidate => PixelClass::Escaping,
            SemigroupEscapeClass::BoundedWitness(_) => PixelClass::Bounded,
            SemigroupEscapeClass::Indeterminate => PixelClass::Indeterminate,
        }
    }
}

fn require_entire(spec: &SemigroupSpec) -> Result<()> {
    match spec.generators().iter().position(|g| !g.is_entire()) {
        Some(index) => Err(Error::RationalGeneratorsRejected {
            index,
            kind: spec.generators()[index].kind_name(),
        }),
        None => Ok(()),
    }
}

/// Report note for semigroups whose escape is the classical polynomial one.
pub fn escape_note(spec: &SemigroupSpec) -> Option<&'static str> {
    if spec.generators().iter().any(|g| g.is_rational()) {
        Some("polynomial generators: classical escape, not a transcendental escaping set")
    } else {
        None
    }
}

/// Index of the first bounded word, `Err(true)` if some word was
/// indeterminate, `Err(false)` if all escaped.
#[inline]
fn first_bounded(
    gens: &[MapDescriptor],
    words: &[Word],
    z: ComplexPoint,
    p: &EscapeParams,
) -> std::result::Result<usize, bool> {
    let mut indeterminate = false;
    for (k, w) in words.iter().enumerate() {
        match classify_letters(gens, w.letters(), z, p) {
            OrbitOutcome::Bounded => return Ok(k),
            OrbitOutcome::Indeterminate => indeterminate = true,
            _ => {}
        }
    }
    Err(indeterminate)
}

pub fn classify_point_semigroup(spec: &SemigroupSpec, z: ComplexPoint, p: &EscapeParams) -> Result<SemigroupEscapeClass> {
    require_entire(spec)?;
    let words: Vec<Word> = words_up_to(spec, p.max_word_len)?.collect();
    Ok(classify_with_words(spec, &words, z, p))
}

pub(crate) fn classify_with_words(spec: &SemigroupSpec, words: &[Word], z: ComplexPoint, p: &EscapeParams) -> SemigroupEscapeClass {
    match first_bounded(spec.generators(), words, z, p) {
        Ok(k) => SemigroupEscapeClass::BoundedWitness(words[k].clone()),
        Err(true) => SemigroupEscapeClass::Indeterminate,
        Err(false) => SemigroupEscapeClass::EscapingCandidate,
    }
}

/// Escape grid where a pixel is a candidate iff every word in `words`
/// escapes at its center.
pub fn escape_grid_for_words(spec: &SemigroupSpec, words: &[Word], g: &GridSpec, p: &EscapeParams) -> IndicatorGrid {
    let gens = spec.generators();
    let classes = (0..g.len())
        .into_par_iter()
        .map(|k| match first_bounded(gens, words, g.center_of_index(k), p) {
            Ok(_) => PixelClass::Bounded,
            Err(true) => PixelClass::Indeterminate,
            Err(false) => PixelClass::Escaping,
        })
        .collect();
    IndicatorGrid {
        grid: *g,
        classes,
        meta: GridMeta::new(spec.label(), 0),
    }
}

pub fn approximate_escaping_set(spec: &SemigroupSpec, g: &GridSpec, p: &EscapeParams) -> Result<IndicatorGrid> {
    require_entire(spec)?;
    g.validate()?;
    p.validate()?;
    let words: Vec<Word> = words_up_to(spec, p.max_word_len)?.collect();
    Ok(escape_grid_for_words(spec, &words, g, p))
}

/// Fraction of random-word orbits from `z` that escape. Trial `t` follows
/// word stream `t` under `seed` for `N` single-generator applications.
pub fn random_word_divergence_test(
    spec: &SemigroupSpec,
    z: ComplexPoint,
    p: &EscapeParams,
    seed: u64,
    trials: usize,
) -> Result<f64> {
    if trials == 0 {
        return Err(Error::invalid("trials must be at least 1"));
    }
    let trials_u32 = u32::try_from(trials).map_err(|_| Error::invalid("too many trials"))?;
    let gens = spec.generators();
    let escaped = (0..trials_u32)
        .into_par_iter()
        .filter(|&t| {
            let mut stream = random_word_substream(spec, seed, t);
            run_escape(
                z,
                p,
                |q| gens[stream.next().unwrap_or(0)].eval(q),
                |_| {},
            )
            .is_escape()
        })
        .count();
    Ok(escaped as f64 / trials as f64)
}
