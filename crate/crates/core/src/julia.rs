//! Julia and Fatou set approximations.
//!
//! Two independent routes:
//!
//! * [`backward_ifs_sample`] walks random inverse branches of the generators
//!   (power-quotient maps only), which lands on `J(S)` after a burn-in;
//! * [`approximate_julia_union`] classifies the grid by escape under every
//!   word of length at most `L` and marks pixels whose neighborhood sees both
//!   escaping and bounded samples.
//!
//! For entire transcendental generators the escape boundary stands in for
//! `J(f)` through `J(f) = closure(I(f))`, which holds for bounded-type maps;
//! it is a heuristic for catalog maps without the finite-type flag.

use std::io::Write;
use std::path::Path;

use rand::Rng;
use rayon::prelude::*;

use crate::catalog::{ComplexPoint, MapDescriptor, MapKind};
use crate::error::{Error, Result};
use crate::escape::{classify_letters, EscapeParams, OrbitOutcome};
use crate::grid::{GridMeta, GridSpec, IndicatorGrid, PixelClass};
use crate::rng::{stream_rng, Purpose};
use crate::semigroup::{words_up_to, SemigroupSpec, Word};

/// Backward orbits start here.
pub const IFS_START: ComplexPoint = ComplexPoint::new(1.0, 0.0);
pub const DEFAULT_BURN_IN: usize = 50;

#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    pub points: Vec<ComplexPoint>,
    pub seed: u64,
    pub burn_in: usize,
    pub label: String,
}

impl PointCloud {
    /// CSV with header `re,im` and 17 significant digits per value.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(48 * self.points.len() + 6);
        out.push_str("re,im\n");
        for z in &self.points {
            out.push_str(&format!("{:.16e},{:.16e}\n", z.re, z.im));
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        f.write_all(self.to_csv().as_bytes())
            .map_err(|e| Error::io(path, e))
    }
}

fn power_params(m: &MapDescriptor) -> Result<(u32, ComplexPoint)> {
    match *m.kind() {
        MapKind::PowerQuotient { degree, divisor } => Ok((degree, divisor)),
        _ => Err(Error::UnsupportedMap(m.kind_name())),
    }
}

/// Branch `k` of the inverse of `z^d / b` at `w`; same formula as
/// [`crate::catalog::inverse_branches`].
fn inverse_branch(degree: u32, divisor: ComplexPoint, w: ComplexPoint, k: u32) -> ComplexPoint {
    let p = divisor * w;
    let d = degree as f64;
    ComplexPoint::from_polar(
        p.norm().powf(1.0 / d),
        (p.arg() + std::f64::consts::TAU * k as f64) / d,
    )
}

fn run_chain(
    gens: &[(u32, ComplexPoint)],
    count: usize,
    burn_in: usize,
    seed: u64,
    chain: u32,
) -> Vec<ComplexPoint> {
    let mut rng = stream_rng(seed, Purpose::BackwardIfs, chain);
    let mut out = Vec::with_capacity(count);
    let mut z = IFS_START;
    let mut skipped = 0;
    while out.len() < count {
        if z.re == 0.0 && z.im == 0.0 {
            // critical value: restart without emitting
            z = IFS_START;
            skipped = 0;
            continue;
        }
        let (d, b) = gens[rng.gen_range(0..gens.len())];
        let k = rng.gen_range(0..d);
        z = inverse_branch(d, b, z, k);
        if skipped < burn_in {
            skipped += 1;
        } else {
            out.push(z);
        }
    }
    out
}

/// Random backward orbit of the generators: at each step pick a generator,
/// then one of its inverse branches, uniformly.
pub fn backward_ifs_sample(spec: &SemigroupSpec, count: usize, burn_in: usize, seed: u64) -> Result<PointCloud> {
    backward_ifs_sample_chains(spec, count, burn_in, seed, 1)
}

/// Splits `count` across `chains` independent chains (chain `c` uses random
/// stream `c`) and concatenates them in chain order.
pub fn backward_ifs_sample_chains(
    spec: &SemigroupSpec,
    count: usize,
    burn_in: usize,
    seed: u64,
    chains: usize,
) -> Result<PointCloud> {
    let gens = spec
        .generators()
        .iter()
        .map(power_params)
        .collect::<Result<Vec<_>>>()?;
    if chains == 0 {
        return Err(Error::invalid("chains must be at least 1"));
    }
    let chains_u32 = u32::try_from(chains).map_err(|_| Error::invalid("too many chains"))?;
    let base = count / chains;
    let extra = count % chains;
    let parts: Vec<Vec<ComplexPoint>> = (0..chains_u32)
        .into_par_iter()
        .map(|c| {
            let n = base + usize::from((c as usize) < extra);
            run_chain(&gens, n, burn_in, seed, c)
        })
        .collect();
    Ok(PointCloud {
        points: parts.concat(),
        seed,
        burn_in,
        label: spec.label().to_string(),
    })
}

/// How per-word escape samples combine into a Julia band.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BandMode {
    /// Union over words of each word's own boundary band.
    PerWord,
    /// A pixel is in the band when its neighborhood holds an escaping sample
    /// for some word and a bounded sample for some (possibly other) word.
    Joint,
}

impl BandMode {
    pub fn name(self) -> &'static str {
        match self {
            BandMode::PerWord => "per-word",
            BandMode::Joint => "joint",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "per-word" => Ok(BandMode::PerWord),
            "joint" => Ok(BandMode::Joint),
            other => Err(Error::invalid(format!(
                "band mode `{other}` (expected per-word or joint)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JuliaParams {
    /// Escape parameters; `max_word_len` is the word depth.
    pub escape: EscapeParams,
    /// Pixels excluded around class boundaries in residuals.
    pub boundary_band: usize,
    pub mode: BandMode,
}

impl Default for JuliaParams {
    fn default() -> Self {
        JuliaParams {
            escape: EscapeParams::default(),
            boundary_band: 2,
            mode: BandMode::Joint,
        }
    }
}

impl JuliaParams {
    pub fn new(escape: EscapeParams, boundary_band: usize, mode: BandMode) -> Result<Self> {
        let p = JuliaParams {
            escape,
            boundary_band,
            mode,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        self.escape.validate()?;
        if self.boundary_band < 1 {
            return Err(Error::invalid("boundary_band must be at least 1"));
        }
        Ok(())
    }
}

const ESC: u8 = 1;
const BND: u8 = 2;
const MIXED: u8 = ESC | BND;

#[inline]
fn outcome_bits(o: OrbitOutcome) -> u8 {
    match o {
        OrbitOutcome::Escaped(_) | OrbitOutcome::Overflow(_) => ESC,
        OrbitOutcome::Bounded => BND,
        OrbitOutcome::Indeterminate => 0,
    }
}

/// Escape bits at pixel centers (`w x h`) and pixel corners
/// (`(w+1) x (h+1)`).
struct Samples {
    centers: Vec<u8>,
    corners: Vec<u8>,
}

fn sample_points(g: &GridSpec) -> Vec<ComplexPoint> {
    let mut pts = Vec::with_capacity(g.len() + (g.width + 1) * (g.height + 1));
    pts.extend((0..g.len()).map(|k| g.center_of_index(k)));
    for j in 0..=g.height {
        for i in 0..=g.width {
            pts.push(g.corner(i, j));
        }
    }
    pts
}

/// OR of the escape bits of every word; stops early once both bits are set.
fn joint_samples(gens: &[MapDescriptor], words: &[Word], g: &GridSpec, p: &EscapeParams) -> Samples {
    let pts = sample_points(g);
    let bits: Vec<u8> = pts
        .par_iter()
        .map(|&z| {
            let mut acc = 0u8;
            for w in words {
                acc |= outcome_bits(classify_letters(gens, w.letters(), z, p));
                if acc == MIXED {
                    break;
                }
            }
            acc
        })
        .collect();
    split_samples(g, bits)
}

fn word_samples(gens: &[MapDescriptor], w: &Word, g: &GridSpec, p: &EscapeParams) -> Samples {
    let pts = sample_points(g);
    let bits: Vec<u8> = pts
        .par_iter()
        .map(|&z| outcome_bits(classify_letters(gens, w.letters(), z, p)))
        .collect();
    split_samples(g, bits)
}

fn split_samples(g: &GridSpec, mut bits: Vec<u8>) -> Samples {
    let corners = bits.split_off(g.len());
    Samples {
        centers: bits,
        corners,
    }
}

/// Band rule: the centers of the 3x3 block around a pixel plus the pixel's
/// own four corners must contain both an escaping and a bounded sample.
fn band_from_samples(g: &GridSpec, s: &Samples) -> Vec<bool> {
    let (w, h) = (g.width, g.height);
    let cw = w + 1;
    (0..g.len())
        .into_par_iter()
        .map(|k| {
            let (i, j) = (k % w, k / w);
            let mut acc = s.corners[j * cw + i]
                | s.corners[j * cw + i + 1]
                | s.corners[(j + 1) * cw + i]
                | s.corners[(j + 1) * cw + i + 1];
            for jj in j.saturating_sub(1)..=(j + 1).min(h - 1) {
                for ii in i.saturating_sub(1)..=(i + 1).min(w - 1) {
                    acc |= s.centers[jj * w + ii];
                }
            }
            acc == MIXED
        })
        .collect()
}

/// Julia band for an explicit list of words. A single word gives the
/// classical `J` of that word's map.
pub fn julia_band_for_words(
    spec: &SemigroupSpec,
    words: &[Word],
    g: &GridSpec,
    p: &JuliaParams,
) -> IndicatorGrid {
    let gens = spec.generators();
    let band = match p.mode {
        BandMode::Joint => band_from_samples(g, &joint_samples(gens, words, g, &p.escape)),
        BandMode::PerWord => {
            let mut acc = vec![false; g.len()];
            for w in words {
                let b = band_from_samples(g, &word_samples(gens, w, g, &p.escape));
                for (a, x) in acc.iter_mut().zip(b) {
                    *a |= x;
                }
            }
            acc
        }
    };
    IndicatorGrid {
        grid: *g,
        classes: band
            .into_iter()
            .map(|b| if b { PixelClass::JuliaBand } else { PixelClass::Fatou })
            .collect(),
        meta: GridMeta::new(spec.label(), 0),
    }
}

/// Julia band of the semigroup from the words of length at most `L`.
/// Pixels outside the band are Fatou candidates.
pub fn approximate_julia_union(spec: &SemigroupSpec, g: &GridSpec, p: &JuliaParams) -> Result<IndicatorGrid> {
    g.validate()?;
    p.validate()?;
    let words: Vec<Word> = words_up_to(spec, p.escape.max_word_len)?.collect();
    Ok(julia_band_for_words(spec, &words, g, p))
}

/// Swaps Julia-band and Fatou classes; other classes are kept.
pub fn fatou_indicator(julia: &IndicatorGrid) -> IndicatorGrid {
    let classes = julia
        .classes
        .iter()
        .map(|&c| match c {
            PixelClass::JuliaBand => PixelClass::Fatou,
            PixelClass::Fatou => PixelClass::JuliaBand,
            other => other,
        })
        .collect();
    IndicatorGrid {
        grid: julia.grid,
        classes,
        meta: julia.meta.clone(),
    }
}

/// Pullback of `src` along `m`: each pixel takes the class of the source
/// pixel its center maps to, or Unknown when the image leaves the window.
/// A pixel belongs to `m^-1(A)` for a class `A` exactly when its pulled-back
/// class is `A`.
pub fn preimage_grid(m: &MapDescriptor, src: &IndicatorGrid) -> IndicatorGrid {
    let g = src.grid;
    let classes = (0..g.len())
        .into_par_iter()
        .map(|k| {
            src.class_at(m.eval(g.center_of_index(k)))
                .unwrap_or(PixelClass::Unknown)
        })
        .collect();
    IndicatorGrid {
        grid: g,
        classes,
        meta: src.meta.clone(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::inverse_branches;
    use num_complex::Complex64;

    fn c(re: f64, im: f64) -> ComplexPoint {
        Complex64::new(re, im)
    }

    fn power_spec(divisors: &[f64]) -> SemigroupSpec {
        SemigroupSpec::new(
            "p",
            divisors
                .iter()
                .map(|&b| MapDescriptor::power(2, c(b, 0.0)).unwrap())
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn ifs_rejects_transcendental() {
        let s = SemigroupSpec::new(
            "e",
            vec![MapDescriptor::exp_affine(c(1.0, 0.0), c(0.0, 0.0)).unwrap()],
        )
        .unwrap();
        assert_eq!(
            backward_ifs_sample(&s, 10, 0, 1),
            Err(Error::UnsupportedMap("exp"))
        );
    }

    #[test]
    fn ifs_empty_cloud() {
        assert!(backward_ifs_sample(&power_spec(&[1.0]), 0, 50, 1)
            .unwrap()
            .points
            .is_empty());
    }

    #[test]
    fn ifs_square_on_unit_circle() {
        let cloud = backward_ifs_sample(&power_spec(&[1.0]), 100_000, 50, 9).unwrap();
        let good = cloud
            .points
            .iter()
            .filter(|z| (z.norm() - 1.0).abs() < 1e-6)
            .count();
        assert!(good as f64 >= 0.999 * 100_000.0);
    }

    #[test]
    fn ifs_annulus_bounds() {
        let cloud = backward_ifs_sample(&power_spec(&[1.0, 2.0]), 20_000, 50, 9).unwrap();
        assert!(cloud
            .points
            .iter()
            .all(|z| z.norm() >= 0.99 && z.norm() <= 2.01));
    }

    #[test]
    fn branch_helper_agrees_with_catalog() {
        let m = MapDescriptor::power(3, c(1.0, 1.0)).unwrap();
        let w = c(-0.4, 2.2);
        let all = inverse_branches(&m, w).unwrap();
        for k in 0..3 {
            assert_eq!(inverse_branch(3, c(1.0, 1.0), w, k), all[k as usize]);
        }
    }

    #[test]
    fn chains_are_deterministic_and_sized() {
        let s = power_spec(&[1.0, 2.0]);
        let a = backward_ifs_sample_chains(&s, 1001, 10, 4, 3).unwrap();
        let b = backward_ifs_sample_chains(&s, 1001, 10, 4, 3).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.points.len(), 1001);
        let single = backward_ifs_sample(&s, 100, 10, 4).unwrap();
        let chained = backward_ifs_sample_chains(&s, 100, 10, 4, 1).unwrap();
        assert_eq!(single, chained);
    }

    #[test]
    fn csv_format() {
        let cloud = PointCloud {
            points: vec![c(1.0, -0.5)],
            seed: 0,
            burn_in: 0,
            label: "x".into(),
        };
        assert_eq!(
            cloud.to_csv(),
            "re,im\n1.0000000000000000e0,-5.0000000000000000e-1\n"
        );
    }

    #[test]
    fn fatou_complement_is_an_involution() {
        let g = GridSpec::square(1.0, 3).unwrap();
        let all_j = IndicatorGrid::filled(g, PixelClass::JuliaBand, GridMeta::new("x", 0));
        let f = fatou_indicator(&all_j);
        assert!(f.classes.iter().all(|&c| c == PixelClass::Fatou));
        assert_eq!(fatou_indicator(&f), all_j);
    }

    #[test]
    fn unit_disc_pulls_back_to_itself() {
        let g = GridSpec::square(1.5, 61).unwrap();
        let classes = (0..g.len())
            .map(|k| {
                if g.center_of_index(k).norm() < 1.0 {
                    PixelClass::Fatou
                } else {
                    PixelClass::JuliaBand
                }
            })
            .collect();
        let src = IndicatorGrid {
            grid: g,
            classes,
            meta: GridMeta::new("disc", 0),
        };
        let sq = MapDescriptor::power(2, c(1.0, 0.0)).unwrap();
        let pre = preimage_grid(&sq, &src);
        for k in 0..g.len() {
            let z = g.center_of_index(k);
            let r = z.norm();
            // away from the circle (pixel size 0.05) the pullback is exact
            if r < 0.95 {
                assert_eq!(pre.classes[k], PixelClass::Fatou);
            } else if r > 1.05 && pre.classes[k] != PixelClass::Unknown {
                assert_eq!(pre.classes[k], PixelClass::JuliaBand);
            }
        }
    }

    #[test]
    fn pullback_of_empty_and_full() {
        let g = GridSpec::square(2.0, 20).unwrap();
        let sq = MapDescriptor::power(2, c(1.0, 0.0)).unwrap();
        let full = IndicatorGrid::filled(g, PixelClass::Fatou, GridMeta::new("x", 0));
        let pre = preimage_grid(&sq, &full);
        for k in 0..g.len() {
            let inside = g.contains_point(sq.eval(g.center_of_index(k)));
            assert_eq!(pre.classes[k] == PixelClass::Fatou, inside);
        }
        let empty = IndicatorGrid::filled(g, PixelClass::JuliaBand, GridMeta::new("x", 0));
        assert_eq!(preimage_grid(&sq, &empty).count(PixelClass::Fatou), 0);
    }

    #[test]
    fn square_band_hugs_unit_circle() {
        let g = GridSpec::square(2.0, 200).unwrap();
        let p = JuliaParams::default();
        let j = approximate_julia_union(&power_spec(&[1.0]), &g, &p).unwrap();
        let diag = g.pixel_width() * std::f64::consts::SQRT_2;
        assert!(j.count(PixelClass::JuliaBand) > 0);
        for k in 0..g.len() {
            if j.classes[k] == PixelClass::JuliaBand {
                assert!((g.center_of_index(k).norm() - 1.0).abs() <= 2.0 * diag);
            }
        }
    }

    #[test]
    fn modes_agree_for_a_single_generator() {
        let g = GridSpec::square(2.0, 80).unwrap();
        let s = power_spec(&[1.0]);
        let joint = approximate_julia_union(&s, &g, &JuliaParams::default()).unwrap();
        let per = approximate_julia_union(
            &s,
            &g,
            &JuliaParams {
                mode: BandMode::PerWord,
                ..JuliaParams::default()
            },
        )
        .unwrap();
        assert_eq!(joint, per);
    }
}
