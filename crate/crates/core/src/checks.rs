//! Grid and point-sample checks of invariance properties and set identities.
//!
//! Every residual is a fraction in `[0, 1]`. Discretization error
//! concentrates at class boundaries, so pixels within `band` pixels of a
//! boundary are never counted as violations, and pixels whose image leaves
//! the window are dropped entirely. Denominators are taken before the band
//! exclusion, which makes a wider band unable to raise a residual.

use std::fmt;

use rand::seq::SliceRandom;
use rayon::prelude::*;

use crate::catalog::{commutator_defect, ComplexPoint, MapDescriptor};
use crate::error::{Error, Result};
use crate::escape::{
    approximate_escaping_set, classify_with_words, escape_grid_for_words, escape_note, EscapeParams,
    SemigroupEscapeClass,
};
use crate::grid::{boundary_band, dilate, GridSpec, IndicatorGrid, PixelClass};
use crate::julia::{approximate_julia_union, fatou_indicator, julia_band_for_words, JuliaParams};
use crate::rng::{stream_rng, Purpose};
use crate::sample::SampleSpec;
use crate::semigroup::{words_up_to, SemigroupSpec, Word};

pub const MAX_VIOLATION_SAMPLES: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
    Informational,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::Informational => "informational",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ViolationSample {
    pub z: ComplexPoint,
    pub class_before: PixelClass,
    pub class_after: PixelClass,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckReport {
    pub name: String,
    pub label: String,
    pub params: String,
    pub residual: f64,
    pub threshold: f64,
    pub verdict: Verdict,
    pub violation_samples: Vec<ViolationSample>,
    /// Free-form remarks (gate outcome, heuristics in play). Not part of the
    /// report file format.
    pub notes: Vec<String>,
}

impl CheckReport {
    pub fn failed(&self) -> bool {
        self.verdict == Verdict::Fail
    }
}

/// Pass/fail thresholds, one per check. Acceptance tests pin their own.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Thresholds {
    pub forward: f64,
    pub backward: f64,
    pub intersection: f64,
    pub union: f64,
    pub abelian: f64,
    pub inclusion: f64,
    pub annulus: f64,
    pub sampled_forward: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            forward: 0.01,
            backward: 0.02,
            intersection: 0.02,
            union: 0.02,
            abelian: 0.03,
            inclusion: 0.02,
            annulus: 0.01,
            sampled_forward: 0.01,
        }
    }
}

/// Numerical abelianness gate: every generator pair must have commutator
/// defect below `tolerance` on the disc.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GateConfig {
    pub center: ComplexPoint,
    pub radius: f64,
    pub count: usize,
    pub tolerance: f64,
}

impl Default for GateConfig {
    fn default() -> Self {
        GateConfig {
            center: ComplexPoint::new(0.0, 0.0),
            radius: 1.0,
            count: 1000,
            tolerance: 1e-9,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CheckConfig {
    pub band: usize,
    pub thresholds: Thresholds,
    pub gate: GateConfig,
    /// Points drawn by sampled checks.
    pub sample_count: usize,
    pub seed: u64,
}

impl Default for CheckConfig {
    fn default() -> Self {
        CheckConfig {
            band: 2,
            thresholds: Thresholds::default(),
            gate: GateConfig::default(),
            sample_count: 1000,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GateOutcome {
    pub abelian: bool,
    pub max_defect: f64,
    pub note: String,
}

pub fn abelian_gate(spec: &SemigroupSpec, cfg: &CheckConfig) -> GateOutcome {
    let gens = spec.generators();
    let sample = SampleSpec::disc(cfg.gate.center, cfg.gate.radius, cfg.gate.count, cfg.seed);
    let mut max_defect = 0.0f64;
    let mut abelian = true;
    let mut problems = Vec::new();
    for a in 0..gens.len() {
        for b in a + 1..gens.len() {
            match commutator_defect(&gens[a], &gens[b], &sample) {
                Ok(d) => {
                    max_defect = max_defect.max(d.defect);
                    if !(d.defect < cfg.gate.tolerance) {
                        abelian = false;
                    }
                }
                Err(e) => {
                    abelian = false;
                    problems.push(format!("pair ({a},{b}): {e}"));
                }
            }
        }
    }
    let mut note = format!(
        "commutator gate: max defect {:e} on disc({}, {}), tolerance {:e}: {}",
        max_defect,
        crate::catalog::render_complex(cfg.gate.center),
        cfg.gate.radius,
        cfg.gate.tolerance,
        if abelian { "abelian" } else { "not abelian" }
    );
    for p in problems {
        note.push_str("; ");
        note.push_str(&p);
    }
    GateOutcome {
        abelian,
        max_defect,
        note,
    }
}

fn verdict(residual: f64, threshold: f64) -> Verdict {
    if residual <= threshold {
        Verdict::Pass
    } else {
        Verdict::Fail
    }
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

fn params_echo(esc: Option<&EscapeParams>, band: usize) -> String {
    match esc {
        Some(p) => format!("{} band={}", p.echo(), band),
        None => format!("band={band}"),
    }
}

/// Pixel index of each pixel center's image under `f`.
fn image_indices(f: &MapDescriptor, g: &GridSpec) -> Vec<Option<usize>> {
    (0..g.len())
        .into_par_iter()
        .map(|k| g.point_to_index(f.eval(g.center_of_index(k))))
        .collect()
}

fn first_samples(hits: Vec<Option<ViolationSample>>) -> (usize, Vec<ViolationSample>) {
    let count = hits.iter().filter(|h| h.is_some()).count();
    let samples = hits
        .into_iter()
        .flatten()
        .take(MAX_VIOLATION_SAMPLES)
        .collect();
    (count, samples)
}

/// Forward invariance of one class: an in-class pixel violates when some
/// generator maps it onto an out-of-class pixel.
pub fn check_forward_invariance(
    set: &IndicatorGrid,
    class: PixelClass,
    spec: &SemigroupSpec,
    cfg: &CheckConfig,
) -> CheckReport {
    let g = &set.grid;
    let mask = set.mask(class);
    let band = boundary_band(&mask, g.width, g.height, cfg.band);
    let images: Vec<Vec<Option<usize>>> =
        spec.generators().iter().map(|f| image_indices(f, g)).collect();
    let hits: Vec<Option<ViolationSample>> = (0..g.len())
        .into_par_iter()
        .map(|k| {
            if !mask[k] || band[k] {
                return None;
            }
            images.iter().find_map(|img| match img[k] {
                Some(q) if !band[q] && !mask[q] => Some(ViolationSample {
                    z: g.center_of_index(k),
                    class_before: class,
                    class_after: set.classes[q],
                }),
                _ => None,
            })
        })
        .collect();
    let (violations, samples) = first_samples(hits);
    let residual = ratio(violations, mask.iter().filter(|&&m| m).count());
    let threshold = cfg.thresholds.forward;
    CheckReport {
        name: format!("forward-invariance-{}", class.name()),
        label: spec.label().to_string(),
        params: params_echo(None, cfg.band),
        residual,
        threshold,
        verdict: verdict(residual, threshold),
        violation_samples: samples,
        notes: Vec::new(),
    }
}

/// Backward invariance of one class: per generator, the fraction of pixels
/// mapped into the class that lie outside it; the report keeps the largest.
/// Only semigroups passing the commutator gate get a pass/fail verdict.
pub fn check_backward_invariance(
    set: &IndicatorGrid,
    class: PixelClass,
    spec: &SemigroupSpec,
    cfg: &CheckConfig,
) -> CheckReport {
    let g = &set.grid;
    let mask = set.mask(class);
    let band = boundary_band(&mask, g.width, g.height, cfg.band);
    let mut residual = 0.0f64;
    let mut samples = Vec::new();
    for f in spec.generators() {
        let img = image_indices(f, g);
        let mut mapped_in = 0usize;
        let hits: Vec<Option<ViolationSample>> = img
            .iter()
            .enumerate()
            .map(|(k, q)| match *q {
                Some(q) if mask[q] => {
                    mapped_in += 1;
                    if !mask[k] && !band[k] && !band[q] {
                        Some(ViolationSample {
                            z: g.center_of_index(k),
                            class_before: set.classes[k],
                            class_after: class,
                        })
                    } else {
                        None
                    }
                }
                _ => None,
            })
            .collect();
        let (violations, s) = first_samples(hits);
        let r = ratio(violations, mapped_in);
        if r > residual || samples.is_empty() {
            residual = residual.max(r);
            if !s.is_empty() {
                samples = s;
            }
        }
    }
    let gate = abelian_gate(spec, cfg);
    let threshold = cfg.thresholds.backward;
    CheckReport {
        name: format!("backward-invariance-{}", class.name()),
        label: spec.label().to_string(),
        params: params_echo(None, cfg.band),
        residual,
        threshold,
        verdict: if gate.abelian {
            verdict(residual, threshold)
        } else {
            Verdict::Informational
        },
        violation_samples: samples,
        notes: vec![gate.note],
    }
}

/// `A = f_1^-1(A) ∩ ... ∩ f_n^-1(A)` for the class `A`: symmetric-difference
/// fraction between the class mask and the intersection of its pullbacks.
///
/// For the escaping class the verdict is pass/fail only for semigroups that
/// pass the commutator gate; otherwise the residual is recorded as
/// informational.
pub fn check_intersection_identity(
    set: &IndicatorGrid,
    class: PixelClass,
    spec: &SemigroupSpec,
    cfg: &CheckConfig,
) -> CheckReport {
    let maps: Vec<&MapDescriptor> = spec.generators().iter().collect();
    let (residual, samples) = pullback_agreement(set, class, &maps, cfg.band);
    let threshold = cfg.thresholds.intersection;
    let mut notes = Vec::new();
    let v = if class == PixelClass::Escaping {
        let gate = abelian_gate(spec, cfg);
        let v = if gate.abelian {
            verdict(residual, threshold)
        } else {
            Verdict::Informational
        };
        notes.push(gate.note);
        if let Some(n) = escape_note(spec) {
            notes.push(n.to_string());
        }
        v
    } else {
        verdict(residual, threshold)
    };
    CheckReport {
        name: format!("intersection-identity-{}", class.name()),
        label: spec.label().to_string(),
        params: params_echo(None, cfg.band),
        residual,
        threshold,
        verdict: v,
        violation_samples: samples,
        notes,
    }
}

fn pullback_agreement(
    set: &IndicatorGrid,
    class: PixelClass,
    maps: &[&MapDescriptor],
    band_px: usize,
) -> (f64, Vec<ViolationSample>) {
    let g = &set.grid;
    let mask = set.mask(class);
    let band = boundary_band(&mask, g.width, g.height, band_px);
    let images: Vec<Vec<Option<usize>>> = maps.iter().map(|f| image_indices(f, g)).collect();
    let rows: Vec<(bool, Option<ViolationSample>)> = (0..g.len())
        .into_par_iter()
        .map(|k| {
            let mut qs = Vec::with_capacity(images.len());
            for img in &images {
                match img[k] {
                    Some(q) => qs.push(q),
                    None => return (false, None),
                }
            }
            if band[k] || qs.iter().any(|&q| band[q]) {
                return (true, None);
            }
            let in_pullback = qs.iter().all(|&q| mask[q]);
            if in_pullback == mask[k] {
                return (true, None);
            }
            let after = if in_pullback {
                class
            } else {
                set.classes[*qs.iter().find(|&&q| !mask[q]).unwrap_or(&qs[0])]
            };
            (
                true,
                Some(ViolationSample {
                    z: g.center_of_index(k),
                    class_before: set.classes[k],
                    class_after: after,
                }),
            )
        })
        .collect();
    let tested = rows.iter().filter(|(t, _)| *t).count();
    let (violations, samples) = first_samples(rows.into_iter().map(|(_, v)| v).collect());
    (ratio(violations, tested), samples)
}

/// Classical complete invariance `A = f^-1(A)` under a single map.
pub fn check_complete_invariance(
    set: &IndicatorGrid,
    class: PixelClass,
    f: &MapDescriptor,
    cfg: &CheckConfig,
) -> CheckReport {
    let (residual, samples) = pullback_agreement(set, class, &[f], cfg.band);
    let threshold = cfg.thresholds.intersection;
    CheckReport {
        name: format!("complete-invariance-{}", class.name()),
        label: set.meta.label.clone(),
        params: params_echo(None, cfg.band),
        residual,
        threshold,
        verdict: verdict(residual, threshold),
        violation_samples: samples,
        notes: Vec::new(),
    }
}

/// Dilation-tolerant symmetric difference of two masks over `tested` pixels:
/// a pixel of one set violates when no pixel of the other lies within
/// `radius`. The denominator is the number of tested pixels in either set.
fn tolerant_difference(
    a: &[bool],
    b: &[bool],
    tested: &[bool],
    g: &GridSpec,
    radius: usize,
    classes: (PixelClass, PixelClass),
) -> (f64, Vec<ViolationSample>) {
    let da = dilate(a, g.width, g.height, radius);
    let db = dilate(b, g.width, g.height, radius);
    let mut union = 0usize;
    let hits: Vec<Option<ViolationSample>> = (0..g.len())
        .map(|k| {
            if !tested[k] || !(a[k] || b[k]) {
                return None;
            }
            union += 1;
            let miss = (a[k] && !db[k]) || (b[k] && !da[k]);
            miss.then(|| ViolationSample {
                z: g.center_of_index(k),
                class_before: if a[k] { classes.0 } else { classes.1 },
                class_after: if b[k] { classes.0 } else { classes.1 },
            })
        })
        .collect();
    let (violations, samples) = first_samples(hits);
    (ratio(violations, union), samples)
}

/// `J = f_1^-1(J) ∪ ... ∪ f_n^-1(J)` on a Julia-band grid, compared with a
/// `boundary_band`-pixel dilation tolerance. Pixels whose every image leaves
/// the window without hitting the band are Unknown and skipped.
pub fn check_union_identity(julia: &IndicatorGrid, spec: &SemigroupSpec, cfg: &CheckConfig) -> CheckReport {
    let g = &julia.grid;
    let a = julia.mask(PixelClass::JuliaBand);
    let images: Vec<Vec<Option<usize>>> =
        spec.generators().iter().map(|f| image_indices(f, g)).collect();
    let mut b = vec![false; g.len()];
    let mut tested = vec![true; g.len()];
    for k in 0..g.len() {
        let mut unknown = false;
        for img in &images {
            match img[k] {
                Some(q) if a[q] => b[k] = true,
                Some(_) => {}
                None => unknown = true,
            }
        }
        tested[k] = b[k] || !unknown;
    }
    let (residual, samples) = tolerant_difference(
        &a,
        &b,
        &tested,
        g,
        cfg.band,
        (PixelClass::JuliaBand, PixelClass::Fatou),
    );
    let threshold = cfg.thresholds.union;
    CheckReport {
        name: "union-identity-julia".to_string(),
        label: spec.label().to_string(),
        params: params_echo(None, cfg.band),
        residual,
        threshold,
        verdict: verdict(residual, threshold),
        violation_samples: samples,
        notes: Vec::new(),
    }
}

/// Symmetric difference between two Julia bands on the same grid, with a
/// `band`-pixel dilation tolerance in both directions.
pub fn check_julia_equality(a: &IndicatorGrid, b: &IndicatorGrid, cfg: &CheckConfig) -> Result<CheckReport> {
    if a.grid != b.grid {
        return Err(Error::invalid("Julia bands are on different grids"));
    }
    let all = vec![true; a.grid.len()];
    let (residual, samples) = tolerant_difference(
        &a.mask(PixelClass::JuliaBand),
        &b.mask(PixelClass::JuliaBand),
        &all,
        &a.grid,
        cfg.band,
        (PixelClass::JuliaBand, PixelClass::Fatou),
    );
    let threshold = cfg.thresholds.abelian;
    Ok(CheckReport {
        name: "julia-equality".to_string(),
        label: format!("{}~{}", a.meta.label, b.meta.label),
        params: params_echo(None, cfg.band),
        residual,
        threshold,
        verdict: verdict(residual, threshold),
        violation_samples: samples,
        notes: Vec::new(),
    })
}

fn escaping_difference(a: &IndicatorGrid, b: &IndicatorGrid, band_px: usize) -> (f64, Vec<ViolationSample>) {
    let g = &a.grid;
    let ma = a.mask(PixelClass::Escaping);
    let mb = b.mask(PixelClass::Escaping);
    let ba = boundary_band(&ma, g.width, g.height, band_px);
    let bb = boundary_band(&mb, g.width, g.height, band_px);
    let hits = (0..g.len())
        .map(|k| {
            (ma[k] != mb[k] && !ba[k] && !bb[k]).then(|| ViolationSample {
                z: g.center_of_index(k),
                class_before: a.classes[k],
                class_after: b.classes[k],
            })
        })
        .collect();
    let (violations, samples) = first_samples(hits);
    (ratio(violations, g.len()), samples)
}

/// `J(S) = J(f)` and `I(S) = I(f)` for every word `f` of length at most 2.
/// Gated on the commutator test; transcendental generators additionally need
/// the finite-type flag, otherwise the verdict is informational.
pub fn check_abelian_equalities(
    spec: &SemigroupSpec,
    g: &GridSpec,
    jp: &JuliaParams,
    cfg: &CheckConfig,
) -> Result<CheckReport> {
    let gate = abelian_gate(spec, cfg);
    let j_s = approximate_julia_union(spec, g, jp)?;
    let i_s = approximate_escaping_set(spec, g, &jp.escape)?;
    let a = j_s.mask(PixelClass::JuliaBand);
    let all = vec![true; g.len()];
    let mut residual = 0.0f64;
    let mut samples = Vec::new();
    for w in words_up_to(spec, 2)? {
        let words = [w];
        let j_f = julia_band_for_words(spec, &words, g, jp);
        let (rj, sj) = tolerant_difference(
            &a,
            &j_f.mask(PixelClass::JuliaBand),
            &all,
            g,
            cfg.band,
            (PixelClass::JuliaBand, PixelClass::Fatou),
        );
        let i_f = escape_grid_for_words(spec, &words, g, &jp.escape);
        let (ri, si) = escaping_difference(&i_s, &i_f, cfg.band);
        for (r, s) in [(rj, sj), (ri, si)] {
            if r > residual {
                residual = r;
                samples = s;
            }
        }
    }
    let mut notes = vec![gate.note.clone()];
    let finite_type = spec
        .generators()
        .iter()
        .all(|f| f.is_rational() || f.finite_type_claimed());
    if !finite_type {
        notes.push("transcendental generators without the finite-type flag".to_string());
    }
    let threshold = cfg.thresholds.abelian;
    Ok(CheckReport {
        name: "abelian-equalities".to_string(),
        label: spec.label().to_string(),
        params: format!("{} mode={}", params_echo(Some(&jp.escape), cfg.band), jp.mode.name()),
        residual,
        threshold,
        verdict: if gate.abelian && finite_type {
            verdict(residual, threshold)
        } else {
            Verdict::Informational
        },
        violation_samples: samples,
        notes,
    })
}

/// `F(S) ⊂ F(f)`, `J(f) ⊂ J(S)` (with dilation tolerance) and
/// `I(S) ⊂ I(f)` for one element `f` given as a word. Reports the largest of
/// the three violation fractions.
pub fn check_inclusions(
    spec: &SemigroupSpec,
    word: &Word,
    g: &GridSpec,
    jp: &JuliaParams,
    cfg: &CheckConfig,
) -> Result<CheckReport> {
    let (w, h) = (g.width, g.height);
    let words = [word.clone()];
    let j_s = approximate_julia_union(spec, g, jp)?;
    let j_f = julia_band_for_words(spec, &words, g, jp);
    let f_s = fatou_indicator(&j_s).mask(PixelClass::JuliaBand);
    let f_f = fatou_indicator(&j_f).mask(PixelClass::JuliaBand);
    let band_fs = boundary_band(&f_s, w, h, cfg.band);
    let band_ff = boundary_band(&f_f, w, h, cfg.band);

    let mut parts: Vec<(f64, Vec<ViolationSample>)> = Vec::new();
    let hits = (0..g.len())
        .map(|k| {
            (f_s[k] && !f_f[k] && !band_fs[k] && !band_ff[k]).then(|| ViolationSample {
                z: g.center_of_index(k),
                class_before: PixelClass::Fatou,
                class_after: PixelClass::JuliaBand,
            })
        })
        .collect();
    let (v, s) = first_samples(hits);
    parts.push((ratio(v, f_s.iter().filter(|&&x| x).count()), s));

    let jm_s = j_s.mask(PixelClass::JuliaBand);
    let jm_f = j_f.mask(PixelClass::JuliaBand);
    let dj_s = dilate(&jm_s, w, h, cfg.band);
    let hits = (0..g.len())
        .map(|k| {
            (jm_f[k] && !dj_s[k]).then(|| ViolationSample {
                z: g.center_of_index(k),
                class_before: PixelClass::JuliaBand,
                class_after: PixelClass::Fatou,
            })
        })
        .collect();
    let (v, s) = first_samples(hits);
    parts.push((ratio(v, jm_f.iter().filter(|&&x| x).count()), s));

    let i_s = approximate_escaping_set(spec, g, &jp.escape)?;
    let i_f = escape_grid_for_words(spec, &words, g, &jp.escape);
    let im_s = i_s.mask(PixelClass::Escaping);
    let im_f = i_f.mask(PixelClass::Escaping);
    let band_if = boundary_band(&im_f, w, h, cfg.band);
    let hits = (0..g.len())
        .map(|k| {
            (im_s[k] && !im_f[k] && !band_if[k]).then(|| ViolationSample {
                z: g.center_of_index(k),
                class_before: PixelClass::Escaping,
                class_after: i_f.classes[k],
            })
        })
        .collect();
    let (v, s) = first_samples(hits);
    parts.push((ratio(v, im_s.iter().filter(|&&x| x).count()), s));

    let notes = vec![format!(
        "fatou {:e}, julia {:e}, escaping {:e}",
        parts[0].0, parts[1].0, parts[2].0
    )];
    let (residual, samples) = parts
        .into_iter()
        .fold((0.0, Vec::new()), |acc, p| if p.0 > acc.0 { p } else { acc });
    let threshold = cfg.thresholds.inclusion;
    Ok(CheckReport {
        name: format!("inclusions-word-{word}"),
        label: spec.label().to_string(),
        params: format!("{} mode={}", params_echo(Some(&jp.escape), cfg.band), jp.mode.name()),
        residual,
        threshold,
        verdict: verdict(residual, threshold),
        violation_samples: samples,
        notes,
    })
}

/// Semigroup `<z^2, z^2/a>` with `|a| > 1`.
pub fn annulus_semigroup(a: ComplexPoint) -> Result<SemigroupSpec> {
    if !(a.norm() > 1.0) {
        return Err(Error::invalid(format!(
            "annulus reference needs |a| > 1, got |a| = {}",
            a.norm()
        )));
    }
    SemigroupSpec::new(
        format!("annulus-a={}", crate::catalog::render_complex(a)),
        vec![
            MapDescriptor::power(2, ComplexPoint::new(1.0, 0.0))?,
            MapDescriptor::power(2, a)?,
        ],
    )
}

/// Compares the computed Julia band of `<z^2, z^2/a>` with the closed
/// annulus `1 <= |z| <= |a|`, skipping pixels whose center lies within
/// `band` pixels of either circle.
pub fn annulus_reference_check(
    a: ComplexPoint,
    g: &GridSpec,
    jp: &JuliaParams,
    cfg: &CheckConfig,
) -> Result<CheckReport> {
    let spec = annulus_semigroup(a)?;
    let outer = a.norm();
    let julia = approximate_julia_union(&spec, g, jp)?;
    let px = g.pixel_width().max(g.pixel_height());
    let tol = cfg.band as f64 * px;
    let hits = (0..g.len())
        .map(|k| {
            let z = g.center_of_index(k);
            let r = z.norm();
            if (r - 1.0).abs() <= tol || (r - outer).abs() <= tol {
                return None;
            }
            let expected = if (1.0..=outer).contains(&r) {
                PixelClass::JuliaBand
            } else {
                PixelClass::Fatou
            };
            (julia.classes[k] != expected).then(|| ViolationSample {
                z,
                class_before: expected,
                class_after: julia.classes[k],
            })
        })
        .collect();
    let (violations, samples) = first_samples(hits);
    let residual = ratio(violations, g.len());
    let threshold = cfg.thresholds.annulus;
    Ok(CheckReport {
        name: "annulus-reference".to_string(),
        label: spec.label().to_string(),
        params: format!("{} mode={}", params_echo(Some(&jp.escape), cfg.band), jp.mode.name()),
        residual,
        threshold,
        verdict: verdict(residual, threshold),
        violation_samples: samples,
        notes: Vec::new(),
    })
}

/// Forward invariance of escaping-set candidates by direct reclassification:
/// draws `sample_count` candidate pixels, applies every generator to each and
/// reclassifies the images. A sampled point violates when any image is not a
/// candidate.
pub fn check_escaping_forward_invariance(
    spec: &SemigroupSpec,
    g: &GridSpec,
    p: &EscapeParams,
    cfg: &CheckConfig,
) -> Result<CheckReport> {
    let grid = approximate_escaping_set(spec, g, p)?;
    let mut candidates: Vec<usize> = (0..g.len())
        .filter(|&k| grid.classes[k] == PixelClass::Escaping)
        .collect();
    let mut rng = stream_rng(cfg.seed, Purpose::PointSelection, 0);
    let take = cfg.sample_count.min(candidates.len());
    let (chosen, _) = candidates.partial_shuffle(&mut rng, take);
    let chosen = chosen.to_vec();
    let words: Vec<Word> = words_up_to(spec, p.max_word_len)?.collect();
    let hits: Vec<Option<ViolationSample>> = chosen
        .par_iter()
        .map(|&k| {
            let z = g.center_of_index(k);
            spec.generators().iter().find_map(|f| {
                match classify_with_words(spec, &words, f.eval(z), p) {
                    SemigroupEscapeClass::EscapingCandidate => None,
                    other => Some(ViolationSample {
                        z,
                        class_before: PixelClass::Escaping,
                        class_after: other.pixel_class(),
                    }),
                }
            })
        })
        .collect();
    let (violations, samples) = first_samples(hits);
    let residual = ratio(violations, chosen.len());
    let mut notes = vec![format!(
        "{} candidates sampled of {}",
        chosen.len(),
        candidates.len()
    )];
    if let Some(n) = escape_note(spec) {
        notes.push(n.to_string());
    }
    let threshold = cfg.thresholds.sampled_forward;
    Ok(CheckReport {
        name: "forward-invariance-escaping-sampled".to_string(),
        label: spec.label().to_string(),
        params: format!("{} samples={} seed={}", p.echo(), cfg.sample_count, cfg.seed),
        residual,
        threshold,
        verdict: verdict(residual, threshold),
        violation_samples: samples,
        notes,
    })
}

/// The commutator gate as a report. Informational; the residual is the
/// largest defect clamped to `[0, 1]`.
pub fn commutator_report(spec: &SemigroupSpec, cfg: &CheckConfig) -> CheckReport {
    let gate = abelian_gate(spec, cfg);
    CheckReport {
        name: "commutator-gate".to_string(),
        label: spec.label().to_string(),
        params: format!(
            "disc={},{} count={} seed={}",
            crate::catalog::render_complex(cfg.gate.center),
            cfg.gate.radius,
            cfg.gate.count,
            cfg.seed
        ),
        residual: gate.max_defect.clamp(0.0, 1.0),
        threshold: cfg.gate.tolerance,
        verdict: Verdict::Informational,
        violation_samples: Vec::new(),
        notes: vec![gate.note],
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridMeta;
    use num_complex::Complex64;

    fn c(re: f64, im: f64) -> ComplexPoint {
        Complex64::new(re, im)
    }

    fn square() -> SemigroupSpec {
        SemigroupSpec::new("z2", vec![MapDescriptor::power(2, c(1.0, 0.0)).unwrap()]).unwrap()
    }

    fn annulus() -> SemigroupSpec {
        annulus_semigroup(c(2.0, 0.0)).unwrap()
    }

    fn tcheb() -> SemigroupSpec {
        SemigroupSpec::new(
            "tcheb",
            vec![
                MapDescriptor::tchebyshev(2).unwrap(),
                MapDescriptor::tchebyshev(3).unwrap(),
            ],
        )
        .unwrap()
    }

    fn small_params() -> JuliaParams {
        JuliaParams::default()
    }

    #[test]
    fn empty_class_is_vacuous() {
        let g = GridSpec::square(2.0, 30).unwrap();
        let grid = IndicatorGrid::filled(g, PixelClass::Fatou, GridMeta::new("x", 0));
        let r = check_forward_invariance(&grid, PixelClass::Escaping, &square(), &CheckConfig::default());
        assert_eq!(r.residual, 0.0);
        assert_eq!(r.verdict, Verdict::Pass);
    }

    #[test]
    fn whole_window_is_backward_invariant() {
        let g = GridSpec::square(2.0, 30).unwrap();
        let grid = IndicatorGrid::filled(g, PixelClass::Fatou, GridMeta::new("x", 0));
        let r = check_backward_invariance(&grid, PixelClass::Fatou, &annulus(), &CheckConfig::default());
        assert_eq!(r.residual, 0.0);
    }

    #[test]
    fn annulus_fatou_is_forward_but_not_backward_invariant() {
        let g = GridSpec::square(3.0, 240).unwrap();
        let cfg = CheckConfig::default();
        let j = approximate_julia_union(&annulus(), &g, &small_params()).unwrap();
        let f = fatou_indicator(&j);
        let fwd = check_forward_invariance(&f, PixelClass::JuliaBand, &annulus(), &cfg);
        // fatou_indicator swapped labels, so test the complement of the band
        let fwd_direct = check_forward_invariance(&j, PixelClass::Fatou, &annulus(), &cfg);
        assert!(fwd_direct.residual < 0.01, "{}", fwd_direct.residual);
        assert_eq!(fwd.residual, fwd_direct.residual);
        let back = check_backward_invariance(&j, PixelClass::Fatou, &annulus(), &cfg);
        assert!(back.residual > 0.02, "{}", back.residual);
        assert_eq!(back.verdict, Verdict::Informational);
    }

    #[test]
    fn square_escaping_set_is_forward_invariant() {
        let g = GridSpec::square(2.0, 200).unwrap();
        let e = approximate_escaping_set(&square(), &g, &EscapeParams::default()).unwrap();
        let r = check_forward_invariance(&e, PixelClass::Escaping, &square(), &CheckConfig::default());
        assert!(r.residual < 0.01, "{}", r.residual);
    }

    #[test]
    fn tcheb_fatou_backward_invariance_passes_gate() {
        let g = GridSpec::square(2.0, 200).unwrap();
        let cfg = CheckConfig::default();
        let j = approximate_julia_union(&tcheb(), &g, &small_params()).unwrap();
        let r = check_backward_invariance(&j, PixelClass::Fatou, &tcheb(), &cfg);
        assert_ne!(r.verdict, Verdict::Informational);
        assert!(r.residual < 0.02, "{}", r.residual);
    }

    #[test]
    fn cyclic_intersection_equals_complete_invariance() {
        let g = GridSpec::square(2.0, 160).unwrap();
        let cfg = CheckConfig::default();
        let e = approximate_escaping_set(&square(), &g, &EscapeParams::default()).unwrap();
        let a = check_intersection_identity(&e, PixelClass::Escaping, &square(), &cfg);
        let b = check_complete_invariance(&e, PixelClass::Escaping, &square().generators()[0], &cfg);
        assert_eq!(a.residual.to_bits(), b.residual.to_bits());
        assert!(a.residual < 0.02);
        assert_eq!(a.verdict, Verdict::Pass);
    }

    #[test]
    fn union_identity_examples() {
        let cfg = CheckConfig::default();
        let g = GridSpec::square(3.0, 240).unwrap();
        let j = approximate_julia_union(&annulus(), &g, &small_params()).unwrap();
        assert!(check_union_identity(&j, &annulus(), &cfg).residual < 0.02);
        let g = GridSpec::square(2.0, 200).unwrap();
        let j = approximate_julia_union(&square(), &g, &small_params()).unwrap();
        assert!(check_union_identity(&j, &square(), &cfg).residual < 0.02);
    }

    #[test]
    fn abelian_equalities_gate() {
        let g = GridSpec::square(2.0, 120).unwrap();
        let cfg = CheckConfig::default();
        let r = check_abelian_equalities(&annulus(), &g, &small_params(), &cfg).unwrap();
        assert_eq!(r.verdict, Verdict::Informational);
        let r = check_abelian_equalities(&square(), &g, &small_params(), &cfg).unwrap();
        assert_eq!(r.residual, 0.0);
        assert_eq!(r.verdict, Verdict::Pass);
    }

    #[test]
    fn cyclic_inclusions_are_exact() {
        let g = GridSpec::square(2.0, 120).unwrap();
        let s = square();
        let w = s.word(vec![0]).unwrap();
        let r = check_inclusions(&s, &w, &g, &small_params(), &CheckConfig::default()).unwrap();
        assert_eq!(r.residual, 0.0);
    }

    #[test]
    fn annulus_reference_rejects_small_a() {
        let g = GridSpec::square(3.0, 10).unwrap();
        assert!(matches!(
            annulus_reference_check(c(1.0, 0.0), &g, &small_params(), &CheckConfig::default()),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn annulus_reference_with_everything_excluded() {
        let g = GridSpec::square(3.0, 60).unwrap();
        let cfg = CheckConfig {
            band: 1000,
            ..CheckConfig::default()
        };
        let r = annulus_reference_check(c(2.0, 0.0), &g, &small_params(), &cfg).unwrap();
        assert_eq!(r.residual, 0.0);
    }

    #[test]
    fn wider_band_never_raises_residuals() {
        let g = GridSpec::square(3.0, 120).unwrap();
        let j = approximate_julia_union(&annulus(), &g, &small_params()).unwrap();
        let mut last = [f64::INFINITY; 4];
        for band in 0..5 {
            let cfg = CheckConfig {
                band,
                ..CheckConfig::default()
            };
            let now = [
                check_forward_invariance(&j, PixelClass::Fatou, &annulus(), &cfg).residual,
                check_backward_invariance(&j, PixelClass::Fatou, &annulus(), &cfg).residual,
                check_intersection_identity(&j, PixelClass::Fatou, &annulus(), &cfg).residual,
                check_union_identity(&j, &annulus(), &cfg).residual,
            ];
            for (n, l) in now.iter().zip(&last) {
                assert!((0.0..=1.0).contains(n));
                assert!(n <= l, "band {band}: {now:?} vs {last:?}");
            }
            last = now;
        }
    }

    #[test]
    fn sample_lists_are_capped() {
        let g = GridSpec::square(3.0, 120).unwrap();
        let j = approximate_julia_union(&annulus(), &g, &small_params()).unwrap();
        let r = check_backward_invariance(&j, PixelClass::Fatou, &annulus(), &CheckConfig::default());
        assert_eq!(r.violation_samples.len(), MAX_VIOLATION_SAMPLES);
    }
}
