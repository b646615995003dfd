use num_complex::Complex64;
use semidyn::grid::dilate;
use semidyn::julia::{backward_ifs_sample_chains, julia_band_for_words};
use semidyn::*;

fn annulus() -> SemigroupSpec {
    SemigroupSpec::new(
        "annulus",
        vec![
            MapDescriptor::power(2, Complex64::new(1.0, 0.0)).unwrap(),
            MapDescriptor::power(2, Complex64::new(2.0, 0.0)).unwrap(),
        ],
    )
    .unwrap()
}

fn band_hits(band: &[bool], g: &GridSpec, z: Complex64) -> bool {
    g.point_to_index(z).is_some_and(|k| band[k])
}

#[test]
fn ifs_cloud_lands_on_union_band() {
    let spec = annulus();
    let g = GridSpec::square(3.0, 600).unwrap();
    let julia = approximate_julia_union(&spec, &g, &JuliaParams::default()).unwrap();
    let band = julia.mask(PixelClass::JuliaBand);
    let cloud = backward_ifs_sample(&spec, 20_000, 100, 5).unwrap();

    let near = dilate(&band, g.width, g.height, 1);
    let on = cloud.points.iter().filter(|&&z| band_hits(&near, &g, z)).count();
    let agreement = on as f64 / cloud.points.len() as f64;
    assert!(agreement >= 0.95, "agreement {agreement}");

    // each sampled point maps into the band under some generator
    let near = dilate(&band, g.width, g.height, 2);
    let mapped = cloud
        .points
        .iter()
        .filter(|&&z| spec.generators().iter().any(|f| band_hits(&near, &g, f.eval(z))))
        .count();
    let invariance = mapped as f64 / cloud.points.len() as f64;
    assert!(invariance >= 0.99, "forward invariance {invariance}");
}

#[test]
fn union_band_grows_with_depth() {
    let spec = annulus();
    let g = GridSpec::square(3.0, 150).unwrap();
    for mode in [BandMode::Joint, BandMode::PerWord] {
        let mut prev: Option<Vec<bool>> = None;
        for l in 1..=4 {
            let p = JuliaParams {
                escape: EscapeParams::default().with_word_len(l),
                boundary_band: 2,
                mode,
            };
            let band = approximate_julia_union(&spec, &g, &p).unwrap().mask(PixelClass::JuliaBand);
            if let Some(prev) = &prev {
                for k in 0..band.len() {
                    assert!(!prev[k] || band[k], "{mode:?} L={l} pixel {k}");
                }
            }
            prev = Some(band);
        }
    }
}

#[test]
fn union_contains_every_word_band() {
    let spec = annulus();
    let g = GridSpec::square(3.0, 150).unwrap();
    let p = JuliaParams::default();
    let union = approximate_julia_union(&spec, &g, &p).unwrap().mask(PixelClass::JuliaBand);
    for w in words_up_to(&spec, 2).unwrap() {
        let single = julia_band_for_words(&spec, std::slice::from_ref(&w), &g, &p).mask(PixelClass::JuliaBand);
        let near = dilate(&union, g.width, g.height, p.boundary_band);
        let missing = (0..single.len()).filter(|&k| single[k] && !near[k]).count();
        assert_eq!(missing, 0, "word {w}");
    }
}

#[test]
fn chains_split_and_concatenate() {
    let spec = annulus();
    let four = backward_ifs_sample_chains(&spec, 1001, 30, 17, 4).unwrap();
    assert_eq!(four.points.len(), 1001);
    let again = backward_ifs_sample_chains(&spec, 1001, 30, 17, 4).unwrap();
    assert_eq!(four, again);
    let one = backward_ifs_sample(&spec, 251, 30, 17).unwrap();
    // chain 0 of the split run gets 251 points and uses the same stream
    assert_eq!(&four.points[..251], &one.points[..]);
}

#[test]
fn square_cloud_lies_on_the_circle() {
    let spec = SemigroupSpec::new("z2", vec![MapDescriptor::power(2, Complex64::new(1.0, 0.0)).unwrap()]).unwrap();
    let cloud = backward_ifs_sample(&spec, 10_000, 100, 1).unwrap();
    assert!(cloud.points.iter().all(|z| (z.norm() - 1.0).abs() < 1e-6));
}
