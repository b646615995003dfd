use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::rng::{stream_rng, Purpose};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SampleRegion {
    Disc { center: Complex64, radius: f64 },
    Window(GridSpec),
}

/// Seeded uniform point sample over a disc or a grid window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleSpec {
    pub region: SampleRegion,
    pub count: usize,
    pub seed: u64,
}

impl SampleSpec {
    pub fn disc(center: Complex64, radius: f64, count: usize, seed: u64) -> Self {
        SampleSpec {
            region: SampleRegion::Disc { center, radius },
            count,
            seed,
        }
    }

    pub fn points(&self) -> Result<Vec<Complex64>> {
        if self.count == 0 {
            return Err(Error::invalid("sample count must be at least 1"));
        }
        let mut rng = stream_rng(self.seed, Purpose::Sample, 0);
        let pts = match self.region {
            SampleRegion::Disc { center, radius } => {
                if !(radius > 0.0) || !radius.is_finite() {
                    return Err(Error::invalid(format!("sample disc radius {radius}")));
                }
                (0..self.count)
                    .map(|_| {
                        let r = radius * rng.gen::<f64>().sqrt();
                        let t = std::f64::consts::TAU * rng.gen::<f64>();
                        center + Complex64::from_polar(r, t)
                    })
                    .collect()
            }
            SampleRegion::Window(g) => (0..self.count)
                .map(|_| {
                    let re = g.re_min + (g.re_max - g.re_min) * rng.gen::<f64>();
                    let im = g.im_min + (g.im_max - g.im_min) * rng.gen::<f64>();
                    Complex64::new(re, im)
                })
                .collect(),
        };
        Ok(pts)
    }
}
