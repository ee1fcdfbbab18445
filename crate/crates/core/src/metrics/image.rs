//! Persistence images and the summed squared image error between them.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::persistence::PersistenceDiagram;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ImageConfig {
    /// Pixels along the persistence axis.
    pub height: usize,
    /// Pixels along the birth axis.
    pub width: usize,
    pub birth_range: (f64, f64),
    pub persistence_range: (f64, f64),
    pub sigma: f64,
    pub inf_cap: f64,
}

impl Default for ImageConfig {
    fn default() -> Self {
        ImageConfig {
            height: 20,
            width: 20,
            birth_range: (0.0, 1.0),
            persistence_range: (0.0, 1.0),
            sigma: 0.05,
            inf_cap: 1.0,
        }
    }
}

impl ImageConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidConfig(msg.to_string()));
        if self.height == 0 || self.width == 0 {
            return bad("image dimensions must be positive");
        }
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return bad("sigma must be positive and finite");
        }
        let ok = |(lo, hi): (f64, f64)| lo.is_finite() && hi.is_finite() && hi > lo;
        if !ok(self.birth_range) || !ok(self.persistence_range) {
            return bad("image bounds must be finite, non-empty intervals");
        }
        if self.persistence_range.1 <= 0.0 {
            return bad("persistence range must reach above zero");
        }
        Ok(())
    }
}

/// Row-major raster; row `r` spans the `r`-th persistence band from the
/// bottom, column `c` the `c`-th birth band.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PersistenceImage {
    pub height: usize,
    pub width: usize,
    pub pixels: Vec<f64>,
    pub config: ImageConfig,
}

impl PersistenceImage {
    pub fn zeros(config: ImageConfig) -> Self {
        PersistenceImage {
            height: config.height,
            width: config.width,
            pixels: vec![0.0; config.height * config.width],
            config,
        }
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.pixels[row * self.width + col]
    }

    pub fn sum(&self) -> f64 {
        self.pixels.iter().sum()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for row in self.pixels.chunks(self.width) {
            let line: Vec<String> = row.iter().map(|x| x.to_string()).collect();
            let _ = writeln!(out, "{}", line.join(","));
        }
        out
    }
}

fn normal_cdf(z: f64) -> f64 {
    0.5 * (1.0 + libm::erf(z / std::f64::consts::SQRT_2))
}

/// Gaussian mass of `N(center, sigma²)` in each of `n` equal bins of `range`.
fn bin_masses(center: f64, sigma: f64, (lo, hi): (f64, f64), n: usize) -> Vec<f64> {
    let step = (hi - lo) / n as f64;
    let mut cdf_prev = normal_cdf((lo - center) / sigma);
    (1..=n)
        .map(|k| {
            let edge = lo + step * k as f64;
            let cdf = normal_cdf((edge - center) / sigma);
            let mass = (cdf - cdf_prev).max(0.0);
            cdf_prev = cdf;
            mass
        })
        .collect()
}

/// Rasterizes a diagram in (birth, persistence) coordinates. Each point is
/// weighted linearly by its persistence relative to the top of the
/// persistence range and spread by an isotropic Gaussian integrated over
/// each pixel.
pub fn persistence_image(d: &PersistenceDiagram, cfg: &ImageConfig) -> Result<PersistenceImage> {
    cfg.validate()?;
    let mut img = PersistenceImage::zeros(*cfg);
    for &(b, death) in &d.capped(cfg.inf_cap) {
        let pers = death - b;
        let weight = (pers / cfg.persistence_range.1).max(0.0);
        if weight == 0.0 {
            continue;
        }
        let cols = bin_masses(b, cfg.sigma, cfg.birth_range, cfg.width);
        let rows = bin_masses(pers, cfg.sigma, cfg.persistence_range, cfg.height);
        for (r, &ry) in rows.iter().enumerate() {
            if ry == 0.0 {
                continue;
            }
            let line = &mut img.pixels[r * cfg.width..(r + 1) * cfg.width];
            for (px, &cx) in line.iter_mut().zip(&cols) {
                *px += weight * ry * cx;
            }
        }
    }
    Ok(img)
}

/// Summed squared pixel difference.
pub fn pie(a: &PersistenceImage, b: &PersistenceImage) -> Result<f64> {
    if a.height != b.height || a.width != b.width {
        return Err(Error::DimensionMismatch(format!(
            "image {}x{} vs {}x{}",
            a.height, a.width, b.height, b.width
        )));
    }
    Ok(a.pixels
        .iter()
        .zip(&b.pixels)
        .map(|(x, y)| (x - y) * (x - y))
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::FiltrationWeight;
    use crate::persistence::PdPoint;

    fn w(x: f64) -> FiltrationWeight {
        FiltrationWeight::new(x).unwrap()
    }

    fn single(b: f64, d: f64) -> PersistenceDiagram {
        PersistenceDiagram::new(0, vec![PdPoint::finite(w(b), w(d))])
    }

    /// Midpoint-rule mass of the 2-D Gaussian inside the unit square.
    fn quadrature_mass(cb: f64, cp: f64, sigma: f64) -> f64 {
        let n = 2000;
        let h = 1.0 / n as f64;
        let g1 = |x: f64, c: f64| {
            (-(x - c) * (x - c) / (2.0 * sigma * sigma)).exp()
                / (sigma * (2.0 * std::f64::consts::PI).sqrt())
        };
        let mx: f64 = (0..n).map(|i| g1((i as f64 + 0.5) * h, cb) * h).sum();
        let my: f64 = (0..n).map(|i| g1((i as f64 + 0.5) * h, cp) * h).sum();
        mx * my
    }

    #[test]
    fn empty_is_zero() {
        let img =
            persistence_image(&PersistenceDiagram::empty(0), &ImageConfig::default()).unwrap();
        assert!(img.pixels.iter().all(|&x| x == 0.0));
        assert_eq!(img.pixels.len(), 400);
    }

    #[test]
    fn mass_and_peak() {
        let cfg = ImageConfig::default();
        // birth 0.325 and persistence 0.425 are pixel centers on the 20x20 grid
        let d = single(0.325, 0.75);
        let img = persistence_image(&d, &cfg).unwrap();
        let weight = 0.425;
        let expected = weight * quadrature_mass(0.325, 0.425, cfg.sigma);
        assert!(
            (img.sum() - expected).abs() < 1e-6,
            "{} vs {}",
            img.sum(),
            expected
        );
        let (argmax, _) =
            img.pixels.iter().enumerate().fold(
                (0, f64::MIN),
                |acc, (i, &x)| if x > acc.1 { (i, x) } else { acc },
            );
        assert_eq!((argmax / 20, argmax % 20), (8, 6));
    }

    #[test]
    fn near_edge_loses_mass() {
        let cfg = ImageConfig::default();
        let img = persistence_image(&single(0.0, 0.5), &cfg).unwrap();
        let expected = 0.5 * quadrature_mass(0.0, 0.5, cfg.sigma);
        assert!((img.sum() - expected).abs() < 1e-6);
        assert!(img.sum() < 0.5 * 0.51);
    }

    #[test]
    fn linear_in_multiplicity() {
        let cfg = ImageConfig::default();
        let one = persistence_image(&single(0.2, 0.7), &cfg).unwrap();
        let mut two_pd = single(0.2, 0.7);
        two_pd.points.push(two_pd.points[0]);
        let two = persistence_image(&two_pd, &cfg).unwrap();
        for (a, b) in one.pixels.iter().zip(&two.pixels) {
            assert!((2.0 * a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn pie_definition() {
        let cfg = ImageConfig {
            height: 2,
            width: 2,
            ..ImageConfig::default()
        };
        let a = PersistenceImage::zeros(cfg);
        let mut b = PersistenceImage::zeros(cfg);
        assert_eq!(pie(&a, &a).unwrap(), 0.0);
        b.pixels[3] = 3.0;
        assert_eq!(pie(&a, &b).unwrap(), 9.0);
        let c = PersistenceImage::zeros(ImageConfig { width: 3, ..cfg });
        assert!(pie(&a, &c).is_err());
    }

    #[test]
    fn invalid_config() {
        let d = PersistenceDiagram::empty(0);
        for cfg in [
            ImageConfig {
                sigma: 0.0,
                ..Default::default()
            },
            ImageConfig {
                height: 0,
                ..Default::default()
            },
            ImageConfig {
                birth_range: (1.0, 1.0),
                ..Default::default()
            },
        ] {
            assert!(persistence_image(&d, &cfg).is_err());
        }
    }

    #[test]
    fn csv_shape() {
        let cfg = ImageConfig {
            height: 2,
            width: 3,
            ..Default::default()
        };
        let csv = PersistenceImage::zeros(cfg).to_csv();
        assert_eq!(csv, "0,0,0\n0,0,0\n");
    }
}
