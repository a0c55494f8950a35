//! Segmentation energies from PPM/PGM rasters.

use std::collections::VecDeque;
use std::path::Path;

use dsfm_core::potentials::{EdgeCutPotential, RegionPotential, SquarePotential, UnaryPotential};
use dsfm_core::{DecomposableInstance, DsfmError, Potential};
use image::{ImageReader, RgbImage};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};

/// RGB raster with channels in `[0, 1]`, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Raster {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<[f64; 3]>,
}

impl Raster {
    pub fn from_rgb(img: &RgbImage) -> Self {
        let pixels = img
            .pixels()
            .map(|p| {
                [
                    p[0] as f64 / 255.0,
                    p[1] as f64 / 255.0,
                    p[2] as f64 / 255.0,
                ]
            })
            .collect();
        Raster {
            width: img.width() as usize,
            height: img.height() as usize,
            pixels,
        }
    }

    pub fn to_rgb(&self) -> RgbImage {
        RgbImage::from_fn(self.width as u32, self.height as u32, |x, y| {
            let c = self.pixels[y as usize * self.width + x as usize];
            image::Rgb(c.map(|v| (v.clamp(0.0, 1.0) * 255.0).round() as u8))
        })
    }

    pub fn id(&self, x: usize, y: usize) -> usize {
        y * self.width + x
    }

    pub fn len(&self) -> usize {
        self.pixels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pixels.is_empty()
    }

    /// Mean color of the centered box spanning the middle third in each axis.
    fn center_mean(&self) -> [f64; 3] {
        let (x0, x1) = (self.width / 3, (2 * self.width).div_ceil(3));
        let (y0, y1) = (self.height / 3, (2 * self.height).div_ceil(3));
        mean(
            (y0..y1)
                .flat_map(|y| (x0..x1).map(move |x| (x, y)))
                .map(|(x, y)| self.pixels[self.id(x, y)]),
        )
    }

    fn border_mean(&self) -> [f64; 3] {
        let (w, h) = (self.width, self.height);
        mean(
            (0..h)
                .flat_map(|y| (0..w).map(move |x| (x, y)))
                .filter(|&(x, y)| x == 0 || y == 0 || x + 1 == w || y + 1 == h)
                .map(|(x, y)| self.pixels[self.id(x, y)]),
        )
    }
}

fn mean(colors: impl Iterator<Item = [f64; 3]>) -> [f64; 3] {
    let mut sum = [0.0; 3];
    let mut k = 0usize;
    for c in colors {
        for j in 0..3 {
            sum[j] += c[j];
        }
        k += 1;
    }
    sum.map(|s| s / k.max(1) as f64)
}

fn sq_dist(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a.iter().zip(b).map(|(p, q)| (p - q) * (p - q)).sum()
}

/// Reads a binary PPM (P6) or PGM (P5) file.
pub fn load_raster(path: impl AsRef<Path>) -> Result<Raster> {
    let path = path.as_ref();
    let reader = ImageReader::open(path)
        .map_err(|e| HarnessError::io(path, e))?
        .with_guessed_format()
        .map_err(|e| HarnessError::io(path, e))?;
    let img = reader
        .decode()
        .map_err(|e| HarnessError::Image(format!("{}: {e}", path.display())))?;
    Ok(Raster::from_rgb(&img.to_rgb8()))
}

pub fn save_raster(path: impl AsRef<Path>, raster: &Raster) -> Result<()> {
    let path = path.as_ref();
    raster
        .to_rgb()
        .save_with_format(path, image::ImageFormat::Pnm)
        .map_err(|e| HarnessError::Image(format!("{}: {e}", path.display())))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IngestParams {
    pub unary_scale: f64,
    pub lambda_pair: f64,
    /// Scale of the 2×2 square potentials; zero leaves them out.
    pub lambda_square: f64,
    pub regions: usize,
    /// Upper bound on region size.
    pub region_size: usize,
    /// Foreground reference color in `[0, 1]`; defaults to the center mean.
    pub foreground: Option<[f64; 3]>,
    /// Background reference color; defaults to the border mean.
    pub background: Option<[f64; 3]>,
    pub seed: u64,
}

impl Default for IngestParams {
    fn default() -> Self {
        IngestParams {
            unary_scale: 1.0,
            lambda_pair: 1.0,
            lambda_square: 0.0,
            regions: 0,
            region_size: 0,
            foreground: None,
            background: None,
            seed: 0,
        }
    }
}

/// 8-neighbor pairs `(i, j)` with `i < j`: right, down, down-right, down-left.
pub fn neighbor_pairs(width: usize, height: usize) -> Vec<(usize, usize)> {
    let mut pairs = Vec::new();
    for y in 0..height {
        for x in 0..width {
            let i = y * width + x;
            if x + 1 < width {
                pairs.push((i, i + 1));
            }
            if y + 1 < height {
                pairs.push((i, i + width));
                if x + 1 < width {
                    pairs.push((i, i + width + 1));
                }
                if x > 0 {
                    pairs.push((i, i + width - 1));
                }
            }
        }
    }
    pairs
}

/// Non-overlapping 2×2 blocks at even offsets, ids in cycle order.
pub fn square_cycles(width: usize, height: usize) -> Vec<[usize; 4]> {
    let mut out = Vec::with_capacity((width / 2) * (height / 2));
    for y in (0..height.saturating_sub(1)).step_by(2) {
        for x in (0..width.saturating_sub(1)).step_by(2) {
            let tl = y * width + x;
            out.push([tl, tl + 1, tl + width + 1, tl + width]);
        }
    }
    out
}

/// Disjoint 4-connected regions grown breadth-first from random seed pixels.
pub fn grow_regions(
    width: usize,
    height: usize,
    count: usize,
    max_size: usize,
    seed: u64,
) -> Vec<Vec<usize>> {
    let n = width * height;
    if count == 0 || max_size < 2 {
        return Vec::new();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut taken = vec![false; n];
    let mut seeds: Vec<usize> = (0..n).collect();
    seeds.shuffle(&mut rng);
    let mut regions = Vec::new();
    for s in seeds {
        if regions.len() == count {
            break;
        }
        if taken[s] {
            continue;
        }
        let target = rng.gen_range(max_size.div_ceil(2).max(2)..=max_size);
        let mut region = vec![s];
        taken[s] = true;
        let mut queue = VecDeque::from([s]);
        'grow: while let Some(p) = queue.pop_front() {
            let (x, y) = (p % width, p / width);
            let nbrs = [
                (x > 0).then(|| p - 1),
                (x + 1 < width).then(|| p + 1),
                (y > 0).then(|| p - width),
                (y + 1 < height).then(|| p + width),
            ];
            for q in nbrs.into_iter().flatten() {
                if region.len() == target {
                    break 'grow;
                }
                if !taken[q] {
                    taken[q] = true;
                    region.push(q);
                    queue.push_back(q);
                }
            }
        }
        if region.len() >= 2 {
            region.sort_unstable();
            regions.push(region);
        } else {
            taken[s] = false;
        }
    }
    regions
}

/// Unary, 8-neighbor pairwise, square and region potentials for a raster.
///
/// Potentials are emitted in that order, pixels in row-major order.
pub fn image_to_instance(raster: &Raster, params: &IngestParams) -> Result<DecomposableInstance> {
    let (w, h) = (raster.width, raster.height);
    if w < 2 || h < 2 || raster.pixels.len() != w * h {
        return Err(DsfmError::Input(format!("image must be at least 2×2, got {w}×{h}")).into());
    }
    for (name, v) in [
        ("unary_scale", params.unary_scale),
        ("lambda_pair", params.lambda_pair),
        ("lambda_square", params.lambda_square),
    ] {
        if !v.is_finite() || v < 0.0 {
            return Err(
                DsfmError::Input(format!("{name} must be finite and >= 0, got {v}")).into(),
            );
        }
    }
    let fg = params.foreground.unwrap_or_else(|| raster.center_mean());
    let bg = params.background.unwrap_or_else(|| raster.border_mean());

    let mut pots: Vec<Potential> = raster
        .pixels
        .iter()
        .enumerate()
        .map(|(i, c)| {
            UnaryPotential::new(i, params.unary_scale * (sq_dist(c, &fg) - sq_dist(c, &bg))).into()
        })
        .collect();

    let pairs = neighbor_pairs(w, h);
    let diffs: Vec<f64> = pairs
        .iter()
        .map(|&(i, j)| sq_dist(&raster.pixels[i], &raster.pixels[j]))
        .collect();
    let mean_diff = diffs.iter().sum::<f64>() / diffs.len() as f64;
    let beta = if mean_diff > 0.0 {
        1.0 / (2.0 * mean_diff)
    } else {
        0.0
    };
    for (&(i, j), d) in pairs.iter().zip(&diffs) {
        pots.push(EdgeCutPotential::new(i, j, params.lambda_pair * (-beta * d).exp())?.into());
    }

    if params.lambda_square > 0.0 {
        for cycle in square_cycles(w, h) {
            pots.push(SquarePotential::new(cycle, params.lambda_square)?.into());
        }
    }
    for region in grow_regions(w, h, params.regions, params.region_size, params.seed) {
        pots.push(RegionPotential::new(region)?.into());
    }
    Ok(DecomposableInstance::new(w * h, pots)?)
}

/// Noisy image of a few random ellipses on a contrasting background.
pub fn random_blob_image(width: usize, height: usize, seed: u64) -> Raster {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let bg = [
        rng.gen_range(0.0..0.4),
        rng.gen_range(0.0..0.4),
        rng.gen_range(0.0..0.4),
    ];
    let fg = [
        rng.gen_range(0.6..1.0),
        rng.gen_range(0.6..1.0),
        rng.gen_range(0.6..1.0),
    ];
    let blobs: Vec<(f64, f64, f64, f64)> = (0..rng.gen_range(1..=3))
        .map(|_| {
            (
                rng.gen_range(0.2..0.8) * width as f64,
                rng.gen_range(0.2..0.8) * height as f64,
                rng.gen_range(0.15..0.35) * width as f64,
                rng.gen_range(0.15..0.35) * height as f64,
            )
        })
        .collect();
    let pixels = (0..height)
        .flat_map(|y| (0..width).map(move |x| (x as f64 + 0.5, y as f64 + 0.5)))
        .map(|(x, y)| {
            let inside = blobs
                .iter()
                .any(|&(cx, cy, rx, ry)| ((x - cx) / rx).powi(2) + ((y - cy) / ry).powi(2) <= 1.0);
            let base = if inside { fg } else { bg };
            base.map(|c| (c + rng.gen_range(-0.15f64..0.15)).clamp(0.0, 1.0))
        })
        .collect();
    Raster {
        width,
        height,
        pixels,
    }
}
