//! Synthetic dataset families and grayscale-image ingestion.
//!
//! The 2D families mirror the usual benchmark shapes: crescents, ellipse
//! boundaries, nested ellipses, Gaussian clouds (uniform weights on random
//! positions), a Cauchy density and Dirichlet weights on grids, and
//! Dirichlet weights on uniform positions. Two 3D families (torso-like
//! extruded ellipses and pentagonal prisms) cover the volumetric case. The
//! exact shape parameters behind the published pictures are not available;
//! the ranges below are this crate's documented defaults, chosen so that
//! structured families are easy for resampling and the Dirichlet families
//! are hard.
//!
//! Images come in and out as PGM (P2 and P5): pixel intensities become
//! probability weights on grid-cell centers in `[0,1]²`, and measures are
//! binned back onto a grid to render.

use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use rand::Rng;

use crate::error::{Error, Result};
use crate::measures::{DiscreteMeasure, Points};
use crate::rng::{derive_seed, dirichlet, rng_from_seed, standard_normal, WbRng};

/// Synthetic family names.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Family {
    Crescents,
    Ellipses,
    NestedEllipses,
    MultiNestedEllipses,
    Gaussians,
    CauchyGrid,
    DirichletGrid,
    DirichletUniform,
    Torsos,
    PentagonalPrisms,
}

impl Family {
    pub const ALL: [Family; 10] = [
        Family::Crescents,
        Family::Ellipses,
        Family::NestedEllipses,
        Family::MultiNestedEllipses,
        Family::Gaussians,
        Family::CauchyGrid,
        Family::DirichletGrid,
        Family::DirichletUniform,
        Family::Torsos,
        Family::PentagonalPrisms,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Family::Crescents => "crescents",
            Family::Ellipses => "ellipses",
            Family::NestedEllipses => "nested-ellipses",
            Family::MultiNestedEllipses => "multi-nested-ellipses",
            Family::Gaussians => "gaussians",
            Family::CauchyGrid => "cauchy-grid",
            Family::DirichletGrid => "dirichlet-grid",
            Family::DirichletUniform => "dirichlet-uniform",
            Family::Torsos => "torsos",
            Family::PentagonalPrisms => "pentagonal-prisms",
        }
    }

    /// Ambient dimension of the family.
    pub fn dim(&self) -> usize {
        match self {
            Family::Torsos | Family::PentagonalPrisms => 3,
            _ => 2,
        }
    }

    /// Grid families put `M` atoms on a fixed √M × √M grid with density
    /// weights; point-cloud families use `M` uniform-weight points.
    pub fn is_grid(&self) -> bool {
        matches!(self, Family::CauchyGrid | Family::DirichletGrid)
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Family::ALL
            .iter()
            .copied()
            .find(|f| f.name() == s)
            .ok_or_else(|| Error::UnknownFamily(s.to_string()))
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Generator parameters. `Default` gives the documented desk-scale setup.
#[derive(Clone, Debug)]
pub struct DatasetSpec {
    pub family: Family,
    /// Number of measures to generate.
    pub n_measures: usize,
    /// Atoms per measure; must be a perfect square for grid families.
    pub support_size: usize,
    pub seed: u64,
    /// Semi-axis / radius range for the shape families.
    pub axis_range: (f64, f64),
    /// Ring count for the nested families (ignored elsewhere).
    pub rings: usize,
    /// Dirichlet concentration for the weight families.
    pub concentration: f64,
}

impl DatasetSpec {
    pub fn new(family: Family, n_measures: usize, support_size: usize, seed: u64) -> Self {
        Self {
            family,
            n_measures,
            support_size,
            seed,
            axis_range: (0.08, 0.28),
            rings: if family == Family::MultiNestedEllipses { 4 } else { 2 },
            concentration: 1.0,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.n_measures == 0 || self.support_size == 0 {
            return Err(Error::InvalidParameter("need n ≥ 1 and m ≥ 1".into()));
        }
        let (lo, hi) = self.axis_range;
        if !(lo > 0.0 && hi >= lo) {
            return Err(Error::InvalidParameter(format!("bad axis range ({lo}, {hi})")));
        }
        if self.concentration <= 0.0 {
            return Err(Error::InvalidParameter("Dirichlet concentration must be positive".into()));
        }
        if self.rings == 0 {
            return Err(Error::InvalidParameter("need at least one ring".into()));
        }
        if self.family.is_grid() {
            let side = (self.support_size as f64).sqrt().round() as usize;
            if side * side != self.support_size {
                return Err(Error::InvalidParameter(format!(
                    "grid families need a square support size, got {}",
                    self.support_size
                )));
            }
        }
        Ok(())
    }
}

/// Generate `N` measures, each with exactly `M` atoms. Deterministic given
/// the spec's seed; measure `i` draws from an independently derived stream.
pub fn generate(spec: &DatasetSpec) -> Result<Vec<DiscreteMeasure>> {
    spec.validate()?;
    (0..spec.n_measures)
        .map(|i| {
            let mut rng = rng_from_seed(derive_seed(spec.seed, &[0xda7a, i as u64]));
            generate_one(spec, &mut rng)
        })
        .collect()
}

fn generate_one(spec: &DatasetSpec, rng: &mut WbRng) -> Result<DiscreteMeasure> {
    let m = spec.support_size;
    match spec.family {
        Family::Crescents => {
            let center = [0.35 + 0.3 * rng.random::<f64>(), 0.35 + 0.3 * rng.random::<f64>()];
            let outer = sample_range(rng, spec.axis_range);
            let inner = outer * (0.5 + 0.3 * rng.random::<f64>());
            let start = std::f64::consts::TAU * rng.random::<f64>();
            let span = std::f64::consts::PI * (0.6 + 0.6 * rng.random::<f64>());
            let mut points = Points::zeros(m, 2);
            for k in 0..m {
                let angle = start + span * rng.random::<f64>();
                // Area-uniform radius inside the annulus sector.
                let r2 = inner * inner
                    + (outer * outer - inner * inner) * rng.random::<f64>();
                let radius = r2.sqrt();
                let row = points.row_mut(k);
                row[0] = center[0] + radius * angle.cos();
                row[1] = center[1] + radius * angle.sin();
            }
            DiscreteMeasure::uniform(points)
        }
        Family::Ellipses => {
            let shape = EllipseShape::sample(rng, spec.axis_range);
            let mut points = Points::zeros(m, 2);
            for k in 0..m {
                let angle = std::f64::consts::TAU * rng.random::<f64>();
                points.row_mut(k).copy_from_slice(&shape.boundary_point(angle, 1.0));
            }
            DiscreteMeasure::uniform(points)
        }
        Family::NestedEllipses | Family::MultiNestedEllipses => {
            let shape = EllipseShape::sample(rng, spec.axis_range);
            let mut points = Points::zeros(m, 2);
            for k in 0..m {
                let ring = k % spec.rings;
                let scale = (ring + 1) as f64 / spec.rings as f64;
                let angle = std::f64::consts::TAU * rng.random::<f64>();
                points.row_mut(k).copy_from_slice(&shape.boundary_point(angle, scale));
            }
            DiscreteMeasure::uniform(points)
        }
        Family::Gaussians => {
            let center = [0.35 + 0.3 * rng.random::<f64>(), 0.35 + 0.3 * rng.random::<f64>()];
            let sigma = 0.04 + 0.08 * rng.random::<f64>();
            let mut points = Points::zeros(m, 2);
            for k in 0..m {
                let row = points.row_mut(k);
                row[0] = center[0] + sigma * standard_normal(rng);
                row[1] = center[1] + sigma * standard_normal(rng);
            }
            DiscreteMeasure::uniform(points)
        }
        Family::CauchyGrid => {
            let points = unit_grid(m);
            let center = [0.3 + 0.4 * rng.random::<f64>(), 0.3 + 0.4 * rng.random::<f64>()];
            let gamma = 0.05 + 0.1 * rng.random::<f64>();
            let weights: Vec<f64> = points
                .rows()
                .map(|row| bivariate_cauchy_density(row, &center, gamma))
                .collect();
            DiscreteMeasure::new(points, weights)
        }
        Family::DirichletGrid => {
            let points = unit_grid(m);
            let weights = dirichlet(rng, spec.concentration, m);
            DiscreteMeasure::new(points, weights)
        }
        Family::DirichletUniform => {
            let mut points = Points::zeros(m, 2);
            for k in 0..m {
                let row = points.row_mut(k);
                row[0] = rng.random();
                row[1] = rng.random();
            }
            let weights = dirichlet(rng, spec.concentration, m);
            DiscreteMeasure::new(points, weights)
        }
        Family::Torsos => {
            // Extruded ellipse with a sinusoidal waist.
            let center = [0.35 + 0.3 * rng.random::<f64>(), 0.35 + 0.3 * rng.random::<f64>()];
            let a = sample_range(rng, spec.axis_range);
            let b = sample_range(rng, spec.axis_range);
            let height = 0.5 + 0.4 * rng.random::<f64>();
            let waist = 0.1 + 0.2 * rng.random::<f64>();
            let z0 = 0.2 * rng.random::<f64>();
            let mut points = Points::zeros(m, 3);
            for k in 0..m {
                let angle = std::f64::consts::TAU * rng.random::<f64>();
                let t = rng.random::<f64>();
                let pinch = 1.0 - waist * (std::f64::consts::PI * t).sin();
                let row = points.row_mut(k);
                row[0] = center[0] + a * pinch * angle.cos();
                row[1] = center[1] + b * pinch * angle.sin();
                row[2] = z0 + height * t;
            }
            DiscreteMeasure::uniform(points)
        }
        Family::PentagonalPrisms => {
            let center = [0.35 + 0.3 * rng.random::<f64>(), 0.35 + 0.3 * rng.random::<f64>()];
            let radius = sample_range(rng, spec.axis_range);
            let rotation = std::f64::consts::TAU * rng.random::<f64>();
            let height = 0.5 + 0.4 * rng.random::<f64>();
            let z0 = 0.2 * rng.random::<f64>();
            // Pentagon vertices.
            let verts: Vec<[f64; 2]> = (0..5)
                .map(|v| {
                    let angle = rotation + std::f64::consts::TAU * v as f64 / 5.0;
                    [center[0] + radius * angle.cos(), center[1] + radius * angle.sin()]
                })
                .collect();
            let mut points = Points::zeros(m, 3);
            for k in 0..m {
                let edge = rng.random_range(0..5);
                let t = rng.random::<f64>();
                let (p, q) = (verts[edge], verts[(edge + 1) % 5]);
                let row = points.row_mut(k);
                row[0] = p[0] + t * (q[0] - p[0]);
                row[1] = p[1] + t * (q[1] - p[1]);
                row[2] = z0 + height * rng.random::<f64>();
            }
            DiscreteMeasure::uniform(points)
        }
    }
}

fn sample_range(rng: &mut WbRng, (lo, hi): (f64, f64)) -> f64 {
    lo + (hi - lo) * rng.random::<f64>()
}

struct EllipseShape {
    center: [f64; 2],
    semi_axes: [f64; 2],
    rotation: f64,
}

impl EllipseShape {
    fn sample(rng: &mut WbRng, axis_range: (f64, f64)) -> Self {
        Self {
            center: [0.35 + 0.3 * rng.random::<f64>(), 0.35 + 0.3 * rng.random::<f64>()],
            semi_axes: [sample_range(rng, axis_range), sample_range(rng, axis_range)],
            rotation: std::f64::consts::PI * rng.random::<f64>(),
        }
    }

    fn boundary_point(&self, angle: f64, scale: f64) -> [f64; 2] {
        let (sin_r, cos_r) = self.rotation.sin_cos();
        let u = scale * self.semi_axes[0] * angle.cos();
        let v = scale * self.semi_axes[1] * angle.sin();
        [self.center[0] + u * cos_r - v * sin_r, self.center[1] + u * sin_r + v * cos_r]
    }

    /// `((x−c)·Rᵀ ./ axes)² summed`, 1 on the unit boundary.
    #[cfg(test)]
    fn implicit(&self, point: &[f64], scale: f64) -> f64 {
        let (sin_r, cos_r) = self.rotation.sin_cos();
        let dx = point[0] - self.center[0];
        let dy = point[1] - self.center[1];
        let u = dx * cos_r + dy * sin_r;
        let v = -dx * sin_r + dy * cos_r;
        let su = u / (scale * self.semi_axes[0]);
        let sv = v / (scale * self.semi_axes[1]);
        su * su + sv * sv
    }
}

/// √M × √M grid of cell centers covering `[0,1]²`.
fn unit_grid(m: usize) -> Points {
    let side = (m as f64).sqrt().round() as usize;
    debug_assert_eq!(side * side, m);
    let mut points = Points::zeros(m, 2);
    for r in 0..side {
        for c in 0..side {
            let row = points.row_mut(r * side + c);
            row[0] = (c as f64 + 0.5) / side as f64;
            row[1] = (r as f64 + 0.5) / side as f64;
        }
    }
    points
}

/// Unnormalized bivariate Cauchy density `γ (γ² + ‖x−c‖²)^{−3/2}`.
pub fn bivariate_cauchy_density(point: &[f64], center: &[f64], gamma: f64) -> f64 {
    let dx = point[0] - center[0];
    let dy = point[1] - center[1];
    gamma * (gamma * gamma + dx * dx + dy * dy).powf(-1.5)
}

/// Grayscale raster with intensities in `[0,1]`, row-major, row 0 on top.
#[derive(Clone, Debug, PartialEq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    pixels: Vec<f64>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, pixels: Vec<f64>) -> Self {
        assert_eq!(pixels.len(), width * height);
        Self { width, height, pixels }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixel(&self, row: usize, col: usize) -> f64 {
        self.pixels[row * self.width + col]
    }

    pub fn pixels(&self) -> &[f64] {
        &self.pixels
    }

    /// Parse PGM, both ASCII (P2) and binary (P5); 8- and 16-bit maxval.
    pub fn read_pgm<R: Read>(mut input: R) -> Result<Self> {
        let mut data = Vec::new();
        input.read_to_end(&mut data)?;
        let parse_err = |message: &str| Error::Parse { line: 0, message: message.to_string() };
        if data.len() < 2 {
            return Err(parse_err("truncated PGM"));
        }
        let magic = &data[..2];
        let binary = match magic {
            b"P5" => true,
            b"P2" => false,
            _ => return Err(parse_err("not a PGM file (expected P2 or P5)")),
        };
        // Header tokens: width, height, maxval; '#' starts a comment.
        let mut pos = 2;
        let mut header = [0usize; 3];
        for slot in header.iter_mut() {
            // Skip whitespace and comments.
            loop {
                while pos < data.len() && data[pos].is_ascii_whitespace() {
                    pos += 1;
                }
                if pos < data.len() && data[pos] == b'#' {
                    while pos < data.len() && data[pos] != b'\n' {
                        pos += 1;
                    }
                } else {
                    break;
                }
            }
            let start = pos;
            while pos < data.len() && data[pos].is_ascii_digit() {
                pos += 1;
            }
            if start == pos {
                return Err(parse_err("malformed PGM header"));
            }
            *slot = std::str::from_utf8(&data[start..pos])
                .unwrap()
                .parse()
                .map_err(|_| parse_err("bad PGM header number"))?;
        }
        let [width, height, maxval] = header;
        if width == 0 || height == 0 || maxval == 0 || maxval > 65535 {
            return Err(parse_err("unsupported PGM dimensions"));
        }
        let count = width * height;
        let scale = 1.0 / maxval as f64;
        let mut pixels = Vec::with_capacity(count);
        if binary {
            pos += 1; // single whitespace after maxval
            let wide = maxval > 255;
            let need = count * if wide { 2 } else { 1 };
            if data.len() < pos + need {
                return Err(parse_err("truncated PGM payload"));
            }
            for i in 0..count {
                let value = if wide {
                    u16::from_be_bytes([data[pos + 2 * i], data[pos + 2 * i + 1]]) as f64
                } else {
                    data[pos + i] as f64
                };
                pixels.push(value * scale);
            }
        } else {
            let text = std::str::from_utf8(&data[pos..])
                .map_err(|_| parse_err("non-UTF8 ASCII PGM payload"))?;
            for token in text.split_ascii_whitespace().take(count) {
                let value: f64 =
                    token.parse().map_err(|_| parse_err("bad ASCII PGM sample"))?;
                pixels.push(value * scale);
            }
            if pixels.len() != count {
                return Err(parse_err("truncated ASCII PGM payload"));
            }
        }
        Ok(Self { width, height, pixels })
    }

    /// Write binary PGM (P5, maxval 255).
    pub fn write_pgm<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "P5")?;
        writeln!(out, "{} {}", self.width, self.height)?;
        writeln!(out, "255")?;
        let bytes: Vec<u8> = self
            .pixels
            .iter()
            .map(|&p| (p.clamp(0.0, 1.0) * 255.0).round() as u8)
            .collect();
        out.write_all(&bytes)?;
        Ok(())
    }
}

/// Turn a grayscale raster into a probability measure: pixel centers are
/// scaled into `[0,1]²` and weights are proportional to intensity. Pixels
/// with zero intensity or intensity below `drop_below` never become atoms.
pub fn from_image(image: &GrayImage, drop_below: f64) -> Result<DiscreteMeasure> {
    let mut points = Points::zeros(0, 2);
    let mut weights = Vec::new();
    for r in 0..image.height {
        for c in 0..image.width {
            let intensity = image.pixel(r, c);
            if intensity <= 0.0 || intensity < drop_below {
                continue;
            }
            points.push_row(&[
                (c as f64 + 0.5) / image.width as f64,
                (r as f64 + 0.5) / image.height as f64,
            ]);
            weights.push(intensity);
        }
    }
    if weights.is_empty() {
        return Err(Error::BlackImage);
    }
    DiscreteMeasure::new(points, weights)
}

/// Bin a 2D measure onto a `grid_side × grid_side` raster.
///
/// Mass lands in the nearest cell; coordinates outside `[0,1]²` are clamped
/// and counted. Intensities are scaled so the brightest cell is 1; before
/// scaling the cells hold the measure's weights exactly.
pub fn to_image(measure: &DiscreteMeasure, grid_side: usize) -> Result<(GrayImage, usize)> {
    if measure.dim() != 2 {
        return Err(Error::DimensionMismatch(measure.dim(), 2));
    }
    assert!(grid_side >= 1);
    let mut mass = vec![0.0f64; grid_side * grid_side];
    let mut clamped = 0usize;
    for k in 0..measure.len() {
        let point = measure.point(k);
        let mut cell = [0usize; 2];
        for (d, &coord) in point.iter().enumerate() {
            if !(0.0..=1.0).contains(&coord) {
                clamped += 1;
            }
            let scaled = (coord.clamp(0.0, 1.0) * grid_side as f64).floor() as usize;
            cell[d] = scaled.min(grid_side - 1);
        }
        // x is the column axis, y the row axis.
        mass[cell[1] * grid_side + cell[0]] += measure.weights()[k];
    }
    let total: f64 = mass.iter().sum();
    debug_assert!((total - 1.0).abs() <= 1e-12, "mass lost in binning: {total}");
    let peak = mass.iter().fold(0.0f64, |a, &v| a.max(v));
    let pixels: Vec<f64> = mass.iter().map(|&v| if peak > 0.0 { v / peak } else { 0.0 }).collect();
    Ok((GrayImage::new(grid_side, grid_side, pixels), clamped))
}

/// Raw binned mass (no peak scaling), for exact round-trip checks.
pub fn bin_mass(measure: &DiscreteMeasure, grid_side: usize) -> Result<Vec<f64>> {
    if measure.dim() != 2 {
        return Err(Error::DimensionMismatch(measure.dim(), 2));
    }
    let mut mass = vec![0.0f64; grid_side * grid_side];
    for k in 0..measure.len() {
        let point = measure.point(k);
        let col = ((point[0].clamp(0.0, 1.0) * grid_side as f64).floor() as usize)
            .min(grid_side - 1);
        let row = ((point[1].clamp(0.0, 1.0) * grid_side as f64).floor() as usize)
            .min(grid_side - 1);
        mass[row * grid_side + col] += measure.weights()[k];
    }
    Ok(mass)
}
