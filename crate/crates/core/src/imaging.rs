//! Raster images, real-valued working planes and the 8x8 block grid.

use std::fs;
use std::io::Write;
use std::path::Path;

use image::{DynamicImage, ImageFormat};

use crate::error::{Error, Result};

pub const DEFAULT_BLOCK_SIZE: usize = 8;

/// Index of the blue channel in an interleaved RGB image.
pub const BLUE: usize = 2;

/// 8-bit image with one (gray) or three (RGB) interleaved channels.
///
/// An alpha plane read from disk is carried alongside the colour data and
/// written back untouched; no operation in this crate reads or modifies it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RasterImage {
    width: usize,
    height: usize,
    channels: usize,
    data: Vec<u8>,
    alpha: Option<Vec<u8>>,
}

impl RasterImage {
    pub fn new(width: usize, height: usize, channels: usize, data: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::Dimension(format!("empty image {width}x{height}")));
        }
        if channels != 1 && channels != 3 {
            return Err(Error::InvalidArgument(format!(
                "images must have 1 or 3 channels, got {channels}"
            )));
        }
        if data.len() != width * height * channels {
            return Err(Error::Dimension(format!(
                "{width}x{height}x{channels} image needs {} samples, got {}",
                width * height * channels,
                data.len()
            )));
        }
        Ok(Self {
            width,
            height,
            channels,
            data,
            alpha: None,
        })
    }

    pub fn filled(width: usize, height: usize, channels: usize, value: u8) -> Result<Self> {
        Self::new(width, height, channels, vec![value; width * height * channels])
    }

    pub fn with_alpha(mut self, alpha: Vec<u8>) -> Result<Self> {
        if alpha.len() != self.width * self.height {
            return Err(Error::Dimension(format!(
                "alpha plane has {} samples, image has {} pixels",
                alpha.len(),
                self.width * self.height
            )));
        }
        self.alpha = Some(alpha);
        Ok(self)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [u8] {
        &mut self.data
    }

    pub fn alpha(&self) -> Option<&[u8]> {
        self.alpha.as_deref()
    }

    pub fn get(&self, x: usize, y: usize, channel: usize) -> u8 {
        self.data[(y * self.width + x) * self.channels + channel]
    }

    pub fn set(&mut self, x: usize, y: usize, channel: usize, value: u8) {
        self.data[(y * self.width + x) * self.channels + channel] = value;
    }

    pub fn same_shape(&self, other: &RasterImage) -> bool {
        self.width == other.width && self.height == other.height && self.channels == other.channels
    }

    /// Channel that carries the watermark: blue for RGB, the only plane for gray.
    pub fn embedding_channel(&self) -> usize {
        if self.channels == 3 {
            BLUE
        } else {
            0
        }
    }
}

/// Real-valued row-major matrix used as the working buffer between transforms.
#[derive(Debug, Clone, PartialEq)]
pub struct Plane {
    width: usize,
    height: usize,
    values: Vec<f64>,
}

impl Plane {
    pub fn new(width: usize, height: usize, values: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::Dimension(format!("empty plane {width}x{height}")));
        }
        if values.len() != width * height {
            return Err(Error::Dimension(format!(
                "{width}x{height} plane needs {} values, got {}",
                width * height,
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("plane contains NaN or infinity".into()));
        }
        Ok(Self {
            width,
            height,
            values,
        })
    }

    /// Builds a plane from nested rows.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let height = rows.len();
        let width = rows.first().map_or(0, |r| r.as_ref().len());
        let mut values = Vec::with_capacity(width * height);
        for row in rows {
            let row = row.as_ref();
            if row.len() != width {
                return Err(Error::Dimension("ragged rows".into()));
            }
            values.extend_from_slice(row);
        }
        Self::new(width, height, values)
    }

    pub fn zeros(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            values: vec![0.0; width * height],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut p = Self::zeros(n, n);
        for i in 0..n {
            p.set(i, i, 1.0);
        }
        p
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut values = Vec::with_capacity(width * height);
        for row in 0..height {
            for col in 0..width {
                values.push(f(row, col));
            }
        }
        Self {
            width,
            height,
            values,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.width + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: f64) {
        self.values[row * self.width + col] = value;
    }

    pub fn row(&self, row: usize) -> &[f64] {
        &self.values[row * self.width..(row + 1) * self.width]
    }

    pub fn column(&self, col: usize) -> Vec<f64> {
        (0..self.height).map(|r| self.get(r, col)).collect()
    }

    pub fn transpose(&self) -> Plane {
        Plane::from_fn(self.height, self.width, |r, c| self.get(c, r))
    }

    /// Matrix product `self * rhs`.
    pub fn matmul(&self, rhs: &Plane) -> Result<Plane> {
        if self.width != rhs.height {
            return Err(Error::Dimension(format!(
                "cannot multiply {}x{} by {}x{}",
                self.height, self.width, rhs.height, rhs.width
            )));
        }
        let mut out = Plane::zeros(rhs.width, self.height);
        for r in 0..self.height {
            for k in 0..self.width {
                let a = self.get(r, k);
                if a == 0.0 {
                    continue;
                }
                for c in 0..rhs.width {
                    out.values[r * rhs.width + c] += a * rhs.get(k, c);
                }
            }
        }
        Ok(out)
    }

    pub fn sub(&self, rhs: &Plane) -> Result<Plane> {
        if self.width != rhs.width || self.height != rhs.height {
            return Err(Error::Dimension("plane sizes differ".into()));
        }
        let values = self
            .values
            .iter()
            .zip(&rhs.values)
            .map(|(a, b)| a - b)
            .collect();
        Ok(Plane {
            width: self.width,
            height: self.height,
            values,
        })
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn sum_of_squares(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum()
    }

    pub fn max_abs_diff(&self, rhs: &Plane) -> f64 {
        self.values
            .iter()
            .zip(&rhs.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Non-overlapping square tiling of a plane. Trailing rows and columns that do
/// not fill a whole block are outside the grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BlockGrid {
    pub block_size: usize,
    pub blocks_x: usize,
    pub blocks_y: usize,
    pub width: usize,
    pub height: usize,
}

impl BlockGrid {
    pub fn new(width: usize, height: usize, block_size: usize) -> Result<Self> {
        if block_size == 0 {
            return Err(Error::InvalidArgument("block size must be positive".into()));
        }
        if width < block_size || height < block_size {
            return Err(Error::Dimension(format!(
                "{width}x{height} is smaller than one {block_size}x{block_size} block"
            )));
        }
        Ok(Self {
            block_size,
            blocks_x: width / block_size,
            blocks_y: height / block_size,
            width,
            height,
        })
    }

    pub fn for_plane(plane: &Plane, block_size: usize) -> Result<Self> {
        Self::new(plane.width(), plane.height(), block_size)
    }

    pub fn block_count(&self) -> usize {
        self.blocks_x * self.blocks_y
    }

    /// Top-left pixel `(x, y)` of block `index`.
    pub fn origin(&self, index: usize) -> Result<(usize, usize)> {
        if index >= self.block_count() {
            return Err(Error::OutOfRange {
                index,
                limit: self.block_count(),
            });
        }
        Ok((
            (index % self.blocks_x) * self.block_size,
            (index / self.blocks_x) * self.block_size,
        ))
    }

    fn check_plane(&self, plane: &Plane) -> Result<()> {
        if plane.width() != self.width || plane.height() != self.height {
            return Err(Error::Dimension(format!(
                "grid built for {}x{}, plane is {}x{}",
                self.width,
                self.height,
                plane.width(),
                plane.height()
            )));
        }
        Ok(())
    }
}

pub fn extract_channel(image: &RasterImage, channel: usize) -> Result<Plane> {
    if channel >= image.channels {
        return Err(Error::OutOfRange {
            index: channel,
            limit: image.channels,
        });
    }
    let values = image
        .data
        .iter()
        .skip(channel)
        .step_by(image.channels)
        .map(|&v| f64::from(v))
        .collect();
    Ok(Plane {
        width: image.width,
        height: image.height,
        values,
    })
}

/// Rounds to the nearest integer and clamps into `[0, 255]`.
#[inline]
pub fn quantize(value: f64) -> u8 {
    value.round().clamp(0.0, 255.0) as u8
}

pub fn replace_channel(image: &RasterImage, channel: usize, plane: &Plane) -> Result<RasterImage> {
    if channel >= image.channels {
        return Err(Error::OutOfRange {
            index: channel,
            limit: image.channels,
        });
    }
    if plane.width != image.width || plane.height != image.height {
        return Err(Error::Dimension(format!(
            "plane {}x{} does not match image {}x{}",
            plane.width, plane.height, image.width, image.height
        )));
    }
    let mut out = image.clone();
    for (dst, &v) in out
        .data
        .iter_mut()
        .skip(channel)
        .step_by(image.channels)
        .zip(&plane.values)
    {
        *dst = quantize(v);
    }
    Ok(out)
}

pub fn get_block(plane: &Plane, grid: &BlockGrid, index: usize) -> Result<Plane> {
    grid.check_plane(plane)?;
    let (x0, y0) = grid.origin(index)?;
    let n = grid.block_size;
    Ok(Plane::from_fn(n, n, |r, c| plane.get(y0 + r, x0 + c)))
}

pub fn set_block(plane: &mut Plane, grid: &BlockGrid, index: usize, block: &Plane) -> Result<()> {
    grid.check_plane(plane)?;
    let n = grid.block_size;
    if block.width != n || block.height != n {
        return Err(Error::Dimension(format!(
            "expected a {n}x{n} block, got {}x{}",
            block.width, block.height
        )));
    }
    let (x0, y0) = grid.origin(index)?;
    for r in 0..n {
        let start = (y0 + r) * plane.width + x0;
        plane.values[start..start + n].copy_from_slice(block.row(r));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// File I/O

pub fn read_image(path: impl AsRef<Path>) -> Result<RasterImage> {
    let path = path.as_ref();
    let img = image::open(path).map_err(|source| match source {
        image::ImageError::IoError(e) => Error::io(path, e),
        source => Error::Image {
            path: path.to_path_buf(),
            source,
        },
    })?;
    from_dynamic(img)
}

pub fn from_dynamic(img: DynamicImage) -> Result<RasterImage> {
    let (w, h) = (img.width() as usize, img.height() as usize);
    if img.color().has_alpha() {
        if img.color().has_color() {
            let rgba = img.into_rgba8().into_raw();
            let mut data = Vec::with_capacity(w * h * 3);
            let mut alpha = Vec::with_capacity(w * h);
            for px in rgba.chunks_exact(4) {
                data.extend_from_slice(&px[..3]);
                alpha.push(px[3]);
            }
            RasterImage::new(w, h, 3, data)?.with_alpha(alpha)
        } else {
            let la = img.into_luma_alpha8().into_raw();
            let data = la.iter().step_by(2).copied().collect();
            let alpha = la.iter().skip(1).step_by(2).copied().collect();
            RasterImage::new(w, h, 1, data)?.with_alpha(alpha)
        }
    } else if img.color().has_color() {
        RasterImage::new(w, h, 3, img.into_rgb8().into_raw())
    } else {
        RasterImage::new(w, h, 1, img.into_luma8().into_raw())
    }
}

pub fn to_dynamic(image: &RasterImage) -> DynamicImage {
    let (w, h) = (image.width as u32, image.height as u32);
    match (image.channels, &image.alpha) {
        (3, None) => DynamicImage::ImageRgb8(
            image::RgbImage::from_raw(w, h, image.data.clone()).expect("sized buffer"),
        ),
        (1, None) => DynamicImage::ImageLuma8(
            image::GrayImage::from_raw(w, h, image.data.clone()).expect("sized buffer"),
        ),
        (3, Some(alpha)) => {
            let mut raw = Vec::with_capacity(alpha.len() * 4);
            for (px, &a) in image.data.chunks_exact(3).zip(alpha) {
                raw.extend_from_slice(px);
                raw.push(a);
            }
            DynamicImage::ImageRgba8(image::RgbaImage::from_raw(w, h, raw).expect("sized buffer"))
        }
        (_, Some(alpha)) => {
            let mut raw = Vec::with_capacity(alpha.len() * 2);
            for (&v, &a) in image.data.iter().zip(alpha) {
                raw.push(v);
                raw.push(a);
            }
            DynamicImage::ImageLumaA8(
                image::GrayAlphaImage::from_raw(w, h, raw).expect("sized buffer"),
            )
        }
        _ => unreachable!("channel count validated at construction"),
    }
}

/// Writes PNG (or PPM/PGM when the extension asks for it) via a temporary
/// file in the destination directory followed by a rename.
pub fn write_image(path: impl AsRef<Path>, image: &RasterImage) -> Result<()> {
    let path = path.as_ref();
    let format = match path.extension().and_then(|e| e.to_str()) {
        Some(ext) if matches!(ext.to_ascii_lowercase().as_str(), "ppm" | "pgm" | "pnm") => {
            ImageFormat::Pnm
        }
        _ => ImageFormat::Png,
    };
    let mut buf = std::io::Cursor::new(Vec::new());
    to_dynamic(image)
        .write_to(&mut buf, format)
        .map_err(|source| Error::Image {
            path: path.to_path_buf(),
            source,
        })?;
    write_atomic(path, buf.get_ref())
}

pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
    tmp.write_all(bytes).map_err(|e| Error::io(path, e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

pub fn read_to_string(path: impl AsRef<Path>) -> Result<String> {
    let path = path.as_ref();
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}
