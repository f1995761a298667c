//! 8-bit RGB image I/O (binary PPM/PGM and PNG) with values in `[0, 1]`.
//!
//! Reading maps a byte `b` to `b / 255`; writing maps back with
//! `round(v · 255)` (halves away from zero), clamped to `0..=255`, so
//! `write(read(f))` reproduces any canonical 8-bit PPM byte for byte.
//! Grayscale PGM (P5) input is promoted to three equal channels.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::{Error, Result};

/// Interleaved RGB image.
#[derive(Debug, Clone, PartialEq)]
pub struct Image {
    pub width: usize,
    pub height: usize,
    /// `height × width × 3` values, row-major.
    pub data: Vec<f64>,
}

impl Image {
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != width * height * 3 {
            return Err(Error::DimensionMismatch(format!(
                "{} values for a {width}x{height} RGB image",
                data.len()
            )));
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn filled(width: usize, height: usize, rgb: [f64; 3]) -> Self {
        let data = (0..width * height).flat_map(|_| rgb).collect();
        Self {
            width,
            height,
            data,
        }
    }

    /// Clamps arbitrary model output into a displayable image.
    pub fn from_unclamped(width: usize, height: usize, values: &[f64]) -> Result<Self> {
        Self::new(width, height, values.iter().map(|v| v.clamp(0.0, 1.0)).collect())
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        self.data.iter().map(|&v| to_byte(v)).collect()
    }

    pub fn from_bytes(width: usize, height: usize, bytes: &[u8]) -> Result<Self> {
        Self::new(width, height, bytes.iter().map(|&b| b as f64 / 255.0).collect())
    }
}

fn to_byte(v: f64) -> u8 {
    (v * 255.0).round().clamp(0.0, 255.0) as u8
}

/// Parses a binary PPM (P6) or PGM (P5) with maxval 255.
pub fn parse_pnm(buf: &[u8]) -> Result<Image> {
    let mut pos = 0;
    let mut fields = Vec::with_capacity(4);
    while fields.len() < 4 {
        // skip whitespace and comments
        while pos < buf.len() {
            if buf[pos].is_ascii_whitespace() {
                pos += 1;
            } else if buf[pos] == b'#' {
                while pos < buf.len() && buf[pos] != b'\n' {
                    pos += 1;
                }
            } else {
                break;
            }
        }
        let start = pos;
        while pos < buf.len() && !buf[pos].is_ascii_whitespace() && buf[pos] != b'#' {
            pos += 1;
        }
        if start == pos {
            return Err(Error::Image("malformed PNM header".into()));
        }
        fields.push(std::str::from_utf8(&buf[start..pos]).map_err(|_| {
            Error::Image("malformed PNM header".into())
        })?);
    }
    let channels = match fields[0] {
        "P6" => 3,
        "P5" => 1,
        other => return Err(Error::Image(format!("unsupported PNM type {other}"))),
    };
    let num = |s: &str| -> Result<usize> {
        s.parse::<usize>()
            .map_err(|_| Error::Image(format!("malformed PNM header field '{s}'")))
    };
    let (width, height, maxval) = (num(fields[1])?, num(fields[2])?, num(fields[3])?);
    if width == 0 || height == 0 {
        return Err(Error::Image("zero image dimension".into()));
    }
    if maxval != 255 {
        return Err(Error::Image(format!(
            "unsupported bit depth: maxval {maxval} (only 8-bit, maxval 255)"
        )));
    }
    // exactly one whitespace byte separates the header from the raster
    if pos >= buf.len() || !buf[pos].is_ascii_whitespace() {
        return Err(Error::Image("malformed PNM header".into()));
    }
    pos += 1;
    let raster = &buf[pos..];
    let expected = width * height * channels;
    if raster.len() != expected {
        return Err(Error::Image(format!(
            "expected {expected} raster bytes, found {}",
            raster.len()
        )));
    }
    let bytes: Vec<u8> = if channels == 3 {
        raster.to_vec()
    } else {
        raster.iter().flat_map(|&g| [g, g, g]).collect()
    };
    Image::from_bytes(width, height, &bytes)
}

/// Canonical P6 encoding: `P6\n<w> <h>\n255\n` followed by the raster.
pub fn encode_ppm(img: &Image) -> Vec<u8> {
    let mut out = format!("P6\n{} {}\n255\n", img.width, img.height).into_bytes();
    out.extend(img.to_bytes());
    out
}

fn decode_png(buf: &[u8]) -> Result<Image> {
    let dynamic = image::load_from_memory_with_format(buf, image::ImageFormat::Png)
        .map_err(|e| Error::Image(e.to_string()))?;
    use image::DynamicImage::*;
    let rgb = match dynamic {
        ImageLuma8(_) | ImageLumaA8(_) | ImageRgb8(_) | ImageRgba8(_) => dynamic.to_rgb8(),
        other => {
            return Err(Error::Image(format!(
                "unsupported bit depth: {:?} (only 8-bit PNG)",
                other.color()
            )))
        }
    };
    Image::from_bytes(rgb.width() as usize, rgb.height() as usize, rgb.as_raw())
}

fn encode_png(img: &Image, path: &Path) -> Result<()> {
    let rgb = image::RgbImage::from_raw(img.width as u32, img.height as u32, img.to_bytes())
        .ok_or_else(|| Error::Image("image buffer size mismatch".into()))?;
    rgb.save_with_format(path, image::ImageFormat::Png)
        .map_err(|e| Error::Image(e.to_string()))
}

/// Reads a PPM/PGM or PNG file, detected by its leading bytes.
pub fn read_image(path: impl AsRef<Path>) -> Result<Image> {
    let path = path.as_ref();
    let buf = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    if buf.starts_with(b"\x89PNG") {
        decode_png(&buf)
    } else {
        parse_pnm(&buf)
    }
}

/// Writes PNG when the extension is `.png`, PPM otherwise.
pub fn write_image(path: impl AsRef<Path>, img: &Image) -> Result<()> {
    let path = path.as_ref();
    let is_png = path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("png"));
    if is_png {
        encode_png(img, path)
    } else {
        std::fs::write(path, encode_ppm(img)).map_err(|e| Error::io(path, e))
    }
}

fn smoothstep(edge0: f64, edge1: f64, x: f64) -> f64 {
    let t = ((x - edge0) / (edge1 - edge0)).clamp(0.0, 1.0);
    t * t * (3.0 - 2.0 * t)
}

/// Bilinear value noise on a `cells × cells` lattice of random RGB values.
struct ValueNoise {
    cells: usize,
    lattice: Vec<[f64; 3]>,
}

impl ValueNoise {
    fn new(cells: usize, rng: &mut ChaCha8Rng) -> Self {
        let lattice = (0..(cells + 1) * (cells + 1))
            .map(|_| [rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5])
            .collect();
        Self { cells, lattice }
    }

    fn at(&self, u: f64, v: f64, c: usize) -> f64 {
        let n = self.cells;
        let (gx, gy) = (u * n as f64, v * n as f64);
        let (ix, iy) = ((gx as usize).min(n - 1), (gy as usize).min(n - 1));
        let (fx, fy) = (gx - ix as f64, gy - iy as f64);
        let l = |i: usize, j: usize| self.lattice[j * (n + 1) + i][c];
        l(ix, iy) * (1.0 - fx) * (1.0 - fy)
            + l(ix + 1, iy) * fx * (1.0 - fy)
            + l(ix, iy + 1) * (1.0 - fx) * fy
            + l(ix + 1, iy + 1) * fx * fy
    }
}

/// Procedural stand-in for a natural photo crop: smooth shading, a few
/// soft-edged blobs, a directional texture and four octaves of value noise
/// with amplitude halving per octave, which gives the roughly `1/f`
/// spectrum of real photographs. Deterministic and quantized to 8 bits.
pub fn synthetic_crop(size: usize) -> Image {
    let mut rng = ChaCha8Rng::seed_from_u64(0x51_ad_1a);
    let octaves: Vec<(ValueNoise, f64)> = [(4, 0.12), (8, 0.06), (16, 0.03), (32, 0.015)]
        .into_iter()
        .map(|(cells, amp)| (ValueNoise::new(cells, &mut rng), amp))
        .collect();
    // (cx, cy, radius, rgb)
    let blobs = [
        (0.30, 0.35, 0.18, [0.85, 0.45, 0.20]),
        (0.70, 0.62, 0.22, [0.20, 0.50, 0.35]),
        (0.58, 0.22, 0.10, [0.95, 0.85, 0.40]),
    ];
    let mut data = Vec::with_capacity(size * size * 3);
    let scale = (size.max(2) - 1) as f64;
    for y in 0..size {
        for x in 0..size {
            let (u, v) = (x as f64 / scale, y as f64 / scale);
            let mut rgb = [0.35 + 0.30 * v, 0.45 + 0.20 * u, 0.60 - 0.25 * v];
            for &(cx, cy, r, col) in &blobs {
                let d = ((u - cx).powi(2) + (v - cy).powi(2)).sqrt();
                let a = 1.0 - smoothstep(r - 0.02, r + 0.02, d);
                let shade = 1.0 - 0.6 * (d / r).min(1.0).powi(2);
                for c in 0..3 {
                    rgb[c] = rgb[c] * (1.0 - a) + col[c] * shade * a;
                }
            }
            let stripes = 0.05 * (2.0 * std::f64::consts::PI * (5.0 * u + 3.0 * v)).sin();
            for (c, base) in rgb.iter().enumerate() {
                let noise: f64 = octaves.iter().map(|(n, amp)| amp * n.at(u, v, c)).sum();
                let value = base + stripes + noise;
                data.push(to_byte(value.clamp(0.02, 0.98)) as f64 / 255.0);
            }
        }
    }
    Image {
        width: size,
        height: size,
        data,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reads_p6_values() {
        let mut buf = b"P6\n2 2\n255\n".to_vec();
        buf.extend([0, 128, 255, 1, 2, 3, 4, 5, 6, 7, 8, 9]);
        let img = parse_pnm(&buf).unwrap();
        assert_eq!(img.data[0], 0.0);
        assert_eq!(img.data[1], 128.0 / 255.0);
        assert_eq!(img.data[2], 1.0);
        assert_eq!(encode_ppm(&img), buf);
    }

    #[test]
    fn header_comments_and_whitespace() {
        let mut buf = b"P6 # comment\n 1\t1 # more\n255 ".to_vec();
        buf.extend([10, 20, 30]);
        let img = parse_pnm(&buf).unwrap();
        assert_eq!(img.to_bytes(), vec![10, 20, 30]);
    }

    #[test]
    fn pgm_promotes_to_rgb() {
        let mut buf = b"P5\n2 1\n255\n".to_vec();
        buf.extend([7, 200]);
        let img = parse_pnm(&buf).unwrap();
        assert_eq!(img.to_bytes(), vec![7, 7, 7, 200, 200, 200]);
        assert_eq!(encode_ppm(&img), {
            let mut b = b"P6\n2 1\n255\n".to_vec();
            b.extend([7, 7, 7, 200, 200, 200]);
            b
        });
    }

    #[test]
    fn rejects_bad_files() {
        assert!(parse_pnm(b"P3\n1 1\n255\n0 0 0").is_err());
        assert!(parse_pnm(b"P6\n1 1\n65535\n\0\0\0\0\0\0").is_err());
        assert!(parse_pnm(b"P6\n2 2\n255\n\0\0").is_err());
        assert!(parse_pnm(b"P6\nx 2\n255\n").is_err());
        assert!(parse_pnm(b"").is_err());
    }

    #[test]
    fn byte_rounding_is_half_away() {
        assert_eq!(to_byte(0.5 / 255.0), 1);
        assert_eq!(to_byte(1.49 / 255.0), 1);
        assert_eq!(to_byte(-0.2), 0);
        assert_eq!(to_byte(1.7), 255);
    }

    #[test]
    fn crop_is_deterministic_and_in_range() {
        let a = synthetic_crop(64);
        assert_eq!(a, synthetic_crop(64));
        assert_eq!(a.data.len(), 64 * 64 * 3);
        assert!(a.data.iter().all(|&v| (0.0..=1.0).contains(&v)));
    }
}
