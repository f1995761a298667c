use ndarray::Array2;

use crate::imageio::Image;
use crate::{Error, Result};

/// Coordinates on the uniform lattice over `[-1, 1]^d` with their targets.
///
/// Samples are ordered row-major over `shape`; a coordinate lists its
/// components in axis order (`[y, x]` for images, `[t, y, x]` for video).
#[derive(Debug, Clone, PartialEq)]
pub struct SignalDataset {
    pub coords: Array2<f64>,
    pub targets: Array2<f64>,
    pub shape: Vec<usize>,
}

/// Position of sample `i` of `n` on an axis: `2i/(n-1) - 1`, or 0 when the
/// axis has a single sample.
pub fn axis_coord(i: usize, n: usize) -> f64 {
    if n <= 1 {
        0.0
    } else {
        (2 * i) as f64 / (n - 1) as f64 - 1.0
    }
}

pub fn make_grid(shape: &[usize]) -> Result<Array2<f64>> {
    if shape.is_empty() || shape.iter().any(|&n| n == 0) {
        return Err(Error::InvalidArgument(format!(
            "grid dimensions must be positive, got {shape:?}"
        )));
    }
    let total: usize = shape.iter().product();
    let d = shape.len();
    let mut coords = Array2::zeros((total, d));
    for (row, mut c) in coords.outer_iter_mut().enumerate() {
        let mut rem = row;
        for axis in (0..d).rev() {
            let n = shape[axis];
            c[axis] = axis_coord(rem % n, n);
            rem /= n;
        }
    }
    Ok(coords)
}

impl SignalDataset {
    pub fn new(coords: Array2<f64>, targets: Array2<f64>, shape: Vec<usize>) -> Result<Self> {
        let total: usize = shape.iter().product();
        if coords.nrows() != total || targets.nrows() != total {
            return Err(Error::DimensionMismatch(format!(
                "{} coordinates and {} targets for shape {shape:?}",
                coords.nrows(),
                targets.nrows()
            )));
        }
        if coords.ncols() != shape.len() {
            return Err(Error::DimensionMismatch(format!(
                "coordinates have {} components for a {}-d shape",
                coords.ncols(),
                shape.len()
            )));
        }
        Ok(Self {
            coords,
            targets,
            shape,
        })
    }

    pub fn from_image(img: &Image) -> Self {
        let shape = vec![img.height, img.width];
        let coords = make_grid(&shape).expect("image has positive size");
        let targets = Array2::from_shape_vec((img.height * img.width, 3), img.data.clone())
            .expect("image buffer is h*w*3");
        Self {
            coords,
            targets,
            shape,
        }
    }

    /// Video from equally sized frames, shape `(T, H, W)`.
    pub fn from_frames(frames: &[Image]) -> Result<Self> {
        let first = frames
            .first()
            .ok_or_else(|| Error::InvalidArgument("video needs at least one frame".into()))?;
        if frames
            .iter()
            .any(|f| f.width != first.width || f.height != first.height)
        {
            return Err(Error::DimensionMismatch("frames differ in size".into()));
        }
        let shape = vec![frames.len(), first.height, first.width];
        let coords = make_grid(&shape)?;
        let data: Vec<f64> = frames.iter().flat_map(|f| f.data.iter().copied()).collect();
        let targets = Array2::from_shape_vec((coords.nrows(), 3), data)
            .map_err(|e| Error::DimensionMismatch(e.to_string()))?;
        Ok(Self {
            coords,
            targets,
            shape,
        })
    }

    pub fn len(&self) -> usize {
        self.coords.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn channels(&self) -> usize {
        self.targets.ncols()
    }
}
