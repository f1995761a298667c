//! `.qbin` model files.
//!
//! Layout, all little-endian:
//!
//! | field            | type                | notes                         |
//! |------------------|---------------------|-------------------------------|
//! | magic            | 4 bytes             | `QINR`                        |
//! | version          | u16                 | currently 1                   |
//! | dim count        | u16                 | number of layer widths        |
//! | dims             | u32 × dim count     | input, hidden…, output        |
//! | activation id    | u8                  | see [`Family::id`]            |
//! | range half-width | u8                  | 1 or 2                        |
//! | ω0 first, hidden | f64 × 2             |                               |
//! | parameters       | f32 …               | per layer: weights `[out][in]` row-major, then biases |

use std::path::Path;

use crate::activation::{ActivationKind, Family};
use crate::nn::MlpModel;
use crate::{Error, Result};

pub const MAGIC: &[u8; 4] = b"QINR";
pub const VERSION: u16 = 1;

pub fn to_bytes(model: &MlpModel) -> Result<Vec<u8>> {
    model.validate()?;
    let mut out = Vec::with_capacity(32 + 4 * model.num_params());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    let n = u16::try_from(model.layer_dims.len())
        .map_err(|_| Error::Capacity("too many layers for .qbin".into()))?;
    out.extend_from_slice(&n.to_le_bytes());
    for &d in &model.layer_dims {
        let d = u32::try_from(d).map_err(|_| Error::Capacity(format!("layer width {d}")))?;
        out.extend_from_slice(&d.to_le_bytes());
    }
    out.push(model.activation.family.id());
    out.push(model.activation.range_half_width as u8);
    out.extend_from_slice(&model.omega0_first.to_le_bytes());
    out.extend_from_slice(&model.omega0_hidden.to_le_bytes());
    for (w, b) in model.weights.iter().zip(&model.biases) {
        for v in w.iter().chain(b) {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    Ok(out)
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.buf.len())
            .ok_or_else(|| Error::Parse(format!("truncated .qbin at byte {}", self.pos)))?;
        let s = &self.buf[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn u16(&mut self) -> Result<u16> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().expect("2 bytes")))
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn f32(&mut self) -> Result<f32> {
        Ok(f32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }
}

pub fn from_bytes(buf: &[u8]) -> Result<MlpModel> {
    let mut r = Reader { buf, pos: 0 };
    if r.take(4)? != MAGIC {
        return Err(Error::Parse("bad magic, not a .qbin model".into()));
    }
    let version = r.u16()?;
    if version != VERSION {
        return Err(Error::Parse(format!("unsupported .qbin version {version}")));
    }
    let n = r.u16()? as usize;
    if n < 2 {
        return Err(Error::Parse(format!("model needs at least 2 layer widths, got {n}")));
    }
    let dims = (0..n)
        .map(|_| r.u32().map(|d| d as usize))
        .collect::<Result<Vec<_>>>()?;
    if dims.iter().any(|&d| d == 0) {
        return Err(Error::Parse("zero layer width".into()));
    }
    let family = Family::from_id(r.u8()?)?;
    let range = r.u8()? as f64;
    let omega0_first = r.f64()?;
    let omega0_hidden = r.f64()?;
    let activation = ActivationKind::new(family, omega0_hidden, range)
        .map_err(|e| Error::Parse(e.to_string()))?;

    let expected: usize = dims
        .windows(2)
        .try_fold(0usize, |acc, p| {
            p[0].checked_mul(p[1])
                .and_then(|w| w.checked_add(p[1]))
                .and_then(|l| acc.checked_add(l))
        })
        .ok_or_else(|| Error::Parse("parameter count overflows".into()))?;
    if buf.len() - r.pos != expected * 4 {
        return Err(Error::Parse(format!(
            "expected {} parameter bytes, found {}",
            expected * 4,
            buf.len() - r.pos
        )));
    }
    let mut weights = Vec::new();
    let mut biases = Vec::new();
    for p in dims.windows(2) {
        weights.push((0..p[0] * p[1]).map(|_| r.f32()).collect::<Result<Vec<_>>>()?);
        biases.push((0..p[1]).map(|_| r.f32()).collect::<Result<Vec<_>>>()?);
    }
    let model = MlpModel {
        layer_dims: dims,
        weights,
        biases,
        activation,
        omega0_first,
        omega0_hidden,
    };
    model.validate().map_err(|e| Error::Parse(e.to_string()))?;
    Ok(model)
}

pub fn save(model: &MlpModel, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, to_bytes(model)?).map_err(|e| Error::io(path, e))
}

pub fn load(path: impl AsRef<Path>) -> Result<MlpModel> {
    let path = path.as_ref();
    let buf = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    from_bytes(&buf)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model() -> MlpModel {
        let kind = ActivationKind::new(Family::Quad, 30.0, 2.0).unwrap();
        MlpModel::init(&MlpModel::architecture(2, 5, 2, 3), kind, 30.0, 30.0, 11).unwrap()
    }

    #[test]
    fn header_layout() {
        let b = to_bytes(&model()).unwrap();
        assert_eq!(&b[..4], b"QINR");
        assert_eq!(u16::from_le_bytes([b[4], b[5]]), 1);
        assert_eq!(u16::from_le_bytes([b[6], b[7]]), 4);
        assert_eq!(u32::from_le_bytes(b[8..12].try_into().unwrap()), 2);
        let params = 2 * 5 + 5 + 5 * 5 + 5 + 5 * 3 + 3;
        assert_eq!(b.len(), 4 + 2 + 2 + 16 + 2 + 16 + 4 * params);
    }

    #[test]
    fn rejects_corruption() {
        let b = to_bytes(&model()).unwrap();
        assert!(matches!(from_bytes(&b[..b.len() - 1]), Err(Error::Parse(_))));
        assert!(matches!(from_bytes(&b[..10]), Err(Error::Parse(_))));
        let mut bad = b.clone();
        bad[0] = b'X';
        assert!(matches!(from_bytes(&bad), Err(Error::Parse(_))));
        let mut bad = b.clone();
        bad[4] = 9;
        assert!(matches!(from_bytes(&bad), Err(Error::Parse(_))));
        let mut long = b;
        long.push(0);
        assert!(matches!(from_bytes(&long), Err(Error::Parse(_))));
    }
}
