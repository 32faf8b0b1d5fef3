//! Little-endian field files.
//!
//! ```text
//! "PGC1"
//! n_points  u32
//! n_curves  u32
//! n_s       u32 x n_curves
//! n_t       u32
//! m_ceiling u32
//! phi       f64 x n_points x n_curves x (m_ceiling + 1)   [point][curve][m]
//! psi       f64 x n_points x n_curves x (m_ceiling + 1)
//! points    f64 x n_points x 2                            rest positions
//! ```

use std::io::{Read, Write};

use super::{CoordinateField, DeformError};
use crate::geometry::Vec2;

pub const MAGIC: &[u8; 4] = b"PGC1";

fn to_u32(v: usize, what: &str) -> Result<u32, DeformError> {
    u32::try_from(v).map_err(|_| DeformError::Format(format!("{what} {v} does not fit in u32")))
}

pub fn write_field(field: &CoordinateField, mut out: impl Write) -> Result<(), DeformError> {
    let mut buf = Vec::with_capacity(
        24 + 4 * field.curve_count() + 16 * field.raw().0.len() + 16 * field.len(),
    );
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&to_u32(field.len(), "point count")?.to_le_bytes());
    buf.extend_from_slice(&to_u32(field.curve_count(), "curve count")?.to_le_bytes());
    for &n in field.source_orders() {
        buf.extend_from_slice(&to_u32(n, "curve order")?.to_le_bytes());
    }
    buf.extend_from_slice(&to_u32(field.target_order(), "target order")?.to_le_bytes());
    buf.extend_from_slice(&to_u32(field.ceiling(), "ceiling")?.to_le_bytes());
    let (phi, psi) = field.raw();
    for v in phi.iter().chain(psi) {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    for p in field.points() {
        buf.extend_from_slice(&p.x.to_le_bytes());
        buf.extend_from_slice(&p.y.to_le_bytes());
    }
    out.write_all(&buf)?;
    Ok(())
}

struct Cursor<'a> {
    bytes: &'a [u8],
    at: usize,
}

impl Cursor<'_> {
    fn take(&mut self, n: usize) -> Result<&[u8], DeformError> {
        let end = self
            .at
            .checked_add(n)
            .filter(|&e| e <= self.bytes.len())
            .ok_or_else(|| DeformError::Format("truncated field data".into()))?;
        let s = &self.bytes[self.at..end];
        self.at = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<usize, DeformError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()) as usize)
    }

    fn f64s(&mut self, n: usize) -> Result<Vec<f64>, DeformError> {
        let len = n
            .checked_mul(8)
            .ok_or_else(|| DeformError::Format("array size overflow".into()))?;
        Ok(self
            .take(len)?
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect())
    }
}

pub fn read_field(mut input: impl Read) -> Result<CoordinateField, DeformError> {
    let mut bytes = Vec::new();
    input.read_to_end(&mut bytes)?;
    let mut cur = Cursor {
        bytes: &bytes,
        at: 0,
    };
    if cur.take(4)? != MAGIC {
        return Err(DeformError::Format("not a field file (bad magic)".into()));
    }
    let n_points = cur.u32()?;
    let n_curves = cur.u32()?;
    let source_orders = (0..n_curves)
        .map(|_| cur.u32())
        .collect::<Result<Vec<_>, _>>()?;
    let target_order = cur.u32()?;
    let ceiling = cur.u32()?;
    let count = n_points
        .checked_mul(n_curves)
        .and_then(|v| v.checked_mul(ceiling + 1))
        .ok_or_else(|| DeformError::Format("array size overflow".into()))?;
    let phi = cur.f64s(count)?;
    let psi = cur.f64s(count)?;
    let points = cur
        .f64s(2 * n_points)?
        .chunks_exact(2)
        .map(|c| Vec2::new(c[0], c[1]))
        .collect();
    if cur.at != bytes.len() {
        return Err(DeformError::Format(format!(
            "{} trailing bytes",
            bytes.len() - cur.at
        )));
    }
    CoordinateField::from_parts(points, source_orders, target_order, ceiling, phi, psi)
}
