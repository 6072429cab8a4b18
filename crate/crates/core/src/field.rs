//! Grayscale fields, lattice points, neighborhood shapes and patch vectors.

use std::fmt;
use std::ops::{Add, Deref, Sub};

use crate::error::{Error, Result};

/// A point on the integer lattice. `row` grows downward, `col` to the right.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LatticePoint {
    pub row: i64,
    pub col: i64,
}

impl LatticePoint {
    pub const ORIGIN: LatticePoint = LatticePoint { row: 0, col: 0 };

    pub const fn new(row: i64, col: i64) -> Self {
        LatticePoint { row, col }
    }

    /// `max(|row|, |col|)`.
    pub fn sup_norm(self) -> i64 {
        self.row.abs().max(self.col.abs())
    }

    pub fn offset(self, (drow, dcol): (i32, i32)) -> Self {
        LatticePoint::new(self.row + drow as i64, self.col + dcol as i64)
    }
}

impl Add for LatticePoint {
    type Output = LatticePoint;
    fn add(self, rhs: Self) -> Self {
        LatticePoint::new(self.row + rhs.row, self.col + rhs.col)
    }
}

impl Sub for LatticePoint {
    type Output = LatticePoint;
    fn sub(self, rhs: Self) -> Self {
        LatticePoint::new(self.row - rhs.row, self.col - rhs.col)
    }
}

impl fmt::Display for LatticePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.row, self.col)
    }
}

/// Rectangular grid of intensities in `[0, 1]`, stored row-major, with a
/// per-pixel filled mask used while a synthesis is in progress.
#[derive(Clone, Debug, PartialEq)]
pub struct Field {
    width: usize,
    height: usize,
    values: Vec<f64>,
    filled: Vec<bool>,
}

impl Field {
    /// A fully filled field.
    pub fn from_values(height: usize, width: usize, values: Vec<f64>) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(Error::InvalidParameter(format!(
                "field dimensions must be positive, got {height}x{width}"
            )));
        }
        if values.len() != height * width {
            return Err(Error::InvalidParameter(format!(
                "{height}x{width} field needs {} values, got {}",
                height * width,
                values.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::InvalidParameter(format!("intensity {v} outside [0, 1]")));
        }
        Ok(Field {
            width,
            height,
            filled: vec![true; values.len()],
            values,
        })
    }

    /// Builds a field from rows; convenient in tests.
    pub fn from_rows(rows: &[&[f64]]) -> Result<Self> {
        let height = rows.len();
        let width = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != width) {
            return Err(Error::InvalidParameter("ragged rows".into()));
        }
        Field::from_values(height, width, rows.concat())
    }

    pub fn constant(height: usize, width: usize, value: f64) -> Result<Self> {
        Field::from_values(height, width, vec![value; height * width])
    }

    /// A canvas with nothing filled yet.
    pub fn empty(height: usize, width: usize) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(Error::InvalidParameter(format!(
                "field dimensions must be positive, got {height}x{width}"
            )));
        }
        Ok(Field {
            width,
            height,
            values: vec![0.0; height * width],
            filled: vec![false; height * width],
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn contains(&self, t: LatticePoint) -> bool {
        t.row >= 0 && t.col >= 0 && (t.row as usize) < self.height && (t.col as usize) < self.width
    }

    fn index_of(&self, t: LatticePoint) -> Result<usize> {
        if self.contains(t) {
            Ok(t.row as usize * self.width + t.col as usize)
        } else {
            Err(Error::OutOfBounds {
                row: t.row,
                col: t.col,
                height: self.height,
                width: self.width,
            })
        }
    }

    /// Value at `t`, which must be inside and filled.
    pub fn get(&self, t: LatticePoint) -> Result<f64> {
        let i = self.index_of(t)?;
        if !self.filled[i] {
            return Err(Error::Unfilled { row: t.row, col: t.col });
        }
        Ok(self.values[i])
    }

    /// Unchecked read by (row, col); panics when out of bounds.
    #[inline]
    pub fn at(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.width + col]
    }

    pub fn is_filled(&self, t: LatticePoint) -> bool {
        self.index_of(t).map(|i| self.filled[i]).unwrap_or(false)
    }

    pub fn set(&mut self, t: LatticePoint, value: f64) -> Result<()> {
        if !(0.0..=1.0).contains(&value) {
            return Err(Error::InvalidParameter(format!("intensity {value} outside [0, 1]")));
        }
        let i = self.index_of(t)?;
        self.values[i] = value;
        self.filled[i] = true;
        Ok(())
    }

    pub fn filled_count(&self) -> usize {
        self.filled.iter().filter(|&&f| f).count()
    }

    pub fn is_complete(&self) -> bool {
        self.filled.iter().all(|&f| f)
    }
}

/// Ordered set of lattice offsets relative to a target pixel.
///
/// Offsets are kept in raster order, distinct, non-empty, and never `(0, 0)`,
/// so two shapes are equal exactly when their offset lists are equal.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Shape {
    offsets: Vec<(i32, i32)>,
}

impl Shape {
    pub fn new(mut offsets: Vec<(i32, i32)>) -> Result<Self> {
        if offsets.is_empty() {
            return Err(Error::InvalidParameter("shape has no offsets".into()));
        }
        offsets.sort_unstable();
        if offsets.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidParameter("shape offsets repeat".into()));
        }
        if offsets.binary_search(&(0, 0)).is_ok() {
            return Err(Error::InvalidParameter(
                "shape may not contain the target offset (0, 0)".into(),
            ));
        }
        Ok(Shape { offsets })
    }

    /// `p`, the number of conditioning pixels.
    pub fn len(&self) -> usize {
        self.offsets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.offsets.is_empty()
    }

    pub fn offsets(&self) -> &[(i32, i32)] {
        &self.offsets
    }

    /// Bounding box of the offsets together with the anchor itself:
    /// `(min_drow, max_drow, min_dcol, max_dcol)`.
    pub fn extent(&self) -> (i32, i32, i32, i32) {
        self.offsets.iter().fold((0, 0, 0, 0), |(r0, r1, c0, c1), &(dr, dc)| {
            (r0.min(dr), r1.max(dr), c0.min(dc), c1.max(dc))
        })
    }

    /// Stable text key, `"dr,dc;dr,dc;..."`.
    pub fn key(&self) -> String {
        offsets_key(&self.offsets)
    }
}

pub(crate) fn offsets_key(offsets: &[(i32, i32)]) -> String {
    offsets
        .iter()
        .map(|(r, c)| format!("{r},{c}"))
        .collect::<Vec<_>>()
        .join(";")
}

/// Intensities read at a shape's offsets, in the shape's order.
#[derive(Clone, Debug, PartialEq)]
pub struct PatchVector(pub Vec<f64>);

impl Deref for PatchVector {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

/// Reads `field` at `anchor + offset` for every offset of `shape`.
pub fn extract_vector(field: &Field, shape: &Shape, anchor: LatticePoint) -> Result<PatchVector> {
    shape
        .offsets()
        .iter()
        .map(|&o| field.get(anchor.offset(o)))
        .collect::<Result<Vec<_>>>()
        .map(PatchVector)
}

/// Every anchor `s` in `observed` such that `s` and all `s + offset` lie inside
/// the field, in raster order.
pub fn enumerate_candidates(observed: &Field, shape: &Shape) -> Vec<LatticePoint> {
    let (r0, r1, c0, c1) = shape.extent();
    let (h, w) = (observed.height() as i64, observed.width() as i64);
    let rows = (-r0 as i64)..(h - r1 as i64);
    let cols = (-c0 as i64)..(w - c1 as i64);
    if rows.is_empty() || cols.is_empty() {
        return Vec::new();
    }
    rows.flat_map(|r| cols.clone().map(move |c| LatticePoint::new(r, c)))
        .collect()
}
