//! Multivariate CDFs evaluated on product grids, and the sup-norm distance
//! between them.

use crate::error::{Error, Result};
use crate::field::Field;
use crate::geometry::SeedRegion;

/// Largest number of grid points.
pub const GRID_LIMIT: usize = 1_000_000;

/// Product of per-dimension evaluation points.
///
/// Point index `Σ iₐ Πₑ<ₐ len(axisₑ)` is `(axis₀[i₀], axis₁[i₁], ...)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid {
    axes: Vec<Vec<f64>>,
    len: usize,
}

impl Grid {
    /// Every axis nonempty and strictly increasing.
    pub fn new(axes: Vec<Vec<f64>>) -> Result<Self> {
        if axes.is_empty() {
            return Err(Error::InvalidParameter("grid needs at least one dimension".into()));
        }
        let mut len = 1usize;
        for axis in &axes {
            if axis.is_empty() || axis.iter().any(|v| v.is_nan()) || axis.windows(2).any(|p| p[0] >= p[1]) {
                return Err(Error::InvalidParameter(
                    "grid axes must be nonempty and strictly increasing".into(),
                ));
            }
            len = len.saturating_mul(axis.len());
            if len > GRID_LIMIT {
                return Err(Error::EnumerationTooLarge {
                    needed: axes.iter().map(|a| a.len() as u128).product(),
                    limit: GRID_LIMIT as u128,
                });
            }
        }
        Ok(Grid { axes, len })
    }

    /// `axis` repeated in `dims` dimensions.
    pub fn product(axis: &[f64], dims: usize) -> Result<Self> {
        Grid::new(vec![axis.to_vec(); dims])
    }

    /// `points` equispaced values on `[0, 1]` in each of `dims` dimensions.
    pub fn equispaced(dims: usize, points: usize) -> Result<Self> {
        if points < 2 {
            return Err(Error::InvalidParameter("need at least two grid points per axis".into()));
        }
        let axis: Vec<f64> = (0..points).map(|i| i as f64 / (points - 1) as f64).collect();
        Grid::product(&axis, dims)
    }

    pub fn dims(&self) -> usize {
        self.axes.len()
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn axes(&self) -> &[Vec<f64>] {
        &self.axes
    }

    pub fn point(&self, mut index: usize) -> Vec<f64> {
        self.axes
            .iter()
            .map(|axis| {
                let v = axis[index % axis.len()];
                index /= axis.len();
                v
            })
            .collect()
    }

    /// Index of the smallest grid point dominating `x`, or `None` when `x`
    /// exceeds the grid in some coordinate.
    fn cell(&self, x: &[f64]) -> Option<usize> {
        let mut index = 0usize;
        let mut stride = 1usize;
        for (axis, &v) in self.axes.iter().zip(x) {
            let i = axis.partition_point(|&g| g < v);
            if i == axis.len() {
                return None;
            }
            index += i * stride;
            stride *= axis.len();
        }
        Some(index)
    }
}

/// CDF values on a grid.
#[derive(Clone, Debug, PartialEq)]
pub struct EmpiricalCdf {
    grid: Grid,
    values: Vec<f64>,
}

impl EmpiricalCdf {
    /// CDF of the weighted point masses, normalized by the total weight.
    pub fn from_weighted<P, I>(grid: Grid, points: I) -> Result<Self>
    where
        P: AsRef<[f64]>,
        I: IntoIterator<Item = (P, f64)>,
    {
        let mut mass = vec![0.0; grid.len()];
        let mut total = 0.0;
        for (x, weight) in points {
            let x = x.as_ref();
            if x.len() != grid.dims() {
                return Err(Error::ShapeMismatch {
                    expected: grid.dims(),
                    found: x.len(),
                });
            }
            total += weight;
            if let Some(c) = grid.cell(x) {
                mass[c] += weight;
            }
        }
        if total.is_nan() || total <= 0.0 {
            return Err(Error::InvalidParameter("CDF of an empty sample".into()));
        }
        // cumulative sums along each axis in turn
        let mut stride = 1usize;
        for axis in grid.axes() {
            let n = axis.len();
            for i in 0..mass.len() {
                if !(i / stride).is_multiple_of(n) {
                    mass[i] += mass[i - stride];
                }
            }
            stride *= n;
        }
        let values = mass.into_iter().map(|m| (m / total).clamp(0.0, 1.0)).collect();
        Ok(EmpiricalCdf { grid, values })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// CDF over all `side × side` windows of `field`, read in raster order.
pub fn empirical_window_cdf(field: &Field, side: usize, grid: &Grid) -> Result<EmpiricalCdf> {
    empirical_window_cdf_excluding(field, side, grid, None)
}

/// As [`empirical_window_cdf`], skipping windows that overlap `exclude`.
pub fn empirical_window_cdf_excluding(
    field: &Field,
    side: usize,
    grid: &Grid,
    exclude: Option<SeedRegion>,
) -> Result<EmpiricalCdf> {
    if side == 0 || field.height() < side || field.width() < side {
        return Err(Error::InvalidParameter(format!(
            "{}x{} field has no {side}x{side} window",
            field.height(),
            field.width()
        )));
    }
    if grid.dims() != side * side {
        return Err(Error::ShapeMismatch {
            expected: side * side,
            found: grid.dims(),
        });
    }
    let overlaps = |r: usize, c: usize| match exclude {
        Some(s) => r < s.top + s.side && s.top < r + side && c < s.left + s.side && s.left < c + side,
        None => false,
    };
    let windows = (0..=field.height() - side)
        .flat_map(|r| (0..=field.width() - side).map(move |c| (r, c)))
        .filter(|&(r, c)| !overlaps(r, c))
        .map(|(r, c)| {
            let v: Vec<f64> = (0..side)
                .flat_map(|dr| (0..side).map(move |dc| field.at(r + dr, c + dc)))
                .collect();
            (v, 1.0)
        });
    EmpiricalCdf::from_weighted(grid.clone(), windows)
}

/// Largest absolute difference over the shared grid.
pub fn sup_distance(a: &EmpiricalCdf, b: &EmpiricalCdf) -> Result<f64> {
    if a.grid != b.grid {
        return Err(Error::GridMismatch);
    }
    Ok(a.values
        .iter()
        .zip(&b.values)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max))
}
