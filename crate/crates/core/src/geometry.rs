//! Synthesis canvas layout: seed placement, visiting order and the
//! conditioning neighborhood of each pixel under the three schemes.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{LatticePoint, Shape};
use crate::spiral::spiral_point;

/// Pixel ordering and conditioning window.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    /// Raster order, conditioning on the `w × w` square with the pixel at its
    /// bottom-right corner (the Markov mesh scheme).
    Corner,
    /// Raster order, conditioning on the filled part of the `w × (2w - 1)` block
    /// with the pixel in its bottom center.
    Rectangular,
    /// Spiral order from the canvas center, conditioning on the filled part of
    /// the `(2w - 1) × (2w - 1)` square centered on the pixel.
    Spiral,
}

impl Scheme {
    pub const ALL: [Scheme; 3] = [Scheme::Corner, Scheme::Rectangular, Scheme::Spiral];

    pub fn name(self) -> &'static str {
        match self {
            Scheme::Corner => "corner",
            Scheme::Rectangular => "rectangular",
            Scheme::Spiral => "spiral",
        }
    }

    /// Default seed side: `w` for raster schemes, `2w - 1` for spiral.
    pub fn default_seed_side(self, w: usize) -> usize {
        match self {
            Scheme::Spiral => 2 * w - 1,
            _ => w,
        }
    }

    /// Offsets of the scheme's full window, raster order, excluding `(0, 0)`.
    /// Membership in the actual neighborhood is decided by fill order.
    fn window(self, w: usize) -> Vec<(i32, i32)> {
        let k = w as i32 - 1;
        let (rows, cols) = match self {
            Scheme::Corner => (-k..=0, -k..=0),
            Scheme::Rectangular => (-k..=0, -k..=k),
            Scheme::Spiral => (-k..=k, -k..=k),
        };
        rows.flat_map(|r| cols.clone().map(move |c| (r, c)))
            .filter(|&o| o != (0, 0))
            .collect()
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheme {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "corner" => Ok(Scheme::Corner),
            "rectangular" => Ok(Scheme::Rectangular),
            "spiral" => Ok(Scheme::Spiral),
            other => Err(Error::InvalidParameter(format!("unknown scheme {other:?}"))),
        }
    }
}

/// Axis-aligned square on the canvas.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SeedRegion {
    pub top: usize,
    pub left: usize,
    pub side: usize,
}

impl SeedRegion {
    pub fn contains(&self, t: LatticePoint) -> bool {
        let (r, c) = (t.row, t.col);
        r >= self.top as i64
            && c >= self.left as i64
            && r < (self.top + self.side) as i64
            && c < (self.left + self.side) as i64
    }
}

/// Canvas dimensions, seed region and fill order for one synthesis job.
#[derive(Clone, Debug)]
pub struct CanvasGeometry {
    scheme: Scheme,
    w: usize,
    height: usize,
    width: usize,
    seed: SeedRegion,
    /// Spiral origin on the canvas; unused by raster schemes.
    center: LatticePoint,
    /// Non-seed pixels in visiting order.
    order: Vec<LatticePoint>,
    /// 0 for seed pixels, `1 + position in order` otherwise.
    rank: Vec<usize>,
}

impl CanvasGeometry {
    pub fn new(scheme: Scheme, w: usize, height: usize, width: usize, seed_side: usize) -> Result<Self> {
        if w < 2 {
            return Err(Error::InvalidParameter(format!(
                "window parameter w must be at least 2, got {w}"
            )));
        }
        if seed_side == 0 {
            return Err(Error::InvalidParameter("seed side must be positive".into()));
        }
        if height < seed_side || width < seed_side {
            return Err(Error::InvalidParameter(format!(
                "output {height}x{width} is smaller than the {seed_side}x{seed_side} seed"
            )));
        }
        let center = LatticePoint::new(((height - 1) / 2) as i64, ((width - 1) / 2) as i64);
        let seed = match scheme {
            Scheme::Corner | Scheme::Rectangular => SeedRegion {
                top: 0,
                left: 0,
                side: seed_side,
            },
            Scheme::Spiral => SeedRegion {
                top: center.row as usize - (seed_side - 1) / 2,
                left: center.col as usize - (seed_side - 1) / 2,
                side: seed_side,
            },
        };

        let in_canvas =
            |t: LatticePoint| t.row >= 0 && t.col >= 0 && (t.row as usize) < height && (t.col as usize) < width;
        let order: Vec<LatticePoint> = match scheme {
            Scheme::Corner | Scheme::Rectangular => (0..height as i64)
                .flat_map(|r| (0..width as i64).map(move |c| LatticePoint::new(r, c)))
                .filter(|&t| !seed.contains(t))
                .collect(),
            Scheme::Spiral => {
                let reach = [
                    center.row,
                    height as i64 - 1 - center.row,
                    center.col,
                    width as i64 - 1 - center.col,
                ]
                .into_iter()
                .max()
                .unwrap_or(0) as u64;
                let n = (2 * reach + 1) * (2 * reach + 1);
                (0..n)
                    .map(|k| center + spiral_point(k))
                    .filter(|&t| in_canvas(t) && !seed.contains(t))
                    .collect()
            }
        };

        let mut rank = vec![0usize; height * width];
        for (i, t) in order.iter().enumerate() {
            rank[t.row as usize * width + t.col as usize] = i + 1;
        }
        Ok(CanvasGeometry {
            scheme,
            w,
            height,
            width,
            seed,
            center,
            order,
            rank,
        })
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn w(&self) -> usize {
        self.w
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn seed(&self) -> SeedRegion {
        self.seed
    }

    /// Spiral origin (canvas center, rounded toward the top-left).
    pub fn center(&self) -> LatticePoint {
        self.center
    }

    /// Every non-seed pixel exactly once, in the scheme's visiting order.
    pub fn ordering(&self) -> &[LatticePoint] {
        &self.order
    }

    pub fn contains(&self, t: LatticePoint) -> bool {
        t.row >= 0 && t.col >= 0 && (t.row as usize) < self.height && (t.col as usize) < self.width
    }

    fn rank(&self, t: LatticePoint) -> usize {
        self.rank[t.row as usize * self.width + t.col as usize]
    }

    /// True when `s` is filled before `t` is visited.
    pub fn precedes(&self, s: LatticePoint, t: LatticePoint) -> bool {
        self.rank(s) < self.rank(t)
    }

    /// Offsets of the already-filled pixels that `t` conditions on, truncated
    /// at the canvas edge.
    pub fn neighborhood_shape(&self, t: LatticePoint) -> Result<Shape> {
        if !self.contains(t) {
            return Err(Error::OutOfBounds {
                row: t.row,
                col: t.col,
                height: self.height,
                width: self.width,
            });
        }
        if self.seed.contains(t) {
            return Err(Error::InsideSeed { row: t.row, col: t.col });
        }
        let offsets = self
            .scheme
            .window(self.w)
            .into_iter()
            .filter(|&o| {
                let s = t.offset(o);
                self.contains(s) && self.precedes(s, t)
            })
            .collect();
        Shape::new(offsets)
    }
}
