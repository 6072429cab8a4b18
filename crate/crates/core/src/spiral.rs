//! Clockwise square spiral on ℤ².
//!
//! Points are `(row, col)` with rows growing downward. The spiral starts at the
//! origin, visits `(1, 0), (1, -1), (0, -1), (-1, -1), (-1, 0), (-1, 1), (0, 1)`
//! and closes ring 1 at `(1, 1)`. Ring `r ≥ 1` holds the `8r` points with
//! `‖t‖∞ = r` and is entered at `(r, r - 1)`, directly below the last point of
//! ring `r - 1`, so consecutive points are always lattice neighbours.
//! Within a ring the sides are walked as:
//!
//! * bottom row `row = r`, col from `r - 1` down to `-r`
//! * left column `col = -r`, row from `r - 1` up to `-r`
//! * top row `row = -r`, col from `-r + 1` to `r`
//! * right column `col = r`, row from `-r + 1` down to `r`

use crate::field::LatticePoint;

fn ring_start(r: u64) -> u64 {
    if r == 0 {
        0
    } else {
        (2 * r - 1) * (2 * r - 1)
    }
}

/// Ring containing spiral index `k`: the smallest `r` with `(2r+1)² > k`.
fn ring_of(k: u64) -> u64 {
    let mut r = ((((k + 1) as f64).sqrt() - 1.0) / 2.0).ceil().max(0.0) as u64;
    while r > 0 && ring_start(r) > k {
        r -= 1;
    }
    while (2 * r + 1) * (2 * r + 1) <= k {
        r += 1;
    }
    r
}

/// The `k`-th point of the spiral.
pub fn spiral_point(k: u64) -> LatticePoint {
    if k == 0 {
        return LatticePoint::ORIGIN;
    }
    let r = ring_of(k);
    let pos = k - ring_start(r);
    let side = pos / (2 * r);
    let off = (pos % (2 * r)) as i64;
    let r = r as i64;
    match side {
        0 => LatticePoint::new(r, r - 1 - off),
        1 => LatticePoint::new(r - 1 - off, -r),
        2 => LatticePoint::new(-r, -r + 1 + off),
        _ => LatticePoint::new(-r + 1 + off, r),
    }
}

/// Position of `t` in the spiral; inverse of [`spiral_point`].
pub fn spiral_index(t: LatticePoint) -> u64 {
    let r = t.sup_norm();
    if r == 0 {
        return 0;
    }
    let (row, col) = (t.row, t.col);
    let pos = if row == r && col < r {
        r - 1 - col
    } else if col == -r && row < r {
        2 * r + (r - 1 - row)
    } else if row == -r {
        4 * r + (col + r - 1)
    } else {
        6 * r + (row + r - 1)
    };
    ring_start(r as u64) + pos as u64
}

/// The first `n` spiral points `t₀ ≺ t₁ ≺ …`.
pub fn spiral_order(n: usize) -> Vec<LatticePoint> {
    (0..n as u64).map(spiral_point).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    fn pts(v: &[(i64, i64)]) -> Vec<LatticePoint> {
        v.iter().map(|&(r, c)| LatticePoint::new(r, c)).collect()
    }

    #[test]
    fn first_eight_points() {
        assert_eq!(
            spiral_order(8),
            pts(&[(0, 0), (1, 0), (1, -1), (0, -1), (-1, -1), (-1, 0), (-1, 1), (0, 1)])
        );
        assert_eq!(spiral_order(1), pts(&[(0, 0)]));
        assert!(spiral_order(0).is_empty());
    }

    #[test]
    fn twenty_five_points_by_hand() {
        // rings walked clockwise, hand enumerated
        let expected = pts(&[
            (0, 0),
            (1, 0),
            (1, -1),
            (0, -1),
            (-1, -1),
            (-1, 0),
            (-1, 1),
            (0, 1),
            (1, 1),
            (2, 1),
            (2, 0),
            (2, -1),
            (2, -2),
            (1, -2),
            (0, -2),
            (-1, -2),
            (-2, -2),
            (-2, -1),
            (-2, 0),
            (-2, 1),
            (-2, 2),
            (-1, 2),
            (0, 2),
            (1, 2),
            (2, 2),
        ]);
        assert_eq!(spiral_order(25), expected);
    }

    #[test]
    fn consecutive_points_are_neighbours() {
        let s = spiral_order(2000);
        assert!(s.windows(2).all(|w| (w[1] - w[0]).sup_norm() == 1));
    }

    #[test]
    fn prefixes_fill_squares() {
        let s = spiral_order(41 * 41);
        let set: HashSet<_> = s.iter().copied().collect();
        assert_eq!(set.len(), s.len());
        for r in 0..=20usize {
            let n = (2 * r + 1) * (2 * r + 1);
            assert!(s[..n].iter().all(|t| t.sup_norm() <= r as i64));
            let norms: Vec<_> = s[..n].iter().map(|t| t.sup_norm()).collect();
            assert!(norms.windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn index_inverts_point() {
        for k in 0..10_000u64 {
            assert_eq!(spiral_index(spiral_point(k)), k);
        }
        for k in [1u64 << 30, (1 << 40) + 12345] {
            assert_eq!(spiral_index(spiral_point(k)), k);
        }
    }
}
