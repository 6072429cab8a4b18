//! Exact joint laws of small pixel regions under a Markov mesh model.
//!
//! The law is computed by forward enumeration: pixels of a rectangle are drawn
//! in raster order while a probability table over the "frontier" (pixels that
//! some later pixel still conditions on, plus the target region) is updated
//! exactly. The target region sits `depth` rows and columns away from the
//! quarter-plane edges; the law is accepted as the stationary one only if two
//! depths agree.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lab::cdf::{EmpiricalCdf, Grid};
use crate::lab::mmm::{digits, CompiledMmm, MmmSpec};

/// Largest number of configurations of an output law.
pub const LAW_LIMIT: u128 = 1_000_000;
/// Largest number of frontier states held during enumeration.
pub const STATE_LIMIT: u128 = 1 << 22;
/// Laws at two depths must agree to this tolerance, entrywise.
pub const STATIONARITY_TOLERANCE: f64 = 1e-9;

/// Which square window the law covers.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WindowKind {
    /// The `w × w` window.
    Q,
    /// The `(2w − 1) × (2w − 1)` window.
    V,
}

impl WindowKind {
    pub fn side(self, w: usize) -> usize {
        match self {
            WindowKind::Q => w,
            WindowKind::V => 2 * w - 1,
        }
    }
}

/// Raster offsets of a `side × side` square.
pub fn square_positions(side: usize) -> Vec<(i32, i32)> {
    (0..side as i32)
        .flat_map(|r| (0..side as i32).map(move |c| (r, c)))
        .collect()
}

/// Exact pmf over the configurations of a set of pixels.
///
/// Configuration index `Σ aᵢ kⁱ` holds the probability that pixel
/// `positions[i]` takes `alphabet[aᵢ]` for every `i`.
#[derive(Clone, Debug, PartialEq)]
pub struct WindowLaw {
    positions: Vec<(i32, i32)>,
    alphabet: Vec<f64>,
    pmf: Vec<f64>,
}

impl WindowLaw {
    pub fn positions(&self) -> &[(i32, i32)] {
        &self.positions
    }

    pub fn alphabet(&self) -> &[f64] {
        &self.alphabet
    }

    pub fn k(&self) -> usize {
        self.alphabet.len()
    }

    pub fn pmf(&self) -> &[f64] {
        &self.pmf
    }

    /// Pmf of the pixels `keep` (indices into `positions`), in that order.
    pub fn marginal(&self, keep: &[usize]) -> Vec<f64> {
        marginalize(&self.pmf, self.k(), self.positions.len(), keep)
    }

    /// CDF of the law on `grid`, whose dimensions follow `positions`.
    pub fn cdf(&self, grid: &Grid) -> Result<EmpiricalCdf> {
        let n = self.positions.len();
        if grid.dims() != n {
            return Err(Error::ShapeMismatch {
                expected: n,
                found: grid.dims(),
            });
        }
        let k = self.k();
        let mut point = vec![0.0; n];
        EmpiricalCdf::from_weighted(
            grid.clone(),
            self.pmf.iter().enumerate().filter(|(_, &p)| p > 0.0).map(|(c, &p)| {
                for (slot, d) in point.iter_mut().zip(digits(c, k, n)) {
                    *slot = self.alphabet[d];
                }
                (point.clone(), p)
            }),
        )
    }
}

/// Sums `pmf` (over `n` base-`k` digits) down to the digits in `keep`.
pub fn marginalize(pmf: &[f64], k: usize, n: usize, keep: &[usize]) -> Vec<f64> {
    let mut strides = vec![0usize; n];
    let mut s = 1usize;
    for &i in keep {
        strides[i] = s;
        s *= k;
    }
    let mut out = vec![0.0; s];
    let mut digit = vec![0usize; n];
    let mut target = 0usize;
    for &p in pmf {
        out[target] += p;
        for i in 0..n {
            digit[i] += 1;
            target += strides[i];
            if digit[i] < k {
                break;
            }
            digit[i] = 0;
            target -= k * strides[i];
        }
    }
    out
}

/// Exact stationary law of a `w × w` (Q) or `(2w−1) × (2w−1)` (V) window.
pub fn exact_window_law(spec: &MmmSpec, kind: WindowKind) -> Result<WindowLaw> {
    exact_region_law(spec, &square_positions(kind.side(spec.w)))
}

/// Exact stationary law of the pixels at `positions` (distinct offsets, any
/// order; only their relative placement matters).
pub fn exact_region_law(spec: &MmmSpec, positions: &[(i32, i32)]) -> Result<WindowLaw> {
    let model = spec.compile()?;
    if positions.is_empty() {
        return Err(Error::InvalidParameter("region has no pixels".into()));
    }
    let k = model.k();
    let needed = (k as u128).pow(positions.len() as u32);
    if needed > LAW_LIMIT {
        return Err(Error::EnumerationTooLarge {
            needed,
            limit: LAW_LIMIT,
        });
    }
    let min_r = positions.iter().map(|p| p.0).min().unwrap_or(0);
    let min_c = positions.iter().map(|p| p.1).min().unwrap_or(0);
    let rel: Vec<(usize, usize)> = positions
        .iter()
        .map(|&(r, c)| ((r - min_r) as usize, (c - min_c) as usize))
        .collect();
    let mut seen = rel.clone();
    seen.sort_unstable();
    seen.dedup();
    if seen.len() != rel.len() {
        return Err(Error::InvalidParameter("region repeats a pixel".into()));
    }

    let depth = 4 * (model.w - 1) + 2;
    let shallow = region_pmf(&model, &rel, depth)?;
    let deep = region_pmf(&model, &rel, depth + 2)?;
    let gap = shallow
        .iter()
        .zip(&deep)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    if gap > STATIONARITY_TOLERANCE {
        return Err(Error::NotStationary { gap });
    }
    Ok(WindowLaw {
        positions: positions.to_vec(),
        alphabet: model.alphabet().to_vec(),
        pmf: deep,
    })
}

/// Law of `rel` (non-negative offsets) placed `depth` pixels from both edges.
fn region_pmf(model: &CompiledMmm, rel: &[(usize, usize)], depth: usize) -> Result<Vec<f64>> {
    let k = model.k();
    let w = model.w;
    let rows = depth + rel.iter().map(|p| p.0).max().unwrap_or(0) + 1;
    let cols = depth + rel.iter().map(|p| p.1).max().unwrap_or(0) + 1;
    let index = |(r, c): (usize, usize)| r * cols + c;

    let region: HashMap<(usize, usize), usize> = rel
        .iter()
        .enumerate()
        .map(|(i, &(r, c))| ((r + depth, c + depth), i))
        .collect();
    // raster index of the last pixel that reads q, or MAX for region pixels
    let last_use = |q: (usize, usize)| {
        if region.contains_key(&q) {
            usize::MAX
        } else {
            index(((q.0 + w - 1).min(rows - 1), (q.1 + w - 1).min(cols - 1)))
        }
    };

    let mut tracked: Vec<(usize, usize)> = Vec::new();
    let mut probs = vec![1.0];
    for i in 0..rows {
        for j in 0..cols {
            let now = index((i, j));
            let table = model.table_at(i, j);
            let n = tracked.len();

            let mut cond_stride = vec![0usize; n];
            let mut s = 1usize;
            for &(dr, dc) in &table.offsets {
                let q = ((i as i64 + dr as i64) as usize, (j as i64 + dc as i64) as usize);
                let slot = tracked
                    .iter()
                    .position(|&t| t == q)
                    .expect("conditioning pixel dropped from the frontier");
                cond_stride[slot] = s;
                s *= k;
            }

            let mut next: Vec<(usize, usize)> = Vec::with_capacity(n + 1);
            let mut new_stride = vec![0usize; n];
            let mut s = 1usize;
            for (slot, &q) in tracked.iter().enumerate() {
                if last_use(q) > now {
                    next.push(q);
                    new_stride[slot] = s;
                    s *= k;
                }
            }
            let keep_new = last_use((i, j)) > now;
            let pixel_stride = if keep_new {
                next.push((i, j));
                s
            } else {
                0
            };
            let states = (k as u128).pow(next.len() as u32);
            if states > STATE_LIMIT {
                return Err(Error::EnumerationTooLarge {
                    needed: states,
                    limit: STATE_LIMIT,
                });
            }

            let mut out = vec![0.0; states as usize];
            let mut digit = vec![0usize; n];
            let mut target = 0usize;
            let mut cond = 0usize;
            for &p in &probs {
                if p != 0.0 {
                    if keep_new {
                        let pmf = &table.flat[cond * k..(cond + 1) * k];
                        for (a, &q) in pmf.iter().enumerate() {
                            out[target + a * pixel_stride] += p * q;
                        }
                    } else {
                        out[target] += p;
                    }
                }
                for slot in 0..n {
                    digit[slot] += 1;
                    target += new_stride[slot];
                    cond += cond_stride[slot];
                    if digit[slot] < k {
                        break;
                    }
                    digit[slot] = 0;
                    target -= k * new_stride[slot];
                    cond -= k * cond_stride[slot];
                }
            }
            tracked = next;
            probs = out;
        }
    }

    // reorder the surviving digits to region order
    let n = tracked.len();
    debug_assert_eq!(n, rel.len());
    let mut stride = vec![0usize; n];
    for (slot, q) in tracked.iter().enumerate() {
        stride[slot] = k.pow(region[q] as u32);
    }
    let mut law = vec![0.0; probs.len()];
    for (c, &p) in probs.iter().enumerate() {
        let target: usize = digits(c, k, n).into_iter().zip(&stride).map(|(d, s)| d * s).sum();
        law[target] += p;
    }
    Ok(law)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lab::mmm::gen_mmm_field;
    use crate::rng::substream;

    #[test]
    fn iid_law_is_product() {
        let probs = [0.2, 0.3, 0.5];
        let spec = MmmSpec::iid(vec![0.0, 0.5, 1.0], probs.to_vec(), 2).unwrap();
        let law = exact_window_law(&spec, WindowKind::Q).unwrap();
        assert_eq!(law.pmf().len(), 81);
        for (c, &p) in law.pmf().iter().enumerate() {
            let expected: f64 = digits(c, 3, 4).iter().map(|&d| probs[d]).product();
            assert!((p - expected).abs() < 1e-15);
        }
    }

    #[test]
    fn copy_left_window_closed_form() {
        // rows are independent stationary chains with uniform marginal
        let stay = 0.9;
        let spec = MmmSpec::copy_left(stay).unwrap();
        let law = exact_window_law(&spec, WindowKind::Q).unwrap();
        let chain = |a: usize, b: usize| 0.5 * if a == b { stay } else { 1.0 - stay };
        for (c, &p) in law.pmf().iter().enumerate() {
            let d = digits(c, 2, 4);
            let expected = chain(d[0], d[1]) * chain(d[2], d[3]);
            assert!((p - expected).abs() < 1e-14, "{d:?}: {p} vs {expected}");
        }
    }

    #[test]
    fn copy_left_matches_monte_carlo() {
        // row pairs are independent; windows 10 columns apart are nearly so
        let spec = MmmSpec::copy_left(0.9).unwrap();
        let law = exact_window_law(&spec, WindowKind::Q).unwrap();
        let f = gen_mmm_field(&spec, 2000, 10_000, &mut substream(5, 0)).unwrap();
        let mut counts = [0usize; 16];
        for r in (0..2000).step_by(2) {
            for c in (0..10_000).step_by(10) {
                let cfg = [f.at(r, c), f.at(r, c + 1), f.at(r + 1, c), f.at(r + 1, c + 1)];
                let idx: usize = cfg.iter().enumerate().map(|(i, &v)| (v as usize) << i).sum();
                counts[idx] += 1;
            }
        }
        let n = 1_000_000.0;
        for (c, &p) in law.pmf().iter().enumerate() {
            let freq = counts[c] as f64 / n;
            let se = (p * (1.0 - p) / n).sqrt();
            assert!((freq - p).abs() < 3.0 * se, "config {c}: {freq} vs {p}");
        }
    }

    #[test]
    fn laws_sum_to_one_and_share_marginals() {
        let spec = MmmSpec::pickard_diagonal(0.75, 0.05, 0.2).unwrap();
        for kind in [WindowKind::Q, WindowKind::V] {
            let law = exact_window_law(&spec, kind).unwrap();
            let total: f64 = law.pmf().iter().sum();
            assert!((total - 1.0).abs() < 1e-12);
            let single = exact_region_law(&spec, &[(0, 0)]).unwrap();
            for i in 0..law.positions().len() {
                let m = law.marginal(&[i]);
                for (a, b) in m.iter().zip(single.pmf()) {
                    assert!((a - b).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn pickard_neighbors_agree_at_the_set_rate() {
        let spec = MmmSpec::pickard_diagonal(0.75, 0.05, 0.2).unwrap();
        for pair in [[(0, 0), (0, 1)], [(0, 0), (1, 0)]] {
            let law = exact_region_law(&spec, &pair).unwrap();
            assert!((law.pmf()[0] + law.pmf()[3] - 0.75).abs() < 1e-12);
        }
    }

    #[test]
    fn marginalize_reorders() {
        // independent digits with distinct marginals
        let p0 = [0.3, 0.7];
        let p1 = [0.6, 0.4];
        let pmf: Vec<f64> = (0..4).map(|c| p0[c & 1] * p1[c >> 1]).collect();
        let m = marginalize(&pmf, 2, 2, &[1, 0]);
        for c in 0..4 {
            assert!((m[c] - p1[c & 1] * p0[c >> 1]).abs() < 1e-15);
        }
        assert!((marginalize(&pmf, 2, 2, &[1])[1] - 0.4).abs() < 1e-15);
    }

    #[test]
    fn guards() {
        let spec = MmmSpec::iid(vec![0.0, 0.25, 0.5, 0.75, 1.0], vec![0.2; 5], 2).unwrap();
        assert!(matches!(
            exact_window_law(&spec, WindowKind::V),
            Err(Error::EnumerationTooLarge { .. })
        ));
        let mut pos = square_positions(2);
        pos.push((0, 0));
        assert!(exact_region_law(&spec, &pos).is_err());
    }

    #[test]
    fn non_stationary_spec_is_rejected() {
        // the first row is constant 0 and everything else copies its upper neighbor
        let spec = MmmSpec::from_fn(vec![0.0, 1.0], 2, |offsets, s| {
            match offsets.iter().position(|&o| o == (-1, 0)) {
                Some(i) => {
                    if s[i] == 0 {
                        vec![0.9, 0.1]
                    } else {
                        vec![0.1, 0.9]
                    }
                }
                None => vec![1.0, 0.0],
            }
        })
        .unwrap();
        assert!(matches!(
            exact_region_law(&spec, &[(0, 0)]),
            Err(Error::NotStationary { .. })
        ));
    }
}
