//! Discrete Markov mesh models with explicit conditional tables.
//!
//! A model of window parameter `w` draws pixel `(i, j)` of the quarter plane
//! given the filled part of the `w × w` square that has `(i, j)` as its
//! bottom-right corner. Near the top and left edges that square is truncated,
//! so a model carries one table for each of the `w²` truncations
//! `(up, left) ∈ [0, w)²`, including the empty one for the corner pixel.
//!
//! Tables are stored flat in JSON: the key is `"<shape>|<config>"` where
//! `<shape>` is the offsets `dr,dc` joined by `;` in raster order (empty for the
//! corner pixel) and `<config>` is the alphabet indices read at those offsets
//! joined by `,`. The value is the pmf over the alphabet.

use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{offsets_key, Field};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MmmSpec {
    /// Intensities in `[0, 1]`, strictly increasing.
    pub alphabet: Vec<f64>,
    pub w: usize,
    pub tables: BTreeMap<String, Vec<f64>>,
}

/// Offsets of the corner window truncated to `up` rows above and `left`
/// columns to the left, raster order.
pub fn truncated_corner(up: usize, left: usize) -> Vec<(i32, i32)> {
    (-(up as i32)..=0)
        .flat_map(|r| (-(left as i32)..=0).map(move |c| (r, c)))
        .filter(|&o| o != (0, 0))
        .collect()
}

fn config_key(symbols: &[usize]) -> String {
    symbols.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(",")
}

/// Digits of `index` in base `k`, least significant first.
pub(crate) fn digits(mut index: usize, k: usize, n: usize) -> Vec<usize> {
    (0..n)
        .map(|_| {
            let d = index % k;
            index /= k;
            d
        })
        .collect()
}

impl MmmSpec {
    /// Builds every table from `pmf(offsets, symbols)`.
    pub fn from_fn<F>(alphabet: Vec<f64>, w: usize, pmf: F) -> Result<Self>
    where
        F: Fn(&[(i32, i32)], &[usize]) -> Vec<f64>,
    {
        let k = alphabet.len();
        let mut tables = BTreeMap::new();
        for up in 0..w {
            for left in 0..w {
                let offsets = truncated_corner(up, left);
                let shape_key = offsets_key(&offsets);
                for c in 0..k.pow(offsets.len() as u32) {
                    let symbols = digits(c, k, offsets.len());
                    tables.insert(format!("{shape_key}|{}", config_key(&symbols)), pmf(&offsets, &symbols));
                }
            }
        }
        let spec = MmmSpec { alphabet, w, tables };
        spec.compile()?;
        Ok(spec)
    }

    /// Independent pixels with marginal `probs`.
    pub fn iid(alphabet: Vec<f64>, probs: Vec<f64>, w: usize) -> Result<Self> {
        MmmSpec::from_fn(alphabet, w, |_, _| probs.clone())
    }

    /// Every pixel equals `alphabet[symbol]`.
    pub fn constant(alphabet: Vec<f64>, symbol: usize, w: usize) -> Result<Self> {
        let k = alphabet.len();
        MmmSpec::from_fn(alphabet, w, |_, _| {
            let mut p = vec![0.0; k];
            p[symbol] = 1.0;
            p
        })
    }

    /// Binary `w = 2` model whose rows are independent stationary Markov
    /// chains: each pixel repeats its left neighbor with probability `stay`,
    /// and the first column is uniform.
    pub fn copy_left(stay: f64) -> Result<Self> {
        MmmSpec::from_fn(vec![0.0, 1.0], 2, |offsets, symbols| {
            match offsets.iter().position(|&o| o == (0, -1)) {
                Some(i) => {
                    let mut p = vec![1.0 - stay; 2];
                    p[symbols[i]] = stay;
                    p
                }
                None => vec![0.5, 0.5],
            }
        })
    }

    /// Binary `w = 2` Pickard field with diagonal coupling.
    ///
    /// Horizontal and vertical neighbors agree with probability `agree`; the
    /// up and left neighbors are independent given the up-left one, which
    /// makes the field stationary on the quarter plane. With `(a, b, c)` the
    /// (up-left, up, left) symbols and `q = P(x = 1 | a, b, c)`:
    /// `q(0,0,0) = corner`, `q(0,0,1) = q(0,1,0) = mixed`,
    /// `q(0,1,1) = corner · agree² / (1 - agree)²`, and flipping every bit
    /// maps `q` to `1 - q`.
    pub fn pickard_diagonal(agree: f64, corner: f64, mixed: f64) -> Result<Self> {
        let opposite = corner * agree * agree / ((1.0 - agree) * (1.0 - agree));
        if !(0.0..=1.0).contains(&opposite) {
            return Err(Error::Spec(format!(
                "q(0,1,1) = {opposite} outside [0, 1]; lower `corner` or `agree`"
            )));
        }
        MmmSpec::from_fn(vec![0.0, 1.0], 2, move |offsets, s| {
            let p1 = match offsets.len() {
                0 => 0.5,
                1 => {
                    if s[0] == 1 {
                        agree
                    } else {
                        1.0 - agree
                    }
                }
                _ => {
                    // offsets are (-1,-1), (-1,0), (0,-1)
                    let flip = s[0] == 1;
                    let (b, c) = if flip { (1 - s[1], 1 - s[2]) } else { (s[1], s[2]) };
                    let q = match (b, c) {
                        (0, 0) => corner,
                        (1, 1) => opposite,
                        _ => mixed,
                    };
                    if flip {
                        1.0 - q
                    } else {
                        q
                    }
                }
            };
            vec![1.0 - p1, p1]
        })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: MmmSpec = serde_json::from_str(text)?;
        spec.compile()?;
        Ok(spec)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn k(&self) -> usize {
        self.alphabet.len()
    }

    /// Validates the spec and lays the tables out for fast lookup.
    pub fn compile(&self) -> Result<CompiledMmm> {
        let k = self.alphabet.len();
        if k == 0 {
            return Err(Error::Spec("empty alphabet".into()));
        }
        if self.alphabet.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::Spec("alphabet values must lie in [0, 1]".into()));
        }
        if self.alphabet.windows(2).any(|p| p[0] >= p[1]) {
            return Err(Error::Spec("alphabet must be strictly increasing".into()));
        }
        if self.w < 1 {
            return Err(Error::Spec("w must be at least 1".into()));
        }
        let mut tables = Vec::with_capacity(self.w * self.w);
        for up in 0..self.w {
            for left in 0..self.w {
                let offsets = truncated_corner(up, left);
                let configs = (k as u128).pow(offsets.len() as u32);
                if configs > 1_000_000 {
                    return Err(Error::EnumerationTooLarge {
                        needed: configs,
                        limit: 1_000_000,
                    });
                }
                let shape_key = offsets_key(&offsets);
                let mut flat = Vec::with_capacity(configs as usize * k);
                for c in 0..configs as usize {
                    let symbols = digits(c, k, offsets.len());
                    let key = format!("{shape_key}|{}", config_key(&symbols));
                    let pmf = self
                        .tables
                        .get(&key)
                        .ok_or_else(|| Error::Spec(format!("missing table {key:?}")))?;
                    if pmf.len() != k {
                        return Err(Error::Spec(format!(
                            "table {key:?} has {} entries, alphabet has {k}",
                            pmf.len()
                        )));
                    }
                    if pmf.iter().any(|p| p.is_nan() || *p < 0.0) {
                        return Err(Error::Spec(format!("table {key:?} has a negative probability")));
                    }
                    let total: f64 = pmf.iter().sum();
                    if (total - 1.0).abs() > 1e-9 {
                        return Err(Error::Spec(format!("table {key:?} sums to {total}")));
                    }
                    flat.extend_from_slice(pmf);
                }
                tables.push(CompiledTable { offsets, flat });
            }
        }
        Ok(CompiledMmm {
            k,
            w: self.w,
            alphabet: self.alphabet.clone(),
            tables,
        })
    }
}

#[derive(Clone, Debug)]
pub(crate) struct CompiledTable {
    pub offsets: Vec<(i32, i32)>,
    /// `pmf[a]` of configuration `c` at `flat[c * k + a]`; digit `m` of `c`
    /// is the symbol at `offsets[m]`, least significant first.
    pub flat: Vec<f64>,
}

/// Validated spec with tables indexed by truncation.
#[derive(Clone, Debug)]
pub struct CompiledMmm {
    pub(crate) k: usize,
    pub(crate) w: usize,
    pub(crate) alphabet: Vec<f64>,
    pub(crate) tables: Vec<CompiledTable>,
}

impl CompiledMmm {
    /// Table used at quarter-plane position `(row, col)`.
    pub(crate) fn table_at(&self, row: usize, col: usize) -> &CompiledTable {
        let up = row.min(self.w - 1);
        let left = col.min(self.w - 1);
        &self.tables[up * self.w + left]
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn alphabet(&self) -> &[f64] {
        &self.alphabet
    }
}

/// Samples a `height × width` field in raster order from the model.
pub fn gen_mmm_field<R: Rng + ?Sized>(spec: &MmmSpec, height: usize, width: usize, rng: &mut R) -> Result<Field> {
    let model = spec.compile()?;
    let symbols = gen_mmm_symbols(&model, height, width, rng);
    Field::from_values(
        height,
        width,
        symbols.iter().map(|&s| model.alphabet[s as usize]).collect(),
    )
}

pub(crate) fn gen_mmm_symbols<R: Rng + ?Sized>(
    model: &CompiledMmm,
    height: usize,
    width: usize,
    rng: &mut R,
) -> Vec<u8> {
    let k = model.k;
    let mut sym = vec![0u8; height * width];
    for i in 0..height {
        for j in 0..width {
            let table = model.table_at(i, j);
            let mut c = 0usize;
            let mut stride = 1usize;
            for &(dr, dc) in &table.offsets {
                let r = (i as i64 + dr as i64) as usize;
                let q = (j as i64 + dc as i64) as usize;
                c += sym[r * width + q] as usize * stride;
                stride *= k;
            }
            let pmf = &table.flat[c * k..(c + 1) * k];
            let u: f64 = rng.gen();
            let mut acc = 0.0;
            let mut pick = k - 1;
            for (a, &p) in pmf.iter().enumerate() {
                acc += p;
                if u < acc {
                    pick = a;
                    break;
                }
            }
            sym[i * width + j] = pick as u8;
        }
    }
    sym
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::substream;

    #[test]
    fn truncations() {
        assert!(truncated_corner(0, 0).is_empty());
        assert_eq!(truncated_corner(0, 1), vec![(0, -1)]);
        assert_eq!(truncated_corner(1, 1), vec![(-1, -1), (-1, 0), (0, -1)]);
        assert_eq!(truncated_corner(2, 2).len(), 8);
    }

    #[test]
    fn json_round_trip_and_validation() {
        let spec = MmmSpec::copy_left(0.9).unwrap();
        assert_eq!(spec.tables.len(), 1 + 2 + 2 + 8);
        let t = &spec.tables["0,-1|1"];
        assert!((t[0] - 0.1).abs() < 1e-15 && t[1] == 0.9);
        let back = MmmSpec::from_json(&spec.to_json().unwrap()).unwrap();
        assert_eq!(back, spec);

        let mut broken = spec.clone();
        broken.tables.remove("-1,0|0");
        assert!(matches!(broken.compile(), Err(Error::Spec(_))));
        let mut broken = spec.clone();
        broken.tables.insert("|".into(), vec![0.6, 0.6]);
        assert!(broken.compile().is_err());
        let mut broken = spec;
        broken.alphabet = vec![1.0, 0.0];
        assert!(broken.compile().is_err());
    }

    #[test]
    fn iid_marginal() {
        let spec = MmmSpec::iid(vec![0.0, 0.5, 1.0], vec![0.2, 0.3, 0.5], 2).unwrap();
        let f = gen_mmm_field(&spec, 100, 100, &mut substream(1, 0)).unwrap();
        let n = f.len() as f64;
        for (v, p) in [(0.0, 0.2), (0.5, 0.3), (1.0, 0.5)] {
            let freq = f.values().iter().filter(|&&x| x == v).count() as f64 / n;
            let se = (p * (1.0 - p) / n).sqrt();
            assert!((freq - p).abs() < 3.0 * se, "{v}: {freq} vs {p}");
        }
    }

    #[test]
    fn copy_left_agreement_rate() {
        // each row is a chain that repeats its left neighbor w.p. 0.9
        let spec = MmmSpec::copy_left(0.9).unwrap();
        let f = gen_mmm_field(&spec, 100, 101, &mut substream(2, 0)).unwrap();
        let mut agree = 0usize;
        let mut total = 0usize;
        for r in 0..100 {
            for c in 1..101 {
                total += 1;
                agree += (f.at(r, c) == f.at(r, c - 1)) as usize;
            }
        }
        let rate = agree as f64 / total as f64;
        let se = (0.9f64 * 0.1 / total as f64).sqrt();
        assert!((rate - 0.9).abs() < 3.0 * se, "rate {rate}");
    }

    #[test]
    fn generation_is_deterministic() {
        let spec = MmmSpec::pickard_diagonal(0.75, 0.05, 0.2).unwrap();
        let a = gen_mmm_field(&spec, 20, 30, &mut substream(3, 1)).unwrap();
        let b = gen_mmm_field(&spec, 20, 30, &mut substream(3, 1)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn pickard_parameters_are_checked() {
        assert!(MmmSpec::pickard_diagonal(0.9, 0.05, 0.2).is_err());
        assert!(MmmSpec::pickard_diagonal(0.7, 0.05, 0.2).is_ok());
    }
}
