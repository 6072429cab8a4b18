//! Sequential pixel-by-pixel synthesis for the corner, rectangular and spiral
//! schemes.
//!
//! A job copies a seed block from the observed field, then visits every other
//! canvas pixel in the scheme's order. Each pixel reads its already-filled
//! neighborhood, weighs every observed site where the same shape fits, draws
//! one site and copies that site's value.

mod index;

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use log::warn;
use rand::Rng;
use serde::{Deserialize, Serialize};

pub use index::{CandidateGroup, CandidateIndex};

use crate::error::{Error, Result};
use crate::field::{extract_vector, Field, LatticePoint, Shape};
use crate::geometry::{CanvasGeometry, Scheme};
use crate::par;
use crate::rng::{substream, StreamRng};
use crate::weighting::{
    epsilon_match_set, log_weight_sq, normalize_weights, spatial_weights, weighted_ssd, WeightingMode,
};

/// Parameters of one synthesis job.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SynthesisConfig {
    pub scheme: Scheme,
    pub w: usize,
    pub mode: WeightingMode,
    pub out_height: usize,
    pub out_width: usize,
    pub rng_seed: u64,
    /// Side of the seed block; `None` means the scheme default.
    pub seed_side: Option<usize>,
    /// Log a warning when the best match is farther than this.
    pub warn_distance: Option<f64>,
}

impl SynthesisConfig {
    pub fn new(
        scheme: Scheme,
        w: usize,
        mode: WeightingMode,
        out_height: usize,
        out_width: usize,
        rng_seed: u64,
    ) -> Self {
        SynthesisConfig {
            scheme,
            w,
            mode,
            out_height,
            out_width,
            rng_seed,
            seed_side: None,
            warn_distance: None,
        }
    }

    pub fn with_seed_side(mut self, side: usize) -> Self {
        self.seed_side = Some(side);
        self
    }

    pub fn seed_side(&self) -> usize {
        self.seed_side.unwrap_or_else(|| self.scheme.default_seed_side(self.w))
    }

    pub fn validate(&self) -> Result<()> {
        if self.w < 2 {
            return Err(Error::InvalidParameter(format!(
                "window parameter w must be at least 2, got {}",
                self.w
            )));
        }
        let side = self.seed_side();
        if side == 0 {
            return Err(Error::InvalidParameter("seed side must be positive".into()));
        }
        if self.out_height < side || self.out_width < side {
            return Err(Error::InvalidParameter(format!(
                "output {}x{} is smaller than the {side}x{side} seed",
                self.out_height, self.out_width
            )));
        }
        self.mode.validate()
    }

    pub fn geometry(&self) -> Result<CanvasGeometry> {
        self.validate()?;
        CanvasGeometry::new(self.scheme, self.w, self.out_height, self.out_width, self.seed_side())
    }
}

/// Outcome of one pixel draw.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Draw {
    /// Observed site that was copied.
    pub site: LatticePoint,
    pub value: f64,
    /// Smallest distance between the target neighborhood and any candidate:
    /// plain SSD in kernel mode, spatially weighted SSD in ε mode.
    pub best_distance: f64,
}

/// Read-only view of an observed field plus a per-shape candidate cache.
///
/// One resampler may serve any number of jobs on the same observed field,
/// sequentially or from several threads.
pub struct Resampler<'a> {
    observed: &'a Field,
    cache: Mutex<HashMap<Shape, Arc<CandidateIndex>>>,
}

/// Cached indexes are dropped wholesale beyond this many shapes.
const CACHE_LIMIT: usize = 4096;

impl<'a> Resampler<'a> {
    pub fn new(observed: &'a Field) -> Result<Self> {
        if !observed.is_complete() {
            return Err(Error::InvalidParameter("observed field has unfilled pixels".into()));
        }
        Ok(Resampler {
            observed,
            cache: Mutex::new(HashMap::new()),
        })
    }

    pub fn observed(&self) -> &Field {
        self.observed
    }

    /// Candidate index for `shape`, built on first use.
    pub fn candidates(&self, shape: &Shape) -> Arc<CandidateIndex> {
        if let Some(idx) = self.cache.lock().unwrap().get(shape) {
            return Arc::clone(idx);
        }
        let idx = Arc::new(CandidateIndex::build(self.observed, shape));
        let mut cache = self.cache.lock().unwrap();
        if cache.len() >= CACHE_LIMIT {
            cache.clear();
        }
        Arc::clone(cache.entry(shape.clone()).or_insert(idx))
    }

    /// Draws one observed site for the neighborhood vector `target` read with `shape`.
    pub fn draw<R: Rng + ?Sized>(
        &self,
        target: &[f64],
        shape: &Shape,
        mode: &WeightingMode,
        rng: &mut R,
    ) -> Result<Draw> {
        if target.len() != shape.len() {
            return Err(Error::ShapeMismatch {
                expected: shape.len(),
                found: target.len(),
            });
        }
        let index = self.candidates(shape);
        if index.is_empty() {
            return Err(Error::EmptyCandidates);
        }
        let groups = index.groups();
        let p = shape.len();

        let (group, best_distance) = match *mode {
            WeightingMode::KernelGaussian { b } => {
                let sq = par::map_range(groups.len(), |g| {
                    target
                        .iter()
                        .zip(&groups[g].vector)
                        .map(|(x, y)| (x - y) * (x - y))
                        .sum::<f64>()
                });
                let best = sq.iter().copied().fold(f64::INFINITY, f64::min);
                let log_weights = sq
                    .iter()
                    .zip(groups)
                    .map(|(&d, g)| (g.members.len() as f64).ln() + log_weight_sq(d, p, b))
                    .collect();
                let weights = normalize_weights(log_weights)?;
                (weights.sample_index(rng.gen::<f64>()), best)
            }
            WeightingMode::UniformEpsilon { epsilon, spatial_sigma } => {
                let g_weights = spatial_weights(shape, spatial_sigma);
                let dist = par::map_range(groups.len(), |g| weighted_ssd(target, &groups[g].vector, &g_weights));
                let best = dist.iter().copied().fold(f64::INFINITY, f64::min);
                let matches = epsilon_match_set(&dist, epsilon)?;
                let total: usize = matches.iter().map(|&g| groups[g].members.len()).sum();
                let mut k = rng.gen_range(0..total);
                let mut chosen = matches[matches.len() - 1];
                for &g in &matches {
                    let n = groups[g].members.len();
                    if k < n {
                        chosen = g;
                        break;
                    }
                    k -= n;
                }
                (chosen, best)
            }
        };

        let members = &groups[group].members;
        let site = members[rng.gen_range(0..members.len())];
        Ok(Draw {
            site,
            value: self.observed.get(site)?,
            best_distance,
        })
    }
}

/// Canvas, fill order and cursor of a job in progress.
///
/// The filled set is always the seed plus every ordering predecessor of the
/// cursor.
#[derive(Clone, Debug)]
pub struct SynthesisState {
    pub canvas: Field,
    geometry: CanvasGeometry,
    cursor: usize,
    rng_seed: u64,
}

impl SynthesisState {
    pub fn geometry(&self) -> &CanvasGeometry {
        &self.geometry
    }

    /// Next pixel to synthesize, if any.
    pub fn next_point(&self) -> Option<LatticePoint> {
        self.geometry.ordering().get(self.cursor).copied()
    }

    pub fn remaining(&self) -> usize {
        self.geometry.ordering().len() - self.cursor
    }

    /// Random stream reserved for the pixel at the cursor.
    pub fn pixel_rng(&self) -> StreamRng {
        substream(self.rng_seed, self.cursor as u64 + 1)
    }

    /// Synthesizes the pixel at the cursor and advances; `None` when done.
    pub fn step(
        &mut self,
        resampler: &Resampler<'_>,
        config: &SynthesisConfig,
    ) -> Result<Option<(LatticePoint, Draw)>> {
        let Some(t) = self.next_point() else {
            return Ok(None);
        };
        let mut rng = self.pixel_rng();
        let draw = draw_pixel(self, resampler, t, config, &mut rng)?;
        self.canvas.set(t, draw.value)?;
        self.cursor += 1;
        Ok(Some((t, draw)))
    }

    pub fn into_field(self) -> Field {
        self.canvas
    }
}

/// Copies a uniformly chosen `seed_side × seed_side` block of `observed` into
/// a fresh canvas: top-left for raster schemes, centered for spiral.
pub fn place_seed<R: Rng + ?Sized>(observed: &Field, config: &SynthesisConfig, rng: &mut R) -> Result<SynthesisState> {
    let geometry = config.geometry()?;
    let side = config.seed_side();
    if observed.height() < side || observed.width() < side {
        return Err(Error::ObservedTooSmall {
            height: observed.height(),
            width: observed.width(),
            side,
        });
    }
    let top = rng.gen_range(0..=observed.height() - side);
    let left = rng.gen_range(0..=observed.width() - side);
    let seed = geometry.seed();
    let mut canvas = Field::empty(config.out_height, config.out_width)?;
    for dr in 0..side {
        for dc in 0..side {
            let value = observed.get(LatticePoint::new((top + dr) as i64, (left + dc) as i64))?;
            canvas.set(
                LatticePoint::new((seed.top + dr) as i64, (seed.left + dc) as i64),
                value,
            )?;
        }
    }
    Ok(SynthesisState {
        canvas,
        geometry,
        cursor: 0,
        rng_seed: config.rng_seed,
    })
}

/// Draws the value of pixel `t` from its filled neighborhood.
pub fn draw_pixel<R: Rng + ?Sized>(
    state: &SynthesisState,
    resampler: &Resampler<'_>,
    t: LatticePoint,
    config: &SynthesisConfig,
    rng: &mut R,
) -> Result<Draw> {
    let shape = state.geometry.neighborhood_shape(t)?;
    let target = extract_vector(&state.canvas, &shape, t)?;
    let draw = resampler.draw(&target, &shape, &config.mode, rng)?;
    if let Some(limit) = config.warn_distance {
        if draw.best_distance > limit {
            warn!(
                "pixel {t}: best neighborhood distance {:.4} exceeds {limit}",
                draw.best_distance
            );
        }
    }
    Ok(draw)
}

/// Value drawn for pixel `t`; see [`draw_pixel`].
pub fn synthesize_pixel<R: Rng + ?Sized>(
    state: &SynthesisState,
    resampler: &Resampler<'_>,
    t: LatticePoint,
    config: &SynthesisConfig,
    rng: &mut R,
) -> Result<f64> {
    draw_pixel(state, resampler, t, config, rng).map(|d| d.value)
}

/// Runs a whole job against an existing resampler.
pub fn synthesize_with(resampler: &Resampler<'_>, config: &SynthesisConfig) -> Result<Field> {
    let mut seed_rng = substream(config.rng_seed, 0);
    let mut state = place_seed(resampler.observed(), config, &mut seed_rng)?;
    while state.step(resampler, config)?.is_some() {}
    debug_assert!(state.canvas.is_complete());
    Ok(state.into_field())
}

/// Synthesizes an `out_height × out_width` field from `observed`.
pub fn synthesize(observed: &Field, config: &SynthesisConfig) -> Result<Field> {
    config.validate()?;
    let resampler = Resampler::new(observed)?;
    synthesize_with(&resampler, config)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::substream;
    use rand::Rng;

    fn random_field(h: usize, w: usize, levels: usize, seed: u64) -> Field {
        let mut rng = substream(seed, 99);
        let values = (0..h * w)
            .map(|_| rng.gen_range(0..levels) as f64 / (levels - 1) as f64)
            .collect();
        Field::from_values(h, w, values).unwrap()
    }

    fn modes(w: usize) -> [WeightingMode; 2] {
        [
            WeightingMode::kernel(0.05).unwrap(),
            WeightingMode::uniform(0.1, w).unwrap(),
        ]
    }

    #[test]
    fn constant_field_reproduces_constant() {
        let obs = Field::constant(8, 8, 0.375).unwrap();
        for scheme in Scheme::ALL {
            for mode in modes(2) {
                let cfg = SynthesisConfig::new(scheme, 2, mode, 10, 9, 3);
                let out = synthesize(&obs, &cfg).unwrap();
                assert!(out.values().iter().all(|&v| v == 0.375));
            }
        }
    }

    #[test]
    fn seed_only_output_copies_observed() {
        let obs = random_field(3, 3, 5, 1);
        let cfg = SynthesisConfig::new(Scheme::Spiral, 2, WeightingMode::kernel(0.1).unwrap(), 3, 3, 9);
        assert_eq!(synthesize(&obs, &cfg).unwrap(), obs);
        let cfg = SynthesisConfig::new(Scheme::Corner, 3, WeightingMode::kernel(0.1).unwrap(), 3, 3, 9);
        assert_eq!(synthesize(&obs, &cfg).unwrap(), obs);
    }

    #[test]
    fn seed_is_a_block_of_observed() {
        let obs = random_field(7, 6, 50, 2);
        let cfg = SynthesisConfig::new(Scheme::Spiral, 2, WeightingMode::kernel(0.1).unwrap(), 9, 9, 4);
        let state = place_seed(&obs, &cfg, &mut substream(4, 0)).unwrap();
        let seed = state.geometry().seed();
        assert_eq!((seed.top, seed.left, seed.side), (3, 3, 3));
        assert_eq!(state.canvas.filled_count(), 9);
        let block: Vec<f64> = (0..3)
            .flat_map(|r| (0..3).map(move |c| (r, c)))
            .map(|(r, c)| state.canvas.at(3 + r, 3 + c))
            .collect();
        let found =
            (0..=4).any(|top| (0..=3).any(|left| (0..9).all(|i| obs.at(top + i / 3, left + i % 3) == block[i])));
        assert!(found);
    }

    #[test]
    fn observed_smaller_than_seed_is_rejected() {
        let obs = random_field(2, 5, 3, 3);
        let cfg = SynthesisConfig::new(Scheme::Corner, 3, WeightingMode::kernel(0.1).unwrap(), 6, 6, 0);
        assert!(matches!(synthesize(&obs, &cfg), Err(Error::ObservedTooSmall { .. })));
    }

    #[test]
    fn shape_larger_than_observed_reports_empty_candidates() {
        // 3x3 observed, w=3 rectangular interior needs a 3x5 block
        let obs = random_field(3, 3, 3, 5);
        let cfg = SynthesisConfig::new(Scheme::Rectangular, 3, WeightingMode::kernel(0.1).unwrap(), 3, 8, 0);
        assert!(matches!(synthesize(&obs, &cfg), Err(Error::EmptyCandidates)));
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let obs = random_field(6, 6, 3, 5);
        let mut cfg = SynthesisConfig::new(Scheme::Corner, 1, WeightingMode::kernel(0.1).unwrap(), 6, 6, 0);
        assert!(synthesize(&obs, &cfg).is_err());
        cfg.w = 2;
        cfg.mode = WeightingMode::KernelGaussian { b: -1.0 };
        assert!(synthesize(&obs, &cfg).is_err());
        cfg.mode = WeightingMode::kernel(0.1).unwrap();
        cfg.out_width = 1;
        assert!(synthesize(&obs, &cfg).is_err());
    }

    #[test]
    fn single_candidate_is_certain() {
        // 2x2 observed with corner w=2: the interior shape fits only at (1, 1)
        let obs = Field::from_rows(&[&[0.1, 0.2], &[0.3, 0.9]]).unwrap();
        let resampler = Resampler::new(&obs).unwrap();
        let shape = Shape::new(vec![(-1, -1), (-1, 0), (0, -1)]).unwrap();
        for s in 0..20 {
            for mode in modes(2) {
                let d = resampler
                    .draw(&[0.7, 0.0, 0.4], &shape, &mode, &mut substream(s, 1))
                    .unwrap();
                assert_eq!(d.site, LatticePoint::new(1, 1));
                assert_eq!(d.value, 0.9);
            }
        }
    }

    #[test]
    fn epsilon_zero_returns_best_matches() {
        let obs = random_field(10, 10, 4, 8);
        let resampler = Resampler::new(&obs).unwrap();
        let shape = Shape::new(vec![(-1, -1), (-1, 0), (-1, 1), (0, -1)]).unwrap();
        let sigma = 0.8;
        let mode = WeightingMode::UniformEpsilon {
            epsilon: 0.0,
            spatial_sigma: sigma,
        };
        let target = [0.2, 0.9, 0.4, 0.1];
        for s in 0..50 {
            let d = resampler.draw(&target, &shape, &mode, &mut substream(s, 0)).unwrap();
            let v = extract_vector(&obs, &shape, d.site).unwrap();
            let dist = crate::weighting::patch_distance(&target, &v, sigma, &shape).unwrap();
            assert_eq!(dist, d.best_distance);
        }
    }

    #[test]
    fn deterministic_given_seed() {
        let obs = random_field(12, 12, 6, 10);
        for scheme in Scheme::ALL {
            let cfg = SynthesisConfig::new(scheme, 2, WeightingMode::kernel(0.2).unwrap(), 14, 11, 77);
            let a = synthesize(&obs, &cfg).unwrap();
            let b = synthesize(&obs, &cfg).unwrap();
            assert_eq!(a, b);
            let other = SynthesisConfig { rng_seed: 78, ..cfg };
            assert_ne!(a, synthesize(&obs, &other).unwrap());
        }
    }

    #[test]
    fn output_values_come_from_observed() {
        let obs = random_field(9, 9, 200, 11);
        let pool: Vec<u64> = obs.values().iter().map(|v| v.to_bits()).collect();
        for scheme in Scheme::ALL {
            for mode in modes(3) {
                let cfg = SynthesisConfig::new(scheme, 3, mode, 12, 10, 5);
                let out = synthesize(&obs, &cfg).unwrap();
                assert!(out.is_complete());
                assert!(out.values().iter().all(|v| pool.contains(&v.to_bits())));
            }
        }
    }

    #[test]
    fn state_steps_through_ordering() {
        let obs = random_field(8, 8, 4, 12);
        let cfg = SynthesisConfig::new(Scheme::Corner, 2, WeightingMode::kernel(0.1).unwrap(), 4, 5, 1);
        let resampler = Resampler::new(&obs).unwrap();
        let mut state = place_seed(&obs, &cfg, &mut substream(1, 0)).unwrap();
        let order = state.geometry().ordering().to_vec();
        let mut visited = Vec::new();
        while let Some((t, _)) = state.step(&resampler, &cfg).unwrap() {
            visited.push(t);
            // filled = seed + predecessors
            assert_eq!(state.canvas.filled_count(), 4 + visited.len());
        }
        assert_eq!(visited, order);
        assert_eq!(state.remaining(), 0);
    }
}
