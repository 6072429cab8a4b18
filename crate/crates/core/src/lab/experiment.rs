//! Replicated synthesis experiments against exactly known window laws.
//!
//! Every `(T, replicate)` job owns a child seed derived from the experiment
//! seed, draws its own observed field and runs independently; rows are merged
//! in job order, so reports do not depend on the thread count.

use std::collections::BTreeMap;
use std::io::Write;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Field, LatticePoint};
use crate::geometry::{CanvasGeometry, Scheme, SeedRegion};
use crate::lab::cdf::{empirical_window_cdf, empirical_window_cdf_excluding, sup_distance, EmpiricalCdf, Grid};
use crate::lab::info::{conditional_mutual_information, pmf_from_counts};
use crate::lab::law::{exact_region_law, exact_window_law, WindowKind};
use crate::lab::mmm::{gen_mmm_field, MmmSpec};
use crate::par;
use crate::resampler::{synthesize_with, Resampler, SynthesisConfig};
use crate::rng::{derive_seed, stream_key, substream};
use crate::weighting::WeightingMode;

/// Sup distance between the synthesized `w × w` window CDF and the truth.
pub const SUP_Q: &str = "sup_q";
/// Sup distance between the synthesized `(2w−1)²` window CDF and the truth.
pub const SUP_V: &str = "sup_v";
/// Sup distance between two exact-law fields of the observed and output sizes.
pub const NULL_Q: &str = "null_q";
pub const NULL_V: &str = "null_v";
/// Plug-in `I(X₁; S₂ | S₁)` of the first synthesized pixel.
pub const CMI: &str = "cmi";
/// Constant key of the true `I(X₁; S₂ | S₁)`.
pub const CMI_TRUE: &str = "cmi_true";

/// Counterexample specs must carry more true CMI than this, in nats.
pub const CMI_FLOOR: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    /// Observed side lengths `T`.
    pub sizes: Vec<usize>,
    pub replicates: usize,
    /// Side of the synthesized square.
    pub out_side: usize,
    /// Bandwidth `b = scale · T^(−rate)`.
    pub bandwidth_scale: f64,
    pub bandwidth_rate: f64,
    pub rng_seed: u64,
    /// Also measure the two-sample distance between exact-law fields.
    pub null_floor: bool,
    /// Partial syntheses per replicate for the CMI estimate.
    pub cmi_samples: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            sizes: vec![32, 64, 128, 256],
            replicates: 20,
            out_side: 256,
            bandwidth_scale: 0.25,
            bandwidth_rate: 0.25,
            rng_seed: 0,
            null_floor: true,
            cmi_samples: 200_000,
        }
    }
}

impl ExperimentConfig {
    /// Defaults of the counterexample run: 128 × 128 outputs.
    pub fn counterexample() -> Self {
        ExperimentConfig {
            out_side: 128,
            ..ExperimentConfig::default()
        }
    }

    pub fn bandwidth(&self, t: usize) -> f64 {
        self.bandwidth_scale * (t as f64).powf(-self.bandwidth_rate)
    }

    fn validate(&self, seed_side: usize) -> Result<()> {
        if self.sizes.is_empty() || self.replicates == 0 {
            return Err(Error::InvalidParameter(
                "need at least one size and one replicate".into(),
            ));
        }
        if let Some(&t) = self.sizes.iter().find(|&&t| t < seed_side) {
            return Err(Error::InvalidParameter(format!(
                "observed side {t} is smaller than the {seed_side}x{seed_side} seed"
            )));
        }
        if self.out_side < seed_side + 1 {
            return Err(Error::InvalidParameter(format!(
                "output side {} leaves no synthesized pixels",
                self.out_side
            )));
        }
        if !(self.bandwidth_scale > 0.0 && self.bandwidth_scale.is_finite()) {
            return Err(Error::InvalidParameter("bandwidth scale must be positive".into()));
        }
        if !self.bandwidth_rate.is_finite() {
            return Err(Error::InvalidParameter("bandwidth rate must be finite".into()));
        }
        Ok(())
    }

    fn jobs(&self) -> Vec<(usize, usize)> {
        self.sizes
            .iter()
            .flat_map(|&t| (0..self.replicates).map(move |r| (t, r)))
            .collect()
    }

    fn job_seed(&self, t: usize, replicate: usize) -> u64 {
        derive_seed(self.rng_seed, stream_key(t as u64, replicate as u64))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub scheme: Scheme,
    #[serde(rename = "T")]
    pub t: usize,
    pub b: f64,
    pub replicate: usize,
    pub statistic: String,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub scheme: Scheme,
    #[serde(rename = "T")]
    pub t: usize,
    pub b: f64,
    pub statistic: String,
    pub replicates: usize,
    pub median: f64,
    /// Large-sample standard error of the median, `√(π/2) · sd / √n`.
    pub median_se: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub experiment: String,
    pub constants: BTreeMap<String, f64>,
    pub summary: Vec<SummaryRow>,
    #[serde(skip)]
    pub rows: Vec<ReportRow>,
}

pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n == 0 {
        f64::NAN
    } else if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

pub fn median_standard_error(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    if n < 2.0 {
        return f64::NAN;
    }
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (std::f64::consts::FRAC_PI_2 * var / n).sqrt()
}

impl ExperimentReport {
    fn assemble(experiment: &str, rows: Vec<ReportRow>, constants: BTreeMap<String, f64>) -> Self {
        let mut keys: Vec<(String, usize)> = Vec::new();
        for r in &rows {
            let key = (r.statistic.clone(), r.t);
            if !keys.contains(&key) {
                keys.push(key);
            }
        }
        let summary = keys
            .into_iter()
            .map(|(statistic, t)| {
                let group: Vec<&ReportRow> = rows.iter().filter(|r| r.statistic == statistic && r.t == t).collect();
                let values: Vec<f64> = group.iter().map(|r| r.value).collect();
                SummaryRow {
                    scheme: group[0].scheme,
                    t,
                    b: group[0].b,
                    statistic,
                    replicates: values.len(),
                    median: median(&values),
                    median_se: median_standard_error(&values),
                }
            })
            .collect();
        ExperimentReport {
            experiment: experiment.to_string(),
            constants,
            summary,
            rows,
        }
    }

    pub fn summary_row(&self, statistic: &str, t: usize) -> Option<&SummaryRow> {
        self.summary.iter().find(|s| s.statistic == statistic && s.t == t)
    }

    /// `(T, median)` of `statistic`, in size order of the run.
    pub fn medians(&self, statistic: &str) -> Vec<(usize, f64)> {
        self.summary
            .iter()
            .filter(|s| s.statistic == statistic)
            .map(|s| (s.t, s.median))
            .collect()
    }

    pub fn values(&self, statistic: &str, t: usize) -> Vec<f64> {
        self.rows
            .iter()
            .filter(|r| r.statistic == statistic && r.t == t)
            .map(|r| r.value)
            .collect()
    }

    /// One row per replicate and statistic: `scheme,T,b,replicate,statistic,value`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut writer = csv::Writer::from_writer(out);
        for row in &self.rows {
            writer.serialize(row)?;
        }
        writer.flush().map_err(|e| Error::io("<csv>", e))?;
        Ok(())
    }

    /// Summary medians and constants, without the per-replicate rows.
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Decreasing-medians and noise-floor check of `statistic` against `null`.
    pub fn trend(&self, statistic: &str, null: &str) -> Option<TrendVerdict> {
        let medians = self.medians(statistic);
        let &(last_t, last) = medians.last()?;
        let synth = self.summary_row(statistic, last_t)?;
        let floor = self.summary_row(null, last_t)?;
        let tolerance = 3.0 * (synth.median_se.powi(2) + floor.median_se.powi(2)).sqrt();
        Some(TrendVerdict {
            decreasing: medians.windows(2).all(|p| p[1].1 < p[0].1),
            medians,
            floor: floor.median,
            tolerance,
            within_floor: (last - floor.median).abs() <= tolerance,
        })
    }
}

/// Outcome of a trend check.
#[derive(Clone, Debug, PartialEq)]
pub struct TrendVerdict {
    pub medians: Vec<(usize, f64)>,
    /// Medians strictly decrease along the sizes.
    pub decreasing: bool,
    /// Median null distance at the largest size.
    pub floor: f64,
    /// Three combined standard errors of the two medians.
    pub tolerance: f64,
    pub within_floor: bool,
}

impl TrendVerdict {
    pub fn passed(&self) -> bool {
        self.decreasing && self.within_floor
    }
}

/// Truth CDF of a square window and its evaluation grid.
struct WindowTruth {
    side: usize,
    grid: Grid,
    cdf: EmpiricalCdf,
}

impl WindowTruth {
    fn new(spec: &MmmSpec, kind: WindowKind) -> Result<Self> {
        let side = kind.side(spec.w);
        let grid = Grid::product(&spec.alphabet, side * side)?;
        let cdf = exact_window_law(spec, kind)?.cdf(&grid)?;
        Ok(WindowTruth { side, grid, cdf })
    }

    fn distance(&self, field: &Field, seed: SeedRegion) -> Result<f64> {
        let est = empirical_window_cdf_excluding(field, self.side, &self.grid, Some(seed))?;
        sup_distance(&est, &self.cdf)
    }

    /// Two-sample distance between an observed-size and an output-size field.
    fn null(&self, observed: &Field, output: &Field, seed: SeedRegion) -> Result<f64> {
        let a = empirical_window_cdf(observed, self.side, &self.grid)?;
        let b = empirical_window_cdf_excluding(output, self.side, &self.grid, Some(seed))?;
        sup_distance(&a, &b)
    }
}

fn collect_rows(results: Vec<Result<Vec<ReportRow>>>) -> Result<Vec<ReportRow>> {
    let mut rows = Vec::new();
    for r in results {
        rows.extend(r?);
    }
    Ok(rows)
}

/// Synthesizes from exact-law observed fields of each size and measures the
/// `w × w` window CDF distance to the truth.
pub fn consistency_experiment(spec: &MmmSpec, scheme: Scheme, config: &ExperimentConfig) -> Result<ExperimentReport> {
    let w = spec.w;
    config.validate(scheme.default_seed_side(w))?;
    let truth = WindowTruth::new(spec, WindowKind::Q)?;

    let jobs = config.jobs();
    let results = par::map_jobs(&jobs, |&(t, replicate)| -> Result<Vec<ReportRow>> {
        let key = config.job_seed(t, replicate);
        let b = config.bandwidth(t);
        let row = |statistic: &str, value: f64| ReportRow {
            scheme,
            t,
            b,
            replicate,
            statistic: statistic.to_string(),
            value,
        };
        let observed = gen_mmm_field(spec, t, t, &mut substream(key, 0))?;
        let synth = SynthesisConfig::new(
            scheme,
            w,
            WeightingMode::kernel(b)?,
            config.out_side,
            config.out_side,
            derive_seed(key, 1),
        );
        let seed = synth.geometry()?.seed();
        let resampler = Resampler::new(&observed)?;
        let output = synthesize_with(&resampler, &synth)?;
        let mut rows = vec![row(SUP_Q, truth.distance(&output, seed)?)];
        if config.null_floor {
            let a = gen_mmm_field(spec, t, t, &mut substream(key, 2))?;
            let out = gen_mmm_field(spec, config.out_side, config.out_side, &mut substream(key, 3))?;
            rows.push(row(NULL_Q, truth.null(&a, &out, seed)?));
        }
        Ok(rows)
    });
    Ok(ExperimentReport::assemble(
        "consistency",
        collect_rows(results)?,
        BTreeMap::new(),
    ))
}

/// Pixel layout of the first spiral step after the seed.
struct FirstStep {
    /// Seed pixels in raster order (relative to the seed's top-left), then
    /// the first synthesized pixel.
    positions: Vec<(i32, i32)>,
    /// Indices into `positions` of the seed pixels the first pixel conditions on.
    s1: Vec<usize>,
    s2: Vec<usize>,
    x: usize,
    /// Shape of the first pixel's neighborhood.
    shape: crate::field::Shape,
    seed_side: usize,
}

impl FirstStep {
    fn new(w: usize) -> Result<Self> {
        let m = 2 * w - 1;
        let geometry = CanvasGeometry::new(Scheme::Spiral, w, m + 2, m + 2, m)?;
        let seed = geometry.seed();
        let t1 = geometry.ordering()[0];
        let shape = geometry.neighborhood_shape(t1)?;
        let rel = |p: LatticePoint| ((p.row - seed.top as i64) as i32, (p.col - seed.left as i64) as i32);
        let mut positions: Vec<(i32, i32)> = (0..m as i32).flat_map(|r| (0..m as i32).map(move |c| (r, c))).collect();
        let cond: Vec<(i32, i32)> = shape.offsets().iter().map(|&o| rel(t1.offset(o))).collect();
        let (s1, s2): (Vec<usize>, Vec<usize>) = (0..positions.len()).partition(|&i| cond.contains(&positions[i]));
        positions.push(rel(t1));
        Ok(FirstStep {
            x: positions.len() - 1,
            positions,
            s1,
            s2,
            shape,
            seed_side: m,
        })
    }
}

/// Measures how well spiral synthesis reproduces the joint law of the seed and
/// the first synthesized pixel, and the `w × w` and `(2w−1)²` window laws.
pub fn counterexample_experiment(spec: &MmmSpec, config: &ExperimentConfig) -> Result<ExperimentReport> {
    let w = spec.w;
    if w < 2 {
        return Err(Error::InvalidParameter("counterexample needs w >= 2".into()));
    }
    let step = FirstStep::new(w)?;
    config.validate(step.seed_side)?;
    if config.cmi_samples == 0 {
        return Err(Error::InvalidParameter("cmi_samples must be positive".into()));
    }
    let k = spec.k();
    let n = step.positions.len();
    let law = exact_region_law(spec, &step.positions)?;
    let cmi_true = conditional_mutual_information(law.pmf(), k, n, &[step.x], &step.s1, &step.s2);
    if cmi_true.is_nan() || cmi_true <= CMI_FLOOR {
        return Err(Error::NoCounterexample(cmi_true));
    }
    let q = WindowTruth::new(spec, WindowKind::Q)?;
    let v = WindowTruth::new(spec, WindowKind::V)?;

    let jobs = config.jobs();
    let results = par::map_jobs(&jobs, |&(t, replicate)| -> Result<Vec<ReportRow>> {
        let key = config.job_seed(t, replicate);
        let b = config.bandwidth(t);
        let row = |statistic: &str, value: f64| ReportRow {
            scheme: Scheme::Spiral,
            t,
            b,
            replicate,
            statistic: statistic.to_string(),
            value,
        };
        let observed = gen_mmm_field(spec, t, t, &mut substream(key, 0))?;
        let mode = WeightingMode::kernel(b)?;
        let resampler = Resampler::new(&observed)?;

        let counts = first_step_counts(
            &observed,
            &resampler,
            &step,
            &spec.alphabet,
            &mode,
            config.cmi_samples,
            key,
        )?;
        let cmi = conditional_mutual_information(&pmf_from_counts(&counts), k, n, &[step.x], &step.s1, &step.s2);

        let synth = SynthesisConfig::new(
            Scheme::Spiral,
            w,
            mode,
            config.out_side,
            config.out_side,
            derive_seed(key, 1),
        );
        let seed = synth.geometry()?.seed();
        let output = synthesize_with(&resampler, &synth)?;
        let mut rows = vec![
            row(CMI, cmi),
            row(SUP_Q, q.distance(&output, seed)?),
            row(SUP_V, v.distance(&output, seed)?),
        ];
        if config.null_floor {
            let a = gen_mmm_field(spec, t, t, &mut substream(key, 2))?;
            let out = gen_mmm_field(spec, config.out_side, config.out_side, &mut substream(key, 3))?;
            rows.push(row(NULL_Q, q.null(&a, &out, seed)?));
            rows.push(row(NULL_V, v.null(&a, &out, seed)?));
        }
        Ok(rows)
    });
    let mut constants = BTreeMap::new();
    constants.insert(CMI_TRUE.to_string(), cmi_true);
    Ok(ExperimentReport::assemble(
        "counterexample",
        collect_rows(results)?,
        constants,
    ))
}

/// Counts of (seed, first pixel) configurations over independent partial
/// syntheses: a uniformly placed seed block, then one spiral draw.
fn first_step_counts(
    observed: &Field,
    resampler: &Resampler<'_>,
    step: &FirstStep,
    alphabet: &[f64],
    mode: &WeightingMode,
    samples: usize,
    key: u64,
) -> Result<Vec<u64>> {
    let k = alphabet.len();
    let m = step.seed_side;
    let symbol = |v: f64| -> Result<usize> {
        alphabet
            .iter()
            .position(|&a| a == v)
            .ok_or_else(|| Error::Spec(format!("value {v} is not in the alphabet")))
    };
    let cond: Vec<(usize, usize)> = step
        .s1
        .iter()
        .map(|&i| (step.positions[i].0 as usize, step.positions[i].1 as usize))
        .collect();
    // shape offsets follow the shape's order, which need not match `s1`
    let (xr, xc) = step.positions[step.x];
    let target_cells: Vec<(usize, usize)> = step
        .shape
        .offsets()
        .iter()
        .map(|&(dr, dc)| ((xr + dr) as usize, (xc + dc) as usize))
        .collect();
    debug_assert!(target_cells.iter().all(|c| cond.contains(c)));

    let mut counts = vec![0u64; k.pow(step.positions.len() as u32)];
    let mut rng = substream(key, 4);
    let mut target = vec![0.0; target_cells.len()];
    for _ in 0..samples {
        let top = rng.gen_range(0..=observed.height() - m);
        let left = rng.gen_range(0..=observed.width() - m);
        let mut index = 0usize;
        let mut stride = 1usize;
        for r in 0..m {
            for c in 0..m {
                index += symbol(observed.at(top + r, left + c))? * stride;
                stride *= k;
            }
        }
        for (slot, &(r, c)) in target.iter_mut().zip(&target_cells) {
            *slot = observed.at(top + r, left + c);
        }
        let draw = resampler.draw(&target, &step.shape, mode, &mut rng)?;
        index += symbol(draw.value)? * stride;
        counts[index] += 1;
    }
    Ok(counts)
}

/// Copy-left binary model used by the consistency runs.
pub fn default_consistency_spec() -> MmmSpec {
    MmmSpec::copy_left(0.9).expect("built-in spec is valid")
}

/// Binary Pickard model whose first spiral pixel depends on the seed beyond
/// its conditioning neighborhood.
pub fn default_counterexample_spec() -> MmmSpec {
    MmmSpec::pickard_diagonal(0.75, 0.1, 0.05).expect("built-in spec is valid")
}
