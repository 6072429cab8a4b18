//! Command-line front end.
//!
//! Exit status: 0 on success, 2 on usage errors (unknown flags, out-of-range
//! parameters), 1 on runtime errors. Diagnostics go to stderr; reports and
//! images go only to the requested files.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::info;

use crate::error::{Error, Result};
use crate::geometry::Scheme;
use crate::lab::experiment::{
    consistency_experiment, counterexample_experiment, default_consistency_spec, default_counterexample_spec,
    ExperimentConfig, ExperimentReport,
};
use crate::lab::mmm::MmmSpec;
use crate::pgm::{from_field, read_pgm, to_field, write_pgm, PgmFormat};
use crate::resampler::{synthesize, SynthesisConfig};
use crate::weighting::{default_spatial_sigma, WeightingMode};

#[derive(Debug, Parser)]
#[command(
    name = "texsyn",
    version,
    about = "Nonparametric texture resampling and consistency lab"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Synthesize a texture from an observed PGM image.
    Synthesize(SynthesizeArgs),
    /// Distance of synthesized window laws to an exactly known model law.
    Consistency(ConsistencyArgs),
    /// Spiral-scheme conditional independence defect on a Markov mesh model.
    Counterexample(CounterexampleArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Weights {
    /// Gaussian kernel weights with bandwidth `--b`.
    Kernel,
    /// Uniform over the ε-match set with spatially weighted distances.
    Uniform,
}

#[derive(Debug, Args)]
pub struct SynthesizeArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub output: PathBuf,
    /// Window parameter (at least 2).
    #[arg(long)]
    pub w: usize,
    #[arg(long, default_value = "corner")]
    pub scheme: Scheme,
    #[arg(long, value_enum, default_value = "kernel")]
    pub weights: Weights,
    #[arg(long, default_value_t = 0.01)]
    pub b: f64,
    #[arg(long, default_value_t = 0.1)]
    pub epsilon: f64,
    /// Spatial weighting scale of ε-mode distances; defaults to (2w - 1) / 6.4.
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub rng_seed: u64,
    /// Defaults to the input width.
    #[arg(long)]
    pub out_width: Option<usize>,
    /// Defaults to the input height.
    #[arg(long)]
    pub out_height: Option<usize>,
    /// Side of the copied seed block; defaults to w (raster) or 2w - 1 (spiral).
    #[arg(long)]
    pub seed_side: Option<usize>,
    /// Write plain (P2) instead of binary (P5) output.
    #[arg(long)]
    pub ascii: bool,
    /// Warn when the best neighborhood distance exceeds this value.
    #[arg(long)]
    pub warn_distance: Option<f64>,
}

#[derive(Debug, Args)]
pub struct LabArgs {
    /// Markov mesh model as JSON; a built-in model when omitted.
    #[arg(long)]
    pub spec: Option<PathBuf>,
    #[arg(long, value_delimiter = ',', default_value = "32,64,128,256")]
    pub sizes: Vec<usize>,
    #[arg(long, default_value_t = 20)]
    pub replicates: usize,
    #[arg(long, default_value_t = 0.25)]
    pub bandwidth_scale: f64,
    #[arg(long, default_value_t = 0.25)]
    pub bandwidth_rate: f64,
    #[arg(long, default_value_t = 0)]
    pub rng_seed: u64,
    /// Skip the exact-law noise floor runs.
    #[arg(long)]
    pub no_null: bool,
    /// Per-replicate rows.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// Summary medians; printed to stdout when neither report path is given.
    #[arg(long)]
    pub json: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ConsistencyArgs {
    #[command(flatten)]
    pub lab: LabArgs,
    #[arg(long, default_value = "corner")]
    pub scheme: Scheme,
    #[arg(long, default_value_t = 256)]
    pub out_side: usize,
}

#[derive(Debug, Args)]
pub struct CounterexampleArgs {
    #[command(flatten)]
    pub lab: LabArgs,
    #[arg(long, default_value_t = 128)]
    pub out_side: usize,
    /// Partial syntheses per replicate for the conditional mutual information.
    #[arg(long, default_value_t = 200_000)]
    pub cmi_samples: usize,
}

/// Usage problems found after parsing.
fn usage(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}

impl SynthesizeArgs {
    fn validate(&self) -> Result<()> {
        if self.w < 2 {
            return Err(usage(format!("--w must be at least 2, got {}", self.w)));
        }
        if !(self.b > 0.0 && self.b.is_finite()) {
            return Err(usage(format!("--b must be positive, got {}", self.b)));
        }
        if !(self.epsilon >= 0.0 && self.epsilon.is_finite()) {
            return Err(usage(format!("--epsilon must be nonnegative, got {}", self.epsilon)));
        }
        if let Some(s) = self.sigma {
            if !(s > 0.0 && s.is_finite()) {
                return Err(usage(format!("--sigma must be positive, got {s}")));
            }
        }
        for (name, v) in [
            ("--out-width", self.out_width),
            ("--out-height", self.out_height),
            ("--seed-side", self.seed_side),
        ] {
            if v == Some(0) {
                return Err(usage(format!("{name} must be at least 1")));
            }
        }
        Ok(())
    }

    fn mode(&self) -> WeightingMode {
        match self.weights {
            Weights::Kernel => WeightingMode::KernelGaussian { b: self.b },
            Weights::Uniform => WeightingMode::UniformEpsilon {
                epsilon: self.epsilon,
                spatial_sigma: self.sigma.unwrap_or_else(|| default_spatial_sigma(self.w)),
            },
        }
    }
}

impl LabArgs {
    fn validate(&self, out_side: usize) -> Result<()> {
        if self.sizes.is_empty() || self.sizes.contains(&0) {
            return Err(usage("--sizes must list positive side lengths"));
        }
        if self.replicates == 0 {
            return Err(usage("--replicates must be at least 1"));
        }
        if out_side == 0 {
            return Err(usage("--out-side must be at least 1"));
        }
        if !(self.bandwidth_scale > 0.0 && self.bandwidth_scale.is_finite()) {
            return Err(usage("--bandwidth-scale must be positive"));
        }
        if !self.bandwidth_rate.is_finite() {
            return Err(usage("--bandwidth-rate must be finite"));
        }
        Ok(())
    }

    fn config(&self, out_side: usize, cmi_samples: usize) -> ExperimentConfig {
        ExperimentConfig {
            sizes: self.sizes.clone(),
            replicates: self.replicates,
            out_side,
            bandwidth_scale: self.bandwidth_scale,
            bandwidth_rate: self.bandwidth_rate,
            rng_seed: self.rng_seed,
            null_floor: !self.no_null,
            cmi_samples,
        }
    }

    fn spec(&self, builtin: fn() -> MmmSpec) -> Result<MmmSpec> {
        match &self.spec {
            Some(path) => MmmSpec::from_json(&read_text(path)?),
            None => Ok(builtin()),
        }
    }

    fn emit(&self, report: &ExperimentReport) -> Result<()> {
        if let Some(path) = &self.csv {
            let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
            report.write_csv(file)?;
        }
        let json = report.to_json()?;
        match &self.json {
            Some(path) => write_file(path, format!("{json}\n").as_bytes())?,
            None if self.csv.is_none() => println!("{json}"),
            None => {}
        }
        for s in &report.summary {
            eprintln!(
                "{:<8} T={:<4} b={:.4}  median={:.6}  se={:.6}",
                s.statistic, s.t, s.b, s.median, s.median_se
            );
        }
        for (name, value) in &report.constants {
            eprintln!("{name} = {value:.6}");
        }
        Ok(())
    }
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

fn run_synthesize(args: &SynthesizeArgs) -> Result<()> {
    let bytes = fs::read(&args.input).map_err(|e| Error::io(&args.input, e))?;
    let image = read_pgm(&bytes).map_err(|e| Error::InvalidParameter(format!("{}: {e}", args.input.display())))?;
    let observed = to_field(&image)?;
    let mut config = SynthesisConfig::new(
        args.scheme,
        args.w,
        args.mode(),
        args.out_height.unwrap_or(image.height),
        args.out_width.unwrap_or(image.width),
        args.rng_seed,
    );
    config.seed_side = args.seed_side;
    config.warn_distance = args.warn_distance;
    info!(
        "synthesizing {}x{} from {}x{} with {} scheme, w={}",
        config.out_height, config.out_width, image.height, image.width, args.scheme, args.w
    );
    let field = synthesize(&observed, &config)?;
    let format = if args.ascii {
        PgmFormat::Ascii
    } else {
        PgmFormat::Binary
    };
    write_file(&args.output, &write_pgm(&from_field(&field, image.maxval), format))
}

/// Parses `argv` (program name first) and runs the command.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let validated = match &cli.command {
        Command::Synthesize(a) => a.validate(),
        Command::Consistency(a) => a.lab.validate(a.out_side),
        Command::Counterexample(a) => a.lab.validate(a.out_side).and_then(|_| {
            if a.cmi_samples == 0 {
                Err(usage("--cmi-samples must be at least 1"))
            } else {
                Ok(())
            }
        }),
    };
    if let Err(e) = validated {
        eprintln!("error: {e}");
        return 2;
    }
    let outcome = match &cli.command {
        Command::Synthesize(a) => run_synthesize(a),
        Command::Consistency(a) => a
            .lab
            .spec(default_consistency_spec)
            .and_then(|spec| consistency_experiment(&spec, a.scheme, &a.lab.config(a.out_side, 0)))
            .and_then(|r| a.lab.emit(&r)),
        Command::Counterexample(a) => a
            .lab
            .spec(default_counterexample_spec)
            .and_then(|spec| counterexample_experiment(&spec, &a.lab.config(a.out_side, a.cmi_samples)))
            .and_then(|r| a.lab.emit(&r)),
    };
    match outcome {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn usage_errors_exit_2() {
        assert_eq!(run(["texsyn", "synthesize", "--bogus"]), 2);
        assert_eq!(run(["texsyn"]), 2);
        assert_eq!(
            run(["texsyn", "synthesize", "--input", "a", "--output", "b", "--w", "1"]),
            2
        );
        assert_eq!(
            run([
                "texsyn",
                "synthesize",
                "--input",
                "a",
                "--output",
                "b",
                "--w",
                "3",
                "--b",
                "0"
            ]),
            2
        );
        assert_eq!(run(["texsyn", "consistency", "--replicates", "0"]), 2);
    }

    #[test]
    fn help_exits_0() {
        assert_eq!(run(["texsyn", "--help"]), 0);
        assert_eq!(run(["texsyn", "--version"]), 0);
    }

    #[test]
    fn defaults_follow_the_documented_values() {
        let cli = Cli::try_parse_from(["texsyn", "synthesize", "--input", "a", "--output", "b", "--w", "5"]).unwrap();
        let Command::Synthesize(a) = cli.command else { panic!() };
        assert_eq!(
            (a.b, a.epsilon, a.scheme, a.weights),
            (0.01, 0.1, Scheme::Corner, Weights::Kernel)
        );
        assert_eq!(a.mode(), WeightingMode::KernelGaussian { b: 0.01 });
        let cli = Cli::try_parse_from([
            "texsyn",
            "synthesize",
            "--input",
            "a",
            "--output",
            "b",
            "--w",
            "5",
            "--weights",
            "uniform",
        ])
        .unwrap();
        let Command::Synthesize(a) = cli.command else { panic!() };
        assert_eq!(
            a.mode(),
            WeightingMode::UniformEpsilon {
                epsilon: 0.1,
                spatial_sigma: 9.0 / 6.4
            }
        );
    }
}
