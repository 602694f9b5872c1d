use std::path::PathBuf;
use std::str::FromStr;

use bungee_core::{ProfileKind, DEFAULT_BLOCKS};
use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "bungee", version, about = "Spectral tools for the bungee cliff potential")]
pub struct Cli {
    /// Directory receiving every output file.
    #[arg(long, global = true, default_value = "out")]
    pub output_dir: PathBuf,

    #[command(flatten)]
    pub physical: PhysicalArgs,

    #[command(subcommand)]
    pub command: Command,
}

/// Physical units; any flag given switches on physical columns, the rest default to `hbar = 1, m = 1/2, x0 = 1`.
#[derive(Debug, Args)]
pub struct PhysicalArgs {
    #[arg(long, global = true)]
    pub hbar: Option<f64>,
    #[arg(long, global = true)]
    pub mass: Option<f64>,
    #[arg(long, global = true)]
    pub x0: Option<f64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Samples v(sigma) = -kappa^2 as `sigma,v`.
    Potential {
        /// Blocks drawn.
        #[arg(long, default_value_t = 6)]
        blocks: usize,
        #[arg(long, default_value_t = 4000)]
        samples: usize,
        #[arg(long, default_value_t = 1.5)]
        sigma_max: f64,
    },
    /// Zero-energy solutions zeta or phi as `sigma,value,deriv` plus a JSON sidecar.
    Profiles {
        #[arg(long)]
        kind: ProfileKind,
        /// Blocks sampled below sigma = 1.
        #[arg(long, default_value_t = 20)]
        blocks: usize,
        /// Samples per segment.
        #[arg(long, default_value_t = 16)]
        samples: usize,
    },
    /// One eigenfunction as `sigma,psi` plus a JSON sidecar.
    Eigen {
        #[arg(long, allow_hyphen_values = true, default_value_t = 20.0)]
        lambda: f64,
        #[arg(long, default_value_t = 2.0)]
        sigma_max: f64,
        #[arg(long, default_value_t = 2000)]
        samples: usize,
        #[arg(long, default_value_t = DEFAULT_BLOCKS)]
        blocks: usize,
    },
    /// Unwrapped scattering phase shift as `lambda,delta` on a uniform grid.
    Phase {
        /// `start:stop:count`, all endpoints included.
        #[arg(long, default_value = "0.01:100:1000")]
        lgrid: LambdaGrid,
        #[arg(long, default_value_t = DEFAULT_BLOCKS)]
        blocks: usize,
    },
    /// Negative spectrum as a JSON report.
    Spectrum(ScanArgs),
    /// Time evolution of a Gaussian packet described by a JSON file.
    Evolve {
        #[arg(long)]
        config: PathBuf,
    },
    /// Pairs every deep root with the root nearest to four times it.
    ScalingCheck {
        #[command(flatten)]
        scan: ScanArgs,
        /// Roots shallower than this are exempt.
        #[arg(long, default_value_t = 200.0)]
        threshold: f64,
        #[arg(long, default_value_t = 1e-3)]
        rel_tol: f64,
    },
    /// Regenerates every data product and compares with the reference values.
    Report {
        #[arg(long, default_value_t = DEFAULT_BLOCKS)]
        blocks: usize,
    },
}

#[derive(Debug, Clone, Args)]
pub struct ScanArgs {
    #[arg(long, allow_hyphen_values = true, default_value_t = -2e5)]
    pub lmin: f64,
    #[arg(long, allow_hyphen_values = true, default_value_t = -10.0)]
    pub lmax: f64,
    /// Scan points per decade of |lambda|.
    #[arg(long, default_value_t = 64)]
    pub ppd: usize,
    /// Relative bracket width at which bisection stops.
    #[arg(long, default_value_t = 1e-12)]
    pub tol: f64,
    #[arg(long, default_value_t = DEFAULT_BLOCKS)]
    pub blocks: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LambdaGrid {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl LambdaGrid {
    pub fn points(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.start];
        }
        let h = (self.stop - self.start) / (self.count - 1) as f64;
        (0..self.count).map(|i| if i + 1 == self.count { self.stop } else { self.start + h * i as f64 }).collect()
    }
}

impl FromStr for LambdaGrid {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(':').collect();
        let [a, b, n] = parts[..] else {
            return Err(format!("expected start:stop:count, got `{s}`"));
        };
        let start: f64 = a.parse().map_err(|e| format!("start `{a}`: {e}"))?;
        let stop: f64 = b.parse().map_err(|e| format!("stop `{b}`: {e}"))?;
        let count: usize = n.parse().map_err(|e| format!("count `{n}`: {e}"))?;
        if count == 0 || !start.is_finite() || !stop.is_finite() || (count > 1 && !(start < stop)) {
            return Err(format!("need start < stop and count >= 1, got `{s}`"));
        }
        Ok(Self { start, stop, count })
    }
}
