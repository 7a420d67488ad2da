//! Run configuration: JSON file values overlaid by command-line flags.

use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use phasekit::kernels::{Displacement, Side};
use serde::{Deserialize, Serialize};

use crate::commands::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum CommandName {
    /// Dump the generators of an su:N:M irrep.
    Algebra,
    /// Evaluate a kernel matrix at one point.
    Kernel,
    /// Sample the Wigner function of a state on its grid (CSV).
    Wigner,
    /// Sample the Weyl function of a state on its grid (CSV).
    Weyl,
    /// Rebuild an operator from a sampled CSV.
    Reconstruct,
    /// Check the Stratonovich-Weyl conditions.
    Verify,
    /// Thermal partition function.
    Partition,
    /// Thermal mean of an observable.
    Mean,
    /// Helmholtz free energy.
    Freeenergy,
    /// Finite-difference moments of the Weyl function.
    Moments,
    /// Weyl function along one coordinate axis (CSV).
    Autocorr,
    /// Phase-space cross-correlation at a shift.
    Crosscorr,
    /// Moyal time evolution (CSV per recorded step).
    Evolve,
    /// Plot-ready presets: cat3-hw, spincat-j40, spincat-5half, ghz5-equal-angle.
    FigureData,
}

fn side(s: &str) -> Result<Side, String> {
    s.parse().map_err(|e: phasekit::Error| e.to_string())
}

fn displacement(s: &str) -> Result<Displacement, String> {
    s.parse().map_err(|e: phasekit::Error| e.to_string())
}

/// Everything a run needs. Every field is optional so a config file and the
/// flags can each supply part of it.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize, Args)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    #[arg(skip)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub command: Option<CommandName>,

    /// System descriptor: hw:<n_max> | su:<N>:<M>, joined by '*'.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub system: Option<String>,

    /// State: fock:n, basis:k, coherent:re,im, hwcat:re,im;..., cat3,
    /// spin:phi,theta, spincat:phi,theta;..., spincat3, ghz, random:seed,
    /// thermal:beta, mixed.
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub state: Option<String>,

    /// wigner | weyl.
    #[arg(long, value_parser = side)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub side: Option<Side>,

    /// euler | arecchi (Weyl side of su:2:M only).
    #[arg(long, value_parser = displacement)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub displacement: Option<Displacement>,

    /// Grid resolution (quadrature) or points per axis (figure lattices).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid_res: Option<usize>,

    /// Half-width of oscillator α-plane grids.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,

    /// Inverse temperature.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,

    /// Field hx,hy,hz: H = hx J(1) + hy J(2) + hz J(3) on every spin factor.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub field: Option<Vec<f64>>,

    /// Hamiltonian matrix as a JSON file {dim, re, im}.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hamiltonian: Option<PathBuf>,

    /// Observable ex,ey,ez: A = ex J(1) + ey J(2) + ez J(3).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub observable: Option<Vec<f64>>,

    /// Phase-space coordinates of a point, in column order.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub point: Option<Vec<f64>>,

    /// Shift coordinates for crosscorr.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub shift: Option<Vec<f64>>,

    /// Coordinate name for autocorr (e.g. theta1, Phi1, re_alpha, position).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub axis: Option<String>,

    /// Sample values along the axis.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<Vec<f64>>,

    /// Derivative orders per moment variable.
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub orders: Option<Vec<usize>>,

    /// Unit factors per moment variable, e.g. "1,1,-i".
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eta: Option<String>,

    /// Finite-difference step for moments.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub step: Option<f64>,

    /// Final time for evolve.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_final: Option<f64>,

    /// Time step for evolve.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,

    /// Record every n-th step in evolve.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub record_every: Option<usize>,

    /// Figure preset.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,

    /// Input CSV for reconstruct.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input: Option<PathBuf>,

    /// Output file (directory for evolve); stdout when absent.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,

    /// Random seed.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,

    /// Maximum worker threads.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
}

macro_rules! overlay {
    ($base:ident, $top:ident; $($f:ident),*) => {
        RunConfig { $($f: $top.$f.or($base.$f)),* }
    };
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    pub fn save(&self, path: &Path) -> Result<(), CliError> {
        std::fs::write(path, serde_json::to_string_pretty(self)? + "\n")
            .map_err(|e| CliError::io(path, e))
    }

    /// Fields set in `top` win over those in `self`.
    pub fn overlay(self, top: RunConfig) -> RunConfig {
        let base = self;
        overlay!(base, top; command, system, state, side, displacement, grid_res, radius, beta, field,
            hamiltonian, observable, point, shift, axis, samples, orders, eta, step, t_final, dt,
            record_every, preset, input, out, seed, threads)
    }
}
