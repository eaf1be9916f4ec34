use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "memlag", version, about = "Integrated-coordinate Lagrangian analysis of memristive circuits")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse and validate netlists, echoing their canonical form.
    Parse {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Assemble the system and test the self-adjointness conditions.
    Check {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        /// Sampling box: `LO,HI` for every axis, or `XLO,XHI,VLO,VHI`.
        #[arg(long, default_value = "-1,1")]
        region: String,
        #[arg(long, default_value_t = memlag::selfadjoint::DEFAULT_SAMPLES)]
        samples: usize,
        #[arg(long, default_value_t = memlag::selfadjoint::DEFAULT_TOL)]
        tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Integrate circuits in time and write coordinate and element waveforms.
    Simulate {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        #[command(flatten)]
        time: TimeArgs,
        /// Initial coordinates, comma separated (default zero).
        #[arg(long)]
        x0: Option<String>,
        /// Initial coordinate velocities, comma separated (default zero).
        #[arg(long)]
        v0: Option<String>,
        /// Output CSV file, or directory when several inputs are given.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Drive a single element and test its hysteresis loop for pinching.
    Drive {
        input: PathBuf,
        /// Element to drive (default: the first memory element).
        #[arg(long)]
        element: Option<String>,
        #[arg(long, value_enum, default_value_t = Shape::Sine)]
        shape: Shape,
        #[arg(long, default_value_t = 1.0)]
        amp: f64,
        #[arg(long, default_value_t = 1.0)]
        omega: f64,
        /// Pinch tolerance on the input variable.
        #[arg(long, default_value_t = 1e-3)]
        eps: f64,
        #[command(flatten)]
        time: TimeArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Shape {
    Sine,
    Dc,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum MethodName {
    Rk4,
    Rk45,
}

#[derive(Clone, Debug, Args)]
pub struct TimeArgs {
    #[arg(long, default_value_t = 0.0)]
    pub t0: f64,
    /// End time (default 10, or two drive periods for `drive`).
    #[arg(long)]
    pub t1: Option<f64>,
    #[arg(long, value_enum, default_value_t = MethodName::Rk45)]
    pub method: MethodName,
    /// Fixed step for rk4.
    #[arg(long, default_value_t = 1e-3)]
    pub h: f64,
    #[arg(long, default_value_t = memlag::sim::Method::DEFAULT_RTOL)]
    pub rtol: f64,
    #[arg(long, default_value_t = memlag::sim::Method::DEFAULT_ATOL)]
    pub atol: f64,
}

impl TimeArgs {
    pub fn method(&self) -> memlag::sim::Method {
        match self.method {
            MethodName::Rk4 => memlag::sim::Method::Rk4 { h: self.h },
            MethodName::Rk45 => memlag::sim::Method::Rk45 {
                rtol: self.rtol,
                atol: self.atol,
            },
        }
    }
}
