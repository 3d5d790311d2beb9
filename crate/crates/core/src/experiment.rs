//! Convergence experiment comparing FGM with the balanced ε, FGM with
//! `ε = 1e-9`, and entropic mirror descent on one random channel.
//!
//! Optimization errors are measured against the largest capacity estimate
//! seen by any method over a horizon three times the experiment length.
//! Both FGM–1e-9 and EMD are independent of the horizon, so their long
//! runs double as the experiment curves; FGM–Balanced depends on `T`
//! through ε and gets its own run.

use serde::Serialize;

use crate::channel::{random_channel, CQChannel};
use crate::error::{Error, Result};
use crate::solvers::{emd_capacity, fgm_capacity, EpsilonPolicy, SolverConfig, SolverOutput, TraceRecord};

pub const DEFAULT_ITERS: usize = 1000;
pub const REFERENCE_FACTOR: usize = 3;
pub const FIXED_EPSILON: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Scale {
    /// n = 128, d = 32.
    Paper,
    /// n = 16, d = 8.
    Desk,
}

impl Scale {
    pub fn shape(self) -> (usize, usize) {
        match self {
            Scale::Paper => (128, 32),
            Scale::Desk => (16, 8),
        }
    }
}

impl std::str::FromStr for Scale {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "paper" => Ok(Scale::Paper),
            "desk" => Ok(Scale::Desk),
            _ => Err(Error::invalid(format!("scale must be 'paper' or 'desk', got '{s}'"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    FgmBalanced,
    Fgm1e9,
    Emd,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::FgmBalanced, Method::Fgm1e9, Method::Emd];

    pub fn label(self) -> &'static str {
        match self {
            Method::FgmBalanced => "FGM-Balanced",
            Method::Fgm1e9 => "FGM-1e-9",
            Method::Emd => "EMD",
        }
    }

    pub fn slug(self) -> &'static str {
        match self {
            Method::FgmBalanced => "fgm_balanced",
            Method::Fgm1e9 => "fgm_1e-9",
            Method::Emd => "emd",
        }
    }

    fn horizon(self, iters: usize) -> usize {
        match self {
            Method::FgmBalanced => iters,
            Method::Fgm1e9 | Method::Emd => REFERENCE_FACTOR * iters,
        }
    }

    fn run(self, ch: &CQChannel, alpha: f64, iters: usize) -> Result<SolverOutput> {
        let cfg = SolverConfig::new(alpha, self.horizon(iters));
        match self {
            Method::FgmBalanced => fgm_capacity(ch, &cfg.with_epsilon(EpsilonPolicy::Balanced)),
            Method::Fgm1e9 => fgm_capacity(ch, &cfg.with_epsilon(EpsilonPolicy::Fixed(FIXED_EPSILON))),
            Method::Emd => emd_capacity(ch, &cfg),
        }
    }
}

/// One experiment configuration.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Setup {
    pub alpha: f64,
    pub n: usize,
    pub d: usize,
    pub iters: usize,
    pub seed: u64,
}

impl Setup {
    /// Figure 1 uses `α = 0.6`, figure 2 `α = 0.9`.
    pub fn figure(figure: u8, scale: Scale, seed: u64) -> Result<Self> {
        let alpha = match figure {
            1 => 0.6,
            2 => 0.9,
            _ => return Err(Error::invalid(format!("figure must be 1 or 2, got {figure}"))),
        };
        let (n, d) = scale.shape();
        Ok(Self {
            alpha,
            n,
            d,
            iters: DEFAULT_ITERS,
            seed,
        })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Curve {
    pub method: Method,
    pub epsilon: Option<f64>,
    /// Rows `t = 1..=T`.
    pub trace: Vec<TraceRecord>,
    /// `reference − capacity_estimate` per row.
    pub errors: Vec<f64>,
    /// Best estimate over the method's whole run (up to `3T` iterations).
    pub best: f64,
    pub runtime_s: f64,
}

impl Curve {
    pub fn final_error(&self) -> f64 {
        *self.errors.last().expect("experiment curves are non-empty")
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Experiment {
    pub setup: Setup,
    pub channel_hash: String,
    pub reference: f64,
    pub curves: Vec<Curve>,
}

impl Experiment {
    pub fn curve(&self, method: Method) -> &Curve {
        self.curves
            .iter()
            .find(|c| c.method == method)
            .expect("every method is run")
    }
}

/// Runs all three methods, concurrently when `parallel` is set.
pub fn run_experiment(setup: &Setup, parallel: bool) -> Result<Experiment> {
    let ch = random_channel(setup.n, setup.d, setup.seed)?;
    run_experiment_on(&ch, setup, parallel)
}

pub fn run_experiment_on(ch: &CQChannel, setup: &Setup, parallel: bool) -> Result<Experiment> {
    if setup.iters == 0 {
        return Err(Error::invalid("experiment needs T >= 1"));
    }
    let timed = |m: Method| -> Result<(SolverOutput, f64)> {
        let clock = crate::solvers::Stopwatch::start();
        let out = m.run(ch, setup.alpha, setup.iters)?;
        Ok((out, clock.seconds()))
    };
    let outputs: Vec<Result<(SolverOutput, f64)>> = if parallel {
        std::thread::scope(|s| {
            let handles: Vec<_> = Method::ALL.iter().map(|&m| s.spawn(move || timed(m))).collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("solver thread panicked"))
                .collect()
        })
    } else {
        Method::ALL.iter().map(|&m| timed(m)).collect()
    };
    let outputs = outputs.into_iter().collect::<Result<Vec<_>>>()?;
    let reference = outputs
        .iter()
        .map(|(o, _)| o.capacity_best)
        .fold(f64::NEG_INFINITY, f64::max);
    let curves = Method::ALL
        .iter()
        .zip(outputs)
        .map(|(&method, (out, runtime_s))| {
            let trace: Vec<TraceRecord> = out.trace.into_iter().filter(|r| r.t <= setup.iters).collect();
            let errors = trace.iter().map(|r| reference - r.capacity_estimate).collect();
            Curve {
                method,
                epsilon: out.epsilon,
                trace,
                errors,
                best: out.capacity_best,
                runtime_s,
            }
        })
        .collect();
    Ok(Experiment {
        setup: *setup,
        channel_hash: ch.content_hash(),
        reference,
        curves,
    })
}
