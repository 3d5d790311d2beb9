//! Capacity solvers: entropic mirror descent on the negative Petz-Augustin
//! information, and the universal fast gradient method on the exponentiated
//! Petz-Rényi objective.

mod bregman;
mod emd;
mod fgm;
mod smoothness;

pub use bregman::bregman_prox;
pub use emd::{emd_capacity, AugustinOracle};
pub use fgm::{fgm_capacity, FgmState};
pub use smoothness::{relative_smoothness_check, RelSmoothReport};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::simplex::ProbVector;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "lowercase", tag = "kind", content = "value")]
pub enum EpsilonPolicy {
    /// `ε = log(n)^{0.5/α} T^{1-1.5/α}`.
    Balanced,
    Fixed(f64),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SolverConfig {
    pub alpha: f64,
    pub iters: usize,
    pub epsilon_policy: EpsilonPolicy,
    pub inner_tol: f64,
    pub inner_max_iters: usize,
    pub seed: u64,
    pub record_every: usize,
}

impl SolverConfig {
    pub fn new(alpha: f64, iters: usize) -> Self {
        Self {
            alpha,
            iters,
            epsilon_policy: EpsilonPolicy::Balanced,
            inner_tol: crate::augustin::DEFAULT_TOL,
            inner_max_iters: crate::augustin::DEFAULT_MAX_ITERS,
            seed: 0,
            record_every: 1,
        }
    }

    pub fn with_epsilon(mut self, policy: EpsilonPolicy) -> Self {
        self.epsilon_policy = policy;
        self
    }

    pub fn with_inner_tol(mut self, tol: f64) -> Self {
        self.inner_tol = tol;
        self
    }

    pub fn with_record_every(mut self, k: usize) -> Self {
        self.record_every = k;
        self
    }

    pub(crate) fn validate(&self) -> Result<()> {
        if self.iters == 0 {
            return Err(Error::invalid("iteration count T must be >= 1"));
        }
        if self.record_every == 0 {
            return Err(Error::invalid("record_every must be >= 1"));
        }
        if let EpsilonPolicy::Fixed(e) = self.epsilon_policy {
            if !(e > 0.0) || !e.is_finite() {
                return Err(Error::invalid(format!("fixed epsilon must be positive, got {e}")));
            }
        }
        if !(self.inner_tol > 0.0) {
            return Err(Error::invalid("inner tolerance must be positive"));
        }
        Ok(())
    }

    /// The ε this configuration uses on an `n`-letter channel.
    pub fn epsilon(&self, n: usize) -> Result<f64> {
        match self.epsilon_policy {
            EpsilonPolicy::Balanced => epsilon_balanced(n, self.alpha, self.iters),
            EpsilonPolicy::Fixed(e) => Ok(e),
        }
    }

    /// Whether iteration `t` of a `T`-step run produces a trace row.
    pub(crate) fn records(&self, t: usize) -> bool {
        t == 1 || t.is_multiple_of(self.record_every) || t == self.iters
    }
}

/// `ε = log(n)^{0.5/α} · T^{1 - 1.5/α}`.
pub fn epsilon_balanced(n: usize, alpha: f64, iters: usize) -> Result<f64> {
    if n < 2 {
        return Err(Error::invalid(format!(
            "balanced epsilon needs n >= 2 so that log n > 0, got n={n}"
        )));
    }
    if iters == 0 {
        return Err(Error::invalid("balanced epsilon needs T >= 1"));
    }
    if !(0.5..1.0).contains(&alpha) {
        return Err(Error::invalid(format!(
            "balanced epsilon is defined for α in [1/2, 1), got {alpha}"
        )));
    }
    Ok((n as f64).ln().powf(0.5 / alpha) * (iters as f64).powf(1.0 - 1.5 / alpha))
}

/// Per-iteration diagnostic attached to a trace row.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Aux {
    /// FGM line-search depth `i_t`.
    LineSearch { depth: u32 },
    /// EMD inner solve: iterations used and certified value bound.
    Inner { iterations: usize, bound: f64 },
}

impl Aux {
    /// Single numeric column for CSV output: the line-search depth for FGM,
    /// the certified inner bound for EMD.
    pub fn csv_value(&self) -> String {
        match self {
            Aux::LineSearch { depth } => depth.to_string(),
            Aux::Inner { bound, .. } => fmt17(*bound),
        }
    }
}

/// One row of a solver trace. Row `t` describes the iterate `p_{t+1}`
/// produced by iteration `t`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TraceRecord {
    pub t: usize,
    pub elapsed: f64,
    /// `g̃(p_{t+1})` for FGM, `g_α^A(p_{t+1})` for EMD.
    pub objective: f64,
    pub capacity_estimate: f64,
    pub aux: Aux,
}

#[derive(Clone, Debug)]
pub struct SolverOutput {
    pub p_final: ProbVector,
    /// Capacity estimate at `p_{T+1}`.
    pub capacity_final: f64,
    /// Largest capacity estimate over all iterates, including unrecorded ones.
    pub capacity_best: f64,
    pub p_best: ProbVector,
    pub epsilon: Option<f64>,
    pub trace: Vec<TraceRecord>,
}

pub const CSV_HEADER: &str = "t,elapsed_s,objective,capacity_estimate,aux";

pub(crate) fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

/// Renders a trace as CSV with 17 significant digits.
pub fn trace_to_csv(trace: &[TraceRecord]) -> String {
    let mut out = String::with_capacity(64 * (trace.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in trace {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            r.t,
            fmt17(r.elapsed),
            fmt17(r.objective),
            fmt17(r.capacity_estimate),
            r.aux.csv_value()
        ));
    }
    out
}

/// Elapsed wall time; always zero on targets without a monotonic clock.
pub(crate) struct Stopwatch {
    #[cfg(not(target_arch = "wasm32"))]
    start: std::time::Instant,
}

impl Stopwatch {
    pub(crate) fn start() -> Self {
        Self {
            #[cfg(not(target_arch = "wasm32"))]
            start: std::time::Instant::now(),
        }
    }

    pub(crate) fn seconds(&self) -> f64 {
        #[cfg(not(target_arch = "wasm32"))]
        {
            self.start.elapsed().as_secs_f64()
        }
        #[cfg(target_arch = "wasm32")]
        {
            0.0
        }
    }
}
