use crate::augustin::{check_alpha, AugustinOptions, FixedPoint, FixedPointOutput};
use crate::channel::{CQChannel, PoweredChannel};
use crate::error::{Error, Result};
use crate::simplex::ProbVector;

use super::{bregman_prox, Aux, SolverConfig, SolverOutput, Stopwatch, TraceRecord};

/// First-order oracle for `g_α^A = -I_α^A` backed by the fixed-point solver.
pub struct AugustinOracle {
    powered: PoweredChannel,
    opts: AugustinOptions,
}

impl AugustinOracle {
    pub fn new(ch: &CQChannel, alpha: f64, opts: AugustinOptions) -> Result<Self> {
        check_alpha(alpha)?;
        Ok(Self {
            powered: ch.powered(alpha)?,
            opts,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.powered.alpha()
    }

    /// Solves the inner problem on the support of `p`. Letters whose weight
    /// underflowed still receive a gradient entry. Fails if the certified
    /// bound does not reach the tolerance.
    pub fn eval(&self, p: &ProbVector) -> Result<FixedPointOutput> {
        let out = FixedPoint::on_support(&self.powered, p)?.run(&self.opts)?;
        if !out.converged {
            return Err(Error::InnerNotConverged {
                iterations: out.iterations,
                bound: out.error_bound,
                tol: self.opts.tol,
            });
        }
        Ok(out)
    }
}

/// Blahut-Arimoto-type entropic mirror descent
/// `p_{t+1} ∝ p_t ⊙ exp(∇I_α^A(p_t))` with unit step (the objective is
/// 1-smooth relative to the negative entropy), starting from the uniform
/// distribution.
pub fn emd_capacity(ch: &CQChannel, cfg: &SolverConfig) -> Result<SolverOutput> {
    cfg.validate()?;
    if !(cfg.alpha > 0.5 && cfg.alpha < 1.0) {
        return Err(Error::invalid(format!(
            "entropic mirror descent is guaranteed for α in (1/2, 1), got {}",
            cfg.alpha
        )));
    }
    let clock = Stopwatch::start();
    let oracle = AugustinOracle::new(
        ch,
        cfg.alpha,
        AugustinOptions {
            tol: cfg.inner_tol,
            max_iters: cfg.inner_max_iters,
        },
    )?;
    let mut p = ProbVector::uniform(ch.n());
    let mut out = oracle.eval(&p)?;
    let mut best = (out.info, p.clone());
    let mut trace = Vec::new();
    for t in 1..=cfg.iters {
        let descent: Vec<f64> = out.grad.iter().map(|g| -g).collect();
        p = bregman_prox(&p, &descent, 1.0)?;
        out = oracle.eval(&p)?;
        if out.info > best.0 {
            best = (out.info, p.clone());
        }
        if cfg.records(t) {
            trace.push(TraceRecord {
                t,
                elapsed: clock.seconds(),
                objective: -out.info,
                capacity_estimate: out.info,
                aux: Aux::Inner {
                    iterations: out.iterations,
                    bound: out.value_bound(),
                },
            });
        }
    }
    Ok(SolverOutput {
        capacity_final: out.info,
        p_final: p,
        capacity_best: best.0,
        p_best: best.1,
        epsilon: None,
        trace,
    })
}
