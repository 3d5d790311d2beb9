//! Universal fast gradient method on `g̃` over the simplex, with the
//! negative entropy as prox function and a doubling line search on the
//! local smoothness estimate `L_t`.
//!
//! The dual-averaging point `q_t` minimizes
//! `Σ_s w_s ⟨∇g̃(p̃_s), p⟩ + B_h(p, p_1)` with `w_1 = 1`, `w_s = a_s`;
//! keeping the Bregman anchor makes `q_t` interior, so the entropic prox
//! around it is well defined.

use crate::channel::CQChannel;
use crate::error::{Error, Result};
use crate::renyi::{information_from_objective, ExpRenyi};
use crate::simplex::ProbVector;

use super::{bregman_prox, Aux, SolverConfig, SolverOutput, Stopwatch, TraceRecord};

pub const MAX_LINE_SEARCH_DEPTH: u32 = 200;
/// Floor on the smoothness estimate; `L_{t+1} = 2^{i_t-1} L_t` halves `L`
/// whenever the first trial is accepted.
pub const L_MIN: f64 = 1e-12;

/// Iteration state of the fast gradient method.
#[derive(Clone, Debug)]
pub struct FgmState {
    /// Smoothness estimate `L_t`.
    pub l: f64,
    /// Accumulated step weight `A_t`.
    pub a_total: f64,
    pub p: ProbVector,
    pub p_tilde: ProbVector,
    pub q: ProbVector,
    /// `Σ_s w_s ∇g̃(p̃_s)`, the linear part of the dual-averaging model.
    pub dual: Vec<f64>,
    pub t: usize,
    /// Accepted line-search depth `i_t` of the last step.
    pub last_depth: u32,
    /// Accepted step weight `a_{t}` of the last step.
    pub last_a: f64,
    /// `g̃(p_t)`.
    pub value: f64,
    start: ProbVector,
}

impl FgmState {
    /// `L_1 = 1`, `p_1 = p̃_1 = 1/n`, `A_1 = 0`, model seeded with `∇g̃(p_1)`.
    pub fn new(f: &ExpRenyi) -> Result<Self> {
        let start = ProbVector::uniform(f.n());
        let e = f.eval(&start)?;
        Ok(Self {
            l: 1.0,
            a_total: 0.0,
            p: start.clone(),
            p_tilde: start.clone(),
            q: start.clone(),
            dual: e.gradient,
            t: 1,
            last_depth: 0,
            last_a: 0.0,
            value: e.value,
            start,
        })
    }

    /// Performs iteration `t`, producing `p_{t+1}`.
    pub fn step(&mut self, f: &ExpRenyi, epsilon: f64) -> Result<()> {
        let q = bregman_prox(&self.start, &self.dual, 1.0)?;
        let mut depth: u32 = 0;
        loop {
            let scale = 2f64.powi(depth as i32);
            let a = (1.0 + (1.0 + 4.0 * scale * self.a_total).sqrt()) / (2.0 * scale * self.l);
            let a_next = self.a_total + a;
            let tau = (a / a_next).min(1.0);
            let p_tilde = ProbVector::mix(tau, &q, &self.p);
            let at_tilde = f.eval(&p_tilde)?;
            let p_hat = bregman_prox(&q, &at_tilde.gradient, a)?;
            let p_next = ProbVector::mix(tau, &p_hat, &self.p);
            let value_next = f.value(&p_next)?;

            let linear: f64 = at_tilde
                .gradient
                .iter()
                .zip(p_next.weights().iter().zip(p_tilde.weights()))
                .map(|(g, (x, y))| g * (x - y))
                .sum();
            let dist = p_next.l1_distance(&p_tilde);
            let model = at_tilde.value + linear + 0.5 * scale * self.l * dist * dist + 0.5 * epsilon * tau;
            if value_next <= model {
                self.dual
                    .iter_mut()
                    .zip(&at_tilde.gradient)
                    .for_each(|(d, g)| *d += a * g);
                self.p = p_next;
                self.p_tilde = p_tilde;
                self.q = q;
                self.a_total = a_next;
                self.l = (0.5 * scale * self.l).max(L_MIN);
                self.last_depth = depth;
                self.last_a = a;
                self.value = value_next;
                self.t += 1;
                return Ok(());
            }
            depth += 1;
            if depth > MAX_LINE_SEARCH_DEPTH {
                return Err(Error::LineSearch {
                    iteration: self.t,
                    depth,
                });
            }
        }
    }
}

/// Maximizes the Petz-Rényi information by minimizing `g̃` for `T`
/// iterations; capacity estimates are `α/(1-α) · (-log g̃(p_t))`.
pub fn fgm_capacity(ch: &CQChannel, cfg: &SolverConfig) -> Result<SolverOutput> {
    cfg.validate()?;
    if !(0.5..1.0).contains(&cfg.alpha) {
        return Err(Error::invalid(format!(
            "the fast gradient method relies on Hölder smoothness, established for α in [1/2, 1); got {}",
            cfg.alpha
        )));
    }
    let epsilon = cfg.epsilon(ch.n())?;
    let clock = Stopwatch::start();
    let f = ExpRenyi::new(ch, cfg.alpha)?;
    let mut state = FgmState::new(&f)?;
    let info = |v: f64| information_from_objective(v, cfg.alpha);
    let mut best = (info(state.value), state.p.clone());
    let mut trace = Vec::new();
    for t in 1..=cfg.iters {
        state.step(&f, epsilon)?;
        let cap = info(state.value);
        if cap > best.0 {
            best = (cap, state.p.clone());
        }
        if cfg.records(t) {
            trace.push(TraceRecord {
                t,
                elapsed: clock.seconds(),
                objective: state.value,
                capacity_estimate: cap,
                aux: Aux::LineSearch {
                    depth: state.last_depth,
                },
            });
        }
    }
    Ok(SolverOutput {
        capacity_final: info(state.value),
        p_final: state.p,
        capacity_best: best.0,
        p_best: best.1,
        epsilon: Some(epsilon),
        trace,
    })
}
