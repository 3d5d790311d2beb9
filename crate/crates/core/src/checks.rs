//! Property suites run on demand: the Hölder inequality for `∇g̃`, the
//! Thompson-metric contraction of the fixed-point map, relative smoothness
//! of `g_α^A`, and agreement with the grid oracles on classical channels.
//!
//! Every suite returns a [`SuiteReport`] whose `worst_margin` is the largest
//! `measured − allowed` over all cases, so a suite passes iff that margin
//! is non-positive.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::augustin::{contraction_factor, solve_augustin, AugustinOptions, FixedPoint};
use crate::channel::{embed_classical, random_channel, ClassicalChannel};
use crate::error::{Error, Result};
use crate::matcore::thompson_metric;
use crate::oracle::{brute_augustin_classical, brute_capacity_classical, GridSpec};
use crate::renyi::{holder_constants, holder_ratio, ExpRenyi};
use crate::simplex::{random_simplex_point, ProbVector};
use crate::solvers::{emd_capacity, fgm_capacity, relative_smoothness_check, EpsilonPolicy, SolverConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Holder,
    Contraction,
    Relsmooth,
    Oracle,
}

impl Suite {
    pub const ALL: [Suite; 4] = [Suite::Holder, Suite::Contraction, Suite::Relsmooth, Suite::Oracle];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Holder => "holder",
            Suite::Contraction => "contraction",
            Suite::Relsmooth => "relsmooth",
            Suite::Oracle => "oracle",
        }
    }

    /// Default number of random trials per (channel, order) pair.
    pub fn default_trials(self) -> usize {
        match self {
            Suite::Holder => 1000,
            Suite::Contraction => 5,
            Suite::Relsmooth => 500,
            Suite::Oracle => 10,
        }
    }
}

impl std::str::FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::invalid(format!("unknown suite '{s}'")))
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub passed: bool,
    pub cases: usize,
    /// Largest `measured − allowed`; non-positive iff the suite passes.
    pub worst_margin: f64,
    /// Suite-specific summary statistics.
    pub stats: Value,
    /// The case attaining `worst_margin`.
    pub counterexample: Option<Value>,
}

struct Worst {
    margin: f64,
    case: Option<Value>,
    cases: usize,
}

impl Worst {
    fn new() -> Self {
        Self {
            margin: f64::NEG_INFINITY,
            case: None,
            cases: 0,
        }
    }

    fn record(&mut self, margin: f64, case: impl FnOnce() -> Value) {
        self.cases += 1;
        if margin > self.margin || self.case.is_none() {
            self.margin = margin;
            self.case = Some(case());
        }
    }

    fn finish(self, suite: Suite, stats: Value) -> SuiteReport {
        SuiteReport {
            suite,
            passed: self.margin <= 0.0,
            cases: self.cases,
            worst_margin: self.margin,
            stats,
            counterexample: self.case,
        }
    }
}

fn sub_seed(seed: u64, k: u64) -> u64 {
    seed.wrapping_mul(1_000_003).wrapping_add(k)
}

pub fn run_suite(suite: Suite, seed: u64, trials: usize) -> Result<SuiteReport> {
    match suite {
        Suite::Holder => holder_suite(seed, trials),
        Suite::Contraction => contraction_suite(seed, trials),
        Suite::Relsmooth => relsmooth_suite(seed, trials),
        Suite::Oracle => oracle_suite(seed, trials),
    }
}

pub const HOLDER_ORDERS: [f64; 3] = [0.5, 0.6, 0.9];
pub const HOLDER_SHAPES: [(usize, usize); 3] = [(16, 8), (10, 5), (6, 3)];
pub const HOLDER_SLACK: f64 = 1e-9;

/// `‖∇g̃(p1) − ∇g̃(p2)‖_∞ ≤ (1/α)‖p1 − p2‖_1^{(1−α)/α} + 1e-9` on `trials`
/// pairs per channel and order. Half of the pairs are independent uniform
/// draws; the other half are close pairs at log-uniform distances, where a
/// fractional exponent is most demanding.
pub fn holder_suite(seed: u64, trials: usize) -> Result<SuiteReport> {
    let mut worst = Worst::new();
    let mut max_ratio: f64 = 0.0;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for (c, &(n, d)) in HOLDER_SHAPES.iter().enumerate() {
        let channel_seed = sub_seed(seed, c as u64);
        let ch = random_channel(n, d, channel_seed)?;
        for &alpha in &HOLDER_ORDERS {
            let hp = holder_constants(alpha)?;
            let f = ExpRenyi::new(&ch, alpha)?;
            for k in 0..trials {
                let p1 = random_simplex_point(&mut rng, n);
                let p2 = if k % 2 == 0 {
                    random_simplex_point(&mut rng, n)
                } else {
                    let far = random_simplex_point(&mut rng, n);
                    let delta = 10f64.powf(-6.0 * rand::Rng::random::<f64>(&mut rng));
                    ProbVector::mix(delta, &far, &p1)
                };
                let dist = p1.l1_distance(&p2);
                if dist == 0.0 {
                    continue;
                }
                let g1 = f.eval(&p1)?.gradient;
                let g2 = f.eval(&p2)?.gradient;
                let ratio = holder_ratio(&g1, &g2, &p1, &p2, hp.nu);
                max_ratio = max_ratio.max(ratio / hp.l);
                let lhs = ratio * dist.powf(hp.nu);
                let rhs = hp.l * dist.powf(hp.nu) + HOLDER_SLACK;
                worst.record(lhs - rhs, || {
                    json!({
                        "channel": {"n": n, "d": d, "seed": channel_seed},
                        "alpha": alpha,
                        "p1": p1.weights(),
                        "p2": p2.weights(),
                        "grad_gap": lhs,
                        "bound": rhs,
                    })
                });
            }
        }
    }
    Ok(worst.finish(
        Suite::Holder,
        json!({ "max_ratio_over_constant": max_ratio, "orders": HOLDER_ORDERS }),
    ))
}

pub const CONTRACTION_ORDERS: [f64; 4] = [0.6, 0.75, 0.9, 2.0];
pub const CONTRACTION_SLACK: f64 = 0.02;
/// Distances to the reference fixed point below this are dominated by
/// rounding and excluded from ratio measurements.
pub const CONTRACTION_FLOOR: f64 = 1e-9;
/// Bounds below this are excluded from the slope fit.
pub const SLOPE_FLOOR: f64 = 1e-12;
const REFERENCE_ITERS: usize = 3000;
const MAX_TRACKED_ITERS: usize = 500;

/// Least-squares slope of `ys` against `xs`.
pub fn fitted_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// Per-step ratios `d_T(Q_{t+1}^{1−α}, Q_⋆^{1−α}) / d_T(Q_t^{1−α}, Q_⋆^{1−α})`
/// must stay below `κ + 0.02`, and the log of the a-posteriori bound must
/// decay with slope at most `log κ + 0.02`. `Q_⋆` comes from a long
/// reference run. `trials` instances (n=8, d=4) per order.
pub fn contraction_suite(seed: u64, trials: usize) -> Result<SuiteReport> {
    let mut worst = Worst::new();
    let mut max_ratio_by_order = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for (a, &alpha) in CONTRACTION_ORDERS.iter().enumerate() {
        let kappa = contraction_factor(alpha);
        let mut max_ratio: f64 = 0.0;
        for k in 0..trials {
            let channel_seed = sub_seed(seed, (a * 1000 + k) as u64);
            let ch = random_channel(8, 4, channel_seed)?;
            let powered = ch.powered(alpha)?;
            let p = random_simplex_point(&mut rng, 8);

            let mut reference = FixedPoint::new(&powered, &p)?;
            for _ in 0..REFERENCE_ITERS {
                reference.step()?;
            }
            let q_star = reference.iterate_power();

            let mut fp = FixedPoint::new(&powered, &p)?;
            let mut dist = thompson_metric(&fp.iterate_power(), &q_star)?;
            let (mut ts, mut logs) = (Vec::new(), Vec::new());
            let mut ratios = Vec::new();
            loop {
                let bound = kappa / (1.0 - kappa) * fp.step()?;
                let next = thompson_metric(&fp.iterate_power(), &q_star)?;
                if dist > CONTRACTION_FLOOR {
                    ratios.push(next / dist);
                }
                if bound >= SLOPE_FLOOR {
                    ts.push(fp.iteration() as f64);
                    logs.push(bound.ln());
                }
                dist = next;
                if (dist <= CONTRACTION_FLOOR && bound < SLOPE_FLOOR) || fp.iteration() >= MAX_TRACKED_ITERS {
                    break;
                }
            }
            let ratio = ratios.iter().copied().fold(0.0, f64::max);
            max_ratio = max_ratio.max(ratio);
            let slope = if ts.len() >= 3 {
                fitted_slope(&ts, &logs)
            } else {
                f64::NEG_INFINITY
            };
            let margin = (ratio - kappa - CONTRACTION_SLACK).max(slope - kappa.ln() - CONTRACTION_SLACK);
            worst.record(margin, || {
                json!({
                    "alpha": alpha,
                    "channel": {"n": 8, "d": 4, "seed": channel_seed},
                    "p": p.weights(),
                    "max_ratio": ratio,
                    "kappa": kappa,
                    "slope": slope,
                    "slope_limit": kappa.ln() + CONTRACTION_SLACK,
                })
            });
        }
        max_ratio_by_order.push(json!({"alpha": alpha, "kappa": kappa, "max_ratio": max_ratio}));
    }
    Ok(worst.finish(Suite::Contraction, json!({ "orders": max_ratio_by_order })))
}

pub const RELSMOOTH_ORDERS: [f64; 3] = [0.6, 0.75, 0.9];
pub const RELSMOOTH_INNER_TOL: f64 = 1e-10;

/// Midpoint convexity of `h − g_α^A` on a random n=8, d=4 channel.
pub fn relsmooth_suite(seed: u64, trials: usize) -> Result<SuiteReport> {
    let mut worst = Worst::new();
    let mut per_order = Vec::new();
    let channel_seed = sub_seed(seed, 0);
    let ch = random_channel(8, 4, channel_seed)?;
    for (a, &alpha) in RELSMOOTH_ORDERS.iter().enumerate() {
        let r = relative_smoothness_check(&ch, alpha, trials, RELSMOOTH_INNER_TOL, sub_seed(seed, 1 + a as u64))?;
        worst.cases += r.trials.saturating_sub(1);
        worst.record(r.worst_violation - r.threshold, || {
            json!({
                "alpha": alpha,
                "channel": {"n": 8, "d": 4, "seed": channel_seed},
                "worst": r.worst,
                "threshold": r.threshold,
            })
        });
        per_order.push(json!({"alpha": alpha, "worst_violation": r.worst_violation, "threshold": r.threshold}));
    }
    Ok(worst.finish(Suite::Relsmooth, json!({ "orders": per_order })))
}

pub const ORACLE_ORDERS: [f64; 2] = [0.6, 0.9];
pub const ORACLE_STEP: f64 = 1e-4;
pub const ORACLE_TOLERANCE: f64 = 2e-4;
pub const ORACLE_SOLVER_ITERS: usize = 1000;

/// Solver capacities (both algorithms) and the Augustin information at the
/// uniform input against grid search, on `trials` random 2×2 classical
/// channels per order.
pub fn oracle_suite(seed: u64, trials: usize) -> Result<SuiteReport> {
    let mut worst = Worst::new();
    let mut max_gap: f64 = 0.0;
    for &alpha in &ORACLE_ORDERS {
        for k in 0..trials {
            let channel_seed = sub_seed(seed, k as u64);
            let cc = ClassicalChannel::random(2, 2, channel_seed)?;
            let ch = embed_classical(&cc);
            let brute_cap = brute_capacity_classical(&cc, alpha, &GridSpec::new(ORACLE_STEP, 2)?)?;
            let cfg = SolverConfig::new(alpha, ORACLE_SOLVER_ITERS).with_epsilon(EpsilonPolicy::Fixed(1e-9));
            let fgm = fgm_capacity(&ch, &cfg)?.capacity_best;
            let emd = emd_capacity(&ch, &cfg)?.capacity_best;
            let uniform = ProbVector::uniform(2);
            let brute_aug = brute_augustin_classical(uniform.weights(), &cc, alpha, &GridSpec::new(ORACLE_STEP, 2)?)?;
            let aug = solve_augustin(&uniform, &ch, alpha, &AugustinOptions::default())?.info;
            let gaps = [
                (fgm - brute_cap.value).abs(),
                (emd - brute_cap.value).abs(),
                (aug - brute_aug.value).abs(),
            ];
            let gap = gaps.iter().copied().fold(0.0, f64::max);
            max_gap = max_gap.max(gap);
            worst.record(gap - ORACLE_TOLERANCE, || {
                json!({
                    "alpha": alpha,
                    "rows": cc.rows(),
                    "brute_capacity": brute_cap.value,
                    "fgm_capacity": fgm,
                    "emd_capacity": emd,
                    "brute_augustin": brute_aug.value,
                    "solver_augustin": aug,
                })
            });
        }
    }
    Ok(worst.finish(
        Suite::Oracle,
        json!({ "max_gap": max_gap, "tolerance": ORACLE_TOLERANCE, "grid_step": ORACLE_STEP }),
    ))
}
