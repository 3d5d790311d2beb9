//! Grid-search baselines for small classical channels.
//!
//! For diagonal states every quantity reduces to scalar sums, so the
//! capacity and the Augustin minimum can be bracketed by exhaustive search
//! over `{k · step}` points of the simplex. These routines share no code
//! with the matrix solvers and serve as independent reference values.

use serde::Serialize;

use crate::channel::ClassicalChannel;
use crate::error::{Error, Result};

/// Coarsest step accepted without a warning.
pub const COARSE_STEP: f64 = 0.1;
/// Grids larger than this are refused.
pub const MAX_GRID_POINTS: usize = 50_000_000;

/// Uniform grid on `Δ_dimension` with spacing `step`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GridSpec {
    pub step: f64,
    pub dimension: usize,
}

impl GridSpec {
    pub fn new(step: f64, dimension: usize) -> Result<Self> {
        if !(step > 0.0 && step <= 0.5) {
            return Err(Error::invalid(format!("grid step must lie in (0, 0.5], got {step}")));
        }
        if dimension == 0 {
            return Err(Error::invalid("grid dimension must be positive"));
        }
        Ok(Self { step, dimension })
    }

    /// Subdivisions per unit; the effective step is `1 / divisions`.
    pub fn divisions(&self) -> usize {
        (1.0 / self.step).round().max(1.0) as usize
    }

    pub fn effective_step(&self) -> f64 {
        1.0 / self.divisions() as f64
    }

    /// Number of grid points, `C(m + k - 1, k - 1)`.
    pub fn point_count(&self) -> usize {
        let m = self.divisions();
        let k = self.dimension;
        (1..k).fold(1usize, |acc, i| acc.saturating_mul(m + i) / i)
    }

    /// Calls `f` on every grid point in lexicographic order of counts.
    fn for_each(&self, mut f: impl FnMut(&[f64])) {
        let m = self.divisions();
        let h = self.effective_step();
        let k = self.dimension;
        let mut counts = vec![0usize; k];
        let mut point = vec![0.0; k];
        fn rec(i: usize, left: usize, counts: &mut [usize], point: &mut [f64], h: f64, f: &mut dyn FnMut(&[f64])) {
            let k = counts.len();
            if i + 1 == k {
                counts[i] = left;
                for (x, c) in point.iter_mut().zip(counts.iter()) {
                    *x = *c as f64 * h;
                }
                f(point);
                return;
            }
            for c in 0..=left {
                counts[i] = c;
                rec(i + 1, left - c, counts, point, h, f);
            }
        }
        rec(0, m, &mut counts, &mut point, h, &mut f);
    }
}

/// Optimum over a grid together with an a-priori accuracy estimate.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GridOptimum {
    pub value: f64,
    pub argopt: Vec<f64>,
    pub step: f64,
    pub points: usize,
    /// Largest gradient oscillation `max_i ∂_i − min_i ∂_i` seen on interior
    /// grid points.
    pub lipschitz: f64,
    /// `lipschitz · (k − 1) · step / 2`: the change in value when moving to
    /// the nearest grid point.
    pub accuracy: f64,
    pub warning: Option<String>,
}

fn check_alpha_scalar(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha.is_finite() && alpha != 1.0) {
        return Err(Error::invalid(format!(
            "order α must be positive and different from 1, got {alpha}"
        )));
    }
    Ok(())
}

fn prepare(grid: &GridSpec, expected: usize, what: &str, limit: usize) -> Result<Option<String>> {
    if grid.dimension != expected {
        return Err(Error::invalid(format!(
            "grid dimension {} does not match the {what} size {expected}",
            grid.dimension
        )));
    }
    if expected > limit {
        return Err(Error::invalid(format!(
            "grid search supports {what} size ≤ {limit}, got {expected}"
        )));
    }
    if grid.point_count() > MAX_GRID_POINTS {
        return Err(Error::invalid(format!(
            "grid with {} points is too large",
            grid.point_count()
        )));
    }
    Ok((grid.step > COARSE_STEP).then(|| format!("grid step {} is coarser than {COARSE_STEP}", grid.step)))
}

fn oscillation(g: &[f64]) -> f64 {
    let max = g.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = g.iter().copied().fold(f64::INFINITY, f64::min);
    max - min
}

/// Scalar Rényi information `α/(α−1) · log Σ_i (Σ_j p_j W_j[i]^α)^{1/α}`
/// and its gradient in `p`.
pub fn classical_renyi_information(rows: &[Vec<f64>], p: &[f64], alpha: f64) -> (f64, Vec<f64>) {
    let d = rows[0].len();
    let powered: Vec<Vec<f64>> = rows.iter().map(|r| r.iter().map(|x| x.powf(alpha)).collect()).collect();
    let m: Vec<f64> = (0..d)
        .map(|i| p.iter().zip(&powered).map(|(pj, r)| pj * r[i]).sum())
        .collect();
    let g: f64 = m.iter().map(|x| x.powf(1.0 / alpha)).sum();
    let pre = alpha / (alpha - 1.0);
    let grad = powered
        .iter()
        .map(|r| {
            let dg: f64 = (0..d)
                .filter(|&i| m[i] > 0.0)
                .map(|i| m[i].powf(1.0 / alpha - 1.0) * r[i])
                .sum::<f64>()
                / alpha;
            pre * dg / g
        })
        .collect();
    (pre * g.ln(), grad)
}

/// `Σ_j p_j D_α(row_j ‖ q)` with scalar Rényi divergences, and its gradient
/// in `q` (infinite entries where `q` vanishes on a row's support).
pub fn classical_augustin_objective(rows: &[Vec<f64>], p: &[f64], q: &[f64], alpha: f64) -> (f64, Vec<f64>) {
    let d = q.len();
    let mut value = 0.0;
    let mut grad = vec![0.0; d];
    for (pj, r) in p.iter().zip(rows) {
        if *pj == 0.0 {
            continue;
        }
        let terms: Vec<f64> = r
            .iter()
            .zip(q)
            .map(|(&ri, &qi)| {
                if ri == 0.0 {
                    0.0
                } else {
                    ri.powf(alpha) * qi.powf(1.0 - alpha)
                }
            })
            .collect();
        let s: f64 = terms.iter().sum();
        let div = s.ln() / (alpha - 1.0);
        value += pj * div;
        for i in 0..d {
            if r[i] > 0.0 {
                grad[i] -= pj * r[i].powf(alpha) * q[i].powf(-alpha) / s;
            }
        }
    }
    (value, grad)
}

/// Maximum of the Rényi information over a grid on `Δ_n`, `n ≤ 3`.
pub fn brute_capacity_classical(cc: &ClassicalChannel, alpha: f64, grid: &GridSpec) -> Result<GridOptimum> {
    check_alpha_scalar(alpha)?;
    let warning = prepare(grid, cc.n(), "input alphabet", 3)?;
    let mut best = (f64::NEG_INFINITY, Vec::new());
    let mut lipschitz: f64 = 0.0;
    grid.for_each(|p| {
        let (v, g) = classical_renyi_information(cc.rows(), p, alpha);
        if v > best.0 {
            best = (v, p.to_vec());
        }
        if p.iter().all(|x| *x > 0.0) {
            lipschitz = lipschitz.max(oscillation(&g));
        }
    });
    finish(best, lipschitz, grid, warning)
}

/// Minimum over a grid of diagonal states `q ∈ Δ_d`, `d ≤ 3`, of
/// `Σ_j p_j D_α(row_j ‖ q)`.
pub fn brute_augustin_classical(p: &[f64], cc: &ClassicalChannel, alpha: f64, grid: &GridSpec) -> Result<GridOptimum> {
    check_alpha_scalar(alpha)?;
    if p.len() != cc.n() {
        return Err(Error::invalid(format!(
            "p has length {} but the channel has {} inputs",
            p.len(),
            cc.n()
        )));
    }
    let warning = prepare(grid, cc.d(), "output alphabet", 3)?;
    let mut best = (f64::INFINITY, Vec::new());
    let mut lipschitz: f64 = 0.0;
    grid.for_each(|q| {
        let (v, g) = classical_augustin_objective(cc.rows(), p, q, alpha);
        if v < best.0 {
            best = (v, q.to_vec());
        }
        if q.iter().all(|x| *x > 0.0) {
            lipschitz = lipschitz.max(oscillation(&g));
        }
    });
    finish(best, lipschitz, grid, warning)
}

fn finish(best: (f64, Vec<f64>), lipschitz: f64, grid: &GridSpec, warning: Option<String>) -> Result<GridOptimum> {
    if let Some(w) = &warning {
        log::warn!("{w}");
    }
    if !best.0.is_finite() {
        return Err(Error::invalid("no grid point has a finite objective; refine the grid"));
    }
    let step = grid.effective_step();
    Ok(GridOptimum {
        value: best.0,
        argopt: best.1,
        step,
        points: grid.point_count(),
        lipschitz,
        accuracy: 0.5 * lipschitz * (grid.dimension as f64 - 1.0) * step,
        warning,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(step: f64, k: usize) -> GridSpec {
        GridSpec::new(step, k).unwrap()
    }

    #[test]
    fn grid_enumeration_counts() {
        for (step, k, len) in [(0.5, 2, 3), (0.25, 3, 15), (0.1, 1, 1)] {
            let g = grid(step, k);
            let mut count = 0;
            g.for_each(|p| {
                assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
                count += 1;
            });
            assert_eq!(count, len);
            assert_eq!(g.point_count(), len);
        }
        assert!(GridSpec::new(0.6, 2).is_err());
        assert!(GridSpec::new(0.0, 2).is_err());
    }

    #[test]
    fn identity_channel_has_log_two() {
        let cc = ClassicalChannel::new(vec![vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        for alpha in [0.5, 0.6, 0.9] {
            let r = brute_capacity_classical(&cc, alpha, &grid(1e-3, 2)).unwrap();
            assert!((r.value - 2f64.ln()).abs() < 1e-12);
            assert!((r.argopt[0] - 0.5).abs() < 1e-12);
            assert!(r.warning.is_none());
        }
    }

    #[test]
    fn identical_rows_have_zero_capacity() {
        let cc = ClassicalChannel::new(vec![vec![0.3, 0.7]; 3]).unwrap();
        let r = brute_capacity_classical(&cc, 0.6, &grid(0.05, 3)).unwrap();
        assert!(r.value.abs() < 1e-12);
    }

    #[test]
    fn coarse_grid_warns() {
        let cc = ClassicalChannel::new(vec![vec![0.3, 0.7], vec![0.6, 0.4]]).unwrap();
        assert!(brute_capacity_classical(&cc, 0.6, &grid(0.25, 2))
            .unwrap()
            .warning
            .is_some());
    }

    #[test]
    fn orthogonal_rows_give_entropy() {
        let cc = ClassicalChannel::new(vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]]).unwrap();
        let p = [1.0 / 3.0; 3];
        let r = brute_augustin_classical(&p, &cc, 0.7, &grid(0.01, 3)).unwrap();
        assert!((r.value - 3f64.ln()).abs() < 1e-3);
        let one = ClassicalChannel::new(vec![vec![0.2, 0.8]]).unwrap();
        assert!(
            brute_augustin_classical(&[1.0], &one, 0.6, &grid(1e-3, 2))
                .unwrap()
                .value
                .abs()
                < 1e-12
        );
    }

    #[test]
    fn refinement_never_worsens_beyond_accuracy() {
        let cc = ClassicalChannel::random(2, 2, 17).unwrap();
        let mut prev: Option<GridOptimum> = None;
        for step in [0.1, 0.05, 0.025, 0.0125] {
            let r = brute_capacity_classical(&cc, 0.6, &grid(step, 2)).unwrap();
            if let Some(p) = prev {
                assert!(r.value >= p.value - p.accuracy);
            }
            prev = Some(r);
        }
    }

    #[test]
    fn dimension_mismatch_and_size_limits() {
        let cc = ClassicalChannel::random(4, 2, 1).unwrap();
        assert!(brute_capacity_classical(&cc, 0.6, &grid(0.1, 4)).is_err());
        assert!(brute_capacity_classical(&cc, 0.6, &grid(0.1, 3)).is_err());
    }
}
