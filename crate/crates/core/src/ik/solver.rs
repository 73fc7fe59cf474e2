//! Projected gradient descent with Armijo backtracking.

use serde::{Deserialize, Serialize};

use super::objectives::{CostBreakdown, Objective};
use super::problem::IkProblem;
use crate::error::{Error, Result};
use crate::skeleton::Pose;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverParams {
    pub max_iterations: usize,
    /// Stop once the projected step or the relative cost decrease falls below this.
    pub tolerance: f64,
    pub initial_step: f64,
    pub armijo: f64,
    pub shrink: f64,
    pub growth: f64,
}

impl Default for SolverParams {
    fn default() -> Self {
        SolverParams { max_iterations: 500, tolerance: 1e-6, initial_step: 1.0, armijo: 1e-4, shrink: 0.5, growth: 2.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StopReason {
    /// Projected gradient step below tolerance.
    Converged,
    /// Cost stopped decreasing.
    Stalled,
    /// No step length satisfied the sufficient-decrease test.
    LineSearchFailed,
    MaxIterations,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub iterations: usize,
    pub reason: StopReason,
    pub initial: CostBreakdown,
    #[serde(rename = "final")]
    pub final_cost: CostBreakdown,
    /// Total cost after every accepted step, starting with the initial cost.
    pub trace: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct IkSolution {
    pub trajectory: Vec<Pose>,
    pub report: SolveReport,
}

const STALL_ROUNDS: usize = 3;
const MIN_STEP: f64 = 1e-14;

fn check_finite(c: &CostBreakdown, iteration: usize) -> Result<()> {
    if c.is_finite() {
        Ok(())
    } else {
        Err(Error::NonFiniteCost { iteration })
    }
}

/// Minimizes the weighted objective over the active DOFs, keeping every angle inside its
/// joint limits. Accepted steps never increase the cost.
pub fn solve(problem: &IkProblem, params: &SolverParams) -> Result<IkSolution> {
    if !(params.tolerance > 0.0 && params.initial_step > 0.0 && params.shrink > 0.0 && params.shrink < 1.0) {
        return Err(Error::InvalidArgument(format!("bad solver parameters: {params:?}")));
    }
    let obj = Objective::new(problem)?;
    let chain = problem.chain;
    let lo: Vec<f64> = chain.dofs().map(|(_, d)| d.min).collect();
    let hi: Vec<f64> = chain.dofs().map(|(_, d)| d.max).collect();
    let active = &problem.active;
    let (lo, hi) = (&lo, &hi);

    let mut x = problem.initial.clone();
    for pose in &mut x {
        for &i in active {
            pose.0[i] = pose.0[i].clamp(lo[i], hi[i]);
        }
    }
    let (mut cost, mut grad) = obj.gradient(&x)?;
    check_finite(&cost, 0)?;
    let initial = cost;
    let mut trace = vec![cost.total];
    let mut alpha = params.initial_step;
    let mut stalls = 0;
    let mut reason = StopReason::MaxIterations;
    let mut iterations = 0;

    while iterations < params.max_iterations {
        let pg = x
            .iter()
            .zip(&grad)
            .flat_map(|(p, g)| active.iter().map(move |&i| ((p.0[i] - g[i]).clamp(lo[i], hi[i]) - p.0[i]).abs()))
            .fold(0.0, f64::max);
        if pg < params.tolerance {
            reason = StopReason::Converged;
            break;
        }
        iterations += 1;
        let accepted = loop {
            let mut trial = x.clone();
            let mut predicted = 0.0;
            for (f, pose) in trial.iter_mut().enumerate() {
                for &i in active {
                    let v = (x[f].0[i] - alpha * grad[f][i]).clamp(lo[i], hi[i]);
                    predicted += grad[f][i] * (v - x[f].0[i]);
                    pose.0[i] = v;
                }
            }
            let c = obj.cost(&trial)?;
            check_finite(&c, iterations)?;
            if c.total <= cost.total + params.armijo * predicted {
                break Some((trial, c));
            }
            alpha *= params.shrink;
            if alpha < MIN_STEP {
                break None;
            }
        };
        let Some((trial, c)) = accepted else {
            reason = StopReason::LineSearchFailed;
            break;
        };
        if cost.total - c.total <= params.tolerance * (1.0 + cost.total) {
            stalls += 1;
        } else {
            stalls = 0;
        }
        x = trial;
        (cost, grad) = obj.gradient(&x)?;
        check_finite(&cost, iterations)?;
        trace.push(cost.total);
        log::trace!("ik iter {iterations}: cost {:.6e} step {alpha:.3e} {cost:?}", cost.total);
        alpha *= params.growth;
        if stalls >= STALL_ROUNDS {
            reason = StopReason::Stalled;
            break;
        }
    }
    log::debug!(
        "ik solve: {} frames, {iterations} iterations, {reason:?}, cost {:.6e} -> {:.6e}",
        x.len(),
        initial.total,
        cost.total
    );
    Ok(IkSolution {
        trajectory: x,
        report: SolveReport { iterations, reason, initial, final_cost: cost, trace },
    })
}
