//! Objective terms and their analytic gradients.

use nalgebra::Vector3;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::problem::IkProblem;
use crate::error::Result;
use crate::skeleton::{forward_state, Pose};

/// Unweighted term values plus the weighted total.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct CostBreakdown {
    pub distance: f64,
    pub known: f64,
    pub derivative: [f64; 3],
    pub direction: f64,
    pub total: f64,
}

impl CostBreakdown {
    pub fn is_finite(&self) -> bool {
        self.total.is_finite()
    }
}

/// Signed binomial coefficients `(-1)^k C(n, k)` for `k = 0..=n`.
pub fn finite_difference_coefficients(n: usize) -> Vec<f64> {
    let mut c = vec![1.0];
    for k in 1..=n {
        let prev = c[k - 1];
        c.push(-prev * (n - k + 1) as f64 / k as f64);
    }
    c
}

/// Angle between two nonzero vectors, in `[0, pi]`.
pub fn angle_between(a: &Vector3<f64>, b: &Vector3<f64>) -> f64 {
    a.cross(b).norm().atan2(a.dot(b))
}

/// Precomputed lookups for repeated evaluation of one problem.
pub struct Objective<'p, 'a> {
    problem: &'p IkProblem<'a>,
    owner: Vec<usize>,
    /// `ancestor[a][b]`: bone `a` is `b` or one of its ancestors.
    ancestor: Vec<Vec<bool>>,
    /// Frames that need forward kinematics, with the point and direction targets on each.
    fk_frames: Vec<(usize, Vec<usize>, Vec<usize>)>,
    known_at: Vec<Option<usize>>,
}

struct FrameTerms {
    distance: f64,
    direction: f64,
}

impl<'p, 'a> Objective<'p, 'a> {
    pub fn new(problem: &'p IkProblem<'a>) -> Result<Self> {
        problem.validate()?;
        let chain = problem.chain;
        let owner = chain.dofs().map(|(b, _)| b).collect();
        let nb = chain.bones().len();
        let ancestor = (0..nb).map(|a| (0..nb).map(|b| chain.is_ancestor_or_self(a, b)).collect()).collect();
        let t = problem.frames();
        let mut points_at = vec![Vec::new(); t];
        let mut dirs_at = vec![Vec::new(); t];
        for (i, p) in problem.points.iter().enumerate() {
            points_at[p.frame].push(i);
        }
        for (i, d) in problem.directions.iter().enumerate() {
            dirs_at[d.frame].push(i);
        }
        let fk_frames = points_at
            .into_iter()
            .zip(dirs_at)
            .enumerate()
            .filter(|(_, (p, d))| !p.is_empty() || !d.is_empty())
            .map(|(f, (p, d))| (f, p, d))
            .collect();
        let mut known_at = vec![None; t];
        for (i, k) in problem.known.iter().enumerate() {
            known_at[k.frame] = Some(i);
        }
        Ok(Objective { problem, owner, ancestor, fk_frames, known_at })
    }

    pub fn problem(&self) -> &IkProblem<'a> {
        self.problem
    }

    fn n_active(&self) -> f64 {
        self.problem.active.len().max(1) as f64
    }

    fn weighted(&self, mut c: CostBreakdown) -> CostBreakdown {
        let w = &self.problem.weights;
        c.total = w.distance * c.distance
            + w.known * c.known
            + w.derivative.iter().zip(&c.derivative).map(|(a, b)| a * b).sum::<f64>()
            + w.direction * c.direction;
        c
    }

    fn joint_terms(&self, traj: &[Pose]) -> (f64, [f64; 3]) {
        let p = self.problem;
        let mut known = 0.0;
        for (f, k) in self.known_at.iter().enumerate() {
            if let Some(k) = k {
                let target = &p.known[*k].pose.0;
                known += p.active.iter().map(|&i| (traj[f].0[i] - target[i]).powi(2)).sum::<f64>();
            }
        }
        known /= self.n_active();
        let mut der = [0.0; 3];
        for (slot, n) in der.iter_mut().zip(1..=3usize) {
            if traj.len() <= n {
                continue;
            }
            let c = finite_difference_coefficients(n);
            for t in 0..traj.len() - n {
                for &i in &p.active {
                    let r: f64 = c.iter().enumerate().map(|(k, ck)| ck * traj[t + n - k].0[i]).sum();
                    *slot += r * r;
                }
            }
        }
        (known, der)
    }

    /// Term values and weighted total.
    pub fn cost(&self, traj: &[Pose]) -> Result<CostBreakdown> {
        self.problem.check_trajectory(traj)?;
        let p = self.problem;
        let frames: Vec<FrameTerms> = self
            .fk_frames
            .par_iter()
            .map(|(f, pts, dirs)| {
                let fk = forward_state(p.chain, &traj[*f])?;
                let distance = pts.iter().map(|&i| (p.points[i].target - fk.position(p.points[i].bone)).norm()).sum();
                let direction = dirs
                    .iter()
                    .map(|&i| {
                        let d = &p.directions[i];
                        let u = fk.transforms[d.bone].rotation * d.local_axis;
                        angle_between(&u, &d.direction).powi(2)
                    })
                    .sum();
                Ok(FrameTerms { distance, direction })
            })
            .collect::<Result<_>>()?;
        let (known, derivative) = self.joint_terms(traj);
        Ok(self.weighted(CostBreakdown {
            distance: frames.iter().map(|f| f.distance).sum(),
            known,
            derivative,
            direction: frames.iter().map(|f| f.direction).sum(),
            total: 0.0,
        }))
    }

    /// Cost and gradient of the weighted total, one row per frame. Entries for inactive
    /// DOFs are zero. At kinks (zero distance, antiparallel directions) the zero
    /// subgradient is used.
    pub fn gradient(&self, traj: &[Pose]) -> Result<(CostBreakdown, Vec<Vec<f64>>)> {
        let cost = self.cost(traj)?;
        let p = self.problem;
        let w = &p.weights;
        let ndof = p.chain.dof_count();
        let mut grad = vec![vec![0.0; ndof]; traj.len()];

        let rows: Vec<(usize, Vec<f64>)> = self
            .fk_frames
            .par_iter()
            .map(|(f, pts, dirs)| {
                let fk = forward_state(p.chain, &traj[*f])?;
                let mut row = vec![0.0; ndof];
                for &i in pts {
                    let pt = &p.points[i];
                    let pos = fk.position(pt.bone);
                    let diff = pos - pt.target;
                    let dist = diff.norm();
                    if dist == 0.0 || w.distance == 0.0 {
                        continue;
                    }
                    let unit = diff / dist;
                    for &k in &p.active {
                        if self.ancestor[self.owner[k]][pt.bone] {
                            let v = fk.dof_axes[k].cross(&(pos - fk.dof_pivots[k]));
                            row[k] += w.distance * unit.dot(&v);
                        }
                    }
                }
                for &i in dirs {
                    let d = &p.directions[i];
                    if w.direction == 0.0 {
                        continue;
                    }
                    let u = (fk.transforms[d.bone].rotation * d.local_axis).normalize();
                    let v = d.direction.normalize();
                    let sin = u.cross(&v).norm();
                    let phi = sin.atan2(u.dot(&v));
                    // phi / sin(phi) -> 1 as phi -> 0; antiparallel is a kink.
                    let ratio = if sin > 1e-12 {
                        phi / sin
                    } else if phi < 1.0 {
                        1.0
                    } else {
                        continue;
                    };
                    for &k in &p.active {
                        if self.ancestor[self.owner[k]][d.bone] {
                            let du = fk.dof_axes[k].cross(&u);
                            row[k] += w.direction * -2.0 * ratio * du.dot(&v);
                        }
                    }
                }
                Ok((*f, row))
            })
            .collect::<Result<_>>()?;
        for (f, row) in rows {
            grad[f] = row;
        }

        if w.known != 0.0 {
            let scale = 2.0 * w.known / self.n_active();
            for (f, k) in self.known_at.iter().enumerate() {
                if let Some(k) = k {
                    let target = &p.known[*k].pose.0;
                    for &i in &p.active {
                        grad[f][i] += scale * (traj[f].0[i] - target[i]);
                    }
                }
            }
        }
        for n in 1..=3usize {
            let wn = w.derivative[n - 1];
            if wn == 0.0 || traj.len() <= n {
                continue;
            }
            let c = finite_difference_coefficients(n);
            for t in 0..traj.len() - n {
                for &i in &p.active {
                    let r: f64 = c.iter().enumerate().map(|(k, ck)| ck * traj[t + n - k].0[i]).sum();
                    for (k, ck) in c.iter().enumerate() {
                        grad[t + n - k][i] += wn * 2.0 * r * ck;
                    }
                }
            }
        }
        Ok((cost, grad))
    }
}

pub fn eval_objectives(problem: &IkProblem, traj: &[Pose]) -> Result<CostBreakdown> {
    Objective::new(problem)?.cost(traj)
}

pub fn objective_gradient(problem: &IkProblem, traj: &[Pose]) -> Result<Vec<Vec<f64>>> {
    Ok(Objective::new(problem)?.gradient(traj)?.1)
}
