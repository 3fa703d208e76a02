//! k-medoids clustering of grasp candidates.
//!
//! Tiny instances (bounded number of candidate medoid subsets) are solved
//! exactly by enumeration. Larger ones run classic PAM: a greedy BUILD phase
//! seeds the medoids, then SWAP passes apply the single best
//! medoid/non-medoid exchange until no exchange lowers the total assignment
//! cost. Swap deltas use cached nearest/second-nearest distances for speed,
//! but a swap is only committed after a full cost recomputation confirms
//! strict improvement, which keeps the loop exact and guarantees
//! termination.

use crate::error::Error;
use crate::geom::{rotation_angle_between, Pose};
use crate::grasp::{Grasp, GraspSet};
use crate::model::ObjectModel;
use crate::Result;
use serde::{Deserialize, Serialize};

/// Weights combining translation and rotation into one grasp metric.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct GraspDistanceParams {
    /// Meters charged per radian of relative tool rotation.
    pub rotation_weight: f64,
}

impl GraspDistanceParams {
    /// Scales the rotation term to the object: a tenth of the bounding
    /// radius per radian, so a half-turn costs about a third of a diameter.
    pub fn for_model(model: &ObjectModel) -> Self {
        GraspDistanceParams { rotation_weight: 0.1 * model.bounding().radius }
    }
}

/// Distance between two grasp poses: translation offset plus weighted
/// geodesic rotation angle.
pub fn grasp_distance(a: &Pose, b: &Pose, params: &GraspDistanceParams) -> f64 {
    (a.translation - b.translation).norm()
        + params.rotation_weight * rotation_angle_between(&a.rotation, &b.rotation)
}

/// Result of a k-medoids run over items `0..n`.
#[derive(Clone, Debug, PartialEq)]
pub struct PamResult {
    /// Medoid item indices, ascending.
    pub medoids: Vec<usize>,
    /// For each item, the position (into `medoids`) of its cluster.
    pub assignment: Vec<usize>,
    /// Total distance from every item to its medoid.
    pub cost: f64,
}

/// Items per side above which the pairwise distance matrix is no longer
/// materialized and distances are recomputed on demand.
const MATRIX_LIMIT: usize = 5000;

/// Instances with at most this many candidate medoid subsets are solved
/// exactly by enumeration instead of BUILD/SWAP descent.
const EXHAUSTIVE_LIMIT: u128 = 20_000;

/// Partitions items `0..n` into `k` clusters around medoids, minimizing the
/// summed item-to-medoid distance under an arbitrary metric.
pub fn pam_cluster<F>(n: usize, k: usize, dist: F) -> Result<PamResult>
where
    F: Fn(usize, usize) -> f64,
{
    if n == 0 {
        return Err(Error::InvalidArgument("cannot cluster zero items".into()));
    }
    if k == 0 {
        return Err(Error::InvalidArgument("cluster count must be positive".into()));
    }
    if k > n {
        return Err(Error::InvalidArgument(format!(
            "cluster count {k} exceeds item count {n}"
        )));
    }
    if k == n {
        return Ok(PamResult {
            medoids: (0..n).collect(),
            assignment: (0..n).collect(),
            cost: 0.0,
        });
    }
    let exact = subset_count(n, k) <= EXHAUSTIVE_LIMIT;
    if n <= MATRIX_LIMIT {
        let mut matrix = vec![0.0f64; n * n];
        for i in 0..n {
            for j in (i + 1)..n {
                let d = dist(i, j);
                matrix[i * n + j] = d;
                matrix[j * n + i] = d;
            }
        }
        let d = move |i: usize, j: usize| matrix[i * n + j];
        if exact {
            exhaustive_core(n, k, d)
        } else {
            pam_core(n, k, d)
        }
    } else {
        pam_core(n, k, dist)
    }
}

/// Number of k-subsets of n items, saturating once past the exhaustive cap.
fn subset_count(n: usize, k: usize) -> u128 {
    let k = k.min(n - k);
    let mut c: u128 = 1;
    for i in 0..k {
        c = c.saturating_mul((n - i) as u128) / (i as u128 + 1);
        if c > EXHAUSTIVE_LIMIT {
            return u128::MAX;
        }
    }
    c
}

/// Globally optimal medoids by lexicographic enumeration of every k-subset;
/// ties keep the first (lexicographically smallest) subset.
fn exhaustive_core<F>(n: usize, k: usize, d: F) -> Result<PamResult>
where
    F: Fn(usize, usize) -> f64,
{
    let mut idx: Vec<usize> = (0..k).collect();
    let mut best = idx.clone();
    let mut best_cost = f64::INFINITY;
    loop {
        let (cost, _) = full_cost(n, &idx, &d);
        if cost < best_cost {
            best_cost = cost;
            best = idx.clone();
        }
        // Advance to the next combination in lexicographic order.
        let Some(i) = (0..k).rev().find(|&i| idx[i] < n - k + i) else { break };
        idx[i] += 1;
        for j in (i + 1)..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
    let (cost, assignment) = full_cost(n, &best, &d);
    Ok(PamResult { medoids: best, assignment, cost })
}

fn pam_core<F>(n: usize, k: usize, d: F) -> Result<PamResult>
where
    F: Fn(usize, usize) -> f64,
{
    let mut is_medoid = vec![false; n];
    let mut medoids: Vec<usize> = Vec::with_capacity(k);

    // BUILD: start from the 1-medoid optimum, then repeatedly add the item
    // with the largest total reduction in nearest-medoid distance.
    let mut best = 0usize;
    let mut best_cost = f64::INFINITY;
    for c in 0..n {
        let total: f64 = (0..n).map(|j| d(c, j)).sum();
        if total < best_cost {
            best_cost = total;
            best = c;
        }
    }
    medoids.push(best);
    is_medoid[best] = true;
    let mut nearest_d: Vec<f64> = (0..n).map(|j| d(best, j)).collect();

    while medoids.len() < k {
        let mut best = usize::MAX;
        let mut best_gain = f64::NEG_INFINITY;
        for (c, _) in is_medoid.iter().enumerate().filter(|(_, &m)| !m) {
            let gain: f64 = nearest_d
                .iter()
                .enumerate()
                .map(|(j, &nd)| (nd - d(c, j)).max(0.0))
                .sum();
            if gain > best_gain {
                best_gain = gain;
                best = c;
            }
        }
        medoids.push(best);
        is_medoid[best] = true;
        for (j, nd) in nearest_d.iter_mut().enumerate() {
            let dc = d(best, j);
            if dc < *nd {
                *nd = dc;
            }
        }
    }

    // SWAP: evaluate every (medoid, candidate) exchange through cached
    // nearest/second-nearest stats, then commit the best one only if a full
    // recomputation of the objective strictly improves on the current cost.
    let mut cost = full_cost(n, &medoids, &d).0;
    loop {
        let (nearest, second) = nearest_two(n, &medoids, &d);
        let mut best_delta = f64::NEG_INFINITY;
        let mut best_swap: Option<(usize, usize)> = None; // (medoid pos, candidate)
        let mut acc = vec![0.0f64; medoids.len()];
        for (c, _) in is_medoid.iter().enumerate().filter(|(_, &m)| !m) {
            acc.iter_mut().for_each(|a| *a = 0.0);
            let mut shared = 0.0;
            for j in 0..n {
                let dcj = d(c, j);
                let (nd, ni) = nearest[j];
                if dcj < nd {
                    shared += nd - dcj;
                } else {
                    // Only matters if j's own medoid is the one removed:
                    // j re-homes to the cheaper of c and its second choice.
                    acc[ni] += nd - dcj.min(second[j]);
                }
            }
            for (pos, &extra) in acc.iter().enumerate() {
                let gain = shared + extra;
                let better = gain > best_delta
                    || (gain == best_delta
                        && best_swap.is_some_and(|(bp, bc)| {
                            (medoids[pos], c) < (medoids[bp], bc)
                        }));
                if better {
                    best_delta = gain;
                    best_swap = Some((pos, c));
                }
            }
        }
        let Some((pos, c)) = best_swap else { break };
        if best_delta <= 0.0 {
            break;
        }
        let old = medoids[pos];
        medoids[pos] = c;
        let (new_cost, _) = full_cost(n, &medoids, &d);
        if new_cost < cost {
            cost = new_cost;
            is_medoid[old] = false;
            is_medoid[c] = true;
        } else {
            medoids[pos] = old;
            break;
        }
    }

    medoids.sort_unstable();
    let (cost, assignment) = full_cost(n, &medoids, &d);
    Ok(PamResult { medoids, assignment, cost })
}

/// Total cost and per-item medoid positions for a fixed medoid set; ties in
/// distance go to the lowest medoid position.
fn full_cost<F>(n: usize, medoids: &[usize], d: &F) -> (f64, Vec<usize>)
where
    F: Fn(usize, usize) -> f64,
{
    let mut assignment = vec![0usize; n];
    let mut cost = 0.0;
    for (j, slot) in assignment.iter_mut().enumerate() {
        let mut best = f64::INFINITY;
        let mut pos = 0;
        for (p, &m) in medoids.iter().enumerate() {
            let dm = d(m, j);
            if dm < best {
                best = dm;
                pos = p;
            }
        }
        cost += best;
        *slot = pos;
    }
    (cost, assignment)
}

/// Nearest and second-nearest medoid distances per item; nearest also
/// carries its medoid position.
#[allow(clippy::type_complexity)]
fn nearest_two<F>(n: usize, medoids: &[usize], d: &F) -> (Vec<(f64, usize)>, Vec<f64>)
where
    F: Fn(usize, usize) -> f64,
{
    let mut nearest = vec![(f64::INFINITY, 0usize); n];
    let mut second = vec![f64::INFINITY; n];
    for j in 0..n {
        for (p, &m) in medoids.iter().enumerate() {
            let dm = d(m, j);
            if dm < nearest[j].0 {
                second[j] = nearest[j].0;
                nearest[j] = (dm, p);
            } else if dm < second[j] {
                second[j] = dm;
            }
        }
    }
    (nearest, second)
}

/// Thins a grasp set to `k` representative grasps (the medoids under the
/// grasp metric) in their original order, keeping their candidate ids so
/// family members stay traceable to the unclustered set. Downstream
/// consumers index family grasps by list position, not id.
///
/// A `k` beyond the candidate count is clamped to it (callers may warn).
pub fn cluster_grasps(set: &GraspSet, k: usize, params: &GraspDistanceParams) -> Result<GraspSet> {
    let poses: Vec<Pose> = set.grasps.iter().map(|g| g.pose).collect();
    let k = k.min(poses.len());
    let result = pam_cluster(poses.len(), k, |i, j| grasp_distance(&poses[i], &poses[j], params))?;
    let grasps: Vec<Grasp> =
        result.medoids.iter().map(|&m| Grasp { id: set.grasps[m].id, pose: set.grasps[m].pose }).collect();
    Ok(GraspSet { object: set.object.clone(), gripper: set.gripper.clone(), grasps })
}
