//! Multi-task loss over grid tensors, its analytic gradient, the
//! grasp-selection policy, and the evaluation protocol.

use crate::codec::{decode_cell, decode_tensor, ChannelLayout, GroundTruthTensor};
use crate::error::Error;
use crate::symmetry::{pose_distance, PoseDistanceContext};
use crate::Result;
use serde::{Deserialize, Serialize};

/// Predictions are clamped to `[CLAMP, 1 - CLAMP]` inside cross-entropy
/// terms; outside that range the analytic gradient is defined as zero.
pub const PRED_CLAMP: f64 = 1e-7;

/// Scalar weights of the loss terms.
///
/// The pose-regression term carries an additional per-cell factor: the cube
/// of the target graspability sum, so well-graspable objects dominate the
/// pose fit. The per-grasp term is averaged over the family (the `grasp`
/// weight is divided by `J`).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LossWeights {
    pub presence: f64,
    pub visibility: f64,
    /// Relative weight of the angle residual inside the pose term.
    pub angle: f64,
    pub graspability: f64,
    pub grasp: f64,
}

impl Default for LossWeights {
    fn default() -> Self {
        LossWeights {
            presence: 0.1,
            visibility: 0.1,
            angle: 1.0,
            graspability: 1.0,
            grasp: 1.0,
        }
    }
}

fn bce(pred: f64, target: f64) -> f64 {
    let q = pred.clamp(PRED_CLAMP, 1.0 - PRED_CLAMP);
    -(target * q.ln() + (1.0 - target) * (1.0 - q).ln())
}

fn bce_grad(pred: f64, target: f64) -> f64 {
    if pred <= PRED_CLAMP || pred >= 1.0 - PRED_CLAMP {
        return 0.0;
    }
    (1.0 - target) / (1.0 - pred) - target / pred
}

fn check_pair(pred: &GroundTruthTensor, target: &GroundTruthTensor) -> Result<()> {
    if pred.spec != target.spec {
        return Err(Error::ShapeMismatch(
            "prediction and target tensors have different specs".into(),
        ));
    }
    Ok(())
}

/// Evaluates the loss, or the loss together with its gradient with respect
/// to every prediction channel.
fn loss_impl(
    pred: &GroundTruthTensor,
    target: &GroundTruthTensor,
    weights: &LossWeights,
    mut grad: Option<&mut [f64]>,
) -> Result<f64> {
    check_pair(pred, target)?;
    let spec = &pred.spec;
    let layout = spec.layout();
    let channels = spec.channels() as usize;
    let j = spec.grasp_count as f64;
    let mut loss = 0.0;
    for cell_start in (0..pred.data.len()).step_by(channels) {
        let p = &pred.data[cell_start..cell_start + channels];
        let t = &target.data[cell_start..cell_start + channels];
        let g = grad.as_deref_mut().map(|g| &mut g[cell_start..cell_start + channels]);

        let p_t = t[ChannelLayout::P];
        loss += weights.presence * bce(p[ChannelLayout::P], p_t);
        let mut gcell = g;
        if let Some(gc) = gcell.as_deref_mut() {
            gc[ChannelLayout::P] = weights.presence * bce_grad(p[ChannelLayout::P], p_t);
        }
        if p_t > 0.0 {
            loss += p_t
                * occupied_cell_loss(
                    p,
                    t,
                    &layout,
                    weights,
                    j,
                    target.grasp_labels_valid,
                    p_t,
                    gcell,
                );
        }
    }
    Ok(loss)
}

/// Loss contribution of one occupied target cell, excluding the presence
/// term and the leading presence mask; when `gcell` is given, gradients
/// (already scaled by the mask `p_t`) are written into it.
#[allow(clippy::too_many_arguments)]
fn occupied_cell_loss(
    p: &[f64],
    t: &[f64],
    layout: &ChannelLayout,
    weights: &LossWeights,
    j: f64,
    labels_valid: bool,
    p_t: f64,
    mut gcell: Option<&mut [f64]>,
) -> f64 {
    let mut write = |ch: usize, value: f64| {
        if let Some(g) = gcell.as_deref_mut() {
            g[ch] = value;
        }
    };
    let mut total = weights.visibility * bce(p[ChannelLayout::V], t[ChannelLayout::V]);
    write(
        ChannelLayout::V,
        p_t * weights.visibility * bce_grad(p[ChannelLayout::V], t[ChannelLayout::V]),
    );
    let lam3 = {
        let s = t[layout.ga()] + t[layout.gu()] + t[layout.ge()];
        s * s * s
    };
    let mut xyz = 0.0;
    for ch in [ChannelLayout::X, ChannelLayout::Y, ChannelLayout::Z] {
        let d = p[ch] - t[ch];
        xyz += d * d;
        write(ch, p_t * lam3 * 2.0 * d);
    }
    let mut ang = 0.0;
    for ch in angle_channels(layout) {
        let d = p[ch] - t[ch];
        ang += d * d;
        write(ch, p_t * lam3 * weights.angle * 2.0 * d);
    }
    total += lam3 * (xyz + weights.angle * ang);
    for ch in [layout.ga(), layout.gu(), layout.ge()] {
        total += weights.graspability * bce(p[ch], t[ch]);
        write(ch, p_t * weights.graspability * bce_grad(p[ch], t[ch]));
    }
    if labels_valid {
        let w = weights.grasp / j;
        for jj in 0..layout.grasp_count {
            let ch = layout.grasp(jj);
            total += w * bce(p[ch], t[ch]);
            write(ch, p_t * w * bce_grad(p[ch], t[ch]));
        }
    }
    total
}

fn angle_channels(layout: &ChannelLayout) -> Vec<usize> {
    let mut v = vec![ChannelLayout::PHI1, ChannelLayout::PHI2];
    if let Some(idx) = layout.phi3() {
        v.push(idx);
    }
    v
}

/// Total loss of a prediction tensor against a ground-truth tensor.
///
/// Per cell:
/// `w_p BCE(p) + p [ w_v BCE(v) + lam3 (|xyz residual|^2 + w_a |angle residual|^2)`
/// `+ w_g sum BCE(graspability) + (w_s / J) sum BCE(grasp success) ]`
/// with `lam3` the cubed target graspability sum. When the target's grasp
/// labels were invalidated by augmentation the per-grasp term is dropped.
pub fn compute_loss(
    pred: &GroundTruthTensor,
    target: &GroundTruthTensor,
    weights: &LossWeights,
) -> Result<f64> {
    loss_impl(pred, target, weights, None)
}

/// Analytic gradient of [`compute_loss`] with respect to the prediction,
/// laid out exactly like `pred.data`. Channels of cells the target leaves
/// empty (other than presence) have exactly zero gradient, as do
/// cross-entropy inputs outside the clamp range.
pub fn loss_gradient(
    pred: &GroundTruthTensor,
    target: &GroundTruthTensor,
    weights: &LossWeights,
) -> Result<Vec<f64>> {
    let mut grad = vec![0.0; pred.data.len()];
    loss_impl(pred, target, weights, Some(&mut grad))?;
    Ok(grad)
}

/// A cell/grasp pair chosen by the selection policy.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolicyChoice {
    pub row: u32,
    pub col: u32,
    pub grasp: u32,
    /// The maximized product; zero means nothing lookable was found and the
    /// choice defaulted to cell (0, 0), grasp 0.
    pub score: f64,
}

/// Picks the cell and family grasp maximizing
/// `presence * visibility * ga * gu * ge * s_j`.
///
/// Ties keep the first candidate in row-major cell order, then by grasp id;
/// an all-zero tensor yields cell (0, 0), grasp 0 with score 0.
pub fn policy_select(tensor: &GroundTruthTensor) -> PolicyChoice {
    let layout = tensor.spec.layout();
    let mut best = PolicyChoice { row: 0, col: 0, grasp: 0, score: 0.0 };
    for row in 0..tensor.spec.s {
        for col in 0..tensor.spec.s {
            let cell = tensor.cell(row, col);
            let base = cell[ChannelLayout::P]
                * cell[ChannelLayout::V]
                * cell[layout.ga()]
                * cell[layout.gu()]
                * cell[layout.ge()];
            if base <= best.score {
                continue;
            }
            for j in 0..tensor.spec.grasp_count {
                let score = base * cell[layout.grasp(j)];
                if score > best.score {
                    best = PolicyChoice { row, col, grasp: j, score };
                }
            }
        }
    }
    best
}

/// Decision thresholds used by [`evaluate`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalThresholds {
    /// Minimum predicted presence for a cell to count as a detection.
    pub presence: f64,
    /// Ground-truth instances below this visibility become "don't care":
    /// they are not required to be found, and detections matching them are
    /// discarded rather than counted as false positives.
    pub visibility: f64,
    /// Pose-match tolerance as a fraction of the object diameter.
    pub pose_tolerance: f64,
}

impl Default for EvalThresholds {
    fn default() -> Self {
        EvalThresholds { presence: 0.5, visibility: 0.5, pose_tolerance: 0.1 }
    }
}

/// Dataset-level evaluation results.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub scenes: usize,
    /// Countable (visible enough) ground-truth instances.
    pub ground_truth_count: usize,
    pub detection_count: usize,
    /// Area under the precision curve of pose-verified detections.
    pub average_precision: f64,
    /// Fraction of scenes where the policy's decoded pose lies within
    /// tolerance of some annotated instance.
    pub pose_success_rate: f64,
    /// Fraction of scenes where the policy picked an occupied cell whose
    /// chosen family grasp succeeded in ground truth.
    pub policy_success_rate: f64,
    /// Cell-aligned precision over per-grasp success flags.
    pub grasp_precision: f64,
    /// Cell-aligned recall over per-grasp success flags.
    pub grasp_recall: f64,
}

struct Detection {
    scene: usize,
    row: u32,
    col: u32,
    score: f64,
    pose: crate::geom::Pose,
}

/// Scores prediction tensors against ground-truth tensors.
///
/// Detections are cells whose predicted presence clears the threshold;
/// they are ranked by that score across the whole dataset, greedily matched
/// (within each scene) to the nearest unmatched ground-truth instance under
/// the symmetry-aware pose distance, and verified against the tolerance.
/// Average precision sums precision at each true positive over the number
/// of countable instances.
pub fn evaluate(
    predictions: &[GroundTruthTensor],
    targets: &[GroundTruthTensor],
    context: &PoseDistanceContext,
    thresholds: &EvalThresholds,
) -> Result<EvalReport> {
    if predictions.len() != targets.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} predictions vs {} targets",
            predictions.len(),
            targets.len()
        )));
    }
    if predictions.is_empty() {
        return Err(Error::InvalidArgument("nothing to evaluate".into()));
    }
    for (p, t) in predictions.iter().zip(targets) {
        check_pair(p, t)?;
    }
    let tol = thresholds.pose_tolerance * context.diameter();

    // Decode ground truth per scene, split by countability.
    let gt: Vec<Vec<crate::codec::ObjectEstimate>> =
        targets.iter().map(decode_tensor).collect();
    let ground_truth_count: usize = gt
        .iter()
        .flatten()
        .filter(|e| e.visibility >= thresholds.visibility)
        .count();

    // Collect and rank detections.
    let mut detections = Vec::new();
    for (scene, pred) in predictions.iter().enumerate() {
        for row in 0..pred.spec.s {
            for col in 0..pred.spec.s {
                if pred.get(row, col, ChannelLayout::P) < thresholds.presence {
                    continue;
                }
                if let Some(est) = decode_cell(pred, row, col) {
                    detections.push(Detection {
                        scene,
                        row,
                        col,
                        score: est.presence,
                        pose: est.pose_camera,
                    });
                }
            }
        }
    }
    detections.sort_by(|a, b| {
        b.score
            .total_cmp(&a.score)
            .then_with(|| (a.scene, a.row, a.col).cmp(&(b.scene, b.row, b.col)))
    });
    let detection_count = detections.len();

    // Greedy matching.
    let mut matched: Vec<Vec<bool>> = gt.iter().map(|g| vec![false; g.len()]).collect();
    let mut tp = 0usize;
    let mut fp = 0usize;
    let mut precision_sum = 0.0;
    for det in &detections {
        let candidates = &gt[det.scene];
        let mut best: Option<(usize, f64)> = None;
        for (i, inst) in candidates.iter().enumerate() {
            if matched[det.scene][i] {
                continue;
            }
            let d = pose_distance(&det.pose, &inst.pose_camera, context);
            if d < tol && best.is_none_or(|(_, bd)| d < bd) {
                best = Some((i, d));
            }
        }
        match best {
            Some((i, _)) if candidates[i].visibility >= thresholds.visibility => {
                matched[det.scene][i] = true;
                tp += 1;
                precision_sum += tp as f64 / (tp + fp) as f64;
            }
            Some(_) => {
                // Matched a "don't care" instance: discard the detection so
                // it can absorb further near-duplicates too.
            }
            None => fp += 1,
        }
    }
    let average_precision = if ground_truth_count == 0 {
        if detection_count == 0 {
            1.0
        } else {
            0.0
        }
    } else {
        precision_sum / ground_truth_count as f64
    };

    // Per-scene policy metrics.
    let mut pose_ok = 0usize;
    let mut policy_ok = 0usize;
    for (scene, (pred, target)) in predictions.iter().zip(targets).enumerate() {
        let choice = policy_select(pred);
        if let Some(est) = decode_cell(pred, choice.row, choice.col) {
            let near = gt[scene]
                .iter()
                .map(|inst| pose_distance(&est.pose_camera, &inst.pose_camera, context))
                .fold(f64::INFINITY, f64::min);
            if near < tol {
                pose_ok += 1;
            }
        }
        let layout = target.spec.layout();
        if target.get(choice.row, choice.col, ChannelLayout::P) >= 0.5
            && target.get(choice.row, choice.col, layout.grasp(choice.grasp)) >= 0.5
        {
            policy_ok += 1;
        }
    }

    // Cell-aligned per-grasp precision/recall.
    let mut g_tp = 0usize;
    let mut g_fp = 0usize;
    let mut g_fn = 0usize;
    for (pred, target) in predictions.iter().zip(targets) {
        let layout = target.spec.layout();
        for row in 0..target.spec.s {
            for col in 0..target.spec.s {
                let pred_cell = pred.get(row, col, ChannelLayout::P) >= thresholds.presence;
                let gt_cell = target.get(row, col, ChannelLayout::P) >= 0.5;
                for j in 0..target.spec.grasp_count {
                    let pp = pred_cell && pred.get(row, col, layout.grasp(j)) >= 0.5;
                    let gp = gt_cell && target.get(row, col, layout.grasp(j)) >= 0.5;
                    match (pp, gp) {
                        (true, true) => g_tp += 1,
                        (true, false) => g_fp += 1,
                        (false, true) => g_fn += 1,
                        (false, false) => {}
                    }
                }
            }
        }
    }
    let ratio = |num: usize, den: usize| if den == 0 { 1.0 } else { num as f64 / den as f64 };

    Ok(EvalReport {
        scenes: predictions.len(),
        ground_truth_count,
        detection_count,
        average_precision,
        pose_success_rate: pose_ok as f64 / predictions.len() as f64,
        policy_success_rate: policy_ok as f64 / predictions.len() as f64,
        grasp_precision: ratio(g_tp, g_tp + g_fp),
        grasp_recall: ratio(g_tp, g_tp + g_fn),
    })
}
