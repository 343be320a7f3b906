//! COCO-style instance mask evaluation: AP over IoU thresholds
//! 0.50:0.05:0.95 with 101-point interpolated precision.
//!
//! Detections are matched greedily per image in score order; ties in
//! score go to the larger mask, then to the earlier input. Evaluation is
//! split into a per-image pass ([`evaluate_image`]) and a global
//! accumulation ([`accumulate`]) so callers can run images in parallel.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::InstanceGrid;

/// Sorted, deduplicated pixel indices of one mask.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PixelSet(Vec<u32>);

impl PixelSet {
    pub fn new(mut pixels: Vec<u32>) -> Self {
        pixels.sort_unstable();
        pixels.dedup();
        Self(pixels)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    fn intersection_len(&self, other: &PixelSet) -> usize {
        let (a, b) = (&self.0, &other.0);
        let (mut i, mut j, mut n) = (0, 0, 0);
        while i < a.len() && j < b.len() {
            match a[i].cmp(&b[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    n += 1;
                    i += 1;
                    j += 1;
                }
            }
        }
        n
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScoredInstance {
    pub mask: PixelSet,
    pub class_id: u16,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GtInstance {
    pub mask: PixelSet,
    pub class_id: u16,
}

pub fn mask_iou(a: &PixelSet, b: &PixelSet) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::invalid("IoU of an empty mask"));
    }
    let inter = a.intersection_len(b);
    Ok(inter as f64 / (a.len() + b.len() - inter) as f64)
}

/// Prediction order: descending score, then larger mask, then input order.
fn ranking(preds: &[ScoredInstance]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..preds.len()).collect();
    order.sort_by(|&i, &j| {
        preds[j]
            .score
            .total_cmp(&preds[i].score)
            .then(preds[j].mask.len().cmp(&preds[i].mask.len()))
            .then(i.cmp(&j))
    });
    order
}

/// Greedy matching of `preds` (taken in ranked order) to `gts`.
///
/// Returns, per prediction in input order, the index of its matched GT.
pub fn match_instances(preds: &[ScoredInstance], gts: &[PixelSet], iou_thr: f64) -> Result<Vec<Option<usize>>> {
    let order = ranking(preds);
    let ious = order
        .iter()
        .map(|&p| {
            gts.iter()
                .map(|g| mask_iou(&preds[p].mask, g))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let ranked = greedy(&ious, gts.len(), iou_thr);
    let mut out = vec![None; preds.len()];
    for (k, &p) in order.iter().enumerate() {
        out[p] = ranked[k];
    }
    Ok(out)
}

/// `ious[k][g]` for the k-th ranked prediction. Each prediction takes the
/// unmatched GT of highest IoU at or above `thr` (lowest index on ties).
fn greedy(ious: &[Vec<f64>], n_gt: usize, thr: f64) -> Vec<Option<usize>> {
    let mut taken = vec![false; n_gt];
    ious.iter()
        .map(|row| {
            let mut best: Option<(usize, f64)> = None;
            for (g, &iou) in row.iter().enumerate() {
                if taken[g] || iou < thr {
                    continue;
                }
                if best.is_none_or(|(_, b)| iou > b) {
                    best = Some((g, iou));
                }
            }
            best.map(|(g, _)| {
                taken[g] = true;
                g
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalParams {
    pub iou_thresholds: Vec<f64>,
    /// Per image and class, only the top-ranked detections are kept.
    pub max_dets: usize,
}

impl Default for EvalParams {
    fn default() -> Self {
        Self {
            iou_thresholds: (0..10).map(|k| (50 + 5 * k) as f64 / 100.0).collect(),
            max_dets: 100,
        }
    }
}

impl EvalParams {
    fn index_of(&self, thr: f64) -> Option<usize> {
        self.iou_thresholds.iter().position(|&t| (t - thr).abs() < 1e-12)
    }
}

/// One image: predictions and ground truth for every class.
#[derive(Debug, Clone, Default)]
pub struct EvalImage {
    pub preds: Vec<ScoredInstance>,
    pub gts: Vec<GtInstance>,
}

impl EvalImage {
    /// Builds an image from instance grids. `classes` maps instance ids to
    /// class ids and `scores` to confidences; missing entries default to
    /// `default_class` and a score of 1.0.
    pub fn from_grids(
        pred: &InstanceGrid,
        pred_scores: &HashMap<u16, f64>,
        pred_classes: &HashMap<u16, u16>,
        gt: &InstanceGrid,
        gt_classes: &HashMap<u16, u16>,
        default_class: u16,
    ) -> Result<Self> {
        pred.shape().check_same(&gt.shape())?;
        let preds = pixel_sets(pred)
            .into_iter()
            .enumerate()
            .map(|(k, mask)| {
                let id = (k + 1) as u16;
                let score = pred_scores.get(&id).copied().unwrap_or(1.0);
                if !score.is_finite() {
                    return Err(Error::invalid(format!("score of instance {id} is not finite")));
                }
                Ok(ScoredInstance {
                    mask,
                    class_id: pred_classes.get(&id).copied().unwrap_or(default_class),
                    score,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let gts = pixel_sets(gt)
            .into_iter()
            .enumerate()
            .map(|(k, mask)| GtInstance {
                mask,
                class_id: gt_classes.get(&((k + 1) as u16)).copied().unwrap_or(default_class),
            })
            .collect();
        Ok(Self { preds, gts })
    }
}

fn pixel_sets(inst: &InstanceGrid) -> Vec<PixelSet> {
    let mut sets = vec![Vec::new(); inst.num_instances()];
    for (i, &id) in inst.as_slice().iter().enumerate() {
        if id != 0 {
            sets[id as usize - 1].push(i as u32);
        }
    }
    sets.into_iter().map(PixelSet).collect()
}

/// Ranked detections of one class in one image, with their match outcome
/// at every IoU threshold.
#[derive(Debug, Clone, Default)]
pub struct ClassImageResult {
    pub n_gt: usize,
    /// `(score, area, tp per threshold)` in ranked order.
    pub dets: Vec<(f64, usize, Vec<bool>)>,
}

/// Per-image result, keyed by class id.
#[derive(Debug, Clone, Default)]
pub struct ImageResult {
    pub classes: BTreeMap<u16, ClassImageResult>,
}

pub fn evaluate_image(image: &EvalImage, classes: &[u16], params: &EvalParams) -> Result<ImageResult> {
    let mut out = ImageResult::default();
    for &class in classes {
        let gts: Vec<PixelSet> = image
            .gts
            .iter()
            .filter(|g| g.class_id == class)
            .map(|g| g.mask.clone())
            .collect();
        let preds: Vec<ScoredInstance> = image.preds.iter().filter(|p| p.class_id == class).cloned().collect();
        let mut order = ranking(&preds);
        order.truncate(params.max_dets);
        let ious = order
            .iter()
            .map(|&p| {
                gts.iter()
                    .map(|g| mask_iou(&preds[p].mask, g))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        let per_thr: Vec<Vec<Option<usize>>> = params
            .iou_thresholds
            .iter()
            .map(|&t| greedy(&ious, gts.len(), t))
            .collect();
        let dets = order
            .iter()
            .enumerate()
            .map(|(k, &p)| {
                let tp = per_thr.iter().map(|m| m[k].is_some()).collect();
                (preds[p].score, preds[p].mask.len(), tp)
            })
            .collect();
        out.classes.insert(class, ClassImageResult { n_gt: gts.len(), dets });
    }
    Ok(out)
}

/// 101-point interpolated AP from detections already sorted in global
/// rank order. `None` when there is no ground truth.
pub fn average_precision(tp_in_rank_order: &[bool], n_gt: usize) -> Option<f64> {
    if n_gt == 0 {
        return None;
    }
    let mut recall = Vec::with_capacity(tp_in_rank_order.len());
    let mut precision = Vec::with_capacity(tp_in_rank_order.len());
    let (mut tp, mut fp) = (0usize, 0usize);
    for &hit in tp_in_rank_order {
        if hit {
            tp += 1;
        } else {
            fp += 1;
        }
        recall.push(tp as f64 / n_gt as f64);
        precision.push(tp as f64 / (tp + fp) as f64);
    }
    for i in (1..precision.len()).rev() {
        if precision[i] > precision[i - 1] {
            precision[i - 1] = precision[i];
        }
    }
    let mut sum = 0.0;
    let mut j = 0;
    for k in 0..=100 {
        let r = k as f64 / 100.0;
        while j < recall.len() && recall[j] < r {
            j += 1;
        }
        if j < recall.len() {
            sum += precision[j];
        }
    }
    Some(sum / 101.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassAp {
    pub ap: Option<f64>,
    pub ap50: Option<f64>,
    pub ap75: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct APReport {
    pub per_class: BTreeMap<String, ClassAp>,
    pub average: ClassAp,
}

/// AP of one class at each threshold, from per-image results.
pub fn class_ap_per_threshold(results: &[ImageResult], class: u16, params: &EvalParams) -> Vec<Option<f64>> {
    let mut n_gt = 0;
    // (score, area, image, rank within image, tp flags)
    let mut all = Vec::new();
    for (img, res) in results.iter().enumerate() {
        if let Some(c) = res.classes.get(&class) {
            n_gt += c.n_gt;
            for (k, (score, area, tp)) in c.dets.iter().enumerate() {
                all.push((*score, *area, img, k, tp));
            }
        }
    }
    all.sort_by(|a, b| {
        b.0.total_cmp(&a.0)
            .then(b.1.cmp(&a.1))
            .then(a.2.cmp(&b.2))
            .then(a.3.cmp(&b.3))
    });
    (0..params.iou_thresholds.len())
        .map(|t| {
            let tps: Vec<bool> = all.iter().map(|d| d.4[t]).collect();
            average_precision(&tps, n_gt)
        })
        .collect()
}

/// Folds per-image results into the per-class and averaged report.
/// `classes` pairs class ids with report names.
pub fn accumulate(results: &[ImageResult], classes: &[(u16, String)], params: &EvalParams) -> APReport {
    let i50 = params.index_of(0.5);
    let i75 = params.index_of(0.75);
    let mut per_class = BTreeMap::new();
    for (id, name) in classes {
        let aps = class_ap_per_threshold(results, *id, params);
        let ap = if aps.iter().all(Option::is_some) && !aps.is_empty() {
            Some(aps.iter().flatten().sum::<f64>() / aps.len() as f64)
        } else {
            None
        };
        let entry = ClassAp {
            ap,
            ap50: i50.and_then(|i| aps[i]),
            ap75: i75.and_then(|i| aps[i]),
        };
        per_class.insert(name.clone(), entry);
    }
    let mean = |f: fn(&ClassAp) -> Option<f64>| {
        let vals: Vec<f64> = per_class.values().filter_map(f).collect();
        (!vals.is_empty()).then(|| vals.iter().sum::<f64>() / vals.len() as f64)
    };
    let average = ClassAp {
        ap: mean(|c| c.ap),
        ap50: mean(|c| c.ap50),
        ap75: mean(|c| c.ap75),
    };
    APReport { per_class, average }
}

pub fn map_report(images: &[EvalImage], classes: &[(u16, String)], params: &EvalParams) -> Result<APReport> {
    let ids: Vec<u16> = classes.iter().map(|c| c.0).collect();
    let results = images
        .iter()
        .map(|img| evaluate_image(img, &ids, params))
        .collect::<Result<Vec<_>>>()?;
    Ok(accumulate(&results, classes, params))
}
