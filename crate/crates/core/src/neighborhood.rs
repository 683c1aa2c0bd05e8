//! Causal neighbor samples, the median and best-neighbor predictors, and the
//! dataset plumbing around them.
//!
//! Neighbors are taken at A = left `(col-1, row)`, B = top-left
//! `(col-1, row-1)` and C = top `(col, row-1)`, in that order. All three are
//! decoded before the current block in raster order.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{Read, Write};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::motion_field::{MotionVector, MvField};

/// Default dataset sizes.
pub const DEFAULT_TRAIN_QUOTA: usize = 50_000;
pub const DEFAULT_TEST_QUOTA: usize = 2_000;

/// Normalized magnitude of the largest training motion component.
pub const MV_SCALE: f64 = 0.8;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NeighborSample {
    gt: MotionVector,
    neighbors: [Option<MotionVector>; 3],
    source_id: String,
}

impl NeighborSample {
    /// `neighbors` is indexed A, B, C. At least one must be present and `gt`
    /// must be non-zero.
    pub fn new(gt: MotionVector, neighbors: [Option<MotionVector>; 3], source_id: impl Into<String>) -> Result<Self> {
        if gt.is_zero() {
            return Err(Error::Config("zero-motion blocks are not samples".into()));
        }
        if neighbors.iter().all(Option::is_none) {
            return Err(Error::Category {
                expected: "1, 2 or 3",
                found: 0,
            });
        }
        Ok(Self {
            gt,
            neighbors,
            source_id: source_id.into(),
        })
    }

    /// Convenience constructor for a block with all three neighbors present.
    pub fn full(gt: MotionVector, a: MotionVector, b: MotionVector, c: MotionVector, source_id: impl Into<String>) -> Result<Self> {
        Self::new(gt, [Some(a), Some(b), Some(c)], source_id)
    }

    pub fn gt(&self) -> MotionVector {
        self.gt
    }

    pub fn slots(&self) -> &[Option<MotionVector>; 3] {
        &self.neighbors
    }

    /// Present neighbors in A, B, C order.
    pub fn present(&self) -> Vec<MotionVector> {
        self.neighbors.iter().flatten().copied().collect()
    }

    pub fn category(&self) -> usize {
        self.neighbors.iter().filter(|n| n.is_some()).count()
    }

    pub fn source_id(&self) -> &str {
        &self.source_id
    }

    fn require_full(&self) -> Result<[MotionVector; 3]> {
        match self.neighbors {
            [Some(a), Some(b), Some(c)] => Ok([a, b, c]),
            _ => Err(Error::Category {
                expected: "3",
                found: self.category(),
            }),
        }
    }

    /// The three neighbors, or a category error.
    pub fn triple(&self) -> Result<[MotionVector; 3]> {
        self.require_full()
    }
}

/// Component-wise median and which neighbor supplied each component.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MedianResult {
    pub pmv: MotionVector,
    pub arg_x: usize,
    pub arg_y: usize,
}

/// Middle value of three and the lowest index holding it.
fn median3(values: [i32; 3]) -> (i32, usize) {
    let mut sorted = values;
    sorted.sort_unstable();
    let mid = sorted[1];
    let arg = values.iter().position(|&v| v == mid).unwrap_or(0);
    (mid, arg)
}

pub fn median_pmv(sample: &NeighborSample) -> MedianResult {
    let present = sample.present();
    match present.as_slice() {
        [a, b, c] => {
            let (x, arg_x) = median3([a.dx, b.dx, c.dx]);
            let (y, arg_y) = median3([a.dy, b.dy, c.dy]);
            MedianResult {
                pmv: MotionVector::new(x, y),
                arg_x,
                arg_y,
            }
        }
        // integer division truncates toward zero
        [a, b] => MedianResult {
            pmv: MotionVector::new((a.dx + b.dx) / 2, (a.dy + b.dy) / 2),
            arg_x: 0,
            arg_y: 0,
        },
        [only] => MedianResult {
            pmv: *only,
            arg_x: 0,
            arg_y: 0,
        },
        _ => unreachable!("samples always carry at least one neighbor"),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BestPmv {
    pub pmv: MotionVector,
    pub sel_x: usize,
    pub sel_y: usize,
}

/// Index of the candidate closest to `target`; ties go to `preferred` when it
/// is among the closest, else to the lowest index.
fn closest(values: [i32; 3], target: i32, preferred: usize) -> usize {
    let dist = values.map(|v| (v - target).unsigned_abs());
    let min = *dist.iter().min().unwrap();
    if dist[preferred] == min {
        preferred
    } else {
        dist.iter().position(|&d| d == min).unwrap()
    }
}

/// Per-coordinate neighbor value closest to the ground truth. The x and y
/// components may come from different neighbors.
pub fn best_pmv(sample: &NeighborSample) -> Result<BestPmv> {
    let n = sample.require_full()?;
    let median = median_pmv(sample);
    let gt = sample.gt();
    let sel_x = closest(n.map(|m| m.dx), gt.dx, median.arg_x);
    let sel_y = closest(n.map(|m| m.dy), gt.dy, median.arg_y);
    Ok(BestPmv {
        pmv: MotionVector::new(n[sel_x].dx, n[sel_y].dy),
        sel_x,
        sel_y,
    })
}

/// Prediction error `pmv - gt`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct Residual {
    pub dx: i32,
    pub dy: i32,
}

impl Residual {
    pub fn coord(self, axis: usize) -> i32 {
        if axis == 0 {
            self.dx
        } else {
            self.dy
        }
    }
}

pub fn residual(pmv: MotionVector, gt: MotionVector) -> Residual {
    Residual {
        dx: pmv.dx - gt.dx,
        dy: pmv.dy - gt.dy,
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mse {
    pub x: f64,
    pub y: f64,
    /// `x + y`: both squared terms under one `1/N`.
    pub joint: f64,
}

pub fn mse(residuals: &[Residual]) -> Result<Mse> {
    mse_f64(residuals.iter().map(|r| (r.dx as f64, r.dy as f64)))
}

/// MSE over real-valued errors (used for unrounded regression output).
pub fn mse_f64(errors: impl IntoIterator<Item = (f64, f64)>) -> Result<Mse> {
    let (mut sx, mut sy, mut n) = (0.0, 0.0, 0usize);
    for (dx, dy) in errors {
        sx += dx * dx;
        sy += dy * dy;
        n += 1;
    }
    if n == 0 {
        return Err(Error::Statistic("MSE of an empty residual list"));
    }
    let (x, y) = (sx / n as f64, sy / n as f64);
    Ok(Mse { x, y, joint: x + y })
}

/// Largest absolute motion component per axis, taken over training samples only.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NormalizationConstants {
    pub max_abs_x: u32,
    pub max_abs_y: u32,
}

impl Default for NormalizationConstants {
    fn default() -> Self {
        Self {
            max_abs_x: 1,
            max_abs_y: 1,
        }
    }
}

impl NormalizationConstants {
    /// Maximum over every present neighbor and every ground truth. An axis with
    /// no motion at all gets 1 so the constants stay strictly positive.
    pub fn from_samples<'a>(samples: impl IntoIterator<Item = &'a NeighborSample>) -> Self {
        let mut c = Self {
            max_abs_x: 1,
            max_abs_y: 1,
        };
        for s in samples {
            for mv in s.present().into_iter().chain([s.gt()]) {
                c.max_abs_x = c.max_abs_x.max(mv.dx.unsigned_abs());
                c.max_abs_y = c.max_abs_y.max(mv.dy.unsigned_abs());
            }
        }
        c
    }

    pub fn max_abs(&self, axis: usize) -> u32 {
        if axis == 0 {
            self.max_abs_x
        } else {
            self.max_abs_y
        }
    }

    /// `0.8 * v / max`, clamped to `[-0.8, 0.8]`.
    pub fn scale(&self, value: i32, axis: usize) -> f64 {
        (MV_SCALE * value as f64 / self.max_abs(axis) as f64).clamp(-MV_SCALE, MV_SCALE)
    }

    pub fn unscale(&self, value: f64, axis: usize) -> f64 {
        value * self.max_abs(axis) as f64 / MV_SCALE
    }
}

/// Median index `0, 1, 2` mapped to `0.85, 0.90, 0.95`.
pub fn encode_arg(arg: usize) -> f64 {
    arg as f64 * 0.05 + 0.85
}

/// Scaled `(x, y)` pairs for A, B, C; absent neighbors contribute zeros.
fn mv_slots(sample: &NeighborSample, consts: &NormalizationConstants) -> Vec<f64> {
    sample
        .slots()
        .iter()
        .flat_map(|slot| match slot {
            Some(mv) => [consts.scale(mv.dx, 0), consts.scale(mv.dy, 1)],
            None => [0.0, 0.0],
        })
        .collect()
}

/// Network input for a full-neighborhood sample: six scaled components, plus the
/// two encoded median arguments when `include_args` is set.
pub fn normalize_sample(
    sample: &NeighborSample,
    consts: &NormalizationConstants,
    median: &MedianResult,
    include_args: bool,
) -> Result<Vec<f64>> {
    sample.require_full()?;
    let mut input = mv_slots(sample, consts);
    if include_args {
        input.push(encode_arg(median.arg_x));
        input.push(encode_arg(median.arg_y));
    }
    Ok(input)
}

/// Regression input: six scaled components with zero-filled gaps. Accepts
/// two- and three-neighbor samples.
pub fn regression_input(sample: &NeighborSample, consts: &NormalizationConstants) -> Result<Vec<f64>> {
    match sample.category() {
        2 | 3 => Ok(mv_slots(sample, consts)),
        found => Err(Error::Category {
            expected: "2 or 3",
            found,
        }),
    }
}

/// Classifier targets; identical to the best-neighbor selection indices.
pub fn class_label(sample: &NeighborSample, median: &MedianResult) -> Result<(usize, usize)> {
    let n = sample.require_full()?;
    let gt = sample.gt();
    Ok((
        closest(n.map(|m| m.dx), gt.dx, median.arg_x),
        closest(n.map(|m| m.dy), gt.dy, median.arg_y),
    ))
}

/// Samples from every motion-compensated, non-zero block with at least one
/// motion-compensated causal neighbor.
pub fn extract_samples(fields: &[MvField], source_id: &str) -> Vec<NeighborSample> {
    let mut samples = Vec::new();
    for field in fields {
        for block in &field.blocks {
            let Some(gt) = block.mv else { continue };
            if gt.is_zero() {
                continue;
            }
            let (c, r) = (block.col as isize, block.row as isize);
            let neighbors = [field.mv_at(c - 1, r), field.mv_at(c - 1, r - 1), field.mv_at(c, r - 1)];
            if let Ok(sample) = NeighborSample::new(gt, neighbors, source_id) {
                samples.push(sample);
            }
        }
    }
    samples
}

#[derive(Clone, Debug, Default)]
pub struct DatasetSplit {
    pub train: Vec<NeighborSample>,
    pub test: Vec<NeighborSample>,
    pub train_sources: Vec<String>,
    pub test_sources: Vec<String>,
    /// A quota could not be met from the available sources.
    pub undersupplied: bool,
}

/// Partitions sources (not samples) so that no source contributes to both
/// sides. Sources are shuffled with `seed`; test sources are drawn first
/// until the test quota is covered, always leaving one for training.
pub fn split_dataset(samples: &[NeighborSample], train_quota: usize, test_quota: usize, seed: u64) -> Result<DatasetSplit> {
    let mut by_source: BTreeMap<&str, Vec<&NeighborSample>> = BTreeMap::new();
    for s in samples {
        by_source.entry(s.source_id()).or_default().push(s);
    }
    if by_source.len() < 2 {
        return Err(Error::Split(format!(
            "need at least two distinct sources, found {}",
            by_source.len()
        )));
    }
    let mut ids: Vec<&str> = by_source.keys().copied().collect();
    ids.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));

    let mut split = DatasetSplit::default();
    let mut taken = 0;
    let mut cut = 0;
    while cut < ids.len() - 1 && (cut == 0 || taken < test_quota) {
        taken += by_source[ids[cut]].len();
        cut += 1;
    }
    let (test_ids, train_ids) = ids.split_at(cut);
    let fill = |ids: &[&str], quota: usize| -> Vec<NeighborSample> {
        ids.iter()
            .flat_map(|id| by_source[id].iter().map(|s| (*s).clone()))
            .take(quota)
            .collect()
    };
    split.test = fill(test_ids, test_quota);
    split.train = fill(train_ids, train_quota);
    split.test_sources = test_ids.iter().map(|s| s.to_string()).collect();
    split.train_sources = train_ids.iter().map(|s| s.to_string()).collect();
    if split.test.len() < test_quota || split.train.len() < train_quota {
        split.undersupplied = true;
        log::warn!(
            "dataset under-supplied: {} of {train_quota} train, {} of {test_quota} test samples",
            split.train.len(),
            split.test.len()
        );
    }
    Ok(split)
}

/// Distinct source ids in first-seen order.
pub fn source_ids(samples: &[NeighborSample]) -> Vec<String> {
    let mut seen = BTreeSet::new();
    samples
        .iter()
        .filter(|s| seen.insert(s.source_id()))
        .map(|s| s.source_id().to_string())
        .collect()
}

#[derive(Debug, Serialize, Deserialize)]
struct SampleRow {
    source: String,
    cat: usize,
    ax: Option<i32>,
    ay: Option<i32>,
    bx: Option<i32>,
    by: Option<i32>,
    cx: Option<i32>,
    cy: Option<i32>,
    gtx: i32,
    gty: i32,
}

/// CSV with header `source,cat,ax,ay,bx,by,cx,cy,gtx,gty`; absent neighbors
/// are empty fields.
pub fn write_samples_csv<W: Write>(writer: W, samples: &[NeighborSample]) -> Result<()> {
    let mut out = csv::Writer::from_writer(writer);
    for s in samples {
        let [a, b, c] = s.slots();
        out.serialize(SampleRow {
            source: s.source_id().to_string(),
            cat: s.category(),
            ax: a.map(|m| m.dx),
            ay: a.map(|m| m.dy),
            bx: b.map(|m| m.dx),
            by: b.map(|m| m.dy),
            cx: c.map(|m| m.dx),
            cy: c.map(|m| m.dy),
            gtx: s.gt().dx,
            gty: s.gt().dy,
        })?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_samples_csv<R: Read>(reader: R) -> Result<Vec<NeighborSample>> {
    let mut input = csv::Reader::from_reader(reader);
    let mut samples = Vec::new();
    for (line, row) in input.deserialize().enumerate() {
        let row: SampleRow = row?;
        let pair = |x: Option<i32>, y: Option<i32>| -> Result<Option<MotionVector>> {
            match (x, y) {
                (Some(x), Some(y)) => Ok(Some(MotionVector::new(x, y))),
                (None, None) => Ok(None),
                _ => Err(Error::Dimension(format!("row {}: half-present neighbor", line + 1))),
            }
        };
        let neighbors = [pair(row.ax, row.ay)?, pair(row.bx, row.by)?, pair(row.cx, row.cy)?];
        let sample = NeighborSample::new(MotionVector::new(row.gtx, row.gty), neighbors, row.source)?;
        if sample.category() != row.cat {
            return Err(Error::Dimension(format!(
                "row {}: cat {} but {} neighbors present",
                line + 1,
                row.cat,
                sample.category()
            )));
        }
        samples.push(sample);
    }
    Ok(samples)
}

/// Mean and sample standard deviation of ground-truth components, used
/// to tell high-motion datasets from low-motion ones.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MvStatistics {
    pub count: usize,
    pub mean_x: f64,
    pub std_x: f64,
    pub mean_y: f64,
    pub std_y: f64,
}

pub fn mv_statistics(samples: &[NeighborSample]) -> MvStatistics {
    let n = samples.len();
    let stats = |axis: usize| -> (f64, f64) {
        if n == 0 {
            return (0.0, 0.0);
        }
        let mean = samples.iter().map(|s| s.gt().coord(axis) as f64).sum::<f64>() / n as f64;
        if n < 2 {
            return (mean, 0.0);
        }
        let var = samples
            .iter()
            .map(|s| (s.gt().coord(axis) as f64 - mean).powi(2))
            .sum::<f64>()
            / (n - 1) as f64;
        (mean, var.sqrt())
    };
    let (mean_x, std_x) = stats(0);
    let (mean_y, std_y) = stats(1);
    MvStatistics {
        count: n,
        mean_x,
        std_x,
        mean_y,
        std_y,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::motion_field::BlockRecord;

    fn mv(dx: i32, dy: i32) -> MotionVector {
        MotionVector::new(dx, dy)
    }

    fn full(gt: (i32, i32), n: [(i32, i32); 3]) -> NeighborSample {
        NeighborSample::full(mv(gt.0, gt.1), mv(n[0].0, n[0].1), mv(n[1].0, n[1].1), mv(n[2].0, n[2].1), "s").unwrap()
    }

    fn grid(cols: usize, rows: usize, f: impl Fn(usize, usize) -> Option<MotionVector>) -> MvField {
        let blocks = (0..rows)
            .flat_map(|row| (0..cols).map(move |col| (col, row)))
            .map(|(col, row)| BlockRecord {
                col,
                row,
                mv: f(col, row),
                sad: 0,
            })
            .collect();
        MvField {
            frame_index: 1,
            block_size: 16,
            cols,
            rows,
            blocks,
        }
    }

    #[test]
    fn extraction_on_small_grids() {
        assert!(extract_samples(&[grid(1, 1, |_, _| Some(mv(1, 1)))], "s").is_empty());

        let field = grid(2, 2, |c, r| Some(mv(c as i32 + 1, r as i32 + 1)));
        let samples = extract_samples(&[field], "s");
        assert_eq!(samples.len(), 3);
        // raster order: (1,0), (0,1), (1,1)
        assert_eq!(samples[0].slots(), &[Some(mv(1, 1)), None, None]);
        assert_eq!(samples[1].slots(), &[None, None, Some(mv(1, 1))]);
        assert_eq!(samples[2].category(), 3);
        assert_eq!(samples[2].slots(), &[Some(mv(1, 2)), Some(mv(1, 1)), Some(mv(2, 1))]);

        assert!(extract_samples(&[grid(3, 3, |_, _| Some(MotionVector::ZERO))], "s").is_empty());
    }

    #[test]
    fn intra_neighbors_are_absent() {
        let field = grid(2, 2, |c, r| if (c, r) == (0, 0) { None } else { Some(mv(2, 2)) });
        let samples = extract_samples(&[field], "s");
        let last = samples.last().unwrap();
        assert_eq!(last.category(), 2);
        assert_eq!(last.slots()[1], None);
    }

    #[test]
    fn median_examples() {
        let m = median_pmv(&full((1, 5), [(4, 2), (1, 7), (3, 3)]));
        assert_eq!((m.pmv, m.arg_x, m.arg_y), (mv(3, 3), 2, 2));

        let m = median_pmv(&full((1, 1), [(5, 5), (5, 5), (5, 5)]));
        assert_eq!((m.pmv, m.arg_x, m.arg_y), (mv(5, 5), 0, 0));

        let two = NeighborSample::new(mv(1, 1), [Some(mv(2, 0)), None, Some(mv(4, 6))], "s").unwrap();
        assert_eq!(median_pmv(&two).pmv, mv(3, 3));
        let odd = NeighborSample::new(mv(1, 1), [Some(mv(-3, 3)), Some(mv(0, 0)), None], "s").unwrap();
        assert_eq!(median_pmv(&odd).pmv, mv(-1, 1));

        let one = NeighborSample::new(mv(1, 1), [None, None, Some(mv(7, -2))], "s").unwrap();
        assert_eq!(median_pmv(&one).pmv, mv(7, -2));
    }

    #[test]
    fn best_examples() {
        let b = best_pmv(&full((0, 1), [(4, 0), (1, 0), (3, 0)])).unwrap();
        assert_eq!((b.sel_x, b.pmv.dx), (1, 1));

        let b = best_pmv(&full((6, -2), [(1, 1), (6, -2), (9, 9)])).unwrap();
        assert_eq!((b.sel_x, b.sel_y), (1, 1));
        assert_eq!(residual(b.pmv, mv(6, -2)), Residual::default());

        let b = best_pmv(&full((5, 5), [(4, 5), (6, 5), (9, 0)])).unwrap();
        assert_eq!((b.sel_x, b.sel_y), (1, 0));

        let two = NeighborSample::new(mv(1, 1), [Some(mv(2, 0)), None, Some(mv(4, 6))], "s").unwrap();
        assert!(matches!(best_pmv(&two), Err(Error::Category { found: 2, .. })));
    }

    #[test]
    fn residual_and_mse() {
        assert_eq!(residual(mv(3, 3), mv(1, 5)), Residual { dx: 2, dy: -2 });
        assert_eq!(residual(MotionVector::ZERO, mv(-4, 7)), Residual { dx: 4, dy: -7 });
        let r = |dx, dy| Residual { dx, dy };
        let m = mse(&[r(2, 0), r(0, 2)]).unwrap();
        assert_eq!((m.x, m.y, m.joint), (2.0, 2.0, 4.0));
        assert_eq!(mse(&[r(1, 1)]).unwrap().joint, 2.0);
        assert_eq!(mse(&[r(0, 0), r(0, 0)]).unwrap().joint, 0.0);
        assert!(matches!(mse(&[]), Err(Error::Statistic(_))));
    }

    #[test]
    fn normalization() {
        let consts = NormalizationConstants {
            max_abs_x: 10,
            max_abs_y: 4,
        };
        let s = full((1, 1), [(10, -4), (20, 2), (-5, 0)]);
        let m = median_pmv(&s);
        let input = normalize_sample(&s, &consts, &m, true).unwrap();
        assert_eq!(input.len(), 8);
        assert_eq!(input[0], 0.8);
        assert_eq!(input[1], -0.8);
        assert_eq!(input[2], 0.8); // overflow clamped
        assert!((input[4] + 0.4).abs() < 1e-15);
        assert_eq!(encode_arg(0), 0.85);
        assert_eq!(encode_arg(2), 0.95);
        assert_eq!(normalize_sample(&s, &consts, &m, false).unwrap().len(), 6);

        let one = NeighborSample::new(mv(1, 1), [None, None, Some(mv(1, 1))], "s").unwrap();
        assert!(normalize_sample(&one, &consts, &median_pmv(&one), true).is_err());
        assert!(regression_input(&one, &consts).is_err());
        let two = NeighborSample::new(mv(1, 1), [Some(mv(5, 2)), None, Some(mv(1, 1))], "s").unwrap();
        assert_eq!(regression_input(&two, &consts).unwrap()[2..4], [0.0, 0.0]);
    }

    #[test]
    fn constants_cover_gt_and_neighbors() {
        let samples = [full((-12, 1), [(3, 0), (1, 9), (0, 0)]), full((2, 0), [(0, 0), (0, 0), (0, 0)])];
        let c = NormalizationConstants::from_samples(&samples);
        assert_eq!((c.max_abs_x, c.max_abs_y), (12, 9));
        let flat = [full((5, 0), [(1, 0), (2, 0), (3, 0)])];
        assert_eq!(NormalizationConstants::from_samples(&flat).max_abs_y, 1);
    }

    #[test]
    fn labels_follow_best() {
        let s = full((0, 1), [(4, 1), (1, 1), (3, 1)]);
        assert_eq!(class_label(&s, &median_pmv(&s)).unwrap().0, 1);
        let s = full((3, 4), [(0, 0), (1, 1), (3, 4)]);
        assert_eq!(class_label(&s, &median_pmv(&s)).unwrap(), (2, 2));
        let s = full((9, 9), [(2, 2), (2, 2), (2, 2)]);
        assert_eq!(class_label(&s, &median_pmv(&s)).unwrap(), (0, 0));
    }

    #[test]
    fn split_is_disjoint_and_seeded() {
        let mk = |src: &str, n: usize| -> Vec<NeighborSample> {
            (0..n).map(|i| full((i as i32 + 1, 1), [(1, 1), (1, 1), (1, 1)]).with_source(src)).collect()
        };
        let samples: Vec<_> = mk("a", 5).into_iter().chain(mk("b", 5)).collect();
        let split = split_dataset(&samples, 1, 1, 3).unwrap();
        assert_eq!((split.train.len(), split.test.len()), (1, 1));
        assert_ne!(split.train[0].source_id(), split.test[0].source_id());

        let many: Vec<_> = (0..6).flat_map(|k| mk(&format!("m{k}"), 4)).collect();
        let a = split_dataset(&many, 10, 5, 11).unwrap();
        let b = split_dataset(&many, 10, 5, 11).unwrap();
        assert_eq!(a.train, b.train);
        assert_eq!(a.test_sources, b.test_sources);

        let big = split_dataset(&many, 1000, 5, 11).unwrap();
        assert!(big.undersupplied);
        assert_eq!((big.train.len(), big.test.len()), (16, 5));

        assert!(matches!(split_dataset(&mk("solo", 3), 1, 1, 0), Err(Error::Split(_))));
    }

    #[test]
    fn csv_round_trip() {
        let samples = vec![
            full((1, -2), [(3, 4), (5, 6), (7, 8)]),
            NeighborSample::new(mv(1, 1), [None, Some(mv(2, 2)), None], "movie,2").unwrap(),
        ];
        let mut buf = Vec::new();
        write_samples_csv(&mut buf, &samples).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("source,cat,ax,ay,bx,by,cx,cy,gtx,gty\n"));
        assert!(text.contains("1,,,2,2,,,1,1"));
        assert_eq!(read_samples_csv(buf.as_slice()).unwrap(), samples);
    }

    #[test]
    fn statistics() {
        let samples = [full((2, 0), [(1, 1), (1, 1), (1, 1)]), full((4, 0), [(1, 1), (1, 1), (1, 1)])];
        let s = mv_statistics(&samples);
        assert_eq!(s.mean_x, 3.0);
        assert!((s.std_x - 2f64.sqrt()).abs() < 1e-12);
    }

    impl NeighborSample {
        fn with_source(mut self, id: &str) -> Self {
            self.source_id = id.to_string();
            self
        }
    }
}
