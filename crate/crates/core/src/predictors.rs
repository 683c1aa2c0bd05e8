//! The four PMV schemes behind one interface.
//!
//! Only the analytic best-neighbor scheme needs side information: one symbol
//! per coordinate saying whether the chosen value is the median, the lower
//! or the higher of the three candidate values.

use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fcnn::{argmax, FcnnModel, Head};
use crate::motion_field::MotionVector;
use crate::neighborhood::{best_pmv, median_pmv, normalize_sample, regression_input, residual, NeighborSample, Residual};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Signal {
    Median,
    Lower,
    Higher,
    None,
}

impl Signal {
    /// Integer symbol used when the signal stream is entropy coded.
    pub fn symbol(self) -> i32 {
        match self {
            Signal::Median => 0,
            Signal::Lower => -1,
            Signal::Higher => 1,
            Signal::None => 2,
        }
    }

    /// Which side of `median` a selected value lies on.
    pub fn relative_to(selected: i32, median: i32) -> Self {
        match selected.cmp(&median) {
            std::cmp::Ordering::Equal => Signal::Median,
            std::cmp::Ordering::Less => Signal::Lower,
            std::cmp::Ordering::Greater => Signal::Higher,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Median,
    Best,
    Classifier,
    Regressor,
}

impl Scheme {
    pub const ALL: [Scheme; 4] = [Scheme::Median, Scheme::Best, Scheme::Classifier, Scheme::Regressor];

    pub fn name(self) -> &'static str {
        match self {
            Scheme::Median => "median",
            Scheme::Best => "best",
            Scheme::Classifier => "classifier",
            Scheme::Regressor => "regressor",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scheme::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown scheme `{s}`")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Prediction {
    pub pmv: MotionVector,
    pub residual: Residual,
    pub signal_x: Signal,
    pub signal_y: Signal,
    /// Unrounded regression output in pels.
    pub raw: Option<(f64, f64)>,
}

impl Prediction {
    fn plain(pmv: MotionVector, gt: MotionVector) -> Self {
        Self {
            pmv,
            residual: residual(pmv, gt),
            signal_x: Signal::None,
            signal_y: Signal::None,
            raw: None,
        }
    }
}

pub fn predict_median(sample: &NeighborSample) -> Prediction {
    Prediction::plain(median_pmv(sample).pmv, sample.gt())
}

pub fn predict_best(sample: &NeighborSample) -> Result<Prediction> {
    let best = best_pmv(sample)?;
    let median = median_pmv(sample).pmv;
    Ok(Prediction {
        signal_x: Signal::relative_to(best.pmv.dx, median.dx),
        signal_y: Signal::relative_to(best.pmv.dy, median.dy),
        ..Prediction::plain(best.pmv, sample.gt())
    })
}

/// Decoder side of the best scheme: the three neighbors plus two signals give
/// back the selected vector.
pub fn reconstruct_best(neighbors: [MotionVector; 3], signal_x: Signal, signal_y: Signal) -> Result<MotionVector> {
    let pick = |mut values: [i32; 3], signal: Signal| -> Result<i32> {
        values.sort_unstable();
        match signal {
            Signal::Median => Ok(values[1]),
            Signal::Lower => Ok(values[0]),
            Signal::Higher => Ok(values[2]),
            Signal::None => Err(Error::Config("best-scheme reconstruction needs a selection signal".into())),
        }
    };
    Ok(MotionVector::new(
        pick(neighbors.map(|m| m.dx), signal_x)?,
        pick(neighbors.map(|m| m.dy), signal_y)?,
    ))
}

fn require_head(model: &FcnnModel, head: Head) -> Result<()> {
    if model.head != head {
        return Err(Error::Config(format!("expected a {head:?} model, got {:?}", model.head)));
    }
    Ok(())
}

pub fn predict_classifier(sample: &NeighborSample, model_x: &FcnnModel, model_y: &FcnnModel) -> Result<Prediction> {
    require_head(model_x, Head::Softmax3)?;
    require_head(model_y, Head::Softmax3)?;
    let neighbors = sample.triple()?;
    let median = median_pmv(sample);
    let pick = |model: &FcnnModel| -> Result<usize> {
        let input = normalize_sample(sample, &model.norm, &median, true)?;
        Ok(argmax(&model.predict(&input)?))
    };
    let pmv = MotionVector::new(neighbors[pick(model_x)?].dx, neighbors[pick(model_y)?].dy);
    Ok(Prediction::plain(pmv, sample.gt()))
}

pub fn predict_regressor(sample: &NeighborSample, model_x: &FcnnModel, model_y: &FcnnModel) -> Result<Prediction> {
    require_head(model_x, Head::Scalar)?;
    require_head(model_y, Head::Scalar)?;
    let estimate = |model: &FcnnModel, axis: usize| -> Result<(f64, i32)> {
        let input = regression_input(sample, &model.norm)?;
        let raw = model.norm.unscale(model.predict(&input)?[0], axis);
        let bound = model.norm.max_abs(axis) as f64;
        // f64::round rounds half away from zero
        Ok((raw, raw.round().clamp(-bound, bound) as i32))
    };
    let (raw_x, x) = estimate(model_x, 0)?;
    let (raw_y, y) = estimate(model_y, 1)?;
    Ok(Prediction {
        raw: Some((raw_x, raw_y)),
        ..Prediction::plain(MotionVector::new(x, y), sample.gt())
    })
}

/// A scheme together with whatever models it needs.
#[derive(Clone, Debug)]
pub enum Predictor {
    Median,
    Best,
    Classifier { x: FcnnModel, y: FcnnModel },
    Regressor { x: FcnnModel, y: FcnnModel },
}

impl Predictor {
    pub fn scheme(&self) -> Scheme {
        match self {
            Predictor::Median => Scheme::Median,
            Predictor::Best => Scheme::Best,
            Predictor::Classifier { .. } => Scheme::Classifier,
            Predictor::Regressor { .. } => Scheme::Regressor,
        }
    }

    /// Sample categories the scheme accepts.
    pub fn accepts(&self, category: usize) -> bool {
        match self {
            Predictor::Median => true,
            Predictor::Best | Predictor::Classifier { .. } => category == 3,
            Predictor::Regressor { .. } => category >= 2,
        }
    }

    pub fn predict(&self, sample: &NeighborSample) -> Result<Prediction> {
        match self {
            Predictor::Median => Ok(predict_median(sample)),
            Predictor::Best => predict_best(sample),
            Predictor::Classifier { x, y } => predict_classifier(sample, x, y),
            Predictor::Regressor { x, y } => predict_regressor(sample, x, y),
        }
    }
}

/// One line of the prediction dump.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PredictionRow {
    pub scheme: Scheme,
    pub source: String,
    pub gtx: i32,
    pub gty: i32,
    pub pmvx: i32,
    pub pmvy: i32,
    pub dx: i32,
    pub dy: i32,
    pub sigx: Signal,
    pub sigy: Signal,
}

impl PredictionRow {
    pub fn new(scheme: Scheme, sample: &NeighborSample, p: &Prediction) -> Self {
        Self {
            scheme,
            source: sample.source_id().to_string(),
            gtx: sample.gt().dx,
            gty: sample.gt().dy,
            pmvx: p.pmv.dx,
            pmvy: p.pmv.dy,
            dx: p.residual.dx,
            dy: p.residual.dy,
            sigx: p.signal_x,
            sigy: p.signal_y,
        }
    }

    pub fn residual(&self) -> Residual {
        Residual { dx: self.dx, dy: self.dy }
    }
}

/// CSV with header `scheme,source,gtx,gty,pmvx,pmvy,dx,dy,sigx,sigy`.
pub fn write_predictions_csv<W: Write>(writer: W, rows: &[PredictionRow]) -> Result<()> {
    let mut out = csv::Writer::from_writer(writer);
    for row in rows {
        out.serialize(row)?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_predictions_csv<R: Read>(reader: R) -> Result<Vec<PredictionRow>> {
    let mut rows = Vec::new();
    for (line, row) in csv::Reader::from_reader(reader).deserialize().enumerate() {
        let row: PredictionRow = row?;
        if (row.dx, row.dy) != (row.pmvx - row.gtx, row.pmvy - row.gty) {
            return Err(Error::Dimension(format!("row {}: residual does not equal pmv - gt", line + 1)));
        }
        rows.push(row);
    }
    Ok(rows)
}
