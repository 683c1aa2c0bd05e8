//! Comparison tables: per-scheme metrics, improvement over the median, and
//! mean ± standard deviation across datasets.
//!
//! All numbers are rendered with fixed precision so that report files are
//! byte-stable across runs.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::entropy_coding::{signaling_cost, summarize, SignalingMode};
use crate::error::{Error, Result};
use crate::neighborhood::{mse, mse_f64, MvStatistics, NeighborSample, Residual};
use crate::predictors::{Prediction, PredictionRow, Scheme, Signal};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Coordinate {
    X,
    Y,
}

impl Coordinate {
    pub const BOTH: [Coordinate; 2] = [Coordinate::X, Coordinate::Y];

    pub fn axis(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Coordinate::X => "x",
            Coordinate::Y => "y",
        }
    }
}

/// Everything one scheme produced on one test set.
#[derive(Clone, Debug, PartialEq)]
pub struct SchemeOutcome {
    pub scheme: Scheme,
    pub residuals: Vec<Residual>,
    pub signals: Vec<(Signal, Signal)>,
    /// `raw - gt` for schemes with real-valued output.
    pub raw_errors: Option<Vec<(f64, f64)>>,
}

impl SchemeOutcome {
    pub fn from_predictions(scheme: Scheme, samples: &[NeighborSample], predictions: &[Prediction]) -> Self {
        let raw_errors = predictions.first().and_then(|p| p.raw).map(|_| {
            samples
                .iter()
                .zip(predictions)
                .map(|(s, p)| {
                    let (rx, ry) = p.raw.unwrap_or((p.pmv.dx as f64, p.pmv.dy as f64));
                    (rx - s.gt().dx as f64, ry - s.gt().dy as f64)
                })
                .collect()
        });
        Self {
            scheme,
            residuals: predictions.iter().map(|p| p.residual).collect(),
            signals: predictions.iter().map(|p| (p.signal_x, p.signal_y)).collect(),
            raw_errors,
        }
    }

    /// Groups a prediction dump by scheme, in canonical scheme order.
    pub fn from_rows(rows: &[PredictionRow]) -> Vec<Self> {
        Scheme::ALL
            .into_iter()
            .filter_map(|scheme| {
                let mine: Vec<&PredictionRow> = rows.iter().filter(|r| r.scheme == scheme).collect();
                (!mine.is_empty()).then(|| Self {
                    scheme,
                    residuals: mine.iter().map(|r| r.residual()).collect(),
                    signals: mine.iter().map(|r| (r.sigx, r.sigy)).collect(),
                    raw_errors: None,
                })
            })
            .collect()
    }

    fn coord(&self, c: Coordinate) -> Vec<i32> {
        self.residuals.iter().map(|r| r.coord(c.axis())).collect()
    }

    fn signals(&self, c: Coordinate) -> Vec<Signal> {
        self.signals.iter().map(|s| if c == Coordinate::X { s.0 } else { s.1 }).collect()
    }

    /// Residual histogram of one coordinate.
    pub fn histogram(&self, c: Coordinate) -> BTreeMap<i32, u64> {
        let mut h = BTreeMap::new();
        for v in self.coord(c) {
            *h.entry(v).or_insert(0) += 1;
        }
        h
    }
}

/// `1 - scheme / median`, as a fraction. A zero median value gives 0 when the
/// scheme also scores 0 and `-inf` otherwise.
pub fn improvement(scheme: f64, median: f64) -> f64 {
    if median == 0.0 {
        if scheme == 0.0 {
            0.0
        } else {
            f64::NEG_INFINITY
        }
    } else {
        1.0 - scheme / median
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Improvement {
    pub mse: f64,
    pub entropy: f64,
    pub bits: f64,
    /// Residual bits plus flat signaling, against the median's residual bits.
    pub bits_flat: f64,
    pub bits_huffman: f64,
}

/// One scheme, one coordinate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub scheme: Scheme,
    pub coordinate: Coordinate,
    pub samples: usize,
    pub mse: f64,
    /// MSE of the unrounded output, for real-valued schemes.
    pub mse_raw: Option<f64>,
    /// Bits per symbol.
    pub entropy: f64,
    /// Huffman-coded residual bits, signaling excluded.
    pub bits: u64,
    pub signal_bits_flat: u64,
    pub signal_bits_huffman: u64,
    pub improvement: Option<Improvement>,
}

impl ComparisonRow {
    pub fn total_bits(&self, mode: SignalingMode) -> u64 {
        self.bits
            + match mode {
                SignalingMode::Flat => self.signal_bits_flat,
                SignalingMode::Huffman => self.signal_bits_huffman,
            }
    }
}

/// Metrics for every outcome and coordinate. Improvements are filled in when a
/// median outcome over the same number of samples is present.
pub fn compare(outcomes: &[SchemeOutcome]) -> Result<Vec<ComparisonRow>> {
    let mut rows = Vec::new();
    for o in outcomes {
        if o.residuals.is_empty() {
            return Err(Error::NoSamples(format!("scheme {} has no predictions", o.scheme)));
        }
        let m = mse(&o.residuals)?;
        let raw = o.raw_errors.as_ref().map(|e| mse_f64(e.iter().copied())).transpose()?;
        for c in Coordinate::BOTH {
            let coding = summarize(&o.coord(c))?;
            let signals = o.signals(c);
            let pick = |v: (f64, f64)| if c == Coordinate::X { v.0 } else { v.1 };
            rows.push(ComparisonRow {
                scheme: o.scheme,
                coordinate: c,
                samples: o.residuals.len(),
                mse: pick((m.x, m.y)),
                mse_raw: raw.map(|r| pick((r.x, r.y))),
                entropy: coding.entropy,
                bits: coding.bits,
                signal_bits_flat: signaling_cost(&signals, SignalingMode::Flat),
                signal_bits_huffman: signaling_cost(&signals, SignalingMode::Huffman),
                improvement: None,
            });
        }
    }
    let medians: Vec<ComparisonRow> = rows.iter().filter(|r| r.scheme == Scheme::Median).cloned().collect();
    for row in &mut rows {
        if let Some(base) = medians.iter().find(|m| m.coordinate == row.coordinate && m.samples == row.samples) {
            row.improvement = Some(Improvement {
                mse: improvement(row.mse, base.mse),
                entropy: improvement(row.entropy, base.entropy),
                bits: improvement(row.bits as f64, base.bits as f64),
                bits_flat: improvement(row.total_bits(SignalingMode::Flat) as f64, base.bits as f64),
                bits_huffman: improvement(row.total_bits(SignalingMode::Huffman) as f64, base.bits as f64),
            });
        }
    }
    Ok(rows)
}

pub fn find_row(rows: &[ComparisonRow], scheme: Scheme, coordinate: Coordinate) -> Option<&ComparisonRow> {
    rows.iter().find(|r| r.scheme == scheme && r.coordinate == coordinate)
}

/// Mean and sample standard deviation (`n - 1` denominator; 0 for one value).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeanStd {
    pub mean: f64,
    pub std: f64,
    pub n: usize,
}

impl MeanStd {
    pub fn of(values: &[f64]) -> Self {
        let n = values.len();
        if n == 0 {
            return Self { mean: f64::NAN, std: f64::NAN, n };
        }
        let mean = values.iter().sum::<f64>() / n as f64;
        let std = if n < 2 {
            0.0
        } else {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
        };
        Self { mean, std, n }
    }
}

// ---- formatting -----------------------------------------------------------

pub(crate) fn fixed(v: f64) -> String {
    format!("{v:.6}")
}

pub(crate) fn pct(v: f64) -> String {
    format!("{:.1}%", 100.0 * v)
}

fn opt(v: Option<f64>) -> String {
    v.map(fixed).unwrap_or_default()
}

/// Integer with thousands separators, as the bit columns are usually printed.
pub(crate) fn grouped(v: f64) -> String {
    let neg = v < 0.0;
    let digits = format!("{:.0}", v.abs());
    let mut out = String::new();
    for (i, ch) in digits.chars().enumerate() {
        if i > 0 && (digits.len() - i) % 3 == 0 {
            out.push(',');
        }
        out.push(ch);
    }
    if neg {
        format!("-{out}")
    } else {
        out
    }
}

pub(crate) fn mean_std_pct(m: &MeanStd) -> String {
    format!("{:.1}% ± {:.1}%", 100.0 * m.mean, 100.0 * m.std)
}

fn mean_std_num(m: &MeanStd, decimals: usize) -> String {
    format!("{:.*} ± {:.*}", decimals, m.mean, decimals, m.std)
}

pub const REPORT_CSV_HEADER: &str = "table,scheme,coordinate,samples,mse,mse_raw,entropy,bits,signal_bits_flat,signal_bits_huffman,\
improvement_mse,improvement_entropy,improvement_bits,improvement_bits_flat,improvement_bits_huffman";

/// Rows of several tables in one CSV; `table` names the neighbor category.
pub fn rows_to_csv(tables: &[(&str, &[ComparisonRow])]) -> String {
    let mut out = String::from(REPORT_CSV_HEADER);
    out.push('\n');
    for (name, rows) in tables {
        for r in rows.iter() {
            let imp = r.improvement;
            let _ = writeln!(
                out,
                "{name},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
                r.scheme,
                r.coordinate.name(),
                r.samples,
                fixed(r.mse),
                opt(r.mse_raw),
                fixed(r.entropy),
                r.bits,
                r.signal_bits_flat,
                r.signal_bits_huffman,
                opt(imp.map(|i| i.mse)),
                opt(imp.map(|i| i.entropy)),
                opt(imp.map(|i| i.bits)),
                opt(imp.map(|i| i.bits_flat)),
                opt(imp.map(|i| i.bits_huffman)),
            );
        }
    }
    out
}

/// `MSE | Entropy | # Bits` per scheme for one coordinate.
pub fn metrics_table(rows: &[ComparisonRow], c: Coordinate) -> String {
    let mut out = format!("| Scheme | MSE Δ{0} | Entropy Δ{0} | # Bits Δ{0} |\n|---|---:|---:|---:|\n", c.name());
    for r in rows.iter().filter(|r| r.coordinate == c) {
        let _ = writeln!(out, "| {} | {:.4} | {:.4} | {} |", r.scheme, r.mse, r.entropy, grouped(r.bits as f64));
    }
    out
}

/// `1 - scheme / median` for every metric and both coordinates.
pub fn improvement_table(rows: &[ComparisonRow]) -> String {
    let mut out = String::from(
        "| Scheme | MSE x | Entropy x | # Bits x | MSE y | Entropy y | # Bits y |\n|---|---:|---:|---:|---:|---:|---:|\n",
    );
    for scheme in Scheme::ALL {
        let (Some(x), Some(y)) = (find_row(rows, scheme, Coordinate::X), find_row(rows, scheme, Coordinate::Y)) else {
            continue;
        };
        let (Some(ix), Some(iy)) = (x.improvement, y.improvement) else {
            continue;
        };
        let _ = writeln!(
            out,
            "| {scheme} | {} | {} | {} | {} | {} | {} |",
            pct(ix.mse),
            pct(ix.entropy),
            pct(ix.bits),
            pct(iy.mse),
            pct(iy.entropy),
            pct(iy.bits)
        );
    }
    out
}

/// Residual bits plus signaling against the median's residual bits.
pub fn signaling_table(rows: &[ComparisonRow]) -> String {
    let mut out = String::from(
        "| Scheme | Coordinate | Median bits | Residual bits | Flat signaling | Saving (flat) | Huffman signaling | Saving (Huffman) |\n\
         |---|---|---:|---:|---:|---:|---:|---:|\n",
    );
    for r in rows.iter().filter(|r| r.signal_bits_flat > 0) {
        let Some(base) = find_row(rows, Scheme::Median, r.coordinate) else {
            continue;
        };
        let Some(imp) = r.improvement else { continue };
        let _ = writeln!(
            out,
            "| {} | {} | {} | {} | {} | {} | {} | {} |",
            r.scheme,
            r.coordinate.name(),
            grouped(base.bits as f64),
            grouped(r.bits as f64),
            grouped(r.signal_bits_flat as f64),
            pct(imp.bits_flat),
            grouped(r.signal_bits_huffman as f64),
            pct(imp.bits_huffman)
        );
    }
    out
}

/// Median against predicted MSE, the layout used for regression results.
pub fn regression_table(rows: &[ComparisonRow], scheme: Scheme) -> String {
    let mut out = String::from(
        "| Coordinate | Median MSE | Predicted MSE | Diff | Predicted MSE (unrounded) |\n|---|---:|---:|---:|---:|\n",
    );
    for c in Coordinate::BOTH {
        let (Some(m), Some(p)) = (find_row(rows, Scheme::Median, c), find_row(rows, scheme, c)) else {
            continue;
        };
        let raw = p.mse_raw.map(|v| format!("{v:.4}")).unwrap_or_else(|| "-".into());
        let _ = writeln!(out, "| {} | {:.4} | {:.4} | {} | {raw} |", c.name(), m.mse, p.mse, pct(improvement(p.mse, m.mse)));
    }
    out
}

pub fn statistics_table(stats: &[(&str, MvStatistics)]) -> String {
    let mut out = String::from("| Set | Samples | Mean x | Std x | Mean y | Std y |\n|---|---:|---:|---:|---:|---:|\n");
    for (name, s) in stats {
        let _ = writeln!(
            out,
            "| {name} | {} | {:.4} | {:.4} | {:.4} | {:.4} |",
            s.count, s.mean_x, s.std_x, s.mean_y, s.std_y
        );
    }
    out
}

/// Residual histograms of every outcome as CSV.
pub fn histograms_csv(tables: &[(&str, &[SchemeOutcome])]) -> String {
    let mut out = String::from("table,scheme,coordinate,residual,count\n");
    for (name, outcomes) in tables {
        for o in outcomes.iter() {
            for c in Coordinate::BOTH {
                for (v, n) in o.histogram(c) {
                    let _ = writeln!(out, "{name},{},{},{v},{n}", o.scheme, c.name());
                }
            }
        }
    }
    out
}

// ---- aggregation ----------------------------------------------------------

/// Metrics of one (scheme, coordinate) pair across datasets.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    pub scheme: Scheme,
    pub coordinate: Coordinate,
    pub mse: MeanStd,
    pub entropy: MeanStd,
    pub bits: MeanStd,
    pub improvement_mse: Option<MeanStd>,
    pub improvement_entropy: Option<MeanStd>,
    pub improvement_bits: Option<MeanStd>,
    pub improvement_bits_flat: Option<MeanStd>,
}

/// Per-dataset comparison rows and their summary.
#[derive(Clone, Debug, PartialEq)]
pub struct AggregateTable {
    pub labels: Vec<String>,
    pub datasets: Vec<Vec<ComparisonRow>>,
    pub rows: Vec<AggregateRow>,
}

impl AggregateTable {
    pub fn row(&self, scheme: Scheme, coordinate: Coordinate) -> Option<&AggregateRow> {
        self.rows.iter().find(|r| r.scheme == scheme && r.coordinate == coordinate)
    }
}

pub fn aggregate(labels: Vec<String>, datasets: Vec<Vec<ComparisonRow>>) -> AggregateTable {
    let mut rows = Vec::new();
    for scheme in Scheme::ALL {
        for c in Coordinate::BOTH {
            let found: Vec<&ComparisonRow> = datasets.iter().filter_map(|d| find_row(d, scheme, c)).collect();
            if found.is_empty() {
                continue;
            }
            let of = |f: &dyn Fn(&ComparisonRow) -> f64| MeanStd::of(&found.iter().map(|r| f(r)).collect::<Vec<_>>());
            let imp = |f: &dyn Fn(&Improvement) -> f64| -> Option<MeanStd> {
                let values: Option<Vec<f64>> = found.iter().map(|r| r.improvement.as_ref().map(f)).collect();
                values.map(|v| MeanStd::of(&v))
            };
            rows.push(AggregateRow {
                scheme,
                coordinate: c,
                mse: of(&|r| r.mse),
                entropy: of(&|r| r.entropy),
                bits: of(&|r| r.bits as f64),
                improvement_mse: imp(&|i| i.mse),
                improvement_entropy: imp(&|i| i.entropy),
                improvement_bits: imp(&|i| i.bits),
                improvement_bits_flat: imp(&|i| i.bits_flat),
            });
        }
    }
    AggregateTable { labels, datasets, rows }
}

/// Per-dataset rows followed by an `Average ± Std Dev` row. Columns are
/// `MSE | Entropy | # Bits` for each scheme, one table per coordinate.
pub fn aggregate_markdown(table: &AggregateTable) -> String {
    let schemes: Vec<Scheme> = Scheme::ALL
        .into_iter()
        .filter(|s| table.row(*s, Coordinate::X).is_some())
        .collect();
    let mut out = String::new();
    for c in Coordinate::BOTH {
        let _ = writeln!(out, "### Δ{}\n", c.name());
        out.push_str("| Dataset |");
        for s in &schemes {
            let _ = write!(out, " {s} MSE | {s} Entropy | {s} # Bits |");
        }
        out.push_str("\n|---|");
        out.push_str(&"---:|".repeat(3 * schemes.len()));
        out.push('\n');
        for (label, rows) in table.labels.iter().zip(&table.datasets) {
            let _ = write!(out, "| {label} |");
            for s in &schemes {
                match find_row(rows, *s, c) {
                    Some(r) => {
                        let _ = write!(out, " {:.4} | {:.4} | {} |", r.mse, r.entropy, grouped(r.bits as f64));
                    }
                    None => out.push_str(" - | - | - |"),
                }
            }
            out.push('\n');
        }
        out.push_str("| Average ± Std Dev |");
        for s in &schemes {
            let r = table.row(*s, c).expect("scheme filtered above");
            let _ = write!(
                out,
                " {} | {} | {} ± {} |",
                mean_std_num(&r.mse, 4),
                mean_std_num(&r.entropy, 4),
                grouped(r.bits.mean),
                grouped(r.bits.std)
            );
        }
        out.push_str("\n\n");
    }

    out.push_str("### Improvement over the median\n\n");
    out.push_str("| Scheme | MSE x | Entropy x | # Bits x | Bits + signaling x | MSE y | Entropy y | # Bits y | Bits + signaling y |\n");
    out.push_str("|---|---:|---:|---:|---:|---:|---:|---:|---:|\n");
    for s in schemes.iter().filter(|s| **s != Scheme::Median) {
        let _ = write!(out, "| {s} |");
        for c in Coordinate::BOTH {
            let r = table.row(*s, c).expect("scheme filtered above");
            for m in [&r.improvement_mse, &r.improvement_entropy, &r.improvement_bits, &r.improvement_bits_flat] {
                let _ = write!(out, " {} |", m.as_ref().map(mean_std_pct).unwrap_or_else(|| "-".into()));
            }
        }
        out.push('\n');
    }
    out
}

pub const AGGREGATE_CSV_HEADER: &str = "scheme,coordinate,datasets,mse_mean,mse_std,entropy_mean,entropy_std,bits_mean,bits_std,\
improvement_mse_mean,improvement_mse_std,improvement_entropy_mean,improvement_entropy_std,improvement_bits_mean,improvement_bits_std,\
improvement_bits_flat_mean,improvement_bits_flat_std";

pub fn aggregate_csv(table: &AggregateTable) -> String {
    let mut out = String::from(AGGREGATE_CSV_HEADER);
    out.push('\n');
    let pair = |m: &Option<MeanStd>| match m {
        Some(m) => format!("{},{}", fixed(m.mean), fixed(m.std)),
        None => ",".into(),
    };
    for r in &table.rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.scheme,
            r.coordinate.name(),
            r.mse.n,
            fixed(r.mse.mean),
            fixed(r.mse.std),
            fixed(r.entropy.mean),
            fixed(r.entropy.std),
            fixed(r.bits.mean),
            fixed(r.bits.std),
            pair(&r.improvement_mse),
            pair(&r.improvement_entropy),
            pair(&r.improvement_bits),
            pair(&r.improvement_bits_flat),
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn outcome(scheme: Scheme, residuals: &[(i32, i32)], signals: Option<Signal>) -> SchemeOutcome {
        SchemeOutcome {
            scheme,
            residuals: residuals.iter().map(|&(dx, dy)| Residual { dx, dy }).collect(),
            signals: vec![(signals.unwrap_or(Signal::None), signals.unwrap_or(Signal::None)); residuals.len()],
            raw_errors: None,
        }
    }

    #[test]
    fn improvement_definition() {
        assert!((improvement(1.0, 4.0) - 0.75).abs() < 1e-15);
        assert_eq!(improvement(0.0, 0.0), 0.0);
        assert!(improvement(5.0, 4.0) < 0.0);
    }

    #[test]
    fn rows_compare_against_median() {
        let median = outcome(Scheme::Median, &[(2, 0), (0, 2), (-2, 0), (0, -2)], None);
        let best = outcome(Scheme::Best, &[(1, 0), (0, 1), (-1, 0), (0, -1)], Some(Signal::Lower));
        let rows = compare(&[median, best]).unwrap();
        assert_eq!(rows.len(), 4);
        let m = find_row(&rows, Scheme::Median, Coordinate::X).unwrap();
        assert_eq!(m.mse, 2.0);
        assert_eq!(m.signal_bits_flat, 0);
        let b = find_row(&rows, Scheme::Best, Coordinate::X).unwrap();
        assert_eq!(b.mse, 0.5);
        assert_eq!(b.signal_bits_flat, 8);
        assert!((b.improvement.unwrap().mse - 0.75).abs() < 1e-15);
        assert_eq!(b.total_bits(SignalingMode::Flat), b.bits + 8);
    }

    #[test]
    fn two_point_statistics() {
        let m = MeanStd::of(&[2.0, 4.0]);
        assert_eq!(m.mean, 3.0);
        assert!((m.std - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(MeanStd::of(&[5.0, 5.0, 5.0]).std, 0.0);
        assert_eq!(MeanStd::of(&[7.0]).std, 0.0);
    }

    #[test]
    fn aggregate_columns_follow_table_layout() {
        let a = compare(&[outcome(Scheme::Median, &[(2, 1), (1, 1)], None)]).unwrap();
        let b = compare(&[outcome(Scheme::Median, &[(3, 1), (1, 0)], None)]).unwrap();
        let t = aggregate(vec!["d1".into(), "d2".into()], vec![a, b]);
        let md = aggregate_markdown(&t);
        assert!(md.contains("| Dataset | median MSE | median Entropy | median # Bits |"), "{md}");
        assert!(md.contains("| Average ± Std Dev |"));
        assert_eq!(t.row(Scheme::Median, Coordinate::X).unwrap().mse.mean, (2.5 + 5.0) / 2.0);
    }

    #[test]
    fn thousands_grouping() {
        assert_eq!(grouped(202508.0), "202,508");
        assert_eq!(grouped(999.0), "999");
        assert_eq!(grouped(1000.0), "1,000");
        assert_eq!(grouped(-1234567.0), "-1,234,567");
    }
}
