use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Scores of one run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct RunMetrics {
    pub accuracy: f64,
    pub precision_weighted: f64,
    pub recall_weighted: f64,
    pub f1_weighted: f64,
    pub f1_macro: f64,
}

impl RunMetrics {
    fn fields(&self) -> [f64; 5] {
        [
            self.accuracy,
            self.precision_weighted,
            self.recall_weighted,
            self.f1_weighted,
            self.f1_macro,
        ]
    }

    fn from_fields(f: [f64; 5]) -> Self {
        RunMetrics {
            accuracy: f[0],
            precision_weighted: f[1],
            recall_weighted: f[2],
            f1_weighted: f[3],
            f1_macro: f[4],
        }
    }
}

/// Mean over runs with per-metric population standard deviation.
///
/// Timings are wall-clock and vary between invocations, so they are left
/// out of the serialized form; run manifests carry them instead.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub accuracy: f64,
    pub precision_weighted: f64,
    pub recall_weighted: f64,
    pub f1_weighted: f64,
    pub f1_macro: f64,
    pub per_run: Vec<RunMetrics>,
    pub std_dev: RunMetrics,
    #[serde(skip)]
    pub train_time_s: f64,
    #[serde(skip)]
    pub predict_time_s: f64,
}

impl MetricsReport {
    pub fn aggregate(per_run: Vec<RunMetrics>) -> Result<Self> {
        if per_run.is_empty() {
            return Err(Error::invalid("no runs to aggregate"));
        }
        let n = per_run.len() as f64;
        let mut mean = [0.0; 5];
        for r in &per_run {
            for (m, x) in mean.iter_mut().zip(r.fields()) {
                *m += x;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n);
        let mut var = [0.0; 5];
        for r in &per_run {
            for ((v, m), x) in var.iter_mut().zip(mean).zip(r.fields()) {
                *v += (x - m) * (x - m);
            }
        }
        let std = var.map(|v| (v / n).sqrt());
        let mean = RunMetrics::from_fields(mean);
        Ok(MetricsReport {
            accuracy: mean.accuracy,
            precision_weighted: mean.precision_weighted,
            recall_weighted: mean.recall_weighted,
            f1_weighted: mean.f1_weighted,
            f1_macro: mean.f1_macro,
            per_run,
            std_dev: RunMetrics::from_fields(std),
            train_time_s: 0.0,
            predict_time_s: 0.0,
        })
    }

    pub fn mean(&self) -> RunMetrics {
        RunMetrics {
            accuracy: self.accuracy,
            precision_weighted: self.precision_weighted,
            recall_weighted: self.recall_weighted,
            f1_weighted: self.f1_weighted,
            f1_macro: self.f1_macro,
        }
    }
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Accuracy plus support-weighted precision/recall/F1 and macro F1 over
/// label indices `0..n_labels`. Any 0/0 is taken as 0, and labels absent
/// from `truth` still count in the macro mean.
pub fn compute_metrics(truth: &[usize], predicted: &[usize], n_labels: usize) -> Result<RunMetrics> {
    if truth.len() != predicted.len() {
        return Err(Error::invalid(format!(
            "{} true labels but {} predictions",
            truth.len(),
            predicted.len()
        )));
    }
    if truth.is_empty() {
        return Err(Error::invalid("cannot score an empty prediction set"));
    }
    if let Some(&bad) = truth.iter().chain(predicted).find(|&&l| l >= n_labels) {
        return Err(Error::invalid(format!("label index {bad} outside label set of {n_labels}")));
    }

    let mut tp = vec![0usize; n_labels];
    let mut predicted_as = vec![0usize; n_labels];
    let mut support = vec![0usize; n_labels];
    for (&t, &p) in truth.iter().zip(predicted) {
        support[t] += 1;
        predicted_as[p] += 1;
        if t == p {
            tp[t] += 1;
        }
    }

    let total = truth.len() as f64;
    let mut out = RunMetrics {
        accuracy: tp.iter().sum::<usize>() as f64 / total,
        ..Default::default()
    };
    for c in 0..n_labels {
        let precision = ratio(tp[c], predicted_as[c]);
        let recall = ratio(tp[c], support[c]);
        let f1 = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        let w = support[c] as f64 / total;
        out.precision_weighted += w * precision;
        out.recall_weighted += w * recall;
        out.f1_weighted += w * f1;
        out.f1_macro += f1;
    }
    out.f1_macro /= n_labels as f64;
    Ok(out)
}
