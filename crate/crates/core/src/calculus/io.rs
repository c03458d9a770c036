use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::{CalculusError, CumulativeProcess, CurveShape, ServiceCurve, TrafficEnvelope};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurveKind {
    ServiceCurve,
    /// Min-plus identity service curve; carries no breakpoints.
    Identity,
    CumulativeProcess,
    TrafficEnvelope,
}

/// JSON form shared by curves, processes and envelopes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveDocument {
    pub kind: CurveKind,
    #[serde(default)]
    pub epsilon: f64,
    #[serde(default)]
    pub breakpoints: Vec<(f64, f64)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rate_grid: Option<Vec<f64>>,
}

impl From<ServiceCurve> for CurveDocument {
    fn from(s: ServiceCurve) -> Self {
        let (kind, breakpoints) = match s.shape {
            CurveShape::Function(f) => (CurveKind::ServiceCurve, f.into()),
            CurveShape::Identity => (CurveKind::Identity, Vec::new()),
        };
        Self {
            kind,
            epsilon: s.epsilon,
            breakpoints,
            rate_grid: s.rate_grid,
        }
    }
}

impl TryFrom<CurveDocument> for ServiceCurve {
    type Error = CalculusError;

    fn try_from(doc: CurveDocument) -> Result<Self, Self::Error> {
        let mut curve = match doc.kind {
            CurveKind::ServiceCurve => ServiceCurve::new(doc.breakpoints, doc.epsilon)?,
            CurveKind::Identity => ServiceCurve::identity(),
            other => {
                return Err(CalculusError::InvalidInput(format!(
                    "expected a service curve document, found {other:?}"
                )))
            }
        };
        curve.epsilon = doc.epsilon;
        curve.rate_grid = doc.rate_grid;
        Ok(curve)
    }
}

impl From<&CumulativeProcess> for CurveDocument {
    fn from(a: &CumulativeProcess) -> Self {
        Self {
            kind: CurveKind::CumulativeProcess,
            epsilon: 0.0,
            breakpoints: a.breakpoints().to_vec(),
            rate_grid: None,
        }
    }
}

impl From<&TrafficEnvelope> for CurveDocument {
    fn from(e: &TrafficEnvelope) -> Self {
        Self {
            kind: CurveKind::TrafficEnvelope,
            epsilon: 0.0,
            breakpoints: e.breakpoints().to_vec(),
            rate_grid: None,
        }
    }
}

impl CurveDocument {
    pub fn into_process(self) -> Result<CumulativeProcess, CalculusError> {
        match self.kind {
            CurveKind::CumulativeProcess => CumulativeProcess::new(self.breakpoints),
            other => Err(CalculusError::InvalidInput(format!(
                "expected a cumulative process document, found {other:?}"
            ))),
        }
    }

    pub fn into_envelope(self) -> Result<TrafficEnvelope, CalculusError> {
        match self.kind {
            CurveKind::TrafficEnvelope => TrafficEnvelope::new(self.breakpoints),
            other => Err(CalculusError::InvalidInput(format!(
                "expected a traffic envelope document, found {other:?}"
            ))),
        }
    }
}

/// Writes `(t, v)` rows under the given two-column header.
pub fn write_two_column_csv<W: Write>(
    out: W,
    header: [&str; 2],
    rows: &[(f64, f64)],
) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header)?;
    for &(t, v) in rows {
        w.serialize((t, v))?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a headed two-column numeric CSV such as `t_seconds,value_bits`.
pub fn read_two_column_csv<R: Read>(input: R) -> Result<Vec<(f64, f64)>, csv::Error> {
    let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    r.deserialize().collect()
}
