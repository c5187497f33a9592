use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ValueKind {
    Real,
    Count,
}

/// An ordered sample `Z_1, ..., Z_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    values: Vec<f64>,
    kind: ValueKind,
}

impl TimeSeries {
    pub fn real(values: Vec<f64>) -> Result<Self> {
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::param(format!("observation {i} is not finite")));
        }
        Ok(Self {
            values,
            kind: ValueKind::Real,
        })
    }

    pub fn counts(values: Vec<u64>) -> Self {
        Self {
            values: values.into_iter().map(|v| v as f64).collect(),
            kind: ValueKind::Count,
        }
    }

    /// Real-valued observations that must all be nonnegative integers.
    pub fn counts_from_f64(values: Vec<f64>) -> Result<Self> {
        if let Some(i) = values
            .iter()
            .position(|v| !(v.is_finite() && *v >= 0.0 && v.fract() == 0.0))
        {
            return Err(Error::param(format!(
                "observation {i} = {} is not a nonnegative integer",
                values[i]
            )));
        }
        Ok(Self {
            values,
            kind: ValueKind::Count,
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn kind(&self) -> ValueKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.values.windows(2).all(|w| w[0] == w[1])
    }

    /// The contiguous block `Z_start, ..., Z_{start+len-1}` (0-based start).
    pub fn block(&self, start: usize, len: usize) -> TimeSeries {
        TimeSeries {
            values: self.values[start..start + len].to_vec(),
            kind: self.kind,
        }
    }

    pub fn head(&self, len: usize) -> TimeSeries {
        self.block(0, len.min(self.len()))
    }
}
