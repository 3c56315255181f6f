//! `{"qubits": n, "amplitudes": [[re, im], ...]}` interchange format.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::mathcore::Complex;

#[derive(Debug, Error)]
pub enum StateJsonError {
    #[error("malformed state JSON: {0}")]
    Syntax(#[from] serde_json::Error),
    #[error("state has no amplitudes")]
    Empty,
    #[error("{qubits} qubits need {expected} amplitudes, found {found}")]
    Length {
        qubits: usize,
        expected: String,
        found: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateJson {
    pub qubits: usize,
    pub amplitudes: Vec<[f64; 2]>,
}

impl StateJson {
    /// Panics unless `amps.len()` is a power of two.
    pub fn from_amplitudes(amps: &[Complex]) -> Self {
        assert!(amps.len().is_power_of_two(), "amplitude count must be 2^n");
        Self {
            qubits: amps.len().trailing_zeros() as usize,
            amplitudes: amps.iter().map(|z| [z.re, z.im]).collect(),
        }
    }

    pub fn validate(&self) -> Result<(), StateJsonError> {
        if self.amplitudes.is_empty() {
            return Err(StateJsonError::Empty);
        }
        let expected = u32::try_from(self.qubits)
            .ok()
            .and_then(|q| 1usize.checked_shl(q));
        if expected != Some(self.amplitudes.len()) {
            return Err(StateJsonError::Length {
                qubits: self.qubits,
                expected: expected.map_or_else(|| format!("2^{}", self.qubits), |e| e.to_string()),
                found: self.amplitudes.len(),
            });
        }
        Ok(())
    }

    pub fn amplitudes(&self) -> Vec<Complex> {
        self.amplitudes
            .iter()
            .map(|&[re, im]| Complex::new(re, im))
            .collect()
    }

    pub fn parse(text: &str) -> Result<Self, StateJsonError> {
        let state: StateJson = serde_json::from_str(text)?;
        state.validate()?;
        Ok(state)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("finite floats serialize")
    }
}
