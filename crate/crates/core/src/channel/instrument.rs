use alloc::format;
use alloc::vec::Vec;

use super::{ChoiChannel, ChoiDims, PREDICATE_TOL};
use crate::{Error, Result};

/// Elements with a Choi trace below this are treated as the zero map.
pub(crate) const ZERO_TRACE: f64 = 1e-12;

/// A finite family of completely positive maps summing to a
/// trace-preserving map.
#[derive(Clone, Debug, PartialEq)]
pub struct Instrument {
    elements: Vec<ChoiChannel>,
}

impl Instrument {
    /// Validates the family. Zero elements are dropped first.
    pub fn new(elements: Vec<ChoiChannel>) -> Result<Self> {
        let dims = elements
            .first()
            .map(|e| e.dims())
            .ok_or_else(|| Error::InvalidInstrument("no elements".into()))?;
        if let Some(bad) = elements.iter().find(|e| e.dims() != dims) {
            return Err(Error::InvalidInstrument(format!(
                "element dims {:?} differ from {dims:?}",
                bad.dims()
            )));
        }
        let elements: Vec<ChoiChannel> = elements
            .into_iter()
            .filter(|e| e.choi().trace().re.abs() >= ZERO_TRACE || e.choi().max_abs() >= ZERO_TRACE)
            .collect();
        if elements.is_empty() {
            return Err(Error::InvalidInstrument("all elements are zero".into()));
        }
        for (k, e) in elements.iter().enumerate() {
            if !e.is_cp(PREDICATE_TOL) {
                return Err(Error::InvalidInstrument(format!(
                    "element {k} is not completely positive"
                )));
            }
        }
        let inst = Self { elements };
        if !inst.sum().is_tp(PREDICATE_TOL) {
            return Err(Error::InvalidInstrument(
                "elements do not sum to a trace-preserving map".into(),
            ));
        }
        Ok(inst)
    }

    pub fn elements(&self) -> &[ChoiChannel] {
        &self.elements
    }

    pub fn dims(&self) -> ChoiDims {
        self.elements[0].dims()
    }

    /// The channel obtained by discarding the outcome.
    pub fn sum(&self) -> ChoiChannel {
        let terms: Vec<(f64, &ChoiChannel)> = self.elements.iter().map(|e| (1.0, e)).collect();
        ChoiChannel::linear_combination(&terms).expect("equal dims")
    }
}
