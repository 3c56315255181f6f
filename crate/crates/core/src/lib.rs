//! Statevector quantum circuit simulation for desk-scale registers.
//!
//! Layers, bottom up: [`mathcore`] (dense complex matrices), [`quantumcore`]
//! (states, gates, registers, measurement), [`circuit`] (staged circuits and
//! stepping sessions), [`grover`] (search circuits and traces) and [`qdsl`]
//! (a small text format for circuits).
//!
//! Wire 0 is the most significant bit of a basis-state index, so `|100⟩` is
//! index 4.

pub mod circuit;
pub mod grover;
pub mod mathcore;
pub mod qdsl;
pub mod quantumcore;
pub mod state_json;

pub use circuit::{Circuit, CircuitError, ExecSession, Snapshot, StageOp};
pub use grover::{GroverSpec, GroverTrace};
pub use mathcore::{Complex, ComplexMatrix};
pub use quantumcore::{Gate, QuantumObject, StandardGate};
pub use state_json::StateJson;
