//! Problem encoders and decoders.

pub mod gate;
pub mod queens;

pub use gate::{decode_gate, encode_gate, AllocationTable, Flight, Gate, GateError, GateInstance};
pub use queens::{decode_queens, encode_queens, QueensError, QueensInstance};
