//! Second-order Carleman embedding of the discretized NSHJ step.
//!
//! [`assemble_operators`] collects one explicit step into `A`, `B` and `F`;
//! [`lift`] builds `(J, J (x) J)` from a fluid state and [`C2Stepper`]
//! advances that pair as a linear system without ever forming `A (x) A`.

mod assemble;
mod lifted;
mod sparse;

pub use assemble::{assemble_operators, CarlemanOperators, CompositeIndex, FieldKind};
pub use lifted::{closure_defect, lift, readout, step_c2, C2State, C2Stepper};
pub use sparse::{BilinearEntry, BilinearTensor, CsrMatrix};
