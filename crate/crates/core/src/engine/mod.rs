//! State vectors, collective rotations, Krylov propagation and the drive protocol.

mod kernel;
mod krylov;
mod protocol;
mod state;

pub use kernel::CompiledOperator;
pub use krylov::{evolve_step, KrylovOptions, Propagator, NORM_DRIFT_LIMIT};
pub use protocol::{
    prepare_state, run_protocol, run_protocol_from, run_protocol_until, CycleMean, DriveProtocol, HamiltonianChoice, InitialState,
    MeasureSchedule, Record, TimeSeries, CODE_VERSION,
};
pub use state::{apply_collective_rotation, measure_magnetization, rotation_gate, Direction, StateVector, MAX_SITES};
