//! Orbit statistics along `g_t h_s x` and `g_t r_θ x`: Birkhoff averages,
//! recurrence to compact sets, deviation sets on direction space and the
//! correlation-decay test.

mod birkhoff;
mod correlation;
mod deviation;
mod grid;
mod observable;
mod recurrence;

pub use birkhoff::{
    birkhoff_average_continuous, birkhoff_average_discrete, segment_average, BirkhoffEstimate,
};
pub use grid::{BadSetMask, DirectionGrid, MaskKind, MAX_GRID_INTERVALS};
pub use observable::{lattice_shape, ObservableF, Orbit, OrbitPoint, Ray, Shear};
pub use recurrence::{
    count_against, recurrence_hits, recurrence_mask, torus_cover_counts, torus_nonrecurrent_set,
    ExactCount, FlowMode, RecurrenceParams,
};
pub use correlation::{
    correlation_decay_test, CorrelationReport, CorrelationSample, MAX_CORRELATION_NODES,
};
pub use deviation::{
    deviation_b_mask, deviation_masks, inclusion_check, independence_diagnostic, recurrent_mask,
    zero_one_check, DeviationParams, InclusionReport, IndependenceReport, IndependenceRow,
    ZeroOneReport,
};
