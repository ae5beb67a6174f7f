//! Direct annealed simulation of the walk, the convergence rate of the
//! truncated expansion, and the kernel-decay experiment.

pub mod annealed;
pub mod decay;
pub mod scaling;

pub use annealed::{annealed_speed, first_step_counts, SimEstimate};
pub use decay::{lemma4_decay, lemma4_decay_parity, DecayRow, DecayTable};
pub use scaling::{drift_direction, order_scaling, ScalingReport, ScalingRow, SpeedReference};
