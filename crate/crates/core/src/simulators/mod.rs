//! Seeded signal generators.
//!
//! Every generator is a pure function of its configuration and seed. Random
//! streams are ChaCha8 generators keyed by [`rng::derive_seed`], so trials
//! can be produced in any order or in parallel with identical results.

pub mod background;
pub mod lorenz;
pub mod modulation;
pub mod rng;
pub mod synthetic;

pub use background::{awgn_sigma, interference_background, make_injection_record, InterferenceLayout};
pub use lorenz::{lorenz_x, LorenzConfig};
pub use modulation::{modulate, ModulationFormat, RfSimConfig};
pub use synthetic::{abs_sine_insert, random_abs_sine_insert, sine_record, SineConfig};
