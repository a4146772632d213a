mod geometry;
mod kick_phase;
mod sweep;

pub use geometry::*;
pub use kick_phase::*;
pub use sweep::*;
