pub mod analysis;
pub mod dot;
pub mod flatten;
pub mod format;
pub mod model;
pub mod oracle;
pub mod rational;
pub mod semantics;
pub mod zone;
