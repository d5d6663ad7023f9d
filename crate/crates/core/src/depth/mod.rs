//! Depth-map geometric error and the external scorer hook.

mod dnose;
mod external;

pub use dnose::{ndse, CameraConfig, DnoseProfile};
pub use external::{ExternalScorer, DEFAULT_EXTERNAL_TIMEOUT};
