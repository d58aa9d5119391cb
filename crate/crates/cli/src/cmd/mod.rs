pub mod decay;
pub mod device;
pub mod eps;
pub mod verify;

use crate::config::Resolver;
use crate::output::OutDir;

/// State shared by every subcommand.
pub struct Context {
    pub resolver: Resolver,
    pub out: OutDir,
    pub tolerance: Option<f64>,
}
