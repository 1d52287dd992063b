//! Numerical convex analysis on epigraph domains.
//!
//! Grid functions with `+∞` values, discrete Legendre transforms, infimal convolution
//! and the Hopf–Lax operator, Borell–Brascamp–Lieb gap checks, and the sharp trace
//! Gagliardo–Nirenberg constants on cones and convex epigraphs.

pub mod bblcheck;
pub mod cli;
pub mod error;
pub mod extgrid;
pub mod field;
pub mod fixtures;
pub mod hopflax;
pub mod optim;
pub mod params;
pub mod quad;
pub mod sharpconst;
pub mod transforms;

pub use error::{Error, Result};
pub use extgrid::{grid_integral, DomainSpec, EpigraphDomain, ExtGridFn, ExtValue, GridSpec, PhiKind};
pub use field::{Cost, Field};
pub use params::BblParams;
pub use transforms::NormSpec;

use std::path::Path;

/// Write to `path.tmp` then rename over `path`.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir)?;
        }
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    std::fs::write(&tmp, bytes)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}
