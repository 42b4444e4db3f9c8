//! Scalar abstraction for the numeric kernels.
//!
//! Everything float-valued in this crate is generic over [`Real`] so the
//! same code runs on `f32` and `f64`. The crate-root aliases fix `f64`,
//! which is what the command-line tool and the certification run use.

use std::fmt;

use num_traits::{Float, FromPrimitive};

/// Floating-point scalar: `f32` or `f64`.
pub trait Real:
    Float + FromPrimitive + fmt::Debug + fmt::Display + Send + Sync + 'static
{
    /// Converts an `f64` constant (tolerances, grid steps, literals).
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("constant not representable")
    }

    /// Lossy view as `f64`, for diagnostics and error payloads.
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}
