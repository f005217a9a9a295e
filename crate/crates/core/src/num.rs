//! Scalar abstraction so the numeric core runs at `f32` or `f64`.
//!
//! The data model keeps weights as `f64`; everything downstream of the
//! scoring layer (embeddings, training, ranking) is generic over [`Scalar`],
//! with concrete aliases exported at the crate root.

use std::fmt::Display;
use std::iter::Sum;
use std::str::FromStr;

use num_traits::Float;
use rand::distributions::uniform::SampleUniform;
use rustfft::FftNum;

/// Floating-point scalar the embedding and evaluation math is generic over.
///
/// `FftNum` brings `Copy + Send + Sync + FromPrimitive + Signed + Debug`,
/// `SampleUniform` allows seeded uniform draws, `FromStr`/`Display` are used
/// by the checkpoint format.
pub trait Scalar: Float + FftNum + SampleUniform + Sum + Display + FromStr {}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Converts an `f64` constant into the scalar type (exact for `f64`).
#[inline]
pub fn scalar<S: Scalar>(v: f64) -> S {
    <S as num_traits::FromPrimitive>::from_f64(v).expect("f64 converts to scalar")
}

/// Widens a scalar back to `f64` for reporting.
#[inline]
pub fn to_f64<S: Scalar>(v: S) -> f64 {
    num_traits::ToPrimitive::to_f64(&v).expect("scalar converts to f64")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips_through_f64() {
        let x: f32 = scalar(0.25);
        assert_eq!(x, 0.25f32);
        assert_eq!(to_f64(x), 0.25);
        let y: f64 = scalar(0.1);
        assert_eq!(y, 0.1);
    }
}
