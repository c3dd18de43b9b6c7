//! Scalar abstraction and small information-theoretic helpers.
//!
//! All flow and codelength arithmetic is generic over [`Real`], an aggregate
//! trait satisfied by `f32` and `f64`. The crate root exports concrete type
//! aliases so downstream code can ignore the parameter entirely.

use std::fmt::{Debug, Display};
use std::iter::Sum;

/// Floating-point scalar used for flows, codelengths, and scores.
///
/// Implemented for `f32` and `f64`. The bound set is intentionally small:
/// arithmetic, logarithms, conversions, and thread-safety markers required by
/// the parallel pipelines.
pub trait Real:
    num_traits::Float
    + num_traits::FromPrimitive
    + num_traits::ToPrimitive
    + Sum<Self>
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
}

impl Real for f32 {}
impl Real for f64 {}

/// Converts an `f64` constant into the working scalar type.
///
/// Panics only if the value is not representable at all, which cannot happen
/// for the finite constants used in this crate.
#[inline]
pub fn real<R: Real>(x: f64) -> R {
    R::from_f64(x).expect("finite constant must convert to the scalar type")
}

/// Converts a count into the working scalar type.
#[inline]
pub fn real_of_usize<R: Real>(n: usize) -> R {
    R::from_usize(n).expect("count must convert to the scalar type")
}

/// `x * log2(x)` with the continuity convention `0 log 0 = 0`.
#[inline]
pub fn plogp<R: Real>(x: R) -> R {
    if x > R::zero() {
        x * x.log2()
    } else {
        R::zero()
    }
}

/// Shannon entropy in bits of `rates` normalized by `total`.
///
/// Zero entries are skipped; a zero or empty total yields zero entropy.
pub fn entropy_normalized<R: Real>(rates: impl IntoIterator<Item = R>, total: R) -> R {
    if total <= R::zero() {
        return R::zero();
    }
    let mut h = R::zero();
    for r in rates {
        if r > R::zero() {
            let s = r / total;
            h = h - s * s.log2();
        }
    }
    h
}

/// SplitMix64 step; decorrelates derived RNG seeds.
#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derives an independent stream seed from a base seed and two indices.
///
/// Used wherever work items (optimizer runs, epidemic repetitions, rewiring
/// repeats) must draw from decorrelated, order-independent RNG streams so that
/// parallel execution stays bit-reproducible.
#[inline]
pub fn derive_seed(base: u64, a: u64, b: u64) -> u64 {
    splitmix64(splitmix64(base ^ a.rotate_left(17)) ^ b.rotate_left(43))
}
