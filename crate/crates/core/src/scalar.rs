//! Scalar abstraction shared by every numeric routine in the crate.
//!
//! Strategies, positions, payoffs and all derived metrics are stored as a
//! [`Real`], which is implemented for `f32` and `f64`.

use std::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive, NumAssign, ToPrimitive};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Floating point type usable as the simulation scalar.
pub trait Real:
    Float
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + Serialize
    + DeserializeOwned
    + 'static
{
    /// Uniform draw on `[0, 1)`.
    fn sample_unit<R: Rng + ?Sized>(rng: &mut R) -> Self;

    /// Standard normal draw.
    fn sample_standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self;

    /// Converts an `f64` constant. Panics only if the value is unrepresentable,
    /// which cannot happen for `f32`/`f64` and finite literals.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

macro_rules! impl_real {
    ($t:ty) => {
        impl Real for $t {
            #[inline]
            fn sample_unit<R: Rng + ?Sized>(rng: &mut R) -> Self {
                rng.random::<$t>()
            }

            #[inline]
            fn sample_standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
                StandardNormal.sample(rng)
            }
        }
    };
}

impl_real!(f32);
impl_real!(f64);

/// Clamps `x` into `[0, 1]`. NaN maps to 0.
#[inline]
pub fn clamp_unit<T: Real>(x: T) -> T {
    if x.is_nan() {
        T::zero()
    } else {
        x.max(T::zero()).min(T::one())
    }
}

#[inline]
pub(crate) fn is_probability<T: Real>(x: T) -> bool {
    x >= T::zero() && x <= T::one()
}
