use std::fmt::{Debug, Display};

use num_traits::{Num, NumCast};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Scalar type for distances and growth samples.
///
/// Integer types are exact; floating-point types compare with a small absolute
/// tolerance where the metric axioms are checked.
pub trait Scalar:
    Num + NumCast + PartialOrd + Copy + Debug + Display + Serialize + DeserializeOwned + Send + Sync + 'static
{
    /// Absolute tolerance for metric-axiom checks.
    fn tolerance() -> Self;

    fn from_u64(v: u64) -> Self {
        <Self as NumCast>::from(v).expect("value representable in scalar type")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    fn max_of(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }

    fn min_of(self, other: Self) -> Self {
        if other < self {
            other
        } else {
            self
        }
    }

    fn is_finite_value(self) -> bool {
        true
    }
}

macro_rules! exact_scalar {
    ($($t:ty),*) => {$(
        impl Scalar for $t {
            fn tolerance() -> Self {
                0
            }
        }
    )*};
}

exact_scalar!(u32, u64, i64);

impl Scalar for f64 {
    fn tolerance() -> Self {
        1e-9
    }

    fn is_finite_value(self) -> bool {
        self.is_finite()
    }
}

impl Scalar for f32 {
    fn tolerance() -> Self {
        1e-6
    }

    fn is_finite_value(self) -> bool {
        self.is_finite()
    }
}

/// `a` is less than or equal to `b` up to the type's tolerance.
pub(crate) fn le_tol<T: Scalar>(a: T, b: T) -> bool {
    a <= b + T::tolerance()
}

/// `|a - b|` is within the type's tolerance.
pub(crate) fn eq_tol<T: Scalar>(a: T, b: T) -> bool {
    le_tol(a, b) && le_tol(b, a)
}
