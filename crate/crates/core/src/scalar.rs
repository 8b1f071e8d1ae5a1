//! Scalar abstractions.
//!
//! [`Scalar`] is the ring the QUBO builders and exhaustive solvers work over.
//! It is implemented for `f32`, `f64` and for checked rationals, so the same
//! objective code can be evaluated exactly when a test needs bit-for-bit
//! equalities. [`Real`] adds the transcendental functions required by the
//! annealers, the statevector simulator and the Monte Carlo engine.

use std::fmt::{Debug, Display};

use num_rational::Ratio;
use num_traits::{Float, FloatConst, FromPrimitive, Num, NumAssign, Signed, ToPrimitive};

/// Coefficient type for binary quadratic models.
pub trait Scalar:
    Copy
    + Num
    + NumAssign
    + Signed
    + PartialOrd
    + FromPrimitive
    + ToPrimitive
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
    /// Arithmetic on this type is exact (no rounding).
    const EXACT: bool;

    fn is_finite_value(&self) -> bool;

    /// Text form that parses back to the identical value.
    fn to_exact_string(&self) -> String;

    fn parse_exact(s: &str) -> Option<Self>;

    fn from_count(n: usize) -> Self {
        <Self as FromPrimitive>::from_usize(n).expect("integer fits scalar")
    }

    fn from_f64_lossy(x: f64) -> Self {
        <Self as FromPrimitive>::from_f64(x).expect("finite value fits scalar")
    }

    fn as_f64(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    fn two() -> Self {
        Self::one() + Self::one()
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
}

/// Floating-point scalar.
pub trait Real: Scalar + Float + FloatConst {}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn is_finite_value(&self) -> bool {
        self.is_finite()
    }

    fn to_exact_string(&self) -> String {
        format!("{self:.16e}")
    }

    fn parse_exact(s: &str) -> Option<Self> {
        s.trim().parse().ok()
    }
}

impl Scalar for f32 {
    const EXACT: bool = false;

    fn is_finite_value(&self) -> bool {
        self.is_finite()
    }

    fn to_exact_string(&self) -> String {
        format!("{self:.16e}")
    }

    fn parse_exact(s: &str) -> Option<Self> {
        s.trim().parse().ok()
    }
}

impl Real for f64 {}
impl Real for f32 {}

macro_rules! rational_scalar {
    ($int:ty) => {
        impl Scalar for Ratio<$int> {
            const EXACT: bool = true;

            fn is_finite_value(&self) -> bool {
                true
            }

            fn to_exact_string(&self) -> String {
                if *self.denom() == 1 {
                    self.numer().to_string()
                } else {
                    format!("{}/{}", self.numer(), self.denom())
                }
            }

            fn parse_exact(s: &str) -> Option<Self> {
                let s = s.trim();
                match s.split_once('/') {
                    Some((n, d)) => {
                        let d: $int = d.trim().parse().ok()?;
                        if d == 0 {
                            return None;
                        }
                        Some(Ratio::new(n.trim().parse().ok()?, d))
                    }
                    None => s.parse().ok().map(Ratio::from_integer),
                }
            }
        }
    };
}

rational_scalar!(i64);
rational_scalar!(i128);
