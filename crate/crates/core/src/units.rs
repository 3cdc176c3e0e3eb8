//! Thin SI newtypes for the physical-units boundary of the crate.
//!
//! Operator algebra is dimensionless (ħ = 1). Values leave or enter that
//! world only through these wrappers.

use std::fmt;

use serde::{Deserialize, Serialize};

macro_rules! si_unit {
    ($(#[$doc:meta])* $name:ident, $sym:expr) => {
        $(#[$doc])*
        #[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Default, Serialize, Deserialize)]
        #[serde(transparent)]
        pub struct $name(pub f64);

        impl $name {
            pub const SYMBOL: &'static str = $sym;

            pub fn value(self) -> f64 {
                self.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "{:.6e} {}", self.0, $sym)
            }
        }

        impl std::ops::Mul<f64> for $name {
            type Output = Self;
            fn mul(self, rhs: f64) -> Self {
                Self(self.0 * rhs)
            }
        }
    };
}

si_unit!(/// Energy.
    Joules, "J");
si_unit!(/// Ordinary frequency.
    Hertz, "Hz");
si_unit!(/// Angular frequency.
    RadPerSec, "rad/s");
si_unit!(Kilograms, "kg");
si_unit!(Meters, "m");
si_unit!(Seconds, "s");
si_unit!(Tesla, "T");
si_unit!(/// Magnetic moment.
    JoulesPerTesla, "J/T");
si_unit!(/// Linear momentum.
    Momentum, "kg·m/s");
