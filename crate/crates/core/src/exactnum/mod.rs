//! Exact arithmetic kernel: rationals, certified enclosures, lacunary series
//! truncation, and nearest-integer distances. Everything here is exact; the
//! only approximate numbers in the whole crate are the presentation-layer
//! logarithms in `exponents`.

mod handle;
mod interval;
mod lacunary;

pub use handle::{Precision, RealHandle};
pub use interval::{
    dist_enclosure, nearest_int_dist, power_enclosure, rat, rat_int, round_half_even, BigRat,
    DistEnclosure, Interval,
};
pub use lacunary::{ExponentRule, LacunarySpec, RatioLimit};
