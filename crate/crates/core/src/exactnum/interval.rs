use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// Exact rational scalar used throughout the kernel. Always reduced, positive
/// denominator (maintained by the backing type's constructors).
pub type BigRat = num_rational::BigRational;

pub fn rat(n: i64, d: i64) -> BigRat {
    BigRat::new(BigInt::from(n), BigInt::from(d))
}

pub fn rat_int(n: i64) -> BigRat {
    BigRat::from_integer(BigInt::from(n))
}

/// Nearest integer with ties broken toward the even neighbor.
pub fn round_half_even(r: &BigRat) -> BigInt {
    let f = r.floor().to_integer();
    let frac = r - BigRat::from_integer(f.clone());
    let half = rat(1, 2);
    if frac < half {
        f
    } else if frac > half {
        f + 1
    } else {
        // tie: pick the even neighbor of {f, f+1}
        if (&f % 2u8).is_zero() {
            f
        } else {
            f + 1
        }
    }
}

/// Distance to the nearest integer, ‖r‖ ∈ [0, 1/2]. Exact.
pub fn nearest_int_dist(r: &BigRat) -> BigRat {
    let f = r.floor().to_integer();
    let frac = r - BigRat::from_integer(f);
    let up = BigRat::one() - frac.clone();
    if frac <= up {
        frac
    } else {
        up
    }
}

/// Closed interval [lo, hi] with exact rational endpoints. The enclosure
/// contract: every operation returns an interval containing the image of its
/// inputs (no rounding anywhere).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Interval {
    lo: BigRat,
    hi: BigRat,
}

impl Interval {
    pub fn new(lo: BigRat, hi: BigRat) -> Self {
        assert!(lo <= hi, "interval endpoints out of order");
        Interval { lo, hi }
    }

    pub fn point(v: BigRat) -> Self {
        Interval {
            lo: v.clone(),
            hi: v,
        }
    }

    pub fn lo(&self) -> &BigRat {
        &self.lo
    }

    pub fn hi(&self) -> &BigRat {
        &self.hi
    }

    pub fn width(&self) -> BigRat {
        &self.hi - &self.lo
    }

    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }

    pub fn contains(&self, r: &BigRat) -> bool {
        &self.lo <= r && r <= &self.hi
    }

    pub fn contains_interval(&self, other: &Interval) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    pub fn midpoint(&self) -> BigRat {
        (&self.lo + &self.hi) / rat_int(2)
    }

    pub fn add(&self, other: &Interval) -> Interval {
        Interval::new(&self.lo + &other.lo, &self.hi + &other.hi)
    }

    pub fn neg(&self) -> Interval {
        Interval::new(-self.hi.clone(), -self.lo.clone())
    }

    pub fn scale_int(&self, n: &BigInt) -> Interval {
        let s = BigRat::from_integer(n.clone());
        if n.is_negative() {
            Interval::new(&self.hi * &s, &self.lo * &s)
        } else {
            Interval::new(&self.lo * &s, &self.hi * &s)
        }
    }

    pub fn mul(&self, other: &Interval) -> Interval {
        let cands = [
            &self.lo * &other.lo,
            &self.lo * &other.hi,
            &self.hi * &other.lo,
            &self.hi * &other.hi,
        ];
        let mut lo = cands[0].clone();
        let mut hi = cands[0].clone();
        for c in &cands[1..] {
            if c < &lo {
                lo = c.clone();
            }
            if c > &hi {
                hi = c.clone();
            }
        }
        Interval::new(lo, hi)
    }

    /// True iff every point of self is strictly below every point of other.
    pub fn strictly_below(&self, other: &Interval) -> bool {
        self.hi < other.lo
    }
}

/// Enclosure of xʲ over x ∈ I. Exact and monotone on I ⊆ [0, ∞); the general
/// case distinguishes signs of the endpoints.
pub fn power_enclosure(i: &Interval, j: u32) -> Interval {
    if j == 0 {
        return Interval::point(BigRat::one());
    }
    if j == 1 {
        return i.clone();
    }
    let pl = pow_rat(&i.lo, j);
    let ph = pow_rat(&i.hi, j);
    if j % 2 == 1 || !i.lo.is_negative() {
        // odd powers are monotone; even powers are monotone on [0, ∞)
        Interval::new(pl, ph)
    } else if !i.hi.is_positive() {
        // even power on (-∞, 0]: decreasing
        Interval::new(ph, pl)
    } else {
        // even power across 0: minimum 0
        Interval::new(BigRat::zero(), pl.max(ph))
    }
}

fn pow_rat(r: &BigRat, j: u32) -> BigRat {
    let mut acc = BigRat::one();
    for _ in 0..j {
        acc *= r;
    }
    acc
}

/// Certified nearest-integer distance over an interval.
#[derive(Clone, Debug)]
pub struct DistEnclosure {
    /// Encloses ‖x‖ for every x ∈ I.
    pub dist: Interval,
    /// The nearest integer, when it is the same for every point of I.
    pub nearest: Option<BigInt>,
    /// Set when I contains a half-integer: the distance sup is 1/2 and the
    /// nearest integer is not determined by the enclosure.
    pub straddle: bool,
}

/// Encloses ‖x‖ over x ∈ I. Requires width(I) < 1/2; a wider interval cannot
/// pin the distance at all and errors as ambiguous.
pub fn dist_enclosure(i: &Interval) -> Result<DistEnclosure> {
    let half = rat(1, 2);
    if i.is_point() {
        let m = round_half_even(&i.lo);
        let d = nearest_int_dist(&i.lo);
        return Ok(DistEnclosure {
            dist: Interval::point(d),
            nearest: Some(m),
            straddle: false,
        });
    }
    if i.width() >= half {
        return Err(Error::AmbiguousDistance(
            "enclosure width is at least 1/2".into(),
        ));
    }
    let m_lo = round_half_even(&i.lo);
    let boundary = BigRat::from_integer(m_lo.clone()) + &half;
    if i.hi < boundary && *i.lo() > &BigRat::from_integer(m_lo.clone()) - &half {
        // single nearest integer m_lo for the whole interval, no boundary touch
        let m = BigRat::from_integer(m_lo.clone());
        let dist = if i.hi <= m {
            Interval::new(&m - &i.hi, &m - &i.lo)
        } else if i.lo >= m {
            Interval::new(&i.lo - &m, &i.hi - &m)
        } else {
            let dl = &m - &i.lo;
            let dh = &i.hi - &m;
            Interval::new(BigRat::zero(), dl.max(dh))
        };
        return Ok(DistEnclosure {
            dist,
            nearest: Some(m_lo),
            straddle: false,
        });
    }
    // I contains a half-integer (possibly at an endpoint): sup distance is 1/2.
    let d_lo = nearest_int_dist(&i.lo);
    let d_hi = nearest_int_dist(&i.hi);
    Ok(DistEnclosure {
        dist: Interval::new(d_lo.min(d_hi), half),
        nearest: None,
        straddle: true,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_half_even_ties() {
        assert_eq!(round_half_even(&rat(1, 2)), BigInt::from(0));
        assert_eq!(round_half_even(&rat(3, 2)), BigInt::from(2));
        assert_eq!(round_half_even(&rat(5, 2)), BigInt::from(2));
        assert_eq!(round_half_even(&rat(-1, 2)), BigInt::from(0));
        assert_eq!(round_half_even(&rat(-3, 2)), BigInt::from(-2));
        assert_eq!(round_half_even(&rat(7, 3)), BigInt::from(2));
    }

    #[test]
    fn dist_basics() {
        assert_eq!(nearest_int_dist(&rat(1, 2)), rat(1, 2));
        assert_eq!(nearest_int_dist(&rat(7, 3)), rat(1, 3));
        assert_eq!(nearest_int_dist(&rat(-7, 3)), rat(1, 3));
        assert_eq!(nearest_int_dist(&rat_int(4)), rat_int(0));
    }

    #[test]
    fn dist_enclosure_single_integer() {
        let i = Interval::new(rat(9, 10), rat(11, 10));
        let d = dist_enclosure(&i).unwrap();
        assert_eq!(d.nearest, Some(BigInt::from(1)));
        assert!(!d.straddle);
        assert_eq!(d.dist.lo(), &rat_int(0));
        assert_eq!(d.dist.hi(), &rat(1, 10));
    }

    #[test]
    fn dist_enclosure_straddles_half() {
        let i = Interval::new(rat(2, 5), rat(3, 5));
        let d = dist_enclosure(&i).unwrap();
        assert!(d.straddle);
        assert_eq!(d.nearest, None);
        assert_eq!(d.dist.hi(), &rat(1, 2));
        assert_eq!(d.dist.lo(), &rat(2, 5));
    }

    #[test]
    fn dist_enclosure_too_wide() {
        let i = Interval::new(rat(0, 1), rat(1, 2));
        assert!(matches!(
            dist_enclosure(&i),
            Err(Error::AmbiguousDistance(_))
        ));
    }

    #[test]
    fn power_enclosure_signs() {
        let i = Interval::new(rat(-2, 1), rat(3, 1));
        let p = power_enclosure(&i, 2);
        assert_eq!(p.lo(), &rat_int(0));
        assert_eq!(p.hi(), &rat_int(9));
        let n = Interval::new(rat(-3, 1), rat(-2, 1));
        let p2 = power_enclosure(&n, 2);
        assert_eq!(p2.lo(), &rat_int(4));
        assert_eq!(p2.hi(), &rat_int(9));
        let p3 = power_enclosure(&n, 3);
        assert_eq!(p3.lo(), &rat_int(-27));
        assert_eq!(p3.hi(), &rat_int(-8));
    }
}
