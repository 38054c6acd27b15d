use std::collections::BTreeMap;
use std::sync::{Arc, Mutex};

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::exactnum::interval::{BigRat, Interval};
use crate::exactnum::lacunary::LacunarySpec;

/// Depth/size limits for certified truncation. `max_depth` caps how many
/// series terms an auto-deepening loop may request; `max_term_bits` caps the
/// bit length of any materialized power b^aₙ.
#[derive(Clone, Copy, Debug)]
pub struct Precision {
    pub max_depth: u32,
    pub max_term_bits: u64,
}

impl Default for Precision {
    fn default() -> Self {
        Precision {
            max_depth: 12,
            max_term_bits: 1 << 21,
        }
    }
}

#[derive(Clone, Debug)]
enum Repr {
    Rational(BigRat),
    Lacunary(LacunarySpec),
}

/// A real number the kernel can compute with: either an exact rational or a
/// lacunary series, with memoized certified truncation intervals.
#[derive(Clone)]
pub struct RealHandle {
    repr: Arc<Repr>,
    precision: Precision,
    cache: Arc<Mutex<BTreeMap<u32, Arc<Interval>>>>,
}

impl std::fmt::Debug for RealHandle {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match &*self.repr {
            Repr::Rational(r) => write!(f, "RealHandle::Rational({r})"),
            Repr::Lacunary(s) => write!(f, "RealHandle::Lacunary({s:?})"),
        }
    }
}

impl RealHandle {
    pub fn rational(r: BigRat) -> Self {
        RealHandle {
            repr: Arc::new(Repr::Rational(r)),
            precision: Precision::default(),
            cache: Arc::new(Mutex::new(BTreeMap::new())),
        }
    }

    pub fn lacunary(spec: LacunarySpec) -> Self {
        RealHandle {
            repr: Arc::new(Repr::Lacunary(spec)),
            precision: Precision::default(),
            cache: Arc::new(Mutex::new(BTreeMap::new())),
        }
    }

    pub fn with_precision(mut self, precision: Precision) -> Self {
        self.precision = precision;
        self
    }

    pub fn precision(&self) -> Precision {
        self.precision
    }

    pub fn is_rational(&self) -> bool {
        matches!(&*self.repr, Repr::Rational(_))
    }

    pub fn rational_value(&self) -> Option<&BigRat> {
        match &*self.repr {
            Repr::Rational(r) => Some(r),
            _ => None,
        }
    }

    pub fn lacunary_spec(&self) -> Option<&LacunarySpec> {
        match &*self.repr {
            Repr::Lacunary(s) => Some(s),
            _ => None,
        }
    }

    /// Certified enclosure after n series terms: [S_n, S_n + τ_n] where τ_n
    /// majorizes the dropped tail by the geometric bound
    /// c·b^(−a_{n+1})·(1−b⁻¹)⁻¹. When a_{n+1} is too large to write down, the
    /// weaker (still sound) exponent 2·aₙ + 4096 is used instead. Rational
    /// handles return their exact point interval at every depth.
    pub fn truncate(&self, n: u32) -> Result<Interval> {
        Ok(self.enclosure(n)?.as_ref().clone())
    }

    /// Shared-ownership variant of `truncate`; scan loops hold the Arc so the
    /// endpoints are never recopied.
    pub fn enclosure(&self, n: u32) -> Result<Arc<Interval>> {
        match &*self.repr {
            Repr::Rational(r) => Ok(Arc::new(Interval::point(r.clone()))),
            Repr::Lacunary(spec) => {
                if let Some(hit) = self.cache.lock().unwrap().get(&n) {
                    return Ok(hit.clone());
                }
                let built = Arc::new(self.build_lacunary(spec, n)?);
                self.cache
                    .lock()
                    .unwrap()
                    .insert(n, built.clone());
                Ok(built)
            }
        }
    }

    fn build_lacunary(&self, spec: &LacunarySpec, n: u32) -> Result<Interval> {
        let b = BigUint::from(spec.base);
        let log2b = (spec.base as f64).log2();
        let mut exps = Vec::with_capacity(n as usize + 1);
        for i in 1..=(n as usize + 1) {
            let a = spec.exponent(i)?;
            if i > 1 && a <= exps[i - 2] {
                return Err(Error::InvalidSpec(format!(
                    "exponent sequence not strictly increasing at n={i}"
                )));
            }
            exps.push(a);
        }
        let a_n = if n == 0 { 0 } else { exps[n as usize - 1] };
        if (a_n as f64) * log2b > self.precision.max_term_bits as f64 {
            return Err(Error::PrecisionExhausted(format!(
                "term b^{a_n} exceeds the bit budget"
            )));
        }
        // S_n = c·Σ_{i≤n} b^(−aᵢ) over the common denominator b^(a_n)
        let lo = if n == 0 {
            BigRat::zero()
        } else {
            let mut num = BigUint::zero();
            for &a in exps[..n as usize].iter() {
                num += b.pow(u32::try_from(a_n - a).expect("exponent gap fits u32"));
            }
            BigRat::new(
                BigInt::from(num * spec.coeff),
                BigInt::from(b.pow(u32::try_from(a_n).expect("exponent fits u32"))),
            )
        };
        let a_next = exps[n as usize];
        let tail_exp = a_next.min(2 * a_n + 4096);
        if (tail_exp as f64) * log2b > 4.0 * self.precision.max_term_bits as f64 {
            return Err(Error::PrecisionExhausted(format!(
                "tail bound b^-{tail_exp} exceeds the bit budget"
            )));
        }
        let tail = BigRat::new(
            BigInt::from(spec.coeff * spec.base),
            BigInt::from(
                (&b).pow(u32::try_from(tail_exp).expect("tail exponent fits u32"))
                    * (spec.base - 1),
            ),
        );
        let hi = &lo + tail;
        Ok(Interval::new(lo, hi))
    }

    /// Smallest depth whose tail bound is at most 2^(−bits). Starts at 1 and
    /// never exceeds the depth cap; errs if no representable depth is fine
    /// enough.
    pub fn depth_for_bits(&self, bits: u64) -> Result<u32> {
        match &*self.repr {
            Repr::Rational(_) => Ok(0),
            Repr::Lacunary(spec) => {
                let log2b = (spec.base as f64).log2();
                for n in 1..=self.precision.max_depth {
                    let a_n = spec.exponent(n as usize)?;
                    let a_next = match spec.exponent(n as usize + 1) {
                        Ok(a) => a,
                        Err(e) => return Err(e),
                    };
                    let tail_exp = a_next.min(2 * a_n + 4096);
                    // τ_n = c·b/(b−1)·b^(−tail_exp) ≤ b·b^(−tail_exp)
                    if (tail_exp as f64 - 1.0) * log2b >= bits as f64 {
                        if (a_n as f64) * log2b > self.precision.max_term_bits as f64 {
                            return Err(Error::PrecisionExhausted(format!(
                                "depth {n} needed for 2^-{bits} busts the bit budget"
                            )));
                        }
                        return Ok(n);
                    }
                }
                Err(Error::PrecisionExhausted(format!(
                    "no depth within the cap reaches width 2^-{bits}"
                )))
            }
        }
    }

    /// Certified upper bound on |ζ|, from a fixed shallow depth so results are
    /// reproducible run to run.
    pub fn abs_hi(&self) -> Result<BigRat> {
        match &*self.repr {
            Repr::Rational(r) => Ok(r.abs()),
            Repr::Lacunary(_) => {
                let depth = self.first_representable_depth()?;
                let i = self.enclosure(depth)?;
                Ok(i.hi().abs())
            }
        }
    }

    /// Certified statement |ζ| < 1/2, again from the fixed shallow depth.
    pub fn abs_below_half(&self) -> Result<bool> {
        let half = BigRat::new(BigInt::one(), BigInt::from(2));
        match &*self.repr {
            Repr::Rational(r) => Ok(r.abs() < half),
            Repr::Lacunary(_) => Ok(self.abs_hi()? < half),
        }
    }

    fn first_representable_depth(&self) -> Result<u32> {
        match &*self.repr {
            Repr::Rational(_) => Ok(0),
            Repr::Lacunary(spec) => {
                let log2b = (spec.base as f64).log2();
                for n in (1..=3u32).rev() {
                    if let Ok(a) = spec.exponent(n as usize) {
                        if (a as f64) * log2b <= self.precision.max_term_bits as f64
                            && spec.exponent(n as usize + 1).is_ok()
                        {
                            return Ok(n);
                        }
                    }
                }
                Err(Error::PrecisionExhausted(
                    "no representable truncation depth".into(),
                ))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactnum::interval::rat;
    use crate::exactnum::lacunary::ExponentRule;

    fn zeta4() -> RealHandle {
        RealHandle::lacunary(
            LacunarySpec::new(
                2,
                1,
                ExponentRule::GeometricCeil {
                    alpha: rat(1, 1),
                    ratio: rat(4, 1),
                },
            )
            .unwrap(),
        )
    }

    #[test]
    fn truncation_matches_geometric_tail() {
        // depth 1 of Σ2^(−4ⁿ): [1/16, 1/16 + 2·2^(−16)]
        let i = zeta4().truncate(1).unwrap();
        assert_eq!(i.lo(), &rat(1, 16));
        let tau = rat(2, 65536);
        assert_eq!(i.width(), tau);
    }

    #[test]
    fn truncations_nest() {
        let z = zeta4();
        let outer = z.truncate(1).unwrap();
        let inner = z.truncate(2).unwrap();
        let deeper = z.truncate(3).unwrap();
        assert!(outer.contains_interval(&inner));
        assert!(inner.contains_interval(&deeper));
    }

    #[test]
    fn rational_truncation_is_exact() {
        let z = RealHandle::rational(rat(2, 5));
        let i = z.truncate(7).unwrap();
        assert!(i.is_point());
        assert_eq!(i.lo(), &rat(2, 5));
    }

    #[test]
    fn depth_for_bits_sane() {
        let z = zeta4();
        let d = z.depth_for_bits(40).unwrap();
        let w = z.truncate(d).unwrap().width();
        assert!(w < rat(1, 1 << 40));
    }

    #[test]
    fn doubly_exponential_tail_is_capped_not_exploded() {
        let z = RealHandle::lacunary(
            LacunarySpec::new(2, 1, ExponentRule::DoublyExponential).unwrap(),
        );
        // a₅ = 2³² would be a half-gigabyte denominator if used literally
        let i = z.truncate(4).unwrap();
        assert!(i.width() > rat(0, 1));
        let bits = i.width().denom().bits();
        assert!(bits < 1 << 21, "tail denominator kept representable");
    }
}
