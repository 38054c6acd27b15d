//! Continued fractions with certified convergents.
//!
//! Irrational inputs are only ever known through shrinking interval
//! enclosures, so convergents are certified by running the Euclidean
//! expansion on both endpoints simultaneously and keeping the common
//! quotient prefix: every point of the interval shares that prefix (the
//! Gauss-map iterates of all points stay bracketed between the iterates of
//! the endpoints). Deepening the truncation lengthens the certified prefix.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::exactnum::{
    dist_enclosure, nearest_int_dist, power_enclosure, round_half_even, BigRat, Interval,
    RealHandle,
};

/// One certified convergent pᵢ/qᵢ of a continued fraction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Convergent {
    pub p: BigInt,
    pub q: BigUint,
    pub index: u32,
    /// Always true for returned values: uncertified prefixes are never
    /// emitted. Kept explicit so reports can state it.
    pub certified: bool,
}

/// x = M₀·x₀ with y₀/x₀ the reduced nearest fraction; ‖ζx‖ = M₀·‖ζx₀‖.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Decomposition {
    pub x0: BigUint,
    pub y0: BigInt,
    pub m0: BigUint,
}

/// Canonical continued-fraction quotients of an exact rational (finite; the
/// last quotient is ≥ 2 unless the expansion is a single term).
fn cf_quotients_rational(r: &BigRat) -> Vec<BigInt> {
    let mut out = Vec::new();
    let mut v = r.clone();
    loop {
        let a = v.floor().to_integer();
        out.push(a.clone());
        let frac = &v - BigRat::from_integer(a);
        if frac.is_zero() {
            break;
        }
        v = frac.recip();
    }
    out
}

/// Longest quotient prefix shared by every point of [lo, hi].
fn cf_common_prefix(lo: &BigRat, hi: &BigRat, max_terms: usize) -> Vec<BigInt> {
    let mut out = Vec::new();
    let mut lo = lo.clone();
    let mut hi = hi.clone();
    while out.len() < max_terms {
        let fl = lo.floor().to_integer();
        let fh = hi.floor().to_integer();
        if fl != fh {
            break;
        }
        out.push(fl.clone());
        let frac_lo = &lo - BigRat::from_integer(fl.clone());
        let frac_hi = &hi - BigRat::from_integer(fl);
        if frac_lo.is_zero() || frac_hi.is_zero() {
            // an endpoint's expansion terminates here; nothing further is
            // shared by the whole interval
            break;
        }
        // 1/(x − a) reverses the bracketing
        let new_lo = frac_hi.recip();
        let new_hi = frac_lo.recip();
        lo = new_lo;
        hi = new_hi;
    }
    out
}

fn convergents_from_quotients(quots: &[BigInt]) -> Vec<(BigInt, BigInt)> {
    let mut out = Vec::with_capacity(quots.len());
    let (mut p_prev, mut q_prev) = (BigInt::one(), BigInt::zero());
    let (mut p, mut q) = (BigInt::zero(), BigInt::one());
    // (p, q) starts as the (-1)-st convergent 0/1 shifted so the loop below
    // produces p₀ = a₀, q₀ = 1 first
    std::mem::swap(&mut p_prev, &mut p);
    std::mem::swap(&mut q_prev, &mut q);
    for a in quots {
        let np = a * &p + &p_prev;
        let nq = a * &q + &q_prev;
        p_prev = std::mem::replace(&mut p, np);
        q_prev = std::mem::replace(&mut q, nq);
        out.push((p.clone(), q.clone()));
    }
    out
}

/// Source of enclosures for the certification driver: the handle itself or
/// one of its powers ζʲ.
struct Refinable<'a> {
    z: &'a RealHandle,
    j: u32,
}

impl Refinable<'_> {
    fn exact(&self) -> Option<BigRat> {
        self.z.rational_value().map(|r| {
            let mut acc = BigRat::one();
            for _ in 0..self.j {
                acc *= r;
            }
            acc
        })
    }

    fn enclosure(&self, depth: u32) -> Result<Interval> {
        let i = self.z.enclosure(depth)?;
        Ok(power_enclosure(&i, self.j))
    }
}

fn convergents_driver(src: &Refinable<'_>, qmax: &BigUint) -> Result<Vec<Convergent>> {
    const PREFIX_GUARD: usize = 100_000;
    if let Some(r) = src.exact() {
        let quots = cf_quotients_rational(&r);
        let list = convergents_from_quotients(&quots);
        return Ok(list
            .into_iter()
            .enumerate()
            .filter(|(_, (_, q))| q.magnitude() <= qmax)
            .map(|(i, (p, q))| Convergent {
                p,
                q: q.magnitude().clone(),
                index: i as u32,
                certified: true,
            })
            .collect());
    }
    let max_depth = src.z.precision().max_depth;
    let mut depth = src.z.depth_for_bits(64).unwrap_or(1);
    loop {
        let i = src.enclosure(depth)?;
        let prefix = cf_common_prefix(i.lo(), i.hi(), PREFIX_GUARD);
        let list = convergents_from_quotients(&prefix);
        let complete = list
            .last()
            .map(|(_, q)| q.magnitude() > qmax)
            .unwrap_or(false);
        if complete {
            return Ok(list
                .into_iter()
                .enumerate()
                .filter(|(_, (_, q))| q.magnitude() <= qmax)
                .map(|(idx, (p, q))| Convergent {
                    p,
                    q: q.magnitude().clone(),
                    index: idx as u32,
                    certified: true,
                })
                .collect());
        }
        if depth + 1 > max_depth {
            return Err(Error::PrecisionExhausted(format!(
                "certified convergent prefix does not reach denominator {qmax} at the depth cap"
            )));
        }
        depth += 1;
    }
}

/// All certified convergents of ζ with denominator ≤ qmax.
pub fn convergents(z: &RealHandle, qmax: &BigUint) -> Result<Vec<Convergent>> {
    convergents_driver(&Refinable { z, j: 1 }, qmax)
}

/// All certified convergents of ζʲ with denominator ≤ qmax.
pub fn convergents_of_power(z: &RealHandle, j: u32, qmax: &BigUint) -> Result<Vec<Convergent>> {
    convergents_driver(&Refinable { z, j }, qmax)
}

/// Denominators x ≤ qmax minimizing ‖ζv‖ over 1 ≤ v ≤ x (the law of best
/// approximation: exactly the convergent denominators), ascending.
pub fn best_approximations(z: &RealHandle, qmax: &BigUint) -> Result<Vec<BigUint>> {
    let convs = convergents(z, qmax)?;
    let mut out: Vec<BigUint> = Vec::with_capacity(convs.len());
    for c in convs {
        if out.last() != Some(&c.q) {
            out.push(c.q);
        }
    }
    Ok(out)
}

/// Certified strict comparison ‖ζx‖ < bound, deepening on demand.
pub(crate) fn dist_strictly_less(z: &RealHandle, x: &BigUint, bound: &BigRat) -> Result<bool> {
    if let Some(r) = z.rational_value() {
        let d = nearest_int_dist(&(r * BigRat::from_integer(BigInt::from(x.clone()))));
        return Ok(&d < bound);
    }
    let mut depth = z.depth_for_bits(x.bits() + 16)?;
    let max_depth = z.precision().max_depth;
    loop {
        let i = z.enclosure(depth)?;
        let scaled = i.scale_int(&BigInt::from(x.clone()));
        match dist_enclosure(&scaled) {
            Ok(d) => {
                if d.dist.hi() < bound {
                    return Ok(true);
                }
                if d.dist.lo() >= bound {
                    return Ok(false);
                }
            }
            Err(Error::AmbiguousDistance(_)) => {}
            Err(e) => return Err(e),
        }
        if depth + 2 > max_depth {
            return Err(Error::AmbiguousDistance(format!(
                "‖ζ·{x}‖ vs {bound} undecided at the depth cap"
            )));
        }
        depth += 2;
    }
}

/// Certified nearest integer to ζ·x together with a distance enclosure.
pub(crate) fn certified_nearest(z: &RealHandle, x: &BigUint) -> Result<(BigInt, Interval)> {
    if let Some(r) = z.rational_value() {
        let v = r * BigRat::from_integer(BigInt::from(x.clone()));
        let d = nearest_int_dist(&v);
        return Ok((round_half_even(&v), Interval::point(d)));
    }
    let mut depth = z.depth_for_bits(x.bits() + 16)?;
    let max_depth = z.precision().max_depth;
    loop {
        let i = z.enclosure(depth)?;
        let scaled = i.scale_int(&BigInt::from(x.clone()));
        if let Ok(d) = dist_enclosure(&scaled) {
            if let Some(m) = d.nearest {
                return Ok((m, d.dist));
            }
        }
        if depth + 2 > max_depth {
            return Err(Error::AmbiguousDistance(format!(
                "nearest integer to ζ·{x} undecided at the depth cap"
            )));
        }
        depth += 2;
    }
}

/// Splits x into M₀·x₀ where y₀/x₀ is the reduced nearest fraction to ζ at
/// denominator x. Requires ‖ζx‖ < (2x)⁻¹; then x₀ is the largest convergent
/// denominator ≤ x, gcd(x₀, y₀) = 1, ‖ζx₀‖ = min_{1≤v≤x} ‖ζv‖, and
/// ‖ζx‖ = M₀·‖ζx₀‖ exactly.
pub fn decompose(z: &RealHandle, x: &BigUint) -> Result<Decomposition> {
    if x.is_zero() {
        return Err(Error::Precondition("x must be positive".into()));
    }
    if let Some(r) = z.rational_value() {
        let v = r * BigRat::from_integer(BigInt::from(x.clone()));
        if v.is_integer() {
            return Err(Error::ExactHit { j: 1, x: x.to_string() });
        }
    }
    let bound = BigRat::new(BigInt::one(), BigInt::from(2u8) * BigInt::from(x.clone()));
    if !dist_strictly_less(z, x, &bound)? {
        return Err(Error::Precondition(format!(
            "‖ζ·{x}‖ is not below 1/(2·{x})"
        )));
    }
    let convs = convergents(z, x)?;
    let last = convs
        .last()
        .ok_or_else(|| Error::Internal("no convergent with denominator ≤ x".into()))?;
    let x0 = last.q.clone();
    let y0 = last.p.clone();
    let (m0, rem) = x.div_rem(&x0);
    if !rem.is_zero() {
        return Err(Error::Internal(format!(
            "x = {x} is not a multiple of the best-approximation denominator {x0}"
        )));
    }
    // the nearest integer at x must be the scaled convergent numerator; this
    // is what makes ‖ζx‖ = M₀·‖ζx₀‖ an exact identity
    let (nearest_x, _) = certified_nearest(z, x)?;
    let expected = BigInt::from(m0.clone()) * &y0;
    if nearest_x != expected {
        return Err(Error::Internal(format!(
            "nearest integer at x = {x} is {nearest_x}, expected M₀·y₀ = {expected}"
        )));
    }
    Ok(Decomposition { x0, y0, m0 })
}

/// Exhaustive check that |m| ≤ Q, 0 < |ζm − n| < (2Q)⁻¹ has no two linearly
/// independent solutions.
#[derive(Clone, Debug)]
pub struct Prop1Report {
    pub q_bound: u64,
    /// Solutions with m > 0 (mirror images represent the same direction).
    pub solutions: Vec<(u64, BigInt)>,
    pub independent_pair: Option<[(u64, BigInt); 2]>,
}

impl Prop1Report {
    pub fn consistent(&self) -> bool {
        self.independent_pair.is_none()
    }
}

pub fn check_prop1(z: &RealHandle, q_bound: u64) -> Result<Prop1Report> {
    if q_bound == 0 {
        return Err(Error::Precondition("Q must be positive".into()));
    }
    let bound = BigRat::new(BigInt::one(), BigInt::from(2u64) * BigInt::from(q_bound));
    let mut solutions: Vec<(u64, BigInt)> = Vec::new();
    for m in 1..=q_bound {
        let mu = BigUint::from(m);
        // rational exact hits have |ζm − n| = 0 and are excluded by the
        // strict positivity in the statement
        if let Some(r) = z.rational_value() {
            let v = r * BigRat::from_integer(BigInt::from(m));
            if v.is_integer() {
                continue;
            }
        }
        if dist_strictly_less(z, &mu, &bound)? {
            let (n, _) = certified_nearest(z, &mu)?;
            solutions.push((m, n));
        }
    }
    let mut independent_pair = None;
    'outer: for i in 0..solutions.len() {
        for jj in (i + 1)..solutions.len() {
            let (m1, n1) = &solutions[i];
            let (m2, n2) = &solutions[jj];
            let det = BigInt::from(*m1) * n2 - BigInt::from(*m2) * n1;
            if !det.is_zero() {
                independent_pair = Some([solutions[i].clone(), solutions[jj].clone()]);
                break 'outer;
            }
        }
    }
    Ok(Prop1Report {
        q_bound,
        solutions,
        independent_pair,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactnum::{rat, ExponentRule, LacunarySpec};

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
    fn rational_cf_canonical() {
        let q = cf_quotients_rational(&rat(2, 5));
        assert_eq!(q, vec![BigInt::from(0), BigInt::from(2), BigInt::from(2)]);
        let convs = convergents(&RealHandle::rational(rat(2, 5)), &BigUint::from(100u32)).unwrap();
        let dens: Vec<u64> = convs.iter().map(|c| c.q.to_string().parse().unwrap()).collect();
        assert_eq!(dens, vec![1, 2, 5]);
    }

    #[test]
    fn best_approximations_of_rational() {
        let z = RealHandle::rational(rat(2, 5));
        let b = best_approximations(&z, &BigUint::from(5u32)).unwrap();
        let dens: Vec<u64> = b.iter().map(|q| q.to_string().parse().unwrap()).collect();
        assert_eq!(dens, vec![1, 2, 5]);
        let only_one = best_approximations(&z, &BigUint::from(1u32)).unwrap();
        assert_eq!(only_one.len(), 1);
        assert_eq!(only_one[0], BigUint::from(1u32));
    }

    #[test]
    fn certified_convergents_contain_defining_denominators() {
        let z = zeta4();
        let convs = convergents(&z, &BigUint::from(1u64 << 20)).unwrap();
        let dens: Vec<BigUint> = convs.iter().map(|c| c.q.clone()).collect();
        assert!(dens.contains(&BigUint::from(16u32)));
        assert!(dens.contains(&BigUint::from(65536u32)));
        // the convergent at q = 2¹⁶ is (2¹² + 1)/2¹⁶
        let c16 = convs.iter().find(|c| c.q == BigUint::from(65536u32)).unwrap();
        assert_eq!(c16.p, BigInt::from(4097));
        assert!(c16.certified);
    }

    #[test]
    fn best_approximations_match_brute_force() {
        let z = zeta4();
        let qmax = 300u64;
        let listed = best_approximations(&z, &BigUint::from(qmax)).unwrap();
        // oracle: strict-improvement scan of ‖ζv‖ on certified values
        let i = z.enclosure(4).unwrap();
        let mut best = rat(1, 1);
        let mut oracle = Vec::new();
        for v in 1..=qmax {
            let d = dist_enclosure(&i.scale_int(&BigInt::from(v))).unwrap();
            assert!(!d.straddle, "test depth wide enough");
            assert!(d.dist.width() < rat(1, 1 << 30));
            let val = d.dist.hi().clone();
            if val < best {
                best = val;
                oracle.push(BigUint::from(v));
            }
        }
        assert_eq!(listed, oracle);
    }

    #[test]
    fn decompose_defining_denominator() {
        let z = zeta4();
        let d = decompose(&z, &BigUint::from(65536u32)).unwrap();
        assert_eq!(d.x0, BigUint::from(65536u32));
        assert_eq!(d.y0, BigInt::from(4097));
        assert_eq!(d.m0, BigUint::from(1u32));
        let d3 = decompose(&z, &BigUint::from(3u32 * 65536)).unwrap();
        assert_eq!(d3.x0, BigUint::from(65536u32));
        assert_eq!(d3.m0, BigUint::from(3u32));
    }

    #[test]
    fn decompose_rejects_poor_x() {
        let z = zeta4();
        assert!(matches!(
            decompose(&z, &BigUint::from(5u32)),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn decompose_rational_exact_hit() {
        let z = RealHandle::rational(rat(1, 3));
        assert!(matches!(
            decompose(&z, &BigUint::from(3u32)),
            Err(Error::ExactHit { .. })
        ));
    }

    #[test]
    fn prop1_unique_direction() {
        let z = zeta4();
        let rep = check_prop1(&z, 100).unwrap();
        assert!(rep.consistent());
        assert!(!rep.solutions.is_empty());
        // every solution is a multiple of the primitive direction (16, 1)
        for (m, n) in &rep.solutions {
            assert_eq!(m % 16, 0);
            assert_eq!(BigInt::from(m / 16), *n);
        }
    }

    #[test]
    fn prop1_rational_strictness() {
        let z = RealHandle::rational(rat(1, 2));
        let rep = check_prop1(&z, 1).unwrap();
        assert!(rep.consistent());
        assert!(rep.solutions.is_empty());
    }
}
