//! Scans along the curve (ζ, ζ², …, ζᵏ): certified per-x approximants,
//! divisibility/structure verifiers, candidate pruning, and the witness
//! search for unbounded approximation quality.
//!
//! Every verdict is a certified interval comparison. Scans over x deepen the
//! truncation per x with a policy that depends only on x, never on scan
//! order, so partitioned parallel runs produce byte-identical reports.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::contfrac::{convergents, convergents_of_power, decompose, Decomposition};
use crate::error::{Error, Result};
use crate::exactnum::{
    dist_enclosure, nearest_int_dist, power_enclosure, rat, round_half_even, BigRat, Interval,
    RealHandle,
};

/// One fully certified simultaneous approximant at x: nearest integers yⱼ to
/// ζʲx and enclosures of the errors |ζʲx − yⱼ|.
#[derive(Clone, Debug)]
pub struct Approximant {
    pub x: BigUint,
    pub ys: Vec<BigInt>,
    pub errs: Vec<Interval>,
    /// Enclosure of max_j ‖ζʲx‖ (elementwise max of errs).
    pub mx: Interval,
    /// 1-based powers j where ζʲx is exactly an integer (rational inputs
    /// only); the corresponding errs entry is the point 0.
    pub exact_hits: Vec<u32>,
}

impl Approximant {
    /// Whether some power lands exactly on an integer; such x are excluded
    /// from every "0 < max‖·‖" criterion.
    pub fn is_exact_hit(&self) -> bool {
        !self.exact_hits.is_empty()
    }
}

fn half_pow_128() -> BigRat {
    BigRat::new(BigInt::one(), BigInt::one() << 128)
}

/// Mode for the admissibility constant of the divisibility lemma.
#[derive(Clone, Debug, PartialEq)]
pub enum C0Mode {
    Standard,
    /// Sharper constant (1/2)·L⁻¹ − ε with L = max_{1≤j≤k} j|ζ|^{j−1}; valid
    /// only for large x, ε defaults to 1/1000. For |ζ| < 1/2 the ε can be
    /// dropped and the constant is exactly 1/2.
    Refined { epsilon: BigRat },
}

impl C0Mode {
    pub fn refined_default() -> Self {
        C0Mode::Refined { epsilon: rat(1, 1000) }
    }
}

fn rat_pow(base: &BigRat, e: u32) -> BigRat {
    let mut acc = BigRat::one();
    for _ in 0..e {
        acc *= base;
    }
    acc
}

/// Admissibility constant C₀(k, ζ): any x with M_x < C₀·x⁻¹ is guaranteed the
/// full divisibility/convergent structure. Standard form
/// (1/2)·k⁻¹·(1+|ζ|)^{1−k}, evaluated with a certified upper bound on |ζ| so
/// the returned rational is a sound (smaller-or-equal) constant.
pub fn c0(z: &RealHandle, k: u32, mode: C0Mode) -> Result<BigRat> {
    if k == 0 {
        return Err(Error::Precondition("k must be positive".into()));
    }
    match mode {
        C0Mode::Standard => {
            if k == 1 {
                return Ok(rat(1, 2));
            }
            let abs_hi = z.abs_hi()?;
            let one_plus = BigRat::one() + abs_hi;
            Ok(rat(1, 2) / (BigRat::from_integer(BigInt::from(k)) * rat_pow(&one_plus, k - 1)))
        }
        C0Mode::Refined { epsilon } => {
            if epsilon.is_negative() {
                return Err(Error::Precondition("epsilon must be nonnegative".into()));
            }
            if z.abs_below_half()? {
                // j·|ζ|^{j−1} ≤ 1 for every j, so L = 1 and ε may be dropped
                return Ok(rat(1, 2));
            }
            let abs_hi = z.abs_hi()?;
            let mut l = BigRat::one();
            for j in 1..=k {
                let term = BigRat::from_integer(BigInt::from(j)) * rat_pow(&abs_hi, j - 1);
                if term > l {
                    l = term;
                }
            }
            let c = rat(1, 2) / l - epsilon;
            if !c.is_positive() {
                return Err(Error::Precondition(
                    "refined constant is nonpositive for this ζ and ε".into(),
                ));
            }
            Ok(c)
        }
    }
}

/// Certified approximant builder with per-depth power tables. The deepening
/// policy is a function of x alone, so results never depend on which other
/// x's a scanner instance has seen.
pub(crate) struct Scanner<'a> {
    z: &'a RealHandle,
    k: u32,
    rational_powers: Option<Vec<BigRat>>,
    tables: BTreeMap<u32, Vec<Arc<Interval>>>,
}

impl<'a> Scanner<'a> {
    pub fn new(z: &'a RealHandle, k: u32) -> Result<Self> {
        if k == 0 {
            return Err(Error::Precondition("k must be positive".into()));
        }
        let rational_powers = z.rational_value().map(|r| {
            let mut v = Vec::with_capacity(k as usize);
            let mut acc = BigRat::one();
            for _ in 0..k {
                acc *= r;
                v.push(acc.clone());
            }
            v
        });
        Ok(Scanner { z, k, rational_powers, tables: BTreeMap::new() })
    }

    fn tables_at(&mut self, depth: u32) -> Result<Vec<Arc<Interval>>> {
        if let Some(t) = self.tables.get(&depth) {
            return Ok(t.clone());
        }
        let base = self.z.enclosure(depth)?;
        let mut t = Vec::with_capacity(self.k as usize);
        for j in 1..=self.k {
            t.push(Arc::new(power_enclosure(&base, j)));
        }
        self.tables.insert(depth, t.clone());
        Ok(t)
    }

    fn start_depth(&self, x: &BigUint) -> Result<u32> {
        self.z.depth_for_bits(x.bits() + 24)
    }

    fn exact_approximant(&self, x: &BigUint) -> Approximant {
        let powers = self.rational_powers.as_ref().expect("rational path");
        let xi = BigInt::from(x.clone());
        let mut ys = Vec::with_capacity(powers.len());
        let mut errs = Vec::with_capacity(powers.len());
        let mut exact_hits = Vec::new();
        let mut mx = BigRat::zero();
        for (idx, p) in powers.iter().enumerate() {
            let v = p * BigRat::from_integer(xi.clone());
            let y = round_half_even(&v);
            let e = (&v - BigRat::from_integer(y.clone())).abs();
            if e.is_zero() {
                exact_hits.push(idx as u32 + 1);
            }
            if e > mx {
                mx = e.clone();
            }
            ys.push(y);
            errs.push(Interval::point(e));
        }
        Approximant { x: x.clone(), ys, errs, mx: Interval::point(mx), exact_hits }
    }

    fn try_build(&mut self, x: &BigUint, depth: u32) -> Result<Option<Approximant>> {
        let tabs = self.tables_at(depth)?;
        let xi = BigInt::from(x.clone());
        let tiny = half_pow_128();
        let mut ys = Vec::with_capacity(tabs.len());
        let mut errs: Vec<Interval> = Vec::with_capacity(tabs.len());
        for t in &tabs {
            let scaled = t.scale_int(&xi);
            let d = match dist_enclosure(&scaled) {
                Ok(d) => d,
                Err(Error::AmbiguousDistance(_)) => return Ok(None),
                Err(e) => return Err(e),
            };
            let Some(nearest) = d.nearest else { return Ok(None) };
            let w = d.dist.width();
            let sharp_enough = &w * rat(8, 1) < *d.dist.lo() || w < tiny;
            if !sharp_enough {
                return Ok(None);
            }
            ys.push(nearest);
            errs.push(d.dist);
        }
        let mx_lo = errs.iter().map(|e| e.lo().clone()).max().expect("k ≥ 1");
        let mx_hi = errs.iter().map(|e| e.hi().clone()).max().expect("k ≥ 1");
        Ok(Some(Approximant {
            x: x.clone(),
            ys,
            errs,
            mx: Interval::new(mx_lo, mx_hi),
            exact_hits: Vec::new(),
        }))
    }

    /// Certified approximant starting no shallower than min_depth; returns
    /// the depth that sufficed so callers can request a strictly deeper one.
    fn approximant_from(&mut self, x: &BigUint, min_depth: u32) -> Result<(Approximant, u32)> {
        if self.rational_powers.is_some() {
            return Ok((self.exact_approximant(x), 0));
        }
        let mut depth = self.start_depth(x)?.max(min_depth);
        let max_depth = self.z.precision().max_depth;
        loop {
            if let Some(a) = self.try_build(x, depth)? {
                return Ok((a, depth));
            }
            if depth >= max_depth {
                return Err(Error::AmbiguousDistance(format!(
                    "approximant at x = {x} undecided at the depth cap"
                )));
            }
            depth += 1;
        }
    }

    pub fn approximant(&mut self, x: &BigUint) -> Result<Approximant> {
        Ok(self.approximant_from(x, 0)?.0)
    }

    /// Certified strict comparison M_a < M_b. Deepens both sides together;
    /// equal exact values compare false (ties never count as new records).
    pub fn mx_strictly_less(&mut self, a: &BigUint, b: &BigUint) -> Result<bool> {
        if self.rational_powers.is_some() {
            let ma = self.exact_approximant(a).mx;
            let mb = self.exact_approximant(b).mx;
            return Ok(ma.lo() < mb.lo());
        }
        let mut min_depth = 0;
        let max_depth = self.z.precision().max_depth;
        loop {
            let (aa, da) = self.approximant_from(a, min_depth)?;
            let (ab, db) = self.approximant_from(b, min_depth)?;
            if aa.mx.hi() < ab.mx.lo() {
                return Ok(true);
            }
            if aa.mx.lo() >= ab.mx.hi() {
                return Ok(false);
            }
            let used = da.max(db);
            if used >= max_depth {
                return Err(Error::AmbiguousDistance(format!(
                    "comparison between x = {a} and x = {b} undecided at the depth cap"
                )));
            }
            min_depth = used + 1;
        }
    }

    /// Runs a three-valued predicate against ever deeper approximants until
    /// it decides. Exact (rational) approximants must decide immediately.
    pub fn decide<F>(&mut self, x: &BigUint, f: F) -> Result<bool>
    where
        F: Fn(&Approximant) -> Option<bool>,
    {
        let mut min_depth = 0;
        let max_depth = self.z.precision().max_depth;
        loop {
            let (a, used) = self.approximant_from(x, min_depth)?;
            if let Some(v) = f(&a) {
                return Ok(v);
            }
            if self.rational_powers.is_some() {
                return Err(Error::Internal(
                    "predicate undecided on an exact point approximant".into(),
                ));
            }
            if used >= max_depth {
                return Err(Error::AmbiguousDistance(format!(
                    "threshold comparison at x = {x} undecided at the depth cap"
                )));
            }
            min_depth = used + 1;
        }
    }
}

/// Certified approximant at a single x.
pub fn scan_mx(z: &RealHandle, k: u32, x: &BigUint) -> Result<Approximant> {
    if x.is_zero() {
        return Err(Error::Precondition("x must be positive".into()));
    }
    Scanner::new(z, k)?.approximant(x)
}

/// Decides m ≤ x^(−t) for a nonnegative enclosure m and rational t = p/r > 0
/// by cross-multiplied exact comparison m^r·x^p vs 1. None when the
/// enclosure straddles the threshold.
pub(crate) fn le_inv_power(m: &Interval, x: &BigUint, t: &BigRat) -> Result<Option<bool>> {
    if !t.is_positive() {
        return Err(Error::Precondition("exponent must be positive".into()));
    }
    let p = t.numer().to_u32().ok_or_else(|| {
        Error::Precondition("exponent numerator too large".into())
    })?;
    let r = t.denom().to_u32().ok_or_else(|| {
        Error::Precondition("exponent denominator too large".into())
    })?;
    if (p as u64) * x.bits() > 4_000_000 {
        return Err(Error::Precondition("x^p exceeds the size guard".into()));
    }
    let xp = BigRat::from_integer(BigInt::from(x.pow(p)));
    let hi_r = rat_pow(m.hi(), r) * &xp;
    if hi_r <= BigRat::one() {
        return Ok(Some(true));
    }
    let lo_r = rat_pow(m.lo(), r) * &xp;
    if lo_r > BigRat::one() {
        return Ok(Some(false));
    }
    Ok(None)
}

/// Inclusive contiguous split of [lo, hi] for deterministic parallel scans.
pub(crate) fn partition_ranges(lo: u64, hi: u64, workers: usize) -> Vec<(u64, u64)> {
    assert!(lo <= hi);
    let total = hi - lo + 1;
    let w = workers.clamp(1, 64).min(total.max(1) as usize).max(1);
    let chunk = total / w as u64;
    let rem = total % w as u64;
    let mut out = Vec::with_capacity(w);
    let mut start = lo;
    for i in 0..w {
        let len = chunk + if (i as u64) < rem { 1 } else { 0 };
        if len == 0 {
            continue;
        }
        out.push((start, start + len - 1));
        start += len;
    }
    out
}

/// Runs f on each partition range, merging results in range order. Results
/// are identical for every worker count because per-x work is order-free.
pub(crate) fn scan_partitioned<T, F>(lo: u64, hi: u64, workers: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64, u64) -> Result<T> + Sync,
{
    let ranges = partition_ranges(lo, hi, workers);
    if ranges.len() == 1 {
        return Ok(vec![f(lo, hi)?]);
    }
    let f = &f;
    std::thread::scope(|s| {
        let handles: Vec<_> = ranges
            .iter()
            .map(|&(a, b)| s.spawn(move || f(a, b)))
            .collect();
        let mut out = Vec::with_capacity(handles.len());
        for h in handles {
            let r = h
                .join()
                .map_err(|_| Error::Internal("scan worker panicked".into()))?;
            out.push(r?);
        }
        Ok(out)
    })
}

/// Eq-style exactness record for a hit x = N·x₀ᵏ: the nearest-integer vector
/// at x must be N times the vector at x₀ᵏ, which forces
/// M_x = N·M_{x₀ᵏ} as an identity of real numbers.
#[derive(Clone, Debug)]
pub struct HaineCheck {
    pub n: BigUint,
    pub x0: BigUint,
    pub verified: bool,
}

#[derive(Clone, Debug)]
pub struct Lemma2Hit {
    pub x: u64,
    pub decomposition: Decomposition,
    pub divides: bool,
    pub convergent_ok: bool,
}

#[derive(Clone, Debug)]
pub struct Lemma2Report {
    pub k: u32,
    pub xmax: u64,
    pub c0: BigRat,
    pub hits: Vec<Lemma2Hit>,
    /// x with M_x < C₀x⁻¹ excluded by the 0 < max‖·‖ convention.
    pub excluded_exact_hits: Vec<u64>,
    pub haine_checks: Vec<HaineCheck>,
    pub violations: Vec<String>,
}

impl Lemma2Report {
    pub fn clean(&self) -> bool {
        self.violations.is_empty()
    }
}

struct Lemma2Partial {
    hits: Vec<u64>,
    excluded: Vec<u64>,
}

/// For every x ≤ xmax with certified M_x < C₀·x⁻¹: decomposes x, asserts
/// x₀ᵏ | x, asserts each y₀ʲ/x₀ʲ is a certified convergent of ζʲ, and
/// verifies the exact scaling identity M_{N·x₀ᵏ} = N·M_{x₀ᵏ} through the
/// nearest-integer vectors.
pub fn verify_lemma2(z: &RealHandle, k: u32, xmax: u64, workers: usize) -> Result<Lemma2Report> {
    if k < 2 {
        return Err(Error::Precondition("k must be at least 2".into()));
    }
    if xmax == 0 {
        return Err(Error::Precondition("xmax must be positive".into()));
    }
    let c = c0(z, k, C0Mode::Standard)?;
    let partials = scan_partitioned(1, xmax, workers, |lo, hi| {
        let mut scanner = Scanner::new(z, k)?;
        let mut part = Lemma2Partial { hits: Vec::new(), excluded: Vec::new() };
        for x in lo..=hi {
            let xb = BigUint::from(x);
            let thr = &c / BigRat::from_integer(BigInt::from(x));
            let is_hit = scanner.decide(&xb, |a| {
                if a.is_exact_hit() {
                    // exact hits decide as misses here; recorded separately
                    return Some(false);
                }
                if *a.mx.hi() < thr {
                    Some(true)
                } else if *a.mx.lo() >= thr {
                    Some(false)
                } else {
                    None
                }
            })?;
            if is_hit {
                part.hits.push(x);
            } else if z.rational_value().is_some() {
                let a = scanner.approximant(&xb)?;
                if a.is_exact_hit() && *a.mx.hi() < thr {
                    part.excluded.push(x);
                }
            }
        }
        Ok(part)
    })?;

    let mut hits = Vec::new();
    let mut excluded_exact_hits = Vec::new();
    let mut haine_checks = Vec::new();
    let mut violations = Vec::new();

    let all_hits: Vec<u64> = partials.iter().flat_map(|p| p.hits.iter().copied()).collect();
    for p in &partials {
        excluded_exact_hits.extend(p.excluded.iter().copied());
    }

    let mut scanner = Scanner::new(z, k)?;
    for x in all_hits {
        let xb = BigUint::from(x);
        let dec = match decompose(z, &xb) {
            Ok(d) => d,
            Err(e) => {
                violations.push(format!("x = {x}: decomposition failed: {e}"));
                continue;
            }
        };
        let x0k = pow_biguint(&dec.x0, k);
        let divides = (&xb % &x0k).is_zero();
        if !divides {
            violations.push(format!("x = {x}: x₀ᵏ = {x0k} does not divide x"));
        }
        let mut convergent_ok = true;
        for j in 1..=k {
            let qj = pow_biguint(&dec.x0, j);
            let pj = dec.y0.pow(j);
            let convs = convergents_of_power(z, j, &qj)?;
            if !convs.iter().any(|c| c.p == pj && c.q == qj) {
                convergent_ok = false;
                violations.push(format!(
                    "x = {x}: y₀^{j}/x₀^{j} = {pj}/{qj} is not a convergent of ζ^{j}"
                ));
            }
        }
        if divides {
            let n = &xb / &x0k;
            let base = scanner.approximant(&x0k)?;
            let at_x = scanner.approximant(&xb)?;
            let ni = BigInt::from(n.clone());
            let verified = base
                .ys
                .iter()
                .zip(at_x.ys.iter())
                .all(|(y0, yx)| &ni * y0 == *yx);
            if !verified {
                violations.push(format!(
                    "x = {x}: nearest-integer vector is not N times the vector at x₀ᵏ"
                ));
            }
            haine_checks.push(HaineCheck { n, x0: dec.x0.clone(), verified });
        }
        hits.push(Lemma2Hit { x, decomposition: dec, divides, convergent_ok });
    }

    Ok(Lemma2Report {
        k,
        xmax,
        c0: c,
        hits,
        excluded_exact_hits,
        haine_checks,
        violations,
    })
}

fn pow_biguint(b: &BigUint, e: u32) -> BigUint {
    b.pow(e)
}

/// Complete candidate superset for {x ≤ xmax : M_x ≤ x^(−t)}, t > 1.
///
/// Any such x beyond the small prefix satisfies ‖ζx‖ < (2x)⁻¹, hence splits
/// as x = M₀·x₀ with x₀ a convergent denominator, ‖ζx₀‖ ≤ x₀^(−t) and
/// M₀ < (2‖ζx₀‖)⁻¹. The returned list is the union of the prefix
/// [1, ⌈2^(1/(t−1))⌉] with every such multiple family, so it provably
/// contains every qualifying x at any scale, with no "sufficiently large"
/// caveat.
pub fn good_candidates(
    z: &RealHandle,
    k: u32,
    xmax: u64,
    t: &BigRat,
    cap: u64,
) -> Result<Vec<u64>> {
    if k == 0 {
        return Err(Error::Precondition("k must be positive".into()));
    }
    if *t <= BigRat::one() {
        return Err(Error::Precondition("t must exceed 1".into()));
    }
    if xmax == 0 {
        return Err(Error::Precondition("xmax must be positive".into()));
    }
    let prefix_end = prefix_cutoff(t)?.min(BigUint::from(xmax));
    let prefix_end_u64 = prefix_end.to_u64().expect("bounded by xmax");
    let families = candidate_families(z, xmax, Some(t))?;
    let mut out: Vec<u64> = (1..=prefix_end_u64).collect();
    for fam in &families {
        let mut n = 1u64;
        while n <= fam.n_max {
            let x = match fam.q.checked_mul(n) {
                Some(v) if v <= xmax => v,
                _ => break,
            };
            out.push(x);
            n += 1;
        }
        if out.len() as u64 > cap.saturating_mul(2) {
            break;
        }
    }
    out.sort_unstable();
    out.dedup();
    if out.len() as u64 > cap {
        return Err(Error::BoxTooLarge { boxes: out.len().to_string(), cap });
    }
    Ok(out)
}

/// Smallest integer P with P^(t−1) ≥ 2; below it the decomposition argument
/// may not apply, so the prefix is enumerated densely.
fn prefix_cutoff(t: &BigRat) -> Result<BigUint> {
    let tm1 = t - BigRat::one();
    // 2^(1/(t−1)) = (2^denom)^(1/numer) for t−1 = numer/denom
    let numer = tm1.numer().to_u32().ok_or_else(|| {
        Error::Precondition("threshold exponent too extreme".into())
    })?;
    let denom = tm1.denom().to_u64().ok_or_else(|| {
        Error::Precondition("threshold exponent too extreme".into())
    })?;
    if denom > 4096 {
        return Err(Error::Precondition("threshold exponent too close to 1".into()));
    }
    let two_pow = BigUint::from(1u8) << denom;
    let root = two_pow.nth_root(numer);
    if pow_biguint(&root, numer) == two_pow {
        Ok(root)
    } else {
        Ok(root + BigUint::one())
    }
}

struct Family {
    q: u64,
    n_max: u64,
}

/// Multiple families N·q from the convergent denominators of ζ, with the
/// decomposition bound N < (2‖ζq‖)⁻¹ and an optional quality filter
/// ‖ζq‖ ≤ q^(−t).
fn candidate_families(z: &RealHandle, xmax: u64, t: Option<&BigRat>) -> Result<Vec<Family>> {
    let convs = convergents(z, &BigUint::from(xmax))?;
    let mut out = Vec::new();
    for c in convs {
        let q = match c.q.to_u64() {
            Some(q) if q >= 1 && q <= xmax => q,
            _ => continue,
        };
        let dist = certified_dist_interval(z, &c.q)?;
        if dist.hi().is_zero() {
            // exact rational hit: excluded by the 0 < ‖·‖ convention
            continue;
        }
        if let Some(t) = t {
            match le_inv_power(&dist, &c.q, t)? {
                Some(true) => {}
                Some(false) => continue,
                None => {
                    return Err(Error::AmbiguousDistance(format!(
                        "quality of convergent denominator {q} undecided"
                    )))
                }
            }
        }
        let n_cap_x = xmax / q;
        let n_max = if dist.lo().is_zero() {
            n_cap_x
        } else {
            // N < 1/(2·dist): floor via exact rational reciprocal
            let inv = (BigRat::one() / (rat(2, 1) * dist.lo())).floor().to_integer();
            inv.to_u64().map_or(n_cap_x, |v| v.min(n_cap_x))
        };
        if n_max >= 1 {
            out.push(Family { q, n_max });
        }
    }
    Ok(out)
}

/// Distance enclosure ‖ζq‖ sharp enough for reciprocal bounds (width below
/// an eighth of the value), deepening as needed.
fn certified_dist_interval(z: &RealHandle, q: &BigUint) -> Result<Interval> {
    if let Some(r) = z.rational_value() {
        let d = nearest_int_dist(&(r * BigRat::from_integer(BigInt::from(q.clone()))));
        return Ok(Interval::point(d));
    }
    let mut depth = z.depth_for_bits(q.bits() + 24)?;
    let max_depth = z.precision().max_depth;
    let tiny = half_pow_128();
    loop {
        let i = z.enclosure(depth)?;
        let scaled = i.scale_int(&BigInt::from(q.clone()));
        if let Ok(d) = dist_enclosure(&scaled) {
            if !d.straddle {
                let w = d.dist.width();
                if &w * rat(8, 1) < *d.dist.lo() || w < tiny {
                    return Ok(d.dist);
                }
            }
        }
        if depth >= max_depth {
            return Err(Error::AmbiguousDistance(format!(
                "‖ζ·{q}‖ enclosure too wide at the depth cap"
            )));
        }
        depth += 1;
    }
}

#[derive(Clone, Debug)]
pub struct Lemma3Hit {
    pub x: u64,
    pub y: BigInt,
    /// 1-based index n of the defining vector (b^(aₙ), yₙ).
    pub vector_index: usize,
    pub multiplier: BigUint,
}

#[derive(Clone, Debug)]
pub struct Lemma3Report {
    pub k: u32,
    pub xmax: u64,
    pub exponent: BigRat,
    /// Defining vectors (b^(aₙ), yₙ) with b^(aₙ) ≤ xmax.
    pub defining: Vec<(BigUint, BigUint)>,
    pub multiples: Vec<Lemma3Hit>,
    /// Qualifying (x, y) with x below the first defining denominator: the
    /// structure theorem only constrains large x.
    pub small_exceptions: Vec<(u64, BigInt)>,
    pub violations: Vec<(u64, BigInt)>,
    pub small_cutoff: u64,
}

impl Lemma3Report {
    pub fn clean(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Verifies that every solution of 0 < |ζx − y| ≤ x^(−exponent), x ≤ xmax is
/// an integer multiple of a defining vector (b^(aₙ), c·Σ_i b^(aₙ−aᵢ)),
/// except possibly below the first defining denominator.
pub fn verify_lemma3(
    spec: &crate::exactnum::LacunarySpec,
    k: u32,
    xmax: u64,
    exponent: Option<BigRat>,
    workers: usize,
) -> Result<Lemma3Report> {
    if k < 2 {
        return Err(Error::Precondition("k must be at least 2".into()));
    }
    if xmax == 0 {
        return Err(Error::Precondition("xmax must be positive".into()));
    }
    match spec.ratio_limit() {
        crate::exactnum::RatioLimit::Infinite => {}
        crate::exactnum::RatioLimit::Finite(r) => {
            if r <= BigRat::from_integer(BigInt::from(k)) {
                return Err(Error::Precondition(format!(
                    "exponent growth ratio must exceed k = {k} for the structure theorem"
                )));
            }
        }
        crate::exactnum::RatioLimit::Undeclared => {
            return Err(Error::Precondition(
                "explicit exponent lists need a declared growth ratio".into(),
            ))
        }
    }
    let expo = exponent.unwrap_or_else(|| {
        BigRat::new(BigInt::from(k), BigInt::from(k - 1))
    });
    if expo <= BigRat::one() {
        return Err(Error::Precondition("exponent must exceed 1".into()));
    }
    let z = RealHandle::lacunary(spec.clone());
    let b = BigUint::from(spec.base);
    let c = BigUint::from(spec.coeff);

    // defining vectors with denominator ≤ xmax
    let mut defining: Vec<(BigUint, BigUint)> = Vec::new();
    for n in 1usize.. {
        let an = match spec.exponent(n) {
            Ok(a) => a,
            Err(_) => break,
        };
        if an >= 64 {
            // b^aₙ ≥ 2⁶⁴ exceeds any u64 scan bound
            break;
        }
        let xn = pow_biguint(&b, an as u32);
        if xn > BigUint::from(xmax) {
            break;
        }
        let mut yn = BigUint::zero();
        for i in 1..=n {
            let ai = spec.exponent(i)?;
            yn += pow_biguint(&b, (an - ai) as u32);
        }
        defining.push((xn, &c * yn));
    }
    let small_cutoff = defining
        .first()
        .and_then(|(x1, _)| x1.to_u64())
        .unwrap_or(xmax);

    struct Part {
        multiples: Vec<Lemma3Hit>,
        small: Vec<(u64, BigInt)>,
        violations: Vec<(u64, BigInt)>,
    }
    let partials = scan_partitioned(1, xmax, workers, |lo, hi| {
        let mut scanner = Scanner::new(&z, 1)?;
        let mut part = Part { multiples: Vec::new(), small: Vec::new(), violations: Vec::new() };
        for x in lo..=hi {
            let xb = BigUint::from(x);
            let qualifies = scanner.decide(&xb, |a| {
                if a.is_exact_hit() {
                    return Some(false);
                }
                le_inv_power(&a.errs[0], &xb, &expo).transpose()?.ok()
            })?;
            if !qualifies {
                continue;
            }
            let y = scanner.approximant(&xb)?.ys[0].clone();
            let mut matched = None;
            for (idx, (xn, yn)) in defining.iter().enumerate() {
                if (&xb % xn).is_zero() {
                    let mult = &xb / xn;
                    if BigInt::from(&mult * yn) == y {
                        matched = Some((idx, mult));
                        break;
                    }
                }
            }
            match matched {
                Some((idx, mult)) => part.multiples.push(Lemma3Hit {
                    x,
                    y,
                    vector_index: idx + 1,
                    multiplier: mult,
                }),
                None if x < small_cutoff => part.small.push((x, y)),
                None => part.violations.push((x, y)),
            }
        }
        Ok(part)
    })?;

    let mut multiples = Vec::new();
    let mut small_exceptions = Vec::new();
    let mut violations = Vec::new();
    for p in partials {
        multiples.extend(p.multiples);
        small_exceptions.extend(p.small);
        violations.extend(p.violations);
    }
    Ok(Lemma3Report {
        k,
        xmax,
        exponent: expo,
        defining,
        multiples,
        small_exceptions,
        violations,
        small_cutoff,
    })
}

#[derive(Clone, Debug)]
pub struct LiouvilleSearch {
    pub k: u32,
    pub xmax: u64,
    pub c0: BigRat,
    pub witness: Option<u64>,
    /// Number of candidate x actually tested.
    pub evaluated: u64,
    pub note: String,
}

/// Smallest x ≤ xmax with certified M_x < C₀·x⁻¹, or None. The search space
/// is the complete candidate set from the decomposition bound (every
/// potential witness satisfies ‖ζx‖ < (2x)⁻¹, hence is a bounded multiple of
/// a convergent denominator), enumerated in ascending order.
pub fn liouville_witness(z: &RealHandle, k: u32, xmax: u64) -> Result<LiouvilleSearch> {
    if k == 0 {
        return Err(Error::Precondition("k must be positive".into()));
    }
    if xmax == 0 {
        return Err(Error::Precondition("xmax must be positive".into()));
    }
    let c = c0(z, k, C0Mode::Standard)?;
    let families = candidate_families(z, xmax, None)?;
    const EVAL_CAP: u64 = 20_000_000;

    let mut scanner = Scanner::new(z, k)?;
    let mut heap: std::collections::BinaryHeap<std::cmp::Reverse<(u64, usize, u64)>> =
        families
            .iter()
            .enumerate()
            .map(|(i, f)| std::cmp::Reverse((f.q, i, 1u64)))
            .collect();
    let mut evaluated = 0u64;
    let mut last = 0u64;
    let mut witness = None;
    while let Some(std::cmp::Reverse((x, fam, n))) = heap.pop() {
        if n < families[fam].n_max {
            if let Some(nx) = families[fam].q.checked_mul(n + 1) {
                if nx <= xmax {
                    heap.push(std::cmp::Reverse((nx, fam, n + 1)));
                }
            }
        }
        if x == last {
            continue;
        }
        last = x;
        evaluated += 1;
        if evaluated > EVAL_CAP {
            return Err(Error::BoxTooLarge {
                boxes: format!("more than {EVAL_CAP} candidates"),
                cap: EVAL_CAP,
            });
        }
        let xb = BigUint::from(x);
        let thr = &c / BigRat::from_integer(BigInt::from(x));
        let is_witness = scanner.decide(&xb, |a| {
            if a.is_exact_hit() {
                return Some(false);
            }
            if *a.mx.hi() < thr {
                Some(true)
            } else if *a.mx.lo() >= thr {
                Some(false)
            } else {
                None
            }
        })?;
        if is_witness {
            witness = Some(x);
            break;
        }
    }
    let note = match witness {
        Some(_) => "witness certified by interval comparison".to_string(),
        None => format!(
            "no witness below {xmax}: finite-scale evidence only, not a proof of boundedness"
        ),
    };
    Ok(LiouvilleSearch { k, xmax, c0: c, witness, evaluated, note })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactnum::{ExponentRule, LacunarySpec};

    fn zeta4() -> RealHandle {
        RealHandle::lacunary(
            LacunarySpec::new(
                2,
                1,
                ExponentRule::GeometricCeil { alpha: rat(1, 1), ratio: rat(4, 1) },
            )
            .unwrap(),
        )
    }

    fn zeta_liouville() -> RealHandle {
        RealHandle::lacunary(LacunarySpec::new(2, 1, ExponentRule::DoublyExponential).unwrap())
    }

    fn zeta_geometric() -> RealHandle {
        RealHandle::lacunary(
            LacunarySpec::new(
                2,
                1,
                ExponentRule::GeometricCeil { alpha: rat(1, 1), ratio: rat(2, 1) },
            )
            .unwrap(),
        )
    }

    #[test]
    fn c0_examples() {
        let half = RealHandle::rational(rat(1, 2));
        assert_eq!(c0(&half, 2, C0Mode::Standard).unwrap(), rat(1, 6));
        assert_eq!(c0(&half, 1, C0Mode::Standard).unwrap(), rat(1, 2));
        assert_eq!(c0(&zeta4(), 2, C0Mode::refined_default()).unwrap(), rat(1, 2));
    }

    #[test]
    fn c0_standard_is_sound_lower_bound() {
        // |ζ₄| < 1/8, so the true constant exceeds (1/2)(1/2)(9/8)⁻¹ = 2/9;
        // the certified value must lie between that and 1/4
        let c = c0(&zeta4(), 2, C0Mode::Standard).unwrap();
        assert!(c > rat(2, 9) && c < rat(1, 4));
    }

    #[test]
    fn scan_mx_exact_hit() {
        let a = scan_mx(&RealHandle::rational(rat(1, 2)), 2, &BigUint::from(4u32)).unwrap();
        assert_eq!(a.exact_hits, vec![1, 2]);
        assert!(a.mx.hi().is_zero());
        assert_eq!(a.ys, vec![BigInt::from(2), BigInt::from(1)]);
    }

    #[test]
    fn scan_mx_error_at_defining_denominator() {
        // ‖ζ·2¹⁶‖ = 2⁻⁴⁸ + 2⁻²⁴⁰ + …, safely inside [2⁻⁴⁸, 2⁻⁴⁷]
        let a = scan_mx(&zeta4(), 1, &BigUint::from(1u64 << 16)).unwrap();
        let lo = BigRat::new(BigInt::one(), BigInt::one() << 48);
        let hi = BigRat::new(BigInt::one(), BigInt::one() << 47);
        assert!(*a.errs[0].lo() >= lo);
        assert!(*a.errs[0].hi() <= hi);
    }

    #[test]
    fn scan_mx_depth_consistency() {
        let z = zeta4();
        let x = BigUint::from(256u32);
        let deep = z.enclosure(5).unwrap();
        let scaled = power_enclosure(&deep, 2).scale_int(&BigInt::from(256));
        let oracle = dist_enclosure(&scaled).unwrap();
        let a = scan_mx(&z, 2, &x).unwrap();
        // independent evaluation at another depth must overlap
        assert!(a.errs[1].lo() <= oracle.dist.hi() && oracle.dist.lo() <= a.errs[1].hi());
    }

    #[test]
    fn lemma2_zeta4_clean() {
        let rep = verify_lemma2(&zeta4(), 2, 2000, 2).unwrap();
        assert!(rep.clean(), "violations: {:?}", rep.violations);
        let xs: Vec<u64> = rep.hits.iter().map(|h| h.x).collect();
        assert!(xs.contains(&1));
        assert!(rep.haine_checks.iter().all(|h| h.verified));
    }

    #[test]
    fn lemma2_rational_excludes_exact_hits() {
        let rep = verify_lemma2(&RealHandle::rational(rat(1, 3)), 2, 100, 1).unwrap();
        assert!(rep.clean());
        assert!(rep.hits.is_empty());
    }

    #[test]
    fn good_candidates_cover_brute_force() {
        let z = zeta4();
        let t = rat(3, 2);
        let cands = good_candidates(&z, 2, 100_000, &t, 10_000_000).unwrap();
        let set: std::collections::BTreeSet<u64> = cands.iter().copied().collect();
        // brute force over a prefix: every qualifying x must be listed
        let mut scanner = Scanner::new(&z, 2).unwrap();
        for x in 1..=500u64 {
            let xb = BigUint::from(x);
            let q = scanner
                .decide(&xb, |a| {
                    if a.is_exact_hit() {
                        return Some(false);
                    }
                    le_inv_power(&a.mx, &xb, &t).transpose()?.ok()
                })
                .unwrap();
            if q {
                assert!(set.contains(&x), "qualifying x = {x} missing from candidates");
            }
        }
        assert!(set.contains(&16));
    }

    #[test]
    fn liouville_witness_found_and_absent() {
        let w = liouville_witness(&zeta_liouville(), 2, 100).unwrap();
        assert_eq!(w.witness, Some(1));
        let none = liouville_witness(&zeta_geometric(), 2, 2000).unwrap();
        assert_eq!(none.witness, None);
    }

    #[test]
    fn lemma3_structure() {
        let spec = LacunarySpec::new(
            2,
            1,
            ExponentRule::GeometricCeil { alpha: rat(1, 1), ratio: rat(4, 1) },
        )
        .unwrap();
        let rep = verify_lemma3(&spec, 2, 2000, Some(rat(2, 1)), 2).unwrap();
        assert!(rep.clean(), "violations: {:?}", rep.violations);
        let xs: Vec<u64> = rep.multiples.iter().map(|h| h.x).collect();
        assert!(xs.contains(&16));
        assert!(xs.contains(&32));
        let small: Vec<u64> = rep.small_exceptions.iter().map(|(x, _)| *x).collect();
        assert_eq!(small, vec![1, 2]);
        assert_eq!(rep.small_cutoff, 16);
    }

    #[test]
    fn partition_is_exact_cover() {
        for workers in 1..=7 {
            let ranges = partition_ranges(1, 103, workers);
            let mut expect = 1u64;
            for (a, b) in &ranges {
                assert_eq!(*a, expect);
                assert!(b >= a);
                expect = b + 1;
            }
            assert_eq!(expect, 104);
        }
    }
}
