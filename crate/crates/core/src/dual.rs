//! Linear-form scanner: minimize |x₀ + ζx₁ + ⋯ + ζᵏx_k| over the integer
//! box max|xⱼ| ≤ X, excluding exact zeros. Exhaustive enumeration with
//! branch-and-bound pruning; x₀ is completed analytically from the inner
//! coordinates, so the enumerated box has (2X+1)^k points.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_bigint::BigUint;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::exactnum::{
    dist_enclosure, power_enclosure, round_half_even, BigRat, Interval, RealHandle,
};
use crate::exponents::{
    kind_tolerance, log2_rat, ExponentKind, ExponentReport, Sample, Witness,
};
use crate::simul::scan_partitioned;

/// Default enumeration budget for one scan.
pub const DEFAULT_BOX_CAP: u64 = 100_000_000;

#[derive(Clone, Debug)]
pub struct LinearFormHit {
    /// (x₀, x₁, …, x_k); never all zero.
    pub coeffs: Vec<BigInt>,
    /// Encloses |x₀ + Σ ζʲxⱼ|; strictly positive (exact zeros are skipped).
    pub value: Interval,
    pub height: u64,
}

#[derive(Clone, Debug)]
struct Candidate {
    coeffs: Vec<BigInt>,
    /// Certified enclosure of the absolute value, endpoints > 0.
    value: Interval,
    depth: u32,
}

fn height_of(coeffs: &[BigInt]) -> u64 {
    coeffs
        .iter()
        .map(|c| c.magnitude().to_u64().expect("height fits u64"))
        .max()
        .unwrap_or(0)
}

fn negated(a: &[BigInt], b: &[BigInt]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(p, q)| p == &(-q))
}

fn abs_interval(i: &Interval) -> Interval {
    if !i.lo().is_negative() {
        i.clone()
    } else if !i.hi().is_positive() {
        i.neg()
    } else {
        let m = (-i.lo().clone()).max(i.hi().clone());
        Interval::new(BigRat::zero(), m)
    }
}

const DP_SHIFT: u32 = 96;

/// Fixed-point brackets ζʲ·2⁹⁶ ∈ [e_lo, e_hi]. Partial sums Σ xⱼζʲ·2⁹⁶
/// stay certified in i128, so almost every suffix is rejected against the
/// incumbent without touching exact rationals. Conservative by construction:
/// only certainly-losing suffixes are skipped, which keeps the scan result
/// independent of the filter.
#[derive(Clone)]
struct DualPrefilter {
    e_lo: Vec<i128>,
    e_hi: Vec<i128>,
    /// reach[m] bounds Σ_{1≤j≤m} |xⱼ| e_hi over the box, for subtree pruning.
    reach: Vec<i128>,
}

impl DualPrefilter {
    fn build(z: &RealHandle, k: u32, x: u64) -> Result<Option<DualPrefilter>> {
        // All partial sums must fit i128 with slack: |Σ xⱼ ζʲ| 2⁹⁶ ≤ kX·2⁹⁷.
        if (k as u128) * (x as u128) >= 1 << 27 {
            return Ok(None);
        }
        let depth = match z.depth_for_bits(DP_SHIFT as u64 + 64) {
            Ok(d) => d,
            Err(_) => return Ok(None),
        };
        let base = z.enclosure(depth)?;
        if base.lo().is_negative() {
            return Ok(None);
        }
        let scale = BigRat::from_integer(BigInt::from(1u8) << DP_SHIFT);
        let mut e_lo = Vec::with_capacity(k as usize);
        let mut e_hi = Vec::with_capacity(k as usize);
        for j in 1..=k {
            let p = power_enclosure(&base, j);
            let l = (p.lo() * &scale).floor().to_integer();
            let h = (p.hi() * &scale).ceil().to_integer();
            let (Some(l), Some(h)) = (l.to_i128(), h.to_i128()) else {
                return Ok(None);
            };
            if h >= 1i128 << (DP_SHIFT + 1) || h - l > 8 || l < 0 {
                return Ok(None);
            }
            e_lo.push(l);
            e_hi.push(h);
        }
        let mut reach = vec![0i128];
        let mut acc = 0i128;
        for h in &e_hi {
            acc += (x as i128) * h;
            reach.push(acc);
        }
        Ok(Some(DualPrefilter { e_lo, e_hi, reach }))
    }

    fn term(&self, j: usize, xj: i64) -> (i128, i128) {
        let x = xj as i128;
        if xj >= 0 {
            (x * self.e_lo[j], x * self.e_hi[j])
        } else {
            (x * self.e_hi[j], x * self.e_lo[j])
        }
    }

    /// Certified lower bound (scaled by 2⁹⁶) of min over free coordinates of
    /// |x₀ + suffix|, where the suffix lies in [r_lo, r_hi] widened by slack
    /// and x₀ ranges over the integers. Zero when inconclusive.
    fn dist_lower(&self, r_lo: i128, r_hi: i128, slack: i128) -> u128 {
        let a = r_lo - slack;
        let b = r_hi + slack;
        let s = 1i128 << DP_SHIFT;
        if a.div_euclid(s) != b.div_euclid(s) {
            return 0;
        }
        let fa = a.rem_euclid(s) as u128;
        let fb = b.rem_euclid(s) as u128;
        let full = 1u128 << DP_SHIFT;
        let half = full >> 1;
        if fb <= half {
            fa
        } else if fa >= half {
            full - fb
        } else {
            0
        }
    }
}

fn ceil_scaled_threshold(hi: &BigRat) -> Option<u128> {
    let scale = BigRat::from_integer(BigInt::from(1u8) << DP_SHIFT);
    let t = (hi * scale).ceil().to_integer().to_u128()?;
    if t == 0 {
        None
    } else {
        Some(t)
    }
}

struct FormScanner<'a> {
    z: &'a RealHandle,
    k: u32,
    x: i64,
    base_depth: u32,
    max_depth: u32,
    /// Power enclosures ζ, …, ζᵏ at the base depth; the exact path.
    base_powers: Vec<Interval>,
    /// Deeper power tables, built on demand for tie-breaking.
    tables: BTreeMap<u32, Vec<Interval>>,
    rational_powers: Option<Vec<BigRat>>,
    /// reach[m] bounds Σ_{1≤j≤m} |xⱼ ζʲ| over the box, for suffix pruning.
    reach: Vec<BigRat>,
    prefilter: Option<DualPrefilter>,
    /// ceil(incumbent upper bound · 2⁹⁶); suffixes certified at or above it
    /// cannot win. None disables skipping.
    threshold: Option<u128>,
}

impl<'a> FormScanner<'a> {
    fn new(z: &'a RealHandle, k: u32, x: u64) -> Result<Self> {
        let xi = i64::try_from(x)
            .map_err(|_| Error::Precondition("height bound too large".into()))?;
        let rational_powers = z.rational_value().map(|r| {
            let mut pows = Vec::with_capacity(k as usize);
            let mut acc = BigRat::from_integer(BigInt::from(1u8));
            for _ in 0..k {
                acc *= r;
                pows.push(acc.clone());
            }
            pows
        });
        let mut scanner = FormScanner {
            z,
            k,
            x: xi,
            base_depth: 0,
            max_depth: z.precision().max_depth,
            base_powers: Vec::new(),
            tables: BTreeMap::new(),
            rational_powers,
            reach: Vec::new(),
            prefilter: None,
            threshold: None,
        };
        if scanner.rational_powers.is_none() {
            // Enough bits that typical candidate values separate without
            // per-candidate deepening; backs off if the tail rule cannot
            // reach the requested accuracy.
            let span = 64 + (2 * k as u64 + 4) * (64 - x.leading_zeros() as u64 + 1);
            let mut want = span;
            let depth = loop {
                match z.depth_for_bits(want) {
                    Ok(d) => break d,
                    Err(e) => {
                        if want <= 64 {
                            return Err(e);
                        }
                        want /= 2;
                    }
                }
            };
            scanner.base_depth = depth;
            scanner.base_powers = scanner.powers_at(depth)?;
            let xr = BigRat::from_integer(BigInt::from(xi));
            let mut acc = BigRat::zero();
            let mut reach = vec![BigRat::zero()];
            for p in &scanner.base_powers {
                let amax = (-p.lo().clone()).max(p.hi().clone());
                acc += &xr * amax;
                reach.push(acc.clone());
            }
            scanner.reach = reach;
            scanner.prefilter = DualPrefilter::build(z, k, x)?;
        }
        Ok(scanner)
    }

    fn powers_at(&mut self, depth: u32) -> Result<Vec<Interval>> {
        if let Some(t) = self.tables.get(&depth) {
            return Ok(t.clone());
        }
        let base = self.z.enclosure(depth)?;
        let t: Vec<Interval> = (1..=self.k).map(|j| power_enclosure(&base, j)).collect();
        self.tables.insert(depth, t.clone());
        Ok(t)
    }

    fn sum_form(powers: &[Interval], coeffs: &[BigInt]) -> Interval {
        let mut acc = Interval::point(BigRat::from_integer(coeffs[0].clone()));
        for (j, p) in powers.iter().enumerate() {
            if !coeffs[j + 1].is_zero() {
                acc = acc.add(&p.scale_int(&coeffs[j + 1]));
            }
        }
        acc
    }

    /// Signed enclosure of x₀ + Σ ζʲxⱼ at the given depth.
    fn eval_signed(&mut self, coeffs: &[BigInt], depth: u32) -> Result<Interval> {
        if let Some(pows) = &self.rational_powers {
            let mut v = BigRat::from_integer(coeffs[0].clone());
            for (j, p) in pows.iter().enumerate() {
                v += p * BigRat::from_integer(coeffs[j + 1].clone());
            }
            return Ok(Interval::point(v));
        }
        if depth == self.base_depth {
            return Ok(Self::sum_form(&self.base_powers, coeffs));
        }
        let powers = self.powers_at(depth)?;
        Ok(Self::sum_form(&powers, coeffs))
    }

    /// Certified positive |value| for a coefficient vector; None for an
    /// exact zero (rational inputs only: a lacunary value of zero would
    /// mean an integer polynomial relation, and deepening refutes it).
    fn candidate(&mut self, coeffs: Vec<BigInt>, start_depth: u32) -> Result<Option<Candidate>> {
        if self.rational_powers.is_some() {
            let v = self.eval_signed(&coeffs, 0)?;
            if v.lo().is_zero() {
                return Ok(None);
            }
            return Ok(Some(Candidate {
                value: abs_interval(&v),
                coeffs,
                depth: 0,
            }));
        }
        let mut depth = start_depth;
        loop {
            let v = self.eval_signed(&coeffs, depth)?;
            if v.lo().is_positive() || v.hi().is_negative() {
                return Ok(Some(Candidate {
                    value: abs_interval(&v),
                    coeffs,
                    depth,
                }));
            }
            if depth >= self.max_depth {
                return Err(Error::AmbiguousDistance(format!(
                    "linear form at coefficients {coeffs:?} cannot be separated from zero \
                     at the depth cap"
                )));
            }
            depth += 1;
        }
    }

    /// Certified strict order: does a beat b? Negation pairs carry the same
    /// absolute value and resolve lexicographically; any other tie would be
    /// an integer polynomial identity in ζ and cannot occur off the
    /// rational path.
    fn beats(&mut self, a: &mut Candidate, b: &mut Candidate) -> Result<bool> {
        if a.coeffs == b.coeffs {
            return Ok(false);
        }
        if self.rational_powers.is_some() {
            let key_a = (a.value.lo().clone(), height_of(&a.coeffs), a.coeffs.clone());
            let key_b = (b.value.lo().clone(), height_of(&b.coeffs), b.coeffs.clone());
            return Ok(key_a < key_b);
        }
        loop {
            if a.value.hi() < b.value.lo() {
                return Ok(true);
            }
            if b.value.hi() < a.value.lo() {
                return Ok(false);
            }
            if negated(&a.coeffs, &b.coeffs) {
                return Ok(a.coeffs < b.coeffs);
            }
            let depth = a.depth.max(b.depth);
            if depth >= self.max_depth {
                return Err(Error::AmbiguousDistance(format!(
                    "linear-form values at {:?} and {:?} undecided at the depth cap",
                    a.coeffs, b.coeffs
                )));
            }
            for c in [&mut *a, &mut *b] {
                if c.depth <= depth {
                    c.depth = depth + 1;
                    let v = self.eval_signed(&c.coeffs, c.depth)?;
                    c.value = abs_interval(&v);
                }
            }
        }
    }

    fn offer(&mut self, cand: &mut Candidate, incumbent: &mut Option<Candidate>) -> Result<()> {
        let replaced = match incumbent {
            None => true,
            Some(inc) => self.beats(cand, inc)?,
        };
        if replaced {
            *incumbent = Some(cand.clone());
            self.threshold = ceil_scaled_threshold(cand.value.hi());
        }
        Ok(())
    }

    /// Fill coordinate `coord` (x_k first, down to x₁), then complete x₀.
    /// Exact-arithmetic fallback for boxes the fixed-point filter cannot
    /// cover.
    fn recurse(
        &mut self,
        coord: usize,
        coeffs: &mut Vec<BigInt>,
        incumbent: &mut Option<Candidate>,
    ) -> Result<()> {
        if coord == 0 {
            return self.complete(coeffs, incumbent);
        }
        // Prune: with coords > coord fixed, the reachable values are within
        // reach[coord] of the suffix plus a free integer, so the subtree
        // minimum is at least ‖suffix‖ − reach[coord].
        if self.rational_powers.is_none() && coord < self.k as usize {
            if let Some(inc) = &*incumbent {
                let suffix = Self::sum_form(&self.base_powers, coeffs);
                if let Ok(d) = dist_enclosure(&suffix) {
                    if &(d.dist.lo() - &self.reach[coord]) > inc.value.hi() {
                        return Ok(());
                    }
                }
            }
        }
        for xj in -self.x..=self.x {
            coeffs[coord] = BigInt::from(xj);
            self.recurse(coord - 1, coeffs, incumbent)?;
        }
        coeffs[coord] = BigInt::zero();
        Ok(())
    }

    /// Same walk with the fixed-point filter: [r_lo, r_hi] certifies the
    /// scaled suffix Σ_{j>coord} xⱼζʲ·2⁹⁶, and subtrees (or completions)
    /// that provably cannot beat the incumbent are dropped without exact
    /// arithmetic.
    fn recurse_fast(
        &mut self,
        pf: &DualPrefilter,
        coord: usize,
        coeffs: &mut Vec<BigInt>,
        r_lo: i128,
        r_hi: i128,
        incumbent: &mut Option<Candidate>,
    ) -> Result<()> {
        if coord == 0 {
            if let Some(t) = self.threshold {
                if pf.dist_lower(r_lo, r_hi, 0) >= t {
                    return Ok(());
                }
            }
            return self.complete(coeffs, incumbent);
        }
        if let Some(t) = self.threshold {
            if pf.dist_lower(r_lo, r_hi, pf.reach[coord]) >= t {
                return Ok(());
            }
        }
        for xj in -self.x..=self.x {
            coeffs[coord] = BigInt::from(xj);
            let (t_lo, t_hi) = pf.term(coord - 1, xj);
            self.recurse_fast(pf, coord - 1, coeffs, r_lo + t_lo, r_hi + t_hi, incumbent)?;
        }
        coeffs[coord] = BigInt::zero();
        Ok(())
    }

    fn complete(
        &mut self,
        coeffs: &mut Vec<BigInt>,
        incumbent: &mut Option<Candidate>,
    ) -> Result<()> {
        // coeffs[0] is zero here, so the form sums to the inner suffix.
        let (center, suffix) = if self.rational_powers.is_some() {
            let v = self.eval_signed_inner(coeffs)?;
            (-round_half_even(&v), None)
        } else {
            let s = Self::sum_form(&self.base_powers, coeffs);
            let c = -round_half_even(&s.midpoint());
            (c, Some(s))
        };
        let lo = BigInt::from(-self.x);
        let hi = BigInt::from(self.x);
        let mut tried: Vec<BigInt> = Vec::with_capacity(3);
        for dx in [0i8, -1, 1] {
            let x0 = (&center + BigInt::from(dx)).clamp(lo.clone(), hi.clone());
            if tried.contains(&x0) {
                continue;
            }
            tried.push(x0.clone());
            if x0.is_zero() && coeffs[1..].iter().all(|c| c.is_zero()) {
                continue; // the all-zero vector is not a form
            }
            coeffs[0] = x0;
            // Cheap certified reject against the incumbent before the full
            // candidate machinery.
            if let (Some(s), Some(inc)) = (&suffix, incumbent.as_ref()) {
                let v = s.add(&Interval::point(BigRat::from_integer(coeffs[0].clone())));
                let a = abs_interval(&v);
                if a.lo() > inc.value.hi() {
                    continue;
                }
            }
            if let Some(mut cand) = self.candidate(coeffs.clone(), self.base_depth)? {
                self.offer(&mut cand, incumbent)?;
            }
        }
        coeffs[0] = BigInt::zero();
        Ok(())
    }

    /// Exact signed value of Σ_{j≥1} ζʲxⱼ on the rational path.
    fn eval_signed_inner(&mut self, coeffs: &[BigInt]) -> Result<BigRat> {
        let pows = self.rational_powers.as_ref().expect("rational path");
        let mut v = BigRat::zero();
        for (j, p) in pows.iter().enumerate() {
            if !coeffs[j + 1].is_zero() {
                v += p * BigRat::from_integer(coeffs[j + 1].clone());
            }
        }
        Ok(v)
    }

    fn scan_range(&mut self, xk_lo: i64, xk_hi: i64) -> Result<Option<Candidate>> {
        let mut incumbent = None;
        let mut coeffs = vec![BigInt::zero(); self.k as usize + 1];
        let pf = self.prefilter.clone();
        let top = self.k as usize;
        for xk in xk_lo..=xk_hi {
            coeffs[top] = BigInt::from(xk);
            match &pf {
                Some(pf) => {
                    let (t_lo, t_hi) = pf.term(top - 1, xk);
                    self.recurse_fast(pf, top - 1, &mut coeffs, t_lo, t_hi, &mut incumbent)?;
                }
                None if top == 1 => self.complete(&mut coeffs, &mut incumbent)?,
                None => self.recurse(top - 1, &mut coeffs, &mut incumbent)?,
            }
        }
        Ok(incumbent)
    }

    /// Canonical re-evaluation of a winner: deepen from the base policy until
    /// the enclosure is both sign-definite and relatively tight. Depends only
    /// on the coefficients, so reported values are identical for every
    /// worker count.
    fn finalize(&mut self, coeffs: Vec<BigInt>) -> Result<Candidate> {
        let mut cand = self
            .candidate(coeffs, self.base_depth)?
            .ok_or_else(|| Error::Internal("winner evaluated to an exact zero".into()))?;
        if self.rational_powers.is_some() {
            return Ok(cand);
        }
        let eight = BigRat::from_integer(BigInt::from(8u8));
        while &(cand.value.width() * &eight) > cand.value.lo() {
            if cand.depth >= self.max_depth {
                return Err(Error::PrecisionExhausted(
                    "cannot tighten the winning linear-form value".into(),
                ));
            }
            cand.depth += 1;
            let v = self.eval_signed(&cand.coeffs, cand.depth)?;
            cand.value = abs_interval(&v);
        }
        Ok(cand)
    }
}

fn box_count(k: u32, x: u64) -> Option<u128> {
    let side = 2u128.checked_mul(x as u128)?.checked_add(1)?;
    let mut acc = 1u128;
    for _ in 0..k {
        acc = acc.checked_mul(side)?;
    }
    Some(acc)
}

pub fn scan_linear_form_capped(
    z: &RealHandle,
    k: u32,
    x: u64,
    cap: u64,
    workers: usize,
) -> Result<LinearFormHit> {
    if k < 1 || x < 1 {
        return Err(Error::Precondition("need k >= 1 and X >= 1".into()));
    }
    let boxes = box_count(k, x);
    match boxes {
        Some(b) if b <= cap as u128 => {}
        _ => {
            return Err(Error::BoxTooLarge {
                boxes: boxes.map_or_else(|| "overflow".into(), |b| b.to_string()),
                cap,
            })
        }
    }
    // Partition on x_k; each worker runs an independent incumbent, merged in
    // range order under the same certified total order.
    let span = 2 * x; // x_k ∈ [-X, X] shifted to [0, 2X]
    let parts = scan_partitioned(0, span, workers, |lo, hi| {
        let mut sc = FormScanner::new(z, k, x)?;
        sc.scan_range(lo as i64 - x as i64, hi as i64 - x as i64)
    })?;
    let mut merger = FormScanner::new(z, k, x)?;
    let mut best: Option<Candidate> = None;
    for part in parts.into_iter().flatten() {
        let mut cand = part;
        match &mut best {
            None => best = Some(cand),
            Some(b) => {
                if merger.beats(&mut cand, b)? {
                    best = Some(cand);
                }
            }
        }
    }
    let winner = best.ok_or_else(|| Error::Internal("empty enumeration".into()))?;
    let final_cand = merger.finalize(winner.coeffs)?;
    Ok(LinearFormHit {
        height: height_of(&final_cand.coeffs),
        coeffs: final_cand.coeffs,
        value: final_cand.value,
    })
}

pub fn scan_linear_form(z: &RealHandle, k: u32, x: u64, workers: usize) -> Result<LinearFormHit> {
    scan_linear_form_capped(z, k, x, DEFAULT_BOX_CAP, workers)
}

/// Paired finite-scale estimates for the dual exponents: the asymptotic
/// variant aggregates by running maximum, the uniform variant by running
/// minimum of the same record envelope (the per-height box minimum is
/// already the envelope "best below X").
#[derive(Clone, Debug)]
pub struct WEstimate {
    pub w: ExponentReport,
    pub w_hat: ExponentReport,
}

pub fn estimate_w(
    z: &RealHandle,
    k: u32,
    heights: &[u64],
    workers: usize,
) -> Result<WEstimate> {
    if heights.is_empty() {
        return Err(Error::Precondition("at least one height is required".into()));
    }
    if heights[0] < 2 {
        return Err(Error::Precondition("heights must be at least 2".into()));
    }
    for w in heights.windows(2) {
        if w[0] >= w[1] {
            return Err(Error::Precondition("heights must be strictly ascending".into()));
        }
    }
    if z.is_rational() {
        let mut w = ExponentReport::rational_convention(ExponentKind::W, k);
        w.caveat = "rational input: dual exponents flagged, not computed (finite exact \
                    structure collapses the samples)"
            .into();
        let mut w_hat = ExponentReport::rational_convention(ExponentKind::WHat, k);
        w_hat.caveat = w.caveat.clone();
        return Ok(WEstimate { w, w_hat });
    }
    let mut samples = Vec::with_capacity(heights.len());
    for &h in heights {
        let hit = scan_linear_form(z, k, h, workers)?;
        let nu = -log2_rat(&hit.value.midpoint()) / (h as f64).log2();
        samples.push(Sample {
            scale: BigUint::from(h),
            value: nu,
            witness: Witness::Coeffs(hit.coeffs),
        });
    }
    let max = samples.iter().map(|s| s.value).fold(f64::NEG_INFINITY, f64::max);
    let min = samples.iter().map(|s| s.value).fold(f64::INFINITY, f64::min);
    let w = ExponentReport {
        kind: ExponentKind::W,
        k,
        samples: samples.clone(),
        extrapolated: max,
        tolerance: kind_tolerance(ExponentKind::W),
        caveat: "finite-scale evidence; asymptotic aggregation is the maximum sample".into(),
        flagged_rational: false,
    };
    let w_hat = ExponentReport {
        kind: ExponentKind::WHat,
        k,
        samples,
        extrapolated: min,
        tolerance: kind_tolerance(ExponentKind::WHat),
        caveat: "finite-scale evidence; uniform aggregation is the minimum sample of the \
                 record envelope"
            .into(),
        flagged_rational: false,
    };
    Ok(WEstimate { w, w_hat })
}
