use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive};

use crate::error::{Error, Result};
use crate::exactnum::interval::BigRat;

/// Exponent sequence (aₙ) of a lacunary series Σ c·b^(−aₙ), 1-indexed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ExponentRule {
    /// Finite list, optionally extended forever by aₙ₊₁ = ⌈aₙ·ratio⌉.
    Explicit {
        exps: Vec<u64>,
        extend_ratio: Option<BigRat>,
    },
    /// aₙ = ⌈alpha·ratioⁿ⌉.
    GeometricCeil { alpha: BigRat, ratio: BigRat },
    /// aₙ = 2^(2ⁿ); the hyper-exponential rule used for infinite exponents.
    DoublyExponential,
}

/// ζ = c·Σ b^(−aₙ) with b ≥ 2 and 1 ≤ c ≤ b−1.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LacunarySpec {
    pub base: u32,
    pub coeff: u32,
    pub rule: ExponentRule,
}

/// Declared limit of aₙ₊₁/aₙ, used for regime dispatch in certificates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RatioLimit {
    Finite(BigRat),
    Infinite,
    Undeclared,
}

impl LacunarySpec {
    pub fn new(base: u32, coeff: u32, rule: ExponentRule) -> Result<Self> {
        if base < 2 {
            return Err(Error::InvalidSpec("base must be at least 2".into()));
        }
        if coeff < 1 || coeff > base - 1 {
            return Err(Error::InvalidSpec(format!(
                "coefficient must lie in [1, {}]",
                base - 1
            )));
        }
        match &rule {
            ExponentRule::Explicit { exps, extend_ratio } => {
                if exps.is_empty() {
                    return Err(Error::InvalidSpec("empty exponent list".into()));
                }
                if exps[0] == 0 {
                    return Err(Error::InvalidSpec("exponents must be positive".into()));
                }
                if !exps.windows(2).all(|w| w[0] < w[1]) {
                    return Err(Error::InvalidSpec(
                        "exponent list must be strictly increasing".into(),
                    ));
                }
                if let Some(r) = extend_ratio {
                    if r <= &BigRat::one() {
                        return Err(Error::InvalidSpec(
                            "extension ratio must exceed 1".into(),
                        ));
                    }
                }
            }
            ExponentRule::GeometricCeil { alpha, ratio } => {
                if !alpha.is_positive() {
                    return Err(Error::InvalidSpec("alpha must be positive".into()));
                }
                if ratio <= &BigRat::one() {
                    return Err(Error::InvalidSpec("ratio must exceed 1".into()));
                }
            }
            ExponentRule::DoublyExponential => {}
        }
        let spec = LacunarySpec { base, coeff, rule };
        // Strict increase is required by every downstream statement. Ceiling
        // rules can flatten early terms for small alpha; reject on sight.
        let mut prev: Option<u64> = None;
        for n in 1..=16usize {
            match spec.exponent(n) {
                Ok(a) => {
                    if let Some(p) = prev {
                        if a <= p {
                            return Err(Error::InvalidSpec(format!(
                                "exponent sequence not strictly increasing at n={n} ({p} then {a})"
                            )));
                        }
                    }
                    prev = Some(a);
                }
                Err(_) => break, // representability limit, not a spec defect
            }
        }
        Ok(spec)
    }

    /// aₙ for n ≥ 1. Errors when the rule is exhausted or the value does not
    /// fit in a machine word (nothing that large is representable anyway).
    pub fn exponent(&self, n: usize) -> Result<u64> {
        if n == 0 {
            return Err(Error::Precondition("exponent index starts at 1".into()));
        }
        match &self.rule {
            ExponentRule::Explicit { exps, extend_ratio } => {
                if n <= exps.len() {
                    return Ok(exps[n - 1]);
                }
                let ratio = extend_ratio.as_ref().ok_or_else(|| {
                    Error::PrecisionExhausted(format!(
                        "explicit exponent list has {} terms and no extension ratio",
                        exps.len()
                    ))
                })?;
                let mut a = BigInt::from(*exps.last().unwrap());
                for _ in exps.len()..n {
                    let next = (BigRat::from_integer(a) * ratio).ceil().to_integer();
                    a = next;
                }
                big_to_u64(&a)
            }
            ExponentRule::GeometricCeil { alpha, ratio } => {
                let mut p = alpha.clone();
                for _ in 0..n {
                    p *= ratio;
                }
                big_to_u64(&p.ceil().to_integer())
            }
            ExponentRule::DoublyExponential => {
                if n > 5 {
                    return Err(Error::PrecisionExhausted(format!(
                        "doubly exponential term a_{n} = 2^(2^{n}) exceeds u64"
                    )));
                }
                Ok(1u64 << (1u32 << n))
            }
        }
    }

    pub fn ratio_limit(&self) -> RatioLimit {
        match &self.rule {
            ExponentRule::Explicit { extend_ratio, .. } => match extend_ratio {
                Some(r) => RatioLimit::Finite(r.clone()),
                None => RatioLimit::Undeclared,
            },
            ExponentRule::GeometricCeil { ratio, .. } => RatioLimit::Finite(ratio.clone()),
            ExponentRule::DoublyExponential => RatioLimit::Infinite,
        }
    }

    /// Indices n with aₙ ≤ limit, in order.
    pub fn exponents_upto(&self, limit: u64) -> Vec<u64> {
        let mut out = Vec::new();
        for n in 1.. {
            match self.exponent(n) {
                Ok(a) if a <= limit => out.push(a),
                _ => break,
            }
        }
        out
    }
}

fn big_to_u64(v: &BigInt) -> Result<u64> {
    v.to_u64().ok_or_else(|| {
        Error::PrecisionExhausted("exponent exceeds the representable range".into())
    })
}
