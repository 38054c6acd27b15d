//! Factories for explicit lacunary numbers with prescribed approximation
//! exponents, and digit-set checks on their base-b expansions. Certificates
//! record what is proven about a constructed number (exact values or two-sided
//! brackets) and keep conjectured refinements separate via the `proven` flag.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::exactnum::{
    rat, BigRat, ExponentRule, LacunarySpec, RatioLimit, RealHandle,
};
use crate::exponents::{ExponentKind, FormulaValue, RatOrInf};

/// Claim that every base-b digit of the number lies in `allowed`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MembershipClaim {
    pub base: u32,
    /// Sorted, deduplicated digit set.
    pub allowed: Vec<u32>,
}

impl MembershipClaim {
    fn new(base: u32, digits: &[u32]) -> Self {
        let set: BTreeSet<u32> = digits.iter().copied().collect();
        MembershipClaim {
            base,
            allowed: set.into_iter().collect(),
        }
    }
}

/// One predicted exponent together with the mechanism that forces it.
/// `proven: false` marks a conjectured refinement accompanying a proven
/// bracket; it never stands alone.
#[derive(Clone, Debug)]
pub struct PredictedExponent {
    pub kind: ExponentKind,
    pub k: u32,
    pub value: FormulaValue,
    pub source: String,
    pub proven: bool,
}

#[derive(Clone, Debug)]
pub struct ConstructionCertificate {
    pub handle: RealHandle,
    pub label: String,
    /// Declared limit of aₙ₊₁/aₙ; regime dispatch is keyed on it.
    pub ratio: RatioLimit,
    pub predicted: Vec<PredictedExponent>,
    pub membership: Option<MembershipClaim>,
}

impl ConstructionCertificate {
    /// Proven predictions for a given exponent kind and order.
    pub fn proven_value(&self, kind: ExponentKind, k: u32) -> Option<&FormulaValue> {
        self.predicted
            .iter()
            .find(|p| p.kind == kind && p.k == k && p.proven)
            .map(|p| &p.value)
    }
}

fn pred(
    kind: ExponentKind,
    k: u32,
    value: FormulaValue,
    source: &str,
    proven: bool,
) -> PredictedExponent {
    PredictedExponent {
        kind,
        k,
        value,
        source: source.into(),
        proven,
    }
}

/// Scaled ternary series 2·Σ 3^(−⌈α(1+τ)ⁿ⌉): all base-3 digits are 0 or 2,
/// and the gap ratio of the exponents pins the order-one exponent to τ.
/// τ = ∞ switches to the doubly exponential rule aₙ = 2^(2ⁿ).
pub fn bugeaud_number(alpha: &BigRat, tau: &RatOrInf) -> Result<ConstructionCertificate> {
    if !alpha.is_positive() {
        return Err(Error::Precondition("alpha must be positive".into()));
    }
    let (rule, label) = match tau {
        RatOrInf::Infinite => (
            ExponentRule::DoublyExponential,
            "b=3 c=2 doubly-exponential (alpha ignored)".to_string(),
        ),
        RatOrInf::Finite(t) => {
            if t < &BigRat::one() {
                return Err(Error::Precondition("tau must be at least 1".into()));
            }
            let ratio = t + BigRat::one();
            (
                ExponentRule::GeometricCeil {
                    alpha: alpha.clone(),
                    ratio: ratio.clone(),
                },
                format!("b=3 c=2 geometric-ceil alpha={alpha} ratio={ratio}"),
            )
        }
    };
    let spec = LacunarySpec::new(3, 2, rule)?;
    let ratio = spec.ratio_limit();
    let predicted = vec![
        pred(
            ExponentKind::Lambda,
            1,
            FormulaValue::Exact(tau.clone()),
            "order-one exponent equals the exponent gap ratio minus one",
            true,
        ),
        pred(
            ExponentKind::LambdaHat,
            1,
            FormulaValue::Exact(RatOrInf::from_int(1)),
            "uniform order-one exponent is 1 for every irrational",
            true,
        ),
    ];
    Ok(ConstructionCertificate {
        handle: RealHandle::lacunary(spec),
        label,
        ratio,
        predicted,
        membership: Some(MembershipClaim::new(3, &[0, 2])),
    })
}

/// Lacunary series Σ b^(−aₙ) (coefficient 1, any base) or 2·Σ 3^(−aₙ)
/// (the digit-restricted variant) whose exponent ratio tends to k(ρ+1).
/// Predictions follow the growth regime: ρ ≥ 1 pins λ_k = ρ exactly; for
/// ρ ∈ (0,1) only the bracket max{1/k, ρ} ≤ λ_k ≤ 1 is proven, and the
/// conjectured exact value max{ρ, 1/k} is carried unproven alongside it.
pub fn meinsatz_number(
    b: u32,
    coeff: u32,
    k: u32,
    rho: &RatOrInf,
    rule: Option<ExponentRule>,
) -> Result<ConstructionCertificate> {
    if k < 2 {
        return Err(Error::Precondition("need k >= 2".into()));
    }
    if let RatOrInf::Finite(r) = rho {
        if !r.is_positive() {
            return Err(Error::Precondition("rho must be positive".into()));
        }
    }
    if coeff != 1 && (b != 3 || coeff != 2) {
        return Err(Error::InvalidSpec(
            "scaled variants are only available as base 3 with coefficient 2; use \
             coefficient 1 for other bases"
                .into(),
        ));
    }
    let kq = BigRat::from_integer(BigInt::from(k));
    let required = match rho {
        RatOrInf::Infinite => RatioLimit::Infinite,
        RatOrInf::Finite(r) => RatioLimit::Finite(&kq * (r + BigRat::one())),
    };
    let rule = match rule {
        Some(r) => r,
        None => match &required {
            RatioLimit::Infinite => ExponentRule::DoublyExponential,
            RatioLimit::Finite(r) => ExponentRule::GeometricCeil {
                alpha: BigRat::one(),
                ratio: r.clone(),
            },
            RatioLimit::Undeclared => unreachable!(),
        },
    };
    if coeff != 1 && matches!(rule, ExponentRule::Explicit { .. }) {
        return Err(Error::InvalidSpec(
            "the digit-restricted variant needs a ceiling growth rule; explicit \
             sequences are supported for coefficient 1 only"
                .into(),
        ));
    }
    let spec = LacunarySpec::new(b, coeff, rule)?;
    let declared = spec.ratio_limit();
    match (&declared, &required) {
        (RatioLimit::Undeclared, _) => {
            return Err(Error::InvalidSpec(
                "an explicit exponent rule must declare its limit ratio".into(),
            ))
        }
        (d, r) if d == r => {}
        (d, r) => {
            return Err(Error::Precondition(format!(
                "exponent growth ratio {} does not match the required k(rho+1) = {}",
                ratio_str(d),
                ratio_str(r)
            )))
        }
    }

    let mut predicted = Vec::new();
    match rho {
        RatOrInf::Infinite => {
            predicted.push(pred(
                ExponentKind::Lambda,
                k,
                FormulaValue::Exact(RatOrInf::Infinite),
                "degree-k exponent pinned by the gap-ratio growth (fast regime)",
                true,
            ));
            predicted.push(pred(
                ExponentKind::Lambda,
                1,
                FormulaValue::Exact(RatOrInf::Infinite),
                "chain monotonicity: the order-one exponent dominates lambda_k",
                true,
            ));
        }
        RatOrInf::Finite(r) => {
            let lam1 = &kq * r + &kq - BigRat::one();
            if r >= &BigRat::one() {
                predicted.push(pred(
                    ExponentKind::Lambda,
                    k,
                    FormulaValue::Exact(RatOrInf::Finite(r.clone())),
                    "degree-k exponent pinned by the gap-ratio growth (fast regime)",
                    true,
                ));
            } else {
                let lo = rat(1, k as i64).max(r.clone());
                predicted.push(pred(
                    ExponentKind::Lambda,
                    k,
                    FormulaValue::Bracket {
                        lo,
                        hi: BigRat::one(),
                    },
                    "slow-growth regime: max{1/k, rho} <= lambda_k <= 1",
                    true,
                ));
                predicted.push(pred(
                    ExponentKind::Lambda,
                    k,
                    FormulaValue::Exact(RatOrInf::Finite(rat(1, k as i64).max(r.clone()))),
                    "conjectured exact value max{rho, 1/k}; open in the slow regime",
                    false,
                ));
            }
            if coeff != 1 {
                predicted.push(pred(
                    ExponentKind::Lambda,
                    1,
                    FormulaValue::Exact(RatOrInf::Finite(lam1)),
                    "order-one exponent equals the exponent gap ratio minus one",
                    true,
                ));
            } else if r > &BigRat::one() {
                predicted.push(pred(
                    ExponentKind::Lambda,
                    1,
                    FormulaValue::Exact(RatOrInf::Finite(lam1)),
                    "spectrum identity inverted: lambda_1 = k*lambda_k + k - 1 once \
                     lambda_k > 1",
                    true,
                ));
            }
        }
    }
    let lamhat_proven = match rho {
        RatOrInf::Infinite => true,
        RatOrInf::Finite(r) => {
            if coeff == 1 {
                r >= &rat(1, k as i64)
            } else {
                r > &BigRat::one()
            }
        }
    };
    if lamhat_proven {
        let source = if coeff == 1 {
            "uniform degree-k exponent collapses to 1/k once rho >= 1/k"
        } else {
            "lambda_k > 1 forces the uniform degree-k exponent down to 1/k"
        };
        predicted.push(pred(
            ExponentKind::LambdaHat,
            k,
            FormulaValue::Exact(RatOrInf::Finite(rat(1, k as i64))),
            source,
            true,
        ));
    }
    let membership = Some(MembershipClaim::new(b, &[0, coeff]));
    Ok(ConstructionCertificate {
        handle: RealHandle::lacunary(spec),
        label: format!(
            "b={b} c={coeff} k={k} rho={rho} ratio={}",
            ratio_str(&declared)
        ),
        ratio: declared,
        predicted,
        membership,
    })
}

fn ratio_str(r: &RatioLimit) -> String {
    match r {
        RatioLimit::Finite(v) => v.to_string(),
        RatioLimit::Infinite => "inf".into(),
        RatioLimit::Undeclared => "undeclared".into(),
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MembershipVerdict {
    pub member: bool,
    /// Fractional digit positions examined (stops at the first offender).
    pub checked: u64,
    /// 1-based position and value of the first digit outside the set.
    pub first_offender: Option<(u64, u32)>,
}

/// Checks the first `depth` base-b fractional digits of the canonical
/// expansion against `allowed`. Lacunary numbers in a matching base are
/// decided structurally (digits are 0 or the coefficient by construction);
/// rationals are expanded by long division of the fractional part. Dual
/// representations (…0222… vs …1000…) are not searched.
pub fn digit_membership(
    z: &RealHandle,
    base: u32,
    allowed: &[u32],
    depth: u64,
) -> Result<MembershipVerdict> {
    if base < 2 {
        return Err(Error::Precondition("base must be at least 2".into()));
    }
    let allowed: BTreeSet<u32> = allowed.iter().copied().collect();
    if let Some(spec) = z.lacunary_spec() {
        if spec.base != base {
            return Err(Error::Precondition(format!(
                "base mismatch: the expansion is in base {}",
                spec.base
            )));
        }
        let zero_ok = allowed.contains(&0);
        let coeff_ok = allowed.contains(&spec.coeff);
        if zero_ok && coeff_ok {
            return Ok(MembershipVerdict {
                member: true,
                checked: depth,
                first_offender: None,
            });
        }
        let exps = spec.exponents_upto(depth);
        let mut offender: Option<(u64, u32)> = None;
        if !coeff_ok {
            if let Some(&a) = exps.first() {
                offender = Some((a, spec.coeff));
            }
        }
        if !zero_ok {
            // First position in [1, depth] that is not an exponent.
            let mut m = 1u64;
            for &a in &exps {
                if a > m {
                    break;
                }
                m = a + 1;
            }
            if m <= depth {
                let cand = (m, 0);
                offender = match offender {
                    Some(o) if o.0 <= m => Some(o),
                    _ => Some(cand),
                };
            }
        }
        return Ok(match offender {
            Some((pos, digit)) => MembershipVerdict {
                member: false,
                checked: pos,
                first_offender: Some((pos, digit)),
            },
            None => MembershipVerdict {
                member: true,
                checked: depth,
                first_offender: None,
            },
        });
    }
    let r = z
        .rational_value()
        .ok_or_else(|| Error::Internal("handle is neither rational nor lacunary".into()))?;
    let mut frac = r.abs().fract();
    let b = BigRat::from_integer(BigInt::from(base));
    let zero_ok = allowed.contains(&0);
    for m in 1..=depth {
        if frac.is_zero() {
            // Terminated: every remaining digit is 0.
            if zero_ok {
                break;
            }
            return Ok(MembershipVerdict {
                member: false,
                checked: m,
                first_offender: Some((m, 0)),
            });
        }
        let scaled = &frac * &b;
        let digit = scaled
            .trunc()
            .to_integer()
            .to_u32()
            .expect("digit below the base");
        frac = scaled.fract();
        if !allowed.contains(&digit) {
            return Ok(MembershipVerdict {
                member: false,
                checked: m,
                first_offender: Some((m, digit)),
            });
        }
    }
    Ok(MembershipVerdict {
        member: true,
        checked: depth,
        first_offender: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactnum::rat_int;

    fn find<'a>(
        cert: &'a ConstructionCertificate,
        kind: ExponentKind,
        k: u32,
        proven: bool,
    ) -> Option<&'a PredictedExponent> {
        cert.predicted
            .iter()
            .find(|p| p.kind == kind && p.k == k && p.proven == proven)
    }

    #[test]
    fn ternary_family_examples() {
        let c = bugeaud_number(&rat_int(1), &RatOrInf::from_int(3)).unwrap();
        let spec = c.handle.lacunary_spec().unwrap();
        assert_eq!(spec.exponents_upto(100), vec![4, 16, 64]);
        assert_eq!(
            c.proven_value(ExponentKind::Lambda, 1),
            Some(&FormulaValue::Exact(RatOrInf::from_int(3)))
        );
        assert_eq!(
            c.proven_value(ExponentKind::LambdaHat, 1),
            Some(&FormulaValue::Exact(RatOrInf::from_int(1)))
        );
        assert_eq!(c.membership, Some(MembershipClaim::new(3, &[0, 2])));
        assert_eq!(c.ratio, RatioLimit::Finite(rat_int(4)));

        let boundary = bugeaud_number(&rat_int(1), &RatOrInf::from_int(1)).unwrap();
        let spec = boundary.handle.lacunary_spec().unwrap();
        assert_eq!(spec.exponents_upto(20), vec![2, 4, 8, 16]);
        assert_eq!(
            boundary.proven_value(ExponentKind::Lambda, 1),
            Some(&FormulaValue::Exact(RatOrInf::from_int(1)))
        );

        let liou = bugeaud_number(&rat_int(1), &RatOrInf::Infinite).unwrap();
        assert_eq!(liou.ratio, RatioLimit::Infinite);
        assert_eq!(
            liou.proven_value(ExponentKind::Lambda, 1),
            Some(&FormulaValue::Exact(RatOrInf::Infinite))
        );
    }

    #[test]
    fn ternary_family_preconditions() {
        assert!(bugeaud_number(&rat_int(0), &RatOrInf::from_int(2)).is_err());
        assert!(bugeaud_number(&rat_int(1), &RatOrInf::Finite(rat(1, 2))).is_err());
    }

    #[test]
    fn general_base_fast_regime() {
        let c = meinsatz_number(2, 1, 2, &RatOrInf::from_int(1), None).unwrap();
        let spec = c.handle.lacunary_spec().unwrap();
        assert_eq!(spec.exponents_upto(100), vec![4, 16, 64]);
        assert_eq!(
            c.proven_value(ExponentKind::Lambda, 2),
            Some(&FormulaValue::Exact(RatOrInf::from_int(1)))
        );
        assert_eq!(
            c.proven_value(ExponentKind::LambdaHat, 2),
            Some(&FormulaValue::Exact(RatOrInf::Finite(rat(1, 2))))
        );
        // rho = 1 does not reach the strict regime that pins lambda_1.
        assert!(c.proven_value(ExponentKind::Lambda, 1).is_none());
        assert_eq!(c.membership, Some(MembershipClaim::new(2, &[0, 1])));
    }

    #[test]
    fn digit_restricted_fast_regime() {
        let c = meinsatz_number(3, 2, 2, &RatOrInf::from_int(2), None).unwrap();
        assert_eq!(c.ratio, RatioLimit::Finite(rat_int(6)));
        assert_eq!(
            c.proven_value(ExponentKind::Lambda, 2),
            Some(&FormulaValue::Exact(RatOrInf::from_int(2)))
        );
        assert_eq!(
            c.proven_value(ExponentKind::Lambda, 1),
            Some(&FormulaValue::Exact(RatOrInf::from_int(5)))
        );
        assert_eq!(
            c.proven_value(ExponentKind::LambdaHat, 2),
            Some(&FormulaValue::Exact(RatOrInf::Finite(rat(1, 2))))
        );
        let v = digit_membership(&c.handle, 3, &[0, 2], 2000).unwrap();
        assert!(v.member);
        assert_eq!(v.checked, 2000);
    }

    #[test]
    fn slow_regime_bracket_and_conjecture() {
        let rule = ExponentRule::GeometricCeil {
            alpha: rat_int(1),
            ratio: rat(9, 2),
        };
        let c =
            meinsatz_number(2, 1, 3, &RatOrInf::Finite(rat(1, 2)), Some(rule)).unwrap();
        match c.proven_value(ExponentKind::Lambda, 3) {
            Some(FormulaValue::Bracket { lo, hi }) => {
                assert_eq!(lo, &rat(1, 2));
                assert_eq!(hi, &rat_int(1));
            }
            other => panic!("expected a bracket, got {other:?}"),
        }
        let conj = find(&c, ExponentKind::Lambda, 3, false).unwrap();
        assert_eq!(
            conj.value,
            FormulaValue::Exact(RatOrInf::Finite(rat(1, 2)))
        );
        // rho = 1/2 >= 1/3, so the uniform value is still pinned.
        assert_eq!(
            c.proven_value(ExponentKind::LambdaHat, 3),
            Some(&FormulaValue::Exact(RatOrInf::Finite(rat(1, 3))))
        );
    }

    #[test]
    fn infinite_rho_chain() {
        let c = meinsatz_number(2, 1, 2, &RatOrInf::Infinite, None).unwrap();
        assert_eq!(c.ratio, RatioLimit::Infinite);
        assert_eq!(
            c.proven_value(ExponentKind::Lambda, 2),
            Some(&FormulaValue::Exact(RatOrInf::Infinite))
        );
        assert_eq!(
            c.proven_value(ExponentKind::Lambda, 1),
            Some(&FormulaValue::Exact(RatOrInf::Infinite))
        );
        assert_eq!(
            c.proven_value(ExponentKind::LambdaHat, 2),
            Some(&FormulaValue::Exact(RatOrInf::Finite(rat(1, 2))))
        );
    }

    #[test]
    fn construction_rejections() {
        // Declared ratio must equal k(rho+1) = 4.
        let wrong = ExponentRule::GeometricCeil {
            alpha: rat_int(1),
            ratio: rat_int(5),
        };
        assert!(matches!(
            meinsatz_number(2, 1, 2, &RatOrInf::from_int(1), Some(wrong)),
            Err(Error::Precondition(_))
        ));
        let undeclared = ExponentRule::Explicit {
            exps: vec![4, 16, 64],
            extend_ratio: None,
        };
        assert!(matches!(
            meinsatz_number(2, 1, 2, &RatOrInf::from_int(1), Some(undeclared)),
            Err(Error::InvalidSpec(_))
        ));
        assert!(matches!(
            meinsatz_number(5, 3, 2, &RatOrInf::from_int(1), None),
            Err(Error::InvalidSpec(_))
        ));
        assert!(meinsatz_number(2, 1, 1, &RatOrInf::from_int(1), None).is_err());
        let finite_rule = ExponentRule::GeometricCeil {
            alpha: rat_int(1),
            ratio: rat_int(4),
        };
        assert!(matches!(
            meinsatz_number(2, 1, 2, &RatOrInf::Infinite, Some(finite_rule)),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn regime_dispatch_is_total() {
        for k in 2..=4u32 {
            for (p, q) in [(1i64, 4i64), (1, 3), (1, 2), (3, 4), (1, 1), (3, 2), (3, 1)] {
                let rho = RatOrInf::Finite(rat(p, q));
                let c = meinsatz_number(2, 1, k, &rho, None).unwrap();
                let proven: Vec<_> = c
                    .predicted
                    .iter()
                    .filter(|e| e.kind == ExponentKind::Lambda && e.k == k && e.proven)
                    .collect();
                assert_eq!(proven.len(), 1, "k={k} rho={p}/{q}");
                let exact_regime = rat(p, q) >= rat_int(1);
                match &proven[0].value {
                    FormulaValue::Exact(_) => assert!(exact_regime),
                    FormulaValue::Bracket { .. } => assert!(!exact_regime),
                    other => panic!("unexpected prediction {other:?}"),
                }
                let hat = c.proven_value(ExponentKind::LambdaHat, k).is_some();
                assert_eq!(hat, rat(p, q) >= rat(1, k as i64), "k={k} rho={p}/{q}");
            }
        }
    }

    #[test]
    fn rational_digit_checks() {
        let half = RealHandle::rational(rat(1, 2));
        let v = digit_membership(&half, 3, &[0, 2], 5).unwrap();
        assert!(!v.member);
        assert_eq!(v.first_offender, Some((1, 1)));
        assert_eq!(v.checked, 1);

        let quarter = RealHandle::rational(rat(1, 4));
        let v = digit_membership(&quarter, 2, &[0, 1], 8).unwrap();
        assert!(v.member);
        assert_eq!(v.checked, 8);

        // Canonical expansion of 1/3 in base 3 is 0.1, not 0.0222…
        let third = RealHandle::rational(rat(1, 3));
        let v = digit_membership(&third, 3, &[0, 2], 4).unwrap();
        assert_eq!(v.first_offender, Some((1, 1)));

        // Terminating expansion with 0 disallowed.
        let v = digit_membership(&half, 2, &[1], 4).unwrap();
        assert!(!v.member);
        assert_eq!(v.first_offender, Some((2, 0)));
    }

    #[test]
    fn lacunary_digit_checks() {
        let spec = LacunarySpec::new(
            2,
            1,
            ExponentRule::GeometricCeil {
                alpha: rat_int(1),
                ratio: rat_int(4),
            },
        )
        .unwrap();
        let z = RealHandle::lacunary(spec);
        let v = digit_membership(&z, 2, &[0, 1], 1 << 20).unwrap();
        assert!(v.member);
        assert!(matches!(
            digit_membership(&z, 3, &[0, 2], 10),
            Err(Error::Precondition(_))
        ));
        // First digits are zeros (a₁ = 4), so banning 0 offends at position 1.
        let v = digit_membership(&z, 2, &[1], 10).unwrap();
        assert_eq!(v.first_offender, Some((1, 0)));
        // Banning the coefficient offends at the first exponent.
        let v = digit_membership(&z, 2, &[0], 10).unwrap();
        assert_eq!(v.first_offender, Some((4, 1)));
    }
}
