//! Parsers for the small input grammars: number recipes, scale lists,
//! rationals. Every parse failure is an invalid-config error (exit 3).

use std::collections::BTreeMap;

use num_bigint::BigUint;
use veronese::construct::{bugeaud_number, meinsatz_number, ConstructionCertificate};
use veronese::exactnum::{BigRat, ExponentRule, LacunarySpec, Precision, RealHandle};
use veronese::exponents::RatOrInf;
use veronese::Error;

/// A parsed number recipe. Construction recipes also carry the certificate;
/// plain expansion recipes only the handle.
pub struct ParsedNumber {
    pub token: String,
    pub handle: RealHandle,
    pub certificate: Option<ConstructionCertificate>,
}

pub fn parse_rat(s: &str) -> Result<BigRat, Error> {
    s.parse::<BigRat>()
        .map_err(|e| Error::InvalidSpec(format!("bad rational '{s}': {e}")))
}

pub fn parse_rat_or_inf(s: &str) -> Result<RatOrInf, Error> {
    match s {
        "inf" | "infinity" | "oo" => Ok(RatOrInf::Infinite),
        _ => Ok(RatOrInf::Finite(parse_rat(s)?)),
    }
}

/// Decimal integers with an optional power form `B^E`.
pub fn parse_scale(s: &str) -> Result<BigUint, Error> {
    let bad = |m: String| Error::InvalidSpec(m);
    if let Some((b, e)) = s.split_once('^') {
        let b: u64 = b
            .parse()
            .map_err(|_| bad(format!("bad power base in '{s}'")))?;
        let e: u32 = e
            .parse()
            .map_err(|_| bad(format!("bad power exponent in '{s}'")))?;
        if b < 2 {
            return Err(bad(format!("power base must be at least 2 in '{s}'")));
        }
        return Ok(BigUint::from(b).pow(e));
    }
    s.parse::<BigUint>()
        .map_err(|_| bad(format!("bad integer '{s}'")))
}

pub fn parse_scales(list: &[String]) -> Result<Vec<BigUint>, Error> {
    list.iter().map(|s| parse_scale(s)).collect()
}

pub fn parse_heights(list: &[String]) -> Result<Vec<u64>, Error> {
    list.iter()
        .map(|s| {
            let v = parse_scale(s)?;
            u64::try_from(&v)
                .map_err(|_| Error::InvalidSpec(format!("height '{s}' exceeds 64 bits")))
        })
        .collect()
}

fn key_values(args: &str, token: &str) -> Result<BTreeMap<String, String>, Error> {
    let mut map = BTreeMap::new();
    for part in args.split(',').filter(|p| !p.is_empty()) {
        let (k, v) = part.split_once('=').ok_or_else(|| {
            Error::InvalidSpec(format!("expected key=value, got '{part}' in '{token}'"))
        })?;
        if map.insert(k.trim().to_string(), v.trim().to_string()).is_some() {
            return Err(Error::InvalidSpec(format!("duplicate key '{k}' in '{token}'")));
        }
    }
    Ok(map)
}

struct Fields {
    map: BTreeMap<String, String>,
    token: String,
}

impl Fields {
    fn take(&mut self, key: &str) -> Option<String> {
        self.map.remove(key)
    }

    fn require(&mut self, key: &str) -> Result<String, Error> {
        self.take(key).ok_or_else(|| {
            Error::InvalidSpec(format!("missing '{key}' in '{}'", self.token))
        })
    }

    fn finish(self) -> Result<(), Error> {
        if let Some(k) = self.map.keys().next() {
            return Err(Error::InvalidSpec(format!(
                "unknown key '{k}' in '{}'",
                self.token
            )));
        }
        Ok(())
    }
}

fn parse_u32(s: &str, what: &str, token: &str) -> Result<u32, Error> {
    s.parse()
        .map_err(|_| Error::InvalidSpec(format!("bad {what} '{s}' in '{token}'")))
}

/// Explicit exponent list `4+16+64`.
fn parse_exps(s: &str, token: &str) -> Result<Vec<u64>, Error> {
    s.split('+')
        .map(|p| {
            p.parse()
                .map_err(|_| Error::InvalidSpec(format!("bad exponent '{p}' in '{token}'")))
        })
        .collect()
}

/// Recipes:
///   bugeaud:alpha=A,tau=T         ternary construction with order-1
///                                 exponent T (rational >= 1 or inf)
///   meinsatz:b=B[,c=C],k=K,rho=R  base-B construction with declared gap
///                                 ratio K(1+R); optional exps=4+16+64 and
///                                 extend=RATIO pick an explicit rule
///   geometric:b=B[,c=C],alpha=A,ratio=R
///                                 plain ceiling-rule expansion, no
///                                 certificate
///   doubly:b=B[,c=C]              exponents 2^(2^n), no certificate
///   rational:P/Q                  exact rational
pub fn parse_number(token: &str) -> Result<ParsedNumber, Error> {
    let (family, rest) = token
        .split_once(':')
        .ok_or_else(|| Error::InvalidSpec(format!("expected family:args, got '{token}'")))?;
    if family == "rational" {
        return Ok(ParsedNumber {
            token: token.to_string(),
            handle: RealHandle::rational(parse_rat(rest)?),
            certificate: None,
        });
    }
    let mut f = Fields { map: key_values(rest, token)?, token: token.to_string() };
    let parsed = match family {
        "bugeaud" => {
            let alpha = parse_rat(&f.require("alpha")?)?;
            let tau = parse_rat_or_inf(&f.require("tau")?)?;
            f.finish()?;
            let cert = bugeaud_number(&alpha, &tau)?;
            ParsedNumber {
                token: token.to_string(),
                handle: cert.handle.clone(),
                certificate: Some(cert),
            }
        }
        "meinsatz" => {
            let b = parse_u32(&f.require("b")?, "base", token)?;
            let c = match f.take("c") {
                Some(s) => parse_u32(&s, "coefficient", token)?,
                None => 1,
            };
            let k = parse_u32(&f.require("k")?, "order", token)?;
            let rho = parse_rat_or_inf(&f.require("rho")?)?;
            let rule = match (f.take("exps"), f.take("extend")) {
                (Some(exps), extend) => Some(ExponentRule::Explicit {
                    exps: parse_exps(&exps, token)?,
                    extend_ratio: extend.map(|r| parse_rat(&r)).transpose()?,
                }),
                (None, Some(_)) => {
                    return Err(Error::InvalidSpec(format!(
                        "'extend' requires 'exps' in '{token}'"
                    )))
                }
                (None, None) => None,
            };
            f.finish()?;
            let cert = meinsatz_number(b, c, k, &rho, rule)?;
            ParsedNumber {
                token: token.to_string(),
                handle: cert.handle.clone(),
                certificate: Some(cert),
            }
        }
        "geometric" => {
            let b = parse_u32(&f.require("b")?, "base", token)?;
            let c = match f.take("c") {
                Some(s) => parse_u32(&s, "coefficient", token)?,
                None => 1,
            };
            let alpha = match f.take("alpha") {
                Some(s) => parse_rat(&s)?,
                None => BigRat::from_integer(1.into()),
            };
            let ratio = parse_rat(&f.require("ratio")?)?;
            f.finish()?;
            let spec = LacunarySpec::new(b, c, ExponentRule::GeometricCeil { alpha, ratio })?;
            ParsedNumber {
                token: token.to_string(),
                handle: RealHandle::lacunary(spec),
                certificate: None,
            }
        }
        "doubly" => {
            let b = parse_u32(&f.require("b")?, "base", token)?;
            let c = match f.take("c") {
                Some(s) => parse_u32(&s, "coefficient", token)?,
                None => 1,
            };
            f.finish()?;
            let spec = LacunarySpec::new(b, c, ExponentRule::DoublyExponential)?;
            ParsedNumber {
                token: token.to_string(),
                handle: RealHandle::lacunary(spec),
                certificate: None,
            }
        }
        other => {
            return Err(Error::InvalidSpec(format!(
                "unknown number family '{other}' (expected bugeaud, meinsatz, geometric, \
                 doubly, or rational)"
            )))
        }
    };
    Ok(parsed)
}

pub fn apply_depth_cap(parsed: &mut ParsedNumber, cap: Option<u32>) {
    if let Some(max_depth) = cap {
        let precision = Precision { max_depth, ..parsed.handle.precision() };
        parsed.handle = parsed.handle.clone().with_precision(precision);
    }
}
