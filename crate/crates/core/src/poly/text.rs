use std::collections::BTreeMap;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use serde::{Deserialize, Serialize};

use super::{Monomial, Polynomial, Var};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(String),
    Ident(String),
    Plus,
    Minus,
    Star,
    Caret,
}

fn tokenize(s: &str) -> Result<Vec<Tok>> {
    let mut out = Vec::new();
    let chars: Vec<char> = s.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        match c {
            ' ' | '\t' | '\n' | '\r' => i += 1,
            '+' => {
                out.push(Tok::Plus);
                i += 1;
            }
            '-' => {
                out.push(Tok::Minus);
                i += 1;
            }
            '*' => {
                out.push(Tok::Star);
                i += 1;
            }
            '^' => {
                out.push(Tok::Caret);
                i += 1;
            }
            c if c.is_ascii_digit() => {
                let start = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                out.push(Tok::Num(chars[start..i].iter().collect()));
            }
            c if c.is_alphabetic() || c == '_' => {
                let start = i;
                while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_' || chars[i] == '\'') {
                    i += 1;
                }
                out.push(Tok::Ident(chars[start..i].iter().collect()));
            }
            other => return Err(Error::InvalidPolynomial(format!("unexpected character `{other}`"))),
        }
    }
    Ok(out)
}

struct TermParser {
    toks: Vec<Tok>,
    pos: usize,
}

impl TermParser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn number(&mut self) -> Result<BigUint> {
        match self.next() {
            Some(Tok::Num(n)) => Ok(n.parse().expect("digits")),
            other => Err(Error::InvalidPolynomial(format!("expected a number, found {other:?}"))),
        }
    }

    /// term := factor ('*' factor)*, factor := ['-'] number | ident ['^' number]
    fn term(&mut self) -> Result<(Monomial, BigInt)> {
        let mut coeff = BigInt::from(1);
        let mut pairs: Vec<(Var, BigUint)> = Vec::new();
        loop {
            match self.next() {
                Some(Tok::Minus) => {
                    coeff = -coeff;
                    continue;
                }
                Some(Tok::Num(n)) => coeff *= BigInt::from_str(&n).expect("digits"),
                Some(Tok::Ident(v)) => {
                    let e = if self.peek() == Some(&Tok::Caret) {
                        self.pos += 1;
                        self.number()?
                    } else {
                        BigUint::from(1u32)
                    };
                    pairs.push((Var::new(&v), e));
                }
                other => return Err(Error::InvalidPolynomial(format!("expected a factor, found {other:?}"))),
            }
            if self.peek() == Some(&Tok::Star) {
                self.pos += 1;
            } else {
                break;
            }
        }
        Ok((Monomial::from_pairs(pairs), coeff))
    }
}

impl FromStr for Polynomial {
    type Err = Error;

    /// Accepts the printed form, e.g. `3*X1^2*X2 - X3 + 4`, as well as
    /// binary minus (`X - Y`).
    fn from_str(s: &str) -> Result<Self> {
        let toks = tokenize(s)?;
        if toks.is_empty() {
            return Err(Error::InvalidPolynomial("empty input".into()));
        }
        let mut parser = TermParser { toks, pos: 0 };
        let mut poly = Polynomial::zero();
        let mut sign = BigInt::from(1);
        if parser.peek() == Some(&Tok::Plus) {
            parser.pos += 1;
        }
        loop {
            let (m, c) = parser.term()?;
            poly.add_term(m, c * &sign);
            match parser.next() {
                None => break,
                Some(Tok::Plus) => sign = BigInt::from(1),
                Some(Tok::Minus) => sign = BigInt::from(-1),
                Some(t) => return Err(Error::InvalidPolynomial(format!("unexpected token {t:?}"))),
            }
        }
        Ok(poly)
    }
}

/// JSON form: exponents and coefficients as decimal strings, so values of any
/// size round-trip exactly.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolynomialJson {
    pub modulus: Option<u64>,
    pub terms: Vec<TermJson>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermJson {
    pub coefficient: String,
    pub exponents: BTreeMap<String, String>,
}

impl From<&Polynomial> for PolynomialJson {
    fn from(p: &Polynomial) -> Self {
        PolynomialJson {
            modulus: p.modulus,
            terms: p
                .terms
                .iter()
                .rev()
                .map(|(m, c)| TermJson {
                    coefficient: c.to_string(),
                    exponents: m.iter().map(|(v, e)| (v.to_string(), e.to_string())).collect(),
                })
                .collect(),
        }
    }
}

impl TryFrom<PolynomialJson> for Polynomial {
    type Error = Error;

    fn try_from(j: PolynomialJson) -> Result<Self> {
        let mut p = Polynomial::zero_mod(j.modulus);
        for t in j.terms {
            let c =
                BigInt::from_str(&t.coefficient).map_err(|e| Error::InvalidPolynomial(format!("coefficient: {e}")))?;
            let mut pairs = Vec::new();
            for (v, e) in t.exponents {
                let e =
                    BigUint::from_str(&e).map_err(|err| Error::InvalidPolynomial(format!("exponent of {v}: {err}")))?;
                pairs.push((Var::new(&v), e));
            }
            p.add_term(Monomial::from_pairs(pairs), c);
        }
        Ok(p)
    }
}

impl Serialize for Polynomial {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        PolynomialJson::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for Polynomial {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = PolynomialJson::deserialize(d)?;
        Polynomial::try_from(j).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_printed_form_and_minus() {
        let p: Polynomial = "3*X1^2*X2 + -1*X3 + 4".parse().unwrap();
        assert_eq!(p.count_monomials(), 3);
        let q: Polynomial = "X - X".parse().unwrap();
        assert!(q.is_zero());
        let r: Polynomial = "-X + 2".parse().unwrap();
        assert_eq!(r.to_string(), "-X + 2");
    }

    #[test]
    fn monomial_forms() {
        assert_eq!(
            Monomial::parse("Z1^3*Z2^3").unwrap().total_degree(),
            &BigUint::from(6u32)
        );
        assert!(Monomial::parse("1").unwrap().is_one());
        assert!(Monomial::parse("2*X").is_err());
        assert!(Monomial::parse("X + Y").is_err());
    }

    #[test]
    fn printed_form_parses_back() {
        for src in ["-X1*X2 - 3*X1 + 2", "-5", "X - Y", "-2*X^3 + X"] {
            let p: Polynomial = src.parse().unwrap();
            assert_eq!(p.to_string().parse::<Polynomial>().unwrap(), p, "{src}");
        }
        assert_eq!("-1*X3 + 2".parse::<Polynomial>().unwrap().to_string(), "-X3 + 2");
    }

    #[test]
    fn huge_exponents_round_trip_through_json() {
        let p: Polynomial = "123456789012345678901234567890*X^18446744073709551616 + -7"
            .parse()
            .unwrap();
        let s = serde_json::to_string(&p).unwrap();
        let back: Polynomial = serde_json::from_str(&s).unwrap();
        assert_eq!(p, back);
    }

    fn arb_poly() -> impl Strategy<Value = Polynomial> {
        prop::collection::vec((-50i64..50, prop::collection::vec((0usize..4, 0u32..4), 0..4)), 0..6).prop_map(|terms| {
            Polynomial::from_terms(terms.into_iter().map(|(c, es)| {
                let m = Monomial::from_pairs(es.into_iter().map(|(v, e)| (Var::new(&format!("X{}", v + 1)), e)));
                (m, BigInt::from(c))
            }))
        })
    }

    proptest! {
        #[test]
        fn text_and_json_round_trip(p in arb_poly()) {
            let text = p.to_string();
            let back: Polynomial = text.parse().unwrap();
            prop_assert_eq!(&back, &p);
            let json = serde_json::to_string(&p).unwrap();
            let back: Polynomial = serde_json::from_str(&json).unwrap();
            prop_assert_eq!(back, p);
        }
    }
}
