//! Exact base fields: the rationals, prime fields, simple (Kummer-style)
//! extensions and rational function fields, as a recursive tower.

mod poly;
pub mod valuation;

pub use poly::Poly;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::matrix::Rat;

/// An element of a base field. The field it belongs to is carried externally
/// (operations take a `&BaseField` context).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum El {
    Rat(Rat),
    /// Element of a prime field, reduced mod p.
    Mod(u64),
    /// Coefficient vector over the base of a simple extension (low degree first).
    Ext(Vec<El>),
    /// num/den over the base of a rational function field; den monic, gcd 1.
    RatFn(Poly, Poly),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BaseField {
    Rationals,
    PrimeField(u64),
    SimpleExtension {
        base: Box<BaseField>,
        minpoly: Poly,
        name: String,
    },
    RationalFunctions {
        base: Box<BaseField>,
        var: String,
    },
}

impl std::fmt::Display for BaseField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            BaseField::Rationals => write!(f, "Q"),
            BaseField::PrimeField(p) => write!(f, "F{p}"),
            BaseField::SimpleExtension { base, name, .. } => write!(f, "{base}({name})"),
            BaseField::RationalFunctions { base, var } => write!(f, "{base}({var})"),
        }
    }
}

impl BaseField {
    /// Kummer extension Q(name), name^n = a. Checks irreducibility.
    pub fn kummer(n: u32, a: Rat, name: &str) -> Result<BaseField> {
        if n < 2 || n > 4 {
            return Err(Error::UnsupportedExtension(format!(
                "Kummer degree {n} outside the supported range 2..=4"
            )));
        }
        let irreducible = match n {
            2 => !is_rat_power(&a, 2),
            3 => !is_rat_power(&a, 3),
            4 => {
                // x^4 - a reducible iff a is a square or -4a is a fourth power
                !is_rat_power(&a, 2) && !is_rat_power(&(-Rat::from(BigInt::from(4)) * &a), 4)
            }
            _ => unreachable!(),
        };
        if !irreducible {
            return Err(Error::Config(format!(
                "x^{n} - {a} is reducible over Q"
            )));
        }
        let mut coeffs = vec![El::Rat(-a)];
        coeffs.extend(std::iter::repeat(El::Rat(Rat::zero())).take(n as usize - 1));
        coeffs.push(El::Rat(Rat::one()));
        Ok(BaseField::SimpleExtension {
            base: Box::new(BaseField::Rationals),
            minpoly: Poly::new(coeffs),
            name: name.to_string(),
        })
    }

    /// Q(i) = Q[x]/(x^2+1).
    pub fn gaussian() -> BaseField {
        BaseField::kummer(2, -Rat::one(), "i").expect("x^2+1 is irreducible")
    }

    /// Finite field F_{p^f} given by a monic irreducible over F_p.
    pub fn finite_extension(p: u64, minpoly: Poly, name: &str) -> Result<BaseField> {
        let base = BaseField::PrimeField(p);
        if !base.poly_is_irreducible(&minpoly)? {
            return Err(Error::Config(format!(
                "minimal polynomial is reducible over F{p}"
            )));
        }
        Ok(BaseField::SimpleExtension {
            base: Box::new(base),
            minpoly,
            name: name.to_string(),
        })
    }

    pub fn rational_functions(base: BaseField, var: &str) -> BaseField {
        BaseField::RationalFunctions {
            base: Box::new(base),
            var: var.to_string(),
        }
    }

    /// Irreducibility over the supported menu (prime fields, degree <= 4).
    pub fn poly_is_irreducible(&self, m: &Poly) -> Result<bool> {
        let p = match self {
            BaseField::PrimeField(p) => *p,
            _ => {
                return Err(Error::Unsupported(
                    "irreducibility test only on prime fields here".into(),
                ))
            }
        };
        let d = m.degree().ok_or(Error::ZeroElement)?;
        if d == 0 {
            return Ok(false);
        }
        if d == 1 {
            return Ok(true);
        }
        // no roots
        for a in 0..p {
            if self.is_zero(&m.eval(self, &El::Mod(a))) {
                return Ok(false);
            }
        }
        if d <= 3 {
            return Ok(true);
        }
        if d == 4 {
            // no monic quadratic factors
            for b in 0..p {
                for c in 0..p {
                    let q = Poly::new(vec![El::Mod(c), El::Mod(b), El::Mod(1 % p)]);
                    let (_, r) = m.div_rem(self, &q);
                    if r.is_zero() {
                        return Ok(false);
                    }
                }
            }
            return Ok(true);
        }
        Err(Error::Unsupported(format!(
            "irreducibility test for degree {d} not supported"
        )))
    }

    pub fn zero(&self) -> El {
        match self {
            BaseField::Rationals => El::Rat(Rat::zero()),
            BaseField::PrimeField(_) => El::Mod(0),
            BaseField::SimpleExtension { base, minpoly, .. } => {
                El::Ext(vec![base.zero(); minpoly.degree().unwrap()])
            }
            BaseField::RationalFunctions { base, .. } => {
                El::RatFn(Poly::zero(), Poly::constant(base.one()))
            }
        }
    }

    pub fn one(&self) -> El {
        match self {
            BaseField::Rationals => El::Rat(Rat::one()),
            BaseField::PrimeField(p) => El::Mod(1 % p),
            BaseField::SimpleExtension { base, minpoly, .. } => {
                let mut v = vec![base.zero(); minpoly.degree().unwrap()];
                v[0] = base.one();
                El::Ext(v)
            }
            BaseField::RationalFunctions { base, .. } => {
                El::RatFn(Poly::constant(base.one()), Poly::constant(base.one()))
            }
        }
    }

    pub fn from_i64(&self, n: i64) -> El {
        match self {
            BaseField::Rationals => El::Rat(Rat::from(BigInt::from(n))),
            BaseField::PrimeField(p) => El::Mod(n.rem_euclid(*p as i64) as u64),
            BaseField::SimpleExtension { base, minpoly, .. } => {
                let mut v = vec![base.zero(); minpoly.degree().unwrap()];
                v[0] = base.from_i64(n);
                El::Ext(v)
            }
            BaseField::RationalFunctions { base, .. } => El::RatFn(
                Poly::constant(base.from_i64(n)),
                Poly::constant(base.one()),
            ),
        }
    }

    pub fn from_rat(&self, q: &Rat) -> Result<El> {
        match self {
            BaseField::Rationals => Ok(El::Rat(q.clone())),
            BaseField::PrimeField(_) => {
                let num = self.from_bigint(q.numer());
                let den = self.from_bigint(q.denom());
                self.div(&num, &den)
            }
            BaseField::SimpleExtension { base, minpoly, .. } => {
                let mut v = vec![base.zero(); minpoly.degree().unwrap()];
                v[0] = base.from_rat(q)?;
                Ok(El::Ext(v))
            }
            BaseField::RationalFunctions { base, .. } => Ok(El::RatFn(
                Poly::constant(base.from_rat(q)?),
                Poly::constant(base.one()),
            )),
        }
    }

    fn from_bigint(&self, n: &BigInt) -> El {
        match self {
            BaseField::PrimeField(p) => {
                let m = num_integer::Integer::mod_floor(n, &BigInt::from(*p));
                El::Mod(m.try_into().expect("reduced residue fits u64"))
            }
            _ => unimplemented!("from_bigint only used on prime fields"),
        }
    }

    /// The distinguished generator (alpha of a simple extension, x of a
    /// rational function field).
    pub fn generator(&self) -> Option<El> {
        match self {
            BaseField::SimpleExtension { base, minpoly, .. } => {
                let d = minpoly.degree().unwrap();
                let mut v = vec![base.zero(); d];
                if d >= 2 {
                    v[1] = base.one();
                }
                Some(El::Ext(v))
            }
            BaseField::RationalFunctions { base, .. } => Some(El::RatFn(
                Poly::new(vec![base.zero(), base.one()]),
                Poly::constant(base.one()),
            )),
            _ => None,
        }
    }

    pub fn is_zero(&self, a: &El) -> bool {
        match a {
            El::Rat(q) => q.is_zero(),
            El::Mod(m) => *m == 0,
            El::Ext(v) => {
                let base = self.ext_base();
                v.iter().all(|c| base.is_zero(c))
            }
            El::RatFn(n, _) => n.is_zero(),
        }
    }

    fn ext_base(&self) -> &BaseField {
        match self {
            BaseField::SimpleExtension { base, .. } => base,
            _ => panic!("Ext element in non-extension field"),
        }
    }


    pub fn add(&self, a: &El, b: &El) -> El {
        match (self, a, b) {
            (BaseField::Rationals, El::Rat(x), El::Rat(y)) => El::Rat(x + y),
            (BaseField::PrimeField(p), El::Mod(x), El::Mod(y)) => El::Mod((x + y) % p),
            (BaseField::SimpleExtension { base, .. }, El::Ext(x), El::Ext(y)) => El::Ext(
                x.iter().zip(y).map(|(u, v)| base.add(u, v)).collect(),
            ),
            (BaseField::RationalFunctions { base, .. }, El::RatFn(n1, d1), El::RatFn(n2, d2)) => {
                let n = n1.mul(base, d2).add(base, &n2.mul(base, d1));
                let d = d1.mul(base, d2);
                normalize_ratfn(base, n, d)
            }
            _ => panic!("field/element mismatch in add: {self} with {a:?}, {b:?}"),
        }
    }

    pub fn neg(&self, a: &El) -> El {
        match (self, a) {
            (BaseField::Rationals, El::Rat(x)) => El::Rat(-x),
            (BaseField::PrimeField(p), El::Mod(x)) => El::Mod((p - x) % p),
            (BaseField::SimpleExtension { base, .. }, El::Ext(x)) => {
                El::Ext(x.iter().map(|u| base.neg(u)).collect())
            }
            (BaseField::RationalFunctions { base, .. }, El::RatFn(n, d)) => {
                El::RatFn(n.neg(base), d.clone())
            }
            _ => panic!("field/element mismatch in neg"),
        }
    }

    pub fn sub(&self, a: &El, b: &El) -> El {
        self.add(a, &self.neg(b))
    }

    pub fn mul(&self, a: &El, b: &El) -> El {
        match (self, a, b) {
            (BaseField::Rationals, El::Rat(x), El::Rat(y)) => El::Rat(x * y),
            (BaseField::PrimeField(p), El::Mod(x), El::Mod(y)) => {
                El::Mod(((*x as u128 * *y as u128) % *p as u128) as u64)
            }
            (BaseField::SimpleExtension { base, minpoly, .. }, El::Ext(x), El::Ext(y)) => {
                let prod = Poly::new(x.clone()).mul(base, &Poly::new(y.clone()));
                let (_, r) = prod.div_rem(base, minpoly);
                El::Ext(r.padded_coeffs(base, minpoly.degree().unwrap()))
            }
            (BaseField::RationalFunctions { base, .. }, El::RatFn(n1, d1), El::RatFn(n2, d2)) => {
                normalize_ratfn(base, n1.mul(base, n2), d1.mul(base, d2))
            }
            _ => panic!("field/element mismatch in mul"),
        }
    }

    pub fn inv(&self, a: &El) -> Result<El> {
        if self.is_zero(a) {
            return Err(Error::ZeroElement);
        }
        Ok(match (self, a) {
            (BaseField::Rationals, El::Rat(x)) => El::Rat(x.recip()),
            (BaseField::PrimeField(p), El::Mod(x)) => El::Mod(mod_inverse(*x, *p)),
            (BaseField::SimpleExtension { base, minpoly, .. }, El::Ext(x)) => {
                // extended Euclid: s * a + t * minpoly = 1
                let ap = Poly::new(x.clone());
                let (g, s, _) = Poly::extended_gcd(base, &ap, minpoly);
                let glc = g.leading_coefficient().expect("gcd of nonzero inputs");
                let ginv = base.inv(&glc)?;
                let s = s.scale(base, &ginv);
                let (_, r) = s.div_rem(base, minpoly);
                El::Ext(r.padded_coeffs(base, minpoly.degree().unwrap()))
            }
            (BaseField::RationalFunctions { base, .. }, El::RatFn(n, d)) => {
                normalize_ratfn(base, d.clone(), n.clone())
            }
            _ => panic!("field/element mismatch in inv"),
        })
    }

    pub fn div(&self, a: &El, b: &El) -> Result<El> {
        Ok(self.mul(a, &self.inv(b)?))
    }

    pub fn pow(&self, a: &El, n: i64) -> Result<El> {
        if n < 0 {
            return self.pow(&self.inv(a)?, -n);
        }
        let mut result = self.one();
        let mut base = a.clone();
        let mut k = n as u64;
        while k > 0 {
            if k & 1 == 1 {
                result = self.mul(&result, &base);
            }
            base = self.mul(&base, &base);
            k >>= 1;
        }
        Ok(result)
    }

    pub fn pow_big(&self, a: &El, n: &BigInt) -> Result<El> {
        if n.is_negative() {
            return self.pow_big(&self.inv(a)?, &-n);
        }
        let mut result = self.one();
        let mut base = a.clone();
        let mut k = n.clone();
        let two = BigInt::from(2);
        while k.is_positive() {
            if num_integer::Integer::is_odd(&k) {
                result = self.mul(&result, &base);
            }
            base = self.mul(&base, &base);
            k /= &two;
        }
        Ok(result)
    }

    /// Multiplicative order when it is at most `bound`.
    pub fn multiplicative_order(&self, a: &El, bound: u64) -> Option<u64> {
        if self.is_zero(a) {
            return None;
        }
        let one = self.one();
        let mut x = a.clone();
        for k in 1..=bound {
            if x == one {
                return Some(k);
            }
            x = self.mul(&x, a);
        }
        None
    }

    /// Field degree of `self` over `sub` along the structural tower, when
    /// `sub` occurs in the tower.
    pub fn degree_over(&self, sub: &BaseField) -> Option<u64> {
        if self == sub {
            return Some(1);
        }
        match self {
            BaseField::SimpleExtension { base, minpoly, .. } => base
                .degree_over(sub)
                .map(|d| d * minpoly.degree().unwrap() as u64),
            BaseField::RationalFunctions { .. } => None,
            _ => None,
        }
    }

    /// Embed an element of `sub` into `self` along the structural tower.
    pub fn embed_from(&self, sub: &BaseField, a: &El) -> Result<El> {
        if self == sub {
            return Ok(a.clone());
        }
        match self {
            BaseField::SimpleExtension { base, minpoly, .. } => {
                let inner = base.embed_from(sub, a)?;
                let mut v = vec![base.zero(); minpoly.degree().unwrap()];
                v[0] = inner;
                Ok(El::Ext(v))
            }
            BaseField::RationalFunctions { base, .. } => {
                let inner = base.embed_from(sub, a)?;
                Ok(El::RatFn(Poly::constant(inner), Poly::constant(base.one())))
            }
            _ => Err(Error::UnsupportedExtension(format!(
                "{sub} does not embed structurally into {self}"
            ))),
        }
    }

    /// Deterministic "random" nonzero sampling for property checks.
    pub fn sample(&self, rng: &mut impl rand::Rng) -> El {
        match self {
            BaseField::Rationals => {
                let n = rng.gen_range(-9i64..=9);
                let d = rng.gen_range(1i64..=6);
                El::Rat(Rat::new(BigInt::from(n), BigInt::from(d)))
            }
            BaseField::PrimeField(p) => El::Mod(rng.gen_range(0..*p)),
            BaseField::SimpleExtension { base, minpoly, .. } => El::Ext(
                (0..minpoly.degree().unwrap())
                    .map(|_| base.sample(rng))
                    .collect(),
            ),
            BaseField::RationalFunctions { base, .. } => {
                let n = Poly::new((0..=1).map(|_| base.sample(rng)).collect());
                let mut d = Poly::new(vec![base.sample(rng)]);
                if d.is_zero() {
                    d = Poly::constant(base.one());
                }
                normalize_ratfn_as_el(base, n, d)
            }
        }
    }

    pub fn sample_nonzero(&self, rng: &mut impl rand::Rng) -> El {
        loop {
            let x = self.sample(rng);
            if !self.is_zero(&x) {
                return x;
            }
        }
    }

    pub fn format_el(&self, a: &El) -> String {
        match (self, a) {
            (BaseField::Rationals, El::Rat(q)) => format!("{q}"),
            (BaseField::PrimeField(_), El::Mod(m)) => format!("{m}"),
            (BaseField::SimpleExtension { base, name, .. }, El::Ext(v)) => {
                let mut parts = Vec::new();
                for (k, c) in v.iter().enumerate() {
                    if base.is_zero(c) {
                        continue;
                    }
                    let cs = base.format_el(c);
                    let needs_parens = cs.contains('+') || cs.contains(' ') || cs.contains('/');
                    let cs = if needs_parens && k > 0 {
                        format!("({cs})")
                    } else {
                        cs
                    };
                    let part = match k {
                        0 => cs,
                        _ if cs == "1" => {
                            if k == 1 {
                                name.clone()
                            } else {
                                format!("{name}^{k}")
                            }
                        }
                        1 => format!("{cs}*{name}"),
                        _ => format!("{cs}*{name}^{k}"),
                    };
                    parts.push(part);
                }
                if parts.is_empty() {
                    "0".into()
                } else {
                    parts.join(" + ")
                }
            }
            (BaseField::RationalFunctions { base, var }, El::RatFn(n, d)) => {
                let ns = n.format(base, var);
                if d.degree() == Some(0) && d.coeff(base, 0) == base.one() {
                    ns
                } else {
                    format!("({ns})/({})", d.format(base, var))
                }
            }
            _ => panic!("field/element mismatch in format"),
        }
    }
}

fn normalize_ratfn(base: &BaseField, num: Poly, den: Poly) -> El {
    normalize_ratfn_as_el(base, num, den)
}

fn normalize_ratfn_as_el(base: &BaseField, num: Poly, den: Poly) -> El {
    assert!(!den.is_zero(), "zero denominator in rational function");
    if num.is_zero() {
        return El::RatFn(Poly::zero(), Poly::constant(base.one()));
    }
    let g = Poly::gcd(base, &num, &den);
    let (num, _) = num.div_rem(base, &g);
    let (den, _) = den.div_rem(base, &g);
    let lc = den.leading_coefficient().expect("nonzero denominator");
    let lcinv = base.inv(&lc).expect("leading coefficient invertible");
    El::RatFn(num.scale(base, &lcinv), den.scale(base, &lcinv))
}

pub fn mod_inverse(a: u64, p: u64) -> u64 {
    // extended Euclid on i128
    let (mut t, mut new_t) = (0i128, 1i128);
    let (mut r, mut new_r) = (p as i128, (a % p) as i128);
    while new_r != 0 {
        let q = r / new_r;
        (t, new_t) = (new_t, t - q * new_t);
        (r, new_r) = (new_r, r - q * new_r);
    }
    assert_eq!(r, 1, "not invertible mod p");
    t.rem_euclid(p as i128) as u64
}

/// Is `q` a d-th power in Q?
pub fn is_rat_power(q: &Rat, d: u32) -> bool {
    if q.is_zero() {
        return true;
    }
    if q.is_negative() && d % 2 == 0 {
        return false;
    }
    let sign_fix = if q.is_negative() { -q.clone() } else { q.clone() };
    let nr = sign_fix.numer().nth_root(d);
    let dr = sign_fix.denom().nth_root(d);
    num_traits::pow::Pow::pow(&nr, d) == *sign_fix.numer()
        && num_traits::pow::Pow::pow(&dr, d) == *sign_fix.denom()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{rat, rat_int};
    use rand::SeedableRng;

    #[test]
    fn gaussian_arithmetic() {
        let k = BaseField::gaussian();
        let i = k.generator().unwrap();
        let m = k.mul(&i, &i);
        assert_eq!(m, k.from_i64(-1));
        let inv = k.inv(&i).unwrap();
        assert_eq!(k.mul(&i, &inv), k.one());
        // (1+2i)(1-2i) = 5
        let a = k.add(&k.one(), &k.mul(&k.from_i64(2), &i));
        let b = k.sub(&k.one(), &k.mul(&k.from_i64(2), &i));
        assert_eq!(k.mul(&a, &b), k.from_i64(5));
    }

    #[test]
    fn kummer_irreducibility() {
        assert!(BaseField::kummer(2, rat_int(4), "r").is_err());
        assert!(BaseField::kummer(2, rat_int(2), "r").is_ok());
        assert!(BaseField::kummer(4, rat_int(-4), "r").is_err()); // x^4+4 splits
        assert!(BaseField::kummer(4, rat_int(2), "r").is_ok());
        assert!(BaseField::kummer(3, rat(8, 27), "r").is_err());
    }

    #[test]
    fn rational_functions_arithmetic() {
        let f5x = BaseField::rational_functions(BaseField::PrimeField(5), "x");
        let x = f5x.generator().unwrap();
        let a = f5x.add(&x, &f5x.one()); // x + 1
        let q = f5x.div(&f5x.mul(&a, &x), &a).unwrap();
        assert_eq!(q, x);
    }

    #[test]
    fn field_axioms_sampled() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for k in [
            BaseField::Rationals,
            BaseField::PrimeField(5),
            BaseField::gaussian(),
            BaseField::rational_functions(BaseField::PrimeField(5), "x"),
        ] {
            for _ in 0..40 {
                let a = k.sample_nonzero(&mut rng);
                let b = k.sample(&mut rng);
                let c = k.sample(&mut rng);
                assert_eq!(k.mul(&a, &k.inv(&a).unwrap()), k.one());
                assert_eq!(
                    k.mul(&a, &k.add(&b, &c)),
                    k.add(&k.mul(&a, &b), &k.mul(&a, &c))
                );
            }
        }
    }

    #[test]
    fn degree_and_embedding() {
        let qi = BaseField::gaussian();
        assert_eq!(qi.degree_over(&BaseField::Rationals), Some(2));
        let two = qi
            .embed_from(&BaseField::Rationals, &El::Rat(rat_int(2)))
            .unwrap();
        assert_eq!(two, qi.from_i64(2));
    }

    #[test]
    fn finite_field_extension() {
        // F9 = F3[t]/(t^2+1)
        let m = Poly::new(vec![El::Mod(1), El::Mod(0), El::Mod(1)]);
        let f9 = BaseField::finite_extension(3, m, "t").unwrap();
        let t = f9.generator().unwrap();
        assert_eq!(f9.mul(&t, &t), f9.from_i64(-1));
        assert_eq!(f9.multiplicative_order(&t, 16), Some(4));
    }
}
