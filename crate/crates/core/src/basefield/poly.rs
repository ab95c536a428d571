//! Dense univariate polynomials over a base field, used for extension and
//! rational-function arithmetic.

use super::{BaseField, El};

/// Coefficients low degree first; no trailing zeros (checked lazily).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Poly(pub Vec<El>);

impl Poly {
    pub fn new(coeffs: Vec<El>) -> Poly {
        Poly(coeffs)
    }

    pub fn zero() -> Poly {
        Poly(Vec::new())
    }

    pub fn constant(c: El) -> Poly {
        Poly(vec![c])
    }

    fn trim(&self, field: &BaseField) -> Poly {
        let mut v = self.0.clone();
        while let Some(last) = v.last() {
            if field.is_zero(last) {
                v.pop();
            } else {
                break;
            }
        }
        Poly(v)
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty() || self.0.iter().all(|c| is_structurally_zero(c))
    }

    pub fn degree(&self) -> Option<usize> {
        self.0.iter().rposition(|c| !is_structurally_zero(c))
    }

    pub fn coeff(&self, field: &BaseField, k: usize) -> El {
        self.0.get(k).cloned().unwrap_or_else(|| field.zero())
    }

    pub fn leading_coefficient(&self) -> Option<El> {
        self.0
            .iter()
            .rev()
            .find(|c| !is_structurally_zero(c))
            .cloned()
    }

    pub fn padded_coeffs(&self, field: &BaseField, len: usize) -> Vec<El> {
        let mut v = self.0.clone();
        v.truncate(len.max(v.len()));
        while v.len() < len {
            v.push(field.zero());
        }
        assert!(v.len() == len, "polynomial does not fit in {len} coefficients");
        v
    }

    pub fn add(&self, field: &BaseField, other: &Poly) -> Poly {
        let n = self.0.len().max(other.0.len());
        let z = field.zero();
        let coeffs = (0..n)
            .map(|k| {
                field.add(
                    self.0.get(k).unwrap_or(&z),
                    other.0.get(k).unwrap_or(&z),
                )
            })
            .collect();
        Poly(coeffs).trim(field)
    }

    pub fn neg(&self, field: &BaseField) -> Poly {
        Poly(self.0.iter().map(|c| field.neg(c)).collect())
    }

    pub fn sub(&self, field: &BaseField, other: &Poly) -> Poly {
        self.add(field, &other.neg(field))
    }

    pub fn scale(&self, field: &BaseField, c: &El) -> Poly {
        Poly(self.0.iter().map(|x| field.mul(x, c)).collect()).trim(field)
    }

    pub fn mul(&self, field: &BaseField, other: &Poly) -> Poly {
        if self.is_zero() || other.is_zero() {
            return Poly::zero();
        }
        let mut coeffs = vec![field.zero(); self.0.len() + other.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            if field.is_zero(a) {
                continue;
            }
            for (j, b) in other.0.iter().enumerate() {
                let t = field.mul(a, b);
                coeffs[i + j] = field.add(&coeffs[i + j], &t);
            }
        }
        Poly(coeffs).trim(field)
    }

    /// Euclidean division: self = q * d + r with deg r < deg d.
    pub fn div_rem(&self, field: &BaseField, d: &Poly) -> (Poly, Poly) {
        let d = d.trim(field);
        let dd = d.degree().expect("division by zero polynomial");
        let lc = d.leading_coefficient().unwrap();
        let lcinv = field.inv(&lc).expect("leading coefficient invertible");
        let mut r = self.trim(field);
        let mut q = vec![field.zero(); self.0.len()];
        while let Some(rd) = r.degree() {
            if rd < dd {
                break;
            }
            let c = field.mul(&r.leading_coefficient().unwrap(), &lcinv);
            let shift = rd - dd;
            q[shift] = field.add(&q[shift], &c);
            // r -= c * x^shift * d
            let mut sub = vec![field.zero(); shift];
            sub.extend(d.0.iter().map(|x| field.mul(x, &c)));
            r = r.sub(field, &Poly(sub));
        }
        (Poly(q).trim(field), r)
    }

    /// Monic gcd.
    pub fn gcd(field: &BaseField, a: &Poly, b: &Poly) -> Poly {
        let mut a = a.trim(field);
        let mut b = b.trim(field);
        while !b.is_zero() {
            let (_, r) = a.div_rem(field, &b);
            a = b;
            b = r;
        }
        if let Some(lc) = a.leading_coefficient() {
            let inv = field.inv(&lc).expect("leading coefficient invertible");
            a = a.scale(field, &inv);
        }
        a
    }

    /// Returns (g, s, t) with s*a + t*b = g (g not normalized monic).
    pub fn extended_gcd(field: &BaseField, a: &Poly, b: &Poly) -> (Poly, Poly, Poly) {
        let mut r0 = a.trim(field);
        let mut r1 = b.trim(field);
        let mut s0 = Poly::constant(field.one());
        let mut s1 = Poly::zero();
        let mut t0 = Poly::zero();
        let mut t1 = Poly::constant(field.one());
        while !r1.is_zero() {
            let (q, r) = r0.div_rem(field, &r1);
            let s = s0.sub(field, &q.mul(field, &s1));
            let t = t0.sub(field, &q.mul(field, &t1));
            r0 = r1;
            r1 = r;
            s0 = s1;
            s1 = s;
            t0 = t1;
            t1 = t;
        }
        (r0, s0, t0)
    }

    pub fn eval(&self, field: &BaseField, x: &El) -> El {
        let mut acc = field.zero();
        for c in self.0.iter().rev() {
            acc = field.add(&field.mul(&acc, x), c);
        }
        acc
    }

    /// Is this polynomial g^d for some monic g (up to the stated unit)?
    /// Requires the characteristic not to divide d; the polynomial must be
    /// monic. Returns the d-th root on success.
    pub fn monic_dth_root(&self, field: &BaseField, d: u32) -> Option<Poly> {
        let n = self.degree()?;
        if n % d as usize != 0 {
            return None;
        }
        let k = n / d as usize;
        let dinv = field.inv(&field.from_i64(d as i64)).ok()?;
        let mut g = vec![field.zero(); k + 1];
        g[k] = field.one();
        for j in 1..=k {
            let cur = Poly(g.clone()).pow(field, d);
            let target = self.0.get(n - j).cloned().unwrap_or_else(|| field.zero());
            let have = cur.0.get(n - j).cloned().unwrap_or_else(|| field.zero());
            let delta = field.mul(&field.sub(&target, &have), &dinv);
            g[k - j] = field.add(&g[k - j], &delta);
        }
        let g = Poly(g);
        if g.pow(field, d) == self.trim(field) {
            Some(g)
        } else {
            None
        }
    }

    pub fn pow(&self, field: &BaseField, d: u32) -> Poly {
        let mut out = Poly::constant(field.one());
        for _ in 0..d {
            out = out.mul(field, self);
        }
        out
    }

    pub fn format(&self, field: &BaseField, var: &str) -> String {
        let mut parts = Vec::new();
        for (k, c) in self.0.iter().enumerate() {
            if field.is_zero(c) {
                continue;
            }
            let cs = field.format_el(c);
            let part = match k {
                0 => cs,
                1 if cs == "1" => var.to_string(),
                1 => format!("({cs})*{var}"),
                _ if cs == "1" => format!("{var}^{k}"),
                _ => format!("({cs})*{var}^{k}"),
            };
            parts.push(part);
        }
        if parts.is_empty() {
            "0".into()
        } else {
            parts.join(" + ")
        }
    }
}

/// Zero test that does not need the field context (all our representations
/// make zero structurally canonical).
fn is_structurally_zero(e: &El) -> bool {
    match e {
        El::Rat(q) => num_traits::Zero::is_zero(q),
        El::Mod(m) => *m == 0,
        El::Ext(v) => v.iter().all(is_structurally_zero),
        El::RatFn(n, _) => n.is_zero(),
    }
}
