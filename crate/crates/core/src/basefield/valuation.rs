//! Valuations on base fields: the trivial valuation, p-adic valuations,
//! prime-ideal valuations on simple extensions (split/inert/ramified),
//! places and Gauss valuations on rational function fields, and composites.
//!
//! Values are lex-ordered rational vectors; `None` stands for infinity.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::{is_rat_power, mod_inverse, BaseField, El, Poly};
use crate::error::{Error, Result};
use crate::matrix::{self, Rat};

pub type Value = Vec<Rat>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BaseValuation {
    pub field: BaseField,
    pub kind: VKind,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum VKind {
    Trivial,
    /// p-adic valuation on Q, v(p) = 1.
    PAdic(u64),
    /// Valuation of a simple extension of Q attached to a prime over p,
    /// normalized so that v(p) = 1 (value group (1/e)Z).
    PrimeIdeal(PrimeData),
    /// Gauss valuation on B(x): minimum of the inner values of the coefficients.
    Gauss(Box<BaseValuation>),
    /// Order of vanishing at x = c on B(x).
    PlaceFinite(Box<El>),
    /// Order of vanishing at infinity (deg den - deg num).
    PlaceInfinite,
    /// Composite: outer coarse valuation refined by a valuation on its residue field.
    Composite(Box<BaseValuation>, Box<BaseValuation>),
}

/// Data describing one prime of Q(alpha) over p.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrimeData {
    pub p: u64,
    /// Position in the canonical factor list for (p, field).
    pub index: usize,
    pub e: u64,
    pub f: u64,
    /// beta = scale * alpha has the monic integral minimal polynomial m_int.
    pub scale: BigInt,
    pub m_int: Vec<BigInt>,
    /// The irreducible factor of m_int mod p attached to this prime (monic).
    pub factor_bar: Vec<u64>,
    /// Multiplicity of factor_bar in m_int mod p.
    pub multiplicity: u64,
    /// Number of coprime blocks of m_int mod p (1 = the block is m_int itself).
    pub n_blocks: usize,
}

impl BaseValuation {
    pub fn trivial(field: BaseField) -> Self {
        BaseValuation {
            field,
            kind: VKind::Trivial,
        }
    }

    pub fn p_adic(p: u64) -> Self {
        BaseValuation {
            field: BaseField::Rationals,
            kind: VKind::PAdic(p),
        }
    }

    pub fn gauss(inner: BaseValuation, var: &str) -> Self {
        let field = BaseField::rational_functions(inner.field.clone(), var);
        BaseValuation {
            field,
            kind: VKind::Gauss(Box::new(inner)),
        }
    }

    pub fn composite(outer: BaseValuation, inner: BaseValuation) -> Result<Self> {
        if inner.field != outer.residue_field()? {
            return Err(Error::Config(
                "composite refinement must live on the residue field of the coarse part".into(),
            ));
        }
        let field = outer.field.clone();
        Ok(BaseValuation {
            field,
            kind: VKind::Composite(Box::new(outer), Box::new(inner)),
        })
    }

    pub fn rank(&self) -> usize {
        match &self.kind {
            VKind::Trivial => 0,
            VKind::PAdic(_) | VKind::PrimeIdeal(_) | VKind::PlaceFinite(_) | VKind::PlaceInfinite => 1,
            VKind::Gauss(inner) => inner.rank(),
            VKind::Composite(a, b) => a.rank() + b.rank(),
        }
    }

    pub fn is_trivial(&self) -> bool {
        matches!(self.kind, VKind::Trivial)
    }

    /// Basis of the value group as a lattice in Q^rank (empty for trivial).
    pub fn value_lattice_basis(&self) -> Vec<Vec<Rat>> {
        match &self.kind {
            VKind::Trivial => Vec::new(),
            VKind::PAdic(_) | VKind::PlaceFinite(_) | VKind::PlaceInfinite => {
                vec![vec![Rat::one()]]
            }
            VKind::PrimeIdeal(d) => vec![vec![Rat::new(BigInt::one(), BigInt::from(d.e))]],
            VKind::Gauss(inner) => inner.value_lattice_basis(),
            VKind::Composite(a, b) => {
                let ra = a.rank();
                let rb = b.rank();
                let mut out = Vec::new();
                for v in a.value_lattice_basis() {
                    let mut w = v;
                    w.extend(vec![Rat::zero(); rb]);
                    out.push(w);
                }
                for v in b.value_lattice_basis() {
                    let mut w = vec![Rat::zero(); ra];
                    w.extend(v);
                    out.push(w);
                }
                out
            }
        }
    }

    pub fn eval(&self, a: &El) -> Result<Option<Value>> {
        if self.field.is_zero(a) {
            return Ok(None);
        }
        Ok(Some(match &self.kind {
            VKind::Trivial => Vec::new(),
            VKind::PAdic(p) => match a {
                El::Rat(q) => vec![Rat::from(BigInt::from(vp_rat(q, *p)))],
                _ => return Err(Error::FieldMismatch("p-adic valuation expects a rational".into())),
            },
            VKind::PrimeIdeal(d) => {
                let El::Ext(coeffs) = a else {
                    return Err(Error::FieldMismatch("prime-ideal valuation expects an extension element".into()));
                };
                vec![prime_ideal_value(d, coeffs)?]
            }
            VKind::Gauss(inner) => {
                let El::RatFn(n, den) = a else {
                    return Err(Error::FieldMismatch("Gauss valuation expects a rational function".into()));
                };
                let mn = gauss_min(inner, n)?.expect("nonzero numerator");
                let md = gauss_min(inner, den)?.expect("nonzero denominator");
                mn.iter().zip(&md).map(|(x, y)| x - y).collect()
            }
            VKind::PlaceFinite(c) => {
                let El::RatFn(n, den) = a else {
                    return Err(Error::FieldMismatch("place expects a rational function".into()));
                };
                let base = ratfn_base(&self.field);
                let on = root_multiplicity(base, n, c) as i64;
                let od = root_multiplicity(base, den, c) as i64;
                vec![Rat::from(BigInt::from(on - od))]
            }
            VKind::PlaceInfinite => {
                let El::RatFn(n, den) = a else {
                    return Err(Error::FieldMismatch("place expects a rational function".into()));
                };
                let dn = n.degree().expect("nonzero") as i64;
                let dd = den.degree().expect("nonzero") as i64;
                vec![Rat::from(BigInt::from(dd - dn))]
            }
            VKind::Composite(outer, inner) => {
                let lo = outer.eval(a)?.expect("nonzero");
                let s = outer.section(&lo)?;
                let unit = self.field.div(a, &s)?;
                let r = outer.residue(&unit)?;
                let li = inner.eval(&r)?.ok_or_else(|| {
                    Error::Config("composite residue unexpectedly zero".into())
                })?;
                let mut v = lo;
                v.extend(li);
                v
            }
        }))
    }

    /// An element whose value is exactly `v` (a point of the value group).
    pub fn section(&self, v: &[Rat]) -> Result<El> {
        match &self.kind {
            VKind::Trivial => Ok(self.field.one()),
            VKind::PAdic(p) => {
                let k = as_integer(&v[0])?;
                self.field.pow_big(&El::Rat(Rat::from(BigInt::from(*p))), &k)
            }
            VKind::PrimeIdeal(d) => prime_ideal_section(&self.field, d, &v[0]),
            VKind::Gauss(inner) => {
                let s = inner.section(v)?;
                self.field.embed_from(&inner.field, &s)
            }
            VKind::PlaceFinite(c) => {
                let base = ratfn_base(&self.field).clone();
                let k = as_integer(&v[0])?;
                let x = self.field.generator().unwrap();
                let cc = self.field.embed_from(&base, c)?;
                let t = self.field.sub(&x, &cc);
                self.field.pow_big(&t, &k)
            }
            VKind::PlaceInfinite => {
                let k = as_integer(&v[0])?;
                let x = self.field.generator().unwrap();
                self.field.pow_big(&x, &(-k))
            }
            VKind::Composite(outer, inner) => {
                let ra = outer.rank();
                let so = outer.section(&v[..ra])?;
                let si = inner.section(&v[ra..])?;
                let lifted = lift_through_residue(outer, &si)?;
                Ok(self.field.mul(&so, &lifted))
            }
        }
    }

    pub fn residue_field(&self) -> Result<BaseField> {
        Ok(match &self.kind {
            VKind::Trivial => self.field.clone(),
            VKind::PAdic(p) => BaseField::PrimeField(*p),
            VKind::PrimeIdeal(d) => {
                if d.f == 1 {
                    BaseField::PrimeField(d.p)
                } else if d.multiplicity == 1 {
                    let coeffs = d
                        .factor_bar
                        .iter()
                        .map(|&c| El::Mod(c))
                        .collect::<Vec<_>>();
                    BaseField::finite_extension(d.p, Poly::new(coeffs), "t")?
                } else {
                    return Err(Error::Unsupported(
                        "residue field of a ramified prime with f > 1".into(),
                    ));
                }
            }
            VKind::Gauss(inner) => {
                BaseField::rational_functions(inner.residue_field()?, "x")
            }
            VKind::PlaceFinite(_) | VKind::PlaceInfinite => ratfn_base(&self.field).clone(),
            VKind::Composite(_, inner) => inner.residue_field()?,
        })
    }

    pub fn residue(&self, a: &El) -> Result<El> {
        let v = self.eval(a)?;
        let rf = self.residue_field()?;
        let Some(v) = v else {
            return Ok(rf.zero());
        };
        if !crate::lattice::lex_nonneg(&v) {
            return Err(Error::NegativeValue(self.field.format_el(a)));
        }
        if v.iter().any(|x| !x.is_zero()) {
            return Ok(rf.zero());
        }
        match &self.kind {
            VKind::Trivial => Ok(a.clone()),
            VKind::PAdic(p) => {
                let El::Rat(q) = a else { unreachable!() };
                Ok(El::Mod(rat_mod_p(q, *p)))
            }
            VKind::PrimeIdeal(d) => prime_ideal_residue(d, a, &rf),
            VKind::Gauss(inner) => {
                let El::RatFn(n, den) = a else { unreachable!() };
                let m = gauss_min(inner, den)?.expect("nonzero denominator");
                let s = inner.section(&m)?;
                let rb = inner.residue_field()?;
                let rn = reduce_poly_coeffs(inner, n, &s)?;
                let rd = reduce_poly_coeffs(inner, den, &s)?;
                let num = Poly::new(rn);
                let dpoly = Poly::new(rd);
                rf.clone()
                    .div(
                        &El::RatFn(num, Poly::constant(rb.one())),
                        &El::RatFn(dpoly, Poly::constant(rb.one())),
                    )
            }
            VKind::PlaceFinite(c) => {
                let El::RatFn(n, den) = a else { unreachable!() };
                let base = ratfn_base(&self.field);
                let nv = n.eval(base, c);
                let dv = den.eval(base, c);
                base.div(&nv, &dv)
            }
            VKind::PlaceInfinite => {
                let El::RatFn(n, den) = a else { unreachable!() };
                let base = ratfn_base(&self.field);
                base.div(
                    &n.leading_coefficient().unwrap(),
                    &den.leading_coefficient().unwrap(),
                )
            }
            VKind::Composite(outer, inner) => {
                let r = outer.residue(a)?;
                inner.residue(&r)
            }
        }
    }

    /// Canonical textual descriptor, used for deterministic ordering.
    pub fn descriptor(&self) -> String {
        match &self.kind {
            VKind::Trivial => "trivial".into(),
            VKind::PAdic(p) => format!("padic({p})"),
            VKind::PrimeIdeal(d) => format!("prime({},{},e{},f{})", d.p, d.index, d.e, d.f),
            VKind::Gauss(inner) => format!("gauss({})", inner.descriptor()),
            VKind::PlaceFinite(c) => {
                format!("place({})", ratfn_base(&self.field).format_el(c))
            }
            VKind::PlaceInfinite => "place(inf)".into(),
            VKind::Composite(a, b) => format!("comp({};{})", a.descriptor(), b.descriptor()),
        }
    }
}

fn ratfn_base(field: &BaseField) -> &BaseField {
    match field {
        BaseField::RationalFunctions { base, .. } => base,
        _ => panic!("expected a rational function field"),
    }
}

fn as_integer(q: &Rat) -> Result<BigInt> {
    if q.is_integer() {
        Ok(q.to_integer())
    } else {
        Err(Error::Config(format!("{q} is not in the value group")))
    }
}

/// Minimum inner value over the nonzero coefficients (None if poly is zero).
fn gauss_min(inner: &BaseValuation, p: &Poly) -> Result<Option<Value>> {
    let mut best: Option<Value> = None;
    for c in &p.0 {
        if let Some(v) = inner.eval(c)? {
            best = Some(match best {
                None => v,
                Some(b) => {
                    if crate::lattice::lex_cmp(&v, &b) == std::cmp::Ordering::Less {
                        v
                    } else {
                        b
                    }
                }
            });
        }
    }
    Ok(best)
}

fn reduce_poly_coeffs(inner: &BaseValuation, p: &Poly, s: &El) -> Result<Vec<El>> {
    p.0.iter()
        .map(|c| {
            let scaled = inner.field.div(c, s)?;
            inner.residue(&scaled)
        })
        .collect()
}

fn root_multiplicity(base: &BaseField, p: &Poly, c: &El) -> u32 {
    let mut p = p.clone();
    let mut k = 0;
    let divisor = Poly::new(vec![base.neg(c), base.one()]);
    loop {
        if p.is_zero() {
            return k;
        }
        let (q, r) = p.div_rem(base, &divisor);
        if r.is_zero() {
            k += 1;
            p = q;
        } else {
            return k;
        }
    }
}

fn lift_through_residue(outer: &BaseValuation, r: &El) -> Result<El> {
    // canonical coefficient lift from the residue field back to the field
    match &outer.kind {
        VKind::Trivial => Ok(r.clone()),
        VKind::PAdic(_) => {
            let El::Mod(m) = r else {
                return Err(Error::FieldMismatch("expected a prime-field residue".into()));
            };
            Ok(El::Rat(Rat::from(BigInt::from(*m))))
        }
        VKind::Gauss(inner) => {
            let El::RatFn(n, d) = r else {
                return Err(Error::FieldMismatch("expected a rational function residue".into()));
            };
            let lift_poly = |p: &Poly| -> Result<Poly> {
                Ok(Poly::new(
                    p.0.iter()
                        .map(|c| lift_through_residue(inner, c))
                        .collect::<Result<Vec<_>>>()?,
                ))
            };
            Ok(El::RatFn(lift_poly(n)?, lift_poly(d)?))
        }
        VKind::PlaceFinite(_) | VKind::PlaceInfinite => {
            outer.field.embed_from(ratfn_base(&outer.field), r)
        }
        _ => Err(Error::Unsupported(format!(
            "no canonical lift through {}",
            outer.descriptor()
        ))),
    }
}

// ---------------------------------------------------------------------------
// p-adic arithmetic on rationals and integer polynomials
// ---------------------------------------------------------------------------

pub fn vp_int(n: &BigInt, p: u64) -> i64 {
    assert!(!n.is_zero());
    let p = BigInt::from(p);
    let mut n = n.clone();
    let mut v = 0;
    loop {
        let (q, r) = n.div_rem(&p);
        if r.is_zero() {
            v += 1;
            n = q;
        } else {
            return v;
        }
    }
}

pub fn vp_rat(q: &BigRational, p: u64) -> i64 {
    vp_int(q.numer(), p) - vp_int(q.denom(), p)
}

fn rat_mod_p(q: &BigRational, p: u64) -> u64 {
    let pp = BigInt::from(p);
    let n = q.numer().mod_floor(&pp).to_u64().unwrap();
    let d = q.denom().mod_floor(&pp).to_u64().unwrap();
    assert!(d != 0, "denominator not a unit mod p");
    ((n as u128 * mod_inverse(d, p) as u128) % p as u128) as u64
}

// ---------------------------------------------------------------------------
// prime splitting in simple extensions of Q
// ---------------------------------------------------------------------------

/// Monic integral model: given the monic rational minpoly of alpha, return
/// (w, m_int) where beta = w*alpha has monic integral minpoly m_int.
fn integral_model(minpoly: &Poly) -> Result<(BigInt, Vec<BigInt>)> {
    let n = minpoly.degree().ok_or(Error::ZeroElement)?;
    let mut coeffs = Vec::new();
    for k in 0..=n {
        match minpoly.coeff(&BaseField::Rationals, k) {
            El::Rat(q) => coeffs.push(q),
            _ => return Err(Error::Unsupported("integral model needs a rational minpoly".into())),
        }
    }
    assert!(coeffs[n].is_one(), "minpoly must be monic");
    let mut w = BigInt::one();
    for c in &coeffs[..n] {
        w = w.lcm(c.denom());
    }
    // m_int(x) = w^n m(x/w): coefficient of x^k is c_k * w^(n-k)
    let m_int = (0..=n)
        .map(|k| {
            let scaled = &coeffs[k] * Rat::from(num_traits::pow::Pow::pow(&w, (n - k) as u32));
            debug_assert!(scaled.is_integer());
            scaled.to_integer()
        })
        .collect();
    Ok((w, m_int))
}

fn poly_mod_p(m: &[BigInt], p: u64) -> Vec<u64> {
    let pp = BigInt::from(p);
    m.iter()
        .map(|c| c.mod_floor(&pp).to_u64().unwrap())
        .collect()
}

fn trim_u64(mut v: Vec<u64>) -> Vec<u64> {
    while v.last() == Some(&0) {
        v.pop();
    }
    v
}

fn fp_poly(coeffs: &[u64]) -> Poly {
    Poly::new(coeffs.iter().map(|&c| El::Mod(c)).collect())
}

fn fp_coeffs(field: &BaseField, p: &Poly) -> Vec<u64> {
    let d = p.degree().map(|d| d + 1).unwrap_or(0);
    (0..d)
        .map(|k| match p.coeff(field, k) {
            El::Mod(m) => m,
            _ => unreachable!(),
        })
        .collect()
}

/// Factor a monic polynomial over F_p into irreducible factors with
/// multiplicity (degree <= 4).
fn factor_mod_p(coeffs: &[u64], p: u64) -> Result<Vec<(Vec<u64>, u64)>> {
    let fp = BaseField::PrimeField(p);
    let mut rest = fp_poly(coeffs);
    // normalize monic
    let lc = rest.leading_coefficient().unwrap();
    rest = rest.scale(&fp, &fp.inv(&lc).unwrap());
    let mut factors: Vec<(Vec<u64>, u64)> = Vec::new();
    let push = |f: Vec<u64>, factors: &mut Vec<(Vec<u64>, u64)>| {
        if let Some(entry) = factors.iter_mut().find(|(g, _)| *g == f) {
            entry.1 += 1;
        } else {
            factors.push((f, 1));
        }
    };
    // linear factors
    let mut progress = true;
    while progress {
        progress = false;
        if rest.degree() == Some(0) {
            break;
        }
        for a in 0..p {
            let root = El::Mod(a);
            if fp.is_zero(&rest.eval(&fp, &root)) {
                let lin = Poly::new(vec![fp.neg(&root), fp.one()]);
                let (q, r) = rest.div_rem(&fp, &lin);
                assert!(r.is_zero());
                rest = q;
                push(trim_u64(fp_coeffs(&fp, &lin)), &mut factors);
                progress = true;
                break;
            }
        }
    }
    // remaining part has no roots
    match rest.degree() {
        None | Some(0) => {}
        Some(2) | Some(3) => push(fp_coeffs(&fp, &rest), &mut factors),
        Some(4) => {
            // either irreducible or a product of two irreducible quadratics
            let mut split = false;
            'outer: for b in 0..p {
                for c in 0..p {
                    let q = Poly::new(vec![El::Mod(c), El::Mod(b), El::Mod(1)]);
                    let (quo, r) = rest.div_rem(&fp, &q);
                    if r.is_zero() {
                        push(fp_coeffs(&fp, &q), &mut factors);
                        push(fp_coeffs(&fp, &quo), &mut factors);
                        split = true;
                        break 'outer;
                    }
                }
            }
            if !split {
                push(fp_coeffs(&fp, &rest), &mut factors);
            }
        }
        Some(d) => {
            return Err(Error::Unsupported(format!(
                "mod-p factorization of degree {d} not supported"
            )))
        }
    }
    factors.sort();
    Ok(factors)
}

/// Multiply polys over F_p (u64 coefficient vectors).
fn fp_mul(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let fp = BaseField::PrimeField(p);
    trim_u64(fp_coeffs(&fp, &fp_poly(a).mul(&fp, &fp_poly(b))))
}

fn fp_pow(a: &[u64], k: u64, p: u64) -> Vec<u64> {
    let mut out = vec![1 % p];
    for _ in 0..k {
        out = fp_mul(&out, a, p);
    }
    out
}

/// Enumerate the primes of Q(alpha) over p (canonical order).
pub fn split_prime(field: &BaseField, p: u64) -> Result<Vec<PrimeData>> {
    let BaseField::SimpleExtension { base, minpoly, .. } = field else {
        return Err(Error::UnsupportedExtension(
            "prime splitting needs a simple extension".into(),
        ));
    };
    if **base != BaseField::Rationals {
        return Err(Error::UnsupportedExtension(
            "prime splitting only over Q".into(),
        ));
    }
    let (scale, m_int) = integral_model(minpoly)?;
    let mbar = poly_mod_p(&m_int, p);
    let factors = factor_mod_p(&mbar, p)?;
    let n_blocks = factors.len();
    let mut out = Vec::new();
    for (index, (fbar, mult)) in factors.iter().enumerate() {
        let f0 = (fbar.len() - 1) as u64;
        let (e, f) = if *mult == 1 {
            (1, f0)
        } else {
            // Newton-polygon check for the repeated-factor block: single side
            // from (0, v0) to (E, 0) with gcd(v0, E) = 1 means one totally
            // ramified prime over the degree-f0 unramified part.
            let block = block_lift(&m_int, &factors, index, p, 64)?;
            let v0 = newton_single_side(&block, fbar, p, *mult)?;
            let g = num_integer::gcd(v0 as u64, *mult);
            if g != 1 {
                return Err(Error::UnsupportedExtension(format!(
                    "prime over {p}: Newton polygon slope {v0}/{mult} is not primitive"
                )));
            }
            (*mult, f0)
        };
        out.push(PrimeData {
            p,
            index,
            e,
            f,
            scale: scale.clone(),
            m_int: m_int.clone(),
            factor_bar: fbar.clone(),
            multiplicity: *mult,
            n_blocks,
        });
    }
    Ok(out)
}

/// Lift the block factor_bar^mult of m_int to a monic integral polynomial
/// congruent to the true p-adic block factor mod p^precision.
fn block_lift(
    m_int: &[BigInt],
    factors: &[(Vec<u64>, u64)],
    index: usize,
    p: u64,
    precision: u32,
) -> Result<Vec<BigInt>> {
    if factors.len() == 1 {
        return Ok(m_int.to_vec());
    }
    let target_bar = fp_pow(&factors[index].0, factors[index].1, p);
    let mut cofactor_bar = vec![1 % p];
    for (i, (fb, mult)) in factors.iter().enumerate() {
        if i != index {
            cofactor_bar = fp_mul(&cofactor_bar, &fp_pow(fb, *mult, p), p);
        }
    }
    let (block, _) = hensel_lift_pair(m_int, &target_bar, &cofactor_bar, p, precision)?;
    Ok(block)
}

/// Linear Hensel lifting: m = F*G mod p^precision with F = fbar, G = gbar mod p.
fn hensel_lift_pair(
    m: &[BigInt],
    fbar: &[u64],
    gbar: &[u64],
    p: u64,
    precision: u32,
) -> Result<(Vec<BigInt>, Vec<BigInt>)> {
    let fp = BaseField::PrimeField(p);
    let fb = fp_poly(fbar);
    let gb = fp_poly(gbar);
    let (gcd, s, t) = Poly::extended_gcd(&fp, &fb, &gb);
    if gcd.degree() != Some(0) {
        return Err(Error::Config("Hensel lifting needs coprime factors".into()));
    }
    let ginv = fp.inv(&gcd.coeff(&fp, 0)).unwrap();
    let s = s.scale(&fp, &ginv); // s*fb + t*gb = 1 mod p
    let t = t.scale(&fp, &ginv);

    let big = |v: &[u64]| -> Vec<BigInt> { v.iter().map(|&c| BigInt::from(c)).collect() };
    let mut fcur = big(fbar);
    let mut gcur = big(gbar);
    let mut pk = BigInt::from(p);
    let pbig = BigInt::from(p);
    for _ in 1..precision {
        // delta = (m - fcur*gcur) / p^k mod p
        let prod = int_poly_mul(&fcur, &gcur);
        let diff = int_poly_sub(m, &prod);
        let delta: Vec<u64> = diff
            .iter()
            .map(|c| {
                let (q, r) = c.div_rem(&pk);
                assert!(r.is_zero(), "Hensel invariant broken");
                q.mod_floor(&pbig).to_u64().unwrap()
            })
            .collect();
        let dpoly = fp_poly(&trim_u64(delta));
        // correction: b = t*delta mod fb ; a = s*delta + q*gb  (f += p^k b, g += p^k a)
        let tb = t.mul(&fp, &dpoly);
        let (q, b) = tb.div_rem(&fp, &fb);
        let a = s.mul(&fp, &dpoly).add(&fp, &q.mul(&fp, &gb));
        let badd = fp_coeffs(&fp, &b);
        let aadd = fp_coeffs(&fp, &a);
        for (i, &c) in badd.iter().enumerate() {
            if i >= fcur.len() {
                fcur.resize(i + 1, BigInt::zero());
            }
            fcur[i] += &pk * BigInt::from(c);
        }
        for (i, &c) in aadd.iter().enumerate() {
            if i >= gcur.len() {
                gcur.resize(i + 1, BigInt::zero());
            }
            gcur[i] += &pk * BigInt::from(c);
        }
        pk *= &pbig;
    }
    Ok((fcur, gcur))
}

fn int_poly_mul(a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
    let mut out = vec![BigInt::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn int_poly_sub(a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
    let n = a.len().max(b.len());
    (0..n)
        .map(|i| {
            let x = a.get(i).cloned().unwrap_or_else(BigInt::zero);
            let y = b.get(i).cloned().unwrap_or_else(BigInt::zero);
            x - y
        })
        .collect()
}

/// phi-adic Newton polygon of `block` w.r.t. the lift of fbar; requires a
/// single side from (0, v0) to (mult, 0) and returns v0.
fn newton_single_side(block: &[BigInt], fbar: &[u64], p: u64, mult: u64) -> Result<i64> {
    // phi-adic expansion with the simple integral lift of fbar
    let phi: Vec<BigInt> = fbar.iter().map(|&c| BigInt::from(c)).collect();
    let mut rest = block.to_vec();
    let mut layers: Vec<Vec<BigInt>> = Vec::new();
    while rest.iter().any(|c| !c.is_zero()) {
        let (q, r) = int_poly_div_monic(&rest, &phi);
        layers.push(r);
        rest = q;
    }
    let vals: Vec<Option<i64>> = layers
        .iter()
        .map(|layer| {
            layer
                .iter()
                .filter(|c| !c.is_zero())
                .map(|c| vp_int(c, p))
                .min()
        })
        .collect();
    let v0 = vals
        .first()
        .cloned()
        .flatten()
        .ok_or_else(|| Error::Unsupported("degenerate Newton polygon".into()))?;
    let e = mult as i64;
    if vals.len() as i64 <= e {
        return Err(Error::Unsupported("short phi-adic expansion".into()));
    }
    if vals[e as usize] != Some(0) {
        return Err(Error::UnsupportedExtension(
            "Newton polygon does not end at height 0".into(),
        ));
    }
    for (j, vj) in vals.iter().enumerate() {
        if let Some(vj) = vj {
            // on or above the line from (0,v0) to (e,0): vj >= v0*(e-j)/e
            if BigInt::from(*vj) * e < BigInt::from(v0) * (e - j as i64) {
                return Err(Error::UnsupportedExtension(
                    "Newton polygon has more than one side".into(),
                ));
            }
        }
    }
    Ok(v0)
}

fn int_poly_div_monic(a: &[BigInt], d: &[BigInt]) -> (Vec<BigInt>, Vec<BigInt>) {
    assert!(d.last() == Some(&BigInt::one()), "divisor must be monic");
    let dd = d.len() - 1;
    let mut r = a.to_vec();
    let mut q = vec![BigInt::zero(); a.len()];
    while r.len() > dd && r.iter().any(|c| !c.is_zero()) {
        while r.last() == Some(&BigInt::zero()) {
            r.pop();
        }
        if r.len() <= dd {
            break;
        }
        let shift = r.len() - 1 - dd;
        let c = r.last().unwrap().clone();
        q[shift] += &c;
        for (i, di) in d.iter().enumerate() {
            let t = di * &c;
            r[shift + i] -= t;
        }
    }
    while r.last() == Some(&BigInt::zero()) {
        r.pop();
    }
    (q, r)
}

/// Resultant of two integer polynomials via the Sylvester determinant.
fn resultant(a: &[BigInt], b: &[BigInt]) -> BigInt {
    let da = a.len() - 1;
    let db = b.len() - 1;
    if da == 0 {
        return num_traits::pow::Pow::pow(&a[0], db as u32);
    }
    if db == 0 {
        return num_traits::pow::Pow::pow(&b[0], da as u32);
    }
    let n = da + db;
    let mut m = vec![vec![Rat::zero(); n]; n];
    for row in 0..db {
        for (k, c) in a.iter().enumerate() {
            m[row][row + (da - k)] = Rat::from(c.clone());
        }
    }
    for row in 0..da {
        for (k, c) in b.iter().enumerate() {
            m[db + row][row + (db - k)] = Rat::from(c.clone());
        }
    }
    let d = matrix::det(&m);
    debug_assert!(d.is_integer());
    d.to_integer()
}

/// Value of an extension element (coefficients of alpha powers over Q) at
/// the prime described by `d`, normalized so v(p) = 1.
fn prime_ideal_value(d: &PrimeData, coeffs: &[El]) -> Result<Rat> {
    // rewrite in beta = scale*alpha: coefficient j scaled by scale^-j
    let mut g: Vec<Rat> = Vec::with_capacity(coeffs.len());
    for (j, c) in coeffs.iter().enumerate() {
        let El::Rat(q) = c else {
            return Err(Error::FieldMismatch("extension coefficients must be rational".into()));
        };
        let s = Rat::from(num_traits::pow::Pow::pow(&d.scale, j as u32));
        g.push(q / s);
    }
    // content * primitive
    let mut denlcm = BigInt::one();
    for q in &g {
        denlcm = denlcm.lcm(q.denom());
    }
    let ints: Vec<BigInt> = g
        .iter()
        .map(|q| (q * Rat::from(denlcm.clone())).to_integer())
        .collect();
    let mut content = BigInt::zero();
    for c in &ints {
        content = content.gcd(c);
    }
    assert!(!content.is_zero());
    let prim: Vec<BigInt> = ints.iter().map(|c| c / &content).collect();
    let content_rat = Rat::new(content, denlcm);
    let vc = vp_rat(&content_rat, d.p);

    let prim = {
        let mut v = prim;
        while v.last() == Some(&BigInt::zero()) {
            v.pop();
        }
        v
    };
    let vblock = if prim.len() == 1 {
        // rational multiple of 1: valuation of the integer content only
        let v = if prim[0].abs() == BigInt::one() {
            0
        } else {
            vp_int(&prim[0], d.p)
        };
        Rat::from(BigInt::from(v))
    } else {
        block_resultant_valuation(d, &prim)?
    };
    Ok(Rat::from(BigInt::from(vc)) + vblock)
}

fn block_resultant_valuation(d: &PrimeData, prim: &[BigInt]) -> Result<Rat> {
    let factors = factor_mod_p(&poly_mod_p(&d.m_int, d.p), d.p)?;
    let ef = BigInt::from(d.e * d.f);
    let mut precision: u32 = 16;
    loop {
        let block = block_lift(&d.m_int, &factors, d.index, d.p, precision)?;
        let r = resultant(&block, prim);
        if r.is_zero() {
            precision *= 2;
            if precision > 4096 {
                return Err(Error::Unsupported("resultant precision exhausted".into()));
            }
            continue;
        }
        let v = vp_int(&r, d.p);
        if (v as u32) < precision || d.n_blocks == 1 {
            return Ok(Rat::new(BigInt::from(v), ef));
        }
        precision *= 2;
        if precision > 4096 {
            return Err(Error::Unsupported("resultant precision exhausted".into()));
        }
    }
}

fn prime_ideal_residue(d: &PrimeData, a: &El, _rf: &BaseField) -> Result<El> {
    if d.multiplicity != 1 {
        return Err(Error::Unsupported(
            "residues at ramified primes are not supported".into(),
        ));
    }
    let El::Ext(coeffs) = a else { unreachable!() };
    // rewrite in beta, split content
    let mut g: Vec<Rat> = Vec::new();
    for (j, c) in coeffs.iter().enumerate() {
        let El::Rat(q) = c else { unreachable!() };
        let s = Rat::from(num_traits::pow::Pow::pow(&d.scale, j as u32));
        g.push(q / s);
    }
    let mut denlcm = BigInt::one();
    for q in &g {
        denlcm = denlcm.lcm(q.denom());
    }
    let ints: Vec<BigInt> = g
        .iter()
        .map(|q| (q * Rat::from(denlcm.clone())).to_integer())
        .collect();
    let mut content = BigInt::zero();
    for c in &ints {
        content = content.gcd(c);
    }
    let prim: Vec<BigInt> = ints.iter().map(|c| c / &content).collect();
    let content_rat = Rat::new(content, denlcm);

    let mut prim_t = prim.clone();
    while prim_t.last() == Some(&BigInt::zero()) {
        prim_t.pop();
    }
    // valuation k of the primitive part at this prime (an integer: e = 1)
    let k = if prim_t.len() == 1 {
        vp_int(&prim_t[0], d.p)
    } else {
        let v = block_resultant_valuation(d, &prim_t)?;
        debug_assert!(v.is_integer());
        v.to_integer().to_i64().unwrap() as i64
    };
    let vc = vp_rat(&content_rat, d.p);
    assert!(k + vc == 0, "residue of a non-unit requested");

    let precision = (k.unsigned_abs() as u32) + 16;
    let factors = factor_mod_p(&poly_mod_p(&d.m_int, d.p), d.p)?;
    let block = block_lift(&d.m_int, &factors, d.index, d.p, precision)?;
    let (_, r) = int_poly_div_monic(&prim_t, &block);
    let pk = num_traits::pow::Pow::pow(&BigInt::from(d.p), k as u32);
    let unit_content = content_rat * Rat::from(pk.clone()); // v_p = 0
    let cmod = rat_mod_p(&unit_content, d.p);
    let pbig = BigInt::from(d.p);
    let rc: Vec<u64> = r
        .iter()
        .map(|c| {
            let (q, rem) = c.div_rem(&pk);
            assert!(rem.is_zero(), "unit part not divisible by p^k");
            q.mod_floor(&pbig).to_u64().unwrap()
        })
        .collect();
    let fp = BaseField::PrimeField(d.p);
    let scaled = fp_poly(&rc).scale(&fp, &El::Mod(cmod));
    if d.f == 1 {
        // reduce mod the linear factor: evaluate at its root
        let root = (d.p - d.factor_bar[0] % d.p) % d.p;
        Ok(scaled.eval(&fp, &El::Mod(root)))
    } else {
        let (_, rem) = scaled.div_rem(&fp, &fp_poly(&d.factor_bar));
        Ok(El::Ext(rem.padded_coeffs(&fp, d.f as usize)))
    }
}

fn prime_ideal_section(field: &BaseField, d: &PrimeData, v: &Rat) -> Result<El> {
    let e = BigInt::from(d.e);
    let scaled = v * Rat::from(e.clone());
    let m = as_integer(&scaled)?; // v = m/e
    if d.e == 1 {
        return field.pow_big(&field.from_i64(d.p as i64), &m);
    }
    // uniformizer: phi(beta) has value v0/e with a*v0 + b*e = 1
    let phi_beta = eval_int_poly_at_beta(field, d, &d.factor_bar)?;
    let vphi = prime_ideal_value(
        d,
        match &phi_beta {
            El::Ext(c) => c,
            _ => unreachable!(),
        },
    )?;
    let v0 = as_integer(&(vphi * Rat::from(e.clone())))?;
    let g = num_integer::Integer::extended_gcd(&v0, &e);
    assert!(g.gcd.is_one());
    // (a*v0 + b*e) * m = m  =>  exponent of phi: a*m, exponent of p: b*m
    let ea = &g.x * &m;
    let eb = &g.y * &m;
    let p_el = field.from_i64(d.p as i64);
    let part1 = field.pow_big(&phi_beta, &ea)?;
    let part2 = field.pow_big(&p_el, &eb)?;
    Ok(field.mul(&part1, &part2))
}

fn eval_int_poly_at_beta(field: &BaseField, d: &PrimeData, coeffs: &[u64]) -> Result<El> {
    // beta = scale * alpha; evaluate sum c_j beta^j as an element of Q(alpha)
    let BaseField::SimpleExtension { minpoly, .. } = field else {
        return Err(Error::FieldMismatch("expected simple extension".into()));
    };
    let n = minpoly.degree().unwrap();
    let alpha = field.generator().unwrap();
    let beta = field.mul(
        &field.from_rat(&Rat::from(d.scale.clone()))?,
        &alpha,
    );
    let mut acc = field.zero();
    for &c in coeffs.iter().rev() {
        acc = field.mul(&acc, &beta);
        acc = field.add(&acc, &field.from_i64(c as i64));
    }
    let _ = n;
    Ok(acc)
}

// ---------------------------------------------------------------------------
// residues as first-class values
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResidueElement {
    pub field: BaseField,
    pub value: El,
}

/// Is `r` a d-th power in its (residue) field?
pub fn residue_power_test(r: &ResidueElement, d: u32) -> Result<bool> {
    if r.field.is_zero(&r.value) {
        return Err(Error::ZeroElement);
    }
    power_test(&r.field, &r.value, d)
}

fn power_test(field: &BaseField, a: &El, d: u32) -> Result<bool> {
    match field {
        BaseField::Rationals => {
            let El::Rat(q) = a else { unreachable!() };
            Ok(is_rat_power(q, d))
        }
        BaseField::PrimeField(p) => {
            let g = num_integer::gcd(d as u64, p - 1);
            let exp = BigInt::from((p - 1) / g);
            Ok(field.pow_big(a, &exp)? == field.one())
        }
        BaseField::SimpleExtension { base, minpoly, .. } => match **base {
            BaseField::PrimeField(p) => {
                let f = minpoly.degree().unwrap() as u32;
                let q: BigInt = num_traits::pow::Pow::pow(&BigInt::from(p), f) - 1u32;
                let g = q.gcd(&BigInt::from(d));
                let exp = &q / &g;
                Ok(field.pow_big(a, &exp)? == field.one())
            }
            _ => Err(Error::Unsupported(
                "power test in characteristic-zero extensions".into(),
            )),
        },
        BaseField::RationalFunctions { base, .. } => {
            let El::RatFn(n, den) = a else { unreachable!() };
            if let BaseField::PrimeField(p) = **base {
                if d as u64 % p == 0 {
                    return Err(Error::Unsupported(
                        "power test with exponent divisible by the characteristic".into(),
                    ));
                }
            }
            let lc = n.leading_coefficient().unwrap();
            let unit = base.div(&lc, &den.leading_coefficient().unwrap())?;
            let nmonic = n.scale(base, &base.inv(&lc)?);
            let lcd = den.leading_coefficient().unwrap();
            let dmonic = den.scale(base, &base.inv(&lcd)?);
            Ok(nmonic.monic_dth_root(base, d).is_some()
                && dmonic.monic_dth_root(base, d).is_some()
                && power_test(base, &unit, d)?)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{rat, rat_int};

    fn qi() -> BaseField {
        BaseField::gaussian()
    }

    fn el_qi(re: (i64, i64), im: (i64, i64)) -> El {
        El::Ext(vec![El::Rat(rat(re.0, re.1)), El::Rat(rat(im.0, im.1))])
    }

    #[test]
    fn padic_on_rationals() {
        let v = BaseValuation::p_adic(5);
        assert_eq!(
            v.eval(&El::Rat(rat_int(10))).unwrap(),
            Some(vec![rat_int(1)])
        );
        assert_eq!(v.eval(&El::Rat(rat(7, 25))).unwrap(), Some(vec![rat_int(-2)]));
        assert_eq!(v.eval(&El::Rat(rat_int(0))).unwrap(), None);
    }

    #[test]
    fn padic_residue() {
        let v = BaseValuation::p_adic(5);
        // 7/3 = 7 * 3^-1 = 7 * 2 = 14 = 4 mod 5, frozen from hand computation
        assert_eq!(v.residue(&El::Rat(rat(7, 3))).unwrap(), El::Mod(4));
        assert_eq!(v.residue(&El::Rat(rat_int(5))).unwrap(), El::Mod(0));
        assert!(matches!(
            v.residue(&El::Rat(rat(1, 5))),
            Err(Error::NegativeValue(_))
        ));
    }

    #[test]
    fn split_5_in_qi() {
        let primes = split_prime(&qi(), 5).unwrap();
        assert_eq!(primes.len(), 2);
        for d in &primes {
            assert_eq!((d.e, d.f), (1, 1));
        }
        // v(2+i) must be 1 at one prime and 0 at the other
        let a = el_qi((2, 1), (1, 1));
        let vals: Vec<Rat> = primes
            .iter()
            .map(|d| {
                BaseValuation {
                    field: qi(),
                    kind: VKind::PrimeIdeal(d.clone()),
                }
                .eval(&a)
                .unwrap()
                .unwrap()[0]
                    .clone()
            })
            .collect();
        let mut sorted = vals.clone();
        sorted.sort();
        assert_eq!(sorted, vec![rat_int(0), rat_int(1)]);
        // v(5) = 1 at both
        let five = el_qi((5, 1), (0, 1));
        for d in &primes {
            let v = BaseValuation {
                field: qi(),
                kind: VKind::PrimeIdeal(d.clone()),
            };
            assert_eq!(v.eval(&five).unwrap(), Some(vec![rat_int(1)]));
        }
    }

    #[test]
    fn inert_3_in_qi() {
        let primes = split_prime(&qi(), 3).unwrap();
        assert_eq!(primes.len(), 1);
        assert_eq!((primes[0].e, primes[0].f), (1, 2));
        let v = BaseValuation {
            field: qi(),
            kind: VKind::PrimeIdeal(primes[0].clone()),
        };
        assert_eq!(v.eval(&el_qi((0, 1), (1, 1))).unwrap(), Some(vec![rat_int(0)]));
        assert_eq!(v.eval(&el_qi((3, 1), (0, 1))).unwrap(), Some(vec![rat_int(1)]));
        assert_eq!(v.eval(&el_qi((3, 1), (3, 1))).unwrap(), Some(vec![rat_int(1)]));
    }

    #[test]
    fn ramified_2_in_qi() {
        let primes = split_prime(&qi(), 2).unwrap();
        assert_eq!(primes.len(), 1);
        assert_eq!((primes[0].e, primes[0].f), (2, 1));
        let v = BaseValuation {
            field: qi(),
            kind: VKind::PrimeIdeal(primes[0].clone()),
        };
        // v(1+i) = 1/2, v(2) = 1
        assert_eq!(v.eval(&el_qi((1, 1), (1, 1))).unwrap(), Some(vec![rat(1, 2)]));
        assert_eq!(v.eval(&el_qi((2, 1), (0, 1))).unwrap(), Some(vec![rat_int(1)]));
        // section of 1/2 must have value 1/2
        let s = v.section(&[rat(1, 2)]).unwrap();
        assert_eq!(v.eval(&s).unwrap(), Some(vec![rat(1, 2)]));
    }

    #[test]
    fn sum_ef_equals_degree() {
        for p in [5u64, 3, 2] {
            let primes = split_prime(&qi(), p).unwrap();
            let total: u64 = primes.iter().map(|d| d.e * d.f).sum();
            assert_eq!(total, 2, "sum e_i f_i = [Q(i):Q] fails for p = {p}");
        }
    }

    #[test]
    fn gauss_over_5adic() {
        // the Gauss obstruction: f = x(1-5x) has value 0 and residue x
        let v = BaseValuation::gauss(BaseValuation::p_adic(5), "x");
        let qx = v.field.clone();
        let x = qx.generator().unwrap();
        let one = qx.one();
        let five_x = qx.mul(&qx.from_i64(5), &x);
        let f = qx.mul(&x, &qx.sub(&one, &five_x));
        assert_eq!(v.eval(&f).unwrap(), Some(vec![rat_int(0)]));
        let r = v.residue(&f).unwrap();
        let rf = v.residue_field().unwrap();
        assert_eq!(r, rf.generator().unwrap());
        // not a square, not a cube
        let re = ResidueElement { field: rf, value: r };
        assert!(!residue_power_test(&re, 2).unwrap());
        assert!(!residue_power_test(&re, 3).unwrap());
    }

    #[test]
    fn power_tests() {
        let f5 = BaseField::PrimeField(5);
        assert!(residue_power_test(
            &ResidueElement { field: f5.clone(), value: El::Mod(4) },
            2
        )
        .unwrap());
        assert!(!residue_power_test(
            &ResidueElement { field: f5.clone(), value: El::Mod(2) },
            2
        )
        .unwrap());
        let f5x = BaseField::rational_functions(f5, "x");
        let x = f5x.generator().unwrap();
        let x2 = f5x.mul(&x, &x);
        assert!(residue_power_test(
            &ResidueElement { field: f5x.clone(), value: x2 },
            2
        )
        .unwrap());
        assert!(matches!(
            residue_power_test(
                &ResidueElement {
                    field: f5x.clone(),
                    value: f5x.zero()
                },
                2
            ),
            Err(Error::ZeroElement)
        ));
    }

    #[test]
    fn composite_rank_two() {
        // 5-adic Gauss on Q(x), refined by the x-adic place on F5(x): v(5) = (1,0)
        let outer = BaseValuation::gauss(BaseValuation::p_adic(5), "x");
        let f5x = outer.residue_field().unwrap();
        let inner = BaseValuation {
            field: f5x,
            kind: VKind::PlaceFinite(Box::new(El::Mod(0))),
        };
        let v = BaseValuation::composite(outer, inner).unwrap();
        let five = v.field.from_i64(5);
        assert_eq!(v.eval(&five).unwrap(), Some(vec![rat_int(1), rat_int(0)]));
        let x = v.field.generator().unwrap();
        assert_eq!(v.eval(&x).unwrap(), Some(vec![rat_int(0), rat_int(1)]));
    }

    #[test]
    fn place_valuation() {
        let f5x = BaseField::rational_functions(BaseField::PrimeField(5), "x");
        let v = BaseValuation {
            field: f5x.clone(),
            kind: VKind::PlaceFinite(Box::new(El::Mod(0))),
        };
        let x = f5x.generator().unwrap();
        assert_eq!(v.eval(&x).unwrap(), Some(vec![rat_int(1)]));
        let xp1 = f5x.add(&x, &f5x.one());
        assert_eq!(v.eval(&xp1).unwrap(), Some(vec![rat_int(0)]));
        assert_eq!(v.residue(&xp1).unwrap(), El::Mod(1));
    }
}
