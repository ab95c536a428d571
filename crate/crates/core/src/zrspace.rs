//! Basic constructible sets, the seven-condition non-valuation certificate,
//! finite Zariski-Riemann models with group actions, and the stable affine
//! neighborhood search.

use crate::error::{Error, Result};
use crate::galois::{act_on_valuation, apply_aut, AutGroup};
use crate::gradedfield::{GradedElement, GradedField};
use crate::gradedvaluation::{ring_containment, GradedValuation, ValuePoint};
use crate::matrix::Rat;
use num_bigint::BigInt;
use num_traits::{Signed, Zero};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

// ---------------------------------------------------------------------------
// basic sets
// ---------------------------------------------------------------------------

/// P{F}{G}^bar: valuations whose ring contains all of `positive` and none of
/// `negative`.  Affine iff `negative` is empty.
#[derive(Debug, Clone, Default)]
pub struct BasicSet {
    pub positive: Vec<GradedElement>,
    pub negative: Vec<GradedElement>,
}

pub fn basic_member(b: &BasicSet, v: &GradedValuation) -> Result<bool> {
    for f in &b.positive {
        if f.parent != v.parent {
            return Err(Error::ParentMismatch("basic set element vs valuation".into()));
        }
        if !v.ring_member(f)? {
            return Ok(false);
        }
    }
    for g in &b.negative {
        if g.parent != v.parent {
            return Err(Error::ParentMismatch("basic set element vs valuation".into()));
        }
        if v.ring_member(g)? {
            return Ok(false);
        }
    }
    Ok(true)
}

// ---------------------------------------------------------------------------
// membership tables and certificates
// ---------------------------------------------------------------------------

/// A claimed trace Sigma = O cap K^x on a finite universe of nonzero
/// homogeneous elements.  A `None` bit means the claim is silent there.
#[derive(Debug, Clone)]
pub struct MembershipTable {
    pub parent: GradedField,
    pub universe: Vec<GradedElement>,
    pub bits: Vec<Option<bool>>,
}

impl MembershipTable {
    pub fn new(
        parent: GradedField,
        universe: Vec<GradedElement>,
        bits: Vec<Option<bool>>,
    ) -> Result<Self> {
        if universe.len() != bits.len() {
            return Err(Error::Config("one bit per universe element".into()));
        }
        if !universe.iter().any(|x| *x == parent.one()) {
            return Err(Error::Config("universe must contain 1".into()));
        }
        for (i, x) in universe.iter().enumerate() {
            if x.is_zero() || !x.is_homogeneous() {
                return Err(Error::NonHomogeneous(
                    "universe elements must be nonzero homogeneous".into(),
                ));
            }
            if universe[..i].contains(x) {
                return Err(Error::Config("duplicate universe element".into()));
            }
        }
        Ok(MembershipTable {
            parent,
            universe,
            bits,
        })
    }

    /// The honest trace of a valuation ring on the universe.
    pub fn trace(parent: GradedField, universe: Vec<GradedElement>, v: &GradedValuation) -> Result<Self> {
        let bits = universe
            .iter()
            .map(|x| v.ring_member(x).map(Some))
            .collect::<Result<Vec<_>>>()?;
        MembershipTable::new(parent, universe, bits)
    }

    fn lookup(&self, x: &GradedElement) -> Option<Option<bool>> {
        self.universe
            .iter()
            .position(|u| u == x)
            .map(|i| self.bits[i])
    }

    /// Membership bit of an element known to be in the universe.
    fn bit(&self, x: &GradedElement) -> Result<Option<bool>> {
        match self.lookup(x) {
            Some(Some(b)) => Ok(Some(b)),
            Some(None) => Err(Error::IncompleteUniverse(format!(
                "missing membership bit for {}",
                self.parent.format(x)
            ))),
            None => Ok(None),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rule {
    /// a, b in Sigma of the same degree but a+b in K^x \ Sigma
    I,
    /// a in Sigma but -a not in Sigma
    INeg,
    /// a in k^x but not in Sigma
    II,
    /// a, b in Sigma but ab not in Sigma
    III,
    /// neither a nor 1/a in Sigma
    IV,
    /// required element (external F) not in Sigma
    V,
    /// forbidden element (external G) in Sigma
    VNeg,
}

impl Rule {
    pub fn name(&self) -> &'static str {
        match self {
            Rule::I => "I",
            Rule::INeg => "I_NEG",
            Rule::II => "II",
            Rule::III => "III",
            Rule::IV => "IV",
            Rule::V => "V",
            Rule::VNeg => "V_NEG",
        }
    }
}

#[derive(Debug, Clone)]
pub struct Certificate {
    pub rule: Rule,
    pub witnesses: Vec<GradedElement>,
}

/// Replay a certificate against the table; true iff it exhibits a genuine
/// violation of the graded-valuation-trace axioms.
pub fn replay_certificate(
    t: &MembershipTable,
    cert: &Certificate,
    required: &[GradedElement],
    forbidden: &[GradedElement],
) -> Result<bool> {
    let field = &t.parent;
    let in_sigma = |x: &GradedElement| -> Result<bool> {
        t.bit(x).map(|b| b == Some(true))
    };
    Ok(match (cert.rule, cert.witnesses.as_slice()) {
        (Rule::II, [a]) => !in_sigma(a)?,
        (Rule::INeg, [a]) => in_sigma(a)? && !in_sigma(&field.neg(a)?)?,
        (Rule::I, [a, b]) => {
            let s = field.add(a, b)?;
            in_sigma(a)? && in_sigma(b)? && !s.is_zero() && !in_sigma(&s)?
        }
        (Rule::III, [a, b]) => in_sigma(a)? && in_sigma(b)? && !in_sigma(&field.mul(a, b)?)?,
        (Rule::IV, [a]) => !in_sigma(a)? && !in_sigma(&field.invert_homogeneous(a)?)?,
        (Rule::V, [a]) => required.contains(a) && !in_sigma(a)?,
        (Rule::VNeg, [a]) => forbidden.contains(a) && in_sigma(a)?,
        _ => false,
    })
}

/// First violated rule on this universe in the canonical scan order
/// (ii), (i'), (i), (iii), (iv), (v), (v'); within a rule, lex order on the
/// serialized witnesses.  NONE means no violation relative to the universe.
pub fn nonvaluation_certificate(
    t: &MembershipTable,
    k_elems: &[GradedElement],
    required: &[GradedElement],
    forbidden: &[GradedElement],
) -> Result<Option<Certificate>> {
    let field = &t.parent;
    let fmt = |ws: &[&GradedElement]| -> String {
        ws.iter()
            .map(|w| field.format(w))
            .collect::<Vec<_>>()
            .join("|")
    };
    let mut sigma: Vec<bool> = Vec::new();
    for (x, b) in t.universe.iter().zip(&t.bits) {
        match b {
            Some(v) => sigma.push(*v),
            None => {
                return Err(Error::IncompleteUniverse(format!(
                    "missing membership bit for {}",
                    field.format(x)
                )))
            }
        }
    }
    let in_sigma = |i: usize| sigma[i];
    let pick = |mut violations: Vec<(String, Vec<GradedElement>)>, rule: Rule| {
        violations.sort_by(|a, b| a.0.cmp(&b.0));
        violations
            .into_iter()
            .next()
            .map(|(_, witnesses)| Certificate { rule, witnesses })
    };

    // (ii): a in k^x \ Sigma
    {
        let mut vs = Vec::new();
        for a in k_elems {
            match t.bit(a)? {
                Some(true) => {}
                Some(false) => vs.push((fmt(&[a]), vec![a.clone()])),
                None => {
                    return Err(Error::IncompleteUniverse(format!(
                        "base-field element {} absent from the universe",
                        field.format(a)
                    )))
                }
            }
        }
        if let Some(c) = pick(vs, Rule::II) {
            return Ok(Some(c));
        }
    }
    // (i'): a in Sigma, -a not
    {
        let mut vs = Vec::new();
        for (i, a) in t.universe.iter().enumerate() {
            if !in_sigma(i) {
                continue;
            }
            let na = field.neg(a)?;
            if t.bit(&na)? == Some(false) {
                vs.push((fmt(&[a]), vec![a.clone()]));
            }
        }
        if let Some(c) = pick(vs, Rule::INeg) {
            return Ok(Some(c));
        }
    }
    // (i): a, b in Sigma of equal degree, a + b in K^x \ Sigma
    {
        let mut vs = Vec::new();
        for (i, a) in t.universe.iter().enumerate() {
            for (j, b) in t.universe.iter().enumerate() {
                if !in_sigma(i) || !in_sigma(j) {
                    continue;
                }
                let (da, _) = a.homogeneous_part()?;
                let (db, _) = b.homogeneous_part()?;
                if da != db {
                    continue;
                }
                let s = field.add(a, b)?;
                if s.is_zero() {
                    continue;
                }
                if t.bit(&s)? == Some(false) {
                    vs.push((fmt(&[a, b]), vec![a.clone(), b.clone()]));
                }
            }
        }
        if let Some(c) = pick(vs, Rule::I) {
            return Ok(Some(c));
        }
    }
    // (iii): a, b in Sigma, ab not
    {
        let mut vs = Vec::new();
        for (i, a) in t.universe.iter().enumerate() {
            for (j, b) in t.universe.iter().enumerate() {
                if !in_sigma(i) || !in_sigma(j) {
                    continue;
                }
                let p = field.mul(a, b)?;
                if t.bit(&p)? == Some(false) {
                    vs.push((fmt(&[a, b]), vec![a.clone(), b.clone()]));
                }
            }
        }
        if let Some(c) = pick(vs, Rule::III) {
            return Ok(Some(c));
        }
    }
    // (iv): a not in Sigma and 1/a not in Sigma
    {
        let mut vs = Vec::new();
        for (i, a) in t.universe.iter().enumerate() {
            if in_sigma(i) {
                continue;
            }
            let inv = field.invert_homogeneous(a)?;
            if t.bit(&inv)? == Some(false) {
                vs.push((fmt(&[a]), vec![a.clone()]));
            }
        }
        if let Some(c) = pick(vs, Rule::IV) {
            return Ok(Some(c));
        }
    }
    // (v): external F must lie in Sigma
    {
        let mut vs = Vec::new();
        for a in required {
            if t.bit(a)? == Some(false) {
                vs.push((fmt(&[a]), vec![a.clone()]));
            }
        }
        if let Some(c) = pick(vs, Rule::V) {
            return Ok(Some(c));
        }
    }
    // (v'): external G must avoid Sigma
    {
        let mut vs = Vec::new();
        for a in forbidden {
            if t.bit(a)? == Some(true) {
                vs.push((fmt(&[a]), vec![a.clone()]));
            }
        }
        if let Some(c) = pick(vs, Rule::VNeg) {
            return Ok(Some(c));
        }
    }
    Ok(None)
}

// ---------------------------------------------------------------------------
// finite models
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct FiniteModel {
    pub points: Vec<ValuePoint>,
    /// order[i][j] = (O_i is contained in O_j), i.e. j generalizes i
    pub order: Vec<Vec<bool>>,
    pub group: AutGroup,
    /// action[g][i] = index of g(point i)
    pub action: Vec<Vec<usize>>,
}

pub fn build_model(points: Vec<ValuePoint>, group: &AutGroup) -> Result<FiniteModel> {
    if points.is_empty() {
        return Err(Error::Config("a model needs at least one point".into()));
    }
    let parent = points[0].valuation.parent.clone();
    for p in &points {
        if p.valuation.parent != parent {
            return Err(Error::ParentMismatch("model points over different fields".into()));
        }
    }
    if group.parent != parent {
        return Err(Error::ParentMismatch("group acts on a different field".into()));
    }
    let descriptors: Vec<String> = points.iter().map(|p| p.valuation.descriptor()).collect();
    let mut action = Vec::new();
    for g in &group.elements {
        let mut perm = Vec::new();
        for p in &points {
            let img = act_on_valuation(g, &p.valuation)?;
            let d = img.descriptor();
            match descriptors.iter().position(|x| *x == d) {
                Some(k) => perm.push(k),
                None => {
                    return Err(Error::NotGStable(format!(
                        "missing translate {} of point {} under {}",
                        d,
                        p.label,
                        g.descriptor()
                    )))
                }
            }
        }
        action.push(perm);
    }
    let n = points.len();
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .collect();
    let compare = |&(i, j): &(usize, usize)| -> Result<bool> {
        if i == j {
            return Ok(true);
        }
        Ok(ring_containment(&points[i].valuation, &points[j].valuation)?.holds())
    };
    #[cfg(feature = "parallel")]
    let flat: Vec<bool> = pairs
        .par_iter()
        .map(compare)
        .collect::<Result<Vec<_>>>()?;
    #[cfg(not(feature = "parallel"))]
    let flat: Vec<bool> = pairs.iter().map(compare).collect::<Result<Vec<_>>>()?;
    let order: Vec<Vec<bool>> = (0..n).map(|i| flat[i * n..(i + 1) * n].to_vec()).collect();
    Ok(FiniteModel {
        points,
        order,
        group: group.clone(),
        action,
    })
}

impl FiniteModel {
    /// Indices generalizing any index in `s` (up-closure), including `s`.
    pub fn generalizations(&self, s: &[usize]) -> Vec<usize> {
        let n = self.points.len();
        (0..n)
            .filter(|&j| s.iter().any(|&i| self.order[i][j]))
            .collect()
    }

    pub fn is_up_closed(&self, u: &[usize]) -> bool {
        let g = self.generalizations(u);
        g.iter().all(|j| u.contains(j))
    }

    /// Is `s` a single orbit of the model's group?
    pub fn is_single_orbit(&self, s: &[usize]) -> bool {
        if s.is_empty() {
            return false;
        }
        let seed = s[0];
        let mut orbit: Vec<usize> = self.action.iter().map(|perm| perm[seed]).collect();
        orbit.sort_unstable();
        orbit.dedup();
        let mut ss = s.to_vec();
        ss.sort_unstable();
        ss.dedup();
        orbit == ss
    }
}

// ---------------------------------------------------------------------------
// stable affine neighborhoods
// ---------------------------------------------------------------------------

fn exponent_vectors(rank: usize, bound: i64) -> Vec<Vec<i64>> {
    let mut all = vec![vec![]];
    for _ in 0..rank {
        let mut next = Vec::new();
        for v in &all {
            for k in -bound..=bound {
                let mut w = v.clone();
                w.push(k);
                next.push(w);
            }
        }
        all = next;
    }
    all.retain(|v| v.iter().any(|&k| k != 0));
    // small L1 norm first; at equal norm, positive orientations first
    all.sort_by_key(|v| {
        (
            v.iter().map(|k| k.abs()).sum::<i64>(),
            v.iter().map(|&k| -k).collect::<Vec<_>>(),
        )
    });
    all
}

fn candidate_pool(
    parent: &GradedField,
    model: &FiniteModel,
    pool_exponent: i64,
) -> Result<Vec<GradedElement>> {
    let rank = parent.gamma.rank();
    let mut pool = Vec::new();
    let push = |x: GradedElement, pool: &mut Vec<GradedElement>| {
        if !x.is_zero() && !pool.contains(&x) {
            pool.push(x);
        }
    };
    let monomial_at = |v: &[i64]| -> Result<GradedElement> {
        let coords: Vec<BigInt> = v.iter().map(|&k| BigInt::from(k)).collect();
        Ok(parent.monomial_coords(&coords, parent.base.one()))
    };
    let exps = exponent_vectors(rank, pool_exponent);
    // 1: pure grading monomials
    for v in &exps {
        push(monomial_at(v)?, &mut pool);
    }
    // 2: base uniformizers from the model's points
    let mut uniformizers: Vec<crate::basefield::El> = Vec::new();
    for p in &model.points {
        let v1 = &p.valuation.v1;
        if v1.is_trivial() {
            continue;
        }
        for row in v1.value_lattice_basis() {
            if let Ok(s) = v1.section(&row) {
                if !uniformizers.contains(&s) {
                    uniformizers.push(s.clone());
                    push(
                        parent.monomial(&vec![Rat::zero(); parent.gamma.ambient_dim], s)?,
                        &mut pool,
                    );
                }
            }
        }
    }
    // 3: products uniformizer^a * u^gamma with small exponents
    for s in &uniformizers {
        for a in 1..=pool_exponent {
            for sign in [1i64, -1] {
                let c = if sign > 0 {
                    parent.base.pow(s, a)?
                } else {
                    parent.base.pow(&parent.base.inv(s)?, a)?
                };
                for v in &exps {
                    let m = monomial_at(v)?;
                    let (deg, coeff) = m.homogeneous_part()?;
                    push(
                        parent.monomial(&deg.clone(), parent.base.mul(&coeff.clone(), &c))?,
                        &mut pool,
                    );
                }
                // degree zero
                push(
                    parent.monomial(&vec![Rat::zero(); parent.gamma.ambient_dim], c)?,
                    &mut pool,
                );
            }
        }
    }
    Ok(pool)
}

/// Affine neighborhood of the orbit S inside the up-closed U, per the
/// translate-intersection argument: greedily choose pool elements holding on
/// S and its generalizations, close each under G-translates, until every
/// point outside U is excluded.  Constraints are considered in orientation
/// pairs (f together with 1/f) so the chosen set pins values along the
/// separating directions.
pub fn stable_affine_neighborhood(
    model: &FiniteModel,
    s: &[usize],
    u: &[usize],
    pool_exponent: i64,
) -> Result<BasicSet> {
    let parent = &model.points[0].valuation.parent;
    if !s.iter().all(|i| u.contains(i)) {
        return Err(Error::Config("S must be contained in U".into()));
    }
    if !model.is_single_orbit(s) {
        return Err(Error::Config("S must be a single G-orbit".into()));
    }
    if !model.is_up_closed(u) {
        return Err(Error::Config("U must be up-closed".into()));
    }
    let keep = model.generalizations(s);
    let targets: Vec<usize> = (0..model.points.len())
        .filter(|i| !u.contains(i))
        .collect();
    if targets.is_empty() {
        return Ok(BasicSet::default());
    }
    let holds = |f: &GradedElement, i: usize| -> Result<bool> {
        model.points[i].valuation.ring_member(f)
    };
    let holds_on_keep = |f: &GradedElement| -> Result<bool> {
        for &i in &keep {
            if !holds(f, i)? {
                return Ok(false);
            }
        }
        Ok(true)
    };
    let pool = candidate_pool(parent, model, pool_exponent)?;
    let mut chosen: Vec<GradedElement> = Vec::new();
    let mut remaining: Vec<usize> = targets.clone();
    for f in &pool {
        if remaining.is_empty() {
            break;
        }
        if chosen.contains(f) || !holds_on_keep(f)? {
            continue;
        }
        let mut excludes_some = false;
        for &t in &remaining {
            if !holds(f, t)? {
                excludes_some = true;
                break;
            }
        }
        if !excludes_some {
            // the reverse orientation may be the excluding one; admit f when
            // its inverse is also a valid constraint and separates a target
            let inv = parent.invert_homogeneous(f)?;
            if holds_on_keep(&inv)? {
                for &t in &remaining {
                    if !holds(&inv, t)? {
                        excludes_some = true;
                        break;
                    }
                }
            }
        }
        if !excludes_some {
            continue;
        }
        // G-translate closure of the chosen constraint
        let mut translates = Vec::new();
        for g in &model.group.elements {
            let img = apply_aut(g, f)?;
            if !translates.contains(&img) && !chosen.contains(&img) {
                translates.push(img);
            }
        }
        for tr in translates {
            if !holds_on_keep(&tr)? {
                return Err(Error::Config(
                    "translate of a kept constraint fails on the orbit (unexpected)".into(),
                ));
            }
            chosen.push(tr);
        }
        remaining.clear();
        for &t in &targets {
            let mut excluded = false;
            for c in &chosen {
                if !holds(c, t)? {
                    excluded = true;
                    break;
                }
            }
            if !excluded {
                remaining.push(t);
            }
        }
    }
    if !remaining.is_empty() {
        let names: Vec<&str> = remaining
            .iter()
            .map(|&i| model.points[i].label.as_str())
            .collect();
        return Err(Error::NoNeighborhoodInPool(format!(
            "pool exhausted; still not excluded: [{}]",
            names.join(", ")
        )));
    }
    Ok(BasicSet {
        positive: chosen,
        negative: Vec::new(),
    })
}

/// Points of the model lying in the basic set.
pub fn evaluate_on_model(model: &FiniteModel, b: &BasicSet) -> Result<Vec<usize>> {
    let mut out = Vec::new();
    for (i, p) in model.points.iter().enumerate() {
        if basic_member(b, &p.valuation)? {
            out.push(i);
        }
    }
    Ok(out)
}
