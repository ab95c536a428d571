//! Config documents: named fields, lattices, valuations, groups, and models
//! loaded from one or more TOML files into a resolved workspace.
//!
//! Rational numbers are written as strings "p/q" (or plain integers);
//! matrices as row lists.  See README for the full schema.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use serde::Deserialize;

use crate::basefield::valuation::{split_prime, BaseValuation, VKind};
use crate::basefield::BaseField;
use crate::error::{Error, Result};
use crate::expr::parse_element;
use crate::fixtures;
use crate::galois::{AutGroup, GradedAutomorphism, Sigma};
use crate::gradedfield::GradedField;
use crate::gradedvaluation::{GradedValuation, ValuePoint};
use crate::lattice::{Lattice, LatticeHom};
use crate::matrix::Rat;
use crate::zrspace::{build_model, FiniteModel};

// ---------------------------------------------------------------------------
// raw document schema
// ---------------------------------------------------------------------------

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct Document {
    #[serde(default)]
    lattices: BTreeMap<String, LatticeSpec>,
    #[serde(default)]
    fields: BTreeMap<String, FieldSpec>,
    #[serde(default)]
    valuations: BTreeMap<String, ValuationSpec>,
    #[serde(default)]
    groups: BTreeMap<String, GroupSpec>,
    #[serde(default)]
    models: BTreeMap<String, ModelSpec>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct LatticeSpec {
    ambient: usize,
    basis: Vec<Vec<RatLit>>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum RatLit {
    Int(i64),
    Str(String),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct FieldSpec {
    /// "rationals" | "gaussian" | "kummer:<n>:<a>" | "rational-functions:<p>"
    base: String,
    /// named lattice or inline basis over the standard ambient space
    #[serde(default)]
    lattice: Option<String>,
    #[serde(default)]
    lattice_basis: Option<Vec<Vec<RatLit>>>,
    #[serde(default = "default_unit")]
    unit: String,
}

fn default_unit() -> String {
    "u".into()
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ValuationSpec {
    field: String,
    v1: V1Spec,
    /// rows = images of the grading-lattice basis vectors
    psi: Vec<Vec<RatLit>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct V1Spec {
    /// "trivial" | "padic" | "prime"
    kind: String,
    #[serde(default)]
    p: Option<u64>,
    /// which prime over p, in the canonical (descriptor-sorted) order
    #[serde(default)]
    index: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct GroupSpec {
    field: String,
    generators: Vec<AutSpec>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct AutSpec {
    /// "id" | "conj" | "frob^k"
    sigma: String,
    /// one root-of-unity expression per lattice basis vector
    chi: Vec<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelSpec {
    field: String,
    group: String,
    /// point name -> valuation name
    points: Vec<PointSpec>,
    #[serde(default)]
    scenarios: BTreeMap<String, ScenarioSpec>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct PointSpec {
    name: String,
    valuation: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSpec {
    pub s: Vec<String>,
    pub u: Vec<String>,
}

// ---------------------------------------------------------------------------
// resolved workspace
// ---------------------------------------------------------------------------

pub struct Workspace {
    pub fields: BTreeMap<String, GradedField>,
    pub valuations: BTreeMap<String, GradedValuation>,
    pub groups: BTreeMap<String, AutGroup>,
    pub models: BTreeMap<String, FiniteModel>,
    pub scenarios: BTreeMap<String, BTreeMap<String, ScenarioSpec>>,
}

fn parse_rat(lit: &RatLit) -> Result<Rat> {
    match lit {
        RatLit::Int(n) => Ok(Rat::from(BigInt::from(*n))),
        RatLit::Str(s) => {
            let parts: Vec<&str> = s.split('/').collect();
            let bad = || Error::Config(format!("bad rational literal '{s}'"));
            match parts.as_slice() {
                [n] => Ok(Rat::from(n.trim().parse::<BigInt>().map_err(|_| bad())?)),
                [n, d] => {
                    let num: BigInt = n.trim().parse().map_err(|_| bad())?;
                    let den: BigInt = d.trim().parse().map_err(|_| bad())?;
                    if den == BigInt::from(0) {
                        return Err(bad());
                    }
                    Ok(Rat::new(num, den))
                }
                _ => Err(bad()),
            }
        }
    }
}

fn parse_matrix(rows: &[Vec<RatLit>]) -> Result<Vec<Vec<Rat>>> {
    rows.iter()
        .map(|r| r.iter().map(parse_rat).collect())
        .collect()
}

fn parse_base(spec: &str) -> Result<BaseField> {
    match spec {
        "rationals" => Ok(BaseField::Rationals),
        "gaussian" => Ok(BaseField::gaussian()),
        other => {
            if let Some(rest) = other.strip_prefix("kummer:") {
                let parts: Vec<&str> = rest.split(':').collect();
                if let [n, a] = parts.as_slice() {
                    let n: u32 = n
                        .parse()
                        .map_err(|_| Error::Config(format!("bad kummer degree in '{other}'")))?;
                    let a = parse_rat(&RatLit::Str((*a).to_string()))?;
                    return BaseField::kummer(n, a, "r");
                }
            }
            Err(Error::Config(format!("unknown base field '{other}'")))
        }
    }
}

fn parse_sigma(field: &GradedField, s: &str) -> Result<Sigma> {
    match s {
        "id" => Ok(Sigma::Id),
        "conj" => Ok(Sigma::GenScale(field.base.from_i64(-1))),
        other => {
            if let Some(k) = other.strip_prefix("frob^") {
                let k: u32 = k
                    .parse()
                    .map_err(|_| Error::Config(format!("bad Frobenius power '{other}'")))?;
                return Ok(Sigma::Frob(k));
            }
            Err(Error::Config(format!("unknown sigma '{other}'")))
        }
    }
}

fn parse_v1(field: &GradedField, spec: &V1Spec) -> Result<BaseValuation> {
    match spec.kind.as_str() {
        "trivial" => Ok(BaseValuation::trivial(field.base.clone())),
        "padic" => {
            let p = spec
                .p
                .ok_or(Error::Config("padic valuation needs p".into()))?;
            if field.base != BaseField::Rationals {
                return Err(Error::Config("padic valuations live on the rationals".into()));
            }
            Ok(BaseValuation::p_adic(p))
        }
        "prime" => {
            let p = spec
                .p
                .ok_or(Error::Config("prime valuation needs p".into()))?;
            let index = spec.index.unwrap_or(0);
            let mut primes: Vec<BaseValuation> = split_prime(&field.base, p)?
                .into_iter()
                .map(|d| BaseValuation {
                    field: field.base.clone(),
                    kind: VKind::PrimeIdeal(d),
                })
                .collect();
            primes.sort_by_key(|v| v.descriptor());
            primes
                .into_iter()
                .nth(index)
                .ok_or(Error::Config(format!("no prime over {p} with index {index}")))
        }
        other => Err(Error::Config(format!("unknown v1 kind '{other}'"))),
    }
}

impl Workspace {
    pub fn empty() -> Workspace {
        Workspace {
            fields: BTreeMap::new(),
            valuations: BTreeMap::new(),
            groups: BTreeMap::new(),
            models: BTreeMap::new(),
            scenarios: BTreeMap::new(),
        }
    }

    /// Built-in fixture entities, always available.
    pub fn builtin() -> Result<Workspace> {
        let mut fields = BTreeMap::new();
        fields.insert("K".to_string(), fixtures::qi_z());
        fields.insert("L".to_string(), fixtures::q_z());
        fields.insert("L2".to_string(), fixtures::q_2z());
        fields.insert("L4".to_string(), fixtures::q_4z());
        let mut valuations = BTreeMap::new();
        let (ap, am) = fixtures::a_plus_minus();
        let (dp, dm) = fixtures::d_plus_minus();
        valuations.insert("A+".to_string(), ap);
        valuations.insert("A-".to_string(), am);
        valuations.insert("D+".to_string(), dp);
        valuations.insert("D-".to_string(), dm);
        valuations.insert("eta".to_string(), fixtures::eta());
        valuations.insert("E".to_string(), fixtures::e_point());
        valuations.insert("R5".to_string(), fixtures::five_adic_on_q_z());
        let mut groups = BTreeMap::new();
        for (name, g) in fixtures::shipped_groups() {
            groups.insert(name, g);
        }
        groups.insert("pairing".to_string(), fixtures::pairing_group());
        let mut models = BTreeMap::new();
        models.insert("five".to_string(), fixtures::five_point_model()?);
        models.insert("six".to_string(), fixtures::six_point_model()?);
        let mut scenarios = BTreeMap::new();
        let mut five_sc = BTreeMap::new();
        five_sc.insert(
            "orbitA".to_string(),
            ScenarioSpec {
                s: vec!["A+".into(), "A-".into()],
                u: vec!["eta".into(), "A+".into(), "A-".into()],
            },
        );
        scenarios.insert("five".to_string(), five_sc);
        let mut six_sc = BTreeMap::new();
        six_sc.insert(
            "orbitA".to_string(),
            ScenarioSpec {
                s: vec!["A+".into(), "A-".into()],
                u: vec![
                    "eta".into(),
                    "A+".into(),
                    "A-".into(),
                    "D+".into(),
                    "D-".into(),
                ],
            },
        );
        scenarios.insert("six".to_string(), six_sc);
        Ok(Workspace {
            fields,
            valuations,
            groups,
            models,
            scenarios,
        })
    }

    /// Merge one TOML document into the workspace; names must be fresh.
    pub fn load_document(&mut self, text: &str) -> Result<()> {
        let doc: Document =
            toml::from_str(text).map_err(|e| Error::Config(format!("config parse: {e}")))?;
        let mut lattices: BTreeMap<String, Lattice> = BTreeMap::new();
        for (name, spec) in &doc.lattices {
            let basis = parse_matrix(&spec.basis)?;
            lattices.insert(name.clone(), Lattice::new(spec.ambient, basis)?);
        }
        for (name, spec) in &doc.fields {
            if self.fields.contains_key(name) {
                return Err(Error::Config(format!("duplicate field name '{name}'")));
            }
            let base = parse_base(&spec.base)?;
            let gamma = match (&spec.lattice, &spec.lattice_basis) {
                (Some(l), None) => lattices
                    .get(l)
                    .cloned()
                    .ok_or(Error::Config(format!("unknown lattice '{l}'")))?,
                (None, Some(rows)) => {
                    let basis = parse_matrix(rows)?;
                    let ambient = basis.first().map(|r| r.len()).unwrap_or(1);
                    Lattice::new(ambient, basis)?
                }
                (None, None) => Lattice::standard(1),
                _ => {
                    return Err(Error::Config(format!(
                        "field '{name}': give lattice or lattice_basis, not both"
                    )))
                }
            };
            self.fields
                .insert(name.clone(), GradedField::new(base, gamma, &spec.unit));
        }
        for (name, spec) in &doc.valuations {
            if self.valuations.contains_key(name) {
                return Err(Error::Config(format!("duplicate valuation name '{name}'")));
            }
            let field = self
                .fields
                .get(&spec.field)
                .ok_or(Error::Config(format!("unknown field '{}'", spec.field)))?
                .clone();
            let v1 = parse_v1(&field, &spec.v1)?;
            let psi_rows = parse_matrix(&spec.psi)?;
            let r = psi_rows
                .first()
                .map(|x| x.len())
                .ok_or(Error::Config("psi needs at least one row".into()))?;
            let psi = LatticeHom::new(field.gamma.clone(), r, psi_rows)?;
            self.valuations
                .insert(name.clone(), GradedValuation::new(field, v1, psi)?);
        }
        for (name, spec) in &doc.groups {
            if self.groups.contains_key(name) {
                return Err(Error::Config(format!("duplicate group name '{name}'")));
            }
            let field = self
                .fields
                .get(&spec.field)
                .ok_or(Error::Config(format!("unknown field '{}'", spec.field)))?
                .clone();
            let mut gens = Vec::new();
            for a in &spec.generators {
                let sigma = parse_sigma(&field, &a.sigma)?;
                let mut chi = Vec::new();
                for c in &a.chi {
                    let e = parse_element(&field, c)?;
                    let (deg, coeff) = e.homogeneous_part()?;
                    if deg.iter().any(|q| q != &Rat::from(BigInt::from(0))) {
                        return Err(Error::Config(
                            "chi values must be degree-zero root-of-unity literals".into(),
                        ));
                    }
                    chi.push(coeff.clone());
                }
                gens.push(GradedAutomorphism::new(field.clone(), sigma, chi)?);
            }
            self.groups
                .insert(name.clone(), AutGroup::generate(&field, &gens)?);
        }
        for (name, spec) in &doc.models {
            if self.models.contains_key(name) {
                return Err(Error::Config(format!("duplicate model name '{name}'")));
            }
            let _field = self
                .fields
                .get(&spec.field)
                .ok_or(Error::Config(format!("unknown field '{}'", spec.field)))?;
            let group = self
                .groups
                .get(&spec.group)
                .ok_or(Error::Config(format!("unknown group '{}'", spec.group)))?
                .clone();
            let mut points = Vec::new();
            for p in &spec.points {
                let v = self
                    .valuations
                    .get(&p.valuation)
                    .ok_or(Error::Config(format!("unknown valuation '{}'", p.valuation)))?
                    .clone();
                points.push(ValuePoint {
                    label: p.name.clone(),
                    valuation: v,
                });
            }
            let model = build_model(points, &group)?;
            for sc in spec.scenarios.values() {
                for n in sc.s.iter().chain(&sc.u) {
                    if !model.points.iter().any(|p| p.label == *n) {
                        return Err(Error::Config(format!(
                            "scenario references unknown point '{n}'"
                        )));
                    }
                }
            }
            self.models.insert(name.clone(), model);
            self.scenarios
                .insert(name.clone(), spec.scenarios.clone());
        }
        Ok(())
    }

    /// Serialize the named entities back into the config format.  The result
    /// reloads into a workspace with identical descriptors (round-trip).
    pub fn export_toml(&self) -> Result<String> {
        use std::fmt::Write;
        let mut out = String::new();
        let base_name = |b: &BaseField| -> Result<&'static str> {
            if *b == BaseField::Rationals {
                Ok("rationals")
            } else if *b == BaseField::gaussian() {
                Ok("gaussian")
            } else {
                Err(Error::Unsupported("base field has no config name".into()))
            }
        };
        let row = |v: &[Rat]| {
            let cells: Vec<String> = v.iter().map(|q| format!("\"{q}\"")).collect();
            format!("[{}]", cells.join(", "))
        };
        for (name, f) in &self.fields {
            writeln!(out, "[fields.{name:?}]").unwrap();
            writeln!(out, "base = \"{}\"", base_name(&f.base)?).unwrap();
            let rows: Vec<String> = f.gamma.basis.iter().map(|r| row(r)).collect();
            writeln!(out, "lattice_basis = [{}]", rows.join(", ")).unwrap();
            writeln!(out, "unit = {:?}\n", f.unit_name).unwrap();
        }
        for (name, v) in &self.valuations {
            let field = self
                .fields
                .iter()
                .find(|(_, f)| **f == v.parent)
                .map(|(n, _)| n.clone())
                .ok_or(Error::Unsupported(format!(
                    "valuation '{name}' lives on an unnamed field"
                )))?;
            let v1 = match &v.v1.kind {
                VKind::Trivial => "{ kind = \"trivial\" }".to_string(),
                VKind::PAdic(p) => format!("{{ kind = \"padic\", p = {p} }}"),
                VKind::PrimeIdeal(d) => {
                    let mut primes: Vec<BaseValuation> = split_prime(&v.parent.base, d.p)?
                        .into_iter()
                        .map(|d| BaseValuation {
                            field: v.parent.base.clone(),
                            kind: VKind::PrimeIdeal(d),
                        })
                        .collect();
                    primes.sort_by_key(|w| w.descriptor());
                    let index = primes
                        .iter()
                        .position(|w| w.descriptor() == v.v1.descriptor())
                        .ok_or(Error::Unsupported("prime not found over p".into()))?;
                    format!("{{ kind = \"prime\", p = {}, index = {index} }}", d.p)
                }
                _ => {
                    return Err(Error::Unsupported(format!(
                        "valuation '{name}' kind has no config form"
                    )))
                }
            };
            let rows: Vec<String> = v.psi.images.iter().map(|r| row(r)).collect();
            writeln!(out, "[valuations.{name:?}]").unwrap();
            writeln!(out, "field = {field:?}").unwrap();
            writeln!(out, "v1 = {v1}").unwrap();
            writeln!(out, "psi = [{}]\n", rows.join(", ")).unwrap();
        }
        for (name, g) in &self.groups {
            let field = self
                .fields
                .iter()
                .find(|(_, f)| **f == g.parent)
                .map(|(n, _)| n.clone())
                .ok_or(Error::Unsupported(format!(
                    "group '{name}' acts on an unnamed field"
                )))?;
            let mut gens = Vec::new();
            for el in &g.elements {
                let sigma = match &el.sigma {
                    Sigma::Id => "id".to_string(),
                    Sigma::GenScale(z) if *z == g.parent.base.from_i64(-1) => "conj".to_string(),
                    Sigma::Frob(k) => format!("frob^{k}"),
                    _ => {
                        return Err(Error::Unsupported(format!(
                            "group '{name}' sigma has no config form"
                        )))
                    }
                };
                let chi: Vec<String> = (0..g.parent.gamma.rank())
                    .map(|j| {
                        let zero = vec![Rat::from(BigInt::from(0)); g.parent.gamma.ambient_dim];
                        let m = g.parent.monomial(&zero, el.chi[j].clone())?;
                        Ok(format!("{:?}", g.parent.format(&m)))
                    })
                    .collect::<Result<Vec<_>>>()?;
                gens.push(format!(
                    "{{ sigma = {sigma:?}, chi = [{}] }}",
                    chi.join(", ")
                ));
            }
            writeln!(out, "[groups.{name:?}]").unwrap();
            writeln!(out, "field = {field:?}").unwrap();
            writeln!(out, "generators = [{}]\n", gens.join(", ")).unwrap();
        }
        for (name, m) in &self.models {
            let field = self
                .fields
                .iter()
                .find(|(_, f)| **f == m.points[0].valuation.parent)
                .map(|(n, _)| n.clone())
                .ok_or(Error::Unsupported(format!(
                    "model '{name}' lives on an unnamed field"
                )))?;
            let group = self
                .groups
                .iter()
                .find(|(_, g)| {
                    g.elements.len() == m.group.elements.len()
                        && g.elements
                            .iter()
                            .zip(&m.group.elements)
                            .all(|(a, b)| a.descriptor() == b.descriptor())
                })
                .map(|(n, _)| n.clone())
                .ok_or(Error::Unsupported(format!("model '{name}' group unnamed")))?;
            let mut points = Vec::new();
            for p in &m.points {
                let vname = self
                    .valuations
                    .iter()
                    .find(|(_, v)| v.descriptor() == p.valuation.descriptor())
                    .map(|(n, _)| n.clone())
                    .ok_or(Error::Unsupported(format!(
                        "model '{name}' point '{}' valuation unnamed",
                        p.label
                    )))?;
                points.push(format!(
                    "{{ name = {:?}, valuation = {vname:?} }}",
                    p.label
                ));
            }
            writeln!(out, "[models.{name:?}]").unwrap();
            writeln!(out, "field = {field:?}").unwrap();
            writeln!(out, "group = {group:?}").unwrap();
            writeln!(out, "points = [{}]", points.join(", ")).unwrap();
            if let Some(scs) = self.scenarios.get(name) {
                for (sn, sc) in scs {
                    let lst = |v: &[String]| {
                        v.iter()
                            .map(|s| format!("{s:?}"))
                            .collect::<Vec<_>>()
                            .join(", ")
                    };
                    writeln!(
                        out,
                        "scenarios.{sn:?} = {{ s = [{}], u = [{}] }}",
                        lst(&sc.s),
                        lst(&sc.u)
                    )
                    .unwrap();
                }
            }
            writeln!(out).unwrap();
        }
        Ok(out)
    }

    pub fn load_paths(paths: &[std::path::PathBuf]) -> Result<Workspace> {
        let mut ws = Workspace::builtin()?;
        for p in paths {
            let text = std::fs::read_to_string(p)
                .map_err(|e| Error::Config(format!("cannot read {}: {e}", p.display())))?;
            ws.load_document(&text)?;
        }
        Ok(ws)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::rat_int;

    #[test]
    fn builtin_resolves() {
        let ws = Workspace::builtin().unwrap();
        assert!(ws.fields.contains_key("K"));
        assert!(ws.valuations.contains_key("A+"));
        assert_eq!(ws.models["five"].points.len(), 5);
        assert_eq!(ws.groups["pairing"].order(), 8);
    }

    #[test]
    fn loads_document() {
        let mut ws = Workspace::builtin().unwrap();
        ws.load_document(
            r#"
[lattices.half]
ambient = 1
basis = [["1/2"]]

[fields.H]
base = "rationals"
lattice = "half"

[valuations.W]
field = "H"
v1 = { kind = "padic", p = 5 }
psi = [["1/2"]]

[groups.C2]
field = "H"
generators = [{ sigma = "id", chi = ["-1"] }]
"#,
        )
        .unwrap();
        assert!(ws.fields["H"].gamma.contains(&[crate::matrix::rat(1, 2)]));
        let w = &ws.valuations["W"];
        assert_eq!(
            w.psi.apply(&[crate::matrix::rat(1, 2)]).unwrap(),
            vec![crate::matrix::rat(1, 2)]
        );
        assert_eq!(ws.groups["C2"].order(), 2);
        let _ = rat_int(0);
    }

    #[test]
    fn export_round_trips() {
        let ws = Workspace::builtin().unwrap();
        let doc = ws.export_toml().unwrap();
        let mut ws2 = Workspace::empty();
        ws2.load_document(&doc).unwrap();
        assert_eq!(
            ws.fields.keys().collect::<Vec<_>>(),
            ws2.fields.keys().collect::<Vec<_>>()
        );
        for (name, f) in &ws.fields {
            assert_eq!(f, &ws2.fields[name], "field {name}");
        }
        for (name, v) in &ws.valuations {
            assert_eq!(v.descriptor(), ws2.valuations[name].descriptor(), "valuation {name}");
        }
        for (name, g) in &ws.groups {
            let d1: Vec<String> = g.elements.iter().map(|e| e.descriptor()).collect();
            let d2: Vec<String> = ws2.groups[name].elements.iter().map(|e| e.descriptor()).collect();
            assert_eq!(d1, d2, "group {name}");
        }
        for (name, m) in &ws.models {
            let m2 = &ws2.models[name];
            let l1: Vec<&String> = m.points.iter().map(|p| &p.label).collect();
            let l2: Vec<&String> = m2.points.iter().map(|p| &p.label).collect();
            assert_eq!(l1, l2, "model {name}");
            assert_eq!(m.order, m2.order, "model {name} order");
        }
        assert_eq!(ws.scenarios, ws2.scenarios);
    }

    #[test]
    fn rejects_duplicates_and_bad_refs() {
        let mut ws = Workspace::builtin().unwrap();
        assert!(matches!(
            ws.load_document("[fields.K]\nbase = \"rationals\"\n"),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            ws.load_document(
                "[valuations.V]\nfield = \"nosuch\"\nv1 = { kind = \"trivial\" }\npsi = [[0]]\n"
            ),
            Err(Error::Config(_))
        ));
    }
}
