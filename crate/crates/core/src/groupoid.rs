//! Finite groupoids with Haar systems and their modular data.
//!
//! Morphisms and units are indexed densely; names are kept for reporting.
//! Composition `gh` is defined iff `s(g) = r(h)`.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::weight::Weight;

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct MorphismDesc {
    pub id: String,
    pub src: String,
    pub rng: String,
}

/// JSON description of a groupoid with optional measure data.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Default)]
pub struct GroupoidDesc {
    pub units: Vec<String>,
    pub morphisms: Vec<MorphismDesc>,
    pub compose: Vec<(String, String, String)>,
    pub inverse: Vec<(String, String)>,
    #[serde(default)]
    pub nu: BTreeMap<String, Weight>,
    #[serde(default)]
    pub haar: BTreeMap<String, BTreeMap<String, Weight>>,
}

#[derive(Debug, Clone)]
pub struct FiniteGroupoid {
    unit_names: Vec<String>,
    morph_names: Vec<String>,
    unit_index: HashMap<String, usize>,
    morph_index: HashMap<String, usize>,
    src: Vec<usize>,
    rng: Vec<usize>,
    table: Vec<Option<usize>>,
    inv: Vec<usize>,
    unit_arrow: Vec<usize>,
    range_fiber: Vec<Vec<usize>>,
    source_fiber: Vec<Vec<usize>>,
}

impl FiniteGroupoid {
    pub fn from_desc(d: &GroupoidDesc) -> Result<Self> {
        let mut unit_index = HashMap::new();
        for (i, u) in d.units.iter().enumerate() {
            if unit_index.insert(u.clone(), i).is_some() {
                return Err(Error::ParseError(format!("duplicate unit `{u}`")));
            }
        }
        let mut morph_index = HashMap::new();
        let mut src = Vec::new();
        let mut rng = Vec::new();
        for (i, m) in d.morphisms.iter().enumerate() {
            if morph_index.insert(m.id.clone(), i).is_some() {
                return Err(Error::ParseError(format!("duplicate morphism `{}`", m.id)));
            }
            src.push(*unit_index.get(&m.src).ok_or_else(|| Error::UnknownId(m.src.clone()))?);
            rng.push(*unit_index.get(&m.rng).ok_or_else(|| Error::UnknownId(m.rng.clone()))?);
        }
        let n = d.morphisms.len();
        let look = |s: &str| morph_index.get(s).copied().ok_or_else(|| Error::UnknownId(s.to_string()));
        let mut table = vec![None; n * n];
        for (g, h, gh) in &d.compose {
            let (gi, hi, ghi) = (look(g)?, look(h)?, look(gh)?);
            if src[gi] != rng[hi] || rng[ghi] != rng[gi] || src[ghi] != src[hi] {
                return Err(Error::BadComposite { g: g.clone(), h: h.clone() });
            }
            match table[gi * n + hi] {
                Some(prev) if prev != ghi => return Err(Error::BadComposite { g: g.clone(), h: h.clone() }),
                _ => table[gi * n + hi] = Some(ghi),
            }
        }
        let mut inv = vec![usize::MAX; n];
        for (g, gi) in &d.inverse {
            let (a, b) = (look(g)?, look(gi)?);
            if inv[a] != usize::MAX && inv[a] != b {
                return Err(Error::BadInverse(g.clone()));
            }
            inv[a] = b;
        }
        let mut range_fiber = vec![Vec::new(); d.units.len()];
        let mut source_fiber = vec![Vec::new(); d.units.len()];
        for g in 0..n {
            range_fiber[rng[g]].push(g);
            source_fiber[src[g]].push(g);
        }
        let mut unit_arrow = Vec::with_capacity(d.units.len());
        for (u, name) in d.units.iter().enumerate() {
            let e = (0..n).find(|&e| src[e] == u && rng[e] == u && table[e * n + e] == Some(e));
            unit_arrow.push(e.ok_or_else(|| Error::MissingIdentity(name.clone()))?);
        }
        let gpd = FiniteGroupoid {
            unit_names: d.units.clone(),
            morph_names: d.morphisms.iter().map(|m| m.id.clone()).collect(),
            unit_index,
            morph_index,
            src,
            rng,
            table,
            inv,
            unit_arrow,
            range_fiber,
            source_fiber,
        };
        gpd.check_axioms()?;
        Ok(gpd)
    }

    fn check_axioms(&self) -> Result<()> {
        let n = self.len();
        for g in 0..n {
            for &h in &self.range_fiber[self.src[g]] {
                if self.table[g * n + h].is_none() {
                    return Err(Error::MissingComposite { g: self.name(g).into(), h: self.name(h).into() });
                }
            }
        }
        for g in 0..n {
            let e_r = self.unit_arrow[self.rng[g]];
            let e_s = self.unit_arrow[self.src[g]];
            if self.table[e_r * n + g] != Some(g) || self.table[g * n + e_s] != Some(g) {
                return Err(Error::AssocViolation { g: self.name(e_r).into(), h: self.name(g).into(), k: self.name(e_s).into() });
            }
        }
        for g in 0..n {
            for &h in &self.range_fiber[self.src[g]] {
                let gh = self.table[g * n + h].unwrap();
                for &k in &self.range_fiber[self.src[h]] {
                    let hk = self.table[h * n + k].unwrap();
                    if self.table[gh * n + k] != self.table[g * n + hk] {
                        return Err(Error::AssocViolation {
                            g: self.name(g).into(),
                            h: self.name(h).into(),
                            k: self.name(k).into(),
                        });
                    }
                }
            }
        }
        for g in 0..n {
            let gi = self.inv[g];
            if gi == usize::MAX
                || self.src[gi] != self.rng[g]
                || self.rng[gi] != self.src[g]
                || self.inv[gi] != g
                || self.table[g * n + gi] != Some(self.unit_arrow[self.rng[g]])
                || self.table[gi * n + g] != Some(self.unit_arrow[self.src[g]])
            {
                return Err(Error::BadInverse(self.name(g).into()));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.morph_names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.morph_names.is_empty()
    }

    pub fn n_units(&self) -> usize {
        self.unit_names.len()
    }

    pub fn name(&self, g: usize) -> &str {
        &self.morph_names[g]
    }

    pub fn unit_name(&self, u: usize) -> &str {
        &self.unit_names[u]
    }

    pub fn morph_id(&self, name: &str) -> Option<usize> {
        self.morph_index.get(name).copied()
    }

    pub fn unit_id(&self, name: &str) -> Option<usize> {
        self.unit_index.get(name).copied()
    }

    pub fn s(&self, g: usize) -> usize {
        self.src[g]
    }

    pub fn r(&self, g: usize) -> usize {
        self.rng[g]
    }

    pub fn inv(&self, g: usize) -> usize {
        self.inv[g]
    }

    /// Identity arrow at unit `u`.
    pub fn unit(&self, u: usize) -> usize {
        self.unit_arrow[u]
    }

    pub fn is_unit_arrow(&self, g: usize) -> bool {
        self.unit_arrow[self.rng[g]] == g
    }

    pub fn try_mul(&self, g: usize, h: usize) -> Option<usize> {
        self.table[g * self.len() + h]
    }

    /// Product `gh`; panics when `s(g) != r(h)`.
    pub fn mul(&self, g: usize, h: usize) -> usize {
        self.try_mul(g, h).unwrap_or_else(|| panic!("{} and {} are not composable", self.name(g), self.name(h)))
    }

    /// The range fiber `G^u = {g : r(g) = u}`.
    pub fn range_fiber(&self, u: usize) -> &[usize] {
        &self.range_fiber[u]
    }

    pub fn source_fiber(&self, u: usize) -> &[usize] {
        &self.source_fiber[u]
    }

    pub fn desc(&self) -> GroupoidDesc {
        let n = self.len();
        let mut compose = Vec::new();
        for g in 0..n {
            for h in 0..n {
                if let Some(gh) = self.table[g * n + h] {
                    compose.push((self.name(g).into(), self.name(h).into(), self.name(gh).into()));
                }
            }
        }
        GroupoidDesc {
            units: self.unit_names.clone(),
            morphisms: (0..n)
                .map(|g| MorphismDesc {
                    id: self.name(g).into(),
                    src: self.unit_name(self.s(g)).into(),
                    rng: self.unit_name(self.r(g)).into(),
                })
                .collect(),
            compose,
            inverse: (0..n).map(|g| (self.name(g).into(), self.name(self.inv(g)).into())).collect(),
            nu: BTreeMap::new(),
            haar: BTreeMap::new(),
        }
    }
}

/// Per-unit fiber weights `λ^u` (stored per morphism, on the fiber of its range) and the unit measure `ν`.
#[derive(Debug, Clone, PartialEq)]
pub struct HaarSystem {
    pub lambda: Vec<f64>,
    pub nu: Vec<f64>,
}

impl HaarSystem {
    /// Counting measures on every fiber and on the units.
    pub fn counting(g: &FiniteGroupoid) -> Self {
        HaarSystem { lambda: vec![1.0; g.len()], nu: vec![1.0; g.n_units()] }
    }

    pub fn from_desc(g: &FiniteGroupoid, d: &GroupoidDesc) -> Result<Self> {
        let lambda = fiber_weights(g, &d.haar, None)?;
        let nu = unit_weights(g, &d.nu)?;
        Ok(HaarSystem { lambda, nu })
    }

    /// Total λ-mass of the range fiber over `u`.
    pub fn fiber_mass(&self, g: &FiniteGroupoid, u: usize) -> f64 {
        g.range_fiber(u).iter().map(|&x| self.lambda[x]).sum()
    }
}

pub(crate) fn unit_weights(g: &FiniteGroupoid, nu: &BTreeMap<String, Weight>) -> Result<Vec<f64>> {
    let mut out = vec![f64::NAN; g.n_units()];
    for (u, w) in nu {
        let ui = g.unit_id(u).ok_or_else(|| Error::UnknownId(u.clone()))?;
        out[ui] = w.value()?;
    }
    if let Some(u) = out.iter().position(|v| v.is_nan()) {
        return Err(Error::SupportMismatch(format!("no weight for unit `{}`", g.unit_name(u))));
    }
    Ok(out)
}

/// Reads `{unit: {morphism: weight}}`; `members` restricts the expected support.
pub(crate) fn fiber_weights(
    g: &FiniteGroupoid,
    haar: &BTreeMap<String, BTreeMap<String, Weight>>,
    members: Option<&[bool]>,
) -> Result<Vec<f64>> {
    let mut out = vec![0.0; g.len()];
    let mut seen = vec![false; g.len()];
    for (u, fib) in haar {
        let ui = g.unit_id(u).ok_or_else(|| Error::UnknownId(u.clone()))?;
        for (m, w) in fib {
            let mi = g.morph_id(m).ok_or_else(|| Error::UnknownId(m.clone()))?;
            if g.r(mi) != ui {
                return Err(Error::SupportMismatch(format!("`{m}` listed in the fiber over `{u}`")));
            }
            if members.is_some_and(|mem| !mem[mi]) {
                return Err(Error::SupportMismatch(format!("`{m}` is outside the subgroupoid")));
            }
            out[mi] = w.value()?;
            seen[mi] = true;
        }
    }
    for x in 0..g.len() {
        let expected = members.is_none_or(|mem| mem[x]);
        if expected && !seen[x] {
            return Err(Error::SupportMismatch(format!("no fiber weight for `{}`", g.name(x))));
        }
    }
    Ok(out)
}

/// Left-invariance residual of a Haar system, per morphism.
#[derive(Debug, Clone)]
pub struct HaarReport {
    pub residuals: Vec<f64>,
    pub max_residual: f64,
    pub worst: Option<usize>,
    pub pass: bool,
}

/// Checks `Σ_{t∈G^{s(g)}} f(gt)λ^{s(g)}(t) = Σ_{t∈G^{r(g)}} f(t)λ^{r(g)}(t)` on indicator functions,
/// i.e. `λ^{s(g)}(g⁻¹k) = λ^{r(g)}(k)` for `k ∈ G^{r(g)}`. Restricted to `members` when given.
pub fn validate_haar(g: &FiniteGroupoid, lambda: &[f64], members: Option<&[bool]>, tol: f64) -> HaarReport {
    let inside = |x: usize| members.is_none_or(|m| m[x]);
    let mut residuals = vec![0.0; g.len()];
    for x in 0..g.len() {
        if !inside(x) {
            continue;
        }
        let xi = g.inv(x);
        let mut worst: f64 = 0.0;
        for &k in g.range_fiber(g.r(x)) {
            if !inside(k) {
                continue;
            }
            let t = g.mul(xi, k);
            let (a, b) = (lambda[t], lambda[k]);
            worst = worst.max((a - b).abs() / a.abs().max(b.abs()).max(1.0));
        }
        residuals[x] = worst;
    }
    let (worst, max_residual) = argmax(&residuals);
    HaarReport { pass: max_residual <= tol, residuals, max_residual, worst }
}

pub(crate) fn argmax(v: &[f64]) -> (Option<usize>, f64) {
    let mut best = (None, 0.0);
    for (i, &x) in v.iter().enumerate() {
        if x > best.1 || best.0.is_none() {
            best = (Some(i), x);
        }
    }
    best
}

/// `μ(g) = ν(r(g))λ^{r(g)}(g)`, `μ⁻¹(g) = μ(g⁻¹)` and `δ = μ⁻¹/μ`.
#[derive(Debug, Clone)]
pub struct ModularData {
    pub mu: Vec<f64>,
    pub mu_inv: Vec<f64>,
    pub delta: Vec<f64>,
    pub cocycle_residual: f64,
}

pub fn modular_data(g: &FiniteGroupoid, lambda: &[f64], nu: &[f64], members: Option<&[bool]>) -> ModularData {
    let inside = |x: usize| members.is_none_or(|m| m[x]);
    let n = g.len();
    let mut mu = vec![0.0; n];
    for x in 0..n {
        if inside(x) {
            mu[x] = nu[g.r(x)] * lambda[x];
        }
    }
    let mu_inv: Vec<f64> = (0..n).map(|x| if inside(x) { mu[g.inv(x)] } else { 0.0 }).collect();
    let delta: Vec<f64> = (0..n).map(|x| if inside(x) { mu_inv[x] / mu[x] } else { 1.0 }).collect();
    let mut cocycle_residual: f64 = 0.0;
    for x in 0..n {
        if !inside(x) {
            continue;
        }
        for &y in g.range_fiber(g.s(x)) {
            if inside(y) {
                let xy = g.mul(x, y);
                let d = (delta[xy] - delta[x] * delta[y]).abs() / delta[xy].max(1.0);
                cocycle_residual = cocycle_residual.max(d);
            }
        }
    }
    ModularData { mu, mu_inv, delta, cocycle_residual }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    pub fn pair_desc(points: &[&str]) -> GroupoidDesc {
        let id = |x: &str, y: &str| format!("{x}{y}");
        let mut d = GroupoidDesc { units: points.iter().map(|s| s.to_string()).collect(), ..Default::default() };
        for x in points {
            for y in points {
                d.morphisms.push(MorphismDesc { id: id(x, y), src: y.to_string(), rng: x.to_string() });
                d.inverse.push((id(x, y), id(y, x)));
                for z in points {
                    d.compose.push((id(x, y), id(y, z), id(x, z)));
                }
            }
        }
        d
    }

    #[test]
    fn trivial_groupoid() {
        let d = pair_desc(&["e"]);
        let g = FiniteGroupoid::from_desc(&d).unwrap();
        assert_eq!(g.len(), 1);
        assert!(g.is_unit_arrow(0));
    }

    #[test]
    fn pair_groupoid_on_four_points() {
        let g = FiniteGroupoid::from_desc(&pair_desc(&["a", "b", "c", "d"])).unwrap();
        assert_eq!(g.len(), 16);
        let ab = g.morph_id("ab").unwrap();
        let bc = g.morph_id("bc").unwrap();
        assert_eq!(g.name(g.mul(ab, bc)), "ac");
        assert!(g.try_mul(bc, ab).is_none());
    }

    #[test]
    fn missing_composite_is_named() {
        let mut d = pair_desc(&["a", "b"]);
        d.compose.retain(|(g, h, _)| !(g == "ab" && h == "ba"));
        match FiniteGroupoid::from_desc(&d) {
            Err(Error::MissingComposite { g, h }) => assert_eq!((g.as_str(), h.as_str()), ("ab", "ba")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn bad_inverse_detected() {
        let mut d = pair_desc(&["a", "b"]);
        for p in d.inverse.iter_mut() {
            if p.0 == "ab" {
                p.1 = "ab".into();
            }
        }
        assert!(matches!(FiniteGroupoid::from_desc(&d), Err(Error::BadInverse(_))));
    }

    #[test]
    fn pair_haar_and_perturbation() {
        let g = FiniteGroupoid::from_desc(&pair_desc(&["a", "b", "c"])).unwrap();
        let nu = [1.0, 2.0, 3.0];
        // λ^x = δ_x ⊗ ν
        let lambda: Vec<f64> = (0..g.len()).map(|x| nu[g.s(x)]).collect();
        assert!(validate_haar(&g, &lambda, None, 1e-12).pass);
        let md = modular_data(&g, &lambda, &nu, None);
        assert!(md.delta.iter().all(|d| (d - 1.0).abs() < 1e-15));
        let mut bad = lambda.clone();
        bad[g.morph_id("ab").unwrap()] = 2.0 * 2.0;
        let rep = validate_haar(&g, &bad, None, 1e-12);
        assert!(!rep.pass);
        assert!(rep.max_residual > 0.1);
    }
}
