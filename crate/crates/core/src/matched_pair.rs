//! Matched pairs of wide subgroupoids: validation, factorization tables, middle maps,
//! the Haar decomposition check with its normalization solver, and the mutual actions.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::groupoid::{
    argmax, fiber_weights, modular_data, validate_haar, FiniteGroupoid, GroupoidDesc, HaarSystem, ModularData,
};
use crate::weight::Weight;

/// Groupoid description plus the two subgroupoids and their Haar weights.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct MatchedPairDesc {
    #[serde(flatten)]
    pub groupoid: GroupoidDesc,
    #[serde(rename = "G1")]
    pub g1: Vec<String>,
    #[serde(rename = "G2")]
    pub g2: Vec<String>,
    pub haar1: BTreeMap<String, BTreeMap<String, Weight>>,
    pub haar2: BTreeMap<String, BTreeMap<String, Weight>>,
}

#[derive(Debug, Clone)]
pub struct MatchedPair {
    pub g: FiniteGroupoid,
    pub haar: HaarSystem,
    pub in1: Vec<bool>,
    pub in2: Vec<bool>,
    pub lambda1: Vec<f64>,
    pub lambda2: Vec<f64>,
    pub md: ModularData,
    pub md1: ModularData,
    pub md2: ModularData,
    pub p1: Vec<usize>,
    pub p2: Vec<usize>,
    /// `g = p2′(g)·p1′(g)`.
    pub p1c: Vec<usize>,
    pub p2c: Vec<usize>,
    pub m: Vec<usize>,
    pub mhat: Vec<usize>,
}

fn members(g: &FiniteGroupoid, ids: &[String]) -> Result<Vec<bool>> {
    let mut out = vec![false; g.len()];
    for id in ids {
        let x = g.morph_id(id).ok_or_else(|| Error::UnknownId(id.clone()))?;
        out[x] = true;
    }
    Ok(out)
}

fn check_closed(g: &FiniteGroupoid, mem: &[bool], which: usize) -> Result<()> {
    for u in 0..g.n_units() {
        if !mem[g.unit(u)] {
            return Err(Error::SubgroupoidNotClosed { which, detail: format!("missing unit arrow of `{}`", g.unit_name(u)) });
        }
    }
    for x in 0..g.len() {
        if !mem[x] {
            continue;
        }
        if !mem[g.inv(x)] {
            return Err(Error::SubgroupoidNotClosed { which, detail: format!("inverse of `{}`", g.name(x)) });
        }
        for &y in g.range_fiber(g.s(x)) {
            if mem[y] && !mem[g.mul(x, y)] {
                return Err(Error::SubgroupoidNotClosed { which, detail: format!("product `{}`·`{}`", g.name(x), g.name(y)) });
            }
        }
    }
    Ok(())
}

/// Unique `(a, b)` with `a ∈ A`, `b ∈ B`, `ab = g`.
fn factor(g: &FiniteGroupoid, a_mem: &[bool], b_mem: &[bool], x: usize) -> Result<(usize, usize)> {
    let mut found = None;
    for &a in g.range_fiber(g.r(x)) {
        if !a_mem[a] {
            continue;
        }
        for &b in g.range_fiber(g.s(a)) {
            if b_mem[b] && g.mul(a, b) == x {
                if found.is_some() {
                    return Err(Error::IntersectionTooLarge(g.name(x).to_string()));
                }
                found = Some((a, b));
            }
        }
    }
    found.ok_or_else(|| Error::NotFactorizable(g.name(x).to_string()))
}

impl MatchedPair {
    /// Structural validation only: groupoid axioms, closure, intersection, factorization,
    /// and weight supports. Haar invariance is not required here.
    pub fn assemble(d: &MatchedPairDesc) -> Result<Self> {
        let g = FiniteGroupoid::from_desc(&d.groupoid)?;
        let haar = HaarSystem::from_desc(&g, &d.groupoid)?;
        let in1 = members(&g, &d.g1)?;
        let in2 = members(&g, &d.g2)?;
        check_closed(&g, &in1, 1)?;
        check_closed(&g, &in2, 2)?;
        for x in 0..g.len() {
            if in1[x] && in2[x] && !g.is_unit_arrow(x) {
                return Err(Error::IntersectionTooLarge(g.name(x).to_string()));
            }
        }
        let n = g.len();
        let (mut p1, mut p2, mut p1c, mut p2c) = (vec![0; n], vec![0; n], vec![0; n], vec![0; n]);
        for x in 0..n {
            (p1[x], p2[x]) = factor(&g, &in1, &in2, x)?;
            (p2c[x], p1c[x]) = factor(&g, &in2, &in1, x)?;
        }
        let m = (0..n).map(|x| g.s(p1[x])).collect();
        let mhat = (0..n).map(|x| g.s(p2c[x])).collect();
        let lambda1 = fiber_weights(&g, &d.haar1, Some(&in1))?;
        let lambda2 = fiber_weights(&g, &d.haar2, Some(&in2))?;
        Ok(Self::from_parts(g, haar, in1, in2, lambda1, lambda2, p1, p2, p1c, p2c, m, mhat))
    }

    #[allow(clippy::too_many_arguments)]
    fn from_parts(
        g: FiniteGroupoid,
        haar: HaarSystem,
        in1: Vec<bool>,
        in2: Vec<bool>,
        lambda1: Vec<f64>,
        lambda2: Vec<f64>,
        p1: Vec<usize>,
        p2: Vec<usize>,
        p1c: Vec<usize>,
        p2c: Vec<usize>,
        m: Vec<usize>,
        mhat: Vec<usize>,
    ) -> Self {
        let md = modular_data(&g, &haar.lambda, &haar.nu, None);
        let md1 = modular_data(&g, &lambda1, &haar.nu, Some(&in1));
        let md2 = modular_data(&g, &lambda2, &haar.nu, Some(&in2));
        MatchedPair { g, haar, in1, in2, lambda1, lambda2, md, md1, md2, p1, p2, p1c, p2c, m, mhat }
    }

    /// Replaces the subgroupoid Haar weights and recomputes the modular data.
    pub fn with_subgroupoid_weights(&self, lambda1: Vec<f64>, lambda2: Vec<f64>) -> Self {
        Self::from_parts(
            self.g.clone(),
            self.haar.clone(),
            self.in1.clone(),
            self.in2.clone(),
            lambda1,
            lambda2,
            self.p1.clone(),
            self.p2.clone(),
            self.p1c.clone(),
            self.p2c.clone(),
            self.m.clone(),
            self.mhat.clone(),
        )
    }

    pub fn factorize(&self, g: usize) -> (usize, usize) {
        (self.p1[g], self.p2[g])
    }

    pub fn cofactorize(&self, g: usize) -> (usize, usize) {
        (self.p2c[g], self.p1c[g])
    }

    pub fn mu(&self) -> &[f64] {
        &self.md.mu
    }

    pub fn delta(&self) -> &[f64] {
        &self.md.delta
    }

    pub fn nu(&self) -> &[f64] {
        &self.haar.nu
    }

    pub fn s_map(&self) -> Vec<usize> {
        (0..self.g.len()).map(|x| self.g.s(x)).collect()
    }

    pub fn r_map(&self) -> Vec<usize> {
        (0..self.g.len()).map(|x| self.g.r(x)).collect()
    }

    pub fn g1_arrows(&self) -> Vec<usize> {
        (0..self.g.len()).filter(|&x| self.in1[x]).collect()
    }

    pub fn g2_arrows(&self) -> Vec<usize> {
        (0..self.g.len()).filter(|&x| self.in2[x]).collect()
    }

    /// `φ(g) = p1(g)⁻¹ p2′(g)`.
    pub fn phi(&self, x: usize) -> usize {
        self.g.mul(self.g.inv(self.p1[x]), self.p2c[x])
    }

    /// `φ̂(g) = φ(g)⁻¹`.
    pub fn phi_hat(&self, x: usize) -> usize {
        self.g.inv(self.phi(x))
    }

    pub fn to_desc(&self) -> MatchedPairDesc {
        let g = &self.g;
        let mut groupoid = g.desc();
        groupoid.nu = (0..g.n_units()).map(|u| (g.unit_name(u).to_string(), Weight::Num(self.haar.nu[u]))).collect();
        let fibers = |lambda: &[f64], mem: Option<&[bool]>| {
            let mut out: BTreeMap<String, BTreeMap<String, Weight>> = BTreeMap::new();
            for x in 0..g.len() {
                if mem.is_none_or(|m| m[x]) {
                    out.entry(g.unit_name(g.r(x)).to_string()).or_default().insert(g.name(x).to_string(), Weight::Num(lambda[x]));
                }
            }
            out
        };
        groupoid.haar = fibers(&self.haar.lambda, None);
        let ids = |mem: &[bool]| (0..g.len()).filter(|&x| mem[x]).map(|x| g.name(x).to_string()).collect();
        MatchedPairDesc {
            groupoid,
            g1: ids(&self.in1),
            g2: ids(&self.in2),
            haar1: fibers(&self.lambda1, Some(&self.in1)),
            haar2: fibers(&self.lambda2, Some(&self.in2)),
        }
    }
}

/// Swaps the roles of the two subgroupoids in a description.
pub fn swap_desc(d: &MatchedPairDesc) -> MatchedPairDesc {
    MatchedPairDesc {
        groupoid: d.groupoid.clone(),
        g1: d.g2.clone(),
        g2: d.g1.clone(),
        haar1: d.haar2.clone(),
        haar2: d.haar1.clone(),
    }
}

/// Structural validation followed by Haar invariance and cocycle checks on `G`, `G1`, `G2`.
pub fn validate_matched_pair(d: &MatchedPairDesc, tol: f64) -> Result<MatchedPair> {
    let mp = MatchedPair::assemble(d)?;
    check_measures(&mp, tol)?;
    Ok(mp)
}

/// Subgroupoid index, fiber weights, membership and modular data.
type MeasureSystem<'a> = (usize, &'a [f64], Option<&'a [bool]>, &'a ModularData);

pub fn check_measures(mp: &MatchedPair, tol: f64) -> Result<()> {
    let systems: [MeasureSystem; 3] =
        [(0, &mp.haar.lambda, None, &mp.md), (1, &mp.lambda1, Some(&mp.in1), &mp.md1), (2, &mp.lambda2, Some(&mp.in2), &mp.md2)];
    for (which, lambda, mem, md) in systems {
        let rep = validate_haar(&mp.g, lambda, mem, tol);
        if !rep.pass {
            let w = rep.worst.map(|x| mp.g.name(x).to_string()).unwrap_or_default();
            return Err(Error::HaarFail { which, detail: format!("left invariance residual {:e} at `{w}`", rep.max_residual) });
        }
        if md.cocycle_residual > tol {
            return Err(Error::HaarFail { which, detail: format!("modular cocycle residual {:e}", md.cocycle_residual) });
        }
    }
    Ok(())
}

/// Per-morphism residuals of both decomposition identities, evaluated on point indicators.
#[derive(Debug, Clone)]
pub struct DecompositionReport {
    pub residuals: Vec<f64>,
    pub mirror_residuals: Vec<f64>,
    pub residual: f64,
    pub mirror_residual: f64,
    pub worst: Option<usize>,
    pub mirror_worst: Option<usize>,
    pub pass: bool,
}

/// `λ^{r(g)}(g)` predicted by the G1-first identity.
fn decomposition_term(mp: &MatchedPair, x: usize) -> f64 {
    let (a, b) = mp.factorize(x);
    mp.lambda1[a] * mp.lambda2[b] * mp.md.delta[b] * mp.md2.delta[mp.g.inv(b)]
}

/// `λ^{r(g)}(g)` predicted by the G2-first identity.
fn mirror_term(mp: &MatchedPair, x: usize) -> f64 {
    let (b, a) = mp.cofactorize(x);
    mp.lambda2[b] * mp.lambda1[a] * mp.md.delta[a] * mp.md1.delta[mp.g.inv(a)]
}

pub fn decomposition_report(mp: &MatchedPair, tol: f64) -> DecompositionReport {
    let rel = |a: f64, b: f64| (a - b).abs() / a.abs().max(b.abs());
    let lam = &mp.haar.lambda;
    let residuals: Vec<f64> = (0..mp.g.len()).map(|x| rel(lam[x], decomposition_term(mp, x))).collect();
    let mirror_residuals: Vec<f64> = (0..mp.g.len()).map(|x| rel(lam[x], mirror_term(mp, x))).collect();
    let (worst, residual) = argmax(&residuals);
    let (mirror_worst, mirror_residual) = argmax(&mirror_residuals);
    DecompositionReport {
        pass: residual <= tol && mirror_residual <= tol,
        residuals,
        mirror_residuals,
        residual,
        mirror_residual,
        worst,
        mirror_worst,
    }
}

pub fn check_haar_decomposition(mp: &MatchedPair, tol: f64) -> Result<DecompositionReport> {
    let rep = decomposition_report(mp, tol);
    if rep.residual > tol {
        let w = rep.worst.map(|x| mp.g.name(x).to_string()).unwrap_or_default();
        return Err(Error::DecompositionFail { worst: w, residual: rep.residual });
    }
    if rep.mirror_residual > tol {
        let w = rep.mirror_worst.map(|x| mp.g.name(x).to_string()).unwrap_or_default();
        return Err(Error::DecompositionFail { worst: w, residual: rep.mirror_residual });
    }
    Ok(rep)
}

/// Per-unit scalings: `k` for `λ₁` (G1-first identity) and `k_mirror` for `λ₂` (G2-first
/// identity). `k_mirror` is `None` when the mirrored ratio is not constant on some fiber.
#[derive(Debug, Clone, PartialEq)]
pub struct Normalization {
    pub k: Vec<f64>,
    pub k_mirror: Option<Vec<f64>>,
}

fn fiber_ratio(mp: &MatchedPair, tol: f64, term: impl Fn(usize) -> f64) -> Result<Vec<f64>> {
    let g = &mp.g;
    let mut k = vec![1.0; g.n_units()];
    for (u, ku) in k.iter_mut().enumerate() {
        let fib = g.range_fiber(u);
        let ratios: Vec<f64> = fib.iter().map(|&x| mp.haar.lambda[x] / term(x)).collect();
        let first = ratios[0];
        if ratios.iter().any(|r| (r - first).abs() > tol * first.abs().max(r.abs())) {
            return Err(Error::NotFiberConstant(g.unit_name(u).to_string()));
        }
        *ku = first;
    }
    Ok(k)
}

/// Density of `λ` against the decomposed measure, fiber by fiber. A constant value per fiber is
/// the rescaling of `λ₁ᵘ` that restores the decomposition.
pub fn solve_haar_normalization(mp: &MatchedPair, tol: f64) -> Result<Normalization> {
    let k = fiber_ratio(mp, tol, |x| decomposition_term(mp, x))?;
    let k_mirror = fiber_ratio(mp, tol, |x| mirror_term(mp, x)).ok();
    Ok(Normalization { k, k_mirror })
}

/// Rescales `λ₁ᵘ` by `k(u)` and recomputes the modular data.
pub fn apply_normalization(mp: &MatchedPair, norm: &Normalization) -> MatchedPair {
    let lambda1: Vec<f64> = (0..mp.g.len()).map(|x| if mp.in1[x] { mp.lambda1[x] * norm.k[mp.g.r(x)] } else { 0.0 }).collect();
    mp.with_subgroupoid_weights(lambda1, mp.lambda2.clone())
}

/// Kernel pairs `(g₂, g₁) ∈ G2 ×_{s₂,r₁} G1` with the tables of the two actions:
/// `a_table[k] = p2(g₂g₁)` and `ahat_table[k] = p1(g₂g₁)`.
#[derive(Debug, Clone)]
pub struct MutualActions {
    pub pairs: Vec<(usize, usize)>,
    pub a_table: Vec<usize>,
    pub ahat_table: Vec<usize>,
}

impl MutualActions {
    /// `𝔞(f)(g₂,g₁) = f(p2(g₂g₁))` for `f` indexed by morphisms of `G`.
    pub fn a<T: Copy>(&self, f: &[T]) -> Vec<T> {
        self.a_table.iter().map(|&x| f[x]).collect()
    }

    /// `𝔞̂(h)(g₁,g₂) = h(p1(g₂g₁))`, listed in the order of `pairs`.
    pub fn ahat<T: Copy>(&self, h: &[T]) -> Vec<T> {
        self.ahat_table.iter().map(|&x| h[x]).collect()
    }
}

pub fn kernel_pairs(mp: &MatchedPair) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for g2 in mp.g2_arrows() {
        for &g1 in mp.g.range_fiber(mp.g.s(g2)) {
            if mp.in1[g1] {
                out.push((g2, g1));
            }
        }
    }
    out
}

pub fn mutual_actions(mp: &MatchedPair) -> MutualActions {
    let pairs = kernel_pairs(mp);
    let prod: Vec<usize> = pairs.iter().map(|&(a, b)| mp.g.mul(a, b)).collect();
    MutualActions {
        a_table: prod.iter().map(|&x| mp.p2[x]).collect(),
        ahat_table: prod.iter().map(|&x| mp.p1[x]).collect(),
        pairs,
    }
}

/// Violation counts of the identities tying the actions to the base maps and the coaction laws.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ActionIdentities {
    /// `𝔞∘s₂ = s`: `s(p2(g₂g₁)) = s(g₁)`.
    pub source: usize,
    /// `𝔞∘r₂ = m`: `r(p2(g)) = m(g)`.
    pub middle: usize,
    /// `𝔞̂∘s₁ = m`: `s(p1(g)) = m(g)`.
    pub middle_hat: usize,
    /// `p2(p2(g₂g₁)h₁) = p2(g₂g₁h₁)`.
    pub coaction: usize,
    /// `p1(h₂p1(g₂g₁)) = p1(h₂g₂g₁)`.
    pub coaction_hat: usize,
    /// `p2(φ̂(g)) = p2(g)⁻¹`.
    pub phi_compat: usize,
}

pub fn action_identities(mp: &MatchedPair, acts: &MutualActions) -> ActionIdentities {
    let g = &mp.g;
    let mut out = ActionIdentities::default();
    for (k, &(g2, g1)) in acts.pairs.iter().enumerate() {
        let x = g.mul(g2, g1);
        if g.s(acts.a_table[k]) != g.s(g1) {
            out.source += 1;
        }
        for &h1 in g.range_fiber(g.s(g1)) {
            if mp.in1[h1] && mp.p2[g.mul(mp.p2[x], h1)] != mp.p2[g.mul(x, h1)] {
                out.coaction += 1;
            }
        }
        for &h2 in g.source_fiber(g.r(g2)) {
            if mp.in2[h2] && mp.p1[g.mul(h2, mp.p1[x])] != mp.p1[g.mul(h2, x)] {
                out.coaction_hat += 1;
            }
        }
    }
    for x in 0..g.len() {
        if g.r(mp.p2[x]) != mp.m[x] {
            out.middle += 1;
        }
        if g.s(mp.p1[x]) != mp.m[x] {
            out.middle_hat += 1;
        }
        if mp.p2[mp.phi_hat(x)] != g.inv(mp.p2[x]) {
            out.phi_compat += 1;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::examples::{e1_desc, e2_desc, e3_desc, trivial_desc};

    #[test]
    fn s3_pair_factorizes_uniquely() {
        let mp = validate_matched_pair(&e1_desc(), 1e-12).unwrap();
        assert_eq!(mp.g.len(), 6);
        for x in 0..6 {
            let (a, b) = mp.factorize(x);
            assert!(mp.in1[a] && mp.in2[b]);
            assert_eq!(mp.g.mul(a, b), x);
            let (b2, a2) = mp.cofactorize(x);
            assert_eq!(mp.g.mul(b2, a2), x);
        }
    }

    #[test]
    fn degenerate_pair_with_whole_groupoid_first() {
        let mut d = e3_desc(None);
        let all: Vec<String> = d.groupoid.morphisms.iter().map(|m| m.id.clone()).collect();
        let units: Vec<String> = {
            let g = FiniteGroupoid::from_desc(&d.groupoid).unwrap();
            (0..g.n_units()).map(|u| g.name(g.unit(u)).to_string()).collect()
        };
        d.g1 = all;
        d.g2 = units.clone();
        d.haar1 = d.groupoid.haar.clone();
        d.haar2 = units
            .iter()
            .map(|id| {
                let g = FiniteGroupoid::from_desc(&d.groupoid).unwrap();
                let x = g.morph_id(id).unwrap();
                (g.unit_name(g.r(x)).to_string(), BTreeMap::from([(id.clone(), Weight::Num(1.0))]))
            })
            .collect();
        let mp = validate_matched_pair(&d, 1e-12).unwrap();
        for x in 0..mp.g.len() {
            assert_eq!(mp.p1[x], x);
            assert_eq!(mp.p2[x], mp.g.unit(mp.g.s(x)));
        }
    }

    #[test]
    fn product_pair_factorization_formula() {
        let mp = validate_matched_pair(&e2_desc(), 1e-12).unwrap();
        let id = |s: &str| mp.g.morph_id(s).unwrap();
        // (x1,x2,y1,y2) = (a,c,b,d): p1 = (a,c,b,c), p2 = (b,c,b,d)
        let (a, b) = mp.factorize(id("ac>bd"));
        assert_eq!(mp.g.name(a), "ac>bc");
        assert_eq!(mp.g.name(b), "bc>bd");
        assert_eq!(mp.g.unit_name(mp.m[id("ac>bd")]), "bc");
    }

    #[test]
    fn overlapping_subgroupoids_rejected() {
        let mut d = e1_desc();
        d.g2.push(d.g1.iter().find(|x| x.as_str() != "e").unwrap().clone());
        assert!(matches!(
            MatchedPair::assemble(&d),
            Err(Error::SubgroupoidNotClosed { .. }) | Err(Error::IntersectionTooLarge(_))
        ));
    }

    #[test]
    fn missing_factor_reported() {
        let mut d = e1_desc();
        d.g2 = vec!["e".into()];
        d.haar2 = BTreeMap::from([("*".into(), BTreeMap::from([("e".to_string(), Weight::Num(1.0))]))]);
        assert!(matches!(MatchedPair::assemble(&d), Err(Error::NotFactorizable(_))));
    }

    #[test]
    fn decomposition_holds_on_examples() {
        for d in [trivial_desc(), e1_desc(), e2_desc(), e3_desc(None), e3_desc(Some(vec![1.0, 2.0, 5.0]))] {
            let mp = validate_matched_pair(&d, 1e-12).unwrap();
            let rep = check_haar_decomposition(&mp, 1e-12).unwrap();
            assert!(rep.residual < 1e-12 && rep.mirror_residual < 1e-12);
        }
    }

    #[test]
    fn normalization_recovers_global_and_local_scalings() {
        let mp = validate_matched_pair(&e2_desc(), 1e-12).unwrap();
        let n = solve_haar_normalization(&mp, 1e-12).unwrap();
        assert!(n.k.iter().all(|&k| (k - 1.0).abs() < 1e-14));
        let doubled: Vec<f64> = mp.lambda1.iter().map(|l| 2.0 * l).collect();
        let bad = mp.with_subgroupoid_weights(doubled, mp.lambda2.clone());
        let n = solve_haar_normalization(&bad, 1e-12).unwrap();
        assert!(n.k.iter().all(|&k| (k - 0.5).abs() < 1e-14));
        let u = mp.g.unit_id("bd").unwrap();
        let local: Vec<f64> = (0..mp.g.len()).map(|x| if mp.g.r(x) == u { 2.0 * mp.lambda1[x] } else { mp.lambda1[x] }).collect();
        let bad = mp.with_subgroupoid_weights(local, mp.lambda2.clone());
        assert!(check_haar_decomposition(&bad, 1e-9).is_err());
        let n = solve_haar_normalization(&bad, 1e-12).unwrap();
        for (v, &k) in n.k.iter().enumerate() {
            let want = if v == u { 0.5 } else { 1.0 };
            assert!((k - want).abs() <= 1e-12 * want);
        }
        let fixed = apply_normalization(&bad, &n);
        assert!(check_haar_decomposition(&fixed, 1e-9).is_ok());
    }

    #[test]
    fn incompatible_measure_is_not_fiber_constant() {
        let mp = validate_matched_pair(&e2_desc(), 1e-12).unwrap();
        let x = mp.g.morph_id("ac>ad").unwrap();
        let mut l2 = mp.lambda2.clone();
        l2[x] *= 3.0;
        let bad = mp.with_subgroupoid_weights(mp.lambda1.clone(), l2);
        assert!(matches!(solve_haar_normalization(&bad, 1e-12), Err(Error::NotFiberConstant(_))));
    }

    #[test]
    fn perturbed_subgroupoid_weight_is_haar_fail() {
        let mut d = e2_desc();
        let fib = d.haar1.get_mut("ac").unwrap();
        let key = fib.keys().find(|k| k.as_str() != "ac>ac").unwrap().clone();
        fib.insert(key, Weight::Num(7.0));
        assert!(matches!(validate_matched_pair(&d, 1e-9), Err(Error::HaarFail { which: 1, .. })));
    }

    #[test]
    fn swap_symmetry() {
        for d in [e1_desc(), e2_desc(), e3_desc(None)] {
            let mp = validate_matched_pair(&swap_desc(&d), 1e-12).unwrap();
            let orig = validate_matched_pair(&d, 1e-12).unwrap();
            assert_eq!(mp.m, orig.mhat);
        }
    }

    #[test]
    fn action_identities_hold() {
        for d in [e1_desc(), e2_desc(), e3_desc(None)] {
            let mp = validate_matched_pair(&d, 1e-12).unwrap();
            let acts = mutual_actions(&mp);
            assert_eq!(action_identities(&mp, &acts), ActionIdentities::default());
            let ones = vec![1.0; mp.g.len()];
            assert!(acts.a(&ones).iter().all(|&v| v == 1.0));
        }
    }

    #[test]
    fn product_pair_action_formula() {
        let mp = validate_matched_pair(&e2_desc(), 1e-12).unwrap();
        let acts = mutual_actions(&mp);
        // 𝔞(f)((x2,y2,x1),(x1,y1,y2)) = f(x2,y2,y1): the G2 arrow (y1,x2)->(y1,y2)
        for (k, &(g2, g1)) in acts.pairs.iter().enumerate() {
            let (n2, n1) = (mp.g.name(g2), mp.g.name(g1));
            let (x1, x2, y2) = (&n2[0..1], &n2[1..2], &n2[4..5]);
            let y1 = &n1[3..4];
            assert_eq!(&n1[0..1], x1);
            assert_eq!(mp.g.name(acts.a_table[k]), format!("{y1}{x2}>{y1}{y2}"));
        }
    }
}
