//! Example families: transformation groupoids of exactly factorized groups, product pair
//! groupoids, and the classification of transitive principal matched pairs.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::groupoid::{FiniteGroupoid, GroupoidDesc, MorphismDesc};
use crate::matched_pair::{MatchedPair, MatchedPairDesc};
use crate::weight::Weight;

type FiberWeights = BTreeMap<String, BTreeMap<String, Weight>>;

/// Permutation group, `(gh)(i) = g(h(i))`.
#[derive(Debug, Clone)]
pub struct PermGroup {
    pub names: Vec<String>,
    pub perms: Vec<Vec<usize>>,
}

impl PermGroup {
    pub fn len(&self) -> usize {
        self.perms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.perms.is_empty()
    }

    pub fn index(&self, p: &[usize]) -> usize {
        self.perms.iter().position(|q| q == p).expect("closed under products")
    }

    pub fn mul(&self, g: usize, h: usize) -> usize {
        let (a, b) = (&self.perms[g], &self.perms[h]);
        let p: Vec<usize> = b.iter().map(|&i| a[i]).collect();
        self.index(&p)
    }

    pub fn inv(&self, g: usize) -> usize {
        let a = &self.perms[g];
        let mut p = vec![0; a.len()];
        for (i, &j) in a.iter().enumerate() {
            p[j] = i;
        }
        self.index(&p)
    }

    pub fn identity(&self) -> usize {
        let n = self.perms[0].len();
        self.index(&(0..n).collect::<Vec<_>>())
    }

    pub fn trivial() -> Self {
        PermGroup { names: vec!["e".into()], perms: vec![vec![0]] }
    }

    pub fn s3() -> Self {
        let table: [(&str, [usize; 3]); 6] = [
            ("e", [0, 1, 2]),
            ("(12)", [1, 0, 2]),
            ("(13)", [2, 1, 0]),
            ("(23)", [0, 2, 1]),
            ("(123)", [1, 2, 0]),
            ("(132)", [2, 0, 1]),
        ];
        PermGroup {
            names: table.iter().map(|(n, _)| n.to_string()).collect(),
            perms: table.iter().map(|(_, p)| p.to_vec()).collect(),
        }
    }
}

/// Exactly factorized group `G = G1·G2` with a right action on a finite set.
#[derive(Debug, Clone)]
pub struct GroupMatchedPair {
    pub group: PermGroup,
    pub g1: Vec<usize>,
    pub g2: Vec<usize>,
    pub points: Vec<String>,
    /// `act[x][g] = x·g`.
    pub act: Vec<Vec<usize>>,
    pub nu: Vec<f64>,
}

impl GroupMatchedPair {
    pub fn check(&self) -> Result<()> {
        let gr = &self.group;
        let e = gr.identity();
        for sub in [&self.g1, &self.g2] {
            for &a in sub.iter() {
                for &b in sub.iter() {
                    if !sub.contains(&gr.mul(a, b)) {
                        return Err(Error::NotExactFactorization(format!("subgroup not closed at {}", gr.names[a])));
                    }
                }
            }
        }
        let mut hit = vec![0usize; gr.len()];
        for &a in &self.g1 {
            for &b in &self.g2 {
                hit[gr.mul(a, b)] += 1;
            }
        }
        if let Some(g) = hit.iter().position(|&k| k != 1) {
            return Err(Error::NotExactFactorization(format!("{} factors {} times", gr.names[g], hit[g])));
        }
        for (x, row) in self.act.iter().enumerate() {
            if row[e] != x {
                return Err(Error::NotExactFactorization("identity acts nontrivially".into()));
            }
            for g in 0..gr.len() {
                for h in 0..gr.len() {
                    if self.act[row[g]][h] != row[gr.mul(g, h)] {
                        return Err(Error::NotExactFactorization("not a right action".into()));
                    }
                }
            }
        }
        Ok(())
    }

    /// `S₃ = {e,(12)}·A₃` acting on one point, on `{1,2,3}` by `x·g = g⁻¹(x)`, or on itself by
    /// `x·g = g⁻¹x`.
    pub fn s3(space: usize, nu: Option<Vec<f64>>) -> Result<Self> {
        let group = PermGroup::s3();
        let g1 = vec![0, 1];
        let g2 = vec![0, 4, 5];
        let (points, act): (Vec<String>, Vec<Vec<usize>>) = match space {
            1 => (vec!["*".into()], vec![vec![0; 6]]),
            3 => (
                (1..=3).map(|i| i.to_string()).collect(),
                (0..3).map(|x| (0..6).map(|g| group.perms[group.inv(g)][x]).collect()).collect(),
            ),
            6 => (group.names.clone(), (0..6).map(|x| (0..6).map(|g| group.mul(group.inv(g), x)).collect()).collect()),
            _ => return Err(Error::UnknownExample(format!("s3 acting on a space of size {space}"))),
        };
        let nu = nu.unwrap_or_else(|| vec![1.0; points.len()]);
        if nu.len() != points.len() {
            return Err(Error::ParseError(format!("expected {} unit weights, got {}", points.len(), nu.len())));
        }
        Ok(GroupMatchedPair { group, g1, g2, points, act, nu })
    }

    pub fn trivial() -> Self {
        GroupMatchedPair {
            group: PermGroup::trivial(),
            g1: vec![0],
            g2: vec![0],
            points: vec!["*".into()],
            act: vec![vec![0]],
            nu: vec![1.0],
        }
    }

    pub fn morphism_name(&self, x: usize, g: usize) -> String {
        if self.points.len() == 1 {
            self.group.names[g].clone()
        } else {
            format!("{}:{}", self.points[x], self.group.names[g])
        }
    }
}

fn counting_fibers(d: &GroupoidDesc, keep: impl Fn(&MorphismDesc) -> bool) -> FiberWeights {
    let mut out: FiberWeights = BTreeMap::new();
    for m in d.morphisms.iter().filter(|m| keep(m)) {
        out.entry(m.rng.clone()).or_default().insert(m.id.clone(), Weight::Num(1.0));
    }
    out
}

/// Transformation groupoid `X×G`, `r(x,g) = x`, `s(x,g) = x·g`, with subgroupoids `X×G1`, `X×G2`
/// and counting Haar systems.
pub fn gen_transformation_matched_pair(gmp: &GroupMatchedPair) -> Result<MatchedPairDesc> {
    gmp.check()?;
    let gr = &gmp.group;
    let mut d = GroupoidDesc { units: gmp.points.clone(), ..Default::default() };
    for x in 0..gmp.points.len() {
        for g in 0..gr.len() {
            let xg = gmp.act[x][g];
            d.morphisms.push(MorphismDesc {
                id: gmp.morphism_name(x, g),
                src: gmp.points[xg].clone(),
                rng: gmp.points[x].clone(),
            });
            d.inverse.push((gmp.morphism_name(x, g), gmp.morphism_name(xg, gr.inv(g))));
            for h in 0..gr.len() {
                d.compose.push((gmp.morphism_name(x, g), gmp.morphism_name(xg, h), gmp.morphism_name(x, gr.mul(g, h))));
            }
        }
    }
    d.nu = gmp.points.iter().zip(&gmp.nu).map(|(p, &v)| (p.clone(), Weight::Num(v))).collect();
    d.haar = counting_fibers(&d, |_| true);
    let sub_ids = |sub: &[usize]| -> Vec<String> {
        (0..gmp.points.len()).flat_map(|x| sub.iter().map(move |&g| (x, g))).map(|(x, g)| gmp.morphism_name(x, g)).collect()
    };
    let g1 = sub_ids(&gmp.g1);
    let g2 = sub_ids(&gmp.g2);
    let haar1 = counting_fibers(&d, |m| g1.contains(&m.id));
    let haar2 = counting_fibers(&d, |m| g2.contains(&m.id));
    Ok(MatchedPairDesc { groupoid: d, g1, g2, haar1, haar2 })
}

/// `X = X1 × X2` with weights on each factor.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductSpace {
    pub x1: Vec<String>,
    pub x2: Vec<String>,
    pub nu1: Vec<f64>,
    pub nu2: Vec<f64>,
}

impl ProductSpace {
    /// Single-letter labels: `X1` from `a`, `X2` continuing after it. Counting weights.
    pub fn letters(n1: usize, n2: usize) -> Result<Self> {
        if n1 == 0 || n2 == 0 || n1 + n2 > 26 {
            return Err(Error::UnknownExample(format!("product pair with factor sizes {n1}, {n2}")));
        }
        let letter = |i: usize| ((b'a' + i as u8) as char).to_string();
        Ok(ProductSpace {
            x1: (0..n1).map(letter).collect(),
            x2: (n1..n1 + n2).map(letter).collect(),
            nu1: vec![1.0; n1],
            nu2: vec![1.0; n2],
        })
    }

    fn point(&self, i: usize, j: usize) -> String {
        format!("{}{}", self.x1[i], self.x2[j])
    }
}

/// Pair groupoid on `X1×X2`; `G1` keeps the second coordinate, `G2` keeps the first.
/// `λ^{x}(x,y) = ν(y)`, `λ₁` weighs `ν1(y1)` and `λ₂` weighs `ν2(y2)`.
pub fn gen_product_pair_groupoid(ps: &ProductSpace) -> MatchedPairDesc {
    let pts: Vec<(usize, usize)> = (0..ps.x1.len()).flat_map(|i| (0..ps.x2.len()).map(move |j| (i, j))).collect();
    let name = |a: (usize, usize), b: (usize, usize)| format!("{}>{}", ps.point(a.0, a.1), ps.point(b.0, b.1));
    let mut d = GroupoidDesc { units: pts.iter().map(|&(i, j)| ps.point(i, j)).collect(), ..Default::default() };
    let (mut g1, mut g2) = (Vec::new(), Vec::new());
    let (mut haar1, mut haar2) = (FiberWeights::new(), FiberWeights::new());
    for &x in &pts {
        let xn = ps.point(x.0, x.1);
        d.nu.insert(xn.clone(), Weight::Num(ps.nu1[x.0] * ps.nu2[x.1]));
        for &y in &pts {
            let id = name(x, y);
            d.morphisms.push(MorphismDesc { id: id.clone(), src: ps.point(y.0, y.1), rng: xn.clone() });
            d.inverse.push((id.clone(), name(y, x)));
            for &z in &pts {
                d.compose.push((id.clone(), name(y, z), name(x, z)));
            }
            d.haar.entry(xn.clone()).or_default().insert(id.clone(), Weight::Num(ps.nu1[y.0] * ps.nu2[y.1]));
            if x.1 == y.1 {
                g1.push(id.clone());
                haar1.entry(xn.clone()).or_default().insert(id.clone(), Weight::Num(ps.nu1[y.0]));
            }
            if x.0 == y.0 {
                g2.push(id.clone());
                haar2.entry(xn.clone()).or_default().insert(id.clone(), Weight::Num(ps.nu2[y.1]));
            }
        }
    }
    MatchedPairDesc { groupoid: d, g1, g2, haar1, haar2 }
}

fn classes(mp: &MatchedPair, mem: &[bool]) -> Vec<usize> {
    let g = &mp.g;
    let mut label = vec![usize::MAX; g.n_units()];
    let mut next = 0;
    for u in 0..g.n_units() {
        if label[u] != usize::MAX {
            continue;
        }
        for &x in g.range_fiber(u) {
            if mem[x] {
                label[g.s(x)] = next;
            }
        }
        next += 1;
    }
    label
}

/// Recovers `X ≅ X/ℛ(G2) × X/ℛ(G1)` for a matched pair on a pair groupoid, with the factor
/// weights normalized so that `ν = ν1 ⊗ ν2` exactly.
pub fn classify_transitive_principal(mp: &MatchedPair) -> Result<ProductSpace> {
    let g = &mp.g;
    let n = g.n_units();
    let mut seen = vec![false; n * n];
    for x in 0..g.len() {
        let k = g.r(x) * n + g.s(x);
        if seen[k] {
            return Err(Error::NotBijective("groupoid is not principal".into()));
        }
        seen[k] = true;
    }
    if seen.iter().any(|&b| !b) {
        return Err(Error::NotBijective("groupoid is not transitive".into()));
    }
    let a1 = classes(mp, &mp.in2);
    let a2 = classes(mp, &mp.in1);
    let n1 = a1.iter().max().map_or(0, |m| m + 1);
    let n2 = a2.iter().max().map_or(0, |m| m + 1);
    let mut inv = vec![usize::MAX; n1 * n2];
    for u in 0..n {
        let k = a1[u] * n2 + a2[u];
        if inv[k] != usize::MAX {
            return Err(Error::NotBijective(format!("`{}` and `{}` have the same image", g.unit_name(inv[k]), g.unit_name(u))));
        }
        inv[k] = u;
    }
    if n1 * n2 != n {
        return Err(Error::NotBijective(format!("{n} points onto {n1}×{n2} classes")));
    }
    let nu = mp.nu();
    let at = |i: usize, j: usize| nu[inv[i * n2 + j]];
    let lam1: Vec<f64> = (0..n1).map(|i| (0..n2).map(|j| at(i, j)).sum()).collect();
    let lam2: Vec<f64> = (0..n2).map(|j| (0..n1).map(|i| at(i, j)).sum()).collect();
    let total: f64 = lam1.iter().sum();
    for i in 0..n1 {
        for j in 0..n2 {
            let want = lam1[i] * lam2[j] / total;
            if (at(i, j) - want).abs() > 1e-12 * want {
                return Err(Error::NotBijective("unit measure is not a product".into()));
            }
        }
    }
    let class_name = |lab: &[usize], c: usize| {
        let members: Vec<&str> = (0..n).filter(|&u| lab[u] == c).map(|u| g.unit_name(u)).collect();
        format!("{{{}}}", members.join(","))
    };
    let scale = at(0, 0) / (lam1[0] * lam2[0]);
    Ok(ProductSpace {
        x1: (0..n1).map(|c| class_name(&a1, c)).collect(),
        x2: (0..n2).map(|c| class_name(&a2, c)).collect(),
        nu1: lam1.iter().map(|l| l * scale).collect(),
        nu2: lam2.clone(),
    })
}

/// `G1` the unit arrows, `G2 = G`: `p2(g) = g`, `m = r`, and the unitary reduces to the
/// classical `ξ(x,y) ↦ ξ(x,x⁻¹y)`.
pub fn gen_degenerate_pair(d: &GroupoidDesc) -> Result<MatchedPairDesc> {
    let g = FiniteGroupoid::from_desc(d)?;
    let units: Vec<String> = (0..g.n_units()).map(|u| g.name(g.unit(u)).to_string()).collect();
    let haar1 = counting_fibers(d, |m| units.contains(&m.id));
    let mut groupoid = d.clone();
    if groupoid.haar.is_empty() {
        groupoid.haar = counting_fibers(d, |_| true);
    }
    let all = d.morphisms.iter().map(|m| m.id.clone()).collect();
    let haar2 = groupoid.haar.clone();
    Ok(MatchedPairDesc { groupoid, g1: units, g2: all, haar1, haar2 })
}

pub fn trivial_desc() -> MatchedPairDesc {
    gen_transformation_matched_pair(&GroupMatchedPair::trivial()).expect("trivial pair")
}

/// One-unit `S₃`.
pub fn e1_desc() -> MatchedPairDesc {
    gen_transformation_matched_pair(&GroupMatchedPair::s3(1, None).expect("s3")).expect("s3 pair")
}

/// Pair groupoid on `{a,b}×{c,d}`.
pub fn e2_desc() -> MatchedPairDesc {
    gen_product_pair_groupoid(&ProductSpace::letters(2, 2).expect("2x2"))
}

/// `S₃` acting on `{1,2,3}`, optionally with a non-uniform unit measure.
pub fn e3_desc(nu: Option<Vec<f64>>) -> MatchedPairDesc {
    gen_transformation_matched_pair(&GroupMatchedPair::s3(3, nu).expect("s3 on 3")).expect("s3 pair")
}
