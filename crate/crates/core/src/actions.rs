//! Finite right `G`-spaces: the coaction `𝔞(f)(x,g) = f(x·g)`, the convolution algebra on
//! `X ♭×r G` with its representation `𝔑`, fixed points and invariant measures.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::groupoid::{modular_data, FiniteGroupoid, HaarSystem};
use crate::hilbert::TupleSpace;
use crate::linalg::{c, diag, Mat, C64, ZERO};
use crate::weight::Weight;

/// `{"points", "theta", "flat", "act": [[x, g, x·g], ...]}`. `theta` holds the fiber measures
/// `θ^{♭(x)}(x)`.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct GActionDesc {
    pub points: Vec<String>,
    pub theta: BTreeMap<String, Weight>,
    pub flat: BTreeMap<String, String>,
    pub act: Vec<(String, String, String)>,
}

#[derive(Debug, Clone)]
pub struct GAction {
    pub points: Vec<String>,
    pub theta: Vec<f64>,
    pub flat: Vec<usize>,
    /// `act[x * |G| + g]`, defined iff `flat(x) = r(g)`.
    act: Vec<Option<usize>>,
    n_arrows: usize,
}

impl GAction {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn try_act(&self, x: usize, g: usize) -> Option<usize> {
        self.act[x * self.n_arrows + g]
    }

    pub fn act(&self, x: usize, g: usize) -> usize {
        self.try_act(x, g).expect("x·g defined")
    }

    /// Pairs `(x, g)` with `♭(x) = r(g)`.
    pub fn fiber_pairs(&self, gr: &FiniteGroupoid) -> Vec<(usize, usize)> {
        (0..self.len()).flat_map(|x| gr.range_fiber(self.flat[x]).iter().map(move |&g| (x, g))).collect()
    }

    /// The unit-space action: `X = G⁰`, `♭ = id`, `u·g = s(g)`, `θ^u = δ_u`.
    pub fn units(gr: &FiniteGroupoid) -> GAction {
        let n = gr.len();
        let mut act = vec![None; gr.n_units() * n];
        for g in 0..n {
            act[gr.r(g) * n + g] = Some(gr.s(g));
        }
        GAction {
            points: (0..gr.n_units()).map(|u| gr.unit_name(u).to_string()).collect(),
            theta: vec![1.0; gr.n_units()],
            flat: (0..gr.n_units()).collect(),
            act,
            n_arrows: n,
        }
    }

    pub fn to_desc(&self, gr: &FiniteGroupoid) -> GActionDesc {
        let mut act = Vec::new();
        for x in 0..self.len() {
            for g in 0..gr.len() {
                if let Some(y) = self.try_act(x, g) {
                    act.push((self.points[x].clone(), gr.name(g).into(), self.points[y].clone()));
                }
            }
        }
        GActionDesc {
            points: self.points.clone(),
            theta: self.points.iter().zip(&self.theta).map(|(p, &w)| (p.clone(), Weight::Num(w))).collect(),
            flat: self.points.iter().zip(&self.flat).map(|(p, &u)| (p.clone(), gr.unit_name(u).into())).collect(),
            act,
        }
    }
}

/// Parses `d` and checks the action axioms exactly.
pub fn validate_action(gr: &FiniteGroupoid, d: &GActionDesc) -> Result<GAction> {
    let index: BTreeMap<&str, usize> = d.points.iter().enumerate().map(|(i, p)| (p.as_str(), i)).collect();
    if index.len() != d.points.len() {
        return Err(Error::ParseError("duplicate point".into()));
    }
    let point = |s: &str| index.get(s).copied().ok_or_else(|| Error::UnknownId(s.to_string()));
    let mut flat = Vec::with_capacity(d.points.len());
    let mut theta = Vec::with_capacity(d.points.len());
    for p in &d.points {
        let u = d.flat.get(p).ok_or_else(|| Error::SupportMismatch(format!("no fibration value for `{p}`")))?;
        flat.push(gr.unit_id(u).ok_or_else(|| Error::UnknownId(u.clone()))?);
        let w = d.theta.get(p).ok_or_else(|| Error::SupportMismatch(format!("no weight for `{p}`")))?.value()?;
        if w.is_nan() || w <= 0.0 {
            return Err(Error::SupportMismatch(format!("weight of `{p}` is not positive")));
        }
        theta.push(w);
    }
    let n = gr.len();
    let mut act = vec![None; d.points.len() * n];
    for (x, g, y) in &d.act {
        let (xi, yi) = (point(x)?, point(y)?);
        let gi = gr.morph_id(g).ok_or_else(|| Error::UnknownId(g.clone()))?;
        if flat[xi] != gr.r(gi) || flat[yi] != gr.s(gi) {
            return Err(Error::FibrationMismatch { x: x.clone(), g: g.clone() });
        }
        match act[xi * n + gi] {
            Some(prev) if prev != yi => return Err(Error::FibrationMismatch { x: x.clone(), g: g.clone() }),
            _ => act[xi * n + gi] = Some(yi),
        }
    }
    let a = GAction { points: d.points.clone(), theta, flat, act, n_arrows: n };
    for x in 0..a.len() {
        for &g in gr.range_fiber(a.flat[x]) {
            let y = a.try_act(x, g).ok_or_else(|| Error::FibrationMismatch { x: a.points[x].clone(), g: gr.name(g).into() })?;
            if gr.is_unit_arrow(g) && y != x {
                return Err(Error::AssocViolation { g: a.points[x].clone(), h: gr.name(g).into(), k: String::new() });
            }
            for &h in gr.range_fiber(gr.s(g)) {
                if a.act(x, gr.mul(g, h)) != a.act(y, h) {
                    return Err(Error::AssocViolation { g: a.points[x].clone(), h: gr.name(g).into(), k: gr.name(h).into() });
                }
            }
        }
    }
    Ok(a)
}

/// `𝔞(f)(x,g) = f(x·g)` on `fiber_pairs`.
pub fn action_coaction(gr: &FiniteGroupoid, a: &GAction, f: &[C64]) -> Vec<C64> {
    a.fiber_pairs(gr).iter().map(|&(x, g)| f[a.act(x, g)]).collect()
}

/// Violations of `(𝔞⋆i)𝔞 = (i⋆Γ)𝔞` and `𝔞(b(φ)) = 1⊗s(φ)` over point and unit indicators.
pub fn coaction_violations(gr: &FiniteGroupoid, a: &GAction) -> usize {
    let mut bad = 0;
    for x in 0..a.len() {
        for &g in gr.range_fiber(a.flat[x]) {
            // b(φ) = φ∘♭, so 𝔞(b(φ))(x,g) = φ(♭(x·g)) must equal φ(s(g)) for every φ
            bad += usize::from(a.flat[a.act(x, g)] != gr.s(g));
            for &h in gr.range_fiber(gr.s(g)) {
                bad += usize::from(a.act(a.act(x, g), h) != a.act(x, gr.mul(g, h)));
            }
        }
    }
    bad
}

/// Kernels on `X ♭×r G` with the operations of the convolution *-algebra.
pub struct Convolution<'a> {
    pub gr: &'a FiniteGroupoid,
    pub haar: &'a HaarSystem,
    pub action: &'a GAction,
    pub pairs: Vec<(usize, usize)>,
    index: Vec<Option<usize>>,
    pub delta: Vec<f64>,
}

impl<'a> Convolution<'a> {
    pub fn new(gr: &'a FiniteGroupoid, haar: &'a HaarSystem, action: &'a GAction) -> Self {
        let pairs = action.fiber_pairs(gr);
        let mut index = vec![None; action.len() * gr.len()];
        for (i, &(x, g)) in pairs.iter().enumerate() {
            index[x * gr.len() + g] = Some(i);
        }
        let delta = modular_data(gr, &haar.lambda, &haar.nu, None).delta;
        Convolution { gr, haar, action, pairs, index, delta }
    }

    pub fn dim(&self) -> usize {
        self.pairs.len()
    }

    fn at(&self, f: &[C64], x: usize, g: usize) -> C64 {
        self.index[x * self.gr.len() + g].map_or(ZERO, |i| f[i])
    }

    /// `F⋆F'(x,g) = Σ_h F(x,h) F'(x·h, h⁻¹g) λ^{r(g)}(h)`.
    pub fn star(&self, f: &[C64], f2: &[C64]) -> Vec<C64> {
        let (gr, a) = (self.gr, self.action);
        self.pairs
            .iter()
            .map(|&(x, g)| {
                gr.range_fiber(gr.r(g))
                    .iter()
                    .map(|&h| self.at(f, x, h) * self.at(f2, a.act(x, h), gr.mul(gr.inv(h), g)) * c(self.haar.lambda[h]))
                    .sum()
            })
            .collect()
    }

    /// `F^#(x,g) = conj F(x·g, g⁻¹) δ(g)` with `δ = dμ⁻¹/dμ`.
    pub fn sharp(&self, f: &[C64]) -> Vec<C64> {
        self.pairs.iter().map(|&(x, g)| self.at(f, self.action.act(x, g), self.gr.inv(g)).conj() * c(self.delta[g])).collect()
    }

    /// `L²(X ♭×r G)` with weight `θ^{♭(x)}(x) ν(♭(x)) λ^{♭(x)}(g)`.
    pub fn space(&self) -> TupleSpace {
        let a = self.action;
        let w = self.pairs.iter().map(|&(x, g)| a.theta[x] * self.haar.nu[a.flat[x]] * self.haar.lambda[g]).collect();
        TupleSpace::new(self.pairs.iter().map(|&(x, g)| vec![x, g]).collect(), w)
    }

    /// `𝔑(F)ξ(x,g) = Σ_h F(x·g, h) δ(h)^{-1/2} ξ(x, gh) λ^{s(g)}(h)`, orthonormal coordinates.
    pub fn represent(&self, f: &[C64]) -> Mat {
        let (gr, a) = (self.gr, self.action);
        let mut k = Mat::zeros(self.dim(), self.dim());
        for (i, &(x, g)) in self.pairs.iter().enumerate() {
            let y = a.act(x, g);
            for &h in gr.range_fiber(gr.s(g)) {
                let v = self.at(f, y, h);
                if v != ZERO {
                    let j = self.index[x * gr.len() + gr.mul(g, h)].expect("x♭ = r(gh)");
                    k[(i, j)] += v * c(self.delta[h].powf(-0.5) * self.haar.lambda[h]);
                }
            }
        }
        self.space().to_ortho(&k)
    }

    /// `𝔞(f)`: multiplication by `f(x·g)`.
    pub fn a_op(&self, f: &[C64]) -> Mat {
        diag(&self.pairs.iter().map(|&(x, g)| f[self.action.act(x, g)]).collect::<Vec<_>>())
    }

    /// `(1⊗ρ(k))ξ(x,g) = Σ_h k(h) ξ(x,gh) λ^{s(g)}(h)`.
    pub fn rho_op(&self, k: &[C64]) -> Mat {
        let gr = self.gr;
        let mut m = Mat::zeros(self.dim(), self.dim());
        for (i, &(x, g)) in self.pairs.iter().enumerate() {
            for &h in gr.range_fiber(gr.s(g)) {
                if k[h] != ZERO {
                    let j = self.index[x * gr.len() + gr.mul(g, h)].expect("x♭ = r(gh)");
                    m[(i, j)] += k[h] * c(self.haar.lambda[h]);
                }
            }
        }
        self.space().to_ortho(&m)
    }

    /// The kernel `f ⊗ k`.
    pub fn tensor(&self, f: &[C64], k: &[C64]) -> Vec<C64> {
        self.pairs.iter().map(|&(x, g)| f[x] * k[g]).collect()
    }
}

/// Orbit labels of the points.
pub fn orbits(gr: &FiniteGroupoid, a: &GAction) -> Vec<usize> {
    let mut label: Vec<usize> = (0..a.len()).collect();
    fn root(label: &mut [usize], mut x: usize) -> usize {
        while label[x] != x {
            label[x] = label[label[x]];
            x = label[x];
        }
        x
    }
    for x in 0..a.len() {
        for &g in gr.range_fiber(a.flat[x]) {
            let (p, q) = (root(&mut label, x), root(&mut label, a.act(x, g)));
            label[p.max(q)] = p.min(q);
        }
    }
    (0..a.len()).map(|x| root(&mut label, x)).collect()
}

/// Basis of the orbit-constant functions: one indicator per orbit.
pub fn fixed_point_algebra(gr: &FiniteGroupoid, a: &GAction) -> Vec<Vec<f64>> {
    let lab = orbits(gr, a);
    let mut reps: Vec<usize> = lab.clone();
    reps.sort_unstable();
    reps.dedup();
    reps.iter().map(|&r| lab.iter().map(|&l| if l == r { 1.0 } else { 0.0 }).collect()).collect()
}

/// `max |f(x·g) − f(x)|`: zero iff `f` is in the fixed-point algebra.
pub fn fixed_point_residual(gr: &FiniteGroupoid, a: &GAction, f: &[f64]) -> f64 {
    a.fiber_pairs(gr).iter().map(|&(x, g)| (f[a.act(x, g)] - f[x]).abs()).fold(0.0, f64::max)
}

/// Arrow-by-arrow invariance `θ'^{s(g)}(y·g) = θ'^{r(g)}(y)`.
pub fn check_invariance(gr: &FiniteGroupoid, a: &GAction, theta: &[f64], tol: f64) -> Result<()> {
    for (y, g) in a.fiber_pairs(gr) {
        let (lhs, rhs) = (theta[a.act(y, g)], theta[y]);
        if (lhs - rhs).abs() > tol * lhs.abs().max(rhs.abs()).max(1.0) {
            return Err(Error::NotInvariant(gr.name(g).into()));
        }
    }
    Ok(())
}

/// Checks `θ'` is invariant and returns `dθ'/dθ`, which then lies in the fixed-point algebra.
pub fn check_invariant_measure(gr: &FiniteGroupoid, a: &GAction, theta2: &[f64], tol: f64) -> Result<Vec<f64>> {
    check_invariance(gr, a, &a.theta, tol)?;
    check_invariance(gr, a, theta2, tol)?;
    let ratio: Vec<f64> = theta2.iter().zip(&a.theta).map(|(p, q)| p / q).collect();
    debug_assert!(fixed_point_residual(gr, a, &ratio) <= tol * ratio.iter().fold(1.0, |m: f64, v| m.max(v.abs())));
    Ok(ratio)
}

/// `T_𝔞(f)(x) = Σ_{g∈G^{♭(x)}} f(x·g) λ^{♭(x)}(g)`.
pub fn action_operator_weight(gr: &FiniteGroupoid, haar: &HaarSystem, a: &GAction, f: &[f64]) -> Vec<f64> {
    (0..a.len()).map(|x| gr.range_fiber(a.flat[x]).iter().map(|&g| f[a.act(x, g)] * haar.lambda[g]).sum()).collect()
}
