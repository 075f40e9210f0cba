//! The commutative quantum groupoid of a finite groupoid and its dual: `W_G`, `Γ_G`, `T_G`,
//! `T⁻¹_G`, the regular representations, `Γ̂_G` and `T̂_G`.
//!
//! Functions on `G` are vectors indexed by morphism; operators are kernels in these natural
//! coordinates.

use crate::groupoid::{FiniteGroupoid, HaarSystem};
use crate::hilbert::{Monomial, TupleSpace};
use crate::linalg::{c, Mat, C64, ZERO};

#[derive(Debug, Clone)]
pub struct ClassicalQG {
    pub g: FiniteGroupoid,
    pub haar: HaarSystem,
    /// `G²_{s,r}`, weight `μ(x)λ(y)`.
    pub sr: TupleSpace,
    /// `G²_{r,r}`, weight `μ(x)λ(y)`.
    pub rr: TupleSpace,
    /// `W_G ξ(x,y) = ξ(x,x⁻¹y)`, orthonormal form, columns `sr`, rows `rr`.
    pub w: Monomial,
}

fn pair_space(g: &FiniteGroupoid, haar: &HaarSystem, link: impl Fn(usize) -> usize) -> TupleSpace {
    let (mut tuples, mut weights) = (Vec::new(), Vec::new());
    for x in 0..g.len() {
        for &y in g.range_fiber(link(x)) {
            tuples.push(vec![x, y]);
            weights.push(haar.nu[g.r(x)] * haar.lambda[x] * haar.lambda[y]);
        }
    }
    TupleSpace::new(tuples, weights)
}

pub fn classical_qg(g: &FiniteGroupoid, haar: &HaarSystem) -> ClassicalQG {
    let sr = pair_space(g, haar, |x| g.s(x));
    let rr = pair_space(g, haar, |x| g.r(x));
    let mut perm = Vec::with_capacity(sr.len());
    let mut scal = Vec::with_capacity(sr.len());
    for (k, t) in sr.tuples.iter().enumerate() {
        let row = rr.index_of(&[t[0], g.mul(t[0], t[1])]).expect("(x, xy) lies in G²_{r,r}");
        perm.push(row);
        scal.push(c((rr.weights[row] / sr.weights[k]).sqrt()));
    }
    let w = Monomial { rows: rr.len(), perm, scal };
    ClassicalQG { g: g.clone(), haar: haar.clone(), sr, rr, w }
}

impl ClassicalQG {
    /// `max |W*W − 1|` for the monomial form.
    pub fn unitarity_residual(&self) -> f64 {
        if !self.w.is_bijective() {
            return f64::INFINITY;
        }
        self.w.scal.iter().map(|s| (s.norm() - 1.0).abs()).fold(0.0, f64::max)
    }

    /// `W₂₃W₁₂ = W₁₂W₁₃W₂₃` on composable triples. Each leg moves one coordinate by left
    /// multiplication and carries the orthonormal factor `√(λ(new)/λ(old))`.
    pub fn pentagon_residual(&self) -> f64 {
        let g = &self.g;
        let lam = &self.haar.lambda;
        let step = |t: [usize; 3], from: usize, by: usize| -> ([usize; 3], f64) {
            let mut out = t;
            out[from] = g.mul(t[by], t[from]);
            (out, (lam[out[from]] / lam[t[from]]).sqrt())
        };
        let mut res: f64 = 0.0;
        for a in 0..g.len() {
            for &b in g.range_fiber(g.s(a)) {
                for &cc in g.range_fiber(g.s(b)) {
                    let t = [a, b, cc];
                    let (l1, f1) = step(t, 1, 0);
                    let (l2, f2) = step(l1, 2, 1);
                    let (r1, e1) = step(t, 2, 1);
                    let (r2, e2) = step(r1, 2, 0);
                    let (r3, e3) = step(r2, 1, 0);
                    if l2 != r3 {
                        return f64::INFINITY;
                    }
                    res = res.max((f1 * f2 - e1 * e2 * e3).abs());
                }
            }
        }
        res
    }

    /// `Γ_G(f)(x,y) = f(xy)` on `G²_{s,r}`, in the order of `sr`.
    pub fn gamma(&self, f: &[C64]) -> Vec<C64> {
        self.sr.tuples.iter().map(|t| f[self.g.mul(t[0], t[1])]).collect()
    }

    /// `T_G(f)(g) = Σ_{x ∈ G^{r(g)}} f(x)λ^{r(g)}(x)`.
    pub fn t_left(&self, f: &[C64]) -> Vec<C64> {
        let g = &self.g;
        (0..g.len()).map(|x| g.range_fiber(g.r(x)).iter().map(|&y| f[y] * self.haar.lambda[y]).sum()).collect()
    }

    /// `T⁻¹_G(f)(g) = Σ_{s(y) = s(g)} f(y)λ^{s(g)}(y⁻¹)`.
    pub fn t_right(&self, f: &[C64]) -> Vec<C64> {
        let g = &self.g;
        (0..g.len()).map(|x| g.source_fiber(g.s(x)).iter().map(|&y| f[y] * self.haar.lambda[g.inv(y)]).sum()).collect()
    }

    /// `λ(f)h(x) = Σ_{k ∈ G^{r(x)}} f(k)h(k⁻¹x)λ^{r(x)}(k)`.
    pub fn lambda(&self, f: &[C64]) -> Mat {
        let g = &self.g;
        let mut m = Mat::from_element(g.len(), g.len(), ZERO);
        for x in 0..g.len() {
            for &k in g.range_fiber(g.r(x)) {
                m[(x, g.mul(g.inv(k), x))] += f[k] * self.haar.lambda[k];
            }
        }
        m
    }

    /// `ρ(h)ξ(x) = Σ_{k ∈ G^{s(x)}} h(k)ξ(xk)λ^{s(x)}(k)`.
    pub fn rho(&self, h: &[C64]) -> Mat {
        let g = &self.g;
        let mut m = Mat::from_element(g.len(), g.len(), ZERO);
        for x in 0..g.len() {
            for &k in g.range_fiber(g.s(x)) {
                m[(x, g.mul(x, k))] += h[k] * self.haar.lambda[k];
            }
        }
        m
    }

    /// `Γ̂_G(λ(f))ξ(x,y) = Σ_{k ∈ G^{r(x)}} f(k)ξ(k⁻¹x,k⁻¹y)λ^{r(x)}(k)` on `G²_{r,r}`.
    pub fn gamma_hat(&self, f: &[C64]) -> Mat {
        let g = &self.g;
        let n = self.rr.len();
        let mut m = Mat::from_element(n, n, ZERO);
        for (row, t) in self.rr.tuples.iter().enumerate() {
            for &k in g.range_fiber(g.r(t[0])) {
                let ki = g.inv(k);
                let col = self.rr.index_of(&[g.mul(ki, t[0]), g.mul(ki, t[1])]).expect("translates stay in G²_{r,r}");
                m[(row, col)] += f[k] * self.haar.lambda[k];
            }
        }
        m
    }

    /// `T̂_G(λ(f)) = r_G(f|G⁰)`, as a function on `G`.
    pub fn t_hat(&self, f: &[C64]) -> Vec<C64> {
        let g = &self.g;
        (0..g.len()).map(|x| f[g.unit(g.r(x))]).collect()
    }
}
