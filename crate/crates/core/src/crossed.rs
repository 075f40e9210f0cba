//! The crossed product `L∞(G2) ⋊ G1` on `L²(G, μ)`: the representation `ℛ` of kernels on
//! `G2 ×_{s,r} G1`, the generators `𝔞(f)`, `1⊗ρ(h)`, the carrier span and the unitary onto
//! the kernel space.

use crate::error::{Error, Result};
use crate::hilbert::{single_space, Monomial, TupleSpace};
use crate::linalg::{c, diag, inner, pseudo_solve, span_basis, span_residual, Mat, Vector, C64, ZERO};
use crate::matched_pair::{kernel_pairs, MatchedPair};

/// `ℛ(F)ξ(g) = Σ_{g₁∈G1^{s(g)}} F(p2(g), g₁) δ(g₁)^{-1/2} ξ(g g₁) λ₁(g₁)`, orthonormal.
pub fn rep(mp: &MatchedPair, f: impl Fn(usize, usize) -> C64) -> Mat {
    let gr = &mp.g;
    let n = gr.len();
    let mut k = Mat::zeros(n, n);
    for g in 0..n {
        for &g1 in gr.range_fiber(gr.s(g)) {
            if mp.in1[g1] {
                let v = f(mp.p2[g], g1);
                if v != ZERO {
                    k[(g, gr.mul(g, g1))] += v * c(mp.delta()[g1].powf(-0.5) * mp.lambda1[g1]);
                }
            }
        }
    }
    single_space(mp).to_ortho(&k)
}

/// `𝔞(f)`: multiplication by `f(p2(g))`; `f` indexed by morphisms of `G`.
pub fn a_op(mp: &MatchedPair, f: &[C64]) -> Mat {
    let d: Vec<C64> = (0..mp.g.len()).map(|g| f[mp.p2[g]]).collect();
    diag(&d)
}

/// `(1⊗ρ(h))ξ(g) = Σ_{g₁∈G1^{s(g)}} h(g₁) ξ(g g₁) λ₁(g₁)`.
pub fn rho_op(mp: &MatchedPair, h: &[C64]) -> Mat {
    let gr = &mp.g;
    let n = gr.len();
    let mut k = Mat::zeros(n, n);
    for g in 0..n {
        for &g1 in gr.range_fiber(gr.s(g)) {
            if mp.in1[g1] && h[g1] != ZERO {
                k[(g, gr.mul(g, g1))] += h[g1] * c(mp.lambda1[g1]);
            }
        }
    }
    single_space(mp).to_ortho(&k)
}

/// Base representations on `L²(G)` as multiplication operators by `n(map(g))`.
pub fn base_op(mp: &MatchedPair, map: crate::hilbert::LegMap, n: &[C64]) -> Mat {
    let d: Vec<C64> = (0..mp.g.len()).map(|g| n[map.apply(mp, g)]).collect();
    diag(&d)
}

/// Point indicator on morphisms (or units).
pub fn indicator(len: usize, k: usize) -> Vec<C64> {
    let mut v = vec![ZERO; len];
    v[k] = c(1.0);
    v
}

pub struct Carrier {
    pub pairs: Vec<(usize, usize)>,
    /// `ℛ(δ_{(g₂,g₁)})` per kernel pair.
    pub ops: Vec<Mat>,
    /// Orthonormal basis of the span.
    pub basis: Vec<Mat>,
    gram: Mat,
}

pub const SPAN_TOL: f64 = 1e-10;

pub fn carrier(mp: &MatchedPair) -> Carrier {
    let pairs = kernel_pairs(mp);
    let ops: Vec<Mat> = pairs.iter().map(|&(a, b)| rep(mp, |x, y| if (x, y) == (a, b) { c(1.0) } else { ZERO })).collect();
    let basis = span_basis(&ops, SPAN_TOL);
    let gram = Mat::from_fn(ops.len(), ops.len(), |i, j| inner(&ops[i], &ops[j]));
    Carrier { pairs, ops, basis, gram }
}

impl Carrier {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn residual(&self, x: &Mat) -> f64 {
        span_residual(&self.basis, x)
    }

    /// Largest span residual of `ab` and `a*` over the spanning operators.
    pub fn closure_residual(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for a in &self.ops {
            worst = worst.max(self.residual(&a.adjoint()));
            for b in &self.ops {
                worst = worst.max(self.residual(&crate::linalg::spmul(a, b)));
            }
        }
        worst
    }

    /// Kernel `F` with `ℛ(F) = x`, as coefficients per kernel pair.
    pub fn kernel_of(&self, x: &Mat, tol: f64) -> Result<Vec<C64>> {
        let rhs = Vector::from_iterator(self.ops.len(), self.ops.iter().map(|a| inner(a, x)));
        let coef = pseudo_solve(&self.gram, &rhs);
        let fit = self.ops.iter().zip(coef.iter()).fold(x.clone(), |acc, (a, &k)| acc - a * k);
        let res = fit.norm();
        if res > tol {
            return Err(Error::NotInCarrier(res));
        }
        Ok(coef.iter().copied().collect())
    }
}

/// Kernel space `G2 ×_{s,r} G1` with weight `μ₂(g₂)λ₁(g₁)`.
pub fn kernel_space(mp: &MatchedPair) -> TupleSpace {
    let pairs = kernel_pairs(mp);
    let weights = pairs.iter().map(|&(a, b)| mp.md2.mu[a] * mp.lambda1[b]).collect();
    TupleSpace::new(pairs.iter().map(|&(a, b)| vec![a, b]).collect(), weights)
}

/// `Uξ(g₂,g₁) = (δ/δ₁)^{1/2}(g₁) ξ(g₂g₁)` from `L²(G)` onto the kernel space.
pub fn iso_u(mp: &MatchedPair) -> Result<(TupleSpace, Monomial)> {
    let k = kernel_space(mp);
    let single = single_space(mp);
    let u = Monomial::from_point_map(
        &single,
        &k,
        |t| {
            let (g2, g1) = mp.cofactorize(t[0]);
            vec![g2, g1]
        },
        |t| {
            let g1 = mp.cofactorize(t[0]).1;
            c((mp.delta()[g1] / mp.md1.delta[g1]).sqrt())
        },
    )?;
    Ok((k, u))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::examples::{e1_desc, e2_desc, e3_desc};
    use crate::linalg::dist;
    use crate::matched_pair::validate_matched_pair;

    #[test]
    fn carrier_dimensions_and_closure() {
        for (d, dim) in [(e1_desc(), 6), (e2_desc(), 16), (e3_desc(Some(vec![1.0, 2.0, 5.0])), 18)] {
            let mp = validate_matched_pair(&d, 1e-12).unwrap();
            let car = carrier(&mp);
            assert_eq!(car.dim(), dim);
            assert!(car.closure_residual() < 1e-9);
        }
    }

    #[test]
    fn generators_factor_the_representation() {
        let mp = validate_matched_pair(&e3_desc(Some(vec![1.0, 2.0, 5.0])), 1e-12).unwrap();
        let n = mp.g.len();
        let (g2, g1) = (mp.g2_arrows()[3], mp.g1_arrows()[4]);
        let f = indicator(n, g2);
        let h = indicator(n, g1);
        let prod = a_op(&mp, &f) * rho_op(&mp, &h);
        let want = rep(&mp, |x, y| if (x, y) == (g2, g1) { c(mp.delta()[g1].sqrt()) } else { ZERO });
        assert!(dist(&prod, &want) < 1e-12);
    }

    #[test]
    fn u_is_unitary() {
        for d in [e1_desc(), e2_desc(), e3_desc(Some(vec![1.0, 2.0, 5.0]))] {
            let mp = validate_matched_pair(&d, 1e-12).unwrap();
            let (_, u) = iso_u(&mp).unwrap();
            assert!(u.unitarity_residual() < 1e-12);
        }
    }

    #[test]
    fn non_carrier_operator_rejected() {
        let mp = validate_matched_pair(&e1_desc(), 1e-12).unwrap();
        let car = carrier(&mp);
        let x = crate::linalg::unit_matrix(6, 0, 1);
        let inside = car.ops[2].clone();
        assert!(car.kernel_of(&inside, 1e-9).is_ok());
        // every spanning operator has two nonzero entries, a matrix unit has one
        assert!(matches!(car.kernel_of(&x, 1e-9), Err(Error::NotInCarrier(_))));
    }
}
