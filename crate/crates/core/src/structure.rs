//! Structure theorems for the two example families: a group matched pair acting on a set,
//! and the pair groupoid of a product `X1 × X2`.

use crate::crossed::{a_op, indicator, rho_op};
use crate::error::{Error, Result};
use crate::examples::{gen_product_pair_groupoid, gen_transformation_matched_pair, GroupMatchedPair, ProductSpace};
use crate::hilbert::{Monomial, TupleSpace};
use crate::linalg::{c, commutator, dist, inner, span_basis, span_residual, Mat, C64, ONE, ZERO};
use crate::matched_pair::{validate_matched_pair, MatchedPair};
use crate::quantum::{HaarSide, QuantumGroupoid};
use crate::report::{Check, StageReport};

fn max_over(it: impl IntoIterator<Item = f64>) -> f64 {
    it.into_iter().fold(0.0, f64::max)
}

/// Two-sided span equality residual and the two dimensions.
fn span_equality(a: &[Mat], b: &[Mat], tol: f64) -> (f64, usize, usize) {
    let (ba, bb) = (span_basis(a, tol), span_basis(b, tol));
    let res = max_over(a.iter().map(|m| span_residual(&bb, m)).chain(b.iter().map(|m| span_residual(&ba, m))));
    (res, ba.len(), bb.len())
}

/// `dim {x ∈ span(basis) : [x, b] = 0 ∀b}`: singular values of the commutator map below
/// `tol` relative to the largest.
fn center_dim(basis: &[Mat], tol: f64) -> usize {
    let comms: Vec<Vec<Mat>> = basis.iter().map(|bk| basis.iter().map(|bj| commutator(bk, bj)).collect()).collect();
    let d = basis.len();
    let gram = Mat::from_fn(d, d, |k, l| comms[k].iter().zip(&comms[l]).map(|(a, b)| inner(a, b)).sum());
    let eig = gram.symmetric_eigen();
    let top = eig.eigenvalues.iter().fold(1.0f64, |m, &v| m.max(v));
    eig.eigenvalues.iter().filter(|&&v| v <= tol * tol * top).count()
}

/// Group-level data of `X × G` with morphism indices.
struct GroupCoords<'a> {
    gmp: &'a GroupMatchedPair,
    /// `mor[x * |G| + g]`.
    mor: Vec<usize>,
    /// `g = p1(g)p2(g)` with `p1 ∈ G1`, `p2 ∈ G2`.
    p1: Vec<usize>,
    p2: Vec<usize>,
    /// `g = q2(g)q1(g)` with `q2 ∈ G2`, `q1 ∈ G1`.
    q1: Vec<usize>,
    q2: Vec<usize>,
}

impl<'a> GroupCoords<'a> {
    fn new(gmp: &'a GroupMatchedPair, mp: &MatchedPair) -> Result<Self> {
        let gr = &gmp.group;
        let n = gr.len();
        let mut mor = Vec::with_capacity(gmp.points.len() * n);
        for x in 0..gmp.points.len() {
            for g in 0..n {
                let name = gmp.morphism_name(x, g);
                mor.push(mp.g.morph_id(&name).ok_or(Error::UnknownId(name))?);
            }
        }
        let (mut p1, mut p2, mut q1, mut q2) = (vec![0; n], vec![0; n], vec![0; n], vec![0; n]);
        for &a in &gmp.g1 {
            for &b in &gmp.g2 {
                let (ab, ba) = (gr.mul(a, b), gr.mul(b, a));
                (p1[ab], p2[ab]) = (a, b);
                (q2[ba], q1[ba]) = (b, a);
            }
        }
        Ok(GroupCoords { gmp, mor, p1, p2, q1, q2 })
    }

    fn m(&self, x: usize, g: usize) -> usize {
        self.mor[x * self.gmp.group.len() + g]
    }

    fn act(&self, x: usize, g: usize) -> usize {
        self.gmp.act[x][g]
    }
}

/// Checks on `X × G` for a group matched pair `G = G1G2` acting on `X`:
/// i) `Ad(θ)∘𝔞 = 𝔞̃`, ii) span equality with `L∞(X×G2) ⋊ G1` built directly, iii) the two
/// coproduct formulas, iv) both `T` formulas.
pub fn verify_group_action_case(gmp: &GroupMatchedPair, tol: f64) -> Result<StageReport> {
    let mp = validate_matched_pair(&gen_transformation_matched_pair(gmp)?, tol)?;
    let qg = QuantumGroupoid::new(&mp)?;
    let co = GroupCoords::new(gmp, &mp)?;
    let grp = &gmp.group;
    let (nx, ng) = (gmp.points.len(), grp.len());
    let mut st = StageReport::new("group_action_case");
    let n = mp.g.len();

    // L²(X × G2 × G1, ν × dg2 × dg1) and θ = (relabeling)∘U.
    let triples: Vec<Vec<usize>> =
        (0..nx).flat_map(|x| gmp.g2.iter().flat_map(move |&b| gmp.g1.iter().map(move |&a| vec![x, b, a]))).collect();
    let tw = triples.iter().map(|t| gmp.nu[t[0]]).collect();
    let trip = TupleSpace::new(triples, tw);
    let xg: Vec<(usize, usize)> = {
        let mut v = vec![(0, 0); n];
        for x in 0..nx {
            for g in 0..ng {
                v[co.m(x, g)] = (x, g);
            }
        }
        v
    };
    let theta = Monomial::from_point_map(
        &qg.single,
        &trip,
        |t| {
            let (x, g) = xg[t[0]];
            vec![x, co.q2[g], co.q1[g]]
        },
        |t| {
            let (x, g) = xg[t[0]];
            let g1 = co.m(co.act(x, co.q2[g]), co.q1[g]);
            c((mp.delta()[g1] / mp.md1.delta[g1]).sqrt())
        },
    )?;
    st.checks.push(Check::new("group.theta_unitary", "θ: L²(G) → L²(X×G2×G1) is unitary", theta.unitarity_residual(), tol));

    let tilde = |f: &[C64]| {
        trip.multiplication(|t| {
            let ba = grp.mul(t[1], t[2]);
            f[co.m(co.act(t[0], co.p1[ba]), co.p2[ba])]
        })
    };
    let g2_ind: Vec<Vec<C64>> = mp.g2_arrows().into_iter().map(|k| indicator(n, k)).collect();
    let res_i = max_over(g2_ind.iter().map(|f| dist(&theta.conj_inv(&a_op(&mp, f)), &tilde(f))));
    st.checks.push(Check::new("group.action_identification", "Ad(θ)∘𝔞 = 𝔞̃", res_i, tol));

    // ii) L∞(X×G2) ⋊ G1 on the triple space: 𝔞̃(φ)(1⊗ρ₁(k)).
    let rho1 = |a0: usize| {
        let mut m = Mat::zeros(trip.len(), trip.len());
        for (i, t) in trip.tuples.iter().enumerate() {
            let j = trip.index_of(&[t[0], t[1], grp.mul(t[2], a0)]).expect("G1 closed");
            m[(i, j)] = ONE;
        }
        m
    };
    let direct: Vec<Mat> = g2_ind.iter().flat_map(|f| gmp.g1.iter().map(|&a0| tilde(f) * rho1(a0)).collect::<Vec<_>>()).collect();
    let image: Vec<Mat> = qg.carrier.basis.iter().map(|b| theta.conj_inv(b)).collect();
    let (res_ii, d_direct, d_image) = span_equality(&direct, &image, 1e-10);
    st.checks.push(Check::new("group.crossed_product_span", "θ M θ* = L∞(X×G2) ⋊ G1", res_ii, tol));
    st.checks.push(Check::flag(
        "group.crossed_product_dim",
        "dim = |X|·|G2|·|G1|",
        d_direct == d_image && d_direct == nx * gmp.g1.len() * gmp.g2.len(),
    ));

    // iii) Σ: L²(G²_{s,m}) → L²(X×G×G), ((x,g),(x·g·p1(g')⁻¹, g')) ↦ (x, g, g').
    let sm = &qg.pmu.sm;
    let quads: Vec<Vec<usize>> = sm
        .tuples
        .iter()
        .map(|t| {
            let ((x, g), (_, g2)) = (xg[t[0]], xg[t[1]]);
            vec![x, g, g2]
        })
        .collect();
    let qw = quads.iter().map(|t| gmp.nu[t[0]]).collect();
    let quad = TupleSpace::new(quads, qw);
    let sigma = Monomial::from_point_map(
        sm,
        &quad,
        |t| {
            let ((x, g), (_, g2)) = (xg[t[0]], xg[t[1]]);
            vec![x, g, g2]
        },
        |t| {
            // μ²_{s,m} = ν(x)ν(y)/ν(x·g) against ν(x): the ratio is 1 when ν is invariant
            let ((x, g), (y, _)) = (xg[t[0]], xg[t[1]]);
            c((gmp.nu[y] / gmp.nu[co.act(x, g)]).sqrt())
        },
    )?;
    st.checks.push(Check::new("group.sigma_unitary", "Σ: L²(G²_{s,m}) → L²(X×G×G) is unitary", sigma.unitarity_residual(), tol));

    let res_a = max_over(
        g2_ind
            .iter()
            .map(|f| -> Result<f64> {
                let lhs = sigma.conj_inv(&qg.coproduct(&a_op(&mp, f))?);
                let rhs = quad.multiplication(|t| {
                    let (x, g, g2) = (t[0], t[1], t[2]);
                    f[co.m(co.act(x, co.p1[g]), grp.mul(co.p2[g], co.p2[g2]))]
                });
                Ok(dist(&lhs, &rhs))
            })
            .collect::<Result<Vec<f64>>>()?,
    );
    st.checks.push(Check::new("group.gamma_a", "Γ(𝔞(f))(x,g,g') = f(x·p1(g), p2(g)p2(g'))", res_a, tol));

    // Γ(1⊗ρ(h⊗k)) = M(h)(1⊗Γ₁(1⊗ρ₁(k))); the density of W at p1(p2(g')g1) cancels against
    // the coefficient of Σ.
    let gamma_rho = |h: &[C64], k: &[C64]| {
        let mut kern = Mat::zeros(quad.len(), quad.len());
        for (i, t) in quad.tuples.iter().enumerate() {
            let (x, g, g2) = (t[0], t[1], t[2]);
            let mult = h[co.act(x, grp.mul(g, co.p2[g2]))];
            for &a in &gmp.g1 {
                let b = co.p1[grp.mul(co.p2[g2], a)];
                let j = quad.index_of(&[x, grp.mul(g, b), grp.mul(g2, a)]).expect("translated pair in G²_{s,m}");
                kern[(i, j)] += mult * k[a];
            }
        }
        quad.to_ortho(&kern)
    };
    let mut res_rho: f64 = 0.0;
    let mut hs: Vec<Vec<C64>> = (0..nx).map(|x| indicator(nx, x)).collect();
    hs.push(vec![ONE; nx]);
    for h in &hs {
        for &a0 in &gmp.g1 {
            let k = indicator(ng, a0);
            let kernel: Vec<C64> = (0..n)
                .map(|m| {
                    if mp.in1[m] {
                        let (x, a) = xg[m];
                        h[x] * k[a]
                    } else {
                        ZERO
                    }
                })
                .collect();
            let lhs = sigma.conj_inv(&qg.coproduct(&rho_op(&mp, &kernel))?);
            res_rho = res_rho.max(dist(&lhs, &gamma_rho(h, &k)));
        }
    }
    st.checks.push(Check::new("group.gamma_rho", "Γ(1⊗ρ(h⊗k)) = M(h)(1⊗Γ₁(1⊗ρ₁(k)))", res_rho, tol));

    // iv) T_L, T_R in transformation coordinates.
    let (mut res_tl, mut res_tr): (f64, f64) = (0.0, 0.0);
    let e = grp.identity();
    for f in &g2_ind {
        for x0 in 0..nx {
            for &a0 in &gmp.g1 {
                let h = indicator(n, co.m(x0, a0));
                let op = a_op(&mp, f) * rho_op(&mp, &h);
                let tl = qg.operator_weight(&op, HaarSide::Left, 1e-8)?;
                let tr = qg.operator_weight(&op, HaarSide::Right, 1e-8)?;
                for x in 0..nx {
                    for g in 0..ng {
                        let y = co.act(x, co.p1[g]);
                        let want_l: C64 = gmp.g2.iter().map(|&b| f[co.m(y, b)] * h[co.m(co.act(y, b), e)]).sum();
                        let z = co.act(x, g);
                        let want_r: C64 = gmp.g2.iter().map(|&b| f[co.m(co.act(z, b), grp.inv(b))] * h[co.m(z, e)]).sum();
                        res_tl = res_tl.max((tl[co.m(x, g)] - want_l).norm());
                        res_tr = res_tr.max((tr[co.m(x, g)] - want_r).norm());
                    }
                }
            }
        }
    }
    st.checks.push(Check::new("group.t_left", "T_L(𝔞(f)(1⊗ρ(h)))(x,g) = Σ f(x·p1(g), g2) h(x·p1(g)g2, e)", res_tl, tol));
    st.checks.push(Check::new("group.t_right", "T_R(𝔞(f)(1⊗ρ(h)))(x,g) = Σ f(x·g·g2, g2⁻¹) h(x·g, e)", res_tr, tol));
    // Same von Neumann algebra, different bases: L∞(X) here, L∞(X×G2) for the transformation groupoid (X×G2)×G1.
    st.diagnostics.push(Check::new("group.base_dim", "dim L∞(X)", nx as f64, f64::INFINITY));
    st.diagnostics.push(Check::new("group.transformation_base_dim", "dim L∞(X×G2)", (nx * gmp.g2.len()) as f64, f64::INFINITY));
    Ok(st)
}

/// Coordinates `(x1, x2, y1, y2)` of the pair groupoid on `X1 × X2`.
struct ProductCoords {
    n1: usize,
    n2: usize,
    of: Vec<[usize; 4]>,
}

impl ProductCoords {
    fn new(ps: &ProductSpace, mp: &MatchedPair) -> Result<Self> {
        let (n1, n2) = (ps.x1.len(), ps.x2.len());
        let mut of = vec![[0; 4]; mp.g.len()];
        for x1 in 0..n1 {
            for x2 in 0..n2 {
                for y1 in 0..n1 {
                    for y2 in 0..n2 {
                        let name = format!("{}{}>{}{}", ps.x1[x1], ps.x2[x2], ps.x1[y1], ps.x2[y2]);
                        of[mp.g.morph_id(&name).ok_or(Error::UnknownId(name))?] = [x1, x2, y1, y2];
                    }
                }
            }
        }
        Ok(ProductCoords { n1, n2, of })
    }
}

/// Checks on the pair groupoid of `X1 × X2`: i) `θ∘𝔞 = 𝔞̃`, ii) `θ(M) = L∞(X2²)⊗1⊗ℬ(L²(X1))`
/// with its center, iii) `(θ⋆θ)Γθ* = Ad τ(Γ_{X2²} ⊗ Γ̂'_{X1²})`, iv) `θT_Lθ* = T ⊗ T̂'` and
/// `θT_Rθ* = T⁻¹ ⊗ T̂'`.
pub fn verify_product_case(ps: &ProductSpace, tol: f64) -> Result<StageReport> {
    let mp = validate_matched_pair(&gen_product_pair_groupoid(ps), tol)?;
    let qg = QuantumGroupoid::new(&mp)?;
    let co = ProductCoords::new(ps, &mp)?;
    let (n1, n2) = (co.n1, co.n2);
    let (nu1, nu2) = (&ps.nu1, &ps.nu2);
    let n = mp.g.len();
    let mut st = StageReport::new("product_case");

    // L²(X2 × X2 × X1 × X1) with coordinates (x2, y2, x1, y1).
    let mut quads = Vec::new();
    for x2 in 0..n2 {
        for y2 in 0..n2 {
            for x1 in 0..n1 {
                for y1 in 0..n1 {
                    quads.push(vec![x2, y2, x1, y1]);
                }
            }
        }
    }
    let qw = quads.iter().map(|t| nu2[t[0]] * nu2[t[1]] * nu1[t[2]] * nu1[t[3]]).collect();
    let quad = TupleSpace::new(quads, qw);
    let theta = Monomial::from_point_map(
        &qg.single,
        &quad,
        |t| {
            let [x1, x2, y1, y2] = co.of[t[0]];
            vec![x2, y2, x1, y1]
        },
        |_| ONE,
    )?;
    st.checks.push(Check::new(
        "product.theta_unitary",
        "θ = Σ'Σ composed with L²(G) ≅ L²(G2 ⋆ G1) is unitary",
        theta.unitarity_residual(),
        tol,
    ));

    // i) 𝔞(f) ↦ multiplication by f(x2, y2, y1).
    let res_i = max_over(mp.g2_arrows().into_iter().map(|k| {
        let [x1, x2, _, y2] = co.of[k];
        let want = quad.multiplication(|t| if (t[0], t[1], t[3]) == (x2, y2, x1) { ONE } else { ZERO });
        dist(&theta.conj_inv(&a_op(&mp, &indicator(n, k))), &want)
    }));
    st.checks.push(Check::new("product.action_identification", "θ(𝔞(f₂⊗g₂⊗f₁)) = f₂⊗g₂⊗1⊗f₁", res_i, tol));

    // ii) B_{a,b,c,d} = δ_{(a,b)} ⊗ 1 ⊗ e_{cd}, orthonormal matrix units.
    let unit_op = |a: usize, b: usize, cc: usize, d: usize| {
        let mut m = Mat::zeros(quad.len(), quad.len());
        for x1 in 0..n1 {
            let i = quad.index_of(&[a, b, x1, cc]).expect("in range");
            let j = quad.index_of(&[a, b, x1, d]).expect("in range");
            m[(i, j)] = ONE;
        }
        m
    };
    let mut labels = Vec::new();
    for a in 0..n2 {
        for b in 0..n2 {
            for cc in 0..n1 {
                for d in 0..n1 {
                    labels.push((a, b, cc, d));
                }
            }
        }
    }
    let target: Vec<Mat> = labels.iter().map(|&(a, b, cc, d)| unit_op(a, b, cc, d)).collect();
    let image: Vec<Mat> = qg.carrier.basis.iter().map(|b| theta.conj_inv(b)).collect();
    let (res_ii, d_target, d_image) = span_equality(&target, &image, 1e-10);
    st.checks.push(Check::new("product.carrier_span", "θ(M) = L∞(X2²)⊗1⊗ℬ(L²(X1))", res_ii, tol));
    st.checks.push(Check::flag(
        "product.carrier_dim",
        "dim θ(M) = |X2|²·|X1|²",
        d_target == d_image && d_image == n2 * n2 * n1 * n1,
    ));
    let center = center_dim(&qg.carrier.basis, 1e-6);
    st.checks.push(Check::flag("product.center_dim", "center of M ≅ L∞(X2²)", center == n2 * n2));
    st.diagnostics.push(Check::new("product.dims", "dim M", d_image as f64, f64::INFINITY));
    st.diagnostics.push(Check::new("product.center", "dim Z(M)", center as f64, f64::INFINITY));

    // iii) Π: G²_{s,m} → X2 × X2 × X1 × X2 × X1 × X1, Ψ(ξ¹⊗ξ²)(x2,y2,x1,z2,y1,z1) = ξ¹(x2,y2,x1,y1)ξ²(y2,z2,z1,y1).
    let sm = &qg.pmu.sm;
    let six_of = |t: &[usize]| {
        let ([x1, x2, y1, y2], [u1, u2, v1, v2]) = (co.of[t[0]], co.of[t[1]]);
        debug_assert_eq!((u2, v1), (y2, y1));
        let _ = (u2, v1);
        vec![x2, y2, x1, v2, y1, u1]
    };
    let sixes: Vec<Vec<usize>> = sm.tuples.iter().map(|t| six_of(t)).collect();
    let sw = sixes.iter().map(|t| nu2[t[0]] * nu2[t[1]] * nu1[t[2]] * nu2[t[3]] * nu1[t[4]] * nu1[t[5]]).collect();
    let six = TupleSpace::new(sixes, sw);
    let pi = Monomial::from_point_map(sm, &six, |t| six_of(t), |_| ONE)?;
    st.checks.push(Check::new("product.pi_unitary", "(θ⋆θ) followed by Ψ is unitary", pi.unitarity_residual(), tol));
    let mut res_iii: f64 = 0.0;
    for (&(a, b, cc, d), op) in labels.iter().zip(&target) {
        let lhs = pi.conj_inv(&qg.coproduct(&theta.conj(op))?);
        // τ(Γ_{X2²}(δ_{ab}) ⊗ Γ̂'(1⊗e_cd)): x2 = a, z2 = b, e_cd on y1.
        let mut rhs = Mat::zeros(six.len(), six.len());
        for (i, t) in six.tuples.iter().enumerate() {
            if t[0] == a && t[3] == b && t[4] == cc {
                let j = six.index_of(&[t[0], t[1], t[2], t[3], d, t[5]]).expect("in range");
                rhs[(i, j)] = ONE;
            }
        }
        res_iii = res_iii.max(dist(&lhs, &rhs));
    }
    st.checks.push(Check::new("product.coproduct", "(θ⋆θ)Γθ* = Ad τ(Γ_{X2²} ⊗ Γ̂'_{X1²})", res_iii, tol));

    // iv) θT_Lθ*(δ_{ab}⊗1⊗e_cd) = (Σ_z δ_{ab}(x2,z)ν2(z))·ψ(y1,y1), ψ the kernel of e_cd.
    let (mut res_tl, mut res_tr): (f64, f64) = (0.0, 0.0);
    for (&(a, b, cc, d), op) in labels.iter().zip(&target) {
        let x = theta.conj(op);
        let tl = qg.operator_weight(&x, HaarSide::Left, 1e-8)?;
        let tr = qg.operator_weight(&x, HaarSide::Right, 1e-8)?;
        for y in 0..n {
            let [_, x2, y1, y2] = co.of[y];
            let psi = if cc == d && d == y1 { 1.0 / nu1[cc] } else { 0.0 };
            let want_l = if x2 == a { nu2[b] * psi } else { 0.0 };
            let want_r = if y2 == b { nu2[a] * psi } else { 0.0 };
            res_tl = res_tl.max((tl[y] - c(want_l)).norm());
            res_tr = res_tr.max((tr[y] - c(want_r)).norm());
        }
    }
    st.checks.push(Check::new("product.t_left", "θT_Lθ* = T_{X2²} ⊗ T̂'_{X1²}", res_tl, tol));
    st.checks.push(Check::new("product.t_right", "θT_Rθ* = T⁻¹_{X2²} ⊗ T̂'_{X1²}", res_tr, tol));
    Ok(st)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn s3_on_three_points() {
        let st = verify_group_action_case(&GroupMatchedPair::s3(3, None).unwrap(), 1e-9).unwrap();
        assert!(st.pass(), "{st:?}");
        assert!(st.checks.iter().all(|c| c.residual < 1e-12));
        let diag = |name: &str| st.diagnostics.iter().find(|c| c.name == name).unwrap().residual;
        assert_eq!((diag("group.base_dim"), diag("group.transformation_base_dim")), (3.0, 9.0));
    }

    #[test]
    fn s3_with_weighted_points() {
        let st = verify_group_action_case(&GroupMatchedPair::s3(3, Some(vec![1.0, 2.0, 5.0])).unwrap(), 1e-9).unwrap();
        assert!(st.pass(), "{st:?}");
    }

    #[test]
    fn product_two_by_two() {
        let st = verify_product_case(&ProductSpace::letters(2, 2).unwrap(), 1e-9).unwrap();
        assert!(st.pass(), "{st:?}");
        assert_eq!(st.diagnostics[0].residual, 16.0);
        assert_eq!(st.diagnostics[1].residual, 4.0);
    }

    #[test]
    fn product_weighted_and_degenerate() {
        let mut ps = ProductSpace::letters(2, 3).unwrap();
        ps.nu1 = vec![1.0, 3.0];
        ps.nu2 = vec![2.0, 0.5, 1.0];
        let st = verify_product_case(&ps, 1e-9).unwrap();
        assert!(st.pass(), "{st:?}");
        // |X1| = 1: the algebra is L∞(X2²)
        let st = verify_product_case(&ProductSpace::letters(1, 2).unwrap(), 1e-9).unwrap();
        assert!(st.pass(), "{st:?}");
        assert_eq!(st.diagnostics[0].residual, 4.0);
        assert_eq!(st.diagnostics[1].residual, 4.0);
    }
}
