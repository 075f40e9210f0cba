//! The pseudo-multiplicative unitary `W : L²(G²_{s,m}) → L²(G²_{m,r})`, its density,
//! its axioms and its legs.

use crate::classical::{classical_qg, ClassicalQG};
use crate::crossed::{carrier, indicator, rep, Carrier};
use crate::error::{Error, Result};
use crate::hilbert::{amplify_monomial, creation, link, pair_space, tuple_space, LegMap, Monomial, TupleSpace};
use crate::linalg::{c, dist, span_basis, Mat, C64, ONE, ZERO};
use crate::matched_pair::MatchedPair;
use crate::report::Check;

pub struct Pmu {
    pub sm: TupleSpace,
    pub mr: TupleSpace,
    /// Orthonormal form, columns indexed by `sm`, rows by `mr`.
    pub w: Monomial,
    /// `D(x,y) = w_{s,m}(θ(x,y)) / w_{m,r}(x,y)`, per `mr` point.
    pub density: Vec<f64>,
    /// `θ` as `mr` index → `sm` index.
    pub theta: Vec<usize>,
}

/// `θ(x,y) = (x·p1(p2(x)⁻¹y), p2(x)⁻¹y)` on `{m(x) = r(y)}`.
pub fn theta_point(mp: &MatchedPair, x: usize, y: usize) -> (usize, usize) {
    let g = &mp.g;
    let b = g.mul(g.inv(mp.p2[x]), y);
    (g.mul(x, mp.p1[b]), b)
}

pub fn build_w(mp: &MatchedPair) -> Result<Pmu> {
    let sm = pair_space(mp, LegMap::S, LegMap::M);
    let mr = pair_space(mp, LegMap::M, LegMap::R);
    if sm.len() != mr.len() {
        return Err(Error::ThetaNotBijective(format!("|P_sm| = {} but |P_mr| = {}", sm.len(), mr.len())));
    }
    let mut theta = Vec::with_capacity(mr.len());
    let mut density = Vec::with_capacity(mr.len());
    let mut perm = vec![usize::MAX; sm.len()];
    let mut scal = vec![ZERO; sm.len()];
    for (row, t) in mr.tuples.iter().enumerate() {
        let (a, b) = theta_point(mp, t[0], t[1]);
        let k = sm
            .index_of(&[a, b])
            .ok_or_else(|| Error::ThetaNotBijective(format!("θ({}, {}) leaves P_sm", mp.g.name(t[0]), mp.g.name(t[1]))))?;
        if perm[k] != usize::MAX {
            return Err(Error::ThetaNotBijective(format!("({}, {}) hit twice", mp.g.name(a), mp.g.name(b))));
        }
        let d = sm.weights[k] / mr.weights[row];
        // natural coefficient D^{1/2}, orthonormal coefficient D^{1/2}·√(w_mr/w_sm)
        perm[k] = row;
        scal[k] = c(d.sqrt() * (mr.weights[row] / sm.weights[k]).sqrt());
        theta.push(k);
        density.push(d);
    }
    let w = Monomial { rows: mr.len(), perm, scal };
    Ok(Pmu { sm, mr, w, density, theta })
}

/// Entrywise distance between `W` of the pair (units, `G`) and the classical `W_G`, matching
/// `P_{s,m}` with `G²_{s,r}` and `P_{m,r}` with `G²_{r,r}` pointwise. Infinite when the
/// supports differ.
pub fn classical_residual(mp: &MatchedPair, pmu: &Pmu) -> f64 {
    let ClassicalQG { sr, rr, w: cl, .. } = classical_qg(&mp.g, &mp.haar);
    if sr.len() != pmu.sm.len() || rr.len() != pmu.mr.len() {
        return f64::INFINITY;
    }
    let mut res: f64 = 0.0;
    for (k, t) in sr.tuples.iter().enumerate() {
        let (Some(col), Some(row)) = (pmu.sm.index_of(t), pmu.mr.index_of(&rr.tuples[cl.perm[k]])) else {
            return f64::INFINITY;
        };
        if pmu.w.perm[col] != row {
            return f64::INFINITY;
        }
        res = res.max((pmu.w.scal[col] - cl.scal[k]).norm());
    }
    res
}

/// Pointwise comparison of `D` with `δ⁻¹(p1(p2(g)⁻¹g′))`, evaluated at the `(m,r)` point
/// (`mr`) or at its `θ`-image in `P_{s,m}` (`sm`, only where `p2(g)⁻¹g′` is defined).
#[derive(Debug, Clone)]
pub struct DensityCheck {
    pub residual_mr: f64,
    pub residual_sm: f64,
    pub sm_defined: usize,
    pub convention: Option<&'static str>,
}

pub fn density_closed_form(mp: &MatchedPair, pmu: &Pmu, tol: f64) -> DensityCheck {
    let g = &mp.g;
    let delta = mp.delta();
    let closed = |x: usize, y: usize| -> Option<f64> {
        let px = mp.p2[x];
        if g.r(px) != g.r(y) {
            return None;
        }
        Some(1.0 / delta[mp.p1[g.mul(g.inv(px), y)]])
    };
    let rel = |a: f64, b: f64| (a - b).abs() / a.abs().max(b.abs());
    let (mut residual_mr, mut residual_sm, mut sm_defined) = (0.0f64, 0.0f64, 0usize);
    for (row, t) in pmu.mr.tuples.iter().enumerate() {
        let d = pmu.density[row];
        if let Some(v) = closed(t[0], t[1]) {
            residual_mr = residual_mr.max(rel(d, v));
        } else {
            residual_mr = f64::INFINITY;
        }
        let s = &pmu.sm.tuples[pmu.theta[row]];
        if let Some(v) = closed(s[0], s[1]) {
            sm_defined += 1;
            residual_sm = residual_sm.max(rel(d, v));
        }
    }
    let convention = if residual_mr <= tol {
        Some("mr")
    } else if sm_defined == pmu.mr.len() && residual_sm <= tol {
        Some("sm")
    } else {
        None
    };
    DensityCheck { residual_mr, residual_sm, sm_defined, convention }
}

/// Max over units `n` of `‖W·n(dom) − n(tgt)·W‖` for diagonal base representations.
fn intertwining(pmu: &Pmu, dom: impl Fn(&[usize]) -> usize, tgt: impl Fn(&[usize]) -> usize) -> f64 {
    let mut worst: f64 = 0.0;
    for (k, t) in pmu.sm.tuples.iter().enumerate() {
        let row = pmu.w.perm[k];
        if dom(t) != tgt(&pmu.mr.tuples[row]) {
            // with indicator n of either unit the two sides differ by |W entry|
            worst = worst.max(pmu.w.scal[k].norm());
        }
    }
    worst
}

pub struct PentagonSpaces {
    pub t0: TupleSpace,
    pub t1: TupleSpace,
    pub t2: TupleSpace,
    pub t3: TupleSpace,
    pub t4: TupleSpace,
    pub t5: TupleSpace,
    pub t6: TupleSpace,
    pub t7: TupleSpace,
}

pub fn pentagon_spaces(mp: &MatchedPair) -> PentagonSpaces {
    use LegMap::*;
    PentagonSpaces {
        t0: tuple_space(mp, 3, &[link(0, S, 1, M), link(1, S, 2, M)]),
        t1: tuple_space(mp, 3, &[link(0, M, 1, R), link(1, S, 2, M)]),
        t2: tuple_space(mp, 3, &[link(0, M, 1, R), link(1, M, 2, R)]),
        t3: tuple_space(mp, 3, &[link(0, S, 2, M), link(1, M, 2, R)]),
        t4: tuple_space(mp, 3, &[link(0, S, 1, M), link(2, M, 1, R)]),
        t5: tuple_space(mp, 3, &[link(1, S, 2, M), link(0, M, 2, R)]),
        t6: tuple_space(mp, 3, &[link(0, M, 1, S), link(1, M, 2, R)]),
        t7: tuple_space(mp, 3, &[link(0, S, 1, M), link(0, M, 2, R)]),
    }
}

fn permute(src: &TupleSpace, dst: &TupleSpace, order: [usize; 3]) -> Result<Monomial> {
    Monomial::from_point_map(src, dst, |t| vec![t[order[0]], t[order[1]], t[order[2]]], |_| ONE)
}

/// Both sides of `(1⊗W)(W⊗1) = (W⊗1)(σ⊗1)(1⊗W)σ_{2ν}(1⊗σ)(1⊗W)` on the triple spaces.
pub fn pentagon_sides(mp: &MatchedPair, pmu: &Pmu) -> Result<(Monomial, Monomial)> {
    let sp = pentagon_spaces(mp);
    let (sm, mr, w) = (&pmu.sm, &pmu.mr, &pmu.w);
    let w12 = amplify_monomial(w, sm, mr, &sp.t0, &sp.t1, &[0, 1])?;
    let w23 = amplify_monomial(w, sm, mr, &sp.t1, &sp.t2, &[1, 2])?;
    let lhs = w23.compose(&w12);
    let step1 = amplify_monomial(w, sm, mr, &sp.t0, &sp.t3, &[1, 2])?;
    // (a,y,z) ↦ (a,z,y)
    let step2 = permute(&sp.t3, &sp.t4, [0, 2, 1])?;
    // (p,q,r) ↦ (r,p,q)
    let step3 = permute(&sp.t4, &sp.t5, [2, 0, 1])?;
    let step4 = amplify_monomial(w, sm, mr, &sp.t5, &sp.t6, &[1, 2])?;
    // (y,a,z) ↦ (a,y,z)
    let step5 = permute(&sp.t6, &sp.t7, [1, 0, 2])?;
    let step6 = amplify_monomial(w, sm, mr, &sp.t7, &sp.t2, &[0, 1])?;
    let rhs = step6.compose(&step5).compose(&step4).compose(&step3).compose(&step2).compose(&step1);
    Ok((lhs, rhs))
}

pub fn verify_pmu(mp: &MatchedPair, pmu: &Pmu, tol: f64) -> Vec<Check> {
    let g = &mp.g;
    let mut out = vec![Check::new("pmu.unitarity", "W*W = WW* = 1", pmu.w.unitarity_residual(), tol)];
    let perm_res = pmu.w.scal.iter().fold(0.0f64, |m, s| m.max((s - ONE).norm()));
    out.push(Check::new("pmu.permutation_form", "W is a permutation in orthonormal coordinates", perm_res, tol));
    out.push(Check::new("pmu.intertwine_alpha", "W(α(n)⊗1) = (1⊗α(n))W", intertwining(pmu, |t| mp.m[t[0]], |t| mp.m[t[1]]), tol));
    out.push(Check::new("pmu.intertwine_beta", "W(1⊗β(n)) = (1⊗β(n))W", intertwining(pmu, |t| g.s(t[1]), |t| g.s(t[1])), tol));
    out.push(Check::new(
        "pmu.intertwine_beta_hat_first",
        "W(β̂(n)⊗1) = (β̂(n)⊗1)W",
        intertwining(pmu, |t| g.r(t[0]), |t| g.r(t[0])),
        tol,
    ));
    out.push(Check::new(
        "pmu.intertwine_beta_hat_second",
        "W(1⊗β̂(n)) = (β(n)⊗1)W",
        intertwining(pmu, |t| g.r(t[1]), |t| g.s(t[0])),
        tol,
    ));
    match pentagon_sides(mp, pmu) {
        Ok((l, r)) => out.push(Check::new("pmu.pentagon", "pentagon equation", l.dist(&r), tol)),
        Err(e) => {
            let mut ch = Check::new("pmu.pentagon", "pentagon equation", f64::INFINITY, tol);
            ch.anchor = format!("pentagon equation ({e})");
            out.push(ch);
        }
    }
    let dc = density_closed_form(mp, pmu, tol);
    let res = if dc.convention == Some("sm") { dc.residual_sm } else { dc.residual_mr };
    let mut ch = Check::new("pmu.density_closed_form", "D = δ⁻¹(p1(p2(g)⁻¹g′))", res, tol);
    if let Some(conv) = dc.convention {
        ch.anchor = format!("D = δ⁻¹(p1(p2(g)⁻¹g′)) on the {conv} domain");
    }
    out.push(ch);
    out
}

/// `(i⋆ω_{f,h})(W) = V_h* W V_f` with `V_f η = η⊗f`; `f`, `h` in natural coordinates.
pub fn left_leg_operator(mp: &MatchedPair, pmu: &Pmu, f: &[C64], h: &[C64]) -> Mat {
    let vf = creation(mp, &pmu.sm, f, 1);
    let vh = creation(mp, &pmu.mr, h, 1);
    vh.adjoint() * pmu.w.lmul(&vf)
}

/// `(ω_{f,h}⋆i)(W) = L_h* W L_f` with `L_f η = f⊗η`.
pub fn right_leg_operator(mp: &MatchedPair, pmu: &Pmu, f: &[C64], h: &[C64]) -> Mat {
    let lf = creation(mp, &pmu.sm, f, 0);
    let lh = creation(mp, &pmu.mr, h, 0);
    lh.adjoint() * pmu.w.lmul(&lf)
}

/// `F_{f,h}(g₂,g₁) = Σ_{g₂′∈G2^{s(g₁)}} f(g₁g₂′) conj(h(g₂g₁g₂′)) (δ/δ₂)(g₂′) λ₂(g₂′)`.
pub fn left_leg_kernel(mp: &MatchedPair, f: &[C64], h: &[C64], g2: usize, g1: usize) -> C64 {
    let g = &mp.g;
    let mut acc = ZERO;
    for &k in g.range_fiber(g.s(g1)) {
        if mp.in2[k] {
            let a = g.mul(g1, k);
            acc += f[a] * h[g.mul(g2, a)].conj() * c(mp.delta()[k] / mp.md2.delta[k] * mp.lambda2[k]);
        }
    }
    acc
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// Leg operators over all pairs of point indicators `(f, h)`.
pub fn leg_generators(mp: &MatchedPair, pmu: &Pmu, side: Side) -> Vec<Mat> {
    let n = mp.g.len();
    let mut out = Vec::with_capacity(n * n);
    for a in 0..n {
        let f = indicator(n, a);
        for b in 0..n {
            let h = indicator(n, b);
            out.push(match side {
                Side::Left => left_leg_operator(mp, pmu, &f, &h),
                Side::Right => right_leg_operator(mp, pmu, &f, &h),
            });
        }
    }
    out
}

#[derive(Debug, Clone)]
pub struct LegReport {
    pub left_dim: usize,
    pub right_dim: usize,
    pub carrier_dim: usize,
    pub mirrored_dim: usize,
    /// Worst `‖(i⋆ω_{f,h})(W) − ℛ(F_{f,h})‖` over point indicators.
    pub kernel_residual: f64,
    /// Worst distance of a left-leg operator from the carrier and of a carrier operator from the left-leg span.
    pub span_residual: f64,
    /// Closure of the right-leg span under products and adjoints.
    pub right_closure: f64,
}

pub fn leg_report(mp: &MatchedPair, pmu: &Pmu, car: &Carrier, mirrored: &Carrier) -> LegReport {
    let n = mp.g.len();
    let left = leg_generators(mp, pmu, Side::Left);
    let mut kernel_residual: f64 = 0.0;
    for a in 0..n {
        let f = indicator(n, a);
        for b in 0..n {
            let h = indicator(n, b);
            let want = rep(mp, |x, y| left_leg_kernel(mp, &f, &h, x, y));
            kernel_residual = kernel_residual.max(dist(&left[a * n + b], &want));
        }
    }
    let left_basis = span_basis(&left, crate::crossed::SPAN_TOL);
    let mut span_residual: f64 = 0.0;
    for x in &left {
        span_residual = span_residual.max(car.residual(x));
    }
    for x in &car.ops {
        span_residual = span_residual.max(crate::linalg::span_residual(&left_basis, x));
    }
    let right = leg_generators(mp, pmu, Side::Right);
    let right_basis = span_basis(&right, crate::crossed::SPAN_TOL);
    let mut right_closure: f64 = 0.0;
    for x in &right_basis {
        right_closure = right_closure.max(crate::linalg::span_residual(&right_basis, &x.adjoint()));
        for y in &right_basis {
            right_closure = right_closure.max(crate::linalg::span_residual(&right_basis, &(x * y)));
        }
    }
    LegReport {
        left_dim: left_basis.len(),
        right_dim: right_basis.len(),
        carrier_dim: car.dim(),
        mirrored_dim: mirrored.dim(),
        kernel_residual,
        span_residual,
        right_closure,
    }
}

pub fn verify_legs(mp: &MatchedPair, pmu: &Pmu, tol: f64) -> Result<(LegReport, Vec<Check>)> {
    let car = carrier(mp);
    let swapped = MatchedPair::assemble(&crate::matched_pair::swap_desc(&mp.to_desc()))?;
    let mirrored = carrier(&swapped);
    let rep = leg_report(mp, pmu, &car, &mirrored);
    let checks = vec![
        Check::new("legs.left_kernel_formula", "(i⋆ω_{f,h})(W) = ℛ(F_{f,h})", rep.kernel_residual, tol),
        Check::new("legs.left_span_equals_crossed_product", "left leg = L∞(G2)⋊G1", rep.span_residual, tol),
        Check::flag("legs.left_dim_matches_carrier", "left leg = L∞(G2)⋊G1", rep.left_dim == rep.carrier_dim),
        Check::new("legs.right_span_closed", "right leg is an algebra", rep.right_closure, tol),
        Check::flag("legs.right_dim_matches_mirrored", "right leg ≅ L∞(G1)⋊G2", rep.right_dim == rep.mirrored_dim),
    ];
    Ok((rep, checks))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::examples::{e1_desc, e2_desc, e3_desc, trivial_desc};
    use crate::matched_pair::validate_matched_pair;

    fn mp(d: crate::matched_pair::MatchedPairDesc) -> MatchedPair {
        validate_matched_pair(&d, 1e-12).unwrap()
    }

    #[test]
    fn degenerate_pair_gives_classical_w() {
        use crate::examples::gen_degenerate_pair;
        for d in [trivial_desc(), e1_desc(), e2_desc(), e3_desc(Some(vec![1.0, 2.0, 5.0]))] {
            let m = mp(gen_degenerate_pair(&d.groupoid).unwrap());
            let pmu = build_w(&m).unwrap();
            assert!(classical_residual(&m, &pmu) < 1e-12);
            // the swapped pair (G, units) is not the classical unitary once G is not a space
            let mut swapped = gen_degenerate_pair(&d.groupoid).unwrap();
            std::mem::swap(&mut swapped.g1, &mut swapped.g2);
            std::mem::swap(&mut swapped.haar1, &mut swapped.haar2);
            let m2 = mp(swapped);
            let r = classical_residual(&m2, &build_w(&m2).unwrap());
            assert_eq!(r == 0.0, m.g.len() == m.g.n_units(), "{r}");
        }
    }

    #[test]
    fn trivial_w_is_one() {
        let m = mp(trivial_desc());
        let p = build_w(&m).unwrap();
        assert_eq!(p.w.to_dense(), Mat::from_element(1, 1, ONE));
    }

    #[test]
    fn s3_w_is_a_permutation() {
        let m = mp(e1_desc());
        let p = build_w(&m).unwrap();
        assert_eq!(p.sm.len(), 36);
        assert!(p.w.scal.iter().all(|&s| s == ONE));
        assert!(p.density.iter().all(|&d| d == 1.0));
        for ch in verify_pmu(&m, &p, 1e-9) {
            assert!(ch.pass, "{ch:?}");
            assert_eq!(ch.residual, 0.0, "{ch:?}");
        }
    }

    #[test]
    fn axioms_hold_on_all_examples() {
        for d in [e2_desc(), e3_desc(None), e3_desc(Some(vec![1.0, 2.0, 5.0]))] {
            let m = mp(d);
            let p = build_w(&m).unwrap();
            for ch in verify_pmu(&m, &p, 1e-9) {
                assert!(ch.pass, "{ch:?}");
            }
        }
    }

    #[test]
    fn nonuniform_density_follows_the_mr_convention() {
        let m = mp(e3_desc(Some(vec![1.0, 2.0, 5.0])));
        let p = build_w(&m).unwrap();
        assert!(p.density.iter().any(|&d| (d - 1.0).abs() > 1e-3));
        let dc = density_closed_form(&m, &p, 1e-9);
        assert_eq!(dc.convention, Some("mr"));
    }

    #[test]
    fn corrupted_w_fails_pentagon() {
        let m = mp(e3_desc(None));
        let mut p = build_w(&m).unwrap();
        p.w.perm.swap(0, 5);
        let checks = verify_pmu(&m, &p, 1e-9);
        assert!(checks.iter().any(|c| !c.pass));
    }

    #[test]
    fn legs_generate_the_crossed_products() {
        for (d, dim) in [(e1_desc(), 6), (e2_desc(), 16)] {
            let m = mp(d);
            let p = build_w(&m).unwrap();
            let (rep, checks) = verify_legs(&m, &p, 1e-9).unwrap();
            assert_eq!(rep.left_dim, dim);
            for ch in checks {
                assert!(ch.pass, "{ch:?} {rep:?}");
            }
        }
    }
}
