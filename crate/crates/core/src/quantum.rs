//! The measured quantum groupoid on `M = L∞(G2) ⋊ G1`: coproduct, slices, co-involution,
//! Haar operator-valued weights and modular flows.

use std::collections::HashMap;

use crate::crossed::{a_op, base_op, carrier, indicator, rep, rho_op, Carrier};
use crate::error::{Error, Result};
use crate::hilbert::{
    amplify, amplify_conj, amplify_conj_sparse, amplify_monomial, flip, pair_space, single_space, slice, LegMap, Monomial,
    TupleSpace,
};
use crate::linalg::{
    c, commutant, commutator, diag, dist, hermitian_power_it, max_abs, min_eigenvalue, sparse_commutator_norm, sparse_span_rank,
    Mat, SparseCols, C64, ZERO,
};
use crate::matched_pair::MatchedPair;
use crate::pmu::{build_w, pentagon_spaces, Pmu};
use crate::report::{Check, StageReport};

pub struct QuantumGroupoid<'a> {
    pub mp: &'a MatchedPair,
    pub pmu: Pmu,
    pub single: TupleSpace,
    pub carrier: Carrier,
    /// Triple spaces `(0S1M, 1S2M)`, `(0M1R, 1S2M)`, `(0S2M, 1M2R)`.
    t0: TupleSpace,
    t1: TupleSpace,
    t3: TupleSpace,
    pair_index: HashMap<(usize, usize), usize>,
}

/// Closed forms for `Γ` on generators. `Literal` drops the density of `W` at the translated
/// point and pairs slices with `δ(g⁻¹)`; both readings agree when `δ ≡ 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Reading {
    Derived,
    Literal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HaarSide {
    Left,
    Right,
}

impl<'a> QuantumGroupoid<'a> {
    pub fn new(mp: &'a MatchedPair) -> Result<Self> {
        let pmu = build_w(mp)?;
        let car = carrier(mp);
        let closure = car.closure_residual();
        if closure > 1e-8 {
            return Err(Error::SpanNotClosed(format!("product/adjoint residual {closure:.3e}")));
        }
        let sp = pentagon_spaces(mp);
        let pair_index = car.pairs.iter().enumerate().map(|(k, &p)| (p, k)).collect();
        Ok(QuantumGroupoid { mp, pmu, single: single_space(mp), carrier: car, t0: sp.t0, t1: sp.t1, t3: sp.t3, pair_index })
    }

    pub fn n(&self) -> usize {
        self.mp.g.len()
    }

    /// `Γ(x) = W*(1⊗x)W` on `L²(G²_{s,m})`.
    pub fn coproduct(&self, x: &Mat) -> Result<Mat> {
        amplify_conj(&self.pmu.w, x, &self.single, &self.pmu.mr, &[1])
    }

    /// Sparse form of [`Self::coproduct`].
    pub fn coproduct_sparse(&self, x: &Mat) -> Result<SparseCols> {
        amplify_conj_sparse(&self.pmu.w, x, &self.single, &self.pmu.mr, &[1])
    }

    /// `Γ(𝔞(f)(1⊗ρ(h)))` from the translation formula: the natural kernel sends
    /// `(g·p1(p2(g′)g₁), g′g₁)` to `(g,g′)` with weight `f(p2(g)p2(g′))h(g₁)λ₁(g₁)`, times
    /// `δ(p1(p2(g′)g₁))^{-1/2}` in the derived reading.
    pub fn coproduct_generator(&self, f: &[C64], h: &[C64], reading: Reading) -> Mat {
        let (mp, g) = (self.mp, &self.mp.g);
        let sm = &self.pmu.sm;
        let mut k = Mat::zeros(sm.len(), sm.len());
        for (row, t) in sm.tuples.iter().enumerate() {
            let (a, b) = (t[0], t[1]);
            let fv = g.try_mul(mp.p2[a], mp.p2[b]).map_or(ZERO, |q| f[q]);
            if fv == ZERO {
                continue;
            }
            for &g1 in g.range_fiber(g.s(b)) {
                if !mp.in1[g1] || h[g1] == ZERO {
                    continue;
                }
                let Some(x) = g.try_mul(mp.p2[b], g1) else { continue };
                let Some(a2) = g.try_mul(a, mp.p1[x]) else { continue };
                let dens = match reading {
                    Reading::Derived => mp.delta()[mp.p1[x]].powf(-0.5),
                    Reading::Literal => 1.0,
                };
                if let Some(col) = sm.index_of(&[a2, g.mul(b, g1)]) {
                    k[(row, col)] += fv * h[g1] * c(dens * mp.lambda1[g1]);
                }
            }
        }
        sm.to_ortho(&k)
    }

    /// Multiplication by `f(p2(g)p2(g′))` on `L²(G²_{s,m})`.
    pub fn coproduct_of_a(&self, f: &[C64]) -> Mat {
        let (mp, g) = (self.mp, &self.mp.g);
        self.pmu.sm.multiplication(|t| g.try_mul(mp.p2[t[0]], mp.p2[t[1]]).map_or(ZERO, |q| f[q]))
    }

    /// `Ψ_{f,h}` as a closure on kernel pairs; `φ` in natural coordinates. The derived reading
    /// pairs with `δ(g)` and carries `(δ(g₁)/δ(p1(g₂g₁)))^{1/2}`.
    pub fn psi_kernel<'b>(
        &'b self,
        f: &'b [C64],
        h: &'b [C64],
        phi: &'b [C64],
        form: Reading,
    ) -> impl Fn(usize, usize) -> C64 + 'b {
        let mp = self.mp;
        move |g2: usize, g1: usize| {
            let g = &mp.g;
            if h[g1] == ZERO {
                return ZERO;
            }
            let top = mp.p1[g.mul(g2, g1)];
            let mut sum = ZERO;
            for &x in g.range_fiber(g.r(g2)) {
                let xi = g.inv(x);
                let Some(q) = g.try_mul(mp.p2[xi], g2) else { continue };
                let Some(y) = g.try_mul(xi, top) else { continue };
                let dens = match form {
                    Reading::Derived => mp.delta()[x],
                    Reading::Literal => mp.delta()[xi],
                };
                sum += f[q] * phi[y] * phi[xi].conj() * c(dens * mp.haar.lambda[x]);
            }
            let pre = match form {
                Reading::Derived => (mp.delta()[g1] / mp.delta()[top]).sqrt(),
                Reading::Literal => 1.0,
            };
            h[g1] * c(pre) * sum
        }
    }

    /// `(ω_φ⋆i)Γ(x)` against `ℛ(Ψ_{f,h})` for `x = 𝔞(f)(1⊗ρ(h))`.
    pub fn psi_residual(&self, f: &[C64], h: &[C64], phi: &[C64], form: Reading) -> Result<f64> {
        let x = a_op(self.mp, f) * rho_op(self.mp, h);
        let gx = self.coproduct(&x)?;
        let sl = slice(self.mp, &self.pmu.sm, &gx, phi, phi, 0);
        let want = rep(self.mp, self.psi_kernel(f, h, phi, form));
        Ok(dist(&sl, &want))
    }

    /// `(Γ⋆i)Γ(x)` and `(i⋆Γ)Γ(x)` on the triple space `(0S1M, 1S2M)`.
    pub fn coassociativity_sides(&self, x: &Mat) -> Result<(SparseCols, SparseCols)> {
        let (sm, mr, w) = (&self.pmu.sm, &self.pmu.mr, &self.pmu.w);
        let gx = self.coproduct(x)?;
        let w12 = amplify_monomial(w, sm, mr, &self.t0, &self.t1, &[0, 1])?;
        let w23 = amplify_monomial(w, sm, mr, &self.t0, &self.t3, &[1, 2])?;
        let left = amplify_conj_sparse(&w12, &gx, sm, &self.t1, &[1, 2])?;
        let right = amplify_conj_sparse(&w23, &gx, sm, &self.t3, &[0, 2])?;
        Ok((left, right))
    }

    fn g1_indicators(&self) -> Vec<Vec<C64>> {
        self.mp.g1_arrows().into_iter().map(|k| indicator(self.n(), k)).collect()
    }

    fn g2_indicators(&self) -> Vec<Vec<C64>> {
        self.mp.g2_arrows().into_iter().map(|k| indicator(self.n(), k)).collect()
    }

    fn unit_indicators(&self) -> Vec<Vec<C64>> {
        (0..self.mp.g.n_units()).map(|u| indicator(self.mp.g.n_units(), u)).collect()
    }

    /// Generators `𝔞(δ_{g₂})` and `1⊗ρ(δ_{g₁})`.
    pub fn generators(&self) -> Vec<Mat> {
        let mut out: Vec<Mat> = self.g2_indicators().iter().map(|f| a_op(self.mp, f)).collect();
        out.extend(self.g1_indicators().iter().map(|h| rho_op(self.mp, h)));
        out
    }

    /// Coproduct stage; the literal closed forms are reported as diagnostics.
    pub fn coproduct_checks(&self, tol: f64) -> Result<StageReport> {
        let mp = self.mp;
        let mut st = StageReport::new("coproduct");
        let out = &mut st.checks;

        let gamma_one = self.coproduct(&Mat::identity(self.n(), self.n()))?;
        out.push(Check::new(
            "gamma.unital",
            "Γ(1) = 1",
            dist(&gamma_one, &Mat::identity(gamma_one.nrows(), gamma_one.ncols())),
            tol,
        ));

        let mut a_res: f64 = 0.0;
        for f in self.g2_indicators() {
            a_res = a_res.max(dist(&self.coproduct(&a_op(mp, &f))?, &self.coproduct_of_a(&f)));
        }
        out.push(Check::new("gamma.a_formula", "Γ(𝔞(f)) = multiplication by f(p2(g)p2(g'))", a_res, tol));

        let (mut gen, mut gen_lit): (f64, f64) = (0.0, 0.0);
        let (mut psi, mut psi_lit): (f64, f64) = (0.0, 0.0);
        let states = self.slice_states();
        for f in self.g2_indicators() {
            for h in self.g1_indicators() {
                let x = a_op(mp, &f) * rho_op(mp, &h);
                let gx = self.coproduct(&x)?;
                gen = gen.max(dist(&gx, &self.coproduct_generator(&f, &h, Reading::Derived)));
                gen_lit = gen_lit.max(dist(&gx, &self.coproduct_generator(&f, &h, Reading::Literal)));
                for phi in &states {
                    let sl = slice(mp, &self.pmu.sm, &gx, phi, phi, 0);
                    psi = psi.max(dist(&sl, &rep(mp, self.psi_kernel(&f, &h, phi, Reading::Derived))));
                    psi_lit = psi_lit.max(dist(&sl, &rep(mp, self.psi_kernel(&f, &h, phi, Reading::Literal))));
                }
            }
        }
        out.push(Check::new("gamma.generator_formula", "translation formula for Γ(𝔞(f)(1⊗ρ(h)))", gen, tol));
        out.push(Check::new("gamma.slice_kernel", "(ω_φ⋆i)Γ(𝔞(f)(1⊗ρ(h))) = ℛ(Ψ_{f,h})", psi, tol));

        let mut bases: f64 = 0.0;
        let sm = &self.pmu.sm;
        for n in self.unit_indicators() {
            let gs = self.coproduct(&base_op(mp, LegMap::S, &n))?;
            bases = bases.max(dist(&gs, &sm.multiplication(|t| n[mp.g.s(t[1])])));
            let gm = self.coproduct(&base_op(mp, LegMap::M, &n))?;
            bases = bases.max(dist(&gm, &sm.multiplication(|t| n[mp.m[t[0]]])));
        }
        out.push(Check::new("gamma.bases", "Γ(s(n)) = 1⊗s(n), Γ(m(n)) = m(n)⊗1", bases, tol));

        let gens = self.generators();
        let images: Vec<SparseCols> = gens.iter().map(|x| self.coproduct_sparse(x)).collect::<Result<_>>()?;
        let mut mult: f64 = 0.0;
        for (a, ga) in gens.iter().zip(&images) {
            mult = mult.max(dist(&self.coproduct(&a.adjoint())?, &self.coproduct(a)?.adjoint()));
            for (b, gb) in gens.iter().zip(&images) {
                let gab = self.coproduct_sparse(&crate::linalg::spmul(a, b))?;
                mult = mult.max(gab.dist(&ga.mul(gb)));
            }
        }
        out.push(Check::new("gamma.multiplicative", "Γ(xy) = Γ(x)Γ(y), Γ(x*) = Γ(x)*", mult, tol));

        let basis_images: Vec<SparseCols> = self.carrier.basis.iter().map(|b| self.coproduct_sparse(b)).collect::<Result<_>>()?;
        let rank = sparse_span_rank(&basis_images, 1e-8);
        out.push(Check::flag("gamma.injective", "Γ injective on M", rank == self.carrier.dim()));

        out.push(Check::new(
            "gamma.into_fibered_product",
            "Γ(M) commutes with M'⊗1 and 1⊗M'",
            self.commutant_residual(&basis_images)?,
            tol,
        ));

        let mut coassoc: f64 = 0.0;
        for b in &self.carrier.basis {
            let (l, r) = self.coassociativity_sides(b)?;
            coassoc = coassoc.max(l.dist(&r));
        }
        out.push(Check::new("gamma.coassociativity", "(Γ⋆i)Γ = (i⋆Γ)Γ", coassoc, tol));

        st.diagnostics.push(Check::new(
            "gamma.generator_formula_literal",
            "translation formula without the density of W",
            gen_lit,
            tol,
        ));
        st.diagnostics.push(Check::new("gamma.slice_kernel_literal", "Ψ_{f,h} paired with δ(g⁻¹)", psi_lit, tol));
        Ok(st)
    }

    /// Point states at a few arrows plus one generic complex vector, natural coordinates.
    pub fn slice_states(&self) -> Vec<Vec<C64>> {
        let n = self.n();
        let step = (n / 4).max(1);
        let mut out: Vec<Vec<C64>> = (0..n).step_by(step).map(|k| indicator(n, k)).collect();
        out.push((0..n).map(|k| C64::new(1.0 + 0.25 * k as f64, 0.5 - 0.125 * (k % 3) as f64)).collect());
        out
    }

    /// Largest commutator of `Γ(x)` with `y⊗1` and `1⊗y` over a basis of `M'`.
    fn commutant_residual(&self, images: &[SparseCols]) -> Result<f64> {
        let sm = &self.pmu.sm;
        let primes = commutant(&self.generators(), self.n(), 1e-9);
        let mut worst: f64 = 0.0;
        for y in primes {
            let y = y.map(|z| if z.norm() < 1e-13 { ZERO } else { z });
            for leg in [0, 1] {
                let amp = SparseCols::from_dense(&amplify(&y, &self.single, sm, &[leg])?);
                for gx in images {
                    worst = worst.max(sparse_commutator_norm(gx, &amp));
                }
            }
        }
        Ok(worst)
    }
}

/// Antilinear maps stored as `ξ ↦ M conj(ξ)`.
pub struct Coinvolution {
    pub phi: Vec<usize>,
    pub phi_hat: Vec<usize>,
    pub j: Monomial,
    pub jhat: Monomial,
}

pub fn build_coinvolution(mp: &MatchedPair) -> Result<Coinvolution> {
    let n = mp.g.len();
    let phi: Vec<usize> = (0..n).map(|g| mp.phi(g)).collect();
    let phi_hat: Vec<usize> = (0..n).map(|g| mp.phi_hat(g)).collect();
    if let Some(x) = (0..n).find(|&x| phi[phi[x]] != x || phi_hat[phi_hat[x]] != x) {
        return Err(Error::PhiNotInvolutive(mp.g.name(x).to_string()));
    }
    let single = single_space(mp);
    let mu = mp.mu();
    let j = Monomial::from_point_map(&single, &single, |t| vec![phi[t[0]]], |t| c((mu[t[0]] / mu[phi[t[0]]]).sqrt()))?;
    let jhat = Monomial::from_point_map(&single, &single, |t| vec![phi_hat[t[0]]], |t| c((mu[t[0]] / mu[phi_hat[t[0]]]).sqrt()))?;
    Ok(Coinvolution { phi, phi_hat, j, jhat })
}

impl Coinvolution {
    /// `R(x) = Ĵ x* Ĵ`.
    pub fn r(&self, x: &Mat) -> Mat {
        Monomial::sandwich(&self.jhat.adjoint(), &x.transpose(), &self.jhat.conjugate().adjoint())
    }
}

impl QuantumGroupoid<'_> {
    pub fn coinvolution_checks(&self, co: &Coinvolution, tol: f64) -> Result<Vec<Check>> {
        let (mp, g) = (self.mp, &self.mp.g);
        let n = self.n();
        let mut out = vec![Check::flag("coinv.phi_involutive", "φ² = φ̂² = id", true)];

        let maps_ok = (0..n).all(|x| {
            g.s(co.phi[x]) == mp.mhat[x]
                && mp.m[co.phi[x]] == g.r(x)
                && mp.m[co.phi_hat[x]] == g.s(x)
                && g.r(co.phi[x]) == mp.m[x]
        });
        out.push(Check::flag("coinv.phi_base_maps", "s∘φ = m̂, m∘φ = r, m∘φ̂ = s, r∘φ = m", maps_ok));

        let jj = co.j.compose(&co.j.conjugate());
        let jhjh = co.jhat.compose(&co.jhat.conjugate());
        let id = Monomial::identity(n);
        out.push(Check::new("coinv.j_involutive", "J² = Ĵ² = 1", jj.dist(&id).max(jhjh.dist(&id)), tol));

        // θ(φ̂×φ) = (φ̂×φ)θ⁻¹ on points of P_{s,m}
        let (sm, mr) = (&self.pmu.sm, &self.pmu.mr);
        let mut theta_inv = vec![0usize; sm.len()];
        for (row, &k) in self.pmu.theta.iter().enumerate() {
            theta_inv[k] = row;
        }
        let mut bad = 0usize;
        for (k, t) in sm.tuples.iter().enumerate() {
            let lhs = mr.index_of(&[co.phi_hat[t[0]], co.phi[t[1]]]).map(|r| self.pmu.theta[r]);
            let u = &mr.tuples[theta_inv[k]];
            let rhs = sm.index_of(&[co.phi_hat[u[0]], co.phi[u[1]]]);
            if lhs.is_none() || lhs != rhs {
                bad += 1;
            }
        }
        out.push(Check::flag("coinv.theta_relation", "θ∘(φ̂×φ) = (φ̂×φ)∘θ⁻¹", bad == 0));

        // (Ĵ⊗J)W = W*(Ĵ⊗J) as M₂·W̄ = W*·M₁
        let mu = mp.mu();
        let coef = |t: &[usize]| c((mu[t[0]] / mu[co.phi_hat[t[0]]] * mu[t[1]] / mu[co.phi[t[1]]]).sqrt());
        let m1 = Monomial::from_point_map(sm, mr, |t| vec![co.phi_hat[t[0]], co.phi[t[1]]], coef)?;
        let m2 = Monomial::from_point_map(mr, sm, |t| vec![co.phi_hat[t[0]], co.phi[t[1]]], coef)?;
        let w = &self.pmu.w;
        let lhs = m2.compose(&w.conjugate());
        let rhs = w.adjoint().compose(&m1);
        out.push(Check::new("coinv.w_conjugation", "(Ĵ⊗J)W = W*(Ĵ⊗J)", lhs.dist(&rhs), tol));

        let mut r2: f64 = 0.0;
        let mut anti: f64 = 0.0;
        let mut inside: f64 = 0.0;
        let gens = self.generators();
        for x in &self.carrier.basis {
            r2 = r2.max(dist(&co.r(&co.r(x)), x));
            inside = inside.max(self.carrier.residual(&co.r(x)));
        }
        for a in &gens {
            for b in &gens {
                anti = anti.max(dist(&co.r(&(a * b)), &(co.r(b) * co.r(a))));
            }
            anti = anti.max(dist(&co.r(&a.adjoint()), &co.r(a).adjoint()));
        }
        out.push(Check::new("coinv.r_involutive", "R² = id", r2, tol));
        out.push(Check::new("coinv.r_antimultiplicative", "R(xy) = R(y)R(x), R(x*) = R(x)*", anti, tol));
        out.push(Check::new("coinv.r_preserves_m", "R(M) = M", inside, tol));

        let mut bases: f64 = 0.0;
        for nn in self.unit_indicators() {
            bases = bases.max(dist(&co.r(&base_op(mp, LegMap::M, &nn)), &base_op(mp, LegMap::S, &nn)));
        }
        out.push(Check::new("coinv.r_exchanges_bases", "R(m(n)) = s(n)", bases, tol));

        let mut ra: f64 = 0.0;
        for f in self.g2_indicators() {
            let finv: Vec<C64> = (0..n).map(|x| f[g.inv(x)]).collect();
            ra = ra.max(dist(&co.r(&a_op(mp, &f)), &a_op(mp, &finv)));
        }
        out.push(Check::new("coinv.r_on_a", "R(𝔞(f)) = 𝔞(f⁻¹)", ra, tol));

        // (R⋆R)Γ(x) = A Γ(x)* A⁻¹ with A = Ĵ⊗Ĵ : P_{s,m} → P_{m,s}
        let ms = pair_space(mp, LegMap::M, LegMap::S);
        let ma = Monomial::from_point_map(
            sm,
            &ms,
            |t| vec![co.phi_hat[t[0]], co.phi_hat[t[1]]],
            |t| c((mu[t[0]] / mu[co.phi_hat[t[0]]] * mu[t[1]] / mu[co.phi_hat[t[1]]]).sqrt()),
        )?;
        let sigma = flip(sm, &ms)?;
        let mut rr: f64 = 0.0;
        for x in gens.iter().chain(self.carrier.basis.iter()) {
            let gx = self.coproduct(x)?;
            let lhs = Monomial::sandwich(&ma.adjoint(), &gx.transpose(), &ma.conjugate().adjoint());
            let rhs = sigma.conj_inv(&self.coproduct(&co.r(x))?);
            rr = rr.max(dist(&lhs, &rhs));
        }
        out.push(Check::new("coinv.coproduct_flip", "(R⋆R)Γ = ςΓR", rr, tol));
        Ok(out)
    }
}

/// `T_L`, `T_R`, the functionals `Φ = ν∘T` and their densities.
pub struct HaarWeights {
    /// `Φ(x) = tr(Q* x)` on the carrier.
    pub q_left: Mat,
    pub q_right: Mat,
    pub d_left: Mat,
    pub d_right: Mat,
}

impl QuantumGroupoid<'_> {
    fn kernel_value(&self, coef: &[C64], g2: usize, g1: usize) -> C64 {
        self.pair_index.get(&(g2, g1)).map_or(ZERO, |&k| coef[k])
    }

    /// `T(ℛ(F))` as a function on `G`: `Σ_{x∈G2^{m(y)}} F(x, s(x))λ₂(x)` (left) or
    /// `Σ_{x∈G2^{s(y)}} F(x⁻¹, r(x))λ₂(x)` (right).
    pub fn operator_weight(&self, x: &Mat, side: HaarSide, tol: f64) -> Result<Vec<C64>> {
        let coef = self.carrier.kernel_of(x, tol)?;
        let per_unit = self.per_unit_weight(&coef, side);
        let g = &self.mp.g;
        Ok((0..g.len())
            .map(|y| match side {
                HaarSide::Left => per_unit[self.mp.m[y]],
                HaarSide::Right => per_unit[g.s(y)],
            })
            .collect())
    }

    fn per_unit_weight(&self, coef: &[C64], side: HaarSide) -> Vec<C64> {
        let (mp, g) = (self.mp, &self.mp.g);
        (0..g.n_units())
            .map(|u| {
                let mut sum = ZERO;
                for &x in g.range_fiber(u) {
                    if !mp.in2[x] {
                        continue;
                    }
                    let v = match side {
                        HaarSide::Left => self.kernel_value(coef, x, g.unit(g.s(x))),
                        HaarSide::Right => self.kernel_value(coef, g.inv(x), g.unit(g.r(x))),
                    };
                    sum += v * c(mp.lambda2[x]);
                }
                sum
            })
            .collect()
    }

    /// `Φ = ν∘m⁻¹∘T_L` (left) or `ν∘s⁻¹∘T_R` (right).
    pub fn haar_weight(&self, x: &Mat, side: HaarSide, tol: f64) -> Result<C64> {
        let coef = self.carrier.kernel_of(x, tol)?;
        Ok(self.per_unit_weight(&coef, side).iter().zip(self.mp.nu()).map(|(v, &nu)| v * c(nu)).sum())
    }

    pub fn build_haar_weights(&self, tol: f64) -> Result<HaarWeights> {
        let basis = &self.carrier.basis;
        let mut vals = Vec::with_capacity(2);
        for side in [HaarSide::Left, HaarSide::Right] {
            vals.push(basis.iter().map(|b| self.haar_weight(b, side, tol)).collect::<Result<Vec<C64>>>()?);
        }
        let functional = |v: &[C64]| basis.iter().zip(v).fold(Mat::zeros(self.n(), self.n()), |acc, (b, &p)| acc + b * p.conj());
        let d_left = self.density(&vals[0])?;
        let d_right = self.density(&vals[1])?;
        Ok(HaarWeights { q_left: functional(&vals[0]), q_right: functional(&vals[1]), d_left, d_right })
    }

    /// `D ∈ M` with `tr(D b_k) = Φ(b_k)`; faithful iff positive definite.
    fn density(&self, phi: &[C64]) -> Result<Mat> {
        let basis = &self.carrier.basis;
        let k = basis.len();
        let gram = Mat::from_fn(k, k, |i, j| (&basis[j] * &basis[i]).trace());
        let rhs = crate::linalg::Vector::from_column_slice(phi);
        let sol = gram.lu().solve(&rhs).ok_or(Error::NotFaithful(0.0))?;
        let d = basis.iter().zip(sol.iter()).fold(Mat::zeros(self.n(), self.n()), |acc, (b, &x)| acc + b * x);
        let herm = dist(&d, &d.adjoint());
        let min = min_eigenvalue(&d);
        if herm > 1e-8 || min <= 1e-10 {
            return Err(Error::NotFaithful(min));
        }
        Ok(d)
    }

    /// `⟨T(x)e_{g′}, e_g⟩` computed as `Φ` of the slices of `Γ(x)` by `ω_{e_g′,e_g}` on the
    /// other leg; left slices the first leg, right the second.
    pub fn invariance_matrix(&self, gx: &Mat, q: &Mat, side: HaarSide) -> Mat {
        let sm = &self.pmu.sm;
        let mu = self.mp.mu();
        let n = self.n();
        let fixed = match side {
            HaarSide::Left => 0,
            HaarSide::Right => 1,
        };
        let split = |t: &[usize], w: f64| {
            let (g, a) = (t[fixed], t[1 - fixed]);
            (g, a, (w / (mu[g] * mu[a])).sqrt())
        };
        let mut z = Mat::zeros(n, n);
        for (col, tc) in sm.tuples.iter().enumerate() {
            let (g2, b, cc) = split(tc, sm.weights[col]);
            for (row, tr) in sm.tuples.iter().enumerate() {
                let v = gx[(row, col)];
                if v == ZERO {
                    continue;
                }
                let (g1, a, cr) = split(tr, sm.weights[row]);
                z[(g1, g2)] += q[(a, b)].conj() * v * c(cr * cc);
            }
        }
        z
    }

    pub fn haar_checks(&self, hw: &HaarWeights, tol: f64) -> Result<Vec<Check>> {
        let mp = self.mp;
        let g = &mp.g;
        let mut out = Vec::new();

        let mut gen_l: f64 = 0.0;
        let mut gen_r: f64 = 0.0;
        for f in self.g2_indicators() {
            for h in self.g1_indicators() {
                let x = a_op(mp, &f) * rho_op(mp, &h);
                let tl = self.operator_weight(&x, HaarSide::Left, tol)?;
                let tr = self.operator_weight(&x, HaarSide::Right, tol)?;
                for y in 0..g.len() {
                    let mut wl = ZERO;
                    for &z in g.range_fiber(mp.m[y]) {
                        if mp.in2[z] {
                            wl += f[z] * h[g.unit(g.s(z))] * c(mp.lambda2[z]);
                        }
                    }
                    let mut wr = ZERO;
                    for &z in g.range_fiber(g.s(y)) {
                        if mp.in2[z] {
                            wr += f[g.inv(z)] * h[g.unit(g.r(z))] * c(mp.lambda2[z]);
                        }
                    }
                    gen_l = gen_l.max((tl[y] - wl).norm());
                    gen_r = gen_r.max((tr[y] - wr).norm());
                }
            }
        }
        out.push(Check::new("haar.left_generator_formula", "T_L(𝔞(f)(1⊗ρ(h)))(y) = Σ f(x)h(s(x))λ₂(x)", gen_l, tol));
        out.push(Check::new("haar.right_generator_formula", "T_R(𝔞(f)(1⊗ρ(h)))(y) = Σ f(x⁻¹)h(r(x))λ₂(x)", gen_r, tol));

        let mut inv_l: f64 = 0.0;
        let mut inv_r: f64 = 0.0;
        for x in self.carrier.basis.iter().chain(self.generators().iter()) {
            let gx = self.coproduct(x)?;
            let tl = diag(&self.operator_weight(x, HaarSide::Left, tol)?);
            let tr = diag(&self.operator_weight(x, HaarSide::Right, tol)?);
            inv_l = inv_l.max(dist(&self.invariance_matrix(&gx, &hw.q_left, HaarSide::Left), &tl));
            inv_r = inv_r.max(dist(&self.invariance_matrix(&gx, &hw.q_right, HaarSide::Right), &tr));
        }
        out.push(Check::new("haar.left_invariance", "(i⋆Φ_L)Γ(x) = T_L(x)", inv_l, tol));
        out.push(Check::new("haar.right_invariance", "(Φ_R⋆i)Γ(x) = T_R(x)", inv_r, tol));

        let mut dens: f64 = 0.0;
        for b in &self.carrier.basis {
            let pl = self.haar_weight(b, HaarSide::Left, tol)?;
            let pr = self.haar_weight(b, HaarSide::Right, tol)?;
            dens = dens.max(((&hw.d_left * b).trace() - pl).norm()).max(((&hw.d_right * b).trace() - pr).norm());
        }
        out.push(Check::new("haar.densities", "Φ(x) = tr(D x) with D > 0", dens, tol));
        Ok(out)
    }

    /// `σ^{Φ_L}_t` on generators and the commutation of the two flows. The check uses the
    /// closed form `ℛ(F)(g₂,g₁) ↦ δ(p1(g₂g₁))^{-it}ℛ(F)(g₂,g₁)`, which keeps the cocycle of `μ₂`
    /// under the action; `𝔞(f)(1⊗ρ(δ^{-it}h))` is reported as a diagnostic.
    pub fn modular_checks(&self, hw: &HaarWeights, times: &[f64], tol: f64) -> StageReport {
        let mp = self.mp;
        let g = &mp.g;
        let delta = mp.delta();
        let mut st = StageReport::new("modular");
        for &t in times {
            let ul = hermitian_power_it(&hw.d_left, t);
            let ur = hermitian_power_it(&hw.d_right, t);
            let phase = |d: f64| C64::from_polar(1.0, -t * d.ln());
            let (mut cocycle, mut literal, mut right): (f64, f64, f64) = (0.0, 0.0, 0.0);
            for f in self.g2_indicators() {
                for h in self.g1_indicators() {
                    let x = a_op(mp, &f) * rho_op(mp, &h);
                    let want_cocycle = rep(mp, |g2, g1| f[g2] * h[g1] * c(delta[g1].sqrt()) * phase(delta[mp.p1[g.mul(g2, g1)]]));
                    let ht: Vec<C64> = h.iter().zip(delta).map(|(v, &d)| v * phase(d)).collect();
                    let want_literal = a_op(mp, &f) * rho_op(mp, &ht);
                    let flowed = &ul * &x * ul.adjoint();
                    cocycle = cocycle.max(dist(&flowed, &want_cocycle));
                    literal = literal.max(dist(&flowed, &want_literal));
                    right = right.max(dist(&(&ur * &x * ur.adjoint()), &want_literal));
                }
            }
            st.checks.push(Check::new(
                format!("modular.closed_form@{t}"),
                "σ^{Φ_L}_t(ℛ(F)) = ℛ(δ(p1(g₂g₁))^{-it}F)",
                cocycle,
                tol,
            ));
            let comm = max_abs(&commutator(&ul, &ur));
            st.checks.push(Check::new(
                format!("modular.flows_commute@{t}"),
                "σ^{Φ_L}_t σ^{Φ_R}_t = σ^{Φ_R}_t σ^{Φ_L}_t",
                comm,
                tol,
            ));
            st.diagnostics.push(Check::new(
                format!("modular.closed_form_literal@{t}"),
                "σ^{Φ_L}_t(𝔞(f)(1⊗ρ(h))) = 𝔞(f)(1⊗ρ(δ^{-it}h))",
                literal,
                tol,
            ));
            st.diagnostics.push(Check::new(
                format!("modular.right_closed_form@{t}"),
                "σ^{Φ_R}_t(𝔞(f)(1⊗ρ(h))) = 𝔞(f)(1⊗ρ(δ^{-it}h))",
                right,
                tol,
            ));
        }
        st.diagnostics.push(Check::new(
            "modular.spectral_commutation",
            "spectral projections of D_L and D_R commute",
            spectral_commutation(hw),
            tol,
        ));
        st
    }
}

/// Largest commutator between spectral projections of `D_L` and `D_R`; a stronger sufficient
/// condition for the flows to commute at every `t`.
pub fn spectral_commutation(hw: &HaarWeights) -> f64 {
    let projections = |d: &Mat| -> Vec<Mat> {
        let eig = d.clone().symmetric_eigen();
        let mut groups: Vec<(f64, Mat)> = Vec::new();
        for (i, &lam) in eig.eigenvalues.iter().enumerate() {
            let v = eig.eigenvectors.column(i);
            let p = v * v.adjoint();
            match groups.iter_mut().find(|(l, _)| (l - lam).abs() <= 1e-8 * lam.abs().max(1.0)) {
                Some((_, acc)) => *acc += p,
                None => groups.push((lam, p)),
            }
        }
        groups.into_iter().map(|(_, p)| p).collect()
    };
    let (pl, pr) = (projections(&hw.d_left), projections(&hw.d_right));
    pl.iter().flat_map(|a| pr.iter().map(move |b| max_abs(&commutator(a, b)))).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::examples::{e1_desc, e2_desc, e3_desc};
    use crate::matched_pair::validate_matched_pair;

    fn e3nu() -> MatchedPair {
        validate_matched_pair(&e3_desc(Some(vec![1.0, 2.0, 5.0])), 1e-12).unwrap()
    }

    fn assert_all(checks: &[Check]) {
        for ch in checks {
            assert!(ch.pass, "{} residual {}", ch.name, ch.residual);
        }
    }

    #[test]
    fn coproduct_e1_e3() {
        for mp in [validate_matched_pair(&e1_desc(), 1e-12).unwrap(), e3nu()] {
            let qg = QuantumGroupoid::new(&mp).unwrap();
            assert_all(&qg.coproduct_checks(1e-9).unwrap().checks);
        }
    }

    #[test]
    fn literal_closed_forms_need_uniform_delta() {
        let uniform = validate_matched_pair(&e3_desc(None), 1e-12).unwrap();
        let st = QuantumGroupoid::new(&uniform).unwrap().coproduct_checks(1e-9).unwrap();
        assert_all(&st.diagnostics);
        let mp = e3nu();
        let st = QuantumGroupoid::new(&mp).unwrap().coproduct_checks(1e-9).unwrap();
        assert!(st.diagnostics.iter().all(|c| c.residual > 1e-3));
    }

    #[test]
    fn coinvolution_e2_e3() {
        for mp in [validate_matched_pair(&e2_desc(), 1e-12).unwrap(), e3nu()] {
            let qg = QuantumGroupoid::new(&mp).unwrap();
            let co = build_coinvolution(&mp).unwrap();
            assert_all(&qg.coinvolution_checks(&co, 1e-9).unwrap());
        }
    }

    #[test]
    fn haar_and_modular_e3() {
        let mp = e3nu();
        let qg = QuantumGroupoid::new(&mp).unwrap();
        let hw = qg.build_haar_weights(1e-9).unwrap();
        assert_all(&qg.haar_checks(&hw, 1e-9).unwrap());
        let st = qg.modular_checks(&hw, &[0.0, 0.37, 1.0], 1e-8);
        assert_all(&st.checks);
        let literal = st.diagnostics.iter().find(|c| c.name == "modular.closed_form_literal@0.37").unwrap();
        assert!(literal.residual > 0.1);
    }
}
