//! Relative tensor products as weighted `ℓ²` spaces on fiber products, operators in
//! orthonormal coordinates, monomial operators, amplification and vector-state slices.
//!
//! A vector in natural coordinates `ξ` has norm `Σ w(t)|ξ(t)|²`. All matrices here act on
//! `ξ̃ = √w·ξ`, so adjoints are conjugate transposes.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::linalg::{c, Mat, SparseCols, C64, ONE, ZERO};
use crate::matched_pair::MatchedPair;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LegMap {
    S,
    R,
    M,
    Mhat,
}

impl LegMap {
    pub const ALL: [LegMap; 4] = [LegMap::S, LegMap::R, LegMap::M, LegMap::Mhat];

    pub fn apply(self, mp: &MatchedPair, g: usize) -> usize {
        match self {
            LegMap::S => mp.g.s(g),
            LegMap::R => mp.g.r(g),
            LegMap::M => mp.m[g],
            LegMap::Mhat => mp.mhat[g],
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            LegMap::S => "s",
            LegMap::R => "r",
            LegMap::M => "m",
            LegMap::Mhat => "mhat",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "s" => Ok(LegMap::S),
            "r" => Ok(LegMap::R),
            "m" => Ok(LegMap::M),
            "mhat" | "m^" => Ok(LegMap::Mhat),
            _ => Err(Error::UnknownMapCombination(s.to_string(), String::new())),
        }
    }
}

/// Finite set of morphism tuples with natural weights.
#[derive(Debug, Clone)]
pub struct TupleSpace {
    pub tuples: Vec<Vec<usize>>,
    pub weights: Vec<f64>,
    index: HashMap<Vec<usize>, usize>,
}

impl TupleSpace {
    pub fn new(tuples: Vec<Vec<usize>>, weights: Vec<f64>) -> Self {
        let index = tuples.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect();
        TupleSpace { tuples, weights, index }
    }

    pub fn len(&self) -> usize {
        self.tuples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tuples.is_empty()
    }

    pub fn index_of(&self, t: &[usize]) -> Option<usize> {
        self.index.get(t).copied()
    }

    /// Natural kernel to orthonormal coordinates: `K̃[a,b] = √w(a) K[a,b] / √w(b)`.
    pub fn to_ortho(&self, k: &Mat) -> Mat {
        Mat::from_fn(k.nrows(), k.ncols(), |a, b| k[(a, b)] * c((self.weights[a] / self.weights[b]).sqrt()))
    }

    pub fn from_ortho(&self, k: &Mat) -> Mat {
        Mat::from_fn(k.nrows(), k.ncols(), |a, b| k[(a, b)] * c((self.weights[b] / self.weights[a]).sqrt()))
    }

    /// Multiplication operator by a natural-coordinate function (diagonal in both coordinates).
    pub fn multiplication(&self, f: impl Fn(&[usize]) -> C64) -> Mat {
        let d: Vec<C64> = self.tuples.iter().map(|t| f(t)).collect();
        crate::linalg::diag(&d)
    }
}

/// `L²(G, μ)`.
pub fn single_space(mp: &MatchedPair) -> TupleSpace {
    let n = mp.g.len();
    TupleSpace::new((0..n).map(|g| vec![g]).collect(), mp.mu().to_vec())
}

/// `μ(g')/ν(j(g'))` through the fiber formulas; the `m`, `m̂` cases use the decomposition of `λ`.
pub fn leg_factor(mp: &MatchedPair, j: LegMap, g: usize) -> f64 {
    let gr = &mp.g;
    let delta = mp.delta();
    let nu = mp.nu();
    let lam = &mp.haar.lambda;
    match j {
        LegMap::R => lam[g],
        LegMap::S => {
            let gi = gr.inv(g);
            delta[gi] * lam[gi]
        }
        LegMap::M => {
            let (a, b) = mp.factorize(g);
            nu[gr.r(g)] / nu[mp.m[g]] * mp.lambda1[a] * mp.lambda2[b] * delta[b] * mp.md2.delta[gr.inv(b)]
        }
        LegMap::Mhat => {
            let (b, a) = mp.cofactorize(g);
            nu[gr.r(g)] / nu[mp.mhat[g]] * mp.lambda2[b] * mp.lambda1[a] * delta[a] * mp.md1.delta[gr.inv(a)]
        }
    }
}

/// `L²(G,μ) ⊗ L²(G,μ)` over `i` on the first leg and `j` on the second, realized on
/// `{(g,g') : i(g) = j(g')}` with weight `μ(g)·μ(g')/ν(i(g))`.
pub fn pair_space(mp: &MatchedPair, i: LegMap, j: LegMap) -> TupleSpace {
    let n = mp.g.len();
    let mu = mp.mu();
    let mut tuples = Vec::new();
    let mut weights = Vec::new();
    for g in 0..n {
        let u = i.apply(mp, g);
        for h in 0..n {
            if j.apply(mp, h) == u {
                tuples.push(vec![g, h]);
                weights.push(mu[g] * leg_factor(mp, j, h));
            }
        }
    }
    TupleSpace::new(tuples, weights)
}

/// One fiber constraint `map_a(t[a]) = map_b(t[b])`.
#[derive(Debug, Clone, Copy)]
pub struct Link {
    pub a: usize,
    pub map_a: LegMap,
    pub b: usize,
    pub map_b: LegMap,
}

pub fn link(a: usize, map_a: LegMap, b: usize, map_b: LegMap) -> Link {
    Link { a, map_a, b, map_b }
}

/// Iterated relative tensor product: tuples satisfying every link, weight `Π μ / Π ν(link unit)`.
pub fn tuple_space(mp: &MatchedPair, arity: usize, links: &[Link]) -> TupleSpace {
    let n = mp.g.len();
    let mu = mp.mu();
    let nu = mp.nu();
    let mut tuples = Vec::new();
    let mut weights = Vec::new();
    let mut t = vec![0usize; arity];
    loop {
        if links.iter().all(|l| l.map_a.apply(mp, t[l.a]) == l.map_b.apply(mp, t[l.b])) {
            let num: f64 = t.iter().map(|&g| mu[g]).product();
            let den: f64 = links.iter().map(|l| nu[l.map_a.apply(mp, t[l.a])]).product();
            tuples.push(t.clone());
            weights.push(num / den);
        }
        let mut k = arity;
        loop {
            if k == 0 {
                return TupleSpace::new(tuples, weights);
            }
            k -= 1;
            t[k] += 1;
            if t[k] < n {
                break;
            }
            t[k] = 0;
        }
    }
}

/// Which form of a density formula to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DensityForm {
    Derived,
    /// Middle density with `δ₁(g₁⁻¹)` in place of `δ₁(g₁)`.
    Literal,
}

/// Density of `ω_F∘j` against `ν`, for `F = f·conj(f')` given on morphisms, evaluated by
/// brute-force fiber sums. Returns one value per unit.
pub fn density(mp: &MatchedPair, j: LegMap, f: &[f64], form: DensityForm) -> Vec<f64> {
    let gr = &mp.g;
    let lam = &mp.haar.lambda;
    let delta = mp.delta();
    let (d1, d2) = (&mp.md1.delta, &mp.md2.delta);
    (0..gr.n_units())
        .map(|u| {
            let fib = gr.range_fiber(u);
            match j {
                LegMap::R => fib.iter().map(|&g| f[g] * lam[g]).sum(),
                LegMap::S => fib.iter().map(|&v| delta[v] * f[gr.inv(v)] * lam[v]).sum(),
                LegMap::M => {
                    let mut acc = 0.0;
                    for &g1 in fib.iter().filter(|&&x| mp.in1[x]) {
                        let d1g1 = match form {
                            DensityForm::Derived => d1[g1],
                            DensityForm::Literal => d1[gr.inv(g1)],
                        };
                        for &g2 in fib.iter().filter(|&&x| mp.in2[x]) {
                            let x = gr.mul(gr.inv(g1), g2);
                            acc += f[x] * d1g1 * delta[g2] * d2[gr.inv(g2)] * mp.lambda1[g1] * mp.lambda2[g2];
                        }
                    }
                    acc
                }
                LegMap::Mhat => {
                    let mut acc = 0.0;
                    for &h2 in fib.iter().filter(|&&x| mp.in2[x]) {
                        for &g1 in fib.iter().filter(|&&x| mp.in1[x]) {
                            let x = gr.mul(gr.inv(h2), g1);
                            acc += f[x] * d2[h2] * delta[g1] * d1[gr.inv(g1)] * mp.lambda2[h2] * mp.lambda1[g1];
                        }
                    }
                    acc
                }
            }
        })
        .collect()
}

/// Pair weight from the pre-scalar product `⟨ξ⊗η, ξ⊗η⟩ = ∫ |ξ|² d(ω_η∘j)/dν ∘ i dμ` with
/// point indicators.
pub fn oracle_pair_weight(mp: &MatchedPair, i: LegMap, j: LegMap, g: usize, h: usize, form: DensityForm) -> f64 {
    let mut f = vec![0.0; mp.g.len()];
    f[h] = 1.0;
    mp.mu()[g] * density(mp, j, &f, form)[i.apply(mp, g)]
}

/// Second pairing formula for `μ²_{s,m}` taken verbatim: `δ(a)λ^{s(a)}(a⁻¹)μ(g')` at `(a, g')`.
pub fn literal_sm_weight(mp: &MatchedPair, a: usize, h: usize) -> f64 {
    let ai = mp.g.inv(a);
    mp.delta()[a] * mp.haar.lambda[ai] * mp.mu()[h]
}

#[derive(Debug, Clone)]
pub struct OracleReport {
    /// Worst relative error of the pair-space weights against the oracle, over all 16 map pairs.
    pub max_rel_err: f64,
    pub worst: Option<(LegMap, LegMap)>,
    /// Relative gap of the literal middle density on `P_{s,m}`.
    pub literal_middle_gap: f64,
    /// Relative gap of the literal `μ²_{s,m}` formula.
    pub literal_sm_gap: f64,
}

fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

pub fn oracle_consistency(mp: &MatchedPair) -> OracleReport {
    let mut max_rel_err: f64 = 0.0;
    let mut worst = None;
    let n = mp.g.len();
    // densities of point indicators, one table per map
    let mut tables: HashMap<(LegMap, DensityForm), Vec<Vec<f64>>> = HashMap::new();
    for j in LegMap::ALL {
        for form in [DensityForm::Derived, DensityForm::Literal] {
            let rows = (0..n)
                .map(|h| {
                    let mut f = vec![0.0; n];
                    f[h] = 1.0;
                    density(mp, j, &f, form)
                })
                .collect();
            tables.insert((j, form), rows);
        }
    }
    for i in LegMap::ALL {
        for j in LegMap::ALL {
            let sp = pair_space(mp, i, j);
            let tab = &tables[&(j, DensityForm::Derived)];
            for (t, &w) in sp.tuples.iter().zip(&sp.weights) {
                let o = mp.mu()[t[0]] * tab[t[1]][i.apply(mp, t[0])];
                let e = rel(w, o);
                if e > max_rel_err || worst.is_none() {
                    max_rel_err = max_rel_err.max(e);
                    worst = Some((i, j));
                }
            }
        }
    }
    let sm = pair_space(mp, LegMap::S, LegMap::M);
    let lit = &tables[&(LegMap::M, DensityForm::Literal)];
    let mut literal_middle_gap: f64 = 0.0;
    let mut literal_sm_gap: f64 = 0.0;
    for (t, &w) in sm.tuples.iter().zip(&sm.weights) {
        literal_middle_gap = literal_middle_gap.max(rel(w, mp.mu()[t[0]] * lit[t[1]][mp.g.s(t[0])]));
        literal_sm_gap = literal_sm_gap.max(rel(w, literal_sm_weight(mp, t[0], t[1])));
    }
    OracleReport { max_rel_err, worst, literal_middle_gap, literal_sm_gap }
}

/// Operator with exactly one nonzero entry per column: column `k` maps to row `perm[k]` with
/// coefficient `scal[k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Monomial {
    pub rows: usize,
    pub perm: Vec<usize>,
    pub scal: Vec<C64>,
}

impl Monomial {
    pub fn identity(n: usize) -> Self {
        Monomial { rows: n, perm: (0..n).collect(), scal: vec![ONE; n] }
    }

    pub fn cols(&self) -> usize {
        self.perm.len()
    }

    /// Natural-coordinate point map `(Uξ)(map(t)) = coef(t)·ξ(t)` converted to orthonormal form.
    pub fn from_point_map(
        src: &TupleSpace,
        dst: &TupleSpace,
        mut map: impl FnMut(&[usize]) -> Vec<usize>,
        mut coef: impl FnMut(&[usize]) -> C64,
    ) -> Result<Self> {
        let mut perm = Vec::with_capacity(src.len());
        let mut scal = Vec::with_capacity(src.len());
        let mut hit = vec![false; dst.len()];
        for (k, t) in src.tuples.iter().enumerate() {
            let img = map(t);
            let row = dst.index_of(&img).ok_or_else(|| Error::LegMismatch(format!("image {img:?} of {t:?} outside target")))?;
            if hit[row] {
                return Err(Error::ThetaNotBijective(format!("{img:?} hit twice")));
            }
            hit[row] = true;
            perm.push(row);
            scal.push(coef(t) * c((dst.weights[row] / src.weights[k]).sqrt()));
        }
        Ok(Monomial { rows: dst.len(), perm, scal })
    }

    pub fn is_bijective(&self) -> bool {
        if self.rows != self.cols() {
            return false;
        }
        let mut hit = vec![false; self.rows];
        self.perm.iter().all(|&r| !std::mem::replace(&mut hit[r], true))
    }

    pub fn to_dense(&self) -> Mat {
        let mut m = Mat::zeros(self.rows, self.cols());
        for (k, (&r, &s)) in self.perm.iter().zip(&self.scal).enumerate() {
            m[(r, k)] = s;
        }
        m
    }

    /// Adjoint of a bijective monomial.
    pub fn adjoint(&self) -> Self {
        assert!(self.is_bijective(), "adjoint of a non-bijective monomial");
        let mut perm = vec![0; self.rows];
        let mut scal = vec![ZERO; self.rows];
        for (k, (&r, &s)) in self.perm.iter().zip(&self.scal).enumerate() {
            perm[r] = k;
            scal[r] = s.conj();
        }
        Monomial { rows: self.cols(), perm, scal }
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Monomial) -> Self {
        assert_eq!(self.cols(), other.rows, "dimension mismatch");
        let perm = other.perm.iter().map(|&r| self.perm[r]).collect();
        let scal = other.perm.iter().zip(&other.scal).map(|(&r, &s)| self.scal[r] * s).collect();
        Monomial { rows: self.rows, perm, scal }
    }

    /// `M·A`.
    pub fn lmul(&self, a: &Mat) -> Mat {
        let mut out = Mat::zeros(self.rows, a.ncols());
        for (k, (&r, &s)) in self.perm.iter().zip(&self.scal).enumerate() {
            for j in 0..a.ncols() {
                out[(r, j)] = s * a[(k, j)];
            }
        }
        out
    }

    /// `M* A M`.
    pub fn conj(&self, a: &Mat) -> Mat {
        let n = self.cols();
        Mat::from_fn(n, n, |k, l| self.scal[k].conj() * a[(self.perm[k], self.perm[l])] * self.scal[l])
    }

    /// `L* A R` for monomials with a common row space.
    pub fn sandwich(left: &Monomial, a: &Mat, right: &Monomial) -> Mat {
        Mat::from_fn(left.cols(), right.cols(), |k, l| left.scal[k].conj() * a[(left.perm[k], right.perm[l])] * right.scal[l])
    }

    /// Entrywise complex conjugate.
    pub fn conjugate(&self) -> Self {
        Monomial { rows: self.rows, perm: self.perm.clone(), scal: self.scal.iter().map(|s| s.conj()).collect() }
    }

    /// `M A M*` for bijective `M`.
    pub fn conj_inv(&self, a: &Mat) -> Mat {
        self.adjoint().conj(a)
    }

    /// Largest entrywise difference.
    pub fn dist(&self, other: &Monomial) -> f64 {
        assert_eq!((self.rows, self.cols()), (other.rows, other.cols()), "shape mismatch");
        let mut d: f64 = 0.0;
        for k in 0..self.cols() {
            let (a, b) = (self.scal[k], other.scal[k]);
            d = d.max(if self.perm[k] == other.perm[k] { (a - b).norm() } else { a.norm().max(b.norm()) });
        }
        d
    }

    /// Max deviation of `|scal|` from 1 when bijective, else infinity.
    pub fn unitarity_residual(&self) -> f64 {
        if !self.is_bijective() {
            return f64::INFINITY;
        }
        self.scal.iter().fold(0.0, |m, s| m.max((s.norm_sqr() - 1.0).abs()))
    }
}

/// Calls `emit(row, value)` for the nonzero entries of column `col` of `x` amplified to
/// positions `legs` of `target`.
fn amplified_column(
    x: &Mat,
    leg_space: &TupleSpace,
    target: &TupleSpace,
    legs: &[usize],
    col: usize,
    mut emit: impl FnMut(usize, C64),
) -> Result<()> {
    let t = &target.tuples[col];
    let sub: Vec<usize> = legs.iter().map(|&l| t[l]).collect();
    let b = leg_space.index_of(&sub).ok_or_else(|| Error::LegMismatch(format!("{t:?} has legs outside the leg space")))?;
    let cb = (target.weights[col] / leg_space.weights[b]).sqrt();
    let mut img = t.clone();
    for a in 0..leg_space.len() {
        let v = x[(a, b)];
        if v == ZERO {
            continue;
        }
        for (k, &l) in legs.iter().enumerate() {
            img[l] = leg_space.tuples[a][k];
        }
        let row = target.index_of(&img).ok_or_else(|| Error::LegMismatch(format!("{img:?} leaves the fiber product")))?;
        let ca = (target.weights[row] / leg_space.weights[a]).sqrt();
        emit(row, v * c(ca / cb));
    }
    Ok(())
}

/// Amplifies `x` (orthonormal, on `leg_space`) to act on positions `legs` of `target`, identity
/// on the remaining positions.
pub fn amplify(x: &Mat, leg_space: &TupleSpace, target: &TupleSpace, legs: &[usize]) -> Result<Mat> {
    let n = target.len();
    let mut out = Mat::zeros(n, n);
    for col in 0..n {
        amplified_column(x, leg_space, target, legs, col, |row, v| out[(row, col)] += v)?;
    }
    Ok(out)
}

/// `M*(x amplified on target)M` for a bijective monomial `M` into `target`, without forming
/// the amplified operator.
pub fn amplify_conj(m: &Monomial, x: &Mat, leg_space: &TupleSpace, target: &TupleSpace, legs: &[usize]) -> Result<Mat> {
    let sp = amplify_conj_sparse(m, x, leg_space, target, legs)?;
    let mut out = Mat::zeros(m.cols(), m.cols());
    for (l, col) in sp.cols.iter().enumerate() {
        for &(k, v) in col {
            out[(k, l)] = v;
        }
    }
    Ok(out)
}

/// Sparse form of [`amplify_conj`].
pub fn amplify_conj_sparse(
    m: &Monomial,
    x: &Mat,
    leg_space: &TupleSpace,
    target: &TupleSpace,
    legs: &[usize],
) -> Result<SparseCols> {
    let n = m.cols();
    let mut inv = vec![usize::MAX; m.rows];
    for (k, &r) in m.perm.iter().enumerate() {
        inv[r] = k;
    }
    let mut raw = Vec::with_capacity(n);
    for l in 0..n {
        let sl = m.scal[l];
        let mut col = Vec::new();
        amplified_column(x, leg_space, target, legs, m.perm[l], |row, v| {
            let k = inv[row];
            col.push((k, m.scal[k].conj() * v * sl));
        })?;
        raw.push(col);
    }
    Ok(SparseCols::from_columns(n, raw))
}

/// Amplifies a monomial `x : leg_src → leg_dst` acting on positions `legs`, from `src` into `dst`.
pub fn amplify_monomial(
    x: &Monomial,
    leg_src: &TupleSpace,
    leg_dst: &TupleSpace,
    src: &TupleSpace,
    dst: &TupleSpace,
    legs: &[usize],
) -> Result<Monomial> {
    let mut perm = Vec::with_capacity(src.len());
    let mut scal = Vec::with_capacity(src.len());
    let mut sub = vec![0usize; legs.len()];
    for (col, t) in src.tuples.iter().enumerate() {
        for (k, &l) in legs.iter().enumerate() {
            sub[k] = t[l];
        }
        let b = leg_src.index_of(&sub).ok_or_else(|| Error::LegMismatch(format!("{t:?} has legs outside the leg space")))?;
        let a = x.perm[b];
        let mut img = t.clone();
        for (k, &l) in legs.iter().enumerate() {
            img[l] = leg_dst.tuples[a][k];
        }
        let row = dst.index_of(&img).ok_or_else(|| Error::LegMismatch(format!("{img:?} leaves the fiber product")))?;
        let ratio = (dst.weights[row] / leg_dst.weights[a]).sqrt() / (src.weights[col] / leg_src.weights[b]).sqrt();
        perm.push(row);
        scal.push(x.scal[b] * c(ratio));
    }
    Ok(Monomial { rows: dst.len(), perm, scal })
}

/// `η ↦ φ ⊗ η` (or `η ⊗ φ` when `fixed_leg = 1`) from `L²(G)` into a pair space; `φ` in
/// natural coordinates.
pub fn creation(mp: &MatchedPair, pair: &TupleSpace, phi: &[C64], fixed_leg: usize) -> Mat {
    let mu = mp.mu();
    let free = 1 - fixed_leg;
    let mut out = Mat::zeros(pair.len(), mp.g.len());
    for (row, t) in pair.tuples.iter().enumerate() {
        let h = t[free];
        out[(row, h)] = phi[t[fixed_leg]] * c((pair.weights[row] / mu[h]).sqrt());
    }
    out
}

/// `L_φ* X L_φ'` for an operator `X` on a pair space; the slice by `ω_{φ,φ'}` on the leg `fixed_leg`.
pub fn slice(mp: &MatchedPair, pair: &TupleSpace, x: &Mat, phi: &[C64], phi2: &[C64], fixed_leg: usize) -> Mat {
    let mu = mp.mu();
    let free = 1 - fixed_leg;
    let coef = |row: usize, v: &[C64]| {
        let t = &pair.tuples[row];
        (t[free], v[t[fixed_leg]] * c((pair.weights[row] / mu[t[free]]).sqrt()))
    };
    let mut out = Mat::zeros(mp.g.len(), mp.g.len());
    for col in 0..pair.len() {
        let (b, lb) = coef(col, phi2);
        if lb == ZERO {
            continue;
        }
        for row in 0..pair.len() {
            let v = x[(row, col)];
            if v == ZERO {
                continue;
            }
            let (a, la) = coef(row, phi);
            out[(a, b)] += la.conj() * v * lb;
        }
    }
    out
}

/// The flip `(g, g') ↦ (g', g)` between two pair spaces.
pub fn flip(src: &TupleSpace, dst: &TupleSpace) -> Result<Monomial> {
    Monomial::from_point_map(src, dst, |t| vec![t[1], t[0]], |_| ONE)
}
