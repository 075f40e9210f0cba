//! The staged verification pipeline: validation, decomposition, the unitary, its legs and
//! the quantum groupoid clauses, with a per-clause summary.

use crate::crossed::{base_op, indicator};
use crate::error::{Error, Result};
use crate::groupoid::{FiniteGroupoid, HaarSystem};
use crate::hilbert::{oracle_consistency, LegMap};
use crate::linalg::{commutator, max_abs};
use crate::matched_pair::{
    action_identities, check_measures, decomposition_report, mutual_actions, MatchedPair, MatchedPairDesc,
};
use crate::pmu::{build_w, verify_legs, verify_pmu};
use crate::quantum::{build_coinvolution, QuantumGroupoid};
use crate::report::{Check, Report, StageReport};

#[derive(Debug, Clone)]
pub struct SuiteConfig {
    pub tol: f64,
    pub times: Vec<f64>,
    /// Stage names, check names or dot-separated name components; empty selects everything.
    pub select: Vec<String>,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig { tol: 1e-9, times: vec![0.37, 1.0], select: Vec::new() }
    }
}

impl SuiteConfig {
    fn keeps_stage(&self, stage: &str) -> bool {
        self.select.is_empty() || self.select.iter().any(|s| s == stage)
    }

    fn keeps_check(&self, stage: &str, name: &str) -> bool {
        self.keeps_stage(stage)
            || self
                .select
                .iter()
                .any(|s| name == s || name.split(['.', '@']).any(|part| part == s) || name.starts_with(&format!("{s}.")))
    }

    /// Drops unselected checks and stages left empty; errors are always kept.
    pub fn filter(&self, stages: Vec<StageReport>) -> Vec<StageReport> {
        if self.select.is_empty() {
            return stages;
        }
        stages
            .into_iter()
            .filter_map(|mut st| {
                let name = st.stage.clone();
                st.checks.retain(|c| self.keeps_check(&name, &c.name));
                st.diagnostics.retain(|c| self.keeps_check(&name, &c.name));
                (st.error.is_some() || !st.checks.is_empty() || !st.diagnostics.is_empty()).then_some(st)
            })
            .collect()
    }
}

/// Groupoid, Haar and matched-pair validation. The first failing stage ends the list.
pub fn validation_stages(d: &MatchedPairDesc, tol: f64) -> (Vec<StageReport>, Option<MatchedPair>) {
    let mut stages = Vec::new();
    let mut st = StageReport::new("validate_groupoid");
    match FiniteGroupoid::from_desc(&d.groupoid).and_then(|g| HaarSystem::from_desc(&g, &d.groupoid).map(|_| g)) {
        Ok(g) => {
            st.checks.push(Check::flag("groupoid.axioms", "composition table, units and inverses", true));
            st.diagnostics.push(Check::new("groupoid.morphisms", "number of morphisms", g.len() as f64, f64::INFINITY));
            stages.push(st);
        }
        Err(e) => {
            stages.push(StageReport::failed("validate_groupoid", e));
            return (stages, None);
        }
    }
    let mp = match MatchedPair::assemble(d) {
        Ok(mp) => mp,
        Err(e) => {
            stages.push(StageReport::failed("validate_matched_pair", e));
            return (stages, None);
        }
    };
    let mut st = StageReport::new("validate_matched_pair");
    st.checks.push(Check::flag("matched_pair.factorization", "unique factorization g = p1(g)p2(g) = p2'(g)p1'(g)", true));
    if let Err(e) = check_measures(&mp, tol) {
        st.error = Some(e.to_string());
        stages.push(st);
        return (stages, None);
    }
    st.checks.push(Check::flag("matched_pair.haar_systems", "left invariance of λ, λ₁, λ₂ and modular cocycles", true));
    stages.push(st);
    (stages, Some(mp))
}

fn structure_stage(mp: &MatchedPair, tol: f64) -> StageReport {
    let mut st = StageReport::new("decomposition");
    let dec = decomposition_report(mp, tol);
    st.checks.push(Check::new("decomposition.g1_first", "λ(g) = λ₁(p1)λ₂(p2)δ(p2)δ₂(p2⁻¹)", dec.residual, tol));
    st.checks.push(Check::new("decomposition.g2_first", "λ(g) = λ₂(p2')λ₁(p1')δ(p1')δ₁(p1'⁻¹)", dec.mirror_residual, tol));
    let oracle = oracle_consistency(mp);
    st.checks.push(Check::new(
        "oracle.pair_weights",
        "pair-space weights against brute-force densities",
        oracle.max_rel_err,
        1e-12,
    ));
    st.diagnostics.push(Check::new(
        "oracle.literal_middle_density",
        "middle density with δ₁(g₁⁻¹)",
        oracle.literal_middle_gap,
        1e-12,
    ));
    st.diagnostics.push(Check::new("oracle.literal_sm_pairing", "μ²_{s,m} with δ(a)λ(a⁻¹)μ(g')", oracle.literal_sm_gap, 1e-12));
    let ids = action_identities(mp, &mutual_actions(mp));
    for (name, anchor, count) in [
        ("actions.source", "𝔞∘s₂ = s", ids.source),
        ("actions.middle", "𝔞∘r₂ = m", ids.middle),
        ("actions.middle_hat", "𝔞̂∘s₁ = m", ids.middle_hat),
        ("actions.coaction", "coaction law for 𝔞", ids.coaction),
        ("actions.coaction_hat", "coaction law for 𝔞̂", ids.coaction_hat),
        ("actions.phi_compat", "p2(φ̂(g)) = p2(g)⁻¹", ids.phi_compat),
    ] {
        st.checks.push(Check::new(name, anchor, count as f64, 0.0));
    }
    st
}

fn base_stage(qg: &QuantumGroupoid, tol: f64) -> StageReport {
    let mp = qg.mp;
    let mut st = StageReport::new("base");
    let nu = mp.g.n_units();
    let (mut inside, mut comm): (f64, f64) = (0.0, 0.0);
    for u in 0..nu {
        let n = indicator(nu, u);
        let (m_op, s_op) = (base_op(mp, LegMap::M, &n), base_op(mp, LegMap::S, &n));
        inside = inside.max(qg.carrier.residual(&m_op)).max(qg.carrier.residual(&s_op));
        for v in 0..nu {
            comm = comm.max(max_abs(&commutator(&m_op, &base_op(mp, LegMap::S, &indicator(nu, v)))));
        }
    }
    st.checks.push(Check::new("base.in_algebra", "m(N), s(N) ⊂ M", inside, tol));
    st.checks.push(Check::new("base.commute", "[m(n), s(n')] = 0", comm, tol));
    st.diagnostics.push(Check::new("base.algebra_dim", "dim M", qg.carrier.dim() as f64, f64::INFINITY));
    st
}

fn run<T>(stages: &mut Vec<StageReport>, name: &str, f: impl FnOnce() -> Result<T>) -> Option<T> {
    match f() {
        Ok(v) => Some(v),
        Err(e) => {
            stages.push(StageReport::failed(name, e));
            None
        }
    }
}

/// Every stage on a validated matched pair.
pub fn structure_stages(mp: &MatchedPair, cfg: &SuiteConfig) -> Vec<StageReport> {
    let tol = cfg.tol;
    let mut stages = vec![structure_stage(mp, tol)];
    let Some(pmu) = run(&mut stages, "pmu", || build_w(mp)) else { return stages };
    let mut st = StageReport::new("pmu");
    st.checks = verify_pmu(mp, &pmu, tol);
    stages.push(st);
    if let Some((_, checks)) = run(&mut stages, "legs", || verify_legs(mp, &pmu, tol)) {
        let mut st = StageReport::new("legs");
        st.checks = checks;
        stages.push(st);
    }
    let Some(qg) = run(&mut stages, "base", || QuantumGroupoid::new(mp)) else { return stages };
    stages.push(base_stage(&qg, tol));
    if let Some(st) = run(&mut stages, "coproduct", || qg.coproduct_checks(tol)) {
        stages.push(st);
    }
    if let Some(checks) =
        run(&mut stages, "coinvolution", || build_coinvolution(mp).and_then(|co| qg.coinvolution_checks(&co, tol)))
    {
        let mut st = StageReport::new("coinvolution");
        st.checks = checks;
        stages.push(st);
    }
    if let Some(hw) = run(&mut stages, "haar", || qg.build_haar_weights(tol)) {
        if let Some(checks) = run(&mut stages, "haar", || qg.haar_checks(&hw, tol)) {
            let mut st = StageReport::new("haar");
            st.checks = checks;
            stages.push(st);
        }
        stages.push(qg.modular_checks(&hw, &cfg.times, cfg.tol.max(1e-8)));
    }
    stages.push(axiom_summary(&stages));
    stages
}

/// Per-clause summary of the measured quantum groupoid axioms.
fn axiom_summary(stages: &[StageReport]) -> StageReport {
    let mut st = StageReport::new("axioms");
    let clauses: [(&str, &str, &[&str]); 4] = [
        ("axiom.i_bases", "base algebras inside M and commuting", &["base."]),
        (
            "axiom.ii_coproduct",
            "Γ is a coassociative injective *-homomorphism into M⋆M fixing the bases",
            &[
                "gamma.unital",
                "gamma.bases",
                "gamma.multiplicative",
                "gamma.injective",
                "gamma.into_fibered_product",
                "gamma.coassociativity",
            ],
        ),
        ("axiom.iii_invariance", "left and right invariance in weight form", &["haar.left_invariance", "haar.right_invariance"]),
        ("axiom.iv_modular", "the two modular flows commute", &["modular.flows_commute"]),
    ];
    for (name, anchor, prefixes) in clauses {
        let picked: Vec<&Check> =
            stages.iter().flat_map(|s| s.checks.iter()).filter(|c| prefixes.iter().any(|p| c.name.starts_with(p))).collect();
        let failed_stage = stages.iter().any(|s| s.error.is_some());
        let residual = picked.iter().map(|c| c.residual).fold(0.0, f64::max);
        let pass = !picked.is_empty() && !failed_stage && picked.iter().all(|c| c.pass);
        st.checks.push(Check {
            name: name.into(),
            anchor: anchor.into(),
            residual: if picked.is_empty() { f64::NAN } else { residual },
            pass,
        });
    }
    st
}

/// Full pipeline from a raw description.
pub fn axiom_suite(d: &MatchedPairDesc, cfg: &SuiteConfig) -> Report {
    let (mut stages, mp) = validation_stages(d, cfg.tol);
    if let Some(mp) = mp {
        stages.extend(structure_stages(&mp, cfg));
    }
    Report::from_stages(cfg.filter(stages))
}

/// Input errors (exit code 2) versus failed checks (exit code 1).
pub fn is_input_error(e: &Error) -> bool {
    matches!(e, Error::ParseError(_) | Error::UnknownId(_) | Error::UnknownExample(_))
}
