//! The experiment registry: named, seeded scenarios that exercise the core
//! constructions and report every checked bound as machine-readable
//! {claimed, observed, satisfied} entries.

use std::collections::BTreeMap;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use qclab_core::commit::{self, Commitment};
use qclab_core::dqre::{self, expand_plaintext, hybrid_equiv_check, ReferenceDqre};
use qclab_core::money::{
    self, attack_search, check, cloning_game_exact, correctness_transform, parallel_combine,
    CloningAttack, MiniScheme, MoneyAttackSearchConfig,
};
use qclab_core::owsg::{self, universal_from_registry, CandidateRegistry, OwsgScheme, RegistryEntry};
use qclab_core::qmath::linalg::trace_norm_hermitian;
use qclab_core::unclone::{self, cloning_game_value, SplitStrategy, UnclonableSke};
use qclab_core::SplitRng;

use crate::schema::{CommitmentJson, OwsgSchemeJson};

/// Registered experiment names.
pub const EXPERIMENTS: &[&str] = &[
    "commit-eval",
    "commit-convert",
    "commit-amplify",
    "commit-combine",
    "owsg-eval",
    "owsg-transform",
    "owsg-combine",
    "owsg-universal",
    "money-check",
    "money-transform",
    "money-combine",
    "money-clone",
    "unclone-eval",
    "unclone-transform",
    "unclone-normalize",
    "unclone-combine",
    "unclone-game",
    "expand-roundtrip",
    "expand-hybrid",
];

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub experiment: String,
    #[serde(default)]
    pub params: BTreeMap<String, Value>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub out: Option<String>,
}

/// One checked claim: the bound value the construction promises, the value
/// the run observed, and whether the check passed. `anchor` is a stable
/// identifier for the claim so reports can be grepped.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoundCheck {
    pub name: String,
    pub claimed: f64,
    pub observed: f64,
    pub satisfied: bool,
    pub anchor: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ExperimentReport {
    pub experiment: String,
    pub params: BTreeMap<String, Value>,
    pub seed: u64,
    pub metrics: BTreeMap<String, f64>,
    pub bounds: Vec<BoundCheck>,
    pub wall_time_ms: u128,
}

impl ExperimentReport {
    pub fn all_satisfied(&self) -> bool {
        self.bounds.iter().all(|b| b.satisfied)
    }

    /// Serialized view with the timing stripped, for determinism checks.
    pub fn deterministic_view(&self) -> String {
        let mut v = serde_json::to_value(self).expect("report serializes");
        v.as_object_mut().unwrap().remove("wallTimeMs");
        serde_json::to_string(&v).expect("value serializes")
    }
}

#[derive(Debug)]
pub enum RunError {
    Config(String),
    Scheme(String),
}

impl std::fmt::Display for RunError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RunError::Config(m) => write!(f, "config error: {m}"),
            RunError::Scheme(m) => write!(f, "scheme error: {m}"),
        }
    }
}

impl std::error::Error for RunError {}

pub fn list_experiments() -> Vec<&'static str> {
    EXPERIMENTS.to_vec()
}

/// Static diagnostics for a config; empty means runnable.
pub fn validate(config: &ExperimentConfig) -> Vec<String> {
    let mut diags = Vec::new();
    if config.experiment.is_empty() {
        diags.push("experiment name required".to_string());
    } else if !EXPERIMENTS.contains(&config.experiment.as_str()) {
        diags.push(format!("unknown experiment '{}'", config.experiment));
    }
    if config.seed.is_none() {
        diags.push("seed required".to_string());
    }
    for key in config.params.keys() {
        if !["lambda", "trials", "corpus", "scheme", "schemes", "attack", "p", "n", "m0", "m1",
            "iters", "keys", "restarts", "tol", "labelLen", "components"]
        .contains(&key.as_str())
        {
            diags.push(format!("unknown parameter '{key}'"));
        }
    }
    diags
}

struct Ctx {
    params: BTreeMap<String, Value>,
    metrics: BTreeMap<String, f64>,
    bounds: Vec<BoundCheck>,
    tol: f64,
}

impl Ctx {
    fn new(params: &BTreeMap<String, Value>) -> Self {
        let tol = params
            .get("tol")
            .and_then(Value::as_f64)
            .unwrap_or(1e-9);
        Ctx {
            params: params.clone(),
            metrics: BTreeMap::new(),
            bounds: Vec::new(),
            tol,
        }
    }

    fn u64(&self, key: &str, default: u64) -> u64 {
        self.params.get(key).and_then(Value::as_u64).unwrap_or(default)
    }

    fn f64(&self, key: &str, default: f64) -> f64 {
        self.params.get(key).and_then(Value::as_f64).unwrap_or(default)
    }

    fn str(&self, key: &str, default: &str) -> String {
        self.params
            .get(key)
            .and_then(Value::as_str)
            .unwrap_or(default)
            .to_string()
    }

    fn metric(&mut self, name: &str, value: f64) {
        self.metrics.insert(name.to_string(), value);
    }

    /// observed <= claimed + tol.
    fn upper(&mut self, name: &str, anchor: &str, claimed: f64, observed: f64) {
        self.bounds.push(BoundCheck {
            name: name.to_string(),
            claimed,
            observed,
            satisfied: observed <= claimed + self.tol,
            anchor: anchor.to_string(),
        });
    }

    /// observed >= claimed - tol.
    fn lower(&mut self, name: &str, anchor: &str, claimed: f64, observed: f64) {
        self.bounds.push(BoundCheck {
            name: name.to_string(),
            claimed,
            observed,
            satisfied: observed >= claimed - self.tol,
            anchor: anchor.to_string(),
        });
    }

    /// |observed - claimed| <= tol.
    fn equal(&mut self, name: &str, anchor: &str, claimed: f64, observed: f64) {
        self.bounds.push(BoundCheck {
            name: name.to_string(),
            claimed,
            observed,
            satisfied: (observed - claimed).abs() <= self.tol,
            anchor: anchor.to_string(),
        });
    }

    /// A hard (tolerance-free) predicate with the numbers it compared.
    fn hard(&mut self, name: &str, anchor: &str, claimed: f64, observed: f64, satisfied: bool) {
        self.bounds.push(BoundCheck {
            name: name.to_string(),
            claimed,
            observed,
            satisfied,
            anchor: anchor.to_string(),
        });
    }
}

fn commit_scheme(name: &str, rng: &mut SplitRng) -> Result<Commitment, RunError> {
    match name {
        "bb84" => Ok(commit::candidates::bb84()),
        "orthogonal" => Ok(commit::candidates::orthogonal()),
        "constant" => Ok(commit::candidates::constant()),
        "random" => Ok(commit::candidates::random_two_qubit(rng)),
        path if path.ends_with(".json") => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| RunError::Scheme(format!("{path}: {e}")))?;
            let parsed: CommitmentJson = serde_json::from_str(&text)
                .map_err(|e| RunError::Scheme(format!("{path}: {e}")))?;
            parsed
                .to_commitment()
                .map_err(|e| RunError::Scheme(format!("{path}: {e}")))
        }
        other => Err(RunError::Config(format!("unknown commitment scheme '{other}'"))),
    }
}

fn owsg_scheme(name: &str, rng: &mut SplitRng) -> Result<OwsgScheme, RunError> {
    match name {
        "basis" => Ok(owsg::candidates::basis_keys(vec![0.5, 0.5])),
        "perfect" => Ok(owsg::candidates::perfectly_correct()),
        "reject" => Ok(owsg::candidates::always_reject()),
        "half" => Ok(owsg::candidates::half_correct()),
        "random" => Ok(owsg::candidates::random_scheme(rng)),
        path if path.ends_with(".json") => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| RunError::Scheme(format!("{path}: {e}")))?;
            let parsed: OwsgSchemeJson = serde_json::from_str(&text)
                .map_err(|e| RunError::Scheme(format!("{path}: {e}")))?;
            parsed
                .to_scheme()
                .map_err(|e| RunError::Scheme(format!("{path}: {e}")))
        }
        other => Err(RunError::Config(format!("unknown owsg scheme '{other}'"))),
    }
}

fn money_scheme(name: &str) -> Result<MiniScheme, RunError> {
    if let Some(p) = name.strip_prefix("p:") {
        let p: f64 = p
            .parse()
            .map_err(|_| RunError::Config(format!("bad acceptance '{name}'")))?;
        return Ok(money::candidates::constant_acceptance(p));
    }
    match name {
        "classical" => Ok(money::candidates::classical_note()),
        "bb84" => Ok(money::candidates::bb84_money()),
        "fixed" => Ok(money::candidates::fixed_note()),
        other => Err(RunError::Config(format!("unknown money scheme '{other}'"))),
    }
}

fn unclone_scheme(name: &str, rng: &mut SplitRng) -> Result<UnclonableSke, RunError> {
    match name {
        "passthrough1" => Ok(unclone::candidates::passthrough(1, 1)),
        "passthrough2" => Ok(unclone::candidates::passthrough(2, 1)),
        "qotp" => Ok(unclone::candidates::qotp_one_qubit()),
        "broken" => Ok(unclone::candidates::broken_decryptor()),
        "noise" => Ok(unclone::candidates::noise_scheme()),
        "random" => Ok(unclone::candidates::random_scheme(rng)),
        other => Err(RunError::Config(format!("unknown unclone scheme '{other}'"))),
    }
}

fn parse_bits(s: &str) -> Result<Vec<bool>, RunError> {
    if s.is_empty() || s.chars().any(|c| c != '0' && c != '1') {
        return Err(RunError::Config(format!("'{s}' is not a bitstring")));
    }
    Ok(s.chars().map(|c| c == '1').collect())
}

/// Runs a named experiment; the report is byte-stable for a fixed config and
/// seed, apart from the wall-clock field.
pub fn run(config: &ExperimentConfig) -> Result<ExperimentReport, RunError> {
    let diags = validate(config);
    if !diags.is_empty() {
        return Err(RunError::Config(diags.join("; ")));
    }
    let seed = config.seed.expect("validated");
    let start = Instant::now();
    let mut ctx = Ctx::new(&config.params);
    let mut rng = SplitRng::from_seed(seed);

    match config.experiment.as_str() {
        "commit-eval" => run_commit_eval(&mut ctx, &mut rng)?,
        "commit-convert" => run_commit_convert(&mut ctx, &mut rng)?,
        "commit-amplify" => run_commit_amplify(&mut ctx, &mut rng)?,
        "commit-combine" => run_commit_combine(&mut ctx, &mut rng)?,
        "owsg-eval" => run_owsg_eval(&mut ctx, &mut rng)?,
        "owsg-transform" => run_owsg_transform(&mut ctx, &mut rng)?,
        "owsg-combine" => run_owsg_combine(&mut ctx, &mut rng)?,
        "owsg-universal" => run_owsg_universal(&mut ctx, &mut rng)?,
        "money-check" => run_money_check(&mut ctx, &mut rng)?,
        "money-transform" => run_money_transform(&mut ctx, &mut rng)?,
        "money-combine" => run_money_combine(&mut ctx, &mut rng)?,
        "money-clone" => run_money_clone(&mut ctx, &mut rng)?,
        "unclone-eval" => run_unclone_eval(&mut ctx, &mut rng)?,
        "unclone-transform" => run_unclone_transform(&mut ctx, &mut rng)?,
        "unclone-normalize" => run_unclone_normalize(&mut ctx, &mut rng)?,
        "unclone-combine" => run_unclone_combine(&mut ctx, &mut rng)?,
        "unclone-game" => run_unclone_game(&mut ctx, &mut rng)?,
        "expand-roundtrip" => run_expand_roundtrip(&mut ctx, &mut rng)?,
        "expand-hybrid" => run_expand_hybrid(&mut ctx, &mut rng)?,
        other => return Err(RunError::Config(format!("unknown experiment '{other}'"))),
    }

    Ok(ExperimentReport {
        experiment: config.experiment.clone(),
        params: config.params.clone(),
        seed,
        metrics: ctx.metrics,
        bounds: ctx.bounds,
        wall_time_ms: start.elapsed().as_millis(),
    })
}

fn run_commit_eval(ctx: &mut Ctx, rng: &mut SplitRng) -> Result<(), RunError> {
    let scheme = commit_scheme(&ctx.str("scheme", "bb84"), rng)?;
    let m = scheme.metrics();
    ctx.metric("f", m.f);
    ctx.metric("hidingTd", m.hiding_td);
    ctx.metric("bindingAmp", m.binding_amp);
    ctx.upper("hiding-td-upper", "fuchs-van-de-graaf", (1.0 - m.f).sqrt(), m.hiding_td);
    ctx.lower("hiding-td-lower", "fuchs-van-de-graaf", 1.0 - m.f.sqrt(), m.hiding_td);
    ctx.equal(
        "binding-amp-squares-to-f",
        "uhlmann-binding-optimum",
        m.f,
        m.binding_amp * m.binding_amp,
    );
    Ok(())
}

fn run_commit_convert(ctx: &mut Ctx, rng: &mut SplitRng) -> Result<(), RunError> {
    let scheme = commit_scheme(&ctx.str("scheme", "bb84"), rng)?;
    let m = scheme.metrics();
    let converted = scheme
        .flavor_convert()
        .map_err(|e| RunError::Scheme(e.to_string()))?;
    let mc = converted.metrics();
    ctx.metric("f", m.f);
    ctx.metric("convertedF", mc.f);
    ctx.metric("convertedHidingTd", mc.hiding_td);
    ctx.upper(
        "converted-fidelity",
        "flavor-conversion-binding",
        (1.0 - m.f).sqrt(),
        mc.f,
    );
    if m.f < ctx.tol {
        // A perfectly binding input converts to a perfectly hiding output.
        ctx.upper("converted-hiding", "flavor-conversion-hiding", 0.0, mc.hiding_td);
    }
    Ok(())
}

fn run_commit_amplify(ctx: &mut Ctx, rng: &mut SplitRng) -> Result<(), RunError> {
    let scheme = commit_scheme(&ctx.str("scheme", "bb84"), rng)?;
    let lam = ctx.u64("lambda", 2) as usize;
    let f = scheme.metrics().f;
    let f_tilde = scheme
        .flavor_convert()
        .map_err(|e| RunError::Scheme(e.to_string()))?
        .metrics()
        .f;
    let amplified = scheme
        .amplify(lam)
        .map_err(|e| RunError::Scheme(e.to_string()))?;
    let ma = amplified.metrics();
    ctx.metric("f", f);
    ctx.metric("convertedF", f_tilde);
    ctx.metric("amplifiedF", ma.f);
    ctx.metric("amplifiedHidingTd", ma.hiding_td);
    ctx.equal(
        "amplified-fidelity-product",
        "binding-amplification-product",
        (f * f_tilde).powi(lam as i32),
        ma.f,
    );
    ctx.upper(
        "amplified-fidelity-chain",
        "binding-amplification-chain",
        f.powi(lam as i32) * (1.0 - f).powf(lam as f64 / 2.0),
        ma.f,
    );
    ctx.upper(
        "amplified-fidelity-half-power",
        "binding-amplification-chain",
        2f64.powf(-(lam as f64) / 2.0),
        ma.f,
    );
    Ok(())
}

fn run_commit_combine(ctx: &mut Ctx, rng: &mut SplitRng) -> Result<(), RunError> {
    let names = ctx.str("schemes", "bb84,orthogonal");
    let components: Vec<Commitment> = names
        .split(',')
        .map(|n| commit_scheme(n.trim(), rng))
        .collect::<Result<_, _>>()?;
    let lam = ctx.u64("lambda", 0) as usize;
    let (combined, parts): (Commitment, Vec<Commitment>) = if lam == 0 {
        (
            commit::xor_combine(&components).map_err(|e| RunError::Scheme(e.to_string()))?,
            components,
        )
    } else {
        let amplified: Vec<Commitment> = components
            .iter()
            .map(|c| c.amplify(lam))
            .collect::<Result<_, _>>()
            .map_err(|e| RunError::Scheme(e.to_string()))?;
        (
            commit::xor_combine(&amplified).map_err(|e| RunError::Scheme(e.to_string()))?,
            amplified,
        )
    };
    let tds: Vec<f64> = parts.iter().map(|c| c.metrics().hiding_td).collect();
    let m = combined.metrics();
    ctx.metric("combinedHidingTd", m.hiding_td);
    ctx.metric("combinedF", m.f);
    let product: f64 = tds.iter().product();
    let min_td = tds.iter().fold(f64::INFINITY, |a, &b| a.min(b));
    ctx.lower("combined-hiding-product", "xor-binding-expansion", product, m.hiding_td);
    ctx.upper("combined-hiding-min", "xor-hiding-contraction", min_td, m.hiding_td);
    Ok(())
}

fn run_owsg_eval(ctx: &mut Ctx, rng: &mut SplitRng) -> Result<(), RunError> {
    let scheme = owsg_scheme(&ctx.str("scheme", "basis"), rng)?;
    let corr = scheme.correctness();
    let (_, blind) = scheme.blind_attack_value();
    let omni = scheme.omniscient_attack_value();
    ctx.metric("correctness", corr);
    ctx.metric("blindAttack", blind);
    ctx.metric("omniscientAttack", omni);
    ctx.upper("blind-below-omniscient", "attack-bracket", omni, blind);
    Ok(())
}

fn run_owsg_transform(ctx: &mut Ctx, rng: &mut SplitRng) -> Result<(), RunError> {
    let corpus = ctx.u64("corpus", 500) as usize;
    let mut min_corr = f64::INFINITY;
    let mut max_slack = f64::NEG_INFINITY;
    for i in 0..corpus {
        // Mix pathological fixed schemes into the random corpus.
        let scheme = match i % 10 {
            0 => owsg::candidates::always_reject(),
            1 => owsg::candidates::half_correct(),
            _ => owsg::candidates::random_scheme(rng),
        };
        let t = scheme
            .gentle_transform()
            .map_err(|e| RunError::Scheme(e.to_string()))?;
        min_corr = min_corr.min(t.scheme().correctness());
        for k in 0..scheme.key_count() {
            let eps = (1.0 - scheme.accept_prob(k, scheme.state(k))).max(0.0);
            let anc = scheme.ancilla_qubits() + 1;
            let mut ref_mat = scheme.state(k).matrix().clone();
            for q in 0..anc {
                let bit = if q == anc - 1 { 1 } else { 0 };
                ref_mat = ref_mat.kron(&qclab_core::qmath::embed::basis_projector(2, bit));
            }
            let dist =
                0.5 * trace_norm_hermitian(&t.scheme().state(k).matrix().sub(&ref_mat));
            max_slack = max_slack.max(dist - 2.0 * eps.sqrt());
        }
    }
    ctx.metric("minCorrectness", min_corr);
    ctx.metric("maxDistanceSlack", max_slack);
    ctx.equal("transformed-correctness-one", "gentle-transform-correctness", 1.0, min_corr);
    ctx.upper("gentle-distance-bound", "gentle-measurement", 0.0, max_slack);
    Ok(())
}

fn run_owsg_combine(ctx: &mut Ctx, rng: &mut SplitRng) -> Result<(), RunError> {
    let count = ctx.u64("n", 2) as usize;
    let components: Vec<OwsgScheme> = (0..count)
        .map(|_| owsg::candidates::random_scheme(rng))
        .collect();
    let combined =
        owsg::parallel_combine(&components).map_err(|e| RunError::Scheme(e.to_string()))?;
    let product: f64 = components
        .iter()
        .map(|c| {
            c.gentle_transform()
                .map(|t| t.scheme().blind_attack_value().1)
        })
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| RunError::Scheme(e.to_string()))?
        .iter()
        .product();
    let v = combined.blind_attack_value().1;
    ctx.metric("combinedBlind", v);
    ctx.metric("componentProduct", product);
    ctx.metric("combinedCorrectness", combined.correctness());
    ctx.equal("blind-factorization", "parallel-combiner-factorization", product, v);
    ctx.equal(
        "combined-correctness-one",
        "gentle-transform-correctness",
        1.0,
        combined.correctness(),
    );
    Ok(())
}

fn run_owsg_universal(ctx: &mut Ctx, _rng: &mut SplitRng) -> Result<(), RunError> {
    let lam = ctx.u64("lambda", 2) as usize;
    let budget = (lam * lam * lam) as u64;
    let registry = CandidateRegistry::new(vec![
        RegistryEntry {
            index: 1,
            declared_step_cost: budget + 1,
            generator: Box::new(|_| owsg::candidates::perfectly_correct()),
        },
        RegistryEntry {
            index: 2,
            declared_step_cost: budget,
            generator: Box::new(|_| owsg::candidates::basis_keys(vec![0.5, 0.5])),
        },
    ])
    .map_err(|e| RunError::Scheme(e.to_string()))?;
    let universal =
        universal_from_registry(&registry, lam).map_err(|e| RunError::Scheme(e.to_string()))?;
    let honest = owsg::candidates::basis_keys(vec![0.5, 0.5])
        .gentle_transform()
        .map_err(|e| RunError::Scheme(e.to_string()))?;
    let v = universal.blind_attack_value().1;
    let v_honest = honest.scheme().blind_attack_value().1;
    ctx.metric("universalCorrectness", universal.correctness());
    ctx.metric("universalBlind", v);
    ctx.metric("honestBlind", v_honest);
    ctx.equal(
        "universal-correctness-one",
        "gentle-transform-correctness",
        1.0,
        universal.correctness(),
    );
    ctx.equal("universal-blind-matches-honest", "step-budget-wrapper", v_honest, v);
    Ok(())
}

fn run_money_check(ctx: &mut Ctx, rng: &mut SplitRng) -> Result<(), RunError> {
    let lam = ctx.u64("lambda", 144) as usize;
    let trials = ctx.u64("trials", 10_000) as usize;
    let p = ctx.f64("p", 0.5);
    let scheme = money::candidates::constant_acceptance(p);
    let mut passes = 0usize;
    for _ in 0..trials {
        if check(&scheme, lam, rng) {
            passes += 1;
        }
    }
    let rate = passes as f64 / trials as f64;
    ctx.metric("checkPassRate", rate);
    let tail = 2.0 * (-(lam as f64) / 72.0).exp();
    if p < 5.0 / 6.0 {
        ctx.hard("check-false-accept", "mint-check-tail", tail, rate, rate <= tail);
    } else if p >= 11.0 / 12.0 {
        ctx.hard(
            "check-accepts-good-scheme",
            "mint-check-tail",
            1.0 - tail,
            rate,
            rate >= 1.0 - tail,
        );
    } else {
        ctx.hard("check-rate-in-range", "mint-check-tail", 1.0, rate, rate <= 1.0);
    }
    Ok(())
}

fn run_money_transform(ctx: &mut Ctx, rng: &mut SplitRng) -> Result<(), RunError> {
    let lam = ctx.u64("lambda", 144) as usize;
    let trials = ctx.u64("trials", 2_000) as usize;
    let p = ctx.f64("p", 0.95);
    let transformed = correctness_transform(&money::candidates::constant_acceptance(p), lam);
    let (est, sigma) = transformed.correctness_estimate(trials, rng);
    let floor = 1.0 - 4.0 * (-(lam as f64) / 72.0).exp() - 3.0 * sigma.max(1e-4);
    ctx.metric("correctnessEstimate", est);
    ctx.metric("sigma", sigma);
    ctx.hard(
        "transform-correctness-floor",
        "transform-correctness-tail",
        floor,
        est,
        est >= floor,
    );
    Ok(())
}

fn run_money_combine(ctx: &mut Ctx, rng: &mut SplitRng) -> Result<(), RunError> {
    let lam = ctx.u64("lambda", 48) as usize;
    let trials = ctx.u64("trials", 500) as usize;
    let names = ctx.str("schemes", "p:0.0,p:1.0");
    let schemes: Vec<MiniScheme> = names
        .split(',')
        .map(|n| money_scheme(n.trim()))
        .collect::<Result<_, _>>()?;
    let n = schemes.len() as f64;
    let combined = parallel_combine(&schemes, lam);
    let (est, sigma) = combined.correctness_estimate(trials, rng);
    let floor = 1.0 - 4.0 * n * (-(lam as f64) / 72.0).exp() - 3.0 * sigma.max(1e-4);
    ctx.metric("correctnessEstimate", est);
    ctx.metric("sigma", sigma);
    ctx.hard(
        "combined-correctness-floor",
        "combiner-union-bound",
        floor,
        est,
        est >= floor,
    );
    Ok(())
}

fn run_money_clone(ctx: &mut Ctx, rng: &mut SplitRng) -> Result<(), RunError> {
    let scheme_name = ctx.str("scheme", "bb84");
    let attack_name = ctx.str("attack", "copy");
    let scheme = money_scheme(&scheme_name)?;
    let value = match attack_name.as_str() {
        "copy" => cloning_game_exact(&scheme, &CloningAttack::copy_basis(scheme.note_layout()))
            .map_err(|e| RunError::Scheme(e.to_string()))?,
        "discard" => cloning_game_exact(
            &scheme,
            &CloningAttack::discard_to_mixed(scheme.note_layout()),
        )
        .map_err(|e| RunError::Scheme(e.to_string()))?,
        "search" => {
            let cfg = MoneyAttackSearchConfig {
                restarts: ctx.u64("restarts", 4) as usize,
                ..Default::default()
            };
            attack_search(&scheme, &cfg, rng)
                .map_err(|e| RunError::Scheme(e.to_string()))?
                .1
        }
        other => return Err(RunError::Config(format!("unknown attack '{other}'"))),
    };
    ctx.metric("cloneValue", value);
    ctx.upper("clone-value-probability", "cloning-game-range", 1.0, value);
    match (scheme_name.as_str(), attack_name.as_str()) {
        ("bb84", "copy") => ctx.equal(
            "clone-value-bb84-copy",
            "measure-resend-value",
            0.625,
            value,
        ),
        ("classical", _) if attack_name != "discard" => ctx.hard(
            "clone-reaches-copy-value",
            "classical-notes-clone",
            0.999,
            value,
            value >= 0.999,
        ),
        ("fixed", "search") => ctx.lower(
            "clone-prepares-public-note",
            "public-note-refresh",
            1.0,
            value,
        ),
        _ => {}
    }
    Ok(())
}

fn run_unclone_eval(ctx: &mut Ctx, rng: &mut SplitRng) -> Result<(), RunError> {
    let name = ctx.str("scheme", "qotp");
    let scheme = unclone_scheme(&name, rng)?;
    let corr = scheme.correctness();
    let ind = scheme.ind_advantage();
    ctx.metric("correctness", corr);
    ctx.metric("indAdvantage", ind);
    match name.as_str() {
        "qotp" => ctx.upper("one-time-pad-secrecy", "pauli-twirl-hiding", 0.0, ind),
        "passthrough1" | "passthrough2" => {
            ctx.equal("clear-scheme-distinguishable", "plaintext-in-clear", 1.0, ind)
        }
        _ => {}
    }
    Ok(())
}

fn run_unclone_transform(ctx: &mut Ctx, rng: &mut SplitRng) -> Result<(), RunError> {
    let corpus = ctx.u64("corpus", 500) as usize;
    let mut min_corr = f64::INFINITY;
    let mut max_slack = f64::NEG_INFINITY;
    for i in 0..corpus {
        let scheme = match i % 10 {
            0 => unclone::candidates::broken_decryptor(),
            1 => unclone::candidates::noise_scheme(),
            _ => unclone::candidates::random_scheme(rng),
        };
        let t = scheme
            .gentle_transform()
            .map_err(|e| RunError::Scheme(e.to_string()))?;
        min_corr = min_corr.min(t.scheme().correctness());
        for k in 0..scheme.key_count() {
            for m in 0..scheme.msg_count() {
                let eps = (1.0 - scheme.decrypt_success(k, m)).max(0.0);
                let anc = scheme.dec_ancilla() + 1;
                let mut ref_mat = scheme.ciphertext(k, m).matrix().clone();
                for q in 0..anc {
                    let bit = if q == anc - 1 { 1 } else { 0 };
                    ref_mat = ref_mat.kron(&qclab_core::qmath::embed::basis_projector(2, bit));
                }
                let dist = 0.5
                    * trace_norm_hermitian(&t.scheme().ciphertext(k, m).matrix().sub(&ref_mat));
                max_slack = max_slack.max(dist - 2.0 * eps.sqrt());
            }
        }
    }
    ctx.metric("minCorrectness", min_corr);
    ctx.metric("maxDistanceSlack", max_slack);
    ctx.equal("transformed-correctness-one", "gentle-transform-correctness", 1.0, min_corr);
    ctx.upper("gentle-distance-bound", "gentle-measurement", 0.0, max_slack);
    Ok(())
}

fn run_unclone_normalize(ctx: &mut Ctx, rng: &mut SplitRng) -> Result<(), RunError> {
    let scheme = unclone_scheme(&ctx.str("scheme", "qotp"), rng)?;
    let normalized = scheme
        .normalize_key()
        .map_err(|e| RunError::Scheme(e.to_string()))?;
    let uniform = 1.0 / normalized.key_count() as f64;
    let max_dev = normalized
        .key_weights()
        .iter()
        .map(|w| (w - uniform).abs())
        .fold(0.0f64, f64::max);
    ctx.metric("maxWeightDeviation", max_dev);
    ctx.metric("correctness", scheme.correctness());
    ctx.metric("normalizedCorrectness", normalized.correctness());
    ctx.hard(
        "uniform-key-marginal",
        "key-normalization-marginal",
        0.0,
        max_dev,
        max_dev <= 1e-12,
    );
    ctx.equal(
        "normalization-preserves-correctness",
        "key-normalization-correctness",
        scheme.correctness(),
        normalized.correctness(),
    );
    Ok(())
}

fn run_unclone_combine(ctx: &mut Ctx, rng: &mut SplitRng) -> Result<(), RunError> {
    let names = ctx.str("components", "passthrough1,qotp");
    let components: Vec<UnclonableSke> = names
        .split(',')
        .map(|n| unclone_scheme(n.trim(), rng))
        .collect::<Result<_, _>>()?;
    let combined =
        unclone::xor_combine(&components).map_err(|e| RunError::Scheme(e.to_string()))?;
    let mut min_success = f64::INFINITY;
    for k in 0..combined.key_count() {
        for m in 0..combined.msg_count() {
            min_success = min_success.min(combined.decrypt_success(k, m));
        }
    }
    let min_ind = components
        .iter()
        .map(|c| c.ind_advantage())
        .fold(f64::INFINITY, f64::min);
    let ind = combined.ind_advantage();
    ctx.metric("minRoundtrip", min_success);
    ctx.metric("combinedInd", ind);
    ctx.metric("minComponentInd", min_ind);
    ctx.equal("combined-roundtrip", "xor-share-roundtrip", 1.0, min_success);
    ctx.upper("combined-ind-contraction", "xor-hiding-contraction", min_ind, ind);
    Ok(())
}

fn run_unclone_game(ctx: &mut Ctx, rng: &mut SplitRng) -> Result<(), RunError> {
    let scheme = unclone_scheme(&ctx.str("scheme", "passthrough1"), rng)?;
    let attack_name = ctx.str("attack", "broadcast");
    let attack = match attack_name.as_str() {
        "broadcast" => SplitStrategy::broadcast(scheme.ct_layout()),
        "all-to-b" => SplitStrategy::all_to_b(scheme.ct_layout()),
        other => return Err(RunError::Config(format!("unknown attack '{other}'"))),
    };
    let m0 = ctx.u64("m0", 0) as usize;
    let m1 = ctx.u64("m1", 1) as usize;
    let iters = ctx.u64("iters", 30) as usize;
    let report = cloning_game_value(&scheme, &attack, m0, m1, iters, rng)
        .map_err(|e| RunError::Scheme(e.to_string()))?;
    ctx.metric("gameValue", report.value);
    ctx.metric("iterations", report.iterations as f64);
    let min_step = report
        .per_iteration_values
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(f64::INFINITY, f64::min);
    ctx.metric("minSeesawStep", if min_step.is_finite() { min_step } else { 0.0 });
    ctx.hard(
        "game-floor-half",
        "constant-guess-floor",
        0.5,
        report.value,
        report.value >= 0.5 - 1e-9,
    );
    ctx.upper("game-value-probability", "cloning-game-range", 1.0, report.value);
    ctx.hard(
        "seesaw-monotone",
        "seesaw-monotonicity",
        0.0,
        min_step.min(0.0),
        min_step >= -1e-12,
    );
    if scheme.ind_advantage() > 0.999 && attack_name == "broadcast" {
        ctx.hard(
            "broadcast-clones-clear-scheme",
            "classical-broadcast-attack",
            1.0 - 1e-6,
            report.value,
            report.value >= 1.0 - 1e-6,
        );
    }
    Ok(())
}

fn expanded_scheme(
    n: usize,
    label_len: usize,
) -> Result<dqre::ExpandedSke<ReferenceDqre>, RunError> {
    let inner = unclone::candidates::passthrough(1, 1)
        .gentle_transform()
        .map_err(|e| RunError::Scheme(e.to_string()))?
        .into_scheme();
    expand_plaintext(ReferenceDqre::new(label_len), inner, n, 1)
        .map_err(|e| RunError::Scheme(e.to_string()))
}

fn run_expand_roundtrip(ctx: &mut Ctx, rng: &mut SplitRng) -> Result<(), RunError> {
    let n = ctx.u64("n", 4) as usize;
    let keys = ctx.u64("keys", 50) as usize;
    let label_len = ctx.u64("labelLen", 8) as usize;
    let scheme = expanded_scheme(n, label_len)?;
    let mut min_prob = f64::INFINITY;
    for _ in 0..keys {
        let key = scheme.keygen(rng);
        for m in 0..(1usize << n) {
            let ct = scheme
                .enc(&key, m, rng)
                .map_err(|e| RunError::Scheme(e.to_string()))?;
            let probs = scheme
                .dec_distribution(&key, &ct)
                .map_err(|e| RunError::Scheme(e.to_string()))?;
            min_prob = min_prob.min(probs[m]);
        }
    }
    ctx.metric("minRoundtripProb", min_prob);
    ctx.equal("expansion-roundtrip", "expanded-scheme-correctness", 1.0, min_prob);
    Ok(())
}

fn run_expand_hybrid(ctx: &mut Ctx, rng: &mut SplitRng) -> Result<(), RunError> {
    let trials = ctx.u64("trials", 100) as usize;
    let label_len = ctx.u64("labelLen", 6) as usize;
    let m0 = parse_bits(&ctx.str("m0", "01"))?;
    let m1 = parse_bits(&ctx.str("m1", "10"))?;
    let inner = unclone::candidates::qotp_one_qubit()
        .gentle_transform()
        .map_err(|e| RunError::Scheme(e.to_string()))?
        .into_scheme();
    let report = hybrid_equiv_check(&ReferenceDqre::new(label_len), &inner, &m0, &m1, trials, rng)
        .map_err(|e| RunError::Scheme(e.to_string()))?;
    ctx.metric("trials", report.trials as f64);
    ctx.metric("mismatches", report.mismatches.len() as f64);
    ctx.hard(
        "hybrid-functional-equality",
        "constant-vs-wrapper-equality",
        0.0,
        report.mismatches.len() as f64,
        report.all_agree(),
    );
    Ok(())
}
