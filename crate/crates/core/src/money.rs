//! Public-key quantum money mini-schemes with finite mint support, the
//! Check-based correctness transform with a ⊤-fallback serial, the parallel
//! combiner over transformed candidates, and a cloning-game harness with
//! fixed attack families plus an isometry ascent search.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::qmath::layout::RegisterLayout;
use crate::qmath::linalg::{eigh, polar_isometry};
use crate::qmath::matrix::{C64, ComplexMatrix, ONE};
use crate::qmath::ops::apply_channel;
use crate::qmath::types::{DensityMatrix, KrausChannel};
use crate::qmath::QmathError;
use crate::rng::SplitRng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MoneyError {
    Qmath(QmathError),
    UnknownSerial,
    WrongRegisterCount,
    InvalidScheme,
}

impl From<QmathError> for MoneyError {
    fn from(e: QmathError) -> Self {
        MoneyError::Qmath(e)
    }
}

impl fmt::Display for MoneyError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MoneyError::Qmath(e) => write!(f, "{e}"),
            MoneyError::UnknownSerial => f.write_str("no verification effect for this serial"),
            MoneyError::WrongRegisterCount => {
                f.write_str("bundle has the wrong number of note registers")
            }
            MoneyError::InvalidScheme => f.write_str("mint table is inconsistent"),
        }
    }
}

/// Opaque serial token; the empty token is reserved for ⊤.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Serial(pub Vec<u8>);

impl Serial {
    pub fn top() -> Self {
        Serial(Vec::new())
    }

    pub fn is_top(&self) -> bool {
        self.0.is_empty()
    }
}

/// One row of the finite mint distribution.
#[derive(Debug, Clone)]
pub struct MintOutcome {
    pub serial: Serial,
    pub note: DensityMatrix,
    pub weight: f64,
}

/// A mini-scheme with finite mint support. Verification of serial s accepts
/// a note rho with probability Tr(E_s rho).
#[derive(Debug, Clone)]
pub struct MiniScheme {
    note_layout: RegisterLayout,
    outcomes: Vec<MintOutcome>,
    effects: Vec<(Serial, ComplexMatrix)>,
}

impl MiniScheme {
    pub fn new(
        note_layout: RegisterLayout,
        outcomes: Vec<MintOutcome>,
        effects: Vec<(Serial, ComplexMatrix)>,
    ) -> Result<Self, MoneyError> {
        if outcomes.is_empty() {
            return Err(MoneyError::InvalidScheme);
        }
        let total: f64 = outcomes.iter().map(|o| o.weight).sum();
        if outcomes.iter().any(|o| o.weight < 0.0) || libm::fabs(total - 1.0) > 1e-12 {
            return Err(MoneyError::InvalidScheme);
        }
        let d = note_layout.dim();
        for o in &outcomes {
            if o.note.layout() != &note_layout || o.serial.is_top() {
                return Err(MoneyError::InvalidScheme);
            }
        }
        for (_, e) in &effects {
            if e.rows() != d || !e.is_square() || e.hermitian_defect() > 1e-9 {
                return Err(MoneyError::InvalidScheme);
            }
            let (eig, _) = eigh(e);
            let lo = eig.first().copied().unwrap_or(0.0);
            let hi = eig.last().copied().unwrap_or(0.0);
            if lo < -1e-9 || hi > 1.0 + 1e-9 {
                return Err(MoneyError::InvalidScheme);
            }
        }
        let scheme = MiniScheme {
            note_layout,
            outcomes,
            effects,
        };
        for o in &scheme.outcomes {
            scheme.effect(&o.serial)?;
        }
        Ok(scheme)
    }

    pub fn note_layout(&self) -> &RegisterLayout {
        &self.note_layout
    }

    pub fn outcomes(&self) -> &[MintOutcome] {
        &self.outcomes
    }

    pub fn effect(&self, serial: &Serial) -> Result<&ComplexMatrix, MoneyError> {
        self.effects
            .iter()
            .find(|(s, _)| s == serial)
            .map(|(_, e)| e)
            .ok_or(MoneyError::UnknownSerial)
    }

    pub fn mint(&self, rng: &mut SplitRng) -> &MintOutcome {
        let mut x = rng.next_f64();
        for o in &self.outcomes {
            if x < o.weight {
                return o;
            }
            x -= o.weight;
        }
        self.outcomes.last().expect("non-empty mint table")
    }

    pub fn accept_prob(&self, serial: &Serial, note: &DensityMatrix) -> Result<f64, MoneyError> {
        let e = self.effect(serial)?;
        Ok(e.mul(note.matrix()).trace().re.clamp(0.0, 1.0))
    }

    /// Exact expected acceptance of a fresh mint.
    pub fn correctness(&self) -> f64 {
        self.outcomes
            .iter()
            .map(|o| {
                o.weight
                    * self
                        .accept_prob(&o.serial, &o.note)
                        .expect("serials validated")
            })
            .sum()
    }
}

/// Mint-quality test: lam independent mint+verify trials, passing when at
/// least ceil(11 lam / 12) accept. Each trial draws a Bernoulli with the
/// trial's exact acceptance probability.
pub fn check(scheme: &MiniScheme, lam: usize, rng: &mut SplitRng) -> bool {
    assert!(lam >= 12, "check needs lam >= 12");
    let threshold = div_ceil(11 * lam, 12);
    let mut successes = 0usize;
    for _ in 0..lam {
        let o = scheme.mint(rng);
        let p = scheme
            .accept_prob(&o.serial, &o.note)
            .expect("serials validated");
        if rng.next_bool(p) {
            successes += 1;
        }
    }
    successes >= threshold
}

#[inline]
fn div_ceil(a: usize, b: usize) -> usize {
    a.div_ceil(b)
}

/// Serial of a transformed note bundle: either the list of inner serials or
/// the unconditionally accepted ⊤.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BundleSerial {
    Top,
    Serials(Vec<Serial>),
}

/// A minted bundle: lam inner notes kept as separate registers.
#[derive(Debug, Clone)]
pub struct Bundle {
    pub serial: BundleSerial,
    pub notes: Vec<DensityMatrix>,
}

/// Correctness transform of a mini-scheme: minting first runs Check; on
/// failure the serial collapses to ⊤, which the verifier accepts
/// unconditionally. Otherwise the bundle passes when at least
/// ceil(3 lam / 4) of the lam registers verify.
#[derive(Debug, Clone)]
pub struct TransformedScheme {
    inner: MiniScheme,
    lam: usize,
}

impl TransformedScheme {
    pub fn new(inner: MiniScheme, lam: usize) -> Self {
        assert!(lam >= 12, "transform needs lam >= 12");
        TransformedScheme { inner, lam }
    }

    pub fn inner(&self) -> &MiniScheme {
        &self.inner
    }

    pub fn lam(&self) -> usize {
        self.lam
    }

    pub fn accept_threshold(&self) -> usize {
        div_ceil(3 * self.lam, 4)
    }

    pub fn mint(&self, rng: &mut SplitRng) -> Bundle {
        let passed = check(&self.inner, self.lam, rng);
        let mut serials = Vec::with_capacity(self.lam);
        let mut notes = Vec::with_capacity(self.lam);
        for _ in 0..self.lam {
            let o = self.inner.mint(rng);
            serials.push(o.serial.clone());
            notes.push(o.note.clone());
        }
        let serial = if passed {
            BundleSerial::Serials(serials)
        } else {
            BundleSerial::Top
        };
        Bundle { serial, notes }
    }

    /// Exact acceptance probability of a bundle, evaluated register-wise:
    /// the threshold count over independent per-register acceptances.
    pub fn vrfy_accept_prob(&self, bundle: &Bundle) -> Result<f64, MoneyError> {
        match &bundle.serial {
            BundleSerial::Top => Ok(1.0),
            BundleSerial::Serials(serials) => {
                if serials.len() != self.lam || bundle.notes.len() != self.lam {
                    return Err(MoneyError::WrongRegisterCount);
                }
                let probs: Vec<f64> = serials
                    .iter()
                    .zip(&bundle.notes)
                    .map(|(s, n)| self.inner.accept_prob(s, n))
                    .collect::<Result<_, _>>()?;
                Ok(threshold_accept_prob(&probs, self.accept_threshold()))
            }
        }
    }

    /// One sampled verification of a bundle.
    pub fn vrfy_sample(&self, bundle: &Bundle, rng: &mut SplitRng) -> Result<bool, MoneyError> {
        match &bundle.serial {
            BundleSerial::Top => Ok(true),
            BundleSerial::Serials(serials) => {
                if serials.len() != self.lam || bundle.notes.len() != self.lam {
                    return Err(MoneyError::WrongRegisterCount);
                }
                let mut successes = 0usize;
                for (s, n) in serials.iter().zip(&bundle.notes) {
                    if rng.next_bool(self.inner.accept_prob(s, n)?) {
                        successes += 1;
                    }
                }
                Ok(successes >= self.accept_threshold())
            }
        }
    }

    /// Monte-Carlo estimate of mint-then-verify acceptance, with the
    /// standard error of the estimate.
    pub fn correctness_estimate(&self, runs: usize, rng: &mut SplitRng) -> (f64, f64) {
        let mut hits = 0usize;
        for _ in 0..runs {
            let bundle = self.mint(rng);
            if self.vrfy_sample(&bundle, rng).expect("own bundles verify") {
                hits += 1;
            }
        }
        let p = hits as f64 / runs as f64;
        let sigma = libm::sqrt(p * (1.0 - p) / runs as f64);
        (p, sigma)
    }
}

/// P[#accepts >= threshold] for independent Bernoulli registers, by dynamic
/// programming over the success count.
pub fn threshold_accept_prob(probs: &[f64], threshold: usize) -> f64 {
    let mut dist = vec![0.0f64; probs.len() + 1];
    dist[0] = 1.0;
    for (i, &p) in probs.iter().enumerate() {
        for k in (0..=i).rev() {
            let stay = dist[k] * (1.0 - p);
            let up = dist[k] * p;
            dist[k + 1] += up;
            dist[k] = stay;
        }
    }
    dist[threshold.min(probs.len())..].iter().sum()
}

/// Parallel combiner over transformed candidates: serials and bundles
/// concatenate component-wise and every component's verifier must accept.
#[derive(Debug, Clone)]
pub struct CombinedScheme {
    components: Vec<TransformedScheme>,
}

#[derive(Debug, Clone)]
pub struct CombinedBundle {
    pub parts: Vec<Bundle>,
}

impl CombinedScheme {
    pub fn components(&self) -> &[TransformedScheme] {
        &self.components
    }

    pub fn mint(&self, rng: &mut SplitRng) -> CombinedBundle {
        CombinedBundle {
            parts: self.components.iter().map(|c| c.mint(rng)).collect(),
        }
    }

    pub fn vrfy_sample(
        &self,
        bundle: &CombinedBundle,
        rng: &mut SplitRng,
    ) -> Result<bool, MoneyError> {
        if bundle.parts.len() != self.components.len() {
            return Err(MoneyError::WrongRegisterCount);
        }
        for (c, b) in self.components.iter().zip(&bundle.parts) {
            if !c.vrfy_sample(b, rng)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn correctness_estimate(&self, runs: usize, rng: &mut SplitRng) -> (f64, f64) {
        let mut hits = 0usize;
        for _ in 0..runs {
            let bundle = self.mint(rng);
            if self.vrfy_sample(&bundle, rng).expect("own bundles verify") {
                hits += 1;
            }
        }
        let p = hits as f64 / runs as f64;
        let sigma = libm::sqrt(p * (1.0 - p) / runs as f64);
        (p, sigma)
    }
}

pub fn correctness_transform(scheme: &MiniScheme, lam: usize) -> TransformedScheme {
    TransformedScheme::new(scheme.clone(), lam)
}

pub fn parallel_combine(schemes: &[MiniScheme], lam: usize) -> CombinedScheme {
    CombinedScheme {
        components: schemes
            .iter()
            .map(|s| correctness_transform(s, lam))
            .collect(),
    }
}

/// A note-splitting adversary: a channel from one note register to two.
#[derive(Debug, Clone)]
pub struct CloningAttack {
    pub split: KrausChannel,
}

impl CloningAttack {
    /// Copies the computational basis: |x> -> |xx>.
    pub fn copy_basis(note_layout: &RegisterLayout) -> Self {
        let d = note_layout.dim();
        let out_layout = note_layout.concat(note_layout).expect("within cap");
        let mut k = ComplexMatrix::zeros(d * d, d);
        for x in 0..d {
            k.set(x * d + x, x, ONE);
        }
        let split = KrausChannel::new(note_layout.clone(), out_layout, vec![k])
            .expect("isometry is trace preserving");
        CloningAttack { split }
    }

    /// Discards the note and hands both parties maximally mixed registers.
    pub fn discard_to_mixed(note_layout: &RegisterLayout) -> Self {
        let d = note_layout.dim();
        let out_layout = note_layout.concat(note_layout).expect("within cap");
        let scale = C64::new(1.0 / d as f64, 0.0);
        let mut kraus = Vec::with_capacity(d * d * d);
        for i in 0..d {
            for j in 0..d {
                for x in 0..d {
                    let mut k = ComplexMatrix::zeros(d * d, d);
                    k.set(i * d + j, x, scale);
                    kraus.push(k);
                }
            }
        }
        let split = KrausChannel::new(note_layout.clone(), out_layout, kraus)
            .expect("trace preserving by construction");
        CloningAttack { split }
    }

    /// Discards the note and prepares two fresh copies of a fixed state.
    pub fn prepare_fresh(note_layout: &RegisterLayout, state: &DensityMatrix) -> Self {
        let d = note_layout.dim();
        let out_layout = note_layout.concat(note_layout).expect("within cap");
        let pair = state.tensor(state).expect("within cap");
        let (eig, vecs) = eigh(pair.matrix());
        let mut kraus = Vec::new();
        for (m, &lam) in eig.iter().enumerate() {
            if lam <= 1e-15 {
                continue;
            }
            let amp = C64::new(libm::sqrt(lam), 0.0);
            for x in 0..d {
                let mut k = ComplexMatrix::zeros(d * d, d);
                for r in 0..d * d {
                    k.set(r, x, vecs.get(r, m) * amp);
                }
                kraus.push(k);
            }
        }
        let split = KrausChannel::new(note_layout.clone(), out_layout, kraus)
            .expect("trace preserving by construction");
        CloningAttack { split }
    }

    /// Channel defined by an explicit isometry from the note register to the
    /// doubled register.
    pub fn from_isometry(note_layout: &RegisterLayout, isometry: ComplexMatrix) -> Self {
        let out_layout = note_layout.concat(note_layout).expect("within cap");
        let split = KrausChannel::new(note_layout.clone(), out_layout, vec![isometry])
            .expect("isometry is trace preserving");
        CloningAttack { split }
    }
}

/// Success of the cloning experiment: both halves of the split state verify
/// against the minted serial. Exact mode averages over the finite mint table.
pub fn cloning_game_exact(scheme: &MiniScheme, attack: &CloningAttack) -> Result<f64, MoneyError> {
    if attack.split.in_layout() != scheme.note_layout() {
        return Err(MoneyError::Qmath(QmathError::DimensionMismatch));
    }
    let mut total = 0.0;
    for o in &scheme.outcomes {
        let split = apply_channel(&attack.split, &o.note).map_err(MoneyError::from)?;
        let e = scheme.effect(&o.serial)?;
        let ee = e.kron(e);
        total += o.weight * ee.mul(split.matrix()).trace().re;
    }
    Ok(total.clamp(0.0, 1.0))
}

/// Monte-Carlo estimate of the cloning success with its standard error.
pub fn cloning_game_estimate(
    scheme: &MiniScheme,
    attack: &CloningAttack,
    trials: usize,
    rng: &mut SplitRng,
) -> Result<(f64, f64), MoneyError> {
    if attack.split.in_layout() != scheme.note_layout() {
        return Err(MoneyError::Qmath(QmathError::DimensionMismatch));
    }
    let mut hits = 0usize;
    for _ in 0..trials {
        let o = scheme.mint(rng);
        let split = apply_channel(&attack.split, &o.note).map_err(MoneyError::from)?;
        let e = scheme.effect(&o.serial)?;
        let ee = e.kron(e);
        let p = ee.mul(split.matrix()).trace().re.clamp(0.0, 1.0);
        if rng.next_bool(p) {
            hits += 1;
        }
    }
    let p = hits as f64 / trials as f64;
    let sigma = libm::sqrt(p * (1.0 - p) / trials as f64);
    Ok((p, sigma))
}

#[derive(Debug, Clone, Copy)]
pub struct MoneyAttackSearchConfig {
    pub restarts: usize,
    pub iterations: usize,
    pub step_tolerance: f64,
}

impl Default for MoneyAttackSearchConfig {
    fn default() -> Self {
        MoneyAttackSearchConfig {
            restarts: 4,
            iterations: 60,
            step_tolerance: 1e-10,
        }
    }
}

/// Lower-bounds the optimal cloning value: evaluates the fixed attack
/// families, then runs a projected-gradient ascent over splitting isometries
/// V: note -> note ⊗ note. Optimality is not claimed.
pub fn attack_search(
    scheme: &MiniScheme,
    cfg: &MoneyAttackSearchConfig,
    rng: &mut SplitRng,
) -> Result<(CloningAttack, f64), MoneyError> {
    let layout = scheme.note_layout().clone();
    let d = layout.dim();
    let mut best: Option<(CloningAttack, f64)> = None;
    let consider = |attack: CloningAttack, value: f64, best: &mut Option<(CloningAttack, f64)>| {
        if best.as_ref().map(|(_, v)| value > *v).unwrap_or(true) {
            *best = Some((attack, value));
        }
    };

    let copy = CloningAttack::copy_basis(&layout);
    let v = cloning_game_exact(scheme, &copy)?;
    consider(copy, v, &mut best);

    let discard = CloningAttack::discard_to_mixed(&layout);
    let v = cloning_game_exact(scheme, &discard)?;
    consider(discard, v, &mut best);

    if scheme.outcomes.len() == 1 {
        let fresh = CloningAttack::prepare_fresh(&layout, &scheme.outcomes[0].note);
        let v = cloning_game_exact(scheme, &fresh)?;
        consider(fresh, v, &mut best);
    }

    // Ascent over isometries: f(V) = sum_s w_s Tr[V† (E_s ⊗ E_s) V rho_s].
    let objective = |v: &ComplexMatrix| -> f64 {
        let mut total = 0.0;
        for o in &scheme.outcomes {
            let e = scheme.effect(&o.serial).expect("validated");
            let ee = e.kron(e);
            let evr = ee.mul(v).mul(o.note.matrix());
            total += o.weight * v.conjugate_transpose().mul(&evr).trace().re;
        }
        total
    };
    for _restart in 0..cfg.restarts {
        let mut split_rng = rng.split();
        let g = ComplexMatrix::from_fn(d * d, d, |_, _| {
            C64::new(split_rng.next_gaussian(), split_rng.next_gaussian())
        });
        let mut v = polar_isometry(&g);
        let mut value = objective(&v);
        let mut eta = 1.0f64;
        for _ in 0..cfg.iterations {
            // Gradient wrt conj(V): sum_s w_s (E⊗E) V rho_s.
            let mut grad = ComplexMatrix::zeros(d * d, d);
            for o in &scheme.outcomes {
                let e = scheme.effect(&o.serial).expect("validated");
                let ee = e.kron(e);
                let term = ee.mul(&v).mul(o.note.matrix());
                grad = grad.add(&term.scale(C64::new(o.weight, 0.0)));
            }
            let mut improved = false;
            while eta > 1e-8 {
                let cand = polar_isometry(&v.add(&grad.scale(C64::new(eta, 0.0))));
                let cand_value = objective(&cand);
                if cand_value > value + cfg.step_tolerance {
                    v = cand;
                    value = cand_value;
                    improved = true;
                    break;
                }
                eta *= 0.5;
            }
            if !improved {
                break;
            }
        }
        let attack = CloningAttack::from_isometry(&layout, v);
        let exact = cloning_game_exact(scheme, &attack)?;
        consider(attack, exact, &mut best);
    }

    Ok(best.expect("at least the copy attack was evaluated"))
}

/// Built-in candidates for tests and experiments.
pub mod candidates {
    use super::*;
    use crate::qmath::embed::{basis_projector, hadamard};

    fn serial(tag: u8) -> Serial {
        Serial(vec![tag])
    }

    /// Classical notes: serial x comes with note |x><x| and the matching
    /// basis-projector effect.
    pub fn classical_note() -> MiniScheme {
        let layout = RegisterLayout::qubits(1).unwrap();
        let outcomes = (0..2u8)
            .map(|x| MintOutcome {
                serial: serial(x),
                note: DensityMatrix::new(layout.clone(), basis_projector(2, x as usize)).unwrap(),
                weight: 0.5,
            })
            .collect();
        let effects = (0..2u8)
            .map(|x| (serial(x), basis_projector(2, x as usize)))
            .collect();
        MiniScheme::new(layout, outcomes, effects).unwrap()
    }

    /// Conjugate-basis notes: uniform over |0>, |1>, |+>, |->, each verified
    /// by its own projector.
    pub fn bb84_money() -> MiniScheme {
        let layout = RegisterLayout::qubits(1).unwrap();
        let h = hadamard();
        let states = [
            basis_projector(2, 0),
            basis_projector(2, 1),
            h.mul(&basis_projector(2, 0)).mul(&h),
            h.mul(&basis_projector(2, 1)).mul(&h),
        ];
        let outcomes = states
            .iter()
            .enumerate()
            .map(|(i, m)| MintOutcome {
                serial: serial(i as u8),
                note: DensityMatrix::new(layout.clone(), m.clone()).unwrap(),
                weight: 0.25,
            })
            .collect();
        let effects = states
            .iter()
            .enumerate()
            .map(|(i, m)| (serial(i as u8), m.clone()))
            .collect();
        MiniScheme::new(layout, outcomes, effects).unwrap()
    }

    /// Single fixed note |0> with its projector: the note is public.
    pub fn fixed_note() -> MiniScheme {
        let layout = RegisterLayout::qubits(1).unwrap();
        let outcomes = vec![MintOutcome {
            serial: serial(0),
            note: DensityMatrix::new(layout.clone(), basis_projector(2, 0)).unwrap(),
            weight: 1.0,
        }];
        let effects = vec![(serial(0), basis_projector(2, 0))];
        MiniScheme::new(layout, outcomes, effects).unwrap()
    }

    /// Scheme whose per-trial acceptance is a constant p, using an effect
    /// p·I on a fixed note.
    pub fn constant_acceptance(p: f64) -> MiniScheme {
        let layout = RegisterLayout::qubits(1).unwrap();
        let outcomes = vec![MintOutcome {
            serial: serial(0),
            note: DensityMatrix::new(layout.clone(), basis_projector(2, 0)).unwrap(),
            weight: 1.0,
        }];
        let effects = vec![(serial(0), ComplexMatrix::identity(2).scale(C64::new(p, 0.0)))];
        MiniScheme::new(layout, outcomes, effects).unwrap()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qmath::embed::basis_projector;

    #[test]
    fn check_extremes() {
        let mut rng = SplitRng::from_seed(1);
        let perfect = candidates::constant_acceptance(1.0);
        let broken = candidates::constant_acceptance(0.0);
        for _ in 0..50 {
            assert!(check(&perfect, 24, &mut rng));
            assert!(!check(&broken, 24, &mut rng));
        }
    }

    #[test]
    fn check_concentration_at_half() {
        // Per-trial acceptance 1/2: the pass rate stays under the
        // 2 exp(-lam/72) tail bound.
        let mut rng = SplitRng::from_seed(2);
        let scheme = candidates::constant_acceptance(0.5);
        let runs = 2000;
        for lam in [72usize, 144] {
            let mut passes = 0usize;
            for _ in 0..runs {
                if check(&scheme, lam, &mut rng) {
                    passes += 1;
                }
            }
            let observed = passes as f64 / runs as f64;
            let bound = 2.0 * libm::exp(-(lam as f64) / 72.0);
            assert!(observed <= bound, "lam {lam}: observed {observed} > bound {bound}");
        }
    }

    #[test]
    fn transform_branches() {
        let mut rng = SplitRng::from_seed(3);
        let perfect = correctness_transform(&candidates::constant_acceptance(1.0), 12);
        let bundle = perfect.mint(&mut rng);
        assert!(matches!(bundle.serial, BundleSerial::Serials(_)));
        assert!((perfect.vrfy_accept_prob(&bundle).unwrap() - 1.0).abs() < 1e-12);

        let broken = correctness_transform(&candidates::constant_acceptance(0.0), 12);
        let bundle = broken.mint(&mut rng);
        assert!(matches!(bundle.serial, BundleSerial::Top));
        assert!((broken.vrfy_accept_prob(&bundle).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn unknown_serial_is_an_error() {
        let scheme = candidates::classical_note();
        let mixed = DensityMatrix::maximally_mixed(scheme.note_layout().clone());
        assert!(matches!(
            scheme.accept_prob(&Serial(vec![99]), &mixed),
            Err(MoneyError::UnknownSerial)
        ));
    }

    #[test]
    fn transform_rejects_wrong_register_count() {
        let mut rng = SplitRng::from_seed(4);
        let t = correctness_transform(&candidates::constant_acceptance(1.0), 12);
        let mut bundle = t.mint(&mut rng);
        bundle.notes.pop();
        if let BundleSerial::Serials(s) = &mut bundle.serial {
            s.pop();
        }
        assert!(matches!(
            t.vrfy_accept_prob(&bundle),
            Err(MoneyError::WrongRegisterCount)
        ));
    }

    #[test]
    fn transform_monte_carlo_correctness_floor() {
        let mut rng = SplitRng::from_seed(5);
        let t = correctness_transform(&candidates::constant_acceptance(0.95), 144);
        let (p, sigma) = t.correctness_estimate(2000, &mut rng);
        let floor = 1.0 - 4.0 * libm::exp(-144.0 / 72.0) - 3.0 * sigma.max(1e-4);
        assert!(p >= floor, "estimate {p} below floor {floor}");
    }

    #[test]
    fn threshold_semantics_match_direct_tensor_evaluation() {
        // Register-wise DP against the dense threshold POVM on 4 registers.
        let probs = [0.9, 0.4, 0.7, 0.55];
        let threshold = 3usize;
        let dp = threshold_accept_prob(&probs, threshold);

        let layout = RegisterLayout::qubits(1).unwrap();
        let states: Vec<DensityMatrix> = probs
            .iter()
            .map(|&p| {
                let mut m = ComplexMatrix::zeros(2, 2);
                m.set(0, 0, C64::new(p, 0.0));
                m.set(1, 1, C64::new(1.0 - p, 0.0));
                DensityMatrix::new(layout.clone(), m).unwrap()
            })
            .collect();
        let effect = basis_projector(2, 0);
        let mut bundle = states[0].clone();
        for s in &states[1..] {
            bundle = bundle.tensor(s).unwrap();
        }
        let mut threshold_effect = ComplexMatrix::zeros(16, 16);
        for pattern in 0..16usize {
            if (pattern as u32).count_ones() as usize >= threshold {
                let mut term = ComplexMatrix::identity(1);
                for bit in (0..4).rev() {
                    let e = if (pattern >> bit) & 1 == 1 {
                        effect.clone()
                    } else {
                        ComplexMatrix::identity(2).sub(&effect)
                    };
                    term = term.kron(&e);
                }
                threshold_effect = threshold_effect.add(&term);
            }
        }
        let direct = threshold_effect.mul(bundle.matrix()).trace().re;
        assert!((dp - direct).abs() < 1e-9, "dp {dp} vs direct {direct}");
    }

    #[test]
    fn combiner_branch_analysis() {
        let mut rng = SplitRng::from_seed(6);
        // Broken + perfect: the broken component rides the ⊤ branch.
        let combined = parallel_combine(
            &[
                candidates::constant_acceptance(0.0),
                candidates::constant_acceptance(1.0),
            ],
            24,
        );
        let (p, _) = combined.correctness_estimate(400, &mut rng);
        assert!((p - 1.0).abs() < 1e-12);

        // Two perfect components accept always.
        let both = parallel_combine(
            &[
                candidates::constant_acceptance(1.0),
                candidates::constant_acceptance(1.0),
            ],
            24,
        );
        let (p, _) = both.correctness_estimate(400, &mut rng);
        assert!((p - 1.0).abs() < 1e-12);
    }

    #[test]
    fn cloning_classical_scheme_copies() {
        let scheme = candidates::classical_note();
        let attack = CloningAttack::copy_basis(scheme.note_layout());
        let v = cloning_game_exact(&scheme, &attack).unwrap();
        assert!((v - 1.0).abs() < 1e-12);
    }

    #[test]
    fn cloning_discard_attack_value() {
        // Projective single-qubit verification against two maximally mixed
        // registers: success (1/2)^2.
        let scheme = candidates::fixed_note();
        let attack = CloningAttack::discard_to_mixed(scheme.note_layout());
        let v = cloning_game_exact(&scheme, &attack).unwrap();
        assert!((v - 0.25).abs() < 1e-12);
    }

    #[test]
    fn cloning_bb84_measure_and_duplicate() {
        let scheme = candidates::bb84_money();
        let attack = CloningAttack::copy_basis(scheme.note_layout());
        let v = cloning_game_exact(&scheme, &attack).unwrap();
        assert!((v - 0.625).abs() < 1e-12);
    }

    #[test]
    fn cloning_estimate_matches_exact() {
        let mut rng = SplitRng::from_seed(7);
        let scheme = candidates::bb84_money();
        let attack = CloningAttack::copy_basis(scheme.note_layout());
        let exact = cloning_game_exact(&scheme, &attack).unwrap();
        let (est, sigma) = cloning_game_estimate(&scheme, &attack, 4000, &mut rng).unwrap();
        assert!((est - exact).abs() <= 4.0 * sigma.max(1e-4));
    }

    #[test]
    fn attack_search_finds_copy_on_classical_notes() {
        let mut rng = SplitRng::from_seed(8);
        let scheme = candidates::classical_note();
        let (_, v) = attack_search(&scheme, &MoneyAttackSearchConfig::default(), &mut rng).unwrap();
        assert!(v >= 0.999);
        assert!(v <= 1.0 + 1e-12);
    }

    #[test]
    fn attack_search_prepares_fresh_public_note() {
        let mut rng = SplitRng::from_seed(9);
        let scheme = candidates::fixed_note();
        let (_, v) = attack_search(&scheme, &MoneyAttackSearchConfig::default(), &mut rng).unwrap();
        assert!((v - 1.0).abs() < 1e-9);
    }
}
