//! Finite-dimensional quantum measurement: spectral data and functional
//! calculus, outcome distributions, the system⊗pointer composite algebra,
//! coupling dynamics, instruments, the measurement-scheme (realizability)
//! check, central decompositions of composite states, classical↔quantum
//! channels, state preparation as reachability, and repeatability.
//!
//! The composite algebra `A_A = A ⊗ C*{A} ≅ C(Spec(A), A)` is stored as an
//! outcome-indexed family of system blocks; its full-matrix form is
//! block-diagonal with the pointer index labeling blocks. Couplings act in
//! the Heisenberg picture and end with the pinch onto the pointer diagonal.

use crate::algebra::StateFunctional;
use crate::error::{Error, Result};
use crate::linalg::{self, CMat, Complex};
use crate::tol;

// ---------------------------------------------------------------------------
// Observables
// ---------------------------------------------------------------------------

/// A self-adjoint matrix with its spectral decomposition: distinct
/// eigenvalues (clustered at relative tolerance) and eigenprojections.
#[derive(Debug, Clone)]
pub struct Observable {
    pub matrix: CMat,
    pub spectrum: Vec<f64>,
    pub projections: Vec<CMat>,
}

impl Observable {
    pub fn new(matrix: CMat) -> Result<Self> {
        let defect = linalg::hermiticity_defect(&matrix);
        if defect > tol::REP {
            return Err(Error::NotSelfAdjoint(defect));
        }
        let (vals, vecs) = linalg::hermitian_eigen(&matrix);
        let clusters = linalg::cluster_sorted(&vals, tol::EIG_CLUSTER);
        let mut spectrum = Vec::with_capacity(clusters.len());
        let mut projections = Vec::with_capacity(clusters.len());
        for range in clusters {
            let len = range.len();
            let mean = vals[range.clone()].iter().sum::<f64>() / len as f64;
            let cols = vecs.columns(range.start, len);
            spectrum.push(mean);
            projections.push(cols * cols.adjoint());
        }
        let obs = Observable {
            matrix,
            spectrum,
            projections,
        };
        obs.validate()?;
        Ok(obs)
    }

    fn validate(&self) -> Result<()> {
        let n = self.dim();
        let mut sum = linalg::zeros(n, n);
        let mut recon = linalg::zeros(n, n);
        for (a, p) in self.spectrum.iter().zip(self.projections.iter()) {
            sum += p;
            recon += p.scale(*a);
            if linalg::max_abs(&(p * p - p)) > tol::CENTRAL_DECOMP {
                return Err(Error::AlgebraInvariant(
                    "spectral projection not idempotent".into(),
                ));
            }
        }
        for i in 0..self.projections.len() {
            for j in (i + 1)..self.projections.len() {
                if linalg::max_abs(&(&self.projections[i] * &self.projections[j]))
                    > tol::CENTRAL_DECOMP
                {
                    return Err(Error::AlgebraInvariant(
                        "spectral projections not orthogonal".into(),
                    ));
                }
            }
        }
        if linalg::max_abs(&(&sum - linalg::identity(n))) > tol::CENTRAL_DECOMP {
            return Err(Error::AlgebraInvariant(
                "spectral projections do not resolve the identity".into(),
            ));
        }
        if linalg::max_abs(&(&recon - &self.matrix)) > tol::CENTRAL_DECOMP {
            return Err(Error::AlgebraInvariant(
                "spectral reconstruction fails".into(),
            ));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn outcomes(&self) -> usize {
        self.spectrum.len()
    }

    pub fn has_nondegenerate_spectrum(&self) -> bool {
        self.projections
            .iter()
            .all(|p| (p.trace().re - 1.0).abs() < 0.5)
    }

    /// Functional calculus `f(A) = Σ_a f(a) E_a`.
    pub fn apply_fn(&self, f: impl Fn(f64) -> Complex) -> CMat {
        let mut out = linalg::zeros(self.dim(), self.dim());
        for (a, p) in self.spectrum.iter().zip(self.projections.iter()) {
            out += p.map(|e| e * f(*a));
        }
        out
    }

    /// Functional calculus from a table of values indexed by spectral point.
    pub fn apply_values(&self, values: &[Complex]) -> Result<CMat> {
        if values.len() != self.outcomes() {
            return Err(Error::UndefinedOnSpectrum(
                *self
                    .spectrum
                    .get(values.len())
                    .unwrap_or(&f64::NAN),
            ));
        }
        let mut out = linalg::zeros(self.dim(), self.dim());
        for (v, p) in values.iter().zip(self.projections.iter()) {
            out += p.map(|e| e * v);
        }
        Ok(out)
    }

    /// Spectral measure of an outcome subset, `E_A(Δ) = Σ_{a∈Δ} E_a`.
    pub fn spectral_measure(&self, outcome_set: &[usize]) -> CMat {
        let mut e = linalg::zeros(self.dim(), self.dim());
        for &a in outcome_set {
            e += &self.projections[a];
        }
        e
    }
}

/// `p^A(a|ω) = ω(E_a)`: the outcome distribution of a measurement.
pub fn outcome_distribution(obs: &Observable, state: &StateFunctional) -> Result<Vec<f64>> {
    let p: Vec<f64> = obs
        .projections
        .iter()
        .map(|e| state.expect(e).re.max(0.0))
        .collect();
    let total: f64 = p.iter().sum();
    if (total - 1.0).abs() > tol::PROB_NORM {
        return Err(Error::StateInvariant(format!(
            "outcome distribution sums to {total}"
        )));
    }
    Ok(p)
}

/// A positive-operator valued measure: effects summing to the identity.
#[derive(Debug, Clone)]
pub struct GeneralizedObservable {
    pub effects: Vec<CMat>,
}

impl GeneralizedObservable {
    pub fn new(effects: Vec<CMat>) -> Result<Self> {
        let n = effects
            .first()
            .map(|e| e.nrows())
            .ok_or_else(|| Error::DimensionMismatch("empty effect list".into()))?;
        let mut sum = linalg::zeros(n, n);
        for e in &effects {
            let (vals, _) = linalg::hermitian_eigen(e);
            if vals.first().copied().unwrap_or(0.0) < tol::PSD {
                return Err(Error::StateInvariant(format!(
                    "effect has negative eigenvalue {:.3e}",
                    vals[0]
                )));
            }
            sum += e;
        }
        if linalg::max_abs(&(&sum - linalg::identity(n))) > tol::TRACE_NORM {
            return Err(Error::StateInvariant(
                "effects do not sum to the identity".into(),
            ));
        }
        Ok(GeneralizedObservable { effects })
    }
}

// ---------------------------------------------------------------------------
// Composite algebra and coupling dynamics
// ---------------------------------------------------------------------------

/// The composite of the system with the classical pointer generated by the
/// observable: functions from outcomes to system operators.
#[derive(Debug, Clone)]
pub struct CompositeAlgebra {
    pub system_dim: usize,
    pub outcomes: Vec<f64>,
}

/// An element `B̂ : a ↦ B̂(a)`, stored as one system block per outcome.
pub type CompositeElement = Vec<CMat>;

impl CompositeAlgebra {
    pub fn new(obs: &Observable) -> Self {
        CompositeAlgebra {
            system_dim: obs.dim(),
            outcomes: obs.spectrum.clone(),
        }
    }

    pub fn num_outcomes(&self) -> usize {
        self.outcomes.len()
    }

    pub fn total_dim(&self) -> usize {
        self.system_dim * self.num_outcomes()
    }

    pub fn unit(&self) -> CompositeElement {
        vec![linalg::identity(self.system_dim); self.num_outcomes()]
    }

    /// `B ⊗ 1`.
    pub fn embed_system(&self, b: &CMat) -> CompositeElement {
        vec![b.clone(); self.num_outcomes()]
    }

    /// `1 ⊗ χ_Δ` for an outcome subset.
    pub fn pointer_indicator(&self, outcome_set: &[usize]) -> CompositeElement {
        let mut elem = vec![linalg::zeros(self.system_dim, self.system_dim); self.num_outcomes()];
        for &a in outcome_set {
            elem[a] = linalg::identity(self.system_dim);
        }
        elem
    }

    /// `B ⊗ χ_Δ`.
    pub fn system_on_outcomes(&self, b: &CMat, outcome_set: &[usize]) -> CompositeElement {
        let mut elem = vec![linalg::zeros(self.system_dim, self.system_dim); self.num_outcomes()];
        for &a in outcome_set {
            elem[a] = b.clone();
        }
        elem
    }

    /// The block-diagonal matrix form on `ℂ^{m} ⊗ ℂ^{n}` (pointer-major).
    pub fn to_matrix(&self, elem: &CompositeElement) -> CMat {
        let n = self.system_dim;
        let total = self.total_dim();
        let mut m = linalg::zeros(total, total);
        for (a, block) in elem.iter().enumerate() {
            m.view_mut((a * n, a * n), (n, n)).copy_from(block);
        }
        m
    }

    /// Pinch onto the pointer diagonal: keeps the diagonal blocks.
    pub fn pinch(&self, m: &CMat) -> CompositeElement {
        let n = self.system_dim;
        (0..self.num_outcomes())
            .map(|a| m.view((a * n, a * n), (n, n)).clone_owned())
            .collect()
    }
}

/// Composite-system dynamics in the Heisenberg picture: either conjugation
/// by a unitary on system⊗pointer or a Kraus family, both followed by the
/// pinch onto the pointer diagonal. Both forms are completely positive by
/// construction; unitality is certified numerically.
#[derive(Debug, Clone)]
pub enum CouplingDynamics {
    /// `X ↦ pinch(U† X U)`.
    Unitary(CMat),
    /// `X ↦ pinch(Σ_j K_j† X K_j)` with `Σ_j K_j† K_j = 1`.
    Kraus(Vec<CMat>),
    /// The identity map (no coupling; the pointer never moves).
    Identity,
}

impl CouplingDynamics {
    /// Verifies shape and unitality against the composite algebra.
    pub fn validate(&self, composite: &CompositeAlgebra) -> Result<()> {
        let total = composite.total_dim();
        let id = linalg::identity(total);
        match self {
            CouplingDynamics::Identity => Ok(()),
            CouplingDynamics::Unitary(u) => {
                if u.nrows() != total || u.ncols() != total {
                    return Err(Error::DimensionMismatch(format!(
                        "coupling unitary is {}x{}, composite dimension is {total}",
                        u.nrows(),
                        u.ncols()
                    )));
                }
                let res = linalg::max_abs(&(u * u.adjoint() - &id));
                if res > tol::REP {
                    return Err(Error::RepInvariant(format!(
                        "coupling matrix not unitary (residual {res:.3e})"
                    )));
                }
                Ok(())
            }
            CouplingDynamics::Kraus(ops) => {
                let mut sum = linalg::zeros(total, total);
                for k in ops {
                    if k.nrows() != total || k.ncols() != total {
                        return Err(Error::DimensionMismatch(
                            "Kraus operator has wrong shape".into(),
                        ));
                    }
                    sum += k.adjoint() * k;
                }
                let res = linalg::max_abs(&(&sum - &id));
                if res > tol::TRACE_NORM * 100.0 {
                    return Err(Error::StateInvariant(format!(
                        "Kraus family not unital (residual {res:.3e})"
                    )));
                }
                Ok(())
            }
        }
    }

    /// Heisenberg action on a composite element.
    pub fn apply(&self, composite: &CompositeAlgebra, elem: &CompositeElement) -> CompositeElement {
        match self {
            CouplingDynamics::Identity => elem.clone(),
            CouplingDynamics::Unitary(u) => {
                let x = composite.to_matrix(elem);
                composite.pinch(&(u.adjoint() * x * u))
            }
            CouplingDynamics::Kraus(ops) => {
                let x = composite.to_matrix(elem);
                let mut y = linalg::zeros(x.nrows(), x.ncols());
                for k in ops {
                    y += k.adjoint() * &x * k;
                }
                composite.pinch(&y)
            }
        }
    }

    /// Schrödinger action on a pinched composite state (blocks of the
    /// density, one per outcome).
    pub fn evolve_state(&self, composite: &CompositeAlgebra, state: &CompositeState) -> CompositeState {
        let rho = composite.to_matrix(&state.blocks);
        let moved = match self {
            CouplingDynamics::Identity => rho,
            CouplingDynamics::Unitary(u) => u * rho * u.adjoint(),
            CouplingDynamics::Kraus(ops) => {
                let mut y = linalg::zeros(rho.nrows(), rho.ncols());
                for k in ops {
                    y += k * &rho * k.adjoint();
                }
                y
            }
        };
        CompositeState {
            blocks: composite.pinch(&moved),
        }
    }

    /// Choi matrix of the full map (including the pinch) on the composite
    /// ambient space; positive semidefiniteness certifies complete
    /// positivity.
    pub fn choi_matrix(&self, composite: &CompositeAlgebra) -> CMat {
        let total = composite.total_dim();
        let mut choi = linalg::zeros(total * total, total * total);
        for i in 0..total {
            for j in 0..total {
                let unit = linalg::matrix_unit(total, i, j);
                let mapped = composite.to_matrix(&self.apply(composite, &composite.pinch(&unit)));
                // The map acts on the pinched part only; applying it to the
                // pinch of e_ij realizes pinch∘Φ∘pinch, whose Choi matrix is
                // what the block-diagonal algebra sees.
                for r in 0..total {
                    for s in 0..total {
                        choi[(i * total + r, j * total + s)] += mapped[(r, s)];
                    }
                }
            }
        }
        choi
    }
}

/// The standard pointer coupling for an observable: `U = Σ_a E_a ⊗ S^a`
/// with `S` the cyclic shift on the pointer, so a pointer prepared at 0
/// moves to the slot of the realized outcome.
pub fn canonical_coupling(obs: &Observable) -> CouplingDynamics {
    let m = obs.outcomes();
    let n = obs.dim();
    let total = m * n;
    let mut u = linalg::zeros(total, total);
    for (idx, e) in obs.projections.iter().enumerate() {
        // Pointer-major block (row p+idx mod m, col p) carries E_a.
        for p in 0..m {
            let q = (p + idx) % m;
            u.view_mut((q * n, p * n), (n, n)).copy_from(e);
        }
    }
    CouplingDynamics::Unitary(u)
}

// ---------------------------------------------------------------------------
// Instruments
// ---------------------------------------------------------------------------

/// A state of the composite algebra in pinched block form:
/// `ω̂(B̂) = Σ_a tr(blocks[a] B̂(a))`.
#[derive(Debug, Clone)]
pub struct CompositeState {
    pub blocks: Vec<CMat>,
}

impl CompositeState {
    /// Product state `ω ⊗ μ`.
    pub fn product(state: &StateFunctional, mu: &[f64]) -> Self {
        CompositeState {
            blocks: mu.iter().map(|&w| state.density.scale(w)).collect(),
        }
    }

    pub fn expect(&self, elem: &CompositeElement) -> Complex {
        self.blocks
            .iter()
            .zip(elem.iter())
            .map(|(rho, b)| (rho * b).trace())
            .sum()
    }

    pub fn pointer_weights(&self) -> Vec<f64> {
        self.blocks.iter().map(|b| b.trace().re).collect()
    }
}

/// The instrument of an observable and a coupling: the averaged map
/// `I(B̂) = Σ_a μ₀(a) (τ̂ B̂)(a)` into the system algebra, and the bilinear
/// form `J(Δ|ω)(B) = (ω ⊗ μ₀)[τ̂(B ⊗ χ_Δ)]`.
#[derive(Debug, Clone)]
pub struct Instrument {
    pub composite: CompositeAlgebra,
    pub dynamics: CouplingDynamics,
    pub pointer_measure: Vec<f64>,
}

impl Instrument {
    pub fn new(
        obs: &Observable,
        dynamics: CouplingDynamics,
        pointer_measure: Vec<f64>,
    ) -> Result<Self> {
        let composite = CompositeAlgebra::new(obs);
        if pointer_measure.len() != composite.num_outcomes() {
            return Err(Error::BadWeights(format!(
                "{} pointer weights for {} outcomes",
                pointer_measure.len(),
                composite.num_outcomes()
            )));
        }
        if pointer_measure.iter().any(|&w| w < -1e-12) {
            return Err(Error::BadWeights("negative pointer weight".into()));
        }
        let total: f64 = pointer_measure.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::BadWeights(format!(
                "pointer weights sum to {total}"
            )));
        }
        dynamics.validate(&composite)?;
        Ok(Instrument {
            composite,
            dynamics,
            pointer_measure,
        })
    }

    /// Point mass at pointer position 0, the default initial measure.
    pub fn delta_start(obs: &Observable) -> Vec<f64> {
        let mut mu = vec![0.0; obs.outcomes()];
        mu[0] = 1.0;
        mu
    }

    /// `I(B̂) = Σ_a μ₀(a) (τ̂ B̂)(a)`.
    pub fn averaged(&self, elem: &CompositeElement) -> CMat {
        let moved = self.dynamics.apply(&self.composite, elem);
        let n = self.composite.system_dim;
        let mut out = linalg::zeros(n, n);
        for (w, block) in self.pointer_measure.iter().zip(moved.iter()) {
            out += block.scale(*w);
        }
        out
    }

    /// `J(Δ|ω)(B) = ω(I(B ⊗ χ_Δ))`.
    pub fn evaluate(
        &self,
        outcome_set: &[usize],
        state: &StateFunctional,
        b: &CMat,
    ) -> Complex {
        let elem = self.composite.system_on_outcomes(b, outcome_set);
        state.expect(&self.averaged(&elem))
    }

    /// The (unnormalized) post-measurement functional `J(Δ|ω)` as a density:
    /// the Δ-blocks of the evolved composite state.
    pub fn posterior_density(&self, outcome_set: &[usize], state: &StateFunctional) -> CMat {
        let initial = CompositeState::product(state, &self.pointer_measure);
        let evolved = self.dynamics.evolve_state(&self.composite, &initial);
        let n = self.composite.system_dim;
        let mut out = linalg::zeros(n, n);
        for &a in outcome_set {
            out += &evolved.blocks[a];
        }
        out
    }

    /// The POM induced by the scheme: effects `I(1 ⊗ χ_a)`.
    pub fn induced_pom(&self) -> Result<GeneralizedObservable> {
        let effects = (0..self.composite.num_outcomes())
            .map(|a| self.averaged(&self.composite.pointer_indicator(&[a])))
            .collect();
        GeneralizedObservable::new(effects)
    }
}

/// Measurement-scheme (realizability) check: the pointer statistics must
/// reproduce the spectral measure, `ω(E_A(Δ)) = (ω ⊗ μ₀)[τ̂(1 ⊗ χ_Δ)]` for
/// all states ω and single-point Δ. By linearity it suffices to compare
/// `E_a` with `I(1 ⊗ χ_a)` entrywise (matrix units span all states); the
/// reported residual is the max entry difference.
#[derive(Debug, Clone)]
pub struct SchemeCheck {
    pub residual: f64,
    pub pass: bool,
}

pub fn measurement_scheme_check(
    obs: &Observable,
    dynamics: &CouplingDynamics,
    pointer_measure: &[f64],
) -> Result<SchemeCheck> {
    let instrument = Instrument::new(obs, dynamics.clone(), pointer_measure.to_vec())?;
    let mut residual = 0.0f64;
    for (a, e) in obs.projections.iter().enumerate() {
        let effect = instrument.averaged(&instrument.composite.pointer_indicator(&[a]));
        residual = residual.max(linalg::max_abs(&(&effect - e)));
    }
    Ok(SchemeCheck {
        residual,
        pass: residual < tol::SCHEME,
    })
}

/// Normalized post-measurement state after reading outcome `a`.
pub fn posterior_state(
    instrument: &Instrument,
    state: &StateFunctional,
    outcome: usize,
) -> Result<StateFunctional> {
    let density = instrument.posterior_density(&[outcome], state);
    let p = density.trace().re;
    if p <= 1e-12 {
        return Err(Error::ZeroProbabilityOutcome(outcome, p));
    }
    StateFunctional::new(density.unscale(p))
}

/// Unique central decomposition of a composite state along the pointer
/// diagonal: `ω̂ = Σ_a μ(a) (ω_a ⊗ δ_a)`.
pub fn central_decompose_composite(
    state: &CompositeState,
) -> Result<(Vec<f64>, Vec<Option<StateFunctional>>)> {
    let mut weights = Vec::with_capacity(state.blocks.len());
    let mut components = Vec::with_capacity(state.blocks.len());
    for block in &state.blocks {
        let w = block.trace().re;
        if w > 1e-12 {
            components.push(Some(StateFunctional::new(block.unscale(w))?));
            weights.push(w);
        } else {
            components.push(None);
            weights.push(0.0);
        }
    }
    Ok((weights, components))
}

// ---------------------------------------------------------------------------
// Classical↔quantum channels, preparation, repeatability
// ---------------------------------------------------------------------------

/// An outcome-indexed family of system states.
#[derive(Debug, Clone)]
pub struct StateFamily {
    pub states: Vec<StateFunctional>,
}

impl StateFamily {
    pub fn new(states: Vec<StateFunctional>) -> Self {
        StateFamily { states }
    }

    /// The universal family for a discrete-spectrum observable: normalized
    /// eigenprojections.
    pub fn eigenstates(obs: &Observable) -> Result<Self> {
        let states = obs
            .projections
            .iter()
            .map(|e| {
                let rank = e.trace().re;
                StateFunctional::new(e.unscale(rank))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(StateFamily { states })
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }
}

/// The c→q channel of an observable and a state family:
/// `C(B̂)(a) = ω_a(B̂(a))` with dual `C*(ρ) = Σ_a ρ(a)(ω_a ⊗ δ_a)`.
#[derive(Debug, Clone)]
pub struct CqChannel {
    pub composite: CompositeAlgebra,
    pub family: StateFamily,
}

impl CqChannel {
    pub fn new(obs: &Observable, family: StateFamily) -> Result<Self> {
        if family.len() != obs.outcomes() {
            return Err(Error::DimensionMismatch(format!(
                "family has {} states for {} outcomes",
                family.len(),
                obs.outcomes()
            )));
        }
        Ok(CqChannel {
            composite: CompositeAlgebra::new(obs),
            family,
        })
    }

    /// `C(B̂) : a ↦ ω_a(B̂(a))`.
    pub fn apply(&self, elem: &CompositeElement) -> Vec<Complex> {
        self.family
            .states
            .iter()
            .zip(elem.iter())
            .map(|(w, b)| w.expect(b))
            .collect()
    }

    /// Dual channel on probability weights.
    pub fn dual(&self, weights: &[f64]) -> Result<CompositeState> {
        if weights.len() != self.family.len() {
            return Err(Error::BadWeights(format!(
                "{} weights for {} outcomes",
                weights.len(),
                self.family.len()
            )));
        }
        Ok(CompositeState {
            blocks: weights
                .iter()
                .zip(self.family.states.iter())
                .map(|(&w, s)| s.density.scale(w))
                .collect(),
        })
    }

    /// Restriction of the dual to the system: `ι* ∘ C*`.
    pub fn dual_system_state(&self, weights: &[f64]) -> Result<StateFunctional> {
        let composite = self.dual(weights)?;
        let n = self.composite.system_dim;
        let mut rho = linalg::zeros(n, n);
        for block in &composite.blocks {
            rho += block;
        }
        StateFunctional::new(rho)
    }
}

/// Trajectory of the preparation (reachability) protocol: at each step the
/// pointer weights of the evolved composite state feed the c→q channel, and
/// the trace distance of the resulting system state to the target is
/// recorded. The dynamics sequence composes cumulatively.
#[derive(Debug, Clone)]
pub struct ReachabilityReport {
    pub distances: Vec<f64>,
    pub reached: bool,
    pub first_reach: Option<usize>,
    pub tolerance: f64,
}

pub fn reachability_check(
    target: &StateFunctional,
    initial: &StateFunctional,
    pointer_measure: &[f64],
    dynamics_sequence: &[CouplingDynamics],
    channel: &CqChannel,
    tolerance: f64,
) -> Result<ReachabilityReport> {
    let composite = &channel.composite;
    let mut state = CompositeState::product(initial, pointer_measure);
    let mut distances = Vec::with_capacity(dynamics_sequence.len() + 1);
    let record = |state: &CompositeState, distances: &mut Vec<f64>| -> Result<()> {
        let mu = state.pointer_weights();
        let prepared = channel.dual_system_state(&mu)?;
        let diff = &prepared.density - &target.density;
        distances.push(linalg::trace_norm_hermitian(&diff));
        Ok(())
    };
    record(&state, &mut distances)?;
    for dyn_t in dynamics_sequence {
        dyn_t.validate(composite)?;
        state = dyn_t.evolve_state(composite, &state);
        record(&state, &mut distances)?;
    }
    let first_reach = distances.iter().position(|&d| d < tolerance);
    let reached = distances.last().is_some_and(|&d| d < tolerance);
    Ok(ReachabilityReport {
        distances,
        reached,
        first_reach,
        tolerance,
    })
}

/// Repeatable-family condition `ω_a(E_b) = δ_ab`, per outcome.
#[derive(Debug, Clone)]
pub struct RepeatabilityReport {
    pub per_outcome: Vec<bool>,
    pub pass: bool,
    pub max_deviation: f64,
}

pub fn repeatable_family_check(obs: &Observable, family: &StateFamily) -> RepeatabilityReport {
    let mut per_outcome = Vec::with_capacity(family.len());
    let mut max_dev = 0.0f64;
    for (a, omega) in family.states.iter().enumerate() {
        let mut ok = true;
        for (b, e) in obs.projections.iter().enumerate() {
            let target = if a == b { 1.0 } else { 0.0 };
            let dev = (omega.expect(e).re - target).abs();
            max_dev = max_dev.max(dev);
            if dev > tol::REPEATABLE {
                ok = false;
            }
        }
        per_outcome.push(ok);
    }
    RepeatabilityReport {
        pass: per_outcome.iter().all(|&b| b),
        per_outcome,
        max_deviation: max_dev,
    }
}

/// Compares the two q→c channels on the image of the c→q channel: the
/// tautological readout `(ι∘Â)*` of `C*(δ_a)` assigns outcome `b` the value
/// `ω_a(E_b)`, while the inverse of `C*` returns `δ_ab`; the discrepancy is
/// `max_{a,b} |ω_a(E_b) − δ_ab|` and vanishes exactly on repeatable
/// families.
pub fn qc_channel_compare(obs: &Observable, family: &StateFamily) -> f64 {
    let mut worst = 0.0f64;
    for (a, omega) in family.states.iter().enumerate() {
        for (b, e) in obs.projections.iter().enumerate() {
            let target = if a == b { 1.0 } else { 0.0 };
            worst = worst.max((omega.expect(e).re - target).abs());
        }
    }
    worst
}
