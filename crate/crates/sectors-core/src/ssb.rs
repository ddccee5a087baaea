//! The finite field-system toy model: a field algebra `F = M(V)` carrying a
//! group action, its fixed-point algebras `A = F^G` and `A_d = F^H`, the
//! equivariant algebra of `H`-equivariant functions on the group, the
//! induced representation with its covariant pair, symmetry-breakdown
//! detection on centre spectra, the fibered sector spectrum and the
//! classical↔quantum channel over it.
//!
//! Conventions. Right cosets `H\G` carry the right translation action; the
//! equivariant algebra is realized on coset representatives `x_i` (block
//! diagonal), and the induced space uses left representatives `t_i = x_i⁻¹`
//! so that evaluation of equivariant functions at `t_i⁻¹` is evaluation at
//! a stored block.

use std::sync::Arc;

use nalgebra::DMatrix;

use crate::algebra::{
    conditional_expectation, fixed_point_algebra, galois_stabilizer, isotypic_decomposition,
    GroupAction, MatrixStarAlgebra, StateFunctional,
};
use crate::error::{Error, Result};
use crate::group::{normalizer_quotient, CosetSpace, FiniteGroup, Side, Subgroup};
use crate::linalg::{self, CMat, CVec, Complex};
use crate::parallel;
use crate::rep::{self, UnitaryRep};
use crate::tol;

// ---------------------------------------------------------------------------
// Field system
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct FieldSystem {
    pub group: Arc<FiniteGroup>,
    pub subgroup: Subgroup,
    /// The defining representation V of G; `F = M(V)`.
    pub rep: UnitaryRep,
    pub action: GroupAction,
    pub field: MatrixStarAlgebra,
    /// `A = F^G`, the genuine observables.
    pub observables: MatrixStarAlgebra,
    /// `A_d = F^H`, the extended observables.
    pub extended: MatrixStarAlgebra,
    pub warnings: Vec<String>,
    /// Residual of `m_G = m_{G/H} ∘ m_H` on sampled field elements.
    pub expectation_residual: f64,
}

/// Builds the toy model for `H ≤ G` on the representation `rep`
/// (default: the left regular representation, which realizes every sector).
pub fn build_field_system(sub: Subgroup, rep: Option<UnitaryRep>) -> Result<FieldSystem> {
    let group = sub.parent.clone();
    let rep = match rep {
        Some(r) => {
            if !Arc::ptr_eq(&r.group, &group) {
                return Err(Error::DimensionMismatch(
                    "representation group differs from the subgroup's parent".into(),
                ));
            }
            r
        }
        None => UnitaryRep::regular(group.clone()),
    };
    let mut warnings = Vec::new();
    if !rep.is_faithful() {
        warnings.push(format!(
            "representation '{}' is not faithful; symmetry detection may degrade",
            rep.label
        ));
    }
    let n = rep.dim;
    let field = MatrixStarAlgebra::full(n);
    let action = GroupAction::new(rep.clone());
    let all: Vec<usize> = group.elements().collect();
    let observables = fixed_point_algebra(&field, &action, &all)?;
    let extended = fixed_point_algebra(&field, &action, &sub.members)?;
    if !extended.contains_algebra(&observables) {
        return Err(Error::AlgebraInvariant(
            "A = F^G is not contained in A_d = F^H".into(),
        ));
    }

    // m_G = m_{G/H} ∘ m_H on sampled field elements.
    let left = CosetSpace::new(group.clone(), &sub, Side::Left);
    let mut rng = linalg::seeded_rng(0xF1E1D);
    let mut residual = 0.0f64;
    for _ in 0..8 {
        let x = linalg::random_matrix(&mut rng, n, n);
        let m_g = conditional_expectation(&action, &all, &x);
        let m_h = conditional_expectation(&action, &sub.members, &x);
        let mut m_gh = linalg::zeros(n, n);
        for &t in &left.reps {
            m_gh += action.apply(t, &m_h);
        }
        m_gh = m_gh.unscale(left.len() as f64);
        residual = residual.max(linalg::max_abs(&(&m_g - &m_gh)));
    }
    if residual > tol::COND_EXP {
        return Err(Error::AlgebraInvariant(format!(
            "conditional expectations do not compose (residual {residual:.3e})"
        )));
    }

    Ok(FieldSystem {
        group,
        subgroup: sub,
        rep,
        action,
        field,
        observables,
        extended,
        warnings,
        expectation_residual: residual,
    })
}

impl FieldSystem {
    pub fn field_dim(&self) -> usize {
        self.field.dim()
    }

    pub fn ambient_dim(&self) -> usize {
        self.rep.dim
    }
}

// ---------------------------------------------------------------------------
// Equivariant (crossed-product) algebra
// ---------------------------------------------------------------------------

/// The algebra of `H`-equivariant functions `F̂ : G → F`, `F̂(hg) = τ_h(F̂(g))`,
/// realized block-diagonally on right-coset representatives. The group acts
/// by right translation of the argument, implemented by conjugation with the
/// unitaries stored in `action`.
#[derive(Debug, Clone)]
pub struct EquivariantAlgebra {
    pub cosets: CosetSpace,
    pub block_dim: usize,
    pub algebra: MatrixStarAlgebra,
    /// Right-translation unitaries `W(g)` on the block space; a unitary
    /// representation of the full group.
    pub action: GroupAction,
}

impl EquivariantAlgebra {
    pub fn num_blocks(&self) -> usize {
        self.cosets.len()
    }

    pub fn total_dim(&self) -> usize {
        self.num_blocks() * self.block_dim
    }

    pub fn embed(&self, values: &[CMat]) -> CMat {
        let n = self.block_dim;
        let mut m = linalg::zeros(self.total_dim(), self.total_dim());
        for (i, v) in values.iter().enumerate() {
            m.view_mut((i * n, i * n), (n, n)).copy_from(v);
        }
        m
    }

    pub fn blocks(&self, m: &CMat) -> Vec<CMat> {
        let n = self.block_dim;
        (0..self.num_blocks())
            .map(|i| m.view((i * n, i * n), (n, n)).clone_owned())
            .collect()
    }

    /// Value of the equivariant function at an arbitrary group element:
    /// `g = h·x_j` gives `τ_h(values[j])`.
    pub fn value_at(&self, fs: &FieldSystem, values: &[CMat], g: usize) -> CMat {
        let j = self.cosets.coset_of[g];
        let xj = self.cosets.reps[j];
        let h = fs.group.mul(g, fs.group.inv(xj));
        fs.action.apply(h, &values[j])
    }

    /// Random equivariant element as a value vector (seeded).
    pub fn random_values(&self, seed: u64) -> Vec<CMat> {
        let mut rng = linalg::seeded_rng(seed);
        (0..self.num_blocks())
            .map(|_| linalg::random_matrix(&mut rng, self.block_dim, self.block_dim))
            .collect()
    }

    /// Translation-fixed subalgebra `F̂^G`, computed by averaging the basis
    /// over the right-translation cocycle: for the basis unit at block `j`
    /// the average at block `i` collects `τ_h(e_pq)` over all `g` with
    /// `x_i g ∈ H x_j`, each an outer product of unitary columns.
    pub fn translation_fixed_points(&self, fs: &FieldSystem) -> Result<MatrixStarAlgebra> {
        let m = self.num_blocks();
        let n = self.block_dim;
        let order = fs.group.order;

        // Cocycle tables: x_i g = twist · x_{sigma}.
        let mut sigma = vec![vec![0usize; order]; m];
        let mut twist = vec![vec![0usize; order]; m];
        for i in 0..m {
            let xi = self.cosets.reps[i];
            for g in fs.group.elements() {
                let moved = fs.group.mul(xi, g);
                let j = self.cosets.coset_of[moved];
                sigma[i][g] = j;
                twist[i][g] = fs.group.mul(moved, fs.group.inv(self.cosets.reps[j]));
            }
        }

        let units: Vec<(usize, usize, usize)> = (0..m)
            .flat_map(|j| (0..n).flat_map(move |p| (0..n).map(move |q| (j, p, q))))
            .collect();
        let averaged: Vec<Vec<CMat>> = parallel::par_map(&units, |&(j0, p, q)| {
            let mut values = vec![linalg::zeros(n, n); m];
            for i in 0..m {
                for g in 0..order {
                    if sigma[i][g] != j0 {
                        continue;
                    }
                    let u = &fs.rep.matrices[twist[i][g]];
                    let up = u.column(p);
                    let uq = u.column(q);
                    let block = &mut values[i];
                    for col in 0..n {
                        let w = uq[col].conj();
                        for row in 0..n {
                            block[(row, col)] += up[row] * w;
                        }
                    }
                }
            }
            for block in &mut values {
                *block = block.unscale(order as f64);
            }
            values
        });

        // Orthonormalize on value vectors, then embed block-diagonally.
        let stacked: Vec<CMat> = averaged
            .iter()
            .map(|values| {
                let mut flat = linalg::zeros(m * n, n);
                for (i, v) in values.iter().enumerate() {
                    flat.view_mut((i * n, 0), (n, n)).copy_from(v);
                }
                flat
            })
            .collect();
        let ortho = linalg::orthonormalize(&stacked, tol::ALGEBRA);
        let basis: Vec<CMat> = ortho
            .iter()
            .map(|flat| {
                let values: Vec<CMat> = (0..m)
                    .map(|i| flat.view((i * n, 0), (n, n)).clone_owned())
                    .collect();
                self.embed(&values)
            })
            .collect();
        MatrixStarAlgebra::from_orthonormal_span(basis, m * n)
    }
}

/// Builds the equivariant algebra with its right-translation action.
pub fn build_hat_algebra(fs: &FieldSystem) -> Result<EquivariantAlgebra> {
    let cosets = CosetSpace::new(fs.group.clone(), &fs.subgroup, Side::Right);
    let m = cosets.len();
    let n = fs.ambient_dim();

    // One copy of the field algebra per coset block; the block-diagonal sum
    // keeps the matrix-unit basis orthonormal and closure certified.
    let parts: Vec<MatrixStarAlgebra> = (0..m).map(|_| MatrixStarAlgebra::full(n)).collect();
    let refs: Vec<&MatrixStarAlgebra> = parts.iter().collect();
    let algebra = MatrixStarAlgebra::block_diag(&refs);
    let total = m * n;

    // W(g): block (i, σ_g(i)) carries V(h_i) where x_i·g = h_i·x_{σ(i)}.
    let w_mats: Vec<CMat> = fs
        .group
        .elements()
        .map(|g| {
            let mut w = linalg::zeros(total, total);
            for i in 0..m {
                let xi = cosets.reps[i];
                let moved = fs.group.mul(xi, g);
                let j = cosets.coset_of[moved];
                let xj = cosets.reps[j];
                let h = fs.group.mul(moved, fs.group.inv(xj));
                debug_assert!(fs.subgroup.contains(h));
                w.view_mut((i * n, j * n), (n, n))
                    .copy_from(&fs.rep.matrices[h]);
            }
            w
        })
        .collect();
    let w_rep = UnitaryRep::new(fs.group.clone(), "right-translation", w_mats)?;

    Ok(EquivariantAlgebra {
        cosets,
        block_dim: n,
        algebra,
        action: GroupAction::new(w_rep),
    })
}

// ---------------------------------------------------------------------------
// Induced representation and covariant pair
// ---------------------------------------------------------------------------

/// The induced space of `H`-equivariant vectors `ψ : G → V`,
/// `ψ(gh) = U(h⁻¹)ψ(g)`, realized on left representatives `t_i = x_i⁻¹`,
/// together with the covariant pair `(π̄, Û)` and the representation `π̂`
/// of the equivariant algebra.
#[derive(Debug, Clone)]
pub struct InducedRep {
    pub left_reps: Vec<usize>,
    pub block_dim: usize,
    pub u_hat: UnitaryRep,
}

impl InducedRep {
    pub fn total_dim(&self) -> usize {
        self.left_reps.len() * self.block_dim
    }

    /// Decomposes `g = t_i · h`; returns `(i, h)`.
    pub fn left_decompose(&self, fs: &FieldSystem, hat: &EquivariantAlgebra, g: usize) -> (usize, usize) {
        let i = hat.cosets.coset_of[fs.group.inv(g)];
        let h = fs.group.mul(fs.group.inv(self.left_reps[i]), g);
        debug_assert!(fs.subgroup.contains(h));
        (i, h)
    }

    /// `π̂(F̂)`: since `t_i⁻¹ = x_i`, evaluation at the stored blocks.
    pub fn pi_hat(&self, hat: &EquivariantAlgebra, values: &[CMat]) -> CMat {
        hat.embed(values)
    }

    /// `π̄(F)`: block `i` is `π(τ_{t_i⁻¹}(F)) = V(t_i)† F V(t_i)`.
    pub fn pi_bar(&self, fs: &FieldSystem, f: &CMat) -> CMat {
        let n = self.block_dim;
        let mut m = linalg::zeros(self.total_dim(), self.total_dim());
        for (i, &t) in self.left_reps.iter().enumerate() {
            let v = &fs.rep.matrices[t];
            m.view_mut((i * n, i * n), (n, n))
                .copy_from(&(v.adjoint() * f * v));
        }
        m
    }

    /// Value of an equivariant vector at an arbitrary group element:
    /// `ψ(t_i h) = U(h⁻¹) ψ(t_i)`.
    pub fn psi_at(
        &self,
        fs: &FieldSystem,
        hat: &EquivariantAlgebra,
        components: &[CVec],
        g: usize,
    ) -> CVec {
        let (i, h) = self.left_decompose(fs, hat, g);
        fs.rep.matrices[h].adjoint() * &components[i]
    }

    pub fn random_vector(&self, seed: u64) -> Vec<CVec> {
        let mut rng = linalg::seeded_rng(seed);
        (0..self.left_reps.len())
            .map(|_| linalg::random_state_vector(&mut rng, self.block_dim))
            .collect()
    }
}

/// Builds the induced representation aligned with the equivariant algebra.
pub fn induced_rep(fs: &FieldSystem, hat: &EquivariantAlgebra) -> Result<InducedRep> {
    let left_reps: Vec<usize> = hat.cosets.reps.iter().map(|&x| fs.group.inv(x)).collect();
    let n = fs.ambient_dim();
    let m = left_reps.len();
    let total = m * n;

    // (Û(g)ψ)(t_i) = ψ(g⁻¹ t_i) = U(h)† ψ(t_j) for g⁻¹ t_i = t_j h.
    let find_left = |g: usize| -> (usize, usize) {
        let i = hat.cosets.coset_of[fs.group.inv(g)];
        let h = fs.group.mul(fs.group.inv(left_reps[i]), g);
        (i, h)
    };
    let u_mats: Vec<CMat> = fs
        .group
        .elements()
        .map(|g| {
            let gi = fs.group.inv(g);
            let mut u = linalg::zeros(total, total);
            for (i, &ti) in left_reps.iter().enumerate() {
                let target = fs.group.mul(gi, ti);
                let (j, h) = find_left(target);
                u.view_mut((i * n, j * n), (n, n))
                    .copy_from(&fs.rep.matrices[h].adjoint());
            }
            u
        })
        .collect();
    let u_hat = UnitaryRep::new(fs.group.clone(), "induced", u_mats)?;

    Ok(InducedRep {
        left_reps,
        block_dim: n,
        u_hat,
    })
}

/// Max residual of the compatibility of `π̂` with the equivariance
/// constraint, checked pointwise on the whole group from sampled data:
/// `w(g) := π(F̂(g⁻¹)) ψ(g)` must satisfy `w(gh) = U(h⁻¹) w(g)`.
pub fn crss_compatibility_residual(
    fs: &FieldSystem,
    hat: &EquivariantAlgebra,
    ind: &InducedRep,
    samples: usize,
    seed: u64,
) -> f64 {
    let seeds: Vec<u64> = (0..samples as u64).collect();
    parallel::par_max(&seeds, |&s| {
        let values = hat.random_values(seed.wrapping_add(2 * s));
        let psi = ind.random_vector(seed.wrapping_add(2 * s + 1));
        // w(g) for every group element, from the equivariant extensions.
        let w: Vec<CVec> = fs
            .group
            .elements()
            .map(|g| {
                let fval = hat.value_at(fs, &values, fs.group.inv(g));
                let pval = ind.psi_at(fs, hat, &psi, g);
                fval * pval
            })
            .collect();
        let mut worst = 0.0f64;
        for g in fs.group.elements() {
            for &h in &fs.subgroup.members {
                let gh = fs.group.mul(g, h);
                let lhs = &w[gh];
                let rhs = fs.rep.matrices[h].adjoint() * &w[g];
                worst = worst.max((lhs - rhs).norm());
            }
        }
        worst
    })
}

/// Max covariance residual `‖π̄(τ_g F) − Û(g) π̄(F) Û(g)⁻¹‖` over seeded
/// random field elements and all group elements.
pub fn covariance_residual(
    fs: &FieldSystem,
    ind: &InducedRep,
    samples: usize,
    seed: u64,
) -> f64 {
    let seeds: Vec<u64> = (0..samples as u64).collect();
    parallel::par_max(&seeds, |&s| {
        let mut rng = linalg::seeded_rng(seed.wrapping_add(s));
        let f = linalg::random_matrix(&mut rng, fs.ambient_dim(), fs.ambient_dim());
        let pi_f = ind.pi_bar(fs, &f);
        let mut worst = 0.0f64;
        for g in fs.group.elements() {
            let lhs = ind.pi_bar(fs, &fs.action.apply(g, &f));
            let u = &ind.u_hat.matrices[g];
            let rhs = u * &pi_f * u.adjoint();
            worst = worst.max(linalg::max_abs(&(lhs - rhs)));
        }
        worst
    })
}

// ---------------------------------------------------------------------------
// Symmetry status and phase diagram
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Unbroken,
    Broken,
}

#[derive(Debug, Clone)]
pub struct SymmetryStatus {
    pub verdict: Verdict,
    pub centre_dim: usize,
    /// For each acting element, the permutation it induces on the minimal
    /// central projections.
    pub permutations: Vec<(usize, Vec<usize>)>,
    /// Orbits of the centre points under the acting set.
    pub orbits: Vec<Vec<usize>>,
}

/// Definition of spontaneous breakdown, rendered on centre spectra: the
/// action is unbroken iff every acting element fixes each minimal central
/// projection of the algebra.
pub fn symmetry_status(
    algebra: &MatrixStarAlgebra,
    action: &GroupAction,
    members: &[usize],
) -> Result<SymmetryStatus> {
    let (_, projections) = algebra.centre()?;
    let s = projections.len();
    let mut permutations = Vec::with_capacity(members.len());
    for &k in members {
        let mut perm = vec![usize::MAX; s];
        for (i, z) in projections.iter().enumerate() {
            let moved = action.apply(k, z);
            let mut best = (f64::INFINITY, usize::MAX);
            for (j, zj) in projections.iter().enumerate() {
                let d = linalg::frobenius_norm(&(&moved - zj));
                if d < best.0 {
                    best = (d, j);
                }
            }
            if best.0 > 1e-8 {
                return Err(Error::AlgebraInvariant(format!(
                    "element {k} does not permute the minimal central projections \
                     (residual {:.3e}); the action does not preserve the algebra",
                    best.0
                )));
            }
            perm[i] = best.1;
        }
        permutations.push((k, perm));
    }
    let orbits = orbits_of(s, &permutations);
    let verdict = if permutations
        .iter()
        .all(|(_, p)| p.iter().enumerate().all(|(i, &j)| i == j))
    {
        Verdict::Unbroken
    } else {
        Verdict::Broken
    };
    Ok(SymmetryStatus {
        verdict,
        centre_dim: s,
        permutations,
        orbits,
    })
}

fn orbits_of(s: usize, permutations: &[(usize, Vec<usize>)]) -> Vec<Vec<usize>> {
    let mut parent: Vec<usize> = (0..s).collect();
    fn find(parent: &mut Vec<usize>, x: usize) -> usize {
        if parent[x] != x {
            let root = find(parent, parent[x]);
            parent[x] = root;
        }
        parent[x]
    }
    for (_, perm) in permutations {
        for (i, &j) in perm.iter().enumerate() {
            let (a, b) = (find(&mut parent, i), find(&mut parent, j));
            if a != b {
                parent[a] = b;
            }
        }
    }
    let mut orbits: Vec<Vec<usize>> = vec![Vec::new(); s];
    for i in 0..s {
        let root = find(&mut parent, i);
        orbits[root].push(i);
    }
    orbits.retain(|o| !o.is_empty());
    orbits.sort_by_key(|o| o[0]);
    orbits
}

#[derive(Debug, Clone)]
pub struct ErgodicComponent {
    pub points: Vec<usize>,
    pub broken: bool,
}

/// Partition of the centre spectrum into ergodic components of the action;
/// a component is unbroken exactly when it is a single fixed point.
pub fn phase_diagram(
    algebra: &MatrixStarAlgebra,
    action: &GroupAction,
    members: &[usize],
) -> Result<Vec<ErgodicComponent>> {
    let status = symmetry_status(algebra, action, members)?;
    Ok(status
        .orbits
        .iter()
        .map(|orbit| ErgodicComponent {
            points: orbit.clone(),
            broken: orbit.len() > 1,
        })
        .collect())
}

// ---------------------------------------------------------------------------
// Sector spectrum and the c↔q channel
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiberPair {
    pub eta: usize,
    pub gamma: usize,
    pub mult: usize,
}

#[derive(Debug, Clone)]
pub struct SectorSpectrum {
    pub coset_reps: Vec<usize>,
    pub pairs: Vec<FiberPair>,
    /// Indices into `pairs`, grouped by the shared parent-group charge γ.
    pub gluing_groups: Vec<Vec<usize>>,
    pub num_points: usize,
    /// Centre dimension of the fibered model (block sums of the compressed
    /// observable algebras over cosets × charges).
    pub fibered_centre_dim: usize,
    pub expected_fibered_centre_dim: usize,
}

/// Precomputed sector data: irreps of both groups, isotypic projections of
/// the defining representation, and the joint compressions behind Ψ.
pub struct SectorContext<'a> {
    pub fs: &'a FieldSystem,
    pub g_irreps: Vec<UnitaryRep>,
    pub h_irreps: Vec<UnitaryRep>,
    pub p_eta: Vec<CMat>,
    pub q_gamma: Vec<CMat>,
    pub spectrum: SectorSpectrum,
    /// Per point (coset-major): density realizing Ψ evaluation,
    /// `tr(R · B) = Ψ(B)(point)`.
    point_densities: Vec<CMat>,
}

impl<'a> SectorContext<'a> {
    pub fn new(
        fs: &'a FieldSystem,
        g_irreps: Vec<UnitaryRep>,
        h_irreps: Vec<UnitaryRep>,
    ) -> Result<Self> {
        let restricted = rep::restrict(&fs.rep, &fs.subgroup);
        let p_eta: Vec<CMat> = isotypic_decomposition(&restricted, &h_irreps)?
            .into_iter()
            .map(|c| c.projection)
            .collect();
        let q_gamma: Vec<CMat> = isotypic_decomposition(&fs.rep, &g_irreps)?
            .into_iter()
            .map(|c| c.projection)
            .collect();

        let cosets = CosetSpace::new(fs.group.clone(), &fs.subgroup, Side::Right);
        let mut pairs = Vec::new();
        for (ei, eta) in h_irreps.iter().enumerate() {
            for (gi, gamma) in g_irreps.iter().enumerate() {
                let mult = rep::branching_multiplicity(eta, gamma, &fs.subgroup)?;
                if mult > 0 {
                    pairs.push(FiberPair {
                        eta: ei,
                        gamma: gi,
                        mult,
                    });
                }
            }
        }
        let mut gluing_groups: Vec<Vec<usize>> = Vec::new();
        for gi in 0..g_irreps.len() {
            let group: Vec<usize> = pairs
                .iter()
                .enumerate()
                .filter(|(_, p)| p.gamma == gi)
                .map(|(i, _)| i)
                .collect();
            if !group.is_empty() {
                gluing_groups.push(group);
            }
        }

        // Fibered centre: block sums over (coset, η) of A compressed to the
        // η-isotypic subspace; its centre dimension must equal
        // |H\G| · Σ_η |fiber(η)|.
        let compressed: Vec<MatrixStarAlgebra> = p_eta
            .iter()
            .filter(|p| p.trace().re > 0.5)
            .map(|p| compress_algebra(&fs.observables, p))
            .collect::<Result<Vec<_>>>()?;
        let refs: Vec<&MatrixStarAlgebra> = compressed.iter().collect();
        let mut fibered_parts: Vec<&MatrixStarAlgebra> = Vec::new();
        for _ in 0..cosets.len() {
            fibered_parts.extend(refs.iter());
        }
        let fibered = MatrixStarAlgebra::block_diag(&fibered_parts);
        let (fibered_centre, _) = fibered.centre()?;
        let fibered_centre_dim = fibered_centre.dim();
        let expected = cosets.len() * pairs.len();

        let spectrum = SectorSpectrum {
            coset_reps: cosets.reps.clone(),
            num_points: cosets.len() * pairs.len(),
            gluing_groups,
            fibered_centre_dim,
            expected_fibered_centre_dim: expected,
            pairs,
        };

        // Joint compressions behind Ψ: R(coset i, pair) =
        // V(x_i)† P_η Q_γ V(x_i) / tr(P_η Q_γ).
        let mut point_densities = Vec::with_capacity(spectrum.num_points);
        for &x in &spectrum.coset_reps {
            let v = &fs.rep.matrices[x];
            for pair in &spectrum.pairs {
                let joint = &p_eta[pair.eta] * &q_gamma[pair.gamma];
                let r = joint.trace().re;
                if r < 0.5 {
                    return Err(Error::AbsentIrrep(format!(
                        "fiber pair (η={}, γ={}) is not realized in '{}'",
                        h_irreps[pair.eta].label, g_irreps[pair.gamma].label, fs.rep.label
                    )));
                }
                point_densities.push((v.adjoint() * joint * v).unscale(r));
            }
        }

        Ok(SectorContext {
            fs,
            g_irreps,
            h_irreps,
            p_eta,
            q_gamma,
            spectrum,
            point_densities,
        })
    }

    pub fn point_index(&self, coset: usize, pair: usize) -> usize {
        coset * self.spectrum.pairs.len() + pair
    }

    /// The sector channel: `Ψ(B)(ġ, (η, γ))` as the normalized trace of
    /// `τ_ġ(B)` compressed to the joint (η under H, γ under G) isotypic
    /// subspace. Values are coset-major.
    pub fn psi(&self, b: &CMat) -> Result<Vec<Complex>> {
        let res = self.fs.extended.membership_residual(b);
        if res > tol::ALGEBRA * linalg::frobenius_norm(b).max(1.0) {
            return Err(Error::NotInSpan(res));
        }
        Ok(self
            .point_densities
            .iter()
            .map(|r| (r * b).trace())
            .collect())
    }

    /// Dual channel: a probability weight on the spectrum yields a state on
    /// the extended observables, `Ψ*(μ)(B) = Σ_points μ(pt)·Ψ(B)(pt)`.
    ///
    /// Weights on the unquotiented spectrum are accepted as they are; the
    /// gluing identification concerns the centre's function algebra and
    /// never enters the channel itself. Use [`Self::psi_dual_strict`] to
    /// reject weights that are inconsistent with the glued centre.
    pub fn psi_dual(&self, mu: &[f64]) -> Result<StateFunctional> {
        self.validate_weights(mu)?;
        let n = self.fs.ambient_dim();
        let mut rho = linalg::zeros(n, n);
        for (w, r) in mu.iter().zip(self.point_densities.iter()) {
            rho += r.scale(*w);
        }
        StateFunctional::new(rho)
    }

    /// As [`Self::psi_dual`], but additionally requires equal components
    /// across every gluing group (weights that descend to the quotient).
    pub fn psi_dual_strict(&self, mu: &[f64]) -> Result<StateFunctional> {
        if let Some((gamma, values)) = self.gluing_violation(mu) {
            return Err(Error::GluingViolation { gamma, values });
        }
        self.psi_dual(mu)
    }

    /// First gluing group whose components differ, with the offending
    /// charge label and values, if any.
    pub fn gluing_violation(&self, mu: &[f64]) -> Option<(String, Vec<f64>)> {
        for group in &self.spectrum.gluing_groups {
            if group.len() < 2 {
                continue;
            }
            let gamma = self.spectrum.pairs[group[0]].gamma;
            for coset in 0..self.spectrum.coset_reps.len() {
                let values: Vec<f64> = group
                    .iter()
                    .map(|&pi| mu[self.point_index(coset, pi)])
                    .collect();
                let spread = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
                    - values.iter().cloned().fold(f64::INFINITY, f64::min);
                if spread > 1e-12 {
                    return Some((self.g_irreps[gamma].label.clone(), values));
                }
            }
        }
        None
    }

    fn validate_weights(&self, mu: &[f64]) -> Result<()> {
        if mu.len() != self.spectrum.num_points {
            return Err(Error::BadWeights(format!(
                "{} weights for {} spectrum points",
                mu.len(),
                self.spectrum.num_points
            )));
        }
        if mu.iter().any(|&w| w < -1e-12) {
            return Err(Error::BadWeights("negative weight".into()));
        }
        let total: f64 = mu.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::BadWeights(format!("weights sum to {total}")));
        }
        Ok(())
    }

    /// Order-parameter readout: recovers the coset marginal of a product
    /// weight `μ = m ⊗ ν` from the state `Ψ*(μ)`, given the fiber
    /// distribution `ν` (weights over the fiber pairs). Solves the linear
    /// system over a Hermitian spanning set of the extended observables for
    /// the coset weights `m`.
    ///
    /// The system is full rank exactly when the fiber distribution is
    /// coset-sensitive (its aggregated compression differs across cosets);
    /// a fiber supported on a charge's whole gluing group aggregates to a
    /// central projection and cannot distinguish cosets, in which case the
    /// affine-solution-set flag (`full_rank = false`) is raised and the
    /// minimum-norm representative is returned.
    pub fn order_parameter_readout(
        &self,
        state: &StateFunctional,
        fiber: &[f64],
    ) -> Result<Readout> {
        let pair_count = self.spectrum.pairs.len();
        if fiber.len() != pair_count {
            return Err(Error::BadWeights(format!(
                "{} fiber weights for {} fiber pairs",
                fiber.len(),
                pair_count
            )));
        }
        if fiber.iter().any(|&w| w < -1e-12) {
            return Err(Error::BadWeights("negative fiber weight".into()));
        }
        let total: f64 = fiber.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::BadWeights(format!("fiber weights sum to {total}")));
        }

        let herm = self.fs.extended.hermitian_basis();
        let n_cosets = self.spectrum.coset_reps.len();
        let mut m = DMatrix::<f64>::zeros(herm.len(), n_cosets);
        for (row, b) in herm.iter().enumerate() {
            let values = self.psi(b)?;
            for coset in 0..n_cosets {
                m[(row, coset)] = (0..pair_count)
                    .map(|pi| fiber[pi] * values[self.point_index(coset, pi)].re)
                    .sum();
            }
        }
        let y = DMatrix::<f64>::from_fn(herm.len(), 1, |row, _| state.expect(&herm[row]).re);

        let rank = real_rank(&m);
        let nu = min_norm_solve(&m, &y);
        let residual = (&m * &nu - &y).norm();
        let marginal: Vec<f64> = (0..n_cosets).map(|ci| nu[(ci, 0)]).collect();
        Ok(Readout {
            marginal,
            rank,
            unknowns: n_cosets,
            full_rank: rank == n_cosets,
            residual,
        })
    }

    /// A fiber distribution whose readout system is full rank, if one
    /// exists: the point mass at the first fiber pair belonging to a
    /// gluing group with several members.
    pub fn sensitive_fiber(&self) -> Option<Vec<f64>> {
        let group = self
            .spectrum
            .gluing_groups
            .iter()
            .find(|g| g.len() >= 2)?;
        let mut fiber = vec![0.0; self.spectrum.pairs.len()];
        fiber[group[0]] = 1.0;
        Some(fiber)
    }

    /// Product weight `m ⊗ ν` on the spectrum from a coset marginal and a
    /// fiber distribution.
    pub fn product_weight(&self, marginal: &[f64], fiber: &[f64]) -> Vec<f64> {
        let mut mu = vec![0.0; self.spectrum.num_points];
        for (ci, &mc) in marginal.iter().enumerate() {
            for (pi, &fp) in fiber.iter().enumerate() {
                mu[self.point_index(ci, pi)] = mc * fp;
            }
        }
        mu
    }

    /// Coset marginal of a weight vector on the spectrum.
    pub fn marginal_of(&self, mu: &[f64]) -> Vec<f64> {
        let p = self.spectrum.pairs.len();
        (0..self.spectrum.coset_reps.len())
            .map(|ci| (0..p).map(|pi| mu[self.point_index(ci, pi)]).sum())
            .collect()
    }

    /// Sector fiber of an `η`: representation-theoretic (branching) and
    /// operator-algebraic (minimal central projections of the compressed
    /// observable algebra, labeled by the dominating G-isotypic projection).
    pub fn sector_fiber(&self, eta: usize) -> Result<FiberComparison> {
        let by_branching: Vec<usize> = self
            .spectrum
            .pairs
            .iter()
            .filter(|p| p.eta == eta)
            .map(|p| p.gamma)
            .collect();

        let p = &self.p_eta[eta];
        if p.trace().re < 0.5 {
            return Err(Error::AbsentIrrep(self.h_irreps[eta].label.clone()));
        }
        let (compressed, iso) = compress_algebra_with_isometry(&self.fs.observables, p)?;
        let (_, projections) = compressed.centre()?;
        let mut by_centre = Vec::with_capacity(projections.len());
        for z in &projections {
            let ambient_z = &iso * z * iso.adjoint();
            let mut label = None;
            for (gi, q) in self.q_gamma.iter().enumerate() {
                if linalg::max_abs(&(q * &ambient_z - &ambient_z)) < 1e-8 {
                    label = Some(gi);
                    break;
                }
            }
            let gi = label.ok_or_else(|| {
                Error::AlgebraInvariant(
                    "central projection not dominated by a single charge".into(),
                )
            })?;
            by_centre.push(gi);
        }
        by_centre.sort_unstable();
        let mut sorted_branching = by_branching.clone();
        sorted_branching.sort_unstable();
        Ok(FiberComparison {
            eta,
            agree: sorted_branching == by_centre,
            by_branching,
            by_centre,
        })
    }
}

#[derive(Debug, Clone)]
pub struct FiberComparison {
    pub eta: usize,
    pub by_branching: Vec<usize>,
    pub by_centre: Vec<usize>,
    pub agree: bool,
}

#[derive(Debug, Clone)]
pub struct Readout {
    pub marginal: Vec<f64>,
    pub rank: usize,
    pub unknowns: usize,
    /// When false the linear system determines the weights only up to an
    /// affine solution set; the marginal is the minimum-norm representative.
    pub full_rank: bool,
    pub residual: f64,
}

fn real_rank(m: &DMatrix<f64>) -> usize {
    let svd = m.clone().svd(false, false);
    let smax = svd.singular_values.iter().fold(0.0f64, |a, &s| a.max(s));
    let cutoff = tol::SV_CUTOFF * smax.max(1.0);
    svd.singular_values.iter().filter(|&&s| s > cutoff).count()
}

/// Minimum-norm least-squares solution via SVD with the crate cutoff.
fn min_norm_solve(m: &DMatrix<f64>, y: &DMatrix<f64>) -> DMatrix<f64> {
    let svd = m.clone().svd(true, true);
    let smax = svd.singular_values.iter().fold(0.0f64, |a, &s| a.max(s));
    let cutoff = tol::SV_CUTOFF * smax.max(1.0);
    let u = svd.u.as_ref().expect("svd with u");
    let v_t = svd.v_t.as_ref().expect("svd with v_t");
    let mut nu = DMatrix::<f64>::zeros(m.ncols(), 1);
    for (i, &s) in svd.singular_values.iter().enumerate() {
        if s > cutoff {
            let coeff = (u.column(i).transpose() * y)[(0, 0)] / s;
            nu += v_t.row(i).transpose() * coeff;
        }
    }
    nu
}

/// Compression of an algebra to the range of a projection commuting with it.
fn compress_algebra(algebra: &MatrixStarAlgebra, p: &CMat) -> Result<MatrixStarAlgebra> {
    compress_algebra_with_isometry(algebra, p).map(|(a, _)| a)
}

fn compress_algebra_with_isometry(
    algebra: &MatrixStarAlgebra,
    p: &CMat,
) -> Result<(MatrixStarAlgebra, CMat)> {
    let (vals, vecs) = linalg::hermitian_eigen(p);
    let range: Vec<usize> = vals
        .iter()
        .enumerate()
        .filter(|(_, &v)| v > 0.5)
        .map(|(i, _)| i)
        .collect();
    let r = range.len();
    let n = p.nrows();
    let mut iso = linalg::zeros(n, r);
    for (col, &i) in range.iter().enumerate() {
        iso.set_column(col, &vecs.column(i));
    }
    let compressed: Vec<CMat> = algebra
        .basis()
        .iter()
        .map(|b| iso.adjoint() * b * &iso)
        .collect();
    let alg = MatrixStarAlgebra::from_invariant_span(compressed, r)?;
    Ok((alg, iso))
}

// ---------------------------------------------------------------------------
// Relations report
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct CheckResult {
    pub name: String,
    pub pass: bool,
    pub residual: f64,
    pub detail: String,
}

#[derive(Debug, Clone)]
pub struct RelationsReport {
    pub checks: Vec<CheckResult>,
}

impl RelationsReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

/// Verifies the structural relations of the model:
/// (a) the translation-fixed part of the equivariant algebra is isomorphic
///     to `A_d` by evaluation at the identity coset,
/// (b) the centre of the equivariant algebra has dimension `|H\G|` and the
///     translation action is transitive on its points,
/// (c) the Galois data of `A_d` inside the field recovers `H` and its
///     normalizer,
/// (d) Frobenius reciprocity holds for every fiber pair.
pub fn verify_relations(
    fs: &FieldSystem,
    hat: &EquivariantAlgebra,
    ctx: &SectorContext,
    threshold: f64,
) -> Result<RelationsReport> {
    let mut checks = Vec::new();

    // (a) F̂ fixed under right translation ≅ A_d via evaluation at the
    // identity coset.
    let fixed = hat.translation_fixed_points(fs)?;
    let dim_match = fixed.dim() == fs.extended.dim();
    let id_coset = hat
        .cosets
        .coset_of
        .iter()
        .position(|&c| hat.cosets.reps[c] == fs.group.identity)
        .map(|g| hat.cosets.coset_of[g])
        .unwrap_or(0);
    let mut hom_residual = 0.0f64;
    let mut image_residual = 0.0f64;
    let mut image = Vec::with_capacity(fixed.dim());
    for b in fixed.basis() {
        let blocks = hat.blocks(b);
        let ev = blocks[id_coset].clone();
        image_residual = image_residual.max(fs.extended.membership_residual(&ev));
        image.push(ev);
    }
    // Multiplicativity of evaluation on sampled pairs of fixed elements.
    let mut rng = linalg::seeded_rng(0xE7A1);
    use rand::Rng;
    let k = fixed.dim();
    for _ in 0..64.min(k * k) {
        let i = rng.random_range(0..k);
        let j = rng.random_range(0..k);
        let prod = &fixed.basis()[i] * &fixed.basis()[j];
        let ev_prod = hat.blocks(&prod)[id_coset].clone();
        let sep = &image[i] * &image[j];
        hom_residual = hom_residual.max(linalg::max_abs(&(ev_prod - sep)));
    }
    let image_rank = linalg::orthonormalize(&image, tol::ALGEBRA).len();
    let surjective = image_rank == fs.extended.dim();
    let res_a = hom_residual.max(image_residual);
    checks.push(CheckResult {
        name: "translation-fixed part equals extended observables".into(),
        pass: dim_match && surjective && res_a < threshold,
        residual: res_a,
        detail: format!(
            "dim F̂^G = {}, dim A_d = {}, evaluation image rank = {}",
            fixed.dim(),
            fs.extended.dim(),
            image_rank
        ),
    });

    // (b) dim Z(F̂) = |H\G| and the translation permutes the centre points
    // transitively.
    let all: Vec<usize> = fs.group.elements().collect();
    let status = symmetry_status(&hat.algebra, &hat.action, &all)?;
    let m = hat.cosets.len();
    let transitive = status.orbits.len() == 1;
    checks.push(CheckResult {
        name: "centre of the equivariant algebra is the coset space".into(),
        pass: status.centre_dim == m && transitive,
        residual: (status.centre_dim as f64 - m as f64).abs(),
        detail: format!(
            "dim Z = {}, |H\\G| = {m}, orbits = {}",
            status.centre_dim,
            status.orbits.len()
        ),
    });

    // (c) Galois data of A_d inside F.
    let (fixing, stabilizing) = galois_stabilizer(&fs.action, &fs.extended)?;
    let (normalizer, _) = normalizer_quotient(&fs.group, &fs.subgroup)?;
    let fix_ok = fixing.members == fs.subgroup.members;
    let stab_ok = stabilizing.members == normalizer.members;
    checks.push(CheckResult {
        name: "Galois group of the extended observables".into(),
        pass: fix_ok && stab_ok,
        residual: 0.0,
        detail: format!(
            "fixing = {:?} (H = {:?}), stabilizing order = {} (normalizer order = {})",
            fixing.members,
            fs.subgroup.members,
            stabilizing.order(),
            normalizer.order()
        ),
    });

    // (d) Frobenius reciprocity on every fiber pair.
    let mut frob_ok = true;
    let mut worst = 0.0f64;
    for pair in &ctx.spectrum.pairs {
        let (a, b) = rep::frobenius_check(
            &ctx.h_irreps[pair.eta],
            &ctx.g_irreps[pair.gamma],
            &fs.subgroup,
        )?;
        if a != b || a != pair.mult {
            frob_ok = false;
            worst = worst.max((a as f64 - b as f64).abs());
        }
    }
    checks.push(CheckResult {
        name: "Frobenius reciprocity on fiber pairs".into(),
        pass: frob_ok,
        residual: worst,
        detail: format!("{} pairs checked", ctx.spectrum.pairs.len()),
    });

    Ok(RelationsReport { checks })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::catalog;
    use crate::linalg::cr;

    fn s3_z3_system() -> FieldSystem {
        let cat = catalog::s3();
        build_field_system(cat.subgroup("Z3"), None).unwrap()
    }

    fn s3_context(fs: &FieldSystem) -> SectorContext<'_> {
        let cat = catalog::s3();
        let h_irreps = rep::irreps(&fs.subgroup.group, 0).unwrap();
        SectorContext::new(fs, cat.irreps.clone(), h_irreps).unwrap()
    }

    #[test]
    fn field_system_dimensions() {
        let fs = s3_z3_system();
        assert_eq!(fs.field.dim(), 36);
        assert_eq!(fs.observables.dim(), 6);
        assert_eq!(fs.extended.dim(), 12);
        assert!(fs.warnings.is_empty());
        assert!(fs.expectation_residual < tol::COND_EXP);
    }

    #[test]
    fn degenerate_subgroup_choices() {
        let cat = catalog::s3();
        let full = build_field_system(Subgroup::full(cat.group.clone()), None).unwrap();
        assert!(full.observables.same_span(&full.extended));

        let triv = build_field_system(Subgroup::trivial(cat.group.clone()), None).unwrap();
        assert_eq!(triv.extended.dim(), 36); // A_d = F
    }

    #[test]
    fn hat_algebra_for_s3_z3() {
        let fs = s3_z3_system();
        let hat = build_hat_algebra(&fs).unwrap();
        assert_eq!(hat.num_blocks(), 2);
        assert_eq!(hat.algebra.dim(), 72);
        let (z, _) = hat.algebra.centre().unwrap();
        assert_eq!(z.dim(), 2);
    }

    #[test]
    fn hat_algebra_degenerate_cases() {
        let cat = catalog::s3();
        let fs = build_field_system(Subgroup::full(cat.group.clone()), None).unwrap();
        let hat = build_hat_algebra(&fs).unwrap();
        assert_eq!(hat.algebra.dim(), 36); // F̂ ≅ F when H = G

        let z2 = catalog::cyclic(2);
        let fs2 = build_field_system(Subgroup::trivial(z2.group.clone()), None).unwrap();
        let hat2 = build_hat_algebra(&fs2).unwrap();
        let (z, _) = hat2.algebra.centre().unwrap();
        assert_eq!(z.dim(), 2);
    }

    #[test]
    fn equivariance_holds_by_construction() {
        let fs = s3_z3_system();
        let hat = build_hat_algebra(&fs).unwrap();
        let values = hat.random_values(42);
        // F̂(h·g) = τ_h(F̂(g)) for every h in H, g in G.
        for g in fs.group.elements() {
            for &h in &fs.subgroup.members {
                let hg = fs.group.mul(h, g);
                let lhs = hat.value_at(&fs, &values, hg);
                let rhs = fs.action.apply(h, &hat.value_at(&fs, &values, g));
                assert!(linalg::is_close(&lhs, &rhs, 1e-12));
            }
        }
    }

    #[test]
    fn induced_rep_dimensions_and_homomorphism() {
        let fs = s3_z3_system();
        let hat = build_hat_algebra(&fs).unwrap();
        let ind = induced_rep(&fs, &hat).unwrap();
        assert_eq!(ind.total_dim(), 12);
        // Û is a unitary representation to machine precision.
        for g in fs.group.elements() {
            for h in fs.group.elements() {
                let prod = &ind.u_hat.matrices[g] * &ind.u_hat.matrices[h];
                let expect = &ind.u_hat.matrices[fs.group.mul(g, h)];
                assert!(linalg::max_abs(&(prod - expect)) < 1e-12);
            }
        }
    }

    #[test]
    fn crss_rep_compatibility_and_covariance() {
        let fs = s3_z3_system();
        let hat = build_hat_algebra(&fs).unwrap();
        let ind = induced_rep(&fs, &hat).unwrap();
        assert!(crss_compatibility_residual(&fs, &hat, &ind, 20, 7) < tol::CRSS_COMPAT);
        assert!(covariance_residual(&fs, &ind, 100, 11) < tol::COVARIANCE);
    }

    #[test]
    fn pi_hat_intertwines_translation_action() {
        let fs = s3_z3_system();
        let hat = build_hat_algebra(&fs).unwrap();
        let ind = induced_rep(&fs, &hat).unwrap();
        let values = hat.random_values(3);
        let embedded = hat.embed(&values);
        for g in fs.group.elements() {
            // π̂(g·F̂) = Û(g) π̂(F̂) Û(g)†.
            let moved = hat.action.apply(g, &embedded);
            let u = &ind.u_hat.matrices[g];
            let rhs = u * &embedded * u.adjoint();
            assert!(linalg::max_abs(&(moved - rhs)) < 1e-10);
        }
    }

    #[test]
    fn symmetry_status_of_field_is_unbroken() {
        let fs = s3_z3_system();
        let all: Vec<usize> = fs.group.elements().collect();
        let status = symmetry_status(&fs.field, &fs.action, &all).unwrap();
        assert_eq!(status.verdict, Verdict::Unbroken);
        assert_eq!(status.centre_dim, 1);
    }

    #[test]
    fn symmetry_status_of_hat_algebra() {
        let fs = s3_z3_system();
        let hat = build_hat_algebra(&fs).unwrap();
        let all: Vec<usize> = fs.group.elements().collect();

        let status = symmetry_status(&hat.algebra, &hat.action, &all).unwrap();
        assert_eq!(status.verdict, Verdict::Broken);
        assert_eq!(status.orbits, vec![vec![0, 1]]);
        // Rotations fix both centre points, reflections swap them.
        for (g, perm) in &status.permutations {
            let expected = if fs.subgroup.contains(*g) {
                vec![0, 1]
            } else {
                vec![1, 0]
            };
            assert_eq!(perm, &expected, "element {g}");
        }

        let restricted = symmetry_status(&hat.algebra, &hat.action, &fs.subgroup.members).unwrap();
        assert_eq!(restricted.verdict, Verdict::Unbroken);
    }

    #[test]
    fn phase_diagram_components() {
        let fs = s3_z3_system();
        let hat = build_hat_algebra(&fs).unwrap();
        let all: Vec<usize> = fs.group.elements().collect();

        let full = phase_diagram(&hat.algebra, &hat.action, &all).unwrap();
        assert_eq!(full.len(), 1);
        assert!(full[0].broken);
        assert_eq!(full[0].points.len(), 2);

        let restricted = phase_diagram(&hat.algebra, &hat.action, &fs.subgroup.members).unwrap();
        assert_eq!(restricted.len(), 2);
        assert!(restricted.iter().all(|c| !c.broken));

        let trivial_centre = phase_diagram(&fs.field, &fs.action, &all).unwrap();
        assert_eq!(trivial_centre.len(), 1);
        assert!(!trivial_centre[0].broken);
    }

    #[test]
    fn sector_spectrum_s3_z3() {
        let fs = s3_z3_system();
        let ctx = s3_context(&fs);
        let spec = &ctx.spectrum;
        assert_eq!(spec.coset_reps.len(), 2);
        assert_eq!(spec.pairs.len(), 4);
        assert_eq!(spec.num_points, 8);
        assert_eq!(spec.fibered_centre_dim, spec.expected_fibered_centre_dim);
        assert_eq!(spec.fibered_centre_dim, 8);
        // Gluing: the two pairs over std share a group.
        let sizes: Vec<usize> = spec.gluing_groups.iter().map(|g| g.len()).collect();
        assert_eq!(sizes.iter().sum::<usize>(), 4);
        assert!(sizes.contains(&2));
    }

    #[test]
    fn sector_spectrum_z2_in_z4() {
        let cat = catalog::cyclic(4);
        let fs = build_field_system(cat.subgroup("Z2"), None).unwrap();
        let h_irreps = rep::irreps(&fs.subgroup.group, 0).unwrap();
        let ctx = SectorContext::new(&fs, cat.irreps.clone(), h_irreps).unwrap();
        // Each Z2 character has two extensions: 2 cosets × 4 pairs.
        assert_eq!(ctx.spectrum.num_points, 8);
        assert_eq!(
            ctx.spectrum.fibered_centre_dim,
            ctx.spectrum.expected_fibered_centre_dim
        );
    }

    #[test]
    fn sector_fibers_agree_both_ways() {
        let fs = s3_z3_system();
        let ctx = s3_context(&fs);
        for eta in 0..ctx.h_irreps.len() {
            let cmp = ctx.sector_fiber(eta).unwrap();
            assert!(cmp.agree, "fiber mismatch for η index {eta}");
        }
        // The trivial η sees exactly the two one-dimensional charges.
        let triv = (0..3)
            .find(|&k| {
                ctx.h_irreps[k]
                    .character
                    .iter()
                    .all(|z| (z - cr(1.0)).norm() < 1e-9)
            })
            .unwrap();
        let cmp = ctx.sector_fiber(triv).unwrap();
        let labels: Vec<&str> = cmp
            .by_branching
            .iter()
            .map(|&gi| ctx.g_irreps[gi].label.as_str())
            .collect();
        assert_eq!(labels, vec!["triv", "sgn"]);
    }

    #[test]
    fn sector_fiber_with_whole_group() {
        let cat = catalog::s3();
        let fs = build_field_system(Subgroup::full(cat.group.clone()), None).unwrap();
        let h_irreps: Vec<UnitaryRep> = cat
            .irreps
            .iter()
            .map(|r| rep::restrict(r, &fs.subgroup))
            .collect();
        let ctx = SectorContext::new(&fs, cat.irreps.clone(), h_irreps).unwrap();
        for (eta, pair) in ctx.spectrum.pairs.iter().enumerate() {
            assert_eq!(pair.eta, pair.gamma);
            let cmp = ctx.sector_fiber(eta).unwrap();
            assert_eq!(cmp.by_branching, vec![eta]);
            assert!(cmp.agree);
        }
    }

    #[test]
    fn psi_unital_and_invariant_on_observables() {
        let fs = s3_z3_system();
        let ctx = s3_context(&fs);

        let ones = ctx.psi(&linalg::identity(6)).unwrap();
        assert!(ones.iter().all(|v| (v - cr(1.0)).norm() < 1e-12));

        // Group-invariant arguments cannot see the coset.
        let p = ctx.spectrum.pairs.len();
        for b in fs.observables.basis() {
            let values = ctx.psi(b).unwrap();
            for pi in 0..p {
                let v0 = values[ctx.point_index(0, pi)];
                let v1 = values[ctx.point_index(1, pi)];
                assert!((v0 - v1).norm() < tol::PSI_INVARIANCE);
            }
        }
    }

    #[test]
    fn psi_detects_the_coset_on_extended_observables() {
        let fs = s3_z3_system();
        let ctx = s3_context(&fs);
        let p = ctx.spectrum.pairs.len();
        // Exhaustive scan over a basis of A_d: at least one element must
        // separate the cosets on some fiber pair.
        let mut witnessed = false;
        for b in fs.extended.basis() {
            let values = ctx.psi(b).unwrap();
            for pi in 0..p {
                let v0 = values[ctx.point_index(0, pi)];
                let v1 = values[ctx.point_index(1, pi)];
                if (v0 - v1).norm() > 1e-8 {
                    witnessed = true;
                }
            }
        }
        assert!(witnessed, "no extended observable separated the vacua");
    }

    #[test]
    fn psi_rejects_elements_outside_extended_observables() {
        let fs = s3_z3_system();
        let ctx = s3_context(&fs);
        // A generic matrix is not H-invariant.
        let mut rng = linalg::seeded_rng(9);
        let outside = linalg::random_matrix(&mut rng, 6, 6);
        assert!(matches!(ctx.psi(&outside), Err(Error::NotInSpan(_))));
    }

    #[test]
    fn psi_dual_and_readout_round_trip() {
        let fs = s3_z3_system();
        let ctx = s3_context(&fs);
        let fiber = ctx.sensitive_fiber().expect("S3/Z3 has a 2-member group");

        // Uniform coset marginal over the fixed fiber.
        let uniform = ctx.product_weight(&[0.5, 0.5], &fiber);
        let state = ctx.psi_dual(&uniform).unwrap();
        let readout = ctx.order_parameter_readout(&state, &fiber).unwrap();
        assert!(readout.full_rank, "sensitive fiber gives a full-rank system");
        assert!((readout.marginal[0] - 0.5).abs() < tol::READOUT);
        assert!((readout.marginal[1] - 0.5).abs() < tol::READOUT);

        // Concentrated on the second coset.
        let mu = ctx.product_weight(&[0.0, 1.0], &fiber);
        let state2 = ctx.psi_dual(&mu).unwrap();
        let readout2 = ctx.order_parameter_readout(&state2, &fiber).unwrap();
        assert!(
            (readout2.marginal[0] - 0.0).abs() < tol::READOUT
                && (readout2.marginal[1] - 1.0).abs() < tol::READOUT,
            "marginal {:?}",
            readout2.marginal
        );

        // An insensitive fiber (uniform over a whole gluing group
        // aggregates to a central projection) flags the affine solution set.
        let group = ctx
            .spectrum
            .gluing_groups
            .iter()
            .find(|g| g.len() >= 2)
            .unwrap();
        let mut flat = vec![0.0; ctx.spectrum.pairs.len()];
        for &pi in group {
            flat[pi] = 1.0 / group.len() as f64;
        }
        let mu3 = ctx.product_weight(&[0.0, 1.0], &flat);
        let state3 = ctx.psi_dual(&mu3).unwrap();
        let readout3 = ctx.order_parameter_readout(&state3, &flat).unwrap();
        assert!(!readout3.full_rank);
    }

    #[test]
    fn strict_dual_enforces_gluing() {
        let fs = s3_z3_system();
        let ctx = s3_context(&fs);
        let points = ctx.spectrum.num_points;
        // A weight with unequal components inside a gluing group does not
        // descend to the glued centre: the strict dual rejects it, the
        // channel itself still accepts it.
        let group = ctx
            .spectrum
            .gluing_groups
            .iter()
            .find(|g| g.len() == 2)
            .unwrap()
            .clone();
        let mut mu = vec![0.0; points];
        mu[ctx.point_index(0, group[0])] = 0.7;
        mu[ctx.point_index(0, group[1])] = 0.3;
        assert!(matches!(
            ctx.psi_dual_strict(&mu),
            Err(Error::GluingViolation { .. })
        ));
        assert!(ctx.psi_dual(&mu).is_ok());

        // Equal components pass the strict check.
        let mut glued = vec![0.0; points];
        glued[ctx.point_index(0, group[0])] = 0.5;
        glued[ctx.point_index(0, group[1])] = 0.5;
        assert!(ctx.psi_dual_strict(&glued).is_ok());
    }

    #[test]
    fn point_mass_dual_state_is_the_sector_state() {
        let fs = s3_z3_system();
        let ctx = s3_context(&fs);
        let points = ctx.spectrum.num_points;
        // A point mass on a singleton gluing group is a valid input.
        let singleton = ctx
            .spectrum
            .gluing_groups
            .iter()
            .find(|g| g.len() == 1)
            .unwrap()[0];
        let mut mu = vec![0.0; points];
        mu[ctx.point_index(0, singleton)] = 1.0;
        let state = ctx.psi_dual(&mu).unwrap();
        // Evaluating Ψ against the dual state reproduces the weights:
        // ω(B) = Ψ(B) at the chosen point.
        for b in fs.extended.basis() {
            let values = ctx.psi(b).unwrap();
            let direct = state.expect(b);
            assert!((direct - values[ctx.point_index(0, singleton)]).norm() < 1e-10);
        }
    }

    #[test]
    fn verify_relations_s3_z3() {
        let fs = s3_z3_system();
        let hat = build_hat_algebra(&fs).unwrap();
        let ctx = s3_context(&fs);
        let report = verify_relations(&fs, &hat, &ctx, 1e-10).unwrap();
        assert!(report.all_pass(), "failing checks: {:?}", report.checks);
    }

    #[test]
    fn verify_relations_z2_in_z4() {
        let cat = catalog::cyclic(4);
        let fs = build_field_system(cat.subgroup("Z2"), None).unwrap();
        let hat = build_hat_algebra(&fs).unwrap();
        let h_irreps = rep::irreps(&fs.subgroup.group, 0).unwrap();
        let ctx = SectorContext::new(&fs, cat.irreps.clone(), h_irreps).unwrap();
        let report = verify_relations(&fs, &hat, &ctx, 1e-10).unwrap();
        assert!(report.all_pass(), "failing checks: {:?}", report.checks);
        // Abelian case: the stabilizer is everything.
        let (_, stab) = galois_stabilizer(&fs.action, &fs.extended).unwrap();
        assert_eq!(stab.order(), 4);
    }

    #[test]
    fn verify_relations_whole_group() {
        let cat = catalog::s3();
        let fs = build_field_system(Subgroup::full(cat.group.clone()), None).unwrap();
        let hat = build_hat_algebra(&fs).unwrap();
        let (z, _) = hat.algebra.centre().unwrap();
        assert_eq!(z.dim(), 1);
    }
}
