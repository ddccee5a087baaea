//! Finite-dimensional matrix *-algebras.
//!
//! An algebra is stored as a trace-orthonormal basis of its span inside
//! `M_n(ℂ)`. Commutants and centres are nullspaces of commutator systems:
//! the candidate space starts from the eigenspace structure of a seeded
//! random Hermitian element (which collapses the dimension immediately) and
//! is then constrained against every basis element, so the result never
//! depends on genericity assumptions.

use std::sync::{Arc, OnceLock};

use crate::error::{Error, Result};
use crate::group::{FiniteGroup, Subgroup};
use crate::linalg::{self, cr, CMat, Complex, ScaleComplex};
use crate::parallel;
use crate::rep::UnitaryRep;
use crate::tol;

#[derive(Debug, Clone)]
pub struct MatrixStarAlgebra {
    ambient: usize,
    basis: Vec<CMat>,
    closure_certified: bool,
    /// Set when a non-unital span was extended by the identity.
    pub unitized: bool,
    /// Centre and minimal central projections, computed on first use.
    centre_cache: OnceLock<(Box<MatrixStarAlgebra>, Vec<CMat>)>,
}

impl MatrixStarAlgebra {
    /// Full matrix algebra `M_n`, basis the matrix units.
    pub fn full(n: usize) -> Self {
        let basis = (0..n)
            .flat_map(|i| (0..n).map(move |j| linalg::matrix_unit(n, i, j)))
            .collect();
        MatrixStarAlgebra {
            ambient: n,
            basis,
            closure_certified: true,
            unitized: false,
            centre_cache: OnceLock::new(),
        }
    }

    /// Scalars `ℂ·1` inside `M_n`.
    pub fn scalars(n: usize) -> Self {
        MatrixStarAlgebra {
            ambient: n,
            basis: vec![linalg::identity(n).unscale((n as f64).sqrt())],
            closure_certified: true,
            unitized: false,
            centre_cache: OnceLock::new(),
        }
    }

    /// Smallest unital *-closed span containing the generators.
    pub fn from_generators(generators: &[CMat]) -> Result<Self> {
        let n = generators
            .first()
            .map(|g| g.nrows())
            .ok_or_else(|| Error::DimensionMismatch("no generators".into()))?;
        for g in generators {
            if g.nrows() != n || g.ncols() != n {
                return Err(Error::DimensionMismatch(format!(
                    "generator is {}x{}, expected {n}x{n}",
                    g.nrows(),
                    g.ncols()
                )));
            }
        }
        let mut seed: Vec<CMat> = vec![linalg::identity(n)];
        for g in generators {
            seed.push(g.clone());
            seed.push(g.adjoint());
        }
        let mut basis = linalg::orthonormalize(&seed, tol::ALGEBRA);
        loop {
            let mut new_dirs: Vec<CMat> = Vec::new();
            for a in &basis {
                for b in &basis {
                    let prod = a * b;
                    let (_, res) = linalg::project_span(&basis, &prod);
                    if res > tol::ALGEBRA {
                        new_dirs.push(prod.adjoint());
                        new_dirs.push(prod);
                    }
                }
                if new_dirs.len() > 4 * n * n {
                    break;
                }
            }
            if new_dirs.is_empty() {
                break;
            }
            let mut all = basis.clone();
            all.extend(new_dirs);
            let next = linalg::orthonormalize(&all, tol::ALGEBRA);
            if next.len() == basis.len() {
                break;
            }
            basis = next;
        }
        Ok(MatrixStarAlgebra {
            ambient: n,
            basis,
            closure_certified: true,
            unitized: false,
            centre_cache: OnceLock::new(),
        })
    }

    /// Algebra from a spanning set, verifying *-closure and unitality.
    /// Non-unital spans are unitized and flagged.
    pub fn from_span(mats: &[CMat]) -> Result<Self> {
        let n = mats
            .first()
            .map(|m| m.nrows())
            .ok_or_else(|| Error::DimensionMismatch("empty span".into()))?;
        let mut basis = linalg::orthonormalize(mats, tol::ALGEBRA);
        let (_, id_res) = linalg::project_span(&basis, &linalg::identity(n));
        let mut unitized = false;
        if id_res > tol::ALGEBRA {
            let mut all = vec![linalg::identity(n)];
            all.extend(basis);
            basis = linalg::orthonormalize(&all, tol::ALGEBRA);
            unitized = true;
        }
        let alg = MatrixStarAlgebra {
            ambient: n,
            basis,
            closure_certified: false,
            unitized,
            centre_cache: OnceLock::new(),
        };
        let residual = alg.closure_residual(None);
        if residual > tol::ALGEBRA {
            return Err(Error::AlgebraInvariant(format!(
                "span not closed under products/adjoints (residual {residual:.3e})"
            )));
        }
        Ok(MatrixStarAlgebra {
            closure_certified: true,
            ..alg
        })
    }

    /// Internal constructor for spaces that are algebras by construction
    /// (ranges of conditional expectations, commutants, compressions along
    /// central projections). Certifies closure exhaustively for small bases
    /// and on a seeded sample for large ones.
    pub(crate) fn from_invariant_span(mats: Vec<CMat>, ambient: usize) -> Result<Self> {
        let basis = linalg::orthonormalize(&mats, tol::ALGEBRA);
        Self::from_orthonormal_span(basis, ambient)
    }

    /// As [`Self::from_invariant_span`] for a basis that is already
    /// trace-orthonormal.
    pub(crate) fn from_orthonormal_span(basis: Vec<CMat>, ambient: usize) -> Result<Self> {
        let alg = MatrixStarAlgebra {
            ambient,
            basis,
            closure_certified: false,
            unitized: false,
            centre_cache: OnceLock::new(),
        };
        let sample = if alg.basis.len() <= 40 { None } else { Some(256) };
        let residual = alg.closure_residual(sample);
        if residual > tol::ALGEBRA {
            return Err(Error::AlgebraInvariant(format!(
                "invariant span failed closure certificate (residual {residual:.3e})"
            )));
        }
        Ok(MatrixStarAlgebra {
            closure_certified: true,
            ..alg
        })
    }

    /// Block-diagonal direct sum acting on the concatenation of the
    /// ambient spaces.
    pub fn block_diag(parts: &[&MatrixStarAlgebra]) -> Self {
        let total: usize = parts.iter().map(|p| p.ambient).sum();
        let mut basis = Vec::new();
        let mut offset = 0;
        for part in parts {
            for b in &part.basis {
                let mut m = linalg::zeros(total, total);
                m.view_mut((offset, offset), (part.ambient, part.ambient))
                    .copy_from(b);
                basis.push(m);
            }
            offset += part.ambient;
        }
        MatrixStarAlgebra {
            ambient: total,
            basis,
            closure_certified: parts.iter().all(|p| p.closure_certified),
            unitized: false,
            centre_cache: OnceLock::new(),
        }
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[CMat] {
        &self.basis
    }

    pub fn is_closure_certified(&self) -> bool {
        self.closure_certified
    }

    /// Max residual of products and adjoints of basis elements against the
    /// span; `sample` limits the number of product pairs checked.
    pub fn closure_residual(&self, sample: Option<usize>) -> f64 {
        let k = self.basis.len();
        let mut worst = 0.0f64;
        for b in &self.basis {
            let (_, res) = linalg::project_span(&self.basis, &b.adjoint());
            worst = worst.max(res);
        }
        let pairs: Vec<(usize, usize)> = match sample {
            None => (0..k).flat_map(|i| (0..k).map(move |j| (i, j))).collect(),
            Some(count) => {
                let mut rng = linalg::seeded_rng(0xC105E);
                use rand::Rng;
                (0..count)
                    .map(|_| (rng.random_range(0..k), rng.random_range(0..k)))
                    .collect()
            }
        };
        let prod_worst = parallel::par_max(&pairs, |&(i, j)| {
            let prod = &self.basis[i] * &self.basis[j];
            let (_, res) = linalg::project_span(&self.basis, &prod);
            res
        });
        worst.max(prod_worst)
    }

    /// Residual of `m` against the span.
    pub fn membership_residual(&self, m: &CMat) -> f64 {
        let (_, res) = linalg::project_span(&self.basis, m);
        res
    }

    pub fn contains(&self, m: &CMat) -> bool {
        self.membership_residual(m) <= tol::ALGEBRA * linalg::frobenius_norm(m).max(1.0)
    }

    pub fn project(&self, m: &CMat) -> CMat {
        linalg::project_span(&self.basis, m).0
    }

    /// Whether every basis element of `other` lies in this span.
    pub fn contains_algebra(&self, other: &MatrixStarAlgebra) -> bool {
        other.basis.iter().all(|b| self.contains(b))
    }

    pub fn same_span(&self, other: &MatrixStarAlgebra) -> bool {
        self.dim() == other.dim() && self.contains_algebra(other)
    }

    /// Random Hermitian element of the span (seeded).
    pub fn random_hermitian_element(&self, seed: u64) -> CMat {
        let mut rng = linalg::seeded_rng(seed);
        use rand::Rng;
        let mut x = linalg::zeros(self.ambient, self.ambient);
        for b in &self.basis {
            let t: f64 = rng.random_range(-1.0..1.0);
            let u: f64 = rng.random_range(-1.0..1.0);
            x += (b + b.adjoint()).scale(0.5 * t);
            x += ((b - b.adjoint()) * linalg::c(0.0, -0.5)).scale(u);
        }
        x
    }

    /// A real-orthonormal basis of the Hermitian part of the span. For a
    /// *-closed span of complex dimension k this has exactly k elements.
    pub fn hermitian_basis(&self) -> Vec<CMat> {
        let mut candidates = Vec::with_capacity(2 * self.basis.len());
        for b in &self.basis {
            candidates.push((b + b.adjoint()).scale(0.5));
            candidates.push((b - b.adjoint()) * linalg::c(0.0, -0.5));
        }
        // Real Gram-Schmidt under Re tr(a† b).
        let mut out: Vec<CMat> = Vec::new();
        for cand in candidates {
            let mut v = cand;
            for _ in 0..2 {
                for b in &out {
                    let coeff = linalg::trace_inner(b, &v).re;
                    v -= b.scale(coeff);
                }
            }
            let norm = linalg::frobenius_norm(&v);
            if norm > tol::ALGEBRA {
                out.push(v.unscale(norm));
            }
        }
        debug_assert_eq!(out.len(), self.basis.len());
        out
    }

    // -----------------------------------------------------------------
    // Commutant and centre
    // -----------------------------------------------------------------

    /// Commutant `{x in M_n : [x, s] = 0 for all s in the span}`.
    ///
    /// Starts from the centralizer of one random Hermitian span element
    /// (read off the eigenspace structure) and intersects with the kernel of
    /// every remaining commutator map, so the output is exact regardless of
    /// how generic the random element was.
    pub fn commutant(&self) -> Result<MatrixStarAlgebra> {
        let g1 = self.random_hermitian_element(0x5EC7C0);
        let mut space = centralizer_basis(&g1);
        for b in &self.basis {
            space = constrain_commuting(space, b);
            if space.is_empty() {
                break;
            }
        }
        MatrixStarAlgebra::from_invariant_span(space, self.ambient)
    }

    /// Centre `Z = A ∩ A'` together with its minimal projections. The
    /// result is cached: the algebra is immutable, and symmetry analyses
    /// query the same centre repeatedly.
    pub fn centre(&self) -> Result<(MatrixStarAlgebra, Vec<CMat>)> {
        if let Some((z, projections)) = self.centre_cache.get() {
            return Ok(((**z).clone(), projections.clone()));
        }
        let z = self.centre_algebra()?;
        let projections = minimal_central_projections(&z, self.ambient)?;
        let _ = self
            .centre_cache
            .set((Box::new(z.clone()), projections.clone()));
        Ok((z, projections))
    }

    pub(crate) fn centre_algebra(&self) -> Result<MatrixStarAlgebra> {
        let g1 = self.random_hermitian_element(0xCE47E0);
        let central_of_g1 = centralizer_basis(&g1);
        // Intersect the centralizer with the span before imposing the
        // remaining commutation constraints.
        let mut space = intersect_spans(&central_of_g1, &self.basis);
        space = space.iter().map(|v| self.project(v)).collect();
        space = linalg::orthonormalize(&space, tol::ALGEBRA);
        for b in &self.basis {
            space = constrain_commuting(space, b);
            if space.is_empty() {
                break;
            }
        }
        MatrixStarAlgebra::from_invariant_span(space, self.ambient)
    }
}

/// Orthonormal basis of `{x : [x, g] = 0}` for Hermitian `g`, assembled from
/// the eigenvector outer products within each eigenvalue cluster.
fn centralizer_basis(g: &CMat) -> Vec<CMat> {
    let (vals, vecs) = linalg::hermitian_eigen(g);
    let clusters = linalg::cluster_sorted(&vals, tol::EIG_CLUSTER);
    let mut basis = Vec::new();
    for range in &clusters {
        for i in range.clone() {
            for j in range.clone() {
                let ui = vecs.column(i);
                let uj = vecs.column(j);
                basis.push(ui * uj.adjoint());
            }
        }
    }
    basis
}

/// `{x in span(space) : [x, b] = 0}`, keeping the basis orthonormal.
fn constrain_commuting(space: Vec<CMat>, b: &CMat) -> Vec<CMat> {
    if space.is_empty() {
        return space;
    }
    let n = space[0].nrows();
    let commutators: Vec<CMat> = space.iter().map(|v| linalg::commutator(v, b)).collect();
    let scale = linalg::frobenius_norm(b).max(1.0);
    let worst = commutators
        .iter()
        .map(linalg::frobenius_norm)
        .fold(0.0, f64::max);
    if worst <= 1e-12 * scale {
        return space;
    }
    let mut m = linalg::zeros(n * n, space.len());
    for (k, comm) in commutators.iter().enumerate() {
        m.set_column(k, &linalg::mat_to_vec(comm));
    }
    let kernel = linalg::nullspace(&m);
    let new_space: Vec<CMat> = kernel
        .iter()
        .map(|coeffs| {
            let mut acc = linalg::zeros(n, n);
            for (k, v) in space.iter().enumerate() {
                acc += v.scale_complex(coeffs[k]);
            }
            acc
        })
        .collect();
    linalg::orthonormalize(&new_space, tol::ALGEBRA)
}

/// Intersection of two spans given by orthonormal bases, via principal
/// angles: singular triplets of the cross-Gram matrix with σ ≈ 1.
fn intersect_spans(b1: &[CMat], b2: &[CMat]) -> Vec<CMat> {
    if b1.is_empty() || b2.is_empty() {
        return Vec::new();
    }
    let n = b1[0].nrows();
    let mut gram = linalg::zeros(b1.len(), b2.len());
    for (p, x) in b1.iter().enumerate() {
        for (q, y) in b2.iter().enumerate() {
            gram[(p, q)] = linalg::trace_inner(x, y);
        }
    }
    let svd = gram.svd(true, false);
    let u = svd.u.expect("svd requested u");
    let mut out = Vec::new();
    for (i, &sigma) in svd.singular_values.iter().enumerate() {
        if sigma > 1.0 - tol::SV_CUTOFF {
            let mut acc = linalg::zeros(n, n);
            for (p, x) in b1.iter().enumerate() {
                acc += x.scale_complex(u[(p, i)]);
            }
            out.push(acc);
        }
    }
    out
}

/// Minimal projections of a commutative *-algebra, by spectral clustering
/// of a seeded random self-adjoint element; retried with fresh seeds on
/// degenerate clusterings.
fn minimal_central_projections(z: &MatrixStarAlgebra, ambient: usize) -> Result<Vec<CMat>> {
    let s = z.dim();
    if s == 1 {
        return Ok(vec![linalg::identity(ambient)]);
    }
    let herm = z.hermitian_basis();
    let mut last_residual = 0.0;
    for attempt in 0..3u64 {
        let mut rng = linalg::seeded_rng(0x9201 + attempt);
        use rand::Rng;
        let mut x = linalg::zeros(ambient, ambient);
        for h in &herm {
            x += h.scale(rng.random_range(-1.0..1.0));
        }
        let (vals, vecs) = linalg::hermitian_eigen(&x);
        let clusters = linalg::cluster_sorted(&vals, tol::EIG_CLUSTER);
        if clusters.len() != s {
            last_residual = (clusters.len() as f64 - s as f64).abs();
            continue;
        }
        let mut projections: Vec<CMat> = clusters
            .iter()
            .map(|range| {
                let cols = vecs.columns(range.start, range.end - range.start);
                cols * cols.adjoint()
            })
            .collect();
        // Certify: idempotent, mutually orthogonal, summing to 1, central.
        let mut ok = true;
        let mut sum = linalg::zeros(ambient, ambient);
        for p in &projections {
            sum += p;
            if linalg::max_abs(&(p * p - p)) > tol::ISOTYPIC
                || linalg::hermiticity_defect(p) > tol::ISOTYPIC
                || z.membership_residual(p) > 1e-7
            {
                ok = false;
            }
        }
        for i in 0..projections.len() {
            for j in (i + 1)..projections.len() {
                if linalg::max_abs(&(&projections[i] * &projections[j])) > tol::ISOTYPIC {
                    ok = false;
                }
            }
        }
        if linalg::max_abs(&(&sum - linalg::identity(ambient))) > tol::ISOTYPIC {
            ok = false;
        }
        if !ok {
            last_residual = f64::NAN;
            continue;
        }
        projections.sort_by(compare_projections);
        return Ok(projections);
    }
    Err(Error::Clustering {
        context: "minimal central projections".into(),
        residual: last_residual,
    })
}

fn compare_projections(a: &CMat, b: &CMat) -> std::cmp::Ordering {
    use std::cmp::Ordering;
    let ra = a.trace().re.round() as i64;
    let rb = b.trace().re.round() as i64;
    match ra.cmp(&rb) {
        Ordering::Equal => {}
        other => return other,
    }
    for i in 0..a.nrows() {
        let da = (a[(i, i)].re / 1e-6).round() as i64;
        let db = (b[(i, i)].re / 1e-6).round() as i64;
        match db.cmp(&da) {
            Ordering::Equal => {}
            other => return other,
        }
    }
    Ordering::Equal
}

// ---------------------------------------------------------------------------
// Group actions and averaging
// ---------------------------------------------------------------------------

/// A group acting on `M_n` by conjugation with unitaries.
#[derive(Debug, Clone)]
pub struct GroupAction {
    pub rep: UnitaryRep,
}

impl GroupAction {
    pub fn new(rep: UnitaryRep) -> Self {
        GroupAction { rep }
    }

    pub fn group(&self) -> &Arc<FiniteGroup> {
        &self.rep.group
    }

    pub fn ambient_dim(&self) -> usize {
        self.rep.dim
    }

    /// `τ_g(m) = U(g) m U(g)†`.
    pub fn apply(&self, g: usize, m: &CMat) -> CMat {
        let u = &self.rep.matrices[g];
        u * m * u.adjoint()
    }

    /// Max residual of the span of `algebra` under all τ_g.
    pub fn span_invariance_residual(&self, algebra: &MatrixStarAlgebra) -> f64 {
        let elems: Vec<usize> = self.group().elements().collect();
        parallel::par_max(&elems, |&g| {
            algebra
                .basis()
                .iter()
                .map(|b| algebra.membership_residual(&self.apply(g, b)))
                .fold(0.0, f64::max)
        })
    }
}

/// Group-average conditional expectation `(1/|K|) Σ_k τ_k(a)` over the
/// parent-group member list `members`.
///
/// Matrix units take an outer-product fast path: `U e_pq U† = u_p u_q†`
/// with `u_p` the p-th column.
pub fn conditional_expectation(action: &GroupAction, members: &[usize], a: &CMat) -> CMat {
    let n = a.nrows();
    let mut acc = linalg::zeros(n, a.ncols());
    if let Some((p, q, z)) = single_entry(a) {
        for &k in members {
            let u = &action.rep.matrices[k];
            let up = u.column(p);
            let uq = u.column(q);
            for col in 0..n {
                let w = z * uq[col].conj();
                for row in 0..n {
                    acc[(row, col)] += up[row] * w;
                }
            }
        }
    } else {
        for &k in members {
            acc += action.apply(k, a);
        }
    }
    acc.unscale(members.len() as f64)
}

fn single_entry(a: &CMat) -> Option<(usize, usize, Complex)> {
    let mut found = None;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            if a[(i, j)].norm_sqr() > 0.0 {
                if found.is_some() {
                    return None;
                }
                found = Some((i, j, a[(i, j)]));
            }
        }
    }
    found
}

/// Fixed-point subalgebra `{a in A : τ_k(a) = a for all k}` as the range of
/// the averaging conditional expectation.
pub fn fixed_point_algebra(
    algebra: &MatrixStarAlgebra,
    action: &GroupAction,
    members: &[usize],
) -> Result<MatrixStarAlgebra> {
    let averaged = parallel::par_map(algebra.basis(), |b| {
        conditional_expectation(action, members, b)
    });
    MatrixStarAlgebra::from_invariant_span(averaged, algebra.ambient_dim())
}

/// Isotypic projections `P_η = (dim η / |K|) Σ_k conj(χ_η(k)) U(k)` of the
/// acting representation, with their multiplicities.
pub struct IsotypicComponent {
    pub label: String,
    pub projection: CMat,
    pub multiplicity: usize,
}

pub fn isotypic_decomposition(
    rep: &UnitaryRep,
    irreps: &[UnitaryRep],
) -> Result<Vec<IsotypicComponent>> {
    let group = &rep.group;
    let order = group.order as f64;
    let n = rep.dim;
    let mut components = Vec::with_capacity(irreps.len());
    let mut sum = linalg::zeros(n, n);
    for irr in irreps {
        let mut p = linalg::zeros(n, n);
        for g in group.elements() {
            let chi = irr.character[group.class_of(g)];
            p += rep.matrices[g].scale_complex(chi.conj());
        }
        p = p.scale(irr.dim as f64 / order);
        let tr = p.trace().re / irr.dim as f64;
        let mult = tr.round();
        if (tr - mult).abs() > tol::INT_ROUND || mult < -0.5 {
            return Err(Error::NonIntegerMultiplicity {
                context: format!("isotypic multiplicity of {}", irr.label),
                value: tr,
                residual: (tr - mult).abs(),
            });
        }
        sum += &p;
        components.push(IsotypicComponent {
            label: irr.label.clone(),
            projection: p,
            multiplicity: mult as usize,
        });
    }
    let completeness = linalg::max_abs(&(&sum - linalg::identity(n)));
    if completeness > tol::ISOTYPIC {
        return Err(Error::AlgebraInvariant(format!(
            "isotypic projections do not sum to identity (residual {completeness:.3e})"
        )));
    }
    for (i, a) in components.iter().enumerate() {
        for (j, b) in components.iter().enumerate() {
            let prod = &a.projection * &b.projection;
            let target = if i == j {
                a.projection.clone()
            } else {
                linalg::zeros(n, n)
            };
            if linalg::max_abs(&(prod - target)) > tol::ISOTYPIC {
                return Err(Error::AlgebraInvariant(format!(
                    "isotypic projections {} and {} are not orthogonal idempotents",
                    a.label, b.label
                )));
            }
        }
    }
    Ok(components)
}

// ---------------------------------------------------------------------------
// States and central decompositions
// ---------------------------------------------------------------------------

/// Positive normalized functional on a matrix algebra, in density form:
/// `ω(a) = tr(ρ a)`.
#[derive(Debug, Clone)]
pub struct StateFunctional {
    pub density: CMat,
}

impl StateFunctional {
    pub fn new(density: CMat) -> Result<Self> {
        let herm = linalg::hermiticity_defect(&density);
        if herm > tol::TRACE_NORM * 10.0 {
            return Err(Error::StateInvariant(format!(
                "density not self-adjoint (residual {herm:.3e})"
            )));
        }
        let (vals, _) = linalg::hermitian_eigen(&density);
        if let Some(&min) = vals.first() {
            if min < tol::PSD {
                return Err(Error::StateInvariant(format!(
                    "density has negative eigenvalue {min:.3e}"
                )));
            }
        }
        let tr = density.trace().re;
        if (tr - 1.0).abs() > tol::TRACE_NORM {
            return Err(Error::StateInvariant(format!(
                "density has trace {tr} (expected 1)"
            )));
        }
        Ok(StateFunctional { density })
    }

    pub fn from_vector(psi: &linalg::CVec) -> Result<Self> {
        Self::new(psi * psi.adjoint())
    }

    pub fn dim(&self) -> usize {
        self.density.nrows()
    }

    pub fn expect(&self, a: &CMat) -> Complex {
        (&self.density * a).trace()
    }

    pub fn maximally_mixed(n: usize) -> Self {
        StateFunctional {
            density: linalg::identity(n).unscale(n as f64),
        }
    }
}

#[derive(Debug)]
pub struct CentralDecomposition {
    pub projections: Vec<CMat>,
    pub weights: Vec<f64>,
    /// `None` where the weight vanishes (component omitted, recorded).
    pub components: Vec<Option<StateFunctional>>,
    /// Max reconstruction error of `ω = Σ w_i ω_i` on the algebra basis.
    pub reconstruction_residual: f64,
}

/// Unique decomposition of a state along the minimal central projections of
/// the algebra.
pub fn central_decompose_state(
    state: &StateFunctional,
    algebra: &MatrixStarAlgebra,
) -> Result<CentralDecomposition> {
    let (_, projections) = algebra.centre()?;
    let mut weights = Vec::with_capacity(projections.len());
    let mut components = Vec::with_capacity(projections.len());
    for z in &projections {
        let w = state.expect(z).re;
        if w > 1e-12 {
            let comp = z * &state.density * z;
            components.push(Some(StateFunctional::new(comp.unscale(w))?));
            weights.push(w);
        } else {
            components.push(None);
            weights.push(0.0);
        }
    }
    // Reconstruction is checked as functionals on the algebra.
    let mut residual = 0.0f64;
    for b in algebra.basis() {
        let direct = state.expect(b);
        let mut recon = linalg::ZERO;
        for (w, comp) in weights.iter().zip(components.iter()) {
            if let Some(c) = comp {
                recon += cr(*w) * c.expect(b);
            }
        }
        residual = residual.max((direct - recon).norm());
    }
    if residual > tol::CENTRAL_DECOMP {
        return Err(Error::StateInvariant(format!(
            "central decomposition fails to reconstruct the state (residual {residual:.3e})"
        )));
    }
    Ok(CentralDecomposition {
        projections,
        weights,
        components,
        reconstruction_residual: residual,
    })
}

// ---------------------------------------------------------------------------
// Galois / stabilizer subgroups
// ---------------------------------------------------------------------------

/// `fixing = {g : τ_g(b) = b for all b}` and
/// `stabilizing = {g : τ_g(span B) = span B}` as subgroups of the acting
/// group.
pub fn galois_stabilizer(
    action: &GroupAction,
    sub_algebra: &MatrixStarAlgebra,
) -> Result<(Subgroup, Subgroup)> {
    let group = action.group().clone();
    let elems: Vec<usize> = group.elements().collect();
    let verdicts = parallel::par_map(&elems, |&g| {
        let mut fix = true;
        let mut stab = true;
        for b in sub_algebra.basis() {
            let moved = action.apply(g, b);
            if linalg::max_abs(&(&moved - b)) > tol::ALGEBRA {
                fix = false;
            }
            if sub_algebra.membership_residual(&moved) > tol::ALGEBRA {
                stab = false;
                break;
            }
        }
        (fix, stab)
    });
    let fixing: Vec<usize> = elems
        .iter()
        .zip(&verdicts)
        .filter(|(_, v)| v.0)
        .map(|(&g, _)| g)
        .collect();
    let stabilizing: Vec<usize> = elems
        .iter()
        .zip(&verdicts)
        .filter(|(_, v)| v.1)
        .map(|(&g, _)| g)
        .collect();
    let fix_sub = Subgroup::new(group.clone(), "fix", &fixing)?;
    let stab_sub = Subgroup::new(group, "stab", &stabilizing)?;
    Ok((fix_sub, stab_sub))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::catalog;
    use crate::linalg::c;
    use crate::rep;

    fn pauli_x() -> CMat {
        CMat::from_row_slice(2, 2, &[cr(0.0), cr(1.0), cr(1.0), cr(0.0)])
    }

    fn pauli_z() -> CMat {
        CMat::from_row_slice(2, 2, &[cr(1.0), cr(0.0), cr(0.0), cr(-1.0)])
    }

    #[test]
    fn generated_algebra_examples() {
        // {1} generates the scalars.
        let scalars = MatrixStarAlgebra::from_generators(&[linalg::identity(2)]).unwrap();
        assert_eq!(scalars.dim(), 1);

        // {σx, σz} generate all of M2. Oracle: iterated closure must reach
        // dimension 4 and contain every matrix unit.
        let full = MatrixStarAlgebra::from_generators(&[pauli_x(), pauli_z()]).unwrap();
        assert_eq!(full.dim(), 4);
        for i in 0..2 {
            for j in 0..2 {
                assert!(full.contains(&linalg::matrix_unit(2, i, j)));
            }
        }

        // A single nondegenerate diagonal generates the diagonal algebra.
        let diag = MatrixStarAlgebra::from_generators(&[pauli_z()]).unwrap();
        assert_eq!(diag.dim(), 2);
        assert!(diag.contains(&linalg::matrix_unit(2, 0, 0)));
        assert!(!diag.contains(&linalg::matrix_unit(2, 0, 1)));
    }

    #[test]
    fn commutant_examples() {
        // M_n' = C·1.
        let full = MatrixStarAlgebra::full(3);
        let comm = full.commutant().unwrap();
        assert_eq!(comm.dim(), 1);
        assert!(comm.contains(&linalg::identity(3)));

        // (C·1)' = M_n.
        let scalars = MatrixStarAlgebra::scalars(3);
        let comm2 = scalars.commutant().unwrap();
        assert_eq!(comm2.dim(), 9);

        // The diagonal algebra on C³ is its own commutant.
        let diag = MatrixStarAlgebra::from_generators(&[CMat::from_diagonal(
            &linalg::CVec::from_vec(vec![cr(1.0), cr(2.0), cr(3.0)]),
        )])
        .unwrap();
        assert_eq!(diag.dim(), 3);
        let dcomm = diag.commutant().unwrap();
        assert!(dcomm.same_span(&diag));
    }

    #[test]
    fn double_commutant_equals_span() {
        let mut rng = linalg::seeded_rng(11);
        let g = linalg::random_hermitian(&mut rng, 4);
        let alg = MatrixStarAlgebra::from_generators(&[g]).unwrap();
        let dbl = alg.commutant().unwrap().commutant().unwrap();
        assert!(dbl.same_span(&alg));

        let full = MatrixStarAlgebra::full(3);
        assert!(full.commutant().unwrap().commutant().unwrap().same_span(&full));
    }

    #[test]
    fn centre_of_block_algebra() {
        // M2 has trivial centre.
        let m2 = MatrixStarAlgebra::full(2);
        let (z, projections) = m2.centre().unwrap();
        assert_eq!(z.dim(), 1);
        assert_eq!(projections.len(), 1);

        // M2 ⊕ M3 block diagonal: centre dim 2, projections = block units.
        let m3 = MatrixStarAlgebra::full(3);
        let sum = MatrixStarAlgebra::block_diag(&[&m2, &m3]);
        let (z2, proj2) = sum.centre().unwrap();
        assert_eq!(z2.dim(), 2);
        assert_eq!(proj2.len(), 2);
        let ranks: Vec<i64> = proj2.iter().map(|p| p.trace().re.round() as i64).collect();
        assert_eq!(ranks, vec![2, 3]);
    }

    #[test]
    fn centre_of_z3_commutant_in_regular_s3() {
        // End_{Z3}(C[S3]): the commutant of Z3 acting by left translation
        // on C[S3] has centre of dimension |Ẑ3| = 3.
        let cat = catalog::s3();
        let reg = rep::UnitaryRep::regular(cat.group.clone());
        let action = GroupAction::new(reg);
        let z3 = cat.subgroup("Z3");
        let full = MatrixStarAlgebra::full(6);
        let fixed = fixed_point_algebra(&full, &action, &z3.members).unwrap();
        assert_eq!(fixed.dim(), 12);
        let (z, _) = fixed.centre().unwrap();
        assert_eq!(z.dim(), 3);
    }

    #[test]
    fn conditional_expectation_examples() {
        // Averaging over Z2 = {1, σz-conjugation} kills σx.
        let z2 = catalog::cyclic(2);
        let u = rep::UnitaryRep::new(
            z2.group.clone(),
            "z2 on qubit",
            vec![linalg::identity(2), pauli_z()],
        )
        .unwrap();
        let action = GroupAction::new(u);
        let members = vec![0, 1];
        let avg = conditional_expectation(&action, &members, &pauli_x());
        assert!(linalg::max_abs(&avg) < 1e-14);

        // Invariant elements are untouched; the identity maps to itself.
        let avg_z = conditional_expectation(&action, &members, &pauli_z());
        assert!(linalg::is_close(&avg_z, &pauli_z(), 1e-14));
        let avg_id = conditional_expectation(&action, &members, &linalg::identity(2));
        assert!(linalg::is_close(&avg_id, &linalg::identity(2), 1e-14));
    }

    #[test]
    fn conditional_expectation_is_idempotent_positive_trace_preserving() {
        let cat = catalog::s3();
        let action = GroupAction::new(rep::UnitaryRep::regular(cat.group.clone()));
        let members: Vec<usize> = (0..6).collect();
        let mut rng = linalg::seeded_rng(5);
        for _ in 0..10 {
            let a = linalg::random_matrix(&mut rng, 6, 6);
            let e1 = conditional_expectation(&action, &members, &a);
            let e2 = conditional_expectation(&action, &members, &e1);
            assert!(linalg::is_close(&e1, &e2, tol::COND_EXP));
            assert!((e1.trace() - a.trace()).norm() < 1e-10);

            let pos = &a * a.adjoint();
            let ep = conditional_expectation(&action, &members, &pos);
            let (vals, _) = linalg::hermitian_eigen(&ep);
            assert!(vals[0] > -1e-10);
        }
    }

    #[test]
    fn fixed_points_of_regular_s3() {
        let cat = catalog::s3();
        let action = GroupAction::new(rep::UnitaryRep::regular(cat.group.clone()));
        let full = MatrixStarAlgebra::full(6);

        // K = {e}: everything is fixed.
        let triv = fixed_point_algebra(&full, &action, &[0]).unwrap();
        assert_eq!(triv.dim(), 36);

        // K = S3: the commutant of the left regular representation has
        // dimension Σ multiplicities² = 6 and structure C ⊕ C ⊕ M2.
        let members: Vec<usize> = (0..6).collect();
        let fixed = fixed_point_algebra(&full, &action, &members).unwrap();
        assert_eq!(fixed.dim(), 6);
        let (z, _) = fixed.centre().unwrap();
        assert_eq!(z.dim(), 3);
    }

    #[test]
    fn isotypic_decomposition_of_regular_s3() {
        let cat = catalog::s3();
        let reg = rep::UnitaryRep::regular(cat.group.clone());
        let comps = isotypic_decomposition(&reg, &cat.irreps).unwrap();
        let mult: Vec<usize> = comps.iter().map(|c| c.multiplicity).collect();
        let dims: Vec<usize> = cat.irreps.iter().map(|r| r.dim).collect();
        assert_eq!(mult, dims); // the regular rep contains each irrep dim-many times
    }

    #[test]
    fn isotypic_decomposition_restricted_to_z3() {
        let cat = catalog::s3();
        let z3 = cat.subgroup("Z3");
        let reg = rep::UnitaryRep::regular(cat.group.clone());
        let restricted = rep::restrict(&reg, &z3);
        let h_irreps = rep::irreps(&z3.group, 0).unwrap();
        let comps = isotypic_decomposition(&restricted, &h_irreps).unwrap();
        assert!(comps.iter().all(|c| c.multiplicity == 2));
    }

    #[test]
    fn isotypic_single_component_for_trivial_group() {
        let e = catalog::cyclic(1);
        let rep = rep::UnitaryRep::new(e.group.clone(), "anything", vec![linalg::identity(3)])
            .unwrap();
        let irreps = rep::irreps(&e.group, 0).unwrap();
        let comps = isotypic_decomposition(&rep, &irreps).unwrap();
        assert_eq!(comps.len(), 1);
        assert_eq!(comps[0].multiplicity, 3);
    }

    #[test]
    fn central_decomposition_examples() {
        // Trivial centre: single component equal to the state.
        let m2 = MatrixStarAlgebra::full(2);
        let mut rng = linalg::seeded_rng(3);
        let rho = linalg::random_density(&mut rng, 2);
        let state = StateFunctional::new(rho.clone()).unwrap();
        let dec = central_decompose_state(&state, &m2).unwrap();
        assert_eq!(dec.weights, vec![1.0]);
        assert!(linalg::is_close(
            &dec.components[0].as_ref().unwrap().density,
            &rho,
            1e-12
        ));

        // Diagonal algebra on C²: point components with weights (0.3, 0.7).
        let diag = MatrixStarAlgebra::from_generators(&[pauli_z()]).unwrap();
        let rho2 = CMat::from_diagonal(&linalg::CVec::from_vec(vec![cr(0.3), cr(0.7)]));
        let state2 = StateFunctional::new(rho2).unwrap();
        let dec2 = central_decompose_state(&state2, &diag).unwrap();
        let mut w = dec2.weights.clone();
        w.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!((w[0] - 0.3).abs() < 1e-12 && (w[1] - 0.7).abs() < 1e-12);
        assert!(dec2.reconstruction_residual < tol::CENTRAL_DECOMP);

        // A product state against a block algebra decomposes with a point
        // measure on the second factor.
        let m2b = MatrixStarAlgebra::full(2);
        let sum = MatrixStarAlgebra::block_diag(&[&m2b, &m2b]);
        let mut block = linalg::zeros(4, 4);
        block.view_mut((0, 0), (2, 2)).copy_from(&rho);
        let state3 = StateFunctional::new(block).unwrap();
        let dec3 = central_decompose_state(&state3, &sum).unwrap();
        assert!((dec3.weights[0] - 1.0).abs() < 1e-12);
        assert_eq!(dec3.components.iter().filter(|c| c.is_some()).count(), 1);
    }

    #[test]
    fn zero_probability_components_are_omitted_and_recorded() {
        let diag = MatrixStarAlgebra::from_generators(&[pauli_z()]).unwrap();
        let rho = CMat::from_diagonal(&linalg::CVec::from_vec(vec![cr(1.0), cr(0.0)]));
        let state = StateFunctional::new(rho).unwrap();
        let dec = central_decompose_state(&state, &diag).unwrap();
        assert_eq!(dec.components.iter().filter(|c| c.is_none()).count(), 1);
    }

    #[test]
    fn galois_stabilizer_examples() {
        let cat = catalog::s3();
        let action = GroupAction::new(rep::UnitaryRep::regular(cat.group.clone()));

        // B = C·1 is fixed by everything.
        let scalars = MatrixStarAlgebra::scalars(6);
        let (fix, _) = galois_stabilizer(&action, &scalars).unwrap();
        assert_eq!(fix.order(), 6);

        // B = F^{Z3}: fixing = Z3, stabilizing = N_{S3}(Z3) = S3.
        let full = MatrixStarAlgebra::full(6);
        let z3 = cat.subgroup("Z3");
        let fixed_z3 = fixed_point_algebra(&full, &action, &z3.members).unwrap();
        let (fix2, stab2) = galois_stabilizer(&action, &fixed_z3).unwrap();
        assert_eq!(fix2.members, vec![0, 1, 2]);
        assert_eq!(stab2.order(), 6);
        // fixing is normal inside stabilizing
        assert!(fix2.members.iter().all(|&h| {
            stab2
                .members
                .iter()
                .all(|&g| fix2.contains(cat.group.conj(g, h)))
        }));
    }

    #[test]
    fn galois_fixing_contains_the_averaging_group() {
        let cat = catalog::s3();
        let action = GroupAction::new(rep::UnitaryRep::regular(cat.group.clone()));
        let full = MatrixStarAlgebra::full(6);
        let z2 = cat.subgroup("Z2");
        let fixed = fixed_point_algebra(&full, &action, &z2.members).unwrap();
        let (fix, _) = galois_stabilizer(&action, &fixed).unwrap();
        for m in &z2.members {
            assert!(fix.contains(*m));
        }
        // On the regular representation the fixing group is exactly K.
        assert_eq!(fix.members, z2.members);
    }

    #[test]
    fn non_unital_span_is_unitized() {
        let e00 = linalg::matrix_unit(2, 0, 0);
        let alg = MatrixStarAlgebra::from_span(&[e00]).unwrap();
        assert!(alg.unitized);
        assert!(alg.contains(&linalg::identity(2)));
    }

    #[test]
    fn rejects_non_closed_span() {
        // span{1, e01} is not *-closed.
        let e01 = linalg::matrix_unit(2, 0, 1);
        assert!(MatrixStarAlgebra::from_span(&[linalg::identity(2), e01]).is_err());
    }

    #[test]
    fn hermitian_basis_has_span_dimension() {
        let full = MatrixStarAlgebra::full(3);
        let h = full.hermitian_basis();
        assert_eq!(h.len(), 9);
        for m in &h {
            assert!(linalg::hermiticity_defect(m) < 1e-12);
        }
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let a = linalg::identity(2);
        let b = linalg::identity(3);
        assert!(matches!(
            MatrixStarAlgebra::from_generators(&[a, b]),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn state_validation() {
        assert!(StateFunctional::new(pauli_z()).is_err()); // not psd
        let ok = StateFunctional::new(linalg::identity(2).unscale(2.0)).unwrap();
        assert_eq!(ok.dim(), 2);
        let psi = linalg::CVec::from_vec(vec![cr(1.0), c(0.0, 1.0)]).unscale(2.0_f64.sqrt());
        let pure = StateFunctional::from_vector(&psi).unwrap();
        assert!((pure.expect(&linalg::identity(2)) - cr(1.0)).norm() < 1e-12);
    }
}
