//! Unitary representations of finite groups: character tables, explicit
//! irreps, restriction, Mackey induction, branching multiplicities,
//! Frobenius reciprocity, minimal extensions and comma-category fibers.
//!
//! Character tables use the class-sum (Burnside) method: the structure
//! constants of the class sums are simultaneously diagonalized through a
//! seeded random Hermitian combination. Explicit irreps come from block
//! diagonalization of the regular representation by a random Hermitian
//! commutant element; built-in groups override this with an exact catalog.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::group::{CosetSpace, FiniteGroup, Side, Subgroup};
use crate::linalg::{self, c, cr, CMat, Complex};
use crate::tol;

/// A unitary representation, matrices indexed by group element.
#[derive(Debug, Clone)]
pub struct UnitaryRep {
    pub group: Arc<FiniteGroup>,
    pub dim: usize,
    pub matrices: Vec<CMat>,
    /// Character values, one per conjugacy class.
    pub character: Vec<Complex>,
    pub label: String,
}

impl UnitaryRep {
    /// Validated constructor: checks the homomorphism property, unitarity
    /// and constancy of the character on conjugacy classes.
    pub fn new(group: Arc<FiniteGroup>, label: &str, matrices: Vec<CMat>) -> Result<Self> {
        let rep = Self::unchecked(group, label, matrices);
        rep.validate()?;
        Ok(rep)
    }

    /// Constructor that computes the character but skips validation; used
    /// for representations that are unitary homomorphisms by construction.
    pub fn unchecked(group: Arc<FiniteGroup>, label: &str, matrices: Vec<CMat>) -> Self {
        assert_eq!(matrices.len(), group.order, "one matrix per element");
        let dim = matrices[0].nrows();
        let character = group
            .classes
            .iter()
            .map(|class| matrices[class[0]].trace())
            .collect();
        UnitaryRep {
            group,
            dim,
            matrices,
            character,
            label: label.to_string(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.group.order;
        let id = linalg::identity(self.dim);
        for g in 0..n {
            let m = &self.matrices[g];
            if m.nrows() != self.dim || m.ncols() != self.dim {
                return Err(Error::RepInvariant(format!(
                    "'{}': matrix {g} has wrong shape",
                    self.label
                )));
            }
            let uni = linalg::max_abs(&(m * m.adjoint() - &id));
            if uni > tol::REP {
                return Err(Error::RepInvariant(format!(
                    "'{}': element {g} not unitary (residual {uni:.3e})",
                    self.label
                )));
            }
        }
        for g in 0..n {
            for h in 0..n {
                let prod = &self.matrices[g] * &self.matrices[h];
                let expect = &self.matrices[self.group.mul(g, h)];
                let res = linalg::max_abs(&(&prod - expect));
                if res > tol::REP {
                    return Err(Error::RepInvariant(format!(
                        "'{}': M({g})M({h}) != M({g}·{h}) (residual {res:.3e})",
                        self.label
                    )));
                }
            }
        }
        for (ci, class) in self.group.classes.iter().enumerate() {
            for &g in class {
                let tr = self.matrices[g].trace();
                if (tr - self.character[ci]).norm() > tol::REP {
                    return Err(Error::RepInvariant(format!(
                        "'{}': character not constant on class {ci}",
                        self.label
                    )));
                }
            }
        }
        Ok(())
    }

    /// The left regular representation on ℂ[G].
    pub fn regular(group: Arc<FiniteGroup>) -> Self {
        let n = group.order;
        let matrices = (0..n)
            .map(|g| {
                let mut m = linalg::zeros(n, n);
                for x in 0..n {
                    m[(group.mul(g, x), x)] = linalg::ONE;
                }
                m
            })
            .collect();
        Self::unchecked(group, "regular", matrices)
    }

    pub fn trivial(group: Arc<FiniteGroup>) -> Self {
        let n = group.order;
        Self::unchecked(group, "triv", vec![linalg::identity(1); n])
    }

    /// Direct sum with multiplicities, blocks in the given order.
    pub fn direct_sum(
        group: Arc<FiniteGroup>,
        parts: &[(&UnitaryRep, usize)],
        label: &str,
    ) -> Self {
        let dim: usize = parts.iter().map(|(r, m)| r.dim * m).sum();
        let matrices = (0..group.order)
            .map(|g| {
                let mut m = linalg::zeros(dim, dim);
                let mut off = 0;
                for (rep, mult) in parts {
                    for _ in 0..*mult {
                        m.view_mut((off, off), (rep.dim, rep.dim))
                            .copy_from(&rep.matrices[g]);
                        off += rep.dim;
                    }
                }
                m
            })
            .collect();
        Self::unchecked(group, label, matrices)
    }

    /// Whether the matrices separate group elements.
    pub fn is_faithful(&self) -> bool {
        let id = self.group.identity;
        self.group.elements().all(|g| {
            g == id || linalg::max_abs(&(&self.matrices[g] - &self.matrices[id])) > tol::REP
        })
    }

    pub fn is_irreducible(&self) -> bool {
        let ip = char_inner(&self.group, &self.character, &self.character);
        (ip - cr(1.0)).norm() < tol::INT_ROUND
    }
}

/// Class-weighted character inner product `(1/|G|) Σ_g a(g) conj(b(g))`.
pub fn char_inner(group: &FiniteGroup, a: &[Complex], b: &[Complex]) -> Complex {
    let mut acc = linalg::ZERO;
    for (ci, class) in group.classes.iter().enumerate() {
        acc += cr(class.len() as f64) * a[ci] * b[ci].conj();
    }
    acc / cr(group.order as f64)
}

fn round_to_int(z: Complex, context: &str) -> Result<usize> {
    let rounded = z.re.round();
    let residual = (z - cr(rounded)).norm();
    if residual > tol::INT_ROUND || rounded < -0.5 {
        return Err(Error::NonIntegerMultiplicity {
            context: context.to_string(),
            value: z.re,
            residual,
        });
    }
    Ok(rounded as usize)
}

// ---------------------------------------------------------------------------
// Character table (class-sum method)
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct CharacterTable {
    pub group: Arc<FiniteGroup>,
    /// `rows[r][class]`, sorted by dimension then canonically.
    pub rows: Vec<Vec<Complex>>,
    pub dims: Vec<usize>,
    pub labels: Vec<String>,
}

impl CharacterTable {
    pub fn num_irreps(&self) -> usize {
        self.rows.len()
    }

    /// Max deviation of the rows from orthonormality in the class-weighted
    /// inner product.
    pub fn orthonormality_residual(&self) -> f64 {
        let k = self.rows.len();
        let mut worst = 0.0f64;
        for r in 0..k {
            for s in 0..k {
                let ip = char_inner(&self.group, &self.rows[r], &self.rows[s]);
                let target = if r == s { 1.0 } else { 0.0 };
                worst = worst.max((ip - cr(target)).norm());
            }
        }
        worst
    }

    /// Index of the row matching the given character, if any.
    pub fn match_row(&self, character: &[Complex]) -> Option<usize> {
        self.rows.iter().position(|row| {
            row.iter()
                .zip(character)
                .all(|(a, b)| (a - b).norm() < tol::INT_ROUND)
        })
    }
}

/// Canonical order on characters: dimension ascending, then class-by-class
/// descending by (re, im) rounded to 1e-9. Puts the trivial character first
/// among the one-dimensional ones.
pub(crate) fn canonical_char_cmp(a: &[Complex], b: &[Complex]) -> std::cmp::Ordering {
    use std::cmp::Ordering;
    let key = |z: &Complex| ((z.re / 1e-9).round() as i64, (z.im / 1e-9).round() as i64);
    match key(&a[0]).cmp(&key(&b[0])) {
        Ordering::Equal => {}
        other => return other,
    }
    for (x, y) in a.iter().zip(b.iter()) {
        match key(y).cmp(&key(x)) {
            Ordering::Equal => {}
            other => return other,
        }
    }
    Ordering::Equal
}

/// Character table by simultaneous diagonalization of the class-sum algebra.
pub fn character_table(group: &Arc<FiniteGroup>, seed: u64) -> Result<CharacterTable> {
    let k = group.num_classes();
    let sizes = group.class_sizes();
    let n = group.order as f64;

    // Multiplication by the class sum C_i in the normalized basis
    // ĉ_j = C_j/√|C_j|: entry (l, j) is a_ijl √(|C_l|/|C_j|) with
    // a_ijl = #{x in C_i : x⁻¹ z_l in C_j} for a fixed z_l in C_l.
    let mats: Vec<CMat> = (0..k)
        .map(|i| {
            let mut m = linalg::zeros(k, k);
            for l in 0..k {
                let z = group.classes[l][0];
                for &x in &group.classes[i] {
                    let j = group.class_of(group.mul(group.inv(x), z));
                    m[(l, j)] += cr((sizes[l] as f64 / sizes[j] as f64).sqrt());
                }
            }
            m
        })
        .collect();

    let mut last_residual = 0.0;
    for attempt in 0..4u64 {
        let mut rng = linalg::seeded_rng(seed.wrapping_add(attempt));
        // Random Hermitian member of the commuting family; the family is
        // closed under adjoints (the adjoint of multiplication by C_i is
        // multiplication by the class of inverses), so Hermitian and
        // anti-Hermitian parts stay inside it.
        let mut x = linalg::zeros(k, k);
        for m in &mats {
            use rand::Rng;
            let t: f64 = rng.random_range(-1.0..1.0);
            let u: f64 = rng.random_range(-1.0..1.0);
            x += (m + m.adjoint()).scale(0.5 * t) + ((m - m.adjoint()) * c(0.0, -0.5)).scale(u);
        }
        let (vals, vecs) = linalg::hermitian_eigen(&x);
        let clusters = linalg::cluster_sorted(&vals, tol::EIG_CLUSTER);
        if clusters.len() != k {
            last_residual = clusters
                .iter()
                .map(|r| vals[r.end - 1] - vals[r.start])
                .fold(0.0, f64::max);
            continue;
        }

        let mut rows: Vec<Vec<Complex>> = Vec::with_capacity(k);
        let mut ok = true;
        for col in 0..k {
            let v = vecs.column(col).clone_owned();
            // Central character values: eigenvalues of multiplication by C_i.
            let omegas: Vec<Complex> = mats.iter().map(|m| v.dotc(&(m * &v))).collect();
            let norm2: f64 = omegas
                .iter()
                .enumerate()
                .map(|(i, w)| w.norm_sqr() / sizes[i] as f64)
                .sum();
            let dim_f = (n / norm2).sqrt();
            if (dim_f - dim_f.round()).abs() > tol::INT_ROUND || dim_f.round() < 1.0 {
                ok = false;
                last_residual = (dim_f - dim_f.round()).abs();
                break;
            }
            let dim = dim_f.round();
            rows.push(
                omegas
                    .iter()
                    .enumerate()
                    .map(|(i, w)| w * cr(dim / sizes[i] as f64))
                    .collect(),
            );
        }
        if !ok {
            continue;
        }
        rows.sort_by(|a, b| canonical_char_cmp(a, b));
        let dims: Vec<usize> = rows.iter().map(|r| r[0].re.round() as usize).collect();
        let labels: Vec<String> = (0..k).map(|i| format!("r{i}")).collect();
        let table = CharacterTable {
            group: group.clone(),
            rows,
            dims,
            labels,
        };
        let residual = table.orthonormality_residual();
        if residual > tol::CHAR_ORTHO {
            last_residual = residual;
            continue;
        }
        if table.dims.iter().map(|d| d * d).sum::<usize>() != group.order {
            last_residual = f64::INFINITY;
            continue;
        }
        return Ok(table);
    }
    Err(Error::Clustering {
        context: format!("character table of {}", group.name),
        residual: last_residual,
    })
}

// ---------------------------------------------------------------------------
// Explicit irreps by block diagonalization of the regular representation
// ---------------------------------------------------------------------------

/// One explicit unitary irrep per character-table row, in table order.
///
/// The regular representation is split along the eigenspaces of a seeded
/// random Hermitian commutant element and the blocks are matched to the
/// character table. Built-in groups should prefer their exact catalog.
pub fn irreps(group: &Arc<FiniteGroup>, seed: u64) -> Result<Vec<UnitaryRep>> {
    let table = character_table(group, seed)?;
    let mut reps = irreps_matching_table(group, &table, seed)?;
    for (i, rep) in reps.iter_mut().enumerate() {
        rep.label = table.labels[i].clone();
    }
    Ok(reps)
}

pub fn irreps_matching_table(
    group: &Arc<FiniteGroup>,
    table: &CharacterTable,
    seed: u64,
) -> Result<Vec<UnitaryRep>> {
    let n = group.order;
    let lambda = UnitaryRep::regular(group.clone());
    // Right translations span the commutant of the left regular rep.
    let rho: Vec<CMat> = (0..n)
        .map(|g| {
            let mut m = linalg::zeros(n, n);
            let gi = group.inv(g);
            for x in 0..n {
                m[(group.mul(x, gi), x)] = linalg::ONE;
            }
            m
        })
        .collect();

    for attempt in 0..4u64 {
        let mut rng = linalg::seeded_rng(seed.wrapping_add(0x1000 + attempt));
        let y = rho.iter().fold(linalg::zeros(n, n), |acc, m| {
            use rand::Rng;
            let z = c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            acc + m.map(|e| e * z)
        });
        let x = (&y + y.adjoint()).scale(0.5);
        let (vals, vecs) = linalg::hermitian_eigen(&x);
        let clusters = linalg::cluster_sorted(&vals, tol::EIG_CLUSTER);

        let mut found: Vec<Option<UnitaryRep>> = vec![None; table.num_irreps()];
        let mut ok = true;
        for range in clusters {
            let b = vecs
                .columns(range.start, range.end - range.start)
                .clone_owned();
            let mats: Vec<CMat> = lambda
                .matrices
                .iter()
                .map(|m| b.adjoint() * m * &b)
                .collect();
            let candidate = UnitaryRep::unchecked(group.clone(), "block", mats);
            let Some(row) = table.match_row(&candidate.character) else {
                // Degenerate eigenvalues glued two blocks together; retry.
                ok = false;
                break;
            };
            if found[row].is_none() {
                if candidate.validate().is_err() {
                    ok = false;
                    break;
                }
                found[row] = Some(candidate);
            }
        }
        if ok && found.iter().all(|f| f.is_some()) {
            return Ok(found.into_iter().map(|f| f.unwrap()).collect());
        }
        let _ = attempt;
    }
    Err(Error::Clustering {
        context: format!(
            "block splitting of the regular representation of {}",
            group.name
        ),
        residual: f64::NAN,
    })
}

// ---------------------------------------------------------------------------
// Restriction, induction, branching
// ---------------------------------------------------------------------------

/// Restriction of a parent-group representation to a subgroup, as a
/// representation of the subgroup's intrinsic group.
pub fn restrict(gamma: &UnitaryRep, sub: &Subgroup) -> UnitaryRep {
    let matrices = sub
        .members
        .iter()
        .map(|&m| gamma.matrices[m].clone())
        .collect();
    UnitaryRep::unchecked(
        sub.group.clone(),
        &format!("{}|{}", gamma.label, sub.label()),
        matrices,
    )
}

/// Multiplicities of each irrep in `rep` by character inner products.
pub fn decompose(rep: &UnitaryRep, irreps: &[UnitaryRep]) -> Result<Vec<usize>> {
    irreps
        .iter()
        .map(|irr| {
            let ip = char_inner(&rep.group, &rep.character, &irr.character);
            round_to_int(ip, &format!("<{}, {}>", rep.label, irr.label))
        })
        .collect()
}

/// Mackey induction: explicit block matrices over left-coset representatives.
///
/// `eta` lives on `sub.group`; the result is a representation of the parent
/// of dimension `[G:H]·dim(eta)` whose block `(i, j)` is `eta(t_i⁻¹ g t_j)`
/// when that element lies in the subgroup and zero otherwise.
pub fn induce(eta: &UnitaryRep, sub: &Subgroup) -> UnitaryRep {
    let parent = sub.parent.clone();
    let cosets = CosetSpace::new(parent.clone(), sub, Side::Left);
    let m = cosets.len();
    let d = eta.dim;
    let matrices: Vec<CMat> = parent
        .elements()
        .map(|g| {
            let mut mat = linalg::zeros(m * d, m * d);
            for (j, &tj) in cosets.reps.iter().enumerate() {
                let gtj = parent.mul(g, tj);
                let i = cosets.coset_of[gtj];
                let ti = cosets.reps[i];
                let h = parent.mul(parent.inv(ti), gtj);
                let pos = sub
                    .position_of(h)
                    .expect("t_i⁻¹ g t_j lies in H by choice of i");
                mat.view_mut((i * d, j * d), (d, d))
                    .copy_from(&eta.matrices[pos]);
            }
            mat
        })
        .collect();
    UnitaryRep::unchecked(
        parent,
        &format!("Ind[{}]({})", sub.label(), eta.label),
        matrices,
    )
}

/// Induced character by the coset-representative sum (no matrices built).
pub fn induced_character(eta: &UnitaryRep, sub: &Subgroup) -> Vec<Complex> {
    let parent = &sub.parent;
    let cosets = CosetSpace::new(parent.clone(), sub, Side::Left);
    parent
        .classes
        .iter()
        .map(|class| {
            let g = class[0];
            let mut acc = linalg::ZERO;
            for &t in &cosets.reps {
                let x = parent.mul(parent.mul(parent.inv(t), g), t);
                if let Some(pos) = sub.position_of(x) {
                    acc += eta.character[sub.group.class_of(pos)];
                }
            }
            acc
        })
        .collect()
}

/// `dim Hom_H(η, γ↾H) = (1/|H|) Σ_h χ_γ(h) conj(χ_η(h))`, an exact
/// non-negative integer.
pub fn branching_multiplicity(
    eta: &UnitaryRep,
    gamma: &UnitaryRep,
    sub: &Subgroup,
) -> Result<usize> {
    let mut acc = linalg::ZERO;
    for (pos, &m) in sub.members.iter().enumerate() {
        let cg = gamma.character[sub.parent.class_of(m)];
        let ce = eta.character[sub.group.class_of(pos)];
        acc += cg * ce.conj();
    }
    acc /= cr(sub.order() as f64);
    round_to_int(acc, &format!("m({}, {})", eta.label, gamma.label))
}

/// Both sides of Frobenius reciprocity:
/// `(dim Hom_H(η, γ↾H), dim Hom_G(Ind η, γ))`.
pub fn frobenius_check(
    eta: &UnitaryRep,
    gamma: &UnitaryRep,
    sub: &Subgroup,
) -> Result<(usize, usize)> {
    let m_restrict = branching_multiplicity(eta, gamma, sub)?;
    let ind_char = induced_character(eta, sub);
    let ip = char_inner(&sub.parent, &ind_char, &gamma.character);
    let m_induce = round_to_int(ip, &format!("<Ind {}, {}>", eta.label, gamma.label))?;
    Ok((m_restrict, m_induce))
}

/// Fiber of the restriction functor over an irrep `eta` of the subgroup:
/// all parent irreps whose restriction contains `eta`, with hom-space
/// dimensions. Over the trivial `eta` this is the set of representations
/// factoring through the coset space.
pub fn comma_fiber(
    eta: &UnitaryRep,
    sub: &Subgroup,
    g_irreps: &[UnitaryRep],
) -> Result<Vec<(usize, usize)>> {
    let mut fiber = Vec::new();
    for (gi, gamma) in g_irreps.iter().enumerate() {
        let m = branching_multiplicity(eta, gamma, sub)?;
        if m > 0 {
            fiber.push((gi, m));
        }
    }
    Ok(fiber)
}

// ---------------------------------------------------------------------------
// Minimal extension
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct Extension {
    /// The extending representation of the parent group, as an explicit
    /// direct sum of parent irreps.
    pub rep: UnitaryRep,
    /// Multiplicity of each parent irrep in the extension.
    pub multiplicities: Vec<usize>,
    /// Multiplicity of each subgroup irrep in the complement η′, so that
    /// `rep↾H ≅ η ⊕ η′`.
    pub complement: Vec<usize>,
}

/// Smallest parent representation whose restriction contains `eta`.
///
/// Minimizes the total dimension (equivalently the complement dimension) by
/// branch-and-bound over irrep multiplicity vectors; ties break towards the
/// lexicographically greatest vector, i.e. towards canonically earlier
/// irreps. Induction guarantees a solution within the search bound.
pub fn extend_rep_minimal(
    eta: &UnitaryRep,
    sub: &Subgroup,
    g_irreps: &[UnitaryRep],
    h_irreps: &[UnitaryRep],
) -> Result<Extension> {
    let need = decompose(eta, h_irreps)?;
    let branch: Vec<Vec<usize>> = g_irreps
        .iter()
        .map(|gamma| {
            h_irreps
                .iter()
                .map(|e| branching_multiplicity(e, gamma, sub))
                .collect::<Result<Vec<usize>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let g_dims: Vec<usize> = g_irreps.iter().map(|r| r.dim).collect();

    // Upper bound: the induced representation always restricts back onto a
    // representation containing η (its identity double coset contributes η).
    let bound = sub.index_in_parent() * eta.dim;

    let mut best: Option<(usize, Vec<usize>)> = None;
    let mut current = vec![0usize; g_irreps.len()];
    search(0, 0, &mut current, &need, &branch, &g_dims, bound, &mut best);
    let (_, counts) = best.expect("induction provides a witness within the bound");

    let parts: Vec<(&UnitaryRep, usize)> = g_irreps
        .iter()
        .zip(counts.iter())
        .filter(|(_, &m)| m > 0)
        .map(|(r, &m)| (r, m))
        .collect();
    let label = if parts.is_empty() {
        "0".to_string()
    } else {
        parts
            .iter()
            .map(|(r, m)| {
                if *m == 1 {
                    r.label.clone()
                } else {
                    format!("{}{}", m, r.label)
                }
            })
            .collect::<Vec<_>>()
            .join("+")
    };
    let rep = UnitaryRep::direct_sum(sub.parent.clone(), &parts, &label);
    let complement: Vec<usize> = (0..h_irreps.len())
        .map(|k| {
            let total: usize = counts
                .iter()
                .zip(branch.iter())
                .map(|(&cnt, b)| cnt * b[k])
                .sum();
            total - need[k]
        })
        .collect();
    Ok(Extension {
        rep,
        multiplicities: counts,
        complement,
    })
}

#[allow(clippy::too_many_arguments)]
fn search(
    idx: usize,
    dim_so_far: usize,
    current: &mut Vec<usize>,
    need: &[usize],
    branch: &[Vec<usize>],
    g_dims: &[usize],
    bound: usize,
    best: &mut Option<(usize, Vec<usize>)>,
) {
    if let Some((best_dim, _)) = best {
        if dim_so_far > *best_dim {
            return;
        }
    }
    if dim_so_far > bound {
        return;
    }
    if idx == g_dims.len() {
        let covered = (0..need.len()).all(|k| {
            let got: usize = current
                .iter()
                .zip(branch.iter())
                .map(|(&cnt, b)| cnt * b[k])
                .sum();
            got >= need[k]
        });
        if !covered {
            return;
        }
        let better = match best {
            None => true,
            Some((bd, bc)) => {
                dim_so_far < *bd || (dim_so_far == *bd && current.as_slice() > bc.as_slice())
            }
        };
        if better {
            *best = Some((dim_so_far, current.clone()));
        }
        return;
    }
    let cap = (bound - dim_so_far) / g_dims[idx];
    // Descend from the largest count so that among equal dimensions the
    // first solutions found favour low-indexed irreps.
    for count in (0..=cap).rev() {
        current[idx] = count;
        search(
            idx + 1,
            dim_so_far + count * g_dims[idx],
            current,
            need,
            branch,
            g_dims,
            bound,
            best,
        );
    }
    current[idx] = 0;
}
