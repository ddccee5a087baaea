//! Built-in groups with exact unitary irreps: Z_n, S3, S4, D4, Q8, A4.
//!
//! Every catalog representation is constructed from closed-form matrices
//! (roots of unity, reflection/rotation matrices, permutation compressions)
//! and passes full validation on construction. Irreps are sorted in the
//! same canonical order the numerical character table uses, so labels line
//! up across both paths.

use std::collections::BTreeMap;
use std::f64::consts::TAU;
use std::sync::Arc;

use crate::linalg::{self, c, cr, CMat};
use crate::rep::{canonical_char_cmp, UnitaryRep};

use super::{FiniteGroup, Subgroup};

#[derive(Debug, Clone)]
pub struct CatalogGroup {
    pub group: Arc<FiniteGroup>,
    pub subgroups: BTreeMap<String, Vec<usize>>,
    /// Exact irreps in canonical character order.
    pub irreps: Vec<UnitaryRep>,
}

impl CatalogGroup {
    pub fn subgroup(&self, label: &str) -> Subgroup {
        let members = self
            .subgroups
            .get(label)
            .unwrap_or_else(|| panic!("{} has no catalog subgroup '{label}'", self.group.name));
        Subgroup::new(self.group.clone(), label, members)
            .expect("catalog subgroups are closed")
    }

    pub fn subgroup_labels(&self) -> Vec<&str> {
        self.subgroups.keys().map(|s| s.as_str()).collect()
    }

    pub fn irrep(&self, label: &str) -> &UnitaryRep {
        self.irreps
            .iter()
            .find(|r| r.label == label)
            .unwrap_or_else(|| panic!("{} has no catalog irrep '{label}'", self.group.name))
    }
}

/// Catalog lookup by name: `z<N>`, `s3`, `s4`, `d4`, `q8`, `a4`
/// (case-insensitive).
pub fn lookup(name: &str) -> Option<CatalogGroup> {
    let lower = name.to_ascii_lowercase();
    match lower.as_str() {
        "s3" => return Some(s3()),
        "s4" => return Some(s4()),
        "d4" => return Some(d4()),
        "q8" => return Some(q8()),
        "a4" => return Some(a4()),
        _ => {}
    }
    if let Some(num) = lower.strip_prefix('z') {
        if let Ok(n) = num.parse::<usize>() {
            if (1..=64).contains(&n) {
                return Some(cyclic(n));
            }
        }
    }
    None
}

fn group_from_perms(name: &str, perms: &[Vec<usize>]) -> Arc<FiniteGroup> {
    let index = |p: &[usize]| -> usize {
        perms
            .iter()
            .position(|q| q == p)
            .expect("catalog element lists are closed under composition")
    };
    let order = perms.len();
    let mut mult = vec![vec![0usize; order]; order];
    for a in 0..order {
        for b in 0..order {
            let prod: Vec<usize> = perms[b].iter().map(|&i| perms[a][i]).collect();
            mult[a][b] = index(&prod);
        }
    }
    FiniteGroup::from_mult_table(name, mult).expect("catalog tables satisfy the group axioms")
}

fn perm_matrix(p: &[usize]) -> CMat {
    let n = p.len();
    let mut m = linalg::zeros(n, n);
    for (i, &pi) in p.iter().enumerate() {
        m[(pi, i)] = linalg::ONE;
    }
    m
}

fn perm_sign(p: &[usize]) -> f64 {
    let mut sign = 1.0;
    for i in 0..p.len() {
        for j in (i + 1)..p.len() {
            if p[i] > p[j] {
                sign = -sign;
            }
        }
    }
    sign
}

/// Orthonormal basis of the complement of the all-ones vector in ℂ^n.
fn standard_complement_basis(n: usize) -> CMat {
    let mut b = linalg::zeros(n, n - 1);
    for k in 1..n {
        let norm = ((k * (k + 1)) as f64).sqrt();
        for i in 0..k {
            b[(i, k - 1)] = cr(1.0 / norm);
        }
        b[(k, k - 1)] = cr(-(k as f64) / norm);
    }
    b
}

/// Compression of the permutation representation to the complement of the
/// invariant all-ones vector: the standard irrep of S_n (n-1 dimensional).
fn standard_rep_matrix(p: &[usize], basis: &CMat) -> CMat {
    basis.adjoint() * perm_matrix(p) * basis
}

fn all_permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut items: Vec<usize> = (0..n).collect();
    permute(&mut items, 0, &mut out);
    out.sort();
    out
}

fn permute(items: &mut Vec<usize>, k: usize, out: &mut Vec<Vec<usize>>) {
    if k == items.len() {
        out.push(items.clone());
        return;
    }
    for i in k..items.len() {
        items.swap(k, i);
        permute(items, k + 1, out);
        items.swap(k, i);
    }
}

fn finish(
    group: Arc<FiniteGroup>,
    subgroups: Vec<(&str, Vec<usize>)>,
    mut irreps: Vec<UnitaryRep>,
) -> CatalogGroup {
    irreps.sort_by(|a, b| canonical_char_cmp(&a.character, &b.character));
    for r in &irreps {
        r.validate().expect("catalog irreps are exact");
    }
    let sum_sq: usize = irreps.iter().map(|r| r.dim * r.dim).sum();
    assert_eq!(sum_sq, group.order, "catalog irrep list is complete");
    CatalogGroup {
        group,
        subgroups: subgroups
            .into_iter()
            .map(|(k, v)| (k.to_string(), v))
            .collect(),
        irreps,
    }
}

/// Cyclic group of order n; irrep `chi<k>` sends the generator to e^{2πik/n}.
pub fn cyclic(n: usize) -> CatalogGroup {
    assert!(n >= 1);
    let mult: Vec<Vec<usize>> = (0..n).map(|a| (0..n).map(|b| (a + b) % n).collect()).collect();
    let group = FiniteGroup::from_mult_table(&format!("Z{n}"), mult)
        .expect("cyclic tables are groups");
    let mut subgroups: Vec<(String, Vec<usize>)> = Vec::new();
    for d in 1..=n {
        if n.is_multiple_of(d) && d < n {
            let step = n / d;
            subgroups.push((format!("Z{d}"), (0..d).map(|k| k * step).collect()));
        }
    }
    let irreps: Vec<UnitaryRep> = (0..n)
        .map(|k| {
            let matrices = (0..n)
                .map(|j| {
                    let angle = TAU * ((k * j) % n) as f64 / n as f64;
                    CMat::from_element(1, 1, c(angle.cos(), angle.sin()))
                })
                .collect();
            UnitaryRep::unchecked(group.clone(), &format!("chi{k}"), matrices)
        })
        .collect();
    let named: Vec<(&str, Vec<usize>)> = subgroups
        .iter()
        .map(|(k, v)| (k.as_str(), v.clone()))
        .collect();
    finish(group, named, irreps)
}

/// Symmetric group on 3 letters, elements ordered e, r, r², s, rs, r²s with
/// r = (012) and s = (12).
pub fn s3() -> CatalogGroup {
    let e = vec![0, 1, 2];
    let r = vec![1, 2, 0];
    let r2 = vec![2, 0, 1];
    let s = vec![0, 2, 1];
    let rs = vec![1, 0, 2];
    let r2s = vec![2, 1, 0];
    let perms = vec![e, r, r2, s, rs, r2s];
    let group = group_from_perms("S3", &perms);

    let basis = standard_complement_basis(3);
    let triv = UnitaryRep::trivial(group.clone());
    let sgn = UnitaryRep::unchecked(
        group.clone(),
        "sgn",
        perms
            .iter()
            .map(|p| CMat::from_element(1, 1, cr(perm_sign(p))))
            .collect(),
    );
    let std = UnitaryRep::unchecked(
        group.clone(),
        "std",
        perms.iter().map(|p| standard_rep_matrix(p, &basis)).collect(),
    );

    finish(
        group,
        vec![
            ("Z3", vec![0, 1, 2]),
            ("Z2", vec![0, 3]),
            ("e", vec![0]),
        ],
        vec![triv, sgn, std],
    )
}

/// Index of the pair-partition of {0,1,2,3} containing {0, partner}.
fn partition_index(partner: usize) -> usize {
    partner - 1
}

/// Action of a degree-4 permutation on the three pair-partitions, as a
/// permutation of {0,1,2}.
fn partition_action(p: &[usize]) -> Vec<usize> {
    (0..3)
        .map(|part| {
            let partner = part + 1;
            let a = p[0];
            let b = p[partner];
            // Image pairing contains {a, b}; find the partner of 0.
            let partner_of_zero = if a == 0 {
                b
            } else if b == 0 {
                a
            } else {
                // 0 sits in the complementary pair.
                (1..4).find(|&x| x != a && x != b).expect("two elements remain")
            };
            partition_index(partner_of_zero)
        })
        .collect()
}

/// Symmetric group on 4 letters, elements in lexicographic order.
pub fn s4() -> CatalogGroup {
    let perms = all_permutations(4);
    let group = group_from_perms("S4", &perms);

    let basis4 = standard_complement_basis(4);
    let basis3 = standard_complement_basis(3);

    let triv = UnitaryRep::trivial(group.clone());
    let sgn = UnitaryRep::unchecked(
        group.clone(),
        "sgn",
        perms
            .iter()
            .map(|p| CMat::from_element(1, 1, cr(perm_sign(p))))
            .collect(),
    );
    // 2-dim irrep: factors through the action on pair-partitions.
    let two = UnitaryRep::unchecked(
        group.clone(),
        "two",
        perms
            .iter()
            .map(|p| standard_rep_matrix(&partition_action(p), &basis3))
            .collect(),
    );
    let std = UnitaryRep::unchecked(
        group.clone(),
        "std",
        perms.iter().map(|p| standard_rep_matrix(p, &basis4)).collect(),
    );
    let sgnstd = UnitaryRep::unchecked(
        group.clone(),
        "sgnstd",
        perms
            .iter()
            .map(|p| standard_rep_matrix(p, &basis4).scale(perm_sign(p)))
            .collect(),
    );

    let find = |target: &[usize]| -> usize {
        perms.iter().position(|p| p == target).expect("permutation present")
    };
    let a4: Vec<usize> = perms
        .iter()
        .enumerate()
        .filter(|(_, p)| perm_sign(p) > 0.0)
        .map(|(i, _)| i)
        .collect();
    let v4 = vec![
        find(&[0, 1, 2, 3]),
        find(&[1, 0, 3, 2]),
        find(&[2, 3, 0, 1]),
        find(&[3, 2, 1, 0]),
    ];
    let z4 = {
        let gen = vec![1, 2, 3, 0]; // (0123)
        let mut members = vec![find(&[0, 1, 2, 3])];
        let mut cur = gen.clone();
        for _ in 0..3 {
            members.push(find(&cur));
            cur = cur.iter().map(|&i| gen[i]).collect();
        }
        members.sort_unstable();
        members
    };
    let s3_in_s4: Vec<usize> = perms
        .iter()
        .enumerate()
        .filter(|(_, p)| p[3] == 3)
        .map(|(i, _)| i)
        .collect();

    finish(
        group,
        vec![
            ("A4", a4),
            ("S3", s3_in_s4),
            ("V4", v4),
            ("Z4", z4),
            ("e", vec![0]),
        ],
        vec![triv, sgn, two, std, sgnstd],
    )
}

/// Dihedral group of the square, elements e, r, r², r³, s, rs, r²s, r³s with
/// r = (0123) and s = (13).
pub fn d4() -> CatalogGroup {
    let r = vec![1, 2, 3, 0];
    let s = vec![0, 3, 2, 1];
    let compose = |p: &[usize], q: &[usize]| -> Vec<usize> { q.iter().map(|&i| p[i]).collect() };
    let mut perms: Vec<Vec<usize>> = Vec::with_capacity(8);
    let mut cur = vec![0, 1, 2, 3];
    for _ in 0..4 {
        perms.push(cur.clone());
        cur = compose(&r, &cur);
    }
    let mut cur = s.clone();
    for _ in 0..4 {
        perms.push(cur.clone());
        cur = compose(&r, &cur);
    }
    // perms[4 + a] = r^a ∘ s.
    let group = group_from_perms("D4", &perms);

    let one_dim = |label: &str, xr: f64, xs: f64, group: &Arc<FiniteGroup>| -> UnitaryRep {
        let matrices = (0..8)
            .map(|idx| {
                let (a, b) = if idx < 4 { (idx, 0) } else { (idx - 4, 1) };
                let val = xr.powi(a) * xs.powi(b);
                CMat::from_element(1, 1, cr(val))
            })
            .collect();
        UnitaryRep::unchecked(group.clone(), label, matrices)
    };
    let a1 = one_dim("a1", 1.0, 1.0, &group);
    let a2 = one_dim("a2", 1.0, -1.0, &group);
    let b1 = one_dim("b1", -1.0, 1.0, &group);
    let b2 = one_dim("b2", -1.0, -1.0, &group);

    let rot = CMat::from_row_slice(2, 2, &[cr(0.0), cr(-1.0), cr(1.0), cr(0.0)]);
    let refl = CMat::from_row_slice(2, 2, &[cr(1.0), cr(0.0), cr(0.0), cr(-1.0)]);
    let e2 = UnitaryRep::unchecked(
        group.clone(),
        "e2",
        (0..8)
            .map(|idx| {
                let (a, b) = if idx < 4 { (idx, 0) } else { (idx - 4, 1) };
                let mut m = linalg::identity(2);
                for _ in 0..a {
                    m = &rot * m;
                }
                if b == 1 {
                    m *= &refl;
                }
                m
            })
            .collect(),
    );

    finish(
        group,
        vec![
            ("Z4", vec![0, 1, 2, 3]),
            ("V4", vec![0, 2, 4, 6]),
            ("Z2", vec![0, 2]),
            ("e", vec![0]),
        ],
        vec![a1, a2, b1, b2, e2],
    )
}

/// Quaternion group {±1, ±i, ±j, ±k}, elements ordered 1, −1, i, −i, j, −j,
/// k, −k.
pub fn q8() -> CatalogGroup {
    // Unit multiplication: (axis, axis) -> (sign, axis) with axes 1,i,j,k.
    let unit_mul = |a: usize, b: usize| -> (f64, usize) {
        match (a, b) {
            (0, x) => (1.0, x),
            (x, 0) => (1.0, x),
            (1, 1) | (2, 2) | (3, 3) => (-1.0, 0),
            (1, 2) => (1.0, 3),
            (2, 1) => (-1.0, 3),
            (2, 3) => (1.0, 1),
            (3, 2) => (-1.0, 1),
            (3, 1) => (1.0, 2),
            (1, 3) => (-1.0, 2),
            _ => unreachable!(),
        }
    };
    let decode = |idx: usize| -> (f64, usize) {
        let axis = idx / 2;
        let sign = if idx.is_multiple_of(2) { 1.0 } else { -1.0 };
        (sign, axis)
    };
    let encode = |sign: f64, axis: usize| -> usize { 2 * axis + usize::from(sign < 0.0) };
    let mult: Vec<Vec<usize>> = (0..8)
        .map(|x| {
            (0..8)
                .map(|y| {
                    let (sx, ax) = decode(x);
                    let (sy, ay) = decode(y);
                    let (s, a) = unit_mul(ax, ay);
                    encode(sx * sy * s, a)
                })
                .collect()
        })
        .collect();
    let group = FiniteGroup::from_mult_table("Q8", mult).expect("quaternion table is a group");

    let one_dim = |label: &str, chi: [f64; 4], group: &Arc<FiniteGroup>| -> UnitaryRep {
        let matrices = (0..8)
            .map(|idx| CMat::from_element(1, 1, cr(chi[idx / 2])))
            .collect();
        UnitaryRep::unchecked(group.clone(), label, matrices)
    };
    let triv = one_dim("triv", [1.0, 1.0, 1.0, 1.0], &group);
    let chi_i = one_dim("chi_i", [1.0, 1.0, -1.0, -1.0], &group);
    let chi_j = one_dim("chi_j", [1.0, -1.0, 1.0, -1.0], &group);
    let chi_k = one_dim("chi_k", [1.0, -1.0, -1.0, 1.0], &group);

    let unit_mats = [
        linalg::identity(2),
        CMat::from_row_slice(2, 2, &[c(0.0, 1.0), cr(0.0), cr(0.0), c(0.0, -1.0)]),
        CMat::from_row_slice(2, 2, &[cr(0.0), cr(1.0), cr(-1.0), cr(0.0)]),
        CMat::from_row_slice(2, 2, &[cr(0.0), c(0.0, 1.0), c(0.0, 1.0), cr(0.0)]),
    ];
    let e2 = UnitaryRep::unchecked(
        group.clone(),
        "e2",
        (0..8)
            .map(|idx| {
                let (sign, axis) = decode(idx);
                unit_mats[axis].scale(sign)
            })
            .collect(),
    );

    finish(
        group,
        vec![("Z4", vec![0, 1, 2, 3]), ("Z2", vec![0, 1]), ("e", vec![0])],
        vec![triv, chi_i, chi_j, chi_k, e2],
    )
}

/// Alternating group on 4 letters, elements in lexicographic order.
pub fn a4() -> CatalogGroup {
    let perms: Vec<Vec<usize>> = all_permutations(4)
        .into_iter()
        .filter(|p| perm_sign(p) > 0.0)
        .collect();
    let group = group_from_perms("A4", &perms);

    let basis4 = standard_complement_basis(4);
    let triv = UnitaryRep::trivial(group.clone());
    // Nontrivial characters factor through the partition action, whose image
    // on A4 is the cyclic group generated by c: part0 -> part1 -> part2.
    let cycle_power = |q: &[usize]| -> usize {
        match q {
            [0, 1, 2] => 0,
            [1, 2, 0] => 1,
            [2, 0, 1] => 2,
            _ => panic!("even permutations act cyclically on partitions"),
        }
    };
    let omega_rep = |label: &str, k: usize, group: &Arc<FiniteGroup>| -> UnitaryRep {
        let matrices = perms
            .iter()
            .map(|p| {
                let power = cycle_power(&partition_action(p));
                let angle = TAU * ((k * power) % 3) as f64 / 3.0;
                CMat::from_element(1, 1, c(angle.cos(), angle.sin()))
            })
            .collect();
        UnitaryRep::unchecked(group.clone(), label, matrices)
    };
    let omega = omega_rep("omega", 1, &group);
    let omega2 = omega_rep("omega2", 2, &group);
    let std = UnitaryRep::unchecked(
        group.clone(),
        "std",
        perms.iter().map(|p| standard_rep_matrix(p, &basis4)).collect(),
    );

    let find = |target: &[usize]| -> usize {
        perms.iter().position(|p| p == target).expect("permutation present")
    };
    let v4 = vec![
        find(&[0, 1, 2, 3]),
        find(&[1, 0, 3, 2]),
        find(&[2, 3, 0, 1]),
        find(&[3, 2, 1, 0]),
    ];
    let z3 = {
        let mut m = vec![find(&[0, 1, 2, 3]), find(&[1, 2, 0, 3]), find(&[2, 0, 1, 3])];
        m.sort_unstable();
        m
    };

    finish(
        group,
        vec![("V4", v4), ("Z3", z3), ("e", vec![0])],
        vec![triv, omega, omega2, std],
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rep::{character_table, char_inner};

    #[test]
    fn catalog_groups_have_expected_class_counts() {
        assert_eq!(s3().group.num_classes(), 3);
        assert_eq!(s4().group.num_classes(), 5);
        assert_eq!(d4().group.num_classes(), 5);
        assert_eq!(q8().group.num_classes(), 5);
        assert_eq!(a4().group.num_classes(), 4);
        assert_eq!(cyclic(6).group.num_classes(), 6);
    }

    #[test]
    fn catalog_irreps_match_numerical_character_tables() {
        for cat in [s3(), s4(), d4(), q8(), a4(), cyclic(4)] {
            let table = character_table(&cat.group, 0).unwrap();
            assert_eq!(table.num_irreps(), cat.irreps.len());
            for (row, rep) in table.rows.iter().zip(cat.irreps.iter()) {
                for (a, b) in row.iter().zip(rep.character.iter()) {
                    assert!(
                        (a - b).norm() < 1e-8,
                        "{}: catalog irrep {} disagrees with table",
                        cat.group.name,
                        rep.label
                    );
                }
            }
        }
    }

    #[test]
    fn catalog_irreps_are_orthonormal() {
        for cat in [s3(), s4(), d4(), q8(), a4()] {
            for (i, a) in cat.irreps.iter().enumerate() {
                for (j, b) in cat.irreps.iter().enumerate() {
                    let ip = char_inner(&cat.group, &a.character, &b.character);
                    let target = if i == j { 1.0 } else { 0.0 };
                    assert!((ip - cr(target)).norm() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn q8_has_four_lines_and_one_plane() {
        let cat = q8();
        let dims: Vec<usize> = cat.irreps.iter().map(|r| r.dim).collect();
        assert_eq!(dims, vec![1, 1, 1, 1, 2]);
    }

    #[test]
    fn catalog_subgroups_are_valid() {
        for cat in [s3(), s4(), d4(), q8(), a4(), cyclic(4)] {
            for label in cat.subgroup_labels() {
                let sub = cat.subgroup(label);
                assert!(cat.group.order % sub.order() == 0);
            }
        }
        assert_eq!(s4().subgroup("A4").order(), 12);
        assert_eq!(a4().subgroup("V4").order(), 4);
        assert!(a4().subgroup("V4").is_normal());
        assert!(!s3().subgroup("Z2").is_normal());
    }

    #[test]
    fn lookup_parses_names() {
        assert!(lookup("S3").is_some());
        assert!(lookup("z12").is_some());
        assert!(lookup("e8").is_none());
    }
}
