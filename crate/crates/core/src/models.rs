//! Built-in doctrines and executable fixtures: the subsets doctrine over
//! finite sets (materialized on a probe fragment), propositional
//! Lindenbaum-Tarski doctrines with a semantic fiber representation, and a
//! seeded generator of semilattice-based doctrines for property suites.

use std::collections::HashMap;
use std::sync::Arc;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::cat::{semilattice_to_category, Arrow, CatError, FiniteCategory, ProductStructure, ProductWitness};
use crate::doctrine::Doctrine;
use crate::order::{lattice_ops, FinitePoset, MonotoneMap, OrderError};

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("probe produces a fiber of {0} elements, over the cap of {1}")]
    ProbeTooLarge(usize, usize),
    #[error("{0} atoms exceed the cap of {1}")]
    AtomCapExceeded(usize, usize),
    #[error("unknown atom `{0}`")]
    UnknownAtom(String),
    #[error("fixture mismatch: {0}")]
    FixtureMismatch(String),
    #[error("isomorphism mismatch: {0}")]
    IsoMismatch(String),
    #[error(transparent)]
    Cat(#[from] CatError),
    #[error(transparent)]
    Order(#[from] OrderError),
    #[error(transparent)]
    Doctrine(#[from] crate::doctrine::DoctrineError),
}

/// Canonical name of a subset of poset elements, by ascending index.
fn subset_name(p: &FinitePoset, members: &[usize]) -> String {
    let names: Vec<&str> = members.iter().map(|&i| p.element(i)).collect();
    format!("{{{}}}", names.join(","))
}

/// The powerset of a set of `k` tokens as a `FinitePoset` ordered by
/// inclusion; element ids are canonical brace-sets of the token names.
fn powerset_poset(tokens: &[String]) -> FinitePoset {
    let k = tokens.len();
    let elems: Vec<String> = (0..1usize << k)
        .map(|mask| {
            let names: Vec<&str> = (0..k).filter(|&i| mask & (1 << i) != 0).map(|i| tokens[i].as_str()).collect();
            format!("{{{}}}", names.join(","))
        })
        .collect();
    let mut pairs = Vec::new();
    for a in 0..1usize << k {
        for b in 0..1usize << k {
            if a & b == a {
                pairs.push((elems[a].clone(), elems[b].clone()));
            }
        }
    }
    FinitePoset::validate(&elems, &pairs).expect("powerset poset is valid")
}

/// A doctrine over a meet-semilattice base whose fiber over `a` is the
/// powerset of the principal downset of `a`, with restriction as
/// reindexing. Fibers are Boolean algebras and reindexing preserves meets,
/// joins, top and bottom.
pub fn downset_powerset(p: &FinitePoset, base: Arc<FiniteCategory>) -> Doctrine {
    let n = p.len();
    let downsets: Vec<Vec<usize>> = (0..n)
        .map(|a| (0..n).filter(|&i| p.leq_idx(i, a)).collect())
        .collect();
    let fibers: Vec<Arc<FinitePoset>> = downsets
        .iter()
        .map(|down| {
            let tokens: Vec<String> = down.iter().map(|&i| p.element(i).to_string()).collect();
            Arc::new(powerset_poset(&tokens))
        })
        .collect();
    let reindex: Vec<MonotoneMap> = base
        .arrows
        .iter()
        .map(|arr| {
            // arr : a -> b encodes a <= b; P(arr) restricts subsets of
            // down(b) to down(a).
            let (a, b) = (arr.src, arr.tgt);
            let src_fiber = &fibers[b];
            let tgt_fiber = &fibers[a];
            let table: Vec<usize> = (0..src_fiber.len())
                .map(|s| {
                    let members = mask_members(&downsets[b], s);
                    let restricted: Vec<usize> = members
                        .into_iter()
                        .filter(|m| downsets[a].contains(m))
                        .collect();
                    tgt_fiber
                        .index_of(&subset_name(p, &restricted))
                        .expect("restricted subset exists")
                })
                .collect();
            MonotoneMap::from_indices(src_fiber.clone(), tgt_fiber.clone(), table)
                .expect("restriction is monotone")
        })
        .collect();
    Doctrine::new(base, fibers, reindex)
}

fn mask_members(down: &[usize], mask: usize) -> Vec<usize> {
    down.iter()
        .enumerate()
        .filter(|&(i, _)| mask & (1 << i) != 0)
        .map(|(_, &g)| g)
        .collect()
}

/// Deterministic-from-seed doctrine over a random finite meet-semilattice
/// base with Boolean-algebra fibers and meet-preserving reindexing. The
/// output always validates and is primary, existential and universal.
pub fn random_semilattice_doctrine(seed: u64, max_objects: usize) -> Doctrine {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let max_objects = max_objects.clamp(1, 4);
    // A small sub-meet-semilattice of the powerset of three tokens, picked
    // by shape so the object count is exactly bounded: a chain for up to
    // three objects, two generators plus their intersection for four.
    let full: u32 = 0b111;
    let mut closed: Vec<u32> = match max_objects {
        1 => vec![full],
        2 => {
            let g = rng.gen_range(0..full);
            vec![full, g]
        }
        3 => {
            // A chain full > g > h is intersection-closed.
            let g = rng.gen_range(1..full);
            let h = loop {
                let h = rng.gen_range(0..full) & g;
                if h != g {
                    break h;
                }
            };
            vec![full, g, h]
        }
        _ => {
            let (g1, g2) = loop {
                let g1 = rng.gen_range(0..full);
                let g2 = rng.gen_range(0..full);
                let m = g1 & g2;
                if g1 != g2 && m != g1 && m != g2 {
                    break (g1, g2);
                }
            };
            vec![full, g1, g2, g1 & g2]
        }
    };
    closed.sort_unstable();
    closed.dedup();
    let names: Vec<String> = closed.iter().map(|m| format!("o{m}")).collect();
    let mut pairs = Vec::new();
    for (i, &a) in closed.iter().enumerate() {
        for (j, &b) in closed.iter().enumerate() {
            if a & b == a {
                pairs.push((names[i].clone(), names[j].clone()));
            }
        }
    }
    let poset = FinitePoset::validate(&names, &pairs).expect("semilattice poset");
    let cert = lattice_ops(&poset);
    let base = Arc::new(semilattice_to_category(&poset, &cert).expect("semilattice base"));
    downset_powerset(&poset, base)
}

// ---------------------------------------------------------------------
// The subsets doctrine over finite sets, materialized on a probe fragment
// ---------------------------------------------------------------------

/// Caps controlling how much of the subsets doctrine gets materialized.
#[derive(Clone, Copy, Debug)]
pub struct PowersetCaps {
    /// Largest fiber (2^|S|) that may be materialized as a poset.
    pub fiber_cap: usize,
    /// Include the full function space A -> B only when |B|^|A| is at most
    /// this; otherwise only structural arrows are materialized.
    pub hom_cap: usize,
}

impl Default for PowersetCaps {
    fn default() -> Self {
        PowersetCaps { fiber_cap: 1 << 12, hom_cap: 8 }
    }
}

/// A finite set in the materialized fragment: canonical sorted labels.
pub type FinSet = Vec<String>;

fn finset_name(s: &[String]) -> String {
    format!("{{{}}}", s.join(","))
}

/// Builds the subsets doctrine materialized on the closure of `probes`
/// needed for structure detection: the probe sets, the terminal, pairwise
/// products of probes (including squares) under the fiber cap, structural
/// arrows (identities, bangs, projections, diagonals, pairings composed to
/// a fixpoint) and full function spaces between small pairs.
///
/// The result has `base.total = false`: every check downstream quantifies
/// over exactly this fragment and reports it.
pub fn powerset_doctrine(probes: &[FinSet], caps: PowersetCaps) -> Result<Doctrine, ModelError> {
    powerset_doctrine_with(probes, caps, &[])
}

/// An explicitly requested function between fragment sets, given by the
/// graph on labels. Used to seed sample arrows that the hom cap would
/// otherwise exclude.
#[derive(Clone, Debug)]
pub struct ExtraFunction {
    pub src: FinSet,
    pub tgt: FinSet,
    /// Per source label: the target label.
    pub graph: Vec<(String, String)>,
}

/// `powerset_doctrine` plus explicitly materialized sample functions.
pub fn powerset_doctrine_with(
    probes: &[FinSet],
    caps: PowersetCaps,
    extra: &[ExtraFunction],
) -> Result<Doctrine, ModelError> {
    let mut objects: Vec<FinSet> = vec![vec!["*".to_string()]];
    let mut add_obj = |objects: &mut Vec<FinSet>, s: FinSet| -> Result<usize, ModelError> {
        if (1usize << s.len().min(30)) > caps.fiber_cap {
            return Err(ModelError::ProbeTooLarge(1 << s.len().min(30), caps.fiber_cap));
        }
        if let Some(i) = objects.iter().position(|o| o == &s) {
            return Ok(i);
        }
        objects.push(s);
        Ok(objects.len() - 1)
    };
    for p in probes {
        let mut s = p.clone();
        s.sort();
        s.dedup();
        add_obj(&mut objects, s)?;
    }
    // Products of probe pairs, when they fit under the cap. Skipping a
    // too-large product is allowed: the fragment just will not certify
    // clauses that need it.
    let probe_count = objects.len();
    let mut product_of: HashMap<(usize, usize), usize> = HashMap::new();
    for a in 1..probe_count {
        for b in 1..probe_count {
            let pa = objects[a].clone();
            let pb = objects[b].clone();
            if (1usize << (pa.len() * pb.len()).min(30)) > caps.fiber_cap {
                continue;
            }
            let prod = product_set(&pa, &pb);
            let i = add_obj(&mut objects, prod)?;
            product_of.insert((a, b), i);
        }
    }
    // Squares of the first-level products, so that the elementary product
    // clause has something to check on small pairs.
    let firsts: Vec<usize> = product_of.values().copied().collect();
    for s in firsts {
        if product_of.contains_key(&(s, s)) {
            continue;
        }
        let ps = objects[s].clone();
        if (1usize << (ps.len() * ps.len()).min(30)) > caps.fiber_cap {
            continue;
        }
        let sq = product_set(&ps, &ps);
        let i = add_obj(&mut objects, sq)?;
        product_of.insert((s, s), i);
    }
    build_powerset_fragment(objects, product_of, caps, extra)
}

pub(crate) fn product_set(a: &[String], b: &[String]) -> FinSet {
    let mut out = Vec::with_capacity(a.len() * b.len());
    for x in a {
        for y in b {
            out.push(format!("({x},{y})"));
        }
    }
    out
}

/// A concrete function between fragment sets, by target position table.
#[derive(Clone, PartialEq, Eq, Hash)]
struct FnArrow {
    src: usize,
    tgt: usize,
    table: Vec<usize>,
}

/// Assembles the fragment category and the subsets doctrine on it.
pub(crate) fn build_powerset_fragment(
    objects: Vec<FinSet>,
    product_of: HashMap<(usize, usize), usize>,
    caps: PowersetCaps,
    extra: &[ExtraFunction],
) -> Result<Doctrine, ModelError> {
    let n_obj = objects.len();
    let terminal = 0usize;
    let mut arrows: Vec<FnArrow> = Vec::new();
    let mut arrow_ids: HashMap<FnArrow, usize> = HashMap::new();
    let mut push = |arrows: &mut Vec<FnArrow>, ids: &mut HashMap<FnArrow, usize>, a: FnArrow| {
        if let Some(&i) = ids.get(&a) {
            return i;
        }
        arrows.push(a.clone());
        ids.insert(a, arrows.len() - 1);
        arrows.len() - 1
    };

    // Identities and bangs.
    let mut identities = Vec::with_capacity(n_obj);
    for (o, s) in objects.iter().enumerate() {
        identities.push(push(
            &mut arrows,
            &mut arrow_ids,
            FnArrow { src: o, tgt: o, table: (0..s.len()).collect() },
        ));
    }
    let mut bang = Vec::with_capacity(n_obj);
    for (o, s) in objects.iter().enumerate() {
        bang.push(push(
            &mut arrows,
            &mut arrow_ids,
            FnArrow { src: o, tgt: terminal, table: vec![0; s.len()] },
        ));
    }

    // Chosen products: the recorded pairs, plus terminal-normalized pairs
    // t x A = A = A x t for every object.
    let mut products: HashMap<(usize, usize), ProductWitness> = HashMap::new();
    let mut prod_tables: HashMap<(usize, usize), (usize, Vec<Vec<usize>>)> = HashMap::new();
    for o in 0..n_obj {
        products.insert((terminal, o), ProductWitness { obj: o, pr1: bang[o], pr2: identities[o] });
        products.insert((o, terminal), ProductWitness { obj: o, pr1: identities[o], pr2: bang[o] });
    }
    for (&(a, b), &p) in &product_of {
        let (sa, sb) = (objects[a].len(), objects[b].len());
        // Position (i, j) of the pair (a_i, b_j) inside the product set,
        // matching the enumeration order of `product_set`.
        let pr1_table: Vec<usize> = (0..sa * sb).map(|k| k / sb).collect();
        let pr2_table: Vec<usize> = (0..sa * sb).map(|k| k % sb).collect();
        let pr1 = push(&mut arrows, &mut arrow_ids, FnArrow { src: p, tgt: a, table: pr1_table.clone() });
        let pr2 = push(&mut arrows, &mut arrow_ids, FnArrow { src: p, tgt: b, table: pr2_table.clone() });
        products.insert((a, b), ProductWitness { obj: p, pr1, pr2 });
        prod_tables.insert((a, b), (p, vec![pr1_table, pr2_table]));
    }

    // Full function spaces between small pairs.
    for a in 0..n_obj {
        for b in 0..n_obj {
            let (sa, sb) = (objects[a].len(), objects[b].len());
            if sb == 0 {
                continue;
            }
            let count = sb.checked_pow(sa as u32).unwrap_or(usize::MAX);
            if count > caps.hom_cap {
                continue;
            }
            let mut table = vec![0usize; sa];
            loop {
                push(&mut arrows, &mut arrow_ids, FnArrow { src: a, tgt: b, table: table.clone() });
                // Odometer increment.
                let mut i = 0;
                while i < sa {
                    table[i] += 1;
                    if table[i] < sb {
                        break;
                    }
                    table[i] = 0;
                    i += 1;
                }
                if i == sa || sa == 0 {
                    break;
                }
            }
        }
    }

    // Explicitly requested sample functions.
    for e in extra {
        let src = objects.iter().position(|o| o == &e.src).ok_or_else(|| {
            ModelError::FixtureMismatch(format!("unknown source set {}", finset_name(&e.src)))
        })?;
        let tgt = objects.iter().position(|o| o == &e.tgt).ok_or_else(|| {
            ModelError::FixtureMismatch(format!("unknown target set {}", finset_name(&e.tgt)))
        })?;
        let mut table = vec![usize::MAX; objects[src].len()];
        for (from, to) in &e.graph {
            let i = objects[src].iter().position(|l| l == from).ok_or_else(|| {
                ModelError::FixtureMismatch(format!("unknown label {from}"))
            })?;
            let j = objects[tgt].iter().position(|l| l == to).ok_or_else(|| {
                ModelError::FixtureMismatch(format!("unknown label {to}"))
            })?;
            table[i] = j;
        }
        if table.contains(&usize::MAX) {
            return Err(ModelError::FixtureMismatch(format!(
                "partial graph for {} -> {}",
                finset_name(&e.src),
                finset_name(&e.tgt)
            )));
        }
        push(&mut arrows, &mut arrow_ids, FnArrow { src, tgt, table });
    }

    // Close under composition and pairings into recorded products; both
    // yield concrete functions, so the closure terminates inside the
    // finite function space.
    let mut changed = true;
    while changed {
        changed = false;
        let snapshot = arrows.len();
        for g in 0..snapshot {
            for f in 0..snapshot {
                if arrows[f].tgt != arrows[g].src {
                    continue;
                }
                let table: Vec<usize> = arrows[f].table.iter().map(|&i| arrows[g].table[i]).collect();
                let comp = FnArrow { src: arrows[f].src, tgt: arrows[g].tgt, table };
                if !arrow_ids.contains_key(&comp) {
                    push(&mut arrows, &mut arrow_ids, comp);
                    changed = true;
                }
            }
        }
        let snapshot = arrows.len();
        for f in 0..snapshot {
            for g in 0..snapshot {
                if arrows[f].src != arrows[g].src {
                    continue;
                }
                let (ta, tb) = (arrows[f].tgt, arrows[g].tgt);
                let Some(&(pobj, ref prs)) = prod_tables.get(&(ta, tb)) else { continue };
                let sb = objects[tb].len();
                let _ = prs;
                let table: Vec<usize> = arrows[f]
                    .table
                    .iter()
                    .zip(&arrows[g].table)
                    .map(|(&i, &j)| i * sb + j)
                    .collect();
                let paired = FnArrow { src: arrows[f].src, tgt: pobj, table };
                if !arrow_ids.contains_key(&paired) {
                    push(&mut arrows, &mut arrow_ids, paired);
                    changed = true;
                }
            }
        }
    }

    // Name arrows canonically by their graph.
    let named: Vec<Arrow> = arrows
        .iter()
        .map(|a| {
            let pairs: Vec<String> = a
                .table
                .iter()
                .enumerate()
                .map(|(i, &j)| format!("{}>{}", objects[a.src][i], objects[a.tgt][j]))
                .collect();
            Arrow {
                name: format!(
                    "f[{}:{}->{}]",
                    pairs.join(";"),
                    finset_name(&objects[a.src]),
                    finset_name(&objects[a.tgt])
                ),
                src: a.src,
                tgt: a.tgt,
            }
        })
        .collect();
    let mut compose = HashMap::new();
    for g in 0..arrows.len() {
        for f in 0..arrows.len() {
            if arrows[f].tgt != arrows[g].src {
                continue;
            }
            let table: Vec<usize> = arrows[f].table.iter().map(|&i| arrows[g].table[i]).collect();
            let comp = FnArrow { src: arrows[f].src, tgt: arrows[g].tgt, table };
            compose.insert((g, f), arrow_ids[&comp]);
        }
    }
    let obj_names: Vec<String> = objects.iter().map(|s| finset_name(s)).collect();
    let base = Arc::new(FiniteCategory::assemble(
        obj_names,
        named,
        identities,
        compose,
        Some(ProductStructure { terminal, bang, products }),
        false,
    )?);
    base.validate()?;

    // Fibers: the powerset of each set; reindexing: inverse image.
    let fibers: Vec<Arc<FinitePoset>> = objects
        .iter()
        .map(|s| Arc::new(powerset_poset(s)))
        .collect();
    let reindex: Vec<MonotoneMap> = arrows
        .iter()
        .map(|a| {
            let src_fiber = &fibers[a.tgt];
            let tgt_fiber = &fibers[a.src];
            let table: Vec<usize> = (0..src_fiber.len())
                .map(|mask| {
                    let mut out = 0usize;
                    for (i, &j) in a.table.iter().enumerate() {
                        if mask & (1 << j) != 0 {
                            out |= 1 << i;
                        }
                    }
                    out
                })
                .collect();
            MonotoneMap::from_indices(src_fiber.clone(), tgt_fiber.clone(), table)
                .expect("inverse image is monotone")
        })
        .collect();
    Ok(Doctrine::new(base, fibers, reindex))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::doctrine::{detect_structure, StructureKind, StructureReport};

    fn probes_small() -> Vec<FinSet> {
        vec![
            vec![],
            vec!["0".into()],
            vec!["0".into(), "1".into()],
        ]
    }

    #[test]
    fn downset_powerset_validates_and_is_boolean() {
        let elems = ["a", "b"];
        let p = FinitePoset::from_covers(&elems, &[("a", "b")]).unwrap();
        let cert = lattice_ops(&p);
        let base = Arc::new(semilattice_to_category(&p, &cert).unwrap());
        let d = downset_powerset(&p, base);
        d.validate().unwrap();
        let rep = StructureReport::detect_all(&d);
        assert!(rep.holds(StructureKind::Boolean));
    }

    #[test]
    fn random_doctrine_is_deterministic_and_valid() {
        for seed in 0..5 {
            let d1 = random_semilattice_doctrine(seed, 4);
            let d2 = random_semilattice_doctrine(seed, 4);
            assert_eq!(d1.base.objects, d2.base.objects);
            assert_eq!(
                d1.fibers.iter().map(|f| f.len()).collect::<Vec<_>>(),
                d2.fibers.iter().map(|f| f.len()).collect::<Vec<_>>()
            );
            d1.validate().unwrap();
            let rep = detect_structure(&d1, StructureKind::Primary).unwrap();
            assert!(rep.holds);
        }
    }

    #[test]
    fn trivial_random_doctrine_at_bound_one() {
        let d = random_semilattice_doctrine(0, 1);
        d.validate().unwrap();
        assert_eq!(d.base.objects.len(), 1);
    }

    #[test]
    fn powerset_fragment_validates_on_probes() {
        let d = powerset_doctrine(&probes_small(), PowersetCaps::default()).unwrap();
        d.validate().unwrap();
        assert!(!d.base.total);
        let rep = StructureReport::detect_all(&d);
        assert!(rep.holds(StructureKind::Primary));
        assert!(rep.holds(StructureKind::Boolean));
        assert!(rep.holds(StructureKind::Existential));
        assert!(rep.holds(StructureKind::Universal));
        assert!(rep.holds(StructureKind::Elementary));
    }

    #[test]
    fn powerset_elementary_delta_is_the_diagonal() {
        let d = powerset_doctrine(&probes_small(), PowersetCaps::default()).unwrap();
        let rep = detect_structure(&d, StructureKind::Elementary).unwrap();
        assert!(rep.holds);
        let witness = rep.elementary.unwrap();
        // Over A = {0,1}: the fibered equality is the diagonal subset of
        // A x A (candidates may differ above it, but the diagonal must be
        // among the candidates; the chosen witness must contain it).
        let a = d.base.object_index("{0,1}").unwrap();
        let sq = d.base.product(a, a).unwrap().obj;
        let fiber = d.fiber(sq);
        let delta = witness.delta[&a];
        let diag = fiber.index_of("{(0,0),(1,1)}").unwrap();
        assert!(fiber.leq_idx(diag, delta));
    }

    #[test]
    fn powerset_exists_along_pr1_is_direct_image() {
        let d = powerset_doctrine(&probes_small(), PowersetCaps::default()).unwrap();
        let rep = detect_structure(&d, StructureKind::Existential).unwrap();
        assert!(rep.holds, "{:?}", rep.failure);
        let w = rep.existential.unwrap();
        let c = d.base.object_index("{0,1}").unwrap();
        let b = d.base.object_index("{0}").unwrap();
        let q = &w.tables[&(c, b)];
        let s = d.base.product(c, b).unwrap().obj;
        let fiber_s = d.fiber(s);
        let fiber_c = d.fiber(c);
        // Brute-force direct image along pr1.
        for mask in 0..fiber_s.len() {
            let name = fiber_s.element(mask);
            // members are pairs "(x,y)"; project to x.
            let mut xs: Vec<&str> = Vec::new();
            for part in name.trim_matches(['{', '}']).split(',') {
                if part.is_empty() {
                    continue;
                }
                if let Some(x) = part.strip_prefix('(') {
                    xs.push(x);
                }
            }
            xs.sort();
            xs.dedup();
            let expected = format!("{{{}}}", xs.join(","));
            assert_eq!(fiber_c.element(q.apply(mask)), expected);
        }
    }

    #[test]
    fn probe_too_large_is_rejected() {
        let big: FinSet = (0..20).map(|i| i.to_string()).collect();
        let err = powerset_doctrine(&[big], PowersetCaps::default()).unwrap_err();
        matches!(err, ModelError::ProbeTooLarge(_, _));
    }
}
