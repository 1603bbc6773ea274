//! Doctrines: contravariant functors from a finite base category into
//! finite posets, their homomorphisms and 2-cells, and the structure
//! detectors (primary through weak power objects).
//!
//! A `Doctrine` here is an indexed poset: the base category may or may not
//! carry chosen products. Checks that need products (the detectors, the
//! extension engine) require them; the generic Kleisli machinery does not.
//! Lazily-presented doctrines (the powerset over all finite sets) are
//! handled by materializing a finite probe fragment with `base.total =
//! false`; every universally-quantified check then ranges over exactly the
//! objects and arrows of the fragment, which the reports record.

mod detect;

pub use detect::{
    check_elementary_family, detect_structure, ElementaryWitness, KindReport, QuantifierWitness,
    StructureKind, StructureReport, WpoWitness,
};

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::cat::{CatError, FiniteCategory, Functor, NatTransf};
use crate::order::{FinitePoset, MonotoneMap, OrderError};

#[derive(Debug, Error)]
pub enum DoctrineError {
    #[error("wrong number of {0}: expected {1}, got {2}")]
    TableSize(&'static str, usize, usize),
    #[error("reindexing of `{0}` has wrong source or target fiber")]
    IllTypedReindex(String),
    #[error("reindexing of identity at `{0}` is not the identity")]
    ReindexIdentityViolation(String),
    #[error("reindexing does not respect composition at `{0}` . `{1}`")]
    ReindexCompositionViolation(String, String),
    #[error("structure kind {0:?} requires {1:?}, which does not hold")]
    PrerequisiteMissing(StructureKind, StructureKind),
    #[error("base category has no product structure")]
    ProductsRequired,
    #[error("naturality violation for fiber maps at arrow `{0}`")]
    NaturalityViolation(String),
    #[error("morphism does not preserve {0:?}: {1}")]
    PreservationViolation(StructureKind, String),
    #[error("lax 2-cell inequality fails at object `{0}`, element `{1}`")]
    LaxInequalityViolation(String, String),
    #[error("structure kind {0:?} does not hold: {1}")]
    StructureMissing(StructureKind, String),
    #[error(transparent)]
    Cat(#[from] CatError),
    #[error(transparent)]
    Order(#[from] OrderError),
}

/// An indexed poset over a finite (possibly probe-restricted) base.
#[derive(Clone)]
pub struct Doctrine {
    pub base: Arc<FiniteCategory>,
    /// Per base object: its fiber.
    pub fibers: Vec<Arc<FinitePoset>>,
    /// Per base arrow `f : A -> B`: the reindexing `P(f) : P(B) -> P(A)`.
    pub reindex: Vec<MonotoneMap>,
}

impl fmt::Debug for Doctrine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "Doctrine(base {:?}, fibers {:?})",
            self.base,
            self.fibers.iter().map(|p| p.len()).collect::<Vec<_>>()
        )
    }
}

impl Doctrine {
    pub fn new(
        base: Arc<FiniteCategory>,
        fibers: Vec<Arc<FinitePoset>>,
        reindex: Vec<MonotoneMap>,
    ) -> Self {
        Doctrine { base, fibers, reindex }
    }

    /// The doctrine with a one-element fiber over every object.
    pub fn trivial(base: Arc<FiniteCategory>) -> Self {
        let single = Arc::new(
            FinitePoset::validate(&["*"], &[("*", "*")]).expect("singleton poset"),
        );
        let fibers: Vec<Arc<FinitePoset>> = base.objects.iter().map(|_| single.clone()).collect();
        let reindex = base
            .arrows
            .iter()
            .map(|_| MonotoneMap::identity(&single))
            .collect();
        Doctrine { base, fibers, reindex }
    }

    pub fn fiber(&self, obj: usize) -> &Arc<FinitePoset> {
        &self.fibers[obj]
    }

    pub fn reindex_along(&self, arr: usize) -> &MonotoneMap {
        &self.reindex[arr]
    }

    /// Verifies contravariant functoriality: identities map to identities
    /// and `P(g . f) = P(f) . P(g)` over every composable pair present.
    pub fn validate(&self) -> Result<(), DoctrineError> {
        let base = &self.base;
        base.validate()?;
        if self.fibers.len() != base.objects.len() {
            return Err(DoctrineError::TableSize(
                "fibers",
                base.objects.len(),
                self.fibers.len(),
            ));
        }
        if self.reindex.len() != base.arrows.len() {
            return Err(DoctrineError::TableSize(
                "reindexings",
                base.arrows.len(),
                self.reindex.len(),
            ));
        }
        for (i, arr) in base.arrows.iter().enumerate() {
            let r = &self.reindex[i];
            if r.source().as_ref() != self.fibers[arr.tgt].as_ref()
                || r.target().as_ref() != self.fibers[arr.src].as_ref()
            {
                return Err(DoctrineError::IllTypedReindex(arr.name.clone()));
            }
        }
        for (o, &i) in base.identities.iter().enumerate() {
            if !self.reindex[i].is_identity() {
                return Err(DoctrineError::ReindexIdentityViolation(
                    base.objects[o].clone(),
                ));
            }
        }
        for (&(g, f), &h) in &base.compose {
            let lhs = &self.reindex[h];
            let rhs = self.reindex[f].compose(&self.reindex[g])?;
            if lhs != &rhs {
                return Err(DoctrineError::ReindexCompositionViolation(
                    base.arrows[g].name.clone(),
                    base.arrows[f].name.clone(),
                ));
            }
        }
        Ok(())
    }
}

/// A doctrine homomorphism: a functor together with a fiberwise monotone
/// family, natural over the base.
#[derive(Clone)]
pub struct DoctrineMorphism {
    pub functor: Functor,
    /// Per source object `A`: the component `P(A) -> R(F A)`.
    pub fiber_maps: Vec<MonotoneMap>,
}

impl fmt::Debug for DoctrineMorphism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "DoctrineMorphism({:?})", self.functor)
    }
}

impl DoctrineMorphism {
    pub fn identity(d: &Doctrine) -> Self {
        DoctrineMorphism {
            functor: Functor::identity(&d.base),
            fiber_maps: d.fibers.iter().map(MonotoneMap::identity).collect(),
        }
    }

    /// `self` after `other`.
    pub fn compose(&self, other: &DoctrineMorphism) -> DoctrineMorphism {
        let functor = self.functor.compose(&other.functor);
        let fiber_maps = other
            .fiber_maps
            .iter()
            .enumerate()
            .map(|(a, m)| {
                self.fiber_maps[other.functor.on_obj(a)]
                    .compose(m)
                    .expect("composable fiber maps")
            })
            .collect();
        DoctrineMorphism { functor, fiber_maps }
    }

    /// Strict equality of the underlying tables.
    pub fn same_tables(&self, other: &DoctrineMorphism) -> bool {
        self.functor.obj_map == other.functor.obj_map
            && self.functor.arr_map == other.functor.arr_map
            && self.fiber_maps.len() == other.fiber_maps.len()
            && self
                .fiber_maps
                .iter()
                .zip(&other.fiber_maps)
                .all(|(a, b)| a.table() == b.table())
    }
}

/// Validates a morphism between validated doctrines: functor laws (with
/// product preservation when `require_products`), fiberwise naturality,
/// and — for every requested kind — the defining preservation equations,
/// stated against the structure detected on both sides.
pub fn validate_morphism(
    source: &Doctrine,
    target: &Doctrine,
    m: &DoctrineMorphism,
    require_products: bool,
    preserve: &[StructureKind],
) -> Result<(), DoctrineError> {
    m.functor.validate(require_products)?;
    if m.fiber_maps.len() != source.fibers.len() {
        return Err(DoctrineError::TableSize(
            "fiber maps",
            source.fibers.len(),
            m.fiber_maps.len(),
        ));
    }
    for (a, comp) in m.fiber_maps.iter().enumerate() {
        if comp.source().as_ref() != source.fibers[a].as_ref()
            || comp.target().as_ref() != target.fibers[m.functor.on_obj(a)].as_ref()
        {
            return Err(DoctrineError::IllTypedReindex(
                source.base.objects[a].clone(),
            ));
        }
    }
    // Naturality: f_A . P(h) = R(F h) . f_B for every h : A -> B.
    for (i, arr) in source.base.arrows.iter().enumerate() {
        let lhs = m.fiber_maps[arr.src].compose(&source.reindex[i])?;
        let rhs = target.reindex[m.functor.on_arr(i)].compose(&m.fiber_maps[arr.tgt])?;
        if lhs != rhs {
            return Err(DoctrineError::NaturalityViolation(arr.name.clone()));
        }
    }
    for &kind in preserve {
        check_preservation(source, target, m, kind)?;
    }
    Ok(())
}

/// The canonical comparison pair for a product-preserving functor at
/// `(a, b)`: `u : F(a x b) -> Fa x Fb` and its inverse, when both the
/// source witness and the target witness exist.
pub fn product_comparison(
    f: &Functor,
    a: usize,
    b: usize,
) -> Result<(usize, usize), DoctrineError> {
    let sw = f
        .source
        .product(a, b)
        .ok_or(DoctrineError::ProductsRequired)?
        .clone();
    let (fa, fb) = (f.on_obj(a), f.on_obj(b));
    let tw = f
        .target
        .product(fa, fb)
        .ok_or(DoctrineError::ProductsRequired)?
        .clone();
    let u = f.target.pairing(f.on_arr(sw.pr1), f.on_arr(sw.pr2))?;
    let fp = f.on_obj(sw.obj);
    let v = f
        .target
        .hom(tw.obj, fp)
        .into_iter()
        .find(|&v| {
            f.target.try_comp(u, v) == Some(f.target.identities[tw.obj])
                && f.target.try_comp(v, u) == Some(f.target.identities[fp])
        })
        .ok_or_else(|| {
            DoctrineError::Cat(CatError::ProductsNotPreserved(format!(
                "comparison for ({}, {}) not invertible",
                f.source.objects[a], f.source.objects[b]
            )))
        })?;
    Ok((u, v))
}

fn check_preservation(
    source: &Doctrine,
    target: &Doctrine,
    m: &DoctrineMorphism,
    kind: StructureKind,
) -> Result<(), DoctrineError> {
    use StructureKind as K;
    let src_rep = detect_structure(source, kind)?;
    let tgt_rep = detect_structure(target, kind)?;
    if !src_rep.holds {
        return Err(DoctrineError::StructureMissing(
            kind,
            src_rep.failure.unwrap_or_default(),
        ));
    }
    if !tgt_rep.holds {
        return Err(DoctrineError::StructureMissing(
            kind,
            tgt_rep.failure.unwrap_or_default(),
        ));
    }
    let fail = |obj: usize, detail: String| {
        Err(DoctrineError::PreservationViolation(
            kind,
            format!("at object `{}`: {}", source.base.objects[obj], detail),
        ))
    };
    match kind {
        K::Primary => {
            for (a, comp) in m.fiber_maps.iter().enumerate() {
                let p = source.fiber(a);
                let r = target.fiber(m.functor.on_obj(a));
                let pc = crate::order::lattice_ops(p);
                let rc = crate::order::lattice_ops(r);
                let (pm, pt) = (pc.meet.as_ref().unwrap(), pc.top.unwrap());
                let (rm, rt) = (rc.meet.as_ref().unwrap(), rc.top.unwrap());
                let n = p.len();
                let rn = r.len();
                if comp.apply(pt) != rt {
                    return fail(a, "top not preserved".into());
                }
                for x in 0..n {
                    for y in 0..n {
                        if comp.apply(pm[x * n + y]) != rm[comp.apply(x) * rn + comp.apply(y)] {
                            return fail(
                                a,
                                format!(
                                    "meet of {} and {} not preserved",
                                    p.element(x),
                                    p.element(y)
                                ),
                            );
                        }
                    }
                }
            }
        }
        K::Elementary => {
            let sw = src_rep.elementary.as_ref().unwrap();
            let tw = tgt_rep.elementary.as_ref().unwrap();
            for (&a, &delta) in &sw.delta {
                let sq = source.base.product(a, a).unwrap().obj;
                let (fa, _fsq) = (m.functor.on_obj(a), m.functor.on_obj(sq));
                let Some(&tdelta) = tw.delta.get(&fa) else { continue };
                // Transport the target witness along the canonical
                // comparison F(A x A) -> FA x FA before comparing.
                let (u, _v) = product_comparison(&m.functor, a, a)?;
                let lhs = m.fiber_maps[sq].apply(delta);
                let rhs = target.reindex[u].apply(tdelta);
                if lhs != rhs {
                    return fail(a, "fibered equality not preserved".into());
                }
            }
        }
        K::Existential | K::Universal => {
            let sw = if kind == K::Existential {
                src_rep.existential.as_ref().unwrap()
            } else {
                src_rep.universal.as_ref().unwrap()
            };
            let tw = if kind == K::Existential {
                tgt_rep.existential.as_ref().unwrap()
            } else {
                tgt_rep.universal.as_ref().unwrap()
            };
            for (&(c, b), q) in &sw.tables {
                let (fc, fb) = (m.functor.on_obj(c), m.functor.on_obj(b));
                let Some(tq) = tw.tables.get(&(fc, fb)) else { continue };
                let s = source.base.product(c, b).unwrap().obj;
                let (u, v) = product_comparison(&m.functor, c, b)?;
                let _ = u;
                // f_C . Q^B_C = Q^{FB}_{FC} . R(v) . f_{CxB} pointwise.
                let fs = source.fiber(s);
                for alpha in 0..fs.len() {
                    let lhs = m.fiber_maps[c].apply(q.apply(alpha));
                    let moved = target.reindex[v].apply(m.fiber_maps[s].apply(alpha));
                    let rhs = tq.apply(moved);
                    if lhs != rhs {
                        return fail(
                            c,
                            format!("quantifier not preserved at element {}", fs.element(alpha)),
                        );
                    }
                }
            }
        }
        K::Implicational => {
            for (a, comp) in m.fiber_maps.iter().enumerate() {
                let p = source.fiber(a);
                let r = target.fiber(m.functor.on_obj(a));
                let ph = crate::order::heyting_ops(p, &crate::order::lattice_ops(p))?;
                let rh = crate::order::heyting_ops(r, &crate::order::lattice_ops(r))?;
                let (n, rn) = (p.len(), r.len());
                for x in 0..n {
                    for y in 0..n {
                        if comp.apply(ph.imp(n, x, y)) != rh.imp(rn, comp.apply(x), comp.apply(y)) {
                            return fail(a, "implication not preserved".into());
                        }
                    }
                }
            }
        }
        K::Bounded => {
            for (a, comp) in m.fiber_maps.iter().enumerate() {
                let pc = crate::order::lattice_ops(source.fiber(a));
                let rc = crate::order::lattice_ops(target.fiber(m.functor.on_obj(a)));
                if comp.apply(pc.top.unwrap()) != rc.top.unwrap()
                    || comp.apply(pc.bottom.unwrap()) != rc.bottom.unwrap()
                {
                    return fail(a, "bounds not preserved".into());
                }
            }
        }
        K::Joins => {
            for (a, comp) in m.fiber_maps.iter().enumerate() {
                let p = source.fiber(a);
                let r = target.fiber(m.functor.on_obj(a));
                let pc = crate::order::lattice_ops(p);
                let rc = crate::order::lattice_ops(r);
                let (pj, rj) = (pc.join.as_ref().unwrap(), rc.join.as_ref().unwrap());
                if comp.apply(pc.bottom.unwrap()) != rc.bottom.unwrap() {
                    return fail(a, "bottom not preserved".into());
                }
                let (n, rn) = (p.len(), r.len());
                for x in 0..n {
                    for y in 0..n {
                        if comp.apply(pj[x * n + y]) != rj[comp.apply(x) * rn + comp.apply(y)] {
                            return fail(
                                a,
                                format!(
                                    "join of {} and {} not preserved",
                                    p.element(x),
                                    p.element(y)
                                ),
                            );
                        }
                    }
                }
            }
        }
        K::Heyting => {
            check_preservation(source, target, m, K::Implicational)?;
            check_preservation(source, target, m, K::Joins)?;
            check_preservation(source, target, m, K::Bounded)?;
        }
        K::Boolean => {
            check_preservation(source, target, m, K::Heyting)?;
        }
        K::StarAutonomous | K::PseudoComplements => {
            let sneg = src_rep.negations.as_ref().unwrap();
            let tneg = tgt_rep.negations.as_ref().unwrap();
            for (a, comp) in m.fiber_maps.iter().enumerate() {
                let p = source.fiber(a);
                let sn = &sneg[a];
                let tn = &tneg[m.functor.on_obj(a)];
                for x in 0..p.len() {
                    if comp.apply(sn[x]) != tn[comp.apply(x)] {
                        return fail(a, format!("negation of {} not preserved", p.element(x)));
                    }
                }
            }
        }
        K::WeakPowerObjects => {
            // The paper makes no preservation claim for weak power
            // objects; nothing to check beyond both sides holding.
        }
    }
    Ok(())
}

/// A lax 2-cell between parallel doctrine morphisms.
#[derive(Clone, Debug)]
pub struct TwoCell {
    pub transf: NatTransf,
}

/// Validates naturality of the underlying transformation plus the lax
/// inequality `f_A(alpha) <= R(theta_A)(g_A(alpha))` over every object and
/// fiber element.
pub fn validate_two_cell(
    source: &Doctrine,
    target: &Doctrine,
    m: &DoctrineMorphism,
    n: &DoctrineMorphism,
    theta: &TwoCell,
) -> Result<(), DoctrineError> {
    theta.transf.validate(&m.functor, &n.functor)?;
    for a in 0..source.base.objects.len() {
        let fiber = source.fiber(a);
        let r_theta = &target.reindex[theta.transf.components[a]];
        for alpha in 0..fiber.len() {
            let lhs = m.fiber_maps[a].apply(alpha);
            let rhs = r_theta.apply(n.fiber_maps[a].apply(alpha));
            if !target.fiber(m.functor.on_obj(a)).leq_idx(lhs, rhs) {
                return Err(DoctrineError::LaxInequalityViolation(
                    source.base.objects[a].clone(),
                    fiber.element(alpha).to_string(),
                ));
            }
        }
    }
    Ok(())
}

/// Convenience: a fiber map table given by an element-id mapping.
pub fn fiber_map_from_ids(
    source: Arc<FinitePoset>,
    target: Arc<FinitePoset>,
    pairs: &[(&str, &str)],
) -> Result<MonotoneMap, OrderError> {
    let mut table = HashMap::new();
    for (a, b) in pairs {
        table.insert(a.to_string(), b.to_string());
    }
    MonotoneMap::validate(source, target, &table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cat::semilattice_to_category;
    use crate::order::lattice_ops;

    fn chain_poset(n: usize) -> FinitePoset {
        let elems: Vec<String> = (0..n).map(|i| format!("c{i}")).collect();
        let covers: Vec<(String, String)> = (0..n.saturating_sub(1))
            .map(|i| (format!("c{i}"), format!("c{}", i + 1)))
            .collect();
        FinitePoset::from_covers(&elems, &covers).unwrap()
    }

    /// A doctrine over the 2-chain semilattice base with powerset fibers
    /// indexed by principal downsets and restriction reindexing.
    pub(crate) fn downset_powerset_doctrine(n: usize) -> Doctrine {
        let p = chain_poset(n);
        let cert = lattice_ops(&p);
        let base = Arc::new(semilattice_to_category(&p, &cert).unwrap());
        crate::models::downset_powerset(&p, base)
    }

    #[test]
    fn trivial_doctrine_validates() {
        let p = chain_poset(3);
        let cert = lattice_ops(&p);
        let base = Arc::new(semilattice_to_category(&p, &cert).unwrap());
        let d = Doctrine::trivial(base);
        d.validate().unwrap();
    }

    #[test]
    fn broken_reindex_composition_is_rejected() {
        // A 3-chain has a nontrivial composite c0<=c1 ; c1<=c2 = c0<=c2,
        // so corrupting one leg breaks functoriality.
        let p = chain_poset(3);
        let cert = lattice_ops(&p);
        let base = Arc::new(semilattice_to_category(&p, &cert).unwrap());
        let mut d = crate::models::downset_powerset(&p, base.clone());
        // Corrupt: swap the reindexing along c0 <= c1 with a constant map.
        let f = base.arrow_index("c0<=c1").unwrap();
        let tgt = d.reindex[f].target().clone();
        let src = d.reindex[f].source().clone();
        d.reindex[f] =
            MonotoneMap::from_indices(src, tgt, vec![0; d.reindex[f].source().len()]).unwrap();
        match d.validate() {
            Err(DoctrineError::ReindexCompositionViolation(_, _))
            | Err(DoctrineError::ReindexIdentityViolation(_)) => {}
            other => panic!("expected functoriality violation, got {other:?}"),
        }
    }

    #[test]
    fn identity_morphism_validates_and_preserves() {
        let d = downset_powerset_doctrine(2);
        d.validate().unwrap();
        let id = DoctrineMorphism::identity(&d);
        validate_morphism(
            &d,
            &d,
            &id,
            true,
            &[
                StructureKind::Primary,
                StructureKind::Bounded,
                StructureKind::Joins,
                StructureKind::Boolean,
            ],
        )
        .unwrap();
    }

    #[test]
    fn identity_two_cell_validates() {
        let d = downset_powerset_doctrine(2);
        let id = DoctrineMorphism::identity(&d);
        let theta = TwoCell { transf: NatTransf::identity(&id.functor) };
        validate_two_cell(&d, &d, &id, &id, &theta).unwrap();
    }

    #[test]
    fn two_cell_into_trivial_doctrine_always_validates() {
        let d = downset_powerset_doctrine(2);
        let t = Doctrine::trivial(d.base.clone());
        let functor = Functor::identity(&d.base);
        let fiber_maps: Vec<MonotoneMap> = d
            .fibers
            .iter()
            .enumerate()
            .map(|(a, p)| {
                MonotoneMap::from_indices(p.clone(), t.fibers[a].clone(), vec![0; p.len()])
                    .unwrap()
            })
            .collect();
        let m = DoctrineMorphism { functor, fiber_maps };
        validate_morphism(&d, &t, &m, true, &[]).unwrap();
        let theta = TwoCell { transf: NatTransf::identity(&m.functor) };
        validate_two_cell(&d, &t, &m, &m, &theta).unwrap();
    }

    #[test]
    fn failing_two_cell_names_the_witness() {
        // Two morphisms from the chain-fiber doctrine to itself over the
        // terminal base: identity vs. constant-top, with theta = identity.
        let single = Arc::new(FiniteCategory::terminal_category());
        let fiber = Arc::new(chain_poset(2));
        let d = Doctrine::new(
            single.clone(),
            vec![fiber.clone()],
            vec![MonotoneMap::identity(&fiber)],
        );
        d.validate().unwrap();
        let m_id = DoctrineMorphism::identity(&d);
        let m_top = DoctrineMorphism {
            functor: Functor::identity(&single),
            fiber_maps: vec![
                MonotoneMap::from_indices(fiber.clone(), fiber.clone(), vec![1, 1]).unwrap(),
            ],
        };
        validate_morphism(&d, &d, &m_top, true, &[]).unwrap();
        // top <= id fails at c0: m_top first, m_id second.
        let theta = TwoCell { transf: NatTransf::identity(&m_id.functor) };
        match validate_two_cell(&d, &d, &m_top, &m_id, &theta) {
            Err(DoctrineError::LaxInequalityViolation(obj, elem)) => {
                assert_eq!(obj, "*");
                assert_eq!(elem, "c0");
            }
            other => panic!("expected lax inequality violation, got {other:?}"),
        }
    }
}
