//! Structure detection on doctrines: primary, elementary, existential,
//! universal, implicational, bounded, joins, Heyting, Boolean,
//! *-autonomous, pseudo-complements, weak power objects.
//!
//! Each detector constructs witnesses by exhaustive search and verifies
//! them against the defining clauses before reporting. Absence of
//! structure is data (`holds = false` with the reason), not an error; only
//! a missing prerequisite is an error. On probe-restricted bases a check
//! that needs an absent construction (a product witness, a pairing) is
//! skipped and logged rather than failed.

use std::collections::{BTreeMap, HashMap};

use crate::order::{
    adjoints, heyting_ops, lattice_ops, HeytingCertificate, LatticeCertificate, MonotoneMap,
};

use super::{Doctrine, DoctrineError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum StructureKind {
    Primary,
    Elementary,
    Existential,
    Universal,
    Implicational,
    Bounded,
    Joins,
    Heyting,
    Boolean,
    StarAutonomous,
    PseudoComplements,
    WeakPowerObjects,
}

impl StructureKind {
    pub const ALL: [StructureKind; 12] = [
        StructureKind::Primary,
        StructureKind::Elementary,
        StructureKind::Existential,
        StructureKind::Universal,
        StructureKind::Implicational,
        StructureKind::Bounded,
        StructureKind::Joins,
        StructureKind::Heyting,
        StructureKind::Boolean,
        StructureKind::StarAutonomous,
        StructureKind::PseudoComplements,
        StructureKind::WeakPowerObjects,
    ];

    pub fn parse(s: &str) -> Option<StructureKind> {
        Some(match s {
            "primary" => StructureKind::Primary,
            "elementary" => StructureKind::Elementary,
            "existential" => StructureKind::Existential,
            "universal" => StructureKind::Universal,
            "implicational" => StructureKind::Implicational,
            "bounded" => StructureKind::Bounded,
            "joins" => StructureKind::Joins,
            "heyting" => StructureKind::Heyting,
            "boolean" => StructureKind::Boolean,
            "star-autonomous" => StructureKind::StarAutonomous,
            "pseudo-complements" => StructureKind::PseudoComplements,
            "weak-power-objects" => StructureKind::WeakPowerObjects,
            _ => return None,
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            StructureKind::Primary => "primary",
            StructureKind::Elementary => "elementary",
            StructureKind::Existential => "existential",
            StructureKind::Universal => "universal",
            StructureKind::Implicational => "implicational",
            StructureKind::Bounded => "bounded",
            StructureKind::Joins => "joins",
            StructureKind::Heyting => "heyting",
            StructureKind::Boolean => "boolean",
            StructureKind::StarAutonomous => "star-autonomous",
            StructureKind::PseudoComplements => "pseudo-complements",
            StructureKind::WeakPowerObjects => "weak-power-objects",
        }
    }
}

/// Fibered equalities: per object, the chosen element of `P(A x A)` and
/// how many candidates passed clauses 1 and 2.
#[derive(Clone, Debug, Default)]
pub struct ElementaryWitness {
    pub delta: HashMap<usize, usize>,
    pub candidate_counts: HashMap<usize, usize>,
}

/// Quantifier tables: per ordered pair `(C, B)`, the adjoint to the
/// weakening `P(pr1) : P(C) -> P(C x B)`; plus the checked side conditions.
#[derive(Clone, Debug, Default)]
pub struct QuantifierWitness {
    pub tables: HashMap<(usize, usize), MonotoneMap>,
    pub beck_chevalley: bool,
    pub frobenius: bool,
}

/// Weak power objects: per object `A`, the chosen `(Omega(A), mem_A)`.
#[derive(Clone, Debug, Default)]
pub struct WpoWitness {
    pub per_object: HashMap<usize, (usize, usize)>,
}

/// Outcome of detecting one structure kind, with verified witnesses.
#[derive(Clone, Debug)]
pub struct KindReport {
    pub kind: StructureKind,
    pub holds: bool,
    pub failure: Option<String>,
    pub skipped: Vec<String>,
    pub lattice: Option<Vec<LatticeCertificate>>,
    pub heyting: Option<Vec<HeytingCertificate>>,
    pub elementary: Option<ElementaryWitness>,
    pub existential: Option<QuantifierWitness>,
    pub universal: Option<QuantifierWitness>,
    pub negations: Option<Vec<Vec<usize>>>,
    pub wpo: Option<WpoWitness>,
    /// Extra flag for the universal kind: Frobenius reciprocity for the
    /// right-adjoint adjunction, carried along when it happens to hold.
    pub universal_frobenius: bool,
}

impl KindReport {
    fn new(kind: StructureKind) -> Self {
        KindReport {
            kind,
            holds: false,
            failure: None,
            skipped: Vec::new(),
            lattice: None,
            heyting: None,
            elementary: None,
            existential: None,
            universal: None,
            negations: None,
            wpo: None,
            universal_frobenius: false,
        }
    }

    fn fail(mut self, reason: String) -> Self {
        self.holds = false;
        self.failure = Some(reason);
        self
    }
}

/// Reports for a set of kinds, keyed for stable iteration order.
#[derive(Clone, Debug, Default)]
pub struct StructureReport {
    pub entries: BTreeMap<StructureKind, KindReport>,
}

impl StructureReport {
    pub fn detect_all(d: &Doctrine) -> StructureReport {
        let mut entries = BTreeMap::new();
        for kind in StructureKind::ALL {
            let report = match detect_structure(d, kind) {
                Ok(r) => r,
                Err(e) => KindReport::new(kind).fail(e.to_string()),
            };
            entries.insert(kind, report);
        }
        StructureReport { entries }
    }

    pub fn holds(&self, kind: StructureKind) -> bool {
        self.entries.get(&kind).map(|r| r.holds).unwrap_or(false)
    }

    pub fn get(&self, kind: StructureKind) -> Option<&KindReport> {
        self.entries.get(&kind)
    }
}

/// Detects one structure kind on a validated doctrine.
///
/// Kind-specific prerequisites (elementary, existential, universal,
/// *-autonomous and pseudo-complements all need primary) surface as
/// `PrerequisiteMissing`.
pub fn detect_structure(d: &Doctrine, kind: StructureKind) -> Result<KindReport, DoctrineError> {
    match kind {
        StructureKind::Primary => Ok(detect_primary(d)),
        StructureKind::Elementary => with_primary(d, kind, detect_elementary),
        StructureKind::Existential => with_primary(d, kind, |d, lat| detect_quantifier(d, lat, true)),
        StructureKind::Universal => with_primary(d, kind, |d, lat| detect_quantifier(d, lat, false)),
        StructureKind::Implicational => with_primary(d, kind, detect_implicational),
        StructureKind::Bounded => Ok(detect_bounded(d)),
        StructureKind::Joins => Ok(detect_joins(d)),
        StructureKind::Heyting => Ok(detect_heyting(d)),
        StructureKind::Boolean => Ok(detect_boolean(d)),
        StructureKind::StarAutonomous => with_primary(d, kind, detect_star_autonomous),
        StructureKind::PseudoComplements => with_primary(d, kind, detect_pseudo_complements),
        StructureKind::WeakPowerObjects => Ok(detect_wpo(d)),
    }
}

fn with_primary(
    d: &Doctrine,
    kind: StructureKind,
    f: impl FnOnce(&Doctrine, &[LatticeCertificate]) -> KindReport,
) -> Result<KindReport, DoctrineError> {
    let primary = detect_primary(d);
    if !primary.holds {
        return Err(DoctrineError::PrerequisiteMissing(kind, StructureKind::Primary));
    }
    Ok(f(d, primary.lattice.as_ref().unwrap()))
}

fn detect_primary(d: &Doctrine) -> KindReport {
    let mut rep = KindReport::new(StructureKind::Primary);
    let mut lattice = Vec::with_capacity(d.fibers.len());
    for (o, fiber) in d.fibers.iter().enumerate() {
        let cert = lattice_ops(fiber);
        if !cert.has_meets() {
            return rep.fail(format!(
                "fiber over `{}` lacks meets or a top element",
                d.base.objects[o]
            ));
        }
        lattice.push(cert);
    }
    // Reindexing preserves meets and top.
    for (i, arr) in d.base.arrows.iter().enumerate() {
        let r = &d.reindex[i];
        let src_cert = &lattice[arr.tgt];
        let dst_cert = &lattice[arr.src];
        let n = d.fibers[arr.tgt].len();
        let m = d.fibers[arr.src].len();
        let sm = src_cert.meet.as_ref().unwrap();
        let dm = dst_cert.meet.as_ref().unwrap();
        if r.apply(src_cert.top.unwrap()) != dst_cert.top.unwrap() {
            return rep.fail(format!("reindexing along `{}` drops the top", arr.name));
        }
        for a in 0..n {
            for b in 0..n {
                if r.apply(sm[a * n + b]) != dm[r.apply(a) * m + r.apply(b)] {
                    return rep.fail(format!(
                        "reindexing along `{}` does not preserve meets",
                        arr.name
                    ));
                }
            }
        }
    }
    rep.holds = true;
    rep.lattice = Some(lattice);
    rep
}

/// Projections out of the double product `(A x B) x (A x B)`, when all the
/// needed witnesses exist: returns `(W, p1, p2, p3, p4)` with
/// `p1, p3 : W -> A` and `p2, p4 : W -> B`.
fn double_product(
    d: &Doctrine,
    a: usize,
    b: usize,
) -> Option<(usize, usize, usize, usize, usize)> {
    let base = &d.base;
    let s = base.product(a, b)?.clone();
    let w = base.product(s.obj, s.obj)?.clone();
    let p1 = base.try_comp(s.pr1, w.pr1)?;
    let p2 = base.try_comp(s.pr2, w.pr1)?;
    let p3 = base.try_comp(s.pr1, w.pr2)?;
    let p4 = base.try_comp(s.pr2, w.pr2)?;
    Some((w.obj, p1, p2, p3, p4))
}

fn detect_elementary(d: &Doctrine, lattice: &[LatticeCertificate]) -> KindReport {
    let mut rep = KindReport::new(StructureKind::Elementary);
    let base = &d.base;
    let n_obj = base.objects.len();

    // Clause 1 + 2 candidates per object, in fiber order.
    let mut candidates: HashMap<usize, Vec<usize>> = HashMap::new();
    let mut counts = HashMap::new();
    for a in 0..n_obj {
        let Some(w) = base.product(a, a) else {
            if base.total {
                return rep.fail(format!(
                    "no product witness for ({0}, {0})",
                    base.objects[a]
                ));
            }
            rep.skipped.push(format!(
                "object `{}`: square not materialized",
                base.objects[a]
            ));
            continue;
        };
        let w = w.clone();
        let diag = match base.pairing(base.identities[a], base.identities[a]) {
            Ok(x) => x,
            Err(_) => {
                rep.skipped
                    .push(format!("object `{}`: no diagonal arrow", base.objects[a]));
                continue;
            }
        };
        let fiber_a = d.fiber(a);
        let fiber_sq = d.fiber(w.obj);
        let top_a = lattice[a].top.unwrap();
        let meet_sq = lattice[w.obj].meet.as_ref().unwrap();
        let nn = fiber_sq.len();
        let mut found = Vec::new();
        for delta in 0..nn {
            // 1. top_A <= P(Delta_A)(delta)
            if !fiber_a.leq_idx(top_a, d.reindex[diag].apply(delta)) {
                continue;
            }
            // 2. every alpha is a descent datum:
            //    P(pr1)(alpha) /\ delta <= P(pr2)(alpha)
            let ok = (0..fiber_a.len()).all(|alpha| {
                let l = meet_sq[d.reindex[w.pr1].apply(alpha) * nn + delta];
                fiber_sq.leq_idx(l, d.reindex[w.pr2].apply(alpha))
            });
            if ok {
                found.push(delta);
            }
        }
        if found.is_empty() {
            return rep.fail(format!(
                "no fibered equality candidate over `{}`",
                base.objects[a]
            ));
        }
        counts.insert(a, found.len());
        candidates.insert(a, found);
    }

    // Clause 3 constraints: delta_A (x) delta_B <= delta_{A x B} for every
    // pair whose double product is materialized.
    #[derive(Clone, Copy)]
    struct Clause3 {
        a: usize,
        b: usize,
        s: usize,
        r13: usize,
        r24: usize,
        wobj: usize,
    }
    let mut constraints = Vec::new();
    for a in 0..n_obj {
        for b in 0..n_obj {
            if !candidates.contains_key(&a) || !candidates.contains_key(&b) {
                continue;
            }
            let Some(sw) = base.product(a, b) else { continue };
            let s = sw.obj;
            if !candidates.contains_key(&s) {
                continue;
            }
            let Some((wobj, p1, p2, p3, p4)) = double_product(d, a, b) else {
                rep.skipped.push(format!(
                    "pair (`{}`, `{}`): double product not materialized",
                    base.objects[a], base.objects[b]
                ));
                continue;
            };
            let (Ok(r13), Ok(r24)) = (base.pairing(p1, p3), base.pairing(p2, p4)) else {
                rep.skipped.push(format!(
                    "pair (`{}`, `{}`): no pairing arrows into the squares",
                    base.objects[a], base.objects[b]
                ));
                continue;
            };
            constraints.push(Clause3 { a, b, s, r13, r24, wobj });
        }
    }

    // Pick one candidate per object, first combination that satisfies all
    // clause-3 constraints (lexicographic backtracking, budgeted).
    let objs: Vec<usize> = {
        let mut v: Vec<usize> = candidates.keys().copied().collect();
        v.sort_unstable();
        v
    };
    let mut choice: HashMap<usize, usize> = HashMap::new();
    let mut budget = 200_000usize;
    let sat = |choice: &HashMap<usize, usize>, c: &Clause3| -> bool {
        let (Some(&da), Some(&db), Some(&ds)) =
            (choice.get(&c.a), choice.get(&c.b), choice.get(&c.s))
        else {
            return true;
        };
        let fiber_w = d.fiber(c.wobj);
        let meet_w = lattice[c.wobj].meet.as_ref().unwrap();
        let nn = fiber_w.len();
        // delta over S, pulled back to W along the pairing of the two
        // "same square" projections, i.e. delta_{AxB} reindexed along the
        // canonical W -> S x S structure. delta_S lives in P(S x S) = P(W).
        let boxed = meet_w[d.reindex[c.r13].apply(da) * nn + d.reindex[c.r24].apply(db)];
        fiber_w.leq_idx(boxed, ds)
    };
    fn backtrack(
        objs: &[usize],
        pos: usize,
        candidates: &HashMap<usize, Vec<usize>>,
        constraints: &[impl Fn(&HashMap<usize, usize>) -> bool],
        choice: &mut HashMap<usize, usize>,
        budget: &mut usize,
    ) -> bool {
        if *budget == 0 {
            return false;
        }
        *budget -= 1;
        if pos == objs.len() {
            return constraints.iter().all(|c| c(choice));
        }
        let o = objs[pos];
        for &cand in &candidates[&o] {
            choice.insert(o, cand);
            if constraints.iter().all(|c| c(choice))
                && backtrack(objs, pos + 1, candidates, constraints, choice, budget)
            {
                return true;
            }
        }
        choice.remove(&o);
        false
    }
    let cons: Vec<Box<dyn Fn(&HashMap<usize, usize>) -> bool>> = constraints
        .iter()
        .map(|&c| {
            Box::new(move |ch: &HashMap<usize, usize>| sat(ch, &c))
                as Box<dyn Fn(&HashMap<usize, usize>) -> bool>
        })
        .collect();
    if !backtrack(&objs, 0, &candidates, &cons, &mut choice, &mut budget) {
        return rep.fail(
            "clause-2 candidates exist but no family satisfies the product clause".to_string(),
        );
    }
    rep.holds = true;
    rep.elementary = Some(ElementaryWitness { delta: choice, candidate_counts: counts });
    rep
}

/// Checks a given family of fibered-equality candidates against the three
/// elementary clauses, over every object and pair for which the needed
/// constructions exist in the base. Used by the transport matrix to
/// verify constructed witnesses independently of the search.
pub fn check_elementary_family(
    d: &Doctrine,
    family: &HashMap<usize, usize>,
) -> Result<(), String> {
    let base = &d.base;
    for (&a, &delta) in family {
        let w = base
            .product(a, a)
            .ok_or_else(|| format!("no square for `{}`", base.objects[a]))?
            .clone();
        let diag = base
            .pairing(base.identities[a], base.identities[a])
            .map_err(|e| e.to_string())?;
        let fiber_a = d.fiber(a);
        let fiber_sq = d.fiber(w.obj);
        let cert_a = lattice_ops(fiber_a);
        let cert_sq = lattice_ops(fiber_sq);
        let top_a = cert_a.top.ok_or("no top")?;
        let meet_sq = cert_sq.meet.as_ref().ok_or("no meets")?;
        let nn = fiber_sq.len();
        if !fiber_a.leq_idx(top_a, d.reindex[diag].apply(delta)) {
            return Err(format!("clause 1 fails over `{}`", base.objects[a]));
        }
        for alpha in 0..fiber_a.len() {
            let l = meet_sq[d.reindex[w.pr1].apply(alpha) * nn + delta];
            if !fiber_sq.leq_idx(l, d.reindex[w.pr2].apply(alpha)) {
                return Err(format!(
                    "clause 2 fails over `{}` at `{}`",
                    base.objects[a],
                    fiber_a.element(alpha)
                ));
            }
        }
    }
    for (&a, &da) in family {
        for (&b, &db) in family {
            let Some(sw) = base.product(a, b) else { continue };
            let Some(&ds) = family.get(&sw.obj) else { continue };
            let Some((wobj, p1, p2, p3, p4)) = double_product(d, a, b) else { continue };
            let (Ok(r13), Ok(r24)) = (base.pairing(p1, p3), base.pairing(p2, p4)) else {
                continue;
            };
            let fiber_w = d.fiber(wobj);
            let cert_w = lattice_ops(fiber_w);
            let meet_w = cert_w.meet.as_ref().ok_or("no meets")?;
            let nn = fiber_w.len();
            let boxed = meet_w[d.reindex[r13].apply(da) * nn + d.reindex[r24].apply(db)];
            if !fiber_w.leq_idx(boxed, ds) {
                return Err(format!(
                    "clause 3 fails for (`{}`, `{}`)",
                    base.objects[a], base.objects[b]
                ));
            }
        }
    }
    Ok(())
}

fn detect_quantifier(
    d: &Doctrine,
    lattice: &[LatticeCertificate],
    left: bool,
) -> KindReport {
    let kind = if left { StructureKind::Existential } else { StructureKind::Universal };
    let mut rep = KindReport::new(kind);
    let base = &d.base;
    let n_obj = base.objects.len();
    let mut tables: HashMap<(usize, usize), MonotoneMap> = HashMap::new();
    for c in 0..n_obj {
        for b in 0..n_obj {
            let Some(w) = base.product(c, b) else {
                if base.total {
                    return rep.fail(format!(
                        "no product witness for ({}, {})",
                        base.objects[c], base.objects[b]
                    ));
                }
                rep.skipped.push(format!(
                    "pair (`{}`, `{}`): product not materialized",
                    base.objects[c], base.objects[b]
                ));
                continue;
            };
            let weakening = &d.reindex[w.pr1];
            let adj = adjoints(weakening);
            let q = if left { adj.left } else { adj.right };
            match q {
                Some(q) => {
                    tables.insert((c, b), q);
                }
                None => {
                    return rep.fail(format!(
                        "no {} adjoint to weakening at ({}, {})",
                        if left { "left" } else { "right" },
                        base.objects[c],
                        base.objects[b]
                    ));
                }
            }
        }
    }

    // Beck-Chevalley on the designated squares: f x id_B over pr1.
    let mut bc_ok = true;
    for (i, arr) in base.arrows.iter().enumerate() {
        let (c_src, c_tgt) = (arr.src, arr.tgt);
        for b in 0..n_obj {
            let (Some(q_src), Some(q_tgt)) = (tables.get(&(c_src, b)), tables.get(&(c_tgt, b)))
            else {
                continue;
            };
            let (Some(w_src), Some(w_tgt)) = (base.product(c_src, b), base.product(c_tgt, b))
            else {
                continue;
            };
            let (w_src, w_tgt) = (w_src.clone(), w_tgt.clone());
            let Some(f_pr1) = base.try_comp(i, w_src.pr1) else { continue };
            let Ok(f_times_id) = base.pairing(f_pr1, w_src.pr2) else {
                rep.skipped.push(format!(
                    "BC square at `{}` with `{}`: pairing missing",
                    arr.name, base.objects[b]
                ));
                continue;
            };
            let fiber = d.fiber(w_tgt.obj);
            for beta in 0..fiber.len() {
                let lhs;
                let rhs;
                if left {
                    lhs = q_src.apply(d.reindex[f_times_id].apply(beta));
                    rhs = d.reindex[i].apply(q_tgt.apply(beta));
                } else {
                    lhs = d.reindex[i].apply(q_tgt.apply(beta));
                    rhs = q_src.apply(d.reindex[f_times_id].apply(beta));
                }
                if lhs != rhs {
                    bc_ok = false;
                    rep.failure = Some(format!(
                        "Beck-Chevalley fails at arrow `{}`, parameter `{}`, element `{}`",
                        arr.name,
                        base.objects[b],
                        fiber.element(beta)
                    ));
                }
            }
        }
    }

    // Frobenius. For the left adjoint this is part of the definition; for
    // the right adjoint it is reported as an extra flag.
    let mut frobenius = true;
    for (&(c, b), q) in &tables {
        let w = base.product(c, b).unwrap().clone();
        let fiber_s = d.fiber(w.obj);
        let fiber_c = d.fiber(c);
        let meet_s = lattice[w.obj].meet.as_ref().unwrap();
        let meet_c = lattice[c].meet.as_ref().unwrap();
        let (ns, nc) = (fiber_s.len(), fiber_c.len());
        for beta in 0..nc {
            let weakened = d.reindex[w.pr1].apply(beta);
            for alpha in 0..ns {
                if left {
                    // exists(alpha /\ P(pr1) beta) = exists(alpha) /\ beta
                    let lhs = q.apply(meet_s[alpha * ns + weakened]);
                    let rhs = meet_c[q.apply(alpha) * nc + beta];
                    if lhs != rhs {
                        frobenius = false;
                    }
                } else {
                    // P(pr1)(beta /\ forall(alpha)) = P(pr1)(beta) /\ alpha
                    let lhs = d.reindex[w.pr1].apply(meet_c[beta * nc + q.apply(alpha)]);
                    let rhs = meet_s[weakened * ns + alpha];
                    if lhs != rhs {
                        frobenius = false;
                    }
                }
            }
        }
    }

    let witness = QuantifierWitness { tables, beck_chevalley: bc_ok, frobenius };
    if left {
        if !bc_ok {
            rep.existential = Some(witness);
            return rep;
        }
        if !frobenius {
            rep.existential = Some(witness);
            return rep.fail("Frobenius reciprocity fails".to_string());
        }
        rep.holds = true;
        rep.existential = Some(witness);
    } else {
        if !bc_ok {
            rep.universal = Some(witness);
            return rep;
        }
        rep.holds = true;
        rep.universal_frobenius = frobenius;
        rep.universal = Some(witness);
    }
    rep
}

fn detect_implicational(d: &Doctrine, _lattice: &[LatticeCertificate]) -> KindReport {
    let mut rep = KindReport::new(StructureKind::Implicational);
    let mut certs = Vec::with_capacity(d.fibers.len());
    for (o, fiber) in d.fibers.iter().enumerate() {
        match heyting_ops(fiber, &lattice_ops(fiber)) {
            Ok(h) => certs.push(h),
            Err(e) => {
                return rep.fail(format!(
                    "fiber over `{}` is not cartesian closed: {}",
                    d.base.objects[o], e
                ))
            }
        }
    }
    for (i, arr) in d.base.arrows.iter().enumerate() {
        let r = &d.reindex[i];
        let (n, m) = (d.fibers[arr.tgt].len(), d.fibers[arr.src].len());
        for a in 0..n {
            for b in 0..n {
                if r.apply(certs[arr.tgt].imp(n, a, b))
                    != certs[arr.src].imp(m, r.apply(a), r.apply(b))
                {
                    return rep.fail(format!(
                        "reindexing along `{}` does not preserve implication",
                        arr.name
                    ));
                }
            }
        }
    }
    rep.holds = true;
    rep.heyting = Some(certs);
    rep
}

fn detect_bounded(d: &Doctrine) -> KindReport {
    let mut rep = KindReport::new(StructureKind::Bounded);
    let mut lattice = Vec::with_capacity(d.fibers.len());
    for (o, fiber) in d.fibers.iter().enumerate() {
        let cert = lattice_ops(fiber);
        if cert.top.is_none() || cert.bottom.is_none() {
            return rep.fail(format!(
                "fiber over `{}` lacks a top or a bottom",
                d.base.objects[o]
            ));
        }
        lattice.push(cert);
    }
    for (i, arr) in d.base.arrows.iter().enumerate() {
        let r = &d.reindex[i];
        if r.apply(lattice[arr.tgt].top.unwrap()) != lattice[arr.src].top.unwrap()
            || r.apply(lattice[arr.tgt].bottom.unwrap()) != lattice[arr.src].bottom.unwrap()
        {
            return rep.fail(format!("reindexing along `{}` drops a bound", arr.name));
        }
    }
    rep.holds = true;
    rep.lattice = Some(lattice);
    rep
}

fn detect_joins(d: &Doctrine) -> KindReport {
    let mut rep = KindReport::new(StructureKind::Joins);
    let mut lattice = Vec::with_capacity(d.fibers.len());
    for (o, fiber) in d.fibers.iter().enumerate() {
        let cert = lattice_ops(fiber);
        if cert.join.is_none() || cert.bottom.is_none() {
            return rep.fail(format!(
                "fiber over `{}` lacks binary joins or a bottom",
                d.base.objects[o]
            ));
        }
        lattice.push(cert);
    }
    for (i, arr) in d.base.arrows.iter().enumerate() {
        let r = &d.reindex[i];
        let (n, m) = (d.fibers[arr.tgt].len(), d.fibers[arr.src].len());
        let sj = lattice[arr.tgt].join.as_ref().unwrap();
        let dj = lattice[arr.src].join.as_ref().unwrap();
        if r.apply(lattice[arr.tgt].bottom.unwrap()) != lattice[arr.src].bottom.unwrap() {
            return rep.fail(format!("reindexing along `{}` drops the bottom", arr.name));
        }
        for a in 0..n {
            for b in 0..n {
                if r.apply(sj[a * n + b]) != dj[r.apply(a) * m + r.apply(b)] {
                    return rep.fail(format!(
                        "reindexing along `{}` does not preserve joins",
                        arr.name
                    ));
                }
            }
        }
    }
    rep.holds = true;
    rep.lattice = Some(lattice);
    rep
}

fn detect_heyting(d: &Doctrine) -> KindReport {
    let mut rep = KindReport::new(StructureKind::Heyting);
    let primary = detect_primary(d);
    if !primary.holds {
        return rep.fail(primary.failure.unwrap_or_default());
    }
    let imp = match detect_structure(d, StructureKind::Implicational) {
        Ok(r) if r.holds => r,
        Ok(r) => return rep.fail(r.failure.unwrap_or_default()),
        Err(e) => return rep.fail(e.to_string()),
    };
    let joins = detect_joins(d);
    if !joins.holds {
        return rep.fail(joins.failure.unwrap_or_default());
    }
    rep.holds = true;
    rep.heyting = imp.heyting;
    rep.lattice = joins.lattice;
    rep
}

fn detect_boolean(d: &Doctrine) -> KindReport {
    let mut rep = KindReport::new(StructureKind::Boolean);
    let h = detect_heyting(d);
    if !h.holds {
        return rep.fail(h.failure.unwrap_or_default());
    }
    let certs = h.heyting.as_ref().unwrap();
    for (o, cert) in certs.iter().enumerate() {
        if !cert.boolean {
            return rep.fail(format!(
                "double negation is not the identity in the fiber over `{}`",
                d.base.objects[o]
            ));
        }
    }
    rep.holds = true;
    rep.negations = Some(
        certs
            .iter()
            .map(|c| c.pseudo_complement.clone().unwrap())
            .collect(),
    );
    rep.heyting = h.heyting;
    rep.lattice = h.lattice;
    rep
}

/// All antitone involutions of a fiber satisfying the *-autonomy shift
/// law, enumerated by backtracking. Small fibers only; the caller guards.
fn star_involutions(
    fiber: &crate::order::FinitePoset,
    cert: &LatticeCertificate,
) -> Vec<Vec<usize>> {
    let n = fiber.len();
    let mut out = Vec::new();
    let mut neg = vec![usize::MAX; n];
    fn rec(
        fiber: &crate::order::FinitePoset,
        cert: &LatticeCertificate,
        neg: &mut Vec<usize>,
        i: usize,
        out: &mut Vec<Vec<usize>>,
    ) {
        let n = fiber.len();
        if i == n {
            if crate::order::check_star_autonomous(fiber, cert, neg).is_ok() {
                out.push(neg.clone());
            }
            return;
        }
        if neg[i] != usize::MAX {
            rec(fiber, cert, neg, i + 1, out);
            return;
        }
        for j in 0..n {
            // Involution pairs (i, j); antitonicity pruned lazily by the
            // final check. Only pair with unassigned j (or j == i).
            if j != i && neg[j] != usize::MAX {
                continue;
            }
            neg[i] = j;
            neg[j] = i;
            rec(fiber, cert, neg, i + 1, out);
            neg[i] = usize::MAX;
            if j != i {
                neg[j] = usize::MAX;
            }
        }
    }
    rec(fiber, cert, &mut neg, 0, &mut out);
    out
}

fn detect_star_autonomous(d: &Doctrine, lattice: &[LatticeCertificate]) -> KindReport {
    let mut rep = KindReport::new(StructureKind::StarAutonomous);
    const FIBER_CAP: usize = 10;
    let mut candidate_sets: Vec<Vec<Vec<usize>>> = Vec::with_capacity(d.fibers.len());
    for (o, fiber) in d.fibers.iter().enumerate() {
        if fiber.len() > FIBER_CAP {
            // Fall back to the canonical candidates on big fibers.
            let mut cands = Vec::new();
            if let Ok(h) = heyting_ops(fiber, &lattice[o]) {
                if let Some(neg) = h.pseudo_complement {
                    if crate::order::check_star_autonomous(fiber, &lattice[o], &neg).is_ok() {
                        cands.push(neg);
                    }
                }
            }
            if cands.is_empty() {
                return rep.fail(format!(
                    "fiber over `{}` too large for involution search and no canonical negation works",
                    d.base.objects[o]
                ));
            }
            candidate_sets.push(cands);
        } else {
            let cands = star_involutions(fiber, &lattice[o]);
            if cands.is_empty() {
                return rep.fail(format!(
                    "fiber over `{}` admits no *-autonomous negation",
                    d.base.objects[o]
                ));
            }
            candidate_sets.push(cands);
        }
    }
    // Pick a natural family: backtracking over per-fiber candidates.
    let n_obj = d.base.objects.len();
    let natural = |family: &[usize]| -> bool {
        d.base.arrows.iter().enumerate().all(|(i, arr)| {
            let r = &d.reindex[i];
            let sn = &candidate_sets[arr.tgt][family[arr.tgt]];
            let dn = &candidate_sets[arr.src][family[arr.src]];
            (0..d.fibers[arr.tgt].len()).all(|x| r.apply(sn[x]) == dn[r.apply(x)])
        })
    };
    let mut family = vec![0usize; n_obj];
    let mut budget = 100_000usize;
    fn pick(
        family: &mut Vec<usize>,
        pos: usize,
        sets: &[Vec<Vec<usize>>],
        natural: &impl Fn(&[usize]) -> bool,
        budget: &mut usize,
    ) -> bool {
        if *budget == 0 {
            return false;
        }
        *budget -= 1;
        if pos == family.len() {
            return natural(family);
        }
        for c in 0..sets[pos].len() {
            family[pos] = c;
            if pick(family, pos + 1, sets, natural, budget) {
                return true;
            }
        }
        false
    }
    if !pick(&mut family, 0, &candidate_sets, &natural, &mut budget) {
        return rep.fail("no natural family of *-autonomous negations".to_string());
    }
    rep.holds = true;
    rep.negations = Some(
        family
            .iter()
            .enumerate()
            .map(|(o, &c)| candidate_sets[o][c].clone())
            .collect(),
    );
    rep
}

fn detect_pseudo_complements(d: &Doctrine, lattice: &[LatticeCertificate]) -> KindReport {
    let mut rep = KindReport::new(StructureKind::PseudoComplements);
    let mut negs = Vec::with_capacity(d.fibers.len());
    for (o, fiber) in d.fibers.iter().enumerate() {
        match crate::order::pseudo_complements(fiber, &lattice[o]) {
            Some(neg) => negs.push(neg),
            None => {
                return rep.fail(format!(
                    "fiber over `{}` lacks pseudo-complements",
                    d.base.objects[o]
                ))
            }
        }
    }
    for (i, arr) in d.base.arrows.iter().enumerate() {
        let r = &d.reindex[i];
        for x in 0..d.fibers[arr.tgt].len() {
            if r.apply(negs[arr.tgt][x]) != negs[arr.src][r.apply(x)] {
                return rep.fail(format!(
                    "reindexing along `{}` does not preserve pseudo-complements",
                    arr.name
                ));
            }
        }
    }
    rep.holds = true;
    rep.negations = Some(negs);
    rep
}

fn detect_wpo(d: &Doctrine) -> KindReport {
    let mut rep = KindReport::new(StructureKind::WeakPowerObjects);
    let base = &d.base;
    let n_obj = base.objects.len();
    let mut per_object = HashMap::new();
    'objects: for a in 0..n_obj {
        for omega in 0..n_obj {
            let Some(w_ao) = base.product(a, omega) else { continue };
            let w_ao = w_ao.clone();
            let fiber_ao = d.fiber(w_ao.obj);
            'mem: for mem in 0..fiber_ao.len() {
                // Every phi in P(A x B) must be classified by some arrow
                // {phi} : B -> Omega.
                for b in 0..n_obj {
                    let Some(w_ab) = base.product(a, b) else { continue };
                    let w_ab = w_ab.clone();
                    let fiber_ab = d.fiber(w_ab.obj);
                    for phi in 0..fiber_ab.len() {
                        let classified = base.hom(b, omega).into_iter().any(|h| {
                            let Some(h_pr2) = base.try_comp(h, w_ab.pr2) else { return false };
                            let Ok(m) = base.pairing(w_ab.pr1, h_pr2) else { return false };
                            d.reindex[m].apply(mem) == phi
                        });
                        if !classified {
                            continue 'mem;
                        }
                    }
                }
                per_object.insert(a, (omega, mem));
                continue 'objects;
            }
        }
        return rep.fail(format!(
            "no weak power object for `{}`",
            base.objects[a]
        ));
    }
    rep.holds = true;
    rep.wpo = Some(WpoWitness { per_object });
    rep
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cat::{semilattice_to_category, FiniteCategory};
    use crate::doctrine::Doctrine;
    use crate::order::FinitePoset;
    use std::sync::Arc;

    fn chain_poset(n: usize) -> FinitePoset {
        let elems: Vec<String> = (0..n).map(|i| format!("c{i}")).collect();
        let covers: Vec<(String, String)> = (0..n.saturating_sub(1))
            .map(|i| (format!("c{i}"), format!("c{}", i + 1)))
            .collect();
        FinitePoset::from_covers(&elems, &covers).unwrap()
    }

    fn sample_doctrine(n: usize) -> Doctrine {
        let p = chain_poset(n);
        let cert = lattice_ops(&p);
        let base = Arc::new(semilattice_to_category(&p, &cert).unwrap());
        crate::models::downset_powerset(&p, base)
    }

    #[test]
    fn trivial_doctrine_has_all_structure() {
        let p = chain_poset(2);
        let cert = lattice_ops(&p);
        let base = Arc::new(semilattice_to_category(&p, &cert).unwrap());
        let d = Doctrine::trivial(base);
        d.validate().unwrap();
        let rep = StructureReport::detect_all(&d);
        for kind in StructureKind::ALL {
            assert!(rep.holds(kind), "trivial doctrine should be {kind:?}");
        }
    }

    #[test]
    fn downset_powerset_doctrine_structure() {
        let d = sample_doctrine(2);
        d.validate().unwrap();
        let rep = StructureReport::detect_all(&d);
        assert!(rep.holds(StructureKind::Primary));
        assert!(rep.holds(StructureKind::Elementary));
        assert!(rep.holds(StructureKind::Existential));
        assert!(rep.holds(StructureKind::Universal));
        assert!(rep.holds(StructureKind::Boolean));
        assert!(rep.holds(StructureKind::StarAutonomous));
        assert!(rep.holds(StructureKind::PseudoComplements));
    }

    #[test]
    fn elementary_agrees_with_brute_force_oracle() {
        // Independent oracle: enumerate every element of P(A x A) and test
        // the three clauses directly, for every object.
        let d = sample_doctrine(2);
        let rep = detect_structure(&d, StructureKind::Elementary).unwrap();
        assert!(rep.holds);
        let witness = rep.elementary.unwrap();
        let base = &d.base;
        for a in 0..base.objects.len() {
            let w = base.product(a, a).unwrap().clone();
            let fiber_a = d.fiber(a);
            let fiber_sq = d.fiber(w.obj);
            assert!(fiber_sq.len() <= 64);
            let diag = base
                .pairing(base.identities[a], base.identities[a])
                .unwrap();
            let cert_a = lattice_ops(fiber_a);
            let cert_sq = lattice_ops(fiber_sq);
            let meet_sq = cert_sq.meet.as_ref().unwrap();
            let nn = fiber_sq.len();
            let oracle: Vec<usize> = (0..nn)
                .filter(|&delta| {
                    fiber_a.leq_idx(cert_a.top.unwrap(), d.reindex[diag].apply(delta))
                        && (0..fiber_a.len()).all(|alpha| {
                            let l = meet_sq[d.reindex[w.pr1].apply(alpha) * nn + delta];
                            fiber_sq.leq_idx(l, d.reindex[w.pr2].apply(alpha))
                        })
                })
                .collect();
            assert!(oracle.contains(&witness.delta[&a]));
            assert_eq!(oracle.len(), witness.candidate_counts[&a]);
        }
    }

    #[test]
    fn existential_satisfies_frobenius_and_bc_pointwise() {
        let d = sample_doctrine(2);
        let rep = detect_structure(&d, StructureKind::Existential).unwrap();
        assert!(rep.holds);
        let w = rep.existential.unwrap();
        assert!(w.beck_chevalley);
        assert!(w.frobenius);
    }

    #[test]
    fn terminal_base_detectors_run() {
        // Degenerate base: all product machinery collapses. The 3-chain
        // fiber is Heyting but not Boolean.
        let base = Arc::new(FiniteCategory::terminal_category());
        let fiber = Arc::new(chain_poset(3));
        let d = Doctrine::new(
            base,
            vec![fiber.clone()],
            vec![crate::order::MonotoneMap::identity(&fiber)],
        );
        d.validate().unwrap();
        let rep = StructureReport::detect_all(&d);
        assert!(rep.holds(StructureKind::Primary));
        assert!(rep.holds(StructureKind::Heyting));
        assert!(!rep.holds(StructureKind::Boolean));
    }
}
