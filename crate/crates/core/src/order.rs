//! Finite posets and monotone maps.
//!
//! Every fiber of a doctrine lives here. Elements are opaque string ids;
//! the order is a fully tabulated relation, validated on construction.
//! Lattice-theoretic structure (meets, joins, Heyting implication,
//! pseudo-complements) is *detected* by exhaustive greatest-lower-bound /
//! least-upper-bound search and returned as certificates whose witness
//! tables have been checked against their defining universal properties.
//! Adjoints of monotone maps are computed by Galois search.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OrderError {
    #[error("poset has no elements")]
    EmptyPoset,
    #[error("duplicate element id `{0}`")]
    DuplicateElement(String),
    #[error("unknown element id `{0}`")]
    UnknownElement(String),
    #[error("reflexivity violation: ({0}, {0}) missing")]
    ReflexivityViolation(String),
    #[error("antisymmetry violation: {0} <= {1} and {1} <= {0} but {0} != {1}")]
    AntisymmetryViolation(String, String),
    #[error("transitivity violation: {0} <= {1} and {1} <= {2} but ({0}, {2}) missing")]
    TransitivityViolation(String, String, String),
    #[error("monotone map is not total: no image for `{0}`")]
    MissingImage(String),
    #[error("monotonicity violation: {0} <= {1} but images are not ordered")]
    MonotonicityViolation(String, String),
    #[error("map composition mismatch: target of first differs from source of second")]
    CompositionMismatch,
    #[error("operation requires finite meets, which this poset lacks")]
    MeetsRequired,
    #[error("not a Heyting algebra: no relative pseudo-complement for ({0}, {1})")]
    NotAHeytingAlgebra(String, String),
    #[error("downset/quotient isomorphism failed at `{0}`")]
    QuotientIsoFailure(String),
    #[error("supplied negation table is not *-autonomous: {0}")]
    NotStarAutonomous(String),
}

/// A finite partially ordered set with opaque string element ids.
///
/// The relation is stored as a dense `n x n` boolean matrix; construction
/// verifies reflexivity, antisymmetry and transitivity.
#[derive(Clone, PartialEq, Eq)]
pub struct FinitePoset {
    elems: Vec<String>,
    index: HashMap<String, usize>,
    leq: Vec<bool>,
}

impl fmt::Debug for FinitePoset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FinitePoset({} elems: {:?})", self.elems.len(), self.elems)
    }
}

impl FinitePoset {
    /// Validates a poset given explicitly as elements plus the full `leq`
    /// relation. Duplicate pairs are deduplicated silently; a missing
    /// reflexive pair, a symmetric pair of distinct elements, or a missing
    /// transitive composite is rejected with the offending elements named.
    pub fn validate<S: AsRef<str>>(
        elements: &[S],
        leq_pairs: &[(S, S)],
    ) -> Result<Self, OrderError> {
        if elements.is_empty() {
            return Err(OrderError::EmptyPoset);
        }
        let mut elems = Vec::with_capacity(elements.len());
        let mut index = HashMap::new();
        for e in elements {
            let e = e.as_ref().to_string();
            if index.insert(e.clone(), elems.len()).is_some() {
                return Err(OrderError::DuplicateElement(e));
            }
            elems.push(e);
        }
        let n = elems.len();
        let mut leq = vec![false; n * n];
        for (a, b) in leq_pairs {
            let ia = *index
                .get(a.as_ref())
                .ok_or_else(|| OrderError::UnknownElement(a.as_ref().to_string()))?;
            let ib = *index
                .get(b.as_ref())
                .ok_or_else(|| OrderError::UnknownElement(b.as_ref().to_string()))?;
            leq[ia * n + ib] = true;
        }
        let p = FinitePoset { elems, index, leq };
        p.check_axioms()?;
        Ok(p)
    }

    /// Builds a poset from covering pairs, taking the reflexive-transitive
    /// closure first. This is the loader used by the CLI spec format.
    pub fn from_covers<S: AsRef<str>>(
        elements: &[S],
        covers: &[(S, S)],
    ) -> Result<Self, OrderError> {
        if elements.is_empty() {
            return Err(OrderError::EmptyPoset);
        }
        let mut elems = Vec::with_capacity(elements.len());
        let mut index = HashMap::new();
        for e in elements {
            let e = e.as_ref().to_string();
            if index.insert(e.clone(), elems.len()).is_some() {
                return Err(OrderError::DuplicateElement(e));
            }
            elems.push(e);
        }
        let n = elems.len();
        let mut leq = vec![false; n * n];
        for i in 0..n {
            leq[i * n + i] = true;
        }
        for (a, b) in covers {
            let ia = *index
                .get(a.as_ref())
                .ok_or_else(|| OrderError::UnknownElement(a.as_ref().to_string()))?;
            let ib = *index
                .get(b.as_ref())
                .ok_or_else(|| OrderError::UnknownElement(b.as_ref().to_string()))?;
            leq[ia * n + ib] = true;
        }
        // Floyd-Warshall style transitive closure.
        for k in 0..n {
            for i in 0..n {
                if leq[i * n + k] {
                    for j in 0..n {
                        if leq[k * n + j] {
                            leq[i * n + j] = true;
                        }
                    }
                }
            }
        }
        let p = FinitePoset { elems, index, leq };
        p.check_axioms()?;
        Ok(p)
    }

    fn check_axioms(&self) -> Result<(), OrderError> {
        let n = self.elems.len();
        for i in 0..n {
            if !self.leq[i * n + i] {
                return Err(OrderError::ReflexivityViolation(self.elems[i].clone()));
            }
        }
        for i in 0..n {
            for j in 0..n {
                if i != j && self.leq[i * n + j] && self.leq[j * n + i] {
                    return Err(OrderError::AntisymmetryViolation(
                        self.elems[i].clone(),
                        self.elems[j].clone(),
                    ));
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                if !self.leq[i * n + j] {
                    continue;
                }
                for k in 0..n {
                    if self.leq[j * n + k] && !self.leq[i * n + k] {
                        return Err(OrderError::TransitivityViolation(
                            self.elems[i].clone(),
                            self.elems[j].clone(),
                            self.elems[k].clone(),
                        ));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.elems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elems.is_empty()
    }

    pub fn elements(&self) -> &[String] {
        &self.elems
    }

    pub fn element(&self, i: usize) -> &str {
        &self.elems[i]
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn leq_idx(&self, a: usize, b: usize) -> bool {
        self.leq[a * self.elems.len() + b]
    }

    pub fn leq(&self, a: &str, b: &str) -> Option<bool> {
        Some(self.leq_idx(self.index_of(a)?, self.index_of(b)?))
    }

    /// Greatest lower bound of `{a, b}`, if it exists.
    pub fn glb(&self, a: usize, b: usize) -> Option<usize> {
        let n = self.len();
        let lower: Vec<usize> = (0..n)
            .filter(|&c| self.leq_idx(c, a) && self.leq_idx(c, b))
            .collect();
        lower
            .iter()
            .copied()
            .find(|&m| lower.iter().all(|&c| self.leq_idx(c, m)))
    }

    /// Least upper bound of `{a, b}`, if it exists.
    pub fn lub(&self, a: usize, b: usize) -> Option<usize> {
        let n = self.len();
        let upper: Vec<usize> = (0..n)
            .filter(|&c| self.leq_idx(a, c) && self.leq_idx(b, c))
            .collect();
        upper
            .iter()
            .copied()
            .find(|&j| upper.iter().all(|&c| self.leq_idx(j, c)))
    }

    /// Greatest element, if it exists.
    pub fn top(&self) -> Option<usize> {
        (0..self.len()).find(|&t| (0..self.len()).all(|a| self.leq_idx(a, t)))
    }

    /// Least element, if it exists.
    pub fn bottom(&self) -> Option<usize> {
        (0..self.len()).find(|&b| (0..self.len()).all(|a| self.leq_idx(b, a)))
    }

    /// Minimum of an arbitrary subset (an element of the subset below all
    /// others), if it exists.
    pub fn min_of(&self, subset: &[usize]) -> Option<usize> {
        subset
            .iter()
            .copied()
            .find(|&m| subset.iter().all(|&c| self.leq_idx(m, c)))
    }

    /// Maximum of an arbitrary subset, if it exists.
    pub fn max_of(&self, subset: &[usize]) -> Option<usize> {
        subset
            .iter()
            .copied()
            .find(|&m| subset.iter().all(|&c| self.leq_idx(c, m)))
    }

    /// The induced subposet on the given element indices. Element ids are
    /// kept; `back` maps new indices to old ones.
    pub fn induced(&self, keep: &[usize]) -> (FinitePoset, Vec<usize>) {
        let elems: Vec<String> = keep.iter().map(|&i| self.elems[i].clone()).collect();
        let m = keep.len();
        let mut index = HashMap::new();
        for (i, e) in elems.iter().enumerate() {
            index.insert(e.clone(), i);
        }
        let mut leq = vec![false; m * m];
        for i in 0..m {
            for j in 0..m {
                leq[i * m + j] = self.leq_idx(keep[i], keep[j]);
            }
        }
        (FinitePoset { elems, index, leq }, keep.to_vec())
    }
}

/// A monotone function between finite posets, tabulated on indices.
#[derive(Clone, PartialEq)]
pub struct MonotoneMap {
    source: Arc<FinitePoset>,
    target: Arc<FinitePoset>,
    table: Vec<usize>,
}

impl fmt::Debug for MonotoneMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let pairs: Vec<String> = self
            .table
            .iter()
            .enumerate()
            .map(|(i, &j)| format!("{} -> {}", self.source.element(i), self.target.element(j)))
            .collect();
        write!(f, "MonotoneMap[{}]", pairs.join(", "))
    }
}

impl MonotoneMap {
    /// Validates totality and monotonicity of an id-level table.
    pub fn validate(
        source: Arc<FinitePoset>,
        target: Arc<FinitePoset>,
        table: &HashMap<String, String>,
    ) -> Result<Self, OrderError> {
        let mut idx_table = Vec::with_capacity(source.len());
        for e in source.elements() {
            let img = table
                .get(e)
                .ok_or_else(|| OrderError::MissingImage(e.clone()))?;
            let j = target
                .index_of(img)
                .ok_or_else(|| OrderError::UnknownElement(img.clone()))?;
            idx_table.push(j);
        }
        Self::from_indices(source, target, idx_table)
    }

    /// Builds a map from an index table, verifying monotonicity.
    pub fn from_indices(
        source: Arc<FinitePoset>,
        target: Arc<FinitePoset>,
        table: Vec<usize>,
    ) -> Result<Self, OrderError> {
        assert_eq!(table.len(), source.len(), "table length mismatch");
        for a in 0..source.len() {
            for b in 0..source.len() {
                if source.leq_idx(a, b) && !target.leq_idx(table[a], table[b]) {
                    return Err(OrderError::MonotonicityViolation(
                        source.element(a).to_string(),
                        source.element(b).to_string(),
                    ));
                }
            }
        }
        Ok(MonotoneMap { source, target, table })
    }

    pub fn identity(p: &Arc<FinitePoset>) -> Self {
        MonotoneMap {
            source: p.clone(),
            target: p.clone(),
            table: (0..p.len()).collect(),
        }
    }

    pub fn source(&self) -> &Arc<FinitePoset> {
        &self.source
    }

    pub fn target(&self) -> &Arc<FinitePoset> {
        &self.target
    }

    pub fn apply(&self, i: usize) -> usize {
        self.table[i]
    }

    pub fn table(&self) -> &[usize] {
        &self.table
    }

    /// `self` after `other`: the composite `self . other`.
    pub fn compose(&self, other: &MonotoneMap) -> Result<MonotoneMap, OrderError> {
        if other.target.as_ref() != self.source.as_ref() {
            return Err(OrderError::CompositionMismatch);
        }
        Ok(MonotoneMap {
            source: other.source.clone(),
            target: self.target.clone(),
            table: other.table.iter().map(|&i| self.table[i]).collect(),
        })
    }

    pub fn is_identity(&self) -> bool {
        self.source.as_ref() == self.target.as_ref()
            && self.table.iter().enumerate().all(|(i, &j)| i == j)
    }
}

/// Witnesses for meets/joins/top/bottom, each verified against its
/// universal property before the certificate is returned. A `None` entry
/// means the structure is absent, which is data, not an error.
#[derive(Clone, Debug)]
pub struct LatticeCertificate {
    pub meet: Option<Vec<usize>>,
    pub join: Option<Vec<usize>>,
    pub top: Option<usize>,
    pub bottom: Option<usize>,
}

impl LatticeCertificate {
    pub fn has_meets(&self) -> bool {
        self.meet.is_some() && self.top.is_some()
    }

    pub fn meet_of(&self, n: usize, a: usize, b: usize) -> Option<usize> {
        self.meet.as_ref().map(|t| t[a * n + b])
    }

    pub fn join_of(&self, n: usize, a: usize, b: usize) -> Option<usize> {
        self.join.as_ref().map(|t| t[a * n + b])
    }
}

/// Detects meets, joins, top and bottom by exhaustive glb/lub search.
pub fn lattice_ops(p: &FinitePoset) -> LatticeCertificate {
    let n = p.len();
    let mut meet = Some(vec![0usize; n * n]);
    let mut join = Some(vec![0usize; n * n]);
    for a in 0..n {
        for b in 0..n {
            match (&mut meet, p.glb(a, b)) {
                (Some(t), Some(m)) => t[a * n + b] = m,
                (m @ Some(_), None) => *m = None,
                (None, _) => {}
            }
            match (&mut join, p.lub(a, b)) {
                (Some(t), Some(j)) => t[a * n + b] = j,
                (j @ Some(_), None) => *j = None,
                (None, _) => {}
            }
        }
    }
    LatticeCertificate {
        meet,
        join,
        top: p.top(),
        bottom: p.bottom(),
    }
}

/// Heyting structure: the implication table satisfying
/// `a /\ c <= b  iff  c <= (a -> b)`, the Boolean flag (double negation is
/// the identity), and the pseudo-complement table when a bottom exists.
#[derive(Clone, Debug)]
pub struct HeytingCertificate {
    pub implication: Vec<usize>,
    pub boolean: bool,
    pub pseudo_complement: Option<Vec<usize>>,
}

impl HeytingCertificate {
    pub fn imp(&self, n: usize, a: usize, b: usize) -> usize {
        self.implication[a * n + b]
    }
}

/// Computes the Heyting certificate of a poset with meets and top.
///
/// The implication `a -> b` is found as `max { c | a /\ c <= b }`; absence
/// for some pair is an error naming the pair. The Boolean flag tests
/// `not not a = a` with `not a := a -> bottom`; when there is no bottom the
/// flag is false and no pseudo-complements are reported.
pub fn heyting_ops(p: &FinitePoset, cert: &LatticeCertificate) -> Result<HeytingCertificate, OrderError> {
    if !cert.has_meets() {
        return Err(OrderError::MeetsRequired);
    }
    let n = p.len();
    let meet = cert.meet.as_ref().unwrap();
    let mut implication = vec![0usize; n * n];
    for a in 0..n {
        for b in 0..n {
            let candidates: Vec<usize> = (0..n).filter(|&c| p.leq_idx(meet[a * n + c], b)).collect();
            let m = p.max_of(&candidates).ok_or_else(|| {
                OrderError::NotAHeytingAlgebra(p.element(a).to_string(), p.element(b).to_string())
            })?;
            implication[a * n + b] = m;
        }
    }
    // Verify adjunction for every triple before certifying.
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                let curried = p.leq_idx(c, implication[a * n + b]);
                let meets = p.leq_idx(meet[a * n + c], b);
                if curried != meets {
                    return Err(OrderError::NotAHeytingAlgebra(
                        p.element(a).to_string(),
                        p.element(b).to_string(),
                    ));
                }
            }
        }
    }
    let (boolean, pseudo_complement) = match cert.bottom {
        Some(bot) => {
            let neg: Vec<usize> = (0..n).map(|a| implication[a * n + bot]).collect();
            let boolean = (0..n).all(|a| neg[neg[a]] == a);
            // In a Heyting algebra with bottom, a -> bot is exactly
            // max { b | a /\ b = bot }; verify the max property anyway.
            let mut ok = true;
            for a in 0..n {
                if meet[a * n + neg[a]] != bot {
                    ok = false;
                }
                for b in 0..n {
                    if meet[a * n + b] == bot && !p.leq_idx(b, neg[a]) {
                        ok = false;
                    }
                }
            }
            (boolean, if ok { Some(neg) } else { None })
        }
        None => (false, None),
    };
    Ok(HeytingCertificate {
        implication,
        boolean,
        pseudo_complement,
    })
}

/// Pseudo-complement table `not a = max { b | a /\ b = bottom }`, computed
/// directly (independent of Heyting structure). `None` if some element has
/// no pseudo-complement or there is no bottom.
pub fn pseudo_complements(p: &FinitePoset, cert: &LatticeCertificate) -> Option<Vec<usize>> {
    let meet = cert.meet.as_ref()?;
    let bot = cert.bottom?;
    let n = p.len();
    let mut neg = Vec::with_capacity(n);
    for a in 0..n {
        let candidates: Vec<usize> = (0..n).filter(|&b| meet[a * n + b] == bot).collect();
        neg.push(p.max_of(&candidates)?);
    }
    Some(neg)
}

/// Checks a supplied negation table for the *-autonomy laws:
/// `not not a = a` and `a /\ b <= not c  iff  a <= not (b /\ c)`.
pub fn check_star_autonomous(
    p: &FinitePoset,
    cert: &LatticeCertificate,
    neg: &[usize],
) -> Result<(), OrderError> {
    let n = p.len();
    let meet = cert
        .meet
        .as_ref()
        .ok_or(OrderError::MeetsRequired)?;
    if neg.len() != n {
        return Err(OrderError::NotStarAutonomous(
            "negation table has wrong length".to_string(),
        ));
    }
    for a in 0..n {
        if neg[neg[a]] != a {
            return Err(OrderError::NotStarAutonomous(format!(
                "double negation fails at {}",
                p.element(a)
            )));
        }
    }
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                let lhs = p.leq_idx(meet[a * n + b], neg[c]);
                let rhs = p.leq_idx(a, neg[meet[b * n + c]]);
                if lhs != rhs {
                    return Err(OrderError::NotStarAutonomous(format!(
                        "shift law fails at ({}, {}, {})",
                        p.element(a),
                        p.element(b),
                        p.element(c)
                    )));
                }
            }
        }
    }
    Ok(())
}

/// Left and right adjoints of a monotone map, when they exist.
#[derive(Clone, Debug)]
pub struct AdjointPair {
    pub left: Option<MonotoneMap>,
    pub right: Option<MonotoneMap>,
}

/// Computes adjoints by Galois search: the left adjoint at `b` is
/// `min { a | b <= f(a) }` and the right adjoint is `max { a | f(a) <= b }`,
/// each required to exist for every `b`. Returned maps are verified
/// monotone and adjoint before being reported.
pub fn adjoints(f: &MonotoneMap) -> AdjointPair {
    let src = f.source();
    let tgt = f.target();
    let left = galois_search(tgt, src, |b, a| tgt.leq_idx(b, f.apply(a)), true)
        .and_then(|table| MonotoneMap::from_indices(tgt.clone(), src.clone(), table).ok())
        .filter(|l| {
            // L(b) <= a  iff  b <= f(a)
            (0..tgt.len()).all(|b| {
                (0..src.len()).all(|a| src.leq_idx(l.apply(b), a) == tgt.leq_idx(b, f.apply(a)))
            })
        });
    let right = galois_search(tgt, src, |b, a| tgt.leq_idx(f.apply(a), b), false)
        .and_then(|table| MonotoneMap::from_indices(tgt.clone(), src.clone(), table).ok())
        .filter(|r| {
            // a <= R(b)  iff  f(a) <= b
            (0..tgt.len()).all(|b| {
                (0..src.len()).all(|a| src.leq_idx(a, r.apply(b)) == tgt.leq_idx(f.apply(a), b))
            })
        });
    AdjointPair { left, right }
}

fn galois_search(
    from: &Arc<FinitePoset>,
    to: &Arc<FinitePoset>,
    included: impl Fn(usize, usize) -> bool,
    minimum: bool,
) -> Option<Vec<usize>> {
    let mut table = Vec::with_capacity(from.len());
    for b in 0..from.len() {
        let set: Vec<usize> = (0..to.len()).filter(|&a| included(b, a)).collect();
        let pick = if minimum { to.min_of(&set) } else { to.max_of(&set) };
        table.push(pick?);
    }
    Some(table)
}

/// The principal downset of `x`, the quotient presentation of the same
/// fiber, and the isomorphism between them.
#[derive(Clone, Debug)]
pub struct DownsetQuotient {
    pub downset: Arc<FinitePoset>,
    pub quotient: Arc<FinitePoset>,
    /// downset -> quotient: alpha |-> [alpha]
    pub to_quotient: MonotoneMap,
    /// quotient -> downset: [alpha] |-> x /\ alpha
    pub to_downset: MonotoneMap,
}

/// Builds `{ a | a <= x }` with the induced order, and the quotient of the
/// whole poset under `[a] <= [b]  iff  x /\ a <= b`, with the two
/// directions of the isomorphism verified mutually inverse and monotone.
pub fn downset_and_quotient(
    p: &Arc<FinitePoset>,
    cert: &LatticeCertificate,
    x: usize,
) -> Result<DownsetQuotient, OrderError> {
    if !cert.has_meets() {
        return Err(OrderError::MeetsRequired);
    }
    let n = p.len();
    let meet = cert.meet.as_ref().unwrap();
    let keep: Vec<usize> = (0..n).filter(|&a| p.leq_idx(a, x)).collect();
    let (down, back) = p.induced(&keep);
    let down = Arc::new(down);
    let down_index: HashMap<usize, usize> =
        back.iter().enumerate().map(|(new, &old)| (old, new)).collect();

    // Quotient classes: a ~ b iff x/\a <= b and x/\b <= a. The canonical
    // representative of [a] is x /\ a, which lies in the downset.
    let rep: Vec<usize> = (0..n).map(|a| meet[x * n + a]).collect();
    let mut class_reps: Vec<usize> = Vec::new();
    for a in 0..n {
        if !class_reps.contains(&rep[a]) {
            class_reps.push(rep[a]);
        }
    }
    class_reps.sort_unstable();
    let class_elems: Vec<String> = class_reps
        .iter()
        .map(|&r| format!("[{}]", p.element(r)))
        .collect();
    let m = class_reps.len();
    let mut qleq = Vec::with_capacity(m * m);
    for &a in &class_reps {
        for &b in &class_reps {
            // [a] <= [b] iff x /\ a <= b; a is already x /\ something.
            qleq.push(p.leq_idx(meet[x * n + a], b));
        }
    }
    let mut qindex = HashMap::new();
    for (i, e) in class_elems.iter().enumerate() {
        qindex.insert(e.clone(), i);
    }
    let quotient = Arc::new(FinitePoset {
        elems: class_elems,
        index: qindex,
        leq: qleq,
    });
    quotient.check_axioms()?;

    let class_of = |a: usize| class_reps.iter().position(|&r| r == rep[a]).unwrap();
    let to_quotient = MonotoneMap::from_indices(
        down.clone(),
        quotient.clone(),
        back.iter().map(|&old| class_of(old)).collect(),
    )?;
    let to_downset = MonotoneMap::from_indices(
        quotient.clone(),
        down.clone(),
        class_reps.iter().map(|&r| down_index[&r]).collect(),
    )?;

    // The two maps must compose to identities elementwise.
    for i in 0..down.len() {
        if to_downset.apply(to_quotient.apply(i)) != i {
            return Err(OrderError::QuotientIsoFailure(down.element(i).to_string()));
        }
    }
    for j in 0..quotient.len() {
        if to_quotient.apply(to_downset.apply(j)) != j {
            return Err(OrderError::QuotientIsoFailure(quotient.element(j).to_string()));
        }
    }
    Ok(DownsetQuotient {
        downset: down,
        quotient,
        to_quotient,
        to_downset,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain(n: usize) -> FinitePoset {
        let elems: Vec<String> = (0..n).map(|i| format!("c{i}")).collect();
        let covers: Vec<(String, String)> = (0..n.saturating_sub(1))
            .map(|i| (format!("c{i}"), format!("c{}", i + 1)))
            .collect();
        FinitePoset::from_covers(&elems, &covers).unwrap()
    }

    /// Free Boolean algebra on one atom, as the four subsets of a two
    /// element set of truth assignments.
    fn free_ba_1() -> FinitePoset {
        let elems = ["bot", "p", "np", "top"];
        // Brute-force enumeration of subset inclusion over {m1, m2} with
        // p = {m1}, np = {m2}.
        let sets: [(&str, u8); 4] = [("bot", 0b00), ("p", 0b01), ("np", 0b10), ("top", 0b11)];
        let mut pairs = Vec::new();
        for (a, sa) in sets {
            for (b, sb) in sets {
                if sa & sb == sa {
                    pairs.push((a, b));
                }
            }
        }
        assert_eq!(pairs.len(), 9);
        FinitePoset::validate(&elems, &pairs).unwrap()
    }

    #[test]
    fn singleton_is_valid() {
        let p = FinitePoset::validate(&["a"], &[("a", "a")]).unwrap();
        assert_eq!(p.len(), 1);
        assert_eq!(p.leq("a", "a"), Some(true));
    }

    #[test]
    fn missing_transitive_closure_is_rejected() {
        let err = FinitePoset::validate(
            &["0", "1", "2"],
            &[("0", "0"), ("1", "1"), ("2", "2"), ("0", "1"), ("1", "2")],
        )
        .unwrap_err();
        assert_eq!(
            err,
            OrderError::TransitivityViolation("0".into(), "1".into(), "2".into())
        );
    }

    #[test]
    fn free_boolean_algebra_on_one_atom_validates() {
        let p = free_ba_1();
        assert_eq!(p.len(), 4);
        let cert = lattice_ops(&p);
        assert!(cert.has_meets());
        assert!(cert.join.is_some());
    }

    #[test]
    fn duplicate_pairs_deduplicate_silently() {
        let p = FinitePoset::validate(&["a", "b"], &[("a", "a"), ("b", "b"), ("a", "b"), ("a", "b")])
            .unwrap();
        assert_eq!(p.leq("a", "b"), Some(true));
    }

    #[test]
    fn two_chain_has_all_structure() {
        let p = chain(2);
        let cert = lattice_ops(&p);
        assert!(cert.meet.is_some());
        assert!(cert.join.is_some());
        assert_eq!(cert.top, p.index_of("c1"));
        assert_eq!(cert.bottom, p.index_of("c0"));
    }

    #[test]
    fn diamond_meet_and_join() {
        let p = FinitePoset::from_covers(
            &["bot", "a", "b", "top"],
            &[("bot", "a"), ("bot", "b"), ("a", "top"), ("b", "top")],
        )
        .unwrap();
        let cert = lattice_ops(&p);
        let n = p.len();
        let a = p.index_of("a").unwrap();
        let b = p.index_of("b").unwrap();
        assert_eq!(cert.meet_of(n, a, b), p.index_of("bot"));
        assert_eq!(cert.join_of(n, a, b), p.index_of("top"));
    }

    #[test]
    fn antichain_has_no_meet_certificate() {
        let p = FinitePoset::validate(&["a", "b"], &[("a", "a"), ("b", "b")]).unwrap();
        let cert = lattice_ops(&p);
        assert!(cert.meet.is_none());
        assert!(cert.join.is_none());
        assert!(cert.top.is_none());
    }

    #[test]
    fn free_ba_is_boolean() {
        let p = free_ba_1();
        let cert = lattice_ops(&p);
        let h = heyting_ops(&p, &cert).unwrap();
        assert!(h.boolean);
        assert!(h.pseudo_complement.is_some());
    }

    #[test]
    fn three_chain_is_heyting_not_boolean() {
        let p = chain(3);
        let cert = lattice_ops(&p);
        let h = heyting_ops(&p, &cert).unwrap();
        assert!(!h.boolean);
        let neg = h.pseudo_complement.as_ref().unwrap();
        let half = p.index_of("c1").unwrap();
        let zero = p.index_of("c0").unwrap();
        let one = p.index_of("c2").unwrap();
        // not 1/2 = max { b | 1/2 /\ b = 0 } = 0, and not 0 = 1.
        assert_eq!(neg[half], zero);
        assert_eq!(neg[zero], one);
        assert_eq!(neg[neg[half]], one);
    }

    #[test]
    fn heyting_meet_implication_identity() {
        // ((x /\ a) -> (x /\ b)) /\ x = x /\ (a -> b) in any Heyting fiber.
        for p in [free_ba_1(), chain(3), chain(4)] {
            let n = p.len();
            let cert = lattice_ops(&p);
            let meet = cert.meet.as_ref().unwrap();
            let h = heyting_ops(&p, &cert).unwrap();
            for x in 0..n {
                for a in 0..n {
                    for b in 0..n {
                        let lhs = meet[h.imp(n, meet[x * n + a], meet[x * n + b]) * n + x];
                        let rhs = meet[x * n + h.imp(n, a, b)];
                        assert_eq!(lhs, rhs);
                    }
                }
            }
        }
    }

    #[test]
    fn identity_adjoints_are_identity() {
        let p = Arc::new(free_ba_1());
        let id = MonotoneMap::identity(&p);
        let adj = adjoints(&id);
        assert!(adj.left.as_ref().unwrap().is_identity());
        assert!(adj.right.as_ref().unwrap().is_identity());
    }

    #[test]
    fn diagonal_adjoints_are_join_and_meet() {
        // Diagonal of the 2-chain into its square under componentwise order.
        let c = Arc::new(chain(2));
        let sq = Arc::new(
            FinitePoset::from_covers(
                &["00", "01", "10", "11"],
                &[("00", "01"), ("00", "10"), ("01", "11"), ("10", "11")],
            )
            .unwrap(),
        );
        let mut table = HashMap::new();
        table.insert("c0".to_string(), "00".to_string());
        table.insert("c1".to_string(), "11".to_string());
        let diag = MonotoneMap::validate(c.clone(), sq.clone(), &table).unwrap();
        let adj = adjoints(&diag);
        let left = adj.left.unwrap();
        let right = adj.right.unwrap();
        // Left adjoint is join of the two components, right adjoint is meet.
        let idx = |s: &str| sq.index_of(s).unwrap();
        let c0 = c.index_of("c0").unwrap();
        let c1 = c.index_of("c1").unwrap();
        assert_eq!(left.apply(idx("00")), c0);
        assert_eq!(left.apply(idx("01")), c1);
        assert_eq!(left.apply(idx("10")), c1);
        assert_eq!(left.apply(idx("11")), c1);
        assert_eq!(right.apply(idx("00")), c0);
        assert_eq!(right.apply(idx("01")), c0);
        assert_eq!(right.apply(idx("10")), c0);
        assert_eq!(right.apply(idx("11")), c1);
    }

    #[test]
    fn constant_top_map_adjoints_by_brute_force() {
        // f : 1 -> 2-chain picking the top. Brute force: the left adjoint
        // is the unique map (L(b) <= x iff b <= top, always), while a
        // right adjoint would need f(x) <= bottom iff x <= R(bottom),
        // i.e. top <= bottom — so none exists.
        let single = Arc::new(FinitePoset::validate(&["x"], &[("x", "x")]).unwrap());
        let two = Arc::new(chain(2));
        let mut table = HashMap::new();
        table.insert("x".to_string(), "c1".to_string());
        let f = MonotoneMap::validate(single.clone(), two.clone(), &table).unwrap();
        let adj = adjoints(&f);
        let left = adj.left.unwrap();
        assert_eq!(left.apply(0), 0);
        assert_eq!(left.apply(1), 0);
        assert!(adj.right.is_none());
        // The dual picture for the constant-bottom map.
        let mut table = HashMap::new();
        table.insert("x".to_string(), "c0".to_string());
        let g = MonotoneMap::validate(single, two, &table).unwrap();
        let adj = adjoints(&g);
        assert!(adj.left.is_none());
        assert!(adj.right.is_some());
    }

    #[test]
    fn adjoint_triple_law() {
        // f . L . f = f and L . f . L = L pointwise, on a sample of maps.
        let c2 = Arc::new(chain(2));
        let c3 = Arc::new(chain(3));
        for t0 in 0..3usize {
            for t1 in t0..3 {
                let f =
                    MonotoneMap::from_indices(c2.clone(), c3.clone(), vec![t0, t1]).unwrap();
                if let Some(l) = adjoints(&f).left {
                    let flf = f.compose(&l).unwrap().compose(&f).unwrap();
                    let lfl = l.compose(&f).unwrap().compose(&l).unwrap();
                    assert_eq!(flf.table(), f.table());
                    assert_eq!(lfl.table(), l.table());
                }
            }
        }
    }

    #[test]
    fn downset_at_top_is_whole_poset() {
        let p = Arc::new(free_ba_1());
        let cert = lattice_ops(&p);
        let top = cert.top.unwrap();
        let dq = downset_and_quotient(&p, &cert, top).unwrap();
        assert_eq!(dq.downset.len(), p.len());
        assert_eq!(dq.quotient.len(), p.len());
        assert!(dq.to_quotient.compose(&dq.to_downset).unwrap().is_identity());
    }

    #[test]
    fn downset_at_bottom_collapses() {
        let p = Arc::new(free_ba_1());
        let cert = lattice_ops(&p);
        let bot = cert.bottom.unwrap();
        let dq = downset_and_quotient(&p, &cert, bot).unwrap();
        assert_eq!(dq.downset.len(), 1);
        assert_eq!(dq.quotient.len(), 1);
    }

    #[test]
    fn downset_in_free_ba_on_two_atoms() {
        // 16-element algebra as subsets of the four assignments; x = p.
        let elems: Vec<String> = (0..16u32).map(|m| format!("s{m}")).collect();
        let mut pairs = Vec::new();
        for a in 0..16u32 {
            for b in 0..16u32 {
                if a & b == a {
                    pairs.push((format!("s{a}"), format!("s{b}")));
                }
            }
        }
        let p = Arc::new(FinitePoset::validate(&elems, &pairs).unwrap());
        let cert = lattice_ops(&p);
        // p = assignments where the first atom holds: {m1, m3} = 0b1010.
        let x = p.index_of("s10").unwrap();
        let dq = downset_and_quotient(&p, &cert, x).unwrap();
        assert_eq!(dq.downset.len(), 4);
        assert_eq!(dq.quotient.len(), 4);
    }

    #[test]
    fn meets_required_for_downset() {
        let p = Arc::new(FinitePoset::validate(&["a", "b"], &[("a", "a"), ("b", "b")]).unwrap());
        let cert = lattice_ops(&p);
        assert_eq!(
            downset_and_quotient(&p, &cert, 0).unwrap_err(),
            OrderError::MeetsRequired
        );
    }

    #[test]
    fn boolean_flag_agrees_with_complement_search() {
        for p in [free_ba_1(), chain(2), chain(3)] {
            let n = p.len();
            let cert = lattice_ops(&p);
            let h = heyting_ops(&p, &cert).unwrap();
            let meet = cert.meet.as_ref().unwrap();
            let join = cert.join.as_ref().unwrap();
            let bot = cert.bottom.unwrap();
            let top = cert.top.unwrap();
            let complemented = (0..n).all(|a| {
                (0..n).any(|b| meet[a * n + b] == bot && join[a * n + b] == top)
            });
            assert_eq!(h.boolean, complemented);
        }
    }

    #[test]
    fn star_autonomous_check_on_boolean_negation() {
        let p = free_ba_1();
        let cert = lattice_ops(&p);
        let h = heyting_ops(&p, &cert).unwrap();
        let neg = h.pseudo_complement.unwrap();
        check_star_autonomous(&p, &cert, &neg).unwrap();
    }

    #[test]
    fn star_autonomous_rejects_identity_negation_on_chain() {
        let p = chain(2);
        let cert = lattice_ops(&p);
        let neg = vec![0usize, 1usize];
        assert!(check_star_autonomous(&p, &cert, &neg).is_err());
    }
}
