//! Products of two induced irreducible characters of `P = C_p wr C_p`.
//!
//! Write `phi = alpha^P` and `psi = beta^P` for non-constant tuples `alpha`,
//! `beta`. The restriction of `phi * psi` to `A` is the multiset of the `p^2`
//! sums `rot_i(alpha) + rot_j(beta)`. By Frobenius reciprocity an induced
//! irreducible `tau^P` occurs with multiplicity equal to the number of times
//! `tau` itself occurs among these sums. A constant sum `(c, ..., c)` occurs
//! exactly `p` times and contributes each of the `p` linear characters lying
//! over it once.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::prime::Prime;
use crate::tuple::{least_rotation_start, OrbitRep, Tuple};

/// An irreducible character of `P`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum CharacterId {
    /// `rep^P`, of degree `p`; `rep` is canonical and non-constant.
    Induced(OrbitRep),
    /// The `e`-th linear character restricting to the constant tuple `(c, ..., c)`.
    LinearExt { c: u32, e: u32 },
}

impl CharacterId {
    pub fn degree(&self, p: Prime) -> u64 {
        match self {
            CharacterId::Induced(_) => p.get() as u64,
            CharacterId::LinearExt { .. } => 1,
        }
    }
}

impl fmt::Display for CharacterId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CharacterId::Induced(rep) => write!(f, "induced({rep})"),
            CharacterId::LinearExt { c, e } => write!(f, "linear(c={c}, e={e})"),
        }
    }
}

/// `phi * psi` written as a sum of irreducibles.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Decomposition {
    p: Prime,
    constituents: BTreeMap<CharacterId, u64>,
    degree_total: u64,
}

impl Decomposition {
    /// Checks multiplicities are positive and that the degrees add up to `p^2`.
    pub fn new(p: Prime, constituents: BTreeMap<CharacterId, u64>) -> Result<Self> {
        if let Some((id, _)) = constituents.iter().find(|(_, &m)| m == 0) {
            return Err(Error::Invariant(format!("zero multiplicity recorded for {id}")));
        }
        let degree_total = constituents.iter().map(|(id, m)| m * id.degree(p)).sum();
        let expected = (p.get() as u64).pow(2);
        if degree_total != expected {
            return Err(Error::Invariant(format!(
                "degree total {degree_total} != p^2 = {expected}"
            )));
        }
        Ok(Decomposition {
            p,
            constituents,
            degree_total,
        })
    }

    pub fn p(&self) -> Prime {
        self.p
    }

    pub fn constituents(&self) -> &BTreeMap<CharacterId, u64> {
        &self.constituents
    }

    pub fn multiplicity(&self, id: &CharacterId) -> u64 {
        self.constituents.get(id).copied().unwrap_or(0)
    }

    pub fn distinct_count(&self) -> usize {
        self.constituents.len()
    }

    pub fn degree_total(&self) -> u64 {
        self.degree_total
    }

    /// `sum of multiplicity^2`, the norm `<phi psi, phi psi>`.
    pub fn norm(&self) -> u64 {
        self.constituents.values().map(|m| m * m).sum()
    }

    pub fn induced_classes(&self) -> impl Iterator<Item = (&OrbitRep, u64)> {
        self.constituents.iter().filter_map(|(id, &m)| match id {
            CharacterId::Induced(rep) => Some((rep, m)),
            CharacterId::LinearExt { .. } => None,
        })
    }
}

#[derive(Serialize)]
struct ConstituentRecord<'a> {
    kind: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    rep: Option<&'a OrbitRep>,
    #[serde(skip_serializing_if = "Option::is_none")]
    c: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    e: Option<u32>,
    degree: u64,
    multiplicity: u64,
}

impl Serialize for Decomposition {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let records: Vec<ConstituentRecord<'_>> = self
            .constituents
            .iter()
            .map(|(id, &multiplicity)| match id {
                CharacterId::Induced(rep) => ConstituentRecord {
                    kind: "induced",
                    rep: Some(rep),
                    c: None,
                    e: None,
                    degree: self.p.get() as u64,
                    multiplicity,
                },
                CharacterId::LinearExt { c, e } => ConstituentRecord {
                    kind: "linear",
                    rep: None,
                    c: Some(*c),
                    e: Some(*e),
                    degree: 1,
                    multiplicity,
                },
            })
            .collect();
        let mut st = s.serialize_struct("Decomposition", 5)?;
        st.serialize_field("p", &self.p)?;
        st.serialize_field("constituents", &records)?;
        st.serialize_field("distinct_count", &self.distinct_count())?;
        st.serialize_field("degree_total", &self.degree_total)?;
        st.serialize_field("expected_degree_total", &(self.p.get() as u64).pow(2))?;
        st.end()
    }
}

fn check_pair(phi: &OrbitRep, psi: &OrbitRep) -> Result<()> {
    phi.tuple().same_prime(psi.tuple())?;
    phi.require_irreducible()?;
    psi.require_irreducible()
}

/// The `p^2` tuples `rot_i(phi) + rot_j(psi)`, `i`-major.
pub fn product_sums(phi: &OrbitRep, psi: &OrbitRep) -> Result<Vec<Tuple>> {
    check_pair(phi, psi)?;
    let left = phi.tuple().rotations();
    let right = psi.tuple().rotations();
    let mut out = Vec::with_capacity(left.len() * right.len());
    for a in &left {
        for b in &right {
            out.push(a.add(b)?);
        }
    }
    Ok(out)
}

/// Full decomposition, grouping the `p^2` sums by rotation class.
pub fn decompose(phi: &OrbitRep, psi: &OrbitRep) -> Result<Decomposition> {
    let p = phi.p();
    let sums = product_sums(phi, psi)?;
    let mut exact: HashMap<Tuple, u64> = HashMap::new();
    for t in sums {
        *exact.entry(t).or_insert(0) += 1;
    }

    let mut constituents = BTreeMap::new();
    let mut class_counts: HashMap<OrbitRep, u64> = HashMap::new();
    for (t, m) in exact {
        if let Some(c) = t.constant_value() {
            if m != p.get() as u64 {
                return Err(Error::Invariant(format!(
                    "constant sum {t} occurs {m} times, expected {p}"
                )));
            }
            for e in 0..p.get() {
                constituents.insert(CharacterId::LinearExt { c, e }, 1);
            }
            continue;
        }
        let class = t.canonical_rotation();
        match class_counts.get(&class) {
            Some(&prev) if prev != m => {
                return Err(Error::Invariant(format!(
                    "class {class} has members with counts {prev} and {m}"
                )));
            }
            Some(_) => {}
            None => {
                class_counts.insert(class, m);
            }
        }
    }
    for (class, m) in class_counts {
        constituents.insert(CharacterId::Induced(class), m);
    }
    Decomposition::new(p, constituents)
}

/// Number of distinct irreducible constituents of `phi * psi`.
pub fn count_distinct(phi: &OrbitRep, psi: &OrbitRep) -> Result<usize> {
    check_pair(phi, psi)?;
    Ok(DistinctCounter::new(phi.p()).count(phi.tuple().entries(), psi.tuple().entries()))
}

/// Reusable scratch space for [`count_distinct`] on the search hot path.
///
/// Uses `rot_i(a) + rot_j(b) = rot_i(a + rot_{j-i}(b))`: the `p^2` sums fall
/// into the classes of the `p` tuples `a + rot_d(b)`, so only `p`
/// canonicalizations are needed. A class occurring for `k` values of `d`
/// has multiplicity `k`; a constant occurs for at most one `d`.
pub struct DistinctCounter {
    p: u32,
    sum: Vec<u32>,
    packed: Vec<u64>,
    wide: Vec<Vec<u32>>,
    constants: Vec<u32>,
    packable: bool,
}

impl DistinctCounter {
    pub fn new(p: Prime) -> Self {
        let n = p.as_usize();
        DistinctCounter {
            p: p.get(),
            sum: vec![0; n],
            packed: Vec::with_capacity(n),
            wide: Vec::new(),
            constants: Vec::with_capacity(n),
            packable: p.base_order().is_some(),
        }
    }

    /// Counts distinct constituents for two non-constant tuples of length `p`.
    /// Inputs need not be canonical; validation is the caller's job.
    pub fn count(&mut self, a: &[u32], b: &[u32]) -> usize {
        let n = self.p as usize;
        debug_assert!(a.len() == n && b.len() == n);
        self.packed.clear();
        self.wide.clear();
        self.constants.clear();
        for d in 0..n {
            for j in 0..n {
                let bj = b[(j + n - d) % n];
                let s = a[j] + bj;
                self.sum[j] = if s >= self.p { s - self.p } else { s };
            }
            let first = self.sum[0];
            if self.sum.iter().all(|&x| x == first) {
                self.constants.push(first);
                continue;
            }
            let start = least_rotation_start(&self.sum);
            if self.packable {
                let mut key = 0u64;
                for m in 0..n {
                    key = key * self.p as u64 + self.sum[(start + m) % n] as u64;
                }
                self.packed.push(key);
            } else {
                self.wide
                    .push((0..n).map(|m| self.sum[(start + m) % n]).collect());
            }
        }
        self.packed.sort_unstable();
        self.packed.dedup();
        self.wide.sort_unstable();
        self.wide.dedup();
        self.constants.sort_unstable();
        self.constants.dedup();
        self.packed.len() + self.wide.len() + n * self.constants.len()
    }
}

/// Everything checked while reproducing the `p - 1` counterexample.
#[derive(Clone, Debug, Serialize)]
pub struct TheoremReport {
    pub p: Prime,
    pub phi: Tuple,
    pub psi: Tuple,
    pub phi_faithful: bool,
    pub psi_faithful: bool,
    /// `psi + e_k` for `k = 0..p`, in the listed order `(2,1,0,..), (1,2,0,..), (1,1,1,0,..), ...`.
    pub listed_sums: Vec<Tuple>,
    pub listed_classes: Vec<OrbitRep>,
    /// Index pairs `(i, j)`, `i < j`, of listed sums in the same class.
    pub collisions: Vec<(usize, usize)>,
    pub count_distinct: usize,
    pub expected_count: usize,
    pub decomposition: Decomposition,
    pub passed: bool,
}

/// Reproduces the counterexample for `p >= 5`: the characters induced from
/// `(1,0,...,0)` and `(1,1,0,...,0)` are faithful and their product has
/// exactly `p - 1` distinct irreducible constituents.
pub fn verify_theorem(p: Prime) -> Result<TheoremReport> {
    if p.get() < 5 {
        return Err(Error::TheoremPrime(p.get()));
    }
    let n = p.as_usize();
    let phi = Tuple::unit(p, 0);
    let psi = phi.add(&Tuple::unit(p, 1))?;
    let ensure = |ok: bool, what: String| -> Result<()> {
        if ok {
            Ok(())
        } else {
            Err(Error::Invariant(what))
        }
    };

    let phi_faithful = phi.is_faithful_inducing()?;
    let psi_faithful = psi.is_faithful_inducing()?;
    ensure(phi_faithful && psi_faithful, "theorem pair is not faithful".into())?;

    // phi restricted to A is the sum of the unit tuples e_0, ..., e_{p-1}
    let listed_sums: Vec<Tuple> = (0..n)
        .map(|k| psi.add(&Tuple::unit(p, k)))
        .collect::<Result<_>>()?;
    let mut distinct_listed = listed_sums.clone();
    distinct_listed.sort();
    distinct_listed.dedup();
    ensure(
        distinct_listed.len() == n,
        format!("expected {n} distinct listed sums, got {}", distinct_listed.len()),
    )?;
    let listed_classes: Vec<OrbitRep> = listed_sums.iter().map(Tuple::canonical_rotation).collect();

    let mut collisions = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if listed_classes[i] == listed_classes[j] {
                collisions.push((i, j));
            }
        }
    }
    ensure(
        collisions == vec![(2, n - 1)],
        format!("expected the single collision (2, {}), got {collisions:?}", n - 1),
    )?;

    let phi_rep = phi.canonical_rotation();
    let psi_rep = psi.canonical_rotation();
    let mut from_sums: Vec<OrbitRep> = product_sums(&phi_rep, &psi_rep)?
        .iter()
        .map(Tuple::canonical_rotation)
        .collect();
    from_sums.sort();
    from_sums.dedup();
    let mut from_listed = listed_classes.clone();
    from_listed.sort();
    from_listed.dedup();
    ensure(
        from_sums == from_listed,
        "listed sums do not exhaust the classes of the restricted product".into(),
    )?;

    let decomposition = decompose(&phi_rep, &psi_rep)?;
    let count = count_distinct(&phi_rep, &psi_rep)?;
    let expected_count = n - 1;
    ensure(
        count == expected_count && decomposition.distinct_count() == expected_count,
        format!(
            "expected {expected_count} distinct constituents, counted {count} (decomposition: {})",
            decomposition.distinct_count()
        ),
    )?;
    ensure(
        decomposition
            .constituents()
            .keys()
            .all(|id| matches!(id, CharacterId::Induced(_))),
        "theorem product has a linear constituent".into(),
    )?;

    Ok(TheoremReport {
        p,
        phi,
        psi,
        phi_faithful,
        psi_faithful,
        listed_sums,
        listed_classes,
        collisions,
        count_distinct: count,
        expected_count,
        decomposition,
        passed: true,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn prime(n: u64) -> Prime {
        Prime::new(n).unwrap()
    }

    fn rep(s: &str) -> OrbitRep {
        OrbitRep::parse(s).unwrap()
    }

    fn theorem_pair(p: Prime) -> (OrbitRep, OrbitRep) {
        let phi = Tuple::unit(p, 0);
        let psi = phi.add(&Tuple::unit(p, 1)).unwrap();
        (phi.canonical_rotation(), psi.canonical_rotation())
    }

    #[test]
    fn product_sums_of_theorem_pair() {
        let (phi, psi) = theorem_pair(prime(5));
        let sums = product_sums(&phi, &psi).unwrap();
        assert_eq!(sums.len(), 25);
        let mut classes: Vec<OrbitRep> = sums.iter().map(Tuple::canonical_rotation).collect();
        classes.sort();
        classes.dedup();
        let mut listed: Vec<OrbitRep> = ["2,1,0,0,0", "1,2,0,0,0", "1,1,1,0,0", "1,1,0,1,0", "1,1,0,0,1"]
            .iter()
            .map(|s| rep(s))
            .collect();
        listed.sort();
        listed.dedup();
        assert_eq!(classes, listed);
        assert_eq!(classes.len(), 4);
    }

    #[test]
    fn product_sums_weight_one_squared() {
        // brute force: e_i + e_j is 2e_i on the diagonal, two separated 1's otherwise
        let w = rep("0,0,0,0,1");
        let sums = product_sums(&w, &w).unwrap();
        let doubled = sums.iter().filter(|t| t.entries().contains(&2)).count();
        let split = sums
            .iter()
            .filter(|t| t.entries().iter().filter(|&&e| e == 1).count() == 2)
            .count();
        assert_eq!((doubled, split), (5, 20));
    }

    #[test]
    fn zero_tuple_appears_p_times_against_the_inverse_class() {
        for s in ["0,0,1,2,4", "0,0,0,1,3", "0,1,2,3,3"] {
            let phi = rep(s);
            let psi = phi.tuple().neg().canonical_rotation();
            let zeros = product_sums(&phi, &psi)
                .unwrap()
                .iter()
                .filter(|t| t.entries().iter().all(|&e| e == 0))
                .count();
            assert_eq!(zeros, 5, "{s}");
        }
    }

    #[test]
    fn theorem_pair_decomposition() {
        let (phi, psi) = theorem_pair(prime(5));
        let d = decompose(&phi, &psi).unwrap();
        assert_eq!(d.distinct_count(), 4);
        assert_eq!(d.degree_total(), 25);
        assert!(d.constituents().keys().all(|k| matches!(k, CharacterId::Induced(_))));
        assert_eq!(d.multiplicity(&CharacterId::Induced(rep("1,1,1,0,0"))), 2);
        assert_eq!(d.multiplicity(&CharacterId::Induced(rep("2,1,0,0,0"))), 1);
    }

    #[test]
    fn inverse_pair_has_linear_constituents() {
        let phi = rep("1,0,0,0,0");
        let psi = rep("4,0,0,0,0");
        let d = decompose(&phi, &psi).unwrap();
        for e in 0..5 {
            assert_eq!(d.multiplicity(&CharacterId::LinearExt { c: 0, e }), 1);
        }
        assert_eq!(d.degree_total(), 25);
        // e_i + 4e_j with i != j gives one class per distance j - i
        assert_eq!(d.induced_classes().count(), 4);
        assert_eq!(d.distinct_count(), 9);
    }

    #[test]
    fn arithmetic_progression_hits_several_constants() {
        // (0,1,2) minus any rotation of itself is constant, so against its
        // negation every one of the p^2 sums is constant
        let phi = rep("0,1,2");
        let psi = phi.tuple().neg().canonical_rotation();
        let d = decompose(&phi, &psi).unwrap();
        let consts: Vec<u32> = d
            .constituents()
            .keys()
            .filter_map(|k| match k {
                CharacterId::LinearExt { c, e: 0 } => Some(*c),
                _ => None,
            })
            .collect();
        assert_eq!(consts, vec![0, 1, 2]);
        assert_eq!(d.distinct_count(), 9);
        assert_eq!(count_distinct(&phi, &psi).unwrap(), d.distinct_count());
    }

    #[test]
    fn count_distinct_theorem_pairs() {
        for (n, expected) in [(5, 4), (7, 6), (11, 10), (13, 12), (17, 16)] {
            let (phi, psi) = theorem_pair(prime(n));
            assert_eq!(count_distinct(&phi, &psi).unwrap(), expected, "p = {n}");
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        let c = rep("2,2,2,2,2");
        let ok = rep("1,0,0,0,0");
        assert!(matches!(decompose(&c, &ok), Err(Error::ConstantTuple(_))));
        assert!(matches!(count_distinct(&ok, &c), Err(Error::ConstantTuple(_))));
        assert!(matches!(
            product_sums(&ok, &rep("1,0,0")),
            Err(Error::PrimeMismatch { .. })
        ));
    }

    #[test]
    fn verify_theorem_small_primes() {
        let r = verify_theorem(prime(5)).unwrap();
        assert!(r.passed);
        assert_eq!(r.count_distinct, 4);
        assert_eq!(r.listed_sums[2].to_string(), "1,1,1,0,0");
        assert_eq!(r.listed_sums[4].to_string(), "1,1,0,0,1");
        assert_eq!(r.collisions, vec![(2, 4)]);
        assert_eq!(verify_theorem(prime(7)).unwrap().count_distinct, 6);
        assert!(matches!(verify_theorem(prime(3)), Err(Error::TheoremPrime(3))));
        assert!(matches!(verify_theorem(prime(2)), Err(Error::TheoremPrime(2))));
    }

    #[test]
    fn counting_path_matches_full_decomposition_exhaustively_p3() {
        let p = prime(3);
        let mut reps: Vec<OrbitRep> = (0..27u32)
            .map(|code| {
                Tuple::new(p, vec![code % 3, code / 3 % 3, code / 9]).unwrap().canonical_rotation()
            })
            .filter(|r| !r.is_constant())
            .collect();
        reps.sort();
        reps.dedup();
        assert_eq!(reps.len(), 8);
        for a in &reps {
            for b in &reps {
                let d = decompose(a, b).unwrap();
                assert_eq!(count_distinct(a, b).unwrap(), d.distinct_count());
            }
        }
    }
}
