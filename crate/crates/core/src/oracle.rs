//! Brute-force referee: character values on the base group and exact inner
//! products, summed element by element over `A`.
//!
//! Every character considered here is either induced from `A` or a product
//! of two such characters, and those vanish off `A`. So for `chi = phi psi`
//! and any `theta`, `<chi, theta> = (1/|P|) sum_{a in A} chi(a) conj(theta(a))`
//! with `|P| = p^{p+1}`, and character values off `A` are never needed.

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::cyclotomic::{coeff, Coefficient, CyclotomicInt};
use crate::decomposition::{product_sums, CharacterId, Decomposition};
use crate::error::{Error, Result};
use crate::prime::Prime;
use crate::tuple::{residue_sum, OrbitRep, Tuple};

/// An element `(x_1, ..., x_p)` of the base group, in the same residue-vector form.
pub type BaseElement = Tuple;

pub const DEFAULT_ORACLE_CAP: u32 = 7;

/// `zeta^{sum_j t_j x_j}`.
pub fn linear_char_value<C: Coefficient>(t: &Tuple, a: &BaseElement) -> Result<CyclotomicInt<C>> {
    t.same_prime(a)?;
    Ok(CyclotomicInt::zeta_pow(t.p(), pairing(t.entries(), a.entries(), t.p().get()) as u64))
}

/// `rep^P (a) = sum_k zeta^{<rot_k(rep), a>}`.
pub fn induced_value_on_a<C: Coefficient>(rep: &OrbitRep, a: &BaseElement) -> Result<CyclotomicInt<C>> {
    rep.require_irreducible()?;
    let mut acc = CyclotomicInt::zero(rep.p());
    for rot in rep.tuple().rotations() {
        acc = acc.try_add(&linear_char_value(&rot, a)?)?;
    }
    Ok(acc)
}

/// Value of any irreducible of `P` at an element of `A`.
pub fn character_value_on_a<C: Coefficient>(theta: &CharacterId, a: &BaseElement) -> Result<CyclotomicInt<C>> {
    match theta {
        CharacterId::Induced(rep) => induced_value_on_a(rep, a),
        CharacterId::LinearExt { c, .. } => linear_char_value(&Tuple::constant(a.p(), *c), a),
    }
}

/// Kernel test on the centre: faithful iff `rep^P (x,...,x) != p` for every `x != 0`.
pub fn faithfulness_oracle(rep: &OrbitRep) -> Result<bool> {
    rep.require_irreducible()?;
    let p = rep.p();
    let degree = CyclotomicInt::<i64>::from_integer(p, p.get() as i64)?;
    for x in 1..p.get() {
        let z = Tuple::constant(p, x);
        if induced_value_on_a::<i64>(rep, &z)? == degree {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Iterates over all `p^p` elements of `A` in lexicographic order.
pub fn base_group_elements(p: Prime) -> impl Iterator<Item = BaseElement> {
    let n = p.as_usize();
    let order = p.base_order().unwrap_or(u64::MAX);
    (0..order).map(move |code| decode(p, n, code))
}

fn decode(p: Prime, n: usize, mut code: u64) -> Tuple {
    let m = p.get() as u64;
    let mut entries = vec![0u32; n];
    for slot in entries.iter_mut().rev() {
        *slot = (code % m) as u32;
        code /= m;
    }
    Tuple::new(p, entries).expect("decoded element is well formed")
}

#[inline]
fn pairing(t: &[u32], a: &[u32], p: u32) -> u32 {
    (t.iter().zip(a).map(|(&x, &y)| x as u64 * y as u64).sum::<u64>() % p as u64) as u32
}

/// Exact brute-force evaluation of multiplicities, for `p` up to a cap.
#[derive(Clone, Copy, Debug)]
pub struct Oracle {
    cap: u32,
}

impl Default for Oracle {
    fn default() -> Self {
        Oracle { cap: DEFAULT_ORACLE_CAP }
    }
}

impl Oracle {
    pub fn with_cap(cap: u32) -> Self {
        Oracle { cap }
    }

    pub fn cap(&self) -> u32 {
        self.cap
    }

    fn check_cap(&self, p: Prime) -> Result<u64> {
        match p.base_order() {
            Some(order) if p.get() <= self.cap => Ok(order),
            _ => Err(Error::OracleCap { p: p.get(), cap: self.cap }),
        }
    }

    /// `<phi psi, theta>`, summing ring products over every element of `A`.
    pub fn inner_product_over_a<C: Coefficient>(
        &self,
        phi: &OrbitRep,
        psi: &OrbitRep,
        theta: &CharacterId,
    ) -> Result<u64> {
        let p = phi.p();
        phi.tuple().same_prime(psi.tuple())?;
        phi.require_irreducible()?;
        psi.require_irreducible()?;
        if let CharacterId::Induced(rep) = theta {
            phi.tuple().same_prime(rep.tuple())?;
        }
        let order = self.check_cap(p)?;
        let n = p.as_usize();
        let total = (0..order)
            .into_par_iter()
            .map(|code| -> Result<CyclotomicInt<C>> {
                let a = decode(p, n, code);
                let chi = induced_value_on_a::<C>(phi, &a)?.try_mul(&induced_value_on_a(psi, &a)?)?;
                chi.try_mul(&character_value_on_a::<C>(theta, &a)?.conj())
            })
            .try_reduce(|| CyclotomicInt::zero(p), |x, y| x.try_add(&y))?;
        normalize(p, &total)
    }

    /// `<theta, theta>` over `A`; equals 1 for induced irreducibles.
    pub fn induced_norm<C: Coefficient>(&self, rep: &OrbitRep) -> Result<u64> {
        rep.require_irreducible()?;
        let p = rep.p();
        let order = self.check_cap(p)?;
        let n = p.as_usize();
        let total = (0..order)
            .into_par_iter()
            .map(|code| -> Result<CyclotomicInt<C>> {
                let v = induced_value_on_a::<C>(rep, &decode(p, n, code))?;
                v.try_mul(&v.conj())
            })
            .try_reduce(|| CyclotomicInt::zero(p), |x, y| x.try_add(&y))?;
        normalize(p, &total)
    }

    /// Decomposes `phi psi` purely from character sums over `A`.
    ///
    /// Candidates are the classes and constants met among the product sums.
    /// Completeness does not rest on that list: the norm `<phi psi, phi psi>`
    /// is computed in the same pass and must equal the sum of squared
    /// multiplicities found.
    pub fn oracle_decompose<C: Coefficient>(&self, phi: &OrbitRep, psi: &OrbitRep) -> Result<Decomposition> {
        let p = phi.p();
        let sums = product_sums(phi, psi)?;
        self.check_cap(p)?;

        let mut induced: Vec<OrbitRep> = Vec::new();
        let mut constants: Vec<u32> = Vec::new();
        for t in &sums {
            match t.constant_value() {
                Some(c) => constants.push(c),
                None => induced.push(t.canonical_rotation()),
            }
        }
        induced.sort();
        induced.dedup();
        constants.sort_unstable();
        constants.dedup();

        let sums = SumPass::new(phi, psi, &induced, &constants).run::<C>()?;

        let mut constituents = BTreeMap::new();
        let mut expected_norm = 0u64;
        for (rep, acc) in induced.iter().zip(&sums.induced) {
            let m = normalize(p, acc)?;
            if m > 0 {
                constituents.insert(CharacterId::Induced(rep.clone()), m);
                expected_norm += m * m;
            }
        }
        for (&c, acc) in constants.iter().zip(&sums.constants) {
            let m = normalize(p, acc)?;
            if m > 0 {
                for e in 0..p.get() {
                    constituents.insert(CharacterId::LinearExt { c, e }, m);
                }
                expected_norm += p.get() as u64 * m * m;
            }
        }
        let norm = normalize(p, &sums.norm)?;
        if norm != expected_norm {
            return Err(Error::Invariant(format!(
                "oracle norm {norm} but found constituents account for {expected_norm}"
            )));
        }
        Decomposition::new(p, constituents)
    }
}

/// Outcome of running random pairs through both decomposition routes.
#[derive(Clone, Debug)]
pub struct Campaign {
    pub p: Prime,
    pub trials: u64,
    pub agreed: u64,
    /// First pair whose two decompositions differ: (phi, psi, tuple calculus, oracle).
    pub first_disagreement: Option<(OrbitRep, OrbitRep, Decomposition, Decomposition)>,
}

impl Campaign {
    pub fn passed(&self) -> bool {
        self.first_disagreement.is_none() && self.agreed == self.trials
    }
}

/// Uniform non-constant tuple, by rejection.
pub fn random_irreducible_tuple<R: rand::Rng>(p: Prime, rng: &mut R) -> Tuple {
    loop {
        let entries = (0..p.as_usize()).map(|_| rng.gen_range(0..p.get())).collect();
        let t = Tuple::new(p, entries).expect("sampled tuple is well formed");
        if !t.is_constant() {
            return t;
        }
    }
}

/// Compares [`decompose`](crate::decomposition::decompose) with
/// [`Oracle::oracle_decompose`] on `trials` seeded random irreducible-inducing pairs.
pub fn equivalence_campaign(oracle: &Oracle, p: Prime, trials: u64, seed: u64) -> Result<Campaign> {
    use rand::SeedableRng;

    oracle.check_cap(p)?;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut agreed = 0;
    for _ in 0..trials {
        let phi = random_irreducible_tuple(p, &mut rng).canonical_rotation();
        let psi = random_irreducible_tuple(p, &mut rng).canonical_rotation();
        let calculus = crate::decomposition::decompose(&phi, &psi)?;
        let brute = oracle.oracle_decompose::<i64>(&phi, &psi)?;
        if calculus != brute {
            return Ok(Campaign {
                p,
                trials,
                agreed,
                first_disagreement: Some((phi, psi, calculus, brute)),
            });
        }
        agreed += 1;
    }
    Ok(Campaign {
        p,
        trials,
        agreed,
        first_disagreement: None,
    })
}

/// Divides an exact character sum by `|P| = p^{p+1}`; it must be a
/// non-negative rational integer divisible by `|P|`.
fn normalize<C: Coefficient>(p: Prime, total: &CyclotomicInt<C>) -> Result<u64> {
    let n = total
        .to_integer()
        .ok_or_else(|| Error::Invariant(format!("character sum {total} is not a rational integer")))?;
    let group_order = p
        .base_order()
        .and_then(|o| o.checked_mul(p.get() as u64))
        .ok_or(Error::Overflow)?;
    let (q, r) = n.div_rem(&coeff::<C>(group_order)?);
    if !r.is_zero() || q < C::zero() {
        return Err(Error::Invariant(format!(
            "character sum {n} is not a non-negative multiple of |P| = {group_order}"
        )));
    }
    q.to_u64().ok_or(Error::Overflow)
}

struct PassTotals<C> {
    induced: Vec<CyclotomicInt<C>>,
    constants: Vec<CyclotomicInt<C>>,
    norm: CyclotomicInt<C>,
}

/// One sweep over `A` accumulating `sum_a chi(a) conj(theta(a))` for every
/// candidate `theta`, plus `sum_a |chi(a)|^2`.
///
/// Pairings `<t, a>` are maintained incrementally as the odometer advances:
/// bumping coordinate `j` (with wraparound) adds `t_j` mod p.
struct SumPass {
    p: u32,
    /// Rotations of phi, then of psi, then of each induced candidate.
    terms: Vec<Vec<u32>>,
    constants: Vec<u32>,
    n_induced: usize,
}

/// Per-block raw counts of the powers `zeta^e`.
struct BlockCounts {
    induced: Vec<Vec<u64>>,
    constants: Vec<Vec<u64>>,
    norm: Vec<u64>,
}

impl SumPass {
    fn new(phi: &OrbitRep, psi: &OrbitRep, induced: &[OrbitRep], constants: &[u32]) -> Self {
        let mut terms = Vec::new();
        for rep in [phi, psi].into_iter().chain(induced) {
            terms.extend(rep.tuple().rotations().into_iter().map(Tuple::into_entries));
        }
        SumPass {
            p: phi.p().get(),
            terms,
            constants: constants.to_vec(),
            n_induced: induced.len(),
        }
    }

    fn run<C: Coefficient>(&self) -> Result<PassTotals<C>> {
        let n = self.p as usize;
        let prime = Prime::new(self.p as u64)?;
        // blocks fix the leading coordinates
        let fixed = n.min(2);
        let blocks = (self.p as u64).pow(fixed as u32);
        let block_len = (self.p as u64).pow((n - fixed) as u32);
        let p4 = (self.p as u64).pow(4);
        if block_len.checked_mul(p4).is_none() {
            return Err(Error::Overflow);
        }

        let to_cyc = |v: &[u64]| -> Result<CyclotomicInt<C>> {
            CyclotomicInt::from_coeffs(prime, v.iter().map(|&x| coeff::<C>(x)).collect::<Result<_>>()?)
        };
        let zero = || PassTotals {
            induced: vec![CyclotomicInt::zero(prime); self.n_induced],
            constants: vec![CyclotomicInt::zero(prime); self.constants.len()],
            norm: CyclotomicInt::zero(prime),
        };
        let add = |mut x: PassTotals<C>, y: PassTotals<C>| -> Result<PassTotals<C>> {
            for (a, b) in x.induced.iter_mut().zip(&y.induced) {
                *a = a.try_add(b)?;
            }
            for (a, b) in x.constants.iter_mut().zip(&y.constants) {
                *a = a.try_add(b)?;
            }
            x.norm = x.norm.try_add(&y.norm)?;
            Ok(x)
        };

        (0..blocks)
            .into_par_iter()
            .map(|block| -> Result<PassTotals<C>> {
                let counts = self.block(block, fixed);
                Ok(PassTotals {
                    induced: counts.induced.iter().map(|v| to_cyc(v)).collect::<Result<_>>()?,
                    constants: counts.constants.iter().map(|v| to_cyc(v)).collect::<Result<_>>()?,
                    norm: to_cyc(&counts.norm)?,
                })
            })
            .try_reduce(zero, add)
    }

    fn block(&self, block: u64, fixed: usize) -> BlockCounts {
        let p = self.p;
        let n = p as usize;
        let mut a = vec![0u32; n];
        let mut code = block;
        for slot in a[..fixed].iter_mut().rev() {
            *slot = (code % p as u64) as u32;
            code /= p as u64;
        }
        let mut exps: Vec<u32> = self.terms.iter().map(|t| pairing(t, &a, p)).collect();
        let mut total = residue_sum(&a, p);

        let mut out = BlockCounts {
            induced: vec![vec![0; n]; self.n_induced],
            constants: vec![vec![0; n]; self.constants.len()],
            norm: vec![0; n],
        };
        let mut f = vec![0u64; n];
        loop {
            f.iter_mut().for_each(|x| *x = 0);
            let (phi_exps, rest) = exps.split_at(n);
            let (psi_exps, cand_exps) = rest.split_at(n);
            for &x in phi_exps {
                for &y in psi_exps {
                    f[((x + y) % p) as usize] += 1;
                }
            }
            for (e1, &f1) in f.iter().enumerate() {
                if f1 == 0 {
                    continue;
                }
                for (e2, &f2) in f.iter().enumerate() {
                    out.norm[(e1 + n - e2) % n] += f1 * f2;
                }
            }
            for (acc, theta) in out.induced.iter_mut().zip(cand_exps.chunks_exact(n)) {
                for &u in theta {
                    let u = u as usize;
                    for (e, &fe) in f.iter().enumerate() {
                        acc[(e + n - u) % n] += fe;
                    }
                }
            }
            for (acc, &c) in out.constants.iter_mut().zip(&self.constants) {
                let u = ((c as u64 * total as u64) % p as u64) as usize;
                for (e, &fe) in f.iter().enumerate() {
                    acc[(e + n - u) % n] += fe;
                }
            }

            // advance the free coordinates, last one fastest
            let mut j = n;
            loop {
                if j == fixed {
                    return out;
                }
                j -= 1;
                a[j] += 1;
                for (exp, t) in exps.iter_mut().zip(&self.terms) {
                    *exp = (*exp + t[j]) % p;
                }
                total = (total + 1) % p;
                if a[j] == p {
                    a[j] = 0;
                } else {
                    break;
                }
            }
        }
    }
}
