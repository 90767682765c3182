//! Euler classes of characters `A → C_p` and the restriction checks built on them.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::golden::FglCache;
use crate::groupcoh::{inv_mod_p, pullback, AbelianPGroup, CohRing, GroupHom, RingElem};

/// A homomorphism `A → C_p`, given by its values `m_i ∈ F_p` on generators.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Character {
    group: AbelianPGroup,
    values: Vec<u32>,
}

impl Character {
    pub fn new(group: &AbelianPGroup, values: Vec<u32>) -> Result<Self> {
        if values.len() != group.rank() || values.iter().any(|&m| m >= group.p()) {
            return Err(Error::InvalidHom(format!("character values {values:?} do not fit {group}")));
        }
        Ok(Character { group: group.clone(), values })
    }

    pub fn group(&self) -> &AbelianPGroup {
        &self.group
    }

    pub fn values(&self) -> &[u32] {
        &self.values
    }

    pub fn is_trivial(&self) -> bool {
        self.values.iter().all(|&m| m == 0)
    }

    /// All nontrivial characters, in lexicographic order of their values.
    pub fn all_nontrivial(group: &AbelianPGroup) -> Vec<Character> {
        let p = group.p();
        let r = group.rank();
        let total = (p as u64).pow(r as u32);
        (1..total)
            .map(|mut idx| {
                let mut v = vec![0u32; r];
                for j in (0..r).rev() {
                    v[j] = (idx % p as u64) as u32;
                    idx /= p as u64;
                }
                Character { group: group.clone(), values: v }
            })
            .collect()
    }

    /// `m ∘ α`.
    pub fn scaled(&self, m: u32) -> Character {
        let p = self.group.p();
        Character { group: self.group.clone(), values: self.values.iter().map(|&x| x * m % p).collect() }
    }

    /// The lexicographically least member of the `C_p^×`-orbit and the `m`
    /// with `self = m ∘ rep`.
    pub fn orbit_rep(&self) -> (Character, u32) {
        let p = self.group.p();
        match self.values.iter().find(|&&x| x != 0) {
            None => (self.clone(), 1),
            Some(&lead) => (self.scaled(inv_mod_p(lead as u64, p as u64) as u32), lead),
        }
    }

    pub fn is_orbit_rep(&self) -> bool {
        self.values.iter().find(|&&x| x != 0) == Some(&1)
    }

    /// The character as a homomorphism onto `C_p`.
    pub fn as_hom(&self) -> GroupHom {
        let cp = AbelianPGroup::elementary(self.group.p(), 1);
        GroupHom::new(self.group.clone(), cp, vec![self.values.iter().map(|&m| m as i64).collect()])
            .expect("characters factor through A/pA")
    }

    /// `α ∘ f` for `f: A' → A`.
    pub fn compose(&self, f: &GroupHom) -> Result<Character> {
        if f.target() != &self.group {
            return Err(Error::InvalidHom("character and homomorphism do not compose".into()));
        }
        let p = self.group.p() as u64;
        let values = (0..f.source().rank())
            .map(|j| {
                let s: u64 = (0..self.group.rank())
                    .map(|i| {
                        // coordinate i of f(g'_j), read in C_{p^{k_i}} and pushed to C_p
                        let x = f.matrix()[i][j] % self.group.factor_order(i);
                        self.values[i] as u64 * (x % p) % p
                    })
                    .sum();
                (s % p) as u32
            })
            .collect();
        Character::new(f.source(), values)
    }
}

/// `e(α) = Σ^F_i [m_i p^{k_i - 1}](y_i)`.
pub fn euler_of_char(ring: &CohRing, alpha: &Character) -> Result<RingElem> {
    if alpha.group() != ring.group() {
        return Err(Error::InvalidHom("character of a different group".into()));
    }
    let p = alpha.group().p() as i64;
    let terms: Vec<RingElem> = alpha
        .values()
        .iter()
        .enumerate()
        .filter(|(_, &m)| m != 0)
        .map(|(i, &m)| ring.m_series_of_gen(i, m as i64 * p.pow(alpha.group().exps()[i] - 1)))
        .collect();
    Ok(ring.formal_sum(&terms))
}

/// `e(A)`, `ē(A)` and the complementary factor with `e(A) = ē(A) · complement`.
#[derive(Clone, Debug)]
pub struct EulerClasses {
    pub total: RingElem,
    pub reduced: RingElem,
    pub complement: RingElem,
    pub characters: Vec<Character>,
    pub per_character: Vec<RingElem>,
}

impl EulerClasses {
    pub fn num_characters(&self) -> usize {
        self.characters.len()
    }

    pub fn num_orbits(&self) -> usize {
        self.characters.iter().filter(|c| c.is_orbit_rep()).count()
    }

    /// `e(α)` for a nontrivial character.
    pub fn of(&self, alpha: &Character) -> Option<&RingElem> {
        self.characters.iter().position(|c| c == alpha).map(|i| &self.per_character[i])
    }
}

pub fn euler_classes(ring: &CohRing) -> Result<EulerClasses> {
    let characters = Character::all_nontrivial(ring.group());
    let per_character: Vec<RingElem> =
        characters.par_iter().map(|a| euler_of_char(ring, a)).collect::<Result<_>>()?;
    let mut reduced = ring.one();
    let mut complement = ring.one();
    for (a, e) in characters.iter().zip(&per_character) {
        if a.is_orbit_rep() {
            reduced = ring.mul(&reduced, e);
        } else {
            complement = ring.mul(&complement, e);
        }
    }
    let total = ring.mul(&reduced, &complement);
    Ok(EulerClasses { total, reduced, complement, characters, per_character })
}

pub fn total_euler(ring: &CohRing) -> Result<RingElem> {
    Ok(euler_classes(ring)?.total)
}

pub fn reduced_euler(ring: &CohRing) -> Result<RingElem> {
    Ok(euler_classes(ring)?.reduced)
}

/// The kernel of a nontrivial character with explicit generators.
#[derive(Clone, Debug, Serialize)]
pub struct IndexPSubgroup {
    pub character: Character,
    pub subgroup: AbelianPGroup,
    pub inclusion: GroupHom,
}

/// The kernel of `α`. Pivot on a nonzero value of least exponent `k_j`; the
/// kernel is generated by `g_i - (m_i/m_j) g_j` for `i ≠ j` and `p g_j`.
pub fn kernel_of(alpha: &Character) -> Result<IndexPSubgroup> {
    if alpha.is_trivial() {
        return Err(Error::InvalidHom("the trivial character has no proper kernel".into()));
    }
    let a = alpha.group();
    let p = a.p() as u64;
    let m = alpha.values();
    let pivot = (0..a.rank())
        .filter(|&i| m[i] != 0)
        .min_by_key(|&i| (a.exps()[i], i))
        .expect("nontrivial");
    let inv = inv_mod_p(m[pivot] as u64, p);
    let mut exps = Vec::new();
    let mut cols: Vec<Vec<i64>> = Vec::new();
    for i in 0..a.rank() {
        let mut col = vec![0i64; a.rank()];
        if i == pivot {
            if a.exps()[i] == 1 {
                continue;
            }
            col[i] = p as i64;
            exps.push(a.exps()[i] - 1);
        } else {
            col[i] = 1;
            let c = m[i] as u64 * inv % p;
            col[pivot] = -(c as i64);
            exps.push(a.exps()[i]);
        }
        cols.push(col);
    }
    let subgroup = AbelianPGroup::new(a.p(), exps)?;
    let matrix = (0..a.rank()).map(|i| cols.iter().map(|c| c[i]).collect()).collect();
    let inclusion = GroupHom::new(subgroup.clone(), a.clone(), matrix)?;
    Ok(IndexPSubgroup { character: alpha.clone(), subgroup, inclusion })
}

/// One kernel per orbit: scalar multiples share it.
pub fn index_p_subgroups(group: &AbelianPGroup) -> Result<Vec<IndexPSubgroup>> {
    Character::all_nontrivial(group).iter().filter(|c| c.is_orbit_rep()).map(kernel_of).collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct RestrictionCheck {
    pub kernel_of: Vec<u32>,
    pub subgroup: String,
    /// Columns: images of the subgroup generators in `A`.
    pub generators: Vec<Vec<u64>>,
    pub total_vanishes: bool,
    pub reduced_vanishes: bool,
    pub character_kills_subgroup: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct RestrictionReport {
    pub group: String,
    pub checks: Vec<RestrictionCheck>,
    /// Restriction along the identity is nonzero.
    pub control_nonzero: bool,
    /// Whether theory predicts a nonzero `e(A)`: rank at most the height.
    pub control_expected: bool,
}

impl RestrictionReport {
    pub fn holds(&self) -> bool {
        (self.control_nonzero || !self.control_expected)
            && self
                .checks
                .iter()
                .all(|c| c.total_vanishes && c.reduced_vanishes && c.character_kills_subgroup)
    }

    pub fn offending(&self) -> Vec<&str> {
        self.checks
            .iter()
            .filter(|c| !(c.total_vanishes && c.reduced_vanishes))
            .map(|c| c.subgroup.as_str())
            .collect()
    }
}

/// Restricts `e(A)` and `ē(A)` to every index-p subgroup.
pub fn verify_restrictions_vanish(ring: &CohRing, cache: &FglCache) -> Result<RestrictionReport> {
    let classes = euler_classes(ring)?;
    let subs = index_p_subgroups(ring.group())?;
    let degree = ring.fgl().degree();
    let checks = subs
        .par_iter()
        .map(|s| {
            let sub_ring = CohRing::build(&s.subgroup, ring.params(), cache, degree)?;
            let map = pullback(&s.inclusion, ring, &sub_ring)?;
            let kills = s.character.compose(&s.inclusion)?.is_trivial();
            let generators = (0..s.subgroup.rank())
                .map(|j| s.inclusion.matrix().iter().map(|row| row[j]).collect())
                .collect();
            Ok(RestrictionCheck {
                kernel_of: s.character.values().to_vec(),
                subgroup: s.subgroup.to_string(),
                generators,
                total_vanishes: map.apply(&classes.total).is_zero(),
                reduced_vanishes: map.apply(&classes.reduced).is_zero(),
                character_kills_subgroup: kills,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let id = GroupHom::identity(ring.group());
    let control = pullback(&id, ring, ring)?.apply(&classes.total);
    Ok(RestrictionReport { group: ring.group().to_string(), checks, control_nonzero: !control.is_zero(),
        control_expected: ring.group().rank() <= ring.params().n as usize,
    })
}

/// Witnesses that `[m](y)` and `y` divide each other in `E^*(BC_p)`.
#[derive(Clone, Debug, Serialize)]
pub struct UnitDivisibility {
    pub m: u32,
    pub s: u32,
    /// `[s]([m](y)) = y`.
    pub composition_holds: bool,
    /// `y = [m](y) · h([m](y))` with `h(x) = [s](x)/x`.
    pub witness_holds: bool,
    /// `[m](y) = y · h'(y)` with `h'(x) = [m](x)/x`.
    pub converse_holds: bool,
    /// Leading coefficients of `h`.
    pub witness: Vec<String>,
}

impl UnitDivisibility {
    pub fn holds(&self) -> bool {
        self.composition_holds && self.witness_holds && self.converse_holds
    }
}

/// `h(x) = [k](x)/x` as a polynomial in the ring's variable.
pub fn quotient_by_x(ring: &CohRing, k: i64) -> Result<Vec<crate::coeff::CoeffElem>> {
    let s = ring.fgl().m_series(k);
    Ok(s.div_y_pow(1)?.coeffs().to_vec())
}

pub fn verify_unit_divisibility(ring: &CohRing, m: u32) -> Result<UnitDivisibility> {
    let g = ring.group();
    if g.rank() != 1 || g.exps()[0] != 1 {
        return Err(Error::InvalidGroup("unit divisibility is checked on C_p".into()));
    }
    let p = g.p();
    if m == 0 || m >= p {
        return Err(Error::Config(format!("m must lie in 1..{p}")));
    }
    let s = inv_mod_p(m as u64, p as u64) as u32;
    let y = ring.gen(0);
    let z = ring.m_series_of_gen(0, m as i64);
    let composition_holds = ring.m_series_at(s as i64, &z) == y;
    let h = quotient_by_x(ring, s as i64)?;
    let witness_holds = ring.mul(&z, &ring.eval_poly(&h, &z)) == y;
    let h2 = quotient_by_x(ring, m as i64)?;
    let converse_holds = ring.mul(&y, &ring.eval_poly(&h2, &y)) == z;
    Ok(UnitDivisibility {
        m,
        s,
        composition_holds,
        witness_holds,
        converse_holds,
        witness: h.iter().take(4).map(|c| c.to_string()).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::{CoeffElem, CoeffParams};

    fn ring(p: u32, n: u32, group: &str, cache: &FglCache) -> CohRing {
        let params = CoeffParams::new(p, n, 8, 2).unwrap();
        CohRing::build(&AbelianPGroup::parse(p, group).unwrap(), params, cache, 0).unwrap()
    }

    #[test]
    fn character_counts() {
        let c3 = AbelianPGroup::parse(3, "3").unwrap();
        let all = Character::all_nontrivial(&c3);
        assert_eq!(all.len(), 2);
        assert_eq!(all.iter().filter(|c| c.is_orbit_rep()).count(), 1);
        let c33 = AbelianPGroup::parse(3, "3,3").unwrap();
        let all = Character::all_nontrivial(&c33);
        assert_eq!(all.len(), 8);
        assert_eq!(all.iter().filter(|c| c.is_orbit_rep()).count(), 4);
        for c in &all {
            let (rep, m) = c.orbit_rep();
            assert!(rep.is_orbit_rep());
            assert_eq!(&rep.scaled(m), c);
        }
    }

    #[test]
    fn identity_character_gives_generator() {
        let cache = FglCache::new(None);
        for (p, n) in [(2, 1), (3, 1), (2, 2)] {
            let r = ring(p, n, &p.to_string(), &cache);
            let id = Character::new(r.group(), vec![1]).unwrap();
            assert_eq!(euler_of_char(&r, &id).unwrap(), r.gen(0));
        }
        let r = ring(2, 1, "2", &cache);
        let ec = euler_classes(&r).unwrap();
        assert_eq!(ec.total, r.gen(0));
        assert_eq!(ec.reduced, r.gen(0));
        let triv = Character::new(r.group(), vec![0]).unwrap();
        assert!(euler_of_char(&r, &triv).unwrap().is_zero());
    }

    #[test]
    fn diagonal_character_is_formal_sum() {
        use crate::series::{MultiAlg, MultiSeries};
        let cache = FglCache::new(None);
        let r = ring(2, 1, "2,2", &cache);
        let pr = r.params();
        let a = Character::new(r.group(), vec![1, 1]).unwrap();
        let e = euler_of_char(&r, &a).unwrap();
        // expand F(y1, y2) as a bivariate series capped at the nilpotency indices, then reduce
        let caps: Vec<u16> = r.factors().iter().map(|f| f.nilpotency as u16).collect();
        let alg = MultiAlg { params: pr, caps: caps.clone(), total_cap: None };
        let y1 = MultiSeries::var(pr, caps.clone(), None, 0);
        let y2 = MultiSeries::var(pr, caps, None, 1);
        let f = r.fgl().eval(&alg, &y1, &y2);
        assert_eq!(e, r.normal_form(&f).unwrap());
        assert_eq!(e.coords()[r.index_of(&[1, 0]).unwrap()], CoeffElem::one(pr));
        assert_eq!(e.coords()[r.index_of(&[0, 1]).unwrap()], CoeffElem::one(pr));
    }

    #[test]
    fn orbit_members_are_m_series() {
        let cache = FglCache::new(None);
        let r = ring(3, 1, "3,3", &cache);
        let ec = euler_classes(&r).unwrap();
        for (c, e) in ec.characters.iter().zip(&ec.per_character) {
            let (rep, m) = c.orbit_rep();
            assert_eq!(*e, r.m_series_at(m as i64, ec.of(&rep).unwrap()));
        }
        assert_eq!(r.mul(&ec.reduced, &ec.complement), ec.total);
    }

    #[test]
    fn kernels_have_index_p() {
        for (p, g) in [(2, "4,2"), (3, "9,3"), (2, "2,2,2")] {
            let a = AbelianPGroup::parse(p, g).unwrap();
            for s in index_p_subgroups(&a).unwrap() {
                assert_eq!(s.subgroup.order() * p as u128, a.order());
                assert!(s.character.compose(&s.inclusion).unwrap().is_trivial());
                // injective: the only element mapping to zero is zero
                let sub = &s.subgroup;
                let mut count = 0;
                let total = sub.order() as u64;
                for mut idx in 0..total {
                    let mut x = vec![0u64; sub.rank()];
                    for j in (0..sub.rank()).rev() {
                        x[j] = idx % sub.factor_order(j);
                        idx /= sub.factor_order(j);
                    }
                    if s.inclusion.apply(&x).iter().all(|&c| c == 0) {
                        count += 1;
                    }
                }
                assert_eq!(count, 1, "{g} kernel of {:?}", s.character.values());
            }
        }
    }

    #[test]
    fn restrictions_vanish_small() {
        let cache = FglCache::new(None);
        for g in ["4", "2,2"] {
            let r = ring(2, 1, g, &cache);
            let rep = verify_restrictions_vanish(&r, &cache).unwrap();
            assert!(rep.holds(), "{rep:?}");
        }
        let r = ring(2, 1, "2,2", &cache);
        assert_eq!(verify_restrictions_vanish(&r, &cache).unwrap().checks.len(), 3);
    }

    #[test]
    fn unit_divisibility() {
        let cache = FglCache::new(None);
        for (p, m) in [(3, 1), (3, 2), (5, 2), (5, 3), (5, 4)] {
            let r = ring(p, 1, &p.to_string(), &cache);
            let rep = verify_unit_divisibility(&r, m).unwrap();
            assert!(rep.holds(), "p={p} m={m}: {rep:?}");
            assert_eq!(rep.s * m % p, 1);
        }
    }
}
