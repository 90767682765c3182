//! Truncation planning and the check runners behind every report.

use std::collections::BTreeMap;
use std::time::Instant;

use rayon::prelude::*;

use serde_json::json;

use crate::coeff::{max_digits, CoeffParams};
use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::euler::{euler_classes, verify_restrictions_vanish, verify_unit_divisibility};
use crate::fgl::predicted_working_precision;
use crate::golden::FglCache;
use crate::groupcoh::{estimated_degree, verify_free_over_subring, AbelianPGroup, CohRing, GroupHom};
use crate::localize::{
    euler_powers, ring_loss, verify_elementary_quotient, verify_euler_localizations_agree, verify_height_one,
    verify_periodicity,
};
use crate::report::{CheckRecord, Verdict, VerificationReport};

const LADDER: [(u32, u32); 10] = [(16, 8), (12, 6), (10, 5), (8, 4), (6, 3), (4, 2), (3, 1), (2, 1), (2, 0), (1, 0)];

/// Candidate truncations, finest first, never finer than `base`.
pub fn truncation_ladder(base: CoeffParams) -> Vec<CoeffParams> {
    let mut out = vec![base];
    for (nn, d) in LADDER {
        if nn > base.precision || d > base.vdeg {
            continue;
        }
        let d = if base.n == 1 { base.vdeg } else { d };
        let c = base.with_precision(nn).with_vdeg(d);
        if !out.contains(&c) {
            out.push(c);
        }
    }
    out
}

/// Truncations whose estimated formal group law degree fits the budget.
pub fn plan_truncation(groups: &[AbelianPGroup], base: CoeffParams, budget: usize) -> Vec<CoeffParams> {
    truncation_ladder(base)
        .into_iter()
        .filter(|&c| {
            let est = groups.iter().map(|g| estimated_degree(g, c)).max().unwrap_or(2);
            est <= budget && predicted_working_precision(c, est) <= max_digits(c.p)
        })
        .collect()
}

/// Builds the ring at the finest truncation whose certified degree stays
/// within one and a half times the budget.
pub fn build_planned(
    group: &AbelianPGroup,
    base: CoeffParams,
    budget: usize,
    min_degree: usize,
    cache: &FglCache,
) -> Result<CohRing> {
    for c in plan_truncation(std::slice::from_ref(group), base, budget) {
        match CohRing::build_capped(group, c, cache, min_degree, budget * 3 / 2) {
            Ok(r) => return Ok(r),
            Err(Error::Truncation(_)) | Err(Error::Precision(_)) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(Error::Truncation(format!(
        "{group} at p={} n={} fits no truncation within degree budget {budget}",
        base.p, base.n
    )))
}

pub mod anchors {
    pub const FGL_INTEGRITY: &str =
        "the p-typical formal group law is unital, commutative, associative and has integral coefficients";
    pub const CONGRUENCE: &str =
        "the p^k-series is congruent to u^(p^(nk)-1) y^(p^(nk)) modulo the maximal ideal";
    pub const FREE_RANK: &str =
        "E-cohomology of BA is free of rank |A|^n, and free of rank |ker q|^n over the cohomology of a quotient";
    pub const RESTRICTION: &str =
        "the total and reduced Euler classes restrict to zero on every proper subgroup";
    pub const UNIT_DIVISIBILITY: &str =
        "[s]([m](y)) = y for sm = 1 mod p, so [m](y) and y divide each other";
    pub const EULER_LOCALIZATION: &str =
        "inverting the total Euler class and inverting the reduced Euler class give the same ring";
    pub const PERIODICITY: &str =
        "modulo (p, v_1, ..., v_(n-2)) the p-series has two terms and v_(n-1) becomes a unit once y is inverted";
    pub const HEIGHT_ONE: &str =
        "at height one, inverting y inverts p and leaves a free module with basis 1, y, ..., y^(p-2)";
    pub const NONNILPOTENCE: &str =
        "the Euler class of an elementary abelian p-group of rank at most n has nonzero powers";
    pub const NILPOTENCE_CONTROL: &str =
        "below the rank the Euler class is nilpotent; least vanishing power recorded";
    pub const ELEMENTARY_QUOTIENT: &str =
        "pullback along the maximal elementary abelian quotient matches characters and carries e(C_p^r) to e(A)";
}

fn fail(id: &str, anchor: &str, e: &Error) -> CheckRecord {
    CheckRecord::new(id, anchor, Verdict::Fail).witness(json!({ "error": e.to_string() }))
}

fn ring_params(rec: CheckRecord, ring: &CohRing, base: CoeffParams) -> CheckRecord {
    let c = ring.certificate();
    let used = ring.params();
    rec.param("group", ring.group().descriptor())
        .param("p", used.p)
        .param("n", used.n)
        .param("precision", used.precision)
        .param("vdeg", used.vdeg)
        .param("reduced_truncation", used != base)
        .param("fgl_degree", c.fgl_degree)
        .param("ideal_degree", c.ideal_degree)
}

/// Runs individual checks against a shared formal group law cache.
pub struct Runner {
    cfg: RunConfig,
    cache: FglCache,
}

impl Runner {
    pub fn new(cfg: RunConfig) -> Result<Self> {
        cfg.validate()?;
        let cache = FglCache::new(cfg.cache_dir.clone());
        Ok(Runner { cfg, cache })
    }

    pub fn config(&self) -> &RunConfig {
        &self.cfg
    }

    pub fn cache(&self) -> &FglCache {
        &self.cache
    }

    fn base(&self, p: u32, n: u32) -> Result<CoeffParams> {
        CoeffParams::new(p, n, self.cfg.precision, self.cfg.vdeg)
    }

    fn min_degree(&self) -> usize {
        self.cfg.ydeg.unwrap_or(0)
    }

    fn timed(&self, f: impl FnOnce() -> CheckRecord) -> CheckRecord {
        let start = Instant::now();
        let mut rec = f();
        if self.cfg.timings {
            rec.wall_time_ms = Some(start.elapsed().as_millis() as u64);
        }
        rec
    }

    pub fn ring(&self, group: &AbelianPGroup, n: u32) -> Result<CohRing> {
        let base = self.base(group.p(), n)?;
        build_planned(group, base, self.cfg.effective_budget(), self.min_degree(), &self.cache)
    }

    pub fn fgl_integrity(&self, p: u32, n: u32) -> CheckRecord {
        let id = "fgl-integrity";
        self.timed(|| {
            let run = || -> Result<CheckRecord> {
                let params = self.base(p, n)?;
                let cap = self.cfg.ydeg.unwrap_or(32).min(32);
                let fgl = self.cache.get(params, cap.max(2))?;
                let ax = fgl.check_axioms(cap);
                Ok(CheckRecord::new(id, anchors::FGL_INTEGRITY, Verdict::from_bool(ax.holds()))
                    .param("p", p)
                    .param("n", n)
                    .param("precision", params.precision)
                    .param("vdeg", params.vdeg)
                    .param("degree", cap)
                    .witness(json!({ "axioms": ax, "working_precision": fgl.working_precision() }))
                    .loss(fgl.precision_loss() - (fgl.working_precision() as i64 - params.precision as i64)))
            };
            run().unwrap_or_else(|e| fail(id, anchors::FGL_INTEGRITY, &e))
        })
    }

    pub fn congruence(&self, p: u32, n: u32, k: u32) -> CheckRecord {
        let id = "pseries-congruence";
        self.timed(|| {
            let run = || -> Result<CheckRecord> {
                let params = self.base(p, n)?;
                let d = (p as usize).pow(n * k);
                let fgl = self.cache.get(params, d.max(self.min_degree()))?;
                let rep = fgl.check_congruence(k)?;
                Ok(CheckRecord::new(id, anchors::CONGRUENCE, Verdict::from_bool(rep.holds()))
                    .param("p", p)
                    .param("n", n)
                    .param("k", k)
                    .param("precision", params.precision)
                    .param("vdeg", params.vdeg)
                    .witness(rep))
            };
            run().unwrap_or_else(|e| fail(id, anchors::CONGRUENCE, &e))
        })
    }

    /// Rank of `E^*(BA)` and freeness over every standard quotient.
    pub fn free_ranks(&self, group: &AbelianPGroup, n: u32) -> CheckRecord {
        let id = "free-rank";
        self.timed(|| {
            let run = || -> Result<CheckRecord> {
                let ring = self.ring(group, n)?;
                let expected = group.order().pow(n);
                let rank_ok = ring.rank() as u128 == expected;
                let mut quotients = Vec::new();
                let mut all = rank_ok;
                let mut l = vec![0u32; group.rank()];
                loop {
                    let q = GroupHom::standard_quotient(group, &l)?;
                    let rb = CohRing::build(q.target(), ring.params(), &self.cache, ring.fgl().degree())?;
                    let rep = verify_free_over_subring(&q, &ring, &rb)?;
                    all &= rep.holds();
                    quotients.push(rep);
                    // next exponent vector, lexicographic
                    let mut i = group.rank();
                    let mut done = true;
                    while i > 0 {
                        i -= 1;
                        if l[i] < group.exps()[i] {
                            l[i] += 1;
                            done = false;
                            break;
                        }
                        l[i] = 0;
                    }
                    if done {
                        break;
                    }
                }
                let base = self.base(group.p(), n)?;
                Ok(ring_params(CheckRecord::new(id, anchors::FREE_RANK, Verdict::from_bool(all)), &ring, base)
                    .witness(json!({
                        "rank": ring.rank(),
                        "expected_rank": expected.to_string(),
                        "weierstrass_degrees": ring.certificate().weierstrass_degrees,
                        "factor_nilpotency": ring.certificate().factor_nilpotency,
                        "quotients": quotients,
                    })))
            };
            run().unwrap_or_else(|e| fail(id, anchors::FREE_RANK, &e))
        })
    }

    pub fn restriction_vanishing(&self, group: &AbelianPGroup, n: u32) -> CheckRecord {
        let id = "restriction-vanishing";
        self.timed(|| {
            let run = || -> Result<CheckRecord> {
                let ring = self.ring(group, n)?;
                let rep = verify_restrictions_vanish(&ring, &self.cache)?;
                let base = self.base(group.p(), n)?;
                let rec = CheckRecord::new(id, anchors::RESTRICTION, Verdict::from_bool(rep.holds()));
                Ok(ring_params(rec, &ring, base).witness(rep))
            };
            run().unwrap_or_else(|e| fail(id, anchors::RESTRICTION, &e))
        })
    }

    /// All `m` in `1..p` for `C_p` at height `n`.
    pub fn unit_divisibility(&self, p: u32, n: u32) -> CheckRecord {
        let id = "unit-divisibility";
        self.timed(|| {
            let run = || -> Result<CheckRecord> {
                let cp = AbelianPGroup::cyclic(p, 1)?;
                let ring = self.ring(&cp, n)?;
                let reps = (1..p).map(|m| verify_unit_divisibility(&ring, m)).collect::<Result<Vec<_>>>()?;
                let ok = reps.iter().all(|r| r.holds());
                let base = self.base(p, n)?;
                let rec = CheckRecord::new(id, anchors::UNIT_DIVISIBILITY, Verdict::from_bool(ok));
                Ok(ring_params(rec, &ring, base).witness(reps))
            };
            run().unwrap_or_else(|e| fail(id, anchors::UNIT_DIVISIBILITY, &e))
        })
    }

    pub fn euler_localization(&self, group: &AbelianPGroup, n: u32) -> CheckRecord {
        let id = "euler-localization";
        self.timed(|| {
            let run = || -> Result<CheckRecord> {
                let ring = self.ring(group, n)?;
                let rep = verify_euler_localizations_agree(&ring)?;
                let base = self.base(group.p(), n)?;
                let rec = CheckRecord::new(id, anchors::EULER_LOCALIZATION, Verdict::from_bool(rep.holds()));
                Ok(ring_params(rec, &ring, base).param("saturation_bound", ring.rank()).witness(rep))
            };
            run().unwrap_or_else(|e| fail(id, anchors::EULER_LOCALIZATION, &e))
        })
    }

    pub fn periodicity(&self, p: u32, n: u32) -> CheckRecord {
        let id = "periodicity";
        self.timed(|| {
            let run = || -> Result<CheckRecord> {
                let rep = verify_periodicity(p, n, self.cfg.precision, self.cfg.vdeg, &self.cache)?;
                let loss = rep.precision_loss;
                Ok(CheckRecord::new(id, anchors::PERIODICITY, Verdict::from_bool(rep.holds()))
                    .param("p", p)
                    .param("n", n)
                    .param("precision", self.cfg.precision)
                    .param("vdeg", self.cfg.vdeg)
                    .witness(rep)
                    .loss(loss))
            };
            run().unwrap_or_else(|e| fail(id, anchors::PERIODICITY, &e))
        })
    }

    pub fn height_one(&self, p: u32) -> CheckRecord {
        let id = "height-one-inverse";
        self.timed(|| {
            let run = || -> Result<CheckRecord> {
                let rep = verify_height_one(p, self.cfg.precision, &self.cache)?;
                let loss = rep.precision_loss;
                Ok(CheckRecord::new(id, anchors::HEIGHT_ONE, Verdict::from_bool(rep.holds()))
                    .param("p", p)
                    .param("n", 1)
                    .param("precision", self.cfg.precision)
                    .witness(rep)
                    .loss(loss))
            };
            run().unwrap_or_else(|e| fail(id, anchors::HEIGHT_ONE, &e))
        })
    }

    /// Evidence of nonvanishing when `n ≥ r`; the nilpotence control otherwise.
    pub fn euler_powers(&self, p: u32, r: usize, n: u32, t: u32) -> CheckRecord {
        let positive = n as usize >= r;
        let (id, anchor) = if positive {
            ("euler-nonnilpotence", anchors::NONNILPOTENCE)
        } else {
            ("euler-nilpotence-control", anchors::NILPOTENCE_CONTROL)
        };
        self.timed(|| {
            let run = || -> Result<CheckRecord> {
                let g = AbelianPGroup::elementary(p, r);
                let ring = self.ring(&g, n)?;
                let rep = euler_powers(&ring, t)?;
                let verdict = if positive {
                    if rep.all_nonzero() {
                        Verdict::Evidence
                    } else {
                        Verdict::Fail
                    }
                } else if rep.nilpotency.is_some() {
                    Verdict::Pass
                } else {
                    Verdict::Indeterminate
                };
                let base = self.base(p, n)?;
                Ok(ring_params(CheckRecord::new(id, anchor, verdict), &ring, base).param("r", r).param("t", t).witness(rep))
            };
            run().unwrap_or_else(|e| fail(id, anchor, &e))
        })
    }

    pub fn elementary_quotient(&self, group: &AbelianPGroup, n: u32) -> CheckRecord {
        let id = "elementary-quotient";
        self.timed(|| {
            let run = || -> Result<CheckRecord> {
                let ring = self.ring(group, n)?;
                let rep = verify_elementary_quotient(&ring, &self.cache)?;
                let e = euler_classes(&ring)?.total;
                let loss = ring_loss(&ring, &[&e]);
                let base = self.base(group.p(), n)?;
                let rec = CheckRecord::new(id, anchors::ELEMENTARY_QUOTIENT, Verdict::from_bool(rep.holds()));
                Ok(ring_params(rec, &ring, base).witness(rep).loss(loss))
            };
            run().unwrap_or_else(|e| fail(id, anchors::ELEMENTARY_QUOTIENT, &e))
        })
    }

    /// The group list used by the rank and restriction checks.
    pub fn standard_groups(p: u32) -> Vec<AbelianPGroup> {
        [vec![1], vec![2], vec![1, 1], vec![2, 1]]
            .into_iter()
            .map(|e| AbelianPGroup::new(p, e).expect("valid"))
            .collect()
    }

    /// Every job of the full suite, in report order.
    pub fn full_jobs(&self) -> Vec<Job> {
        let large = self.cfg.large;
        let mut jobs = Vec::new();
        for (p, n) in [(2, 1), (3, 1), (5, 1), (2, 2), (3, 2), (2, 3)] {
            jobs.push(Job::FglIntegrity { p, n });
        }
        let mut cong = vec![(2, 1, 1), (2, 1, 2), (3, 1, 1), (2, 2, 1), (5, 1, 1), (3, 2, 1)];
        if large {
            cong.push((2, 2, 2));
        }
        jobs.extend(cong.into_iter().map(|(p, n, k)| Job::Congruence { p, n, k }));
        for p in [2, 3] {
            for n in [1, 2] {
                for g in Self::standard_groups(p) {
                    jobs.push(Job::FreeRank { group: g.clone(), n });
                    jobs.push(Job::Restriction { group: g, n });
                }
            }
        }
        for p in [3, 5] {
            for n in [1, 2] {
                jobs.push(Job::UnitDivisibility { p, n });
            }
        }
        for p in [2, 3] {
            for g in Self::standard_groups(p) {
                jobs.push(Job::EulerLocalization { group: g, n: 1 });
            }
        }
        let mut per = vec![(2, 2), (3, 2)];
        if large {
            per.push((2, 3));
        }
        jobs.extend(per.into_iter().map(|(p, n)| Job::Periodicity { p, n }));
        jobs.extend([2, 3, 5].map(|p| Job::HeightOne { p }));
        for (p, r, n) in [(2, 1, 1), (2, 2, 2), (3, 1, 1), (2, 2, 1)] {
            jobs.push(Job::EulerPowers { p, r, n, t: self.cfg.t });
        }
        let mut quots = vec![(2, "4", 1), (2, "4,2", 1), (3, "9", 1)];
        if large {
            quots.push((2, "4,2", 2));
        }
        for (p, g, n) in quots {
            let group = AbelianPGroup::parse(p, g).expect("valid");
            jobs.push(Job::ElementaryQuotient { group, n });
        }
        jobs
    }

    pub fn full_suite(&self) -> VerificationReport {
        self.run_jobs(&self.full_jobs())
    }

    /// Runs jobs on the current rayon pool and reports them in input order.
    ///
    /// Jobs sharing a `(p, n)` run in sequence: the cache hands out the
    /// largest law built so far, so their order fixes the reported degrees.
    pub fn run_jobs(&self, jobs: &[Job]) -> VerificationReport {
        let mut buckets: BTreeMap<(u32, u32), Vec<usize>> = BTreeMap::new();
        for (i, j) in jobs.iter().enumerate() {
            buckets.entry(j.key()).or_default().push(i);
        }
        let buckets: Vec<Vec<usize>> = buckets.into_values().collect();
        let mut done: Vec<(usize, CheckRecord)> = buckets
            .par_iter()
            .flat_map_iter(|idx| idx.iter().map(|&i| (i, jobs[i].run(self))).collect::<Vec<_>>())
            .collect();
        done.sort_by_key(|(i, _)| *i);
        let mut report = VerificationReport::new(self.cfg.echo());
        report.extend(done.into_iter().map(|(_, r)| r));
        report
    }
}

/// One check of a suite.
#[derive(Clone, Debug, PartialEq)]
pub enum Job {
    FglIntegrity { p: u32, n: u32 },
    Congruence { p: u32, n: u32, k: u32 },
    FreeRank { group: AbelianPGroup, n: u32 },
    Restriction { group: AbelianPGroup, n: u32 },
    UnitDivisibility { p: u32, n: u32 },
    EulerLocalization { group: AbelianPGroup, n: u32 },
    Periodicity { p: u32, n: u32 },
    HeightOne { p: u32 },
    EulerPowers { p: u32, r: usize, n: u32, t: u32 },
    ElementaryQuotient { group: AbelianPGroup, n: u32 },
}

impl Job {
    fn key(&self) -> (u32, u32) {
        match self {
            Job::FglIntegrity { p, n }
            | Job::Congruence { p, n, .. }
            | Job::UnitDivisibility { p, n }
            | Job::Periodicity { p, n }
            | Job::EulerPowers { p, n, .. } => (*p, *n),
            Job::FreeRank { group, n }
            | Job::Restriction { group, n }
            | Job::EulerLocalization { group, n }
            | Job::ElementaryQuotient { group, n } => (group.p(), *n),
            Job::HeightOne { p } => (*p, 1),
        }
    }

    pub fn run(&self, r: &Runner) -> CheckRecord {
        match self {
            Job::FglIntegrity { p, n } => r.fgl_integrity(*p, *n),
            Job::Congruence { p, n, k } => r.congruence(*p, *n, *k),
            Job::FreeRank { group, n } => r.free_ranks(group, *n),
            Job::Restriction { group, n } => r.restriction_vanishing(group, *n),
            Job::UnitDivisibility { p, n } => r.unit_divisibility(*p, *n),
            Job::EulerLocalization { group, n } => r.euler_localization(group, *n),
            Job::Periodicity { p, n } => r.periodicity(*p, *n),
            Job::HeightOne { p } => r.height_one(*p),
            Job::EulerPowers { p, r: rank, n, t } => r.euler_powers(*p, *rank, *n, *t),
            Job::ElementaryQuotient { group, n } => r.elementary_quotient(group, *n),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ladder_is_monotone() {
        let base = CoeffParams::new(2, 2, 16, 8).unwrap();
        let l = truncation_ladder(base);
        assert_eq!(l[0], base);
        assert!(l.windows(2).all(|w| w[0].precision >= w[1].precision));
        let base1 = CoeffParams::new(3, 1, 12, 8).unwrap();
        let l1 = truncation_ladder(base1);
        assert!(l1.iter().all(|c| c.vdeg == 8 && c.precision <= 12));
    }

    #[test]
    fn planner_reduces_large_groups() {
        let base = CoeffParams::new(3, 2, 16, 8).unwrap();
        let g = AbelianPGroup::parse(3, "9,3").unwrap();
        let plan = plan_truncation(std::slice::from_ref(&g), base, 128);
        assert!(!plan.is_empty());
        assert!(plan[0].precision < 16);
        let cp = AbelianPGroup::parse(2, "2").unwrap();
        let plan = plan_truncation(&[cp], CoeffParams::new(2, 1, 16, 8).unwrap(), 128);
        assert_eq!(plan[0].precision, 16);
    }

    #[test]
    fn failing_checks_are_recorded() {
        let cfg = RunConfig { budget: 4, ..Default::default() };
        let r = Runner::new(cfg).unwrap();
        let g = AbelianPGroup::parse(2, "4,2").unwrap();
        let rec = r.free_ranks(&g, 2);
        assert_eq!(rec.verdict, Verdict::Fail);
        assert!(rec.witness["error"].is_string());
    }
}
