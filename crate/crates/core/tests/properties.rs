use std::sync::OnceLock;

use morava_core::coeff::{CoeffElem, CoeffParams};
use morava_core::golden::FglCache;
use morava_core::groupcoh::{pullback, AbelianPGroup, CohRing, GroupHom, RingElem};
use morava_core::localize::Localization;
use morava_core::series::YSeriesAlg;
use proptest::prelude::*;

const DESCRIPTORS: [&str; 3] = ["4,2", "4", "2,2"];

fn params() -> CoeffParams {
    CoeffParams::new(2, 1, 8, 4).unwrap()
}

fn cache() -> &'static FglCache {
    static CACHE: OnceLock<FglCache> = OnceLock::new();
    CACHE.get_or_init(|| FglCache::new(None))
}

fn rings() -> &'static [CohRing] {
    static RINGS: OnceLock<Vec<CohRing>> = OnceLock::new();
    RINGS.get_or_init(|| {
        DESCRIPTORS
            .iter()
            .map(|d| CohRing::build(&AbelianPGroup::parse(2, d).unwrap(), params(), cache(), 40).unwrap())
            .collect()
    })
}

/// A well-formed hom: entries scaled so every column lands in the right torsion.
fn hom(source: &AbelianPGroup, target: &AbelianPGroup, raw: &[i64]) -> GroupHom {
    let matrix = (0..target.rank())
        .map(|i| {
            (0..source.rank())
                .map(|j| {
                    let (ki, kj) = (target.exps()[i], source.exps()[j]);
                    let scale = 2i64.pow(ki.saturating_sub(kj));
                    raw[(i * 3 + j) % raw.len()] * scale
                })
                .collect()
        })
        .collect();
    GroupHom::new(source.clone(), target.clone(), matrix).unwrap()
}

fn arb_elem(ring: &CohRing, coeffs: &[i64]) -> RingElem {
    let p = ring.params();
    ring.basis().iter().zip(coeffs.iter().cycle()).fold(ring.zero(), |acc, (e, &c)| {
        ring.add(&acc, &ring.monomial(e, CoeffElem::from_int(p, c as i128)))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn pullback_is_contravariant(
        a in 0usize..3, b in 0usize..3, c in 0usize..3,
        m1 in proptest::collection::vec(-4i64..5, 6),
        m2 in proptest::collection::vec(-4i64..5, 6),
        xs in proptest::collection::vec(-20i64..20, 8),
    ) {
        let rs = rings();
        let (ra, rb, rc) = (&rs[a], &rs[b], &rs[c]);
        let f = hom(rc.group(), rb.group(), &m1);
        let g = hom(rb.group(), ra.group(), &m2);
        let gf = g.compose(&f).unwrap();
        let x = arb_elem(ra, &xs);
        let direct = pullback(&gf, ra, rc).unwrap().apply(&x);
        let staged = pullback(&f, rb, rc).unwrap().apply(&pullback(&g, ra, rb).unwrap().apply(&x));
        prop_assert_eq!(direct, staged);
    }

    #[test]
    fn pullback_is_a_ring_map(
        b in 0usize..3,
        m in proptest::collection::vec(-4i64..5, 6),
        xs in proptest::collection::vec(-20i64..20, 8),
        ys in proptest::collection::vec(-20i64..20, 8),
    ) {
        let rs = rings();
        let (ra, rb) = (&rs[0], &rs[b]);
        let f = hom(rb.group(), ra.group(), &m);
        let map = pullback(&f, ra, rb).unwrap();
        prop_assert!(map.respects_relations());
        let (x, y) = (arb_elem(ra, &xs), arb_elem(ra, &ys));
        prop_assert_eq!(map.apply(&ra.mul(&x, &y)), rb.mul(&map.apply(&x), &map.apply(&y)));
        prop_assert_eq!(map.apply(&ra.add(&x, &y)), rb.add(&map.apply(&x), &map.apply(&y)));
        prop_assert_eq!(map.apply(&ra.one()), rb.one());
    }

    #[test]
    fn ring_distributes(xs in proptest::collection::vec(-50i64..50, 8),
                        ys in proptest::collection::vec(-50i64..50, 8),
                        zs in proptest::collection::vec(-50i64..50, 8)) {
        let r = &rings()[0];
        let (x, y, z) = (arb_elem(r, &xs), arb_elem(r, &ys), arb_elem(r, &zs));
        prop_assert_eq!(r.mul(&x, &r.add(&y, &z)), r.add(&r.mul(&x, &y), &r.mul(&x, &z)));
        prop_assert_eq!(r.sub(&x, &x), r.zero());
    }

    #[test]
    fn m_series_are_additive(a in -5i64..6, b in -5i64..6) {
        let r = &rings()[1];
        let fgl = r.fgl();
        let alg = YSeriesAlg { params: r.params(), order: 12 };
        let sa = fgl.m_series(a).with_order(12);
        let sb = fgl.m_series(b).with_order(12);
        prop_assert_eq!(fgl.eval(&alg, &sa, &sb), fgl.m_series(a + b).with_order(12));
    }

    #[test]
    fn fractions_form_a_ring(
        xs in proptest::collection::vec(-9i64..9, 4),
        ys in proptest::collection::vec(-9i64..9, 4),
        zs in proptest::collection::vec(-9i64..9, 4),
        s in 0u32..3, t in 0u32..3, w in 0u32..3,
    ) {
        // localize C4 at the unit 1 + y, where nothing is vacuous
        let r = &rings()[1];
        let e = r.add(&r.one(), &r.gen(0));
        let loc = Localization::new(r, e, 6);
        let frac = |v: &[i64], k: u32| {
            let mut f = loc.from_elem(arb_elem(r, v));
            f.t = k;
            f
        };
        let (x, y, z) = (frac(&xs, s), frac(&ys, t), frac(&zs, w));
        let lhs = loc.mul(&x, &loc.add(&y, &z));
        let rhs = loc.add(&loc.mul(&x, &y), &loc.mul(&x, &z));
        prop_assert!(loc.equal(&lhs, &rhs).is_equal());
        prop_assert!(loc.equal(&loc.mul(&x, &y), &loc.mul(&y, &x)).is_equal());
        prop_assert!(loc.equal(&loc.add(&x, &loc.neg(&x)), &loc.from_elem(r.zero())).is_equal());
        prop_assert!(loc.equal(&loc.mul(&x, &loc.one()), &x).is_equal());
    }
}

#[test]
fn unit_denominators_cancel() {
    let r = &rings()[1];
    let e = r.add(&r.one(), &r.gen(0));
    let loc = Localization::new(r, e.clone(), 4);
    let mut inv = loc.one();
    inv.t = 1;
    let prod = loc.mul(&loc.from_elem(e), &inv);
    assert_eq!(loc.equal(&prod, &loc.one()).m(), Some(0));
}
