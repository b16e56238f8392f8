use std::collections::BTreeMap;

use proptest::prelude::*;

use consistent_kcenter::clusterer::{Clusterer, EventKind, UpdateEvent};
use consistent_kcenter::harness::run::{audit, APPROX_FACTOR};
use consistent_kcenter::harness::{Stream, StreamHeader};
use consistent_kcenter::metric::{rank_cap, MetricUniverse, PointKey};
use consistent_kcenter::oracle::{brute_force_opt, cost, gonzalez, DEFAULT_ENUMERATION_CAP};
use consistent_kcenter::ranks::{opt_lower_bound, ordered_rank, RankFunction};

/// Smallest `e` with `2^e >= delta`, plus one.
fn cap_by_doubling(delta: u64) -> u32 {
    let mut e = 0;
    while (1u128 << e) < delta as u128 {
        e += 1;
    }
    e + 1
}

/// Exact optimum by walking every bitmask of candidate centers.
fn opt_by_bitmask(active: &[PointKey], k: usize, u: &MetricUniverse) -> f64 {
    let cand = u.keys_by_label();
    let mut best = f64::INFINITY;
    for mask in 1u32..(1 << cand.len()) {
        if mask.count_ones() as usize > k {
            continue;
        }
        let centers: Vec<_> = (0..cand.len())
            .filter(|i| mask >> i & 1 == 1)
            .map(|i| cand[i])
            .collect();
        let r = active
            .iter()
            .map(|&p| {
                centers
                    .iter()
                    .map(|&c| u.distance(p, c))
                    .fold(f64::INFINITY, f64::min)
            })
            .fold(0.0, f64::max);
        best = best.min(r);
    }
    best
}

/// Points on a grid with spacing 1, so pairwise distances are at least 1.
fn grid_points(max: usize) -> impl Strategy<Value = Vec<(i32, i32)>> {
    proptest::collection::btree_set((0i32..7, 0i32..7), 2..=max)
        .prop_map(|s| s.into_iter().collect())
}

fn universe_of(points: &[(i32, i32)]) -> (MetricUniverse, Vec<PointKey>) {
    // the 7x7 grid has diameter 6 * sqrt(2) < 9
    let mut u = MetricUniverse::euclidean(2, 9).unwrap();
    let keys = points
        .iter()
        .enumerate()
        .map(|(i, &(x, y))| {
            u.add_point(format!("q{i:02}").into(), vec![x as f64, y as f64])
                .unwrap()
        })
        .collect();
    (u, keys)
}

proptest! {
    #[test]
    fn rank_cap_matches_doubling(delta in 1u64..(1 << 40)) {
        prop_assert_eq!(rank_cap(delta).unwrap(), cap_by_doubling(delta));
    }

    #[test]
    fn rank_function_tracks_a_map(ops in proptest::collection::vec((0u32..20, proptest::option::of(0u32..9)), 0..80)) {
        let mut u = MetricUniverse::euclidean(1, 64).unwrap();
        let keys: Vec<_> = (0..20).map(|i| u.add_point(format!("r{i}").into(), vec![i as f64]).unwrap()).collect();
        let mut xi = RankFunction::new();
        let mut model = BTreeMap::new();
        for (p, op) in ops {
            let key = keys[p as usize];
            match op {
                Some(r) => prop_assert_eq!(xi.set(key, r), model.insert(p, r)),
                None => prop_assert_eq!(xi.remove(key), model.remove(&p)),
            }
            prop_assert_eq!(xi.len(), model.len());
        }
        let mut expected: Vec<u32> = model.values().copied().collect();
        expected.sort_unstable_by(|a, b| b.cmp(a));
        prop_assert_eq!(xi.ordered(), expected.clone());
        for (i, &r) in expected.iter().enumerate() {
            prop_assert_eq!(ordered_rank(&xi, i + 1).unwrap(), r);
        }
        for (&p, &r) in &model {
            prop_assert_eq!(xi.get(keys[p as usize]), Some(r));
        }
        prop_assert_eq!(xi.domain().len(), model.len());
    }

    #[test]
    fn stream_round_trip(
        events in proptest::collection::vec((any::<bool>(), 0u16..500, proptest::collection::vec(-1e6f64..1e6, 3)), 0..40),
        k in 1usize..10,
        delta in 1u64..10_000,
    ) {
        let stream = Stream {
            header: StreamHeader::euclidean(k, delta, 3),
            events: events
                .into_iter()
                .map(|(ins, id, c)| {
                    let id = format!("p{id}");
                    if ins { UpdateEvent::insert(id, Some(c)) } else { UpdateEvent::delete(id) }
                })
                .collect(),
        };
        let text = stream.to_jsonl();
        prop_assert_eq!(Stream::parse_str(&text).unwrap(), stream);
    }

    #[test]
    fn exact_oracle_matches_bitmask(points in grid_points(8), k in 1usize..4, skip in 0usize..3) {
        let (u, keys) = universe_of(&points);
        let active = &keys[skip.min(keys.len() - 1)..];
        let exact = brute_force_opt(active, k, &u, DEFAULT_ENUMERATION_CAP).unwrap();
        let expected = if k >= active.len() { 0.0 } else { opt_by_bitmask(active, k, &u) };
        prop_assert_eq!(exact.value, expected);
        if k < active.len() {
            let centers: Vec<_> = exact.witness_centers.iter().map(|id| u.key(id).unwrap()).collect();
            prop_assert_eq!(cost(active, &centers, &u).unwrap(), exact.value);
            let g = gonzalez(active, k, &u, None).unwrap();
            prop_assert!(exact.value <= g.value && g.value <= 2.0 * exact.value);
        }
    }

    /// Random update sequences keep every audited invariant, the 24-factor
    /// for every k' at once, and the lower bound below the exact optimum.
    #[test]
    fn random_updates_keep_invariants(
        points in grid_points(10),
        k in 1usize..4,
        script in proptest::collection::vec((any::<bool>(), any::<prop::sample::Index>()), 1..40),
    ) {
        let (u, _) = universe_of(&points);
        let mut c = Clusterer::new(u.clone(), k).unwrap();
        let ids: Vec<String> = (0..points.len()).map(|i| format!("q{i:02}")).collect();
        let coords = |i: usize| vec![points[i].0 as f64, points[i].1 as f64];
        for (want_insert, pick) in script {
            let active: Vec<usize> = (0..ids.len()).filter(|&i| c.is_active(&ids[i].as_str().into())).collect();
            let inactive: Vec<usize> = (0..ids.len()).filter(|i| !active.contains(i)).collect();
            let insert = !inactive.is_empty() && (want_insert || active.is_empty());
            let event = if insert {
                let i = inactive[pick.index(inactive.len())];
                UpdateEvent::insert(ids[i].as_str(), Some(coords(i)))
            } else {
                UpdateEvent::delete(ids[active[pick.index(active.len())]].as_str())
            };
            let outcome = c.apply_update(&event).unwrap();
            let cost_now = c.current_cost();
            let kind = if insert { EventKind::Insert } else { EventKind::Delete };
            let a = audit(&c, kind, &outcome, cost_now, None);
            prop_assert!(a.passed(), "{:?} after {}", a.violations, event);

            let act = c.active();
            for kk in 1..act.len() {
                let opt = brute_force_opt(&act, kk, c.universe(), DEFAULT_ENUMERATION_CAP).unwrap().value;
                let top = c.top_smooth(kk);
                prop_assert!(cost(&act, &top, c.universe()).unwrap() <= APPROX_FACTOR * opt);
                prop_assert!(opt_lower_bound(c.triple().geometric(), kk).unwrap() <= opt);
            }
        }
    }
}
