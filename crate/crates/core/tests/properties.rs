//! Property tests: structural invariants that must hold on randomized
//! inputs, with shrinking. Instances are built from small generator
//! parameters so failures minimize to readable cases.

use proptest::prelude::*;
use sra_embed::audit::distortion_audit;
use sra_embed::extension::mcshane_extend;
use sra_embed::generators::{euclidean_cloud, grid_l1, line, snowflake_line, SplitMix64};
use sra_embed::io::{
    read_embedding_csv, read_space_csv, read_space_json, write_embedding_csv, write_space_csv,
    write_space_json,
};
use sra_embed::metric::{greedy_maximal_separated, validate_metric};
use sra_embed::sra::{
    build_core_subset, critical_radius, find_sra_subspace, subset_is_sra, SraParams,
};
use sra_embed::{FiniteMetricSpace, PointId, PointMap, SubsetRef};

/// Deterministic subset of `0..n` with at least `min` members.
fn seeded_subset(seed: u64, n: usize, min: usize) -> SubsetRef {
    let mut rng = SplitMix64::new(seed);
    loop {
        let ids: Vec<usize> = (0..n).filter(|_| rng.next_f64() < 0.5).collect();
        if ids.len() >= min {
            return SubsetRef::from_indices(ids);
        }
    }
}

fn rebuild_from_distances(space: &FiniteMetricSpace) -> Vec<Vec<f64>> {
    space
        .points()
        .map(|a| space.points().map(|b| space.d(a, b)).collect())
        .collect()
}

proptest! {
    /// Every generator family yields a space whose matrix re-validates.
    #[test]
    fn generated_spaces_validate(
        family in 0u8..4,
        n in 2usize..=24,
        dim in 1usize..=3,
        seed in any::<u64>(),
        exponent in 0.05f64..=1.0,
    ) {
        let space = match family {
            0 => line(n).unwrap(),
            1 => snowflake_line(n, exponent).unwrap(),
            2 => euclidean_cloud(n, dim, seed).unwrap(),
            _ => grid_l1(n, dim).unwrap(),
        };
        let matrix = rebuild_from_distances(&space);
        let again = validate_metric(&matrix, Some(space.labels().to_vec())).unwrap();
        prop_assert_eq!(again.len(), space.len());
    }

    /// Greedy nets are r-separated and maximal.
    #[test]
    fn greedy_net_certificates(
        n in 2usize..=20,
        seed in any::<u64>(),
        frac in 0.01f64..=1.0,
    ) {
        let space = euclidean_cloud(n, 2, seed).unwrap();
        let r = frac * space.diameter();
        prop_assume!(r > 0.0);
        let net = greedy_maximal_separated(&space, &space.all(), r);
        for (i, a) in net.iter().enumerate() {
            for b in net.iter().skip(i + 1) {
                prop_assert!(space.d(a, b) >= r, "net pair ({a},{b}) closer than {r}");
            }
        }
        for p in space.points() {
            prop_assert!(
                net.contains(p) || space.dist_to_set(p, &net) < r,
                "{p} is neither kept nor covered"
            );
        }
    }

    /// The SRA condition is monotone in the angle parameter.
    #[test]
    fn sra_monotone_in_alpha(
        n in 3usize..=9,
        seed in any::<u64>(),
        a1 in 0.05f64..0.95,
        bump in 0.0f64..0.5,
    ) {
        let space = euclidean_cloud(n, 2, seed).unwrap();
        let subset = seeded_subset(seed ^ 0xA5A5, n, 3);
        let a2 = (a1 + bump).min(0.999);
        if subset_is_sra(&space, &subset, a1) {
            prop_assert!(
                subset_is_sra(&space, &subset, a2),
                "subset {subset} satisfies alpha={a1} but not the weaker alpha={a2}"
            );
        }
    }

    /// Freeness at k implies freeness at k+1, and witnesses are valid.
    #[test]
    fn freeness_monotone_in_subset_size(
        n in 4usize..=10,
        seed in any::<u64>(),
        alpha in 0.1f64..0.95,
        k in 3usize..=4,
    ) {
        let space = euclidean_cloud(n, 2, seed).unwrap();
        let at_k = find_sra_subspace(&space, SraParams::new(alpha, k).unwrap());
        let at_k1 = find_sra_subspace(&space, SraParams::new(alpha, k + 1).unwrap());
        if let Some(w) = &at_k {
            prop_assert_eq!(w.len(), k);
            prop_assert!(subset_is_sra(&space, w, alpha));
        }
        if let Some(w) = &at_k1 {
            prop_assert_eq!(w.len(), k + 1);
            prop_assert!(subset_is_sra(&space, w, alpha));
            prop_assert!(
                at_k.is_some(),
                "witness at k+1 exists but none at k: subsets are closed downward"
            );
        }
    }

    /// McShane extension: base values copied bitwise, every coordinate stays
    /// 1-Lipschitz (distance coordinates in, distance-like coordinates out).
    #[test]
    fn mcshane_keeps_base_and_coordinate_lipschitz(
        n in 3usize..=15,
        seed in any::<u64>(),
    ) {
        let space = euclidean_cloud(n, 2, seed).unwrap();
        let y = seeded_subset(seed ^ 0x17, n, 1);
        let anchors: Vec<PointId> = y.iter().take(2).collect();
        let values: Vec<Vec<f64>> = y
            .iter()
            .map(|p| anchors.iter().map(|&a| space.d(p, a)).collect())
            .collect();
        let partial = PointMap::new(y.clone(), anchors.len(), values, 1.0, 1.0).unwrap();
        let ext = mcshane_extend(&space, &partial, 1.0).unwrap();
        for p in y.iter() {
            let before = partial.value(p).unwrap();
            let after = ext.value(p).unwrap();
            for (x, z) in before.iter().zip(after) {
                prop_assert_eq!(x.to_bits(), z.to_bits(), "base row changed at {}", p);
            }
        }
        for a in space.points() {
            for b in space.points() {
                if b.0 <= a.0 { continue; }
                let d = space.d(a, b);
                let va = ext.value(a).unwrap();
                let vb = ext.value(b).unwrap();
                for i in 0..ext.dim() {
                    prop_assert!(
                        (va[i] - vb[i]).abs() <= d * (1.0 + 1e-12),
                        "coordinate {i} stretches pair ({a},{b})"
                    );
                }
            }
        }
    }

    /// Pruned critical-radius search agrees with exhaustive enumeration.
    #[test]
    fn critical_radius_matches_exhaustive(
        n in 4usize..=8,
        seed in any::<u64>(),
        alpha in 0.2f64..0.9,
        k in 3usize..=4,
    ) {
        let space = euclidean_cloud(n, 2, seed).unwrap();
        let params = SraParams::new(alpha, k).unwrap();
        for x in space.points() {
            let fast = critical_radius(&space, x, params);
            // Exhaustive: all (k-1)-subsets containing x.
            let mut best = 0.0f64;
            let others: Vec<PointId> =
                space.points().filter(|&p| p != x).collect();
            let mut found = false;
            let choose = k - 2;
            let mut idx: Vec<usize> = (0..choose).collect();
            loop {
                let mut members = vec![x];
                members.extend(idx.iter().map(|&i| others[i]));
                let subset = SubsetRef::new(members);
                if subset_is_sra(&space, &subset, alpha / 2.0) {
                    let mut mn = f64::INFINITY;
                    for (ai, a) in subset.iter().enumerate() {
                        for b in subset.iter().skip(ai + 1) {
                            mn = mn.min(space.d(a, b));
                        }
                    }
                    if !found || mn > best {
                        best = mn;
                        found = true;
                    }
                }
                // next combination
                let mut j = choose;
                loop {
                    if j == 0 { break; }
                    j -= 1;
                    if idx[j] != j + others.len() - choose {
                        idx[j] += 1;
                        for t in j + 1..choose {
                            idx[t] = idx[t - 1] + 1;
                        }
                        break;
                    }
                    if j == 0 {
                        idx.clear();
                        break;
                    }
                }
                if idx.is_empty() { break; }
            }
            if found {
                prop_assert_eq!(fast.radius.to_bits(), best.to_bits());
                let w = fast.witness.as_ref().expect("radius > 0 must carry a witness");
                prop_assert!(w.contains(x) && w.len() == k - 1);
                prop_assert!(subset_is_sra(&space, w, alpha / 2.0));
            } else {
                prop_assert_eq!(fast.radius, 0.0);
                prop_assert!(fast.witness.is_none());
            }
        }
    }

    /// Core subsets: kept pairs are farther than either critical radius;
    /// excluded points are covered by the core within their own radius.
    #[test]
    fn core_subset_certificates(
        n in 4usize..=10,
        seed in any::<u64>(),
        alpha in 0.2f64..0.9,
    ) {
        let space = euclidean_cloud(n, 2, seed).unwrap();
        let params = SraParams::new(alpha, 4).unwrap();
        let (core, entries) = build_core_subset(&space, params);
        prop_assert!(!core.is_empty());
        for (i, a) in core.iter().enumerate() {
            for b in core.iter().skip(i + 1) {
                let cut = entries[a.0].radius.min(entries[b.0].radius);
                prop_assert!(space.d(a, b) > cut, "core pair ({a},{b}) too close");
            }
        }
        for x in space.points() {
            if !core.contains(x) {
                prop_assert!(
                    space.dist_to_set(x, &core) <= entries[x.0].radius,
                    "excluded {x} is not covered by the core"
                );
            }
        }
    }

    /// The parallel distortion audit equals a plain double loop, bitwise.
    #[test]
    fn audit_matches_double_loop(
        n in 2usize..=12,
        dim in 1usize..=3,
        seed in any::<u64>(),
    ) {
        let space = euclidean_cloud(n, 2, seed).unwrap();
        let mut rng = SplitMix64::new(seed ^ 0xD15);
        let values: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..dim).map(|_| rng.next_f64() * 20.0 - 10.0).collect())
            .collect();
        let map = PointMap::new(space.all(), dim, values, 1.0, 1.0).unwrap();
        let report = distortion_audit(&space, &map).unwrap();
        let mut lip = f64::NEG_INFINITY;
        let mut colip = f64::INFINITY;
        for a in space.points() {
            for b in space.points() {
                if b.0 <= a.0 { continue; }
                let ratio = map.image_distance(a, b).unwrap() / space.d(a, b);
                lip = lip.max(ratio);
                colip = colip.min(ratio);
            }
        }
        prop_assert_eq!(report.lipschitz.to_bits(), lip.to_bits());
        prop_assert_eq!(report.colipschitz.to_bits(), colip.to_bits());
        prop_assert_eq!(
            report.distortion.to_bits(),
            (lip / colip).to_bits()
        );
    }

    /// Space serialization round-trips bitwise in both formats.
    #[test]
    fn space_io_roundtrips_bitwise(
        n in 2usize..=12,
        seed in any::<u64>(),
        family in 0u8..2,
    ) {
        let space = match family {
            0 => euclidean_cloud(n, 3, seed).unwrap(),
            _ => snowflake_line(n, 0.5).unwrap(),
        };
        for text in [write_space_json(&space), write_space_csv(&space)] {
            let back = if text.starts_with('{') {
                read_space_json(&text).unwrap()
            } else {
                read_space_csv(&text).unwrap()
            };
            prop_assert_eq!(back.labels(), space.labels());
            for a in space.points() {
                for b in space.points() {
                    prop_assert_eq!(back.d(a, b).to_bits(), space.d(a, b).to_bits());
                }
            }
        }
    }

    /// Embedding rows round-trip bitwise through CSV, across magnitudes.
    #[test]
    fn embedding_csv_roundtrips_bitwise(
        n in 2usize..=10,
        dim in 1usize..=4,
        seed in any::<u64>(),
        exp in -120i32..=120,
    ) {
        let space = euclidean_cloud(n, 2, seed).unwrap();
        let domain = seeded_subset(seed ^ 0xCAFE, n, 1);
        let mut rng = SplitMix64::new(seed ^ 0xF00D);
        let scale = 10.0f64.powi(exp);
        let values: Vec<Vec<f64>> = domain
            .iter()
            .map(|_| {
                (0..dim)
                    .map(|_| (rng.next_f64() * 2.0 - 1.0) * scale)
                    .collect()
            })
            .collect();
        let map = PointMap::new(domain, dim, values, 1.0, 1.0).unwrap();
        let text = write_embedding_csv(&space, &map);
        let back = read_embedding_csv(&text, &space).unwrap();
        prop_assert_eq!(back.domain(), map.domain());
        for p in map.domain().iter() {
            let a = map.value(p).unwrap();
            let b = back.value(p).unwrap();
            for (x, z) in a.iter().zip(b) {
                prop_assert_eq!(x.to_bits(), z.to_bits());
            }
        }
    }
}
