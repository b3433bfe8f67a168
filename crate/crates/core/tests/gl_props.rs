use endslab::gl_partition::{build_gl_partition, verify_gl_partition, FiniteMetricSpace};
use endslab::WordMetricSpace;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Integer points in the ℓ¹ plane, grouped in 1..=4 clusters of small spread
/// whose centres sit at log-uniform distances up to 10⁶.
fn clustered(rng: &mut ChaCha8Rng, n: usize) -> WordMetricSpace {
    let clusters = rng.random_range(1..=4usize.min(n));
    let centres: Vec<(i64, i64)> = (0..clusters)
        .map(|_| {
            let scale = 10f64.powf(rng.random_range(0.0..6.0)) as i64;
            (rng.random_range(-scale..=scale), rng.random_range(-scale..=scale))
        })
        .collect();
    let spread = rng.random_range(2..=20i64);
    let mut pts: Vec<(i64, i64)> = Vec::new();
    while pts.len() < n {
        let (cx, cy) = centres[rng.random_range(0..clusters)];
        let p = (cx + rng.random_range(-spread..=spread), cy + rng.random_range(-spread..=spread));
        if !pts.contains(&p) {
            pts.push(p);
        }
    }
    space_of(&pts)
}

fn space_of(pts: &[(i64, i64)]) -> WordMetricSpace {
    let dist = pts
        .iter()
        .map(|p| pts.iter().map(|q| (p.0 - q.0).unsigned_abs() + (p.1 - q.1).unsigned_abs()).collect())
        .collect();
    FiniteMetricSpace::new((0..pts.len()).map(|i| format!("p{i}")).collect(), dist).unwrap()
}

#[test]
fn clustered_instances_verify_and_terminate() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut nontrivial = 0;
    for trial in 0..2000 {
        let n = rng.random_range(1..=12);
        let a = rng.random_range(3..=5);
        let space = clustered(&mut rng, n);
        let p = build_gl_partition(&space, a).unwrap();
        assert!(p.k <= n + 1, "trial {trial}: k = {} for n = {n}", p.k);
        assert!(p.growth_bound_holds());
        let threshold = (2 * a as u64 + 1).pow(n as u32 + 2);
        if space.diameter() > threshold {
            assert!(!p.trivial, "trial {trial}");
        }
        if !p.trivial {
            nontrivial += 1;
            let rep = verify_gl_partition(&space, &p, a);
            assert!(rep.passes, "trial {trial}: {rep:?}");
        }
    }
    assert!(nontrivial > 500, "{nontrivial}");
}

#[test]
fn far_apart_instances_are_nontrivial() {
    // n ≤ 3, a = 3: threshold 7^(n+2) ≤ 16807.
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..500 {
        let n = rng.random_range(2..=3);
        let threshold = 7u64.pow(n as u32 + 2) as i64;
        let mut xs: Vec<i64> = (0..n - 1).map(|_| rng.random_range(0..threshold)).collect();
        xs.push(threshold + 1 + rng.random_range(0..threshold));
        xs.sort();
        xs.dedup();
        let pts: Vec<(i64, i64)> = xs.iter().map(|&x| (x, 0)).collect();
        let space = space_of(&pts);
        let p = build_gl_partition(&space, 3).unwrap();
        assert!(!p.trivial, "{xs:?}");
        assert!(verify_gl_partition(&space, &p, 3).passes);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn certificate_and_relabelling(seed in any::<u64>(), n in 2usize..10, a in 3u32..6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let space = clustered(&mut rng, n);
        let p = build_gl_partition(&space, a).unwrap();
        if !p.trivial {
            for block in &p.members {
                prop_assert!(space.set_diameter(block) <= p.scale);
                let rest: Vec<usize> = (0..n).filter(|i| !block.contains(i)).collect();
                let sep = rest.iter().map(|&y| space.distance_to_set(y, block).unwrap()).min().unwrap();
                prop_assert!(sep > a as u64 * p.scale);
            }
            let rep = verify_gl_partition(&space, &p, a);
            prop_assert!(rep.passes);
            // Verifying the same blocks twice gives the same report.
            prop_assert_eq!(verify_gl_partition(&space, &p, a), rep);
        }

        // Reverse the point order and relabel; the blocks must map across.
        let perm: Vec<usize> = (0..n).rev().collect();
        let labels: Vec<String> = perm.iter().map(|&i| format!("q{i}")).collect();
        let dist = perm.iter().map(|&i| perm.iter().map(|&j| space.distance(i, j)).collect()).collect();
        let permuted = FiniteMetricSpace::new(labels, dist).unwrap();
        let q = build_gl_partition(&permuted, a).unwrap();
        let canon = |blocks: &[Vec<String>], prefix: char| {
            let mut out: Vec<Vec<String>> = blocks
                .iter()
                .map(|b| {
                    let mut b: Vec<String> = b.iter().map(|l| l.replacen(prefix, "x", 1)).collect();
                    b.sort();
                    b
                })
                .collect();
            out.sort();
            out
        };
        prop_assert_eq!(canon(&p.blocks, 'p'), canon(&q.blocks, 'q'));
        prop_assert_eq!((p.k, p.scale, p.trivial), (q.k, q.scale, q.trivial));
    }
}
