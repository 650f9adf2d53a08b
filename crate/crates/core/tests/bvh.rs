use proptest::prelude::*;

use streetsynth::geometry::{intersect_triangle, Bvh, InstanceId, MaterialId, Ray, TriangleMesh};
use streetsynth::math::Vec3;
use streetsynth::taxonomy::ClassId;

fn vec3() -> impl Strategy<Value = Vec3> {
    (-5.0f64..5.0, -5.0f64..5.0, -5.0f64..5.0).prop_map(|(x, y, z)| Vec3::new(x, y, z))
}

fn soup() -> impl Strategy<Value = Vec<[Vec3; 3]>> {
    prop::collection::vec((vec3(), vec3(), vec3()).prop_map(|(a, b, c)| [a, b, c]), 1..80)
}

fn build(tris: &[[Vec3; 3]]) -> Bvh {
    let positions = tris.iter().flatten().copied().collect();
    let indices = (0..tris.len() as u32).map(|i| [3 * i, 3 * i + 1, 3 * i + 2]).collect();
    let mesh = TriangleMesh::new(positions, vec![], indices, MaterialId(0), InstanceId(0), ClassId::Car).unwrap();
    Bvh::build(vec![mesh])
}

proptest! {
    #[test]
    fn nearest_matches_a_linear_scan(tris in soup(), o in vec3(), d in vec3()) {
        prop_assume!(d.length() > 1e-3);
        let bvh = build(&tris);
        let ray = Ray::new(o * 2.0, d.normalized());
        let scan = tris
            .iter()
            .enumerate()
            .filter_map(|(i, v)| intersect_triangle(&ray, v[0], v[1], v[2]).map(|(t, _)| (i as u32, t)))
            .min_by(|a, b| a.1.total_cmp(&b.1));
        let hit = bvh.nearest(&ray);
        prop_assert_eq!(hit.is_some(), scan.is_some());
        if let (Some(h), Some((_, t))) = (hit, scan) {
            prop_assert_eq!(h.t, t);
        }
        prop_assert_eq!(bvh.occluded(&ray), scan.is_some());
    }

    #[test]
    fn every_node_bounds_its_subtree(tris in soup()) {
        let bvh = build(&tris);
        let nodes = bvh.nodes();
        let mut seen = vec![0u32; tris.len()];
        let mut stack = vec![0usize];
        while let Some(i) = stack.pop() {
            let b = nodes[i].bounds();
            if let Some((l, r)) = nodes[i].children(i) {
                prop_assert!(b.contains(&nodes[l].bounds()) && b.contains(&nodes[r].bounds()));
                stack.extend([l, r]);
            } else {
                for slot in nodes[i].primitive_range().unwrap() {
                    let p = bvh.leaf_primitive(slot);
                    seen[p as usize] += 1;
                    for v in bvh.triangle(p) {
                        prop_assert!(b.contains(&streetsynth::geometry::Aabb::new(v, v)));
                    }
                }
            }
        }
        // Each primitive sits in exactly one leaf.
        prop_assert!(seen.iter().all(|&n| n == 1));
    }
}
