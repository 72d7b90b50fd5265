use holelab_core::mesh3::{
    ellipsoid, icosphere, load_off, parse_off, refine, save_off, scale_signed, write_off,
    GeometryPair, MeshError, TriMesh, Vec3,
};
use proptest::prelude::*;
use std::f64::consts::PI;

/// Closed, consistently wound, outward and non-degenerate, checked from
/// scratch rather than through the constructor.
fn assert_valid(m: &TriMesh) {
    use std::collections::HashMap;
    let mut edges: HashMap<(usize, usize), i32> = HashMap::new();
    for &[a, b, c] in m.triangles() {
        for (p, q) in [(a, b), (b, c), (c, a)] {
            *edges.entry((p, q)).or_default() += 1;
        }
    }
    for (&(p, q), &k) in &edges {
        assert_eq!(k, 1, "directed edge ({p}, {q}) used twice");
        assert_eq!(edges.get(&(q, p)), Some(&1), "edge ({p}, {q}) has no twin");
    }
    assert!(m.signed_volume() > 0.0);
    assert!(m.areas().iter().all(|&a| a > 0.0));
}

#[test]
fn generated_meshes_are_valid() {
    for s in 0..=4 {
        assert_valid(&icosphere(1.5, s).unwrap());
        assert_valid(&ellipsoid(1.0, 0.6, 0.3, s).unwrap());
    }
    assert_valid(&refine(&icosphere(1.0, 1).unwrap()).unwrap());
}

#[test]
fn area_and_volume_converge_at_second_order() {
    let r = 1.3;
    let mut prev: Option<(f64, f64, f64)> = None;
    for s in 1..=5 {
        let m = icosphere(r, s).unwrap();
        let h = m.mean_edge_length();
        let ea = (m.total_area() - 4.0 * PI * r * r).abs();
        let ev = (m.signed_volume() - 4.0 / 3.0 * PI * r.powi(3)).abs();
        if let Some((h0, a0, v0)) = prev {
            let pa = (a0 / ea).ln() / (h0 / h).ln();
            let pv = (v0 / ev).ln() / (h0 / h).ln();
            assert!(
                pa >= 1.9 && pv >= 1.9,
                "s={s}: area order {pa}, volume order {pv}"
            );
        }
        prev = Some((h, ea, ev));
    }
}

#[test]
fn malformed_off_is_rejected() {
    let open = "OFF\n4 2 0\n0 0 0\n1 0 0\n0 1 0\n0 0 1\n3 0 2 1\n3 0 1 3\n";
    assert!(matches!(parse_off(open), Err(MeshError::OpenSurface(_))));
    let inverted = write_off(&icosphere(1.0, 0).unwrap())
        .lines()
        .map(|l| {
            let f: Vec<&str> = l.split_whitespace().collect();
            if f.len() == 4 && f[0] == "3" {
                format!("3 {} {} {}", f[1], f[3], f[2])
            } else {
                l.to_string()
            }
        })
        .collect::<Vec<_>>()
        .join("\n");
    assert!(matches!(
        parse_off(&inverted),
        Err(MeshError::InvertedOrientation { .. })
    ));
    assert!(matches!(
        parse_off("OFF\n3 1 0\n0 0 0\n1 0 0\n"),
        Err(MeshError::Malformed { .. })
    ));
    assert!(matches!(
        parse_off("OFF\n3 1 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1 7\n"),
        Err(MeshError::IndexOutOfRange { .. })
    ));
}

#[test]
fn files_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("e.off");
    let m = ellipsoid(1.0, 0.8, 0.5, 2).unwrap();
    save_off(&m, &path).unwrap();
    let back = load_off(&path).unwrap();
    assert_eq!(back.triangles(), m.triangles());
    for (a, b) in back.vertices().iter().zip(m.vertices()) {
        assert!((a - b).norm() < 1e-15);
    }
    assert!(matches!(
        load_off(&dir.path().join("missing.off")),
        Err(MeshError::Io { .. })
    ));
}

#[test]
fn unit_pair_admissibility() {
    let pair = GeometryPair::new(icosphere(1.0, 2).unwrap(), icosphere(1.0, 2).unwrap()).unwrap();
    assert!(pair.eps_max > 0.9 && pair.eps_max < 1.0);
    assert!(pair.admissibility(0.5).admissible);
    assert!(pair.admissibility(-0.5).admissible);
    assert!(!pair.admissibility(0.999).admissible);
    // hole off-centre: origin outside the inner surface
    let shifted = TriMesh::new(
        icosphere(0.2, 1)
            .unwrap()
            .vertices()
            .iter()
            .map(|v| v + Vec3::new(0.5, 0.0, 0.0))
            .collect(),
        icosphere(0.2, 1).unwrap().triangles().to_vec(),
    )
    .unwrap();
    assert!(matches!(
        GeometryPair::new(shifted, icosphere(1.0, 1).unwrap()),
        Err(MeshError::OriginOutside("inner"))
    ));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn signed_scaling_round_trip(
        eps in prop_oneof![-3.0f64..-0.05, 0.05f64..3.0],
        a in 0.3f64..2.0,
        b in 0.3f64..2.0,
        c in 0.3f64..2.0,
        s in 0u32..=2,
    ) {
        let m = ellipsoid(a, b, c, s).unwrap();
        let scaled = scale_signed(&m, eps).unwrap();
        assert_valid(&scaled);
        prop_assert!((scaled.signed_volume() - eps.abs().powi(3) * m.signed_volume()).abs() < 1e-10 * m.signed_volume());
        let back = scale_signed(&scaled, 1.0 / eps).unwrap();
        prop_assert_eq!(back.triangles(), m.triangles());
        for (x, y) in back.vertices().iter().zip(m.vertices()) {
            prop_assert!((x - y).norm() < 1e-12);
        }
    }

    #[test]
    fn off_text_round_trip(r in 0.1f64..10.0, s in 0u32..=2) {
        let m = icosphere(r, s).unwrap();
        let back = parse_off(&write_off(&m)).unwrap();
        prop_assert_eq!(back.len(), m.len());
        prop_assert!((back.total_area() - m.total_area()).abs() < 1e-12 * m.total_area());
    }

    #[test]
    fn containment_matches_radius(r in 0.5f64..2.0, x in prop::collection::vec(-3.0f64..3.0, 3)) {
        let m = icosphere(r, 3).unwrap();
        let p = Vec3::new(x[0], x[1], x[2]);
        // the inscribed polyhedron lies between radii r cos(half edge angle) and r
        let inner = 0.995 * r;
        prop_assume!(p.norm() < inner || p.norm() > r);
        prop_assert_eq!(m.contains(&p), p.norm() < inner);
        let (d, _) = m.distance_to(&p);
        prop_assert!((d - (p.norm() - r).abs()).abs() < 0.01 * r);
    }
}
