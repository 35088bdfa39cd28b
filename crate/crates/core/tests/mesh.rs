use dgviv_core::mesh::{generate_structured, BoundaryTag, Mesh, Neighbor, Rect};
use dgviv_core::refelem::build_tables;
use dgviv_core::Error;
use proptest::prelude::*;

const FAR: BoundaryTag = BoundaryTag::Farfield;

fn closure_residual(mesh: &Mesh) -> f64 {
    let mut worst: f64 = 0.0;
    for k in 0..mesh.num_elements() {
        let mut sum = [0.0; 2];
        for f in 0..3 {
            let n = mesh.outward_normal(k, f);
            let len = mesh.faces[mesh.element_faces[k][f]].length;
            sum[0] += len * n[0];
            sum[1] += len * n[1];
        }
        worst = worst.max(sum[0].abs()).max(sum[1].abs());
    }
    worst
}

#[test]
fn single_reference_triangle() {
    let mesh = Mesh::new(
        vec![[-1.0, -1.0], [1.0, -1.0], [-1.0, 1.0]],
        vec![[0, 1, 2]],
        &[([0, 1], FAR), ([1, 2], BoundaryTag::Wall), ([2, 0], FAR)],
    )
    .unwrap();
    assert_eq!(mesh.faces.len(), 3);
    assert!(mesh.faces.iter().all(|f| f.is_boundary()));
    assert_eq!(mesh.geometry[0].area, 2.0);
    assert_eq!(mesh.geometry[0].det, 1.0);
    assert_eq!(mesh.geometry[0].inverse, [[1.0, 0.0], [0.0, 1.0]]);
    assert_eq!(mesh.faces[1].right, Neighbor::Boundary(BoundaryTag::Wall));
    assert!(closure_residual(&mesh) < 1e-12);
}

#[test]
fn two_triangles_share_one_face() {
    let v = vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];
    let edges = [([0, 1], FAR), ([1, 2], FAR), ([2, 3], FAR), ([3, 0], FAR)];
    // second triangle given clockwise on purpose
    let mesh = Mesh::new(v, vec![[0, 1, 2], [0, 2, 3]], &edges).unwrap();
    let interior: Vec<_> = mesh.faces.iter().filter(|f| !f.is_boundary()).collect();
    assert_eq!(interior.len(), 1);
    assert_eq!(mesh.faces.len() - interior.len(), 4);
    assert_eq!(interior[0].left, 0);
    let n = interior[0].normal;
    assert!(
        (n[0] + std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15
            && (n[1] - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15
    );
    assert!(mesh.geometry.iter().all(|g| g.area > 0.0));
}

#[test]
fn connectivity_errors() {
    let v = vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];
    let partial = [([0, 1], FAR), ([1, 2], FAR), ([2, 3], FAR)];
    assert!(matches!(
        Mesh::new(v.clone(), vec![[0, 1, 2], [0, 2, 3]], &partial),
        Err(Error::UntaggedBoundary(0, 3))
    ));

    // A fan of three triangles on one edge.
    let v3 = vec![[0.0, 0.0], [1.0, 0.0], [0.5, 1.0], [0.5, -1.0], [0.5, 2.0]];
    let tris = vec![[0, 1, 2], [0, 3, 1], [0, 1, 4]];
    assert!(matches!(
        Mesh::new(v3, tris, &[]),
        Err(Error::OverSharedEdge(0, 1))
    ));

    // Vertex 4 splits edge (0, 2) of the first triangle but not the second.
    let vh = vec![[0.0, 0.0], [2.0, 0.0], [0.0, 2.0], [-2.0, 2.0], [0.0, 1.0]];
    let tris = vec![[0, 1, 2], [0, 4, 3], [4, 2, 3]];
    assert!(matches!(
        Mesh::new(vh, tris, &[]),
        Err(Error::HangingNode { .. })
    ));

    let degenerate = Mesh::new(
        vec![[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]],
        vec![[0, 1, 2]],
        &[],
    );
    assert_eq!(degenerate, Err(Error::DegenerateElement(0)));
    assert_eq!(
        generate_structured(
            1,
            1,
            Rect {
                x0: 0.0,
                x1: 0.0,
                y0: 0.0,
                y1: 1.0
            },
            false
        ),
        Err(Error::DegenerateDomain)
    );
}

#[test]
fn structured_counts() {
    let m = generate_structured(1, 1, Rect::UNIT, false).unwrap();
    assert_eq!(m.num_elements(), 2);
    let m = generate_structured(2, 2, Rect::UNIT, false).unwrap();
    assert_eq!(m.num_elements(), 8);
    assert_eq!(m.faces.iter().filter(|f| !f.is_boundary()).count(), 8);
    let total: f64 = m.geometry.iter().map(|g| g.area).sum();
    assert!((total - 1.0).abs() < 1e-14);
}

#[test]
fn skew_layer_flattens_cells() {
    let regular = generate_structured(8, 8, Rect::UNIT, false).unwrap();
    let skew = generate_structured(8, 8, Rect::UNIT, true).unwrap();
    let reg_rho = regular.geometry[0].inradius;
    let min_rho = skew
        .geometry
        .iter()
        .map(|g| g.inradius)
        .fold(f64::INFINITY, f64::min);
    assert!(min_rho < 0.25 * reg_rho, "{min_rho} vs {reg_rho}");
    let total: f64 = skew.geometry.iter().map(|g| g.area).sum();
    assert!((total - 1.0).abs() < 1e-13);
}

#[test]
fn trace_nodes_coincide() {
    let t = build_tables(4, 8).unwrap();
    let mesh = generate_structured(
        3,
        2,
        Rect {
            x0: -1.0,
            x1: 2.0,
            y0: 0.5,
            y1: 1.5,
        },
        true,
    )
    .unwrap();
    let p = t.p;
    for face in mesh.faces.iter() {
        if let Neighbor::Element { elem, local_face } = face.right {
            for k in 0..=p {
                let nl = t.nodes.face_index[face.left_face][k];
                let nr = t.nodes.face_index[local_face][p - k];
                let xl = mesh.map_point(face.left, t.nodes.points[nl]);
                let xr = mesh.map_point(elem, t.nodes.points[nr]);
                assert!((xl[0] - xr[0]).abs() < 1e-12 && (xl[1] - xr[1]).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn translation_keeps_geometry() {
    let mesh = generate_structured(4, 3, Rect::UNIT, true).unwrap();
    assert_eq!(mesh.translated([0.0, 0.0]), mesh);
    let moved = mesh.translated([0.0, 1.0]);
    assert_eq!(moved.geometry, mesh.geometry);
    assert_eq!(moved.faces, mesh.faces);
    let back = moved.translated([0.0, -1.0]);
    for (a, b) in back.vertices.iter().zip(&mesh.vertices) {
        assert!((a[0] - b[0]).abs() <= 1e-15 && (a[1] - b[1]).abs() <= 1e-15);
    }
    let x = moved.map_point(5, [0.2, -0.4]);
    let x0 = mesh.map_point(5, [0.2, -0.4]);
    assert!((x[1] - x0[1] - 1.0).abs() < 1e-14);
}

#[test]
fn locate_and_inverse_map() {
    let mesh = generate_structured(5, 5, Rect::UNIT, false).unwrap();
    let (k, rs) = mesh.locate([0.33, 0.71], 1e-12).unwrap();
    let x = mesh.map_point(k, rs);
    assert!((x[0] - 0.33).abs() < 1e-14 && (x[1] - 0.71).abs() < 1e-14);
    assert!(mesh.locate([1.5, 0.5], 1e-12).is_none());
}

proptest! {
    #[test]
    fn perturbed_meshes_are_closed(nx in 1usize..6, ny in 1usize..6, seed in prop::collection::vec(-0.3..0.3f64, 72)) {
        let base = generate_structured(nx, ny, Rect::UNIT, false).unwrap();
        let (hx, hy) = (1.0 / nx as f64, 1.0 / ny as f64);
        let mut v = base.vertices.clone();
        for (n, p) in v.iter_mut().enumerate() {
            let interior = p[0] > 0.0 && p[0] < 1.0 && p[1] > 0.0 && p[1] < 1.0;
            if interior {
                p[0] += seed[(2 * n) % 72] * hx;
                p[1] += seed[(2 * n + 1) % 72] * hy;
            }
        }
        let edges: Vec<_> = base.faces.iter().filter(|f| f.is_boundary()).map(|f| {
            let t = base.triangles[f.left];
            ([t[f.left_face], t[(f.left_face + 1) % 3]], FAR)
        }).collect();
        let mesh = Mesh::new(v, base.triangles.clone(), &edges).unwrap();
        prop_assert!(closure_residual(&mesh) < 1e-12);
        for g in &mesh.geometry {
            prop_assert!(g.area > 0.0);
            prop_assert!((g.det * 2.0 - g.area).abs() < 1e-15);
        }
        let interior = mesh.faces.iter().filter(|f| !f.is_boundary()).count();
        prop_assert_eq!(3 * mesh.num_elements(), 2 * interior + (mesh.faces.len() - interior));
    }
}
