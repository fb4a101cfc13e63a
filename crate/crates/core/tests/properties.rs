use gptlab_core::composite::{max_tensor, min_tensor};
use gptlab_core::geometry::Cone;
use gptlab_core::infotasks::{is_nondisturbing, nondisturbing_basis};
use gptlab_core::statespace::{base_norm, is_positive_map, make_classical, make_polygon, polygon_from_vertices};
use gptlab_core::{Matrix, Rat, Scalar, StateSpace};
use proptest::prelude::*;

fn r(v: i64) -> Rat {
    Rat::from_i64(v)
}

/// Random small integer points, at least three of them not collinear.
fn planar_points() -> impl Strategy<Value = Vec<(i64, i64)>> {
    prop::collection::vec((-6i64..=6, -6i64..=6), 3..9).prop_filter("collinear", |pts| {
        let (x0, y0) = pts[0];
        pts.iter().any(|&(x1, y1)| {
            pts.iter()
                .any(|&(x2, y2)| (x1 - x0) * (y2 - y0) != (x2 - x0) * (y1 - y0))
        })
    })
}

fn polytope(pts: &[(i64, i64)]) -> StateSpace<Rat> {
    let rays: Vec<Vec<Rat>> = pts.iter().map(|&(x, y)| vec![r(x), r(y), r(1)]).collect();
    StateSpace::from_rays("random", &rays, vec![r(0), r(0), r(1)]).unwrap()
}

fn matrix(rows: &[Vec<i64>]) -> Matrix<Rat> {
    Matrix::from_rows(
        &rows
            .iter()
            .map(|row| row.iter().map(|&x| r(x)).collect())
            .collect::<Vec<_>>(),
    )
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn dual_is_an_involution(pts in planar_points()) {
        let cone = polytope(&pts).cone().clone();
        prop_assert!(cone.dual().dual().same_rays(&cone));
    }

    #[test]
    fn hull_keeps_only_extreme_points(pts in planar_points()) {
        let space = polytope(&pts);
        // every input point is a convex combination of the vertices, and each
        // vertex is one of the inputs
        for &(x, y) in &pts {
            prop_assert!(space.contains_state(&[r(x), r(y), r(1)]));
        }
        for v in space.omega_vertices() {
            prop_assert!(pts.iter().any(|&(x, y)| v[..] == [r(x), r(y), r(1)]));
        }
    }

    #[test]
    fn classical_base_norm_is_l1(v in prop::collection::vec(-20i64..=20, 1..5)) {
        let space = make_classical::<Rat>(v.len()).unwrap();
        let x: Vec<Rat> = v.iter().map(|&a| r(a)).collect();
        let l1 = r(v.iter().map(|a| a.abs()).sum());
        prop_assert_eq!(base_norm(&space, &x).unwrap(), l1);
    }

    #[test]
    fn base_norm_is_a_norm(a in -5i64..=5, b in -5i64..=5, c in -5i64..=5, k in 0usize..4) {
        let sq = make_polygon::<Rat>(4).unwrap();
        let v = vec![r(a), r(b), r(c)];
        let w = sq.vertex(k).to_vec();
        let n = |x: &[Rat]| base_norm(&sq, x).unwrap();
        prop_assert_eq!(n(&w), r(1));
        let neg: Vec<Rat> = v.iter().map(|x| -x.clone()).collect();
        prop_assert_eq!(n(&neg), n(&v));
        let sum: Vec<Rat> = v.iter().zip(&w).map(|(x, y)| x.clone() + y.clone()).collect();
        prop_assert!(n(&sum) <= n(&v) + r(1));
        let twice: Vec<Rat> = v.iter().map(|x| x.clone() * r(2)).collect();
        prop_assert_eq!(n(&twice), n(&v) * r(2));
    }

    #[test]
    fn positive_maps_compose(t in prop::collection::vec(0i64..4, 9), u in prop::collection::vec(0i64..4, 9)) {
        // nonnegative matrices are exactly the positive maps of the orthant
        let c3 = make_classical::<Rat>(3).unwrap();
        let t = matrix(&t.chunks(3).map(<[i64]>::to_vec).collect::<Vec<_>>());
        let u = matrix(&u.chunks(3).map(<[i64]>::to_vec).collect::<Vec<_>>());
        prop_assert!(is_positive_map(&t, &c3, &c3));
        prop_assert!(is_positive_map(&u.mul(&t), &c3, &c3));
    }

    #[test]
    fn orthant_nondisturbing_iff_diagonal(t in prop::collection::vec(0i64..3, 9)) {
        let cone = Cone::<Rat>::orthant(3).unwrap();
        let m = matrix(&t.chunks(3).map(<[i64]>::to_vec).collect::<Vec<_>>());
        let diagonal = (0..3).all(|i| (0..3).all(|j| i == j || t[3 * i + j] == 0));
        prop_assert_eq!(is_nondisturbing(&cone, &m).unwrap().is_nondisturbing(), diagonal);
    }
}

#[test]
fn nondisturbing_basis_is_a_resolution_of_identity() {
    let sq = make_polygon::<Rat>(4).unwrap();
    let sum = sq.direct_sum(&make_classical(2).unwrap()).unwrap();
    let basis = nondisturbing_basis(sum.cone()).unwrap();
    assert_eq!(basis.len(), 3);
    let mut total = Matrix::zeros(5, 5);
    for (i, p) in basis.iter().enumerate() {
        total = total.add(&p.matrix);
        for (j, q) in basis.iter().enumerate() {
            let expected = if i == j { p.matrix.clone() } else { Matrix::zeros(5, 5) };
            assert_eq!(p.matrix.mul(&q.matrix), expected);
        }
    }
    assert_eq!(total, Matrix::identity(5));
}

#[test]
fn min_inside_max_for_random_polygons() {
    let tri = polygon_from_vertices::<Rat>("t", &[[r(0), r(0)], [r(2), r(0)], [r(0), r(1)]]).unwrap();
    let pent = polygon_from_vertices::<Rat>(
        "p",
        &[[r(0), r(0)], [r(2), r(0)], [r(3), r(1)], [r(1), r(3)], [r(-1), r(1)]],
    )
    .unwrap();
    let min = min_tensor(&tri, &pent).unwrap();
    let max = max_tensor(&tri, &pent).unwrap();
    assert!(min.space().cone().is_subcone_of(max.space().cone()));
    // a simplex factor makes the two composites coincide
    assert!(min.space().cone().same_rays(max.space().cone()));
    let min = min_tensor(&pent, &pent).unwrap();
    let max = max_tensor(&pent, &pent).unwrap();
    assert!(min.space().cone().is_subcone_of(max.space().cone()));
    assert!(max.space().cone().num_rays() > min.space().cone().num_rays());
}
