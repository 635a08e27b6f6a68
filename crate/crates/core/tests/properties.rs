use inflab::fields::{Grid, ScalarField, SymMatrix2};
use inflab::geometry::{catalog, Point, Shape, ShapeKind};
use inflab::plaplace::radial_exact_p;
use inflab::ridge::{parse_cellset_dump, ridge_cells, CellSet};
use inflab::web::{profile_classical, profile_normalized};
use proptest::prelude::*;
use std::sync::{Arc, OnceLock};

const BOUNDARY_SAMPLES: usize = 100_000;

struct Sampled {
    shape: Shape,
    boundary: Vec<Point>,
}

fn sampled() -> &'static [Sampled] {
    static CELL: OnceLock<Vec<Sampled>> = OnceLock::new();
    CELL.get_or_init(|| {
        catalog::all()
            .into_iter()
            .map(|(_, shape)| {
                let boundary = shape.boundary_sample(BOUNDARY_SAMPLES).unwrap().into_iter().map(|(p, _)| p).collect();
                Sampled { shape, boundary }
            })
            .collect()
    })
}

fn in_bbox(shape: &Shape, u: f64, v: f64) -> Point {
    let (lo, hi) = shape.bbox();
    Point::new(lo.x + u * (hi.x - lo.x), lo.y + v * (hi.y - lo.y))
}

fn grids() -> &'static [(Arc<Grid>, CellSet)] {
    static CELL: OnceLock<Vec<(Arc<Grid>, CellSet)>> = OnceLock::new();
    CELL.get_or_init(|| {
        catalog::all()
            .into_iter()
            .map(|(_, s)| {
                let g = Grid::build(&s, s.inradius() / 32.0).unwrap();
                let r = ridge_cells(&g);
                (g, r)
            })
            .collect()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(336))]

    #[test]
    fn signed_distance_matches_boundary_samples(
        k in 0usize..7,
        pts in prop::collection::vec((0.0f64..1.0, 0.0f64..1.0), 64),
    ) {
        let s = &sampled()[k];
        let tol = s.shape.perimeter() / BOUNDARY_SAMPLES as f64 + 1e-9;
        for (u, v) in pts {
            let x = in_bbox(&s.shape, u, v);
            if !s.shape.contains(x) {
                continue;
            }
            let brute = s.boundary.iter().map(|b| b.dist(x)).fold(f64::INFINITY, f64::min);
            let sd = s.shape.signed_distance(x);
            prop_assert!((sd - brute).abs() <= tol, "{x:?}: sd {sd} vs sampled {brute}");
        }
    }
}

proptest! {
    #[test]
    fn signed_distance_is_one_lipschitz(k in 0usize..7, a in (0.0f64..1.0, 0.0f64..1.0), b in (0.0f64..1.0, 0.0f64..1.0)) {
        let s = &sampled()[k].shape;
        let x = in_bbox(s, a.0, a.1);
        let y = in_bbox(s, b.0, b.1);
        prop_assert!((s.signed_distance(x) - s.signed_distance(y)).abs() <= x.dist(y) + 1e-9);
    }

    #[test]
    fn footpoints_are_on_the_boundary(k in 0usize..7, u in 0.0f64..1.0, v in 0.0f64..1.0) {
        let s = &sampled()[k].shape;
        let x = in_bbox(s, u, v);
        prop_assume!(s.contains(x));
        let sd = s.signed_distance(x);
        let fp = s.footpoints(x, s.footpoint_tol()).unwrap();
        prop_assert!(!fp.points.is_empty());
        for p in &fp.points {
            prop_assert!(s.signed_distance(*p).abs() <= 1e-9);
            prop_assert!((p.dist(x) - sd).abs() <= s.footpoint_tol() + 1e-9);
        }
    }

    #[test]
    fn wide_footpoint_spread_lies_in_ridge_cells(k in 0usize..7, u in 0.0f64..1.0, v in 0.0f64..1.0) {
        let (g, ridge) = &grids()[k];
        let s = g.shape();
        let x = in_bbox(s, u, v);
        prop_assume!(s.contains(x));
        let (i, j) = match g.cell_at(x) {
            Some(c) if g.is_inside(c.0, c.1) => c,
            _ => return Ok(()),
        };
        let fp = s.footpoints(x, s.footpoint_tol()).unwrap();
        if fp.spread > 3.0 * g.h {
            prop_assert!(ridge.contains(g.index(i, j)), "{x:?} spread {} outside ridge", fp.spread);
        }
    }

    #[test]
    fn stadium_distance_is_rigid_motion_invariant(
        theta in 0.0f64..std::f64::consts::TAU,
        tx in -5.0f64..5.0,
        ty in -5.0f64..5.0,
        u in 0.0f64..1.0,
        v in 0.0f64..1.0,
    ) {
        let base = catalog::stadium();
        let t = Point::new(tx, ty);
        let moved = Shape::new(ShapeKind::Stadium {
            p1: Point::new(-2.0, 0.0).rotated(theta) + t,
            p2: Point::new(2.0, 0.0).rotated(theta) + t,
            b: 1.0,
        })
        .unwrap();
        let x = in_bbox(&base, u, v);
        let y = x.rotated(theta) + t;
        prop_assert!((base.signed_distance(x) - moved.signed_distance(y)).abs() <= 1e-12);
    }

    #[test]
    fn eigenvalues_match_trace_and_det(xx in -1e3f64..1e3, xy in -1e3f64..1e3, yy in -1e3f64..1e3) {
        let m = SymMatrix2::new(xx, xy, yy);
        let (lo, hi) = m.eigenvalues();
        let scale = 1.0 + xx.abs().max(xy.abs()).max(yy.abs());
        prop_assert!(lo <= hi);
        prop_assert!((lo + hi - m.trace()).abs() <= 1e-12 * scale);
        prop_assert!((lo * hi - m.det()).abs() <= 1e-12 * scale * scale);
    }

    #[test]
    fn stencils_reproduce_quadratics(c in prop::collection::vec(-3.0f64..3.0, 6)) {
        let g = Grid::build(&catalog::disk(), 1.0 / 16.0).unwrap();
        let q = |p: Point| c[0] + c[1] * p.x + c[2] * p.y + c[3] * p.x * p.x + c[4] * p.x * p.y + c[5] * p.y * p.y;
        let f = ScalarField::from_fn(&g, q);
        for j in 0..g.ny {
            for i in 0..g.nx {
                if !g.is_inside(i, j) || g.depth(i, j) < 2.0 * g.h {
                    continue;
                }
                let p = g.center(i, j);
                let (grad, hess) = f.derivatives(i, j).unwrap();
                prop_assert!((grad.x - (c[1] + 2.0 * c[3] * p.x + c[4] * p.y)).abs() <= 1e-10);
                prop_assert!((grad.y - (c[2] + c[4] * p.x + 2.0 * c[5] * p.y)).abs() <= 1e-10);
                prop_assert!((hess.xx - 2.0 * c[3]).abs() <= 1e-8);
                prop_assert!((hess.xy - c[4]).abs() <= 1e-8);
                prop_assert!((hess.yy - 2.0 * c[5]).abs() <= 1e-8);
            }
        }
    }

    #[test]
    fn field_dump_round_trips(vals in prop::collection::vec(prop::num::f64::NORMAL | prop::num::f64::ZERO, 1..64)) {
        let g = Grid::build(&catalog::disk(), 1.0 / 4.0).unwrap();
        let values: Vec<f64> = (0..g.len()).map(|k| vals[k % vals.len()]).collect();
        let f = ScalarField::new(g.clone(), values).unwrap();
        let dump = inflab::fields::FieldDump::parse(&f.to_dump()).unwrap();
        prop_assert_eq!((dump.nx, dump.ny), (g.nx, g.ny));
        for (a, b) in dump.values.iter().zip(f.values()) {
            prop_assert!(a.to_bits() == b.to_bits() || (a.is_nan() && b.is_nan()));
        }
    }

    #[test]
    fn cellset_dump_round_trips(bits in prop::collection::vec(any::<bool>(), 1..128)) {
        let g = Grid::build(&catalog::disk(), 1.0 / 8.0).unwrap();
        let members: Vec<bool> = (0..g.len()).map(|k| bits[k % bits.len()]).collect();
        let set = CellSet::new(&g, members).unwrap();
        let (header, cells) = parse_cellset_dump(&set.to_dump()).unwrap();
        prop_assert_eq!(header, g.header());
        let back: Vec<usize> = cells.iter().map(|&(i, j)| g.index(i, j)).collect();
        prop_assert_eq!(back, set.indices());
    }

    #[test]
    fn classical_profile_derivative(a in 0.5f64..4.0, frac in 0.05f64..0.95) {
        let d = frac * a.powi(3) / 3.0;
        let e = 1e-5 * a.powi(3);
        let fd = (profile_classical(d + e, a).unwrap() - profile_classical(d - e, a).unwrap()) / (2.0 * e);
        prop_assert!((fd - (a.powi(3) - 3.0 * d).cbrt()).abs() <= 1e-6);
    }

    #[test]
    fn normalized_profile_derivative(a in 0.5f64..4.0, frac in 0.05f64..0.95) {
        let d = frac * a;
        let e = 1e-4;
        let fd = (profile_normalized(d + e, a).unwrap() - profile_normalized(d - e, a).unwrap()) / (2.0 * e);
        prop_assert!((fd - (a - d)).abs() <= 1e-8);
    }

    #[test]
    fn profiles_increase_with_depth(a in 0.5f64..4.0, f1 in 0.0f64..1.0, f2 in 0.0f64..1.0) {
        let (lo, hi) = if f1 <= f2 { (f1, f2) } else { (f2, f1) };
        let dc = a.powi(3) / 3.0;
        prop_assert!(profile_classical(lo * dc, a).unwrap() <= profile_classical(hi * dc, a).unwrap());
        prop_assert!(profile_normalized(lo * a, a).unwrap() <= profile_normalized(hi * a, a).unwrap());
    }

    #[test]
    fn radial_solution_decreases_to_zero(big_r in 0.5f64..10.0, p in 1.5f64..64.0, n in 1u32..4, f1 in 0.0f64..1.0, f2 in 0.0f64..1.0) {
        let (lo, hi) = if f1 <= f2 { (f1, f2) } else { (f2, f1) };
        let a = radial_exact_p(lo * big_r, big_r, n, p).unwrap();
        let b = radial_exact_p(hi * big_r, big_r, n, p).unwrap();
        prop_assert!(a >= b && b >= 0.0);
        prop_assert_eq!(radial_exact_p(big_r, big_r, n, p).unwrap(), 0.0);
    }
}
