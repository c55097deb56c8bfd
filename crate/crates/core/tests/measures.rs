mod common;

use approx::assert_relative_eq;
use measure_control::{Atom, DiscreteMeasure, Error, Grid, ScalarField};
use proptest::prelude::*;

fn atoms_2d() -> impl Strategy<Value = Vec<Atom>> {
    proptest::collection::vec((0.01f64..0.99, 0.01f64..0.99, -5.0f64..5.0), 0..12)
        .prop_map(|v| v.into_iter().map(|(x, y, w)| Atom { x: [x, y, 0.0], w }).collect())
}

fn measure_2d(grid: Grid) -> impl Strategy<Value = DiscreteMeasure> {
    (atoms_2d(), proptest::option::of(proptest::collection::vec(-3.0f64..3.0, grid.len()))).prop_map(
        move |(atoms, density)| {
            let density = density.map(|v| ScalarField::from_values(grid, v).unwrap());
            DiscreteMeasure::new(2, atoms, density).unwrap()
        },
    )
}

#[test]
fn tv_examples() {
    let grid = Grid::new(2, 3).unwrap();
    let m = DiscreteMeasure::new(
        2,
        vec![Atom { x: [0.25, 0.25, 0.0], w: 3.0 }, Atom { x: [0.5, 0.75, 0.0], w: -2.0 }],
        None,
    )
    .unwrap();
    assert_eq!(m.tv_norm(), 5.0);
    let d = DiscreteMeasure::from_density(ScalarField::constant(grid, 1.0));
    assert_relative_eq!(d.tv_norm(), 9.0 / 16.0);
}

#[test]
fn rasterize_dirac_on_node() {
    let grid = Grid::new(2, 3).unwrap();
    let f = DiscreteMeasure::dirac(2, &[0.5, 0.5], 1.0).unwrap().rasterize(&grid).unwrap();
    assert_eq!(f.values()[4], 16.0);
    assert_eq!(f.values().iter().filter(|&&v| v != 0.0).count(), 1);
}

#[test]
fn rasterize_outside_box_fails() {
    let grid = Grid::new(2, 3).unwrap();
    let m = DiscreteMeasure::new(2, vec![Atom { x: [1.2, 0.5, 0.0], w: 1.0 }], None);
    assert!(match m {
        Err(_) => true,
        Ok(m) => matches!(m.rasterize(&grid), Err(Error::InvalidMeasure(_))),
    });
}

#[test]
fn under_resolved_mollifier_is_rejected() {
    let grid = Grid::new(2, 15).unwrap();
    let m = DiscreteMeasure::dirac(2, &[0.5, 0.5], 1.0).unwrap();
    assert!(matches!(m.mollify(grid.h(), &grid), Err(Error::UnderResolvedKernel { .. })));
}

#[test]
fn potential_of_unit_dirac() {
    let m = DiscreteMeasure::dirac(3, &[0.5, 0.5, 0.5], 1.0).unwrap();
    assert_relative_eq!(m.newtonian_potential(&[1.5, 0.5, 0.5]).unwrap(), 0.07957747154594767, max_relative = 1e-15);
    assert!(matches!(m.newtonian_potential(&[0.5, 0.5, 0.5]), Err(Error::SingularEvaluation)));
    let flat = DiscreteMeasure::dirac(2, &[0.5, 0.5], 1.0).unwrap();
    assert!(matches!(flat.newtonian_potential(&[0.1, 0.1]), Err(Error::UnsupportedDimension { .. })));
}

proptest! {
    #[test]
    fn jordan_parts_add_up(m in measure_2d(Grid::new(2, 5).unwrap())) {
        let (pos, neg) = m.jordan_decompose();
        prop_assert!(pos.is_nonnegative() && neg.is_nonnegative());
        let sum = pos.tv_norm() + neg.tv_norm();
        prop_assert!((sum - m.tv_norm()).abs() <= 1e-12 * sum.max(1.0));
        prop_assert!((pos.total_mass() - neg.total_mass() - m.total_mass()).abs() <= 1e-12 * sum.max(1.0));
    }

    #[test]
    fn rasterize_preserves_mass_and_bounds_tv(m in measure_2d(Grid::new(2, 5).unwrap()), n in 3usize..12) {
        let grid = Grid::new(2, n).unwrap();
        let f = m.rasterize(&grid).unwrap();
        let scale = m.tv_norm().max(1.0);
        prop_assert!((f.integral() - m.total_mass()).abs() <= 1e-10 * scale);
        prop_assert!(f.lp_norm(1.0).unwrap() <= m.tv_norm() + 1e-10 * scale);
    }

    #[test]
    fn mollify_preserves_mass_and_bounds_tv(m in measure_2d(Grid::new(2, 5).unwrap()), cells in 2.0f64..5.0) {
        let grid = Grid::new(2, 17).unwrap();
        let rho = m.mollify(cells * grid.h(), &grid).unwrap();
        let scale = m.tv_norm().max(1.0);
        prop_assert!((rho.integral() - m.total_mass()).abs() <= 1e-10 * scale);
        prop_assert!(rho.lp_norm(1.0).unwrap() <= m.tv_norm() + 1e-10 * scale);
    }

    #[test]
    fn pairing_is_bilinear(
        ms in proptest::collection::vec(measure_2d(Grid::new(2, 6).unwrap()), 2),
        phis in proptest::collection::vec(common::field_on(Grid::new(2, 6).unwrap(), 3.0), 2),
        a in -2.0f64..2.0,
        b in -2.0f64..2.0,
    ) {
        let (m1, m2) = (&ms[0], &ms[1]);
        let mut atoms = m1.scale(a).atoms().to_vec();
        atoms.extend_from_slice(m2.scale(b).atoms());
        let density = match (m1.density(), m2.density()) {
            (Some(d1), Some(d2)) => Some(d1.scale(a).add(&d2.scale(b))),
            (Some(d1), None) => Some(d1.scale(a)),
            (None, Some(d2)) => Some(d2.scale(b)),
            (None, None) => None,
        };
        let combo = DiscreteMeasure::new(2, atoms, density).unwrap();
        let phi = &phis[0];
        let lhs = combo.pairing(phi).unwrap();
        let rhs = a * m1.pairing(phi).unwrap() + b * m2.pairing(phi).unwrap();
        let scale = 1.0 + (m1.tv_norm() + m2.tv_norm()) * phi.max_abs() * 4.0;
        prop_assert!((lhs - rhs).abs() <= 1e-10 * scale);
        let psi = phis[0].add(&phis[1].scale(a));
        let lhs = m1.pairing(&psi).unwrap();
        let rhs = m1.pairing(&phis[0]).unwrap() + a * m1.pairing(&phis[1]).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-10 * scale);
    }

    #[test]
    fn potential_decreases_with_distance(r1 in 0.05f64..2.0, dr in 0.01f64..2.0, w in 0.1f64..10.0) {
        let m = DiscreteMeasure::dirac(3, &[0.5, 0.5, 0.5], w).unwrap();
        let near = m.newtonian_potential(&[0.5 + r1, 0.5, 0.5]).unwrap();
        let far = m.newtonian_potential(&[0.5, 0.5 + r1 + dr, 0.5]).unwrap();
        prop_assert!(far < near);
        prop_assert!((near * r1 * 4.0 * std::f64::consts::PI - w).abs() <= 1e-12 * w);
    }
}
