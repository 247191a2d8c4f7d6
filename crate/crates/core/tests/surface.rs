use num_complex::Complex64;
use num_integer::Integer;
use proptest::prelude::*;
use teich_lab::surface::{builtin, square_torus, SystoleNorm};
use teich_lab::SL2Matrix;

/// Primitive vectors `m(a, b)` with max-norm ≤ `bound`, one per `±` pair.
fn primitive_images(m: &SL2Matrix, bound: f64) -> Vec<Complex64> {
    let mut out = Vec::new();
    let reach = 60;
    for a in -reach..=reach {
        for b in 0..=reach {
            if (b == 0 && a <= 0) || (a as i64).gcd(&(b as i64)) != 1 {
                continue;
            }
            let v = m.apply(Complex64::new(a as f64, b as f64));
            if SystoleNorm::Max.of(v) <= bound {
                out.push(v);
            }
        }
    }
    out
}

fn arb_matrix() -> impl Strategy<Value = SL2Matrix> {
    (-1.0f64..1.0, -1.0f64..1.0, -0.5f64..0.5).prop_map(|(t, s, u)| {
        SL2Matrix::geodesic(t) * SL2Matrix::horocycle(s) * SL2Matrix::opposite_horocycle(u)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn torus_connections_are_primitive_lattice_vectors(m in arb_matrix(), bound in 1.0f64..4.0) {
        let x = square_torus().act(&m).unwrap();
        let found = x.saddle_connections(bound).unwrap();
        let expected = primitive_images(&m, bound);
        prop_assert_eq!(found.len(), expected.len());
        for v in &expected {
            prop_assert!(found.iter().any(|c| (c.holonomy - v).norm() < 1e-9 || (c.holonomy + v).norm() < 1e-9));
        }
    }

    #[test]
    fn rotation_distorts_the_max_norm_systole_by_at_most_root_two(theta in 0.0f64..std::f64::consts::TAU) {
        for name in ["square_torus", "regular_octagon", "double_pentagon"] {
            let x = builtin(name).unwrap();
            let l = x.systole().unwrap();
            let lr = x.act(&SL2Matrix::rotation(theta)).unwrap().systole().unwrap();
            let r = std::f64::consts::SQRT_2 * (1.0 + 1e-9);
            prop_assert!(lr <= r * l && l <= r * lr, "{name}: {l} vs {lr}");
        }
    }

    #[test]
    fn holonomies_move_with_the_matrix(m in arb_matrix()) {
        let x = builtin("regular_octagon").unwrap();
        let base = x.saddle_connections(1.5).unwrap();
        let row_sum = (m.a.abs() + m.b.abs()).max(m.c.abs() + m.d.abs());
        let moved = x.act(&m).unwrap().saddle_connections(1.5 * row_sum * (1.0 + 1e-9)).unwrap();
        for c in &base {
            let w = m.apply(c.holonomy);
            prop_assert!(moved.iter().any(|d| (d.holonomy - w).norm() < 1e-8 || (d.holonomy + w).norm() < 1e-8));
        }
    }
}
