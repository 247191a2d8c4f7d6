use teich_lab::rational::{self, Rational};
use teich_lab::surface::{SaddleSearch, SystoleNorm};
use teich_lab::suspension::{first_return_oracle, trace_first_return};
use teich_lab::{Error, Iet, SuspensionData};

fn shipped() -> Vec<SuspensionData> {
    SuspensionData::shipped()
}

#[test]
fn first_return_reproduces_the_exchange() {
    for s in shipped() {
        let x = s.suspend().unwrap();
        let tr = s.base_transversal();
        let emp = first_return_oracle(&x, &tr, 1000).unwrap();
        let heights = s.heights();
        for sample in &emp.samples {
            let exact = rational::from_f64(sample.param).unwrap();
            let image = rational::to_f64(&s.iet().evaluate(&exact).unwrap());
            assert!((image - sample.image).abs() < 1e-8, "{s:?} at {}", sample.param);
            let letter = s.iet().letter_of(&exact).unwrap();
            assert!((sample.return_time - heights[letter - 1]).abs() < 1e-8);
        }
        let betas: Vec<f64> = s.iet().betas()[..s.iet().d()]
            .iter()
            .map(rational::to_f64)
            .collect();
        assert_eq!(emp.breakpoints.len(), betas.len());
        for (a, b) in emp.breakpoints.iter().zip(&betas) {
            assert!((a - b).abs() < 1e-8);
        }
        assert!(emp.pieces.len() <= s.iet().d());
    }
}

#[test]
fn trajectory_into_a_cone_point_is_reported() {
    let s = &shipped()[0];
    let x = s.suspend().unwrap();
    let beta1 = rational::to_f64(&s.iet().betas()[1]);
    let r = trace_first_return(&x, &s.base_transversal(), beta1);
    assert!(matches!(r, Err(Error::SingularTrajectory { .. })));
}

#[test]
fn shear_acts_on_lengths() {
    for s in shipped() {
        let eps0 = s.max_symmetric_shear();
        assert!(eps0 > 0.0);
        let shears: Vec<f64> = (-10..=10).map(|k| k as f64 / 10.5 * eps0).collect();
        let report = s.verify_local_product(&shears).unwrap();
        assert!(report.max_discrepancy <= 1e-9, "{report:?}");
        assert!(report.samples.iter().all(|x| x.connections > 0));
        assert!(matches!(
            s.verify_local_product(&[2.0 * eps0 + 1.0]),
            Err(Error::Precondition(_))
        ));
    }
}

#[test]
fn stratum_depends_only_on_permutation() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
    for base in shipped() {
        let perm = base.iet().perm().clone();
        let reference = base.suspend().unwrap();
        let mut accepted = 0;
        while accepted < 50 {
            let lengths: Vec<Rational> = (0..perm.d())
                .map(|_| Rational::new(rng.random_range(1..1000).into(), 997.into()))
                .collect();
            let canonical: Vec<f64> = (1..=perm.d())
                .map(|j| perm.apply(j) as f64 - j as f64)
                .collect();
            let mut b: Vec<f64> = canonical
                .iter()
                .map(|c| c * rng.random_range(0.5..2.0) + rng.random_range(-0.3..0.3))
                .collect();
            let mean = b.iter().sum::<f64>() / b.len() as f64;
            b.iter_mut().for_each(|x| *x -= mean);
            let iet = Iet::new(lengths, perm.clone()).unwrap();
            let Ok(s) = SuspensionData::new(iet, b) else {
                continue;
            };
            accepted += 1;
            let x = s.suspend().unwrap();
            assert_eq!(x.genus(), reference.genus());
            assert_eq!(x.stratum(), reference.stratum());
            assert!((x.area() - s.area()).abs() < 1e-9 * s.area().max(1.0));
        }
    }
}

#[test]
fn short_interval_connection_is_enumerated() {
    let s = &shipped()[0];
    let x = s.suspend().unwrap();
    for n in [1, 5, 20, 100] {
        let c = s.short_interval_saddle_connection(n).unwrap();
        let v = c.connection.holonomy;
        let eps = rational::to_f64(&c.epsilon_n);
        assert!(v.re.abs() <= eps * (1.0 + 1e-6));
        assert!(v.im.abs() <= n as f64 * c.h_max + 1e-9);
        let ne = rational::to_f64(&c.n_epsilon_n);
        assert!(c.renormalized_max_norm() <= c.h_max.max(1.0) * ne.sqrt() * (1.0 + 1e-9));
        let found = x
            .saddle_connections_with(
                c.connection.max_norm() * (1.0 + 1e-9),
                SaddleSearch {
                    budget: 20_000_000,
                    ..SaddleSearch::default()
                },
            )
            .unwrap();
        assert!(
            found.iter().any(|f| (f.holonomy - v).norm() < 1e-8),
            "n = {n}: {v} not among {} connections",
            found.len()
        );
    }
}

#[test]
fn short_interval_connection_in_genus_two() {
    let s = &shipped()[4];
    let x = s.suspend().unwrap();
    for n in [1, 3, 10] {
        let c = s.short_interval_saddle_connection(n).unwrap();
        let v = c.connection.holonomy;
        let found = x
            .saddle_connections(c.connection.max_norm() * (1.0 + 1e-9))
            .unwrap();
        assert!(found.iter().any(|f| (f.holonomy - v).norm() < 1e-8), "n = {n}: {v}");
        assert!(SystoleNorm::Max.of(v) >= x.systole().unwrap() - 1e-12);
    }
}
