use popshm::fem::{assemble_mass, assemble_stiffness, first_natural_frequency, residual_tolerance, MassModel};
use popshm::synth::{generate_sample, generate_truss, sample_rng, SynthConfig};
use popshm::truss::{encode_truss, EncodingConfig, Materials, MemberType, TemperatureLaw};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn stiffness_is_positive_semidefinite(seed in any::<u64>()) {
        let cfg = SynthConfig::thermal().nodes(5, 15);
        let truss = generate_truss(&cfg, &mut sample_rng(seed, 0)).unwrap();
        let k = assemble_stiffness(&truss, 30.0, &cfg.materials).unwrap();
        prop_assert!(k.is_symmetric());
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..5 {
            let u: Vec<f64> = (0..k.rows()).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let energy: f64 = k.matvec(&u).iter().zip(&u).map(|(a, b)| a * b).sum();
            prop_assert!(energy >= -1e-9 * k.trace());
        }
    }

    #[test]
    fn consistent_mass_carries_member_mass(seed in any::<u64>(), rho_a in 0.1f64..5.0) {
        let cfg = SynthConfig::uniform().nodes(5, 15);
        let truss = generate_truss(&cfg, &mut sample_rng(seed, 1)).unwrap();
        let m = assemble_mass(&truss, &MassModel { rho_a }).unwrap();
        let total: f64 = (0..truss.members().len())
            .map(|e| rho_a * truss.member_geometry(e).unwrap().0)
            .sum();
        for axis in 0..2 {
            let mut s = 0.0;
            for i in (axis..m.rows()).step_by(2) {
                for j in (axis..m.rows()).step_by(2) {
                    s += m[(i, j)];
                }
            }
            prop_assert!(rel(s, total) < 1e-12, "axis {}: {} vs {}", axis, s, total);
        }
    }

    #[test]
    fn frequency_scales_with_stiffness_and_mass(seed in any::<u64>(), c in 0.1f64..10.0, r in 0.1f64..10.0) {
        let cfg = SynthConfig::uniform().nodes(6, 14);
        let truss = generate_truss(&cfg, &mut sample_rng(seed, 2)).unwrap();
        let base = first_natural_frequency(&truss, 20.0, &cfg.materials, &MassModel { rho_a: 1.0 }).unwrap().omega1;
        let stiff = Materials { types: vec![MemberType::new(TemperatureLaw::Constant { base_ea: c * 1e4 })] };
        let w = first_natural_frequency(&truss, 20.0, &stiff, &MassModel { rho_a: r }).unwrap().omega1;
        prop_assert!(rel(w, base * (c / r).sqrt()) < 1e-9);
    }

    #[test]
    fn translation_leaves_frequency(seed in any::<u64>(), dx in -1e3f64..1e3, dy in -1e3f64..1e3) {
        let cfg = SynthConfig::thermal().nodes(6, 14);
        let truss = generate_truss(&cfg, &mut sample_rng(seed, 3)).unwrap();
        let mass = MassModel { rho_a: 1.0 };
        let a = first_natural_frequency(&truss, 25.0, &cfg.materials, &mass).unwrap().omega1;
        let b = first_natural_frequency(&truss.transformed(0.0, [dx, dy]), 25.0, &cfg.materials, &mass).unwrap().omega1;
        prop_assert!(rel(a, b) < 1e-9);
    }

    #[test]
    fn warming_never_stiffens(seed in any::<u64>()) {
        let cfg = SynthConfig::thermal().nodes(6, 14);
        let truss = generate_truss(&cfg, &mut sample_rng(seed, 4)).unwrap();
        let mass = MassModel { rho_a: 1.0 };
        let mut last = f64::INFINITY;
        for step in 0..=20 {
            let t = 20.0 + step as f64;
            let w = first_natural_frequency(&truss, t, &cfg.materials, &mass).unwrap().omega1;
            prop_assert!(w <= last * (1.0 + 1e-12), "T = {}: {} after {}", t, w, last);
            last = w;
        }
    }

    #[test]
    fn labels_meet_residual_tolerance(seed in any::<u64>()) {
        let s = generate_sample(&SynthConfig::thermal().nodes(10, 20).seed(seed), 0).unwrap();
        let r = first_natural_frequency(&s.truss, s.temperature, &SynthConfig::thermal().materials, &MassModel { rho_a: 1.0 }).unwrap();
        prop_assert!(r.lambda_min > 0.0);
        prop_assert!(r.residual <= residual_tolerance::<f64>());
        prop_assert_eq!(r.omega1, s.omega1);
    }

    #[test]
    fn encoding_shape_and_directions(seed in any::<u64>()) {
        let cfg = SynthConfig::thermal().nodes(5, 15);
        let truss = generate_truss(&cfg, &mut sample_rng(seed, 5)).unwrap();
        let g = encode_truss(&truss, 31.0, &EncodingConfig::THERMAL).unwrap();
        prop_assert_eq!(g.node_count(), truss.node_count());
        prop_assert_eq!(g.edge_count(), 2 * truss.members().len());
        for e in 0..g.edge_count() {
            let row = g.edge_attrs().row(e);
            prop_assert!((row[1] * row[1] + row[2] * row[2] - 1.0).abs() <= 1e-12);
        }
        prop_assert_eq!(encode_truss(&truss, 31.0, &EncodingConfig::THERMAL).unwrap(), g);
    }
}

#[test]
fn constant_law_ignores_temperature() {
    let ty = MemberType::new(TemperatureLaw::<f64>::constant_reference());
    let a = ty.ea_at(20.0).unwrap();
    for t in [21.5, 30.0, 39.99, 40.0] {
        assert_eq!(ty.ea_at(t).unwrap(), a);
    }
}
