use leafkit_core::random::{random_full_rank_density, random_hermitian};
use leafkit_core::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn sorted_variances(leaf: &LeafF64, h: &HermitianOperatorF64) -> Vec<f64> {
    let mut v = column_variances(h, leaf.states()).unwrap();
    v.sort_by(f64::total_cmp);
    v
}

#[test]
fn leaf_fingerprint_is_conserved() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for d in [2, 4, 9, 16] {
        let h = random_hermitian::<f64, _>(&mut rng, d);
        let rho = random_full_rank_density::<f64, _>(&mut rng, d, 0.01).unwrap();
        let prop = Propagator::new(&h).unwrap();
        let base = sorted_variances(&optimal_ensemble(&rho, &h).unwrap(), &h);
        let f0 = qfi(&rho, &h).unwrap();
        for t in [0.3, 1.0, 2.7] {
            let rt = prop.evolve_density(&rho, t).unwrap();
            let vt = sorted_variances(&optimal_ensemble(&rt, &h).unwrap(), &h);
            for (a, b) in base.iter().zip(&vt) {
                assert!((a - b).abs() < 1e-8, "d={d} t={t}");
            }
            assert!((qfi(&rt, &h).unwrap() - f0).abs() <= 1e-8 * f0);
        }
    }
}

#[test]
fn transport_commutes_with_evolution() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let d = 10;
    let h = random_hermitian::<f64, _>(&mut rng, d);
    let rho = random_full_rank_density::<f64, _>(&mut rng, d, 0.01).unwrap();
    let leaf = optimal_ensemble(&rho, &h).unwrap();
    let prop = Propagator::new(&h).unwrap();
    let t = 1.9;
    let mut acc = HermitianOperatorF64::zeros(d);
    for (i, &p) in leaf.populations().iter().enumerate() {
        let phi_t = prop.evolve_pure(&leaf.state(i).unwrap(), t).unwrap();
        let proj = HermitianOperator::new(phi_t.projector()).unwrap();
        acc = acc.linear_combination(1.0, &proj, p).unwrap();
    }
    let direct = prop.evolve_density(&rho, t).unwrap();
    assert!(acc.distance(direct.op()).unwrap() < 1e-9);
}

#[test]
fn chain_quench_smoke() {
    let h = build_hamiltonian::<f64>(&ChainSpec::chaotic(5).unwrap()).unwrap();
    let rho = thermal_state::<f64>(&ChainSpec::paramagnetic(5).unwrap(), 0.5).unwrap();
    let leaf = optimal_ensemble(&rho, &h).unwrap();
    let catalog = local_observables(5, 1).unwrap();
    let (report, curves) =
        diagnostics(&leaf, &catalog, 6, &DeltaGrid::default(), typicality::RunLabels::default()).unwrap();
    assert_eq!(curves.len(), 12);
    assert_eq!(report.shell_bounds.len(), 6);
    let prop = Propagator::new(&h).unwrap();
    let cmp = dynamics::compare_catalog(&leaf, &rho, &prop, &catalog, &dynamics::default_times(), &report).unwrap();
    assert_eq!(cmp.len(), 12);
    let z = cmp.iter().find(|c| c.observable_label == "z@1").unwrap();
    assert!((z.exact[0] - expectation(&catalog.operator("z@1").unwrap(), &rho).unwrap()).abs() < 1e-12);
    assert!(z.band_low.iter().zip(&z.band_high).all(|(a, b)| a <= b));
}
