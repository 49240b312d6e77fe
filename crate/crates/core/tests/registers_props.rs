use nalgebra::DMatrix;
use proptest::prelude::*;
use statedesign::entropy::{renyi2_entanglement, schmidt_spectrum};
use statedesign::registers::{bell_chain_state, ghz_state, Partition, QuditRegister, Region, C64};
use statedesign::twirl::{sample_haar_state, sample_haar_unitary, RandomStream};

fn max_abs_diff(a: &nalgebra::DVector<C64>, b: &nalgebra::DVector<C64>) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    /// Unitaries on disjoint regions commute.
    #[test]
    fn disjoint_local_unitaries_commute(seed in any::<u64>()) {
        let reg = QuditRegister::new(vec![2, 3, 2]).unwrap();
        let mut rng = RandomStream::new(seed).rng();
        let psi = sample_haar_state(&reg, &mut rng).unwrap();
        let a = Region::new(vec![0, 2]).unwrap();
        let b = Region::new(vec![1]).unwrap();
        let ua = sample_haar_unitary(4, &mut rng).unwrap();
        let ub = sample_haar_unitary(3, &mut rng).unwrap();
        let ab = psi.apply_local_unitary(&a, &ua).unwrap().apply_local_unitary(&b, &ub).unwrap();
        let ba = psi.apply_local_unitary(&b, &ub).unwrap().apply_local_unitary(&a, &ua).unwrap();
        prop_assert!(max_abs_diff(ab.amplitudes(), ba.amplitudes()) < 1e-12);
    }

    /// Local unitaries keep the norm and the Schmidt spectrum of the cut.
    #[test]
    fn local_unitary_keeps_cut_spectrum(seed in any::<u64>()) {
        let reg = QuditRegister::qubits(4).unwrap();
        let mut rng = RandomStream::new(seed).rng();
        let psi = sample_haar_state(&reg, &mut rng).unwrap();
        let a = Region::new(vec![0, 1]).unwrap();
        let u = sample_haar_unitary(4, &mut rng).unwrap();
        let phi = psi.apply_local_unitary(&a, &u).unwrap();
        prop_assert!((phi.amplitudes().norm() - 1.0).abs() < 1e-12);
        let before = schmidt_spectrum(&psi, &a).unwrap().coefficients;
        let after = schmidt_spectrum(&phi, &a).unwrap().coefficients;
        for (x, y) in before.iter().zip(&after) {
            prop_assert!((x - y).abs() < 1e-10);
        }
    }
}

#[test]
fn bell_chain_cut_ranks() {
    let reg = QuditRegister::qubits(4).unwrap();
    let p = Partition::from_sites(vec![vec![0], vec![1, 2], vec![3]], &reg).unwrap();
    let psi = bell_chain_state(&reg, &p, &[2, 2]).unwrap();
    for i in 0..2 {
        let cut = p.cumulative_union(i);
        assert_eq!(schmidt_spectrum(&psi, &cut).unwrap().rank(), 2);
        assert!((renyi2_entanglement(&psi, &cut).unwrap() - 2f64.ln()).abs() < 1e-12);
    }
    // region 1 as a whole holds both halves of the chain
    let middle = Region::new(vec![1, 2]).unwrap();
    assert_eq!(schmidt_spectrum(&psi, &middle).unwrap().rank(), 4);
}

#[test]
fn ghz_spectrum_on_every_region() {
    let reg = QuditRegister::qubits(6).unwrap();
    let p = Partition::from_sites(vec![vec![0, 1], vec![2, 3], vec![4, 5]], &reg).unwrap();
    for level in 2..=4 {
        let psi = ghz_state(&reg, &p, level).unwrap();
        for r in p.regions() {
            let spectrum = schmidt_spectrum(&psi, r).unwrap();
            assert_eq!(spectrum.rank(), level);
            let w = spectrum.weights();
            assert!(w[..level].iter().all(|x| (x - 1.0 / level as f64).abs() < 1e-12));
        }
    }
}

#[test]
fn invalid_inputs_are_rejected() {
    let reg = QuditRegister::qubits(2).unwrap();
    assert!(Partition::from_sites(vec![vec![0]], &reg).is_err());
    assert!(Partition::from_sites(vec![vec![0, 1], vec![1]], &reg).is_err());
    let psi = sample_haar_state(&reg, &mut RandomStream::new(0).rng()).unwrap();
    let not_unitary = DMatrix::<C64>::from_element(2, 2, C64::new(1.0, 0.0));
    assert!(psi.apply_local_unitary(&Region::new(vec![0]).unwrap(), &not_unitary).is_err());
    assert!(QuditRegister::new(vec![2, 0]).is_err());
}
