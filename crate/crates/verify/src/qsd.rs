//! Discrimination suites: the two-block reduction, the embedding state and
//! the least-square measurement identity.

use num_complex::Complex64;
use pcoh::linalg::{eigh, psd_sqrt};
use pcoh::partialcoh::{affinity_partial_coherence, fidelity_partial_coherence, qsd_ensemble_of};
use pcoh::qsd::{helstrom, lsm_error, success_probability};
use pcoh::qsdstate::{build_qsd_state, qsd_state_roundtrip};
use pcoh::states::{random_density_with, DensityMatrix, Ensemble};
use pcoh::Result;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::gen;
use crate::oracle::{qubit_scan, two_outcome_ascent};
use crate::Suite;

const SPLITS: [(usize, usize); 5] = [(2, 2), (2, 3), (3, 2), (3, 3), (4, 2)];

pub(crate) fn two_block_reduction(mut s: Suite) -> Suite {
    s.run("agrees with helstrom on the induced ensemble", 1e-9, 100, |rng, t| {
        let rho = gen::bipartite(rng, 2, 2 + t % 2, true)?;
        let c = fidelity_partial_coherence(&rho)?.value;
        Ok(vec![(c - helstrom(&qsd_ensemble_of(&rho)?)?.error_prob).abs()])
    });
    s.run("agrees with joint-space projective ascent", 1e-6, 100, |rng, t| {
        let rho = gen::bipartite(rng, 2, 2 + t % 2, true)?;
        let c = fidelity_partial_coherence(&rho)?.value;
        let root = psd_sqrt(rho.matrix())?;
        let w0 = root.sandwich(&rho.projector(0));
        let w1 = root.sandwich(&rho.projector(1));
        let best = two_outcome_ascent(&w0.hermitian_part(), &w1.hermitian_part(), 50, rng)?;
        Ok(vec![(c - (1.0 - best)).abs()])
    });
    s
}

/// Binary ensemble on `C^m` whose member supports are jointly independent.
fn independent_pair(rng: &mut ChaCha8Rng) -> Result<Ensemble<f64>> {
    let m = rng.random_range(2..=4);
    let r1 = rng.random_range(1..m);
    let r2 = rng.random_range(1..=m - r1);
    let p = gen::priors(rng, 2);
    let a = random_density_with(m, r1, rng)?;
    let b = random_density_with(m, r2, rng)?;
    Ensemble::new(vec![(p[0], a), (p[1], b)])
}

fn random_ensemble(rng: &mut ChaCha8Rng, min_members: usize) -> Result<Ensemble<f64>> {
    let n = rng.random_range(min_members..=4);
    let m = rng.random_range(1..=4);
    gen::ensemble(rng, n, m)
}

pub(crate) fn embedding(mut s: Suite) -> Suite {
    s.run("positive semidefinite", 1e-9, 200, |rng, _| {
        let rho = build_qsd_state(&random_ensemble(rng, 2)?)?;
        Ok(vec![-eigh(rho.matrix())?.min()])
    });
    s.run("unit trace", 1e-10, 200, |rng, _| {
        let rho = build_qsd_state(&random_ensemble(rng, 2)?)?;
        Ok(vec![(rho.matrix().trace_re() - 1.0).abs()])
    });
    s.run("prior recovery", 1e-9, 200, |rng, _| {
        let e = random_ensemble(rng, 2)?;
        let rho = build_qsd_state(&e)?;
        let recovered = qsd_ensemble_of(&rho)?;
        let mut devs: Vec<f64> = (0..e.len())
            .map(|i| (rho.projector(i).trace_product_re(rho.matrix()) - e.prior(i)).abs())
            .collect();
        devs.extend((0..e.len()).map(|i| (recovered.prior(i) - e.prior(i)).abs()));
        Ok(devs)
    });
    s.run("recovered states match spectrally", 1e-8, 200, |rng, _| {
        Ok(vec![qsd_state_roundtrip(&random_ensemble(rng, 2)?)?.max_spectrum_error])
    });
    s.run("fidelity coherence equals helstrom error", 1e-7, 100, |rng, _| {
        let e = independent_pair(rng)?;
        let c = fidelity_partial_coherence(&build_qsd_state(&e)?)?.value;
        Ok(vec![(c - helstrom(&e)?.error_prob).abs()])
    });
    s.single("benchmark pair |0>, |+>", 1e-6, || {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let zero = DensityMatrix::pure(&[Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)])?;
        let plus = DensityMatrix::pure(&[Complex64::new(h, 0.0), Complex64::new(h, 0.0)])?;
        let e = Ensemble::uniform(vec![zero, plus])?;
        let c = fidelity_partial_coherence(&build_qsd_state(&e)?)?.value;
        // (1 - sin(pi/4)) / 2
        Ok(vec![(c - (1.0 - h) / 2.0).abs()])
    });
    s
}

pub(crate) fn lsm_identity(mut s: Suite) -> Suite {
    s.run("affinity coherence equals induced LSM error", 1e-8, 100, |rng, t| {
        let (n_a, n_b) = gen::pick(rng, &SPLITS);
        let rho = gen::bipartite(rng, n_a, n_b, t % 2 == 0)?;
        let c = affinity_partial_coherence(&rho)?.value;
        Ok(vec![(c - lsm_error(&qsd_ensemble_of(&rho)?)?).abs()])
    });
    s.run("LSM error equals affinity coherence of embedding", 1e-8, 200, |rng, _| {
        let e = random_ensemble(rng, 1)?;
        let c = affinity_partial_coherence(&build_qsd_state(&e)?)?.value;
        Ok(vec![(lsm_error(&e)? - c).abs()])
    });
    s
}

pub(crate) fn helstrom_scan(mut s: Suite) -> Suite {
    s.run("closed form matches projective scan", 1e-4, 50, |rng, _| {
        let e = gen::ensemble(rng, 2, 2)?;
        let h = helstrom(&e)?;
        let scan = qubit_scan(e.prior(0), e.state(0), e.prior(1), e.state(1), 5000, rng);
        Ok(vec![(h.success_prob - scan).abs()])
    });
    s.run("returned measurement attains the closed form", 1e-10, 50, |rng, _| {
        let e = gen::ensemble(rng, 2, 2)?;
        let h = helstrom(&e)?;
        Ok(vec![(success_probability(&e, &h.measurement)? - h.success_prob).abs()])
    });
    s
}
