//! Partial-coherence suites: closed forms and the measure axioms.

use num_complex::Complex64;
use pcoh::linalg::kron;
use pcoh::metrics::{distance, subselect, Kind};
use pcoh::partialcoh::{affinity_partial_coherence, fidelity_partial_coherence, partial_coherence, xstate_fidelity_pc};
use pcoh::states::{
    luders_project, random_partial_incoherent_channel_with, random_partial_incoherent_with, random_unitary_with,
    random_xstate_with, BipartiteState, DensityMatrix,
};
use pcoh::Result;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::gen::{self, M};
use crate::oracle::skew_information_commutator;
use crate::Suite;

const SPLITS: [(usize, usize); 4] = [(2, 2), (2, 3), (3, 2), (3, 3)];
/// Splits with two blocks on `a`, where the fidelity measure is exact.
const FIDELITY_SPLITS: [(usize, usize); 2] = [(2, 2), (2, 3)];

fn splits(kind: Kind) -> &'static [(usize, usize)] {
    match kind {
        Kind::Fidelity => &FIDELITY_SPLITS,
        Kind::Affinity => &SPLITS,
    }
}

/// Random state, in the computational basis or a random basis of `a`.
fn state_in_random_basis(rng: &mut ChaCha8Rng, n_a: usize, n_b: usize) -> Result<BipartiteState<f64>> {
    let rho = gen::state(rng, n_a * n_b, false)?;
    if rng.random_bool(0.5) {
        BipartiteState::new(rho, n_a, n_b)
    } else {
        BipartiteState::with_basis(rho, n_a, n_b, random_unitary_with(n_a, rng))
    }
}

/// Partial-incoherent state with respect to the basis of `reference`.
fn incoherent_like(rng: &mut ChaCha8Rng, reference: &BipartiteState<f64>) -> Result<DensityMatrix<f64>> {
    let sigma = random_partial_incoherent_with::<f64, _>(reference.n_a(), reference.n_b(), rng);
    let v = kron(reference.basis_a(), &M::identity(reference.n_b()));
    sigma.state().conjugated(&v)
}

pub(crate) fn affinity_closed_form(mut s: Suite) -> Suite {
    s.run("below distance to sampled incoherent states", 1e-8, 50, |rng, _| {
        let (n_a, n_b) = gen::pick(rng, &SPLITS);
        let rho = state_in_random_basis(rng, n_a, n_b)?;
        let rep = affinity_partial_coherence(&rho)?;
        let mut devs = Vec::with_capacity(1000);
        for k in 0..1000 {
            let sigma = if k % 2 == 0 {
                incoherent_like(rng, &rho)?
            } else {
                // mixtures concentrated near the reported minimizer
                let eps = 10f64.powf(-4.0 + 3.5 * rng.random::<f64>());
                let tau = incoherent_like(rng, &rho)?;
                DensityMatrix::mixture(&[(1.0 - eps, &rep.cpis), (eps, &tau)])?
            };
            devs.push(rep.value - distance(rho.state(), &sigma, Kind::Affinity)?);
        }
        Ok(devs)
    });
    s.run("minimizer is partial incoherent", 1e-10, 50, |rng, _| {
        let (n_a, n_b) = gen::pick(rng, &SPLITS);
        let rho = state_in_random_basis(rng, n_a, n_b)?;
        let cpis = affinity_partial_coherence(&rho)?.cpis;
        let as_state = rho.with_state(cpis.clone())?;
        Ok(vec![cpis.matrix().max_abs_diff(luders_project(&as_state).matrix())])
    });
    s.run("distance to minimizer equals value", 1e-8, 50, |rng, _| {
        let (n_a, n_b) = gen::pick(rng, &SPLITS);
        let rho = state_in_random_basis(rng, n_a, n_b)?;
        let rep = affinity_partial_coherence(&rho)?;
        Ok(vec![(distance(rho.state(), &rep.cpis, Kind::Affinity)? - rep.value).abs()])
    });
    s.run("skew information identity", 1e-9, 50, |rng, _| {
        let (n_a, n_b) = gen::pick(rng, &SPLITS);
        let rho = state_in_random_basis(rng, n_a, n_b)?;
        let c = affinity_partial_coherence(&rho)?.value;
        Ok(vec![(c - skew_information_commutator(&rho)?).abs()])
    });
    s
}

fn spot_xstate() -> Result<BipartiteState<f64>> {
    let mut m = M::from_diag(&[0.25; 4]);
    let x = Complex64::new(0.125, 0.0);
    m[(0, 3)] = x;
    m[(3, 0)] = x;
    m[(1, 2)] = x;
    m[(2, 1)] = x;
    BipartiteState::from_matrix(&m, 2, 2)
}

pub(crate) fn xstate_closed_form(mut s: Suite) -> Suite {
    s.run("closed form equals general routine", 1e-8, 100, |rng, t| {
        let rho = random_xstate_with::<f64, _>(2 + t % 3, true, rng);
        let closed = xstate_fidelity_pc(&rho, true)?.value;
        Ok(vec![(closed - fidelity_partial_coherence(&rho)?.value).abs()])
    });
    s.run("closed-form minimizer attains the value", 1e-8, 100, |rng, t| {
        let rho = random_xstate_with::<f64, _>(2 + t % 3, true, rng);
        let rep = xstate_fidelity_pc(&rho, true)?;
        Ok(vec![(distance(rho.state(), &rep.cpis, Kind::Fidelity)? - rep.value).abs()])
    });
    s.single("spot value", 1e-12, || {
        let v = xstate_fidelity_pc(&spot_xstate()?, true)?.value;
        Ok(vec![(v - (1.0 - 3f64.sqrt() / 2.0) / 2.0).abs()])
    });
    s
}

/// A partial-incoherent state rotated on `a`.
fn coherent_state(rng: &mut ChaCha8Rng, n_a: usize, n_b: usize) -> Result<BipartiteState<f64>> {
    let pi = random_partial_incoherent_with::<f64, _>(n_a, n_b, rng);
    gen::local_unitary(&pi, &random_unitary_with(n_a, rng), &M::identity(n_b))
}

pub(crate) fn measure_axioms(mut s: Suite) -> Suite {
    for kind in Kind::ALL {
        let k = kind.as_str();
        let sp = splits(kind);
        s.run(&format!("C1 zero on incoherent states, {k}"), 1e-9, 100, |rng, _| {
            let (n_a, n_b) = gen::pick(rng, &SPLITS);
            let rho = random_partial_incoherent_with::<f64, _>(n_a, n_b, rng);
            Ok(vec![partial_coherence(&rho, kind)?.value])
        });
        s.run(&format!("C1 at least 1e-6 on rotated states, {k}"), 0.0, 100, |rng, _| {
            let (n_a, n_b) = gen::pick(rng, sp);
            let rho = coherent_state(rng, n_a, n_b)?;
            Ok(vec![1e-6 - partial_coherence(&rho, kind)?.value])
        });
        s.run(&format!("C2 monotone under incoherent channels, {k}"), 1e-7, 100, |rng, _| {
            let (n_a, n_b) = gen::pick(rng, sp);
            let rho = gen::bipartite(rng, n_a, n_b, false)?;
            let ch = random_partial_incoherent_channel_with(n_a, n_b, rng.random_range(1..=4), rng);
            let out = rho.with_state(pcoh::metrics::apply_channel(rho.state(), &ch)?)?;
            Ok(vec![partial_coherence(&out, kind)?.value - partial_coherence(&rho, kind)?.value])
        });
        s.run(&format!("C3 monotone on average over branches, {k}"), 1e-7, 100, |rng, _| {
            let (n_a, n_b) = gen::pick(rng, sp);
            let rho = gen::bipartite(rng, n_a, n_b, false)?;
            let ch = random_partial_incoherent_channel_with(n_a, n_b, rng.random_range(2..=4), rng);
            let mut avg = 0.0;
            for b in subselect(rho.state(), &ch)? {
                if let Some(st) = b.state {
                    avg += b.probability * partial_coherence(&rho.with_state(st)?, kind)?.value;
                }
            }
            Ok(vec![avg - partial_coherence(&rho, kind)?.value])
        });
        s.run(&format!("C4 convex, {k}"), 1e-7, 100, |rng, _| {
            let (n_a, n_b) = gen::pick(rng, sp);
            let p = gen::priors(rng, 3);
            let parts = (0..3)
                .map(|_| gen::state(rng, n_a * n_b, false))
                .collect::<Result<Vec<_>>>()?;
            let mix = DensityMatrix::mixture(&[(p[0], &parts[0]), (p[1], &parts[1]), (p[2], &parts[2])])?;
            let mut rhs = 0.0;
            for (q, part) in p.iter().zip(&parts) {
                rhs += q * partial_coherence(&BipartiteState::new(part.clone(), n_a, n_b)?, kind)?.value;
            }
            Ok(vec![partial_coherence(&BipartiteState::new(mix, n_a, n_b)?, kind)?.value - rhs])
        });
    }
    s
}
