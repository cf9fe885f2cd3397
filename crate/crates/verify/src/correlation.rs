//! Correlated coherence and discord suites.

use num_complex::Complex64;
use pcoh::correlations::{correlated_coherence, discord_estimate, gcc, pure_cc};
use pcoh::linalg::{kron, kron_vec};
use pcoh::metrics::{apply_channel, Kind};
use pcoh::partialcoh::partial_coherence;
use pcoh::states::{
    random_channel_with, random_isometry_with, random_pure_with, random_unitary_with, BipartiteState, DensityMatrix,
    KrausChannel,
};
use pcoh::Result;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::gen::{self, M};
use crate::Suite;

const GCC_SPLITS: [(usize, usize); 3] = [(2, 2), (2, 3), (3, 3)];
const SPLITS: [(usize, usize); 4] = [(2, 2), (2, 3), (3, 2), (3, 3)];
/// Splits for checks that run a full-basis search; with three fidelity
/// blocks every search step calls the projective optimizer.
const SEARCH_SPLITS_FIDELITY: [(usize, usize); 3] = [(2, 2), (2, 3), (3, 2)];
const RESTARTS: usize = 2;

fn search_splits(kind: Kind) -> &'static [(usize, usize)] {
    match kind {
        Kind::Fidelity => &SEARCH_SPLITS_FIDELITY,
        Kind::Affinity => &SPLITS,
    }
}

fn cc(rho: &BipartiteState<f64>, kind: Kind, seed: u64) -> Result<f64> {
    Ok(correlated_coherence(rho, kind, RESTARTS, seed)?.value)
}

/// `sum_k sqrt(lambda_k) (U_a |k>) (x) (U_b |k>)`
fn with_schmidt(rng: &mut ChaCha8Rng, lambda: &[f64], n: usize) -> Result<BipartiteState<f64>> {
    let ua = random_unitary_with::<f64, _>(n, rng);
    let ub = random_unitary_with::<f64, _>(n, rng);
    let mut psi = vec![Complex64::new(0.0, 0.0); n * n];
    for (k, l) in lambda.iter().enumerate() {
        let term = kron_vec(&ua.column(k), &ub.column(k));
        for (p, t) in psi.iter_mut().zip(term) {
            *p += t * l.sqrt();
        }
    }
    BipartiteState::from_pure(&psi, n, n)
}

/// Purification of `I / n_a` through a random isometry into `b`.
fn maximally_mixed_marginal(rng: &mut ChaCha8Rng, n_a: usize, n_b: usize) -> Result<BipartiteState<f64>> {
    let v = random_isometry_with::<f64, _>(n_b, n_a, rng);
    let mut psi = vec![Complex64::new(0.0, 0.0); n_a * n_b];
    for i in 0..n_a {
        for j in 0..n_b {
            psi[i * n_b + j] = v[(j, i)] / (n_a as f64).sqrt();
        }
    }
    BipartiteState::from_pure(&psi, n_a, n_b)
}

/// `sum_i p_i |a_i><a_i| (x) sigma_i` for a random basis `a_i` and
/// well-separated weights.
fn classical(rng: &mut ChaCha8Rng, n_a: usize, n_b: usize) -> Result<BipartiteState<f64>> {
    let u = random_unitary_with::<f64, _>(n_a, rng);
    let mut w: Vec<f64> = (1..=n_a).map(|i| i as f64).collect();
    w.shuffle(rng);
    let total: f64 = w.iter().sum();
    let mut m = M::zeros(n_a * n_b, n_a * n_b);
    for (i, wi) in w.iter().enumerate() {
        let a = M::outer(&u.column(i));
        let sigma = gen::state(rng, n_b, false)?;
        m += &kron(&a, sigma.matrix()).scale(wi / total);
    }
    BipartiteState::from_matrix(&m, n_a, n_b)
}

fn bell() -> Result<BipartiteState<f64>> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let z = Complex64::new(0.0, 0.0);
    BipartiteState::from_pure(&[Complex64::new(h, 0.0), z, z, Complex64::new(h, 0.0)], 2, 2)
}

/// Doubly stochastic mixture of random permutations applied to `mu`.
fn majorized_by(rng: &mut ChaCha8Rng, mu: &[f64]) -> Vec<f64> {
    let n = mu.len();
    let w = gen::priors(rng, 3);
    let mut out = vec![0.0; n];
    for wk in w {
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(rng);
        for (i, &j) in perm.iter().enumerate() {
            out[i] += wk * mu[j];
        }
    }
    out
}

pub(crate) fn correlated(mut s: Suite) -> Suite {
    for kind in Kind::ALL {
        let k = kind.as_str();
        s.run(&format!("gcc nonnegative, {k}"), 1e-7, 200, |rng, _| {
            let (n_a, n_b) = gen::pick(rng, &GCC_SPLITS);
            Ok(vec![-gcc(&gen::bipartite(rng, n_a, n_b, false)?, kind)?])
        });
        s.run(&format!("optimizer matches pure closed form, {k}"), 1e-5, 100, |rng, _| {
            let (n_a, n_b) = gen::pick(rng, &SPLITS);
            let psi = random_pure_with::<f64, _>(n_a * n_b, rng);
            let rho = BipartiteState::from_pure(&psi, n_a, n_b)?;
            Ok(vec![(cc(&rho, kind, rng.random())? - pure_cc(&psi, n_a, n_b, kind)?).abs()])
        });
        s.run(&format!("discord estimate below cc, {k}"), 1e-12, 100, |rng, _| {
            let (n_a, n_b) = gen::pick(rng, search_splits(kind));
            let rho = gen::bipartite(rng, n_a, n_b, false)?;
            let seed = rng.random();
            Ok(vec![discord_estimate(&rho, kind, RESTARTS, seed)?.value - cc(&rho, kind, seed)?])
        });
        s.run(&format!("cc equals discord at maximally mixed marginal, {k}"), 1e-5, 100, |rng, _| {
            let (n_a, n_b) = gen::pick(rng, &search_splits(kind)[..2]);
            let rho = maximally_mixed_marginal(rng, n_a, n_b)?;
            let seed = rng.random();
            Ok(vec![(cc(&rho, kind, seed)? - discord_estimate(&rho, kind, RESTARTS, seed)?.value).abs()])
        });
        s.run(&format!("zero on classical states, {k}"), 1e-8, 100, |rng, _| {
            let (n_a, n_b) = gen::pick(rng, search_splits(kind));
            let rho = classical(rng, n_a, n_b)?;
            let seed = rng.random();
            Ok(vec![cc(&rho, kind, seed)?, discord_estimate(&rho, kind, RESTARTS, seed)?.value])
        });
        s.run(&format!("local unitary invariance, {k}"), 1e-5, 100, |rng, _| {
            let (n_a, n_b) = gen::pick(rng, &SPLITS);
            let rho = gen::bipartite(rng, n_a, n_b, false)?;
            let moved = gen::random_local_unitary(rng, &rho)?;
            let seed = rng.random();
            Ok(vec![(cc(&moved, kind, seed)? - cc(&rho, kind, seed)?).abs()])
        });
        s.run(&format!("monotone under channels on b, {k}"), 1e-5, 100, |rng, _| {
            let (n_a, n_b) = gen::pick(rng, &SPLITS);
            let rho = gen::bipartite(rng, n_a, n_b, false)?;
            let ch = KrausChannel::local_b(n_a, &random_channel_with(n_b, rng.random_range(1..=4), rng));
            let out = rho.with_state(apply_channel(rho.state(), &ch)?)?;
            let seed = rng.random();
            Ok(vec![cc(&out, kind, seed)? - cc(&rho, kind, seed)?])
        });
    }
    s.run("affinity gcc vanishes on product states", 1e-8, 100, |rng, _| {
        let (n_a, n_b) = gen::pick(rng, &SPLITS);
        let a = gen::state(rng, n_a, false)?;
        let b = gen::state(rng, n_b, false)?;
        let rho = BipartiteState::new(DensityMatrix::new(kron(a.matrix(), b.matrix()))?, n_a, n_b)?;
        Ok(vec![gcc(&rho, Kind::Affinity)?.abs()])
    });
    s.run("pure affinity cc monotone under majorization", 1e-10, 100, |rng, _| {
        let n = rng.random_range(2..=4);
        let mu = gen::priors(rng, n);
        let lambda = majorized_by(rng, &mu);
        let more_mixed = with_schmidt(rng, &lambda, n)?;
        let less_mixed = with_schmidt(rng, &mu, n)?;
        let pure = |r: &BipartiteState<f64>| -> Result<f64> {
            let spec = r.state().spectrum()?;
            pure_cc(&spec.vector(spec.dim() - 1), n, n, Kind::Affinity)
        };
        Ok(vec![pure(&less_mixed)? - pure(&more_mixed)?])
    });
    s.single("maximally entangled pair values", 1e-6, || {
        let rho = bell()?;
        let mut devs = Vec::new();
        for kind in Kind::ALL {
            devs.push((partial_coherence(&rho, kind)?.value - 0.5).abs());
            devs.push((correlated_coherence(&rho, kind, RESTARTS, 1)?.value - 0.5).abs());
            devs.push((discord_estimate(&rho, kind, RESTARTS, 1)?.value - 0.5).abs());
            devs.push((gcc(&rho, kind)? - 0.5).abs());
        }
        Ok(devs)
    });
    s
}
