//! Random instances shared by the suites.

use num_complex::Complex64;
use pcoh::linalg::{kron, ComplexMatrix};
use pcoh::states::{random_density_with, random_unitary_with, BipartiteState, DensityMatrix, Ensemble, KrausChannel};
use pcoh::Result;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub(crate) type M = ComplexMatrix<f64>;

pub(crate) fn state(rng: &mut ChaCha8Rng, dim: usize, full_rank: bool) -> Result<DensityMatrix<f64>> {
    let rank = if full_rank { dim } else { rng.random_range(1..=dim) };
    random_density_with(dim, rank, rng)
}

pub(crate) fn bipartite(rng: &mut ChaCha8Rng, n_a: usize, n_b: usize, full_rank: bool) -> Result<BipartiteState<f64>> {
    BipartiteState::new(state(rng, n_a * n_b, full_rank)?, n_a, n_b)
}

pub(crate) fn pick<T: Copy>(rng: &mut ChaCha8Rng, items: &[T]) -> T {
    items[rng.random_range(0..items.len())]
}

/// Random priors bounded away from zero.
pub(crate) fn priors(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let w: Vec<f64> = (0..n).map(|_| rng.random::<f64>() + 0.05).collect();
    let s: f64 = w.iter().sum();
    w.into_iter().map(|x| x / s).collect()
}

pub(crate) fn ensemble(rng: &mut ChaCha8Rng, n: usize, m: usize) -> Result<Ensemble<f64>> {
    let p = priors(rng, n);
    let members = p
        .into_iter()
        .map(|q| Ok((q, state(rng, m, false)?)))
        .collect::<Result<Vec<_>>>()?;
    Ensemble::new(members)
}

/// `(U_a (x) U_b) rho (U_a (x) U_b)^dag`
pub(crate) fn local_unitary(rho: &BipartiteState<f64>, ua: &M, ub: &M) -> Result<BipartiteState<f64>> {
    rho.with_state(rho.state().conjugated(&kron(ua, ub))?)
}

pub(crate) fn random_local_unitary(rng: &mut ChaCha8Rng, rho: &BipartiteState<f64>) -> Result<BipartiteState<f64>> {
    let ua = random_unitary_with(rho.n_a(), rng);
    let ub = random_unitary_with(rho.n_b(), rng);
    local_unitary(rho, &ua, &ub)
}

/// Kraus operators `I_a (x) <j|` of the partial trace over `b`.
pub(crate) fn trace_out_b(n_a: usize, n_b: usize) -> Result<KrausChannel<f64>> {
    let ia = M::identity(n_a);
    let ops = (0..n_b)
        .map(|j| {
            let bra = M::from_fn(1, n_b, |_, c| if c == j { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) });
            kron(&ia, &bra)
        })
        .collect();
    KrausChannel::new(ops)
}
