//! Overlap and distance suites.

use pcoh::linalg::psd_sqrt;
use pcoh::metrics::{
    apply_channel, contractibility_slack_weighted, distance, overlap_psd, subselect, Kind, Weighting,
};
use pcoh::states::{random_channel_with, random_unitary_with, BipartiteState, DensityMatrix, KrausChannel};
use pcoh::Result;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::gen::{self, M};
use crate::Suite;

const DIMS: [usize; 4] = [2, 3, 4, 6];
const SPLITS: [(usize, usize); 3] = [(2, 2), (2, 3), (3, 2)];

fn raw(kind: Kind, a: &DensityMatrix<f64>, b: &DensityMatrix<f64>) -> Result<f64> {
    overlap_psd(kind, a.matrix(), b.matrix())
}

fn pair(rng: &mut ChaCha8Rng, dim: usize) -> Result<(DensityMatrix<f64>, DensityMatrix<f64>)> {
    Ok((gen::state(rng, dim, false)?, gen::state(rng, dim, false)?))
}

/// `tr sqrt(sqrt(sigma) rho sqrt(sigma))`, computed without a trace norm.
fn uhlmann(rho: &DensityMatrix<f64>, sigma: &DensityMatrix<f64>) -> Result<f64> {
    let s = psd_sqrt(sigma.matrix())?;
    Ok(psd_sqrt(&s.sandwich(rho.matrix()).hermitian_part())?.trace_re())
}

pub(crate) fn axioms(mut s: Suite) -> Suite {
    let per_dim = 200 * DIMS.len();
    s.run("0 <= A", 1e-9, per_dim, |rng, t| {
        let (r, q) = pair(rng, DIMS[t % 4])?;
        Ok(vec![-raw(Kind::Affinity, &r, &q)?])
    });
    s.run("A <= F", 1e-9, per_dim, |rng, t| {
        let (r, q) = pair(rng, DIMS[t % 4])?;
        Ok(vec![raw(Kind::Affinity, &r, &q)? - raw(Kind::Fidelity, &r, &q)?])
    });
    s.run("F <= 1", 1e-9, per_dim, |rng, t| {
        let (r, q) = pair(rng, DIMS[t % 4])?;
        Ok(vec![raw(Kind::Fidelity, &r, &q)? - 1.0])
    });
    s.run("X(rho, rho) >= 1", 1e-9, per_dim, |rng, t| {
        let r = gen::state(rng, DIMS[t % 4], false)?;
        Ok(vec![1.0 - raw(Kind::Fidelity, &r, &r)?, 1.0 - raw(Kind::Affinity, &r, &r)?])
    });
    s.run("d(rho, rho) <= 0", 1e-9, per_dim, |rng, t| {
        let r = gen::state(rng, DIMS[t % 4], false)?;
        Ok(vec![distance(&r, &r, Kind::Fidelity)?, distance(&r, &r, Kind::Affinity)?])
    });
    s.run("trace norm equals nested root form", 1e-9, per_dim, |rng, t| {
        let d = DIMS[t % 4];
        let r = gen::state(rng, d, true)?;
        let q = gen::state(rng, d, true)?;
        Ok(vec![(raw(Kind::Fidelity, &r, &q)? - uhlmann(&r, &q)?).abs()])
    });
    s
}

/// Luders channels on a random split, 4-Kraus random channels, and random
/// channels with 2 to 6 operators.
fn triple(rng: &mut ChaCha8Rng, t: usize) -> Result<(DensityMatrix<f64>, DensityMatrix<f64>, KrausChannel<f64>)> {
    match t % 3 {
        0 => {
            let (n_a, n_b) = gen::pick(rng, &SPLITS);
            let (r, q) = pair(rng, n_a * n_b)?;
            let basis = random_unitary_with(n_a, rng);
            let ch = KrausChannel::luders(&BipartiteState::with_basis(r.clone(), n_a, n_b, basis)?);
            Ok((r, q, ch))
        }
        1 => {
            let d = gen::pick(rng, &DIMS);
            let (r, q) = pair(rng, d)?;
            Ok((r, q, random_channel_with(d, 4, rng)))
        }
        _ => {
            let d = gen::pick(rng, &DIMS);
            let k = rng.random_range(2..=6);
            let (r, q) = pair(rng, d)?;
            Ok((r, q, random_channel_with(d, k, rng)))
        }
    }
}

pub(crate) fn contractibility(mut s: Suite) -> Suite {
    for (label, kind, w) in [
        ("fidelity, rho-weighted", Kind::Fidelity, Weighting::Rho),
        ("affinity, rho-weighted", Kind::Affinity, Weighting::Rho),
        ("fidelity, sigma-weighted", Kind::Fidelity, Weighting::Sigma),
        ("affinity, sigma-weighted", Kind::Affinity, Weighting::Sigma),
    ] {
        s.run(label, 1e-8, 200, |rng, t| {
            let (r, q, ch) = triple(rng, t)?;
            Ok(vec![-contractibility_slack_weighted(&r, &q, &ch, kind, w)?])
        });
    }
    s
}

/// Orthogonal projectors from a random unitary, columns split into 2 or 3 groups.
fn random_pinching(rng: &mut ChaCha8Rng, d: usize) -> Vec<M> {
    let u = random_unitary_with::<f64, _>(d, rng);
    let groups = rng.random_range(2..=3.min(d));
    let mut cuts: Vec<usize> = (1..d).collect();
    while cuts.len() > groups - 1 {
        cuts.remove(rng.random_range(0..cuts.len()));
    }
    let mut bounds = vec![0];
    bounds.extend(cuts);
    bounds.push(d);
    bounds
        .windows(2)
        .map(|w| {
            let cols: Vec<usize> = (w[0]..w[1]).collect();
            let v = u.columns(&cols);
            &v * &v.adjoint()
        })
        .collect()
}

pub(crate) fn properties(mut s: Suite) -> Suite {
    for kind in Kind::ALL {
        let k = kind.as_str();
        s.run(&format!("P1 range, {k}"), 1e-8, 100, |rng, t| {
            let (r, q) = pair(rng, DIMS[t % 4])?;
            let x = raw(kind, &r, &q)?;
            Ok(vec![(-x).max(x - 1.0)])
        });
        s.run(&format!("P1 self overlap, {k}"), 1e-9, 100, |rng, t| {
            let r = gen::state(rng, DIMS[t % 4], false)?;
            Ok(vec![1.0 - raw(kind, &r, &r)?])
        });
        s.run(&format!("P1 distinct supports below 1 - 1e-6, {k}"), 0.0, 100, |rng, t| {
            let d = DIMS[t % 4];
            let r = pcoh::states::random_density_with(d, rng.random_range(1..d), rng)?;
            let q = pcoh::states::random_density_with(d, rng.random_range(1..d), rng)?;
            Ok(vec![raw(kind, &r, &q)? - (1.0 - 1e-6)])
        });
        s.run(&format!("P2 branch scaling, {k}"), 1e-8, 100, |rng, t| {
            let d = DIMS[t % 4];
            let (r, q) = pair(rng, d)?;
            let ch = random_channel_with(d, rng.random_range(2..=5), rng);
            let mut devs = Vec::new();
            for (br, bq) in subselect(&r, &ch)?.iter().zip(subselect(&q, &ch)?) {
                if let (Some(sr), Some(sq)) = (&br.state, &bq.state) {
                    let scaled = overlap_psd(kind, &br.unnormalized, &bq.unnormalized)?
                        / (br.probability * bq.probability).sqrt();
                    devs.push((scaled - raw(kind, sr, sq)?).abs());
                }
            }
            Ok(devs)
        });
        s.run(&format!("P3 monotone under channels, {k}"), 1e-8, 200, |rng, t| {
            let (r, q, ch) = if t % 2 == 0 {
                let (n_a, n_b) = gen::pick(rng, &SPLITS);
                let (r, q) = pair(rng, n_a * n_b)?;
                (r, q, gen::trace_out_b(n_a, n_b)?)
            } else {
                let d = gen::pick(rng, &DIMS);
                let (r, q) = pair(rng, d)?;
                (r, q, random_channel_with(d, rng.random_range(1..=5), rng))
            };
            Ok(vec![raw(kind, &r, &q)? - raw(kind, &apply_channel(&r, &ch)?, &apply_channel(&q, &ch)?)?])
        });
        s.run(&format!("P4 block additivity, {k}"), 1e-8, 100, |rng, t| {
            let d = [3, 4, 6, 8][t % 4];
            let (r, q) = pair(rng, d)?;
            let ps = random_pinching(rng, d);
            let mut pr = M::zeros(d, d);
            let mut pq = M::zeros(d, d);
            let mut sum = 0.0;
            for p in &ps {
                let a = p.sandwich(r.matrix()).hermitian_part();
                let b = p.sandwich(q.matrix()).hermitian_part();
                sum += overlap_psd(kind, &a, &b)?;
                pr += &a;
                pq += &b;
            }
            Ok(vec![(overlap_psd(kind, &pr, &pq)? - sum).abs()])
        });
        s.run(&format!("P5 branch sum dominates, {k}"), 1e-8, 100, |rng, t| {
            let d = DIMS[t % 4];
            let (r, q) = pair(rng, d)?;
            let ch = random_channel_with(d, rng.random_range(2..=5), rng);
            let mut sum = 0.0;
            for op in ch.operators() {
                sum += overlap_psd(kind, &op.sandwich(r.matrix()).hermitian_part(), &op.sandwich(q.matrix()).hermitian_part())?;
            }
            Ok(vec![raw(kind, &r, &q)? - sum])
        });
    }
    s
}
