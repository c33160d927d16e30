//! Extremal eigenpair of the best signed operator.
//!
//! The objective max over states of sum_t coeff_t * |<T_t>| equals the
//! largest eigenvalue of sum_t s_t coeff_t T_t maximized over sign vectors
//! s. Small sign spaces are enumerated exactly; larger ones alternate
//! between an eigenpair solve at fixed signs and re-reading the signs off
//! the eigenvector's own term expectations, which never decreases the
//! eigenvalue and therefore terminates at a fixed point or a cycle.
//!
//! The eigenpair solve is power iteration on O^2, which is positive
//! semidefinite and converges to the largest |eigenvalue| regardless of
//! where the spectrum sits. The +mu branch is then recovered by projecting
//! with O v + mu v; if the dominant extreme is negative the whole sign
//! vector is flipped, which negates the spectrum and costs nothing.

use std::collections::HashSet;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::operator::{signed_sum_apply, term_expectation, term_ops, TermOp};
use super::settings::SettingSet;
use super::state::PureState;
use crate::term::BellInequality;
use crate::Error;

#[derive(Debug, Clone)]
pub struct EigenConfig {
    /// Random sign/vector initializations when alternating.
    pub restarts: usize,
    pub rng_seed: u64,
    /// Total operator applications allowed per call.
    pub power_budget: usize,
    /// Relative residual target for the eigenpair solve.
    pub rayleigh_tol: f64,
    /// Enumerate all sign vectors exactly when the term count is at most
    /// this; 2^(T-1) classes after fixing the first sign.
    pub enumerate_limit: usize,
    /// Sign-refresh rounds per restart before declaring a cycle.
    pub max_sign_rounds: usize,
}

impl Default for EigenConfig {
    fn default() -> Self {
        EigenConfig {
            restarts: 64,
            rng_seed: 7,
            power_budget: 100_000,
            rayleigh_tol: 1e-10,
            enumerate_limit: 8,
            max_sign_rounds: 64,
        }
    }
}

#[derive(Debug, Clone)]
pub struct EigenOutcome {
    pub value: f64,
    pub state: PureState,
    pub signs: Vec<i8>,
    /// Operator applications consumed.
    pub applies: usize,
}

fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

fn normalize(v: &mut [Complex64]) -> f64 {
    let r = norm(v);
    if r > 0.0 {
        let inv = 1.0 / r;
        for x in v.iter_mut() {
            *x *= inv;
        }
    }
    r
}

struct Engine<'a> {
    ops: &'a [TermOp],
    n: usize,
    budget: usize,
    used: usize,
    tol: f64,
    scratch: Vec<Complex64>,
}

impl<'a> Engine<'a> {
    fn new(ops: &'a [TermOp], n: usize, cfg: &EigenConfig) -> Self {
        Engine {
            ops,
            n,
            budget: cfg.power_budget,
            used: 0,
            tol: cfg.rayleigh_tol,
            scratch: vec![Complex64::new(0.0, 0.0); 1 << n],
        }
    }

    fn apply(&mut self, signs: &[i8], v: &[Complex64], out: &mut [Complex64]) -> bool {
        if self.used >= self.budget {
            return false;
        }
        self.used += 1;
        signed_sum_apply(self.ops, signs, v, &mut self.scratch, out);
        true
    }

    /// Power iteration on O^2 from `v0`: largest |eigenvalue| of O and an
    /// accompanying vector. None when the budget runs out first.
    fn power_mu(&mut self, signs: &[i8], v0: &[Complex64]) -> Option<(f64, Vec<Complex64>)> {
        let dim = v0.len();
        let mut v = v0.to_vec();
        normalize(&mut v);
        let mut w = vec![Complex64::new(0.0, 0.0); dim];
        let mut u = vec![Complex64::new(0.0, 0.0); dim];
        let mut sweeps = 0usize;
        loop {
            if !self.apply(signs, &v, &mut w) {
                return None;
            }
            let rho = w.iter().map(|x| x.norm_sqr()).sum::<f64>();
            if rho < 1e-300 {
                // Zero operator on this vector; mu = 0 is exact.
                return Some((0.0, v));
            }
            if !self.apply(signs, &w, &mut u) {
                return None;
            }
            let nu_sq = u.iter().map(|x| x.norm_sqr()).sum::<f64>();
            // Residual of v as an O^2 eigenvector: ||O^2 v - rho v||.
            let res_sq = (nu_sq - rho * rho).max(0.0);
            sweeps += 1;
            let scale = rho.max(1.0);
            if sweeps >= 2 && res_sq.sqrt() <= self.tol.sqrt() * scale {
                return Some((rho.sqrt(), v));
            }
            v.copy_from_slice(&u);
            normalize(&mut v);
        }
    }

    /// Rotates (mu, v) onto the +mu eigenbranch, flipping the sign vector
    /// globally if the dominant extreme was negative. Returns the refined
    /// eigenvalue (Rayleigh quotient on O at the projected vector).
    fn branch_project(
        &mut self,
        signs: &mut [i8],
        v: &[Complex64],
        mu: f64,
    ) -> Option<(f64, Vec<Complex64>)> {
        let dim = v.len();
        let mut w = vec![Complex64::new(0.0, 0.0); dim];
        if !self.apply(signs, v, &mut w) {
            return None;
        }
        let rq = inner(v, &w).re;
        if rq < 0.0 {
            for s in signs.iter_mut() {
                *s = -*s;
            }
            for x in w.iter_mut() {
                *x = -*x;
            }
        }
        let mut p: Vec<Complex64> = w
            .iter()
            .zip(v)
            .map(|(wx, vx)| *wx + Complex64::new(mu, 0.0) * *vx)
            .collect();
        let np = normalize(&mut p);
        let vp = if np < 1e-12 * mu.max(1.0) { v.to_vec() } else { p };
        if !self.apply(signs, &vp, &mut w) {
            return None;
        }
        Some((inner(&vp, &w).re, vp))
    }

    fn signs_from_vector(&self, v: &[Complex64], old: &[i8]) -> Vec<i8> {
        let state = PureState::normalized(self.n, v.to_vec()).expect("nonzero eigvec");
        self.ops
            .iter()
            .zip(old)
            .map(|(op, &prev)| {
                let e = term_expectation(op, &state);
                if e.abs() < 1e-14 {
                    prev
                } else if e >= 0.0 {
                    1
                } else {
                    -1
                }
            })
            .collect()
    }
}

struct Candidate {
    value: f64,
    vector: Vec<Complex64>,
    signs: Vec<i8>,
}

/// Alternates eigenpair solves with sign refreshes from one start point,
/// recording every converged stage. Stops on a fixed point, a cycle, round
/// exhaustion, or budget exhaustion.
fn alternate(
    eng: &mut Engine,
    mut signs: Vec<i8>,
    v0: Vec<Complex64>,
    max_rounds: usize,
    found: &mut Vec<Candidate>,
) {
    let mut seen: HashSet<Vec<i8>> = HashSet::new();
    let mut v = v0;
    for _ in 0..max_rounds {
        if !seen.insert(signs.clone()) {
            return; // cycle
        }
        let Some((mu, vc)) = eng.power_mu(&signs, &v) else {
            return; // budget
        };
        let Some((lambda, vp)) = eng.branch_project(&mut signs, &vc, mu) else {
            return;
        };
        found.push(Candidate {
            value: lambda,
            vector: vp.clone(),
            signs: signs.clone(),
        });
        let next = eng.signs_from_vector(&vp, &signs);
        if next == signs {
            return; // fixed point
        }
        signs = next;
        v = vp;
    }
}

fn random_vector(dim: usize, rng: &mut impl Rng) -> Vec<Complex64> {
    use rand_distr::StandardNormal;
    (0..dim)
        .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect()
}

/// Largest eigenvalue over sign choices with explicit configuration and an
/// optional warm start (a vector near the expected eigenvector; its own
/// term-expectation signs seed the sign vector).
pub fn max_eigenvalue_with(
    ineq: &BellInequality,
    settings: &SettingSet,
    cfg: &EigenConfig,
    warm: Option<&PureState>,
) -> Result<EigenOutcome, Error> {
    let ops = term_ops(ineq, settings)?;
    let n = ineq.n();
    let dim = 1usize << n;
    let t = ops.len();
    let mut eng = Engine::new(&ops, n, cfg);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
    let mut found: Vec<Candidate> = Vec::new();

    if t <= cfg.enumerate_limit && t < 64 {
        // The global flip is covered by mu = max |eigenvalue|, so the
        // first sign is pinned and only 2^(T-1) classes are visited.
        for mask in 0..(1u64 << (t - 1)) {
            let mut signs: Vec<i8> = vec![1; t];
            for (i, s) in signs.iter_mut().enumerate().skip(1) {
                if mask >> (i - 1) & 1 == 1 {
                    *s = -1;
                }
            }
            let v0 = match warm {
                Some(st) if mask == 0 => st.amplitudes().to_vec(),
                _ => random_vector(dim, &mut rng),
            };
            let Some((mu, vc)) = eng.power_mu(&signs, &v0) else {
                break;
            };
            let Some((lambda, vp)) = eng.branch_project(&mut signs, &vc, mu) else {
                break;
            };
            found.push(Candidate {
                value: lambda,
                vector: vp,
                signs,
            });
        }
    } else {
        // Start points: the warm vector (if any), the all-plus sign
        // vector, then alternating random sign vectors and random states
        // that vote their own signs.
        if let Some(st) = warm {
            let v0 = st.amplitudes().to_vec();
            let signs = eng.signs_from_vector(&v0, &vec![1i8; t]);
            alternate(&mut eng, signs, v0, cfg.max_sign_rounds, &mut found);
        }
        let mut restart = 0usize;
        while restart < cfg.restarts && eng.used < eng.budget {
            let v0 = random_vector(dim, &mut rng);
            let signs = if restart == 0 {
                vec![1i8; t]
            } else if restart % 2 == 1 {
                (0..t)
                    .map(|_| if rng.gen::<bool>() { 1i8 } else { -1i8 })
                    .collect()
            } else {
                eng.signs_from_vector(&v0, &vec![1i8; t])
            };
            alternate(&mut eng, signs, v0, cfg.max_sign_rounds, &mut found);
            restart += 1;
        }
    }

    let applies = eng.used;
    let best = found
        .into_iter()
        .max_by(|a, b| a.value.partial_cmp(&b.value).expect("finite eigenvalues"))
        .ok_or(Error::ConvergenceFailure {
            budget: cfg.power_budget as u64,
        })?;
    let state = PureState::normalized(n, best.vector).expect("eigenvector is nonzero");
    Ok(EigenOutcome {
        value: best.value,
        state,
        signs: best.signs,
        applies,
    })
}

/// Largest eigenvalue with default configuration.
pub fn max_eigenvalue(
    ineq: &BellInequality,
    settings: &SettingSet,
) -> Result<EigenOutcome, Error> {
    max_eigenvalue_with(ineq, settings, &EigenConfig::default(), None)
}
