//! Random coding on the coherent-state channel, decoded with the
//! square-root measurement.
//!
//! Codewords are strings of `n` coherent amplitudes drawn from the Gaussian
//! prior and kept only when their total energy falls in the shell
//! `[nE - delta, nE]`. Product coherent states are fully described by their
//! Gram matrix, so decoding needs no Fock-space truncation.

use std::io::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{domain, Error, Result};
use crate::fock::{self, CMatrix, HermitianOperator, C64};
use crate::gaussian::OptimalGaussianPrior;
use crate::reliability;

/// Proposals after which a vanishing acceptance rate aborts sampling.
pub const MAX_PROPOSALS: u64 = 10_000_000;
/// Acceptance rate below which sampling gives up.
pub const MIN_ACCEPTANCE: f64 = 1e-6;
/// Largest codebook simulated.
pub const MAX_WORDS: usize = 4096;

#[derive(Debug, Clone, PartialEq)]
pub struct Codebook {
    pub n: usize,
    pub words: Vec<Vec<C64>>,
    pub energy: f64,
    pub delta: f64,
    pub proposals: u64,
    pub accepted: u64,
}

impl Codebook {
    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    /// Acceptance rate of the rejection sampler.
    pub fn nu_hat(&self) -> f64 {
        self.accepted as f64 / self.proposals as f64
    }
}

fn word_energy(w: &[C64]) -> f64 {
    w.iter().map(|a| a.norm_sqr()).sum()
}

struct ShellSampler {
    prior: OptimalGaussianPrior,
    n: usize,
    lo: f64,
    hi: f64,
    proposals: u64,
    accepted: u64,
}

impl ShellSampler {
    fn new(energy: f64, n: usize, delta: f64) -> Result<Self> {
        if !(delta > 0.0) {
            return domain(format!("shell width must be > 0, got {delta}"));
        }
        if n == 0 {
            return Err(Error::InvalidInput("word length must be >= 1".into()));
        }
        let hi = n as f64 * energy;
        Ok(Self {
            prior: OptimalGaussianPrior::new(energy)?,
            n,
            lo: hi - delta,
            hi,
            proposals: 0,
            accepted: 0,
        })
    }

    fn propose(&mut self, rng: &mut ChaCha8Rng, word: &mut Vec<C64>) -> Result<bool> {
        if self.proposals >= MAX_PROPOSALS
            && (self.accepted as f64) < MIN_ACCEPTANCE * self.proposals as f64
        {
            return Err(Error::SamplingTimeout { proposals: self.proposals, accepted: self.accepted });
        }
        word.clear();
        word.extend((0..self.n).map(|_| self.prior.sample(rng)));
        self.proposals += 1;
        let e = word_energy(word);
        let ok = e >= self.lo && e <= self.hi;
        if ok {
            self.accepted += 1;
        }
        Ok(ok)
    }
}

/// `words` codewords drawn i.i.d. from the shell-conditioned product prior.
pub fn sample_codebook(
    energy: f64,
    n: usize,
    words: usize,
    delta: f64,
    rng: &mut ChaCha8Rng,
) -> Result<Codebook> {
    if words == 0 {
        return Err(Error::InvalidInput("codebook needs at least one word".into()));
    }
    let mut sampler = ShellSampler::new(energy, n, delta)?;
    let mut out = Vec::with_capacity(words);
    let mut w = Vec::with_capacity(n);
    while out.len() < words {
        if sampler.propose(rng, &mut w)? {
            out.push(w.clone());
        }
    }
    Ok(Codebook {
        n,
        words: out,
        energy,
        delta,
        proposals: sampler.proposals,
        accepted: sampler.accepted,
    })
}

/// Fraction of `proposals` product-prior words that land in the shell.
pub fn estimate_shell_probability(
    energy: f64,
    n: usize,
    delta: f64,
    proposals: u64,
    rng: &mut ChaCha8Rng,
) -> Result<f64> {
    let mut sampler = ShellSampler::new(energy, n, delta)?;
    let mut w = Vec::with_capacity(n);
    for _ in 0..proposals {
        sampler.propose(rng, &mut w)?;
    }
    Ok(sampler.accepted as f64 / proposals.max(1) as f64)
}

/// Overlaps `<u_j|u_k>` of the product coherent states of a codebook.
pub fn gram_matrix(cb: &Codebook) -> HermitianOperator {
    let m = cb.len();
    let energies: Vec<f64> = cb.words.iter().map(|w| word_energy(w)).collect();
    let g = CMatrix::from_fn(m, m, |j, k| {
        if j == k {
            return C64::new(1.0, 0.0);
        }
        let cross: C64 = cb.words[j].iter().zip(&cb.words[k]).map(|(a, b)| a.conj() * b).sum();
        (cross - 0.5 * (energies[j] + energies[k])).exp()
    });
    HermitianOperator::from_matrix_unchecked(g)
}

/// Average error `1 - (1/N) sum_k ((G^{1/2})_{kk})^2` of the square-root
/// measurement for equiprobable pure states with Gram matrix `G`.
pub fn srm_error(gram: &HermitianOperator) -> Result<f64> {
    let m = gram.dim();
    if m == 0 {
        return Err(Error::InvalidInput("empty Gram matrix".into()));
    }
    let root = fock::hermitian_sqrt(gram)?;
    let hit: f64 = (0..m).map(|k| root.matrix()[(k, k)].re.powi(2)).sum::<f64>() / m as f64;
    Ok((1.0 - hit).clamp(0.0, 1.0))
}

#[derive(Debug, Clone, PartialEq)]
pub struct MCReport {
    pub n: usize,
    pub words: usize,
    pub rate: f64,
    pub trials: usize,
    pub mean_error: f64,
    pub stderr: f64,
    pub nu_hat: f64,
    pub random_coding_bound: f64,
    pub expurgated_bound: f64,
    pub seed: u64,
}

impl MCReport {
    /// `-ln(mean_error) / n`, the empirical error exponent.
    pub fn empirical_exponent(&self) -> f64 {
        -self.mean_error.ln() / self.n as f64
    }
}

/// CSV `n,N,R,mean_error,stderr,nu_hat,bound_rc,bound_ex,seed`.
pub fn write_reports_csv<W: Write>(reports: &[MCReport], writer: W, bits: bool) -> Result<()> {
    let scale = if bits { std::f64::consts::LN_2.recip() } else { 1.0 };
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["n", "N", "R", "mean_error", "stderr", "nu_hat", "bound_rc", "bound_ex", "seed"])?;
    for r in reports {
        w.write_record(&[
            r.n.to_string(),
            r.words.to_string(),
            format!("{}", r.rate * scale),
            format!("{:.10e}", r.mean_error),
            format!("{:.10e}", r.stderr),
            format!("{:.10e}", r.nu_hat),
            format!("{:.10e}", r.random_coding_bound),
            format!("{:.10e}", r.expurgated_bound),
            r.seed.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Independent stream for trial `trial` at word length `n`.
pub fn trial_rng(seed: u64, n: usize, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((n as u64) << 32) | trial as u64);
    rng
}

/// `2 (e^{p delta} / nu)^2 exp{-n [mu(s, p) - sR]}` at the random-coding optimizer.
pub fn random_coding_bound(energy: f64, rate: f64, n: usize, delta: f64, nu: f64) -> Result<f64> {
    let opt = reliability::random_coding_exponent(energy, rate)?;
    let mu = reliability::mu_gauss(energy, opt.s, opt.p)?;
    let log = 2f64.ln() + 2.0 * (opt.p * delta - nu.ln()) - n as f64 * (mu - opt.s * rate);
    Ok(log.exp())
}

/// `exp{-n [mu~(s, p) - s (R + (2/n) ln(2 e^{p delta} / nu))]}` at the
/// expurgated optimizer.
pub fn expurgated_bound(energy: f64, rate: f64, n: usize, delta: f64, nu: f64) -> Result<f64> {
    let (opt, _) = reliability::expurgated_exponent(energy, rate)?;
    let mu = reliability::mu_tilde_gauss(energy, opt.s, opt.p)?;
    let penalty = 2.0 / n as f64 * (2f64.ln() + opt.p * delta - nu.ln());
    Ok((-(n as f64) * (mu - opt.s * (rate + penalty))).exp())
}

/// Mean square-root-measurement error of random shell codes of rate `rate`
/// for each word length in `n_list`, next to both analytic bounds.
pub fn run_experiment(
    energy: f64,
    rate: f64,
    n_list: &[usize],
    trials: usize,
    delta: f64,
    seed: u64,
) -> Result<Vec<MCReport>> {
    if !(energy > 0.0) || !energy.is_finite() {
        return domain(format!("energy must be > 0, got {energy}"));
    }
    if !(rate > 0.0) || !rate.is_finite() {
        return domain(format!("rate must be > 0, got {rate}"));
    }
    if trials == 0 {
        return Err(Error::InvalidInput("need at least one trial".into()));
    }
    n_list
        .iter()
        .map(|&n| {
            let words_f = (n as f64 * rate).exp().ceil();
            if words_f > MAX_WORDS as f64 {
                return Err(Error::InvalidInput(format!(
                    "n = {n}, R = {rate} needs {words_f} codewords; the limit is {MAX_WORDS}"
                )));
            }
            let words = words_f as usize;
            let outcomes: Vec<Result<(f64, u64, u64)>> = (0..trials)
                .into_par_iter()
                .map(|t| {
                    let mut rng = trial_rng(seed, n, t);
                    let cb = sample_codebook(energy, n, words, delta, &mut rng)?;
                    let err = if words == 1 { 0.0 } else { srm_error(&gram_matrix(&cb))? };
                    Ok((err, cb.proposals, cb.accepted))
                })
                .collect();
            let mut errors = Vec::with_capacity(trials);
            let (mut proposals, mut accepted) = (0u64, 0u64);
            for o in outcomes {
                let (e, p, a) = o?;
                errors.push(e);
                proposals += p;
                accepted += a;
            }
            let mean = errors.iter().sum::<f64>() / trials as f64;
            let stderr = if trials > 1 {
                let var = errors.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / (trials - 1) as f64;
                (var / trials as f64).sqrt()
            } else {
                0.0
            };
            let nu_hat = accepted as f64 / proposals as f64;
            Ok(MCReport {
                n,
                words,
                rate,
                trials,
                mean_error: mean,
                stderr,
                nu_hat,
                random_coding_bound: random_coding_bound(energy, rate, n, delta, nu_hat)?,
                expurgated_bound: expurgated_bound(energy, rate, n, delta, nu_hat)?,
                seed,
            })
        })
        .collect()
}
