//! Error exponents for pure-state channels with an additive input constraint.
//!
//! Generic ensembles go through the operator forms of the Gallager-type
//! functions `mu` and `mu~`. For the coherent-state channel under the
//! Gaussian prior both have closed forms. Those closed forms give the
//! random-coding exponent `E_r` and the expurgated exponent `E_ex`, which
//! meet along a straight segment of slope -1.

use std::fmt;
use std::io::Write;

use crate::channel::Ensemble;
use crate::error::{domain, Error, Result};
use crate::fock::{self, CMatrix};
use crate::optimize::{bisect, golden_section_max};

/// Tolerance in `s` of the golden-section search for `E_r`.
pub const S_TOL: f64 = 1e-8;

/// `(1 + sqrt(4E^2 + 1)) / 2`, the positive root of `g^2 - g = E^2`.
pub fn g(e: f64) -> f64 {
    0.5 * (1.0 + (4.0 * e * e + 1.0).sqrt())
}

fn check_energy(e: f64) -> Result<()> {
    if !(e >= 0.0) || !e.is_finite() {
        return domain(format!("energy must be finite and >= 0, got {e}"));
    }
    Ok(())
}

fn check_tilt(e: f64, p: f64) -> Result<()> {
    check_energy(e)?;
    if !(p >= 0.0) || p * e >= 1.0 {
        return domain(format!("tilt p must satisfy 0 <= p < 1/E, got p = {p}, E = {e}"));
    }
    Ok(())
}

/// `(1+s) p E + ln[(1 + E - pE)^{1+s} - E^{1+s}]`, requiring `0 <= p < 1/E`.
pub fn mu_gauss(e: f64, s: f64, p: f64) -> Result<f64> {
    check_tilt(e, p)?;
    if !(s >= 0.0) {
        return domain(format!("s must be >= 0, got {s}"));
    }
    let a = 1.0 + e - p * e;
    let arg = a.powf(1.0 + s) - e.powf(1.0 + s);
    if !(arg > 0.0) {
        return domain(format!("log argument {arg:e} is not positive"));
    }
    Ok((1.0 + s) * p * e + arg.ln())
}

/// `s {2pE + ln[(1 - pE)^2 + 2E(1 - pE)/s]}`, requiring `0 <= p < 1/E`, `s > 0`.
pub fn mu_tilde_gauss(e: f64, s: f64, p: f64) -> Result<f64> {
    check_tilt(e, p)?;
    if !(s > 0.0) {
        return domain(format!("s must be > 0, got {s}"));
    }
    let u = 1.0 - p * e;
    let arg = 1.0 + p * p * e * e - 2.0 * p * e + 2.0 * e * u / s;
    if !(arg > 0.0) {
        return domain(format!("log argument {arg:e} is not positive"));
    }
    Ok(s * (2.0 * p * e + arg.ln()))
}

/// Root in `p` of `(1 + E - pE)^s (1 - p) = E^s`, the maximizer of
/// [`mu_gauss`] over `p` at fixed `s`.
pub fn solve_p_star(e: f64, s: f64) -> Result<f64> {
    check_energy(e)?;
    if s == 0.0 {
        return Ok(0.0);
    }
    if !(s > 0.0) {
        return domain(format!("s must be >= 0, got {s}"));
    }
    if e == 0.0 {
        // The condition reads 1 - p = 0, but the tilt is irrelevant at E = 0.
        return Ok(0.0);
    }
    let hi = 1f64.min(1.0 / e) - 1e-12;
    let es = e.powf(s);
    bisect(|p| (1.0 + e - p * e).powf(s) * (1.0 - p) - es, 0.0, hi)
}

/// `1 + 1/E - g(E)/E`, the optimal tilt at `s = 1`.
pub fn p_one(e: f64) -> Result<f64> {
    if !(e > 0.0) || !e.is_finite() {
        return domain(format!("energy must be > 0, got {e}"));
    }
    Ok(1.0 + (1.0 - g(e)) / e)
}

/// `2(E + 1 - g) + ln g`, the value of `mu` at `s = 1` and the optimal tilt.
pub fn mu_one(e: f64) -> Result<f64> {
    check_energy(e)?;
    let ge = g(e);
    Ok(2.0 * (e + 1.0 - ge) + ge.ln())
}

/// `E + 1 - g + (g^2 ln g - E^2 ln E)/(g^2 - E^2)`, the slope in `s` of the
/// tilt-optimized `mu` at `s = 1`.
pub fn dmu_ds_one(e: f64) -> Result<f64> {
    check_energy(e)?;
    let ge = g(e);
    let e2_ln_e = if e == 0.0 { 0.0 } else { e * e * e.ln() };
    // g^2 - E^2 = g.
    Ok(e + 1.0 - ge + (ge * ge * ge.ln() - e2_ln_e) / ge)
}

/// `(E + 1) ln(E + 1) - E ln E`, the capacity of the pure-state channel.
pub fn capacity(e: f64) -> f64 {
    crate::gaussian::thermal_entropy(e)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// `R < ln g(E)`: interior optimum `s > 1` of the expurgated bound.
    Expurgated,
    /// `ln g(E) <= R <= dmu_ds_one(E)`: both bounds equal `mu_one - R`.
    Linear,
    /// `R > dmu_ds_one(E)`: interior optimum `s < 1` of the random-coding bound.
    RandomCoding,
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Regime::Expurgated => "expurgated",
            Regime::Linear => "linear",
            Regime::RandomCoding => "random-coding",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExponentValue {
    pub value: f64,
    pub s: f64,
    pub p: f64,
}

/// Optimal tilt of `mu~(E, s, .)`: `1/s + 1/E - g(E/s)/E`.
fn p_tilde_opt(e: f64, s: f64) -> f64 {
    1.0 / s + (1.0 - g(e / s)) / e
}

/// Expurgated exponent of the coherent-state channel under the Gaussian prior.
///
/// Below `ln g(E)` the optimum over `s >= 1` is interior, at
/// `s = E / sqrt(e^{2R} - e^R)`, with value `2E(1 - sqrt(1 - e^{-R}))`;
/// above it the optimum sits at `s = 1` and the value is `mu_one - R`,
/// clamped at zero.
pub fn expurgated_exponent(e: f64, r: f64) -> Result<(ExponentValue, Regime)> {
    if !(e > 0.0) || !e.is_finite() {
        return domain(format!("energy must be > 0, got {e}"));
    }
    if !(r > 0.0) || !r.is_finite() {
        return domain(format!("rate must be > 0, got {r}"));
    }
    if r < g(e).ln() {
        let s = e / ((2.0 * r).exp() - r.exp()).sqrt();
        let value = 2.0 * e * (1.0 - (-(-r).exp_m1()).sqrt());
        return Ok((ExponentValue { value, s, p: p_tilde_opt(e, s) }, Regime::Expurgated));
    }
    let value = (mu_one(e)? - r).max(0.0);
    let regime = if r <= dmu_ds_one(e)? { Regime::Linear } else { Regime::RandomCoding };
    Ok((ExponentValue { value, s: 1.0, p: p_one(e)? }, regime))
}

/// `max_{0 <= s <= 1} [mu(E, s, p*(s)) - sR]`, clamped at zero.
pub fn random_coding_exponent(e: f64, r: f64) -> Result<ExponentValue> {
    if !(e > 0.0) || !e.is_finite() {
        return domain(format!("energy must be > 0, got {e}"));
    }
    if !(r > 0.0) || !r.is_finite() {
        return domain(format!("rate must be > 0, got {r}"));
    }
    let objective = |s: f64| -> Result<f64> { Ok(mu_gauss(e, s, solve_p_star(e, s)?)? - s * r) };
    // Surface the first failure instead of maximizing NaNs.
    objective(0.0)?;
    objective(1.0)?;
    let (s, v) = golden_section_max(|s| objective(s).unwrap_or(f64::NEG_INFINITY), 0.0, 1.0, S_TOL);
    if v <= 0.0 {
        return Ok(ExponentValue { value: 0.0, s: 0.0, p: 0.0 });
    }
    Ok(ExponentValue { value: v, s, p: solve_p_star(e, s)? })
}

pub fn regime(e: f64, r: f64) -> Result<Regime> {
    Ok(if r < g(e).ln() {
        Regime::Expurgated
    } else if r <= dmu_ds_one(e)? {
        Regime::Linear
    } else {
        Regime::RandomCoding
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExponentRecord {
    pub rate: f64,
    pub e_r: ExponentValue,
    pub e_ex: ExponentValue,
    pub regime: Regime,
}

impl ExponentRecord {
    /// `max(E_r, E_ex)`.
    pub fn value(&self) -> f64 {
        self.e_r.value.max(self.e_ex.value)
    }

    /// Parameters of the bound that is active in this regime.
    pub fn active(&self) -> ExponentValue {
        match self.regime {
            Regime::Expurgated | Regime::Linear => self.e_ex,
            Regime::RandomCoding => self.e_r,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExponentCurve {
    pub energy: f64,
    pub records: Vec<ExponentRecord>,
}

impl ExponentCurve {
    /// CSV `R,E_r,E_ex,regime,s_opt,p_opt`; rates and exponents are divided
    /// by `ln 2` when `bits` is set.
    pub fn write_csv<W: Write>(&self, writer: W, bits: bool) -> Result<()> {
        let scale = if bits { std::f64::consts::LN_2.recip() } else { 1.0 };
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["R", "E_r", "E_ex", "regime", "s_opt", "p_opt"])?;
        for rec in &self.records {
            let a = rec.active();
            w.write_record(&[
                format!("{:.10}", rec.rate * scale),
                format!("{:.12}", rec.e_r.value * scale),
                format!("{:.12}", rec.e_ex.value * scale),
                rec.regime.to_string(),
                format!("{:.10}", a.s),
                format!("{:.10}", a.p),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Both exponents and the regime label at each rate.
pub fn exponent_curve(e: f64, rates: &[f64]) -> Result<ExponentCurve> {
    let records = rates
        .iter()
        .map(|&r| {
            let (e_ex, regime) = expurgated_exponent(e, r)?;
            let e_r = random_coding_exponent(e, r)?;
            Ok(ExponentRecord { rate: r, e_r, e_ex, regime })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ExponentCurve { energy: e, records })
}

fn require_pure(ens: &Ensemble) -> Result<()> {
    if !ens.all_pure() {
        return Err(Error::InvalidInput(
            "generic exponents are defined for pure-state ensembles".into(),
        ));
    }
    Ok(())
}

/// `-ln Tr (sum_i pi_i e^{p (f_i - E)} S_i)^{1+s}` for a pure-state ensemble.
pub fn mu_generic(ens: &Ensemble, s: f64, p: f64) -> Result<f64> {
    require_pure(ens)?;
    if !(s >= 0.0) || !(p >= 0.0) {
        return domain(format!("need s >= 0 and p >= 0, got s = {s}, p = {p}"));
    }
    let coeffs: Vec<f64> = ens
        .weights()
        .iter()
        .zip(ens.f_values())
        .map(|(w, f)| w * (p * (f - ens.budget())).exp())
        .collect();
    let tilted = ens.weighted_operator(&coeffs)?;
    let t = fock::trace_power(&tilted, 1.0 + s)?;
    if !(t > 0.0) || !t.is_finite() {
        return domain(format!("tilted operator has trace power {t:e}"));
    }
    Ok(-t.ln())
}

/// `-s ln sum_{i,k} pi_i pi_k e^{p (f_i + f_k - 2E)} |<psi_i|psi_k>|^{2/s}`,
/// summed in log space. Quadratic in the ensemble size.
pub fn mu_tilde_generic(ens: &Ensemble, s: f64, p: f64) -> Result<f64> {
    require_pure(ens)?;
    if !(s > 0.0) || !(p >= 0.0) {
        return domain(format!("need s > 0 and p >= 0, got s = {s}, p = {p}"));
    }
    let d = ens.dim();
    let live: Vec<usize> = (0..ens.len()).filter(|&i| ens.weights()[i] > 0.0).collect();
    let mut psi = CMatrix::zeros(d, live.len());
    for (col, &i) in live.iter().enumerate() {
        let v = ens.signals()[i].vector().expect("checked pure");
        psi.set_column(col, v.amplitudes());
    }
    let gram = psi.adjoint() * &psi;
    let log_a: Vec<f64> = live
        .iter()
        .map(|&i| ens.weights()[i].ln() + p * (ens.f_values()[i] - ens.budget()))
        .collect();

    let mut terms = Vec::with_capacity(live.len() * live.len());
    for i in 0..live.len() {
        for k in 0..live.len() {
            let ov = gram[(i, k)].norm_sqr();
            if ov > 0.0 {
                terms.push(log_a[i] + log_a[k] + ov.ln() / s);
            }
        }
    }
    let max = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return domain("all overlaps vanish".to_string());
    }
    let sum: f64 = terms.iter().map(|t| (t - max).exp()).sum();
    Ok(-s * (max + sum.ln()))
}

/// The candidate with the largest [`mu_generic`]; `(index, value)`.
pub fn best_mu_generic(candidates: &[Ensemble], s: f64, p: f64) -> Result<(usize, f64)> {
    let mut best: Option<(usize, f64)> = None;
    for (i, ens) in candidates.iter().enumerate() {
        let v = mu_generic(ens, s, p)?;
        if best.is_none_or(|(_, b)| v > b) {
            best = Some((i, v));
        }
    }
    best.ok_or_else(|| Error::InvalidInput("no candidate ensembles".into()))
}
