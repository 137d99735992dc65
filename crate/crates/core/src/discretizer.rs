//! Finite discretizations of continuous priors on the complex plane.
//!
//! The disc `|x| <= c` is cut into annuli and sectors whose diameters are at
//! most `eps_l = 2c / l`. Each cell is further split where the signal entropy
//! crosses a multiple of `1/l`, its prior mass is integrated numerically,
//! and the mass is moved to the point of the cell where the constraint
//! functional `f` is smallest. That choice can only lower the mean of `f`,
//! so a feasible prior stays feasible. The mass outside the disc becomes one
//! extra cell on the circle `|x| = c`.

use std::f64::consts::PI;
use std::io::Write;
use std::sync::Arc;

use rayon::prelude::*;

use crate::channel::{Ensemble, Signal, SignalBase};
use crate::error::{Error, Result};
use crate::fock::{DensityOperator, C64};
use crate::quadrature::{self, Rule};

/// A probability distribution on the complex plane: either a density or
/// a single atom.
pub trait Prior: Sync {
    /// Density with respect to `d^2 x`.
    fn density(&self, x: C64) -> f64;

    /// `Some(x0)` when the whole prior is the point mass at `x0`.
    fn point_mass(&self) -> Option<C64> {
        None
    }
}

/// The additive constraint functional `f`.
pub trait Constraint: Sync {
    fn value(&self, x: C64) -> f64;

    /// Exact minimizer over a polar cell, when one is known in closed form.
    fn cell_minimizer(&self, _cell: &PolarCell) -> Option<C64> {
        None
    }
}

/// `f(x) = |x|^2`, the mean signal energy.
#[derive(Debug, Clone, Copy, Default)]
pub struct EnergyConstraint;

impl Constraint for EnergyConstraint {
    fn value(&self, x: C64) -> f64 {
        x.norm_sqr()
    }

    /// Anywhere on the inner arc; the smallest angle wins the tie.
    fn cell_minimizer(&self, cell: &PolarCell) -> Option<C64> {
        Some(C64::from_polar(cell.r0, cell.theta0))
    }
}

/// Input point to signal state.
pub trait StateMap: Sync {
    fn dim(&self) -> usize;

    /// Signal at `x = r e^{i theta}` for phase-covariant maps, as the state at
    /// `r` rotated by `theta`. Returning `None` means the map is not
    /// covariant and [`StateMap::signal`] must be overridden.
    fn radial_base(&self, _r: f64) -> Option<Result<Arc<SignalBase>>> {
        None
    }

    fn signal(&self, x: C64) -> Result<Signal> {
        match self.radial_base(x.norm()) {
            Some(base) => Ok(Signal::rotated(base?, x.arg())),
            None => Err(Error::InvalidInput(
                "state map provides neither radial bases nor signals".into(),
            )),
        }
    }

    /// `H(S_x)` in nats.
    fn entropy(&self, x: C64) -> Result<f64> {
        Ok(self.signal(x)?.entropy())
    }
}

/// Every input maps to the same state.
pub struct ConstantStateMap {
    base: Arc<SignalBase>,
}

impl ConstantStateMap {
    pub fn new(state: DensityOperator) -> Self {
        Self { base: Arc::new(SignalBase::Mixed(state)) }
    }
}

impl StateMap for ConstantStateMap {
    fn dim(&self) -> usize {
        self.base.dim()
    }

    fn signal(&self, _x: C64) -> Result<Signal> {
        Ok(Signal::rotated(self.base.clone(), 0.0))
    }

    fn entropy(&self, _x: C64) -> Result<f64> {
        Ok(self.base.entropy())
    }
}

/// `{r0 <= |x| <= r1, theta0 <= arg x <= theta1}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarCell {
    pub r0: f64,
    pub r1: f64,
    pub theta0: f64,
    pub theta1: f64,
}

impl PolarCell {
    /// `w + 2 r1 sin(dtheta / 2)`, an upper bound on the diameter.
    pub fn diameter_bound(&self) -> f64 {
        let dt = (self.theta1 - self.theta0).min(PI);
        (self.r1 - self.r0) + 2.0 * self.r1 * (0.5 * dt).sin()
    }

    pub fn contains(&self, x: C64) -> bool {
        let r = x.norm();
        let mut t = x.arg();
        if t < 0.0 {
            t += 2.0 * PI;
        }
        r >= self.r0 && r <= self.r1 && t >= self.theta0 && t <= self.theta1
    }

    fn point(&self, u: f64, v: f64) -> C64 {
        C64::from_polar(
            self.r0 + u * (self.r1 - self.r0),
            self.theta0 + v * (self.theta1 - self.theta0),
        )
    }

    /// Corners, points along the edges and an interior lattice, as `(u, v)`
    /// fractions of the radial and angular extents.
    fn sample_fractions(per_edge: usize) -> Vec<(f64, f64)> {
        let n = per_edge.max(2);
        let mut out = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                out.push((i as f64 / (n - 1) as f64, j as f64 / (n - 1) as f64));
            }
        }
        out
    }

    fn split4(&self) -> [PolarCell; 4] {
        let rm = 0.5 * (self.r0 + self.r1);
        let tm = 0.5 * (self.theta0 + self.theta1);
        [
            PolarCell { r0: self.r0, r1: rm, theta0: self.theta0, theta1: tm },
            PolarCell { r0: self.r0, r1: rm, theta0: tm, theta1: self.theta1 },
            PolarCell { r0: rm, r1: self.r1, theta0: self.theta0, theta1: tm },
            PolarCell { r0: rm, r1: self.r1, theta0: tm, theta1: self.theta1 },
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Region {
    Polar(PolarCell),
    /// `|x| > radius`.
    Exterior { radius: f64 },
    /// The prior's single atom.
    Atom,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub region: Region,
    pub mass: f64,
    pub representative: C64,
    pub f_value: f64,
    /// `floor(l H)` at the representative; `None` outside the disc.
    pub entropy_slice: Option<i64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellPartition {
    pub level: usize,
    pub radius: f64,
    pub diameter_bound: f64,
    pub cells: Vec<Cell>,
    /// The entropy was the same at every probed point, so entropy slicing
    /// did nothing and only the geometric refinement applies.
    pub degenerate_level_set: bool,
}

impl CellPartition {
    pub fn total_mass(&self) -> f64 {
        self.cells.iter().map(|c| c.mass).sum()
    }
}

/// Grid parameters for level `l` on the disc of radius `c`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub level: usize,
    pub radius: f64,
    /// Annuli per unit `l^2`; the annulus count is `radial_factor * l^2`.
    pub radial_factor: usize,
    /// Smallest sector count per annulus, doubled until the diameter bound holds.
    pub min_sectors: usize,
    /// Maximum number of 2x2 splits used for entropy slicing.
    pub slicing_depth: usize,
    pub mass_rel_tol: f64,
}

impl GridSpec {
    pub fn new(level: usize, radius: f64) -> Self {
        Self {
            level,
            radius,
            radial_factor: 20,
            min_sectors: 64,
            slicing_depth: 3,
            mass_rel_tol: 1e-8,
        }
    }

    /// `eps_l = 2c / l`.
    pub fn diameter_bound(&self) -> f64 {
        2.0 * self.radius / self.level as f64
    }

    pub fn annuli(&self) -> usize {
        self.radial_factor * self.level * self.level
    }

    pub fn validate(&self) -> Result<()> {
        if self.level == 0 {
            return Err(Error::InvalidInput("grid level must be at least 1".into()));
        }
        if !(self.radius > 0.0) || !self.radius.is_finite() {
            return Err(Error::Domain(format!("grid radius must be > 0, got {}", self.radius)));
        }
        if self.radial_factor == 0 || self.min_sectors == 0 {
            return Err(Error::InvalidInput("grid needs at least one annulus and sector".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct Discretization {
    pub partition: CellPartition,
    pub ensemble: Ensemble,
}

/// Lowest-`f` point among the cell samples; ties go to the smallest angle,
/// then the smallest radius.
fn representative<C: Constraint + ?Sized>(f: &C, cell: &PolarCell) -> C64 {
    if let Some(x) = f.cell_minimizer(cell) {
        return x;
    }
    let mut best = (f64::INFINITY, f64::INFINITY, f64::INFINITY, C64::new(0.0, 0.0));
    for (u, v) in PolarCell::sample_fractions(9) {
        let x = cell.point(u, v);
        let key = (f.value(x), v, u);
        if (key.0, key.1, key.2) < (best.0, best.1, best.2) {
            best = (key.0, key.1, key.2, x);
        }
    }
    best.3
}

/// Minimizer of `f` on the circle `|x| = c` over 4096 equispaced angles.
fn circle_minimizer<C: Constraint + ?Sized>(f: &C, c: f64) -> C64 {
    let cell = PolarCell { r0: c, r1: c, theta0: 0.0, theta1: 2.0 * PI };
    if let Some(x) = f.cell_minimizer(&cell) {
        return x;
    }
    let mut best = (f64::INFINITY, C64::new(c, 0.0));
    for k in 0..4096 {
        let x = C64::from_polar(c, 2.0 * PI * k as f64 / 4096.0);
        let v = f.value(x);
        if v < best.0 {
            best = (v, x);
        }
    }
    best.1
}

fn cell_mass<P: Prior + ?Sized>(prior: &P, cell: &PolarCell, rel_tol: f64) -> f64 {
    let (m, _) = quadrature::adaptive_2d_with(
        Rule::Gk7,
        |r, t| r * prior.density(C64::from_polar(r, t)),
        (cell.r0, cell.r1),
        (cell.theta0, cell.theta1),
        rel_tol,
        1e-300,
        4096,
    );
    m.max(0.0)
}

struct Slicer<'a, S: StateMap + ?Sized> {
    states: &'a S,
    level: f64,
    depth: usize,
}

impl<S: StateMap + ?Sized> Slicer<'_, S> {
    fn entropy(&self, x: C64) -> Result<f64> {
        self.states.entropy(x)
    }

    fn index(&self, h: f64) -> i64 {
        (self.level * h).floor() as i64
    }

    /// Splits `cell` until `floor(l H)` agrees at its corners and center.
    /// Pushes `(cell, slice)` pairs and records every probed entropy range.
    fn slice(
        &self,
        cell: PolarCell,
        depth: usize,
        out: &mut Vec<(PolarCell, i64)>,
        range: &mut (f64, f64),
    ) -> Result<()> {
        let probes = [(0.0, 0.0), (0.0, 1.0), (1.0, 0.0), (1.0, 1.0), (0.5, 0.5)];
        let mut ks = [0i64; 5];
        for (k, (u, v)) in ks.iter_mut().zip(probes) {
            let h = self.entropy(cell.point(u, v))?;
            range.0 = range.0.min(h);
            range.1 = range.1.max(h);
            *k = self.index(h);
        }
        if ks.iter().all(|&k| k == ks[0]) || depth >= self.depth {
            out.push((cell, ks[0]));
            return Ok(());
        }
        for sub in cell.split4() {
            self.slice(sub, depth + 1, out, range)?;
        }
        Ok(())
    }
}

/// Builds the level-`l` partition and the discretized ensemble
/// `sum_k pi(B_k) delta_{x_k}` with budget `budget`.
pub fn discretize<P, S, C>(
    prior: &P,
    states: &S,
    f: &C,
    budget: f64,
    grid: &GridSpec,
) -> Result<Discretization>
where
    P: Prior + ?Sized,
    S: StateMap + ?Sized,
    C: Constraint + ?Sized,
{
    grid.validate()?;
    let eps = grid.diameter_bound();

    if let Some(x0) = prior.point_mass() {
        let cell = Cell {
            region: Region::Atom,
            mass: 1.0,
            representative: x0,
            f_value: f.value(x0),
            entropy_slice: Some((grid.level as f64 * states.entropy(x0)?).floor() as i64),
        };
        let partition = CellPartition {
            level: grid.level,
            radius: grid.radius,
            diameter_bound: eps,
            cells: vec![cell],
            degenerate_level_set: true,
        };
        let ensemble = Ensemble::new(
            vec![x0],
            vec![1.0],
            vec![states.signal(x0)?],
            vec![f.value(x0)],
            budget,
        )?;
        return Ok(Discretization { partition, ensemble });
    }

    let n_r = grid.annuli();
    let width = grid.radius / n_r as f64;
    let slicer = Slicer { states, level: grid.level as f64, depth: grid.slicing_depth };

    let annuli: Vec<Result<(Vec<Cell>, (f64, f64))>> = (0..n_r)
        .into_par_iter()
        .map(|i| {
            let r0 = i as f64 * width;
            let r1 = if i + 1 == n_r { grid.radius } else { (i + 1) as f64 * width };
            let mut sectors = grid.min_sectors;
            while (r1 - r0) + 2.0 * r1 * (PI / sectors as f64).sin() > eps {
                sectors *= 2;
            }
            let dt = 2.0 * PI / sectors as f64;
            let mut cells = Vec::with_capacity(sectors);
            let mut range = (f64::INFINITY, f64::NEG_INFINITY);
            let mut pieces = Vec::new();
            for j in 0..sectors {
                let base = PolarCell {
                    r0,
                    r1,
                    theta0: j as f64 * dt,
                    theta1: if j + 1 == sectors { 2.0 * PI } else { (j + 1) as f64 * dt },
                };
                pieces.clear();
                slicer.slice(base, 0, &mut pieces, &mut range)?;
                for &(pc, _) in &pieces {
                    let x = representative(f, &pc);
                    cells.push(Cell {
                        region: Region::Polar(pc),
                        mass: cell_mass(prior, &pc, grid.mass_rel_tol),
                        representative: x,
                        f_value: f.value(x),
                        entropy_slice: Some(slicer.index(slicer.entropy(x)?)),
                    });
                }
            }
            Ok((cells, range))
        })
        .collect();

    let mut cells = Vec::new();
    let mut range = (f64::INFINITY, f64::NEG_INFINITY);
    for a in annuli {
        let (c, (lo, hi)) = a?;
        cells.extend(c);
        range.0 = range.0.min(lo);
        range.1 = range.1.max(hi);
    }
    let interior: f64 = cells.iter().map(|c| c.mass).sum();
    let xc = circle_minimizer(f, grid.radius);
    cells.push(Cell {
        region: Region::Exterior { radius: grid.radius },
        mass: (1.0 - interior).max(0.0),
        representative: xc,
        f_value: f.value(xc),
        entropy_slice: None,
    });
    // Only quadrature error can push the interior mass past one.
    if interior > 1.0 {
        cells.iter_mut().for_each(|c| c.mass /= interior);
    }

    let mut points = Vec::with_capacity(cells.len());
    let mut weights = Vec::with_capacity(cells.len());
    let mut signals = Vec::with_capacity(cells.len());
    let mut f_values = Vec::with_capacity(cells.len());
    for c in &cells {
        points.push(c.representative);
        weights.push(c.mass);
        signals.push(states.signal(c.representative)?);
        f_values.push(c.f_value);
    }
    let ensemble = Ensemble::new(points, weights, signals, f_values, budget)?;
    let partition = CellPartition {
        level: grid.level,
        radius: grid.radius,
        diameter_bound: eps,
        cells,
        degenerate_level_set: range.1 - range.0 <= 1e-12,
    };
    Ok(Discretization { partition, ensemble })
}

/// Fine quadrature ensemble approximating `pi` itself on the disc of
/// radius `c`: composite Gauss–Legendre in `r` (panels of width 1/4, 20
/// nodes each) times `2 d + 1` equispaced angles, which integrates every
/// matrix element of a `d`-dimensional phase-rotated state exactly in the
/// angle. Weights are renormalized over the disc.
pub fn reference_ensemble<P, S, C>(prior: &P, states: &S, f: &C, budget: f64, radius: f64) -> Result<Ensemble>
where
    P: Prior + ?Sized,
    S: StateMap + ?Sized,
    C: Constraint + ?Sized,
{
    if let Some(x0) = prior.point_mass() {
        return Ensemble::new(vec![x0], vec![1.0], vec![states.signal(x0)?], vec![f.value(x0)], budget);
    }
    let panels = (radius / 0.25).ceil().max(1.0) as usize;
    let h = radius / panels as f64;
    let n_theta = 2 * states.dim() + 1;
    let dt = 2.0 * PI / n_theta as f64;
    let mut points = Vec::new();
    let mut weights = Vec::new();
    let mut signals = Vec::new();
    let mut f_values = Vec::new();
    for p in 0..panels {
        for (r, wr) in quadrature::gauss_legendre(20, p as f64 * h, (p + 1) as f64 * h) {
            let base = states.radial_base(r).transpose()?;
            for k in 0..n_theta {
                let x = C64::from_polar(r, k as f64 * dt);
                let w = wr * r * dt * prior.density(x);
                let signal = match &base {
                    Some(b) => Signal::rotated(b.clone(), k as f64 * dt),
                    None => states.signal(x)?,
                };
                points.push(x);
                weights.push(w);
                signals.push(signal);
                f_values.push(f.value(x));
            }
        }
    }
    let total: f64 = weights.iter().sum();
    if !(total > 0.0) {
        return Err(Error::Domain("prior has no mass inside the reference disc".into()));
    }
    weights.iter_mut().for_each(|w| *w /= total);
    Ensemble::new(points, weights, signals, f_values, budget)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub level: usize,
    pub cells: usize,
    pub delta_h: f64,
    /// `target - delta_h`.
    pub deficit: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub target: f64,
    pub rows: Vec<ConvergenceRow>,
    pub degenerate_level_set: bool,
}

impl ConvergenceReport {
    pub fn final_deficit(&self) -> Option<f64> {
        self.rows.last().map(|r| r.deficit)
    }

    /// Largest drop `delta_h(prev) - delta_h(next)` between consecutive levels.
    pub fn max_decrease(&self) -> f64 {
        self.rows
            .windows(2)
            .map(|w| w[0].delta_h - w[1].delta_h)
            .fold(0.0, f64::max)
    }

    /// CSV with header `level,delta_h,deficit`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["level", "delta_h", "deficit"])?;
        for r in &self.rows {
            w.write_record(&[
                r.level.to_string(),
                format!("{:.12}", r.delta_h),
                format!("{:.6e}", r.deficit),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// `delta_H` of the level-`l` discretizations for each level in `levels`,
/// next to the reference value on the disc of `template.radius`.
pub fn convergence_report<P, S, C>(
    prior: &P,
    states: &S,
    f: &C,
    budget: f64,
    levels: &[usize],
    template: &GridSpec,
) -> Result<ConvergenceReport>
where
    P: Prior + ?Sized,
    S: StateMap + ?Sized,
    C: Constraint + ?Sized,
{
    if levels.is_empty() {
        return Err(Error::InvalidInput("no discretization levels given".into()));
    }
    let target = reference_ensemble(prior, states, f, budget, template.radius)?.holevo_quantity()?;
    let mut rows = Vec::with_capacity(levels.len());
    let mut degenerate = true;
    for &level in levels {
        let grid = GridSpec { level, ..*template };
        let d = discretize(prior, states, f, budget, &grid)?;
        degenerate &= d.partition.degenerate_level_set;
        let delta_h = d.ensemble.holevo_quantity()?;
        rows.push(ConvergenceRow {
            level,
            cells: d.partition.cells.len(),
            delta_h,
            deficit: target - delta_h,
        });
    }
    Ok(ConvergenceReport { target, rows, degenerate_level_set: degenerate })
}
